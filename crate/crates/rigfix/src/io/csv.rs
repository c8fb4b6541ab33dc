//! Match-set CSV serialization.
//!
//! Format: header `u0,v0,u1,v1,x0,y0,x1,y1,dx,dy,cost`, one row per match,
//! every value printed with 9 significant digits. Image dimensions and
//! intrinsics are not part of the format and travel separately.

use std::io::{BufRead, Write};

use crate::camera::{Intrinsics, NormalizedPoint, PixelPoint};
use crate::correspond::{Match, MatchSet};
use crate::error::{Error, Result};

pub const MATCH_CSV_HEADER: &str = "u0,v0,u1,v1,x0,y0,x1,y1,dx,dy,cost";

/// 9 significant digits, scientific: stable under parse/format round trips.
pub fn fmt_sig(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn write_matches<W: Write>(mut w: W, set: &MatchSet) -> Result<()> {
    writeln!(w, "{MATCH_CSV_HEADER}")?;
    for m in &set.matches {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_sig(m.left.u),
            fmt_sig(m.left.v),
            fmt_sig(m.right.u),
            fmt_sig(m.right.v),
            fmt_sig(m.n0.x),
            fmt_sig(m.n0.y),
            fmt_sig(m.n1.x),
            fmt_sig(m.n1.y),
            fmt_sig(m.dx),
            fmt_sig(m.dy),
            fmt_sig(m.zssd_cost),
        )?;
    }
    Ok(())
}

/// Parses a match CSV. The caller supplies the intrinsics and dimensions
/// the file was produced with; stored normalized coordinates are trusted
/// but checked for rough consistency with `dx`/`dy`.
pub fn read_matches<R: BufRead>(
    r: R,
    k0: Intrinsics,
    k1: Intrinsics,
    width: usize,
    height: usize,
) -> Result<MatchSet> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty match CSV".into()))??;
    if header.trim() != MATCH_CSV_HEADER {
        return Err(Error::Parse(format!("unexpected header: {header}")));
    }
    let mut matches = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
            })
            .collect::<Result<_>>()?;
        if fields.len() != 11 {
            return Err(Error::Parse(format!(
                "line {}: expected 11 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let m = Match {
            left: PixelPoint::new(fields[0], fields[1]),
            right: PixelPoint::new(fields[2], fields[3]),
            n0: NormalizedPoint::new(fields[4], fields[5]),
            n1: NormalizedPoint::new(fields[6], fields[7]),
            dx: fields[8],
            dy: fields[9],
            zssd_cost: fields[10],
        };
        if (m.dx - (m.n1.x - m.n0.x)).abs() > 1e-6 || (m.dy - (m.n1.y - m.n0.y)).abs() > 1e-6 {
            return Err(Error::Parse(format!(
                "line {}: dx/dy inconsistent with coordinates",
                lineno + 2
            )));
        }
        matches.push(m);
    }
    Ok(MatchSet {
        matches,
        width,
        height,
        k0,
        k1,
    })
}

/// Scatter CSV: `dx_px,dy_px,stage` with stage in {before, after}.
pub fn write_scatter<W: Write>(
    mut w: W,
    before: &[(f64, f64)],
    after: &[(f64, f64)],
) -> Result<()> {
    writeln!(w, "dx_px,dy_px,stage")?;
    for &(dx, dy) in before {
        writeln!(w, "{},{},before", fmt_sig(dx), fmt_sig(dy))?;
    }
    for &(dx, dy) in after {
        writeln!(w, "{},{},after", fmt_sig(dx), fmt_sig(dy))?;
    }
    Ok(())
}
