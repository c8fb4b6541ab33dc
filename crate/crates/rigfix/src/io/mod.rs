//! File formats: match CSV, PGM/PNG images, JSON reports, SVG scatterplots.

mod csv;
mod pgm;
mod report;
mod svg;

pub use csv::{fmt_sig, read_matches, write_matches, write_scatter, MATCH_CSV_HEADER};
pub use pgm::{load_gray, read_pgm, save_gray, write_pgm, ImageDepth};
pub use report::{SceneFile, SolveReport, StatsReport, TruthReport};
pub use svg::scatter_svg;
