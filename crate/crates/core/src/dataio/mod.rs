//! CSV input, JSON reports and SVG figures.

pub mod csv;
pub mod report;
pub mod svg;

pub use self::csv::{parse_grouped_csv, parse_paired_csv};
pub use report::{parse_report_json, to_canonical_json, write_report_json, ResultReport};
pub use svg::{render_step_svg, PlotOptions};
