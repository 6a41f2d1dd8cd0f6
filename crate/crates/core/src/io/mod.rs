//! File formats, run configuration and reports.

pub mod colormap;
pub mod config;
pub mod gridfile;
pub mod report;

pub use config::{load_config, parse_config, parse_formats, OutputConfig, OutputFormat, RunConfig};
pub use gridfile::{
    load_grid, load_spectrum, save_grid, save_joint_spectrum, save_spectrum, GridContent, GridMetadata,
};
