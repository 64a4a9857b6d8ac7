//! File formats, result output and the command line front end.

mod classmap;
mod cli;
mod config;
mod format;
mod report;

pub use classmap::{decode_class_map, decode_rgb, encode_class_map, render_class_map, Rgb, DEFAULT_PALETTE};
pub use cli::{run, THREADS_ENV};
pub use config::{RunConfig, DEFAULT_D, DEFAULT_K, DEFAULT_REPEATS, DEFAULT_TRAIN_COUNT, DEFAULT_W};
pub use format::{
    decode_cube, decode_labels, encode_cube, encode_labels, load_cube, load_labels, save_cube, save_labels,
    write_atomic, CUBE_HEADER_LEN, CUBE_MAGIC, CUBE_VERSION, LABEL_HEADER_LEN, LABEL_MAGIC,
};
pub use report::{embedded_csv, export_metrics, export_sweep, fixed2, metrics_csv, projection_csv, sweep_csv};
