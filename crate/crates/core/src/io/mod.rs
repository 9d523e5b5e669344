pub mod config;
pub mod output;

pub use config::{
    parse_config_file, parse_config_str, resolve_out_dir, Command, Overrides, RunSpec, OUT_DIR_ENV,
};
pub use output::{
    format_csv_table, format_energy_series, format_vtk, write_csv_table, write_energy_series,
    write_vtk_field,
};
