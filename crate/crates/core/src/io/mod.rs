//! File ingestion and report serialization.

pub mod document;
pub mod table;

pub use document::{format_g17, ConfigEcho, MetricEntry, ReportDocument, SCHEMA_VERSION};
pub use table::{encode_npy, load_table, load_table_auto, parse_csv, parse_npy, write_csv, write_npy, TableFile, TableFormat};
