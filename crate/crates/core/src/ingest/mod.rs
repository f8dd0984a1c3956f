//! Loading tabular data from CSV, ARFF and the OpenML REST API.

pub mod arff;
pub mod csv;
pub mod openml;
pub mod table;

pub use self::arff::{parse_arff, write_arff, ArffAttribute, ArffHeader, ArffType};
pub use self::csv::{parse_csv, CsvOptions, TargetColumn};
pub use openml::{FetchOptions, OpenMl, Transport, TransportError};
pub use table::{Cell, Column, ColumnType, LabelEncoding, RawTable};
