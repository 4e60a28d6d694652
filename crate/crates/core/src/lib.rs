//! Workbook model, formula engine and programmatic features for generated spreadsheets.

pub mod a1;
pub mod features;
pub mod formula;
pub mod sheetspec;

pub use a1::CellAddr;
pub use formula::{evaluate_workbook, CellValue, ErrorCode, EvaluatedGrid};
pub use sheetspec::{parse_workbook, validate_workbook, Workbook};
