//! Excel-compatible A1 formula engine: lexer, parser, dependency graph and evaluator.
//!
//! Evaluation rules worth knowing:
//! - errors propagate eagerly through every operator and function argument
//!   (including ranges and untaken `IF` branches); only `IFERROR` absorbs them
//! - a formula whose result is blank evaluates to `0`
//! - a multi-cell range used where a single value is expected is `#VALUE!`
//! - non-finite numeric results are `#VALUE!`
//! - cells on a reference cycle are `#CIRC!`; cells reading them inherit it

mod ast;
mod eval;
mod functions;
mod graph;
mod lexer;
mod parser;
mod resolve;
mod value;

use thiserror::Error;

pub use ast::{BinaryOp, CellRef, Expr, UnaryOp};
pub use eval::{evaluate_workbook, EvaluatedGrid};
pub use functions::{
    is_supported, CONDITIONAL_FUNCTIONS, LOOKUP_FUNCTIONS, SUPPORTED_FUNCTIONS, VOLATILE_FUNCTIONS,
};
pub use graph::{build_dependency_graph, CellKey, DepGraph};
pub use parser::parse_formula;
pub use value::{CellValue, ErrorCode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: {message}")]
pub struct SyntaxError {
    /// Byte offset into the full formula source (including the leading `=`).
    pub offset: usize,
    pub message: String,
}

/// Function-usage counts used by the formula-quality features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FunctionClasses {
    pub distinct: usize,
    pub lookup: usize,
    pub conditional: usize,
}

/// Distinct function names, and total lookup / conditional call sites.
pub fn classify_functions(grid: &EvaluatedGrid) -> FunctionClasses {
    let count = |set: &[&str]| -> usize {
        grid.function_usage
            .iter()
            .filter(|(name, _)| set.contains(&name.as_str()))
            .map(|(_, n)| n)
            .sum()
    };
    FunctionClasses {
        distinct: grid.function_usage.len(),
        lookup: count(LOOKUP_FUNCTIONS),
        conditional: count(CONDITIONAL_FUNCTIONS),
    }
}

/// Formula cells that read at least one cell on a different sheet, through a
/// sheet-qualified reference or a named range declared over another sheet.
/// References to sheets that do not exist read nothing and are ignored.
pub fn cross_sheet_formulas(
    wb: &crate::sheetspec::Workbook,
    grid: &EvaluatedGrid,
) -> std::collections::BTreeSet<CellKey> {
    let index = resolve::WorkbookIndex::new(wb);
    grid.formulas()
        .filter_map(|(key, parsed)| {
            let expr = parsed.as_ref().ok()?;
            let foreign = index.targets(key.sheet, expr).iter().any(|t| match t {
                resolve::Target::Cell(s, _) => *s != key.sheet,
                resolve::Target::Range(r) => r.sheet != key.sheet,
                resolve::Target::Error(_) => false,
            });
            foreign.then_some(key)
        })
        .collect()
}
