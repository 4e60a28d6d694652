//! Programmatic workbook features.
//!
//! Ratios share one denominator: the number of non-empty cells across every
//! sheet. Count features named `log_*` are `ln(1 + x)`.

mod color;
mod tables;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{classify_functions, CellKey, EvaluatedGrid, Expr};
use crate::sheetspec::{used_range, CellContent, Workbook};

pub use color::{finance_color_score, ColorFamily};
pub use tables::{detect_tables, side_by_side, TableRegion, MIN_TABLE_CELLS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("need at least 2 rows to standardize, got {0}")]
    InsufficientData(usize),
    #[error("row {row} has {got} columns, expected {expected}")]
    Ragged {
        row: usize,
        got: usize,
        expected: usize,
    },
}

macro_rules! feature_vector {
    ($($field:ident),* $(,)?) => {
        /// One value per workbook for each covariate, in canonical order.
        #[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
        pub struct FeatureVector {
            $(pub $field: f64,)*
        }

        /// Canonical feature names, in the column order used for CSV output and fitting.
        pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [$(stringify!($field)),*];

        impl FeatureVector {
            pub fn values(&self) -> [f64; FEATURE_COUNT] {
                [$(self.$field),*]
            }

            pub fn from_values(v: [f64; FEATURE_COUNT]) -> Self {
                let mut it = v.into_iter();
                Self { $($field: it.next().unwrap_or_default(),)* }
            }

            pub fn get(&self, name: &str) -> Option<f64> {
                FEATURE_NAMES.iter().position(|n| *n == name).map(|i| self.values()[i])
            }
        }
    };
}

pub const FEATURE_COUNT: usize = 29;

feature_vector!(
    compute_error_rate,
    compute_pct_numeric,
    log_distinct_functions,
    log_num_lookups,
    log_num_conditionals,
    pct_formulas_with_literals,
    pct_text,
    pct_formula,
    log_total_text_tokens,
    pct_fill,
    pct_bold,
    has_border,
    pct_number_format,
    distinct_font_sizes,
    pct_font_color,
    log_distinct_font_colors,
    distinct_fills,
    finance_color_convention,
    log_row_count,
    log_col_count,
    log_aspect_ratio,
    cell_density,
    log_num_blank_rows,
    num_single_cell_rows,
    num_tables,
    has_parallel_tables,
    avg_tables_per_sheet,
    largest_table_pct,
    log_table_size_variance,
);

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn ln1p(x: f64) -> f64 {
    x.ln_1p()
}

/// `(function name, 0-based argument index)` pairs whose numeric literals are
/// structural rather than hard-coded values.
const POSITIONAL_ARGS: &[(&str, usize)] =
    &[("VLOOKUP", 2), ("HLOOKUP", 2), ("MATCH", 2), ("ROUND", 1)];

/// Whether `expr` contains a number literal outside positional index arguments.
pub fn has_embedded_literal(expr: &Expr) -> bool {
    match expr {
        Expr::Number(_) => true,
        Expr::Call { name, args } => args.iter().enumerate().any(|(i, a)| {
            !POSITIONAL_ARGS.contains(&(name.as_str(), i)) && has_embedded_literal(a)
        }),
        Expr::Unary { expr, .. } => has_embedded_literal(expr),
        Expr::Binary { lhs, rhs, .. } => has_embedded_literal(lhs) || has_embedded_literal(rhs),
        _ => false,
    }
}

pub fn extract_features(wb: &Workbook, grid: &EvaluatedGrid) -> FeatureVector {
    let mut n = 0usize;
    let (mut text, mut formulas, mut numeric) = (0usize, 0usize, 0usize);
    let (mut fill, mut bold, mut number_format, mut font_color) = (0usize, 0usize, 0usize, 0usize);
    let mut border = false;
    let mut tokens = 0usize;
    let mut font_sizes = BTreeSet::new();
    let mut font_colors = BTreeSet::new();
    let mut fills = BTreeSet::new();

    for (si, cell) in wb.cells() {
        n += 1;
        match &cell.content {
            CellContent::Text(t) => {
                text += 1;
                tokens += t.split_whitespace().count();
            }
            CellContent::Formula(_) => formulas += 1,
            CellContent::Number(_) => {}
        }
        if grid
            .value(CellKey::new(si, cell.addr))
            .is_some_and(|v| v.is_number())
        {
            numeric += 1;
        }
        if let Some(style) = cell.style() {
            if let Some(c) = style.fill {
                fill += 1;
                fills.insert(c);
            }
            if let Some(c) = style.font_color {
                font_color += 1;
                font_colors.insert(c);
            }
            if style.is_bold() {
                bold += 1;
            }
            if style.number_format.is_some() {
                number_format += 1;
            }
            if let Some(size) = style.font_size {
                font_sizes.insert(size.to_bits());
            }
            border |= style.border.is_some();
        }
    }

    let with_literals = grid
        .formulas()
        .filter(|(_, parsed)| parsed.as_ref().is_ok_and(has_embedded_literal))
        .count();
    let classes = classify_functions(grid);

    let mut row_count = 0u64;
    let mut col_count = 0u64;
    let mut area = 0u64;
    let mut blank_rows = 0u64;
    let mut single_cell_rows = 0u64;
    let mut regions = Vec::new();
    let mut parallel = false;
    for sheet in &wb.sheets {
        if let Some(used) = used_range(sheet) {
            row_count += u64::from(used.height());
            col_count = col_count.max(u64::from(used.width()));
            area += used.area();
            let mut per_row: BTreeMap<u32, usize> = BTreeMap::new();
            for c in &sheet.cells {
                *per_row.entry(c.addr.row).or_default() += 1;
            }
            blank_rows += u64::from(used.height()) - per_row.len() as u64;
            single_cell_rows += per_row.values().filter(|&&k| k == 1).count() as u64;
        }
        let found = detect_tables(sheet);
        parallel |= found
            .iter()
            .enumerate()
            .any(|(i, a)| found[i + 1..].iter().any(|b| side_by_side(a, b)));
        regions.extend(found);
    }

    let sizes: Vec<f64> = regions.iter().map(|r| r.cell_count as f64).collect();
    let size_variance = if sizes.is_empty() {
        0.0
    } else {
        let mean = sizes.iter().sum::<f64>() / sizes.len() as f64;
        sizes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / sizes.len() as f64
    };
    let largest = regions.iter().map(|r| r.cell_count).max().unwrap_or(0);

    FeatureVector {
        compute_error_rate: ratio(grid.error_cell_count, grid.formula_cell_count),
        compute_pct_numeric: ratio(numeric, n),
        log_distinct_functions: ln1p(classes.distinct as f64),
        log_num_lookups: ln1p(classes.lookup as f64),
        log_num_conditionals: ln1p(classes.conditional as f64),
        pct_formulas_with_literals: ratio(with_literals, grid.formula_cell_count),
        pct_text: ratio(text, n),
        pct_formula: ratio(formulas, n),
        log_total_text_tokens: ln1p(tokens as f64),
        pct_fill: ratio(fill, n),
        pct_bold: ratio(bold, n),
        has_border: f64::from(u8::from(border)),
        pct_number_format: ratio(number_format, n),
        distinct_font_sizes: font_sizes.len() as f64,
        pct_font_color: ratio(font_color, n),
        log_distinct_font_colors: ln1p(font_colors.len() as f64),
        distinct_fills: fills.len() as f64,
        finance_color_convention: finance_color_score(wb, grid),
        log_row_count: ln1p(row_count as f64),
        log_col_count: ln1p(col_count as f64),
        log_aspect_ratio: if col_count == 0 {
            0.0
        } else {
            ln1p(row_count as f64 / col_count as f64)
        },
        cell_density: if area == 0 { 0.0 } else { n as f64 / area as f64 },
        log_num_blank_rows: ln1p(blank_rows as f64),
        num_single_cell_rows: single_cell_rows as f64,
        num_tables: regions.len() as f64,
        has_parallel_tables: f64::from(u8::from(parallel)),
        avg_tables_per_sheet: ratio(regions.len(), wb.sheets.len()),
        largest_table_pct: ratio(largest, n),
        log_table_size_variance: ln1p(size_variance),
    }
}

/// Column-wise z-scores with population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Standardized {
    pub rows: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub std_dev: Vec<f64>,
    /// Columns with zero variance; their standardized values are all `0`.
    pub degenerate: Vec<bool>,
}

impl Standardized {
    pub fn degenerate_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.degenerate
            .iter()
            .enumerate()
            .filter(|(_, d)| **d)
            .map(|(i, _)| i)
    }
}

pub fn standardize_columns(matrix: &[Vec<f64>]) -> Result<Standardized, FeatureError> {
    if matrix.len() < 2 {
        return Err(FeatureError::InsufficientData(matrix.len()));
    }
    let width = matrix[0].len();
    if let Some((row, r)) = matrix.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(FeatureError::Ragged {
            row,
            got: r.len(),
            expected: width,
        });
    }
    let n = matrix.len() as f64;
    let mean: Vec<f64> = (0..width)
        .map(|j| matrix.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let std_dev: Vec<f64> = (0..width)
        .map(|j| {
            let var = matrix.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
            var.sqrt()
        })
        .collect();
    // Relative threshold so that constant columns with rounding noise still count as constant.
    let degenerate: Vec<bool> = (0..width)
        .map(|j| std_dev[j] <= 1e-12 * mean[j].abs().max(1.0))
        .collect();
    let rows = matrix
        .iter()
        .map(|r| {
            (0..width)
                .map(|j| {
                    if degenerate[j] {
                        0.0
                    } else {
                        (r[j] - mean[j]) / std_dev[j]
                    }
                })
                .collect()
        })
        .collect();
    Ok(Standardized {
        rows,
        mean,
        std_dev,
        degenerate,
    })
}

pub fn standardize_features(rows: &[FeatureVector]) -> Result<Standardized, FeatureError> {
    let matrix: Vec<Vec<f64>> = rows.iter().map(|r| r.values().to_vec()).collect();
    standardize_columns(&matrix)
}
