//! The SheetSpec@2 workbook document: in-memory model, parser, validator and
//! canonical serialization.
//!
//! Cells are encoded sparsely. Each cell object carries an explicit `ref` address
//! and exactly one of `text`, `number` or `formula`, plus an optional `style`:
//!
//! ```json
//! {"ref": "B3", "formula": "=SUM(B1:B2)", "style": {"fontWeight": "bold"}}
//! ```

mod color;
mod parse;
mod validate;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::a1::{CellAddr, Rect};

pub use color::{Color, NAMED_COLORS};
pub use parse::{parse_workbook, parse_workbook_report, parse_workbook_str};
pub use validate::validate_workbook;

/// The only accepted value of the top-level `version` field.
pub const VERSION: &str = "SheetSpec@2";

/// System prompt handed to generator models alongside the schema.
pub const DEFAULT_SYSTEM_PROMPT: &str = "You are a spreadsheet expert.

Return ONLY valid JSON conforming exactly to the provided JSON Schema (SheetSpec@2).
Do not include any explanation, comments, or code fences - output a single JSON object.

All formulas must:
- Use Excel-compatible A1 notation.
- Use commas (,) as argument separators.

Formatting and styling are optional but, if included, must comply with the schema definitions.

Validate that:
- All sheet, column, and cell references used in formulas exist in the output.
- The JSON is syntactically valid and can be parsed directly without modification.";

const SCHEMA_JSON: &str = include_str!("schema.json");

/// JSON Schema for the document encoding accepted by [`parse_workbook`].
pub fn json_schema() -> serde_json::Value {
    serde_json::from_str(SCHEMA_JSON).expect("bundled schema is valid JSON")
}

/// JSON Schema as the exact bundled text.
pub fn json_schema_text() -> &'static str {
    SCHEMA_JSON
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SheetSpecError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    MalformedJson {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },
}

impl SheetSpecError {
    /// JSON-pointer-style document path, if the error has one.
    pub fn path(&self) -> Option<&str> {
        match self {
            SheetSpecError::SchemaViolation { path, .. } => Some(path),
            SheetSpecError::MalformedJson { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpecVersion {
    #[serde(rename = "SheetSpec@2")]
    V2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Workbook {
    pub version: SpecVersion,
    pub sheets: Vec<Sheet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<OutputRef>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rules: Option<Rules>,
}

impl Workbook {
    /// Case-insensitive sheet lookup, returning the sheet's index.
    pub fn sheet_index(&self, name: &str) -> Option<usize> {
        self.sheets
            .iter()
            .position(|s| s.name.eq_ignore_ascii_case(name))
    }

    pub fn sheet(&self, name: &str) -> Option<&Sheet> {
        self.sheet_index(name).map(|i| &self.sheets[i])
    }

    /// Iterate `(sheet index, cell)` across every sheet.
    pub fn cells(&self) -> impl Iterator<Item = (usize, &Cell)> {
        self.sheets
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.cells.iter().map(move |c| (i, c)))
    }

    pub fn cell_count(&self) -> usize {
        self.sheets.iter().map(|s| s.cells.len()).sum()
    }

    /// Canonical serialization: compact UTF-8 JSON with keys in schema order.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("workbook serialization is infallible")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputMetric {
    Value,
    Values,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRef {
    pub name: String,
    pub sheet: String,
    #[serde(rename = "ref")]
    pub reference: String,
    pub metric: OutputMetric,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Rules {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disallow_volatile: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allowed_functions: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Sheet {
    pub name: String,
    pub cells: Vec<Cell>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub named_ranges: Option<Vec<NamedRange>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditional_formats: Option<Vec<ConditionalFormatRule>>,
}

impl Sheet {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            cells: Vec::new(),
            named_ranges: None,
            conditional_formats: None,
        }
    }

    pub fn cell(&self, addr: CellAddr) -> Option<&Cell> {
        self.cells.iter().find(|c| c.addr == addr)
    }

    pub fn named_ranges(&self) -> &[NamedRange] {
        self.named_ranges.as_deref().unwrap_or(&[])
    }
}

/// Tightest rectangle containing every cell of `sheet`; `None` for an empty sheet.
pub fn used_range(sheet: &Sheet) -> Option<Rect> {
    let mut iter = sheet.cells.iter().map(|c| c.addr);
    let first = iter.next()?;
    Some(iter.fold(Rect::from_corners(first, first), |r, a| Rect {
        min_row: r.min_row.min(a.row),
        max_row: r.max_row.max(a.row),
        min_col: r.min_col.min(a.col),
        max_col: r.max_col.max(a.col),
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedRange {
    pub name: String,
    /// Raw A1 range text; checked by [`validate_workbook`].
    #[serde(rename = "ref")]
    pub reference: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    #[serde(rename = "ref")]
    pub addr: CellAddr,
    #[serde(flatten)]
    pub content: CellContent,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub style: Option<CellStyle>,
}

impl Cell {
    pub fn text(addr: CellAddr, text: impl Into<String>) -> Self {
        Self {
            addr,
            content: CellContent::Text(text.into()),
            style: None,
        }
    }

    pub fn number(addr: CellAddr, value: f64) -> Self {
        Self {
            addr,
            content: CellContent::Number(value),
            style: None,
        }
    }

    pub fn formula(addr: CellAddr, source: impl Into<String>) -> Self {
        Self {
            addr,
            content: CellContent::Formula(source.into()),
            style: None,
        }
    }

    pub fn with_style(mut self, style: CellStyle) -> Self {
        self.style = Some(style);
        self
    }

    pub fn style(&self) -> Option<&CellStyle> {
        self.style.as_ref()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CellContent {
    Text(String),
    Number(f64),
    /// Source text including the leading `=`.
    Formula(String),
}

impl CellContent {
    pub fn kind(&self) -> CellKind {
        match self {
            CellContent::Text(_) => CellKind::Text,
            CellContent::Number(_) => CellKind::Number,
            CellContent::Formula(_) => CellKind::Formula,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Text,
    Number,
    Formula,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FontWeight {
    Normal,
    Bold,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CellStyle {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fill: Option<Color>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub font_color: Option<Color>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub font_weight: Option<FontWeight>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub font_size: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub number_format: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub border: Option<Border>,
}

impl CellStyle {
    pub fn is_empty(&self) -> bool {
        *self == CellStyle::default()
    }

    pub fn is_bold(&self) -> bool {
        self.font_weight == Some(FontWeight::Bold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BorderSide {
    Top,
    Right,
    Bottom,
    Left,
}

/// Normalized border descriptor. Shorthands (`true`, `"thin"`, per-side objects)
/// are folded into this shape at parse time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Border {
    pub style: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub color: Option<Color>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sides: Option<Vec<BorderSide>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum CompareOperator {
    GreaterThan,
    GreaterThanOrEqual,
    LessThan,
    LessThanOrEqual,
    Equal,
    NotEqual,
}

impl CompareOperator {
    pub const ALL: [(&'static str, CompareOperator); 6] = [
        ("greaterThan", CompareOperator::GreaterThan),
        ("greaterThanOrEqual", CompareOperator::GreaterThanOrEqual),
        ("lessThan", CompareOperator::LessThan),
        ("lessThanOrEqual", CompareOperator::LessThanOrEqual),
        ("equal", CompareOperator::Equal),
        ("notEqual", CompareOperator::NotEqual),
    ];
}

/// Operand of a comparison rule: a number, or text (a literal or `=formula`).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum RuleOperand {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorKind {
    Min,
    Max,
    Number,
    Percentile,
}

/// Where a color-scale or data-bar stop sits: auto min/max, a fixed number, or a percentile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleAnchor {
    #[serde(rename = "type")]
    pub kind: AnchorKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleStop {
    #[serde(flatten)]
    pub anchor: ScaleAnchor,
    pub color: Color,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum ConditionalFormatRule {
    CellIs {
        range: String,
        operator: CompareOperator,
        value: RuleOperand,
        #[serde(skip_serializing_if = "Option::is_none")]
        style: Option<CellStyle>,
    },
    CellIsBetween {
        range: String,
        min: RuleOperand,
        max: RuleOperand,
        #[serde(skip_serializing_if = "Option::is_none")]
        style: Option<CellStyle>,
    },
    Expression {
        range: String,
        formula: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        style: Option<CellStyle>,
    },
    ContainsText {
        range: String,
        text: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        style: Option<CellStyle>,
    },
    ColorScale {
        range: String,
        min: ScaleStop,
        #[serde(skip_serializing_if = "Option::is_none")]
        mid: Option<ScaleStop>,
        max: ScaleStop,
    },
    DataBar {
        range: String,
        color: Color,
        #[serde(skip_serializing_if = "Option::is_none")]
        min: Option<ScaleAnchor>,
        #[serde(skip_serializing_if = "Option::is_none")]
        max: Option<ScaleAnchor>,
    },
}

impl ConditionalFormatRule {
    pub fn range(&self) -> &str {
        match self {
            ConditionalFormatRule::CellIs { range, .. }
            | ConditionalFormatRule::CellIsBetween { range, .. }
            | ConditionalFormatRule::Expression { range, .. }
            | ConditionalFormatRule::ContainsText { range, .. }
            | ConditionalFormatRule::ColorScale { range, .. }
            | ConditionalFormatRule::DataBar { range, .. } => range,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub severity: Severity,
    pub path: String,
    pub message: String,
}

impl Issue {
    pub fn error(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn warning(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} at {}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn from_issues(issues: Vec<Issue>) -> Self {
        let ok = !issues.iter().any(|i| i.severity == Severity::Error);
        Self { ok, issues }
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Warning)
    }
}
