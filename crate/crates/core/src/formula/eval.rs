use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

use crate::a1::CellAddr;
use crate::sheetspec::{CellContent, Workbook};

use super::ast::{BinaryOp, Expr, UnaryOp};
use super::functions;
use super::graph::{parse_all, CellKey, DepGraph, ParsedFormulas};
use super::resolve::{RangeRef, Target, WorkbookIndex};
use super::value::{CellValue, ErrorCode};
use super::SyntaxError;

/// Intermediate result: a scalar or a reference to a block of cells.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Val {
    S(CellValue),
    R(RangeRef),
}

impl From<CellValue> for Val {
    fn from(v: CellValue) -> Self {
        Val::S(v)
    }
}

pub(crate) fn err(code: ErrorCode) -> Val {
    Val::S(CellValue::Error(code))
}

/// Values computed for every non-empty cell of a workbook.
#[derive(Debug, Clone)]
pub struct EvaluatedGrid {
    sheet_names: Vec<String>,
    values: BTreeMap<CellKey, CellValue>,
    formulas: ParsedFormulas,
    pub formula_cell_count: usize,
    pub error_cell_count: usize,
    /// Function name → number of call sites across all parsed formulas.
    pub function_usage: BTreeMap<String, usize>,
    pub graph: DepGraph,
}

impl EvaluatedGrid {
    pub fn sheet_names(&self) -> &[String] {
        &self.sheet_names
    }

    pub fn value(&self, key: CellKey) -> Option<&CellValue> {
        self.values.get(&key)
    }

    /// Value by sheet name (case-insensitive) and address.
    pub fn get(&self, sheet: &str, addr: CellAddr) -> Option<&CellValue> {
        let si = self
            .sheet_names
            .iter()
            .position(|s| s.eq_ignore_ascii_case(sheet))?;
        self.values.get(&CellKey::new(si, addr))
    }

    pub fn iter(&self) -> impl Iterator<Item = (CellKey, &CellValue)> {
        self.values.iter().map(|(k, v)| (*k, v))
    }

    /// Parse result for a formula cell.
    pub fn formula(&self, key: CellKey) -> Option<&Result<Expr, SyntaxError>> {
        self.formulas.get(&key)
    }

    pub fn formulas(&self) -> impl Iterator<Item = (CellKey, &Result<Expr, SyntaxError>)> {
        self.formulas.iter().map(|(k, v)| (*k, v))
    }

    /// `{"Sheet": {"A1": {"value": ...} | {"error": "#CODE"}}}`
    pub fn to_json(&self) -> serde_json::Value {
        let mut out = serde_json::Map::new();
        for (si, name) in self.sheet_names.iter().enumerate() {
            let cells: serde_json::Map<String, serde_json::Value> = self
                .values
                .range(CellKey::new(si, CellAddr::new(0, 0))..CellKey::new(si + 1, CellAddr::new(0, 0)))
                .map(|(k, v)| (k.addr.to_a1(), v.to_json()))
                .collect();
            out.insert(name.clone(), serde_json::Value::Object(cells));
        }
        serde_json::Value::Object(out)
    }
}

impl Serialize for EvaluatedGrid {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

/// Evaluate every formula in `wb`.
pub fn evaluate_workbook(wb: &Workbook) -> EvaluatedGrid {
    let idx = WorkbookIndex::new(wb);
    let formulas = parse_all(wb);
    let graph = DepGraph::build(&idx, &formulas);

    let mut values = BTreeMap::new();
    for (si, cell) in wb.cells() {
        let key = CellKey::new(si, cell.addr);
        let v = match &cell.content {
            CellContent::Text(s) => CellValue::Text(s.clone()),
            CellContent::Number(n) => CellValue::number(*n),
            CellContent::Formula(_) => match &formulas[&key] {
                Err(_) => CellValue::Error(ErrorCode::Name),
                Ok(_) if graph.in_cycle(key) => CellValue::Error(ErrorCode::Circ),
                // filled in below, in dependency order
                Ok(_) => CellValue::Blank,
            },
        };
        values.insert(key, v);
    }

    let mut ev = Evaluator { idx: &idx, values };
    for key in graph.evaluation_order() {
        let Ok(expr) = &formulas[key] else { continue };
        let v = ev.eval(key.sheet, expr);
        let v = match ev.scalar(v) {
            CellValue::Blank => CellValue::Number(0.0),
            CellValue::Number(n) => CellValue::number(n),
            other => other,
        };
        ev.values.insert(*key, v);
    }

    let mut function_usage = BTreeMap::new();
    for expr in formulas.values().flatten() {
        for name in expr.function_names() {
            *function_usage.entry(name.to_string()).or_insert(0) += 1;
        }
    }
    let error_cell_count = formulas
        .keys()
        .filter(|k| ev.values[k].is_error())
        .count();

    EvaluatedGrid {
        sheet_names: wb.sheets.iter().map(|s| s.name.clone()).collect(),
        formula_cell_count: formulas.len(),
        error_cell_count,
        function_usage,
        values: ev.values,
        formulas,
        graph,
    }
}

pub(crate) struct Evaluator<'a> {
    pub idx: &'a WorkbookIndex<'a>,
    pub values: BTreeMap<CellKey, CellValue>,
}

impl Evaluator<'_> {
    pub fn cell(&self, sheet: usize, addr: CellAddr) -> CellValue {
        self.values
            .get(&CellKey::new(sheet, addr))
            .cloned()
            .unwrap_or(CellValue::Blank)
    }

    /// Value at 0-based offsets inside `r`.
    pub fn at(&self, r: &RangeRef, i: u32, j: u32) -> CellValue {
        self.cell(r.sheet, r.addr(i, j))
    }

    /// Non-blank values inside `r`, row-major, with their 0-based offsets.
    pub fn non_blank(&self, r: &RangeRef) -> Vec<(u32, u32, CellValue)> {
        self.idx
            .cells_in(r)
            .map(|a| (a.row - r.top, a.col - r.left, self.cell(r.sheet, a)))
            .filter(|(_, _, v)| *v != CellValue::Blank)
            .collect()
    }

    /// All values inside `r`, row-major.
    pub fn all(&self, r: &RangeRef) -> Vec<CellValue> {
        let mut out = Vec::with_capacity(r.len());
        for i in 0..r.rows {
            for j in 0..r.cols {
                out.push(self.at(r, i, j));
            }
        }
        out
    }

    pub fn first_error(&self, r: &RangeRef) -> Option<ErrorCode> {
        self.idx
            .cells_in(r)
            .find_map(|a| self.cell(r.sheet, a).error())
    }

    /// Collapse to a scalar: 1×1 references yield their value, larger ones `#VALUE!`.
    pub fn scalar(&self, v: Val) -> CellValue {
        match v {
            Val::S(s) => s,
            Val::R(r) if r.rows == 1 && r.cols == 1 => self.at(&r, 0, 0),
            Val::R(_) => CellValue::Error(ErrorCode::Value),
        }
    }

    pub fn eval(&self, current: usize, expr: &Expr) -> Val {
        match expr {
            Expr::Number(n) => Val::S(CellValue::number(*n)),
            Expr::Text(s) => Val::S(CellValue::Text(s.clone())),
            Expr::Bool(b) => Val::S(CellValue::Bool(*b)),
            Expr::Error(e) => err(*e),
            Expr::Cell(c) => self.target(self.idx.target_of_cell(current, c)),
            Expr::Range(r) => self.target(self.idx.target_of_range(current, r)),
            Expr::Name(n) => self.target(self.idx.target_of_name(current, n)),
            Expr::Unary { op, expr } => {
                let v = self.scalar(self.eval(current, expr));
                if let CellValue::Error(_) = v {
                    return Val::S(v);
                }
                match op {
                    UnaryOp::Plus => Val::S(v),
                    UnaryOp::Neg => num_result(to_number(&v).map(|n| -n)),
                    UnaryOp::Percent => num_result(to_number(&v).map(|n| n / 100.0)),
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                let a = self.scalar(self.eval(current, lhs));
                let b = self.scalar(self.eval(current, rhs));
                Val::S(binary(*op, &a, &b))
            }
            Expr::Call { name, args } => functions::call(self, current, name, args),
        }
    }

    fn target(&self, t: Target) -> Val {
        match t {
            Target::Cell(s, a) => Val::R(RangeRef::single(s, a)),
            Target::Range(r) => Val::R(r),
            Target::Error(e) => err(e),
        }
    }
}

pub(crate) fn num_result(r: Result<f64, ErrorCode>) -> Val {
    match r {
        Ok(n) => Val::S(CellValue::number(n)),
        Err(e) => err(e),
    }
}

fn parse_number_text(s: &str) -> Option<f64> {
    let t = s.trim();
    let plausible = !t.is_empty()
        && t
            .bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-'));
    if !plausible {
        return None;
    }
    t.parse::<f64>().ok().filter(|n| n.is_finite())
}

pub(crate) fn to_number(v: &CellValue) -> Result<f64, ErrorCode> {
    match v {
        CellValue::Number(n) => Ok(*n),
        CellValue::Bool(b) => Ok(if *b { 1.0 } else { 0.0 }),
        CellValue::Blank => Ok(0.0),
        CellValue::Text(s) => parse_number_text(s).ok_or(ErrorCode::Value),
        CellValue::Error(e) => Err(*e),
    }
}

pub(crate) fn to_bool(v: &CellValue) -> Result<bool, ErrorCode> {
    match v {
        CellValue::Bool(b) => Ok(*b),
        CellValue::Number(n) => Ok(*n != 0.0),
        CellValue::Blank => Ok(false),
        CellValue::Text(s) if s.eq_ignore_ascii_case("TRUE") => Ok(true),
        CellValue::Text(s) if s.eq_ignore_ascii_case("FALSE") => Ok(false),
        CellValue::Text(_) => Err(ErrorCode::Value),
        CellValue::Error(e) => Err(*e),
    }
}

pub(crate) fn format_number(n: f64) -> String {
    if n == 0.0 {
        "0".into()
    } else {
        format!("{n}")
    }
}

pub(crate) fn to_text(v: &CellValue) -> Result<String, ErrorCode> {
    match v {
        CellValue::Number(n) => Ok(format_number(*n)),
        CellValue::Text(s) => Ok(s.clone()),
        CellValue::Bool(true) => Ok("TRUE".into()),
        CellValue::Bool(false) => Ok("FALSE".into()),
        CellValue::Blank => Ok(String::new()),
        CellValue::Error(e) => Err(*e),
    }
}

fn type_rank(v: &CellValue) -> u8 {
    match v {
        CellValue::Number(_) | CellValue::Blank | CellValue::Error(_) => 0,
        CellValue::Text(_) => 1,
        CellValue::Bool(_) => 2,
    }
}

/// Spreadsheet ordering: numbers < text < booleans; text compares case-insensitively;
/// a blank takes the zero value of the other operand's type.
pub(crate) fn compare(a: &CellValue, b: &CellValue) -> Ordering {
    use CellValue::*;
    let blank_as = |other: &CellValue| match other {
        Text(_) => Text(String::new()),
        Bool(_) => Bool(false),
        _ => Number(0.0),
    };
    let a2;
    let b2;
    let (a, b) = match (a, b) {
        (Blank, Blank) => return Ordering::Equal,
        (Blank, _) => {
            a2 = blank_as(b);
            (&a2, b)
        }
        (_, Blank) => {
            b2 = blank_as(a);
            (a, &b2)
        }
        _ => (a, b),
    };
    match (a, b) {
        (Number(x), Number(y)) => x.partial_cmp(y).unwrap_or(Ordering::Equal),
        (Text(x), Text(y)) => x.to_lowercase().cmp(&y.to_lowercase()),
        (Bool(x), Bool(y)) => x.cmp(y),
        _ => type_rank(a).cmp(&type_rank(b)),
    }
}

pub(crate) fn binary(op: BinaryOp, a: &CellValue, b: &CellValue) -> CellValue {
    if let CellValue::Error(e) = a {
        return CellValue::Error(*e);
    }
    if let CellValue::Error(e) = b {
        return CellValue::Error(*e);
    }
    let arith = |f: fn(f64, f64) -> Result<f64, ErrorCode>| {
        match (to_number(a), to_number(b)) {
            (Ok(x), Ok(y)) => match f(x, y) {
                Ok(n) => CellValue::number(n),
                Err(e) => CellValue::Error(e),
            },
            (Err(e), _) | (_, Err(e)) => CellValue::Error(e),
        }
    };
    match op {
        BinaryOp::Add => arith(|x, y| Ok(x + y)),
        BinaryOp::Sub => arith(|x, y| Ok(x - y)),
        BinaryOp::Mul => arith(|x, y| Ok(x * y)),
        BinaryOp::Div => arith(|x, y| {
            if y == 0.0 {
                Err(ErrorCode::Div0)
            } else {
                Ok(x / y)
            }
        }),
        BinaryOp::Pow => arith(|x, y| Ok(x.powf(y))),
        BinaryOp::Concat => match (to_text(a), to_text(b)) {
            (Ok(x), Ok(y)) => CellValue::Text(x + &y),
            (Err(e), _) | (_, Err(e)) => CellValue::Error(e),
        },
        BinaryOp::Eq => CellValue::Bool(compare(a, b) == Ordering::Equal),
        BinaryOp::Ne => CellValue::Bool(compare(a, b) != Ordering::Equal),
        BinaryOp::Lt => CellValue::Bool(compare(a, b) == Ordering::Less),
        BinaryOp::Le => CellValue::Bool(compare(a, b) != Ordering::Greater),
        BinaryOp::Gt => CellValue::Bool(compare(a, b) == Ordering::Greater),
        BinaryOp::Ge => CellValue::Bool(compare(a, b) != Ordering::Less),
    }
}
