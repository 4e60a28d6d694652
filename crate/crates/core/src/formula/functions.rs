use std::cmp::Ordering;

use super::ast::Expr;
use super::eval::{compare, err, num_result, to_bool, to_number, to_text, Evaluator, Val};
use super::resolve::RangeRef;
use super::value::{CellValue, ErrorCode};

/// Functions the evaluator implements; any other name evaluates to `#NAME?`.
pub const SUPPORTED_FUNCTIONS: &[&str] = &[
    "ABS", "AND", "AVERAGE", "AVERAGEIF", "AVERAGEIFS", "CONCAT", "CONCATENATE", "COUNT",
    "COUNTA", "COUNTIF", "COUNTIFS", "HLOOKUP", "IF", "IFERROR", "IFS", "INDEX", "IRR", "LOOKUP",
    "MATCH", "MAX", "MIN", "NOT", "NPV", "OR", "PMT", "POWER", "ROUND", "SQRT", "SUM", "SUMIF",
    "SUMIFS", "SWITCH", "TEXT", "VLOOKUP", "XLOOKUP",
];

pub const LOOKUP_FUNCTIONS: &[&str] = &["VLOOKUP", "HLOOKUP", "LOOKUP", "XLOOKUP", "INDEX", "MATCH"];

pub const CONDITIONAL_FUNCTIONS: &[&str] = &[
    "IF", "IFS", "IFERROR", "SWITCH", "SUMIF", "SUMIFS", "COUNTIF", "COUNTIFS", "AVERAGEIF",
    "AVERAGEIFS",
];

/// Functions whose result changes without any input changing.
pub const VOLATILE_FUNCTIONS: &[&str] =
    &["NOW", "TODAY", "RAND", "RANDBETWEEN", "RANDARRAY", "OFFSET", "INDIRECT"];

pub fn is_supported(name: &str) -> bool {
    SUPPORTED_FUNCTIONS.contains(&name)
}

fn arity_ok(name: &str, n: usize) -> bool {
    let (min, max) = match name {
        "SUM" | "AVERAGE" | "MIN" | "MAX" | "COUNT" | "COUNTA" | "AND" | "OR" | "CONCAT"
        | "CONCATENATE" => (1, usize::MAX),
        "ABS" | "SQRT" | "NOT" => (1, 1),
        "ROUND" | "POWER" | "IFERROR" | "TEXT" | "COUNTIF" => (2, 2),
        "IF" | "SUMIF" | "AVERAGEIF" | "MATCH" | "INDEX" | "LOOKUP" => (2, 3),
        "IFS" | "COUNTIFS" => return n >= 2 && n % 2 == 0,
        "SUMIFS" | "AVERAGEIFS" => return n >= 3 && n % 2 == 1,
        "SWITCH" => (3, usize::MAX),
        "VLOOKUP" | "HLOOKUP" => (3, 4),
        "XLOOKUP" => (3, 6),
        "NPV" => (2, usize::MAX),
        "IRR" => (1, 2),
        "PMT" => (3, 5),
        _ => return false,
    };
    (min..=max).contains(&n)
}

pub(crate) fn call(ev: &Evaluator<'_>, current: usize, name: &str, args: &[Expr]) -> Val {
    if !is_supported(name) {
        return err(ErrorCode::Name);
    }
    if !arity_ok(name, args.len()) {
        return err(ErrorCode::Value);
    }
    if name == "IFERROR" {
        let v = ev.eval(current, &args[0]);
        let failed = match &v {
            Val::S(s) => s.is_error(),
            Val::R(r) => ev.first_error(r).is_some(),
        };
        return if failed { ev.eval(current, &args[1]) } else { v };
    }

    let vals: Vec<Val> = args.iter().map(|a| ev.eval(current, a)).collect();
    for v in &vals {
        let e = match v {
            Val::S(s) => s.error(),
            Val::R(r) => ev.first_error(r),
        };
        if let Some(e) = e {
            return err(e);
        }
    }
    let f = Fns { ev };
    match f.dispatch(name, &vals) {
        Ok(v) => v,
        Err(e) => err(e),
    }
}

type R<T> = Result<T, ErrorCode>;

struct Fns<'e, 'a> {
    ev: &'e Evaluator<'a>,
}

impl Fns<'_, '_> {
    fn scalar(&self, v: &Val) -> CellValue {
        self.ev.scalar(v.clone())
    }

    fn num(&self, v: &Val) -> R<f64> {
        to_number(&self.scalar(v))
    }

    fn int(&self, v: &Val) -> R<i64> {
        let n = self.num(v)?.trunc();
        if n.abs() > 1e15 {
            return Err(ErrorCode::Value);
        }
        Ok(n as i64)
    }

    fn boolean(&self, v: &Val) -> R<bool> {
        to_bool(&self.scalar(v))
    }

    fn range(&self, v: &Val) -> R<RangeRef> {
        match v {
            Val::R(r) => Ok(*r),
            Val::S(_) => Err(ErrorCode::Value),
        }
    }

    /// Numbers fed to SUM-like aggregates: referenced cells contribute only
    /// numbers; direct scalars are coerced.
    fn numbers(&self, vals: &[Val]) -> R<Vec<f64>> {
        let mut out = Vec::new();
        for v in vals {
            match v {
                Val::R(r) => out.extend(self.ev.non_blank(r).into_iter().filter_map(|(_, _, c)| {
                    match c {
                        CellValue::Number(n) => Some(n),
                        _ => None,
                    }
                })),
                Val::S(CellValue::Blank) => {}
                Val::S(s) => out.push(to_number(s)?),
            }
        }
        Ok(out)
    }

    fn dispatch(&self, name: &str, a: &[Val]) -> R<Val> {
        let num = |n: f64| Ok(Val::S(CellValue::number(n)));
        match name {
            "SUM" => num(self.numbers(a)?.iter().sum()),
            "AVERAGE" => {
                let xs = self.numbers(a)?;
                if xs.is_empty() {
                    return Err(ErrorCode::Div0);
                }
                num(xs.iter().sum::<f64>() / xs.len() as f64)
            }
            "MIN" => num(self.numbers(a)?.into_iter().reduce(f64::min).unwrap_or(0.0)),
            "MAX" => num(self.numbers(a)?.into_iter().reduce(f64::max).unwrap_or(0.0)),
            "COUNT" => {
                let mut n = 0usize;
                for v in a {
                    n += match v {
                        Val::R(r) => self
                            .ev
                            .non_blank(r)
                            .iter()
                            .filter(|(_, _, c)| c.is_number())
                            .count(),
                        Val::S(CellValue::Blank) => 0,
                        Val::S(s) => usize::from(to_number(s).is_ok()),
                    };
                }
                num(n as f64)
            }
            "COUNTA" => {
                let mut n = 0usize;
                for v in a {
                    n += match v {
                        Val::R(r) => self.ev.non_blank(r).len(),
                        Val::S(CellValue::Blank) => 0,
                        Val::S(_) => 1,
                    };
                }
                num(n as f64)
            }
            "ROUND" => {
                let x = self.num(&a[0])?;
                let d = self.int(&a[1])?.clamp(-15, 15) as i32;
                num(round_half_away(x, d))
            }
            "ABS" => num(self.num(&a[0])?.abs()),
            "SQRT" => {
                let x = self.num(&a[0])?;
                if x < 0.0 {
                    return Err(ErrorCode::Value);
                }
                num(x.sqrt())
            }
            "POWER" => num(self.num(&a[0])?.powf(self.num(&a[1])?)),
            "AND" | "OR" => {
                let bools = self.logicals(a)?;
                if bools.is_empty() {
                    return Err(ErrorCode::Value);
                }
                let r = if name == "AND" {
                    bools.iter().all(|b| *b)
                } else {
                    bools.iter().any(|b| *b)
                };
                Ok(Val::S(CellValue::Bool(r)))
            }
            "NOT" => Ok(Val::S(CellValue::Bool(!self.boolean(&a[0])?))),
            "IF" => {
                if self.boolean(&a[0])? {
                    Ok(a[1].clone())
                } else {
                    Ok(a.get(2).cloned().unwrap_or(Val::S(CellValue::Bool(false))))
                }
            }
            "IFS" => {
                for pair in a.chunks(2) {
                    if self.boolean(&pair[0])? {
                        return Ok(pair[1].clone());
                    }
                }
                Err(ErrorCode::NA)
            }
            "SWITCH" => {
                let key = self.scalar(&a[0]);
                let rest = &a[1..];
                for pair in rest.chunks(2) {
                    if pair.len() == 1 {
                        return Ok(pair[0].clone());
                    }
                    let cand = self.scalar(&pair[0]);
                    if same_kind(&key, &cand) && compare(&key, &cand) == Ordering::Equal {
                        return Ok(pair[1].clone());
                    }
                }
                Err(ErrorCode::NA)
            }
            "SUMIF" | "AVERAGEIF" => {
                let range = self.range(&a[0])?;
                let crit = Criterion::parse(&self.scalar(&a[1]));
                let target = match a.get(2) {
                    Some(v) => self.range(v)?,
                    None => range,
                };
                let xs = self.conditional_values(target, &[(range, crit)])?;
                self.sum_or_average(name == "AVERAGEIF", &xs)
            }
            "SUMIFS" | "AVERAGEIFS" => {
                let target = self.range(&a[0])?;
                let conds = self.condition_pairs(&a[1..])?;
                let xs = self.conditional_values(target, &conds)?;
                self.sum_or_average(name == "AVERAGEIFS", &xs)
            }
            "COUNTIF" | "COUNTIFS" => {
                let conds = self.condition_pairs(a)?;
                let shape = conds[0].0;
                let mut n = 0usize;
                for i in 0..shape.rows {
                    for j in 0..shape.cols {
                        if conds.iter().all(|(r, c)| c.matches(&self.ev.at(r, i, j))) {
                            n += 1;
                        }
                    }
                }
                num(n as f64)
            }
            "VLOOKUP" | "HLOOKUP" => {
                let key = self.scalar(&a[0]);
                let table = self.range(&a[1])?;
                let index = self.int(&a[2])?;
                let approx = match a.get(3) {
                    Some(v) => self.boolean(v)?,
                    None => true,
                };
                let vertical = name == "VLOOKUP";
                let (len, width) = if vertical {
                    (table.rows, table.cols)
                } else {
                    (table.cols, table.rows)
                };
                if index < 1 {
                    return Err(ErrorCode::Value);
                }
                if index > i64::from(width) {
                    return Err(ErrorCode::Ref);
                }
                let probe: Vec<CellValue> = (0..len)
                    .map(|k| {
                        if vertical {
                            self.ev.at(&table, k, 0)
                        } else {
                            self.ev.at(&table, 0, k)
                        }
                    })
                    .collect();
                let hit = if approx {
                    approx_match(&key, &probe, true)
                } else {
                    exact_match(&key, &probe)
                }
                .ok_or(ErrorCode::NA)?;
                let off = (index - 1) as u32;
                let v = if vertical {
                    self.ev.at(&table, hit as u32, off)
                } else {
                    self.ev.at(&table, off, hit as u32)
                };
                Ok(Val::S(v))
            }
            "LOOKUP" => {
                let key = self.scalar(&a[0]);
                let look = self.range(&a[1])?;
                let (probe, result) = match a.get(2) {
                    Some(res) => {
                        let res = self.range(res)?;
                        if !is_vector(&look) || !is_vector(&res) {
                            return Err(ErrorCode::NA);
                        }
                        (self.ev.all(&look), self.ev.all(&res))
                    }
                    None if look.cols > look.rows => (
                        self.ev.all(&look.sub(0, 0, 1, look.cols)),
                        self.ev.all(&look.sub(look.rows - 1, 0, 1, look.cols)),
                    ),
                    None if look.rows > 0 => (
                        self.ev.all(&look.sub(0, 0, look.rows, 1)),
                        self.ev.all(&look.sub(0, look.cols - 1, look.rows, 1)),
                    ),
                    None => return Err(ErrorCode::NA),
                };
                let hit = approx_match(&key, &probe, true).ok_or(ErrorCode::NA)?;
                result.get(hit).cloned().map(Val::S).ok_or(ErrorCode::NA)
            }
            "XLOOKUP" => {
                let key = self.scalar(&a[0]);
                let look = self.range(&a[1])?;
                let ret = self.range(&a[2])?;
                if !is_vector(&look) {
                    return Err(ErrorCode::Value);
                }
                let mode = match a.get(4) {
                    Some(v) => self.int(v)?,
                    None => 0,
                };
                let search = match a.get(5) {
                    Some(v) => self.int(v)?,
                    None => 1,
                };
                let probe = self.ev.all(&look);
                let column = look.cols == 1 && look.rows > 1 || (look.rows == 1 && look.cols == 1);
                let n = probe.len() as u32;
                let fits = if column { ret.rows == n } else { ret.cols == n };
                if !fits {
                    return Err(ErrorCode::Value);
                }
                let order: Vec<usize> = match search {
                    1 => (0..probe.len()).collect(),
                    -1 => (0..probe.len()).rev().collect(),
                    _ => return Err(ErrorCode::Value),
                };
                let hit = match mode {
                    0 => order.iter().copied().find(|&i| equal_plain(&key, &probe[i])),
                    2 => order.iter().copied().find(|&i| equal_wild(&key, &probe[i])),
                    -1 | 1 => {
                        let want = if mode == -1 { Ordering::Less } else { Ordering::Greater };
                        order
                            .iter()
                            .copied()
                            .find(|&i| equal_plain(&key, &probe[i]))
                            .or_else(|| {
                                order
                                    .iter()
                                    .copied()
                                    .filter(|&i| same_kind(&key, &probe[i]))
                                    .filter(|&i| compare(&probe[i], &key) == want)
                                    .reduce(|best, i| {
                                        if compare(&probe[i], &probe[best]) == want.reverse() {
                                            i
                                        } else {
                                            best
                                        }
                                    })
                            })
                    }
                    _ => return Err(ErrorCode::Value),
                };
                match hit {
                    Some(i) => {
                        let i = i as u32;
                        let r = if column {
                            ret.sub(i, 0, 1, ret.cols)
                        } else {
                            ret.sub(0, i, ret.rows, 1)
                        };
                        Ok(Val::R(r))
                    }
                    None => match a.get(3) {
                        Some(v) => Ok(v.clone()),
                        None => Err(ErrorCode::NA),
                    },
                }
            }
            "INDEX" => {
                let row = self.int(&a[1])?;
                let col = match a.get(2) {
                    Some(v) => Some(self.int(v)?),
                    None => None,
                };
                let r = match &a[0] {
                    Val::R(r) => *r,
                    Val::S(s) => {
                        return if row <= 1 && col.unwrap_or(1) <= 1 {
                            Ok(Val::S(s.clone()))
                        } else {
                            Err(ErrorCode::Ref)
                        }
                    }
                };
                if row < 0 || col.is_some_and(|c| c < 0) {
                    return Err(ErrorCode::Value);
                }
                // a single index into a one-row range selects a column
                let (row, col) = match col {
                    None if r.rows == 1 => (1, row),
                    None => (row, if r.cols == 1 { 1 } else { 0 }),
                    Some(c) => (row, c),
                };
                if row > i64::from(r.rows) || col > i64::from(r.cols) {
                    return Err(ErrorCode::Ref);
                }
                let (top, rows) = if row == 0 { (0, r.rows) } else { (row as u32 - 1, 1) };
                let (left, cols) = if col == 0 { (0, r.cols) } else { (col as u32 - 1, 1) };
                Ok(Val::R(r.sub(top, left, rows, cols)))
            }
            "MATCH" => {
                let key = self.scalar(&a[0]);
                let look = self.range(&a[1])?;
                if !is_vector(&look) {
                    return Err(ErrorCode::NA);
                }
                let kind = match a.get(2) {
                    Some(v) => self.int(v)?,
                    None => 1,
                };
                let probe = self.ev.all(&look);
                let hit = match kind.signum() {
                    0 => exact_match(&key, &probe),
                    1 => approx_match(&key, &probe, true),
                    _ => approx_match(&key, &probe, false),
                };
                hit.map(|i| Val::S(CellValue::Number(i as f64 + 1.0)))
                    .ok_or(ErrorCode::NA)
            }
            "CONCAT" | "CONCATENATE" => {
                let mut s = String::new();
                for v in a {
                    match v {
                        Val::R(r) => {
                            for c in self.ev.all(r) {
                                s.push_str(&to_text(&c)?);
                            }
                        }
                        Val::S(c) => s.push_str(&to_text(c)?),
                    }
                }
                Ok(Val::S(CellValue::Text(s)))
            }
            "TEXT" => {
                let _format = self.scalar(&a[1]);
                Ok(Val::S(self.scalar(&a[0])))
            }
            "NPV" => {
                let rate = self.num(&a[0])?;
                if rate == -1.0 {
                    return Err(ErrorCode::Div0);
                }
                let flows = self.numbers(&a[1..])?;
                num(npv(rate, &flows, 1))
            }
            "IRR" => {
                let flows = self.numbers(&a[..1])?;
                if let Some(g) = a.get(1) {
                    self.num(g)?;
                }
                Ok(num_result(irr(&flows)))
            }
            "PMT" => {
                let rate = self.num(&a[0])?;
                let nper = self.num(&a[1])?;
                let pv = self.num(&a[2])?;
                let fv = match a.get(3) {
                    Some(v) => self.num(v)?,
                    None => 0.0,
                };
                let due = match a.get(4) {
                    Some(v) => self.boolean(v)?,
                    None => false,
                };
                Ok(num_result(pmt(rate, nper, pv, fv, due)))
            }
            _ => Err(ErrorCode::Name),
        }
    }

    fn logicals(&self, vals: &[Val]) -> R<Vec<bool>> {
        let mut out = Vec::new();
        for v in vals {
            match v {
                Val::R(r) => {
                    for (_, _, c) in self.ev.non_blank(r) {
                        match c {
                            CellValue::Bool(b) => out.push(b),
                            CellValue::Number(n) => out.push(n != 0.0),
                            _ => {}
                        }
                    }
                }
                Val::S(CellValue::Blank) => {}
                Val::S(s) => out.push(to_bool(s)?),
            }
        }
        Ok(out)
    }

    fn condition_pairs(&self, a: &[Val]) -> R<Vec<(RangeRef, Criterion)>> {
        let mut out = Vec::new();
        for pair in a.chunks(2) {
            out.push((self.range(&pair[0])?, Criterion::parse(&self.scalar(&pair[1]))));
        }
        let (rows, cols) = (out[0].0.rows, out[0].0.cols);
        if out.iter().any(|(r, _)| r.rows != rows || r.cols != cols) {
            return Err(ErrorCode::Value);
        }
        Ok(out)
    }

    /// Numbers in `target` at positions where every condition holds.
    fn conditional_values(&self, target: RangeRef, conds: &[(RangeRef, Criterion)]) -> R<Vec<f64>> {
        let shape = conds[0].0;
        if target.rows != shape.rows || target.cols != shape.cols {
            return Err(ErrorCode::Value);
        }
        let mut out = Vec::new();
        for i in 0..shape.rows {
            for j in 0..shape.cols {
                if conds.iter().all(|(r, c)| c.matches(&self.ev.at(r, i, j))) {
                    if let CellValue::Number(n) = self.ev.at(&target, i, j) {
                        out.push(n);
                    }
                }
            }
        }
        Ok(out)
    }

    fn sum_or_average(&self, average: bool, xs: &[f64]) -> R<Val> {
        let sum: f64 = xs.iter().sum();
        if !average {
            return Ok(Val::S(CellValue::number(sum)));
        }
        if xs.is_empty() {
            return Err(ErrorCode::Div0);
        }
        Ok(Val::S(CellValue::number(sum / xs.len() as f64)))
    }
}

fn is_vector(r: &RangeRef) -> bool {
    r.rows == 1 || r.cols == 1
}

fn same_kind(a: &CellValue, b: &CellValue) -> bool {
    matches!(
        (a, b),
        (CellValue::Number(_), CellValue::Number(_))
            | (CellValue::Text(_), CellValue::Text(_))
            | (CellValue::Bool(_), CellValue::Bool(_))
    )
}

fn equal_plain(key: &CellValue, v: &CellValue) -> bool {
    same_kind(key, v) && compare(key, v) == Ordering::Equal
}

fn equal_wild(key: &CellValue, v: &CellValue) -> bool {
    match (key, v) {
        (CellValue::Text(pat), CellValue::Text(s)) => wildcard_match(pat, s),
        _ => equal_plain(key, v),
    }
}

/// First position equal to `key` (text keys honor `*`/`?` wildcards).
fn exact_match(key: &CellValue, probe: &[CellValue]) -> Option<usize> {
    probe.iter().position(|v| equal_wild(key, v))
}

/// Sorted-data match. Ascending: last position with value ≤ key before the
/// first value > key. Descending: same with the inequalities reversed.
fn approx_match(key: &CellValue, probe: &[CellValue], ascending: bool) -> Option<usize> {
    let (stop, keep) = if ascending {
        (Ordering::Greater, Ordering::Less)
    } else {
        (Ordering::Less, Ordering::Greater)
    };
    let mut best = None;
    for (i, v) in probe.iter().enumerate() {
        if !same_kind(key, v) {
            continue;
        }
        let c = compare(v, key);
        if c == stop {
            break;
        }
        if c == keep || c == Ordering::Equal {
            best = Some(i);
        }
    }
    best
}

/// Case-insensitive match with `*`, `?` and `~` escapes.
pub(crate) fn wildcard_match(pattern: &str, text: &str) -> bool {
    #[derive(Clone, Copy, PartialEq)]
    enum P {
        Lit(char),
        One,
        Many,
    }
    let mut pat = Vec::new();
    let mut chars = pattern.chars().flat_map(char::to_lowercase).peekable();
    while let Some(c) = chars.next() {
        match c {
            '~' => match chars.next() {
                Some(n) => pat.push(P::Lit(n)),
                None => pat.push(P::Lit('~')),
            },
            '*' => pat.push(P::Many),
            '?' => pat.push(P::One),
            c => pat.push(P::Lit(c)),
        }
    }
    let text: Vec<char> = text.chars().flat_map(char::to_lowercase).collect();
    // dp[j]: pattern prefix matches text prefix of length j
    let mut dp = vec![false; text.len() + 1];
    dp[0] = true;
    for p in &pat {
        let mut next = vec![false; text.len() + 1];
        match p {
            P::Many => {
                let mut any = false;
                for j in 0..=text.len() {
                    any |= dp[j];
                    next[j] = any;
                }
            }
            P::One => {
                for j in 1..=text.len() {
                    next[j] = dp[j - 1];
                }
            }
            P::Lit(c) => {
                for j in 1..=text.len() {
                    next[j] = dp[j - 1] && text[j - 1] == *c;
                }
            }
        }
        dp = next;
    }
    dp[text.len()]
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum CritOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

/// A SUMIF/COUNTIF-style criterion such as `5`, `">=10"`, `"<>"` or `"ab*"`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Criterion {
    op: CritOp,
    operand: CellValue,
}

impl Criterion {
    pub fn parse(v: &CellValue) -> Self {
        let text = match v {
            CellValue::Text(s) => s.as_str(),
            CellValue::Blank => "",
            other => {
                return Self {
                    op: CritOp::Eq,
                    operand: other.clone(),
                }
            }
        };
        let (op, rest) = [
            (">=", CritOp::Ge),
            ("<=", CritOp::Le),
            ("<>", CritOp::Ne),
            (">", CritOp::Gt),
            ("<", CritOp::Lt),
            ("=", CritOp::Eq),
        ]
        .iter()
        .find_map(|(p, op)| text.strip_prefix(p).map(|r| (*op, r)))
        .unwrap_or((CritOp::Eq, text));
        let operand = if let Ok(n) = to_number(&CellValue::Text(rest.to_string())) {
            if rest.trim().is_empty() {
                CellValue::Text(String::new())
            } else {
                CellValue::Number(n)
            }
        } else if rest.eq_ignore_ascii_case("TRUE") {
            CellValue::Bool(true)
        } else if rest.eq_ignore_ascii_case("FALSE") {
            CellValue::Bool(false)
        } else {
            CellValue::Text(rest.to_string())
        };
        Self { op, operand }
    }

    pub fn matches(&self, v: &CellValue) -> bool {
        let eq = || match (&self.operand, v) {
            (CellValue::Text(p), CellValue::Blank) => p.is_empty(),
            (CellValue::Text(p), CellValue::Text(s)) => wildcard_match(p, s),
            (CellValue::Text(_), _) => false,
            _ => equal_plain(&self.operand, v),
        };
        match self.op {
            CritOp::Eq => eq(),
            CritOp::Ne => !eq(),
            op => {
                if !same_kind(&self.operand, v) {
                    return false;
                }
                let c = compare(v, &self.operand);
                match op {
                    CritOp::Lt => c == Ordering::Less,
                    CritOp::Le => c != Ordering::Greater,
                    CritOp::Gt => c == Ordering::Greater,
                    _ => c != Ordering::Less,
                }
            }
        }
    }
}

fn round_half_away(x: f64, digits: i32) -> f64 {
    let f = 10f64.powi(digits);
    let y = x * f;
    // absorb representation error such as 2.675 * 100 = 267.49999999999997
    let nudged = y + y.signum() * y.abs() * 4.0 * f64::EPSILON;
    nudged.round() / f
}

fn npv(rate: f64, flows: &[f64], first_period: i32) -> f64 {
    flows
        .iter()
        .enumerate()
        .map(|(i, v)| v / (1.0 + rate).powi(i as i32 + first_period))
        .sum()
}

/// Internal rate of return by bisection over [-0.9999, 10].
pub(crate) fn irr(flows: &[f64]) -> R<f64> {
    if !(flows.iter().any(|v| *v > 0.0) && flows.iter().any(|v| *v < 0.0)) {
        return Err(ErrorCode::Value);
    }
    let f = |r: f64| npv(r, flows, 0);
    let (mut lo, mut hi) = (-0.9999, 10.0);
    let (mut flo, fhi) = (f(lo), f(hi));
    if !flo.is_finite() || !fhi.is_finite() || flo.signum() == fhi.signum() {
        return Err(ErrorCode::Value);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || hi - lo < 1e-9 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub(crate) fn pmt(rate: f64, nper: f64, pv: f64, fv: f64, due: bool) -> R<f64> {
    if nper == 0.0 {
        return Err(ErrorCode::Div0);
    }
    if rate == 0.0 {
        return Ok(-(pv + fv) / nper);
    }
    let g = (1.0 + rate).powf(nper);
    let t = if due { 1.0 + rate } else { 1.0 };
    let denom = t * (g - 1.0);
    if denom == 0.0 {
        return Err(ErrorCode::Div0);
    }
    Ok(-(rate * (pv * g + fv)) / denom)
}
