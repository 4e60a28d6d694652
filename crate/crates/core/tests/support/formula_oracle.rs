//! Reference evaluator for the formula engine. Workbooks are generated as
//! ASTs, rendered to A1 source, and evaluated twice: by the engine, and by a
//! naive fixed-point loop over the generated ASTs that never looks at the
//! engine's parser or graph.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use sheetarena_core::a1::CellAddr;
use sheetarena_core::formula::{evaluate_workbook, CellKey, CellValue};
use sheetarena_core::sheetspec::parse_workbook_str;

const SHEETS: [&str; 2] = ["Calc", "My Data"];
const ROWS: u32 = 5;
const COLS: u32 = 4;

#[derive(Debug, Clone, PartialEq)]
enum Ov {
    Num(f64),
    Text(String),
    Bool(bool),
    Blank,
    Err(&'static str),
}

#[derive(Debug, Clone, Copy)]
enum Sel {
    Here,
    Sheet(usize),
    Missing,
}

#[derive(Debug, Clone)]
enum Node {
    Num(f64),
    Str(&'static str),
    Bool(bool),
    Err(&'static str),
    Cell(Sel, u32, u32),
    Range(Sel, u32, u32, u32, u32),
    Cols(Sel, u32, u32),
    Neg(Box<Node>),
    Pct(Box<Node>),
    Bin(&'static str, Box<Node>, Box<Node>),
    Call(&'static str, Vec<Node>),
}

fn col_letter(c: u32) -> char {
    (b'A' + (c - 1) as u8) as char
}

fn render_sel(s: Sel) -> String {
    match s {
        Sel::Here => String::new(),
        Sel::Sheet(0) => "Calc!".into(),
        Sel::Sheet(_) => "'My Data'!".into(),
        Sel::Missing => "Nowhere!".into(),
    }
}

fn render(n: &Node) -> String {
    match n {
        Node::Num(x) => format!("{x}"),
        Node::Str(s) => format!("\"{s}\""),
        Node::Bool(b) => if *b { "TRUE" } else { "FALSE" }.into(),
        Node::Err(e) => (*e).into(),
        Node::Cell(s, r, c) => format!("{}{}{r}", render_sel(*s), col_letter(*c)),
        Node::Range(s, r0, c0, r1, c1) => format!(
            "{}{}{r0}:{}{r1}",
            render_sel(*s),
            col_letter(*c0),
            col_letter(*c1)
        ),
        Node::Cols(s, c0, c1) => format!("{}{}:{}", render_sel(*s), col_letter(*c0), col_letter(*c1)),
        Node::Neg(x) => format!("(-{})", render(x)),
        Node::Pct(x) => format!("({}%)", render(x)),
        Node::Bin(op, a, b) => format!("({}{op}{})", render(a), render(b)),
        Node::Call(f, args) => {
            let args: Vec<String> = args.iter().map(render).collect();
            format!("{f}({})", args.join(","))
        }
    }
}

const TEXTS: [&str; 7] = ["abc", "3", " 4.5 ", "TRUE", "", "1e2", "x y"];
const ERRORS: [&str; 4] = ["#DIV/0!", "#N/A", "#VALUE!", "#REF!"];
const BINOPS: [&str; 12] = ["+", "-", "*", "/", "^", "&", "=", "<>", "<", "<=", ">", ">="];
const AGGREGATES: [&str; 6] = ["SUM", "AVERAGE", "MIN", "MAX", "COUNT", "COUNTA"];

struct Gen<'r> {
    rng: &'r mut ChaCha8Rng,
    iferror: bool,
}

impl Gen<'_> {
    fn sel(&mut self) -> Sel {
        match self.rng.random_range(0..20) {
            0..=13 => Sel::Here,
            14..=18 => Sel::Sheet(self.rng.random_range(0..SHEETS.len())),
            _ => Sel::Missing,
        }
    }

    fn cell(&mut self) -> Node {
        let s = self.sel();
        Node::Cell(s, self.rng.random_range(1..=ROWS), self.rng.random_range(1..=COLS))
    }

    fn range(&mut self) -> Node {
        let s = self.sel();
        if self.rng.random_bool(0.15) {
            let c0 = self.rng.random_range(1..=COLS);
            let c1 = self.rng.random_range(c0..=COLS);
            return Node::Cols(s, c0, c1);
        }
        let r0 = self.rng.random_range(1..=ROWS);
        let c0 = self.rng.random_range(1..=COLS);
        let r1 = self.rng.random_range(r0..=ROWS.min(r0 + 2));
        let c1 = self.rng.random_range(c0..=COLS.min(c0 + 2));
        Node::Range(s, r0, c0, r1, c1)
    }

    fn leaf(&mut self) -> Node {
        match self.rng.random_range(0..20) {
            0..=4 => Node::Num(*[0.0, 1.0, 2.0, 3.0, 0.5, 2.5, 10.0].choose(self.rng).unwrap()),
            5..=6 => Node::Str(TEXTS.choose(self.rng).unwrap()),
            7 => Node::Bool(self.rng.random_bool(0.5)),
            8 => Node::Err(ERRORS.choose(self.rng).unwrap()),
            9..=17 => self.cell(),
            _ => self.range(),
        }
    }

    fn arg(&mut self, depth: u32) -> Node {
        if self.rng.random_bool(0.4) {
            self.range()
        } else {
            self.expr(depth)
        }
    }

    fn expr(&mut self, depth: u32) -> Node {
        if depth == 0 || self.rng.random_bool(0.3) {
            return self.leaf();
        }
        let d = depth - 1;
        match self.rng.random_range(0..16) {
            0 => Node::Neg(Box::new(self.expr(d))),
            1 => Node::Pct(Box::new(self.expr(d))),
            2..=7 => Node::Bin(
                BINOPS.choose(self.rng).unwrap(),
                Box::new(self.expr(d)),
                Box::new(self.expr(d)),
            ),
            8..=10 => {
                let f = AGGREGATES.choose(self.rng).unwrap();
                let n = self.rng.random_range(1..=3);
                Node::Call(f, (0..n).map(|_| self.arg(d)).collect())
            }
            11 => Node::Call("IF", {
                let n = self.rng.random_range(2..=3);
                (0..n).map(|_| self.expr(d)).collect()
            }),
            12 if self.iferror => Node::Call("IFERROR", vec![self.arg(d), self.expr(d)]),
            13 => {
                let f = *["AND", "OR"].choose(self.rng).unwrap();
                let n = self.rng.random_range(1..=2);
                Node::Call(f, (0..n).map(|_| self.arg(d)).collect())
            }
            14 => Node::Call("NOT", vec![self.expr(d)]),
            _ => Node::Call("ABS", vec![self.expr(d)]),
        }
    }
}

type Key = (usize, u32, u32);

#[derive(Debug, Clone)]
enum Content {
    Num(f64),
    Text(&'static str),
    Formula(Node),
}

struct Book {
    cells: Vec<BTreeMap<(u32, u32), Content>>,
}

impl Book {
    fn random(rng: &mut ChaCha8Rng, iferror: bool) -> Self {
        let n_sheets = rng.random_range(1..=2);
        let total = rng.random_range(1..=20);
        let mut cells: Vec<BTreeMap<(u32, u32), Content>> = vec![BTreeMap::new(); n_sheets];
        for _ in 0..total {
            let s = rng.random_range(0..n_sheets);
            let at = (rng.random_range(1..=ROWS), rng.random_range(1..=COLS));
            let content = match rng.random_range(0..20) {
                0..=6 => Content::Num(*[0.0, 1.0, -2.0, 4.0, 0.25, 7.5].choose(rng).unwrap()),
                7..=10 => Content::Text(TEXTS.choose(rng).unwrap()),
                _ => Content::Formula(Gen { rng, iferror }.expr(3)),
            };
            cells[s].insert(at, content);
        }
        Self { cells }
    }

    fn to_json(&self) -> String {
        let sheets: Vec<_> = self
            .cells
            .iter()
            .enumerate()
            .map(|(si, cells)| {
                let cells: Vec<_> = cells
                    .iter()
                    .map(|(&(r, c), content)| {
                        let at = format!("{}{r}", col_letter(c));
                        match content {
                            Content::Num(x) => json!({"ref": at, "number": x}),
                            Content::Text(t) => json!({"ref": at, "text": t}),
                            Content::Formula(n) => json!({"ref": at, "formula": format!("={}", render(n))}),
                        }
                    })
                    .collect();
                json!({"name": SHEETS[si], "cells": cells})
            })
            .collect();
        json!({"version": "SheetSpec@2", "sheets": sheets}).to_string()
    }

    fn sheet_of(&self, here: usize, s: Sel) -> Option<usize> {
        match s {
            Sel::Here => Some(here),
            Sel::Sheet(i) if i < self.cells.len() => Some(i),
            _ => None,
        }
    }

    /// Bounding box of the sheet's cells as `(r0, c0, r1, c1)`.
    fn used(&self, s: usize) -> Option<(u32, u32, u32, u32)> {
        let keys = self.cells[s].keys();
        let r0 = keys.clone().map(|k| k.0).min()?;
        let r1 = keys.clone().map(|k| k.0).max()?;
        let c0 = keys.clone().map(|k| k.1).min()?;
        let c1 = keys.map(|k| k.1).max()?;
        Some((r0, c0, r1, c1))
    }

    /// Rectangle a reference node covers, `None` when the sheet is unknown.
    /// An empty rectangle is `Some(None)`.
    fn rect(&self, here: usize, n: &Node) -> Option<(usize, Option<(u32, u32, u32, u32)>)> {
        match n {
            Node::Cell(s, r, c) => Some((self.sheet_of(here, *s)?, Some((*r, *c, *r, *c)))),
            Node::Range(s, r0, c0, r1, c1) => {
                Some((self.sheet_of(here, *s)?, Some((*r0, *c0, *r1, *c1))))
            }
            Node::Cols(s, c0, c1) => {
                let si = self.sheet_of(here, *s)?;
                let clipped = self.used(si).and_then(|(ur0, uc0, ur1, uc1)| {
                    let lo = (*c0).max(uc0);
                    let hi = (*c1).min(uc1);
                    (lo <= hi).then_some((ur0, lo, ur1, hi))
                });
                Some((si, clipped))
            }
            _ => None,
        }
    }

    fn formula_deps(&self, here: usize, n: &Node, out: &mut BTreeSet<Key>) {
        match n {
            Node::Cell(..) | Node::Range(..) | Node::Cols(..) => {
                if let Some((si, Some((r0, c0, r1, c1)))) = self.rect(here, n) {
                    for (&(r, c), content) in &self.cells[si] {
                        if matches!(content, Content::Formula(_))
                            && (r0..=r1).contains(&r)
                            && (c0..=c1).contains(&c)
                        {
                            out.insert((si, r, c));
                        }
                    }
                }
            }
            Node::Neg(x) | Node::Pct(x) => self.formula_deps(here, x, out),
            Node::Bin(_, a, b) => {
                self.formula_deps(here, a, out);
                self.formula_deps(here, b, out);
            }
            Node::Call(_, args) => args.iter().for_each(|a| self.formula_deps(here, a, out)),
            _ => {}
        }
    }
}

#[derive(Debug, Clone)]
enum Oval {
    S(Ov),
    /// Sheet and inclusive rectangle; `None` rectangle for an empty clip.
    R(usize, Option<(u32, u32, u32, u32)>),
}

struct Oracle<'b> {
    book: &'b Book,
    values: BTreeMap<Key, Ov>,
}

fn fin(x: f64) -> Ov {
    if x.is_finite() {
        Ov::Num(x)
    } else {
        Ov::Err("#VALUE!")
    }
}

fn numeric_text(s: &str) -> Option<f64> {
    let t = s.trim();
    if t.is_empty() || !t.chars().all(|ch| "0123456789.eE+-".contains(ch)) {
        return None;
    }
    t.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn as_num(v: &Ov) -> Result<f64, &'static str> {
    match v {
        Ov::Num(x) => Ok(*x),
        Ov::Bool(b) => Ok(f64::from(u8::from(*b))),
        Ov::Blank => Ok(0.0),
        Ov::Text(s) => numeric_text(s).ok_or("#VALUE!"),
        Ov::Err(e) => Err(e),
    }
}

fn as_bool(v: &Ov) -> Result<bool, &'static str> {
    match v {
        Ov::Bool(b) => Ok(*b),
        Ov::Num(x) => Ok(*x != 0.0),
        Ov::Blank => Ok(false),
        Ov::Text(s) => match s.to_ascii_uppercase().as_str() {
            "TRUE" => Ok(true),
            "FALSE" => Ok(false),
            _ => Err("#VALUE!"),
        },
        Ov::Err(e) => Err(e),
    }
}

fn as_text(v: &Ov) -> Result<String, &'static str> {
    match v {
        Ov::Num(x) if *x == 0.0 => Ok("0".into()),
        Ov::Num(x) => Ok(x.to_string()),
        Ov::Text(s) => Ok(s.clone()),
        Ov::Bool(b) => Ok(if *b { "TRUE" } else { "FALSE" }.into()),
        Ov::Blank => Ok(String::new()),
        Ov::Err(e) => Err(e),
    }
}

/// -1, 0, 1 under numbers < text < booleans, with blanks taking the other side's zero.
fn cmp(a: &Ov, b: &Ov) -> i32 {
    let zero_like = |o: &Ov| match o {
        Ov::Text(_) => Ov::Text(String::new()),
        Ov::Bool(_) => Ov::Bool(false),
        _ => Ov::Num(0.0),
    };
    let (a, b) = match (a, b) {
        (Ov::Blank, Ov::Blank) => return 0,
        (Ov::Blank, o) => (zero_like(o), o.clone()),
        (o, Ov::Blank) => (o.clone(), zero_like(o)),
        _ => (a.clone(), b.clone()),
    };
    let sign = |o: std::cmp::Ordering| o as i32;
    let rank = |o: &Ov| match o {
        Ov::Text(_) => 1,
        Ov::Bool(_) => 2,
        _ => 0,
    };
    match (&a, &b) {
        (Ov::Num(x), Ov::Num(y)) => sign(x.partial_cmp(y).unwrap()),
        (Ov::Text(x), Ov::Text(y)) => sign(x.to_lowercase().cmp(&y.to_lowercase())),
        (Ov::Bool(x), Ov::Bool(y)) => sign(x.cmp(y)),
        _ => rank(&a) - rank(&b),
    }
}

impl Oracle<'_> {
    fn get(&self, k: Key) -> Ov {
        self.values.get(&k).cloned().unwrap_or(Ov::Blank)
    }

    /// Non-blank cells of a rectangle, row-major.
    fn members(&self, si: usize, rect: Option<(u32, u32, u32, u32)>) -> Vec<Ov> {
        let Some((r0, c0, r1, c1)) = rect else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for r in r0..=r1 {
            for c in c0..=c1 {
                let v = self.get((si, r, c));
                if v != Ov::Blank {
                    out.push(v);
                }
            }
        }
        out
    }

    fn scalar(&self, v: Oval) -> Ov {
        match v {
            Oval::S(s) => s,
            Oval::R(si, Some((r0, c0, r1, c1))) if r0 == r1 && c0 == c1 => self.get((si, r0, c0)),
            Oval::R(..) => Ov::Err("#VALUE!"),
        }
    }

    fn error_in(&self, v: &Oval) -> Option<&'static str> {
        match v {
            Oval::S(Ov::Err(e)) => Some(e),
            Oval::S(_) => None,
            Oval::R(si, rect) => self.members(*si, *rect).into_iter().find_map(|m| match m {
                Ov::Err(e) => Some(e),
                _ => None,
            }),
        }
    }

    fn eval(&self, here: usize, n: &Node) -> Oval {
        match n {
            Node::Num(x) => Oval::S(fin(*x)),
            Node::Str(s) => Oval::S(Ov::Text((*s).into())),
            Node::Bool(b) => Oval::S(Ov::Bool(*b)),
            Node::Err(e) => Oval::S(Ov::Err(e)),
            Node::Cell(..) | Node::Range(..) | Node::Cols(..) => match self.book.rect(here, n) {
                Some((si, rect)) => Oval::R(si, rect),
                None => Oval::S(Ov::Err("#REF!")),
            },
            Node::Neg(x) | Node::Pct(x) => {
                let v = self.scalar(self.eval(here, x));
                Oval::S(match as_num(&v) {
                    Ok(y) if matches!(n, Node::Neg(_)) => fin(-y),
                    Ok(y) => fin(y / 100.0),
                    Err(e) => Ov::Err(e),
                })
            }
            Node::Bin(op, a, b) => {
                let a = self.scalar(self.eval(here, a));
                let b = self.scalar(self.eval(here, b));
                Oval::S(binop(op, &a, &b))
            }
            Node::Call(f, args) => self.call(here, f, args),
        }
    }

    /// `IF` and `IFERROR` hand back references unchanged; the consumer collapses them.
    fn call(&self, here: usize, f: &str, args: &[Node]) -> Oval {
        if f == "IFERROR" {
            let v = self.eval(here, &args[0]);
            if self.error_in(&v).is_some() {
                return self.eval(here, &args[1]);
            }
            return v;
        }
        let vals: Vec<Oval> = args.iter().map(|a| self.eval(here, a)).collect();
        if let Some(e) = vals.iter().find_map(|v| self.error_in(v)) {
            return Oval::S(Ov::Err(e));
        }
        if f == "IF" {
            return match as_bool(&self.scalar(vals[0].clone())) {
                Ok(true) => vals[1].clone(),
                Ok(false) => vals.get(2).cloned().unwrap_or(Oval::S(Ov::Bool(false))),
                Err(e) => Oval::S(Ov::Err(e)),
            };
        }
        let try_call = || -> Result<Ov, &'static str> {
            match f {
                "SUM" | "AVERAGE" | "MIN" | "MAX" => {
                    let mut xs = Vec::new();
                    for v in &vals {
                        match v {
                            Oval::R(si, rect) => xs.extend(
                                self.members(*si, *rect)
                                    .into_iter()
                                    .filter_map(|m| if let Ov::Num(x) = m { Some(x) } else { None }),
                            ),
                            Oval::S(Ov::Blank) => {}
                            Oval::S(s) => xs.push(as_num(s)?),
                        }
                    }
                    Ok(match f {
                        "SUM" => fin(xs.iter().sum()),
                        "AVERAGE" if xs.is_empty() => Ov::Err("#DIV/0!"),
                        "AVERAGE" => fin(xs.iter().sum::<f64>() / xs.len() as f64),
                        "MIN" => fin(xs.iter().copied().fold(f64::INFINITY, f64::min)).or_zero(&xs),
                        _ => fin(xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)).or_zero(&xs),
                    })
                }
                "COUNT" | "COUNTA" => {
                    let mut k = 0usize;
                    for v in &vals {
                        k += match v {
                            Oval::R(si, rect) => self
                                .members(*si, *rect)
                                .iter()
                                .filter(|m| f == "COUNTA" || matches!(m, Ov::Num(_)))
                                .count(),
                            Oval::S(Ov::Blank) => 0,
                            Oval::S(s) => usize::from(f == "COUNTA" || as_num(s).is_ok()),
                        };
                    }
                    Ok(Ov::Num(k as f64))
                }
                "AND" | "OR" => {
                    let mut bs = Vec::new();
                    for v in &vals {
                        match v {
                            Oval::R(si, rect) => {
                                for m in self.members(*si, *rect) {
                                    match m {
                                        Ov::Bool(b) => bs.push(b),
                                        Ov::Num(x) => bs.push(x != 0.0),
                                        _ => {}
                                    }
                                }
                            }
                            Oval::S(Ov::Blank) => {}
                            Oval::S(s) => bs.push(as_bool(s)?),
                        }
                    }
                    if bs.is_empty() {
                        return Err("#VALUE!");
                    }
                    Ok(Ov::Bool(if f == "AND" {
                        bs.iter().all(|b| *b)
                    } else {
                        bs.iter().any(|b| *b)
                    }))
                }
                "NOT" => Ok(Ov::Bool(!as_bool(&self.scalar(vals[0].clone()))?)),
                "ABS" => Ok(fin(as_num(&self.scalar(vals[0].clone()))?.abs())),
                other => panic!("generator produced unknown function {other}"),
            }
        };
        Oval::S(try_call().unwrap_or_else(Ov::Err))
    }
}

trait OrZero {
    fn or_zero(self, xs: &[f64]) -> Ov;
}

impl OrZero for Ov {
    fn or_zero(self, xs: &[f64]) -> Ov {
        if xs.is_empty() {
            Ov::Num(0.0)
        } else {
            self
        }
    }
}

fn binop(op: &str, a: &Ov, b: &Ov) -> Ov {
    if let Ov::Err(e) = a {
        return Ov::Err(e);
    }
    if let Ov::Err(e) = b {
        return Ov::Err(e);
    }
    let arith = |f: &dyn Fn(f64, f64) -> Ov| match (as_num(a), as_num(b)) {
        (Ok(x), Ok(y)) => f(x, y),
        (Err(e), _) | (_, Err(e)) => Ov::Err(e),
    };
    match op {
        "+" => arith(&|x, y| fin(x + y)),
        "-" => arith(&|x, y| fin(x - y)),
        "*" => arith(&|x, y| fin(x * y)),
        "/" => arith(&|x, y| if y == 0.0 { Ov::Err("#DIV/0!") } else { fin(x / y) }),
        "^" => arith(&|x, y| fin(x.powf(y))),
        "&" => match (as_text(a), as_text(b)) {
            (Ok(x), Ok(y)) => Ov::Text(x + &y),
            (Err(e), _) | (_, Err(e)) => Ov::Err(e),
        },
        _ => {
            let c = cmp(a, b);
            Ov::Bool(match op {
                "=" => c == 0,
                "<>" => c != 0,
                "<" => c < 0,
                "<=" => c <= 0,
                ">" => c > 0,
                _ => c >= 0,
            })
        }
    }
}

/// Formula cells that can reach themselves through at least one reference.
fn brute_force_cycles(book: &Book) -> BTreeSet<Key> {
    let mut deps: BTreeMap<Key, BTreeSet<Key>> = BTreeMap::new();
    for (si, cells) in book.cells.iter().enumerate() {
        for (&(r, c), content) in cells {
            if let Content::Formula(n) = content {
                let mut out = BTreeSet::new();
                book.formula_deps(si, n, &mut out);
                deps.insert((si, r, c), out);
            }
        }
    }
    deps.keys()
        .copied()
        .filter(|&start| {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<Key> = deps[&start].iter().copied().collect();
            while let Some(k) = stack.pop() {
                if k == start {
                    return true;
                }
                if seen.insert(k) {
                    stack.extend(deps[&k].iter().copied());
                }
            }
            false
        })
        .collect()
}

/// Reference values: cycle members are `#CIRC!`; everything else is computed
/// by repeatedly evaluating any formula whose formula inputs are all known.
fn reference_values(book: &Book, cycles: &BTreeSet<Key>) -> BTreeMap<Key, Ov> {
    let mut oracle = Oracle {
        book,
        values: BTreeMap::new(),
    };
    let mut pending: Vec<(Key, &Node)> = Vec::new();
    for (si, cells) in book.cells.iter().enumerate() {
        for (&(r, c), content) in cells {
            let key = (si, r, c);
            match content {
                Content::Num(x) => {
                    oracle.values.insert(key, Ov::Num(*x));
                }
                Content::Text(t) => {
                    oracle.values.insert(key, Ov::Text((*t).into()));
                }
                Content::Formula(n) if cycles.contains(&key) => {
                    oracle.values.insert(key, Ov::Err("#CIRC!"));
                }
                Content::Formula(n) => pending.push((key, n)),
            }
        }
    }
    while !pending.is_empty() {
        let before = pending.len();
        let mut still = Vec::new();
        for (key, n) in pending {
            let mut deps = BTreeSet::new();
            book.formula_deps(key.0, n, &mut deps);
            if deps.iter().all(|d| oracle.values.contains_key(d)) {
                let v = oracle.eval(key.0, n);
                let v = match oracle.scalar(v) {
                    Ov::Blank => Ov::Num(0.0),
                    other => other,
                };
                oracle.values.insert(key, v);
            } else {
                still.push((key, n));
            }
        }
        assert!(still.len() < before, "fixed point stalled outside a cycle");
        pending = still;
    }
    oracle.values
}

fn engine_ov(v: &CellValue) -> Ov {
    match v {
        CellValue::Number(x) => Ov::Num(*x),
        CellValue::Text(s) => Ov::Text(s.clone()),
        CellValue::Bool(b) => Ov::Bool(*b),
        CellValue::Blank => Ov::Blank,
        CellValue::Error(e) => Ov::Err(e.as_str()),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OracleStats {
    pub workbooks: u64,
    pub formula_cells: usize,
    pub cycle_cells: usize,
    pub error_cells: usize,
}

/// Compare engine and reference on `workbooks` random workbooks; the first
/// disagreement is returned with the offending document.
pub fn check(seed: u64, workbooks: u64) -> Result<OracleStats, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = OracleStats {
        workbooks,
        ..Default::default()
    };
    for case in 0..workbooks {
        let book = Book::random(&mut rng, true);
        let doc = book.to_json();
        let wb = parse_workbook_str(&doc).map_err(|e| format!("case {case}: {e}\n{doc}"))?;
        let grid = evaluate_workbook(&wb);

        let cycles = brute_force_cycles(&book);
        let expected = reference_values(&book, &cycles);

        for (si, cells) in book.cells.iter().enumerate() {
            for (&(r, c), content) in cells {
                let key = CellKey::new(si, CellAddr::new(r, c));
                let at = format!("{}!{}{r}", SHEETS[si], col_letter(c));
                let got = grid
                    .value(key)
                    .map(engine_ov)
                    .ok_or_else(|| format!("case {case}: no value for {at}"))?;
                let want = &expected[&(si, r, c)];
                if &got != want {
                    return Err(format!("case {case} {at}: engine {got:?}, reference {want:?}\n{doc}"));
                }
                if let Content::Formula(_) = content {
                    stats.formula_cells += 1;
                    stats.error_cells += usize::from(matches!(want, Ov::Err(_)));
                    if grid.graph.in_cycle(key) != cycles.contains(&(si, r, c)) {
                        return Err(format!("case {case} {at}: cycle membership differs\n{doc}"));
                    }
                }
            }
        }
        let engine_cycles: BTreeSet<Key> = grid
            .graph
            .cycle_cells()
            .iter()
            .map(|k| (k.sheet, k.addr.row, k.addr.col))
            .collect();
        if engine_cycles != cycles {
            return Err(format!("case {case}: cycle sets differ\n{doc}"));
        }
        stats.cycle_cells += cycles.len();
    }
    Ok(stats)
}

/// A random workbook document of at most 20 cells. With `iferror` false no
/// formula can absorb an error.
pub fn random_workbook_json(rng: &mut ChaCha8Rng, iferror: bool) -> String {
    Book::random(rng, iferror).to_json()
}
