//! Property checks for workbook features on random workbooks, with an
//! independent flood fill standing in for table detection.

use std::collections::VecDeque;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use sheetarena_core::a1::CellAddr;
use sheetarena_core::features::{detect_tables, extract_features, FeatureVector, FEATURE_NAMES};
use sheetarena_core::formula::evaluate_workbook;
use sheetarena_core::sheetspec::{parse_workbook_str, Sheet, Workbook};

const GRID: u32 = 12;
const SHEET_NAMES: [&str; 3] = ["Alpha", "Beta", "Gamma"];
const FORMULAS: [&str; 8] = [
    "=A1+1",
    "=SUM(A1:B3)",
    "=VLOOKUP(A1,B1:C4,2,FALSE)",
    "=1/0",
    "=Beta!A1*2",
    "=ROUND(C2*1.1,2)",
    "=IF(A1>0,\"yes\",\"no\")",
    "=COUNTIF(A1:A9,\">2\")",
];
const COLORS: [&str; 6] = ["#0000FF", "#000000", "#00B050", "#FF0000", "#FFF2CC", "#D9E1F2"];

#[derive(Debug, Clone, Copy, Default)]
pub struct FeatureStats {
    pub workbooks: u64,
    pub cells: usize,
    pub tables: usize,
}

/// Cell kind counts used for the partition identity.
#[derive(Debug, Default)]
struct Kinds {
    text: usize,
    number: usize,
    formula: usize,
}

fn random_cell(rng: &mut ChaCha8Rng, r: u32, c: u32, kinds: &mut Kinds) -> Value {
    let at = CellAddr::new(r, c).to_a1();
    let mut cell = match rng.random_range(0..10) {
        0..=3 => {
            kinds.number += 1;
            json!({"ref": at, "number": rng.random_range(-50..500)})
        }
        4..=6 => {
            kinds.text += 1;
            let words = ["Revenue", "Q1 total", "cost of goods", "", "Net margin %"];
            json!({"ref": at, "text": words.choose(rng).unwrap()})
        }
        _ => {
            kinds.formula += 1;
            json!({"ref": at, "formula": FORMULAS.choose(rng).unwrap()})
        }
    };
    if rng.random_bool(0.5) {
        let mut style = serde_json::Map::new();
        if rng.random_bool(0.4) {
            style.insert("fill".into(), json!(COLORS.choose(rng).unwrap()));
        }
        if rng.random_bool(0.4) {
            style.insert("fontColor".into(), json!(COLORS.choose(rng).unwrap()));
        }
        if rng.random_bool(0.3) {
            style.insert("fontWeight".into(), json!("bold"));
        }
        if rng.random_bool(0.3) {
            style.insert("numberFormat".into(), json!("#,##0.00"));
        }
        if rng.random_bool(0.3) {
            style.insert("fontSize".into(), json!([10, 11, 14].choose(rng).unwrap()));
        }
        if rng.random_bool(0.1) {
            style.insert("border".into(), json!("thin"));
        }
        cell["style"] = Value::Object(style);
    }
    cell
}

fn random_doc(rng: &mut ChaCha8Rng) -> (Value, Kinds) {
    let mut kinds = Kinds::default();
    let n_sheets = rng.random_range(1..=3);
    let sheets: Vec<Value> = (0..n_sheets)
        .map(|si| {
            let density = rng.random_range(0.05..0.7);
            let mut cells = Vec::new();
            for r in 1..=GRID {
                for c in 1..=GRID {
                    if rng.random_bool(density) {
                        cells.push(random_cell(rng, r, c, &mut kinds));
                    }
                }
            }
            json!({"name": SHEET_NAMES[si], "cells": cells})
        })
        .collect();
    (json!({"version": "SheetSpec@2", "sheets": sheets}), kinds)
}

fn features_of(doc: &Value) -> Result<(Workbook, FeatureVector), String> {
    let wb = parse_workbook_str(&doc.to_string()).map_err(|e| e.to_string())?;
    let grid = evaluate_workbook(&wb);
    let f = extract_features(&wb, &grid);
    Ok((wb, f))
}

/// Components via breadth-first flood fill over a dense occupancy grid,
/// as `(min_row, min_col, max_row, max_col, cells)` in top-left order.
fn flood_fill_tables(sheet: &Sheet) -> Vec<(u32, u32, u32, u32, usize)> {
    let size = (GRID + 8) as usize;
    let mut occupied = vec![vec![false; size + 2]; size + 2];
    for cell in &sheet.cells {
        occupied[cell.addr.row as usize][cell.addr.col as usize] = true;
    }
    let mut label = vec![vec![0usize; size + 2]; size + 2];
    let mut next = 0usize;
    let mut found = Vec::new();
    for r in 1..=size {
        for c in 1..=size {
            if !occupied[r][c] || label[r][c] != 0 {
                continue;
            }
            next += 1;
            label[r][c] = next;
            let mut queue = VecDeque::from([(r, c)]);
            let (mut r0, mut c0, mut r1, mut c1, mut n) = (r, c, r, c, 0usize);
            while let Some((y, x)) = queue.pop_front() {
                n += 1;
                r0 = r0.min(y);
                r1 = r1.max(y);
                c0 = c0.min(x);
                c1 = c1.max(x);
                for (ny, nx) in [(y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)] {
                    if occupied[ny][nx] && label[ny][nx] == 0 {
                        label[ny][nx] = next;
                        queue.push_back((ny, nx));
                    }
                }
            }
            if n >= 4 && r1 > r0 && c1 > c0 {
                found.push((r0 as u32, c0 as u32, r1 as u32, c1 as u32, n));
            }
        }
    }
    found.sort_by_key(|t| (t.0, t.1));
    found
}

fn shifted(doc: &Value, dr: u32, dc: u32) -> Value {
    let mut out = doc.clone();
    for sheet in out["sheets"].as_array_mut().unwrap() {
        for cell in sheet["cells"].as_array_mut().unwrap() {
            let addr: CellAddr = cell["ref"].as_str().unwrap().parse().unwrap();
            cell["ref"] = json!(CellAddr::new(addr.row + dr, addr.col + dc).to_a1());
        }
    }
    out
}

fn shuffled(doc: &Value, rng: &mut ChaCha8Rng) -> Value {
    let mut out = doc.clone();
    for sheet in out["sheets"].as_array_mut().unwrap() {
        sheet["cells"].as_array_mut().unwrap().shuffle(rng);
    }
    out
}

fn check_ranges(f: &FeatureVector) -> Result<(), String> {
    for (name, v) in FEATURE_NAMES.iter().zip(f.values()) {
        if !v.is_finite() {
            return Err(format!("{name} = {v}"));
        }
        let unit = name.starts_with("pct_")
            || name.ends_with("_rate")
            || *name == "compute_pct_numeric"
            || *name == "largest_table_pct"
            || *name == "cell_density"
            || *name == "finance_color_convention";
        if unit && !(0.0..=1.0).contains(&v) {
            return Err(format!("{name} = {v} outside [0, 1]"));
        }
        if name.starts_with("has_") && v != 0.0 && v != 1.0 {
            return Err(format!("{name} = {v} not binary"));
        }
        if v < 0.0 {
            return Err(format!("{name} = {v} negative"));
        }
    }
    Ok(())
}

/// Run every feature property on `workbooks` random workbooks.
pub fn check(seed: u64, workbooks: u64) -> Result<FeatureStats, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = FeatureStats {
        workbooks,
        ..Default::default()
    };
    for case in 0..workbooks {
        let (doc, kinds) = random_doc(&mut rng);
        let (wb, f) = features_of(&doc).map_err(|e| format!("case {case}: {e}"))?;
        let n = wb.cell_count();
        stats.cells += n;
        check_ranges(&f).map_err(|e| format!("case {case}: {e}"))?;

        // Partition identity: every non-empty cell is text, formula or a number literal.
        if kinds.text + kinds.formula + kinds.number != n {
            return Err(format!("case {case}: kinds do not partition {n} cells"));
        }
        if n > 0 {
            let nf = n as f64;
            let literal = kinds.number as f64 / nf;
            if f.pct_text != kinds.text as f64 / nf || f.pct_formula != kinds.formula as f64 / nf {
                return Err(format!("case {case}: pct_text/pct_formula disagree with counts"));
            }
            let total = f.pct_text + f.pct_formula + literal;
            if (total - 1.0).abs() > 4.0 * f64::EPSILON {
                return Err(format!("case {case}: partition sums to {total}"));
            }
        }

        // Table detection against flood fill.
        for sheet in &wb.sheets {
            let got: Vec<_> = detect_tables(sheet)
                .into_iter()
                .map(|t| {
                    let b = t.bounds;
                    (b.min_row, b.min_col, b.max_row, b.max_col, t.cell_count)
                })
                .collect();
            let want = flood_fill_tables(sheet);
            if got != want {
                return Err(format!("case {case} sheet {}: {got:?} vs {want:?}", sheet.name));
            }
            stats.tables += got.len();
        }

        // Translation invariance.
        let (dr, dc) = (rng.random_range(0..6), rng.random_range(0..6));
        let (_, g) = features_of(&shifted(&doc, dr, dc)).map_err(|e| format!("case {case}: {e}"))?;
        for name in FEATURE_NAMES
            .iter()
            .filter(|n| n.starts_with("pct_") || matches!(**n, "num_tables" | "largest_table_pct" | "cell_density"))
        {
            if f.get(name) != g.get(name) {
                return Err(format!(
                    "case {case}: {name} changed under shift ({dr},{dc}): {:?} vs {:?}",
                    f.get(name),
                    g.get(name)
                ));
            }
        }

        // Permutation invariance: the whole vector is unchanged.
        let (_, p) = features_of(&shuffled(&doc, &mut rng)).map_err(|e| format!("case {case}: {e}"))?;
        if p != f {
            return Err(format!("case {case}: features changed when cells were reordered"));
        }
    }
    Ok(stats)
}
