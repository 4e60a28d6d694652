use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::a1::{CellAddr, Rect};
use crate::sheetspec::Sheet;

pub const MIN_TABLE_CELLS: usize = 4;

/// A block of 4-connected non-empty cells large enough to count as a table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRegion {
    pub sheet: String,
    pub bounds: Rect,
    pub cell_count: usize,
    pub row_span: u32,
    pub col_span: u32,
}

/// Connected components of non-empty cells with at least 4 cells spanning at
/// least 2 rows and 2 columns, ordered by top-left corner (row-major).
pub fn detect_tables(sheet: &Sheet) -> Vec<TableRegion> {
    let occupied: BTreeSet<CellAddr> = sheet.cells.iter().map(|c| c.addr).collect();
    let mut seen: HashSet<CellAddr> = HashSet::with_capacity(occupied.len());
    let mut regions = Vec::new();

    for &start in &occupied {
        if !seen.insert(start) {
            continue;
        }
        let mut stack = vec![start];
        let mut bounds = Rect::from_corners(start, start);
        let mut count = 0usize;
        while let Some(a) = stack.pop() {
            count += 1;
            bounds = Rect {
                min_row: bounds.min_row.min(a.row),
                max_row: bounds.max_row.max(a.row),
                min_col: bounds.min_col.min(a.col),
                max_col: bounds.max_col.max(a.col),
            };
            for (dr, dc) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                if let Some(n) = a.offset(dr, dc) {
                    if occupied.contains(&n) && seen.insert(n) {
                        stack.push(n);
                    }
                }
            }
        }
        if count >= MIN_TABLE_CELLS && bounds.height() >= 2 && bounds.width() >= 2 {
            regions.push(TableRegion {
                sheet: sheet.name.clone(),
                bounds,
                cell_count: count,
                row_span: bounds.height(),
                col_span: bounds.width(),
            });
        }
    }
    regions.sort_by_key(|t| (t.bounds.min_row, t.bounds.min_col));
    regions
}

/// Two regions sit side by side: their row intervals overlap and their
/// column intervals do not.
pub fn side_by_side(a: &TableRegion, b: &TableRegion) -> bool {
    let rows_overlap = a.bounds.min_row <= b.bounds.max_row && b.bounds.min_row <= a.bounds.max_row;
    let cols_overlap = a.bounds.min_col <= b.bounds.max_col && b.bounds.min_col <= a.bounds.max_col;
    rows_overlap && !cols_overlap
}
