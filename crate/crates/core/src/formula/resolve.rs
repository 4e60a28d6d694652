use std::collections::BTreeMap;

use crate::a1::{parse_range_ref, Area, CellAddr, Rect, SheetArea};
use crate::sheetspec::{used_range, Cell, Workbook};

use super::ast::{CellRef, Expr};
use super::value::ErrorCode;

/// A rectangular block of cells on one sheet. `rows` or `cols` may be zero
/// when a whole-row/column reference misses the used range entirely.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct RangeRef {
    pub sheet: usize,
    pub top: u32,
    pub left: u32,
    pub rows: u32,
    pub cols: u32,
}

impl RangeRef {
    pub fn single(sheet: usize, addr: CellAddr) -> Self {
        Self {
            sheet,
            top: addr.row,
            left: addr.col,
            rows: 1,
            cols: 1,
        }
    }

    pub fn from_rect(sheet: usize, rect: Option<Rect>) -> Self {
        match rect {
            Some(r) => Self {
                sheet,
                top: r.min_row,
                left: r.min_col,
                rows: r.height(),
                cols: r.width(),
            },
            None => Self {
                sheet,
                top: 1,
                left: 1,
                rows: 0,
                cols: 0,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.rows as usize * self.cols as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Address at 0-based offsets.
    pub fn addr(&self, i: u32, j: u32) -> CellAddr {
        CellAddr::new(self.top + i, self.left + j)
    }

    pub fn rect(&self) -> Option<Rect> {
        (!self.is_empty()).then(|| Rect {
            min_row: self.top,
            max_row: self.top + self.rows - 1,
            min_col: self.left,
            max_col: self.left + self.cols - 1,
        })
    }

    pub fn sub(&self, top: u32, left: u32, rows: u32, cols: u32) -> Self {
        Self {
            sheet: self.sheet,
            top: self.top + top,
            left: self.left + left,
            rows,
            cols,
        }
    }
}

/// What a reference expression points at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Target {
    Cell(usize, CellAddr),
    Range(RangeRef),
    Error(ErrorCode),
}

/// Lookup tables shared by graph construction and evaluation.
pub(crate) struct WorkbookIndex<'a> {
    pub wb: &'a Workbook,
    pub cells: Vec<BTreeMap<CellAddr, &'a Cell>>,
    pub used: Vec<Option<Rect>>,
    /// Per declaring sheet: lowercase name → resolved `(sheet, area)` or `None` if the ref is bad.
    names: Vec<Vec<(String, Option<(usize, Area)>)>>,
}

impl<'a> WorkbookIndex<'a> {
    pub fn new(wb: &'a Workbook) -> Self {
        let cells: Vec<BTreeMap<CellAddr, &Cell>> = wb
            .sheets
            .iter()
            .map(|s| s.cells.iter().map(|c| (c.addr, c)).collect())
            .collect();
        let used = wb.sheets.iter().map(used_range).collect();
        let mut idx = Self {
            wb,
            cells,
            used,
            names: Vec::new(),
        };
        idx.names = wb
            .sheets
            .iter()
            .enumerate()
            .map(|(si, s)| {
                s.named_ranges()
                    .iter()
                    .map(|n| {
                        let resolved = parse_range_ref(&n.reference).ok().and_then(|r| {
                            idx.sheet(si, r.sheet.as_deref()).map(|target| (target, r.area))
                        });
                        (n.name.to_lowercase(), resolved)
                    })
                    .collect()
            })
            .collect();
        idx
    }

    pub fn sheet(&self, current: usize, name: Option<&str>) -> Option<usize> {
        match name {
            None => Some(current),
            Some(n) => self.wb.sheet_index(n),
        }
    }

    /// Named range lookup: the current sheet's names first, then every other sheet in order.
    /// `None` if no sheet declares the name; `Some(None)` if the declaration is unusable.
    pub fn name(&self, current: usize, name: &str) -> Option<Option<(usize, Area)>> {
        let key = name.to_lowercase();
        let find = |si: usize| {
            self.names[si]
                .iter()
                .find(|(n, _)| *n == key)
                .map(|(_, r)| *r)
        };
        find(current).or_else(|| {
            (0..self.names.len())
                .filter(|&si| si != current)
                .find_map(find)
        })
    }

    pub fn area(&self, sheet: usize, area: &Area) -> RangeRef {
        RangeRef::from_rect(sheet, area.clipped(self.used[sheet].as_ref()))
    }

    pub fn target_of_cell(&self, current: usize, c: &CellRef) -> Target {
        match self.sheet(current, c.sheet.as_deref()) {
            Some(s) => Target::Cell(s, c.addr),
            None => Target::Error(ErrorCode::Ref),
        }
    }

    pub fn target_of_range(&self, current: usize, r: &SheetArea) -> Target {
        match self.sheet(current, r.sheet.as_deref()) {
            Some(s) => Target::Range(self.area(s, &r.area)),
            None => Target::Error(ErrorCode::Ref),
        }
    }

    pub fn target_of_name(&self, current: usize, name: &str) -> Target {
        match self.name(current, name) {
            None => Target::Error(ErrorCode::Name),
            Some(None) => Target::Error(ErrorCode::Ref),
            Some(Some((s, area))) => Target::Range(self.area(s, &area)),
        }
    }

    /// Targets of every reference in `expr`, in traversal order.
    pub fn targets(&self, current: usize, expr: &Expr) -> Vec<Target> {
        let mut out = Vec::new();
        expr.walk(&mut |e| match e {
            Expr::Cell(c) => out.push(self.target_of_cell(current, c)),
            Expr::Range(r) => out.push(self.target_of_range(current, r)),
            Expr::Name(n) => out.push(self.target_of_name(current, n)),
            _ => {}
        });
        out
    }

    /// Document cells inside `r`, row-major.
    pub fn cells_in<'s>(&'s self, r: &RangeRef) -> impl Iterator<Item = CellAddr> + 's {
        let r = *r;
        let rect = r.rect();
        let range = rect.map(|rect| {
            CellAddr::new(rect.min_row, rect.min_col)..=CellAddr::new(rect.max_row, rect.max_col)
        });
        range
            .into_iter()
            .flat_map(move |rg| self.cells[r.sheet].range(rg))
            .map(|(a, _)| *a)
            .filter(move |a| rect.is_some_and(|rect| rect.contains(*a)))
    }
}
