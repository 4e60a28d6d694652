//! A1 addressing: cell coordinates, rectangular areas and sheet-qualified references.
//!
//! Coordinates are 1-based. Absolute markers (`$`) are accepted everywhere and dropped;
//! only the formula parser keeps track of them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest row index a sheet may address.
pub const MAX_ROWS: u32 = 10_000;
/// Largest column index a sheet may address (column `ALL`).
pub const MAX_COLS: u32 = 1_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum A1Error {
    #[error("empty reference")]
    Empty,
    #[error("malformed reference `{0}`")]
    Malformed(String),
    #[error("reference `{0}` is outside the {MAX_ROWS}x{MAX_COLS} grid")]
    OutOfBounds(String),
}

/// A cell coordinate. Ordering is row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellAddr {
    pub row: u32,
    pub col: u32,
}

impl CellAddr {
    pub const fn new(row: u32, col: u32) -> Self {
        Self { row, col }
    }

    pub fn in_bounds(self) -> bool {
        (1..=MAX_ROWS).contains(&self.row) && (1..=MAX_COLS).contains(&self.col)
    }

    /// Shift by a signed offset; `None` if the result leaves the grid.
    pub fn offset(self, d_row: i64, d_col: i64) -> Option<Self> {
        let row = i64::from(self.row) + d_row;
        let col = i64::from(self.col) + d_col;
        let addr = Self::new(u32::try_from(row).ok()?, u32::try_from(col).ok()?);
        addr.in_bounds().then_some(addr)
    }

    pub fn to_a1(self) -> String {
        format!("{}{}", column_letters(self.col), self.row)
    }
}

impl fmt::Display for CellAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", column_letters(self.col), self.row)
    }
}

impl FromStr for CellAddr {
    type Err = A1Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_cell_token(s).map(|c| c.addr)
    }
}

impl Serialize for CellAddr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CellAddr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `1 -> A`, `27 -> AA`.
pub fn column_letters(mut col: u32) -> String {
    let mut out = Vec::new();
    while col > 0 {
        let rem = (col - 1) % 26;
        out.push(b'A' + rem as u8);
        col = (col - 1) / 26;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

/// Case-insensitive inverse of [`column_letters`]. Rejects anything past three letters.
pub fn column_index(letters: &str) -> Option<u32> {
    if letters.is_empty() || letters.len() > 3 {
        return None;
    }
    letters.bytes().try_fold(0u32, |acc, b| {
        b.is_ascii_alphabetic()
            .then(|| acc * 26 + u32::from(b.to_ascii_uppercase() - b'A') + 1)
    })
}

/// A single cell token with its absolute markers, e.g. `$B$7`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellToken {
    pub addr: CellAddr,
    pub abs_col: bool,
    pub abs_row: bool,
}

/// Split `$AB$12` into its parts without bounds checking.
fn split_cell(s: &str) -> Option<(bool, &str, bool, &str)> {
    let (abs_col, rest) = match s.strip_prefix('$') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let letters_end = rest.find(|c: char| !c.is_ascii_alphabetic())?;
    let (letters, rest) = rest.split_at(letters_end);
    let (abs_row, digits) = match rest.strip_prefix('$') {
        Some(r) => (true, r),
        None => (false, rest),
    };
    if letters.is_empty() || digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((abs_col, letters, abs_row, digits))
}

pub fn parse_cell_token(s: &str) -> Result<CellToken, A1Error> {
    let s = s.trim();
    if s.is_empty() {
        return Err(A1Error::Empty);
    }
    let (abs_col, letters, abs_row, digits) =
        split_cell(s).ok_or_else(|| A1Error::Malformed(s.to_string()))?;
    if letters.len() > 3 || digits.len() > 7 {
        return Err(A1Error::OutOfBounds(s.to_string()));
    }
    let col = column_index(letters).ok_or_else(|| A1Error::Malformed(s.to_string()))?;
    let row: u32 = digits.parse().map_err(|_| A1Error::Malformed(s.to_string()))?;
    let addr = CellAddr::new(row, col);
    if !addr.in_bounds() {
        return Err(A1Error::OutOfBounds(s.to_string()));
    }
    Ok(CellToken {
        addr,
        abs_col,
        abs_row,
    })
}

/// Whether `s` is shaped like a cell reference (letters then digits), ignoring bounds.
pub fn looks_like_cell(s: &str) -> bool {
    split_cell(s).is_some_and(|(_, letters, _, digits)| letters.len() <= 3 && digits.len() <= 7)
}

/// Parse a bare (optionally `$`-marked) column token like `AB` or `$C`.
pub fn parse_column_token(s: &str) -> Option<u32> {
    let s = s.strip_prefix('$').unwrap_or(s);
    column_index(s).filter(|c| *c <= MAX_COLS)
}

/// Parse a bare (optionally `$`-marked) row token like `12` or `$3`.
pub fn parse_row_token(s: &str) -> Option<u32> {
    let s = s.strip_prefix('$').unwrap_or(s);
    if s.is_empty() || s.len() > 7 || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok().filter(|r| (1..=MAX_ROWS).contains(r))
}

/// Inclusive rectangle of cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Rect {
    pub min_row: u32,
    pub max_row: u32,
    pub min_col: u32,
    pub max_col: u32,
}

impl Rect {
    pub fn from_corners(a: CellAddr, b: CellAddr) -> Self {
        Self {
            min_row: a.row.min(b.row),
            max_row: a.row.max(b.row),
            min_col: a.col.min(b.col),
            max_col: a.col.max(b.col),
        }
    }

    pub fn height(&self) -> u32 {
        self.max_row - self.min_row + 1
    }

    pub fn width(&self) -> u32 {
        self.max_col - self.min_col + 1
    }

    pub fn area(&self) -> u64 {
        u64::from(self.height()) * u64::from(self.width())
    }

    pub fn contains(&self, addr: CellAddr) -> bool {
        (self.min_row..=self.max_row).contains(&addr.row)
            && (self.min_col..=self.max_col).contains(&addr.col)
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let r = Rect {
            min_row: self.min_row.max(other.min_row),
            max_row: self.max_row.min(other.max_row),
            min_col: self.min_col.max(other.min_col),
            max_col: self.max_col.min(other.max_col),
        };
        (r.min_row <= r.max_row && r.min_col <= r.max_col).then_some(r)
    }

    /// Row-major iteration over member addresses.
    pub fn cells(&self) -> impl Iterator<Item = CellAddr> + '_ {
        (self.min_row..=self.max_row)
            .flat_map(move |r| (self.min_col..=self.max_col).map(move |c| CellAddr::new(r, c)))
    }
}

/// The rectangular part of a range reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Area {
    /// `A1:C3` (a single cell `A1` is the degenerate `A1:A1`).
    Cells { start: CellAddr, end: CellAddr },
    /// `A:C`
    Columns { first: u32, last: u32 },
    /// `2:5`
    Rows { first: u32, last: u32 },
}

impl Area {
    pub fn cells(start: CellAddr, end: CellAddr) -> Self {
        let r = Rect::from_corners(start, end);
        Area::Cells {
            start: CellAddr::new(r.min_row, r.min_col),
            end: CellAddr::new(r.max_row, r.max_col),
        }
    }

    pub fn columns(a: u32, b: u32) -> Self {
        Area::Columns {
            first: a.min(b),
            last: a.max(b),
        }
    }

    pub fn rows(a: u32, b: u32) -> Self {
        Area::Rows {
            first: a.min(b),
            last: a.max(b),
        }
    }

    /// The area as a rectangle on the full grid (whole columns/rows span the grid).
    pub fn rect(&self) -> Rect {
        match *self {
            Area::Cells { start, end } => Rect::from_corners(start, end),
            Area::Columns { first, last } => Rect {
                min_row: 1,
                max_row: MAX_ROWS,
                min_col: first,
                max_col: last,
            },
            Area::Rows { first, last } => Rect {
                min_row: first,
                max_row: last,
                min_col: 1,
                max_col: MAX_COLS,
            },
        }
    }

    /// Clip whole-row/column areas to `used`; explicit cell areas are returned unchanged.
    pub fn clipped(&self, used: Option<&Rect>) -> Option<Rect> {
        match self {
            Area::Cells { .. } => Some(self.rect()),
            _ => used.and_then(|u| self.rect().intersect(u)),
        }
    }
}

impl fmt::Display for Area {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Area::Cells { start, end } if start == end => write!(f, "{start}"),
            Area::Cells { start, end } => write!(f, "{start}:{end}"),
            Area::Columns { first, last } => {
                write!(f, "{}:{}", column_letters(first), column_letters(last))
            }
            Area::Rows { first, last } => write!(f, "{first}:{last}"),
        }
    }
}

/// A range reference with an optional sheet qualifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SheetArea {
    pub sheet: Option<String>,
    pub area: Area,
}

impl fmt::Display for SheetArea {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(sheet) = &self.sheet {
            write!(f, "{}!", quote_sheet_name(sheet))?;
        }
        write!(f, "{}", self.area)
    }
}

/// Quote a sheet name for use in a reference when it is not a plain identifier.
pub fn quote_sheet_name(name: &str) -> String {
    let plain = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_alphanumeric() || c == '_' || c == '.')
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && !looks_like_cell(name);
    if plain {
        name.to_string()
    } else {
        format!("'{}'", name.replace('\'', "''"))
    }
}

/// Split an optional `Sheet!` / `'Sheet name'!` prefix off a reference string.
pub fn split_sheet_prefix(s: &str) -> Result<(Option<String>, &str), A1Error> {
    if let Some(rest) = s.strip_prefix('\'') {
        let mut name = String::new();
        let mut chars = rest.char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            if c == '\'' {
                if matches!(chars.peek(), Some((_, '\''))) {
                    chars.next();
                    name.push('\'');
                    continue;
                }
                let tail = &rest[i + 1..];
                return match tail.strip_prefix('!') {
                    Some(r) if !name.is_empty() => Ok((Some(name), r)),
                    _ => Err(A1Error::Malformed(s.to_string())),
                };
            }
            name.push(c);
        }
        return Err(A1Error::Malformed(s.to_string()));
    }
    match s.rfind('!') {
        Some(0) => Err(A1Error::Malformed(s.to_string())),
        Some(i) => Ok((Some(s[..i].to_string()), &s[i + 1..])),
        None => Ok((None, s)),
    }
}

fn parse_area(s: &str) -> Result<Area, A1Error> {
    let s = s.trim();
    if s.is_empty() {
        return Err(A1Error::Empty);
    }
    let malformed = || A1Error::Malformed(s.to_string());
    match s.split_once(':') {
        None => parse_cell_token(s).map(|t| Area::cells(t.addr, t.addr)),
        Some((a, b)) => {
            if looks_like_cell(a) || looks_like_cell(b) {
                let a = parse_cell_token(a)?;
                let b = parse_cell_token(b)?;
                Ok(Area::cells(a.addr, b.addr))
            } else if let (Some(a), Some(b)) = (parse_column_token(a), parse_column_token(b)) {
                Ok(Area::columns(a, b))
            } else if let (Some(a), Some(b)) = (parse_row_token(a), parse_row_token(b)) {
                Ok(Area::rows(a, b))
            } else {
                Err(malformed())
            }
        }
    }
}

/// Parse a range reference such as `B2:D9`, `Sheet2!A:B`, `'Q1 Data'!$A$1` or `3:4`.
pub fn parse_range_ref(s: &str) -> Result<SheetArea, A1Error> {
    let s = s.trim();
    if s.is_empty() {
        return Err(A1Error::Empty);
    }
    let (sheet, rest) = split_sheet_prefix(s)?;
    Ok(SheetArea {
        sheet,
        area: parse_area(rest)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_letters_roundtrip() {
        for col in 1..=MAX_COLS {
            assert_eq!(column_index(&column_letters(col)), Some(col));
        }
        assert_eq!(column_letters(1), "A");
        assert_eq!(column_letters(26), "Z");
        assert_eq!(column_letters(27), "AA");
        assert_eq!(column_letters(1000), "ALL");
    }

    #[test]
    fn normalization_is_idempotent() {
        let a: CellAddr = "a1".parse().unwrap();
        let b: CellAddr = "A1".parse().unwrap();
        let c: CellAddr = "$A$1".parse().unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
        assert_eq!(a.to_a1().parse::<CellAddr>().unwrap(), a);
    }

    #[test]
    fn bounds_are_enforced() {
        assert!("ALL10000".parse::<CellAddr>().is_ok());
        assert!(matches!(
            "ALM1".parse::<CellAddr>(),
            Err(A1Error::OutOfBounds(_))
        ));
        assert!(matches!(
            "A10001".parse::<CellAddr>(),
            Err(A1Error::OutOfBounds(_))
        ));
        assert!(matches!(
            "A0".parse::<CellAddr>(),
            Err(A1Error::OutOfBounds(_))
        ));
    }

    #[test]
    fn range_refs() {
        let r = parse_range_ref("Sheet2!A:B").unwrap();
        assert_eq!(r.sheet.as_deref(), Some("Sheet2"));
        assert_eq!(r.area, Area::columns(1, 2));

        let r = parse_range_ref("'Q1 ''Data'''!$D$9:b2").unwrap();
        assert_eq!(r.sheet.as_deref(), Some("Q1 'Data'"));
        assert_eq!(
            r.area,
            Area::cells(CellAddr::new(2, 2), CellAddr::new(9, 4))
        );
        assert_eq!(r.to_string(), "'Q1 ''Data'''!B2:D9");

        assert_eq!(parse_range_ref("3:4").unwrap().area, Area::rows(3, 4));
        assert!(parse_range_ref("ZZZ").is_err());
        assert!(parse_range_ref("A1:").is_err());
        assert!(parse_range_ref("!A1").is_err());
    }

    #[test]
    fn column_areas_clip_to_used_range() {
        let used = Rect::from_corners(CellAddr::new(2, 1), CellAddr::new(6, 3));
        let clipped = Area::columns(2, 2).clipped(Some(&used)).unwrap();
        assert_eq!((clipped.min_row, clipped.max_row), (2, 6));
        assert_eq!(Area::columns(5, 6).clipped(Some(&used)), None);
        assert_eq!(Area::columns(1, 1).clipped(None), None);
    }
}
