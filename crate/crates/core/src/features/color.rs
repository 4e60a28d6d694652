use crate::formula::{cross_sheet_formulas, CellKey, EvaluatedGrid};
use crate::sheetspec::{CellContent, Color, Workbook};

/// Font color families recognised by the finance color convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorFamily {
    Blue,
    Black,
    Green,
}

impl ColorFamily {
    /// Dark colors are black regardless of hue; otherwise bucket by hue.
    pub fn of(color: Color) -> Option<Self> {
        let (hue, _, value) = color.hsv();
        if value < 0.2 {
            Some(Self::Black)
        } else if (200.0..=260.0).contains(&hue) {
            Some(Self::Blue)
        } else if (90.0..=160.0).contains(&hue) {
            Some(Self::Green)
        } else {
            None
        }
    }
}

/// Share of colored cells that follow the blue-input / black-formula /
/// green-link convention. Only cells with an explicit font color in one of the
/// three families count; text cells have no role and are skipped. `0` when no
/// cell applies.
pub fn finance_color_score(wb: &Workbook, grid: &EvaluatedGrid) -> f64 {
    let links = cross_sheet_formulas(wb, grid);
    let mut applicable = 0usize;
    let mut conforming = 0usize;
    for (si, cell) in wb.cells() {
        let Some(family) = cell.style().and_then(|s| s.font_color).and_then(ColorFamily::of) else {
            continue;
        };
        let expected = match &cell.content {
            CellContent::Text(_) => continue,
            CellContent::Number(_) => ColorFamily::Blue,
            CellContent::Formula(_) => {
                if links.contains(&CellKey::new(si, cell.addr)) {
                    ColorFamily::Green
                } else {
                    ColorFamily::Black
                }
            }
        };
        applicable += 1;
        if family == expected {
            conforming += 1;
        }
    }
    if applicable == 0 {
        0.0
    } else {
        conforming as f64 / applicable as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families() {
        let fam = |s: &str| ColorFamily::of(Color::parse(s).unwrap());
        assert_eq!(fam("#0000FF"), Some(ColorFamily::Blue));
        assert_eq!(fam("#1F4E79"), Some(ColorFamily::Blue));
        assert_eq!(fam("#000000"), Some(ColorFamily::Black));
        assert_eq!(fam("#1A1A1A"), Some(ColorFamily::Black));
        assert_eq!(fam("#00B050"), Some(ColorFamily::Green));
        assert_eq!(fam("#008000"), Some(ColorFamily::Green));
        assert_eq!(fam("#FF0000"), None);
        assert_eq!(fam("#808080"), None);
        assert_eq!(fam("#FFFFFF"), None);
    }
}
