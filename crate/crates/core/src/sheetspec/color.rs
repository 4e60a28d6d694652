use std::fmt;

use serde::{Serialize, Serializer};

/// The sixteen basic CSS color keywords.
pub const NAMED_COLORS: [(&str, &str); 16] = [
    ("black", "000000"),
    ("silver", "C0C0C0"),
    ("gray", "808080"),
    ("white", "FFFFFF"),
    ("maroon", "800000"),
    ("red", "FF0000"),
    ("purple", "800080"),
    ("fuchsia", "FF00FF"),
    ("green", "008000"),
    ("lime", "00FF00"),
    ("olive", "808000"),
    ("yellow", "FFFF00"),
    ("navy", "000080"),
    ("blue", "0000FF"),
    ("teal", "008080"),
    ("aqua", "00FFFF"),
];

/// An RGB color normalized to `#RRGGBB` (uppercase hex).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Color {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Color {
    pub const fn rgb(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    /// Accepts `#RRGGBB`, `RRGGBB`, `#RGB`, `RGB` and the basic named colors.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((_, hex)) = NAMED_COLORS
            .iter()
            .find(|(name, _)| name.eq_ignore_ascii_case(s))
        {
            return Self::from_hex(hex);
        }
        let hex = s.strip_prefix('#').unwrap_or(s);
        match hex.len() {
            6 => Self::from_hex(hex),
            3 => {
                let doubled: String = hex.chars().flat_map(|c| [c, c]).collect();
                Self::from_hex(&doubled)
            }
            _ => None,
        }
    }

    fn from_hex(hex: &str) -> Option<Self> {
        if hex.len() != 6 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return None;
        }
        let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).ok();
        Some(Self::rgb(byte(0)?, byte(2)?, byte(4)?))
    }

    /// `(hue degrees in [0, 360), saturation, value)` with saturation and value in `[0, 1]`.
    pub fn hsv(&self) -> (f64, f64, f64) {
        let r = f64::from(self.r) / 255.0;
        let g = f64::from(self.g) / 255.0;
        let b = f64::from(self.b) / 255.0;
        let max = r.max(g).max(b);
        let min = r.min(g).min(b);
        let delta = max - min;
        let hue = if delta == 0.0 {
            0.0
        } else if max == r {
            60.0 * ((g - b) / delta).rem_euclid(6.0)
        } else if max == g {
            60.0 * ((b - r) / delta + 2.0)
        } else {
            60.0 * ((r - g) / delta + 4.0)
        };
        let sat = if max == 0.0 { 0.0 } else { delta / max };
        (hue, sat, max)
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02X}{:02X}{:02X}", self.r, self.g, self.b)
    }
}

impl Serialize for Color {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
