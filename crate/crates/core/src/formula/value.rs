use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

/// The error codes a cell can evaluate to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorCode {
    Ref,
    Div0,
    Name,
    Value,
    NA,
    /// Circular reference.
    Circ,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 6] = [
        ErrorCode::Ref,
        ErrorCode::Div0,
        ErrorCode::Name,
        ErrorCode::Value,
        ErrorCode::NA,
        ErrorCode::Circ,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::Ref => "#REF!",
            ErrorCode::Div0 => "#DIV/0!",
            ErrorCode::Name => "#NAME?",
            ErrorCode::Value => "#VALUE!",
            ErrorCode::NA => "#N/A",
            ErrorCode::Circ => "#CIRC!",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorCode {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        ErrorCode::ALL
            .into_iter()
            .find(|e| e.as_str().eq_ignore_ascii_case(s))
            .ok_or(())
    }
}

impl Serialize for ErrorCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    Number(f64),
    Text(String),
    Bool(bool),
    Blank,
    Error(ErrorCode),
}

impl CellValue {
    pub fn is_error(&self) -> bool {
        matches!(self, CellValue::Error(_))
    }

    pub fn is_number(&self) -> bool {
        matches!(self, CellValue::Number(_))
    }

    pub fn error(&self) -> Option<ErrorCode> {
        match self {
            CellValue::Error(e) => Some(*e),
            _ => None,
        }
    }

    /// Finite numbers pass through; NaN and infinities become `#VALUE!`.
    pub fn number(n: f64) -> Self {
        if n.is_finite() {
            CellValue::Number(n)
        } else {
            CellValue::Error(ErrorCode::Value)
        }
    }

    /// `{"value": ...}` or `{"error": "#CODE"}`.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::{json, Value};
        match self {
            CellValue::Number(n) => json!({ "value": n }),
            CellValue::Text(s) => json!({ "value": s }),
            CellValue::Bool(b) => json!({ "value": b }),
            CellValue::Blank => json!({ "value": Value::Null }),
            CellValue::Error(e) => json!({ "error": e.as_str() }),
        }
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellValue::Number(n) => write!(f, "{n}"),
            CellValue::Text(s) => f.write_str(s),
            CellValue::Bool(true) => f.write_str("TRUE"),
            CellValue::Bool(false) => f.write_str("FALSE"),
            CellValue::Blank => Ok(()),
            CellValue::Error(e) => write!(f, "{e}"),
        }
    }
}

impl Serialize for CellValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}
