use std::collections::HashSet;

use super::*;
use crate::a1::{looks_like_cell, parse_range_ref};
use crate::formula::{parse_formula, Expr, SUPPORTED_FUNCTIONS, VOLATILE_FUNCTIONS};

const MAX_SANE_FONT_SIZE: f64 = 96.0;

/// Cross-reference and stylistic checks over a parsed workbook.
///
/// Dangling sheet or name references, unparseable formulas and malformed range
/// strings are errors. Unsupported or disallowed functions and odd styling are
/// warnings.
pub fn validate_workbook(wb: &Workbook) -> ValidationReport {
    let mut v = Validator {
        wb,
        issues: Vec::new(),
        names: wb
            .sheets
            .iter()
            .flat_map(|s| s.named_ranges().iter().map(|n| n.name.to_lowercase()))
            .collect(),
    };
    for (si, sheet) in wb.sheets.iter().enumerate() {
        v.sheet(si, sheet);
    }
    if let Some(outputs) = &wb.outputs {
        for (i, o) in outputs.iter().enumerate() {
            let path = format!("/outputs/{i}/ref");
            match parse_range_ref(&o.reference) {
                Ok(r) if r.sheet.is_some() && wb.sheet(r.sheet.as_deref().unwrap_or("")).is_none() => {
                    v.error(&path, format!("unknown sheet in `{}`", o.reference))
                }
                Ok(_) => {}
                Err(e) => v.error(&path, format!("invalid range `{}`: {e}", o.reference)),
            }
        }
    }
    ValidationReport::from_issues(v.issues)
}

struct Validator<'a> {
    wb: &'a Workbook,
    issues: Vec<Issue>,
    names: HashSet<String>,
}

impl Validator<'_> {
    fn error(&mut self, path: &str, message: impl Into<String>) {
        self.issues.push(Issue::error(path, message));
    }

    fn warning(&mut self, path: &str, message: impl Into<String>) {
        self.issues.push(Issue::warning(path, message));
    }

    fn sheet(&mut self, si: usize, sheet: &Sheet) {
        let base = format!("/sheets/{si}");

        let mut seen = HashSet::new();
        for (i, n) in sheet.named_ranges().iter().enumerate() {
            let path = format!("{base}/namedRanges/{i}");
            if !seen.insert(n.name.to_lowercase()) {
                self.error(&format!("{path}/name"), format!("duplicate named range `{}`", n.name));
            }
            let shaped_like_ref = looks_like_cell(&n.name)
                || n.name.eq_ignore_ascii_case("TRUE")
                || n.name.eq_ignore_ascii_case("FALSE");
            if shaped_like_ref || !n.name.starts_with(|c: char| c.is_alphabetic() || c == '_') {
                self.error(
                    &format!("{path}/name"),
                    format!("`{}` is not a usable range name", n.name),
                );
            }
            self.range(&format!("{path}/ref"), &n.reference);
        }

        for (i, cell) in sheet.cells.iter().enumerate() {
            let path = format!("{base}/cells/{i}");
            match &cell.content {
                CellContent::Formula(src) => self.formula(&format!("{path}/formula"), src),
                CellContent::Text(t) if t.starts_with('=') && t.len() > 1 => self.warning(
                    &format!("{path}/text"),
                    "text begins with `=`; it will display literally rather than compute",
                ),
                _ => {}
            }
            if let Some(style) = &cell.style {
                self.style(&format!("{path}/style"), style);
            }
        }

        for (i, rule) in sheet.conditional_formats.iter().flatten().enumerate() {
            let path = format!("{base}/conditionalFormats/{i}");
            self.range(&format!("{path}/range"), rule.range());
            match rule {
                ConditionalFormatRule::Expression { formula, .. } => {
                    let src = if formula.starts_with('=') {
                        formula.clone()
                    } else {
                        format!("={formula}")
                    };
                    self.formula(&format!("{path}/formula"), &src);
                }
                ConditionalFormatRule::CellIs { value, .. } => {
                    self.operand(&format!("{path}/value"), value)
                }
                ConditionalFormatRule::CellIsBetween { min, max, .. } => {
                    self.operand(&format!("{path}/min"), min);
                    self.operand(&format!("{path}/max"), max);
                }
                _ => {}
            }
        }
    }

    fn operand(&mut self, path: &str, op: &RuleOperand) {
        if let RuleOperand::Text(t) = op {
            if t.starts_with('=') {
                self.formula(path, t);
            }
        }
    }

    fn range(&mut self, path: &str, text: &str) {
        match parse_range_ref(text) {
            Ok(r) => {
                if let Some(s) = &r.sheet {
                    if self.wb.sheet(s).is_none() {
                        self.error(path, format!("unknown sheet `{s}`"));
                    }
                }
            }
            Err(e) => self.error(path, format!("invalid range `{text}`: {e}")),
        }
    }

    fn formula(&mut self, path: &str, src: &str) {
        let expr = match parse_formula(src) {
            Ok(e) => e,
            Err(e) => {
                self.error(path, format!("unparseable formula: {e}"));
                return;
            }
        };
        let rules = self.wb.rules.clone().unwrap_or_default();
        let mut findings = Vec::new();
        expr.walk(&mut |e| match e {
            Expr::Cell(c) => {
                if let Some(s) = &c.sheet {
                    if self.wb.sheet(s).is_none() {
                        findings.push((Severity::Error, format!("unknown sheet `{s}`")));
                    }
                }
            }
            Expr::Range(r) => {
                if let Some(s) = &r.sheet {
                    if self.wb.sheet(s).is_none() {
                        findings.push((Severity::Error, format!("unknown sheet `{s}`")));
                    }
                }
            }
            Expr::Name(n) => {
                if !self.names.contains(&n.to_lowercase()) {
                    findings.push((Severity::Error, format!("unknown name `{n}`")));
                }
            }
            Expr::Call { name, .. } => {
                if !SUPPORTED_FUNCTIONS.contains(&name.as_str()) {
                    findings.push((Severity::Warning, format!("unsupported function `{name}`")));
                }
                if let Some(allowed) = &rules.allowed_functions {
                    if !allowed.iter().any(|a| a == name) {
                        findings.push((
                            Severity::Warning,
                            format!("function `{name}` is not in allowedFunctions"),
                        ));
                    }
                }
                if rules.disallow_volatile == Some(true) && VOLATILE_FUNCTIONS.contains(&name.as_str())
                {
                    findings.push((Severity::Warning, format!("volatile function `{name}`")));
                }
            }
            _ => {}
        });
        for (sev, msg) in findings {
            self.issues.push(Issue {
                severity: sev,
                path: path.to_string(),
                message: msg,
            });
        }
    }

    fn style(&mut self, path: &str, style: &CellStyle) {
        if let (Some(fg), Some(bg)) = (style.font_color, style.fill) {
            if fg == bg {
                self.warning(path, "font color equals fill; text is invisible");
            }
        }
        if let Some(size) = style.font_size {
            if size > MAX_SANE_FONT_SIZE {
                self.warning(&format!("{path}/fontSize"), format!("unusually large font size {size}"));
            }
        }
    }
}
