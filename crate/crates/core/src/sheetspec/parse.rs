use std::collections::HashSet;

use serde_json::{Map, Value};

use super::*;
use crate::a1::parse_cell_token;

type Result<T> = std::result::Result<T, SheetSpecError>;

/// Parse a SheetSpec@2 document, discarding parse-time warnings.
pub fn parse_workbook(document: &[u8]) -> Result<Workbook> {
    parse_workbook_report(document).map(|(wb, _)| wb)
}

pub fn parse_workbook_str(document: &str) -> Result<Workbook> {
    parse_workbook(document.as_bytes())
}

/// Parse a SheetSpec@2 document and return the warnings raised while normalizing it
/// (unknown color names, non-positive font sizes, unknown style keys).
pub fn parse_workbook_report(document: &[u8]) -> Result<(Workbook, Vec<Issue>)> {
    let value: Value =
        serde_json::from_slice(document).map_err(|e| SheetSpecError::MalformedJson {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    let mut parser = Parser::default();
    let wb = parser.workbook(&value)?;
    Ok((wb, parser.warnings))
}

fn violation(path: &str, message: impl Into<String>) -> SheetSpecError {
    SheetSpecError::SchemaViolation {
        path: if path.is_empty() { "/".into() } else { path.into() },
        message: message.into(),
    }
}

fn child(path: &str, key: impl std::fmt::Display) -> String {
    format!("{path}/{key}")
}

fn json_type(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| violation(path, format!("expected object, found {}", json_type(v))))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| violation(path, format!("expected array, found {}", json_type(v))))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| violation(path, format!("expected string, found {}", json_type(v))))
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| violation(path, format!("expected number, found {}", json_type(v))))
}

fn check_keys(obj: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(violation(&child(path, k), "unknown property")),
        None => Ok(()),
    }
}

fn required<'a>(obj: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| violation(path, format!("missing required property `{key}`")))
}

#[derive(Default)]
struct Parser {
    warnings: Vec<Issue>,
}

impl Parser {
    fn workbook(&mut self, v: &Value) -> Result<Workbook> {
        let obj = as_object(v, "")?;
        check_keys(obj, "", &["version", "sheets", "outputs", "rules"])?;

        let version = as_str(required(obj, "", "version")?, "/version")?;
        if version != VERSION {
            return Err(violation(
                "/version",
                format!("expected `{VERSION}`, found `{version}`"),
            ));
        }

        let sheets_v = as_array(required(obj, "", "sheets")?, "/sheets")?;
        let mut sheets = Vec::with_capacity(sheets_v.len());
        let mut names = HashSet::new();
        for (i, s) in sheets_v.iter().enumerate() {
            let path = child("/sheets", i);
            let sheet = self.sheet(s, &path)?;
            if !names.insert(sheet.name.to_lowercase()) {
                return Err(violation(
                    &child(&path, "name"),
                    format!("duplicate sheet name `{}`", sheet.name),
                ));
            }
            sheets.push(sheet);
        }

        let outputs = match obj.get("outputs") {
            None => None,
            Some(v) => {
                let arr = as_array(v, "/outputs")?;
                let mut out = Vec::with_capacity(arr.len());
                for (i, o) in arr.iter().enumerate() {
                    let path = child("/outputs", i);
                    let output = output_ref(o, &path)?;
                    if !names.contains(&output.sheet.to_lowercase()) {
                        return Err(violation(
                            &child(&path, "sheet"),
                            format!("output names unknown sheet `{}`", output.sheet),
                        ));
                    }
                    out.push(output);
                }
                Some(out)
            }
        };

        let rules = obj.get("rules").map(|v| rules(v, "/rules")).transpose()?;

        Ok(Workbook {
            version: SpecVersion::V2,
            sheets,
            outputs,
            rules,
        })
    }

    fn sheet(&mut self, v: &Value, path: &str) -> Result<Sheet> {
        let obj = as_object(v, path)?;
        check_keys(obj, path, &["name", "cells", "namedRanges", "conditionalFormats"])?;
        let name = as_str(required(obj, path, "name")?, &child(path, "name"))?;
        if name.trim().is_empty() {
            return Err(violation(&child(path, "name"), "sheet name is empty"));
        }

        let cells_path = child(path, "cells");
        let cells_v = as_array(required(obj, path, "cells")?, &cells_path)?;
        let mut cells = Vec::with_capacity(cells_v.len());
        let mut seen = HashSet::with_capacity(cells_v.len());
        for (i, c) in cells_v.iter().enumerate() {
            let cpath = child(&cells_path, i);
            let cell = self.cell(c, &cpath)?;
            if !seen.insert(cell.addr) {
                return Err(violation(
                    &cpath,
                    format!("duplicate cell address {}", cell.addr),
                ));
            }
            cells.push(cell);
        }

        let named_ranges = match obj.get("namedRanges") {
            None => None,
            Some(v) => {
                let npath = child(path, "namedRanges");
                let arr = as_array(v, &npath)?;
                let mut out = Vec::with_capacity(arr.len());
                for (i, n) in arr.iter().enumerate() {
                    let p = child(&npath, i);
                    let o = as_object(n, &p)?;
                    check_keys(o, &p, &["name", "ref"])?;
                    let name = as_str(required(o, &p, "name")?, &child(&p, "name"))?;
                    if name.trim().is_empty() {
                        return Err(violation(&child(&p, "name"), "named range name is empty"));
                    }
                    out.push(NamedRange {
                        name: name.to_string(),
                        reference: as_str(required(o, &p, "ref")?, &child(&p, "ref"))?
                            .to_string(),
                    });
                }
                Some(out)
            }
        };

        let conditional_formats = match obj.get("conditionalFormats") {
            None => None,
            Some(v) => {
                let cpath = child(path, "conditionalFormats");
                let arr = as_array(v, &cpath)?;
                let mut out = Vec::with_capacity(arr.len());
                for (i, r) in arr.iter().enumerate() {
                    out.push(self.conditional_format(r, &child(&cpath, i))?);
                }
                Some(out)
            }
        };

        Ok(Sheet {
            name: name.to_string(),
            cells,
            named_ranges,
            conditional_formats,
        })
    }

    fn cell(&mut self, v: &Value, path: &str) -> Result<Cell> {
        let obj = as_object(v, path)?;
        check_keys(obj, path, &["ref", "text", "number", "formula", "style"])?;
        let ref_path = child(path, "ref");
        let raw = as_str(required(obj, path, "ref")?, &ref_path)?;
        let addr = parse_cell_token(raw)
            .map_err(|e| violation(&ref_path, e.to_string()))?
            .addr;

        let payloads: Vec<&str> = ["text", "number", "formula"]
            .into_iter()
            .filter(|k| obj.contains_key(*k))
            .collect();
        let content = match payloads.as_slice() {
            ["text"] => CellContent::Text(as_str(&obj["text"], &child(path, "text"))?.to_string()),
            ["number"] => {
                CellContent::Number(as_f64(&obj["number"], &child(path, "number"))?)
            }
            ["formula"] => {
                let fpath = child(path, "formula");
                let src = as_str(&obj["formula"], &fpath)?;
                match src.trim_start().strip_prefix('=') {
                    Some(body) if !body.trim().is_empty() => {
                        CellContent::Formula(src.trim().to_string())
                    }
                    Some(_) => return Err(violation(&fpath, "formula is empty after `=`")),
                    None => return Err(violation(&fpath, "formula must begin with `=`")),
                }
            }
            [] => {
                return Err(violation(
                    path,
                    "cell needs exactly one of `text`, `number`, `formula`",
                ))
            }
            _ => {
                return Err(violation(
                    path,
                    format!("cell carries several payloads: {}", payloads.join(", ")),
                ))
            }
        };

        let style = match obj.get("style") {
            None => None,
            Some(s) => self.style(s, &child(path, "style"))?,
        };
        Ok(Cell {
            addr,
            content,
            style,
        })
    }

    fn color(&mut self, v: &Value, path: &str) -> Result<Option<Color>> {
        let s = as_str(v, path)?;
        match Color::parse(s) {
            Some(c) => Ok(Some(c)),
            None => {
                self.warnings.push(Issue::warning(
                    path,
                    format!("unrecognized color `{s}`; attribute dropped"),
                ));
                Ok(None)
            }
        }
    }

    fn style(&mut self, v: &Value, path: &str) -> Result<Option<CellStyle>> {
        let obj = as_object(v, path)?;
        let mut style = CellStyle::default();
        for (key, val) in obj {
            let p = child(path, key);
            match key.as_str() {
                "fill" => style.fill = self.color(val, &p)?,
                "fontColor" => style.font_color = self.color(val, &p)?,
                "fontWeight" => {
                    style.font_weight = match val {
                        Value::String(s) if s.eq_ignore_ascii_case("bold") => {
                            Some(FontWeight::Bold)
                        }
                        Value::String(s) if s.eq_ignore_ascii_case("normal") => {
                            Some(FontWeight::Normal)
                        }
                        Value::Number(n) => n.as_f64().map(|w| {
                            if w >= 600.0 {
                                FontWeight::Bold
                            } else {
                                FontWeight::Normal
                            }
                        }),
                        other => {
                            return Err(violation(
                                &p,
                                format!("expected `normal` or `bold`, found {other}"),
                            ))
                        }
                    }
                }
                "fontSize" => {
                    let size = as_f64(val, &p)?;
                    if size > 0.0 {
                        style.font_size = Some(size);
                    } else {
                        self.warnings
                            .push(Issue::warning(&p, "non-positive font size; attribute dropped"));
                    }
                }
                "numberFormat" => style.number_format = Some(as_str(val, &p)?.to_string()),
                "border" => style.border = self.border(val, &p)?,
                _ => self
                    .warnings
                    .push(Issue::warning(&p, "unknown style property ignored")),
            }
        }
        Ok((!style.is_empty()).then_some(style))
    }

    fn border(&mut self, v: &Value, path: &str) -> Result<Option<Border>> {
        let plain = |style: &str| Border {
            style: style.to_string(),
            color: None,
            sides: None,
        };
        match v {
            Value::Bool(false) | Value::Null => Ok(None),
            Value::Bool(true) => Ok(Some(plain("thin"))),
            Value::String(s) if s.eq_ignore_ascii_case("none") || s.is_empty() => Ok(None),
            Value::String(s) => Ok(Some(plain(&s.to_ascii_lowercase()))),
            Value::Object(obj) => {
                let mut border = plain("thin");
                let mut sides = Vec::new();
                for (key, val) in obj {
                    let p = child(path, key);
                    let side = match key.as_str() {
                        "top" => Some(BorderSide::Top),
                        "right" => Some(BorderSide::Right),
                        "bottom" => Some(BorderSide::Bottom),
                        "left" => Some(BorderSide::Left),
                        _ => None,
                    };
                    match (key.as_str(), side) {
                        (_, Some(side)) => {
                            if let Some(b) = self.border(val, &p)? {
                                sides.push(side);
                                border.style = b.style;
                                border.color = b.color.or(border.color);
                            }
                        }
                        ("style", _) => border.style = as_str(val, &p)?.to_ascii_lowercase(),
                        ("color", _) => border.color = self.color(val, &p)?,
                        ("sides", _) => {
                            for (i, s) in as_array(val, &p)?.iter().enumerate() {
                                let sp = child(&p, i);
                                sides.push(match as_str(s, &sp)? {
                                    "top" => BorderSide::Top,
                                    "right" => BorderSide::Right,
                                    "bottom" => BorderSide::Bottom,
                                    "left" => BorderSide::Left,
                                    other => {
                                        return Err(violation(
                                            &sp,
                                            format!("unknown border side `{other}`"),
                                        ))
                                    }
                                });
                            }
                        }
                        _ => self
                            .warnings
                            .push(Issue::warning(&p, "unknown border property ignored")),
                    }
                }
                let has_side_keys = obj
                    .keys()
                    .any(|k| matches!(k.as_str(), "top" | "right" | "bottom" | "left"));
                if has_side_keys && sides.is_empty() {
                    return Ok(None);
                }
                if !sides.is_empty() {
                    sides.sort();
                    sides.dedup();
                    border.sides = Some(sides);
                }
                if border.style == "none" {
                    return Ok(None);
                }
                Ok(Some(border))
            }
            other => Err(violation(
                path,
                format!("expected border descriptor, found {}", json_type(other)),
            )),
        }
    }

    fn conditional_format(&mut self, v: &Value, path: &str) -> Result<ConditionalFormatRule> {
        let obj = as_object(v, path)?;
        let kind = as_str(required(obj, path, "type")?, &child(path, "type"))?;
        let range = as_str(required(obj, path, "range")?, &child(path, "range"))?.to_string();
        let style = |this: &mut Self| -> Result<Option<CellStyle>> {
            match obj.get("style") {
                None => Ok(None),
                Some(s) => this.style(s, &child(path, "style")),
            }
        };
        let rule = match kind {
            "cellIs" => {
                check_keys(obj, path, &["type", "range", "operator", "value", "style"])?;
                let op_path = child(path, "operator");
                let op = as_str(required(obj, path, "operator")?, &op_path)?;
                let operator = CompareOperator::ALL
                    .iter()
                    .find(|(name, _)| *name == op)
                    .map(|(_, o)| *o)
                    .ok_or_else(|| violation(&op_path, format!("unknown operator `{op}`")))?;
                ConditionalFormatRule::CellIs {
                    range,
                    operator,
                    value: operand(required(obj, path, "value")?, &child(path, "value"))?,
                    style: style(self)?,
                }
            }
            "cellIsBetween" => {
                check_keys(obj, path, &["type", "range", "min", "max", "style"])?;
                ConditionalFormatRule::CellIsBetween {
                    range,
                    min: operand(required(obj, path, "min")?, &child(path, "min"))?,
                    max: operand(required(obj, path, "max")?, &child(path, "max"))?,
                    style: style(self)?,
                }
            }
            "expression" => {
                check_keys(obj, path, &["type", "range", "formula", "style"])?;
                ConditionalFormatRule::Expression {
                    range,
                    formula: as_str(required(obj, path, "formula")?, &child(path, "formula"))?
                        .to_string(),
                    style: style(self)?,
                }
            }
            "containsText" => {
                check_keys(obj, path, &["type", "range", "text", "style"])?;
                ConditionalFormatRule::ContainsText {
                    range,
                    text: as_str(required(obj, path, "text")?, &child(path, "text"))?.to_string(),
                    style: style(self)?,
                }
            }
            "colorScale" => {
                check_keys(obj, path, &["type", "range", "min", "mid", "max"])?;
                ConditionalFormatRule::ColorScale {
                    range,
                    min: self.scale_stop(required(obj, path, "min")?, &child(path, "min"))?,
                    mid: obj
                        .get("mid")
                        .map(|m| self.scale_stop(m, &child(path, "mid")))
                        .transpose()?,
                    max: self.scale_stop(required(obj, path, "max")?, &child(path, "max"))?,
                }
            }
            "dataBar" => {
                check_keys(obj, path, &["type", "range", "color", "min", "max"])?;
                let cpath = child(path, "color");
                let color = self
                    .color(required(obj, path, "color")?, &cpath)?
                    .ok_or_else(|| violation(&cpath, "data bar needs a valid color"))?;
                ConditionalFormatRule::DataBar {
                    range,
                    color,
                    min: obj
                        .get("min")
                        .map(|m| anchor(m, &child(path, "min")))
                        .transpose()?,
                    max: obj
                        .get("max")
                        .map(|m| anchor(m, &child(path, "max")))
                        .transpose()?,
                }
            }
            other => {
                return Err(violation(
                    &child(path, "type"),
                    format!("unknown conditional format type `{other}`"),
                ))
            }
        };
        Ok(rule)
    }

    fn scale_stop(&mut self, v: &Value, path: &str) -> Result<ScaleStop> {
        let obj = as_object(v, path)?;
        check_keys(obj, path, &["type", "value", "color"])?;
        let cpath = child(path, "color");
        let color = self
            .color(required(obj, path, "color")?, &cpath)?
            .ok_or_else(|| violation(&cpath, "scale stop needs a valid color"))?;
        Ok(ScaleStop {
            anchor: anchor_fields(obj, path)?,
            color,
        })
    }
}

fn operand(v: &Value, path: &str) -> Result<RuleOperand> {
    match v {
        Value::Number(n) => Ok(RuleOperand::Number(n.as_f64().unwrap_or(0.0))),
        Value::String(s) => Ok(RuleOperand::Text(s.clone())),
        other => Err(violation(
            path,
            format!("expected number or string, found {}", json_type(other)),
        )),
    }
}

fn anchor(v: &Value, path: &str) -> Result<ScaleAnchor> {
    let obj = as_object(v, path)?;
    check_keys(obj, path, &["type", "value"])?;
    anchor_fields(obj, path)
}

fn anchor_fields(obj: &Map<String, Value>, path: &str) -> Result<ScaleAnchor> {
    let tpath = child(path, "type");
    let kind = match as_str(required(obj, path, "type")?, &tpath)? {
        "min" => AnchorKind::Min,
        "max" => AnchorKind::Max,
        "number" => AnchorKind::Number,
        "percentile" => AnchorKind::Percentile,
        other => return Err(violation(&tpath, format!("unknown anchor type `{other}`"))),
    };
    let value = obj
        .get("value")
        .map(|v| as_f64(v, &child(path, "value")))
        .transpose()?;
    match (kind, value) {
        (AnchorKind::Number | AnchorKind::Percentile, None) => {
            Err(violation(path, "anchor needs a `value`"))
        }
        (AnchorKind::Percentile, Some(p)) if !(0.0..=100.0).contains(&p) => Err(violation(
            &child(path, "value"),
            "percentile must lie in [0, 100]",
        )),
        _ => Ok(ScaleAnchor { kind, value }),
    }
}

fn output_ref(v: &Value, path: &str) -> Result<OutputRef> {
    let obj = as_object(v, path)?;
    check_keys(obj, path, &["name", "sheet", "ref", "metric"])?;
    let mpath = child(path, "metric");
    let metric = match as_str(required(obj, path, "metric")?, &mpath)? {
        "value" => OutputMetric::Value,
        "values" => OutputMetric::Values,
        other => return Err(violation(&mpath, format!("unknown metric `{other}`"))),
    };
    Ok(OutputRef {
        name: as_str(required(obj, path, "name")?, &child(path, "name"))?.to_string(),
        sheet: as_str(required(obj, path, "sheet")?, &child(path, "sheet"))?.to_string(),
        reference: as_str(required(obj, path, "ref")?, &child(path, "ref"))?.to_string(),
        metric,
    })
}

fn rules(v: &Value, path: &str) -> Result<Rules> {
    let obj = as_object(v, path)?;
    check_keys(obj, path, &["disallowVolatile", "allowedFunctions"])?;
    let disallow_volatile = obj
        .get("disallowVolatile")
        .map(|v| {
            v.as_bool().ok_or_else(|| {
                violation(&child(path, "disallowVolatile"), "expected boolean")
            })
        })
        .transpose()?;
    let allowed_functions = match obj.get("allowedFunctions") {
        None => None,
        Some(v) => {
            let apath = child(path, "allowedFunctions");
            let arr = as_array(v, &apath)?;
            let mut out = Vec::with_capacity(arr.len());
            for (i, f) in arr.iter().enumerate() {
                out.push(as_str(f, &child(&apath, i))?.to_ascii_uppercase());
            }
            Some(out)
        }
    };
    Ok(Rules {
        disallow_volatile,
        allowed_functions,
    })
}
