//! Plain-text scheme registry.

use std::fmt::Write as _;

use super::{validate, ButcherTableau, ImexTableau};
use crate::error::{Error, Result};

pub const BUILTIN_REGISTRY: &str = include_str!("../../registry/schemes.txt");

const FIELDS: [&str; 6] = ["Atilde", "btilde", "ctilde", "A", "b", "c"];

#[derive(Debug, Clone)]
pub struct RegistryEntry {
    pub name: String,
    pub stages: usize,
    /// Line of the `scheme` header.
    pub line: usize,
    /// `None` for an empty slot.
    pub tableau: Option<ImexTableau>,
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    pub entries: Vec<RegistryEntry>,
}

impl Registry {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_REGISTRY).expect("builtin registry is well formed")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for block in split_blocks(text)? {
            entries.push(block.into_entry()?);
        }
        Ok(Self { entries })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    pub fn entry(&self, name: &str) -> Option<&RegistryEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn get(&self, name: &str) -> Result<ImexTableau> {
        let entry = self
            .entry(name)
            .ok_or_else(|| Error::UnknownScheme(name.to_string()))?;
        entry
            .tableau
            .clone()
            .ok_or_else(|| Error::EmptySlot(name.to_string()))
    }
}

/// Parses a single scheme block (the first one in `text`).
pub fn load_tableau(text: &str) -> Result<ImexTableau> {
    let blocks = split_blocks(text)?;
    let block = blocks.into_iter().next().ok_or_else(|| Error::Parse {
        line: 1,
        field: "scheme".into(),
        message: "no scheme header found".into(),
    })?;
    let entry = block.into_entry()?;
    entry.tableau.ok_or(Error::EmptySlot(entry.name))
}

/// Writes the registry form of `t`. Values use the shortest round-trip
/// decimal representation, so parsing the output reproduces every entry.
pub fn serialize(t: &ImexTableau) -> String {
    let s = t.stages();
    let mut out = String::new();
    let _ = writeln!(out, "scheme {} stages {}", t.name, s);
    let matrix = |out: &mut String, key: &str, m: &ButcherTableau| {
        let _ = writeln!(out, "{key}:");
        for i in 0..s {
            let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "  {}", row.join(" "));
        }
    };
    let vector = |out: &mut String, key: &str, v: &[f64]| {
        let vals: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
        let _ = writeln!(out, "{key}: {}", vals.join(" "));
    };
    matrix(&mut out, "Atilde", &t.explicit);
    vector(&mut out, "btilde", &t.explicit.b);
    vector(&mut out, "ctilde", &t.explicit.c);
    matrix(&mut out, "A", &t.implicit);
    vector(&mut out, "b", &t.implicit.b);
    vector(&mut out, "c", &t.implicit.c);
    out
}

struct Token<'a> {
    text: &'a str,
    line: usize,
}

struct Field<'a> {
    line: usize,
    tokens: Vec<Token<'a>>,
}

struct Block<'a> {
    name: String,
    stages: usize,
    line: usize,
    fields: Vec<(&'a str, Field<'a>)>,
}

fn split_blocks(text: &str) -> Result<Vec<Block<'_>>> {
    let mut blocks: Vec<Block<'_>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        if content.starts_with("scheme ") || content == "scheme" {
            words.next();
            let name = words.next().ok_or_else(|| parse_err(line, "scheme", "missing name"))?;
            match (words.next(), words.next(), words.next()) {
                (Some("stages"), Some(s), None) => {
                    let stages: usize = s
                        .parse()
                        .map_err(|_| parse_err(line, "stages", &format!("`{s}` is not a stage count")))?;
                    if stages == 0 {
                        return Err(parse_err(line, "stages", "stage count must be positive"));
                    }
                    blocks.push(Block {
                        name: name.to_string(),
                        stages,
                        line,
                        fields: Vec::new(),
                    });
                }
                _ => return Err(parse_err(line, "scheme", "expected `scheme <name> stages <s>`")),
            }
            continue;
        }
        let block = blocks
            .last_mut()
            .ok_or_else(|| parse_err(line, "scheme", "content before the first scheme header"))?;
        let (head, rest) = match content.split_once(':') {
            Some((k, r)) if FIELDS.contains(&k.trim()) => (Some(k.trim()), r),
            Some((k, _)) => return Err(parse_err(line, k.trim(), "unknown field")),
            None => (None, content),
        };
        if let Some(key) = head {
            if block.fields.iter().any(|(k, _)| *k == key) {
                return Err(parse_err(line, key, "field given twice"));
            }
            block.fields.push((key, Field { line, tokens: Vec::new() }));
        }
        let (key, field) = block
            .fields
            .last_mut()
            .ok_or_else(|| parse_err(line, "Atilde", "values before any field name"))?;
        let _ = key;
        field
            .tokens
            .extend(rest.split_whitespace().map(|text| Token { text, line }));
    }
    Ok(blocks)
}

fn parse_err(line: usize, field: &str, message: &str) -> Error {
    Error::Parse {
        line,
        field: field.to_string(),
        message: message.to_string(),
    }
}

fn parse_literal(tok: &Token<'_>, field: &str) -> Result<f64> {
    let bad = || parse_err(tok.line, field, &format!("`{}` is not a number", tok.text));
    let value = match tok.text.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.parse().map_err(|_| bad())?;
            let q: f64 = q.parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(parse_err(tok.line, field, "zero denominator"));
            }
            p / q
        }
        None => tok.text.parse().map_err(|_| bad())?,
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}

impl<'a> Block<'a> {
    fn field_values(&self, key: &str, expected: usize) -> Result<Vec<f64>> {
        let (_, field) = self
            .fields
            .iter()
            .find(|(k, _)| *k == key)
            .ok_or_else(|| parse_err(self.line, key, &format!("scheme `{}` is missing field `{key}`", self.name)))?;
        if field.tokens.len() != expected {
            return Err(parse_err(
                field.line,
                key,
                &format!("expected {expected} values, found {}", field.tokens.len()),
            ));
        }
        field.tokens.iter().map(|t| parse_literal(t, key)).collect()
    }

    fn into_entry(self) -> Result<RegistryEntry> {
        if self.fields.is_empty() {
            return Ok(RegistryEntry {
                name: self.name,
                stages: self.stages,
                line: self.line,
                tableau: None,
            });
        }
        let s = self.stages;
        let half = |ka: &str, kb: &str, kc: &str| -> Result<ButcherTableau> {
            let a = self.field_values(ka, s * s)?;
            let b = self.field_values(kb, s)?;
            let c = self.field_values(kc, s)?;
            Ok(ButcherTableau { a, b, c, stages: s })
        };
        let explicit = half("Atilde", "btilde", "ctilde")?;
        let implicit = half("A", "b", "c")?;
        let tableau = ImexTableau::new(self.name.clone(), explicit, implicit);
        let report = validate(&tableau)?;
        if !report.is_valid() {
            return Err(Error::Validation {
                name: self.name,
                line: self.line,
                violations: report.violations,
            });
        }
        Ok(RegistryEntry {
            name: self.name,
            stages: s,
            line: self.line,
            tableau: Some(tableau),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::{check_order_conditions, is_globally_stiffly_accurate};

    #[test]
    fn builtin_entries() {
        let reg = Registry::builtin();
        let euler = reg.get("imex-euler").unwrap();
        assert_eq!(euler.stages(), 1);
        assert_eq!(euler.implicit.a, vec![1.0]);
        assert_eq!(euler.explicit.a, vec![0.0]);
        for slot in ["ars-343", "mod-ars-343", "bhr-553"] {
            assert!(matches!(reg.get(slot), Err(Error::EmptySlot(_))));
        }
        assert!(matches!(reg.get("nope"), Err(Error::UnknownScheme(_))));
    }

    #[test]
    fn shipped_second_order_pair() {
        let t = Registry::builtin().get("imex-midpoint-trapezoid").unwrap();
        let r = check_order_conditions(&t, 3);
        assert_eq!(r.satisfied_order, 2);
        assert!(is_globally_stiffly_accurate(&t));
        let ssp = Registry::builtin().get("ssp2-332").unwrap();
        let r = check_order_conditions(&ssp, 3);
        assert_eq!(r.satisfied_order, 2);
        assert!(r.stiffly_accurate && !r.globally_stiffly_accurate);
    }

    #[test]
    fn missing_btilde_names_the_field() {
        let text = "scheme broken stages 1\nAtilde:\n0\nctilde: 0\nA:\n1\nb: 1\nc: 1\n";
        match load_tableau(text) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "btilde"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_value_count_reports_line() {
        let text = "scheme broken stages 2\nAtilde:\n0 0\n1\nbtilde: 1 0\nctilde: 0 1\nA:\n0 0\n0 1\nb: 0 1\nc: 0 1\n";
        match load_tableau(text) {
            Err(Error::Parse { field, line, .. }) => {
                assert_eq!(field, "Atilde");
                assert_eq!(line, 2);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn validation_failures_surface() {
        let text = "scheme bad stages 1\nAtilde: 0\nbtilde: 1\nctilde: 0\nA: 1\nb: 1\nc: 0.5\n";
        match load_tableau(text) {
            Err(Error::Validation { name, violations, .. }) => {
                assert_eq!(name, "bad");
                assert_eq!(violations.len(), 1);
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn transcribed_third_order_entry() {
        // SSP(3,3,3)-type explicit part with a two-stage SDIRK-based implicit
        // part; both c vectors coincide so the coupling set is the standard one.
        let g = 0.5 + 3f64.sqrt() / 6.0;
        let text = format!(
            "scheme third stages 3\n\
             Atilde:\n0 0 0\n{g:?} 0 0\n{a31:?} {a32:?} 0\n\
             btilde: 0 0.5 0.5\nctilde: 0 {g:?} {c3:?}\n\
             A:\n0 0 0\n0 {g:?} 0\n0 {i32:?} {g:?}\n\
             b: 0 0.5 0.5\nc: 0 {g:?} {c3:?}\n",
            a31 = g - 1.0,
            a32 = 2.0 * (1.0 - g),
            c3 = 1.0 - g,
            i32 = 1.0 - 2.0 * g,
        );
        let t = load_tableau(&text).unwrap();
        let report = check_order_conditions(&t, 3);
        assert_eq!(report.satisfied_order, 3, "{:?}", report.failed_conditions);
    }

    #[test]
    fn rational_and_decimal_literals() {
        let tok = Token { text: "-3/4", line: 1 };
        assert_eq!(parse_literal(&tok, "b").unwrap(), -0.75);
        let tok = Token { text: "2.5e-1", line: 1 };
        assert_eq!(parse_literal(&tok, "b").unwrap(), 0.25);
        let tok = Token { text: "1/0", line: 1 };
        assert!(parse_literal(&tok, "b").is_err());
    }
}
