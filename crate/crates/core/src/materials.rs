//! Material constants and derived figures of merit.
//!
//! The shipped database lives in `data/materials.toml`; any other file with
//! the same layout can be loaded with [`MaterialDb::from_path`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::Deserialize;
use toml::Spanned;

use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("../data/materials.toml");

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialProps {
    pub name: String,
    /// kg/m³
    pub density: f64,
    /// In-plane Young's modulus, Pa.
    pub youngs_modulus: f64,
    /// Thickness-mode stiffness, Pa.
    pub c33: f64,
    /// Transverse piezoelectric stress constant, C/m².
    pub e31: f64,
    /// Longitudinal piezoelectric stress constant, C/m².
    pub e33: f64,
    /// Clamped permittivity, F/m.
    pub eps33: f64,
    pub is_piezoelectric: bool,
}

/// One broken invariant of a [`MaterialProps`] record.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Transverse coupling k31² = e31² / (E·ε33); zero for non-piezoelectric materials.
pub fn coupling_coefficient(m: &MaterialProps) -> f64 {
    if !m.is_piezoelectric {
        return 0.0;
    }
    m.e31 * m.e31 / (m.youngs_modulus * m.eps33)
}

/// Lists every violated invariant; empty when the record is valid.
pub fn validate_material(m: &MaterialProps) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut positive = |field: &'static str, v: f64| {
        if !(v > 0.0 && v.is_finite()) {
            out.push(Violation {
                field,
                message: format!("must be positive and finite, got {v}"),
            });
        }
    };
    positive("density", m.density);
    positive("youngs_modulus", m.youngs_modulus);
    positive("c33", m.c33);
    positive("eps33", m.eps33);

    if !m.is_piezoelectric {
        if m.e31 != 0.0 {
            out.push(Violation {
                field: "e31",
                message: "must be 0 for a non-piezoelectric material".into(),
            });
        }
        if m.e33 != 0.0 {
            out.push(Violation {
                field: "e33",
                message: "must be 0 for a non-piezoelectric material".into(),
            });
        }
    } else if m.youngs_modulus > 0.0 && m.eps33 > 0.0 {
        let k2 = coupling_coefficient(m);
        if !(0.0..1.0).contains(&k2) {
            out.push(Violation {
                field: "e31",
                message: format!("coupling k31^2 = {k2} outside [0, 1)"),
            });
        }
    }
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    name: Spanned<String>,
    density: Spanned<f64>,
    youngs_modulus: Spanned<f64>,
    c33: Spanned<f64>,
    e31: Spanned<f64>,
    e33: Spanned<f64>,
    eps33: Spanned<f64>,
    is_piezoelectric: Spanned<bool>,
}

/// Immutable, validated set of materials keyed by lowercase name.
#[derive(Debug, Clone)]
pub struct MaterialDb {
    entries: BTreeMap<String, MaterialProps>,
}

impl MaterialDb {
    /// The database shipped with the crate.
    pub fn builtin() -> &'static MaterialDb {
        static DB: OnceLock<MaterialDb> = OnceLock::new();
        DB.get_or_init(|| {
            MaterialDb::from_toml_str(BUILTIN).expect("shipped materials file is valid")
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, RawMaterial> = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
            Error::MaterialFile {
                line,
                field: field_from_message(e.message()),
                message: e.message().trim().to_string(),
            }
        })?;

        let mut entries = BTreeMap::new();
        for (key, r) in raw {
            let props = MaterialProps {
                name: r.name.get_ref().clone(),
                density: *r.density.get_ref(),
                youngs_modulus: *r.youngs_modulus.get_ref(),
                c33: *r.c33.get_ref(),
                e31: *r.e31.get_ref(),
                e33: *r.e33.get_ref(),
                eps33: *r.eps33.get_ref(),
                is_piezoelectric: *r.is_piezoelectric.get_ref(),
            };
            if key != props.name.to_lowercase() {
                return Err(Error::MaterialFile {
                    line: line_of(text, r.name.span().start),
                    field: "name".into(),
                    message: format!(
                        "table key '{key}' must be the lowercase of name '{}'",
                        props.name
                    ),
                });
            }
            if let Some(v) = validate_material(&props).into_iter().next() {
                let span = match v.field {
                    "density" => r.density.span(),
                    "youngs_modulus" => r.youngs_modulus.span(),
                    "c33" => r.c33.span(),
                    "e31" => r.e31.span(),
                    "e33" => r.e33.span(),
                    "eps33" => r.eps33.span(),
                    _ => r.is_piezoelectric.span(),
                };
                return Err(Error::MaterialFile {
                    line: line_of(text, span.start),
                    field: v.field.into(),
                    message: format!("[{key}] {}", v.message),
                });
            }
            entries.insert(key, props);
        }
        Ok(Self { entries })
    }

    /// Case-insensitive lookup.
    pub fn get(&self, name: &str) -> Result<&MaterialProps> {
        self.entries
            .get(&name.to_lowercase())
            .ok_or_else(|| Error::UnknownMaterial {
                name: name.to_string(),
                available: self.names().map(str::to_string).collect(),
            })
    }

    /// Lowercase keys in sorted order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &MaterialProps> {
        self.entries.values()
    }
}

/// Looks a material up in the shipped database.
pub fn get_material(name: &str) -> Result<MaterialProps> {
    MaterialDb::builtin().get(name).cloned()
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn field_from_message(msg: &str) -> String {
    msg.split('`').nth(1).unwrap_or("-").to_string()
}
