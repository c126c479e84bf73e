use std::fs;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::ModeField;
use super::lattice::ModeLattice;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub alpha: Vec<i32>,
    pub re: f64,
    pub im: f64,
}

/// On-disk snapshot layout `{n, L, l, components: [[{alpha, re, im}…]…]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FieldFile {
    pub n: usize,
    #[serde(rename = "L")]
    pub truncation: usize,
    pub l: f64,
    pub components: Vec<Vec<ModeEntry>>,
}

impl FieldFile {
    /// Every retained mode, in lattice order.
    pub fn from_field(field: &ModeField) -> Self {
        let lat = field.lattice();
        let components = (0..field.dim())
            .map(|i| {
                lat.iter()
                    .map(|(k, alpha)| {
                        let v = field.get(i, k);
                        ModeEntry {
                            alpha: alpha.to_vec(),
                            re: v.re,
                            im: v.im,
                        }
                    })
                    .collect()
            })
            .collect();
        FieldFile {
            n: lat.dim(),
            truncation: lat.truncation(),
            l: lat.torus_size(),
            components,
        }
    }

    /// Modes missing from the file are zero; duplicates and out-of-box modes
    /// are rejected.
    pub fn to_field(&self) -> Result<ModeField> {
        if self.components.len() != self.n {
            return Err(Error::Format(format!(
                "expected {} components, found {}",
                self.n,
                self.components.len()
            )));
        }
        let lat = Arc::new(ModeLattice::new(self.n, self.truncation, self.l)?);
        let mut field = ModeField::zeros(lat.clone());
        for (i, entries) in self.components.iter().enumerate() {
            let mut seen = vec![false; lat.len()];
            for e in entries {
                let k = lat.index_of(&e.alpha).ok_or_else(|| {
                    Error::Format(format!("mode {:?} outside lattice n={} L={}", e.alpha, self.n, self.truncation))
                })?;
                if seen[k] {
                    return Err(Error::Format(format!("duplicate mode {:?} in component {i}", e.alpha)));
                }
                seen[k] = true;
                field.set(i, k, Complex64::new(e.re, e.im));
            }
        }
        field.ensure_finite()?;
        let real = field.is_real();
        field.set_real_flag(real);
        Ok(field)
    }
}

pub fn field_to_json(field: &ModeField) -> Result<String> {
    Ok(serde_json::to_string(&FieldFile::from_field(field))?)
}

pub fn field_from_json(text: &str) -> Result<ModeField> {
    let file: FieldFile = serde_json::from_str(text)?;
    file.to_field()
}

pub fn write_field(path: &Path, field: &ModeField) -> Result<()> {
    fs::write(path, field_to_json(field)?)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<ModeField> {
    field_from_json(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_bit_exact() {
        let lat = Arc::new(ModeLattice::new(2, 2, 1.5).unwrap());
        let mut f = ModeField::zeros(lat.clone());
        f.set(0, 3, Complex64::new(0.1 + 0.2, -1.0 / 3.0));
        f.set(1, 7, Complex64::new(std::f64::consts::PI, 1e-300));
        let text = field_to_json(&f).unwrap();
        assert!(text.contains("\"L\":2"));
        let g = field_from_json(&text).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn rejects_malformed() {
        let bad = r#"{"n":1,"L":1,"l":1.0,"components":[[{"alpha":[2],"re":1.0,"im":0.0}]]}"#;
        assert!(matches!(field_from_json(bad), Err(Error::Format(_))));
        let extra = r#"{"n":1,"L":1,"l":1.0,"components":[[]],"x":1}"#;
        assert!(field_from_json(extra).is_err());
        let sparse = r#"{"n":1,"L":1,"l":1.0,"components":[[{"alpha":[1],"re":0.5,"im":0.0},{"alpha":[-1],"re":0.5,"im":0.0}]]}"#;
        let f = field_from_json(sparse).unwrap();
        assert!(f.real_flag());
    }
}
