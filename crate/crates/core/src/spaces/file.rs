//! JSON vector files:
//!
//! ```json
//! {"space": "max-strict-reals", "n": 4, "atoms": ["a", "b"],
//!  "vectors": [{"name": "kb", "coords": ["1", "-1", "-1", "-1"]}]}
//! ```
//!
//! `atoms` is optional; when present the properties are the worlds over those
//! atoms, otherwise there is one property per coordinate.

use serde::{Deserialize, Serialize};

use super::{SpaceConfig, SpaceError, Vector};
use crate::epistemic::PropertySpace;
use crate::logic::AtomTable;
use crate::numeric::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedVector {
    pub name: String,
    pub coords: Vec<Rational>,
}

impl NamedVector {
    pub fn new(name: impl Into<String>, v: Vector) -> Self {
        NamedVector {
            name: name.into(),
            coords: v.0,
        }
    }

    pub fn vector(&self) -> Vector {
        Vector(self.coords.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorFile {
    pub space: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<String>>,
    pub vectors: Vec<NamedVector>,
}

impl VectorFile {
    pub fn new(config: &SpaceConfig, vectors: Vec<NamedVector>) -> Self {
        VectorFile {
            space: config.name.clone(),
            n: config.n(),
            atoms: config.properties.atoms().map(|a| a.names().to_vec()),
            vectors,
        }
    }

    /// Parses and checks that every vector has dimension `n`.
    pub fn from_json(text: &str) -> Result<Self, SpaceError> {
        let file: VectorFile =
            serde_json::from_str(text).map_err(|e| SpaceError::File(e.to_string()))?;
        for v in &file.vectors {
            if v.coords.len() != file.n {
                return Err(SpaceError::File(format!(
                    "vector `{}` has {} coordinates, expected {}",
                    v.name,
                    v.coords.len(),
                    file.n
                )));
            }
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("vector files always serialize");
        s.push('\n');
        s
    }

    /// Property space described by the file, with `atoms` overriding the
    /// file's own atom list.
    pub fn properties(&self, atoms: Option<&AtomTable>) -> Result<PropertySpace, SpaceError> {
        let table = match (atoms, &self.atoms) {
            (Some(t), _) => Some(t.clone()),
            (None, Some(names)) => Some(
                AtomTable::new(names.iter().cloned())
                    .map_err(|e| SpaceError::File(e.to_string()))?,
            ),
            (None, None) => None,
        };
        match table {
            Some(t) => Ok(PropertySpace::logical(t)?),
            None => Ok(PropertySpace::indexed(self.n)),
        }
    }

    /// The file's space, sized to the file's dimension, after checking that
    /// every vector lies in `X`.
    pub fn config(&self, atoms: Option<&AtomTable>) -> Result<SpaceConfig, SpaceError> {
        let config = SpaceConfig::named(&self.space, self.properties(atoms)?)?.with_dimension(self.n);
        for v in &self.vectors {
            config.check(&v.vector())?;
        }
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let c = SpaceConfig::named("max-strict-reals", PropertySpace::indexed(2)).unwrap();
        let f = VectorFile::new(&c, vec![NamedVector::new("e", Vector::parse("1/2 -1").unwrap())]);
        let text = f.to_json();
        assert!(text.contains("\"1/2\""));
        let back = VectorFile::from_json(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.config(None).unwrap(), c);
    }

    #[test]
    fn rejects_bad_files() {
        let wrong_dim = r#"{"space":"max-strict-reals","n":2,"vectors":[{"name":"e","coords":["1"]}]}"#;
        assert!(matches!(VectorFile::from_json(wrong_dim), Err(SpaceError::File(_))));
        let bad_coord = r#"{"space":"max-strict-reals","n":1,"vectors":[{"name":"e","coords":["0.5"]}]}"#;
        assert!(VectorFile::from_json(bad_coord).is_err());
        let outside = r#"{"space":"avg-strict-nonneg","n":1,"vectors":[{"name":"e","coords":["-1"]}]}"#;
        let f = VectorFile::from_json(outside).unwrap();
        assert!(matches!(f.config(None), Err(SpaceError::OutsideDomain { .. })));
    }
}
