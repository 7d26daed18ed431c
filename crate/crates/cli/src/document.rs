//! The JSON assessment document.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use impbounds::{Assessment, Gamble, Partition};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssessmentDocument {
    pub atoms: Vec<String>,
    pub gambles: IndexMap<String, Vec<f64>>,
    #[serde(default)]
    pub lower: IndexMap<String, f64>,
    #[serde(default)]
    pub upper: IndexMap<String, f64>,
}

pub fn parse_document(text: &[u8]) -> Result<AssessmentDocument, CliError> {
    let text = std::str::from_utf8(text).map_err(|e| CliError::Parse {
        line: 0,
        column: 0,
        message: format!("not UTF-8: {e}"),
    })?;
    let doc: AssessmentDocument = serde_json::from_str(text).map_err(CliError::from_json)?;
    doc.validate()?;
    Ok(doc)
}

impl AssessmentDocument {
    fn validate(&self) -> Result<(), CliError> {
        Partition::new(self.atoms.iter()).map_err(|e| CliError::Schema(format!("atoms: {e}")))?;
        for (name, values) in &self.gambles {
            if values.len() != self.atoms.len() {
                return Err(CliError::Dimension {
                    gamble: name.clone(),
                    expected: self.atoms.len(),
                    got: values.len(),
                });
            }
        }
        for (field, map) in [("lower", &self.lower), ("upper", &self.upper)] {
            if let Some(k) = map.keys().find(|k| !self.gambles.contains_key(*k)) {
                return Err(CliError::Schema(format!("{field}: \"{k}\" is not a declared gamble")));
            }
        }
        Ok(())
    }

    pub fn partition(&self) -> Partition {
        Partition::new(self.atoms.iter()).expect("validated")
    }

    pub fn gamble(&self, name: &str) -> Result<Gamble, CliError> {
        let values = self
            .gambles
            .get(name)
            .ok_or_else(|| CliError::UnknownIdentifier(name.to_string()))?;
        Ok(Gamble::new(&self.partition(), values.clone())?)
    }

    /// Lower values as entries, upper values as conjugate entries named
    /// `-NAME`, and every gamble without either as a vacuous entry.
    pub fn to_assessment(&self) -> Result<Assessment, CliError> {
        let p = self.partition();
        let mut a = Assessment::new(&p);
        for (name, values) in &self.gambles {
            let g = Gamble::new(&p, values.clone())?;
            let lower = self.lower.get(name);
            let upper = self.upper.get(name);
            if let Some(&l) = lower {
                a.push_lower(name.clone(), g.clone(), l)?;
            }
            if let Some(&u) = upper {
                a.push_upper(name, g.clone(), u)?;
            }
            if lower.is_none() && upper.is_none() {
                a = a.with_gamble(name.clone(), g)?;
            }
        }
        Ok(a)
    }
}
