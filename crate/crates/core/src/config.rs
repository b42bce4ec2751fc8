//! On-disk formats: IFS configs (TOML or JSON), cylinder-function files
//! (JSON), and cell lists (one word per line). Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::choquet::CylinderFunction;
use crate::error::{FmlError, Result};
use crate::ifs::{IteratedFunctionSystem, SimilarityMap};
use crate::word::{CellSet, Word};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IfsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub ratios: Vec<f64>,
    pub probabilities: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translations: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotations: Option<Vec<Vec<Vec<f64>>>>,
    /// Declared strong separation; defaults to true.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ssc: Option<bool>,
}

impl IfsConfig {
    pub fn parse_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| FmlError::Config(e.to_string()))
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| FmlError::Config(e.to_string()))
    }

    /// Reads a config, choosing the parser from the extension (`.json` or
    /// anything else as TOML).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Self::parse_json(&text),
            _ => Self::parse_toml(&text),
        }
    }

    pub fn build(&self) -> Result<IteratedFunctionSystem> {
        let m = self.ratios.len();
        let translations = match &self.translations {
            Some(t) if t.len() != m => {
                return Err(FmlError::Config(format!(
                    "{} translations for {m} ratios",
                    t.len()
                )))
            }
            Some(t) => t.clone(),
            None => vec![Vec::new(); m],
        };
        let rotations: Vec<Option<Vec<Vec<f64>>>> = match &self.rotations {
            Some(r) if r.len() != m => {
                return Err(FmlError::Config(format!(
                    "{} rotations for {m} ratios",
                    r.len()
                )))
            }
            Some(r) => r.iter().cloned().map(Some).collect(),
            None => vec![None; m],
        };
        let maps = self
            .ratios
            .iter()
            .zip(translations)
            .zip(rotations)
            .map(|((&r, t), rot)| SimilarityMap::new(r, t, rot))
            .collect::<Result<Vec<_>>>()?;
        IteratedFunctionSystem::new(
            self.name.clone().unwrap_or_else(|| "unnamed".to_string()),
            maps,
            self.probabilities.clone(),
            self.ssc.unwrap_or(true),
        )
    }
}

pub fn load_ifs(path: impl AsRef<Path>) -> Result<IteratedFunctionSystem> {
    IfsConfig::load(path)?.build()
}

/// `{ "depth": n, "values": { "word": v, ... } }`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFile {
    pub depth: usize,
    pub values: BTreeMap<String, f64>,
}

impl FunctionFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| FmlError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn to_function(&self, arity: usize) -> Result<CylinderFunction> {
        let values = self
            .values
            .iter()
            .map(|(k, &v)| Ok((Word::parse(k, arity)?, v)))
            .collect::<Result<Vec<_>>>()?;
        CylinderFunction::new(arity, self.depth, values)
    }

    pub fn from_function(f: &CylinderFunction) -> Self {
        FunctionFile {
            depth: f.depth(),
            values: f.iter().map(|(w, v)| (w.to_string(), v)).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("function file serializes")
    }
}

/// Parses a cell list: one word per line, blank lines and `#` comments
/// skipped, `-` for the root.
pub fn parse_cell_words(text: &str, arity: usize) -> Result<Vec<Word>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| Word::parse(l, arity))
        .collect()
}

pub fn load_cells(path: impl AsRef<Path>, arity: usize) -> Result<CellSet> {
    let words = parse_cell_words(&fs::read_to_string(path)?, arity)?;
    Ok(CellSet::disjointify(words))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CANTOR: &str = r#"
name = "cantor3"
ratios = [0.3333333333333333, 0.3333333333333333]
probabilities = [0.5, 0.5]
translations = [[0.0], [0.6666666666666666]]
"#;

    #[test]
    fn toml_config_builds() {
        let ifs = IfsConfig::parse_toml(CANTOR).unwrap().build().unwrap();
        assert_eq!(ifs.name(), "cantor3");
        assert_eq!(ifs.ambient_dimension(), 1);
        assert!((ifs.dimension() - 2f64.ln() / 3f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn json_config_builds() {
        let json = r#"{"ratios": [0.25, 0.25], "probabilities": [0.5, 0.5]}"#;
        let ifs = IfsConfig::parse_json(json).unwrap().build().unwrap();
        assert!((ifs.dimension() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{CANTOR}\ncolour = \"red\"\n");
        assert!(matches!(
            IfsConfig::parse_toml(&text),
            Err(FmlError::Config(_))
        ));
        let json = r#"{"ratios": [0.25, 0.25], "probabilities": [0.5, 0.5], "extra": 1}"#;
        assert!(IfsConfig::parse_json(json).is_err());
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let json = r#"{"ratios": [0.25, 0.25], "probabilities": [0.5, 0.5], "translations": [[0.0]]}"#;
        assert!(IfsConfig::parse_json(json).unwrap().build().is_err());
    }

    #[test]
    fn function_file_round_trip() {
        let text = r#"{"depth": 2, "values": {"00": 4.0, "11": 2.0}}"#;
        let file = FunctionFile::parse(text).unwrap();
        let f = file.to_function(2).unwrap();
        assert_eq!(f.value(&Word::parse("00", 2).unwrap()), 4.0);
        assert_eq!(FunctionFile::from_function(&f), file);
        assert!(FunctionFile::parse(r#"{"depth": 1, "values": {}, "x": 0}"#).is_err());
    }

    #[test]
    fn cell_lists_skip_blanks_and_comments() {
        let words = parse_cell_words("# cells\n00\n\n1\n-\n", 2).unwrap();
        assert_eq!(words.len(), 3);
        assert!(words[2].is_root());
        assert!(parse_cell_words("2\n", 2).is_err());
    }
}
