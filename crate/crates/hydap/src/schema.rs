//! Variable schema files (TOML):
//!
//! ```toml
//! [[variable]]
//! name = "age"
//! kind = "continuous"
//!
//! [[variable]]
//! name = "smoker"
//! kind = "asymmetric_binary"
//! levels = ["no", "yes"]
//! positive_level = "yes"
//! ```

use std::fs;
use std::path::Path;

use hydap_core::VariableMeta;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    #[serde(rename = "variable")]
    pub variables: Vec<VariableMeta>,
}

impl Schema {
    pub fn parse(text: &str) -> Result<Self> {
        let s: Schema = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if s.variables.is_empty() {
            return Err(Error::Config("schema lists no variables".into()));
        }
        for v in &s.variables {
            v.validate()?;
        }
        Ok(s)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

pub fn load_schema(path: &Path) -> Result<Schema> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Schema::parse(&text)
}

pub fn write_schema(path: &Path, schema: &Schema) -> Result<()> {
    fs::write(path, schema.to_toml()?).map_err(|e| Error::io(path, e))
}
