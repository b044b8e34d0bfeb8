//! Versioned JSON bundle holding a fitted model and the feature columns it
//! expects.

use std::path::Path;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use super::FittedModel;
use crate::error::{Error, Result};
use crate::io::{read_text, write_text};

pub const BUNDLE_FORMAT: &str = "loadcast-model";
pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format: String,
    pub version: u32,
    /// Candidate name, e.g. `GAM1+SARIMA`.
    pub name: String,
    /// Columns of the training design, in order. Forecasts must supply them.
    pub feature_columns: Vec<String>,
    pub train_start: NaiveDateTime,
    pub train_hours: usize,
    pub model: FittedModel,
}

impl ModelBundle {
    pub fn new(name: &str, feature_columns: Vec<String>, train_start: NaiveDateTime, train_hours: usize, model: FittedModel) -> Self {
        Self {
            format: BUNDLE_FORMAT.to_string(),
            version: BUNDLE_VERSION,
            name: name.to_string(),
            feature_columns,
            train_start,
            train_hours,
            model,
        }
    }

    /// First hour after the training data; forecasts start here.
    pub fn forecast_start(&self) -> NaiveDateTime {
        self.train_start + chrono::Duration::hours(self.train_hours as i64)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let b: ModelBundle = serde_json::from_str(text)?;
        if b.format != BUNDLE_FORMAT {
            return Err(Error::InvalidInput(format!("not a model bundle (format `{}`)", b.format)));
        }
        if b.version != BUNDLE_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported model bundle version {} (expected {BUNDLE_VERSION})",
                b.version
            )));
        }
        Ok(b)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &(self.to_json()? + "\n"))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_text(path)?)
    }
}
