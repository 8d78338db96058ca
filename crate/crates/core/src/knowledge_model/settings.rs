//! Amendable parameters referenced by test guards.

use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SettingValue {
    Integer { value: i64 },
    IntegerSet { value: BTreeSet<i64> },
    /// Ordered from lowest to highest.
    OrdinalScale { value: Vec<String> },
    /// A point on the named scale.
    OrdinalThreshold { scale: String, value: String },
}

impl SettingValue {
    pub fn kind_name(&self) -> &'static str {
        match self {
            SettingValue::Integer { .. } => "integer",
            SettingValue::IntegerSet { .. } => "integer-set",
            SettingValue::OrdinalScale { .. } => "ordinal-scale",
            SettingValue::OrdinalThreshold { .. } => "ordinal-threshold",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SettingsError {
    #[error("unknown setting {0}")]
    Unknown(String),
    #[error("setting {name} is {expected}, not {found}")]
    KindMismatch { name: String, expected: &'static str, found: &'static str },
    #[error("setting {name}: {value} is not on scale {scale}")]
    OutOfScale { name: String, value: String, scale: String },
    #[error("setting {name}: {message}")]
    Invalid { name: String, message: String },
}

impl SettingsError {
    pub fn setting(&self) -> &str {
        match self {
            SettingsError::Unknown(name)
            | SettingsError::KindMismatch { name, .. }
            | SettingsError::OutOfScale { name, .. }
            | SettingsError::Invalid { name, .. } => name,
        }
    }
}

/// Settings deltas keyed by setting name.
pub type ChangeSet = IndexMap<String, SettingValue>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Settings(pub IndexMap<String, SettingValue>);

impl Settings {
    pub fn get(&self, name: &str) -> Option<&SettingValue> {
        self.0.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn scale(&self, name: &str) -> Option<&[String]> {
        match self.0.get(name)? {
            SettingValue::OrdinalScale { value } => Some(value),
            _ => None,
        }
    }

    /// Internal consistency: scales nonempty without repeats, thresholds on
    /// an existing scale.
    pub fn check(&self) -> Vec<SettingsError> {
        let mut errors = Vec::new();
        for (name, value) in &self.0 {
            match value {
                SettingValue::OrdinalScale { value } => {
                    let unique: BTreeSet<_> = value.iter().collect();
                    if value.is_empty() || unique.len() != value.len() {
                        errors.push(SettingsError::Invalid {
                            name: name.clone(),
                            message: "scale must be nonempty without repeated values".into(),
                        });
                    }
                }
                SettingValue::OrdinalThreshold { scale, value } => match self.scale(scale) {
                    None => errors.push(SettingsError::Invalid {
                        name: name.clone(),
                        message: format!("threshold refers to missing scale {scale}"),
                    }),
                    Some(points) if !points.contains(value) => errors.push(SettingsError::OutOfScale {
                        name: name.clone(),
                        value: value.clone(),
                        scale: scale.clone(),
                    }),
                    Some(_) => {}
                },
                SettingValue::Integer { .. } | SettingValue::IntegerSet { .. } => {}
            }
        }
        errors
    }

    /// Returns a copy with `changes` applied. Each change must name an
    /// existing setting and keep its kind; the result must pass [`Settings::check`].
    pub fn apply(&self, changes: &ChangeSet) -> Result<Settings, SettingsError> {
        let mut next = self.clone();
        for (name, value) in changes {
            let current = self.0.get(name).ok_or_else(|| SettingsError::Unknown(name.clone()))?;
            if current.kind_name() != value.kind_name() {
                return Err(SettingsError::KindMismatch {
                    name: name.clone(),
                    expected: current.kind_name(),
                    found: value.kind_name(),
                });
            }
            if let (
                SettingValue::OrdinalThreshold { scale: old, .. },
                SettingValue::OrdinalThreshold { scale: new, .. },
            ) = (current, value)
            {
                if old != new {
                    return Err(SettingsError::Invalid {
                        name: name.clone(),
                        message: format!("threshold must stay on scale {old}"),
                    });
                }
            }
            next.0.insert(name.clone(), value.clone());
        }
        match next.check().into_iter().next() {
            Some(err) => Err(err),
            None => Ok(next),
        }
    }
}
