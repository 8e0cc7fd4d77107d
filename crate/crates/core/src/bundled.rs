//! Models shipped with the crate.

use crate::dsl::{parse_model, DslError, ModelDocument};
use crate::models::Fts;

/// Source of the vending machine family.
pub const VENDING_SOURCE: &str = include_str!("../models/vending.fts");

/// `(file name, source)` of every bundled model.
pub const ALL: &[(&str, &str)] = &[("vending.fts", VENDING_SOURCE)];

pub fn vending() -> Result<(ModelDocument, Fts), DslError> {
    parse_model(VENDING_SOURCE)
}

/// Looks up a bundled model by file name.
pub fn source(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}
