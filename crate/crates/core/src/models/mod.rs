//! Models bundled with the engine, selectable by name.

pub mod tokenring;

use crate::model::{Model, SetupError};
use tokenring::{TokenRing, Variant};

/// Names accepted by [`build`].
pub const NAMES: &[&str] = &["tokenring"];

/// Ring size used when none is given.
pub const DEFAULT_SIZE: usize = 6;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelParams {
    pub n: Option<usize>,
    pub variant: Option<String>,
    pub symm_must: bool,
}

pub fn build(name: &str, params: &ModelParams) -> Result<Box<dyn Model>, SetupError> {
    match name {
        "tokenring" => {
            let n = params.n.unwrap_or(DEFAULT_SIZE);
            if n < 2 {
                return Err(SetupError::BadParameter(format!(
                    "ring size must be at least 2, got {n}"
                )));
            }
            if params.symm_must && n > 256 {
                return Err(SetupError::BadParameter(format!(
                    "customer tracking supports ring sizes up to 256, got {n}"
                )));
            }
            let variant = match &params.variant {
                Some(v) => v.parse::<Variant>().map_err(SetupError::BadParameter)?,
                None => Variant::Correct,
            };
            Ok(Box::new(
                TokenRing::with_variant(n, variant).symm_must(params.symm_must),
            ))
        }
        other => Err(SetupError::UnknownModel(other.to_string())),
    }
}
