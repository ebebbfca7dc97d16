//! Quotienting by a model-supplied symmetry representative.
//!
//! The engine replaces the initial state and every firing result by its
//! representative before storing it, so traces may contain symmetry swaps.

use crate::engine::{Callbacks, Fault};
use crate::layout::{PackedState, StateLayout};
use crate::model::Model;

/// Returns the representative of `state`.
pub fn canonicalize<M: Model + ?Sized>(
    model: &M,
    layout: &StateLayout,
    state: &PackedState,
) -> Result<PackedState, Fault> {
    let cb = Callbacks::new(model, layout, false);
    let mut out = state.clone();
    cb.canonicalize(out.words_mut())?;
    Ok(out)
}

/// Whether the representative of `state` is its own representative.
pub fn is_idempotent_at<M: Model + ?Sized>(
    model: &M,
    layout: &StateLayout,
    state: &PackedState,
) -> Result<bool, Fault> {
    let once = canonicalize(model, layout, state)?;
    Ok(canonicalize(model, layout, &once)? == once)
}
