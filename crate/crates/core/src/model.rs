//! The contract a model implements, and the run configuration.
//!
//! A model is plain Rust code. It declares its state variables, and the
//! engine hands it views of packed states through which it reads and
//! writes them. Any callback may report an internal inconsistency with
//! [`View::fail`] / [`ViewMut::fail`]; the engine stops the run after that
//! callback returns.

use std::cell::RefCell;

use thiserror::Error;

use crate::layout::{LayoutError, PackedState, StateLayout, Var, VarDecl};
use crate::stubborn::Obligations;

/// The model's error message slot.
#[derive(Debug, Default)]
pub struct ErrSlot(RefCell<Option<String>>);

impl ErrSlot {
    pub fn set(&self, msg: impl Into<String>) {
        *self.0.borrow_mut() = Some(msg.into());
    }

    pub fn take(&self) -> Option<String> {
        self.0.borrow_mut().take()
    }

    pub fn is_set(&self) -> bool {
        self.0.borrow().is_some()
    }
}

/// Read access to one state.
#[derive(Clone, Copy)]
pub struct View<'a> {
    layout: &'a StateLayout,
    words: &'a [u64],
    err: &'a ErrSlot,
}

impl<'a> View<'a> {
    pub fn new(layout: &'a StateLayout, words: &'a [u64], err: &'a ErrSlot) -> Self {
        View { layout, words, err }
    }

    #[inline]
    pub fn get(&self, var: Var, elem: usize) -> u64 {
        self.layout.read(self.words, var, elem)
    }

    #[inline]
    pub fn flag(&self, var: Var, elem: usize) -> bool {
        self.get(var, elem) != 0
    }

    pub fn fail(&self, msg: impl Into<String>) {
        self.err.set(msg)
    }

    pub fn words(&self) -> &'a [u64] {
        self.words
    }

    pub fn layout(&self) -> &'a StateLayout {
        self.layout
    }
}

/// Read/write access to one state.
pub struct ViewMut<'a> {
    layout: &'a StateLayout,
    words: &'a mut [u64],
    err: &'a ErrSlot,
}

impl<'a> ViewMut<'a> {
    pub fn new(layout: &'a StateLayout, words: &'a mut [u64], err: &'a ErrSlot) -> Self {
        ViewMut { layout, words, err }
    }

    #[inline]
    pub fn get(&self, var: Var, elem: usize) -> u64 {
        self.layout.read(self.words, var, elem)
    }

    #[inline]
    pub fn flag(&self, var: Var, elem: usize) -> bool {
        self.get(var, elem) != 0
    }

    #[inline]
    pub fn set(&mut self, var: Var, elem: usize, value: u64) {
        self.layout.write(self.words, var, elem, value)
    }

    pub fn fail(&self, msg: impl Into<String>) {
        self.err.set(msg)
    }

    pub fn as_view(&self) -> View<'_> {
        View {
            layout: self.layout,
            words: self.words,
            err: self.err,
        }
    }

    pub fn words(&self) -> &[u64] {
        self.words
    }
}

/// Optional callbacks a model provides.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Capabilities {
    pub check_state: bool,
    pub check_deadlock: bool,
    pub may_progress: bool,
    pub must_progress: bool,
    pub stubborn: bool,
    pub symmetry: bool,
}

/// Which properties a run checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Checks {
    pub state: bool,
    pub deadlock: bool,
    pub may_progress: bool,
    pub must_progress: bool,
}

impl Checks {
    pub fn none() -> Self {
        Checks::default()
    }

    /// Every check the model provides.
    pub fn provided_by(caps: Capabilities) -> Self {
        Checks {
            state: caps.check_state,
            deadlock: caps.check_deadlock,
            may_progress: caps.may_progress,
            must_progress: caps.must_progress,
        }
    }

    /// Whether any check needs the reversed edge structure.
    pub fn needs_graph(&self) -> bool {
        self.may_progress || self.must_progress
    }
}

/// A model under verification.
///
/// Transitions are numbered `0..m` where `m` is returned by [`init`].
/// `fire` must be deterministic and must leave the state untouched when it
/// returns `false`.
///
/// [`init`]: Model::init
pub trait Model {
    fn declarations(&self) -> Vec<VarDecl>;

    /// Adjusts the all-zero initial state and returns the number of
    /// transitions.
    fn init(&self, state: &mut ViewMut<'_>) -> usize;

    /// Fires transition `t`. Returns whether it was enabled.
    fn fire(&self, state: &mut ViewMut<'_>, t: usize) -> bool;

    /// One line of text describing the state, used in counterexamples.
    fn format_state(&self, state: &View<'_>) -> String;

    fn capabilities(&self) -> Capabilities {
        Capabilities::default()
    }

    /// Checks switched on when the user does not say otherwise.
    fn default_checks(&self) -> Checks {
        Checks::provided_by(self.capabilities())
    }

    /// `Some(message)` if the state violates safety.
    fn check_state(&self, _state: &View<'_>) -> Option<String> {
        None
    }

    /// `Some(message)` if this terminal state is an illegal deadlock.
    fn check_deadlock(&self, _state: &View<'_>) -> Option<String> {
        None
    }

    fn is_may_progress(&self, _state: &View<'_>) -> bool {
        false
    }

    fn is_must_progress(&self, _state: &View<'_>) -> bool {
        true
    }

    /// Emits the transitions that must join the stubborn set whenever `t`
    /// is in it.
    fn next_stubborn(&self, _state: &View<'_>, _t: usize, obligations: &mut Obligations) {
        obligations.stb_all();
    }

    /// Replaces the state by its symmetry representative.
    fn symmetry_representative(&self, _state: &mut ViewMut<'_>) {}
}

impl<M: Model + ?Sized> Model for &M {
    fn declarations(&self) -> Vec<VarDecl> {
        (**self).declarations()
    }
    fn init(&self, state: &mut ViewMut<'_>) -> usize {
        (**self).init(state)
    }
    fn fire(&self, state: &mut ViewMut<'_>, t: usize) -> bool {
        (**self).fire(state, t)
    }
    fn format_state(&self, state: &View<'_>) -> String {
        (**self).format_state(state)
    }
    fn capabilities(&self) -> Capabilities {
        (**self).capabilities()
    }
    fn default_checks(&self) -> Checks {
        (**self).default_checks()
    }
    fn check_state(&self, state: &View<'_>) -> Option<String> {
        (**self).check_state(state)
    }
    fn check_deadlock(&self, state: &View<'_>) -> Option<String> {
        (**self).check_deadlock(state)
    }
    fn is_may_progress(&self, state: &View<'_>) -> bool {
        (**self).is_may_progress(state)
    }
    fn is_must_progress(&self, state: &View<'_>) -> bool {
        (**self).is_must_progress(state)
    }
    fn next_stubborn(&self, state: &View<'_>, t: usize, obligations: &mut Obligations) {
        (**self).next_stubborn(state, t, obligations)
    }
    fn symmetry_representative(&self, state: &mut ViewMut<'_>) {
        (**self).symmetry_representative(state)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub checks: Checks,
    pub stubborn: bool,
    pub symmetry: bool,
    /// Stop once more than this many states have been stored.
    pub stop_cnt: Option<u64>,
    /// Verify model contract obligations (disabled purity, stubborn
    /// closure, representative idempotence) while exploring.
    pub debug_checks: bool,
    pub word_width: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            checks: Checks::none(),
            stubborn: false,
            symmetry: false,
            stop_cnt: None,
            debug_checks: false,
            word_width: 64,
        }
    }
}

impl RunConfig {
    /// Plain run with the model's default checks.
    pub fn for_model<M: Model + ?Sized>(model: &M) -> Self {
        RunConfig {
            checks: model.default_checks(),
            ..RunConfig::default()
        }
    }

    pub fn stubborn(mut self, on: bool) -> Self {
        self.stubborn = on;
        self
    }

    pub fn symmetry(mut self, on: bool) -> Self {
        self.symmetry = on;
        self
    }

    pub fn debug_checks(mut self, on: bool) -> Self {
        self.debug_checks = on;
        self
    }

    pub fn checks(mut self, checks: Checks) -> Self {
        self.checks = checks;
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetupError {
    #[error("{flag} requested but the model does not provide {provides}")]
    MissingCapability {
        flag: &'static str,
        provides: &'static str,
    },
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("model error during initialisation: {0}")]
    Model(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("invalid model parameter: {0}")]
    BadParameter(String),
}

/// A configuration checked against a model, with its layout and initial
/// state.
#[derive(Debug, Clone)]
pub struct Plan {
    pub config: RunConfig,
    pub layout: StateLayout,
    pub transitions: usize,
    /// Initial state after `init`, before any symmetry canonicalization.
    pub initial: PackedState,
}

/// Checks `cfg` against the model's capabilities, builds the layout, and
/// runs `init` once on the all-zero state.
pub fn validate<M: Model + ?Sized>(model: &M, cfg: &RunConfig) -> Result<Plan, SetupError> {
    let caps = model.capabilities();
    let required = [
        (
            cfg.checks.state,
            caps.check_state,
            "chk_state",
            "check_state",
        ),
        (
            cfg.checks.deadlock,
            caps.check_deadlock,
            "chk_deadlock",
            "check_deadlock",
        ),
        (
            cfg.checks.may_progress,
            caps.may_progress,
            "chk_may_progress",
            "is_may_progress",
        ),
        (
            cfg.checks.must_progress,
            caps.must_progress,
            "chk_must_progress",
            "is_must_progress",
        ),
        (cfg.stubborn, caps.stubborn, "stubborn", "next_stubborn"),
        (
            cfg.symmetry,
            caps.symmetry,
            "symmetry",
            "symmetry_representative",
        ),
    ];
    for (wanted, provided, flag, provides) in required {
        if wanted && !provided {
            return Err(SetupError::MissingCapability { flag, provides });
        }
    }

    let layout = StateLayout::build(cfg.word_width, &model.declarations())?;
    let mut initial = PackedState::zeroed(&layout);
    let err = ErrSlot::default();
    let transitions = model.init(&mut ViewMut::new(&layout, initial.words_mut(), &err));
    if let Some(msg) = err.take() {
        return Err(SetupError::Model(msg));
    }
    assert!(
        transitions <= u32::MAX as usize,
        "transition count {transitions} does not fit 32 bits"
    );
    Ok(Plan {
        config: cfg.clone(),
        layout,
        transitions,
        initial,
    })
}
