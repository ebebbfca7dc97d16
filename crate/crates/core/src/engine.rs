//! Model callbacks with error-slot polling, and successor generation shared
//! by every stage.

use std::cell::Cell;
use std::ops::ControlFlow;

use crate::layout::StateLayout;
use crate::model::{ErrSlot, Model, Plan, View, ViewMut};
use crate::stubborn::{Obligations, StubbornSelection, StubbornSets};

/// Why a run had to stop inside a model callback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fault {
    /// The model set its error message.
    Model(String),
    /// The model broke its contract (detected under debug checks).
    Contract(String),
}

impl Fault {
    pub fn message(&self) -> String {
        match self {
            Fault::Model(m) => m.clone(),
            Fault::Contract(m) => format!("Model contract violated: {m}"),
        }
    }
}

/// Thin wrapper around the model that checks the error slot after every
/// callback.
pub struct Callbacks<'a, M: ?Sized> {
    model: &'a M,
    layout: &'a StateLayout,
    err: ErrSlot,
    debug_checks: bool,
    idempotence_violations: Cell<u64>,
}

impl<'a, M: Model + ?Sized> Callbacks<'a, M> {
    pub fn new(model: &'a M, layout: &'a StateLayout, debug_checks: bool) -> Self {
        Callbacks {
            model,
            layout,
            err: ErrSlot::default(),
            debug_checks,
            idempotence_violations: Cell::new(0),
        }
    }

    pub fn model(&self) -> &'a M {
        self.model
    }

    pub fn layout(&self) -> &'a StateLayout {
        self.layout
    }

    #[inline]
    fn poll(&self) -> Result<(), Fault> {
        match self.err.take() {
            Some(msg) => Err(Fault::Model(msg)),
            None => Ok(()),
        }
    }

    fn view<'s>(&'s self, words: &'s [u64]) -> View<'s> {
        View::new(self.layout, words, &self.err)
    }

    /// Fires `t`. Under debug checks a disabled firing is verified to leave
    /// the state bit-identical.
    #[inline]
    pub fn fire(&self, words: &mut [u64], t: usize) -> Result<bool, Fault> {
        let before = self.debug_checks.then(|| words.to_vec());
        let enabled = self
            .model
            .fire(&mut ViewMut::new(self.layout, words, &self.err), t);
        self.poll()?;
        if let Some(before) = before {
            if !enabled && before != words {
                words.copy_from_slice(&before);
                return Err(Fault::Contract(format!(
                    "transition {t} reported disabled but changed the state"
                )));
            }
        }
        Ok(enabled)
    }

    /// Replaces the state by its representative. Under debug checks a second
    /// application is compared with the first; mismatches are only counted.
    pub fn canonicalize(&self, words: &mut [u64]) -> Result<(), Fault> {
        self.model
            .symmetry_representative(&mut ViewMut::new(self.layout, words, &self.err));
        self.poll()?;
        if self.debug_checks {
            let mut again = words.to_vec();
            self.model.symmetry_representative(&mut ViewMut::new(
                self.layout,
                &mut again,
                &self.err,
            ));
            self.poll()?;
            if again != words {
                self.idempotence_violations
                    .set(self.idempotence_violations.get() + 1);
            }
        }
        Ok(())
    }

    /// Number of states whose representative was not a fixed point.
    pub fn idempotence_violations(&self) -> u64 {
        self.idempotence_violations.get()
    }

    pub fn check_state(&self, words: &[u64]) -> Result<Option<String>, Fault> {
        let r = self.model.check_state(&self.view(words));
        self.poll()?;
        Ok(r)
    }

    pub fn check_deadlock(&self, words: &[u64]) -> Result<Option<String>, Fault> {
        let r = self.model.check_deadlock(&self.view(words));
        self.poll()?;
        Ok(r)
    }

    pub fn is_may_progress(&self, words: &[u64]) -> Result<bool, Fault> {
        let r = self.model.is_may_progress(&self.view(words));
        self.poll()?;
        Ok(r)
    }

    pub fn is_must_progress(&self, words: &[u64]) -> Result<bool, Fault> {
        let r = self.model.is_must_progress(&self.view(words));
        self.poll()?;
        Ok(r)
    }

    pub fn next_stubborn(
        &self,
        words: &[u64],
        t: usize,
        obligations: &mut Obligations,
    ) -> Result<(), Fault> {
        self.model.next_stubborn(&self.view(words), t, obligations);
        self.poll()
    }

    pub fn format_state(&self, words: &[u64]) -> String {
        let line = self.model.format_state(&self.view(words));
        // Formatting is for output only; an error here does not change the
        // verdict.
        self.err.take();
        line
    }
}

/// Outcome of expanding one state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Expansion {
    /// No transition at all was enabled.
    pub terminal: bool,
    /// The sink asked to stop early.
    pub stopped: bool,
}

/// Generates the successors of states: all enabled transitions in plain
/// mode, the enabled members of a stubborn set in stubborn mode,
/// canonicalized when symmetry is on. Deterministic, so later stages can
/// replay exactly the edges of the first.
pub struct Expander<'a, M: ?Sized> {
    pub cb: Callbacks<'a, M>,
    transitions: usize,
    stride: usize,
    stubborn: bool,
    symmetry: bool,
    debug_checks: bool,
    scratch: Vec<u64>,
    succ: Vec<u64>,
    enabled: Vec<u32>,
    sets: StubbornSets,
}

impl<'a, M: Model + ?Sized> Expander<'a, M> {
    pub fn new(model: &'a M, plan: &'a Plan) -> Self {
        let stride = plan.layout.total_words();
        Expander {
            cb: Callbacks::new(model, &plan.layout, plan.config.debug_checks),
            transitions: plan.transitions,
            stride,
            stubborn: plan.config.stubborn,
            symmetry: plan.config.symmetry,
            debug_checks: plan.config.debug_checks,
            scratch: vec![0; stride],
            succ: Vec::new(),
            enabled: Vec::new(),
            sets: StubbornSets::new(plan.transitions),
        }
    }

    pub fn transitions(&self) -> usize {
        self.transitions
    }

    /// Canonicalizes `words` in place when symmetry is on.
    pub fn representative(&self, words: &mut [u64]) -> Result<(), Fault> {
        if self.symmetry {
            self.cb.canonicalize(words)?;
        }
        Ok(())
    }

    /// Calls `sink(callbacks, t, successor)` for each edge out of `base`, in
    /// ascending transition order.
    pub fn expand<F>(&mut self, base: &[u64], mut sink: F) -> Result<Expansion, Fault>
    where
        F: FnMut(&Callbacks<'a, M>, u32, &[u64]) -> ControlFlow<()>,
    {
        debug_assert_eq!(base.len(), self.stride);
        let mut scratch = std::mem::take(&mut self.scratch);
        let r = if self.stubborn {
            self.expand_stubborn(base, &mut scratch, &mut sink)
        } else {
            self.expand_plain(base, &mut scratch, &mut sink)
        };
        self.scratch = scratch;
        r
    }

    fn expand_plain<F>(
        &mut self,
        base: &[u64],
        scratch: &mut [u64],
        sink: &mut F,
    ) -> Result<Expansion, Fault>
    where
        F: FnMut(&Callbacks<'a, M>, u32, &[u64]) -> ControlFlow<()>,
    {
        scratch.copy_from_slice(base);
        let mut terminal = true;
        for t in 0..self.transitions {
            if !self.cb.fire(scratch, t)? {
                continue;
            }
            terminal = false;
            if self.symmetry {
                self.cb.canonicalize(scratch)?;
            }
            if sink(&self.cb, t as u32, scratch).is_break() {
                return Ok(Expansion {
                    terminal,
                    stopped: true,
                });
            }
            scratch.copy_from_slice(base);
        }
        Ok(Expansion {
            terminal,
            stopped: false,
        })
    }

    fn expand_stubborn<F>(
        &mut self,
        base: &[u64],
        scratch: &mut [u64],
        sink: &mut F,
    ) -> Result<Expansion, Fault>
    where
        F: FnMut(&Callbacks<'a, M>, u32, &[u64]) -> ControlFlow<()>,
    {
        let stride = self.stride;
        let mut succ = std::mem::take(&mut self.succ);
        let mut enabled = std::mem::take(&mut self.enabled);
        succ.clear();
        enabled.clear();
        let result = (|| {
            scratch.copy_from_slice(base);
            for t in 0..self.transitions {
                if self.cb.fire(scratch, t)? {
                    enabled.push(t as u32);
                    succ.extend_from_slice(scratch);
                    scratch.copy_from_slice(base);
                }
            }
            if enabled.is_empty() {
                return Ok(Expansion {
                    terminal: true,
                    stopped: false,
                });
            }
            let selection = self.select(base, &enabled)?;
            let mut k = 0;
            for &t in &selection.enabled_members {
                while enabled[k] != t {
                    k += 1;
                }
                let s = &mut succ[k * stride..(k + 1) * stride];
                if self.symmetry {
                    self.cb.canonicalize(s)?;
                }
                if sink(&self.cb, t, s).is_break() {
                    return Ok(Expansion {
                        terminal: false,
                        stopped: true,
                    });
                }
            }
            Ok(Expansion {
                terminal: false,
                stopped: false,
            })
        })();
        self.succ = succ;
        self.enabled = enabled;
        result
    }

    fn select(&mut self, base: &[u64], enabled: &[u32]) -> Result<StubbornSelection, Fault> {
        let cb = &self.cb;
        self.sets.reset();
        let selection = self.sets.choose(enabled, |t, em: &mut Obligations| {
            cb.next_stubborn(base, t, em)
        })?;
        if self.debug_checks {
            if let Some(t) = self
                .sets
                .find_unclosed(&selection.set, |t, em: &mut Obligations| {
                    cb.next_stubborn(base, t, em)
                })?
            {
                return Err(Fault::Contract(format!(
                    "obligations of transition {t} are not deterministic"
                )));
            }
        }
        Ok(selection)
    }

    /// Determines the enabled transitions of `base` and the stubborn set
    /// that would be chosen there. `None` if `base` is terminal.
    pub fn stubborn_selection(&mut self, base: &[u64]) -> Result<Option<StubbornSelection>, Fault> {
        let mut scratch = base.to_vec();
        let mut enabled = Vec::new();
        for t in 0..self.transitions {
            if self.cb.fire(&mut scratch, t)? {
                enabled.push(t as u32);
                scratch.copy_from_slice(base);
            }
        }
        if enabled.is_empty() {
            return Ok(None);
        }
        self.select(base, &enabled).map(Some)
    }

    /// First successor of `base` in transition order, if any.
    pub fn first_successor(&mut self, base: &[u64]) -> Result<Option<Vec<u64>>, Fault> {
        let mut first = None;
        self.expand(base, |_, _, s| {
            first = Some(s.to_vec());
            ControlFlow::Break(())
        })?;
        Ok(first)
    }
}
