//! Breadth-first construction of the state space with on-the-fly safety and
//! illegal deadlock detection.

use std::ops::ControlFlow;

use crate::engine::{Expander, Fault};
use crate::model::{Model, Plan};
use crate::store::{Pred, StateStore};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExploreVerdict {
    Pass,
    /// `check_state` rejected a stored state.
    Safety {
        message: String,
        state: usize,
    },
    /// `check_deadlock` rejected a terminal state.
    Deadlock {
        message: String,
        state: usize,
    },
    /// The model raised an error; `state` is the state being processed.
    Model {
        message: String,
        state: Option<usize>,
    },
    /// More than `stop_cnt` states were stored.
    LimitExceeded {
        limit: u64,
    },
}

pub struct ExplorationResult {
    pub store: StateStore,
    /// Successful firings (edges of the explored graph).
    pub edges: u64,
    pub verdict: ExploreVerdict,
}

impl ExplorationResult {
    pub fn states(&self) -> usize {
        self.store.len()
    }

    /// State indices from the initial state to `target`.
    pub fn counterexample(&self, target: usize) -> Vec<usize> {
        self.store
            .path_to(target)
            .expect("predecessor records are kept for counterexamples")
    }

    pub fn stats_line(&self) -> String {
        stats_line(self.states(), self.edges)
    }
}

/// The closing statistics line of every run.
pub fn stats_line(states: usize, edges: u64) -> String {
    format!("{states} states, {edges} edges")
}

/// Stage one: explores `plan` breadth first from the initial state.
pub fn explore<M: Model + ?Sized>(model: &M, plan: &Plan) -> ExplorationResult {
    let mut expander = Expander::new(model, plan);
    explore_with(&mut expander, plan)
}

pub(crate) fn explore_with<M: Model + ?Sized>(
    expander: &mut Expander<'_, M>,
    plan: &Plan,
) -> ExplorationResult {
    let cfg = &plan.config;
    let stride = plan.layout.total_words();
    let mut store = StateStore::new(stride);
    let mut edges = 0u64;

    let model_error = |store: StateStore, edges, fault: Fault, state| ExplorationResult {
        store,
        edges,
        verdict: ExploreVerdict::Model {
            message: fault.message(),
            state,
        },
    };

    let mut initial = plan.initial.words().to_vec();
    if let Err(f) = expander.representative(&mut initial) {
        return model_error(store, edges, f, None);
    }
    store.intern(&initial);
    if cfg.checks.state {
        match expander.cb.check_state(&initial) {
            Ok(None) => {}
            Ok(Some(message)) => {
                return ExplorationResult {
                    store,
                    edges,
                    verdict: ExploreVerdict::Safety { message, state: 0 },
                }
            }
            Err(f) => return model_error(store, edges, f, Some(0)),
        }
    }
    if let Some(limit) = cfg.stop_cnt {
        if store.len() as u64 > limit {
            return ExplorationResult {
                store,
                edges,
                verdict: ExploreVerdict::LimitExceeded { limit },
            };
        }
    }

    let mut base = vec![0u64; stride];
    let mut current = 0usize;
    while current < store.len() {
        base.copy_from_slice(store.get(current));
        let mut stop: Option<ExploreVerdict> = None;
        let from = current as u32;
        let expansion = expander.expand(&base, |cb, t, succ| {
            edges += 1;
            let (index, is_new) = store.intern_from(
                succ,
                Pred {
                    from,
                    transition: t,
                },
            );
            if !is_new {
                return ControlFlow::Continue(());
            }
            if cfg.checks.state {
                match cb.check_state(succ) {
                    Ok(None) => {}
                    Ok(Some(message)) => {
                        stop = Some(ExploreVerdict::Safety {
                            message,
                            state: index,
                        });
                        return ControlFlow::Break(());
                    }
                    Err(f) => {
                        stop = Some(ExploreVerdict::Model {
                            message: f.message(),
                            state: Some(index),
                        });
                        return ControlFlow::Break(());
                    }
                }
            }
            if let Some(limit) = cfg.stop_cnt {
                if store.len() as u64 > limit {
                    stop = Some(ExploreVerdict::LimitExceeded { limit });
                    return ControlFlow::Break(());
                }
            }
            ControlFlow::Continue(())
        });
        let expansion = match expansion {
            Ok(e) => e,
            Err(f) => return model_error(store, edges, f, Some(current)),
        };
        if let Some(verdict) = stop {
            return ExplorationResult {
                store,
                edges,
                verdict,
            };
        }
        if expansion.terminal && cfg.checks.deadlock {
            match expander.cb.check_deadlock(&base) {
                Ok(None) => {}
                Ok(Some(message)) => {
                    return ExplorationResult {
                        store,
                        edges,
                        verdict: ExploreVerdict::Deadlock {
                            message,
                            state: current,
                        },
                    }
                }
                Err(f) => return model_error(store, edges, f, Some(current)),
            }
        }
        current += 1;
    }

    ExplorationResult {
        store,
        edges,
        verdict: ExploreVerdict::Pass,
    }
}
