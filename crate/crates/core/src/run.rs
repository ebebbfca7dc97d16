//! Runs the checking stages in order and renders the transcript.
//!
//! Stage one explores the state space, catching safety errors and illegal
//! deadlocks on the fly. If further checks remain, the reversed edge
//! structure is built by replaying stage one, then may progress, must
//! progress, and finally (with stubborn sets) termination reachability are
//! checked.

use std::fmt;

use crate::engine::{Callbacks, Expander};
use crate::explore::{explore_with, stats_line, ExplorationResult, ExploreVerdict};
use crate::model::{validate, Model, RunConfig, SetupError};
use crate::progress::{self, GraphError};
use crate::store::StateStore;

/// Separates the part of a trace from which termination is still possible
/// from the part where it is not.
pub const NO_RETURN_MARKER: &str = "==========";
/// Precedes the first state of a cycle in a trace.
pub const CYCLE_MARKER: &str = "----------";

pub const NOT_TERMINATING_MSG: &str = "State was reached from which termination is unreachable";
pub const MAY_PROGRESS_MSG: &str =
    "State was reached from which no terminal state and no may progress state is reachable";
pub const MUST_PROGRESS_MSG: &str = "Cycle was found that contains no must progress state";
pub const UNRELIABLE_PASS_MSG: &str =
    "Warning: must progress was checked with stubborn sets, the pass verdict is unreliable";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Line {
    State(String),
    NoReturn,
    Cycle,
    Error(String),
    Warning(String),
    Stats(String),
}

impl Line {
    fn is_trace(&self) -> bool {
        matches!(self, Line::State(_) | Line::NoReturn | Line::Cycle)
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Line::State(s) | Line::Warning(s) | Line::Stats(s) => f.write_str(s),
            Line::NoReturn => f.write_str(NO_RETURN_MARKER),
            Line::Cycle => f.write_str(CYCLE_MARKER),
            Line::Error(s) => write!(f, "!!! {s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Safety { message: String },
    Deadlock { message: String },
    MayProgress,
    MustProgress,
    NotTerminating,
    Model { message: String },
    LimitExceeded { limit: u64 },
}

impl Verdict {
    /// 0 pass, 1 property violated, 2 state limit exceeded, 3 model error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Safety { .. }
            | Verdict::Deadlock { .. }
            | Verdict::MayProgress
            | Verdict::MustProgress
            | Verdict::NotTerminating => 1,
            Verdict::LimitExceeded { .. } => 2,
            Verdict::Model { .. } => 3,
        }
    }

    pub fn is_pass(&self) -> bool {
        *self == Verdict::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Explore,
    ReverseGraph,
    MayProgress,
    MustProgress,
    Termination,
}

pub struct RunOutcome {
    pub verdict: Verdict,
    pub exploration: ExplorationResult,
    /// Counterexample as state indices (empty on pass). For cycles, the
    /// states from `cycle_start` on form the cycle.
    pub trace: Vec<usize>,
    pub cycle_start: Option<usize>,
    pub lines: Vec<Line>,
    pub stages: Vec<Stage>,
    /// States whose symmetry representative was not a fixed point (only
    /// counted with debug checks).
    pub idempotence_violations: u64,
}

impl RunOutcome {
    pub fn states(&self) -> usize {
        self.exploration.states()
    }

    pub fn edges(&self) -> u64 {
        self.exploration.edges
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    /// The transcript text. `quiet` drops trace lines and markers.
    pub fn transcript(&self, quiet: bool) -> String {
        let mut out = String::new();
        for line in self.lines.iter().filter(|l| !(quiet && l.is_trace())) {
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }

    pub fn has_warning(&self) -> bool {
        self.lines.iter().any(|l| matches!(l, Line::Warning(_)))
    }
}

/// Validates `cfg` against `model` and performs every configured check.
pub fn run<M: Model + ?Sized>(model: &M, cfg: &RunConfig) -> Result<RunOutcome, SetupError> {
    let plan = validate(model, cfg)?;
    let mut expander = Expander::new(model, &plan);
    let mut stages = vec![Stage::Explore];
    let exploration = explore_with(&mut expander, &plan);
    let store = &exploration.store;

    let mut lines = Vec::new();
    let mut trace = Vec::new();
    let mut cycle_start = None;

    let verdict = match &exploration.verdict {
        ExploreVerdict::Safety { message, state } => {
            trace = exploration.counterexample(*state);
            push_states(&expander.cb, store, &trace, &mut lines);
            lines.push(Line::Error(message.clone()));
            Some(Verdict::Safety {
                message: message.clone(),
            })
        }
        ExploreVerdict::Deadlock { message, state } => {
            trace = exploration.counterexample(*state);
            push_states(&expander.cb, store, &trace, &mut lines);
            lines.push(Line::Error(message.clone()));
            Some(Verdict::Deadlock {
                message: message.clone(),
            })
        }
        ExploreVerdict::Model { message, state } => {
            if let Some(s) = state {
                trace = exploration.counterexample(*s);
                push_states(&expander.cb, store, &trace, &mut lines);
            }
            lines.push(Line::Error(message.clone()));
            Some(Verdict::Model {
                message: message.clone(),
            })
        }
        ExploreVerdict::LimitExceeded { limit } => {
            lines.push(Line::Error(format!(
                "More than {limit} states, construction stopped"
            )));
            Some(Verdict::LimitExceeded { limit: *limit })
        }
        ExploreVerdict::Pass => None,
    };

    let verdict = match verdict {
        Some(v) => v,
        None => {
            let checks = cfg.checks;
            let termination =
                cfg.stubborn && (checks.state || checks.may_progress || checks.must_progress);
            if !checks.needs_graph() && !termination {
                Verdict::Pass
            } else {
                let graph =
                    graph_stages(&mut expander, &exploration, cfg, termination, &mut stages);
                match graph {
                    Ok(GraphOutcome::Pass) => {
                        if cfg.stubborn && checks.must_progress {
                            lines.push(Line::Warning(UNRELIABLE_PASS_MSG.to_string()));
                        }
                        Verdict::Pass
                    }
                    Ok(GraphOutcome::MayProgress(bad)) => {
                        trace = exploration.counterexample(bad);
                        push_states(&expander.cb, store, &trace, &mut lines);
                        lines.push(Line::Error(MAY_PROGRESS_MSG.to_string()));
                        Verdict::MayProgress
                    }
                    Ok(GraphOutcome::MustProgress(cycle)) => {
                        trace = exploration.counterexample(cycle[0]);
                        trace.pop();
                        push_states(&expander.cb, store, &trace, &mut lines);
                        lines.push(Line::Cycle);
                        cycle_start = Some(trace.len());
                        push_states(&expander.cb, store, &cycle, &mut lines);
                        trace.extend(&cycle);
                        lines.push(Line::Error(MUST_PROGRESS_MSG.to_string()));
                        Verdict::MustProgress
                    }
                    Ok(GraphOutcome::NotTerminating(nt)) => {
                        trace = exploration.counterexample(nt.first_bad);
                        trace.pop();
                        push_states(&expander.cb, store, &trace, &mut lines);
                        lines.push(Line::NoReturn);
                        let base = trace.len();
                        for (k, &s) in nt.walk.iter().enumerate() {
                            if k == nt.cycle_start {
                                lines.push(Line::Cycle);
                            }
                            push_states(&expander.cb, store, &[s], &mut lines);
                        }
                        cycle_start = Some(base + nt.cycle_start);
                        trace.extend(&nt.walk);
                        lines.push(Line::Error(NOT_TERMINATING_MSG.to_string()));
                        Verdict::NotTerminating
                    }
                    Err(e) => {
                        let message = e.to_string();
                        lines.push(Line::Error(message.clone()));
                        Verdict::Model { message }
                    }
                }
            }
        }
    };

    lines.push(Line::Stats(stats_line(
        exploration.states(),
        exploration.edges,
    )));
    let idempotence_violations = expander.cb.idempotence_violations();
    Ok(RunOutcome {
        verdict,
        exploration,
        trace,
        cycle_start,
        lines,
        stages,
        idempotence_violations,
    })
}

enum GraphOutcome {
    Pass,
    MayProgress(usize),
    MustProgress(Vec<usize>),
    NotTerminating(progress::NonTermination),
}

fn graph_stages<M: Model + ?Sized>(
    expander: &mut Expander<'_, M>,
    exploration: &ExplorationResult,
    cfg: &RunConfig,
    termination: bool,
    stages: &mut Vec<Stage>,
) -> Result<GraphOutcome, GraphError> {
    let store = &exploration.store;
    stages.push(Stage::ReverseGraph);
    let rg = progress::build_reverse(expander, store, exploration.edges)?;
    if cfg.checks.may_progress {
        stages.push(Stage::MayProgress);
        if let Some(bad) =
            progress::check_may_progress(expander, store, &rg).map_err(GraphError::from)?
        {
            return Ok(GraphOutcome::MayProgress(bad));
        }
    }
    if cfg.checks.must_progress {
        stages.push(Stage::MustProgress);
        if let Some(cycle) =
            progress::check_must_progress(expander, store, &rg).map_err(GraphError::from)?
        {
            return Ok(GraphOutcome::MustProgress(cycle));
        }
    }
    if termination {
        stages.push(Stage::Termination);
        if let Some(nt) = progress::check_termination(expander, store, &rg)? {
            return Ok(GraphOutcome::NotTerminating(nt));
        }
    }
    Ok(GraphOutcome::Pass)
}

fn push_states<M: Model + ?Sized>(
    cb: &Callbacks<'_, M>,
    store: &StateStore,
    states: &[usize],
    lines: &mut Vec<Line>,
) {
    for &i in states {
        lines.push(Line::State(cb.format_state(store.get(i))));
    }
}
