//! Reversed edge structure and the graph checks run after exploration:
//! may progress, must progress, and termination reachability.

use std::collections::VecDeque;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::engine::{Expander, Fault};
use crate::model::Model;
use crate::store::StateStore;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("{}", .0.message())]
    Fault(Fault),
    #[error("replayed exploration produced {replayed} edges, expected {expected}")]
    EdgeCountMismatch { expected: u64, replayed: u64 },
    #[error("replayed exploration reached a state that was never stored (from state {from})")]
    UnknownSuccessor { from: usize },
}

impl From<Fault> for GraphError {
    fn from(f: Fault) -> Self {
        GraphError::Fault(f)
    }
}

/// Predecessor lists, one index per edge, plus the terminal states.
#[derive(Debug, Clone)]
pub struct ReverseGraph {
    /// `preds[offsets[v]..offsets[v + 1]]` are the tails of edges into `v`.
    offsets: Vec<usize>,
    preds: Vec<u32>,
    terminal: Vec<bool>,
}

impl ReverseGraph {
    /// Builds the structure from an explicit forward edge list.
    pub fn from_edges(states: usize, edges: &[(usize, usize)], terminal: Vec<bool>) -> Self {
        assert_eq!(terminal.len(), states);
        let mut offsets = vec![0usize; states + 1];
        for &(_, v) in edges {
            offsets[v] += 1;
        }
        prefix_ends(&mut offsets);
        let mut preds = vec![0u32; edges.len()];
        for &(u, v) in edges {
            offsets[v] -= 1;
            preds[offsets[v]] = u as u32;
        }
        ReverseGraph {
            offsets,
            preds,
            terminal,
        }
    }

    pub fn states(&self) -> usize {
        self.terminal.len()
    }

    pub fn edges(&self) -> usize {
        self.preds.len()
    }

    pub fn predecessors(&self, v: usize) -> &[u32] {
        &self.preds[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        self.terminal[v]
    }

    pub fn terminal_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.terminal
            .iter()
            .enumerate()
            .filter_map(|(i, &t)| t.then_some(i))
    }

    /// Forward adjacency reconstructed from the reversed edges.
    pub fn forward(&self) -> ForwardGraph {
        let n = self.states();
        let mut offsets = vec![0usize; n + 1];
        for &u in &self.preds {
            offsets[u as usize] += 1;
        }
        prefix_ends(&mut offsets);
        let mut succs = vec![0u32; self.preds.len()];
        for v in (0..n).rev() {
            for &u in self.predecessors(v) {
                offsets[u as usize] -= 1;
                succs[offsets[u as usize]] = v as u32;
            }
        }
        ForwardGraph { offsets, succs }
    }
}

/// Turns per-vertex counts in `offsets[..n]` into end positions, with
/// `offsets[n]` the total. Decrementing on insertion then leaves start
/// positions behind.
fn prefix_ends(offsets: &mut [usize]) {
    let n = offsets.len() - 1;
    let mut sum = 0;
    for o in offsets[..n].iter_mut() {
        sum += *o;
        *o = sum;
    }
    offsets[n] = sum;
}

#[derive(Debug, Clone)]
pub struct ForwardGraph {
    offsets: Vec<usize>,
    succs: Vec<u32>,
}

impl ForwardGraph {
    pub fn successors(&self, u: usize) -> &[u32] {
        &self.succs[self.offsets[u]..self.offsets[u + 1]]
    }
}

/// Replays stage one over every stored state (same transition selections,
/// same canonicalization) in two passes, counting then filling, so the
/// structure costs one index per edge.
pub fn build_reverse<M: Model + ?Sized>(
    expander: &mut Expander<'_, M>,
    store: &StateStore,
    expected_edges: u64,
) -> Result<ReverseGraph, GraphError> {
    let n = store.len();
    let mut offsets = vec![0usize; n + 1];
    let mut terminal = vec![false; n];
    let mut replayed = 0u64;
    let mut base = vec![0u64; store.stride()];

    for (u, term) in terminal.iter_mut().enumerate() {
        base.copy_from_slice(store.get(u));
        let mut missing = false;
        let e = expander.expand(&base, |_, _, succ| match store.lookup(succ) {
            Some(v) => {
                offsets[v] += 1;
                replayed += 1;
                ControlFlow::Continue(())
            }
            None => {
                missing = true;
                ControlFlow::Break(())
            }
        })?;
        if missing {
            return Err(GraphError::UnknownSuccessor { from: u });
        }
        *term = e.terminal;
    }
    if replayed != expected_edges {
        return Err(GraphError::EdgeCountMismatch {
            expected: expected_edges,
            replayed,
        });
    }
    prefix_ends(&mut offsets);

    let mut preds = vec![0u32; replayed as usize];
    let mut filled = 0u64;
    for u in 0..n {
        base.copy_from_slice(store.get(u));
        let mut missing = false;
        expander.expand(&base, |_, _, succ| match store.lookup(succ) {
            Some(v) if filled < replayed && offsets[v] > 0 => {
                offsets[v] -= 1;
                preds[offsets[v]] = u as u32;
                filled += 1;
                ControlFlow::Continue(())
            }
            _ => {
                missing = true;
                ControlFlow::Break(())
            }
        })?;
        if missing {
            return Err(GraphError::UnknownSuccessor { from: u });
        }
    }
    if filled != replayed || offsets[0] != 0 || offsets.windows(2).any(|w| w[0] > w[1]) {
        return Err(GraphError::EdgeCountMismatch {
            expected: replayed,
            replayed: filled,
        });
    }
    Ok(ReverseGraph {
        offsets,
        preds,
        terminal,
    })
}

/// Marks every state from which some seed is reachable.
pub fn backward_reach(rg: &ReverseGraph, seeds: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut marked = vec![false; rg.states()];
    let mut queue = VecDeque::new();
    for s in seeds {
        if !marked[s] {
            marked[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &u in rg.predecessors(v) {
            let u = u as usize;
            if !marked[u] {
                marked[u] = true;
                queue.push_back(u);
            }
        }
    }
    marked
}

/// Lowest state from which neither a terminal state nor a state accepted by
/// `is_may_progress` is reachable.
pub fn check_may_progress<M: Model + ?Sized>(
    expander: &Expander<'_, M>,
    store: &StateStore,
    rg: &ReverseGraph,
) -> Result<Option<usize>, Fault> {
    let mut seeds = Vec::new();
    for v in 0..store.len() {
        if rg.is_terminal(v) || expander.cb.is_may_progress(store.get(v))? {
            seeds.push(v);
        }
    }
    let marked = backward_reach(rg, seeds);
    Ok(marked.iter().position(|&m| !m))
}

/// A cycle through states rejected by `is_must_progress`, listed in edge
/// order and starting at its lowest-indexed state.
pub fn check_must_progress<M: Model + ?Sized>(
    expander: &Expander<'_, M>,
    store: &StateStore,
    rg: &ReverseGraph,
) -> Result<Option<Vec<usize>>, Fault> {
    let mut bad = vec![false; store.len()];
    for (v, b) in bad.iter_mut().enumerate() {
        *b = !expander.cb.is_must_progress(store.get(v))?;
    }
    let fwd = rg.forward();
    Ok(find_cycle(&fwd, &bad).map(rotate_to_min))
}

/// Iterative three-colour depth-first search restricted to `inside`.
pub fn find_cycle(fwd: &ForwardGraph, inside: &[bool]) -> Option<Vec<usize>> {
    const WHITE: u8 = 0;
    const GREY: u8 = 1;
    const BLACK: u8 = 2;
    let mut colour = vec![WHITE; inside.len()];
    // (vertex, next successor position)
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for root in 0..inside.len() {
        if !inside[root] || colour[root] != WHITE {
            continue;
        }
        colour[root] = GREY;
        stack.push((root, 0));
        while let Some(&mut (u, ref mut pos)) = stack.last_mut() {
            let succs = fwd.successors(u);
            if *pos == succs.len() {
                colour[u] = BLACK;
                stack.pop();
                continue;
            }
            let v = succs[*pos] as usize;
            *pos += 1;
            if !inside[v] {
                continue;
            }
            match colour[v] {
                WHITE => {
                    colour[v] = GREY;
                    stack.push((v, 0));
                }
                GREY => {
                    let start = stack.iter().position(|&(w, _)| w == v).unwrap();
                    return Some(stack[start..].iter().map(|&(w, _)| w).collect());
                }
                _ => {}
            }
        }
    }
    None
}

fn rotate_to_min(mut cycle: Vec<usize>) -> Vec<usize> {
    if let Some((k, _)) = cycle.iter().enumerate().min_by_key(|&(_, v)| *v) {
        cycle.rotate_left(k);
    }
    cycle
}

/// States from which no terminal state is reachable, if any exist: the
/// lowest such state plus a walk from it that follows the first fired
/// transition until a state repeats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonTermination {
    /// Lowest-indexed state that cannot reach a terminal state.
    pub first_bad: usize,
    /// Walk starting at `first_bad`.
    pub walk: Vec<usize>,
    /// Position in `walk` where the repeating part begins.
    pub cycle_start: usize,
}

pub fn check_termination<M: Model + ?Sized>(
    expander: &mut Expander<'_, M>,
    store: &StateStore,
    rg: &ReverseGraph,
) -> Result<Option<NonTermination>, GraphError> {
    let marked = backward_reach(rg, rg.terminal_states());
    let Some(first_bad) = marked.iter().position(|&m| !m) else {
        return Ok(None);
    };
    let mut walk = vec![first_bad];
    let mut pos_in_walk = std::collections::HashMap::new();
    pos_in_walk.insert(first_bad, 0usize);
    let mut cur = first_bad;
    loop {
        let base = store.get(cur).to_vec();
        let next = expander
            .first_successor(&base)?
            .and_then(|s| store.lookup(&s))
            .ok_or(GraphError::UnknownSuccessor { from: cur })?;
        if let Some(&k) = pos_in_walk.get(&next) {
            return Ok(Some(NonTermination {
                first_bad,
                walk,
                cycle_start: k,
            }));
        }
        pos_in_walk.insert(next, walk.len());
        walk.push(next);
        cur = next;
    }
}
