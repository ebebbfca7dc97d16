//! Independent oracles and small models shared by the integration suites.
//!
//! Nothing here goes through the explorer, the store, or the reverse graph:
//! states are `Vec<u64>` keys in std collections and transitions are fired
//! straight through the model trait.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use statespace_core::model::ErrSlot;
use statespace_core::models::tokenring::{TokenRing, Variant};
use statespace_core::stubborn::Obligations;
use statespace_core::{
    Capabilities, Checks, Model, PackedState, StateLayout, Var, VarDecl, View, ViewMut,
};

pub type Words = Vec<u64>;

pub fn layout_of<M: Model + ?Sized>(model: &M) -> StateLayout {
    StateLayout::build(64, &model.declarations()).unwrap()
}

pub fn initial_of<M: Model + ?Sized>(model: &M, layout: &StateLayout) -> (Words, usize) {
    let err = ErrSlot::default();
    let mut s = PackedState::zeroed(layout);
    let m = model.init(&mut ViewMut::new(layout, s.words_mut(), &err));
    (s.words().to_vec(), m)
}

pub fn fire_raw<M: Model + ?Sized>(
    model: &M,
    layout: &StateLayout,
    s: &[u64],
    t: usize,
) -> Option<Words> {
    let err = ErrSlot::default();
    let mut w = s.to_vec();
    let en = model.fire(&mut ViewMut::new(layout, &mut w, &err), t);
    assert!(err.take().is_none(), "model error in oracle");
    en.then_some(w)
}

pub fn rep_raw<M: Model + ?Sized>(model: &M, layout: &StateLayout, s: &[u64]) -> Words {
    let err = ErrSlot::default();
    let mut w = s.to_vec();
    model.symmetry_representative(&mut ViewMut::new(layout, &mut w, &err));
    w
}

pub fn with_view<M: Model + ?Sized, R>(
    model: &M,
    layout: &StateLayout,
    s: &[u64],
    f: impl FnOnce(&M, &View<'_>) -> R,
) -> R {
    let err = ErrSlot::default();
    f(model, &View::new(layout, s, &err))
}

/// The full state space, by recursive depth-first enumeration.
pub struct Space {
    pub layout: StateLayout,
    pub initial: Words,
    pub transitions: usize,
    pub states: HashSet<Words>,
    /// Every successful firing: (from, transition, to).
    pub edges: Vec<(Words, usize, Words)>,
}

pub fn enumerate<M: Model + ?Sized>(model: &M) -> Space {
    let layout = layout_of(model);
    let (initial, m) = initial_of(model, &layout);
    let mut states = HashSet::new();
    let mut edges = Vec::new();
    fn visit<M: Model + ?Sized>(
        model: &M,
        layout: &StateLayout,
        m: usize,
        s: Words,
        states: &mut HashSet<Words>,
        edges: &mut Vec<(Words, usize, Words)>,
    ) {
        if !states.insert(s.clone()) {
            return;
        }
        for t in 0..m {
            if let Some(next) = fire_raw(model, layout, &s, t) {
                edges.push((s.clone(), t, next.clone()));
                visit(model, layout, m, next, states, edges);
            }
        }
    }
    visit(model, &layout, m, initial.clone(), &mut states, &mut edges);
    Space {
        layout,
        initial,
        transitions: m,
        states,
        edges,
    }
}

impl Space {
    pub fn successors(&self) -> HashMap<Words, Vec<Words>> {
        let mut succ: HashMap<Words, Vec<Words>> = HashMap::new();
        for s in &self.states {
            succ.entry(s.clone()).or_default();
        }
        for (a, _, b) in &self.edges {
            succ.get_mut(a).unwrap().push(b.clone());
        }
        succ
    }

    pub fn terminal(&self) -> HashSet<Words> {
        self.successors()
            .into_iter()
            .filter_map(|(s, v)| v.is_empty().then_some(s))
            .collect()
    }

    /// Breadth-first distances from the initial state.
    pub fn distances(&self) -> HashMap<Words, usize> {
        let succ = self.successors();
        let mut dist = HashMap::new();
        dist.insert(self.initial.clone(), 0);
        let mut q = VecDeque::from([self.initial.clone()]);
        while let Some(s) = q.pop_front() {
            let d = dist[&s];
            for n in &succ[&s] {
                if !dist.contains_key(n) {
                    dist.insert(n.clone(), d + 1);
                    q.push_back(n.clone());
                }
            }
        }
        dist
    }
}

/// Whether `target` is reachable from `from` by forward search in `succ`.
pub fn reaches<K: std::hash::Hash + Eq + Clone>(
    succ: &HashMap<K, Vec<K>>,
    from: &K,
    target: impl Fn(&K) -> bool,
) -> bool {
    let mut seen = HashSet::from([from.clone()]);
    let mut stack = vec![from.clone()];
    while let Some(s) = stack.pop() {
        if target(&s) {
            return true;
        }
        for n in &succ[&s] {
            if seen.insert(n.clone()) {
                stack.push(n.clone());
            }
        }
    }
    false
}

type FireFn = fn(&TokenRing, &mut ViewMut<'_>, usize) -> Option<bool>;
type CheckFn = fn(&TokenRing, &View<'_>) -> Option<Option<String>>;

/// Token ring with selected callbacks replaced. An override returning
/// `None` falls back to the ring's own behaviour.
pub struct Patched {
    pub ring: TokenRing,
    pub fire: Option<FireFn>,
    pub check_state: Option<CheckFn>,
    pub may_progress: Option<fn(&TokenRing, &View<'_>) -> bool>,
    pub init_extra: Option<fn(&TokenRing, &mut ViewMut<'_>)>,
}

impl Patched {
    pub fn new(ring: TokenRing) -> Self {
        Patched {
            ring,
            fire: None,
            check_state: None,
            may_progress: None,
            init_extra: None,
        }
    }
}

impl Model for Patched {
    fn declarations(&self) -> Vec<VarDecl> {
        self.ring.declarations()
    }
    fn init(&self, s: &mut ViewMut<'_>) -> usize {
        let m = self.ring.init(s);
        if let Some(f) = self.init_extra {
            f(&self.ring, s);
        }
        m
    }
    fn fire(&self, s: &mut ViewMut<'_>, t: usize) -> bool {
        if let Some(f) = self.fire {
            if let Some(r) = f(&self.ring, s, t) {
                return r;
            }
        }
        self.ring.fire(s, t)
    }
    fn format_state(&self, s: &View<'_>) -> String {
        self.ring.format_state(s)
    }
    fn capabilities(&self) -> Capabilities {
        Capabilities {
            may_progress: self.may_progress.is_some(),
            ..self.ring.capabilities()
        }
    }
    fn default_checks(&self) -> Checks {
        self.ring.default_checks()
    }
    fn check_state(&self, s: &View<'_>) -> Option<String> {
        if let Some(f) = self.check_state {
            if let Some(r) = f(&self.ring, s) {
                return r;
            }
        }
        self.ring.check_state(s)
    }
    fn check_deadlock(&self, s: &View<'_>) -> Option<String> {
        self.ring.check_deadlock(s)
    }
    fn is_may_progress(&self, s: &View<'_>) -> bool {
        self.may_progress.is_some_and(|f| f(&self.ring, s))
    }
    fn is_must_progress(&self, s: &View<'_>) -> bool {
        self.ring.is_must_progress(s)
    }
    fn next_stubborn(&self, s: &View<'_>, t: usize, em: &mut Obligations) {
        self.ring.next_stubborn(s, t, em)
    }
    fn symmetry_representative(&self, s: &mut ViewMut<'_>) {
        self.ring.symmetry_representative(s)
    }
}

/// Server grant that ignores token ownership: mutual exclusion breaks.
pub fn broken_mutex(n: usize) -> Patched {
    let mut p = Patched::new(TokenRing::new(n));
    p.fire = Some(|ring, s, t| {
        let n = ring.n();
        if t < 2 * n {
            return None;
        }
        let i = t - 2 * n;
        use statespace_core::models::tokenring::{C, S};
        if s.get(S, i) == 1 && s.get(C, i) == 1 {
            s.set(C, i, 2);
            s.set(S, i, 2);
            return Some(true);
        }
        None
    });
    p
}

pub fn ring(n: usize, variant: Variant) -> TokenRing {
    TokenRing::with_variant(n, variant)
}

/// Two states: s0 -> s1, s1 -> s1. `accept_s1` makes s1 a may-progress
/// state.
pub struct Lasso {
    pub accept_s1: bool,
}

impl Model for Lasso {
    fn declarations(&self) -> Vec<VarDecl> {
        vec![VarDecl::scalar("at", 1)]
    }
    fn init(&self, _: &mut ViewMut<'_>) -> usize {
        1
    }
    fn fire(&self, s: &mut ViewMut<'_>, _: usize) -> bool {
        s.set(Var(0), 0, 1);
        true
    }
    fn format_state(&self, s: &View<'_>) -> String {
        format!("s{}", s.get(Var(0), 0))
    }
    fn capabilities(&self) -> Capabilities {
        Capabilities {
            check_state: true,
            may_progress: true,
            must_progress: true,
            stubborn: true,
            ..Default::default()
        }
    }
    fn is_may_progress(&self, s: &View<'_>) -> bool {
        self.accept_s1 && s.get(Var(0), 0) == 1
    }
    fn is_must_progress(&self, _: &View<'_>) -> bool {
        false
    }
    fn next_stubborn(&self, _: &View<'_>, _: usize, _: &mut Obligations) {}
}
