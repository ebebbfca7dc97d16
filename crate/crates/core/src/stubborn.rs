//! Basic strong stubborn sets built from a model's obligation rules.
//!
//! For every enabled transition the closure of the obligation rules is
//! computed; the closure with the fewest enabled members wins, ties going
//! to the lowest root.

/// Sink through which `next_stubborn` declares obligations.
#[derive(Debug, Clone)]
pub struct Obligations {
    transitions: usize,
    items: Vec<u32>,
    all: bool,
}

impl Obligations {
    pub fn new(transitions: usize) -> Self {
        Obligations {
            transitions,
            items: Vec::new(),
            all: false,
        }
    }

    /// Transition `t` must be in the set too.
    pub fn stb(&mut self, t: usize) -> &mut Self {
        assert!(
            t < self.transitions,
            "obligation names transition {t}, but there are only {}",
            self.transitions
        );
        self.items.push(t as u32);
        self
    }

    /// Every transition must be in the set.
    pub fn stb_all(&mut self) {
        self.all = true;
    }

    pub fn is_all(&self) -> bool {
        self.all
    }

    pub fn emitted(&self) -> &[u32] {
        &self.items
    }

    pub fn clear(&mut self) {
        self.items.clear();
        self.all = false;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StubbornSelection {
    /// The chosen set, ascending.
    pub set: Vec<u32>,
    /// Members of `set` that are enabled, ascending.
    pub enabled_members: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cached {
    Unknown,
    All,
    Items(u32, u32),
}

/// Scratch space for stubborn set computation in one state at a time.
/// Obligations are memoized per state; call [`reset`](Self::reset) before
/// moving to another state.
#[derive(Debug)]
pub struct StubbornSets {
    transitions: usize,
    cache: Vec<Cached>,
    flat: Vec<u32>,
    emitter: Obligations,
    in_set: Vec<bool>,
    enabled_mask: Vec<bool>,
    stack: Vec<u32>,
    members: Vec<u32>,
}

/// Callback that runs `next_stubborn(state, t)` into the emitter.
pub trait EmitFn<E>: FnMut(usize, &mut Obligations) -> Result<(), E> {}
impl<E, F: FnMut(usize, &mut Obligations) -> Result<(), E>> EmitFn<E> for F {}

impl StubbornSets {
    pub fn new(transitions: usize) -> Self {
        StubbornSets {
            transitions,
            cache: vec![Cached::Unknown; transitions],
            flat: Vec::new(),
            emitter: Obligations::new(transitions),
            in_set: vec![false; transitions],
            enabled_mask: vec![false; transitions],
            stack: Vec::new(),
            members: Vec::new(),
        }
    }

    pub fn reset(&mut self) {
        self.cache.fill(Cached::Unknown);
        self.flat.clear();
    }

    fn obligations<E>(&mut self, t: u32, emit: &mut impl EmitFn<E>) -> Result<Cached, E> {
        let c = self.cache[t as usize];
        if c != Cached::Unknown {
            return Ok(c);
        }
        self.emitter.clear();
        emit(t as usize, &mut self.emitter)?;
        let c = if self.emitter.is_all() {
            Cached::All
        } else {
            let start = self.flat.len() as u32;
            self.flat.extend_from_slice(self.emitter.emitted());
            Cached::Items(start, self.flat.len() as u32)
        };
        self.cache[t as usize] = c;
        Ok(c)
    }

    /// Smallest set containing `root` and closed under the obligations.
    /// Leaves the members in `self.members` and returns `true` when the
    /// closure is the full transition set.
    fn close<E>(&mut self, root: u32, emit: &mut impl EmitFn<E>) -> Result<bool, E> {
        for &t in &self.members {
            self.in_set[t as usize] = false;
        }
        self.members.clear();
        self.stack.clear();
        self.in_set[root as usize] = true;
        self.members.push(root);
        self.stack.push(root);
        while let Some(t) = self.stack.pop() {
            match self.obligations(t, emit)? {
                Cached::All => {
                    for &u in &self.members {
                        self.in_set[u as usize] = false;
                    }
                    self.members.clear();
                    self.members.extend(0..self.transitions as u32);
                    self.in_set.fill(true);
                    return Ok(true);
                }
                Cached::Items(a, b) => {
                    for k in a..b {
                        let u = self.flat[k as usize];
                        if !self.in_set[u as usize] {
                            self.in_set[u as usize] = true;
                            self.members.push(u);
                            self.stack.push(u);
                        }
                    }
                }
                Cached::Unknown => unreachable!(),
            }
        }
        Ok(false)
    }

    /// Closure of `root` as an ascending list.
    pub fn closure<E>(&mut self, root: usize, mut emit: impl EmitFn<E>) -> Result<Vec<u32>, E> {
        assert!(root < self.transitions, "root {root} out of range");
        self.close(root as u32, &mut emit)?;
        let mut set = self.members.clone();
        set.sort_unstable();
        Ok(set)
    }

    /// Picks the closure with the fewest enabled members among the closures
    /// of the enabled transitions. `enabled` must be ascending and nonempty.
    pub fn choose<E>(
        &mut self,
        enabled: &[u32],
        mut emit: impl EmitFn<E>,
    ) -> Result<StubbornSelection, E> {
        assert!(!enabled.is_empty(), "no enabled transition to choose from");
        for &t in enabled {
            self.enabled_mask[t as usize] = true;
        }
        let mut best: Option<(usize, Vec<u32>)> = None;
        let mut outcome = Ok(());
        for &root in enabled {
            if let Err(e) = self.close(root, &mut emit) {
                outcome = Err(e);
                break;
            }
            let count = self
                .members
                .iter()
                .filter(|&&t| self.enabled_mask[t as usize])
                .count();
            if best.as_ref().is_none_or(|(c, _)| count < *c) {
                best = Some((count, self.members.clone()));
                if count == 1 {
                    break;
                }
            }
        }
        for &t in enabled {
            self.enabled_mask[t as usize] = false;
        }
        outcome?;
        let (_, mut set) = best.expect("at least one closure");
        set.sort_unstable();
        let enabled_members = set
            .iter()
            .copied()
            .filter(|t| enabled.binary_search(t).is_ok())
            .collect();
        Ok(StubbornSelection {
            set,
            enabled_members,
        })
    }

    /// Re-evaluates the rules of every member without memoization and
    /// returns the first member whose obligations escape the set.
    pub fn find_unclosed<E>(
        &mut self,
        set: &[u32],
        mut emit: impl EmitFn<E>,
    ) -> Result<Option<u32>, E> {
        let full = set.len() == self.transitions;
        for &t in set {
            self.emitter.clear();
            emit(t as usize, &mut self.emitter)?;
            if full {
                continue;
            }
            if self.emitter.is_all()
                || self
                    .emitter
                    .emitted()
                    .iter()
                    .any(|u| set.binary_search(u).is_err())
            {
                return Ok(Some(t));
            }
        }
        Ok(None)
    }
}
