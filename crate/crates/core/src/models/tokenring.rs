//! Demand-driven token ring: `n` customers and `n` servers, one token.
//!
//! Transitions `0..n` are customer requests/leaves, `n..2n` customer
//! terminations, `2n..3n` the servers.

use crate::layout::{Var, VarDecl, DEFAULT_BITS};
use crate::model::{Capabilities, Checks, Model, View, ViewMut};
use crate::stubborn::Obligations;

/// Customer local states: idle, requested, critical, terminated.
pub const C: Var = Var(0);
/// Server local states: idle, waiting for token, waiting for customer.
pub const S: Var = Var(1);
/// Token flags.
pub const T: Var = Var(2);
/// Current index of the original customer 0 (only with `symm_must`).
pub const C0NOW: Var = Var(3);

const CUSTOMER_CHARS: [char; 4] = ['-', 'R', 'C', ' '];
const SERVER_CHARS: [char; 3] = ['i', 'w', 't'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Correct,
    /// The idle server does not check whether the next server already holds
    /// the token before propagating the wait request.
    FaultyGuard,
    /// After its customer leaves, the server keeps the token and goes back
    /// to waiting instead of handing the token on.
    ModifiedProgress,
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "correct" => Ok(Variant::Correct),
            "faulty-guard" | "faulty_guard" => Ok(Variant::FaultyGuard),
            "modified-progress" | "modified_progress" => Ok(Variant::ModifiedProgress),
            other => Err(format!(
                "unknown token ring variant `{other}` (expected correct, faulty-guard or modified-progress)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TokenRing {
    n: usize,
    variant: Variant,
    symm_must: bool,
}

impl TokenRing {
    pub fn new(n: usize) -> Self {
        Self::with_variant(n, Variant::Correct)
    }

    /// Panics unless `2 <= n`, and `n <= 256` when tracking customer 0.
    pub fn with_variant(n: usize, variant: Variant) -> Self {
        assert!(n >= 2, "token ring needs at least two stations");
        TokenRing {
            n,
            variant,
            symm_must: false,
        }
    }

    /// Tracks the original customer 0 across symmetry rotations.
    pub fn symm_must(mut self, on: bool) -> Self {
        assert!(
            !on || self.n <= 1 << DEFAULT_BITS,
            "customer tracking supports at most 256 stations"
        );
        self.symm_must = on;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    #[inline]
    pub fn next(&self, i: usize) -> usize {
        (i + 1) % self.n
    }

    #[inline]
    pub fn prev(&self, i: usize) -> usize {
        (i + self.n - 1) % self.n
    }

    fn c0now(&self, s: &View<'_>) -> usize {
        if self.symm_must {
            s.get(C0NOW, 0) as usize
        } else {
            0
        }
    }

    /// Whether idle server `i` starts waiting for the token.
    fn idle_server_wakes(&self, s: &View<'_>, i: usize) -> bool {
        let nx = self.next(i);
        let next_waits = s.get(S, nx) == 1;
        s.get(C, i) == 1
            || match self.variant {
                Variant::FaultyGuard => next_waits,
                _ => next_waits && !s.flag(T, nx),
            }
    }

    fn fire_server(&self, s: &mut ViewMut<'_>, i: usize) -> bool {
        let nx = self.next(i);
        match s.get(S, i) {
            0 => {
                if self.idle_server_wakes(&s.as_view(), i) {
                    s.set(S, i, 1);
                    return true;
                }
                false
            }
            1 => {
                if !s.flag(T, i) {
                    return false;
                }
                if s.get(C, i) == 1 {
                    s.set(C, i, 2);
                    s.set(S, i, 2);
                    return true;
                }
                if s.get(S, nx) == 1 {
                    s.set(T, i, 0);
                    s.set(T, nx, 1);
                    s.set(S, i, 0);
                    return true;
                }
                false
            }
            2 => {
                if s.get(C, i) == 2 {
                    return false;
                }
                match self.variant {
                    Variant::ModifiedProgress => s.set(S, i, 1),
                    _ => {
                        s.set(T, i, 0);
                        s.set(T, nx, 1);
                        s.set(S, i, 0);
                    }
                }
                true
            }
            _ => {
                s.fail("Illegal local state");
                false
            }
        }
    }
}

impl Model for TokenRing {
    fn declarations(&self) -> Vec<VarDecl> {
        let mut d = vec![
            VarDecl::array("C", self.n, 2),
            VarDecl::array("S", self.n, 2),
            VarDecl::array("T", self.n, 1),
        ];
        if self.symm_must {
            d.push(VarDecl::scalar("c0now", DEFAULT_BITS));
        }
        d
    }

    fn init(&self, s: &mut ViewMut<'_>) -> usize {
        s.set(T, 1, 1);
        3 * self.n
    }

    fn fire(&self, s: &mut ViewMut<'_>, t: usize) -> bool {
        let n = self.n;
        if t >= 2 * n {
            return self.fire_server(s, t - 2 * n);
        }
        if t >= n {
            let i = t - n;
            if s.get(C, i) == 0 {
                s.set(C, i, 3);
                return true;
            }
            return false;
        }
        match s.get(C, t) {
            0 => {
                s.set(C, t, 1);
                true
            }
            2 => {
                s.set(C, t, 0);
                true
            }
            _ => false,
        }
    }

    fn format_state(&self, s: &View<'_>) -> String {
        let mut line = String::with_capacity(3 * self.n);
        for i in 0..self.n {
            line.push(CUSTOMER_CHARS[s.get(C, i) as usize]);
            line.push(
                SERVER_CHARS
                    .get(s.get(S, i) as usize)
                    .copied()
                    .unwrap_or('?'),
            );
            line.push(if s.flag(T, i) { '*' } else { ' ' });
        }
        line
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            check_state: true,
            check_deadlock: true,
            may_progress: false,
            must_progress: true,
            stubborn: true,
            symmetry: true,
        }
    }

    fn default_checks(&self) -> Checks {
        Checks {
            state: true,
            deadlock: true,
            ..Checks::none()
        }
    }

    fn check_state(&self, s: &View<'_>) -> Option<String> {
        let critical = (0..self.n).filter(|&i| s.get(C, i) == 2).count();
        (critical >= 2).then(|| "Mutual exclusion violated".to_string())
    }

    fn check_deadlock(&self, s: &View<'_>) -> Option<String> {
        (0..self.n)
            .any(|i| s.get(C, i) != 3)
            .then(|| "Customer not terminated".to_string())
    }

    fn is_must_progress(&self, s: &View<'_>) -> bool {
        s.get(C, self.c0now(s)) != 1
    }

    fn next_stubborn(&self, s: &View<'_>, t: usize, em: &mut Obligations) {
        let n = self.n;
        if t >= 2 * n {
            let i = t - 2 * n;
            match s.get(S, i) {
                0 => {
                    if self.idle_server_wakes(s, i) {
                        // Without the guard, a wake-up caused by a waiting
                        // next server that holds the token can be undone by
                        // that server.
                        let nx = self.next(i);
                        if self.variant == Variant::FaultyGuard && s.get(C, i) != 1 && s.flag(T, nx)
                        {
                            em.stb(nx + 2 * n);
                        }
                        return;
                    }
                    em.stb(i).stb(self.next(i) + 2 * n);
                }
                1 => {
                    if !s.flag(T, i) {
                        em.stb(self.prev(i) + 2 * n);
                        return;
                    }
                    // Granting or passing moves S[i] off waiting, which can
                    // disable a wake-up of the previous server in the faulty
                    // ring.
                    if self.variant == Variant::FaultyGuard
                        && (s.get(C, i) == 1 || s.get(S, self.next(i)) == 1)
                    {
                        em.stb(self.prev(i) + 2 * n);
                    }
                    if s.get(C, i) == 1 {
                        return;
                    }
                    if s.get(S, self.next(i)) == 1 {
                        em.stb(i);
                        return;
                    }
                    em.stb(i).stb(self.next(i) + 2 * n);
                }
                2 if s.get(C, i) == 2 => {
                    em.stb(i);
                }
                _ => {}
            }
            return;
        }
        if t >= n {
            em.stb(t - n);
            return;
        }
        match s.get(C, t) {
            0 => {
                em.stb(t + n).stb(t + 2 * n);
            }
            1 => {
                em.stb(t + 2 * n);
            }
            2 => em.stb_all(),
            _ => {}
        }
    }

    /// Rotates the ring so that the token holder becomes server 1.
    fn symmetry_representative(&self, s: &mut ViewMut<'_>) {
        let n = self.n;
        let Some(holder) = (0..n).find(|&i| s.flag(T, i)) else {
            return;
        };
        let shift = self.prev(holder);
        if shift == 0 {
            return;
        }
        let mut tmp = vec![0u64; n];
        for var in [C, S, T] {
            for (j, slot) in tmp.iter_mut().enumerate() {
                *slot = s.get(var, (shift + j) % n);
            }
            for (j, &v) in tmp.iter().enumerate() {
                s.set(var, j, v);
            }
        }
        if self.symm_must {
            let c0 = s.get(C0NOW, 0) as usize;
            s.set(C0NOW, 0, ((c0 + n - shift) % n) as u64);
        }
    }
}
