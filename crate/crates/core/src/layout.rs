//! State variable declarations and their packing into fixed-width words.
//!
//! A declaration (scalar or whole array) is placed as a unit. If the most
//! recently employed word still has room for all `count * bits` bits, the
//! declaration goes there; otherwise it starts a fresh word and may span
//! several. An element never straddles a word boundary: when it would, it
//! moves to the next word and the skipped bits stay zero.

use std::fmt;

use thiserror::Error;

/// Default width of a state variable element when none is given.
pub const DEFAULT_BITS: u32 = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LayoutError {
    #[error("state variable `{name}`: width {bits} is outside 1..={word_width}")]
    BadWidth {
        name: String,
        bits: u32,
        word_width: u32,
    },
    #[error("state variable `{name}`: element count must be at least 1")]
    EmptyArray { name: String },
    #[error("unsupported word width {0}; use 32 or 64")]
    BadWordWidth(u32),
}

/// One `state_var` declaration: `count` elements of `bits` bits each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub count: usize,
    pub bits: u32,
}

impl VarDecl {
    pub fn scalar(name: impl Into<String>, bits: u32) -> Self {
        Self::array(name, 1, bits)
    }

    pub fn array(name: impl Into<String>, count: usize, bits: u32) -> Self {
        VarDecl {
            name: name.into(),
            count,
            bits,
        }
    }
}

/// Handle of a declared variable: its position in the declaration list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElemPos {
    pub word: u32,
    pub shift: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Placed {
    decl: VarDecl,
    mask: u64,
    elems: Vec<ElemPos>,
}

/// Packed positions of every declared variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateLayout {
    word_width: u32,
    vars: Vec<Placed>,
    total_words: usize,
}

impl StateLayout {
    /// Places `decls` in order into words of `word_width` bits (32 or 64).
    pub fn build(word_width: u32, decls: &[VarDecl]) -> Result<Self, LayoutError> {
        if word_width != 32 && word_width != 64 {
            return Err(LayoutError::BadWordWidth(word_width));
        }
        let mut vars = Vec::with_capacity(decls.len());
        // (index of most recently employed word, bits used in it)
        let mut current: Option<(u32, u32)> = None;
        let mut total_words = 0usize;

        for decl in decls {
            if decl.bits == 0 || decl.bits > word_width {
                return Err(LayoutError::BadWidth {
                    name: decl.name.clone(),
                    bits: decl.bits,
                    word_width,
                });
            }
            if decl.count == 0 {
                return Err(LayoutError::EmptyArray {
                    name: decl.name.clone(),
                });
            }
            let need = decl.count as u64 * decl.bits as u64;
            let (mut word, mut used) = match current {
                Some((w, used)) if (word_width - used) as u64 >= need => (w, used),
                _ => (total_words as u32, 0),
            };
            let mut elems = Vec::with_capacity(decl.count);
            for _ in 0..decl.count {
                if used + decl.bits > word_width {
                    word += 1;
                    used = 0;
                }
                elems.push(ElemPos { word, shift: used });
                used += decl.bits;
            }
            total_words = total_words.max(word as usize + 1);
            current = Some((word, used));
            let mask = if decl.bits == 64 {
                u64::MAX
            } else {
                (1u64 << decl.bits) - 1
            };
            vars.push(Placed {
                decl: decl.clone(),
                mask,
                elems,
            });
        }

        Ok(StateLayout {
            word_width,
            vars,
            total_words,
        })
    }

    pub fn word_width(&self) -> u32 {
        self.word_width
    }

    pub fn total_words(&self) -> usize {
        self.total_words
    }

    pub fn decls(&self) -> impl Iterator<Item = &VarDecl> {
        self.vars.iter().map(|p| &p.decl)
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn var(&self, name: &str) -> Option<Var> {
        self.vars.iter().position(|p| p.decl.name == name).map(Var)
    }

    pub fn decl(&self, var: Var) -> &VarDecl {
        &self.vars[var.0].decl
    }

    /// Word and bit offset of element `elem` of `var`.
    pub fn placement(&self, var: Var, elem: usize) -> ElemPos {
        self.slot(var, elem).1
    }

    #[inline]
    fn slot(&self, var: Var, elem: usize) -> (&Placed, ElemPos) {
        let placed = self
            .vars
            .get(var.0)
            .unwrap_or_else(|| panic!("unknown state variable #{}", var.0));
        let pos = *placed.elems.get(elem).unwrap_or_else(|| {
            panic!(
                "index {elem} out of range for state variable `{}[{}]`",
                placed.decl.name, placed.decl.count
            )
        });
        (placed, pos)
    }

    /// Reads one element. Panics on an unknown variable or element.
    #[inline]
    pub fn read(&self, words: &[u64], var: Var, elem: usize) -> u64 {
        let (placed, pos) = self.slot(var, elem);
        (words[pos.word as usize] >> pos.shift) & placed.mask
    }

    /// Writes one element, leaving every other bit untouched. Panics if
    /// `value` does not fit the variable's width.
    #[inline]
    pub fn write(&self, words: &mut [u64], var: Var, elem: usize, value: u64) {
        let (placed, pos) = self.slot(var, elem);
        assert!(
            value & !placed.mask == 0,
            "value {value} does not fit {}-bit state variable `{}`",
            placed.decl.bits,
            placed.decl.name
        );
        let w = &mut words[pos.word as usize];
        *w = (*w & !(placed.mask << pos.shift)) | (value << pos.shift);
    }

    /// Mask of the bits of word `word` that belong to some variable.
    pub fn used_bits(&self, word: usize) -> u64 {
        let mut bits = 0u64;
        for placed in &self.vars {
            for pos in &placed.elems {
                if pos.word as usize == word {
                    bits |= placed.mask << pos.shift;
                }
            }
        }
        bits
    }
}

/// One system state: `total_words` packed words. Uncovered bits are zero.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PackedState(Box<[u64]>);

impl PackedState {
    /// The all-zero state, in which every variable holds 0.
    pub fn zeroed(layout: &StateLayout) -> Self {
        PackedState(vec![0; layout.total_words()].into_boxed_slice())
    }

    pub fn from_words(words: &[u64]) -> Self {
        PackedState(words.into())
    }

    pub fn words(&self) -> &[u64] {
        &self.0
    }

    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.0
    }

    pub fn read(&self, layout: &StateLayout, var: Var, elem: usize) -> u64 {
        layout.read(&self.0, var, elem)
    }

    pub fn write(&mut self, layout: &StateLayout, var: Var, elem: usize, value: u64) {
        layout.write(&mut self.0, var, elem, value)
    }
}

impl fmt::Debug for PackedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PackedState[")?;
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{w:#x}")?;
        }
        write!(f, "]")
    }
}
