//! Finite alphabets, blocks, block sets, and the admissible-subgroup family
//! of a finite module alphabet.
//!
//! Symbols are indexed by integers. A module alphabet `(Z/m)^k` indexes the
//! vector `v` by its big-endian base-`m` digits, so the index of the zero
//! vector is `0` and the index of `(a, b)` in a direct sum is `a * |B| + b`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShiftError};
use crate::modlin::{chain_stabilize, ChainOutcome, LinMap, ModRing, Submodule};
use crate::universe::FiniteWindow;

pub type Symbol = u32;

/// Default cap on enumerated blocks.
pub const DEFAULT_MAX_BLOCKS: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Alphabet {
    Set { symbols: Vec<String> },
    Module { ring: ModRing, rank: usize },
}

impl Alphabet {
    pub fn set<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(ShiftError::AlphabetMismatch("alphabet must be nonempty".into()));
        }
        let distinct: BTreeSet<&String> = symbols.iter().collect();
        if distinct.len() != symbols.len() {
            return Err(ShiftError::AlphabetMismatch("duplicate symbol names".into()));
        }
        for s in &symbols {
            if s.is_empty() || s.contains([',', ':', '.', ' ', '=', ';']) {
                return Err(ShiftError::AlphabetMismatch(format!("bad symbol name `{s}`")));
            }
        }
        Ok(Alphabet::Set { symbols })
    }

    /// The set `{0, 1, ..., n-1}` with decimal names.
    pub fn numbered(n: usize) -> Self {
        Alphabet::Set { symbols: (0..n).map(|i| i.to_string()).collect() }
    }

    pub fn module(ring: ModRing, rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(ShiftError::AlphabetMismatch("module rank must be positive".into()));
        }
        let size = (ring.modulus() as u128).pow(rank as u32);
        if size > (1u128 << 31) {
            return Err(ShiftError::CapExceeded { what: "module alphabet size".into(), needed: size, cap: 1 << 31 });
        }
        Ok(Alphabet::Module { ring, rank })
    }

    pub fn size(&self) -> u32 {
        match self {
            Alphabet::Set { symbols } => symbols.len() as u32,
            Alphabet::Module { ring, rank } => ring.modulus().pow(*rank as u32),
        }
    }

    pub fn is_module(&self) -> bool {
        matches!(self, Alphabet::Module { .. })
    }

    pub fn ring(&self) -> Option<ModRing> {
        match self {
            Alphabet::Module { ring, .. } => Some(*ring),
            Alphabet::Set { .. } => None,
        }
    }

    /// Module rank (coordinates per symbol); `None` for set alphabets.
    pub fn rank(&self) -> Option<usize> {
        match self {
            Alphabet::Module { rank, .. } => Some(*rank),
            Alphabet::Set { .. } => None,
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        0..self.size()
    }

    pub fn to_vector(&self, s: Symbol) -> Vec<u32> {
        match self {
            Alphabet::Module { ring, rank } => {
                let m = ring.modulus();
                let mut v = vec![0; *rank];
                let mut s = s;
                for i in (0..*rank).rev() {
                    v[i] = s % m;
                    s /= m;
                }
                v
            }
            Alphabet::Set { .. } => vec![s],
        }
    }

    pub fn from_vector(&self, v: &[u32]) -> Symbol {
        match self {
            Alphabet::Module { ring, .. } => v.iter().fold(0, |acc, &x| acc * ring.modulus() + x % ring.modulus()),
            Alphabet::Set { .. } => v[0],
        }
    }

    /// Concatenated coordinate vector of a block over a module alphabet.
    pub fn block_vector(&self, block: &[Symbol]) -> Vec<u32> {
        block.iter().flat_map(|&s| self.to_vector(s)).collect()
    }

    pub fn block_from_vector(&self, v: &[u32]) -> Vec<Symbol> {
        let k = self.rank().unwrap_or(1);
        v.chunks(k).map(|c| self.from_vector(c)).collect()
    }

    pub fn name(&self, s: Symbol) -> String {
        match self {
            Alphabet::Set { symbols } => symbols[s as usize].clone(),
            Alphabet::Module { .. } => {
                let v: Vec<String> = self.to_vector(s).iter().map(|x| x.to_string()).collect();
                v.join("_")
            }
        }
    }

    pub fn parse_symbol(&self, name: &str) -> Result<Symbol> {
        match self {
            Alphabet::Set { symbols } => symbols
                .iter()
                .position(|s| s == name)
                .map(|i| i as Symbol)
                .ok_or_else(|| ShiftError::UnknownSymbol(name.into())),
            Alphabet::Module { ring, rank } => {
                let parts: Vec<&str> = name.split('_').collect();
                if parts.len() != *rank {
                    return Err(ShiftError::UnknownSymbol(name.into()));
                }
                let v = parts
                    .iter()
                    .map(|p| p.parse::<u32>().ok().filter(|&x| x < ring.modulus()))
                    .collect::<Option<Vec<u32>>>()
                    .ok_or_else(|| ShiftError::UnknownSymbol(name.into()))?;
                Ok(self.from_vector(&v))
            }
        }
    }

    fn single_char_names(&self) -> bool {
        self.symbols().all(|s| self.name(s).chars().count() == 1)
    }

    /// Text form of a block: concatenated when every symbol name is one
    /// character, dot-separated otherwise.
    pub fn format_block(&self, block: &[Symbol]) -> String {
        let names: Vec<String> = block.iter().map(|&s| self.name(s)).collect();
        if self.single_char_names() {
            names.concat()
        } else {
            names.join(".")
        }
    }

    pub fn parse_block(&self, text: &str) -> Result<Vec<Symbol>> {
        let text = text.trim();
        if text.contains('.') || !self.single_char_names() {
            text.split('.').map(|p| self.parse_symbol(p)).collect()
        } else {
            text.chars().map(|c| self.parse_symbol(&c.to_string())).collect()
        }
    }

    pub fn add(&self, a: Symbol, b: Symbol) -> Result<Symbol> {
        let ring = self.ring().ok_or_else(|| ShiftError::AlphabetMismatch("addition needs a module alphabet".into()))?;
        let v: Vec<u32> = self.to_vector(a).iter().zip(self.to_vector(b)).map(|(&x, y)| ring.add(x, y)).collect();
        Ok(self.from_vector(&v))
    }

    pub fn sub(&self, a: Symbol, b: Symbol) -> Result<Symbol> {
        let ring = self.ring().ok_or_else(|| ShiftError::AlphabetMismatch("subtraction needs a module alphabet".into()))?;
        let v: Vec<u32> = self.to_vector(a).iter().zip(self.to_vector(b)).map(|(&x, y)| ring.sub(x, y)).collect();
        Ok(self.from_vector(&v))
    }

    /// `A ⊕ B` (modules over the same ring) or `A × B` (sets).
    pub fn direct_sum(&self, other: &Alphabet) -> Result<Alphabet> {
        match (self, other) {
            (Alphabet::Module { ring: r1, rank: k1 }, Alphabet::Module { ring: r2, rank: k2 }) => {
                if r1 != r2 {
                    return Err(ShiftError::ModulusMismatch(r1.modulus(), r2.modulus()));
                }
                Alphabet::module(*r1, k1 + k2)
            }
            (Alphabet::Set { .. }, Alphabet::Set { .. }) => {
                let mut names = Vec::with_capacity((self.size() * other.size()) as usize);
                for a in self.symbols() {
                    for b in other.symbols() {
                        names.push(format!("{}_{}", self.name(a), other.name(b)));
                    }
                }
                Alphabet::set(names)
            }
            _ => Err(ShiftError::AlphabetMismatch("direct sum of a set and a module alphabet".into())),
        }
    }

    /// Components of a symbol of `self ⊕ other`.
    pub fn split_pair(&self, other: &Alphabet, s: Symbol) -> (Symbol, Symbol) {
        let _ = self;
        (s / other.size(), s % other.size())
    }

    pub fn join_pair(&self, other: &Alphabet, a: Symbol, b: Symbol) -> Symbol {
        let _ = self;
        a * other.size() + b
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alphabet::Set { symbols } => write!(f, "set {}", symbols.join(",")),
            Alphabet::Module { ring, rank } => write!(f, "module m={} k={}", ring.modulus(), rank),
        }
    }
}

/// `base^len` if it fits a block code.
pub fn code_space(base: u32, len: usize) -> Result<u64> {
    (base as u64)
        .checked_pow(len as u32)
        .ok_or_else(|| ShiftError::CapExceeded { what: "block code space".into(), needed: u128::MAX, cap: u64::MAX })
}

/// Big-endian mixed-radix code of a block; numeric order equals lexicographic order.
#[inline]
pub fn encode(base: u32, block: &[Symbol]) -> u64 {
    block.iter().fold(0u64, |acc, &s| acc * base as u64 + s as u64)
}

#[inline]
pub fn decode(base: u32, len: usize, mut code: u64) -> Vec<Symbol> {
    let mut out = vec![0; len];
    for i in (0..len).rev() {
        out[i] = (code % base as u64) as Symbol;
        code /= base as u64;
    }
    out
}

/// A block: one symbol per window position, in the window's canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Block {
    pub window: FiniteWindow,
    pub values: Vec<Symbol>,
}

impl Block {
    pub fn new(window: FiniteWindow, values: Vec<Symbol>) -> Result<Self> {
        if window.len() != values.len() {
            return Err(ShiftError::InvalidWindow(format!(
                "block has {} values for window {window}",
                values.len()
            )));
        }
        Ok(Block { window, values })
    }
}

/// A set of blocks on a common window, stored as block codes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockSet {
    window: FiniteWindow,
    base: u32,
    codes: BTreeSet<u64>,
}

impl BlockSet {
    pub fn new(window: FiniteWindow, base: u32) -> Result<Self> {
        code_space(base, window.len())?;
        Ok(BlockSet { window, base, codes: BTreeSet::new() })
    }

    pub fn from_codes(window: FiniteWindow, base: u32, codes: BTreeSet<u64>) -> Result<Self> {
        code_space(base, window.len())?;
        Ok(BlockSet { window, base, codes })
    }

    pub fn window(&self) -> &FiniteWindow {
        &self.window
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn codes(&self) -> &BTreeSet<u64> {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn insert(&mut self, block: &[Symbol]) -> bool {
        debug_assert_eq!(block.len(), self.window.len());
        self.codes.insert(encode(self.base, block))
    }

    pub fn contains(&self, block: &[Symbol]) -> bool {
        block.len() == self.window.len() && self.codes.contains(&encode(self.base, block))
    }

    pub fn blocks(&self) -> impl Iterator<Item = Vec<Symbol>> + '_ {
        let len = self.window.len();
        self.codes.iter().map(move |&c| decode(self.base, len, c))
    }

    /// Restriction of every block to a sub-window.
    pub fn project(&self, sub: &FiniteWindow) -> Result<BlockSet> {
        let idx = positions_in(&self.window, sub)?;
        let mut out = BlockSet::new(sub.clone(), self.base)?;
        for b in self.blocks() {
            let p: Vec<Symbol> = idx.iter().map(|&i| b[i]).collect();
            out.insert(&p);
        }
        Ok(out)
    }

    pub fn to_blocks(&self) -> Vec<Block> {
        self.blocks().map(|values| Block { window: self.window.clone(), values }).collect()
    }
}

/// Indices of `sub`'s elements inside `window`.
pub fn positions_in(window: &FiniteWindow, sub: &FiniteWindow) -> Result<Vec<usize>> {
    sub.elements()
        .iter()
        .map(|e| window.index_of(e).ok_or_else(|| ShiftError::NotContained(sub.to_string(), window.to_string())))
        .collect()
}

/// All blocks of `alphabet` on `window`, in canonical order.
pub fn enumerate_blocks(alphabet: &Alphabet, window: &FiniteWindow, cap: u64) -> Result<Vec<Block>> {
    let base = alphabet.size();
    let needed = (base as u128).pow(window.len() as u32);
    if needed > cap as u128 {
        return Err(ShiftError::CapExceeded { what: format!("blocks on {window}"), needed, cap });
    }
    Ok((0..needed as u64)
        .map(|c| Block { window: window.clone(), values: decode(base, window.len(), c) })
        .collect())
}

/// The diagonal `{(a, ..., a)} ⊆ A^n` of a module alphabet.
pub fn diagonal(alphabet: &Alphabet, n: usize) -> Result<Submodule> {
    let (ring, k) = match alphabet {
        Alphabet::Module { ring, rank } => (*ring, *rank),
        Alphabet::Set { .. } => return Err(ShiftError::AlphabetMismatch("diagonal needs a module alphabet".into())),
    };
    let gens: Vec<Vec<u32>> = (0..k)
        .map(|j| {
            let mut v = vec![0; n * k];
            for copy in 0..n {
                v[copy * k + j] = 1;
            }
            v
        })
        .collect();
    Submodule::span(ring, n * k, &gens)
}

/// The admissible subgroups of powers of a finite module alphabet `A = (Z/m)^k`:
/// every submodule of `A^n`. Coordinates of `A^n` are grouped by copy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibleFamily {
    ring: ModRing,
    rank: usize,
}

impl AdmissibleFamily {
    pub fn new(alphabet: &Alphabet) -> Result<Self> {
        match alphabet {
            Alphabet::Module { ring, rank } => Ok(AdmissibleFamily { ring: *ring, rank: *rank }),
            Alphabet::Set { .. } => Err(ShiftError::AlphabetMismatch(
                "set alphabets carry no group structure; every subset is allowed on the set track".into(),
            )),
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::Module { ring: self.ring, rank: self.rank }
    }

    pub fn ring(&self) -> ModRing {
        self.ring
    }

    pub fn ambient(&self, n: usize) -> usize {
        n * self.rank
    }

    pub fn trivial(&self, n: usize) -> Submodule {
        Submodule::zero(self.ring, self.ambient(n))
    }

    pub fn whole(&self, n: usize) -> Submodule {
        Submodule::full(self.ring, self.ambient(n))
    }

    pub fn diagonal(&self, n: usize) -> Submodule {
        diagonal(&self.alphabet(), n).expect("module alphabet")
    }

    fn ring_coords(&self, copies: &[usize]) -> Vec<usize> {
        copies.iter().flat_map(|&c| (0..self.rank).map(move |j| c * self.rank + j)).collect()
    }

    /// Image of `h ⊆ A^m` under the projection `A^m -> A^n` picking copies `injection`.
    pub fn project(&self, h: &Submodule, injection: &[usize]) -> Result<Submodule> {
        h.project(&self.ring_coords(injection))
    }

    /// Preimage of `h ⊆ A^n` under the projection `A^m -> A^n` picking copies `injection`.
    pub fn preimage(&self, h: &Submodule, m: usize, injection: &[usize]) -> Result<Submodule> {
        h.preimage_under_projection(self.ambient(m), &self.ring_coords(injection))
    }

    /// Whether a set of vectors of `A^n` is an admissible subgroup, i.e. a submodule.
    pub fn is_admissible(&self, elements: &BTreeSet<Vec<u32>>) -> bool {
        let zero_in = elements.iter().next().is_some_and(|v| v.iter().all(|&x| x == 0));
        zero_in
            && elements.iter().all(|a| {
                elements.iter().all(|b| {
                    let s: Vec<u32> = a.iter().zip(b).map(|(&x, &y)| self.ring.add(x, y)).collect();
                    elements.contains(&s)
                })
            })
    }

    /// Graph of the fibered product `x ↦ (φ_α(x))_α` of linear maps `A^m -> A^n`.
    pub fn fibered_product(&self, maps: &[LinMap]) -> Result<LinMap> {
        let first = maps.first().ok_or_else(|| ShiftError::Invalid("empty fibered product".into()))?;
        let dom = first.domain_rank();
        let mut rows = Vec::new();
        for f in maps {
            if f.domain_rank() != dom {
                return Err(ShiftError::RankMismatch { expected: dom, got: f.domain_rank() });
            }
            rows.extend(f.matrix().row_vecs());
        }
        Ok(LinMap::new(crate::modlin::Matrix::from_rows(self.ring, dom, &rows)?))
    }

    /// Every submodule of `A^n`, by closure from cyclic submodules.
    pub fn enumerate(&self, n: usize, cap: usize) -> Result<Vec<Submodule>> {
        let r = self.ambient(n);
        let m = self.ring.modulus();
        let total = (m as u128).pow(r as u32);
        if total > cap as u128 {
            return Err(ShiftError::CapExceeded { what: format!("vectors of A^{n}"), needed: total, cap: cap as u64 });
        }
        let vectors: Vec<Vec<u32>> = (0..total as u64).map(|c| decode(m, r, c)).collect();
        let cyclic: BTreeSet<Submodule> = vectors
            .iter()
            .map(|v| Submodule::span(self.ring, r, std::slice::from_ref(v)).unwrap())
            .collect();
        let mut seen: BTreeSet<Submodule> = BTreeSet::new();
        let mut queue = VecDeque::new();
        let zero = Submodule::zero(self.ring, r);
        seen.insert(zero.clone());
        queue.push_back(zero);
        while let Some(s) = queue.pop_front() {
            for c in &cyclic {
                let t = s.sum(c)?;
                if !seen.contains(&t) {
                    if seen.len() >= cap {
                        return Err(ShiftError::CapExceeded {
                            what: format!("submodule lattice of A^{n}"),
                            needed: seen.len() as u128 + 1,
                            cap: cap as u64,
                        });
                    }
                    seen.insert(t.clone());
                    queue.push_back(t);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }

    /// Follows a descending chain of admissible subgroups to its stable value.
    pub fn stabilize(&self, chain: impl IntoIterator<Item = Submodule>, cap: usize) -> ChainOutcome<Submodule> {
        chain_stabilize(chain, cap, 1)
    }
}

impl PartialOrd for Submodule {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Submodule {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.ring().modulus(), self.rank(), self.rows()).cmp(&(other.ring().modulus(), other.rank(), other.rows()))
    }
}
