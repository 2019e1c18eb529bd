//! Subshift presentations and exact restriction over `Z` and `N`.
//!
//! A one-dimensional SFT is realized by a transfer graph whose vertices are
//! locally admissible words of a fixed width and whose edges are the
//! admissible words one symbol longer. After pruning dead vertices, path
//! words are exactly the globally admissible blocks.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use crate::alphabet::{code_space, decode, encode, Alphabet, BlockSet, Symbol, DEFAULT_MAX_BLOCKS};
use crate::cellular::CellularAutomaton;
use crate::error::{Result, ShiftError};
use crate::modlin::Submodule;
use crate::universe::{Element, FiniteWindow, Universe};

/// Enumeration limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub max_blocks: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_blocks: DEFAULT_MAX_BLOCKS }
    }
}

impl Caps {
    /// Defaults, overridden by `SHIFTLAB_MAX_BLOCKS` when set.
    pub fn from_env() -> Self {
        let mut caps = Caps::default();
        if let Some(v) = std::env::var("SHIFTLAB_MAX_BLOCKS").ok().and_then(|s| s.trim().parse().ok()) {
            caps.max_blocks = v;
        }
        caps
    }

    pub(crate) fn check(&self, what: impl FnOnce() -> String, needed: u128) -> Result<()> {
        if needed > self.max_blocks as u128 {
            return Err(ShiftError::CapExceeded { what: what(), needed, cap: self.max_blocks });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Allowed {
    /// Block codes on the defining window.
    Blocks(BTreeSet<u64>),
    /// A submodule of `A^D`.
    Linear(Submodule),
}

/// `Σ(A^G; D, P)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SftPresentation {
    alphabet: Alphabet,
    window: FiniteWindow,
    allowed: Allowed,
}

impl SftPresentation {
    pub fn from_blocks(alphabet: Alphabet, window: FiniteWindow, blocks: impl IntoIterator<Item = Vec<Symbol>>) -> Result<Self> {
        code_space(alphabet.size(), window.len())?;
        let base = alphabet.size();
        let mut codes = BTreeSet::new();
        for b in blocks {
            if b.len() != window.len() {
                return Err(ShiftError::InvalidWindow(format!("block of length {} on window {window}", b.len())));
            }
            if b.iter().any(|&s| s >= base) {
                return Err(ShiftError::UnknownSymbol(format!("{b:?}")));
            }
            codes.insert(encode(base, &b));
        }
        Ok(SftPresentation { alphabet, window, allowed: Allowed::Blocks(codes) })
    }

    pub fn from_codes(alphabet: Alphabet, window: FiniteWindow, codes: BTreeSet<u64>) -> Result<Self> {
        let space = code_space(alphabet.size(), window.len())?;
        if codes.iter().any(|&c| c >= space) {
            return Err(ShiftError::Invalid("block code out of range".into()));
        }
        Ok(SftPresentation { alphabet, window, allowed: Allowed::Blocks(codes) })
    }

    /// All blocks on `window` except the forbidden ones.
    pub fn from_forbidden(
        alphabet: Alphabet,
        window: FiniteWindow,
        forbidden: impl IntoIterator<Item = Vec<Symbol>>,
        caps: &Caps,
    ) -> Result<Self> {
        let space = code_space(alphabet.size(), window.len())?;
        caps.check(|| format!("blocks on {window}"), space as u128)?;
        let bad: BTreeSet<u64> = forbidden.into_iter().map(|b| encode(alphabet.size(), &b)).collect();
        let codes = (0..space).filter(|c| !bad.contains(c)).collect();
        Ok(SftPresentation { alphabet, window, allowed: Allowed::Blocks(codes) })
    }

    pub fn linear(alphabet: Alphabet, window: FiniteWindow, allowed: Submodule) -> Result<Self> {
        let (ring, k) = match &alphabet {
            Alphabet::Module { ring, rank } => (*ring, *rank),
            Alphabet::Set { .. } => return Err(ShiftError::AlphabetMismatch("linear SFT needs a module alphabet".into())),
        };
        if allowed.ring() != ring {
            return Err(ShiftError::ModulusMismatch(allowed.ring().modulus(), ring.modulus()));
        }
        if allowed.rank() != k * window.len() {
            return Err(ShiftError::RankMismatch { expected: k * window.len(), got: allowed.rank() });
        }
        Ok(SftPresentation { alphabet, window, allowed: Allowed::Linear(allowed) })
    }

    /// The full shift `A^G`, presented on the window `{1_G}`.
    pub fn full(alphabet: Alphabet, universe: Universe) -> Self {
        let window = FiniteWindow::singleton_identity(universe);
        match &alphabet {
            Alphabet::Module { ring, rank } => {
                let allowed = Allowed::Linear(Submodule::full(*ring, *rank));
                SftPresentation { alphabet, window, allowed }
            }
            Alphabet::Set { .. } => {
                let codes = (0..alphabet.size() as u64).collect();
                SftPresentation { alphabet, window, allowed: Allowed::Blocks(codes) }
            }
        }
    }

    pub fn universe(&self) -> Universe {
        self.window.universe()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn window(&self) -> &FiniteWindow {
        &self.window
    }

    pub fn allowed(&self) -> &Allowed {
        &self.allowed
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.allowed, Allowed::Linear(_))
    }

    pub fn allows(&self, block: &[Symbol]) -> bool {
        match &self.allowed {
            Allowed::Blocks(codes) => codes.contains(&encode(self.alphabet.size(), block)),
            Allowed::Linear(s) => s.member(&self.alphabet.block_vector(block)).unwrap_or(false),
        }
    }

    /// The allowed set as explicit blocks.
    pub fn allowed_blocks(&self, caps: &Caps) -> Result<BlockSet> {
        let base = self.alphabet.size();
        match &self.allowed {
            Allowed::Blocks(codes) => BlockSet::from_codes(self.window.clone(), base, codes.clone()),
            Allowed::Linear(s) => {
                caps.check(|| format!("allowed blocks on {}", self.window), s.size())?;
                let mut out = BlockSet::new(self.window.clone(), base)?;
                for v in s.elements() {
                    out.insert(&self.alphabet.block_from_vector(&v));
                }
                Ok(out)
            }
        }
    }

    /// Same subshift with the allowed set given as explicit blocks.
    pub fn as_blocks(&self, caps: &Caps) -> Result<SftPresentation> {
        let codes = self.allowed_blocks(caps)?.codes().clone();
        Ok(SftPresentation { alphabet: self.alphabet.clone(), window: self.window.clone(), allowed: Allowed::Blocks(codes) })
    }

    pub(crate) fn constraint(&self) -> Result<Constraint<'_>> {
        let offsets = relative_offsets(&self.window)?;
        Ok(Constraint { offsets, test: Box::new(move |b: &[Symbol]| self.allows(b)), prefix: self.prefix_test() })
    }

    /// Test for proper prefixes of window blocks (in window order): passes
    /// exactly when the prefix extends to an allowed block.
    pub(crate) fn prefix_test(&self) -> Option<BlockTest<'_>> {
        let n = self.window.len();
        if n < 2 {
            return None;
        }
        match &self.allowed {
            Allowed::Blocks(codes) => {
                let base = self.alphabet.size() as u64;
                let mut sets = vec![HashSet::new(); n];
                for &c in codes {
                    let mut c = c;
                    for j in (1..n).rev() {
                        c /= base;
                        sets[j].insert(c);
                    }
                }
                Some(Box::new(move |b: &[Symbol]| sets[b.len()].contains(&encode(base as u32, b))))
            }
            Allowed::Linear(s) => {
                let k = self.alphabet.rank()?;
                let proj: Vec<Submodule> =
                    (0..n).map(|j| s.project(&(0..j * k).collect::<Vec<_>>()).unwrap_or_else(|_| s.clone())).collect();
                Some(Box::new(move |b: &[Symbol]| {
                    proj[b.len()].member(&self.alphabet.block_vector(b)).unwrap_or(true)
                }))
            }
        }
    }

    /// Transfer graph on all locally admissible words of width `max(span - 1, 1)`.
    pub fn transfer_graph(&self, caps: &Caps) -> Result<TransferGraph> {
        self.system()?.full_graph(1, caps)
    }

    pub(crate) fn system(&self) -> Result<System<'_>> {
        Ok(System { universe: self.universe(), base: self.alphabet.size(), constraints: vec![self.constraint()?] })
    }
}

/// Offsets of a window placed at its first position (`Z`) or at `0` (`N`).
pub(crate) fn relative_offsets(window: &FiniteWindow) -> Result<Vec<usize>> {
    let ints = window.ints()?;
    let shift = match window.universe() {
        Universe::Z => ints.first().copied().unwrap_or(0),
        Universe::N => 0,
        u => return Err(ShiftError::UnsupportedUniverse(u.to_string())),
    };
    Ok(ints.iter().map(|&v| (v - shift) as usize).collect())
}

/// The image of an SFT under a cellular automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoficPresentation {
    code: CellularAutomaton,
}

impl SoficPresentation {
    pub fn new(code: CellularAutomaton) -> Self {
        SoficPresentation { code }
    }

    /// An SFT viewed as the image of itself under the identity.
    pub fn of_sft(sft: &SftPresentation, caps: &Caps) -> Result<Self> {
        Ok(SoficPresentation { code: CellularAutomaton::identity(sft.clone(), caps)? })
    }

    pub fn source(&self) -> &SftPresentation {
        self.code.domain()
    }

    pub fn code(&self) -> &CellularAutomaton {
        &self.code
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.code.codomain()
    }

    pub fn universe(&self) -> Universe {
        self.code.universe()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Presentation {
    Sft(SftPresentation),
    Sofic(SoficPresentation),
}

impl Presentation {
    pub fn alphabet(&self) -> &Alphabet {
        match self {
            Presentation::Sft(s) => s.alphabet(),
            Presentation::Sofic(s) => s.alphabet(),
        }
    }

    pub fn universe(&self) -> Universe {
        match self {
            Presentation::Sft(s) => s.universe(),
            Presentation::Sofic(s) => s.universe(),
        }
    }
}

impl From<SftPresentation> for Presentation {
    fn from(s: SftPresentation) -> Self {
        Presentation::Sft(s)
    }
}

impl From<SoficPresentation> for Presentation {
    fn from(s: SoficPresentation) -> Self {
        Presentation::Sofic(s)
    }
}

pub(crate) type BlockTest<'a> = Box<dyn Fn(&[Symbol]) -> bool + 'a>;

/// One window constraint: the block at `t + offsets` must pass `test` for every translate `t`.
/// `prefix`, when present, rejects values on the first `j` offsets that no
/// allowed block starts with.
pub(crate) struct Constraint<'a> {
    pub offsets: Vec<usize>,
    pub test: BlockTest<'a>,
    pub prefix: Option<BlockTest<'a>>,
}

impl Constraint<'_> {
    fn reach(&self) -> usize {
        self.offsets.last().copied().unwrap_or(0)
    }
}

/// A conjunction of window constraints over one alphabet.
pub(crate) struct System<'a> {
    pub universe: Universe,
    pub base: u32,
    pub constraints: Vec<Constraint<'a>>,
}

impl<'a> System<'a> {
    pub fn reach(&self) -> usize {
        self.constraints.iter().map(Constraint::reach).max().unwrap_or(0)
    }

    /// Checks every constraint translate whose last position is `end`.
    pub fn check_at(&self, word: &[Symbol], end: usize) -> bool {
        let mut buf = Vec::new();
        self.constraints.iter().all(|c| {
            if c.offsets.is_empty() {
                return end != 0 || (c.test)(&[]);
            }
            let r = c.reach();
            if r > end {
                return true;
            }
            let t = end - r;
            buf.clear();
            buf.extend(c.offsets.iter().map(|&o| word[t + o]));
            (c.test)(&buf)
        })
    }

    /// Checks the prefix tests of translates that start at or before `pos` and
    /// are not complete at `pos`. A word failing one lies on no infinite path.
    fn check_prefixes_at(&self, word: &[Symbol], pos: usize) -> bool {
        let mut buf = Vec::new();
        self.constraints.iter().all(|c| {
            let Some(prefix) = &c.prefix else { return true };
            let lo = (pos + 1).saturating_sub(c.reach());
            (lo..=pos).all(|t| {
                buf.clear();
                buf.extend(c.offsets.iter().map(|&o| t + o).take_while(|&q| q <= pos).map(|q| word[q]));
                buf.is_empty() || buf.len() == c.offsets.len() || prefix(&buf)
            })
        })
    }

    /// Graph for computing restrictions: words failing a prefix test are left out.
    pub fn graph(&self, min_width: usize, caps: &Caps) -> Result<TransferGraph> {
        TransferGraph::build(self, self.reach().max(min_width).max(1), true, caps)
    }

    /// Graph on every locally admissible word.
    pub fn full_graph(&self, min_width: usize, caps: &Caps) -> Result<TransferGraph> {
        TransferGraph::build(self, self.reach().max(min_width).max(1), false, caps)
    }

    /// Exact set of globally admissible words on `0..len`, projected to `idx` (ascending).
    pub fn restrict(&self, idx: &[usize], len: usize, caps: &Caps) -> Result<BTreeSet<u64>> {
        let graph = self.graph(0, caps)?;
        graph.project_paths(idx, len, caps)
    }
}

/// De Bruijn-style graph of locally admissible words of width `w`, optionally
/// leaving out words with a partial constraint window that no allowed block
/// extends (such words lie on no infinite path).
#[derive(Debug, Clone)]
pub struct TransferGraph {
    universe: Universe,
    base: u32,
    width: usize,
    vertices: Vec<u64>,
    succ: Vec<Vec<u32>>,
    pred: Vec<Vec<u32>>,
    forward_alive: Vec<bool>,
    backward_alive: Vec<bool>,
}

impl TransferGraph {
    pub(crate) fn build(system: &System<'_>, width: usize, prefixes: bool, caps: &Caps) -> Result<Self> {
        if !system.universe.is_one_dimensional() {
            return Err(ShiftError::UnsupportedUniverse(system.universe.to_string()));
        }
        if width < system.reach() || width == 0 {
            return Err(ShiftError::Invalid(format!("graph width {width} below constraint reach {}", system.reach())));
        }
        code_space(system.base, width + 1)?;
        let base = system.base;

        let mut vertices = Vec::new();
        let mut word = vec![0; width];
        let mut stack: Vec<(usize, Symbol)> = vec![(0, 0)];
        // depth-first enumeration in lexicographic order
        while let Some((pos, sym)) = stack.pop() {
            if sym >= base {
                continue;
            }
            stack.push((pos, sym + 1));
            word[pos] = sym;
            if !system.check_at(&word, pos) || (prefixes && !system.check_prefixes_at(&word, pos)) {
                continue;
            }
            if pos + 1 == width {
                vertices.push(encode(base, &word));
                caps.check(|| format!("transfer graph vertices of width {width}"), vertices.len() as u128)?;
            } else {
                stack.push((pos + 1, 0));
            }
        }
        vertices.sort_unstable();

        let top = (base as u64).pow(width as u32 - 1);
        let mut succ = vec![Vec::new(); vertices.len()];
        let mut pred = vec![Vec::new(); vertices.len()];
        let mut edge = vec![0; width + 1];
        for (i, &v) in vertices.iter().enumerate() {
            edge[..width].copy_from_slice(&decode(base, width, v));
            for s in 0..base {
                edge[width] = s;
                if !system.check_at(&edge, width) {
                    continue;
                }
                let next = (v % top) * base as u64 + s as u64;
                if let Ok(j) = vertices.binary_search(&next) {
                    succ[i].push(j as u32);
                    pred[j].push(i as u32);
                }
            }
        }
        let forward_alive = prune(&succ, &pred);
        let backward_alive = prune(&pred, &succ);
        Ok(TransferGraph { universe: system.universe, base, width, vertices, succ, pred, forward_alive, backward_alive })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_word(&self, v: usize) -> Vec<Symbol> {
        decode(self.base, self.width, self.vertices[v])
    }

    pub fn successors(&self, v: usize) -> &[u32] {
        &self.succ[v]
    }

    pub fn predecessors(&self, v: usize) -> &[u32] {
        &self.pred[v]
    }

    /// Last symbol of a vertex word.
    pub fn last_symbol(&self, v: usize) -> Symbol {
        (self.vertices[v] % self.base as u64) as Symbol
    }

    /// Vertex starts an infinite forward path.
    pub fn forward_alive(&self, v: usize) -> bool {
        self.forward_alive[v]
    }

    /// Vertex ends an infinite backward path.
    pub fn backward_alive(&self, v: usize) -> bool {
        self.backward_alive[v]
    }

    /// Vertex lies in the essential subgraph: on a bi-infinite path (`Z`) or
    /// starting an infinite forward path (`N`).
    pub fn essential(&self, v: usize) -> bool {
        self.forward_alive[v] && (self.universe == Universe::N || self.backward_alive[v])
    }

    pub fn essential_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.essential(v)).collect()
    }

    /// The essential subgraph as a new graph; pruning it again removes nothing.
    pub fn essentialize(&self) -> TransferGraph {
        let keep: Vec<usize> = self.essential_vertices();
        let mut index = HashMap::new();
        for (new, &old) in keep.iter().enumerate() {
            index.insert(old as u32, new as u32);
        }
        let mut succ = vec![Vec::new(); keep.len()];
        let mut pred = vec![Vec::new(); keep.len()];
        for (new, &old) in keep.iter().enumerate() {
            for t in &self.succ[old] {
                if let Some(&j) = index.get(t) {
                    succ[new].push(j);
                    pred[j as usize].push(new as u32);
                }
            }
        }
        let forward_alive = prune(&succ, &pred);
        let backward_alive = prune(&pred, &succ);
        TransferGraph {
            universe: self.universe,
            base: self.base,
            width: self.width,
            vertices: keep.iter().map(|&v| self.vertices[v]).collect(),
            succ,
            pred,
            forward_alive,
            backward_alive,
        }
    }

    /// Codes of the admissible words on `0..len` restricted to `idx`.
    pub(crate) fn project_paths(&self, idx: &[usize], len: usize, caps: &Caps) -> Result<BTreeSet<u64>> {
        let base = self.base as u64;
        let w = self.width;
        let total = len.max(w);
        let mut marked = vec![false; total];
        for &i in idx {
            marked[i] = true;
        }
        let mut states: HashSet<(u32, u64)> = HashSet::new();
        for v in self.essential_vertices() {
            let word = self.vertex_word(v);
            let code = (0..w).filter(|&i| marked[i]).fold(0u64, |acc, i| acc * base + word[i] as u64);
            states.insert((v as u32, code));
        }
        for q in w..total {
            let mut next = HashSet::new();
            for &(v, code) in &states {
                for &t in &self.succ[v as usize] {
                    if !self.forward_alive[t as usize] {
                        continue;
                    }
                    let c = if marked[q] { code * base + self.last_symbol(t as usize) as u64 } else { code };
                    next.insert((t, c));
                }
            }
            caps.check(|| "restriction states".into(), next.len() as u128)?;
            states = next;
        }
        Ok(states.into_iter().map(|(_, c)| c).collect())
    }

    /// Graphviz rendering with stable vertex order; dead vertices are dashed.
    pub fn to_dot(&self, alphabet: &Alphabet) -> String {
        let mut out = String::from("digraph transfer {\n  rankdir=LR;\n");
        for v in 0..self.vertices.len() {
            let style = if self.essential(v) { "solid" } else { "dashed" };
            let _ = writeln!(out, "  v{v} [label=\"{}\", style={style}];", alphabet.format_block(&self.vertex_word(v)));
        }
        for v in 0..self.vertices.len() {
            for &t in &self.succ[v] {
                let _ = writeln!(out, "  v{v} -> v{t} [label=\"{}\"];", alphabet.name(self.last_symbol(t as usize)));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Vertices with an infinite path along `out` edges.
fn prune(out: &[Vec<u32>], inc: &[Vec<u32>]) -> Vec<bool> {
    let n = out.len();
    let mut degree: Vec<usize> = out.iter().map(Vec::len).collect();
    let mut alive = vec![true; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| degree[v] == 0).collect();
    while let Some(v) = queue.pop_front() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for &u in &inc[v] {
            let u = u as usize;
            if alive[u] {
                degree[u] -= 1;
                if degree[u] == 0 {
                    queue.push_back(u);
                }
            }
        }
    }
    alive
}

/// Restriction of a subshift to a window: block set plus, for linear
/// presentations, the same set as a submodule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    pub blocks: BlockSet,
    pub submodule: Option<Submodule>,
}

/// Translates an integer window to the coordinates of its hull word.
/// Returns `(idx, len)`; for `N` the hull starts at `0`.
pub(crate) fn hull_layout(window: &FiniteWindow) -> Result<(Vec<usize>, usize)> {
    let ints = window.ints()?;
    let lo = match window.universe() {
        Universe::Z => ints.first().copied().unwrap_or(0),
        Universe::N => 0,
        u => return Err(ShiftError::UnsupportedUniverse(u.to_string())),
    };
    let idx: Vec<usize> = ints.iter().map(|&v| (v - lo) as usize).collect();
    let len = idx.last().map_or(0, |&l| l + 1);
    Ok((idx, len))
}

pub(crate) fn restrict_system(system: &System<'_>, window: &FiniteWindow, caps: &Caps) -> Result<BTreeSet<u64>> {
    code_space(system.base, window.len())?;
    let (idx, len) = hull_layout(window)?;
    system.restrict(&idx, len, caps)
}

/// `Σ_E` for an SFT.
pub fn restrict_sft(s: &SftPresentation, window: &FiniteWindow, caps: &Caps) -> Result<Restriction> {
    same_universe(s.universe(), window.universe())?;
    let codes = restrict_system(&s.system()?, window, caps)?;
    let blocks = BlockSet::from_codes(window.clone(), s.alphabet().size(), codes)?;
    let submodule = match s.allowed() {
        Allowed::Linear(_) => Some(span_blocks(s.alphabet(), &blocks)?),
        _ => None,
    };
    Ok(Restriction { blocks, submodule })
}

/// Submodule generated by a block set over a module alphabet.
pub(crate) fn span_blocks(alphabet: &Alphabet, blocks: &BlockSet) -> Result<Submodule> {
    let Alphabet::Module { ring, rank } = alphabet else {
        return Err(ShiftError::AlphabetMismatch(format!("{alphabet} is not a module alphabet")));
    };
    let n = rank * blocks.window().len();
    let mut sub = Submodule::zero(*ring, n);
    for b in blocks.blocks() {
        let v = alphabet.block_vector(&b);
        if !sub.member(&v)? {
            sub = Submodule::span(*ring, n, &[sub.rows(), &[v][..]].concat())?;
        }
    }
    Ok(sub)
}

/// `Δ_E` for an SFT or sofic presentation.
pub fn restrict(p: &Presentation, window: &FiniteWindow, caps: &Caps) -> Result<Restriction> {
    match p {
        Presentation::Sft(s) => restrict_sft(s, window, caps),
        Presentation::Sofic(s) => {
            let map = s.code().induced_map(window, caps)?;
            let blocks = map.image()?;
            let submodule = match (&map.linear, s.alphabet()) {
                (Some(f), Alphabet::Module { .. }) => Some(f.image_of(map.domain_submodule.as_ref().unwrap())?),
                _ => None,
            };
            Ok(Restriction { blocks, submodule })
        }
    }
}

fn same_universe(a: Universe, b: Universe) -> Result<()> {
    if a != b {
        return Err(ShiftError::MixedUniverse(a.to_string(), b.to_string()));
    }
    Ok(())
}

/// Re-presents `s` on a larger window `E ⊇ D` with allowed set `Σ_E`.
pub fn window_change(s: &SftPresentation, window: &FiniteWindow, caps: &Caps) -> Result<SftPresentation> {
    if !s.window().is_subset(window) {
        return Err(ShiftError::NotContained(s.window().to_string(), window.to_string()));
    }
    let r = restrict_sft(s, window, caps)?;
    match r.submodule {
        Some(sub) => SftPresentation::linear(s.alphabet().clone(), window.clone(), sub),
        None => SftPresentation::from_codes(s.alphabet().clone(), window.clone(), r.blocks.codes().clone()),
    }
}

/// Self-test of restriction equality: with `Λ = Σ(A; F, Δ_F)`, checks `Λ_E = Δ_E`.
pub fn restriction_consistency_check(
    p: &Presentation,
    big: &FiniteWindow,
    small: &FiniteWindow,
    caps: &Caps,
) -> Result<bool> {
    if !small.is_subset(big) {
        return Err(ShiftError::NotContained(small.to_string(), big.to_string()));
    }
    let on_big = restrict(p, big, caps)?;
    let lambda = SftPresentation::from_codes(p.alphabet().clone(), big.clone(), on_big.blocks.codes().clone())?;
    let lhs = restrict_sft(&lambda, small, caps)?;
    let rhs = restrict(p, small, caps)?;
    Ok(lhs.blocks == rhs.blocks)
}

/// `S1 ⊆ S2`: every block of `S1` on `S2`'s window passes `S2`'s constraint.
pub fn sft_included(s1: &SftPresentation, s2: &SftPresentation, caps: &Caps) -> Result<bool> {
    same_universe(s1.universe(), s2.universe())?;
    if s1.alphabet().size() != s2.alphabet().size() {
        return Err(ShiftError::AlphabetMismatch(format!("{} vs {}", s1.alphabet(), s2.alphabet())));
    }
    let offsets = relative_offsets(s2.window())?;
    let probe = FiniteWindow::from_ints(s1.universe(), offsets.iter().map(|&o| o as i64))?;
    let r = restrict_sft(s1, &probe, caps)?;
    let ok = r.blocks.blocks().all(|b| s2.allows(&b));
    Ok(ok)
}

/// Exact equality of the presented SFTs.
pub fn sft_equal(s1: &SftPresentation, s2: &SftPresentation, caps: &Caps) -> Result<bool> {
    Ok(sft_included(s1, s2, caps)? && sft_included(s2, s1, caps)?)
}

/// Compares restrictions to `[0, len)` for every `len ≤ depth`.
pub fn sofic_equal_to_depth(p1: &Presentation, p2: &Presentation, depth: usize, caps: &Caps) -> Result<bool> {
    same_universe(p1.universe(), p2.universe())?;
    for len in 1..=depth {
        let w = FiniteWindow::interval(p1.universe(), 0, len as i64 - 1)?;
        if restrict(p1, &w, caps)?.blocks != restrict(p2, &w, caps)?.blocks {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Nondeterministic automaton reading a presentation's language: states are
/// essential graph vertices, all initial and accepting.
pub struct LabeledGraph {
    alphabet_size: u32,
    edges: Vec<Vec<(Symbol, u32)>>,
}

impl LabeledGraph {
    pub fn from_presentation(p: &Presentation, caps: &Caps) -> Result<Self> {
        match p {
            Presentation::Sft(s) => {
                let system = s.system()?;
                let g = system.graph(1, caps)?.essentialize();
                let edges = (0..g.vertex_count())
                    .map(|v| {
                        let label = g.vertex_word(v)[0];
                        g.successors(v).iter().map(|&t| (label, t)).collect()
                    })
                    .collect();
                Ok(LabeledGraph { alphabet_size: s.alphabet().size(), edges })
            }
            Presentation::Sofic(s) => {
                let code = s.code();
                let system = code.domain().system()?;
                let mem = relative_offsets(code.memory())?;
                let reach = mem.last().copied().unwrap_or(0);
                let g = system.graph(reach.max(1), caps)?.essentialize();
                let w = g.width();
                let mut edges = Vec::with_capacity(g.vertex_count());
                let mut word = vec![0; w + 1];
                let mut block = vec![0; mem.len()];
                for v in 0..g.vertex_count() {
                    word[..w].copy_from_slice(&g.vertex_word(v));
                    let mut out = Vec::new();
                    for &t in g.successors(v) {
                        word[w] = g.last_symbol(t as usize);
                        for (b, &o) in block.iter_mut().zip(&mem) {
                            *b = word[o];
                        }
                        let label = code
                            .eval(&block)
                            .ok_or_else(|| ShiftError::RuleUndefined(code.domain().alphabet().format_block(&block)))?;
                        out.push((label, t));
                    }
                    edges.push(out);
                }
                Ok(LabeledGraph { alphabet_size: s.alphabet().size(), edges })
            }
        }
    }

    pub fn state_count(&self) -> usize {
        self.edges.len()
    }

    fn step(&self, states: &[u32], sym: Symbol) -> Vec<u32> {
        let mut out: Vec<u32> = states
            .iter()
            .flat_map(|&s| self.edges[s as usize].iter().filter(|(l, _)| *l == sym).map(|&(_, t)| t))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Both automata accept the same words.
    pub fn same_language(&self, other: &LabeledGraph, caps: &Caps) -> Result<bool> {
        self.compare(other, true, caps)
    }

    /// Joint subset construction; `Some(false)` as soon as a word separates the
    /// languages in the direction(s) requested.
    fn compare(&self, other: &LabeledGraph, both_ways: bool, caps: &Caps) -> Result<bool> {
        if self.alphabet_size != other.alphabet_size {
            return Ok(false);
        }
        let start = (
            (0..self.state_count() as u32).collect::<Vec<_>>(),
            (0..other.state_count() as u32).collect::<Vec<_>>(),
        );
        let differs = |a: &Vec<u32>, b: &Vec<u32>| {
            (!a.is_empty() && b.is_empty()) || (both_ways && a.is_empty() && !b.is_empty())
        };
        if differs(&start.0, &start.1) {
            return Ok(false);
        }
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(start.clone());
        queue.push_back(start);
        while let Some((a, b)) = queue.pop_front() {
            for sym in 0..self.alphabet_size {
                let na = self.step(&a, sym);
                let nb = other.step(&b, sym);
                if differs(&na, &nb) {
                    return Ok(false);
                }
                if na.is_empty() || (!both_ways && nb.is_empty()) {
                    continue;
                }
                let key = (na, nb);
                if !seen.contains(&key) {
                    caps.check(|| "subset pairs in language comparison".into(), seen.len() as u128 + 1)?;
                    seen.insert(key.clone());
                    queue.push_back(key);
                }
            }
        }
        Ok(true)
    }
}

/// Exact equality of two presented subshifts via their finite-word languages.
pub fn subshift_equal(p1: &Presentation, p2: &Presentation, caps: &Caps) -> Result<bool> {
    same_universe(p1.universe(), p2.universe())?;
    let g1 = LabeledGraph::from_presentation(p1, caps)?;
    let g2 = LabeledGraph::from_presentation(p2, caps)?;
    g1.compare(&g2, true, caps)
}

/// Exact inclusion `p1 ⊆ p2`.
pub fn subshift_included(p1: &Presentation, p2: &Presentation, caps: &Caps) -> Result<bool> {
    same_universe(p1.universe(), p2.universe())?;
    let g1 = LabeledGraph::from_presentation(p1, caps)?;
    let g2 = LabeledGraph::from_presentation(p2, caps)?;
    g1.compare(&g2, false, caps)
}

/// Upper approximation of `Σ_E` over a free monoid: blocks on `E` that extend
/// to a locally admissible pattern on `E·B_t` (words of length `≤ t`
/// appended on the right).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedRestriction {
    pub blocks: BlockSet,
    pub depth: usize,
    pub approximate: bool,
}

pub fn restrict_bounded(s: &SftPresentation, window: &FiniteWindow, depth: usize, caps: &Caps) -> Result<BoundedRestriction> {
    let universe = s.universe();
    same_universe(universe, window.universe())?;
    let rank = match universe {
        Universe::Free(r) => r,
        u => return Err(ShiftError::UnsupportedUniverse(format!("bounded restriction is for free monoids, got {u}"))),
    };
    let ball = FiniteWindow::new(universe, crate::universe::ball(rank, depth))?;
    let region = window.product(&ball)?;
    let base = s.alphabet().size();
    caps.check(|| format!("blocks on {window}"), (base as u128).pow(window.len() as u32))?;

    // order: window positions first, then the rest canonically
    let mut order: Vec<Element> = window.elements().to_vec();
    order.extend(region.elements().iter().filter(|e| !window.contains(e)).cloned());
    let slot: HashMap<&Element, usize> = order.iter().enumerate().map(|(i, e)| (e, i)).collect();

    // constraint instances D·g inside the region, checked once their last slot is set
    let d = s.window().elements();
    let mut by_last: Vec<Vec<Vec<usize>>> = vec![Vec::new(); order.len()];
    if let Some(d0) = d.first() {
        let d0_len = word_len(d0);
        let mut seen = HashSet::new();
        for f in region.elements() {
            let Element::Word(fw) = f else { continue };
            let Element::Word(d0w) = d0 else { continue };
            if !fw.letters().starts_with(d0w.letters()) {
                continue;
            }
            let g = Element::Word(crate::universe::Word::new(fw.letters()[d0_len..].to_vec()));
            if !seen.insert(g.clone()) {
                continue;
            }
            let slots: Option<Vec<usize>> =
                d.iter().map(|x| universe.mul(x, &g).ok().and_then(|p| slot.get(&p).copied())).collect();
            if let Some(slots) = slots {
                let last = *slots.iter().max().unwrap();
                by_last[last].push(slots);
            }
        }
    }

    let n = order.len();
    let mut out = BlockSet::new(window.clone(), base)?;
    let space = code_space(base, window.len())?;
    let mut values = vec![0; n];
    let mut buf = Vec::new();
    let ok_at = |values: &[Symbol], i: usize, buf: &mut Vec<Symbol>| {
        by_last[i].iter().all(|slots| {
            buf.clear();
            buf.extend(slots.iter().map(|&j| values[j]));
            s.allows(buf)
        })
    };
    let k = window.len();
    'blocks: for code in 0..space {
        let head = decode(base, k, code);
        values[..k].copy_from_slice(&head);
        for i in 0..k {
            if !ok_at(&values, i, &mut buf) {
                continue 'blocks;
            }
        }
        if extend(&mut values, k, base, &ok_at, &mut buf) {
            out.insert(&head);
        }
    }
    Ok(BoundedRestriction { blocks: out, depth, approximate: true })
}

fn word_len(e: &Element) -> usize {
    match e {
        Element::Word(w) => w.len(),
        Element::Int(_) => 0,
    }
}

fn extend(
    values: &mut [Symbol],
    i: usize,
    base: u32,
    ok_at: &impl Fn(&[Symbol], usize, &mut Vec<Symbol>) -> bool,
    buf: &mut Vec<Symbol>,
) -> bool {
    if i == values.len() {
        return true;
    }
    for s in 0..base {
        values[i] = s;
        if ok_at(values, i, buf) && extend(values, i + 1, base, ok_at, buf) {
            return true;
        }
    }
    false
}
