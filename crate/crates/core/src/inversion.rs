//! Injectivity, inverse windows and left-inverse synthesis.
//!
//! Decisions are exact for `Z` and `N`: every question reduces to which
//! symbols appear at the origin along infinite paths of a transfer graph,
//! with extra agreement constraints switched on over a finite region.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::alphabet::{decode, encode, positions_in, Alphabet, Symbol};
use crate::cellular::{periodic_points, CellularAutomaton};
use crate::error::{Result, ShiftError};
use crate::modlin::{chain_stabilize, solve_left, ChainOutcome, Matrix, Submodule};
use crate::subshift::{restrict_sft, Allowed, BlockTest, Caps, Constraint, SftPresentation, System, TransferGraph};
use crate::universe::{Element, Exhaustion, FiniteWindow, Universe};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Track {
    /// Pairs `(x, y)` over `A × A`.
    Set,
    /// Differences `z = x - y` over a module alphabet.
    Linear,
}

impl Track {
    pub fn for_automaton(ca: &CellularAutomaton) -> Track {
        if ca.is_linear() {
            Track::Linear
        } else {
            Track::Set
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Track::Set => "set",
            Track::Linear => "linear",
        }
    }
}

/// Values seen at the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Realized {
    /// Pairs `(x(0), y(0))`.
    Pairs(Vec<(Symbol, Symbol)>),
    /// `{z(0)}` as a submodule of `A`.
    Kernel(Submodule),
}

impl Realized {
    pub fn is_trivial(&self) -> bool {
        match self {
            Realized::Pairs(p) => p.iter().all(|(a, b)| a == b),
            Realized::Kernel(k) => k.is_zero(),
        }
    }
}

/// `{(x, y) ∈ Σ × Σ : τ(x) = τ(y)}` as an SFT over `A × A`.
#[derive(Debug, Clone)]
pub struct FiberShift {
    presentation: SftPresentation,
    base: u32,
}

impl FiberShift {
    pub fn new(ca: &CellularAutomaton, caps: &Caps) -> Result<Self> {
        let sigma = ca.domain();
        let a = sigma.alphabet();
        let pair = a.direct_sum(a)?;
        let window = sigma.window().union(ca.memory())?.hull()?;
        let d_idx = positions_in(&window, sigma.window())?;
        let m_idx = positions_in(&window, ca.memory())?;
        let base = a.size();
        let len = window.len();
        let space = crate::alphabet::code_space(base, len)?;
        caps.check(|| format!("blocks on {window}"), space as u128)?;
        // group admissible single blocks by their μ value
        let mut groups: BTreeMap<Symbol, Vec<Vec<Symbol>>> = BTreeMap::new();
        for code in 0..space {
            let u = decode(base, len, code);
            let on_d: Vec<Symbol> = d_idx.iter().map(|&i| u[i]).collect();
            if !sigma.allows(&on_d) {
                continue;
            }
            let on_m: Vec<Symbol> = m_idx.iter().map(|&i| u[i]).collect();
            if let Some(v) = ca.eval(&on_m) {
                groups.entry(v).or_default().push(u);
            }
        }
        let needed: u128 = groups.values().map(|g| (g.len() as u128).pow(2)).sum();
        caps.check(|| "fiber shift blocks".into(), needed)?;
        let mut blocks = Vec::new();
        for g in groups.values() {
            for u in g {
                for v in g {
                    blocks.push(u.iter().zip(v).map(|(&x, &y)| x * base + y).collect());
                }
            }
        }
        let presentation = SftPresentation::from_blocks(pair, window, blocks)?;
        Ok(FiberShift { presentation, base })
    }

    pub fn presentation(&self) -> &SftPresentation {
        &self.presentation
    }

    pub fn split(&self, s: Symbol) -> (Symbol, Symbol) {
        (s / self.base, s % self.base)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Injectivity {
    pub injective: bool,
    pub track: Track,
    pub at_identity: Realized,
}

/// Exact injectivity decision on the automaton's natural track.
pub fn check_injective(ca: &CellularAutomaton, caps: &Caps) -> Result<Injectivity> {
    check_injective_on(ca, Track::for_automaton(ca), caps)
}

pub fn check_injective_on(ca: &CellularAutomaton, track: Track, caps: &Caps) -> Result<Injectivity> {
    let origin = FiniteWindow::singleton_identity(ca.universe());
    let at_identity = match track {
        Track::Set => {
            let fiber = FiberShift::new(ca, caps)?;
            let r = restrict_sft(fiber.presentation(), &origin, caps)?;
            Realized::Pairs(r.blocks.blocks().map(|b| fiber.split(b[0])).collect())
        }
        Track::Linear => {
            require_linear(ca)?;
            let mem = crate::subshift::relative_offsets(ca.memory())?;
            let mut system = ca.domain().system()?;
            system.constraints.push(Constraint { offsets: mem, test: Box::new(|b: &[Symbol]| ca.eval(b) == Some(0)), prefix: None });
            let codes = system.restrict(&[0], 1, caps)?;
            Realized::Kernel(symbols_submodule(ca.domain().alphabet(), codes.into_iter().map(|c| c as Symbol))?)
        }
    };
    Ok(Injectivity { injective: at_identity.is_trivial(), track, at_identity })
}

fn require_linear(ca: &CellularAutomaton) -> Result<()> {
    if !ca.is_linear() {
        return Err(ShiftError::AlphabetMismatch("linear track needs a linear rule on a linear domain".into()));
    }
    Ok(())
}

fn symbols_submodule(a: &Alphabet, symbols: impl Iterator<Item = Symbol>) -> Result<Submodule> {
    let ring = a.ring().ok_or_else(|| ShiftError::AlphabetMismatch("module alphabet expected".into()))?;
    let gens: Vec<Vec<u32>> = symbols.map(|s| a.to_vector(s)).collect();
    Submodule::span(ring, a.rank().unwrap(), &gens)
}

/// Decides `C(E)`: which values at the origin are realized by configurations
/// agreeing (set track) or differing by a kernel element (linear track) on `E`.
struct MarkedSearch<'a> {
    ca: &'a CellularAutomaton,
    track: Track,
    graph: TransferGraph,
    mem: Vec<i64>,
}

impl<'a> MarkedSearch<'a> {
    fn new(ca: &'a CellularAutomaton, track: Track, caps: &Caps) -> Result<Self> {
        let universe = ca.universe();
        if !universe.is_one_dimensional() {
            return Err(ShiftError::UnsupportedUniverse(universe.to_string()));
        }
        let mem = ca.memory().ints()?;
        let (m0, m1) = (mem[0], *mem.last().unwrap());
        let span = match universe {
            Universe::N => m1 as usize,
            _ => (m1 - m0) as usize,
        };
        let sigma = ca.domain();
        let graph = match track {
            Track::Linear => {
                require_linear(ca)?;
                sigma.system()?.graph(span.max(1), caps)?
            }
            Track::Set => {
                let base = sigma.alphabet().size();
                let offsets = crate::subshift::relative_offsets(sigma.window())?;
                let track = |part: fn(Symbol, Symbol) -> Symbol| {
                    let prefix = sigma.prefix_test().map(|p| -> BlockTest<'_> {
                        Box::new(move |b: &[Symbol]| p(&b.iter().map(|&s| part(s, base)).collect::<Vec<_>>()))
                    });
                    Constraint {
                        offsets: offsets.clone(),
                        test: Box::new(move |b: &[Symbol]| {
                            sigma.allows(&b.iter().map(|&s| part(s, base)).collect::<Vec<_>>())
                        }),
                        prefix,
                    }
                };
                let first = track(|s, base| s / base);
                let second = track(|s, base| s % base);
                let system = System { universe, base: base * base, constraints: vec![first, second] };
                system.graph(span.max(1), caps)?
            }
        };
        Ok(MarkedSearch { ca, track, graph, mem })
    }

    fn agrees(&self, block: &[Symbol]) -> bool {
        match self.track {
            Track::Linear => self.ca.eval(block) == Some(0),
            Track::Set => {
                let base = self.ca.domain().alphabet().size();
                let x: Vec<Symbol> = block.iter().map(|s| s / base).collect();
                let y: Vec<Symbol> = block.iter().map(|s| s % base).collect();
                match (self.ca.eval(&x), self.ca.eval(&y)) {
                    (Some(a), Some(b)) => a == b,
                    _ => false,
                }
            }
        }
    }

    /// Symbols at the origin over configurations constrained on `marks`.
    fn origin_values(&self, marks: &[i64], caps: &Caps) -> Result<BTreeSet<Symbol>> {
        let g = &self.graph;
        let w = g.width() as i64;
        let (m0, m1) = (self.mem[0], *self.mem.last().unwrap());
        let one_sided = self.ca.universe() == Universe::N;
        let mark_lo = marks.iter().map(|&e| e + m0).min().unwrap_or(0);
        let mark_hi = marks.iter().map(|&e| e + m1).max().unwrap_or(0);
        let lo = if one_sided { 0 } else { mark_lo.min(0) };
        let hi = mark_hi.max(0).max(lo + w - 1);

        // marks grouped by the absolute position where their read window ends
        let mut ending: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
        for &e in marks {
            ending.entry(e + m1).or_default().push(e);
        }
        let read = |word: &[Symbol], start: i64, e: i64| -> Vec<Symbol> {
            self.mem.iter().map(|&h| word[(h + e - start) as usize]).collect()
        };
        const UNSET: Symbol = Symbol::MAX;

        let mut states: HashSet<(u32, Symbol)> = HashSet::new();
        for v in 0..g.vertex_count() {
            if !one_sided && !g.backward_alive(v) {
                continue;
            }
            let word = g.vertex_word(v);
            let inside = ending.range(..lo + w).flat_map(|(_, es)| es.iter());
            if !inside.into_iter().all(|&e| self.agrees(&read(&word, lo, e))) {
                continue;
            }
            let tag = if 0 < lo + w { word[(0 - lo) as usize] } else { UNSET };
            states.insert((v as u32, tag));
        }
        let mut word = vec![0; w as usize + 1];
        for p in lo..=hi - w {
            let q = p + w;
            let checks = ending.get(&q);
            let mut next = HashSet::new();
            for &(v, tag) in &states {
                word[..w as usize].copy_from_slice(&g.vertex_word(v as usize));
                for &t in g.successors(v as usize) {
                    let s = g.last_symbol(t as usize);
                    word[w as usize] = s;
                    if let Some(es) = checks {
                        if !es.iter().all(|&e| self.agrees(&read(&word, p, e))) {
                            continue;
                        }
                    }
                    let tag = if q == 0 { s } else { tag };
                    next.insert((t, tag));
                }
            }
            caps.check(|| "marked search states".into(), next.len() as u128)?;
            states = next;
        }
        Ok(states
            .into_iter()
            .filter(|&(v, _)| g.forward_alive(v as usize))
            .map(|(_, tag)| tag)
            .collect())
    }

    fn realized(&self, marks: &[i64], caps: &Caps) -> Result<Realized> {
        let values = self.origin_values(marks, caps)?;
        Ok(match self.track {
            Track::Set => {
                let base = self.ca.domain().alphabet().size();
                Realized::Pairs(values.into_iter().map(|s| (s / base, s % base)).collect())
            }
            Track::Linear => Realized::Kernel(symbols_submodule(self.ca.domain().alphabet(), values.into_iter())?),
        })
    }
}

/// One step of the inverse-window search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainEntry {
    pub n: usize,
    pub window: FiniteWindow,
    pub realized: Realized,
    pub holds: bool,
}

/// Transcript of the inverse-window search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizationChain {
    pub track: Track,
    pub entries: Vec<ChainEntry>,
    pub first_success: Option<usize>,
    /// Linear track: `π_0(U_m)` for `m = 0, 1, ...` with its stabilization index.
    pub kernel_chain: Option<(Vec<Submodule>, Option<usize>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WindowSearch {
    Found { window: FiniteWindow, chain: StabilizationChain },
    Inconclusive { n_max: usize, chain: StabilizationChain },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub n_max: usize,
    pub track: Option<Track>,
    pub minimize: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { n_max: 64, track: None, minimize: true }
    }
}

/// Whether `C(window)` holds: configurations with equal images on `window` agree at the origin.
pub fn window_determines_origin(ca: &CellularAutomaton, window: &FiniteWindow, track: Track, caps: &Caps) -> Result<Realized> {
    let search = MarkedSearch::new(ca, track, caps)?;
    search.realized(&window.ints()?, caps)
}

/// Least `n` with `C(E_n)`, then an inclusion-minimal sub-window.
pub fn find_inverse_window(ca: &CellularAutomaton, opts: SearchOptions, caps: &Caps) -> Result<WindowSearch> {
    let track = opts.track.unwrap_or_else(|| Track::for_automaton(ca));
    if !check_injective_on(ca, track, caps)?.injective {
        return Err(ShiftError::NotInjective);
    }
    let search = MarkedSearch::new(ca, track, caps)?;
    let exhaustion = Exhaustion::new(ca.universe(), 0);
    let mut entries = Vec::new();
    let mut found = None;
    for n in 0..=opts.n_max {
        let window = exhaustion.window(n);
        let realized = search.realized(&window.ints()?, caps)?;
        let holds = realized.is_trivial();
        entries.push(ChainEntry { n, window: window.clone(), realized, holds });
        if holds {
            found = Some((n, window));
            break;
        }
    }
    let kernel_chain = if track == Track::Linear {
        let m_max = found.as_ref().map_or(2, |(n, _)| n + 2);
        kernel_projection_chain(ca, 0, m_max, caps).ok().map(|c| {
            let idx = match chain_stabilize(c.clone(), c.len(), 1) {
                ChainOutcome::Stabilized { index, .. } => Some(index),
                ChainOutcome::Inconclusive { .. } => None,
            };
            let origin: Vec<Submodule> = c;
            (origin, idx)
        })
    } else {
        None
    };
    let first_success = found.as_ref().map(|(n, _)| *n);
    let chain = StabilizationChain { track, entries, first_success, kernel_chain };
    let Some((_, mut window)) = found else {
        return Ok(WindowSearch::Inconclusive { n_max: opts.n_max, chain });
    };
    if opts.minimize {
        for e in window.elements().to_vec() {
            let candidate = window.without(&e);
            if search.realized(&candidate.ints()?, caps)?.is_trivial() {
                window = candidate;
            }
        }
    }
    Ok(WindowSearch::Found { window, chain })
}

/// `π_{m,n}(U_m)` for `m = n..=m_max`, where `U_m = Ker(τ_{E_m}^+) ⊆ Σ_{M+E_m}` and
/// the projection lands on the coordinates of `E_n` (`n = 0` gives the origin).
pub fn kernel_projection_chain(ca: &CellularAutomaton, n: usize, m_max: usize, caps: &Caps) -> Result<Vec<Submodule>> {
    require_linear(ca)?;
    let exhaustion = Exhaustion::new(ca.universe(), 0);
    let target = exhaustion.window(n);
    let k = ca.domain().alphabet().rank().unwrap();
    let mut out = Vec::new();
    for m in n..=m_max {
        let e = exhaustion.window(m);
        let source = ca.memory().product(&e)?;
        let f = ca.linear_block_map(&source, &e)?.unwrap();
        let u = f.kernel().intersect(&restricted_submodule(ca.domain(), &source, caps)?)?;
        let copies = positions_in(&source, &target)?;
        let coords: Vec<usize> = copies.iter().flat_map(|&c| (0..k).map(move |j| c * k + j)).collect();
        out.push(u.project(&coords)?);
    }
    Ok(out)
}

/// `Σ_E` of a linear SFT as a submodule; a full shift needs no search.
fn restricted_submodule(sigma: &SftPresentation, window: &FiniteWindow, caps: &Caps) -> Result<Submodule> {
    match sigma.allowed() {
        Allowed::Linear(s) if s.is_full() => {
            let a = sigma.alphabet();
            Ok(Submodule::full(a.ring().unwrap(), a.rank().unwrap() * window.len()))
        }
        _ => restrict_sft(sigma, window, caps)?
            .submodule
            .ok_or_else(|| ShiftError::AlphabetMismatch("linear presentation expected".into())),
    }
}

/// Results of the self-checks run on a certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateChecks {
    pub blocks_checked: usize,
    pub periodic_checked: usize,
    pub max_period: usize,
}

/// A verified left inverse `σ` with `σ∘τ = Id` on `Σ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InverseCertificate {
    pub injective: bool,
    pub window: FiniteWindow,
    /// `η` on `Γ_N`: codes of `N`-blocks over `B` to symbols of `A`.
    pub eta: BTreeMap<u64, Symbol>,
    /// Linear `η` (`rank A × |N|·rank B`), when the rule is linear.
    pub eta_linear: Option<Matrix>,
    pub merged_window: FiniteWindow,
    pub sigma: CellularAutomaton,
    pub transcript: Option<StabilizationChain>,
    pub checks: CertificateChecks,
}

impl InverseCertificate {
    /// `η` as an automaton with memory `N` on `σ`'s domain.
    pub fn eta_automaton(&self, caps: &Caps) -> Result<CellularAutomaton> {
        let b_size = self.sigma.domain().alphabet().size();
        let mut missing = None;
        let ca = CellularAutomaton::from_fn(
            self.sigma.domain().clone(),
            self.sigma.codomain().clone(),
            self.window.clone(),
            |y| match self.eta.get(&encode(b_size, y)) {
                Some(&a) => a,
                None => {
                    missing.get_or_insert_with(|| format!("{y:?}"));
                    0
                }
            },
            caps,
        )?;
        match missing {
            Some(m) => Err(ShiftError::VerificationFailed(format!("η undefined on {m}"))),
            None => Ok(ca),
        }
    }
}

/// Builds `η_N`, `σ` and checks `σ∘τ = Id` on blocks and on periodic points.
pub fn synthesize_left_inverse(ca: &CellularAutomaton, window: &FiniteWindow, caps: &Caps) -> Result<InverseCertificate> {
    let universe = ca.universe();
    let sigma_dom = ca.domain();
    let a = sigma_dom.alphabet();
    let b = ca.codomain();
    let reads = ca.memory().product(window)?.with_identity();
    let r = restrict_sft(sigma_dom, &reads, caps)?;
    let plan = ca.gather_plan(&reads, window)?;
    let origin = reads.index_of(&universe.identity()).unwrap();

    let mut eta: BTreeMap<u64, Symbol> = BTreeMap::new();
    for u in r.blocks.blocks() {
        let y = ca.apply_plan(&plan, &u).ok_or_else(|| ShiftError::RuleUndefined(a.format_block(&u)))?;
        let key = encode(b.size(), &y);
        match eta.insert(key, u[origin]) {
            Some(prev) if prev != u[origin] => {
                return Err(ShiftError::NonFunctional(format!(
                    "image {} has origin values {} and {}",
                    b.format_block(&y),
                    a.name(prev),
                    a.name(u[origin])
                )))
            }
            _ => {}
        }
    }

    let eta_linear = if ca.is_linear() {
        let f = ca.linear_block_map(&reads, window)?.unwrap();
        let sub = r.submodule.as_ref().unwrap();
        let ka = a.rank().unwrap();
        let pairs: Vec<(Vec<u32>, Vec<u32>)> = sub
            .rows()
            .iter()
            .map(|u| Ok((f.apply(u)?, u[origin * ka..(origin + 1) * ka].to_vec())))
            .collect::<Result<_>>()?;
        let x = solve_left(a.ring().unwrap(), &pairs, f.codomain_rank(), ka)
            .ok_or_else(|| ShiftError::NonFunctional("no linear left inverse on the window".into()))?;
        for (&y, &s) in &eta {
            let yv = b.block_vector(&decode(b.size(), window.len(), y));
            if a.from_vector(&x.apply(&yv)?) != s {
                return Err(ShiftError::VerificationFailed("linear η disagrees with its table".into()));
            }
        }
        Some(x)
    } else {
        None
    };

    let merged = ca.memory().union(window)?.with_identity().hull()?;
    // σ lives on Σ(B; N, Γ_N) ⊇ τ(Σ), where η is total
    let lambda = if window.is_empty() {
        SftPresentation::full(b.clone(), universe)
    } else if let (Some(f), Some(d)) = (ca.linear_block_map(&reads, window)?, &r.submodule) {
        SftPresentation::linear(b.clone(), window.clone(), f.image_of(d)?)?
    } else {
        SftPresentation::from_codes(b.clone(), window.clone(), eta.keys().copied().collect())?
    };

    let sigma = match &eta_linear {
        Some(x) if lambda.is_linear() => {
            let ring = a.ring().unwrap();
            let (ka, kb) = (a.rank().unwrap(), b.rank().unwrap());
            let mut coeffs = vec![Matrix::zeros(ring, ka, kb); merged.len()];
            for (i, e) in window.elements().iter().enumerate() {
                let slot = merged.index_of(e).unwrap();
                let mut c = Matrix::zeros(ring, ka, kb);
                for r in 0..ka {
                    for col in 0..kb {
                        c.set(r, col, x.get(r, i * kb + col));
                    }
                }
                coeffs[slot] = c;
            }
            CellularAutomaton::linear(lambda, a.clone(), merged.clone(), coeffs)?
        }
        _ => {
            let n_idx = positions_in(&merged, window)?;
            let mut missing = None;
            let sigma = CellularAutomaton::from_fn(
                lambda,
                a.clone(),
                merged.clone(),
                |y| {
                    let on_n: Vec<Symbol> = n_idx.iter().map(|&i| y[i]).collect();
                    match eta.get(&encode(b.size(), &on_n)) {
                        Some(&s) => s,
                        // Σ is empty: any σ is a left inverse
                        None if eta.is_empty() => 0,
                        None => {
                            missing.get_or_insert_with(|| b.format_block(&on_n));
                            0
                        }
                    }
                },
                caps,
            )?;
            if let Some(m) = missing {
                return Err(ShiftError::VerificationFailed(format!("η undefined on {m}")));
            }
            sigma
        }
    };

    let checks = verify_left_inverse(ca, &sigma, &merged, caps)?;
    Ok(InverseCertificate {
        injective: true,
        window: window.clone(),
        eta,
        eta_linear,
        merged_window: merged,
        sigma,
        transcript: None,
        checks,
    })
}

/// Search plus synthesis, with the search transcript attached.
pub fn invert(ca: &CellularAutomaton, opts: SearchOptions, caps: &Caps) -> Result<std::result::Result<InverseCertificate, WindowSearch>> {
    match find_inverse_window(ca, opts, caps)? {
        WindowSearch::Found { window, chain } => {
            let mut cert = synthesize_left_inverse(ca, &window, caps)?;
            cert.transcript = Some(chain);
            Ok(Ok(cert))
        }
        inconclusive => Ok(Err(inconclusive)),
    }
}

/// Periodic points checked per certificate; longer periods are skipped once exceeded.
const PERIODIC_BUDGET: u128 = 1 << 16;

fn verify_left_inverse(ca: &CellularAutomaton, sigma: &CellularAutomaton, merged: &FiniteWindow, caps: &Caps) -> Result<CertificateChecks> {
    let universe = ca.universe();
    let a = ca.domain().alphabet();
    // every true block on M + M'
    let reads = ca.memory().product(merged)?.with_identity();
    let r = restrict_sft(ca.domain(), &reads, caps)?;
    let plan = ca.gather_plan(&reads, merged)?;
    let origin = reads.index_of(&universe.identity()).unwrap();
    let mut blocks_checked = 0;
    for u in r.blocks.blocks() {
        let y = ca.apply_plan(&plan, &u).ok_or_else(|| ShiftError::RuleUndefined(a.format_block(&u)))?;
        if sigma.eval(&y) != Some(u[origin]) {
            return Err(ShiftError::VerificationFailed(format!("σ∘τ differs from the identity on {}", a.format_block(&u))));
        }
        blocks_checked += 1;
    }
    // periodic points, as many periods up to 6 as the caps allow
    let base = a.size() as u128;
    let mut max_period = 0;
    let mut total = 0u128;
    for p in 1..=6u32 {
        total += base.pow(p) * if universe == Universe::N { p as u128 } else { 1 };
        if total > PERIODIC_BUDGET.min(caps.max_blocks as u128) {
            break;
        }
        max_period = p as usize;
    }
    let mut periodic_checked = 0;
    for x in periodic_points(ca.domain(), max_period, caps)? {
        let back = sigma.apply_periodic(&ca.apply_periodic(&x)?)?;
        if !back.same_as(&x) {
            return Err(ShiftError::VerificationFailed(format!("σ∘τ moves a periodic point {:?}", x.cycle)));
        }
        periodic_checked += 1;
    }
    Ok(CertificateChecks { blocks_checked, periodic_checked, max_period })
}

/// `σ∘τ = Id` checked on every block of `Σ` on `0..len`: the composite is
/// evaluated wherever its reads fit inside the block. Returns the block count.
pub fn verify_on_blocks(ca: &CellularAutomaton, sigma: &CellularAutomaton, len: usize, caps: &Caps) -> Result<usize> {
    let u = ca.universe();
    let whole = FiniteWindow::interval(u, 0, len as i64 - 1)?;
    let mid = fitting(ca.memory(), &whole)?;
    let inner = fitting(sigma.memory(), &mid)?;
    // compare only where the original value is known
    let inner = FiniteWindow::new(u, inner.elements().iter().filter(|e| whole.contains(e)).cloned())?;
    if inner.is_empty() {
        return Err(ShiftError::InvalidWindow(format!("width {len} too small for σ∘τ")));
    }
    let plan1 = ca.gather_plan(&whole, &mid)?;
    let plan2 = sigma.gather_plan(&mid, &inner)?;
    let keep = positions_in(&whole, &inner)?;
    let r = restrict_sft(ca.domain(), &whole, caps)?;
    let mut n = 0;
    for b in r.blocks.blocks() {
        let y = ca.apply_plan(&plan1, &b).ok_or_else(|| ShiftError::RuleUndefined(format!("{b:?}")))?;
        let x = sigma
            .apply_plan(&plan2, &y)
            .ok_or_else(|| ShiftError::VerificationFailed(format!("σ undefined on the image of {b:?}")))?;
        if keep.iter().zip(&x).any(|(&i, &s)| b[i] != s) {
            return Err(ShiftError::VerificationFailed(format!("σ∘τ differs from the identity on {b:?}")));
        }
        n += 1;
    }
    Ok(n)
}

/// Positions `g` of an integer window with `M + g` inside `within`.
fn fitting(memory: &FiniteWindow, within: &FiniteWindow) -> Result<FiniteWindow> {
    let m = memory.ints()?;
    let w = within.ints()?;
    let set: BTreeSet<i64> = w.iter().copied().collect();
    let g: Vec<i64> = w
        .iter()
        .map(|&x| x - m[0])
        .filter(|&g| m.iter().all(|&h| set.contains(&(h + g))))
        .collect();
    FiniteWindow::new(within.universe(), g.into_iter().map(Element::Int))
}

/// Allowed set of an SFT as a plain block list (helper for reports).
pub fn allowed_codes(s: &SftPresentation, caps: &Caps) -> Result<BTreeSet<u64>> {
    Ok(match s.allowed() {
        Allowed::Blocks(c) => c.clone(),
        Allowed::Linear(_) => s.allowed_blocks(caps)?.codes().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modlin::ModRing;

    fn caps() -> Caps {
        Caps::default()
    }

    fn win(lo: i64, hi: i64) -> FiniteWindow {
        FiniteWindow::interval(Universe::Z, lo, hi).unwrap()
    }

    fn gf2(k: usize) -> Alphabet {
        Alphabet::module(ModRing::new(2).unwrap(), k).unwrap()
    }

    fn xor() -> CellularAutomaton {
        let r = ModRing::new(2).unwrap();
        let one = Matrix::identity(r, 1);
        CellularAutomaton::linear(SftPresentation::full(gf2(1), Universe::Z), gf2(1), win(0, 1), vec![one.clone(), one]).unwrap()
    }

    fn involution() -> CellularAutomaton {
        let r = ModRing::new(2).unwrap();
        let s = Matrix::parse(r, "0,1;0,0").unwrap();
        let full = SftPresentation::full(gf2(2), Universe::Z);
        CellularAutomaton::linear(full, gf2(2), win(0, 1), vec![Matrix::identity(r, 2), s]).unwrap()
    }

    #[test]
    fn xor_is_not_injective() {
        let v = check_injective(&xor(), &caps()).unwrap();
        assert!(!v.injective);
        assert_eq!(v.at_identity, Realized::Kernel(Submodule::full(ModRing::new(2).unwrap(), 1)));
        assert!(!check_injective_on(&xor(), Track::Set, &caps()).unwrap().injective);
    }

    #[test]
    fn identity_window() {
        let full = SftPresentation::full(Alphabet::numbered(3), Universe::Z);
        let id = CellularAutomaton::identity(full, &caps()).unwrap();
        assert!(check_injective(&id, &caps()).unwrap().injective);
        let WindowSearch::Found { window, .. } = find_inverse_window(&id, SearchOptions::default(), &caps()).unwrap() else {
            panic!()
        };
        assert_eq!(window, win(0, 0));
    }

    #[test]
    fn shift_window_is_minus_one() {
        let bin = Alphabet::numbered(2);
        let full = SftPresentation::full(bin.clone(), Universe::Z);
        let m = FiniteWindow::from_ints(Universe::Z, [1]).unwrap();
        let t = CellularAutomaton::from_fn(full, bin, m, |b| b[0], &caps()).unwrap();
        let WindowSearch::Found { window, chain } = find_inverse_window(&t, SearchOptions::default(), &caps()).unwrap() else {
            panic!()
        };
        assert_eq!(window, FiniteWindow::from_ints(Universe::Z, [-1]).unwrap());
        assert_eq!(chain.first_success, Some(1));
        let cert = synthesize_left_inverse(&t, &window, &caps()).unwrap();
        assert!(cert.checks.blocks_checked > 0);
    }

    #[test]
    fn involution_inverse() {
        let t = involution();
        assert!(check_injective(&t, &caps()).unwrap().injective);
        assert!(check_injective_on(&t, Track::Set, &caps()).unwrap().injective);
        let cert = invert(&t, SearchOptions::default(), &caps()).unwrap().unwrap();
        assert!(cert.window.is_subset(&win(0, 1)));
        let x = cert.eta_linear.as_ref().unwrap();
        // η(y) = y(0) + s·y(1)
        assert_eq!(x.to_string(), Matrix::parse(ModRing::new(2).unwrap(), "1,0,0,1;0,1,0,0").unwrap().to_string());
        assert_eq!(verify_on_blocks(&t, &cert.sigma, 6, &caps()).unwrap(), 4096);
    }

    #[test]
    fn one_sided_shift_not_injective() {
        let bin = Alphabet::numbered(2);
        let full = SftPresentation::full(bin.clone(), Universe::N);
        let m = FiniteWindow::from_ints(Universe::N, [1]).unwrap();
        let t = CellularAutomaton::from_fn(full, bin, m, |b| b[0], &caps()).unwrap();
        let v = check_injective(&t, &caps()).unwrap();
        assert!(!v.injective);
        assert_eq!(v.at_identity, Realized::Pairs(vec![(0, 0), (0, 1), (1, 0), (1, 1)]));
        assert!(matches!(find_inverse_window(&t, SearchOptions::default(), &caps()), Err(ShiftError::NotInjective)));
    }

    #[test]
    fn higher_block_window() {
        let bin = Alphabet::numbered(2);
        let g = SftPresentation::from_forbidden(bin, win(0, 1), [vec![1, 1]], &caps()).unwrap();
        let t = CellularAutomaton::from_fn(g, Alphabet::numbered(4), win(0, 1), |b| b[0] * 2 + b[1], &caps()).unwrap();
        let cert = invert(&t, SearchOptions::default(), &caps()).unwrap().unwrap();
        assert_eq!(cert.window, win(0, 0));
        // η((a,b)) = a
        for (&y, &a) in &cert.eta {
            assert_eq!(y as Symbol / 2, a);
        }
    }

    #[test]
    fn xor_kernel_chain_stabilizes_at_zero() {
        let chain = kernel_projection_chain(&xor(), 0, 4, &caps()).unwrap();
        let full = Submodule::full(ModRing::new(2).unwrap(), 1);
        assert!(chain.iter().all(|s| *s == full));
        assert_eq!(chain_stabilize(chain, 5, 1), ChainOutcome::Stabilized { value: full, index: 0 });
    }
}
