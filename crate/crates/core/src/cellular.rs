//! Cellular automata `τ(c)(g) = μ((g⋆c)|_M)` on SFT domains.

use std::collections::BTreeMap;
use std::fmt;

use crate::alphabet::{code_space, decode, encode, positions_in, Alphabet, BlockSet, Symbol};
use crate::error::{Result, ShiftError};
use crate::modlin::{LinMap, Matrix, Submodule};
use crate::subshift::{restrict_sft, sft_included, subshift_included, Caps, Presentation, SftPresentation, SoficPresentation};
use crate::universe::{Element, FiniteWindow, Universe};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalRule {
    /// Memory-block code to output symbol, defined exactly on `Σ_M`.
    Table(BTreeMap<u64, Symbol>),
    /// One coefficient matrix (codomain rank × domain rank) per memory element.
    Linear(Vec<Matrix>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellularAutomaton {
    domain: SftPresentation,
    codomain: Alphabet,
    memory: FiniteWindow,
    rule: LocalRule,
}

impl CellularAutomaton {
    /// Builds a table rule from `f` evaluated on every block of `Σ_M`.
    pub fn from_fn(
        domain: SftPresentation,
        codomain: Alphabet,
        memory: FiniteWindow,
        mut f: impl FnMut(&[Symbol]) -> Symbol,
        caps: &Caps,
    ) -> Result<Self> {
        check_universe(&domain, &memory)?;
        let r = restrict_sft(&domain, &memory, caps)?;
        let mut table = BTreeMap::new();
        for b in r.blocks.blocks() {
            let out = f(&b);
            if out >= codomain.size() {
                return Err(ShiftError::UnknownSymbol(format!("output {out} outside {codomain}")));
            }
            table.insert(encode(domain.alphabet().size(), &b), out);
        }
        Ok(CellularAutomaton { domain, codomain, memory, rule: LocalRule::Table(table) })
    }

    /// Table rule from explicit entries. Entries must cover `Σ_M`; entries on
    /// blocks outside `Σ_M` are dropped.
    pub fn from_table(
        domain: SftPresentation,
        codomain: Alphabet,
        memory: FiniteWindow,
        entries: &BTreeMap<Vec<Symbol>, Symbol>,
        caps: &Caps,
    ) -> Result<Self> {
        let alphabet = domain.alphabet().clone();
        let lookup = |b: &[Symbol]| entries.get(b).copied();
        check_universe(&domain, &memory)?;
        let r = restrict_sft(&domain, &memory, caps)?;
        for b in r.blocks.blocks() {
            if lookup(&b).is_none() {
                return Err(ShiftError::RuleUndefined(alphabet.format_block(&b)));
            }
        }
        Self::from_fn(domain, codomain, memory, |b| lookup(b).unwrap(), caps)
    }

    pub fn linear(domain: SftPresentation, codomain: Alphabet, memory: FiniteWindow, coefficients: Vec<Matrix>) -> Result<Self> {
        check_universe(&domain, &memory)?;
        let (ring, ka) = match domain.alphabet() {
            Alphabet::Module { ring, rank } => (*ring, *rank),
            Alphabet::Set { .. } => return Err(ShiftError::AlphabetMismatch("linear rule needs a module domain".into())),
        };
        let kb = match &codomain {
            Alphabet::Module { ring: r, rank } if *r == ring => *rank,
            Alphabet::Module { ring: r, .. } => return Err(ShiftError::ModulusMismatch(r.modulus(), ring.modulus())),
            Alphabet::Set { .. } => return Err(ShiftError::AlphabetMismatch("linear rule needs a module codomain".into())),
        };
        if coefficients.len() != memory.len() {
            return Err(ShiftError::RankMismatch { expected: memory.len(), got: coefficients.len() });
        }
        for c in &coefficients {
            if c.ring() != ring {
                return Err(ShiftError::ModulusMismatch(c.ring().modulus(), ring.modulus()));
            }
            if c.rows() != kb || c.cols() != ka {
                return Err(ShiftError::RankMismatch { expected: kb * 1000 + ka, got: c.rows() * 1000 + c.cols() });
            }
        }
        Ok(CellularAutomaton { domain, codomain, memory, rule: LocalRule::Linear(coefficients) })
    }

    pub fn identity(domain: SftPresentation, caps: &Caps) -> Result<Self> {
        let universe = domain.universe();
        let memory = FiniteWindow::singleton_identity(universe);
        let codomain = domain.alphabet().clone();
        match domain.alphabet() {
            Alphabet::Module { ring, rank } => {
                let id = Matrix::identity(*ring, *rank);
                Self::linear(domain, codomain, memory, vec![id])
            }
            Alphabet::Set { .. } => Self::from_fn(domain, codomain, memory, |b| b[0], caps),
        }
    }

    pub fn domain(&self) -> &SftPresentation {
        &self.domain
    }

    pub fn codomain(&self) -> &Alphabet {
        &self.codomain
    }

    pub fn memory(&self) -> &FiniteWindow {
        &self.memory
    }

    pub fn rule(&self) -> &LocalRule {
        &self.rule
    }

    pub fn universe(&self) -> Universe {
        self.memory.universe()
    }

    /// Linear rule on a linear domain.
    pub fn is_linear(&self) -> bool {
        matches!(self.rule, LocalRule::Linear(_)) && self.domain.is_linear()
    }

    /// `μ` on a memory block; `None` off `Σ_M` for table rules.
    pub fn eval(&self, block: &[Symbol]) -> Option<Symbol> {
        match &self.rule {
            LocalRule::Table(t) => t.get(&encode(self.domain.alphabet().size(), block)).copied(),
            LocalRule::Linear(cs) => {
                let a = self.domain.alphabet();
                let ring = cs[0].ring();
                let mut out = vec![0u32; cs[0].rows()];
                for (c, &s) in cs.iter().zip(block) {
                    let y = c.apply(&a.to_vector(s)).ok()?;
                    for (o, v) in out.iter_mut().zip(y) {
                        *o = ring.add(*o, v);
                    }
                }
                Some(self.codomain.from_vector(&out))
            }
        }
    }

    /// The lookup table of `μ` over `Σ_M`.
    pub fn table(&self, caps: &Caps) -> Result<BTreeMap<u64, Symbol>> {
        match &self.rule {
            LocalRule::Table(t) => Ok(t.clone()),
            LocalRule::Linear(_) => {
                let r = restrict_sft(&self.domain, &self.memory, caps)?;
                let base = self.domain.alphabet().size();
                Ok(r.blocks.blocks().map(|b| (encode(base, &b), self.eval(&b).unwrap())).collect())
            }
        }
    }

    /// Index plan: for each `g ∈ out`, the positions of `M·g` inside `source`.
    pub fn gather_plan(&self, source: &FiniteWindow, out: &FiniteWindow) -> Result<Vec<Vec<usize>>> {
        let u = self.universe();
        out.elements()
            .iter()
            .map(|g| {
                let reads = self.memory.elements().iter().map(|h| u.mul(h, g)).collect::<Result<Vec<Element>>>()?;
                let w = FiniteWindow::new(u, reads.clone())?;
                if !w.is_subset(source) {
                    return Err(ShiftError::NotContained(w.to_string(), source.to_string()));
                }
                Ok(reads.iter().map(|e| source.index_of(e).unwrap()).collect())
            })
            .collect()
    }

    /// Applies `μ` along a plan; `None` when some memory block is off `Σ_M`.
    pub fn apply_plan(&self, plan: &[Vec<usize>], block: &[Symbol]) -> Option<Vec<Symbol>> {
        let mut buf = Vec::with_capacity(self.memory.len());
        plan.iter()
            .map(|reads| {
                buf.clear();
                buf.extend(reads.iter().map(|&i| block[i]));
                self.eval(&buf)
            })
            .collect()
    }

    /// `τ_E^+ : Σ_{ME} → B^E`.
    pub fn induced_map(&self, window: &FiniteWindow, caps: &Caps) -> Result<InducedMap> {
        let source = self.memory.product(window)?;
        let r = restrict_sft(&self.domain, &source, caps)?;
        let plan = self.gather_plan(&source, window)?;
        let base_in = self.domain.alphabet().size();
        let base_out = self.codomain.size();
        code_space(base_out, window.len())?;
        let mut map = BTreeMap::new();
        for b in r.blocks.blocks() {
            let img = self
                .apply_plan(&plan, &b)
                .ok_or_else(|| ShiftError::RuleUndefined(self.domain.alphabet().format_block(&b)))?;
            map.insert(encode(base_in, &b), encode(base_out, &img));
        }
        let linear = match &self.rule {
            LocalRule::Linear(cs) if self.domain.is_linear() => Some(self.linear_induced(cs, &source, &plan)?),
            _ => None,
        };
        let domain_submodule = if linear.is_some() { r.submodule } else { None };
        Ok(InducedMap { source, window: window.clone(), base_in, base_out, map, linear, domain_submodule })
    }

    /// The linear map `A^source -> B^out` of a linear rule, `None` for tables.
    pub fn linear_block_map(&self, source: &FiniteWindow, out: &FiniteWindow) -> Result<Option<LinMap>> {
        match &self.rule {
            LocalRule::Linear(cs) => {
                let plan = self.gather_plan(source, out)?;
                Ok(Some(self.linear_induced(cs, source, &plan)?))
            }
            LocalRule::Table(_) => Ok(None),
        }
    }

    fn linear_induced(&self, cs: &[Matrix], source: &FiniteWindow, plan: &[Vec<usize>]) -> Result<LinMap> {
        let ka = self.domain.alphabet().rank().unwrap();
        let kb = self.codomain.rank().unwrap();
        let ring = cs[0].ring();
        let mut m = Matrix::zeros(ring, plan.len() * kb, source.len() * ka);
        for (e, reads) in plan.iter().enumerate() {
            for (c, &pos) in cs.iter().zip(reads) {
                for i in 0..kb {
                    for j in 0..ka {
                        let v = ring.add(m.get(e * kb + i, pos * ka + j), c.get(i, j));
                        m.set(e * kb + i, pos * ka + j, v);
                    }
                }
            }
        }
        Ok(LinMap::new(m))
    }

    /// Same map with a larger memory set `bigger ⊇ M`.
    pub fn with_memory(&self, bigger: &FiniteWindow, caps: &Caps) -> Result<Self> {
        if !self.memory.is_subset(bigger) {
            return Err(ShiftError::NotContained(self.memory.to_string(), bigger.to_string()));
        }
        let idx = positions_in(bigger, &self.memory)?;
        match &self.rule {
            LocalRule::Linear(cs) => {
                let ring = cs[0].ring();
                let mut out = vec![Matrix::zeros(ring, cs[0].rows(), cs[0].cols()); bigger.len()];
                for (c, &i) in cs.iter().zip(&idx) {
                    out[i] = c.clone();
                }
                Self::linear(self.domain.clone(), self.codomain.clone(), bigger.clone(), out)
            }
            LocalRule::Table(_) => Self::from_fn(
                self.domain.clone(),
                self.codomain.clone(),
                bigger.clone(),
                |b| {
                    let p: Vec<Symbol> = idx.iter().map(|&i| b[i]).collect();
                    self.eval(&p).expect("restriction of a true block is a true block")
                },
                caps,
            ),
        }
    }

    /// Memory normalized to the interval hull of `M ∪ {0}`.
    pub fn normalized(&self, caps: &Caps) -> Result<Self> {
        let hull = self.memory.with_identity().hull()?;
        self.with_memory(&hull, caps)
    }

    /// The same rule on a subshift `Δ ⊆ Σ`.
    pub fn restricted_to(&self, delta: &SftPresentation, caps: &Caps) -> Result<Self> {
        if !sft_included(delta, &self.domain, caps)? {
            return Err(ShiftError::Containment("subshift is not inside the automaton's domain".into()));
        }
        match &self.rule {
            LocalRule::Linear(cs) if delta.is_linear() => {
                Self::linear(delta.clone(), self.codomain.clone(), self.memory.clone(), cs.clone())
            }
            _ => Self::from_fn(
                delta.clone(),
                self.codomain.clone(),
                self.memory.clone(),
                |b| self.eval(b).expect("Δ_M ⊆ Σ_M"),
                caps,
            ),
        }
    }

    /// `outer ∘ inner`, with memory `M_inner · M_outer`.
    pub fn compose(outer: &CellularAutomaton, inner: &CellularAutomaton, caps: &Caps) -> Result<CellularAutomaton> {
        if inner.universe() != outer.universe() {
            return Err(ShiftError::MixedUniverse(inner.universe().to_string(), outer.universe().to_string()));
        }
        if inner.codomain.size() != outer.domain.alphabet().size() {
            return Err(ShiftError::AlphabetMismatch(format!("{} vs {}", inner.codomain, outer.domain.alphabet())));
        }
        let image = Presentation::Sofic(SoficPresentation::new(inner.clone()));
        if !subshift_included(&image, &Presentation::Sft(outer.domain.clone()), caps)? {
            return Err(ShiftError::Containment("image of the inner automaton leaves the outer domain".into()));
        }
        let memory = inner.memory.product(&outer.memory)?;
        if let (LocalRule::Linear(c1), LocalRule::Linear(c2)) = (&inner.rule, &outer.rule) {
            if inner.domain.is_linear() {
                let u = inner.universe();
                let ring = c1[0].ring();
                let mut out = vec![Matrix::zeros(ring, c2[0].rows(), c1[0].cols()); memory.len()];
                for (m, a) in inner.memory.elements().iter().zip(c1) {
                    for (h, b) in outer.memory.elements().iter().zip(c2) {
                        let k = memory.index_of(&u.mul(m, h)?).unwrap();
                        out[k] = out[k].add(&b.mul(a)?)?;
                    }
                }
                return Self::linear(inner.domain.clone(), outer.codomain.clone(), memory, out);
            }
        }
        let plan = inner.gather_plan(&memory, &outer.memory)?;
        let mut failure = None;
        let ca = Self::from_fn(
            inner.domain.clone(),
            outer.codomain.clone(),
            memory,
            |b| match inner.apply_plan(&plan, b).and_then(|mid| outer.eval(&mid)) {
                Some(s) => s,
                None => {
                    failure.get_or_insert_with(|| inner.domain.alphabet().format_block(b));
                    0
                }
            },
            caps,
        )?;
        match failure {
            Some(b) => Err(ShiftError::RuleUndefined(b)),
            None => Ok(ca),
        }
    }

    /// Image of a periodic (`Z`) or eventually periodic (`N`) configuration.
    pub fn apply_periodic(&self, x: &PeriodicConfig) -> Result<PeriodicConfig> {
        if x.universe != self.universe() {
            return Err(ShiftError::MixedUniverse(x.universe.to_string(), self.universe().to_string()));
        }
        let mem = self.memory.ints()?;
        let q = x.preperiod.len();
        let p = x.cycle.len();
        let mut out = Vec::with_capacity(q + p);
        let mut buf = Vec::with_capacity(mem.len());
        for n in 0..(q + p) as i64 {
            buf.clear();
            buf.extend(mem.iter().map(|&h| x.at(n + h)));
            let s = self.eval(&buf).ok_or_else(|| ShiftError::RuleUndefined(self.domain.alphabet().format_block(&buf)))?;
            out.push(s);
        }
        let cycle = out.split_off(q);
        Ok(PeriodicConfig { universe: x.universe, preperiod: out, cycle })
    }
}

impl fmt::Display for CellularAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CA on {} memory {}", self.domain.alphabet(), self.memory)
    }
}

fn check_universe(domain: &SftPresentation, memory: &FiniteWindow) -> Result<()> {
    if domain.universe() != memory.universe() {
        return Err(ShiftError::MixedUniverse(domain.universe().to_string(), memory.universe().to_string()));
    }
    Ok(())
}

/// `τ_E^+` as an explicit map on block codes, plus a linear map when the rule is linear.
#[derive(Debug, Clone)]
pub struct InducedMap {
    pub source: FiniteWindow,
    pub window: FiniteWindow,
    pub base_in: u32,
    pub base_out: u32,
    pub map: BTreeMap<u64, u64>,
    pub linear: Option<LinMap>,
    /// `Σ_{ME}` as a submodule, for linear rules on linear domains.
    pub domain_submodule: Option<Submodule>,
}

impl InducedMap {
    pub fn apply(&self, block: &[Symbol]) -> Option<Vec<Symbol>> {
        self.map
            .get(&encode(self.base_in, block))
            .map(|&c| decode(self.base_out, self.window.len(), c))
    }

    pub fn image(&self) -> Result<BlockSet> {
        BlockSet::from_codes(self.window.clone(), self.base_out, self.map.values().copied().collect())
    }
}

/// A periodic (`Z`) or eventually periodic (`N`) configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicConfig {
    pub universe: Universe,
    pub preperiod: Vec<Symbol>,
    pub cycle: Vec<Symbol>,
}

impl PeriodicConfig {
    pub fn periodic(universe: Universe, cycle: Vec<Symbol>) -> Self {
        PeriodicConfig { universe, preperiod: Vec::new(), cycle }
    }

    pub fn at(&self, n: i64) -> Symbol {
        let q = self.preperiod.len() as i64;
        if n >= 0 && n < q {
            return self.preperiod[n as usize];
        }
        self.cycle[(n - q).rem_euclid(self.cycle.len() as i64) as usize]
    }

    /// Shift by one: `(1⋆x)(n) = x(n+1)`.
    pub fn shifted(&self) -> Self {
        let q = self.preperiod.len();
        if q > 0 {
            return PeriodicConfig { universe: self.universe, preperiod: self.preperiod[1..].to_vec(), cycle: self.cycle.clone() };
        }
        let mut c = self.cycle.clone();
        c.rotate_left(1);
        PeriodicConfig { universe: self.universe, preperiod: Vec::new(), cycle: c }
    }

    /// Values on `lo..=hi`.
    pub fn window_values(&self, lo: i64, hi: i64) -> Vec<Symbol> {
        (lo..=hi).map(|n| self.at(n)).collect()
    }

    /// Equality as configurations.
    pub fn same_as(&self, other: &PeriodicConfig) -> bool {
        let q = self.preperiod.len().max(other.preperiod.len()) as i64;
        let p = (self.cycle.len() * other.cycle.len()) as i64;
        let lo = if self.universe == Universe::Z { -p } else { 0 };
        (lo..q + p).all(|n| self.at(n) == other.at(n))
    }

    /// Membership in an SFT, checked on one full period of translates.
    pub fn in_sft(&self, s: &SftPresentation) -> Result<bool> {
        let d = s.window().ints()?;
        let q = self.preperiod.len() as i64;
        let p = self.cycle.len() as i64;
        Ok((0..q + p).all(|g| {
            let b: Vec<Symbol> = d.iter().map(|&h| self.at(h + g)).collect();
            s.allows(&b)
        }))
    }
}

/// All periodic points of `Σ` with period at most `max_period` (`Z`), or
/// eventually periodic points with preperiod plus period at most
/// `max_period` (`N`).
pub fn periodic_points(s: &SftPresentation, max_period: usize, caps: &Caps) -> Result<Vec<PeriodicConfig>> {
    let u = s.universe();
    let base = s.alphabet().size();
    let mut out = Vec::new();
    for total in 1..=max_period {
        let space = code_space(base, total)?;
        caps.check(|| format!("periodic words of length {total}"), space as u128)?;
        for code in 0..space {
            let word = decode(base, total, code);
            let splits: Vec<usize> = if u == Universe::N { (0..total).collect() } else { vec![0] };
            for q in splits {
                let x = PeriodicConfig { universe: u, preperiod: word[..q].to_vec(), cycle: word[q..].to_vec() };
                if x.in_sft(s)? {
                    out.push(x);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modlin::ModRing;
    use crate::subshift::sft_equal;

    fn caps() -> Caps {
        Caps::default()
    }

    fn gf2(k: usize) -> Alphabet {
        Alphabet::module(ModRing::new(2).unwrap(), k).unwrap()
    }

    fn win(lo: i64, hi: i64) -> FiniteWindow {
        FiniteWindow::interval(Universe::Z, lo, hi).unwrap()
    }

    fn xor() -> CellularAutomaton {
        let r = ModRing::new(2).unwrap();
        let full = SftPresentation::full(gf2(1), Universe::Z);
        let one = Matrix::identity(r, 1);
        CellularAutomaton::linear(full, gf2(1), win(0, 1), vec![one.clone(), one]).unwrap()
    }

    #[test]
    fn xor_truth_table() {
        let m = xor().induced_map(&win(0, 0), &caps()).unwrap();
        let got: Vec<(u64, u64)> = m.map.into_iter().collect();
        assert_eq!(got, vec![(0, 0), (1, 1), (2, 1), (3, 0)]);
        assert!(m.linear.is_some());
    }

    #[test]
    fn identity_induced() {
        let full = SftPresentation::full(Alphabet::numbered(2), Universe::Z);
        let id = CellularAutomaton::identity(full, &caps()).unwrap();
        let m = id.induced_map(&win(0, 1), &caps()).unwrap();
        assert!(m.map.iter().all(|(a, b)| a == b));
        assert_eq!(m.map.len(), 4);
    }

    #[test]
    fn higher_block_on_golden_mean() {
        let bin = Alphabet::numbered(2);
        let g = SftPresentation::from_forbidden(bin, win(0, 1), [vec![1, 1]], &caps()).unwrap();
        let pairs = Alphabet::numbered(4);
        let t = CellularAutomaton::from_fn(g, pairs, win(0, 1), |b| b[0] * 2 + b[1], &caps()).unwrap();
        let m = t.induced_map(&win(0, 0), &caps()).unwrap();
        let imgs: Vec<u64> = m.map.values().copied().collect();
        assert_eq!(imgs, vec![0, 1, 2]);
    }

    #[test]
    fn xor_on_alternating_word() {
        let x = PeriodicConfig::periodic(Universe::Z, vec![0, 1]);
        let y = xor().apply_periodic(&x).unwrap();
        assert!(y.same_as(&PeriodicConfig::periodic(Universe::Z, vec![1])));
    }

    #[test]
    fn shift_composition_adds_memory() {
        let bin = Alphabet::numbered(2);
        let full = SftPresentation::full(bin.clone(), Universe::Z);
        let m1 = FiniteWindow::from_ints(Universe::Z, [1]).unwrap();
        let s = CellularAutomaton::from_fn(full, bin, m1, |b| b[0], &caps()).unwrap();
        let s2 = CellularAutomaton::compose(&s, &s, &caps()).unwrap();
        assert_eq!(s2.memory(), &FiniteWindow::from_ints(Universe::Z, [2]).unwrap());
        let x = PeriodicConfig::periodic(Universe::Z, vec![0, 0, 1]);
        assert_eq!(s2.apply_periodic(&x).unwrap().cycle, vec![1, 0, 0]);
    }

    #[test]
    fn compose_identity_keeps_table() {
        let t = xor();
        let id = CellularAutomaton::identity(t.domain().clone(), &caps()).unwrap();
        let c = CellularAutomaton::compose(&id, &t, &caps()).unwrap();
        assert_eq!(c.table(&caps()).unwrap(), t.table(&caps()).unwrap());
        assert_eq!(c.memory(), t.memory());
    }

    #[test]
    fn compose_rejects_leaving_domain() {
        let bin = Alphabet::numbered(2);
        let full = SftPresentation::full(bin.clone(), Universe::Z);
        let g = SftPresentation::from_forbidden(bin.clone(), win(0, 1), [vec![1, 1]], &caps()).unwrap();
        let id_full = CellularAutomaton::identity(full, &caps()).unwrap();
        let id_g = CellularAutomaton::identity(g, &caps()).unwrap();
        assert!(matches!(CellularAutomaton::compose(&id_g, &id_full, &caps()), Err(ShiftError::Containment(_))));
    }

    #[test]
    fn linear_and_table_paths_agree() {
        let t = xor();
        let m = t.induced_map(&win(-1, 1), &caps()).unwrap();
        let f = m.linear.as_ref().unwrap();
        let a = gf2(1);
        for (&src, &dst) in &m.map {
            let b = decode(2, m.source.len(), src);
            let img = f.apply(&a.block_vector(&b)).unwrap();
            assert_eq!(encode(2, &a.block_from_vector(&img)), dst);
        }
    }

    #[test]
    fn restricted_domain_equals() {
        let bin = Alphabet::numbered(2);
        let g = SftPresentation::from_forbidden(bin.clone(), win(0, 1), [vec![1, 1]], &caps()).unwrap();
        let full = SftPresentation::full(bin, Universe::Z);
        let id = CellularAutomaton::identity(full, &caps()).unwrap();
        let r = id.restricted_to(&g, &caps()).unwrap();
        assert!(sft_equal(r.domain(), &g, &caps()).unwrap());
        assert_eq!(r.table(&caps()).unwrap().len(), 2);
    }

    #[test]
    fn periodic_points_of_golden_mean() {
        let bin = Alphabet::numbered(2);
        let g = SftPresentation::from_forbidden(bin, win(0, 1), [vec![1, 1]], &caps()).unwrap();
        // words w of length p whose cyclic closure avoids 11: Lucas numbers 1,3,4,7
        let counts: Vec<usize> = (1..=4)
            .map(|p| periodic_points(&g, p, &caps()).unwrap().iter().filter(|x| x.cycle.len() == p).count())
            .collect();
        assert_eq!(counts, vec![1, 3, 4, 7]);
    }
}
