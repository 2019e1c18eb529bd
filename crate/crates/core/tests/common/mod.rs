#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use shiftlab::alphabet::{decode, Alphabet, Symbol};
use shiftlab::cellular::CellularAutomaton;
use shiftlab::modlin::{Matrix, ModRing};
use shiftlab::subshift::{Caps, SftPresentation};
use shiftlab::universe::{FiniteWindow, Universe};

pub fn caps() -> Caps {
    Caps::default()
}

pub fn win(u: Universe, lo: i64, hi: i64) -> FiniteWindow {
    FiniteWindow::interval(u, lo, hi).unwrap()
}

pub fn z(lo: i64, hi: i64) -> FiniteWindow {
    win(Universe::Z, lo, hi)
}

pub fn gf(m: u64, k: usize) -> Alphabet {
    Alphabet::module(ModRing::new(m).unwrap(), k).unwrap()
}

pub fn golden() -> SftPresentation {
    SftPresentation::from_forbidden(Alphabet::numbered(2), z(0, 1), [vec![1, 1]], &caps()).unwrap()
}

/// `(x(n), x(n+1))` on the golden mean shift.
pub fn pair_code() -> CellularAutomaton {
    CellularAutomaton::from_fn(golden(), Alphabet::numbered(4), z(0, 1), |b| b[0] * 2 + b[1], &caps()).unwrap()
}

/// Golden mean onto the even shift: `1` exactly where `x(n) x(n+1) = 00`.
pub fn parity_code() -> CellularAutomaton {
    CellularAutomaton::from_fn(golden(), Alphabet::numbered(2), z(0, 1), |b| u32::from(b == [0, 0]), &caps()).unwrap()
}

pub fn xor() -> CellularAutomaton {
    let one = Matrix::identity(ModRing::new(2).unwrap(), 1);
    CellularAutomaton::linear(SftPresentation::full(gf(2, 1), Universe::Z), gf(2, 1), z(0, 1), vec![one.clone(), one]).unwrap()
}

/// `x(n) + s x(n+1)` with `s = [[0,1],[0,0]]` over `(GF(2)^2)^Z`.
pub fn involution() -> CellularAutomaton {
    let r = ModRing::new(2).unwrap();
    let s = Matrix::parse(r, "0,1;0,0").unwrap();
    CellularAutomaton::linear(SftPresentation::full(gf(2, 2), Universe::Z), gf(2, 2), z(0, 1), vec![Matrix::identity(r, 2), s])
        .unwrap()
}

pub fn identity_on(s: &SftPresentation) -> CellularAutomaton {
    CellularAutomaton::identity(s.clone(), &caps()).unwrap()
}

/// `τ(x)(n) = x(n + shift)` on the full shift over `{0,..,base-1}`.
pub fn shift_by(u: Universe, base: usize, shift: i64) -> CellularAutomaton {
    let full = SftPresentation::full(Alphabet::numbered(base), u);
    CellularAutomaton::from_fn(full, Alphabet::numbered(base), win(u, shift, shift), |b| b[0], &caps()).unwrap()
}

/// Evaluates the constraint of `s` on a word placed at positions `0..len`,
/// reading each translate whose window fits inside the word.
fn local_ok(s: &SftPresentation, offsets: &[i64], word: &[Symbol], starts: impl Iterator<Item = i64>) -> bool {
    let mut buf = Vec::with_capacity(offsets.len());
    for t in starts {
        buf.clear();
        buf.extend(offsets.iter().map(|&o| word[(t + o) as usize]));
        if !s.allows(&buf) {
            return false;
        }
    }
    true
}

struct Extender<'a> {
    s: &'a SftPresentation,
    offsets: Vec<i64>,
    width: usize,
    base: u32,
    right: HashMap<(Vec<Symbol>, usize), bool>,
    left: HashMap<(Vec<Symbol>, usize), bool>,
}

impl<'a> Extender<'a> {
    fn new(s: &'a SftPresentation) -> Self {
        let ints = s.window().ints().unwrap();
        let lo = if s.universe() == Universe::Z { *ints.iter().min().unwrap() } else { 0 };
        let offsets: Vec<i64> = ints.iter().map(|d| d - lo).collect();
        let width = (*offsets.iter().max().unwrap() + 1) as usize;
        Extender { s, offsets, width, base: s.alphabet().size(), right: HashMap::new(), left: HashMap::new() }
    }

    fn check_block(&self, block: &[Symbol]) -> bool {
        local_ok(self.s, &self.offsets, block, std::iter::once(0))
    }

    /// `state` holds the last `width - 1` symbols.
    fn extends_right(&mut self, state: Vec<Symbol>, steps: usize) -> bool {
        if steps == 0 {
            return true;
        }
        if let Some(&v) = self.right.get(&(state.clone(), steps)) {
            return v;
        }
        let mut ok = false;
        for a in 0..self.base {
            let mut block = state.clone();
            block.push(a);
            if self.check_block(&block) && self.extends_right(block[1..].to_vec(), steps - 1) {
                ok = true;
                break;
            }
        }
        self.right.insert((state, steps), ok);
        ok
    }

    fn extends_left(&mut self, state: Vec<Symbol>, steps: usize) -> bool {
        if steps == 0 {
            return true;
        }
        if let Some(&v) = self.left.get(&(state.clone(), steps)) {
            return v;
        }
        let mut ok = false;
        for a in 0..self.base {
            let mut block = vec![a];
            block.extend_from_slice(&state);
            if self.check_block(&block) && self.extends_left(block[..self.width - 1].to_vec(), steps - 1) {
                ok = true;
                break;
            }
        }
        self.left.insert((state, steps), ok);
        ok
    }
}

/// Globally admissible blocks on `e` by brute force: enumerate locally
/// admissible words around `e` and keep those extendable by a margin of
/// `|A|^width` symbols (at least the number of transfer-graph vertices).
pub fn brute_restrict(s: &SftPresentation, e: &FiniteWindow) -> BTreeSet<Vec<Symbol>> {
    let u = s.universe();
    let mut ext = Extender::new(s);
    let w = ext.width;
    let base = ext.base;
    let margin = (base as usize).pow(w as u32);
    let pts = e.ints().unwrap();
    let (elo, ehi) = (*pts.iter().min().unwrap(), *pts.iter().max().unwrap());
    let origin = if u == Universe::Z { elo } else { 0 };
    let len = ((ehi - origin + 1) as usize).max(w);
    let mut out = BTreeSet::new();
    let total = (base as u64).pow(len as u32);
    for code in 0..total {
        let word = decode(base, len, code);
        let starts = 0..=(len - w) as i64;
        if !local_ok(s, &ext.offsets.clone(), &word, starts) {
            continue;
        }
        if !ext.extends_right(word[len - (w - 1)..].to_vec(), margin) {
            continue;
        }
        if u == Universe::Z && !ext.extends_left(word[..w - 1].to_vec(), margin) {
            continue;
        }
        out.insert(pts.iter().map(|&p| word[(p - origin) as usize]).collect());
    }
    out
}

/// Random SFT over `{0,..,base-1}`: window of width at most 3 (an interval
/// or `{0,2}`), each block allowed with probability `p`.
pub fn random_sft(rng: &mut StdRng, u: Universe, max_base: usize, p: f64) -> SftPresentation {
    let base = rng.random_range(2..=max_base);
    let shift = if u == Universe::Z { rng.random_range(-1..=1) } else { 0 };
    let window = match rng.random_range(0..4) {
        0 => win(u, shift, shift),
        1 => win(u, shift, shift + 1),
        2 => win(u, shift, shift + 2),
        _ => FiniteWindow::from_ints(u, [shift, shift + 2]).unwrap(),
    };
    let n = window.len();
    let total = (base as u64).pow(n as u32);
    let blocks: Vec<Vec<Symbol>> =
        (0..total).filter(|_| rng.random_bool(p)).map(|c| decode(base as u32, n, c)).collect();
    SftPresentation::from_blocks(Alphabet::numbered(base), window, blocks).unwrap()
}

/// Injective recoding of `s`: `k`-block code read at offset `start`, with the
/// block codes relabeled by a random permutation.
pub fn random_recoding(rng: &mut StdRng, s: &SftPresentation) -> CellularAutomaton {
    let u = s.universe();
    let base = s.alphabet().size();
    let k = rng.random_range(1..=2usize);
    let start = if u == Universe::Z { rng.random_range(-1..=1) } else { 0 };
    let size = (base as usize).pow(k as u32);
    let mut perm: Vec<u32> = (0..size as u32).collect();
    perm.shuffle(rng);
    let memory = win(u, start, start + k as i64 - 1);
    CellularAutomaton::from_fn(
        s.clone(),
        Alphabet::numbered(size),
        memory,
        |b| perm[b.iter().fold(0usize, |acc, &x| acc * base as usize + x as usize)],
        &caps(),
    )
    .unwrap()
}

/// Even-shift factors: every run of `0`s bounded by `1`s on both sides has even length.
pub fn is_even_shift_word(w: &[Symbol]) -> bool {
    let ones: Vec<usize> = w.iter().enumerate().filter(|(_, &x)| x == 1).map(|(i, _)| i).collect();
    ones.windows(2).all(|p| (p[1] - p[0] - 1) % 2 == 0)
}

/// `τ` applied to a finite block `x` on `lo..lo+len`, giving the values on
/// every `n` with `n + M ⊆ lo..lo+len`, as `(first position, values)`.
pub fn apply_to_block(ca: &CellularAutomaton, lo: i64, x: &[Symbol]) -> (i64, Vec<Symbol>) {
    let m = ca.memory().ints().unwrap();
    let (mlo, mhi) = (*m.iter().min().unwrap(), *m.iter().max().unwrap());
    let hi = lo + x.len() as i64 - 1;
    let first = if ca.universe() == Universe::N { (lo - mlo).max(0) } else { lo - mlo };
    let last = hi - mhi;
    let mut out = Vec::new();
    let mut n = first;
    while n <= last {
        let read: Vec<Symbol> = m.iter().map(|&h| x[(n + h - lo) as usize]).collect();
        out.push(ca.eval(&read).expect("rule defined on block"));
        n += 1;
    }
    (first, out)
}
