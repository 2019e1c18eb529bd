//! Monoid universes, finite windows and exhaustions.
//!
//! Three universes are supported: the integers `Z`, the natural numbers `N`
//! and the free monoid on `r` generators. Elements of `Z`/`N` are plain
//! integers; free-monoid elements are words ordered length-lexicographically.
//! The shift action is `(g * x)(h) = x(hg)`, so translating a window `D` by
//! `g` gives the product set `Dg`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShiftError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Universe {
    /// The group of integers.
    Z,
    /// The monoid of natural numbers (one-sided shifts).
    N,
    /// The free monoid of the given rank.
    Free(u8),
}

impl Universe {
    pub fn identity(&self) -> Element {
        match self {
            Universe::Z | Universe::N => Element::Int(0),
            Universe::Free(_) => Element::Word(Word::empty()),
        }
    }

    pub fn is_one_dimensional(&self) -> bool {
        matches!(self, Universe::Z | Universe::N)
    }

    pub fn is_one_sided(&self) -> bool {
        matches!(self, Universe::N)
    }

    /// Monoid product `a * b`.
    pub fn mul(&self, a: &Element, b: &Element) -> Result<Element> {
        match (self, a, b) {
            (Universe::Z | Universe::N, Element::Int(x), Element::Int(y)) => Ok(Element::Int(x + y)),
            (Universe::Free(_), Element::Word(x), Element::Word(y)) => Ok(Element::Word(x.concat(y))),
            _ => Err(ShiftError::Invalid(format!("{a} and {b} are not elements of {self}"))),
        }
    }

    pub fn contains(&self, e: &Element) -> bool {
        match (self, e) {
            (Universe::Z, Element::Int(_)) => true,
            (Universe::N, Element::Int(v)) => *v >= 0,
            (Universe::Free(r), Element::Word(w)) => w.letters().iter().all(|&l| l < *r),
            _ => false,
        }
    }

    /// Parses `Z`, `N` or `free R`.
    pub fn parse(s: &str) -> Result<Universe> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        match parts.as_slice() {
            ["Z"] | ["z"] => Ok(Universe::Z),
            ["N"] | ["n"] => Ok(Universe::N),
            ["free", r] => {
                let r: u8 = r
                    .parse()
                    .map_err(|_| ShiftError::Invalid(format!("bad free-monoid rank `{r}`")))?;
                if r == 0 || r > 26 {
                    return Err(ShiftError::Invalid(format!("free-monoid rank {r} out of range 1..=26")));
                }
                Ok(Universe::Free(r))
            }
            _ => Err(ShiftError::Invalid(format!("unknown universe `{s}`"))),
        }
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Universe::Z => write!(f, "Z"),
            Universe::N => write!(f, "N"),
            Universe::Free(r) => write!(f, "free {r}"),
        }
    }
}

/// A word over the generators `a, b, c, ...` of a free monoid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<u8>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Parses `1` (the empty word) or dot-separated generator letters such as `a.b.a`.
    pub fn parse(s: &str, rank: u8) -> Result<Word> {
        let s = s.trim();
        if s == "1" {
            return Ok(Word::empty());
        }
        let mut letters = Vec::new();
        for part in s.split('.') {
            let mut chars = part.chars();
            let c = match (chars.next(), chars.next()) {
                (Some(c), None) if c.is_ascii_lowercase() => c,
                _ => return Err(ShiftError::Invalid(format!("bad word `{s}`"))),
            };
            let l = c as u8 - b'a';
            if l >= rank {
                return Err(ShiftError::Invalid(format!("generator `{c}` exceeds rank {rank}")));
            }
            letters.push(l);
        }
        Ok(Word(letters))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{}", (b'a' + l) as char)?;
        }
        Ok(())
    }
}

/// An element of a universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    Int(i64),
    Word(Word),
}

impl Element {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Element::Int(v) => Some(*v),
            Element::Word(_) => None,
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Int(v) => write!(f, "{v}"),
            Element::Word(w) => write!(f, "{w}"),
        }
    }
}

/// A finite set of universe elements kept in canonical (sorted, deduplicated) order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteWindow {
    universe: Universe,
    elements: Vec<Element>,
}

impl FiniteWindow {
    pub fn new(universe: Universe, elements: impl IntoIterator<Item = Element>) -> Result<Self> {
        let mut elements: Vec<Element> = elements.into_iter().collect();
        for e in &elements {
            if !universe.contains(e) {
                return Err(ShiftError::InvalidWindow(format!("{e} is not an element of {universe}")));
            }
        }
        elements.sort();
        elements.dedup();
        Ok(FiniteWindow { universe, elements })
    }

    pub fn from_ints(universe: Universe, ints: impl IntoIterator<Item = i64>) -> Result<Self> {
        Self::new(universe, ints.into_iter().map(Element::Int))
    }

    /// The closed integer interval `lo..=hi` (empty when `lo > hi`).
    pub fn interval(universe: Universe, lo: i64, hi: i64) -> Result<Self> {
        Self::from_ints(universe, lo..=hi)
    }

    pub fn singleton_identity(universe: Universe) -> Self {
        FiniteWindow { universe, elements: vec![universe.identity()] }
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.elements.binary_search(e).is_ok()
    }

    pub fn index_of(&self, e: &Element) -> Option<usize> {
        self.elements.binary_search(e).ok()
    }

    pub fn contains_identity(&self) -> bool {
        self.contains(&self.universe.identity())
    }

    pub fn is_subset(&self, other: &FiniteWindow) -> bool {
        self.universe == other.universe && self.elements.iter().all(|e| other.contains(e))
    }

    fn same_universe(&self, other: &FiniteWindow) -> Result<()> {
        if self.universe != other.universe {
            return Err(ShiftError::MixedUniverse(self.universe.to_string(), other.universe.to_string()));
        }
        Ok(())
    }

    /// The product set `EF = {ef : e in E, f in F}`.
    pub fn product(&self, other: &FiniteWindow) -> Result<FiniteWindow> {
        self.same_universe(other)?;
        let mut out = Vec::with_capacity(self.len() * other.len());
        for e in &self.elements {
            for f in &other.elements {
                out.push(self.universe.mul(e, f)?);
            }
        }
        FiniteWindow::new(self.universe, out)
    }

    pub fn union(&self, other: &FiniteWindow) -> Result<FiniteWindow> {
        self.same_universe(other)?;
        FiniteWindow::new(self.universe, self.elements.iter().chain(other.elements.iter()).cloned())
    }

    /// Integer values; fails for free-monoid windows.
    pub fn ints(&self) -> Result<Vec<i64>> {
        self.elements
            .iter()
            .map(|e| e.as_int().ok_or_else(|| ShiftError::UnsupportedUniverse(self.universe.to_string())))
            .collect()
    }

    /// `(min, max)` of an integer window, `None` when empty.
    pub fn bounds(&self) -> Result<Option<(i64, i64)>> {
        let v = self.ints()?;
        Ok(v.first().map(|&lo| (lo, *v.last().unwrap())))
    }

    /// Smallest integer interval containing the window.
    pub fn hull(&self) -> Result<FiniteWindow> {
        match self.bounds()? {
            Some((lo, hi)) => FiniteWindow::interval(self.universe, lo, hi),
            None => Ok(self.clone()),
        }
    }

    /// Whether the elements form a contiguous integer range.
    pub fn is_interval(&self) -> bool {
        match self.bounds() {
            Ok(Some((lo, hi))) => (hi - lo + 1) as usize == self.len(),
            Ok(None) => true,
            Err(_) => false,
        }
    }

    /// Translate an integer window by `t` (`D + t`).
    pub fn translate(&self, t: i64) -> Result<FiniteWindow> {
        let v = self.ints()?;
        FiniteWindow::from_ints(self.universe, v.into_iter().map(|x| x + t))
    }

    pub fn with_identity(&self) -> FiniteWindow {
        let mut e = self.elements.clone();
        e.push(self.universe.identity());
        FiniteWindow::new(self.universe, e).expect("identity belongs to every universe")
    }

    /// Removes one element.
    pub fn without(&self, e: &Element) -> FiniteWindow {
        FiniteWindow {
            universe: self.universe,
            elements: self.elements.iter().filter(|x| *x != e).cloned().collect(),
        }
    }

    /// Parses `lo..hi` (inclusive), `{a,b,c}` or a single element.
    pub fn parse(universe: Universe, s: &str) -> Result<FiniteWindow> {
        let s = s.trim();
        let parse_elem = |t: &str| -> Result<Element> {
            let t = t.trim();
            match universe {
                Universe::Z | Universe::N => t
                    .parse::<i64>()
                    .map(Element::Int)
                    .map_err(|_| ShiftError::InvalidWindow(format!("bad integer `{t}`"))),
                Universe::Free(r) => Word::parse(t, r).map(Element::Word),
            }
        };
        if let Some(inner) = s.strip_prefix('{').and_then(|x| x.strip_suffix('}')) {
            if inner.trim().is_empty() {
                return FiniteWindow::new(universe, []);
            }
            let elems = inner.split(',').map(parse_elem).collect::<Result<Vec<_>>>()?;
            return FiniteWindow::new(universe, elems);
        }
        if universe.is_one_dimensional() {
            if let Some(pos) = s.find("..").filter(|&p| p > 0) {
                let lo: i64 = s[..pos]
                    .trim()
                    .parse()
                    .map_err(|_| ShiftError::InvalidWindow(format!("bad interval `{s}`")))?;
                let hi: i64 = s[pos + 2..]
                    .trim()
                    .parse()
                    .map_err(|_| ShiftError::InvalidWindow(format!("bad interval `{s}`")))?;
                if lo > hi {
                    return Err(ShiftError::InvalidWindow(format!("empty interval `{s}`")));
                }
                return FiniteWindow::interval(universe, lo, hi);
            }
        }
        FiniteWindow::new(universe, [parse_elem(s)?])
    }
}

impl fmt::Display for FiniteWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() > 1 && self.is_interval() {
            let (lo, hi) = self.bounds().ok().flatten().unwrap();
            return write!(f, "{lo}..{hi}");
        }
        write!(f, "{{")?;
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

/// Increasing exhaustion `E_0 ⊆ E_1 ⊆ ...` of a universe.
///
/// For `Z`, `E_n = [-n-c, n+c]`; for `N`, `E_n = [0, n+c]`; for `Free(r)`,
/// all words of length at most `n+c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exhaustion {
    pub universe: Universe,
    pub base: usize,
}

impl Exhaustion {
    pub fn new(universe: Universe, base: usize) -> Self {
        Exhaustion { universe, base }
    }

    /// Smallest base radius whose `E_0` contains `window`.
    pub fn covering(window: &FiniteWindow) -> Result<Self> {
        let universe = window.universe();
        let base = match universe {
            Universe::Z => window.ints()?.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0),
            Universe::N => window.ints()?.iter().copied().max().unwrap_or(0) as usize,
            Universe::Free(_) => window
                .elements()
                .iter()
                .map(|e| match e {
                    Element::Word(w) => w.len(),
                    Element::Int(_) => 0,
                })
                .max()
                .unwrap_or(0),
        };
        Ok(Exhaustion { universe, base })
    }

    pub fn window(&self, n: usize) -> FiniteWindow {
        let radius = (n + self.base) as i64;
        match self.universe {
            Universe::Z => FiniteWindow::interval(Universe::Z, -radius, radius).unwrap(),
            Universe::N => FiniteWindow::interval(Universe::N, 0, radius).unwrap(),
            Universe::Free(r) => FiniteWindow::new(self.universe, ball(r, n + self.base)).unwrap(),
        }
    }
}

/// All words of length at most `len` over `rank` generators.
pub fn ball(rank: u8, len: usize) -> Vec<Element> {
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(layer.len() * rank as usize);
        for w in &layer {
            for l in 0..rank {
                let mut v = w.letters().to_vec();
                v.push(l);
                next.push(Word::new(v));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out.into_iter().map(Element::Word).collect()
}
