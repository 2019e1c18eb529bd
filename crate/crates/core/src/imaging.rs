//! Finite-type presentations of images and preimages under injective
//! automata, sofic transfer, and the direct-sum reduction.

use crate::alphabet::{code_space, decode, Alphabet, BlockSet, Symbol};
use crate::cellular::CellularAutomaton;
use crate::error::{Result, ShiftError};
use crate::inversion::InverseCertificate;
use crate::modlin::Matrix;
use crate::subshift::{
    hull_layout, relative_offsets, restrict_sft, sft_included, sofic_equal_to_depth, span_blocks, subshift_equal, subshift_included,
    window_change, Allowed, Caps, Constraint, LabeledGraph, Presentation, SftPresentation, SoficPresentation, System,
};
use crate::universe::{FiniteWindow, Universe};

/// Outcome of comparing a produced SFT with the sofic presentation it must equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub exact_equal: bool,
    pub depth: usize,
    pub equal_to_depth: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageSftResult {
    /// `Σ(B; M'², Γ_{M'²})`.
    pub presentation: SftPresentation,
    pub merged_window: FiniteWindow,
    pub verification: Verification,
}

fn verify(sft: &SftPresentation, sofic: &SoficPresentation, depth: usize, caps: &Caps) -> Result<Verification> {
    let a = Presentation::Sft(sft.clone());
    let b = Presentation::Sofic(sofic.clone());
    let exact_equal = subshift_equal(&a, &b, caps)?;
    let equal_to_depth = sofic_equal_to_depth(&a, &b, depth, caps)?;
    Ok(Verification { exact_equal, depth, equal_to_depth })
}

/// `τ(Δ)` as an SFT on the window `M'²`, verified against `(Δ, τ)`.
pub fn image_sft(
    ca: &CellularAutomaton,
    delta: &SftPresentation,
    cert: &InverseCertificate,
    depth: usize,
    caps: &Caps,
) -> Result<ImageSftResult> {
    if !sft_included(delta, ca.domain(), caps)? {
        return Err(ShiftError::Containment("Δ is not inside the automaton's domain".into()));
    }
    let merged = cert.merged_window.union(delta.window())?.union(ca.memory())?.with_identity().hull()?;
    let square = merged.product(&merged)?;
    // τ(Δ) = {y : σ(y) ∈ Δ, τ(σ(y)) = y}; both windows lie inside M'²
    let presentation =
        pullback(&cert.sigma, delta, ca, ca.codomain(), std::slice::from_ref(&square), |_| Ok(true), caps)?;
    let code = ca.restricted_to(&window_change(delta, &merged, caps)?, caps)?;
    let verification = verify(&presentation, &SoficPresentation::new(code), depth, caps)?;
    if !(verification.exact_equal && verification.equal_to_depth) {
        return Err(ShiftError::VerificationFailed("image presentation differs from the sofic image".into()));
    }
    Ok(ImageSftResult { presentation, merged_window: merged, verification })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveredSft {
    /// `Σ(A; M'', Δ_{M''})`.
    pub presentation: SftPresentation,
    pub merged_window: FiniteWindow,
    pub verification: Verification,
}

/// Reads a block laid out on `window` by absolute position.
struct Layout(Vec<i64>);

impl Layout {
    fn new(window: &FiniteWindow) -> Result<Self> {
        Ok(Layout(window.ints()?))
    }

    fn at(&self, block: &[Symbol], p: i64) -> Symbol {
        block[self.0.binary_search(&p).expect("position inside the layout")]
    }
}

/// `f(x)` at each point of `points`, read from a block laid out on `layout`.
fn images_at(f: &CellularAutomaton, mem: &[i64], layout: &Layout, block: &[Symbol], points: &[i64]) -> Option<Vec<Symbol>> {
    let mut read = vec![0; mem.len()];
    points
        .iter()
        .map(|&p| {
            for (r, &m) in read.iter_mut().zip(mem) {
                *r = layout.at(block, p + m);
            }
            f.eval(&read)
        })
        .collect()
}

/// `{x : f(x) ∈ target, g(f(x)) = x}` over `alphabet`, presented on the
/// first of `windows` accepted by `accept`. Each window must contain
/// `F·D` and `F·G ∪ {0}` for the memories `F`, `G` of `f`, `g` and the
/// window `D` of `target` unless `accept` checks the result exactly.
fn pullback(
    f: &CellularAutomaton,
    target: &SftPresentation,
    g: &CellularAutomaton,
    alphabet: &Alphabet,
    windows: &[FiniteWindow],
    mut accept: impl FnMut(&SftPresentation) -> Result<bool>,
    caps: &Caps,
) -> Result<SftPresentation> {
    let fm = f.memory();
    let on_target = fm.product(target.window())?;
    let on_return = fm.product(g.memory())?.with_identity();
    let (mem, d_pts, g_pts) = (fm.ints()?, target.window().ints()?, g.memory().ints()?);
    let (target_layout, return_layout) = (Layout::new(&on_target)?, Layout::new(&on_return)?);
    let in_target = Constraint {
        offsets: relative_offsets(&on_target)?,
        test: Box::new(|b: &[Symbol]| images_at(f, &mem, &target_layout, b, &d_pts).is_some_and(|y| target.allows(&y))),
        prefix: None,
    };
    let returns = Constraint {
        offsets: relative_offsets(&on_return)?,
        test: Box::new(|b: &[Symbol]| {
            images_at(f, &mem, &return_layout, b, &g_pts)
                .and_then(|y| g.eval(&y))
                .is_some_and(|v| v == return_layout.at(b, 0))
        }),
        prefix: None,
    };
    let universe = f.universe();
    let system = System { universe, base: alphabet.size(), constraints: vec![in_target, returns] };
    let graph = system.graph(0, caps)?;
    let linear = f.is_linear() && g.is_linear() && target.is_linear();
    let mut last = None;
    for window in windows {
        code_space(alphabet.size(), window.len())?;
        let (idx, len) = hull_layout(window)?;
        let blocks = BlockSet::from_codes(window.clone(), alphabet.size(), graph.project_paths(&idx, len, caps)?)?;
        let p = if linear {
            SftPresentation::linear(alphabet.clone(), window.clone(), span_blocks(alphabet, &blocks)?)?
        } else {
            SftPresentation::from_codes(alphabet.clone(), window.clone(), blocks.codes().clone())?
        };
        if accept(&p)? {
            return Ok(p);
        }
        last = Some(p);
    }
    last.ok_or_else(|| ShiftError::Invalid("no candidate window".into()))
}

/// Intervals `[0, k)` for `k = 1..` up to the hull of `window` taken from
/// `0` (`Z`: translated), ending with a window containing `window`'s shape.
fn growing_intervals(window: &FiniteWindow) -> Result<Vec<FiniteWindow>> {
    let u = window.universe();
    let Some((lo, hi)) = window.bounds()? else {
        return Ok(vec![window.clone()]);
    };
    let top = match u {
        Universe::N => hi,
        _ => hi - lo,
    };
    (0..=top).map(|k| FiniteWindow::interval(u, 0, k)).collect()
}

/// Same SFT on the shortest interval window that presents it. A candidate
/// agreeing with `s` on `[0, L)` for every `L` up to the hull length of
/// `s`'s window presents `s`; candidates too large to compare are skipped.
pub fn shortest_window(s: &SftPresentation, caps: &Caps) -> Result<SftPresentation> {
    let windows = growing_intervals(s.window())?;
    let n = windows.len();
    let on = |p: &SftPresentation, w: &FiniteWindow| restrict_sft(p, w, caps).map(|r| r.blocks);
    for (k, w) in windows.iter().enumerate().take(n.saturating_sub(1)) {
        let r = restrict_sft(s, w, caps)?;
        let candidate = match r.submodule {
            Some(sub) => SftPresentation::linear(s.alphabet().clone(), w.clone(), sub)?,
            None => SftPresentation::from_codes(s.alphabet().clone(), w.clone(), r.blocks.codes().clone())?,
        };
        let mut same = true;
        for longer in &windows[k + 1..] {
            match (on(&candidate, longer), on(s, longer)) {
                (Ok(a), Ok(b)) if a == b => {}
                (Ok(_), Ok(_)) | (Err(ShiftError::CapExceeded { .. }), _) => {
                    same = false;
                    break;
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
        if same {
            return Ok(candidate);
        }
    }
    Ok(s.clone())
}

/// Recovers `Δ = σ(Y)` from an SFT image `Y = τ(Δ)` as
/// `{x : τ(x) ∈ Y, σ(τ(x)) = x}`. `Y` is first re-presented on its shortest
/// interval window `F`; the result is presented on the shortest interval
/// inside `M'' = hull((M∪N)F ∪ MN ∪ M' ∪ {0})` that equals `σ(Y)`.
pub fn recover_preimage_sft(
    ca: &CellularAutomaton,
    image: &SftPresentation,
    cert: &InverseCertificate,
    depth: usize,
    caps: &Caps,
) -> Result<RecoveredSft> {
    let gamma = Presentation::Sofic(SoficPresentation::new(ca.clone()));
    if !subshift_included(&Presentation::Sft(image.clone()), &gamma, caps)? {
        return Err(ShiftError::Containment("image is not inside τ(Σ)".into()));
    }
    let image = shortest_window(image, caps)?;
    let m = ca.memory();
    let n = cert.sigma.memory();
    let merged = m
        .union(n)?
        .product(image.window())?
        .union(&m.product(n)?)?
        .union(&cert.merged_window)?
        .with_identity()
        .hull()?;
    let inverse = SoficPresentation::new(cert.sigma.restricted_to(&image, caps)?);
    let language = LabeledGraph::from_presentation(&Presentation::Sofic(inverse.clone()), caps)?;
    let presentation = pullback(
        ca,
        &image,
        &cert.sigma,
        ca.domain().alphabet(),
        &growing_intervals(&merged)?,
        |p| LabeledGraph::from_presentation(&Presentation::Sft(p.clone()), caps)?.same_language(&language, caps),
        caps,
    )?;
    let verification = verify(&presentation, &inverse, depth, caps)?;
    if !(verification.exact_equal && verification.equal_to_depth) {
        return Err(ShiftError::VerificationFailed("recovered presentation differs from σ(image)".into()));
    }
    Ok(RecoveredSft { presentation, merged_window: merged, verification })
}

/// `τ(Δ)` for a sofic `Δ = γ(W)`: the presentation `(W, τ∘γ)`.
pub fn sofic_image(ca: &CellularAutomaton, delta: &SoficPresentation, caps: &Caps) -> Result<SoficPresentation> {
    Ok(SoficPresentation::new(CellularAutomaton::compose(ca, delta.code(), caps)?))
}

/// `Δ = σ(τ(Δ))` for a sofic image `τ(Δ) = γ(W)`: the presentation `(W, σ∘γ)`.
pub fn sofic_preimage(
    ca: &CellularAutomaton,
    image: &SoficPresentation,
    cert: &InverseCertificate,
    caps: &Caps,
) -> Result<SoficPresentation> {
    let gamma = Presentation::Sofic(SoficPresentation::new(ca.clone()));
    if !subshift_included(&Presentation::Sofic(image.clone()), &gamma, caps)? {
        return Err(ShiftError::Containment("sofic image is not inside τ(Σ)".into()));
    }
    Ok(SoficPresentation::new(CellularAutomaton::compose(&cert.sigma, image.code(), caps)?))
}

/// Smallest `k ≤ max_width` with `P = Σ(B; [0,k), P_[0,k))`, or `None` when
/// no window up to the bound presents `P` (evidence only, not a proof of non-SFT).
pub fn sft_window_to_depth(p: &Presentation, max_width: usize, caps: &Caps) -> Result<Option<usize>> {
    for k in 1..=max_width {
        let w = FiniteWindow::interval(p.universe(), 0, k as i64 - 1)?;
        let r = crate::subshift::restrict(p, &w, caps)?;
        let candidate = SftPresentation::from_codes(p.alphabet().clone(), w, r.blocks.codes().clone())?;
        if subshift_equal(&Presentation::Sft(candidate), p, caps)? {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// `τ_S(x, y) = (τ(x), y)` on `S = A ⊕ B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectSumReduction {
    pub automaton: CellularAutomaton,
    pub domain_alphabet: Alphabet,
    pub second: Alphabet,
}

impl DirectSumReduction {
    /// `π^{-1}(Δ) ⊆ S^G` for `Δ ⊆ A^G`.
    pub fn lift(&self, delta: &SftPresentation, caps: &Caps) -> Result<SftPresentation> {
        lift(delta, &self.second, caps)
    }

    /// `π^{-1}(Y) ⊆ (B ⊕ B)^G` for `Y ⊆ B^G`.
    pub fn lift_image(&self, image: &SftPresentation, caps: &Caps) -> Result<SftPresentation> {
        lift(image, &self.second, caps)
    }
}

/// Preimage of an SFT over `A` under the first projection `A ⊕ C -> A`.
pub fn lift(delta: &SftPresentation, second: &Alphabet, caps: &Caps) -> Result<SftPresentation> {
    let a = delta.alphabet();
    let s = a.direct_sum(second)?;
    let window = delta.window().clone();
    let n = window.len();
    match delta.allowed() {
        Allowed::Linear(p) => {
            let (ka, kc) = (a.rank().unwrap(), second.rank().unwrap());
            let coords: Vec<usize> = (0..n).flat_map(|i| (0..ka).map(move |j| i * (ka + kc) + j)).collect();
            SftPresentation::linear(s, window, p.preimage_under_projection(n * (ka + kc), &coords)?)
        }
        Allowed::Blocks(codes) => {
            let c_space = code_space(second.size(), n)?;
            caps.check(|| "lifted blocks".into(), codes.len() as u128 * c_space as u128)?;
            let mut out = Vec::new();
            for &code in codes {
                let x = decode(a.size(), n, code);
                for c in 0..c_space {
                    let y = decode(second.size(), n, c);
                    out.push(x.iter().zip(&y).map(|(&p, &q)| a.join_pair(second, p, q)).collect());
                }
            }
            SftPresentation::from_blocks(s, window, out)
        }
    }
}

pub fn direct_sum_reduce(ca: &CellularAutomaton, caps: &Caps) -> Result<DirectSumReduction> {
    let a = ca.domain().alphabet().clone();
    let b = ca.codomain().clone();
    let s = a.direct_sum(&b)?;
    let out = b.direct_sum(&b)?;
    let domain = lift(ca.domain(), &b, caps)?;
    let memory = ca.memory().with_identity();
    let m_idx = crate::alphabet::positions_in(&memory, ca.memory())?;
    let origin = memory.index_of(&memory.universe().identity()).unwrap();
    let automaton = if ca.is_linear() {
        let crate::cellular::LocalRule::Linear(cs) = ca.rule() else { unreachable!() };
        let ring = a.ring().unwrap();
        let (ka, kb) = (a.rank().unwrap(), b.rank().unwrap());
        let mut coeffs = vec![Matrix::zeros(ring, 2 * kb, ka + kb); memory.len()];
        for (c, &slot) in cs.iter().zip(&m_idx) {
            for i in 0..kb {
                for j in 0..ka {
                    coeffs[slot].set(i, j, c.get(i, j));
                }
            }
        }
        for i in 0..kb {
            coeffs[origin].set(kb + i, ka + i, 1);
        }
        CellularAutomaton::linear(domain, out, memory, coeffs)?
    } else {
        let mut missing = None;
        let automaton = CellularAutomaton::from_fn(
            domain,
            out.clone(),
            memory,
            |blk| {
                let x: Vec<Symbol> = m_idx.iter().map(|&i| s.split_pair(&b, blk[i]).0).collect();
                let y0 = s.split_pair(&b, blk[origin]).1;
                match ca.eval(&x) {
                    Some(v) => b.join_pair(&b, v, y0),
                    None => {
                        missing.get_or_insert_with(|| a.format_block(&x));
                        0
                    }
                }
            },
            caps,
        )?;
        if let Some(m) = missing {
            return Err(ShiftError::RuleUndefined(m));
        }
        automaton
    };
    Ok(DirectSumReduction { automaton, domain_alphabet: s, second: b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inversion::{check_injective, invert, SearchOptions};
    use crate::modlin::ModRing;
    use crate::subshift::{restrict_sft, sft_equal};
    use crate::universe::Universe;

    fn caps() -> Caps {
        Caps::default()
    }

    fn win(lo: i64, hi: i64) -> FiniteWindow {
        FiniteWindow::interval(Universe::Z, lo, hi).unwrap()
    }

    fn golden() -> SftPresentation {
        SftPresentation::from_forbidden(Alphabet::numbered(2), win(0, 1), [vec![1, 1]], &caps()).unwrap()
    }

    fn higher_block() -> CellularAutomaton {
        CellularAutomaton::from_fn(golden(), Alphabet::numbered(4), win(0, 1), |b| b[0] * 2 + b[1], &caps()).unwrap()
    }

    fn gf2(k: usize) -> Alphabet {
        Alphabet::module(ModRing::new(2).unwrap(), k).unwrap()
    }

    fn involution() -> CellularAutomaton {
        let r = ModRing::new(2).unwrap();
        let s = Matrix::parse(r, "0,1;0,0").unwrap();
        CellularAutomaton::linear(SftPresentation::full(gf2(2), Universe::Z), gf2(2), win(0, 1), vec![Matrix::identity(r, 2), s])
            .unwrap()
    }

    #[test]
    fn higher_block_image_and_back() {
        let t = higher_block();
        let cert = invert(&t, SearchOptions::default(), &caps()).unwrap().unwrap();
        let img = image_sft(&t, &golden(), &cert, 8, &caps()).unwrap();
        assert_eq!(img.presentation.window(), &win(0, 2));
        assert_eq!(img.presentation.allowed_blocks(&caps()).unwrap().len(), 8);
        let back = recover_preimage_sft(&t, &img.presentation, &cert, 8, &caps()).unwrap();
        assert!(sft_equal(&back.presentation, &golden(), &caps()).unwrap());
    }

    #[test]
    fn involution_constants_round_trip() {
        let t = involution();
        let cert = invert(&t, SearchOptions::default(), &caps()).unwrap().unwrap();
        let diag = crate::alphabet::diagonal(&gf2(2), 2).unwrap();
        let constants = SftPresentation::linear(gf2(2), win(0, 1), diag).unwrap();
        let img = image_sft(&t, &constants, &cert, 6, &caps()).unwrap();
        let on_zero = restrict_sft(&img.presentation, &win(0, 0), &caps()).unwrap();
        assert_eq!(on_zero.blocks.len(), 4);
        let back = recover_preimage_sft(&t, &img.presentation, &cert, 6, &caps()).unwrap();
        assert!(sft_equal(&back.presentation, &constants, &caps()).unwrap());
        let full = SftPresentation::full(gf2(2), Universe::Z);
        let img_full = image_sft(&t, &full, &cert, 4, &caps()).unwrap();
        assert!(sft_equal(&img_full.presentation, &full, &caps()).unwrap());
    }

    #[test]
    fn even_shift_is_not_sft_to_depth() {
        let even = CellularAutomaton::from_fn(golden(), Alphabet::numbered(2), win(0, 1), |b| u32::from(b == [0, 0]), &caps())
            .unwrap();
        let p = Presentation::Sofic(SoficPresentation::new(even));
        assert_eq!(sft_window_to_depth(&p, 6, &caps()).unwrap(), None);
        let g = Presentation::Sft(golden());
        assert_eq!(sft_window_to_depth(&g, 3, &caps()).unwrap(), Some(2));
    }

    #[test]
    fn reduction_keeps_verdicts() {
        let r = ModRing::new(2).unwrap();
        let one = Matrix::identity(r, 1);
        let xor = CellularAutomaton::linear(SftPresentation::full(gf2(1), Universe::Z), gf2(1), win(0, 1), vec![one.clone(), one])
            .unwrap();
        let red = direct_sum_reduce(&xor, &caps()).unwrap();
        assert!(!check_injective(&red.automaton, &caps()).unwrap().injective);
        let red = direct_sum_reduce(&involution(), &caps()).unwrap();
        assert!(check_injective(&red.automaton, &caps()).unwrap().injective);
        let red = direct_sum_reduce(&higher_block(), &caps()).unwrap();
        assert!(check_injective(&red.automaton, &caps()).unwrap().injective);
    }
}
