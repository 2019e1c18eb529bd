use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use shiftlab::modlin::{chain_stabilize, howell_rows, ChainOutcome, LinMap, Matrix, ModRing, Submodule};

/// Every `Z/m`-combination of `rows`, by closure under addition of generators.
fn brute_span(m: u32, k: usize, rows: &[Vec<u32>]) -> BTreeSet<Vec<u32>> {
    let mut seen = BTreeSet::from([vec![0; k]]);
    let mut frontier = vec![vec![0; k]];
    while let Some(v) = frontier.pop() {
        for r in rows {
            let w: Vec<u32> = v.iter().zip(r).map(|(a, b)| (a + b) % m).collect();
            if seen.insert(w.clone()) {
                frontier.push(w);
            }
        }
    }
    seen
}

fn random_rows(rng: &mut StdRng, m: u32, k: usize) -> Vec<Vec<u32>> {
    let n = rng.random_range(0..=k + 1);
    (0..n).map(|_| (0..k).map(|_| rng.random_range(0..m)).collect()).collect()
}

fn all_vectors(m: u32, k: usize) -> Vec<Vec<u32>> {
    (0..(m as usize).pow(k as u32))
        .map(|mut c| {
            (0..k)
                .map(|_| {
                    let d = (c % m as usize) as u32;
                    c /= m as usize;
                    d
                })
                .collect()
        })
        .collect()
}

#[test]
fn howell_form_is_canonical_for_the_row_space() {
    let mut rng = StdRng::seed_from_u64(11);
    for trial in 0..200 {
        let m = if trial % 2 == 0 { 4 } else { 2 };
        let ring = ModRing::new(m as u64).unwrap();
        let k = rng.random_range(1..=4);
        let rows = random_rows(&mut rng, m, k);
        let span = brute_span(m, k, &rows);
        let form = howell_rows(ring, k, &rows);
        assert_eq!(brute_span(m, k, &form), span, "rows {rows:?} over Z/{m}");

        // a different generating set of the same space gives the same form
        let mut shuffled: Vec<Vec<u32>> = span.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
        shuffled.extend(rows.iter().cloned());
        shuffled.reverse();
        assert_eq!(howell_rows(ring, k, &shuffled), form);

        let sub = Submodule::span(ring, k, &rows).unwrap();
        assert_eq!(sub.size(), span.len() as u128);
        assert_eq!(sub.elements().into_iter().collect::<BTreeSet<_>>(), span);
        for v in all_vectors(m, k) {
            assert_eq!(sub.member(&v).unwrap(), span.contains(&v));
        }
    }
}

fn submodule(m: u32, k: usize) -> impl Strategy<Value = Submodule> {
    prop::collection::vec(prop::collection::vec(0..m, k), 0..=k + 1)
        .prop_map(move |rows| Submodule::span(ModRing::new(m as u64).unwrap(), k, &rows).unwrap())
}

fn matrix(m: u32, rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(prop::collection::vec(0..m, cols), rows)
        .prop_map(move |r| Matrix::from_rows(ModRing::new(m as u64).unwrap(), cols, &r).unwrap())
}

proptest! {
    #[test]
    fn preimage_is_the_right_adjoint_of_image(f in matrix(4, 2, 3), s in submodule(4, 3), t in submodule(4, 2)) {
        let map = LinMap::new(f);
        let image_inside = map.image_of(&s).unwrap().is_subset(&t).unwrap();
        let inside_preimage = s.is_subset(&map.preimage(&t).unwrap()).unwrap();
        prop_assert_eq!(image_inside, inside_preimage);
    }

    #[test]
    fn preimage_is_exact(f in matrix(4, 2, 2), t in submodule(4, 2)) {
        let map = LinMap::new(f);
        let pre = map.preimage(&t).unwrap();
        for v in all_vectors(4, 2) {
            prop_assert_eq!(pre.member(&v).unwrap(), t.member(&map.apply(&v).unwrap()).unwrap());
        }
    }

    #[test]
    fn projection_of_intersection_is_inside_both_projections(s in submodule(2, 4), t in submodule(2, 4)) {
        let coords = [0, 2];
        let lhs = s.intersect(&t).unwrap().project(&coords).unwrap();
        let rhs = s.project(&coords).unwrap().intersect(&t.project(&coords).unwrap()).unwrap();
        prop_assert!(lhs.is_subset(&rhs).unwrap());
    }

    #[test]
    fn intersection_matches_element_sets(s in submodule(4, 3), t in submodule(4, 3)) {
        let i: BTreeSet<_> = s.intersect(&t).unwrap().elements().into_iter().collect();
        let se: BTreeSet<_> = s.elements().into_iter().collect();
        let te: BTreeSet<_> = t.elements().into_iter().collect();
        prop_assert_eq!(i, se.intersection(&te).cloned().collect::<BTreeSet<_>>());
    }

    #[test]
    fn preimage_under_projection_then_project_is_identity(t in submodule(4, 2)) {
        let coords = [2, 0];
        let lifted = t.preimage_under_projection(3, &coords).unwrap();
        prop_assert_eq!(lifted.project(&coords).unwrap(), t);
    }

    #[test]
    fn kernel_is_the_preimage_of_zero(f in matrix(4, 2, 3)) {
        let map = LinMap::new(f);
        let zero = Submodule::zero(ModRing::new(4).unwrap(), 2);
        prop_assert_eq!(map.kernel(), map.preimage(&zero).unwrap());
    }
}

#[test]
fn descending_chains_stabilize() {
    let ring = ModRing::new(2).unwrap();
    let full = Submodule::full(ring, 2);
    let line = Submodule::span(ring, 2, &[vec![1, 1]]).unwrap();
    let zero = Submodule::zero(ring, 2);
    let chain = vec![full.clone(), line.clone(), zero.clone(), zero.clone(), zero.clone()];
    match chain_stabilize(chain, 10, 1) {
        ChainOutcome::Stabilized { value, index } => {
            assert_eq!(value, zero);
            assert_eq!(index, 2);
        }
        other => panic!("{other:?}"),
    }
    match chain_stabilize(vec![full, line, zero], 2, 1) {
        ChainOutcome::Inconclusive { .. } => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn rings_reject_trivial_moduli() {
    assert!(ModRing::new(0).is_err());
    assert!(ModRing::new(1).is_err());
    let r = ModRing::new(6).unwrap();
    assert_eq!(r.reduce(-1), 5);
    assert_eq!(r.mul(4, 5), 2);
}
