mod common;

use common::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use shiftlab::alphabet::{Alphabet, Symbol};
use shiftlab::cellular::{periodic_points, CellularAutomaton, PeriodicConfig};
use shiftlab::subshift::SftPresentation;
use shiftlab::universe::{FiniteWindow, Universe};

fn points(s: &SftPresentation, p: usize) -> Vec<PeriodicConfig> {
    periodic_points(s, p, &caps()).unwrap()
}

#[test]
fn induced_map_agrees_with_periodic_application() {
    let mut rng = StdRng::seed_from_u64(21);
    for u in [Universe::Z, Universe::N] {
        for _ in 0..25 {
            let s = random_sft(&mut rng, u, 3, 0.7);
            let ca = random_recoding(&mut rng, &s);
            let e = if u == Universe::Z { z(-1, 1) } else { win(u, 0, 2) };
            let induced = ca.induced_map(&e, &caps()).unwrap();
            let source = induced.source.ints().unwrap();
            let targets = e.ints().unwrap();
            for x in points(&s, 4) {
                let y = ca.apply_periodic(&x).unwrap();
                let read: Vec<Symbol> = source.iter().map(|&n| x.at(n)).collect();
                let expected: Vec<Symbol> = targets.iter().map(|&n| y.at(n)).collect();
                assert_eq!(induced.apply(&read), Some(expected));
            }
        }
    }
}

#[test]
fn periodic_points_lie_in_the_shift() {
    let mut rng = StdRng::seed_from_u64(22);
    for u in [Universe::Z, Universe::N] {
        for _ in 0..25 {
            let s = random_sft(&mut rng, u, 3, 0.6);
            for x in points(&s, 5) {
                assert!(x.in_sft(&s).unwrap());
            }
        }
    }
    // golden mean: cycle words of length p number trace(A^p), the Lucas numbers
    let cycles = points(&golden(), 6);
    for (p, lucas) in (1..=6usize).zip([1, 3, 4, 7, 11, 18]) {
        assert_eq!(cycles.iter().filter(|x| x.cycle.len() == p).count(), lucas, "period {p}");
    }
}

#[test]
fn linear_and_table_rules_agree() {
    let lin = involution();
    let table = CellularAutomaton::from_fn(
        lin.domain().clone(),
        lin.codomain().clone(),
        lin.memory().clone(),
        |b| lin.eval(b).unwrap(),
        &caps(),
    )
    .unwrap();
    assert!(!table.is_linear());
    let a = lin.domain().alphabet().clone();
    for x in points(lin.domain(), 4) {
        let y = lin.apply_periodic(&x).unwrap();
        assert!(y.same_as(&table.apply_periodic(&x).unwrap()));
        // by hand: y(n) = x(n) + s x(n+1), s swapping the second coordinate into the first
        for n in 0..4 {
            let (u, v) = (a.to_vector(x.at(n)), a.to_vector(x.at(n + 1)));
            let expected = a.from_vector(&[(u[0] + v[1]) % 2, u[1]]);
            assert_eq!(y.at(n), expected);
        }
    }
    assert_eq!(lin.table(&caps()).unwrap(), table.table(&caps()).unwrap());
}

#[test]
fn automata_commute_with_the_shift() {
    let mut rng = StdRng::seed_from_u64(23);
    for u in [Universe::Z, Universe::N] {
        for _ in 0..25 {
            let s = random_sft(&mut rng, u, 3, 0.7);
            let ca = random_recoding(&mut rng, &s);
            for x in points(&s, 4) {
                let a = ca.apply_periodic(&x.shifted()).unwrap();
                let b = ca.apply_periodic(&x).unwrap().shifted();
                assert!(a.same_as(&b));
            }
        }
    }
}

#[test]
fn two_shifts_compose_to_a_shift_by_two() {
    let one = shift_by(Universe::Z, 2, 1);
    let two = CellularAutomaton::compose(&one, &one, &caps()).unwrap();
    assert_eq!(two.memory(), &FiniteWindow::from_ints(Universe::Z, [2]).unwrap());
    let direct = shift_by(Universe::Z, 2, 2);
    assert_eq!(two.table(&caps()).unwrap(), direct.table(&caps()).unwrap());
    let x = PeriodicConfig::periodic(Universe::Z, vec![0, 1, 1, 0, 1]);
    assert!(two.apply_periodic(&x).unwrap().same_as(&x.shifted().shifted()));
}

#[test]
fn composition_agrees_with_sequential_application() {
    let mut rng = StdRng::seed_from_u64(24);
    for u in [Universe::Z, Universe::N] {
        for _ in 0..20 {
            let s = random_sft(&mut rng, u, 2, 0.8);
            let inner = random_recoding(&mut rng, &s);
            let mid = SftPresentation::full(inner.codomain().clone(), u);
            let outer = random_recoding(&mut rng, &mid);
            let both = CellularAutomaton::compose(&outer, &inner, &caps()).unwrap();
            for x in points(&s, 4) {
                let seq = outer.apply_periodic(&inner.apply_periodic(&x).unwrap()).unwrap();
                assert!(both.apply_periodic(&x).unwrap().same_as(&seq));
            }
        }
    }
    let lin = involution();
    let square = CellularAutomaton::compose(&lin, &lin, &caps()).unwrap();
    assert!(square.is_linear());
    for x in points(lin.domain(), 3) {
        let seq = lin.apply_periodic(&lin.apply_periodic(&x).unwrap()).unwrap();
        assert!(square.apply_periodic(&x).unwrap().same_as(&seq));
    }
}

#[test]
fn xor_doubles_on_the_one_point() {
    let x = PeriodicConfig::periodic(Universe::Z, vec![0, 1]);
    let y = xor().apply_periodic(&x).unwrap();
    assert!(y.same_as(&PeriodicConfig::periodic(Universe::Z, vec![1])));
    let zero = PeriodicConfig::periodic(Universe::Z, vec![0]);
    let ones = PeriodicConfig::periodic(Universe::Z, vec![1]);
    assert!(xor().apply_periodic(&ones).unwrap().same_as(&xor().apply_periodic(&zero).unwrap()));
}

#[test]
fn table_rules_must_cover_the_memory_blocks() {
    let gm = golden();
    let entries = [(vec![0, 0], 0), (vec![0, 1], 1)].into_iter().collect();
    assert!(CellularAutomaton::from_table(gm.clone(), Alphabet::numbered(2), z(0, 1), &entries, &caps()).is_err());
    let full = [(vec![0, 0], 0), (vec![0, 1], 1), (vec![1, 0], 1)].into_iter().collect();
    let ca = CellularAutomaton::from_table(gm, Alphabet::numbered(2), z(0, 1), &full, &caps()).unwrap();
    assert_eq!(ca.eval(&[1, 0]), Some(1));
    assert_eq!(ca.eval(&[1, 1]), None);
}

#[test]
fn one_sided_shift_reads_forward() {
    let s = shift_by(Universe::N, 2, 1);
    let x = PeriodicConfig { universe: Universe::N, preperiod: vec![1], cycle: vec![0] };
    let y = s.apply_periodic(&x).unwrap();
    assert!(y.same_as(&PeriodicConfig::periodic(Universe::N, vec![0])));
}
