//! Randomized properties of circuits, compilation and serialization.

use multiport::circuit::{max_deviation, norm, unitarity_residual};
use multiport::generators::{CircuitFamily, Family};
use multiport::netlist::{parse, serialize, Metadata};
use multiport::{apply, circuit_matrix, inverse, Circuit, Element, TransferMatrix};
use num_complex::Complex64;
use proptest::prelude::*;

#[derive(Clone, Debug)]
enum Draft {
    Splitter(usize, f64),
    Swap(usize),
    Phase(usize, f64, f64),
}

fn draft() -> impl Strategy<Value = Draft> {
    prop_oneof![
        (0usize..16, 0.0..=1.0f64).prop_map(|(m, r)| Draft::Splitter(m, r)),
        (0usize..16).prop_map(Draft::Swap),
        (0usize..16, -10.0..10.0f64, prop_oneof![Just(0.0), 0.0..=1.0f64]).prop_map(|(m, p, l)| Draft::Phase(m, p, l)),
    ]
}

/// Drafts are placed greedily; any that would collide with an element
/// already in the layer, or run off the last mode, are dropped.
fn assemble(modes: usize, layers: Vec<Vec<Draft>>, lossless: bool) -> Circuit {
    let groups = layers
        .into_iter()
        .map(|drafts| {
            let mut used = vec![false; modes + 2];
            let mut out = Vec::new();
            for d in drafts {
                let e = match d {
                    Draft::Splitter(m, r) if m + 2 <= modes => Element::beam_splitter(m + 1, m + 2, r).unwrap(),
                    Draft::Swap(m) if m + 2 <= modes => Element::swap(m + 1, m + 2).unwrap(),
                    Draft::Phase(m, p, l) if m < modes => {
                        Element::phase_shifter(m + 1, p, if lossless { 0.0 } else { l }).unwrap()
                    }
                    _ => continue,
                };
                let (a, b) = e.modes();
                if used[a] || b.is_some_and(|b| used[b]) {
                    continue;
                }
                used[a] = true;
                if let Some(b) = b {
                    used[b] = true;
                }
                out.push(e);
            }
            out
        })
        .collect();
    Circuit::from_groups(modes, groups).unwrap()
}

fn circuit_on(modes: usize, lossless: bool) -> impl Strategy<Value = Circuit> {
    prop::collection::vec(prop::collection::vec(draft(), 0..10), 0..12)
        .prop_map(move |layers| assemble(modes, layers, lossless))
}

fn circuit(lossless: bool) -> impl Strategy<Value = Circuit> {
    (1usize..=16).prop_flat_map(move |modes| circuit_on(modes, lossless))
}

fn circuit_pair() -> impl Strategy<Value = (Circuit, Circuit)> {
    (1usize..=16).prop_flat_map(|modes| (circuit_on(modes, false), circuit_on(modes, false)))
}

fn state(d: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im)), d)
}

fn circuit_and_state(lossless: bool) -> impl Strategy<Value = (Circuit, Vec<Complex64>)> {
    circuit(lossless).prop_flat_map(|c| {
        let d = c.modes();
        (Just(c), state(d))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn streaming_apply_matches_compiled_matrix((c, v) in circuit_and_state(false)) {
        let streamed = apply(&c, &v).unwrap();
        let compiled = circuit_matrix(&c) * nalgebra::DVector::from_vec(v);
        for (a, b) in streamed.iter().zip(compiled.iter()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn lossless_circuits_are_unitary(c in circuit(true)) {
        prop_assert!(unitarity_residual(&circuit_matrix(&c)) < 1e-12);
    }

    #[test]
    fn lossy_circuits_never_amplify((c, v) in circuit_and_state(false)) {
        prop_assert!(norm(&apply(&c, &v).unwrap()) <= norm(&v) * (1.0 + 1e-12));
    }

    #[test]
    fn inverse_undoes_lossless_circuits(c in circuit(true)) {
        let d = c.modes();
        let round = c.clone().then(inverse(&c).unwrap()).unwrap();
        prop_assert!(max_deviation(&circuit_matrix(&round), &TransferMatrix::identity(d, d)) < 1e-12);
    }

    #[test]
    fn composition_adds_counts_and_multiplies_matrices((a, b) in circuit_pair()) {
        let joined = a.clone().then(b.clone()).unwrap();
        prop_assert_eq!(joined.element_count(), a.element_count() + b.element_count());
        let expected = circuit_matrix(&b) * circuit_matrix(&a);
        prop_assert!(max_deviation(&circuit_matrix(&joined), &expected) < 1e-12);
    }

    #[test]
    fn netlists_round_trip_exactly(c in circuit(false)) {
        prop_assert_eq!(parse(&serialize(&c, Metadata::default())).unwrap(), c);
    }
}

#[test]
fn every_generator_round_trips_through_a_netlist() {
    let mut checked = 0;
    for family in Family::ALL {
        for d in [2usize, 4, 8, 16, 32] {
            let solutions: Vec<Option<usize>> =
                if family.needs_solution() { (1..=d).map(Some).collect() } else { vec![None] };
            for solution in solutions {
                let c = CircuitFamily { family, modes: d, solution }.build().unwrap();
                let text = serialize(&c, Metadata::for_family(family.name(), [("modes", d as u64)]));
                assert_eq!(parse(&text).unwrap(), c, "{family} d={d} s={solution:?}");
                checked += 1;
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn mismatched_composition_is_rejected() {
    let a = Circuit::empty(4);
    assert!(a.then(Circuit::empty(3)).is_err());
}
