//! Algebraic invariants as property tests over the builder corpus.

mod common;

use partial_cstar::format::instance_to_json;
use partial_cstar::instances::{build_fixtures, build_named};
use partial_cstar::linalg::{c, CVec};
use partial_cstar::seminorm::{check_property_b, classify_finiteness};
use partial_cstar::{Element, PartialStarAlgebra};
use proptest::prelude::*;

fn random_in_sector(alg: &PartialStarAlgebra, s: usize, coeffs: &[(f64, f64)]) -> Element {
    let id = alg.sector_ids().nth(s).unwrap();
    let d = alg.sector(id).dim;
    let v = CVec::from_iterator(d, (0..d).map(|i| {
        let (re, im) = coeffs[i % coeffs.len()];
        c(re * (1.0 + i as f64), im - i as f64 * 0.25)
    }));
    Element::from_part(id, v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// `(xy)* = y* x*` for random elements of multipliable sectors.
    #[test]
    fn star_reverses_products(
        which in 0usize..11,
        s in 0usize..4,
        t in 0usize..4,
        coeffs in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..6),
    ) {
        let corpus = common::corpus();
        let alg = &corpus[which].algebra;
        let n = alg.sectors().len();
        let (s, t) = (s % n, t % n);
        let x = random_in_sector(alg, s, &coeffs);
        let y = random_in_sector(alg, t, &coeffs[1..].iter().chain(&coeffs[..1]).copied().collect::<Vec<_>>());
        if let Some(xy) = alg.multiply(&x, &y).unwrap() {
            let lhs = alg.star(&xy).unwrap();
            let rhs = alg.multiply(&alg.star(&y).unwrap(), &alg.star(&x).unwrap()).unwrap().unwrap();
            prop_assert!(alg.residual(&lhs, &rhs) < 1e-10);
        }
    }

    /// Builders are pure: equal parameters give byte-identical files.
    #[test]
    fn builders_are_deterministic(k in 1usize..5, depth in 1usize..4, d in 2usize..5) {
        for (name, params) in [
            ("weighted_diagonal", serde_json::json!({"k": k, "depth": depth})),
            ("compact_operator", serde_json::json!({"d": d, "depth": depth})),
            ("hermite_number", serde_json::json!({"m": d, "depth": depth})),
        ] {
            let a = instance_to_json(&build_named(name, &params).unwrap()).unwrap();
            let b = instance_to_json(&build_named(name, &params).unwrap()).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}

#[test]
fn semi_associative_implies_property_a() {
    for inst in common::corpus() {
        let alg = &inst.algebra;
        if alg.check_semi_associative().passed {
            assert!(alg.check_property_a().passed, "{}", inst.name);
        }
    }
}

#[test]
fn semifinite_implies_property_b() {
    for inst in common::corpus() {
        let (alg, p) = (&inst.algebra, &inst.seminorm);
        let fin = classify_finiteness(alg, p);
        if fin.finite {
            assert!(fin.semifinite, "{}", inst.name);
        }
        if fin.semifinite {
            assert!(check_property_b(alg, p).check.passed, "{}", inst.name);
        }
    }
}

#[test]
fn fixtures_are_deterministic() {
    let a: Vec<String> = build_fixtures().iter().map(|i| instance_to_json(i).unwrap()).collect();
    let b: Vec<String> = build_fixtures().iter().map(|i| instance_to_json(i).unwrap()).collect();
    assert_eq!(a, b);
}
