//! Brute-force element-level oracles compared against the sector-level
//! computations.

mod common;

use std::collections::BTreeSet;

use partial_cstar::linalg::{null_space, rank, same_span, zeros, CMat};
use partial_cstar::seminorm::{compute_np, RANK_TOL};
use partial_cstar::{PartialStarAlgebra, SectorId, WitnessedSeminorm};

/// Basis indices `g` such that every basis element can multiply `g` from
/// the left.
fn brute_right_multipliers(alg: &PartialStarAlgebra) -> BTreeSet<usize> {
    (0..alg.dim())
        .filter(|&g| {
            let y = alg.basis_element(g);
            (0..alg.dim()).all(|h| alg.multiply(&alg.basis_element(h), &y).unwrap().is_some())
        })
        .collect()
}

/// N_p as a subspace of the full coordinate space: vectors `x` supported
/// on `D(p) ∩ R(A)` with every `a x` inside `D(p)`. Columns form a basis.
fn brute_np(alg: &PartialStarAlgebra, p: &WitnessedSeminorm) -> CMat {
    let r = brute_right_multipliers(alg);
    let dom: BTreeSet<usize> = p.basis().iter().copied().collect();
    let cand: Vec<usize> = dom.intersection(&r).copied().collect();
    let n = alg.dim();
    if cand.is_empty() {
        return zeros(n, 0);
    }
    // rows: coordinates of a x outside D(p), for every basis a
    let outside: Vec<usize> = (0..n).filter(|g| !dom.contains(g)).collect();
    let mut m = zeros(outside.len() * n, cand.len());
    for a in 0..n {
        let ea = alg.basis_element(a);
        for (j, &x) in cand.iter().enumerate() {
            let ax = alg.multiply(&ea, &alg.basis_element(x)).unwrap().unwrap();
            let dense = alg.to_dense(&ax);
            for (i, &o) in outside.iter().enumerate() {
                m[(a * outside.len() + i, j)] = dense[o];
            }
        }
    }
    let ns = if outside.is_empty() { CMat::identity(cand.len(), cand.len()) } else { null_space(&m, RANK_TOL) };
    let mut out = zeros(n, ns.ncols());
    for (j, &x) in cand.iter().enumerate() {
        for c in 0..ns.ncols() {
            out[(x, c)] = ns[(j, c)];
        }
    }
    out
}

fn coordinate_basis(n: usize, idx: &[usize]) -> CMat {
    let mut m = zeros(n, idx.len());
    for (c, &g) in idx.iter().enumerate() {
        m[(g, c)] = partial_cstar::linalg::ONE;
    }
    m
}

#[test]
fn right_multipliers_match_brute_force() {
    for inst in common::corpus() {
        let alg = &inst.algebra;
        let sector_level: BTreeSet<usize> = alg.basis_of(&alg.universal_right_multipliers()).into_iter().collect();
        assert_eq!(sector_level, brute_right_multipliers(alg), "{}", inst.name);
    }
}

#[test]
fn np_matches_element_level_oracle() {
    let mut compared = 0;
    for inst in common::corpus() {
        let alg = &inst.algebra;
        if alg.dim() > 24 {
            continue;
        }
        let p = &inst.seminorm;
        let oracle = brute_np(alg, p);
        let np = compute_np(alg, p);
        let ours = coordinate_basis(alg.dim(), &np.basis);
        assert_eq!(rank(&oracle, RANK_TOL), ours.ncols(), "{}", inst.name);
        if ours.ncols() > 0 {
            let (same, res) = same_span(&oracle, &ours, 1e-12);
            assert!(same, "{}: residual {res}", inst.name);
        }
        compared += 1;
    }
    assert!(compared >= 12);
}

#[test]
fn frozen_np_dimensions() {
    // independently derived: WDA(k) has N_p = F, M_d has N_p = M_d,
    // C(S) for blocks [1,1,2] has finite-rank part of dimension 1 + 1 + 4
    use partial_cstar::instances::{compact_operator, cq_spectral, fixture, weighted_diagonal};
    let table = [
        (weighted_diagonal(3, 1, 2.0).unwrap(), 3),
        (compact_operator(2, 1).unwrap(), 4),
        (cq_spectral(&[1, 1, 2], &[1.0, 2.0, 4.0], None).unwrap(), 6),
        (fixture("fixture:np_trivial").unwrap(), 0),
        (fixture("fixture:zero_seminorm").unwrap(), 0),
    ];
    for (inst, dim) in table {
        assert_eq!(compute_np(&inst.algebra, &inst.seminorm).dim(), dim, "{}", inst.name);
    }
}

#[test]
fn np_sectors_lie_in_domain() {
    for inst in common::corpus() {
        let np = compute_np(&inst.algebra, &inst.seminorm);
        let dom: &BTreeSet<SectorId> = inst.seminorm.domain();
        assert!(np.sectors.is_subset(dom), "{}", inst.name);
    }
}
