//! The quotient C*-algebra `A_p = D(p) / ker p`.
//!
//! Coordinates are taken in an orthonormal basis `U_j` of the witness image,
//! so that `tilde(a) = U^† vec(W(a))` and the norm of a coset is the operator
//! norm of `sum_j t_j U_j`. Each basis coset has a representative in
//! `span(R(A) ∩ D(p))`, and coset products are computed through them.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Element, PartialStarAlgebra, SectorId};
use crate::error::{Error, Result};
use crate::linalg::{max_abs, null_space, op_norm, pinv, unvec, vec_of, zeros, CMat, CVec, C64, ZERO};
use crate::report::Check;
use crate::seminorm::{check_property_b, check_witness, domain_coords, Mode, WitnessedSeminorm, RANK_TOL, SAMPLE_SEED};

#[derive(Clone, Debug)]
pub struct QuotientCStarAlgebra {
    seminorm: WitnessedSeminorm,
    k: usize,
    /// `k^2 x r`, orthonormal columns `vec(U_j)`.
    image: CMat,
    reps: Vec<Element>,
    /// `structure[j * r + l] = tilde(rep_j rep_l)`, stored sparsely.
    structure: Vec<Vec<(usize, C64)>>,
    star_images: Vec<CVec>,
    unit: Option<CVec>,
    tol: f64,
    representative_residual: f64,
}

fn sparse(v: &CVec, cut: f64) -> Vec<(usize, C64)> {
    v.iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > cut)
        .map(|(i, z)| (i, *z))
        .collect()
}

fn element_from_coords(alg: &PartialStarAlgebra, globals: &[usize], coeffs: &CVec) -> Element {
    let mut dense = CVec::zeros(alg.dim());
    for (i, g) in globals.iter().enumerate() {
        dense[*g] = coeffs[i];
    }
    alg.from_dense(&dense)
}

/// Build `A_p`. Requires a witnessed seminorm with Property (B).
pub fn build_quotient(alg: &PartialStarAlgebra, p: &WitnessedSeminorm) -> Result<QuotientCStarAlgebra> {
    if let Mode::Raw(e) = p.mode() {
        return Err(Error::Unsupported(format!(
            "no concrete completion available for raw seminorm `{}`",
            e.name()
        )));
    }
    let pb = check_property_b(alg, p);
    if !pb.check.passed {
        return Err(Error::Precondition(format!(
            "Property (B) fails with codimension {}",
            pb.codimension
        )));
    }
    let wit = check_witness(alg, p);
    if !wit.passed {
        return Err(Error::Precondition(format!("witness is not a *-homomorphism: {wit}")));
    }
    let tol = alg.tol();
    let k = p.hilbert_dim();
    let r_sectors: BTreeSet<SectorId> = alg
        .universal_right_multipliers()
        .intersection(p.domain())
        .copied()
        .collect();
    let r_basis = alg.basis_of(&r_sectors);
    let w_r = p.witness_matrix(&r_basis);

    let mut q = QuotientCStarAlgebra {
        seminorm: p.clone(),
        k,
        image: zeros(k * k, 0),
        reps: Vec::new(),
        structure: Vec::new(),
        star_images: Vec::new(),
        unit: None,
        tol,
        representative_residual: 0.0,
    };
    if r_basis.is_empty() || k == 0 {
        return Ok(q);
    }

    let svd = w_r.clone().svd(true, true);
    let u = svd.u.as_ref().expect("U");
    let v_t = svd.v_t.as_ref().expect("V^t");
    let sv = &svd.singular_values;
    let top = sv.iter().cloned().fold(0.0_f64, f64::max);
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > RANK_TOL * top.max(1.0)).collect();
    let r = keep.len();
    let mut image = zeros(k * k, r);
    for (j, &i) in keep.iter().enumerate() {
        image.set_column(j, &u.column(i));
        let coeffs: CVec = v_t.row(i).adjoint() / C64::new(sv[i], 0.0);
        q.reps.push(element_from_coords(alg, &r_basis, &coeffs));
    }
    q.image = image;

    let cut = 1e-14;
    let mut structure = Vec::with_capacity(r * r);
    for j in 0..r {
        for l in 0..r {
            let prod = alg
                .multiply_unchecked(&q.reps[j], &q.reps[l])
                .ok_or_else(|| Error::Precondition("representatives do not multiply".into()))?;
            let t = q.tilde(alg, &prod).map_err(|e| Error::Precondition(format!("product of representatives: {e}")))?;
            structure.push(sparse(&t, cut));
        }
    }
    q.structure = structure;
    q.star_images = q
        .reps
        .iter()
        .map(|x| q.tilde(alg, &alg.star_unchecked(x)))
        .collect::<Result<_>>()?;
    if let Some(e) = alg.unit() {
        if p.contains(alg, e) {
            q.unit = Some(q.tilde(alg, e)?);
        }
    }

    // Second, independent choice of representatives: pivoted columns of W_R
    // plus a shift by ker p ∩ span R(A).
    let pivots = pivot_columns(&w_r, RANK_TOL);
    let w_piv = p.witness_matrix(&pivots.iter().map(|i| r_basis[*i]).collect::<Vec<_>>());
    let piv_inv = pinv(&w_piv, RANK_TOL);
    let kernel = null_space(&w_r, RANK_TOL);
    let alt: Vec<Element> = (0..r)
        .map(|j| {
            let c = &piv_inv * q.image.column(j);
            let mut coeffs = CVec::zeros(r_basis.len());
            for (a, &i) in pivots.iter().enumerate() {
                coeffs[i] = c[a];
            }
            for m in 0..kernel.ncols() {
                let s = C64::new((j + m + 1) as f64, 0.5);
                coeffs += kernel.column(m) * s;
            }
            element_from_coords(alg, &r_basis, &coeffs)
        })
        .collect();
    let mut worst: f64 = 0.0;
    for j in 0..r {
        for l in 0..r {
            let prod = alg.multiply_unchecked(&alt[j], &alt[l]).expect("R(A) elements multiply");
            let t = q.tilde(alg, &prod)?;
            let mut diff = t.clone();
            for &(i, z) in &q.structure[j * r + l] {
                diff[i] -= z;
            }
            let scale = t.camax().max(1.0);
            worst = worst.max(diff.camax() / scale);
        }
    }
    q.representative_residual = worst;
    if worst > tol {
        return Err(Error::IllDefinedProduct { residual: worst });
    }
    Ok(q)
}

/// Greedy column pivoting: indices of a maximal independent set of columns.
fn pivot_columns(m: &CMat, tol: f64) -> Vec<usize> {
    let mut chosen = Vec::new();
    let mut basis: Vec<CVec> = Vec::new();
    let scale = m.column_iter().map(|c| c.norm()).fold(0.0_f64, f64::max).max(1.0);
    // process columns in order of decreasing norm for stability
    let mut order: Vec<usize> = (0..m.ncols()).collect();
    order.sort_by(|a, b| m.column(*b).norm().total_cmp(&m.column(*a).norm()));
    for i in order {
        let mut v: CVec = m.column(i).into_owned();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&v);
                v -= q * c;
            }
        }
        let n = v.norm();
        if n > tol * scale * 1e2 {
            basis.push(v / C64::new(n, 0.0));
            chosen.push(i);
        }
    }
    chosen.sort_unstable();
    chosen
}

impl QuotientCStarAlgebra {
    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn seminorm(&self) -> &WitnessedSeminorm {
        &self.seminorm
    }

    pub fn witness_dim(&self) -> usize {
        self.k
    }

    /// Representative of the `j`-th basis coset, in `span(R(A) ∩ D(p))`.
    pub fn representative(&self, j: usize) -> &Element {
        &self.reps[j]
    }

    /// `U_j` as a `k x k` matrix.
    pub fn image_matrix(&self, j: usize) -> CMat {
        unvec(self.image.column(j).as_slice(), self.k, self.k)
    }

    pub fn unit(&self) -> Option<&CVec> {
        self.unit.as_ref()
    }

    /// Second-route representative residual measured during construction.
    pub fn representative_residual(&self) -> f64 {
        self.representative_residual
    }

    pub fn tilde(&self, alg: &PartialStarAlgebra, a: &Element) -> Result<CVec> {
        let w = self.seminorm.witness(alg, a)?;
        let v = vec_of(&w);
        if self.dim() == 0 {
            return Ok(CVec::zeros(0));
        }
        Ok(self.image.adjoint() * v)
    }

    /// `sum_j t_j U_j`.
    pub fn to_matrix(&self, t: &CVec) -> CMat {
        if self.dim() == 0 {
            return zeros(self.k, self.k);
        }
        let v = &self.image * t;
        unvec(v.as_slice(), self.k, self.k)
    }

    pub fn norm(&self, t: &CVec) -> f64 {
        op_norm(&self.to_matrix(t))
    }

    pub fn basis_vector(&self, j: usize) -> CVec {
        let mut v = CVec::zeros(self.dim());
        v[j] = C64::new(1.0, 0.0);
        v
    }

    pub fn mul(&self, a: &CVec, b: &CVec) -> CVec {
        let r = self.dim();
        let mut out = CVec::zeros(r);
        for j in 0..r {
            if a[j] == ZERO {
                continue;
            }
            for l in 0..r {
                if b[l] == ZERO {
                    continue;
                }
                let s = a[j] * b[l];
                for &(i, z) in &self.structure[j * r + l] {
                    out[i] += s * z;
                }
            }
        }
        out
    }

    pub fn star(&self, a: &CVec) -> CVec {
        let mut out = CVec::zeros(self.dim());
        for (j, z) in a.iter().enumerate() {
            if *z != ZERO {
                out += &self.star_images[j] * z.conj();
            }
        }
        out
    }

    /// Structure constant `C[j, l, i]`.
    pub fn structure_constant(&self, j: usize, l: usize, i: usize) -> C64 {
        self.structure[j * self.dim() + l]
            .iter()
            .find(|(ii, _)| *ii == i)
            .map(|(_, z)| *z)
            .unwrap_or(ZERO)
    }

    /// Test hook: overwrite one structure constant.
    pub fn perturb_structure_constant(&mut self, j: usize, l: usize, i: usize, delta: C64) {
        let r = self.dim();
        let slot = &mut self.structure[j * r + l];
        match slot.iter_mut().find(|(ii, _)| *ii == i) {
            Some((_, z)) => *z += delta,
            None => slot.push((i, delta)),
        }
    }

    /// Coordinates of `a` in the D(p) basis mapped to A_p.
    pub fn tilde_of_coords(&self, alg: &PartialStarAlgebra, coords: &CVec) -> Result<CVec> {
        let x = element_from_coords(alg, self.seminorm.basis(), coords);
        self.tilde(alg, &x)
    }

    pub fn domain_coords(&self, alg: &PartialStarAlgebra, x: &Element) -> Result<CVec> {
        domain_coords(alg, &self.seminorm, x)
    }
}

fn vec_rel(a: &CVec, b: &CVec) -> f64 {
    (a - b).camax() / a.camax().max(b.camax()).max(1.0)
}

/// Banach *-algebra and C*-identities of `A_p`.
pub fn verify_banach_star(q: &QuotientCStarAlgebra) -> Check {
    let tol = q.tol.max(1e-10);
    let mut check = Check::new("banach_star", tol);
    let r = q.dim();
    if r == 0 {
        check.note("vacuous: A_p = 0");
        return check.finish();
    }
    let mut sample: Vec<(CVec, String)> = (0..r).map(|j| (q.basis_vector(j), format!("e{j}"))).collect();
    if let Some(u) = q.unit() {
        sample.push((u.clone(), "unit".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED ^ 2);
    for s in 0..12 {
        let v = CVec::from_fn(r, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        sample.push((v, format!("sample{s}")));
    }
    let norms: Vec<f64> = sample.iter().map(|(a, _)| q.norm(a)).collect();

    let mut sub = Check::new("submultiplicative", tol);
    let mut iso = Check::new("isometric_star", tol);
    let mut anti = Check::new("star_antimultiplicative", tol);
    let mut cstar = Check::new("cstar_identity", tol);
    let mut assoc = Check::new("associativity", tol);
    for (i, (a, la)) in sample.iter().enumerate() {
        let sa = q.star(a);
        iso.record((q.norm(&sa) - norms[i]).abs() / norms[i].max(1.0), || format!("A = {la}"));
        let ssa = q.star(&sa);
        iso.record(vec_rel(&ssa, a), || format!("A** != A at A = {la}"));
        let n2 = norms[i] * norms[i];
        cstar.record((q.norm(&q.mul(&sa, a)) - n2).abs() / n2.max(1.0), || format!("A = {la}"));
        for (j, (b, lb)) in sample.iter().enumerate() {
            if i >= r && j >= r && (i + j) % 3 != 0 {
                continue;
            }
            let ab = q.mul(a, b);
            let bound = norms[i] * norms[j];
            sub.record((q.norm(&ab) - bound).max(0.0) / bound.max(1.0), || format!("(A, B) = ({la}, {lb})"));
            let lhs = q.star(&ab);
            let rhs = q.mul(&q.star(b), &sa);
            anti.record(vec_rel(&lhs, &rhs), || format!("(A, B) = ({la}, {lb})"));
        }
    }
    // associativity on basis triples, skipping structurally zero products
    for j in 0..r {
        for l in 0..r {
            let jl = &q.structure[j * r + l];
            for m in 0..r {
                let mut lhs = CVec::zeros(r);
                for &(i, z) in jl {
                    for &(o, w) in &q.structure[i * r + m] {
                        lhs[o] += z * w;
                    }
                }
                let mut rhs = CVec::zeros(r);
                for &(i, z) in &q.structure[l * r + m] {
                    for &(o, w) in &q.structure[j * r + i] {
                        rhs[o] += z * w;
                    }
                }
                assoc.record(vec_rel(&lhs, &rhs), || format!("(e{j}, e{l}, e{m})"));
            }
        }
    }
    for c in [sub, iso, anti, cstar, assoc] {
        let c = c.finish();
        if !c.passed {
            check.note(format!("{} failed", c.name));
        }
        check = check.merge(c);
    }
    check.finish()
}

/// Largest deviation of the multiplication table from the witness image:
/// `U(C[j,l,:]) = U_j U_l`.
pub fn witness_image_residual(q: &QuotientCStarAlgebra) -> f64 {
    let r = q.dim();
    let mut worst: f64 = 0.0;
    let mats: Vec<CMat> = (0..r).map(|j| q.image_matrix(j)).collect();
    for j in 0..r {
        for l in 0..r {
            let mut t = CVec::zeros(r);
            for &(i, z) in &q.structure[j * r + l] {
                t[i] = z;
            }
            let lhs = q.to_matrix(&t);
            let rhs = &mats[j] * &mats[l];
            worst = worst.max(max_abs(&(lhs - &rhs)) / max_abs(&rhs).max(1.0));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::weighted_diagonal;
    use crate::linalg::c;

    #[test]
    fn wda3_quotient_has_dim_3() {
        let inst = weighted_diagonal(3, 1, 2.0).unwrap();
        let q = build_quotient(&inst.algebra, &inst.seminorm).unwrap();
        assert_eq!(q.dim(), 3);
        let r = verify_banach_star(&q);
        assert!(r.passed, "{r}");
        assert!(witness_image_residual(&q) < 1e-12);
    }

    #[test]
    fn kernel_maps_to_zero_coset() {
        let inst = weighted_diagonal(3, 1, 2.0).unwrap();
        let alg = &inst.algebra;
        let q = build_quotient(alg, &inst.seminorm).unwrap();
        let f = alg.basis_element(alg.offset(alg.sector_id("F").unwrap()) + 1);
        let b = alg.basis_element(alg.offset(alg.sector_id("B").unwrap()) + 1);
        let t = q.tilde(alg, &f.sub(&b)).unwrap();
        assert!(t.camax() < 1e-12);
        let e = q.tilde(alg, alg.unit().unwrap()).unwrap();
        let x = q.tilde(alg, &f).unwrap();
        assert!((q.mul(&e, &x) - &x).camax() < 1e-12);
    }

    #[test]
    fn perturbed_constants_fail() {
        let inst = weighted_diagonal(3, 1, 2.0).unwrap();
        let mut q = build_quotient(&inst.algebra, &inst.seminorm).unwrap();
        q.perturb_structure_constant(0, 0, 1, c(0.5, 0.0));
        let r = verify_banach_star(&q);
        assert!(!r.passed);
        assert!(r.witness.is_some());
    }

    #[test]
    fn raw_mode_unsupported() {
        let inst = weighted_diagonal(2, 1, 2.0).unwrap();
        let p = inst.seminorm.clone().with_raw(crate::seminorm::RawEvaluator::Frobenius);
        assert!(matches!(build_quotient(&inst.algebra, &p), Err(Error::Unsupported(_))));
    }

    #[test]
    fn zero_seminorm_gives_zero_quotient() {
        let inst = weighted_diagonal(2, 1, 2.0).unwrap();
        let q = build_quotient(&inst.algebra, &WitnessedSeminorm::zero()).unwrap();
        assert_eq!(q.dim(), 0);
        assert!(verify_banach_star(&q).passed);
    }
}
