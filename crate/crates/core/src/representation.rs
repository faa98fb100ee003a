//! Faithful representations of `A_p` and the quasi *-representation they
//! induce on the algebra.
//!
//! Given `Π` on `H`, the induced domain is
//! `D = span { Π((x y)~) ξ : x, y ∈ N_p }` and `π(a)` is defined on it by
//! `π(a) Π((x y)~) ξ = Π((a x)~) Π(ỹ) ξ`. The spanning vectors are usually
//! dependent, so `π(a)` is solved by least squares and the defining relation
//! is then replayed on every spanning vector.

use crate::algebra::{Element, PartialStarAlgebra};
use crate::completion::QuotientCStarAlgebra;
use crate::error::{Error, Result};
use crate::instances::CustomPi;
use crate::linalg::{
    kron, max_abs, null_space, op_norm, outside_residual, pinv, rank, same_span, vec_of, zeros, CMat, CVec,
    RowCompressor, SpanBuilder, ZERO,
};
use crate::report::Check;
use crate::seminorm::{compute_np, WitnessedSeminorm, RANK_TOL};

/// Threshold for the least-squares consistency of induced operators.
pub const ACTION_TOL: f64 = 1e-8;

fn mat_rel(a: &CMat, b: &CMat) -> f64 {
    max_abs(&(a - b)) / max_abs(a).max(max_abs(b)).max(1.0)
}

/// `*`-representation of `A_p` on `C^hilbert_dim`.
#[derive(Clone, Debug)]
pub struct ConcreteRep {
    pub hilbert_dim: usize,
    /// Image of each basis coset of `A_p`.
    pub assign: Vec<CMat>,
    pub faithful: bool,
    pub homomorphism: Check,
}

impl ConcreteRep {
    /// Validate a candidate assignment on the quotient basis.
    pub fn from_matrices(q: &QuotientCStarAlgebra, hilbert_dim: usize, assign: Vec<CMat>, tol: f64) -> Result<Self> {
        if assign.len() != q.dim() {
            return Err(Error::Malformed(format!(
                "representation assigns {} matrices to a {}-dimensional algebra",
                assign.len(),
                q.dim()
            )));
        }
        if assign.iter().any(|m| m.shape() != (hilbert_dim, hilbert_dim)) {
            return Err(Error::Malformed("representation matrix of wrong shape".into()));
        }
        let mut rep = ConcreteRep {
            hilbert_dim,
            assign,
            faithful: false,
            homomorphism: Check::vacuous("rep_homomorphism"),
        };
        rep.homomorphism = rep.check_hom(q, tol);
        let mut cols = zeros(hilbert_dim * hilbert_dim, q.dim());
        for (j, m) in rep.assign.iter().enumerate() {
            cols.set_column(j, &vec_of(m));
        }
        rep.faithful = rank(&cols, RANK_TOL) == q.dim();
        Ok(rep)
    }

    /// The representation carried by the witness: `Π(e_j) = U_j` on `C^k`.
    pub fn witness_rep(q: &QuotientCStarAlgebra) -> Self {
        let k = if q.dim() == 0 { 0 } else { q.witness_dim() };
        let assign: Vec<CMat> = (0..q.dim()).map(|j| q.image_matrix(j)).collect();
        ConcreteRep::from_matrices(q, k, assign, 1e-10).expect("witness image has matching shapes")
    }

    /// `Π` given through its values `Π(x̃)` on the D(p) basis. The values
    /// must vanish on ker p.
    pub fn from_domain_images(
        alg: &PartialStarAlgebra,
        q: &QuotientCStarAlgebra,
        pi: &CustomPi,
    ) -> Result<Self> {
        let p = q.seminorm();
        if pi.images.len() != p.dim() {
            return Err(Error::Malformed(format!(
                "custom representation lists {} images for a {}-dimensional domain",
                pi.images.len(),
                p.dim()
            )));
        }
        let h = pi.hilbert_dim;
        let combine = |coeffs: &CVec| {
            let mut m = zeros(h, h);
            for (i, z) in coeffs.iter().enumerate() {
                if *z != ZERO {
                    m += &pi.images[i] * *z;
                }
            }
            m
        };
        let kernel = p.kernel();
        for c in 0..kernel.ncols() {
            let m = combine(&kernel.column(c).into_owned());
            if max_abs(&m) > alg.tol() * 1e2 {
                return Err(Error::Malformed(
                    "custom representation does not vanish on ker p".into(),
                ));
            }
        }
        let assign = (0..q.dim())
            .map(|j| Ok(combine(&q.domain_coords(alg, q.representative(j))?)))
            .collect::<Result<Vec<_>>>()?;
        ConcreteRep::from_matrices(q, h, assign, alg.tol())
    }

    /// `Π(t) = sum_j t_j Π(e_j)`.
    pub fn apply(&self, t: &CVec) -> CMat {
        let mut m = zeros(self.hilbert_dim, self.hilbert_dim);
        for (j, z) in t.iter().enumerate() {
            if *z != ZERO {
                m += &self.assign[j] * *z;
            }
        }
        m
    }

    pub fn check_hom(&self, q: &QuotientCStarAlgebra, tol: f64) -> Check {
        let mut check = Check::new("rep_homomorphism", tol);
        let r = q.dim();
        for j in 0..r {
            let ej = q.basis_vector(j);
            let star = self.apply(&q.star(&ej));
            check.record(mat_rel(&star, &self.assign[j].adjoint()), || format!("Π(e{j}*) != Π(e{j})^*"));
            for l in 0..r {
                let prod = self.apply(&q.mul(&ej, &q.basis_vector(l)));
                check.record(mat_rel(&prod, &(&self.assign[j] * &self.assign[l])), || {
                    format!("Π(e{j} e{l}) != Π(e{j}) Π(e{l})")
                });
            }
        }
        check.finish()
    }

    /// `Π ⊕ 0_extra`.
    pub fn direct_sum_zeros(&self, extra: usize) -> Self {
        let h = self.hilbert_dim + extra;
        let assign = self
            .assign
            .iter()
            .map(|m| {
                let mut big = zeros(h, h);
                big.view_mut((0, 0), m.shape()).copy_from(m);
                big
            })
            .collect();
        ConcreteRep {
            hilbert_dim: h,
            assign,
            faithful: self.faithful,
            homomorphism: self.homomorphism.clone(),
        }
    }
}

/// `x ↦ Π(x̃)` on the D(p) basis.
pub fn restriction_rep(alg: &PartialStarAlgebra, q: &QuotientCStarAlgebra, pi: &ConcreteRep) -> Result<Vec<CMat>> {
    q.seminorm()
        .basis()
        .iter()
        .map(|g| Ok(pi.apply(&q.tilde(alg, &alg.basis_element(*g))?)))
        .collect()
}

/// Induced quasi *-representation. Operators are stored on the ambient
/// space `H_Π` as `T(a) = X_a Q^†`, i.e. they vanish off the domain.
#[derive(Clone, Debug)]
pub struct QuasiRep {
    pub hilbert_dim: usize,
    /// Orthonormal basis of D(π), `H x dim D`.
    pub domain_basis: CMat,
    /// Orthonormal basis of H_π, `H x dim H_π`.
    pub closure_basis: CMat,
    /// One operator per global basis element of the algebra.
    pub operators: Vec<CMat>,
    /// `Π(x̃)` for the D(p) basis.
    pub restriction: Vec<CMat>,
    pub np_basis: Vec<usize>,
    pub pi_faithful: bool,
    /// Largest relative residual of the defining relation.
    pub action_residual: f64,
    /// `span Π(Ñ_p²)H = span Π(Ñ_p)H`.
    pub np_span: Check,
    pub warning: Option<String>,
}

impl QuasiRep {
    pub fn domain_dim(&self) -> usize {
        self.domain_basis.ncols()
    }

    pub fn closure_dim(&self) -> usize {
        self.closure_basis.ncols()
    }

    pub fn operator(&self, global: usize) -> &CMat {
        &self.operators[global]
    }

    /// `π(x)` for a general element, by linearity.
    pub fn pi_of(&self, alg: &PartialStarAlgebra, x: &Element) -> CMat {
        let dense = alg.to_dense(x);
        let mut m = zeros(self.hilbert_dim, self.hilbert_dim);
        for (g, z) in dense.iter().enumerate() {
            if *z != ZERO {
                m += &self.operators[g] * *z;
            }
        }
        m
    }

    /// Compression `Q^† T Q` to the domain.
    pub fn compress(&self, t: &CMat) -> CMat {
        self.domain_basis.adjoint() * t * &self.domain_basis
    }

    fn zero(alg: &PartialStarAlgebra, h: usize, restriction: Vec<CMat>, faithful: bool, why: &str) -> Self {
        QuasiRep {
            hilbert_dim: h,
            domain_basis: zeros(h, 0),
            closure_basis: zeros(h, 0),
            operators: vec![zeros(h, h); alg.dim()],
            restriction,
            np_basis: Vec::new(),
            pi_faithful: faithful,
            action_residual: 0.0,
            np_span: Check::vacuous("np_span_equality"),
            warning: Some(why.to_string()),
        }
    }
}

/// Solve `X C_i = W_i` for all `i` by least squares, where `C_i = Q^† B_i`,
/// and return `(X, max relative residual)`.
fn solve_action(cs: &[CMat], ws: &[CMat], kinv: &CMat) -> (CMat, f64) {
    let h = ws[0].nrows();
    let d = cs[0].nrows();
    let mut rhs = zeros(h, d);
    for (c, w) in cs.iter().zip(ws) {
        rhs += w * c.adjoint();
    }
    let x = rhs * kinv;
    let scale = ws.iter().map(max_abs).fold(0.0_f64, f64::max).max(1.0);
    let mut worst: f64 = 0.0;
    for (c, w) in cs.iter().zip(ws) {
        worst = worst.max(max_abs(&(&x * c - w)) / scale);
    }
    (x, worst)
}

/// Build `π_p` from `Π`.
pub fn build_induced(
    alg: &PartialStarAlgebra,
    p: &WitnessedSeminorm,
    q: &QuotientCStarAlgebra,
    pi: &ConcreteRep,
) -> Result<QuasiRep> {
    let h = pi.hilbert_dim;
    let restriction = restriction_rep(alg, q, pi)?;
    let np = compute_np(alg, p);
    if np.is_trivial() || h == 0 {
        return Ok(QuasiRep::zero(alg, h, restriction, pi.faithful, "N_p = {0}: zero representation"));
    }
    let xs: Vec<Element> = np.basis.iter().map(|g| alg.basis_element(*g)).collect();
    let tildes: Vec<CVec> = xs.iter().map(|x| q.tilde(alg, x)).collect::<Result<_>>()?;
    let singles: Vec<CMat> = tildes.iter().map(|t| pi.apply(t)).collect();

    // spanning blocks B_ij = Π((x_i x_j)~)
    let n = xs.len();
    let mut blocks = Vec::with_capacity(n * n);
    let mut domain = SpanBuilder::new(h, RANK_TOL);
    for xi in &xs {
        for xj in &xs {
            let prod = alg
                .multiply_unchecked(xi, xj)
                .ok_or_else(|| Error::Precondition("N_p is not closed under products".into()))?;
            let b = pi.apply(&q.tilde(alg, &prod)?);
            domain.push_block(&b);
            blocks.push(b);
        }
    }
    let mut closure = SpanBuilder::new(h, RANK_TOL);
    for s in &singles {
        closure.push_block(s);
    }
    let qb = domain.finish();
    let pb = closure.finish();
    let mut np_span = Check::new("np_span_equality", 1e-10);
    let (same, res) = same_span(&qb, &pb, 1e-10);
    np_span.record(res, || "span Π(Ñ²)H vs span Π(Ñ)H".into());
    if !same {
        np_span.fail(format!("rank {} vs {}", qb.ncols(), pb.ncols()));
    }
    let np_span = np_span.finish();

    let d = qb.ncols();
    let cs: Vec<CMat> = blocks.iter().map(|b| qb.adjoint() * b).collect();
    let mut gram = zeros(d, d);
    for c in &cs {
        gram += c * c.adjoint();
    }
    let kinv = pinv(&gram, RANK_TOL);

    let mut operators = Vec::with_capacity(alg.dim());
    let mut worst: f64 = 0.0;
    for g in 0..alg.dim() {
        let a = alg.basis_element(g);
        let mut ax_imgs = Vec::with_capacity(n);
        for xi in &xs {
            let ax = alg
                .multiply_unchecked(&a, xi)
                .ok_or_else(|| Error::Precondition("N_p element is not a right multiplier".into()))?;
            let t = q.tilde(alg, &ax).map_err(|_| {
                Error::Precondition(format!("{} x leaves D(p) for some x in N_p", alg.basis_label(g)))
            })?;
            ax_imgs.push(pi.apply(&t));
        }
        let mut ws = Vec::with_capacity(n * n);
        for m in &ax_imgs {
            for s in &singles {
                ws.push(m * s);
            }
        }
        let (x, res) = solve_action(&cs, &ws, &kinv);
        if res > ACTION_TOL {
            return Err(Error::IllDefinedAction {
                element: alg.basis_label(g),
                residual: res,
            });
        }
        worst = worst.max(res);
        operators.push(x * qb.adjoint());
    }
    Ok(QuasiRep {
        hilbert_dim: h,
        domain_basis: qb,
        closure_basis: pb,
        operators,
        restriction,
        np_basis: np.basis,
        pi_faithful: pi.faithful,
        action_residual: worst,
        np_span,
        warning: if pi.faithful { None } else { Some("Π is not faithful".into()) },
    })
}

/// Alternative domain `span { Π(x̃) ξ : x ∈ N_p }`: tries to define `π(a)` by
/// `π(a) Π(x̃) ξ = Π((a x)~) ξ` and reports whether that is consistent and
/// satisfies the adjoint rule.
pub fn alternative_domain_diagnostic(
    alg: &PartialStarAlgebra,
    p: &WitnessedSeminorm,
    q: &QuotientCStarAlgebra,
    pi: &ConcreteRep,
) -> Result<Check> {
    let mut check = Check::new("alternative_domain", ACTION_TOL);
    let np = compute_np(alg, p);
    if np.is_trivial() || pi.hilbert_dim == 0 {
        check.note("vacuous: N_p = {0}");
        return Ok(check.finish());
    }
    let xs: Vec<Element> = np.basis.iter().map(|g| alg.basis_element(*g)).collect();
    let singles: Vec<CMat> = xs
        .iter()
        .map(|x| Ok(pi.apply(&q.tilde(alg, x)?)))
        .collect::<Result<_>>()?;
    let mut span = SpanBuilder::new(pi.hilbert_dim, RANK_TOL);
    for s in &singles {
        span.push_block(s);
    }
    let qb = span.finish();
    let d = qb.ncols();
    let cs: Vec<CMat> = singles.iter().map(|b| qb.adjoint() * b).collect();
    let mut gram = zeros(d, d);
    for c in &cs {
        gram += c * c.adjoint();
    }
    let kinv = pinv(&gram, RANK_TOL);
    let mut ops = Vec::new();
    for g in 0..alg.dim() {
        let a = alg.basis_element(g);
        let ws: Vec<CMat> = xs
            .iter()
            .map(|x| {
                let ax = alg.multiply_unchecked(&a, x).expect("N_p ⊆ R(A)");
                Ok(pi.apply(&q.tilde(alg, &ax)?))
            })
            .collect::<Result<_>>()?;
        let (x, res) = solve_action(&cs, &ws, &kinv);
        check.record(res, || format!("inconsistent action of {}", alg.basis_label(g)));
        ops.push(x * qb.adjoint());
    }
    // adjoint rule on the alternative domain
    for g in 0..alg.dim() {
        let a = alg.basis_element(g);
        let astar = alg.star_unchecked(&a);
        let dense = alg.to_dense(&astar);
        let mut ts = zeros(pi.hilbert_dim, pi.hilbert_dim);
        for (i, z) in dense.iter().enumerate() {
            if *z != ZERO {
                ts += &ops[i] * *z;
            }
        }
        let lhs = qb.adjoint() * &ops[g] * &qb;
        let rhs = (qb.adjoint() * ts * &qb).adjoint();
        check.record(mat_rel(&lhs, &rhs), || format!("adjoint rule fails for {}", alg.basis_label(g)));
    }
    Ok(check.finish())
}

/// Quasi *-representation axioms on the domain:
/// (i) `Q^† T(a*) Q = (Q^† T(a) Q)^†`, (ii) `π(ax) = π(a) □ π(x)` for
/// `x ∈ R(A)`.
pub fn check_quasi_rep(alg: &PartialStarAlgebra, qr: &QuasiRep) -> Check {
    let tol = 1e-9;
    let mut check = adjoint_rule(alg, qr, tol);
    let mut prod = Check::new("quasi_rep(ii)", tol);
    let r_basis = alg.basis_of(&alg.universal_right_multipliers());
    let qb = &qr.domain_basis;
    for g in 0..alg.dim() {
        let a = alg.basis_element(g);
        let ta_star = qr.pi_of(alg, &alg.star_unchecked(&a));
        let left = (&ta_star * qb).adjoint();
        for &gx in &r_basis {
            let x = alg.basis_element(gx);
            let Some(ax) = alg.multiply_unchecked(&a, &x) else { continue };
            let lhs = qb.adjoint() * qr.pi_of(alg, &ax) * qb;
            let rhs = &left * (qr.operator(gx) * qb);
            prod.record(mat_rel(&lhs, &rhs), || format!("(a, x) = ({}, {})", alg.basis_label(g), alg.basis_label(gx)));
        }
    }
    check = check.merge(prod.finish());
    check.name = "quasi_rep".into();
    check.finish()
}

fn adjoint_rule(alg: &PartialStarAlgebra, qr: &QuasiRep, tol: f64) -> Check {
    let mut check = Check::new("quasi_rep(i)", tol);
    for g in 0..alg.dim() {
        let a = alg.basis_element(g);
        let lhs = qr.compress(&qr.pi_of(alg, &alg.star_unchecked(&a)));
        let rhs = qr.compress(qr.operator(g)).adjoint();
        check.record(mat_rel(&lhs, &rhs), || format!("a = {}", alg.basis_label(g)));
    }
    check.finish()
}

/// Full *-representation test: `π(ab) = π(a) □ π(b)` weakly on the domain
/// for every basis pair with `a ∈ L(b)`, plus the adjoint rule.
pub fn check_star_rep(alg: &PartialStarAlgebra, qr: &QuasiRep) -> Check {
    let tol = 1e-9;
    let mut prod = Check::new("star_rep", tol);
    let qb = &qr.domain_basis;
    let n = alg.dim();
    let lefts: Vec<CMat> = (0..n)
        .map(|g| (qr.pi_of(alg, &alg.star_unchecked(&alg.basis_element(g))) * qb).adjoint())
        .collect();
    let rights: Vec<CMat> = (0..n).map(|g| qr.operator(g) * qb).collect();
    for (ga, left) in lefts.iter().enumerate() {
        let a = alg.basis_element(ga);
        for (gb, right) in rights.iter().enumerate() {
            let b = alg.basis_element(gb);
            let Some(ab) = alg.multiply_unchecked(&a, &b) else { continue };
            let lhs = qb.adjoint() * qr.pi_of(alg, &ab) * qb;
            let rhs = left * right;
            prod.record(mat_rel(&lhs, &rhs), || format!("(a, b) = ({}, {})", alg.basis_label(ga), alg.basis_label(gb)));
        }
    }
    let check = prod.finish().merge(adjoint_rule(alg, qr, tol));
    check.finish()
}

/// Basis of the weak commutant
/// `{ C : (C X ξ | η) = (C ξ | X^† η), ξ, η ∈ D, X ∈ ops }`, where `D` is
/// given by the columns of `domain`.
#[derive(Clone, Debug)]
pub struct WeakCommutant {
    pub basis: Vec<CMat>,
    pub residual: f64,
}

impl WeakCommutant {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn vec_basis(&self, h: usize) -> CMat {
        let mut m = zeros(h * h, self.basis.len());
        for (j, c) in self.basis.iter().enumerate() {
            m.set_column(j, &vec_of(c));
        }
        m
    }
}

pub fn compute_weak_commutant(ops: &[CMat], domain: &CMat) -> WeakCommutant {
    let h = domain.nrows();
    // D^†(C X - X C) D = 0, vectorized column-major
    let mut rows = RowCompressor::new(h * h);
    let dt = domain.transpose();
    let dh = domain.adjoint();
    for x in ops {
        let xd = x * domain;
        let m = kron(&xd.transpose(), &dh) - kron(&dt, &(&dh * x));
        rows.push_rows(&m);
    }
    let ns = rows.null_space(RANK_TOL);
    let basis: Vec<CMat> = (0..ns.ncols())
        .map(|j| CMat::from_column_slice(h, h, ns.column(j).as_slice()))
        .collect();
    let mut residual: f64 = 0.0;
    for c in &basis {
        for x in ops {
            let r = &dh * (c * x - x * c) * domain;
            residual = residual.max(max_abs(&r) / max_abs(x).max(1.0));
        }
    }
    WeakCommutant { basis, residual }
}

#[derive(Clone, Debug)]
pub struct WellBehaved {
    /// `H_π = H_Π`.
    pub well_behaved: Check,
    pub strongly_nondegenerate: Check,
    pub norm_equality: Check,
    pub commutant_equality: Check,
    pub commutant_invariance: Check,
    pub commutant_dims: (usize, usize),
}

impl WellBehaved {
    pub fn all_pass(&self) -> bool {
        self.well_behaved.passed
            && self.strongly_nondegenerate.passed
            && self.norm_equality.passed
            && self.commutant_equality.passed
            && self.commutant_invariance.passed
    }
}

/// Orthonormalize the columns of `m`.
fn orth(m: &CMat) -> CMat {
    crate::linalg::range_basis(m, RANK_TOL)
}

pub fn classify_well_behaved(alg: &PartialStarAlgebra, p: &WitnessedSeminorm, qr: &QuasiRep) -> WellBehaved {
    let tol = 1e-9;
    let h = qr.hilbert_dim;
    let dh = qr.closure_dim();

    let mut wb = Check::new("well_behaved", tol);
    wb.cases = 1;
    if !qr.pi_faithful {
        wb.fail("Π is not faithful");
    }
    if dh != h {
        wb.fail(format!("dim H_π = {dh} but dim H_Π = {h}"));
    }
    let wb = wb.finish();

    // strong nondegeneracy: span π(N_p) D(π) = H_π
    let mut sn = Check::new("strongly_nondegenerate", tol);
    let r = alg.universal_right_multipliers();
    for g in &qr.np_basis {
        let (s, _) = alg.locate(*g);
        if !r.contains(&s) {
            sn.fail(format!("{} ∉ R(A)", alg.basis_label(*g)));
        }
    }
    let mut span = SpanBuilder::new(h, RANK_TOL);
    for g in &qr.np_basis {
        span.push_block(&(qr.operator(*g) * &qr.domain_basis));
    }
    let got = span.finish();
    sn.cases += 1;
    if qr.np_basis.is_empty() && dh > 0 {
        sn.fail("N_p = {0}");
    }
    let (same, res) = if dh == 0 && got.ncols() == 0 {
        (true, 0.0)
    } else {
        same_span(&got, &qr.closure_basis, tol)
    };
    sn.record(res, || "π(N_p)D(π) vs H_π".into());
    if !same {
        sn.fail(format!("π(N_p)D(π) has rank {}, H_π has dimension {dh}", got.ncols()));
    }
    let sn = sn.finish();

    // norm equality on the D(p) basis and pairwise sums
    let mut ne = Check::new("norm_equality", tol);
    let basis = p.basis();
    let mut probes: Vec<(Element, String)> = basis
        .iter()
        .map(|g| (alg.basis_element(*g), alg.basis_label(*g)))
        .collect();
    for w in basis.windows(2).take(64) {
        probes.push((
            alg.basis_element(w[0]).add(&alg.basis_element(w[1])),
            format!("{} + {}", alg.basis_label(w[0]), alg.basis_label(w[1])),
        ));
    }
    for (x, label) in &probes {
        let px = p.evaluate(alg, x).expect("probe lies in D(p)");
        let nx = op_norm(&(qr.pi_of(alg, x) * &qr.domain_basis));
        ne.record((nx - px).abs() / px.max(1.0), || format!("x = {label}"));
    }
    let ne = ne.finish();

    // commutants on H_π coordinates
    let pc = &qr.closure_basis;
    let weak_ops: Vec<CMat> = (0..alg.dim()).map(|g| pc.adjoint() * qr.operator(g) * pc).collect();
    let dom_c = orth(&(pc.adjoint() * &qr.domain_basis));
    let left = compute_weak_commutant(&weak_ops, &dom_c);
    let bounded_ops: Vec<CMat> = qr.restriction.iter().map(|m| pc.adjoint() * m * pc).collect();
    let right = compute_weak_commutant(&bounded_ops, &CMat::identity(dh, dh));
    let mut ce = Check::new("commutant_equality", tol);
    let (lv, rv) = (left.vec_basis(dh), right.vec_basis(dh));
    let (same, res) = if lv.ncols() == 0 && rv.ncols() == 0 {
        (true, 0.0)
    } else {
        same_span(&lv, &rv, tol)
    };
    ce.record(res, || "mutual containment".into());
    ce.record(left.residual.max(right.residual), || "commutant equations".into());
    if !same {
        ce.fail(format!("weak commutant dim {} vs commutant dim {}", left.dim(), right.dim()));
    }
    let ce = ce.finish();

    let mut inv = Check::new("commutant_invariance", tol);
    for (i, c) in left.basis.iter().enumerate() {
        inv.record(outside_residual(&dom_c, &(c * &dom_c)), || format!("commutant basis element {i}"));
    }
    let inv = inv.finish();

    WellBehaved {
        well_behaved: wb,
        strongly_nondegenerate: sn,
        norm_equality: ne,
        commutant_equality: ce,
        commutant_invariance: inv,
        commutant_dims: (left.dim(), right.dim()),
    }
}

#[derive(Clone, Debug)]
pub struct Restriction {
    pub pi: ConcreteRep,
    pub qr: QuasiRep,
    /// `P T_wb(a) Q_wb = T(a) P Q_wb` entrywise.
    pub agreement: Check,
}

/// Rebuild `Π^wb(x̃) = π(x)` on `H_π` and induce again. Requires strong
/// nondegeneracy and norm equality.
pub fn restrict_to_well_behaved(
    alg: &PartialStarAlgebra,
    p: &WitnessedSeminorm,
    q: &QuotientCStarAlgebra,
    qr: &QuasiRep,
) -> Result<Restriction> {
    let cls = classify_well_behaved(alg, p, qr);
    if !cls.strongly_nondegenerate.passed {
        return Err(Error::Precondition(format!("not strongly nondegenerate: {}", cls.strongly_nondegenerate)));
    }
    if !cls.norm_equality.passed {
        return Err(Error::Precondition(format!("norm equality fails: {}", cls.norm_equality)));
    }
    let pc = &qr.closure_basis;
    let dh = pc.ncols();
    let assign: Vec<CMat> = (0..q.dim())
        .map(|j| pc.adjoint() * qr.pi_of(alg, q.representative(j)) * pc)
        .collect();
    let pi = ConcreteRep::from_matrices(q, dh, assign, alg.tol())?;
    let new = build_induced(alg, p, q, &pi)?;
    let mut agreement = Check::new("restriction_agreement", 1e-10);
    let lifted = pc * &new.domain_basis;
    for g in 0..alg.dim() {
        let lhs = pc * new.operator(g) * &new.domain_basis;
        let rhs = qr.operator(g) * &lifted;
        agreement.record(mat_rel(&lhs, &rhs), || format!("a = {}", alg.basis_label(g)));
    }
    Ok(Restriction {
        pi,
        qr: new,
        agreement: agreement.finish(),
    })
}

/// `π_p ⊆ π_q` for nested seminorms sharing a witness.
pub fn verify_extension(
    alg: &PartialStarAlgebra,
    p: &WitnessedSeminorm,
    q: &WitnessedSeminorm,
    qr_p: &QuasiRep,
    qr_q: &QuasiRep,
) -> Result<Check> {
    if (p.hilbert_dim() != q.hilbert_dim() || qr_p.hilbert_dim != qr_q.hilbert_dim) && p.dim() > 0 {
        return Err(Error::Unsupported("witnesses act on different spaces".into()));
    }
    if !p.domain().is_subset(q.domain()) {
        return Err(Error::Precondition("D(p) ⊄ D(q)".into()));
    }
    for (i, g) in p.basis().iter().enumerate() {
        let wq = q.witness_of_basis(*g).expect("domain nested");
        if mat_rel(p.witness_image(i), wq) > alg.tol() {
            return Err(Error::Unsupported(format!(
                "witness of q does not restrict to that of p at {}",
                alg.basis_label(*g)
            )));
        }
    }
    let tol = 1e-9;
    let mut check = Check::new("extension", tol);
    check.record(outside_residual(&qr_q.closure_basis, &qr_p.closure_basis), || "H_πp ⊄ H_πq".into());
    check.record(outside_residual(&qr_q.domain_basis, &qr_p.domain_basis), || "D(πp) ⊄ D(πq)".into());
    for g in 0..alg.dim() {
        let lhs = qr_p.operator(g) * &qr_p.domain_basis;
        let rhs = qr_q.operator(g) * &qr_p.domain_basis;
        check.record(mat_rel(&lhs, &rhs), || format!("πp({0}) != πq({0}) on D(πp)", alg.basis_label(g)));
    }
    Ok(check.finish())
}

/// `‖π(x)‖ ≤ p(x)` on the D(p) basis, with equality on the N_p basis.
/// Norms of `π(x)` are taken on the domain.
pub fn check_induced_norms(alg: &PartialStarAlgebra, p: &WitnessedSeminorm, qr: &QuasiRep) -> Result<Check> {
    let mut check = Check::new("induced_norm_bound", 1e-9);
    let np: std::collections::BTreeSet<usize> = qr.np_basis.iter().copied().collect();
    for g in p.basis() {
        let x = alg.basis_element(*g);
        let px = p.evaluate(alg, &x)?;
        let nx = op_norm(&(qr.operator(*g) * &qr.domain_basis));
        let excess = if np.contains(g) { (nx - px).abs() } else { (nx - px).max(0.0) };
        check.record(excess / px.max(1.0), || {
            if np.contains(g) {
                format!("‖π({0})‖ != p({0})", alg.basis_label(*g))
            } else {
                format!("‖π({0})‖ > p({0})", alg.basis_label(*g))
            }
        });
    }
    Ok(check.finish())
}

/// Dimension of the null space helper exposed for brute-force oracles.
pub fn null_dim(m: &CMat) -> usize {
    null_space(m, RANK_TOL).ncols()
}
