//! Builders for concrete instances and adversarial fixtures.
//!
//! Most builders are "unit models": every sector basis element is a weighted
//! matrix unit `c * E_ab` on a fixed Hilbert space, the product table is
//! declared sector by sector, and the structure tensors are read off from
//! matrix multiplication. The same realization doubles as the representation
//! carried by truncation towers.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{AlgebraBuilder, PartialStarAlgebra, ProductTensor};
use crate::error::{Error, Result};
use crate::linalg::{c, op_norm, unit, zeros, CMat, CVec};
use crate::reverse::{TowerLevel, TruncationTower};
use crate::seminorm::{RawEvaluator, WitnessedSeminorm};

/// User-supplied `Π_p`, given by its values on the D(p) basis.
#[derive(Clone, Debug)]
pub struct CustomPi {
    pub hilbert_dim: usize,
    pub images: Vec<CMat>,
}

/// Verdict a fixture is built to produce.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub flags: BTreeMap<String, bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codimension: Option<usize>,
    /// Error kind the pipeline must raise, e.g. `IllDefinedAction`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerSpec {
    pub builder: String,
    pub params: Value,
    pub levels: usize,
    pub declared_bounded: BTreeMap<String, bool>,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub params: Value,
    pub algebra: PartialStarAlgebra,
    pub seminorm: WitnessedSeminorm,
    pub pi: Option<CustomPi>,
    pub tower: Option<TowerSpec>,
    pub meta: BTreeMap<String, Value>,
    pub expected: Option<Expected>,
}

impl Instance {
    fn new(name: &str, params: Value, algebra: PartialStarAlgebra, seminorm: WitnessedSeminorm) -> Self {
        Instance {
            name: name.to_string(),
            params,
            algebra,
            seminorm,
            pi: None,
            tower: None,
            meta: BTreeMap::new(),
            expected: None,
        }
    }
}

/// Builder names accepted by [`build_named`].
pub const BUILDERS: &[&str] = &[
    "weighted_diagonal",
    "function_grid",
    "compact_operator",
    "hermite_number",
    "cq_spectral",
];

// ---------------------------------------------------------------------------
// unit models

#[derive(Clone, Debug)]
struct UnitSector {
    name: String,
    /// `(a, b, weight)`: the basis element acts as `weight * E_ab`.
    units: Vec<(usize, usize, f64)>,
}

#[derive(Clone, Debug)]
struct UnitModel {
    hilbert_dim: usize,
    sectors: Vec<UnitSector>,
    products: Vec<(String, String, String)>,
}

impl UnitModel {
    fn sector(&self, name: &str) -> &UnitSector {
        self.sectors.iter().find(|s| s.name == name).expect("declared sector")
    }

    fn algebra(&self, identity_in: Option<&str>, tol: f64) -> Result<PartialStarAlgebra> {
        let mut b = AlgebraBuilder::new().tol(tol);
        let index: Vec<HashMap<(usize, usize), usize>> = self
            .sectors
            .iter()
            .map(|s| s.units.iter().enumerate().map(|(i, u)| ((u.0, u.1), i)).collect())
            .collect();
        let pos = |name: &str| self.sectors.iter().position(|s| s.name == name).expect("sector");
        for (si, s) in self.sectors.iter().enumerate() {
            b = b.sector(&s.name, s.units.len(), &s.name);
            let n = s.units.len();
            let mut m = zeros(n, n);
            for (i, &(a, bb, w)) in s.units.iter().enumerate() {
                let j = *index[si].get(&(bb, a)).ok_or_else(|| {
                    Error::InvalidParams(format!("sector `{}` is not closed under adjoints", s.name))
                })?;
                if (s.units[j].2 - w).abs() > 0.0 {
                    return Err(Error::InvalidParams(format!("sector `{}` has asymmetric weights", s.name)));
                }
                m[(j, i)] = c(1.0, 0.0);
            }
            b = b.star_map(&s.name, m);
        }
        for (l, r, t) in &self.products {
            let (ls, rs, ts) = (self.sector(l), self.sector(r), self.sector(t));
            let ti = pos(t);
            let mut err = None;
            let tensor = ProductTensor::from_fn(ls.units.len(), rs.units.len(), ts.units.len(), |i, j| {
                let (a, b1, wa) = ls.units[i];
                let (b2, d, wb) = rs.units[j];
                if b1 != b2 {
                    return Vec::new();
                }
                match index[ti].get(&(a, d)) {
                    Some(&k) => vec![(k, c(wa * wb / ts.units[k].2, 0.0))],
                    None => {
                        err = Some(format!("product {l}*{r} leaves sector {t}"));
                        Vec::new()
                    }
                }
            });
            if let Some(e) = err {
                return Err(Error::InvalidParams(e));
            }
            b = b.product(l, r, t, tensor);
        }
        if let Some(name) = identity_in {
            let s = self.sector(name);
            let coeffs = CVec::from_iterator(
                s.units.len(),
                s.units.iter().map(|&(a, bb, w)| if a == bb { c(1.0 / w, 0.0) } else { c(0.0, 0.0) }),
            );
            b = b.unit(vec![(name, coeffs)]);
        }
        b.build()
    }

    fn images(&self, name: &str) -> Vec<CMat> {
        self.sector(name)
            .units
            .iter()
            .map(|&(a, b, w)| unit(self.hilbert_dim, a, b) * c(w, 0.0))
            .collect()
    }

    fn pi(&self) -> Vec<CMat> {
        self.sectors.iter().flat_map(|s| self.images(&s.name)).collect()
    }

    fn keys(&self) -> Vec<(String, usize, usize)> {
        self.sectors
            .iter()
            .flat_map(|s| s.units.iter().map(move |u| (s.name.clone(), u.0, u.1)))
            .collect()
    }

    fn seminorm(&self, alg: &PartialStarAlgebra, domain: &[&str]) -> Result<WitnessedSeminorm> {
        let w = domain.iter().map(|d| (*d, self.images(d))).collect();
        WitnessedSeminorm::new(alg, domain, self.hilbert_dim, w)
    }
}

fn diag_units(weights: &[f64]) -> Vec<(usize, usize, f64)> {
    weights.iter().enumerate().map(|(i, w)| (i, i, *w)).collect()
}

fn full_units(d: usize) -> Vec<(usize, usize, f64)> {
    (0..d).flat_map(|a| (0..d).map(move |b| (a, b, 1.0))).collect()
}

fn assemble_tower(name: &str, models: Vec<UnitModel>, identity_in: Option<&str>, declared: &BTreeMap<String, bool>) -> Result<TruncationTower> {
    let mut levels = Vec::new();
    for (n, m) in models.iter().enumerate() {
        let algebra = m.algebra(identity_in, crate::algebra::DEFAULT_TOL)?;
        let (embed, isometry) = match models.get(n + 1) {
            Some(next) => {
                let lookup: HashMap<(String, usize, usize), usize> =
                    next.keys().into_iter().enumerate().map(|(i, k)| (k, i)).collect();
                let embed = m
                    .keys()
                    .into_iter()
                    .map(|k| {
                        lookup
                            .get(&k)
                            .copied()
                            .ok_or_else(|| Error::InvalidParams(format!("level {n} element {k:?} missing at next level")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let mut j = zeros(next.hilbert_dim, m.hilbert_dim);
                for i in 0..m.hilbert_dim {
                    j[(i, i)] = c(1.0, 0.0);
                }
                (embed, j)
            }
            None => (Vec::new(), zeros(0, 0)),
        };
        levels.push(TowerLevel {
            algebra,
            hilbert_dim: m.hilbert_dim,
            pi: m.pi(),
            embed,
            isometry,
        });
    }
    TruncationTower::new(name, levels, Some(declared.clone()))
}

// ---------------------------------------------------------------------------
// weighted diagonal sequences

fn wda_model(weights: &[f64]) -> UnitModel {
    let ones = vec![1.0; weights.len()];
    UnitModel {
        hilbert_dim: weights.len(),
        sectors: vec![
            UnitSector { name: "F".into(), units: diag_units(&ones) },
            UnitSector { name: "B".into(), units: diag_units(&ones) },
            UnitSector { name: "U".into(), units: diag_units(weights) },
        ],
        products: [
            ("F", "F", "F"),
            ("F", "B", "F"),
            ("B", "F", "F"),
            ("B", "B", "B"),
            ("B", "U", "U"),
            ("U", "B", "U"),
            ("F", "U", "F"),
            ("U", "F", "F"),
        ]
        .iter()
        .map(|(a, b, t)| (a.to_string(), b.to_string(), t.to_string()))
        .collect(),
    }
}

fn wda_declared() -> BTreeMap<String, bool> {
    [("F", true), ("B", true), ("U", false)]
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect()
}

fn wda_instance(name: &str, params: Value, weights_at: impl Fn(usize) -> Vec<f64>, depth: usize) -> Result<(Instance, Vec<UnitModel>)> {
    let models: Vec<UnitModel> = (1..=depth).map(|n| wda_model(&weights_at(n))).collect();
    let base = &models[0];
    let algebra = base.algebra(Some("B"), crate::algebra::DEFAULT_TOL)?;
    let seminorm = base.seminorm(&algebra, &["F", "B"])?;
    let mut inst = Instance::new(name, params, algebra, seminorm);
    if depth > 1 {
        inst.tower = Some(TowerSpec {
            builder: name.to_string(),
            params: inst.params.clone(),
            levels: depth,
            declared_bounded: wda_declared(),
        });
    }
    Ok((inst, models))
}

/// Diagonal sequence model: `F` finitely supported, `B` bounded, `U`
/// weighted by `ratio^i`. Level `n` of the tower has `k * n` coordinates;
/// the instance itself is level 1.
pub fn weighted_diagonal(k: usize, depth: usize, ratio: f64) -> Result<Instance> {
    if k == 0 || depth == 0 {
        return Err(Error::InvalidParams("weighted_diagonal needs k >= 1 and depth >= 1".into()));
    }
    if !(ratio.is_finite() && ratio > 1.0) {
        return Err(Error::InvalidParams("weight ratio must exceed 1".into()));
    }
    let params = json!({"k": k, "depth": depth, "ratio": ratio});
    let (mut inst, _) = wda_instance("weighted_diagonal", params, |n| {
        (0..k * n).map(|i| ratio.powi(i as i32)).collect()
    }, depth)?;
    inst.meta.insert("model".into(), json!("sequence space with l-infinity domain"));
    Ok(inst)
}

/// Grid sampling of continuous functions of polynomial growth
/// `(1 + t^2)^degree` on `t = 0, h, 2h, ...`, reusing the diagonal model.
pub fn function_grid(points: usize, degree: u32, step: f64, depth: usize) -> Result<Instance> {
    if points == 0 || depth == 0 || degree == 0 {
        return Err(Error::InvalidParams("function_grid needs points, degree, depth >= 1".into()));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParams("grid step must be positive".into()));
    }
    let params = json!({"points": points, "degree": degree, "step": step, "depth": depth});
    let (mut inst, _) = wda_instance("function_grid", params, |n| {
        (0..points * n)
            .map(|i| {
                let t = i as f64 * step;
                (1.0 + t * t).powi(degree as i32)
            })
            .collect()
    }, depth)?;
    inst.meta.insert("model".into(), json!("continuous functions of polynomial growth, grid-sampled; sup-norm domain"));
    Ok(inst)
}

// ---------------------------------------------------------------------------
// compact operators

fn compact_model(d: usize) -> UnitModel {
    UnitModel {
        hilbert_dim: d,
        sectors: vec![UnitSector { name: "M".into(), units: full_units(d) }],
        products: vec![("M".into(), "M".into(), "M".into())],
    }
}

/// Full matrix algebra `M_d` with the operator norm defined everywhere.
pub fn compact_operator(d: usize, depth: usize) -> Result<Instance> {
    if d < 2 || depth == 0 {
        return Err(Error::InvalidParams("compact_operator needs d >= 2 and depth >= 1".into()));
    }
    let m = compact_model(d);
    let algebra = m.algebra(Some("M"), crate::algebra::DEFAULT_TOL)?;
    let seminorm = m.seminorm(&algebra, &["M"])?;
    let mut inst = Instance::new("compact_operator", json!({"d": d, "depth": depth}), algebra, seminorm);
    if depth > 1 {
        inst.tower = Some(TowerSpec {
            builder: "compact_operator".into(),
            params: inst.params.clone(),
            levels: depth,
            declared_bounded: [("M".to_string(), true)].into_iter().collect(),
        });
    }
    inst.meta.insert("model".into(), json!("matrix units; finite rank is everything at this scale"));
    Ok(inst)
}

// ---------------------------------------------------------------------------
// truncated number operator

fn hermite_model(m: usize) -> UnitModel {
    let weights: Vec<f64> = (0..m).map(|n| (n + 1) as f64).collect();
    UnitModel {
        hilbert_dim: m,
        sectors: vec![
            UnitSector { name: "P".into(), units: diag_units(&weights) },
            UnitSector { name: "R".into(), units: full_units(m) },
        ],
        products: [("P", "P", "P"), ("P", "R", "R"), ("R", "P", "R"), ("R", "R", "R")]
            .iter()
            .map(|(a, b, t)| (a.to_string(), b.to_string(), t.to_string()))
            .collect(),
    }
}

/// Number operator `N = sum (n+1) f_n ⊗ f_n` truncated at `m` Hermite
/// functions. `P` holds the spectral pieces `(n+1) f_n ⊗ f_n` (so `N` has
/// all coefficients 1), `R` the rank-one operators `f_a ⊗ f_b`.
pub fn hermite_number(m: usize, depth: usize) -> Result<Instance> {
    if m < 2 || depth == 0 {
        return Err(Error::InvalidParams("hermite_number needs m >= 2 and depth >= 1".into()));
    }
    let model = hermite_model(m);
    let algebra = model.algebra(Some("P"), crate::algebra::DEFAULT_TOL)?;
    let seminorm = model.seminorm(&algebra, &["R"])?;
    let mut inst = Instance::new("hermite_number", json!({"m": m, "depth": depth}), algebra, seminorm);
    if depth > 1 {
        inst.tower = Some(TowerSpec {
            builder: "hermite_number".into(),
            params: inst.params.clone(),
            levels: depth,
            declared_bounded: [("P".to_string(), false), ("R".to_string(), true)].into_iter().collect(),
        });
    }
    inst.meta.insert("model".into(), json!("number operator in the Hermite basis"));
    Ok(inst)
}

// ---------------------------------------------------------------------------
// spectral quasi *-algebra

/// Merge consecutive blocks with equal eigenvalue.
fn merge_blocks(blocks: &[usize], lambdas: &[f64]) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (&b, &l) in blocks.iter().zip(lambdas) {
        match out.last_mut() {
            Some((bb, ll)) if *ll == l => *bb += b,
            _ => out.push((b, l)),
        }
    }
    out
}

fn cq_model(blocks: &[usize], lambdas: &[f64]) -> UnitModel {
    let merged = merge_blocks(blocks, lambdas);
    let h: usize = merged.iter().map(|(b, _)| b).sum();
    let mut plain = Vec::new();
    let mut weighted = Vec::new();
    let mut off = 0;
    for (b, l) in merged {
        for a in 0..b {
            for bb in 0..b {
                plain.push((off + a, off + bb, 1.0));
                weighted.push((off + a, off + bb, l * l));
            }
        }
        off += b;
    }
    UnitModel {
        hilbert_dim: h,
        sectors: vec![
            UnitSector { name: "C".into(), units: plain.clone() },
            UnitSector { name: "Fin".into(), units: plain },
            UnitSector { name: "X".into(), units: weighted },
        ],
        products: [
            ("C", "C", "C"),
            ("C", "Fin", "Fin"),
            ("Fin", "C", "Fin"),
            ("Fin", "Fin", "Fin"),
            ("C", "X", "X"),
            ("X", "C", "X"),
            ("Fin", "X", "Fin"),
            ("X", "Fin", "Fin"),
        ]
        .iter()
        .map(|(a, b, t)| (a.to_string(), b.to_string(), t.to_string()))
        .collect(),
    }
}

fn validate_cq(blocks: &[usize], lambdas: &[f64]) -> Result<()> {
    if blocks.is_empty() {
        return Err(Error::InvalidParams(
            "cq_spectral needs at least one finite-rank spectral projection".into(),
        ));
    }
    if blocks.len() != lambdas.len() {
        return Err(Error::InvalidParams("blocks and lambdas differ in length".into()));
    }
    if blocks.contains(&0) {
        return Err(Error::InvalidParams("spectral projections must have rank >= 1".into()));
    }
    if lambdas.iter().any(|l| !(l.is_finite() && *l >= 1.0)) {
        return Err(Error::InvalidParams("eigenvalues must satisfy lambda >= 1".into()));
    }
    if lambdas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParams("eigenvalues must be nondecreasing".into()));
    }
    Ok(())
}

/// `‖S^{-1} X S^{-1}‖` for an operator on the model space.
pub fn s_norm(blocks: &[usize], lambdas: &[f64], x: &CMat) -> f64 {
    let s_inv = s_inverse(blocks, lambdas);
    op_norm(&(&s_inv * x * &s_inv))
}

fn s_inverse(blocks: &[usize], lambdas: &[f64]) -> CMat {
    let h: usize = blocks.iter().sum();
    let mut s = zeros(h, h);
    let mut off = 0;
    for (&b, &l) in blocks.iter().zip(lambdas) {
        for a in 0..b {
            s[(off + a, off + a)] = c(1.0 / l, 0.0);
        }
        off += b;
    }
    s
}

/// Residuals of the Banach quasi *-algebra axioms at one truncation level:
/// isometric involution for `‖·‖_S`, and `‖X‖ = max(‖X‖_R, ‖X*‖_R)` on C(S)
/// with `‖X‖_R` sampled over the unit ball of the ambient space.
fn cq_axiom_residuals(blocks: &[usize], lambdas: &[f64]) -> (f64, f64) {
    let model = cq_model(blocks, lambdas);
    let h = model.hilbert_dim;
    let s_inv = s_inverse(blocks, lambdas);
    let s = s_inv.map(|z| if z.re != 0.0 { c(1.0 / z.re, 0.0) } else { z });
    let ambient = model.images("X");
    let mut iso: f64 = 0.0;
    for a in &ambient {
        let l = s_norm(blocks, lambdas, a);
        let r = s_norm(blocks, lambdas, &a.adjoint());
        iso = iso.max((l - r).abs() / l.max(1.0));
    }
    // unit ball of ‖·‖_S: A = S Y S with ‖Y‖ <= 1
    let mut ys: Vec<CMat> = vec![CMat::identity(h, h)];
    for m in model.images("C") {
        ys.push(m);
    }
    let mut cres: f64 = 0.0;
    for x in model.images("C") {
        let r_of = |x: &CMat| {
            ys.iter()
                .map(|y| {
                    let a = &s * y * &s;
                    op_norm(&(&s_inv * (&a * x) * &s_inv)) / op_norm(y).max(1e-300)
                })
                .fold(0.0_f64, f64::max)
        };
        let x0 = r_of(&x).max(r_of(&x.adjoint()));
        let n = op_norm(&x);
        cres = cres.max((x0 - n).abs() / n.max(1.0));
    }
    (iso, cres)
}

/// Quasi *-algebra `(Ĉ(S), C(S))` for `S = sum λ_n P_n` truncated to the
/// given blocks. Sectors: `C` (C(S)), `Fin` (its finite-rank part, the
/// candidate N_r) and `X` (the `‖·‖_S` completion, elements acting as
/// `S Y S`). The tower consists of prefixes of the block list and ends at
/// the instance.
pub fn cq_spectral(blocks: &[usize], lambdas: &[f64], depth: Option<usize>) -> Result<Instance> {
    validate_cq(blocks, lambdas)?;
    let depth = depth.unwrap_or(blocks.len());
    if depth == 0 || depth > blocks.len() {
        return Err(Error::InvalidParams(format!(
            "tower depth must lie in 1..={} for {} blocks",
            blocks.len(),
            blocks.len()
        )));
    }
    let model = cq_model(blocks, lambdas);
    let algebra = model.algebra(Some("C"), crate::algebra::DEFAULT_TOL)?;
    let seminorm = model.seminorm(&algebra, &["C", "Fin"])?;
    let params = json!({"blocks": blocks, "lambdas": lambdas, "depth": depth});
    let mut inst = Instance::new("cq_spectral", params, algebra, seminorm);
    if depth > 1 {
        inst.tower = Some(TowerSpec {
            builder: "cq_spectral".into(),
            params: inst.params.clone(),
            levels: depth,
            declared_bounded: [("C", true), ("Fin", true), ("X", false)]
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
        });
    }
    let merged = merge_blocks(blocks, lambdas);
    let cs_dim: usize = merged.iter().map(|(b, _)| b * b).sum();
    let mut per_level = Vec::new();
    for n in (blocks.len() - depth + 1)..=blocks.len() {
        let (iso, cres) = cq_axiom_residuals(&blocks[..n], &lambdas[..n]);
        per_level.push(json!({"blocks": n, "isometric_involution": iso, "c_norm_identity": cres}));
    }
    inst.meta.insert("model".into(), json!("spectral quasi *-algebra"));
    inst.meta.insert("c_s_dim".into(), json!(cs_dim));
    inst.meta.insert(
        "banach_axioms".into(),
        json!({
            "a": "finite-dimensional, complete under the S-norm",
            "b_c_checked_per_level": per_level,
        }),
    );
    Ok(inst)
}

// ---------------------------------------------------------------------------
// towers

fn param_usize(params: &Value, key: &str) -> Result<usize> {
    params
        .get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| Error::Format(format!("tower parameter `{key}` missing")))
}

fn param_f64(params: &Value, key: &str) -> Result<f64> {
    params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Format(format!("tower parameter `{key}` missing")))
}

/// Rebuild a tower from its generator description.
pub fn build_tower(spec: &TowerSpec) -> Result<TruncationTower> {
    let p = &spec.params;
    let depth = spec.levels;
    match spec.builder.as_str() {
        "weighted_diagonal" => {
            let k = param_usize(p, "k")?;
            let ratio = param_f64(p, "ratio")?;
            let models = (1..=depth)
                .map(|n| wda_model(&(0..k * n).map(|i| ratio.powi(i as i32)).collect::<Vec<_>>()))
                .collect();
            assemble_tower("weighted_diagonal", models, Some("B"), &spec.declared_bounded)
        }
        "function_grid" => {
            let points = param_usize(p, "points")?;
            let degree = param_usize(p, "degree")? as i32;
            let step = param_f64(p, "step")?;
            let models = (1..=depth)
                .map(|n| {
                    wda_model(
                        &(0..points * n)
                            .map(|i| (1.0 + (i as f64 * step).powi(2)).powi(degree))
                            .collect::<Vec<_>>(),
                    )
                })
                .collect();
            assemble_tower("function_grid", models, Some("B"), &spec.declared_bounded)
        }
        "compact_operator" => {
            let d = param_usize(p, "d")?;
            let models = (0..depth).map(|n| compact_model(d + n)).collect();
            assemble_tower("compact_operator", models, Some("M"), &spec.declared_bounded)
        }
        "hermite_number" => {
            let m = param_usize(p, "m")?;
            let models = (0..depth).map(|n| hermite_model(m + n)).collect();
            assemble_tower("hermite_number", models, Some("P"), &spec.declared_bounded)
        }
        "cq_spectral" => {
            let blocks: Vec<usize> = serde_json::from_value(p.get("blocks").cloned().unwrap_or(Value::Null))?;
            let lambdas: Vec<f64> = serde_json::from_value(p.get("lambdas").cloned().unwrap_or(Value::Null))?;
            validate_cq(&blocks, &lambdas)?;
            if depth == 0 || depth > blocks.len() {
                return Err(Error::InvalidParams("tower deeper than the block list".into()));
            }
            let first = blocks.len() - depth + 1;
            let models = (first..=blocks.len())
                .map(|n| cq_model(&blocks[..n], &lambdas[..n]))
                .collect();
            assemble_tower("cq_spectral", models, Some("C"), &spec.declared_bounded)
        }
        other => Err(Error::Format(format!("unknown tower builder `{other}`"))),
    }
}

/// Build by name from a JSON parameter object.
pub fn build_named(name: &str, params: &Value) -> Result<Instance> {
    let get_u = |k: &str, d: usize| params.get(k).and_then(Value::as_u64).map(|v| v as usize).unwrap_or(d);
    let get_f = |k: &str, d: f64| params.get(k).and_then(Value::as_f64).unwrap_or(d);
    match name {
        "weighted_diagonal" => weighted_diagonal(get_u("k", 3), get_u("depth", 1), get_f("ratio", 2.0)),
        "function_grid" => function_grid(get_u("points", 4), get_u("degree", 1) as u32, get_f("step", 0.5), get_u("depth", 1)),
        "compact_operator" => compact_operator(get_u("d", 2), get_u("depth", 1)),
        "hermite_number" => hermite_number(get_u("m", 5), get_u("depth", 1)),
        "cq_spectral" => {
            let blocks: Vec<usize> = serde_json::from_value(params.get("blocks").cloned().unwrap_or(json!([1, 1, 2])))?;
            let lambdas: Vec<f64> = serde_json::from_value(params.get("lambdas").cloned().unwrap_or(json!([1.0, 2.0, 4.0])))?;
            let depth = params.get("depth").and_then(Value::as_u64).map(|v| v as usize);
            cq_spectral(&blocks, &lambdas, depth)
        }
        other => fixture(other),
    }
}

// ---------------------------------------------------------------------------
// fixtures

fn expect(flags: &[(&str, bool)]) -> Expected {
    Expected {
        flags: flags.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        ..Default::default()
    }
}

pub const FIXTURES: &[&str] = &[
    "fixture:corrupted_table",
    "fixture:scaled_norm",
    "fixture:frobenius_norm",
    "fixture:property_b_failure",
    "fixture:np_trivial",
    "fixture:enlarged_pi",
    "fixture:inconsistent_span",
    "fixture:zero_seminorm",
    "fixture:non_semi_associative",
];

pub fn build_fixtures() -> Vec<Instance> {
    FIXTURES.iter().map(|n| fixture(n).expect("fixtures build")).collect()
}

/// Quasi *-algebra with one A_0 sector and one ambient sector.
fn quasi_pair(domain: &str) -> Result<(PartialStarAlgebra, WitnessedSeminorm)> {
    let ones = [c(1.0, 0.0); 2];
    let alg = AlgebraBuilder::new()
        .sector("A0", 2, "A0")
        .sector("X", 2, "X")
        .product("A0", "A0", "A0", ProductTensor::pointwise(&ones))
        .product("A0", "X", "X", ProductTensor::pointwise(&ones))
        .product("X", "A0", "X", ProductTensor::pointwise(&ones))
        .build()?;
    // X has no products of its own, so any injective witness is admissible there
    let scale = if domain == "X" { 2.0 } else { 1.0 };
    let mats = vec![unit(2, 0, 0), unit(2, 1, 1) * c(scale, 0.0)];
    let p = WitnessedSeminorm::new(&alg, &[domain], 2, vec![(domain, mats)])?;
    Ok((alg, p))
}

pub fn fixture(name: &str) -> Result<Instance> {
    let mut inst = match name {
        "fixture:corrupted_table" => {
            let mut inst = weighted_diagonal(3, 1, 2.0)?;
            let alg = &mut inst.algebra;
            let (u, b) = (alg.sector_id("U")?, alg.sector_id("B")?);
            // symmetric perturbation keeps (xy)* = y*x* intact
            alg.perturb_table(u, b, 0, 0, 0, c(0.25, 0.0))?;
            alg.perturb_table(b, u, 0, 0, 0, c(0.25, 0.0))?;
            inst.expected = Some(expect(&[("property_A", false), ("semi_associative", false)]));
            inst
        }
        "fixture:scaled_norm" => {
            let mut inst = compact_operator(2, 1)?;
            inst.seminorm = inst.seminorm.with_raw(RawEvaluator::ScaledOperatorNorm(2.0));
            inst.expected = Some(expect(&[("cstar_axioms", false)]));
            inst
        }
        "fixture:frobenius_norm" => {
            let mut inst = compact_operator(2, 1)?;
            inst.seminorm = inst.seminorm.with_raw(RawEvaluator::Frobenius);
            inst.expected = Some(expect(&[("cstar_axioms", false)]));
            inst
        }
        "fixture:property_b_failure" => {
            let (alg, p) = quasi_pair("X")?;
            let mut inst = Instance::new(name, json!({}), alg, p);
            let mut e = expect(&[("property_B", false), ("cstar_axioms", true)]);
            e.codimension = Some(2);
            inst.expected = Some(e);
            inst
        }
        "fixture:np_trivial" => {
            let (alg, p) = quasi_pair("A0")?;
            let mut inst = Instance::new(name, json!({}), alg, p);
            inst.expected = Some(expect(&[("property_B", true), ("well_behaved", false)]));
            inst
        }
        "fixture:enlarged_pi" => {
            let mut inst = weighted_diagonal(3, 1, 2.0)?;
            let extra = 2;
            let h = inst.seminorm.hilbert_dim() + extra;
            let images = (0..inst.seminorm.dim())
                .map(|i| {
                    let mut m = zeros(h, h);
                    let w = inst.seminorm.witness_image(i);
                    m.view_mut((0, 0), w.shape()).copy_from(w);
                    m
                })
                .collect();
            inst.pi = Some(CustomPi { hilbert_dim: h, images });
            inst.expected = Some(expect(&[("well_behaved", false), ("semifinite", true)]));
            inst
        }
        "fixture:inconsistent_span" => {
            let w1 = c(1.0, 0.0);
            let w2 = c(2.0, 0.0);
            let (c1, c2) = (c(3.0, 0.0), c(5.0, 0.0));
            let one = c(1.0, 0.0);
            let ff = ProductTensor::pointwise(&[one, one]);
            let ef = ProductTensor::from_fn(1, 2, 2, |_, j| vec![(j, one)]);
            let fe = ProductTensor::from_fn(2, 1, 2, |i, _| vec![(i, one)]);
            let uf = ProductTensor::from_fn(1, 2, 2, |_, j| vec![(j, [w1, w2][j])]);
            let fu = ProductTensor::from_fn(2, 1, 2, |i, _| vec![(i, [w1, w2][i])]);
            let ue = ProductTensor::from_fn(1, 1, 2, |_, _| vec![(0, c1), (1, c2)]);
            let alg = AlgebraBuilder::new()
                .sector("F", 2, "F")
                .sector("E", 1, "E")
                .sector("U", 1, "U")
                .product("F", "F", "F", ff)
                .product("E", "E", "E", ProductTensor::pointwise(&[one]))
                .product("E", "F", "F", ef)
                .product("F", "E", "F", fe)
                .product("U", "F", "F", uf)
                .product("F", "U", "F", fu)
                .product("U", "E", "F", ue.clone())
                .product("E", "U", "F", ue)
                .build()?;
            let p = WitnessedSeminorm::new(
                &alg,
                &["F", "E"],
                2,
                vec![("F", vec![unit(2, 0, 0), unit(2, 1, 1)]), ("E", vec![CMat::identity(2, 2)])],
            )?;
            let mut inst = Instance::new(name, json!({}), alg, p);
            inst.expected = Some(Expected {
                error: Some("IllDefinedAction".into()),
                ..Default::default()
            });
            inst
        }
        "fixture:zero_seminorm" => {
            let mut inst = weighted_diagonal(3, 1, 2.0)?;
            inst.seminorm = WitnessedSeminorm::zero();
            inst.expected = Some(expect(&[
                ("cstar_axioms", true),
                ("property_B", true),
                ("finite", true),
                ("semifinite", true),
            ]));
            inst
        }
        "fixture:non_semi_associative" => {
            let (alpha, beta, gamma) = (c(2.0, 0.0), c(3.0, 0.0), c(5.0, 0.0));
            let one = c(1.0, 0.0);
            let alg = AlgebraBuilder::new()
                .sector("F", 1, "F")
                .sector("U", 1, "U")
                .sector("V", 1, "V")
                .product("F", "F", "F", ProductTensor::pointwise(&[one]))
                .product("U", "F", "F", ProductTensor::pointwise(&[alpha]))
                .product("F", "U", "F", ProductTensor::pointwise(&[alpha]))
                .product("V", "F", "F", ProductTensor::pointwise(&[beta]))
                .product("F", "V", "F", ProductTensor::pointwise(&[beta]))
                .product("U", "V", "F", ProductTensor::from_fn(1, 1, 1, |_, _| vec![(0, gamma)]))
                .product("V", "U", "F", ProductTensor::from_fn(1, 1, 1, |_, _| vec![(0, gamma)]))
                .build()?;
            let p = WitnessedSeminorm::new(&alg, &["F"], 1, vec![("F", vec![CMat::identity(1, 1)])])?;
            let mut inst = Instance::new(name, json!({"alpha": 2.0, "beta": 3.0, "gamma": 5.0}), alg, p);
            inst.expected = Some(expect(&[
                ("property_A", true),
                ("semi_associative", false),
                ("representable", false),
            ]));
            inst
        }
        other => return Err(Error::InvalidParams(format!("unknown instance `{other}`"))),
    };
    inst.name = name.to_string();
    inst.meta.insert("fixture".into(), json!(true));
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::SectorId;
    use crate::algebra::Element;

    #[test]
    fn wda_u_times_b_is_pointwise() {
        let inst = weighted_diagonal(3, 1, 2.0).unwrap();
        let alg = &inst.algebra;
        let (u, b) = (alg.sector_id("U").unwrap(), alg.sector_id("B").unwrap());
        let x = Element::from_part(u, CVec::from_vec(vec![c(1.0, 0.0), c(2.0, 1.0), c(-1.0, 0.0)]));
        let y = Element::from_part(b, CVec::from_vec(vec![c(3.0, 0.0), c(0.0, 1.0), c(2.0, 0.0)]));
        let xy = alg.multiply(&x, &y).unwrap().unwrap();
        // oracle: π(x) = diag(x_i w_i), π(y) = diag(y_i); product back in U coordinates
        let want = [c(3.0, 0.0), c(2.0, 1.0) * c(0.0, 1.0), c(-2.0, 0.0)];
        let got = xy.part(u).unwrap();
        for i in 0..3 {
            assert!((got[i] - want[i]).norm() < 1e-12);
        }
        assert_eq!(alg.multiply(&x, &x).unwrap(), None);
    }

    #[test]
    fn wda_right_multipliers() {
        let inst = weighted_diagonal(3, 1, 2.0).unwrap();
        let alg = &inst.algebra;
        let r = alg.universal_right_multipliers();
        let names: Vec<&str> = r.iter().map(|s| alg.sector_name(*s)).collect();
        assert_eq!(names, ["F", "B"]);
    }

    #[test]
    fn cq_dimensions() {
        let inst = cq_spectral(&[1, 1, 2], &[1.0, 2.0, 4.0], None).unwrap();
        assert_eq!(inst.meta["c_s_dim"], json!(6));
        assert_eq!(inst.algebra.sector(SectorId(0)).dim, 6);
        let merged = cq_spectral(&[1, 1, 2], &[1.0, 1.0, 4.0], None).unwrap();
        assert_eq!(merged.meta["c_s_dim"], json!(8));
        assert!(cq_spectral(&[1, 2], &[2.0, 1.0], None).is_err());
        assert!(cq_spectral(&[1], &[0.5], None).is_err());
        assert!(cq_spectral(&[], &[], None).is_err());
    }

    #[test]
    fn cq_s_norm_of_projection() {
        let blocks = [1, 1, 2];
        let lambdas = [1.0, 2.0, 4.0];
        let p1 = unit(4, 0, 0);
        assert!((s_norm(&blocks, &lambdas, &p1) - 1.0).abs() < 1e-12);
        let inst = cq_spectral(&blocks, &lambdas, None).unwrap();
        let levels = inst.meta["banach_axioms"]["b_c_checked_per_level"].as_array().unwrap().clone();
        for l in levels {
            assert!(l["c_norm_identity"].as_f64().unwrap() < 1e-12);
            assert!(l["isometric_involution"].as_f64().unwrap() < 1e-12);
        }
    }

    #[test]
    fn hermite_number_operator_diagonal() {
        let inst = hermite_number(5, 1).unwrap();
        let alg = &inst.algebra;
        let p = alg.sector_id("P").unwrap();
        let n = Element::from_part(p, CVec::from_element(5, c(1.0, 0.0)));
        let r = alg.sector_id("R").unwrap();
        let f00 = alg.basis_element(alg.offset(r));
        let prod = alg.multiply(&n, &f00).unwrap().unwrap();
        assert!(alg.residual(&prod, &f00) < 1e-14);
    }

    #[test]
    fn builders_reject_bad_params() {
        assert!(weighted_diagonal(0, 1, 2.0).is_err());
        assert!(compact_operator(1, 1).is_err());
        assert!(hermite_number(1, 1).is_err());
        assert!(fixture("fixture:nope").is_err());
    }

    #[test]
    fn all_fixtures_build() {
        assert_eq!(build_fixtures().len(), FIXTURES.len());
    }
}
