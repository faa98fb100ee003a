//! From a (modelled) unbounded representation back to seminorms.
//!
//! An unbounded `π` cannot be seen at one finite size, so it is given as a
//! [`TruncationTower`]: a chain of finite instances with isometric
//! embeddings. Sectors whose operator norms plateau along the tower are
//! treated as bounded. The plateau test is a heuristic and is reported as
//! such.

use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::{PartialStarAlgebra, SectorId};
use crate::completion::build_quotient;
use crate::error::{Error, Result};
use crate::linalg::{identity, max_abs, op_norm, outside_residual, same_span, CMat};
use crate::report::Check;
use crate::representation::{build_induced, check_star_rep, classify_well_behaved, ConcreteRep, QuasiRep};
use crate::seminorm::{
    check_property_b, check_witness, compute_np, seminorm_leq, Mode, WitnessedSeminorm,
};

pub const MIN_LEVELS: usize = 4;
pub const PLATEAU_TOL: f64 = 1e-6;
pub const PLATEAU_WINDOW: usize = 3;

/// One truncation level.
#[derive(Clone, Debug)]
pub struct TowerLevel {
    pub algebra: PartialStarAlgebra,
    pub hilbert_dim: usize,
    /// `π^(n)` on every global basis element.
    pub pi: Vec<CMat>,
    /// Global index at the next level of each basis element here.
    pub embed: Vec<usize>,
    /// `H_n -> H_{n+1}`; empty at the top.
    pub isometry: CMat,
}

#[derive(Clone, Debug)]
pub struct TruncationTower {
    pub name: String,
    pub levels: Vec<TowerLevel>,
    pub declared: Option<BTreeMap<String, bool>>,
    /// Isometry and compression residuals.
    pub consistency: Check,
}

impl TruncationTower {
    pub fn new(name: &str, levels: Vec<TowerLevel>, declared: Option<BTreeMap<String, bool>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Malformed("tower without levels".into()));
        }
        let mut check = Check::new("tower_consistency", 1e-10);
        for (n, level) in levels.iter().enumerate() {
            if level.pi.len() != level.algebra.dim() {
                return Err(Error::Malformed(format!("level {n}: π given on {} of {} basis elements", level.pi.len(), level.algebra.dim())));
            }
            let Some(next) = levels.get(n + 1) else { continue };
            let j = &level.isometry;
            if j.shape() != (next.hilbert_dim, level.hilbert_dim) || level.embed.len() != level.algebra.dim() {
                return Err(Error::Malformed(format!("level {n}: embedding has the wrong shape")));
            }
            let gram = j.adjoint() * j - identity(level.hilbert_dim);
            check.record(max_abs(&gram), || format!("level {n}: embedding is not isometric"));
            for (g, &h) in level.embed.iter().enumerate() {
                if h >= next.algebra.dim() {
                    return Err(Error::Malformed(format!("level {n}: embed index {h} out of range")));
                }
                let comp = j.adjoint() * &next.pi[h] * j;
                let scale = max_abs(&level.pi[g]).max(1.0);
                check.record(max_abs(&(comp - &level.pi[g])) / scale, || {
                    format!("level {n}: π({}) is not a compression", level.algebra.basis_label(g))
                });
            }
        }
        let consistency = check.finish();
        if !consistency.passed {
            return Err(Error::Malformed(format!("inconsistent tower: {consistency}")));
        }
        Ok(TruncationTower {
            name: name.to_string(),
            levels,
            declared,
            consistency,
        })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn top(&self) -> &TowerLevel {
        self.levels.last().expect("nonempty")
    }

    /// Norms of one bottom-level basis element, followed up the tower.
    pub fn element_profile(&self, global: usize) -> Vec<f64> {
        let mut g = global;
        let mut out = Vec::with_capacity(self.depth());
        for level in &self.levels {
            out.push(op_norm(&level.pi[g]));
            if let Some(&h) = level.embed.get(g) {
                g = h;
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct BoundedPart {
    /// Bounded sectors of the top-level algebra.
    pub sectors: BTreeSet<SectorId>,
    /// Max basis norm of each sector at each level.
    pub profiles: BTreeMap<String, Vec<f64>>,
    pub flags: BTreeMap<String, bool>,
    /// Top-level norm of every top-level basis element.
    pub limit_norms: Vec<f64>,
    /// Always true: the flags come from a plateau heuristic.
    pub heuristic: bool,
    /// Comparison with declared flags, when the tower carries them.
    pub declared_match: Option<Check>,
}

impl BoundedPart {
    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }
}

fn plateau(profile: &[f64]) -> bool {
    let tail = &profile[profile.len().saturating_sub(PLATEAU_WINDOW)..];
    let hi = tail.iter().copied().fold(0.0_f64, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    hi == 0.0 || (hi - lo) / hi <= PLATEAU_TOL
}

pub fn detect_bounded_part(tower: &TruncationTower) -> Result<BoundedPart> {
    if tower.depth() < MIN_LEVELS {
        return Err(Error::TooFewLevels {
            found: tower.depth(),
            required: MIN_LEVELS,
        });
    }
    let top = tower.top();
    let alg = &top.algebra;
    let mut profiles = BTreeMap::new();
    let mut flags = BTreeMap::new();
    let mut sectors = BTreeSet::new();
    for s in alg.sector_ids() {
        let name = alg.sector_name(s).to_string();
        let profile: Vec<f64> = tower
            .levels
            .iter()
            .map(|level| match level.algebra.sector_id(&name) {
                Ok(ls) => {
                    let one: BTreeSet<SectorId> = [ls].into_iter().collect();
                    level
                        .algebra
                        .basis_of(&one)
                        .iter()
                        .map(|g| op_norm(&level.pi[*g]))
                        .fold(0.0, f64::max)
                }
                Err(_) => 0.0,
            })
            .collect();
        let bounded = plateau(&profile);
        if bounded {
            sectors.insert(s);
        }
        flags.insert(name.clone(), bounded);
        profiles.insert(name, profile);
    }
    let limit_norms = top.pi.iter().map(op_norm).collect();
    let declared_match = tower.declared.as_ref().map(|declared| {
        let mut check = Check::new("declared_boundedness", 0.0);
        check.note("detected flags are heuristic");
        for (name, detected) in &flags {
            match declared.get(name) {
                Some(d) if d == detected => check.cases += 1,
                Some(d) => check.fail(format!("sector `{name}`: detected {detected}, declared {d}")),
                None => check.note(format!("no declaration for sector `{name}`")),
            }
        }
        check.finish()
    });
    Ok(BoundedPart {
        sectors,
        profiles,
        flags,
        limit_norms,
        heuristic: true,
        declared_match,
    })
}

/// `r^L_π`: witness given by the top-level operators on the bounded sectors.
/// An empty bounded part gives the zero-domain seminorm.
pub fn build_rl_pi(tower: &TruncationTower, bp: &BoundedPart) -> Result<WitnessedSeminorm> {
    if bp.is_empty() {
        return Ok(WitnessedSeminorm::zero());
    }
    let top = tower.top();
    let alg = &top.algebra;
    let per: BTreeMap<SectorId, Vec<CMat>> = bp
        .sectors
        .iter()
        .map(|s| {
            let one: BTreeSet<SectorId> = [*s].into_iter().collect();
            (*s, alg.basis_of(&one).iter().map(|g| top.pi[*g].clone()).collect())
        })
        .collect();
    WitnessedSeminorm::from_parts(alg, bp.sectors.clone(), top.hilbert_dim, per, Mode::Witnessed)
}

fn closed(alg: &PartialStarAlgebra, set: &BTreeSet<SectorId>) -> bool {
    set.iter().all(|s| set.contains(&alg.sector(*s).star))
        && set.iter().all(|s| {
            set.iter()
                .all(|t| alg.product_sector(*s, *t).is_none_or(|u| set.contains(&u)))
        })
}

/// Restrictions of `r` to sector subdomains that are *-subalgebras, carry a
/// multiplicative witness and satisfy Property (B). Ordered by size, then
/// lexicographically by sector id.
pub fn select_sigma_b(alg: &PartialStarAlgebra, r: &WitnessedSeminorm) -> Result<Vec<WitnessedSeminorm>> {
    let dom: Vec<SectorId> = r.domain().iter().copied().collect();
    if dom.len() > 16 {
        return Err(Error::Unsupported(format!("{} domain sectors is too many to enumerate", dom.len())));
    }
    let mut subsets: Vec<BTreeSet<SectorId>> = (1u32..(1 << dom.len()))
        .map(|mask| {
            dom.iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, s)| *s)
                .collect()
        })
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let mut out = Vec::new();
    for set in subsets {
        if !closed(alg, &set) {
            continue;
        }
        let member = r.restrict(alg, &set)?;
        if member.dim() == 0 || !check_property_b(alg, &member).check.passed {
            continue;
        }
        if !check_witness(alg, &member).passed {
            continue;
        }
        out.push(member);
    }
    Ok(out)
}

pub fn sector_names(alg: &PartialStarAlgebra, p: &WitnessedSeminorm) -> Vec<String> {
    p.domain().iter().map(|s| alg.sector_name(*s).to_string()).collect()
}

#[derive(Clone, Debug)]
pub struct NaturalRep {
    pub pi: ConcreteRep,
    pub qr: QuasiRep,
    /// `π^N(a) v = π(a) v` for `v` in the domain.
    pub agreement: Check,
    /// `‖Π(x̃)‖ = r(x)` on the D(r) basis.
    pub norms: Check,
    pub star_rep: Check,
    pub warning: Option<String>,
}

impl NaturalRep {
    pub fn all_pass(&self) -> bool {
        self.agreement.passed && self.norms.passed && self.star_rep.passed
    }
}

/// `π^N_r` for `r ∈ Σ_B(π)`, where `pi_ops` are the operators of `π`
/// (top-level matrices for a tower).
pub fn build_natural_rep(alg: &PartialStarAlgebra, r: &WitnessedSeminorm, pi_ops: &[CMat]) -> Result<NaturalRep> {
    let q = build_quotient(alg, r)?;
    let pi = ConcreteRep::witness_rep(&q);
    let qr = build_induced(alg, r, &q, &pi)?;
    let tol = 1e-9;
    let mut norms = Check::new("natural_rep_norms", tol);
    for (i, g) in r.basis().iter().enumerate() {
        let x = alg.basis_element(*g);
        let lhs = op_norm(&pi.apply(&q.tilde(alg, &x)?));
        let rhs = op_norm(r.witness_image(i));
        norms.record((lhs - rhs).abs() / rhs.max(1.0), || format!("x = {}", alg.basis_label(*g)));
    }
    let mut agreement = Check::new("natural_rep_agreement", tol);
    let warning = if compute_np(alg, r).is_trivial() {
        agreement.note("vacuous: N_r = {0}");
        Some("N_r = {0}: natural representation is zero".to_string())
    } else {
        for (g, op) in pi_ops.iter().enumerate().take(alg.dim()) {
            let lhs = qr.operator(g) * &qr.domain_basis;
            let rhs = op * &qr.domain_basis;
            let scale = max_abs(&rhs).max(1.0);
            agreement.record(max_abs(&(lhs - rhs)) / scale, || format!("a = {}", alg.basis_label(g)));
        }
        None
    };
    let star_rep = check_star_rep(alg, &qr);
    Ok(NaturalRep {
        pi,
        qr,
        agreement: agreement.finish(),
        norms: norms.finish(),
        star_rep,
        warning,
    })
}

/// Full reverse pipeline on a tower: bounded part, `r^L_π`, `Σ_B(π)` and the
/// natural representation of its largest member.
#[derive(Clone, Debug)]
pub struct ReverseReport {
    pub bounded: BoundedPart,
    pub rl_domain: Vec<String>,
    pub sigma_b: Vec<Vec<String>>,
    pub chosen: Option<Vec<String>>,
    pub natural: Option<NaturalRep>,
    pub rl_cstar: Check,
    pub monotone: Check,
}

pub fn run_reverse(tower: &TruncationTower) -> Result<ReverseReport> {
    let bounded = detect_bounded_part(tower)?;
    let r = build_rl_pi(tower, &bounded)?;
    let top = tower.top();
    let alg = &top.algebra;
    let rl_cstar = crate::seminorm::check_cstar_axioms(alg, &r);
    let members = select_sigma_b(alg, &r)?;
    let mut monotone = Check::new("sigma_b_monotone", 0.0);
    for a in &members {
        for b in &members {
            if a.domain().is_subset(b.domain()) {
                monotone.cases += 1;
                if !seminorm_leq(alg, a, b) {
                    monotone.fail(format!("{:?} ⊄ {:?}", sector_names(alg, a), sector_names(alg, b)));
                }
            }
        }
    }
    let chosen = members.iter().rev().find(|m| !compute_np(alg, m).is_trivial());
    let natural = chosen.map(|m| build_natural_rep(alg, m, &top.pi)).transpose()?;
    Ok(ReverseReport {
        rl_domain: sector_names(alg, &r),
        sigma_b: members.iter().map(|m| sector_names(alg, m)).collect(),
        chosen: chosen.map(|m| sector_names(alg, m)),
        natural,
        bounded,
        rl_cstar,
        monotone: monotone.finish(),
    })
}

#[derive(Clone, Debug)]
pub struct NaturalExtension {
    /// Sectors of the chosen extension `r_{π_p} ⊇ p`, if any.
    pub extension: Option<Vec<String>>,
    pub containment: Check,
    pub agreement: Check,
    pub closure_equality: Check,
    /// Strict inclusion `D(π_p) ⊊ D(π^N)`.
    pub strict: bool,
}

impl NaturalExtension {
    pub fn all_pass(&self) -> bool {
        self.extension.is_some() && self.containment.passed && self.agreement.passed && self.closure_equality.passed
    }
}

/// Given a well-behaved `π_p`, extend `p` by the bounded operators of `π_p`
/// and check `π_p ⊆ π^N_{r}` together with `H_{π_p} = H_{π^N}`.
pub fn verify_natural_extension(alg: &PartialStarAlgebra, p: &WitnessedSeminorm, qr_p: &QuasiRep) -> Result<NaturalExtension> {
    let cls = classify_well_behaved(alg, p, qr_p);
    if !cls.well_behaved.passed {
        return Err(Error::Precondition(format!("π_p is not well-behaved: {}", cls.well_behaved)));
    }
    let pc = &qr_p.closure_basis;
    let dh = pc.ncols();
    let ops: Vec<CMat> = (0..alg.dim()).map(|g| pc.adjoint() * qr_p.operator(g) * pc).collect();
    let per: BTreeMap<SectorId, Vec<CMat>> = alg
        .sector_ids()
        .map(|s| {
            let one: BTreeSet<SectorId> = [s].into_iter().collect();
            (s, alg.basis_of(&one).iter().map(|g| ops[*g].clone()).collect())
        })
        .collect();
    let r_full = WitnessedSeminorm::from_parts(alg, alg.all_sectors(), dh, per, Mode::Witnessed)?;
    let members = select_sigma_b(alg, &r_full)?;
    let tol = 1e-9;
    let Some(member) = members
        .iter()
        .rev()
        .find(|m| seminorm_leq(alg, p, m) && !compute_np(alg, m).is_trivial())
    else {
        let mut none = Check::new("extension_containment", tol);
        none.fail("no admissible extension");
        return Ok(NaturalExtension {
            extension: None,
            containment: none.clone().finish(),
            agreement: Check::vacuous("extension_agreement"),
            closure_equality: Check::vacuous("extension_closure"),
            strict: false,
        });
    };
    let natural = build_natural_rep(alg, member, &ops)?;
    let n = &natural.qr;
    let dp = pc.adjoint() * &qr_p.domain_basis;

    let mut containment = Check::new("extension_containment", tol);
    containment.record(outside_residual(&n.domain_basis, &dp), || "D(π_p) ⊄ D(π^N)".into());
    let containment = containment.finish();

    let mut agreement = Check::new("extension_agreement", tol);
    for g in 0..alg.dim() {
        let lhs = pc.adjoint() * qr_p.operator(g) * &qr_p.domain_basis;
        let rhs = n.operator(g) * &dp;
        let scale = max_abs(&lhs).max(1.0);
        agreement.record(max_abs(&(lhs - rhs)) / scale, || format!("a = {}", alg.basis_label(g)));
    }
    let agreement = agreement.finish();

    let mut closure = Check::new("extension_closure", tol);
    closure.cases = 1;
    let (same, res) = if dh == 0 { (true, 0.0) } else { same_span(&n.closure_basis, &identity(dh), tol) };
    closure.record(res, || "H_π^N != H_π_p".into());
    if !same {
        closure.fail(format!("dim H_π^N = {}, dim H_π_p = {dh}", n.closure_dim()));
    }
    Ok(NaturalExtension {
        extension: Some(sector_names(alg, member)),
        strict: n.domain_dim() > qr_p.domain_dim(),
        containment,
        agreement,
        closure_equality: closure.finish(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{build_tower, hermite_number, weighted_diagonal};

    fn wda_tower(depth: usize) -> TruncationTower {
        let inst = weighted_diagonal(3, depth, 2.0).unwrap();
        build_tower(inst.tower.as_ref().unwrap()).unwrap()
    }

    #[test]
    fn too_few_levels() {
        let t = wda_tower(3);
        assert!(matches!(
            detect_bounded_part(&t),
            Err(Error::TooFewLevels { found: 3, required: 4 })
        ));
    }

    #[test]
    fn wda_profiles() {
        let t = wda_tower(5);
        let bp = detect_bounded_part(&t).unwrap();
        assert!(bp.declared_match.as_ref().unwrap().passed);
        assert_eq!(bp.profiles["B"], vec![1.0; 5]);
        // max weight at level n is 2^(3n - 1)
        let u: Vec<f64> = (1..=5).map(|n| 2f64.powi(3 * n - 1)).collect();
        assert_eq!(bp.profiles["U"], u);
        assert!(!bp.flags["U"]);
        let r = build_rl_pi(&t, &bp).unwrap();
        assert_eq!(sector_names(&t.top().algebra, &r), vec!["F", "B"]);
    }

    #[test]
    fn wda_sigma_b_and_natural_rep() {
        let t = wda_tower(5);
        let rep = run_reverse(&t).unwrap();
        assert!(rep.sigma_b.contains(&vec!["F".to_string()]));
        assert!(rep.sigma_b.contains(&vec!["F".to_string(), "B".to_string()]));
        assert!(rep.rl_cstar.passed);
        assert!(rep.monotone.passed);
        let nat = rep.natural.unwrap();
        assert!(nat.all_pass(), "{:?}", nat.agreement);
    }

    #[test]
    fn hermite_round_trip() {
        let inst = hermite_number(3, 5).unwrap();
        let t = build_tower(inst.tower.as_ref().unwrap()).unwrap();
        let rep = run_reverse(&t).unwrap();
        assert!(rep.bounded.declared_match.unwrap().passed);
        assert!(rep.natural.unwrap().all_pass());
    }

    #[test]
    fn element_profile_follows_embeddings() {
        let t = wda_tower(4);
        let alg = &t.levels[0].algebra;
        let u2 = alg.offset(alg.sector_id("U").unwrap()) + 2;
        assert_eq!(t.element_profile(u2), vec![4.0; 4]);
    }

    #[test]
    fn zero_domain_selects_nothing() {
        let inst = weighted_diagonal(2, 1, 2.0).unwrap();
        assert!(select_sigma_b(&inst.algebra, &WitnessedSeminorm::zero()).unwrap().is_empty());
    }
}
