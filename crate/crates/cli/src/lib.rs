//! Audit driver behind the `pcstar` binary.

use std::collections::BTreeMap;
use std::path::Path;

use partial_cstar::completion::{build_quotient, verify_banach_star};
use partial_cstar::format::{read_instance, to_json_pretty};
use partial_cstar::instances::{build_tower, Expected, Instance};
use partial_cstar::representation::{
    build_induced, check_induced_norms, check_quasi_rep, check_star_rep, classify_well_behaved,
    restrict_to_well_behaved, ConcreteRep, QuasiRep,
};
use partial_cstar::reverse::{run_reverse, verify_natural_extension};
use partial_cstar::seminorm::{
    check_cstar_axioms, check_domain, check_property_b, classify_finiteness, FinitenessKind,
};
use partial_cstar::{Check, Error, PartialStarAlgebra, QuotientCStarAlgebra, WitnessedSeminorm};
use serde::Serialize;
use serde_json::Value;

pub const REPORT_SCHEMA: &str = "pcstar-audit/1";

/// Every report carries all of these, `null` when the stage was skipped.
pub const FLAGS: &[&str] = &[
    "property_A",
    "property_B",
    "semi_associative",
    "cstar_axioms",
    "finite",
    "semifinite",
    "weakly_semifinite",
    "representable",
    "well_behaved",
    "strongly_nondegenerate",
    "natural_rep_agreement",
    "extension_containment",
];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("tower required: instance `{0}` has no truncation tower")]
    TowerRequired(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Debug, Serialize)]
pub struct Descriptor {
    pub name: String,
    pub params: Value,
    pub sectors: Vec<String>,
    pub domain: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Skipped {
    pub stage: String,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorEntry {
    pub stage: String,
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpectedMatch {
    pub expected: Expected,
    pub matched: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mismatches: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorBoundedness {
    pub sector: String,
    pub bounded: bool,
    pub declared: Option<bool>,
    pub profile: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReverseSection {
    pub tower: String,
    pub levels: usize,
    pub hilbert_dims: Vec<usize>,
    /// Boundedness comes from a plateau heuristic over the last levels.
    pub heuristic: bool,
    pub boundedness: Vec<SectorBoundedness>,
    pub rl_domain: Vec<String>,
    pub sigma_b: Vec<Vec<String>>,
    pub chosen: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub schema: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub instance: Descriptor,
    pub flags: BTreeMap<String, Option<bool>>,
    /// Flag name to the check that decides it.
    pub flag_checks: BTreeMap<String, String>,
    pub checks: BTreeMap<String, Check>,
    pub residuals: BTreeMap<String, f64>,
    pub dimensions: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finiteness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub codimension: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<Skipped>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<ExpectedMatch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reverse: Option<ReverseSection>,
}

impl AuditReport {
    fn new(inst: &Instance) -> Self {
        let alg = &inst.algebra;
        AuditReport {
            schema: REPORT_SCHEMA.into(),
            timestamp: None,
            instance: Descriptor {
                name: inst.name.clone(),
                params: inst.params.clone(),
                sectors: alg.sectors().iter().map(|s| s.name.clone()).collect(),
                domain: inst.seminorm.domain().iter().map(|s| alg.sector_name(*s).to_string()).collect(),
            },
            flags: FLAGS.iter().map(|f| (f.to_string(), None)).collect(),
            flag_checks: BTreeMap::new(),
            checks: BTreeMap::new(),
            residuals: BTreeMap::new(),
            dimensions: BTreeMap::new(),
            finiteness: None,
            codimension: None,
            skipped: Vec::new(),
            error: None,
            warnings: Vec::new(),
            expected: None,
            reverse: None,
        }
    }

    pub fn flag(&self, name: &str) -> Option<bool> {
        self.flags.get(name).copied().flatten()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.get(name)
    }

    fn record(&mut self, check: Check) -> bool {
        let passed = check.passed;
        self.residuals.insert(check.name.clone(), check.max_residual);
        self.checks.insert(check.name.clone(), check);
        passed
    }

    fn set_flag(&mut self, flag: &str, check: Check) -> bool {
        debug_assert!(FLAGS.contains(&flag));
        self.flag_checks.insert(flag.to_string(), check.name.clone());
        self.flags.insert(flag.to_string(), Some(check.passed));
        self.record(check)
    }

    fn skip(&mut self, stage: &str, reason: impl Into<String>) {
        self.skipped.push(Skipped {
            stage: stage.into(),
            reason: format!("skipped: precondition failed: {}", reason.into()),
        });
    }

    fn fail(&mut self, stage: &str, e: &Error) {
        self.error = Some(ErrorEntry {
            stage: stage.into(),
            kind: e.kind().into(),
            message: e.to_string(),
        });
    }

    fn dim(&mut self, key: &str, v: usize) {
        self.dimensions.insert(key.into(), v);
    }

    fn compare_expected(&mut self, expected: &Expected) {
        let mut mismatches = Vec::new();
        for (flag, want) in &expected.flags {
            let got = self.flag(flag);
            if got != Some(*want) {
                mismatches.push(format!("{flag}: expected {want}, got {got:?}"));
            }
        }
        if let Some(codim) = expected.codimension {
            if self.codimension != Some(codim) {
                mismatches.push(format!("codimension: expected {codim}, got {:?}", self.codimension));
            }
        }
        if let Some(kind) = &expected.error {
            let got = self.error.as_ref().map(|e| e.kind.as_str());
            if got != Some(kind.as_str()) {
                mismatches.push(format!("error: expected {kind}, got {got:?}"));
            }
        }
        self.expected = Some(ExpectedMatch {
            expected: expected.clone(),
            matched: mismatches.is_empty(),
            mismatches,
        });
    }

    pub fn to_json(&self) -> String {
        to_json_pretty(self).expect("report serializes")
    }
}

fn boolean_check(name: &str, ok: bool, why: impl FnOnce() -> String) -> Check {
    let mut c = Check::new(name, 0.0);
    c.cases = 1;
    if !ok {
        c.fail(why());
    }
    c.finish()
}

#[derive(Clone, Debug, Default)]
pub struct AuditOptions {
    pub tol: Option<f64>,
    pub timestamp: bool,
}

fn timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

/// Run algebra → seminorm → quotient → representation on one instance.
pub fn cmd_audit(inst: &Instance, opts: &AuditOptions) -> AuditReport {
    let mut inst = inst.clone();
    if let Some(tol) = opts.tol {
        inst.algebra = inst.algebra.with_tol(tol);
    }
    let mut report = AuditReport::new(&inst);
    if opts.timestamp {
        report.timestamp = Some(timestamp());
    }
    audit_stages(&inst, &mut report);
    if let Some(e) = &inst.expected {
        report.compare_expected(e);
    }
    report
}

fn audit_stages(inst: &Instance, report: &mut AuditReport) {
    let alg = &inst.algebra;
    let p = &inst.seminorm;
    report.dim("algebra", alg.dim());
    report.dim("domain", p.dim());

    // algebra
    let involution = report.record(alg.check_involution());
    report.record(alg.check_unit());
    report.set_flag("property_A", alg.check_property_a());
    report.set_flag("semi_associative", alg.check_semi_associative());
    if !involution {
        report.skip("seminorm", "involution");
        return;
    }

    // seminorm
    let closure = report.record(check_domain(alg, p));
    if !closure {
        report.skip("seminorm", "domain is not a *-subalgebra");
        return;
    }
    let cstar = report.set_flag("cstar_axioms", check_cstar_axioms(alg, p));
    let pb = check_property_b(alg, p);
    report.codimension = Some(pb.codimension);
    let prop_b = report.set_flag("property_B", pb.check);
    let fin = classify_finiteness(alg, p);
    report.dim("np", fin.np.dim());
    report.finiteness = Some(
        match fin.kind() {
            FinitenessKind::Finite => "finite",
            FinitenessKind::Semifinite => "semifinite",
            FinitenessKind::Neither => "neither",
        }
        .into(),
    );
    report.set_flag("finite", boolean_check("finite", fin.finite, || "span N_p != D(p)".into()));
    report.set_flag(
        "semifinite",
        boolean_check("semifinite", fin.semifinite, || "span N_p + ker p != D(p)".into()),
    );
    report.record(fin.np_ideal);
    if !cstar {
        report.skip("completion", "cstar_axioms");
        return;
    }
    if !prop_b {
        report.skip("completion", "property_B");
        return;
    }

    // completion
    let q = match build_quotient(alg, p) {
        Ok(q) => q,
        Err(e) => {
            report.fail("completion", &e);
            return;
        }
    };
    report.dim("quotient", q.dim());
    report.record(verify_banach_star(&q));

    // representation
    let canonical = ConcreteRep::witness_rep(&q);
    let pi = match &inst.pi {
        Some(custom) => match ConcreteRep::from_domain_images(alg, &q, custom) {
            Ok(pi) => pi,
            Err(e) => {
                report.fail("representation", &e);
                return;
            }
        },
        None => canonical.clone(),
    };
    let mut hom = pi.homomorphism.clone();
    hom.name = "pi_homomorphism".into();
    report.record(hom);
    report.record(boolean_check("pi_faithful", pi.faithful, || "Π is not injective on A_p".into()));
    report.dim("hilbert_Pi", pi.hilbert_dim);
    let qr = match build_induced(alg, p, &q, &pi) {
        Ok(qr) => qr,
        Err(e) => {
            report.fail("representation", &e);
            return;
        }
    };
    representation_stage(alg, p, &q, &canonical, inst.pi.is_some(), &qr, report);
}

fn representation_stage(
    alg: &PartialStarAlgebra,
    p: &WitnessedSeminorm,
    q: &QuotientCStarAlgebra,
    canonical: &ConcreteRep,
    custom: bool,
    qr: &QuasiRep,
    report: &mut AuditReport,
) {
    report.dim("domain_pi", qr.domain_dim());
    report.dim("hilbert_pi", qr.closure_dim());
    if let Some(w) = &qr.warning {
        report.warnings.push(w.clone());
    }
    report.residuals.insert("induced_action".into(), qr.action_residual);
    report.record(qr.np_span.clone());
    let quasi = report.record(check_quasi_rep(alg, qr));
    match check_induced_norms(alg, p, qr) {
        Ok(c) => {
            report.record(c);
        }
        Err(e) => report.warnings.push(e.to_string()),
    }
    let mut star = check_star_rep(alg, qr);
    if !quasi {
        star.fail("not a quasi *-representation");
        star = star.finish();
    }
    report.set_flag("representable", star);

    let cls = classify_well_behaved(alg, p, qr);
    report.dim("commutant", cls.commutant_dims.0);
    let wb = report.set_flag("well_behaved", cls.well_behaved.clone());
    report.set_flag("strongly_nondegenerate", cls.strongly_nondegenerate.clone());
    report.record(cls.norm_equality.clone());
    report.record(cls.commutant_equality.clone());
    report.record(cls.commutant_invariance.clone());

    // weak semifiniteness is decided on the canonical faithful Π
    let weak = if custom {
        match build_induced(alg, p, q, canonical) {
            Ok(cqr) => cqr.closure_dim() == canonical.hilbert_dim,
            Err(_) => false,
        }
    } else {
        qr.closure_dim() == qr.hilbert_dim && qr.pi_faithful
    };
    report.set_flag(
        "weakly_semifinite",
        boolean_check("weakly_semifinite", weak, || "H_π != H_Π for the canonical Π".into()),
    );

    let well_behaved_rep = if wb {
        Some(qr.clone())
    } else {
        match restrict_to_well_behaved(alg, p, q, qr) {
            Ok(r) => {
                let agreement = report.record(r.agreement.clone());
                let rcls = classify_well_behaved(alg, p, &r.qr);
                let mut c = rcls.well_behaved.clone();
                c.name = "restricted_well_behaved".into();
                let ok = report.record(c);
                report.dim("hilbert_pi_restricted", r.qr.closure_dim());
                (agreement && ok).then_some(r.qr)
            }
            Err(e) => {
                report.skip("restriction", e.to_string());
                None
            }
        }
    };
    let Some(wqr) = well_behaved_rep else {
        report.skip("extension", "no well-behaved representation");
        return;
    };
    match verify_natural_extension(alg, p, &wqr) {
        Ok(ext) => {
            let merged = ext
                .containment
                .clone()
                .merge(ext.agreement.clone())
                .merge(ext.closure_equality.clone());
            let mut merged = merged.finish();
            merged.name = "extension".into();
            if let Some(sectors) = &ext.extension {
                merged.note(format!("extension domain: {}", sectors.join(", ")));
            }
            if ext.strict {
                merged.note("D(π_p) is a proper subspace of D(π^N)");
            }
            report.record(ext.containment.clone());
            report.record(ext.agreement.clone());
            report.record(ext.closure_equality.clone());
            report.set_flag("extension_containment", merged);
        }
        Err(e) => report.skip("extension", e.to_string()),
    }
}

/// Audit plus the reverse pipeline on the instance's tower.
pub fn cmd_reverse(inst: &Instance, opts: &AuditOptions) -> CliResult<AuditReport> {
    let spec = inst
        .tower
        .as_ref()
        .ok_or_else(|| CliError::TowerRequired(inst.name.clone()))?;
    let mut report = cmd_audit(inst, opts);
    let tower = build_tower(spec)?;
    let rev = match run_reverse(&tower) {
        Ok(r) => r,
        Err(e) => {
            report.fail("reverse", &e);
            return Ok(report);
        }
    };
    let declared = tower.declared.clone().unwrap_or_default();
    let boundedness = rev
        .bounded
        .flags
        .iter()
        .map(|(s, b)| SectorBoundedness {
            sector: s.clone(),
            bounded: *b,
            declared: declared.get(s).copied(),
            profile: rev.bounded.profiles[s].clone(),
        })
        .collect();
    if let Some(c) = &rev.bounded.declared_match {
        report.record(c.clone());
    }
    let mut tc = tower.consistency.clone();
    tc.name = "tower_consistency".into();
    report.record(tc);
    let mut rl = rev.rl_cstar.clone();
    rl.name = "rl_cstar_axioms".into();
    report.record(rl);
    report.record(rev.monotone.clone());
    let mut warning = None;
    match &rev.natural {
        Some(n) => {
            report.record(n.norms.clone());
            let mut star = n.star_rep.clone();
            star.name = "natural_rep_star".into();
            report.record(star);
            let agreement = n.agreement.clone().merge(n.norms.clone()).merge(n.star_rep.clone()).finish();
            let mut agreement = agreement;
            agreement.name = "natural_rep_agreement".into();
            report.set_flag("natural_rep_agreement", agreement);
            report.residuals.insert("natural_rep_agreement_only".into(), n.agreement.max_residual);
            warning = n.warning.clone();
        }
        None => {
            let c = boolean_check("natural_rep_agreement", false, || {
                "no member of Σ_B(π) has a nonzero absorbing subspace".into()
            });
            report.set_flag("natural_rep_agreement", c);
        }
    }
    report.reverse = Some(ReverseSection {
        tower: tower.name.clone(),
        levels: tower.depth(),
        hilbert_dims: tower.levels.iter().map(|l| l.hilbert_dim).collect(),
        heuristic: rev.bounded.heuristic,
        boundedness,
        rl_domain: rev.rl_domain.clone(),
        sigma_b: rev.sigma_b.clone(),
        chosen: rev.chosen.clone(),
        warning,
    });
    Ok(report)
}

pub fn load(path: &Path) -> CliResult<Instance> {
    read_instance(path).map_err(|e| CliError::Input(e.to_string()))
}

/// Builder parameters given on the command line, merged into a JSON object.
#[derive(Clone, Debug, Default)]
pub struct BuildParams {
    pub k: Option<usize>,
    pub depth: Option<usize>,
    pub ratio: Option<f64>,
    pub d: Option<usize>,
    pub m: Option<usize>,
    pub points: Option<usize>,
    pub degree: Option<usize>,
    pub step: Option<f64>,
    pub blocks: Option<Vec<usize>>,
    pub lambdas: Option<Vec<f64>>,
}

impl BuildParams {
    pub fn to_json(&self) -> Value {
        let mut m = serde_json::Map::new();
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                m.insert(k.into(), v);
            }
        };
        put("k", self.k.map(Value::from));
        put("depth", self.depth.map(Value::from));
        put("ratio", self.ratio.map(Value::from));
        put("d", self.d.map(Value::from));
        put("m", self.m.map(Value::from));
        put("points", self.points.map(Value::from));
        put("degree", self.degree.map(Value::from));
        put("step", self.step.map(Value::from));
        put("blocks", self.blocks.clone().map(Value::from));
        put("lambdas", self.lambdas.clone().map(Value::from));
        Value::Object(m)
    }
}

pub fn cmd_build(name: &str, params: &BuildParams) -> CliResult<Instance> {
    partial_cstar::instances::build_named(name, &params.to_json()).map_err(|e| CliError::Input(e.to_string()))
}

/// Builder names with their default parameters, then fixture names.
pub fn list_instances() -> Vec<String> {
    let mut out: Vec<String> = partial_cstar::instances::BUILDERS.iter().map(|s| s.to_string()).collect();
    out.extend(partial_cstar::instances::FIXTURES.iter().map(|s| s.to_string()));
    out
}
