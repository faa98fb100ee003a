//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use partial_cstar::completion::{build_quotient, verify_banach_star};
use partial_cstar::format::write_instance;
use partial_cstar::instances::{
    build_fixtures, build_tower, compact_operator, cq_spectral, fixture, function_grid, hermite_number,
    weighted_diagonal, Instance,
};
use partial_cstar::linalg::{null_space, op_norm, same_span, zeros, CMat, ONE};
use partial_cstar::representation::{
    build_induced, check_star_rep, classify_well_behaved, restrict_to_well_behaved, ConcreteRep, QuasiRep,
};
use partial_cstar::reverse::{run_reverse, verify_natural_extension};
use partial_cstar::seminorm::{check_cstar_axioms, compute_np, RANK_TOL};
use partial_cstar::{PartialStarAlgebra, WitnessedSeminorm};
use partial_cstar_cli::{cmd_audit, AuditOptions};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn induced(inst: &Instance) -> Result<QuasiRep, String> {
    let (alg, p) = (&inst.algebra, &inst.seminorm);
    let q = build_quotient(alg, p).map_err(|e| format!("{}: {e}", inst.name))?;
    let pi = ConcreteRep::witness_rep(&q);
    build_induced(alg, p, &q, &pi).map_err(|e| format!("{}: {e}", inst.name))
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("{what} took {t:?}, limit {limit:?}"))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for k in [1, 2, 3, 8] {
        let inst = weighted_diagonal(k, 1, 2.0).map_err(|e| e.to_string())?;
        let (alg, p) = (&inst.algebra, &inst.seminorm);
        let axioms = check_cstar_axioms(alg, p);
        ensure(axioms.passed && axioms.max_residual <= 1e-9, || format!("k={k}: {axioms}"))?;
        let q = build_quotient(alg, p).map_err(|e| format!("k={k}: {e}"))?;
        let banach = verify_banach_star(&q);
        ensure(banach.passed && banach.max_residual <= 1e-9, || format!("k={k}: {banach}"))?;
        worst = worst.max(axioms.max_residual).max(banach.max_residual);
    }
    within(start, Duration::from_secs(10), "criterion 1")?;
    Ok(format!("max residual {worst:.2e}, {:.2?}", start.elapsed()))
}

fn builder_corpus_up_to_64() -> Vec<Instance> {
    vec![
        weighted_diagonal(1, 1, 2.0).unwrap(),
        weighted_diagonal(3, 1, 2.0).unwrap(),
        weighted_diagonal(8, 1, 2.0).unwrap(),
        weighted_diagonal(21, 1, 1.25).unwrap(),
        function_grid(8, 2, 0.5, 1).unwrap(),
        compact_operator(2, 1).unwrap(),
        compact_operator(4, 1).unwrap(),
        compact_operator(8, 1).unwrap(),
        hermite_number(5, 1).unwrap(),
        hermite_number(7, 1).unwrap(),
        cq_spectral(&[1, 1, 2], &[1.0, 2.0, 4.0], None).unwrap(),
        cq_spectral(&[1, 2, 2], &[1.0, 2.0, 3.0], None).unwrap(),
    ]
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for inst in builder_corpus_up_to_64() {
        let (alg, p) = (&inst.algebra, &inst.seminorm);
        ensure(alg.dim() <= 64, || format!("{} has dimension {}", inst.name, alg.dim()))?;
        let qr = induced(&inst)?;
        let np: BTreeSet<usize> = compute_np(alg, p).basis.into_iter().collect();
        for g in p.basis() {
            let x = alg.basis_element(*g);
            let px = p.evaluate(alg, &x).map_err(|e| e.to_string())?;
            let nx = op_norm(&(qr.operator(*g) * &qr.domain_basis));
            ensure(nx <= px + 1e-9, || format!("{}: ‖π({})‖ = {nx} > p = {px}", inst.name, alg.basis_label(*g)))?;
            if np.contains(g) {
                worst = worst.max((nx - px).abs());
                ensure((nx - px).abs() <= 1e-9, || {
                    format!("{}: ‖π({})‖ = {nx} != p = {px}", inst.name, alg.basis_label(*g))
                })?;
            }
            count += 1;
        }
    }
    within(start, Duration::from_secs(30), "criterion 2")?;
    Ok(format!("{count} domain elements, max N_p gap {worst:.2e}, {:.2?}", start.elapsed()))
}

/// Element-level N_p: vectors on `D(p) ∩ R(A)` whose left products stay in
/// D(p), from brute-force products of basis elements.
fn brute_np(alg: &PartialStarAlgebra, p: &WitnessedSeminorm) -> CMat {
    let n = alg.dim();
    let right: Vec<usize> = (0..n)
        .filter(|&g| {
            let y = alg.basis_element(g);
            (0..n).all(|h| alg.multiply(&alg.basis_element(h), &y).unwrap().is_some())
        })
        .collect();
    let dom: BTreeSet<usize> = p.basis().iter().copied().collect();
    let cand: Vec<usize> = right.into_iter().filter(|g| dom.contains(g)).collect();
    let outside: Vec<usize> = (0..n).filter(|g| !dom.contains(g)).collect();
    if cand.is_empty() {
        return zeros(n, 0);
    }
    let mut m = zeros(outside.len().max(1) * n, cand.len());
    for a in 0..n {
        for (j, &x) in cand.iter().enumerate() {
            let ax = alg.multiply(&alg.basis_element(a), &alg.basis_element(x)).unwrap().unwrap();
            let dense = alg.to_dense(&ax);
            for (i, &o) in outside.iter().enumerate() {
                m[(a * outside.len() + i, j)] = dense[o];
            }
        }
    }
    let ns = null_space(&m, RANK_TOL);
    let mut out = zeros(n, ns.ncols());
    for (j, &x) in cand.iter().enumerate() {
        for c in 0..ns.ncols() {
            out[(x, c)] = ns[(j, c)];
        }
    }
    out
}

fn criterion_3() -> Outcome {
    let mut all = builder_corpus_up_to_64();
    all.extend(build_fixtures());
    let mut compared = 0;
    for inst in all.iter().filter(|i| i.algebra.dim() <= 24) {
        let (alg, p) = (&inst.algebra, &inst.seminorm);
        let oracle = brute_np(alg, p);
        let np = compute_np(alg, p);
        let mut ours = zeros(alg.dim(), np.dim());
        for (c, g) in np.basis.iter().enumerate() {
            ours[(*g, c)] = ONE;
        }
        ensure(oracle.ncols() == ours.ncols(), || {
            format!("{}: oracle dim {} vs {}", inst.name, oracle.ncols(), ours.ncols())
        })?;
        if ours.ncols() > 0 {
            let (same, res) = same_span(&oracle, &ours, 1e-12);
            ensure(same, || format!("{}: subspaces differ (residual {res:.2e})", inst.name))?;
        }
        compared += 1;
    }
    Ok(format!("{compared} instances agree"))
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    for inst in [
        weighted_diagonal(3, 1, 2.0).unwrap(),
        weighted_diagonal(8, 1, 2.0).unwrap(),
        compact_operator(4, 1).unwrap(),
        hermite_number(5, 1).unwrap(),
    ] {
        let qr = induced(&inst)?;
        let cls = classify_well_behaved(&inst.algebra, &inst.seminorm, &qr);
        for c in [
            &cls.well_behaved,
            &cls.strongly_nondegenerate,
            &cls.norm_equality,
            &cls.commutant_equality,
        ] {
            ensure(c.passed && c.max_residual <= 1e-9, || format!("{}: {c}", inst.name))?;
            worst = worst.max(c.max_residual);
        }
    }
    let inst = fixture("fixture:enlarged_pi").map_err(|e| e.to_string())?;
    let (alg, p) = (&inst.algebra, &inst.seminorm);
    let q = build_quotient(alg, p).map_err(|e| e.to_string())?;
    let pi = ConcreteRep::from_domain_images(alg, &q, inst.pi.as_ref().unwrap()).map_err(|e| e.to_string())?;
    let qr = build_induced(alg, p, &q, &pi).map_err(|e| e.to_string())?;
    let before = classify_well_behaved(alg, p, &qr);
    ensure(!before.well_behaved.passed, || "enlarged Π is unexpectedly well-behaved".into())?;
    let r = restrict_to_well_behaved(alg, p, &q, &qr).map_err(|e| e.to_string())?;
    ensure(r.agreement.passed && r.agreement.max_residual <= 1e-10, || format!("restriction: {}", r.agreement))?;
    let after = classify_well_behaved(alg, p, &r.qr);
    ensure(after.all_pass(), || format!("restriction not well-behaved: {}", after.well_behaved))?;
    Ok(format!(
        "max sub-check residual {worst:.2e}, restriction agreement {:.2e}",
        r.agreement.max_residual
    ))
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    let cases = [
        ("WDA k=3", weighted_diagonal(3, 1, 2.0).unwrap()),
        ("WDA k=8", weighted_diagonal(8, 1, 2.0).unwrap()),
        ("function grid", function_grid(6, 1, 0.5, 1).unwrap()),
        ("compact operator", compact_operator(4, 1).unwrap()),
        ("cq spectral", cq_spectral(&[1, 1, 2], &[1.0, 2.0, 4.0], None).unwrap()),
    ];
    for (label, inst) in cases {
        let qr = induced(&inst)?;
        let c = check_star_rep(&inst.algebra, &qr);
        ensure(c.passed && c.max_residual <= 1e-9, || format!("{label}: {c}"))?;
        worst = worst.max(c.max_residual);
    }
    Ok(format!("max weak-product residual {worst:.2e}"))
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    let towers = [
        weighted_diagonal(3, 5, 2.0).unwrap(),
        weighted_diagonal(2, 5, 3.0).unwrap(),
        hermite_number(3, 5).unwrap(),
        hermite_number(5, 6).unwrap(),
    ];
    for inst in &towers {
        let tower = build_tower(inst.tower.as_ref().unwrap()).map_err(|e| e.to_string())?;
        let rev = run_reverse(&tower).map_err(|e| format!("{}: {e}", inst.name))?;
        let declared = rev.bounded.declared_match.as_ref().ok_or("tower has no declared flags")?;
        ensure(declared.passed, || format!("{}: {declared}", inst.name))?;
        let natural = rev.natural.as_ref().ok_or_else(|| format!("{}: no natural representation", inst.name))?;
        ensure(natural.agreement.passed && natural.agreement.max_residual <= 1e-9, || {
            format!("{}: {}", inst.name, natural.agreement)
        })?;
        worst = worst.max(natural.agreement.max_residual);
    }
    let mut extensions = 0;
    for inst in [
        weighted_diagonal(3, 1, 2.0).unwrap(),
        compact_operator(4, 1).unwrap(),
        hermite_number(5, 1).unwrap(),
    ] {
        let qr = induced(&inst)?;
        let ext = verify_natural_extension(&inst.algebra, &inst.seminorm, &qr).map_err(|e| e.to_string())?;
        ensure(ext.all_pass(), || format!("{}: {} / {}", inst.name, ext.containment, ext.agreement))?;
        extensions += 1;
    }
    Ok(format!(
        "{} towers match declared flags, agreement {worst:.2e}, {extensions} extensions contain π_p",
        towers.len()
    ))
}

fn criterion_7() -> Outcome {
    let mut names = Vec::new();
    for inst in build_fixtures() {
        let report = cmd_audit(&inst, &AuditOptions::default());
        let m = report.expected.as_ref().ok_or_else(|| format!("{} has no expected verdict", inst.name))?;
        ensure(m.matched, || format!("{}: {:?}", inst.name, m.mismatches))?;
        if report.flag("cstar_axioms") == Some(false) {
            let w = report.check("cstar_axioms").and_then(|c| c.witness.clone());
            ensure(w.as_deref().is_some_and(|w| w.starts_with("x = ")), || {
                format!("{}: C*-axiom failure without a witness element", inst.name)
            })?;
        }
        names.push(inst.name.trim_start_matches("fixture:").to_string());
    }
    Ok(format!("{} fixtures as expected", names.len()))
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_pcstar");
    let mut files = 0;
    for (name, args) in [
        ("weighted_diagonal", vec!["--k", "3", "--depth", "5"]),
        ("compact_operator", vec!["--d", "2"]),
        ("cq_spectral", vec!["--blocks", "1,1,2", "--lambdas", "1,2,4"]),
        ("fixture:scaled_norm", vec![]),
    ] {
        let mut outs = Vec::new();
        for run in 0..2 {
            let path = dir.path().join(format!("{}-{run}.json", name.replace(':', "_")));
            let st = Command::new(bin)
                .arg("build")
                .arg(name)
                .args(&args)
                .arg("--out")
                .arg(&path)
                .status()
                .map_err(|e| e.to_string())?;
            ensure(st.success(), || format!("build {name} failed"))?;
            outs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        ensure(outs[0] == outs[1], || format!("build {name} is not bit-identical"))?;
        let path = dir.path().join(format!("{}-0.json", name.replace(':', "_")));
        let audits: Vec<Vec<u8>> = (0..2)
            .map(|_| {
                Command::new(bin)
                    .args(["audit", "--no-timestamp"])
                    .arg(&path)
                    .output()
                    .map(|o| o.stdout)
                    .map_err(|e| e.to_string())
            })
            .collect::<Result<_, _>>()?;
        ensure(!audits[0].is_empty() && audits[0] == audits[1], || format!("audit of {name} differs between runs"))?;
        files += 1;
    }
    // library builders too
    let a = weighted_diagonal(8, 3, 2.0).unwrap();
    let b = weighted_diagonal(8, 3, 2.0).unwrap();
    let (pa, pb) = (dir.path().join("a.json"), dir.path().join("b.json"));
    write_instance(&a, &pa).map_err(|e| e.to_string())?;
    write_instance(&b, &pb).map_err(|e| e.to_string())?;
    ensure(std::fs::read(&pa).unwrap() == std::fs::read(&pb).unwrap(), || "library builder differs".into())?;
    Ok(format!("{files} instances: identical builds and audits"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("C*-machinery soundness", criterion_1),
        ("induced norms bounded by p, equal on N_p", criterion_2),
        ("N_p matches element-level oracle", criterion_3),
        ("well-behaved classification and restriction", criterion_4),
        ("representability", criterion_5),
        ("reverse round trip", criterion_6),
        ("negative controls", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
