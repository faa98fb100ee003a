//! Outcome of a single named audit.

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub max_residual: f64,
    /// First offending case, if any.
    pub witness: Option<String>,
    pub cases: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip)]
    tol: f64,
    #[serde(skip)]
    hard_fail: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, tol: f64) -> Self {
        Check {
            name: name.into(),
            passed: true,
            max_residual: 0.0,
            witness: None,
            cases: 0,
            notes: Vec::new(),
            tol,
            hard_fail: false,
        }
    }

    /// A check that passes with nothing to examine.
    pub fn vacuous(name: impl Into<String>) -> Self {
        let mut c = Check::new(name, 0.0);
        c.notes.push("vacuous".into());
        c
    }

    /// Record one case. The first case above tolerance becomes the witness.
    pub fn record(&mut self, residual: f64, label: impl FnOnce() -> String) {
        self.cases += 1;
        // NaN poisons the maximum
        let r = if residual.is_nan() { f64::INFINITY } else { residual };
        if r > self.max_residual {
            self.max_residual = r;
        }
        if r > self.tol && self.witness.is_none() {
            self.witness = Some(label());
        }
    }

    /// Structural failure independent of numeric residuals.
    pub fn fail(&mut self, why: impl Into<String>) {
        self.cases += 1;
        self.hard_fail = true;
        if self.witness.is_none() {
            self.witness = Some(why.into());
        }
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn finish(mut self) -> Self {
        self.passed = self.max_residual <= self.tol && !self.hard_fail;
        self
    }

    pub fn merge(mut self, other: Check) -> Self {
        self.cases += other.cases;
        if other.max_residual > self.max_residual {
            self.max_residual = other.max_residual;
        }
        self.passed &= other.passed;
        self.hard_fail |= !other.passed;
        if self.witness.is_none() {
            self.witness = other.witness;
        }
        self.notes.extend(other.notes);
        self
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} (max residual {:.3e}, {} cases)",
            self.name,
            if self.passed { "pass" } else { "FAIL" },
            self.max_residual,
            self.cases
        )?;
        if let Some(w) = &self.witness {
            write!(f, " at {w}")?;
        }
        Ok(())
    }
}
