use serde::Serialize;

use super::config::ExperimentConfig;

/// How a check compares observed with expected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `|obs - exp| <= tol * |exp|`
    Relative,
    /// `|obs - exp| <= tol`
    Absolute,
    /// `obs <= exp + tol`
    AtMost,
    /// `obs >= exp - tol`
    AtLeast,
    /// `obs == exp`
    Exact,
}

/// Where the expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Oracle,
    Invariant,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub observed: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub provenance: Provenance,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        expected: f64,
        observed: f64,
        tolerance: f64,
        comparison: Comparison,
        provenance: Provenance,
    ) -> Self {
        let passed = observed.is_finite()
            && match comparison {
                Comparison::Relative => (observed - expected).abs() <= tolerance * expected.abs(),
                Comparison::Absolute => (observed - expected).abs() <= tolerance,
                Comparison::AtMost => observed <= expected + tolerance,
                Comparison::AtLeast => observed >= expected - tolerance,
                Comparison::Exact => observed == expected,
            };
        Self {
            name: name.into(),
            expected,
            observed,
            tolerance,
            comparison,
            provenance,
            passed,
            note: String::new(),
        }
    }

    pub fn count(name: impl Into<String>, expected: usize, observed: usize, provenance: Provenance) -> Self {
        Self::new(name, expected as f64, observed as f64, 0.0, Comparison::Exact, provenance)
    }

    pub fn flag(name: impl Into<String>, ok: bool, provenance: Provenance) -> Self {
        Self::new(name, 1.0, if ok { 1.0 } else { 0.0 }, 0.0, Comparison::Exact, provenance)
    }

    /// A check that could not run; always a failure.
    pub fn error(name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        let mut c = Self::new(name, 0.0, f64::NAN, 0.0, Comparison::Exact, Provenance::Invariant);
        c.note = format!("error: {err}");
        c
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
    pub threads: usize,
}

impl Environment {
    pub fn capture() -> Self {
        Self {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            threads: rayon::current_num_threads(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub rng_seed: u64,
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub environment: Environment,
}

impl VerificationReport {
    pub fn new(scenario: &str, config: &ExperimentConfig, checks: Vec<Check>) -> Self {
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
        Self {
            scenario: scenario.into(),
            rng_seed: config.rng_seed,
            config: config.clone(),
            checks,
            passed,
            environment: Environment::capture(),
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!(
                "[{}] {}/{}: observed {:.6e}, expected {:.6e} (tol {:.1e}){}\n",
                if c.passed { "PASS" } else { "FAIL" },
                self.scenario,
                c.name,
                c.observed,
                c.expected,
                c.tolerance,
                if c.note.is_empty() { String::new() } else { format!("; {}", c.note) }
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        assert!(Check::new("a", 1.0, 1.04, 0.05, Comparison::Relative, Provenance::ClosedForm).passed);
        assert!(!Check::new("a", 1.0, 1.06, 0.05, Comparison::Relative, Provenance::ClosedForm).passed);
        assert!(Check::new("b", 1.0, 0.5, 0.0, Comparison::AtMost, Provenance::Invariant).passed);
        assert!(!Check::new("b", 1.0, f64::NAN, 1.0, Comparison::AtMost, Provenance::Invariant).passed);
        assert!(Check::count("c", 2, 2, Provenance::Invariant).passed);
    }

    #[test]
    fn any_failure_fails_the_report() {
        let cfg = ExperimentConfig::default();
        let ok = Check::flag("ok", true, Provenance::Invariant);
        let bad = Check::flag("bad", false, Provenance::Invariant);
        assert!(VerificationReport::new("x", &cfg, vec![ok.clone()]).passed);
        assert!(!VerificationReport::new("x", &cfg, vec![ok, bad]).passed);
        assert!(!VerificationReport::new("x", &cfg, vec![]).passed);
    }
}
