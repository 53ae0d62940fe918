//! Pass/fail reports shared by the algebra classifier and the axiom suites.

use std::fmt;

use serde::Serialize;

/// One variable binding of a witness tuple, rendered for display.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Binding {
    pub var: String,
    pub value: String,
}

impl Binding {
    pub fn new(var: impl Into<String>, value: impl Into<String>) -> Self {
        Binding {
            var: var.into(),
            value: value.into(),
        }
    }
}

/// Outcome of checking one axiom by exhaustive substitution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomOutcome {
    pub label: String,
    pub statement: String,
    pub passed: bool,
    /// Number of substitution instances examined.
    pub instances: u64,
    /// First failing substitution in canonical order.
    pub witness: Option<Vec<Binding>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub axioms: Vec<AxiomOutcome>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, axioms: Vec<AxiomOutcome>) -> Self {
        let passed = axioms.iter().all(|a| a.passed);
        SuiteReport {
            suite: suite.into(),
            passed,
            axioms,
        }
    }

    pub fn first_failure(&self) -> Option<&AxiomOutcome> {
        self.axioms.iter().find(|a| !a.passed)
    }

    pub fn outcome(&self, label: &str) -> Option<&AxiomOutcome> {
        self.axioms.iter().find(|a| a.label == label)
    }

    pub fn total_instances(&self) -> u64 {
        self.axioms.iter().map(|a| a.instances).sum()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "suite {}: {}",
            self.suite,
            if self.passed { "PASS" } else { "FAIL" }
        )?;
        for axiom in &self.axioms {
            write!(
                f,
                "  [{}] {:<6} {} ({} instances)",
                if axiom.passed { "pass" } else { "FAIL" },
                axiom.label,
                axiom.statement,
                axiom.instances
            )?;
            if let Some(witness) = &axiom.witness {
                let parts: Vec<String> = witness
                    .iter()
                    .map(|b| format!("{}={}", b.var, b.value))
                    .collect();
                write!(f, "  witness: {}", parts.join(", "))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
