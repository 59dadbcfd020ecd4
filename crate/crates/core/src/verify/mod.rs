//! Independent oracles and property checks at verification scale.
//!
//! Every check returns a [`CheckReport`]; a failed report always names a
//! witness, and fuzz campaigns put the case seed in it so one case can be
//! replayed on its own.

mod fuzz;
mod oracle;
mod requirement;
mod structure;

pub use fuzz::{
    campaign_admissibility, campaign_blackwell, campaign_color_dominance, campaign_complete_graph,
    campaign_dtree_metric, campaign_flow_lemmas, campaign_product_theorem, campaign_requirement2,
    campaign_solver_oracle, fuzz_case, run_corpus, CorpusSize, FuzzCase,
};
pub use oracle::{dense_limit_oracle, dense_reference};
pub use requirement::{
    blackwell_worst_case, check_blackwell, check_flow_lemmas, check_requirement2, flow_field,
    FlowField, Requirement2Observer,
};
pub use structure::{
    check_admissibility, check_color_dominance, check_graph_admissibility, check_product_theorem,
    factor_ledgers,
};

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub passed: bool,
    pub cases: usize,
    pub worst_residual: f64,
    pub witness: Option<String>,
}

impl CheckReport {
    pub fn pass(check: &str, residual: f64) -> Self {
        CheckReport {
            check: check.into(),
            passed: true,
            cases: 1,
            worst_residual: residual,
            witness: None,
        }
    }

    pub fn fail(check: &str, residual: f64, witness: String) -> Self {
        CheckReport {
            check: check.into(),
            passed: false,
            cases: 1,
            worst_residual: residual,
            witness: Some(witness),
        }
    }

    /// Pass iff `residual <= tol`, with the witness built lazily.
    pub fn judge(check: &str, residual: f64, tol: f64, witness: impl FnOnce() -> String) -> Self {
        if residual <= tol {
            Self::pass(check, residual)
        } else {
            Self::fail(check, residual, witness())
        }
    }

    /// Empty campaign accumulator.
    pub fn campaign(check: &str) -> Self {
        CheckReport {
            check: check.into(),
            passed: true,
            cases: 0,
            worst_residual: 0.0,
            witness: None,
        }
    }

    /// Folds one case into a campaign. The first failure's witness is kept.
    pub fn absorb(&mut self, case: CheckReport) {
        self.cases += case.cases;
        if case.worst_residual > self.worst_residual || case.worst_residual.is_nan() {
            self.worst_residual = case.worst_residual;
        }
        if !case.passed && self.passed {
            self.passed = false;
            self.witness = case.witness.map(|w| format!("{}: {w}", case.check));
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {} ({} cases, worst residual {:.3e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.check,
            self.cases,
            self.worst_residual
        )?;
        if let Some(w) = &self.witness {
            write!(f, ": {w}")?;
        }
        Ok(())
    }
}
