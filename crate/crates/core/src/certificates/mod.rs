//! Numerical verifiers for the mapping inequalities and potential bounds.
//!
//! Each check evaluates one or more named inequalities ("links"), records
//! the worst signed margin `lhs - rhs` per link, and fails if any link
//! misses under the [`Tolerance`] convention. Offending inputs are kept as
//! witnesses.

mod function_class;
mod mapping;
mod potentials;

pub use function_class::check_function_class;
pub use mapping::{
    check_mapping_bound, check_norm_monotonicity, check_ovg, check_prox, check_refined_descent, rho,
};
pub use potentials::{
    apg_potential, c_tilde, check_apg_potential, check_pgd_potential, gd_potential, pgd_potential,
    rate_bounds,
};

use serde::{Deserialize, Serialize};

use crate::hexfloat;
use crate::problem::Vector;
use crate::tolerance::Tolerance;

const MAX_WITNESSES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub link: String,
    #[serde(with = "hexfloat")]
    pub lhs: f64,
    #[serde(with = "hexfloat")]
    pub rhs: f64,
    /// Labelled inputs that produced the violation.
    pub inputs: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSummary {
    pub name: String,
    pub evaluated: usize,
    #[serde(with = "hexfloat")]
    pub worst_margin: f64,
    pub passed: bool,
    /// Informational links are reported but never fail the check.
    pub informational: bool,
    /// Set when the link could not be evaluated at all.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    /// Most negative `lhs - rhs` over the enforced links.
    #[serde(with = "hexfloat")]
    pub worst_margin: f64,
    pub passed: bool,
    pub witnesses: Vec<Witness>,
    pub links: Vec<LinkSummary>,
}

impl CheckReport {
    pub fn link(&self, name: &str) -> Option<&LinkSummary> {
        self.links.iter().find(|l| l.name == name)
    }

    /// Combines reports over disjoint samples, keeping the worst margins.
    pub fn merge(mut self, other: CheckReport) -> CheckReport {
        self.samples += other.samples;
        self.worst_margin = self.worst_margin.min(other.worst_margin);
        self.passed &= other.passed;
        for w in other.witnesses {
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(w);
            }
        }
        for l in other.links {
            match self.links.iter_mut().find(|m| m.name == l.name) {
                Some(m) => {
                    m.evaluated += l.evaluated;
                    m.worst_margin = m.worst_margin.min(l.worst_margin);
                    m.passed &= l.passed;
                    if m.evaluated > 0 {
                        m.skipped = None;
                    }
                }
                None => self.links.push(l),
            }
        }
        self
    }

    pub fn merge_all(reports: impl IntoIterator<Item = CheckReport>) -> Option<CheckReport> {
        reports.into_iter().reduce(CheckReport::merge)
    }
}

pub(crate) fn labelled(name: &str, v: &Vector) -> (String, Vec<f64>) {
    (name.to_string(), v.iter().copied().collect())
}

pub(crate) fn scalar(name: &str, x: f64) -> (String, Vec<f64>) {
    (name.to_string(), vec![x])
}

/// Accumulates link outcomes for one report.
pub(crate) struct Tally {
    name: String,
    samples: usize,
    tol: Tolerance,
    links: Vec<LinkSummary>,
    witnesses: Vec<Witness>,
}

impl Tally {
    pub fn new(name: &str) -> Self {
        Tally {
            name: name.to_string(),
            samples: 0,
            tol: Tolerance::STANDARD,
            links: Vec::new(),
            witnesses: Vec::new(),
        }
    }

    pub fn sample(&mut self) {
        self.samples += 1;
    }

    fn slot(&mut self, link: &str, informational: bool) -> &mut LinkSummary {
        let idx = match self.links.iter().position(|l| l.name == link) {
            Some(i) => i,
            None => {
                self.links.push(LinkSummary {
                    name: link.to_string(),
                    evaluated: 0,
                    worst_margin: f64::INFINITY,
                    passed: true,
                    informational,
                    skipped: None,
                });
                self.links.len() - 1
            }
        };
        &mut self.links[idx]
    }

    fn record(
        &mut self,
        link: &str,
        lhs: f64,
        rhs: f64,
        tol: Tolerance,
        informational: bool,
        inputs: impl FnOnce() -> Vec<(String, Vec<f64>)>,
    ) -> bool {
        let margin = Tolerance::margin(lhs, rhs);
        let ok = tol.holds(lhs, rhs);
        let slot = self.slot(link, informational);
        slot.evaluated += 1;
        slot.skipped = None;
        // NaN margins must register as the worst possible outcome.
        slot.worst_margin = if margin.is_nan() {
            f64::NEG_INFINITY
        } else {
            slot.worst_margin.min(margin)
        };
        slot.passed &= ok;
        if !ok && !informational && self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(Witness {
                link: link.to_string(),
                lhs,
                rhs,
                inputs: inputs(),
            });
        }
        ok
    }

    /// Records `lhs >= rhs`.
    pub fn ge(
        &mut self,
        link: &str,
        lhs: f64,
        rhs: f64,
        inputs: impl FnOnce() -> Vec<(String, Vec<f64>)>,
    ) -> bool {
        let tol = self.tol;
        self.record(link, lhs, rhs, tol, false, inputs)
    }

    /// Records `lhs <= rhs`.
    pub fn le(
        &mut self,
        link: &str,
        lhs: f64,
        rhs: f64,
        inputs: impl FnOnce() -> Vec<(String, Vec<f64>)>,
    ) -> bool {
        self.ge(link, rhs, lhs, inputs)
    }

    /// Records `lhs <= rhs` under a link-specific tolerance.
    pub fn le_with(
        &mut self,
        link: &str,
        lhs: f64,
        rhs: f64,
        tol: Tolerance,
        inputs: impl FnOnce() -> Vec<(String, Vec<f64>)>,
    ) -> bool {
        self.record(link, rhs, lhs, tol, false, inputs)
    }

    /// Records `lhs <= rhs` without letting it affect the verdict.
    pub fn info_le(&mut self, link: &str, lhs: f64, rhs: f64) {
        let tol = self.tol;
        self.record(link, rhs, lhs, tol, true, Vec::new);
    }

    /// A hard failure that is not an inequality (e.g. a guard).
    pub fn fail(&mut self, link: &str, inputs: Vec<(String, Vec<f64>)>) {
        let slot = self.slot(link, false);
        slot.evaluated += 1;
        slot.passed = false;
        slot.worst_margin = f64::NEG_INFINITY;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(Witness {
                link: link.to_string(),
                lhs: f64::NAN,
                rhs: f64::NAN,
                inputs,
            });
        }
    }

    pub fn skip(&mut self, link: &str, reason: &str) {
        let slot = self.slot(link, false);
        if slot.evaluated == 0 {
            slot.skipped = Some(reason.to_string());
        }
    }

    pub fn finish(self) -> CheckReport {
        let enforced = self.links.iter().filter(|l| !l.informational);
        let worst_margin = enforced
            .clone()
            .map(|l| l.worst_margin)
            .fold(f64::INFINITY, f64::min);
        let passed = self
            .links
            .iter()
            .filter(|l| !l.informational)
            .all(|l| l.passed);
        CheckReport {
            name: self.name,
            samples: self.samples,
            worst_margin,
            passed,
            witnesses: self.witnesses,
            links: self.links,
        }
    }
}
