use serde_json::{json, Map, Value};
use sclkit::nuisance::{nuisance_posterior, super_composite_evidence_log};
use sclkit::scl::{scl_log, scl_posterior};
use sclkit::{kl_divergence, CluesObservation, FiniteDistribution};

use crate::error::Result;
use crate::format::{cell, number};
use crate::spec::Problem;

#[derive(Clone, Debug, PartialEq)]
pub struct InferReport {
    pub method: &'static str,
    pub labels: Vec<String>,
    pub posterior: Vec<f64>,
    pub log_scl: Vec<f64>,
    pub truth: Option<Vec<f64>>,
    pub kl_to_truth: Option<f64>,
}

pub fn method_name(identical_columns: bool, nuisance: bool) -> &'static str {
    match (identical_columns, nuisance) {
        (true, false) => "composite-likelihood",
        (false, false) => "super-composite-likelihood",
        (true, true) => "composite-evidence",
        (false, true) => "super-composite-evidence",
    }
}

pub fn infer(problem: &Problem, obs: &CluesObservation) -> Result<InferReport> {
    let w = problem.weight_matrix()?;
    let k = problem.space.len();
    let (posterior, log_scl) = match &problem.nuisance {
        Some(psi) => (
            nuisance_posterior(&problem.prior, &problem.models, obs, &w, psi)?,
            (0..k)
                .map(|t| super_composite_evidence_log(&problem.models, t, obs, &w, psi))
                .collect::<sclkit::Result<Vec<_>>>()?,
        ),
        None => (
            scl_posterior(&problem.prior, &problem.models, obs, &w)?,
            (0..k)
                .map(|t| scl_log(&problem.models, t, obs, &w))
                .collect::<sclkit::Result<Vec<_>>>()?,
        ),
    };
    let truth: Option<FiniteDistribution> = problem
        .oracle
        .as_ref()
        .map(|o| o.posterior_given_clues(obs))
        .transpose()?;
    let kl_to_truth = truth
        .as_ref()
        .map(|t| kl_divergence(t, &posterior))
        .transpose()?;
    let order = problem.display_order();
    let pick = |v: &[f64]| order.iter().map(|i| v[*i]).collect::<Vec<_>>();
    Ok(InferReport {
        method: method_name(w.has_identical_columns(), problem.nuisance.is_some()),
        labels: problem.hypotheses.clone(),
        posterior: pick(&posterior.probs()),
        log_scl: pick(&log_scl),
        truth: truth.map(|t| pick(&t.probs())),
        kl_to_truth,
    })
}

fn by_label(labels: &[String], values: &[f64]) -> Value {
    Value::Object(
        labels
            .iter()
            .zip(values)
            .map(|(l, v)| (l.clone(), number(*v)))
            .collect::<Map<_, _>>(),
    )
}

impl InferReport {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "method": self.method,
            "posterior": by_label(&self.labels, &self.posterior),
            "log_scl": by_label(&self.labels, &self.log_scl),
        });
        if let Some(t) = &self.truth {
            v["true_posterior"] = by_label(&self.labels, t);
        }
        if let Some(kl) = self.kl_to_truth {
            v["kl_to_truth"] = number(kl);
        }
        v
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("method\t{}\n", self.method);
        if let Some(kl) = self.kl_to_truth {
            out += &format!("kl_to_truth\t{}\n", cell(kl));
        }
        out += "hypothesis\tposterior\tlog_scl";
        if self.truth.is_some() {
            out += "\ttrue_posterior";
        }
        out.push('\n');
        for (i, label) in self.labels.iter().enumerate() {
            out += &format!("{label}\t{}\t{}", cell(self.posterior[i]), cell(self.log_scl[i]));
            if let Some(t) = &self.truth {
                out += &format!("\t{}", cell(t[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Reads an observation file for `problem`.
pub fn read_observation(problem: &Problem, path: &std::path::Path) -> Result<CluesObservation> {
    use crate::error::CliError;
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let value: Value = serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    problem.observation(&value)
}
