use serde_json::{json, Value};
use sclkit::pool::{clue_log_likelihoods, pool_log_likelihoods};
use sclkit::scl::{pdf_projection_matrix, scl_posterior_from_likelihoods};
use sclkit::weights::DEFAULT_TIE_TOL;
use sclkit::{kl_divergence, normalize_log, FiniteDistribution, GenerativeOracle, WeightMatrix};

use crate::error::{CliError, Result};
use crate::format::{cell, number};
use crate::spec::Problem;

pub const METHODS: [&str; 5] = ["naive-bayes", "cl-uniform", "scl-optimal", "pdf-projection", "true"];

#[derive(Clone, Debug, PartialEq)]
pub struct MethodScore {
    pub method: &'static str,
    pub mean_kl: f64,
    pub accuracy: f64,
    pub log_score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub n: usize,
    pub seed: u64,
    pub scores: Vec<MethodScore>,
}

/// First hypothesis whose probability is within a relative `1e-9` of the
/// maximum.
pub fn map_estimate(p: &FiniteDistribution) -> usize {
    let probs = p.probs();
    let best = probs.iter().cloned().fold(0.0, f64::max);
    probs
        .iter()
        .position(|x| *x >= best * (1.0 - 1e-9))
        .expect("a distribution has a maximum")
}

fn oracle(problem: &Problem) -> Result<&GenerativeOracle> {
    let o = problem
        .oracle
        .as_ref()
        .ok_or_else(|| CliError::Spec("compare needs an \"oracle\" model source".into()))?;
    if o.nuisance().is_some() {
        return Err(CliError::Spec(
            "compare supports oracles without a nuisance grid only".into(),
        ));
    }
    Ok(o)
}

pub fn compare(problem: &Problem, n: usize, seed: u64) -> Result<Comparison> {
    let o = oracle(problem)?;
    if n == 0 {
        return Err(CliError::Spec("--n must be at least 1".into()));
    }
    let k = problem.space.len();
    let (u, sel) = problem.optimal_selection(DEFAULT_TIE_TOL)?;
    let iota: Vec<usize> = (0..u.m())
        .map(|c| {
            let col = u.column(c);
            let best = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            col.iter().position(|x| *x == best).expect("non-empty column")
        })
        .collect();
    let projection = pdf_projection_matrix(&iota, u.n())?;
    let nf = problem.models.len();
    let uniform = vec![1.0 / nf as f64; nf];
    let weights: [&WeightMatrix; 2] = [&sel.weights, &projection];

    let mut sums = vec![(0.0, 0usize, 0.0); METHODS.len()];
    for s in o.sample_dataset(n, seed)? {
        let truth = o.true_posterior(s.y)?;
        let table = clue_log_likelihoods(&problem.models, k, &s.obs, None)?;
        let nb: Vec<f64> = (0..k)
            .map(|t| problem.prior.log_prob(t) + table.iter().map(|r| r[t]).sum::<f64>())
            .collect();
        let posteriors = [
            normalize_log(problem.space.labels().clone(), &nb)?,
            pool_log_likelihoods(&problem.prior, &table, &uniform)?,
            scl_posterior_from_likelihoods(&problem.prior, &table, weights[0])?,
            scl_posterior_from_likelihoods(&problem.prior, &table, weights[1])?,
            truth.clone(),
        ];
        for (acc, p) in sums.iter_mut().zip(&posteriors) {
            acc.0 += kl_divergence(&truth, p)?;
            acc.1 += usize::from(map_estimate(p) == s.theta);
            acc.2 += p.log_prob(s.theta);
        }
    }
    let scores = METHODS
        .iter()
        .zip(sums)
        .map(|(method, (kl, hits, ls))| MethodScore {
            method,
            mean_kl: kl / n as f64,
            accuracy: hits as f64 / n as f64,
            log_score: ls / n as f64,
        })
        .collect();
    Ok(Comparison { n, seed, scores })
}

impl Comparison {
    pub fn to_json(&self) -> Value {
        let methods: Vec<Value> = self
            .scores
            .iter()
            .map(|s| {
                json!({
                    "method": s.method,
                    "mean_kl": number(s.mean_kl),
                    "accuracy": number(s.accuracy),
                    "log_score": number(s.log_score),
                })
            })
            .collect();
        json!({ "n": self.n, "seed": self.seed, "methods": methods })
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("method\tmean_kl\taccuracy\tlog_score\n");
        for s in &self.scores {
            out += &format!(
                "{}\t{}\t{}\t{}\n",
                s.method,
                cell(s.mean_kl),
                cell(s.accuracy),
                cell(s.log_score)
            );
        }
        out
    }

    pub fn score(&self, method: &str) -> Option<&MethodScore> {
        self.scores.iter().find(|s| s.method == method)
    }
}
