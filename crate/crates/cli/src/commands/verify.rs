//! Randomized property suite over seeded random oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use sclkit::distribution::normalize_log;
use sclkit::nuisance::{composite_evidence_log, super_composite_evidence_log};
use sclkit::oracle::{check_data_reduction, check_variation_bound, extended_le};
use sclkit::pool::{agent_posteriors, clue_log_likelihoods, pool_log_likelihoods};
use sclkit::random::{random_oracle, random_simplex, random_weight_matrix, RandomConfig};
use sclkit::scl::{bipartite_log_joint, population_code_posterior, scl_posterior_from_likelihoods};
use sclkit::weights::{
    consistency_envelope, expected_log_scl, expected_utility, optimal_weights, utility_matrix,
    DEFAULT_TIE_TOL,
};
use sclkit::{Alphabet, FiniteDistribution, GenerativeOracle, WeightMatrix};

use crate::format::to_json_line;
use crate::spec::ProblemSpec;

pub const CHECKS: [&str; 10] = [
    "data_reduction",
    "variation_bound",
    "envelope",
    "scl_consistency",
    "utility_bound",
    "constant_columns",
    "population_code",
    "bipartite",
    "external_bayesianity",
    "odds_conservation",
];

// Fixed tolerances of the identity checks; inequalities use the slack option.
const EQUAL_TOL: f64 = 1e-12;
const POOL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub instances: usize,
    /// 0 lets the pool pick one worker per core.
    pub workers: usize,
    pub tolerance: f64,
}

#[derive(Clone, Debug)]
pub struct Failure {
    pub instance: usize,
    pub seed: u64,
    pub check: &'static str,
    pub detail: String,
    pub spec: ProblemSpec,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub seed: u64,
    pub instances: usize,
    pub counts: Vec<(usize, usize)>,
    pub first_failure: Option<Failure>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }

    fn replay(&self) -> Option<Value> {
        self.first_failure.as_ref().map(|f| {
            json!({
                "instance": f.instance,
                "instance_seed": f.seed,
                "check": f.check,
                "detail": f.detail,
                "spec": serde_json::to_value(&f.spec).expect("specs serialize"),
            })
        })
    }

    pub fn to_json(&self) -> Value {
        let checks: Map<String, Value> = CHECKS
            .iter()
            .zip(&self.counts)
            .map(|(c, (p, f))| (c.to_string(), json!({ "passed": p, "failed": f })))
            .collect();
        let mut v = json!({
            "seed": self.seed,
            "instances": self.instances,
            "status": if self.passed() { "ok" } else { "failed" },
            "checks": checks,
        });
        if let Some(r) = self.replay() {
            v["replay"] = r;
        }
        v
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("check\tpassed\tfailed\n");
        for (c, (p, f)) in CHECKS.iter().zip(&self.counts) {
            out += &format!("{c}\t{p}\t{f}\n");
        }
        out += &format!("instances\t{}\n", self.instances);
        out += &format!("status\t{}\n", if self.passed() { "ok" } else { "failed" });
        if let Some(r) = self.replay() {
            out += &format!("replay\t{}\n", serde_json::to_string(&r).expect("replay serializes"));
        }
        out
    }

    pub fn to_json_text(&self) -> String {
        to_json_line(&self.to_json())
    }
}

type Check = std::result::Result<(), String>;

struct Instance {
    plain: GenerativeOracle,
    nuisance: GenerativeOracle,
    seed: u64,
}

fn fail(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn core<T>(r: sclkit::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

impl Instance {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plain = random_oracle(&mut rng, &RandomConfig::default());
        let cfg = RandomConfig {
            nuisance_grid: Some(1..=4),
            ..RandomConfig::default()
        };
        let nuisance = random_oracle(&mut rng, &cfg);
        Instance {
            plain,
            nuisance,
            seed,
        }
    }

    fn rng(&self, check: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ ((check as u64 + 1) << 56))
    }

    fn table(&self, y: usize) -> std::result::Result<Vec<Vec<f64>>, String> {
        let o = &self.plain;
        core(clue_log_likelihoods(o.feature_models(), o.space().len(), &o.observe(y), None))
    }

    fn run(&self, check: usize, tol: f64) -> Check {
        let o = &self.plain;
        let k = o.space().len();
        let mut rng = self.rng(check);
        match CHECKS[check] {
            "data_reduction" => {
                let reference = core(o.likelihood(0, None))?;
                let ny = o.y_alphabet().len();
                for j in 1..k {
                    let p = core(o.likelihood(j, None))?;
                    for f in o.features() {
                        let c = core(check_data_reduction(p, reference, f.map(), f.alphabet().clone(), tol))?;
                        fail(c.holds, || format!("feature {} under {}: {c:?}", f.name(), o.space().label(j)))?;
                    }
                    let identity: Vec<usize> = (0..ny).collect();
                    let c = core(check_data_reduction(p, reference, &identity, o.y_alphabet().clone(), tol))?;
                    fail(c.holds && c.equality, || format!("identity map: {c:?}"))?;
                    let one = Alphabet::indexed("z", 1);
                    let c = core(check_data_reduction(p, reference, &vec![0; ny], one, tol))?;
                    fail(c.holds && c.reduced == 0.0, || format!("constant map: {c:?}"))?;
                }
                Ok(())
            }
            "variation_bound" => {
                let w = random_simplex(&mut rng, o.features().len());
                for star in 0..k {
                    for theta in 0..k {
                        let b = core(check_variation_bound(o, theta, star, &w, tol))?;
                        fail(b.holds, || format!("theta {theta}, theta* {star}: {b:?}"))?;
                        let at_star = core(o.expected_log_composite(star, star, &w))?;
                        let here = core(o.expected_log_composite(theta, star, &w))?;
                        fail(extended_le(here, at_star, tol), || {
                            format!("composite likelihood peaks at {theta}, not {star}")
                        })?;
                    }
                }
                Ok(())
            }
            "envelope" => {
                let w = random_weight_matrix(&mut rng, o.features().len(), o.space().m());
                for star in 0..k {
                    let top = core(consistency_envelope(o, star, star))?;
                    for theta in 0..k {
                        let env = core(consistency_envelope(o, theta, star))?;
                        let e = core(expected_log_scl(o, theta, star, &w))?;
                        fail(extended_le(e, env, tol) && extended_le(env, top, tol), || {
                            format!("theta {theta}, theta* {star}: E={e}, M={env}, M*={top}")
                        })?;
                    }
                }
                Ok(())
            }
            "scl_consistency" => {
                let u = core(utility_matrix(o.feature_models(), o.space()))?;
                let w = optimal_weights(&u, DEFAULT_TIE_TOL).weights;
                for star in 0..k {
                    let top = core(expected_log_scl(o, star, star, &w))?;
                    for theta in 0..k {
                        let e = core(expected_log_scl(o, theta, star, &w))?;
                        fail(extended_le(e, top, tol), || {
                            format!("theta {theta} beats theta* {star}: {e} > {top}")
                        })?;
                    }
                }
                Ok(())
            }
            "utility_bound" => {
                let u = core(utility_matrix(o.feature_models(), o.space()))?;
                let bound = core(o.u_star())?;
                let best = core(expected_utility(&u, &optimal_weights(&u, DEFAULT_TIE_TOL).weights, o.prior()))?;
                fail(extended_le(best, bound, tol), || format!("optimal utility {best} above {bound}"))?;
                for _ in 0..20 {
                    let w = random_weight_matrix(&mut rng, u.n(), u.m());
                    let v = core(expected_utility(&u, &w, o.prior()))?;
                    fail(extended_le(v, bound, tol) && extended_le(v, best, tol), || {
                        format!("random weights reach {v}; optimal {best}, bound {bound}")
                    })?;
                }
                Ok(())
            }
            "constant_columns" => {
                let t = self.table(rng.gen_range(0..o.y_alphabet().len()))?;
                let w = random_simplex(&mut rng, t.len());
                let pooled = core(pool_log_likelihoods(o.prior(), &t, &w))?;
                let scl = core(scl_posterior_from_likelihoods(
                    o.prior(),
                    &t,
                    &core(WeightMatrix::constant(&w, o.space().m()))?,
                ))?;
                let d = pooled.max_abs_diff(&scl);
                fail(d < EQUAL_TOL, || format!("posteriors differ by {d}"))
            }
            "population_code" => {
                for y in 0..o.y_alphabet().len() {
                    let direct = core(o.true_posterior(y))?;
                    let coded = core(population_code_posterior(o, y, o.prior()))?;
                    let d = direct.max_abs_diff(&coded);
                    fail(d < EQUAL_TOL, || format!("y {y}: posteriors differ by {d}"))?;
                }
                Ok(())
            }
            "bipartite" => {
                let t = self.table(rng.gen_range(0..o.y_alphabet().len()))?;
                let m = o.space().m();
                let w = random_weight_matrix(&mut rng, t.len(), m);
                let log_joint = core(bipartite_log_joint(&t, &w))?;
                let joint = core(normalize_log(Alphabet::indexed("t", 1 << m), &log_joint))?.probs();
                let on: Vec<f64> = (0..m)
                    .map(|j| joint.iter().enumerate().filter(|(b, _)| (b >> j) & 1 == 1).map(|(_, p)| p).sum())
                    .collect();
                for (b, p) in joint.iter().enumerate() {
                    let product: f64 = (0..m).map(|j| if (b >> j) & 1 == 1 { on[j] } else { 1.0 - on[j] }).product();
                    fail((p - product).abs() < EQUAL_TOL, || {
                        format!("configuration {b}: joint {p}, product of marginals {product}")
                    })?;
                }
                Ok(())
            }
            "external_bayesianity" => {
                let t = self.table(rng.gen_range(0..o.y_alphabet().len()))?;
                let flat = FiniteDistribution::uniform(o.prior().alphabet().clone());
                let w = random_simplex(&mut rng, t.len());
                let after = core(pool_log_likelihoods(o.prior(), &t, &w))?;
                let agents: Vec<Vec<f64>> = core(agent_posteriors(o.prior(), &t))?
                    .iter()
                    .map(|a| a.log_probs().to_vec())
                    .collect();
                let before = core(pool_log_likelihoods(&flat, &agents, &w))?;
                let d = after.max_abs_diff(&before);
                fail(d < POOL_TOL, || format!("pool: prior before/after differ by {d}"))?;
                let wm = random_weight_matrix(&mut rng, t.len(), o.space().m());
                let direct = core(scl_posterior_from_likelihoods(o.prior(), &t, &wm))?;
                let folded: Vec<Vec<f64>> = t
                    .iter()
                    .map(|row| row.iter().zip(o.prior().log_probs()).map(|(l, p)| l + p).collect())
                    .collect();
                let other = core(scl_posterior_from_likelihoods(&flat, &folded, &wm))?;
                let d = direct.max_abs_diff(&other);
                fail(d < EQUAL_TOL, || format!("super composite: folded prior differs by {d}"))
            }
            "odds_conservation" => {
                let on = &self.nuisance;
                let prior = on.nuisance().expect("nuisance oracle");
                let models = on.feature_models();
                let obs = on.observe(rng.gen_range(0..on.y_alphabet().len()));
                let w = random_weight_matrix(&mut rng, models.len(), on.space().m());
                for j in 1..on.space().len() {
                    let col = w.column(j - 1);
                    let ratio = core(super_composite_evidence_log(models, j, &obs, &w, prior))?.exp();
                    let reference = core(composite_evidence_log(models, 0, &obs, col, prior))?.exp();
                    let target = core(composite_evidence_log(models, j, &obs, col, prior))?.exp();
                    let rel = (ratio * reference - target).abs() / target;
                    fail(rel < POOL_TOL, || format!("hypothesis {j}: relative error {rel}"))?;
                }
                Ok(())
            }
            other => unreachable!("unknown check {other}"),
        }
    }

    fn spec_for(&self, check: &str) -> ProblemSpec {
        if check == "odds_conservation" {
            ProblemSpec::from_oracle(&self.nuisance)
        } else {
            ProblemSpec::from_oracle(&self.plain)
        }
    }
}

pub fn verify(opts: &VerifyOptions) -> Result<VerifyReport, rayon::ThreadPoolBuildError> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let seeds: Vec<u64> = (0..opts.instances).map(|_| rng.gen()).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.workers).build()?;
    let results: Vec<Vec<Check>> = pool.install(|| {
        seeds
            .par_iter()
            .map(|s| {
                let inst = Instance::new(*s);
                (0..CHECKS.len()).map(|c| inst.run(c, opts.tolerance)).collect()
            })
            .collect()
    });
    let mut counts = vec![(0, 0); CHECKS.len()];
    let mut first_failure = None;
    for (i, row) in results.iter().enumerate() {
        for (c, r) in row.iter().enumerate() {
            match r {
                Ok(()) => counts[c].0 += 1,
                Err(detail) => {
                    counts[c].1 += 1;
                    if first_failure.is_none() {
                        let inst = Instance::new(seeds[i]);
                        first_failure = Some(Failure {
                            instance: i,
                            seed: seeds[i],
                            check: CHECKS[c],
                            detail: detail.clone(),
                            spec: inst.spec_for(CHECKS[c]),
                        });
                    }
                }
            }
        }
    }
    Ok(VerifyReport {
        seed: opts.seed,
        instances: opts.instances,
        counts,
        first_failure,
    })
}
