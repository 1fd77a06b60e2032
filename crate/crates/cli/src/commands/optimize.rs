use serde_json::{json, Map, Value};
use sclkit::weights::DEFAULT_TIE_TOL;

use crate::error::Result;
use crate::format::number;
use crate::spec::{Problem, WeightSpec};

/// Utilities, optimal weights and tie sets, keyed by hypothesis then feature.
/// The reference has no column and is omitted.
pub fn optimize(problem: &Problem) -> Result<Value> {
    let tie_tol = match &problem.weights {
        WeightSpec::Optimal { tie_tol: Some(t) } => *t,
        _ => DEFAULT_TIE_TOL,
    };
    let (u, sel) = problem.optimal_selection(tie_tol)?;
    let names: Vec<&str> = problem.models.iter().map(|m| m.name()).collect();
    let columns: Vec<(String, usize)> = problem
        .display_order()
        .into_iter()
        .filter(|t| *t != 0)
        .map(|t| (problem.space.label(t).to_string(), t - 1))
        .collect();
    let table = |get: &dyn Fn(usize, usize) -> f64| -> Value {
        Value::Object(
            columns
                .iter()
                .map(|(label, c)| {
                    let row: Map<String, Value> = names
                        .iter()
                        .enumerate()
                        .map(|(i, n)| (n.to_string(), number(get(i, *c))))
                        .collect();
                    (label.clone(), Value::Object(row))
                })
                .collect(),
        )
    };
    let tie_sets: Map<String, Value> = columns
        .iter()
        .map(|(label, c)| {
            let set: Vec<Value> = sel.tie_sets[*c].iter().map(|i| json!(names[*i])).collect();
            (label.clone(), Value::Array(set))
        })
        .collect();
    Ok(json!({
        "reference": problem.space.label(0),
        "utility_kind": if problem.nuisance.is_some() { "nuisance-averaged" } else { "kl" },
        "utility": table(&|i, c| u.get(i, c)),
        "weights": table(&|i, c| sel.weights.get(i, c)),
        "tie_sets": tie_sets,
        "warnings": sel.warnings(&problem.space),
    }))
}
