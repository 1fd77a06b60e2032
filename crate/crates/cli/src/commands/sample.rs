use crate::error::{CliError, Result};
use crate::spec::Problem;

/// Labelled draws from the spec's oracle as TSV: data symbol, hypothesis,
/// nuisance value if any, then every clue (and its conditioner).
pub fn sample(problem: &Problem, n: usize, seed: u64) -> Result<String> {
    let o = problem
        .oracle
        .as_ref()
        .ok_or_else(|| CliError::Spec("sample needs an \"oracle\" model source".into()))?;
    let mut header = vec!["y".to_string(), "theta".to_string()];
    if o.nuisance().is_some() {
        header.push("psi".into());
    }
    for f in o.features() {
        header.push(f.name().to_string());
        if f.conditioning().is_some() {
            header.push(format!("{}_c", f.name()));
        }
    }
    let mut out = header.join("\t");
    out.push('\n');
    for s in o.sample_dataset(n, seed)? {
        let mut row = vec![
            o.y_alphabet().symbol(s.y).to_string(),
            o.space().label(s.theta).to_string(),
        ];
        if let (Some(psi), Some(prior)) = (s.psi, o.nuisance()) {
            row.push(prior.grid().symbol(psi).to_string());
        }
        for (f, v) in o.features().iter().zip(&s.obs.values) {
            row.push(f.alphabet().symbol(v.symbol).to_string());
            if let (Some((a, _)), Some(c)) = (f.conditioning(), v.conditioner) {
                row.push(a.symbol(c).to_string());
            }
        }
        out += &row.join("\t");
        out.push('\n');
    }
    Ok(out)
}
