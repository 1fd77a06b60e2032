use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use sclkit_cli::{Problem, ProblemSpec};

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

fn sclkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sclkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(name: &str, v: &Value) -> String {
    let path = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn json_out(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(out)).unwrap()
}

fn two_class(weights: Value) -> Value {
    json!({
        "hypotheses": ["h0", "h1"],
        "reference": "h0",
        "prior": {"h0": 0.5, "h1": 0.5},
        "features": [{"name": "f", "alphabet": ["a", "b"], "table": {"h0": [0.2, 0.8], "h1": [0.6, 0.4]}}],
        "weights": weights,
    })
}

#[test]
fn single_clue_gives_bayes_posterior() {
    let spec = write("bayes.json", &two_class(json!({"mode": "uniform"})));
    let obs = write("bayes.obs.json", &json!({"f": "a"}));
    let v = json_out(&sclkit(&["infer", "--spec", &spec, "--obs", &obs, "--json"]));
    assert_eq!(v["method"], "composite-likelihood");
    assert_eq!(v["posterior"]["h0"], json!(0.25));
    assert_eq!(v["posterior"]["h1"], json!(0.75));
}

#[test]
fn constant_columns_report_like_uniform_weights() {
    let spec = json!({
        "hypotheses": ["x", "y", "z"],
        "reference": "y",
        "features": [
            {"name": "f", "alphabet": ["a", "b"], "table": {"x": [0.3, 0.7], "y": [0.5, 0.5], "z": [0.9, 0.1]}},
            {"name": "g", "alphabet": ["a", "b"], "table": {"x": [0.6, 0.4], "y": [0.2, 0.8], "z": [0.5, 0.5]}}
        ],
    });
    let obs = write("const.obs.json", &json!({"f": "b", "g": "a"}));
    let mut reports = Vec::new();
    for (i, w) in [json!({"mode": "uniform"}), json!({"mode": "equal-columns", "column": {"f": 0.5, "g": 0.5}})]
        .into_iter()
        .enumerate()
    {
        let mut s = spec.clone();
        s["weights"] = w;
        let path = write(&format!("const{i}.json"), &s);
        let out = sclkit(&["infer", "--spec", &path, "--obs", &obs]);
        assert!(out.status.success());
        reports.push(stdout(&out));
    }
    assert_eq!(reports[0], reports[1]);
    assert!(reports[0].starts_with("method\tcomposite-likelihood\n"));
    // rows keep the listing order even though y is the reference
    let rows: Vec<&str> = reports[0].lines().skip(2).map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(rows, ["x", "y", "z"]);
}

#[test]
fn exit_codes() {
    let bad = write("bad.json", &json!({"hypotheses": ["h0"], "reference": "h0", "features": []}));
    let obs = write("bad.obs.json", &json!({"f": "a"}));
    assert_eq!(sclkit(&["infer", "--spec", &bad, "--obs", &obs]).status.code(), Some(2));
    assert_eq!(sclkit(&["infer", "--spec", "/nonexistent.json", "--obs", &obs]).status.code(), Some(2));

    let spec = write("ok.json", &two_class(json!({"mode": "uniform"})));
    let unknown = write("unknown.obs.json", &json!({"f": "c"}));
    let out = sclkit(&["infer", "--spec", &spec, "--obs", &unknown]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    // 0/0 ratio with positive weight
    let zero = write(
        "zero.json",
        &json!({
            "hypotheses": ["h0", "h1"], "reference": "h0",
            "features": [{"name": "f", "alphabet": ["a", "b"], "table": {"h0": [0.0, 1.0], "h1": [0.0, 1.0]}}],
            "weights": {"mode": "explicit", "matrix": {"h1": {"f": 1.0}}}
        }),
    );
    assert_eq!(sclkit(&["infer", "--spec", &zero, "--obs", &obs]).status.code(), Some(3));
}

#[test]
fn reference_zero_likelihood_gives_point_mass() {
    let spec = write(
        "inf.json",
        &json!({
            "hypotheses": ["h0", "h1"], "reference": "h0",
            "features": [{"name": "f", "alphabet": ["a", "b"], "table": {"h0": [0.0, 1.0], "h1": [0.5, 0.5]}}],
            "weights": {"mode": "uniform"}
        }),
    );
    let obs = write("inf.obs.json", &json!({"f": "a"}));
    let v = json_out(&sclkit(&["infer", "--spec", &spec, "--obs", &obs, "--json"]));
    assert_eq!(v["log_scl"]["h1"], "+inf");
    assert_eq!(v["posterior"]["h1"], json!(1.0));
}

#[test]
fn reports_round_trip() {
    let spec = examples().join("threeclass.json");
    let obs = examples().join("threeclass.obs.json");
    let runs = [
        sclkit(&["infer", "--spec", spec.to_str().unwrap(), "--obs", obs.to_str().unwrap(), "--json"]),
        sclkit(&["optimize", "--spec", spec.to_str().unwrap()]),
        sclkit(&["compare", "--spec", spec.to_str().unwrap(), "--n", "300", "--seed", "4", "--json"]),
        sclkit(&["verify", "--instances", "5", "--json"]),
    ];
    for out in &runs {
        let text = stdout(out);
        let v: Value = serde_json::from_str(&text).unwrap();
        let mut again = serde_json::to_string_pretty(&v).unwrap();
        again.push('\n');
        assert_eq!(again, text);
    }
}

#[test]
fn compare_rows_behave() {
    let spec = examples().join("checkup.json");
    let v = json_out(&sclkit(&["compare", "--spec", spec.to_str().unwrap(), "--n", "2000", "--seed", "9", "--json"]));
    let rows = v["methods"].as_array().unwrap();
    let truth = rows.iter().find(|r| r["method"] == "true").unwrap();
    assert_eq!(truth["mean_kl"], json!(0.0));
    for r in rows {
        assert!(r["log_score"].as_f64().unwrap() <= truth["log_score"].as_f64().unwrap() + 1e-12);
    }

    // flat prior: the 1/n power keeps the MAP of naive Bayes
    let mut flat: Value = serde_json::from_str(&std::fs::read_to_string(&spec).unwrap()).unwrap();
    flat.as_object_mut().unwrap().remove("prior");
    let path = write("flat.json", &flat);
    let v = json_out(&sclkit(&["compare", "--spec", &path, "--n", "2000", "--seed", "9", "--json"]));
    let acc = |m: &str| v["methods"].as_array().unwrap().iter().find(|r| r["method"] == m).unwrap()["accuracy"].clone();
    assert_eq!(acc("naive-bayes"), acc("cl-uniform"));
}

#[test]
fn optimize_reports() {
    // identical tables: every hypothesis is invisible
    let same = write(
        "same.json",
        &json!({
            "hypotheses": ["h0", "h1", "h2"], "reference": "h0",
            "features": [
                {"name": "f", "alphabet": ["a", "b"], "table": {"h0": [0.3, 0.7], "h1": [0.3, 0.7], "h2": [0.3, 0.7]}},
                {"name": "g", "alphabet": ["a", "b"], "table": {"h0": [0.5, 0.5], "h1": [0.5, 0.5], "h2": [0.5, 0.5]}}
            ]
        }),
    );
    let v = json_out(&sclkit(&["optimize", "--spec", &same]));
    assert_eq!(v["weights"]["h1"], json!({"f": 0.5, "g": 0.5}));
    assert_eq!(v["warnings"].as_array().unwrap().len(), 2);

    // unique argmaxes: same matrix as the single-clue projection
    let spec = examples().join("checkup.json");
    let v = json_out(&sclkit(&["optimize", "--spec", spec.to_str().unwrap()]));
    assert_eq!(v["weights"]["infection"], json!({"temperature": 1.0, "pressure": 0.0}));
    assert_eq!(v["weights"]["cardio"], json!({"temperature": 0.0, "pressure": 1.0}));
    let mut s: Value = serde_json::from_str(&std::fs::read_to_string(&spec).unwrap()).unwrap();
    s["weights"] = json!({"mode": "pdf-projection", "iota": {"infection": "temperature", "cardio": "pressure"}});
    let projected = Problem::from_spec(serde_json::from_value(s).unwrap()).unwrap();
    let optimal = Problem::load(&spec).unwrap();
    assert_eq!(projected.weight_matrix().unwrap(), optimal.weight_matrix().unwrap());

    // utilities agree with a recomputation from the derived tables
    for (j, h) in ["infection", "cardio"].iter().enumerate() {
        for (i, f) in ["temperature", "pressure"].iter().enumerate() {
            let m = &optimal.models[i];
            let (p, q) = (m.distribution(j + 1, None, None).unwrap(), m.distribution(0, None, None).unwrap());
            let kl: f64 = (0..p.len())
                .filter(|z| p.prob(*z) > 0.0)
                .map(|z| p.prob(z) * (p.prob(z) / q.prob(z)).ln())
                .sum();
            let got = v["utility"][h][f].as_f64().unwrap();
            assert!((got - kl).abs() <= 1e-11 * kl.max(1.0), "{h}/{f}: {got} vs {kl}");
        }
    }
}

#[test]
fn sample_is_seeded() {
    let spec = examples().join("checkup.json");
    let a = stdout(&sclkit(&["sample", "--spec", spec.to_str().unwrap(), "--n", "50", "--seed", "2"]));
    let b = stdout(&sclkit(&["sample", "--spec", spec.to_str().unwrap(), "--n", "50", "--seed", "2"]));
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some("y\ttheta\ttemperature\tpressure"));
    for line in lines {
        let cells: Vec<&str> = line.split('\t').collect();
        assert_eq!(cells[0], format!("{}/{}", cells[2], cells[3]));
    }
}

#[test]
fn verify_contract() {
    let out = sclkit(&["verify", "--instances", "0"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("status\tok"));

    let out = sclkit(&["verify", "--instances", "20", "--seed", "5", "--workers", "3"]);
    assert!(out.status.success());
    let serial = sclkit(&["verify", "--instances", "20", "--seed", "5", "--workers", "1"]);
    assert_eq!(out.stdout, serial.stdout);

    let out = sclkit(&["verify", "--instances", "4", "--tolerance", "-1e-3", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["status"], "failed");
    let replay: ProblemSpec = serde_json::from_value(v["replay"]["spec"].clone()).unwrap();
    assert!(Problem::from_spec(replay).unwrap().oracle.is_some());
}
