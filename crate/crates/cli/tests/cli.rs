use std::path::{Path, PathBuf};
use std::process::Command as Process;

use bergbal_cli::{
    parse_config, read_report, run_experiment, to_json, write_report, CliError, RunReport, Status,
};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> bergbal_cli::ExperimentConfig {
    let text = std::fs::read_to_string(configs_dir().join(name)).unwrap();
    parse_config(&text, true).unwrap().config
}

fn schema_validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/run_report.schema.json"),
    )
    .unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_schema_valid(report: &RunReport) {
    let v: serde_json::Value = serde_json::from_str(&to_json(report)).unwrap();
    let validator = schema_validator();
    let problems: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(problems.is_empty(), "{problems:#?}");
}

#[test]
fn shipped_configs_parse_strictly() {
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        if let Err(e) = parse_config(&text, true) {
            panic!("{}: {e}", path.display());
        }
    }
}

#[test]
fn balance_report() {
    let report = run_experiment(&load("balance.toml"));
    assert_eq!(report.status, Status::Pass, "{:?}", report.verdicts);
    let level = &report.outputs["levels"][0];
    assert_eq!(level["converged"], true);
    assert!(level["final_residual"].as_f64().unwrap() <= 1e-8);
    assert_schema_valid(&report);
}

#[test]
fn expand_on_fubini_study_recovers_unit_coefficient() {
    let report = run_experiment(&load("expand_fs.toml"));
    assert_eq!(report.status, Status::Pass, "{:?}", report.verdicts);
    let a1 = report.series.iter().find(|s| s.name == "a1").unwrap();
    assert_eq!(a1.nodes.len(), a1.values.len());
    assert!(a1.values.iter().all(|v| (v - 1.0).abs() <= 1e-6));
}

#[test]
fn fourier_integer_agreement() {
    let report = run_experiment(&load("fourier.toml"));
    assert_eq!(report.status, Status::Pass, "{:?}", report.verdicts);
    let c = &report.outputs["consistency"];
    assert!(c["max_discrepancy"].as_f64().unwrap() <= 1e-10);
    assert!(c["half_integer_spread"].as_f64().unwrap() > 1e-3);
    assert_schema_valid(&report);
}

#[test]
fn family_table_and_schema() {
    let report = run_experiment(&load("family.toml"));
    assert_eq!(report.status, Status::Pass, "{:?}", report.verdicts);
    let table = report.tables.iter().find(|t| t.name == "family").unwrap();
    assert_eq!(table.columns, ["m", "residual", "d_m", "sup|sigma-2|"]);
    assert_eq!(table.rows.len(), 4);
    assert_schema_valid(&report);
}

#[test]
fn report_round_trips_and_is_deterministic() {
    let cfg = load("fourier.toml");
    let a = run_experiment(&cfg);
    let mut b = run_experiment(&cfg);
    b.timing = a.timing.clone();
    assert_eq!(a, b);

    let dir = tempfile::tempdir().unwrap();
    let written = write_report(&a, dir.path(), true).unwrap();
    assert!(written.iter().any(|p| p.ends_with("table_integer_agreement.csv")));
    let back = read_report(&dir.path().join("report.json")).unwrap();
    assert_eq!(back, a);
}

#[test]
fn csv_numbers_carry_seventeen_digits() {
    let report = run_experiment(&load("family.toml"));
    let dir = tempfile::tempdir().unwrap();
    write_report(&report, dir.path(), true).unwrap();
    let text = std::fs::read_to_string(dir.path().join("table_family.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "m,residual,d_m,sup|sigma-2|");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "5");
    let mantissa = first[1].split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{}", first[1]);
}

#[test]
fn unwritable_directory_names_the_path() {
    let report = run_experiment(&load("fourier.toml"));
    let file = tempfile::NamedTempFile::new().unwrap();
    let target = file.path().join("sub");
    match write_report(&report, &target, false) {
        Err(CliError::Io { path, .. }) => assert_eq!(path, target),
        other => panic!("{other:?}"),
    }
}

#[test]
fn downstream_errors_are_captured() {
    let doc = r#"
        command = "balance"
        levels = [8]
        [potential]
        type = "gaussian-bump"
        amplitude = 0.5
        width = 1.0
        center = 0.0
    "#;
    let report = run_experiment(&parse_config(doc, true).unwrap().config);
    assert_eq!(report.status, Status::Error);
    assert!(report.errors[0].contains("positivity"), "{:?}", report.errors);
    assert_schema_valid(&report);
}

fn bergbal(args: &[&str], out_env: Option<&Path>) -> (i32, String) {
    let mut cmd = Process::new(env!("CARGO_BIN_EXE_bergbal"));
    cmd.args(args);
    match out_env {
        Some(p) => cmd.env("BERGBAL_OUT", p),
        None => cmd.env_remove("BERGBAL_OUT"),
    };
    let out = cmd.output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout).to_string() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap(), text)
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = |name: &str| configs_dir().join(name).to_string_lossy().into_owned();
    let out = dir.path().to_string_lossy().into_owned();

    let (code, _) = bergbal(&["fourier", "--config", &cfg("fourier.toml"), "--out", &out], None);
    assert_eq!(code, 0);

    // verdict failure: the solver is stopped long before convergence
    let short = dir.path().join("short.toml");
    std::fs::write(
        &short,
        "levels = [8]\n[potential]\ntype = \"gaussian-bump\"\namplitude = 0.1\nwidth = 1.0\ncenter = 0.0\n[solver]\nmax_iterations = 2\n",
    )
    .unwrap();
    let (code, text) = bergbal(&["balance", "--config", short.to_str().unwrap(), "--out", &out], None);
    assert_eq!(code, 1, "{text}");
    assert!(text.contains("FAIL"));

    // configuration error, and a command clash
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "command = \"balance\"\nlevels = [0]\n").unwrap();
    let (code, text) = bergbal(&["balance", "--config", bad.to_str().unwrap()], None);
    assert_eq!(code, 2);
    assert!(text.contains("levels[0]"), "{text}");
    let (code, _) = bergbal(&["probe", "--config", &cfg("fourier.toml")], None);
    assert_eq!(code, 2);

    // unknown keys: warning by default, error with --strict
    let typo = dir.path().join("typo.toml");
    let fourier = std::fs::read_to_string(cfg("fourier.toml")).unwrap();
    std::fs::write(&typo, format!("colour = 1\n{fourier}")).unwrap();
    let (code, text) = bergbal(&["fourier", "--config", typo.to_str().unwrap(), "--out", &out], None);
    assert_eq!(code, 0);
    assert!(text.contains("warning: colour"), "{text}");
    let (code, _) = bergbal(&["fourier", "--config", typo.to_str().unwrap(), "--strict"], None);
    assert_eq!(code, 2);

    // internal error: invalid potential
    let broken = dir.path().join("broken.toml");
    std::fs::write(
        &broken,
        "levels = [8]\n[potential]\ntype = \"gaussian-bump\"\namplitude = 0.5\nwidth = 1.0\ncenter = 0.0\n",
    )
    .unwrap();
    let (code, _) = bergbal(&["balance", "--config", broken.to_str().unwrap(), "--out", &out], None);
    assert_eq!(code, 3);
}

#[test]
fn default_output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-env");
    let cfg = configs_dir().join("fourier.toml");
    let (code, _) = bergbal(&["fourier", "--config", cfg.to_str().unwrap()], Some(&target));
    assert_eq!(code, 0);
    assert!(target.join("report.json").exists());
}
