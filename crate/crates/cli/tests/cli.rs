use std::path::Path;
use std::process::Command as Process;

use jcir_cli::{extract_config, parse_config, run, Cell, CliError, Command, RunConfig};

const MODEL_BAJD: &str = r#"
[model]
a = 1.0
theta = 1.0
sigma = 1.4142135623730951

[model.nu]
kind = "finite_activity"
rate = 1.0
jumps = { kind = "exponential", mean = 1.0 }
"#;

const MODEL_CIR: &str = r#"
[model]
a = 1.0
theta = 1.0
sigma = 1.41421356
"#;

fn config(head: &str, model: &str, tail: &str) -> String {
    format!("{head}\n{model}\n{tail}\n")
}

fn floats(cells: Vec<&Cell>) -> Vec<f64> {
    cells
        .into_iter()
        .map(|c| match c {
            Cell::Float(v) => *v,
            other => panic!("expected a float, got {other:?}"),
        })
        .collect()
}

fn jcir(dir: &Path, toml: &str, extra: &[&str]) -> (i32, String, String) {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, toml).unwrap();
    let out = dir.join("out.csv");
    let _ = std::fs::remove_file(&out);
    let result = Process::new(env!("CARGO_BIN_EXE_jcir"))
        .arg("--config")
        .arg(&cfg)
        .arg("--output")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    let csv = std::fs::read_to_string(&out).unwrap_or_default();
    (
        result.status.code().unwrap(),
        csv,
        String::from_utf8_lossy(&result.stderr).into_owned(),
    )
}

#[test]
fn minimal_config_parses() {
    let cfg = parse_config(&config("command = \"check\"", MODEL_CIR, "")).unwrap();
    assert_eq!(cfg.command, Command::Check);
    assert_eq!(cfg.seed, 0);
    assert_eq!(cfg.model.a, 1.0);
}

#[test]
fn invalid_mean_reversion_is_named() {
    let text = config("command = \"check\"", &MODEL_CIR.replace("a = 1.0", "a = -1.0"), "");
    let err = parse_config(&text).unwrap_err();
    assert!(matches!(err, CliError::Config(_)));
    assert!(err.to_string().contains("a > 0"), "{err}");
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn missing_variant_field_is_named() {
    let text = config("command = \"check\"", &MODEL_BAJD.replace("rate = 1.0\n", ""), "");
    let err = parse_config(&text).unwrap_err();
    assert!(err.to_string().contains("rate"), "{err}");
}

#[test]
fn unknown_keys_are_rejected() {
    let top = config("command = \"check\"\ncolour = 1", MODEL_CIR, "");
    assert!(parse_config(&top).unwrap_err().to_string().contains("colour"));
    let nested = config(
        "command = \"check\"",
        MODEL_CIR,
        "[check]\nquad_tol = 1e-10\nqaud_tol = 1e-9",
    );
    assert!(parse_config(&nested).unwrap_err().to_string().contains("qaud_tol"));
}

#[test]
fn missing_command_table_is_reported() {
    let err = parse_config(&config("command = \"cf\"", MODEL_CIR, "")).unwrap_err();
    assert!(err.to_string().contains("[cf]"), "{err}");
    let err = parse_config(&config(
        "command = \"simulate\"",
        MODEL_CIR,
        "[simulate]\nmethod = \"euler\"\nx0 = 1.0\nhorizon = 1.0\nn_paths = 2",
    ))
    .unwrap_err();
    assert!(err.to_string().contains("simulate.dt"), "{err}");
}

#[test]
fn check_on_bajd_reports_all_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let (code, csv, err) = jcir(dir.path(), &config("command = \"check\"", MODEL_BAJD, ""), &[]);
    assert_eq!(code, 0, "{err}");
    let last = csv.lines().last().unwrap();
    assert!(last.ends_with("true,true,true"), "{last}");
}

#[test]
fn lowerbound_without_jumps_has_zero_margin() {
    let text = config(
        "command = \"lowerbound\"",
        MODEL_CIR,
        "[lowerbound]\nt = 1.0\nx = 1.0\nn_y = 101",
    );
    let cfg = parse_config(&text).unwrap();
    let table = run(&cfg).unwrap();
    let margin = floats(table.column("margin").unwrap());
    assert_eq!(margin.len(), 101);
    assert!(margin.iter().all(|m| m.abs() <= 1e-10), "{margin:?}");
    assert_eq!(table.note_value("violations"), Some(&Cell::Int(0)));
}

#[test]
fn cf_with_oracle_agrees() {
    let text = config(
        "command = \"cf\"",
        MODEL_BAJD,
        "[cf]\nt = 0.7\nx = 2.0\nv_min = -20.0\nv_max = 20.0\nn_points = 9\noracle = true",
    );
    let table = run(&parse_config(&text).unwrap()).unwrap();
    let rel = floats(table.column("rel_err").unwrap());
    assert!(rel.iter().all(|r| *r < 1e-8), "{rel:?}");
}

#[test]
fn density_integrates_to_one() {
    let text = config(
        "command = \"density\"",
        MODEL_BAJD,
        "[density]\nt = 1.0\nx = 1.0\nn_y = 11",
    );
    let table = run(&parse_config(&text).unwrap()).unwrap();
    match table.note_value("mass") {
        Some(Cell::Float(m)) => assert!((m - 1.0).abs() < 1e-6, "{m}"),
        other => panic!("{other:?}"),
    }
    assert!(floats(table.column("density").unwrap()).iter().all(|d| *d >= 0.0));
}

fn all_command_configs() -> Vec<String> {
    vec![
        config("command = \"check\"\nseed = 3", MODEL_BAJD, "[check]\nquad_tol = 1e-9"),
        config(
            "command = \"cf\"",
            MODEL_BAJD,
            "[cf]\nt = 1.0\nx = 0.5\nv_min = 0.0\nv_max = 5.0\nn_points = 3",
        ),
        config(
            "command = \"simulate\"\nseed = 11",
            MODEL_BAJD,
            "[simulate]\nmethod = \"euler\"\nx0 = 1.0\nhorizon = 1.0\ndt = 0.1\nn_paths = 5",
        ),
        config(
            "command = \"simulate\"\nseed = 11",
            MODEL_BAJD,
            "[simulate]\nmethod = \"exact\"\nx0 = 1.0\nhorizon = 1.0\nn_paths = 5",
        ),
        config(
            "command = \"skeleton\"\nseed = 5",
            MODEL_BAJD,
            "[skeleton]\nx0 = 0.0\ndelta = 0.5\nn_steps = 4\nn_chains = 3",
        ),
        config(
            "command = \"density\"",
            MODEL_CIR,
            "[density]\nt = 1.0\nx = 1.0\nn_y = 5\ny_min = 0.1\ny_max = 3.0\nmode = \"full\"\nterms = 4096",
        ),
        config(
            "command = \"lowerbound\"",
            MODEL_BAJD,
            "[lowerbound]\nt = 1.0\nx = 1.0\nn_y = 5\ntol = 1e-7",
        ),
        config(
            "command = \"ergodicity\"\nseed = 2",
            MODEL_CIR,
            "[ergodicity]\nx = [0.0, 4.0]\ndelta = 0.25\nn_max = 24\nn_mc = 20000",
        ),
    ]
}

#[test]
fn embedded_config_round_trips() {
    for text in all_command_configs() {
        let mut cfg: RunConfig = parse_config(&text).unwrap();
        cfg.seed = cfg.seed.wrapping_add(1000);
        cfg.output = Some("somewhere.csv".into());
        let csv = run(&cfg).unwrap().render(&cfg);
        let back = extract_config(&csv).unwrap();
        assert_eq!(back, RunConfig { output: None, ..cfg }, "{text}");
    }
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for text in all_command_configs() {
        let (c1, first, e1) = jcir(dir.path(), &text, &[]);
        let (c2, second, _) = jcir(dir.path(), &text, &["--threads", "1"]);
        assert_eq!((c1, c2), (0, 0), "{e1}");
        assert_eq!(first, second, "{text}");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let text = &all_command_configs()[2];
    let (_, base, _) = jcir(dir.path(), text, &[]);
    let (_, other, _) = jcir(dir.path(), text, &["--seed", "12"]);
    assert_ne!(base, other);
    assert!(other.contains("# seed = 12"));
    assert_eq!(extract_config(&other).unwrap().seed, 12);
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let bad = config(
        "command = \"check\"",
        &MODEL_CIR.replace("sigma = 1.41421356", "sigma = 0.0"),
        "",
    );
    assert_eq!(jcir(dir.path(), &bad, &[]).0, 1);
    let floor = config(
        "command = \"ergodicity\"",
        MODEL_CIR,
        "[ergodicity]\nx = [0.0]\ndelta = 4.0\nn_max = 5\nn_mc = 1000",
    );
    let (code, _, err) = jcir(dir.path(), &floor, &[]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("n_mc"), "{err}");

    let missing = Process::new(env!("CARGO_BIN_EXE_jcir"))
        .args(["--config", "/nonexistent/run.toml"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
    let no_flags = Process::new(env!("CARGO_BIN_EXE_jcir")).output().unwrap();
    assert_eq!(no_flags.status.code(), Some(1));
}

#[test]
fn csv_floats_carry_seventeen_digits() {
    let text = config("command = \"check\"", MODEL_BAJD, "");
    let cfg = parse_config(&text).unwrap();
    let csv = run(&cfg).unwrap().render(&cfg);
    let row = csv.lines().last().unwrap();
    let first = row.split(',').next().unwrap();
    assert_eq!(first, format!("{:.16e}", 1.0 - (-1f64).exp()));
    assert_eq!(first.parse::<f64>().unwrap(), 1.0 - (-1f64).exp());
}
