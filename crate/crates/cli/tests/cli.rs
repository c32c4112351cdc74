use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = r#"
master_seed = 5
realizations = 2

[model]
kind = "residual"
n_qubits = 2
dt = 1.0
lambda = 0.5
tau_e = 2

[task]
kind = "stm"
delays = [0, 1, 2]

[phases]
washout = 20
train = 40
test = 20
"#;

fn qrc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrc")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let outs = ["a", "b"].map(|name| dir.path().join(name));
    for out in &outs {
        let o = qrc(&["run-stm", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", "2"]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stderr(&o).contains("estimated runtime"));
        assert!(String::from_utf8_lossy(&o.stdout).contains("capacity_tau_1"));
    }
    for name in ["records.csv", "summary.csv"] {
        let read = |d: &PathBuf| std::fs::read(d.join(name)).unwrap();
        assert_eq!(read(&outs[0]), read(&outs[1]), "{name}");
    }
    // The resolved config differs only in where it was written.
    let resolved = |d: &PathBuf| {
        let text = std::fs::read_to_string(d.join("config.resolved")).unwrap();
        text.lines().filter(|l| !l.starts_with("output_path")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(resolved(&outs[0]), resolved(&outs[1]));
    assert!(outs[0].join("log.txt").exists());
    let records = std::fs::read_to_string(outs[0].join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 1 + 2 * 3);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = qrc(&[
        "run-stm",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "99",
        "--realizations",
        "1",
        "--set",
        "lambda=0.25",
        "--workers",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let resolved = std::fs::read_to_string(out.join("config.resolved")).unwrap();
    assert!(resolved.contains("master_seed = 99"));
    assert!(resolved.contains("realizations = 1"));
    assert!(resolved.contains("lambda = 0.25"));
}

#[test]
fn invalid_config_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &SMALL.replace("dt = 1.0", "dt = 1.0\ngamma = -0.1"));
    let out = dir.path().join("out");
    let o = qrc(&["run-stm", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("error[config]") && err.contains("model.gamma"), "{err}");
    assert!(!err.contains("estimated runtime"));
    assert!(!out.exists());
}

#[test]
fn error_classes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let c = config.to_str().unwrap();

    let o = qrc(&["run-blp", "--config", c]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("error[config]") && stderr(&o).contains("task.kind"));

    let o = qrc(&["run-stm", "--config", c, "--set", "colour=1"]);
    assert!(stderr(&o).contains("error[config]") && stderr(&o).contains("colour"));

    let o = qrc(&["run-stm", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("error[io]"), "{}", stderr(&o));

    let o = qrc(&["run-stm", "--preset", "lorenz"]);
    assert!(stderr(&o).contains("error[config]"));

    let o = qrc(&["run-santafe", "--realizations", "1", "--data", dir.path().join("none.txt").to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("error["));
}

#[test]
fn sweep_writes_long_table() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("sweep");
    let o = qrc(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--param",
        "lambda",
        "--range",
        "0:1:0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("param,value,realization,metric,metric_value"));
    assert_eq!(lines.count(), 3 * 2 * 3);
    for v in ["0", "0.5", "1"] {
        assert!(out.join(format!("lambda={v}")).join("summary.csv").exists(), "{v}");
    }

    let o = qrc(&["sweep", "--config", config.to_str().unwrap(), "--param", "omega", "--values", "0,1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));

    let o = qrc(&["sweep", "--config", config.to_str().unwrap(), "--param", "lambda", "--range", "1:0:0.1"]);
    assert!(!o.status.success());
}
