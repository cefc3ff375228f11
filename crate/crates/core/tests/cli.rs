use std::path::Path;
use std::process::Command;

fn swlab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_swlab"))
        .args(args)
        .output()
        .expect("spawn swlab");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn presets_lists_fields_and_kinds() {
    let (code, out, _) = swlab(&["presets"]);
    assert_eq!(code, 0);
    for word in [
        "euclidean",
        "heisenberg",
        "grushin",
        "custom",
        "wave-cone",
        "masuda",
    ] {
        assert!(out.contains(word), "{word} missing from {out}");
    }
}

#[test]
fn validate_accepts_shipped_configs() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        let (code, out, err) = swlab(&["validate", p.to_str().unwrap()]);
        assert_eq!(code, 0, "{}: {out}{err}", p.display());
    }
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let unknown = write(tmp.path(), "a.toml", "kind = \"kernels\"\nbogus = 1\n");
    let (code, _, err) = swlab(&["validate", &unknown]);
    assert_eq!(code, 2);
    assert!(err.contains("bogus"), "{err}");
    let range = write(
        tmp.path(),
        "b.toml",
        "kind = \"fractional\"\n[fractional]\ns = [1.5]\n",
    );
    assert_eq!(swlab(&["validate", &range]).0, 2);
    assert_eq!(swlab(&["run", &range]).0, 2);
    let missing = tmp.path().join("nope.toml");
    assert_eq!(swlab(&["validate", missing.to_str().unwrap()]).0, 2);
}

#[test]
fn kernels_run_passes_and_writes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "k.toml",
        "kind = \"kernels\"\n[kernels]\nrandom_triples = 50\n",
    );
    let out = tmp.path().join("out");
    let (code, stdout, err) = swlab(&[
        "run",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--threads",
        "1",
    ]);
    assert_eq!(code, 0, "{stdout}{err}");
    assert!(stdout.contains("PASS"));
    for f in ["report.json", "timing.json", "kernel_table.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn impossible_threshold_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "k.toml",
        "kind = \"kernels\"\n[kernels]\nrandom_triples = 20\n[thresholds]\nkernel_abs = 1e-300\n",
    );
    let out = tmp.path().join("out");
    let (code, stdout, _) = swlab(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stdout.contains("FAIL"));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn source_outside_grid_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "d.toml",
        "kind = \"distance\"\npreset = \"grushin\"\n[grid]\nresolution = [17]\n[distance]\nsource = [5.0, 5.0]\n",
    );
    let out = tmp.path().join("out");
    let (code, _, err) = swlab(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("outside"), "{err}");
}
