use swlab::io::{read_swdf, read_trajectory};
use swlab::scenario::{emit_report, parse_config, run_scenario, SCHEMA};

fn run(text: &str) -> (tempfile::TempDir, serde_json::Value) {
    let cfg = parse_config(text).unwrap();
    let report = run_scenario(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_report(&report, dir.path()).unwrap();
    let json =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    (dir, json)
}

#[test]
fn distance_run_writes_regularization_series() {
    let (dir, report) = run("kind = \"distance\"\npreset = \"grushin\"\n[grid]\nresolution = [25]\n[distance]\nlevels = 6\n");
    assert_eq!(report["schema"], SCHEMA);
    assert_eq!(report["pass"], true, "{report:#}");
    let mut prev: Option<Vec<f64>> = None;
    for k in 0..6 {
        let (h, values) = read_swdf(&dir.path().join(format!("distance_eps_{k:02}.swdf"))).unwrap();
        assert_eq!(h.dims, vec![25, 25]);
        assert!(h.epsilon > 0.0);
        if let Some(p) = &prev {
            // decreasing eps can only grow the distance, up to stencil noise
            let worse = values
                .iter()
                .zip(p)
                .filter(|(a, b)| **a + 1e-9 < **b)
                .count();
            assert!(
                worse <= values.len() / 1000,
                "level {k}: {worse} nodes decreased"
            );
        }
        prev = Some(values);
    }
    assert!(dir.path().join("convergence.json").exists());
}

#[test]
fn wave_cone_run_dumps_trajectory_and_leakage() {
    let (dir, report) =
        run("kind = \"wave-cone\"\ndim = 1\n[grid]\nbounds = [[-2.5, 2.5]]\nresolution = [257]\n[wave]\nsnapshot_stride = 8\n");
    assert_eq!(report["pass"], true, "{report:#}");
    let snaps = read_trajectory(&dir.path().join("trajectory.swdf")).unwrap();
    assert!(snaps.len() > 2);
    assert!(snaps.windows(2).all(|w| w[1].1 > w[0].1));
    for f in ["leakage.json", "leakage_refined.json", "timing.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let drift = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "energy_drift")
        .unwrap();
    assert!(drift["value"].as_f64().unwrap() < 1e-10);
}

#[test]
fn fractional_run_dumps_spectrum() {
    let (dir, report) =
        run("kind = \"fractional\"\n[grid]\nresolution = [64]\n[fractional]\nmodes = 64\n");
    assert_eq!(report["pass"], true, "{report:#}");
    let names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(names.iter().any(|n| n.ends_with(".bin")), "{names:?}");
}

#[test]
fn reports_are_reproducible() {
    let text = "kind = \"masuda\"\n[grid]\nresolution = [24]\n[masuda]\nmodes = 8\n";
    let (a, _) = run(text);
    let (b, _) = run(text);
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("report.json")).unwrap();
    assert_eq!(read(&a), read(&b));
}
