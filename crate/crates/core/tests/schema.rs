use jsonschema::JSONSchema;
use qbench::backend::{Backend, JobFile};
use qbench::bell::PairSelection;
use qbench::harness::{self, Benchmark, CurveSpec, RunManifest};
use qbench::linedraw::Curve;
use qbench::riemann::Kind;
use qbench::sim::NoiseModel;
use qbench::{analysis, riemann, Topology};
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};

fn schema(name: &str) -> JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema").join(name);
    let value: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    JSONSchema::compile(&value).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn check(schema_name: &str, value: &Value, what: &str) {
    let s = schema(schema_name);
    let msgs: Vec<String> = match s.validate(value) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).take(5).collect(),
    };
    panic!("{what} does not match {schema_name}: {msgs:#?}");
}

fn check_file(schema_name: &str, path: &Path) {
    let value: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    check(schema_name, &value, &path.display().to_string());
}

fn run(dir: &Path, bench: Benchmark, backend: Backend) -> PathBuf {
    let manifest = RunManifest::new(bench, &backend, 3);
    harness::run(manifest, backend, dir).unwrap();
    dir.to_path_buf()
}

fn check_run(dir: &Path) {
    check_file("manifest.schema.json", &dir.join("manifest.json"));
    check_file("results.schema.json", &dir.join("results.json"));
    check_file("scores.schema.json", &dir.join("scores.json"));
    let mut n = 0;
    for e in fs::read_dir(dir.join("histograms")).unwrap() {
        check_file("histogram.schema.json", &e.unwrap().path());
        n += 1;
    }
    assert!(n > 0);
}

#[test]
fn run_outputs_validate() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let noise = NoiseModel { p1: 0.01, p2: 0.02, ro01: 0.01, ro10: 0.01 };
    let runs = [
        run(
            &t.join("bell"),
            Benchmark::Bell { topology: Topology::line(3), pairs: PairSelection::All, shots: 256 },
            Backend::Sample,
        ),
        run(&t.join("sm"), Benchmark::grid(Kind::Microscope, &[1, 2], 4, Some(256)).unwrap(), Backend::Noisy(noise)),
        run(&t.join("mb"), Benchmark::grid(Kind::Mandelbrot, &[1], 4, Some(256)).unwrap(), Backend::Exact),
        run(
            &t.join("line"),
            Benchmark::Line { curves: vec![CurveSpec::of(&Curve::kite())], batches: 2, shots: 128 },
            Backend::Sample,
        ),
        run(&t.join("matinv"), Benchmark::matinv(&[2], Some(512)), Backend::Sample),
        run(&t.join("platonic"), Benchmark::Platonic { depths: vec![1, 2], strength: 0.75, shots: 2048 }, Backend::Sample),
    ];
    for dir in &runs {
        check_run(dir);
    }

    let reports = harness::fit_noise_dir(&runs[1], 8).unwrap();
    harness::write_noise_reports(&runs[1], &reports).unwrap();
    check_file("noise_fit.schema.json", &runs[1].join("noise_fit.json"));

    let report = harness::device_report(t, Some(32.0)).unwrap();
    harness::write_device_report(t, &report).unwrap();
    check_file("report.schema.json", &t.join("report.json"));
}

#[test]
fn input_formats_validate() {
    let topo = Topology::line(4);
    check("topology.schema.json", &serde_json::to_value(&topo).unwrap(), "line topology");

    let noise = NoiseModel { p1: 0.001, p2: 0.01, ro01: 0.02, ro10: 0.03 };
    check("noise.schema.json", &serde_json::to_value(noise).unwrap(), "noise model");

    for name in ["kite", "heart8", "heart16"] {
        let c = Curve::by_name(name).unwrap();
        check("curve.schema.json", &serde_json::to_value(c.to_json()).unwrap(), name);
    }

    let circuit = riemann::mandelbrot_circuit(2, qbench::gates::C64::new(-0.4, 0.3)).unwrap();
    let json = serde_json::to_value(circuit.to_json()).unwrap();
    check("circuit.schema.json", &json, "mandelbrot circuit");
    let job = JobFile { id: "j".into(), seed: 1, shots: 10, circuit: circuit.to_json() };
    check("job.schema.json", &serde_json::to_value(&job).unwrap(), "job file");

    let scores = analysis::ScoreWithError::new(0.1, 0.01);
    let bad_scores = serde_json::json!({ "benchmark": "sm", "parts": { "x": scores }, "overall": "high" });
    assert!(!schema("scores.schema.json").is_valid(&bad_scores));
    assert!(!schema("noise.schema.json").is_valid(&serde_json::json!({ "p1": 2.0, "p2": 0, "ro01": 0, "ro10": 0 })));
    assert!(!schema("histogram.schema.json").is_valid(&serde_json::json!({ "shots": 3, "counts": { "2": 3 } })));
}
