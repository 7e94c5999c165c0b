use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bbqp_core::engine::make_ils;
use bbqp_core::ComponentKind;

fn bbqp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bbqp")).args(args).output().expect("run bbqp")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TOY: &str = "BBQP 2 2 Custom 0\n1 -1\n0 0.5\n3 -5\n-5 4\n";

fn toy_optimum() -> f64 {
    let (q, c, d) = ([[3.0, -5.0], [-5.0, 4.0]], [1.0, -1.0], [0.0, 0.5]);
    let mut best = f64::NEG_INFINITY;
    for xm in 0..4usize {
        for ym in 0..4usize {
            let x = |i: usize| (xm >> i & 1) as f64;
            let y = |j: usize| (ym >> j & 1) as f64;
            let mut f = 0.0;
            for (i, row) in q.iter().enumerate() {
                f += c[i] * x(i);
                for (j, qij) in row.iter().enumerate() {
                    f += qij * x(i) * y(j);
                }
            }
            for (j, dj) in d.iter().enumerate() {
                f += dj * y(j);
            }
            best = best.max(f);
        }
    }
    best
}

#[test]
fn ils_solves_a_toy_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("toy.bbqp");
    fs::write(&inst, TOY).unwrap();
    let config = dir.path().join("ils.json");
    let ils = make_ils(ComponentKind::OptX, ComponentKind::MutY4).unwrap();
    fs::write(&config, ils.to_json_string()).unwrap();
    let sol = dir.path().join("out/toy.sol");
    // With n = 2 the clamped MutY4 flips both columns, so the chain alone
    // only sees complementary y pairs; the final polish closes the gap.
    for seed in ["1", "2", "3"] {
        let out = bbqp(&[
            "solve", "--instance", path_str(&inst), "--config", path_str(&config), "--iterations", "200", "--seed",
            seed, "--out", path_str(&sol),
        ]);
        assert!(out.status.success(), "{}", text(&out.stderr));
        let written = fs::read_to_string(&sol).unwrap();
        let objective: f64 = written.lines().nth(2).unwrap().parse().unwrap();
        assert_eq!(objective, toy_optimum());
        assert!(text(&out.stdout).starts_with(&format!("objective {objective} ")));
    }
}

#[test]
fn missing_instance_exits_with_io_code() {
    let out = bbqp(&["solve", "--instance", "/nonexistent/x.bbqp", "--iterations", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("nonexistent"));
}

#[test]
fn invalid_config_lists_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    fs::write(
        &config,
        r#"{"name": "bad", "components": ["OptX", "MutX4"],
            "msucc": [[0.5, 0.5], [0.5, 0.4]],
            "mfail": [[0.0, 1.0], [1.0, 0.0]]}"#,
    )
    .unwrap();
    let out = bbqp(&["validate-config", path_str(&config)]);
    assert_eq!(out.status.code(), Some(3));
    let err = text(&out.stderr);
    assert!(err.contains("Msucc[OptX][OptX]") || err.contains("[OptX][OptX]"), "{err}");
    assert!(err.contains("sums to"), "{err}");

    let inst = dir.path().join("toy.bbqp");
    fs::write(&inst, TOY).unwrap();
    let out = bbqp(&["solve", "--instance", path_str(&inst), "--config", path_str(&config)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bench_reports_rows_and_updates_the_registry() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("toy.bbqp");
    fs::write(&inst, TOY).unwrap();
    let registry = dir.path().join("best.tsv");
    fs::write(&registry, format!("toy\t{}\n", toy_optimum() - 1.0)).unwrap();

    let out = bbqp(&[
        "bench", "--instances", path_str(&inst), "--config", "two_row", "--iterations", "100", "--registry",
        path_str(&registry),
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let csv = text(&out.stdout);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "instance,config,budget_ms,objective,best_known,gap_percent");
    assert_eq!(lines.len(), 4, "{csv}");
    assert!(lines[1].starts_with("toy,Two-row,"), "{csv}");
    assert!(lines[1].ends_with(&format!(",{0},{0},0.0000", toy_optimum())), "{csv}");
    assert!(lines[2].starts_with("MEAN,Two-row,"));
    assert!(lines[3].starts_with("MAX,Two-row,"));

    let out = bbqp(&["best-known", "show", "--registry", path_str(&registry)]);
    assert!(out.status.success());
    assert!(text(&out.stdout).contains(&toy_optimum().to_string()));
}

#[test]
fn medium_preset_writes_25_instances() {
    let dir = tempfile::tempdir().unwrap();
    let out = bbqp(&["generate", "--preset", "medium", "--seed", "3", "--out-dir", path_str(dir.path())]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let count = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "bbqp"))
        .count();
    assert_eq!(count, 25);
}

#[test]
fn generation_is_reproducible_and_rejects_infeasible_requests() {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<_> = ["a.bbqp", "b.bbqp"].iter().map(|f| dir.path().join(f)).collect();
    for f in &files {
        let out = bbqp(&["generate", "--family", "biclique", "--m", "20", "--n", "30", "--seed", "8", "--out", path_str(f)]);
        assert!(out.status.success(), "{}", text(&out.stderr));
    }
    assert_eq!(fs::read(&files[0]).unwrap(), fs::read(&files[1]).unwrap());

    let out = bbqp(&["generate", "--family", "biclique", "--m", "3", "--n", "4", "--out", path_str(&files[0])]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("biclique"));
}
