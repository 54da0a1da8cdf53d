//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line.

use std::path::{Path, PathBuf};
use std::process::Command;

use misig_cli::data::{load_csv, CsvSpec};
use misig_core::audit::test_influence;
use misig_core::evt::{fit_gumbel_mle, EvdModel};
use misig_core::influence::{influence_set, update_after_removal};
use misig_core::model::fit_ols;
use misig_core::search::{exhaustive_most_influential, greedy_most_influential};
use misig_core::sim::{
    generate_synthetic, gumbel_estimation_study, shape_grid, shape_study, Dist, GumbelStudyConfig, SimConfig,
};
use misig_core::{AuditConfig, Dataset, Direction, SearchSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gumbel, StandardNormal};

fn report(id: u32, name: &str, pass: bool, detail: String) {
    println!("criterion {id} {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} {name} failed: {detail}");
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    Distribution::<f64>::sample(&StandardNormal, rng)
}

fn through_origin_data(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let slope = rng.random_range(-2.0..2.0);
    let x: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
    let y = x.iter().map(|v| slope * v + normal(rng)).collect();
    (x, y)
}

/// Slope of a through-origin regression over `rows`, computed directly.
fn slope(x: &[f64], y: &[f64], rows: impl Iterator<Item = usize> + Clone) -> f64 {
    let sxy: f64 = rows.clone().map(|i| x[i] * y[i]).sum();
    let sxx: f64 = rows.map(|i| x[i] * x[i]).sum();
    sxy / sxx
}

fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.last().map_or(0, |&l: &usize| l + 1);
            for i in start..n {
                let mut t: Vec<usize> = s.clone();
                t.push(i);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[test]
fn criterion_1_closed_form_matches_refit() {
    let started = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    let mut subsets = 0usize;
    for _ in 0..500 {
        let n = rng.random_range(8..=30);
        let (x, y) = through_origin_data(&mut rng, n);
        let fit = fit_ols(&Dataset::new(x.clone(), y.clone()).unwrap().with_intercept(false)).unwrap();
        let theta = slope(&x, &y, 0..n);
        let scale = theta.abs().max(1.0);
        for s in subsets_up_to(n, 3) {
            let closed = influence_set(&fit, &s).unwrap().delta;
            let refit = theta - slope(&x, &y, (0..n).filter(|i| !s.contains(i)));
            worst = worst.max((closed - refit).abs() / scale);
            subsets += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    report(
        1,
        "closed form vs refit",
        worst <= 1e-10 && secs < 60.0,
        format!("{subsets} subsets, max scaled error {worst:.3e} <= 1e-10, {secs:.1}s < 60s"),
    );
}

#[test]
fn criterion_2_recursion_matches_refit() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    let mut steps = 0usize;
    for _ in 0..200 {
        let n = rng.random_range(10..=50);
        let (x, y) = through_origin_data(&mut rng, n);
        let mut fit = fit_ols(&Dataset::new(x.clone(), y.clone()).unwrap().with_intercept(false)).unwrap();
        let theta = fit.theta_hat();
        let removals = rng.random_range(1..=n / 2);
        for _ in 0..removals {
            let j = rng.random_range(0..fit.n());
            fit = update_after_removal(&fit, j).unwrap();
            let kept = fit.rows().to_vec();
            let refit = slope(&x, &y, kept.iter().copied());
            worst = worst.max(((theta - fit.theta_hat()) - (theta - refit)).abs());
            for (pos, &row) in kept.iter().enumerate() {
                worst = worst.max((fit.residuals()[pos] - (y[row] - refit * x[row])).abs());
            }
            steps += 1;
        }
    }
    report(
        2,
        "recursive updates vs refit",
        worst <= 1e-10,
        format!("{steps} removals, max error {worst:.3e} <= 1e-10"),
    );
}

#[test]
fn criterion_3_greedy_quality() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut worst_ratio, mut exact) = (f64::INFINITY, 0usize);
    let instances = 200;
    for _ in 0..instances {
        let n = rng.random_range(8..=25);
        let k = rng.random_range(1..=3);
        let (x, y) = through_origin_data(&mut rng, n);
        let fit = fit_ols(&Dataset::new(x, y).unwrap().with_intercept(false)).unwrap();
        let greedy = greedy_most_influential(&fit, &SearchSpec::constant(k)).unwrap().delta;
        let best = exhaustive_most_influential(&fit, k, Direction::Maximize).unwrap().delta;
        let ratio = if best > 0.0 { greedy / best } else { 1.0 };
        worst_ratio = worst_ratio.min(ratio);
        if (greedy - best).abs() <= 1e-12 * best.abs().max(1.0) {
            exact += 1;
        }
    }
    let rate = exact as f64 / instances as f64;
    report(
        3,
        "greedy vs exhaustive",
        worst_ratio >= 0.99 && rate >= 0.95,
        format!("min ratio {worst_ratio:.4} >= 0.99, exact rate {rate:.3} >= 0.95"),
    );
}

#[test]
fn criterion_4_shape_convergence() {
    let targets = [0.0416, 0.1432, 0.1706, 0.2120];
    let cells = shape_study(&shape_grid(100, 200, 1000, 1)).unwrap();
    let mut pass = cells.len() == 4;
    let mut detail = Vec::new();
    let mut means = Vec::new();
    for (cell, target) in cells.iter().zip(targets) {
        let mean = cell.summary.map_or(f64::NAN, |s| s.mean);
        pass &= (mean - target).abs() <= 0.07 && cell.failure_rate() < 0.02;
        detail.push(format!(
            "{}-{} {mean:.4} vs {target} ±0.07, failures {:.1}%",
            cell.config.dist_x.name(),
            cell.config.dist_r.name(),
            100.0 * cell.failure_rate()
        ));
        means.push(mean);
    }
    let ordered = means.windows(2).all(|w| w[0] < w[1]);
    pass &= ordered;
    detail.push(format!("strict ordering {ordered}"));

    let big = SimConfig {
        reps: 200,
        seed: 1,
        ..SimConfig::new(Dist::StudentT(5.0), Dist::StudentT(5.0), 2000)
    };
    let tt = shape_study(&[big]).unwrap();
    let tt_mean = tt[0].summary.map_or(f64::NAN, |s| s.mean);
    pass &= (tt_mean - 0.21).abs() <= 0.03;
    detail.push(format!("t(5)-t(5) N=2000 {tt_mean:.4} in 0.21±0.03"));
    report(4, "GEV shape of maximal influence", pass, detail.join("; "));
}

#[test]
fn criterion_5_gumbel_recovery_and_block_bias() {
    let (a, b) = (1.0, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let law = Gumbel::new(a, b).unwrap();
    let sample: Vec<f64> = (0..10_000).map(|_| law.sample(&mut rng)).collect();
    let fit = fit_gumbel_mle(&sample).unwrap();
    let recovered = (fit.location - a).abs() <= 0.05 && (fit.scale - b).abs() <= 0.05;

    let config = GumbelStudyConfig::default();
    let study = gumbel_estimation_study(&config).unwrap();
    let [_, corrected, scale] = study.summaries();
    let corrected = corrected.map_or(f64::NAN, |s| s.mean);
    let scale = scale.map_or(f64::NAN, |s| s.mean);
    let pass = recovered && corrected.abs() <= 0.05 * config.scale && scale < 0.0;
    report(
        5,
        "Gumbel MLE recovery and block correction",
        pass,
        format!(
            "a {:.4} vs {a} ±0.05, b {:.4} vs {b} ±0.05, corrected bias {corrected:.4} within ±{}, scale bias {scale:.4} < 0",
            fit.location,
            fit.scale,
            0.05 * config.scale
        ),
    );
}

#[test]
fn criterion_6_p_value_at_location() {
    let mut worst = 0.0f64;
    for (a, b, m) in [(0.0, 1.0, 1), (0.37, 0.012, 40), (-3.0, 5.5, 64)] {
        let model = EvdModel::gumbel(a, b).unwrap().corrected_for_blocks(m);
        let p = model.sf(model.location);
        worst = worst.max((p - (1.0 - (-1.0f64).exp())).abs());
    }
    report(6, "p-value at corrected location", worst <= 1e-12, format!("max error {worst:.3e} <= 1e-12"));
}

#[test]
fn criterion_7_null_calibration() {
    let runs = 200u64;
    let base = SimConfig {
        seed: 77,
        ..SimConfig::new(Dist::Normal, Dist::Normal, 4000)
    };
    let mut rejections = 0usize;
    let mut failures = 0usize;
    for rep in 0..runs {
        let data = generate_synthetic(&base, rep).unwrap();
        let config = AuditConfig {
            seed: rep,
            ..AuditConfig::new(SearchSpec::constant(1)).with_alphas(vec![0.05])
        };
        match test_influence(&data, &config) {
            Ok(r) => rejections += usize::from(r.is_excessive(0.05) == Some(true)),
            Err(_) => failures += 1,
        }
    }
    let rate = rejections as f64 / runs as f64;
    report(
        7,
        "null calibration",
        (0.01..=0.12).contains(&rate) && failures == 0,
        format!("{rejections}/{runs} rejections = {rate:.3} in [0.01, 0.12], {failures} failed audits"),
    );
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn skipped(id: u32, name: &str, missing: &Path) {
    println!("criterion {id} {name}: SKIPPED(DATA-MISSING) ({} not found)", missing.display());
}

#[test]
fn criterion_8a_ruggedness_reproduction() {
    let path = data_dir().join("rugged.csv");
    if !path.exists() {
        skipped(8, "ruggedness audit", &path);
        return;
    }
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let controls: Vec<String> = reader
        .headers()
        .unwrap()
        .iter()
        .filter(|h| !["country", "log_gdp", "rugged"].contains(h))
        .map(String::from)
        .collect();
    let spec = CsvSpec {
        path,
        target: "log_gdp".into(),
        feature: "rugged".into(),
        controls,
        label: Some("country".into()),
        has_header: true,
        intercept: true,
    };
    let data = load_csv(&spec).unwrap();
    let row = data.labels().unwrap().iter().position(|l| l == "Seychelles").unwrap();
    let config = AuditConfig {
        pinned: Some(vec![row]),
        ..AuditConfig::new(SearchSpec::constant(1))
    };
    let r = test_influence(&data, &config).unwrap();
    let delta = r.observed.delta;
    report(
        8,
        "ruggedness audit",
        (delta - 0.077).abs() <= 0.001 && r.p_value < 0.001,
        format!("Seychelles delta {delta:.4} vs 0.077 ±0.001, p {:.3e} < 0.001", r.p_value),
    );
}

#[derive(serde::Deserialize)]
struct PinnedSets {
    feature: String,
    target: String,
    #[serde(default)]
    controls: Vec<String>,
    label: Option<String>,
    sets: Vec<PinnedSet>,
}

#[derive(serde::Deserialize)]
struct PinnedSet {
    rows: Vec<String>,
    delta: f64,
}

#[test]
fn criterion_8b_communities_reproduction() {
    let path = data_dir().join("communities.csv");
    let sets_path = data_dir().join("communities_sets.json");
    for p in [&path, &sets_path] {
        if !p.exists() {
            skipped(8, "communities pinned sets", p);
            return;
        }
    }
    let sets: PinnedSets = serde_json::from_str(&std::fs::read_to_string(&sets_path).unwrap()).unwrap();
    let spec = CsvSpec {
        path,
        target: sets.target.clone(),
        feature: sets.feature.clone(),
        controls: sets.controls.clone(),
        label: sets.label.clone(),
        has_header: true,
        intercept: true,
    };
    let data = load_csv(&spec).unwrap();
    let fit = fit_ols(&data).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for set in &sets.sets {
        let rows: Vec<usize> = set
            .rows
            .iter()
            .map(|r| match data.labels().and_then(|l| l.iter().position(|v| v == r)) {
                Some(i) => i,
                None => r.parse().unwrap(),
            })
            .collect();
        let delta = influence_set(&fit, &rows).unwrap().delta;
        pass &= (delta - set.delta).abs() <= 0.001;
        detail.push(format!("{:?} {delta:.4} vs {} ±0.001", set.rows, set.delta));
    }
    report(8, "communities pinned sets", pass, detail.join("; "));
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_misig")).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

#[test]
fn criterion_9_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut text = String::from("id,x,z,y\n");
    for i in 0..600 {
        let (x, z) = (normal(&mut rng), normal(&mut rng));
        text += &format!("p{i},{x},{z},{}\n", 0.5 * x - 0.2 * z + normal(&mut rng));
    }
    std::fs::write(&csv, text).unwrap();
    let csv = csv.to_str().unwrap();
    let data = ["--csv", csv, "--feature", "x", "--target", "y", "--controls", "z", "--label", "id"];
    let commands: Vec<Vec<&str>> = vec![
        [&["fit"][..], &data].concat(),
        [&["influence"][..], &data].concat(),
        [&["search"][..], &data, &["--k", "3"]].concat(),
        [&["audit"][..], &data, &["--seed", "9"]].concat(),
        [&["audit"][..], &data, &["--p", "0.01", "--two-sided"]].concat(),
        [&["thresholds"][..], &data, &["--grid-points", "11"]].concat(),
        vec!["simulate", "--table", "shape", "--n", "60", "--reps", "5", "--draws", "40"],
        vec!["simulate", "--table", "gumbel", "--reps", "5"],
    ];
    let mut mismatched = Vec::new();
    for args in &commands {
        let (a, b) = (run_cli(args), run_cli(args));
        let a_json: serde_json::Value = serde_json::from_slice(&a).unwrap();
        if a != b || a_json.is_null() {
            mismatched.push(args[0]);
        }
    }
    report(
        9,
        "deterministic output",
        mismatched.is_empty(),
        format!("{} commands rerun, mismatches {mismatched:?}", commands.len()),
    );
}
