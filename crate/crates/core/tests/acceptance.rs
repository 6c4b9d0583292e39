//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Lines are written straight to the stdout handle so they show up even when
//! libtest captures `println!` output.

use ddf_core::classifier::{
    fit, gradient_check, persist, ClassifierKind, ClassifierSpec, FeatureMatrix, LogitsMatrix, View,
};
use ddf_core::fusion::{class_sse, fit_fusion_weights, FusionWeights, OneHotLabels};
use ddf_core::harness::{
    default_grid, prepare, run_experiment, step_csv, sweep_threshold, write_run, ExperimentConfig, Prepared,
    ResultsTable,
};
use ddf_core::ssl::{ddf_step, DataViews, Holdout, Method, SplitIds, SslConfig, SslState};
use ddf_core::tfr::{analytic_segment, compute_ckd_tfr, wvd, Tfr, TfrConfig};
use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::collections::HashSet;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[{tag}] criterion {id}: {name}: {detail}");
    let _ = out.flush();
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn full_resolution() -> TfrConfig {
    TfrConfig { downsample_factor: 1.0, ..Default::default() }
}

fn row(x: Vec<f64>) -> Array2<f64> {
    let n = x.len();
    Array2::from_shape_vec((1, n), x).unwrap()
}

// 1 ---------------------------------------------------------------------------

fn random_logits(rng: &mut ChaCha8Rng, n: usize, p: usize) -> LogitsMatrix {
    let mut m = Array2::from_shape_fn((n, p), |_| rng.random_range(0.01..1.0f64).powi(3));
    for mut col in m.columns_mut() {
        let s = col.sum();
        col /= s;
    }
    LogitsMatrix::new(m).unwrap()
}

/// Dense least squares through an SVD of the `P × 2` design matrix.
fn oracle_beta(yt: &LogitsMatrix, ytf: &LogitsMatrix, truth: &OneHotLabels, class: usize) -> Option<[f64; 2]> {
    let p = yt.sample_count();
    let a = DMatrix::from_fn(p, 2, |i, j| if j == 0 { yt.values()[[class, i]] } else { ytf.values()[[class, i]] });
    let b = DVector::from_fn(p, |i, _| truth.values()[[class, i]]);
    let svd = a.svd(true, true);
    if svd.rank(1e-10) < 2 {
        return None;
    }
    let x = svd.solve(&b, 1e-12).ok()?;
    Some([x[0], x[1]])
}

#[test]
fn criterion_1_fusion_least_squares_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let (mut worst_beta, mut worst_sse_excess) = (0.0f64, f64::NEG_INFINITY);
    let mut done = 0;
    while done < 100 {
        let n = rng.random_range(2..=5);
        let p = rng.random_range(2 * n.max(3)..=50);
        let yt = random_logits(&mut rng, n, p);
        let ytf = random_logits(&mut rng, n, p);
        let labels: Vec<usize> = (0..p).map(|i| if i < n { i } else { rng.random_range(0..n) }).collect();
        let truth = OneHotLabels::from_labels(&labels, n).unwrap();
        let oracle: Option<Vec<[f64; 2]>> = (0..n).map(|c| oracle_beta(&yt, &ytf, &truth, c)).collect();
        let Some(oracle) = oracle else { continue };
        let w = fit_fusion_weights(&yt, &ytf, &truth).unwrap();
        for (c, o) in oracle.iter().enumerate() {
            let got = [w.beta_time[c], w.beta_tf[c]];
            for k in 0..2 {
                worst_beta = worst_beta.max((got[k] - o[k]).abs() / o[k].abs().max(1.0));
            }
            let sse = class_sse(&yt, &ytf, &truth, c, got);
            let corner = class_sse(&yt, &ytf, &truth, c, [1.0, 0.0]).min(class_sse(&yt, &ytf, &truth, c, [0.0, 1.0]));
            worst_sse_excess = worst_sse_excess.max(sse - corner);
        }
        done += 1;
    }
    let elapsed = start.elapsed();
    let pass = worst_beta < 1e-8 && worst_sse_excess <= 1e-12 && elapsed < Duration::from_secs(5);
    verdict(
        1,
        "fusion weights match dense least squares",
        pass,
        format!(
            "100 instances, max |Δβ| {worst_beta:.2e} (< 1e-8), max SSE − best corner {worst_sse_excess:.2e} (<= 0), {:.3} s (< 5 s)",
            secs(elapsed)
        ),
    );
}

// 2 ---------------------------------------------------------------------------

#[test]
fn criterion_2_tfr_energy_conservation() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let mut worst = 0.0f64;
    for i in 0..100 {
        // Alternate broadband noise and random multi-tone mixtures.
        let x: Vec<f64> = if i % 2 == 0 {
            (0..256).map(|_| rng.sample(StandardNormal)).collect()
        } else {
            let tones: Vec<(f64, f64, f64)> = (0..3)
                .map(|_| (rng.random_range(0.02..0.45), rng.random_range(0.0..2.0 * PI), rng.random_range(0.2..2.0)))
                .collect();
            (0..256)
                .map(|t| tones.iter().map(|&(f, ph, a)| a * (2.0 * PI * f * t as f64 + ph).cos()).sum())
                .collect()
        };
        let seg = row(x);
        let reference = analytic_segment(seg.view()).unwrap().energy(0);
        for cfg in [full_resolution(), TfrConfig::default()] {
            let tfr = compute_ckd_tfr(seg.view(), 1.0, &cfg).unwrap();
            worst = worst.max((tfr.energy(0) - reference).abs() / reference);
        }
    }
    let elapsed = start.elapsed();
    let pass = worst < 0.02 && elapsed < Duration::from_secs(30);
    verdict(
        2,
        "CKD energy matches analytic-signal energy",
        pass,
        format!("100 segments × 2 resolutions, max relative error {:.3}% (< 2%), {:.2} s (< 30 s)", 100.0 * worst, secs(elapsed)),
    );
}

// 3 ---------------------------------------------------------------------------

fn ridge_deviation(tfr: &Tfr, expected: impl Fn(usize) -> f64) -> (f64, f64) {
    let ridge = tfr.ridge(0);
    let devs: Vec<f64> = ridge.iter().enumerate().map(|(t, &k)| (k as f64 - expected(t)).abs()).collect();
    let max = devs.iter().copied().fold(0.0, f64::max);
    (max, devs.iter().sum::<f64>() / devs.len() as f64)
}

#[test]
fn criterion_3_tone_and_chirp_localization() {
    let start = Instant::now();
    let n = 256;
    // Column k of an n-point distribution is frequency k / (2n) cycles/sample,
    // so DFT bin j of the signal lands on column 2j.
    let mut worst_tone = 0.0f64;
    for j in (1..=10).map(|i| 10 * i) {
        let x: Vec<f64> = (0..n).map(|t| (2.0 * PI * j as f64 * t as f64 / n as f64).cos()).collect();
        let tfr = compute_ckd_tfr(row(x).view(), 1.0, &full_resolution()).unwrap();
        worst_tone = worst_tone.max(ridge_deviation(&tfr, |_| 2.0 * j as f64).0);
    }
    let (f0, f1) = (0.05, 0.2);
    let rate = (f1 - f0) / n as f64;
    let x: Vec<f64> = (0..n)
        .map(|t| {
            let t = t as f64;
            (2.0 * PI * (f0 * t + 0.5 * rate * t * t)).cos()
        })
        .collect();
    let tfr = compute_ckd_tfr(row(x).view(), 1.0, &full_resolution()).unwrap();
    let (_, chirp_mean) = ridge_deviation(&tfr, |t| 2.0 * n as f64 * (f0 + rate * t as f64));
    let elapsed = start.elapsed();
    let pass = worst_tone <= 1.0 && chirp_mean < 2.0 && elapsed < Duration::from_secs(30);
    verdict(
        3,
        "tone and chirp localization",
        pass,
        format!(
            "10 tones, worst per-row offset {worst_tone} bins (<= 1); chirp mean ridge deviation {chirp_mean:.3} bins (< 2); {:.2} s",
            secs(elapsed)
        ),
    );
}

// 4 ---------------------------------------------------------------------------

#[test]
fn criterion_4_cross_term_suppression() {
    let start = Instant::now();
    let n = 256;
    let (j1, j2) = (20.0, 60.0);
    let x: Vec<f64> = (0..n)
        .map(|t| {
            let t = t as f64 / n as f64;
            (2.0 * PI * j1 * t).cos() + (2.0 * PI * j2 * t).cos()
        })
        .collect();
    let seg = row(x);
    let plain = wvd(seg.view(), 1.0).unwrap();
    let smooth = compute_ckd_tfr(seg.view(), 1.0, &full_resolution()).unwrap();
    // The interference term sits midway, around column j1 + j2.
    let mid = (j1 + j2) as usize;
    let band = |t: &Tfr| -> f64 {
        t.values[0].rows().into_iter().map(|r| r.slice(ndarray::s![mid - 10..=mid + 10]).mapv(f64::abs).sum()).sum()
    };
    let (e_wvd, e_ckd) = (band(&plain), band(&smooth));
    let reduction = 1.0 - e_ckd / e_wvd;
    let elapsed = start.elapsed();
    let pass = reduction > 0.5 && elapsed < Duration::from_secs(10);
    verdict(
        4,
        "CKD suppresses WVD cross-terms",
        pass,
        format!("mid-band |ℓ| mass {e_wvd:.3} → {e_ckd:.3}, reduction {:.1}% (> 50%), {:.2} s", 100.0 * reduction, secs(elapsed)),
    );
}

// 5 ---------------------------------------------------------------------------

#[test]
fn criterion_5_gradient_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(5005);
    let mut worst = [0.0f64; 2];
    for trial in 0..20 {
        let (p, d, classes) = (rng.random_range(5..20), rng.random_range(2..8), rng.random_range(2..5));
        let x = Array2::from_shape_fn((p, d), |_| rng.sample::<f64, _>(StandardNormal));
        let mut y: Vec<usize> = (0..p).map(|_| rng.random_range(0..classes)).collect();
        y[0] = classes - 1;
        let x = FeatureMatrix::new(x, View::Time).unwrap();
        for (slot, kind) in [ClassifierKind::SoftmaxRegression, ClassifierKind::Mlp].into_iter().enumerate() {
            let spec = ClassifierSpec {
                kind,
                hidden_units: rng.random_range(2..7),
                l2: if trial % 2 == 0 { 0.0 } else { 0.05 },
                init_scale: 0.3,
                seed: trial,
                ..Default::default()
            };
            worst[slot] = worst[slot].max(gradient_check(&spec, &x, &y).unwrap());
        }
    }
    let pass = worst.iter().all(|&w| w < 1e-4);
    verdict(
        5,
        "analytic gradients match central differences",
        pass,
        format!("20 instances each, max relative error softmax {:.2e}, MLP {:.2e} (< 1e-4)", worst[0], worst[1]),
    );
}

// 6 ---------------------------------------------------------------------------

fn random_views(rng: &mut ChaCha8Rng, per_class: usize, classes: usize) -> DataViews {
    let n = per_class * classes;
    let labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    let sep_t = rng.random_range(0.3..1.5);
    let sep_tf = rng.random_range(0.8..3.0);
    let mut view = |sep: f64, dim: usize| {
        Array2::from_shape_fn((n, dim), |(i, j)| {
            (if j % classes == labels[i] { sep } else { 0.0 }) + rng.sample::<f64, _>(StandardNormal)
        })
    };
    let time = view(sep_t, 6);
    let tf = view(sep_tf, 8);
    DataViews {
        time: FeatureMatrix::new(time, View::Time).unwrap(),
        tf: Some(FeatureMatrix::new(tf, View::Tf).unwrap()),
        labels,
        class_count: classes,
    }
}

#[test]
fn criterion_6_selection_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(6006);
    let mut steps_checked = 0;
    let mut accepted_total = 0;
    let mut violations = Vec::new();
    for run in 0..12 {
        let classes = rng.random_range(2..=5);
        let per_class = rng.random_range(30..60);
        let data = random_views(&mut rng, per_class, classes);
        // Shuffle within each class, then interleave so every tenth holds every class.
        let mut by_class: Vec<Vec<usize>> = (0..classes).map(|c| (c..data.len()).step_by(classes).collect()).collect();
        for ids in &mut by_class {
            for i in (1..ids.len()).rev() {
                ids.swap(i, rng.random_range(0..=i));
            }
        }
        let ids: Vec<usize> = (0..per_class).flat_map(|k| by_class.iter().map(move |c| c[k])).collect();
        let tenth = ids.len() / 10;
        let part = |k: usize| ids[k * tenth..(k + 1) * tenth].to_vec();
        let splits = SplitIds {
            labeled: part(0),
            unlabeled: (1..7).map(part).collect(),
            validation: part(7),
            test: ids[8 * tenth..].to_vec(),
        };
        let spec = ClassifierSpec { epochs: 40, seed: run, ..Default::default() };
        let cfg = SslConfig {
            xi: rng.random_range(0.0..0.9),
            steps: 7,
            repetitions: 1,
            seed: run,
            time_classifier: spec.clone(),
            tf_classifier: spec,
            ..Default::default()
        };
        let holdout = Holdout { validation: &splits.validation, test: &splits.test };
        let mut state = SslState::new(Method::Ddf, 0, &splits, &data).unwrap();
        let mut last_pool = 0;
        for step in 1..=cfg.steps {
            let next = (step > 1).then(|| state.pool.unlabeled_splits.remove(0));
            let (s, report) = ddf_step(state, next, &data, &cfg, holdout).unwrap();
            state = s;
            steps_checked += 1;
            let fresh: Vec<_> = state.pool.pseudo.iter().filter(|p| p.step == step).collect();
            accepted_total += fresh.len();
            let mut counts = vec![0; classes];
            for p in &fresh {
                counts[p.label] += 1;
                if p.confidence <= cfg.xi {
                    violations.push(format!("run {run} step {step}: confidence {} <= xi {}", p.confidence, cfg.xi));
                }
            }
            if counts.iter().any(|&c| c != counts[0]) {
                violations.push(format!("run {run} step {step}: unbalanced {counts:?}"));
            }
            if report.accepted != fresh.len() {
                violations.push(format!("run {run} step {step}: report says {} accepted", report.accepted));
            }
            let pool = &state.pool;
            let mut seen = HashSet::new();
            let all = pool
                .labeled
                .iter()
                .map(|&(i, _)| i)
                .chain(pool.pseudo.iter().map(|p| p.id))
                .chain(pool.pending.iter().copied())
                .chain(pool.unlabeled_splits.iter().flatten().copied());
            for id in all {
                if !seen.insert(id) {
                    violations.push(format!("run {run} step {step}: id {id} in two pools"));
                }
            }
            let size = pool.labeled.len() + pool.pseudo.len();
            if size < last_pool {
                violations.push(format!("run {run} step {step}: pool shrank"));
            }
            last_pool = size;
        }
    }
    let pass = violations.is_empty();
    verdict(
        6,
        "pseudo-label selection invariants",
        pass,
        format!(
            "12 randomized runs, {steps_checked} steps, {accepted_total} accepted pseudo-labels, {} violations{}",
            violations.len(),
            violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default()
        ),
    );
}

// 7 and 8 share the desk-scale dataset ----------------------------------------

fn desk_config() -> ExperimentConfig {
    ExperimentConfig {
        ssl: SslConfig { xi: 0.5, repetitions: 3, steps: 7, ..Default::default() },
        ..Default::default()
    }
}

fn desk_data() -> &'static Prepared {
    static DATA: OnceLock<Prepared> = OnceLock::new();
    DATA.get_or_init(|| prepare(&desk_config(), true).expect("desk dataset"))
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn criterion_7_desk_scale_experiment() {
    let start = Instant::now();
    let cfg = desk_config();
    let prepared = desk_data();
    assert_eq!(prepared.data.len(), 4 * 400);
    let ddf = run_experiment(Method::Ddf, &cfg, prepared).unwrap().reports();
    let st = run_experiment(Method::SelfTraining, &cfg, prepared).unwrap().reports();
    let ddf_final = mean(ddf.iter().map(|r| r.last().unwrap().test.fused));
    let ddf_first = mean(ddf.iter().map(|r| r[0].test.fused));
    let st_final = mean(st.iter().map(|r| r.last().unwrap().test.fused));
    let elapsed = start.elapsed();
    let margin = ddf_final - st_final;
    let pass = margin >= 0.03 && ddf_final >= ddf_first && elapsed < Duration::from_secs(600);
    verdict(
        7,
        "desk-scale DDF vs self-training",
        pass,
        format!(
            "4×400 clean, 3 reps, xi 0.5: DDF final {:.4} vs self-training final {:.4} (margin {:+.1} pp, need >= +3); DDF step 1 {:.4} -> step 7 {:.4}; {:.1} s (< 600 s)",
            ddf_final,
            st_final,
            100.0 * margin,
            ddf_first,
            ddf_final,
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_8_threshold_sweep() {
    let start = Instant::now();
    let cfg = desk_config();
    let prepared = desk_data();
    let first = sweep_threshold(&default_grid(), &cfg, prepared).unwrap();
    let second = sweep_threshold(&default_grid(), &cfg, prepared).unwrap();
    let rows = &first.rows;
    let xis: Vec<f64> = rows.iter().map(|r| r.xi).collect();
    let shape_ok = rows.len() == 10
        && xis == (0..10).map(|i| i as f64 / 10.0).collect::<Vec<_>>()
        && rows.iter().all(|r| r.repetitions == 3 && r.std >= 0.0 && (0.0..=1.0).contains(&r.mean))
        && rows.iter().filter(|r| r.selected).count() == 1;
    let deterministic = first.to_csv() == second.to_csv();
    let best = rows.iter().find(|r| r.selected).map(|r| (r.xi, r.mean)).unwrap_or_default();
    let elapsed = start.elapsed();
    let table: Vec<String> = rows.iter().map(|r| format!("{:.1}:{:.3}±{:.3}", r.xi, r.mean, r.std)).collect();
    verdict(
        8,
        "threshold sweep table",
        shape_ok && deterministic,
        format!(
            "{} rows [{}], selected xi {} ({:.4}); repeat run byte-identical: {deterministic}; {:.1} s",
            rows.len(),
            table.join(" "),
            best.0,
            best.1,
            secs(elapsed)
        ),
    );
}

// 9 ---------------------------------------------------------------------------

#[test]
fn criterion_9_determinism_and_serialization() {
    let cfg = ExperimentConfig {
        synth: Some(ddf_core::SynthSpec { segments_per_class: 60, seed: 9, ..Default::default() }),
        ssl: SslConfig { steps: 4, repetitions: 2, seed: 9, ..Default::default() },
        ..Default::default()
    };
    let mut problems = Vec::new();

    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let prepared = prepare(&cfg, true).unwrap();
        for method in [Method::Ddf, Method::SelfTraining] {
            write_run(dir.path(), &run_experiment(method, &cfg, &prepared).unwrap()).unwrap();
        }
    }
    let mut files = Vec::new();
    for entry in walk(dirs[0].path()) {
        let rel = entry.strip_prefix(dirs[0].path()).unwrap().to_path_buf();
        if std::fs::read(&entry).unwrap() != std::fs::read(dirs[1].path().join(&rel)).unwrap_or_default() {
            problems.push(format!("{} differs", rel.display()));
        }
        files.push(rel);
    }

    for name in ["ddf_results.csv", "self-training_results.csv"] {
        let text = std::fs::read_to_string(dirs[0].path().join(name)).unwrap();
        if ResultsTable::from_csv(&text).unwrap().to_csv() != text {
            problems.push(format!("{name} does not round-trip"));
        }
    }
    let steps = std::fs::read_to_string(dirs[0].path().join("ddf_steps.csv")).unwrap();
    if step_csv(&ddf_core::harness::parse_step_csv(&steps).unwrap()) != steps {
        problems.push("ddf_steps.csv does not round-trip".into());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(9009);
    let x = FeatureMatrix::new(Array2::from_shape_fn((40, 5), |_| rng.sample(StandardNormal)), View::Tf).unwrap();
    let y: Vec<usize> = (0..40).map(|i| i % 3).collect();
    let mut models = 0;
    for kind in [ClassifierKind::SoftmaxRegression, ClassifierKind::Mlp, ClassifierKind::Knn] {
        let model = fit(&ClassifierSpec { kind, epochs: 30, init_scale: 0.2, seed: 4, ..Default::default() }, &x, &y, 3).unwrap();
        let bytes = persist::to_bytes(&model);
        let back = persist::from_bytes(&bytes).unwrap();
        if back != model || persist::to_bytes(&back) != bytes {
            problems.push(format!("{kind:?} model does not round-trip"));
        }
        models += 1;
    }
    for _ in 0..50 {
        let n = rng.random_range(1..6);
        let w = FusionWeights {
            beta_time: (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) * 10f64.powi(rng.random_range(-12..12))).collect(),
            beta_tf: (0..n).map(|_| rng.random::<f64>()).collect(),
        };
        let back = FusionWeights::from_json(&w.to_json()).unwrap();
        let bits = |v: &[f64]| v.iter().map(|b| b.to_bits()).collect::<Vec<_>>();
        if bits(&back.beta_time) != bits(&w.beta_time) || bits(&back.beta_tf) != bits(&w.beta_tf) {
            problems.push("fusion weights do not round-trip".into());
            break;
        }
    }
    for rel in files.iter().filter(|f| f.extension().is_some_and(|e| e == "json")) {
        let text = std::fs::read_to_string(dirs[0].path().join(rel)).unwrap();
        if FusionWeights::from_json(&text).unwrap().to_json() != text {
            problems.push(format!("{} does not round-trip", rel.display()));
        }
    }

    verdict(
        9,
        "determinism and serialization round-trips",
        problems.is_empty(),
        format!(
            "{} output files compared across two runs, {models} model kinds, 50 weight sets; {} problems{}",
            files.len(),
            problems.len(),
            problems.first().map(|p| format!(" (first: {p})")).unwrap_or_default()
        ),
    );
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for path in entries {
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out
}
