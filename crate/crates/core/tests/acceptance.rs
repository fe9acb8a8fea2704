// Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
// and exits non-zero if any fails.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use stockaug::augment::{
    augment_dataset, convolve, dtw_align, jitter, magnify, magnify_with_fraction, pool, quantize, reverse, spawner,
    time_warp, AugmentParams, Method, NoiseScale, Sample,
};
use stockaug::backtest::{perfect_foresight, run_backtest, BacktestConfig, DailyPrediction};
use stockaug::classifier::{accuracy, train, Architecture, ModelParams, TrainConfig};
use stockaug::experiment::{read_predictions_csv, run, ExperimentPlan, RunRecord};
use stockaug::interp::InterpKind;
use stockaug::metrics::{annualize, downside_ir, information_ratio};
use stockaug::pipeline::{
    label_panel, make_splits, prepare_split, segment_windows, synth_panel, train_val_split, SplitPlan, SynthParams,
    Universe,
};
use stockaug::{RngStream, Series};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

// ---------------------------------------------------------------- 1

/// Daily series whose annualized mean and volatility are exactly the targets.
fn series_with(ann_ret_pct: f64, ann_vol_pct: f64, n: usize) -> Vec<f64> {
    let mut rng = RngStream::new(1).rng();
    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let m = z.iter().sum::<f64>() / n as f64;
    let s = (z.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let mu = ann_ret_pct / 100.0 / 252.0;
    let sd = ann_vol_pct / 100.0 / 252f64.sqrt();
    z.iter().map(|v| mu + sd * (v - m) / s).collect()
}

/// Two-point daily series with the target mean and downside deviation.
fn series_with_downside(ann_ret_pct: f64, d_risk_pct: f64, n: usize) -> Vec<f64> {
    let mu = ann_ret_pct / 100.0 / 252.0;
    let dd = d_risk_pct / 100.0 / 252f64.sqrt();
    // half the days lose b, half gain a: dd = b / sqrt(2), mean = (a - b) / 2
    let b = dd * 2f64.sqrt();
    let a = 2.0 * mu + b;
    (0..n).map(|i| if i % 2 == 0 { a } else { -b }).collect()
}

fn criterion_1() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for (ret, vol, want) in [(34.64, 28.43, 1.22), (46.56, 29.41, 1.58), (47.01, 29.26, 1.61)] {
        let xs = series_with(ret, vol, 1000);
        let (r, v) = annualize(&xs).unwrap();
        let ir = information_ratio(&xs).unwrap();
        let good = (ir - want).abs() <= 0.01 && (r - ret).abs() < 1e-9 && (v - vol).abs() < 1e-9;
        ok &= good;
        notes.push(format!("IR {ir:.4} vs {want}"));
    }
    let xs = series_with_downside(34.64, 18.78, 1000);
    let (risk, dir) = downside_ir(&xs).unwrap();
    let good = (dir - 1.84).abs() <= 0.01 && (risk - 18.78).abs() < 1e-9;
    ok &= good;
    notes.push(format!("DIR {dir:.4} vs 1.84"));
    verdict(ok, notes.join(", "))
}

// ---------------------------------------------------------------- 2

/// Every monotone path from (0, 0) to (la - 1, lb - 1), as flat cell indices into a 6-wide grid.
fn all_paths(la: usize, lb: usize) -> Vec<Vec<u8>> {
    fn go(i: usize, j: usize, la: usize, lb: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        cur.push((i * 6 + j) as u8);
        if i + 1 == la && j + 1 == lb {
            out.push(cur.clone());
        } else {
            if i + 1 < la && j + 1 < lb {
                go(i + 1, j + 1, la, lb, cur, out);
            }
            if i + 1 < la {
                go(i + 1, j, la, lb, cur, out);
            }
            if j + 1 < lb {
                go(i, j + 1, la, lb, cur, out);
            }
        }
        cur.pop();
    }
    let mut out = Vec::new();
    go(0, 0, la, lb, &mut Vec::new(), &mut out);
    out
}

fn all_series(len: usize) -> Vec<Vec<f64>> {
    (0..3usize.pow(len as u32))
        .map(|mut code| {
            (0..len)
                .map(|_| {
                    let v = (code % 3) as f64;
                    code /= 3;
                    v
                })
                .collect()
        })
        .collect()
}

fn criterion_2() -> Verdict {
    let series: Vec<Vec<Vec<f64>>> = (0..=6).map(all_series).collect();
    let mut pairs = 0usize;
    let mut mismatches = 0usize;
    for la in 1..=6 {
        for lb in 1..=6 {
            let paths = all_paths(la, lb);
            for a in &series[la] {
                for b in &series[lb] {
                    let mut cell = [0u32; 36];
                    for i in 0..la {
                        for j in 0..lb {
                            cell[i * 6 + j] = (a[i] - b[j]).abs() as u32;
                        }
                    }
                    let brute = paths
                        .iter()
                        .map(|p| p.iter().map(|&c| cell[c as usize]).sum::<u32>())
                        .min()
                        .unwrap();
                    let got = dtw_align(a, b, None, 1.0).unwrap().cost;
                    if got != brute as f64 {
                        mismatches += 1;
                    }
                    pairs += 1;
                }
            }
        }
    }
    verdict(mismatches == 0, format!("{pairs} pairs, {mismatches} mismatches"))
}

// ---------------------------------------------------------------- 3

fn worst_rel_error(params: &ModelParams, samples: &[Sample]) -> f64 {
    let refs: Vec<&Sample> = samples.iter().collect();
    let (_, grad) = params.loss_and_grad(&refs).unwrap();
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    for k in 0..params.weights.len() {
        let mut plus = params.clone();
        plus.weights[k] += step;
        let mut minus = params.clone();
        minus.weights[k] -= step;
        let fd = (plus.loss_and_grad(&refs).unwrap().0 - minus.loss_and_grad(&refs).unwrap().0) / (2.0 * step);
        let denom = grad[k].abs().max(fd.abs()).max(1e-7);
        worst = worst.max((grad[k] - fd).abs() / denom);
    }
    worst
}

fn random_batch(len: usize, n: usize, stream: &RngStream) -> Vec<Sample> {
    let mut rng = stream.rng();
    (0..n)
        .map(|_| Sample {
            values: Series::new((0..len).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap(),
            label: rng.random_range(0..2u8),
        })
        .collect()
}

fn criterion_3() -> Verdict {
    let mut worst_lstm: f64 = 0.0;
    let mut worst_logit: f64 = 0.0;
    for draw in 0..25u64 {
        let s = RngStream::new(300 + draw);
        let data = random_batch(12, 4, &s.derive_named("data"));
        let lstm = ModelParams::init(Architecture::lstm(12, 4), &s.derive_named("lstm"));
        worst_lstm = worst_lstm.max(worst_rel_error(&lstm, &data));
        let logit = ModelParams::init(Architecture::logistic(12), &s.derive_named("logit"));
        worst_logit = worst_logit.max(worst_rel_error(&logit, &data));
    }
    verdict(
        worst_lstm < 1e-4 && worst_logit < 1e-4,
        format!("worst relative error: LSTM {worst_lstm:.2e}, logistic {worst_logit:.2e}"),
    )
}

// ---------------------------------------------------------------- 4

fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn criterion_4() -> Verdict {
    let params = AugmentParams::default();
    let names = [
        "magnify", "reverse", "jitter", "pool", "quantize", "convolve", "time_warp", "spawner", "magnify+time_warp",
    ];
    let methods: Vec<Method> = names.iter().map(|n| Method::from_name(n, &params).unwrap()).collect();
    let mut failures: HashMap<&str, usize> = HashMap::new();
    let mut fail = |what: &'static str, ok: bool| {
        if !ok {
            *failures.entry(what).or_default() += 1;
        }
    };
    let root = RngStream::new(4000);
    for case in 0..1000u64 {
        let s = root.derive(case);
        let mut rng = s.derive_named("input").rng();
        let len = rng.random_range(3..=512);
        let scale: f64 = rng.random_range(0.01..10.0);
        let x = Series::new((0..len).map(|_| scale * normal(&mut rng)).collect::<Vec<f64>>()).unwrap();
        let peer = Series::new((0..len).map(|_| scale * normal(&mut rng)).collect::<Vec<f64>>()).unwrap();
        let c: f64 = rng.random_range(-5.0..5.0);
        let flat = Series::new(vec![c; len]).unwrap();

        for (k, m) in methods.iter().enumerate() {
            let spec = stockaug::augment::AugmentSpec {
                method: m.clone(),
                rng: s.derive(k as u64),
            };
            let res = stockaug::augment::apply(&spec, &x, &|_| Ok(peer.clone()));
            if names[k] == "convolve" && len < params.convolve_kernel {
                // kernel longer than the series is a documented error
                fail("short convolve rejected", matches!(res, Err(stockaug::Error::InvalidKernel { .. })));
                continue;
            }
            let y = res.unwrap();
            fail("length", y.len() == len);
            fail("finite", y.iter().all(|v| v.is_finite()));
        }

        // identity limits
        fail("jitter(0)", close(&jitter(&x, 0.0, &s).unwrap(), &x, 0.0));
        fail("time_warp(0)", close(&time_warp(&x, 4, 0.0, &s).unwrap(), &x, 1e-12 * scale.max(1.0)));
        fail("magnify(1)", close(&magnify_with_fraction(&x, 1.0, InterpKind::Linear).unwrap(), &x, 1e-12 * scale.max(1.0)));
        fail("magnify[1,1]", close(&magnify(&x, 1.0, 1.0, InterpKind::Cubic, &s).unwrap(), &x, 1e-12 * scale.max(1.0)));
        fail("quantize(const)", close(&quantize(&flat, 25).unwrap(), &flat, 0.0));
        fail("pool(const)", close(&pool(&flat, 3).unwrap(), &flat, 1e-12));
        let kernel = 7.min(if len % 2 == 1 { len } else { len - 1 });
        fail("convolve(const)", close(&convolve(&flat, kernel).unwrap(), &flat, 1e-12));
        fail("reverse twice", close(&reverse(&reverse(&x)), &x, 0.0));

        // idempotence
        let q = quantize(&x, 25).unwrap();
        fail("quantize idempotent", close(&quantize(&q, 25).unwrap(), &q, 0.0));

        // endpoints
        let w = time_warp(&x, 4, 0.2, &s.derive_named("tw")).unwrap();
        let tol = 1e-9 * scale.max(1.0);
        fail("time_warp endpoints", (w.first() - x.first()).abs() <= tol && (w.last() - x.last()).abs() <= tol);
        let mg = magnify(&x, 0.4, 0.8, InterpKind::Linear, &s.derive_named("mg")).unwrap();
        fail("magnify end", (mg.last() - x.last()).abs() <= tol);
        let sp = spawner(&x, &peer, 0.0, NoiseScale::Absolute, 0.1, &s.derive_named("sp")).unwrap();
        fail(
            "spawner endpoints",
            (sp.first() - 0.5 * (x.first() + peer.first())).abs() <= tol
                && (sp.last() - 0.5 * (x.last() + peer.last())).abs() <= tol,
        );

        // anchored DTW is never cheaper
        if len <= 64 {
            let free = dtw_align(&x, &peer, None, 1.0).unwrap().cost;
            let p = rng.random_range(0..len);
            let anchored = dtw_align(&x, &peer, Some((p, p)), 1.0).unwrap().cost;
            fail("anchored >= free", anchored >= free - 1e-12);
        }
    }

    // label preservation over datasets
    for case in 0..1000u64 {
        let s = RngStream::new(5000 + case);
        let mut rng = s.rng();
        let n = rng.random_range(4..12);
        let len = rng.random_range(7..40);
        let mut data: Vec<Sample> = (0..n)
            .map(|i| Sample {
                values: Series::new((0..len).map(|_| normal(&mut rng)).collect::<Vec<f64>>()).unwrap(),
                label: (i % 2) as u8,
            })
            .collect();
        data.rotate_left(rng.random_range(0..n));
        let m = &methods[case as usize % methods.len()];
        let out = augment_dataset(&data, m, &s.derive(1), 1).unwrap();
        let want: Vec<u8> = data.iter().chain(&data).map(|d| d.label).collect();
        fail("labels", out.iter().map(|d| d.label).collect::<Vec<_>>() == want);
    }

    let mut f: Vec<String> = failures.iter().map(|(k, v)| format!("{k}: {v}")).collect();
    f.sort();
    if f.is_empty() {
        verdict(true, "1000 random inputs per property, no violations")
    } else {
        verdict(false, f.join(", "))
    }
}

// ---------------------------------------------------------------- 5

fn criterion_5() -> Verdict {
    let full = SplitPlan::full();
    let n_splits = make_splits(7000, &full).unwrap().len();
    let mut counts = Vec::new();
    for n_stocks in [500, 50] {
        let panel = synth_panel(
            &SynthParams {
                n_stocks,
                n_days: 1000,
                ..SynthParams::default()
            },
            &RngStream::new(5),
        )
        .unwrap();
        let split = &make_splits(panel.n_days(), &full).unwrap()[0];
        let labels = label_panel(&panel).unwrap();
        counts.push(segment_windows(&panel, split, &labels, full.window_length).train.len());
    }
    verdict(
        n_splits == 25 && counts == [255_000, 25_500],
        format!("{n_splits} splits, {} windows (500 stocks), {} windows (50 stocks)", counts[0], counts[1]),
    )
}

// ---------------------------------------------------------------- 6

fn criterion_6() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let plan = ExperimentPlan {
        output: tmp.path().join("first"),
        ..ExperimentPlan::desk()
    };
    let panel = plan.data.load(plan.seed).unwrap();
    let splits = make_splits(panel.n_days(), &plan.splits).unwrap();
    let mut notes = Vec::new();

    // signal strength check: a logistic model on the same windows
    let logit_cfg = TrainConfig {
        learning_rate: 0.01,
        max_epochs: 30,
        patience: 5,
        ..TrainConfig::default()
    };
    let mut oracle = Vec::new();
    for split in &splits {
        let p = prepare_split(&panel, split, &plan.splits, Universe::Full).unwrap();
        let samples: Vec<Sample> = p.train_windows().iter().map(|w| w.to_sample()).collect();
        let test: Vec<Sample> = p.test_windows().iter().map(|w| w.to_sample()).collect();
        let s = RngStream::new(plan.seed).derive_named("oracle").derive(split.index as u64);
        let (tr, va) = train_val_split(&samples, 0.8, &s.derive_named("shuffle")).unwrap();
        let (m, _) = train(Architecture::logistic(plan.splits.window_length), &tr, &va, &logit_cfg, &s).unwrap();
        oracle.push(100.0 * accuracy(&m, &test).unwrap());
    }
    let oracle_acc = oracle.iter().sum::<f64>() / oracle.len() as f64;
    let oracle_ok = oracle_acc >= 55.0;
    notes.push(format!("logistic oracle {oracle_acc:.2}%"));

    let t = Instant::now();
    let first = run(&plan).unwrap();
    let elapsed = t.elapsed();
    let i = first.failures.is_empty() && first.records.len() == 16 && elapsed < Duration::from_secs(30 * 60);
    notes.push(format!("(i) 16 runs in {:.0}s", elapsed.as_secs_f64()));

    let none = first.summary.rows.iter().find(|r| r.spec == "none").unwrap();
    let ii = none.report.acc_mean > 52.0;
    notes.push(format!("(ii) none accuracy {:.2}%", none.report.acc_mean));

    let mut net = Vec::new();
    for split in &splits {
        let preds = perfect_foresight(&panel, split.test.start - 1..split.test.end - 1);
        net.extend(run_backtest(&preds, &panel, &plan.backtest).unwrap().net_returns());
    }
    let pf_ir = information_ratio(&net).unwrap();
    let iii = pf_ir > 1.0;
    notes.push(format!("(iii) perfect-foresight IR {pf_ir:.2}"));

    let zero_cost = BacktestConfig {
        cost_bps: 0.0,
        ..plan.backtest.clone()
    };
    let mut days = 0;
    let mut iv = true;
    for split in &splits {
        let (preds, _) = read_predictions_csv(&plan.run_dir("none", split.index).join("predictions.csv")).unwrap();
        let inverted: Vec<DailyPrediction> = preds
            .iter()
            .map(|p| DailyPrediction {
                prob_up: 1.0 - p.prob_up,
                ..p.clone()
            })
            .collect();
        let a = run_backtest(&preds, &panel, &zero_cost).unwrap().gross_returns();
        let b = run_backtest(&inverted, &panel, &zero_cost).unwrap().gross_returns();
        iv &= a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| (-x).to_bits() == y.to_bits());
        days += a.len();
    }
    notes.push(format!("(iv) {days} days negated exactly: {iv}"));

    let rerun_plan = ExperimentPlan {
        output: tmp.path().join("second"),
        workers: 3,
        ..plan.clone()
    };
    let second = run(&rerun_plan).unwrap();
    let key = |r: &RunRecord| (r.spec.clone(), r.split);
    let mut a = first.records.clone();
    let mut b = second.records.clone();
    a.sort_by_key(key);
    b.sort_by_key(key);
    let same_bits = |x: &[f64], y: &[f64]| x.len() == y.len() && x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits());
    let v = a.len() == b.len()
        && a.iter().zip(&b).all(|(x, y)| {
            x == y && same_bits(&x.net, &y.net) && x.accuracy.to_bits() == y.accuracy.to_bits()
        })
        && std::fs::read(plan.output.join("summary.json")).unwrap()
            == std::fs::read(rerun_plan.output.join("summary.json")).unwrap()
        && std::fs::read(plan.run_dir("time_warp", 2).join("model.json")).unwrap()
            == std::fs::read(rerun_plan.run_dir("time_warp", 2).join("model.json")).unwrap();
    notes.push(format!("(v) rerun bit-identical: {v}"));

    verdict(oracle_ok && i && ii && iii && iv && v, notes.join("; "))
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Verdict {
    let mut checked = 0;
    let mut ok = true;
    for (n_stocks, n_days, plan) in [(50, 1250, SplitPlan::desk()), (20, 1750, SplitPlan::full())] {
        let panel = synth_panel(
            &SynthParams {
                n_stocks,
                n_days,
                ..SynthParams::default()
            },
            &RngStream::new(7),
        )
        .unwrap();
        for split in make_splits(panel.n_days(), &plan).unwrap() {
            let p = prepare_split(&panel, &split, &plan, Universe::Full).unwrap();
            for set in [&p.windows.train, &p.windows.test] {
                let ups = set.iter().filter(|w| w.label == 1).count();
                ok &= 2 * ups == set.len();
                checked += 1;
            }
        }
    }
    verdict(ok, format!("{checked} window sets, each exactly half positive: {ok}"))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 7] = [
        ("metric ratio identity", criterion_1),
        ("DTW equals brute-force enumeration", criterion_2),
        ("gradient checks", criterion_3),
        ("augmentation invariants", criterion_4),
        ("pipeline counts", criterion_5),
        ("desk-scale end to end", criterion_6),
        ("balanced labels", criterion_7),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let n = n + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let t = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {n} [{}] {name}: {} ({:.1}s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
