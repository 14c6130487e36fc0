//! Acceptance suite: one test per shipping criterion, each with its own
//! independent oracle or hand-computed expectation. Tolerances are part
//! of the contract and are asserted, not logged.

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;

use modelsum::complexity::{interaction_strength, sparsity};
use modelsum::data::{make_task, Column, Frame, Task, Truth};
use modelsum::effects::{ale, build_grid, pdp, EffectCurve, GridPoints};
use modelsum::fairness::{evaluate_fairness, FairnessMeasure};
use modelsum::importance::pfi;
use modelsum::learner::{fit, Learner, ModelOutput, OutputKind, Prediction};
use modelsum::metrics::{aggregate, evaluate, measure, AggregationMode};
use modelsum::resampling::{resample, split, ResamplingStrategy};
use modelsum::seed;
use modelsum::table::{FeatureTable, TableModel};
use modelsum::{
    render_json, render_text, simulate, simulate_task, summarize, BenchSpec, SummaryControl,
    TaskType,
};

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Least-squares slope of y over x.
fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let (xb, yb) = (mean(x), mean(y));
    let mut num = 0.0;
    let mut den = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        num += (xi - xb) * (yi - yb);
        den += (xi - xb) * (xi - xb);
    }
    num / den
}

#[test]
fn criterion_01_auc_matches_the_all_pairs_oracle() {
    let start = Instant::now();
    let mut r = seed::rng(101);
    for instance in 0..200 {
        let n = 2 + r.random_range(0..199usize);
        // Quantized scores force plenty of ties.
        let scores: Vec<f64> = (0..n)
            .map(|_| (r.random::<f64>() * 10.0).round() / 10.0)
            .collect();
        let mut codes: Vec<u32> = (0..n).map(|_| r.random_range(0..2u32)).collect();
        codes[0] = 0;
        codes[1] = 1;
        let prediction = Prediction {
            row_ids: (0..n).collect(),
            levels: vec!["neg".to_string(), "pos".to_string()],
            response: None,
            probabilities: Some(scores.iter().flat_map(|&s| [1.0 - s, s]).collect()),
            labels: Some(scores.iter().map(|&s| u32::from(s >= 0.5)).collect()),
        };
        let truth = Truth::Classes(codes.clone());
        let auc = evaluate(measure("auc").unwrap(), &prediction, &truth, Some(1))
            .unwrap()
            .value
            .unwrap();
        // Oracle: average pairwise win rate with ties worth one half.
        let mut pairs = 0.0;
        let mut wins = 0.0;
        for i in 0..n {
            if codes[i] != 1 {
                continue;
            }
            for j in 0..n {
                if codes[j] != 0 {
                    continue;
                }
                pairs += 1.0;
                wins += if scores[i] > scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
        let oracle = wins / pairs;
        assert!(
            (auc - oracle).abs() <= 1e-12,
            "instance {instance}: auc {auc} vs oracle {oracle}"
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "took {elapsed:.2}s, budget 5s");
}

#[test]
fn criterion_02_pdp_matches_the_row_averaging_oracle_bitwise() {
    let mut r = seed::rng(202);
    for instance in 0..50 {
        let n = 2 + r.random_range(0..49usize);
        let p = 1 + r.random_range(0..4usize);
        let cat_col = if p > 1 && r.random::<f64>() < 0.4 {
            Some(p - 1)
        } else {
            None
        };
        let mut columns = Vec::new();
        for j in 0..p {
            let name = format!("f{j}");
            if Some(j) == cat_col {
                let levels = vec!["u".to_string(), "v".to_string(), "w".to_string()];
                let codes: Vec<u32> = (0..n).map(|_| r.random_range(0..3u32)).collect();
                columns.push(Column::categorical(name, codes, levels).unwrap());
            } else {
                let values: Vec<f64> = (0..n).map(|_| r.random::<f64>() * 4.0 - 2.0).collect();
                columns.push(Column::numeric(name, values));
            }
        }
        columns.push(Column::numeric("y", (0..n).map(|i| i as f64).collect()));
        let task = make_task(Frame::new(columns).unwrap(), "y", None, None).unwrap();

        let coefs: Vec<f64> = (0..p).map(|_| r.random::<f64>() * 4.0 - 2.0).collect();
        let quads: Vec<f64> = (0..p).map(|_| r.random::<f64>() - 0.5).collect();
        let model = move |t: &FeatureTable| -> Vec<f64> {
            (0..t.n_rows())
                .map(|i| {
                    let mut acc = 0.0;
                    for j in 0..t.n_features() {
                        let x = t.get(i, j);
                        acc += coefs[j] * x + quads[j] * x * x;
                    }
                    acc
                })
                .collect()
        };

        let g = 2 + r.random_range(0..9usize);
        let j = r.random_range(0..p);
        let feature = format!("f{j}");
        let grid = Arc::new(build_grid(&task, &feature, g).unwrap());
        let all: Vec<usize> = (0..n).collect();
        let table = FeatureTable::from_task(&task, &all);
        let curve = pdp(&model, &table, &grid, "response", 0).unwrap();

        // Oracle: predict one row at a time in row order and average.
        for k in 0..grid.len() {
            let raw = match &grid.points {
                GridPoints::Numeric(pts) => pts[k],
                GridPoints::Levels(_) => k as f64,
            };
            let mut scratch = table.clone();
            scratch.fill_column(j, raw);
            let mut sum = 0.0;
            for i in 0..n {
                sum += model(&scratch.select_rows(&[i]))[0];
            }
            let expected = sum / n as f64;
            assert_eq!(
                curve.values[k].to_bits(),
                expected.to_bits(),
                "instance {instance}, point {k}: {} vs {expected}",
                curve.values[k]
            );
        }
    }
}

#[test]
fn criterion_03_ale_recovers_centered_linear_effects() {
    let mut r = seed::rng(303);
    for instance in 0..100 {
        // Few enough rows that the grid keeps every unique value, so no
        // interval is empty.
        let n = 5 + r.random_range(0..14usize);
        let p = 1 + r.random_range(0..3usize);
        let mut columns = Vec::new();
        for j in 0..p {
            let values: Vec<f64> = (0..n).map(|_| r.random::<f64>() * 4.0 - 2.0).collect();
            columns.push(Column::numeric(format!("f{j}"), values));
        }
        columns.push(Column::numeric("y", (0..n).map(|i| i as f64).collect()));
        let task = make_task(Frame::new(columns).unwrap(), "y", None, None).unwrap();

        let mut coefs: Vec<f64> = (0..p).map(|_| r.random::<f64>() * 6.0 - 3.0).collect();
        let zero_j = r.random_range(0..p);
        coefs[zero_j] = 0.0;
        let intercept = r.random::<f64>() * 2.0;
        let c = coefs.clone();
        let model = move |t: &FeatureTable| -> Vec<f64> {
            (0..t.n_rows())
                .map(|i| {
                    intercept + (0..t.n_features()).map(|j| c[j] * t.get(i, j)).sum::<f64>()
                })
                .collect()
        };

        let all: Vec<usize> = (0..n).collect();
        let table = FeatureTable::from_task(&task, &all);
        for j in 0..p {
            let grid = Arc::new(build_grid(&task, &format!("f{j}"), 20).unwrap());
            let curve = ale(&model, &table, &grid, "response", 0).unwrap();
            assert!(curve.empty_intervals.is_empty(), "instance {instance}");
            let pts = grid.numeric_points().unwrap();
            let xbar = mean(&(0..n).map(|i| table.get(i, j)).collect::<Vec<f64>>());
            for (k, &g) in pts.iter().enumerate() {
                if coefs[j] == 0.0 {
                    assert_eq!(
                        curve.values[k], 0.0,
                        "instance {instance}: independent feature must be exactly zero"
                    );
                } else {
                    let expected = coefs[j] * (g - xbar);
                    assert!(
                        (curve.values[k] - expected).abs() <= 1e-9,
                        "instance {instance}, feature {j}, point {k}: {} vs {expected}",
                        curve.values[k]
                    );
                }
            }
        }
    }
}

#[test]
fn criterion_04_linear_effects_on_simulated_data_have_slope_four() {
    let start = Instant::now();
    let task = simulate_task(2000, 10, 20_240_801, 0.1).unwrap();
    let all: Vec<usize> = (0..2000).collect();
    let model = fit(&Learner::parse("linear").unwrap(), &task, &all, 1).unwrap();
    let table = FeatureTable::from_frame(task.frame(), &all, model.shared_schema()).unwrap();
    let grid = Arc::new(build_grid(&task, "x1", 20).unwrap());
    let output = ModelOutput {
        model: &model,
        kind: OutputKind::Response,
    };
    let pts = grid.numeric_points().unwrap().to_vec();
    let pdp_curve = pdp(&output, &table, &grid, "response", 0).unwrap();
    let ale_curve = ale(&output, &table, &grid, "response", 0).unwrap();
    for (name, curve) in [("pdp", &pdp_curve), ("ale", &ale_curve)] {
        let slope = ls_slope(&pts, &curve.values);
        assert!(
            (slope - 4.0).abs() <= 0.2,
            "{name} slope {slope} not within 4 +- 0.2"
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "took {elapsed:.2}s, budget 10s");
}

/// Per-fold interaction strength of every stored model on its test rows.
fn fold_ias(task: &Task, rr: &modelsum::ResampleResult) -> Vec<f64> {
    rr.iterations
        .iter()
        .map(|it| {
            let model = it.model.as_ref().unwrap();
            let table =
                FeatureTable::from_frame(task.frame(), &it.test, model.shared_schema()).unwrap();
            let output = ModelOutput {
                model,
                kind: OutputKind::Response,
            };
            let curves: Vec<EffectCurve> = task
                .feature_names
                .iter()
                .map(|f| {
                    let grid = Arc::new(build_grid(task, f, 20).unwrap());
                    ale(&output, &table, &grid, "response", it.fold).unwrap()
                })
                .collect();
            let refs: Vec<&EffectCurve> = curves.iter().collect();
            let predictions = output.predict_table(&table);
            interaction_strength(&predictions, &table, &refs)
        })
        .collect()
}

#[test]
fn criterion_05_interaction_strength_separates_linear_from_forest() {
    let task = simulate_task(2000, 10, 505, 0.1).unwrap();
    let strategy = ResamplingStrategy::parse("cv3", 505).unwrap();
    let linear = Learner::parse("linear").unwrap();
    let forest = Learner::parse("random_forest:num_trees=50").unwrap();
    let rr_lin = resample(&task, &linear, &strategy, 1).unwrap();
    let rr_rf = resample(&task, &forest, &strategy, 1).unwrap();
    let lin_ias = fold_ias(&task, &rr_lin);
    let rf_ias = fold_ias(&task, &rr_rf);
    for (fold, &v) in lin_ias.iter().enumerate() {
        assert!(v < 1e-6, "fold {fold}: additive model ias {v} >= 1e-6");
    }
    for fold in 0..lin_ias.len() {
        assert!(
            rf_ias[fold] > lin_ias[fold],
            "fold {fold}: forest ias {} not above linear ias {}",
            rf_ias[fold],
            lin_ias[fold]
        );
    }

    // Noise-free additive target: exactly the two used features count.
    let base = simulate(400, 5, 505, 0.0).unwrap();
    let grab = |name: &str| base.column(name).unwrap().clone();
    let x1 = match &grab("x1").data {
        modelsum::ColumnData::Numeric(v) => v.clone(),
        _ => unreachable!(),
    };
    let x2 = match &grab("x2").data {
        modelsum::ColumnData::Numeric(v) => v.clone(),
        _ => unreachable!(),
    };
    let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 4.0 * a + 4.0 * b).collect();
    let frame = Frame::new(vec![
        grab("x1"),
        grab("x2"),
        grab("x3"),
        grab("x4"),
        grab("x5"),
        Column::numeric("y", y),
    ])
    .unwrap();
    let add_task = make_task(frame, "y", None, None).unwrap();
    let all: Vec<usize> = (0..400).collect();
    let model = fit(&linear, &add_task, &all, 1).unwrap();
    let table = FeatureTable::from_frame(add_task.frame(), &all, model.shared_schema()).unwrap();
    let output = ModelOutput {
        model: &model,
        kind: OutputKind::Response,
    };
    let curves: Vec<EffectCurve> = add_task
        .feature_names
        .iter()
        .map(|f| {
            let grid = Arc::new(build_grid(&add_task, f, 20).unwrap());
            ale(&output, &table, &grid, "response", 0).unwrap()
        })
        .collect();
    let refs: Vec<&EffectCurve> = curves.iter().collect();
    let predictions = output.predict_table(&table);
    let lo = predictions.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let hi = predictions.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    assert_eq!(sparsity(&refs, hi - lo), 2);
}

#[test]
fn criterion_06_forest_importance_separates_signal_from_noise() {
    let start = Instant::now();
    let loss = measure("mse").unwrap();
    for &task_seed in &[11u64, 22, 33] {
        let task = simulate_task(2000, 10, task_seed, 0.1).unwrap();
        let learner = Learner::parse("random_forest:num_trees=100").unwrap();
        let strategy = ResamplingStrategy::parse("cv3", task_seed).unwrap();
        let rr = resample(&task, &learner, &strategy, 1).unwrap();
        let mut means = vec![0.0; task.feature_names.len()];
        for it in &rr.iterations {
            let model = it.model.as_ref().unwrap();
            let table =
                FeatureTable::from_frame(task.frame(), &it.test, model.shared_schema()).unwrap();
            let truth = task.truth(&it.test);
            let fold_seed = seed::derive_path(task_seed, &[seed::TAG_PFI, it.fold as u64]);
            for (j, m) in means.iter_mut().enumerate() {
                *m += pfi(model, &table, &truth, None, loss, j, 5, fold_seed).unwrap();
            }
        }
        for m in &mut means {
            *m /= 3.0;
        }
        let signal_min = means[..4].iter().cloned().fold(f64::INFINITY, f64::min);
        let noise_max = means[4..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(
            signal_min > noise_max,
            "seed {task_seed}: weakest signal feature {signal_min} vs strongest noise {noise_max} ({means:?})"
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "took {elapsed:.2}s, budget 60s");
}

/// Labels-only binary prediction over two groups laid out one after the
/// other.
fn group_fixture(
    truth_a: &[u32],
    pred_a: &[u32],
    truth_b: &[u32],
    pred_b: &[u32],
) -> (Prediction, Truth, Vec<u32>) {
    let labels: Vec<u32> = pred_a.iter().chain(pred_b).copied().collect();
    let codes: Vec<u32> = truth_a.iter().chain(truth_b).copied().collect();
    let groups: Vec<u32> = std::iter::repeat(0)
        .take(truth_a.len())
        .chain(std::iter::repeat(1).take(truth_b.len()))
        .collect();
    let prediction = Prediction {
        row_ids: (0..labels.len()).collect(),
        levels: vec!["neg".to_string(), "pos".to_string()],
        response: None,
        probabilities: None,
        labels: Some(labels),
    };
    (prediction, Truth::Classes(codes), groups)
}

#[test]
fn criterion_07_fairness_measures_match_hand_computed_tables() {
    let levels = vec!["a".to_string(), "b".to_string()];

    let dp_of = |prediction: &Prediction, truth: &Truth, groups: &[u32]| {
        evaluate_fairness(
            FairnessMeasure::Dp,
            TaskType::Binary,
            prediction,
            truth,
            Some(1),
            groups,
            &levels,
        )
        .value
        .unwrap()
    };
    let eod_of = |prediction: &Prediction, truth: &Truth, groups: &[u32]| {
        evaluate_fairness(
            FairnessMeasure::Eod,
            TaskType::Binary,
            prediction,
            truth,
            Some(1),
            groups,
            &levels,
        )
        .value
        .unwrap()
    };

    // Group a: 8 of 10 predicted positive. Group b: 6 of 10. Gap 0.2,
    // held to one ulp of the f64 rate arithmetic.
    let pred_a = [vec![1u32; 8], vec![0; 2]].concat();
    let pred_b = [vec![1u32; 6], vec![0; 4]].concat();
    let (prediction, truth, groups) = group_fixture(&[0; 10], &pred_a, &[0; 10], &pred_b);
    let dp = dp_of(&prediction, &truth, &groups);
    assert!((dp - 0.2).abs() <= 1e-15, "dp {dp} vs 0.2");

    // With power-of-two group sizes the rates are exact binary fractions
    // and the gap must come out bitwise: 8/16 - 4/16 = 0.25.
    let pred_a = [vec![1u32; 8], vec![0; 8]].concat();
    let pred_b = [vec![1u32; 4], vec![0; 12]].concat();
    let (prediction, truth, groups) = group_fixture(&[0; 16], &pred_a, &[0; 16], &pred_b);
    assert_eq!(dp_of(&prediction, &truth, &groups), 0.25);

    // TPR 0.9 vs 0.7 (gap 0.2) and FPR 0.2 vs 0.2 (gap 0): eod is 0.1.
    let truth_a = [vec![1u32; 10], vec![0; 10]].concat();
    let pred_a = [vec![1u32; 9], vec![0; 1], vec![1; 2], vec![0; 8]].concat();
    let pred_b = [vec![1u32; 7], vec![0; 3], vec![1; 2], vec![0; 8]].concat();
    let (prediction, truth, groups) = group_fixture(&truth_a, &pred_a, &truth_a, &pred_b);
    let eod = eod_of(&prediction, &truth, &groups);
    assert!((eod - 0.1).abs() <= 1e-15, "eod {eod} vs 0.1");

    // Exact variant: TPR 0.75 vs 0.5, FPR 0.25 vs 0.25 over groups of
    // 32, so eod is bitwise 0.125.
    let truth_a = [vec![1u32; 16], vec![0; 16]].concat();
    let pred_a = [vec![1u32; 12], vec![0; 4], vec![1; 4], vec![0; 12]].concat();
    let pred_b = [vec![1u32; 8], vec![0; 8], vec![1; 4], vec![0; 12]].concat();
    let (prediction, truth, groups) = group_fixture(&truth_a, &pred_a, &truth_a, &pred_b);
    assert_eq!(eod_of(&prediction, &truth, &groups), 0.125);

    // Identical groups: every gap is exactly zero.
    let (prediction, truth, groups) = group_fixture(&truth_a, &pred_a, &truth_a, &pred_a);
    for m in [FairnessMeasure::Dp, FairnessMeasure::Eod, FairnessMeasure::Cuae] {
        let out = evaluate_fairness(
            m,
            TaskType::Binary,
            &prediction,
            &truth,
            Some(1),
            &groups,
            &levels,
        );
        assert_eq!(out.value, Some(0.0), "{}: identical groups", m.id());
    }
}

#[test]
fn criterion_08_worker_count_changes_nothing_but_time() {
    let task = simulate_task(2000, 25, 808, 0.1).unwrap();
    let learner = Learner::parse("random_forest:num_trees=50").unwrap();
    let strategy = ResamplingStrategy::parse("cv3", 808).unwrap();
    let rr = resample(&task, &learner, &strategy, 1).unwrap();
    let all: Vec<usize> = (0..2000).collect();
    let model = fit(&learner, &task, &all, 808).unwrap();
    let control = SummaryControl::default();

    let render = |workers: usize| {
        let report = summarize(&model, &rr, &control, workers).unwrap();
        let mut bytes = render_text(&report, 100).unwrap();
        bytes.push_str(&render_json(&report).unwrap());
        bytes
    };
    let one = render(1);
    assert_eq!(one, render(2), "workers=2 changed the output");
    assert_eq!(one, render(4), "workers=4 changed the output");

    let cpus = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    if cpus >= 3 {
        let time = |workers: usize| {
            let mut best = f64::INFINITY;
            for _ in 0..2 {
                let t = Instant::now();
                summarize(&model, &rr, &control, workers).unwrap();
                best = best.min(t.elapsed().as_secs_f64());
            }
            best
        };
        let t1 = time(1);
        let t3 = time(3);
        assert!(
            t3 <= 0.75 * t1,
            "3 workers took {t3:.3}s, above 0.75x the 1-worker {t1:.3}s"
        );
    } else {
        eprintln!("criterion 08 speedup clause SKIPPED: {cpus} cpu(s) available, needs 3");
    }
}

#[test]
fn criterion_09_feature_count_dominates_row_count_in_summary_cost() {
    let start = Instant::now();
    let spec = BenchSpec {
        ns: vec![100, 500, 2000],
        ps: vec![5, 25, 100],
        learners: vec!["random_forest:num_trees=50".to_string()],
        workers: vec![1],
        repeats: 1,
        seed: 909,
    };
    let rows = modelsum::run_bench(&spec, |_| {});
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 600.0, "grid took {elapsed:.1}s, budget 600s");
    let secs = |n: usize, p: usize| {
        rows.iter()
            .find(|r| r.n == n && r.p == p)
            .and_then(|r| r.seconds)
            .unwrap_or_else(|| panic!("cell n={n} p={p} failed"))
    };
    let ratio_p = secs(500, 100) / secs(500, 5);
    let ratio_n = secs(2000, 25) / secs(100, 25);
    assert!(
        ratio_p > ratio_n,
        "feature-count scaling {ratio_p:.2}x not above row-count scaling {ratio_n:.2}x (grid wall {elapsed:.1}s)"
    );
}

/// Credit-style binary task with a two-level `sex` column.
fn credit_task(n: usize) -> Task {
    let age: Vec<f64> = (0..n).map(|i| 20.0 + (i % 45) as f64).collect();
    let income: Vec<f64> = (0..n).map(|i| 1000.0 + ((i * 37) % 400) as f64 * 10.0).collect();
    let sex: Vec<&str> = (0..n)
        .map(|i| if (i / 2) % 2 == 0 { "female" } else { "male" })
        .collect();
    let risk: Vec<&str> = (0..n)
        .map(|i| {
            let score = (i % 45) as f64 + ((i * 37) % 400) as f64 / 20.0;
            let flip = i % 13 == 0;
            if (score > 30.0) ^ flip {
                "good"
            } else {
                "bad"
            }
        })
        .collect();
    let frame = Frame::new(vec![
        Column::numeric("age", age),
        Column::numeric("income", income),
        Column::categorical_from_strings("sex", &sex),
        Column::categorical_from_strings("risk", &risk),
    ])
    .unwrap();
    make_task(frame, "risk", Some("good"), None).unwrap()
}

#[test]
fn criterion_10_control_defaults_hiding_and_protected_attribute() {
    let defaults = SummaryControl::default();
    assert_eq!(
        defaults.complexity_measures,
        ["sparsity", "interaction_strength"]
    );
    assert_eq!(defaults.effect_measures, ["pdp", "ale"]);
    assert_eq!(defaults.n_important, 15);
    assert_eq!(defaults.digits, 4);
    assert!(defaults.measures.is_none());
    assert!(defaults.importance_measures.is_none());
    assert!(defaults.fairness_measures.is_none());
    assert!(defaults.protected_attribute.is_none());
    assert!(defaults.hide.is_empty());

    let task = credit_task(120);
    let learner = Learner::parse("tree").unwrap();
    let strategy = ResamplingStrategy::parse("cv3", 10).unwrap();
    let rr = resample(&task, &learner, &strategy, 1).unwrap();
    let all: Vec<usize> = (0..120).collect();
    let model = fit(&learner, &task, &all, 10).unwrap();

    // Hiding any paragraph removes exactly its heading from the text.
    for paragraph in [
        "residuals",
        "performance",
        "complexity",
        "fairness",
        "importance",
        "effects",
    ] {
        let mut control = SummaryControl::default();
        control.protected_attribute = Some("sex".to_string());
        control.hide = vec![paragraph.to_string()];
        let report = summarize(&model, &rr, &control, 1).unwrap();
        let text = render_text(&report, 100).unwrap();
        assert!(
            !text.contains(&format!("== {paragraph}")),
            "{paragraph} still visible"
        );
        assert!(text.contains("== general"));
    }

    // Declaring a protected attribute adds the fairness paragraph with
    // the classification defaults.
    let mut control = SummaryControl::default();
    control.protected_attribute = Some("sex".to_string());
    let report = summarize(&model, &rr, &control, 1).unwrap();
    let section = report.fairness.as_ref().expect("fairness paragraph present");
    let ids: Vec<&str> = section.body.entries.iter().map(|e| e.id.as_str()).collect();
    assert_eq!(ids, ["dp", "cuae", "eod"]);
    let plain = summarize(&model, &rr, &SummaryControl::default(), 1).unwrap();
    assert!(plain.fairness.is_none());
}

/// Random regression or classification task over numeric features, with
/// an optional categorical column.
fn random_task(r: &mut impl Rng, classification: bool) -> Task {
    let n = 30 + r.random_range(0..60usize);
    let p = 1 + r.random_range(0..3usize);
    let mut columns = Vec::new();
    for j in 0..p {
        let values: Vec<f64> = (0..n).map(|_| r.random::<f64>() * 6.0 - 3.0).collect();
        columns.push(Column::numeric(format!("f{j}"), values));
    }
    if r.random::<f64>() < 0.3 {
        let codes: Vec<u32> = (0..n).map(|_| r.random_range(0..3u32)).collect();
        let levels = vec!["u".to_string(), "v".to_string(), "w".to_string()];
        columns.push(Column::categorical("c0", codes, levels).unwrap());
    }
    if classification {
        let k = 2 + r.random_range(0..2u32);
        let mut codes: Vec<u32> = (0..n).map(|_| r.random_range(0..k)).collect();
        for c in 0..k {
            codes[c as usize] = c;
        }
        let levels: Vec<String> = (0..k).map(|c| format!("cls{c}")).collect();
        columns.push(Column::categorical("y", codes, levels).unwrap());
    } else {
        let first = match &columns[0].data {
            modelsum::ColumnData::Numeric(v) => v.clone(),
            _ => unreachable!(),
        };
        let y: Vec<f64> = first
            .iter()
            .map(|&x| x + r.random::<f64>() * 0.5)
            .collect();
        columns.push(Column::numeric("y", y));
    }
    make_task(Frame::new(columns).unwrap(), "y", None, None).unwrap()
}

#[test]
fn criterion_11a_ale_curves_center_to_zero_weighted_mean() {
    let mut r = seed::rng(1101);
    for instance in 0..110 {
        let task = random_task(&mut r, false);
        let p = task.feature_names.len();
        let coefs: Vec<f64> = (0..p).map(|_| r.random::<f64>() * 4.0 - 2.0).collect();
        let quads: Vec<f64> = (0..p).map(|_| r.random::<f64>() - 0.5).collect();
        let model = move |t: &FeatureTable| -> Vec<f64> {
            (0..t.n_rows())
                .map(|i| {
                    (0..t.n_features())
                        .map(|j| coefs[j] * t.get(i, j) + quads[j] * t.get(i, j).powi(2))
                        .sum()
                })
                .collect()
        };
        let all: Vec<usize> = (0..task.n()).collect();
        let table = FeatureTable::from_task(&task, &all);
        let g = 3 + r.random_range(0..17usize);
        let j = r.random_range(0..p);
        let grid = Arc::new(build_grid(&task, &task.feature_names[j], g).unwrap());
        let curve = ale(&model, &table, &grid, "response", 0).unwrap();
        let mass: f64 = curve.node_mass.iter().sum();
        let weighted: f64 = curve
            .values
            .iter()
            .zip(&curve.node_mass)
            .map(|(v, m)| v * m)
            .sum();
        assert!(
            (weighted / mass).abs() <= 1e-9,
            "instance {instance}: weighted mean {}",
            weighted / mass
        );
    }
}

#[test]
fn criterion_11b_probability_rows_sum_to_one() {
    let mut r = seed::rng(1102);
    let mut instances = 0;
    while instances < 100 {
        let task = random_task(&mut r, true);
        let binary = task.task_type == TaskType::Binary;
        let specs: &[&str] = if binary {
            &["featureless", "logistic", "tree", "random_forest:num_trees=10"]
        } else {
            &["featureless", "tree", "random_forest:num_trees=10", "tree:min_leaf=8"]
        };
        let n = task.n();
        let train: Vec<usize> = (0..n).filter(|i| i % 3 != 0).collect();
        let test: Vec<usize> = (0..n).filter(|i| i % 3 == 0).collect();
        for spec in specs {
            let learner = Learner::parse(spec).unwrap();
            let model = match fit(&learner, &task, &train, instances as u64) {
                Ok(m) => m,
                Err(_) => continue,
            };
            let prediction = model.predict_task(&task, &test).unwrap();
            let probs = prediction.probabilities.as_ref().expect("probabilities");
            let k = prediction.levels.len();
            for i in 0..test.len() {
                let row_sum: f64 = probs[i * k..(i + 1) * k].iter().sum();
                assert!(
                    (row_sum - 1.0).abs() <= 1e-9,
                    "{spec}: row {i} sums to {row_sum}"
                );
            }
            instances += 1;
        }
    }
}

#[test]
fn criterion_11c_cv_folds_partition_the_rows() {
    let mut r = seed::rng(1103);
    for instance in 0..100 {
        let task = random_task(&mut r, instance % 2 == 0);
        let n = task.n();
        let k = 2 + r.random_range(0..4usize);
        if n < k {
            continue;
        }
        let strategy = ResamplingStrategy::parse(&format!("cv{k}"), instance as u64).unwrap();
        let plan = split(&strategy, &task).unwrap();
        assert_eq!(plan.splits.len(), k);
        let mut seen = vec![0usize; n];
        let mut sizes = Vec::new();
        for (train, test) in &plan.splits {
            assert!(test.windows(2).all(|w| w[0] < w[1]), "test rows sorted");
            assert!(train.windows(2).all(|w| w[0] < w[1]), "train rows sorted");
            for &t in test {
                seen[t] += 1;
            }
            let mut joined: Vec<usize> = train.iter().chain(test).copied().collect();
            joined.sort_unstable();
            assert_eq!(joined, (0..n).collect::<Vec<usize>>(), "train is complement");
            sizes.push(test.len());
        }
        assert!(seen.iter().all(|&c| c == 1), "each row tested exactly once");
        let spread = sizes.iter().max().unwrap() - sizes.iter().min().unwrap();
        assert!(spread <= 1, "instance {instance}: fold sizes {sizes:?}");
        if task.task_type.is_classification() && plan.warnings.is_empty() {
            // Stratification keeps per-class fold counts within one.
            let Truth::Classes(codes) = task.truth(&(0..n).collect::<Vec<usize>>()) else {
                unreachable!()
            };
            let k_classes = *codes.iter().max().unwrap() as usize + 1;
            for class in 0..k_classes {
                let counts: Vec<usize> = plan
                    .splits
                    .iter()
                    .map(|(_, test)| {
                        test.iter().filter(|&&i| codes[i] as usize == class).count()
                    })
                    .collect();
                let spread = counts.iter().max().unwrap() - counts.iter().min().unwrap();
                assert!(spread <= 1, "instance {instance}: class {class} {counts:?}");
            }
        }
    }
}

#[test]
fn criterion_11d_pfi_of_an_ignored_feature_is_exactly_zero() {
    let mut r = seed::rng(1104);
    let featureless = Learner::parse("featureless").unwrap();
    for instance in 0..100 {
        let classification = instance % 2 == 0;
        let task = random_task(&mut r, classification);
        let n = task.n();
        let all: Vec<usize> = (0..n).collect();
        let model = fit(&featureless, &task, &all, instance as u64).unwrap();
        let table = FeatureTable::from_frame(task.frame(), &all, model.shared_schema()).unwrap();
        let truth = task.truth(&all);
        let loss = if classification {
            measure("ce").unwrap()
        } else {
            measure("mse").unwrap()
        };
        let j = r.random_range(0..task.feature_names.len());
        let value = pfi(
            &model,
            &table,
            &truth,
            task.positive_index(),
            loss,
            j,
            3,
            instance as u64,
        )
        .unwrap();
        assert_eq!(value, 0.0, "instance {instance}: feature {j}");
    }
}

#[test]
fn criterion_11e_micro_equals_macro_for_bbrier_on_equal_folds() {
    let mut r = seed::rng(1105);
    let bbrier = measure("bbrier").unwrap();
    for instance in 0..100 {
        let k = 2 + r.random_range(0..3usize);
        let pos = k * (2 + r.random_range(0..6usize));
        let neg = k * (2 + r.random_range(0..6usize));
        let n = pos + neg;
        let x: Vec<f64> = (0..n).map(|_| r.random::<f64>() * 4.0).collect();
        let mut labels = vec!["no"; n];
        for l in labels.iter_mut().take(pos) {
            *l = "yes";
        }
        let frame = Frame::new(vec![
            Column::numeric("x", x),
            Column::categorical_from_strings("y", &labels),
        ])
        .unwrap();
        let task = make_task(frame, "y", Some("yes"), None).unwrap();
        let strategy = ResamplingStrategy::parse(&format!("cv{k}"), instance as u64).unwrap();
        let learner = Learner::parse("tree").unwrap();
        let rr = resample(&task, &learner, &strategy, 1).unwrap();
        assert!(rr.warnings.is_empty(), "stratification must hold exactly");
        let sizes: Vec<usize> = rr.iterations.iter().map(|it| it.test.len()).collect();
        assert!(sizes.iter().all(|&s| s == sizes[0]), "equal folds by construction");
        let macro_agg = aggregate(bbrier, AggregationMode::Macro, &rr).unwrap();
        let micro_agg = aggregate(bbrier, AggregationMode::Micro, &rr).unwrap();
        let (a, b) = (macro_agg.mean.unwrap(), micro_agg.mean.unwrap());
        assert!(
            (a - b).abs() <= 1e-12,
            "instance {instance}: macro {a} vs micro {b}"
        );
    }
}
