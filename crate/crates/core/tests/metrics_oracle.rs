use proptest::prelude::*;
use sparsenilm_core::dataset::{synth_generate, windowize, SynthConfig, WindowedDataset};
use sparsenilm_core::metrics::{
    average_energy_error, evaluate, f1, f1_macro, f1_micro, ConfusionCounts, LabelCounts,
};
use sparsenilm_core::{LabelMatrix, LabelSet};

fn synthetic_test_set(hours: usize, seed: u64) -> WindowedDataset {
    let cfg = SynthConfig { duration_hours: hours, seed, ..SynthConfig::new(vec![120.0, 900.0], 0.85, 0.8) };
    windowize(&synth_generate(&cfg).unwrap().resample(600).unwrap(), 3600, 15.0).unwrap()
}

/// Flip every third truth bit of appliance 1 and every fifth of appliance 0.
fn perturbed(truth: &LabelMatrix) -> LabelMatrix {
    let mut p = truth.clone();
    for w in 0..truth.rows() {
        if w % 3 == 0 {
            p.set(w, 1, !truth.get(w, 1));
        }
        if w % 5 == 0 {
            p.set(w, 0, !truth.get(w, 0));
        }
    }
    p
}

/// Straight-loop recount, sharing no code with the library.
struct Recount {
    tp: Vec<u64>,
    fp: Vec<u64>,
    fn_: Vec<u64>,
    estimated: Vec<f64>,
}

fn recount(pred: &LabelMatrix, ds: &WindowedDataset, mean_on: &[f64]) -> Recount {
    let n = ds.num_appliances();
    let mut r = Recount { tp: vec![0; n], fp: vec![0; n], fn_: vec![0; n], estimated: vec![0.0; n] };
    for w in 0..ds.num_windows() {
        for i in 0..n {
            let truth = ds.appliance_power[w][i] > ds.on_threshold;
            let p = pred.get(w, i);
            if p && truth {
                r.tp[i] += 1;
            } else if p {
                r.fp[i] += 1;
            } else if truth {
                r.fn_[i] += 1;
            }
            if p {
                r.estimated[i] += mean_on[i] * ds.window_seconds as f64 / 3600.0;
            }
        }
    }
    r
}

#[test]
fn production_metrics_match_recount() {
    let ds = synthetic_test_set(300, 5);
    let pred = perturbed(&ds.labels);
    let mean_on = [118.0, 905.0];
    let report = evaluate(&pred, &ds, &mean_on).unwrap();
    let r = recount(&pred, &ds, &mean_on);

    let actual: Vec<f64> = (0..2)
        .map(|i| (0..ds.num_windows()).map(|w| ds.appliance_power[w][i]).sum::<f64>())
        .collect();
    let aee = (r.estimated.iter().sum::<f64>() - actual.iter().sum::<f64>()).abs() / actual.iter().sum::<f64>();
    let got = report.aee.unwrap();
    assert!((got - aee).abs() <= 1e-9 * aee, "{got} vs {aee}");

    for i in 0..2 {
        let c = report.counts.per_label()[i];
        assert_eq!((c.tp, c.fp, c.fn_), (r.tp[i], r.fp[i], r.fn_[i]));
        let f = 2.0 * r.tp[i] as f64 / (2 * r.tp[i] + r.fp[i] + r.fn_[i]) as f64;
        let row = &report.per_appliance[i];
        assert!((row.f1.value - f).abs() < 1e-12);
        let e = (r.estimated[i] - actual[i]).abs() / actual[i];
        assert!((row.energy_error.unwrap() - e).abs() <= 1e-9 * e);
    }
    let tp: u64 = r.tp.iter().sum();
    let fp: u64 = r.fp.iter().sum();
    let fn_: u64 = r.fn_.iter().sum();
    assert!((report.f1_micro.value - 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64).abs() < 1e-12);
}

#[test]
fn perfect_predictions_on_constant_loads() {
    // one appliance at a constant 100 W for 10 hours
    let mut cfg = SynthConfig::new(vec![100.0], 1.0, 0.0);
    cfg.noise_std = 0.0;
    cfg.duration_hours = 10;
    let ds = windowize(&synth_generate(&cfg).unwrap().resample(600).unwrap(), 3600, 15.0).unwrap();
    let report = evaluate(&ds.labels, &ds, &[100.0]).unwrap();
    assert_eq!(report.aee, Some(0.0));
    assert_eq!(report.per_appliance[0].f1.value, 1.0);
    assert_eq!(report.per_appliance[0].energy_error, Some(0.0));

    // predicted ON for 5 of the 10 hours
    let mut half = ds.labels.clone();
    for w in 5..10 {
        half.set(w, 0, false);
    }
    assert_eq!(average_energy_error(&half, &ds, &[100.0]).unwrap(), 0.5);
    assert_eq!(average_energy_error(&LabelMatrix::zeros(10, 1), &ds, &[100.0]).unwrap(), 1.0);

    let complement = LabelMatrix::zeros(10, 1);
    assert_eq!(evaluate(&complement, &ds, &[100.0]).unwrap().per_appliance[0].f1.value, 0.0);
}

#[test]
fn zero_energy_appliance_reports_undefined_error() {
    let mut cfg = SynthConfig::new(vec![100.0, 50.0], 1.0, 0.0);
    cfg.noise_std = 0.0;
    cfg.duration_hours = 4;
    cfg.p_on_stay[1] = 0.0;
    cfg.p_off_stay[1] = 1.0;
    let ds = windowize(&synth_generate(&cfg).unwrap().resample(600).unwrap(), 3600, 15.0).unwrap();
    let report = evaluate(&ds.labels, &ds, &[100.0, 50.0]).unwrap();
    assert_eq!(report.per_appliance[1].energy_error, None);
    assert!(report.f1_macro.degenerate_labels.contains(&1));
}

#[test]
fn zero_total_energy_is_an_error() {
    let mut cfg = SynthConfig::new(vec![100.0], 0.0, 1.0);
    cfg.noise_std = 0.0;
    cfg.duration_hours = 2;
    let ds = windowize(&synth_generate(&cfg).unwrap().resample(600).unwrap(), 3600, 15.0).unwrap();
    assert!(average_energy_error(&ds.labels, &ds, &[100.0]).is_err());
    assert_eq!(evaluate(&ds.labels, &ds, &[100.0]).unwrap().aee, None);
}

#[test]
fn aee_invariant_to_appliance_permutation() {
    let ds = synthetic_test_set(120, 9);
    let pred = perturbed(&ds.labels);
    let mean_on = [110.0, 880.0];
    let base = average_energy_error(&pred, &ds, &mean_on).unwrap();

    let swap = |m: &LabelMatrix| {
        let sets: Vec<LabelSet> = (0..m.rows()).map(|w| m.row_set(w).ids().iter().map(|i| 1 - i).collect()).collect();
        LabelMatrix::from_sets(&sets, 2)
    };
    let mut permuted = ds.clone();
    permuted.labels = swap(&ds.labels);
    permuted.appliance_power = ds.appliance_power.iter().map(|r| vec![r[1], r[0]]).collect();
    permuted.actual_energy = vec![ds.actual_energy[1], ds.actual_energy[0]];
    permuted.appliance_names.reverse();
    let swapped = average_energy_error(&swap(&pred), &permuted, &[mean_on[1], mean_on[0]]).unwrap();
    assert!((base - swapped).abs() <= 1e-12 * base.max(1.0));
}

fn triples() -> impl Strategy<Value = Vec<(u64, u64, u64)>> {
    prop::collection::vec((0u64..50, 0u64..50, 0u64..50), 1..8)
}

fn counts_from(triples: &[(u64, u64, u64)]) -> ConfusionCounts {
    let total = triples.iter().map(|(a, b, c)| a + b + c).max().unwrap();
    ConfusionCounts::from_counts(
        triples.iter().map(|&(tp, fp, fn_)| LabelCounts { tp, fp, fn_, tn: total - tp - fp - fn_ }).collect(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn scores_stay_in_unit_interval(t in triples()) {
        let c = counts_from(&t);
        for &(tp, fp, fn_) in &t {
            let s = f1(tp, fp, fn_).value;
            prop_assert!((0.0..=1.0).contains(&s));
        }
        prop_assert!((0.0..=1.0).contains(&f1_micro(&c).value));
        prop_assert!((0.0..=1.0).contains(&f1_macro(&c).value));
    }

    #[test]
    fn micro_equals_macro_for_identical_labels(t in (0u64..50, 0u64..50, 0u64..50), n in 1usize..8) {
        let c = counts_from(&vec![t; n]);
        // equal up to the rounding of the n-term mean
        prop_assert!((f1_micro(&c).value - f1_macro(&c).value).abs() <= 4.0 * f64::EPSILON);
    }
}
