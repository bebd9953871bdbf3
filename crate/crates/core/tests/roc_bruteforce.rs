mod common;

use common::corpora;
use walkdet_core::cwt::{GridSpec, MorseParams};
use walkdet_core::detect::DetectorParams;
use walkdet_core::evaluate::roc::{roc_sweep, staged_tune, Candidate, Stage, TuneGrids};
use walkdet_core::Error;

#[test]
fn amplitude_sweep_matches_brute_force() {
    let data = corpora::roc_mixture(5, 200);
    let fixed = DetectorParams::smartphone();
    let cands: Vec<Candidate> = [0.5, 0.1, 0.3, 0.2, 0.4].into_iter().map(Candidate::Amplitude).collect();
    let curve = roc_sweep(&data, Stage::Amplitude, &cands, &fixed, &GridSpec::default(), &MorseParams::default()).unwrap();
    let (best, points) = common::brute_force(&data, &cands, &fixed);
    assert_eq!(curve.youden_index, best);
    for (p, q) in curve.points.iter().zip(&points) {
        assert_eq!((p.fpr, p.tpr), *q);
    }
}

#[test]
fn staged_sweep_matches_brute_force_per_stage() {
    let data = corpora::roc_mixture(7, 1000);
    let grids = TuneGrids::default();
    let start = DetectorParams::smartphone();
    let result = staged_tune(&data, &Stage::ALL, &grids, &start, &GridSpec::default(), &MorseParams::default()).unwrap();
    let mut fixed = start;
    for curve in &result.curves {
        let cands = grids.candidates(curve.stage);
        let (best, points) = common::brute_force(&data, &cands, &fixed);
        assert_eq!(curve.youden_index, best, "stage {}", curve.stage);
        for (p, q) in curve.points.iter().zip(&points) {
            assert_eq!((p.fpr, p.tpr), *q, "stage {} candidate {}", curve.stage, p.candidate);
        }
        fixed = curve.youden().candidate.apply(&fixed);
    }
    assert_eq!(fixed, result.selected);
}

#[test]
fn separable_corpus_has_unit_auc() {
    let data = corpora::separable(1);
    let curve = roc_sweep(
        &data,
        Stage::Amplitude,
        &TuneGrids::default().candidates(Stage::Amplitude),
        &DetectorParams::smartphone(),
        &GridSpec::default(),
        &MorseParams::default(),
    )
    .unwrap();
    assert_eq!(curve.auc, 1.0);
    let y = curve.youden();
    assert_eq!((y.tpr, y.fpr), (1.0, 0.0));
}

#[test]
fn threshold_independent_predictions_give_half() {
    // no candidate lets anything through the gate
    let data = corpora::separable(2);
    let cands: Vec<Candidate> = [5.0, 6.0, 7.0].into_iter().map(Candidate::Amplitude).collect();
    let curve = roc_sweep(&data, Stage::Amplitude, &cands, &DetectorParams::smartphone(), &GridSpec::default(), &MorseParams::default()).unwrap();
    assert_eq!(curve.auc, 0.5);
    assert_eq!(curve.youden_index, 0);
}

#[test]
fn single_class_is_rejected() {
    let mut data = corpora::separable(3);
    for s in &mut data {
        for t in s.truth.iter_mut() {
            *t = Some(true);
        }
    }
    let r = roc_sweep(&data, Stage::Duration, &[Candidate::Duration(3)], &DetectorParams::smartphone(), &GridSpec::default(), &MorseParams::default());
    assert!(matches!(r, Err(Error::NoNegatives)));
    for s in &mut data {
        for t in s.truth.iter_mut() {
            *t = Some(false);
        }
    }
    let r = roc_sweep(&data, Stage::Duration, &[Candidate::Duration(3)], &DetectorParams::smartphone(), &GridSpec::default(), &MorseParams::default());
    assert!(matches!(r, Err(Error::NoPositives)));
}
