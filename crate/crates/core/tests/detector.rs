use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;
use windpr::corcos::CorcosParams;
use windpr::detector::{decide, hard, Detector, DetectorConfig};
use windpr::spectral::{band_bins, StftConfig};
use windpr::synthesis::{build_sequence, gen_coherent_noise, synthetic_speech, NoiseSpec, SequenceSpec};

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[test]
fn steady_wind_scores_above_half() {
    let cfg = StftConfig::default();
    let p = CorcosParams::new(0.004, 0.0, 1.8).unwrap();
    let x = gen_coherent_noise(&NoiseSpec::new(p, 20.0, 7).unwrap(), &cfg).unwrap();
    let band = band_bins(&cfg, 0.0, 500.0).unwrap();
    let theory = mean(band.iter().map(|k| p.pr_wind(cfg.bin_omega(k)).min(1.0)));
    let scores = Detector::new(DetectorConfig::default(), cfg, 0.5)
        .unwrap()
        .score_signal(&x)
        .unwrap();
    let soft = mean(scores[20..].iter().map(|s| s.soft_pr.unwrap()));
    assert!(soft > 0.5, "soft {soft}");
    assert!((soft - theory).abs() < 0.1, "soft {soft} theory {theory}");
    let fired = scores.iter().filter(|s| s.hard_pr).count();
    assert!(2 * fired > scores.len());
}

#[test]
fn msc_score_tracks_squared_coherence() {
    let cfg = StftConfig::default();
    for (d, tw, u) in [(0.004, 0.0, 1.8), (0.004, FRAC_PI_2, 1.8), (0.02, 0.0, 2.8)] {
        let p = CorcosParams::new(d, tw, u).unwrap();
        let x = gen_coherent_noise(&NoiseSpec::new(p, 20.0, 9).unwrap(), &cfg).unwrap();
        let band = band_bins(&cfg, 0.0, 500.0).unwrap();
        let theory = 1.0 - mean(band.iter().map(|k| p.coherence(cfg.bin_omega(k)).magnitude().powi(2)));
        let scores = Detector::new(DetectorConfig::default(), cfg, 0.98)
            .unwrap()
            .score_signal(&x)
            .unwrap();
        let soft = mean(scores[100..].iter().map(|s| s.soft_msc.unwrap()));
        assert!((soft - theory).abs() < 0.05, "d={d}: {soft} vs {theory}");
    }
}

#[test]
fn segment_medians_separate_at_half() {
    let cfg = StftConfig::default();
    let spec = SequenceSpec::protocol(3.0, 42).unwrap();
    let speech = synthetic_speech(spec.speech_duration_s(), 16_000, 42).unwrap();
    let seq = build_sequence(&spec, &speech, &cfg).unwrap();
    let det = Detector::new(DetectorConfig::default(), cfg, 0.5).unwrap();
    let scores = det.score_signal(&seq.signal).unwrap();
    assert_eq!(scores, det.score_signal(&seq.signal).unwrap());
    let of = |seg: usize| -> Vec<f64> {
        scores
            .iter()
            .zip(&seq.frame_segments)
            .filter(|(_, s)| **s == seg)
            .filter_map(|(f, _)| f.soft_pr)
            .collect()
    };
    assert!(median(of(0)) < 0.1);
    assert!(median(of(1)) > 0.5);
    assert!(median(of(3)) < 0.1);
}

#[test]
fn clamped_scores_are_in_unit_interval() {
    let cfg = StftConfig::default();
    let p = CorcosParams::new(0.02, 0.0, 2.8).unwrap();
    let x = gen_coherent_noise(&NoiseSpec::new(p, 5.0, 1).unwrap(), &cfg).unwrap();
    let scores = Detector::new(DetectorConfig::default(), cfg, 0.5)
        .unwrap()
        .score_signal(&x)
        .unwrap();
    for s in scores {
        let v = s.soft_pr.unwrap();
        assert!((0.0..=1.0).contains(&v));
        assert!(s.soft_pr_unclamped.unwrap() >= v);
        assert!(s.soft_msc.unwrap() >= -1e-9 && s.soft_msc.unwrap() <= 1.0 + 1e-9);
    }
}

proptest! {
    #[test]
    fn hard_decision_has_one_transition(soft in 0.0..1.0f64) {
        let grid: Vec<bool> = (0..=100).map(|i| hard(soft, i as f64 / 100.0)).collect();
        let flips = grid.windows(2).filter(|w| w[0] != w[1]).count();
        prop_assert!(grid.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(flips <= 1);
        prop_assert_eq!(decide(Some(soft), 0.3), soft > 0.3);
    }
}
