use std::f64::consts::{FRAC_PI_2, PI, TAU};

use windpr::corcos::{CorcosParams, SpeechGeometry};
use windpr::spectral::{band_bins, stft_frames, LongRunPsd, StftConfig, TwoChannel};
use windpr::synthesis::{
    build_sequence, delay_speech, gen_coherent_noise, isnr_gain, mix_at_isnr, synthetic_speech,
    NoiseSpec, Segment, SegmentKind, SequenceSpec,
};

fn wrap(d: f64) -> f64 {
    (d + PI).rem_euclid(TAU) - PI
}

#[test]
fn coherence_round_trip() {
    let cfg = StftConfig::default();
    let p = CorcosParams::new(0.004, FRAC_PI_2, 1.8).unwrap();
    let x = gen_coherent_noise(&NoiseSpec::new(p, 120.0, 17).unwrap(), &cfg).unwrap();
    let coh = LongRunPsd::from_frames(&stft_frames(&x, &cfg).frames, cfg.num_bins(), 0.5)
        .unwrap()
        .coherence();
    let (mut mag, mut phase, mut n) = (0.0, 0.0, 0);
    for k in band_bins(&cfg, 0.0, 1000.0).unwrap().iter() {
        let target = p.coherence(cfg.bin_omega(k));
        if target.magnitude() > 0.1 {
            let m = coh[k].unwrap();
            mag += (m.norm() - target.magnitude()).abs();
            phase += wrap(m.arg() - target.phase()).abs();
            n += 1;
        }
    }
    assert!(n > 10);
    assert!(mag / n as f64 <= 0.05, "magnitude MAE {}", mag / n as f64);
    assert!(phase / n as f64 <= 0.1, "phase MAE {}", phase / n as f64);
}

#[test]
fn thirty_seconds_match_coherence_magnitude() {
    let cfg = StftConfig::default();
    let p = CorcosParams::new(0.004, FRAC_PI_2, 1.8).unwrap();
    let x = gen_coherent_noise(&NoiseSpec::new(p, 30.0, 4).unwrap(), &cfg).unwrap();
    let coh = LongRunPsd::from_frames(&stft_frames(&x, &cfg).frames, cfg.num_bins(), 0.5)
        .unwrap()
        .coherence();
    let band = band_bins(&cfg, 0.0, 1000.0).unwrap();
    let mae = band
        .iter()
        .map(|k| (coh[k].unwrap().norm() - p.coherence(cfg.bin_omega(k)).magnitude()).abs())
        .sum::<f64>()
        / band.len() as f64;
    assert!(mae <= 0.05, "MAE {mae}");
}

#[test]
fn seeded_noise_is_reproducible() {
    let cfg = StftConfig::default();
    let p = CorcosParams::new(0.02, 0.0, 2.8).unwrap();
    let a = gen_coherent_noise(&NoiseSpec::new(p, 2.0, 5).unwrap(), &cfg).unwrap();
    let b = gen_coherent_noise(&NoiseSpec::new(p, 2.0, 5).unwrap(), &cfg).unwrap();
    let c = gen_coherent_noise(&NoiseSpec::new(p, 2.0, 6).unwrap(), &cfg).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.len(), 32_000);
}

#[test]
fn negative_duration_is_rejected() {
    let p = CorcosParams::new(0.02, 0.0, 2.8).unwrap();
    assert!(NoiseSpec::new(p, -1.0, 0).is_err());
    assert!(SequenceSpec::protocol(0.0, 0).is_err());
}

#[test]
fn mixing_hits_the_requested_isnr() {
    let cfg = StftConfig::default();
    let speech = TwoChannel::duplicate(&synthetic_speech(4.0, 16_000, 3).unwrap());
    let p = CorcosParams::new(0.004, 0.0, 1.8).unwrap();
    let noise = gen_coherent_noise(&NoiseSpec::new(p, 4.0, 3).unwrap(), &cfg).unwrap();
    for isnr in [-10.0, -5.0, 0.0, 7.5] {
        let mix = mix_at_isnr(&speech, &noise, isnr).unwrap();
        let g = isnr_gain(&speech, &noise, isnr).unwrap();
        let scaled = noise.scaled(g);
        let measured = 10.0 * (speech.power_ch1() / scaled.power_ch1()).log10();
        assert!((measured - isnr).abs() <= 0.1);
        let residual = mix.ch1.iter().zip(&speech.ch1).zip(&scaled.ch1).map(|((m, s), n)| (m - s - n).abs()).fold(0.0, f64::max);
        assert!(residual < 1e-12);
    }
    let silent = TwoChannel::zeros(speech.len());
    assert!(mix_at_isnr(&silent, &noise, 0.0).is_err());
}

#[test]
fn equal_power_at_zero_db_needs_no_gain() {
    let a = TwoChannel::duplicate(&[1.0, -1.0, 1.0, -1.0]);
    let b = TwoChannel::new(vec![-1.0, 1.0, 1.0, -1.0], vec![0.0; 4]).unwrap();
    assert!((isnr_gain(&a, &b, 0.0).unwrap() - 1.0).abs() < 1e-15);
    assert!((isnr_gain(&a, &b, -5.0).unwrap().powi(2) - 10f64.powf(0.5)).abs() < 1e-12);
}

#[test]
fn delay_matches_the_geometry() {
    let cfg = StftConfig::default();
    let mono = synthetic_speech(1.0, 16_000, 8).unwrap();
    let broadside = delay_speech(&mono, &SpeechGeometry::broadside(0.004).unwrap(), &cfg).unwrap();
    assert_eq!(broadside.ch1, broadside.ch2);
    assert_eq!(broadside.ch1, mono);
    let zero = delay_speech(&vec![0.0; 4000], &SpeechGeometry::new(0.004, 0.0).unwrap(), &cfg).unwrap();
    assert!(zero.ch2.iter().all(|v| *v == 0.0));
    let g = SpeechGeometry::new(0.004, 0.0).unwrap();
    assert!((g.tdoa() - 11.66e-6).abs() < 1e-8);
}

#[test]
fn whole_sample_delays_are_exact_in_both_directions() {
    // two samples at 16 kHz over 1 m of air
    let c = 343.0;
    let d = 2.0 * c / 16_000.0;
    let cfg = StftConfig::default();
    let mono: Vec<f64> = synthetic_speech(1.0, 16_000, 2).unwrap();
    for (doa, shift) in [(0.0, 2i64), (PI, -2)] {
        let g = SpeechGeometry::with_speed_of_sound(d, doa, c).unwrap();
        let out = delay_speech(&mono, &g, &cfg).unwrap();
        for n in 100..mono.len() - 100 {
            let want = mono[(n as i64 - shift) as usize];
            assert!((out.ch2[n] - want).abs() < 1e-9, "n={n}");
        }
    }
}

#[test]
fn labels_follow_the_plan() {
    let cfg = StftConfig::default();
    let spec = SequenceSpec::protocol(2.0, 1).unwrap();
    let speech = synthetic_speech(spec.speech_duration_s(), 16_000, 1).unwrap();
    let seq = build_sequence(&spec, &speech, &cfg).unwrap();
    assert_eq!(seq.signal.len(), 160_000);
    assert_eq!(seq.labels.len(), stft_frames(&seq.signal, &cfg).frames.len());
    let per_segment: Vec<u8> = (0..5)
        .map(|s| {
            let (mut n, mut ones) = (0, 0);
            for (l, seg) in seq.labels.iter().zip(&seq.frame_segments) {
                if *seg == s {
                    n += 1;
                    ones += *l as usize;
                }
            }
            assert!(ones == 0 || ones == n);
            (ones > 0) as u8
        })
        .collect();
    assert_eq!(per_segment, [0, 1, 1, 0, 1]);

    let mut all_speech = spec.clone();
    all_speech.plan = vec![Segment { kind: SegmentKind::Speech, duration_s: 3.0 }];
    let speech = synthetic_speech(3.0, 16_000, 1).unwrap();
    let seq = build_sequence(&all_speech, &speech, &cfg).unwrap();
    assert!(seq.labels.iter().all(|l| *l == 0));
}

#[test]
fn short_speech_source_is_rejected() {
    let cfg = StftConfig::default();
    let spec = SequenceSpec::protocol(2.0, 1).unwrap();
    assert!(build_sequence(&spec, &[0.1; 1000], &cfg).is_err());
}
