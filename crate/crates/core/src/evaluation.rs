//! ROC evaluation of the power-ratio and MSC detectors.
//!
//! A trial synthesizes one labelled speech/wind sequence, runs a single PSD
//! stream over it, scores every frame with both detectors, and sweeps the
//! hard threshold. Trials are averaged per threshold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{check_threshold, decide, soft_msc, soft_pr, DetectorConfig};
use crate::error::{Error, Result};
use crate::spectral::{PsdState, Stft, StftConfig, DEFAULT_SMOOTHING};
use crate::synthesis::{build_sequence, synthetic_speech, SequenceSpec};

/// Default number of thresholds: `0, 0.05, …, 0.95`.
pub const DEFAULT_THRESHOLD_COUNT: usize = 20;
pub const DEFAULT_TRIALS: usize = 10;

/// `count` thresholds spaced 0.05 apart starting at zero.
pub fn threshold_grid(count: usize) -> Vec<f64> {
    (0..count).map(|i| i as f64 / 20.0).collect()
}

/// Wind detection rate `p_w` (true positives) and speech misdetection rate
/// `p_s` (false positives) with the counts behind them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub p_w: f64,
    pub p_s: f64,
    /// Frames with decision 1 and label 1.
    pub hits: usize,
    /// Frames with decision 1 and label 0.
    pub false_alarms: usize,
    /// Frames labelled wind.
    pub m_w: usize,
    /// Frames labelled clean speech.
    pub m_s: usize,
}

pub fn rates(labels: &[u8], decisions: &[bool]) -> Result<Rates> {
    if labels.len() != decisions.len() {
        return Err(Error::Evaluation(format!(
            "{} labels but {} decisions",
            labels.len(),
            decisions.len()
        )));
    }
    let mut counts = [[0usize; 2]; 2];
    for (&label, &fired) in labels.iter().zip(decisions) {
        if label > 1 {
            return Err(Error::Evaluation(format!("label {label} is not 0 or 1")));
        }
        counts[label as usize][usize::from(fired)] += 1;
    }
    let m_s = counts[0][0] + counts[0][1];
    let m_w = counts[1][0] + counts[1][1];
    if m_w == 0 {
        return Err(Error::Evaluation("no frame is labelled wind".into()));
    }
    if m_s == 0 {
        return Err(Error::Evaluation("no frame is labelled clean speech".into()));
    }
    Ok(Rates {
        p_w: counts[1][1] as f64 / m_w as f64,
        p_s: counts[0][1] as f64 / m_s as f64,
        hits: counts[1][1],
        false_alarms: counts[0][1],
        m_w,
        m_s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub theta: f64,
    /// Speech misdetection rate.
    pub false_positive_rate: f64,
    /// Wind detection rate.
    pub true_positive_rate: f64,
}

/// One ROC point per threshold. Frames without a score never fire.
pub fn roc_sweep(scores: &[Option<f64>], labels: &[u8], thresholds: &[f64]) -> Result<Vec<RocPoint>> {
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Evaluation("thresholds must be sorted ascending".into()));
    }
    thresholds
        .iter()
        .map(|&theta| {
            check_threshold(theta)?;
            let decisions: Vec<bool> = scores.iter().map(|&s| decide(s, theta)).collect();
            let r = rates(labels, &decisions)?;
            Ok(RocPoint {
                theta,
                false_positive_rate: r.p_s,
                true_positive_rate: r.p_w,
            })
        })
        .collect()
}

/// `(fpr, tpr)` pairs sorted by false-positive rate with the `(0,0)` and
/// `(1,1)` corners added when missing.
fn closed_curve(points: &[RocPoint]) -> Vec<(f64, f64)> {
    let mut curve: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.false_positive_rate, p.true_positive_rate))
        .collect();
    if !curve.contains(&(0.0, 0.0)) {
        curve.push((0.0, 0.0));
    }
    if !curve.contains(&(1.0, 1.0)) {
        curve.push((1.0, 1.0));
    }
    curve.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    curve
}

/// Trapezoidal area under the ROC curve.
pub fn auc(points: &[RocPoint]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Evaluation(format!(
            "AUC needs at least 2 points, got {}",
            points.len()
        )));
    }
    let curve = closed_curve(points);
    Ok(curve
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum())
}

/// True-positive rate of the piecewise-linear ROC curve at `fpr`; on a
/// vertical segment the upper value is returned.
pub fn interpolate_tpr(points: &[RocPoint], fpr: f64) -> f64 {
    let curve = closed_curve(points);
    let fpr = fpr.clamp(0.0, 1.0);
    let mut best = f64::NEG_INFINITY;
    for w in curve.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if fpr < x0 || fpr > x1 {
            continue;
        }
        let y = if x1 == x0 {
            y0.max(y1)
        } else {
            y0 + (y1 - y0) * (fpr - x0) / (x1 - x0)
        };
        best = best.max(y);
    }
    best
}

/// Where trial speech comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum SpeechPool {
    /// Built-in speech surrogate, generated per trial.
    Synthetic,
    /// Mono recordings; a trial picks a random start clip and offset and
    /// concatenates clips until it has enough material.
    Clips(Vec<Vec<f64>>),
}

impl SpeechPool {
    fn material(&self, samples: usize, sample_rate: u32, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self {
            SpeechPool::Synthetic => {
                let seconds = samples as f64 / sample_rate as f64;
                let mut s = synthetic_speech(seconds.max(1.0 / sample_rate as f64), sample_rate, rng.gen())?;
                s.resize(samples, 0.0);
                Ok(s)
            }
            SpeechPool::Clips(clips) => {
                let total: usize = clips.iter().map(Vec::len).sum();
                if clips.is_empty() || total == 0 {
                    return Err(Error::Config("speech pool is empty".into()));
                }
                let mut idx = rng.gen_range(0..clips.len());
                while clips[idx].is_empty() {
                    idx = (idx + 1) % clips.len();
                }
                let first = &clips[idx];
                let offset = if first.len() > samples {
                    rng.gen_range(0..=first.len() - samples)
                } else {
                    0
                };
                let mut out = Vec::with_capacity(samples);
                out.extend_from_slice(&first[offset..first.len().min(offset + samples)]);
                while out.len() < samples {
                    idx = (idx + 1) % clips.len();
                    let need = samples - out.len();
                    let clip = &clips[idx];
                    out.extend_from_slice(&clip[..clip.len().min(need)]);
                }
                Ok(out)
            }
        }
    }
}

/// Everything the ROC protocol needs besides the sequence plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub stft: StftConfig,
    pub smoothing: f64,
    pub pr: DetectorConfig,
    pub msc: DetectorConfig,
    pub thresholds: Vec<f64>,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            stft: StftConfig::default(),
            smoothing: DEFAULT_SMOOTHING,
            pr: DetectorConfig::default(),
            msc: DetectorConfig::default(),
            thresholds: threshold_grid(DEFAULT_THRESHOLD_COUNT),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub seed: u64,
    pub m_w: usize,
    pub m_s: usize,
    pub pr: Vec<RocPoint>,
    pub msc: Vec<RocPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocComparison {
    pub pr: Vec<RocPoint>,
    pub msc: Vec<RocPoint>,
    pub auc_pr: f64,
    pub auc_msc: f64,
    pub trials: Vec<TrialResult>,
}

/// `n` trial seeds derived from `base`.
pub fn trial_seeds(base: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    (0..n).map(|_| rng.gen()).collect()
}

/// Per-frame soft scores, `None` where a frame has no decision.
pub type Scores = Vec<Option<f64>>;

/// Per-frame soft scores of both detectors from one PSD stream.
pub fn score_both(
    signal: &crate::spectral::TwoChannel,
    protocol: &Protocol,
) -> Result<(Scores, Scores)> {
    let pr_band = protocol.pr.resolve(&protocol.stft)?;
    let msc_band = protocol.msc.resolve(&protocol.stft)?;
    let frames = Stft::new(protocol.stft).frames(signal).frames;
    let mut state = PsdState::new(protocol.stft.num_bins(), protocol.smoothing)?;
    let mut pr = Vec::with_capacity(frames.len());
    let mut msc = Vec::with_capacity(frames.len());
    for frame in &frames {
        state.update(frame)?;
        pr.push(soft_pr(&state, &pr_band, protocol.pr.clamp_soft));
        msc.push(soft_msc(&state, &msc_band));
    }
    Ok((pr, msc))
}

pub fn run_trial(
    seed: u64,
    spec: &SequenceSpec,
    pool: &SpeechPool,
    protocol: &Protocol,
) -> Result<TrialResult> {
    let mut spec = spec.clone();
    spec.seed = seed;
    let stft = &protocol.stft;
    let needed = (spec.speech_duration_s() * stft.sample_rate() as f64).round() as usize + spec.plan.len();
    let speech = pool.material(needed, stft.sample_rate(), seed ^ 0x5eed_5eed)?;
    let seq = build_sequence(&spec, &speech, stft)?;
    let (pr_scores, msc_scores) = score_both(&seq.signal, protocol)?;
    let pr = roc_sweep(&pr_scores, &seq.labels, &protocol.thresholds)?;
    let msc = roc_sweep(&msc_scores, &seq.labels, &protocol.thresholds)?;
    let m_w = seq.labels.iter().filter(|&&l| l == 1).count();
    Ok(TrialResult {
        seed,
        m_w,
        m_s: seq.labels.len() - m_w,
        pr,
        msc,
    })
}

/// Runs one trial per seed (in parallel) and averages the rates per threshold.
pub fn run_trials(
    seeds: &[u64],
    spec: &SequenceSpec,
    pool: &SpeechPool,
    protocol: &Protocol,
) -> Result<RocComparison> {
    if seeds.is_empty() {
        return Err(Error::Config("at least one trial is required".into()));
    }
    if protocol.thresholds.len() < 2 {
        return Err(Error::Config("at least two thresholds are required".into()));
    }
    let trials = seeds
        .par_iter()
        .enumerate()
        .map(|(index, &seed)| {
            run_trial(seed, spec, pool, protocol).map_err(|e| Error::Trial {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pr = average_curves(trials.iter().map(|t| t.pr.as_slice()), &protocol.thresholds);
    let msc = average_curves(trials.iter().map(|t| t.msc.as_slice()), &protocol.thresholds);
    Ok(RocComparison {
        auc_pr: auc(&pr)?,
        auc_msc: auc(&msc)?,
        pr,
        msc,
        trials,
    })
}

/// Per-threshold mean of ROC curves sharing one threshold grid.
pub fn average_curves<'a>(
    curves: impl Iterator<Item = &'a [RocPoint]>,
    thresholds: &[f64],
) -> Vec<RocPoint> {
    let mut sums = vec![(0.0, 0.0); thresholds.len()];
    let mut n = 0usize;
    for curve in curves {
        for (slot, p) in sums.iter_mut().zip(curve) {
            slot.0 += p.false_positive_rate;
            slot.1 += p.true_positive_rate;
        }
        n += 1;
    }
    let n = n.max(1) as f64;
    thresholds
        .iter()
        .zip(sums)
        .map(|(&theta, (fpr, tpr))| RocPoint {
            theta,
            false_positive_rate: fpr / n,
            true_positive_rate: tpr / n,
        })
        .collect()
}
