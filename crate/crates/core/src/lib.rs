//! Dual-microphone wind-noise analysis.
//!
//! Wind hitting a closely spaced microphone pair produces turbulence whose
//! inter-channel coherence decays quickly with frequency, while an acoustic
//! source such as speech stays almost perfectly coherent. The ratio of the
//! power of the difference signal to the power of the sum signal separates
//! the two and drives a frame-wise wind detector.
//!
//! * [`corcos`]: Corcos coherence and the closed-form power ratios.
//! * [`spectral`]: STFT framing and recursively smoothed PSD estimates.
//! * [`detector`]: soft and hard power-ratio and MSC detectors.
//! * [`synthesis`]: coherent wind noise, delayed speech, labelled sequences.
//! * [`evaluation`]: threshold sweeps, ROC curves, multi-trial averaging.
//!
//! ```
//! use std::f64::consts::{FRAC_PI_2, TAU};
//! use windpr::corcos::{CorcosParams, SpeechGeometry};
//!
//! let wind = CorcosParams::new(0.004, FRAC_PI_2, 1.8)?;
//! let speech = SpeechGeometry::new(0.004, 0.0)?;
//! let omega = TAU * 300.0;
//! assert!(wind.pr_wind(omega) > 100.0 * speech.pr_speech(omega));
//! # Ok::<(), windpr::Error>(())
//! ```

pub mod corcos;
pub mod detector;
mod error;
pub mod evaluation;
pub mod spectral;
pub mod synthesis;

pub use error::{Error, Result};
