//! Closed-form model of a two-microphone array observing speech and
//! convective turbulence.
//!
//! The turbulence (wind) contributions at the two sensors are modelled with
//! the Corcos coherence: an exponential magnitude decay in the
//! frequency-distance product and a convective phase term,
//!
//! ```text
//! γ(ω) = exp(-α(θw)·ω·d / Uc) · exp(i·ω·d·cos θw / Uc),   Uc = 0.8·U
//! α(θw) = α1·|cos θw| + α2·|sin θw|
//! ```
//!
//! From it follow the difference-to-sum power ratios of clean speech, pure
//! wind and their mixture. Everything here is a pure function of its inputs.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_positive, Error, Result};

/// Default longitudinal decay rate.
pub const DEFAULT_ALPHA1: f64 = 0.125;
/// Default lateral decay rate.
pub const DEFAULT_ALPHA2: f64 = 0.7;
/// Default speed of sound in m/s.
pub const SPEED_OF_SOUND: f64 = 343.0;
/// Ratio between the convective turbulence speed and the free-field wind speed.
pub const CONVECTIVE_RATIO: f64 = 0.8;

/// Direction-dependent coherence decay rate `α1·|cos θw| + α2·|sin θw|`.
pub fn decay_rate(theta_w: f64, alpha1: f64, alpha2: f64) -> Result<f64> {
    require_positive("alpha1", alpha1)?;
    require_positive("alpha2", alpha2)?;
    require_finite("theta_w", theta_w)?;
    Ok(decay_rate_unchecked(theta_w, alpha1, alpha2))
}

#[inline]
fn decay_rate_unchecked(theta_w: f64, alpha1: f64, alpha2: f64) -> f64 {
    let (sin, cos) = theta_w.sin_cos();
    alpha1 * cos.abs() + alpha2 * sin.abs()
}

/// Geometry and flow parameters of the Corcos turbulence model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorcosParams {
    mic_distance: f64,
    wind_doa: f64,
    wind_speed: f64,
    alpha1: f64,
    alpha2: f64,
}

impl CorcosParams {
    /// Parameters with the default decay rates.
    ///
    /// `mic_distance` in meters, `wind_doa` in radians relative to the
    /// microphone axis, `wind_speed` is the free-field speed in m/s.
    pub fn new(mic_distance: f64, wind_doa: f64, wind_speed: f64) -> Result<Self> {
        Self::with_decay(
            mic_distance,
            wind_doa,
            wind_speed,
            DEFAULT_ALPHA1,
            DEFAULT_ALPHA2,
        )
    }

    pub fn with_decay(
        mic_distance: f64,
        wind_doa: f64,
        wind_speed: f64,
        alpha1: f64,
        alpha2: f64,
    ) -> Result<Self> {
        require_positive("mic_distance", mic_distance)?;
        require_finite("wind_doa", wind_doa)?;
        require_positive("wind_speed", wind_speed)?;
        require_positive("alpha1", alpha1)?;
        require_positive("alpha2", alpha2)?;
        if CONVECTIVE_RATIO * wind_speed <= 0.0 {
            return Err(Error::parameter(
                "wind_speed",
                "convective speed underflows to zero",
            ));
        }
        Ok(Self {
            mic_distance,
            wind_doa,
            wind_speed,
            alpha1,
            alpha2,
        })
    }

    pub fn mic_distance(&self) -> f64 {
        self.mic_distance
    }

    pub fn wind_doa(&self) -> f64 {
        self.wind_doa
    }

    pub fn wind_speed(&self) -> f64 {
        self.wind_speed
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    /// Convective speed `Uc = 0.8·U`.
    pub fn convective_speed(&self) -> f64 {
        CONVECTIVE_RATIO * self.wind_speed
    }

    pub fn decay_rate(&self) -> f64 {
        decay_rate_unchecked(self.wind_doa, self.alpha1, self.alpha2)
    }

    /// Complex coherence between the two wind contributions at angular
    /// frequency `omega` (rad/s).
    ///
    /// Returns exactly `1 + 0i` at `omega == 0`.
    pub fn coherence(&self, omega: f64) -> ComplexCoherence {
        debug_assert!(omega >= 0.0, "negative angular frequency {omega}");
        if omega == 0.0 {
            return ComplexCoherence(Complex64::new(1.0, 0.0));
        }
        let scaled = omega * self.mic_distance / self.convective_speed();
        let magnitude = (-self.decay_rate() * scaled).exp();
        let phase = scaled * self.wind_doa.cos();
        ComplexCoherence(Complex64::from_polar(magnitude, phase))
    }

    /// Power ratio of pure wind noise.
    ///
    /// Values above one occur wherever the real part of the coherence is
    /// negative, which happens for flow along the microphone axis.
    pub fn pr_wind(&self, omega: f64) -> f64 {
        self.coherence(omega).wind_power_ratio()
    }
}

/// Speech source direction and array spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeechGeometry {
    mic_distance: f64,
    speech_doa: f64,
    speed_of_sound: f64,
}

impl SpeechGeometry {
    /// Geometry with the default speed of sound (343 m/s).
    pub fn new(mic_distance: f64, speech_doa: f64) -> Result<Self> {
        Self::with_speed_of_sound(mic_distance, speech_doa, SPEED_OF_SOUND)
    }

    pub fn with_speed_of_sound(
        mic_distance: f64,
        speech_doa: f64,
        speed_of_sound: f64,
    ) -> Result<Self> {
        require_positive("mic_distance", mic_distance)?;
        require_finite("speech_doa", speech_doa)?;
        require_positive("speed_of_sound", speed_of_sound)?;
        Ok(Self {
            mic_distance,
            speech_doa,
            speed_of_sound,
        })
    }

    /// Source at 90° to the array axis; zero inter-channel delay.
    pub fn broadside(mic_distance: f64) -> Result<Self> {
        Self::new(mic_distance, FRAC_PI_2)
    }

    pub fn mic_distance(&self) -> f64 {
        self.mic_distance
    }

    pub fn speech_doa(&self) -> f64 {
        self.speech_doa
    }

    pub fn speed_of_sound(&self) -> f64 {
        self.speed_of_sound
    }

    /// Projected spacing `d·cos θs` in meters.
    pub fn projected_distance(&self) -> f64 {
        self.mic_distance * self.speech_doa.cos()
    }

    /// Time difference of arrival `d·cos θs / c` in seconds.
    pub fn tdoa(&self) -> f64 {
        self.projected_distance() / self.speed_of_sound
    }

    /// Half the inter-channel phase shift at `omega`.
    fn half_phase(&self, omega: f64) -> f64 {
        omega * self.projected_distance() / (2.0 * self.speed_of_sound)
    }

    /// Power ratio of clean speech, `tan²(ω·d·cos θs / 2c)`.
    ///
    /// Returns `f64::INFINITY` when the argument sits on an asymptote to
    /// within floating-point resolution.
    pub fn pr_speech(&self, omega: f64) -> f64 {
        debug_assert!(omega >= 0.0, "negative angular frequency {omega}");
        let (sin, cos) = self.half_phase(omega).sin_cos();
        if cos.abs() <= f64::EPSILON * sin.abs() {
            return f64::INFINITY;
        }
        (sin * sin) / (cos * cos)
    }
}

/// Complex coherence value; its magnitude never exceeds one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexCoherence(Complex64);

impl ComplexCoherence {
    pub fn new(value: Complex64) -> Result<Self> {
        if !(value.re.is_finite() && value.im.is_finite()) || value.norm() > 1.0 + 1e-12 {
            return Err(Error::parameter(
                "coherence",
                format!("magnitude must be <= 1, got {}", value.norm()),
            ));
        }
        Ok(Self(value))
    }

    pub fn zero() -> Self {
        Self(Complex64::new(0.0, 0.0))
    }

    pub fn one() -> Self {
        Self(Complex64::new(1.0, 0.0))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn magnitude(&self) -> f64 {
        self.0.norm()
    }

    pub fn phase(&self) -> f64 {
        self.0.arg()
    }

    /// `(1 - Re γ) / (1 + Re γ)`: the difference-to-sum ratio of two
    /// equal-power signals with this coherence.
    pub fn wind_power_ratio(&self) -> f64 {
        let re = self.0.re;
        (1.0 - re) / (1.0 + re)
    }
}

impl From<ComplexCoherence> for Complex64 {
    fn from(c: ComplexCoherence) -> Self {
        c.0
    }
}

/// Power ratio of a speech/wind mixture with speech PSD `phi_ss` and wind PSD
/// `phi_vv` (equal at both microphones).
///
/// Both descriptions must agree on the microphone spacing.
pub fn pr_mixture(
    phi_ss: f64,
    phi_vv: f64,
    geometry: &SpeechGeometry,
    params: &CorcosParams,
    omega: f64,
) -> Result<f64> {
    if !(phi_ss >= 0.0 && phi_ss.is_finite()) {
        return Err(Error::parameter("phi_ss", format!("must be >= 0, got {phi_ss}")));
    }
    if !(phi_vv >= 0.0 && phi_vv.is_finite()) {
        return Err(Error::parameter("phi_vv", format!("must be >= 0, got {phi_vv}")));
    }
    if phi_ss == 0.0 && phi_vv == 0.0 {
        return Err(Error::Undefined(
            "speech and wind PSDs are both zero".into(),
        ));
    }
    if geometry.mic_distance() != params.mic_distance() {
        return Err(Error::parameter(
            "mic_distance",
            format!(
                "speech geometry uses {} m but wind model uses {} m",
                geometry.mic_distance(),
                params.mic_distance()
            ),
        ));
    }
    let (sin, cos) = geometry.half_phase(omega).sin_cos();
    let re = params.coherence(omega).value().re;
    let num = 4.0 * phi_ss * sin * sin + 2.0 * phi_vv * (1.0 - re);
    let den = 4.0 * phi_ss * cos * cos + 2.0 * phi_vv * (1.0 + re);
    if den <= f64::EPSILON * f64::EPSILON * num {
        return Ok(f64::INFINITY);
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_4, PI, TAU};

    #[test]
    fn decay_rate_endpoints() {
        assert_eq!(decay_rate(0.0, 0.125, 0.7).unwrap(), 0.125);
        assert_relative_eq!(decay_rate(FRAC_PI_2, 0.125, 0.7).unwrap(), 0.7, epsilon = 1e-15);
        // (0.125 + 0.7) / sqrt(2)
        assert_relative_eq!(
            decay_rate(FRAC_PI_4, 0.125, 0.7).unwrap(),
            0.583_363_094_478_901_7,
            epsilon = 1e-14
        );
    }

    #[test]
    fn decay_rate_rejects_non_positive_constants() {
        assert!(matches!(
            decay_rate(0.3, 0.0, 0.7),
            Err(Error::Parameter { name: "alpha1", .. })
        ));
        assert!(decay_rate(0.3, 0.125, -1.0).is_err());
    }

    #[test]
    fn decay_rate_symmetry() {
        for &t in &[0.1, 0.7, 1.3, 2.9] {
            let a = decay_rate(t, 0.125, 0.7).unwrap();
            assert_relative_eq!(a, decay_rate(-t, 0.125, 0.7).unwrap(), epsilon = 1e-15);
            assert_relative_eq!(a, decay_rate(PI - t, 0.125, 0.7).unwrap(), epsilon = 1e-14);
        }
    }

    #[test]
    fn coherence_at_dc_is_exactly_one() {
        let p = CorcosParams::new(0.02, 0.3, 2.8).unwrap();
        assert_eq!(p.coherence(0.0).value(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn broadside_wind_has_real_coherence() {
        let p = CorcosParams::new(0.004, FRAC_PI_2, 1.8).unwrap();
        for f in [10.0, 100.0, 1000.0] {
            let g = p.coherence(TAU * f).value();
            assert!(g.re > 0.0);
            assert!(g.im.abs() < 1e-15 * g.re.max(1e-300) + 1e-17);
        }
    }

    #[test]
    fn coherence_reference_value() {
        let p = CorcosParams::new(0.02, 0.0, 2.8).unwrap();
        let g = p.coherence(TAU * 100.0);
        assert_relative_eq!(g.magnitude(), 0.495_965_773_253_106_5, epsilon = 1e-12);
        // unwrapped phase is 5.609986881410344 rad
        let raw = TAU * 100.0 * 0.02 / 2.24;
        assert_relative_eq!(raw, 5.609_986_881_410_344, epsilon = 1e-12);
        assert_relative_eq!(g.phase(), raw - TAU, epsilon = 1e-12);
    }

    #[test]
    fn speech_ratio_reference_values() {
        let broadside = SpeechGeometry::broadside(0.004).unwrap();
        assert!(broadside.pr_speech(TAU * 3000.0) < 1e-20);
        let endfire = SpeechGeometry::new(0.004, 0.0).unwrap();
        assert_eq!(endfire.pr_speech(0.0), 0.0);
        assert_relative_eq!(
            endfire.pr_speech(TAU * 1000.0),
            1.343_446_045_103_434_5e-3,
            max_relative = 1e-12
        );
        assert_relative_eq!(endfire.tdoa(), 1.166_180_758_017_492_7e-5, max_relative = 1e-12);
    }

    #[test]
    fn speech_ratio_asymptote_is_infinite() {
        // half phase = π/2 when ω = π·c / d
        let g = SpeechGeometry::new(0.02, 0.0).unwrap();
        let omega = PI * SPEED_OF_SOUND / 0.02;
        assert_eq!(g.pr_speech(omega), f64::INFINITY);
    }

    #[test]
    fn wind_ratio_reference_values() {
        let p = CorcosParams::new(0.02, 0.0, 2.8).unwrap();
        assert_eq!(p.pr_wind(0.0), 0.0);
        assert_relative_eq!(p.pr_wind(TAU * 100.0), 0.441_169_664_621_299_75, epsilon = 1e-12);
        assert_eq!(ComplexCoherence::zero().wind_power_ratio(), 1.0);
        let far = CorcosParams::new(50.0, 0.0, 2.8).unwrap();
        assert_relative_eq!(far.pr_wind(TAU * 100.0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mixture_reference_value() {
        // θs = 90°, γ = 0: (0 + 2) / (4 + 2)
        let geom = SpeechGeometry::broadside(50.0).unwrap();
        let params = CorcosParams::new(50.0, FRAC_PI_2, 1.8).unwrap();
        let omega = TAU * 400.0;
        assert!(params.coherence(omega).magnitude() < 1e-300);
        let pr = pr_mixture(1.0, 1.0, &geom, &params, omega).unwrap();
        assert_relative_eq!(pr, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn mixture_errors() {
        let geom = SpeechGeometry::broadside(0.004).unwrap();
        let params = CorcosParams::new(0.004, 0.0, 1.8).unwrap();
        assert!(matches!(
            pr_mixture(0.0, 0.0, &geom, &params, 1.0),
            Err(Error::Undefined(_))
        ));
        assert!(pr_mixture(-1.0, 1.0, &geom, &params, 1.0).is_err());
        let other = CorcosParams::new(0.02, 0.0, 1.8).unwrap();
        assert!(pr_mixture(1.0, 1.0, &geom, &other, 1.0).is_err());
    }

    #[test]
    fn constructors_validate() {
        assert!(CorcosParams::new(0.0, 0.0, 1.0).is_err());
        assert!(CorcosParams::new(0.01, 0.0, -1.0).is_err());
        assert!(CorcosParams::new(0.01, f64::NAN, 1.0).is_err());
        assert!(SpeechGeometry::with_speed_of_sound(0.01, 0.0, 0.0).is_err());
        assert!(ComplexCoherence::new(Complex64::new(0.9, 0.9)).is_err());
    }
}
