//! Type-II SPDC polarization-entangled pair sources.
//!
//! The raw source emits `Σ_n λ^n |n⟩_{a,H} |n⟩_{b,V}` (normalized, truncated at
//! `max_pairs`), with `p = λ²` the pair probability per pulse. A HWP at 22.5°
//! in each arm and a combining PBS post-select `|Φ⁺⟩` on coincidences.

use serde::{Deserialize, Serialize};

use crate::analysis::TwoQubitDensityMatrix;
use crate::error::{check_unit_interval, Error, Result};
use crate::fock::{
    measure_threshold, project_and_trace, ClickPattern, Detector, MixedFockState, ModeId, ModeKind, OpticalElement,
    Polarization, PostSelection, PureFockState, ThresholdDetectorSpec, Truncation,
};
use crate::scalar::{cr, Real};

/// Largest pair probability accepted by the model.
pub const MAX_PAIR_PROB: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct SpdcSourceSpec<T> {
    /// Pair probability per pump pulse.
    pub pair_prob: T,
    pub repetition_rate_hz: T,
    /// Overall probability that an emitted photon is detected in its arm.
    pub heralding_efficiency: T,
    /// Isotropic depolarization knob on the memory-side photon.
    pub intrinsic_visibility: T,
    /// Informational.
    pub linewidth_ghz: T,
    #[serde(default = "default_max_pairs")]
    pub max_pairs: u8,
    /// `p = pump_offset + pump_slope_per_mw × power`.
    #[serde(default)]
    pub pump: PumpCalibration<T>,
}

fn default_max_pairs() -> u8 {
    2
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpCalibration<T> {
    pub pump_offset: T,
    pub pump_slope_per_mw: T,
}

impl<T: Real> Default for PumpCalibration<T> {
    fn default() -> Self {
        Self {
            pump_offset: T::zero(),
            pump_slope_per_mw: T::lit(1e-3),
        }
    }
}

impl<T: Real> PumpCalibration<T> {
    pub fn pair_prob(&self, power_mw: T) -> T {
        self.pump_offset + self.pump_slope_per_mw * power_mw
    }

    pub fn power_for(&self, pair_prob: T) -> T {
        (pair_prob - self.pump_offset) / self.pump_slope_per_mw
    }
}

impl<T: Real> SpdcSourceSpec<T> {
    pub fn new(pair_prob: T) -> Self {
        Self {
            pair_prob,
            repetition_rate_hz: T::lit(8.0e7),
            heralding_efficiency: T::lit(0.083),
            intrinsic_visibility: T::one(),
            linewidth_ghz: T::one(),
            max_pairs: 2,
            pump: PumpCalibration::default(),
        }
    }

    pub fn with_pair_prob(self, pair_prob: T) -> Self {
        Self { pair_prob, ..self }
    }

    pub fn with_visibility(self, intrinsic_visibility: T) -> Self {
        Self {
            intrinsic_visibility,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pair_prob >= T::zero() && self.pair_prob <= T::lit(MAX_PAIR_PROB)) {
            return Err(Error::OutOfRange {
                name: "pair_prob",
                reason: format!("{} not in [0, {MAX_PAIR_PROB}]", self.pair_prob),
            });
        }
        check_unit_interval("heralding_efficiency", self.heralding_efficiency)?;
        check_unit_interval("intrinsic_visibility", self.intrinsic_visibility)?;
        if !(self.repetition_rate_hz > T::zero()) {
            return Err(Error::OutOfRange {
                name: "repetition_rate_hz",
                reason: "must be positive".into(),
            });
        }
        if self.max_pairs == 0 || self.max_pairs > 4 {
            return Err(Error::OutOfRange {
                name: "max_pairs",
                reason: format!("{} not in 1..=4", self.max_pairs),
            });
        }
        Ok(())
    }

    /// Threshold detector whose efficiency is the arm's overall detection probability.
    pub fn arm_detector(&self, detector: &ThresholdDetectorSpec<T>) -> ThresholdDetectorSpec<T> {
        detector.with_efficiency(self.heralding_efficiency)
    }

    fn truncation(&self) -> Truncation {
        let n = 2 * self.max_pairs;
        Truncation::default().combine(&Truncation::new(n, n))
    }
}

/// Raw two-mode-squeezed emission on internal paths `a` (H) and `b` (V).
pub fn spdc_raw_state_on<T: Real>(spec: &SpdcSourceSpec<T>, a: &str, b: &str) -> Result<PureFockState<T>> {
    spec.validate()?;
    let modes = vec![
        ModeId::optical(a, Polarization::H),
        ModeId::optical(a, Polarization::V),
        ModeId::optical(b, Polarization::H),
        ModeId::optical(b, Polarization::V),
    ];
    let lambda = spec.pair_prob.sqrt();
    let terms = (0..=spec.max_pairs).map(|n| (vec![n, 0, 0, n], cr(lambda.powi(n as i32))));
    PureFockState::from_terms(modes, terms, spec.truncation())?.normalized()
}

pub fn spdc_raw_state<T: Real>(spec: &SpdcSourceSpec<T>) -> Result<PureFockState<T>> {
    spdc_raw_state_on(spec, "a", "b")
}

/// HWP(22.5°) on both internal paths, then the combining PBS onto `out1`, `out2`.
pub fn interferometer<T: Real>(
    state: &PureFockState<T>,
    a: &str,
    b: &str,
    out1: &str,
    out2: &str,
) -> Result<PureFockState<T>> {
    let deg = T::lit(22.5);
    state
        .apply(&OpticalElement::hwp(a, deg))?
        .apply(&OpticalElement::hwp(b, deg))?
        .apply(&OpticalElement::pbs(a, b, out1, out2))
}

/// Exactly one pair through the interferometer: the four-term state with
/// amplitudes `½(HH, VV, −i HV|vac, +i vac|HV)` on `out1`, `out2`.
pub fn single_pair_state<T: Real>(out1: &str, out2: &str) -> Result<PureFockState<T>> {
    let a = format!("{out1}{out2}-a");
    let b = format!("{out1}{out2}-b");
    let modes = [ModeId::optical_pair(&a), ModeId::optical_pair(&b)].concat();
    let raw = PureFockState::from_terms(modes, [(vec![1, 0, 0, 1], cr(T::one()))], Truncation::default())?;
    interferometer(&raw, &a, &b, out1, out2)
}

/// Source output on `out1`, `out2`. Internal paths are named after the outputs.
pub fn source_state<T: Real>(spec: &SpdcSourceSpec<T>, out1: &str, out2: &str) -> Result<PureFockState<T>> {
    let a = format!("{out1}{out2}-a");
    let b = format!("{out1}{out2}-b");
    interferometer(&spdc_raw_state_on(spec, &a, &b)?, &a, &b, out1, out2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairStatistics<T> {
    pub p1: T,
    pub p2: T,
    pub p12: T,
    pub singles_rate_1: T,
    pub singles_rate_2: T,
    pub coincidence_rate: T,
    pub g2: T,
    pub window_ns: T,
}

impl<T: Real> PairStatistics<T> {
    pub fn recomputed_g2(&self) -> T {
        self.p12 / (self.p1 * self.p2)
    }
}

/// Click statistics of the two source outputs under the given detectors.
///
/// The window is taken to contain the whole photon wavepacket.
pub fn g2_cross_correlation<T: Real>(
    spec: &SpdcSourceSpec<T>,
    detectors: [ThresholdDetectorSpec<T>; 2],
    window_ns: T,
) -> Result<PairStatistics<T>> {
    let st = source_state(spec, "1", "2")?;
    pair_statistics(&st.into(), detectors, window_ns, spec.repetition_rate_hz)
}

/// `g2 = P12 / (P1 P2)` for clicks on paths `1` and `2` of any state.
pub fn pair_statistics<T: Real>(
    state: &MixedFockState<T>,
    detectors: [ThresholdDetectorSpec<T>; 2],
    window_ns: T,
    repetition_rate_hz: T,
) -> Result<PairStatistics<T>> {
    let dets = [
        Detector::on_path("1", "1", detectors[0]),
        Detector::on_path("2", "2", detectors[1]),
    ];
    let dist = measure_threshold(state, &dets)?;
    let p12 = dist.probability(&ClickPattern::of(&["1", "2"]));
    let p1 = dist.probability(&ClickPattern::of(&["1"])) + p12;
    let p2 = dist.probability(&ClickPattern::of(&["2"])) + p12;
    if !(p1 > T::zero() && p2 > T::zero()) {
        return Err(Error::ZeroSingles);
    }
    Ok(PairStatistics {
        p1,
        p2,
        p12,
        singles_rate_1: p1 * repetition_rate_hz,
        singles_rate_2: p2 * repetition_rate_hz,
        coincidence_rate: p12 * repetition_rate_hz,
        g2: p12 / (p1 * p2),
        window_ns,
    })
}

/// Pair probability at which `g2` equals `target`, by bisection on `p`.
pub fn pair_prob_for_g2<T: Real>(
    spec: &SpdcSourceSpec<T>,
    detectors: [ThresholdDetectorSpec<T>; 2],
    window_ns: T,
    target: T,
) -> Result<T> {
    let g2 = |p: T| g2_cross_correlation(&spec.with_pair_prob(p), detectors, window_ns).map(|s| s.g2);
    let mut lo = T::lit(1e-6);
    let mut hi = T::lit(MAX_PAIR_PROB);
    let (glo, ghi) = (g2(lo)?, g2(hi)?);
    if !(target <= glo && target >= ghi) {
        return Err(Error::OutOfRange {
            name: "g2 target",
            reason: format!("{target} outside reachable range [{ghi}, {glo}]"),
        });
    }
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if g2(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::epsilon() * hi * T::lit(4.0) {
            break;
        }
    }
    Ok((lo + hi) * T::lit(0.5))
}

/// Coincidence probability conditioned on exactly `n` pairs, `n = 0..=max_pairs`.
///
/// With these, `P12(p) = Σ c_n p^n / Σ p^n` in closed form.
pub fn coincidence_series<T: Real>(
    spec: &SpdcSourceSpec<T>,
    detectors: [ThresholdDetectorSpec<T>; 2],
) -> Result<Vec<T>> {
    let dets = [
        Detector::on_path("1", "1", detectors[0]),
        Detector::on_path("2", "2", detectors[1]),
    ];
    let modes = [ModeId::optical_pair("a"), ModeId::optical_pair("b")].concat();
    let mut out = Vec::new();
    for n in 0..=spec.max_pairs {
        let raw = PureFockState::from_terms(modes.clone(), [(vec![n, 0, 0, n], cr(T::one()))], spec.truncation())?;
        let st = interferometer(&raw, "a", "b", "1", "2")?;
        let dist = measure_threshold(&st.into(), &dets)?;
        out.push(dist.probability(&ClickPattern::of(&["1", "2"])));
    }
    Ok(out)
}

/// `P12(p)` and `dP12/dp` from the per-pair-number coincidence series.
pub fn coincidence_closed_form<T: Real>(series: &[T], p: T) -> (T, T) {
    let mut num = T::zero();
    let mut den = T::zero();
    let mut dnum = T::zero();
    let mut dden = T::zero();
    for (n, c) in series.iter().enumerate() {
        let pn = p.powi(n as i32);
        num = num + *c * pn;
        den = den + pn;
        if n > 0 {
            let d = T::count(n) * p.powi(n as i32 - 1);
            dnum = dnum + *c * d;
            dden = dden + d;
        }
    }
    (num / den, (dnum * den - num * dden) / (den * den))
}

/// Two-photon polarization state post-selected on one photon in each output,
/// after arm losses, with the intrinsic visibility applied to output 1.
pub fn postselected_source_rho<T: Real>(spec: &SpdcSourceSpec<T>) -> Result<PostSelection<T>> {
    let st: MixedFockState<T> = source_state(spec, "1", "2")?.into();
    let st = st
        .loss("1", spec.heralding_efficiency)?
        .loss("2", spec.heralding_efficiency)?;
    let mut sel = project_and_trace(&st, ("1", ModeKind::Optical), ("2", ModeKind::Optical))?;
    sel.rho = sel.rho.depolarize_qubit(0, spec.intrinsic_visibility);
    Ok(sel)
}

/// Visibility that brings a state of fidelity `f_model` down to `target`.
///
/// Depolarizing one qubit maps `F` to `(1 + v(4F − 1)) / 4`.
pub fn visibility_for_fidelity<T: Real>(f_model: T, target: T) -> Result<T> {
    let four = T::lit(4.0);
    let denom = four * f_model - T::one();
    let v = (four * target - T::one()) / denom;
    if !(denom > T::zero()) || !(v >= T::zero() && v <= T::one()) {
        return Err(Error::OutOfRange {
            name: "target fidelity",
            reason: format!("{target} not reachable from model fidelity {f_model}"),
        });
    }
    Ok(v)
}

/// Visibility calibrated so the post-selected source fidelity equals `target`.
pub fn calibrate_visibility<T: Real>(spec: &SpdcSourceSpec<T>, target: T) -> Result<T> {
    let base = postselected_source_rho(&spec.with_visibility(T::one()))?;
    let f = crate::analysis::fidelity_phi_plus(&base.rho)?;
    visibility_for_fidelity(f, target)
}

/// Shorthand for the ideal one-pair source density matrix.
pub fn ideal_source_rho<T: Real>() -> TwoQubitDensityMatrix<T> {
    TwoQubitDensityMatrix::phi_plus()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_for_zero_pair_probability() {
        let st = spdc_raw_state(&SpdcSourceSpec::<f64>::new(0.0)).unwrap();
        assert_eq!(st.len(), 1);
        assert!((st.amplitude(&[0, 0, 0, 0]).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn one_pair_input_gives_four_term_state() {
        let modes = [ModeId::optical_pair("a"), ModeId::optical_pair("b")].concat();
        let raw = PureFockState::<f64>::from_terms(modes, [(vec![1, 0, 0, 1], cr(1.0))], Truncation::default())
            .unwrap();
        let out = interferometer(&raw, "a", "b", "1", "2").unwrap();
        assert_eq!(out.len(), 4);
        for (_, a) in out.terms() {
            assert!((a.norm() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn visibility_closed_form_inverts_depolarization() {
        let rho = TwoQubitDensityMatrix::<f64>::werner(0.95);
        let f = crate::analysis::fidelity_phi_plus(&rho).unwrap();
        let v = visibility_for_fidelity(f, 0.9).unwrap();
        let g = crate::analysis::fidelity_phi_plus(&rho.depolarize_qubit(0, v)).unwrap();
        assert!((g - 0.9).abs() < 1e-12);
        assert!(visibility_for_fidelity(0.9, 0.95).is_err());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(SpdcSourceSpec::<f64>::new(0.3).validate().is_err());
        let mut s = SpdcSourceSpec::<f64>::new(0.01);
        s.heralding_efficiency = 1.5;
        assert!(s.validate().is_err());
    }
}
