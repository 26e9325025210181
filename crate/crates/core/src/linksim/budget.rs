//! Closed-form rate, noise and fidelity budget.

use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::scalar::Real;

const SECONDS_PER_HOUR: f64 = 3600.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateBudget<T> {
    pub fourfold_before_storage_per_h: T,
    pub end_to_end_a: T,
    pub end_to_end_b: T,
    pub duty: T,
    /// Measured fourfold rate after storage.
    pub measured_edr_per_h: T,
    /// Temporal modes in use for `measured_edr_per_h`.
    pub measured_modes: usize,
    pub herald_rate_hz: T,
    pub noise_rate_per_channel_hz: T,
    /// Coincidence window for the retrieved photons.
    pub retrieval_window_ns: T,
    pub bsm_window_ns: T,
    /// Storage efficiency over absorption probability, per node.
    pub recall_efficiency: T,
    pub transmission: T,
    pub detection_efficiency: T,
    /// Fidelity of the retrieved pair without noise.
    pub signal_fidelity: T,
    /// Storage efficiency per node at which `measured_edr_per_h` was taken.
    pub reference_storage_efficiency: [T; 2],
}

impl<T: Real> Default for RateBudget<T> {
    fn default() -> Self {
        Self {
            fourfold_before_storage_per_h: T::lit(410.0),
            end_to_end_a: T::lit(0.097),
            end_to_end_b: T::lit(0.064),
            duty: T::lit(0.5),
            measured_edr_per_h: T::lit(1.1),
            measured_modes: 4,
            herald_rate_hz: T::lit(100.0),
            noise_rate_per_channel_hz: T::lit(200.0),
            retrieval_window_ns: T::lit(3.0),
            bsm_window_ns: T::lit(2.0),
            recall_efficiency: T::lit(0.16),
            transmission: T::lit(0.75),
            detection_efficiency: T::lit(0.85),
            signal_fidelity: T::lit(0.804),
            reference_storage_efficiency: [T::lit(0.143), T::lit(0.125)],
        }
    }
}

impl<T: Real> RateBudget<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("end_to_end_a", self.end_to_end_a),
            ("end_to_end_b", self.end_to_end_b),
            ("duty", self.duty),
            ("recall_efficiency", self.recall_efficiency),
            ("transmission", self.transmission),
            ("detection_efficiency", self.detection_efficiency),
            ("signal_fidelity", self.signal_fidelity),
            ("reference_storage_efficiency", self.reference_storage_efficiency[0]),
            ("reference_storage_efficiency", self.reference_storage_efficiency[1]),
        ] {
            check_unit_interval(name, v)?;
        }
        for (name, v) in [
            ("fourfold_before_storage_per_h", self.fourfold_before_storage_per_h),
            ("measured_edr_per_h", self.measured_edr_per_h),
            ("noise_rate_per_channel_hz", self.noise_rate_per_channel_hz),
            ("retrieval_window_ns", self.retrieval_window_ns),
            ("bsm_window_ns", self.bsm_window_ns),
        ] {
            if !(v >= T::zero()) {
                return Err(Error::OutOfRange { name, reason: format!("{v} < 0") });
            }
        }
        if !(self.herald_rate_hz > T::zero()) {
            return Err(Error::OutOfRange {
                name: "herald_rate_hz",
                reason: format!("{} must be positive", self.herald_rate_hz),
            });
        }
        if self.measured_modes == 0 {
            return Err(Error::OutOfRange { name: "measured_modes", reason: "must be at least 1".into() });
        }
        Ok(())
    }
}

/// Expected fourfold rate after storage, per hour.
pub fn edr_analytic<T: Real>(b: &RateBudget<T>) -> T {
    b.fourfold_before_storage_per_h * b.end_to_end_a * b.end_to_end_b * b.duty
}

/// Linear scaling of a rate measured with `base_modes` temporal modes.
pub fn edr_multiplexed<T: Real>(base_edr: T, base_modes: usize, modes: usize) -> Result<T> {
    if modes == 0 || base_modes == 0 {
        return Err(Error::OutOfRange { name: "modes", reason: "must be at least 1".into() });
    }
    Ok(base_edr * T::count(modes) / T::count(base_modes))
}

/// Accidental coincidence probability between the two retrieved-photon channels per herald.
pub fn accidental_probability_per_herald<T: Real>(b: &RateBudget<T>) -> T {
    let x = b.noise_rate_per_channel_hz * b.retrieval_window_ns * T::lit(1e-9);
    x * x
}

/// Accidental fourfold rate per hour.
pub fn accidental_rate<T: Real>(b: &RateBudget<T>) -> T {
    accidental_probability_per_herald(b) * b.herald_rate_hz * T::lit(SECONDS_PER_HOUR)
}

pub fn heralding_probability<T: Real>(fourfold_per_h: T, herald_rate_hz: T) -> Result<T> {
    if !(herald_rate_hz > T::zero()) {
        return Err(Error::OutOfRange {
            name: "herald_rate_hz",
            reason: format!("{herald_rate_hz} must be positive"),
        });
    }
    Ok(fourfold_per_h / (herald_rate_hz * T::lit(SECONDS_PER_HOUR)))
}

/// Rate of heralded pairs held in the memories, undoing the losses after them.
pub fn stored_entanglement_rate<T: Real>(b: &RateBudget<T>) -> T {
    let per_node = b.recall_efficiency * b.transmission * b.detection_efficiency;
    b.measured_edr_per_h / (per_node * per_node)
}

/// Retrieved-pair fidelity against storage efficiency with an isotropic noise floor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityNoiseModel<T> {
    pub signal_fidelity: T,
    /// Signal fourfold probability per herald at `reference_efficiency`.
    pub signal_at_reference: T,
    /// Storage efficiency per memory at which `signal_at_reference` holds.
    pub reference_efficiency: T,
    pub noise_per_herald: T,
}

impl<T: Real> FidelityNoiseModel<T> {
    /// Signal from the measured heralding probability, noise from the accidental floor,
    /// reference efficiency the geometric mean of the two memories.
    pub fn from_budget(b: &RateBudget<T>) -> Result<Self> {
        Ok(Self {
            signal_fidelity: b.signal_fidelity,
            signal_at_reference: heralding_probability(b.measured_edr_per_h, b.herald_rate_hz)?,
            reference_efficiency: (b.reference_storage_efficiency[0] * b.reference_storage_efficiency[1]).sqrt(),
            noise_per_herald: accidental_probability_per_herald(b),
        })
    }

    fn signal(&self, eta: T) -> T {
        let r = eta / self.reference_efficiency;
        self.signal_at_reference * r * r
    }

    pub fn fidelity_at(&self, eta: T) -> Result<T> {
        if !(eta > T::zero() && eta <= T::one()) {
            return Err(Error::OutOfRange { name: "efficiency", reason: format!("{eta} outside (0, 1]") });
        }
        let s = self.signal(eta);
        let n = self.noise_per_herald;
        Ok((self.signal_fidelity * s + T::lit(0.25) * n) / (s + n))
    }

    /// Efficiency at which the fidelity falls to `threshold`, if it ever does.
    pub fn crossing(&self, threshold: T) -> Option<T> {
        let quarter = T::lit(0.25);
        if !(self.signal_fidelity > threshold && threshold > quarter && self.noise_per_herald > T::zero()) {
            return None;
        }
        let s = (threshold - quarter) * self.noise_per_herald / (self.signal_fidelity - threshold);
        Some(self.reference_efficiency * (s / self.signal_at_reference).sqrt())
    }
}

pub fn fidelity_vs_efficiency<T: Real>(model: &FidelityNoiseModel<T>, grid: &[T]) -> Result<Vec<(T, T)>> {
    grid.iter().map(|&eta| Ok((eta, model.fidelity_at(eta)?))).collect()
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (a + (b - a) * T::count(i) / T::count(n - 1)).exp())
                .collect()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetLine {
    pub quantity: &'static str,
    pub value: f64,
    pub unit: &'static str,
    /// Published value, when there is one.
    pub reference: Option<f64>,
}

/// Every closed-form budget quantity for one scenario.
pub fn budget_table<T: Real>(
    b: &RateBudget<T>,
    timing: &super::LinkTimingSpec<T>,
    target_modes: usize,
) -> Result<Vec<BudgetLine>> {
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    let noise = FidelityNoiseModel::from_budget(b)?;
    let mut lines = vec![
        BudgetLine { quantity: "heralding_margin", value: f(super::heralding_margin(timing)), unit: "ns", reference: Some(11.6) },
        BudgetLine { quantity: "edr_analytic", value: f(edr_analytic(b)), unit: "1/h", reference: Some(1.27) },
        BudgetLine {
            quantity: "edr_multiplexed",
            value: f(edr_multiplexed(b.measured_edr_per_h, b.measured_modes, target_modes)?),
            unit: "1/h",
            reference: Some(15.4),
        },
        BudgetLine { quantity: "accidental_rate", value: f(accidental_rate(b)), unit: "1/h", reference: Some(1.3e-7) },
        BudgetLine {
            quantity: "accidental_probability_per_herald",
            value: f(accidental_probability_per_herald(b)),
            unit: "1",
            reference: Some(3.6e-13),
        },
        BudgetLine {
            quantity: "heralding_probability",
            value: f(heralding_probability(b.measured_edr_per_h, b.herald_rate_hz)?),
            unit: "1",
            reference: Some(3.06e-6),
        },
        BudgetLine { quantity: "stored_entanglement_rate", value: f(stored_entanglement_rate(b)), unit: "1/h", reference: Some(106.0) },
    ];
    if let Some(eta) = noise.crossing(T::lit(0.5)) {
        lines.push(BudgetLine { quantity: "classical_bound_efficiency", value: f(eta), unit: "1", reference: Some(1e-4) });
    }
    Ok(lines)
}
