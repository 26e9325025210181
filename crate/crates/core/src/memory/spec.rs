//! AFC memory parameters and the double-exponential efficiency model.

use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::scalar::Real;

/// Echo decay `A e^{-t/τ₁} + B e^{-t/τ₂}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayModel<T> {
    pub a: T,
    pub b: T,
    pub tau1_ns: T,
    pub tau2_ns: T,
}

impl<T: Real> DecayModel<T> {
    pub fn new(a: T, b: T, tau1_ns: T, tau2_ns: T) -> Self {
        Self { a, b, tau1_ns, tau2_ns }
    }

    pub fn measured() -> Self {
        Self::new(T::lit(1.04), T::lit(0.29), T::lit(134.0), T::lit(1141.0))
    }

    pub fn eval(&self, t_ns: T) -> T {
        self.a * (-t_ns / self.tau1_ns).exp() + self.b * (-t_ns / self.tau2_ns).exp()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= T::zero() && self.b >= T::zero() && self.a + self.b > T::zero()) {
            return Err(Error::OutOfRange {
                name: "decay amplitudes",
                reason: format!("A = {}, B = {}", self.a, self.b),
            });
        }
        if !(self.tau1_ns > T::zero() && self.tau2_ns > T::zero()) {
            return Err(Error::OutOfRange {
                name: "decay lifetimes",
                reason: format!("tau1 = {}, tau2 = {}", self.tau1_ns, self.tau2_ns),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemorySpec<T> {
    pub comb_period_mhz: T,
    pub storage_time_ns: T,
    pub bandwidth_ghz: T,
    /// Storage efficiency at `storage_time_ns`, memory alone.
    pub intrinsic_efficiency_at_ts: T,
    /// Storage efficiency at `storage_time_ns` including optical losses to the detector.
    pub end_to_end_efficiency: T,
    pub decay: DecayModel<T>,
    /// Probability that the incoming photon is absorbed. Recall then carries
    /// `efficiency / absorption_probability`; 1 puts all loss at recall.
    pub absorption_probability: T,
}

impl<T: Real> MemorySpec<T> {
    fn with_efficiencies(intrinsic: T, end_to_end: T) -> Self {
        Self {
            comb_period_mhz: T::lit(18.0),
            storage_time_ns: T::lit(55.6),
            bandwidth_ghz: T::one(),
            intrinsic_efficiency_at_ts: intrinsic,
            end_to_end_efficiency: end_to_end,
            decay: DecayModel::measured(),
            absorption_probability: T::one(),
        }
    }

    pub fn node_a() -> Self {
        Self::with_efficiencies(T::lit(0.143), T::lit(0.097))
    }

    pub fn node_b() -> Self {
        Self::with_efficiencies(T::lit(0.125), T::lit(0.064))
    }

    /// Lossless memory with the same timing.
    pub fn perfect() -> Self {
        Self::with_efficiencies(T::one(), T::one())
    }

    pub fn validate(&self) -> Result<()> {
        check_unit_interval("intrinsic_efficiency_at_ts", self.intrinsic_efficiency_at_ts)?;
        check_unit_interval("end_to_end_efficiency", self.end_to_end_efficiency)?;
        check_unit_interval("absorption_probability", self.absorption_probability)?;
        if self.absorption_probability == T::zero() {
            return Err(Error::OutOfRange {
                name: "absorption_probability",
                reason: "must be positive".into(),
            });
        }
        if self.end_to_end_efficiency > self.intrinsic_efficiency_at_ts {
            return Err(Error::OutOfRange {
                name: "end_to_end_efficiency",
                reason: format!(
                    "{} exceeds intrinsic efficiency {}",
                    self.end_to_end_efficiency, self.intrinsic_efficiency_at_ts
                ),
            });
        }
        if self.intrinsic_efficiency_at_ts > self.absorption_probability {
            return Err(Error::OutOfRange {
                name: "absorption_probability",
                reason: "smaller than the storage efficiency".into(),
            });
        }
        if !(self.comb_period_mhz > T::zero() && self.storage_time_ns > T::zero() && self.bandwidth_ghz > T::zero()) {
            return Err(Error::OutOfRange {
                name: "comb timing",
                reason: "comb period, storage time and bandwidth must be positive".into(),
            });
        }
        let implied = T::lit(1e3) / self.comb_period_mhz;
        if (implied - self.storage_time_ns).abs() > T::lit(0.1) {
            return Err(Error::OutOfRange {
                name: "storage_time_ns",
                reason: format!("{} ns does not match a {} MHz comb ({implied} ns)", self.storage_time_ns, self.comb_period_mhz),
            });
        }
        self.decay.validate()
    }

    /// Intrinsic efficiency after storing for `t_ns`, anchored at the storage time.
    pub fn efficiency_at(&self, t_ns: T) -> Result<T> {
        Ok(self.intrinsic_efficiency_at_ts * self.decay_ratio(t_ns)?)
    }

    /// End-to-end efficiency after storing for `t_ns`.
    pub fn end_to_end_at(&self, t_ns: T) -> Result<T> {
        Ok(self.end_to_end_efficiency * self.decay_ratio(t_ns)?)
    }

    fn decay_ratio(&self, t_ns: T) -> Result<T> {
        if !(t_ns >= T::zero()) {
            return Err(Error::OutOfRange {
                name: "t_ns",
                reason: format!("{t_ns} < 0"),
            });
        }
        Ok(self.decay.eval(t_ns) / self.decay.eval(self.storage_time_ns))
    }

    /// Time at which the efficiency falls to `1/e` of its `t = 0` value.
    pub fn lifetime_1e_ns(&self) -> T {
        let target = self.decay.eval(T::zero()) / T::E();
        let mut lo = T::zero();
        let mut hi = self.decay.tau1_ns.max(self.decay.tau2_ns) * T::lit(10.0);
        for _ in 0..200 {
            let mid = (lo + hi) * T::lit(0.5);
            if self.decay.eval(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo + hi) * T::lit(0.5)
    }

    /// `(t, η(t))` samples of the intrinsic efficiency.
    pub fn efficiency_curve(&self, times_ns: &[T]) -> Result<Vec<(T, T)>> {
        times_ns.iter().map(|&t| Ok((t, self.efficiency_at(t)?))).collect()
    }
}

/// Temporal-mode capacities of one memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeCapacity {
    /// Pulses that fit in one storage time at the pump repetition rate.
    pub repetition_limited: usize,
    /// Storage time × bandwidth.
    pub tbp_limited: usize,
}

fn floor_count<T: Real>(x: T) -> usize {
    // guard against 0.9999… from the division
    (x + T::lit(1e-9)).floor().to_usize().unwrap_or(0)
}

pub fn multimode_capacity<T: Real>(spec: &MemorySpec<T>, repetition_rate_hz: T) -> ModeCapacity {
    let spacing_ns = T::lit(1e9) / repetition_rate_hz;
    ModeCapacity {
        repetition_limited: floor_count(spec.storage_time_ns / spacing_ns),
        tbp_limited: floor_count(spec.storage_time_ns * spec.bandwidth_ghz),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_and_lifetime() {
        let m = MemorySpec::<f64>::node_a();
        assert!((m.efficiency_at(55.6).unwrap() - 0.143).abs() < 1e-15);
        assert!((m.lifetime_1e_ns() - 193.0).abs() < 2.0);
        assert!(m.efficiency_at(-1.0).is_err());
    }

    #[test]
    fn capacities() {
        let m = MemorySpec::<f64>::node_a();
        let c = multimode_capacity(&m, 8.0e7);
        assert_eq!(c.repetition_limited, 4);
        assert_eq!(c.tbp_limited, 55);
        let c = multimode_capacity(&m, 1e9 / 55.6);
        assert_eq!(c.repetition_limited, 1);
    }

    #[test]
    fn inconsistent_specs_are_rejected() {
        let mut m = MemorySpec::<f64>::node_a();
        assert!(m.validate().is_ok());
        m.end_to_end_efficiency = 0.2;
        assert!(m.validate().is_err());
        let mut m = MemorySpec::<f64>::node_a();
        m.storage_time_ns = 70.0;
        assert!(m.validate().is_err());
    }
}
