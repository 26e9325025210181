//! Heralding latency and the experiment duty cycle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkTimingSpec<T> {
    pub fiber_to_bsm_m: T,
    pub fiber_to_memory_m: T,
    pub fiber_index_speed_m_per_s: T,
    pub detector_fiber_m: T,
    pub detector_latency_ns: T,
    pub logic_latency_ns: T,
    pub freespace_heralding_m: T,
    pub freespace_speed_m_per_s: T,
    pub storage_time_ns: T,
}

impl<T: Real> Default for LinkTimingSpec<T> {
    fn default() -> Self {
        Self {
            fiber_to_bsm_m: T::lit(5.0),
            fiber_to_memory_m: T::lit(3.0),
            fiber_index_speed_m_per_s: T::lit(2e8),
            detector_fiber_m: T::one(),
            detector_latency_ns: T::lit(15.0),
            logic_latency_ns: T::lit(8.0),
            freespace_heralding_m: T::lit(1.8),
            freespace_speed_m_per_s: T::lit(3e8),
            storage_time_ns: T::lit(55.6),
        }
    }
}

impl<T: Real> LinkTimingSpec<T> {
    /// Lossless signalling: heralds arrive instantly.
    pub fn zero_latency(storage_time_ns: T) -> Self {
        Self {
            fiber_to_bsm_m: T::zero(),
            fiber_to_memory_m: T::zero(),
            detector_fiber_m: T::zero(),
            detector_latency_ns: T::zero(),
            logic_latency_ns: T::zero(),
            freespace_heralding_m: T::zero(),
            storage_time_ns,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("fiber_to_bsm_m", self.fiber_to_bsm_m),
            ("fiber_to_memory_m", self.fiber_to_memory_m),
            ("detector_fiber_m", self.detector_fiber_m),
            ("detector_latency_ns", self.detector_latency_ns),
            ("logic_latency_ns", self.logic_latency_ns),
            ("freespace_heralding_m", self.freespace_heralding_m),
            ("storage_time_ns", self.storage_time_ns),
        ];
        for (name, v) in fields {
            if !(v >= T::zero()) {
                return Err(Error::OutOfRange { name, reason: format!("{v} < 0") });
            }
        }
        for (name, v) in [
            ("fiber_index_speed_m_per_s", self.fiber_index_speed_m_per_s),
            ("freespace_speed_m_per_s", self.freespace_speed_m_per_s),
        ] {
            if !(v > T::zero()) {
                return Err(Error::OutOfRange { name, reason: format!("{v} must be positive") });
            }
        }
        Ok(())
    }

    fn fiber_ns(&self, m: T) -> T {
        m / self.fiber_index_speed_m_per_s * T::lit(1e9)
    }

    /// Pump pulse to photon arrival at the memory.
    pub fn absorption_delay_ns(&self) -> T {
        self.fiber_ns(self.fiber_to_memory_m)
    }

    /// Pump pulse to herald arrival at the memory.
    pub fn herald_delay_ns(&self) -> T {
        self.fiber_ns(self.fiber_to_bsm_m)
            + self.fiber_ns(self.detector_fiber_m)
            + self.detector_latency_ns
            + self.logic_latency_ns
            + self.freespace_heralding_m / self.freespace_speed_m_per_s * T::lit(1e9)
    }

    /// Retrieved photon to registered detection.
    pub fn detection_delay_ns(&self) -> T {
        self.fiber_ns(self.detector_fiber_m) + self.detector_latency_ns
    }
}

/// Time the heralded excitation is still stored when the herald arrives.
pub fn heralding_margin<T: Real>(spec: &LinkTimingSpec<T>) -> T {
    spec.storage_time_ns - (spec.herald_delay_ns() - spec.absorption_delay_ns())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DutyCycleSpec<T> {
    pub afc_prep_ms: T,
    /// Applied before and after the storage window.
    pub guard_wait_ms: T,
    pub storage_window_ms: T,
    pub cycle_rate_hz: T,
}

impl<T: Real> Default for DutyCycleSpec<T> {
    fn default() -> Self {
        Self {
            afc_prep_ms: T::lit(3.8),
            guard_wait_ms: T::lit(0.6),
            storage_window_ms: T::lit(5.0),
            cycle_rate_hz: T::lit(100.0),
        }
    }
}

impl<T: Real> DutyCycleSpec<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("afc_prep_ms", self.afc_prep_ms),
            ("guard_wait_ms", self.guard_wait_ms),
            ("storage_window_ms", self.storage_window_ms),
        ] {
            if !(v >= T::zero()) {
                return Err(Error::OutOfRange { name, reason: format!("{v} < 0") });
            }
        }
        if !(self.cycle_rate_hz > T::zero()) {
            return Err(Error::OutOfRange {
                name: "cycle_rate_hz",
                reason: format!("{} must be positive", self.cycle_rate_hz),
            });
        }
        let sum = self.afc_prep_ms + T::lit(2.0) * self.guard_wait_ms + self.storage_window_ms;
        if (sum - self.cycle_period_ms()).abs() > T::lit(1e-6) * self.cycle_period_ms() {
            return Err(Error::OutOfRange {
                name: "duty",
                reason: format!("phases sum to {sum} ms but the cycle period is {} ms", self.cycle_period_ms()),
            });
        }
        Ok(())
    }

    pub fn cycle_period_ms(&self) -> T {
        T::lit(1e3) / self.cycle_rate_hz
    }

    /// Offset of the storage window within a cycle.
    pub fn storage_start_ms(&self) -> T {
        self.afc_prep_ms + self.guard_wait_ms
    }

    pub fn storage_fraction(&self) -> T {
        self.storage_window_ms * self.cycle_rate_hz * T::lit(1e-3)
    }
}
