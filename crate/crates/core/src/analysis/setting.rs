//! Waveplate analyzer settings and the projectors they implement.
//!
//! Each arm is a QWP, then a HWP, then a PBS. The `H` port of the PBS projects
//! onto `J† |H⟩`, where `J` is the combined waveplate Jones matrix.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jones::{analyzer, Matrix2};
use crate::scalar::{Real, C};

use super::density::{kron, Matrix4};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Port {
    H,
    V,
}

impl Port {
    pub fn flipped(self) -> Self {
        match self {
            Port::H => Port::V,
            Port::V => Port::H,
        }
    }
}

/// One analyzer arm: waveplate angles in degrees plus the PBS output port.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmSetting<T> {
    pub qwp_deg: T,
    pub hwp_deg: T,
    pub port: Port,
}

impl<T: Real> ArmSetting<T> {
    /// Angles are reduced into `[0, 180)`.
    pub fn new(qwp_deg: T, hwp_deg: T, port: Port) -> Self {
        Self {
            qwp_deg: wrap_deg(qwp_deg),
            hwp_deg: wrap_deg(hwp_deg),
            port,
        }
    }

    pub fn h(qwp_deg: T, hwp_deg: T) -> Self {
        Self::new(qwp_deg, hwp_deg, Port::H)
    }

    pub fn with_port(self, port: Port) -> Self {
        Self { port, ..self }
    }

    /// Analyzer that transmits the named polarization state at the `H` port.
    ///
    /// Accepts `H`, `V`, `D`, `A`, `R`, `L`.
    pub fn named(label: &str) -> Result<Self> {
        let (q, h) = match label {
            "H" => (0.0, 0.0),
            "V" => (0.0, 45.0),
            "D" => (45.0, 22.5),
            "A" => (45.0, 67.5),
            "R" => (0.0, 22.5),
            "L" => (0.0, 67.5),
            other => {
                return Err(Error::Tomography(format!("unknown analyzer state `{other}`")));
            }
        };
        Ok(Self::h(T::lit(q), T::lit(h)))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("qwp_deg", self.qwp_deg), ("hwp_deg", self.hwp_deg)] {
            if !(a >= T::zero() && a < T::lit(180.0)) {
                return Err(Error::OutOfRange {
                    name,
                    reason: format!("{a} not in [0, 180)"),
                });
            }
        }
        Ok(())
    }
}

fn wrap_deg<T: Real>(a: T) -> T {
    let p = T::lit(180.0);
    let r = a % p;
    let r = if r < T::zero() { r + p } else { r };
    if r >= p {
        T::zero()
    } else {
        r
    }
}

/// Settings for both arms of a two-qubit correlation measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting<T> {
    pub arm1: ArmSetting<T>,
    pub arm2: ArmSetting<T>,
}

impl<T: Real> MeasurementSetting<T> {
    pub fn new(arm1: ArmSetting<T>, arm2: ArmSetting<T>) -> Self {
        Self { arm1, arm2 }
    }

    pub fn projector(&self) -> Matrix4<T> {
        kron(&projector_from_setting(&self.arm1), &projector_from_setting(&self.arm2))
    }
}

impl<T: Real> fmt::Display for ArmSetting<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}°, {}°)/{:?}", self.qwp_deg, self.hwp_deg, self.port)
    }
}

/// Rank-1 projector selected by one analyzer arm.
pub fn projector_from_setting<T: Real>(arm: &ArmSetting<T>) -> Matrix2<T> {
    let j = analyzer(arm.qwp_deg, arm.hwp_deg);
    let row = match arm.port {
        Port::H => 0,
        Port::V => 1,
    };
    // |φ⟩ = J† |port⟩, so φ_k = conj(J[row][k])
    let phi = [j[row][0].conj(), j[row][1].conj()];
    let mut p = [[C::new(T::zero(), T::zero()); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            p[a][b] = phi[a] * phi[b].conj();
        }
    }
    p
}

/// The sixteen product settings `{H, V, D, R} ⊗ {H, V, D, R}`, labelled e.g. `HD`.
pub fn standard_tomography_settings<T: Real>() -> Vec<(String, MeasurementSetting<T>)> {
    const STATES: [&str; 4] = ["H", "V", "D", "R"];
    let mut out = Vec::with_capacity(16);
    for a in STATES {
        for b in STATES {
            let s = MeasurementSetting::new(
                ArmSetting::named(a).expect("known label"),
                ArmSetting::named(b).expect("known label"),
            );
            out.push((format!("{a}{b}"), s));
        }
    }
    out
}
