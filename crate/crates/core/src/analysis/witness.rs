//! Witness, fidelity and CHSH evaluation on two-qubit states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jones::pauli;
use crate::scalar::Real;

use super::density::{kron, zero4, Matrix4, TwoQubitDensityMatrix};
use super::setting::{projector_from_setting, ArmSetting, MeasurementSetting, Port};

fn joint(a: &str, b: &str) -> Matrix4<f64> {
    MeasurementSetting::new(
        ArmSetting::<f64>::named(a).expect("label"),
        ArmSetting::<f64>::named(b).expect("label"),
    )
    .projector()
}

/// Witness operator `½(HV + VH + DA + AD − RL − LR)` built from analyzer projectors.
pub fn witness_operator<T: Real>() -> Matrix4<T> {
    let terms: [(&str, &str, f64); 6] = [
        ("H", "V", 1.0),
        ("V", "H", 1.0),
        ("D", "A", 1.0),
        ("A", "D", 1.0),
        ("R", "L", -1.0),
        ("L", "R", -1.0),
    ];
    let mut w = zero4::<T>();
    for (a, b, sign) in terms {
        let p = MeasurementSetting::new(
            ArmSetting::<T>::named(a).expect("label"),
            ArmSetting::<T>::named(b).expect("label"),
        )
        .projector();
        for i in 0..4 {
            for j in 0..4 {
                w[i][j] = w[i][j] + p[i][j] * T::lit(0.5 * sign);
            }
        }
    }
    w
}

/// `Tr(W ρ)`. Negative values certify entanglement.
pub fn witness_expectation<T: Real>(rho: &TwoQubitDensityMatrix<T>) -> T {
    rho.expectation(&witness_operator()).re
}

/// `⟨σ_k ⊗ σ_k⟩` for `k` in `x`, `y`, `z` (0, 1, 2).
pub fn pauli_correlator<T: Real>(rho: &TwoQubitDensityMatrix<T>, k: usize) -> T {
    let s = pauli::<T>(k);
    rho.expectation(&kron(&s, &s)).re
}

/// `(1 + ⟨σxσx⟩ − ⟨σyσy⟩ + ⟨σzσz⟩) / 4`.
pub fn fidelity_pauli<T: Real>(rho: &TwoQubitDensityMatrix<T>) -> T {
    (T::one() + pauli_correlator(rho, 0) - pauli_correlator(rho, 1) + pauli_correlator(rho, 2))
        * T::lit(0.25)
}

/// `⟨Φ⁺|ρ|Φ⁺⟩` evaluated directly.
pub fn fidelity_direct<T: Real>(rho: &TwoQubitDensityMatrix<T>) -> T {
    let m = rho.matrix();
    (m[0][0].re + m[3][3].re + m[0][3].re + m[3][0].re) * T::lit(0.5)
}

/// Fidelity to `|Φ⁺⟩`, cross-checked against the Pauli decomposition.
pub fn fidelity_phi_plus<T: Real>(rho: &TwoQubitDensityMatrix<T>) -> Result<T> {
    let f = fidelity_direct(rho);
    let g = fidelity_pauli(rho);
    if (f - g).abs() > T::channel_tol() {
        return Err(Error::InvalidDensityMatrix(format!(
            "fidelity routes disagree: {f} vs {g}"
        )));
    }
    Ok(f)
}

/// Correlation coefficient `p(++) − p(+−) − p(−+) + p(−−)` for two arms,
/// with `+` the `H` port of each analyzer.
pub fn correlation<T: Real>(rho: &TwoQubitDensityMatrix<T>, a: &ArmSetting<T>, b: &ArmSetting<T>) -> T {
    let mut e = T::zero();
    for (pa, sa) in [(Port::H, T::one()), (Port::V, -T::one())] {
        for (pb, sb) in [(Port::H, T::one()), (Port::V, -T::one())] {
            let pr = kron(
                &projector_from_setting(&a.with_port(pa)),
                &projector_from_setting(&b.with_port(pb)),
            );
            e = e + sa * sb * rho.expectation(&pr).re;
        }
    }
    e
}

/// The four CHSH analyzer settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings<T> {
    pub a: ArmSetting<T>,
    pub a_prime: ArmSetting<T>,
    pub b: ArmSetting<T>,
    pub b_prime: ArmSetting<T>,
}

impl<T: Real> ChshSettings<T> {
    /// `a = (0°, 0°)`, `a′ = (45°, 22.5°)`, `b = (22.5°, 11.25°)`, `b′ = (67.5°, 78.75°)`.
    pub fn experiment() -> Self {
        Self {
            a: ArmSetting::h(T::zero(), T::zero()),
            a_prime: ArmSetting::h(T::lit(45.0), T::lit(22.5)),
            b: ArmSetting::h(T::lit(22.5), T::lit(11.25)),
            b_prime: ArmSetting::h(T::lit(67.5), T::lit(78.75)),
        }
    }
}

/// `S = |E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′)|`.
pub fn chsh_s<T: Real>(rho: &TwoQubitDensityMatrix<T>, s: &ChshSettings<T>) -> T {
    (correlation(rho, &s.a, &s.b) + correlation(rho, &s.a, &s.b_prime) + correlation(rho, &s.a_prime, &s.b)
        - correlation(rho, &s.a_prime, &s.b_prime))
    .abs()
}

/// The six joint projectors of the witness, in the order HV, VH, DA, AD, RL, LR.
pub fn witness_projectors() -> [(String, Matrix4<f64>); 6] {
    [("H", "V"), ("V", "H"), ("D", "A"), ("A", "D"), ("R", "L"), ("L", "R")]
        .map(|(a, b)| (format!("{a}{b}"), joint(a, b)))
}
