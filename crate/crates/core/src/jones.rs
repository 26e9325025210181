//! Jones calculus for waveplates and polarization analyzers.
//!
//! Convention: a waveplate with fast axis at angle θ and retardance φ is
//! `R(θ) diag(1, e^{iφ}) R(-θ)`. For a half-wave plate this is
//! `[[cos2θ, sin2θ], [sin2θ, -cos2θ]]`. Matrices act on `(H, V)` column vectors.

use serde::{Deserialize, Serialize};

use crate::scalar::{cr, Real, C};

pub type Matrix2<T> = [[C<T>; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Retardance {
    Half,
    Quarter,
}

impl Retardance {
    fn phase<T: Real>(self) -> C<T> {
        match self {
            Retardance::Half => cr(-T::one()),
            Retardance::Quarter => C::new(T::zero(), T::one()),
        }
    }
}

pub fn waveplate<T: Real>(angle_deg: T, retardance: Retardance) -> Matrix2<T> {
    let th = angle_deg.to_radians();
    let (s, c) = th.sin_cos();
    let e = retardance.phase::<T>();
    let one = cr(T::one());
    [
        [cr(c * c) + e * (s * s), (one - e) * (c * s)],
        [(one - e) * (c * s), cr(s * s) + e * (c * c)],
    ]
}

/// Jones matrix of a QWP followed by a HWP (light meets the QWP first).
pub fn analyzer<T: Real>(qwp_deg: T, hwp_deg: T) -> Matrix2<T> {
    mul2(&waveplate(hwp_deg, Retardance::Half), &waveplate(qwp_deg, Retardance::Quarter))
}

pub fn mul2<T: Real>(a: &Matrix2<T>, b: &Matrix2<T>) -> Matrix2<T> {
    let mut out = [[C::new(T::zero(), T::zero()); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn dagger2<T: Real>(a: &Matrix2<T>) -> Matrix2<T> {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

pub fn identity2<T: Real>() -> Matrix2<T> {
    [[cr(T::one()), cr(T::zero())], [cr(T::zero()), cr(T::one())]]
}

/// Single-qubit Pauli operators in the `(H, V)` basis: `σx`, `σy`, `σz`.
pub fn pauli<T: Real>(which: usize) -> Matrix2<T> {
    let z = cr(T::zero());
    let o = cr(T::one());
    let i = C::new(T::zero(), T::one());
    match which {
        0 => [[z, o], [o, z]],
        1 => [[z, -i], [i, z]],
        2 => [[o, z], [z, -o]],
        _ => panic!("pauli index {which} out of range"),
    }
}
