//! Two-qubit polarization density matrices in the `{HH, HV, VH, VV}` basis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jones::{pauli, Matrix2};
use crate::scalar::{cr, Real, C};

pub type Matrix4<T> = [[C<T>; 4]; 4];

pub(crate) fn zero4<T: Real>() -> Matrix4<T> {
    [[cr(T::zero()); 4]; 4]
}

pub(crate) fn mul4<T: Real>(a: &Matrix4<T>, b: &Matrix4<T>) -> Matrix4<T> {
    let mut out = zero4();
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            if aik.re == T::zero() && aik.im == T::zero() {
                continue;
            }
            for j in 0..4 {
                out[i][j] = out[i][j] + aik * b[k][j];
            }
        }
    }
    out
}

pub(crate) fn dagger4<T: Real>(a: &Matrix4<T>) -> Matrix4<T> {
    let mut out = zero4();
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

/// Kronecker product `a ⊗ b`, qubit 1 is the most significant index.
pub fn kron<T: Real>(a: &Matrix2<T>, b: &Matrix2<T>) -> Matrix4<T> {
    let mut out = zero4();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub(crate) fn trace_prod<T: Real>(a: &Matrix4<T>, b: &Matrix4<T>) -> C<T> {
    let mut acc = cr(T::zero());
    for i in 0..4 {
        for k in 0..4 {
            acc = acc + a[i][k] * b[k][i];
        }
    }
    acc
}

/// Eigenvalues of a Hermitian 4×4 matrix, ascending.
///
/// Uses cyclic Jacobi on the real symmetric 8×8 embedding `[[A, -B], [B, A]]`,
/// whose spectrum is the Hermitian spectrum with every value doubled.
pub fn hermitian_eigenvalues<T: Real>(h: &Matrix4<T>) -> [T; 4] {
    let n = 8;
    let mut a = [[T::zero(); 8]; 8];
    for i in 0..4 {
        for j in 0..4 {
            let re = (h[i][j].re + h[j][i].re) * T::lit(0.5);
            let im = (h[i][j].im - h[j][i].im) * T::lit(0.5);
            a[i][j] = re;
            a[i + 4][j + 4] = re;
            a[i][j + 4] = -im;
            a[i + 4][j] = im;
        }
    }
    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off = off + a[i][j] * a[i][j];
                }
            }
        }
        if off <= T::epsilon() * T::epsilon() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut d: Vec<T> = (0..n).map(|i| a[i][i]).collect();
    d.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    [
        (d[0] + d[1]) * T::lit(0.5),
        (d[2] + d[3]) * T::lit(0.5),
        (d[4] + d[5]) * T::lit(0.5),
        (d[6] + d[7]) * T::lit(0.5),
    ]
}

/// A validated two-qubit density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitDensityMatrix<T: Real> {
    m: Matrix4<T>,
}

impl<T: Real> TwoQubitDensityMatrix<T> {
    /// Builds a density matrix, checking Hermiticity, trace and positivity
    /// against [`Real::channel_tol`].
    pub fn new(m: Matrix4<T>) -> Result<Self> {
        let rho = Self { m };
        rho.validate(T::channel_tol())?;
        Ok(rho)
    }

    /// Wraps a matrix without validation. Callers own the invariants.
    pub fn new_unchecked(m: Matrix4<T>) -> Self {
        Self { m }
    }

    /// Normalizes a Hermitian PSD matrix of positive trace.
    pub fn from_unnormalized(m: Matrix4<T>) -> Result<Self> {
        let tr = (0..4).fold(T::zero(), |acc, i| acc + m[i][i].re);
        if !(tr > T::zero()) {
            return Err(Error::NoPostSelectedMass);
        }
        let mut out = m;
        for row in out.iter_mut() {
            for x in row.iter_mut() {
                *x = *x / tr;
            }
        }
        Self::new(out)
    }

    pub fn from_pure(v: [C<T>; 4]) -> Result<Self> {
        let mut m = zero4();
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = v[i] * v[j].conj();
            }
        }
        Self::from_unnormalized(m)
    }

    pub fn phi_plus() -> Self {
        let h = cr(T::lit(0.5));
        let z = cr(T::zero());
        Self {
            m: [[h, z, z, h], [z, z, z, z], [z, z, z, z], [h, z, z, h]],
        }
    }

    pub fn maximally_mixed() -> Self {
        let mut m = zero4();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = cr(T::lit(0.25));
        }
        Self { m }
    }

    /// `w |Φ⁺⟩⟨Φ⁺| + (1 - w) I/4`.
    pub fn werner(w: T) -> Self {
        let a = Self::phi_plus();
        let b = Self::maximally_mixed();
        let mut m = zero4();
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = a.m[i][j] * w + b.m[i][j] * (T::one() - w);
            }
        }
        Self { m }
    }

    pub fn product(a: &Matrix2<T>, b: &Matrix2<T>) -> Result<Self> {
        Self::new(kron(a, b))
    }

    pub fn matrix(&self) -> &Matrix4<T> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.m[i][j]
    }

    pub fn trace(&self) -> C<T> {
        (0..4).fold(cr(T::zero()), |acc, i| acc + self.m[i][i])
    }

    /// `Tr(op ρ)`.
    pub fn expectation(&self, op: &Matrix4<T>) -> C<T> {
        trace_prod(op, &self.m)
    }

    pub fn eigenvalues(&self) -> [T; 4] {
        hermitian_eigenvalues(&self.m)
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues()[0]
    }

    pub fn purity(&self) -> T {
        trace_prod(&self.m, &self.m).re
    }

    pub fn validate(&self, tol: T) -> Result<()> {
        for i in 0..4 {
            for j in 0..4 {
                let d = (self.m[i][j] - self.m[j][i].conj()).norm();
                if d.is_nan() || d > tol {
                    return Err(Error::InvalidDensityMatrix(format!(
                        "not Hermitian at ({i},{j}): deviation {d}"
                    )));
                }
            }
        }
        let tr = self.trace();
        if (tr - cr(T::one())).norm() > tol {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -tol {
            return Err(Error::InvalidDensityMatrix(format!("min eigenvalue {min}")));
        }
        Ok(())
    }

    /// `½ Σ|λ_i(ρ - σ)|`.
    pub fn trace_distance(&self, other: &Self) -> T {
        let mut d = zero4();
        for i in 0..4 {
            for j in 0..4 {
                d[i][j] = self.m[i][j] - other.m[i][j];
            }
        }
        hermitian_eigenvalues(&d)
            .iter()
            .fold(T::zero(), |acc, x| acc + x.abs())
            * T::lit(0.5)
    }

    /// Conjugates by `U ⊗ I` (`qubit = 0`) or `I ⊗ U` (`qubit = 1`).
    pub fn apply_local_unitary(&self, qubit: usize, u: &Matrix2<T>) -> Self {
        let id = crate::jones::identity2();
        let full = if qubit == 0 { kron(u, &id) } else { kron(&id, u) };
        Self {
            m: mul4(&mul4(&full, &self.m), &dagger4(&full)),
        }
    }

    /// Single-qubit depolarizing channel with visibility `v`:
    /// `ρ ↦ (1+3v)/4 ρ + (1-v)/4 Σ_k σ_k ρ σ_k` on the chosen qubit.
    pub fn depolarize_qubit(&self, qubit: usize, v: T) -> Self {
        let mut out = zero4();
        let w0 = (T::one() + T::lit(3.0) * v) * T::lit(0.25);
        let wk = (T::one() - v) * T::lit(0.25);
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = self.m[i][j] * w0;
            }
        }
        for k in 0..3 {
            let r = self.apply_local_unitary(qubit, &pauli(k));
            for i in 0..4 {
                for j in 0..4 {
                    out[i][j] = out[i][j] + r.m[i][j] * wk;
                }
            }
        }
        Self { m: out }
    }

    /// Convex combination `Σ w_i ρ_i` with weights normalized to one.
    pub fn mix(parts: &[(T, Self)]) -> Result<Self> {
        let mut m = zero4();
        for (w, r) in parts {
            for i in 0..4 {
                for j in 0..4 {
                    m[i][j] = m[i][j] + r.m[i][j] * *w;
                }
            }
        }
        Self::from_unnormalized(m)
    }

    pub fn cast<U: Real>(&self) -> TwoQubitDensityMatrix<U> {
        let mut m = zero4::<U>();
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = C::new(
                    U::lit(self.m[i][j].re.to_f64().unwrap_or(f64::NAN)),
                    U::lit(self.m[i][j].im.to_f64().unwrap_or(f64::NAN)),
                );
            }
        }
        TwoQubitDensityMatrix { m }
    }

    pub fn to_json(&self) -> DensityMatrixJson {
        let mut real = [[0.0; 4]; 4];
        let mut imag = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                real[i][j] = self.m[i][j].re.to_f64().unwrap_or(f64::NAN);
                imag[i][j] = self.m[i][j].im.to_f64().unwrap_or(f64::NAN);
            }
        }
        DensityMatrixJson {
            basis: ["HH", "HV", "VH", "VV"].map(String::from),
            real,
            imag,
        }
    }
}

/// JSON layout: separate real and imaginary 4×4 arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrixJson {
    pub basis: [String; 4],
    pub real: [[f64; 4]; 4],
    pub imag: [[f64; 4]; 4],
}

impl DensityMatrixJson {
    pub fn to_density_matrix<T: Real>(&self) -> Result<TwoQubitDensityMatrix<T>> {
        let mut m = zero4::<T>();
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = C::new(T::lit(self.real[i][j]), T::lit(self.imag[i][j]));
            }
        }
        TwoQubitDensityMatrix::new(m)
    }
}
