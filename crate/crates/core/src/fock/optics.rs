//! Passive linear optics and the loss channel.
//!
//! PBS convention: `H` transmits (`in1 → out1`, `in2 → out2`), `V` reflects
//! with a factor `i` (`in1 → out2`, `in2 → out1`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::jones::{waveplate, Matrix2, Retardance};
use crate::scalar::{binomial, ci, cr, Real, C};

use super::mode::{ModeId, ModeKind, OccupationVector};
use super::state::PureFockState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OpticalElement<T> {
    Waveplate {
        path: String,
        angle_deg: T,
        retardance: Retardance,
    },
    PolarizingBeamSplitter {
        inputs: [String; 2],
        outputs: [String; 2],
    },
    PathDelay {
        path: String,
        phase_rad: T,
    },
    LossChannel {
        path: String,
        transmission: T,
    },
}

impl<T: Real> OpticalElement<T> {
    pub fn hwp(path: &str, angle_deg: T) -> Self {
        Self::Waveplate {
            path: path.into(),
            angle_deg,
            retardance: Retardance::Half,
        }
    }

    pub fn qwp(path: &str, angle_deg: T) -> Self {
        Self::Waveplate {
            path: path.into(),
            angle_deg,
            retardance: Retardance::Quarter,
        }
    }

    pub fn pbs(in1: &str, in2: &str, out1: &str, out2: &str) -> Self {
        Self::PolarizingBeamSplitter {
            inputs: [in1.into(), in2.into()],
            outputs: [out1.into(), out2.into()],
        }
    }

    pub fn delay(path: &str, phase_rad: T) -> Self {
        Self::PathDelay {
            path: path.into(),
            phase_rad,
        }
    }

    pub fn loss(path: &str, transmission: T) -> Self {
        Self::LossChannel {
            path: path.into(),
            transmission,
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, Self::LossChannel { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Waveplate { .. } => "waveplate",
            Self::PolarizingBeamSplitter { .. } => "pbs",
            Self::PathDelay { .. } => "path_delay",
            Self::LossChannel { .. } => "loss",
        }
    }
}

fn optical_indices<T: Real>(state: &PureFockState<T>, path: &str) -> Result<[usize; 2]> {
    match state.path_indices(path, ModeKind::Optical) {
        Ok(ix) => Ok(ix),
        Err(_) if state.path_indices(path, ModeKind::Memory).is_ok() => {
            Err(Error::MemoryModeInOptics(path.to_string()))
        }
        Err(e) => Err(e),
    }
}

fn jones_rows<T: Real>(m: &Matrix2<T>) -> Vec<Vec<C<T>>> {
    vec![vec![m[0][0], m[0][1]], vec![m[1][0], m[1][1]]]
}

/// Applies a 2×2 polarization map to one path of any kind.
pub(crate) fn apply_polarization_map<T: Real>(
    state: &PureFockState<T>,
    path: &str,
    kind: ModeKind,
    m: &Matrix2<T>,
) -> Result<PureFockState<T>> {
    let ix = state.path_indices(path, kind)?;
    state.transform(&ix, &jones_rows(m))
}

impl<T: Real> PureFockState<T> {
    /// Applies a unitary element. Loss channels need [`super::MixedFockState`].
    pub fn apply(&self, element: &OpticalElement<T>) -> Result<Self> {
        match element {
            OpticalElement::Waveplate {
                path,
                angle_deg,
                retardance,
            } => {
                let ix = optical_indices(self, path)?;
                self.transform(&ix, &jones_rows(&waveplate(*angle_deg, *retardance)))
            }
            OpticalElement::PathDelay { path, phase_rad } => {
                let ix = optical_indices(self, path)?;
                let (s, c) = phase_rad.sin_cos();
                let e = C::new(c, s);
                let z = cr(T::zero());
                self.transform(&ix, &[vec![e, z], vec![z, e]])
            }
            OpticalElement::PolarizingBeamSplitter { inputs, outputs } => self.apply_pbs(inputs, outputs),
            OpticalElement::LossChannel { .. } => Err(Error::NotUnitary(element.name().into())),
        }
    }

    fn apply_pbs(&self, inputs: &[String; 2], outputs: &[String; 2]) -> Result<Self> {
        if inputs[0] == inputs[1] || outputs[0] == outputs[1] {
            return Err(Error::DuplicateMode(format!("pbs ports {inputs:?} -> {outputs:?}")));
        }
        for p in inputs {
            if self.path_indices(p, ModeKind::Memory).is_ok() && self.path_indices(p, ModeKind::Optical).is_err() {
                return Err(Error::MemoryModeInOptics(p.clone()));
            }
        }
        for o in outputs {
            if !inputs.contains(o) && self.modes().iter().any(|m| &m.path == o && m.kind == ModeKind::Optical) {
                return Err(Error::DuplicateMode(format!("pbs output path `{o}` already in use")));
            }
        }
        let mut st = self.extend_vacuum(
            ModeId::optical_pair(&inputs[0])
                .into_iter()
                .chain(ModeId::optical_pair(&inputs[1])),
        )?;
        let a = st.path_indices(&inputs[0], ModeKind::Optical)?;
        let b = st.path_indices(&inputs[1], ModeKind::Optical)?;
        let idx = [a[0], a[1], b[0], b[1]];
        // position order after relabelling: [out1 H, out1 V, out2 H, out2 V]
        let z = cr(T::zero());
        let o = cr(T::one());
        let i = ci(T::one());
        let u = vec![
            vec![o, z, z, z],
            vec![z, z, z, i],
            vec![z, z, o, z],
            vec![z, i, z, z],
        ];
        st = st.transform(&idx, &u)?;
        let tmp = ["\u{0}pbs-a", "\u{0}pbs-b"];
        st = st.relabel_path(&inputs[0], ModeKind::Optical, tmp[0], ModeKind::Optical)?;
        st = st.relabel_path(&inputs[1], ModeKind::Optical, tmp[1], ModeKind::Optical)?;
        st = st.relabel_path(tmp[0], ModeKind::Optical, &outputs[0], ModeKind::Optical)?;
        st.relabel_path(tmp[1], ModeKind::Optical, &outputs[1], ModeKind::Optical)
    }

    /// Splits the state into loss branches on the given modes.
    ///
    /// Each mode with `n` photons loses `k` of them with Kraus weight
    /// `sqrt(C(n,k) t^(n-k) (1-t)^k)`. Returns `(probability, normalized state)`
    /// for every branch of nonzero probability.
    pub fn loss_branches(&self, indices: &[usize], transmission: T) -> Result<Vec<(T, Self)>> {
        check_unit_interval("transmission", transmission)?;
        let zero = cr(T::zero());
        let r = T::one() - transmission;
        let mut branches: BTreeMap<Vec<u8>, BTreeMap<OccupationVector, C<T>>> = BTreeMap::new();
        for (occ, amp) in self.terms() {
            let ns: Vec<u8> = indices.iter().map(|&i| occ.0[i]).collect();
            let mut lost = vec![0u8; ns.len()];
            loop {
                let mut f = T::one();
                let mut o = occ.0.clone();
                for (t, &i) in indices.iter().enumerate() {
                    let n = ns[t];
                    let k = lost[t];
                    f = f * (binomial::<T>(n, k) * transmission.powi((n - k) as i32) * r.powi(k as i32)).sqrt();
                    o[i] = n - k;
                }
                if f > T::zero() {
                    *branches
                        .entry(lost.clone())
                        .or_default()
                        .entry(OccupationVector(o))
                        .or_insert(zero) += *amp * f;
                }
                // odometer over lost[t] in 0..=ns[t]
                let mut t = 0;
                while t < lost.len() {
                    if lost[t] < ns[t] {
                        lost[t] += 1;
                        break;
                    }
                    lost[t] = 0;
                    t += 1;
                }
                if t == lost.len() {
                    break;
                }
            }
        }
        let mut out = Vec::with_capacity(branches.len());
        for (_, amps) in branches {
            let st = PureFockState::from_parts(self.modes().to_vec(), amps, self.truncation());
            let p = st.norm_sqr();
            if p > T::zero() {
                out.push((p, st.normalized()?));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::mode::{Polarization, Truncation};

    fn single(path: &str, pol: Polarization) -> PureFockState<f64> {
        let modes = ModeId::optical_pair(path).to_vec();
        PureFockState::photons(modes, &[ModeId::optical(path, pol)], Truncation::default()).unwrap()
    }

    #[test]
    fn half_wave_plate_at_45_swaps_polarizations() {
        let h = single("a", Polarization::H);
        let out = h.apply(&OpticalElement::hwp("a", 45.0)).unwrap();
        assert!((out.amplitude(&[0, 1]).norm() - 1.0).abs() < 1e-12);
        let v = single("a", Polarization::V);
        let out = v.apply(&OpticalElement::hwp("a", 45.0)).unwrap();
        assert!((out.amplitude(&[1, 0]).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_wave_plate_at_22_5_makes_diagonal() {
        let out = single("a", Polarization::H).apply(&OpticalElement::hwp("a", 22.5)).unwrap();
        let s = 0.5f64.sqrt();
        assert!((out.amplitude(&[1, 0]) - C::new(s, 0.0)).norm() < 1e-12);
        assert!((out.amplitude(&[0, 1]) - C::new(s, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn pbs_routes_by_polarization() {
        let h = single("a", Polarization::H);
        let out = h.apply(&OpticalElement::pbs("a", "b", "t", "r")).unwrap();
        let ix = out.path_indices("t", ModeKind::Optical).unwrap();
        let term = out.terms().next().unwrap();
        assert_eq!(term.0 .0[ix[0]], 1);
        let v = single("a", Polarization::V);
        let out = v.apply(&OpticalElement::pbs("a", "b", "t", "r")).unwrap();
        let ix = out.path_indices("r", ModeKind::Optical).unwrap();
        let (occ, amp) = out.terms().next().unwrap();
        assert_eq!(occ.0[ix[1]], 1);
        assert!((*amp - C::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn memory_modes_are_rejected() {
        let modes = ModeId::memory_pair("m").to_vec();
        let st = PureFockState::<f64>::vacuum(modes, Truncation::default()).unwrap();
        assert!(matches!(
            st.apply(&OpticalElement::hwp("m", 10.0)),
            Err(Error::MemoryModeInOptics(_))
        ));
        assert!(matches!(
            st.apply(&OpticalElement::pbs("m", "x", "o", "p")),
            Err(Error::MemoryModeInOptics(_))
        ));
    }

    #[test]
    fn two_photons_in_one_mode_overflow_tight_truncation() {
        let modes = ModeId::optical_pair("a").to_vec();
        let st = PureFockState::<f64>::from_terms(modes, [(vec![1, 1], cr(1.0))], Truncation::new(1, 2)).unwrap();
        assert!(matches!(
            st.apply(&OpticalElement::hwp("a", 22.5)),
            Err(Error::TruncationOverflow { .. })
        ));
    }

    #[test]
    fn loss_splits_single_photon() {
        let h = single("a", Polarization::H);
        let br = h.loss_branches(&[0, 1], 0.5).unwrap();
        assert_eq!(br.len(), 2);
        assert!(br.iter().all(|(p, _)| (p - 0.5).abs() < 1e-12));
    }
}
