//! Mixed states as finite ensembles of pure states.

use crate::error::{check_unit_interval, Error, Result};
use crate::jones::pauli;
use crate::scalar::Real;

use super::mode::{ModeId, ModeKind};
use super::optics::{apply_polarization_map, OpticalElement};
use super::state::PureFockState;

/// Ensemble `{(p_k, |ψ_k⟩)}` with `Σ p_k = 1`; every member uses the same mode order.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedFockState<T: Real> {
    members: Vec<(T, PureFockState<T>)>,
}

impl<T: Real> From<PureFockState<T>> for MixedFockState<T> {
    fn from(state: PureFockState<T>) -> Self {
        Self::from_pure(state)
    }
}

impl<T: Real> MixedFockState<T> {
    pub fn from_pure(state: PureFockState<T>) -> Self {
        Self {
            members: vec![(T::one(), state)],
        }
    }

    /// Builds an ensemble, aligning every member to the first member's mode order.
    pub fn from_ensemble(members: Vec<(T, PureFockState<T>)>) -> Result<Self> {
        let s = Self::from_weighted(members)?;
        let total = s.total_probability();
        if (total - T::one()).abs() > T::channel_tol() {
            return Err(Error::EnsembleNotNormalized(total.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(s)
    }

    /// Like [`Self::from_ensemble`] but rescales the weights to sum to one.
    pub fn from_unnormalized(members: Vec<(T, PureFockState<T>)>) -> Result<Self> {
        let mut s = Self::from_weighted(members)?;
        let total = s.total_probability();
        if !(total > T::zero()) {
            return Err(Error::ZeroProbabilityOutcome);
        }
        for (w, _) in &mut s.members {
            *w = *w / total;
        }
        Ok(s)
    }

    fn from_weighted(members: Vec<(T, PureFockState<T>)>) -> Result<Self> {
        let mut iter = members.into_iter().filter(|(w, _)| *w > T::zero());
        let Some(first) = iter.next() else {
            return Err(Error::ZeroProbabilityOutcome);
        };
        let order = first.1.modes().to_vec();
        let mut out = vec![first];
        for (w, s) in iter {
            if w < T::zero() || w.is_nan() {
                return Err(Error::EnsembleNotNormalized(w.to_f64().unwrap_or(f64::NAN)));
            }
            out.push((w, s.reordered(&order)?));
        }
        Ok(Self { members: out })
    }

    pub fn members(&self) -> &[(T, PureFockState<T>)] {
        &self.members
    }

    pub fn into_members(self) -> Vec<(T, PureFockState<T>)> {
        self.members
    }

    pub fn modes(&self) -> &[ModeId] {
        self.members[0].1.modes()
    }

    pub fn total_probability(&self) -> T {
        self.members.iter().fold(T::zero(), |acc, (w, _)| acc + *w)
    }

    fn map_members(&self, f: impl Fn(&PureFockState<T>) -> Result<PureFockState<T>>) -> Result<Self> {
        Ok(Self {
            members: self
                .members
                .iter()
                .map(|(w, s)| Ok((*w, f(s)?)))
                .collect::<Result<_>>()?,
        })
    }

    /// Applies any element; loss channels branch every member.
    pub fn apply(&self, element: &OpticalElement<T>) -> Result<Self> {
        match element {
            OpticalElement::LossChannel { path, transmission } => self.loss(path, *transmission),
            _ => self.map_members(|s| s.apply(element)),
        }
    }

    pub fn apply_all(&self, elements: &[OpticalElement<T>]) -> Result<Self> {
        elements.iter().try_fold(self.clone(), |s, e| s.apply(e))
    }

    /// Beamsplitter-to-environment loss on the optical modes of one path.
    pub fn loss(&self, path: &str, transmission: T) -> Result<Self> {
        let ix = self.members[0].1.path_indices(path, ModeKind::Optical).map_err(|e| {
            if self.members[0].1.path_indices(path, ModeKind::Memory).is_ok() {
                Error::MemoryModeInOptics(path.to_string())
            } else {
                e
            }
        })?;
        self.loss_on(&ix, transmission)
    }

    /// Loss on arbitrary mode indices of any kind; used for memory recall.
    pub(crate) fn loss_on(&self, indices: &[usize], transmission: T) -> Result<Self> {
        check_unit_interval("transmission", transmission)?;
        let mut out = Vec::new();
        for (w, s) in &self.members {
            for (p, b) in s.loss_branches(indices, transmission)? {
                out.push((*w * p, b));
            }
        }
        Ok(Self { members: out })
    }

    /// Single-qubit depolarizing channel on the polarization of one path:
    /// identity with weight `(1+3v)/4`, each Pauli with `(1-v)/4`.
    pub fn depolarize_path(&self, path: &str, kind: ModeKind, visibility: T) -> Result<Self> {
        check_unit_interval("visibility", visibility)?;
        if visibility == T::one() {
            return Ok(self.clone());
        }
        let w0 = (T::one() + T::lit(3.0) * visibility) * T::lit(0.25);
        let wk = (T::one() - visibility) * T::lit(0.25);
        let mut out = Vec::with_capacity(self.members.len() * 4);
        for (w, s) in &self.members {
            if w0 > T::zero() {
                out.push((*w * w0, s.clone()));
            }
            for k in 0..3 {
                out.push((*w * wk, apply_polarization_map(s, path, kind, &pauli(k))?));
            }
        }
        Ok(Self { members: out })
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut out = Vec::with_capacity(self.members.len() * other.members.len());
        for (wa, a) in &self.members {
            for (wb, b) in &other.members {
                out.push((*wa * *wb, a.tensor(b)?));
            }
        }
        Ok(Self { members: out })
    }

    pub fn extend_vacuum(&self, extra: &[ModeId]) -> Result<Self> {
        self.map_members(|s| s.extend_vacuum(extra.iter().cloned()))
    }

    pub fn relabel_path(&self, from: &str, from_kind: ModeKind, to: &str, to_kind: ModeKind) -> Result<Self> {
        self.map_members(|s| s.relabel_path(from, from_kind, to, to_kind))
    }

    /// Probability that `pred` holds for a measured occupation vector.
    pub fn probability_where(&self, pred: impl Fn(&PureFockState<T>, &[u8]) -> bool) -> T {
        let mut acc = T::zero();
        for (w, s) in &self.members {
            let mut m = T::zero();
            for (occ, a) in s.terms() {
                if pred(s, &occ.0) {
                    m = m + a.norm_sqr();
                }
            }
            acc = acc + *w * m;
        }
        acc
    }
}
