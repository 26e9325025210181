//! Sparse pure states over labelled modes.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{cr, sqrt_factorial, Real, C};

use super::mode::{ModeId, ModeKind, OccupationVector, Polarization, Truncation};

/// Pure state: sparse map from occupation vectors to amplitudes.
///
/// Amplitudes whose magnitude falls below a few ulps are dropped after
/// every transformation, so stored entries are always nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct PureFockState<T: Real> {
    modes: Vec<ModeId>,
    amps: BTreeMap<OccupationVector, C<T>>,
    truncation: Truncation,
}

pub(crate) fn prune_threshold<T: Real>() -> T {
    T::epsilon() * T::lit(16.0)
}

fn check_unique(modes: &[ModeId]) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for m in modes {
        if !seen.insert(m) {
            return Err(Error::DuplicateMode(m.to_string()));
        }
    }
    Ok(())
}

impl<T: Real> PureFockState<T> {
    /// Vacuum over the given modes.
    pub fn vacuum(modes: Vec<ModeId>, truncation: Truncation) -> Result<Self> {
        check_unique(&modes)?;
        let mut amps = BTreeMap::new();
        amps.insert(OccupationVector::vacuum(modes.len()), cr(T::one()));
        Ok(Self { modes, amps, truncation })
    }

    /// Builds a state from explicit terms. Terms are summed, not normalized.
    pub fn from_terms(
        modes: Vec<ModeId>,
        terms: impl IntoIterator<Item = (Vec<u8>, C<T>)>,
        truncation: Truncation,
    ) -> Result<Self> {
        check_unique(&modes)?;
        let mut amps: BTreeMap<OccupationVector, C<T>> = BTreeMap::new();
        for (occ, a) in terms {
            if occ.len() != modes.len() {
                return Err(Error::OutOfRange {
                    name: "occupation",
                    reason: format!("{} entries for {} modes", occ.len(), modes.len()),
                });
            }
            let occ = OccupationVector(occ);
            if !truncation.admits(&occ) {
                return Err(Error::TruncationOverflow {
                    detail: format!("term {occ} exceeds {truncation:?}"),
                });
            }
            *amps.entry(occ).or_insert(cr(T::zero())) += a;
        }
        let mut s = Self { modes, amps, truncation };
        s.prune();
        Ok(s)
    }

    /// Single-photon product state: one photon in each listed mode.
    pub fn photons(modes: Vec<ModeId>, occupied: &[ModeId], truncation: Truncation) -> Result<Self> {
        let mut occ = vec![0u8; modes.len()];
        for m in occupied {
            let i = modes
                .iter()
                .position(|x| x == m)
                .ok_or_else(|| Error::UnknownPath(m.to_string()))?;
            occ[i] += 1;
        }
        Self::from_terms(modes, [(occ, cr(T::one()))], truncation)
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Result<Self> {
        if let Some(occ) = self.amps.keys().find(|o| !truncation.admits(o)) {
            return Err(Error::TruncationOverflow {
                detail: format!("term {occ} exceeds {truncation:?}"),
            });
        }
        self.truncation = truncation;
        Ok(self)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OccupationVector, &C<T>)> {
        self.amps.iter()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitude(&self, occ: &[u8]) -> C<T> {
        self.amps
            .get(&OccupationVector(occ.to_vec()))
            .copied()
            .unwrap_or(cr(T::zero()))
    }

    pub fn mode_index(&self, mode: &ModeId) -> Option<usize> {
        self.modes.iter().position(|m| m == mode)
    }

    /// Indices of the `(H, V)` modes of a path of the given kind.
    pub fn path_indices(&self, path: &str, kind: ModeKind) -> Result<[usize; 2]> {
        let find = |p: Polarization| {
            self.modes
                .iter()
                .position(|m| m.path == path && m.polarization == p && m.kind == kind)
        };
        match (find(Polarization::H), find(Polarization::V)) {
            (Some(h), Some(v)) => Ok([h, v]),
            _ => Err(Error::UnknownPath(path.to_string())),
        }
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.values().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n > T::zero()) {
            return Err(Error::ZeroNorm);
        }
        let s = T::one() / n.sqrt();
        Ok(self.map_amplitudes(|a| a * s))
    }

    pub fn scaled(&self, c: C<T>) -> Self {
        let mut out = self.map_amplitudes(|a| a * c);
        out.prune();
        out
    }

    fn map_amplitudes(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        Self {
            modes: self.modes.clone(),
            amps: self.amps.iter().map(|(o, a)| (o.clone(), f(*a))).collect(),
            truncation: self.truncation,
        }
    }

    pub(crate) fn prune(&mut self) {
        let tol = prune_threshold::<T>();
        self.amps.retain(|_, a| a.norm() > tol);
    }

    /// Photon number summed over the modes of one path.
    pub fn path_photons(&self, occ: &OccupationVector, path: &str) -> u32 {
        self.modes
            .iter()
            .zip(&occ.0)
            .filter(|(m, _)| m.path == path)
            .map(|(_, &n)| n as u32)
            .sum()
    }

    /// Tensor product; mode sets must be disjoint.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        for m in &other.modes {
            if self.modes.contains(m) {
                return Err(Error::OverlappingModes(m.to_string()));
            }
        }
        let truncation = self.truncation.combine(&other.truncation);
        let mut modes = self.modes.clone();
        modes.extend(other.modes.iter().cloned());
        let mut amps = BTreeMap::new();
        for (oa, a) in &self.amps {
            for (ob, b) in &other.amps {
                let mut o = oa.0.clone();
                o.extend_from_slice(&ob.0);
                let occ = OccupationVector(o);
                if !truncation.admits(&occ) {
                    return Err(Error::TruncationOverflow {
                        detail: format!("tensor term {occ} exceeds {truncation:?}"),
                    });
                }
                amps.insert(occ, *a * *b);
            }
        }
        let mut s = Self { modes, amps, truncation };
        s.prune();
        Ok(s)
    }

    /// Appends vacuum modes that are not already present.
    pub fn extend_vacuum(&self, extra: impl IntoIterator<Item = ModeId>) -> Result<Self> {
        let new: Vec<ModeId> = extra.into_iter().filter(|m| !self.modes.contains(m)).collect();
        if new.is_empty() {
            return Ok(self.clone());
        }
        let vac = Self::vacuum(new, self.truncation)?;
        self.tensor(&vac)
    }

    /// Reorders modes to `order`, which must be a permutation of the current modes.
    pub fn reordered(&self, order: &[ModeId]) -> Result<Self> {
        if order.len() != self.modes.len() {
            return Err(Error::EnsembleModeMismatch);
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|m| self.mode_index(m).ok_or(Error::EnsembleModeMismatch))
            .collect::<Result<_>>()?;
        let amps = self
            .amps
            .iter()
            .map(|(o, a)| (OccupationVector(perm.iter().map(|&i| o.0[i]).collect()), *a))
            .collect();
        Ok(Self {
            modes: order.to_vec(),
            amps,
            truncation: self.truncation,
        })
    }

    /// Renames the `(H, V)` modes of a path, optionally changing their kind.
    pub fn relabel_path(&self, from: &str, from_kind: ModeKind, to: &str, to_kind: ModeKind) -> Result<Self> {
        let idx = self.path_indices(from, from_kind)?;
        let mut modes = self.modes.clone();
        for i in idx {
            modes[i].path = to.to_string();
            modes[i].kind = to_kind;
        }
        check_unique(&modes)?;
        Ok(Self {
            modes,
            amps: self.amps.clone(),
            truncation: self.truncation,
        })
    }

    /// `⟨self|other⟩`, aligning modes by label.
    pub fn inner(&self, other: &Self) -> Result<C<T>> {
        let other = other.reordered(&self.modes)?;
        let mut acc = cr(T::zero());
        for (o, a) in &self.amps {
            if let Some(b) = other.amps.get(o) {
                acc = acc + a.conj() * *b;
            }
        }
        Ok(acc)
    }

    /// Sum of two states on the same modes.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let other = other.reordered(&self.modes)?;
        let mut amps = self.amps.clone();
        for (o, b) in other.amps {
            *amps.entry(o).or_insert(cr(T::zero())) += b;
        }
        let mut s = Self {
            modes: self.modes.clone(),
            amps,
            truncation: self.truncation.combine(&other.truncation),
        };
        s.prune();
        Ok(s)
    }

    /// Largest amplitude difference after aligning modes.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        let other = other.reordered(&self.modes)?;
        let mut worst = T::zero();
        for (o, a) in &self.amps {
            let b = other.amps.get(o).copied().unwrap_or(cr(T::zero()));
            worst = worst.max((*a - b).norm());
        }
        for (o, b) in &other.amps {
            if !self.amps.contains_key(o) {
                worst = worst.max(b.norm());
            }
        }
        Ok(worst)
    }

    /// Applies the linear mode map `a†_{idx[i]} → Σ_j u[j][i] a†_{idx[j]}`.
    pub(crate) fn transform(&self, idx: &[usize], u: &[Vec<C<T>>]) -> Result<Self> {
        let k = idx.len();
        let zero = cr(T::zero());
        let mut out: BTreeMap<OccupationVector, C<T>> = BTreeMap::new();
        for (occ, amp) in &self.amps {
            let ns: Vec<u8> = idx.iter().map(|&i| occ.0[i]).collect();
            if ns.iter().all(|&n| n == 0) {
                *out.entry(occ.clone()).or_insert(zero) += *amp;
                continue;
            }
            let norm = ns.iter().fold(T::one(), |acc, &n| acc * sqrt_factorial::<T>(n));
            let mut poly: BTreeMap<Vec<u8>, C<T>> = BTreeMap::new();
            poly.insert(vec![0; k], *amp / norm);
            for (i, &n) in ns.iter().enumerate() {
                for _ in 0..n {
                    let mut next: BTreeMap<Vec<u8>, C<T>> = BTreeMap::new();
                    for (mono, c) in &poly {
                        for (j, row) in u.iter().enumerate() {
                            let uji = row[i];
                            if uji == zero {
                                continue;
                            }
                            let mut m = mono.clone();
                            m[j] += 1;
                            *next.entry(m).or_insert(zero) += *c * uji;
                        }
                    }
                    poly = next;
                }
            }
            for (mono, c) in poly {
                let mut o = occ.0.clone();
                let mut f = T::one();
                for (t, &i) in idx.iter().enumerate() {
                    o[i] = mono[t];
                    f = f * sqrt_factorial::<T>(mono[t]);
                }
                *out.entry(OccupationVector(o)).or_insert(zero) += c * f;
            }
        }
        let mut s = Self {
            modes: self.modes.clone(),
            amps: out,
            truncation: self.truncation,
        };
        s.prune();
        if let Some(occ) = s.amps.keys().find(|o| !s.truncation.admits(o)) {
            return Err(Error::TruncationOverflow {
                detail: format!("output term {occ} exceeds {:?}", s.truncation),
            });
        }
        Ok(s)
    }

    pub(crate) fn from_parts(modes: Vec<ModeId>, amps: BTreeMap<OccupationVector, C<T>>, truncation: Truncation) -> Self {
        let mut s = Self { modes, amps, truncation };
        s.prune();
        s
    }
}

impl<T: Real> fmt::Display for PureFockState<T> {
    /// One row per nonzero amplitude: occupation vector, real part, imaginary part.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let header: Vec<String> = self.modes.iter().map(|m| m.to_string()).collect();
        writeln!(f, "modes: {}", header.join(" "))?;
        writeln!(f, "{:<24} {:>22} {:>22}", "occupation", "re", "im")?;
        for (o, a) in &self.amps {
            writeln!(f, "{:<24} {:>22.15e} {:>22.15e}", o.to_string(), a.re, a.im)?;
        }
        Ok(())
    }
}
