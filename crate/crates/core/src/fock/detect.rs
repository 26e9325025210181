//! Threshold (click / no-click) detection with finite efficiency and dark counts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::scalar::{cr, Real, C};

use super::mixed::MixedFockState;
use super::mode::{ModeId, ModeKind, OccupationVector};
use super::state::PureFockState;

/// Largest number of detectors measured jointly.
pub const MAX_DETECTORS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdDetectorSpec<T> {
    pub efficiency: T,
    pub dark_count_prob: T,
    pub window_ns: T,
}

impl<T: Real> ThresholdDetectorSpec<T> {
    pub fn new(efficiency: T, dark_count_prob: T, window_ns: T) -> Result<Self> {
        let s = Self {
            efficiency,
            dark_count_prob,
            window_ns,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn ideal() -> Self {
        Self {
            efficiency: T::one(),
            dark_count_prob: T::zero(),
            window_ns: T::lit(2.0),
        }
    }

    /// Nanowire detector: 85% efficiency, 10 Hz dark rate over a 2 ns window.
    pub fn nanowire() -> Self {
        Self {
            efficiency: T::lit(0.85),
            dark_count_prob: T::lit(10.0 * 2e-9),
            window_ns: T::lit(2.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit_interval("efficiency", self.efficiency)?;
        check_unit_interval("dark_count_prob", self.dark_count_prob)?;
        if !(self.window_ns >= T::zero()) {
            return Err(Error::OutOfRange {
                name: "window_ns",
                reason: format!("{} < 0", self.window_ns),
            });
        }
        Ok(())
    }

    /// `P(no click | n photons) = (1 - d)(1 - η)^n`.
    pub fn no_click_probability(&self, n: u32) -> T {
        (T::one() - self.dark_count_prob) * (T::one() - self.efficiency).powi(n as i32)
    }

    pub fn with_efficiency(self, efficiency: T) -> Self {
        Self { efficiency, ..self }
    }
}

impl Default for ThresholdDetectorSpec<f64> {
    fn default() -> Self {
        Self::nanowire()
    }
}

/// A labelled detector covering one or more optical modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detector<T> {
    pub label: String,
    pub modes: Vec<ModeId>,
    pub spec: ThresholdDetectorSpec<T>,
}

impl<T: Real> Detector<T> {
    pub fn on_mode(label: &str, mode: ModeId, spec: ThresholdDetectorSpec<T>) -> Self {
        Self {
            label: label.into(),
            modes: vec![mode],
            spec,
        }
    }

    /// Polarization-insensitive detector on both modes of an optical path.
    pub fn on_path(label: &str, path: &str, spec: ThresholdDetectorSpec<T>) -> Self {
        Self {
            label: label.into(),
            modes: ModeId::optical_pair(path).to_vec(),
            spec,
        }
    }
}

/// Set of detector labels that clicked.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct ClickPattern(pub BTreeSet<String>);

impl ClickPattern {
    pub fn of(labels: &[&str]) -> Self {
        Self(labels.iter().map(|s| s.to_string()).collect())
    }

    pub fn contains(&self, label: &str) -> bool {
        self.0.contains(label)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for ClickPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<&str> = self.0.iter().map(|s| s.as_str()).collect();
        write!(f, "{{{}}}", v.join(","))
    }
}

#[derive(Clone, Debug)]
pub struct Outcome<T: Real> {
    pub pattern: ClickPattern,
    pub probability: T,
    /// Conditional state of the undetected modes; `None` when not requested.
    pub state: Option<MixedFockState<T>>,
}

/// Exact outcome distribution of a joint threshold measurement.
#[derive(Clone, Debug)]
pub struct ThresholdDistribution<T: Real> {
    pub outcomes: Vec<Outcome<T>>,
}

impl<T: Real> ThresholdDistribution<T> {
    pub fn probability(&self, pattern: &ClickPattern) -> T {
        self.outcomes
            .iter()
            .find(|o| &o.pattern == pattern)
            .map(|o| o.probability)
            .unwrap_or(T::zero())
    }

    pub fn outcome(&self, pattern: &ClickPattern) -> Option<&Outcome<T>> {
        self.outcomes.iter().find(|o| &o.pattern == pattern)
    }

    pub fn total_probability(&self) -> T {
        self.outcomes.iter().fold(T::zero(), |acc, o| acc + o.probability)
    }

    /// Draws one outcome.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Outcome<T> {
        let u = T::lit(rng.random::<f64>()) * self.total_probability();
        let mut acc = T::zero();
        for o in &self.outcomes {
            acc = acc + o.probability;
            if u < acc {
                return o;
            }
        }
        self.outcomes.last().expect("distribution has at least one outcome")
    }
}

fn resolve<T: Real>(modes: &[ModeId], detectors: &[Detector<T>]) -> Result<Vec<Vec<usize>>> {
    if detectors.len() > MAX_DETECTORS {
        return Err(Error::OutOfRange {
            name: "detectors",
            reason: format!("{} > {MAX_DETECTORS}", detectors.len()),
        });
    }
    let mut used = BTreeSet::new();
    let mut labels = BTreeSet::new();
    let mut out = Vec::with_capacity(detectors.len());
    for d in detectors {
        let bad = |reason: String| Error::InvalidDetector {
            label: d.label.clone(),
            reason,
        };
        if !labels.insert(d.label.clone()) {
            return Err(bad("duplicate label".into()));
        }
        d.spec.validate().map_err(|e| bad(e.to_string()))?;
        let mut ix = Vec::with_capacity(d.modes.len());
        for m in &d.modes {
            if m.kind != ModeKind::Optical {
                return Err(bad(format!("{m} is not an optical mode")));
            }
            let i = modes
                .iter()
                .position(|x| x == m)
                .ok_or_else(|| bad(format!("{m} not in state")))?;
            if !used.insert(i) {
                return Err(bad(format!("{m} already watched by another detector")));
            }
            ix.push(i);
        }
        out.push(ix);
    }
    Ok(out)
}

/// Full measurement: outcome probabilities and every conditional state.
pub fn measure_threshold<T: Real>(
    state: &MixedFockState<T>,
    detectors: &[Detector<T>],
) -> Result<ThresholdDistribution<T>> {
    measure_threshold_where(state, detectors, |_| true)
}

/// Like [`measure_threshold`], but conditional states are only built for
/// patterns accepted by `keep_state`. Probabilities cover every pattern.
pub fn measure_threshold_where<T: Real>(
    state: &MixedFockState<T>,
    detectors: &[Detector<T>],
    keep_state: impl Fn(&ClickPattern) -> bool,
) -> Result<ThresholdDistribution<T>> {
    let modes = state.modes().to_vec();
    let det_ix = resolve(&modes, detectors)?;
    let detected: BTreeSet<usize> = det_ix.iter().flatten().copied().collect();
    let rest_ix: Vec<usize> = (0..modes.len()).filter(|i| !detected.contains(i)).collect();
    let rest_modes: Vec<ModeId> = rest_ix.iter().map(|&i| modes[i].clone()).collect();
    let k = detectors.len();
    let n_patterns = 1usize << k;
    let patterns: Vec<ClickPattern> = (0..n_patterns)
        .map(|bits| {
            ClickPattern(
                (0..k)
                    .filter(|j| bits >> j & 1 == 1)
                    .map(|j| detectors[j].label.clone())
                    .collect(),
            )
        })
        .collect();
    let keep: Vec<bool> = patterns.iter().map(&keep_state).collect();
    let mut probs = vec![T::zero(); n_patterns];
    let mut members: Vec<Vec<(T, PureFockState<T>)>> = vec![Vec::new(); n_patterns];
    let zero = cr(T::zero());

    for (w, s) in state.members() {
        // distinct detected occupations are orthogonal and never interfere
        let mut groups: BTreeMap<Vec<u8>, BTreeMap<OccupationVector, C<T>>> = BTreeMap::new();
        for (occ, a) in s.terms() {
            let seen: Vec<u8> = det_ix.iter().flatten().map(|&i| occ.0[i]).collect();
            let rest = OccupationVector(rest_ix.iter().map(|&i| occ.0[i]).collect());
            *groups.entry(seen).or_default().entry(rest).or_insert(zero) += *a;
        }
        for (seen, amps) in groups {
            let mut cursor = seen.iter();
            let counts: Vec<u32> = det_ix
                .iter()
                .map(|ix| ix.iter().map(|_| *cursor.next().expect("aligned") as u32).sum())
                .collect();
            let g = PureFockState::from_parts(rest_modes.clone(), amps, s.truncation());
            let mass = g.norm_sqr();
            if !(mass > T::zero()) {
                continue;
            }
            let q: Vec<T> = detectors
                .iter()
                .zip(&counts)
                .map(|(d, &n)| d.spec.no_click_probability(n))
                .collect();
            let normalized = g.normalized()?;
            for bits in 0..n_patterns {
                let mut f = *w * mass;
                for (j, qj) in q.iter().enumerate() {
                    f = f * if bits >> j & 1 == 1 { T::one() - *qj } else { *qj };
                }
                if f > T::zero() {
                    probs[bits] = probs[bits] + f;
                    if keep[bits] {
                        members[bits].push((f, normalized.clone()));
                    }
                }
            }
        }
    }

    let mut outcomes = Vec::new();
    for (bits, (pattern, p)) in patterns.into_iter().zip(probs).enumerate() {
        if !(p > T::zero()) {
            continue;
        }
        let st = if keep[bits] {
            Some(MixedFockState::from_unnormalized(std::mem::take(&mut members[bits]))?)
        } else {
            None
        };
        outcomes.push(Outcome {
            pattern,
            probability: p,
            state: st,
        });
    }
    Ok(ThresholdDistribution { outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::mode::{Polarization, Truncation};
    use crate::fock::optics::OpticalElement;

    fn one_photon() -> MixedFockState<f64> {
        let modes = ModeId::optical_pair("a").to_vec();
        PureFockState::photons(modes, &[ModeId::optical("a", Polarization::H)], Truncation::default())
            .unwrap()
            .into()
    }

    #[test]
    fn ideal_detector_always_clicks_on_a_photon() {
        let d = [Detector::on_path("D", "a", ThresholdDetectorSpec::ideal())];
        let dist = measure_threshold(&one_photon(), &d).unwrap();
        assert!((dist.probability(&ClickPattern::of(&["D"])) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vacuum_clicks_with_dark_probability() {
        let modes = ModeId::optical_pair("a").to_vec();
        let vac: MixedFockState<f64> = PureFockState::vacuum(modes, Truncation::default()).unwrap().into();
        let spec = ThresholdDetectorSpec::new(0.85, 0.03, 2.0).unwrap();
        let dist = measure_threshold(&vac, &[Detector::on_path("D", "a", spec)]).unwrap();
        assert!((dist.probability(&ClickPattern::of(&["D"])) - 0.03).abs() < 1e-15);
    }

    #[test]
    fn two_photons_split_by_pbs_click_both_detectors() {
        let modes = ModeId::optical_pair("a").to_vec();
        let hv = PureFockState::<f64>::from_terms(modes, [(vec![1, 1], cr(1.0))], Truncation::default())
            .unwrap()
            .apply(&OpticalElement::pbs("a", "b", "t", "r"))
            .unwrap();
        let d = [
            Detector::on_path("T", "t", ThresholdDetectorSpec::ideal()),
            Detector::on_path("R", "r", ThresholdDetectorSpec::ideal()),
        ];
        let dist = measure_threshold(&hv.into(), &d).unwrap();
        assert!((dist.probability(&ClickPattern::of(&["T", "R"])) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn detectors_must_be_disjoint_and_optical() {
        let spec = ThresholdDetectorSpec::ideal();
        let d = [Detector::on_path("A", "a", spec), Detector::on_path("B", "a", spec)];
        assert!(matches!(
            measure_threshold(&one_photon(), &d),
            Err(Error::InvalidDetector { .. })
        ));
        let d = [Detector::on_mode("M", ModeId::memory("a", Polarization::H), spec)];
        assert!(matches!(
            measure_threshold(&one_photon(), &d),
            Err(Error::InvalidDetector { .. })
        ));
    }
}
