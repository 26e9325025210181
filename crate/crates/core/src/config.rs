//! Scenario files: every module's parameters plus run settings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bsm::{heralded_swap, HeraldRule, SwapResult, SwapSetup};
use crate::error::{Error, Result};
use crate::fock::ThresholdDetectorSpec;
use crate::linksim::{
    accidental_probability_per_herald, simulate, DutyCycleSpec, LinkModel, LinkReport, LinkTimingSpec, RateBudget,
    RunSpec,
};
use crate::memory::MemorySpec;
use crate::scalar::Real;
use crate::sources::{calibrate_visibility, g2_cross_correlation, pair_prob_for_g2, SpdcSourceSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Solve the pair probability for a g² target and fit each source's
/// visibility to a measured state fidelity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration<T> {
    pub g2_target: T,
    pub g2_window_ns: T,
    pub source_fidelity_a: T,
    pub source_fidelity_b: T,
}

impl<T: Real> Default for Calibration<T> {
    fn default() -> Self {
        Self {
            g2_target: T::lit(50.0),
            g2_window_ns: T::lit(2.0),
            source_fidelity_a: T::lit(0.926),
            source_fidelity_b: T::lit(0.933),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct ScenarioConfig<T> {
    pub schema_version: u32,
    pub source_a: SpdcSourceSpec<T>,
    pub source_b: SpdcSourceSpec<T>,
    /// When present, overrides the sources' pair probability and visibility.
    #[serde(default)]
    pub calibration: Option<Calibration<T>>,
    pub memory_a: MemorySpec<T>,
    pub memory_b: MemorySpec<T>,
    pub bsm_detectors: ThresholdDetectorSpec<T>,
    pub timing: LinkTimingSpec<T>,
    pub duty: DutyCycleSpec<T>,
    pub budget: RateBudget<T>,
    pub run: RunSpec<T>,
}

/// Sources after calibration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResolvedSources<T> {
    pub source_a: SpdcSourceSpec<T>,
    pub source_b: SpdcSourceSpec<T>,
}

fn at<T>(section: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::OutOfRange { name, reason } => Error::Scenario {
            path: format!("{section}.{name}"),
            reason,
        },
        Error::Scenario { path, reason } => Error::Scenario {
            path: format!("{section}.{path}"),
            reason,
        },
        other => Error::Scenario {
            path: section.to_string(),
            reason: other.to_string(),
        },
    })
}

fn mismatch(path: &str, reason: String) -> Error {
    Error::Scenario { path: path.to_string(), reason }
}

impl<T: Real> ScenarioConfig<T> {
    /// Every published operating parameter.
    pub fn published_defaults() -> Self {
        let source = SpdcSourceSpec::new(T::lit(0.01));
        Self {
            schema_version: SCHEMA_VERSION,
            source_a: source,
            source_b: source,
            calibration: Some(Calibration::default()),
            memory_a: MemorySpec::node_a(),
            memory_b: MemorySpec::node_b(),
            bsm_detectors: ThresholdDetectorSpec::nanowire(),
            timing: LinkTimingSpec::default(),
            duty: DutyCycleSpec::default(),
            budget: RateBudget::default(),
            run: RunSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(mismatch(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        at("source_a", self.source_a.validate())?;
        at("source_b", self.source_b.validate())?;
        at("memory_a", self.memory_a.validate())?;
        at("memory_b", self.memory_b.validate())?;
        at("bsm_detectors", self.bsm_detectors.validate())?;
        at("timing", self.timing.validate())?;
        at("duty", self.duty.validate())?;
        at("budget", self.budget.validate())?;
        at("run", self.run.validate())?;
        if let Some(c) = &self.calibration {
            if !(c.g2_target > T::one() && c.g2_window_ns > T::zero()) {
                return Err(mismatch("calibration.g2_target", format!("{} must exceed 1", c.g2_target)));
            }
        }
        if self.source_a.repetition_rate_hz != self.source_b.repetition_rate_hz {
            return Err(mismatch("source_b.repetition_rate_hz", "differs from source_a".into()));
        }
        for (name, m) in [("memory_a", &self.memory_a), ("memory_b", &self.memory_b)] {
            if (m.storage_time_ns - self.timing.storage_time_ns).abs() > T::lit(1e-9) {
                return Err(mismatch(
                    &format!("{name}.storage_time_ns"),
                    format!("{} differs from timing.storage_time_ns {}", m.storage_time_ns, self.timing.storage_time_ns),
                ));
            }
        }
        let tol = T::lit(1e-9);
        for (path, a, b) in [
            ("budget.end_to_end_a", self.budget.end_to_end_a, self.memory_a.end_to_end_efficiency),
            ("budget.end_to_end_b", self.budget.end_to_end_b, self.memory_b.end_to_end_efficiency),
            (
                "budget.reference_storage_efficiency",
                self.budget.reference_storage_efficiency[0],
                self.memory_a.intrinsic_efficiency_at_ts,
            ),
            (
                "budget.reference_storage_efficiency",
                self.budget.reference_storage_efficiency[1],
                self.memory_b.intrinsic_efficiency_at_ts,
            ),
            ("budget.duty", self.budget.duty, self.duty.storage_fraction()),
        ] {
            if (a - b).abs() > tol {
                return Err(mismatch(path, format!("{a} disagrees with the memory/duty sections ({b})")));
            }
        }
        at("run", LinkModel::validate_modes(self.run.modes, &self.memory_a, &self.memory_b, self.source_a.repetition_rate_hz))
    }

    /// Parses and validates; errors carry the offending key path.
    pub fn from_json_str(text: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| Error::Scenario {
            path: e.path().to_string(),
            reason: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> String
    where
        T: Serialize,
    {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Arm detectors used for source statistics.
    pub fn arm_detectors(&self, source: &SpdcSourceSpec<T>) -> [ThresholdDetectorSpec<T>; 2] {
        let d = source.arm_detector(&self.bsm_detectors);
        [d, d]
    }

    pub fn resolve(&self) -> Result<ResolvedSources<T>> {
        let Some(c) = &self.calibration else {
            return Ok(ResolvedSources {
                source_a: self.source_a,
                source_b: self.source_b,
            });
        };
        let fit = |s: &SpdcSourceSpec<T>, fidelity: T, name: &str| -> Result<SpdcSourceSpec<T>> {
            let p = pair_prob_for_g2(s, self.arm_detectors(s), c.g2_window_ns, c.g2_target)
                .map_err(|e| mismatch("calibration.g2_target", e.to_string()))?;
            let s = s.with_pair_prob(p);
            let v = calibrate_visibility(&s, fidelity)
                .map_err(|e| mismatch(&format!("calibration.source_fidelity_{name}"), e.to_string()))?;
            Ok(s.with_visibility(v))
        };
        Ok(ResolvedSources {
            source_a: fit(&self.source_a, c.source_fidelity_a, "a")?,
            source_b: fit(&self.source_b, c.source_fidelity_b, "b")?,
        })
    }

    /// Memory-side arms go through the memories at the storage time when `stored`.
    pub fn swap_setup(&self, sources: &ResolvedSources<T>, stored: bool) -> Result<SwapSetup<T>> {
        let mut setup = SwapSetup::without_storage(sources.source_a, sources.source_b, self.bsm_detectors);
        if stored {
            let ts = self.timing.storage_time_ns;
            setup.memory_transmission = [
                sources.source_a.heralding_efficiency * self.memory_a.end_to_end_at(ts)?,
                sources.source_b.heralding_efficiency * self.memory_b.end_to_end_at(ts)?,
            ];
        }
        Ok(setup)
    }

    pub fn swap(&self, stored: bool) -> Result<SwapResult<T>> {
        let sources = self.resolve()?;
        heralded_swap(&self.swap_setup(&sources, stored)?, &HeraldRule::phi_plus())
    }

    pub fn link_model(&self) -> Result<LinkModel<T>> {
        let sources = self.resolve()?;
        let swap = heralded_swap(&self.swap_setup(&sources, true)?, &HeraldRule::phi_plus())?;
        let window = self.calibration.map(|c| c.g2_window_ns).unwrap_or(T::lit(2.0));
        let stats = g2_cross_correlation(&sources.source_a, self.arm_detectors(&sources.source_a), window)?;
        Ok(LinkModel {
            herald_probability: swap.herald_probability,
            fourfold_probability: swap.fourfold_probability,
            signal_rho: swap.rho,
            noise_per_herald: accidental_probability_per_herald(&self.budget),
            source_a: stats,
            repetition_rate_hz: self.source_a.repetition_rate_hz,
            memory_a: self.memory_a,
            memory_b: self.memory_b,
            timing: self.timing,
            duty: self.duty,
        })
    }

    /// The budget with the pre-storage fourfold rate taken from the model
    /// instead of the published value.
    pub fn model_budget(&self) -> Result<RateBudget<T>> {
        let pre = self.swap(false)?;
        let attempts_per_s = T::count(self.run.modes) / (self.timing.storage_time_ns * T::lit(1e-9));
        Ok(RateBudget {
            fourfold_before_storage_per_h: pre.fourfold_probability * attempts_per_s * T::lit(3600.0),
            ..self.budget
        })
    }
}

/// Full Monte Carlo of a scenario with the given cycle count and seed.
pub fn run_link_monte_carlo<T: Real>(
    scenario: &ScenarioConfig<T>,
    n_cycles: usize,
    seed: u64,
    jobs: Option<usize>,
) -> Result<LinkReport> {
    scenario.validate()?;
    let run = RunSpec {
        cycles: n_cycles,
        seed,
        ..scenario.run
    };
    simulate(&scenario.link_model()?, &run, jobs)
}
