//! Middle-station Bell-state measurement with a type-II fusion gate.
//!
//! Circuit: HWP(22.5°) on both inputs, PBS₁, HWP(22.5°) on both PBS₁ outputs,
//! then one analyzer PBS per output feeding detectors `T1, R1` and `T2, R2`.

use serde::{Deserialize, Serialize};

use crate::analysis::{chsh_s, fidelity_phi_plus, witness_expectation, ChshSettings, TwoQubitDensityMatrix};
use crate::error::{Error, Result};
use crate::fock::{
    measure_threshold, measure_threshold_where, project_and_trace, ClickPattern, Detector, MixedFockState, ModeKind,
    OpticalElement, PostSelection, PureFockState, ThresholdDetectorSpec, ThresholdDistribution,
};
use crate::scalar::Real;
use crate::sources::{source_state, SpdcSourceSpec};

pub const DETECTOR_LABELS: [&str; 4] = ["T1", "R1", "T2", "R2"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BsmCircuit<T> {
    pub inputs: [String; 2],
    pub elements: Vec<OpticalElement<T>>,
    pub detectors: Vec<Detector<T>>,
}

impl<T: Real> BsmCircuit<T> {
    /// The fusion gate on `in1`, `in2` with identical detectors on all four outputs.
    pub fn fusion(in1: &str, in2: &str, detector: ThresholdDetectorSpec<T>) -> Self {
        let deg = T::lit(22.5);
        let elements = vec![
            OpticalElement::hwp(in1, deg),
            OpticalElement::hwp(in2, deg),
            OpticalElement::pbs(in1, in2, "o1", "o2"),
            OpticalElement::hwp("o1", deg),
            OpticalElement::hwp("o2", deg),
            OpticalElement::pbs("o1", "x1", "T1", "R1"),
            OpticalElement::pbs("o2", "x2", "T2", "R2"),
        ];
        let detectors = DETECTOR_LABELS
            .iter()
            .map(|l| Detector::on_path(l, l, detector))
            .collect();
        Self {
            inputs: [in1.into(), in2.into()],
            elements,
            detectors,
        }
    }

    pub fn ideal(in1: &str, in2: &str) -> Self {
        Self::fusion(in1, in2, ThresholdDetectorSpec::ideal())
    }

    /// Applies the optics only; detectors are not read.
    pub fn propagate(&self, state: &MixedFockState<T>) -> Result<MixedFockState<T>> {
        state.apply_all(&self.elements)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellOutcome {
    PhiPlus,
    PsiPlus,
}

/// Exact two-click patterns that announce a Bell state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeraldRule {
    pub accepted: Vec<ClickPattern>,
    pub outcome: BellOutcome,
}

impl HeraldRule {
    /// `{T1, R2}` or `{R1, T2}`.
    pub fn phi_plus() -> Self {
        Self {
            accepted: vec![ClickPattern::of(&["T1", "R2"]), ClickPattern::of(&["R1", "T2"])],
            outcome: BellOutcome::PhiPlus,
        }
    }

    /// `{T1, T2}` or `{R1, R2}`.
    pub fn psi_plus() -> Self {
        Self {
            accepted: vec![ClickPattern::of(&["T1", "T2"]), ClickPattern::of(&["R1", "R2"])],
            outcome: BellOutcome::PsiPlus,
        }
    }

    pub fn for_outcome(outcome: BellOutcome) -> Self {
        match outcome {
            BellOutcome::PhiPlus => Self::phi_plus(),
            BellOutcome::PsiPlus => Self::psi_plus(),
        }
    }

    pub fn matches(&self, pattern: &ClickPattern) -> bool {
        self.accepted.contains(pattern)
    }
}

/// Runs the circuit and the threshold measurement, keeping every conditional state.
pub fn run_bsm<T: Real>(state: &MixedFockState<T>, circuit: &BsmCircuit<T>) -> Result<ThresholdDistribution<T>> {
    measure_threshold(&circuit.propagate(state)?, &circuit.detectors)
}

/// Like [`run_bsm`] but only keeps conditional states for the rule's patterns.
pub fn run_bsm_for<T: Real>(
    state: &MixedFockState<T>,
    circuit: &BsmCircuit<T>,
    rule: &HeraldRule,
) -> Result<ThresholdDistribution<T>> {
    measure_threshold_where(&circuit.propagate(state)?, &circuit.detectors, |p| rule.matches(p))
}

/// Herald probabilities with and without the one-excitation-per-memory condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BsmSuccess<T> {
    /// `Φ⁺` herald with exactly one excitation in each memory path.
    pub phi_plus_useful: T,
    pub psi_plus_useful: T,
    /// Herald probability regardless of the memory paths.
    pub phi_plus_raw: T,
    pub psi_plus_raw: T,
}

impl<T: Real> BsmSuccess<T> {
    /// Both Bell outcomes, fourfold-conditioned.
    pub fn total_useful(&self) -> T {
        self.phi_plus_useful + self.psi_plus_useful
    }
}

/// Success probabilities of the fusion gate on a state carrying two memory paths.
pub fn bsm_success_probability<T: Real>(
    state: &MixedFockState<T>,
    circuit: &BsmCircuit<T>,
    memory: [(&str, ModeKind); 2],
) -> Result<BsmSuccess<T>> {
    let phi = HeraldRule::phi_plus();
    let psi = HeraldRule::psi_plus();
    let dist = measure_threshold_where(&circuit.propagate(state)?, &circuit.detectors, |p| {
        phi.matches(p) || psi.matches(p)
    })?;
    let mut out = BsmSuccess {
        phi_plus_useful: T::zero(),
        psi_plus_useful: T::zero(),
        phi_plus_raw: T::zero(),
        psi_plus_raw: T::zero(),
    };
    for o in &dist.outcomes {
        let Some(st) = &o.state else { continue };
        let useful = match project_and_trace(st, memory[0], memory[1]) {
            Ok(sel) => o.probability * sel.mass,
            Err(Error::NoPostSelectedMass) => T::zero(),
            Err(e) => return Err(e),
        };
        if phi.matches(&o.pattern) {
            out.phi_plus_useful = out.phi_plus_useful + useful;
            out.phi_plus_raw = out.phi_plus_raw + o.probability;
        } else {
            out.psi_plus_useful = out.psi_plus_useful + useful;
            out.psi_plus_raw = out.psi_plus_raw + o.probability;
        }
    }
    Ok(out)
}

/// Memory-side state after a herald.
#[derive(Clone, Debug)]
pub struct HeraldedMemory<T: Real> {
    pub herald_probability: T,
    /// Herald-conditioned state of all undetected modes, spurious branches included.
    pub conditional: MixedFockState<T>,
    /// One excitation per memory path, when fourfold post-selection was requested.
    pub fourfold: Option<PostSelection<T>>,
}

impl<T: Real> HeraldedMemory<T> {
    pub fn rho(&self) -> Result<&TwoQubitDensityMatrix<T>> {
        self.fourfold.as_ref().map(|s| &s.rho).ok_or(Error::NoPostSelectedMass)
    }
}

/// Conditions on the rule's patterns and optionally post-selects one
/// excitation in each memory path.
pub fn heralded_memory_state<T: Real>(
    state: &MixedFockState<T>,
    circuit: &BsmCircuit<T>,
    rule: &HeraldRule,
    memory: [(&str, ModeKind); 2],
    fourfold: bool,
) -> Result<HeraldedMemory<T>> {
    let dist = run_bsm_for(state, circuit, rule)?;
    let mut members = Vec::new();
    let mut p = T::zero();
    for o in dist.outcomes.iter().filter(|o| rule.matches(&o.pattern)) {
        p = p + o.probability;
        if let Some(st) = &o.state {
            for (w, s) in st.members() {
                members.push((*w * o.probability, s.clone()));
            }
        }
    }
    if !(p > T::zero()) {
        return Err(Error::ZeroProbabilityOutcome);
    }
    let conditional = MixedFockState::from_unnormalized(members)?;
    let fourfold = if fourfold {
        Some(project_and_trace(&conditional, memory[0], memory[1])?)
    } else {
        None
    };
    Ok(HeraldedMemory {
        herald_probability: p,
        conditional,
        fourfold,
    })
}

/// Two sources, the fusion gate and lossy memory-side arms.
///
/// Node A emits on paths `1` (memory side) and `2` (to the BSM); node B on
/// `3` (to the BSM) and `4` (memory side).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct SwapSetup<T> {
    pub source_a: SpdcSourceSpec<T>,
    pub source_b: SpdcSourceSpec<T>,
    /// Dark counts and window of the BSM detectors. The detection efficiency
    /// is taken from the sources' heralding efficiencies.
    pub bsm_detector: ThresholdDetectorSpec<T>,
    /// Overall transmission of the memory-side photons up to their detectors.
    pub memory_transmission: [T; 2],
}

impl<T: Real> SwapSetup<T> {
    /// Memory-side arms detected directly, as in the no-storage configuration.
    pub fn without_storage(source_a: SpdcSourceSpec<T>, source_b: SpdcSourceSpec<T>, bsm_detector: ThresholdDetectorSpec<T>) -> Self {
        Self {
            memory_transmission: [source_a.heralding_efficiency, source_b.heralding_efficiency],
            source_a,
            source_b,
            bsm_detector,
        }
    }

    /// Joint state of both sources before the BSM.
    pub fn joint_state(&self) -> Result<MixedFockState<T>> {
        let a = source_state(&self.source_a, "1", "2")?;
        let b = source_state(&self.source_b, "3", "4")?;
        Ok(a.tensor(&b)?.into())
    }

    /// BSM circuit with the common detection efficiency folded into the
    /// detectors and any excess loss on the weaker input applied explicitly.
    pub fn circuit_and_input(&self, state: &MixedFockState<T>) -> Result<(BsmCircuit<T>, MixedFockState<T>)> {
        let (ea, eb) = (self.source_a.heralding_efficiency, self.source_b.heralding_efficiency);
        let common = ea.max(eb);
        let mut st = state.clone();
        if common > T::zero() {
            if ea < common {
                st = st.loss("2", ea / common)?;
            }
            if eb < common {
                st = st.loss("3", eb / common)?;
            }
        }
        let circuit = BsmCircuit::fusion("2", "3", self.bsm_detector.with_efficiency(common));
        Ok((circuit, st))
    }
}

/// Figures of merit for the heralded pair on the memory-side paths.
#[derive(Clone, Debug)]
pub struct SwapResult<T: Real> {
    pub rho: TwoQubitDensityMatrix<T>,
    /// Probability per pulse pair of an accepted herald.
    pub herald_probability: T,
    /// Probability per pulse pair of a herald plus one detected photon per memory-side arm.
    pub fourfold_probability: T,
    pub fidelity: T,
    pub witness: T,
    pub chsh: T,
}

/// Heralded entanglement swapping between the two memory-side paths.
pub fn heralded_swap<T: Real>(setup: &SwapSetup<T>, rule: &HeraldRule) -> Result<SwapResult<T>> {
    let joint = setup.joint_state()?;
    heralded_swap_from(setup, rule, &joint, [("1", ModeKind::Optical), ("4", ModeKind::Optical)])
}

/// As [`heralded_swap`] on a prepared joint state whose memory-side paths may be memory modes.
pub fn heralded_swap_from<T: Real>(
    setup: &SwapSetup<T>,
    rule: &HeraldRule,
    joint: &MixedFockState<T>,
    memory: [(&str, ModeKind); 2],
) -> Result<SwapResult<T>> {
    let (circuit, input) = setup.circuit_and_input(joint)?;
    let herald = heralded_memory_state(&input, &circuit, rule, memory, false)?;
    let mut st = herald.conditional;
    for (i, (path, kind)) in memory.iter().enumerate() {
        let ix = st.members()[0].1.path_indices(path, *kind)?;
        st = st.loss_on(&ix, setup.memory_transmission[i])?;
    }
    let sel = project_and_trace(&st, memory[0], memory[1])?;
    let rho = sel
        .rho
        .depolarize_qubit(0, setup.source_a.intrinsic_visibility)
        .depolarize_qubit(1, setup.source_b.intrinsic_visibility);
    Ok(SwapResult {
        fidelity: fidelity_phi_plus(&rho)?,
        witness: witness_expectation(&rho),
        chsh: chsh_s(&rho, &ChshSettings::experiment()),
        herald_probability: herald.herald_probability,
        fourfold_probability: herald.herald_probability * sel.mass,
        rho,
    })
}

/// The sixteen-term product of two one-pair source states on paths 1–4.
pub fn two_single_pair_sources<T: Real>() -> Result<PureFockState<T>> {
    let a = crate::sources::single_pair_state("1", "2")?;
    let b = crate::sources::single_pair_state("3", "4")?;
    a.tensor(&b)
}
