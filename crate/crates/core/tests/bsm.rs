mod common;

use common::*;
use heralink::analysis::{fidelity_phi_plus, TwoQubitDensityMatrix};
use heralink::bsm::*;
use heralink::fock::*;
use heralink::memory::{MemorySpec, TemporalModeRegister};
use heralink::sources::SpdcSourceSpec;
use heralink::C as Cx;

fn optical(paths: &[&str]) -> Vec<ModeId> {
    paths.iter().flat_map(|p| ModeId::optical_pair(p)).collect()
}

fn state(paths: &[&str], terms: &[(Vec<u8>, Cx<f64>)]) -> MixedFockState<f64> {
    PureFockState::from_terms(optical(paths), terms.iter().cloned(), Truncation::default())
        .unwrap()
        .into()
}

#[test]
fn joint_source_state_success_matches_enumeration() {
    let oracle = fusion_patterns(&product(&post_interferometer_pair(1, 2), &post_interferometer_pair(3, 4)));
    let phi = pattern_prob(&oracle, &PHI_PATTERNS, true);
    let psi = pattern_prob(&oracle, &PSI_PATTERNS, true);
    assert!((phi + psi - 0.125).abs() < 1e-12);
    assert!((phi - 0.0625).abs() < 1e-12);

    let st: MixedFockState<f64> = two_single_pair_sources().unwrap().into();
    let s = bsm_success_probability(&st, &BsmCircuit::ideal("2", "3"), [("1", ModeKind::Optical), ("4", ModeKind::Optical)])
        .unwrap();
    assert!((s.total_useful() - 0.125).abs() < 1e-10);
    assert!((s.phi_plus_useful - phi).abs() < 1e-12);
    assert!((s.psi_plus_useful - psi).abs() < 1e-12);
    assert!((s.phi_plus_raw - pattern_prob(&oracle, &PHI_PATTERNS, false)).abs() < 1e-12);
    assert!((s.psi_plus_raw - pattern_prob(&oracle, &PSI_PATTERNS, false)).abs() < 1e-12);
}

#[test]
fn psi_plus_input_never_gives_phi_plus_patterns() {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let st = state(&["2", "3"], &[(vec![1, 0, 0, 1], Cx::new(r, 0.0)), (vec![0, 1, 1, 0], Cx::new(r, 0.0))]);
    let dist = run_bsm(&st, &BsmCircuit::ideal("2", "3")).unwrap();
    let phi: f64 = HeraldRule::phi_plus().accepted.iter().map(|p| dist.probability(p)).sum();
    let psi: f64 = HeraldRule::psi_plus().accepted.iter().map(|p| dist.probability(p)).sum();
    assert!(phi.abs() < 1e-14);
    let mut poly = monomial(&[m(2, 0), m(3, 1)], c(r, 0.0));
    add_into(&mut poly, &monomial(&[m(2, 1), m(3, 0)], c(r, 0.0)), c(1.0, 0.0));
    let oracle = fusion_patterns(&poly);
    assert!((psi - pattern_prob(&oracle, &PSI_PATTERNS, false)).abs() < 1e-12);
    assert!(psi > 0.99);
}

#[test]
fn two_photons_in_one_input_leave_through_one_port() {
    let st = state(&["2", "3"], &[(vec![1, 1, 0, 0], Cx::new(1.0, 0.0))]);
    let dist = run_bsm(&st, &BsmCircuit::ideal("2", "3")).unwrap();
    let phi: f64 = HeraldRule::phi_plus().accepted.iter().map(|p| dist.probability(p)).sum();
    assert!(phi.abs() < 1e-14);
}

#[test]
fn vacuum_gives_no_clicks() {
    let st = state(&["2", "3"], &[(vec![0, 0, 0, 0], Cx::new(1.0, 0.0))]);
    let dist = run_bsm(&st, &BsmCircuit::ideal("2", "3")).unwrap();
    assert!((dist.probability(&ClickPattern::of(&[])) - 1.0).abs() < 1e-15);
}

fn memory_pair_state() -> MixedFockState<f64> {
    // (|H⟩₂|H_M⟩₁ + |V⟩₂|V_M⟩₁)(|H⟩₃|H_M⟩₄ + |V⟩₃|V_M⟩₄) / 2
    let modes: Vec<ModeId> = ModeId::memory_pair("1")
        .into_iter()
        .chain(optical(&["2", "3"]))
        .chain(ModeId::memory_pair("4"))
        .collect();
    let mut terms = vec![];
    for a in 0..2 {
        for b in 0..2 {
            let mut o = vec![0u8; 8];
            o[a] = 1;
            o[2 + a] = 1;
            o[4 + b] = 1;
            o[6 + b] = 1;
            terms.push((o, Cx::new(0.5, 0.0)));
        }
    }
    PureFockState::from_terms(modes, terms, Truncation::default()).unwrap().into()
}

#[test]
fn even_bell_component_is_heralded_a_quarter_of_the_time() {
    let st = memory_pair_state();
    let herald = heralded_memory_state(
        &st,
        &BsmCircuit::ideal("2", "3"),
        &HeraldRule::phi_plus(),
        [("1", ModeKind::Memory), ("4", ModeKind::Memory)],
        true,
    )
    .unwrap();
    assert!((herald.herald_probability - 0.25).abs() < 1e-12);
    let rho = herald.rho().unwrap();
    assert!(rho.trace_distance(&TwoQubitDensityMatrix::phi_plus()) < 1e-12);
}

#[test]
fn absorbed_photons_are_heralded_into_an_even_bell_state() {
    let st: MixedFockState<f64> = two_single_pair_sources().unwrap().into();
    let mut a = TemporalModeRegister::new("A", MemorySpec::perfect(), 8e7).unwrap();
    let mut b = TemporalModeRegister::new("B", MemorySpec::perfect(), 8e7).unwrap();
    let st = a.absorb(&st, "1", 0, 0.0).unwrap();
    let st = b.absorb(&st, "4", 0, 0.0).unwrap();
    let herald = heralded_memory_state(
        &st,
        &BsmCircuit::ideal("2", "3"),
        &HeraldRule::phi_plus(),
        [("A-0", ModeKind::Memory), ("B-0", ModeKind::Memory)],
        true,
    )
    .unwrap();
    assert!((fidelity_phi_plus(herald.rho().unwrap()).unwrap() - 1.0).abs() < 1e-12);
    // without the fourfold condition, branches with an empty memory remain
    let p_both = herald.conditional.probability_where(|s, o| {
        let ia = s.path_indices("A-0", ModeKind::Memory).unwrap();
        let ib = s.path_indices("B-0", ModeKind::Memory).unwrap();
        o[ia[0]] + o[ia[1]] == 1 && o[ib[0]] + o[ib[1]] == 1
    });
    assert!(p_both < 1.0 - 1e-3);
}

fn lossy_setup() -> SwapSetup<f64> {
    let s = SpdcSourceSpec::new(0.02);
    SwapSetup::without_storage(s, s.with_visibility(0.9), ThresholdDetectorSpec::nanowire())
}

#[test]
fn accepted_patterns_give_the_same_memory_state() {
    let setup = lossy_setup();
    let (circuit, input) = setup.circuit_and_input(&setup.joint_state().unwrap()).unwrap();
    let mem = [("1", ModeKind::Optical), ("4", ModeKind::Optical)];
    let rhos: Vec<_> = HeraldRule::phi_plus()
        .accepted
        .iter()
        .map(|p| {
            let rule = HeraldRule { accepted: vec![p.clone()], outcome: BellOutcome::PhiPlus };
            heralded_memory_state(&input, &circuit, &rule, mem, true).unwrap()
        })
        .collect();
    assert!((rhos[0].herald_probability - rhos[1].herald_probability).abs() < 1e-12);
    assert!(rhos[0].rho().unwrap().trace_distance(rhos[1].rho().unwrap()) < 1e-10);
}

#[test]
fn herald_probability_is_symmetric_in_the_nodes() {
    let s = SpdcSourceSpec::<f64>::new(0.02);
    let setup = SwapSetup::without_storage(s, s, ThresholdDetectorSpec::nanowire());
    let (circuit, input) = setup.circuit_and_input(&setup.joint_state().unwrap()).unwrap();
    let swapped = BsmCircuit::fusion("3", "2", circuit.detectors[0].spec);
    let rule = HeraldRule::phi_plus();
    let mem = [("1", ModeKind::Optical), ("4", ModeKind::Optical)];
    let p = heralded_memory_state(&input, &circuit, &rule, mem, false).unwrap().herald_probability;
    let q = heralded_memory_state(&input, &swapped, &rule, mem, false).unwrap().herald_probability;
    assert!((p - q).abs() < 1e-12 * p.max(1e-300));
}

#[test]
fn click_distribution_is_normalized() {
    let setup = lossy_setup();
    let (circuit, input) = setup.circuit_and_input(&setup.joint_state().unwrap()).unwrap();
    let dist = run_bsm(&input, &circuit).unwrap();
    assert!((dist.total_probability() - 1.0).abs() < 1e-10);
}

#[test]
fn memory_loss_does_not_change_fidelity_without_dark_counts() {
    let joint: MixedFockState<f64> = two_single_pair_sources().unwrap().into();
    let s = SpdcSourceSpec::new(0.01);
    let mut setup = SwapSetup::without_storage(s, s, ThresholdDetectorSpec::new(0.85, 0.0, 2.0).unwrap());
    let mem = [("1", ModeKind::Optical), ("4", ModeKind::Optical)];
    let fids: Vec<f64> = [0.143, 0.01, 0.001]
        .iter()
        .map(|&eta| {
            setup.memory_transmission = [eta, eta];
            heralded_swap_from(&setup, &HeraldRule::phi_plus(), &joint, mem).unwrap().fidelity
        })
        .collect();
    for f in &fids {
        assert!((f - fids[0]).abs() < 1e-6, "{fids:?}");
    }
}

#[test]
fn zero_probability_herald_is_reported() {
    let st = state(&["1", "2", "3", "4"], &[(vec![0; 8], Cx::new(1.0, 0.0))]);
    let r = heralded_memory_state(
        &st,
        &BsmCircuit::ideal("2", "3"),
        &HeraldRule::phi_plus(),
        [("1", ModeKind::Optical), ("4", ModeKind::Optical)],
        true,
    );
    assert!(matches!(r, Err(heralink::Error::ZeroProbabilityOutcome)));
}
