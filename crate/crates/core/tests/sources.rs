mod common;

use std::collections::BTreeMap;

use common::*;
use heralink::analysis::fidelity_phi_plus;
use heralink::fock::*;
use heralink::sources::*;
use heralink::Error;

fn nanowire_arms(spec: &SpdcSourceSpec<f64>) -> [ThresholdDetectorSpec<f64>; 2] {
    let d = spec.arm_detector(&ThresholdDetectorSpec::nanowire());
    [d, d]
}

/// `exp(λ a†b†)|0⟩` truncated at `n` pairs, with `a = H` on path 7 and `b = V` on path 8.
fn squeezed_series(p: f64, n: usize) -> Poly {
    let pair = monomial(&[m(7, 0), m(8, 1)], c(p.sqrt(), 0.0));
    let mut term = monomial(&[], c(1.0, 0.0));
    let mut out = term.clone();
    for k in 1..=n {
        term = product(&term, &pair);
        add_into(&mut out, &term, c(1.0 / factorial(k), 0.0));
    }
    out
}

fn normalized(p: &Poly) -> Poly {
    let n = norm_sqr(p).sqrt();
    p.iter().map(|(k, v)| (k.clone(), v / n)).collect()
}

fn interferometer_oracle(p: &Poly) -> Poly {
    let s = transform(p, &hwp(7, 22.5));
    let s = transform(&s, &hwp(8, 22.5));
    transform(&s, &pbs(7, 8, 1, 2))
}

#[test]
fn zero_pair_probability_gives_vacuum_everywhere() {
    let st = source_state(&SpdcSourceSpec::<f64>::new(0.0), "1", "2").unwrap();
    assert_eq!(st.len(), 1);
    let (occ, a) = st.terms().next().unwrap();
    assert_eq!(occ.total(), 0);
    assert!((a.norm() - 1.0).abs() < 1e-15);
}

#[test]
fn one_pair_to_vacuum_ratio_equals_pair_probability() {
    let st = spdc_raw_state(&SpdcSourceSpec::<f64>::new(0.012)).unwrap();
    let ratio = st.amplitude(&[1, 0, 0, 1]).norm_sqr() / st.amplitude(&[0, 0, 0, 0]).norm_sqr();
    assert!((ratio - 0.012).abs() < 1e-9);
}

#[test]
fn raw_emission_matches_squeezed_series() {
    for &p in &[0.001, 0.012, 0.05, 0.1] {
        let spec = SpdcSourceSpec::<f64>::new(p);
        let st = spdc_raw_state_on(&spec, "7", "8").unwrap();
        let oracle = normalized(&squeezed_series(p, spec.max_pairs as usize));
        assert!(max_diff(&to_poly(&st), &oracle) < 1e-12);
        let two = st.amplitude(&[2, 0, 0, 2]).norm_sqr() / st.amplitude(&[0, 0, 0, 0]).norm_sqr();
        assert!((two - p * p).abs() < 1e-12 * (1.0 + p * p));
    }
}

#[test]
fn interferometer_output_matches_oracle_through_two_pairs() {
    let spec = SpdcSourceSpec::<f64>::new(0.05);
    let raw = spdc_raw_state_on(&spec, "7", "8").unwrap();
    let st = interferometer(&raw, "7", "8", "1", "2").unwrap();
    let oracle = interferometer_oracle(&normalized(&squeezed_series(0.05, 2)));
    assert!(max_diff(&to_poly(&st), &oracle) < 1e-12);
}

#[test]
fn single_pair_state_has_written_form() {
    let st = single_pair_state::<f64>("1", "2").unwrap();
    assert!(max_diff(&to_poly(&st), &post_interferometer_pair(1, 2)) < 1e-12);
}

#[test]
fn alternative_phase_convention_leaves_statistics_unchanged() {
    // Same HWP up to a global phase per photon: all click statistics agree.
    let spec = SpdcSourceSpec::<f64>::new(0.05);
    let raw = normalized(&squeezed_series(0.05, 2));
    let g = c(0.0, 1.0);
    let phased = |path: usize| -> BTreeMap<usize, Vec<(usize, num_complex::Complex64)>> {
        hwp(path, 22.5)
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().map(|(j, u)| (j, u * g)).collect()))
            .collect()
    };
    let s = transform(&raw, &phased(7));
    let s = transform(&s, &phased(8));
    let alt = probabilities(&transform(&s, &pbs(7, 8, 1, 2)));
    let st = interferometer(&spdc_raw_state_on(&spec, "7", "8").unwrap(), "7", "8", "1", "2").unwrap();
    let eng = probabilities(&to_poly(&st));
    assert_eq!(alt.len(), eng.len());
    for (k, v) in &alt {
        assert!((v - eng[k]).abs() < 1e-12);
    }
}

#[test]
fn g2_is_strictly_decreasing_in_pair_probability() {
    let mut prev = f64::INFINITY;
    for i in 0..=20 {
        let p = 0.001 * (100f64).powf(i as f64 / 20.0);
        let spec = SpdcSourceSpec::<f64>::new(p);
        let s = g2_cross_correlation(&spec, nanowire_arms(&spec), 2.0).unwrap();
        assert!(s.g2 < prev, "p = {p}");
        assert!((s.g2 - s.recomputed_g2()).abs() < 1e-9 * s.g2);
        prev = s.g2;
    }
}

#[test]
fn uncorrelated_sources_give_unit_g2() {
    let mk = |path: &str, q: f64| {
        let modes = ModeId::optical_pair(path).to_vec();
        let terms = [
            (vec![0, 0], heralink::C::new((1.0 - q).sqrt(), 0.0)),
            (vec![1, 0], heralink::C::new(q.sqrt(), 0.0)),
        ];
        PureFockState::from_terms(modes, terms, Truncation::default()).unwrap()
    };
    let st: MixedFockState<f64> = mk("1", 0.03).tensor(&mk("2", 0.2)).unwrap().into();
    let d = ThresholdDetectorSpec::<f64>::nanowire();
    let s = pair_statistics(&st, [d, d], 2.0, 8e7).unwrap();
    assert!((s.g2 - 1.0).abs() < 1e-12);
}

#[test]
fn vacuum_reports_zero_singles() {
    let st: MixedFockState<f64> = source_state(&SpdcSourceSpec::new(0.0), "1", "2").unwrap().into();
    let d = ThresholdDetectorSpec::<f64>::ideal();
    assert!(matches!(pair_statistics(&st, [d, d], 2.0, 8e7), Err(Error::ZeroSingles)));
}

#[test]
fn g2_target_inverts_to_pair_probability() {
    let spec = SpdcSourceSpec::<f64>::new(0.01);
    let dets = nanowire_arms(&spec);
    let p = pair_prob_for_g2(&spec, dets, 2.0, 50.0).unwrap();
    assert!(p > 0.008 && p < 0.016, "p = {p}");
    let g = g2_cross_correlation(&spec.with_pair_prob(p), dets, 2.0).unwrap().g2;
    assert!((g - 50.0).abs() < 1e-6);
    assert!(pair_prob_for_g2(&spec, dets, 2.0, 1e9).is_err());
}

#[test]
fn coincidences_are_linear_at_low_pair_probability() {
    let spec = SpdcSourceSpec::<f64>::new(0.01);
    let dets = nanowire_arms(&spec);
    let ps: Vec<f64> = (0..20).map(|i| 0.001 + 0.019 * i as f64 / 19.0).collect();
    let ys: Vec<f64> = ps
        .iter()
        .map(|&p| g2_cross_correlation(&spec.with_pair_prob(p), dets, 2.0).unwrap().p12)
        .collect();
    let n = ps.len() as f64;
    let (mx, my) = (ps.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = ps.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = ps.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;

    let series = coincidence_series(&spec, dets).unwrap();
    let (p12, d) = coincidence_closed_form(&series, mx);
    let direct = g2_cross_correlation(&spec.with_pair_prob(mx), dets, 2.0).unwrap().p12;
    assert!((p12 - direct).abs() < 1e-12);
    assert!((slope - d).abs() < 0.02 * d, "slope {slope} vs {d}");
}

#[test]
fn vanishing_pair_probability_gives_phi_plus() {
    let sel = postselected_source_rho(&SpdcSourceSpec::<f64>::new(1e-12)).unwrap();
    let f = fidelity_phi_plus(&sel.rho).unwrap();
    assert!((1.0 - f).abs() < 1e-10);
}

#[test]
fn fidelity_decreases_with_pair_probability() {
    let mut prev = 1.0 + 1e-12;
    for i in 1..=10 {
        let p = 0.01 * i as f64;
        let f = fidelity_phi_plus(&postselected_source_rho(&SpdcSourceSpec::new(p)).unwrap().rho).unwrap();
        assert!(f < prev);
        prev = f;
    }
}

#[test]
fn calibrated_visibility_hits_measured_fidelities() {
    for &target in &[0.926, 0.933] {
        let spec = SpdcSourceSpec::<f64>::new(0.0107);
        let v = calibrate_visibility(&spec, target).unwrap();
        let f = fidelity_phi_plus(&postselected_source_rho(&spec.with_visibility(v)).unwrap().rho).unwrap();
        assert!((f - target).abs() < 1e-12);
    }
    assert!(visibility_for_fidelity(0.9, 0.95).is_err());
}

#[test]
fn pump_calibration_round_trips() {
    let pump = SpdcSourceSpec::<f64>::new(0.01).pump;
    for &mw in &[0.5, 3.0, 12.0] {
        assert!((pump.power_for(pump.pair_prob(mw)) - mw).abs() < 1e-12);
    }
}

#[test]
fn out_of_range_pair_probability_is_rejected() {
    assert!(spdc_raw_state(&SpdcSourceSpec::<f64>::new(0.3)).is_err());
    assert!(spdc_raw_state(&SpdcSourceSpec::<f64>::new(-0.1)).is_err());
}
