//! Independent reference model for linear optics, used as a test oracle.
//!
//! States are polynomials in creation operators over integer mode labels:
//! a sorted multiset of modes maps to the coefficient of the product of
//! their creation operators on vacuum. Occupation probabilities pick up
//! `Π n_k!` from the norm of that product.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64 as C;

pub type Poly = BTreeMap<Vec<usize>, C>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn monomial(modes: &[usize], coeff: C) -> Poly {
    let mut k = modes.to_vec();
    k.sort();
    let mut p = Poly::new();
    p.insert(k, coeff);
    p
}

pub fn add_into(acc: &mut Poly, other: &Poly, scale: C) {
    for (k, v) in other {
        *acc.entry(k.clone()).or_insert(c(0.0, 0.0)) += v * scale;
    }
}

pub fn product(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            let mut k = ka.clone();
            k.extend(kb);
            k.sort();
            *out.entry(k).or_insert(c(0.0, 0.0)) += va * vb;
        }
    }
    out
}

/// Applies `a†_i → Σ_j map[i][j].1 a†_{map[i][j].0}` to every operator.
/// Modes without an entry are unchanged.
pub fn transform(p: &Poly, map: &BTreeMap<usize, Vec<(usize, C)>>) -> Poly {
    let mut out = Poly::new();
    for (k, v) in p {
        let mut partial: Vec<(Vec<usize>, C)> = vec![(vec![], *v)];
        for m in k {
            let images = map.get(m).cloned().unwrap_or_else(|| vec![(*m, c(1.0, 0.0))]);
            let mut next = Vec::new();
            for (modes, a) in &partial {
                for (j, u) in &images {
                    let mut mm = modes.clone();
                    mm.push(*j);
                    next.push((mm, a * u));
                }
            }
            partial = next;
        }
        for (mut modes, a) in partial {
            modes.sort();
            *out.entry(modes).or_insert(c(0.0, 0.0)) += a;
        }
    }
    out.retain(|_, v| v.norm() > 1e-14);
    out
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|x| x as f64).product()
}

/// Probability of each occupation, keyed by the sorted mode multiset.
pub fn probabilities(p: &Poly) -> BTreeMap<Vec<usize>, f64> {
    p.iter()
        .map(|(k, v)| {
            let mut counts = BTreeMap::new();
            for m in k {
                *counts.entry(*m).or_insert(0usize) += 1;
            }
            let w: f64 = counts.values().map(|&n| factorial(n)).product();
            (k.clone(), v.norm_sqr() * w)
        })
        .collect()
}

pub fn norm_sqr(p: &Poly) -> f64 {
    probabilities(p).values().sum()
}

/// Mode numbering for polarization-resolved paths: `2·path + pol`, pol 0 = H, 1 = V.
pub fn m(path: usize, pol: usize) -> usize {
    2 * path + pol
}

/// Half-wave plate at `deg` on a path, `[[cos2θ, sin2θ], [sin2θ, −cos2θ]]`.
pub fn hwp(path: usize, deg: f64) -> BTreeMap<usize, Vec<(usize, C)>> {
    let t = (2.0 * deg).to_radians();
    let (co, si) = (t.cos(), t.sin());
    BTreeMap::from([
        (m(path, 0), vec![(m(path, 0), c(co, 0.0)), (m(path, 1), c(si, 0.0))]),
        (m(path, 1), vec![(m(path, 0), c(si, 0.0)), (m(path, 1), c(-co, 0.0))]),
    ])
}

/// Polarizing beam splitter: H transmits, V reflects with a factor `i`.
pub fn pbs(in1: usize, in2: usize, out1: usize, out2: usize) -> BTreeMap<usize, Vec<(usize, C)>> {
    BTreeMap::from([
        (m(in1, 0), vec![(m(out1, 0), c(1.0, 0.0))]),
        (m(in2, 0), vec![(m(out2, 0), c(1.0, 0.0))]),
        (m(in1, 1), vec![(m(out2, 1), c(0.0, 1.0))]),
        (m(in2, 1), vec![(m(out1, 1), c(0.0, 1.0))]),
    ])
}

/// Path numbers used by the fusion-gate oracle.
pub mod paths {
    pub const P1: usize = 1;
    pub const P2: usize = 2;
    pub const P3: usize = 3;
    pub const P4: usize = 4;
    pub const O1: usize = 5;
    pub const O2: usize = 6;
    pub const SRC_A: usize = 7;
    pub const SRC_B: usize = 8;
}

/// Two HWPs at 22.5°, a PBS, and HWPs on both outputs. T and R ports are the
/// H and V modes of the two outputs.
pub fn fusion_gate(p: &Poly) -> Poly {
    use paths::*;
    let mut s = transform(p, &hwp(P2, 22.5));
    s = transform(&s, &hwp(P3, 22.5));
    s = transform(&s, &pbs(P2, P3, O1, O2));
    s = transform(&s, &hwp(O1, 22.5));
    transform(&s, &hwp(O2, 22.5))
}

pub fn detector_label(mode: usize) -> Option<&'static str> {
    use paths::*;
    match mode {
        x if x == m(O1, 0) => Some("T1"),
        x if x == m(O1, 1) => Some("R1"),
        x if x == m(O2, 0) => Some("T2"),
        x if x == m(O2, 1) => Some("R2"),
        _ => None,
    }
}

/// `(|HH⟩ + |VV⟩ − i|HV,0⟩ + i|0,HV⟩) / 2` on paths `a`, `b`, written out directly.
pub fn post_interferometer_pair(a: usize, b: usize) -> Poly {
    let mut p = Poly::new();
    add_into(&mut p, &monomial(&[m(a, 0), m(b, 0)], c(0.5, 0.0)), c(1.0, 0.0));
    add_into(&mut p, &monomial(&[m(a, 1), m(b, 1)], c(0.5, 0.0)), c(1.0, 0.0));
    add_into(&mut p, &monomial(&[m(a, 0), m(a, 1)], c(0.0, -0.5)), c(1.0, 0.0));
    add_into(&mut p, &monomial(&[m(b, 0), m(b, 1)], c(0.0, 0.5)), c(1.0, 0.0));
    p
}

/// General waveplate `R(θ) diag(1, e^{iφ}) R(−θ)`; symmetric, so rows and columns agree.
pub fn waveplate(path: usize, deg: f64, phase: f64) -> BTreeMap<usize, Vec<(usize, C)>> {
    let t = deg.to_radians();
    let (co, si) = (t.cos(), t.sin());
    let e = C::from_polar(1.0, phase);
    let hh = c(co * co, 0.0) + e * si * si;
    let vv = c(si * si, 0.0) + e * co * co;
    let hv = (c(1.0, 0.0) - e) * co * si;
    BTreeMap::from([
        (m(path, 0), vec![(m(path, 0), hh), (m(path, 1), hv)]),
        (m(path, 1), vec![(m(path, 0), hv), (m(path, 1), vv)]),
    ])
}

/// Engine state on numerically named optical paths, as an oracle polynomial.
pub fn to_poly(state: &heralink::fock::PureFockState<f64>) -> Poly {
    use heralink::fock::Polarization;
    let labels: Vec<usize> = state
        .modes()
        .iter()
        .map(|id| {
            let path: usize = id.path.parse().expect("numeric path label");
            m(path, if id.polarization == Polarization::H { 0 } else { 1 })
        })
        .collect();
    let mut p = Poly::new();
    for (occ, a) in state.terms() {
        let mut k = Vec::new();
        let mut w = 1.0;
        for (i, &n) in occ.0.iter().enumerate() {
            k.extend(std::iter::repeat_n(labels[i], n as usize));
            w *= factorial(n as usize);
        }
        k.sort();
        p.insert(k, c(a.re, a.im) / w.sqrt());
    }
    p
}

pub fn max_diff(a: &Poly, b: &Poly) -> f64 {
    let mut d: f64 = 0.0;
    for (k, v) in a {
        d = d.max((v - b.get(k).copied().unwrap_or_default()).norm());
    }
    for (k, v) in b {
        d = d.max((v - a.get(k).copied().unwrap_or_default()).norm());
    }
    d
}

/// Click-pattern probabilities of the fusion gate with ideal threshold
/// detectors: `(all, with exactly one photon in each of paths 1 and 4)`.
pub fn fusion_patterns(input: &Poly) -> BTreeMap<Vec<&'static str>, (f64, f64)> {
    use paths::*;
    let out = fusion_gate(input);
    let mut acc: BTreeMap<Vec<&'static str>, (f64, f64)> = BTreeMap::new();
    for (k, p) in probabilities(&out) {
        let mut labels: Vec<&'static str> = k.iter().filter_map(|&x| detector_label(x)).collect();
        labels.sort();
        labels.dedup();
        let in_path = |path: usize| k.iter().filter(|&&x| x / 2 == path).count();
        let e = acc.entry(labels).or_insert((0.0, 0.0));
        e.0 += p;
        if in_path(P1) == 1 && in_path(P4) == 1 {
            e.1 += p;
        }
    }
    acc
}

pub fn pattern_prob(table: &BTreeMap<Vec<&'static str>, (f64, f64)>, patterns: &[&[&'static str]], useful: bool) -> f64 {
    patterns
        .iter()
        .map(|pat| {
            let mut k = pat.to_vec();
            k.sort();
            table.get(&k).map(|e| if useful { e.1 } else { e.0 }).unwrap_or(0.0)
        })
        .sum()
}

pub const PHI_PATTERNS: [&[&str]; 2] = [&["T1", "R2"], &["R1", "T2"]];
pub const PSI_PATTERNS: [&[&str]; 2] = [&["T1", "T2"], &["R1", "R2"]];
