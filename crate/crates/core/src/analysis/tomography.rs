//! Count records, maximum-likelihood tomography and Poisson error bars.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cr, Real};

use super::density::{dagger4, mul4, trace_prod, zero4, Matrix4, TwoQubitDensityMatrix};
use super::setting::{standard_tomography_settings, ArmSetting, MeasurementSetting, Port};

/// Coincidence counts collected at one two-arm setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRecord<T> {
    pub label: String,
    pub setting: MeasurementSetting<T>,
    pub counts: u64,
    pub duration_s: T,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    setting: String,
    qwp1_deg: f64,
    hwp1_deg: f64,
    qwp2_deg: f64,
    hwp2_deg: f64,
    counts: u64,
    duration_s: f64,
}

/// Reads records from CSV. Both analyzers are read at their `H` port.
pub fn read_count_records<R: Read>(reader: R) -> Result<Vec<CountRecord<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let row: CsvRow = row?;
        if !(row.duration_s >= 0.0) {
            return Err(Error::Tomography(format!("negative duration for `{}`", row.setting)));
        }
        out.push(CountRecord {
            label: row.setting,
            setting: MeasurementSetting::new(
                ArmSetting::h(row.qwp1_deg, row.hwp1_deg),
                ArmSetting::h(row.qwp2_deg, row.hwp2_deg),
            ),
            counts: row.counts,
            duration_s: row.duration_s,
        });
    }
    Ok(out)
}

pub fn write_count_records<W: Write>(writer: W, records: &[CountRecord<f64>]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for r in records {
        if r.setting.arm1.port != Port::H || r.setting.arm2.port != Port::H {
            return Err(Error::Tomography(format!(
                "record `{}` uses a V port; express it with a rotated HWP",
                r.label
            )));
        }
        wtr.serialize(CsvRow {
            setting: r.label.clone(),
            qwp1_deg: r.setting.arm1.qwp_deg,
            hwp1_deg: r.setting.arm1.hwp_deg,
            qwp2_deg: r.setting.arm2.qwp_deg,
            hwp2_deg: r.setting.arm2.hwp_deg,
            counts: r.counts,
            duration_s: r.duration_s,
        })?;
    }
    wtr.flush()?;
    Ok(())
}

/// Expected counts `pairs × Tr(Π ρ)` for each labelled setting, rounded.
pub fn expected_counts<T: Real>(
    rho: &TwoQubitDensityMatrix<T>,
    settings: &[(String, MeasurementSetting<T>)],
    pairs_per_setting: T,
    duration_s: T,
) -> Vec<CountRecord<T>> {
    settings
        .iter()
        .map(|(label, s)| {
            let p = rho.expectation(&s.projector()).re.max(T::zero());
            CountRecord {
                label: label.clone(),
                setting: *s,
                counts: (p * pairs_per_setting).round().to_u64().unwrap_or(0),
                duration_s,
            }
        })
        .collect()
}

/// Poisson-sampled counts with mean `pairs × Tr(Π ρ)`.
pub fn sample_counts<R: Rng + ?Sized>(
    rho: &TwoQubitDensityMatrix<f64>,
    settings: &[(String, MeasurementSetting<f64>)],
    pairs_per_setting: f64,
    duration_s: f64,
    rng: &mut R,
) -> Vec<CountRecord<f64>> {
    settings
        .iter()
        .map(|(label, s)| {
            let mean = rho.expectation(&s.projector()).re.max(0.0) * pairs_per_setting;
            CountRecord {
                label: label.clone(),
                setting: *s,
                counts: poisson(mean, rng),
                duration_s,
            }
        })
        .collect()
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MleResult<T: Real> {
    pub rho: TwoQubitDensityMatrix<T>,
    pub log_likelihood: T,
    pub iterations: usize,
    /// Log-likelihood after each accepted step, starting from the initial guess.
    pub trace: Vec<T>,
}

struct Term<T: Real> {
    proj: Matrix4<T>,
    n: T,
    tau: T,
}

fn canonical<T: Real>(records: &[CountRecord<T>]) -> Vec<&CountRecord<T>> {
    let key = |r: &CountRecord<T>| {
        let s = &r.setting;
        [s.arm1.qwp_deg, s.arm1.hwp_deg, s.arm2.qwp_deg, s.arm2.hwp_deg]
            .map(|x| x.to_f64().unwrap_or(0.0))
    };
    let mut v: Vec<&CountRecord<T>> = records.iter().collect();
    v.sort_by(|a, b| {
        key(a)
            .partial_cmp(&key(b))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then((a.setting.arm1.port, a.setting.arm2.port).cmp(&(b.setting.arm1.port, b.setting.arm2.port)))
            .then(a.counts.cmp(&b.counts))
            .then(a.label.cmp(&b.label))
            .then(
                a.duration_s
                    .partial_cmp(&b.duration_s)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
    });
    v
}

fn same_projector<T: Real>(a: &Matrix4<T>, b: &Matrix4<T>) -> bool {
    (0..4).all(|i| (0..4).all(|j| (a[i][j] - b[i][j]).norm() < T::lit(1e-9)))
}

fn log_likelihood<T: Real>(terms: &[Term<T>], rho: &Matrix4<T>, total: T) -> (T, Vec<T>) {
    let probs: Vec<T> = terms.iter().map(|t| trace_prod(&t.proj, rho).re.max(T::zero())).collect();
    let norm: T = terms.iter().zip(&probs).fold(T::zero(), |acc, (t, p)| acc + t.tau * *p);
    let mut ll = T::zero();
    for (t, p) in terms.iter().zip(&probs) {
        if t.n > T::zero() {
            if *p <= T::zero() {
                return (T::neg_infinity(), probs);
            }
            ll = ll + t.n * p.ln();
        }
    }
    (ll - total * norm.ln(), probs)
}

/// Reconstructs a density matrix by maximizing the Poisson likelihood.
///
/// The overall pair rate is profiled out, so each record contributes
/// `n ln(τ Tr(Πρ)) − S ln Σ τ Tr(Πρ)`. Steps are diluted `RρR` updates with a
/// backtracking line search that only accepts non-decreasing likelihood.
pub fn mle_tomography<T: Real>(records: &[CountRecord<T>], opts: &MleOptions) -> Result<MleResult<T>> {
    let standard = standard_tomography_settings::<T>();
    for (label, s) in &standard {
        let pr = s.projector();
        if !records.iter().any(|r| same_projector(&r.setting.projector(), &pr)) {
            return Err(Error::Tomography(format!("missing setting {label}")));
        }
    }
    let sorted = canonical(records);
    let terms: Vec<Term<T>> = sorted
        .iter()
        .map(|r| Term {
            proj: r.setting.projector(),
            n: T::from_u64(r.counts).unwrap_or(T::zero()),
            tau: if r.duration_s > T::zero() { r.duration_s } else { T::one() },
        })
        .collect();
    let total = terms.iter().fold(T::zero(), |acc, t| acc + t.n);
    if !(total > T::zero()) {
        return Err(Error::Tomography("all counts are zero".into()));
    }

    let mut rho = TwoQubitDensityMatrix::<T>::maximally_mixed().matrix().to_owned();
    let (mut ll, mut probs) = log_likelihood(&terms, &rho, total);
    let mut trace = vec![ll];
    let mut iterations = 0;
    let mut eps = T::one();
    while iterations < opts.max_iterations {
        iterations += 1;
        let norm = terms.iter().zip(&probs).fold(T::zero(), |acc, (t, p)| acc + t.tau * *p);
        let mut k = zero4::<T>();
        for (t, p) in terms.iter().zip(&probs) {
            let mut c = -t.tau / norm;
            if t.n > T::zero() {
                c = c + t.n / (*p * total);
            }
            for i in 0..4 {
                for j in 0..4 {
                    k[i][j] = k[i][j] + t.proj[i][j] * c;
                }
            }
        }
        let mut accepted = None;
        let mut step = (eps * T::lit(2.0)).min(T::lit(64.0));
        while step > T::lit(1e-14) {
            let cand = diluted_step(&rho, &k, step);
            let (cl, cp) = log_likelihood(&terms, &cand, total);
            if cl >= ll {
                accepted = Some((cand, cl, cp));
                break;
            }
            step = step * T::lit(0.5);
        }
        let Some((cand, cl, cp)) = accepted else { break };
        eps = step;
        let gain = cl - ll;
        rho = cand;
        ll = cl;
        probs = cp;
        trace.push(ll);
        if gain < T::lit(opts.tolerance) {
            break;
        }
    }
    let rho = hermitize(rho);
    let rho = TwoQubitDensityMatrix::new(rho).or_else(|_| TwoQubitDensityMatrix::from_unnormalized(rho))?;
    Ok(MleResult {
        rho,
        log_likelihood: ll,
        iterations,
        trace,
    })
}

fn diluted_step<T: Real>(rho: &Matrix4<T>, k: &Matrix4<T>, eps: T) -> Matrix4<T> {
    let mut a = zero4::<T>();
    for i in 0..4 {
        for j in 0..4 {
            a[i][j] = k[i][j] * eps;
        }
        a[i][i] = a[i][i] + cr(T::one());
    }
    let m = mul4(&mul4(&a, rho), &dagger4(&a));
    let tr = (0..4).fold(T::zero(), |acc, i| acc + m[i][i].re);
    let mut out = m;
    for row in out.iter_mut() {
        for x in row.iter_mut() {
            *x = *x / tr;
        }
    }
    hermitize(out)
}

fn hermitize<T: Real>(m: Matrix4<T>) -> Matrix4<T> {
    let mut out = m;
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (m[i][j] + m[j][i].conj()) * T::lit(0.5);
        }
    }
    out
}

/// Standard deviation of `estimator` under Poisson resampling of every count.
///
/// Each trial draws every count from a Poisson law whose mean is the observed
/// count. Trials run in parallel; trial `k` uses its own ChaCha stream, so the
/// result depends only on `seed`.
pub fn poisson_error_bars<F>(
    records: &[CountRecord<f64>],
    estimator: F,
    n_trials: usize,
    seed: u64,
) -> Result<f64>
where
    F: Fn(&[CountRecord<f64>]) -> Result<f64> + Sync,
{
    if n_trials < 100 {
        return Err(Error::OutOfRange {
            name: "n_trials",
            reason: format!("{n_trials} < 100"),
        });
    }
    let values: Vec<f64> = (0..n_trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let resampled: Vec<CountRecord<f64>> = records
                .iter()
                .map(|r| CountRecord {
                    counts: poisson(r.counts as f64, &mut rng),
                    ..r.clone()
                })
                .collect();
            estimator(&resampled)
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(var.sqrt())
}

/// Twelve correlation settings in the three Pauli bases, labelled `HH`, `HV`, …, `LL`.
pub fn correlation_settings<T: Real>() -> Vec<(String, MeasurementSetting<T>)> {
    let mut out = Vec::with_capacity(12);
    for [p, m] in [["H", "V"], ["D", "A"], ["R", "L"]] {
        for a in [p, m] {
            for b in [p, m] {
                out.push((
                    format!("{a}{b}"),
                    MeasurementSetting::new(
                        ArmSetting::named(a).expect("label"),
                        ArmSetting::named(b).expect("label"),
                    ),
                ));
            }
        }
    }
    out
}

fn basis_probs(records: &[CountRecord<f64>], plus: &str, minus: &str) -> Result<[f64; 4]> {
    let mut by_label: BTreeMap<&str, u64> = BTreeMap::new();
    for r in records {
        *by_label.entry(r.label.as_str()).or_default() += r.counts;
    }
    let mut c = [0.0; 4];
    for (i, (a, b)) in [(plus, plus), (plus, minus), (minus, plus), (minus, minus)].iter().enumerate() {
        let key = format!("{a}{b}");
        c[i] = *by_label
            .get(key.as_str())
            .ok_or_else(|| Error::Tomography(format!("missing correlation record {key}")))? as f64;
    }
    let n: f64 = c.iter().sum();
    if n <= 0.0 {
        return Err(Error::Tomography(format!("no counts in the {plus}/{minus} basis")));
    }
    Ok(c.map(|x| x / n))
}

/// Witness from the twelve correlation records:
/// `½[(P_HV + P_VH) + (P_DA + P_AD) − (P_RL + P_LR)]`.
pub fn witness_from_counts(records: &[CountRecord<f64>]) -> Result<f64> {
    let z = basis_probs(records, "H", "V")?;
    let x = basis_probs(records, "D", "A")?;
    let y = basis_probs(records, "R", "L")?;
    Ok(0.5 * ((z[1] + z[2]) + (x[1] + x[2]) - (y[1] + y[2])))
}

/// Fidelity to `|Φ⁺⟩` from the twelve correlation records.
pub fn fidelity_from_counts(records: &[CountRecord<f64>]) -> Result<f64> {
    let e = |p: [f64; 4]| p[0] - p[1] - p[2] + p[3];
    let z = basis_probs(records, "H", "V")?;
    let x = basis_probs(records, "D", "A")?;
    let y = basis_probs(records, "R", "L")?;
    Ok((1.0 + e(x) - e(y) + e(z)) / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::witness::{fidelity_phi_plus, witness_expectation};

    #[test]
    fn count_estimators_match_state_values() {
        let rho = TwoQubitDensityMatrix::<f64>::werner(0.7);
        let recs = expected_counts(&rho, &correlation_settings(), 1e8, 1.0);
        let w = witness_from_counts(&recs).unwrap();
        let f = fidelity_from_counts(&recs).unwrap();
        assert!((w - witness_expectation(&rho)).abs() < 1e-6);
        assert!((f - fidelity_phi_plus(&rho).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn csv_round_trip() {
        let rho = TwoQubitDensityMatrix::<f64>::werner(0.5);
        let recs = expected_counts(&rho, &standard_tomography_settings(), 1000.0, 2.5);
        let mut buf = Vec::new();
        write_count_records(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("setting,qwp1_deg,hwp1_deg,qwp2_deg,hwp2_deg,counts,duration_s"));
        let back = read_count_records(buf.as_slice()).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn missing_setting_is_rejected() {
        let rho = TwoQubitDensityMatrix::<f64>::werner(0.5);
        let mut recs = expected_counts(&rho, &standard_tomography_settings(), 1000.0, 1.0);
        recs.pop();
        assert!(matches!(mle_tomography(&recs, &MleOptions::default()), Err(Error::Tomography(_))));
    }

    #[test]
    fn zero_counts_are_rejected() {
        let mut recs = expected_counts(
            &TwoQubitDensityMatrix::<f64>::werner(0.5),
            &standard_tomography_settings(),
            1.0,
            1.0,
        );
        for r in &mut recs {
            r.counts = 0;
        }
        assert!(mle_tomography(&recs, &MleOptions::default()).is_err());
    }

    #[test]
    fn likelihood_never_decreases() {
        let rho = TwoQubitDensityMatrix::<f64>::werner(0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let recs = sample_counts(&rho, &standard_tomography_settings(), 500.0, 1.0, &mut rng);
        let res = mle_tomography(&recs, &MleOptions::default()).unwrap();
        assert!(res.trace.windows(2).all(|w| w[1] >= w[0]));
        assert!(res.rho.validate(1e-10).is_ok());
    }

    #[test]
    fn error_bars_need_enough_trials() {
        let recs = expected_counts(&TwoQubitDensityMatrix::<f64>::werner(0.5), &correlation_settings(), 100.0, 1.0);
        assert!(poisson_error_bars(&recs, witness_from_counts, 10, 1).is_err());
        let s = poisson_error_bars(&recs, |_| Ok(1.0), 100, 1).unwrap();
        assert_eq!(s, 0.0);
    }
}
