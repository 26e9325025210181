//! Least-squares fit of the double-exponential echo decay.

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::spec::DecayModel;

/// Fits `A e^{-t/τ₁} + B e^{-t/τ₂}` (`τ₁ < τ₂`) to samples.
///
/// For fixed lifetimes the amplitudes are a linear least-squares problem, so the
/// lifetimes are seeded on a log grid and all four parameters then refined by
/// Levenberg–Marquardt.
pub fn fit_double_exponential<T: Real>(times_ns: &[T], values: &[T]) -> Result<DecayModel<T>> {
    if times_ns.len() != values.len() || times_ns.len() < 4 {
        return Err(Error::FitFailed(format!(
            "need at least 4 paired samples, got {} times and {} values",
            times_ns.len(),
            values.len()
        )));
    }
    let t_max = times_ns.iter().fold(T::zero(), |m, &t| m.max(t));
    let t_min = times_ns.iter().fold(T::infinity(), |m, &t| m.min(t.max(T::one())));
    let mut best: Option<(T, [T; 4])> = None;
    let n_grid = 40;
    let lo = (t_min * T::lit(0.1)).ln();
    let hi = (t_max * T::lit(10.0)).ln();
    let step = (hi - lo) / T::count(n_grid);
    for i in 0..n_grid {
        for j in i + 1..=n_grid {
            let tau1 = (lo + step * T::count(i)).exp();
            let tau2 = (lo + step * T::count(j)).exp();
            if let Some((a, b)) = linear_amplitudes(times_ns, values, tau1, tau2) {
                let p = [a, b, tau1, tau2];
                let r = residual(times_ns, values, &p);
                if best.as_ref().is_none_or(|(br, _)| r < *br) {
                    best = Some((r, p));
                }
            }
        }
    }
    let (_, p0) = best.ok_or_else(|| Error::FitFailed("no admissible starting point".into()))?;
    let p = levenberg_marquardt(times_ns, values, p0)?;
    let (a, b, t1, t2) = if p[2] <= p[3] { (p[0], p[1], p[2], p[3]) } else { (p[1], p[0], p[3], p[2]) };
    Ok(DecayModel::new(a, b, t1, t2))
}

fn model<T: Real>(t: T, p: &[T; 4]) -> T {
    p[0] * (-t / p[2]).exp() + p[1] * (-t / p[3]).exp()
}

fn residual<T: Real>(ts: &[T], ys: &[T], p: &[T; 4]) -> T {
    ts.iter()
        .zip(ys)
        .fold(T::zero(), |acc, (&t, &y)| {
            let r = model(t, p) - y;
            acc + r * r
        })
}

fn linear_amplitudes<T: Real>(ts: &[T], ys: &[T], tau1: T, tau2: T) -> Option<(T, T)> {
    let (mut s11, mut s12, mut s22, mut b1, mut b2) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for (&t, &y) in ts.iter().zip(ys) {
        let e1 = (-t / tau1).exp();
        let e2 = (-t / tau2).exp();
        s11 += e1 * e1;
        s12 += e1 * e2;
        s22 += e2 * e2;
        b1 += e1 * y;
        b2 += e2 * y;
    }
    let det = s11 * s22 - s12 * s12;
    if !(det.abs() > T::epsilon() * s11 * s22) {
        return None;
    }
    Some(((b1 * s22 - b2 * s12) / det, (s11 * b2 - s12 * b1) / det))
}

fn solve4<T: Real>(mut m: [[T; 4]; 4], mut v: [T; 4]) -> Option<[T; 4]> {
    for c in 0..4 {
        let piv = (c..4).max_by(|&i, &j| m[i][c].abs().partial_cmp(&m[j][c].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
        if m[piv][c].abs() <= T::min_positive_value() {
            return None;
        }
        m.swap(c, piv);
        v.swap(c, piv);
        for r in c + 1..4 {
            let f = m[r][c] / m[c][c];
            for k in c..4 {
                m[r][k] = m[r][k] - f * m[c][k];
            }
            v[r] = v[r] - f * v[c];
        }
    }
    let mut x = [T::zero(); 4];
    for c in (0..4).rev() {
        let mut s = v[c];
        for k in c + 1..4 {
            s -= m[c][k] * x[k];
        }
        x[c] = s / m[c][c];
    }
    Some(x)
}

fn levenberg_marquardt<T: Real>(ts: &[T], ys: &[T], mut p: [T; 4]) -> Result<[T; 4]> {
    let mut lambda = T::lit(1e-3);
    let mut cost = residual(ts, ys, &p);
    for _ in 0..500 {
        let mut jtj = [[T::zero(); 4]; 4];
        let mut jtr = [T::zero(); 4];
        for (&t, &y) in ts.iter().zip(ys) {
            let e1 = (-t / p[2]).exp();
            let e2 = (-t / p[3]).exp();
            let j = [e1, e2, p[0] * e1 * t / (p[2] * p[2]), p[1] * e2 * t / (p[3] * p[3])];
            let r = model(t, &p) - y;
            for a in 0..4 {
                jtr[a] += j[a] * r;
                for b in 0..4 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let mut improved = false;
        while lambda < T::lit(1e12) {
            let mut m = jtj;
            for (a, row) in m.iter_mut().enumerate() {
                row[a] += lambda * jtj[a][a].max(T::min_positive_value());
            }
            let Some(delta) = solve4(m, jtr.map(|x| -x)) else {
                lambda *= T::lit(10.0);
                continue;
            };
            let cand = [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2], p[3] + delta[3]];
            if cand[2] > T::zero() && cand[3] > T::zero() {
                let c = residual(ts, ys, &cand);
                if c < cost {
                    let gain = cost - c;
                    p = cand;
                    cost = c;
                    lambda = (lambda * T::lit(0.3)).max(T::lit(1e-12));
                    improved = true;
                    if gain <= T::epsilon() * cost.max(T::min_positive_value()) {
                        return Ok(p);
                    }
                    break;
                }
            }
            lambda *= T::lit(10.0);
        }
        if !improved {
            return Ok(p);
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_parameters_from_noiseless_samples() {
        let truth = DecayModel::<f64>::measured();
        let ts: Vec<f64> = (1..=12).map(|k| 55.6 * k as f64 * 1.9).collect();
        let ys: Vec<f64> = ts.iter().map(|&t| truth.eval(t)).collect();
        let fit = fit_double_exponential(&ts, &ys).unwrap();
        for (got, want) in [(fit.a, truth.a), (fit.b, truth.b), (fit.tau1_ns, truth.tau1_ns), (fit.tau2_ns, truth.tau2_ns)] {
            assert!((got / want - 1.0).abs() < 1e-3, "{fit:?}");
        }
    }

    #[test]
    fn too_few_samples() {
        assert!(fit_double_exponential(&[1.0, 2.0], &[1.0, 0.5]).is_err());
    }
}
