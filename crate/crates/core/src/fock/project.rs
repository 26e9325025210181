//! Reduction of a Fock-space ensemble to a two-qubit polarization state.

use std::collections::BTreeMap;

use crate::analysis::density::{zero4, TwoQubitDensityMatrix};
use crate::error::{Error, Result};
use crate::scalar::{cr, Real, C};

use super::mixed::MixedFockState;
use super::mode::ModeKind;

/// Post-selected two-qubit state and the probability mass that produced it.
#[derive(Clone, Debug)]
pub struct PostSelection<T: Real> {
    pub rho: TwoQubitDensityMatrix<T>,
    /// Probability of exactly one excitation in each kept path.
    pub mass: T,
}

/// Keeps the branches with exactly one excitation in each of two paths,
/// encodes each path as a polarization qubit and traces out everything else.
pub fn project_and_trace<T: Real>(
    state: &MixedFockState<T>,
    first: (&str, ModeKind),
    second: (&str, ModeKind),
) -> Result<PostSelection<T>> {
    let mut m = zero4::<T>();
    for (w, s) in state.members() {
        let a = s.path_indices(first.0, first.1)?;
        let b = s.path_indices(second.0, second.1)?;
        let mut env: BTreeMap<Vec<u8>, [C<T>; 4]> = BTreeMap::new();
        for (occ, amp) in s.terms() {
            let o = &occ.0;
            if o[a[0]] + o[a[1]] != 1 || o[b[0]] + o[b[1]] != 1 {
                continue;
            }
            let q = if o[a[0]] == 1 { 0 } else { 2 } + if o[b[0]] == 1 { 0 } else { 1 };
            let rest: Vec<u8> = o
                .iter()
                .enumerate()
                .filter(|(i, _)| !a.contains(i) && !b.contains(i))
                .map(|(_, &n)| n)
                .collect();
            env.entry(rest).or_insert([cr(T::zero()); 4])[q] += *amp;
        }
        for v in env.values() {
            for i in 0..4 {
                for j in 0..4 {
                    m[i][j] = m[i][j] + v[i] * v[j].conj() * *w;
                }
            }
        }
    }
    let mass = (0..4).fold(T::zero(), |acc, i| acc + m[i][i].re);
    if !(mass > T::zero()) {
        return Err(Error::NoPostSelectedMass);
    }
    Ok(PostSelection {
        rho: TwoQubitDensityMatrix::from_unnormalized(m)?,
        mass,
    })
}
