//! The d-regular tree `T_d` and its spectral measure at the root.
//!
//! The spectral measure ν of `T_d` is the Kesten–McKay law on
//! `[-2√(d-1), 2√(d-1)]`. Its moments are the closed-walk counts at the root,
//! which [`closed_walk_count`] computes exactly by a dynamic program over the
//! distance from the root.

use crate::error::{invalid, Error, Result};

/// The infinite `d`-regular tree, identified by its degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TreeModel {
    degree: usize,
}

impl TreeModel {
    pub fn new(degree: usize) -> Result<Self> {
        if degree < 2 {
            return Err(invalid(format!("degree must be at least 2, got {degree}")));
        }
        Ok(Self { degree })
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `2√(d-1)`, the right endpoint of the support of ν.
    #[inline]
    pub fn spectral_radius(&self) -> f64 {
        2.0 * ((self.degree - 1) as f64).sqrt()
    }

    /// `|t| ≤ 2√(d-1)`.
    #[inline]
    pub fn in_support(&self, t: f64) -> bool {
        t.abs() <= self.spectral_radius()
    }

    /// Rejects recurrent trees (`d = 2`), where the Green function diverges.
    pub fn require_transient(&self, what: &str) -> Result<()> {
        if self.degree < 3 {
            return Err(Error::Unsupported(format!("{what} requires a transient tree (d >= 3); T_2 is recurrent")));
        }
        Ok(())
    }
}

/// Kesten–McKay density of ν with respect to Lebesgue measure.
///
/// `h(t) = (d/2π)·√(4(d-1) - t²)/(d² - t²)` on the support, zero elsewhere.
pub fn kesten_mckay_density(model: TreeModel, t: f64) -> f64 {
    let d = model.degree as f64;
    let r2 = 4.0 * (d - 1.0);
    let t2 = t * t;
    if !(t2 <= r2) {
        return 0.0;
    }
    d / (2.0 * std::f64::consts::PI) * (r2 - t2).sqrt() / (d * d - t2)
}

/// Number of length-`k` walks from the root, bucketed by the distance of the
/// endpoint from the root.
///
/// Entry `n` of the result counts walks ending anywhere on the sphere `S_n`.
/// The distance chain is truncated at `k`; a walk of length `k` cannot leave
/// the ball of radius `k`.
pub fn walk_distance_profile(model: TreeModel, k: usize) -> Result<Vec<u128>> {
    let d = model.degree as u128;
    let overflow = || Error::Overflow { what: "walk counts", k };
    let mut cur = vec![0u128; k + 2];
    cur[0] = 1;
    let mut next = vec![0u128; k + 2];
    for step in 0..k {
        next.iter_mut().for_each(|x| *x = 0);
        // only distances with the parity of `step` are populated
        for n in (step % 2..=step.min(k)).step_by(2) {
            let w = cur[n];
            if w == 0 {
                continue;
            }
            if n == 0 {
                next[1] = next[1].checked_add(w.checked_mul(d).ok_or_else(overflow)?).ok_or_else(overflow)?;
            } else {
                next[n - 1] = next[n - 1].checked_add(w).ok_or_else(overflow)?;
                let out = w.checked_mul(d - 1).ok_or_else(overflow)?;
                next[n + 1] = next[n + 1].checked_add(out).ok_or_else(overflow)?;
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur.truncate(k + 1);
    Ok(cur)
}

/// Exact number of closed walks of length `k` at the root of `T_d`.
///
/// ```
/// use treefiid::spectrum::{closed_walk_count, TreeModel};
/// let t3 = TreeModel::new(3).unwrap();
/// assert_eq!(closed_walk_count(t3, 4).unwrap(), 15);
/// ```
pub fn closed_walk_count(model: TreeModel, k: usize) -> Result<u128> {
    Ok(walk_distance_profile(model, k)?[0])
}
