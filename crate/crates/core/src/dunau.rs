//! Dunau polynomials of `T_d`.
//!
//! `r_n` is the unique degree-`n` polynomial with `r_n(A)δ_o = 𝟙_{S_n}`, the
//! indicator of the sphere of radius `n` around the root. They satisfy
//!
//! ```text
//! r_0 = 1,  r_1 = t,  r_2 = t² - d,
//! r_{n+1} = t·r_n - (d-1)·r_{n-1}    (n ≥ 2)
//! ```
//!
//! The `n = 1` step uses `d` rather than `d-1` because the root has `d`
//! neighbours: `A²δ_o = d·δ_o + 𝟙_{S_2}`. They are orthogonal for ν with
//! `∫ r_n² dν = |S_n|`.

use crate::error::{invalid, Error, Result};
use crate::quadrature::QuadratureRule;
use crate::tree::TruncatedTree;

/// `r_0 … r_max_n` for a fixed degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DunauTable {
    degree: usize,
    max_n: usize,
}

impl DunauTable {
    pub fn new(degree: usize, max_n: usize) -> Result<Self> {
        if degree < 2 {
            return Err(invalid(format!("degree must be at least 2, got {degree}")));
        }
        Ok(Self { degree, max_n })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    /// `r_n(t)` by forward recurrence.
    pub fn eval(&self, n: usize, t: f64) -> Result<f64> {
        if n > self.max_n {
            return Err(invalid(format!("n = {n} exceeds table size {}", self.max_n)));
        }
        Ok(dunau_values(self.degree, n, t)[n])
    }

    /// `[r_0(t), …, r_max_n(t)]`.
    pub fn eval_all(&self, t: f64) -> Vec<f64> {
        dunau_values(self.degree, self.max_n, t)
    }
}

/// `[r_0(t), …, r_n(t)]` for degree `d`.
pub fn dunau_values(d: usize, n: usize, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(t);
    let df = d as f64;
    for k in 1..n {
        let back = if k == 1 { df } else { df - 1.0 };
        let next = t * out[k] - back * out[k - 1];
        out.push(next);
    }
    out
}

/// `Σ cₙ rₙ(t)` for the degree-`d` Dunau family.
pub fn dunau_series(d: usize, coeffs: &[f64], t: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    dunau_values(d, coeffs.len() - 1, t).iter().zip(coeffs).map(|(r, c)| r * c).sum()
}

/// `|S_n|`: 1 for `n = 0`, `d·(d-1)^(n-1)` otherwise.
pub fn sphere_size(d: usize, n: usize) -> Result<u64> {
    if n == 0 {
        return Ok(1);
    }
    let overflow = || Error::Overflow { what: "sphere size", k: n };
    let pow = u32::try_from(n - 1).map_err(|_| overflow())?;
    (d as u64 - 1).checked_pow(pow).and_then(|p| p.checked_mul(d as u64)).ok_or_else(overflow)
}

/// `|S_n|` as a float, for weighting sums. Never overflows.
pub fn sphere_size_f64(d: usize, n: usize) -> f64 {
    if n == 0 {
        1.0
    } else {
        d as f64 * (d as f64 - 1.0).powi(n as i32 - 1)
    }
}

/// `r_n(A)δ_o` on a truncated tree, in exact integer arithmetic.
///
/// Valid on levels `<= depth - n`.
pub fn sphere_vector(tree: &TruncatedTree, n: usize) -> Result<Vec<i128>> {
    let depth = tree.depth();
    if n > depth {
        return Err(invalid(format!("n = {n} exceeds tree depth {depth}")));
    }
    let d = tree.degree() as i128;
    let mut prev = vec![0i128; tree.len()];
    prev[0] = 1;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = tree.adjacency_step(&prev, depth);
    for k in 1..n {
        // valid radius of `cur` is depth - k
        let a = tree.adjacency_step(&cur, depth - k);
        let back = if k == 1 { d } else { d - 1 };
        let next: Vec<i128> = a.iter().zip(&prev).map(|(x, p)| x - back * p).collect();
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Checks `r_n(A)δ_o = 𝟙_{S_n}` exactly on every vertex of level `<= depth - n`.
pub fn sphere_indicator_check(d: usize, n: usize, depth: usize) -> Result<bool> {
    if depth < 2 * n {
        return Err(invalid(format!("depth {depth} too small for n = {n}; need at least {}", 2 * n)));
    }
    let tree = TruncatedTree::new(d, depth)?;
    let v = sphere_vector(&tree, n)?;
    Ok(tree.ball_range(depth - n).all(|u| v[u] == i128::from(tree.level(u) == n)))
}

/// `∫ r_n r_m dν` by quadrature.
pub fn dunau_inner(table: &DunauTable, rule: &QuadratureRule, n: usize, m: usize) -> Result<f64> {
    if n > table.max_n || m > table.max_n {
        return Err(invalid(format!("indices ({n}, {m}) exceed table size {}", table.max_n)));
    }
    if rule.degree() != table.degree {
        return Err(Error::DegreeMismatch(table.degree, rule.degree()));
    }
    let top = n.max(m);
    let d = table.degree;
    let values = rule.eval(|t| {
        let r = dunau_values(d, top, t);
        r[n] * r[m]
    })?;
    Ok(rule.sum(&values))
}
