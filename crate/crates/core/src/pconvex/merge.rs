//! Diagonal merge of generator sequences for a sumset `{Σ_j x_j : x_j ∈ K_j}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpcore::{CVector, C64};

use super::GeneratorSet;

pub const DEFAULT_MERGE_CAP: f64 = 1e12;

/// Merged sequence `w_k = S^{1/q} λ_j x^j_n` with `S = Σ_j M_j`, listed in
/// zigzag order over the `(j, n)` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergedGenerators {
    pub generators: GeneratorSet,
    /// `(j, n)` source of each merged generator, zero-based.
    pub order: Vec<(usize, usize)>,
    pub sum_m: f64,
    /// `S^{1/q} (S + eps)^{1/p}`.
    pub bound: f64,
    pub eps: f64,
    m: Vec<f64>,
}

impl MergedGenerators {
    /// Coefficients for `Σ_j Σ_n α^j_n x^j_n` in the merged sequence:
    /// `M_j^{1/q} α^j_n / S^{1/q}`.
    pub fn coefficients(&self, alphas: &[Vec<C64>]) -> Result<Vec<C64>> {
        if alphas.len() != self.m.len() {
            return Err(Error::DimensionMismatch { expected: self.m.len(), got: alphas.len() });
        }
        let q = self.generators.p.conjugate();
        let inv_q = q.recip();
        let s = self.sum_m.powf(inv_q);
        self.order
            .iter()
            .map(|&(j, n)| {
                let a = alphas[j].get(n).copied().unwrap_or(C64::new(0.0, 0.0));
                Ok(a * (self.m[j].powf(inv_q) / s))
            })
            .collect()
    }
}

/// Zigzag enumeration of the `(row, col)` grid, one-based diagonal `d = j + n - 1`:
/// even diagonals run from `(d, 1)` up to `(1, d)`, odd ones the other way.
pub fn diagonal_order(lens: &[usize]) -> Vec<(usize, usize)> {
    let rows = lens.len();
    let max_len = lens.iter().copied().max().unwrap_or(0);
    let total: usize = lens.iter().sum();
    let mut out = Vec::with_capacity(total);
    if rows == 0 {
        return out;
    }
    for d in 1..rows + max_len {
        let cells: Vec<(usize, usize)> = if d % 2 == 0 {
            (1..=d).rev().map(|j| (j, d + 1 - j)).collect()
        } else {
            (1..=d).map(|j| (j, d + 1 - j)).collect()
        };
        for (j, n) in cells {
            if j <= rows && n <= lens[j - 1] {
                out.push((j - 1, n - 1));
            }
        }
    }
    out
}

pub fn merge_diagonal(reps: &[(GeneratorSet, f64)], eps: f64) -> Result<MergedGenerators> {
    merge_diagonal_with_cap(reps, eps, DEFAULT_MERGE_CAP)
}

/// Merge covering sequences `x^j` of `K_j` with `‖x^j‖ ≤ M_j`. Sets with
/// `M_j = 0` contribute nothing and are skipped.
pub fn merge_diagonal_with_cap(reps: &[(GeneratorSet, f64)], eps: f64, cap: f64) -> Result<MergedGenerators> {
    let Some((first, _)) = reps.first() else {
        return Err(Error::InvalidArgument("nothing to merge".into()));
    };
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let p = first.p;
    let dim = first.dim();
    let q = p.conjugate();
    for (j, (g, mj)) in reps.iter().enumerate() {
        if g.p != p {
            return Err(Error::InvalidArgument(format!("set {j} has exponent {} instead of {p}", g.p)));
        }
        if g.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: g.dim() });
        }
        if !(*mj >= 0.0) || !mj.is_finite() {
            return Err(Error::InvalidArgument(format!("bound M_{j} = {mj} is not a finite nonnegative number")));
        }
        // the bound must dominate the sequence up to the slack the merge allows
        let allowed = (mj.powf(p.value()) + eps * mj.powf(p.value() - 1.0) / 2f64.powi(j as i32 + 1)).powf(p.recip());
        if g.norm() > allowed * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::InvalidArgument(format!(
                "sequence {j} has norm {} above its declared bound {mj}",
                g.norm()
            )));
        }
    }
    let sum_m: f64 = reps.iter().map(|(_, m)| m).sum();
    if sum_m > cap {
        return Err(Error::DivergentSum { sum: sum_m, cap });
    }
    let inv_q = q.recip();
    let scale = sum_m.powf(inv_q);
    let lens: Vec<usize> = reps.iter().map(|(g, m)| if *m > 0.0 { g.len() } else { 0 }).collect();
    let order = diagonal_order(&lens);
    let gens: Vec<CVector> = order
        .iter()
        .map(|&(j, n)| {
            // λ_j = M_j^{-1/q}; equals 1 when q = ∞
            let lambda = reps[j].1.powf(-inv_q);
            reps[j].0.gens[n].scale_real(scale * lambda)
        })
        .collect();
    let gens = if gens.is_empty() { vec![CVector::zeros(dim)] } else { gens };
    let generators = GeneratorSet { p, gens };
    let bound = scale * (sum_m + eps).powf(p.recip());
    let norm = generators.norm();
    if norm > bound * (1.0 + 1e-12) {
        return Err(Error::InvalidCertificate(format!("merged norm {norm} exceeds the bound {bound}")));
    }
    Ok(MergedGenerators { generators, order, sum_m, bound, eps, m: reps.iter().map(|(_, m)| *m).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpcore::Exponent;

    #[test]
    fn zigzag_matches_arrow_diagram() {
        let order = diagonal_order(&[4, 4, 4, 4]);
        let one_based: Vec<(usize, usize)> = order.iter().map(|&(j, n)| (j + 1, n + 1)).collect();
        assert_eq!(&one_based[..10], &[(1, 1), (2, 1), (1, 2), (1, 3), (2, 2), (3, 1), (4, 1), (3, 2), (2, 3), (1, 4)]);
        assert_eq!(order.len(), 16);
    }

    #[test]
    fn ragged_rows_skip_missing_cells() {
        let order = diagonal_order(&[1, 3]);
        assert_eq!(order, vec![(0, 0), (1, 0), (1, 1), (1, 2)]);
    }

    #[test]
    fn p_one_uses_unit_weights() {
        let p = Exponent::Finite(1.0);
        let a = GeneratorSet::new(vec![CVector::from_real(&[0.5, 0.0])], p).unwrap();
        let b = GeneratorSet::new(vec![CVector::from_real(&[0.0, 0.25])], p).unwrap();
        let m = merge_diagonal(&[(a.clone(), 0.5), (b.clone(), 0.25)], 1e-3).unwrap();
        assert_eq!(m.generators.gens[0], a.gens[0]);
        assert_eq!(m.generators.gens[1], b.gens[0]);
        assert!((m.bound - 0.751).abs() < 1e-12);
    }

    #[test]
    fn divergent_sum_rejected() {
        let p = Exponent::Finite(2.0);
        let a = GeneratorSet::new(vec![CVector::from_real(&[10.0])], p).unwrap();
        assert!(matches!(merge_diagonal_with_cap(&[(a, 10.0)], 1e-3, 5.0), Err(Error::DivergentSum { .. })));
    }
}
