//! The two example families `f = Σ_m P_m` on `ℓ_1 → ℓ_p` built on the
//! partition of the coordinates into consecutive blocks `σ_m` of size `m!`.
//!
//! Family A: `P_m(x) = (m^{m/2}/m!)^{1/p} Σ_{j∈σ_m} x_j^m e_j`. Every component
//! is p-compact but `κ_p(P_m) ≥ m^{m/2p}` grows too fast for any radius.
//!
//! Family B: `P_m(x) = (1/m!)^{1/p} x_1^{m-2} Σ_{j∈σ_m} x_j^2 e_j` for `m ≥ 2`.
//! Here `κ_p(P_m) ≤ 1`, so the radius at the origin is 1, yet the second
//! derivative at `e_1` needs a generator sequence with divergent norm.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homopoly::{factorial, FamilyKind, FamilyTag, HomPolynomial, Monomial};
use crate::lpcore::{lp_norm_of_magnitudes, CVector, Exponent, C64};
use crate::taylor::{FamilyInfo, TailLaw, TaylorModel};

/// Default dimension cap: `1 + 2 + 6 + 24 + 120`, blocks up to `m = 5`.
pub const DEFAULT_DIM_CAP: usize = 153;

/// Zero-based coordinate blocks `σ_1, σ_2, …` with `|σ_m| = m!`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaPartition {
    pub blocks: Vec<Range<usize>>,
}

impl SigmaPartition {
    /// Blocks `σ_1..=σ_{m_max}`; fails when they need more than `dim_cap`
    /// coordinates.
    pub fn new(m_max: usize, dim_cap: usize) -> Result<Self> {
        let mut blocks = Vec::with_capacity(m_max);
        let mut start = 0usize;
        for m in 1..=m_max {
            let len = factorial(m);
            let end = start as f64 + len;
            if end > dim_cap as f64 {
                return Err(Error::DimensionCap { needed: end.min(usize::MAX as f64) as usize, cap: dim_cap });
            }
            blocks.push(start..end as usize);
            start = end as usize;
        }
        Ok(SigmaPartition { blocks })
    }

    /// `σ_m`, one-based degree.
    pub fn block(&self, m: usize) -> Range<usize> {
        self.blocks[m - 1].clone()
    }

    pub fn dim(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.end)
    }
}

fn coefficient(kind: FamilyKind, m: usize, p: Exponent) -> f64 {
    let mf = m as f64;
    match kind {
        FamilyKind::A => (mf.powf(mf / 2.0) / factorial(m)).powf(p.recip()),
        FamilyKind::B => (1.0 / factorial(m)).powf(p.recip()),
    }
}

fn tagged(kind: FamilyKind, m: usize, p: Exponent, block: &Range<usize>) -> Option<FamilyTag> {
    Some(FamilyTag { kind, m, p, block_start: block.start, block_len: block.len() })
}

/// Family-A component of degree `m ≥ 1` on `dim` coordinates.
pub fn example_a_component(m: usize, p: Exponent, sigma: &SigmaPartition) -> Result<HomPolynomial> {
    check_p(p)?;
    let dim = sigma.dim();
    let block = sigma.block(m);
    let c = C64::new(coefficient(FamilyKind::A, m, p), 0.0);
    let mut poly = HomPolynomial::from_terms(m, dim, dim, block.clone().map(|j| (j, Monomial::var(j, m as u32), c)))?;
    poly.family = tagged(FamilyKind::A, m, p, &block);
    Ok(poly)
}

/// Family-B component of degree `m ≥ 2`.
pub fn example_b_component(m: usize, p: Exponent, sigma: &SigmaPartition) -> Result<HomPolynomial> {
    check_p(p)?;
    if m < 2 {
        return Err(Error::DegreeTooLow(m));
    }
    let dim = sigma.dim();
    let block = sigma.block(m);
    let c = C64::new(coefficient(FamilyKind::B, m, p), 0.0);
    let terms = block.clone().map(|j| (j, Monomial::new(vec![(0, m as u32 - 2), (j as u32, 2)]), c));
    let mut poly = HomPolynomial::from_terms(m, dim, dim, terms)?;
    poly.family = tagged(FamilyKind::B, m, p, &block);
    Ok(poly)
}

fn check_p(p: Exponent) -> Result<()> {
    if p.is_inf() {
        return Err(Error::InvalidArgument("the example families need a finite p".into()));
    }
    Ok(())
}

fn model(kind: FamilyKind, m_max: usize, p: Exponent, dim_cap: usize) -> Result<TaylorModel> {
    let sigma = SigmaPartition::new(m_max, dim_cap)?;
    let dim = sigma.dim();
    let first = if kind == FamilyKind::A { 1 } else { 2 };
    let mut components = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        components.push(if m < first {
            HomPolynomial::zero(m, dim, dim)
        } else if kind == FamilyKind::A {
            example_a_component(m, p, &sigma)?
        } else {
            example_b_component(m, p, &sigma)?
        });
    }
    let tail = (kind == FamilyKind::B).then_some(TailLaw { c1: 1.0, c2: 1.0 });
    let mut tm = TaylorModel::new(CVector::zeros(dim), components, tail)?;
    tm.family = Some(FamilyInfo { kind, p });
    Ok(tm)
}

/// Family A truncated at degree `m_max`, expanded at the origin.
pub fn build_example_a(m_max: usize, p: Exponent, dim_cap: usize) -> Result<TaylorModel> {
    check_p(p)?;
    if m_max < 1 {
        return Err(Error::DegreeTooLow(m_max));
    }
    model(FamilyKind::A, m_max, p, dim_cap)
}

/// Family B truncated at degree `m_max`, with tail law `κ_p(P_m) ≤ 1`.
pub fn build_example_b(m_max: usize, p: Exponent, dim_cap: usize) -> Result<TaylorModel> {
    check_p(p)?;
    if m_max < 2 {
        return Err(Error::DegreeTooLow(m_max));
    }
    model(FamilyKind::B, m_max, p, dim_cap)
}

/// `‖P_m‖ ≤ (m^{m/2}/m!)^{1/p}` for family A.
pub fn example_a_norm_bound(m: usize, p: Exponent) -> f64 {
    coefficient(FamilyKind::A, m, p)
}

/// Closed-form `(lower, upper)` for `κ_p(P_m)` of a family at the origin.
/// Family A is exact at `m^{m/2p}`; family B has upper 1 and the lower bound
/// `(1-ε)^{m-2} ε²` from the probes `(1-ε)e_1 + εe_j`, `ε = 2/m`.
pub fn family_kappa_closed_form(kind: FamilyKind, m: usize, p: Exponent) -> (f64, f64) {
    match kind {
        FamilyKind::A if m >= 1 => {
            let v = (m as f64).powf(m as f64 / 2.0 * p.recip());
            (v, v)
        }
        FamilyKind::B if m >= 2 => {
            let eps = (2.0 / m as f64).min(1.0);
            ((1.0 - eps).powi(m as i32 - 2) * eps * eps, 1.0)
        }
        _ => (0.0, 0.0),
    }
}

/// Disjoint-coordinate lower bounds `m_p({P_m(e_j) : j ∈ σ_m}) = m^{m/2p}`
/// for `m = 1..=m_max`. The same points are images of `P_m f(y)` at every
/// base point `y`, since only degree `m` involves the coordinates in `σ_m`.
pub fn example_a_lower_certificate(p: Exponent, m_max: usize) -> Result<Vec<(usize, f64)>> {
    check_p(p)?;
    (1..=m_max)
        .map(|m| {
            let c = coefficient(FamilyKind::A, m, p);
            let count = factorial(m) as usize;
            Ok((m, lp_norm_of_magnitudes(std::iter::repeat_n(c, count), p)))
        })
        .collect()
}

/// Partial sums `S_M = Σ_{2≤m≤M} Σ_{j∈σ_m} ‖(1/m!)^{1/p} b_1^{m-2} e_j‖^p`
/// for `P_2 f(b)`: any generator sequence for `P_2 f(b)(B_{ℓ_1})` has
/// `‖·‖_p^p ≥ S_M` for every `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceCertificate {
    pub p: Exponent,
    /// `|e'_1(b)|`.
    pub b1: f64,
    /// `(M, S_M)` for `M = 2..=m_max`.
    pub partial_sums: Vec<(usize, f64)>,
}

impl DivergenceCertificate {
    /// Recompute every term from the coefficients (no cancellation used) and
    /// compare with the stored partial sums.
    pub fn verify(&self, tol: f64) -> Result<()> {
        let mut s = 0.0;
        for &(m, stored) in &self.partial_sums {
            let c = coefficient(FamilyKind::B, m, self.p) * self.b1.powi(m as i32 - 2);
            s += factorial(m) * c.powf(self.p.value());
            if (s - stored).abs() > tol * s.max(1.0) {
                return Err(Error::InvalidCertificate(format!(
                    "partial sum at M = {m}: stored {stored}, recomputed {s}"
                )));
            }
        }
        Ok(())
    }

    /// Divergent when the terms do not decay, i.e. `|b_1| ≥ 1`.
    pub fn diverges(&self) -> bool {
        self.b1 >= 1.0
    }
}

/// `Σ_{j∈σ_m} (1/m!) |b_1|^{(m-2)p} = |b_1|^{(m-2)p}` since `|σ_m| = m!`.
pub fn example_b_divergence(p: Exponent, b1: f64, m_max: usize) -> Result<DivergenceCertificate> {
    check_p(p)?;
    if m_max < 3 {
        return Err(Error::InvalidArgument(format!("need m_max >= 3, got {m_max}")));
    }
    let mut s = 0.0;
    let partial_sums = (2..=m_max)
        .map(|m| {
            s += b1.abs().powf((m as f64 - 2.0) * p.value());
            (m, s)
        })
        .collect();
    Ok(DivergenceCertificate { p, b1: b1.abs(), partial_sums })
}

/// At `b = e_1` the partial sums are exactly `M - 1`.
pub fn example_b_at_e1_certificate(p: Exponent, m_max: usize) -> Result<DivergenceCertificate> {
    example_b_divergence(p, 1.0, m_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homopoly::{kappa_lower, probe_set, ProbeOptions};

    #[test]
    fn partition_sizes() {
        let s = SigmaPartition::new(5, DEFAULT_DIM_CAP).unwrap();
        let lens: Vec<usize> = s.blocks.iter().map(|b| b.len()).collect();
        assert_eq!(lens, vec![1, 2, 6, 24, 120]);
        assert_eq!(s.dim(), 153);
        assert_eq!(s.block(2), 1..3);
        assert!(matches!(SigmaPartition::new(6, DEFAULT_DIM_CAP), Err(Error::DimensionCap { needed: 873, .. })));
    }

    #[test]
    fn family_a_at_basis() {
        let p = Exponent::Finite(2.0);
        let s = SigmaPartition::new(3, 100).unwrap();
        let p2 = example_a_component(2, p, &s).unwrap();
        // one-based e_2 is index 1
        let v = p2.eval(&CVector::basis(s.dim(), 1)).unwrap();
        assert!((&v - &CVector::basis(s.dim(), 1)).norm2() < 1e-15);
        let p1 = example_a_component(1, p, &s).unwrap();
        assert_eq!(p1.num_terms(), 1);
    }

    #[test]
    fn family_a_norm_bound_on_probes() {
        for p in [Exponent::Finite(1.0), Exponent::Finite(2.0)] {
            let tm = build_example_a(4, p, DEFAULT_DIM_CAP).unwrap();
            for m in 1..=4 {
                let probes =
                    probe_set(tm.dom(), Exponent::Finite(1.0), &ProbeOptions { samples: 128, ..Default::default() });
                let worst = probes.iter().map(|x| tm.components[m].eval(x).unwrap().norm(p)).fold(0.0, f64::max);
                assert!(worst <= example_a_norm_bound(m, p) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn family_b_probe_lower_bound() {
        let p = Exponent::Finite(2.0);
        let tm = build_example_b(4, p, DEFAULT_DIM_CAP).unwrap();
        let s = SigmaPartition::new(4, DEFAULT_DIM_CAP).unwrap();
        let eps = 0.5;
        let probes: Vec<CVector> = s
            .block(4)
            .map(|j| {
                let mut x = CVector::basis(tm.dom(), j).scale_real(eps);
                x[0] += C64::new(1.0 - eps, 0.0);
                x
            })
            .collect();
        let (w, _) = kappa_lower(&tm.components[4], p, &probes).unwrap();
        assert!((w.value() - family_kappa_closed_form(FamilyKind::B, 4, p).0).abs() < 1e-12);
    }

    #[test]
    fn divergence_partial_sums() {
        let p = Exponent::Finite(2.0);
        let c = example_b_at_e1_certificate(p, 10).unwrap();
        assert_eq!(c.partial_sums[1], (3, 2.0));
        assert_eq!(c.partial_sums.last().unwrap(), &(10, 9.0));
        c.verify(1e-12).unwrap();
        assert!(c.diverges());
        assert!(example_b_at_e1_certificate(p, 2).is_err());
    }
}
