//! p-convex hulls `p-co{x_n} = {Σ α_n x_n : ‖α‖_q ≤ 1}` and certified bounds
//! on the size measure `m_p`.
//!
//! Generators live in `ℓ_p^d`, so a generator sequence has norm
//! `(Σ_n ‖x_n‖_p^p)^{1/p}`.

mod beta;
mod merge;
mod search;
mod solver;

pub use beta::{beta_construct, beta_construct_lp, BetaConstruction, BetaOptions, GeometricTail};
pub use merge::{merge_diagonal, merge_diagonal_with_cap, MergedGenerators, DEFAULT_MERGE_CAP};
pub use search::{direction_classes, mp_upper_search, SearchOptions};
pub use solver::{holder_dual_vector, MinNormSolver};

/// Slack used by merges and β constructions when the caller has no preference.
pub const DEFAULT_EPS: f64 = 1e-3;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpcore::{complex_pairs, lp_norm_of_magnitudes, CVector, Exponent, C64};

/// A candidate generator sequence `(x_n)` for a p-convex hull.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSet {
    pub p: Exponent,
    pub gens: Vec<CVector>,
}

impl GeneratorSet {
    pub fn new(gens: Vec<CVector>, p: Exponent) -> Result<Self> {
        let Some(first) = gens.first() else {
            return Err(Error::InvalidArgument("generator set must be nonempty".into()));
        };
        let dim = first.dim();
        for g in &gens {
            g.check_dim(dim)?;
        }
        if p.is_inf() {
            return Err(Error::InvalidArgument("generator sets need a finite exponent".into()));
        }
        Ok(GeneratorSet { p, gens })
    }

    pub fn q(&self) -> Exponent {
        self.p.conjugate()
    }

    pub fn dim(&self) -> usize {
        self.gens[0].dim()
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    /// `‖(x_n)_n‖_{ℓ_p(ℓ_p)}`.
    pub fn norm(&self) -> f64 {
        lp_norm_of_magnitudes(self.gens.iter().map(|g| g.norm(self.p)), self.p)
    }

    pub fn scaled(&self, c: f64) -> GeneratorSet {
        GeneratorSet { p: self.p, gens: self.gens.iter().map(|g| g.scale_real(c)).collect() }
    }

    pub fn solver(&self, tol: f64) -> Result<MinNormSolver> {
        MinNormSolver::new(self.dim(), &self.gens, self.q(), tol)
    }

    /// `Σ α_n x_n` for sparse coefficients.
    pub fn combine(&self, coeffs: &[(usize, C64)]) -> Result<CVector> {
        let mut out = CVector::zeros(self.dim());
        for &(n, a) in coeffs {
            let g = self.gens.get(n).ok_or(Error::IndexOutOfRange { index: n, max: self.len().saturating_sub(1) })?;
            out.axpy(a, g);
        }
        Ok(out)
    }
}

/// Primal witness: `Σ α_n x_n ≈ x` with the stated residual and `‖α‖_q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipCertificate {
    #[serde(with = "complex_pairs")]
    pub alpha: Vec<C64>,
    pub residual: f64,
    pub alpha_q_norm: f64,
}

impl MembershipCertificate {
    /// Membership in `p-co(G)` is certified when both numbers are within `tol`.
    pub fn certifies(&self, tol: f64) -> bool {
        self.residual <= tol && self.alpha_q_norm <= 1.0 + tol
    }
}

/// Dual witness: `‖A^H λ‖_p ≤ 1` so `value = Re⟨λ, x⟩` lower-bounds `‖α‖_q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub lambda: CVector,
    pub value: f64,
}

impl DualCertificate {
    /// Recompute the bound from scratch: returns `Re⟨λ, x⟩ / max(1, ‖A^H λ‖_p)`.
    pub fn verified_value(&self, gens: &GeneratorSet, x: &CVector) -> Result<f64> {
        self.lambda.check_dim(gens.dim())?;
        x.check_dim(gens.dim())?;
        let norm = lp_norm_of_magnitudes(gens.gens.iter().map(|g| g.inner(&self.lambda).norm()), gens.p);
        let pairing = self.lambda.inner(x).re;
        Ok(pairing / norm.max(1.0))
    }
}

/// Minimum-`ℓ_q` representation of `x` by the generators, with a dual bound.
pub fn min_norm_representation(
    g: &GeneratorSet,
    x: &CVector,
    tol: f64,
) -> Result<(MembershipCertificate, DualCertificate)> {
    x.check_dim(g.dim())?;
    g.solver(tol)?.solve(x)
}

/// Assignment of distinct coordinates to points of `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjointCoordCertificate {
    /// `(point index, coordinate index)`.
    pub pairs: Vec<(usize, usize)>,
    pub p: Exponent,
    pub value: f64,
}

impl DisjointCoordCertificate {
    /// Recompute the value from `K`, rejecting repeated coordinates.
    pub fn evaluate(&self, k: &[CVector]) -> Result<f64> {
        let mut seen = std::collections::BTreeSet::new();
        let mut mags = Vec::with_capacity(self.pairs.len());
        for &(i, c) in &self.pairs {
            let pt = k.get(i).ok_or(Error::IndexOutOfRange { index: i, max: k.len().saturating_sub(1) })?;
            if c >= pt.dim() {
                return Err(Error::IndexOutOfRange { index: c, max: pt.dim().saturating_sub(1) });
            }
            if !seen.insert(c) {
                return Err(Error::InvalidCertificate(format!("coordinate {c} used twice")));
            }
            mags.push(pt[c].norm());
        }
        Ok(lp_norm_of_magnitudes(mags, self.p))
    }
}

/// Best disjoint-coordinate certificate: each coordinate goes to the point of
/// `K` where it is largest.
pub fn best_disjoint_certificate(k: &[CVector], p: Exponent) -> DisjointCoordCertificate {
    let dim = k.iter().map(|x| x.dim()).max().unwrap_or(0);
    let mut pairs = Vec::new();
    let mut mags = Vec::new();
    for c in 0..dim {
        let mut best: Option<(usize, f64)> = None;
        for (i, x) in k.iter().enumerate() {
            if c < x.dim() {
                let m = x[c].norm();
                if m > 0.0 && best.is_none_or(|(_, b)| m > b) {
                    best = Some((i, m));
                }
            }
        }
        if let Some((i, m)) = best {
            pairs.push((i, c));
            mags.push(m);
        }
    }
    let value = lp_norm_of_magnitudes(mags, p);
    DisjointCoordCertificate { pairs, p, value }
}

/// Lower bound on `m_p(K)` from a disjoint-coordinate certificate. Any covering
/// sequence satisfies `|k[c]| ≤ (Σ_n |x_n[c]|^p)^{1/p}` by Hölder, and summing
/// over distinct coordinates gives `value ≤ ‖(x_n)‖`.
pub fn mp_lower_disjoint(k: &[CVector], cert: &DisjointCoordCertificate) -> Result<f64> {
    let v = cert.evaluate(k)?;
    if (v - cert.value).abs() > 1e-9 * v.max(1.0) {
        return Err(Error::InvalidCertificate(format!(
            "declared value {} does not match recomputed {}",
            cert.value, v
        )));
    }
    Ok(v)
}

/// Sparse coefficients representing one point, with the recorded numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub coeffs: Vec<(usize, [f64; 2])>,
    pub residual: f64,
    pub q_norm: f64,
}

impl Coverage {
    pub fn from_dense(alpha: &[C64], residual: f64, q_norm: f64) -> Self {
        let coeffs = alpha.iter().enumerate().filter(|(_, a)| a.norm() > 0.0).map(|(i, a)| (i, [a.re, a.im])).collect();
        Coverage { coeffs, residual, q_norm }
    }

    pub fn coefficients(&self) -> Vec<(usize, C64)> {
        self.coeffs.iter().map(|&(i, [re, im])| (i, C64::new(re, im))).collect()
    }
}

/// Upper witness: every listed point lies in `p-co(generators)`, so
/// `m_p(points) ≤ value = ‖generators‖`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperWitness {
    pub generators: GeneratorSet,
    pub coverage: Vec<Coverage>,
    pub value: f64,
}

impl UpperWitness {
    /// Independent re-check: recompute every residual and coefficient norm
    /// from the stored coefficients, without calling any solver.
    pub fn verify(&self, points: &[CVector], tol: f64) -> Result<f64> {
        if points.len() != self.coverage.len() {
            return Err(Error::DimensionMismatch { expected: self.coverage.len(), got: points.len() });
        }
        let q = self.generators.q();
        for (i, (x, cov)) in points.iter().zip(&self.coverage).enumerate() {
            let coeffs = cov.coefficients();
            let recon = self.generators.combine(&coeffs)?;
            let residual = (&recon - x).norm2();
            let qn = lp_norm_of_magnitudes(coeffs.iter().map(|(_, a)| a.norm()), q);
            if residual > tol * x.norm2().max(1.0) || qn > 1.0 + tol {
                return Err(Error::NotCovered { index: i, norm: qn });
            }
        }
        let v = self.generators.norm();
        if (v - self.value).abs() > 1e-12 * v.max(1.0) {
            return Err(Error::InvalidCertificate(format!(
                "declared value {} but generators have norm {v}",
                self.value
            )));
        }
        Ok(v)
    }
}

/// Lower witness: a finite set of points and a disjoint-coordinate certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerWitness {
    pub points: Vec<CVector>,
    pub cert: DisjointCoordCertificate,
}

impl LowerWitness {
    pub fn from_points(points: Vec<CVector>, p: Exponent) -> Self {
        // keep only the points the certificate actually uses
        let full = best_disjoint_certificate(&points, p);
        let mut used: Vec<usize> = full.pairs.iter().map(|&(i, _)| i).collect();
        used.sort_unstable();
        used.dedup();
        let pairs = full.pairs.iter().map(|&(i, c)| (used.binary_search(&i).expect("used point"), c)).collect();
        let points = used.iter().map(|&i| points[i].clone()).collect();
        LowerWitness { points, cert: DisjointCoordCertificate { pairs, p, value: full.value } }
    }

    pub fn value(&self) -> f64 {
        self.cert.value
    }

    pub fn verify(&self) -> Result<f64> {
        mp_lower_disjoint(&self.points, &self.cert)
    }
}

/// Certified interval `[lower, upper]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
    pub lower_witness: LowerWitness,
    pub upper_witness: UpperWitness,
}

impl BoundPair {
    pub fn new(lower_witness: LowerWitness, upper_witness: UpperWitness) -> Self {
        BoundPair { lower: lower_witness.value(), upper: upper_witness.value, lower_witness, upper_witness }
    }

    pub fn is_consistent(&self, tol: f64) -> bool {
        self.lower <= self.upper + tol * self.upper.max(1.0)
    }

    pub fn gap_ratio(&self) -> f64 {
        if self.lower > 0.0 {
            self.upper / self.lower
        } else if self.upper == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    }
}

/// Certify that `G` covers every point of `K`; the bound is `‖G‖`.
pub fn mp_upper(k: &[CVector], g: &GeneratorSet, tol: f64) -> Result<UpperWitness> {
    let solver = g.solver(tol)?;
    let mut coverage = Vec::with_capacity(k.len());
    for (i, x) in k.iter().enumerate() {
        let m = solve_primal(&solver, x).map_err(|e| match e {
            Error::Infeasible { .. } => Error::NotCovered { index: i, norm: f64::INFINITY },
            e => e,
        })?;
        if !m.certifies(tol * x.norm2().max(1.0)) {
            return Err(Error::NotCovered { index: i, norm: m.alpha_q_norm });
        }
        coverage.push(Coverage::from_dense(&m.alpha, m.residual, m.alpha_q_norm));
    }
    Ok(UpperWitness { generators: g.clone(), coverage, value: g.norm() })
}

/// Rescale `G` by `s = max_k min-norm(k)` so that it covers `K`; the bound is
/// `s·‖G‖`.
pub fn mp_upper_scaled(k: &[CVector], g: &GeneratorSet, tol: f64) -> Result<UpperWitness> {
    let solver = g.solver(tol)?;
    let mut certs = Vec::with_capacity(k.len());
    let mut s = 0.0f64;
    for (i, x) in k.iter().enumerate() {
        let m = solve_primal(&solver, x).map_err(|e| match e {
            Error::Infeasible { .. } => Error::NotCovered { index: i, norm: f64::INFINITY },
            e => e,
        })?;
        s = s.max(m.alpha_q_norm);
        certs.push(m);
    }
    if s == 0.0 {
        // every point is zero; a single zero generator covers it
        let zero = GeneratorSet { p: g.p, gens: vec![CVector::zeros(g.dim())] };
        let coverage = certs.iter().map(|m| Coverage { coeffs: vec![], residual: m.residual, q_norm: 0.0 }).collect();
        return Ok(UpperWitness { generators: zero, coverage, value: 0.0 });
    }
    let gs = g.scaled(s);
    let coverage = certs
        .iter()
        .map(|m| {
            let a: Vec<C64> = m.alpha.iter().map(|z| z / s).collect();
            Coverage::from_dense(&a, m.residual, m.alpha_q_norm / s)
        })
        .collect();
    let value = gs.norm();
    Ok(UpperWitness { generators: gs, coverage, value })
}

/// Primal part of a solve; an unconverged solve still yields a feasible primal.
pub(crate) fn solve_primal(solver: &MinNormSolver, x: &CVector) -> Result<MembershipCertificate> {
    match solver.solve(x) {
        Ok((m, _)) => Ok(m),
        Err(Error::NoConvergence(b)) => Ok(b.0),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpcore::c64;

    fn e(d: usize, i: usize) -> CVector {
        CVector::basis(d, i)
    }

    #[test]
    fn singleton_upper_is_norm() {
        let y = CVector::from_real(&[1.0, -2.0, 2.0]);
        let g = GeneratorSet::new(vec![y.clone()], Exponent::Finite(2.0)).unwrap();
        let w = mp_upper(std::slice::from_ref(&y), &g, 1e-9).unwrap();
        assert!((w.value - 3.0).abs() < 1e-12);
        w.verify(&[y], 1e-9).unwrap();
    }

    #[test]
    fn signed_basis_points() {
        let p = Exponent::Finite(2.0);
        let k = vec![e(2, 0), e(2, 0).scale_real(-1.0), e(2, 1), e(2, 1).scale_real(-1.0)];
        let g = GeneratorSet::new(vec![e(2, 0), e(2, 1)], p).unwrap();
        let w = mp_upper(&k, &g, 1e-9).unwrap();
        assert!((w.value - 2f64.sqrt()).abs() < 1e-12);
        let lower = LowerWitness::from_points(k, p);
        assert!((lower.value() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn not_covered_reports_index() {
        let p = Exponent::Finite(2.0);
        let g = GeneratorSet::new(vec![e(2, 0)], p).unwrap();
        let k = vec![e(2, 0).scale_real(0.5), e(2, 0).scale_real(3.0)];
        match mp_upper(&k, &g, 1e-9) {
            Err(Error::NotCovered { index, norm }) => {
                assert_eq!(index, 1);
                assert!((norm - 3.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn disjoint_certificates() {
        let p = Exponent::Finite(2.0);
        let k = vec![e(4, 1), e(4, 2)];
        let cert = DisjointCoordCertificate { pairs: vec![(0, 1), (1, 2)], p, value: 2f64.sqrt() };
        assert!((mp_lower_disjoint(&k, &cert).unwrap() - 2f64.sqrt()).abs() < 1e-15);

        let y = CVector::from_real(&[0.5, -3.0, 1.0]);
        let cert = DisjointCoordCertificate { pairs: vec![(0, 1)], p, value: 3.0 };
        assert_eq!(mp_lower_disjoint(&[y], &cert).unwrap(), 3.0);

        let k = vec![e(2, 0), e(2, 0)];
        let bad = DisjointCoordCertificate { pairs: vec![(0, 0), (1, 0)], p, value: 2f64.sqrt() };
        assert!(matches!(mp_lower_disjoint(&k, &bad), Err(Error::InvalidCertificate(_))));
        assert_eq!(best_disjoint_certificate(&k, p).value, 1.0);
    }

    #[test]
    fn dual_value_recomputes() {
        let p = Exponent::Finite(3.0);
        let g = GeneratorSet::new(
            vec![
                CVector::new(vec![c64(1.0, 0.5), c64(0.0, 1.0)]),
                CVector::from_real(&[2.0, 1.0]),
                CVector::from_real(&[0.0, 1.0]),
            ],
            p,
        )
        .unwrap();
        let x = CVector::new(vec![c64(0.2, 0.1), c64(-0.3, 0.4)]);
        let (m, d) = min_norm_representation(&g, &x, 1e-9).unwrap();
        let v = d.verified_value(&g, &x).unwrap();
        assert!(v <= m.alpha_q_norm + 1e-12);
        assert!(m.alpha_q_norm - v < 1e-7);
    }

    #[test]
    fn scaled_witness_covers() {
        let p = Exponent::Finite(2.0);
        let k = vec![CVector::from_real(&[3.0, 0.0]), CVector::from_real(&[0.0, -1.0])];
        let g = GeneratorSet::new(vec![e(2, 0), e(2, 1)], p).unwrap();
        let w = mp_upper_scaled(&k, &g, 1e-9).unwrap();
        assert!((w.value - 3.0 * 2f64.sqrt()).abs() < 1e-12);
        w.verify(&k, 1e-9).unwrap();
    }
}
