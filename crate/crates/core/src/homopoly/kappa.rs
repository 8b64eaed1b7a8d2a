//! Certified two-sided bounds on `κ_p(P) = m_p(P(B_E))`.
//!
//! Upper side: write `P(x) = Σ_μ (m!/μ!) x^μ · v_μ` with `v_μ = (μ!/m!) c_μ`.
//! On `B_{ℓ_1}` the weights `(m!/μ!) x^μ` have `ℓ_1` norm at most `‖x‖_1^m ≤ 1`,
//! so any generator set covering the columns `v_μ` with a coefficient matrix
//! `C` covers `P(B_E)` after scaling by `‖C‖_{ℓ_1 → ℓ_q}`. Other domain norms
//! pay the comparison constant `n^{m(1-1/r)}`; linear maps use `‖C‖_{ℓ_r → ℓ_q}`
//! directly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpcore::{lp_norm_of_magnitudes, CVector, Exponent, C64, DEFAULT_TOL};
use crate::pconvex::{
    best_disjoint_certificate, mp_upper, mp_upper_search, Coverage, GeneratorSet, LowerWitness, SearchOptions,
    UpperWitness,
};

use super::{binomial, factorial, monomials, FamilyKind, FamilyTag, HomPolynomial, Monomial};

#[derive(Clone, Debug)]
pub struct ProbeOptions {
    /// Random points on the unit sphere of the domain.
    pub samples: usize,
    /// All pairs `(e_i ± e_j)` are used up to this dimension, a random
    /// selection above it.
    pub all_pairs_up_to: usize,
    pub seed: u64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions { samples: 512, all_pairs_up_to: 24, seed: 0x5eed }
    }
}

#[derive(Clone, Debug, Default)]
pub struct KappaOptions {
    pub probes: ProbeOptions,
    pub search: SearchOptions,
}

fn normalized(v: CVector, norm: Exponent) -> CVector {
    let n = v.norm(norm);
    if n > 0.0 {
        v.scale_real(1.0 / n)
    } else {
        v
    }
}

fn pair_vector(dim: usize, i: usize, j: usize, sign: f64, norm: Exponent) -> CVector {
    let mut v = CVector::basis(dim, i);
    v[j] = C64::new(sign, 0.0);
    normalized(v, norm)
}

/// Unit-sphere probes of `(C^dim, ‖·‖_norm)`: signed basis vectors, the
/// normalized pairs `e_i ± e_j` and seeded random samples.
pub fn probe_set(dim: usize, norm: Exponent, opts: &ProbeOptions) -> Vec<CVector> {
    let mut out = Vec::new();
    for i in 0..dim {
        out.push(CVector::basis(dim, i));
        out.push(CVector::basis(dim, i).scale_real(-1.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    if dim <= opts.all_pairs_up_to {
        for i in 0..dim {
            for j in i + 1..dim {
                out.push(pair_vector(dim, i, j, 1.0, norm));
                out.push(pair_vector(dim, i, j, -1.0, norm));
            }
        }
    } else if dim > 1 {
        for _ in 0..(4 * dim).min(2000) {
            let i = rng.random_range(0..dim);
            let mut j = rng.random_range(0..dim - 1);
            if j >= i {
                j += 1;
            }
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            out.push(pair_vector(dim, i, j, sign, norm));
        }
    }
    for _ in 0..opts.samples {
        let v = CVector::new(
            (0..dim)
                .map(|_| C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)))
                .collect(),
        );
        if !v.is_zero() {
            out.push(normalized(v, norm));
        }
    }
    out
}

/// Lower bound from the images of `probes`: a disjoint-coordinate certificate
/// on `P(probes) ⊂ P(B_E)`. Returns the witness and the probes it uses.
pub fn kappa_lower(p: &HomPolynomial, exp: Exponent, probes: &[CVector]) -> Result<(LowerWitness, Vec<CVector>)> {
    let images: Vec<CVector> = probes.iter().map(|x| p.eval(x)).collect::<Result<_>>()?;
    let full = best_disjoint_certificate(&images, exp);
    let mut used: Vec<usize> = full.pairs.iter().map(|&(i, _)| i).collect();
    used.sort_unstable();
    used.dedup();
    let witness = LowerWitness::from_points(images, exp);
    Ok((witness, used.iter().map(|&i| probes[i].clone()).collect()))
}

/// Columns `v_μ = (μ!/m!) c_μ` over the support of `P`.
pub fn support_columns(p: &HomPolynomial) -> (Vec<Monomial>, Vec<CVector>) {
    let mut monos: Vec<Monomial> = Vec::new();
    let mut cols: Vec<CVector> = Vec::new();
    let mf = factorial(p.degree());
    let mut index = std::collections::HashMap::new();
    for (o, mono, c) in p.terms() {
        let k = *index.entry(mono.clone()).or_insert_with(|| {
            monos.push(mono.clone());
            cols.push(CVector::zeros(p.cod()));
            cols.len() - 1
        });
        cols[k][o] += c * (mono.factorial() / mf);
    }
    (monos, cols)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpperRule {
    /// Analytic generators for a recognized example family.
    Family,
    /// Generators found by search over the support columns.
    Columns,
}

/// Upper certificate: `witness` covers the support columns; `P(B_E)` lies in
/// `p-co(inflation · generators)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaUpper {
    pub witness: UpperWitness,
    pub inflation: f64,
    pub value: f64,
    pub rule: UpperRule,
}

impl KappaUpper {
    /// Generators whose p-convex hull contains `P(B_E)`.
    pub fn hull_generators(&self) -> GeneratorSet {
        self.witness.generators.scaled(self.inflation)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaBound {
    pub p: Exponent,
    pub lower: f64,
    pub upper: f64,
    pub lower_witness: LowerWitness,
    /// Domain points whose images are `lower_witness.points`.
    pub lower_probes: Vec<CVector>,
    pub upper_witness: KappaUpper,
    pub sample_budget: usize,
    /// Set when `upper > 10 · lower`.
    pub loose: bool,
}

impl KappaBound {
    pub fn gap_ratio(&self) -> f64 {
        if self.lower > 0.0 {
            self.upper / self.lower
        } else if self.upper == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    }

    /// Re-derive both bounds from `P` and the stored witnesses.
    pub fn verify(&self, poly: &HomPolynomial, tol: f64) -> Result<(f64, f64)> {
        if self.lower_probes.len() != self.lower_witness.points.len() {
            return Err(Error::InvalidCertificate("probe list does not match the lower witness".into()));
        }
        for (x, y) in self.lower_probes.iter().zip(&self.lower_witness.points) {
            if x.norm(poly.dom_norm) > 1.0 + tol {
                return Err(Error::InvalidCertificate("probe outside the unit ball".into()));
            }
            if (&poly.eval(x)? - y).norm2() > tol * y.norm2().max(1.0) {
                return Err(Error::InvalidCertificate("lower witness point is not an image point".into()));
            }
        }
        let lower = self.lower_witness.verify()?;
        if self.lower > lower * (1.0 + 1e-12) {
            return Err(Error::InvalidCertificate(format!("declared lower {} but witness gives {lower}", self.lower)));
        }
        let (_, cols) = support_columns(poly);
        let w = &self.upper_witness;
        let g = w.witness.verify(&cols, tol)?;
        let needed = inflation(poly, &w.witness, self.p);
        if needed > w.inflation * (1.0 + tol) {
            return Err(Error::InvalidCertificate(format!(
                "coefficient operator norm {needed} exceeds the declared inflation {}",
                w.inflation
            )));
        }
        let value = w.inflation * g;
        for declared in [w.value, self.upper] {
            if (value - declared).abs() > 1e-12 * value.max(1.0) {
                return Err(Error::InvalidCertificate(format!(
                    "declared upper {declared} but certificate gives {value}"
                )));
            }
        }
        Ok((lower, value))
    }
}

/// Upper bound on `‖C‖_{ℓ_r → ℓ_q}` for the coefficient matrix whose columns
/// are the coverage coefficients. Exact for `r = 1`, `q = ∞`, and `r = q = 2`.
pub fn coefficient_opnorm(cov: &[Coverage], rows: usize, r: Exponent, q: Exponent) -> f64 {
    if cov.is_empty() {
        return 0.0;
    }
    let col_q = |c: &Coverage| lp_norm_of_magnitudes(c.coeffs.iter().map(|(_, [re, im])| re.hypot(*im)), q);
    let max_col = cov.iter().map(col_q).fold(0.0, f64::max);
    if r == Exponent::Finite(1.0) {
        return max_col;
    }
    let mut row_vals: Vec<Vec<f64>> = vec![Vec::new(); rows];
    for c in cov {
        for &(i, [re, im]) in &c.coeffs {
            row_vals[i].push(re.hypot(im));
        }
    }
    let rp = r.conjugate();
    let row_norms: Vec<f64> = row_vals.iter().map(|v| lp_norm_of_magnitudes(v.iter().copied(), rp)).collect();
    let by_rows = lp_norm_of_magnitudes(row_norms.iter().copied(), q);
    if q.is_inf() {
        return by_rows;
    }
    let by_cols = max_col * (cov.len() as f64).powf(1.0 - r.recip());
    let mut best = by_rows.min(by_cols);
    if r == Exponent::Finite(2.0) && q == Exponent::Finite(2.0) {
        let mut m = nalgebra::DMatrix::<C64>::zeros(rows, cov.len());
        for (j, c) in cov.iter().enumerate() {
            for &(i, [re, im]) in &c.coeffs {
                m[(i, j)] = C64::new(re, im);
            }
        }
        let s = m.singular_values().iter().copied().fold(0.0, f64::max);
        best = best.min(s * (1.0 + 1e-12));
    }
    best
}

pub(crate) fn inflation(poly: &HomPolynomial, w: &UpperWitness, p: Exponent) -> f64 {
    let m = poly.degree();
    let r = poly.dom_norm;
    let q = p.conjugate();
    let lift = if m == 1 { r } else { Exponent::Finite(1.0) };
    let base = coefficient_opnorm(&w.coverage, w.generators.len(), lift, q);
    let comparison =
        if m >= 2 && r != Exponent::Finite(1.0) { (poly.dom() as f64).powf(m as f64 * (1.0 - r.recip())) } else { 1.0 };
    base * comparison
}

fn zero_witness(dim: usize, p: Exponent) -> UpperWitness {
    UpperWitness { generators: GeneratorSet { p, gens: vec![CVector::zeros(dim)] }, coverage: vec![], value: 0.0 }
}

fn family_probes(tag: &FamilyTag, dom: usize) -> Vec<CVector> {
    let block = tag.block_start..(tag.block_start + tag.block_len).min(dom);
    match tag.kind {
        FamilyKind::A => block.map(|j| CVector::basis(dom, j)).collect(),
        FamilyKind::B => {
            let eps = (2.0 / tag.m as f64).min(1.0);
            block
                .map(|j| {
                    let mut x = CVector::basis(dom, j).scale_real(eps);
                    x[0] += C64::new(1.0 - eps, 0.0);
                    x
                })
                .collect()
        }
    }
}

fn family_generators(tag: &FamilyTag, cod: usize) -> Result<GeneratorSet> {
    let m = tag.m as f64;
    let c = match tag.kind {
        FamilyKind::A => (m.powf(m / 2.0) / factorial(tag.m)).powf(tag.p.recip()),
        FamilyKind::B => (1.0 / factorial(tag.m)).powf(tag.p.recip()),
    };
    let block = tag.block_start..tag.block_start + tag.block_len;
    GeneratorSet::new(block.map(|j| CVector::basis(cod, j).scale_real(c)).collect(), tag.p)
}

fn family_applies(poly: &HomPolynomial, p: Exponent) -> Option<&FamilyTag> {
    poly.family.as_ref().filter(|t| {
        t.p == p
            && t.m == poly.degree()
            && t.m >= 1
            && poly.dom_norm == Exponent::Finite(1.0)
            && t.block_start + t.block_len <= poly.cod()
            && t.block_len > 0
    })
}

/// Certified `[lower, upper]` for `κ_p(P)`.
pub fn kappa_bounds(poly: &HomPolynomial, p: Exponent, opts: &KappaOptions) -> Result<KappaBound> {
    if p.is_inf() {
        return Err(Error::InvalidArgument("κ_p needs a finite exponent".into()));
    }
    let tag = family_applies(poly, p);
    let mut probes = probe_set(poly.dom(), poly.dom_norm, &opts.probes);
    if let Some(t) = tag {
        probes.extend(family_probes(t, poly.dom()));
    }
    let (lower_witness, lower_probes) = kappa_lower(poly, p, &probes)?;
    let lower = lower_witness.value();
    let (_, cols) = support_columns(poly);
    let q = p.conjugate();
    let upper_witness = if cols.is_empty() {
        KappaUpper { witness: zero_witness(poly.cod(), p), inflation: 0.0, value: 0.0, rule: UpperRule::Columns }
    } else if let Some(t) = tag {
        // analytic generators; the coverage is still certified by the solver
        let g = family_generators(t, poly.cod())?;
        let witness = mp_upper(&cols, &g, DEFAULT_TOL)?;
        let c = coefficient_opnorm(&witness.coverage, g.len(), Exponent::Finite(1.0), q);
        if c > 1.0 + 1e-9 {
            return Err(Error::InvalidCertificate(format!("family coefficients have norm {c} above 1")));
        }
        let value = g.norm();
        KappaUpper { witness, inflation: 1.0, value, rule: UpperRule::Family }
    } else {
        let search = SearchOptions { lower_hint: Some(lower), ..opts.search.clone() };
        let witness = mp_upper_search(&cols, p, &search)?;
        let infl = inflation(poly, &witness, p);
        let value = infl * witness.value;
        KappaUpper { witness, inflation: infl, value, rule: UpperRule::Columns }
    };
    let upper = upper_witness.value;
    let loose = upper > 10.0 * lower;
    Ok(KappaBound {
        p,
        lower,
        upper,
        lower_witness,
        lower_probes,
        upper_witness,
        sample_budget: opts.probes.samples,
        loose,
    })
}

/// Matrix of `L_P` on the monomial basis of the symmetric power:
/// `L_P(x^m) = P(x)` with the lift `x ↦ (x^μ)_μ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Linearization {
    pub basis: Vec<Monomial>,
    /// One column of length `cod` per basis monomial.
    pub columns: Vec<CVector>,
}

impl Linearization {
    pub fn lift(&self, x: &CVector) -> CVector {
        CVector::new(self.basis.iter().map(|m| m.eval(x.coords())).collect())
    }

    pub fn apply(&self, z: &CVector) -> Result<CVector> {
        z.check_dim(self.basis.len())?;
        let cod = self.columns.first().map_or(0, |c| c.dim());
        let mut out = CVector::zeros(cod);
        for (c, &zk) in self.columns.iter().zip(z.coords()) {
            out.axpy(zk, c);
        }
        Ok(out)
    }
}

pub fn linearize(poly: &HomPolynomial, cap: usize) -> Result<Linearization> {
    let m = poly.degree();
    let needed = binomial(poly.dom() + m.max(1) - 1, m);
    if needed > cap as f64 {
        return Err(Error::DimensionCap { needed: needed.min(usize::MAX as f64) as usize, cap });
    }
    let basis = monomials(poly.dom(), m);
    let columns =
        basis.iter().map(|mono| CVector::new((0..poly.cod()).map(|o| poly.coefficient(o, mono)).collect())).collect();
    Ok(Linearization { basis, columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpcore::c64;

    #[test]
    fn rank_one_is_exact() {
        let a = CVector::from_real(&[0.5, -2.0, 1.0]);
        let y = CVector::from_real(&[1.0, 2.0]);
        let p = Exponent::Finite(2.0);
        for m in 1..=3 {
            let poly = HomPolynomial::rank_one(&a, m, &y).unwrap();
            let b = kappa_bounds(&poly, p, &KappaOptions::default()).unwrap();
            let exact = 2f64.powi(m as i32) * 5f64.sqrt();
            assert!((b.lower - exact).abs() < 1e-9 * exact, "m={m} lower {}", b.lower);
            assert!((b.upper - exact).abs() < 1e-9 * exact, "m={m} upper {}", b.upper);
            b.verify(&poly, 1e-8).unwrap();
        }
    }

    #[test]
    fn diagonal_quadratic() {
        let p = Exponent::Finite(2.0);
        let poly = HomPolynomial::from_terms(
            2,
            2,
            2,
            [(0, Monomial::var(0, 2), c64(3.0, 0.0)), (1, Monomial::var(1, 2), c64(4.0, 0.0))],
        )
        .unwrap();
        let b = kappa_bounds(&poly, p, &KappaOptions::default()).unwrap();
        assert!((b.lower - 5.0).abs() < 1e-9 && (b.upper - 5.0).abs() < 1e-9);
    }

    #[test]
    fn zero_polynomial_has_zero_bounds() {
        let b = kappa_bounds(&HomPolynomial::zero(2, 3, 2), Exponent::Finite(1.5), &KappaOptions::default()).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
    }

    #[test]
    fn euclidean_domain_uses_spectral_norm() {
        let p = Exponent::Finite(2.0);
        let cols = vec![CVector::from_real(&[1.0, 1.0]), CVector::from_real(&[1.0, -1.0])];
        let t = HomPolynomial::linear(&cols, 2).unwrap().with_dom_norm(Exponent::Finite(2.0));
        let b = kappa_bounds(&t, p, &KappaOptions::default()).unwrap();
        assert!(b.lower <= b.upper + 1e-12);
        b.verify(&t, 1e-8).unwrap();
    }

    #[test]
    fn corrupted_upper_is_rejected() {
        let poly = HomPolynomial::rank_one(&CVector::from_real(&[1.0, 1.0]), 2, &CVector::from_real(&[1.0])).unwrap();
        let mut b = kappa_bounds(&poly, Exponent::Finite(2.0), &KappaOptions::default()).unwrap();
        b.upper_witness.witness.generators.gens[0] = b.upper_witness.witness.generators.gens[0].scale_real(0.5);
        assert!(b.verify(&poly, 1e-8).is_err());
    }

    #[test]
    fn linearization_shape_and_contract() {
        let poly = HomPolynomial::from_terms(2, 2, 1, [(0, Monomial::var(0, 2), c64(1.0, 0.0))]).unwrap();
        let l = linearize(&poly, 100).unwrap();
        assert_eq!(l.basis.len(), 3);
        assert_eq!(l.columns[0][0], c64(1.0, 0.0));
        assert!(l.columns[1].is_zero() && l.columns[2].is_zero());
        let x = CVector::from_real(&[0.3, -0.8]);
        assert!((&l.apply(&l.lift(&x)).unwrap() - &poly.eval(&x).unwrap()).norm2() < 1e-15);
        assert!(matches!(linearize(&HomPolynomial::zero(4, 10, 1), 100), Err(Error::DimensionCap { .. })));
    }
}
