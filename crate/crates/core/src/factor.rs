//! Factorizations through quotients of `ℓ_q`.
//!
//! `T = θ̃_y ∘ T_y` where `θ_y(α) = Σ α_n y_n` and `T_y(x)` is the class of any
//! representation of `T(x)`; and the refinement `P = S ∘ R ∘ Q` for a p-compact
//! homogeneous polynomial with a diagonal `R` carrying all the compactness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homopoly::{coefficient_opnorm, kappa_bounds, probe_set, HomPolynomial, KappaOptions, ProbeOptions};
use crate::linalg::{CMat, Factorization};
use crate::lpcore::{complex_pairs, lp_norm_of_magnitudes, lp_norm_slice, CVector, Exponent, TailedSequence, C64};
use crate::pconvex::{
    beta_construct_lp, BetaConstruction, BetaOptions, Coverage, DualCertificate, GeneratorSet, MembershipCertificate,
    MinNormSolver,
};

/// Reconstruction tolerance for `T = θ̃_y ∘ T_y`.
pub const SK_RESIDUAL_TOL: f64 = 1e-9;
/// Reconstruction tolerance for `P = S ∘ R ∘ Q`.
pub const CK_RESIDUAL_TOL: f64 = 1e-8;

/// Accept the primal of a stalled solve: it is still feasible.
fn solve_lenient(solver: &MinNormSolver, x: &CVector) -> Result<(MembershipCertificate, DualCertificate)> {
    match solver.solve(x) {
        Ok(r) => Ok(r),
        Err(Error::NoConvergence(b)) => Ok(*b),
        Err(e) => Err(e),
    }
}

fn relative(err: f64, scale: f64) -> f64 {
    err / scale.max(1.0)
}

/// `θ_y: ℓ_q → F`, `e_n ↦ y_n`, with an orthonormal basis of its kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaOperator {
    pub y: GeneratorSet,
    pub kernel_basis: Vec<CVector>,
}

impl ThetaOperator {
    pub fn new(y: GeneratorSet) -> Self {
        let (d, n) = (y.dim(), y.len());
        let mut a = CMat::zeros(d, n);
        for (j, g) in y.gens.iter().enumerate() {
            for (i, &z) in g.coords().iter().enumerate() {
                a[(i, j)] = z;
            }
        }
        let f = Factorization::new(&a);
        let kernel_basis = f.kernel.column_iter().map(|c| CVector::new(c.iter().copied().collect())).collect();
        ThetaOperator { y, kernel_basis }
    }

    pub fn q(&self) -> Exponent {
        self.y.q()
    }

    pub fn apply(&self, alpha: &[C64]) -> Result<CVector> {
        if alpha.len() != self.y.len() {
            return Err(Error::DimensionMismatch { expected: self.y.len(), got: alpha.len() });
        }
        let mut out = CVector::zeros(self.y.dim());
        for (a, g) in alpha.iter().zip(&self.y.gens) {
            out.axpy(*a, g);
        }
        Ok(out)
    }

    /// Hölder: `‖Σ α_n y_n‖_p ≤ ‖α‖_q ‖y‖`, so `‖θ̃_y‖ ≤ ‖θ_y‖ ≤ ‖y‖`.
    pub fn norm_upper(&self) -> f64 {
        self.y.norm()
    }

    /// The class of `θ_y^{-1}(x)` with its minimum-norm representative.
    pub fn class_of(&self, x: &CVector, solver: &MinNormSolver) -> Result<QuotientPoint> {
        let (mc, dc) = solve_lenient(solver, x)?;
        if mc.residual > SK_RESIDUAL_TOL * x.norm2().max(1.0) {
            return Err(Error::Infeasible { residual: mc.residual });
        }
        let lower = dc.verified_value(&self.y, x)?.max(0.0);
        Ok(QuotientPoint { quotient_norm: mc.alpha_q_norm, lower, representative: mc.alpha })
    }

    /// Re-derive the quotient norm of `point` from its representative alone.
    pub fn recompute(&self, point: &QuotientPoint, tol: f64) -> Result<QuotientPoint> {
        let x = self.apply(&point.representative)?;
        self.class_of(&x, &self.y.solver(tol)?)
    }
}

/// A class `[α] ∈ ℓ_q / ker θ_y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientPoint {
    #[serde(with = "complex_pairs")]
    pub representative: Vec<C64>,
    /// `‖representative‖_q`, an upper bound on the distance to the kernel.
    pub quotient_norm: f64,
    /// Dual lower bound on the same distance.
    pub lower: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinhaKarnReport {
    pub probes: usize,
    pub kernel_dim: usize,
    /// Largest `‖T(x) − θ̃_y(T_y x)‖ / max(1, ‖T x‖)` over the probes.
    pub max_residual: f64,
    /// Largest `‖T_y x‖ / ‖x‖` over the probes (a lower estimate of `‖T_y‖`).
    pub ty_norm_probe: f64,
    /// `‖C‖_{E → ℓ_q}` for the coefficient matrix of the columns of `T`.
    pub ty_norm_upper: f64,
    pub theta_norm_upper: f64,
    pub reconstruction_ok: bool,
    pub contraction_ok: bool,
}

impl SinhaKarnReport {
    pub fn valid(&self) -> bool {
        self.reconstruction_ok && self.contraction_ok
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinhaKarn {
    pub theta: ThetaOperator,
    /// `T e_i`.
    pub columns: Vec<CVector>,
    pub dom_norm: Exponent,
    /// Coefficients of each column in the generators.
    pub coverage: Vec<Coverage>,
    pub report: SinhaKarnReport,
    #[serde(skip)]
    tol: f64,
}

impl SinhaKarn {
    pub fn apply_t(&self, x: &CVector) -> Result<CVector> {
        x.check_dim(self.columns.len())?;
        let mut out = CVector::zeros(self.theta.y.dim());
        for (c, &xi) in self.columns.iter().zip(x.coords()) {
            out.axpy(xi, c);
        }
        Ok(out)
    }

    /// `T_y(x)`: the minimum-norm class of `T(x)`.
    pub fn t_y(&self, x: &CVector) -> Result<QuotientPoint> {
        let tx = self.apply_t(x)?;
        self.theta.class_of(&tx, &self.theta.y.solver(self.tol.max(1e-12))?)
    }
}

/// Factor `T` (columns `T e_i`, domain norm `dom_norm`) through `ℓ_q / ker θ_y`.
/// `y` must cover `T(B_E)`: the coefficient matrix of the columns has
/// `‖C‖_{E → ℓ_q} ≤ 1 + tol`.
pub fn sinha_karn(
    columns: &[CVector],
    dom_norm: Exponent,
    y: &GeneratorSet,
    probes: &ProbeOptions,
    tol: f64,
) -> Result<SinhaKarn> {
    if columns.is_empty() {
        return Err(Error::InvalidArgument("operator has no columns".into()));
    }
    for c in columns {
        c.check_dim(y.dim())?;
    }
    let theta = ThetaOperator::new(y.clone());
    let solver = y.solver(tol.max(1e-12))?;
    let q = y.q();
    let mut coverage = Vec::with_capacity(columns.len());
    for (i, c) in columns.iter().enumerate() {
        let (mc, _) = match solve_lenient(&solver, c) {
            Err(Error::Infeasible { .. }) => return Err(Error::NotCovered { index: i, norm: f64::INFINITY }),
            r => r?,
        };
        if mc.residual > SK_RESIDUAL_TOL * c.norm2().max(1.0) {
            return Err(Error::NotCovered { index: i, norm: f64::INFINITY });
        }
        coverage.push(Coverage::from_dense(&mc.alpha, mc.residual, mc.alpha_q_norm));
    }
    let ty_norm_upper = coefficient_opnorm(&coverage, y.len(), dom_norm, q);
    if ty_norm_upper > 1.0 + tol {
        let (index, worst) =
            coverage
                .iter()
                .enumerate()
                .map(|(i, c)| (i, c.q_norm))
                .fold((0, 0.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        return Err(Error::NotCovered { index, norm: worst.max(ty_norm_upper) });
    }

    let pts = probe_set(columns.len(), dom_norm, probes);
    let mut sk = SinhaKarn {
        theta,
        columns: columns.to_vec(),
        dom_norm,
        coverage,
        report: SinhaKarnReport {
            probes: pts.len(),
            kernel_dim: 0,
            max_residual: 0.0,
            ty_norm_probe: 0.0,
            ty_norm_upper,
            theta_norm_upper: y.norm(),
            reconstruction_ok: true,
            contraction_ok: true,
        },
        tol,
    };
    sk.report.kernel_dim = sk.theta.kernel_basis.len();
    for x in &pts {
        let tx = sk.apply_t(x)?;
        let cls = sk.theta.class_of(&tx, &solver)?;
        let back = sk.theta.apply(&cls.representative)?;
        let res = relative((&back - &tx).norm2(), tx.norm2());
        let xn = x.norm(dom_norm);
        sk.report.max_residual = sk.report.max_residual.max(res);
        if xn > 0.0 {
            sk.report.ty_norm_probe = sk.report.ty_norm_probe.max(cls.quotient_norm / xn);
        }
        if cls.quotient_norm > xn * (1.0 + tol) + 1e-12 {
            sk.report.contraction_ok = false;
        }
    }
    sk.report.reconstruction_ok = sk.report.max_residual <= SK_RESIDUAL_TOL;
    Ok(sk)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoiKimReport {
    pub p: Exponent,
    pub eps: f64,
    pub kappa_lower: f64,
    pub kappa_upper: f64,
    /// Certified `‖Q‖`.
    pub q_norm_upper: f64,
    /// Largest `‖Q(x)‖` over the probes.
    pub q_norm_probe: f64,
    /// `‖(‖y_n‖/β_n)_n‖_p ≥ κ_p(R)`.
    pub r_kappa_upper: f64,
    /// `max β_n ≥ ‖S‖`.
    pub s_norm_upper: f64,
    /// Largest `‖S z‖ / ‖z‖_{ℓ_1/M}` with `z = R(Q(x))` over the probes.
    pub s_norm_probe: f64,
    pub chain: f64,
    /// `chain − kappa_upper`; at most `2 eps` for a valid factorization.
    pub slack: f64,
    pub probes: usize,
    pub max_residual: f64,
    pub reconstruction_ok: bool,
    pub chain_ok: bool,
}

impl ChoiKimReport {
    pub fn valid(&self) -> bool {
        self.reconstruction_ok && self.chain_ok
    }
}

/// `P = S ∘ R ∘ Q` with
/// `Q: E → ℓ_q / ker θ_y`, `R[(α_n)] = [(α_n w_n)]` into `ℓ_1 / M`, and
/// `S[(γ_n)] = Σ γ_n s_n`, where `w_n = ‖y_n‖/β_n` and `s_n = y_n β_n/‖y_n‖`.
#[derive(Clone, Debug)]
pub struct ChoiKim {
    pub poly: HomPolynomial,
    pub theta: ThetaOperator,
    pub beta: BetaConstruction,
    pub weights: Vec<f64>,
    pub s_columns: GeneratorSet,
    pub report: ChoiKimReport,
    tol: f64,
}

/// Serializable view of the factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoiKimFactors {
    pub y: GeneratorSet,
    pub beta: Vec<f64>,
    pub weights: Vec<f64>,
    pub s_columns: Vec<CVector>,
    pub report: ChoiKimReport,
}

impl ChoiKim {
    pub fn factors(&self) -> ChoiKimFactors {
        ChoiKimFactors {
            y: self.theta.y.clone(),
            beta: self.beta.beta.clone(),
            weights: self.weights.clone(),
            s_columns: self.s_columns.gens.clone(),
            report: self.report.clone(),
        }
    }

    pub fn q(&self, x: &CVector) -> Result<QuotientPoint> {
        let px = self.poly.eval(x)?;
        self.theta.class_of(&px, &self.theta.y.solver(self.tol)?)
    }

    /// Representative of `R[α]` in `ℓ_1`.
    pub fn r(&self, alpha: &QuotientPoint) -> Result<Vec<C64>> {
        if alpha.representative.len() != self.weights.len() {
            return Err(Error::DimensionMismatch { expected: self.weights.len(), got: alpha.representative.len() });
        }
        Ok(alpha.representative.iter().zip(&self.weights).map(|(a, w)| a * *w).collect())
    }

    pub fn s(&self, gamma: &[C64]) -> Result<CVector> {
        if gamma.len() != self.s_columns.len() {
            return Err(Error::DimensionMismatch { expected: self.s_columns.len(), got: gamma.len() });
        }
        let mut out = CVector::zeros(self.s_columns.dim());
        for (g, c) in gamma.iter().zip(&self.s_columns.gens) {
            out.axpy(*g, c);
        }
        Ok(out)
    }

    /// `‖[γ]‖_{ℓ_1 / ker s}`.
    pub fn l1_quotient_norm(&self, gamma: &[C64]) -> Result<f64> {
        let z = self.s(gamma)?;
        let solver = MinNormSolver::new(self.s_columns.dim(), &self.s_columns.gens, Exponent::Finite(1.0), self.tol)?;
        Ok(solve_lenient(&solver, &z)?.0.alpha_q_norm)
    }
}

/// Build the three factors from the certified κ_p upper witness of `P`.
pub fn choi_kim(poly: &HomPolynomial, p: Exponent, eps: f64, opts: &KappaOptions, tol: f64) -> Result<ChoiKim> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let kb = kappa_bounds(poly, p, opts)?;
    let ku = &kb.upper_witness;
    let hull = ku.hull_generators();
    let keep: Vec<usize> = (0..hull.len()).filter(|&n| !hull.gens[n].is_zero()).collect();
    if keep.is_empty() {
        return Err(Error::ZeroGenerator(0));
    }
    let y = GeneratorSet::new(keep.iter().map(|&n| hull.gens[n].clone()).collect(), p)?;
    let q_norm_upper =
        if ku.inflation > 0.0 { crate::homopoly::coverage_inflation(poly, &ku.witness, p) / ku.inflation } else { 0.0 };

    let norms: Vec<f64> = y.gens.iter().map(|g| g.norm(p)).collect();
    let seq = TailedSequence::from_real(p, &norms, 0.0)?;
    let beta = beta_construct_lp(&seq, None, eps, &BetaOptions::default())?;
    let weights: Vec<f64> = norms.iter().zip(&beta.beta).map(|(n, b)| n / b).collect();
    let s_columns = GeneratorSet::new(
        y.gens.iter().zip(&norms).zip(&beta.beta).map(|((g, n), b)| g.scale_real(b / n)).collect(),
        p,
    )?;
    let r_kappa_upper = lp_norm_of_magnitudes(weights.iter().copied(), p);
    let s_norm_upper = beta.beta.iter().copied().fold(0.0, f64::max);
    let chain = s_norm_upper * r_kappa_upper * q_norm_upper;

    let tol = tol.max(1e-12);
    let mut ck = ChoiKim {
        poly: poly.clone(),
        theta: ThetaOperator::new(y),
        beta,
        weights,
        s_columns,
        report: ChoiKimReport {
            p,
            eps,
            kappa_lower: kb.lower,
            kappa_upper: kb.upper,
            q_norm_upper,
            q_norm_probe: 0.0,
            r_kappa_upper,
            s_norm_upper,
            s_norm_probe: 0.0,
            chain,
            slack: chain - kb.upper,
            probes: 0,
            max_residual: 0.0,
            reconstruction_ok: true,
            chain_ok: chain <= (kb.upper + 2.0 * eps) * (1.0 + 1e-12),
        },
        tol,
    };

    let pts = probe_set(poly.dom(), poly.dom_norm, &opts.probes);
    let y_solver = ck.theta.y.solver(tol)?;
    let s_solver = MinNormSolver::new(ck.s_columns.dim(), &ck.s_columns.gens, Exponent::Finite(1.0), tol)?;
    for x in &pts {
        let px = poly.eval(x)?;
        let alpha = ck.theta.class_of(&px, &y_solver)?;
        let gamma = ck.r(&alpha)?;
        let back = ck.s(&gamma)?;
        ck.report.max_residual = ck.report.max_residual.max(relative((&back - &px).norm2(), px.norm2()));
        let xn = x.norm(poly.dom_norm);
        if xn > 0.0 {
            ck.report.q_norm_probe = ck.report.q_norm_probe.max(alpha.quotient_norm / xn.powi(poly.degree() as i32));
        }
        if back.norm2() > 0.0 {
            let l1 = solve_lenient(&s_solver, &back)?.0.alpha_q_norm.min(lp_norm_slice(&gamma, Exponent::Finite(1.0)));
            if l1 > 0.0 {
                ck.report.s_norm_probe = ck.report.s_norm_probe.max(back.norm(p) / l1);
            }
        }
    }
    ck.report.probes = pts.len();
    ck.report.reconstruction_ok = ck.report.max_residual <= CK_RESIDUAL_TOL;
    Ok(ck)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterex::{build_example_b, DEFAULT_DIM_CAP};
    use crate::homopoly::FamilyKind;

    fn small_probes() -> ProbeOptions {
        ProbeOptions { samples: 64, ..ProbeOptions::default() }
    }

    #[test]
    fn identity_in_one_dimension() {
        let p = Exponent::Finite(2.0);
        let y = GeneratorSet::new(vec![CVector::from_real(&[1.0])], p).unwrap();
        let sk = sinha_karn(&[CVector::from_real(&[1.0])], p, &y, &small_probes(), 1e-9).unwrap();
        assert!(sk.report.valid());
        assert_eq!(sk.report.kernel_dim, 0);
        let x = CVector::from_real(&[-0.7]);
        let t = sk.t_y(&x).unwrap();
        assert!((t.representative[0] - C64::new(-0.7, 0.0)).norm() < 1e-12);
        assert!((t.quotient_norm - 0.7).abs() < 1e-12);
    }

    #[test]
    fn diagonal_columns_as_generators() {
        let p = Exponent::Finite(2.0);
        let cols = vec![CVector::from_real(&[0.5, 0.0]), CVector::from_real(&[0.0, 0.25])];
        let y = GeneratorSet::new(cols.clone(), p).unwrap();
        let sk = sinha_karn(&cols, p, &y, &small_probes(), 1e-9).unwrap();
        assert!(sk.report.valid(), "{:?}", sk.report);
        assert!((sk.report.ty_norm_upper - 1.0).abs() < 1e-9);
        assert!((sk.report.theta_norm_upper - (0.25f64 + 0.0625).sqrt()).abs() < 1e-12);
        // T_y x = x because the generators are the columns
        let x = CVector::from_real(&[0.6, -0.8]);
        let t = sk.t_y(&x).unwrap();
        assert!((t.representative[0].re - 0.6).abs() < 1e-9 && (t.representative[1].re + 0.8).abs() < 1e-9);
        assert!((t.quotient_norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uncovered_operator_is_rejected() {
        let p = Exponent::Finite(2.0);
        let cols = vec![CVector::from_real(&[2.0, 0.0]), CVector::from_real(&[0.0, 1.0])];
        let y = GeneratorSet::new(vec![CVector::from_real(&[1.0, 0.0]), CVector::from_real(&[0.0, 1.0])], p).unwrap();
        assert!(matches!(sinha_karn(&cols, p, &y, &small_probes(), 1e-9), Err(Error::NotCovered { .. })));
    }

    #[test]
    fn redundant_generators_have_a_kernel() {
        let p = Exponent::Finite(2.0);
        let g = vec![CVector::from_real(&[1.0, 0.0]), CVector::from_real(&[0.0, 1.0]), CVector::from_real(&[1.0, 1.0])];
        let theta = ThetaOperator::new(GeneratorSet::new(g, p).unwrap());
        assert_eq!(theta.kernel_basis.len(), 1);
        let k: Vec<C64> = theta.kernel_basis[0].coords().to_vec();
        assert!(theta.apply(&k).unwrap().norm2() < 1e-12);
        // [(1, 1, 0)] = [(0, 0, 1)]: minimum ℓ_2 norm over the line is √(2/3)... check against the solver
        let pt = QuotientPoint {
            representative: vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            quotient_norm: 2f64.sqrt(),
            lower: 0.0,
        };
        let r = theta.recompute(&pt, 1e-12).unwrap();
        // minimize ‖(1-t, 1-t, t)‖_2: t = 2/3, value √(1/9 + 1/9 + 4/9)
        assert!((r.quotient_norm - (6f64 / 9.0).sqrt()).abs() < 1e-8);
        assert!(r.quotient_norm <= pt.quotient_norm);
    }

    #[test]
    fn rank_one_chain_is_exact() {
        let p = Exponent::Finite(2.0);
        let phi = CVector::from_real(&[1.0, -0.5]);
        let y = CVector::from_real(&[1.0, 2.0]);
        let poly = HomPolynomial::rank_one(&phi, 2, &y).unwrap();
        let opts = KappaOptions { probes: small_probes(), ..KappaOptions::default() };
        let ck = choi_kim(&poly, p, 0.1, &opts, 1e-10).unwrap();
        let r = &ck.report;
        assert!(r.valid(), "{r:?}");
        assert!(r.max_residual < 1e-10);
        let exact = 5f64.sqrt();
        assert!((r.kappa_upper - exact).abs() < 1e-9);
        assert!((r.chain - exact).abs() < 1e-9, "{r:?}");
        assert!(r.chain >= r.kappa_lower - 1e-9);
    }

    #[test]
    fn example_b_quadratic_chain() {
        let p = Exponent::Finite(2.0);
        let eps = 0.05;
        let model = build_example_b(2, p, DEFAULT_DIM_CAP).unwrap();
        let p2 = model.components[2].clone();
        assert_eq!(p2.family.as_ref().map(|f| f.kind), Some(FamilyKind::B));
        let opts = KappaOptions { probes: small_probes(), ..KappaOptions::default() };
        let ck = choi_kim(&p2, p, eps, &opts, 1e-10).unwrap();
        assert!(ck.report.valid(), "{:?}", ck.report);
        assert!(ck.report.chain <= 1.0 + 2.0 * eps);
        assert!(ck.report.chain >= ck.report.kappa_lower - 1e-9);
    }

    #[test]
    fn zero_polynomial_has_no_generators() {
        let poly = HomPolynomial::zero(2, 2, 2);
        let r = choi_kim(&poly, Exponent::Finite(2.0), 0.1, &KappaOptions::default(), 1e-10);
        assert!(matches!(r, Err(Error::ZeroGenerator(0))));
    }

    #[test]
    fn factors_serialize() {
        let poly = HomPolynomial::rank_one(&CVector::from_real(&[1.0]), 1, &CVector::from_real(&[0.5, 0.5])).unwrap();
        let opts = KappaOptions { probes: small_probes(), ..KappaOptions::default() };
        let ck = choi_kim(&poly, Exponent::Finite(3.0), 0.5, &opts, 1e-10).unwrap();
        let js = serde_json::to_string(&ck.factors()).unwrap();
        let back: ChoiKimFactors = serde_json::from_str(&js).unwrap();
        assert_eq!(back, ck.factors());
    }
}
