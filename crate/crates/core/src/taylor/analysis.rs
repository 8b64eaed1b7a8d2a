//! Radius window, pointwise p-compactness verdicts, ball-image bounds and the
//! seminorm `Σ_m m_p(P_m f(0)(K + a_m B_E))`.

use serde::{Deserialize, Serialize};

use crate::counterex::{
    example_a_lower_certificate, example_b_divergence, family_kappa_closed_form, DivergenceCertificate,
};
use crate::error::{Error, Result};
use crate::homopoly::{kappa_bounds, FamilyKind, KappaBound, KappaOptions};
use crate::lpcore::{extended_real, CVector, Exponent};
use crate::pconvex::{merge_diagonal, GeneratorSet, MergedGenerators};

use super::TaylorModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundSource {
    /// Certified by `kappa_bounds` on the listed component.
    Certified,
    /// Closed form for a family component beyond the listed degrees.
    ClosedForm,
    /// Only the declared tail law is known (lower bound 0).
    TailLaw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeBound {
    pub m: usize,
    pub lower: f64,
    #[serde(with = "extended_real")]
    pub upper: f64,
    pub source: BoundSource,
}

/// Finite-window proxy for `r_p(f, x_0) = 1 / limsup κ_p(P_m)^{1/m}`; the
/// limsup itself is never computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusWindow {
    /// Largest degree `M` in the window.
    pub window: usize,
    /// `1 / max_{1≤m≤M} upper(κ_p(P_m))^{1/m}`.
    #[serde(with = "extended_real")]
    pub lower_estimate: f64,
    /// `1 / max_{1≤m≤M} lower(κ_p(P_m))^{1/m}`.
    #[serde(with = "extended_real")]
    pub upper_estimate: f64,
    /// `1/c2` from the tail law: a certified lower bound on the radius itself.
    /// Infinite for polynomial models, zero when no law is available.
    #[serde(with = "extended_real")]
    pub tail_radius: f64,
    pub finite_model: bool,
    pub per_degree: Vec<DegreeBound>,
}

fn listed_bounds(tm: &TaylorModel, p: Exponent, opts: &KappaOptions) -> Result<Vec<KappaBound>> {
    tm.components.iter().map(|c| kappa_bounds(c, p, opts)).collect()
}

fn family_at_origin(tm: &TaylorModel, p: Exponent) -> Option<FamilyKind> {
    tm.family.filter(|f| f.p == p && tm.base.is_zero()).map(|f| f.kind)
}

fn degree_bound(tm: &TaylorModel, p: Exponent, listed: &[KappaBound], m: usize) -> Option<DegreeBound> {
    if let Some(kb) = listed.get(m) {
        let err = tm.error_at(m);
        return Some(DegreeBound {
            m,
            lower: (kb.lower - err).max(0.0),
            upper: kb.upper + err,
            source: BoundSource::Certified,
        });
    }
    if let Some(kind) = family_at_origin(tm, p) {
        let (lower, upper) = family_kappa_closed_form(kind, m, p);
        return Some(DegreeBound { m, lower, upper, source: BoundSource::ClosedForm });
    }
    tm.tail.map(|t| DegreeBound { m, lower: 0.0, upper: t.c1 * t.c2.powi(m as i32), source: BoundSource::TailLaw })
}

fn window_from(tm: &TaylorModel, p: Exponent, window: usize, listed: &[KappaBound]) -> RadiusWindow {
    let per_degree: Vec<DegreeBound> = (1..=window).filter_map(|m| degree_bound(tm, p, listed, m)).collect();
    let finite_model = tm.is_finite() && tm.component_error.is_none();
    let root = |v: f64, m: usize| if v == 0.0 { 0.0 } else { v.powf(1.0 / m as f64) };
    let max_upper = per_degree.iter().map(|d| root(d.upper, d.m)).fold(0.0, f64::max);
    let max_lower = per_degree.iter().map(|d| root(d.lower, d.m)).fold(0.0, f64::max);
    let (lower_estimate, upper_estimate) =
        if finite_model { (f64::INFINITY, f64::INFINITY) } else { (1.0 / max_upper, 1.0 / max_lower) };
    let tail_radius = match tm.tail {
        _ if finite_model => f64::INFINITY,
        Some(t) => 1.0 / t.c2,
        None => 0.0,
    };
    RadiusWindow { window, lower_estimate, upper_estimate, tail_radius, finite_model, per_degree }
}

/// Radius window over degrees `1..=window` (default: the listed degrees).
/// Degrees beyond the listed components use family closed forms at the
/// origin, or the tail law.
pub fn radius_window(
    tm: &TaylorModel,
    p: Exponent,
    window: Option<usize>,
    opts: &KappaOptions,
) -> Result<RadiusWindow> {
    let listed = listed_bounds(tm, p, opts)?;
    Ok(window_from(tm, p, window.unwrap_or(tm.max_degree()), &listed))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Divergence {
    /// `κ_p(P_m f(y)) ≥ m^{m/2p}` for every `m` and every base point `y`:
    /// the listed pairs `(m, lower)` are certified, the law covers the rest.
    KappaGrowth { p: Exponent, degrees: Vec<(usize, f64)> },
    /// A component at the base point would need a generator sequence with
    /// divergent `ℓ_p` norm.
    DivergentSum(DivergenceCertificate),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    CertifiedYes {
        #[serde(with = "extended_real")]
        eps: f64,
    },
    CertifiedNo(Divergence),
    Inconclusive {
        reason: String,
    },
}

/// Number of degrees used in divergence certificates.
const DIVERGENCE_DEGREES: usize = 50;

pub fn pcompact_at(tm: &TaylorModel, p: Exponent, opts: &KappaOptions) -> Result<Verdict> {
    if let Some(f) = tm.family.filter(|f| f.p == p) {
        match f.kind {
            FamilyKind::A => {
                let degrees = example_a_lower_certificate(p, 5)?;
                return Ok(Verdict::CertifiedNo(Divergence::KappaGrowth { p, degrees }));
            }
            FamilyKind::B => {
                let b1 = tm.base.coords().first().map_or(0.0, |z| z.norm());
                if b1 >= 1.0 {
                    let cert = example_b_divergence(p, b1, DIVERGENCE_DEGREES.max(tm.max_degree()))?;
                    return Ok(Verdict::CertifiedNo(Divergence::DivergentSum(cert)));
                }
            }
        }
    }
    if tm.is_finite() {
        return Ok(Verdict::CertifiedYes { eps: f64::INFINITY });
    }
    let Some(t) = tm.tail else {
        return Ok(Verdict::Inconclusive { reason: "no tail law and no divergence pattern".into() });
    };
    let w = radius_window(tm, p, None, opts)?;
    let eps = 0.5 * w.lower_estimate.min(1.0 / t.c2);
    if eps > 0.0 {
        Ok(Verdict::CertifiedYes { eps })
    } else {
        Ok(Verdict::Inconclusive { reason: "listed components carry unbounded errors".into() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallImageBound {
    pub eps: f64,
    /// `Σ_{m≤M} ε^m upper(κ_p(P_m)) + tail`.
    pub value: f64,
    /// `ε^m upper(κ_p(P_m))` per listed degree.
    pub terms: Vec<f64>,
    pub tail_term: f64,
    /// Generators covering the image of the listed components.
    pub merged: Option<MergedGenerators>,
}

/// Upper bound on `m_p(f(x_0 + ε B_E))`. The constant term enters as
/// `m_p({P_0}) = ‖P_0‖`.
pub fn ball_image_bound(tm: &TaylorModel, eps: f64, p: Exponent, opts: &KappaOptions) -> Result<BallImageBound> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("radius must be positive and finite, got {eps}")));
    }
    if tm.tail.is_none() && !tm.is_finite() {
        return Err(Error::RadiusExceeded { eps, radius: 0.0 });
    }
    let listed = listed_bounds(tm, p, opts)?;
    let w = window_from(tm, p, tm.max_degree(), &listed);
    if eps >= w.lower_estimate {
        return Err(Error::RadiusExceeded { eps, radius: w.lower_estimate });
    }
    let big_m = tm.max_degree();
    let tail_term = match tm.tail {
        Some(t) if eps * t.c2 >= 1.0 => return Err(Error::RadiusExceeded { eps, radius: 1.0 / t.c2 }),
        Some(t) => t.c1 * (eps * t.c2).powi(big_m as i32 + 1) / (1.0 - eps * t.c2),
        None => 0.0,
    };
    let terms: Vec<f64> =
        listed.iter().enumerate().map(|(m, kb)| eps.powi(m as i32) * (kb.upper + tm.error_at(m))).collect();
    let value = terms.iter().sum::<f64>() + tail_term;

    let reps: Vec<(GeneratorSet, f64)> = listed
        .iter()
        .enumerate()
        .filter(|(_, kb)| kb.upper > 0.0)
        .map(|(m, kb)| {
            let s = eps.powi(m as i32);
            (kb.upper_witness.hull_generators().scaled(s), s * kb.upper)
        })
        .collect();
    let merged = if reps.is_empty() {
        None
    } else {
        let total: f64 = reps.iter().map(|(_, v)| v).sum();
        Some(merge_diagonal(&reps, 1e-9 * total.max(1e-300))?)
    };
    Ok(BallImageBound { eps, value, terms, tail_term, merged })
}

/// Positive nonincreasing null sequence: the listed prefix `a_0, a_1, …`
/// followed by geometric decay with `ratio < 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullSequence {
    pub prefix: Vec<f64>,
    pub ratio: f64,
}

impl NullSequence {
    pub fn geometric(a0: f64, ratio: f64) -> Self {
        NullSequence { prefix: vec![a0], ratio }
    }

    pub fn validate(&self) -> Result<()> {
        if self.prefix.is_empty() || !self.prefix.iter().all(|&a| a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidArgument("null sequence prefix must be nonempty and positive".into()));
        }
        if self.prefix.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument("null sequence must be nonincreasing".into()));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::InvalidArgument(format!("decay ratio must lie in (0, 1), got {}", self.ratio)));
        }
        Ok(())
    }

    pub fn at(&self, m: usize) -> f64 {
        match self.prefix.get(m) {
            Some(&a) => a,
            None => {
                let last = *self.prefix.last().expect("validated prefix");
                last * self.ratio.powi((m + 1 - self.prefix.len()) as i32)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormValue {
    pub value: f64,
    /// `max_{k∈K} ‖k‖`.
    pub radius_k: f64,
    pub terms: Vec<f64>,
    pub tail_term: f64,
}

fn k_radius(tm: &TaylorModel, k: &[CVector]) -> Result<f64> {
    let mut c = 0.0f64;
    for v in k {
        v.check_dim(tm.dom())?;
        c = c.max(v.norm(tm.dom_norm()));
    }
    Ok(c)
}

/// Upper evaluation of `Σ_m m_p(P_m f(0)(K + a_m B_E))` using
/// `m_p(P(cB_E)) = c^m κ_p(P)` with `c = max_K ‖k‖ + a_m`.
pub fn seminorm_e(
    tm: &TaylorModel,
    k: &[CVector],
    a: &NullSequence,
    p: Exponent,
    opts: &KappaOptions,
) -> Result<SeminormValue> {
    a.validate()?;
    if !tm.base.is_zero() {
        return Err(Error::InvalidArgument("the seminorm is evaluated on models expanded at the origin".into()));
    }
    let c = k_radius(tm, k)?;
    let big_m = tm.max_degree();
    let tail_term = match tm.tail {
        Some(t) => {
            let ratio = (c + a.at(big_m + 1)) * t.c2;
            if ratio >= 1.0 {
                return Err(Error::DivergentSeminorm { ratio });
            }
            t.c1 * ratio.powi(big_m as i32 + 1) / (1.0 - ratio)
        }
        None if tm.is_finite() => 0.0,
        None => return Err(Error::DivergentSeminorm { ratio: f64::INFINITY }),
    };
    let listed = listed_bounds(tm, p, opts)?;
    let terms: Vec<f64> =
        listed.iter().enumerate().map(|(m, kb)| (c + a.at(m)).powi(m as i32) * (kb.upper + tm.error_at(m))).collect();
    let value = terms.iter().sum::<f64>() + tail_term;
    Ok(SeminormValue { value, radius_k: c, terms, tail_term })
}

/// Whether `Σ_m m_p(P_m f(0)(K + εB_E))` is certified finite. Example-A
/// models are certified infinite: the terms dominate `ε^m m^{m/2p}`.
pub fn summability_at_zero(tm: &TaylorModel, k: &[CVector], eps: f64, p: Exponent) -> Result<bool> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let c = k_radius(tm, k)?;
    if tm.family.is_some_and(|f| f.kind == FamilyKind::A && f.p == p) {
        return Ok(false);
    }
    let errors_finite = tm.component_error.as_ref().is_none_or(|e| e.iter().all(|v| v.is_finite()));
    if tm.is_finite() {
        return Ok(errors_finite);
    }
    Ok(errors_finite && tm.tail.is_some_and(|t| (c + eps) * t.c2 < 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homopoly::{HomPolynomial, Monomial};
    use crate::lpcore::c64;
    use crate::taylor::TailLaw;

    fn square_model() -> TaylorModel {
        let p = HomPolynomial::from_terms(2, 2, 1, [(0, Monomial::var(0, 2), c64(2.0, 0.0))]).unwrap();
        TaylorModel::from_polynomial(p)
    }

    #[test]
    fn polynomial_has_infinite_radius() {
        let w = radius_window(&square_model(), Exponent::Finite(2.0), None, &KappaOptions::default()).unwrap();
        assert!(w.finite_model && w.lower_estimate.is_infinite());
        assert_eq!(w.per_degree.len(), 2);
        let v = pcompact_at(&square_model(), Exponent::Finite(2.0), &KappaOptions::default()).unwrap();
        assert!(matches!(v, Verdict::CertifiedYes { eps } if eps.is_infinite()));
    }

    #[test]
    fn single_component_ball_image() {
        let b = ball_image_bound(&square_model(), 0.3, Exponent::Finite(2.0), &KappaOptions::default()).unwrap();
        assert!((b.value - 0.09 * 2.0).abs() < 1e-12);
        let merged = b.merged.unwrap();
        assert!(merged.generators.norm() <= merged.bound * (1.0 + 1e-12));
    }

    #[test]
    fn radius_exceeded_with_tail() {
        let mut tm = square_model();
        tm.tail = Some(TailLaw { c1: 1.0, c2: 2.0 });
        let opts = KappaOptions::default();
        assert!(matches!(ball_image_bound(&tm, 0.6, Exponent::Finite(2.0), &opts), Err(Error::RadiusExceeded { .. })));
        assert!(ball_image_bound(&tm, 0.2, Exponent::Finite(2.0), &opts).is_ok());
    }

    #[test]
    fn seminorm_single_component() {
        let a = NullSequence::geometric(1.0, 0.5);
        let s = seminorm_e(&square_model(), &[CVector::zeros(2)], &a, Exponent::Finite(2.0), &KappaOptions::default())
            .unwrap();
        assert!((s.value - 2f64.powi(-4) * 2.0).abs() < 1e-12);
        let zero = TaylorModel::from_polynomial(HomPolynomial::zero(3, 2, 1));
        let s = seminorm_e(&zero, &[CVector::zeros(2)], &a, Exponent::Finite(2.0), &KappaOptions::default()).unwrap();
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn null_sequence_checks() {
        assert!(NullSequence { prefix: vec![0.5, 0.6], ratio: 0.5 }.validate().is_err());
        assert!(NullSequence::geometric(1.0, 1.0).validate().is_err());
        let a = NullSequence { prefix: vec![1.0, 0.5], ratio: 0.25 };
        assert_eq!(a.at(3), 0.5 * 0.25 * 0.25);
    }
}
