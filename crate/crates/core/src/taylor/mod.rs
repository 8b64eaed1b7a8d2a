//! Taylor models `f(x) = Σ_m P_m f(x_0)(x - x_0)`: finitely many explicit
//! components plus an optional tail law `κ_p(P_m) ≤ c1 c2^m` beyond them.

mod analysis;

pub use analysis::{
    ball_image_bound, pcompact_at, radius_window, seminorm_e, summability_at_zero, BallImageBound, BoundSource,
    DegreeBound, Divergence, NullSequence, RadiusWindow, SeminormValue, Verdict,
};

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homopoly::{binomial, taylor_component, FamilyKind, HomPolynomial};
use crate::lpcore::{extended_real, CVector, Exponent};

/// `κ_p(P_m f(x_0)) ≤ c1 · c2^m` for every degree beyond the listed components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailLaw {
    pub c1: f64,
    pub c2: f64,
}

/// The function is one of the two example families on `ℓ_1 → ℓ_p`, whose
/// components at the origin are known in closed form for every degree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyInfo {
    pub kind: FamilyKind,
    pub p: Exponent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaylorModel {
    pub base: CVector,
    /// Component of degree `m` at index `m`.
    pub components: Vec<HomPolynomial>,
    pub tail: Option<TailLaw>,
    pub family: Option<FamilyInfo>,
    /// Upper bound on `κ_p` of the difference between each listed component
    /// and the true one (nonzero after re-expansion of a model with a tail).
    pub component_error: Option<Vec<f64>>,
}

impl TaylorModel {
    pub fn new(base: CVector, components: Vec<HomPolynomial>, tail: Option<TailLaw>) -> Result<Self> {
        let tm = TaylorModel { base, components, tail, family: None, component_error: None };
        tm.validate()?;
        Ok(tm)
    }

    /// Model of a single homogeneous polynomial (zero components below it).
    pub fn from_polynomial(p: HomPolynomial) -> Self {
        let mut components: Vec<HomPolynomial> =
            (0..p.degree()).map(|m| HomPolynomial::zero(m, p.dom(), p.cod()).with_dom_norm(p.dom_norm)).collect();
        let base = CVector::zeros(p.dom());
        components.push(p);
        TaylorModel { base, components, tail: None, family: None, component_error: None }
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.components.first() else {
            return Err(Error::InvalidArgument("a Taylor model needs at least the degree-0 component".into()));
        };
        let (dom, cod) = (first.dom(), first.cod());
        self.base.check_dim(dom)?;
        for (m, c) in self.components.iter().enumerate() {
            if c.degree() != m {
                return Err(Error::InvalidArgument(format!("component {m} has degree {}", c.degree())));
            }
            if c.dom() != dom {
                return Err(Error::DimensionMismatch { expected: dom, got: c.dom() });
            }
            if c.cod() != cod {
                return Err(Error::DimensionMismatch { expected: cod, got: c.cod() });
            }
        }
        if let Some(t) = self.tail {
            if !(t.c1 >= 0.0 && t.c2 >= 0.0 && t.c1.is_finite() && t.c2.is_finite()) {
                return Err(Error::InvalidArgument(format!("tail constants must be finite and nonnegative: {t:?}")));
            }
        }
        if let Some(e) = &self.component_error {
            if e.len() != self.components.len() {
                return Err(Error::DimensionMismatch { expected: self.components.len(), got: e.len() });
            }
        }
        Ok(())
    }

    /// Highest listed degree `M`.
    pub fn max_degree(&self) -> usize {
        self.components.len() - 1
    }

    pub fn dom(&self) -> usize {
        self.components[0].dom()
    }

    pub fn cod(&self) -> usize {
        self.components[0].cod()
    }

    pub fn dom_norm(&self) -> Exponent {
        self.components[0].dom_norm
    }

    /// A polynomial: no tail law and no family behind it.
    pub fn is_finite(&self) -> bool {
        self.tail.is_none() && self.family.is_none()
    }

    pub fn error_at(&self, m: usize) -> f64 {
        self.component_error.as_ref().and_then(|e| e.get(m).copied()).unwrap_or(0.0)
    }

    /// `Σ_m P_m(x - base)` over the listed components.
    pub fn eval_truncated(&self, x: &CVector) -> Result<CVector> {
        let h = x - &self.base;
        let mut out = CVector::zeros(self.cod());
        for c in &self.components {
            out = &out + &c.eval(&h)?;
        }
        Ok(out)
    }

    /// Re-expand at `b`. Component `l` becomes `Σ_{m ≥ l} C(m, l) ∨P_m(a^{m-l}, ·)`
    /// with `a = b - base`; the unlisted degrees contribute at most
    /// `c1 c2^l Σ_{m > M} C(m, l) u^{m-l}`, `u = e‖a‖c2`, and the new tail law is
    /// `(c1/(1-u), c2/(1-u))`. Without a usable tail the errors are infinite.
    pub fn reexpand(&self, b: &CVector) -> Result<TaylorModel> {
        b.check_dim(self.dom())?;
        let a = b - &self.base;
        let big_m = self.max_degree();
        let mut comps = Vec::with_capacity(big_m + 1);
        for l in 0..=big_m {
            let mut acc = HomPolynomial::zero(l, self.dom(), self.cod()).with_dom_norm(self.dom_norm());
            for m in l..=big_m {
                let t = taylor_component(&self.components[m], &a, l)?;
                acc = acc.add(&t)?;
            }
            acc.dom_norm = self.dom_norm();
            comps.push(acc);
        }
        let norm_a = a.norm(self.dom_norm());
        let (errors, tail) = match self.tail {
            None if self.family.is_none() => {
                let propagated: Vec<f64> = (0..=big_m)
                    .map(|l| {
                        (l..=big_m).map(|m| binomial(m, l) * (E * norm_a).powi((m - l) as i32) * self.error_at(m)).sum()
                    })
                    .collect();
                (propagated, None)
            }
            None => (vec![f64::INFINITY; big_m + 1], None),
            Some(t) => {
                let u = E * norm_a * t.c2;
                if u < 1.0 {
                    let errors = (0..=big_m)
                        .map(|l| {
                            let listed: f64 = (l..=big_m)
                                .map(|m| binomial(m, l) * (E * norm_a).powi((m - l) as i32) * self.error_at(m))
                                .sum();
                            listed + t.c1 * t.c2.powi(l as i32) * truncated_binomial_series(l, big_m, u)
                        })
                        .collect();
                    (errors, Some(TailLaw { c1: t.c1 / (1.0 - u), c2: t.c2 / (1.0 - u) }))
                } else {
                    (vec![f64::INFINITY; big_m + 1], None)
                }
            }
        };
        let component_error = if errors.iter().all(|&e| e == 0.0) { None } else { Some(errors) };
        Ok(TaylorModel { base: b.clone(), components: comps, tail, family: self.family, component_error })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Upper bound for `Σ_{m > M} C(m, l) u^{m-l}` with `0 ≤ u < 1`. Terms are
/// summed until the term ratio `(m+1) u / (m+1-l)`, which decreases in `m`,
/// drops below one half; the rest is bounded by a geometric series.
fn truncated_binomial_series(l: usize, big_m: usize, u: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let mut m = big_m + 1;
    let mut term = binomial(m, l) * u.powi((m - l) as i32);
    let mut sum = 0.0;
    loop {
        let ratio = (m + 1) as f64 * u / (m + 1 - l) as f64;
        if ratio < 0.5 || term < 1e-300 {
            return sum + term / (1.0 - ratio);
        }
        sum += term;
        term *= ratio;
        m += 1;
        if m > 1_000_000 {
            return f64::INFINITY;
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    base: CVector,
    components: Vec<HomPolynomial>,
    tail: Option<TailLaw>,
    family_tag: Option<FamilyKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family_p: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    component_error: Option<Vec<ErrorEntry>>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct ErrorEntry(#[serde(with = "extended_real")] f64);

impl Serialize for TaylorModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModelJson {
            base: self.base.clone(),
            components: self.components.clone(),
            tail: self.tail,
            family_tag: self.family.map(|f| f.kind),
            family_p: self.family.map(|f| f.p),
            component_error: self.component_error.as_ref().map(|e| e.iter().map(|&v| ErrorEntry(v)).collect()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TaylorModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ModelJson::deserialize(d)?;
        let family = match (raw.family_tag, raw.family_p) {
            (Some(kind), Some(p)) => Some(FamilyInfo { kind, p }),
            (Some(_), None) => return Err(D::Error::custom("family_tag requires family_p")),
            (None, _) => None,
        };
        let tm = TaylorModel {
            base: raw.base,
            components: raw.components,
            tail: raw.tail,
            family,
            component_error: raw.component_error.map(|e| e.into_iter().map(|v| v.0).collect()),
        };
        tm.validate().map_err(D::Error::custom)?;
        Ok(tm)
    }
}
