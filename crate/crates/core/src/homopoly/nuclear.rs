//! Quasi p-nuclear certificates and the holomorphy-type inequalities.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpcore::{lp_norm_of_magnitudes, CVector, Exponent};
use crate::pconvex::UpperWitness;

use super::{companion, kappa_bounds, taylor_component, HomPolynomial, KappaOptions};

/// Functionals `x'_n` with `‖Tx‖ ≤ (Σ_n |⟨x'_n, x⟩|^p)^{1/p}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QNuclearCertificate {
    pub functionals: Vec<CVector>,
    pub p: Exponent,
}

impl QNuclearCertificate {
    /// `‖(x'_n)‖_p`, with each functional measured in `dual_norm`.
    pub fn norm(&self, dual_norm: Exponent) -> f64 {
        lp_norm_of_magnitudes(self.functionals.iter().map(|f| f.norm(dual_norm)), self.p)
    }

    fn dominating(&self, x: &CVector) -> f64 {
        lp_norm_of_magnitudes(self.functionals.iter().map(|f| f.pair(x).norm()), self.p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QNuclearReport {
    pub valid: bool,
    pub nu_upper: f64,
    /// Largest `‖Tx‖ / (Σ|⟨x'_n, x⟩|^p)^{1/p}` over the probes.
    pub worst_ratio: f64,
    pub worst_probe: Option<usize>,
}

/// Checks domination of `T` (given by its columns, `T e_i = columns[i]`) on
/// every probe. `nu_upper` is the certificate norm with each functional
/// measured in `dual_norm`, the dual of the domain norm.
pub fn qnuclear_check(
    columns: &[CVector],
    cert: &QNuclearCertificate,
    probes: &[CVector],
    cod_norm: Exponent,
    dual_norm: Exponent,
    tol: f64,
) -> Result<QNuclearReport> {
    let n = columns.len();
    let d = columns.first().map_or(0, |c| c.dim());
    for f in &cert.functionals {
        f.check_dim(n)?;
    }
    let mut valid = true;
    let mut worst_ratio = 0.0f64;
    let mut worst_probe = None;
    for (k, x) in probes.iter().enumerate() {
        x.check_dim(n)?;
        let mut tx = CVector::zeros(d);
        for (c, &xi) in columns.iter().zip(x.coords()) {
            tx.axpy(xi, c);
        }
        let lhs = tx.norm(cod_norm);
        let rhs = cert.dominating(x);
        if lhs > rhs * (1.0 + tol) + tol * x.norm2() {
            valid = false;
        }
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_probe = Some(k);
        }
    }
    Ok(QNuclearReport { valid, nu_upper: cert.norm(dual_norm), worst_ratio, worst_probe })
}

/// The generators of an upper witness for `T(B_E)`, read as functionals on
/// `F'`, dominate the transpose: `‖T'φ‖ ≤ (Σ_n |φ(x_n)|^p)^{1/p}`.
pub fn transpose_certificate(w: &UpperWitness) -> QNuclearCertificate {
    QNuclearCertificate { functionals: w.generators.gens.clone(), p: w.generators.p }
}

/// Columns of the transpose `T'` (bilinear pairing, no conjugation).
pub fn transpose_columns(columns: &[CVector]) -> Vec<CVector> {
    let d = columns.first().map_or(0, |c| c.dim());
    (0..d).map(|o| CVector::new(columns.iter().map(|c| c[o]).collect())).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolotypeRow {
    /// Degree of the tested polynomial; `None` for the companion row.
    pub j: Option<usize>,
    pub lower: f64,
    pub upper: f64,
    /// Right-hand side `const · ‖a‖^{m-j} · upper(κ_p(P))`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolotypeReport {
    pub norm_a: f64,
    pub kappa_lower: f64,
    pub kappa_upper: f64,
    pub rows: Vec<HolotypeRow>,
}

impl HolotypeReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.holds).count()
    }
}

/// `lower κ_p(P_a) ≤ e‖a‖ upper κ_p(P)` and, for `j = 0..=m`,
/// `lower κ_p(P_j(P)(a)) ≤ (2e)^m ‖a‖^{m-j} upper κ_p(P)`.
pub fn holotype_check(poly: &HomPolynomial, a: &CVector, p: Exponent, opts: &KappaOptions) -> Result<HolotypeReport> {
    let m = poly.degree();
    if m < 2 {
        return Err(Error::DegreeTooLow(m));
    }
    a.check_dim(poly.dom())?;
    let base = kappa_bounds(poly, p, opts)?;
    let norm_a = a.norm(poly.dom_norm);
    let slack = |v: f64| v * (1.0 + 1e-9) + 1e-12;
    let mut rows = Vec::with_capacity(m + 2);
    let pa = kappa_bounds(&companion(poly, a)?, p, opts)?;
    let bound = E * norm_a * base.upper;
    rows.push(HolotypeRow { j: None, lower: pa.lower, upper: pa.upper, bound, holds: pa.lower <= slack(bound) });
    let c = (2.0 * E).powi(m as i32);
    for j in 0..=m {
        let comp = kappa_bounds(&taylor_component(poly, a, j)?, p, opts)?;
        let bound = c * norm_a.powi((m - j) as i32) * base.upper;
        rows.push(HolotypeRow {
            j: Some(j),
            lower: comp.lower,
            upper: comp.upper,
            bound,
            holds: comp.lower <= slack(bound),
        });
    }
    Ok(HolotypeReport { norm_a, kappa_lower: base.lower, kappa_upper: base.upper, rows })
}
