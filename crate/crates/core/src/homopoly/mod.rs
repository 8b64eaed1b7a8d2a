//! Homogeneous polynomials `P: C^dom → C^cod` in monomial coefficients.

mod companion;
mod kappa;
mod nuclear;

pub use companion::{
    companion, companion_as_printed_eval, companion_derivative, companion_filter_eval, companion_iter,
    companion_with_leakage, taylor_component,
};
pub(crate) use kappa::inflation as coverage_inflation;
pub use kappa::{
    coefficient_opnorm, kappa_bounds, kappa_lower, linearize, probe_set, support_columns, KappaBound, KappaOptions,
    KappaUpper, Linearization, ProbeOptions, UpperRule,
};
pub use nuclear::{
    holotype_check, qnuclear_check, transpose_certificate, transpose_columns, HolotypeReport, HolotypeRow,
    QNuclearCertificate, QNuclearReport,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpcore::{complex_pair, CVector, Exponent, C64};

/// Sparse monomial `Π x_v^{e_v}` as sorted `(variable, exponent)` pairs with
/// positive exponents.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<(u32, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn new(mut pairs: Vec<(u32, u32)>) -> Self {
        pairs.retain(|&(_, e)| e > 0);
        pairs.sort_unstable();
        let mut out: Vec<(u32, u32)> = Vec::with_capacity(pairs.len());
        for (v, e) in pairs {
            match out.last_mut() {
                Some((lv, le)) if *lv == v => *le += e,
                _ => out.push((v, e)),
            }
        }
        Monomial(out)
    }

    pub fn var(v: usize, e: u32) -> Self {
        Monomial::new(vec![(v as u32, e)])
    }

    pub fn from_dense(exps: &[u32]) -> Self {
        Monomial(exps.iter().enumerate().filter(|(_, &e)| e > 0).map(|(v, &e)| (v as u32, e)).collect())
    }

    pub fn to_dense(&self, dim: usize) -> Vec<u32> {
        let mut out = vec![0; dim];
        for &(v, e) in &self.0 {
            out[v as usize] = e;
        }
        out
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&(_, e)| e as usize).sum()
    }

    pub fn max_var(&self) -> Option<usize> {
        self.0.last().map(|&(v, _)| v as usize)
    }

    pub fn eval(&self, x: &[C64]) -> C64 {
        self.0.iter().fold(C64::new(1.0, 0.0), |acc, &(v, e)| acc * x[v as usize].powu(e))
    }

    /// `μ! = Π e_v!`.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&(_, e)| factorial(e as usize)).product()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut pairs = self.0.clone();
        pairs.extend_from_slice(&other.0);
        Monomial::new(pairs)
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Recognized example family of a polynomial (see `counterex`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    A,
    B,
}

/// Tag carried by members of the example families: degree `m`, exponent `p`
/// and the zero-based coordinate block `σ_m = [start, start + len)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyTag {
    pub kind: FamilyKind,
    pub m: usize,
    pub p: Exponent,
    pub block_start: usize,
    pub block_len: usize,
}

/// `m`-homogeneous polynomial with coefficients on `(output, monomial)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomPolynomial {
    degree: usize,
    dom: usize,
    cod: usize,
    terms: BTreeMap<(usize, Monomial), C64>,
    /// Norm on the domain; the unit ball of this norm is `B_E`.
    pub dom_norm: Exponent,
    pub family: Option<FamilyTag>,
}

impl HomPolynomial {
    /// Zero polynomial of the given degree on `ℓ_1^dom → C^cod`.
    pub fn zero(degree: usize, dom: usize, cod: usize) -> Self {
        HomPolynomial { degree, dom, cod, terms: BTreeMap::new(), dom_norm: Exponent::Finite(1.0), family: None }
    }

    pub fn from_terms<I>(degree: usize, dom: usize, cod: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Monomial, C64)>,
    {
        let mut p = HomPolynomial::zero(degree, dom, cod);
        for (out, mono, c) in terms {
            p.add_term(out, mono, c)?;
        }
        Ok(p)
    }

    /// Linear map `x ↦ T x` from its columns.
    pub fn linear(columns: &[CVector], cod: usize) -> Result<Self> {
        let mut p = HomPolynomial::zero(1, columns.len(), cod);
        for (j, col) in columns.iter().enumerate() {
            col.check_dim(cod)?;
            for (i, &c) in col.coords().iter().enumerate() {
                p.add_term(i, Monomial::var(j, 1), c)?;
            }
        }
        Ok(p)
    }

    /// `x ↦ ⟨x', x⟩^m y` with the bilinear pairing.
    pub fn rank_one(functional: &CVector, m: usize, y: &CVector) -> Result<Self> {
        let dom = functional.dim();
        let mut p = HomPolynomial::zero(m, dom, y.dim());
        // multinomial expansion of (Σ a_v x_v)^m
        for mono in monomials(dom, m) {
            let coef = factorial(m) / mono.factorial() * mono.eval(functional.coords());
            if coef == C64::new(0.0, 0.0) {
                continue;
            }
            for (i, &yi) in y.coords().iter().enumerate() {
                p.add_term(i, mono.clone(), coef * yi)?;
            }
        }
        Ok(p)
    }

    pub fn with_dom_norm(mut self, r: Exponent) -> Self {
        self.dom_norm = r;
        self
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dom(&self) -> usize {
        self.dom
    }

    pub fn cod(&self) -> usize {
        self.cod
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &Monomial, C64)> {
        self.terms.iter().map(|((o, m), c)| (*o, m, *c))
    }

    pub fn coefficient(&self, out: usize, mono: &Monomial) -> C64 {
        self.terms.get(&(out, mono.clone())).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c` to the coefficient of `x^mono` in output `out`.
    pub fn add_term(&mut self, out: usize, mono: Monomial, c: C64) -> Result<()> {
        if out >= self.cod {
            return Err(Error::IndexOutOfRange { index: out, max: self.cod.saturating_sub(1) });
        }
        if let Some(v) = mono.max_var() {
            if v >= self.dom {
                return Err(Error::IndexOutOfRange { index: v, max: self.dom.saturating_sub(1) });
            }
        }
        if mono.degree() != self.degree {
            return Err(Error::InvalidArgument(format!(
                "monomial of degree {} in a {}-homogeneous polynomial",
                mono.degree(),
                self.degree
            )));
        }
        if c == C64::new(0.0, 0.0) {
            return Ok(());
        }
        let e = self.terms.entry((out, mono)).or_insert(C64::new(0.0, 0.0));
        *e += c;
        Ok(())
    }

    /// Drop coefficients with `|c| <= threshold`.
    pub fn prune(&mut self, threshold: f64) {
        self.terms.retain(|_, c| c.norm() > threshold);
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn eval(&self, x: &CVector) -> Result<CVector> {
        x.check_dim(self.dom)?;
        let mut out = CVector::zeros(self.cod);
        for ((o, mono), c) in &self.terms {
            out[*o] += c * mono.eval(x.coords());
        }
        Ok(out)
    }

    pub fn scale(&self, c: C64) -> HomPolynomial {
        let mut p = self.clone();
        for v in p.terms.values_mut() {
            *v *= c;
        }
        p.terms.retain(|_, v| *v != C64::new(0.0, 0.0));
        p.family = None;
        p
    }

    pub fn add(&self, other: &HomPolynomial) -> Result<HomPolynomial> {
        if (self.degree, self.dom, self.cod) != (other.degree, other.dom, other.cod) {
            return Err(Error::InvalidArgument("adding polynomials of different shapes".into()));
        }
        let mut p = self.clone();
        p.family = None;
        for ((o, m), c) in &other.terms {
            p.add_term(*o, m.clone(), *c)?;
        }
        p.terms.retain(|_, v| *v != C64::new(0.0, 0.0));
        Ok(p)
    }

    /// Largest coefficient difference over the union of supports.
    pub fn max_coefficient_diff(&self, other: &HomPolynomial) -> f64 {
        let mut worst = 0.0f64;
        for (k, c) in &self.terms {
            let d = other.terms.get(k).copied().unwrap_or_default();
            worst = worst.max((c - d).norm());
        }
        for (k, c) in &other.terms {
            if !self.terms.contains_key(k) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// All monomials of total degree `m` in `dom` variables, graded
/// lexicographic (`x_0^m` first).
pub fn monomials(dom: usize, m: usize) -> Vec<Monomial> {
    fn rec(v: usize, dom: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if v + 1 == dom {
            cur[v] = left as u32;
            out.push(Monomial::from_dense(cur));
            cur[v] = 0;
            return;
        }
        for e in (0..=left).rev() {
            cur[v] = e as u32;
            rec(v + 1, dom, left - e, cur, out);
        }
        cur[v] = 0;
    }
    let mut out = Vec::new();
    if dom == 0 {
        if m == 0 {
            out.push(Monomial::one());
        }
        return out;
    }
    let mut cur = vec![0u32; dom];
    rec(0, dom, m, &mut cur, &mut out);
    out
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    out: usize,
    multi: Vec<u32>,
    #[serde(with = "complex_pair")]
    c: C64,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    m: usize,
    dom: usize,
    cod: usize,
    terms: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dom_norm: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<FamilyTag>,
}

impl Serialize for HomPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms =
            self.terms.iter().map(|((o, m), c)| TermJson { out: *o, multi: m.to_dense(self.dom), c: *c }).collect();
        let dom_norm = (self.dom_norm != Exponent::Finite(1.0)).then_some(self.dom_norm);
        PolyJson { m: self.degree, dom: self.dom, cod: self.cod, terms, dom_norm, family: self.family.clone() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HomPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PolyJson::deserialize(d)?;
        let mut p = HomPolynomial::zero(raw.m, raw.dom, raw.cod);
        for t in raw.terms {
            if t.multi.len() != raw.dom {
                return Err(D::Error::custom(format!(
                    "multi-index has length {} but dom is {}",
                    t.multi.len(),
                    raw.dom
                )));
            }
            p.add_term(t.out, Monomial::from_dense(&t.multi), t.c).map_err(D::Error::custom)?;
        }
        if let Some(r) = raw.dom_norm {
            p.dom_norm = r;
        }
        p.family = raw.family;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpcore::c64;

    #[test]
    fn square_of_first_coordinate() {
        let p = HomPolynomial::from_terms(2, 2, 1, [(0, Monomial::var(0, 2), c64(1.0, 0.0))]).unwrap();
        let v = p.eval(&CVector::from_real(&[3.0, 7.0])).unwrap();
        assert_eq!(v[0], c64(9.0, 0.0));
    }

    #[test]
    fn zero_polynomial_evaluates_to_zero() {
        let p = HomPolynomial::zero(3, 4, 2);
        assert!(p.eval(&CVector::from_real(&[1.0, 2.0, 3.0, 4.0])).unwrap().is_zero());
    }

    #[test]
    fn degree_is_enforced() {
        let mut p = HomPolynomial::zero(2, 2, 1);
        assert!(p.add_term(0, Monomial::var(0, 3), c64(1.0, 0.0)).is_err());
        assert!(p.add_term(0, Monomial::var(5, 2), c64(1.0, 0.0)).is_err());
    }

    #[test]
    fn monomial_count_matches_binomial() {
        for (d, m) in [(2, 2), (3, 4), (4, 3), (1, 5)] {
            assert_eq!(monomials(d, m).len() as f64, binomial(d + m - 1, m));
        }
        assert_eq!(
            monomials(2, 2),
            vec![Monomial::var(0, 2), Monomial::new(vec![(0, 1), (1, 1)]), Monomial::var(1, 2)]
        );
    }

    #[test]
    fn rank_one_matches_power() {
        let a = CVector::new(vec![c64(1.0, 0.5), c64(-2.0, 0.0), c64(0.0, 1.0)]);
        let y = CVector::from_real(&[1.0, -1.0]);
        let p = HomPolynomial::rank_one(&a, 3, &y).unwrap();
        let x = CVector::new(vec![c64(0.3, 0.1), c64(0.2, -0.4), c64(1.0, 0.0)]);
        let t = a.pair(&x).powu(3);
        let v = p.eval(&x).unwrap();
        assert!((v[0] - t).norm() < 1e-12 && (v[1] + t).norm() < 1e-12);
    }

    #[test]
    fn json_roundtrip() {
        let p = HomPolynomial::from_terms(
            2,
            3,
            2,
            [(0, Monomial::new(vec![(0, 1), (2, 1)]), c64(1.5, -0.5)), (1, Monomial::var(1, 2), c64(2.0, 0.0))],
        )
        .unwrap();
        let s = p.to_json().unwrap();
        assert!(s.contains("\"multi\":[1,0,1]"));
        assert_eq!(HomPolynomial::from_json(&s).unwrap(), p);
        let bad = r#"{"m":2,"dom":2,"cod":1,"terms":[{"out":0,"multi":[1,0],"c":[1,0]}]}"#;
        assert!(HomPolynomial::from_json(bad).is_err());
    }
}
