//! Companion polynomials `P_a(x) = ∨P(a, x^{m-1})` and Taylor components.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lpcore::{CVector, C64};

use super::{binomial, HomPolynomial, Monomial};

fn roots_of_unity(m: usize) -> Vec<C64> {
    (1..=m).map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64)).collect()
}

/// Expands `Σ_j w_j P(s_j x + a)` symbolically; the result is keyed by
/// `(output, monomial)` and mixes all degrees `0..=m`.
fn expand_shifted(p: &HomPolynomial, a: &CVector, shifts: &[(C64, C64)]) -> BTreeMap<(usize, Monomial), C64> {
    let mut out: BTreeMap<(usize, Monomial), C64> = BTreeMap::new();
    for (o, mono, c) in p.terms() {
        let pairs = mono.pairs();
        // every sub-multi-index k ≤ mono
        let mut ks = vec![0u32; pairs.len()];
        loop {
            let mut coef = c;
            let mut deg = 0u32;
            for (&(v, e), &k) in pairs.iter().zip(&ks) {
                coef *= binomial(e as usize, k as usize) * a[v as usize].powu(e - k);
                deg += k;
            }
            if coef != C64::new(0.0, 0.0) {
                let w: C64 = shifts.iter().map(|&(wj, sj)| wj * sj.powu(deg)).sum();
                let sub = Monomial::new(pairs.iter().zip(&ks).map(|(&(v, _), &k)| (v, k)).collect());
                *out.entry((o, sub)).or_default() += coef * w;
            }
            // odometer
            let mut i = 0;
            while i < ks.len() {
                if ks[i] < pairs[i].1 {
                    ks[i] += 1;
                    break;
                }
                ks[i] = 0;
                i += 1;
            }
            if i == ks.len() {
                break;
            }
        }
    }
    out
}

/// Companion by the weighted roots-of-unity filter
/// `P_a(x) = (1 / (m² (m-1)^{m-1})) Σ_{j=1}^{m} r^j P((m-1) r^j x + a)`,
/// keeping the degree `m-1` part. Also returns the largest coefficient of the
/// discarded degrees, which vanishes up to rounding.
///
/// Degree 1 is accepted here and yields the constant `P(a)`.
pub fn companion_with_leakage(p: &HomPolynomial, a: &CVector) -> Result<(HomPolynomial, f64)> {
    a.check_dim(p.dom())?;
    let m = p.degree();
    if m == 0 {
        return Err(Error::DegreeTooLow(m));
    }
    let shifts: Vec<(C64, C64)> = roots_of_unity(m).into_iter().map(|r| (r, r * (m as f64 - 1.0))).collect();
    let norm = 1.0 / ((m * m) as f64 * ((m - 1) as f64).powi(m as i32 - 1));
    let expanded = expand_shifted(p, a, &shifts);
    let mut out = HomPolynomial::zero(m - 1, p.dom(), p.cod());
    out.dom_norm = p.dom_norm;
    let mut leakage = 0.0f64;
    let scale = p.max_abs_coefficient().max(1e-300);
    for ((o, mono), c) in expanded {
        let c = c * norm;
        if mono.degree() == m - 1 {
            out.add_term(o, mono, c)?;
        } else {
            leakage = leakage.max(c.norm());
        }
    }
    // rounding in the root sums leaves ~1e-16 relative residue
    out.prune(1e-14 * scale * (1.0 + a.max_abs()).powi(m as i32));
    Ok((out, leakage))
}

/// `P_a` for `m ≥ 2`.
pub fn companion(p: &HomPolynomial, a: &CVector) -> Result<HomPolynomial> {
    if p.degree() < 2 {
        return Err(Error::DegreeTooLow(p.degree()));
    }
    companion_with_leakage(p, a).map(|(c, _)| c)
}

/// `P_{a^k}(x) = ∨P(a^k, x^{m-k})` by iterating the filter.
pub fn companion_iter(p: &HomPolynomial, a: &CVector, k: usize) -> Result<HomPolynomial> {
    if k > p.degree() {
        return Err(Error::IndexOutOfRange { index: k, max: p.degree() });
    }
    let mut cur = p.clone();
    for _ in 0..k {
        cur = companion_with_leakage(&cur, a)?.0;
    }
    Ok(cur)
}

/// Oracle: `(1/m) Σ_v a_v ∂_v P`, exact on coefficients.
pub fn companion_derivative(p: &HomPolynomial, a: &CVector) -> Result<HomPolynomial> {
    a.check_dim(p.dom())?;
    let m = p.degree();
    if m == 0 {
        return Err(Error::DegreeTooLow(m));
    }
    let mut out = HomPolynomial::zero(m - 1, p.dom(), p.cod());
    out.dom_norm = p.dom_norm;
    for (o, mono, c) in p.terms() {
        for &(v, e) in mono.pairs() {
            let av = a[v as usize];
            if av == C64::new(0.0, 0.0) {
                continue;
            }
            let rest: Vec<(u32, u32)> =
                mono.pairs().iter().map(|&(w, f)| if w == v { (w, f - 1) } else { (w, f) }).collect();
            out.add_term(o, Monomial::new(rest), c * av * (e as f64 / m as f64))?;
        }
    }
    out.prune(0.0);
    Ok(out)
}

/// Evaluates the filter at a single point, `(1/(m²(m-1)^{m-1})) Σ_{j=1}^{m} r^j P((m-1) r^j x + a)`.
pub fn companion_filter_eval(p: &HomPolynomial, a: &CVector, x: &CVector) -> Result<CVector> {
    filter_eval(p, a, x, true)
}

/// The unweighted variant `Σ_{j=1}^{m-1} P((m-1) r^j x + a)` with the same
/// normalization. It does not reproduce `∨P(a, x^{m-1})`: for `P(x) = x²`
/// it gives `(a - x)²/4`.
pub fn companion_as_printed_eval(p: &HomPolynomial, a: &CVector, x: &CVector) -> Result<CVector> {
    filter_eval(p, a, x, false)
}

fn filter_eval(p: &HomPolynomial, a: &CVector, x: &CVector, weighted: bool) -> Result<CVector> {
    a.check_dim(p.dom())?;
    x.check_dim(p.dom())?;
    let m = p.degree();
    if m < 2 {
        return Err(Error::DegreeTooLow(m));
    }
    let roots = roots_of_unity(m);
    let terms = if weighted { m } else { m - 1 };
    let mut acc = CVector::zeros(p.cod());
    for &r in &roots[..terms] {
        let arg = &x.scale(r * (m as f64 - 1.0)) + a;
        let w = if weighted { r } else { C64::new(1.0, 0.0) };
        acc.axpy(w, &p.eval(&arg)?);
    }
    Ok(acc.scale_real(1.0 / ((m * m) as f64 * ((m - 1) as f64).powi(m as i32 - 1))))
}

/// `P_l(P)(a) = C(m, l) P_{a^{m-l}}`, the degree-`l` term of `P(a + x)`.
pub fn taylor_component(p: &HomPolynomial, a: &CVector, l: usize) -> Result<HomPolynomial> {
    let m = p.degree();
    if l > m {
        return Err(Error::IndexOutOfRange { index: l, max: m });
    }
    a.check_dim(p.dom())?;
    if l == m {
        return Ok(p.clone());
    }
    let c = companion_iter(p, a, m - l)?;
    let mut out = c.scale(C64::new(binomial(m, l), 0.0));
    out.dom_norm = p.dom_norm;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpcore::c64;

    fn square() -> HomPolynomial {
        HomPolynomial::from_terms(2, 1, 1, [(0, Monomial::var(0, 2), c64(1.0, 0.0))]).unwrap()
    }

    #[test]
    fn square_companion_is_ax() {
        let a = CVector::from_real(&[3.0]);
        let (c, leak) = companion_with_leakage(&square(), &a).unwrap();
        assert!(leak < 1e-14);
        assert_eq!(c.degree(), 1);
        assert!((c.coefficient(0, &Monomial::var(0, 1)) - c64(3.0, 0.0)).norm() < 1e-12);
        let d = companion_derivative(&square(), &a).unwrap();
        assert!(c.max_coefficient_diff(&d) < 1e-12);
    }

    #[test]
    fn as_printed_variant_gives_quarter_square() {
        let (a, x) = (2.0, 0.5);
        let v = companion_as_printed_eval(&square(), &CVector::from_real(&[a]), &CVector::from_real(&[x])).unwrap();
        assert!((v[0] - c64((a - x) * (a - x) / 4.0, 0.0)).norm() < 1e-12);
        let w = companion_filter_eval(&square(), &CVector::from_real(&[a]), &CVector::from_real(&[x])).unwrap();
        assert!((w[0] - c64(a * x, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_direction_gives_zero() {
        let c = companion(&square(), &CVector::zeros(1)).unwrap();
        assert!(c.is_zero());
    }

    #[test]
    fn linear_polynomial_rejected() {
        let p = HomPolynomial::from_terms(1, 2, 1, [(0, Monomial::var(1, 1), c64(1.0, 0.0))]).unwrap();
        assert!(matches!(companion(&p, &CVector::zeros(2)), Err(Error::DegreeTooLow(1))));
    }

    #[test]
    fn taylor_components_of_square() {
        let a = CVector::from_real(&[1.5]);
        let t1 = taylor_component(&square(), &a, 1).unwrap();
        assert!((t1.coefficient(0, &Monomial::var(0, 1)) - c64(3.0, 0.0)).norm() < 1e-12);
        let t0 = taylor_component(&square(), &a, 0).unwrap();
        assert!((t0.coefficient(0, &Monomial::one()) - c64(2.25, 0.0)).norm() < 1e-12);
        assert_eq!(taylor_component(&square(), &a, 2).unwrap(), square());
        assert!(matches!(taylor_component(&square(), &a, 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn taylor_components_sum_to_shifted_value() {
        let p = HomPolynomial::from_terms(
            3,
            2,
            1,
            [(0, Monomial::new(vec![(0, 2), (1, 1)]), c64(1.0, -0.5)), (0, Monomial::var(1, 3), c64(0.25, 0.0))],
        )
        .unwrap();
        let a = CVector::new(vec![c64(0.3, 0.2), c64(-0.7, 0.1)]);
        let x = CVector::new(vec![c64(0.1, -0.4), c64(0.5, 0.0)]);
        let direct = p.eval(&(&a + &x)).unwrap();
        let mut sum = CVector::zeros(1);
        for l in 0..=3 {
            sum = &sum + &taylor_component(&p, &a, l).unwrap().eval(&x).unwrap();
        }
        assert!((&sum - &direct).norm2() < 1e-12);
    }
}
