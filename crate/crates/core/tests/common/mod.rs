#![allow(dead_code)]

use pcompact::homopoly::{monomials, HomPolynomial};
use pcompact::{CVector, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cplx(rng: &mut ChaCha8Rng, complex: bool) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), if complex { rng.random_range(-1.0..1.0) } else { 0.0 })
}

pub fn vector(rng: &mut ChaCha8Rng, dim: usize, complex: bool) -> CVector {
    CVector::new((0..dim).map(|_| cplx(rng, complex)).collect())
}

/// Sparse random polynomial with at most `max_terms` terms.
pub fn poly(rng: &mut ChaCha8Rng, m: usize, dom: usize, cod: usize, max_terms: usize, complex: bool) -> HomPolynomial {
    let monos = monomials(dom, m);
    let k = rng.random_range(1..=max_terms);
    let terms: Vec<_> = (0..k)
        .map(|_| {
            let mono = monos[rng.random_range(0..monos.len())].clone();
            (rng.random_range(0..cod), mono, cplx(rng, complex))
        })
        .collect();
    HomPolynomial::from_terms(m, dom, cod, terms).unwrap()
}

/// `∨P(a, x^{m-1})` as `(1/m)` times the `t`-coefficient of `P(x + t a)`,
/// read off with an exact discrete Fourier sum over `m + 1` points.
pub fn polarized(p: &HomPolynomial, a: &CVector, x: &CVector) -> CVector {
    let m = p.degree();
    let n = m + 1;
    let mut acc = CVector::zeros(p.cod());
    for k in 0..n {
        let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
        let pt = x + &a.scale(w);
        acc.axpy(w.conj(), &p.eval(&pt).unwrap());
    }
    acc.scale_real(1.0 / (n * m) as f64)
}
