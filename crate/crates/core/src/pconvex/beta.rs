//! Construction of a null sequence `β ∈ B_{c_0}` with `‖(x_n/β_n)‖ ≤ (1+ε)‖x‖`.
//!
//! The `ℓ_1` case pairs blocks `σ_j = (m_{j-1}, m_j]` of the geometric series
//! `Σ 2^{-n} = 1` with consecutive stretches of `x`, and amplifies block `j` by
//! `c_j = S_{σ_j}((1+δ)/2) / S_{σ_j}(1/2)` where `S_σ(r) = Σ_{n∈σ} r^n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpcore::{Exponent, TailedSequence};

/// Terms beyond the prefix are geometric with this ratio; their `ℓ_p` norm is
/// the sequence's `tail_norm`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricTail {
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct BetaOptions {
    /// Number of blocks to complete.
    pub blocks: usize,
    /// Maximum number of sequence terms (prefix plus generated tail terms).
    pub max_terms: usize,
}

impl Default for BetaOptions {
    fn default() -> Self {
        BetaOptions { blocks: 6, max_terms: 200_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaBlock {
    /// `σ_j = (m_start, m_end]` in one-based series indices.
    pub m_start: u32,
    pub m_end: u32,
    /// Zero-based index `n_j` where the block boundary splits a term.
    pub cross: usize,
    /// Share `t_{n_j} ∈ (0, 1]` of `x_{n_j}` assigned to this block.
    pub t: f64,
    pub c: f64,
    /// `S_{σ_j}(1/2)`.
    pub s_half: f64,
    /// `S_{σ_j}((1+δ)/2)`.
    pub s_grown: f64,
    /// `Σ β_n^{-1}|x_n|` over the block, recomputed from β.
    pub block_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaConstruction {
    pub p: Exponent,
    pub eps: f64,
    pub delta: f64,
    /// `β_n` for every generated term (prefix first, then tail terms).
    pub beta: Vec<f64>,
    /// `|x_n|` for the same indices, in the original scale.
    pub terms: Vec<f64>,
    pub blocks: Vec<BetaBlock>,
    pub completed_blocks: usize,
    /// The term budget ran out before the requested number of blocks.
    pub exhausted: bool,
    pub finite_support: bool,
    /// `‖x‖` of the input.
    pub norm: f64,
    /// Weighted norm over the completed blocks in the original scale, summed
    /// term by term.
    pub ratio_norm: f64,
    /// `Σ_{j≤J} S_{σ_j}((1+δ)/2) + Σ_{n>m_J} ((1+δ)/2)^n`.
    pub telescoping_lhs: f64,
    /// `(1+δ)/(1-δ)`.
    pub telescoping_rhs: f64,
}

impl BetaConstruction {
    /// Ratio bound holds and the telescoping identity closes.
    pub fn verify(&self, tol: f64) -> bool {
        self.ratio_norm <= (1.0 + self.eps) * self.norm * (1.0 + tol)
            && (self.telescoping_lhs - self.telescoping_rhs).abs() <= tol * self.telescoping_rhs
            && self.beta.iter().all(|&b| b > 0.0 && b <= 1.0)
    }
}

/// `S_{(a, b]}(r) = Σ_{n=a+1}^{b} r^n`.
fn block_sum(r: f64, a: u32, b: u32) -> f64 {
    r.powi(a as i32 + 1) * (1.0 - r.powi((b - a) as i32)) / (1.0 - r)
}

fn half_block(a: u32, b: u32) -> f64 {
    0.5f64.powi(a as i32) - 0.5f64.powi(b as i32)
}

struct Terms {
    prefix: Vec<f64>,
    next_tail: f64,
    ratio: f64,
    generated: Vec<f64>,
    max_terms: usize,
    infinite: bool,
}

impl Terms {
    fn get(&mut self, n: usize) -> Option<f64> {
        if n < self.prefix.len() {
            return Some(self.prefix[n]);
        }
        if !self.infinite || n >= self.max_terms {
            return None;
        }
        while self.prefix.len() + self.generated.len() <= n {
            self.generated.push(self.next_tail);
            self.next_tail *= self.ratio;
            if self.next_tail == 0.0 {
                return None;
            }
        }
        Some(self.generated[n - self.prefix.len()])
    }
}

/// `ℓ_1` construction for a positive sequence. The input is normalized to
/// norm one internally; reported norms are in the original scale.
pub fn beta_construct(
    x: &TailedSequence,
    tail: Option<GeometricTail>,
    eps: f64,
    opts: &BetaOptions,
) -> Result<BetaConstruction> {
    if x.p != Exponent::Finite(1.0) {
        return Err(Error::InvalidArgument(format!("expected an ℓ_1 sequence, got p = {}", x.p)));
    }
    let mags: Vec<f64> = x.prefix.iter().map(|z| z.norm()).collect();
    construct_l1(&mags, x.tail_norm, tail, eps, opts)
}

/// General `p`: run the `ℓ_1` construction on `z_n = |x_n|^p / ‖x‖_p^p` and
/// take `β_n = α_n^{1/p}`.
pub fn beta_construct_lp(
    x: &TailedSequence,
    tail: Option<GeometricTail>,
    eps: f64,
    opts: &BetaOptions,
) -> Result<BetaConstruction> {
    let p = match x.p {
        Exponent::Finite(p) => p,
        Exponent::Inf => return Err(Error::InvalidArgument("β construction needs a finite exponent".into())),
    };
    if p == 1.0 {
        return beta_construct(x, tail, eps, opts);
    }
    let mags: Vec<f64> = x.prefix.iter().map(|z| z.norm().powf(p)).collect();
    let tail_z = x.tail_norm.powf(p);
    let tail = tail.map(|t| GeometricTail { ratio: t.ratio.powf(p) });
    let mut c = construct_l1(&mags, tail_z, tail, eps, opts)?;
    // back to ℓ_p: β = α^{1/p}, norms are p-th roots
    let norm_p = x.norm_interval().upper;
    let ratio_z = c.ratio_norm / c.norm.max(f64::MIN_POSITIVE);
    c.beta.iter_mut().for_each(|b| *b = b.powf(1.0 / p));
    c.terms.iter_mut().for_each(|t| *t = t.powf(1.0 / p));
    c.norm = norm_p;
    c.ratio_norm = norm_p * ratio_z.powf(1.0 / p);
    c.p = x.p;
    Ok(c)
}

fn construct_l1(
    mags: &[f64],
    tail_norm: f64,
    tail: Option<GeometricTail>,
    eps: f64,
    opts: &BetaOptions,
) -> Result<BetaConstruction> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let norm: f64 = mags.iter().sum::<f64>() + tail_norm;
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidArgument("sequence must be nonzero with finite norm".into()));
    }
    let delta = 0.9 * eps / (2.0 + eps);
    let r = (1.0 + delta) / 2.0;
    let rhs = (1.0 + delta) / (1.0 - delta);

    if tail_norm == 0.0 {
        // finite support: β = 1 already gives ‖x/β‖ = ‖x‖
        return Ok(BetaConstruction {
            p: Exponent::Finite(1.0),
            eps,
            delta,
            beta: vec![1.0; mags.len()],
            terms: mags.to_vec(),
            blocks: vec![],
            completed_blocks: 0,
            exhausted: false,
            finite_support: true,
            norm,
            ratio_norm: norm,
            telescoping_lhs: rhs,
            telescoping_rhs: rhs,
        });
    }
    let Some(GeometricTail { ratio }) = tail else {
        return Err(Error::InvalidArgument("a positive tail norm needs a geometric tail law".into()));
    };
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("tail ratio must lie in (0, 1), got {ratio}")));
    }
    if let Some(i) = mags.iter().position(|&m| !(m > 0.0)) {
        return Err(Error::InvalidArgument(format!("entry {i} is zero; the construction needs x_n ≠ 0")));
    }

    let unit: Vec<f64> = mags.iter().map(|m| m / norm).collect();
    let mut terms = Terms {
        prefix: unit,
        next_tail: tail_norm / norm * (1.0 - ratio),
        ratio,
        generated: Vec::new(),
        max_terms: opts.max_terms.max(mags.len()),
        infinite: true,
    };

    // (m_start, m_end, cross, t)
    let mut raw: Vec<(u32, u32, usize, f64)> = Vec::new();
    let mut m_prev: u32 = 0;
    let mut carry = 0.0;
    let mut next = 0usize;
    let mut exhausted = false;
    // one extra block fixes c_{J+1} for the weight at the last crossing
    while raw.len() < opts.blocks + 1 {
        let Some(first) = terms.get(next) else {
            exhausted = true;
            break;
        };
        let mut m = m_prev + 1;
        while !(carry + first < half_block(m_prev, m)) {
            m += 1;
            if m > 1000 {
                break;
            }
        }
        if m > 1000 {
            exhausted = true;
            break;
        }
        let target = half_block(m_prev, m);
        let mut s = carry;
        let mut n = next;
        let crossing = loop {
            let Some(v) = terms.get(n) else { break None };
            if s + v >= target {
                let t = ((target - s) / v).clamp(f64::MIN_POSITIVE, 1.0);
                break Some((n, t, v));
            }
            s += v;
            n += 1;
        };
        match crossing {
            Some((n, t, v)) => {
                raw.push((m_prev, m, n, t));
                carry = (1.0 - t) * v;
                next = n + 1;
                m_prev = m;
            }
            None => {
                exhausted = true;
                break;
            }
        }
    }
    let completed = raw.len().saturating_sub(1);
    if completed == 0 {
        return Err(Error::MassExhausted { completed_blocks: 0 });
    }
    let cs: Vec<f64> = raw.iter().map(|&(a, b, _, _)| block_sum(r, a, b) / half_block(a, b)).collect();

    let last_cross = raw[completed - 1].2;
    let len = last_cross + 1;
    let mut beta = vec![0.0; len];
    let mut start = 0;
    for j in 0..completed {
        let (_, _, cross, t) = raw[j];
        for b in beta.iter_mut().take(cross).skip(start) {
            *b = 1.0 / cs[j];
        }
        beta[cross] = 1.0 / (t * cs[j] + (1.0 - t) * cs[j + 1]);
        start = cross + 1;
    }
    let xs: Vec<f64> = (0..len).map(|n| terms.get(n).expect("generated term")).collect();

    let mut blocks = Vec::with_capacity(completed);
    let mut ratio_unit = 0.0;
    let mut prev: Option<(usize, f64)> = None;
    for j in 0..completed {
        let (a, b, cross, t) = raw[j];
        let mut sum = 0.0;
        let lo = match prev {
            Some((pc, pt)) => {
                sum += (1.0 - pt) * cs[j] * xs[pc];
                pc + 1
            }
            None => 0,
        };
        for n in lo..cross {
            sum += xs[n] / beta[n];
        }
        sum += t * cs[j] * xs[cross];
        ratio_unit += sum;
        blocks.push(BetaBlock {
            m_start: a,
            m_end: b,
            cross,
            t,
            c: cs[j],
            s_half: half_block(a, b),
            s_grown: block_sum(r, a, b),
            block_sum: sum,
        });
        prev = Some((cross, t));
    }
    // the same total, summed term by term over the β values
    let mut direct = 0.0;
    for n in 0..last_cross {
        direct += xs[n] / beta[n];
    }
    let (_, _, _, t_last) = raw[completed - 1];
    direct += t_last * cs[completed - 1] * xs[last_cross];
    debug_assert!((direct - ratio_unit).abs() <= 1e-10 * direct.max(1.0));

    let m_last = raw[completed - 1].1;
    let lhs: f64 = blocks.iter().map(|b| b.s_grown).sum::<f64>() + r.powi(m_last as i32 + 1) / (1.0 - r);

    Ok(BetaConstruction {
        p: Exponent::Finite(1.0),
        eps,
        delta,
        beta,
        terms: xs.iter().map(|v| v * norm).collect(),
        blocks,
        completed_blocks: completed,
        exhausted: exhausted || completed < opts.blocks,
        finite_support: false,
        norm,
        ratio_norm: direct * norm,
        telescoping_lhs: lhs,
        telescoping_rhs: rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn halves(n: usize) -> TailedSequence {
        let prefix: Vec<f64> = (1..=n).map(|k| 0.5f64.powi(k as i32)).collect();
        TailedSequence::from_real(Exponent::Finite(1.0), &prefix, 0.5f64.powi(n as i32)).unwrap()
    }

    #[test]
    fn halves_sequence_blocks() {
        let x = halves(10);
        let c = beta_construct(&x, Some(GeometricTail { ratio: 0.5 }), 0.2, &BetaOptions::default()).unwrap();
        assert!(c.completed_blocks >= 3);
        assert!(c.verify(1e-12));
        assert!(c.ratio_norm <= 1.2);
        for b in &c.blocks {
            assert!((b.block_sum - b.s_grown).abs() <= 1e-12 * b.s_grown.max(1e-300) + 1e-15);
        }
        // first block for (1/2)^n is σ_1 = {1, 2}, crossing at the second term
        assert_eq!((c.blocks[0].m_end, c.blocks[0].cross), (2, 1));
    }

    #[test]
    fn beta_is_nonincreasing_after_first_block() {
        let x = halves(30);
        let c = beta_construct(&x, Some(GeometricTail { ratio: 0.5 }), 0.05, &BetaOptions::default()).unwrap();
        let start = c.blocks[0].cross;
        for w in c.beta[start..].windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
    }

    #[test]
    fn finite_support_is_trivial() {
        let x = TailedSequence::from_real(Exponent::Finite(1.0), &[0.25, 0.75], 0.0).unwrap();
        let c = beta_construct(&x, None, 0.1, &BetaOptions::default()).unwrap();
        assert_eq!(c.beta, vec![1.0, 1.0]);
        assert_eq!(c.ratio_norm, 1.0);
    }

    #[test]
    fn lp_wrapper_bounds_ratio() {
        let prefix: Vec<f64> = (1..=12).map(|k| 0.8f64.powi(k)).collect();
        let tail = 0.8f64.powi(13) / (1.0 - 0.8f64.powi(2)).sqrt();
        let x = TailedSequence::from_real(Exponent::Finite(2.0), &prefix, tail).unwrap();
        let c = beta_construct_lp(&x, Some(GeometricTail { ratio: 0.8 }), 0.1, &BetaOptions::default()).unwrap();
        assert!(c.completed_blocks >= 3);
        assert!(c.ratio_norm <= 1.1 * c.norm);
        assert!(c.beta.iter().all(|&b| b > 0.0 && b <= 1.0));
    }

    #[test]
    fn rejects_zero_entries() {
        let x = TailedSequence::from_real(Exponent::Finite(1.0), &[0.5, 0.0], 0.5).unwrap();
        assert!(beta_construct(&x, Some(GeometricTail { ratio: 0.5 }), 0.1, &BetaOptions::default()).is_err());
    }
}
