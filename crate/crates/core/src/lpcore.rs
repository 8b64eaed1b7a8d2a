//! Scalars, exponents and truncated sequence spaces.
//!
//! Everything here is plain value arithmetic over `Complex<f64>`. A
//! [`TailedSequence`] carries an explicit bound on the ℓ_p norm of the part of
//! the sequence that was not stored, so its norm is always reported as an
//! interval.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Absolute tolerance applied to certificate residuals unless the caller
/// overrides it.
pub const DEFAULT_TOL: f64 = 1e-9;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A Hölder exponent in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Inf,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            return Ok(Exponent::Inf);
        }
        if !(p >= 1.0) || p.is_nan() {
            return Err(Error::InvalidExponent(p));
        }
        Ok(Exponent::Finite(p))
    }

    /// `p` as a float, `f64::INFINITY` for `Inf`.
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Inf => f64::INFINITY,
        }
    }

    /// `1/p`, zero for `Inf`.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Inf => 0.0,
        }
    }

    pub fn is_inf(self) -> bool {
        matches!(self, Exponent::Inf)
    }

    pub fn conjugate(self) -> Exponent {
        conjugate_exponent(self)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Inf => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "inf" || t == "infinity" {
            return Ok(Exponent::Inf);
        }
        if let Some((a, b)) = t.split_once('/') {
            let num: f64 = a.trim().parse().map_err(|_| Error::InvalidArgument(s.into()))?;
            let den: f64 = b.trim().parse().map_err(|_| Error::InvalidArgument(s.into()))?;
            return Exponent::new(num / den);
        }
        let p: f64 = t.parse().map_err(|_| Error::InvalidArgument(s.into()))?;
        Exponent::new(p)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::new(p).map_err(de::Error::custom),
            Raw::Str(s) => s.parse().map_err(de::Error::custom),
        }
    }
}

/// Hölder conjugate: `1/p + 1/q = 1`.
pub fn conjugate_exponent(p: Exponent) -> Exponent {
    match p {
        Exponent::Inf => Exponent::Finite(1.0),
        Exponent::Finite(1.0) => Exponent::Inf,
        Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
    }
}

/// ℓ_p norm of a finite list of magnitudes, scaled to avoid overflow.
pub fn lp_norm_of_magnitudes<I>(mags: I, p: Exponent) -> f64
where
    I: IntoIterator<Item = f64>,
    I::IntoIter: Clone,
{
    let it = mags.into_iter();
    let big = it.clone().fold(0.0f64, |m, v| m.max(v.abs()));
    match p {
        Exponent::Inf => big,
        Exponent::Finite(_) if big == 0.0 || !big.is_finite() => big,
        Exponent::Finite(1.0) => it.map(f64::abs).sum(),
        Exponent::Finite(2.0) => big * it.map(|v| (v / big) * (v / big)).sum::<f64>().sqrt(),
        Exponent::Finite(p) => big * it.map(|v| (v.abs() / big).powf(p)).sum::<f64>().powf(1.0 / p),
    }
}

pub fn lp_norm_slice(xs: &[C64], p: Exponent) -> f64 {
    lp_norm_of_magnitudes(xs.iter().map(|z| z.norm()), p)
}

/// A point of a finite-dimensional coordinate space.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CVector(pub Vec<C64>);

impl CVector {
    pub fn new(coords: Vec<C64>) -> Self {
        CVector(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        CVector(vec![C64::new(0.0, 0.0); dim])
    }

    pub fn from_real(xs: &[f64]) -> Self {
        CVector(xs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = C64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[C64] {
        &self.0
    }

    pub fn norm(&self, p: Exponent) -> f64 {
        lp_norm_slice(&self.0, p)
    }

    pub fn norm2(&self) -> f64 {
        lp_norm_slice(&self.0, Exponent::Finite(2.0))
    }

    pub fn scale(&self, c: C64) -> CVector {
        CVector(self.0.iter().map(|z| z * c).collect())
    }

    pub fn scale_real(&self, c: f64) -> CVector {
        CVector(self.0.iter().map(|z| z * c).collect())
    }

    /// `Σ conj(self_i) other_i`.
    pub fn inner(&self, other: &CVector) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    /// Bilinear pairing `Σ self_i other_i` (a functional applied to a point).
    pub fn pair(&self, other: &CVector) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    pub fn axpy(&mut self, a: C64, x: &CVector) {
        for (y, xi) in self.0.iter_mut().zip(&x.0) {
            *y += a * xi;
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.dim() });
        }
        Ok(())
    }
}

impl Index<usize> for CVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl Add for &CVector {
    type Output = CVector;
    fn add(self, rhs: &CVector) -> CVector {
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CVector {
    type Output = CVector;
    fn sub(self, rhs: &CVector) -> CVector {
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &CVector {
    type Output = CVector;
    fn neg(self) -> CVector {
        CVector(self.0.iter().map(|a| -a).collect())
    }
}

impl Mul<f64> for &CVector {
    type Output = CVector;
    fn mul(self, rhs: f64) -> CVector {
        self.scale_real(rhs)
    }
}

impl From<Vec<C64>> for CVector {
    fn from(v: Vec<C64>) -> Self {
        CVector(v)
    }
}

/// Complex scalars are encoded as `[re, im]` pairs.
pub mod complex_pairs {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[C64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = xs.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

pub mod complex_pair {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// Reals that may be infinite: finite values as numbers, `"inf"`/`"-inf"`
/// otherwise (JSON has no infinity).
pub mod extended_real {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
            },
        }
    }
}

impl Serialize for CVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        complex_pairs::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for CVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        complex_pairs::deserialize(d).map(CVector)
    }
}

/// Closed interval of nonnegative reals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormInterval {
    pub lower: f64,
    pub upper: f64,
}

impl NormInterval {
    pub fn point(v: f64) -> Self {
        NormInterval { lower: v, upper: v }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lower - tol && v <= self.upper + tol
    }
}

/// A truncated element of ℓ_p: an explicit prefix plus a bound on the norm of
/// the omitted tail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailedSequence {
    pub p: Exponent,
    #[serde(with = "complex_pairs")]
    pub prefix: Vec<C64>,
    pub tail_norm: f64,
}

impl TailedSequence {
    pub fn new(p: Exponent, prefix: Vec<C64>, tail_norm: f64) -> Result<Self> {
        if !(tail_norm >= 0.0) {
            return Err(Error::InvalidArgument(format!("tail_norm must be >= 0, got {tail_norm}")));
        }
        Ok(TailedSequence { p, prefix, tail_norm })
    }

    pub fn finite(p: Exponent, prefix: Vec<C64>) -> Self {
        TailedSequence { p, prefix, tail_norm: 0.0 }
    }

    pub fn from_real(p: Exponent, prefix: &[f64], tail_norm: f64) -> Result<Self> {
        Self::new(p, prefix.iter().map(|&x| c64(x, 0.0)).collect(), tail_norm)
    }

    /// Element of ℓ_p(E) given as a list of vectors, each measured in `inner`.
    pub fn from_vectors(p: Exponent, vectors: &[CVector], inner: Exponent, tail_norm: f64) -> Result<Self> {
        Self::new(p, vectors.iter().map(|v| c64(v.norm(inner), 0.0)).collect(), tail_norm)
    }

    pub fn is_finitely_supported(&self) -> bool {
        self.tail_norm == 0.0
    }

    pub fn norm_interval(&self) -> NormInterval {
        lp_norm(self)
    }
}

/// `[‖prefix‖, (‖prefix‖^p + tail^p)^{1/p}]`, with max semantics for `p = ∞`.
pub fn lp_norm(s: &TailedSequence) -> NormInterval {
    let head = lp_norm_slice(&s.prefix, s.p);
    let upper = match s.p {
        Exponent::Inf => head.max(s.tail_norm),
        Exponent::Finite(_) if s.tail_norm == 0.0 => head,
        Exponent::Finite(p) => lp_norm_of_magnitudes([head, s.tail_norm], Exponent::Finite(p)),
    };
    NormInterval { lower: head, upper: upper.max(head) }
}
