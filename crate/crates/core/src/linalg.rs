//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::lpcore::C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Singular values below `RANK_RTOL * σ_max` are treated as zero.
pub const RANK_RTOL: f64 = 1e-10;

pub fn is_real(m: &CMat) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Pseudo-inverse, range and kernel data of a (small, dense) matrix.
#[derive(Clone, Debug)]
pub struct Factorization {
    /// `A^+`, shape `n × d`.
    pub pinv: CMat,
    /// Orthonormal basis of `ker A`, shape `n × k`.
    pub kernel: CMat,
}

impl Factorization {
    pub fn new(a: &CMat) -> Self {
        let (d, n) = a.shape();
        if d == 0 || n == 0 {
            return Factorization { pinv: CMat::zeros(n, d), kernel: CMat::identity(n, n) };
        }
        // pad to a square matrix so the SVD returns a full right basis
        let padded;
        let work = if d < n {
            let mut m = CMat::zeros(n, n);
            m.view_mut((0, 0), (d, n)).copy_from(a);
            padded = m;
            &padded
        } else {
            a
        };
        let svd = work.clone().svd(true, true);
        let u = svd.u.as_ref().expect("svd u");
        let v_t = svd.v_t.as_ref().expect("svd v_t");
        let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
        let thr = RANK_RTOL * sigma_max;

        let mut pinv = CMat::zeros(n, d);
        let mut kernel_cols: Vec<CVec> = Vec::new();
        for i in 0..v_t.nrows() {
            let s = svd.singular_values[i];
            let v_i: CVec = v_t.row(i).adjoint();
            if sigma_max > 0.0 && s > thr {
                let u_i: CVec = u.column(i).rows(0, d).into_owned();
                pinv += (&v_i * u_i.adjoint()) * C64::new(1.0 / s, 0.0);
            } else {
                kernel_cols.push(v_i);
            }
        }
        let kernel = if kernel_cols.is_empty() { CMat::zeros(n, 0) } else { CMat::from_columns(&kernel_cols) };
        Factorization { pinv, kernel }
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel.ncols()
    }
}

/// Solve a Hermitian positive definite system, falling back to LU.
pub fn solve_hpd(h: &CMat, rhs: &CVec) -> Option<CVec> {
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.solve(rhs));
    }
    h.clone().lu().solve(rhs)
}

/// Real symmetric positive definite solve with diagonal regularization retry.
pub fn solve_spd(h: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.solve(rhs));
    }
    let scale = h.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut reg = h.clone();
    for mu in [1e-12, 1e-9, 1e-6, 1e-3] {
        for i in 0..reg.nrows() {
            reg[(i, i)] = h[(i, i)] + mu * scale;
        }
        if let Some(ch) = reg.clone().cholesky() {
            return Some(ch.solve(rhs));
        }
    }
    None
}
