//! Minimum ℓ_q-norm representation `min ‖α‖_q  s.t.  Aα = x` with a dual bound.
//!
//! The generator matrix is split into independent blocks (connected components
//! of its row/column sparsity graph); each block is factorized once so the same
//! solver can be reused for many right-hand sides.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, NonnegativeConeT, SecondOrderConeT, SolverStatus, SupportedConeT,
    ZeroConeT,
};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, Factorization};
use crate::lpcore::{lp_norm_of_magnitudes, CVector, Exponent, C64};

use super::{DualCertificate, MembershipCertificate};

const IRLS_ITERS: usize = 80;
const NEWTON_ITERS: usize = 60;

#[derive(Clone, Debug)]
struct Block {
    rows: Vec<usize>,
    cols: Vec<usize>,
    a: CMat,
    fact: Factorization,
    real: bool,
}

struct BlockSolution {
    alpha: CVec,
    lambda: CVec,
    dual: f64,
}

/// Reusable minimum-norm solver for a fixed generator matrix and exponent `q`.
#[derive(Clone, Debug)]
pub struct MinNormSolver {
    dim: usize,
    n: usize,
    q: Exponent,
    tol: f64,
    blocks: Vec<Block>,
    row_block: Vec<Option<usize>>,
}

impl MinNormSolver {
    /// `gens` are the columns `x_n`; `q` is the coefficient exponent.
    pub fn new(dim: usize, gens: &[CVector], q: Exponent, tol: f64) -> Result<Self> {
        for g in gens {
            g.check_dim(dim)?;
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        let n = gens.len();
        let cols: Vec<Vec<(usize, C64)>> = gens
            .iter()
            .map(|g| {
                g.coords().iter().enumerate().filter(|(_, z)| **z != C64::new(0.0, 0.0)).map(|(i, z)| (i, *z)).collect()
            })
            .collect();

        // union-find over rows (0..dim) and columns (dim..dim+n)
        let mut parent: Vec<usize> = (0..dim + n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let mut row_used = vec![false; dim];
        for (j, col) in cols.iter().enumerate() {
            for &(i, _) in col {
                row_used[i] = true;
                let (a, b) = (find(&mut parent, i), find(&mut parent, dim + j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
        for i in 0..dim {
            if row_used[i] {
                let r = find(&mut parent, i);
                groups.entry(r).or_default().0.push(i);
            }
        }
        for (j, col) in cols.iter().enumerate() {
            if !col.is_empty() {
                let r = find(&mut parent, dim + j);
                groups.entry(r).or_default().1.push(j);
            }
        }
        let mut row_block = vec![None; dim];
        let mut blocks = Vec::with_capacity(groups.len());
        for (_, (rows, bcols)) in groups {
            let mut a = CMat::zeros(rows.len(), bcols.len());
            for (k, &j) in bcols.iter().enumerate() {
                for &(i, z) in &cols[j] {
                    let r = rows.binary_search(&i).expect("row in block");
                    a[(r, k)] = z;
                }
            }
            for &i in &rows {
                row_block[i] = Some(blocks.len());
            }
            let fact = Factorization::new(&a);
            let real = linalg::is_real(&a);
            blocks.push(Block { rows, cols: bcols, a, fact, real });
        }
        Ok(MinNormSolver { dim, n, q, tol, blocks, row_block })
    }

    pub fn q(&self) -> Exponent {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_generators(&self) -> usize {
        self.n
    }

    /// Solve for one target point. On `NoConvergence` the boxed certificates
    /// are still individually valid (feasible primal, normalized dual).
    pub fn solve(&self, x: &CVector) -> Result<(MembershipCertificate, DualCertificate)> {
        x.check_dim(self.dim)?;
        let xn = x.norm2();
        let feas_tol = self.tol * xn.max(1.0);
        let mut lost = 0.0f64;
        let mut touched = Vec::new();
        for (i, z) in x.coords().iter().enumerate() {
            if *z == C64::new(0.0, 0.0) {
                continue;
            }
            match self.row_block[i] {
                Some(b) => touched.push(b),
                None => lost += z.norm_sqr(),
            }
        }
        if lost.sqrt() > feas_tol {
            return Err(Error::Infeasible { residual: lost.sqrt() });
        }
        touched.sort_unstable();
        touched.dedup();

        let p = self.q.conjugate();
        let mut alpha = vec![C64::new(0.0, 0.0); self.n];
        let mut sols = Vec::with_capacity(touched.len());
        let mut res2 = lost;
        for &bi in &touched {
            let b = &self.blocks[bi];
            let xc = CVec::from_fn(b.rows.len(), |i, _| x[b.rows[i]]);
            let s = self.solve_block(b, &xc, feas_tol)?;
            for (k, &j) in b.cols.iter().enumerate() {
                alpha[j] = s.alpha[k];
            }
            res2 += (&b.a * &s.alpha - &xc).norm_squared();
            sols.push((xc, s));
        }

        // Combine block duals: weights t maximize Σ t_c w_c over ‖t‖_p ≤ 1,
        // then renormalize the assembled λ exactly.
        let w: Vec<f64> = sols.iter().map(|(_, s)| s.dual.max(0.0)).collect();
        let t = holder_weights(&w, p);
        let mut lambda = CVector::zeros(self.dim);
        let mut adj_mags = Vec::new();
        let mut pairing = 0.0;
        for ((&bi, (xc, s)), &tc) in touched.iter().zip(&sols).zip(&t) {
            if tc == 0.0 {
                continue;
            }
            let b = &self.blocks[bi];
            let lc = &s.lambda * C64::new(tc, 0.0);
            adj_mags.extend((b.a.adjoint() * &lc).iter().map(|z| z.norm()));
            pairing += lc.dotc(xc).re;
            for (k, &i) in b.rows.iter().enumerate() {
                lambda[i] = lc[k];
            }
        }
        let nrm = lp_norm_of_magnitudes(adj_mags, p);
        let value = if nrm > 0.0 && nrm.is_finite() {
            lambda = lambda.scale_real(1.0 / nrm);
            pairing / nrm
        } else {
            lambda = CVector::zeros(self.dim);
            0.0
        };

        let residual = res2.sqrt();
        let alpha_q_norm = lp_norm_of_magnitudes(alpha.iter().map(|z| z.norm()), self.q);
        let membership = MembershipCertificate { alpha, residual, alpha_q_norm };
        let dual = DualCertificate { lambda, value };
        let gap = alpha_q_norm - value;
        if gap > 10.0 * self.tol * alpha_q_norm.max(1.0) || residual > feas_tol {
            return Err(Error::NoConvergence(Box::new((membership, dual))));
        }
        Ok((membership, dual))
    }

    fn solve_block(&self, b: &Block, x: &CVec, feas_tol: f64) -> Result<BlockSolution> {
        let p = self.q.conjugate();
        if x.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            return Ok(BlockSolution {
                alpha: CVec::zeros(b.cols.len()),
                lambda: CVec::zeros(b.rows.len()),
                dual: 0.0,
            });
        }
        let alpha0 = &b.fact.pinv * x;
        let res = (&b.a * &alpha0 - x).norm();
        if res > feas_tol {
            return Err(Error::Infeasible { residual: res });
        }

        let mut conic_lambda = None;
        let alpha = if b.fact.kernel_dim() == 0 || self.q == Exponent::Finite(2.0) {
            alpha0
        } else {
            match self.q {
                Exponent::Finite(q) if q > 1.0 => smooth_min_norm(&alpha0, &b.fact.kernel, q),
                _ => {
                    let r = conic_solve(b, x, self.q, self.tol)?;
                    conic_lambda = Some(r.lambda);
                    // project back onto the affine solution set
                    let corr = &b.fact.pinv * (x - &b.a * &r.alpha);
                    r.alpha + corr
                }
            }
        };

        let u = holder_dual(&alpha, self.q);
        let lam = b.fact.pinv.adjoint() * u;
        let mut best = normalize_dual(&b.a, &lam, x, p);
        if let Some(lam) = conic_lambda {
            for sign in [1.0, -1.0] {
                let cand = normalize_dual(&b.a, &(&lam * C64::new(sign, 0.0)), x, p);
                if cand.0 > best.0 {
                    best = cand;
                }
            }
        }
        Ok(BlockSolution { alpha, lambda: best.1, dual: best.0 })
    }
}

/// Unit vector `u` in ℓ_p with `Re⟨u, α⟩ = ‖α‖_q` (Hölder equality case).
pub fn holder_dual_vector(alpha: &[C64], q: Exponent) -> Vec<C64> {
    holder_dual(&CVec::from_column_slice(alpha), q).iter().copied().collect()
}

fn holder_dual(alpha: &CVec, q: Exponent) -> CVec {
    let n = alpha.len();
    let phase = |z: C64| if z.norm() == 0.0 { C64::new(0.0, 0.0) } else { z / z.norm() };
    match q {
        Exponent::Inf => {
            let mut k = 0;
            let mut best = -1.0;
            for (i, z) in alpha.iter().enumerate() {
                if z.norm() > best {
                    best = z.norm();
                    k = i;
                }
            }
            let mut u = CVec::zeros(n);
            if n > 0 {
                u[k] = phase(alpha[k]);
            }
            u
        }
        Exponent::Finite(1.0) => alpha.map(phase),
        Exponent::Finite(q) => {
            let nq = lp_norm_of_magnitudes(alpha.iter().map(|z| z.norm()), Exponent::Finite(q));
            if nq == 0.0 {
                return CVec::zeros(n);
            }
            alpha.map(|z| phase(z) * (z.norm() / nq).powf(q - 1.0))
        }
    }
}

/// Maximizer of `Σ t_c w_c` over `t ≥ 0`, `‖t‖_p ≤ 1`, for `w ≥ 0`.
fn holder_weights(w: &[f64], p: Exponent) -> Vec<f64> {
    let q = p.conjugate();
    let wq = lp_norm_of_magnitudes(w.iter().copied(), q);
    if wq == 0.0 {
        return vec![0.0; w.len()];
    }
    match p {
        Exponent::Inf => vec![1.0; w.len()],
        Exponent::Finite(1.0) => {
            let mut t = vec![0.0; w.len()];
            let k = (0..w.len()).fold(0, |k, i| if w[i] > w[k] { i } else { k });
            t[k] = 1.0;
            t
        }
        Exponent::Finite(_) => {
            let qv = q.value();
            w.iter().map(|&wc| (wc / wq).powf(qv - 1.0)).collect()
        }
    }
}

/// Rescale λ so that `‖A^H λ‖_p = 1`; returns `(Re⟨λ, x⟩, λ)`.
fn normalize_dual(a: &CMat, lambda: &CVec, x: &CVec, p: Exponent) -> (f64, CVec) {
    let w = a.adjoint() * lambda;
    let nrm = lp_norm_of_magnitudes(w.iter().map(|z| z.norm()), p);
    if !(nrm > 0.0) || !nrm.is_finite() {
        return (0.0, CVec::zeros(lambda.len()));
    }
    let lam = lambda / C64::new(nrm, 0.0);
    let value = lam.dotc(x).re;
    (value, lam)
}

/// `min ‖α0 + N z‖_q` for `1 < q < ∞` by reweighted least squares followed
/// by a damped Newton polish in real coordinates.
fn smooth_min_norm(alpha0: &CVec, kernel: &CMat, q: f64) -> CVec {
    let scale = alpha0.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if scale == 0.0 {
        return alpha0.clone();
    }
    let a0 = alpha0 / C64::new(scale, 0.0);
    let k = kernel.ncols();
    let nh = kernel.adjoint();
    let mut z = CVec::zeros(k);
    let mut alpha = a0.clone();
    let mut eps = 1.0;
    let theta = if q > 2.0 { 1.0 / (q - 1.0) } else { 1.0 };

    for _ in 0..IRLS_ITERS {
        let w: Vec<f64> = alpha.iter().map(|a| (a.norm_sqr() + eps * eps).powf((q - 2.0) / 2.0)).collect();
        let mut wn = kernel.clone();
        for (i, mut row) in wn.row_iter_mut().enumerate() {
            row *= C64::new(w[i], 0.0);
        }
        let h = &nh * &wn;
        let mut wa = a0.clone();
        for i in 0..wa.len() {
            wa[i] *= w[i];
        }
        let rhs = -(&nh * wa);
        let Some(z_new) = linalg::solve_hpd(&h, &rhs) else { break };
        let z_next = &z + (z_new - &z) * C64::new(theta, 0.0);
        let step = (&z_next - &z).norm();
        z = z_next;
        alpha = &a0 + kernel * &z;
        if step < 1e-3 * eps || step < 1e-14 {
            eps *= 0.3;
        }
        if eps < 1e-9 {
            break;
        }
    }

    let f = |al: &CVec| al.iter().map(|a| a.norm().powf(q)).sum::<f64>();
    let nr = kernel.map(|c| c.re);
    let ni = kernel.map(|c| c.im);
    let n = a0.len();
    // J maps y = (Re z, Im z) to (Re α, Im α)
    let mut jac = nalgebra::DMatrix::<f64>::zeros(2 * n, 2 * k);
    for i in 0..n {
        for j in 0..k {
            jac[(i, j)] = nr[(i, j)];
            jac[(i, k + j)] = -ni[(i, j)];
            jac[(n + i, j)] = ni[(i, j)];
            jac[(n + i, k + j)] = nr[(i, j)];
        }
    }
    let mut fval = f(&alpha);
    for _ in 0..NEWTON_ITERS {
        let rmax = alpha.iter().fold(0.0f64, |m, a| m.max(a.norm()));
        let floor = 1e-12 * rmax.max(1e-300);
        let mut g = nalgebra::DVector::<f64>::zeros(2 * n);
        let mut hd = nalgebra::DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            let (a, b) = (alpha[i].re, alpha[i].im);
            let r = alpha[i].norm().max(floor);
            let c1 = q * r.powf(q - 2.0);
            let c2 = q * (q - 2.0) * r.powf(q - 4.0);
            g[i] = c1 * a;
            g[n + i] = c1 * b;
            hd[(i, i)] = c1 + c2 * a * a;
            hd[(n + i, n + i)] = c1 + c2 * b * b;
            hd[(i, n + i)] = c2 * a * b;
            hd[(n + i, i)] = c2 * a * b;
        }
        let grad = jac.transpose() * &g;
        let hess = jac.transpose() * &hd * &jac;
        let Some(dir) = linalg::solve_spd(&hess, &(-&grad)) else { break };
        let decrement = -grad.dot(&dir);
        if !(decrement > 1e-30 * fval.max(1e-300)) {
            break;
        }
        let dz = CVec::from_fn(k, |j, _| C64::new(dir[j], dir[k + j]));
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let zt = &z + &dz * C64::new(t, 0.0);
            let at = &a0 + kernel * &zt;
            let ft = f(&at);
            if ft <= fval - 1e-4 * t * decrement || (ft < fval && t < 1e-3) {
                z = zt;
                alpha = at;
                fval = ft;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    alpha * C64::new(scale, 0.0)
}

fn conic_settings(tol: f64) -> DefaultSettings<f64> {
    let t = (0.1 * tol).clamp(1e-12, 1e-8);
    DefaultSettings {
        verbose: false,
        tol_gap_abs: t,
        tol_gap_rel: t,
        tol_feas: t,
        tol_ktratio: 1e-9,
        max_iter: 400,
        presolve_enable: false,
        max_threads: 1,
        ..DefaultSettings::default()
    }
}

struct ConicResult {
    alpha: CVec,
    lambda: CVec,
}

/// q ∈ {1, ∞} via a conic program (LP for real data, SOCP for complex).
fn conic_solve(b: &Block, x: &CVec, q: Exponent, tol: f64) -> Result<ConicResult> {
    let d = b.a.nrows();
    let n = b.a.ncols();
    let scale = x.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let xs = x / C64::new(scale, 0.0);
    let inf = q.is_inf();
    let nt = if inf { 1 } else { n };
    let t_of = |j: usize| if inf { 0 } else { j };
    let nv = if b.real { nt + n } else { nt + 2 * n };
    let (ar, ai) = (b.a.map(|c| c.re), b.a.map(|c| c.im));

    let (mut ii, mut jj, mut vv) = (Vec::new(), Vec::new(), Vec::new());
    let mut rhs = Vec::new();
    let push = |i: usize, j: usize, v: f64, ii: &mut Vec<usize>, jj: &mut Vec<usize>, vv: &mut Vec<f64>| {
        if v != 0.0 {
            ii.push(i);
            jj.push(j);
            vv.push(v);
        }
    };
    let mut row = 0;
    // equality rows
    let eq_rows = if b.real { d } else { 2 * d };
    for i in 0..d {
        for j in 0..n {
            push(row, nt + j, ar[(i, j)], &mut ii, &mut jj, &mut vv);
            if !b.real {
                push(row, nt + n + j, -ai[(i, j)], &mut ii, &mut jj, &mut vv);
            }
        }
        rhs.push(xs[i].re);
        row += 1;
    }
    if !b.real {
        for i in 0..d {
            for j in 0..n {
                push(row, nt + j, ai[(i, j)], &mut ii, &mut jj, &mut vv);
                push(row, nt + n + j, ar[(i, j)], &mut ii, &mut jj, &mut vv);
            }
            rhs.push(xs[i].im);
            row += 1;
        }
    }
    let mut cones: Vec<SupportedConeT<f64>> = vec![ZeroConeT(eq_rows)];
    if b.real {
        for j in 0..n {
            push(row, nt + j, 1.0, &mut ii, &mut jj, &mut vv);
            push(row, t_of(j), -1.0, &mut ii, &mut jj, &mut vv);
            rhs.push(0.0);
            row += 1;
            push(row, nt + j, -1.0, &mut ii, &mut jj, &mut vv);
            push(row, t_of(j), -1.0, &mut ii, &mut jj, &mut vv);
            rhs.push(0.0);
            row += 1;
        }
        cones.push(NonnegativeConeT(2 * n));
    } else {
        for j in 0..n {
            push(row, t_of(j), -1.0, &mut ii, &mut jj, &mut vv);
            push(row + 1, nt + j, -1.0, &mut ii, &mut jj, &mut vv);
            push(row + 2, nt + n + j, -1.0, &mut ii, &mut jj, &mut vv);
            rhs.extend([0.0, 0.0, 0.0]);
            row += 3;
            cones.push(SecondOrderConeT(3));
        }
    }
    let a_csc = CscMatrix::new_from_triplets(row, nv, ii, jj, vv);
    let p_csc = CscMatrix::<f64>::zeros((nv, nv));
    let mut c = vec![0.0; nv];
    for v in c.iter_mut().take(nt) {
        *v = 1.0;
    }
    let mut solver = DefaultSolver::new(&p_csc, &c, &a_csc, &rhs, &cones, conic_settings(tol))
        .map_err(|e| Error::Solver(e.to_string()))?;
    solver.solve();
    let sol = &solver.solution;
    match sol.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {}
        st => return Err(Error::Solver(format!("{st:?}"))),
    }
    let alpha = CVec::from_fn(n, |j, _| {
        let re = sol.x[nt + j];
        let im = if b.real { 0.0 } else { sol.x[nt + n + j] };
        C64::new(re, im) * scale
    });
    let lambda = CVec::from_fn(d, |i, _| {
        let re = -sol.z[i];
        let im = if b.real { 0.0 } else { -sol.z[d + i] };
        C64::new(re, im)
    });
    Ok(ConicResult { alpha, lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpcore::c64;

    fn real_vecs(rows: &[&[f64]]) -> Vec<CVector> {
        rows.iter().map(|r| CVector::from_real(r)).collect()
    }

    #[test]
    fn basis_boundary_point() {
        let gens = real_vecs(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let s = MinNormSolver::new(2, &gens, Exponent::Finite(2.0), 1e-9).unwrap();
        let (m, d) = s.solve(&CVector::from_real(&[0.6, 0.8])).unwrap();
        assert!((m.alpha_q_norm - 1.0).abs() < 1e-12);
        assert!((d.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_generator_all_exponents() {
        let gens = real_vecs(&[&[2.0, 0.0]]);
        for q in [Exponent::Finite(1.0), Exponent::Finite(1.5), Exponent::Finite(3.0), Exponent::Inf] {
            let s = MinNormSolver::new(2, &gens, q, 1e-9).unwrap();
            let (m, d) = s.solve(&CVector::from_real(&[1.0, 0.0])).unwrap();
            assert!((m.alpha[0] - c64(0.5, 0.0)).norm() < 1e-12);
            assert!((m.alpha_q_norm - 0.5).abs() < 1e-12);
            assert!((d.value - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn outside_span_is_infeasible() {
        let gens = real_vecs(&[&[1.0, 0.0]]);
        let s = MinNormSolver::new(2, &gens, Exponent::Finite(2.0), 1e-9).unwrap();
        assert!(matches!(s.solve(&CVector::from_real(&[0.0, 1.0])), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn redundant_generators_each_exponent() {
        // x = (1,1) from e1, e2, (1,1): closed forms per q
        let gens = real_vecs(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let x = CVector::from_real(&[1.0, 1.0]);
        // q = ∞: α = (1/2)(1,1,1) ⇒ 1/2 ... but (0,0,1) gives 1; best is t with
        // α=(s,s,1-s): max(s,1-s) min at 1/2 ⇒ 1/2
        let cases = [(Exponent::Inf, 0.5), (Exponent::Finite(1.0), 1.0)];
        for (q, want) in cases {
            let s = MinNormSolver::new(2, &gens, q, 1e-9).unwrap();
            let (m, d) = s.solve(&x).unwrap();
            assert!((m.alpha_q_norm - want).abs() < 1e-7, "{q}: {}", m.alpha_q_norm);
            assert!(d.value <= m.alpha_q_norm + 1e-12);
            assert!((d.value - want).abs() < 1e-7);
        }
        // q = 2: α = (s,s,1-s) minimizing 2s²+(1-s)² ⇒ s=1/3, norm √(2/9+4/9)
        let s = MinNormSolver::new(2, &gens, Exponent::Finite(2.0), 1e-9).unwrap();
        let (m, _) = s.solve(&x).unwrap();
        assert!((m.alpha_q_norm - (6.0f64 / 9.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn complex_instance_gap_closes() {
        let gens = vec![
            CVector::new(vec![c64(1.0, 1.0), c64(0.0, -1.0)]),
            CVector::new(vec![c64(0.5, 0.0), c64(2.0, 0.5)]),
            CVector::new(vec![c64(-1.0, 0.3), c64(0.2, 0.2)]),
        ];
        let x = CVector::new(vec![c64(0.3, -0.2), c64(1.0, 0.4)]);
        for q in [Exponent::Finite(1.5), Exponent::Finite(3.0), Exponent::Inf, Exponent::Finite(1.0)] {
            let s = MinNormSolver::new(2, &gens, q, 1e-9).unwrap();
            let (m, d) = s.solve(&x).unwrap();
            assert!(m.residual < 1e-9);
            assert!(m.alpha_q_norm - d.value < 1e-7, "{q}: {} vs {}", m.alpha_q_norm, d.value);
        }
    }

    #[test]
    fn diagonal_blocks_combine() {
        let gens = real_vecs(&[&[2.0, 0.0, 0.0], &[0.0, 3.0, 0.0], &[0.0, 0.0, 4.0]]);
        let x = CVector::from_real(&[1.0, 1.0, 1.0]);
        for q in [Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Finite(3.0), Exponent::Inf] {
            let s = MinNormSolver::new(3, &gens, q, 1e-9).unwrap();
            let (m, d) = s.solve(&x).unwrap();
            let want = lp_norm_of_magnitudes([0.5, 1.0 / 3.0, 0.25], q);
            assert!((m.alpha_q_norm - want).abs() < 1e-12);
            assert!((d.value - want).abs() < 1e-10, "{q}: {} vs {want}", d.value);
        }
    }
}
