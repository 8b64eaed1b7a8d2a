//! Seeded experiment suites. Instances run on a bounded thread pool; rows are
//! collected in instance order so reports are byte-identical for a fixed seed.

use std::path::PathBuf;

use anyhow::{bail, Result};
use pcompact::factor::{choi_kim, sinha_karn};
use pcompact::homopoly::{holotype_check, kappa_bounds, monomials, HomPolynomial};
use pcompact::pconvex::{GeneratorSet, MinNormSolver};
use pcompact::{CVector, Exponent, TailedSequence, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::commands::{self, Settings};
use crate::report::{Cell, Format, Report};

pub const SUITES: &[&str] = &["example-a", "example-b", "example-b-e1", "beta", "solver", "holotype", "factor"];

pub const SOLVER_COLUMNS: &[&str] =
    &["instance", "dim", "generators", "q", "primal", "dual", "rel_gap", "residual", "valid", "detail"];
pub const HOLOTYPE_COLUMNS: &[&str] =
    &["instance", "p", "m", "norm_a", "kappa_upper", "inequalities", "max_lower_over_bound", "valid", "detail"];
pub const FACTOR_COLUMNS: &[&str] =
    &["instance", "method", "p", "m", "kappa_upper", "chain", "chain_limit", "max_residual", "valid", "detail"];

/// Everything a suite run depends on. Missing fields take the CLI defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: Option<String>,
    pub p: Option<Vec<Exponent>>,
    pub m_max: Option<usize>,
    pub instances: Option<usize>,
    pub budget: Option<usize>,
    pub tol: Option<f64>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

fn instance_rng(seed: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn cplx(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn vector(rng: &mut ChaCha8Rng, dim: usize) -> CVector {
    CVector::new((0..dim).map(|_| cplx(rng)).collect())
}

fn random_poly(rng: &mut ChaCha8Rng, m: usize, dom: usize, cod: usize) -> HomPolynomial {
    let monos = monomials(dom, m);
    let k = rng.random_range(1..=5);
    let terms: Vec<_> = (0..k)
        .map(|_| (rng.random_range(0..cod), monos[rng.random_range(0..monos.len())].clone(), cplx(rng)))
        .collect();
    HomPolynomial::from_terms(m, dom, cod, terms).expect("valid random terms")
}

fn parallel<T: Send>(s: &Settings, n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Result<Vec<T>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(s.jobs.max(1)).build()?;
    Ok(pool.install(|| (0..n).into_par_iter().map(&f).collect()))
}

pub fn run(name: &str, s: &Settings, m_max: Option<usize>, instances: usize) -> Result<Report> {
    match name {
        "example-a" => commands::example_a(m_max.unwrap_or(4), s),
        "example-b" => commands::example_b(m_max.unwrap_or(6), s),
        "example-b-e1" => commands::example_b_e1(m_max.unwrap_or(50), s),
        "beta" => beta(s, instances),
        "solver" => solver(s, instances),
        "holotype" => holotype(s, instances),
        "factor" => factor(s, instances),
        other => bail!("unknown suite {other:?}; expected one of {}", SUITES.join(", ")),
    }
}

fn beta(s: &Settings, n: usize) -> Result<Report> {
    let mut columns = vec!["instance"];
    columns.extend_from_slice(commands::BETA_COLUMNS);
    let proto = Report::new("suite-beta", commands::BETA_COLUMNS);
    let rows = parallel(s, n, |i| {
        let mut rng = instance_rng(s.seed, i);
        let p = s.p[i % s.p.len()];
        let len = rng.random_range(1..=30);
        let ratio = rng.random_range(0.1..0.9);
        let prefix: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..1.0)).collect();
        let tail = rng.random_range(0.05..1.0);
        let row = match TailedSequence::from_real(p, &prefix, tail) {
            Ok(seq) => commands::beta_row(&proto, &seq, Some(ratio), s.eps, s.tol),
            Err(e) => vec![Cell::Empty; proto.columns.len() - 2]
                .into_iter()
                .chain([false.into(), e.to_string().into()])
                .collect(),
        };
        std::iter::once(Cell::from(i)).chain(row).collect::<Vec<_>>()
    })?;
    let mut r = Report::new("suite-beta", &columns);
    rows.into_iter().for_each(|row| r.push(row));
    Ok(r)
}

fn solver(s: &Settings, n: usize) -> Result<Report> {
    let qs = [Exponent::Finite(1.5), Exponent::Finite(2.0), Exponent::Finite(3.0), Exponent::Inf];
    let rows = parallel(s, n, |i| {
        let mut rng = instance_rng(s.seed, i);
        let d = rng.random_range(1..=16);
        let k = rng.random_range(1..=40);
        let q = qs[i % qs.len()];
        let gens: Vec<CVector> = (0..k).map(|_| vector(&mut rng, d)).collect();
        let mut x = CVector::zeros(d);
        for g in &gens {
            x.axpy(cplx(&mut rng), g);
        }
        let head: Vec<Cell> = vec![i.into(), d.into(), k.into(), q.to_string().into()];
        let res = MinNormSolver::new(d, &gens, q, s.tol).and_then(|sv| match sv.solve(&x) {
            Err(pcompact::Error::NoConvergence(b)) => Ok(*b),
            r => r,
        });
        let tail: Vec<Cell> = match res.and_then(|(mc, dc)| {
            let g = GeneratorSet::new(gens.clone(), q.conjugate())?;
            Ok((mc.clone(), dc.verified_value(&g, &x)?))
        }) {
            Ok((mc, dual)) => {
                let gap = (mc.alpha_q_norm - dual) / mc.alpha_q_norm.max(f64::MIN_POSITIVE);
                let ok = gap <= 1e-6 && mc.residual <= 1e-8 * x.norm2().max(1.0);
                vec![mc.alpha_q_norm.into(), dual.into(), gap.into(), mc.residual.into(), ok.into(), Cell::Empty]
            }
            Err(e) => vec![Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, false.into(), e.to_string().into()],
        };
        head.into_iter().chain(tail).collect::<Vec<_>>()
    })?;
    let mut r = Report::new("suite-solver", SOLVER_COLUMNS);
    rows.into_iter().for_each(|row| r.push(row));
    Ok(r)
}

fn holotype(s: &Settings, n: usize) -> Result<Report> {
    let rows = parallel(s, n, |i| {
        let mut rng = instance_rng(s.seed, i);
        let p = s.p[i % s.p.len()];
        let m = rng.random_range(2..=3);
        let dom = rng.random_range(1..=3);
        let cod = rng.random_range(1..=3);
        let poly = random_poly(&mut rng, m, dom, cod);
        let a = vector(&mut rng, dom).scale_real(rng.random_range(0.1..2.0));
        let head: Vec<Cell> = vec![i.into(), p.to_string().into(), m.into()];
        let tail: Vec<Cell> = match holotype_check(&poly, &a, p, &s.kappa()) {
            Ok(h) => {
                let worst = h
                    .rows
                    .iter()
                    .map(|r| {
                        if r.bound > 0.0 {
                            r.lower / r.bound
                        } else if r.lower > 0.0 {
                            f64::INFINITY
                        } else {
                            0.0
                        }
                    })
                    .fold(0.0, f64::max);
                vec![
                    h.norm_a.into(),
                    h.kappa_upper.into(),
                    h.rows.len().into(),
                    worst.into(),
                    (h.violations() == 0).into(),
                    Cell::Empty,
                ]
            }
            Err(e) => vec![Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, false.into(), e.to_string().into()],
        };
        head.into_iter().chain(tail).collect::<Vec<_>>()
    })?;
    let mut r = Report::new("suite-holotype", HOLOTYPE_COLUMNS);
    rows.into_iter().for_each(|row| r.push(row));
    Ok(r)
}

fn factor(s: &Settings, n: usize) -> Result<Report> {
    let rows = parallel(s, n, |i| {
        let mut rng = instance_rng(s.seed, i);
        let p = s.p[i % s.p.len()];
        let m = rng.random_range(1..=3);
        let poly = random_poly(&mut rng, m, 3, 2);
        let head = |method: &str| -> Vec<Cell> { vec![i.into(), method.into(), p.to_string().into(), m.into()] };
        let mut out = Vec::new();
        let ck: Vec<Cell> = match choi_kim(&poly, p, s.eps, &s.kappa(), s.tol.max(1e-12)) {
            Ok(ck) => {
                let c = &ck.report;
                vec![
                    c.kappa_upper.into(),
                    c.chain.into(),
                    (c.kappa_upper + 2.0 * s.eps).into(),
                    c.max_residual.into(),
                    c.valid().into(),
                    Cell::Empty,
                ]
            }
            Err(e) => vec![Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, false.into(), e.to_string().into()],
        };
        out.push(head("choi-kim").into_iter().chain(ck).collect::<Vec<_>>());
        if m == 1 {
            let cols: Vec<CVector> = (0..3).map(|j| poly.eval(&CVector::basis(3, j)).expect("linear map")).collect();
            let sk: Vec<Cell> = match kappa_bounds(&poly, p, &s.kappa()).and_then(|kb| {
                sinha_karn(
                    &cols,
                    poly.dom_norm,
                    &kb.upper_witness.hull_generators(),
                    &s.kappa().probes,
                    s.tol.max(1e-9),
                )
                .map(|sk| (kb, sk))
            }) {
                Ok((kb, sk)) => {
                    let t = &sk.report;
                    vec![
                        kb.upper.into(),
                        (t.ty_norm_upper * t.theta_norm_upper).into(),
                        (kb.upper * (1.0 + s.tol)).into(),
                        t.max_residual.into(),
                        t.valid().into(),
                        Cell::Empty,
                    ]
                }
                Err(e) => vec![Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, false.into(), e.to_string().into()],
            };
            out.push(head("sinha-karn").into_iter().chain(sk).collect());
        }
        out
    })?;
    let mut r = Report::new("suite-factor", FACTOR_COLUMNS);
    rows.into_iter().flatten().for_each(|row| r.push(row));
    Ok(r)
}
