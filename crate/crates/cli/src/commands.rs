//! One report per subcommand. Computation errors become invalid rows; only
//! unreadable input aborts.

use std::path::Path;

use anyhow::{Context, Result};
use pcompact::counterex::{
    build_example_a, build_example_b, example_b_at_e1_certificate, family_kappa_closed_form, SigmaPartition,
};
use pcompact::factor::{choi_kim, sinha_karn};
use pcompact::homopoly::{kappa_bounds, FamilyKind, HomPolynomial, KappaBound, KappaOptions, ProbeOptions};
use pcompact::pconvex::{
    best_disjoint_certificate, beta_construct_lp, merge_diagonal, mp_lower_disjoint, mp_upper_search, BetaOptions,
    BoundPair, GeneratorSet, GeometricTail, LowerWitness, SearchOptions,
};
use pcompact::taylor::{
    pcompact_at, radius_window, seminorm_e, summability_at_zero, NullSequence, TaylorModel, Verdict,
};
use pcompact::{CVector, Exponent, TailedSequence};
use serde::Deserialize;

use crate::report::{Cell, Report};

#[derive(Clone, Debug)]
pub struct Settings {
    pub p: Vec<Exponent>,
    pub eps: f64,
    pub tol: f64,
    pub budget: usize,
    pub seed: u64,
    pub jobs: usize,
}

impl Settings {
    pub fn kappa(&self) -> KappaOptions {
        KappaOptions {
            probes: ProbeOptions { samples: self.budget, seed: self.seed, ..ProbeOptions::default() },
            search: SearchOptions { tol: self.tol, ..SearchOptions::default() },
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Row with every numeric cell empty, `valid = false` and the error in `detail`.
fn failed_row(report: &Report, fixed: &[(&str, Cell)], err: impl std::fmt::Display) -> Vec<Cell> {
    report
        .columns
        .iter()
        .map(|&c| match c {
            "valid" => Cell::Bool(false),
            "detail" => Cell::Text(err.to_string()),
            _ => fixed.iter().find(|(k, _)| *k == c).map_or(Cell::Empty, |(_, v)| v.clone()),
        })
        .collect()
}

fn gap(lower: f64, upper: f64) -> f64 {
    if lower > 0.0 {
        upper / lower
    } else if upper == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

#[derive(Deserialize)]
pub struct PointsInput {
    pub points: Vec<CVector>,
}

pub const MP_COLUMNS: &[&str] = &["p", "points", "dim", "lower", "upper", "gap_ratio", "mode", "valid", "detail"];

/// Certified `[lower, upper]` for `m_p` of a finite point set, or a check of
/// a stored certificate.
pub fn mp(input: &Path, certificate: Option<&Path>, cert_out: Option<&Path>, s: &Settings) -> Result<Report> {
    let pts: PointsInput = read_json(input)?;
    let mut r = Report::new("mp", MP_COLUMNS);
    let dim = pts.points.first().map_or(0, |x| x.dim());
    if let Some(path) = certificate {
        let cert: BoundPair = read_json(path)?;
        let p = cert.upper_witness.generators.p;
        let fixed = [("p", Cell::from(p.to_string())), ("points", pts.points.len().into()), ("dim", dim.into())];
        match check_mp(&pts.points, &cert, s.tol) {
            Ok((lo, hi)) => r.push(vec![
                p.to_string().into(),
                pts.points.len().into(),
                dim.into(),
                lo.into(),
                hi.into(),
                gap(lo, hi).into(),
                "checked".into(),
                true.into(),
                Cell::Empty,
            ]),
            Err(e) => {
                let row = failed_row(&r, &fixed, e);
                r.push(row);
            }
        }
        return Ok(r);
    }
    let mut first = None;
    for &p in &s.p {
        let fixed = [("p", Cell::from(p.to_string())), ("points", pts.points.len().into()), ("dim", dim.into())];
        let res = (|| -> pcompact::Result<BoundPair> {
            let lower = LowerWitness::from_points(pts.points.clone(), p);
            let upper = mp_upper_search(&pts.points, p, &SearchOptions { tol: s.tol, ..SearchOptions::default() })?;
            Ok(BoundPair::new(lower, upper))
        })();
        match res.and_then(|b| check_mp(&pts.points, &b, s.tol).map(|v| (b, v))) {
            Ok((b, (lo, hi))) => {
                r.push(vec![
                    p.to_string().into(),
                    pts.points.len().into(),
                    dim.into(),
                    lo.into(),
                    hi.into(),
                    gap(lo, hi).into(),
                    "computed".into(),
                    (lo <= hi * (1.0 + s.tol)).into(),
                    Cell::Empty,
                ]);
                first.get_or_insert(b);
            }
            Err(e) => {
                let row = failed_row(&r, &fixed, e);
                r.push(row);
            }
        }
    }
    if let (Some(path), Some(b)) = (cert_out, first) {
        write_json(path, &b)?;
    }
    Ok(r)
}

/// Re-derive both sides of a stored `m_p` certificate against `points`.
fn check_mp(points: &[CVector], cert: &BoundPair, tol: f64) -> pcompact::Result<(f64, f64)> {
    for w in &cert.lower_witness.points {
        if !points.iter().any(|x| (x - w).norm2() <= tol * x.norm2().max(1.0)) {
            return Err(pcompact::Error::InvalidCertificate("lower witness uses a point outside the set".into()));
        }
    }
    let lo = cert.lower_witness.verify()?;
    let hi = cert.upper_witness.verify(points, tol)?;
    if (lo - cert.lower).abs() > 1e-12 * lo.max(1.0) || (hi - cert.upper).abs() > 1e-12 * hi.max(1.0) {
        return Err(pcompact::Error::InvalidCertificate("declared bounds differ from the witnesses".into()));
    }
    if lo > hi * (1.0 + tol) {
        return Err(pcompact::Error::InvalidCertificate(format!("lower {lo} exceeds upper {hi}")));
    }
    Ok((lo, hi))
}

pub const KP_COLUMNS: &[&str] =
    &["p", "m", "dom", "cod", "lower", "upper", "gap_ratio", "rule", "mode", "valid", "detail"];

fn kp_row(poly: &HomPolynomial, kb: &KappaBound, mode: &str, tol: f64) -> Vec<Cell> {
    vec![
        kb.p.to_string().into(),
        poly.degree().into(),
        poly.dom().into(),
        poly.cod().into(),
        kb.lower.into(),
        kb.upper.into(),
        kb.gap_ratio().into(),
        format!("{:?}", kb.upper_witness.rule).to_lowercase().into(),
        mode.into(),
        (kb.lower <= kb.upper * (1.0 + tol)).into(),
        Cell::Empty,
    ]
}

/// Certified `[lower, upper]` for `κ_p` of a polynomial.
pub fn kp(input: &Path, certificate: Option<&Path>, cert_out: Option<&Path>, s: &Settings) -> Result<Report> {
    let poly: HomPolynomial = read_json(input)?;
    let mut r = Report::new("kp", KP_COLUMNS);
    let fixed = |p: Exponent| {
        [
            ("p", Cell::from(p.to_string())),
            ("m", poly.degree().into()),
            ("dom", poly.dom().into()),
            ("cod", poly.cod().into()),
        ]
    };
    if let Some(path) = certificate {
        let kb: KappaBound = read_json(path)?;
        match kb.verify(&poly, s.tol.max(1e-8)) {
            Ok(_) => r.push(kp_row(&poly, &kb, "checked", s.tol)),
            Err(e) => {
                let row = failed_row(&r, &fixed(kb.p), e);
                r.push(row);
            }
        }
        return Ok(r);
    }
    let mut first = None;
    for &p in &s.p {
        match kappa_bounds(&poly, p, &s.kappa()).and_then(|kb| kb.verify(&poly, s.tol.max(1e-8)).map(|_| kb)) {
            Ok(kb) => {
                r.push(kp_row(&poly, &kb, "computed", s.tol));
                first.get_or_insert(kb);
            }
            Err(e) => {
                let row = failed_row(&r, &fixed(p), e);
                r.push(row);
            }
        }
    }
    if let (Some(path), Some(kb)) = (cert_out, first) {
        write_json(path, &kb)?;
    }
    Ok(r)
}

#[derive(Deserialize)]
pub struct BetaInput {
    #[serde(flatten)]
    pub seq: TailedSequence,
    #[serde(default)]
    pub tail_ratio: Option<f64>,
}

pub const BETA_COLUMNS: &[&str] = &[
    "p",
    "eps",
    "terms",
    "completed_blocks",
    "exhausted",
    "norm",
    "ratio_norm",
    "ratio_bound",
    "telescoping_error",
    "valid",
    "detail",
];

pub fn beta(input: &Path, s: &Settings) -> Result<Report> {
    let b: BetaInput = read_json(input)?;
    let mut r = Report::new("beta", BETA_COLUMNS);
    r.push(beta_row(&r, &b.seq, b.tail_ratio, s.eps, s.tol));
    Ok(r)
}

pub fn beta_row(r: &Report, seq: &TailedSequence, ratio: Option<f64>, eps: f64, tol: f64) -> Vec<Cell> {
    let fixed = [("p", Cell::from(seq.p.to_string())), ("eps", eps.into())];
    match beta_construct_lp(seq, ratio.map(|ratio| GeometricTail { ratio }), eps, &BetaOptions::default()) {
        Ok(c) => {
            let bound = (1.0 + eps) * c.norm;
            vec![
                seq.p.to_string().into(),
                eps.into(),
                c.beta.len().into(),
                c.completed_blocks.into(),
                c.exhausted.into(),
                c.norm.into(),
                c.ratio_norm.into(),
                bound.into(),
                (c.telescoping_lhs - c.telescoping_rhs).abs().into(),
                c.verify(tol.max(1e-10)).into(),
                Cell::Empty,
            ]
        }
        Err(e) => failed_row(r, &fixed, e),
    }
}

#[derive(Deserialize)]
pub struct MergeSet {
    pub generators: Vec<CVector>,
    pub bound: Option<f64>,
}

#[derive(Deserialize)]
pub struct MergeInput {
    pub p: Exponent,
    pub sets: Vec<MergeSet>,
}

pub const MERGE_COLUMNS: &[&str] =
    &["p", "sets", "generators", "sum_m", "bound", "merged_norm", "eps", "valid", "detail"];

pub fn merge(input: &Path, s: &Settings) -> Result<Report> {
    let m: MergeInput = read_json(input)?;
    let mut r = Report::new("merge", MERGE_COLUMNS);
    let fixed = [("p", Cell::from(m.p.to_string())), ("sets", m.sets.len().into()), ("eps", s.eps.into())];
    let res = (|| -> pcompact::Result<_> {
        let reps = m
            .sets
            .iter()
            .map(|set| {
                let g = GeneratorSet::new(set.generators.clone(), m.p)?;
                let b = set.bound.unwrap_or_else(|| g.norm());
                Ok((g, b))
            })
            .collect::<pcompact::Result<Vec<_>>>()?;
        merge_diagonal(&reps, s.eps)
    })();
    match res {
        Ok(mg) => {
            let norm = mg.generators.norm();
            r.push(vec![
                m.p.to_string().into(),
                m.sets.len().into(),
                mg.generators.len().into(),
                mg.sum_m.into(),
                mg.bound.into(),
                norm.into(),
                s.eps.into(),
                (norm <= mg.bound * (1.0 + 1e-12)).into(),
                Cell::Empty,
            ]);
        }
        Err(e) => {
            let row = failed_row(&r, &fixed, e);
            r.push(row);
        }
    }
    Ok(r)
}

pub const FACTOR_COLUMNS: &[&str] = &[
    "method",
    "p",
    "eps",
    "kappa_lower",
    "kappa_upper",
    "q_norm",
    "r_kappa",
    "s_norm",
    "chain",
    "max_residual",
    "valid",
    "detail",
];

pub fn factor_rows(r: &mut Report, poly: &HomPolynomial, p: Exponent, s: &Settings) {
    let fixed = |m: &str| [("method", Cell::from(m)), ("p", p.to_string().into()), ("eps", s.eps.into())];
    let opts = s.kappa();
    match choi_kim(poly, p, s.eps, &opts, s.tol.max(1e-12)) {
        Ok(ck) => {
            let c = &ck.report;
            r.push(vec![
                "choi-kim".into(),
                p.to_string().into(),
                s.eps.into(),
                c.kappa_lower.into(),
                c.kappa_upper.into(),
                c.q_norm_upper.into(),
                c.r_kappa_upper.into(),
                c.s_norm_upper.into(),
                c.chain.into(),
                c.max_residual.into(),
                c.valid().into(),
                Cell::Empty,
            ]);
        }
        Err(e) => {
            let row = failed_row(r, &fixed("choi-kim"), e);
            r.push(row);
        }
    }
    if poly.degree() != 1 {
        return;
    }
    // linear maps also factor through the hull generators directly
    let cols: Vec<CVector> = (0..poly.dom()).map(|j| poly.eval(&CVector::basis(poly.dom(), j)).unwrap()).collect();
    let res = kappa_bounds(poly, p, &opts).and_then(|kb| {
        let y = kb.upper_witness.hull_generators();
        sinha_karn(&cols, poly.dom_norm, &y, &opts.probes, s.tol.max(1e-9)).map(|sk| (kb, sk))
    });
    match res {
        Ok((kb, sk)) => {
            let t = &sk.report;
            r.push(vec![
                "sinha-karn".into(),
                p.to_string().into(),
                s.eps.into(),
                kb.lower.into(),
                kb.upper.into(),
                t.ty_norm_upper.into(),
                Cell::Empty,
                t.theta_norm_upper.into(),
                (t.ty_norm_upper * t.theta_norm_upper).into(),
                t.max_residual.into(),
                t.valid().into(),
                Cell::Empty,
            ]);
        }
        Err(e) => {
            let row = failed_row(r, &fixed("sinha-karn"), e);
            r.push(row);
        }
    }
}

pub fn factorize(input: &Path, s: &Settings) -> Result<Report> {
    let poly: HomPolynomial = read_json(input)?;
    let mut r = Report::new("factorize", FACTOR_COLUMNS);
    for &p in &s.p {
        factor_rows(&mut r, &poly, p, s);
    }
    Ok(r)
}

pub const RADIUS_COLUMNS: &[&str] =
    &["p", "window", "lower_estimate", "upper_estimate", "tail_radius", "finite_model", "verdict", "valid", "detail"];

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::CertifiedYes { eps } => format!("yes(eps={})", Cell::Float(*eps).text()),
        Verdict::CertifiedNo(_) => "no".into(),
        Verdict::Inconclusive { .. } => "inconclusive".into(),
    }
}

pub fn radius(input: &Path, windows: &[usize], s: &Settings) -> Result<Report> {
    let tm: TaylorModel = read_json(input)?;
    let mut r = Report::new("radius", RADIUS_COLUMNS);
    radius_rows(&mut r, &tm, windows, s);
    Ok(r)
}

pub fn radius_rows(r: &mut Report, tm: &TaylorModel, windows: &[usize], s: &Settings) {
    let opts = s.kappa();
    let default = [tm.max_degree()];
    let windows = if windows.is_empty() { &default[..] } else { windows };
    for &p in &s.p {
        let verdict = pcompact_at(tm, p, &opts);
        for &w in windows {
            let fixed = [("p", Cell::from(p.to_string())), ("window", w.into())];
            match (radius_window(tm, p, Some(w), &opts), &verdict) {
                (Ok(rw), Ok(v)) => r.push(vec![
                    p.to_string().into(),
                    w.into(),
                    rw.lower_estimate.into(),
                    rw.upper_estimate.into(),
                    rw.tail_radius.into(),
                    rw.finite_model.into(),
                    verdict_text(v).into(),
                    (rw.lower_estimate <= rw.upper_estimate * (1.0 + 1e-12)).into(),
                    Cell::Empty,
                ]),
                (Err(e), _) => {
                    let row = failed_row(r, &fixed, e);
                    r.push(row);
                }
                (_, Err(e)) => {
                    let row = failed_row(r, &fixed, e);
                    r.push(row);
                }
            }
        }
    }
}

pub const EXAMPLE_A_COLUMNS: &[&str] = &["p", "m", "lower", "upper", "upper_status", "closed_form", "valid", "detail"];

/// Family A at the origin: disjoint-coordinate lower bound on the images of
/// the block basis vectors and the analytic upper certificate.
pub fn example_a(m_max: usize, s: &Settings) -> Result<Report> {
    let mut r = Report::new("example-a", EXAMPLE_A_COLUMNS);
    let dim_cap = SigmaPartition::new(m_max, usize::MAX)?.dim();
    for &p in &s.p {
        let tm = match build_example_a(m_max, p, dim_cap) {
            Ok(tm) => tm,
            Err(e) => {
                let row = failed_row(&r, &[("p", p.to_string().into())], e);
                r.push(row);
                continue;
            }
        };
        let sigma = SigmaPartition::new(m_max, dim_cap)?;
        for m in 1..=m_max {
            let closed = (m as f64).powf(m as f64 / 2.0 * p.recip());
            let fixed = [("p", Cell::from(p.to_string())), ("m", m.into()), ("closed_form", closed.into())];
            let comp = &tm.components[m];
            let res = (|| -> pcompact::Result<(f64, KappaBound)> {
                let pts: Vec<CVector> = sigma
                    .block(m)
                    .map(|j| comp.eval(&CVector::basis(sigma.dim(), j)))
                    .collect::<pcompact::Result<_>>()?;
                let lower = mp_lower_disjoint(&pts, &best_disjoint_certificate(&pts, p))?;
                let kb = kappa_bounds(comp, p, &s.kappa())?;
                kb.verify(comp, 1e-8)?;
                Ok((lower, kb))
            })();
            match res {
                Ok((lower, kb)) => {
                    let exact = (kb.upper - closed).abs() <= 1e-9 * closed.max(1.0);
                    let status = if exact { "certified" } else { "loose" };
                    r.push(vec![
                        p.to_string().into(),
                        m.into(),
                        lower.into(),
                        kb.upper.into(),
                        status.into(),
                        closed.into(),
                        ((lower - closed).abs() <= 1e-9 * closed.max(1.0) && lower <= kb.upper * (1.0 + 1e-12)).into(),
                        Cell::Empty,
                    ]);
                }
                Err(e) => {
                    let row = failed_row(&r, &fixed, e);
                    r.push(row);
                }
            }
        }
    }
    Ok(r)
}

pub const EXAMPLE_B_COLUMNS: &[&str] = &["p", "m", "lower", "upper", "lower_floor", "max_residual", "valid", "detail"];

pub fn example_b(m_max: usize, s: &Settings) -> Result<Report> {
    let mut r = Report::new("example-b", EXAMPLE_B_COLUMNS);
    let dim_cap = SigmaPartition::new(m_max, usize::MAX)?.dim();
    for &p in &s.p {
        let tm = match build_example_b(m_max, p, dim_cap) {
            Ok(tm) => tm,
            Err(e) => {
                let row = failed_row(&r, &[("p", p.to_string().into())], e);
                r.push(row);
                continue;
            }
        };
        for m in 2..=m_max {
            let (floor, _) = family_kappa_closed_form(FamilyKind::B, m, p);
            let fixed = [("p", Cell::from(p.to_string())), ("m", m.into()), ("lower_floor", floor.into())];
            let comp = &tm.components[m];
            match kappa_bounds(comp, p, &s.kappa()).and_then(|kb| kb.verify(comp, 1e-8).map(|_| kb)) {
                Ok(kb) => {
                    let res = kb.upper_witness.witness.coverage.iter().map(|c| c.residual).fold(0.0, f64::max);
                    let ok = (kb.upper - 1.0).abs() <= 1e-12 && kb.lower >= floor * (1.0 - 1e-12) && res <= 1e-8;
                    r.push(vec![
                        p.to_string().into(),
                        m.into(),
                        kb.lower.into(),
                        kb.upper.into(),
                        floor.into(),
                        res.into(),
                        ok.into(),
                        Cell::Empty,
                    ]);
                }
                Err(e) => {
                    let row = failed_row(&r, &fixed, e);
                    r.push(row);
                }
            }
        }
    }
    Ok(r)
}

pub const EXAMPLE_B_E1_COLUMNS: &[&str] = &["p", "degree", "partial_sum", "expected", "verdict", "valid", "detail"];

/// Divergence certificate for the second component at `e_1`.
pub fn example_b_e1(degrees: usize, s: &Settings) -> Result<Report> {
    let mut r = Report::new("example-b-e1", EXAMPLE_B_E1_COLUMNS);
    for &p in &s.p {
        let res = (|| -> pcompact::Result<_> {
            let cert = example_b_at_e1_certificate(p, degrees)?;
            cert.verify(1e-12)?;
            let tm = build_example_b(3, p, SigmaPartition::new(3, usize::MAX)?.dim())?;
            let at = tm.reexpand(&CVector::basis(tm.dom(), 0))?;
            Ok((cert, pcompact_at(&at, p, &s.kappa())?))
        })();
        match res {
            Ok((cert, v)) => {
                let no = matches!(v, Verdict::CertifiedNo(_));
                for &(m, sum) in &cert.partial_sums {
                    let expected = (m - 1) as f64;
                    r.push(vec![
                        p.to_string().into(),
                        m.into(),
                        sum.into(),
                        expected.into(),
                        verdict_text(&v).into(),
                        (no && sum == expected).into(),
                        Cell::Empty,
                    ]);
                }
            }
            Err(e) => {
                let row = failed_row(&r, &[("p", p.to_string().into())], e);
                r.push(row);
            }
        }
    }
    Ok(r)
}

#[derive(Deserialize)]
pub struct SeminormInput {
    pub model: TaylorModel,
    pub k: Vec<CVector>,
    pub a: NullSequence,
}

pub const SEMINORM_COLUMNS: &[&str] =
    &["p", "value", "radius_k", "tail_term", "summable_eps", "summable", "valid", "detail"];

pub fn seminorm(input: &Path, s: &Settings) -> Result<Report> {
    let inp: SeminormInput = read_json(input)?;
    let mut r = Report::new("seminorm", SEMINORM_COLUMNS);
    for &p in &s.p {
        let fixed = [("p", Cell::from(p.to_string())), ("summable_eps", s.eps.into())];
        let res = seminorm_e(&inp.model, &inp.k, &inp.a, p, &s.kappa())
            .and_then(|v| summability_at_zero(&inp.model, &inp.k, s.eps, p).map(|b| (v, b)));
        match res {
            Ok((v, summable)) => r.push(vec![
                p.to_string().into(),
                v.value.into(),
                v.radius_k.into(),
                v.tail_term.into(),
                s.eps.into(),
                summable.into(),
                v.value.is_finite().into(),
                Cell::Empty,
            ]),
            Err(e) => {
                let row = failed_row(&r, &fixed, e);
                r.push(row);
            }
        }
    }
    Ok(r)
}
