//! Counting integral points in norm balls and caps, fitting growth
//! exponents, and comparing angular distributions with the limit measure.

use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{self, Norm, PointFamily};
use crate::quadrature::{self, QuadOptions};
use crate::strata::{self, ExponentTriple};

/// Tolerance on the length of a cap center.
pub const CENTER_TOL: f64 = 1e-12;

/// Points with fewer angular samples are rejected by [`angular_compare`].
pub const MIN_ANGULAR_POINTS: usize = 1000;

/// `{x : |x/|x| - center| < radius}` in the coordinate basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl CapSpec {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        let n = Norm::Euclidean.eval(&center);
        if (n - 1.0).abs() > CENTER_TOL {
            return Err(Error::InvalidSpec(format!("cap center has length {n}, expected 1")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidSpec(format!("cap radius must be positive, got {radius}")));
        }
        Ok(CapSpec { center, radius })
    }

    /// Parse `c1,c2,...@radius`; the center is normalized first.
    pub fn parse(s: &str) -> Result<Self> {
        let (c, r) = s.split_once('@').ok_or_else(|| Error::Parse(format!("cap {s:?} is not of the form c1,c2,...@radius")))?;
        let center: Vec<f64> = c
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{v:?}: {e}"))))
            .collect::<Result<_>>()?;
        let radius: f64 = r.trim().parse().map_err(|e| Error::Parse(format!("{r:?}: {e}")))?;
        let n = Norm::Euclidean.eval(&center);
        if !(n > 0.0) {
            return Err(Error::InvalidSpec("cap center must be non-zero".into()));
        }
        CapSpec::new(center.iter().map(|v| v / n).collect(), radius)
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        let n = x.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
        if n == 0.0 {
            return false;
        }
        let d2: f64 = x.iter().zip(&self.center).map(|(&v, c)| (v as f64 / n - c).powi(2)).sum();
        d2.sqrt() < self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    #[serde(rename = "T")]
    pub t: f64,
    pub total: u64,
    pub per_cap: Vec<u64>,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderResult {
    pub records: Vec<CountRecord>,
    /// Why the ladder stopped early, if it did.
    pub truncated: Option<String>,
}

/// Counts `N_T` and `N_T(cap)` for every rung, one enumeration per rung.
/// A rung beyond the work budget or the family guard ends the ladder with
/// a truncation marker.
pub fn count_ladder(
    fam: &dyn PointFamily,
    norm: Norm,
    caps: &[CapSpec],
    ladder: &[f64],
    max_work: f64,
) -> Result<LadderResult> {
    if ladder.is_empty() {
        return Err(Error::Empty("ladder"));
    }
    if ladder.windows(2).any(|w| !(w[0] < w[1])) || !(ladder[0] >= 1.0) {
        return Err(Error::InvalidSpec("ladder must be strictly increasing and start at T >= 1".into()));
    }
    for cap in caps {
        if cap.center.len() != fam.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: fam.ambient_dim(), got: cap.center.len() });
        }
    }
    fam.check_enumerable()?;
    let mut records = Vec::new();
    for &t in ladder {
        let start = Instant::now();
        match families::check_work(fam, norm, t, max_work) {
            Ok(()) => {}
            Err(e @ Error::Budget(_)) => return Ok(LadderResult { records, truncated: Some(e.to_string()) }),
            Err(e) => return Err(e),
        }
        let parts = match families::fold_points(
            fam,
            norm,
            t,
            || (0u64, vec![0u64; caps.len()]),
            |acc, x| {
                acc.0 += 1;
                for (c, cap) in acc.1.iter_mut().zip(caps) {
                    if cap.contains(x) {
                        *c += 1;
                    }
                }
            },
        ) {
            Ok(p) => p,
            Err(e @ Error::Budget(_)) => return Ok(LadderResult { records, truncated: Some(e.to_string()) }),
            Err(e) => return Err(e),
        };
        let mut total = 0;
        let mut per_cap = vec![0u64; caps.len()];
        for (n, c) in parts {
            total += n;
            for (acc, v) in per_cap.iter_mut().zip(c) {
                *acc += v;
            }
        }
        records.push(CountRecord { t, total, per_cap, elapsed_ms: start.elapsed().as_millis() as u64 });
    }
    Ok(LadderResult { records, truncated: None })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub a_fit: f64,
    pub stderr: f64,
    pub n_used: usize,
}

/// Least-squares slope of `log N - (b-1) log log T` against `log T`.
pub fn fit_series(ts: &[f64], counts: &[u64], b_theory: u32) -> Result<ExponentFit> {
    if b_theory == 0 {
        return Err(Error::InvalidSpec("b must be positive".into()));
    }
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(counts)
        .filter(|(&t, &n)| n > 0 && t > 1.0)
        .map(|(&t, &n)| {
            let lt = t.ln();
            let y = (n as f64).ln() - if b_theory > 1 { (b_theory - 1) as f64 * lt.ln() } else { 0.0 };
            (lt, y)
        })
        .collect();
    if pts.len() < 4 {
        return Err(Error::TooFew(format!("{} usable rungs, need at least 4", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - icept - slope * p.0).powi(2)).sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(ExponentFit { a_fit: slope, stderr, n_used: pts.len() })
}

pub fn fit_exponent(records: &[CountRecord], b_theory: u32) -> Result<ExponentFit> {
    let ts: Vec<f64> = records.iter().map(|r| r.t).collect();
    let ns: Vec<u64> = records.iter().map(|r| r.total).collect();
    fit_series(&ts, &ns, b_theory)
}

pub fn fit_cap_exponent(records: &[CountRecord], cap: usize, b_theory: u32) -> Result<ExponentFit> {
    let ts: Vec<f64> = records.iter().map(|r| r.t).collect();
    let ns: Vec<u64> = records
        .iter()
        .map(|r| r.per_cap.get(cap).copied().ok_or(Error::IndexOutOfRange { index: cap, rank: r.per_cap.len() }))
        .collect::<Result<_>>()?;
    fit_series(&ts, &ns, b_theory)
}

/// Predicted local counting law at a boundary direction.
pub fn local_exponents(fam: &dyn PointFamily, direction: &[f64]) -> Result<ExponentTriple> {
    let i = fam.classify_stratum(direction)?;
    let (rs, lam) = fam.root_data()?;
    strata::exponents_rel(&rs, &lam, i)
}

/// Midpoint quadrature on the unit sphere `S^{m-1}` in `R^m`.
fn sphere_nodes(m: usize, n: usize) -> Vec<(Vec<f64>, f64)> {
    match m {
        0 => vec![(Vec::new(), 1.0)],
        1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        2 => (0..n)
            .map(|i| {
                let phi = 2.0 * PI * (i as f64 + 0.5) / n as f64;
                (vec![phi.cos(), phi.sin()], 2.0 * PI / n as f64)
            })
            .collect(),
        _ => {
            let sub = sphere_nodes(m - 1, n);
            let mut out = Vec::with_capacity(n * sub.len());
            for i in 0..n {
                let phi = PI * (i as f64 + 0.5) / n as f64;
                let w = phi.sin().powi(m as i32 - 2) * PI / n as f64;
                for (x, wx) in &sub {
                    let mut p = vec![phi.cos()];
                    p.extend(x.iter().map(|v| v * phi.sin()));
                    out.push((p, w * wx));
                }
            }
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularBin {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub empirical: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularComparison {
    #[serde(rename = "T")]
    pub t: f64,
    pub n_points: usize,
    pub ks_distance: f64,
    pub bins: Vec<AngularBin>,
}

/// Polar angle of the first sphere factor of a quadric point, or `None`
/// when that block vanishes.
pub fn polar_angle(p: usize, x: &[i64]) -> Option<f64> {
    let n = x[..p].iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
    (n > 0.0).then(|| (x[0] as f64 / n).clamp(-1.0, 1.0).acos())
}

/// Predicted density (unnormalized) of the polar angle under the limit
/// measure `dv / |v|^a` on `S^{p-1} x S^{q-1}`.
fn predicted_density<'a>(
    p: usize,
    q: usize,
    a: f64,
    norm: Norm,
    inner: &'a [(Vec<f64>, f64)],
    rest: &'a [(Vec<f64>, f64)],
) -> impl Fn(f64) -> f64 + Sync + 'a {
    move |psi: f64| {
        let (c, s) = (psi.cos(), psi.sin());
        let mut acc = 0.0;
        let mut v = vec![0.0; p + q];
        for (omega, wo) in inner {
            v[0] = c;
            for (k, o) in omega.iter().enumerate() {
                v[1 + k] = s * o;
            }
            for (phi, wp) in rest {
                v[p..].copy_from_slice(phi);
                acc += wo * wp * norm.eval(&v).powf(-a);
            }
        }
        s.powi(p as i32 - 2) * acc
    }
}

/// Histogram of the polar angle of `x/|x|` over integral points of a quadric
/// against the limit measure, with the Kolmogorov-Smirnov distance over the
/// bin edges.
pub fn angular_compare(fam: &dyn PointFamily, norm: Norm, t: f64, n_bins: usize) -> Result<AngularComparison> {
    let quad = fam.as_quadric().ok_or_else(|| Error::Unsupported(format!("angular comparison for {}", fam.spec())))?;
    let (p, q) = (quad.p, quad.q);
    if p < 2 {
        return Err(Error::Unsupported("angular comparison needs p >= 2".into()));
    }
    if n_bins == 0 {
        return Err(Error::InvalidSpec("n_bins must be positive".into()));
    }
    let width = PI / n_bins as f64;
    let parts = families::fold_points(fam, norm, t, || vec![0u64; n_bins], |h, x| {
        if let Some(psi) = polar_angle(p, x) {
            h[((psi / width) as usize).min(n_bins - 1)] += 1;
        }
    })?;
    let mut hist = vec![0u64; n_bins];
    for h in parts {
        for (a, b) in hist.iter_mut().zip(h) {
            *a += b;
        }
    }
    let n_points: u64 = hist.iter().sum();
    if (n_points as usize) < MIN_ANGULAR_POINTS {
        return Err(Error::TooFew(format!("{n_points} points at T = {t}, need {MIN_ANGULAR_POINTS}")));
    }
    let a = (p + q - 2) as f64;
    let per_angle = if p + q <= 4 { 256 } else { 48 };
    let inner = sphere_nodes(p - 1, per_angle);
    let rest = sphere_nodes(q, per_angle);
    let dens = predicted_density(p, q, a, norm, &inner, &rest);
    let opts = QuadOptions { rel_tol: 1e-8, abs_tol: 1e-14, max_evals: 200_000 };
    let mass: Vec<f64> = (0..n_bins)
        .map(|i| {
            let lo = i as f64 * width;
            match quadrature::integrate_1d(&dens, lo, lo + width, &opts) {
                Ok(r) => Ok(r.value),
                Err(Error::NonConvergence { estimate, .. }) => Ok(estimate),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let total: f64 = mass.iter().sum();
    let mut bins = Vec::with_capacity(n_bins);
    let (mut fe, mut fp, mut ks) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..n_bins {
        let emp = hist[i] as f64 / n_points as f64;
        let pred = mass[i] / total;
        fe += emp;
        fp += pred;
        ks = ks.max((fe - fp).abs());
        bins.push(AngularBin { bin_lo: i as f64 * width, bin_hi: (i + 1) as f64 * width, empirical: emp, predicted: pred });
    }
    Ok(AngularComparison { t, n_points: n_points as usize, ks_distance: ks, bins })
}
