//! Integral-point families: quadrics, determinant surfaces and symmetric
//! matrices of fixed signature.
//!
//! Each family is a [`PointFamily`] strategy, constructed from a spec string
//! such as `quadric:2,2,1`, `detsurface:2,1` or `symmat:2,1` by
//! [`parse_family`]. Enumeration is split into partitions keyed by a leading
//! coordinate; partitions are processed in parallel and reassembled in key
//! order, so every consumer sees the same deterministic stream.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_integer::{Integer, Roots};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadOptions};
use crate::rational::Rational;
use crate::rootlat::{self, build_root_system, Family, Multiplicity, MultiplicityProfile, RootSystemDesc, Weight};
use crate::strata::StratumIndex;

/// Relative threshold below which singular values and eigenvalues count as zero.
pub const RANK_TOL: f64 = 1e-9;
/// Tolerance on the defining form at a normalized boundary direction.
pub const BOUNDARY_TOL: f64 = 1e-9;
/// Largest ball radius accepted for 3x3 determinant surfaces.
pub const DET3_MAX_T: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    #[default]
    Euclidean,
    Sup,
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::Euclidean => "euclidean",
            Norm::Sup => "sup",
        })
    }
}

impl FromStr for Norm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(Norm::Euclidean),
            "sup" | "max" | "linf" => Ok(Norm::Sup),
            other => Err(Error::Parse(format!("unknown norm {other:?} (expected euclidean or sup)"))),
        }
    }
}

impl Norm {
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Norm::Euclidean => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Norm::Sup => x.iter().fold(0.0, |m, v| f64::max(m, v.abs())),
        }
    }

    /// Whether the integer vector lies in the open ball of radius `t`.
    pub fn in_ball(self, x: &[i64], t: f64) -> bool {
        match self {
            Norm::Euclidean => (x.iter().map(|&v| (v as i128) * (v as i128)).sum::<i128>() as f64) < t * t,
            Norm::Sup => x.iter().all(|&v| (v.abs() as f64) < t),
        }
    }
}

/// Largest integer strictly below `t` in absolute value.
pub(crate) fn coord_cap(t: f64) -> i64 {
    if t <= 0.0 {
        -1
    } else {
        t.ceil() as i64 - 1
    }
}

/// Largest integer `s` with `s < x`, or `None` when `x <= 0`.
fn below(x: f64) -> Option<i64> {
    if x <= 0.0 {
        None
    } else {
        Some(x.ceil() as i64 - 1)
    }
}

/// Enumeration of one family at one radius, split into partitions.
pub trait Enumerator: Sync {
    fn partitions(&self) -> Vec<i64>;
    fn run(&self, key: i64, visit: &mut dyn FnMut(&[i64]));
}

pub trait PointFamily: Send + Sync + fmt::Debug {
    /// Canonical spec string, e.g. `quadric:2,2,1`.
    fn spec(&self) -> String;

    fn ambient_dim(&self) -> usize;

    /// Exact membership test for an integer vector.
    fn contains(&self, x: &[i64]) -> bool;

    /// Whether integral points of this family can be enumerated at all.
    fn check_enumerable(&self) -> Result<()> {
        Ok(())
    }

    /// Rough count of inner-loop steps for an enumeration up to `t`.
    fn work_estimate(&self, norm: Norm, t: f64) -> f64;

    /// Enumerator for the points with norm below `t`; fails when `t` is
    /// beyond the family's guard.
    fn enumerator(&self, norm: Norm, t: f64) -> Result<Box<dyn Enumerator + '_>>;

    /// Restricted root system and highest weight of the representation.
    fn root_data(&self) -> Result<(RootSystemDesc, Weight)>;

    /// The defining homogeneous form at a unit direction.
    fn boundary_form(&self, dir: &[f64]) -> f64;

    /// Boundary stratum containing a direction on the boundary.
    fn classify_stratum(&self, dir: &[f64]) -> Result<StratumIndex>;

    /// Volume of `V` within the ball of radius `t`, where a K-reduction is known.
    fn ball_volume(&self, norm: Norm, _t: f64) -> Result<f64> {
        Err(Error::NoKReduction(format!("{} with {norm} norm", self.spec())))
    }

    fn as_quadric(&self) -> Option<&Quadric> {
        None
    }
}

fn unit(dir: &[f64]) -> Result<Vec<f64>> {
    let n = Norm::Euclidean.eval(dir);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidSpec("direction must be a non-zero finite vector".into()));
    }
    Ok(dir.iter().map(|x| x / n).collect())
}

fn check_boundary(value: f64) -> Result<()> {
    if value.abs() < BOUNDARY_TOL {
        Ok(())
    } else {
        Err(Error::InteriorDirection { value, tol: BOUNDARY_TOL })
    }
}

/// All integer vectors of length `len` with `sum x^2 <= max_sq` and `|x_i| <= cap`, in lexicographic order.
fn for_each_in_ball(len: usize, max_sq: i64, cap: i64, prefix: &mut Vec<i64>, visit: &mut dyn FnMut(&[i64], i64)) {
    fn rec(len: usize, left: i64, cap: i64, prefix: &mut Vec<i64>, used: i64, visit: &mut dyn FnMut(&[i64], i64)) {
        if len == 0 {
            visit(prefix, used);
            return;
        }
        let b = left.sqrt().min(cap);
        for x in -b..=b {
            prefix.push(x);
            rec(len - 1, left - x * x, cap, prefix, used + x * x, visit);
            prefix.pop();
        }
    }
    if max_sq >= 0 && cap >= 0 {
        rec(len, max_sq, cap, prefix, 0, visit);
    }
}

/// All integer vectors of length `len` with `sum x^2 = n` and `|x_i| <= cap`.
fn for_each_sum_of_squares(len: usize, n: i64, cap: i64, prefix: &mut Vec<i64>, visit: &mut dyn FnMut(&[i64])) {
    if n < 0 {
        return;
    }
    if len == 1 {
        let s = n.sqrt();
        if s * s == n && s <= cap {
            if s == 0 {
                prefix.push(0);
                visit(prefix);
                prefix.pop();
            } else {
                for x in [-s, s] {
                    prefix.push(x);
                    visit(prefix);
                    prefix.pop();
                }
            }
        }
        return;
    }
    let b = n.sqrt().min(cap);
    for x in -b..=b {
        prefix.push(x);
        for_each_sum_of_squares(len - 1, n - x * x, cap, prefix, visit);
        prefix.pop();
    }
}

/// Surface area of the unit sphere `S^{n-1}` in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * sphere_area(n - 2) / (n - 2) as f64,
    }
}

/// Volume of the unit ball in `R^n`.
pub fn ball_unit_volume(n: usize) -> f64 {
    if n == 0 {
        1.0
    } else {
        sphere_area(n) / n as f64
    }
}

// ---------------------------------------------------------------------------
// Quadric

/// `x_1^2 + ... + x_p^2 - x_{p+1}^2 - ... - x_{p+q}^2 = k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quadric {
    pub p: usize,
    pub q: usize,
    pub k: i64,
}

impl Quadric {
    pub fn new(p: usize, q: usize, k: i64) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidFamily("quadric needs p >= 1 and q >= 1".into()));
        }
        if k == 0 {
            return Err(Error::InvalidFamily("quadric needs k != 0".into()));
        }
        Ok(Quadric { p, q, k })
    }

    pub fn form(&self, x: &[i64]) -> i64 {
        x.iter().enumerate().map(|(i, v)| if i < self.p { v * v } else { -v * v }).sum()
    }

    /// Block enumerated freely and block solved by sums of squares.
    fn blocks(&self) -> (usize, usize) {
        if self.k > 0 {
            (self.q, self.p)
        } else {
            (self.p, self.q)
        }
    }
}

struct QuadricEnum {
    fam: Quadric,
    norm: Norm,
    free_max_sq: Option<i64>,
    cap: i64,
}

impl Enumerator for QuadricEnum {
    fn partitions(&self) -> Vec<i64> {
        let b = match (self.norm, self.free_max_sq) {
            (_, None) => return Vec::new(),
            (Norm::Euclidean, Some(s)) => s.sqrt(),
            (Norm::Sup, Some(_)) => self.cap,
        };
        (-b..=b).collect()
    }

    fn run(&self, key: i64, visit: &mut dyn FnMut(&[i64])) {
        let Some(max_sq) = self.free_max_sq else { return };
        let (nf, ns) = self.fam.blocks();
        let kabs = self.fam.k.abs();
        let mut free = vec![key];
        let mut solved = Vec::with_capacity(ns);
        let mut out = vec![0i64; nf + ns];
        let p = self.fam.p;
        for_each_in_ball(nf - 1, max_sq - key * key, self.cap, &mut free, &mut |f, used| {
            let n = kabs + used + key * key;
            for_each_sum_of_squares(ns, n, self.cap, &mut solved, &mut |s| {
                if self.fam.k > 0 {
                    out[..p].copy_from_slice(s);
                    out[p..].copy_from_slice(f);
                } else {
                    out[..p].copy_from_slice(f);
                    out[p..].copy_from_slice(s);
                }
                visit(&out);
            });
        });
    }
}

impl PointFamily for Quadric {
    fn spec(&self) -> String {
        format!("quadric:{},{},{}", self.p, self.q, self.k)
    }

    fn ambient_dim(&self) -> usize {
        self.p + self.q
    }

    fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.p + self.q && self.form(x) == self.k
    }

    fn work_estimate(&self, norm: Norm, t: f64) -> f64 {
        let (nf, ns) = self.blocks();
        let r = match norm {
            Norm::Euclidean => t / 2f64.sqrt(),
            Norm::Sup => t,
        };
        let free = ball_unit_volume(nf) * r.powi(nf as i32) * if norm == Norm::Sup { 2f64.powi(nf as i32) } else { 1.0 };
        free * (2.0 * t + 1.0).powi(ns as i32 - 1)
    }

    fn enumerator(&self, norm: Norm, t: f64) -> Result<Box<dyn Enumerator + '_>> {
        let kabs = self.k.abs() as f64;
        let cap = coord_cap(t);
        let free_max_sq = match norm {
            Norm::Euclidean => below((t * t - kabs) / 2.0),
            Norm::Sup => (cap >= 0).then_some(i64::MAX / 4),
        };
        Ok(Box::new(QuadricEnum { fam: *self, norm, free_max_sq, cap: if norm == Norm::Sup { cap } else { i64::MAX / 4 } }))
    }

    fn root_data(&self) -> Result<(RootSystemDesc, Weight)> {
        let (lp, lm) = if self.k > 0 { (self.q - 1, self.p - 1) } else { (self.p - 1, self.q - 1) };
        let rs = build_root_system(Family::A, 1, &MultiplicityProfile::Uniform(Multiplicity::new(lp as u32, lm as u32)))?;
        Ok((rs, Weight::from_ints(&[1])))
    }

    fn boundary_form(&self, dir: &[f64]) -> f64 {
        dir.iter().enumerate().map(|(i, v)| if i < self.p { v * v } else { -v * v }).sum()
    }

    fn classify_stratum(&self, dir: &[f64]) -> Result<StratumIndex> {
        if dir.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), got: dir.len() });
        }
        check_boundary(self.boundary_form(&unit(dir)?))?;
        Ok(StratumIndex::EMPTY)
    }

    fn ball_volume(&self, norm: Norm, t: f64) -> Result<f64> {
        if norm != Norm::Euclidean {
            return Err(Error::NoKReduction(format!("{} with {norm} norm", self.spec())));
        }
        let (pp, qq) = if self.k > 0 { (self.p, self.q) } else { (self.q, self.p) };
        Ok(quadric_volume(pp, qq, self.k.abs() as f64, t))
    }

    fn as_quadric(&self) -> Option<&Quadric> {
        Some(self)
    }
}

/// Leray volume of `{|x|^2 - |y|^2 = k, |x|^2 + |y|^2 < t^2}` for `k > 0`,
/// `x in R^p`, `y in R^q`, parametrized by `x = sqrt(k) cosh(s) theta`,
/// `y = sqrt(k) sinh(s) phi`.
pub fn quadric_volume(p: usize, q: usize, k: f64, t: f64) -> f64 {
    if t * t <= k {
        return 0.0;
    }
    let smax = 0.5 * (t * t / k).acosh();
    let g = |s: f64| s.cosh().powi(p as i32 - 1) * s.sinh().powi(q as i32 - 1);
    let opts = QuadOptions { rel_tol: 1e-12, abs_tol: 0.0, max_evals: 1_000_000 };
    let integral = match quadrature::integrate_1d(&g, 0.0, smax, &opts) {
        Ok(r) => r.value,
        Err(Error::NonConvergence { estimate, .. }) => estimate,
        Err(_) => f64::NAN,
    };
    sphere_area(p) * sphere_area(q) * k.powf((p + q) as f64 / 2.0 - 1.0) / 2.0 * integral
}

// ---------------------------------------------------------------------------
// Determinant surface

/// `n x n` integer matrices (row-major coordinates) with determinant `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetSurface {
    pub n: usize,
    pub k: i64,
}

impl DetSurface {
    pub fn new(n: usize, k: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidFamily("detsurface needs n >= 2".into()));
        }
        if k == 0 {
            return Err(Error::InvalidFamily("detsurface needs k != 0".into()));
        }
        Ok(DetSurface { n, k })
    }
}

/// Smallest-prime-factor table for divisor enumeration.
struct Sieve {
    spf: Vec<u32>,
}

impl Sieve {
    fn new(limit: usize) -> Self {
        let mut spf = vec![0u32; limit + 1];
        for i in 2..=limit {
            if spf[i] == 0 {
                let mut j = i;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Sieve { spf }
    }

    /// Positive divisors of `m >= 1`, unsorted.
    fn divisors(&self, m: u64, out: &mut Vec<i64>) {
        out.clear();
        out.push(1);
        let mut m = m as usize;
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            let len = out.len();
            let mut pk = 1i64;
            for _ in 0..e {
                pk *= p as i64;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
    }
}

struct Det2Enum {
    k: i64,
    norm: Norm,
    t: f64,
    cap: i64,
    sieve: Sieve,
}

impl Enumerator for Det2Enum {
    fn partitions(&self) -> Vec<i64> {
        (-self.cap..=self.cap).collect()
    }

    fn run(&self, a: i64, visit: &mut dyn FnMut(&[i64])) {
        let t2 = self.t * self.t;
        let mut divs = Vec::new();
        let mut pairs: Vec<(i64, i64)> = Vec::new();
        for d in -self.cap..=self.cap {
            // room left for (b, c)
            let rest = match self.norm {
                Norm::Euclidean => {
                    let r = t2 - (a * a + d * d) as f64;
                    if r <= 0.0 {
                        continue;
                    }
                    r
                }
                Norm::Sup => f64::INFINITY,
            };
            let ok = |b: i64, c: i64| match self.norm {
                Norm::Euclidean => ((b * b + c * c) as f64) < rest,
                Norm::Sup => b.abs() <= self.cap && c.abs() <= self.cap,
            };
            let m = a * d - self.k;
            pairs.clear();
            if m == 0 {
                for c in -self.cap..=self.cap {
                    if ok(0, c) {
                        pairs.push((0, c));
                    }
                }
                for b in -self.cap..=self.cap {
                    if b != 0 && ok(b, 0) {
                        pairs.push((b, 0));
                    }
                }
            } else {
                self.sieve.divisors(m.unsigned_abs(), &mut divs);
                for &e in &divs {
                    for b in [e, -e] {
                        let c = m / b;
                        if ok(b, c) {
                            pairs.push((b, c));
                        }
                    }
                }
            }
            pairs.sort_unstable();
            for &(b, c) in &pairs {
                visit(&[a, b, c, d]);
            }
        }
    }
}

/// Unimodular `U` with `c^T U = (g, 0, 0)`, `g = gcd(c) > 0`.
fn unimodular_reduce(c: [i64; 3]) -> ([[i64; 3]; 3], i64) {
    let mut v = c;
    let mut u = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    loop {
        let nz: Vec<usize> = (0..3).filter(|&i| v[i] != 0).collect();
        if nz.len() <= 1 {
            break;
        }
        let i = *nz.iter().min_by_key(|&&i| v[i].abs()).expect("non-empty");
        for &j in &nz {
            if j != i {
                let q = Integer::div_floor(&v[j], &v[i]);
                v[j] -= q * v[i];
                for row in u.iter_mut() {
                    row[j] -= q * row[i];
                }
            }
        }
    }
    let p = (0..3).find(|&i| v[i] != 0).expect("c is non-zero");
    if v[p] < 0 {
        v[p] = -v[p];
        for row in u.iter_mut() {
            row[p] = -row[p];
        }
    }
    if p != 0 {
        for row in u.iter_mut() {
            row.swap(0, p);
        }
        v.swap(0, p);
    }
    (u, v[0])
}

fn dot3(a: [i64; 3], b: [i64; 3]) -> i64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Integer points `x0 + t1 u + t2 w` with squared norm below `r`, sorted.
fn lattice_points_in_ball(x0: [i64; 3], mut u: [i64; 3], mut w: [i64; 3], r: f64, out: &mut Vec<[i64; 3]>) {
    // Lagrange-Gauss reduction of the plane lattice
    loop {
        if dot3(u, u) > dot3(w, w) {
            std::mem::swap(&mut u, &mut w);
        }
        let uu = dot3(u, u);
        let q = (dot3(u, w) as f64 / uu as f64).round() as i64;
        if q == 0 {
            break;
        }
        for i in 0..3 {
            w[i] -= q * u[i];
        }
        if dot3(w, w) >= uu {
            break;
        }
    }
    let (g11, g12, g22) = (dot3(u, u) as f64, dot3(u, w) as f64, dot3(w, w) as f64);
    let (h1, h2, c0) = (dot3(x0, u) as f64, dot3(x0, w) as f64, dot3(x0, x0) as f64);
    let det = g11 * g22 - g12 * g12;
    let a2 = det / g11;
    let b2 = 2.0 * h2 - 2.0 * h1 * g12 / g11;
    let c2 = c0 - h1 * h1 / g11 - r;
    let disc = b2 * b2 - 4.0 * a2 * c2;
    if disc < 0.0 {
        return;
    }
    let lo2 = ((-b2 - disc.sqrt()) / (2.0 * a2)).floor() as i64 - 1;
    let hi2 = ((-b2 + disc.sqrt()) / (2.0 * a2)).ceil() as i64 + 1;
    for t2 in lo2..=hi2 {
        let bl = 2.0 * (h1 + g12 * t2 as f64);
        let cl = c0 + 2.0 * h2 * t2 as f64 + g22 * (t2 * t2) as f64 - r;
        let dl = bl * bl - 4.0 * g11 * cl;
        if dl < 0.0 {
            continue;
        }
        let lo1 = ((-bl - dl.sqrt()) / (2.0 * g11)).floor() as i64 - 1;
        let hi1 = ((-bl + dl.sqrt()) / (2.0 * g11)).ceil() as i64 + 1;
        for t1 in lo1..=hi1 {
            let x = [0, 1, 2].map(|i| x0[i] + t1 * u[i] + t2 * w[i]);
            if (dot3(x, x) as f64) < r {
                out.push(x);
            }
        }
    }
    out.sort_unstable();
}

struct Det3Enum {
    k: i64,
    norm: Norm,
    t: f64,
    cap: i64,
}

impl Enumerator for Det3Enum {
    fn partitions(&self) -> Vec<i64> {
        (-self.cap..=self.cap).collect()
    }

    fn run(&self, key: i64, visit: &mut dyn FnMut(&[i64])) {
        let t2 = self.t * self.t;
        let budget = match self.norm {
            Norm::Euclidean => below(t2 - (key * key) as f64),
            Norm::Sup => Some(i64::MAX / 4),
        };
        let Some(budget) = budget else { return };
        let mut prefix = vec![key];
        let mut sols = Vec::new();
        let mut out = [0i64; 9];
        for_each_in_ball(5, budget, self.cap, &mut prefix, &mut |rows, used| {
            let r1 = [rows[0], rows[1], rows[2]];
            let r2 = [rows[3], rows[4], rows[5]];
            let c = [r1[1] * r2[2] - r1[2] * r2[1], r1[2] * r2[0] - r1[0] * r2[2], r1[0] * r2[1] - r1[1] * r2[0]];
            if c == [0, 0, 0] {
                return;
            }
            let (u, g) = unimodular_reduce(c);
            if self.k % g != 0 {
                return;
            }
            let s = self.k / g;
            let col = |j: usize| [u[0][j], u[1][j], u[2][j]];
            let x0 = col(0).map(|v| v * s);
            let r = match self.norm {
                Norm::Euclidean => t2 - (used + key * key) as f64,
                Norm::Sup => (3 * self.cap * self.cap + 1) as f64,
            };
            if r <= 0.0 {
                return;
            }
            sols.clear();
            lattice_points_in_ball(x0, col(1), col(2), r, &mut sols);
            for r3 in &sols {
                if self.norm == Norm::Sup && r3.iter().any(|v| v.abs() > self.cap) {
                    continue;
                }
                out[..6].copy_from_slice(rows);
                out[6..].copy_from_slice(r3);
                visit(&out);
            }
        });
    }
}

impl PointFamily for DetSurface {
    fn spec(&self) -> String {
        format!("detsurface:{},{}", self.n, self.k)
    }

    fn ambient_dim(&self) -> usize {
        self.n * self.n
    }

    fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.n * self.n && det_i128(&square(x, self.n)) == self.k as i128
    }

    fn check_enumerable(&self) -> Result<()> {
        if self.n > 3 {
            return Err(Error::Unsupported(format!("detsurface enumeration supports n <= 3, got n = {}", self.n)));
        }
        Ok(())
    }

    fn work_estimate(&self, norm: Norm, t: f64) -> f64 {
        let scale = if norm == Norm::Sup { 4.0 } else { 1.0 };
        match self.n {
            2 => scale * std::f64::consts::PI * t * t * (1.0 + (t.max(2.0)).ln()),
            3 => scale.powi(3) * ball_unit_volume(6) * t.powi(6),
            _ => f64::INFINITY,
        }
    }

    fn enumerator(&self, norm: Norm, t: f64) -> Result<Box<dyn Enumerator + '_>> {
        let cap = coord_cap(t);
        match self.n {
            2 => {
                let limit = match norm {
                    Norm::Euclidean => (t * t / 2.0).ceil() as usize,
                    Norm::Sup => (cap.max(0) * cap.max(0)) as usize,
                } + self.k.unsigned_abs() as usize
                    + 1;
                Ok(Box::new(Det2Enum { k: self.k, norm, t, cap, sieve: Sieve::new(limit) }))
            }
            3 => {
                if t > DET3_MAX_T {
                    return Err(Error::Budget(format!(
                        "detsurface n=3 enumeration is limited to T <= {DET3_MAX_T}, got T = {t}"
                    )));
                }
                Ok(Box::new(Det3Enum { k: self.k, norm, t, cap }))
            }
            _ => Err(self.check_enumerable().expect_err("n > 3")),
        }
    }

    fn root_data(&self) -> Result<(RootSystemDesc, Weight)> {
        let rs = build_root_system(Family::A, self.n - 1, &MultiplicityProfile::Uniform(Multiplicity::new(1, 1)))?;
        let lam = two_omega_1(&rs)?;
        Ok((rs, lam))
    }

    fn boundary_form(&self, dir: &[f64]) -> f64 {
        DMatrix::from_row_slice(self.n, self.n, dir).determinant()
    }

    fn classify_stratum(&self, dir: &[f64]) -> Result<StratumIndex> {
        if dir.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), got: dir.len() });
        }
        let u = unit(dir)?;
        check_boundary(self.boundary_form(&u))?;
        let sv = DMatrix::from_row_slice(self.n, self.n, &u).singular_values();
        let smax = sv.max();
        let rank = sv.iter().filter(|&&s| s > RANK_TOL * smax).count();
        Ok(StratumIndex::initial(rank - 1))
    }

    fn ball_volume(&self, norm: Norm, t: f64) -> Result<f64> {
        if self.n != 2 || norm != Norm::Euclidean {
            return Err(Error::NoKReduction(format!("{} with {norm} norm", self.spec())));
        }
        // (a, b, c, d) -> ((a+d)/2, (a-d)/2, (b+c)/2, (b-c)/2) turns det into a
        // (2,2) quadric with Jacobian 4 and halves the squared norm
        Ok(4.0 * quadric_volume(2, 2, self.k.abs() as f64, t / 2f64.sqrt()))
    }
}

fn two_omega_1(rs: &RootSystemDesc) -> Result<Weight> {
    let mut n = vec![Rational::zero(); rs.rank()];
    n[0] = Rational::from_int(2);
    rootlat::weight_from_fundamental(rs, &n)
}

fn square(x: &[i64], n: usize) -> Vec<Vec<i128>> {
    (0..n).map(|i| (0..n).map(|j| x[i * n + j] as i128).collect()).collect()
}

/// Exact determinant by fraction-free elimination.
pub(crate) fn det_i128(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    let mut a = m.to_vec();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[i][k] != 0) else { return 0 };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

// ---------------------------------------------------------------------------
// Symmetric matrices

/// Integer symmetric `n x n` matrices (`n = p + q`) of signature `(p, q)` and
/// determinant `(-1)^q`, in upper-triangle row-major coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymMat {
    pub p: usize,
    pub q: usize,
}

impl SymMat {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p + q < 2 {
            return Err(Error::InvalidFamily("symmat needs p + q >= 2".into()));
        }
        Ok(SymMat { p, q })
    }

    pub fn n(&self) -> usize {
        self.p + self.q
    }

    pub fn target_det(&self) -> i128 {
        if self.q % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn to_matrix<T: Copy + Default>(&self, x: &[T]) -> Vec<Vec<T>> {
        let n = self.n();
        let mut m = vec![vec![T::default(); n]; n];
        let mut idx = 0;
        for i in 0..n {
            for j in i..n {
                m[i][j] = x[idx];
                m[j][i] = x[idx];
                idx += 1;
            }
        }
        m
    }
}

/// Characteristic polynomial coefficients `c_0 = 1, c_1, ..., c_n` of
/// `det(xI - A) = sum c_k x^{n-k}`, by the Faddeev-LeVerrier recursion.
fn char_poly(a: &[Vec<i128>]) -> Vec<i128> {
    let n = a.len();
    let mut c = vec![1i128];
    let mut m = vec![vec![0i128; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{k-1} I
        let mut next = vec![vec![0i128; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).map(|l| a[i][l] * m[l][j]).sum::<i128>();
            }
            next[i][i] += c[k - 1];
        }
        m = next;
        let tr: i128 = (0..n).map(|i| (0..n).map(|l| a[i][l] * m[l][i]).sum::<i128>()).sum();
        c.push(-tr / k as i128);
    }
    c
}

/// `(positive, negative)` eigenvalue counts of a non-singular symmetric
/// integer matrix, exactly via Descartes' rule on the real-rooted
/// characteristic polynomial.
pub(crate) fn signature_nonsingular(a: &[Vec<i128>]) -> (usize, usize) {
    let c = char_poly(a);
    let n = a.len();
    let changes = |coeffs: &[i128]| {
        let nz: Vec<i128> = coeffs.iter().copied().filter(|&x| x != 0).collect();
        nz.windows(2).filter(|w| (w[0] > 0) != (w[1] > 0)).count()
    };
    let pos = changes(&c);
    let neg_coeffs: Vec<i128> = c.iter().enumerate().map(|(k, &x)| if (n - k) % 2 == 1 { -x } else { x }).collect();
    (pos, changes(&neg_coeffs))
}

struct SymEnum {
    fam: SymMat,
    norm: Norm,
    t: f64,
    cap: i64,
}

impl Enumerator for SymEnum {
    fn partitions(&self) -> Vec<i64> {
        (-self.cap..=self.cap).collect()
    }

    fn run(&self, key: i64, visit: &mut dyn FnMut(&[i64])) {
        let n = self.fam.n();
        let dim = n * (n + 1) / 2;
        let t2 = self.t * self.t;
        let budget = match self.norm {
            Norm::Euclidean => below(t2 - (key * key) as f64),
            Norm::Sup => Some(i64::MAX / 4),
        };
        let Some(budget) = budget else { return };
        let target = self.fam.target_det();
        let mut prefix = vec![key];
        let mut out = vec![0i64; dim];
        let mut hits: Vec<i64> = Vec::new();
        for_each_in_ball(dim - 2, budget, self.cap, &mut prefix, &mut |head, used| {
            out[..dim - 1].copy_from_slice(head);
            out[dim - 1] = 0;
            let m0 = self.fam.to_matrix(&out.iter().map(|&v| v as i128).collect::<Vec<_>>());
            let d0 = det_i128(&m0);
            let lead: Vec<Vec<i128>> = m0[..n - 1].iter().map(|r| r[..n - 1].to_vec()).collect();
            let d1 = det_i128(&lead);
            let fits = |z: i64| match self.norm {
                Norm::Euclidean => ((used + key * key + z * z) as f64) < t2,
                Norm::Sup => z.abs() <= self.cap,
            };
            hits.clear();
            if d1 != 0 {
                if (target - d0) % d1 == 0 {
                    let z = ((target - d0) / d1) as i64;
                    if fits(z) {
                        hits.push(z);
                    }
                }
            } else if d0 == target {
                let b = match self.norm {
                    Norm::Euclidean => (t2.sqrt().ceil() as i64).min(self.cap),
                    Norm::Sup => self.cap,
                };
                hits.extend((-b..=b).filter(|&z| fits(z)));
            }
            for &z in &hits {
                out[dim - 1] = z;
                let m = self.fam.to_matrix(&out.iter().map(|&v| v as i128).collect::<Vec<_>>());
                if signature_nonsingular(&m) == (self.fam.p, self.fam.q) {
                    visit(&out);
                }
            }
        });
    }
}

impl PointFamily for SymMat {
    fn spec(&self) -> String {
        format!("symmat:{},{}", self.p, self.q)
    }

    fn ambient_dim(&self) -> usize {
        self.n() * (self.n() + 1) / 2
    }

    fn contains(&self, x: &[i64]) -> bool {
        if x.len() != self.ambient_dim() {
            return false;
        }
        let m = self.to_matrix(&x.iter().map(|&v| v as i128).collect::<Vec<_>>());
        det_i128(&m) == self.target_det() && signature_nonsingular(&m) == (self.p, self.q)
    }

    fn work_estimate(&self, norm: Norm, t: f64) -> f64 {
        let d = self.ambient_dim() - 1;
        match norm {
            Norm::Euclidean => ball_unit_volume(d) * t.powi(d as i32),
            Norm::Sup => (2.0 * t).powi(d as i32),
        }
    }

    fn enumerator(&self, norm: Norm, t: f64) -> Result<Box<dyn Enumerator + '_>> {
        Ok(Box::new(SymEnum { fam: *self, norm, t, cap: coord_cap(t) }))
    }

    fn root_data(&self) -> Result<(RootSystemDesc, Weight)> {
        let n = self.n();
        let sign = |i: usize| i < self.p;
        // the root e_i - e_j (i < j) has simple-root coordinates 1 on i..j
        let list: Vec<(Vec<i64>, Multiplicity)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| {
                let root: Vec<i64> = (0..n - 1).map(|k| i64::from(k >= i && k < j)).collect();
                let m = if sign(i) == sign(j) { Multiplicity::new(1, 0) } else { Multiplicity::new(0, 1) };
                (root, m)
            })
            .collect();
        let rs = build_root_system(Family::A, n - 1, &MultiplicityProfile::PerRoot(list))?;
        let lam = two_omega_1(&rs)?;
        Ok((rs, lam))
    }

    fn boundary_form(&self, dir: &[f64]) -> f64 {
        let m = self.to_matrix(dir);
        DMatrix::from_fn(self.n(), self.n(), |i, j| m[i][j]).determinant()
    }

    fn classify_stratum(&self, dir: &[f64]) -> Result<StratumIndex> {
        if dir.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), got: dir.len() });
        }
        let u = unit(dir)?;
        check_boundary(self.boundary_form(&u))?;
        let m = self.to_matrix(&u);
        let eig = DMatrix::from_fn(self.n(), self.n(), |i, j| m[i][j]).symmetric_eigenvalues();
        let emax = eig.iter().fold(0.0f64, |a, e| a.max(e.abs()));
        let nonzero = eig.iter().filter(|e| e.abs() > RANK_TOL * emax).count();
        Ok(StratumIndex::initial(nonzero - 1))
    }
}

// ---------------------------------------------------------------------------
// Registry

type FamilyCtor = fn(&[i64]) -> Result<Box<dyn PointFamily>>;

fn usize_arg(name: &str, v: i64) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::InvalidFamily(format!("{name} must be non-negative, got {v}")))
}

fn make_quadric(a: &[i64]) -> Result<Box<dyn PointFamily>> {
    match a {
        [p, q, k] => Ok(Box::new(Quadric::new(usize_arg("p", *p)?, usize_arg("q", *q)?, *k)?)),
        [p, q] => Ok(Box::new(Quadric::new(usize_arg("p", *p)?, usize_arg("q", *q)?, 1)?)),
        _ => Err(Error::InvalidFamily("quadric takes p,q[,k]".into())),
    }
}

fn make_detsurface(a: &[i64]) -> Result<Box<dyn PointFamily>> {
    match a {
        [n, k] => Ok(Box::new(DetSurface::new(usize_arg("n", *n)?, *k)?)),
        [n] => Ok(Box::new(DetSurface::new(usize_arg("n", *n)?, 1)?)),
        _ => Err(Error::InvalidFamily("detsurface takes n[,k]".into())),
    }
}

fn make_symmat(a: &[i64]) -> Result<Box<dyn PointFamily>> {
    match a {
        [p, q] => Ok(Box::new(SymMat::new(usize_arg("p", *p)?, usize_arg("q", *q)?)?)),
        _ => Err(Error::InvalidFamily("symmat takes p,q".into())),
    }
}

const FAMILIES: &[(&str, FamilyCtor)] =
    &[("quadric", make_quadric), ("detsurface", make_detsurface), ("symmat", make_symmat)];

pub fn family_names() -> Vec<&'static str> {
    FAMILIES.iter().map(|(n, _)| *n).collect()
}

/// Parse `kind:arg,arg,...` into a family.
pub fn parse_family(spec: &str) -> Result<Box<dyn PointFamily>> {
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    let args: Vec<i64> = if args.trim().is_empty() {
        Vec::new()
    } else {
        args.split(',')
            .map(|a| a.trim().parse::<i64>().map_err(|e| Error::Parse(format!("{a:?}: {e}"))))
            .collect::<Result<_>>()?
    };
    let ctor = FAMILIES
        .iter()
        .find(|(n, _)| *n == name.trim())
        .map(|(_, c)| *c)
        .ok_or_else(|| Error::NotFound { name: name.to_string(), valid: family_names().join(", ") })?;
    ctor(&args)
}

// ---------------------------------------------------------------------------
// Driving an enumeration

/// Refuse enumerations whose work estimate exceeds `max_work`.
pub fn check_work(fam: &dyn PointFamily, norm: Norm, t: f64, max_work: f64) -> Result<()> {
    fam.check_enumerable()?;
    let w = fam.work_estimate(norm, t);
    if w > max_work {
        return Err(Error::Budget(format!(
            "{} at T = {t} needs about {w:.3e} steps, above the budget {max_work:.3e}",
            fam.spec()
        )));
    }
    Ok(())
}

/// Fold every point with norm below `t` into per-partition accumulators,
/// returned in partition order.
pub fn fold_points<A, I, F>(fam: &dyn PointFamily, norm: Norm, t: f64, init: I, step: F) -> Result<Vec<A>>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &[i64]) + Sync,
{
    if !(t >= 1.0) {
        return Err(Error::InvalidSpec(format!("T must be at least 1, got {t}")));
    }
    let e = fam.enumerator(norm, t)?;
    let keys = e.partitions();
    Ok(keys
        .par_iter()
        .map(|&key| {
            let mut acc = init();
            e.run(key, &mut |x| {
                if norm.in_ball(x, t) {
                    step(&mut acc, x)
                }
            });
            acc
        })
        .collect())
}

/// Every integral point with norm below `t`, in deterministic order.
pub fn enumerate_points(fam: &dyn PointFamily, norm: Norm, t: f64) -> Result<Vec<Vec<i64>>> {
    let parts = fold_points(fam, norm, t, Vec::new, |acc: &mut Vec<Vec<i64>>, x| acc.push(x.to_vec()))?;
    Ok(parts.into_iter().flatten().collect())
}

pub fn count_points(fam: &dyn PointFamily, norm: Norm, t: f64) -> Result<u64> {
    Ok(fold_points(fam, norm, t, || 0u64, |acc, _| *acc += 1)?.into_iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_spec_round_trip() {
        for s in ["quadric:2,2,1", "quadric:3,1,-2", "detsurface:2,1", "detsurface:3,2", "symmat:2,1"] {
            assert_eq!(parse_family(s).unwrap().spec(), s);
        }
        assert!(matches!(parse_family("torus:1"), Err(Error::NotFound { .. })));
        assert!(matches!(parse_family("quadric:2,2,0"), Err(Error::InvalidFamily(_))));
        assert!(matches!(parse_family("detsurface:2,0"), Err(Error::InvalidFamily(_))));
        assert!(matches!(parse_family("symmat:1,0"), Err(Error::InvalidFamily(_))));
    }

    #[test]
    fn exact_determinant_and_signature() {
        let m = vec![vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]];
        assert_eq!(det_i128(&m), 18);
        assert_eq!(signature_nonsingular(&m), (3, 0));
        let j = vec![vec![0, 1], vec![1, 0]];
        assert_eq!(det_i128(&j), -1);
        assert_eq!(signature_nonsingular(&j), (1, 1));
        let pivot = vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]];
        assert_eq!(det_i128(&pivot), -1);
        assert_eq!(signature_nonsingular(&pivot), (2, 1));
    }

    #[test]
    fn unimodular_reduction() {
        for c in [[6, 10, 15], [0, 0, -4], [3, 0, 0], [-2, 4, 7]] {
            let (u, g) = unimodular_reduce(c);
            let m: Vec<Vec<i128>> = u.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
            assert_eq!(det_i128(&m).abs(), 1);
            let row: Vec<i64> = (0..3).map(|j| (0..3).map(|i| c[i] * u[i][j]).sum()).collect();
            assert_eq!(row, vec![g, 0, 0]);
        }
    }

    #[test]
    fn quadric_small_ball() {
        let q = Quadric::new(2, 2, 1).unwrap();
        let pts = enumerate_points(&q, Norm::Euclidean, 2.0).unwrap();
        for e in [[1, 0, 0, 0], [-1, 0, 0, 0], [0, 1, 0, 0], [0, -1, 0, 0]] {
            assert!(pts.contains(&e.to_vec()));
        }
        assert!(pts.iter().all(|x| q.contains(x)));
        // a difference of two squares is never 2 mod 4
        let empty = Quadric::new(1, 1, 2).unwrap();
        assert!(enumerate_points(&empty, Norm::Euclidean, 30.0).unwrap().is_empty());
    }

    #[test]
    fn det2_sup_small() {
        let d = DetSurface::new(2, 1).unwrap();
        let pts = enumerate_points(&d, Norm::Sup, 5f64.sqrt() + 1e-9).unwrap();
        assert!(pts.contains(&vec![1, 0, 0, 1]));
        assert!(pts.contains(&vec![1, 1, 0, 1]));
        assert!(pts.contains(&vec![0, -1, 1, 0]));
        let mut naive = 0;
        for a in -2i64..=2 {
            for b in -2i64..=2 {
                for c in -2i64..=2 {
                    for dd in -2i64..=2 {
                        if a * dd - b * c == 1 {
                            naive += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(pts.len(), naive);
    }

    #[test]
    fn stratum_examples() {
        let d3 = DetSurface::new(3, 1).unwrap();
        let dir = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(d3.classify_stratum(&dir).unwrap(), StratumIndex::from_members([0]));
        let d2 = DetSurface::new(2, 1).unwrap();
        assert_eq!(d2.classify_stratum(&[1.0, 0.0, 0.0, 0.0]).unwrap(), StratumIndex::EMPTY);
        assert!(matches!(d2.classify_stratum(&[1.0, 0.0, 0.0, 1.0]), Err(Error::InteriorDirection { .. })));
        let q = Quadric::new(2, 2, 1).unwrap();
        assert_eq!(q.classify_stratum(&[1.0, 0.0, 0.0, 1.0]).unwrap(), StratumIndex::EMPTY);
        let s = SymMat::new(2, 1).unwrap();
        // diag(1, -1, 0): rank 2
        assert_eq!(s.classify_stratum(&[1.0, 0.0, 0.0, -1.0, 0.0, 0.0]).unwrap(), StratumIndex::from_members([0]));
        assert_eq!(s.classify_stratum(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap(), StratumIndex::EMPTY);
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-12);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((ball_unit_volume(3) - 4.0 / 3.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn volume_below_minimal_norm_is_zero() {
        let q = Quadric::new(2, 2, 4).unwrap();
        assert_eq!(q.ball_volume(Norm::Euclidean, 1.9).unwrap(), 0.0);
        assert!(matches!(q.ball_volume(Norm::Sup, 10.0), Err(Error::NoKReduction(_))));
        let s = SymMat::new(2, 1).unwrap();
        assert!(matches!(s.ball_volume(Norm::Euclidean, 10.0), Err(Error::NoKReduction(_))));
    }
}
