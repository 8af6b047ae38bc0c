//! Chamber integrals of expansion maps and their limit functionals.
//!
//! All chamber points are given by root values `s_i = alpha_i(a)`, so the
//! closed chamber is the positive orthant and `da` is Lebesgue measure in
//! `s`. An expansion map is `phi(s) = sum_i exp(lam_i(s)) w_i` with a
//! distinguished leading weight `lam_1 = sum m_alpha alpha`, and
//!
//! ```text
//! int f(phi(s)/T) e^{chi(s)} ds  ~  kappa * L(f) * T^a (log T)^(b-1)
//! ```
//!
//! where `kappa` is the coarea volume of the slice `{s_I = 0, lam_1 = 1}` and
//! `L(f) = int_{s_I >= 0} int_R f(e^u psi(s_I)) e^{chi(s_I) + a u} du ds_I`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope;
use crate::quadrature::{self, QuadOptions, QuadResult};
use crate::rational::Rational;
use crate::rootlat::{self, RootSystemDesc, Weight};
use crate::strata::{self, ExponentTriple, StratumIndex};
use crate::testfn::TestFunction;

/// Tolerance for the numerical independence check on the vectors `w_i`.
pub const INDEPENDENCE_TOL: f64 = 1e-9;

/// Exponential weights are cut where they drop below `e^-TAIL`.
const TAIL: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub lam: Weight,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpMapSpec {
    pub rank: usize,
    pub terms: Vec<ExpTerm>,
    pub lead: usize,
    pub chi: Weight,
}

impl ExpMapSpec {
    pub fn new(terms: Vec<ExpTerm>, lead: usize, chi: Weight) -> Result<Self> {
        let spec = ExpMapSpec { rank: chi.rank(), terms, lead, chi };
        spec.validate()?;
        Ok(spec)
    }

    pub fn lead_weight(&self) -> &Weight {
        &self.terms[self.lead].lam
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.rank;
        if r == 0 {
            return Err(Error::InvalidSpec("rank must be positive".into()));
        }
        if self.terms.is_empty() {
            return Err(Error::Empty("terms"));
        }
        if self.lead >= self.terms.len() {
            return Err(Error::IndexOutOfRange { index: self.lead, rank: self.terms.len() });
        }
        if self.chi.rank() != r {
            return Err(Error::DimensionMismatch { expected: r, got: self.chi.rank() });
        }
        let d = self.terms[0].w.len();
        if d == 0 {
            return Err(Error::InvalidSpec("vectors w_i must be non-empty".into()));
        }
        for t in &self.terms {
            if t.lam.rank() != r {
                return Err(Error::DimensionMismatch { expected: r, got: t.lam.rank() });
            }
            if t.w.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: t.w.len() });
            }
            if t.w.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidSpec("non-finite entry in w".into()));
            }
        }
        let lead = self.lead_weight();
        for (index, m) in lead.coords.iter().enumerate() {
            if !m.is_positive() {
                return Err(Error::NonPositiveWeight { index, value: m.to_string() });
            }
        }
        for (i, t) in self.terms.iter().enumerate() {
            if lead.sub(&t.lam).coords.iter().any(Rational::is_negative) {
                return Err(Error::InvalidSpec(format!("weight of term {i} is not below the leading weight")));
            }
        }
        let sv = singular_values(&self.w_matrix());
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if self.terms.len() > d || smax == 0.0 || smin <= INDEPENDENCE_TOL * smax {
            return Err(Error::InvalidSpec("vectors w_i are not linearly independent".into()));
        }
        let a = chi_exponents(self)?.a;
        if !a.is_positive() {
            return Err(Error::InvalidSpec("character must have a positive exponent".into()));
        }
        Ok(())
    }

    /// `d x k` matrix with the `w_i` as columns.
    fn w_matrix(&self) -> DMatrix<f64> {
        let d = self.terms[0].w.len();
        DMatrix::from_fn(d, self.terms.len(), |r, c| self.terms[c].w[r])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: ExpMapSpec = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

pub(crate) fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Exact `(a_chi, b_chi, I_chi)` from the ratios `v_alpha / m_alpha`.
pub fn chi_exponents(spec: &ExpMapSpec) -> Result<ExponentTriple> {
    let m = &spec.lead_weight().coords;
    if let Some(index) = m.iter().position(|x| !x.is_positive()) {
        return Err(Error::NonPositiveWeight { index, value: m[index].to_string() });
    }
    let r: Vec<Rational> = spec.chi.coords.iter().zip(m).map(|(v, m)| v / m).collect();
    Ok(strata::exponents_from_ratios(&r, StratumIndex::EMPTY))
}

/// Exact slice volume; the zero-dimensional slice has volume 1 per unit
/// coarea density, i.e. `1 / m` on a single free coordinate.
pub fn kappa_chi_exact(spec: &ExpMapSpec) -> Result<Rational> {
    spec.validate()?;
    let e = chi_exponents(spec)?;
    let mj: Vec<Rational> =
        (0..spec.rank).filter(|&k| !e.i.contains(k)).map(|k| spec.lead_weight().coords[k].clone()).collect();
    polytope::coarea_slice_volume(&mj)
}

pub fn kappa_chi(spec: &ExpMapSpec) -> Result<f64> {
    Ok(kappa_chi_exact(spec)?.to_f64())
}

/// Floating-point view of a validated spec.
#[derive(Debug, Clone)]
struct Prepared {
    m: Vec<f64>,
    v: Vec<f64>,
    a: f64,
    b: u32,
    iset: StratumIndex,
    lams: Vec<Vec<f64>>,
    ws: Vec<Vec<f64>>,
    in_psi: Vec<bool>,
    sigma_min: f64,
}

fn prepare(spec: &ExpMapSpec) -> Result<Prepared> {
    spec.validate()?;
    let e = chi_exponents(spec)?;
    let lead = spec.lead_weight();
    let in_psi = spec
        .terms
        .iter()
        .map(|t| {
            let diff = lead.sub(&t.lam);
            (0..spec.rank).all(|k| e.i.contains(k) || diff.coords[k].is_zero())
        })
        .collect();
    let sigma_min = singular_values(&spec.w_matrix()).into_iter().fold(f64::INFINITY, f64::min);
    Ok(Prepared {
        m: lead.to_f64(),
        v: spec.chi.to_f64(),
        a: e.a.to_f64(),
        b: e.b,
        iset: e.i,
        lams: spec.terms.iter().map(|t| t.lam.to_f64()).collect(),
        ws: spec.terms.iter().map(|t| t.w.clone()).collect(),
        in_psi,
        sigma_min,
    })
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `L_chi(f)`.
pub fn l_chi(spec: &ExpMapSpec, f: &dyn TestFunction, opts: &QuadOptions) -> Result<QuadResult> {
    let p = prepare(spec)?;
    let members = p.iset.members();
    let k = members.len();
    let (rlo, rhi) = f.radial_support();
    let vhi = rhi.ln();
    let vlo = if rlo > 0.0 { rlo.ln() } else { vhi - TAIL / p.a };
    let mut lo = vec![0.0; k];
    let mut hi: Vec<f64> = members.iter().map(|&i| TAIL / (p.a * p.m[i] - p.v[i])).collect();
    lo.push(vlo);
    hi.push(vhi);
    let mut initial = vec![8; k];
    initial.push(if rlo > 0.0 { 1 } else { 4 });
    let d = p.ws[0].len();
    let integrand = |x: &[f64]| -> f64 {
        let (s_i, v) = (&x[..k], x[k]);
        let exps: Vec<f64> = p
            .lams
            .iter()
            .map(|lam| members.iter().zip(s_i).map(|(&j, s)| lam[j] * s).sum::<f64>())
            .collect();
        let emax = exps.iter().zip(&p.in_psi).filter(|(_, &b)| b).map(|(e, _)| *e).fold(f64::NEG_INFINITY, f64::max);
        let mut psi = vec![0.0; d];
        for ((e, w), _) in exps.iter().zip(&p.ws).zip(&p.in_psi).filter(|(_, &b)| b) {
            let c = (e - emax).exp();
            for (acc, wi) in psi.iter_mut().zip(w) {
                *acc += c * wi;
            }
        }
        let n = psi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = v.exp() / n;
        let y: Vec<f64> = psi.iter().map(|x| x * scale).collect();
        let fv = f.eval(&y);
        if fv == 0.0 {
            return 0.0;
        }
        let chi_i: f64 = members.iter().zip(s_i).map(|(&j, s)| p.v[j] * s).sum();
        fv * (chi_i + p.a * (v - emax - n.ln())).exp()
    };
    quadrature::integrate_box(&integrand, &lo, &hi, &initial, opts)
}

/// The chamber integral at scale `T` together with its normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteT {
    #[serde(rename = "T")]
    pub t: f64,
    pub integral: f64,
    /// `integral / (T^a (log T)^(b-1))`.
    pub normalized_ratio: f64,
    /// Quadrature error estimate on `normalized_ratio`.
    pub error: f64,
    pub evals: usize,
}

/// `int_{s >= 0} f(phi(s)/T) e^{chi(s)} ds` over the truncated chamber
/// `lam_1(s) <= log(cT)`, outside of which `f(phi/T)` vanishes.
pub fn finite_t_integral(spec: &ExpMapSpec, f: &dyn TestFunction, t: f64, opts: &QuadOptions) -> Result<FiniteT> {
    if !(t >= 1.0) {
        return Err(Error::InvalidSpec(format!("T must be at least 1, got {t}")));
    }
    let p = prepare(spec)?;
    let ell = t.ln();
    let (rlo, rhi) = f.radial_support();
    let cap = (rhi / p.sigma_min).ln() + ell;
    if cap <= 0.0 {
        return Ok(FiniteT { t, integral: 0.0, normalized_ratio: 0.0, error: 0.0, evals: 0 });
    }
    let r = p.m.len();
    let lo = vec![0.0; r];
    let hi: Vec<f64> = p.m.iter().map(|m| cap / m).collect();
    let log_width = if rlo > 0.0 { (rhi / rlo).ln() } else { 1.0 };
    let pieces = ((cap / log_width).ceil() as usize).clamp(1, 64);
    let initial = vec![pieces; r];
    let d = p.ws[0].len();
    let integrand = |s: &[f64]| -> f64 {
        let mut y = vec![0.0; d];
        for (lam, w) in p.lams.iter().zip(&p.ws) {
            let c = (dot(lam, s) - ell).exp();
            for (acc, wi) in y.iter_mut().zip(w) {
                *acc += c * wi;
            }
        }
        let fv = f.eval(&y);
        if fv == 0.0 {
            return 0.0;
        }
        fv * (dot(&p.v, s) - p.a * ell).exp()
    };
    let q = quadrature::integrate_box(&integrand, &lo, &hi, &initial, opts)?;
    let lnorm = if p.b > 1 { ell.powi(p.b as i32 - 1) } else { 1.0 };
    Ok(FiniteT {
        t,
        integral: q.value * (p.a * ell).exp(),
        normalized_ratio: q.value / lnorm,
        error: q.error / lnorm,
        evals: q.evals,
    })
}

/// `kappa_chi * L_chi(f)`, the predicted limit of the normalized ratio.
pub fn limit_target(spec: &ExpMapSpec, f: &dyn TestFunction, opts: &QuadOptions) -> Result<f64> {
    Ok(kappa_chi(spec)? * l_chi(spec, f, opts)?.value)
}

/// `int_{s >= 0, lam_1(s) <= log T} e^{chi(s)} ds / (T^a (log T)^(b-1))`,
/// by nested one-dimensional quadrature over the simplex.
pub fn truncated_chamber_integral(spec: &ExpMapSpec, t: f64) -> Result<f64> {
    if !(t > 1.0) {
        return Err(Error::InvalidSpec(format!("T must exceed 1, got {t}")));
    }
    let p = prepare(spec)?;
    let ell = t.ln();
    let opts = QuadOptions { rel_tol: 1e-9, abs_tol: 1e-300, max_evals: 200_000 };
    let n = nested_simplex(&p.v, &p.m, p.a, 0, ell, &opts);
    let lnorm = if p.b > 1 { ell.powi(p.b as i32 - 1) } else { 1.0 };
    Ok(n / lnorm)
}

// N_k(B) = int_{sum_{j>=k} m_j s_j <= B} exp(sum_{j>=k} v_j s_j - a B) ds
fn nested_simplex(v: &[f64], m: &[f64], a: f64, k: usize, budget: f64, opts: &QuadOptions) -> f64 {
    if k == v.len() {
        return (-a * budget).exp();
    }
    let g = |x: f64| ((v[k] - a * m[k]) * x).exp() * nested_simplex(v, m, a, k + 1, (budget - m[k] * x).max(0.0), opts);
    match quadrature::integrate_1d(&g, 0.0, budget / m[k], opts) {
        Ok(r) => r.value,
        Err(Error::NonConvergence { estimate, .. }) => estimate,
        Err(_) => f64::NAN,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    Xi,
    #[serde(rename = "delta_I")]
    DeltaI,
    #[serde(rename = "xi_I")]
    XiI,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChamberDensity {
    pub rs: RootSystemDesc,
    pub kind: DensityKind,
    pub i: StratumIndex,
}

fn ln_sinh(x: f64) -> f64 {
    if x < 1.0 {
        x.sinh().ln()
    } else {
        x + (-(-2.0 * x).exp()).ln_1p() - std::f64::consts::LN_2
    }
}

fn ln_cosh(x: f64) -> f64 {
    x.abs() + (-2.0 * x.abs()).exp().ln_1p() - std::f64::consts::LN_2
}

/// Logarithm of the density at a chamber point given by root values; `-inf`
/// where the density vanishes.
pub fn log_density(d: &ChamberDensity, s: &[f64]) -> Result<f64> {
    let r = d.rs.rank();
    if s.len() != r {
        return Err(Error::DimensionMismatch { expected: r, got: s.len() });
    }
    if let Some(x) = s.iter().find(|x| !(**x >= -1e-12)) {
        return Err(Error::InvalidSpec(format!("point is outside the closed chamber (root value {x})")));
    }
    let members = d.i.member_set();
    let in_i: Vec<bool> = match d.kind {
        DensityKind::Xi => vec![true; d.rs.positive_roots().len()],
        _ => d.rs.positive_roots().iter().map(|root| root.iter().enumerate().all(|(k, &c)| c == 0 || members.contains(&k))).collect(),
    };
    let mut acc = 0.0;
    for ((root, mult), inside) in d.rs.positive_roots().iter().zip(d.rs.multiplicities()).zip(in_i) {
        let x = root.iter().zip(s).map(|(&c, v)| c as f64 * v.max(0.0)).sum::<f64>();
        if inside {
            if mult.lp > 0 {
                if x == 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                acc += mult.lp as f64 * ln_sinh(x);
            }
            if mult.lm > 0 {
                acc += mult.lm as f64 * ln_cosh(x);
            }
        } else if d.kind == DensityKind::XiI {
            acc += mult.total() as f64 * x;
        }
    }
    Ok(acc)
}

pub fn density_eval(d: &ChamberDensity, s: &[f64]) -> Result<f64> {
    Ok(log_density(d, s)?.exp())
}

/// `2 rho` evaluated at a chamber point given by root values.
pub fn two_rho_at(rs: &RootSystemDesc, s: &[f64]) -> f64 {
    rootlat::two_rho(rs).eval_root_values(s)
}
