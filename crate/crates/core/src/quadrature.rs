//! Globally adaptive tensor-product Gauss–Kronrod cubature on boxes.
//!
//! Each box is integrated with the tensor 15-point Kronrod rule; the
//! embedded 7-point Gauss rule gives the error estimate and, one dimension
//! at a time, the split direction. Boxes are refined worst-first in batches;
//! children of a batch are evaluated with a parallel map whose output order
//! is fixed, and the final sum runs over boxes in creation order, so results
//! do not depend on the thread count.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights at the odd-indexed Kronrod nodes (1, 3, 5, 7 = centre).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// The 15 Kronrod nodes on [-1, 1] with Kronrod and Gauss weights.
fn rule() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    for k in 0..15 {
        let (idx, sign) = if k < 7 { (k, -1.0) } else if k == 7 { (7, 0.0) } else { (14 - k, 1.0) };
        let x = if idx == 7 { 0.0 } else { sign * XGK[idx] };
        let wg = if idx % 2 == 1 { WG[idx / 2] } else { 0.0 };
        out[k] = (x, WGK[idx], wg);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { rel_tol: 1e-6, abs_tol: 0.0, max_evals: 10_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

#[derive(Debug, Clone)]
struct Cell {
    lo: Vec<f64>,
    hi: Vec<f64>,
    value: f64,
    error: f64,
    split_dim: usize,
    id: u64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.id.cmp(&self.id))
    }
}

fn evaluate_cell<F>(f: &F, lo: &[f64], hi: &[f64], id: u64) -> Cell
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let d = lo.len();
    let r = rule();
    let half: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
    let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let jac: f64 = half.iter().product();
    let n = 15usize.pow(d as u32);
    let mut kron = 0.0;
    let mut gauss = 0.0;
    // per-dimension Gauss-in-one-direction sums
    let mut mixed = vec![0.0; d];
    let mut x = vec![0.0; d];
    let mut digits = vec![0usize; d];
    for code in 0..n {
        let mut c = code;
        for k in 0..d {
            digits[k] = c % 15;
            c /= 15;
            x[k] = mid[k] + half[k] * r[digits[k]].0;
        }
        let fx = f(&x);
        if fx == 0.0 {
            continue;
        }
        let wk: f64 = digits.iter().map(|&i| r[i].1).product();
        let wg: f64 = digits.iter().map(|&i| r[i].2).product();
        kron += wk * fx;
        gauss += wg * fx;
        for k in 0..d {
            let g = r[digits[k]].2;
            if g != 0.0 {
                mixed[k] += wk / r[digits[k]].1 * g * fx;
            }
        }
    }
    let value = kron * jac;
    let error = ((kron - gauss) * jac).abs();
    let split_dim = (0..d)
        .max_by(|&a, &b| {
            let ea = ((kron - mixed[a]) * jac).abs();
            let eb = ((kron - mixed[b]) * jac).abs();
            ea.total_cmp(&eb).then_with(|| b.cmp(&a))
        })
        .unwrap_or(0);
    Cell { lo: lo.to_vec(), hi: hi.to_vec(), value, error, split_dim, id }
}

/// Integrate `f` over the box `[lo, hi]`, starting from a uniform grid with
/// `initial[k]` pieces along dimension `k`.
pub fn integrate_box<F>(f: &F, lo: &[f64], hi: &[f64], initial: &[usize], opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let d = lo.len();
    assert_eq!(d, hi.len());
    assert_eq!(d, initial.len());
    if d == 0 {
        return Ok(QuadResult { value: f(&[]), error: 0.0, evals: 1 });
    }
    let per_cell = 15usize.pow(d as u32);
    let counts: Vec<usize> = initial.iter().map(|&c| c.max(1)).collect();
    let total: usize = counts.iter().product();
    let seeds: Vec<(Vec<f64>, Vec<f64>)> = (0..total)
        .map(|code| {
            let mut c = code;
            let mut a = vec![0.0; d];
            let mut b = vec![0.0; d];
            for k in 0..d {
                let i = c % counts[k];
                c /= counts[k];
                let w = (hi[k] - lo[k]) / counts[k] as f64;
                a[k] = lo[k] + w * i as f64;
                b[k] = if i + 1 == counts[k] { hi[k] } else { lo[k] + w * (i + 1) as f64 };
            }
            (a, b)
        })
        .collect();
    let mut cells: Vec<Cell> = seeds
        .par_iter()
        .enumerate()
        .map(|(id, (a, b))| evaluate_cell(f, a, b, id as u64))
        .collect();
    let mut next_id = cells.len() as u64;
    let mut evals = cells.len() * per_cell;
    let mut retired: Vec<Cell> = Vec::new();
    let mut heap: BinaryHeap<Cell> = cells.drain(..).collect();

    let sums = |heap: &BinaryHeap<Cell>, retired: &[Cell]| -> (f64, f64) {
        let mut all: Vec<&Cell> = heap.iter().chain(retired.iter()).collect();
        all.sort_by_key(|c| c.id);
        all.iter().fold((0.0, 0.0), |(v, e), c| (v + c.value, e + c.error))
    };

    let (mut value, mut error) = sums(&heap, &retired);
    let batch = 16usize;
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= tol {
            break;
        }
        if evals + 2 * per_cell > opts.max_evals {
            let (v, e) = sums(&heap, &retired);
            return Err(Error::NonConvergence { estimate: v, error: e, evals });
        }
        let room = (opts.max_evals - evals) / (2 * per_cell);
        let mut parents = Vec::new();
        while parents.len() < batch.min(room.max(1)) {
            match heap.pop() {
                Some(c) => parents.push(c),
                None => break,
            }
        }
        if parents.is_empty() {
            break;
        }
        let halves: Vec<(Vec<f64>, Vec<f64>, u64)> = parents
            .iter()
            .flat_map(|p| {
                let k = p.split_dim;
                let m = 0.5 * (p.lo[k] + p.hi[k]);
                let mut hi1 = p.hi.clone();
                hi1[k] = m;
                let mut lo2 = p.lo.clone();
                lo2[k] = m;
                let id = next_id;
                next_id += 2;
                [(p.lo.clone(), hi1, id), (lo2, p.hi.clone(), id + 1)]
            })
            .collect();
        let children: Vec<Cell> = halves.par_iter().map(|(a, b, id)| evaluate_cell(f, a, b, *id)).collect();
        evals += children.len() * per_cell;
        for p in &parents {
            value -= p.value;
            error -= p.error;
        }
        for c in children {
            value += c.value;
            error += c.error;
            // cells too small to split further are retired
            let width = c.hi[c.split_dim] - c.lo[c.split_dim];
            if width <= 1e-13 * (1.0 + c.lo[c.split_dim].abs()) {
                retired.push(c);
            } else {
                heap.push(c);
            }
        }
        error = error.max(0.0);
        if heap.is_empty() {
            break;
        }
    }
    let (value, error) = sums(&heap, &retired);
    Ok(QuadResult { value, error, evals })
}

/// One-dimensional adaptive Gauss–Kronrod integration on `[a, b]`.
pub fn integrate_1d<F>(f: &F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> f64 + Sync + ?Sized,
{
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, evals: 0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let g = |x: &[f64]| f(x[0]);
    let r = integrate_box(&g, &[lo], &[hi], &[4], opts)?;
    Ok(QuadResult { value: sign * r.value, ..r })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials() {
        let r = rule();
        let ks: f64 = r.iter().map(|n| n.1).sum();
        let gs: f64 = r.iter().map(|n| n.2).sum();
        assert!((ks - 2.0).abs() < 1e-14);
        assert!((gs - 2.0).abs() < 1e-14);
        // Gauss-7 is exact to degree 13
        let g12: f64 = r.iter().map(|n| n.2 * n.0.powi(12)).sum();
        assert!((g12 - 2.0 / 13.0).abs() < 1e-13);
    }

    #[test]
    fn one_dimensional() {
        let opts = QuadOptions { rel_tol: 1e-12, ..Default::default() };
        let r = integrate_1d(&|x: f64| x.exp(), 0.0, 3.0, &opts).unwrap();
        assert!((r.value - (3f64.exp() - 1.0)).abs() < 1e-10);
        let r = integrate_1d(&|x: f64| x.sqrt(), 1.0, 0.0, &opts).unwrap();
        assert!((r.value + 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn two_dimensional_exponential() {
        let opts = QuadOptions { rel_tol: 1e-10, ..Default::default() };
        let f = |x: &[f64]| (2.0 * x[0] + x[1]).exp();
        let r = integrate_box(&f, &[0.0, 0.0], &[1.0, 2.0], &[1, 1], &opts).unwrap();
        let exact = (2f64.exp() - 1.0) / 2.0 * (2f64.exp() - 1.0);
        assert!((r.value - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let opts = QuadOptions { rel_tol: 1e-15, abs_tol: 0.0, max_evals: 2000 };
        let f = |x: &[f64]| if x[0] < 0.3 { 1.0 } else { 0.0 };
        match integrate_box(&f, &[0.0], &[1.0], &[1], &opts) {
            Err(Error::NonConvergence { estimate, evals, .. }) => {
                assert!((estimate - 0.3).abs() < 0.05);
                assert!(evals <= 2000);
            }
            other => panic!("{other:?}"),
        }
    }
}
