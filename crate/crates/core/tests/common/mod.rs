//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use symvar::families::{Norm, PointFamily};
use symvar::rootlat::{build_root_system, Family, Multiplicity, MultiplicityProfile, RootSystemDesc, Weight};
use symvar::Rational;

/// Every integer vector with `|x_i| < t` (and `|x|_2 < t` when Euclidean),
/// filtered by the exact membership test. Sorted.
pub fn naive_points(fam: &dyn PointFamily, norm: Norm, t: f64) -> Vec<Vec<i64>> {
    fn rec(fam: &dyn PointFamily, norm: Norm, t: f64, b: i64, x: &mut Vec<i64>, sq: i64, out: &mut Vec<Vec<i64>>) {
        if x.len() == fam.ambient_dim() {
            if norm.in_ball(x, t) && fam.contains(x) {
                out.push(x.clone());
            }
            return;
        }
        for v in -b..=b {
            let s = sq + v * v;
            if norm == Norm::Euclidean && (s as f64) >= t * t {
                continue;
            }
            x.push(v);
            rec(fam, norm, t, b, x, s, out);
            x.pop();
        }
    }
    let b = t.ceil() as i64;
    let mut out = Vec::new();
    rec(fam, norm, t, b, &mut Vec::new(), 0, &mut out);
    out.sort();
    out
}

/// Positive roots as the orbit of the simple roots under simple
/// reflections, computed from the Cartan matrix alone.
pub fn reflection_closure(cartan: &[Vec<i64>]) -> BTreeSet<Vec<i64>> {
    let r = cartan.len();
    let mut all: BTreeSet<Vec<i64>> = (0..r).map(|i| (0..r).map(|j| i64::from(i == j)).collect()).collect();
    let mut frontier: Vec<Vec<i64>> = all.iter().cloned().collect();
    while let Some(beta) = frontier.pop() {
        for i in 0..r {
            // <beta, alpha_i^vee> = sum_j beta_j C_ji
            let pairing: i64 = (0..r).map(|j| beta[j] * cartan[j][i]).sum();
            let mut img = beta.clone();
            img[i] -= pairing;
            if !all.contains(&img) {
                all.insert(img.clone());
                frontier.push(img);
            }
        }
    }
    all.into_iter().filter(|b| b.iter().all(|&c| c >= 0)).collect()
}

/// `u_alpha / m_alpha` with `2 rho` summed directly from the root list.
pub fn ratios_oracle(rs: &RootSystemDesc, lam: &Weight) -> Vec<Rational> {
    let r = rs.rank();
    let mut u = vec![Rational::zero(); r];
    for (root, m) in rs.positive_roots().iter().zip(rs.multiplicities()) {
        for k in 0..r {
            u[k] = &u[k] + &Rational::from_int(root[k] * i64::from(m.total()));
        }
    }
    (0..r).map(|k| &u[k] / &lam.coords[k]).collect()
}

/// `(a, b, I)` for the stratum `base` straight from the definition.
pub fn exponents_oracle(ratios: &[Rational], base: &BTreeSet<usize>) -> (Rational, u32, BTreeSet<usize>) {
    let outside: Vec<usize> = (0..ratios.len()).filter(|k| !base.contains(k)).collect();
    let a = outside.iter().map(|&k| ratios[k].clone()).max().expect("proper subset");
    let attained = outside.iter().filter(|&&k| ratios[k] == a).count();
    let i: BTreeSet<usize> = (0..ratios.len()).filter(|k| base.contains(k) || ratios[*k] < a).collect();
    (a, attained as u32, i)
}

/// Simple-root coordinates of a weight given in fundamental weights,
/// solving `C^T m = n` by exact Gaussian elimination.
pub fn solve_fundamental(cartan: &[Vec<i64>], n: &[Rational]) -> Vec<Rational> {
    let r = cartan.len();
    // omega_i = sum_j (C^-1)_{ij} alpha_j in this convention: solve m C = n
    let mut a: Vec<Vec<Rational>> = (0..r)
        .map(|i| {
            let mut row: Vec<Rational> = (0..r).map(|j| Rational::from_int(cartan[j][i])).collect();
            row.push(n[i].clone());
            row
        })
        .collect();
    for col in 0..r {
        let piv = (col..r).find(|&k| !a[k][col].is_zero()).expect("nonsingular");
        a.swap(col, piv);
        let p = a[col][col].clone();
        for c in col..=r {
            a[col][c] = &a[col][c] / &p;
        }
        for k in 0..r {
            if k != col && !a[k][col].is_zero() {
                let f = a[k][col].clone();
                for c in col..=r {
                    let d = &f * &a[col][c];
                    a[k][c] = &a[k][c] - &d;
                }
            }
        }
    }
    a.into_iter().map(|row| row[r].clone()).collect()
}

/// Root systems of rank at most `max_rank` with a few multiplicity profiles.
pub fn systems_up_to(max_rank: usize) -> Vec<RootSystemDesc> {
    let uniform = [Multiplicity::new(1, 0), Multiplicity::new(1, 1), Multiplicity::new(2, 0), Multiplicity::new(0, 1)];
    let mut out = Vec::new();
    for fam in [Family::A, Family::B, Family::C, Family::D] {
        for rank in 1..=max_rank {
            for m in uniform {
                if let Ok(rs) = build_root_system(fam, rank, &MultiplicityProfile::Uniform(m)) {
                    out.push(rs);
                }
            }
            if matches!(fam, Family::B | Family::C) && rank >= 2 {
                let p = MultiplicityProfile::ByLength { long: Multiplicity::new(1, 0), short: Multiplicity::new(3, 1) };
                out.push(build_root_system(fam, rank, &p).unwrap());
            }
        }
    }
    out
}

/// Dominant weights with fundamental coordinates in `0..=max`, not all zero.
pub fn dominant_weights(rs: &RootSystemDesc, max: i64) -> Vec<Weight> {
    let r = rs.rank();
    let mut out = Vec::new();
    let total = (max + 1).pow(r as u32);
    for code in 1..total {
        let mut c = code;
        let n: Vec<Rational> = (0..r)
            .map(|_| {
                let d = c % (max + 1);
                c /= max + 1;
                Rational::from_int(d)
            })
            .collect();
        out.push(Weight::new(solve_fundamental(rs.cartan(), &n)));
    }
    out
}
