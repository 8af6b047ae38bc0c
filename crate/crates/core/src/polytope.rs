//! Exact polytope computations: vertex enumeration, affine dimension of
//! faces, simplex volumes and the LP form of the growth exponents.
//!
//! Chamber points are handled in root-value coordinates `s_i = alpha_i(a)`,
//! where the closed chamber is the positive orthant. Optimal values and face
//! dimensions do not depend on the choice of linear coordinates.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::exact::{self, Row};
use crate::rational::Rational;
use crate::rootlat::{self, RootSystemDesc, Weight};
use crate::simplex::{self, LpOutcome};

/// Vertices of `{x : A x <= b}` by brute-force basis enumeration.
pub fn vertices(a: &[Row], b: &[Rational]) -> Vec<Vec<Rational>> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut out: BTreeSet<Vec<Rational>> = BTreeSet::new();
    if n == 0 {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (0..n).collect();
    if n > m {
        return Vec::new();
    }
    loop {
        let sub: Vec<Row> = idx.iter().map(|&i| a[i].clone()).collect();
        let rhs: Vec<Rational> = idx.iter().map(|&i| b[i].clone()).collect();
        if let Some(x) = exact::solve(&sub, &rhs) {
            let feasible = a.iter().zip(b).all(|(row, bi)| exact::dot(row, &x) <= *bi);
            if feasible {
                out.insert(x);
            }
        }
        // next combination
        let mut k = n;
        loop {
            if k == 0 {
                return out.into_iter().collect();
            }
            k -= 1;
            if idx[k] != k + m - n {
                break;
            }
            if k == 0 {
                return out.into_iter().collect();
            }
        }
        idx[k] += 1;
        for j in k + 1..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Dimension of the affine hull of a point set; `None` for the empty set.
pub fn affine_dimension(points: &[Vec<Rational>]) -> Option<usize> {
    let first = points.first()?;
    let diffs: Vec<Row> = points[1..].iter().map(|p| p.iter().zip(first).map(|(x, y)| x - y).collect()).collect();
    Some(exact::rank(&diffs))
}

/// Growth exponents from the polytope `P = {s in chamber : lam_i(s) <= 1}`:
/// `a = max 2rho` over `P` and `b = 1 + dim` of the optimal face.
pub fn polytope_exponents(rs: &RootSystemDesc, weights: &[Weight]) -> Result<(Rational, u32)> {
    if weights.is_empty() {
        return Err(Error::Empty("weights"));
    }
    let r = rs.rank();
    for w in weights {
        if w.rank() != r {
            return Err(Error::DimensionMismatch { expected: r, got: w.rank() });
        }
    }
    let u = rootlat::two_rho(rs).coords;
    let a: Vec<Row> = weights.iter().map(|w| w.coords.clone()).collect();
    let b = vec![Rational::one(); a.len()];
    let value = match simplex::maximize(&u, &a, &b) {
        LpOutcome::Optimal { value, .. } => value,
        LpOutcome::Unbounded { ray } => {
            return Err(Error::Unbounded { ray: ray.iter().map(ToString::to_string).collect() })
        }
    };
    // H-representation including the chamber walls -s_i <= 0
    let mut h = a;
    let mut hb = b;
    for i in 0..r {
        h.push((0..r).map(|j| if i == j { -Rational::one() } else { Rational::zero() }).collect());
        hb.push(Rational::zero());
    }
    let face: Vec<Vec<Rational>> = vertices(&h, &hb).into_iter().filter(|v| exact::dot(&u, v) == value).collect();
    let dim = affine_dimension(&face).ok_or_else(|| Error::Internal("optimal face has no vertices".into()))?;
    Ok((value, dim as u32 + 1))
}

/// Volume of the slice `{x >= 0, m.x = 1}` measured so that
/// `vol{x >= 0, m.x <= u} = integral_0^u vol(slice at level v) dv`.
///
/// The slice is the simplex with vertices `e_j / m_j`; its cone from the
/// origin has volume `|det V| / d!`, and the slice volume is `d` times that.
/// An empty coefficient list is the point-mass case with volume 1.
pub fn coarea_slice_volume(m: &[Rational]) -> Result<Rational> {
    let d = m.len();
    if d == 0 {
        return Ok(Rational::one());
    }
    if m.iter().any(|x| !x.is_positive()) {
        return Err(Error::Internal("slice functional must be positive on the chamber".into()));
    }
    let mut h: Vec<Row> = vec![m.to_vec(), m.iter().map(|x| -x).collect()];
    let mut hb = vec![Rational::one(), -Rational::one()];
    for i in 0..d {
        h.push((0..d).map(|j| if i == j { -Rational::one() } else { Rational::zero() }).collect());
        hb.push(Rational::zero());
    }
    let verts = vertices(&h, &hb);
    if verts.len() != d {
        return Err(Error::Internal(format!("expected a simplex slice, found {} vertices", verts.len())));
    }
    let det = exact::det(&verts).abs();
    let fact = (1..d as i64).fold(Rational::one(), |acc, k| acc * Rational::from_int(k));
    Ok(det / fact)
}
