//! Exact rational simplex method for `max c.x  s.t.  A x <= b, x >= 0`
//! with `b >= 0`, so the origin is a feasible starting basis. Bland's rule
//! prevents cycling.

use crate::exact::Row;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rational, x: Vec<Rational> },
    /// A direction `d >= 0` with `A d <= 0` and `c.d > 0`.
    Unbounded { ray: Vec<Rational> },
}

pub fn maximize(c: &[Rational], a: &[Row], b: &[Rational]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    assert!(b.iter().all(|x| !x.is_negative()), "origin must be feasible");
    let width = n + m;
    // tableau rows: coefficients over [x | slack], rhs
    let mut t: Vec<Row> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    let mut rhs: Vec<Rational> = b.to_vec();
    // reduced costs c_j - z_j
    let mut cost: Row = c.to_vec();
    cost.extend((0..m).map(|_| Rational::zero()));
    let mut value = Rational::zero();
    let mut basis: Vec<usize> = (n..n + m).collect();

    loop {
        let Some(enter) = (0..width).find(|&j| cost[j].is_positive()) else {
            break;
        };
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &rhs[i] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, _)) = leave else {
            let mut ray = vec![Rational::zero(); n];
            if enter < n {
                ray[enter] = Rational::one();
            }
            for i in 0..m {
                if basis[i] < n {
                    ray[basis[i]] = -&t[i][enter];
                }
            }
            return LpOutcome::Unbounded { ray };
        };
        // pivot
        let inv = t[row][enter].recip();
        for x in t[row].iter_mut() {
            *x = &*x * &inv;
        }
        rhs[row] = &rhs[row] * &inv;
        for i in 0..m {
            if i != row && !t[i][enter].is_zero() {
                let f = t[i][enter].clone();
                for j in 0..width {
                    let d = &f * &t[row][j];
                    t[i][j] -= &d;
                }
                let d = &f * &rhs[row];
                rhs[i] -= &d;
            }
        }
        let f = cost[enter].clone();
        for j in 0..width {
            let d = &f * &t[row][j];
            cost[j] -= &d;
        }
        value = value + &f * &rhs[row];
        basis[row] = enter;
    }

    let mut x = vec![Rational::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = rhs[i].clone();
        }
    }
    LpOutcome::Optimal { value, x }
}
