//! Root systems, weights and rational subspaces.
//!
//! # Coordinate convention
//!
//! Weights are stored in the simple-root basis: `w = sum_i w_i alpha_i`.
//! A chamber point is stored by its coroot coordinates
//! `t = (t_1, ..., t_r)`, i.e. `a = sum_j t_j alpha_j^vee`. Then
//! `alpha_i(a) = sum_j C_ij t_j` with `C_ij = 2<alpha_i, alpha_j>/<alpha_j, alpha_j>`,
//! and a weight evaluates as `w(t) = sum_i w_i (C t)_i`. Working through the
//! Cartan matrix absorbs root-length normalization for B, C and D. The
//! closed chamber is `{t : C t >= 0}`.
//!
//! Most numerical code in this crate works directly with the simple-root
//! values `s = C t` ("root values"), in which the chamber is the positive
//! orthant; [`RootSystemDesc::root_values`] converts.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Row};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    #[serde(rename = "explicit")]
    Explicit,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::Explicit => "explicit",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Family::A),
            "B" | "b" => Ok(Family::B),
            "C" | "c" => Ok(Family::C),
            "D" | "d" => Ok(Family::D),
            "explicit" => Ok(Family::Explicit),
            other => Err(Error::Parse(format!("unknown root-system family {other:?}"))),
        }
    }
}

/// Root-space multiplicities `(l^+, l^-)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Multiplicity {
    pub lp: u32,
    pub lm: u32,
}

impl Multiplicity {
    pub const fn new(lp: u32, lm: u32) -> Self {
        Multiplicity { lp, lm }
    }

    pub fn total(&self) -> u32 {
        self.lp + self.lm
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MultiplicityProfile {
    Uniform(Multiplicity),
    /// Separate multiplicities for long and short roots (B, C).
    ByLength { long: Multiplicity, short: Multiplicity },
    /// One entry per positive root, in simple-root coordinates.
    PerRoot(Vec<(Vec<i64>, Multiplicity)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootSystemDesc {
    rank: usize,
    family: Family,
    positive_roots: Vec<Vec<i64>>,
    mult: Vec<Multiplicity>,
    cartan: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weight {
    pub coords: Vec<Rational>,
}

impl Weight {
    pub fn new(coords: Vec<Rational>) -> Self {
        Weight { coords }
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Weight { coords: coords.iter().map(|&c| Rational::from_int(c)).collect() }
    }

    pub fn zero(rank: usize) -> Self {
        Weight { coords: vec![Rational::zero(); rank] }
    }

    pub fn simple_root(rank: usize, i: usize) -> Self {
        let mut w = Weight::zero(rank);
        w.coords[i] = Rational::one();
        w
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Rational::is_zero)
    }

    pub fn scale(&self, c: &Rational) -> Weight {
        Weight { coords: self.coords.iter().map(|x| x * c).collect() }
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        Weight { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect() }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(Rational::to_f64).collect()
    }

    /// Value on a chamber point given by its simple-root values `s_i = alpha_i(a)`.
    pub fn eval_root_values(&self, s: &[f64]) -> f64 {
        self.coords.iter().zip(s).map(|(c, x)| c.to_f64() * x).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pairing {
    Zero,
    Nonzero,
}

/// A subspace of `Q^n` held by its reduced row echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalSubspace {
    basis: Vec<Row>,
    ambient_dim: usize,
}

impl RationalSubspace {
    pub fn from_spanning(vectors: Vec<Row>, ambient_dim: usize) -> Self {
        let mut m = vectors;
        let pivots = exact::rref(&mut m);
        m.truncate(pivots.len());
        RationalSubspace { basis: m, ambient_dim }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| {
                (0..ambient_dim)
                    .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        RationalSubspace { basis, ambient_dim }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &[Row] {
        &self.basis
    }

    pub fn contains_vector(&self, v: &[Rational]) -> bool {
        let mut m = self.basis.clone();
        m.push(v.to_vec());
        exact::rank(&m) == self.dim()
    }

    pub fn is_subspace_of(&self, other: &RationalSubspace) -> bool {
        self.basis.iter().all(|v| other.contains_vector(v))
    }

    pub fn intersect(&self, other: &RationalSubspace) -> RationalSubspace {
        // x = A y = B z  <=>  [A^T | -B^T] (y, z) = 0
        let n = self.ambient_dim;
        let (p, q) = (self.dim(), other.dim());
        if p == 0 || q == 0 {
            return RationalSubspace::from_spanning(Vec::new(), n);
        }
        let rows: Vec<Row> = (0..n)
            .map(|i| {
                let mut r: Row = self.basis.iter().map(|b| b[i].clone()).collect();
                r.extend(other.basis.iter().map(|b| -&b[i]));
                r
            })
            .collect();
        let ns = exact::nullspace(&rows, p + q);
        let vecs = ns
            .into_iter()
            .map(|y| {
                (0..n)
                    .map(|i| {
                        (0..p).fold(Rational::zero(), |acc, k| acc + &y[k] * &self.basis[k][i])
                    })
                    .collect()
            })
            .collect();
        RationalSubspace::from_spanning(vecs, n)
    }
}

impl RootSystemDesc {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn positive_roots(&self) -> &[Vec<i64>] {
        &self.positive_roots
    }

    pub fn multiplicities(&self) -> &[Multiplicity] {
        &self.mult
    }

    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    pub fn mult_of(&self, root: &[i64]) -> Option<Multiplicity> {
        self.positive_roots.iter().position(|r| r == root).map(|i| self.mult[i])
    }

    /// Dynkin adjacency between simple roots `i != j`.
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        i != j && self.cartan[i][j] != 0
    }

    /// Positive roots whose support lies inside `members`.
    pub fn roots_supported_in(&self, members: &BTreeSet<usize>) -> Vec<usize> {
        (0..self.positive_roots.len())
            .filter(|&k| {
                self.positive_roots[k]
                    .iter()
                    .enumerate()
                    .all(|(i, &c)| c == 0 || members.contains(&i))
            })
            .collect()
    }

    /// `alpha_i(a)` for a chamber point in coroot coordinates.
    pub fn root_values(&self, t: &[f64]) -> Vec<f64> {
        self.cartan.iter().map(|row| row.iter().zip(t).map(|(&c, x)| c as f64 * x).sum()).collect()
    }

    pub fn eval_weight(&self, w: &Weight, t: &[f64]) -> f64 {
        w.eval_root_values(&self.root_values(t))
    }

    /// Build an explicit system from a Cartan matrix and per-root data.
    pub fn explicit(cartan: Vec<Vec<i64>>, roots: Vec<(Vec<i64>, Multiplicity)>) -> Result<Self> {
        let rank = cartan.len();
        if rank == 0 {
            return Err(Error::InvalidRank { family: "explicit".into(), rank });
        }
        for (i, row) in cartan.iter().enumerate() {
            if row.len() != rank {
                return Err(Error::InvalidRootSystem(format!("cartan row {i} has length {}", row.len())));
            }
            for (j, &c) in row.iter().enumerate() {
                if i == j && c != 2 {
                    return Err(Error::InvalidRootSystem(format!("cartan[{i}][{i}] = {c}, expected 2")));
                }
                if i != j && c > 0 {
                    return Err(Error::InvalidRootSystem(format!("cartan[{i}][{j}] = {c} is positive")));
                }
                if i != j && (c == 0) != (cartan[j][i] == 0) {
                    return Err(Error::InvalidRootSystem(format!("cartan[{i}][{j}] and cartan[{j}][{i}] disagree on zero pattern")));
                }
            }
        }
        if exact::det(&exact::int_matrix(&cartan)).is_zero() {
            return Err(Error::InvalidRootSystem("cartan matrix is singular".into()));
        }
        let mut seen = HashSet::new();
        for (root, m) in &roots {
            if root.len() != rank {
                return Err(Error::InvalidRootSystem(format!("root {root:?} has wrong length")));
            }
            if root.iter().any(|&c| c < 0) || root.iter().all(|&c| c == 0) {
                return Err(Error::InvalidRootSystem(format!("root {root:?} is not a positive root")));
            }
            if m.total() == 0 {
                return Err(Error::InvalidRootSystem(format!("root {root:?} has multiplicity 0")));
            }
            if !seen.insert(root.clone()) {
                return Err(Error::InvalidRootSystem(format!("root {root:?} listed twice")));
            }
        }
        for i in 0..rank {
            let e: Vec<i64> = (0..rank).map(|j| i64::from(i == j)).collect();
            if !seen.contains(&e) {
                return Err(Error::InvalidRootSystem(format!("simple root {e:?} missing")));
            }
        }
        let mut roots = roots;
        roots.sort_by(|a, b| a.0.cmp(&b.0));
        let (positive_roots, mult) = roots.into_iter().unzip();
        Ok(RootSystemDesc { rank, family: Family::Explicit, positive_roots, mult, cartan })
    }
}

/// Vectors of the simple roots in the standard Euclidean model.
fn standard_simple_roots(family: Family, rank: usize) -> Vec<Vec<i64>> {
    let dim = if family == Family::A { rank + 1 } else { rank };
    let unit = |i: usize| -> Vec<i64> { (0..dim).map(|j| i64::from(i == j)).collect() };
    let diff = |i: usize, j: usize| -> Vec<i64> { unit(i).iter().zip(unit(j)).map(|(a, b)| a - b).collect() };
    let mut simple: Vec<Vec<i64>> = (0..rank.saturating_sub(1)).map(|i| diff(i, i + 1)).collect();
    match family {
        Family::A => simple.push(diff(rank - 1, rank)),
        Family::B => simple.push(unit(rank - 1)),
        Family::C => simple.push(unit(rank - 1).iter().map(|x| 2 * x).collect()),
        Family::D => simple.push(unit(rank - 2).iter().zip(unit(rank - 1)).map(|(a, b)| a + b).collect()),
        Family::Explicit => unreachable!(),
    }
    simple
}

fn is_standard_root(family: Family, v: &[i64]) -> bool {
    let nz: Vec<i64> = v.iter().copied().filter(|&x| x != 0).collect();
    match family {
        Family::A => nz.len() == 2 && nz.iter().sum::<i64>() == 0 && nz.iter().all(|x| x.abs() == 1),
        Family::B => (nz.len() == 1 || nz.len() == 2) && nz.iter().all(|x| x.abs() == 1),
        Family::C => {
            (nz.len() == 1 && nz[0].abs() == 2) || (nz.len() == 2 && nz.iter().all(|x| x.abs() == 1))
        }
        Family::D => nz.len() == 2 && nz.iter().all(|x| x.abs() == 1),
        Family::Explicit => false,
    }
}

fn norm2(v: &[i64]) -> i64 {
    v.iter().map(|x| x * x).sum()
}

/// Classical root system with multiplicities attached.
pub fn build_root_system(family: Family, rank: usize, profile: &MultiplicityProfile) -> Result<RootSystemDesc> {
    let min_rank = match family {
        Family::A => 1,
        Family::B | Family::C => 2,
        Family::D => 3,
        Family::Explicit => {
            return Err(Error::InvalidRootSystem(
                "explicit systems are built with RootSystemDesc::explicit".into(),
            ))
        }
    };
    if rank < min_rank {
        return Err(Error::InvalidRank { family: family.to_string(), rank });
    }
    let simple = standard_simple_roots(family, rank);
    let model = |coords: &[i64]| -> Vec<i64> {
        let dim = simple[0].len();
        (0..dim).map(|k| coords.iter().zip(&simple).map(|(c, s)| c * s[k]).sum()).collect()
    };

    // closure under adding simple roots
    let mut found: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut frontier: Vec<Vec<i64>> = (0..rank).map(|i| (0..rank).map(|j| i64::from(i == j)).collect()).collect();
    found.extend(frontier.iter().cloned());
    while let Some(root) = frontier.pop() {
        for i in 0..rank {
            let mut next = root.clone();
            next[i] += 1;
            if !found.contains(&next) && is_standard_root(family, &model(&next)) {
                found.insert(next.clone());
                frontier.push(next);
            }
        }
    }

    let cartan: Vec<Vec<i64>> = (0..rank)
        .map(|i| {
            (0..rank)
                .map(|j| {
                    let ip: i64 = simple[i].iter().zip(&simple[j]).map(|(a, b)| a * b).sum();
                    2 * ip / norm2(&simple[j])
                })
                .collect()
        })
        .collect();

    let positive_roots: Vec<Vec<i64>> = found.into_iter().collect();
    let max_len = positive_roots.iter().map(|r| norm2(&model(r))).max().unwrap_or(0);
    let mut mult = Vec::with_capacity(positive_roots.len());
    for r in &positive_roots {
        let m = match profile {
            MultiplicityProfile::Uniform(m) => *m,
            MultiplicityProfile::ByLength { long, short } => {
                if norm2(&model(r)) == max_len {
                    *long
                } else {
                    *short
                }
            }
            MultiplicityProfile::PerRoot(list) => list
                .iter()
                .find(|(root, _)| root == r)
                .map(|(_, m)| *m)
                .ok_or_else(|| Error::InvalidRootSystem(format!("no multiplicity given for root {r:?}")))?,
        };
        if m.total() == 0 {
            return Err(Error::InvalidRootSystem(format!("root {r:?} has multiplicity 0")));
        }
        mult.push(m);
    }
    Ok(RootSystemDesc { rank, family, positive_roots, mult, cartan })
}

/// `2 rho = sum over positive roots of l_beta * beta`.
pub fn two_rho(rs: &RootSystemDesc) -> Weight {
    let mut coords = vec![Rational::zero(); rs.rank];
    for (root, m) in rs.positive_roots.iter().zip(&rs.mult) {
        for (c, &r) in coords.iter_mut().zip(root) {
            *c += &Rational::from_int(r * m.total() as i64);
        }
    }
    Weight { coords }
}

/// Simple-root coordinates of `sum_i n_i omega_i`: solves `C^T m = n`.
pub fn weight_from_fundamental(rs: &RootSystemDesc, n_coeffs: &[Rational]) -> Result<Weight> {
    if n_coeffs.len() != rs.rank {
        return Err(Error::DimensionMismatch { expected: rs.rank, got: n_coeffs.len() });
    }
    let ct = exact::transpose(&exact::int_matrix(&rs.cartan));
    let m = exact::solve(&ct, n_coeffs).ok_or_else(|| Error::Internal("singular Cartan matrix".into()))?;
    Ok(Weight { coords: m })
}

/// Fundamental-weight coordinates `n_i = <w, alpha_i^vee>`, i.e. `n = C^T m`.
pub fn fundamental_coords(rs: &RootSystemDesc, w: &Weight) -> Vec<Rational> {
    (0..rs.rank)
        .map(|i| {
            (0..rs.rank).fold(Rational::zero(), |acc, j| acc + &w.coords[j] * &Rational::from_int(rs.cartan[j][i]))
        })
        .collect()
}

/// Whether `<lam, alpha_i>` vanishes.
pub fn pairing_sign(rs: &RootSystemDesc, lam: &Weight, i: usize) -> Result<Pairing> {
    if i >= rs.rank {
        return Err(Error::IndexOutOfRange { index: i, rank: rs.rank });
    }
    let n_i = (0..rs.rank).fold(Rational::zero(), |acc, j| acc + &lam.coords[j] * &Rational::from_int(rs.cartan[j][i]));
    Ok(if n_i.is_zero() { Pairing::Zero } else { Pairing::Nonzero })
}

/// The functional `t -> w(t)` as a row vector in coroot coordinates.
pub fn functional_row(rs: &RootSystemDesc, w: &Weight) -> Row {
    (0..rs.rank)
        .map(|j| {
            (0..rs.rank).fold(Rational::zero(), |acc, i| acc + &w.coords[i] * &Rational::from_int(rs.cartan[i][j]))
        })
        .collect()
}

/// Common kernel of weights viewed as functionals on the chamber coordinates.
pub fn kernel_subspace(rs: &RootSystemDesc, functionals: &[Weight]) -> RationalSubspace {
    let rows: Vec<Row> = functionals.iter().map(|w| functional_row(rs, w)).collect();
    let ns = exact::nullspace(&rows, rs.rank);
    RationalSubspace::from_spanning(ns, rs.rank)
}

// ---------------------------------------------------------------------------
// JSON document

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootMultJson {
    pub root: Vec<i64>,
    pub lp: u32,
    pub lm: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSystemJson {
    pub family: Family,
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cartan: Option<Vec<Vec<i64>>>,
    pub mult: Vec<RootMultJson>,
}

impl RootSystemDesc {
    pub fn to_json_doc(&self) -> RootSystemJson {
        RootSystemJson {
            family: self.family,
            rank: self.rank,
            cartan: (self.family == Family::Explicit).then(|| self.cartan.clone()),
            mult: self
                .positive_roots
                .iter()
                .zip(&self.mult)
                .map(|(r, m)| RootMultJson { root: r.clone(), lp: m.lp, lm: m.lm })
                .collect(),
        }
    }

    pub fn from_json_doc(doc: &RootSystemJson) -> Result<Self> {
        let list: Vec<(Vec<i64>, Multiplicity)> =
            doc.mult.iter().map(|e| (e.root.clone(), Multiplicity::new(e.lp, e.lm))).collect();
        match doc.family {
            Family::Explicit => {
                let cartan = doc
                    .cartan
                    .clone()
                    .ok_or_else(|| Error::InvalidRootSystem("explicit system needs a cartan matrix".into()))?;
                if cartan.len() != doc.rank {
                    return Err(Error::DimensionMismatch { expected: doc.rank, got: cartan.len() });
                }
                RootSystemDesc::explicit(cartan, list)
            }
            fam => {
                let rs = build_root_system(fam, doc.rank, &MultiplicityProfile::PerRoot(list.clone()))?;
                if list.len() != rs.positive_roots.len() {
                    return Err(Error::InvalidRootSystem(format!(
                        "{} multiplicity entries for {} positive roots",
                        list.len(),
                        rs.positive_roots.len()
                    )));
                }
                Ok(rs)
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_doc()).expect("root system serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: RootSystemJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_json_doc(&doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(lp: u32, lm: u32) -> MultiplicityProfile {
        MultiplicityProfile::Uniform(Multiplicity::new(lp, lm))
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    /// All sums of simple roots with coefficients <= bound whose model vector
    /// is a root, found without the closure walk.
    fn brute_force_roots(family: Family, rank: usize) -> BTreeSet<Vec<i64>> {
        let simple = standard_simple_roots(family, rank);
        let dim = simple[0].len();
        let mut out = BTreeSet::new();
        let bound = 3i64;
        let total = (bound as usize + 1).pow(rank as u32);
        for code in 1..total {
            let mut c = code;
            let coords: Vec<i64> = (0..rank)
                .map(|_| {
                    let d = (c % (bound as usize + 1)) as i64;
                    c /= bound as usize + 1;
                    d
                })
                .collect();
            let v: Vec<i64> = (0..dim).map(|k| coords.iter().zip(&simple).map(|(a, s)| a * s[k]).sum()).collect();
            if is_standard_root(family, &v) {
                out.insert(coords);
            }
        }
        out
    }

    #[test]
    fn rank_one_a() {
        let rs = build_root_system(Family::A, 1, &uniform(1, 0)).unwrap();
        assert_eq!(rs.positive_roots(), &[vec![1]]);
        assert_eq!(rs.cartan(), &[vec![2]]);
    }

    #[test]
    fn a2_roots_match_brute_force() {
        let rs = build_root_system(Family::A, 2, &uniform(1, 1)).unwrap();
        let got: BTreeSet<_> = rs.positive_roots().iter().cloned().collect();
        assert_eq!(got, brute_force_roots(Family::A, 2));
        assert_eq!(got.len(), 3);
        assert!(rs.multiplicities().iter().all(|m| m.total() == 2));
    }

    #[test]
    fn b2_roots_match_brute_force() {
        let rs = build_root_system(Family::B, 2, &uniform(1, 0)).unwrap();
        let got: BTreeSet<_> = rs.positive_roots().iter().cloned().collect();
        let expected: BTreeSet<Vec<i64>> = [vec![1, 0], vec![0, 1], vec![1, 1], vec![1, 2]].into_iter().collect();
        assert_eq!(got, expected);
        assert_eq!(got, brute_force_roots(Family::B, 2));
        assert_eq!(rs.cartan(), &[vec![2, -2], vec![-1, 2]]);
    }

    #[test]
    fn classical_counts() {
        for r in 1..=6 {
            let rs = build_root_system(Family::A, r, &uniform(1, 0)).unwrap();
            assert_eq!(rs.positive_roots().len(), r * (r + 1) / 2);
        }
        for r in 2..=6 {
            for fam in [Family::B, Family::C] {
                let rs = build_root_system(fam, r, &uniform(1, 0)).unwrap();
                assert_eq!(rs.positive_roots().len(), r * r, "{fam} {r}");
                assert_eq!(rs.positive_roots().iter().cloned().collect::<BTreeSet<_>>(), brute_force_roots(fam, r));
            }
        }
        for r in 3..=6 {
            let rs = build_root_system(Family::D, r, &uniform(1, 0)).unwrap();
            assert_eq!(rs.positive_roots().len(), r * (r - 1));
        }
    }

    #[test]
    fn invalid_ranks() {
        assert!(matches!(build_root_system(Family::B, 1, &uniform(1, 0)), Err(Error::InvalidRank { .. })));
        assert!(matches!(build_root_system(Family::D, 2, &uniform(1, 0)), Err(Error::InvalidRank { .. })));
        assert!(matches!(build_root_system(Family::A, 0, &uniform(1, 0)), Err(Error::InvalidRank { .. })));
    }

    #[test]
    fn explicit_rejects_bad_roots() {
        let c = vec![vec![2, -1], vec![-1, 2]];
        let m = Multiplicity::new(1, 0);
        let err = RootSystemDesc::explicit(c.clone(), vec![(vec![1, 0], m), (vec![1, -1], m)]).unwrap_err();
        assert!(err.to_string().contains("[1, -1]"), "{err}");
        let err = RootSystemDesc::explicit(c.clone(), vec![(vec![1, 0], m)]).unwrap_err();
        assert!(err.to_string().contains("[0, 1]"), "{err}");
        let ok = RootSystemDesc::explicit(c, vec![(vec![1, 1], m), (vec![0, 1], m), (vec![1, 0], m)]).unwrap();
        assert_eq!(ok.positive_roots()[0], vec![0, 1]);
    }

    #[test]
    fn two_rho_examples() {
        let a2 = build_root_system(Family::A, 2, &uniform(1, 1)).unwrap();
        assert_eq!(two_rho(&a2), Weight::from_ints(&[4, 4]));
        let a2s = build_root_system(Family::A, 2, &uniform(1, 0)).unwrap();
        assert_eq!(two_rho(&a2s), Weight::from_ints(&[2, 2]));
        for (p, q) in [(2u32, 2u32), (3, 1), (3, 2)] {
            let rs = build_root_system(Family::A, 1, &uniform(p + q - 2, 0)).unwrap();
            assert_eq!(two_rho(&rs), Weight::from_ints(&[(p + q - 2) as i64]));
        }
        // 2 rho = 2 sum_j j(n-j) alpha_j with l = 2
        for n in 2..=7i64 {
            let rs = build_root_system(Family::A, (n - 1) as usize, &uniform(1, 1)).unwrap();
            let expected: Vec<i64> = (1..n).map(|j| 2 * j * (n - j)).collect();
            assert_eq!(two_rho(&rs), Weight::from_ints(&expected));
        }
    }

    #[test]
    fn fundamental_weight_conversion() {
        let a2 = build_root_system(Family::A, 2, &uniform(1, 1)).unwrap();
        let w = weight_from_fundamental(&a2, &[Rational::from_int(2), Rational::zero()]).unwrap();
        assert_eq!(w.coords, vec![q(4, 3), q(2, 3)]);
        let zero = weight_from_fundamental(&a2, &[Rational::zero(), Rational::zero()]).unwrap();
        assert!(zero.is_zero());
        let a1 = build_root_system(Family::A, 1, &uniform(1, 0)).unwrap();
        assert_eq!(weight_from_fundamental(&a1, &[Rational::one()]).unwrap().coords, vec![q(1, 2)]);
        assert!(weight_from_fundamental(&a1, &[]).is_err());
    }

    #[test]
    fn pairing_examples() {
        let a2 = build_root_system(Family::A, 2, &uniform(1, 1)).unwrap();
        let lam = Weight::new(vec![q(4, 3), q(2, 3)]);
        assert_eq!(pairing_sign(&a2, &lam, 1).unwrap(), Pairing::Zero);
        assert_eq!(pairing_sign(&a2, &lam, 0).unwrap(), Pairing::Nonzero);
        let rho2 = two_rho(&a2);
        for i in 0..2 {
            assert_eq!(pairing_sign(&a2, &rho2, i).unwrap(), Pairing::Nonzero);
        }
        assert!(matches!(pairing_sign(&a2, &lam, 2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn kernel_examples() {
        let a2 = build_root_system(Family::A, 2, &uniform(1, 1)).unwrap();
        assert_eq!(kernel_subspace(&a2, &[]).dim(), 2);
        let k = kernel_subspace(&a2, &[Weight::simple_root(2, 0)]);
        assert_eq!(k.dim(), 1);
        // oracle: 2 t1 - t2 = 0 is spanned by (1, 2)
        assert!(k.contains_vector(&[Rational::one(), Rational::from_int(2)]));
        assert!(!k.contains_vector(&[Rational::one(), Rational::one()]));
        let k0 = kernel_subspace(&a2, &[Weight::simple_root(2, 0), Weight::simple_root(2, 1)]);
        assert_eq!(k0.dim(), 0);
    }

    #[test]
    fn subspace_intersection() {
        let a = RationalSubspace::from_spanning(
            vec![vec![q(1, 1), q(0, 1), q(0, 1)], vec![q(0, 1), q(1, 1), q(0, 1)]],
            3,
        );
        let b = RationalSubspace::from_spanning(
            vec![vec![q(0, 1), q(1, 1), q(0, 1)], vec![q(0, 1), q(0, 1), q(1, 1)]],
            3,
        );
        let c = a.intersect(&b);
        assert_eq!(c.dim(), 1);
        assert!(c.contains_vector(&[q(0, 1), q(5, 1), q(0, 1)]));
    }

    #[test]
    fn json_roundtrip() {
        let rs = build_root_system(Family::B, 3, &MultiplicityProfile::ByLength {
            long: Multiplicity::new(1, 0),
            short: Multiplicity::new(2, 1),
        })
        .unwrap();
        let s = rs.to_json();
        assert_eq!(RootSystemDesc::from_json(&s).unwrap(), rs);
        let doc = r#"{"family":"A","rank":2,"mult":[{"root":[1,0],"lp":1,"lm":1},{"root":[0,1],"lp":1,"lm":1},{"root":[1,1],"lp":1,"lm":1}]}"#;
        let a2 = RootSystemDesc::from_json(doc).unwrap();
        assert_eq!(two_rho(&a2), Weight::from_ints(&[4, 4]));
    }
}
