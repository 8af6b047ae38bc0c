//! Boundary strata and the exponent calculus.
//!
//! A stratum is indexed by a set `I` of simple roots. `I` is
//! lambda-connected when the Dynkin diagram on `I` plus one extra vertex for
//! the highest weight is connected; the empty set counts as connected.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::rootlat::{self, Pairing, RootSystemDesc, Weight};

/// Largest rank for which subsets are enumerated.
pub const MAX_ENUM_RANK: usize = 24;

/// A set of simple-root indices, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct StratumIndex(u32);

impl StratumIndex {
    pub const EMPTY: StratumIndex = StratumIndex(0);

    pub fn from_bits(bits: u32) -> Self {
        StratumIndex(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn from_members<I: IntoIterator<Item = usize>>(members: I) -> Self {
        StratumIndex(members.into_iter().fold(0, |acc, i| acc | (1 << i)))
    }

    /// `{alpha_1, ..., alpha_j}` as zero-based indices `0..j`.
    pub fn initial(j: usize) -> Self {
        StratumIndex::from_members(0..j)
    }

    pub fn full(rank: usize) -> Self {
        StratumIndex(((1u64 << rank) - 1) as u32)
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn members(self) -> Vec<usize> {
        (0..32).filter(|&i| self.contains(i)).collect()
    }

    pub fn member_set(self) -> BTreeSet<usize> {
        self.members().into_iter().collect()
    }

    pub fn is_subset_of(self, other: StratumIndex) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_proper_subset_of(self, other: StratumIndex) -> bool {
        self.is_subset_of(other) && self != other
    }

    pub fn union(self, other: StratumIndex) -> StratumIndex {
        StratumIndex(self.0 | other.0)
    }

    pub fn with(self, i: usize) -> StratumIndex {
        StratumIndex(self.0 | (1 << i))
    }

    /// Ordering used for listings: by size, then bitmask.
    pub fn listing_cmp(&self, other: &Self) -> Ordering {
        (self.len(), self.0).cmp(&(other.len(), other.0))
    }

    /// Human-readable names, `alpha_1` for index 0.
    pub fn names(self) -> Vec<String> {
        self.members().iter().map(|i| format!("alpha_{}", i + 1)).collect()
    }
}

impl fmt::Debug for StratumIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.members())
    }
}

impl Serialize for StratumIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.members().serialize(s)
    }
}

impl<'de> Deserialize<'de> for StratumIndex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<usize> = Vec::deserialize(d)?;
        if v.iter().any(|&i| i >= 32) {
            return Err(serde::de::Error::custom("simple-root index out of range"));
        }
        Ok(StratumIndex::from_members(v))
    }
}

/// `(a, b, I)`; compare with [`ExponentTriple::cmp_pair`] for the
/// lexicographic order on `(a, b)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentTriple {
    pub a: Rational,
    pub b: u32,
    #[serde(rename = "I")]
    pub i: StratumIndex,
}

impl ExponentTriple {
    pub fn cmp_pair(&self, other: &Self) -> Ordering {
        (&self.a, self.b).cmp(&(&other.a, other.b))
    }
}

/// `u_alpha / m_alpha` for every simple root, rejecting non-positive `m`.
pub fn ratios(rs: &RootSystemDesc, lam: &Weight) -> Result<Vec<Rational>> {
    check_rank(rs, lam)?;
    let u = rootlat::two_rho(rs);
    lam.coords
        .iter()
        .enumerate()
        .map(|(i, m)| {
            if !m.is_positive() {
                Err(Error::NonPositiveWeight { index: i, value: m.to_string() })
            } else {
                Ok(&u.coords[i] / m)
            }
        })
        .collect()
}

fn check_rank(rs: &RootSystemDesc, lam: &Weight) -> Result<()> {
    if lam.rank() != rs.rank() {
        return Err(Error::DimensionMismatch { expected: rs.rank(), got: lam.rank() });
    }
    Ok(())
}

fn lambda_adjacency(rs: &RootSystemDesc, lam: &Weight) -> Vec<bool> {
    (0..rs.rank()).map(|i| rootlat::pairing_sign(rs, lam, i).map(|p| p == Pairing::Nonzero).unwrap_or(false)).collect()
}

/// Component of the lambda vertex in the diagram restricted to `within`.
fn lambda_component(rs: &RootSystemDesc, adj_lam: &[bool], within: StratumIndex) -> StratumIndex {
    let mut comp = StratumIndex::EMPTY;
    let mut stack: Vec<usize> = within.members().into_iter().filter(|&i| adj_lam[i]).collect();
    for &i in &stack {
        comp = comp.with(i);
    }
    while let Some(i) = stack.pop() {
        for j in within.members() {
            if !comp.contains(j) && rs.adjacent(i, j) {
                comp = comp.with(j);
                stack.push(j);
            }
        }
    }
    comp
}

pub fn is_lambda_connected(rs: &RootSystemDesc, lam: &Weight, set: StratumIndex) -> bool {
    let adj = lambda_adjacency(rs, lam);
    lambda_component(rs, &adj, set) == set
}

/// All proper lambda-connected subsets, sorted by size then bitmask.
pub fn enumerate_lambda_connected(rs: &RootSystemDesc, lam: &Weight) -> Result<Vec<StratumIndex>> {
    check_rank(rs, lam)?;
    let r = rs.rank();
    if r > MAX_ENUM_RANK {
        return Err(Error::RankTooLarge { rank: r, limit: MAX_ENUM_RANK });
    }
    let adj = lambda_adjacency(rs, lam);
    let full = StratumIndex::full(r);
    let mut out: Vec<StratumIndex> = (0..(1u32 << r))
        .into_par_iter()
        .map(StratumIndex::from_bits)
        .filter(|&s| s != full && lambda_component(rs, &adj, s) == s)
        .collect();
    out.sort_by(StratumIndex::listing_cmp);
    Ok(out)
}

/// Union of all lambda-connected subsets of `j`.
pub fn largest_lambda_connected(rs: &RootSystemDesc, lam: &Weight, j: StratumIndex) -> StratumIndex {
    let adj = lambda_adjacency(rs, lam);
    lambda_component(rs, &adj, j)
}

pub fn exponents_global(rs: &RootSystemDesc, lam: &Weight) -> Result<ExponentTriple> {
    let r = ratios(rs, lam)?;
    Ok(exponents_from_ratios(&r, StratumIndex::EMPTY))
}

pub(crate) fn exponents_from_ratios(r: &[Rational], base: StratumIndex) -> ExponentTriple {
    let a = (0..r.len()).filter(|&k| !base.contains(k)).map(|k| &r[k]).max().cloned().expect("proper subset");
    let mut i = base;
    for (k, rk) in r.iter().enumerate() {
        if !base.contains(k) && rk < &a {
            i = i.with(k);
        }
    }
    let b = (r.len() - i.len()) as u32;
    ExponentTriple { a, b, i }
}

/// `(a(I), b(I), I(I))` relative to a lambda-connected proper stratum.
pub fn exponents_rel(rs: &RootSystemDesc, lam: &Weight, set: StratumIndex) -> Result<ExponentTriple> {
    let r = ratios(rs, lam)?;
    if set.len() >= rs.rank() || !set.is_subset_of(StratumIndex::full(rs.rank())) {
        return Err(Error::NotProper);
    }
    if !is_lambda_connected(rs, lam, set) {
        return Err(Error::NotConnected(set.members()));
    }
    Ok(exponents_from_ratios(&r, set))
}

/// Hasse diagram of the lambda-connected strata under inclusion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosurePoset {
    pub nodes: Vec<StratumIndex>,
    /// Index pairs `(lower, upper)` into `nodes`.
    pub edges: Vec<(usize, usize)>,
}

impl ClosurePoset {
    pub fn reachable(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![from];
        while let Some(n) = stack.pop() {
            if n == to {
                return true;
            }
            for &(a, b) in &self.edges {
                if a == n && !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        false
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph strata {\n  rankdir=BT;\n");
        for (k, n) in self.nodes.iter().enumerate() {
            let label = if n.is_empty() { "{}".to_string() } else { n.names().join(",") };
            let _ = writeln!(s, "  n{k} [label=\"{label}\"];");
        }
        for (a, b) in &self.edges {
            let _ = writeln!(s, "  n{a} -> n{b};");
        }
        s.push_str("}\n");
        s
    }
}

pub fn closure_poset(rs: &RootSystemDesc, lam: &Weight) -> Result<ClosurePoset> {
    let nodes = enumerate_lambda_connected(rs, lam)?;
    let mut edges = Vec::new();
    for (a, &x) in nodes.iter().enumerate() {
        for (b, &y) in nodes.iter().enumerate() {
            if !x.is_proper_subset_of(y) {
                continue;
            }
            let covered = nodes.iter().any(|&z| x.is_proper_subset_of(z) && z.is_proper_subset_of(y));
            if !covered {
                edges.push((a, b));
            }
        }
    }
    Ok(ClosurePoset { nodes, edges })
}

/// `J(I) = I` together with the simple roots orthogonal to `lam` and to all of `I`.
pub fn j_of(rs: &RootSystemDesc, lam: &Weight, set: StratumIndex) -> StratumIndex {
    let adj = lambda_adjacency(rs, lam);
    let mut j = set;
    for a in 0..rs.rank() {
        if set.contains(a) || adj[a] {
            continue;
        }
        if set.members().iter().all(|&b| !rs.adjacent(a, b)) {
            j = j.with(a);
        }
    }
    j
}

/// Whether `a_J ∩ ker rho = a_J ∩ ker lam` for `J = J(I)`.
pub fn measure_exists(rs: &RootSystemDesc, lam: &Weight, set: StratumIndex) -> Result<bool> {
    check_rank(rs, lam)?;
    if !is_lambda_connected(rs, lam, set) {
        return Err(Error::NotConnected(set.members()));
    }
    let j = j_of(rs, lam, set);
    let r = rs.rank();
    let roots: Vec<Weight> = j.members().into_iter().map(|i| Weight::simple_root(r, i)).collect();
    let a_j = rootlat::kernel_subspace(rs, &roots);
    let ker_rho = rootlat::kernel_subspace(rs, &[rootlat::two_rho(rs)]);
    let ker_lam = rootlat::kernel_subspace(rs, std::slice::from_ref(lam));
    Ok(a_j.intersect(&ker_rho) == a_j.intersect(&ker_lam))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Theta {
    pub a: Rational,
    pub b: u32,
    pub saturated: BTreeSet<StratumIndex>,
}

/// Maximal exponent pair over a set of strata and the saturations attaining it.
pub fn theta_of(rs: &RootSystemDesc, lam: &Weight, strata: &[StratumIndex]) -> Result<Theta> {
    if strata.is_empty() {
        return Err(Error::Empty("strata"));
    }
    let triples = strata.iter().map(|&s| exponents_rel(rs, lam, s)).collect::<Result<Vec<_>>>()?;
    let best = triples.iter().max_by(|x, y| x.cmp_pair(y)).expect("nonempty").clone();
    let saturated = triples.iter().filter(|t| t.cmp_pair(&best) == Ordering::Equal).map(|t| t.i).collect();
    Ok(Theta { a: best.a, b: best.b, saturated })
}
