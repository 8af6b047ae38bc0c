//! Named presets pairing a root-system datum with an optional point family.
//!
//! A preset name is `kind:args`, e.g. `detsurface:3`, `symmat:2,1` or
//! `tworho:A,3,1`. Each kind is a [`PresetKind`] strategy in a fixed registry.

use std::fmt;

use crate::error::{Error, Result};
use crate::families::{DetSurface, PointFamily, Quadric, SymMat};
use crate::rational::Rational;
use crate::rootlat::{self, build_root_system, Family, Multiplicity, MultiplicityProfile, RootSystemDesc, Weight};

pub struct Preset {
    pub name: String,
    /// `None` for presets without an integral-point model.
    pub family: Option<Box<dyn PointFamily>>,
    pub rs: RootSystemDesc,
    pub lam: Weight,
}

impl fmt::Debug for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Preset")
            .field("name", &self.name)
            .field("family", &self.family.as_ref().map(|x| x.spec()))
            .field("rank", &self.rs.rank())
            .field("lam", &self.lam)
            .finish()
    }
}

pub trait PresetKind: Sync {
    fn name(&self) -> &'static str;
    fn usage(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn build(&self, args: &[&str]) -> Result<Preset>;
}

fn int_arg(s: &str) -> Result<i64> {
    s.trim().parse::<i64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

fn usize_arg(s: &str) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

/// Preset backed by a point family, named by the family spec.
pub fn preset_from_family(fam: Box<dyn PointFamily>) -> Result<Preset> {
    from_family(fam.spec(), fam)
}

fn from_family(name: String, fam: Box<dyn PointFamily>) -> Result<Preset> {
    let (rs, lam) = fam.root_data()?;
    Ok(Preset { name, family: Some(fam), rs, lam })
}

struct QuadricKind;
struct DetSurfaceKind;
struct SymMatKind;
struct TwoRhoKind;

impl PresetKind for QuadricKind {
    fn name(&self) -> &'static str {
        "quadric"
    }
    fn usage(&self) -> &'static str {
        "quadric:p,q[,k]"
    }
    fn description(&self) -> &'static str {
        "level set Q = k of a form of signature (p,q); rank 1, l = p+q-2"
    }
    fn build(&self, args: &[&str]) -> Result<Preset> {
        let (p, q, k) = match args {
            [p, q] => (usize_arg(p)?, usize_arg(q)?, 1),
            [p, q, k] => (usize_arg(p)?, usize_arg(q)?, int_arg(k)?),
            _ => return Err(Error::InvalidFamily(format!("expected {}", self.usage()))),
        };
        let fam = Quadric::new(p, q, k)?;
        from_family(fam.spec(), Box::new(fam))
    }
}

impl PresetKind for DetSurfaceKind {
    fn name(&self) -> &'static str {
        "detsurface"
    }
    fn usage(&self) -> &'static str {
        "detsurface:n[,k]"
    }
    fn description(&self) -> &'static str {
        "n x n matrices of determinant k; A_{n-1}, l = 2, lambda = 2 omega_1"
    }
    fn build(&self, args: &[&str]) -> Result<Preset> {
        let (n, k) = match args {
            [n] => (usize_arg(n)?, 1),
            [n, k] => (usize_arg(n)?, int_arg(k)?),
            _ => return Err(Error::InvalidFamily(format!("expected {}", self.usage()))),
        };
        let fam = DetSurface::new(n, k)?;
        from_family(fam.spec(), Box::new(fam))
    }
}

impl PresetKind for SymMatKind {
    fn name(&self) -> &'static str {
        "symmat"
    }
    fn usage(&self) -> &'static str {
        "symmat:p,q"
    }
    fn description(&self) -> &'static str {
        "symmetric matrices of signature (p,q) and determinant (-1)^q; A_{n-1}, l = 1, lambda = 2 omega_1"
    }
    fn build(&self, args: &[&str]) -> Result<Preset> {
        let [p, q] = args else {
            return Err(Error::InvalidFamily(format!("expected {}", self.usage())));
        };
        let fam = SymMat::new(usize_arg(p)?, usize_arg(q)?)?;
        from_family(fam.spec(), Box::new(fam))
    }
}

impl PresetKind for TwoRhoKind {
    fn name(&self) -> &'static str {
        "tworho"
    }
    fn usage(&self) -> &'static str {
        "tworho:family,rank,ell"
    }
    fn description(&self) -> &'static str {
        "group variety with highest weight 2 ell rho; no integral-point model"
    }
    fn build(&self, args: &[&str]) -> Result<Preset> {
        let [family, rank, ell_arg] = args else {
            return Err(Error::InvalidFamily(format!("expected {}", self.usage())));
        };
        let family: Family = family.trim().parse()?;
        let rank = usize_arg(rank)?;
        let ell: Rational = ell_arg.trim().parse().map_err(|e: crate::rational::ParseRationalError| Error::Parse(e.0))?;
        if !ell.is_positive() {
            return Err(Error::InvalidFamily("ell must be positive".into()));
        }
        let rs = build_root_system(family, rank, &MultiplicityProfile::Uniform(Multiplicity::new(1, 0)))?;
        let lam = rootlat::two_rho(&rs).scale(&ell);
        Ok(Preset { name: format!("tworho:{family},{rank},{}", ell_arg.trim()), family: None, rs, lam })
    }
}

static KINDS: [&dyn PresetKind; 4] = [&QuadricKind, &DetSurfaceKind, &SymMatKind, &TwoRhoKind];

pub fn preset_kinds() -> &'static [&'static dyn PresetKind] {
    &KINDS
}

fn valid_names() -> String {
    KINDS.iter().map(|k| k.usage()).collect::<Vec<_>>().join(", ")
}

pub fn lookup_preset(name: &str) -> Result<Preset> {
    let (kind, args) = name.split_once(':').unwrap_or((name, ""));
    let kind = kind.trim();
    let builder = KINDS
        .iter()
        .find(|k| k.name() == kind)
        .ok_or_else(|| Error::NotFound { name: name.to_string(), valid: valid_names() })?;
    let args: Vec<&str> = if args.trim().is_empty() { Vec::new() } else { args.split(',').collect() };
    builder.build(&args)
}

/// Instances used throughout the documentation and acceptance runs.
pub fn preset_registry() -> Result<Vec<Preset>> {
    let mut names: Vec<String> = vec!["quadric:2,2,1".into(), "quadric:3,1,1".into(), "quadric:3,2,1".into()];
    names.extend((2..=6).map(|n| format!("detsurface:{n},1")));
    for n in 2..=6usize {
        names.extend((0..=n / 2).map(|q| format!("symmat:{},{q}", n - q)));
    }
    for r in 1..=4 {
        for ell in 1..=2 {
            names.push(format!("tworho:A,{r},{ell}"));
        }
    }
    names.iter().map(|n| lookup_preset(n)).collect()
}
