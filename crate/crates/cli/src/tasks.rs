//! The computations behind each subcommand, returning serializable documents
//! and CSV text.

use serde::{Deserialize, Serialize};
use symvar::counter::{AngularComparison, CountRecord};
use symvar::polytope::polytope_exponents;
use symvar::presets::{lookup_preset, preset_from_family, Preset};
use symvar::quadrature::QuadOptions;
use symvar::rootlat::{self, RootSystemDesc, RootSystemJson, Weight};
use symvar::strata::{self, ClosurePoset, ExponentTriple, StratumIndex};
use symvar::testfn::TestFunction;
use symvar::volasym::{self, ExpMapSpec};
use symvar::{families, Rational};

use crate::error::{CliError, CliResult};
use crate::output::csv_string;

/// Which root datum a command works on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PresetRef {
    Name(String),
    Family { family: String },
    System { root_system: RootSystemJson, weight: Vec<Rational> },
}

impl PresetRef {
    pub fn resolve(&self) -> CliResult<Preset> {
        Ok(match self {
            PresetRef::Name(n) => lookup_preset(n)?,
            PresetRef::Family { family } => preset_from_family(families::parse_family(family)?)?,
            PresetRef::System { root_system, weight } => {
                let rs = RootSystemDesc::from_json_doc(root_system)?;
                if weight.len() != rs.rank() {
                    return Err(symvar::Error::DimensionMismatch { expected: rs.rank(), got: weight.len() }.into());
                }
                Preset {
                    name: format!("{}{}", rs.family(), rs.rank()),
                    family: None,
                    rs,
                    lam: Weight::new(weight.clone()),
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedExponents {
    pub a: Rational,
    pub b: u32,
    #[serde(rename = "I")]
    pub i: Vec<String>,
}

impl From<&ExponentTriple> for NamedExponents {
    fn from(e: &ExponentTriple) -> Self {
        NamedExponents { a: e.a.clone(), b: e.b, i: e.i.names() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairExponents {
    pub a: Rational,
    pub b: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentsDoc {
    pub preset: String,
    /// Simple-root coordinates of the highest weight.
    pub lambda: Weight,
    pub lambda_fundamental: Vec<Rational>,
    /// `u_alpha / m_alpha` per simple root.
    pub ratios: Vec<Rational>,
    pub predicted: NamedExponents,
    /// The same pair recomputed as a linear program over the weight polytope.
    pub polytope: PairExponents,
}

pub fn exponents_doc(p: &Preset) -> CliResult<ExponentsDoc> {
    let e = strata::exponents_global(&p.rs, &p.lam)?;
    let (a, b) = polytope_exponents(&p.rs, std::slice::from_ref(&p.lam))?;
    Ok(ExponentsDoc {
        preset: p.name.clone(),
        lambda: p.lam.clone(),
        lambda_fundamental: rootlat::fundamental_coords(&p.rs, &p.lam),
        ratios: strata::ratios(&p.rs, &p.lam)?,
        predicted: (&e).into(),
        polytope: PairExponents { a, b },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrataDoc {
    pub lambda_connected: Vec<StratumIndex>,
    pub exponents: ExponentTriple,
    pub poset_edges: Vec<(usize, usize)>,
}

pub fn strata_doc(rs: &RootSystemDesc, lam: &Weight) -> CliResult<(StrataDoc, ClosurePoset)> {
    let poset = strata::closure_poset(rs, lam)?;
    let doc = StrataDoc {
        lambda_connected: poset.nodes.clone(),
        exponents: strata::exponents_global(rs, lam)?,
        poset_edges: poset.edges.clone(),
    };
    Ok((doc, poset))
}

/// Proper lambda-connected strata lacking a limiting measure.
pub fn strata_without_measure(rs: &RootSystemDesc, lam: &Weight, nodes: &[StratumIndex]) -> CliResult<Vec<StratumIndex>> {
    let full = StratumIndex::full(rs.rank());
    let mut missing = Vec::new();
    for &s in nodes {
        if s != full && !strata::measure_exists(rs, lam, s)? {
            missing.push(s);
        }
    }
    Ok(missing)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeRow {
    #[serde(rename = "T")]
    pub t: f64,
    pub integral: f64,
    pub normalized_ratio: f64,
    pub kappa_l_target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeRun {
    pub kappa: f64,
    pub l_chi: f64,
    pub target: f64,
    pub rows: Vec<VolumeRow>,
}

pub fn volume_run(spec: &ExpMapSpec, f: &dyn TestFunction, ladder: &[f64], opts: &QuadOptions) -> CliResult<VolumeRun> {
    let kappa = volasym::kappa_chi(spec)?;
    let l = volasym::l_chi(spec, f, opts)?.value;
    let target = kappa * l;
    let rows = ladder
        .iter()
        .map(|&t| {
            let r = volasym::finite_t_integral(spec, f, t, opts)?;
            Ok(VolumeRow { t, integral: r.integral, normalized_ratio: r.normalized_ratio, kappa_l_target: target })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(VolumeRun { kappa, l_chi: l, target, rows })
}

pub fn volume_csv(rows: &[VolumeRow]) -> CliResult<String> {
    let header = ["T", "integral", "normalized_ratio", "kappa_L_target"].map(String::from);
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.t.to_string(), r.integral.to_string(), r.normalized_ratio.to_string(), r.kappa_l_target.to_string()])
        .collect();
    csv_string(&header, &body)
}

/// Count table; `elapsed_ms` is included only on request since it varies
/// between runs.
pub fn count_csv(records: &[CountRecord], n_caps: usize, with_timing: bool) -> CliResult<String> {
    let mut header = vec!["T".to_string(), "total".to_string()];
    header.extend((0..n_caps).map(|k| format!("cap_{k}")));
    if with_timing {
        header.push("elapsed_ms".into());
    }
    let body: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            let mut row = vec![r.t.to_string(), r.total.to_string()];
            row.extend(r.per_cap.iter().map(u64::to_string));
            if with_timing {
                row.push(r.elapsed_ms.to_string());
            }
            row
        })
        .collect();
    csv_string(&header, &body)
}

pub fn compare_csv(c: &AngularComparison) -> CliResult<String> {
    let header = ["bin_lo", "bin_hi", "empirical", "predicted"].map(String::from);
    let body: Vec<Vec<String>> = c
        .bins
        .iter()
        .map(|b| vec![b.bin_lo.to_string(), b.bin_hi.to_string(), b.empirical.to_string(), b.predicted.to_string()])
        .collect();
    csv_string(&header, &body)
}

pub fn parse_weight(s: &str) -> CliResult<Vec<Rational>> {
    symvar::rational::parse_list(s).map_err(|e| CliError::Schema(format!("bad weight {s:?}: {}", e.0)))
}
