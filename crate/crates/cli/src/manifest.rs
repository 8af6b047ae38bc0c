//! Run manifests: a JSON file naming a preset and an ordered task list.
//! Running one writes per-task outputs plus `summary.json` and `report.md`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use symvar::counter::{self, CapSpec, ExponentFit};
use symvar::families::{Norm, PointFamily};
use symvar::presets::Preset;
use symvar::quadrature::QuadOptions;
use symvar::strata;
use symvar::testfn::parse_test_function;
use symvar::volasym::{self, ExpMapSpec};
use symvar::Rational;

use crate::error::{CliError, CliResult, EXIT_CHECKS_FAILED, EXIT_OK};
use crate::output::{check_ladder, read_text, write_json, write_text};
use crate::tasks::{self, NamedExponents, PresetRef};

/// Relative tolerance on the fitted counting exponent.
pub const COUNT_EXPONENT_RTOL: f64 = 0.075;
/// Absolute tolerance on a fitted cap exponent.
pub const CAP_EXPONENT_ATOL: f64 = 0.2;
/// Allowed spread of `N_T / vol` over the last three rungs.
pub const VOLUME_RATIO_SPREAD: f64 = 0.10;
pub const VOLUME_LIMIT_RTOL: f64 = 0.05;
pub const VOLUME_STABILITY_RTOL: f64 = 0.02;
pub const KS_MAX: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Exponents,
    Strata,
    Volume,
    Count,
    Compare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeSection {
    pub spec: ExpMapSpec,
    #[serde(default = "default_test_function")]
    pub test_function: String,
    /// Defaults to the manifest ladder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<f64>>,
}

fn default_test_function() -> String {
    "log_bump:0,0.5".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_bins() -> usize {
    36
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub preset: PresetRef,
    #[serde(default)]
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub ladder: Vec<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_norm")]
    pub norm: String,
    #[serde(default)]
    pub caps: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<VolumeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSection>,
    /// Work budget for one enumeration, in inner-loop steps.
    #[serde(default = "default_max_work")]
    pub max_work: f64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_norm() -> String {
    "euclidean".into()
}

fn default_max_work() -> f64 {
    1e11
}

impl RunManifest {
    pub fn from_json(s: &str) -> CliResult<Self> {
        serde_json::from_str(s).map_err(|e| CliError::Schema(format!("manifest: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::from_json(&read_text(path)?)
    }

    /// Schema checks that do not need any computation.
    pub fn validate(&self) -> CliResult<()> {
        let mut seen = BTreeSet::new();
        for t in &self.tasks {
            if !seen.insert(*t) {
                return Err(CliError::Schema(format!("task {t:?} listed twice")));
            }
        }
        if !self.ladder.is_empty() || self.tasks.contains(&Task::Count) {
            check_ladder(&self.ladder)?;
        }
        self.norm()?;
        self.cap_specs()?;
        if !(self.max_work > 0.0) {
            return Err(CliError::Schema("max_work must be positive".into()));
        }
        if self.tasks.contains(&Task::Volume) {
            let v = self.volume.as_ref().ok_or_else(|| CliError::Schema("volume task needs a volume section".into()))?;
            v.spec.validate()?;
            parse_test_function(&v.test_function)?;
            check_ladder(v.ladder.as_deref().unwrap_or(&self.ladder))?;
        }
        if self.tasks.contains(&Task::Compare) && self.compare.is_none() {
            return Err(CliError::Schema("compare task needs a compare section".into()));
        }
        Ok(())
    }

    pub fn norm(&self) -> CliResult<Norm> {
        self.norm.parse::<Norm>().map_err(CliError::from)
    }

    pub fn cap_specs(&self) -> CliResult<Vec<CapSpec>> {
        self.caps.iter().map(|c| CapSpec::parse(c).map_err(CliError::from)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub predicted: serde_json::Value,
    pub fitted: serde_json::Value,
    pub tolerance: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSummary {
    pub task: Task,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null", default)]
    pub predicted: serde_json::Value,
    #[serde(skip_serializing_if = "serde_json::Value::is_null", default)]
    pub fitted: serde_json::Value,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub exit_code: i32,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub preset: Option<String>,
    pub seed: u64,
    pub tasks: Vec<TaskSummary>,
    pub checks: Vec<Check>,
    pub all_pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub truncated: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<ErrorRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub quad: QuadOptions,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { quad: QuadOptions::default() }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub summary: Summary,
    pub error: Option<CliError>,
}

struct Runner<'a> {
    m: &'a RunManifest,
    opts: RunOptions,
    dir: &'a Path,
    summary: Summary,
    timings: Vec<serde_json::Value>,
}

/// Runs every task in order. Outputs written before a failure are kept and
/// the summary records the error.
pub fn run(manifest: &RunManifest, opts: &RunOptions) -> RunOutcome {
    let dir = manifest.output_dir.as_path();
    let mut r = Runner {
        m: manifest,
        opts: *opts,
        dir,
        summary: Summary { seed: manifest.seed, ..Summary::default() },
        timings: Vec::new(),
    };
    let result = r.run_all();
    let Runner { mut summary, timings, .. } = r;
    summary.all_pass = summary.checks.iter().all(|c| c.pass);
    let (mut exit_code, error) = match result {
        Ok(()) if summary.truncated.is_some() => (crate::error::EXIT_BUDGET, None),
        Ok(()) => (if summary.all_pass { EXIT_OK } else { EXIT_CHECKS_FAILED }, None),
        Err(e) => (e.exit_code(), Some(e)),
    };
    if let Some(e) = &error {
        summary.error = Some(ErrorRecord { exit_code, message: e.to_string() });
    } else if let Some(t) = &summary.truncated {
        summary.error = Some(ErrorRecord { exit_code, message: t.clone() });
    }
    let finish = || -> CliResult<()> {
        write_json(&dir.join("summary.json"), &summary)?;
        write_text(&dir.join("report.md"), &render_report(&summary))?;
        if !timings.is_empty() {
            write_json(&dir.join("timings.json"), &timings)?;
        }
        Ok(())
    };
    if let Err(e) = finish() {
        exit_code = e.exit_code();
        return RunOutcome { exit_code, summary, error: Some(e) };
    }
    RunOutcome { exit_code, summary, error }
}

impl Runner<'_> {
    fn run_all(&mut self) -> CliResult<()> {
        self.m.validate()?;
        if self.m.tasks.is_empty() {
            return Ok(());
        }
        let preset = self.m.preset.resolve()?;
        self.summary.preset = Some(preset.name.clone());
        for &task in &self.m.tasks {
            match task {
                Task::Exponents => self.exponents(&preset)?,
                Task::Strata => self.strata(&preset)?,
                Task::Volume => self.volume()?,
                Task::Count => self.count(&preset)?,
                Task::Compare => self.compare(&preset)?,
            }
            if self.summary.truncated.is_some() {
                break;
            }
        }
        Ok(())
    }

    fn family<'p>(&self, preset: &'p Preset, task: Task) -> CliResult<&'p dyn PointFamily> {
        preset
            .family
            .as_deref()
            .ok_or_else(|| CliError::Schema(format!("preset {} has no integral-point model for task {task:?}", preset.name)))
    }

    fn exponents(&mut self, preset: &Preset) -> CliResult<()> {
        let doc = tasks::exponents_doc(preset)?;
        write_json(&self.dir.join("exponents.json"), &doc)?;
        let lp = serde_json::to_value(&doc.polytope)?;
        let closed = serde_json::json!({ "a": doc.predicted.a, "b": doc.predicted.b });
        self.summary.checks.push(Check {
            name: "exponents_polytope_matches_closed_form".into(),
            pass: lp == closed,
            predicted: closed,
            fitted: lp,
            tolerance: "exact".into(),
        });
        self.summary.tasks.push(TaskSummary {
            task: Task::Exponents,
            outputs: vec!["exponents.json".into()],
            predicted: serde_json::to_value(&doc.predicted)?,
            fitted: serde_json::Value::Null,
            notes: Vec::new(),
        });
        Ok(())
    }

    fn strata(&mut self, preset: &Preset) -> CliResult<()> {
        let (doc, poset) = tasks::strata_doc(&preset.rs, &preset.lam)?;
        write_json(&self.dir.join("strata.json"), &doc)?;
        write_text(&self.dir.join("strata.dot"), &poset.to_dot())?;
        let missing = tasks::strata_without_measure(&preset.rs, &preset.lam, &doc.lambda_connected)?;
        self.summary.checks.push(Check {
            name: "strata_measures_exist".into(),
            predicted: serde_json::json!([]),
            fitted: serde_json::to_value(missing.iter().map(|s| s.names()).collect::<Vec<_>>())?,
            tolerance: "exact".into(),
            pass: missing.is_empty(),
        });
        self.summary.tasks.push(TaskSummary {
            task: Task::Strata,
            outputs: vec!["strata.json".into(), "strata.dot".into()],
            predicted: serde_json::json!({
                "n_strata": doc.lambda_connected.len(),
                "exponents": NamedExponents::from(&doc.exponents),
            }),
            fitted: serde_json::Value::Null,
            notes: Vec::new(),
        });
        Ok(())
    }

    fn volume(&mut self) -> CliResult<()> {
        let section = self.m.volume.as_ref().expect("validated");
        let f = parse_test_function(&section.test_function)?;
        let ladder = section.ladder.as_deref().unwrap_or(&self.m.ladder);
        let run = tasks::volume_run(&section.spec, f.as_ref(), ladder, &self.opts.quad)?;
        write_text(&self.dir.join("volume.csv"), &tasks::volume_csv(&run.rows)?)?;
        let e = volasym::chi_exponents(&section.spec)?;
        let last = run.rows.last().expect("non-empty ladder");
        let rel = (last.normalized_ratio - run.target).abs() / run.target.abs();
        self.summary.checks.push(Check {
            name: "volume_limit".into(),
            predicted: serde_json::json!(run.target),
            fitted: serde_json::json!(last.normalized_ratio),
            tolerance: format!("rel {VOLUME_LIMIT_RTOL}"),
            pass: rel <= VOLUME_LIMIT_RTOL,
        });
        if let [.., x, y] = run.rows.as_slice() {
            let spread = (x.normalized_ratio - y.normalized_ratio).abs() / y.normalized_ratio.abs();
            self.summary.checks.push(Check {
                name: "volume_stability".into(),
                predicted: serde_json::json!(y.normalized_ratio),
                fitted: serde_json::json!(x.normalized_ratio),
                tolerance: format!("rel {VOLUME_STABILITY_RTOL}"),
                pass: spread <= VOLUME_STABILITY_RTOL,
            });
        }
        self.summary.tasks.push(TaskSummary {
            task: Task::Volume,
            outputs: vec!["volume.csv".into()],
            predicted: serde_json::json!({
                "exponents": NamedExponents::from(&e),
                "kappa": run.kappa,
                "L": run.l_chi,
                "kappa_L_target": run.target,
            }),
            fitted: serde_json::json!({ "normalized_ratio": last.normalized_ratio }),
            notes: Vec::new(),
        });
        Ok(())
    }

    fn count(&mut self, preset: &Preset) -> CliResult<()> {
        let fam = self.family(preset, Task::Count)?;
        let norm = self.m.norm()?;
        let caps = self.m.cap_specs()?;
        let res = counter::count_ladder(fam, norm, &caps, &self.m.ladder, self.m.max_work)?;
        write_text(&self.dir.join("counts.csv"), &tasks::count_csv(&res.records, caps.len(), false)?)?;
        for r in &res.records {
            self.timings.push(serde_json::json!({ "task": "count", "T": r.t, "elapsed_ms": r.elapsed_ms }));
        }
        let e = strata::exponents_global(&preset.rs, &preset.lam)?;
        let a = e.a.to_f64();
        let mut notes = Vec::new();
        let mut fitted = serde_json::Map::new();
        match counter::fit_exponent(&res.records, e.b) {
            Ok(fit) => {
                fitted.insert("total".into(), serde_json::to_value(fit)?);
                self.summary.checks.push(exponent_check("count_exponent", &e.a, &fit, COUNT_EXPONENT_RTOL * a));
            }
            Err(err) => notes.push(format!("no exponent fit: {err}")),
        }
        match volume_ratios(fam, norm, &res.records) {
            Some(ratios) if ratios.len() >= 3 => {
                let tail = &ratios[ratios.len() - 3..];
                let (lo, hi) = tail.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
                fitted.insert("count_over_volume".into(), serde_json::json!(ratios));
                self.summary.checks.push(Check {
                    name: "count_volume_ratio_stable".into(),
                    predicted: serde_json::json!("constant"),
                    fitted: serde_json::json!(tail),
                    tolerance: format!("max/min - 1 < {VOLUME_RATIO_SPREAD}"),
                    pass: hi / lo - 1.0 < VOLUME_RATIO_SPREAD,
                });
            }
            Some(_) => notes.push("fewer than three rungs for the volume ratio".into()),
            None => notes.push("no closed-form ball volume for this family and norm".into()),
        }
        let mut cap_predictions = Vec::new();
        for (k, cap) in caps.iter().enumerate() {
            let local = match counter::local_exponents(fam, &cap.center) {
                Ok(l) => l,
                Err(err) => {
                    notes.push(format!("cap_{k}: no local prediction ({err})"));
                    cap_predictions.push(serde_json::Value::Null);
                    continue;
                }
            };
            cap_predictions.push(serde_json::to_value(NamedExponents::from(&local))?);
            match counter::fit_cap_exponent(&res.records, k, local.b) {
                Ok(fit) => {
                    fitted.insert(format!("cap_{k}"), serde_json::to_value(fit)?);
                    self.summary.checks.push(exponent_check(&format!("cap_{k}_exponent"), &local.a, &fit, CAP_EXPONENT_ATOL));
                }
                Err(err) => notes.push(format!("cap_{k}: no exponent fit: {err}")),
            }
        }
        if let Some(t) = &res.truncated {
            notes.push(format!("ladder truncated: {t}"));
            self.summary.truncated = Some(t.clone());
        }
        self.summary.tasks.push(TaskSummary {
            task: Task::Count,
            outputs: vec!["counts.csv".into()],
            predicted: serde_json::json!({ "total": NamedExponents::from(&e), "caps": cap_predictions }),
            fitted: serde_json::Value::Object(fitted),
            notes,
        });
        Ok(())
    }

    fn compare(&mut self, preset: &Preset) -> CliResult<()> {
        let fam = self.family(preset, Task::Compare)?;
        let section = self.m.compare.as_ref().expect("validated");
        let c = counter::angular_compare(fam, self.m.norm()?, section.t, section.bins)?;
        write_text(&self.dir.join("compare.csv"), &tasks::compare_csv(&c)?)?;
        self.summary.checks.push(Check {
            name: "angular_ks".into(),
            predicted: serde_json::json!(0.0),
            fitted: serde_json::json!(c.ks_distance),
            tolerance: format!("< {KS_MAX}"),
            pass: c.ks_distance < KS_MAX,
        });
        self.summary.tasks.push(TaskSummary {
            task: Task::Compare,
            outputs: vec!["compare.csv".into()],
            predicted: serde_json::Value::Null,
            fitted: serde_json::json!({ "T": c.t, "n_points": c.n_points, "ks_distance": c.ks_distance }),
            notes: Vec::new(),
        });
        Ok(())
    }
}

fn exponent_check(name: &str, predicted: &Rational, fit: &ExponentFit, tol: f64) -> Check {
    Check {
        name: name.into(),
        predicted: serde_json::json!(predicted),
        fitted: serde_json::json!(fit.a_fit),
        tolerance: format!("abs {tol}"),
        pass: (fit.a_fit - predicted.to_f64()).abs() <= tol,
    }
}

fn volume_ratios(fam: &dyn PointFamily, norm: Norm, records: &[counter::CountRecord]) -> Option<Vec<f64>> {
    records.iter().map(|r| fam.ball_volume(norm, r.t).ok().map(|v| r.total as f64 / v)).collect()
}

pub fn render_report(s: &Summary) -> String {
    let mut out = String::from("# Run report\n\n");
    if let Some(p) = &s.preset {
        out.push_str(&format!("Preset: `{p}`  \nSeed: {}\n\n", s.seed));
    }
    if s.tasks.is_empty() && s.error.is_none() {
        out.push_str("No tasks requested.\n");
        return out;
    }
    out.push_str("| check | predicted | fitted | tolerance | result |\n|---|---|---|---|---|\n");
    for c in &s.checks {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} |\n",
            c.name,
            c.predicted,
            c.fitted,
            c.tolerance,
            if c.pass { "pass" } else { "FAIL" }
        ));
    }
    for t in &s.tasks {
        for n in &t.notes {
            out.push_str(&format!("\n- {:?}: {n}", t.task));
        }
    }
    if let Some(e) = &s.error {
        out.push_str(&format!("\n\nStopped with exit code {}: {}\n", e.exit_code, e.message));
    }
    out.push('\n');
    out
}
