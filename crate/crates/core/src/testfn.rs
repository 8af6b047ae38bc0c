//! Compactly supported test functions on the representation space, selected
//! by name at runtime.
//!
//! A spec string is `name` or `name:p1,p2,...`, e.g. `log_bump:0,0.5`.

use std::fmt;

use crate::error::{Error, Result};

pub trait TestFunction: Send + Sync + fmt::Debug {
    /// Canonical spec string; parses back to an equal function.
    fn spec(&self) -> String;

    fn eval(&self, x: &[f64]) -> f64;

    /// `(r_lo, r_hi)` with the support inside `r_lo <= |x| <= r_hi`;
    /// `r_lo = 0` when the support reaches the origin.
    fn radial_support(&self) -> (f64, f64);
}

/// Smooth bump on `(-1, 1)` with maximum 1 at the origin.
pub fn bump(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - y * y)).exp()
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero;

impl TestFunction for Zero {
    fn spec(&self) -> String {
        "zero".into()
    }
    fn eval(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn radial_support(&self) -> (f64, f64) {
        (1.0, 1.0)
    }
}

/// `height * bump((log|x| - center) / width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogBump {
    pub center: f64,
    pub width: f64,
    pub height: f64,
}

impl TestFunction for LogBump {
    fn spec(&self) -> String {
        format!("log_bump:{},{},{}", self.center, self.width, self.height)
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        if r == 0.0 {
            return 0.0;
        }
        self.height * bump((r.ln() - self.center) / self.width)
    }
    fn radial_support(&self) -> (f64, f64) {
        ((self.center - self.width).exp(), (self.center + self.width).exp())
    }
}

/// A log bump multiplied by `1 + tilt * x_0 / |x|`, which breaks radial symmetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedBump {
    pub bump: LogBump,
    pub tilt: f64,
}

impl TestFunction for TiltedBump {
    fn spec(&self) -> String {
        format!("tilted_bump:{},{},{}", self.bump.center, self.bump.width, self.tilt)
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let b = self.bump.eval(x);
        if b == 0.0 {
            return 0.0;
        }
        b * (1.0 + self.tilt * x[0] / norm(x))
    }
    fn radial_support(&self) -> (f64, f64) {
        self.bump.radial_support()
    }
}

/// `max(0, 1 - |x| / radius)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tent {
    pub radius: f64,
}

impl TestFunction for Tent {
    fn spec(&self) -> String {
        format!("tent:{}", self.radius)
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (1.0 - norm(x) / self.radius).max(0.0)
    }
    fn radial_support(&self) -> (f64, f64) {
        (0.0, self.radius)
    }
}

type Ctor = fn(&[f64]) -> Result<Box<dyn TestFunction>>;

fn arity(name: &str, p: &[f64], allowed: &[usize]) -> Result<()> {
    if allowed.contains(&p.len()) {
        Ok(())
    } else {
        Err(Error::Parse(format!("{name} takes {allowed:?} parameters, got {}", p.len())))
    }
}

fn make_zero(p: &[f64]) -> Result<Box<dyn TestFunction>> {
    arity("zero", p, &[0])?;
    Ok(Box::new(Zero))
}

fn make_log_bump(p: &[f64]) -> Result<Box<dyn TestFunction>> {
    arity("log_bump", p, &[0, 2, 3])?;
    let center = p.first().copied().unwrap_or(0.0);
    let width = p.get(1).copied().unwrap_or(0.5);
    let height = p.get(2).copied().unwrap_or(1.0);
    if width <= 0.0 {
        return Err(Error::Parse("log_bump width must be positive".into()));
    }
    Ok(Box::new(LogBump { center, width, height }))
}

fn make_tilted(p: &[f64]) -> Result<Box<dyn TestFunction>> {
    arity("tilted_bump", p, &[3])?;
    if p[1] <= 0.0 || p[2].abs() >= 1.0 {
        return Err(Error::Parse("tilted_bump needs width > 0 and |tilt| < 1".into()));
    }
    Ok(Box::new(TiltedBump { bump: LogBump { center: p[0], width: p[1], height: 1.0 }, tilt: p[2] }))
}

fn make_tent(p: &[f64]) -> Result<Box<dyn TestFunction>> {
    arity("tent", p, &[0, 1])?;
    let radius = p.first().copied().unwrap_or(1.0);
    if radius <= 0.0 {
        return Err(Error::Parse("tent radius must be positive".into()));
    }
    Ok(Box::new(Tent { radius }))
}

const REGISTRY: &[(&str, Ctor)] =
    &[("zero", make_zero), ("log_bump", make_log_bump), ("tilted_bump", make_tilted), ("tent", make_tent)];

pub fn test_function_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|(n, _)| *n).collect()
}

pub fn parse_test_function(spec: &str) -> Result<Box<dyn TestFunction>> {
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    let name = name.trim();
    let params: Vec<f64> = if args.trim().is_empty() {
        Vec::new()
    } else {
        args.split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{a:?}: {e}"))))
            .collect::<Result<_>>()?
    };
    let ctor = REGISTRY
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, c)| *c)
        .ok_or_else(|| Error::NotFound { name: name.to_string(), valid: test_function_names().join(", ") })?;
    ctor(&params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_round_trip() {
        for s in ["zero", "log_bump:0.25,0.5,2", "tilted_bump:0,0.5,0.3", "tent:2"] {
            let f = parse_test_function(s).unwrap();
            let g = parse_test_function(&f.spec()).unwrap();
            assert_eq!(f.spec(), g.spec());
            for x in [[0.3, 0.9], [1.0, 0.1], [-0.5, 0.2]] {
                assert_eq!(f.eval(&x), g.eval(&x));
            }
        }
    }

    #[test]
    fn support_is_respected() {
        let f = parse_test_function("log_bump:0.5,0.25").unwrap();
        let (lo, hi) = f.radial_support();
        assert_eq!(f.eval(&[lo * 0.999, 0.0]), 0.0);
        assert_eq!(f.eval(&[0.0, hi * 1.001]), 0.0);
        assert!((f.eval(&[0.5f64.exp(), 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_name_lists_registry() {
        match parse_test_function("gauss:1") {
            Err(Error::NotFound { valid, .. }) => assert!(valid.contains("log_bump")),
            other => panic!("{other:?}"),
        }
    }
}
