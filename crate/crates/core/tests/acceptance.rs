//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on
//! any failure. Run with `cargo test -p symvar-core --test acceptance`.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use symvar::counter::{self, CapSpec};
use symvar::families::{enumerate_points, parse_family, Norm};
use symvar::polytope::polytope_exponents;
use symvar::presets::{lookup_preset, preset_registry, Preset};
use symvar::quadrature::QuadOptions;
use symvar::rootlat::Weight;
use symvar::strata::{self, StratumIndex};
use symvar::testfn::LogBump;
use symvar::volasym::{self, ExpMapSpec, ExpTerm};
use symvar::Rational;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn presets(prefix: &str) -> Vec<Preset> {
    preset_registry().expect("registry").into_iter().filter(|p| p.name.starts_with(prefix)).collect()
}

fn c1_detsurface() -> Check {
    for n in 2..=6usize {
        let p = lookup_preset(&format!("detsurface:{n}")).map_err(err)?;
        let e = strata::exponents_global(&p.rs, &p.lam).map_err(err)?;
        let want = (Rational::from_int((n * n - n) as i64), 1, StratumIndex::initial(n - 2));
        ensure((e.a.clone(), e.b, e.i) == want, || format!("n = {n}: got ({}, {}, {:?})", e.a, e.b, e.i))?;
    }
    Ok("n = 2..6: (n^2 - n, 1, {alpha_1..alpha_{n-2}})".into())
}

fn c2_symmat() -> Check {
    let mut seen = 0;
    for p in presets("symmat") {
        let n = p.rs.rank() + 1;
        let e = strata::exponents_global(&p.rs, &p.lam).map_err(err)?;
        let want = (Rational::new((n * n - n) as i64, 2), 1, StratumIndex::initial(n - 2));
        ensure((e.a.clone(), e.b, e.i) == want, || format!("{}: got ({}, {}, {:?})", p.name, e.a, e.b, e.i))?;
        seen += 1;
    }
    Ok(format!("{seen} signatures, n = 2..6: ((n^2 - n)/2, 1, I_(n-2))"))
}

fn c3_quadric() -> Check {
    for (p, q) in [(2, 2), (3, 1), (3, 2)] {
        let pr = lookup_preset(&format!("quadric:{p},{q},1")).map_err(err)?;
        let e = strata::exponents_global(&pr.rs, &pr.lam).map_err(err)?;
        let want = (Rational::from_int((p + q - 2) as i64), 1, StratumIndex::EMPTY);
        ensure((e.a.clone(), e.b, e.i) == want, || format!("({p},{q}): got ({}, {}, {:?})", e.a, e.b, e.i))?;
    }
    Ok("(2,2), (3,1), (3,2): (p + q - 2, 1, {})".into())
}

fn c4_tworho() -> Check {
    for r in 1..=4usize {
        for ell in 1..=2i64 {
            let p = lookup_preset(&format!("tworho:A,{r},{ell}")).map_err(err)?;
            let e = strata::exponents_global(&p.rs, &p.lam).map_err(err)?;
            let want = (Rational::new(1, ell), r as u32, StratumIndex::EMPTY);
            ensure((e.a.clone(), e.b, e.i) == want, || format!("A{r}, ell = {ell}: got ({}, {}, {:?})", e.a, e.b, e.i))?;
        }
    }
    Ok("A_1..A_4, ell = 1, 2: (1/ell, r, {})".into())
}

fn c5_polytope() -> Check {
    let all = preset_registry().map_err(err)?;
    for p in &all {
        let e = strata::exponents_global(&p.rs, &p.lam).map_err(err)?;
        let (a, b) = polytope_exponents(&p.rs, std::slice::from_ref(&p.lam)).map_err(err)?;
        ensure(a == e.a && b == e.b, || format!("{}: LP ({a}, {b}) vs closed form ({}, {})", p.name, e.a, e.b))?;
    }
    Ok(format!("{} presets, exact equality", all.len()))
}

/// Checks monotonicity and connectivity for one `(rs, lam)`; returns the
/// number of comparable pairs examined.
fn monotone_connected(p: &Preset, require_containment: bool) -> Result<usize, String> {
    let (rs, lam) = (&p.rs, &p.lam);
    let nodes = strata::enumerate_lambda_connected(rs, lam).map_err(err)?;
    let r = rs.rank();
    let mut pairs = 0;
    for &i in &nodes {
        let ei = strata::exponents_rel(rs, lam, i).map_err(err)?;
        for k in 0..(1u32 << r) {
            let j = StratumIndex::from_bits(k);
            ensure(!ei.i.is_subset_of(j) || strata::is_lambda_connected(rs, lam, j), || {
                format!("{}: {:?} contains I({:?}) = {:?} but is not lambda-connected", p.name, j, i, ei.i)
            })?;
        }
        for &j in &nodes {
            if !i.is_proper_subset_of(j) {
                continue;
            }
            pairs += 1;
            let ej = strata::exponents_rel(rs, lam, j).map_err(err)?;
            if require_containment || ei.a == ej.a {
                ensure(ei.i.is_subset_of(ej.i), || format!("{}: I({i:?}) = {:?} not in I({j:?}) = {:?}", p.name, ei.i, ej.i))?;
            }
            ensure(ei.cmp_pair(&ej).is_ge(), || format!("{}: pair order fails for {i:?} < {j:?}", p.name))?;
        }
    }
    Ok(pairs)
}

fn c6_monotonicity() -> Check {
    let a_presets: Vec<Preset> = preset_registry()
        .map_err(err)?
        .into_iter()
        .filter(|p| p.rs.family() == symvar::rootlat::Family::A && p.rs.rank() <= 5)
        .collect();
    let mut pairs = 0;
    for p in &a_presets {
        pairs += monotone_connected(p, true)?;
    }
    // every dominant weight with fundamental coordinates <= 2 on the same
    // root data; saturations are compared only where a(I) = a(J)
    let mut general = 0;
    let mut profiles = BTreeSet::new();
    for p in &a_presets {
        let key = format!("{:?}", p.rs.multiplicities());
        if !profiles.insert((p.rs.rank(), key)) {
            continue;
        }
        for lam in common::dominant_weights(&p.rs, 2) {
            let q = Preset { name: format!("{} with {:?}", p.name, lam.coords), family: None, rs: p.rs.clone(), lam };
            general += monotone_connected(&q, false)?;
        }
    }
    Ok(format!("{} presets, {pairs} preset pairs, {general} pairs over all dominant weights <= 2; 0 violations", a_presets.len()))
}

fn c7_measures() -> Check {
    let mut checked = 0;
    let mut systems: Vec<(symvar::rootlat::RootSystemDesc, Vec<Weight>)> = Vec::new();
    for rs in common::systems_up_to(5) {
        let w = common::dominant_weights(&rs, if rs.rank() <= 3 { 2 } else { 1 });
        systems.push((rs, w));
    }
    for p in preset_registry().map_err(err)? {
        if p.rs.rank() <= 5 {
            systems.push((p.rs.clone(), vec![p.lam.clone()]));
        }
    }
    for (rs, weights) in &systems {
        for lam in weights {
            for i in strata::enumerate_lambda_connected(rs, lam).map_err(err)? {
                let sat = strata::exponents_rel(rs, lam, i).map_err(err)?.i;
                ensure(strata::measure_exists(rs, lam, sat).map_err(err)?, || {
                    format!("{}{} lam {:?}: no measure on I({i:?}) = {sat:?}", rs.family(), rs.rank(), lam.coords)
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} saturated strata over {} root data, rank <= 5", systems.len()))
}

fn spec8(lams: &[(&[i64], Vec<f64>)], chi: &[i64]) -> ExpMapSpec {
    let terms = lams.iter().map(|(l, w)| ExpTerm { lam: Weight::from_ints(l), w: w.clone() }).collect();
    ExpMapSpec::new(terms, 0, Weight::from_ints(chi)).expect("valid spec")
}

fn c8_basic_asymptotic() -> Check {
    let specs = [
        ("I = {}", spec8(&[(&[1, 1], vec![1.0, 0.0])], &[2, 2])),
        ("|I| = 1", spec8(&[(&[1, 1], vec![1.0, 0.0]), (&[0, 1], vec![0.0, 1.0])], &[1, 2])),
        ("b = 2 tie", spec8(&[(&[1, 2], vec![1.0, 0.0]), (&[0, 2], vec![0.0, 0.1])], &[2, 4])),
    ];
    let f = LogBump { center: 0.0, width: 0.5, height: 1.0 };
    let opts = QuadOptions { rel_tol: 1e-7, ..QuadOptions::default() };
    let mut lines = Vec::new();
    for (label, spec) in &specs {
        let e = volasym::chi_exponents(spec).map_err(err)?;
        let target = volasym::limit_target(spec, &f, &opts).map_err(err)?;
        let r5 = volasym::finite_t_integral(spec, &f, 1e5, &opts).map_err(err)?.normalized_ratio;
        let r6 = volasym::finite_t_integral(spec, &f, 1e6, &opts).map_err(err)?.normalized_ratio;
        let (d5, d6, d56) = ((r5 / target - 1.0).abs(), (r6 / target - 1.0).abs(), (r5 / r6 - 1.0).abs());
        ensure(d5 < 0.05 && d6 < 0.05 && d56 < 0.02, || {
            format!("{label}: target {target:.6e}, T=1e5 {r5:.6e}, T=1e6 {r6:.6e}")
        })?;
        lines.push(format!("{label} (a={}, b={}): rel err {:.2}% / {:.2}%, rungs {:.3}%", e.a, e.b, 100.0 * d5, 100.0 * d6, 100.0 * d56));
    }
    Ok(lines.join("; "))
}

fn ladder(lo: f64, hi: f64) -> Vec<f64> {
    std::iter::successors(Some(lo), |t| Some(t * 2.0)).take_while(|&t| t <= hi).collect()
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool").install(f)
}

fn c9_det_counting() -> Check {
    let fam = parse_family("detsurface:2,1").map_err(err)?;
    let res = single_threaded(|| counter::count_ladder(fam.as_ref(), Norm::Euclidean, &[], &ladder(50.0, 800.0), 1e12))
        .map_err(err)?;
    ensure(res.truncated.is_none(), || format!("truncated: {:?}", res.truncated))?;
    let fit = counter::fit_exponent(&res.records, 1).map_err(err)?;
    let ratios: Vec<f64> = res
        .records
        .iter()
        .map(|r| fam.ball_volume(Norm::Euclidean, r.t).map(|v| r.total as f64 / v))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let tail = &ratios[ratios.len() - 3..];
    let spread = tail.iter().cloned().fold(f64::MIN, f64::max) / tail.iter().cloned().fold(f64::MAX, f64::min) - 1.0;
    ensure((1.9..=2.1).contains(&fit.a_fit) && spread < 0.10, || format!("a_fit {:.4}, ratio spread {:.3}", fit.a_fit, spread))?;
    Ok(format!("a_fit = {:.4} +/- {:.4}; N/vol over last rungs {:.4?} (spread {:.2}%)", fit.a_fit, fit.stderr, tail, 100.0 * spread))
}

fn c10_quadric_counting() -> Check {
    let fam = parse_family("quadric:2,2,1").map_err(err)?;
    let s = 0.5f64.sqrt();
    let cap = CapSpec::new(vec![s, 0.0, s, 0.0], 0.3).map_err(err)?;
    let res = counter::count_ladder(fam.as_ref(), Norm::Euclidean, std::slice::from_ref(&cap), &ladder(50.0, 400.0), 1e12)
        .map_err(err)?;
    ensure(res.truncated.is_none(), || format!("truncated: {:?}", res.truncated))?;
    let fit = counter::fit_exponent(&res.records, 1).map_err(err)?;
    let local = counter::local_exponents(fam.as_ref(), &cap.center).map_err(err)?;
    let cap_fit = counter::fit_cap_exponent(&res.records, 0, local.b).map_err(err)?;
    let pred = local.a.to_f64();
    ensure((1.85..=2.15).contains(&fit.a_fit) && (cap_fit.a_fit - pred).abs() <= 0.2, || {
        format!("a_fit {:.4}, cap a_fit {:.4} vs predicted {pred}", fit.a_fit, cap_fit.a_fit)
    })?;
    Ok(format!("a_fit = {:.4}; cap (1,0,1,0)/sqrt2 eps 0.3: a_fit = {:.4} vs predicted {}", fit.a_fit, cap_fit.a_fit, local.a))
}

fn c11_angular() -> Check {
    let fam = parse_family("quadric:2,2,1").map_err(err)?;
    let k100 = counter::angular_compare(fam.as_ref(), Norm::Euclidean, 100.0, 36).map_err(err)?;
    let k400 = counter::angular_compare(fam.as_ref(), Norm::Euclidean, 400.0, 36).map_err(err)?;
    ensure(k400.ks_distance < 0.05 && k400.ks_distance < k100.ks_distance, || {
        format!("KS(100) = {:.5}, KS(400) = {:.5}", k100.ks_distance, k400.ks_distance)
    })?;
    Ok(format!(
        "KS(100) = {:.5} ({} pts), KS(400) = {:.5} ({} pts)",
        k100.ks_distance, k100.n_points, k400.ks_distance, k400.n_points
    ))
}

/// Largest T <= 10 keeping the naive grid scan small in `dim` dimensions.
fn naive_t(dim: usize) -> f64 {
    match dim {
        0..=5 => 10.0,
        6 => 8.0,
        7..=9 => 4.0,
        10 => 3.5,
        11..=15 => 2.6,
        _ => 2.25,
    }
}

fn c12_enumeration() -> Check {
    let mut lines = Vec::new();
    let mut skipped = Vec::new();
    for p in preset_registry().map_err(err)? {
        let Some(fam) = p.family.as_deref() else { continue };
        if let Err(e) = fam.check_enumerable() {
            skipped.push(format!("{} ({e})", p.name));
            continue;
        }
        let t = naive_t(fam.ambient_dim());
        let norms: &[Norm] = if fam.ambient_dim() <= 5 { &[Norm::Euclidean, Norm::Sup] } else { &[Norm::Euclidean] };
        for &norm in norms {
            let t = if norm == Norm::Sup { t.min(5.0) } else { t };
            let mut got = enumerate_points(fam, norm, t).map_err(err)?;
            got.sort();
            let want = common::naive_points(fam, norm, t);
            ensure(got == want, || format!("{} {norm} T={t}: {} vs naive {}", p.name, got.len(), want.len()))?;
            lines.push(format!("{}[{norm},T={t}]={}", p.name, got.len()));
        }
    }
    let mut s = lines.join(" ");
    if !skipped.is_empty() {
        s.push_str(&format!("; not enumerable by design: {}", skipped.join(", ")));
    }
    Ok(s)
}

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Check); 12] = [
        (1, "detsurface closed forms", Duration::from_secs(1), c1_detsurface),
        (2, "symmat closed forms", Duration::from_secs(1), c2_symmat),
        (3, "quadric closed forms", Duration::from_secs(1), c3_quadric),
        (4, "tworho closed forms", Duration::from_secs(1), c4_tworho),
        (5, "LP / closed-form equivalence", Duration::from_secs(5), c5_polytope),
        (6, "monotonicity and connectivity", Duration::from_secs(30), c6_monotonicity),
        (7, "measure existence", Duration::from_secs(10), c7_measures),
        (8, "basic asymptotic formula", Duration::from_secs(300), c8_basic_asymptotic),
        (9, "counting law, detsurface(2,1)", Duration::from_secs(300), c9_det_counting),
        (10, "counting law, quadric((2,2),1)", Duration::from_secs(600), c10_quadric_counting),
        (11, "angular equidistribution", Duration::from_secs(600), c11_angular),
        (12, "enumeration vs naive grid", Duration::from_secs(60), c12_enumeration),
    ];
    let mut failed = 0;
    for (n, title, limit, f) in criteria {
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; over the {limit:?} limit")),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {n:>2} {} {title} ({:.2} s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
