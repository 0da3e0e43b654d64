//! The worked examples, end to end, as a list of pass/fail checks.

use std::f64::consts::PI;

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::asymptotics::{metric_expansion, pair_constant_for_series_constant, regularity_class, Smoothness};
use crate::curvature::{
    chern_scalar, curvature_sweep, fd_oracle::scalar_curvature_fd, riemannian_scalar, CurvatureRow,
};
use crate::error::Result;
use crate::expr::parse;
use crate::geometry::{HermitianMetricRadial, KahlerPotentialDeriv};
use crate::klsc::{build_klsc_metric, check_admissible, klsc_from_potential, AdmissiblePair, KlscConstruction};
use crate::radial::{Annulus, Basepoint, Normalization};

pub const DEFECT_TOL: f64 = 1e-6;
pub const CLOSED_FORM_TOL: f64 = 1e-10;
pub const ORACLE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example {
    Flat,
    Burns,
    FubiniStudy,
    Z2Z8,
    ZZ2,
}

impl Example {
    pub const ALL: [Example; 5] = [Example::Flat, Example::Burns, Example::FubiniStudy, Example::Z2Z8, Example::ZZ2];

    pub fn name(self) -> &'static str {
        match self {
            Example::Flat => "flat",
            Example::Burns => "burns",
            Example::FubiniStudy => "fubini-study",
            Example::Z2Z8 => "z2-z8",
            Example::ZZ2 => "z-z2",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Example::ALL.into_iter().find(|e| e.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Reported but not counted (known discrepancy with a displayed formula).
    pub informational: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ExampleReport {
    pub example: Example,
    pub checks: Vec<Check>,
    pub data: Value,
}

impl ExampleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.informational)
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, informational: false, detail: detail.into() });
    }

    fn info(&mut self, name: impl Into<String>, agrees: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed: agrees, informational: true, detail: detail.into() });
    }

    fn result<T>(&mut self, name: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.check(name, false, format!("error: {e}"));
                None
            }
        }
    }

    /// Maximum relative deviation of `f` from `g` over `points`.
    fn compare(
        &mut self,
        name: &str,
        points: &[f64],
        tol: f64,
        f: impl Fn(f64) -> Result<f64>,
        g: impl Fn(f64) -> f64,
    ) {
        let mut worst = (0.0f64, f64::NAN);
        for &z in points {
            match f(z) {
                Ok(v) => {
                    let e = g(z);
                    let d = (v - e).abs() / e.abs().max(1e-300);
                    if !(d <= worst.0) {
                        worst = (d, z);
                    }
                }
                Err(err) => {
                    self.check(name, false, format!("error at z = {z}: {err}"));
                    return;
                }
            }
        }
        self.check(name, worst.0 <= tol, format!("max relative deviation {:.3e} (at z = {:.6e})", worst.0, worst.1));
    }

    fn defect_sweep(&mut self, name: &str, m: &HermitianMetricRadial) -> Option<Vec<CurvatureRow>> {
        let rows = self.result(name, curvature_sweep(m, &m.domain().grid(100)))?;
        let worst = rows.iter().map(|r| r.defect.abs() / (1.0 + r.s.abs())).fold(0.0, f64::max);
        self.check(name, worst <= DEFECT_TOL, format!("max |S-2S_C|/(1+|S|) = {worst:.3e} over 100 points"));
        Some(rows)
    }

    fn oracle(&mut self, name: &str, m: &HermitianMetricRadial) {
        let mut worst = 0.0f64;
        for z in m.domain().grid(10) {
            let r = scalar_curvature_fd(m, z).and_then(|a| Ok((a, riemannian_scalar(m, z)?)));
            match r {
                Ok((a, b)) => worst = worst.max((a - b).abs() / b.abs().max(1.0)),
                Err(e) => {
                    self.check(name, false, format!("error at z = {z}: {e}"));
                    return;
                }
            }
        }
        self.check(
            name,
            worst <= ORACLE_TOL,
            format!("finite-difference oracle max deviation {worst:.3e} over 10 points"),
        );
    }
}

fn rows_json(rows: &[CurvatureRow]) -> Value {
    Value::Array(rows.iter().map(|r| json!([r.z, r.s, r.s_c, r.defect])).collect())
}

fn potential(n: usize, domain: Annulus, dphi: &str) -> Result<KahlerPotentialDeriv> {
    KahlerPotentialDeriv::new(n, domain, parse(dphi)?)
}

fn flat(rep: &mut ExampleReport) {
    let mut data = serde_json::Map::new();
    for n in [2usize, 3] {
        let nf = n as f64;
        let Some(p) = rep.result("flat potential", potential(n, Annulus::punctured(), "1")) else { return };
        let Some(c) = rep.result("flat construction", klsc_from_potential(&p, Normalization::canonical(), 1.0)) else {
            return;
        };
        let grid = Annulus::punctured().grid(64);
        let expect =
            move |z: f64| (nf - 1.0).powf(-2.0 / (2.0 * nf - 1.0)) * z.powf(-2.0 * (nf - 1.0) / (2.0 * nf - 1.0));
        rep.compare(&format!("n={n}: v^2 closed form"), &grid, CLOSED_FORM_TOL, |z| c.factor_squared.eval(z), expect);
        rep.compare(&format!("n={n}: E = F = v^2"), &grid, CLOSED_FORM_TOL, |z| c.metric.e().eval(z), expect);
        let sweep = rep.defect_sweep(&format!("n={n}: Klsc defect"), &c.metric);
        let bounded = c.metric.restrict(Annulus::new(0.01, Some(100.0)).unwrap_or(Annulus::punctured()));
        if let Some(m) = rep.result("flat restriction", bounded) {
            rep.oracle(&format!("n={n}: oracle"), &m);
        }
        // S = 2·S_C = 2(n−1)(2n−1)^2 · ... in terms of the cone radius
        // r² = (n−1)^{−2/(2n−1)} (2n−1)² z^{1/(2n−1)}
        let r2 = |z: f64| {
            (nf - 1.0).powf(-2.0 / (2.0 * nf - 1.0)) * (2.0 * nf - 1.0).powi(2) * z.powf(1.0 / (2.0 * nf - 1.0))
        };
        let displayed = |z: f64| 8.0 * nf * (2.0 * nf - 1.0) * (nf - 1.0).powi(2) / r2(z);
        if let Ok(s) = riemannian_scalar(&c.metric, 1.0) {
            let agrees = (s - displayed(1.0)).abs() <= 1e-6 * displayed(1.0);
            rep.info(
                format!("n={n}: S against the displayed 8n(2n-1)(n-1)^2 r^-2"),
                agrees,
                format!("computed S(1) = {s:.12}, displayed {:.12}, ratio {:.6}", displayed(1.0), displayed(1.0) / s),
            );
            data.insert(format!("S_at_1_n{n}"), json!(s));
        }
        if let Some(rows) = sweep {
            data.insert(format!("sweep_n{n}"), rows_json(&rows));
        }
    }
    rep.data = Value::Object(data);
}

fn burns(rep: &mut ExampleReport) {
    let Some(p) = rep.result("potential", potential(2, Annulus::punctured(), "1 + 1/z")) else { return };
    let Some(c) = rep.result("construction", klsc_from_potential(&p, Normalization::canonical(), 1.0)) else { return };
    let grid = Annulus::punctured().grid(64);
    let v2 = |z: f64| (1.0 + 1.0 / z).ln().powf(2.0 / 3.0);
    rep.compare("v^2 = log^(2/3)(1+1/z)", &grid, CLOSED_FORM_TOL, |z| c.factor_squared.eval(z), v2);
    rep.compare("E = log^(2/3)(1+1/z)", &grid, CLOSED_FORM_TOL, |z| c.metric.e().eval(z), v2);
    rep.compare(
        "zF = (z+1) log^(2/3)(1+1/z)",
        &grid,
        CLOSED_FORM_TOL,
        |z| Ok(z * c.metric.f().eval(z)?),
        move |z| (z + 1.0) * v2(z),
    );
    let expect = 2.0 / 3.0 * 2f64.ln().powf(-8.0 / 3.0);
    if let Some(s) = rep.result("S(1)", riemannian_scalar(&c.metric, 1.0)) {
        rep.check(
            "S(1) = (2/3) log(2)^(-8/3)",
            (s - expect).abs() <= 1e-8 * expect,
            format!("{s:.15} vs {expect:.15}"),
        );
    }
    let sweep = rep.defect_sweep("Klsc defect", &c.metric);
    if let Ok(m) = c.metric.restrict(Annulus::new(0.01, Some(100.0)).expect("valid")) {
        rep.oracle("oracle", &m);
    }
    rep.data = json!({"S_at_1": expect, "sweep": sweep.map(|r| rows_json(&r))});
}

/// The Fubini–Study Klsc metric with `I = log z − 1/z` on `0.1 < z < 10`.
pub fn fubini_study_construction() -> Result<KlscConstruction> {
    let p = potential(2, Annulus::new(0.1, Some(10.0))?, "1/(1+z)")?;
    klsc_from_potential(&p, Normalization { basepoint: Basepoint::Finite(1.0), value: -1.0 }, 1.0)
}

fn fubini_study(rep: &mut ExampleReport) {
    let Some(c) = rep.result("construction", fubini_study_construction()) else { return };
    let grid = c.metric.domain().grid(64);
    let v2 = |z: f64| (z.ln() - 1.0 / z).abs().powf(2.0 / 3.0);
    rep.compare("v^2 = |log z - 1/z|^(2/3)", &grid, CLOSED_FORM_TOL, |z| c.factor_squared.eval(z), v2);
    let gamma = c.split.zero;
    match gamma {
        Some(g) => rep.check("gamma = 1.763", (g - 1.763).abs() <= 1e-3, format!("gamma = {g:.12}")),
        None => rep.check("gamma = 1.763", false, "no sign change found"),
    }
    rep.check("two sub-annuli", c.split.pieces.len() == 2, format!("{} pieces", c.split.pieces.len()));
    let mut sweeps = Vec::new();
    if let Some(pieces) = rep.result("restriction", c.pieces()) {
        for (i, m) in pieces.iter().enumerate() {
            if let Some(rows) = rep.defect_sweep(&format!("sub-annulus {}: Klsc defect", i + 1), m) {
                sweeps.push(json!({"annulus": crate::io::annulus_to_json(&m.domain()), "rows": rows_json(&rows)}));
            }
            rep.oracle(&format!("sub-annulus {}: oracle", i + 1), m);
        }
    }
    let inner = c.pieces().ok().and_then(|p| p.into_iter().find(|m| m.domain().contains(1.0)));
    if let Some(m) = inner {
        if let Some(s1) = rep.result("S(1)", riemannian_scalar(&m, 1.0)) {
            rep.check("S(1) = 164/3", (s1 - 164.0 / 3.0).abs() <= 1e-8 * 164.0 / 3.0, format!("{s1:.12}"));
        }
        if let Some(sc) = rep.result("S_C(1)", chern_scalar(&m, 1.0)) {
            rep.check("S_C(1) = 82/3", (sc - 82.0 / 3.0).abs() <= 1e-8 * 82.0 / 3.0, format!("{sc:.12}"));
        }
    }
    // displayed S = L^(−2/3) ((8/3)(z+1)(1+1/z)³/L + 12), L = log z + 1/z
    let displayed = |z: f64| {
        let l = z.ln() + 1.0 / z;
        l.powf(-2.0 / 3.0) * (8.0 / 3.0 * (z + 1.0) * (1.0 + 1.0 / z).powi(3) / l + 12.0)
    };
    if let Ok(pieces) = c.pieces() {
        for (m, z) in pieces.iter().zip([0.5, 4.0]) {
            if let Ok(s) = riemannian_scalar(m, z) {
                let d = displayed(z);
                rep.info(
                    format!("S against the displayed formula at z = {z}"),
                    (s - d).abs() <= 1e-8 * d.abs(),
                    format!("computed {s:.10}, displayed {d:.10}"),
                );
            }
        }
    }
    rep.data = json!({"gamma": gamma, "sub_annuli": sweeps});
}

fn z2z8(rep: &mut ExampleReport) {
    let Some(pair) =
        rep.result("pair", parse("z^2 + z^8").and_then(|f| AdmissiblePair::new(2, Annulus::punctured(), f, 0.0)))
    else {
        return;
    };
    let adm = check_admissible(&pair);
    let Some(adm) = rep.result("admissibility", adm) else { return };
    rep.check("admissible", adm.is_admissible(), format!("{adm:?}"));
    let Some(c) = rep.result("construction", build_klsc_metric(&pair)) else { return };
    let grid = Annulus::new(0.05, Some(20.0)).expect("valid").grid(32);
    let dphi = |z: f64| 81.0 * (z * z + z.powi(8)) / atan_minus_identity(1.0 / z.powi(3)).powi(2);
    rep.compare("phi' = 81(z^2+z^8)/(atan(1/z^3) - 1/z^3)^2", &grid, 1e-8, |z| c.potential.dphi().eval(z), dphi);
    if let Ok(v) = c.potential.dphi().eval(1.0) {
        let e = 162.0 / (PI / 4.0 - 1.0).powi(2);
        rep.check("phi'(1) = 162/(pi/4 - 1)^2", (v - e).abs() <= 1e-8 * e, format!("{v:.10} vs {e:.10}"));
    }
    // E-series display 9z² + 9z⁸ + 6z² Σ_m (Σ_j (−1)^j z^{6j}/(2j−1))^m through z^14
    if let Some(x) = rep.result("expansion", metric_expansion(&pair, None)) {
        let want = [(2, 9), (8, 3), (14, 8)];
        let plain = x.e.plain();
        let ok = !x.e.has_log_terms()
            && plain.iter().filter(|(e, _)| **e <= crate::asymptotics::series::int(14)).count() == 3
            && want.iter().all(|&(e, c)| {
                plain.get(&crate::asymptotics::series::int(e)) == Some(&crate::asymptotics::series::int(c))
            });
        rep.check(
            "E-series = 9z^2 + 3z^8 + 8z^14 + O(z^20)",
            ok,
            format!("{} terms below z^{}", plain.len(), x.e.truncation()),
        );
        if let Ok(cn) = pair_constant_for_series_constant(&pair, &BigRational::zero()) {
            let shifted =
                AdmissiblePair::new(2, Annulus::punctured(), pair.f.clone(), cn).and_then(|p| build_klsc_metric(&p));
            if let Some(sc) = rep.result("series-constant metric", shifted) {
                let mut worst = 0.0f64;
                for z in [1e-3, 1e-2, 1e-1] {
                    if let Ok(v) = sc.metric.e().eval(z) {
                        worst = worst.max((v - x.e.eval(z)).abs() / v.abs());
                    }
                }
                rep.check(
                    "E-series vs numeric E",
                    worst <= 1e-10,
                    format!("max relative deviation {worst:.3e} (pair constant {cn:.15})"),
                );
            }
        }
    }
    if let Some(r) = rep.result("regularity", regularity_class(&pair)) {
        rep.check(
            "class C^inf",
            r.smoothness == Smoothness::Infinity && !r.truncation_conditional,
            r.smoothness.to_string(),
        );
        rep.check(
            "quotient order 3, nonsingular",
            r.quotient.ell == Some(3) && r.quotient.nonsingular,
            format!("{:?}", r.quotient),
        );
        rep.check("log obstruction 0", r.log_obstruction.is_zero(), r.log_obstruction.to_string());
        rep.data = r.to_json();
    }
    rep.defect_sweep("Klsc defect", &c.metric);
    if let Ok(m) = c.metric.restrict(Annulus::new(0.05, Some(20.0)).expect("valid")) {
        rep.oracle("oracle", &m);
    }
}

/// `atan(x) − x` without cancellation for small `x`.
pub fn atan_minus_identity(x: f64) -> f64 {
    if x.abs() > 0.1 {
        return x.atan() - x;
    }
    let x2 = x * x;
    let mut term = x * x2;
    let mut sum = 0.0;
    for j in 1..40 {
        let k = (2 * j + 1) as f64;
        sum += if j % 2 == 1 { -term / k } else { term / k };
        term *= x2;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn zz2(rep: &mut ExampleReport) {
    let Some(pair) =
        rep.result("pair", parse("z + z^2").and_then(|f| AdmissiblePair::new(2, Annulus::punctured(), f, 0.0)))
    else {
        return;
    };
    let Some(adm) = rep.result("admissibility", check_admissible(&pair)) else { return };
    rep.check("admissible", adm.is_admissible(), format!("{adm:?}"));
    let Some(c) = rep.result("construction", build_klsc_metric(&pair)) else { return };
    let d = |z: f64| 1.0 - 2.0 * z + 2.0 * z * z * (1.0 + 1.0 / z).ln();
    let grid = Annulus::new(0.05, Some(20.0)).expect("valid").grid(32);
    rep.compare(
        "E = 2z + 3z^2 + 4z/D",
        &grid,
        1e-8,
        |z| c.metric.e().eval(z),
        move |z| 2.0 * z + 3.0 * z * z + 4.0 * z / d(z),
    );
    if let Ok(e1) = c.metric.e().eval(1.0) {
        let want = 5.0 + 4.0 / (2.0 * 2f64.ln() - 1.0);
        rep.check("E(1) = 5 + 4/(2 log 2 - 1)", (e1 - want).abs() <= 1e-8 * want, format!("{e1:.12}"));
    }
    rep.compare(
        "phi' = 36(z^5+z^6)/D^2",
        &grid,
        1e-8,
        |z| c.potential.dphi().eval(z),
        move |z| 36.0 * (z.powi(5) + z.powi(6)) / d(z).powi(2),
    );
    if let Ok(v) = c.potential.dphi().eval(1.0) {
        let displayed = 36.0 * 2.0 / d(1.0).powi(2);
        rep.info(
            "phi' against the displayed 36(z^3+z^4)/D^2",
            (v - displayed).abs() <= 1e-8 * displayed,
            format!("agrees only at z = 1 ({v:.10} vs {displayed:.10}); differs by z^2 elsewhere"),
        );
    }
    if let Some(r) = rep.result("regularity", regularity_class(&pair)) {
        rep.check("class C^1", r.smoothness == Smoothness::Finite(1), r.smoothness.to_string());
        rep.check(
            "log obstruction 2",
            r.log_obstruction == crate::asymptotics::series::int(2),
            r.log_obstruction.to_string(),
        );
        rep.data = r.to_json();
    }
    rep.defect_sweep("Klsc defect", &c.metric);
    if let Ok(m) = c.metric.restrict(Annulus::new(0.05, Some(20.0)).expect("valid")) {
        rep.oracle("oracle", &m);
    }
}

pub fn run_example(example: Example) -> ExampleReport {
    let mut rep = ExampleReport { example, checks: Vec::new(), data: Value::Null };
    match example {
        Example::Flat => flat(&mut rep),
        Example::Burns => burns(&mut rep),
        Example::FubiniStudy => fubini_study(&mut rep),
        Example::Z2Z8 => z2z8(&mut rep),
        Example::ZZ2 => zz2(&mut rep),
    }
    rep
}

pub fn examples_suite() -> Vec<ExampleReport> {
    Example::ALL.into_iter().map(run_example).collect()
}

pub fn report_json(reports: &[ExampleReport]) -> Value {
    json!({
        "passed": reports.iter().all(ExampleReport::passed),
        "examples": reports.iter().map(|r| json!({
            "name": r.example.name(),
            "passed": r.passed(),
            "checks": r.checks.iter().map(|c| json!({
                "name": c.name,
                "passed": c.passed,
                "informational": c.informational,
                "detail": c.detail,
            })).collect::<Vec<_>>(),
            "data": r.data,
        })).collect::<Vec<_>>(),
    })
}

pub fn report_text(reports: &[ExampleReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&format!("== {} ==\n", r.example.name()));
        for c in &r.checks {
            let tag = match (c.passed, c.informational) {
                (true, false) => "PASS",
                (false, false) => "FAIL",
                (true, true) => "INFO",
                (false, true) => "NOTE",
            };
            out.push_str(&format!("  [{tag}] {}: {}\n", c.name, c.detail));
        }
        if let Some(g) = r.data.get("gamma").and_then(Value::as_f64) {
            out.push_str(&format!("  gamma = {g:.12}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Example::ALL {
            assert_eq!(Example::from_name(e.name()), Some(e));
        }
        assert_eq!(Example::from_name("nope"), None);
    }

    #[test]
    fn atan_series_matches_direct_form() {
        for x in [0.09, 0.05, 0.01] {
            let direct = f64::atan(x) - x;
            // the direct form carries a rounding error of order eps·x
            assert!((atan_minus_identity(x) - direct).abs() <= 4.0 * f64::EPSILON * x);
        }
        // −x³/3 + x⁵/5 − x⁷/7 at x = 1e−3
        let x: f64 = 1e-3;
        let want = -x.powi(3) / 3.0 + x.powi(5) / 5.0 - x.powi(7) / 7.0;
        assert!((atan_minus_identity(x) - want).abs() <= 1e-15 * want.abs());
    }

    #[test]
    fn burns_example_passes() {
        let r = run_example(Example::Burns);
        assert!(r.passed(), "{}", report_text(std::slice::from_ref(&r)));
    }
}
