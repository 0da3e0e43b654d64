//! Adaptive Gauss-Kronrod (7-point Gauss / 21-point Kronrod nodes of the
//! 10/21 pair) with geometric splitting for improper ends.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{KlscError, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208067793065,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// One end of an integration range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    Finite(f64),
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subintervals: usize,
    pub max_pieces: usize,
}

static TOL_OVERRIDE: AtomicU64 = AtomicU64::new(0);

/// Global relative tolerance override (used by the CLI for `KLSC_QUAD_TOL`).
pub fn set_tolerance_override(rel: Option<f64>) {
    let bits = match rel {
        Some(r) if r.is_finite() && r > 0.0 => r.to_bits(),
        _ => 0,
    };
    TOL_OVERRIDE.store(bits, Ordering::SeqCst);
}

pub fn tolerance_override() -> Option<f64> {
    match TOL_OVERRIDE.load(Ordering::SeqCst) {
        0 => None,
        b => Some(f64::from_bits(b)),
    }
}

impl QuadConfig {
    /// Default for user-facing antiderivatives.
    pub fn antiderivative() -> Self {
        QuadConfig {
            rel_tol: tolerance_override().unwrap_or(1e-10),
            abs_tol: 1e-12,
            max_subintervals: 2000,
            max_pieces: 4000,
        }
    }

    /// Tighter default for antiderivatives embedded inside expressions.
    pub fn primitive() -> Self {
        QuadConfig {
            rel_tol: tolerance_override().map(|t| t.min(1e-12)).unwrap_or(1e-13),
            abs_tol: 1e-300,
            max_subintervals: 2000,
            max_pieces: 4000,
        }
    }

    fn accept(&self, err: f64, value: f64) -> bool {
        err <= self.abs_tol.max(self.rel_tol * value.abs())
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    abs: f64,
}

fn gk21<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<Segment> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut resk = fc * WGK[10];
    let mut resabs = resk.abs();
    let mut resg = 0.0;
    for j in 0..10 {
        let x = h * XGK[j];
        let f1 = f(c - x)?;
        let f2 = f(c + x)?;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let value = resk * h;
    let err = ((resk - resg) * h).abs();
    if !value.is_finite() {
        return Err(KlscError::Domain(format!("non-finite integrand on [{a}, {b}]")));
    }
    Ok(Segment { a, b, value, err, abs: resabs * h.abs() })
}

/// Adaptive bisection on a finite interval.
fn adaptive<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64, cfg: &QuadConfig) -> Result<(f64, f64)> {
    let mut segs = vec![gk21(f, a, b)?];
    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.err).sum();
        let abs: f64 = segs.iter().map(|s| s.abs).sum();
        if cfg.accept(err, total) || err <= 50.0 * f64::EPSILON * abs {
            return Ok((total, err));
        }
        if segs.len() >= cfg.max_subintervals {
            return Err(KlscError::ToleranceNotMet {
                achieved: err,
                requested: cfg.abs_tol.max(cfg.rel_tol * total.abs()),
            });
        }
        let (idx, _) = segs.iter().enumerate().max_by(|x, y| x.1.err.total_cmp(&y.1.err)).expect("non-empty");
        let s = segs.swap_remove(idx);
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            return Err(KlscError::ToleranceNotMet {
                achieved: err,
                requested: cfg.abs_tol.max(cfg.rel_tol * total.abs()),
            });
        }
        segs.push(gk21(f, s.a, m)?);
        segs.push(gk21(f, m, s.b)?);
    }
}

/// Sum of pieces over geometrically growing (`up`) or shrinking intervals
/// starting at `start`, stopped once the geometric tail estimate is small.
fn tail<F: FnMut(f64) -> Result<f64>>(f: &mut F, start: f64, up: bool, cfg: &QuadConfig) -> Result<f64> {
    let mut sum: f64 = 0.0;
    let mut prev: Option<f64> = None;
    let mut ratios: Vec<f64> = Vec::new();
    let mut lo = start;
    for j in 0..cfg.max_pieces {
        let hi = if up { lo * 2.0 } else { lo * 0.5 };
        if !hi.is_finite() || !(1e-300..=1e300).contains(&hi) {
            return Err(KlscError::ToleranceNotMet {
                achieved: prev.unwrap_or(f64::INFINITY).abs(),
                requested: cfg.rel_tol * sum.abs(),
            });
        }
        let (a, b) = if up { (lo, hi) } else { (hi, lo) };
        let (p, _) = adaptive(f, a, b, cfg)?;
        sum += p;
        if let Some(q) = prev {
            if p == 0.0 && q == 0.0 {
                return Ok(sum);
            }
            let rho = if q == 0.0 { f64::INFINITY } else { (p / q).abs() };
            ratios.push(rho);
            let n = ratios.len();
            if n >= 3 && ratios[n - 1] < 1.0 && ratios[n - 2] < 1.0 {
                let r = ratios[n - 1].max(ratios[n - 2]);
                let est = p.abs() * r / (1.0 - r);
                if est <= 0.1 * cfg.abs_tol.max(cfg.rel_tol * sum.abs()) {
                    return Ok(sum);
                }
            }
            if j >= 40 && n >= 12 && ratios[n - 12..].iter().all(|&r| r >= 0.999) {
                return Err(KlscError::DivergentIntegral(format!(
                    "pieces do not decay {} from {start}",
                    if up { "toward infinity" } else { "toward zero" }
                )));
            }
        }
        prev = Some(p);
        lo = hi;
    }
    Err(KlscError::ToleranceNotMet {
        achieved: prev.unwrap_or(f64::INFINITY).abs(),
        requested: cfg.rel_tol * sum.abs(),
    })
}

fn finite_range<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    debug_assert!(a < b);
    if a == 0.0 {
        return tail(f, b, false, cfg);
    }
    if a > 0.0 && b / a > 16.0 {
        let mut sum = 0.0;
        let mut lo = a;
        while lo < b {
            let hi = (lo * 2.0).min(b);
            sum += adaptive(f, lo, hi, cfg)?.0;
            lo = hi;
        }
        return Ok(sum);
    }
    Ok(adaptive(f, a, b, cfg)?.0)
}

/// Integral of `f` from `from` to `to`, with the orientation sign.
pub fn integrate<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    from: Endpoint,
    to: Endpoint,
    cfg: &QuadConfig,
) -> Result<f64> {
    match (from, to) {
        (Endpoint::Infinity, Endpoint::Infinity) => Ok(0.0),
        (Endpoint::Infinity, Endpoint::Finite(b)) => {
            integrate(f, Endpoint::Finite(b), Endpoint::Infinity, cfg).map(|v| -v)
        }
        (Endpoint::Finite(a), Endpoint::Infinity) => {
            if a < 0.0 || !a.is_finite() {
                return Err(KlscError::Domain(format!(
                    "improper range must start at a finite non-negative point, got {a}"
                )));
            }
            if a == 0.0 {
                Ok(tail(&mut f, 1.0, false, cfg)? + tail(&mut f, 1.0, true, cfg)?)
            } else {
                tail(&mut f, a, true, cfg)
            }
        }
        (Endpoint::Finite(a), Endpoint::Finite(b)) => {
            if !a.is_finite() || !b.is_finite() {
                return Err(KlscError::Domain("non-finite integration limit".into()));
            }
            if a == b {
                Ok(0.0)
            } else if a < b {
                finite_range(&mut f, a, b, cfg)
            } else {
                finite_range(&mut f, b, a, cfg).map(|v| -v)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadConfig {
        QuadConfig::primitive()
    }

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| Ok(x * x * x), Endpoint::Finite(1.0), Endpoint::Finite(3.0), &cfg()).unwrap();
        assert!((v - 20.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_orientation() {
        let v = integrate(|x| Ok(x.exp()), Endpoint::Finite(1.0), Endpoint::Finite(0.5), &cfg()).unwrap();
        assert!((v - (0.5f64.exp() - 1f64.exp())).abs() < 1e-13);
    }

    #[test]
    fn tail_to_infinity() {
        let v = integrate(|x| Ok(1.0 / (1.0 + x * x)), Endpoint::Finite(1.0), Endpoint::Infinity, &cfg()).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-12, "{v}");
        let w = integrate(|x| Ok(x.powf(-4.0 / 3.0)), Endpoint::Infinity, Endpoint::Finite(2.0), &cfg()).unwrap();
        assert!((w + 3.0 * 2f64.powf(-1.0 / 3.0)).abs() < 1e-10, "{w}");
    }

    #[test]
    fn singular_at_zero() {
        let v = integrate(|x| Ok(x.powf(-0.5)), Endpoint::Finite(0.0), Endpoint::Finite(4.0), &cfg()).unwrap();
        assert!((v - 4.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn log_divergence_detected() {
        let r = integrate(|x| Ok(1.0 / x), Endpoint::Finite(1.0), Endpoint::Infinity, &cfg());
        assert!(matches!(r, Err(KlscError::DivergentIntegral(_))), "{r:?}");
        let r = integrate(|x| Ok(1.0 / (x * x)), Endpoint::Finite(0.0), Endpoint::Finite(1.0), &cfg());
        assert!(r.is_err());
    }

    #[test]
    fn wide_range_is_split() {
        let v = integrate(|x| Ok(1.0 / x), Endpoint::Finite(1e-3), Endpoint::Finite(1e3), &cfg()).unwrap();
        assert!((v - 2.0 * 1e3f64.ln()).abs() < 1e-11);
    }
}
