//! Annuli, radial functions and antiderivatives.

use serde::{Deserialize, Serialize};

use crate::error::{KlscError, Result};
use crate::expr::{Expr, Primitive};
use crate::quadrature::{integrate, Endpoint, QuadConfig};

/// `{alpha < z < beta}` in the squared-radius variable; `beta = None` is infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    alpha: f64,
    beta: Option<f64>,
}

pub const VERIFICATION_GRID: usize = 512;
const GRID_INSET: f64 = 1e-6;

impl Annulus {
    pub fn new(alpha: f64, beta: Option<f64>) -> Result<Self> {
        let ok = alpha.is_finite() && alpha >= 0.0 && beta.is_none_or(|b| b.is_finite() && b > alpha);
        if !ok {
            return Err(KlscError::InvalidInput(format!(
                "annulus needs 0 <= alpha < beta <= inf, got ({alpha}, {beta:?})"
            )));
        }
        Ok(Annulus { alpha, beta })
    }

    pub fn punctured() -> Self {
        Annulus { alpha: 0.0, beta: None }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn beta_endpoint(&self) -> Endpoint {
        self.beta.map_or(Endpoint::Infinity, Endpoint::Finite)
    }

    pub fn contains(&self, z: f64) -> bool {
        z > self.alpha && self.beta.is_none_or(|b| z < b)
    }

    /// Midpoint in the logarithmic scale (with the obvious conventions
    /// when an edge is 0 or infinity).
    pub fn midpoint(&self) -> f64 {
        match (self.alpha > 0.0, self.beta) {
            (true, Some(b)) => (self.alpha * b).sqrt(),
            (false, Some(b)) => 0.5 * b,
            (true, None) => 2.0 * self.alpha,
            (false, None) => 1.0,
        }
    }

    /// Chebyshev-distributed points in log z (or in t = z/(1+z) when the
    /// annulus is unbounded), inset from both edges, ascending.
    pub fn grid(&self, count: usize) -> Vec<f64> {
        let count = count.max(1);
        let cheb = |lo: f64, hi: f64| -> Vec<f64> {
            let mut v: Vec<f64> = (0..count)
                .map(|j| {
                    let x = (std::f64::consts::PI * (2 * j + 1) as f64 / (2 * count) as f64).cos();
                    0.5 * (lo + hi) + 0.5 * (hi - lo) * x
                })
                .collect();
            v.reverse();
            v
        };
        match self.beta {
            Some(b) => {
                let d = GRID_INSET * (b - self.alpha);
                cheb((self.alpha + d).ln(), (b - d).ln()).into_iter().map(f64::exp).collect()
            }
            None => {
                let ta = self.alpha / (1.0 + self.alpha);
                let d = GRID_INSET * (1.0 - ta);
                cheb(ta + d, 1.0 - d).into_iter().map(|t| t / (1.0 - t)).collect()
            }
        }
    }

    pub fn verification_grid(&self) -> Vec<f64> {
        self.grid(VERIFICATION_GRID)
    }

    /// Split at an interior point.
    pub fn split(&self, at: f64) -> Result<(Annulus, Annulus)> {
        if !self.contains(at) {
            return Err(KlscError::InvalidInput(format!("{at} is not interior")));
        }
        Ok((Annulus { alpha: self.alpha, beta: Some(at) }, Annulus { alpha: at, beta: self.beta }))
    }
}

/// A real-valued function of z paired with its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    expr: Expr,
    domain: Annulus,
}

impl RadialFunction {
    pub fn new(expr: Expr, domain: Annulus) -> Self {
        RadialFunction { expr, domain }
    }

    pub fn parse(src: &str, domain: Annulus) -> Result<Self> {
        Ok(RadialFunction::new(crate::expr::parse(src)?, domain))
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn domain(&self) -> Annulus {
        self.domain
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        if !self.domain.contains(z) {
            return Err(KlscError::Domain(format!("z = {z} outside the annulus")));
        }
        self.expr.eval(z)
    }

    pub fn derivative(&self) -> RadialFunction {
        RadialFunction::new(self.expr.derivative(), self.domain)
    }
}

/// Where an antiderivative is anchored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basepoint {
    Finite(f64),
    Infinity,
    /// The outer edge if the improper integral converges there,
    /// otherwise the logarithmic midpoint.
    Canonical,
}

/// Antiderivative normalisation: the value taken at the basepoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub basepoint: Basepoint,
    pub value: f64,
}

impl Normalization {
    pub fn canonical() -> Self {
        Normalization { basepoint: Basepoint::Canonical, value: 0.0 }
    }

    pub fn at(basepoint: Basepoint) -> Self {
        Normalization { basepoint, value: 0.0 }
    }
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization::canonical()
    }
}

/// Resolve a basepoint for integrating `integrand` over `domain`.
pub fn resolve_basepoint(integrand: &Expr, domain: Annulus, bp: Basepoint) -> Result<Endpoint> {
    match bp {
        Basepoint::Finite(b) => {
            let inside = b >= domain.alpha() && domain.beta().is_none_or(|e| b <= e);
            if !inside || !b.is_finite() {
                return Err(KlscError::InvalidInput(format!("basepoint {b} outside the closed annulus")));
            }
            Ok(Endpoint::Finite(b))
        }
        Basepoint::Infinity => {
            if domain.beta().is_some() {
                return Err(KlscError::InvalidInput("basepoint at infinity on a bounded annulus".into()));
            }
            Ok(Endpoint::Infinity)
        }
        Basepoint::Canonical => {
            let edge = domain.beta_endpoint();
            let mid = domain.midpoint();
            match integrate(|x| integrand.eval(x), Endpoint::Finite(mid), edge, &QuadConfig::antiderivative()) {
                Ok(_) => Ok(edge),
                Err(KlscError::DivergentIntegral(_)) | Err(KlscError::ToleranceNotMet { .. }) => {
                    Ok(Endpoint::Finite(mid))
                }
                Err(e) => Err(e),
            }
        }
    }
}

/// The antiderivative of `integrand` as an expression node.
pub fn primitive_expr(integrand: Expr, domain: Annulus, norm: Normalization) -> Result<Expr> {
    let ep = resolve_basepoint(&integrand, domain, norm.basepoint)?;
    Ok(Expr::integral(Primitive::new(integrand, ep, norm.value)))
}

/// `∫_basepoint^z f` by adaptive quadrature.
pub fn antiderivative(f: &RadialFunction, basepoint: Basepoint, z: f64) -> Result<f64> {
    let closed = z >= f.domain.alpha() && f.domain.beta().is_none_or(|b| z <= b);
    if !closed {
        return Err(KlscError::Domain(format!("z = {z} outside the annulus")));
    }
    let ep = resolve_basepoint(f.expr(), f.domain(), basepoint)?;
    integrate(|x| f.expr().eval(x), ep, Endpoint::Finite(z), &QuadConfig::antiderivative())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burns_antiderivative_from_infinity() {
        let f = RadialFunction::parse("1/(z*(z+1))", Annulus::punctured()).unwrap();
        let v = antiderivative(&f, Basepoint::Infinity, 1.0).unwrap();
        assert!((v + 2f64.ln()).abs() < 1e-10);
        let c = antiderivative(&f, Basepoint::Canonical, 1.0).unwrap();
        assert!((c + 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn canonical_falls_back_to_midpoint() {
        let f = RadialFunction::parse("1/z", Annulus::punctured()).unwrap();
        let v = antiderivative(&f, Basepoint::Canonical, 2.0).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn zero_basepoint_integrable_singularity() {
        let f = RadialFunction::parse("z^(-1/2)", Annulus::new(0.0, Some(4.0)).unwrap()).unwrap();
        let v = antiderivative(&f, Basepoint::Finite(0.0), 4.0).unwrap();
        assert!((v - 4.0).abs() < 1e-9);
    }

    #[test]
    fn grid_is_interior_and_sorted() {
        for a in [Annulus::new(0.1, Some(10.0)).unwrap(), Annulus::punctured(), Annulus::new(1.0, None).unwrap()] {
            let g = a.verification_grid();
            assert_eq!(g.len(), 512);
            assert!(g.windows(2).all(|w| w[0] < w[1]));
            assert!(g.iter().all(|&z| a.contains(z)));
        }
    }

    #[test]
    fn rejects_bad_annuli() {
        assert!(Annulus::new(2.0, Some(1.0)).is_err());
        assert!(Annulus::new(-1.0, None).is_err());
    }
}
