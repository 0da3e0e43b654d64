//! U(n)-invariant Hermitian metrics `E((d√z)² + z h) + zF g_CP`.

use std::sync::{Arc, OnceLock};

use nalgebra::{Complex, DMatrix};

use crate::error::{KlscError, Result};
use crate::expr::Expr;
use crate::radial::{primitive_expr, Annulus, Basepoint, Normalization};

/// Values of E, F and their first two z-derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub z: f64,
    pub e: f64,
    pub de: f64,
    pub d2e: f64,
    pub f: f64,
    pub df: f64,
    pub d2f: f64,
}

#[derive(Debug)]
struct Derivs {
    de: Expr,
    d2e: Expr,
    df: Expr,
    d2f: Expr,
}

#[derive(Debug, Clone)]
pub struct HermitianMetricRadial {
    n: usize,
    domain: Annulus,
    e: Expr,
    f: Expr,
    derivs: Arc<OnceLock<Derivs>>,
    split: Arc<OnceLock<ConformalKahlerSplit>>,
}

impl HermitianMetricRadial {
    /// Validates `n >= 2` and positivity of E and F on the verification grid.
    pub fn new(n: usize, domain: Annulus, e: Expr, f: Expr) -> Result<Self> {
        let m = Self::new_unchecked(n, domain, e, f)?;
        for z in domain.verification_grid() {
            let (e, f) = (m.e.eval(z)?, m.f.eval(z)?);
            if !(e > 0.0 && f > 0.0) {
                return Err(KlscError::DegenerateMetric { z });
            }
        }
        Ok(m)
    }

    pub fn new_unchecked(n: usize, domain: Annulus, e: Expr, f: Expr) -> Result<Self> {
        if n < 2 {
            return Err(KlscError::InvalidInput(format!("dimension n = {n} must be at least 2")));
        }
        Ok(HermitianMetricRadial {
            n,
            domain,
            e,
            f,
            derivs: Arc::new(OnceLock::new()),
            split: Arc::new(OnceLock::new()),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> Annulus {
        self.domain
    }

    pub fn e(&self) -> &Expr {
        &self.e
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    /// Same component functions on a sub-annulus.
    pub fn restrict(&self, domain: Annulus) -> Result<Self> {
        HermitianMetricRadial::new(self.n, domain, self.e.clone(), self.f.clone())
    }

    fn derivs(&self) -> &Derivs {
        self.derivs.get_or_init(|| {
            let de = self.e.derivative();
            let df = self.f.derivative();
            Derivs { d2e: de.derivative(), d2f: df.derivative(), de, df }
        })
    }

    pub fn jet(&self, z: f64) -> Result<Jet> {
        if !self.domain.contains(z) {
            return Err(KlscError::Domain(format!("z = {z} outside the annulus")));
        }
        let d = self.derivs();
        let j = Jet {
            z,
            e: self.e.eval(z)?,
            de: d.de.eval(z)?,
            d2e: d.d2e.eval(z)?,
            f: self.f.eval(z)?,
            df: d.df.eval(z)?,
            d2f: d.d2f.eval(z)?,
        };
        if !(j.e > 0.0 && j.f > 0.0) {
            return Err(KlscError::DegenerateMetric { z });
        }
        Ok(j)
    }

    /// `(E(z), F(z))` without derivatives or domain check.
    pub fn components(&self, z: f64) -> Result<(f64, f64)> {
        Ok((self.e.eval(z)?, self.f.eval(z)?))
    }

    /// Hermitian matrix `g_{i j̄} = F δ_ij + (E−F)/z · conj(z_i) z_j`.
    pub fn ambient_components(&self, point: &[Complex<f64>]) -> Result<DMatrix<Complex<f64>>> {
        if point.len() != self.n {
            return Err(KlscError::InvalidInput(format!("point has {} coordinates, expected {}", point.len(), self.n)));
        }
        let z: f64 = point.iter().map(|c| c.norm_sqr()).sum();
        let (e, f) = self.components(z)?;
        let k = (e - f) / z;
        Ok(DMatrix::from_fn(self.n, self.n, |i, j| {
            let d = if i == j { f } else { 0.0 };
            Complex::new(d, 0.0) + point[i].conj() * point[j] * k
        }))
    }

    /// Cached decomposition into a conformal factor times a Kähler metric.
    pub fn conformal_split(&self) -> Result<&ConformalKahlerSplit> {
        if let Some(s) = self.split.get() {
            return Ok(s);
        }
        let s = conformal_to_kahler(self)?;
        Ok(self.split.get_or_init(|| s))
    }
}

/// φ′ of a U(n)-invariant Kähler potential.
#[derive(Debug, Clone)]
pub struct KahlerPotentialDeriv {
    n: usize,
    domain: Annulus,
    dphi: Expr,
    ddphi: Arc<OnceLock<(Expr, Expr)>>,
}

impl KahlerPotentialDeriv {
    /// Validates φ′ > 0 and (zφ′)′ > 0 on the verification grid.
    pub fn new(n: usize, domain: Annulus, dphi: Expr) -> Result<Self> {
        let p = Self::new_unchecked(n, domain, dphi)?;
        for z in domain.verification_grid() {
            let (d1, e) = (p.dphi.eval(z)?, p.e_at(z)?);
            if !(d1 > 0.0) {
                return Err(KlscError::NotKahler(format!("phi' = {d1} <= 0 at z = {z}")));
            }
            if !(e > 0.0) {
                return Err(KlscError::NotKahler(format!("(z phi')' = {e} <= 0 at z = {z}")));
            }
        }
        Ok(p)
    }

    pub fn new_unchecked(n: usize, domain: Annulus, dphi: Expr) -> Result<Self> {
        if n < 2 {
            return Err(KlscError::InvalidInput(format!("dimension n = {n} must be at least 2")));
        }
        Ok(KahlerPotentialDeriv { n, domain, dphi, ddphi: Arc::new(OnceLock::new()) })
    }

    /// From a potential φ by symbolic differentiation.
    pub fn from_potential(n: usize, domain: Annulus, phi: &Expr) -> Result<Self> {
        Self::new(n, domain, phi.derivative())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> Annulus {
        self.domain
    }

    pub fn dphi(&self) -> &Expr {
        &self.dphi
    }

    fn second(&self) -> &(Expr, Expr) {
        self.ddphi.get_or_init(|| {
            let d2 = self.dphi.derivative();
            let d3 = d2.derivative();
            (d2, d3)
        })
    }

    /// `(zφ′)′`
    pub fn e_expr(&self) -> Expr {
        self.dphi.add(&Expr::z().mul(&self.second().0))
    }

    fn e_at(&self, z: f64) -> Result<f64> {
        Ok(self.dphi.eval(z)? + z * self.second().0.eval(z)?)
    }

    /// `(φ′, φ″, φ‴)` at z.
    pub fn derivatives(&self, z: f64) -> Result<(f64, f64, f64)> {
        let (d2, d3) = self.second();
        Ok((self.dphi.eval(z)?, d2.eval(z)?, d3.eval(z)?))
    }
}

/// `E = (zφ′)′`, `F = φ′`.
pub fn metric_from_potential(p: &KahlerPotentialDeriv) -> HermitianMetricRadial {
    HermitianMetricRadial::new_unchecked(p.n, p.domain, p.e_expr(), p.dphi.clone())
        .expect("dimension already validated")
}

/// Whether `E = (zF)′` holds on the verification grid within `tol` (relative).
pub fn is_kahler(m: &HermitianMetricRadial, tol: f64) -> Result<bool> {
    let zf_prime = m.f.add(&Expr::z().mul(&m.f.derivative()));
    for z in m.domain.verification_grid() {
        let e = m.e.eval(z)?;
        let k = zf_prime.eval(z)?;
        if (e - k).abs() > tol * e.abs().max(k.abs()).max(f64::MIN_POSITIVE) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Metric = exp(log_factor) · (Kähler metric of `kahler`).
#[derive(Debug, Clone)]
pub struct ConformalKahlerSplit {
    pub log_factor: Expr,
    pub kahler: KahlerPotentialDeriv,
    /// d/dz and d²/dz² of the log-factor.
    pub log_factor_derivs: (Expr, Expr),
    pub kahler_metric: HermitianMetricRadial,
}

const SPLIT_CHECK_POINTS: usize = 64;
const SPLIT_TOL: f64 = 1e-8;

/// Every U(n)-invariant Hermitian metric is conformally Kähler.
/// The log-factor vanishes at the logarithmic midpoint of the annulus.
const KAHLER_ROUNDING: f64 = 1e-13;

pub fn conformal_to_kahler(m: &HermitianMetricRadial) -> Result<ConformalKahlerSplit> {
    let z = Expr::z();
    let zf = z.mul(&m.f);
    let zf_prime = zf.derivative();
    let mid = m.domain.midpoint();
    let norm = Normalization { basepoint: Basepoint::Finite(mid), value: 0.0 };
    // an integrand that is pure rounding noise has no reliable relative accuracy
    let mut kahler_to_rounding = true;
    for x in m.domain.verification_grid() {
        let (a, b) = (zf_prime.eval(x)?, m.e.eval(x)?);
        if (a - b).abs() > KAHLER_ROUNDING * (a.abs() + b.abs()) {
            kahler_to_rounding = false;
            break;
        }
    }
    let log_factor =
        if kahler_to_rounding { Expr::int(0) } else { primitive_expr(zf_prime.sub(&m.e).div(&zf), m.domain, norm)? };
    let psi = primitive_expr(m.e.sub(&m.f).div(&zf), m.domain, norm)?;
    let f_mid = m.f.eval(mid)?;
    let dphi = Expr::constant(f_mid).mul(&psi.exp());
    let kahler = KahlerPotentialDeriv::new_unchecked(m.n, m.domain, dphi)?;
    let e_k = kahler.e_expr();
    for zz in m.domain.grid(SPLIT_CHECK_POINTS) {
        let w = log_factor.eval(zz)?.exp();
        let (e, f) = m.components(zz)?;
        let (ke, kf) = (e_k.eval(zz)?, kahler.dphi.eval(zz)?);
        if !(kf > 0.0 && ke > 0.0) {
            return Err(KlscError::NotKahler(format!("recovered Kahler metric degenerates at z = {zz}")));
        }
        if (w * ke - e).abs() > SPLIT_TOL * e.abs() || (w * kf - f).abs() > SPLIT_TOL * f.abs() {
            return Err(KlscError::NotKahler(format!("decomposition check failed at z = {zz}")));
        }
    }
    let w1 = log_factor.derivative();
    let w2 = w1.derivative();
    let kahler_metric = metric_from_potential(&kahler);
    Ok(ConformalKahlerSplit { log_factor, kahler, log_factor_derivs: (w1, w2), kahler_metric })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn fs() -> KahlerPotentialDeriv {
        KahlerPotentialDeriv::new(2, Annulus::punctured(), parse("1/(1+z)").unwrap()).unwrap()
    }

    #[test]
    fn potential_metric_is_kahler() {
        let m = metric_from_potential(&fs());
        assert!(is_kahler(&m, 1e-12).unwrap());
        let j = m.jet(1.0).unwrap();
        assert!((j.e - 0.25).abs() < 1e-15 && (j.f - 0.5).abs() < 1e-15);
    }

    #[test]
    fn invalid_potentials_rejected() {
        let r = KahlerPotentialDeriv::new(2, Annulus::punctured(), parse("-1/(1+z)").unwrap());
        assert!(matches!(r, Err(KlscError::NotKahler(_))));
        let r = KahlerPotentialDeriv::new(2, Annulus::new(0.5, Some(4.0)).unwrap(), parse("exp(-z)").unwrap());
        assert!(matches!(r, Err(KlscError::NotKahler(_))));
    }

    #[test]
    fn ambient_components_on_axis() {
        let m =
            HermitianMetricRadial::new(3, Annulus::punctured(), parse("2+z").unwrap(), parse("1").unwrap()).unwrap();
        let p = [Complex::new(2.0, 0.0), Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)];
        let g = m.ambient_components(&p).unwrap();
        assert!((g[(0, 0)].re - 6.0).abs() < 1e-14);
        assert!((g[(1, 1)].re - 1.0).abs() < 1e-14 && g[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn conformal_split_of_a_scaled_kahler_metric() {
        // g = (1+z) · g_FS
        let e = parse("(1+z)/(1+z)^2").unwrap();
        let f = parse("(1+z)/(1+z)").unwrap();
        let m = HermitianMetricRadial::new(2, Annulus::new(0.1, Some(10.0)).unwrap(), e, f).unwrap();
        let s = conformal_to_kahler(&m).unwrap();
        for z in [0.2, 1.0, 5.0] {
            let w = s.log_factor.eval(z).unwrap();
            let mid = m.domain().midpoint();
            assert!((w - ((1.0 + z) / (1.0 + mid)).ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn degenerate_metric_rejected() {
        let r = HermitianMetricRadial::new(
            2,
            Annulus::new(0.5, Some(2.0)).unwrap(),
            parse("z-1").unwrap(),
            parse("1").unwrap(),
        );
        assert!(matches!(r, Err(KlscError::DegenerateMetric { .. })));
    }
}
