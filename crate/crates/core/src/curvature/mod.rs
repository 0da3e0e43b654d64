//! Scalar curvatures of U(n)-invariant Hermitian metrics.
//!
//! Convention: `g_{i j̄} = g(∂_i, ∂_j̄)`, so the underlying Riemannian metric
//! is twice the real part of the Hermitian matrix and `S = 2 S_C` for
//! Kähler metrics.

pub mod fd_oracle;

use crate::error::{KlscError, Result};
use crate::expr::Expr;
use crate::geometry::{HermitianMetricRadial, Jet, KahlerPotentialDeriv};

/// First and second derivatives of `L = log(E F^(n-1))`.
fn log_det_derivs(j: &Jet, n: usize) -> (f64, f64) {
    let m = (n - 1) as f64;
    let (re, rf) = (j.de / j.e, j.df / j.f);
    let l1 = re + m * rf;
    let l2 = j.d2e / j.e - re * re + m * (j.d2f / j.f - rf * rf);
    (l1, l2)
}

fn chern_from_jet(j: &Jet, n: usize) -> f64 {
    let (l1, l2) = log_det_derivs(j, n);
    -((l1 + j.z * l2) / j.e + (n - 1) as f64 * l1 / j.f)
}

/// Chern scalar curvature `S_C = -[(zL′)′/E + (n−1)L′/F]`.
pub fn chern_scalar(m: &HermitianMetricRadial, z: f64) -> Result<f64> {
    Ok(chern_from_jet(&m.jet(z)?, m.n()))
}

/// `(u, u′/u, u″/u)`
fn log_derivs(u: &Expr, z: f64) -> Result<(f64, f64, f64)> {
    let d1 = u.derivative();
    let d2 = d1.derivative();
    let v = u.eval(z)?;
    if !(v > 0.0) {
        return Err(KlscError::NonPositiveConformalFactor { z });
    }
    Ok((v, d1.eval(z)? / v, d2.eval(z)? / v))
}

/// `Δu/u` for the Kähler Laplacian `Δu = 2[(z u′)′/(zφ′)′ + (n−1) u′/φ′]`.
fn laplacian_ratio(p: &KahlerPotentialDeriv, l1: f64, l2: f64, z: f64) -> Result<f64> {
    let (d1, d2, _) = p.derivatives(z)?;
    let e = d1 + z * d2;
    Ok(2.0 * ((l1 + z * l2) / e + (p.n() - 1) as f64 * l1 / d1))
}

pub fn kahler_laplacian(p: &KahlerPotentialDeriv, u: &Expr, z: f64) -> Result<f64> {
    let d1 = u.derivative();
    let d2 = d1.derivative();
    let (u1, u2) = (d1.eval(z)?, d2.eval(z)?);
    let (p1, p2, _) = p.derivatives(z)?;
    let e = p1 + z * p2;
    Ok(2.0 * ((u1 + z * u2) / e + (p.n() - 1) as f64 * u1 / p1))
}

/// Scalar curvature of `u^(2/(n−1)) g` given the scalar curvature `s_base` of `g`.
pub fn riemannian_conformal(s_base: f64, p: &KahlerPotentialDeriv, u: &Expr, z: f64) -> Result<f64> {
    let (v, l1, l2) = log_derivs(u, z)?;
    let n = p.n() as f64;
    let lap = laplacian_ratio(p, l1, l2, z)?;
    Ok(v.powf(-2.0 / (n - 1.0)) * (-2.0 * (2.0 * n - 1.0) / (n - 1.0) * lap + s_base))
}

fn chern_conformal_ratio(p: &KahlerPotentialDeriv, s_c: f64, l1: f64, l2: f64, z: f64) -> Result<f64> {
    let n = p.n() as f64;
    let (d1, d2, _) = p.derivatives(z)?;
    let e = d1 + z * d2;
    // (z u′/u)′ = u′/u + z (u″/u − (u′/u)²)
    let zl = l1 + z * (l2 - l1 * l1);
    Ok(-(2.0 * n / (n - 1.0)) / (d1 * e) * (zl * d1 + (n - 1.0) * l1 * e) + s_c)
}

/// Chern scalar curvature of `u^(2/(n−1)) g_K` from the Kähler data.
pub fn chern_conformal(p: &KahlerPotentialDeriv, u: &Expr, z: f64) -> Result<f64> {
    let (v, l1, l2) = log_derivs(u, z)?;
    let km = crate::geometry::metric_from_potential(p);
    let s_c = chern_scalar(&km, z)?;
    let n = p.n() as f64;
    Ok(v.powf(-2.0 / (n - 1.0)) * chern_conformal_ratio(p, s_c, l1, l2, z)?)
}

/// Riemannian scalar curvature through the conformally-Kähler
/// decomposition: `S_K = 2 S_C(g_K)` followed by the conformal law.
pub fn riemannian_scalar(m: &HermitianMetricRadial, z: f64) -> Result<f64> {
    if !m.domain().contains(z) {
        return Err(KlscError::Domain(format!("z = {z} outside the annulus")));
    }
    let split = m.conformal_split()?;
    let c = 0.5 * (m.n() - 1) as f64;
    let w = split.log_factor.eval(z)?;
    let w1 = split.log_factor_derivs.0.eval(z)?;
    let w2 = split.log_factor_derivs.1.eval(z)?;
    let (l1, l2) = (c * w1, c * w2 + c * c * w1 * w1);
    let s_k = 2.0 * chern_scalar(&split.kahler_metric, z)?;
    let n = m.n() as f64;
    let lap = laplacian_ratio(&split.kahler, l1, l2, z)?;
    Ok((-w).exp() * (-2.0 * (2.0 * n - 1.0) / (n - 1.0) * lap + s_k))
}

/// Riemannian scalar curvature from the cohomogeneity-one form
/// `2(dt² + a² θ² + b² ǧ)` with `a² = zE`, `b² = zF`, `dt = √E dr`, `z = r²`.
pub fn riemannian_scalar_direct(m: &HermitianMetricRadial, z: f64) -> Result<f64> {
    let j = m.jet(z)?;
    let k = (m.n() - 1) as f64;
    // d/dt = D d/dz
    let d = 2.0 * (z / j.e).sqrt();
    let dz = d * (0.5 / z - 0.5 * j.de / j.e);
    let (ea, eb) = (j.de / j.e, j.df / j.f);
    let a1 = 0.5 * (1.0 / z + ea);
    let a2 = 0.5 * (-1.0 / (z * z) + j.d2e / j.e - ea * ea);
    let b1 = 0.5 * (1.0 / z + eb);
    let b2 = 0.5 * (-1.0 / (z * z) + j.d2f / j.f - eb * eb);
    let (at, bt) = (d * a1, d * b1);
    let att = d * d * (a1 * a1 + a2) + d * dz * a1;
    let btt = d * d * (b1 * b1 + b2) + d * dz * b1;
    let (asq, bsq) = (z * j.e, z * j.f);
    let fibre = 4.0 * k * (k + 1.0) / bsq - 2.0 * k * asq / (bsq * bsq);
    let s = fibre - 2.0 * (att + 2.0 * k * btt) - 4.0 * k * at * bt - 2.0 * k * (2.0 * k - 1.0) * bt * bt;
    Ok(0.5 * s)
}

/// `S − 2 S_C`
pub fn klsc_defect(m: &HermitianMetricRadial, z: f64) -> Result<f64> {
    Ok(riemannian_scalar(m, z)? - 2.0 * chern_scalar(m, z)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureRow {
    pub z: f64,
    pub s: f64,
    pub s_c: f64,
    pub defect: f64,
}

/// S (decomposition pipeline), S_C and their defect at each point.
pub fn curvature_sweep(m: &HermitianMetricRadial, points: &[f64]) -> Result<Vec<CurvatureRow>> {
    points
        .iter()
        .map(|&z| {
            let s = riemannian_scalar(m, z)?;
            let s_c = chern_scalar(m, z)?;
            Ok(CurvatureRow { z, s, s_c, defect: s - 2.0 * s_c })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::geometry::metric_from_potential;
    use crate::radial::Annulus;

    fn metric(n: usize, e: &str, f: &str) -> HermitianMetricRadial {
        HermitianMetricRadial::new(n, Annulus::new(0.05, Some(20.0)).unwrap(), parse(e).unwrap(), parse(f).unwrap())
            .unwrap()
    }

    #[test]
    fn flat_metric_is_flat() {
        for n in 2..5 {
            let m = metric(n, "1", "1");
            assert!(chern_scalar(&m, 1.3).unwrap().abs() < 1e-14);
            assert!(riemannian_scalar_direct(&m, 1.3).unwrap().abs() < 1e-12);
            assert!(riemannian_scalar(&m, 1.3).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn fubini_study_scalar_curvature() {
        // Kähler–Einstein: S_C = n(n+1), S = 2n(n+1)
        for n in 2..5 {
            let p = KahlerPotentialDeriv::new(n, Annulus::punctured(), parse("1/(1+z)").unwrap()).unwrap();
            let m = metric_from_potential(&p);
            for z in [0.3, 1.0, 7.0] {
                let sc = chern_scalar(&m, z).unwrap();
                assert!((sc - (n * (n + 1)) as f64).abs() < 1e-11, "{sc}");
                let s = riemannian_scalar_direct(&m, z).unwrap();
                assert!((s - 2.0 * sc).abs() < 1e-10, "{s}");
            }
        }
    }

    #[test]
    fn chern_conformal_law_matches_direct() {
        let p =
            KahlerPotentialDeriv::new(2, Annulus::new(0.1, Some(10.0)).unwrap(), parse("1/(1+z)").unwrap()).unwrap();
        let u = parse("1 + z^2").unwrap();
        let scaled =
            HermitianMetricRadial::new(2, p.domain(), u.powi(2).mul(&p.e_expr()), u.powi(2).mul(p.dphi())).unwrap();
        for z in [0.5, 2.0] {
            let a = chern_conformal(&p, &u, z).unwrap();
            let b = chern_scalar(&scaled, z).unwrap();
            assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "{a} {b}");
            let r = riemannian_conformal(2.0 * 6.0, &p, &u, z).unwrap();
            let d = riemannian_scalar_direct(&scaled, z).unwrap();
            assert!((r - d).abs() < 1e-9 * (1.0 + d.abs()), "{r} {d}");
            let pipe = riemannian_scalar(&scaled, z).unwrap();
            assert!((pipe - d).abs() < 1e-8 * (1.0 + d.abs()), "{pipe} {d}");
        }
    }
}
