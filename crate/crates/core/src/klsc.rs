//! Metrics with Kähler-like scalar curvature (`S = 2 S_C`): from a Kähler
//! potential through the conformal factor `v² = I^(2/(2n−1))`, and from an
//! admissible pair `(F, C)`.

use crate::error::{KlscError, Result};
use crate::expr::{Expr, Number};
use crate::geometry::{HermitianMetricRadial, KahlerPotentialDeriv};
use crate::quadrature::Endpoint;
use crate::radial::{primitive_expr, resolve_basepoint, Annulus, Basepoint, Normalization};

/// Strictness floor for positivity of E, relative to the local scale.
pub const STRICTNESS_FLOOR: f64 = 1e-12;

/// `v² = scale² · I^(2/(2n−1))` with `I = ∫ 1/(z^n φ′^(n−1))`.
#[derive(Debug, Clone)]
pub struct KlscFactor {
    pub n: usize,
    pub domain: Annulus,
    pub antiderivative: Expr,
    pub scale: f64,
    pub squared: Expr,
}

fn z_pow(k: i64) -> Expr {
    Expr::z().powi(k)
}

pub fn klsc_conformal_factor(p: &KahlerPotentialDeriv, norm: Normalization, scale: f64) -> Result<KlscFactor> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(KlscError::InvalidInput(format!("scale must be positive, got {scale}")));
    }
    let n = p.n() as i64;
    let integrand = Expr::int(1).div(&z_pow(n).mul(&p.dphi().powi(n - 1)));
    let antiderivative = primitive_expr(integrand, p.domain(), norm)?;
    let squared = Expr::constant(scale * scale).mul(&antiderivative.powr(2, 2 * n - 1));
    Ok(KlscFactor { n: p.n(), domain: p.domain(), antiderivative, scale, squared })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorSplit {
    pub zero: Option<f64>,
    pub pieces: Vec<Annulus>,
}

/// Locate the (at most one) sign change of the underlying antiderivative.
pub fn split_at_factor_zero(factor: &KlscFactor) -> Result<FactorSplit> {
    let i = &factor.antiderivative;
    let grid = factor.domain.verification_grid();
    let vals: Vec<f64> = grid.iter().map(|&z| i.eval(z)).collect::<Result<_>>()?;
    let brackets: Vec<usize> = (0..grid.len() - 1)
        .filter(|&k| vals[k] == 0.0 || vals[k].signum() != vals[k + 1].signum())
        .filter(|&k| {
            !(k > 0 && vals[k] == 0.0 && vals[k - 1].signum() != 0.0 && vals[k - 1].signum() != vals[k].signum())
        })
        .collect();
    match brackets.len() {
        0 => Ok(FactorSplit { zero: None, pieces: vec![factor.domain] }),
        1 => {
            let k = brackets[0];
            let gamma = refine_zero(i, grid[k], grid[k + 1], vals[k])?;
            let (a, b) = factor.domain.split(gamma)?;
            Ok(FactorSplit { zero: Some(gamma), pieces: vec![a, b] })
        }
        _ => Err(KlscError::MultipleZeros { zeros: brackets.iter().map(|&k| 0.5 * (grid[k] + grid[k + 1])).collect() }),
    }
}

/// Bisection on the bracket followed by a Newton polish.
fn refine_zero(i: &Expr, mut lo: f64, mut hi: f64, flo: f64) -> Result<f64> {
    if flo == 0.0 {
        return Ok(lo);
    }
    let slo = flo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = i.eval(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if v.signum() == slo {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi {
            break;
        }
    }
    let di = i.derivative();
    let mut z = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = di.eval(z)?;
        if d == 0.0 {
            break;
        }
        let next = z - i.eval(z)? / d;
        if !(next > lo - (hi - lo) && next < hi + (hi - lo)) {
            break;
        }
        z = next;
    }
    Ok(z)
}

/// A constructed Klsc metric with its Kähler data.
#[derive(Debug, Clone)]
pub struct KlscConstruction {
    pub metric: HermitianMetricRadial,
    pub potential: KahlerPotentialDeriv,
    /// Metric = factor_squared · (Kähler metric of `potential`).
    pub factor_squared: Expr,
    pub split: FactorSplit,
}

impl KlscConstruction {
    /// The metric restricted to each sub-annulus where the factor is positive.
    pub fn pieces(&self) -> Result<Vec<HermitianMetricRadial>> {
        self.split.pieces.iter().map(|a| self.metric.restrict(*a)).collect()
    }
}

pub fn klsc_from_potential(p: &KahlerPotentialDeriv, norm: Normalization, scale: f64) -> Result<KlscConstruction> {
    let factor = klsc_conformal_factor(p, norm, scale)?;
    let split = split_at_factor_zero(&factor)?;
    for piece in &split.pieces {
        for z in piece.verification_grid() {
            if !(factor.squared.eval(z)? > 0.0) {
                return Err(KlscError::NonPositiveConformalFactor { z });
            }
        }
    }
    let e = factor.squared.mul(&p.e_expr());
    let f = factor.squared.mul(p.dphi());
    let metric = HermitianMetricRadial::new_unchecked(p.n(), p.domain(), e, f)?;
    Ok(KlscConstruction { metric, potential: p.clone(), factor_squared: factor.squared, split })
}

/// A profile `F` and constant `C` defining `g_(F,C)`.
#[derive(Debug, Clone)]
pub struct AdmissiblePair {
    pub n: usize,
    pub domain: Annulus,
    pub f: Expr,
    pub c: f64,
    pub normalization: Normalization,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Admissibility {
    Admissible,
    NotAdmissible { z: f64, reason: String },
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible)
    }
}

/// Derived expressions of a pair.
#[derive(Debug, Clone)]
pub struct PairData {
    /// `I = ∫ 1/(z^n F^(n−1))`
    pub i: Expr,
    pub basepoint: Endpoint,
    /// `I/(2n−1) + C`
    pub shift: Expr,
    /// `(zF)′`
    pub zf_prime: Expr,
    /// `2/(z^(n−1) F^(n−2)) · (I + (2n−1)C)^(−1)`
    pub correction: Expr,
    pub e: Expr,
}

impl AdmissiblePair {
    pub fn new(n: usize, domain: Annulus, f: Expr, c: f64) -> Result<Self> {
        Self::with_normalization(n, domain, f, c, Normalization::canonical())
    }

    pub fn with_normalization(
        n: usize,
        domain: Annulus,
        f: Expr,
        c: f64,
        normalization: Normalization,
    ) -> Result<Self> {
        if n < 2 {
            return Err(KlscError::InvalidInput(format!("dimension n = {n} must be at least 2")));
        }
        if !c.is_finite() {
            return Err(KlscError::InvalidInput("constant C must be finite".into()));
        }
        Ok(AdmissiblePair { n, domain, f, c, normalization })
    }

    pub fn data(&self) -> Result<PairData> {
        let n = self.n as i64;
        let integrand = Expr::int(1).div(&z_pow(n).mul(&self.f.powi(n - 1)));
        let basepoint = resolve_basepoint(&integrand, self.domain, self.normalization.basepoint)?;
        let i = primitive_expr(
            integrand,
            self.domain,
            Normalization {
                basepoint: match basepoint {
                    Endpoint::Finite(b) => Basepoint::Finite(b),
                    Endpoint::Infinity => Basepoint::Infinity,
                },
                value: self.normalization.value,
            },
        )?;
        let m = Expr::int(2 * n - 1);
        let shift = i.div(&m).add(&Expr::constant(self.c));
        let zf_prime = Expr::z().mul(&self.f).derivative();
        let big_c = Expr::num(Number::from_f64((2 * n - 1) as f64 * self.c));
        let correction = Expr::int(2).div(&z_pow(n - 1).mul(&self.f.powi(n - 2)).mul(&i.add(&big_c)));
        let e = zf_prime.sub(&correction);
        Ok(PairData { i, basepoint, shift, zf_prime, correction, e })
    }

    /// Normalisation under which `klsc_from_potential` of the recovered
    /// potential reproduces `g_(F,C)` with unit scale.
    pub fn potential_normalization(&self) -> Result<Normalization> {
        let d = self.data()?;
        let k = (2 * self.n - 1) as i64;
        let base = self.normalization.value / k as f64 + self.c;
        Ok(Normalization {
            basepoint: match d.basepoint {
                Endpoint::Finite(b) => Basepoint::Finite(b),
                Endpoint::Infinity => Basepoint::Infinity,
            },
            value: crate::expr::odd_root_pow(base, k, 1)?,
        })
    }
}

/// Positivity of `E` (equivalently strict increase of `zF·(I/(2n−1)+C)^(−2)`)
/// on the verification grid, with refinement around suspicious points.
pub fn check_admissible(pair: &AdmissiblePair) -> Result<Admissibility> {
    let d = pair.data()?;
    let grid = pair.domain.verification_grid();
    let mut prev_shift: Option<(f64, f64)> = None;
    for (k, &z) in grid.iter().enumerate() {
        let f = pair.f.eval(z)?;
        if !(f > 0.0) {
            return Ok(Admissibility::NotAdmissible { z, reason: format!("F = {f} is not positive") });
        }
        let s = d.shift.eval(z)?;
        if let Some((zp, sp)) = prev_shift {
            if s == 0.0 || s.signum() != sp.signum() {
                return Ok(Admissibility::NotAdmissible {
                    z: 0.5 * (zp + z),
                    reason: "I/(2n-1) + C vanishes; the recovered potential has a pole".into(),
                });
            }
        }
        prev_shift = Some((z, s));
        let (a, b) = (d.zf_prime.eval(z)?, d.correction.eval(z)?);
        let e = a - b;
        let floor = STRICTNESS_FLOOR * (a.abs() + b.abs());
        if e <= floor {
            if e <= 0.0 {
                return Ok(Admissibility::NotAdmissible { z, reason: format!("E = {e:e} is not positive") });
            }
            // below the floor but positive: look between the neighbours
            let lo = if k > 0 { grid[k - 1] } else { z };
            let hi = grid.get(k + 1).copied().unwrap_or(z);
            for j in 1..16 {
                let zz = lo + (hi - lo) * j as f64 / 16.0;
                let ee = d.e.eval(zz)?;
                if ee <= 0.0 {
                    return Ok(Admissibility::NotAdmissible { z: zz, reason: format!("E = {ee:e} is not positive") });
                }
            }
        }
    }
    Ok(Admissibility::Admissible)
}

/// `φ′ = F · (I/(2n−1) + C)^(−2)`
pub fn recover_potential_derivative(pair: &AdmissiblePair) -> Result<KahlerPotentialDeriv> {
    if let Admissibility::NotAdmissible { z, .. } = check_admissible(pair)? {
        return Err(KlscError::NotAdmissible { z });
    }
    let d = pair.data()?;
    KahlerPotentialDeriv::new(pair.n, pair.domain, pair.f.div(&d.shift.powi(2)))
}

/// `g_(F,C)`: `E = (zF)′ − 2/(z^(n−1)F^(n−2)) (I + (2n−1)C)^(−1)`, F-component `F`.
pub fn build_klsc_metric(pair: &AdmissiblePair) -> Result<KlscConstruction> {
    let potential = recover_potential_derivative(pair)?;
    let d = pair.data()?;
    let metric = HermitianMetricRadial::new(pair.n, pair.domain, d.e.clone(), pair.f.clone())?;
    Ok(KlscConstruction {
        metric,
        potential,
        factor_squared: d.shift.powi(2),
        split: FactorSplit { zero: None, pieces: vec![pair.domain] },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{chern_scalar, klsc_defect, riemannian_scalar};
    use crate::expr::parse;

    fn burns() -> KahlerPotentialDeriv {
        KahlerPotentialDeriv::new(2, Annulus::new(0.01, Some(100.0)).unwrap(), parse("1 + 1/z").unwrap()).unwrap()
    }

    #[test]
    fn burns_factor_closed_form() {
        let f = klsc_conformal_factor(&burns(), Normalization::at(Basepoint::Finite(100.0)), 1.0).unwrap();
        let g = klsc_conformal_factor(
            &KahlerPotentialDeriv::new(2, Annulus::punctured(), parse("1 + 1/z").unwrap()).unwrap(),
            Normalization::canonical(),
            1.0,
        )
        .unwrap();
        for z in [0.1f64, 1.0, 10.0] {
            let expect = (1.0 + 1.0 / z).ln().powf(2.0 / 3.0);
            assert!((g.squared.eval(z).unwrap() - expect).abs() < 1e-10 * expect);
            assert!(f.squared.eval(z).unwrap() > 0.0);
        }
    }

    #[test]
    fn fubini_study_split() {
        let p =
            KahlerPotentialDeriv::new(2, Annulus::new(0.1, Some(10.0)).unwrap(), parse("1/(1+z)").unwrap()).unwrap();
        let c = klsc_from_potential(&p, Normalization { basepoint: Basepoint::Finite(1.0), value: -1.0 }, 1.0).unwrap();
        let g = c.split.zero.unwrap();
        assert!((g - 1.763_222_834_351_896_7).abs() < 1e-10, "{g}");
        assert_eq!(c.split.pieces.len(), 2);
        for piece in c.pieces().unwrap() {
            for z in piece.domain().grid(8) {
                let s = riemannian_scalar(&piece, z).unwrap();
                assert!(klsc_defect(&piece, z).unwrap().abs() < 1e-6 * (1.0 + s.abs()));
            }
        }
    }

    #[test]
    fn scale_rescales_curvature() {
        let a = klsc_from_potential(&burns(), Normalization::canonical(), 1.0).unwrap();
        let b = klsc_from_potential(&burns(), Normalization::canonical(), 3.0).unwrap();
        let (sa, sb) = (chern_scalar(&a.metric, 2.0).unwrap(), chern_scalar(&b.metric, 2.0).unwrap());
        assert!((sa - 9.0 * sb).abs() < 1e-10 * sa.abs());
    }

    #[test]
    fn pair_cross_route() {
        let pair = AdmissiblePair::new(2, Annulus::punctured(), parse("z + z^2").unwrap(), 0.0).unwrap();
        assert!(check_admissible(&pair).unwrap().is_admissible());
        let built = build_klsc_metric(&pair).unwrap();
        let e1 = built.metric.e().eval(1.0).unwrap();
        assert!((e1 - (5.0 + 4.0 / (2.0 * 2f64.ln() - 1.0))).abs() < 1e-9, "{e1}");
        let norm = pair.potential_normalization().unwrap();
        let other = klsc_from_potential(&built.potential, norm, 1.0).unwrap();
        for z in [0.05, 0.7, 3.0, 40.0] {
            let (a, b) = (built.metric.e().eval(z).unwrap(), other.metric.e().eval(z).unwrap());
            assert!((a - b).abs() < 1e-7 * a.abs(), "{z}: {a} {b}");
            let (a, b) = (built.metric.f().eval(z).unwrap(), other.metric.f().eval(z).unwrap());
            assert!((a - b).abs() < 1e-7 * a.abs(), "{z}: {a} {b}");
        }
    }

    #[test]
    fn perturbing_f_breaks_the_identity() {
        let pair = AdmissiblePair::new(2, Annulus::punctured(), parse("z + z^2").unwrap(), 0.0).unwrap();
        let m = build_klsc_metric(&pair).unwrap().metric;
        let bumped =
            HermitianMetricRadial::new(2, m.domain(), m.e().clone(), m.f().mul(&parse("1 + z/10").unwrap())).unwrap();
        let s = riemannian_scalar(&bumped, 1.0).unwrap();
        assert!(klsc_defect(&bumped, 1.0).unwrap().abs() > 1e-3 * (1.0 + s.abs()));
    }
}
