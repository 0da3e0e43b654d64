use num_integer::Roots;
use num_rational::BigRational;

use super::expansion::MetricExpansion;
use super::series::int;

/// Asymptotic cone `dr² + coneScale·r²·(g_CP + fiberFactor·h)` under
/// `r² = changeOfVariableConstant · z^(k+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeModel {
    pub n: usize,
    pub k: u32,
    pub leading_coefficient: BigRational,
    pub change_of_variable_constant: BigRational,
    pub cone_scale: BigRational,
    pub fiber_factor: BigRational,
    /// r-exponents of the first corrections to the dr², h and g_CP coefficients.
    pub decay: [BigRational; 3],
}

pub fn cone_model(n: usize, k: u32, leading_coefficient: &BigRational) -> ConeModel {
    let m = int(2 * n as i64 - 1);
    let k1 = int(k as i64 + 1);
    ConeModel {
        n,
        k,
        leading_coefficient: leading_coefficient.clone(),
        change_of_variable_constant: &m / &k1 * leading_coefficient,
        cone_scale: &k1 / &m,
        fiber_factor: &k1 * &m,
        decay: [int(2) / &k1, int(2) * (&k1 + int(1)) / &k1, int(2) * (&k1 + int(1)) / &k1],
    }
}

impl ConeModel {
    /// Coefficients of `dr²`, `r² h` and `r² g_CP` obtained by substituting
    /// the change of variable into `E_lead z^k ((d√z)² + z h) + zF_lead g_CP`.
    pub fn substituted(&self, e_lead: &BigRational, zf_lead: &BigRational) -> [BigRational; 3] {
        let c = &self.change_of_variable_constant;
        let k1 = int(self.k as i64 + 1);
        [e_lead / (c * &k1 * &k1), e_lead / c, zf_lead / c]
    }

    /// r-exponent of `z^d`.
    pub fn r_exponent(&self, d: &BigRational) -> BigRational {
        int(2) * d / int(self.k as i64 + 1)
    }
}

/// Lowest r-exponents of the higher-order terms actually present in an
/// expansion (dr², h, g_CP), if any lie within the truncation.
pub fn observed_decay(x: &MetricExpansion) -> [Option<BigRational>; 3] {
    let k = int(x.k as i64);
    let k1 = int(x.k as i64 + 1);
    let min = |it: Vec<BigRational>| it.into_iter().min();
    let e_higher: Vec<BigRational> = x.e.terms().map(|(t, _)| t.exp.clone()).filter(|d| *d > k).collect();
    let dr2 = min(e_higher.iter().map(|d| int(2) * (d - &k) / &k1).collect());
    let hopf = min(e_higher.iter().map(|d| int(2) * (d + int(1)) / &k1).collect());
    let base = min(x.zf.terms().map(|(t, _)| t.exp.clone()).filter(|e| *e > k1).map(|e| int(2) * e / &k1).collect());
    [dr2, hopf, base]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuotientCheck {
    pub ell: Option<u64>,
    pub nonsingular: bool,
}

/// `ℓ` with `(k+1)(2n−1) = ℓ²`; nonsingular quotient iff `k = 2n−2`.
pub fn quotient_check(n: usize, k: u32) -> QuotientCheck {
    let p = (k as u64 + 1) * (2 * n as u64 - 1);
    let r = p.sqrt();
    let ell = (r * r == p).then_some(r);
    QuotientCheck { ell, nonsingular: ell.is_some() && k as u64 == 2 * n as u64 - 2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::series::rat;

    #[test]
    fn worked_example_cones() {
        let c = cone_model(2, 0, &int(1));
        assert_eq!((c.cone_scale.clone(), c.fiber_factor.clone()), (rat(1, 3), int(3)));
        let c = cone_model(2, 2, &int(1));
        assert_eq!(
            (c.cone_scale.clone(), c.fiber_factor.clone(), c.change_of_variable_constant.clone()),
            (int(1), int(9), int(1))
        );
        let c = cone_model(2, 1, &int(1));
        assert_eq!((c.cone_scale.clone(), c.fiber_factor.clone()), (rat(2, 3), int(6)));
    }

    #[test]
    fn quotients() {
        assert_eq!(quotient_check(2, 2), QuotientCheck { ell: Some(3), nonsingular: true });
        assert_eq!(quotient_check(2, 0), QuotientCheck { ell: None, nonsingular: false });
        assert_eq!(quotient_check(5, 0), QuotientCheck { ell: Some(3), nonsingular: false });
    }
}
