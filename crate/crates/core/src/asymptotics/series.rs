//! Truncated generalized power series `Σ c · z^q · (log z)^l` with exact
//! rational coefficients and rational exponents.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{KlscError, Result};
use crate::expr::ratio_to_f64;

/// Truncation used for exact (finite) series.
pub const EXACT: i64 = 1_000_000;

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(p))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Key {
    pub exp: BigRational,
    pub log: u32,
}

/// All terms with exponent below `truncation` are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTaylorSeries {
    terms: BTreeMap<Key, BigRational>,
    truncation: BigRational,
}

impl LogTaylorSeries {
    pub fn zero(truncation: BigRational) -> Self {
        LogTaylorSeries { terms: BTreeMap::new(), truncation }
    }

    pub fn monomial(coeff: BigRational, exp: BigRational, log: u32, truncation: BigRational) -> Self {
        let mut s = Self::zero(truncation);
        s.insert(exp, log, coeff);
        s
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, BigRational::zero(), 0, int(EXACT))
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    /// Series from plain (exponent, coefficient) pairs.
    pub fn from_plain<I: IntoIterator<Item = (BigRational, BigRational)>>(it: I, truncation: BigRational) -> Self {
        let mut s = Self::zero(truncation);
        for (e, c) in it {
            s.insert(e, 0, c);
        }
        s
    }

    fn insert(&mut self, exp: BigRational, log: u32, c: BigRational) {
        if exp >= self.truncation || c.is_zero() {
            return;
        }
        let key = Key { exp, log };
        let v = self.terms.entry(key.clone()).or_insert_with(BigRational::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn truncation(&self) -> &BigRational {
        &self.truncation
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exp: &BigRational, log: u32) -> BigRational {
        self.terms.get(&Key { exp: exp.clone(), log }).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Terms without logarithm.
    pub fn plain(&self) -> BTreeMap<BigRational, BigRational> {
        self.log_power(0)
    }

    /// Coefficients of `z^s log z`.
    pub fn log_part(&self) -> BTreeMap<BigRational, BigRational> {
        self.log_power(1)
    }

    pub fn log_power(&self, l: u32) -> BTreeMap<BigRational, BigRational> {
        self.terms.iter().filter(|(k, _)| k.log == l).map(|(k, c)| (k.exp.clone(), c.clone())).collect()
    }

    pub fn has_log_terms(&self) -> bool {
        self.terms.keys().any(|k| k.log > 0)
    }

    /// Lowest exponent carrying a nonzero coefficient.
    pub fn valuation(&self) -> Option<BigRational> {
        self.terms.keys().next().map(|k| k.exp.clone())
    }

    /// Lower bound for the valuation (the truncation when nothing is known).
    fn valuation_bound(&self) -> BigRational {
        self.valuation().unwrap_or_else(|| self.truncation.clone())
    }

    /// Leading term `(exponent, log power, coefficient)`; the highest log
    /// power dominates at equal exponent.
    pub fn leading(&self) -> Option<(BigRational, u32, BigRational)> {
        let v = self.valuation()?;
        self.terms
            .iter()
            .filter(|(k, _)| k.exp == v)
            .max_by_key(|(k, _)| k.log)
            .map(|(k, c)| (k.exp.clone(), k.log, c.clone()))
    }

    pub fn truncate(&self, t: &BigRational) -> Self {
        let t = t.min(&self.truncation).clone();
        LogTaylorSeries {
            terms: self.terms.iter().filter(|(k, _)| k.exp < t).map(|(k, c)| (k.clone(), c.clone())).collect(),
            truncation: t,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut s = Self::zero(self.truncation.clone().min(o.truncation.clone()));
        for (k, c) in self.terms.iter().chain(o.terms.iter()) {
            s.insert(k.exp.clone(), k.log, c.clone());
        }
        s
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRational::one())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(int(EXACT).max(self.truncation.clone()));
        }
        LogTaylorSeries {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
            truncation: self.truncation.clone(),
        }
    }

    /// Multiply by `z^q`.
    pub fn shift(&self, q: &BigRational) -> Self {
        LogTaylorSeries {
            terms: self.terms.iter().map(|(k, v)| (Key { exp: &k.exp + q, log: k.log }, v.clone())).collect(),
            truncation: &self.truncation + q,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let t = (&self.truncation + o.valuation_bound()).min(&o.truncation + self.valuation_bound());
        let mut s = Self::zero(t);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &o.terms {
                let e = &ka.exp + &kb.exp;
                if e < s.truncation {
                    s.insert(e, ka.log + kb.log, ca * cb);
                }
            }
        }
        s
    }

    /// Leading data required for inversion and roots: `c z^q` with no
    /// log terms at exponent `q` and exact knowledge of the leading term.
    pub fn unit_leading(&self) -> Result<(BigRational, BigRational)> {
        let (q, l, c) = self.leading().ok_or_else(|| {
            KlscError::TruncationInsufficient("series has no nonzero term below its truncation".into())
        })?;
        if l != 0 {
            return Err(KlscError::NotSmoothAtZero("leading term carries a logarithm".into()));
        }
        Ok((q, c))
    }

    /// `(S / (c z^q)) − 1` together with `(c, q)`.
    fn normalized_tail(&self) -> Result<(BigRational, BigRational, Self)> {
        let (q, c) = self.unit_leading()?;
        let g = self.shift(&-q.clone()).scale(&c.recip()).sub(&Self::one());
        Ok((q, c, g))
    }

    /// Powers `G^m` summed with coefficients `coef(m)` for `m ≥ 0`, for a
    /// series `G` of positive valuation.
    fn compose(g: &Self, coef: impl Fn(u64) -> BigRational) -> Self {
        let t = g.truncation.clone();
        let mut acc = Self::monomial(coef(0), BigRational::zero(), 0, t.clone());
        let Some(vg) = g.valuation() else {
            return acc;
        };
        debug_assert!(vg > BigRational::zero());
        let mut power = Self::one();
        let mut m = 0u64;
        loop {
            m += 1;
            power = power.mul(g);
            if power.valuation().is_none_or(|v| v >= t) {
                break;
            }
            let c = coef(m);
            if !c.is_zero() {
                acc = acc.add(&power.scale(&c));
            }
        }
        acc.truncate(&t)
    }

    pub fn reciprocal(&self) -> Result<Self> {
        let (q, c, g) = self.normalized_tail()?;
        let inv = Self::compose(&g, |m| if m % 2 == 0 { BigRational::one() } else { -BigRational::one() });
        Ok(inv.scale(&c.recip()).shift(&-q))
    }

    pub fn powi(&self, k: i64) -> Result<Self> {
        if k < 0 {
            return self.reciprocal()?.powi(-k);
        }
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// Real power with rational exponent; the leading coefficient must
    /// have a rational root.
    pub fn pow_rational(&self, p: &BigRational) -> Result<Self> {
        if p.is_integer() {
            let k = p.to_integer().to_i64().ok_or_else(|| KlscError::InvalidInput("exponent too large".into()))?;
            return self.powi(k);
        }
        let (q, c, g) = self.normalized_tail()?;
        let cp = rational_power(&c, p)?;
        let binom = |m: u64| {
            let mut b = BigRational::one();
            for i in 0..m {
                b = b * (p - int(i as i64)) / int(i as i64 + 1);
            }
            b
        };
        Ok(Self::compose(&g, binom).scale(&cp).shift(&(q * p)))
    }

    /// `log(S)` for `S = 1 + O(z^v)`, `v > 0`.
    pub fn log_unit(&self) -> Result<Self> {
        let (q, c, g) = self.normalized_tail()?;
        if !q.is_zero() {
            return Err(KlscError::NotSmoothAtZero("logarithm of a series vanishing or singular at 0".into()));
        }
        if !c.is_one() {
            return Err(KlscError::NotRational(format!("log({c}) is irrational")));
        }
        Ok(Self::compose(&g, |m| {
            if m == 0 {
                BigRational::zero()
            } else {
                let s = if m % 2 == 1 { 1 } else { -1 };
                rat(s, m as i64)
            }
        }))
    }

    fn require_small(&self) -> Result<()> {
        if self.truncation <= BigRational::zero() {
            return Err(KlscError::TruncationInsufficient("constant term unknown".into()));
        }
        if let Some(v) = self.valuation() {
            if v < BigRational::zero() || self.has_log_terms() {
                return Err(KlscError::NotSmoothAtZero("argument singular at 0".into()));
            }
        }
        Ok(())
    }

    /// `exp(S)` for `S(0) = 0`.
    pub fn exp(&self) -> Result<Self> {
        self.require_small()?;
        let c0 = self.coefficient(&BigRational::zero(), 0);
        if !c0.is_zero() {
            return Err(KlscError::NotRational(format!("exp({c0}) is irrational")));
        }
        Ok(Self::compose(self, |m| {
            let mut f = BigInt::one();
            for i in 2..=m {
                f *= i;
            }
            BigRational::new(BigInt::one(), f)
        }))
    }

    /// `atan(S)` for `S(0) = 0`.
    pub fn atan(&self) -> Result<Self> {
        self.require_small()?;
        let c0 = self.coefficient(&BigRational::zero(), 0);
        if !c0.is_zero() {
            return Err(KlscError::NotRational(format!("atan({c0}) is irrational")));
        }
        Ok(Self::compose(self, |m| {
            if m % 2 == 0 {
                BigRational::zero()
            } else {
                let s = if (m / 2) % 2 == 0 { 1 } else { -1 };
                rat(s, m as i64)
            }
        }))
    }

    /// Termwise antiderivative with zero constant; `z^{-1} (log z)^l`
    /// integrates to `(log z)^{l+1}/(l+1)`.
    pub fn antiderivative(&self) -> Self {
        let mut s = Self::zero(&self.truncation + BigRational::one());
        for (k, c) in &self.terms {
            for (e, l, v) in integrate_term(&k.exp, k.log, c) {
                s.insert(e, l, v);
            }
        }
        s
    }

    pub fn derivative(&self) -> Self {
        let mut s = Self::zero(&self.truncation - BigRational::one());
        let one = BigRational::one();
        for (k, c) in &self.terms {
            let e = &k.exp - &one;
            if !k.exp.is_zero() {
                s.insert(e.clone(), k.log, c * &k.exp);
            }
            if k.log > 0 {
                s.insert(e, k.log - 1, c * int(k.log as i64));
            }
        }
        s
    }

    /// Floating-point value of the retained terms at `z > 0`.
    pub fn eval(&self, z: f64) -> f64 {
        let lz = z.ln();
        self.terms.iter().map(|(k, c)| ratio_to_f64(c) * z.powf(ratio_to_f64(&k.exp)) * lz.powi(k.log as i32)).sum()
    }

    /// `[exp-num, exp-den, coeff-num, coeff-den, log-power]` rows.
    pub fn dump(&self) -> Vec<Value> {
        fn big(b: &BigInt) -> Value {
            b.to_i64().map(Value::from).unwrap_or_else(|| Value::String(b.to_string()))
        }
        self.terms
            .iter()
            .map(|(k, c)| {
                Value::Array(vec![
                    big(k.exp.numer()),
                    big(k.exp.denom()),
                    big(c.numer()),
                    big(c.denom()),
                    Value::from(k.log),
                ])
            })
            .collect()
    }
}

/// `∫ c z^e (log z)^l dz` as a list of terms.
fn integrate_term(e: &BigRational, l: u32, c: &BigRational) -> Vec<(BigRational, u32, BigRational)> {
    let one = BigRational::one();
    if *e == -one.clone() {
        return vec![(BigRational::zero(), l + 1, c / int(l as i64 + 1))];
    }
    // ∫ z^e L^l = z^{e+1} Σ_j (-1)^j l!/(l-j)! L^{l-j} / (e+1)^{j+1}
    let p = e + &one;
    let mut out = Vec::new();
    let mut factor = c / &p;
    for j in 0..=l {
        out.push((p.clone(), l - j, factor.clone()));
        factor = -factor * int((l - j) as i64) / &p;
    }
    out
}

/// `c^p` when it is rational (odd-root convention for negative `c`).
pub fn rational_power(c: &BigRational, p: &BigRational) -> Result<BigRational> {
    let den = p.denom().to_u32().ok_or_else(|| KlscError::NotRational("exponent denominator too large".into()))?;
    let num = p.numer().to_i64().ok_or_else(|| KlscError::NotRational("exponent numerator too large".into()))?;
    let root = |b: &BigInt| -> Option<BigInt> {
        let r = num_integer::Roots::nth_root(b, den);
        (num_traits::pow(r.clone(), den as usize) == *b).then_some(r)
    };
    let neg = c.is_negative();
    if neg && den % 2 == 0 {
        return Err(KlscError::NotSmoothAtZero(format!("even root of negative leading coefficient {c}")));
    }
    let a = c.abs();
    let (Some(rn), Some(rd)) = (root(a.numer()), root(a.denom())) else {
        return Err(KlscError::NotRational(format!("({c})^({p}) is irrational")));
    };
    let mut r = BigRational::new(rn, rd);
    if neg {
        r = -r;
    }
    let mut acc = BigRational::one();
    for _ in 0..num.unsigned_abs() {
        acc *= &r;
    }
    Ok(if num < 0 { acc.recip() } else { acc })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(cs: &[(i64, i64)], t: i64) -> LogTaylorSeries {
        LogTaylorSeries::from_plain(cs.iter().map(|&(e, c)| (int(e), int(c))), int(t))
    }

    #[test]
    fn reciprocal_of_one_plus_z() {
        let s = poly(&[(0, 1), (1, 1)], 10);
        let r = s.reciprocal().unwrap();
        assert_eq!(r.truncation(), &int(10));
        for e in 0..10 {
            assert_eq!(r.coefficient(&int(e), 0), int(if e % 2 == 0 { 1 } else { -1 }));
        }
        let p = s.mul(&r);
        assert_eq!(p.plain().len(), 1);
    }

    #[test]
    fn laurent_reciprocal_truncation() {
        // 1/(z^2 + z^3) = z^-2 (1 - z + ...), exact below 10 - 2*2
        let s = poly(&[(2, 1), (3, 1)], 10);
        let r = s.reciprocal().unwrap();
        assert_eq!(r.truncation(), &int(6));
        assert_eq!(r.valuation(), Some(int(-2)));
    }

    #[test]
    fn antiderivative_log_rule() {
        let s = LogTaylorSeries::from_plain([(int(-1), int(3)), (int(2), int(3))], int(5));
        let a = s.antiderivative();
        assert_eq!(a.coefficient(&int(0), 1), int(3));
        assert_eq!(a.coefficient(&int(3), 0), int(1));
        // d/dz ∫ = identity
        assert_eq!(a.derivative(), s);
        let l = LogTaylorSeries::monomial(int(1), int(1), 1, int(5));
        assert_eq!(l.antiderivative().derivative(), l);
    }

    #[test]
    fn elementary_compositions() {
        let z = poly(&[(1, 1)], 8);
        let log1p = poly(&[(0, 1), (1, 1)], 8).log_unit().unwrap();
        assert_eq!(log1p.coefficient(&int(3), 0), rat(1, 3));
        let e = z.exp().unwrap();
        assert_eq!(e.coefficient(&int(4), 0), rat(1, 24));
        let at = z.atan().unwrap();
        assert_eq!(at.coefficient(&int(5), 0), rat(1, 5));
        assert_eq!(at.coefficient(&int(3), 0), rat(-1, 3));
        let sq = poly(&[(0, 4), (1, 4)], 8).pow_rational(&rat(1, 2)).unwrap();
        assert_eq!(sq.coefficient(&int(0), 0), int(2));
        assert_eq!(sq.coefficient(&int(1), 0), int(1));
        assert!(poly(&[(0, 2)], 8).pow_rational(&rat(1, 2)).is_err());
    }

    #[test]
    fn dump_rows() {
        let s = LogTaylorSeries::monomial(rat(-1, 2), rat(2, 3), 1, int(3));
        assert_eq!(serde_json::to_string(&s.dump()).unwrap(), "[[2,3,-1,2,1]]");
    }
}
