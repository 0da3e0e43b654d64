//! Expansion of `g_(F,C)` at the origin.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::series::{int, LogTaylorSeries};
use super::taylor::{leading_order, taylor_series_at_zero};
use crate::error::{KlscError, Result};
use crate::expr::{ratio_to_f64, Expr};
use crate::klsc::AdmissiblePair;

/// Default z-truncation `4(k+1)(n−1) + 8`.
pub fn default_order(n: usize, k: u32) -> u32 {
    4 * (k + 1) * (n as u32 - 1) + 8
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricExpansion {
    pub n: usize,
    pub k: u32,
    /// `F^{(k)}(0)/k!`
    pub leading_coefficient: BigRational,
    pub series_constant: BigRational,
    pub e: LogTaylorSeries,
    pub zf: LogTaylorSeries,
}

/// `1/(z^n F^(n−1))` from the Taylor series of F.
fn integrand_series(fs: &LogTaylorSeries, n: usize) -> Result<LogTaylorSeries> {
    Ok(fs.powi(n as i64 - 1)?.reciprocal()?.shift(&int(-(n as i64))))
}

fn chain(fs: &LogTaylorSeries, n: usize, c: &BigRational) -> Result<(LogTaylorSeries, LogTaylorSeries)> {
    let n_i = n as i64;
    let i_tw = integrand_series(fs, n)?.antiderivative();
    let j = i_tw.add(&LogTaylorSeries::constant(c.clone()));
    let r = j.reciprocal()?;
    let t = fs.powi(n_i - 2)?.reciprocal()?.shift(&int(1 - n_i)).scale(&int(2));
    let zf = fs.shift(&int(1));
    let e = zf.derivative().sub(&t.mul(&r));
    Ok((e, zf))
}

/// E- and zF-series of the metric with
/// `E = (zF)′ − 2/(z^(n−1)F^(n−2)) · (I_tw + series_constant)^(−1)`,
/// where `I_tw` is the termwise antiderivative (zero constant term).
pub fn metric_expansion_with_constant(
    f: &Expr,
    n: usize,
    series_constant: &BigRational,
    order: Option<u32>,
) -> Result<MetricExpansion> {
    if n < 2 {
        return Err(KlscError::InvalidInput(format!("dimension n = {n} must be at least 2")));
    }
    let k = leading_order(f)?;
    let order = order.unwrap_or_else(|| default_order(n, k));
    let target = int(order as i64);
    let mut wf = order + (n as u32) * (k + 1) + 4;
    for _ in 0..8 {
        let fs = taylor_series_at_zero(f, wf)?;
        let (e, zf) = chain(&fs, n, series_constant)?;
        if e.truncation() >= &target {
            let leading_coefficient = fs.coefficient(&int(k as i64), 0);
            let zf_target = int(order as i64 + 1);
            return Ok(MetricExpansion {
                n,
                k,
                leading_coefficient,
                series_constant: series_constant.clone(),
                e: e.truncate(&target),
                zf: zf.truncate(&zf_target),
            });
        }
        let deficit = (&target - e.truncation()).ceil().to_integer();
        wf += u32::try_from(deficit).unwrap_or(64) + 1;
    }
    Err(KlscError::TruncationInsufficient(format!("could not reach order {order}")))
}

/// Expansion of a pair with the series constant 0 (termwise convention).
pub fn metric_expansion(pair: &AdmissiblePair, order: Option<u32>) -> Result<MetricExpansion> {
    metric_expansion_with_constant(&pair.f, pair.n, &BigRational::zero(), order)
}

/// `m! [z^m] (z^k/F)^(n−1)` with `m = (k+1)(n−1)`.
pub fn log_obstruction(f: &Expr, n: usize, k: u32) -> Result<BigRational> {
    let m = (k + 1) * (n as u32 - 1);
    let fs = taylor_series_at_zero(f, k + m + 1)?;
    if fs.coefficient(&int(k as i64), 0).is_zero() || fs.valuation() != Some(int(k as i64)) {
        return Err(KlscError::InvalidInput(format!("F does not have leading order {k}")));
    }
    let unit = fs.shift(&int(-(k as i64))).reciprocal()?.powi(n as i64 - 1)?;
    let mut fact = BigInt::one();
    for i in 2..=m {
        fact *= i;
    }
    Ok(unit.coefficient(&int(m as i64), 0) * BigRational::from_integer(fact))
}

/// `K = lim_{z→0} (I(z) − I_tw(z))` between the pair's antiderivative and
/// the termwise one; a pair constant `C` corresponds to the series
/// constant `(2n−1)C + K`.
pub fn termwise_offset(pair: &AdmissiblePair) -> Result<f64> {
    if pair.domain.alpha() != 0.0 {
        return Err(KlscError::InvalidInput("expansion needs an annulus reaching z = 0".into()));
    }
    let data = pair.data()?;
    let k = leading_order(&pair.f)?;
    let lead = (k as i64 + 1) * (pair.n as i64 - 1);
    let mut candidates = vec![0.05, 0.02, 0.01, 0.005];
    if let Some(b) = pair.domain.beta() {
        candidates.retain(|z| *z < 0.5 * b);
        candidates.push(0.1 * b);
    }
    for z0 in candidates {
        let mut vals = Vec::new();
        for extra in [30u32, 60] {
            let fs = taylor_series_at_zero(&pair.f, lead as u32 + extra)?;
            let itw = integrand_series(&fs, pair.n)?.antiderivative();
            vals.push(itw.eval(z0));
        }
        if (vals[0] - vals[1]).abs() <= 1e-13 * vals[1].abs().max(1.0) {
            return Ok(data.i.eval(z0)? - vals[1]);
        }
    }
    Err(KlscError::TruncationInsufficient("termwise antiderivative does not converge near 0".into()))
}

/// Pair constant whose metric is expanded by `series_constant`.
pub fn pair_constant_for_series_constant(pair: &AdmissiblePair, series_constant: &BigRational) -> Result<f64> {
    let k = termwise_offset(pair)?;
    Ok((ratio_to_f64(series_constant) - k) / (2 * pair.n - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::series::rat;
    use crate::expr::parse;

    #[test]
    fn leading_terms() {
        for (f, n, k, lead) in
            [("z^2+z^8", 2usize, 2i64, 9i64), ("z+z^2", 2, 1, 6), ("1+z", 2, 0, 3), ("1+z^2", 3, 0, 5)]
        {
            let x = metric_expansion_with_constant(&parse(f).unwrap(), n, &BigRational::zero(), None).unwrap();
            assert_eq!(x.e.leading(), Some((int(k), 0, int(lead))), "{f}");
            assert_eq!(x.zf.leading(), Some((int(k + 1), 0, int(1))), "{f}");
        }
    }

    #[test]
    fn obstructions() {
        assert_eq!(log_obstruction(&parse("z^2+z^8").unwrap(), 2, 2).unwrap(), int(0));
        assert_eq!(log_obstruction(&parse("z+z^2").unwrap(), 2, 1).unwrap(), int(2));
        assert_eq!(log_obstruction(&parse("1").unwrap(), 2, 0).unwrap(), int(0));
        assert_eq!(log_obstruction(&parse("1+z").unwrap(), 2, 0).unwrap(), int(-1));
        assert_eq!(log_obstruction(&parse("2+z").unwrap(), 3, 0).unwrap(), rat(3, 8));
    }

    #[test]
    fn log_terms_iff_obstruction() {
        for (f, n) in [
            ("z^2+z^8", 2usize),
            ("z+z^2", 2),
            ("1+z", 2),
            ("1+z^3", 2),
            ("1+z^2", 2),
            ("1+z^2", 3),
            ("z+z^3", 2),
            ("1 + z^4", 3),
        ] {
            let e = parse(f).unwrap();
            let k = leading_order(&e).unwrap();
            let x = metric_expansion_with_constant(&e, n, &BigRational::zero(), None).unwrap();
            let ob = log_obstruction(&e, n, k).unwrap();
            assert_eq!(x.e.has_log_terms(), !ob.is_zero(), "{f} n={n}");
        }
    }

    #[test]
    fn burns_type_offset() {
        // I = ∫_∞ 1/(z^2 (z+z^2)) has termwise part −1/(2z²) + 1/z + log z and
        // canonical form −1/(2z²) + 1/z − log(1+1/z); K = 0
        let pair = AdmissiblePair::new(2, crate::radial::Annulus::punctured(), parse("z+z^2").unwrap(), 0.0).unwrap();
        assert!(termwise_offset(&pair).unwrap().abs() < 1e-9);
        let pair = AdmissiblePair::new(2, crate::radial::Annulus::punctured(), parse("z^2+z^8").unwrap(), 0.0).unwrap();
        let k = termwise_offset(&pair).unwrap();
        assert!((k - std::f64::consts::PI / 6.0).abs() < 1e-8, "{k}");
    }
}
