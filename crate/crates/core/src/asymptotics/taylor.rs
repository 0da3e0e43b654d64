//! Expansions of expressions at z = 0 by exact series composition.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::series::{int, LogTaylorSeries};
use crate::error::{KlscError, Result};
use crate::expr::{Expr, Node};

const MAX_EXTRA: i64 = 256;

/// Generalized series of `e` at 0 with absolute working truncation `w`.
fn series_of(e: &Expr, w: &BigRational) -> Result<LogTaylorSeries> {
    use Node::*;
    Ok(match e.node() {
        Num(n) => LogTaylorSeries::constant(n.exact().clone()),
        Pi => return Err(KlscError::NotRational("pi".into())),
        Var => LogTaylorSeries::monomial(int(1), int(1), 0, int(super::series::EXACT)),
        Neg(a) => series_of(a, w)?.neg(),
        Add(a, b) => series_of(a, w)?.add(&series_of(b, w)?),
        Sub(a, b) => series_of(a, w)?.sub(&series_of(b, w)?),
        Mul(a, b) => series_of(a, w)?.mul(&series_of(b, w)?),
        Div(a, b) => series_of(a, w)?.mul(&series_of(b, w)?.reciprocal()?),
        Pow(a, p) => series_of(a, w)?.pow_rational(p.exact())?,
        Log(a) => series_of(a, w)?.log_unit()?,
        Exp(a) => series_of(a, w)?.exp()?,
        Atan(a) => series_of(a, w)?.atan()?,
        Abs(a) => {
            let s = series_of(a, w)?;
            match s.leading() {
                Some((_, _, c)) if c.is_negative() => s.neg(),
                Some(_) => s,
                None => return Err(KlscError::TruncationInsufficient("sign of abs argument unknown".into())),
            }
        }
        Integral(_) => return Err(KlscError::NotSmoothAtZero("antiderivative node".into())),
    }
    .truncate(w))
}

/// Expansion exact below `order`, possibly with negative, fractional or
/// logarithmic terms; working precision is raised until it suffices.
pub fn expansion_at_zero(e: &Expr, order: &BigRational) -> Result<LogTaylorSeries> {
    let mut w = order.clone();
    let limit = order + int(MAX_EXTRA);
    loop {
        match series_of(e, &w) {
            Ok(s) if s.truncation() >= order => return Ok(s.truncate(order)),
            Ok(s) => {
                let deficit = order - s.truncation();
                w = &w + deficit.ceil() + int(1);
            }
            Err(KlscError::TruncationInsufficient(_)) => w = &w + int(4),
            Err(err) => return Err(err),
        }
        if w > limit {
            return Err(KlscError::AllCoefficientsZero { order: order.to_integer().try_into().unwrap_or(u32::MAX) });
        }
    }
}

/// Taylor coefficients of `f` at 0 below z^order.
pub fn taylor_series_at_zero(f: &Expr, order: u32) -> Result<LogTaylorSeries> {
    let s = expansion_at_zero(f, &int(order as i64))?;
    for (k, _) in s.terms() {
        if k.log > 0 || !k.exp.is_integer() || k.exp < BigRational::zero() {
            return Err(KlscError::NotSmoothAtZero(format!("term z^({}) log^{} z in the expansion", k.exp, k.log)));
        }
    }
    Ok(s)
}

/// Order of the first nonzero Taylor coefficient.
pub fn leading_order(f: &Expr) -> Result<u32> {
    let mut order = 16u32;
    loop {
        let s = taylor_series_at_zero(f, order)?;
        if let Some(v) = s.valuation() {
            return Ok(v.to_integer().try_into().unwrap_or(u32::MAX));
        }
        if order >= 256 {
            return Err(KlscError::AllCoefficientsZero { order });
        }
        order *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::series::rat;
    use crate::expr::parse;

    #[test]
    fn worked_example_inputs() {
        let s = taylor_series_at_zero(&parse("z^2 + z^8").unwrap(), 10).unwrap();
        assert_eq!(s.plain().len(), 2);
        assert_eq!(s.coefficient(&int(8), 0), int(1));
        let s = taylor_series_at_zero(&parse("log(1+z)").unwrap(), 4).unwrap();
        assert_eq!(s.plain().len(), 3);
        assert_eq!(s.coefficient(&int(2), 0), rat(-1, 2));
        assert_eq!(s.coefficient(&int(3), 0), rat(1, 3));
    }

    #[test]
    fn cancellations_and_division() {
        let s = taylor_series_at_zero(&parse("(z^2 + z^3)/z").unwrap(), 5).unwrap();
        assert_eq!(s.valuation(), Some(int(1)));
        let s = taylor_series_at_zero(&parse("(exp(z) - 1)/z").unwrap(), 4).unwrap();
        assert_eq!(s.coefficient(&int(3), 0), rat(1, 24));
        let s = taylor_series_at_zero(&parse("(1+z)^(1/2)").unwrap(), 3).unwrap();
        assert_eq!(s.coefficient(&int(2), 0), rat(-1, 8));
    }

    #[test]
    fn errors() {
        assert!(matches!(taylor_series_at_zero(&parse("log(z)").unwrap(), 4), Err(KlscError::NotSmoothAtZero(_))));
        assert!(matches!(taylor_series_at_zero(&parse("1/z").unwrap(), 4), Err(KlscError::NotSmoothAtZero(_))));
        assert!(matches!(taylor_series_at_zero(&parse("z^(1/2)").unwrap(), 4), Err(KlscError::NotSmoothAtZero(_))));
        assert!(matches!(taylor_series_at_zero(&parse("log(2+z)").unwrap(), 4), Err(KlscError::NotRational(_))));
        assert!(matches!(leading_order(&parse("z - z").unwrap()), Err(KlscError::AllCoefficientsZero { .. })));
    }

    #[test]
    fn leading_orders() {
        assert_eq!(leading_order(&parse("z^2+z^8").unwrap()).unwrap(), 2);
        assert_eq!(leading_order(&parse("z+z^2").unwrap()).unwrap(), 1);
        assert_eq!(leading_order(&parse("1+z").unwrap()).unwrap(), 0);
        assert_eq!(leading_order(&parse("log(1+z^3) - z^3").unwrap()).unwrap(), 6);
    }
}
