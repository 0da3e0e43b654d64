//! Behaviour of `g_(F,C)` at the origin: exact series, the cone model,
//! the log obstruction and the smoothness class.

pub mod cone;
pub mod expansion;
pub mod series;
pub mod taylor;

use std::fmt;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

pub use cone::{cone_model, observed_decay, quotient_check, ConeModel, QuotientCheck};
pub use expansion::{
    default_order, log_obstruction, metric_expansion, metric_expansion_with_constant,
    pair_constant_for_series_constant, termwise_offset, MetricExpansion,
};
pub use series::LogTaylorSeries;
pub use taylor::{leading_order, taylor_series_at_zero};

use crate::error::Result;
use crate::klsc::AdmissiblePair;
use series::int;

#[derive(Debug, Clone, PartialEq)]
pub enum Smoothness {
    Infinity,
    Finite(u32),
}

impl fmt::Display for Smoothness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smoothness::Infinity => write!(f, "C^inf"),
            Smoothness::Finite(k) => write!(f, "C^{k}"),
        }
    }
}

/// Lowest non-integral r-exponent of the metric coefficients.
#[derive(Debug, Clone, PartialEq)]
pub enum Eta {
    /// Exact value found within the truncation.
    Value(BigRational),
    /// Certified absent (all exponents integral for every order).
    Infinite,
    /// None within the truncation; only a lower bound is known.
    AtLeast(BigRational),
}

impl fmt::Display for Eta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eta::Value(v) => write!(f, "{v}"),
            Eta::Infinite => write!(f, "inf"),
            Eta::AtLeast(v) => write!(f, ">= {v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub n: usize,
    pub k: u32,
    pub cone: ConeModel,
    pub log_obstruction: BigRational,
    pub eta: Eta,
    pub smoothness: Smoothness,
    /// Class guaranteed without any refinement (C^0 for k ≥ 2).
    pub a_priori: Smoothness,
    /// Whether the class depends on terms beyond the series truncation.
    pub truncation_conditional: bool,
    pub series_order: u32,
    pub quotient: QuotientCheck,
}

fn floor_u32(r: &BigRational) -> u32 {
    r.floor().to_integer().to_u32().unwrap_or(u32::MAX)
}

/// r-exponents of all terms of the E- and zF-series.
fn r_exponents(x: &MetricExpansion) -> Vec<BigRational> {
    let k = int(x.k as i64);
    let k1 = int(x.k as i64 + 1);
    let mut out = Vec::new();
    for (t, _) in x.e.terms() {
        out.push(int(2) * (&t.exp - &k) / &k1);
        out.push(int(2) * (&t.exp + int(1)) / &k1);
    }
    for (t, _) in x.zf.terms() {
        out.push(int(2) * &t.exp / &k1);
    }
    out
}

/// Whether every exponent ever produced is integral, for polynomial F:
/// relative exponents lie in the semigroup generated by the gaps of F
/// and `(n−1)(k+1)`.
fn polynomial_certificate(pair: &AdmissiblePair, k: u32) -> Option<bool> {
    let poly = pair.f.as_polynomial()?;
    let k1 = (k + 1) as usize;
    Some(
        poly.iter()
            .enumerate()
            .filter(|(j, c)| !c.is_zero() && *j > k as usize)
            .all(|(j, _)| (2 * (j - k as usize)).is_multiple_of(k1)),
    )
}

pub fn regularity_class(pair: &AdmissiblePair) -> Result<RegularityReport> {
    regularity_class_with_order(pair, None)
}

pub fn regularity_class_with_order(pair: &AdmissiblePair, order: Option<u32>) -> Result<RegularityReport> {
    let n = pair.n;
    let x = metric_expansion(pair, order)?;
    let k = x.k;
    let series_order = order.unwrap_or_else(|| default_order(n, k));
    let cone = cone_model(n, k, &x.leading_coefficient);
    let ob = log_obstruction(&pair.f, n, k)?;
    let quotient = quotient_check(n, k);
    let low = 2 * n as u32 - 3;
    let eta = r_exponents(&x).into_iter().filter(|e| !e.is_integer()).min();
    let (eta, conditional) = match eta {
        Some(v) => (Eta::Value(v), false),
        None if k <= 1 || polynomial_certificate(pair, k) == Some(true) => (Eta::Infinite, false),
        None => {
            let k1 = int(k as i64 + 1);
            let bound = int(2) * (int(series_order as i64) - int(k as i64)) / k1;
            (Eta::AtLeast(bound), true)
        }
    };
    let smoothness = match (&eta, ob.is_zero()) {
        (Eta::Value(v), true) => Smoothness::Finite(floor_u32(v)),
        (Eta::Value(v), false) => Smoothness::Finite(floor_u32(v).min(low)),
        (_, true) => Smoothness::Infinity,
        (_, false) => Smoothness::Finite(low),
    };
    let a_priori = if k >= 2 { Smoothness::Finite(0) } else { smoothness.clone() };
    Ok(RegularityReport {
        n,
        k,
        cone,
        log_obstruction: ob,
        eta,
        smoothness,
        a_priori,
        truncation_conditional: conditional,
        series_order,
        quotient,
    })
}

fn r(v: &BigRational) -> Value {
    Value::String(v.to_string())
}

impl RegularityReport {
    pub fn to_json(&self) -> Value {
        let eta = match &self.eta {
            Eta::Value(v) => json!({"kind": "value", "value": r(v)}),
            Eta::Infinite => json!({"kind": "infinite"}),
            Eta::AtLeast(b) => json!({"kind": "at_least", "bound": r(b)}),
        };
        json!({
            "n": self.n,
            "k": self.k,
            "leading_coefficient": r(&self.cone.leading_coefficient),
            "cone_scale": r(&self.cone.cone_scale),
            "fiber_factor": r(&self.cone.fiber_factor),
            "change_of_variable_constant": r(&self.cone.change_of_variable_constant),
            "decay_exponents": {
                "dr2": r(&self.cone.decay[0]),
                "hopf": r(&self.cone.decay[1]),
                "base": r(&self.cone.decay[2]),
            },
            "log_obstruction": r(&self.log_obstruction),
            "eta": eta,
            "smoothness_class": self.smoothness.to_string(),
            "a_priori_class": self.a_priori.to_string(),
            "truncation_conditional": self.truncation_conditional,
            "series_order": self.series_order,
            "quotient_order": self.quotient.ell,
            "nonsingular_quotient": self.quotient.nonsingular,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::radial::Annulus;

    fn pair(f: &str, n: usize) -> AdmissiblePair {
        AdmissiblePair::new(n, Annulus::punctured(), parse(f).unwrap(), 0.0).unwrap()
    }

    #[test]
    fn worked_example_classes() {
        let r = regularity_class(&pair("z^2+z^8", 2)).unwrap();
        assert_eq!(
            (r.smoothness.clone(), r.eta.clone(), r.quotient.ell),
            (Smoothness::Infinity, Eta::Infinite, Some(3))
        );
        assert!(!r.truncation_conditional);
        let r = regularity_class(&pair("z+z^2", 2)).unwrap();
        assert_eq!(r.smoothness, Smoothness::Finite(1));
        let r = regularity_class(&pair("1+z", 2)).unwrap();
        assert_eq!(r.smoothness, Smoothness::Finite(1));
    }

    #[test]
    fn fractional_exponents_found() {
        // k = 2, gap 1: exponent 2/3 appears
        let r = regularity_class(&pair("z^2+z^3", 2)).unwrap();
        assert_eq!(r.eta, Eta::Value(series::rat(2, 3)));
        assert_eq!(r.smoothness, Smoothness::Finite(0));
        // gap 3 with k = 2: exponent 2 in dr², integral; k+1 | 2·3
        let r = regularity_class(&pair("z^2+z^5", 2)).unwrap();
        assert_eq!(r.eta, Eta::Infinite);
    }

    #[test]
    fn non_polynomial_is_truncation_conditional() {
        let r = regularity_class(&pair("z^2*exp(z^3)", 2)).unwrap();
        assert!(r.truncation_conditional);
        assert!(matches!(r.eta, Eta::AtLeast(_)));
        let j = r.to_json();
        assert_eq!(j["smoothness_class"], "C^1");
    }
}
