use std::collections::BTreeMap;
use std::sync::Mutex;

use super::Expr;
use crate::error::Result;
use crate::quadrature::{integrate, Endpoint, QuadConfig};

const MAX_ANCHORS: usize = 1 << 18;

/// `value + ∫_basepoint^z integrand`, evaluated by quadrature.
///
/// Every computed value is kept as an anchor; later evaluations integrate
/// only from the nearest anchor, which keeps nested antiderivatives cheap
/// and makes nearby evaluations (finite differences) consistent.
#[derive(Debug)]
pub struct Primitive {
    integrand: Expr,
    basepoint: Endpoint,
    base_value: f64,
    config: QuadConfig,
    anchors: Mutex<BTreeMap<u64, (f64, f64)>>,
}

impl Primitive {
    pub fn new(integrand: Expr, basepoint: Endpoint, base_value: f64) -> Self {
        Primitive {
            integrand,
            basepoint,
            base_value,
            config: QuadConfig::primitive(),
            anchors: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn integrand(&self) -> &Expr {
        &self.integrand
    }

    pub fn basepoint(&self) -> Endpoint {
        self.basepoint
    }

    pub fn base_value(&self) -> f64 {
        self.base_value
    }

    pub fn describe(&self) -> String {
        let b = match self.basepoint {
            Endpoint::Finite(x) => format!("{x}"),
            Endpoint::Infinity => "inf".into(),
        };
        format!("integral({}, from={b}, value={})", self.integrand.print(), self.base_value)
    }

    /// Neighbouring anchors `(z, value, error)` on both sides of `z`.
    fn neighbours(&self, z: f64) -> Vec<(f64, f64, f64)> {
        let map = self.anchors.lock().expect("anchor lock");
        let key = z.to_bits();
        if let Some(&(v, e)) = map.get(&key) {
            return vec![(z, v, e)];
        }
        let below = map.range(..key).next_back().map(|(k, &(v, e))| (f64::from_bits(*k), v, e));
        let above = map.range(key..).next().map(|(k, &(v, e))| (f64::from_bits(*k), v, e));
        [below, above].into_iter().flatten().collect()
    }

    fn store(&self, z: f64, v: f64, err: f64) {
        let mut map = self.anchors.lock().expect("anchor lock");
        if map.len() >= MAX_ANCHORS {
            map.clear();
        }
        map.insert(z.to_bits(), (v, err));
    }

    fn direct(&self, z: f64) -> Result<f64> {
        let v = integrate(|x| self.integrand.eval(x), self.basepoint, Endpoint::Finite(z), &self.config)?;
        Ok(self.base_value + v)
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        if !(z > 0.0 && z.is_finite()) {
            return self.direct(z);
        }
        let rel = self.config.rel_tol;
        let mut cands = self.neighbours(z);
        if cands.len() == 1 && cands[0].0 == z {
            return Ok(cands[0].1);
        }
        // nearest (in log scale) first
        cands.sort_by(|a, b| (a.0 / z).ln().abs().total_cmp(&(b.0 / z).ln().abs()));
        for (a, va, ea) in cands {
            if let Endpoint::Finite(b) = self.basepoint {
                if b > 0.0 && (b / z).ln().abs() <= (a / z).ln().abs() {
                    break;
                }
            }
            let mut cfg = self.config;
            cfg.abs_tol = cfg.abs_tol.max(rel * va.abs());
            let hop = integrate(|x| self.integrand.eval(x), Endpoint::Finite(a), Endpoint::Finite(z), &cfg)?;
            let v = va + hop;
            let err = ea + rel * (va.abs() + hop.abs());
            // chained values may lose relative accuracy through cancellation
            if err <= 100.0 * rel * v.abs() {
                self.store(z, v, err);
                return Ok(v);
            }
        }
        let v = self.direct(z)?;
        self.store(z, v, rel * v.abs());
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn antiderivative_from_infinity() {
        let p = Primitive::new(parse("1/(z*(z+1))").unwrap(), Endpoint::Infinity, 0.0);
        for z in [0.01f64, 0.5, 1.0, 3.0, 100.0] {
            let exact = -(1.0 + 1.0 / z).ln();
            let v = p.eval(z).unwrap();
            assert!((v - exact).abs() < 1e-12 * (1.0 + exact.abs()), "{z}: {v} {exact}");
        }
        // repeated query hits the anchor
        assert_eq!(p.eval(0.5).unwrap(), p.eval(0.5).unwrap());
    }

    #[test]
    fn finite_basepoint_and_value() {
        let p = Primitive::new(parse("1/z^2 + 1/z").unwrap(), Endpoint::Finite(1.0), -1.0);
        for z in [0.1f64, 1.7, 10.0] {
            let exact = z.ln() - 1.0 / z;
            assert!((p.eval(z).unwrap() - exact).abs() < 1e-12);
        }
    }
}
