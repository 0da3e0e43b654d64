//! Expression trees for radial functions of the single variable `z`.

mod deriv;
mod parse;
mod primitive;
mod print;
mod simplify;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{KlscError, Result};

pub use parse::parse;
pub use primitive::Primitive;

/// Exact rational constant with a cached floating value.
#[derive(Clone, Debug)]
pub struct Number {
    exact: BigRational,
    approx: f64,
}

impl Number {
    pub fn new(exact: BigRational) -> Self {
        let approx = ratio_to_f64(&exact);
        Number { exact, approx }
    }

    pub fn int(v: i64) -> Self {
        Number::new(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Number::new(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// Exact rational image of a finite float.
    pub fn from_f64(v: f64) -> Self {
        let exact = BigRational::from_float(v).unwrap_or_else(BigRational::zero);
        Number { exact, approx: v }
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn value(&self) -> f64 {
        self.approx
    }

    pub fn is_zero(&self) -> bool {
        self.exact.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.exact.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.exact.is_integer()
    }

    fn small_parts(&self) -> Option<(i64, i64)> {
        Some((self.exact.numer().to_i64()?, self.exact.denom().to_i64()?))
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // scale down huge numerators/denominators before dividing
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = (nb.max(db) - 1000).max(0) as usize;
    let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}

#[derive(Debug)]
pub enum Node {
    Num(Number),
    Pi,
    Var,
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, Number),
    Log(Expr),
    Exp(Expr),
    Atan(Expr),
    Abs(Expr),
    Integral(Arc<Primitive>),
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        use Node::*;
        match (self, other) {
            (Num(a), Num(b)) => a == b,
            (Pi, Pi) | (Var, Var) => true,
            (Neg(a), Neg(b)) => a == b,
            (Add(a, b), Add(c, d)) | (Sub(a, b), Sub(c, d)) | (Mul(a, b), Mul(c, d)) | (Div(a, b), Div(c, d)) => {
                a == c && b == d
            }
            (Pow(a, p), Pow(b, q)) => a == b && p == q,
            (Log(a), Log(b)) | (Exp(a), Exp(b)) | (Atan(a), Atan(b)) | (Abs(a), Abs(b)) => a == b,
            (Integral(a), Integral(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// Immutable, cheaply clonable expression.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn z() -> Self {
        Expr::from_node(Node::Var)
    }

    pub fn pi() -> Self {
        Expr::from_node(Node::Pi)
    }

    pub fn num(n: Number) -> Self {
        Expr::from_node(Node::Num(n))
    }

    pub fn int(v: i64) -> Self {
        Expr::num(Number::int(v))
    }

    pub fn rational(p: i64, q: i64) -> Self {
        Expr::num(Number::ratio(p, q))
    }

    pub fn constant(v: f64) -> Self {
        Expr::num(Number::from_f64(v))
    }

    pub fn as_number(&self) -> Option<&Number> {
        match self.node() {
            Node::Num(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_number().is_some_and(Number::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_number().is_some_and(Number::is_one)
    }

    pub fn integral(p: Primitive) -> Self {
        Expr::from_node(Node::Integral(Arc::new(p)))
    }

    /// True when the tree contains an antiderivative node.
    pub fn has_integral(&self) -> bool {
        use Node::*;
        match self.node() {
            Num(_) | Pi | Var => false,
            Integral(_) => true,
            Neg(a) | Pow(a, _) | Log(a) | Exp(a) | Atan(a) | Abs(a) => a.has_integral(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => a.has_integral() || b.has_integral(),
        }
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        let v = self.eval_raw(z)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(KlscError::Domain(format!("non-finite value {v} at z = {z}")))
        }
    }

    fn eval_raw(&self, z: f64) -> Result<f64> {
        use Node::*;
        Ok(match self.node() {
            Num(n) => n.value(),
            Pi => std::f64::consts::PI,
            Var => z,
            Neg(a) => -a.eval_raw(z)?,
            Add(a, b) => a.eval_raw(z)? + b.eval_raw(z)?,
            Sub(a, b) => a.eval_raw(z)? - b.eval_raw(z)?,
            Mul(a, b) => a.eval_raw(z)? * b.eval_raw(z)?,
            Div(a, b) => {
                let d = b.eval_raw(z)?;
                if d == 0.0 {
                    return Err(KlscError::Domain(format!("division by zero at z = {z}")));
                }
                a.eval_raw(z)? / d
            }
            Pow(a, p) => real_pow(a.eval_raw(z)?, p, z)?,
            Log(a) => {
                let x = a.eval_raw(z)?;
                if x <= 0.0 {
                    return Err(KlscError::Domain(format!("log of {x} at z = {z}")));
                }
                x.ln()
            }
            Exp(a) => a.eval_raw(z)?.exp(),
            Atan(a) => a.eval_raw(z)?.atan(),
            Abs(a) => a.eval_raw(z)?.abs(),
            Integral(p) => p.eval(z)?,
        })
    }

    /// Exact polynomial coefficients (ascending degree) when the
    /// expression is a polynomial in `z` with rational coefficients.
    pub fn as_polynomial(&self) -> Option<Vec<BigRational>> {
        use Node::*;
        fn add(a: Vec<BigRational>, b: Vec<BigRational>, sign: i32) -> Vec<BigRational> {
            let n = a.len().max(b.len());
            (0..n)
                .map(|i| {
                    let x = a.get(i).cloned().unwrap_or_else(BigRational::zero);
                    let y = b.get(i).cloned().unwrap_or_else(BigRational::zero);
                    if sign > 0 {
                        x + y
                    } else {
                        x - y
                    }
                })
                .collect()
        }
        fn mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
            if a.is_empty() || b.is_empty() {
                return Vec::new();
            }
            let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            out
        }
        let mut poly = match self.node() {
            Num(n) => vec![n.exact().clone()],
            Var => vec![BigRational::zero(), BigRational::one()],
            Neg(a) => a.as_polynomial()?.into_iter().map(|c| -c).collect(),
            Add(a, b) => add(a.as_polynomial()?, b.as_polynomial()?, 1),
            Sub(a, b) => add(a.as_polynomial()?, b.as_polynomial()?, -1),
            Mul(a, b) => mul(&a.as_polynomial()?, &b.as_polynomial()?),
            Div(a, b) => {
                let d = b.as_number()?;
                if d.is_zero() {
                    return None;
                }
                a.as_polynomial()?.into_iter().map(|c| c / d.exact()).collect()
            }
            Pow(a, p) => {
                if !p.is_integer() || p.exact().is_negative() {
                    return None;
                }
                let k = p.exact().to_integer().to_u32()?;
                let base = a.as_polynomial()?;
                let mut acc = vec![BigRational::one()];
                for _ in 0..k {
                    acc = mul(&acc, &base);
                }
                acc
            }
            _ => return None,
        };
        while poly.last().is_some_and(Zero::is_zero) {
            poly.pop();
        }
        Some(poly)
    }
}

fn real_pow(x: f64, p: &Number, z: f64) -> Result<f64> {
    if let Some((num, den)) = p.small_parts() {
        if den == 1 && num.abs() <= i32::MAX as i64 {
            if x == 0.0 && num < 0 {
                return Err(KlscError::Domain(format!("zero to a negative power at z = {z}")));
            }
            return Ok(x.powi(num as i32));
        }
        if x >= 0.0 {
            if x == 0.0 && num < 0 {
                return Err(KlscError::Domain(format!("zero to a negative power at z = {z}")));
            }
            return Ok(x.powf(p.value()));
        }
        if den % 2 != 0 {
            let m = (-x).powf(p.value());
            return Ok(if num % 2 == 0 { m } else { -m });
        }
        return Err(KlscError::Domain(format!("negative base {x} to power {num}/{den} at z = {z}")));
    }
    if x > 0.0 {
        Ok(x.powf(p.value()))
    } else {
        Err(KlscError::Domain(format!("power of non-positive base {x} at z = {z}")))
    }
}

/// Real power with the odd-root convention for negative bases.
pub fn odd_root_pow(x: f64, num: i64, den: i64) -> Result<f64> {
    real_pow(x, &Number::ratio(num, den), x)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::print(self))
    }
}

impl std::str::FromStr for Expr {
    type Err = KlscError;
    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

impl Expr {
    pub fn derivative(&self) -> Expr {
        deriv::derivative(self)
    }

    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    pub fn print(&self) -> String {
        print::print(self)
    }

    pub fn add(&self, o: &Expr) -> Expr {
        simplify::add(self.clone(), o.clone())
    }

    pub fn sub(&self, o: &Expr) -> Expr {
        simplify::sub(self.clone(), o.clone())
    }

    pub fn mul(&self, o: &Expr) -> Expr {
        simplify::mul(self.clone(), o.clone())
    }

    pub fn div(&self, o: &Expr) -> Expr {
        simplify::div(self.clone(), o.clone())
    }

    pub fn neg(&self) -> Expr {
        simplify::neg(self.clone())
    }

    pub fn powr(&self, p: i64, q: i64) -> Expr {
        simplify::pow(self.clone(), Number::ratio(p, q))
    }

    pub fn powi(&self, p: i64) -> Expr {
        self.powr(p, 1)
    }

    pub fn pow_number(&self, p: Number) -> Expr {
        simplify::pow(self.clone(), p)
    }

    pub fn ln(&self) -> Expr {
        simplify::func(self.clone(), Func::Log)
    }

    pub fn exp(&self) -> Expr {
        simplify::func(self.clone(), Func::Exp)
    }

    pub fn atan(&self) -> Expr {
        simplify::func(self.clone(), Func::Atan)
    }

    pub fn abs(&self) -> Expr {
        simplify::func(self.clone(), Func::Abs)
    }

    pub fn scale(&self, c: f64) -> Expr {
        Expr::constant(c).mul(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Log,
    Exp,
    Atan,
    Abs,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_extraction() {
        let p = parse("z^2 + z^8").unwrap().as_polynomial().unwrap();
        assert_eq!(p.len(), 9);
        assert!(p[2].is_one() && p[8].is_one() && p[3].is_zero());
        assert!(parse("log(z)").unwrap().as_polynomial().is_none());
        let q = parse("(1+z)^2/2").unwrap().as_polynomial().unwrap();
        assert_eq!(q[1], BigRational::one());
    }

    #[test]
    fn odd_roots_of_negative_bases() {
        let e = parse("z^(1/3)").unwrap();
        assert!((e.eval(-8.0).unwrap() + 2.0).abs() < 1e-15);
        let e = parse("z^(2/3)").unwrap();
        assert!((e.eval(-8.0).unwrap() - 4.0).abs() < 1e-14);
        assert!(parse("z^(1/2)").unwrap().eval(-1.0).is_err());
    }

    #[test]
    fn eval_errors_are_domain_errors() {
        assert!(matches!(parse("log(z)").unwrap().eval(-1.0), Err(KlscError::Domain(_))));
        assert!(matches!(parse("1/z").unwrap().eval(0.0), Err(KlscError::Domain(_))));
        assert!(matches!(parse("exp(exp(z))").unwrap().eval(100.0), Err(KlscError::Domain(_))));
    }
}
