//! Conservative normalisation: constant folding, neutral elements and
//! merging of powers of a common base.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Expr, Func, Node, Number};

fn num(r: BigRational) -> Expr {
    Expr::num(Number::new(r))
}

pub(super) fn add(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (a.as_number(), b.as_number()) {
        return num(x.exact() + y.exact());
    }
    if a.is_zero() {
        return b;
    }
    if b.is_zero() {
        return a;
    }
    Expr::from_node(Node::Add(a, b))
}

pub(super) fn sub(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (a.as_number(), b.as_number()) {
        return num(x.exact() - y.exact());
    }
    if b.is_zero() {
        return a;
    }
    if a.is_zero() {
        return neg(b);
    }
    Expr::from_node(Node::Sub(a, b))
}

pub(super) fn neg(a: Expr) -> Expr {
    match a.node() {
        Node::Num(x) => num(-x.exact().clone()),
        Node::Neg(inner) => inner.clone(),
        _ => Expr::from_node(Node::Neg(a)),
    }
}

fn base_and_exponent(e: &Expr) -> (Expr, BigRational) {
    match e.node() {
        Node::Pow(b, p) => (b.clone(), p.exact().clone()),
        _ => (e.clone(), BigRational::one()),
    }
}

pub(super) fn mul(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (a.as_number(), b.as_number()) {
        return num(x.exact() * y.exact());
    }
    if a.is_zero() || b.is_zero() {
        return Expr::int(0);
    }
    if a.is_one() {
        return b;
    }
    if b.is_one() {
        return a;
    }
    if a.as_number().is_none() && b.as_number().is_none() {
        let (ba, pa) = base_and_exponent(&a);
        let (bb, pb) = base_and_exponent(&b);
        if ba == bb {
            return pow(ba, Number::new(pa + pb));
        }
    }
    Expr::from_node(Node::Mul(a, b))
}

pub(super) fn div(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (a.as_number(), b.as_number()) {
        if !y.is_zero() {
            return num(x.exact() / y.exact());
        }
    }
    if b.is_one() {
        return a;
    }
    if a.is_zero() && !b.is_zero() {
        return a;
    }
    Expr::from_node(Node::Div(a, b))
}

fn rational_int_pow(x: &BigRational, p: &BigRational) -> Option<BigRational> {
    if !p.is_integer() {
        return None;
    }
    let k = p.to_integer().to_i32()?;
    if k.unsigned_abs() > 64 || (x.is_zero() && k < 0) {
        return None;
    }
    let mut acc = BigRational::one();
    for _ in 0..k.unsigned_abs() {
        acc *= x;
    }
    Some(if k < 0 { acc.recip() } else { acc })
}

pub(super) fn pow(b: Expr, p: Number) -> Expr {
    if p.is_zero() {
        return Expr::int(1);
    }
    if p.is_one() {
        return b;
    }
    if let Some(x) = b.as_number() {
        if let Some(v) = rational_int_pow(x.exact(), p.exact()) {
            return num(v);
        }
    }
    if let Node::Pow(inner, q) = b.node() {
        if p.is_integer() {
            return pow(inner.clone(), Number::new(q.exact() * p.exact()));
        }
    }
    Expr::from_node(Node::Pow(b, p))
}

pub(super) fn func(a: Expr, f: Func) -> Expr {
    if let Some(x) = a.as_number() {
        let r = x.exact();
        match f {
            Func::Log if r.is_one() => return Expr::int(0),
            Func::Exp | Func::Atan if r.is_zero() => return if f == Func::Exp { Expr::int(1) } else { Expr::int(0) },
            Func::Abs => return num(r.abs()),
            _ => {}
        }
    }
    Expr::from_node(match f {
        Func::Log => Node::Log(a),
        Func::Exp => Node::Exp(a),
        Func::Atan => Node::Atan(a),
        Func::Abs => Node::Abs(a),
    })
}

/// Bottom-up rebuild through the smart constructors.
pub(super) fn simplify(e: &Expr) -> Expr {
    use Node::*;
    match e.node() {
        Num(_) | Pi | Var | Integral(_) => e.clone(),
        Neg(a) => neg(simplify(a)),
        Add(a, b) => add(simplify(a), simplify(b)),
        Sub(a, b) => sub(simplify(a), simplify(b)),
        Mul(a, b) => mul(simplify(a), simplify(b)),
        Div(a, b) => div(simplify(a), simplify(b)),
        Pow(a, p) => pow(simplify(a), p.clone()),
        Log(a) => func(simplify(a), Func::Log),
        Exp(a) => func(simplify(a), Func::Exp),
        Atan(a) => func(simplify(a), Func::Atan),
        Abs(a) => func(simplify(a), Func::Abs),
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    #[test]
    fn folds_constants_and_neutral_elements() {
        let e = parse("0*log(z) + 1*z + (2/3)*3").unwrap().simplify();
        assert_eq!(e.print(), "z + 2");
        let e = parse("z*z*z").unwrap().simplify();
        assert_eq!(e.print(), "z^3");
        let e = parse("(z^(1/3))^3").unwrap().simplify();
        assert_eq!(e.print(), "z");
        let e = parse("--z").unwrap().simplify();
        assert_eq!(e.print(), "z");
    }

    #[test]
    fn fractional_outer_powers_are_kept() {
        let e = parse("(z^2)^(1/2)").unwrap().simplify();
        assert_eq!(e.print(), "(z^2)^(1/2)");
    }
}
