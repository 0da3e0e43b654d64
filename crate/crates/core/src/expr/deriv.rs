use super::{Expr, Node, Number};

/// Symbolic d/dz. The result is built through the simplifying
/// constructors, so it is already in normal form.
pub(super) fn derivative(e: &Expr) -> Expr {
    use Node::*;
    match e.node() {
        Num(_) | Pi => Expr::int(0),
        Var => Expr::int(1),
        Neg(a) => derivative(a).neg(),
        Add(a, b) => derivative(a).add(&derivative(b)),
        Sub(a, b) => derivative(a).sub(&derivative(b)),
        Mul(a, b) => derivative(a).mul(b).add(&a.mul(&derivative(b))),
        Div(a, b) => {
            let da = derivative(a);
            let db = derivative(b);
            if db.is_zero() {
                da.div(b)
            } else {
                da.mul(b).sub(&a.mul(&db)).div(&b.powi(2))
            }
        }
        Pow(a, p) => {
            let da = derivative(a);
            if da.is_zero() {
                return Expr::int(0);
            }
            let pm1 = Number::new(p.exact() - num_rational::BigRational::from_integer(1.into()));
            Expr::num(p.clone()).mul(&a.pow_number(pm1)).mul(&da)
        }
        Log(a) => derivative(a).div(a),
        Exp(a) => e.mul(&derivative(a)),
        Atan(a) => derivative(a).div(&Expr::int(1).add(&a.powi(2))),
        Abs(a) => a.div(e).mul(&derivative(a)),
        Integral(p) => p.integrand().clone(),
    }
}
