use num_traits::Signed;

use super::{Expr, Node, Number};

fn prec(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Pow(..) => 3,
        _ => 4,
    }
}

fn number(n: &Number) -> String {
    let r = n.exact();
    if r.is_integer() && !r.is_negative() {
        r.numer().to_string()
    } else if r.is_integer() {
        format!("({})", r.numer())
    } else {
        format!("({}/{})", r.numer(), r.denom())
    }
}

fn wrap(e: &Expr, parens: bool) -> String {
    let s = print(e);
    if parens {
        format!("({s})")
    } else {
        s
    }
}

fn binary(a: &Expr, op: &str, b: &Expr, p: u8) -> String {
    format!("{}{op}{}", wrap(a, prec(a) < p), wrap(b, prec(b) <= p))
}

/// Infix form that parses back to the same tree (except for
/// antiderivative nodes, which print in a diagnostic notation).
pub(super) fn print(e: &Expr) -> String {
    match e.node() {
        Node::Num(n) => number(n),
        Node::Pi => "pi".into(),
        Node::Var => "z".into(),
        Node::Neg(a) => format!("(-{})", wrap(a, prec(a) < 4)),
        Node::Add(a, b) => binary(a, " + ", b, 1),
        Node::Sub(a, b) => binary(a, " - ", b, 1),
        Node::Mul(a, b) => binary(a, "*", b, 2),
        // a bare `p/q` would lex as one rational literal
        Node::Div(a, b) if matches!(b.node(), Node::Num(_)) => binary(a, " / ", b, 2),
        Node::Div(a, b) => binary(a, "/", b, 2),
        Node::Pow(a, p) => format!("{}^{}", wrap(a, prec(a) < 4), number(p)),
        Node::Log(a) => format!("log({})", print(a)),
        Node::Exp(a) => format!("exp({})", print(a)),
        Node::Atan(a) => format!("atan({})", print(a)),
        Node::Abs(a) => format!("abs({})", print(a)),
        Node::Integral(p) => p.describe(),
    }
}
