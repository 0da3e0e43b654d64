//! JSON and CSV formats.

use serde_json::{json, Value};

use crate::curvature::CurvatureRow;
use crate::error::{KlscError, Result};
use crate::expr::parse;
use crate::geometry::HermitianMetricRadial;
use crate::klsc::AdmissiblePair;
use crate::radial::{Annulus, Basepoint, Normalization};

fn invalid(msg: impl Into<String>) -> KlscError {
    KlscError::InvalidInput(msg.into())
}

pub fn annulus_to_json(a: &Annulus) -> Value {
    json!([a.alpha(), a.beta().map_or(Value::from("inf"), Value::from)])
}

pub fn annulus_from_json(v: &Value) -> Result<Annulus> {
    let arr = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| invalid("annulus must be [alpha, beta]"))?;
    let alpha = arr[0].as_f64().ok_or_else(|| invalid("alpha must be a number"))?;
    let beta = match &arr[1] {
        Value::String(s) if s == "inf" => None,
        b => Some(b.as_f64().ok_or_else(|| invalid("beta must be a number or \"inf\""))?),
    };
    Annulus::new(alpha, beta)
}

fn field<'a>(v: &'a Value, name: &str) -> Result<&'a Value> {
    v.get(name).ok_or_else(|| invalid(format!("missing field `{name}`")))
}

fn dimension(v: &Value) -> Result<usize> {
    let n = field(v, "n")?.as_u64().ok_or_else(|| invalid("n must be a positive integer"))?;
    usize::try_from(n).map_err(|_| invalid("n too large"))
}

fn expr_field(v: &Value, name: &str) -> Result<crate::expr::Expr> {
    parse(field(v, name)?.as_str().ok_or_else(|| invalid(format!("`{name}` must be an expression string")))?)
}

pub fn metric_to_json(m: &HermitianMetricRadial) -> Value {
    json!({
        "n": m.n(),
        "annulus": annulus_to_json(&m.domain()),
        "E": m.e().print(),
        "F": m.f().print(),
    })
}

pub fn metric_from_json(v: &Value) -> Result<HermitianMetricRadial> {
    HermitianMetricRadial::new(
        dimension(v)?,
        annulus_from_json(field(v, "annulus")?)?,
        expr_field(v, "E")?,
        expr_field(v, "F")?,
    )
}

pub fn basepoint_from_json(v: Option<&Value>) -> Result<Basepoint> {
    match v {
        None => Ok(Basepoint::Canonical),
        Some(Value::String(s)) if s == "canonical" => Ok(Basepoint::Canonical),
        Some(Value::String(s)) if s == "inf" => Ok(Basepoint::Infinity),
        Some(b) => Ok(Basepoint::Finite(
            b.as_f64().ok_or_else(|| invalid("basepoint must be a number, \"inf\" or \"canonical\""))?,
        )),
    }
}

pub fn basepoint_to_json(b: Basepoint) -> Value {
    match b {
        Basepoint::Finite(x) => Value::from(x),
        Basepoint::Infinity => Value::from("inf"),
        Basepoint::Canonical => Value::from("canonical"),
    }
}

/// `{"n", "F", "C", "annulus", "basepoint"}`; an optional `"basevalue"`
/// sets the value of the antiderivative at the basepoint.
pub fn pair_from_json(v: &Value) -> Result<AdmissiblePair> {
    let c = field(v, "C")?.as_f64().ok_or_else(|| invalid("C must be a number"))?;
    let norm = Normalization {
        basepoint: basepoint_from_json(v.get("basepoint"))?,
        value: v
            .get("basevalue")
            .map_or(Some(0.0), Value::as_f64)
            .ok_or_else(|| invalid("basevalue must be a number"))?,
    };
    AdmissiblePair::with_normalization(
        dimension(v)?,
        annulus_from_json(field(v, "annulus")?)?,
        expr_field(v, "F")?,
        c,
        norm,
    )
}

pub fn pair_to_json(p: &AdmissiblePair) -> Value {
    json!({
        "n": p.n,
        "F": p.f.print(),
        "C": p.c,
        "annulus": annulus_to_json(&p.domain),
        "basepoint": basepoint_to_json(p.normalization.basepoint),
        "basevalue": p.normalization.value,
    })
}

/// `z,S,S_C,defect` with a header row and 17 significant digits.
pub fn curvature_csv(rows: &[CurvatureRow]) -> String {
    let mut out = String::from("z,S,S_C,defect\n");
    for r in rows {
        // `+ 0.0` turns -0 into 0
        out.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", r.z + 0.0, r.s + 0.0, r.s_c + 0.0, r.defect + 0.0));
    }
    out
}

pub fn parse_curvature_csv(text: &str) -> Result<Vec<CurvatureRow>> {
    let mut lines = text.lines();
    if lines.next() != Some("z,S,S_C,defect") {
        return Err(invalid("missing curvature CSV header"));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let v: Vec<f64> = l
                .split(',')
                .map(|x| x.parse::<f64>().map_err(|_| invalid(format!("bad number `{x}`"))))
                .collect::<Result<_>>()?;
            if v.len() != 4 {
                return Err(invalid("expected 4 columns"));
            }
            Ok(CurvatureRow { z: v[0], s: v[1], s_c: v[2], defect: v[3] })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_round_trip() {
        let v: Value = serde_json::from_str(r#"{"n":2,"annulus":[0,"inf"],"E":"1/(1+z)^2","F":"1/(1+z)"}"#).unwrap();
        let m = metric_from_json(&v).unwrap();
        let back = metric_to_json(&m);
        let again = metric_from_json(&back).unwrap();
        assert_eq!(again.e(), m.e());
        assert_eq!(back["annulus"], json!([0.0, "inf"]));
    }

    #[test]
    fn pair_parsing() {
        let v: Value =
            serde_json::from_str(r#"{"n":2,"F":"z+z^2","C":0,"annulus":[0,"inf"],"basepoint":"canonical"}"#).unwrap();
        let p = pair_from_json(&v).unwrap();
        assert_eq!(p.normalization.basepoint, Basepoint::Canonical);
        assert!(pair_from_json(&json!({"n":2,"F":"q","C":0,"annulus":[0,1]})).is_err());
        assert!(pair_from_json(&json!({"n":2,"F":"z","C":0,"annulus":[2,1]})).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let rows = vec![CurvatureRow { z: 0.1, s: 1.0 / 3.0, s_c: std::f64::consts::PI, defect: -1e-17 }];
        let text = curvature_csv(&rows);
        assert_eq!(parse_curvature_csv(&text).unwrap(), rows);
    }
}
