//! Flat key=value configuration, number formatting and the CSV/JSON output
//! formats shared by the command line and the bindings.

use std::collections::BTreeSet;
use std::io::{self, Write};

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::dynamics::{AttractorSample, LyapunovResult};
use crate::error::{Error, Result};
use crate::maps::{HenonMap, State3};
use crate::normal_form::{Classification, NormalFormCoeffs};
use crate::orbit::{DegenerateSolution, HuntResult, Multipliers, PeriodicOrbit};
use crate::sweep::{ProbeHit, SweepCell};

pub const POINTS_HEADER: &str = "iter,x,y,z";
pub const SWEEP_HEADER: &str = "axis1,axis2,class,lambda1,lambda2,lambda3";

/// Shortest representation that reads back to the same `f64`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:?}")
    }
}

/// Six significant digits for human-readable tables.
pub fn fmt_short(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return fmt_num(x);
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        let decimals = (5 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// repeated keys are an error. Order is preserved.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::InvalidParameter(format!("config line {}: expected key=value", lineno + 1)));
        };
        let k = k.trim().to_string();
        if k.is_empty() {
            return Err(Error::InvalidParameter(format!("config line {}: empty key", lineno + 1)));
        }
        if !seen.insert(k.clone()) {
            return Err(Error::InvalidParameter(format!("config key `{k}` repeated")));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

/// Comma-separated reals, as used for guesses and parameter triples.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidParameter(format!("`{t}` is not a finite number")))
        })
        .collect()
}

pub fn write_points_csv<W: Write>(w: &mut W, points: &[State3]) -> io::Result<()> {
    writeln!(w, "{POINTS_HEADER}")?;
    for (i, p) in points.iter().enumerate() {
        writeln!(w, "{},{},{},{}", i, fmt_num(p.x), fmt_num(p.y), fmt_num(p.z))?;
    }
    Ok(())
}

pub fn write_sweep_csv<W: Write>(w: &mut W, cells: &[SweepCell]) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for c in cells {
        let e = c.exponents.map(|e| e.map(fmt_num)).unwrap_or_else(|| ["".into(), "".into(), "".into()]);
        writeln!(w, "{},{},{},{},{},{}", fmt_num(c.axis1), fmt_num(c.axis2), c.class, e[0], e[1], e[2])?;
    }
    Ok(())
}

/// Pretty JSON with a trailing newline. Non-finite numbers become `null`.
pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values are serializable");
    s.push('\n');
    s
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn arr(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

fn complex(c: &Complex64) -> Value {
    json!([num(c.re), num(c.im)])
}

pub fn params_json(map: &HenonMap) -> Value {
    let [m1, m2, b] = map.triple();
    json!({ "m1": num(m1), "m2": num(m2), "b": num(b) })
}

pub fn multipliers_json(m: &Multipliers) -> Value {
    Value::Array(m.values.iter().map(complex).collect())
}

pub fn coeffs_json(c: &NormalFormCoeffs) -> Value {
    json!({
        "a": num(c.a), "a1": num(c.a1), "b": num(c.b),
        "b1": num(c.b1), "b2": num(c.b2), "b3": num(c.b3),
    })
}

pub fn orbit_json(o: &PeriodicOrbit) -> Value {
    json!({
        "map": o.map.kind().name(),
        "period": o.period(),
        "orbit": arr(&o.zs()),
        "params": params_json(&o.map),
        "multipliers": multipliers_json(&o.multipliers()),
        "residual": num(o.residual()),
        "minimal": o.is_minimal(),
    })
}

pub fn degenerate_json(s: &DegenerateSolution, nf: Option<(&NormalFormCoeffs, Classification)>) -> Value {
    json!({
        "map": s.orbit.map.kind().name(),
        "period": s.orbit.period(),
        "orbit": arr(&s.orbit.zs()),
        "params": params_json(&s.orbit.map),
        "multipliers": multipliers_json(&s.multipliers),
        "residual": num(s.max_residual()),
        "jordan_defect": s.jordan_defect.map(num).unwrap_or(Value::Null),
        "coeffs": nf.map(|(c, _)| coeffs_json(c)).unwrap_or(Value::Null),
        "classification": nf.map(|(_, k)| json!(k.name())).unwrap_or(Value::Null),
    })
}

pub fn hunt_json(h: &HuntResult, nf: &[Option<(NormalFormCoeffs, Classification)>]) -> Value {
    let sols: Vec<Value> =
        h.solutions.iter().zip(nf).map(|(s, c)| degenerate_json(s, c.as_ref().map(|(c, k)| (c, *k)))).collect();
    json!({
        "solutions": sols,
        "converged_seeds": h.converged_seeds,
        "non_minimal": h.non_minimal,
        "semi_simple": h.semi_simple,
    })
}

pub fn lyapunov_json(map: Option<&HenonMap>, r: &LyapunovResult) -> Value {
    let mut v = json!({
        "exponents": arr(&r.exponents),
        "sum": num(r.sum()),
        "pseudo_hyperbolicity": num(r.exponents[0] + r.exponents[1]),
        "n_transient": r.n_transient,
        "n_sample": r.n_sample,
        "convergence_halfwidth": num(r.convergence_halfwidth),
        "escaped_at": r.escaped_at,
    });
    if let Some(m) = map {
        v["map"] = json!(m.kind().name());
        v["params"] = params_json(m);
    }
    v
}

pub fn attractor_json(s: &AttractorSample) -> Value {
    json!({
        "n_points": s.points.len(),
        "escaped": s.escaped,
        "component_count": s.component_count,
        "bounding_boxes": s.bounding_boxes.iter().map(|b| json!({"lo": arr(&b.lo), "hi": arr(&b.hi)})).collect::<Vec<_>>(),
    })
}

pub fn fixed_points_json(map: &HenonMap, points: &[(State3, Multipliers)]) -> Value {
    json!({
        "map": map.kind().name(),
        "params": params_json(map),
        "fixed_points": points.iter().map(|(p, m)| json!({
            "z": num(p.z),
            "multipliers": multipliers_json(m),
        })).collect::<Vec<_>>(),
    })
}

pub fn ball_probe_json(center: &[f64; 3], radius: f64, n_probes: usize, hits: &[ProbeHit]) -> Value {
    json!({
        "center": arr(center),
        "radius": num(radius),
        "n_probes": n_probes,
        "hits": hits.iter().map(|h| json!({
            "index": h.index,
            "params": arr(&h.params),
            "exponents": arr(&h.lyapunov.exponents),
            "component_count": h.component_count,
        })).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, 123456.789] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_num(1.0), "1.0");
    }

    #[test]
    fn short_format() {
        assert_eq!(fmt_short(-0.0555731595), "-0.0555732");
        assert_eq!(fmt_short(1.6955049775), "1.69550");
        assert_eq!(fmt_short(1.5e-9), "1.50000e-9");
    }

    #[test]
    fn config_parsing() {
        let c = parse_config("# comment\nm1 = 0.5\n\nb=-1 # trailing\n").unwrap();
        assert_eq!(c, vec![("m1".into(), "0.5".into()), ("b".into(), "-1".into())]);
        assert!(parse_config("m1=1\nm1=2").is_err());
        assert!(parse_config("novalue").is_err());
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list("1, 2.5,-3").unwrap(), vec![1.0, 2.5, -3.0]);
        assert!(parse_list("1,x").is_err());
        assert!(parse_list("nan").is_err());
    }
}
