//! Browser bindings: each export takes plain numbers and strings and returns
//! a JSON string for the page to draw.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use impbounds::consistency::{natural_extension, upper_extension};
use impbounds::jensen::{self, FunctionSpec};
use impbounds::oracle::{certify, exact_envelope};
use impbounds::tailbounds::{self, Side};
use impbounds::{Assessment, Bound, Gamble, Partition};

const CURVE_POINTS: usize = 120;

const COHERENT_LABELS: [&str; 4] = [
    "lpr(X <= upr(X) - eps)",
    "lpr(X <= lpr(X) - eps)",
    "lpr(X >= lpr(X) + eps)",
    "lpr(X >= upr(X) + eps)",
];

fn parse_values(text: &str) -> Result<Vec<f64>, String> {
    let v = text
        .split([',', ' ', ';'])
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("not a number: {s}")))
        .collect::<Result<Vec<_>, _>>()?;
    if v.len() < 2 {
        return Err("give at least two values".into());
    }
    Ok(v)
}

/// One gamble `X` with a lower prevision and an optional upper one (NaN for
/// none).
fn assessment(values: &str, lower: f64, upper: f64) -> Result<Assessment, String> {
    let v = parse_values(values)?;
    let p = Partition::numbered(v.len()).map_err(|e| e.to_string())?;
    let x = Gamble::new(&p, v).map_err(|e| e.to_string())?;
    let mut a = Assessment::new(&p);
    a.push_lower("X", x.clone(), lower).map_err(|e| e.to_string())?;
    if upper.is_finite() {
        a.push_upper("X", x, upper).map_err(|e| e.to_string())?;
    }
    Ok(a)
}

fn function(name: &str, x: &Gamble) -> Result<FunctionSpec, String> {
    let (lo, hi) = (x.inf() - 1.0, x.sup() + 1.0);
    let f = match name {
        "square" => FunctionSpec::square(lo, hi),
        "exp" => FunctionSpec::exp(lo, hi),
        "abs" => FunctionSpec::abs_power(1.0, lo, hi),
        "neg-square" => FunctionSpec::square(lo, hi).map(|f| f.negate()),
        "sqrt" if x.inf() >= 0.0 => FunctionSpec::sqrt(0.0, hi),
        "sqrt" => return Err("sqrt needs nonnegative values".into()),
        _ => return Err(format!("unknown function {name}")),
    };
    f.map_err(|e| e.to_string())
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// Plain and improved Jensen bounds on `f(X)` next to the exact envelope,
/// with a sampled graph of `f` for drawing.
pub fn jensen_view(values: &str, lower: f64, upper: f64, f_name: &str) -> Result<Value, String> {
    let a = assessment(values, lower, upper)?;
    let x = a.gamble("X").map_err(|e| e.to_string())?;
    let f = function(f_name, &x)?;
    let plain = jensen::jensen_for(&a, "X", &f).map_err(|e| e.to_string())?;
    let (improved, _) = jensen::improved_for(&a, "X", &f).map_err(|e| e.to_string())?;
    let fx = x.apply(&f).map_err(|e| e.to_string())?;
    let exact = exact_envelope(&a, &fx).map_err(|e| e.to_string())?;
    let (lo, hi) = x.bounds();
    let graph: Vec<[f64; 2]> = (0..=CURVE_POINTS)
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / CURVE_POINTS as f64;
            [t, f.eval(t)]
        })
        .collect();
    let atoms: Vec<[f64; 2]> = x.values().iter().map(|&v| [v, f.eval(v)]).collect();
    let plain: Vec<Value> = plain
        .iter()
        .filter_map(|r| {
            r.bound().map(|b| json!({ "rule": r.rule(), "target": r.target().describe(), "direction": r.direction(), "bound": b }))
        })
        .collect();
    Ok(json!({
        "function": f.name(),
        "lpr_x": improved.lpr_x,
        "upr_x": improved.upr_x,
        "graph": graph,
        "atoms": atoms,
        "plain": plain,
        "improved": to_value(&improved),
        "exact": { "lower": exact.lower, "upper": exact.upper },
    }))
}

/// Tail bounds against `eps`: the four coherent Cantelli bounds, the
/// conjugate one and, for nonnegative `X`, upper Markov at `upr(X) + eps`.
/// Every point carries the exact value of the bounded quantity.
pub fn tail_view(values: &str, lower: f64, upper: f64, eps_max: f64) -> Result<Value, String> {
    if eps_max.is_nan() || eps_max <= 0.0 {
        return Err("eps max must be positive".into());
    }
    let a = assessment(values, lower, upper)?;
    let x = a.gamble("X").map_err(|e| e.to_string())?;
    let vr = tailbounds::variances(&a, "X").map_err(|e| e.to_string())?;
    let upr = upper_extension(&a, &x).map_err(|e| e.to_string())?;
    let mut series: Vec<(String, Vec<Value>)> = Vec::new();
    let mut add = |label: &str, r: &dyn Bound, eps: f64| -> Result<(), String> {
        let c = certify(&a, r).map_err(|e| e.to_string())?;
        let key = format!("{}: {label}", r.rule());
        let point = json!({ "eps": eps, "bound": r.bound(), "exact": c.exact, "valid": c.valid });
        match series.iter_mut().find(|(k, _)| *k == key) {
            Some((_, pts)) => pts.push(point),
            None => series.push((key, vec![point])),
        }
        Ok(())
    };
    for i in 1..=CURVE_POINTS / 2 {
        let eps = eps_max * i as f64 / (CURVE_POINTS / 2) as f64;
        let coherent = tailbounds::cantelli_coherent_with(&a, "X", eps, &vr).map_err(|e| e.to_string())?;
        for (label, r) in COHERENT_LABELS.iter().zip(&coherent) {
            add(label, r, eps)?;
        }
        let conj = tailbounds::conjugate_cantelli_for(&a, "X", eps, &vr).map_err(|e| e.to_string())?;
        add("upr(X >= lpr(X) - eps)", &conj, eps)?;
        if x.is_nonnegative() {
            let m = tailbounds::markov_for(&a, "X", upr + eps, Side::Upper).map_err(|e| e.to_string())?;
            add("upr(X >= upr(X) + eps)", &m, eps)?;
        }
    }
    Ok(json!({
        "lower_variance": vr.lower_variance,
        "upper_variance": vr.upper_variance,
        "series": series.into_iter().map(|(k, pts)| json!({ "name": k, "points": pts })).collect::<Vec<_>>(),
    }))
}

/// Markov and Cantelli bounds on the event `X >= upr(X) + eps` as functions
/// of `eps`, with the crossover point.
pub fn crossover_view(lpr_x: f64, upr_x: f64, lvx: f64, eps_max: f64) -> Result<Value, String> {
    if eps_max.is_nan() || eps_max <= 0.0 {
        return Err("eps max must be positive".into());
    }
    let mut points = Vec::with_capacity(CURVE_POINTS);
    let mut eps2 = f64::NAN;
    for i in 1..=CURVE_POINTS {
        let eps = eps_max * i as f64 / CURVE_POINTS as f64;
        let r = tailbounds::compare_markov_cantelli(lpr_x, upr_x, lvx, eps, true).map_err(|e| e.to_string())?;
        eps2 = r.eps2;
        points.push(json!({ "eps": eps, "markov": r.markov_bound, "cantelli": r.cantelli_bound, "preferred": r.preferred_for_eps }));
    }
    Ok(json!({ "eps2": eps2, "points": points }))
}

/// Natural extension of `X` for the status line.
pub fn extension_view(values: &str, lower: f64, upper: f64) -> Result<Value, String> {
    let a = assessment(values, lower, upper)?;
    let x = a.gamble("X").map_err(|e| e.to_string())?;
    let l = natural_extension(&a, &x).map_err(|e| e.to_string())?;
    let u = upper_extension(&a, &x).map_err(|e| e.to_string())?;
    Ok(json!({ "lpr_x": l, "upr_x": u }))
}

fn wrap(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn jensen(values: &str, lower: f64, upper: f64, f_name: &str) -> Result<String, JsValue> {
    wrap(jensen_view(values, lower, upper, f_name))
}

#[wasm_bindgen]
pub fn tails(values: &str, lower: f64, upper: f64, eps_max: f64) -> Result<String, JsValue> {
    wrap(tail_view(values, lower, upper, eps_max))
}

#[wasm_bindgen]
pub fn crossover(lpr_x: f64, upr_x: f64, lvx: f64, eps_max: f64) -> Result<String, JsValue> {
    wrap(crossover_view(lpr_x, upr_x, lvx, eps_max))
}

#[wasm_bindgen]
pub fn extension(values: &str, lower: f64, upper: f64) -> Result<String, JsValue> {
    wrap(extension_view(values, lower, upper))
}
