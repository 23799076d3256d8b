//! Input files: sampled functions (JSON or CSV), filtered groups (JSON or
//! a built-in name), polynomial sequences given by Taylor coefficients.

use std::fs;
use std::path::Path;

use hofa_core::funcspace::{eval_expr, parse_expr, DomainSpec, SampledFunction};
use hofa_core::nilgroup::{FilteredGroup, GroupElement, PolySequence};
use hofa_core::{Complex64, Rational};
use serde::Deserialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn domain(kind: &str, n: usize) -> CliResult<DomainSpec> {
    Ok(match kind {
        "interval" => DomainSpec::interval(n)?,
        "cyclic" => DomainSpec::cyclic(n)?,
        other => return Err(CliError::Input(format!("unknown domain `{other}` (interval or cyclic)"))),
    })
}

fn complex_of(v: &Value) -> Option<Complex64> {
    match v {
        Value::Number(x) => x.as_f64().map(|re| Complex64::new(re, 0.0)),
        Value::Array(a) if a.len() == 2 => Some(Complex64::new(a[0].as_f64()?, a[1].as_f64()?)),
        Value::Object(o) => Some(Complex64::new(o.get("re")?.as_f64()?, o.get("im").and_then(Value::as_f64).unwrap_or(0.0))),
        _ => None,
    }
}

/// `{"domain": "cyclic", "n": 8, "values": [0.5, [0.1, -0.2], ...], "bound": 1}`
/// or `{"domain": {"kind": "cyclic", "N": 8}, "values": [...]}`; the size
/// defaults to the number of values and the kind to `fallback`.
pub fn parse_function_json(text: &str, fallback: &str) -> CliResult<SampledFunction> {
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::Input(format!("function JSON: {e}")))?;
    let values = v
        .get("values")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::Input("function JSON needs a `values` array".into()))?;
    let vals: Vec<Complex64> = values
        .iter()
        .enumerate()
        .map(|(i, x)| complex_of(x).ok_or_else(|| CliError::Input(format!("value {i} is not a number or [re, im] pair"))))
        .collect::<CliResult<_>>()?;
    let size = |o: &Value| ["n", "N"].iter().find_map(|k| o.get(*k).and_then(Value::as_u64));
    let (kind, n) = match v.get("domain") {
        Some(Value::Object(_)) => {
            let d = &v["domain"];
            (d.get("kind").and_then(Value::as_str).unwrap_or(fallback), size(d))
        }
        Some(Value::String(k)) => (k.as_str(), size(&v)),
        Some(_) => return Err(CliError::Input("`domain` must be a string or {kind, N}".into())),
        None => (fallback, size(&v)),
    };
    let n = n.map(|n| n as usize).unwrap_or(vals.len());
    let dom = domain(kind, n)?;
    let f = match v.get("bound").and_then(Value::as_f64) {
        Some(b) => SampledFunction::with_bound(dom, vals, b)?,
        None => SampledFunction::with_auto_bound(dom, vals)?,
    };
    Ok(f)
}

/// Rows `n,re[,im]` with an optional header; the n column must list the
/// domain points in order.
pub fn parse_function_csv(text: &str, kind: &str) -> CliResult<SampledFunction> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows: Vec<(i64, Complex64)> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input(format!("CSV: {e}")))?;
        let num = |j: usize| rec.get(j).and_then(|s| s.parse::<f64>().ok());
        let Some(idx) = rec.get(0).and_then(|s| s.parse::<i64>().ok()) else {
            if line == 0 {
                continue;
            }
            return Err(CliError::Input(format!("CSV line {}: bad index", line + 1)));
        };
        let re = num(1).ok_or_else(|| CliError::Input(format!("CSV line {}: bad real part", line + 1)))?;
        let im = if rec.len() > 2 { num(2).ok_or_else(|| CliError::Input(format!("CSV line {}: bad imaginary part", line + 1)))? } else { 0.0 };
        rows.push((idx, Complex64::new(re, im)));
    }
    let dom = domain(kind, rows.len())?;
    for (i, (idx, _)) in rows.iter().enumerate() {
        if *idx != dom.point(i) {
            return Err(CliError::Input(format!("CSV row {} has n = {idx}, expected {}", i + 1, dom.point(i))));
        }
    }
    Ok(SampledFunction::with_auto_bound(dom, rows.into_iter().map(|r| r.1).collect())?)
}

pub fn read_function(path: &Path, kind: &str) -> CliResult<SampledFunction> {
    let text = read_text(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => parse_function_csv(&text, kind),
        _ => parse_function_json(&text, kind),
    }
}

/// A function from `--input` or `--expr` (with `--n` and `--domain`).
pub fn load_function(input: Option<&Path>, expr: Option<&str>, kind: &str, n: Option<usize>) -> CliResult<SampledFunction> {
    match (input, expr) {
        (Some(p), None) => read_function(p, kind),
        (None, Some(e)) => {
            let n = n.ok_or_else(|| CliError::Input("--expr needs --n".into()))?;
            Ok(eval_expr(&parse_expr(e)?, domain(kind, n)?)?)
        }
        (Some(_), Some(_)) => Err(CliError::Input("give either --input or --expr, not both".into())),
        (None, None) => Err(CliError::Input("a function is required (--input or --expr)".into())),
    }
}

pub fn function_to_json(f: &SampledFunction) -> Value {
    let (kind, n) = match f.domain() {
        DomainSpec::Interval(n) => ("interval", n),
        DomainSpec::Cyclic(n) => ("cyclic", n),
    };
    serde_json::json!({
        "domain": kind,
        "n": n,
        "bound": f.bound(),
        "values": f.values().iter().map(|v| serde_json::json!([v.re, v.im])).collect::<Vec<_>>(),
    })
}

/// Columns n, then re and im of each function.
pub fn functions_to_csv(names: &[&str], fs: &[&SampledFunction]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["n".to_string()];
    for n in names {
        header.push(format!("{n}_re"));
        header.push(format!("{n}_im"));
    }
    w.write_record(&header).map_err(|e| CliError::Input(e.to_string()))?;
    let dom = fs[0].domain();
    for i in 0..fs[0].len() {
        let mut row = vec![dom.point(i).to_string()];
        for f in fs {
            row.push(f.values()[i].re.to_string());
            row.push(f.values()[i].im.to_string());
        }
        w.write_record(&row).map_err(|e| CliError::Input(e.to_string()))?;
    }
    String::from_utf8(w.into_inner().map_err(|e| CliError::Input(e.to_string()))?).map_err(|e| CliError::Input(e.to_string()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupFile {
    #[serde(default)]
    name: Option<String>,
    dim: usize,
    #[serde(default)]
    step: Option<usize>,
    #[serde(alias = "filtrationDims")]
    filtration: Vec<usize>,
    #[serde(default, alias = "structureConstants")]
    brackets: Vec<(usize, usize, usize, i64)>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

/// `{"dim": 3, "filtration": [3, 1], "brackets": [[0, 1, 2, 1]]}`: bracket
/// entries (i, j, k, c) are zero-based and mean [X_i, X_j] = c X_k + ….
/// The keys `filtrationDims`, `structureConstants` and `step` are accepted too.
pub fn parse_group_json(text: &str) -> CliResult<FilteredGroup> {
    let g: GroupFile = serde_json::from_str(text).map_err(|e| CliError::Input(format!("group JSON: {e}")))?;
    if g.step.is_some_and(|s| s != g.filtration.len()) {
        return Err(CliError::Input(format!("step {} disagrees with {} filtration dimensions", g.step.unwrap(), g.filtration.len())));
    }
    let mut group = FilteredGroup::new(g.dim, g.filtration, &g.brackets)?;
    if let Some(labels) = g.labels {
        if labels.len() != g.dim {
            return Err(CliError::Input(format!("{} labels for dimension {}", labels.len(), g.dim)));
        }
        group.labels = labels;
    }
    if let Some(n) = g.name {
        group.name = n;
    }
    Ok(group)
}

/// A built-in name (`heisenberg`, `circle`, `torus(m)`, `torus(m,s)`) or a
/// path to a group JSON file.
pub fn load_group(spec: &str) -> CliResult<FilteredGroup> {
    let path = Path::new(spec);
    if spec.ends_with(".json") || path.is_file() {
        return parse_group_json(&read_text(path)?);
    }
    Ok(FilteredGroup::builtin(spec)?)
}

/// Exact rational from `p/q`, an integer or a plain decimal.
pub fn parse_rational(s: &str) -> CliResult<Rational> {
    let s = s.trim();
    let bad = || CliError::Input(format!("`{s}` is not a rational number"));
    if s.contains('/') {
        return s.parse::<Rational>().map_err(|_| bad());
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{}{}{}", if neg { "-" } else { "" }, if int.is_empty() { "0" } else { int }, frac);
    let text = format!("{digits}/1{}", "0".repeat(frac.len()));
    text.parse::<Rational>().map_err(|_| bad())
}

fn rational_of(v: &Value) -> CliResult<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(x) => parse_rational(&x.to_string()),
        _ => Err(CliError::Input(format!("`{v}` is not a rational coordinate"))),
    }
}

/// Taylor coefficients `g0; g1; g2`, each a comma-separated coordinate
/// list, or a JSON file `{"taylor": [["0", "0", "0"], ["1/2", 0.25, 0]]}`.
pub fn parse_sequence(group: &FilteredGroup, text: &str) -> CliResult<PolySequence<Rational>> {
    let rows: Vec<Vec<Rational>> = if text.trim_end().ends_with(".json") {
        let path = Path::new(text.trim());
        let v: Value = serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Input(format!("sequence JSON: {e}")))?;
        let taylor = v
            .get("taylor")
            .and_then(Value::as_array)
            .ok_or_else(|| CliError::Input("sequence JSON needs a `taylor` array".into()))?;
        taylor
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| CliError::Input("each Taylor coefficient is a coordinate array".into()))?
                    .iter()
                    .map(rational_of)
                    .collect()
            })
            .collect::<CliResult<_>>()?
    } else {
        text.split(';').map(|part| part.split(',').map(parse_rational).collect()).collect::<CliResult<_>>()?
    };
    let mut taylor = Vec::new();
    for (i, coords) in rows.into_iter().enumerate() {
        if coords.len() != group.dim() {
            return Err(CliError::Input(format!("coefficient g{i} has {} coordinates, the group has {}", coords.len(), group.dim())));
        }
        taylor.push(GroupElement { coords });
    }
    Ok(PolySequence::new(group.clone(), taylor)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hofa_core::scalar::rat;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_rational("3").unwrap(), rat(3, 1));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1e3").is_err());
    }

    #[test]
    fn function_json_forms() {
        let f = parse_function_json(r#"{"domain": "cyclic", "values": [0.5, [0, 1], {"re": -1}]}"#, "interval").unwrap();
        assert_eq!(f.domain(), DomainSpec::Cyclic(3));
        assert_eq!(f.values()[1], Complex64::new(0.0, 1.0));
        assert!(parse_function_json(r#"{"values": [2.0], "bound": 1}"#, "interval").is_err());
        assert!(parse_function_json(r#"{"values": ["x"]}"#, "interval").is_err());
    }

    #[test]
    fn function_csv_forms() {
        let f = parse_function_csv("n,re,im\n1,0.5,0\n2,0.25,0.5\n", "interval").unwrap();
        assert_eq!(f.domain(), DomainSpec::Interval(2));
        assert!(parse_function_csv("0,1\n2,1\n", "cyclic").is_err());
        let back = functions_to_csv(&["f"], &[&f]).unwrap();
        assert!(back.starts_with("n,f_re,f_im\n1,0.5,0\n"));
    }

    #[test]
    fn groups_and_sequences() {
        let g = parse_group_json(r#"{"dim": 3, "filtration": [3, 1], "brackets": [[0, 1, 2, 1]], "labels": ["a", "b", "c"]}"#).unwrap();
        assert_eq!(g.dim(), 3);
        assert_eq!(g.labels[2], "c");
        assert!(parse_group_json(r#"{"dim": 3, "filtration": [3], "brackets": [[0, 1, 2, 1]]}"#).is_err());
        let seq = parse_sequence(&g, "0,0,0; 1/2,1/3,0").unwrap();
        assert_eq!(seq.taylor().len(), 2);
        assert!(parse_sequence(&g, "0,0").is_err());
        assert!(load_group("heisenberg").is_ok());
    }
}
