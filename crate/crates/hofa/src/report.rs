//! Report envelope and JSON views of core results. Object keys are sorted
//! (serde_json's default map), so equal inputs give byte-identical output.

use hofa_core::decompose::{DecompositionResult, RoundRecord};
use hofa_core::forms::PowerFlag;
use hofa_core::nilgroup::HorizontalCharacter;
use hofa_core::orbits::{CountingReport, EquidistReport, PositivityReport};
use hofa_core::patterns::{ApProfile, BhkReport, BhkWeight, GvnReport, GwReport, PatternReport};
use hofa_core::Complex64;
use serde_json::{json, Value};

pub const SCHEMA: &str = "hofa-report/1";

pub fn envelope(command: &str, params: Value, result: Value, elapsed_ms: Option<u128>) -> Value {
    let mut v = json!({
        "schema": SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "params": params,
        "result": result,
    });
    if let Some(ms) = elapsed_ms {
        v["elapsed_ms"] = json!(ms);
    }
    v
}

pub fn error_envelope(command: &str, kind: &str, message: &str, exit_code: i32) -> Value {
    json!({
        "schema": SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "error": { "kind": kind, "message": message, "exit_code": exit_code },
    })
}

pub fn complex(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im, "abs": z.norm() })
}

pub fn power_flag(f: &PowerFlag) -> Value {
    json!({
        "s": f.s,
        "t": f.t,
        "dims": f.dims,
        "basis": f.basis.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "degrees": f.degrees,
        "pivots": f.pivots,
    })
}

pub fn profile_summary(p: &ApProfile) -> Value {
    json!({
        "k": p.k,
        "d_min": p.d_min,
        "d_max": p.d_min + p.counts.len() as i64 - 1,
        "average": p.average(),
    })
}

pub fn profile_csv(p: &ApProfile) -> String {
    let mut s = String::from("d,count,value\n");
    for d in p.differences() {
        s.push_str(&format!("{d},{},{}\n", p.count(d).unwrap(), p.value(d).unwrap()));
    }
    s
}

pub fn pattern(r: &PatternReport) -> Value {
    json!({
        "system": r.system.display(),
        "value": complex(r.value),
        "min_gowers": r.min_gowers,
        "gowers_order": r.k,
        "sup_product": r.sup_product,
        "per_difference": r.per_difference.as_ref().map(profile_summary),
    })
}

pub fn gvn(r: &GvnReport) -> Value {
    json!({ "lhs": r.lhs, "rhs": r.rhs, "s": r.s, "ratio": r.ratio, "asserted": r.asserted, "pass": r.pass })
}

pub fn character(c: &HorizontalCharacter) -> Value {
    json!({ "level": c.level, "m": c.m, "coords": c.coords })
}

pub fn equidist(r: &EquidistReport) -> Value {
    json!({
        "discrepancy": r.discrepancy,
        "per_function": r.per_function.iter().map(|(l, v)| json!({ "function": l, "value": v })).collect::<Vec<_>>(),
        "witness": r.witness.as_ref().map(|w| json!({ "character": character(&w.character), "cinf_norm": w.cinf_norm })),
    })
}

pub fn counting(r: &CountingReport) -> Value {
    json!({
        "empirical": complex(r.empirical),
        "haar": complex(r.haar),
        "stderr": r.stderr,
        "residual": r.residual,
        "points": r.points,
        "volume": r.volume,
        "index": r.index.to_string(),
    })
}

fn round(r: &RoundRecord) -> Value {
    json!({
        "m": r.m,
        "tolerance": r.tolerance,
        "cells": r.cells,
        "energy": r.energy,
        "increment": r.increment,
        "residual_norm": r.residual_norm,
        "steps": r.steps.iter().map(|s| json!({
            "oracle": s.oracle_label,
            "correlation": s.correlation,
            "claimed": s.claimed,
            "arcs": s.arcs,
            "increment": s.increment,
            "cells": s.cells,
        })).collect::<Vec<_>>(),
    })
}

pub fn decomposition(r: &DecompositionResult) -> Value {
    let c = &r.certificates;
    json!({
        "s": r.s,
        "eps": r.eps,
        "m": r.m,
        "grow_m": r.grow_m,
        "complexity": r.complexity,
        "measured": { "l2_sml": r.l2_sml, "uk_unf": r.uk_unf },
        "budgets": { "l2_sml": r.eps, "uk_unf": 1.0 / r.grow_m },
        "certificates": {
            "additivity_error": c.additivity_error,
            "nil_in_unit_interval": c.nil_in_unit_interval,
            "nil_plus_sml_in_unit_interval": c.nil_plus_sml_in_unit_interval,
            "sml_within_budget": c.sml_within_budget,
            "unf_within_budget": c.unf_within_budget,
            "all": c.all(),
        },
        "rounds": r.rounds.iter().map(round).collect::<Vec<_>>(),
    })
}

pub fn weight(w: &BhkWeight) -> Value {
    json!({
        "n": w.n,
        "eps_prime": w.eps_prime,
        "q": w.q,
        "c": w.c,
        "mean": w.mean,
        "sup": w.sup,
        "support_density": w.support_density,
        "normalized": w.normalized,
    })
}

fn positivity(p: &PositivityReport) -> Value {
    json!({ "fourier_side": p.fourier_side, "direct": p.direct, "lower_bound": p.lower_bound, "holds": p.holds })
}

pub fn bhk(r: &BhkReport) -> Value {
    json!({
        "k": r.k,
        "n": r.n,
        "eps": r.eps,
        "alpha": r.alpha,
        "weight": weight(&r.weight),
        "weighted_count": r.weighted_count,
        "threshold": r.threshold,
        "good_difference_fraction": r.good_difference_fraction,
        "strict_good_fraction": r.strict_good_fraction,
        "positivity": r.positivity.iter().map(positivity).collect::<Vec<_>>(),
        "positivity_holds": r.positivity_holds(),
    })
}

pub fn gw(r: &GwReport) -> Value {
    json!({
        "skipped": r.skipped,
        "rows": r.rows.iter().map(|x| json!({ "rho": x.rho, "uniformity": x.uniformity, "lambda": x.lambda })).collect::<Vec<_>>(),
        "spearman": r.spearman,
        "max_ratio": r.max_ratio,
    })
}
