use std::collections::BTreeSet;

use serde::Serialize;

use super::config::RunConfig;
use crate::bracket::{random_test_function, trial_rng};
use crate::error::Error;
use crate::expr::JetExpr;
use crate::geometry::{sample_points, BracketSpec, PointGeometry};

/// One configuration problem, located by its dotted path in the config.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub location: String,
    pub message: String,
}

#[derive(Default)]
struct Sink {
    seen: BTreeSet<String>,
    out: Vec<Diagnostic>,
}

impl Sink {
    /// Keeps the first message per location.
    fn push(&mut self, location: impl Into<String>, message: impl Into<String>) {
        let location = location.into();
        if self.seen.insert(location.clone()) {
            self.out.push(Diagnostic { location, message: message.into() });
        }
    }
}

/// Per-axis lattice over the subchart box, edges included.
fn lattice(lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    let per: usize = if lo.len() <= 3 { 9 } else { 3 };
    let total = per.pow(lo.len() as u32);
    (0..total)
        .map(|mut k| {
            lo.iter()
                .zip(hi)
                .map(|(a, b)| {
                    let i = k % per;
                    k /= per;
                    a + (b - a) * i as f64 / (per - 1) as f64
                })
                .collect()
        })
        .collect()
}

fn fmt_point(z: &[f64]) -> String {
    let parts: Vec<String> = z.iter().map(|v| format!("{v}")).collect();
    format!("({})", parts.join(", "))
}

/// Parsed bracket entries with their config locations.
fn bracket_entries(cfg: &RunConfig, sink: &mut Sink) -> Option<Vec<(String, JetExpr)>> {
    let n = cfg.chart.n;
    let b = &cfg.bracket;
    let mut out = Vec::new();
    let mut ok = true;
    let mut square = |m: &Vec<Vec<String>>, name: &str, out: &mut Vec<(String, JetExpr)>, sink: &mut Sink| {
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            sink.push(format!("bracket.{name}"), format!("must be a {n}x{n} matrix"));
            ok = false;
            return;
        }
        for (i, r) in m.iter().enumerate() {
            for (j, s) in r.iter().enumerate() {
                let loc = format!("bracket.{name}[{i}][{j}]");
                match cfg.parser().parse(s) {
                    Ok(e) => out.push((loc, e)),
                    Err(e) => {
                        sink.push(loc, format!("`{s}`: {e}"));
                        ok = false;
                    }
                }
            }
        }
    };
    square(&b.g, "g", &mut out, sink);
    square(&b.w, "w", &mut out, sink);
    if let Some(c) = &b.gamma {
        if c.len() != n || c.iter().any(|m| m.len() != n || m.iter().any(|r| r.len() != n)) {
            sink.push("bracket.gamma", format!("must be {n}x{n}x{n}"));
            ok = false;
        } else {
            for (j, m) in c.iter().enumerate() {
                for (s, r) in m.iter().enumerate() {
                    for (k, src) in r.iter().enumerate() {
                        let loc = format!("bracket.gamma[{j}][{s}][{k}]");
                        match cfg.parser().parse(src) {
                            Ok(e) => out.push((loc, e)),
                            Err(e) => {
                                sink.push(loc, format!("`{src}`: {e}"));
                                ok = false;
                            }
                        }
                    }
                }
            }
        }
    }
    ok.then_some(out)
}

fn chart(cfg: &RunConfig, sink: &mut Sink) -> bool {
    let c = &cfg.chart;
    let n = c.n;
    let mut ok = true;
    for (a, h) in c.constraints.iter().enumerate() {
        if h.normal.len() != n {
            sink.push(format!("chart.constraints[{a}].normal"), format!("needs {n} entries"));
            ok = false;
        } else if h.normal.iter().all(|v| *v == 0.0) || h.normal.iter().any(|v| !v.is_finite()) {
            sink.push(format!("chart.constraints[{a}].normal"), "must be finite and nonzero");
            ok = false;
        }
    }
    let s = &c.subchart;
    if s.lo.len() != n || s.hi.len() != n {
        sink.push("chart.subchart", format!("lo and hi need {n} entries"));
        ok = false;
    } else if s.lo.iter().zip(&s.hi).any(|(a, b)| a >= b || !a.is_finite() || !b.is_finite()) {
        sink.push("chart.subchart", "needs finite lo < hi on every axis");
        ok = false;
    }
    if !(c.margin >= 0.0 && c.margin.is_finite()) {
        sink.push("chart.margin", "must be finite and non-negative");
        ok = false;
    }
    if let Some(b) = &c.base {
        if b.len() != n {
            sink.push("chart.base", format!("needs {n} entries"));
            ok = false;
        }
    }
    if ok {
        let base = cfg.base();
        if !cfg.omega().contains(&base, c.margin) {
            sink.push("chart.base", format!("{} is not deeper than the margin {} inside the chart", fmt_point(&base), c.margin));
            ok = false;
        }
    }
    ok
}

/// Every problem found in `cfg`. `needs_seed` marks commands that draw
/// random samples.
pub fn validate(cfg: &RunConfig, needs_seed: bool) -> Vec<Diagnostic> {
    let mut sink = Sink::default();
    let n = cfg.chart.n;
    if !(1..=8).contains(&n) {
        sink.push("chart.n", format!("must be between 1 and 8, got {n}"));
        return sink.out;
    }
    if needs_seed && cfg.seed.is_none() {
        sink.push("seed", "required for randomized suites");
    }
    let t = &cfg.tolerances;
    for (name, v) in [("geometry", t.geometry), ("skew", t.skew), ("jacobi", t.jacobi), ("gateaux", t.gateaux), ("oracle", t.oracle)] {
        if !(v > 0.0 && v.is_finite()) {
            sink.push(format!("tolerances.{name}"), format!("must be positive, got {v}"));
        }
    }
    if let Err(e) = cfg.grid() {
        sink.push("grid", e.to_string());
    }
    if cfg.grid.eps_tail.is_nan() || cfg.grid.eps_tail <= 0.0 {
        sink.push("grid.eps_tail", "must be positive");
    }
    let su = &cfg.suites;
    if su.samples == 0 || su.trials == 0 {
        sink.push("suites", "samples and trials must be positive");
    }
    if !(su.amplitude > 0.0 && su.amplitude.is_finite()) {
        sink.push("suites.amplitude", "must be positive");
    }
    let chart_ok = chart(cfg, &mut sink);
    let entries = bracket_entries(cfg, &mut sink);

    let spec = match &entries {
        Some(_) if chart_ok => match cfg.spec() {
            Ok(s) => Some(s),
            Err(e) => {
                sink.push("bracket", e.to_string());
                None
            }
        },
        _ => None,
    };
    if let (Some(spec), Some(entries)) = (&spec, &entries) {
        points(cfg, spec, entries, &mut sink);
    }

    for name in cfg.functionals.keys() {
        if let Err(e) = cfg.functional(name) {
            sink.push(format!("functionals.{name}"), e.to_string());
        }
    }
    if chart_ok {
        for name in cfg.test_functions.keys() {
            let loc = format!("test_functions.{name}");
            let t = &cfg.test_functions[name];
            if t.components.len() != n || t.base.as_ref().is_some_and(|b| b.len() != n) {
                sink.push(loc, format!("needs {n} components"));
                continue;
            }
            if let Err(e) = cfg.test_function(name) {
                sink.push(loc, e.to_string());
            }
        }
    }
    if let (Some(spec), Ok(setup)) = (&spec, cfg.trial_setup(cfg.seed.unwrap_or(0))) {
        if sink.out.is_empty() {
            if let Err(e) = random_test_function(spec, &setup, &mut trial_rng(setup.seed, 0)) {
                sink.push("suites.amplitude", format!("random test functions do not fit the chart: {e}"));
            }
        }
    }
    sink.out
}

fn points(cfg: &RunConfig, spec: &BracketSpec, entries: &[(String, JetExpr)], sink: &mut Sink) {
    let (lo, hi) = (&cfg.chart.subchart.lo, &cfg.chart.subchart.hi);
    let omega = cfg.omega();
    let mut zs = Vec::new();
    for z in lattice(lo, hi) {
        if let Some(h) = omega.violated(&z, 0.0) {
            sink.push("chart.subchart", format!("reaches {} outside the chart ({})", fmt_point(&z), h.describe()));
        }
        if omega.depth(&z) >= 0.0 {
            zs.push(z);
        }
    }
    let halton = sample_points(lo, hi, &omega, cfg.chart.margin, cfg.suites.samples.max(1));
    if halton.is_empty() {
        sink.push("chart.subchart", format!("no point deeper than the margin {}", cfg.chart.margin));
    }
    zs.extend(halton);
    let n = spec.n();
    for z in &zs {
        let mut admissible = true;
        for (loc, e) in entries {
            match e.eval_at(z) {
                Ok(v) if v.is_finite() => {}
                Ok(v) => {
                    sink.push(loc.clone(), format!("evaluates to {v} at {}", fmt_point(z)));
                    admissible = false;
                }
                Err(err) => {
                    sink.push(loc.clone(), format!("not admissible at {}: {err}", fmt_point(z)));
                    admissible = false;
                }
            }
        }
        if !admissible {
            continue;
        }
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (spec.g()[i][j].eval_at(z).unwrap(), spec.g()[j][i].eval_at(z).unwrap());
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    sink.push(
                        format!("bracket.g[{i}][{j}]"),
                        format!("g must be symmetric: g[{i}][{j}] = {a} but g[{j}][{i}] = {b} at {}", fmt_point(z)),
                    );
                }
            }
        }
        match PointGeometry::new(spec, z) {
            Ok(_) => {}
            Err(Error::SingularMetric { point }) => sink.push("bracket.g", format!("metric singular at sampled point {}", fmt_point(&point))),
            Err(e) => sink.push("bracket", e.to_string()),
        }
    }
}
