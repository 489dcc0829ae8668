//! Text, CSV and manifest formatting. Floats use the shortest round-trip form.

use std::fmt::Write;

use moyalks::entropy::{EntropyConfig, EntropyReport, Estimator};
use serde::Serialize;

use crate::config::Scenario;

pub(crate) fn num(x: f64) -> String {
    format!("{x}")
}

pub(crate) fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub(crate) fn estimator_name(e: Estimator) -> &'static str {
    match e {
        Estimator::PointMap => "point-map",
        Estimator::Algebraic => "algebraic",
        Estimator::QuasiProbability => "quasi-probability",
        Estimator::SymbolPoint => "symbol-point",
    }
}

pub(crate) const RATES_COLUMNS: [&str; 11] =
    ["estimator", "hbar", "depth", "n", "H_n", "d_n", "words", "rate", "converged", "n_used", "negativity_mass"];

pub(crate) const SWEEP_COLUMNS: [&str; 13] = [
    "hbar",
    "status",
    "estimator",
    "h_hbar",
    "converged",
    "negativity_mass",
    "truncated_mass",
    "unreliable",
    "classical_h",
    "symbol_point_h",
    "discrepancy",
    "quantum_chaotic",
    "message",
];

pub(crate) fn header(columns: &[&str]) -> String {
    let mut s = columns.join(",");
    s.push('\n');
    s
}

/// One row per (member, itinerary length) of `report` and of its attached
/// classical and symbol-point reports.
pub(crate) fn rate_rows(report: &EntropyReport, out: &mut String) {
    let mut all = vec![report];
    all.extend(report.alternative.as_deref());
    all.extend(report.classical.as_deref());
    for r in all {
        let hbar = if r.estimator == Estimator::PointMap || r.estimator == Estimator::Algebraic { None } else { r.hbar };
        let hbar = hbar.or(report.hbar);
        for est in &r.per_partition {
            for (i, (h, d)) in est.entropies.iter().zip(est.differences()).enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    estimator_name(r.estimator),
                    opt(hbar),
                    est.depth.map(|k| k.to_string()).unwrap_or_default(),
                    i + 1,
                    num(*h),
                    num(d),
                    est.words[i],
                    num(est.rate),
                    est.converged,
                    est.n_used,
                    num(est.negativity_mass),
                );
            }
        }
    }
}

/// `key: value` lines in insertion order.
#[derive(Default)]
pub(crate) struct Summary(pub String);

impl Summary {
    pub(crate) fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.0, "{key}: {value}");
    }

    pub(crate) fn report(&mut self, prefix: &str, r: &EntropyReport) {
        self.line(&format!("{prefix}estimator"), estimator_name(r.estimator));
        self.line(&format!("{prefix}ks_estimate"), r.ks_estimate.map_or("none".to_string(), num));
        self.line(&format!("{prefix}best_effort"), num(r.best_effort));
        self.line(&format!("{prefix}status"), if r.inconclusive { "inconclusive" } else { "converged" });
        self.line(&format!("{prefix}exact_counting"), r.exact);
        self.line(&format!("{prefix}monotone_in_depth"), r.monotone);
        self.line(&format!("{prefix}negativity_mass_max"), num(r.negativity_mass_max));
        for est in &r.per_partition {
            self.line(
                &format!("{prefix}depth {}", est.depth.map(|k| k.to_string()).unwrap_or_default()),
                format!("rate={} converged={} n_used={} block_rate={}", num(est.rate), est.converged, est.n_used, num(est.block_rate())),
            );
        }
    }
}

#[derive(Serialize)]
pub(crate) struct FileDoc {
    pub name: &'static str,
    pub format: &'static str,
    pub description: &'static str,
    pub columns: Vec<&'static str>,
}

pub(crate) fn rates_doc() -> FileDoc {
    FileDoc {
        name: "rates.csv",
        format: "csv",
        description: "block entropies H_n (bits) and differences d_n = H_n - H_(n-1) per partition depth and estimator",
        columns: RATES_COLUMNS.to_vec(),
    }
}

pub(crate) fn sweep_doc() -> FileDoc {
    FileDoc {
        name: "sweep.csv",
        format: "csv",
        description: "one row per hbar: quantum entropy, diagnostics and the classical anchor",
        columns: SWEEP_COLUMNS.to_vec(),
    }
}

pub(crate) fn summary_doc() -> FileDoc {
    FileDoc { name: "summary.txt", format: "key: value lines", description: "human-readable run summary", columns: Vec::new() }
}

#[derive(Serialize)]
pub(crate) struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub scenario: Option<&'a Scenario>,
    pub estimator: Option<&'a EntropyConfig>,
    pub files: Vec<FileDoc>,
}

impl<'a> Manifest<'a> {
    pub(crate) fn new(command: &'a str, scenario: Option<&'a Scenario>, estimator: Option<&'a EntropyConfig>, files: Vec<FileDoc>) -> Self {
        Self { tool: "moyalks", version: env!("CARGO_PKG_VERSION"), command, scenario, estimator, files }
    }

    pub(crate) fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
