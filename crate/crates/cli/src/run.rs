use std::path::Path;

use moyalks::algebraic::{algebraic_ks_with, AlgebraicEndomorphism, AlgebraicState};
use moyalks::entropy::{
    golden_mean, ks_entropy_quantum_with, ks_entropy_with, lyapunov_estimate_seeded, EntropyReport, PartitionFamily,
    PointMapSystem,
};
use moyalks::flow::{evolve as flow_evolve, liouville_step, FlowSpec, Hamiltonian, Scheme};
use moyalks::geometry::{Grid, Observable, PhaseSpace, Poly, Support};
use moyalks::starproduct::{moyal_bracket_symbolic, moyal_product_symbolic, Hbar};

use crate::config::{Layer, Scenario, SystemName};
use crate::report::{self, header, num, opt, rate_rows, Manifest, Summary};
use crate::{BracketArgs, Failure};

/// Files of a finished run plus its exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub summary: String,
    /// `(file name, contents)` in write order, manifest first.
    pub files: Vec<(String, String)>,
}

impl Outcome {
    pub fn write(&self, dir: &Path) -> Result<(), Failure> {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
        for (name, contents) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|f| f.0 == name).map(|f| f.1.as_str())
    }
}

fn status_code(inconclusive: bool) -> i32 {
    if inconclusive {
        3
    } else {
        0
    }
}

fn plane_spec(s: &Scenario, text: &str, hbar: Hbar) -> Result<FlowSpec, Failure> {
    let space = PhaseSpace::plane_window((s.side, s.side), (s.grid, s.grid))?;
    let h = Hamiltonian::parse_poly(text)?;
    let scheme = if h.is_separable(&space) { Scheme::SplitStepMoyal } else { Scheme::Rk4Moyal };
    Ok(FlowSpec::new(space, h, hbar, scheme)?)
}

/// The flow of a quantum-capable scenario.
fn flow_spec(s: &Scenario, hbar: Hbar) -> Result<FlowSpec, Failure> {
    if let Some(text) = &s.hamiltonian {
        return plane_spec(s, text, hbar);
    }
    match s.system {
        SystemName::KickedRotor | SystemName::Standard => Ok(FlowSpec::kicked_rotor(s.k, s.grid, hbar)?),
        SystemName::Harmonic => Ok(FlowSpec::harmonic(s.side, s.grid, hbar)?),
        other => Err(Failure::Config(format!(
            "field `system`: {other:?} is a point map without a Hamiltonian; quantum runs need kicked-rotor, harmonic or `hamiltonian`"
        ))),
    }
}

fn support(s: &Scenario, spec: &FlowSpec) -> Support {
    match spec.space.kind {
        moyalks::geometry::SpaceKind::PlaneWindow => Support::Disk { radius: s.radius },
        moyalks::geometry::SpaceKind::Torus => Support::Full,
    }
}

fn point_system(s: &Scenario) -> Result<PointMapSystem, Failure> {
    if s.hamiltonian.is_some() {
        let spec = flow_spec(s, Hbar::zero())?;
        return Ok(PointMapSystem::from_flow(&spec, support(s, &spec))?);
    }
    Ok(match s.system {
        SystemName::Cat => PointMapSystem::cat(),
        SystemName::Baker => PointMapSystem::baker(),
        SystemName::Rotation => PointMapSystem::rotation(s.alpha.unwrap_or_else(golden_mean)),
        SystemName::Standard | SystemName::KickedRotor => PointMapSystem::standard(s.k),
        SystemName::Harmonic => PointMapSystem::harmonic(s.radius)?,
        SystemName::Identity => PointMapSystem::identity(),
    })
}

/// Name used in summaries: the preset, or `hamiltonian`.
fn system_label(s: &Scenario) -> String {
    if s.hamiltonian.is_some() {
        return "hamiltonian".into();
    }
    serde_json::to_value(s.system).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn manifest(command: &str, s: &Scenario, files: Vec<report::FileDoc>) -> (String, String) {
    let config = s.entropy_config();
    ("manifest.json".into(), Manifest::new(command, Some(s), Some(&config), files).to_json())
}

/// `entropy classical`: KS entropy through the measure or algebraic layer,
/// with the Lyapunov cross-check.
pub fn classical(s: &Scenario) -> Result<Outcome, Failure> {
    let sys = point_system(s)?;
    let config = s.entropy_config();
    let family = PartitionFamily::dyadic(s.depths.clone()).with_support(sys.support());
    let rep = match s.layer {
        Layer::Measure => ks_entropy_with(&sys, &family, s.n_max, &config)?,
        Layer::Algebraic => {
            let state = AlgebraicState::of_system(&sys);
            algebraic_ks_with(&AlgebraicEndomorphism::new(sys.clone()), &state, &family, s.n_max, &config)?
        }
    };
    let lyapunov = lyapunov_estimate_seeded(&sys, 200, 1000, s.seed)?;

    let mut sum = Summary::default();
    sum.line("command", "entropy classical");
    sum.line("system", &rep.system);
    sum.line("layer", format!("{:?}", s.layer).to_lowercase());
    sum.report("", &rep);
    sum.line("lyapunov_bits", num(lyapunov));
    let mut rates = header(&report::RATES_COLUMNS);
    rate_rows(&rep, &mut rates);
    Ok(Outcome {
        code: status_code(rep.inconclusive),
        files: vec![
            manifest("entropy classical", s, vec![report::rates_doc(), report::summary_doc()]),
            ("rates.csv".into(), rates),
            ("summary.txt".into(), sum.0.clone()),
        ],
        summary: sum.0,
    })
}

fn quantum_report(s: &Scenario, hbar: f64) -> Result<EntropyReport, Failure> {
    let spec = flow_spec(s, Hbar::new(hbar)?)?;
    let family = PartitionFamily::dyadic(s.depths.clone()).with_support(support(s, &spec));
    Ok(ks_entropy_quantum_with(&spec, &family, s.n_max, &s.entropy_config())?)
}

fn quantum_summary(sum: &mut Summary, rep: &EntropyReport) {
    sum.report("", rep);
    sum.line("truncated_mass_max", num(rep.truncated_mass_max));
    sum.line("unreliable", rep.unreliable);
    sum.line("chaotic", opt_bool(rep.chaotic));
    sum.line("quantum_chaotic", opt_bool(rep.quantum_chaotic));
    if let Some(c) = &rep.classical {
        sum.line("classical_h", num(c.value()));
    }
    if let Some(a) = &rep.alternative {
        sum.line("symbol_point_h", num(a.value()));
        sum.line("discrepancy", opt(rep.discrepancy));
    }
}

fn opt_bool(b: Option<bool>) -> String {
    b.map(|b| b.to_string()).unwrap_or_default()
}

/// `entropy quantum`: one `ħ`.
pub fn quantum(s: &Scenario) -> Result<Outcome, Failure> {
    let hbar = match s.hbar.as_slice() {
        [h] => *h,
        [] => return Err(Failure::Config("field `hbar`: one value is required".into())),
        _ => return Err(Failure::Config("field `hbar`: several values given; use `entropy sweep`".into())),
    };
    let rep = quantum_report(s, hbar)?;
    let mut sum = Summary::default();
    sum.line("command", "entropy quantum");
    sum.line("system", system_label(s));
    sum.line("hbar", num(hbar));
    quantum_summary(&mut sum, &rep);
    let mut rates = header(&report::RATES_COLUMNS);
    rate_rows(&rep, &mut rates);
    Ok(Outcome {
        code: status_code(rep.inconclusive),
        files: vec![
            manifest("entropy quantum", s, vec![report::rates_doc(), report::summary_doc()]),
            ("rates.csv".into(), rates),
            ("summary.txt".into(), sum.0.clone()),
        ],
        summary: sum.0,
    })
}

/// Direction of `h_ħ` along increasing `ħ`, up to `tol`.
fn trend(values: &[f64], tol: f64) -> &'static str {
    let up = values.windows(2).all(|w| w[1] >= w[0] - tol);
    let down = values.windows(2).all(|w| w[1] <= w[0] + tol);
    match (up, down) {
        (true, true) => "flat",
        (true, false) => "non-decreasing",
        (false, true) => "non-increasing",
        (false, false) => "mixed",
    }
}

/// `entropy sweep`: one quantum run per `ħ` on a shared sampling plan.
/// Failed rows keep their error message; the other rows are still reported.
pub fn sweep(s: &Scenario) -> Result<Outcome, Failure> {
    if s.hbar.is_empty() {
        return Err(Failure::Config("field `hbar`: the sweep needs at least one value".into()));
    }
    // Fail early on settings that no row could run with.
    flow_spec(s, Hbar::zero())?;
    let mut hbars = s.hbar.clone();
    hbars.sort_by(f64::total_cmp);
    hbars.dedup();

    let mut table = header(&report::SWEEP_COLUMNS);
    let mut rates = header(&report::RATES_COLUMNS);
    let mut sum = Summary::default();
    sum.line("command", "entropy sweep");
    sum.line("system", system_label(s));
    let mut values = Vec::new();
    let mut classical_h = None;
    let mut code = 0;
    let mut rows_ok = 0;
    for &h in &hbars {
        match quantum_report(s, h) {
            Ok(rep) => {
                rows_ok += 1;
                rate_rows(&rep, &mut rates);
                let classical = rep.classical.as_ref().map(|c| c.value());
                classical_h = classical_h.or(classical);
                values.push((h, rep.value()));
                if rep.inconclusive {
                    code = code.max(3);
                }
                table.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},\n",
                    num(h),
                    if rep.inconclusive { "inconclusive" } else { "converged" },
                    report::estimator_name(rep.estimator),
                    num(rep.value()),
                    !rep.inconclusive,
                    num(rep.negativity_mass_max),
                    num(rep.truncated_mass_max),
                    rep.unreliable,
                    opt(classical),
                    opt(rep.alternative.as_ref().map(|a| a.value())),
                    opt(rep.discrepancy),
                    opt_bool(rep.quantum_chaotic),
                ));
                sum.line(
                    &format!("hbar {}", num(h)),
                    format!(
                        "h={} status={} negativity_mass={} discrepancy={}",
                        num(rep.value()),
                        if rep.inconclusive { "inconclusive" } else { "converged" },
                        num(rep.negativity_mass_max),
                        opt(rep.discrepancy)
                    ),
                );
            }
            Err(e) => {
                code = code.max(e.exit_code());
                let msg = e.to_string().replace([',', '\n'], ";");
                table.push_str(&format!("{},error,,,,,,,,,,,{}\n", num(h), msg));
                sum.line(&format!("hbar {}", num(h)), format!("error: {msg}"));
            }
        }
    }
    if rows_ok == 0 {
        code = code.max(1);
    }
    if let Some(c) = classical_h {
        sum.line("classical_h", num(c));
        if let Some(&(h, v)) = values.iter().find(|(h, _)| *h > 0.0) {
            sum.line("classical_limit_gap", format!("{} at hbar={}", num((v - c).abs()), num(h)));
        }
    }
    let quantum: Vec<f64> = values.iter().filter(|(h, _)| *h > 0.0).map(|v| v.1).collect();
    sum.line("trend_in_hbar", trend(&quantum, s.entropy_config().tolerance));
    Ok(Outcome {
        code,
        files: vec![
            manifest("entropy sweep", s, vec![report::sweep_doc(), report::rates_doc(), report::summary_doc()]),
            ("sweep.csv".into(), table),
            ("rates.csv".into(), rates),
            ("summary.txt".into(), sum.0.clone()),
        ],
        summary: sum.0,
    })
}

/// `evolve`: a Gaussian under the Moyal flow at the first `ħ` (0.1 if none),
/// compared with the classical transport.
pub fn evolve(s: &Scenario, t: f64) -> Result<Outcome, Failure> {
    let hbar = s.hbar.first().copied().unwrap_or(0.1);
    let spec = flow_spec(s, Hbar::new(hbar)?)?;
    let space = spec.space;
    let (q0, p0) = space.origin();
    let (cq, cp) = match space.kind {
        moyalks::geometry::SpaceKind::Torus => (q0 + space.lq / 2.0, p0 + space.lp / 2.0),
        moyalks::geometry::SpaceKind::PlaneWindow => (1.0, 0.5),
    };
    let width = space.lq / 16.0;
    let f = Observable::grid(Grid::from_real_fn(&space, |q, p| (-((q - cq).powi(2) + (p - cp).powi(2)) / (2.0 * width * width)).exp()));
    let quantum = flow_evolve(&f, &spec, t)?;
    let classical = liouville_step(&f, &spec.clone().with_hbar(Hbar::zero()), t)?;
    let before = f.to_grid().mean();
    let mut sum = Summary::default();
    sum.line("command", "evolve");
    sum.line("system", system_label(s));
    sum.line("hbar", num(hbar));
    sum.line("t", num(t));
    sum.line("scheme", format!("{:?}", spec.scheme));
    sum.line("state_drift", num((quantum.field.mean() - before).norm()));
    sum.line("classical_state_drift", num((classical.field.mean() - before).norm()));
    sum.line("l2_moyal_vs_classical", num(quantum.field.l2_distance(&classical.field)));
    sum.line("negativity_mass", num(quantum.negativity_mass));
    Ok(Outcome {
        code: 0,
        files: vec![manifest("evolve", s, vec![report::summary_doc()]), ("summary.txt".into(), sum.0.clone())],
        summary: sum.0,
    })
}

/// `bracket`: symbolic Moyal bracket or product, `ħ` formal unless given.
pub fn bracket(a: &BracketArgs) -> Result<Outcome, Failure> {
    let f = Poly::parse(&a.f)?;
    let g = Poly::parse(&a.g)?;
    let mut out = if a.product { moyal_product_symbolic(&f, &g) } else { moyal_bracket_symbolic(&f, &g) };
    if let Some(text) = &a.hbar {
        out = out.substitute_hbar(Hbar::parse(text)?.exact());
    }
    let mut sum = Summary::default();
    sum.line("command", if a.product { "product" } else { "bracket" });
    sum.line("f", &a.f);
    sum.line("g", &a.g);
    sum.line("hbar", a.hbar.as_deref().unwrap_or("symbolic"));
    sum.line("result", &out);
    let manifest = Manifest::new("bracket", None, None, vec![report::summary_doc()]).to_json();
    Ok(Outcome {
        code: 0,
        files: vec![("manifest.json".into(), manifest), ("summary.txt".into(), sum.0.clone())],
        summary: sum.0,
    })
}
