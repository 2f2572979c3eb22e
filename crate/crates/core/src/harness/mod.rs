//! Experiment specs, reports and the bundled verification suites.
//!
//! [`run`] resolves an [`ExperimentSpec`] against the library and returns an
//! [`ExperimentReport`]; [`emit`] renders it as JSON or CSV. The same spec
//! always produces the same bytes unless `wall_time` is requested.

pub mod report;
pub mod spec;
pub mod suites;

use std::time::Instant;

use serde_json::Value;

pub use report::{emit, parse_json, Assertion, Cell, CellKind, Column, ExperimentReport, Format};
pub use spec::{parse_spec, Boxes, ConfigDescriptor, ExperimentSpec, Kind, Metric, SetDescriptor, Suite, ToeplitzAction, Q};

use crate::configs::{per_set, Configuration, CosetSet};
use crate::densities::{banach_density_exact, banach_density_windowed, IntervalEstimate};
use crate::entropy::entropy_estimate;
use crate::error::{Error, Result};
use crate::groups::{geometric_lengths, linear_lengths, nested_intervals, GroupElement, SubgroupChain};
use crate::measures::{omega_profile, unit_shape};
use crate::metrics::{besicovitch_estimate, dstar_distance, dw_prime_estimate, weyl_upper_bound, WEYL_PROXY_LABEL};
use crate::rational::{ratio, Rational};
use crate::toeplitz::{
    krieger_construct, periodic_approximation, psi_path, regularity_profile, verify_skeleton, KriegerParams, QuotaRule,
    DEFAULT_REGULARITY_TOLERANCE,
};

/// Seed used when a spec does not name one.
pub const DEFAULT_SEED: u64 = 7;

fn missing(pointer: &str, what: &str) -> Error {
    Error::Schema { pointer: pointer.to_string(), message: format!("missing {what}") }
}

fn config_at(configs: &[Configuration], i: usize) -> Result<&Configuration> {
    configs.get(i).ok_or_else(|| missing(&format!("/configs/{i}"), "configuration"))
}

/// Runs one experiment.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let start = Instant::now();
    let chain = spec.resolve_chain()?;
    let configs = spec.build_configs(&chain)?;
    let inputs = serde_json::to_value(spec).expect("specs serialize");
    let mut report = match spec.kind {
        Kind::Density => density(spec, &chain, &configs, inputs)?,
        Kind::Distance => distance(spec, &chain, &configs, inputs)?,
        Kind::Entropy => entropy(spec, &chain, &configs, inputs)?,
        Kind::Omega => omega(spec, &chain, &configs, inputs)?,
        Kind::Path => path(spec, &chain, inputs)?,
        Kind::Krieger => krieger(spec, &chain, inputs)?,
        Kind::Toeplitz => toeplitz(spec, &chain, &configs, inputs)?,
        Kind::Verify => verify(spec, inputs)?,
    };
    if spec.wall_time {
        report.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(report)
}

const ESTIMATE_COLUMNS: [(&str, CellKind); 5] = [
    ("lower", CellKind::Rational),
    ("upper", CellKind::Rational),
    ("exact", CellKind::Bool),
    ("method", CellKind::Text),
    ("caveat", CellKind::Text),
];

fn estimate_row(e: &IntervalEstimate) -> Vec<Cell> {
    vec![
        e.lower.into(),
        e.upper.into(),
        e.exact.into(),
        e.method.as_str().into(),
        e.caveat.clone().unwrap_or_default().into(),
    ]
}

fn density(spec: &ExperimentSpec, chain: &SubgroupChain, configs: &[Configuration], inputs: Value) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("density", inputs, &ESTIMATE_COLUMNS);
    let level = spec.level.unwrap_or(chain.depth().min(4));
    let window = spec.window.unwrap_or(64);
    let base = chain.domain(level)?;
    let set = spec.set.as_ref().ok_or_else(|| missing("/set", "set descriptor"))?;
    let estimate = match set {
        SetDescriptor::Cosets { level, reps } => {
            let b = CosetSet::new(chain.clone(), *level, reps.iter().map(|c| c.element()))
                .map_err(|e| Error::Schema { pointer: "/set/cosets".into(), message: e.to_string() })?;
            banach_density_exact(&b)
        }
        SetDescriptor::Per(n) => banach_density_exact(&per_set(config_at(configs, 0)?, *n)?),
        SetDescriptor::Letter(a) => {
            let x = config_at(configs, 0)?;
            match x.exact_view() {
                Some(view) => {
                    let sure = view.cells.iter().map(|c| *c == Some(*a)).collect();
                    let possible = view.cells.iter().map(|c| c.is_none() || *c == Some(*a)).collect();
                    let lower = CosetSet::from_mask(view.chain.clone(), view.level, sure)?.density();
                    let upper = CosetSet::from_mask(view.chain.clone(), view.level, possible)?.density();
                    IntervalEstimate::bracket(lower, upper, crate::densities::Method::ExactCoset)
                }
                None => {
                    let member = |g: &GroupElement| x.evaluate(g).map(|l| l == *a);
                    banach_density_windowed(&member, &base, window)?
                }
            }
        }
        SetDescriptor::Disagreement => {
            crate::metrics::disagreement_density(config_at(configs, 0)?, config_at(configs, 1)?, &base, window)?
        }
    };
    report.push_row(estimate_row(&estimate));
    Ok(report)
}

fn distance(spec: &ExperimentSpec, chain: &SubgroupChain, configs: &[Configuration], inputs: Value) -> Result<ExperimentReport> {
    let columns = [
        ("metric", CellKind::Text),
        ("quantity", CellKind::Text),
        ("lower", CellKind::Rational),
        ("upper", CellKind::Rational),
        ("exact", CellKind::Bool),
        ("basis", CellKind::Text),
        ("note", CellKind::Text),
    ];
    let mut report = ExperimentReport::new("distance", inputs, &columns);
    let (x, z) = (config_at(configs, 0)?, config_at(configs, 1)?);
    let level = spec.level.unwrap_or(chain.depth().min(4));
    let window = spec.window.unwrap_or(64);
    let base = chain.domain(level)?;
    let metric = spec.metric.unwrap_or_default();
    let row = |name: &str, quantity: &str, e: &IntervalEstimate, basis: &str, note: &str| -> Vec<Cell> {
        vec![name.into(), quantity.into(), e.lower.into(), e.upper.into(), e.exact.into(), basis.into(), note.into()]
    };
    match metric {
        Metric::Dstar | Metric::Dwprime => {
            let (name, r) = if metric == Metric::Dstar {
                ("dstar", dstar_distance(x, z, &base, window)?)
            } else {
                ("dwprime", dw_prime_estimate(x, z, &base, window)?)
            };
            let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let note = [r.value.caveat.clone().unwrap_or_default(), params.join(" ")].join(" ").trim().to_string();
            report.push_row(row(name, "distance", &r.value, r.basis.as_str(), &note));
        }
        Metric::Weyl => {
            let bound = weyl_upper_bound(x, z, &base, window)?;
            let proxy = IntervalEstimate::bracket(bound.window_proxy, bound.window_proxy, crate::densities::Method::Windowed);
            report.push_row(row("weyl", "H(F)/|F|", &proxy, "window-bracket", WEYL_PROXY_LABEL));
            let dstar = dstar_distance(x, z, &base, window)?;
            if let Some(exact) = bound.exact {
                report.push_row(row("weyl", "H(F)/|F|", &IntervalEstimate::exact(exact), "exact-coset", "full-period scan"));
                report.assert(Assertion::le("D_W <= H(F)/|F|", dstar.value.lower, exact));
            }
            report.push_row(row("weyl", "D_W", &dstar.value, dstar.basis.as_str(), ""));
        }
        Metric::Besicovitch => {
            let top = spec.depth.unwrap_or(chain.depth()).min(chain.depth());
            let est = besicovitch_estimate(x, z, chain, 0..=top)?;
            for ((n, avg), max) in est.averages.iter().zip(&est.running_max) {
                report.push_row(row("besicovitch", &format!("average F_{n}"), &IntervalEstimate::exact(*avg), "folner-average", ""));
                report.push_row(row(
                    "besicovitch",
                    &format!("running max to F_{n}"),
                    &IntervalEstimate::exact(*max),
                    "folner-average",
                    "finite proxy for the limsup",
                ));
            }
        }
    }
    Ok(report)
}

fn entropy(spec: &ExperimentSpec, chain: &SubgroupChain, configs: &[Configuration], inputs: Value) -> Result<ExperimentReport> {
    let columns = [
        ("level", CellKind::Int),
        ("pattern_count", CellKind::Int),
        ("estimate_nats", CellKind::Real),
        ("saturated", CellKind::Bool),
        ("exactness", CellKind::Text),
    ];
    let mut report = ExperimentReport::new("entropy", inputs, &columns);
    let x = config_at(configs, 0)?;
    let top = spec.level.unwrap_or(chain.depth().min(4));
    let window = spec.window.unwrap_or(64);
    for n in 0..=top {
        let e = entropy_estimate(x, chain, n, window)?;
        let exactness = if e.exact { "complete-language" } else { "window-lower-bound" };
        report.push_row(vec![n.into(), e.pattern_count.into(), e.value.into(), e.saturated.into(), exactness.into()]);
    }
    Ok(report)
}

fn omega(spec: &ExperimentSpec, chain: &SubgroupChain, configs: &[Configuration], inputs: Value) -> Result<ExperimentReport> {
    let x = config_at(configs, 0)?;
    let boxes = spec.boxes.clone().unwrap_or(Boxes::Linear { count: 51 });
    let sets = match &boxes {
        Boxes::Linear { count } => nested_intervals(&linear_lengths(*count)),
        Boxes::Geometric { eps, count } => nested_intervals(&geometric_lengths(&eps.0, *count)?),
        Boxes::Chain => (0..=spec.level.unwrap_or(chain.depth())).map(|n| chain.domain(n)).collect::<Result<_>>()?,
    };
    if sets.first().is_some_and(|s| s.rank() != x.rank()) {
        return Err(Error::RankMismatch { expected: x.rank(), found: sets[0].rank() });
    }
    let letters: Vec<String> = x.alphabet().letters().to_vec();
    let weight_names: Vec<String> = letters.iter().map(|l| format!("weight_{l}")).collect();
    let mut columns: Vec<(&str, CellKind)> = vec![("level", CellKind::Int), ("size", CellKind::Int)];
    columns.extend(weight_names.iter().map(|n| (n.as_str(), CellKind::Rational)));
    columns.extend([("dp_to_previous", CellKind::Rational), ("bound", CellKind::Rational), ("bound_holds", CellKind::Bool)]);
    let mut report = ExperimentReport::new("omega", inputs, &columns);
    let profile = omega_profile(x, &sets, &unit_shape(x.rank()))?;
    for (n, mu) in profile.measures.iter().enumerate() {
        let mut row: Vec<Cell> = vec![n.into(), profile.sizes[n].into()];
        row.extend(letters.iter().map(|l| Cell::Rational(mu.weight(l))));
        let (dp, bound) = if n == 0 {
            (Rational::from_integer(0), Rational::from_integer(0))
        } else {
            (profile.distances[n - 1], profile.bounds[n - 1])
        };
        row.extend([dp.into(), bound.into(), (dp <= bound).into()]);
        report.push_row(row);
        if n > 0 {
            report.assert(Assertion::le(format!("level {n}: D_P(Emp(F_{n}), Emp(F_{})) <= bound", n - 1), dp, bound));
        }
    }
    report.note("row 0 has no predecessor; its distance and bound are 0");
    Ok(report)
}

fn path(spec: &ExperimentSpec, chain: &SubgroupChain, inputs: Value) -> Result<ExperimentReport> {
    let depth = spec.depth.unwrap_or(chain.depth()).min(chain.depth());
    let rule = if spec.literal_quota.unwrap_or(false) { QuotaRule::Literal } else { QuotaRule::Corrected };
    let mut grid: Vec<Rational> = match &spec.t_grid {
        Some(g) => g.iter().map(|q| q.0).collect(),
        None => (0..=4).map(|k| Rational::new(k, 4)).collect(),
    };
    grid.sort();
    grid.dedup();
    let points = grid.iter().map(|&t| psi_path(t, chain, depth, rule)).collect::<Result<Vec<_>>>()?;
    let columns = [
        ("s", CellKind::Rational),
        ("t", CellKind::Rational),
        ("density_s", CellKind::Rational),
        ("density_t", CellKind::Rational),
        ("dstar_lower", CellKind::Rational),
        ("dstar_upper", CellKind::Rational),
        ("d_side_gap", CellKind::Rational),
        ("bound", CellKind::Rational),
        ("lipschitz", CellKind::Bool),
        ("nested", CellKind::Bool),
    ];
    let mut report = ExperimentReport::new("path", inputs, &columns);
    let base = chain.domain(depth)?;
    let slack = ratio(1, chain.domain_size(depth));
    for (i, ps) in points.iter().enumerate() {
        for pt in &points[i + 1..] {
            let d = dstar_distance(&ps.configuration(), &pt.configuration(), &base, 0)?.value;
            let gap = pt.d_sets[depth].difference(&ps.d_sets[depth])?.density();
            let bound = pt.t - ps.t + slack;
            let lipschitz = d.lower <= bound && gap <= bound;
            let nested = (0..=depth).map(|n| ps.d_sets[n].is_subset(&pt.d_sets[n])).collect::<Result<Vec<_>>>()?.into_iter().all(|b| b);
            report.push_row(vec![
                ps.t.into(),
                pt.t.into(),
                ps.d_density().into(),
                pt.d_density().into(),
                d.lower.into(),
                d.upper.into(),
                gap.into(),
                bound.into(),
                lipschitz.into(),
                nested.into(),
            ]);
            report.assert(Assertion::le(format!("D*(Ψ({}), Ψ({})) <= t-s+1/|F_N|", ps.t, pt.t), d.lower.max(gap), bound));
            report.assert(Assertion::holds(format!("D_n({}) ⊆ D_n({})", ps.t, pt.t), nested));
        }
    }
    for p in &points {
        let residual = Rational::from_integer(1) - p.d_density() - p.e_sets[depth].density();
        report.note(format!(
            "t={}: density {}, unassigned {}, terminated at {}",
            p.t,
            p.d_density(),
            residual,
            p.terminated_at.map_or("-".to_string(), |n| n.to_string())
        ));
    }
    Ok(report)
}

fn krieger(spec: &ExperimentSpec, chain: &SubgroupChain, inputs: Value) -> Result<ExperimentReport> {
    let gamma = spec.gamma.map_or(Rational::new(1, 2), |q| q.0);
    let alphabet = crate::configs::Alphabet::of_size(spec.alphabet_size.unwrap_or(2));
    let params = KriegerParams { gamma, stages: spec.stages.unwrap_or(2), first_level: spec.first_level.unwrap_or(0) };
    let out = krieger_construct(&params, chain, &alphabet)?;
    let columns = [
        ("stage", CellKind::Int),
        ("level", CellKind::Int),
        ("r", CellKind::Int),
        ("periodic_cells", CellKind::Text),
        ("periodic_count", CellKind::Int),
        ("budget", CellKind::Rational),
        ("budget_holds", CellKind::Bool),
        ("free_count", CellKind::Int),
        // empty on stages that plant nothing
        ("pattern_count", CellKind::Text),
        ("planted", CellKind::Text),
        ("entropy_nats", CellKind::Text),
    ];
    let mut report = ExperimentReport::new("krieger", inputs, &columns);
    let ln_a = (alphabet.len() as f64).ln();
    for stage in &out.log.stages {
        let cert = out.log.certificates.iter().find(|c| c.level == stage.level && stage.copies.is_some());
        let cells: Vec<String> = stage.periodic_cells.iter().map(|g| g.to_string()).collect();
        report.push_row(vec![
            stage.index.into(),
            stage.level.into(),
            stage.r.into(),
            cells.join(" ").into(),
            stage.periodic_count.into(),
            stage.periodic_budget.into(),
            stage.budget_holds.into(),
            stage.free_count.into(),
            cert.map_or(String::new(), |c| c.pattern_count.to_string()).into(),
            stage.planted.as_ref().map_or(String::new(), |p| p.to_string()).into(),
            cert.map_or(String::new(), |c| Cell::from(c.entropy).to_string()).into(),
        ]);
        report.assert(Assertion::le(
            format!("stage {}: Σ r_i |H_k:H_k_i| <= (1-γ)|F_k|", stage.index),
            Rational::from_integer(stage.periodic_count as i64),
            stage.periodic_budget,
        ));
    }
    for c in &out.log.certificates {
        report.assert(Assertion::new(format!("level {}: |B_F| >= |A|^|S|", c.level), c.pattern_count.to_string(), ">=", c.planted.to_string(), c.planted_holds));
        report.assert(Assertion::holds(format!("level {}: |B_F| >= |A|^(γ|F|)", c.level), c.gamma_holds));
        let floor = crate::rational::to_f64(&gamma) * ln_a - ln_a / c.domain_size as f64;
        report.assert(Assertion::new(format!("level {}: entropy estimate", c.level), c.entropy, ">=", floor, c.entropy >= floor));
    }
    for note in &out.log.notes {
        report.note(note.clone());
    }
    let eta: Configuration = out.table.into();
    let profile = regularity_profile(&eta, out.log.closing_level, DEFAULT_REGULARITY_TOLERANCE)?;
    let trace: Vec<String> = profile.densities.iter().map(|d| d.to_string()).collect();
    report.note(format!("regularity profile: {}", trace.join(" ")));
    Ok(report)
}

fn toeplitz(spec: &ExperimentSpec, chain: &SubgroupChain, configs: &[Configuration], inputs: Value) -> Result<ExperimentReport> {
    let x = config_at(configs, 0)?;
    let depth = spec.depth.unwrap_or(chain.depth()).min(chain.depth());
    match spec.action.unwrap_or_default() {
        ToeplitzAction::Verify => {
            let columns = [
                ("level", CellKind::Int),
                ("per_nonempty", CellKind::Bool),
                ("per_density", CellKind::Rational),
                ("separated", CellKind::Bool),
                ("witness", CellKind::Text),
            ];
            let mut report = ExperimentReport::new("toeplitz-verify", inputs, &columns);
            let skeleton = verify_skeleton(x, depth)?;
            for l in &skeleton.levels {
                let witness = l.witness.as_ref().map(|g| g.to_string()).unwrap_or_default();
                report.push_row(vec![l.level.into(), l.per_nonempty.into(), l.per_density.into(), l.separated.into(), witness.into()]);
                report.assert(Assertion::holds(format!("level {}: Per nonempty", l.level), l.per_nonempty));
                report.assert(Assertion::holds(format!("level {}: separation", l.level), l.separated));
            }
            report.note(format!("coverage of F_{depth}: {}", skeleton.coverage));
            Ok(report)
        }
        ToeplitzAction::Profile => {
            let tolerance = spec.tolerance.map_or(DEFAULT_REGULARITY_TOLERANCE, |q| q.0);
            let columns = [("level", CellKind::Int), ("per_density", CellKind::Rational)];
            let mut report = ExperimentReport::new("toeplitz-profile", inputs, &columns);
            let profile = regularity_profile(x, depth, tolerance)?;
            for (n, d) in profile.densities.iter().enumerate() {
                report.push_row(vec![n.into(), (*d).into()]);
            }
            report.note(format!(
                "regular so far (within {} of 1 at level {depth}): {}",
                profile.tolerance,
                profile.regular_so_far()
            ));
            Ok(report)
        }
        ToeplitzAction::Approx => {
            let columns = [
                ("level", CellKind::Int),
                ("distance_lower", CellKind::Rational),
                ("distance_upper", CellKind::Rational),
                ("bound", CellKind::Rational),
                ("holds", CellKind::Bool),
            ];
            let mut report = ExperimentReport::new("toeplitz-approx", inputs, &columns);
            for n in 0..=depth {
                match periodic_approximation(x, n) {
                    Ok(a) => {
                        report.push_row(vec![n.into(), a.distance.lower.into(), a.distance.upper.into(), a.bound.into(), a.holds.into()]);
                        report.assert(Assertion::le(format!("level {n}: D*(x^(n), x) <= 1 - D*(Per)"), a.distance.upper, a.bound));
                    }
                    Err(Error::UnresolvedCells { level }) => report.note(format!("level {level}: F_{level} has unresolved cells")),
                    Err(e) => return Err(e),
                }
            }
            Ok(report)
        }
    }
}

fn verify(spec: &ExperimentSpec, inputs: Value) -> Result<ExperimentReport> {
    let suite = spec.suite.unwrap_or_default();
    let seed = spec.seed.unwrap_or(DEFAULT_SEED);
    let parts: Vec<Suite> = if suite == Suite::All { Suite::EACH.to_vec() } else { vec![suite] };
    // Suites are independent; run them side by side and keep spec order.
    let outcomes: Vec<Result<suites::SuiteOutcome>> = std::thread::scope(|scope| {
        let handles: Vec<_> = parts.iter().map(|&s| scope.spawn(move || suites::run_suite(s, seed))).collect();
        handles.into_iter().map(|h| h.join().expect("suite thread panicked")).collect()
    });
    let columns = [
        ("suite", CellKind::Text),
        ("check", CellKind::Text),
        ("lhs", CellKind::Text),
        ("relation", CellKind::Text),
        ("rhs", CellKind::Text),
        ("passed", CellKind::Bool),
    ];
    let mut report = ExperimentReport::new("verify", inputs, &columns);
    for (s, outcome) in parts.iter().zip(outcomes) {
        let outcome = outcome?;
        for a in outcome.assertions {
            report.push_row(vec![
                s.as_str().into(),
                a.name.clone().into(),
                render(&a.lhs).into(),
                a.relation.clone().into(),
                render(&a.rhs).into(),
                a.passed.into(),
            ]);
            report.assert(Assertion { name: format!("{}: {}", s.as_str(), a.name), ..a });
        }
        for n in outcome.notes {
            report.note(format!("{}: {n}", s.as_str()));
        }
    }
    Ok(report)
}

fn render(cell: &Cell) -> String {
    match cell {
        Cell::Rational(q) => crate::rational::format_pq(q),
        Cell::Real(x) => x.to_string(),
        Cell::Int(i) => i.to_string(),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(s) => s.clone(),
    }
}
