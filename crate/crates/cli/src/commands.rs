//! Subcommand pipelines. Each fills a [`Findings`] with expectations and
//! results; errors are split into input problems and pipeline failures.

use std::fs;
use std::path::Path;

use projmetric::charts::{pullback_metric, Point};
use projmetric::geodesics::{
    collinearity_residual, cross_validate, integrate_geodesic, seeded_shots, shot_traces, IntegratorConfig,
    Parameterization,
};
use projmetric::linalg::Matrix;
use projmetric::metrization::simultaneous_diag;
use projmetric::projective::{classify_map, projective_report, MapClass, Tolerances, Verdict};
use projmetric::representation::{
    classify_rep, compute_rep, lemma_search, pullback_spectrum, quotient_conclusion, rep_compose_check,
    LabeledClass, RepKind,
};
use projmetric::sampling::{sample_points, SampleConfig};
use projmetric::scenario_file;
use projmetric::scenarios::{
    algebraic_identity_residual, build_flat_torus, build_levi_civita_family, build_sphere_projective,
    family_chart, pullback_formula_residual, LeviCivitaSpec, MapRole, Scenario,
};
use serde::Serialize;

use crate::config::{Command, RunConfig};
use crate::report::Findings;

/// Geodesic traces under projectively equivalent metrics must agree to this.
pub const GEODESIC_TOL: f64 = 1e-4;
/// Fit and composition tolerance for representation matrices.
pub const REP_TOL: f64 = 1e-6;
pub const IDENTITY_TOL: f64 = 1e-12;
pub const COLLINEARITY_TOL: f64 = 1e-6;
const STATIONS: usize = 400;

#[derive(Debug)]
pub enum Failure {
    /// Bad input: flags, config, scenario definition.
    Usage(String),
    /// A computation failed on valid input.
    Pipeline(String),
}

impl Failure {
    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Pipeline(m) => m,
        }
    }
}

fn input<T>(r: projmetric::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Usage(e.to_string()))
}

fn step<T>(r: projmetric::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Pipeline(e.to_string()))
}

fn sampling(cfg: &RunConfig) -> SampleConfig {
    SampleConfig::default().with_seed(cfg.seed).with_count(cfg.samples)
}

pub fn dispatch(cfg: &RunConfig, findings: &mut Findings) -> Result<(), Failure> {
    let command = cfg.command.as_ref().expect("resolved config has a command");
    match command {
        Command::VerifyExample { n, f, orientable, base } => verify_example(cfg, *n, f, *orientable, base, findings),
        Command::PullbackCheck { f, grid } => pullback_check(cfg, f, *grid, findings),
        Command::Torus { matrix } => torus(cfg, matrix, findings),
        Command::Sphere { matrix } => sphere(cfg, matrix, findings),
        Command::Representation { scenario, maps } => {
            let s = input(scenario_file::load(scenario))?;
            let pts = sample_points(&s.chart, &sampling(cfg));
            representation_stage(cfg, &s, maps.as_deref(), &pts, findings)
        }
        Command::Lemma1 { alpha, s, kmax } => {
            lemma1(*alpha, s, *kmax, findings);
            Ok(())
        }
        Command::Geodesics {
            scenario,
            shots,
            emit_csv,
        } => geodesics(cfg, scenario, *shots, emit_csv.as_deref(), findings),
    }
}

fn save_if_requested(cfg: &RunConfig, s: &Scenario) -> Result<(), Failure> {
    if let Some(path) = &cfg.save_scenario {
        step(scenario_file::save(s, path))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ScenarioSummary<'a> {
    name: &'a str,
    note: &'a str,
    dimension: usize,
    maps: Vec<MapSummary<'a>>,
}

#[derive(Serialize)]
struct MapSummary<'a> {
    label: &'a str,
    role: MapRole,
    expected: Option<MapClass>,
}

fn summarize(s: &Scenario) -> ScenarioSummary<'_> {
    ScenarioSummary {
        name: &s.name,
        note: &s.note,
        dimension: s.chart.dim(),
        maps: s
            .maps
            .iter()
            .map(|m| MapSummary {
                label: m.map.label(),
                role: m.role,
                expected: m.expected,
            })
            .collect(),
    }
}

fn classification_stage(cfg: &RunConfig, s: &Scenario, pts: &[Point<f64>], findings: &mut Findings) -> Result<(), Failure> {
    let tol = Tolerances::uniform(cfg.tol);
    let mut rows = Vec::new();
    for m in &s.maps {
        let c = step(classify_map(&m.map, &s.metric, pts, &tol))?;
        if let Some(expected) = m.expected {
            findings.expect(
                format!("{} is {expected}", m.map.label()),
                c.class == expected,
                format!(
                    "classified {} (iso {:.3e}, aff {:.3e}, proj {:.3e})",
                    c.class, c.iso_residual, c.aff_residual, c.proj_residual
                ),
            );
        }
        rows.push(serde_json::json!({ "map": m.map.label(), "classification": c }));
    }
    if let Some(first) = s.with_role(MapRole::Candidate).next() {
        let verdict = rows
            .iter()
            .find(|r| r["map"] == first.map.label())
            .map(|r| r["classification"]["class"].clone());
        findings.record("verdict", verdict);
    }
    findings.record("classifications", rows);

    if let Some(gbar) = &s.companion {
        let report = step(projective_report(&s.metric, gbar, pts, cfg.tol))?;
        findings.expect(
            format!("{} and {} are projectively equivalent", s.metric.id(), gbar.id()),
            report.verdict == Verdict::Equivalent,
            format!("max residual {:.3e} (tolerance {:.1e})", report.residual_max, cfg.tol),
        );
        findings.record(
            "projective_equivalence",
            serde_json::json!({
                "metric": s.metric.id(),
                "companion": gbar.id(),
                "residual_max": report.residual_max,
                "tolerance": report.tolerance,
                "verdict": report.verdict,
            }),
        );
    }
    Ok(())
}

fn geodesic_stage(cfg: &RunConfig, s: &Scenario, shots: usize, findings: &mut Findings) -> Result<(), Failure> {
    let Some(gbar) = &s.companion else {
        return Ok(());
    };
    let shots = seeded_shots(&s.chart, &sampling(cfg), shots);
    let comparisons = step(cross_validate(&s.metric, gbar, &shots, &cfg.integrator, STATIONS))?;
    let worst = comparisons.iter().map(|c| c.distance).fold(0.0, f64::max);
    findings.expect(
        "geodesics coincide as unparameterized curves",
        worst <= GEODESIC_TOL,
        format!("max trace distance {worst:.3e} over {} shots", comparisons.len()),
    );
    findings.record(
        "geodesics",
        serde_json::json!({ "stations": STATIONS, "max_distance": worst, "shots": comparisons }),
    );
    Ok(())
}

fn representation_stage(
    cfg: &RunConfig,
    s: &Scenario,
    labels: Option<&[String]>,
    pts: &[Point<f64>],
    findings: &mut Findings,
) -> Result<(), Failure> {
    let basis = s
        .sol_basis
        .as_ref()
        .ok_or_else(|| Failure::Usage(format!("scenario `{}` has no solution basis", s.name)))?;
    let maps: Vec<_> = match labels {
        Some(list) => list
            .iter()
            .map(|l| s.map(l).ok_or_else(|| Failure::Usage(format!("scenario has no map `{l}`"))))
            .collect::<Result<_, _>>()?,
        None => s.maps.iter().collect(),
    };
    if maps.is_empty() {
        return Err(Failure::Usage("no maps selected".into()));
    }

    let spectra: Vec<Vec<f64>> = pts
        .iter()
        .take(20)
        .map(|p| Ok(simultaneous_diag(&basis.first.eval(p)?, &basis.second.eval(p)?)?.s))
        .collect::<projmetric::Result<_>>()
        .map_err(|e| Failure::Pipeline(e.to_string()))?;

    let mut entries = Vec::new();
    let mut rows = Vec::new();
    let mut min_eigen = f64::INFINITY;
    for m in &maps {
        let a = step(compute_rep(&m.map, basis, pts))?.with_seed(cfg.seed);
        let class = classify_rep(&a, REP_TOL);
        let label = m.map.label();
        findings.expect(
            format!("A_{label} is constant on the samples"),
            a.fit_residual <= REP_TOL,
            format!("fit residual {:.3e}", a.fit_residual),
        );
        match m.role {
            MapRole::Isometry => findings.expect(
                format!("A_{label} is the identity"),
                class.kind == RepKind::Identity,
                format!("classified {}", class.kind),
            ),
            MapRole::Candidate => findings.expect(
                format!("A_{label} is not the identity"),
                class.kind != RepKind::Identity,
                format!("classified {} (det {:.6})", class.kind, a.det),
            ),
        }
        for spectrum in &spectra {
            for k in 1..=4 {
                for v in pullback_spectrum(&a, spectrum, k) {
                    min_eigen = min_eigen.min(v);
                }
            }
        }
        rows.push(serde_json::json!({ "map": label, "A": a, "class": class }));
        entries.push(LabeledClass {
            label: label.to_string(),
            class,
            spectrum: spectra.first().cloned(),
        });
    }
    if !spectra.is_empty() {
        findings.expect(
            "pulled-back solutions stay positive definite",
            min_eigen > 0.0,
            format!("smallest eigenvalue of sigma^-1 (phi^k)*sigma for k <= 4: {min_eigen:.6}"),
        );
    }
    findings.record("representations", rows);

    let mut checks = Vec::new();
    let (mut worst, mut worst_reversed) = (0.0_f64, 0.0_f64);
    for phi in &maps {
        for psi in &maps {
            let c = step(rep_compose_check(&phi.map, &psi.map, basis, pts))?;
            worst = worst.max(c.residual);
            worst_reversed = worst_reversed.max(c.reversed_residual);
            checks.push(serde_json::json!({
                "phi": phi.map.label(),
                "psi": psi.map.label(),
                "residual": c.residual,
                "reversed_residual": c.reversed_residual,
            }));
        }
    }
    findings.expect(
        "A_{psi∘phi} = A_psi A_phi",
        worst <= REP_TOL,
        format!("max residual {worst:.3e}; opposite order {worst_reversed:.3e}"),
    );
    findings.record("composition", checks);

    let q = quotient_conclusion(&entries, REP_TOL);
    if maps.iter().any(|m| m.role == MapRole::Candidate) {
        findings.expect(
            "quotient conclusion",
            q.bound_consistent && q.contradictions.is_empty() && q.unresolved.is_empty() && q.homothety_impossible.is_empty(),
            q.verdicts.join("; "),
        );
    }
    findings.record("quotient", q);
    Ok(())
}

fn verify_example(
    cfg: &RunConfig,
    n: usize,
    f: &str,
    orientable: bool,
    base: &str,
    findings: &mut Findings,
) -> Result<(), Failure> {
    if base != "flat" {
        return Err(Failure::Usage(format!("unsupported base `{base}` (only `flat`)")));
    }
    let mut spec = LeviCivitaSpec::new(n).with_profile(input(projmetric::parse(f))?).orientable(orientable);
    spec.sampling = sampling(cfg);
    let s = input(build_levi_civita_family(&spec))?;
    save_if_requested(cfg, &s)?;
    findings.record("scenario", summarize(&s));
    let pts = s.samples();
    classification_stage(cfg, &s, &pts, findings)?;
    geodesic_stage(cfg, &s, cfg.shots, findings)?;
    representation_stage(cfg, &s, None, &pts, findings)?;

    // the candidate swaps its solution basis: A = [[0, 1], [1, 0]]
    let phi = &s.maps[0].map;
    let a = step(compute_rep(phi, s.sol_basis.as_ref().unwrap(), &pts))?;
    let gap = (&a.matrix() - &Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])).max_abs();
    findings.expect(
        format!("A_{} = [[0,1],[1,0]]", phi.label()),
        gap <= REP_TOL,
        format!("max deviation {gap:.3e}"),
    );
    findings.record("A", a.matrix().to_rows());
    Ok(())
}

fn pullback_check(cfg: &RunConfig, f: &str, grid: usize, findings: &mut Findings) -> Result<(), Failure> {
    let f = input(projmetric::parse(f))?;
    if grid < 2 {
        return Err(Failure::Usage(format!("--grid must be at least 2, got {grid}")));
    }
    let mut rows = Vec::new();
    for n in [2, 3, 4] {
        let chart = step(family_chart(n))?;
        let mut worst = 0.0_f64;
        for p in sample_points(&chart, &sampling(cfg)) {
            worst = worst.max(input(pullback_formula_residual(&f, n, &p))?);
        }
        findings.expect(
            format!("closed-form pullback, n = {n}"),
            worst <= IDENTITY_TOL,
            format!("max relative deviation {worst:.3e} at {} points", cfg.samples),
        );
        rows.push(serde_json::json!({ "n": n, "max_relative_deviation": worst }));
    }
    let algebraic = algebraic_identity_residual(grid);
    findings.expect(
        format!("algebraic identity on a {grid}x{grid} grid"),
        algebraic <= IDENTITY_TOL,
        format!("max relative deviation {algebraic:.3e}"),
    );
    findings.record("pointwise", rows);
    findings.record("algebraic", serde_json::json!({ "grid": grid, "max_relative_deviation": algebraic }));
    Ok(())
}

fn torus(cfg: &RunConfig, m: &[i64; 4], findings: &mut Findings) -> Result<(), Failure> {
    let mut s = input(build_flat_torus([[m[0], m[1]], [m[2], m[3]]]))?;
    s.sampling = sampling(cfg);
    save_if_requested(cfg, &s)?;
    findings.record("scenario", summarize(&s));
    let pts = s.samples();
    classification_stage(cfg, &s, &pts, findings)?;
    let pulled = step(pullback_metric(&s.maps[0].map, &s.metric, &pts[0]))?;
    findings.record("pullback_metric", pulled.to_rows());
    Ok(())
}

fn sphere(cfg: &RunConfig, m: &[f64; 9], findings: &mut Findings) -> Result<(), Failure> {
    let a = Matrix::from_fn(3, 3, |i, j| m[3 * i + j]);
    let mut s = input(build_sphere_projective(&a))?;
    s.sampling = sampling(cfg);
    save_if_requested(cfg, &s)?;
    findings.record("scenario", summarize(&s));
    let pts = s.samples();
    classification_stage(cfg, &s, &pts, findings)?;

    let icfg = IntegratorConfig {
        mode: Parameterization::ArcLength,
        ..cfg.integrator
    };
    let mut worst = 0.0_f64;
    for shot in seeded_shots(&s.chart, &s.sampling, cfg.shots) {
        let p = step(s.chart.canonicalize(&shot.start))?;
        let trace = step(integrate_geodesic(&s.metric, &p, &shot.direction, &icfg))?;
        worst = worst.max(collinearity_residual(&trace, &shot.direction));
    }
    findings.expect(
        "gnomonic geodesics are straight",
        worst <= COLLINEARITY_TOL,
        format!("max collinearity residual {worst:.3e} over {} shots", cfg.shots),
    );
    findings.record("collinearity_max", worst);
    Ok(())
}

fn lemma1(alpha: f64, s: &[f64], kmax: u64, findings: &mut Findings) {
    let searches: Vec<_> = s.iter().map(|&si| lemma_search(alpha, si, kmax)).collect();
    for r in &searches {
        let bound = r.bound.map_or("none (trivial rotation)".to_string(), |b| b.to_string());
        let detail = match r.k {
            Some(k) => format!("k = {k}, value {:.6}, bound {bound}", r.value.unwrap_or(f64::NAN)),
            None => format!("none up to {kmax}, bound {bound}"),
        };
        let conclusive = r.bound.is_none_or(|b| b <= kmax);
        findings.expect(
            format!("s = {}: search agrees with the bound", r.s),
            r.within_bound || !conclusive,
            detail,
        );
    }
    let first = searches.iter().filter_map(|r| r.k).min();
    let verdict = match first {
        Some(k) => format!("violating k = {k}"),
        None => format!("no violating k up to {kmax}"),
    };
    findings.record("verdict", verdict);
    findings.record("searches", searches);
}

fn geodesics(
    cfg: &RunConfig,
    path: &Path,
    shots: usize,
    emit_csv: Option<&Path>,
    findings: &mut Findings,
) -> Result<(), Failure> {
    let s = input(scenario_file::load(path))?;
    let gbar = s
        .companion
        .as_ref()
        .ok_or_else(|| Failure::Usage(format!("scenario `{}` has no companion metric", s.name)))?;
    findings.record("scenario", summarize(&s));
    geodesic_stage(cfg, &s, shots, findings)?;
    if let Some(dir) = emit_csv {
        fs::create_dir_all(dir).map_err(|e| Failure::Pipeline(format!("creating {}: {e}", dir.display())))?;
        let hash = crate::report::config_hash(cfg);
        let mut files = Vec::new();
        for (i, shot) in seeded_shots(&s.chart, &sampling(cfg), shots).iter().enumerate() {
            let (a, b) = step(shot_traces(&s.metric, gbar, shot, &cfg.integrator))?;
            for trace in [a, b] {
                let name = format!("shot{i:03}_{}.csv", sanitize(&trace.metric_id));
                let mut buf = Vec::new();
                trace
                    .write_csv(&s.chart, &hash, &mut buf)
                    .map_err(|e| Failure::Pipeline(e.to_string()))?;
                fs::write(dir.join(&name), buf).map_err(|e| Failure::Pipeline(format!("writing {name}: {e}")))?;
                files.push(name);
            }
        }
        findings.record("csv_files", files);
    }
    Ok(())
}

fn sanitize(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' }).collect()
}
