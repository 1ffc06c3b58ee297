//! The experiment runner: turns a declarative configuration into CSV rows,
//! a JSON report embedding the resolved configuration, and a short summary.

use std::path::Path;

use serde_json::json;

use crate::bundle::assign_bundle;
use crate::closability::{identity_gap_check, transversal_counterexample, verify_certificate};
use crate::config::{EnsembleSpec, ExperimentConfig, ExperimentKind, FieldSpec, MeasureSpec};
use crate::energy::{parallelogram_defect, EnergyEvaluator};
use crate::error::{Error, Result};
use crate::fields::NormPlugin;
use crate::measure::quadrature;
use crate::relax::{assemble_cheeger_interval, upper_bound_certificate, UpperConstructor};
use crate::report::{write_csv, write_json, CsvRow};
use crate::testplan::{check_compression, check_tangency, check_wug, cheeger_lower_bound};
use crate::{linalg, tol};

/// Result of one run, for CLI exit-code and summary handling.
#[derive(Debug)]
pub struct RunOutcome {
    /// One human-readable line per major result.
    pub summary: Vec<String>,
    /// True when a mathematical invariant failed (CLI exit code 2).
    pub invariant_violation: bool,
}

/// Built-in preset names.
pub const PRESETS: [&str; 3] = ["hilbertianity-defect", "cantor-gap", "fukushima"];

fn cut_coordinate(axis: usize) -> FieldSpec {
    FieldSpec::Cutoff {
        field: Box::new(FieldSpec::Coordinate { axis }),
    }
}

/// A ready-made experiment configuration by name.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let base = |kind, measure: &str| -> Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            kind,
            measure: MeasureSpec::named(measure)
                .ok_or_else(|| Error::Config(format!("unknown measure '{measure}'")))?,
            fields: vec![],
            p: NormPlugin::L2,
            resolution: Default::default(),
            ensembles: vec![],
            plateau: vec![],
            seed: 0,
        })
    };
    match name {
        // the ℓ^∞ parallelogram defect on the unit square
        "hilbertianity-defect" => {
            let mut cfg = base(ExperimentKind::Defect, "lebesgue-box")?;
            cfg.fields = vec![cut_coordinate(0), cut_coordinate(1)];
            cfg.p = NormPlugin::LInf;
            Ok(cfg)
        }
        // relaxed-energy collapse on the positive-measure Cantor set
        "cantor-gap" => {
            let mut cfg = base(ExperimentKind::Closability, "fat-cantor-1d")?;
            cfg.fields = vec![cut_coordinate(0)];
            cfg.plateau = vec![(0, vec![2, 4, 6, 8])];
            Ok(cfg)
        }
        // closability probe with a two-sided energy enclosure on the segment
        "fukushima" => {
            let mut cfg = base(ExperimentKind::Sandwich, "unit-segment")?;
            cfg.fields = vec![cut_coordinate(0)];
            cfg.ensembles = vec![EnsembleSpec::SlidingSegment { count: 256 }];
            Ok(cfg)
        }
        other => Err(Error::Config(format!(
            "unknown preset '{other}'; available: {}",
            PRESETS.join(", ")
        ))),
    }
}

/// Run a configuration, writing `results.csv` and `report.json` to
/// `out_dir`.
pub fn run(
    config: &ExperimentConfig,
    out_dir: &Path,
    resolution_scale: Option<f64>,
) -> Result<RunOutcome> {
    let measure = config.measure.build()?;
    let mut resolution = config.resolution.build();
    if let Some(s) = resolution_scale {
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::Config(format!("bad resolution scale {s}")));
        }
        resolution = resolution.scaled(s);
    }
    let res_label = resolution.descriptor();
    let fields: Vec<_> = config
        .fields
        .iter()
        .map(|spec| spec.build(measure.dim()).map(|f| (spec.clone(), f)))
        .collect::<Result<_>>()?;
    let ensembles: Vec<_> = config.ensembles.iter().map(|e| e.build()).collect();
    let constructors: Vec<UpperConstructor> = std::iter::once(UpperConstructor::Trivial)
        .chain(config.plateau.iter().map(|(c, s)| UpperConstructor::Plateau {
            component: *c,
            stages: s.clone(),
        }))
        .collect();

    let mut rows: Vec<CsvRow> = Vec::new();
    let mut summary: Vec<String> = Vec::new();
    let mut payload = Vec::new();
    let mut violation = false;

    let push = |rows: &mut Vec<CsvRow>, field: &str, functional: &str, p: &str, v: f64| {
        rows.push(CsvRow::new(
            measure.id(),
            field,
            functional,
            p,
            &res_label,
            v,
        ));
    };

    match config.kind {
        ExperimentKind::Energy => {
            let lip_ev = EnergyEvaluator::lip(&measure, config.p, &resolution)?;
            let proj_ev = EnergyEvaluator::projected(&measure, &resolution)?;
            for (_, f) in &fields {
                let e_lip = lip_ev.energy(f)?;
                let e_proj = proj_ev.energy(f)?;
                let norm = crate::energy::sobolev_norm(f, &proj_ev)?;
                push(&mut rows, f.name(), "E_lip", config.p.label(), e_lip);
                push(&mut rows, f.name(), "E_proj", "2", e_proj);
                push(&mut rows, f.name(), "sobolev_norm", "2", norm);
                summary.push(format!(
                    "energy {}: E_lip[{}]={e_lip} E_proj={e_proj} norm={norm}",
                    f.name(),
                    config.p.label()
                ));
                if config.p == NormPlugin::L2 && e_proj > e_lip + 1e-9 * (1.0 + e_lip) {
                    violation = true;
                    summary.push(format!(
                        "INVARIANT VIOLATION: E_proj {e_proj} > E_lip {e_lip} for {}",
                        f.name()
                    ));
                }
            }
        }
        ExperimentKind::Defect => {
            if fields.len() < 2 {
                return Err(Error::Config("defect runs need at least two fields".into()));
            }
            let lip_ev = EnergyEvaluator::lip(&measure, config.p, &resolution)?;
            let proj_ev = EnergyEvaluator::projected(&measure, &resolution)?;
            for pair in fields.windows(2) {
                let (f, g) = (&pair[0].1, &pair[1].1);
                let d_lip = parallelogram_defect(&lip_ev, f, g)?;
                let d_proj = parallelogram_defect(&proj_ev, f, g)?;
                push(
                    &mut rows,
                    &format!("{}|{}", f.name(), g.name()),
                    "defect[E_lip]",
                    config.p.label(),
                    d_lip.defect,
                );
                push(
                    &mut rows,
                    &format!("{}|{}", f.name(), g.name()),
                    "defect[E_proj]",
                    "2",
                    d_proj.defect,
                );
                summary.push(format!(
                    "defect {} vs {}: E_lip[{}] defect {} (relative {}), E_proj defect {}",
                    f.name(),
                    g.name(),
                    config.p.label(),
                    d_lip.defect,
                    d_lip.relative_defect,
                    d_proj.defect
                ));
                if d_proj.relative_defect > tol::QUADRATIC_FORM {
                    violation = true;
                    summary.push(format!(
                        "INVARIANT VIOLATION: projected-gradient form has defect {}",
                        d_proj.defect
                    ));
                }
                payload.push(json!({"lip": d_lip, "projected": d_proj}));
            }
        }
        ExperimentKind::Sandwich => {
            let lip_ev = EnergyEvaluator::lip(&measure, NormPlugin::L2, &resolution)?;
            let proj_ev = EnergyEvaluator::projected(&measure, &resolution)?;
            for (_, f) in &fields {
                let interval =
                    assemble_cheeger_interval(f, &measure, &ensembles, &constructors, &resolution)?;
                let e_proj = proj_ev.energy(f)?;
                let e_lip = lip_ev.energy(f)?;
                push(&mut rows, f.name(), "relaxed_lower", "2", interval.lower);
                push(&mut rows, f.name(), "relaxed_upper", "2", interval.upper);
                push(&mut rows, f.name(), "E_proj", "2", e_proj);
                push(&mut rows, f.name(), "E_lip", "2", e_lip);
                let tol_band = 1e-9 * (1.0 + e_lip);
                if interval.lower > e_proj + tol_band || e_proj > e_lip + tol_band {
                    violation = true;
                    summary.push(format!(
                        "INVARIANT VIOLATION: ordering lower {} ≤ E_proj {e_proj} ≤ E_lip {e_lip} broken",
                        interval.lower
                    ));
                }
                summary.push(format!(
                    "sandwich {}: [{}, {}] around E_proj={e_proj}, E_lip={e_lip}",
                    f.name(),
                    interval.lower,
                    interval.upper
                ));
                payload.push(serde_json::to_value(&interval)?);
            }
        }
        ExperimentKind::PlanCheck => {
            if ensembles.is_empty() {
                return Err(Error::Config("plan checks need at least one ensemble".into()));
            }
            let rule = quadrature(&measure, &resolution)?;
            let bundle = assign_bundle(&measure);
            for (ei, ens) in ensembles.iter().enumerate() {
                let label = format!("ensemble[{ei}]");
                let comp =
                    check_compression(ens, &measure, &rule, &[0.0, 0.25, 0.5, 0.75, 1.0], 16)?;
                let tang = check_tangency(ens, &bundle, &resolution)?;
                let ke = ens.kinetic_energy(resolution.time_grid);
                push(&mut rows, &label, "compression_max_ratio", "-", comp.max_ratio);
                push(&mut rows, &label, "kinetic_energy", "-", ke);
                push(&mut rows, &label, "tangency_max_residual", "-", tang.max_residual);
                summary.push(format!(
                    "{label} ({}): compression {} (max ratio {}), tangency {} (max residual {}), KE {ke}",
                    ens.note(),
                    if comp.pass { "PASS" } else { "FAIL" },
                    comp.max_ratio,
                    if tang.pass { "PASS" } else { "FAIL" },
                    tang.max_residual
                ));
                let mut field_results = Vec::new();
                for (_, f) in &fields {
                    let g = |x: &[f64]| -> f64 {
                        bundle
                            .at_point(x, &resolution)
                            .and_then(|v| v.project(&f.gradient(x)))
                            .map(|p| linalg::norm(&p))
                            .unwrap_or(f64::INFINITY)
                    };
                    let wug = check_wug(f, g, ens, resolution.time_grid);
                    let lb = cheeger_lower_bound(f, ens, &measure, &rule, 16);
                    let lb_value = lb.as_ref().map(|v| 0.5 * v * v).unwrap_or(f64::NAN);
                    push(&mut rows, f.name(), &format!("{label}.wug_max_violation"), "-", wug.max_violation);
                    push(&mut rows, f.name(), &format!("{label}.relaxed_lower"), "2", lb_value);
                    summary.push(format!(
                        "{label} × {}: upper-gradient {} ({}/{} pairs), lower bound {}",
                        f.name(),
                        if wug.pass { "PASS" } else { "FAIL" },
                        wug.satisfied,
                        wug.pairs,
                        match &lb {
                            Ok(v) => format!("{}", 0.5 * v * v),
                            Err(e) => format!("refused ({e})"),
                        }
                    ));
                    field_results.push(json!({
                        "field": f.name(),
                        "wug_pass": wug.pass,
                        "wug_max_violation": wug.max_violation,
                        "lower_bound": lb.ok().map(|v| 0.5 * v * v),
                    }));
                }
                payload.push(json!({
                    "ensemble": ens.note(),
                    "compression": {
                        "pass": comp.pass,
                        "declared": comp.declared_comp,
                        "max_ratio": comp.max_ratio,
                        "ratios_by_bins": comp.ratios_by_bins,
                    },
                    "tangency": {"pass": tang.pass, "max_residual": tang.max_residual},
                    "kinetic_energy": ke,
                    "fields": field_results,
                }));
            }
        }
        ExperimentKind::Relax => {
            let bundle = assign_bundle(&measure);
            for (_, f) in &fields {
                for c in &constructors {
                    let cert = upper_bound_certificate(f, &bundle, c, &resolution)?;
                    for s in &cert.stages {
                        push(
                            &mut rows,
                            f.name(),
                            &format!("relax_stage[{}]", s.stage),
                            "2",
                            s.energy,
                        );
                    }
                    push(&mut rows, f.name(), "relaxed_upper", "2", cert.upper_bound);
                    summary.push(format!(
                        "relax {} via {:?}: upper bound {}",
                        f.name(),
                        c,
                        cert.upper_bound
                    ));
                    payload.push(serde_json::to_value(&cert)?);
                }
            }
        }
        ExperimentKind::Closability => {
            let transversal = transversal_counterexample(&measure, &resolution)?;
            let t_verify = verify_certificate(&transversal, &measure, &resolution)?;
            summary.push(format!(
                "closability[transversal] on {}: {:?} (re-verification {})",
                measure.id(),
                transversal.verdict,
                if t_verify.pass { "PASS" } else { "FAIL" }
            ));
            if !t_verify.pass {
                violation = true;
            }
            payload.push(json!({"certificate": transversal, "verification": t_verify}));
            for (spec, f) in &fields {
                let gap = identity_gap_check(spec, &measure, &config.plateau, &resolution)?;
                let g_verify = verify_certificate(&gap, &measure, &resolution)?;
                summary.push(format!(
                    "closability[identity-gap] for {}: {:?} (re-verification {})",
                    f.name(),
                    gap.verdict,
                    if g_verify.pass { "PASS" } else { "FAIL" }
                ));
                if !g_verify.pass {
                    violation = true;
                }
                if let Some(crate::closability::Witness::IdentityGap {
                    relaxed_upper,
                    lip_energy,
                    ..
                }) = &gap.witness
                {
                    push(&mut rows, f.name(), "identity_gap", "2", lip_energy - relaxed_upper);
                }
                payload.push(json!({"certificate": gap, "verification": g_verify}));
            }
        }
    }

    let mut resolved = config.clone();
    resolved.resolution = crate::config::ResolutionSpec {
        grid: Some(resolution.grid),
        patch: Some(resolution.patch),
        cantor_depth: Some(resolution.cantor_depth),
        time_grid: Some(resolution.time_grid),
    };
    let report = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": config.seed,
        "resolution": res_label,
        "config": resolved,
        "summary": summary,
        "results": payload,
        "invariant_violation": violation,
    });
    write_csv(&out_dir.join("results.csv"), &rows)?;
    write_json(&out_dir.join("report.json"), &report)?;

    Ok(RunOutcome {
        summary,
        invariant_violation: violation,
    })
}

/// Scale-resolution entry point used by the CLI for presets.
pub fn run_preset(
    name: &str,
    out_dir: &Path,
    seed: Option<u64>,
    resolution_scale: Option<f64>,
) -> Result<RunOutcome> {
    let mut cfg = preset(name)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    run(&cfg, out_dir, resolution_scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_build_and_run() {
        for name in PRESETS {
            let dir = tempfile::tempdir().unwrap();
            let outcome = run_preset(name, dir.path(), Some(7), Some(0.5)).unwrap();
            assert!(!outcome.summary.is_empty(), "{name}");
            assert!(!outcome.invariant_violation, "{name}: {:?}", outcome.summary);
            assert!(dir.path().join("results.csv").exists());
            assert!(dir.path().join("report.json").exists());
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn defect_preset_shows_the_linf_defect() {
        let dir = tempfile::tempdir().unwrap();
        let outcome = run_preset("hilbertianity-defect", dir.path(), None, None).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
        let defect_row = csv
            .lines()
            .find(|l| l.contains("defect[E_lip]"))
            .expect("defect row");
        let value: f64 = defect_row.rsplit(',').next().unwrap().parse().unwrap();
        assert!((value - 2.0).abs() < 1e-9, "{defect_row}");
        let proj_row = csv.lines().find(|l| l.contains("defect[E_proj]")).unwrap();
        let pv: f64 = proj_row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(pv.abs() < 1e-9);
        assert!(!outcome.invariant_violation);
    }

    #[test]
    fn cantor_preset_emits_verified_gap_certificates() {
        let dir = tempfile::tempdir().unwrap();
        let outcome = run_preset("cantor-gap", dir.path(), None, None).unwrap();
        assert!(outcome
            .summary
            .iter()
            .any(|l| l.contains("identity-gap") && l.contains("NotClosable")));
        let report = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
        assert!(report.contains("NOT_CLOSABLE"));
        assert!(report.contains("\"pass\": true"));
    }

    #[test]
    fn identical_runs_are_byte_identical() {
        let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_preset("fukushima", d1.path(), Some(3), None).unwrap();
        run_preset("fukushima", d2.path(), Some(3), None).unwrap();
        let a = std::fs::read(d1.path().join("results.csv")).unwrap();
        let b = std::fs::read(d2.path().join("results.csv")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_errors_are_reported() {
        let cfg = ExperimentConfig {
            kind: ExperimentKind::Defect,
            measure: MeasureSpec::named("lebesgue-interval").unwrap(),
            fields: vec![cut_coordinate(0)],
            p: NormPlugin::L2,
            resolution: Default::default(),
            ensembles: vec![],
            plateau: vec![],
            seed: 0,
        };
        let dir = tempfile::tempdir().unwrap();
        assert!(run(&cfg, dir.path(), None).is_err());
        assert!(run(&preset("fukushima").unwrap(), dir.path(), Some(-1.0)).is_err());
    }
}
