//! Relaxation: upper bounds on the L²-relaxed energy via explicit
//! approximating sequences, and two-sided interval assembly together with
//! the curve-ensemble lower bounds.
//!
//! The workhorse construction is the plateau sequence on Cantor-type
//! components: a field that is constant on every surviving stage-n interval
//! (taking the value of the target field at the interval midpoint) and
//! crosses the removed gaps with quintic ramps. Its gradient vanishes
//! identically on the surviving intervals, so its energy at any quadrature
//! depth ≥ n is exactly zero while the L² distance to the target decays
//! with the interval length.

use serde::Serialize;

use crate::bundle::{assign_bundle, BundleField};
use crate::energy::EnergyEvaluator;
use crate::error::{Error, Result};
use crate::fields::{smoothstep, smoothstep_deriv, BoxRegion, ScalarField, SMOOTHSTEP_MAX_SLOPE};
use crate::measure::{integrate_with, quadrature, Measure, MeasureComponent, Resolution};
use crate::testplan::{cheeger_lower_bound, CurveEnsemble};

/// Piecewise profile: plateaus on intervals, quintic ramps across gaps,
/// ramps to zero over a pad outside the first/last interval.
#[derive(Debug, Clone)]
struct PlateauProfile {
    /// (lo, hi, value) per surviving interval, sorted.
    plateaus: Vec<(f64, f64, f64)>,
    pad: f64,
}

impl PlateauProfile {
    fn eval(&self, s: f64) -> (f64, f64) {
        let first = self.plateaus.first().unwrap();
        let last = self.plateaus.last().unwrap();
        if s <= first.0 - self.pad || s >= last.1 + self.pad {
            return (0.0, 0.0);
        }
        if s < first.0 {
            let t = (s - (first.0 - self.pad)) / self.pad;
            return (first.2 * smoothstep(t), first.2 * smoothstep_deriv(t) / self.pad);
        }
        if s > last.1 {
            let t = ((last.1 + self.pad) - s) / self.pad;
            return (last.2 * smoothstep(t), -last.2 * smoothstep_deriv(t) / self.pad);
        }
        // binary search for the first plateau ending at or after s
        let i = self
            .plateaus
            .partition_point(|&(_, hi, _)| hi < s);
        let (lo, _, v) = self.plateaus[i];
        if s >= lo {
            return (v, 0.0);
        }
        // in the gap between plateau i-1 and plateau i
        let (_, prev_hi, prev_v) = self.plateaus[i - 1];
        let w = lo - prev_hi;
        let t = (s - prev_hi) / w;
        (
            prev_v + (v - prev_v) * smoothstep(t),
            (v - prev_v) * smoothstep_deriv(t) / w,
        )
    }

    fn lipschitz(&self) -> f64 {
        let mut l = 0.0f64;
        let first = self.plateaus.first().unwrap();
        let last = self.plateaus.last().unwrap();
        l = l.max(first.2.abs() * SMOOTHSTEP_MAX_SLOPE / self.pad);
        l = l.max(last.2.abs() * SMOOTHSTEP_MAX_SLOPE / self.pad);
        for pair in self.plateaus.windows(2) {
            let gap = pair[1].0 - pair[0].1;
            l = l.max((pair[1].2 - pair[0].2).abs() * SMOOTHSTEP_MAX_SLOPE / gap);
        }
        l
    }

    fn max_abs(&self) -> f64 {
        self.plateaus
            .iter()
            .map(|(_, _, v)| v.abs())
            .fold(0.0, f64::max)
    }
}

/// Half-width of the transversal collar where the plateau field equals its
/// one-dimensional profile, and of the surrounding decay shell.
const COLLAR_INNER: f64 = 0.05;
const COLLAR_OUTER: f64 = 0.15;

/// Stage-n plateau approximation of `f` on a Cantor component of `measure`.
///
/// The returned field is constant on every surviving stage-`stage` interval
/// with value f(interval midpoint), ramps across removed gaps, and decays to
/// zero transversally to the embedding axis within a thin collar.
pub fn plateau_sequence(
    f: &ScalarField,
    measure: &Measure,
    component: usize,
    stage: usize,
) -> Result<ScalarField> {
    let (_, comp) = measure
        .components()
        .get(component)
        .ok_or_else(|| Error::Config(format!("no component {component}")))?;
    let c = match comp {
        MeasureComponent::Cantor(c) => c.clone(),
        other => {
            return Err(Error::Config(format!(
                "plateau sequences need a cantor component, got {}",
                other.kind()
            )))
        }
    };
    if stage > c.depth_default {
        return Err(Error::Config(format!(
            "plateau stage {stage} exceeds the component depth limit {}",
            c.depth_default
        )));
    }
    if f.dim() != measure.dim() {
        return Err(Error::DimensionMismatch {
            expected: measure.dim(),
            got: f.dim(),
        });
    }
    let plateaus: Vec<(f64, f64, f64)> = c
        .intervals(stage)
        .into_iter()
        .map(|(a, b, _)| (a, b, f.value(&c.embed(0.5 * (a + b)))))
        .collect();
    let profile = PlateauProfile {
        plateaus,
        pad: 0.1 * c.length,
    };

    let d = measure.dim();
    let axis = c.axis;
    let origin = c.origin.clone();
    let collar = move |xi: f64, oi: f64| -> (f64, f64) {
        let r = (xi - oi).abs();
        if r <= COLLAR_INNER {
            (1.0, 0.0)
        } else if r >= COLLAR_OUTER {
            (0.0, 0.0)
        } else {
            let w = COLLAR_OUTER - COLLAR_INNER;
            let t = (COLLAR_OUTER - r) / w;
            (smoothstep(t), -smoothstep_deriv(t) / w * (xi - oi).signum())
        }
    };

    let lipschitz = {
        let axial = profile.lipschitz();
        let trans = profile.max_abs() * SMOOTHSTEP_MAX_SLOPE / (COLLAR_OUTER - COLLAR_INNER);
        (axial * axial + (d - 1) as f64 * trans * trans).sqrt()
    };

    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    for i in 0..d {
        if i == axis {
            lo[i] = profile.plateaus.first().unwrap().0 - profile.pad;
            hi[i] = profile.plateaus.last().unwrap().1 + profile.pad;
        } else {
            lo[i] = origin[i] - COLLAR_OUTER;
            hi[i] = origin[i] + COLLAR_OUTER;
        }
    }
    let support = BoxRegion::new(lo, hi)?;

    let (p2, o2, col2) = (profile.clone(), origin.clone(), collar);
    let value = move |x: &[f64]| -> f64 {
        let mut v = p2.eval(x[axis]).0;
        for i in 0..x.len() {
            if i != axis {
                v *= col2(x[i], o2[i]).0;
            }
        }
        v
    };
    let gradient = move |x: &[f64]| -> Vec<f64> {
        let (pv, pd) = profile.eval(x[axis]);
        let collars: Vec<(f64, f64)> = (0..x.len())
            .map(|i| if i == axis { (1.0, 0.0) } else { collar(x[i], origin[i]) })
            .collect();
        (0..x.len())
            .map(|j| {
                let mut g = if j == axis { pd } else { pv };
                for (i, (cv, cd)) in collars.iter().enumerate() {
                    if i == axis {
                        continue;
                    }
                    g *= if i == j { *cd } else { *cv };
                }
                g
            })
            .collect()
    };

    Ok(ScalarField::new(
        d,
        format!("plateau[c{component} n{stage}]({})", f.name()),
        lipschitz,
        value,
        gradient,
    )
    .with_support(support))
}

/// How an upper-bound approximating sequence is built.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UpperConstructor {
    /// The constant sequence f_n = f: always valid, bound = E(f).
    Trivial,
    /// Plateau sequences on a Cantor component at the listed stages.
    Plateau { component: usize, stages: Vec<usize> },
}

/// One stage of an approximating sequence.
#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub stage: usize,
    /// ‖f_n − f‖_{L²(μ)} at the working resolution.
    pub l2_error: f64,
    /// Projected-gradient energy of f_n.
    pub energy: f64,
}

/// Replayable record of one upper-bound construction.
#[derive(Debug, Clone, Serialize)]
pub struct RelaxationCertificate {
    pub measure: String,
    pub field: String,
    pub constructor: UpperConstructor,
    pub resolution: String,
    pub stages: Vec<StageRecord>,
    /// min over recorded stage energies.
    pub upper_bound: f64,
    pub unsound: bool,
}

/// Evaluate one upper-bound constructor for `f` on the bundle's measure.
pub fn upper_bound_certificate(
    f: &ScalarField,
    bundle: &BundleField,
    constructor: &UpperConstructor,
    resolution: &Resolution,
) -> Result<RelaxationCertificate> {
    let measure = bundle.measure();
    let ev = EnergyEvaluator::projected_with_bundle(bundle, resolution)?;
    let rule = quadrature(measure, resolution)?;
    let mut stages = Vec::new();
    match constructor {
        UpperConstructor::Trivial => {
            stages.push(StageRecord {
                stage: 0,
                l2_error: 0.0,
                energy: ev.energy(f)?,
            });
        }
        UpperConstructor::Plateau {
            component,
            stages: ns,
        } => {
            if ns.is_empty() {
                return Err(Error::Config("plateau constructor needs stages".into()));
            }
            for &n in ns {
                let fnn = plateau_sequence(f, measure, *component, n)?;
                let l2_error = integrate_with(&rule, |x| {
                    let d = fnn.value(x) - f.value(x);
                    d * d
                })?
                .max(0.0)
                .sqrt();
                stages.push(StageRecord {
                    stage: n,
                    l2_error,
                    energy: ev.energy(&fnn)?,
                });
            }
        }
    }
    let upper_bound = stages
        .iter()
        .map(|s| s.energy)
        .fold(f64::INFINITY, f64::min);
    Ok(RelaxationCertificate {
        measure: measure.id().to_string(),
        field: f.name().to_string(),
        constructor: constructor.clone(),
        resolution: resolution.descriptor(),
        stages,
        upper_bound,
        unsound: bundle.is_overridden(),
    })
}

/// A two-sided enclosure of the relaxed energy of `f`.
#[derive(Debug, Clone, Serialize)]
pub struct CheegerInterval {
    pub measure: String,
    pub field: String,
    pub lower: f64,
    pub upper: f64,
    pub certificates: Vec<RelaxationCertificate>,
    /// One line per ensemble: the bound it produced, or why it was refused.
    pub lower_notes: Vec<String>,
    pub unsound: bool,
}

/// Assemble lower bounds from curve ensembles and upper bounds from
/// approximating-sequence constructors into one interval.
///
/// Ensembles whose compression certificate fails to validate contribute no
/// bound (with a note); an empty constructor list yields an infinite upper
/// bound. A crossed interval is a hard `CertificateInconsistent` error.
pub fn assemble_cheeger_interval(
    f: &ScalarField,
    measure: &Measure,
    ensembles: &[CurveEnsemble],
    constructors: &[UpperConstructor],
    resolution: &Resolution,
) -> Result<CheegerInterval> {
    assemble_with_bundle(f, &assign_bundle(measure), ensembles, constructors, resolution)
}

/// Same as `assemble_cheeger_interval` for an explicit bundle.
pub fn assemble_with_bundle(
    f: &ScalarField,
    bundle: &BundleField,
    ensembles: &[CurveEnsemble],
    constructors: &[UpperConstructor],
    resolution: &Resolution,
) -> Result<CheegerInterval> {
    let measure = bundle.measure();
    let rule = quadrature(measure, resolution)?;
    let mut lower = 0.0f64;
    let mut lower_notes = Vec::new();
    for (i, ens) in ensembles.iter().enumerate() {
        match cheeger_lower_bound(f, ens, measure, &rule, 16) {
            Ok(lb) => {
                let bound = 0.5 * lb * lb;
                lower = lower.max(bound);
                lower_notes.push(format!("ensemble[{i}] ({}): bound {bound}", ens.note()));
            }
            Err(e) => lower_notes.push(format!("ensemble[{i}] ({}): refused: {e}", ens.note())),
        }
    }
    let mut certificates = Vec::new();
    let mut upper = f64::INFINITY;
    for c in constructors {
        let cert = upper_bound_certificate(f, bundle, c, resolution)?;
        upper = upper.min(cert.upper_bound);
        certificates.push(cert);
    }
    if lower > upper + 1e-9 * (1.0 + upper) {
        return Err(Error::CertificateInconsistent(format!(
            "lower bound {lower} exceeds upper bound {upper} for '{}' on '{}'",
            f.name(),
            measure.id()
        )));
    }
    Ok(CheegerInterval {
        measure: measure.id().to_string(),
        field: f.name().to_string(),
        lower,
        upper,
        certificates,
        lower_notes,
        unsound: bundle.is_overridden(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::grassmann::Subspace;
    use crate::measure::l2_norm;

    fn res() -> Resolution {
        Resolution::default()
    }

    #[test]
    fn plateau_is_constant_on_surviving_intervals() {
        let mu = catalog::fat_cantor_measure(1);
        let f = catalog::x_cut(1);
        let p = plateau_sequence(&f, &mu, 0, 3).unwrap();
        let rule = quadrature(&mu, &res()).unwrap();
        // depth-12 nodes lie inside stage-3 intervals: gradient exactly 0
        for x in rule.nodes() {
            assert_eq!(p.gradient(x), vec![0.0]);
        }
    }

    #[test]
    fn plateau_l2_error_decreases_and_energy_is_zero() {
        let mu = catalog::fat_cantor_measure(1);
        let f = catalog::x_cut(1);
        let bundle = assign_bundle(&mu);
        let cert = upper_bound_certificate(
            &f,
            &bundle,
            &UpperConstructor::Plateau {
                component: 0,
                stages: vec![2, 4, 6, 8],
            },
            &res(),
        )
        .unwrap();
        assert_eq!(cert.upper_bound, 0.0);
        for w in cert.stages.windows(2) {
            assert!(w[1].l2_error <= w[0].l2_error + 1e-12, "{:?}", cert.stages);
        }
        assert!(cert.stages.last().unwrap().l2_error < 0.01);
    }

    #[test]
    fn plateau_matches_field_values_at_interval_midpoints() {
        let mu = catalog::classic_cantor_measure(2);
        let f = catalog::x_cut(2);
        let p = plateau_sequence(&f, &mu, 0, 4).unwrap();
        let c = match &mu.components()[0].1 {
            crate::measure::MeasureComponent::Cantor(c) => c.clone(),
            _ => unreachable!(),
        };
        for (a, b, _) in c.intervals(4) {
            let mid = c.embed(0.5 * (a + b));
            assert!((p.value(&mid) - f.value(&mid)).abs() < 1e-15);
        }
    }

    #[test]
    fn plateau_gradient_matches_fd_in_gaps() {
        let mu = catalog::classic_cantor_measure(2);
        let f = catalog::x_cut(2);
        let p = plateau_sequence(&f, &mu, 0, 2).unwrap();
        // a point in the central removed gap, slightly off-axis
        let x = [0.5, 0.03];
        let fd = crate::fields::fd_gradient(&p, &x, 1e-6);
        assert!(crate::linalg::dist(&fd, &p.gradient(&x)) < 1e-6);
        // and inside the transversal decay shell
        let y = [0.5, 0.1];
        let fd = crate::fields::fd_gradient(&p, &y, 1e-6);
        assert!(crate::linalg::dist(&fd, &p.gradient(&y)) < 1e-6);
    }

    #[test]
    fn plateau_rejects_bad_targets() {
        let f = catalog::x_cut(2);
        assert!(plateau_sequence(&f, &catalog::segment_measure(), 0, 3).is_err());
        let mu = catalog::fat_cantor_measure(2);
        assert!(plateau_sequence(&f, &mu, 0, 13).is_err());
        assert!(plateau_sequence(&f, &mu, 5, 3).is_err());
    }

    #[test]
    fn trivial_constructor_reproduces_energy() {
        let mu = catalog::segment_measure();
        let f = catalog::x_cut(2);
        let cert = upper_bound_certificate(
            &f,
            &assign_bundle(&mu),
            &UpperConstructor::Trivial,
            &res(),
        )
        .unwrap();
        assert!((cert.upper_bound - 0.5).abs() < 1e-12);
    }

    #[test]
    fn segment_interval_brackets_the_energy() {
        let mu = catalog::segment_measure();
        let f = catalog::x_cut(2);
        let interval = assemble_cheeger_interval(
            &f,
            &mu,
            &[catalog::sliding_segment_ensemble(256)],
            &[UpperConstructor::Trivial],
            &res(),
        )
        .unwrap();
        assert!((interval.lower - 0.25).abs() < 1e-9, "{}", interval.lower);
        assert!((interval.upper - 0.5).abs() < 1e-12);
        assert!(interval.lower <= interval.upper);
    }

    #[test]
    fn fat_cantor_upper_bound_collapses() {
        let mu = catalog::fat_cantor_measure(1);
        let f = catalog::x_cut(1);
        let interval = assemble_cheeger_interval(
            &f,
            &mu,
            &[],
            &[
                UpperConstructor::Trivial,
                UpperConstructor::Plateau {
                    component: 0,
                    stages: vec![4, 8],
                },
            ],
            &res(),
        )
        .unwrap();
        assert_eq!(interval.lower, 0.0);
        assert_eq!(interval.upper, 0.0);
        // while the trivial certificate keeps the unrelaxed energy visible
        assert!((interval.certificates[0].upper_bound - (0.25 + 0.5f64.powi(14))).abs() < 1e-12);
    }

    #[test]
    fn failing_ensemble_is_noted_not_fatal() {
        let mu = catalog::segment_measure();
        let f = catalog::x_cut(2);
        let interval = assemble_cheeger_interval(
            &f,
            &mu,
            &[catalog::dirac_ensemble(vec![0.5, 0.0])],
            &[UpperConstructor::Trivial],
            &res(),
        )
        .unwrap();
        assert_eq!(interval.lower, 0.0);
        assert!(interval.lower_notes[0].contains("refused"));
    }

    #[test]
    fn crossed_interval_is_a_hard_error() {
        let mu = catalog::segment_measure();
        let f = catalog::x_cut(2);
        let mut bundle = assign_bundle(&mu);
        bundle.override_component(0, Subspace::zero(2));
        let err = assemble_with_bundle(
            &f,
            &bundle,
            &[catalog::sliding_segment_ensemble(256)],
            &[UpperConstructor::Trivial],
            &res(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::CertificateInconsistent(_)), "{err}");
    }

    #[test]
    fn overridden_bundle_is_flagged() {
        let mu = catalog::fat_cantor_measure(1);
        let f = catalog::x_cut(1);
        let mut bundle = assign_bundle(&mu);
        bundle.override_component(0, Subspace::zero(1));
        let cert = upper_bound_certificate(&f, &bundle, &UpperConstructor::Trivial, &res()).unwrap();
        assert!(cert.unsound);
    }

    #[test]
    fn plateau_l2_error_against_closed_form() {
        // stage-0 plateau of x on the full interval is the constant 1/2 on
        // [0,1]: ‖x − ½‖²_{L²} = 1/12 against Lebesgue
        let mu = catalog::lebesgue_interval();
        let cantor_host = catalog::fat_cantor_measure(1);
        let f = catalog::x_cut(1);
        let p = plateau_sequence(&f, &cantor_host, 0, 0).unwrap();
        let rule = quadrature(&mu, &Resolution { grid: 2000, ..res() }).unwrap();
        let diff_sq = integrate_with(&rule, |x| {
            let d = p.value(x) - f.value(x);
            d * d
        })
        .unwrap();
        assert!((diff_sq - 1.0 / 12.0).abs() < 1e-6, "{diff_sq}");
        let _ = l2_norm(&rule, &p).unwrap();
    }
}
