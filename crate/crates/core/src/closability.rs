//! Closability probes for the Sobolev-norm form ‖f‖² = ‖f‖²_{L²} + 2E(f).
//!
//! Two mechanisms can certify non-closability:
//!
//! * a vanishing sequence: fields f_n with ‖f_n‖_{L²(μ)} → 0 whose gradient
//!   samples converge to a nonzero limit field — built transversally to a
//!   dimension-deficient component;
//! * an identity gap: an approximating-sequence upper bound on the relaxed
//!   energy strictly below the unrelaxed `lip` energy.
//!
//! Verdicts are asymmetric by construction: the probes can certify
//! `NOT_CLOSABLE` with a replayable witness, but can never certify
//! closability, only report `NO_COUNTEREXAMPLE_FOUND`.

use serde::{Deserialize, Serialize};

use crate::config::FieldSpec;
use crate::error::{Error, Result};
use crate::fields::{bump_cutoff, BoxRegion, NormPlugin, ScalarField};
use crate::linalg;
use crate::measure::{
    l2_norm, l2_norm_samples, quadrature, Measure, MeasureComponent, Patch, Resolution,
};
use crate::relax::{assemble_cheeger_interval, UpperConstructor};
use crate::tol;

/// Compactly supported transition profile θ(t) = t·exp(1 − 1/(1 − t²)) for
/// |t| < 1, 0 outside. θ(0) = 0, θ'(0) = 1, and θ vanishes to all orders at
/// |t| = 1, so n·s ≥ 1 kills a stage-n field exactly.
pub fn transition(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        t * (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Derivative of `transition`.
pub fn transition_deriv(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        let u = 1.0 - t * t;
        (1.0 - 1.0 / u).exp() * (1.0 - 2.0 * t * t / (u * u))
    }
}

/// The level-set function s whose zero set contains a component's support.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransversalGeometry {
    /// s(x) = (x − base)·direction, |direction| = 1.
    Linear { base: Vec<f64>, direction: Vec<f64> },
    /// s(x) = |(x₀, x₁) − center| − radius.
    RadialDistance { center: Vec<f64>, radius: f64 },
    /// s(x) = x₁ − p(x₀) for the graph of the polynomial p.
    GraphLevel { coeffs: Vec<f64> },
}

impl TransversalGeometry {
    pub fn level(&self, x: &[f64]) -> f64 {
        match self {
            TransversalGeometry::Linear { base, direction } => {
                linalg::dot(&linalg::sub(x, base), direction)
            }
            TransversalGeometry::RadialDistance { center, radius } => {
                (x[0] - center[0]).hypot(x[1] - center[1]) - radius
            }
            TransversalGeometry::GraphLevel { coeffs } => {
                x[1] - coeffs.iter().rev().fold(0.0, |acc, c| acc * x[0] + c)
            }
        }
    }

    pub fn level_gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            TransversalGeometry::Linear { direction, .. } => direction.clone(),
            TransversalGeometry::RadialDistance { center, .. } => {
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                let rho = dx.hypot(dy);
                let mut g = vec![0.0; x.len()];
                if rho > 1e-12 {
                    g[0] = dx / rho;
                    g[1] = dy / rho;
                }
                g
            }
            TransversalGeometry::GraphLevel { coeffs } => {
                let dp = coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .fold(0.0, |acc, (i, c)| acc * x[0] + i as f64 * c);
                let mut g = vec![0.0; x.len()];
                g[0] = -dp;
                g[1] = 1.0;
                g
            }
        }
    }
}

/// Replayable recipe for a vanishing sequence f_n = η·θ(n·s)/n.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SequenceConstructor {
    /// Component whose support the level set contains.
    pub component: usize,
    pub geometry: TransversalGeometry,
    /// Localization window η: 1 inside, 0 outside.
    pub window_inner_lo: Vec<f64>,
    pub window_inner_hi: Vec<f64>,
    pub window_outer_lo: Vec<f64>,
    pub window_outer_hi: Vec<f64>,
    pub stages: Vec<usize>,
}

impl SequenceConstructor {
    fn window(&self) -> Result<ScalarField> {
        bump_cutoff(
            &BoxRegion::new(self.window_inner_lo.clone(), self.window_inner_hi.clone())?,
            &BoxRegion::new(self.window_outer_lo.clone(), self.window_outer_hi.clone())?,
        )
    }

    /// Build the stage-n field.
    pub fn stage_field(&self, dim: usize, n: usize) -> Result<ScalarField> {
        if n == 0 {
            return Err(Error::Config("stage must be positive".into()));
        }
        let eta = self.window()?;
        let geom = self.geometry.clone();
        let (eta2, geom2) = (eta.clone(), geom.clone());
        let nf = n as f64;
        let support = BoxRegion::new(self.window_outer_lo.clone(), self.window_outer_hi.clone())?;
        Ok(ScalarField::new(
            dim,
            format!("vanishing-stage n={n}"),
            f64::INFINITY,
            move |x: &[f64]| eta.value(x) * transition(nf * geom.level(x)) / nf,
            move |x: &[f64]| {
                let s = geom2.level(x);
                let mut g = linalg::scale(transition(nf * s) / nf, &eta2.gradient(x));
                linalg::axpy(
                    &mut g,
                    eta2.value(x) * transition_deriv(nf * s),
                    &geom2.level_gradient(x),
                );
                g
            },
        )
        .with_support(support))
    }

    /// Per-node samples of the candidate limit field: η·∇s where the level
    /// set passes through the node, 0 elsewhere.
    pub fn limit_samples(&self, nodes: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let eta = self.window()?;
        Ok(nodes
            .iter()
            .map(|x| {
                if self.geometry.level(x).abs() <= 1e-9 {
                    linalg::scale(eta.value(x), &self.geometry.level_gradient(x))
                } else {
                    vec![0.0; x.len()]
                }
            })
            .collect())
    }
}

/// Evaluated quantities of one stage.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SequenceStage {
    pub stage: usize,
    /// ‖f_n‖_{L²(μ)}.
    pub l2_norm: f64,
    /// ‖∇f_n − v‖_{L²(μ)} against the limit samples v.
    pub grad_residual: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub enum Verdict {
    #[serde(rename = "NOT_CLOSABLE")]
    NotClosable,
    #[serde(rename = "NO_COUNTEREXAMPLE_FOUND")]
    NoCounterexampleFound,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// f_n → 0 in L²(μ) with gradient samples → a nonzero limit field.
    VanishingSequence {
        constructor: SequenceConstructor,
        stages: Vec<SequenceStage>,
        /// ‖v‖_{L²(μ)} of the limit samples.
        limit_norm: f64,
    },
    /// Relaxed-energy upper bound strictly below the unrelaxed energy.
    IdentityGap {
        field: FieldSpec,
        plateau: Vec<(usize, Vec<usize>)>,
        relaxed_upper: f64,
        lip_energy: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ClosabilityCertificate {
    pub measure: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub resolution: String,
    pub unsound: bool,
}

/// Rule dimension a component's bundle subspace gets, for deficiency scans.
fn component_rule_dim(comp: &MeasureComponent, d: usize) -> usize {
    match comp {
        MeasureComponent::Lebesgue { .. } => d,
        MeasureComponent::RectifiablePatch { patch, .. } => patch.k(),
        MeasureComponent::Cantor(c) => match c.variant {
            crate::measure::CantorVariant::Fat => 1,
            crate::measure::CantorVariant::Classic => 0,
        },
        MeasureComponent::Atoms { .. } => 0,
    }
}

/// A unit vector orthogonal to the span of `cols` in ℝ^d, if one exists.
fn orthogonal_direction(d: usize, cols: &[Vec<f64>]) -> Result<Option<Vec<f64>>> {
    let span = crate::grassmann::Subspace::span(d, cols)?;
    for axis in 0..d {
        let e = linalg::basis_vector(d, axis);
        let residual = linalg::sub(&e, &span.project(&e)?);
        let n = linalg::norm(&residual);
        if n > 1e-8 {
            return Ok(Some(linalg::scale(1.0 / n, &residual)));
        }
    }
    Ok(None)
}

const DEFAULT_STAGES: [usize; 4] = [4, 16, 64, 256];

fn geometry_for(comp: &MeasureComponent, d: usize) -> Result<Option<TransversalGeometry>> {
    Ok(match comp {
        MeasureComponent::Lebesgue { .. } => None,
        MeasureComponent::RectifiablePatch { patch, .. } => match patch {
            Patch::Segment { from, to } => orthogonal_direction(d, &[linalg::sub(to, from)])?
                .map(|direction| TransversalGeometry::Linear {
                    base: from.clone(),
                    direction,
                }),
            Patch::Arc { center, radius, .. } => Some(TransversalGeometry::RadialDistance {
                center: center[..2].to_vec(),
                radius: *radius,
            }),
            Patch::Graph { coeffs, .. } => Some(TransversalGeometry::GraphLevel {
                coeffs: coeffs.clone(),
            }),
            Patch::AffinePlane { origin, spans } => orthogonal_direction(d, spans)?.map(
                |direction| TransversalGeometry::Linear {
                    base: origin.clone(),
                    direction,
                },
            ),
        },
        MeasureComponent::Cantor(c) => {
            // transversal directions exist only off the embedding axis
            let transversal = (0..d).find(|&i| i != c.axis);
            transversal.map(|i| TransversalGeometry::Linear {
                base: c.origin.clone(),
                direction: linalg::basis_vector(d, i),
            })
        }
        MeasureComponent::Atoms { points } => Some(TransversalGeometry::Linear {
            base: points[0].0.clone(),
            direction: linalg::basis_vector(d, 0),
        }),
    })
}

/// Scan `measure` for a dimension-deficient component and, if one admits a
/// transversal level set, evaluate the vanishing-sequence probe.
pub fn transversal_counterexample(
    measure: &Measure,
    resolution: &Resolution,
) -> Result<ClosabilityCertificate> {
    let d = measure.dim();
    let rule = quadrature(measure, resolution)?;
    let no = ClosabilityCertificate {
        measure: measure.id().to_string(),
        verdict: Verdict::NoCounterexampleFound,
        witness: None,
        resolution: resolution.descriptor(),
        unsound: false,
    };

    for (ci, (_, comp)) in measure.components().iter().enumerate() {
        if component_rule_dim(comp, d) >= d {
            continue;
        }
        let Some(geometry) = geometry_for(comp, d)? else {
            continue;
        };
        // localization window around this component's nodes
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for (x, info) in rule.nodes().iter().zip(rule.info()) {
            if info.component == ci {
                for i in 0..d {
                    lo[i] = lo[i].min(x[i]);
                    hi[i] = hi[i].max(x[i]);
                }
            }
        }
        let constructor = SequenceConstructor {
            component: ci,
            geometry,
            window_inner_lo: lo.iter().map(|v| v - 0.05).collect(),
            window_inner_hi: hi.iter().map(|v| v + 0.05).collect(),
            window_outer_lo: lo.iter().map(|v| v - 0.15).collect(),
            window_outer_hi: hi.iter().map(|v| v + 0.15).collect(),
            stages: DEFAULT_STAGES.to_vec(),
        };
        let cert = evaluate_sequence(measure, &constructor, resolution)?;
        if cert.verdict == Verdict::NotClosable {
            return Ok(cert);
        }
    }
    Ok(no)
}

/// Evaluate a vanishing-sequence constructor into a certificate.
pub fn evaluate_sequence(
    measure: &Measure,
    constructor: &SequenceConstructor,
    resolution: &Resolution,
) -> Result<ClosabilityCertificate> {
    let rule = quadrature(measure, resolution)?;
    let limit = constructor.limit_samples(rule.nodes())?;
    let limit_norm = l2_norm_samples(&rule, &limit);
    let mut stages = Vec::new();
    for &n in &constructor.stages {
        let f = constructor.stage_field(measure.dim(), n)?;
        let l2 = l2_norm(&rule, &f)?;
        let diffs: Vec<Vec<f64>> = rule
            .nodes()
            .iter()
            .zip(&limit)
            .map(|(x, v)| linalg::sub(&f.gradient(x), v))
            .collect();
        stages.push(SequenceStage {
            stage: n,
            l2_norm: l2,
            grad_residual: l2_norm_samples(&rule, &diffs),
        });
    }
    let last = stages.last().ok_or_else(|| Error::Config("empty stage list".into()))?;
    let is_witness = last.l2_norm <= tol::SEQUENCE_L2_VANISH
        && last.grad_residual <= tol::SEQUENCE_GRAD_RESIDUAL
        && limit_norm >= tol::SEQUENCE_LIMIT_NORM;
    Ok(ClosabilityCertificate {
        measure: measure.id().to_string(),
        verdict: if is_witness {
            Verdict::NotClosable
        } else {
            Verdict::NoCounterexampleFound
        },
        witness: is_witness.then(|| Witness::VanishingSequence {
            constructor: constructor.clone(),
            stages: stages.clone(),
            limit_norm,
        }),
        resolution: resolution.descriptor(),
        unsound: false,
    })
}

/// Compare an approximating-sequence upper bound on the relaxed energy with
/// the unrelaxed `lip` energy of the same field; a strict gap (upper bound
/// below half the energy) certifies non-closability of the form.
pub fn identity_gap_check(
    field: &FieldSpec,
    measure: &Measure,
    plateau: &[(usize, Vec<usize>)],
    resolution: &Resolution,
) -> Result<ClosabilityCertificate> {
    let f = field.build(measure.dim())?;
    let mut constructors = vec![UpperConstructor::Trivial];
    for (component, stages) in plateau {
        constructors.push(UpperConstructor::Plateau {
            component: *component,
            stages: stages.clone(),
        });
    }
    let interval = assemble_cheeger_interval(&f, measure, &[], &constructors, resolution)?;
    let lip_energy = crate::energy::energy_lip(&f, measure, NormPlugin::L2, resolution)?.value;
    let gap_fires = interval.upper < tol::IDENTITY_GAP_MARGIN * lip_energy;
    Ok(ClosabilityCertificate {
        measure: measure.id().to_string(),
        verdict: if gap_fires {
            Verdict::NotClosable
        } else {
            Verdict::NoCounterexampleFound
        },
        witness: gap_fires.then(|| Witness::IdentityGap {
            field: field.clone(),
            plateau: plateau.to_vec(),
            relaxed_upper: interval.upper,
            lip_energy,
        }),
        resolution: resolution.descriptor(),
        unsound: interval.unsound,
    })
}

/// Outcome of replaying a certificate at doubled resolution.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub notes: Vec<String>,
}

/// Re-verify a `NOT_CLOSABLE` certificate on `measure` at doubled
/// resolution: the witness must replay within doubled tolerances and its
/// stored quantities must match the recomputation.
pub fn verify_certificate(
    cert: &ClosabilityCertificate,
    measure: &Measure,
    resolution: &Resolution,
) -> Result<VerificationReport> {
    let refined = resolution.refined(2);
    let mut notes = Vec::new();
    let mut pass = true;
    let mut check = |ok: bool, msg: String, notes: &mut Vec<String>| {
        if !ok {
            pass = false;
        }
        notes.push(format!("{} {msg}", if ok { "ok:" } else { "FAIL:" }));
    };
    match &cert.witness {
        None => {
            check(
                cert.verdict == Verdict::NoCounterexampleFound,
                "verdict without witness must be NO_COUNTEREXAMPLE_FOUND".into(),
                &mut notes,
            );
        }
        Some(Witness::VanishingSequence {
            constructor,
            stages,
            limit_norm,
        }) => {
            let replay = evaluate_sequence(measure, constructor, &refined)?;
            check(
                replay.verdict == Verdict::NotClosable,
                format!("sequence witness replays at {}", refined.descriptor()),
                &mut notes,
            );
            if let Some(Witness::VanishingSequence {
                stages: new_stages,
                limit_norm: new_norm,
                ..
            }) = &replay.witness
            {
                check(
                    (new_norm - limit_norm).abs() <= 1e-3 * (1.0 + limit_norm.abs()),
                    format!("limit norm stable: stored {limit_norm}, replayed {new_norm}"),
                    &mut notes,
                );
                check(
                    new_stages.len() == stages.len(),
                    "stage counts match".into(),
                    &mut notes,
                );
                if let (Some(a), Some(b)) = (stages.last(), new_stages.last()) {
                    check(
                        b.l2_norm <= 2.0 * tol::SEQUENCE_L2_VANISH
                            && b.grad_residual <= 2.0 * tol::SEQUENCE_GRAD_RESIDUAL,
                        format!(
                            "final stage within doubled tolerances (l2 {}, residual {})",
                            b.l2_norm, b.grad_residual
                        ),
                        &mut notes,
                    );
                    check(
                        (a.l2_norm - b.l2_norm).abs() <= 2.0 * tol::SEQUENCE_L2_VANISH,
                        "stored final l2 matches replay".into(),
                        &mut notes,
                    );
                }
            }
        }
        Some(Witness::IdentityGap {
            field,
            plateau,
            relaxed_upper,
            lip_energy,
        }) => {
            let replay = identity_gap_check(field, measure, plateau, &refined)?;
            check(
                replay.verdict == Verdict::NotClosable,
                format!("identity gap persists at {}", refined.descriptor()),
                &mut notes,
            );
            if let Some(Witness::IdentityGap {
                relaxed_upper: new_upper,
                lip_energy: new_lip,
                ..
            }) = &replay.witness
            {
                check(
                    (new_lip - lip_energy).abs() <= 0.01 * (1.0 + lip_energy.abs()),
                    format!("energy stable: stored {lip_energy}, replayed {new_lip}"),
                    &mut notes,
                );
                check(
                    (new_upper - relaxed_upper).abs() <= 0.01 * (1.0 + relaxed_upper.abs()),
                    format!("upper bound stable: stored {relaxed_upper}, replayed {new_upper}"),
                    &mut notes,
                );
            }
        }
    }
    Ok(VerificationReport { pass, notes })
}
