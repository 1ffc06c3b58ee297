//! Declarative JSON configuration for experiments.
//!
//! Every spec type is strict (`deny_unknown_fields`), serializable, and can
//! rebuild its runtime object, so any certificate or report that embeds a
//! spec is replayable from the JSON alone.

use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::error::{Error, Result};
use crate::fields::{bump_cutoff, BoxRegion, NormPlugin, ScalarField};
use crate::measure::{
    CantorComponent, CantorVariant, Measure, MeasureComponent, Patch, Resolution,
};
use crate::testplan::CurveEnsemble;

fn default_cantor_ratio() -> f64 {
    1.0 / 3.0
}

fn default_cantor_depth() -> usize {
    12
}

fn default_count() -> usize {
    256
}

/// A scalar field, built compositionally.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Coordinate {
        axis: usize,
    },
    Constant {
        value: f64,
    },
    Gaussian {
        center: Vec<f64>,
        sigma: f64,
    },
    Polynomial {
        terms: Vec<TermSpec>,
    },
    Bump {
        inner_lo: Vec<f64>,
        inner_hi: Vec<f64>,
        outer_lo: Vec<f64>,
        outer_hi: Vec<f64>,
    },
    Sum {
        left: Box<FieldSpec>,
        right: Box<FieldSpec>,
    },
    Difference {
        left: Box<FieldSpec>,
        right: Box<FieldSpec>,
    },
    Product {
        left: Box<FieldSpec>,
        right: Box<FieldSpec>,
    },
    Scale {
        factor: f64,
        field: Box<FieldSpec>,
    },
    /// field × the standard cutoff shell around [0,1]^d.
    Cutoff {
        field: Box<FieldSpec>,
    },
    /// Seeded random degree-≤2 polynomial times the standard cutoff.
    RandomPoly {
        seed: u64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

impl FieldSpec {
    pub fn build(&self, dim: usize) -> Result<ScalarField> {
        let bad = |m: String| Error::Config(m);
        Ok(match self {
            FieldSpec::Coordinate { axis } => {
                if *axis >= dim {
                    return Err(bad(format!("coordinate axis {axis} out of range for dim {dim}")));
                }
                catalog::coordinate(dim, *axis)
            }
            FieldSpec::Constant { value } => catalog::constant(dim, *value),
            FieldSpec::Gaussian { center, sigma } => {
                if center.len() != dim || *sigma <= 0.0 {
                    return Err(bad("gaussian center/sigma inconsistent".into()));
                }
                catalog::gaussian(center.clone(), *sigma)
            }
            FieldSpec::Polynomial { terms } => {
                if terms.iter().any(|t| t.exponents.len() != dim) {
                    return Err(bad(format!("polynomial exponents must have length {dim}")));
                }
                catalog::polynomial(
                    dim,
                    terms.iter().map(|t| (t.coeff, t.exponents.clone())).collect(),
                )
            }
            FieldSpec::Bump {
                inner_lo,
                inner_hi,
                outer_lo,
                outer_hi,
            } => bump_cutoff(
                &BoxRegion::new(inner_lo.clone(), inner_hi.clone())?,
                &BoxRegion::new(outer_lo.clone(), outer_hi.clone())?,
            )?,
            FieldSpec::Sum { left, right } => left.build(dim)?.add(&right.build(dim)?)?,
            FieldSpec::Difference { left, right } => left.build(dim)?.sub(&right.build(dim)?)?,
            FieldSpec::Product { left, right } => left.build(dim)?.mul(&right.build(dim)?)?,
            FieldSpec::Scale { factor, field } => field.build(dim)?.scale(*factor),
            FieldSpec::Cutoff { field } => catalog::cut(&field.build(dim)?),
            FieldSpec::RandomPoly { seed } => {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
                catalog::random_poly_field(dim, &mut rng)
            }
        })
    }
}

/// One measure component with its mixture weight.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ComponentSpec {
    Lebesgue {
        weight: f64,
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        density: Option<FieldSpec>,
    },
    Patch {
        weight: f64,
        patch: PatchSpec,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        density_coeffs: Vec<f64>,
    },
    Cantor {
        weight: f64,
        axis: usize,
        origin: Vec<f64>,
        length: f64,
        variant: CantorVariant,
        #[serde(default = "default_cantor_ratio")]
        removal_ratio: f64,
        #[serde(default = "default_cantor_depth")]
        max_depth: usize,
    },
    Atoms {
        weight: f64,
        points: Vec<AtomSpec>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub point: Vec<f64>,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum PatchSpec {
    Segment {
        from: Vec<f64>,
        to: Vec<f64>,
    },
    Arc {
        center: Vec<f64>,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
    Graph {
        a: f64,
        b: f64,
        coeffs: Vec<f64>,
    },
    AffinePlane {
        origin: Vec<f64>,
        spans: Vec<Vec<f64>>,
    },
}

impl PatchSpec {
    pub fn build(&self) -> Patch {
        match self {
            PatchSpec::Segment { from, to } => Patch::Segment {
                from: from.clone(),
                to: to.clone(),
            },
            PatchSpec::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => Patch::Arc {
                center: center.clone(),
                radius: *radius,
                theta0: *theta0,
                theta1: *theta1,
            },
            PatchSpec::Graph { a, b, coeffs } => Patch::Graph {
                a: *a,
                b: *b,
                coeffs: coeffs.clone(),
            },
            PatchSpec::AffinePlane { origin, spans } => Patch::AffinePlane {
                origin: origin.clone(),
                spans: spans.clone(),
            },
        }
    }
}

/// A structured measure.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub dim: usize,
    #[serde(default)]
    pub id: Option<String>,
    pub components: Vec<ComponentSpec>,
}

impl MeasureSpec {
    pub fn build(&self) -> Result<Measure> {
        let d = self.dim;
        let mut components = Vec::new();
        for c in &self.components {
            let (w, comp) = match c {
                ComponentSpec::Lebesgue {
                    weight,
                    lo,
                    hi,
                    density,
                } => (
                    *weight,
                    MeasureComponent::Lebesgue {
                        region: BoxRegion::new(lo.clone(), hi.clone())?,
                        density: density.as_ref().map(|f| f.build(d)).transpose()?,
                    },
                ),
                ComponentSpec::Patch {
                    weight,
                    patch,
                    density_coeffs,
                } => (
                    *weight,
                    MeasureComponent::RectifiablePatch {
                        patch: patch.build(),
                        density_coeffs: density_coeffs.clone(),
                    },
                ),
                ComponentSpec::Cantor {
                    weight,
                    axis,
                    origin,
                    length,
                    variant,
                    removal_ratio,
                    max_depth,
                } => (
                    *weight,
                    MeasureComponent::Cantor(CantorComponent {
                        axis: *axis,
                        origin: origin.clone(),
                        length: *length,
                        variant: *variant,
                        removal_ratio: *removal_ratio,
                        depth_default: *max_depth,
                    }),
                ),
                ComponentSpec::Atoms { weight, points } => (
                    *weight,
                    MeasureComponent::Atoms {
                        points: points.iter().map(|a| (a.point.clone(), a.mass)).collect(),
                    },
                ),
            };
            components.push((w, comp));
        }
        Measure::new(
            d,
            self.id.clone().unwrap_or_else(|| "measure".into()),
            components,
        )
    }

    /// Spec for a catalog measure, by id.
    pub fn named(id: &str) -> Option<MeasureSpec> {
        let spec = |dim: usize, components: Vec<ComponentSpec>| MeasureSpec {
            dim,
            id: Some(id.to_string()),
            components,
        };
        Some(match id {
            "lebesgue-interval" => spec(
                1,
                vec![ComponentSpec::Lebesgue {
                    weight: 1.0,
                    lo: vec![0.0],
                    hi: vec![1.0],
                    density: None,
                }],
            ),
            "lebesgue-box" => spec(
                2,
                vec![ComponentSpec::Lebesgue {
                    weight: 1.0,
                    lo: vec![0.0, 0.0],
                    hi: vec![1.0, 1.0],
                    density: None,
                }],
            ),
            "unit-segment" => spec(
                2,
                vec![ComponentSpec::Patch {
                    weight: 1.0,
                    patch: PatchSpec::Segment {
                        from: vec![0.0, 0.0],
                        to: vec![1.0, 0.0],
                    },
                    density_coeffs: vec![],
                }],
            ),
            "quarter-arc" => spec(
                2,
                vec![ComponentSpec::Patch {
                    weight: 1.0,
                    patch: PatchSpec::Arc {
                        center: catalog::ARC_CENTER.to_vec(),
                        radius: catalog::ARC_RADIUS,
                        theta0: catalog::ARC_THETA[0],
                        theta1: catalog::ARC_THETA[1],
                    },
                    density_coeffs: vec![],
                }],
            ),
            "fat-cantor-1d" | "fat-cantor-2d" => {
                let d = if id.starts_with("fat-cantor-1") { 1 } else { 2 };
                spec(
                    d,
                    vec![ComponentSpec::Cantor {
                        weight: 1.0,
                        axis: 0,
                        origin: vec![0.0; d],
                        length: 1.0,
                        variant: CantorVariant::Fat,
                        removal_ratio: 0.0,
                        max_depth: 12,
                    }],
                )
            }
            "classic-cantor-1d" | "classic-cantor-2d" => {
                let d = if id.starts_with("classic-cantor-1") { 1 } else { 2 };
                spec(
                    d,
                    vec![ComponentSpec::Cantor {
                        weight: 1.0,
                        axis: 0,
                        origin: vec![0.0; d],
                        length: 1.0,
                        variant: CantorVariant::Classic,
                        removal_ratio: 1.0 / 3.0,
                        max_depth: 12,
                    }],
                )
            }
            "two-atoms" => spec(
                2,
                vec![ComponentSpec::Atoms {
                    weight: 1.0,
                    points: vec![
                        AtomSpec {
                            point: vec![0.25, 0.25],
                            mass: 0.5,
                        },
                        AtomSpec {
                            point: vec![0.75, 0.5],
                            mass: 0.5,
                        },
                    ],
                }],
            ),
            "box-plus-segment" => spec(
                2,
                vec![
                    ComponentSpec::Lebesgue {
                        weight: 1.0,
                        lo: vec![0.0, 0.0],
                        hi: vec![1.0, 1.0],
                        density: None,
                    },
                    ComponentSpec::Patch {
                        weight: 1.0,
                        patch: PatchSpec::Segment {
                            from: vec![0.0, 0.5],
                            to: vec![1.0, 0.5],
                        },
                        density_coeffs: vec![],
                    },
                ],
            ),
            _ => return None,
        })
    }

    /// All catalog measure ids, for `--list-catalog`.
    pub fn catalog_ids() -> Vec<&'static str> {
        vec![
            "lebesgue-interval",
            "lebesgue-box",
            "unit-segment",
            "quarter-arc",
            "fat-cantor-1d",
            "fat-cantor-2d",
            "classic-cantor-1d",
            "classic-cantor-2d",
            "two-atoms",
            "box-plus-segment",
        ]
    }
}

/// A curve ensemble from the catalog.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnsembleSpec {
    /// Sliding half-segments on the unit segment.
    SlidingSegment {
        #[serde(default = "default_count")]
        count: usize,
    },
    /// Vertical exits from the unit segment (negative example).
    Transversal {
        #[serde(default = "default_count")]
        count: usize,
    },
    /// One stationary curve with a deliberately wrong certificate.
    Dirac { point: Vec<f64> },
    /// Sliding half-arc windows along the catalog arc.
    ArcSweep {
        #[serde(default = "default_count")]
        count: usize,
    },
}

impl EnsembleSpec {
    pub fn build(&self) -> CurveEnsemble {
        match self {
            EnsembleSpec::SlidingSegment { count } => catalog::sliding_segment_ensemble(*count),
            EnsembleSpec::Transversal { count } => catalog::transversal_ensemble(*count),
            EnsembleSpec::Dirac { point } => catalog::dirac_ensemble(point.clone()),
            EnsembleSpec::ArcSweep { count } => catalog::arc_ensemble(*count),
        }
    }
}

/// What an experiment computes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Energies and Sobolev norms of the listed fields.
    Energy,
    /// Parallelogram defects of consecutive field pairs.
    Defect,
    /// Two-sided energy enclosure per field.
    Sandwich,
    /// Compression / tangency / upper-gradient checks of the ensembles.
    PlanCheck,
    /// Approximating-sequence upper bounds.
    Relax,
    /// Closability probes and certificates.
    Closability,
}

/// Resolution overrides; unset entries keep the defaults.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ResolutionSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cantor_depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_grid: Option<usize>,
}

impl ResolutionSpec {
    pub fn build(&self) -> Resolution {
        let d = Resolution::default();
        Resolution {
            grid: self.grid.unwrap_or(d.grid),
            patch: self.patch.unwrap_or(d.patch),
            cantor_depth: self.cantor_depth.unwrap_or(d.cantor_depth),
            time_grid: self.time_grid.unwrap_or(d.time_grid),
        }
    }
}

fn default_norm() -> NormPlugin {
    NormPlugin::L2
}

/// A full experiment description.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub measure: MeasureSpec,
    #[serde(default)]
    pub fields: Vec<FieldSpec>,
    #[serde(default = "default_norm")]
    pub p: NormPlugin,
    #[serde(default)]
    pub resolution: ResolutionSpec,
    #[serde(default)]
    pub ensembles: Vec<EnsembleSpec>,
    /// Plateau constructors for sandwich/relax runs: (component, stages).
    #[serde(default)]
    pub plateau: Vec<(usize, Vec<usize>)>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_spec_round_trip() {
        let spec = FieldSpec::Cutoff {
            field: Box::new(FieldSpec::Sum {
                left: Box::new(FieldSpec::Coordinate { axis: 0 }),
                right: Box::new(FieldSpec::Scale {
                    factor: 2.0,
                    field: Box::new(FieldSpec::Gaussian {
                        center: vec![0.5, 0.5],
                        sigma: 0.3,
                    }),
                }),
            }),
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: FieldSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
        let f = spec.build(2).unwrap();
        let g = back.build(2).unwrap();
        let x = [0.3, 0.7];
        assert_eq!(f.value(&x), g.value(&x));
        assert_eq!(f.gradient(&x), g.gradient(&x));
    }

    #[test]
    fn named_measures_match_catalog() {
        for id in MeasureSpec::catalog_ids() {
            let spec = MeasureSpec::named(id).unwrap();
            let mu = spec.build().unwrap();
            assert_eq!(mu.id(), id);
            let round: MeasureSpec =
                serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
            assert_eq!(spec, round);
        }
        assert!(MeasureSpec::named("nope").is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = r#"{"kind": "coordinate", "axis": 0, "extra": 1}"#;
        assert!(serde_json::from_str::<FieldSpec>(bad).is_err());
        let bad_cfg = r#"{"kind": "energy", "measure": {"dim": 1, "components": []}, "bogus": 3}"#;
        assert!(ExperimentConfig::from_json(bad_cfg).is_err());
    }

    #[test]
    fn invalid_specs_fail_at_build() {
        assert!(FieldSpec::Coordinate { axis: 5 }.build(2).is_err());
        assert!(FieldSpec::Gaussian {
            center: vec![0.0],
            sigma: -1.0
        }
        .build(1)
        .is_err());
        let empty = MeasureSpec {
            dim: 1,
            id: None,
            components: vec![],
        };
        assert!(empty.build().is_err());
    }

    #[test]
    fn experiment_config_round_trip() {
        let cfg = ExperimentConfig {
            kind: ExperimentKind::Sandwich,
            measure: MeasureSpec::named("unit-segment").unwrap(),
            fields: vec![FieldSpec::Cutoff {
                field: Box::new(FieldSpec::Coordinate { axis: 0 }),
            }],
            p: NormPlugin::L2,
            resolution: ResolutionSpec {
                grid: Some(32),
                ..Default::default()
            },
            ensembles: vec![EnsembleSpec::SlidingSegment { count: 128 }],
            plateau: vec![],
            seed: 42,
        };
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(back.resolution.build().grid, 32);
        assert_eq!(back.resolution.build().patch, 256);
    }

    #[test]
    fn ensemble_specs_build() {
        assert_eq!(
            EnsembleSpec::SlidingSegment { count: 8 }.build().curves().len(),
            8
        );
        assert_eq!(
            EnsembleSpec::Dirac {
                point: vec![0.5, 0.0]
            }
            .build()
            .curves()
            .len(),
            1
        );
    }
}
