//! Curated catalog of fields, measures, and curve ensembles used by the
//! experiment runner and the test suite.
//!
//! Every entry has known closed-form behavior so tests can pin values
//! exactly: coordinate fields have unit gradients, the standard cutoff is
//! identically 1 on a shell around [0,1]^d, segment and arc ensembles have
//! analytic velocities and compression constants.

use rand::Rng;

use crate::fields::{bump_cutoff, BoxRegion, ScalarField};
use crate::measure::{
    CantorComponent, CantorVariant, Measure, MeasureComponent, Patch, Resolution,
};
use crate::testplan::{Curve, CurveEnsemble};

// ---------------------------------------------------------------------------
// fields

/// The coordinate field x ↦ x_axis.
pub fn coordinate(dim: usize, axis: usize) -> ScalarField {
    assert!(axis < dim);
    ScalarField::new(
        dim,
        format!("x[{axis}]"),
        1.0,
        move |x: &[f64]| x[axis],
        move |x: &[f64]| {
            let mut g = vec![0.0; x.len()];
            g[axis] = 1.0;
            g
        },
    )
}

/// The constant field x ↦ c.
pub fn constant(dim: usize, c: f64) -> ScalarField {
    ScalarField::new(
        dim,
        format!("const {c}"),
        0.0,
        move |_: &[f64]| c,
        move |x: &[f64]| vec![0.0; x.len()],
    )
}

/// Isotropic Gaussian exp(−|x − center|² / 2σ²).
pub fn gaussian(center: Vec<f64>, sigma: f64) -> ScalarField {
    let dim = center.len();
    let c2 = center.clone();
    let s2 = sigma * sigma;
    ScalarField::new(
        dim,
        format!("gaussian c={center:?} s={sigma}"),
        (-0.5f64).exp() / sigma,
        move |x: &[f64]| {
            let r2: f64 = x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
            (-r2 / (2.0 * s2)).exp()
        },
        move |x: &[f64]| {
            let r2: f64 = x.iter().zip(&c2).map(|(a, b)| (a - b) * (a - b)).sum();
            let v = (-r2 / (2.0 * s2)).exp();
            x.iter().zip(&c2).map(|(a, b)| -(a - b) / s2 * v).collect()
        },
    )
}

/// Multivariate polynomial Σ coeff·Π x_i^{e_i}.
pub fn polynomial(dim: usize, terms: Vec<(f64, Vec<u32>)>) -> ScalarField {
    assert!(terms.iter().all(|(_, e)| e.len() == dim));
    let t2 = terms.clone();
    let mono = |x: &[f64], exps: &[u32]| -> f64 {
        x.iter()
            .zip(exps)
            .map(|(xi, &e)| xi.powi(e as i32))
            .product()
    };
    ScalarField::new(
        dim,
        format!("poly[{} terms]", terms.len()),
        f64::INFINITY,
        move |x: &[f64]| terms.iter().map(|(c, e)| c * mono(x, e)).sum(),
        move |x: &[f64]| {
            (0..x.len())
                .map(|j| {
                    t2.iter()
                        .map(|(c, e)| {
                            if e[j] == 0 {
                                return 0.0;
                            }
                            let mut de = e.clone();
                            de[j] -= 1;
                            c * e[j] as f64 * mono(x, &de)
                        })
                        .sum()
                })
                .collect()
        },
    )
}

/// Inner box of the standard cutoff shell, comfortably containing [0,1]^d.
pub fn standard_inner_box(dim: usize) -> BoxRegion {
    BoxRegion::new(vec![-0.25; dim], vec![1.25; dim]).unwrap()
}

/// Outer box of the standard cutoff shell.
pub fn standard_outer_box(dim: usize) -> BoxRegion {
    BoxRegion::new(vec![-0.5; dim], vec![1.5; dim]).unwrap()
}

/// Smooth cutoff ≡ 1 on [−0.25, 1.25]^d, 0 outside [−0.5, 1.5]^d. All
/// catalog measures are supported where this is identically 1, so cutting
/// a field changes nothing on their supports while making it compactly
/// supported.
pub fn standard_cutoff(dim: usize) -> ScalarField {
    bump_cutoff(&standard_inner_box(dim), &standard_outer_box(dim)).unwrap()
}

/// f times the standard cutoff: compact support, unchanged on catalog
/// measure supports.
pub fn cut(f: &ScalarField) -> ScalarField {
    f.mul(&standard_cutoff(f.dim())).unwrap()
}

/// Compactly supported first coordinate field.
pub fn x_cut(dim: usize) -> ScalarField {
    cut(&coordinate(dim, 0))
}

/// Compactly supported second coordinate field.
pub fn y_cut(dim: usize) -> ScalarField {
    cut(&coordinate(dim, 1))
}

/// Seeded random degree-≤2 polynomial times the standard cutoff.
pub fn random_poly_field<R: Rng>(dim: usize, rng: &mut R) -> ScalarField {
    let mut terms = Vec::new();
    let mut exps = vec![vec![0u32; dim]];
    for a in 0..dim {
        let mut e = vec![0u32; dim];
        e[a] = 1;
        exps.push(e.clone());
        for b in a..dim {
            let mut e2 = vec![0u32; dim];
            e2[a] += 1;
            e2[b] += 1;
            exps.push(e2);
        }
    }
    for e in exps {
        terms.push((rng.gen_range(-1.0..1.0), e));
    }
    cut(&polynomial(dim, terms))
}

// ---------------------------------------------------------------------------
// measures

/// Lebesgue measure on [0,1] ⊂ ℝ.
pub fn lebesgue_interval() -> Measure {
    Measure::new(
        1,
        "lebesgue-interval",
        vec![(
            1.0,
            MeasureComponent::Lebesgue {
                region: BoxRegion::new(vec![0.0], vec![1.0]).unwrap(),
                density: None,
            },
        )],
    )
    .unwrap()
}

/// Lebesgue measure on [0,1]² ⊂ ℝ².
pub fn lebesgue_box() -> Measure {
    Measure::new(
        2,
        "lebesgue-box",
        vec![(
            1.0,
            MeasureComponent::Lebesgue {
                region: BoxRegion::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
                density: None,
            },
        )],
    )
    .unwrap()
}

/// Length measure on the unit segment {(t, 0) : t ∈ [0,1]} ⊂ ℝ².
pub fn segment_measure() -> Measure {
    Measure::new(
        2,
        "unit-segment",
        vec![(
            1.0,
            MeasureComponent::RectifiablePatch {
                patch: Patch::Segment {
                    from: vec![0.0, 0.0],
                    to: vec![1.0, 0.0],
                },
                density_coeffs: vec![],
            },
        )],
    )
    .unwrap()
}

/// Parameters of the catalog arc: center, radius, angle range.
pub const ARC_CENTER: [f64; 2] = [0.5, 0.5];
pub const ARC_RADIUS: f64 = 0.35;
pub const ARC_THETA: [f64; 2] = [0.0, std::f64::consts::FRAC_PI_2];

/// Length measure on a quarter-circle arc inside [0,1]².
pub fn arc_measure() -> Measure {
    Measure::new(
        2,
        "quarter-arc",
        vec![(
            1.0,
            MeasureComponent::RectifiablePatch {
                patch: Patch::Arc {
                    center: ARC_CENTER.to_vec(),
                    radius: ARC_RADIUS,
                    theta0: ARC_THETA[0],
                    theta1: ARC_THETA[1],
                },
                density_coeffs: vec![],
            },
        )],
    )
    .unwrap()
}

/// Smith–Volterra (positive-measure) Cantor set on [0,1], embedded along the
/// first axis of ℝ^dim.
pub fn fat_cantor_measure(dim: usize) -> Measure {
    Measure::new(
        dim,
        format!("fat-cantor-{dim}d"),
        vec![(
            1.0,
            MeasureComponent::Cantor(CantorComponent {
                axis: 0,
                origin: vec![0.0; dim],
                length: 1.0,
                variant: CantorVariant::Fat,
                removal_ratio: 0.0,
                depth_default: 12,
            }),
        )],
    )
    .unwrap()
}

/// Uniform measure on the classic middle-thirds Cantor set on [0,1],
/// embedded along the first axis of ℝ^dim.
pub fn classic_cantor_measure(dim: usize) -> Measure {
    Measure::new(
        dim,
        format!("classic-cantor-{dim}d"),
        vec![(
            1.0,
            MeasureComponent::Cantor(CantorComponent {
                axis: 0,
                origin: vec![0.0; dim],
                length: 1.0,
                variant: CantorVariant::Classic,
                removal_ratio: 1.0 / 3.0,
                depth_default: 12,
            }),
        )],
    )
    .unwrap()
}

/// Two atoms in [0,1]².
pub fn atoms_measure() -> Measure {
    Measure::new(
        2,
        "two-atoms",
        vec![(
            1.0,
            MeasureComponent::Atoms {
                points: vec![(vec![0.25, 0.25], 0.5), (vec![0.75, 0.5], 0.5)],
            },
        )],
    )
    .unwrap()
}

/// Lebesgue on [0,1]² plus length measure on a horizontal segment through
/// its interior: the standard overlap case for bundle span unions.
pub fn mixture_measure() -> Measure {
    Measure::new(
        2,
        "box-plus-segment",
        vec![
            (
                1.0,
                MeasureComponent::Lebesgue {
                    region: BoxRegion::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
                    density: None,
                },
            ),
            (
                1.0,
                MeasureComponent::RectifiablePatch {
                    patch: Patch::Segment {
                        from: vec![0.0, 0.5],
                        to: vec![1.0, 0.5],
                    },
                    density_coeffs: vec![],
                },
            ),
        ],
    )
    .unwrap()
}

/// All curated measures, for sweep-style tests.
pub fn curated_measures() -> Vec<Measure> {
    vec![
        lebesgue_interval(),
        lebesgue_box(),
        segment_measure(),
        arc_measure(),
        fat_cantor_measure(1),
        fat_cantor_measure(2),
        classic_cantor_measure(1),
        classic_cantor_measure(2),
        atoms_measure(),
        mixture_measure(),
    ]
}

/// Reduced resolution for sweeps over the whole catalog.
pub fn coarse_resolution() -> Resolution {
    Resolution {
        grid: 16,
        patch: 64,
        cantor_depth: 8,
        time_grid: 32,
    }
}

// ---------------------------------------------------------------------------
// ensembles

/// Sliding sub-segment ensemble on the unit segment: γ^s(t) = (s + t/2, 0)
/// with s uniform on [0, 1/2]. Each time-slice pushforward is uniform on a
/// half-length window, so (e_t)_*π = 2·μ restricted there: Comp = 2. The
/// kinetic energy is 1/4.
pub fn sliding_segment_ensemble(count: usize) -> CurveEnsemble {
    let w = 1.0 / count as f64;
    let curves = (0..count)
        .map(|i| {
            let s = (i as f64 + 0.5) * 0.5 / count as f64;
            (
                Curve::segment(vec![s, 0.0], vec![s + 0.5, 0.0]),
                w,
            )
        })
        .collect();
    CurveEnsemble::new(
        curves,
        2.0,
        "sliding half-segments; each time slice is uniform on a half window",
    )
    .unwrap()
}

/// A single stationary curve at `point` with a (false) declared Comp = 2;
/// its pushforward is an atom, so the certificate cannot validate against a
/// non-atomic measure.
pub fn dirac_ensemble(point: Vec<f64>) -> CurveEnsemble {
    CurveEnsemble::new(
        vec![(Curve::stationary(point), 1.0)],
        2.0,
        "single stationary curve; declared certificate is deliberately wrong",
    )
    .unwrap()
}

/// Curves leaving the unit segment transversally: γ^s(t) = (s, t). Used as
/// the negative example for tangency and compression on the segment measure.
pub fn transversal_ensemble(count: usize) -> CurveEnsemble {
    let w = 1.0 / count as f64;
    let curves = (0..count)
        .map(|i| {
            let s = (i as f64 + 0.5) / count as f64;
            (Curve::segment(vec![s, 0.0], vec![s, 1.0]), w)
        })
        .collect();
    CurveEnsemble::new(curves, 2.0, "vertical exits from the segment").unwrap()
}

/// Within-patch sub-arc sweeps on the catalog arc: angle windows of half the
/// arc sliding across it.
pub fn arc_ensemble(count: usize) -> CurveEnsemble {
    let w = 1.0 / count as f64;
    let dth = ARC_THETA[1] - ARC_THETA[0];
    let curves = (0..count)
        .map(|i| {
            let s = (i as f64 + 0.5) / count as f64;
            let th0 = ARC_THETA[0] + s * dth * 0.5;
            (
                Curve::arc_path(ARC_CENTER.to_vec(), ARC_RADIUS, th0, th0 + dth * 0.5),
                w,
            )
        })
        .collect();
    CurveEnsemble::new(
        curves,
        2.0 / (ARC_RADIUS * dth),
        "sliding half-arc windows along the quarter arc",
    )
    .unwrap()
}
