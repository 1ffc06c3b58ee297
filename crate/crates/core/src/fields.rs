//! Scalar fields with exact value and gradient oracles.
//!
//! Gradients are analytic, never numeric: finite differences exist in this
//! crate only as a verification oracle (`fd_gradient`). Fields are closed
//! under the algebraic combinators and carry an optional support box plus a
//! conservative global Lipschitz bound.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Axis-aligned box [lo_1, hi_1] × … × [lo_d, hi_d].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidField("box bounds must have equal positive length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return Err(Error::InvalidField("box must have positive widths".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(xi, (lo, hi))| *xi >= *lo && *xi <= *hi)
    }

    /// True if `self` is strictly inside `outer` on every axis.
    pub fn strictly_inside(&self, outer: &BoxRegion) -> bool {
        self.dim() == outer.dim()
            && self
                .lo
                .iter()
                .zip(&outer.lo)
                .all(|(a, b)| a > b)
            && self.hi.iter().zip(&outer.hi).all(|(a, b)| a < b)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }
}

/// A scalar field ℝ^d → ℝ with an analytic gradient oracle.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    name: String,
    value: ValueFn,
    gradient: GradFn,
    support: Option<BoxRegion>,
    lipschitz: f64,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("name", &self.name)
            .field("support", &self.support)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl ScalarField {
    pub fn new<V, G>(dim: usize, name: impl Into<String>, lipschitz: f64, value: V, gradient: G) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            name: name.into(),
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            support: None,
            lipschitz,
        }
    }

    pub fn with_support(mut self, support: BoxRegion) -> Self {
        self.support = Some(support);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> Option<&BoxRegion> {
        self.support.as_ref()
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        if let Some(s) = &self.support {
            if !s.contains(x) {
                return 0.0;
            }
        }
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        if let Some(s) = &self.support {
            if !s.contains(x) {
                return vec![0.0; self.dim];
            }
        }
        (self.gradient)(x)
    }

    /// f + g, with oracles combined by the sum rule.
    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.combine(other, CombineOp::Add)
    }

    /// f − g.
    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.combine(other, CombineOp::Sub)
    }

    /// a·f.
    pub fn scale(&self, a: f64) -> ScalarField {
        let f = self.clone();
        ScalarField {
            dim: self.dim,
            name: format!("{}*({})", a, self.name),
            value: Arc::new(move |x| a * f.value(x)),
            gradient: {
                let f = self.clone();
                Arc::new(move |x| linalg::scale(a, &f.gradient(x)))
            },
            support: self.support.clone(),
            lipschitz: a.abs() * self.lipschitz,
        }
    }

    /// f·g with the product rule. The Lipschitz bound is propagated
    /// conservatively and may be infinite for unbounded factors.
    pub fn mul(&self, other: &ScalarField) -> Result<ScalarField> {
        self.combine(other, CombineOp::Mul)
    }

    pub fn combine(&self, other: &ScalarField, op: CombineOp) -> Result<ScalarField> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let (f, g) = (self.clone(), other.clone());
        let (fg, gg) = (self.clone(), other.clone());
        let dim = self.dim;
        let name = format!("({}) {} ({})", self.name, op.symbol(), other.name);
        let (value, gradient): (ValueFn, GradFn) = match op {
            CombineOp::Add => (
                Arc::new(move |x: &[f64]| f.value(x) + g.value(x)),
                Arc::new(move |x: &[f64]| linalg::add(&fg.gradient(x), &gg.gradient(x))),
            ),
            CombineOp::Sub => (
                Arc::new(move |x: &[f64]| f.value(x) - g.value(x)),
                Arc::new(move |x: &[f64]| linalg::sub(&fg.gradient(x), &gg.gradient(x))),
            ),
            CombineOp::Mul => (
                Arc::new(move |x: &[f64]| f.value(x) * g.value(x)),
                Arc::new(move |x: &[f64]| {
                    let (fv, gv) = (fg.value(x), gg.value(x));
                    let mut out = linalg::scale(gv, &fg.gradient(x));
                    linalg::axpy(&mut out, fv, &gg.gradient(x));
                    out
                }),
            ),
        };
        let support = match (self.support.clone(), other.support.clone()) {
            (Some(a), Some(b)) if op == CombineOp::Mul => Some(intersect(&a, &b)?),
            (Some(a), None) if op == CombineOp::Mul => Some(a),
            (None, Some(b)) if op == CombineOp::Mul => Some(b),
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        };
        let lipschitz = match op {
            CombineOp::Add | CombineOp::Sub => self.lipschitz + other.lipschitz,
            // |∇(fg)| ≤ L_f·sup|g| + L_g·sup|f|; sup bounds are not tracked,
            // so fall back to +∞ unless a factor is known constant.
            CombineOp::Mul => f64::INFINITY,
        };
        Ok(ScalarField {
            dim,
            name,
            value,
            gradient,
            support,
            lipschitz,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineOp {
    Add,
    Sub,
    Mul,
}

impl CombineOp {
    fn symbol(self) -> &'static str {
        match self {
            CombineOp::Add => "+",
            CombineOp::Sub => "-",
            CombineOp::Mul => "*",
        }
    }
}

fn intersect(a: &BoxRegion, b: &BoxRegion) -> Result<BoxRegion> {
    let lo: Vec<f64> = a.lo.iter().zip(&b.lo).map(|(x, y)| x.max(*y)).collect();
    let hi: Vec<f64> = a.hi.iter().zip(&b.hi).map(|(x, y)| x.min(*y)).collect();
    BoxRegion::new(lo, hi)
}

/// ℓ^p norm plug-in, p ∈ {1, 2, ∞}, with its dual exponent q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormPlugin {
    L1,
    L2,
    LInf,
}

impl NormPlugin {
    pub fn primal(self, v: &[f64]) -> f64 {
        match self {
            NormPlugin::L1 => v.iter().map(|x| x.abs()).sum(),
            NormPlugin::L2 => linalg::norm(v),
            NormPlugin::LInf => v.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        }
    }

    /// The dual norm ‖·‖_q with 1/p + 1/q = 1.
    pub fn dual(self, v: &[f64]) -> f64 {
        self.dual_plugin().primal(v)
    }

    pub fn dual_plugin(self) -> NormPlugin {
        match self {
            NormPlugin::L1 => NormPlugin::LInf,
            NormPlugin::L2 => NormPlugin::L2,
            NormPlugin::LInf => NormPlugin::L1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            NormPlugin::L1 => "1",
            NormPlugin::L2 => "2",
            NormPlugin::LInf => "inf",
        }
    }
}

/// Local Lipschitz constant of a smooth field at `x` under the metric of the
/// chosen ℓ^p norm: the dual norm ‖∇f(x)‖_q.
pub fn lip(f: &ScalarField, x: &[f64], norm: NormPlugin) -> f64 {
    norm.dual(&f.gradient(x))
}

/// Net-sampled slope max_{‖y−x‖_p = r} |f(x) − f(y)| / ‖x − y‖_p; the
/// independent oracle for the dual-norm shortcut in `lip`.
pub fn sampled_slope(f: &ScalarField, x: &[f64], r: f64, norm: NormPlugin, steps: usize) -> f64 {
    let full = crate::grassmann::Subspace::full(f.dim());
    let fx = f.value(x);
    let mut best = 0.0f64;
    for dir in full.sphere_net(steps) {
        let pn = norm.primal(&dir);
        if pn == 0.0 {
            continue;
        }
        let y: Vec<f64> = x
            .iter()
            .zip(&dir)
            .map(|(xi, di)| xi + r * di / pn)
            .collect();
        best = best.max((fx - f.value(&y)).abs() / r);
    }
    best
}

/// Central finite-difference gradient; verification oracle only.
pub fn fd_gradient(f: &ScalarField, x: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut p = x.to_vec();
    for i in 0..x.len() {
        p[i] = x[i] + h;
        let fp = f.value(&p);
        p[i] = x[i] - h;
        let fm = f.value(&p);
        p[i] = x[i];
        out.push((fp - fm) / (2.0 * h));
    }
    out
}

/// The quintic smoothstep: the unique degree-5 polynomial on [0,1] with
/// s(0)=0, s(1)=1 and vanishing first and second derivatives at both ends:
/// s(t) = 6t⁵ − 15t⁴ + 10t³.
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    ((6.0 * t - 15.0) * t + 10.0) * t * t * t
}

/// Derivative of `smoothstep`: 30 t² (1 − t)² on [0,1], 0 outside.
pub fn smoothstep_deriv(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

/// Maximum of |smoothstep'| on [0,1], attained at t = 1/2.
pub const SMOOTHSTEP_MAX_SLOPE: f64 = 1.875;

/// Smooth cutoff equal to 1 on `inner`, 0 outside `outer`, values in [0,1].
///
/// The profile is a product over axes of one-dimensional quintic-smoothstep
/// ramps across the shell between the two boxes.
pub fn bump_cutoff(inner: &BoxRegion, outer: &BoxRegion) -> Result<ScalarField> {
    if !inner.strictly_inside(outer) {
        return Err(Error::InvalidField(
            "bump_cutoff requires the inner box strictly inside the outer box".into(),
        ));
    }
    let dim = inner.dim();
    let inner_c = inner.clone();
    let outer_c = outer.clone();

    // per-axis ramp value and derivative
    let axis_profile = move |inner: &BoxRegion, outer: &BoxRegion, i: usize, xi: f64| -> (f64, f64) {
        let (ol, il, ih, oh) = (outer.lo[i], inner.lo[i], inner.hi[i], outer.hi[i]);
        if xi <= ol || xi >= oh {
            (0.0, 0.0)
        } else if xi < il {
            let w = il - ol;
            let t = (xi - ol) / w;
            (smoothstep(t), smoothstep_deriv(t) / w)
        } else if xi <= ih {
            (1.0, 0.0)
        } else {
            let w = oh - ih;
            let t = (oh - xi) / w;
            (smoothstep(t), -smoothstep_deriv(t) / w)
        }
    };

    let lipschitz = {
        let per_axis: Vec<f64> = (0..dim)
            .map(|i| {
                let rise = inner.lo[i] - outer.lo[i];
                let fall = outer.hi[i] - inner.hi[i];
                SMOOTHSTEP_MAX_SLOPE / rise.min(fall)
            })
            .collect();
        per_axis.iter().map(|l| l * l).sum::<f64>().sqrt()
    };

    let (vi, vo) = (inner_c.clone(), outer_c.clone());
    let ap = axis_profile.clone();
    let value = move |x: &[f64]| -> f64 {
        (0..x.len()).map(|i| ap(&vi, &vo, i, x[i]).0).product()
    };
    let gradient = move |x: &[f64]| -> Vec<f64> {
        let profiles: Vec<(f64, f64)> = (0..x.len())
            .map(|i| axis_profile(&inner_c, &outer_c, i, x[i]))
            .collect();
        (0..x.len())
            .map(|j| {
                profiles
                    .iter()
                    .enumerate()
                    .map(|(i, (v, dv))| if i == j { *dv } else { *v })
                    .product()
            })
            .collect()
    };

    Ok(ScalarField::new(
        dim,
        format!("bump({:?}->{:?})", inner.lo, outer.lo),
        lipschitz,
        value,
        gradient,
    )
    .with_support(outer.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coord(dim: usize, axis: usize) -> ScalarField {
        crate::catalog::coordinate(dim, axis)
    }

    #[test]
    fn combine_add_gradient() {
        let f = coord(2, 0).add(&coord(2, 1)).unwrap();
        assert_eq!(f.gradient(&[0.3, 0.7]), vec![1.0, 1.0]);
    }

    #[test]
    fn combine_scale_gradient() {
        let f = coord(1, 0).scale(2.0);
        assert_eq!(f.gradient(&[0.4]), vec![2.0]);
        assert_eq!(f.lipschitz_bound(), 2.0);
    }

    #[test]
    fn combine_mul_product_rule() {
        let f = coord(2, 0).mul(&coord(2, 1)).unwrap();
        assert_eq!(f.gradient(&[2.0, 3.0]), vec![3.0, 2.0]);
    }

    #[test]
    fn bump_is_one_inside_zero_outside() {
        let inner = BoxRegion::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let outer = BoxRegion::new(vec![-1.0, -1.0], vec![2.0, 2.0]).unwrap();
        let b = bump_cutoff(&inner, &outer).unwrap();
        assert_eq!(b.value(&[0.5, 0.5]), 1.0);
        assert_eq!(b.gradient(&[0.5, 0.5]), vec![0.0, 0.0]);
        assert_eq!(b.value(&[3.0, 0.5]), 0.0);
        assert_eq!(b.gradient(&[3.0, 0.5]), vec![0.0, 0.0]);
    }

    #[test]
    fn bump_shell_midpoint_is_half() {
        let inner = BoxRegion::new(vec![0.0], vec![1.0]).unwrap();
        let outer = BoxRegion::new(vec![-1.0], vec![2.0]).unwrap();
        let b = bump_cutoff(&inner, &outer).unwrap();
        // midpoint of the rising ramp [-1, 0]
        assert!((b.value(&[-0.5]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bump_degenerate_boxes_rejected() {
        let inner = BoxRegion::new(vec![0.0], vec![1.0]).unwrap();
        assert!(bump_cutoff(&inner, &inner).is_err());
    }

    #[test]
    fn lip_dual_norms() {
        let f = coord(2, 0).add(&coord(2, 1)).unwrap();
        let x = [0.3, 0.9];
        assert!((lip(&f, &x, NormPlugin::L2) - 2f64.sqrt()).abs() < 1e-15);
        assert!((lip(&f, &x, NormPlugin::LInf) - 2.0).abs() < 1e-15);
        let c = ScalarField::new(2, "const", 0.0, |_| 1.0, |_| vec![0.0, 0.0]);
        assert_eq!(lip(&c, &x, NormPlugin::L1), 0.0);
    }

    #[test]
    fn lip_is_one_homogeneous_and_subadditive() {
        let f = crate::catalog::gaussian(vec![0.2, 0.1], 0.7);
        let g = coord(2, 1);
        let x = [0.4, -0.3];
        for p in [NormPlugin::L1, NormPlugin::L2, NormPlugin::LInf] {
            let a = -2.5;
            assert!((lip(&f.scale(a), &x, p) - a.abs() * lip(&f, &x, p)).abs() < 1e-12);
            assert!(lip(&f.add(&g).unwrap(), &x, p) <= lip(&f, &x, p) + lip(&g, &x, p) + 1e-12);
        }
    }

    #[test]
    fn dual_norm_duality_on_random_pairs() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..200 {
            let u: Vec<f64> = (0..3).map(|_| next()).collect();
            let v: Vec<f64> = (0..3).map(|_| next()).collect();
            for p in [NormPlugin::L1, NormPlugin::L2, NormPlugin::LInf] {
                let lhs = linalg::dot(&u, &v).abs();
                let rhs = p.primal(&u) * p.dual(&v);
                assert!(lhs <= rhs + 1e-12);
            }
        }
    }

    #[test]
    fn sampled_slope_matches_dual_norm_lip() {
        let f = crate::catalog::gaussian(vec![0.0, 0.0], 1.0);
        let x = [0.3, -0.2];
        for p in [NormPlugin::L2, NormPlugin::LInf] {
            let exact = lip(&f, &x, p);
            let sampled = sampled_slope(&f, &x, 1e-4, p, 60);
            assert!(
                (sampled - exact).abs() <= 0.05 * exact.max(1e-12),
                "p = {p:?}: sampled {sampled} vs lip {exact}"
            );
        }
    }

    #[test]
    fn fd_gradient_second_order() {
        let f = crate::catalog::gaussian(vec![0.1, -0.4], 0.8);
        let x = [0.35, 0.2];
        let g = f.gradient(&x);
        let e3 = linalg::dist(&fd_gradient(&f, &x, 1e-3), &g);
        let e4 = linalg::dist(&fd_gradient(&f, &x, 1e-4), &g);
        assert!(e3 < 1e-5);
        assert!(e4 < e3); // second-order: roughly 100x smaller
    }
}
