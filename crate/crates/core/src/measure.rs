//! Structured Radon measures on ℝ^d.
//!
//! A measure is a finite weighted mixture of cataloged components, each of
//! which exposes a quadrature rule (nodes and weights), a membership oracle
//! for its support, and enough metadata for the bundle module to assign the
//! decomposability bundle per node. All discretization parameters are
//! explicit and travel with every rule.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{BoxRegion, ScalarField};
use crate::linalg;
use crate::tol;

/// Per-component resolution parameters for quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    /// Grid points per axis for Lebesgue components.
    pub grid: usize,
    /// Parameter-space nodes per parameter dimension for patches.
    pub patch: usize,
    /// Truncation depth for Cantor components.
    pub cantor_depth: usize,
    /// Time-quadrature nodes for curve ensembles.
    pub time_grid: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            grid: 64,
            patch: 256,
            cantor_depth: 12,
            time_grid: 128,
        }
    }
}

impl Resolution {
    /// Uniform refinement: grids scale by `factor`, the Cantor depth grows
    /// by log2(factor).
    pub fn refined(&self, factor: usize) -> Self {
        let extra = (factor as f64).log2().round() as usize;
        Self {
            grid: self.grid * factor,
            patch: self.patch * factor,
            cantor_depth: self.cantor_depth + extra,
            time_grid: self.time_grid * factor,
        }
    }

    /// Scale grid-like parameters by a float factor (CLI `--resolution-scale`).
    pub fn scaled(&self, s: f64) -> Self {
        let f = |n: usize| ((n as f64 * s).round() as usize).max(2);
        Self {
            grid: f(self.grid),
            patch: f(self.patch),
            cantor_depth: ((self.cantor_depth as f64 + s.log2()).round() as usize).clamp(1, 24),
            time_grid: f(self.time_grid),
        }
    }

    pub fn descriptor(&self) -> String {
        format!(
            "grid={} patch={} cantor_depth={} time_grid={}",
            self.grid, self.patch, self.cantor_depth, self.time_grid
        )
    }
}

/// Parametrized k-rectifiable patch, k < d.
#[derive(Debug, Clone)]
pub enum Patch {
    /// φ(t) = from + t·(to − from), t ∈ [0,1].
    Segment { from: Vec<f64>, to: Vec<f64> },
    /// φ(t) = center + r·(cos θ(t), sin θ(t)) in the first two coordinates,
    /// θ(t) = θ0 + t·(θ1 − θ0).
    Arc {
        center: Vec<f64>,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
    /// Graph of a polynomial in d = 2: φ(s) = (s, p(s)), s ∈ [a, b],
    /// reparametrized to t ∈ [0,1].
    Graph { a: f64, b: f64, coeffs: Vec<f64> },
    /// Affine k-plane patch: φ(u) = origin + Σ u_i span_i, u ∈ [0,1]^k.
    AffinePlane { origin: Vec<f64>, spans: Vec<Vec<f64>> },
}

fn poly_eval(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
}

fn poly_deriv(coeffs: &[f64], s: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (i, c)| acc * s + i as f64 * c)
}

impl Patch {
    pub fn k(&self) -> usize {
        match self {
            Patch::Segment { .. } | Patch::Arc { .. } | Patch::Graph { .. } => 1,
            Patch::AffinePlane { spans, .. } => spans.len(),
        }
    }

    pub fn point(&self, u: &[f64]) -> Vec<f64> {
        match self {
            Patch::Segment { from, to } => from
                .iter()
                .zip(to)
                .map(|(a, b)| a + u[0] * (b - a))
                .collect(),
            Patch::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => {
                let th = theta0 + u[0] * (theta1 - theta0);
                let mut p = center.clone();
                p[0] += radius * th.cos();
                p[1] += radius * th.sin();
                p
            }
            Patch::Graph { a, b, coeffs } => {
                let s = a + u[0] * (b - a);
                vec![s, poly_eval(coeffs, s)]
            }
            Patch::AffinePlane { origin, spans } => {
                let mut p = origin.clone();
                for (ui, s) in u.iter().zip(spans) {
                    linalg::axpy(&mut p, *ui, s);
                }
                p
            }
        }
    }

    /// Columns ∂φ/∂u_i of the Jacobian at parameter `u`.
    pub fn jacobian(&self, u: &[f64]) -> Vec<Vec<f64>> {
        match self {
            Patch::Segment { from, to } => vec![linalg::sub(to, from)],
            Patch::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => {
                let dth = theta1 - theta0;
                let th = theta0 + u[0] * dth;
                let mut col = vec![0.0; center.len()];
                col[0] = -radius * th.sin() * dth;
                col[1] = radius * th.cos() * dth;
                vec![col]
            }
            Patch::Graph { a, b, coeffs } => {
                let s = a + u[0] * (b - a);
                vec![vec![b - a, poly_deriv(coeffs, s) * (b - a)]]
            }
            Patch::AffinePlane { spans, .. } => spans.clone(),
        }
    }

    /// k-dimensional Jacobian factor sqrt(det JᵀJ); errs on rank deficiency.
    pub fn jacobian_factor(&self, u: &[f64], component: &str, node: usize) -> Result<f64> {
        let cols = self.jacobian(u);
        let k = cols.len();
        let gram = DMatrix::from_fn(k, k, |i, j| linalg::dot(&cols[i], &cols[j]));
        let svd = gram.clone().svd(false, false);
        let smin = svd
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if smin.sqrt() <= tol::JACOBIAN_RANK {
            return Err(Error::DegeneratePatch {
                node,
                component: component.to_string(),
            });
        }
        Ok(gram.determinant().max(0.0).sqrt())
    }

    pub fn ambient_dim_ok(&self, d: usize) -> bool {
        match self {
            Patch::Segment { from, to } => from.len() == d && to.len() == d,
            Patch::Arc { center, .. } => center.len() == d && d >= 2,
            Patch::Graph { .. } => d == 2,
            Patch::AffinePlane { origin, spans } => {
                origin.len() == d && spans.iter().all(|s| s.len() == d) && spans.len() < d
            }
        }
    }

    /// Distance from `x` to the patch, with the nearest parameter.
    pub fn distance(&self, x: &[f64]) -> (f64, Vec<f64>) {
        match self {
            Patch::Segment { from, to } => {
                let d = linalg::sub(to, from);
                let len2 = linalg::dot(&d, &d);
                let t = if len2 == 0.0 {
                    0.0
                } else {
                    (linalg::dot(&linalg::sub(x, from), &d) / len2).clamp(0.0, 1.0)
                };
                (linalg::dist(x, &self.point(&[t])), vec![t])
            }
            Patch::Arc {
                center,
                theta0,
                theta1,
                ..
            } => {
                // project onto the circle plane, clamp the angle to the arc
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                let th = dy.atan2(dx);
                let (lo, hi) = (theta0.min(*theta1), theta0.max(*theta1));
                // nearest representative of th modulo 2π within [lo, hi]
                let tau = std::f64::consts::TAU;
                let mut best = (f64::INFINITY, vec![0.0]);
                for shift in [-tau, 0.0, tau] {
                    let clamped = (th + shift).clamp(lo, hi);
                    let t = if (theta1 - theta0).abs() > 0.0 {
                        (clamped - theta0) / (theta1 - theta0)
                    } else {
                        0.0
                    };
                    let dist = linalg::dist(x, &self.point(&[t]));
                    if dist < best.0 {
                        best = (dist, vec![t]);
                    }
                }
                best
            }
            Patch::AffinePlane { origin, spans } => {
                // least-squares parameter, clamped to the patch square
                let k = spans.len();
                let gram = DMatrix::from_fn(k, k, |i, j| linalg::dot(&spans[i], &spans[j]));
                let rhs = DMatrix::from_fn(k, 1, |i, _| {
                    linalg::dot(&spans[i], &linalg::sub(x, origin))
                });
                let u: Vec<f64> = match gram.lu().solve(&rhs) {
                    Some(sol) => sol.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
                    None => vec![0.0; k],
                };
                (linalg::dist(x, &self.point(&u)), u)
            }
            Patch::Graph { .. } => {
                // coarse net followed by iterated local refinement
                let m = 256usize;
                let mut best = (f64::INFINITY, 0.0f64);
                for i in 0..=m {
                    let t = i as f64 / m as f64;
                    let dist = linalg::dist(x, &self.point(&[t]));
                    if dist < best.0 {
                        best = (dist, t);
                    }
                }
                let mut half = 1.0 / m as f64;
                for _ in 0..8 {
                    let (lo, hi) = ((best.1 - half).max(0.0), (best.1 + half).min(1.0));
                    for i in 0..=32 {
                        let t = lo + (hi - lo) * i as f64 / 32.0;
                        let dist = linalg::dist(x, &self.point(&[t]));
                        if dist < best.0 {
                            best = (dist, t);
                        }
                    }
                    half /= 16.0;
                }
                (best.0, vec![best.1])
            }
        }
    }
}

/// Cantor-type construction on an interval, embedded along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CantorVariant {
    /// Fixed middle-removal ratio each stage; the limit set is Lebesgue-null
    /// and carries the uniform Cantor measure with total mass 1.
    Classic,
    /// Smith–Volterra construction removing a middle piece of length 4^{-n}
    /// (times the base length) at stage n; the limit set has positive
    /// Lebesgue measure and the component is Lebesgue restricted to it.
    Fat,
}

#[derive(Debug, Clone)]
pub struct CantorComponent {
    /// Embedding axis in ℝ^d.
    pub axis: usize,
    /// Base point; coordinate `axis` is the interval start, the others fix
    /// the embedding.
    pub origin: Vec<f64>,
    /// Base interval length.
    pub length: f64,
    pub variant: CantorVariant,
    /// Middle-removal ratio for the classic variant (default 1/3).
    pub removal_ratio: f64,
    pub depth_default: usize,
}

impl CantorComponent {
    /// Surviving intervals (in axis coordinates) and their masses at `depth`.
    pub fn intervals(&self, depth: usize) -> Vec<(f64, f64, f64)> {
        let start = self.origin[self.axis];
        let mut iv: Vec<(f64, f64)> = vec![(start, start + self.length)];
        for stage in 1..=depth {
            let removed = match self.variant {
                CantorVariant::Classic => f64::NAN, // per-interval below
                CantorVariant::Fat => self.length * 0.25f64.powi(stage as i32),
            };
            let mut next = Vec::with_capacity(iv.len() * 2);
            for (a, b) in iv {
                let gap = match self.variant {
                    CantorVariant::Classic => (b - a) * self.removal_ratio,
                    CantorVariant::Fat => removed,
                };
                let m = 0.5 * (a + b);
                next.push((a, m - 0.5 * gap));
                next.push((m + 0.5 * gap, b));
            }
            iv = next;
        }
        let count = iv.len() as f64;
        iv.into_iter()
            .map(|(a, b)| {
                let mass = match self.variant {
                    CantorVariant::Classic => 1.0 / count,
                    CantorVariant::Fat => b - a,
                };
                (a, b, mass)
            })
            .collect()
    }

    /// Closed-form total mass of the depth-truncated construction.
    pub fn stage_mass(&self, depth: usize) -> f64 {
        match self.variant {
            CantorVariant::Classic => 1.0,
            // surviving length: L·(1/2 + 2^{-depth-1})
            CantorVariant::Fat => self.length * (0.5 + 0.5f64.powi(depth as i32 + 1)),
        }
    }

    pub fn embed(&self, s: f64) -> Vec<f64> {
        let mut p = self.origin.clone();
        p[self.axis] = s;
        p
    }
}

/// One structured component of a measure.
#[derive(Debug, Clone)]
pub enum MeasureComponent {
    Lebesgue {
        region: BoxRegion,
        density: Option<ScalarField>,
    },
    RectifiablePatch {
        patch: Patch,
        /// Polynomial density in the (first) parameter variable; empty = 1.
        density_coeffs: Vec<f64>,
    },
    Cantor(CantorComponent),
    Atoms {
        points: Vec<(Vec<f64>, f64)>,
    },
}

impl MeasureComponent {
    pub fn kind(&self) -> &'static str {
        match self {
            MeasureComponent::Lebesgue { .. } => "lebesgue",
            MeasureComponent::RectifiablePatch { .. } => "patch",
            MeasureComponent::Cantor(_) => "cantor",
            MeasureComponent::Atoms { .. } => "atoms",
        }
    }

    /// Closed-form mass where available (unit density / constant factors).
    pub fn analytic_mass(&self, resolution: &Resolution) -> Option<f64> {
        match self {
            MeasureComponent::Lebesgue { region, density } => {
                density.is_none().then(|| region.volume())
            }
            MeasureComponent::RectifiablePatch {
                patch,
                density_coeffs,
            } => {
                if !density_coeffs.is_empty() && density_coeffs.len() != 1 {
                    return None;
                }
                let dens = density_coeffs.first().copied().unwrap_or(1.0);
                match patch {
                    Patch::Segment { from, to } => Some(dens * linalg::dist(from, to)),
                    Patch::Arc {
                        radius,
                        theta0,
                        theta1,
                        ..
                    } => Some(dens * radius * (theta1 - theta0).abs()),
                    Patch::Graph { .. } => None,
                    Patch::AffinePlane { spans, .. } => {
                        let k = spans.len();
                        let gram =
                            DMatrix::from_fn(k, k, |i, j| linalg::dot(&spans[i], &spans[j]));
                        Some(dens * gram.determinant().max(0.0).sqrt())
                    }
                }
            }
            MeasureComponent::Cantor(c) => Some(c.stage_mass(resolution.cantor_depth)),
            MeasureComponent::Atoms { points } => Some(points.iter().map(|(_, m)| m).sum()),
        }
    }

    /// Support membership within tolerance `delta`.
    pub fn membership(&self, x: &[f64], delta: f64, resolution: &Resolution) -> bool {
        match self {
            MeasureComponent::Lebesgue { region, .. } => x
                .iter()
                .zip(region.lo.iter().zip(&region.hi))
                .all(|(xi, (lo, hi))| *xi >= lo - delta && *xi <= hi + delta),
            MeasureComponent::RectifiablePatch { patch, .. } => patch.distance(x).0 <= delta,
            MeasureComponent::Cantor(c) => {
                let others_ok = x
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != c.axis)
                    .all(|(i, xi)| (xi - c.origin[i]).abs() <= delta);
                if !others_ok {
                    return false;
                }
                let s = x[c.axis];
                c.intervals(resolution.cantor_depth)
                    .iter()
                    .any(|(a, b, _)| s >= a - delta && s <= b + delta)
            }
            MeasureComponent::Atoms { points } => {
                points.iter().any(|(p, _)| linalg::dist(p, x) <= delta)
            }
        }
    }
}

/// A structured Radon measure: a finite weighted mixture of components.
#[derive(Debug, Clone)]
pub struct Measure {
    dim: usize,
    id: String,
    components: Vec<(f64, MeasureComponent)>,
}

impl Measure {
    pub fn new(
        dim: usize,
        id: impl Into<String>,
        components: Vec<(f64, MeasureComponent)>,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidMeasure {
                component: "<none>".into(),
                reason: "a measure needs at least one component".into(),
            });
        }
        for (i, (w, c)) in components.iter().enumerate() {
            if *w <= 0.0 || !w.is_finite() {
                return Err(Error::InvalidMeasure {
                    component: format!("component[{i}]:{}", c.kind()),
                    reason: format!("weight must be positive and finite, got {w}"),
                });
            }
            let ok = match c {
                MeasureComponent::Lebesgue { region, .. } => region.dim() == dim,
                MeasureComponent::RectifiablePatch { patch, .. } => {
                    patch.ambient_dim_ok(dim) && patch.k() < dim
                }
                MeasureComponent::Cantor(cc) => cc.origin.len() == dim && cc.axis < dim,
                MeasureComponent::Atoms { points } => {
                    !points.is_empty()
                        && points.iter().all(|(p, m)| p.len() == dim && *m > 0.0)
                }
            };
            if !ok {
                return Err(Error::InvalidMeasure {
                    component: format!("component[{i}]:{}", c.kind()),
                    reason: format!("inconsistent with ambient dimension {dim}"),
                });
            }
        }
        Ok(Self {
            dim,
            id: id.into(),
            components,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn components(&self) -> &[(f64, MeasureComponent)] {
        &self.components
    }

    /// Same measure with all component weights multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Measure> {
        Measure::new(
            self.dim,
            format!("{}*{c}", self.id),
            self.components
                .iter()
                .map(|(w, comp)| (w * c, comp.clone()))
                .collect(),
        )
    }

    pub fn component_label(&self, i: usize) -> String {
        format!("component[{i}]:{}", self.components[i].1.kind())
    }
}

/// Per-node bookkeeping carried by quadrature rules.
#[derive(Debug, Clone)]
pub enum NodeDetail {
    /// Lebesgue cell midpoint.
    Volume,
    /// Patch node with its parameter.
    PatchParam(Vec<f64>),
    /// Cantor interval (axis coordinates).
    CantorInterval { lo: f64, hi: f64 },
    /// Atom index.
    Atom(usize),
}

#[derive(Debug, Clone)]
pub struct NodeInfo {
    pub component: usize,
    pub detail: NodeDetail,
}

/// Discrete quadrature rule for a measure at a given resolution.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    dim: usize,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
    info: Vec<NodeInfo>,
    resolution: Resolution,
}

impl QuadratureRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn info(&self) -> &[NodeInfo] {
        &self.info
    }

    pub fn resolution(&self) -> &Resolution {
        &self.resolution
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Build the concatenated per-component quadrature rule.
pub fn quadrature(measure: &Measure, resolution: &Resolution) -> Result<QuadratureRule> {
    if resolution.grid == 0 || resolution.patch == 0 {
        return Err(Error::Config("resolution must be positive".into()));
    }
    let d = measure.dim();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut info = Vec::new();

    for (ci, (w, comp)) in measure.components().iter().enumerate() {
        let before = weights.len();
        match comp {
            MeasureComponent::Lebesgue { region, density } => {
                let n = resolution.grid;
                let widths: Vec<f64> = region
                    .lo
                    .iter()
                    .zip(&region.hi)
                    .map(|(a, b)| (b - a) / n as f64)
                    .collect();
                let cell: f64 = widths.iter().product();
                let mut idx = vec![0usize; d];
                loop {
                    let x: Vec<f64> = idx
                        .iter()
                        .zip(region.lo.iter().zip(&widths))
                        .map(|(&i, (lo, wd))| lo + (i as f64 + 0.5) * wd)
                        .collect();
                    let dens = density.as_ref().map(|f| f.value(&x)).unwrap_or(1.0);
                    nodes.push(x);
                    weights.push(w * cell * dens);
                    info.push(NodeInfo {
                        component: ci,
                        detail: NodeDetail::Volume,
                    });
                    let mut j = 0;
                    loop {
                        idx[j] += 1;
                        if idx[j] < n {
                            break;
                        }
                        idx[j] = 0;
                        j += 1;
                        if j == d {
                            break;
                        }
                    }
                    if idx.iter().all(|&i| i == 0) {
                        break;
                    }
                }
            }
            MeasureComponent::RectifiablePatch {
                patch,
                density_coeffs,
            } => {
                let k = patch.k();
                let m = resolution.patch;
                let label = measure.component_label(ci);
                let du = 1.0 / m as f64;
                let param_cell = du.powi(k as i32);
                let mut idx = vec![0usize; k];
                let mut node_idx = 0usize;
                loop {
                    let u: Vec<f64> = idx.iter().map(|&i| (i as f64 + 0.5) * du).collect();
                    let jf = patch.jacobian_factor(&u, &label, node_idx)?;
                    let dens = if density_coeffs.is_empty() {
                        1.0
                    } else {
                        poly_eval(density_coeffs, u[0])
                    };
                    nodes.push(patch.point(&u));
                    weights.push(w * param_cell * jf * dens);
                    info.push(NodeInfo {
                        component: ci,
                        detail: NodeDetail::PatchParam(u),
                    });
                    node_idx += 1;
                    let mut j = 0;
                    loop {
                        idx[j] += 1;
                        if idx[j] < m {
                            break;
                        }
                        idx[j] = 0;
                        j += 1;
                        if j == k {
                            break;
                        }
                    }
                    if idx.iter().all(|&i| i == 0) {
                        break;
                    }
                }
            }
            MeasureComponent::Cantor(c) => {
                for (a, b, mass) in c.intervals(resolution.cantor_depth) {
                    nodes.push(c.embed(0.5 * (a + b)));
                    weights.push(w * mass);
                    info.push(NodeInfo {
                        component: ci,
                        detail: NodeDetail::CantorInterval { lo: a, hi: b },
                    });
                }
            }
            MeasureComponent::Atoms { points } => {
                for (ai, (p, mass)) in points.iter().enumerate() {
                    nodes.push(p.clone());
                    weights.push(w * mass);
                    info.push(NodeInfo {
                        component: ci,
                        detail: NodeDetail::Atom(ai),
                    });
                }
            }
        }
        // closed-form mass check per component, when available
        if let Some(mass) = comp.analytic_mass(resolution) {
            let got: f64 = weights[before..].iter().sum();
            if (got - w * mass).abs() > tol::MASS_EXACTNESS * (1.0 + w * mass) {
                return Err(Error::InvalidMeasure {
                    component: measure.component_label(ci),
                    reason: format!(
                        "quadrature mass {got} deviates from analytic mass {}",
                        w * mass
                    ),
                });
            }
        }
    }

    Ok(QuadratureRule {
        dim: d,
        nodes,
        weights,
        info,
        resolution: *resolution,
    })
}

/// Σ_i w_i g(x_i) for an arbitrary integrand closure.
pub fn integrate_with<F: Fn(&[f64]) -> f64>(rule: &QuadratureRule, g: F) -> Result<f64> {
    let mut acc = 0.0;
    for (i, (x, w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let v = g(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteValue {
                node: i,
                point: x.clone(),
            });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// ∫ g dμ via the rule.
pub fn integrate(rule: &QuadratureRule, g: &ScalarField) -> Result<f64> {
    integrate_with(rule, |x| g.value(x))
}

/// (∫ g² dμ)^{1/2}.
pub fn l2_norm(rule: &QuadratureRule, g: &ScalarField) -> Result<f64> {
    Ok(integrate_with(rule, |x| {
        let v = g.value(x);
        v * v
    })?
    .max(0.0)
    .sqrt())
}

/// L² norm of per-node vector samples.
pub fn l2_norm_samples(rule: &QuadratureRule, samples: &[Vec<f64>]) -> f64 {
    rule.weights
        .iter()
        .zip(samples)
        .map(|(w, v)| w * linalg::dot(v, v))
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn res() -> Resolution {
        Resolution::default()
    }

    #[test]
    fn unit_segment_uniform_rule() {
        let mu = catalog::segment_measure();
        let r = Resolution {
            patch: 100,
            ..res()
        };
        let rule = quadrature(&mu, &r).unwrap();
        assert_eq!(rule.len(), 100);
        for w in rule.weights() {
            assert!((w - 0.01).abs() < 1e-15);
        }
        assert!((rule.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fat_cantor_stage_mass() {
        let mu = catalog::fat_cantor_measure(1);
        let r = Resolution {
            cantor_depth: 10,
            ..res()
        };
        let rule = quadrature(&mu, &r).unwrap();
        let expect = 0.5 + 0.5f64.powi(11);
        assert!((rule.total_mass() - expect).abs() < 1e-12);
        // removed mass Σ 2^{n-1} 4^{-n} → 1/2
        let deep = quadrature(
            &mu,
            &Resolution {
                cantor_depth: 20,
                ..res()
            },
        )
        .unwrap();
        assert!((deep.total_mass() - 0.5).abs() < 1e-5);
    }

    #[test]
    fn classic_cantor_mass_exact_at_every_depth() {
        let mu = catalog::classic_cantor_measure(1);
        for depth in [1usize, 4, 8, 12] {
            let rule = quadrature(
                &mu,
                &Resolution {
                    cantor_depth: depth,
                    ..res()
                },
            )
            .unwrap();
            assert!((rule.total_mass() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn first_moment_of_uniform() {
        let mu = catalog::lebesgue_interval();
        let r = Resolution {
            grid: 1000,
            ..res()
        };
        let rule = quadrature(&mu, &r).unwrap();
        let x = catalog::coordinate(1, 0);
        let m = integrate(&rule, &x).unwrap();
        assert!((m - 0.5).abs() < 1e-6);
    }

    #[test]
    fn integrate_coordinate_over_segment() {
        let mu = catalog::segment_measure();
        let rule = quadrature(&mu, &Resolution { patch: 1000, ..res() }).unwrap();
        let x = catalog::coordinate(2, 0);
        // midpoint rule is exact for linear integrands
        assert!((integrate(&rule, &x).unwrap() - 0.5).abs() < 1e-9);
        assert!((l2_norm(&rule, &x).unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn l2_norm_trivia() {
        let mu = catalog::segment_measure();
        let rule = quadrature(&mu, &res()).unwrap();
        let zero = catalog::constant(2, 0.0);
        let one = catalog::constant(2, 1.0);
        assert_eq!(l2_norm(&rule, &zero).unwrap(), 0.0);
        assert!((l2_norm(&rule, &one).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mass_additivity_of_mixture() {
        let mu = catalog::mixture_measure();
        let rule = quadrature(&mu, &res()).unwrap();
        let sum_components: f64 = mu
            .components()
            .iter()
            .map(|(w, c)| w * c.analytic_mass(&res()).unwrap())
            .sum();
        assert!((rule.total_mass() - sum_components).abs() < 1e-9);
    }

    #[test]
    fn refinement_stability_first_order() {
        let mu = catalog::lebesgue_box();
        let g = catalog::gaussian(vec![0.4, 0.6], 0.5);
        let coarse = integrate(&quadrature(&mu, &Resolution { grid: 32, ..res() }).unwrap(), &g).unwrap();
        let fine = integrate(&quadrature(&mu, &Resolution { grid: 64, ..res() }).unwrap(), &g).unwrap();
        let finest =
            integrate(&quadrature(&mu, &Resolution { grid: 128, ..res() }).unwrap(), &g).unwrap();
        // observed order >= 1: errors shrink at least linearly
        assert!((fine - finest).abs() <= 0.6 * (coarse - finest).abs() + 1e-12);
    }

    #[test]
    fn degenerate_patch_rejected() {
        let mu = Measure::new(
            2,
            "degenerate",
            vec![(
                1.0,
                MeasureComponent::RectifiablePatch {
                    patch: Patch::Segment {
                        from: vec![0.0, 0.0],
                        to: vec![0.0, 0.0],
                    },
                    density_coeffs: vec![],
                },
            )],
        )
        .unwrap();
        let err = quadrature(&mu, &res()).unwrap_err();
        assert!(err.to_string().contains("component[0]:patch"));
    }

    #[test]
    fn non_finite_integrand_reports_node() {
        let mu = catalog::segment_measure();
        let rule = quadrature(&mu, &res()).unwrap();
        let bad = ScalarField::new(2, "bad", f64::INFINITY, |_| f64::NAN, |_| vec![0.0, 0.0]);
        assert!(matches!(
            integrate(&rule, &bad),
            Err(Error::NonFiniteValue { node: 0, .. })
        ));
    }
}
