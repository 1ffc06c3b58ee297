//! Finitely supported test plans: weighted curve ensembles with analytic
//! velocity oracles and a declared compression certificate.
//!
//! The compression inequality is not decidable from finitely many curves;
//! the checker validates the declared certificate empirically via binned
//! pushforward-density ratios, with bin-refinement reporting, and refuses
//! derived bounds when validation fails.

use std::sync::Arc;

use crate::bundle::BundleField;
use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::linalg;
use crate::measure::{Measure, QuadratureRule, Resolution};
use crate::tol;

type PathFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;
type VelocityFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// An absolutely continuous curve [0,1] → ℝ^d with an analytic velocity.
#[derive(Clone)]
pub struct Curve {
    dim: usize,
    descriptor: String,
    path: PathFn,
    velocity: VelocityFn,
}

impl std::fmt::Debug for Curve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Curve({})", self.descriptor)
    }
}

impl Curve {
    pub fn new<P, V>(dim: usize, descriptor: impl Into<String>, path: P, velocity: V) -> Self
    where
        P: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        V: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            descriptor: descriptor.into(),
            path: Arc::new(path),
            velocity: Arc::new(velocity),
        }
    }

    /// Constant-speed geodesic from `a` to `b`.
    pub fn segment(a: Vec<f64>, b: Vec<f64>) -> Self {
        let d = a.len();
        let dir = linalg::sub(&b, &a);
        let (a2, dir2) = (a.clone(), dir.clone());
        Curve::new(
            d,
            format!("segment {a:?}->{b:?}"),
            move |t| {
                let mut p = a2.clone();
                linalg::axpy(&mut p, t, &dir2);
                p
            },
            move |_| dir.clone(),
        )
    }

    /// Stationary curve at `p`.
    pub fn stationary(p: Vec<f64>) -> Self {
        let d = p.len();
        let p2 = p.clone();
        Curve::new(
            d,
            format!("stationary {p:?}"),
            move |_| p.clone(),
            move |_| vec![0.0; p2.len()],
        )
    }

    /// Within-patch path on a circular arc: θ(t) = θ0 + t·(θ1 − θ0).
    pub fn arc_path(center: Vec<f64>, radius: f64, theta0: f64, theta1: f64) -> Self {
        let d = center.len();
        let c2 = center.clone();
        let dth = theta1 - theta0;
        Curve::new(
            d,
            format!("arc r={radius} th=[{theta0},{theta1}]"),
            move |t| {
                let th = theta0 + t * dth;
                let mut p = center.clone();
                p[0] += radius * th.cos();
                p[1] += radius * th.sin();
                p
            },
            move |t| {
                let th = theta0 + t * dth;
                let mut v = vec![0.0; c2.len()];
                v[0] = -radius * th.sin() * dth;
                v[1] = radius * th.cos() * dth;
                v
            },
        )
    }

    /// Reparametrize by the quadratic bijection t ↦ t² of [0,1].
    pub fn reparametrized_quadratic(inner: Curve) -> Self {
        let d = inner.dim;
        let (p, v) = (inner.path.clone(), inner.velocity.clone());
        Curve::new(
            d,
            format!("{} o t^2", inner.descriptor),
            move |t| p(t * t),
            move |t| linalg::scale(2.0 * t, &v(t * t)),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn point(&self, t: f64) -> Vec<f64> {
        (self.path)(t)
    }

    pub fn velocity(&self, t: f64) -> Vec<f64> {
        (self.velocity)(t)
    }

    /// Metric speed |γ̇_t|.
    pub fn speed(&self, t: f64) -> f64 {
        linalg::norm(&self.velocity(t))
    }
}

/// A finitely supported test plan.
#[derive(Debug, Clone)]
pub struct CurveEnsemble {
    curves: Vec<(Curve, f64)>,
    comp: f64,
    note: String,
}

impl CurveEnsemble {
    /// `comp` is the declared compression certificate; `note` its derivation.
    pub fn new(curves: Vec<(Curve, f64)>, comp: f64, note: impl Into<String>) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::EnsembleRefused("ensemble has no curves".into()));
        }
        let total: f64 = curves.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::EnsembleRefused(format!(
                "curve weights must sum to 1, got {total}"
            )));
        }
        if comp <= 0.0 {
            return Err(Error::EnsembleRefused(
                "compression certificate must be positive".into(),
            ));
        }
        Ok(Self {
            curves,
            comp,
            note: note.into(),
        })
    }

    pub fn curves(&self) -> &[(Curve, f64)] {
        &self.curves
    }

    pub fn comp(&self) -> f64 {
        self.comp
    }

    pub fn note(&self) -> &str {
        &self.note
    }

    /// Midpoint grid on [0,1] used for all time quadratures.
    pub fn time_grid(m: usize) -> Vec<f64> {
        (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect()
    }

    /// ∫∫ |γ̇_t|² dt dπ(γ) via the midpoint time rule.
    pub fn kinetic_energy(&self, time_steps: usize) -> f64 {
        let dt = 1.0 / time_steps as f64;
        self.curves
            .iter()
            .map(|(c, w)| {
                w * Self::time_grid(time_steps)
                    .iter()
                    .map(|&t| {
                        let s = c.speed(t);
                        s * s * dt
                    })
                    .sum::<f64>()
            })
            .sum()
    }
}

/// Outcome of the bounded-compression check.
#[derive(Debug, Clone)]
pub struct CompressionReport {
    pub pass: bool,
    pub declared_comp: f64,
    /// Max pushforward/measure density ratio over probe times and bins.
    pub max_ratio: f64,
    /// (bins per axis, max ratio) at the requested and refined bin counts.
    pub ratios_by_bins: Vec<(usize, f64)>,
    /// (curve index, time) of a curve caught off the support, if any.
    pub off_support_witness: Option<(usize, f64)>,
}

fn bin_index(x: &[f64], lo: &[f64], hi: &[f64], bins: usize) -> usize {
    let mut idx = 0usize;
    for (xi, (l, h)) in x.iter().zip(lo.iter().zip(hi)) {
        let t = ((xi - l) / (h - l)).clamp(0.0, 1.0 - 1e-12);
        idx = idx * bins + (t * bins as f64) as usize;
    }
    idx
}

/// Validate the declared compression certificate (e_t)_*π ≤ Comp·μ by
/// binning the pushforward against the binned measure at each probe time.
pub fn check_compression(
    ensemble: &CurveEnsemble,
    measure: &Measure,
    rule: &QuadratureRule,
    times: &[f64],
    bins: usize,
) -> Result<CompressionReport> {
    let d = rule.dim();
    if bins.pow(d as u32) > 2_000_000 {
        return Err(Error::Config(format!("bin grid {bins}^{d} too large")));
    }
    // bounding box of the support, padded by one bin width
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for x in rule.nodes() {
        for i in 0..d {
            lo[i] = lo[i].min(x[i]);
            hi[i] = hi[i].max(x[i]);
        }
    }
    for i in 0..d {
        let pad = ((hi[i] - lo[i]).max(1e-6)) * 0.5 / bins as f64;
        lo[i] -= pad;
        hi[i] += pad;
    }

    let mut off_support_witness = None;
    'outer: for (ci, (curve, _)) in ensemble.curves().iter().enumerate() {
        for &t in times {
            let x = curve.point(t);
            let on = measure
                .components()
                .iter()
                .any(|(_, c)| c.membership(&x, tol::MEMBERSHIP, rule.resolution()));
            if !on {
                off_support_witness = Some((ci, t));
                break 'outer;
            }
        }
    }

    let mut ratios_by_bins = Vec::new();
    for &b in &[bins, bins * 2] {
        let cells = b.pow(d as u32);
        let mut mu_mass = vec![0.0f64; cells];
        for (x, w) in rule.nodes().iter().zip(rule.weights()) {
            mu_mass[bin_index(x, &lo, &hi, b)] += w;
        }
        let mut worst = 0.0f64;
        for &t in times {
            let mut push = vec![0.0f64; cells];
            for (curve, w) in ensemble.curves() {
                push[bin_index(&curve.point(t), &lo, &hi, b)] += w;
            }
            for (p, m) in push.iter().zip(&mu_mass) {
                if *p > 0.0 {
                    let ratio = if *m > 1e-300 { p / m } else { f64::INFINITY };
                    worst = worst.max(ratio);
                }
            }
        }
        ratios_by_bins.push((b, worst));
    }

    let max_ratio = ratios_by_bins[0].1;
    let pass = off_support_witness.is_none()
        && max_ratio <= ensemble.comp() * (1.0 + tol::COMPRESSION_HEADROOM);
    Ok(CompressionReport {
        pass,
        declared_comp: ensemble.comp(),
        max_ratio,
        ratios_by_bins,
        off_support_witness,
    })
}

/// Outcome of the bundle-tangency check γ̇_t ∈ V(μ, γ_t).
#[derive(Debug, Clone)]
pub struct TangencyReport {
    pub pass: bool,
    pub max_residual: f64,
    /// (curve index, time, residual) of the worst pair.
    pub witness: Option<(usize, f64, f64)>,
}

/// Check that ensemble velocities lie in the bundle at every quadrature pair.
pub fn check_tangency(
    ensemble: &CurveEnsemble,
    bundle: &BundleField,
    resolution: &Resolution,
) -> Result<TangencyReport> {
    let mut max_residual = 0.0f64;
    let mut witness = None;
    let mut pass = true;
    for (ci, (curve, _)) in ensemble.curves().iter().enumerate() {
        for &t in &CurveEnsemble::time_grid(resolution.time_grid) {
            let x = curve.point(t);
            let vel = curve.velocity(t);
            let v = bundle.at_point(&x, resolution)?;
            let proj = v.project(&vel)?;
            let residual = linalg::dist(&vel, &proj);
            if residual > max_residual {
                max_residual = residual;
                witness = Some((ci, t, residual));
            }
            if residual > tol::TANGENCY * (1.0 + linalg::norm(&vel)) {
                pass = false;
            }
        }
    }
    Ok(TangencyReport {
        pass,
        max_residual,
        witness,
    })
}

/// Outcome of the weak-upper-gradient inequality check.
#[derive(Debug, Clone)]
pub struct WugReport {
    pub pass: bool,
    pub pairs: usize,
    pub satisfied: usize,
    pub max_violation: f64,
    /// Violating pairs (curve index, time, magnitude).
    pub violations: Vec<(usize, f64, f64)>,
}

/// Check |(f∘γ)'_t| ≤ G(γ_t)·|γ̇_t| at all quadrature pairs; the composed
/// derivative is evaluated analytically via the chain rule.
pub fn check_wug<G: Fn(&[f64]) -> f64>(
    f: &ScalarField,
    g: G,
    ensemble: &CurveEnsemble,
    time_steps: usize,
) -> WugReport {
    let mut pairs = 0usize;
    let mut satisfied = 0usize;
    let mut max_violation = 0.0f64;
    let mut violations = Vec::new();
    for (ci, (curve, _)) in ensemble.curves().iter().enumerate() {
        for &t in &CurveEnsemble::time_grid(time_steps) {
            let x = curve.point(t);
            let derivative = linalg::dot(&f.gradient(&x), &curve.velocity(t));
            let bound = g(&x) * curve.speed(t);
            let violation = derivative.abs() - bound;
            pairs += 1;
            if violation <= 0.0 {
                satisfied += 1;
            } else {
                max_violation = max_violation.max(violation);
                if violations.len() < 32 {
                    violations.push((ci, t, violation));
                }
            }
        }
    }
    let pass = satisfied as f64 >= tol::WUG_PASS_FRACTION * pairs as f64
        && max_violation <= tol::WUG_VIOLATION;
    WugReport {
        pass,
        pairs,
        satisfied,
        max_violation,
        violations,
    }
}

/// Max residual of the chain-rule identity (f∘γ)'_t = π_V∇f(γ_t)·γ̇_t over
/// all quadrature pairs of a tangent ensemble.
pub fn chain_rule_residual(
    f: &ScalarField,
    bundle: &BundleField,
    ensemble: &CurveEnsemble,
    resolution: &Resolution,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for (curve, _) in ensemble.curves() {
        for &t in &CurveEnsemble::time_grid(resolution.time_grid) {
            let x = curve.point(t);
            let vel = curve.velocity(t);
            let composed = linalg::dot(&f.gradient(&x), &vel);
            let v = bundle.at_point(&x, resolution)?;
            let am = v.project(&f.gradient(&x))?;
            worst = worst.max((composed - linalg::dot(&am, &vel)).abs());
        }
    }
    Ok(worst)
}

/// Duality lower bound on the minimal weak upper gradient:
/// LB = [∫ (f(γ₁) − f(γ₀)) dπ] / (Comp·KE)^{1/2} ≤ ‖|Df|‖_{L²(μ)}.
///
/// Refuses to emit a bound unless the declared compression certificate
/// validates and the kinetic energy is positive.
pub fn cheeger_lower_bound(
    f: &ScalarField,
    ensemble: &CurveEnsemble,
    measure: &Measure,
    rule: &QuadratureRule,
    bins: usize,
) -> Result<f64> {
    let times = [0.0, 0.25, 0.5, 0.75, 1.0];
    let report = check_compression(ensemble, measure, rule, &times, bins)?;
    if !report.pass {
        return Err(Error::EnsembleRefused(format!(
            "compression certificate Comp = {} failed validation (max ratio {})",
            ensemble.comp(),
            report.max_ratio
        )));
    }
    let ke = ensemble.kinetic_energy(rule.resolution().time_grid);
    if ke <= 0.0 {
        return Err(Error::EnsembleRefused(
            "stationary ensemble: kinetic energy is zero, bound undefined".into(),
        ));
    }
    let increment: f64 = ensemble
        .curves()
        .iter()
        .map(|(c, w)| w * (f.value(&c.point(1.0)) - f.value(&c.point(0.0))))
        .sum();
    Ok(increment / (ensemble.comp() * ke).sqrt())
}
