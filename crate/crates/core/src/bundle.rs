//! The decomposability-bundle field x ↦ V(μ,x) for structured measures.
//!
//! Per-component rules are hard-coded standard identifications:
//!
//! * Lebesgue pieces carry the full space (Rademacher);
//! * rectifiable k-patches carry their tangent space;
//! * fat Cantor components carry the embedding line (the component is
//!   absolutely continuous along it);
//! * classic Cantor components and atoms carry the zero subspace.
//!
//! On nodes where several components' membership oracles fire, the assigned
//! subspace is the span union of the fired components' subspaces, matching
//! the maximality of the bundle of a sum.

use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::grassmann::Subspace;
use crate::linalg;
use crate::measure::{
    CantorVariant, Measure, MeasureComponent, NodeDetail, QuadratureRule, Resolution,
};
use crate::tol;

/// The bundle field of a structured measure.
#[derive(Debug, Clone)]
pub struct BundleField {
    measure: Measure,
    /// Set when a config override replaced a rule; reports must flag the
    /// result as unsound.
    overridden: bool,
    overrides: Vec<(usize, Subspace)>,
}

/// Assign the bundle field of `measure` from the per-component rules.
pub fn assign_bundle(measure: &Measure) -> BundleField {
    BundleField {
        measure: measure.clone(),
        overridden: false,
        overrides: Vec::new(),
    }
}

impl BundleField {
    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    /// True if any per-component rule was replaced by hand; certificates and
    /// reports derived from an overridden bundle are marked unsound.
    pub fn is_overridden(&self) -> bool {
        self.overridden
    }

    /// Experiment hook: force the subspace of one component. Marks the
    /// bundle as unsound.
    pub fn override_component(&mut self, component: usize, subspace: Subspace) {
        self.overridden = true;
        self.overrides.push((component, subspace));
    }

    fn component_rule(
        &self,
        ci: usize,
        x: &[f64],
        detail: Option<&NodeDetail>,
        node: usize,
    ) -> Result<Subspace> {
        if let Some((_, s)) = self.overrides.iter().rev().find(|(c, _)| *c == ci) {
            return Ok(s.clone());
        }
        let d = self.measure.dim();
        let comp = &self.measure.components()[ci].1;
        match comp {
            MeasureComponent::Lebesgue { .. } => Ok(Subspace::full(d)),
            MeasureComponent::RectifiablePatch { patch, .. } => {
                let param = match detail {
                    Some(NodeDetail::PatchParam(u)) => u.clone(),
                    _ => patch.distance(x).1,
                };
                let tangent = Subspace::span(d, &patch.jacobian(&param))?;
                if tangent.dim() != patch.k() {
                    return Err(Error::DegeneratePatch {
                        node,
                        component: self.measure.component_label(ci),
                    });
                }
                Ok(tangent)
            }
            MeasureComponent::Cantor(c) => match c.variant {
                CantorVariant::Fat => Subspace::line(&linalg::basis_vector(d, c.axis)),
                CantorVariant::Classic => Ok(Subspace::zero(d)),
            },
            MeasureComponent::Atoms { .. } => Ok(Subspace::zero(d)),
        }
    }

    /// V(μ,x) at a quadrature node, resolving mixture overlaps by span union
    /// over every component whose membership oracle fires at the node.
    pub fn at_node(&self, rule: &QuadratureRule, i: usize) -> Result<Subspace> {
        let x = &rule.nodes()[i];
        let info = &rule.info()[i];
        let mut v = self.component_rule(info.component, x, Some(&info.detail), i)?;
        for (ci, _) in self.measure.components().iter().enumerate() {
            if ci == info.component {
                continue;
            }
            if self.measure.components()[ci]
                .1
                .membership(x, tol::MEMBERSHIP, rule.resolution())
            {
                let other = self.component_rule(ci, x, None, i)?;
                v = v.span_union(&other)?;
            }
        }
        Ok(v)
    }

    /// V(μ,x) at an arbitrary point: union over all components whose
    /// membership fires; the zero subspace off the support.
    pub fn at_point(&self, x: &[f64], resolution: &Resolution) -> Result<Subspace> {
        let mut v = Subspace::zero(self.measure.dim());
        for (ci, (_, comp)) in self.measure.components().iter().enumerate() {
            if comp.membership(x, tol::MEMBERSHIP, resolution) {
                v = v.span_union(&self.component_rule(ci, x, None, usize::MAX)?)?;
            }
        }
        Ok(v)
    }

    /// Precompute V(μ,·) at every node of a rule.
    pub fn subspaces(&self, rule: &QuadratureRule) -> Result<Vec<Subspace>> {
        (0..rule.len()).map(|i| self.at_node(rule, i)).collect()
    }
}

/// First-order differentiability residual of `f` at `x` along `subspace`:
/// for each radius r, the maximum over a net of v with |v| = r of
/// |f(x+v) − f(x) − π_V(∇f(x))·v| / |v|. Decreases to 0 for smooth f.
pub fn differentiability_residual(
    f: &ScalarField,
    subspace: &Subspace,
    x: &[f64],
    radii: &[f64],
) -> Result<Vec<f64>> {
    if subspace.dim() == 0 {
        return Ok(vec![0.0; radii.len()]);
    }
    let grad = subspace.project(&f.gradient(x))?;
    let fx = f.value(x);
    let net = subspace.sphere_net(17);
    Ok(radii
        .iter()
        .map(|&r| {
            net.iter()
                .map(|dir| {
                    let v = linalg::scale(r, dir);
                    let y = linalg::add(x, &v);
                    (f.value(&y) - fx - linalg::dot(&grad, &v)).abs() / r
                })
                .fold(0.0f64, f64::max)
        })
        .collect())
}
