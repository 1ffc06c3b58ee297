//! Energy functionals on compactly supported Lipschitz fields.
//!
//! * `lip` energy: E_lip(f) = ½ ∫ lip_p(f)² dμ with lip_p the dual-norm
//!   local Lipschitz constant ‖∇f‖_q;
//! * projected-gradient energy: E(f) = ½ ∫ |π_{V(μ,x)} ∇f(x)|² dμ, a
//!   quadratic form for every structured measure;
//! * parallelogram defect E(f+g) + E(f−g) − 2E(f) − 2E(g), the quantitative
//!   Hilbertianity probe.
//!
//! All functionals require an explicit compact support box on the field.

use serde::Serialize;

use crate::bundle::{assign_bundle, BundleField};
use crate::error::{Error, Result};
use crate::fields::{lip, NormPlugin, ScalarField};
use crate::grassmann::Subspace;
use crate::linalg;
use crate::measure::{integrate_with, l2_norm, quadrature, Measure, QuadratureRule, Resolution};

/// Which functional an evaluator computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Lip(NormPlugin),
    Projected,
}

/// A measure-bound energy functional with its quadrature rule and (for the
/// projected-gradient energy) the precomputed bundle subspaces.
pub struct EnergyEvaluator {
    rule: QuadratureRule,
    subspaces: Option<Vec<Subspace>>,
    kind: Kind,
    measure_id: String,
    unsound: bool,
}

impl EnergyEvaluator {
    /// The ½∫ lip_p² dμ functional.
    pub fn lip(measure: &Measure, norm: NormPlugin, resolution: &Resolution) -> Result<Self> {
        Ok(Self {
            rule: quadrature(measure, resolution)?,
            subspaces: None,
            kind: Kind::Lip(norm),
            measure_id: measure.id().to_string(),
            unsound: false,
        })
    }

    /// The projected-gradient quadratic form for the measure's bundle.
    pub fn projected(measure: &Measure, resolution: &Resolution) -> Result<Self> {
        Self::projected_with_bundle(&assign_bundle(measure), resolution)
    }

    /// Same, for an explicit (possibly overridden) bundle.
    pub fn projected_with_bundle(bundle: &BundleField, resolution: &Resolution) -> Result<Self> {
        let rule = quadrature(bundle.measure(), resolution)?;
        let subspaces = bundle.subspaces(&rule)?;
        Ok(Self {
            rule,
            subspaces: Some(subspaces),
            kind: Kind::Projected,
            measure_id: bundle.measure().id().to_string(),
            unsound: bundle.is_overridden(),
        })
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// True when built from a bundle with hand-replaced component rules.
    pub fn is_unsound(&self) -> bool {
        self.unsound
    }

    pub fn functional_label(&self) -> String {
        match self.kind {
            Kind::Lip(p) => format!("E_lip[p={}]", p.label()),
            Kind::Projected => "E_proj".to_string(),
        }
    }

    fn require_support(&self, f: &ScalarField) -> Result<()> {
        if f.support().is_none() {
            return Err(Error::UnsupportedField(format!(
                "field '{}' has no declared compact support box",
                f.name()
            )));
        }
        if f.dim() != self.rule.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.rule.dim(),
                got: f.dim(),
            });
        }
        Ok(())
    }

    /// Evaluate the functional.
    pub fn energy(&self, f: &ScalarField) -> Result<f64> {
        self.require_support(f)?;
        match self.kind {
            Kind::Lip(p) => {
                Ok(0.5 * integrate_with(&self.rule, |x| {
                    let l = lip(f, x, p);
                    l * l
                })?)
            }
            Kind::Projected => {
                let subspaces = self.subspaces.as_ref().expect("projected kind");
                let mut acc = 0.0;
                for (i, (x, w)) in self.rule.nodes().iter().zip(self.rule.weights()).enumerate() {
                    let g = subspaces[i].project(&f.gradient(x))?;
                    let n2 = linalg::dot(&g, &g);
                    if !n2.is_finite() {
                        return Err(Error::NonFiniteValue {
                            node: i,
                            point: x.clone(),
                        });
                    }
                    acc += 0.5 * w * n2;
                }
                Ok(acc)
            }
        }
    }

    /// Per-node projected gradients π_{V(μ,x_i)} ∇f(x_i); only defined for
    /// the projected-gradient functional.
    pub fn projected_gradients(&self, f: &ScalarField) -> Result<Vec<Vec<f64>>> {
        self.require_support(f)?;
        let subspaces = self.subspaces.as_ref().ok_or_else(|| {
            Error::Config("projected gradients are only defined for the projected energy".into())
        })?;
        self.rule
            .nodes()
            .iter()
            .zip(subspaces)
            .map(|(x, v)| v.project(&f.gradient(x)))
            .collect()
    }
}

/// One evaluated functional, ready for CSV/JSON reporting.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub measure: String,
    pub field: String,
    pub functional: String,
    pub p: String,
    pub resolution: String,
    pub value: f64,
    pub unsound: bool,
}

/// E_lip(f; p) = ½ ∫ lip_p(f)² dμ.
pub fn energy_lip(
    f: &ScalarField,
    measure: &Measure,
    norm: NormPlugin,
    resolution: &Resolution,
) -> Result<EnergyReport> {
    let ev = EnergyEvaluator::lip(measure, norm, resolution)?;
    Ok(EnergyReport {
        measure: measure.id().to_string(),
        field: f.name().to_string(),
        functional: "E_lip".into(),
        p: norm.label().into(),
        resolution: resolution.descriptor(),
        value: ev.energy(f)?,
        unsound: false,
    })
}

/// The projected-gradient energy ½ ∫ |π_{V(μ,x)} ∇f|² dμ.
pub fn energy_projected(
    f: &ScalarField,
    measure: &Measure,
    resolution: &Resolution,
) -> Result<EnergyReport> {
    let ev = EnergyEvaluator::projected(measure, resolution)?;
    Ok(EnergyReport {
        measure: measure.id().to_string(),
        field: f.name().to_string(),
        functional: "E_proj".into(),
        p: "2".into(),
        resolution: resolution.descriptor(),
        value: ev.energy(f)?,
        unsound: ev.is_unsound(),
    })
}

/// Parallelogram defect of a functional at a pair of fields.
#[derive(Debug, Clone, Serialize)]
pub struct DefectReport {
    pub functional: String,
    pub measure: String,
    pub field_f: String,
    pub field_g: String,
    pub e_sum: f64,
    pub e_diff: f64,
    pub e_f: f64,
    pub e_g: f64,
    /// E(f+g) + E(f−g) − 2E(f) − 2E(g).
    pub defect: f64,
    /// |defect| / (2E(f) + 2E(g)), 0 when the denominator vanishes.
    pub relative_defect: f64,
    pub unsound: bool,
}

/// Evaluate the parallelogram identity probe for `evaluator` at (f, g).
pub fn parallelogram_defect(
    evaluator: &EnergyEvaluator,
    f: &ScalarField,
    g: &ScalarField,
) -> Result<DefectReport> {
    let sum = f.add(g)?;
    let diff = f.sub(g)?;
    // combinators drop the support box when the operands' boxes differ;
    // reattach the union so the sum/difference stay admissible
    let (sum, diff) = match (f.support(), g.support()) {
        (Some(a), Some(b)) => {
            let lo: Vec<f64> = a.lo.iter().zip(&b.lo).map(|(x, y)| x.min(*y)).collect();
            let hi: Vec<f64> = a.hi.iter().zip(&b.hi).map(|(x, y)| x.max(*y)).collect();
            let hull = crate::fields::BoxRegion::new(lo, hi)?;
            (sum.with_support(hull.clone()), diff.with_support(hull))
        }
        _ => (sum, diff),
    };
    let e_sum = evaluator.energy(&sum)?;
    let e_diff = evaluator.energy(&diff)?;
    let e_f = evaluator.energy(f)?;
    let e_g = evaluator.energy(g)?;
    let defect = e_sum + e_diff - 2.0 * e_f - 2.0 * e_g;
    let denom = 2.0 * e_f + 2.0 * e_g;
    Ok(DefectReport {
        functional: evaluator.functional_label(),
        measure: evaluator.measure_id.clone(),
        field_f: f.name().to_string(),
        field_g: g.name().to_string(),
        e_sum,
        e_diff,
        e_f,
        e_g,
        defect,
        relative_defect: if denom > 0.0 {
            defect.abs() / denom
        } else {
            0.0
        },
        unsound: evaluator.is_unsound(),
    })
}

/// Sobolev-norm surrogate (‖f‖²_{L²(μ)} + 2E(f))^{1/2} for a chosen energy.
pub fn sobolev_norm(f: &ScalarField, evaluator: &EnergyEvaluator) -> Result<f64> {
    let l2 = l2_norm(evaluator.rule(), f)?;
    Ok((l2 * l2 + 2.0 * evaluator.energy(f)?).sqrt())
}
