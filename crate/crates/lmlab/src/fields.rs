//! Vector fields on a chart with a volume form: divergence, Lie bracket,
//! the last-multiplier residual `A(m) + m div A`, the adjoint operator, and
//! inverse-multiplier / first-integral checks.

use crate::error::{Error, Result};
use crate::expr::{zero_on_domain, zero_on_domain_multi, Chart, CheckVerdict, Sampler, ScalarExpr};

/// Relative tolerance for the internal agreement between the two residual
/// routes of [`check_last_multiplier`] (they are the same smooth function).
pub const ROUTE_AGREEMENT_TOL: f64 = 1e-12;

/// A volume form `V = sigma dx^1 ∧ ... ∧ dx^n` given by its positive density.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeForm {
    density: ScalarExpr,
}

impl VolumeForm {
    /// Wraps a density, checking positivity at the sampler's points.
    pub fn new(density: ScalarExpr, sampler: &Sampler) -> Result<VolumeForm> {
        let chart = density.chart().clone();
        for i in 0..sampler.count {
            let p = sampler.point(&chart, i);
            let v = density.evaluate(&p)?;
            if v <= 0.0 {
                return Err(Error::Invalid(format!(
                    "volume density `{density}` is not positive at {p:?} (value {v})"
                )));
            }
        }
        Ok(VolumeForm { density })
    }

    /// The coordinate volume form, density 1.
    pub fn coordinate(chart: &Chart) -> VolumeForm {
        VolumeForm {
            density: ScalarExpr::one(chart),
        }
    }

    pub fn density(&self) -> &ScalarExpr {
        &self.density
    }

    pub fn chart(&self) -> &Chart {
        self.density.chart()
    }
}

/// A vector field as an n-tuple of component expressions on one chart.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    chart: Chart,
    components: Vec<ScalarExpr>,
}

impl VectorField {
    pub fn new(chart: &Chart, components: Vec<ScalarExpr>) -> Result<VectorField> {
        if components.len() != chart.dim() {
            return Err(Error::DimensionMismatch {
                expected: chart.dim(),
                actual: components.len(),
            });
        }
        for c in &components {
            if c.chart() != chart {
                return Err(Error::ChartMismatch);
            }
        }
        Ok(VectorField {
            chart: chart.clone(),
            components,
        })
    }

    /// The zero field.
    pub fn zero(chart: &Chart) -> VectorField {
        VectorField {
            chart: chart.clone(),
            components: (0..chart.dim()).map(|_| ScalarExpr::zero(chart)).collect(),
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn components(&self) -> &[ScalarExpr] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ScalarExpr {
        &self.components[i]
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Directional derivative `A(f) = sum_i A^i ∂_i f`.
    pub fn apply_to(&self, f: &ScalarExpr) -> Result<ScalarExpr> {
        if f.chart() != &self.chart {
            return Err(Error::ChartMismatch);
        }
        let mut acc = ScalarExpr::zero(&self.chart);
        for (i, a) in self.components.iter().enumerate() {
            acc = acc.add(&a.mul(&f.partial_derivative(i)));
        }
        Ok(acc.simplify())
    }

    /// The field `f * A`.
    pub fn scale(&self, f: &ScalarExpr) -> Result<VectorField> {
        if f.chart() != &self.chart {
            return Err(Error::ChartMismatch);
        }
        VectorField::new(
            &self.chart,
            self.components.iter().map(|a| f.mul(a).simplify()).collect(),
        )
    }
}

/// Divergence with respect to the volume form: `(1/sigma) sum_i ∂_i(sigma A^i)`.
/// For the coordinate volume this reduces to `sum_i ∂_i A^i`.
pub fn divergence(field: &VectorField, volume: &VolumeForm) -> Result<ScalarExpr> {
    if field.chart() != volume.chart() {
        return Err(Error::ChartMismatch);
    }
    let sigma = volume.density();
    let mut acc = ScalarExpr::zero(field.chart());
    for (i, a) in field.components().iter().enumerate() {
        acc = acc.add(&sigma.mul(a).partial_derivative(i));
    }
    if sigma.is_one() {
        Ok(acc.simplify())
    } else {
        Ok(acc.div(sigma).simplify())
    }
}

/// The last-multiplier residual `A(m) + m div A`; identically zero exactly
/// when `m` is a last multiplier of `A` for this volume form.
pub fn multiplier_residual(
    field: &VectorField,
    m: &ScalarExpr,
    volume: &VolumeForm,
) -> Result<ScalarExpr> {
    if m.chart() != field.chart() {
        return Err(Error::ChartMismatch);
    }
    let a_of_m = field.apply_to(m)?;
    let div = divergence(field, volume)?;
    Ok(a_of_m.add(&m.mul(&div)).simplify())
}

/// The adjoint operator applied to `m`: `A*(m) = -A(m) - m div A`.
/// `m` is a last multiplier iff the result vanishes, i.e. iff `m` is a
/// first integral of the adjoint field.
pub fn adjoint_apply(
    field: &VectorField,
    m: &ScalarExpr,
    volume: &VolumeForm,
) -> Result<ScalarExpr> {
    Ok(multiplier_residual(field, m, volume)?.neg())
}

/// Checks that `m` is a last multiplier of `field` by evaluating both the
/// residual `A(m) + m div A` and the equivalent `div(m A)` on the domain
/// box. The two residuals are required to agree pointwise (they are the
/// same function); the verdict carries a `trivial` flag when `m` vanishes
/// identically at the samples.
pub fn check_last_multiplier(
    field: &VectorField,
    m: &ScalarExpr,
    volume: &VolumeForm,
    sampler: &Sampler,
    tol: f64,
) -> Result<CheckVerdict> {
    let residual = multiplier_residual(field, m, volume)?;
    let div_route = divergence(&field.scale(m)?, volume)?;

    let verdict = zero_on_domain_multi(
        &[residual.clone(), div_route.clone()],
        &[],
        sampler,
        tol,
    )?;

    assert_routes_agree(&residual, &div_route, sampler, "Eq. (1.2) vs div(mA)")?;

    let trivial = is_identically_zero_at_samples(m, sampler);
    Ok(verdict.with_trivial(trivial))
}

/// Lie bracket `[X, Y]^k = sum_i (X^i ∂_i Y^k - Y^i ∂_i X^k)`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    if x.chart() != y.chart() {
        return Err(Error::ChartMismatch);
    }
    let chart = x.chart();
    let mut components = Vec::with_capacity(chart.dim());
    for k in 0..chart.dim() {
        let mut acc = ScalarExpr::zero(chart);
        for i in 0..chart.dim() {
            let xy = x.component(i).mul(&y.component(k).partial_derivative(i));
            let yx = y.component(i).mul(&x.component(k).partial_derivative(i));
            acc = acc.add(&xy.sub(&yx));
        }
        components.push(acc.simplify());
    }
    VectorField::new(chart, components)
}

/// Checks the inverse-multiplier condition `A(h) = (div A) h`. When it
/// passes, `1/h` is cross-checked to be a last multiplier.
pub fn check_inverse_multiplier(
    field: &VectorField,
    h: &ScalarExpr,
    volume: &VolumeForm,
    sampler: &Sampler,
    tol: f64,
) -> Result<CheckVerdict> {
    if h.chart() != field.chart() {
        return Err(Error::ChartMismatch);
    }
    let vanishing = count_guard_failures(h, sampler);
    if vanishing * 2 > sampler.count {
        return Err(Error::GuardVanishes {
            what: h.to_string(),
        });
    }

    let div = divergence(field, volume)?;
    let residual = field.apply_to(h)?.sub(&h.mul(&div)).simplify();
    let verdict = zero_on_domain_multi(&[residual], std::slice::from_ref(h), sampler, tol)?;

    if verdict.passed {
        let m = ScalarExpr::one(h.chart()).div(h);
        let cross = check_last_multiplier(field, &m, volume, sampler, tol)?;
        if !cross.passed {
            return Err(Error::Inconsistent(format!(
                "inverse multiplier `{h}` passed but 1/h failed the last-multiplier check \
                 (max residual {})",
                cross.max_abs_residual
            )));
        }
    }
    Ok(verdict)
}

/// Checks that `f` is a first integral: `A(f) = 0` on the domain box.
pub fn check_first_integral(
    field: &VectorField,
    f: &ScalarExpr,
    sampler: &Sampler,
    tol: f64,
) -> Result<CheckVerdict> {
    let derivative = field.apply_to(f)?;
    zero_on_domain(&derivative, sampler, tol)
}

// ---------------------------------------------------------------------------
// helpers

/// Requires two spellings of the same residual to agree at every sample,
/// relative to the larger of their magnitudes and term scales.
pub(crate) fn assert_routes_agree(
    a: &ScalarExpr,
    b: &ScalarExpr,
    sampler: &Sampler,
    what: &str,
) -> Result<()> {
    let chart = a.chart().clone();
    for i in 0..sampler.count {
        let p = sampler.point(&chart, i);
        let (va, da) = match a.evaluate_guarded(&p) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let (vb, db) = match b.evaluate_guarded(&p) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if da < sampler.guard_tol || db < sampler.guard_tol {
            continue;
        }
        let mut scale = va.abs().max(vb.abs());
        for t in a.additive_terms().iter().chain(b.additive_terms().iter()) {
            if let Ok(v) = t.evaluate(&p) {
                scale = scale.max(v.abs());
            }
        }
        if (va - vb).abs() > ROUTE_AGREEMENT_TOL * (1.0 + scale) {
            return Err(Error::Inconsistent(format!(
                "{what} disagree at {p:?}: {va} vs {vb}"
            )));
        }
    }
    Ok(())
}

fn is_identically_zero_at_samples(m: &ScalarExpr, sampler: &Sampler) -> bool {
    let chart = m.chart().clone();
    let mut saw_value = false;
    for i in 0..sampler.count {
        let p = sampler.point(&chart, i);
        match m.evaluate(&p) {
            Ok(v) => {
                saw_value = true;
                if v != 0.0 {
                    return false;
                }
            }
            Err(_) => {}
        }
    }
    saw_value
}

fn count_guard_failures(h: &ScalarExpr, sampler: &Sampler) -> usize {
    let chart = h.chart().clone();
    let mut n = 0;
    for i in 0..sampler.count {
        let p = sampler.point(&chart, i);
        match h.evaluate_guarded(&p) {
            Ok((v, den)) if v.abs() >= sampler.guard_tol && den >= sampler.guard_tol => {}
            _ => n += 1,
        }
    }
    n
}
