//! The deficit quotient, the bubble-projection functional, distance to the
//! manifold of extremals, and the standard test families.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{maximize_log_scale, TailSpec};
use crate::params::Region;
use crate::profiles::{
    grad_norm_sq, radial_integral, star_norm, HarmonicFunction, HarmonicTerm, Model, Parity,
};

/// Bracket for scale searches, in decades.
pub const LOG10_SCALE_RANGE: f64 = 12.0;
/// `dist^2 <= E_UNDEFINED * ||u||^2` counts as membership in the manifold.
pub const E_UNDEFINED: f64 = 1e-12;
const ARGMAX_TOL: f64 = 1e-9;

/// Everything the deficit quotient is built from, for one function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeficitReport {
    pub grad_sq: f64,
    pub star: f64,
    pub m_value: f64,
    /// Maximizing scale, or `None` when the supremum sits at the bracket ends.
    pub m_argmax: Option<f64>,
    pub dist_sq: f64,
    pub deficit: f64,
    /// `deficit / dist_sq`, undefined on the manifold.
    pub e: Option<f64>,
}

/// `int |x|^-qb B_lambda^(q-1) u dx`; only the radial part of `u` contributes.
pub fn pair_with_bubble(u: &HarmonicFunction, lambda: f64) -> Result<f64> {
    let model = u.model();
    let Some(eta) = u.term(0, Parity::Cos) else {
        return Ok(0.0);
    };
    let b = model.normalized_bubble(lambda)?;
    let q = model.q();
    let dim = model.dim();
    let (p0, pinf) = eta.tails();
    let tails = TailSpec::new(dim - 1.0 + p0, pinf + 3.0)?;
    let v = radial_integral(model, &[&b, eta], tails, |t| {
        b.eval(t).powf(q - 1.0) * eta.eval(t) * t.powf(dim - 1.0)
    })?;
    Ok(2.0 * PI * model.tau() * v)
}

fn scale_bracket() -> (f64, f64) {
    let l = LOG10_SCALE_RANGE * std::f64::consts::LN_10;
    (-l, l)
}

/// `m(u) = sup_lambda pair_with_bubble(u, lambda)^2` and the maximizing scale.
pub fn m_of(u: &HarmonicFunction) -> Result<(f64, Option<f64>)> {
    if u.term(0, Parity::Cos).is_none() {
        return Ok((0.0, None));
    }
    let mut failure = None;
    let (lo, hi) = scale_bracket();
    let best = maximize_log_scale(
        |lambda| match pair_with_bubble(u, lambda) {
            Ok(v) => v * v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        ARGMAX_TOL,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((best.max, best.interior.then_some(best.argmax)))
}

/// `dist(u, M) = sqrt(||u||^2 - S m(u))`, clamped at zero.
pub fn dist_to_manifold(u: &HarmonicFunction) -> Result<f64> {
    let s = u.model().best_constant()?;
    let grad = grad_norm_sq(u)?;
    let (m, _) = m_of(u)?;
    Ok((grad - s * m).max(0.0).sqrt())
}

/// Distance to the manifold by direct minimization of `||u - c U_lambda||`:
/// `c` is eliminated in closed form, `lambda` by a log-scale search, with all
/// inner products taken in the gradient norm.
pub fn dist_direct(u: &HarmonicFunction) -> Result<f64> {
    let model = u.model();
    model.best_constant()?;
    let grad = grad_norm_sq(u)?;
    if u.term(0, Parity::Cos).is_none() {
        return Ok(grad.sqrt());
    }
    let mut failure = None;
    let projection = |lambda: f64| -> Result<f64> {
        let ul = HarmonicFunction::radial(model, model.bubble_u(lambda)?);
        let ip = crate::profiles::grad_inner(u, &ul)?;
        Ok(ip * ip / grad_norm_sq(&ul)?)
    };
    let (lo, hi) = scale_bracket();
    let best = maximize_log_scale(
        |lambda| match projection(lambda) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        ARGMAX_TOL,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((grad - best.max).max(0.0).sqrt())
}

pub fn deficit_report(u: &HarmonicFunction) -> Result<DeficitReport> {
    let s = u.model().best_constant()?;
    let grad_sq = grad_norm_sq(u)?;
    let star = star_norm(u)?;
    let (m_value, m_argmax) = m_of(u)?;
    let dist_sq = (grad_sq - s * m_value).max(0.0);
    let deficit = grad_sq - s * star * star;
    let e = (dist_sq > E_UNDEFINED * grad_sq).then(|| deficit / dist_sq);
    Ok(DeficitReport {
        grad_sq,
        star,
        m_value,
        m_argmax,
        dist_sq,
        deficit,
        e,
    })
}

/// `B + B_lambda`, for `0 < lambda < 1`.
pub fn two_bubble(model: &Model, lambda: f64) -> Result<HarmonicFunction> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParams(format!("two-bubble scale {lambda} must lie in (0, 1)")));
    }
    let b = model.normalized_bubble(1.0)?;
    let bl = model.normalized_bubble(lambda)?;
    Ok(HarmonicFunction::radial(model, b.plus(1.0, &bl, 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    GradSq,
    StarSq,
    DistSq,
    E,
}

/// Measured small-scale behaviour `Q(lambda) ~ limit + coefficient lambda^p`.
///
/// `exponent` is fitted freely from successive differences; `limit` and
/// `coefficient` come from a linear fit with the exponent pinned at
/// `nominal_exponent`, so that a slightly biased free exponent does not leak
/// into the coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub exponent: f64,
    pub nominal_exponent: f64,
    pub coefficient: f64,
    pub limit: f64,
    /// Root-mean-square residual of the pinned fit.
    pub residual: f64,
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
}

/// Eight geometric points in `[1e-9, 1e-7]`; small enough that the
/// next-order corrections (relative size `lambda^(1/tau)`) stay near 3%.
pub fn default_fit_window() -> Vec<f64> {
    geometric_grid(1e-9, 1e-7, 8)
}

pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn quantity_of(report: &DeficitReport, quantity: Quantity) -> Result<f64> {
    match quantity {
        Quantity::GradSq => Ok(report.grad_sq),
        Quantity::StarSq => Ok(report.star * report.star),
        Quantity::DistSq => Ok(report.dist_sq),
        Quantity::E => report
            .e
            .ok_or_else(|| Error::FitDegenerate("quotient undefined on the manifold".into())),
    }
}

/// Fits the two-bubble expansion of `quantity` over `lambdas`.
pub fn fit_expansion(model: &Model, quantity: Quantity, lambdas: &[f64]) -> Result<ExpansionFit> {
    let mut values = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        values.push(quantity_of(&deficit_report(&two_bubble(model, l)?)?, quantity)?);
    }
    fit_power_law(lambdas, &values, -model.point().a)
}

/// Fits `values ~ limit + coefficient lambda^p` on a geometric grid.
pub fn fit_power_law(lambdas: &[f64], values: &[f64], nominal_exponent: f64) -> Result<ExpansionFit> {
    let n = lambdas.len();
    if n < 6 || values.len() != n {
        return Err(Error::FitDegenerate(format!("need at least 6 points, got {n}")));
    }
    let ratio = lambdas[1] / lambdas[0];
    if !(ratio > 1.0) || lambdas.windows(2).any(|w| (w[1] / w[0] / ratio - 1.0).abs() > 1e-6) {
        return Err(Error::FitDegenerate("scale grid must be increasing and geometric".into()));
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let noise = 1e-12 * scale;
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    if diffs.iter().any(|d| d.abs() <= noise) || diffs.iter().any(|d| d.signum() != diffs[0].signum()) {
        return Err(Error::FitDegenerate(
            "successive differences are at quadrature noise or change sign".into(),
        ));
    }
    let xs: Vec<f64> = lambdas[..n - 1].iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = diffs.iter().map(|d| d.abs().ln()).collect();
    let (exponent, _) = linear_fit(&xs, &ys);

    let basis: Vec<f64> = lambdas.iter().map(|l| l.powf(nominal_exponent)).collect();
    let (coefficient, limit) = linear_fit(&basis, values);
    let residual = (basis
        .iter()
        .zip(values)
        .map(|(b, v)| (limit + coefficient * b - v).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    Ok(ExpansionFit {
        exponent,
        nominal_exponent,
        coefficient,
        limit,
        residual,
        lambdas: lambdas.to_vec(),
        values: values.to_vec(),
    })
}

/// Least squares `y = slope x + intercept`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `U + eps * direction` for each `eps`, with its deficit report.
pub fn perturbation_sequence(
    model: &Model,
    direction: &HarmonicFunction,
    eps_list: &[f64],
) -> Result<Vec<(f64, DeficitReport)>> {
    let base = HarmonicFunction::radial(model, model.bubble_u(1.0)?);
    eps_list
        .iter()
        .map(|&eps| Ok((eps, deficit_report(&base.add_scaled(eps, direction)?)?)))
        .collect()
}

/// The first-mode kernel direction `Z1` on the curve.
pub fn degenerate_direction(model: &Model) -> Result<HarmonicFunction> {
    if model.region() != Region::OnFS {
        return Err(Error::InvalidParams(format!(
            "degenerate direction exists only on the curve b = b_fs = {}",
            model.derived().b_fs
        )));
    }
    HarmonicFunction::new(model, vec![HarmonicTerm::new(1, Parity::Cos, model.kernel_vprime())])
}

/// `E(U + eps Z1)` on the symmetry-breaking curve.
pub fn degenerate_sequence(model: &Model, eps_list: &[f64]) -> Result<Vec<(f64, f64)>> {
    let z1 = degenerate_direction(model)?;
    perturbation_sequence(model, &z1, eps_list)?
        .into_iter()
        .map(|(eps, r)| {
            r.e.map(|e| (eps, e))
                .ok_or_else(|| Error::NoConvergence(format!("quotient undefined at eps = {eps}")))
        })
        .collect()
}

/// Default perturbation sizes for the degenerate sequence.
pub fn default_eps_window() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}

/// Limit at `eps = 0` of a function even in `eps`, sampled at `eps`,
/// `eps/2`, `eps/4`, ... by repeated Richardson elimination in `eps^2`.
pub fn richardson_even(eps: &[f64], values: &[f64]) -> Result<f64> {
    if eps.len() < 2 || eps.len() != values.len() {
        return Err(Error::FitDegenerate("need at least two samples".into()));
    }
    if eps.windows(2).any(|w| (w[0] / w[1] - 2.0).abs() > 1e-12) {
        return Err(Error::FitDegenerate("samples must halve eps".into()));
    }
    let mut col = values.to_vec();
    let mut f = 4.0;
    while col.len() > 1 {
        col = col.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
        f *= 4.0;
    }
    Ok(col[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParamPoint;

    fn model() -> Model {
        Model::new(ParamPoint::new(-1.0, -0.25).unwrap()).unwrap()
    }

    #[test]
    fn self_pairing_of_normalized_bubble() {
        let m = model();
        let b = HarmonicFunction::radial(&m, m.normalized_bubble(1.0).unwrap());
        assert!((pair_with_bubble(&b, 1.0).unwrap() - 1.0).abs() < 1e-13);
        assert!(pair_with_bubble(&b, 1e-12).unwrap() < 1e-9);
        assert!(pair_with_bubble(&b, 1e12).unwrap() < 1e-9);
    }

    #[test]
    fn m_of_bubbles() {
        let m = model();
        for mu in [0.1, 1.0, 10.0] {
            let b = HarmonicFunction::radial(&m, m.normalized_bubble(mu).unwrap());
            let (v, arg) = m_of(&b).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
            assert!((arg.unwrap() / mu - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn richardson_recovers_polynomial_limit() {
        let f = |e: f64| 0.3 + 2.0 * e * e - 5.0 * e.powi(4);
        let eps = [0.1, 0.05, 0.025];
        let vals: Vec<f64> = eps.iter().map(|&e| f(e)).collect();
        assert!((richardson_even(&eps, &vals).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn power_law_fit_on_synthetic_data() {
        let ls = geometric_grid(1e-6, 1e-4, 7);
        let vals: Vec<f64> = ls.iter().map(|l| 2.0 - 3.0 * l).collect();
        let fit = fit_power_law(&ls, &vals, 1.0).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-6);
        assert!((fit.coefficient + 3.0).abs() < 1e-6);
        assert!((fit.limit - 2.0).abs() < 1e-12);
        let flat = vec![1.0; 7];
        assert!(matches!(fit_power_law(&ls, &flat, 1.0), Err(Error::FitDegenerate(_))));
    }

    #[test]
    fn two_bubble_rejects_bad_scale() {
        let m = model();
        assert!(two_bubble(&m, 1.5).is_err());
        assert!(two_bubble(&m, 0.0).is_err());
    }
}
