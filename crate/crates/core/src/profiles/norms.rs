use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{BubbleFamily, HarmonicFunction, Model, RadialProfile};
use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre_8, integrate_range, CompensatedSum, TailSpec};

/// Squared gradient norm and weighted `L^q` norm of one function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub grad_norm_sq: f64,
    pub star_norm: f64,
}

/// Angular normalization `int cos^2(k theta) d theta`.
pub(crate) fn angular_weight(k: u32) -> f64 {
    if k == 0 {
        2.0 * PI
    } else {
        PI
    }
}

/// Exponent of `eta'` at the origin given `eta ~ t^p0` (smooth even
/// profiles have `eta' ~ t`).
fn deriv_p0(p0: f64) -> f64 {
    if p0 == 0.0 {
        1.0
    } else {
        p0 - 1.0
    }
}

fn break_points(profiles: &[&RadialProfile]) -> Vec<f64> {
    let mut scales = Vec::new();
    for p in profiles {
        p.scales(&mut scales);
    }
    scales.retain(|s| s.is_finite() && *s > 0.0);
    scales.sort_by(f64::total_cmp);
    scales.dedup_by(|x, y| (*x / *y - 1.0).abs() < 1e-9);
    let mut out = Vec::with_capacity(2 * scales.len());
    for (i, s) in scales.iter().enumerate() {
        if i > 0 && s / scales[i - 1] > 100.0 {
            out.push((s * scales[i - 1]).sqrt());
        }
        out.push(*s);
    }
    out
}

/// Integrates `f(t)` over `(0, inf)` with splits at the profile scales and
/// cell-wise Gauss–Legendre over the span of any sampled profile.
pub fn radial_integral<F: FnMut(f64) -> f64>(
    model: &Model,
    profiles: &[&RadialProfile],
    tails: TailSpec,
    mut f: F,
) -> Result<f64> {
    let splits = break_points(profiles);
    let mut node_sets = Vec::new();
    for p in profiles {
        p.grid_nodes(&mut node_sets);
    }
    let cfg = model.quad();
    if node_sets.is_empty() {
        return integrate_range(f, 0.0, f64::INFINITY, tails, &splits, cfg);
    }
    let mut nodes: Vec<f64> = node_sets.into_iter().flatten().collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    let (x_lo, x_hi) = (nodes[0], *nodes.last().unwrap());
    let mut total = CompensatedSum::new();
    total.add(integrate_range(&mut f, 0.0, x_lo.exp(), tails, &splits, cfg)?);
    for w in nodes.windows(2) {
        total.add(gauss_legendre_8(
            |x| {
                let t = x.exp();
                let y = f(t);
                if y == 0.0 {
                    0.0
                } else {
                    y * t
                }
            },
            w[0],
            w[1],
        ));
    }
    total.add(integrate_range(&mut f, x_hi.exp(), f64::INFINITY, tails, &splits, cfg)?);
    Ok(total.value())
}

/// `c_k [ tau^-1 int p' q' t^(K-1) + tau k^2 int p q t^(K-3) ]`.
pub(crate) fn grad_pair(model: &Model, k: u32, p: &RadialProfile, q: &RadialProfile) -> Result<f64> {
    let dim = model.dim();
    let tau = model.tau();
    let (p0a, pia) = p.tails();
    let (p0b, pib) = q.tails();
    let kk = (k * k) as f64;
    let mut a0 = dim - 1.0 + deriv_p0(p0a) + deriv_p0(p0b);
    let mut ainf = pia + pib + 2.0 - (dim - 1.0);
    if k > 0 {
        a0 = a0.min(dim - 3.0 + p0a + p0b);
        ainf = ainf.min(pia + pib - (dim - 3.0));
    }
    let tails = TailSpec::new(a0, ainf)?;
    let integral = radial_integral(model, &[p, q], tails, |t| {
        let (va, da, _) = p.jet(t);
        let (vb, db, _) = if std::ptr::eq(p, q) { (va, da, 0.0) } else { q.jet(t) };
        let tk = t.powf(dim - 3.0);
        tk * (da * db * t * t / tau + tau * kk * va * vb)
    })?;
    Ok(angular_weight(k) * integral)
}

/// `||u||^2 = int |x|^-2a |grad u|^2 dx`.
pub fn grad_norm_sq(u: &HarmonicFunction) -> Result<f64> {
    let model = u.model();
    let mut s = CompensatedSum::new();
    for term in u.terms() {
        s.add(grad_pair(model, term.k, &term.profile, &term.profile)?);
    }
    Ok(s.value())
}

/// The gradient inner product `<u, v>`.
pub fn grad_inner(u: &HarmonicFunction, v: &HarmonicFunction) -> Result<f64> {
    if u.model().point() != v.model().point() {
        return Err(Error::InvalidParams("functions belong to different parameter points".into()));
    }
    let mut s = CompensatedSum::new();
    for term in u.terms() {
        if let Some(other) = v.term(term.k, term.parity) {
            s.add(grad_pair(u.model(), term.k, &term.profile, other)?);
        }
    }
    Ok(s.value())
}

/// `||u||_* = (int |x|^-qb |u|^q dx)^(1/q)`.
///
/// Radial functions use the one-dimensional rule; otherwise the angle is
/// integrated by the trapezoid rule with node doubling until the relative
/// change drops below the model's angular tolerance.
pub fn star_norm(u: &HarmonicFunction) -> Result<f64> {
    Ok(star_integral(u)?.powf(1.0 / u.model().q()))
}

/// `int |x|^-qb |u|^q dx`.
pub(crate) fn star_integral(u: &HarmonicFunction) -> Result<f64> {
    let model = u.model();
    let q = model.q();
    let dim = model.dim();
    let tau = model.tau();
    if u.terms().is_empty() {
        return Ok(0.0);
    }
    let profiles: Vec<&RadialProfile> = u.terms().iter().map(|t| &t.profile).collect();
    let (p0, pinf) = profiles
        .iter()
        .map(|p| p.tails())
        .fold((f64::INFINITY, f64::INFINITY), |acc, x| (acc.0.min(x.0), acc.1.min(x.1)));
    let tails = TailSpec::new(dim - 1.0 + q * p0, q * pinf - (dim - 1.0))?;

    if u.is_radial() {
        let p = profiles[0];
        let v = radial_integral(model, &profiles, tails, |t| p.eval(t).abs().powf(q) * t.powf(dim - 1.0))?;
        return Ok(2.0 * PI * tau * v);
    }

    let mut n = 16usize;
    while n < 8 * (u.max_k() as usize + 1) {
        n *= 2;
    }
    let mut prev: Option<f64> = None;
    let mut levels = 0;
    while n <= 1 << 14 {
        let angles: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / n as f64;
                u.terms().iter().map(|term| term.angular(th)).collect()
            })
            .collect();
        let mut vals = vec![0.0; profiles.len()];
        let v = radial_integral(model, &profiles, tails, |t| {
            for (slot, p) in vals.iter_mut().zip(&profiles) {
                *slot = p.eval(t);
            }
            let mut s = 0.0;
            for row in &angles {
                let x: f64 = row.iter().zip(&vals).map(|(a, b)| a * b).sum();
                s += x.abs().powf(q);
            }
            s * t.powf(dim - 1.0)
        })?;
        let v = tau * 2.0 * PI / n as f64 * v;
        levels += 1;
        if let Some(p) = prev {
            if levels >= 2 && (v - p).abs() <= model.angular_tol() * v.abs() {
                return Ok(v);
            }
        }
        prev = Some(v);
        n *= 2;
    }
    Err(Error::NoConvergence("angular rule did not converge within 2^14 nodes".into()))
}

/// `int |x|^-qb U^(q-2) v^2 dx`, the weight of the linearized problem.
pub fn weighted_l2_sq(u: &HarmonicFunction) -> Result<f64> {
    let model = u.model();
    let d = model.derived();
    let dim = d.k;
    let cq = d.c_ab.powf(d.q - 2.0);
    let mut s = CompensatedSum::new();
    for term in u.terms() {
        let p = &term.profile;
        let (p0, pinf) = p.tails();
        let tails = TailSpec::new(dim - 1.0 + 2.0 * p0, 4.0 + 2.0 * pinf - (dim - 1.0))?;
        let v = radial_integral(model, &[p], tails, |t| {
            let e = p.eval(t);
            e * e * t.powf(dim - 1.0) / (1.0 + t * t).powi(2)
        })?;
        s.add(angular_weight(term.k) * d.tau * cq * v);
    }
    Ok(s.value())
}

pub fn norm_report(u: &HarmonicFunction) -> Result<NormReport> {
    Ok(NormReport {
        grad_norm_sq: grad_norm_sq(u)?,
        star_norm: star_norm(u)?,
    })
}

/// `d_ab = int |y|^-qb B^(q-1) dy`.
pub fn overlap_d(model: &Model) -> Result<f64> {
    let b = model.normalized_bubble(1.0)?;
    let q = model.q();
    let dim = model.dim();
    let v = radial_integral(model, &[&b], TailSpec::new(dim - 1.0, 3.0)?, |t| {
        b.eval(t).powf(q - 1.0) * t.powf(dim - 1.0)
    })?;
    Ok(2.0 * PI * model.tau() * v)
}

/// Maximum relative residual of the equation a closed-form or sampled
/// profile is meant to solve, over 200 log-spaced points in `[1e-3, 1e3]`.
///
/// Bubbles are checked against their nonlinear equations, kernel shapes and
/// sampled eigenfunctions against the linearized operator of their mode.
pub fn pde_residual(model: &Model, prof: &RadialProfile) -> Result<f64> {
    let dim = model.dim();
    let q = model.q();
    let tau = model.tau();
    enum Eq {
        Nonlinear { diff_scale: f64, source: f64 },
        Linear { k: u32, mu: f64 },
    }
    let eq = match prof {
        RadialProfile::Bubble { family, .. } => match family {
            BubbleFamily::V => Eq::Nonlinear {
                diff_scale: 1.0,
                source: 1.0,
            },
            BubbleFamily::U => Eq::Nonlinear {
                diff_scale: 1.0 / (tau * tau),
                source: 1.0,
            },
            BubbleFamily::B => Eq::Nonlinear {
                diff_scale: 1.0 / (tau * tau),
                source: model.best_constant()?,
            },
        },
        RadialProfile::KernelEta0 { .. } => Eq::Linear { k: 0, mu: q - 1.0 },
        RadialProfile::KernelVprime { .. } => Eq::Linear { k: 1, mu: q - 1.0 },
        RadialProfile::Grid(g) => Eq::Linear { k: g.k, mu: g.mu },
        _ => {
            return Err(Error::InvalidFunction(
                "residuals are defined for bubbles, kernel shapes and sampled eigenfunctions".into(),
            ))
        }
    };
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let t = 10f64.powf(-3.0 + 6.0 * i as f64 / 199.0);
        let (v, d1, d2) = prof.jet(t);
        let tk = t.powf(dim - 1.0);
        // (t^(K-1) eta')' = t^(K-1) (eta'' + (K-1) eta'/t), kept as two terms
        let flux = [tk * d2, tk * (dim - 1.0) * d1 / t];
        let parts = match eq {
            Eq::Nonlinear { diff_scale, source } => [
                diff_scale * flux[0],
                diff_scale * flux[1],
                source * v.abs().powf(q - 2.0) * v * tk,
                0.0,
            ],
            Eq::Linear { k, mu } => [
                flux[0],
                flux[1],
                -tau * tau * (k * k) as f64 * tk * v / (t * t),
                mu * model.potential(t) * tk * v,
            ],
        };
        let scale: f64 = parts.iter().map(|x| x.abs()).sum();
        if scale > 0.0 {
            worst = worst.max(parts.iter().sum::<f64>().abs() / scale);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParamPoint;

    fn model() -> Model {
        Model::new(ParamPoint::new(-1.0, -0.25).unwrap()).unwrap()
    }

    #[test]
    fn extremal_energy_by_quadrature() {
        let m = model();
        let u = HarmonicFunction::radial(&m, m.bubble_u(1.0).unwrap());
        let g = grad_norm_sq(&u).unwrap();
        assert!((g / m.extremal_energy() - 1.0).abs() < 1e-12);
        let s = star_integral(&u).unwrap();
        assert!((s / g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalized_bubble_has_unit_norm() {
        let m = model();
        for lambda in [0.1, 1.0, 10.0] {
            let b = HarmonicFunction::radial(&m, m.normalized_bubble(lambda).unwrap());
            assert!((star_norm(&b).unwrap() - 1.0).abs() < 1e-12);
            assert!((grad_norm_sq(&b).unwrap() / m.best_constant().unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn residuals_of_closed_forms() {
        let m = model();
        assert!(pde_residual(&m, &m.bubble_v()).unwrap() < 1e-12);
        assert!(pde_residual(&m, &m.bubble_u(1.0).unwrap()).unwrap() < 1e-12);
        assert!(pde_residual(&m, &m.bubble_u(0.2).unwrap()).unwrap() < 1e-12);
        assert!(pde_residual(&m, &m.normalized_bubble(3.0).unwrap()).unwrap() < 1e-12);
        assert!(pde_residual(&m, &m.kernel_eta0()).unwrap() < 1e-12);
        // The first-mode shape solves its equation only on the curve.
        assert!(pde_residual(&m, &m.kernel_vprime()).unwrap() > 1e-3);
        let on = Model::new(ParamPoint::new(-1.0, -0.2928932).unwrap()).unwrap();
        assert!(pde_residual(&on, &on.kernel_vprime()).unwrap() < 1e-12);
    }

    #[test]
    fn overlap_constant() {
        let m = model();
        let d = overlap_d(&m).unwrap();
        let closed = 2.0 * PI * m.tau() * m.c_norm().powf(m.q() - 1.0) / m.dim();
        assert!((d / closed - 1.0).abs() < 1e-12);
        assert!((d - 12.72).abs() < 0.01);
    }

    #[test]
    fn homogeneity_of_star_norm() {
        let m = model();
        let u = HarmonicFunction::radial(&m, m.bubble_u(1.0).unwrap());
        let a = star_norm(&u).unwrap();
        let b = star_norm(&u.scaled(2.0)).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
    }
}
