//! Per-mode Sturm–Liouville eigensolver for the linearized problem at the
//! extremal, and the assembled low spectrum.
//!
//! With `x = ln t` and `eta = t^-beta g`, the Rayleigh quotient of mode `k`
//! becomes `int (g'^2 + nu^2 g^2) dx / int w g^2 dx` with
//! `nu^2 = beta^2 + tau^2 k^2` and `w = K(K-2)/(4 cosh^2 x)`. That quotient
//! is discretized by three-point differences on a uniform grid with
//! Dirichlet ends, and the symmetric-definite tridiagonal pencil is solved by
//! Sturm-sequence bisection. Eigenvalues are extrapolated over successive
//! grid halvings.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre_8, CompensatedSum, TailSpec};
use crate::params::{derive, ParamPoint, Region};
use crate::profiles::{GridProfile, HarmonicFunction, HarmonicTerm, Model, Parity, RadialProfile};

/// Resolution controls for [`solve_mode`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Relative change between successive extrapolated eigenvalues at which
    /// refinement stops.
    pub rel_tol: f64,
    /// Maximum number of grid halvings after the base grid.
    pub max_levels: usize,
    /// Decay lengths (in units of `1/nu`) kept beyond the turning point.
    pub decay_lengths: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            rel_tol: 1e-9,
            max_levels: 8,
            decay_lengths: 22.0,
        }
    }
}

impl GridConfig {
    /// Fewer halvings and a looser stopping rule, for smoke runs.
    pub fn quick() -> Self {
        GridConfig {
            rel_tol: 1e-7,
            max_levels: 4,
            ..Self::default()
        }
    }
}

/// One angular mode of the linearized problem in Sturm–Liouville form
/// `(P eta')' - Q eta + mu W eta = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeProblem {
    pub params: ParamPoint,
    pub k: u32,
    pub dim: f64,
    pub tau: f64,
    pub beta: f64,
    pub nu: f64,
}

impl ModeProblem {
    pub fn new(p: ParamPoint, k: u32) -> Result<Self> {
        let params = p.snapped();
        let d = derive(params)?;
        if d.region == Region::BelowFS {
            return Err(Error::InvalidParams(format!(
                "b = {} lies below b_fs = {}",
                p.b, d.b_fs
            )));
        }
        if k > 8 {
            return Err(Error::InvalidParams(format!("mode k = {k} exceeds 8")));
        }
        let beta = d.beta();
        let tk = d.tau * k as f64;
        Ok(ModeProblem {
            params,
            k,
            dim: d.k,
            tau: d.tau,
            beta,
            nu: (beta * beta + tk * tk).sqrt(),
        })
    }

    /// `P(t) = t^(K-1)`.
    pub fn p_weight(&self, t: f64) -> f64 {
        t.powf(self.dim - 1.0)
    }

    /// `Q(t) = tau^2 k^2 t^(K-3)`.
    pub fn q_weight(&self, t: f64) -> f64 {
        let tk = self.tau * self.k as f64;
        tk * tk * t.powf(self.dim - 3.0)
    }

    /// `W(t) = K(K-2) t^(K-1) / (1+t^2)^2`.
    pub fn w_weight(&self, t: f64) -> f64 {
        self.dim * (self.dim - 2.0) * t.powf(self.dim - 1.0) / (1.0 + t * t).powi(2)
    }

    /// Weight of the transformed quotient, `K(K-2)/(4 cosh^2 x)`.
    fn w_log(&self, x: f64) -> f64 {
        let c = x.cosh();
        self.dim * (self.dim - 2.0) / (4.0 * c * c)
    }

    /// Rayleigh quotient `(int P eta'^2 + Q eta^2) / int W eta^2` by quadrature.
    pub fn rayleigh_quotient(&self, model: &Model, eta: &RadialProfile) -> Result<f64> {
        let (num, den) = self.quadratic_forms(model, eta)?;
        Ok(num / den)
    }

    /// `(int P eta'^2 + Q eta^2, int W eta^2)`.
    pub fn quadratic_forms(&self, model: &Model, eta: &RadialProfile) -> Result<(f64, f64)> {
        let (p0, pinf) = eta.tails();
        let d0 = if p0 == 0.0 { 1.0 } else { p0 - 1.0 };
        let mut a0 = self.dim - 1.0 + 2.0 * d0;
        if self.k > 0 {
            a0 = a0.min(self.dim - 3.0 + 2.0 * p0);
        }
        let ainf = 2.0 * pinf + 2.0 - (self.dim - 1.0);
        let num = radial_integral_of(model, eta, TailSpec::new(a0, ainf)?, |t, v, d| {
            self.p_weight(t) * d * d + self.q_weight(t) * v * v
        })?;
        let tails = TailSpec::new(self.dim - 1.0 + 2.0 * p0, 2.0 * pinf + 5.0 - self.dim)?;
        let den = radial_integral_of(model, eta, tails, |t, v, _| self.w_weight(t) * v * v)?;
        Ok((num, den))
    }

    /// `int W eta_1 eta_2`.
    pub fn w_inner(&self, model: &Model, a: &RadialProfile, b: &RadialProfile) -> Result<f64> {
        let (pa, ia) = a.tails();
        let (pb, ib) = b.tails();
        let tails = TailSpec::new(self.dim - 1.0 + pa + pb, ia + ib + 5.0 - self.dim)?;
        let f = |t: f64| self.w_weight(t) * a.eval(t) * b.eval(t);
        crate::profiles::radial_integral(model, &[a, b], tails, f)
    }
}

fn radial_integral_of<F: Fn(f64, f64, f64) -> f64>(
    model: &Model,
    eta: &RadialProfile,
    tails: TailSpec,
    f: F,
) -> Result<f64> {
    crate::profiles::radial_integral(model, &[eta], tails, |t| {
        let (v, d, _) = eta.jet(t);
        f(t, v, d)
    })
}

/// Exact eigenvalue `n` (from 0) of mode `k`:
/// `4 (nu + n)(nu + n + 1) / (K (K-2))`.
///
/// The transformed weight is a `sech^2` well, whose bound states are known
/// in closed form.
pub fn closed_form_eigenvalue(p: ParamPoint, k: u32, n: u32) -> Result<f64> {
    let m = ModeProblem::new(p, k)?;
    let s = m.nu + n as f64;
    Ok(4.0 * s * (s + 1.0) / (m.dim * (m.dim - 2.0)))
}

/// Eigenpairs of one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    pub k: u32,
    pub eigenvalues: Vec<f64>,
    /// W-orthonormal, sign fixed positive near the origin.
    pub eigenfunctions: Vec<RadialProfile>,
    /// Last change of the extrapolated eigenvalues between grid halvings.
    pub disc_error: f64,
    /// Interior sign changes of each eigenfunction on its grid.
    pub zero_counts: Vec<usize>,
}

struct Pencil {
    diag: Vec<f64>,
    off: f64,
    w: Vec<f64>,
    x0: f64,
    h: f64,
}

impl Pencil {
    fn new(m: &ModeProblem, half_width: f64, n: usize) -> Self {
        let h = 2.0 * half_width / n as f64;
        let x0 = -half_width + h;
        let ih2 = 1.0 / (h * h);
        let nu2 = m.nu * m.nu;
        let w: Vec<f64> = (0..n - 1).map(|i| m.w_log(x0 + h * i as f64)).collect();
        Pencil {
            diag: vec![2.0 * ih2 + nu2; n - 1],
            off: -ih2,
            w,
            x0,
            h,
        }
    }

    /// Number of eigenvalues below `mu`.
    fn count_below(&self, mu: f64) -> usize {
        let e2 = self.off * self.off;
        let mut count = 0;
        let mut d = 1.0;
        for (i, (a, w)) in self.diag.iter().zip(&self.w).enumerate() {
            d = a - mu * w - if i == 0 { 0.0 } else { e2 / d };
            if d == 0.0 {
                d = -f64::MIN_POSITIVE;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn eigenvalue(&self, index: usize, lo_hint: f64) -> f64 {
        let mut lo = lo_hint.max(0.0);
        let mut hi = (2.0 * lo).max(1.0);
        while self.count_below(hi) <= index {
            hi *= 2.0;
        }
        while self.count_below(lo) > index {
            lo *= 0.5;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Inverse iteration at a converged eigenvalue; result normalized so that
    /// `h sum w g^2 = 1`.
    fn eigenvector(&self, mu: f64) -> Vec<f64> {
        let n = self.diag.len();
        let mut y: Vec<f64> = (0..n).map(|i| 1.0 + 0.25 * ((i as f64) * 0.7548776662).sin()).collect();
        for _ in 0..3 {
            let rhs: Vec<f64> = y.iter().zip(&self.w).map(|(a, b)| a * b).collect();
            let sub = vec![self.off; n - 1];
            let main: Vec<f64> = self.diag.iter().zip(&self.w).map(|(a, w)| a - mu * w).collect();
            y = solve_tridiagonal(&sub, &main, &sub, &rhs);
            let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            y.iter_mut().for_each(|v| *v /= scale);
        }
        self.normalize(&mut y);
        y
    }

    fn normalize(&self, g: &mut [f64]) {
        let norm: f64 = g.iter().zip(&self.w).map(|(v, w)| w * v * v).sum::<f64>() * self.h;
        let max_abs = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let lead = g.iter().find(|v| v.abs() > 1e-3 * max_abs).copied().unwrap_or(1.0);
        let s = lead.signum() / norm.sqrt();
        g.iter_mut().for_each(|v| *v *= s);
    }
}

/// Gaussian elimination with partial pivoting for a tridiagonal system.
fn solve_tridiagonal(sub: &[f64], main: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = main.len();
    let mut d = main.to_vec();
    let mut du = sup.to_vec();
    du.push(0.0);
    let mut du2 = vec![0.0; n];
    let mut dl = sub.to_vec();
    let mut b = rhs.to_vec();
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            let piv = if d[i] == 0.0 { f64::MIN_POSITIVE } else { d[i] };
            let l = dl[i] / piv;
            d[i] = piv;
            dl[i] = l;
            d[i + 1] -= l * du[i];
            b[i + 1] -= l * b[i];
        } else {
            let l = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = l;
            let tmp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = tmp - l * d[i + 1];
            if i + 1 < n - 1 {
                du2[i] = du[i + 1];
                du[i + 1] = -l * du[i + 1];
            }
            b.swap(i, i + 1);
            b[i + 1] -= l * b[i];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = f64::MIN_POSITIVE;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = b[n - 1] / d[n - 1];
    if n >= 2 {
        x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    x
}

fn count_sign_changes(g: &[f64]) -> usize {
    let max_abs = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut last = 0.0f64;
    let mut changes = 0;
    for &v in g {
        if v.abs() <= 1e-8 * max_abs {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            changes += 1;
        }
        last = v;
    }
    changes
}

/// Lowest `count` eigenpairs of mode `k`.
pub fn solve_mode(p: ParamPoint, k: u32, count: usize, grid: &GridConfig) -> Result<ModeSpectrum> {
    if count == 0 || count > 6 {
        return Err(Error::InvalidParams(format!("eigenvalue count {count} must be in 1..=6")));
    }
    let m = ModeProblem::new(p, k)?;
    let nu = m.nu;
    let dk = m.dim * (m.dim - 2.0) / 4.0;

    // Size the domain from a coarse solve: past the outermost turning point of
    // the highest requested eigenvalue, keep enough decay lengths for the
    // truncation error to sit far below the refinement tolerance, and make the
    // potential dominate the weight there.
    let coarse_half = 12.0 + 40.0 / nu;
    let coarse = Pencil::new(&m, coarse_half, ((2.0 * coarse_half) / 0.05).ceil() as usize);
    let mu_top = coarse.eigenvalue(count - 1, 0.0) * 1.05;
    let turning = ((mu_top * dk).sqrt() / nu).max(1.0).acosh();
    let ratio_edge = ((100.0 * mu_top * dk).sqrt() / nu).max(1.0).acosh();
    let half = (turning + grid.decay_lengths / nu).max(ratio_edge) + 1.0;

    let h0 = (0.25 / (nu + count as f64)).min(0.1);
    let n0 = ((2.0 * half / h0).ceil() as usize).max(16);

    let mut table: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut best_prev: Option<Vec<f64>> = None;
    let mut pencils: Vec<Pencil> = Vec::new();
    let mut raw: Vec<Vec<f64>> = Vec::new();
    let mut converged = None;
    for level in 0..=grid.max_levels {
        let pencil = Pencil::new(&m, half, n0 << level);
        let mut eig = Vec::with_capacity(count);
        let mut lo = 0.0;
        for j in 0..count {
            let v = pencil.eigenvalue(j, lo);
            eig.push(v);
            lo = v;
        }
        // Romberg table in h^2 for each eigenvalue.
        let rows: Vec<Vec<f64>> = eig
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let mut row = vec![v];
                if let Some(prev) = table.last() {
                    let prev_row: &Vec<f64> = &prev[j];
                    let mut f = 4.0;
                    for c in 0..prev_row.len().min(2) {
                        let r = (f * row[c] - prev_row[c]) / (f - 1.0);
                        row.push(r);
                        f *= 4.0;
                    }
                }
                row
            })
            .collect();
        let best: Vec<f64> = rows.iter().map(|r| *r.last().unwrap()).collect();
        table.push(rows);
        raw.push(eig);
        pencils.push(pencil);
        if pencils.len() > 2 {
            pencils.remove(0);
        }
        if let Some(prev) = &best_prev {
            let change = best
                .iter()
                .zip(prev)
                .map(|(a, b)| (a - b).abs() / a.abs())
                .fold(0.0f64, f64::max);
            if level >= 2 && change <= grid.rel_tol {
                converged = Some((best.clone(), change));
                break;
            }
        }
        best_prev = Some(best);
    }
    let (eigenvalues, disc_error) = converged.ok_or_else(|| {
        Error::NoConvergence(format!(
            "mode {k}: eigenvalues did not settle to {} within {} grid halvings",
            grid.rel_tol, grid.max_levels
        ))
    })?;

    // Eigenvectors on the two finest grids, extrapolated on the coarser one.
    let fine = &pencils[1];
    let coarse = &pencils[0];
    let lvl = raw.len() - 1;
    let mut eigenfunctions = Vec::with_capacity(count);
    let mut zero_counts = Vec::with_capacity(count);
    for j in 0..count {
        let gf = fine.eigenvector(raw[lvl][j]);
        let gc = coarse.eigenvector(raw[lvl - 1][j]);
        let mut g: Vec<f64> = gc
            .iter()
            .enumerate()
            .map(|(i, &c)| (4.0 * gf[2 * i + 1] - c) / 3.0)
            .collect();
        coarse.normalize(&mut g);
        zero_counts.push(count_sign_changes(&g));
        // Keep the Hermite spacing small against the eigenfunction width,
        // about 1/sqrt(nu) in x.
        let spacing = 0.01f64.min(0.02 / (nu + count as f64).sqrt());
        let stride = ((spacing / coarse.h).floor() as usize).max(1);
        let full = GridProfile::from_samples(coarse.x0, coarse.h, g, m.beta, nu - m.beta, nu + m.beta, k, eigenvalues[j]);
        let mut sub = GridProfile {
            x0: full.x0,
            h: full.h * stride as f64,
            g: full.g.iter().step_by(stride).copied().collect(),
            dg: full.dg.iter().step_by(stride).copied().collect(),
            ..full
        };
        // Normalize the interpolant itself rather than its samples.
        let norm: f64 = (0..sub.g.len() - 1)
            .map(|i| {
                let a = sub.x0 + sub.h * i as f64;
                gauss_legendre_8(|x| m.w_log(x) * sub.hermite(x).0.powi(2), a, a + sub.h)
            })
            .collect::<CompensatedSum>()
            .value();
        let s = 1.0 / norm.sqrt();
        sub.g.iter_mut().chain(sub.dg.iter_mut()).for_each(|v| *v *= s);
        eigenfunctions.push(RadialProfile::Grid(Arc::new(sub)));
    }
    Ok(ModeSpectrum {
        k,
        eigenvalues,
        eigenfunctions,
        disc_error,
        zero_counts,
    })
}

/// The low spectrum assembled across modes `k = 0..=3`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSummary {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu3_mode: u32,
    pub kernel_dim: usize,
    pub modes: Vec<ModeSpectrum>,
}

/// Relative tolerance for counting eigenvalues equal to `q - 1`.
pub const KERNEL_TOL: f64 = 1e-6;

fn multiplicity(k: u32) -> usize {
    if k == 0 {
        1
    } else {
        2
    }
}

pub fn full_spectrum(p: ParamPoint, grid: &GridConfig) -> Result<SpectrumSummary> {
    let p = p.snapped();
    let d = derive(p)?;
    let mut modes = Vec::new();
    for (k, count) in [(0u32, 3usize), (1, 2), (2, 1), (3, 1)] {
        modes.push(solve_mode(p, k, count, grid)?);
    }
    let mut all: Vec<(f64, u32)> = Vec::new();
    for mode in &modes {
        for &v in &mode.eigenvalues {
            for _ in 0..multiplicity(mode.k) {
                all.push((v, mode.k));
            }
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let target = d.q - 1.0;
    let kernel_dim = all
        .iter()
        .filter(|(v, _)| (v - target).abs() <= KERNEL_TOL * target)
        .count();
    Ok(SpectrumSummary {
        mu1: all[0].0,
        mu2: all[1].0,
        mu3: all[2].0,
        mu3_mode: all[2].1,
        kernel_dim,
        modes,
    })
}

/// Number of eigenvalues, with angular multiplicity, within `tol` (relative)
/// of `q - 1`.
pub fn kernel_dimension(p: ParamPoint, tol: f64, grid: &GridConfig) -> Result<usize> {
    let p = p.snapped();
    let d = derive(p)?;
    let target = d.q - 1.0;
    let mut dim = 0;
    for k in 0..=3u32 {
        let count = if k == 0 { 3 } else { 1 };
        let mode = solve_mode(p, k, count, grid)?;
        dim += mode
            .eigenvalues
            .iter()
            .filter(|v| (*v - target).abs() <= tol * target)
            .count()
            * multiplicity(k);
    }
    Ok(dim)
}

/// The eigenfunction of the third eigenvalue as a harmonic function
/// (cosine parity for `k >= 1`), W-normalized.
pub fn third_eigenfunction(model: &Model, grid: &GridConfig) -> Result<HarmonicFunction> {
    match model.region() {
        Region::StrictInterior | Region::AtOrAboveFSStar => {}
        _ => {
            return Err(Error::InvalidParams(
                "the third eigenvalue is isolated only for b > b_fs".into(),
            ))
        }
    }
    let summary = full_spectrum(model.point(), grid)?;
    let mode = summary
        .modes
        .iter()
        .find(|m| m.k == summary.mu3_mode)
        .expect("mode present");
    let index = if mode.k == 0 { 2 } else { 0 };
    let profile = mode.eigenfunctions[index].clone();
    HarmonicFunction::new(model, vec![HarmonicTerm::new(mode.k, Parity::Cos, profile)])
}

/// `int W eta^2` for a profile of mode `k`.
pub fn w_norm_sq(model: &Model, k: u32, eta: &RadialProfile) -> Result<f64> {
    let m = ModeProblem::new(model.point(), k)?;
    let (p0, pinf) = eta.tails();
    let tails = TailSpec::new(m.dim - 1.0 + 2.0 * p0, 2.0 * pinf + 5.0 - m.dim)?;
    radial_integral_of(model, eta, tails, |t, v, _| m.w_weight(t) * v * v)
}
