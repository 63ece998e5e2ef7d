//! The function universe: bubbles, kernel elements, finite harmonic
//! expansions and their weighted norms, all in the Emden–Fowler variable
//! `t` with `r = t^tau`.

mod harmonic;
mod norms;
mod radial;

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

pub use harmonic::{HarmonicFunction, HarmonicTerm, Parity};
pub use norms::{
    grad_inner, grad_norm_sq, norm_report, overlap_d, pde_residual, radial_integral, star_norm, weighted_l2_sq,
    NormReport,
};
pub use radial::{BubbleFamily, GridProfile, RadialProfile};

use crate::error::{Error, Result};
use crate::numerics::{integrate_halfline, QuadConfig, TailSpec};
use crate::params::{derive, DerivedParams, ParamPoint, Region};

/// Parameters together with the constants every norm computation needs.
///
/// Points inside the on-curve band are moved exactly onto the
/// symmetry-breaking curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    point: ParamPoint,
    derived: DerivedParams,
    c_norm: f64,
    quad: QuadConfig,
    angular_tol: f64,
}

/// `ln(Gamma(K/2)^2 / Gamma(K))`.
fn ln_beta_half(k: f64) -> f64 {
    2.0 * ln_gamma(0.5 * k) - ln_gamma(k)
}

impl Model {
    pub fn new(p: ParamPoint) -> Result<Self> {
        let point = p.snapped();
        let derived = derive(point)?;
        Self::with_derived(point, derived)
    }

    /// Builds a model from externally supplied constants, used as given.
    /// Intended for fault injection; [`Model::new`] is the normal entry.
    pub fn with_derived(point: ParamPoint, derived: DerivedParams) -> Result<Self> {
        point.validate()?;
        let DerivedParams { q, k, tau, c_ab, .. } = derived;
        if !c_ab.is_normal() || c_ab < 0.0 {
            return Err(Error::InvalidParams(format!(
                "extremal amplitude C_ab = {c_ab:e} is not representable at K = {k}"
            )));
        }
        let c_norm = (-(PI * tau).ln() / q - ln_beta_half(k) / q).exp();
        let model = Model {
            point,
            derived,
            c_norm,
            quad: QuadConfig::precise(),
            angular_tol: 1e-12,
        };
        let check = 2.0
            * PI
            * tau
            * c_norm.powf(q)
            * integrate_halfline(
                |t| t.powf(k - 1.0) * (1.0 + t * t).powf(-k),
                TailSpec::new(k - 1.0, k + 1.0)?,
                &QuadConfig::default(),
            )?;
        if (check - 1.0).abs() > 1e-8 {
            return Err(Error::NoConvergence(format!(
                "normalization constant check failed: quadrature gives {check}"
            )));
        }
        Ok(model)
    }

    pub fn with_quad(mut self, quad: QuadConfig) -> Self {
        self.quad = quad;
        self
    }

    pub fn with_angular_tol(mut self, tol: f64) -> Self {
        self.angular_tol = tol;
        self
    }

    pub fn point(&self) -> ParamPoint {
        self.point
    }

    pub fn derived(&self) -> &DerivedParams {
        &self.derived
    }

    pub fn quad(&self) -> &QuadConfig {
        &self.quad
    }

    pub fn angular_tol(&self) -> f64 {
        self.angular_tol
    }

    pub fn q(&self) -> f64 {
        self.derived.q
    }

    pub fn dim(&self) -> f64 {
        self.derived.k
    }

    pub fn tau(&self) -> f64 {
        self.derived.tau
    }

    pub fn beta(&self) -> f64 {
        self.derived.beta()
    }

    pub fn region(&self) -> Region {
        self.derived.region
    }

    /// Amplitude `c_ab` of the normalized bubble.
    pub fn c_norm(&self) -> f64 {
        self.c_norm
    }

    /// `zeta = lambda^(1/tau)`: the `t`-space dilation matching the physical
    /// scaling `u(x) -> lambda^-a u(lambda x)`.
    pub fn zeta(&self, lambda: f64) -> f64 {
        lambda.powf(1.0 / self.tau())
    }

    /// Closed form of the squared gradient norm of the extremal.
    pub fn extremal_energy(&self) -> f64 {
        let DerivedParams { k, tau, .. } = self.derived;
        (PI.ln() + (1.0 - k) * tau.ln() + 0.5 * k * (k * (k - 2.0)).ln() + ln_beta_half(k)).exp()
    }

    /// The sharp constant `S_ab = ||U||^(2 - 4/q)`, defined where the radial
    /// bubble is the extremal.
    pub fn best_constant(&self) -> Result<f64> {
        if !self.derived.region.is_symmetric() {
            return Err(Error::InvalidParams(format!(
                "b = {} lies below b_fs = {}; the radial bubble is not extremal",
                self.point.b, self.derived.b_fs
            )));
        }
        Ok(self.extremal_energy().powf(2.0 / self.dim()))
    }

    /// The extremal `U_lambda`.
    pub fn bubble_u(&self, lambda: f64) -> Result<RadialProfile> {
        check_scale(lambda)?;
        Ok(RadialProfile::Bubble {
            family: BubbleFamily::U,
            amp: self.derived.c_ab,
            beta: self.beta(),
            zeta: self.zeta(lambda),
        })
    }

    /// The unit-norm bubble `B_lambda`.
    pub fn normalized_bubble(&self, lambda: f64) -> Result<RadialProfile> {
        check_scale(lambda)?;
        Ok(RadialProfile::Bubble {
            family: BubbleFamily::B,
            amp: self.c_norm,
            beta: self.beta(),
            zeta: self.zeta(lambda),
        })
    }

    pub fn bubble_v(&self) -> RadialProfile {
        RadialProfile::bubble_v(self.dim())
    }

    pub fn kernel_eta0(&self) -> RadialProfile {
        RadialProfile::KernelEta0 { dim: self.dim() }
    }

    pub fn kernel_vprime(&self) -> RadialProfile {
        RadialProfile::KernelVprime { dim: self.dim() }
    }

    /// Radial kernel `Z0` alone when `b > b_fs`; `Z0` and the two first-mode
    /// elements on the curve.
    pub fn kernel_elements(&self) -> Result<Vec<HarmonicFunction>> {
        let z0 = HarmonicFunction::radial(self, self.kernel_eta0());
        match self.region() {
            Region::BelowFS => Err(Error::InvalidParams(format!(
                "b = {} lies below b_fs = {}",
                self.point.b, self.derived.b_fs
            ))),
            Region::OnFS => Ok(vec![
                z0,
                HarmonicFunction::new(self, vec![HarmonicTerm::new(1, Parity::Cos, self.kernel_vprime())])?,
                HarmonicFunction::new(self, vec![HarmonicTerm::new(1, Parity::Sin, self.kernel_vprime())])?,
            ]),
            _ => Ok(vec![z0]),
        }
    }

    /// `V^(q-2) = K(K-2)/(1+t^2)^2`, the linearization weight.
    pub fn potential(&self, t: f64) -> f64 {
        let k = self.dim();
        k * (k - 2.0) / (1.0 + t * t).powi(2)
    }
}

fn check_scale(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("scale {lambda} must be positive")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_constants() {
        let m = Model::new(ParamPoint::new(-1.0, -0.25).unwrap()).unwrap();
        assert!((m.extremal_energy() - 54.468).abs() < 1e-3);
        assert!((m.best_constant().unwrap() - 2.7166).abs() < 1e-4);
        assert!((m.c_norm() - 2.750720).abs() < 1e-6);
        let u = m.bubble_u(1.0).unwrap();
        // U at r = t = 1.
        assert!((u.eval(1.0) - 1.539601).abs() < 1e-6);
        assert!((u.eval(0.0) - m.derived().c_ab).abs() < 1e-12);
    }

    #[test]
    fn extremal_in_t_is_rescaled_v() {
        let m = Model::new(ParamPoint::new(-1.3, -0.5).unwrap()).unwrap();
        let u = m.bubble_u(1.0).unwrap();
        let v = m.bubble_v();
        let f = m.tau().powf(-m.beta());
        for t in [0.01, 0.5, 2.0, 9.0] {
            assert!((u.eval(t) / (f * v.eval(t)) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn best_constant_region_gate() {
        let m = Model::new(ParamPoint::new(-1.0, -0.5).unwrap()).unwrap();
        assert!(matches!(m.best_constant(), Err(Error::InvalidParams(_))));
        assert!(m.kernel_elements().is_err());
    }

    #[test]
    fn kernel_counts() {
        let m = Model::new(ParamPoint::new(-1.0, -0.25).unwrap()).unwrap();
        assert_eq!(m.kernel_elements().unwrap().len(), 1);
        let m = Model::new(ParamPoint::new(-1.0, -0.2928932).unwrap()).unwrap();
        assert_eq!(m.kernel_elements().unwrap().len(), 3);
    }

    #[test]
    fn tangent_direction_is_radial_kernel() {
        let m = Model::new(ParamPoint::new(-1.0, -0.25).unwrap()).unwrap();
        let u = m.bubble_u(1.0).unwrap();
        let eta0 = m.kernel_eta0();
        let beta = m.beta();
        // -aU + x.grad U in t coordinates: (beta U + t U')/tau.
        let ratio = |t: f64| {
            let (v, d, _) = u.jet(t);
            (beta * v + t * d) / m.tau() / eta0.eval(t)
        };
        let r0 = ratio(0.37);
        for t in [0.01, 0.2, 0.8, 1.3, 3.0, 20.0] {
            assert!((ratio(t) / r0 - 1.0).abs() < 1e-9);
        }
    }
}
