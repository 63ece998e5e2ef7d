//! Closed-form parameter algebra: derived exponents, the symmetry-breaking
//! curves, the closed-form third eigenvalue and the scalar thresholds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::find_root;

/// Half-width of the band around the symmetry-breaking curve that is
/// classified as lying on it.
///
/// Sized to the six-decimal precision at which curve points are usually
/// quoted, so that e.g. `b = -0.292893` is recognised at `a = -1`.
pub const ON_CURVE_TOL: f64 = 5e-7;

/// The exponent pair `(a, b)` with `a < 0` and `a < b < a + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub a: f64,
    pub b: f64,
}

impl ParamPoint {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let p = ParamPoint { a, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ParamPoint { a, b } = *self;
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite (a, b) = ({a}, {b})")));
        }
        if a >= 0.0 {
            return Err(Error::InvalidParams(format!("a = {a} must be negative")));
        }
        if !(b > a && b < a + 1.0) {
            return Err(Error::InvalidParams(format!(
                "b = {b} must lie in (a, a+1) = ({a}, {})",
                a + 1.0
            )));
        }
        Ok(())
    }

    /// Replaces `b` by the exact curve value when the point is classified as
    /// lying on the symmetry-breaking curve.
    pub fn snapped(&self) -> ParamPoint {
        let b_fs = self.a - self.a / (self.a * self.a + 1.0).sqrt();
        if (self.b - b_fs).abs() <= ON_CURVE_TOL {
            ParamPoint { a: self.a, b: b_fs }
        } else {
            *self
        }
    }
}

/// Position of `b` relative to the two curves `b_fs(a) < b_fs_star(a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    BelowFS,
    OnFS,
    StrictInterior,
    AtOrAboveFSStar,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::BelowFS => "BelowFS",
            Region::OnFS => "OnFS",
            Region::StrictInterior => "StrictInterior",
            Region::AtOrAboveFSStar => "AtOrAboveFSStar",
        }
    }

    /// True where the radial bubble is the extremal (`b >= b_fs`).
    pub fn is_symmetric(&self) -> bool {
        !matches!(self, Region::BelowFS)
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Quantities derived from a [`ParamPoint`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub q: f64,
    pub k: f64,
    pub tau: f64,
    /// Underflows to 0 (or overflows) once `K` reaches the hundreds, which
    /// happens only for `a` near 0 and `b` near `a + 1`.
    pub c_ab: f64,
    pub b_fs: f64,
    pub b_fs_star: f64,
    pub region: Region,
}

impl DerivedParams {
    /// Decay exponent `(K-2)/2` of the bubble in the `t` variable.
    pub fn beta(&self) -> f64 {
        0.5 * (self.k - 2.0)
    }
}

pub fn derive(p: ParamPoint) -> Result<DerivedParams> {
    p.validate()?;
    let ParamPoint { a, b } = p;
    let q = 2.0 / (b - a);
    let k = 2.0 / (1.0 + a - b);
    let tau = (a - b) / (a * (1.0 + a - b));
    let c_ab = (k * (k - 2.0) / (tau * tau)).powf((k - 2.0) / 4.0);
    let b_fs = felli_schneider(a)?;
    let b_fs_star = felli_schneider_star(a)?;
    let region = if (b - b_fs).abs() <= ON_CURVE_TOL {
        Region::OnFS
    } else if b < b_fs {
        Region::BelowFS
    } else if b < b_fs_star {
        Region::StrictInterior
    } else {
        Region::AtOrAboveFSStar
    };
    Ok(DerivedParams {
        q,
        k,
        tau,
        c_ab,
        b_fs,
        b_fs_star,
        region,
    })
}

fn check_a(a: f64) -> Result<()> {
    if a < 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("a = {a} must be negative")))
    }
}

/// The symmetry-breaking curve `a - a/sqrt(a^2+1)`.
pub fn felli_schneider(a: f64) -> Result<f64> {
    check_a(a)?;
    Ok(a - a / (a * a + 1.0).sqrt())
}

/// The curve `-2a/(-a + sqrt(a^2+1)) + a` above which the third eigenvalue
/// is attained by the radial mode.
pub fn felli_schneider_star(a: f64) -> Result<f64> {
    check_a(a)?;
    Ok(-2.0 * a / (-a + (a * a + 1.0).sqrt()) + a)
}

/// The increasing branch `f_a(b)` whose value is `1 - (q-1)/mu3` while the
/// third eigenvalue comes from the first angular mode.
pub fn f_curve(a: f64, b: f64) -> Result<f64> {
    ParamPoint::new(a, b)?;
    let s = (a * a + 1.0).sqrt();
    let t = b - a;
    Ok(1.0 + a * a / s * (t - 2.0) / ((s + a) * t * t - a * t))
}

/// `f_a(b)` written through `q` and `K` as `1 - (q-1)/mu` with the exact
/// lowest first-mode eigenvalue `mu`; algebraically equal to [`f_curve`].
pub fn f_curve_spectral_form(a: f64, b: f64) -> Result<f64> {
    let d = derive(ParamPoint::new(a, b)?)?;
    Ok(1.0 - (d.q - 1.0) / first_mode_closed(&d))
}

/// `h_a(b) = 2 - 2^(b-a)`.
pub fn h_curve(a: f64, b: f64) -> Result<f64> {
    ParamPoint::new(a, b)?;
    Ok(2.0 - 2f64.powf(b - a))
}

/// Lowest eigenvalue of the first angular mode, valid for all admissible `b`.
pub(crate) fn first_mode_closed(d: &DerivedParams) -> f64 {
    let beta = d.beta();
    let nu = (beta * beta + d.tau * d.tau).sqrt();
    4.0 * nu * (nu + 1.0) / (d.k * (d.k - 2.0))
}

/// Closed-form third eigenvalue of the linearized problem (`b > b_fs`).
pub fn mu3_closed(p: ParamPoint) -> Result<f64> {
    let d = derive(p)?;
    match d.region {
        Region::BelowFS | Region::OnFS => Err(Error::InvalidParams(format!(
            "closed-form third eigenvalue needs b > b_fs = {}",
            d.b_fs
        ))),
        Region::StrictInterior => Ok((d.q - 1.0) / (1.0 - f_curve(p.a, p.b)?)),
        Region::AtOrAboveFSStar => Ok((d.q - 1.0) * (d.k + 4.0) / d.k),
    }
}

/// Spectral upper bound `1 - (q-1)/mu3` for the stability constant.
pub fn stability_upper_bound(p: ParamPoint) -> Result<f64> {
    let d = derive(p)?;
    Ok(1.0 - (d.q - 1.0) / mu3_closed(p)?)
}

/// Two-bubble upper bound `2 - 2^(2/q)`.
pub fn two_bubble_bound(p: ParamPoint) -> Result<f64> {
    let d = derive(p)?;
    Ok(2.0 - 2f64.powf(2.0 / d.q))
}

/// Offset from the curves used to bracket the crossing of `f_a` and `h_a`.
const BRACKET_INSET: f64 = 1e-8;
const ROOT_TOL: f64 = 1e-13;

/// The unique crossing of `f_a` (increasing) and `h_a` (decreasing) inside
/// `(b_fs, b_fs_star)`.
///
/// Returns `NoRoot` when `f_a < h_a` at `b_fs_star`, i.e. the crossing lies
/// beyond the bracket.
pub fn solve_b_star(a: f64) -> Result<f64> {
    let lo = felli_schneider(a)? + BRACKET_INSET;
    let hi = felli_schneider_star(a)? - BRACKET_INSET;
    let g = |b: f64| f_curve(a, b).unwrap_or(f64::NAN) - h_curve(a, b).unwrap_or(f64::NAN);
    if g(felli_schneider_star(a)?) < 0.0 {
        return Err(Error::NoRoot(format!(
            "f_a < h_a at b_fs_star({a}); no crossing inside (b_fs, b_fs_star)"
        )));
    }
    if g(hi) < 0.0 {
        // Crossing within the inset next to b_fs_star.
        return find_root(g, hi, felli_schneider_star(a)?, ROOT_TOL);
    }
    find_root(g, lo, hi, ROOT_TOL)
}

/// The crossing of `f_a` and `h_a` on `(b_fs, a+1)`, with no restriction to
/// `b < b_fs_star`.
pub fn solve_b_star_extended(a: f64) -> Result<f64> {
    let lo = felli_schneider(a)? + BRACKET_INSET;
    let hi = a + 1.0 - BRACKET_INSET;
    let g = |b: f64| f_curve(a, b).unwrap_or(f64::NAN) - h_curve(a, b).unwrap_or(f64::NAN);
    find_root(g, lo, hi, ROOT_TOL)
}

/// The `a` values of the reference table of selection regions, including the
/// row at the threshold `a*` as printed to six decimals.
pub const TABLE_A_VALUES: [f64; 11] = [-0.5, -0.6, -0.641867, -0.7, -0.8, -1.0, -2.0, -3.0, -4.0, -5.0, -10.0];

/// One row of the selection-region table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub a: f64,
    pub b_fs: f64,
    pub b_fs_star: f64,
    /// Crossing of `f_a` and `h_a` on `(b_fs, a+1)`.
    pub b_star: f64,
    /// `[b_star, b_fs_star)` when the crossing lies below `b_fs_star`.
    pub selection: Option<(f64, f64)>,
}

pub fn table_row(a: f64) -> Result<TableRow> {
    let b_fs = felli_schneider(a)?;
    let b_fs_star = felli_schneider_star(a)?;
    let (b_star, selection) = match solve_b_star(a) {
        Ok(b) => (b, Some((b, b_fs_star))),
        Err(Error::NoRoot(_)) => (solve_b_star_extended(a)?, None),
        Err(e) => return Err(e),
    };
    Ok(TableRow {
        a,
        b_fs,
        b_fs_star,
        b_star,
        selection,
    })
}

/// The two scalar thresholds: the dimension `K*` where the spectral and
/// two-bubble bounds cross in the upper regime, and the matching `a*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub k_star: f64,
    pub a_star: f64,
}

pub fn threshold_gap(k: f64) -> f64 {
    2.0 - 2f64.powf((k - 2.0) / k) - 4.0 / (k + 4.0)
}

pub fn solve_thresholds() -> ThresholdSet {
    let k_star = find_root(threshold_gap, 3.0, 10.0, 1e-15)
        .expect("threshold equation changes sign on [3, 10]");
    let a_star = -(k_star - 2.0) * (2.0 * k_star).sqrt() / (4.0 * k_star);
    ThresholdSet { k_star, a_star }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn derive_reference_point() {
        let d = derive(ParamPoint::new(-1.0, -0.25).unwrap()).unwrap();
        assert_relative_eq!(d.q, 8.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(d.k, 8.0, max_relative = 1e-14);
        assert_relative_eq!(d.tau, 3.0, max_relative = 1e-14);
        assert_relative_eq!(d.c_ab, (16.0f64 / 3.0).powf(1.5), max_relative = 1e-13);
        assert!((d.c_ab - 12.316805).abs() < 1e-6);
        assert_eq!(d.region, Region::StrictInterior);
    }

    #[test]
    fn derive_on_curve() {
        let d = derive(ParamPoint::new(-1.0, -0.2928932).unwrap()).unwrap();
        assert_eq!(d.region, Region::OnFS);
        assert!((d.q - 2f64.sqrt() * 2.0).abs() < 1e-6);
        assert!((d.tau * d.tau - (d.k - 1.0)).abs() < 1e-6);
    }

    #[test]
    fn derive_rejects_bad_points() {
        assert!(matches!(ParamPoint::new(-1.0, -1.5), Err(Error::InvalidParams(_))));
        assert!(matches!(ParamPoint::new(0.5, 0.7), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn curve_values() {
        assert!((felli_schneider(-1.0).unwrap() + 0.292893).abs() < 1e-6);
        assert!((felli_schneider(-0.5).unwrap() + 0.052786).abs() < 1e-6);
        assert!((felli_schneider(-10.0).unwrap() + 9.004962).abs() < 1e-6);
        assert!((felli_schneider_star(-1.0).unwrap() - (2.0 * 2f64.sqrt() - 3.0)).abs() < 1e-15);
        assert!((felli_schneider_star(-0.8).unwrap() + 0.031000).abs() < 1e-6);
        assert!((felli_schneider_star(-2.0).unwrap() + 1.055728).abs() < 1e-6);
        assert!(felli_schneider(0.0).is_err());
    }

    #[test]
    fn f_and_h_values() {
        let bfs = felli_schneider(-1.0).unwrap();
        assert!(f_curve(-1.0, bfs).unwrap().abs() < 1e-14);
        assert!((f_curve(-1.0, -0.25).unwrap() - 0.100826).abs() < 1e-6);
        let k = 6.0 + 4.0 * 2f64.sqrt();
        let top = felli_schneider_star(-1.0).unwrap();
        assert!((f_curve(-1.0, top).unwrap() - 4.0 / (k + 4.0)).abs() < 1e-13);
        let oracle = 2.0 - (0.818072 * std::f64::consts::LN_2).exp();
        assert!((h_curve(-1.0, -0.181928).unwrap() - oracle).abs() < 1e-14);
        assert!((h_curve(-1.0, -0.181928).unwrap() - 0.2369517).abs() < 1e-7);
        assert!((h_curve(-1.0, -1.0 + 1e-12).unwrap() - 1.0).abs() < 1e-11);
        assert!(f_curve(-1.0, 0.5).is_err());
    }

    #[test]
    fn third_eigenvalue_closed_forms() {
        let p = ParamPoint::new(-1.0, -0.25).unwrap();
        assert!((mu3_closed(p).unwrap() - 1.85355).abs() < 1e-5);
        assert!((stability_upper_bound(p).unwrap() - 0.100826).abs() < 1e-6);
        let p = ParamPoint::new(-1.0, -0.1).unwrap();
        assert!((mu3_closed(p).unwrap() - 22.0 / 15.0).abs() < 1e-12);
        assert!((stability_upper_bound(p).unwrap() - 1.0 / 6.0).abs() < 1e-12);
        let near = ParamPoint::new(-1.0, felli_schneider(-1.0).unwrap() + 1e-5).unwrap();
        let d = derive(near).unwrap();
        assert!((mu3_closed(near).unwrap() - (d.q - 1.0)).abs() < 1e-4);
        assert!(mu3_closed(ParamPoint::new(-1.0, -0.5).unwrap()).is_err());
    }

    #[test]
    fn crossing_points() {
        assert!((solve_b_star(-1.0).unwrap() + 0.181928).abs() < 1e-5);
        assert!((solve_b_star(-0.7).unwrap() - 0.025795).abs() < 1e-5);
        assert!(matches!(solve_b_star(-0.5), Err(Error::NoRoot(_))));
        assert!((solve_b_star_extended(-0.6).unwrap() - 0.082212).abs() < 1e-5);
    }

    #[test]
    fn thresholds() {
        let t = solve_thresholds();
        assert!((t.k_star - 6.698818).abs() < 1e-5);
        assert!((t.a_star + 0.641866).abs() < 1e-5);
        assert!(threshold_gap(t.k_star).abs() < 1e-10);
        assert!(threshold_gap(4.0) > 0.0);
        assert!(threshold_gap(10.0) < 0.0);
    }
}
