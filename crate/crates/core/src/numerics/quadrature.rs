use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::CompensatedSum;
use crate::error::{Error, Result};

/// Declared power-law behaviour of an integrand: `~ t^alpha0` as `t -> 0` and
/// `~ t^-alpha_inf` as `t -> inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSpec {
    pub alpha0: f64,
    pub alpha_inf: f64,
}

impl TailSpec {
    pub fn new(alpha0: f64, alpha_inf: f64) -> Result<Self> {
        let spec = TailSpec { alpha0, alpha_inf };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha0 > -1.0 && self.alpha_inf > 1.0 {
            Ok(())
        } else {
            Err(Error::BadTails(format!(
                "exponents ({}, {}) are not integrable",
                self.alpha0, self.alpha_inf
            )))
        }
    }
}

/// Tolerances for the adaptive rules. `max_refinements` bounds the bisection
/// depth of any single subinterval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_refinements: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_refinements: 30,
        }
    }
}

impl QuadConfig {
    /// Near machine precision; needed when differences of norms are reported.
    pub fn precise() -> Self {
        QuadConfig {
            rel_tol: 1e-14,
            abs_tol: 1e-300,
            max_refinements: 40,
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

const MAX_INTERVALS: usize = 20_000;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_838_300,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_804_939_476_142_360,
    0.525_532_409_916_328_985_817_739_049_189,
    0.796_666_477_413_626_739_591_553_936_476,
    0.960_289_856_497_536_231_683_560_868_569,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_361_982_965_150_449_277,
    0.313_706_645_877_887_287_337_962_201_987,
    0.222_381_034_453_374_470_544_355_994_426,
    0.101_228_536_290_376_259_152_531_354_310,
];

/// Fixed 8-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre_8<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for i in 0..4 {
        s += GL8_W[i] * (f(c - h * GL8_X[i]) + f(c + h * GL8_X[i]));
    }
    s * h
}

/// Depth from which a non-improving split is classed as roundoff.
const STALL_DEPTH: u32 = 10;

/// Error below this multiple of `int |f|` is at floating-point roundoff.
const ROUNDOFF_FLOOR: f64 = 4.0 * f64::EPSILON;

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    /// `int |f|` over the segment.
    resabs: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, depth: u32) -> Result<Segment> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut resabs = WGK[10] * fc.abs();
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        if !(f1.is_finite() && f2.is_finite()) {
            return Err(Error::NoConvergence(format!(
                "non-finite integrand near {}",
                if f1.is_finite() { c + dx } else { c - dx }
            )));
        }
        kron += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !fc.is_finite() {
        return Err(Error::NoConvergence(format!("non-finite integrand near {c}")));
    }
    let value = kron * h;
    let mut err = ((kron - gauss) * h).abs();
    if err <= 50.0 * f64::EPSILON * resabs * h.abs() {
        err = 0.0;
    }
    Ok(Segment {
        a,
        b,
        value,
        err,
        resabs: resabs * h.abs(),
        depth,
    })
}

/// Globally adaptive Gauss–Kronrod (10/21) quadrature on a finite interval.
pub fn integrate_interval<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let first = gk21(&mut f, a, b, 0)?;
    let mut total_val = first.value;
    let mut total_err = first.err;
    let mut total_abs = first.resabs;
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Segment> = Vec::new();
    heap.push(first);
    let mut count = 1usize;
    loop {
        // Under cancellation the attainable accuracy is set by int |f|.
        let tol = cfg
            .abs_tol
            .max(cfg.rel_tol * total_val.abs())
            .max(ROUNDOFF_FLOOR * total_abs);
        if total_err <= tol {
            break;
        }
        let Some(seg) = heap.pop() else {
            return Err(Error::NoConvergence(format!(
                "refinement depth exhausted on [{a}, {b}]: error {total_err:e} > {tol:e}"
            )));
        };
        if seg.err == 0.0 {
            // Everything left is at roundoff level.
            heap.push(seg);
            break;
        }
        if seg.depth >= cfg.max_refinements {
            frozen.push(seg);
            continue;
        }
        let m = 0.5 * (seg.a + seg.b);
        let mut left = gk21(&mut f, seg.a, m, seg.depth + 1)?;
        let mut right = gk21(&mut f, m, seg.b, seg.depth + 1)?;
        if seg.depth >= STALL_DEPTH && left.err + right.err >= 0.99 * seg.err {
            // Halving a deep segment did not reduce its error: the estimate
            // is integrand roundoff, not truncation.
            left.err = 0.0;
            right.err = 0.0;
        }
        total_val += left.value + right.value - seg.value;
        total_err += left.err + right.err - seg.err;
        total_abs += left.resabs + right.resabs - seg.resabs;
        heap.push(left);
        heap.push(right);
        count += 1;
        if count > MAX_INTERVALS {
            return Err(Error::NoConvergence(format!(
                "interval budget exhausted on [{a}, {b}]"
            )));
        }
    }
    let sum: CompensatedSum = heap
        .iter()
        .chain(frozen.iter())
        .map(|s| s.value)
        .collect();
    Ok(sum.value())
}

/// Probes the integrand near the ends against the declared exponents.
fn check_tails<F: FnMut(f64) -> f64>(
    f: &mut F,
    tails: &TailSpec,
    lo_scale: f64,
    hi_scale: f64,
    cfg: &QuadConfig,
) -> Result<()> {
    check_tails_ends(f, tails, lo_scale, hi_scale, true, true, cfg)
}

fn check_tails_ends<F: FnMut(f64) -> f64>(
    f: &mut F,
    tails: &TailSpec,
    lo_scale: f64,
    hi_scale: f64,
    at_zero: bool,
    at_inf: bool,
    cfg: &QuadConfig,
) -> Result<()> {
    let negligible = |t: f64, v: f64| (v * t).abs() <= cfg.abs_tol.max(1e-290);
    let ratio_ok = |f: &mut F, t_ref: f64, t_probe: f64, alpha: f64, label: &str| -> Result<()> {
        let probe = f(t_probe).abs();
        if negligible(t_probe, probe) {
            return Ok(());
        }
        let mut reference: f64 = 0.0;
        for c in [0.5, 1.0, 2.0] {
            let tr = t_ref * c;
            reference = reference.max(f(tr).abs() * (t_probe / tr).powf(alpha));
        }
        if probe > 100.0 * reference {
            Err(Error::BadTails(format!(
                "{label}: |f({t_probe:e})| = {probe:e} exceeds the declared power law"
            )))
        } else {
            Ok(())
        }
    };
    if at_zero {
        ratio_ok(f, lo_scale * 1e-3, lo_scale * 1e-6, tails.alpha0, "t -> 0")?;
    }
    if at_inf {
        ratio_ok(f, hi_scale * 1e3, hi_scale * 1e6, -tails.alpha_inf, "t -> inf")?;
    }
    Ok(())
}

fn smoothstep(v: f64) -> f64 {
    v * v * (3.0 - 2.0 * v)
}

fn smoothstep_prime(v: f64) -> f64 {
    6.0 * v * (1.0 - v)
}

/// Integrates `f` over `(0, inf)`.
///
/// The half-line is compactified by `s = t^2/(1+t^2)` and `s` is further
/// graded by a cubic smoothstep so that power-law endpoint behaviour becomes
/// mild algebraic behaviour at the ends of `(0, 1)`.
pub fn integrate_halfline<F: FnMut(f64) -> f64>(
    mut f: F,
    tails: TailSpec,
    cfg: &QuadConfig,
) -> Result<f64> {
    tails.validate()?;
    check_tails(&mut f, &tails, 1.0, 1.0, cfg)?;
    let g = |u: f64| {
        // t = sqrt(s/(1-s)) with 1-s = (1-u)^2 (1+2u), written to avoid cancellation.
        let one_m = 1.0 - u;
        let t = u * (3.0 - 2.0 * u).sqrt() / (one_m * (1.0 + 2.0 * u).sqrt());
        let jac = 3.0 / ((3.0 - 2.0 * u).sqrt() * one_m * one_m * (1.0 + 2.0 * u).powf(1.5));
        let v = f(t);
        if v == 0.0 {
            0.0
        } else {
            v * jac
        }
    };
    integrate_interval(g, 0.0, 1.0, cfg)
}

/// Integrates `f` over `(0, inf)` split at the given positive break points.
///
/// Intended for integrands with several well-separated scales.
pub fn integrate_halfline_split<F: FnMut(f64) -> f64>(
    f: F,
    tails: TailSpec,
    splits: &[f64],
    cfg: &QuadConfig,
) -> Result<f64> {
    integrate_range(f, 0.0, f64::INFINITY, tails, splits, cfg)
}

/// Integrates `f` over `[lo, hi]` where `lo` may be 0 and `hi` may be
/// infinite, split at the break points that fall inside.
///
/// Between break points the rule works in `ln t` when the ratio is large;
/// unbounded or singular ends use graded maps onto `(0, 1)`. The declared
/// tails are checked only at the ends that reach 0 or infinity.
pub fn integrate_range<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tails: TailSpec,
    splits: &[f64],
    cfg: &QuadConfig,
) -> Result<f64> {
    tails.validate()?;
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::NoConvergence(format!("empty range [{lo}, {hi}]")));
    }
    let mut pts: Vec<f64> = splits
        .iter()
        .cloned()
        .filter(|s| s.is_finite() && *s > lo && *s < hi)
        .collect();
    if lo > 0.0 {
        pts.push(lo);
    }
    if hi.is_finite() {
        pts.push(hi);
    }
    if pts.is_empty() {
        pts.push(1.0);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x / *y - 1.0).abs() < 1e-12);
    let first = pts[0];
    let last = *pts.last().unwrap();
    if lo == 0.0 || hi.is_infinite() {
        check_tails_ends(&mut f, &tails, first, last, lo == 0.0, hi.is_infinite(), cfg)?;
    }

    let pieces = pts.len() + 1;
    let piece_cfg = QuadConfig {
        abs_tol: cfg.abs_tol / pieces as f64,
        ..*cfg
    };
    let mut total = CompensatedSum::new();
    if lo == 0.0 {
        total.add(integrate_interval(
            |v| {
                let x = f(first * smoothstep(v));
                if x == 0.0 {
                    0.0
                } else {
                    x * first * smoothstep_prime(v)
                }
            },
            0.0,
            1.0,
            &piece_cfg,
        )?);
    }
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let v = if b / a > 4.0 {
            integrate_interval(
                |x| {
                    let t = x.exp();
                    let y = f(t);
                    if y == 0.0 {
                        0.0
                    } else {
                        y * t
                    }
                },
                a.ln(),
                b.ln(),
                &piece_cfg,
            )?
        } else {
            integrate_interval(&mut f, a, b, &piece_cfg)?
        };
        total.add(v);
    }
    if hi.is_infinite() {
        total.add(integrate_interval(
            |v| {
                let w = smoothstep(v);
                if w == 0.0 {
                    return 0.0;
                }
                let y = f(last / w);
                if y == 0.0 {
                    0.0
                } else {
                    y * last * smoothstep_prime(v) / (w * w)
                }
            },
            0.0,
            1.0,
            &piece_cfg,
        )?);
    }
    Ok(total.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_beta(k: f64) -> f64 {
        use statrs::function::gamma::ln_gamma;
        0.5 * (2.0 * ln_gamma(k / 2.0) - ln_gamma(k)).exp()
    }

    #[test]
    fn beta_identities() {
        let cfg = QuadConfig::default();
        let v = integrate_halfline(|t| t.powi(3) * (1.0 + t * t).powi(-4), TailSpec::new(3.0, 5.0).unwrap(), &cfg).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-12);
        let v = integrate_halfline(|t| t.powi(7) * (1.0 + t * t).powi(-8), TailSpec::new(7.0, 9.0).unwrap(), &cfg).unwrap();
        assert!((v - 1.0 / 280.0).abs() < 1e-13);
        let v = integrate_halfline(|t| t.powi(7) * (1.0 + t * t).powi(-5), TailSpec::new(7.0, 3.0).unwrap(), &cfg).unwrap();
        assert!((v - 0.125).abs() < 1e-11);
    }

    #[test]
    fn fractional_dimension_beta() {
        let cfg = QuadConfig::default();
        for k in [3.0, 4.0, 6.828427, 8.0, 11.656854, 20.0] {
            let v = integrate_halfline(
                |t| t.powf(k - 1.0) * (1.0 + t * t).powf(-k),
                TailSpec::new(k - 1.0, k + 1.0).unwrap(),
                &cfg,
            )
            .unwrap();
            let exact = half_beta(k);
            assert!((v / exact - 1.0).abs() < 1e-10, "K={k}: {v} vs {exact}");
        }
    }

    #[test]
    fn split_agrees_with_single_pass() {
        let cfg = QuadConfig::default();
        let f = |t: f64| t.powf(5.5) * (1.0 + t * t).powf(-6.0);
        let tails = TailSpec::new(5.5, 6.5).unwrap();
        let a = integrate_halfline(f, tails, &cfg).unwrap();
        let b = integrate_halfline_split(f, tails, &[0.1, 1.0, 30.0], &cfg).unwrap();
        assert!((a / b - 1.0).abs() < 1e-10);
    }

    #[test]
    fn wrong_tail_is_detected() {
        let cfg = QuadConfig::default();
        // Decays like t^-2 but declared as t^-6.
        let err = integrate_halfline(|t| t / (1.0 + t.powi(3)), TailSpec::new(1.0, 6.0).unwrap(), &cfg)
            .unwrap_err();
        assert!(matches!(err, Error::BadTails(_)));
    }

    #[test]
    fn non_integrable_spec_rejected() {
        assert!(TailSpec::new(-1.5, 3.0).is_err());
        assert!(TailSpec::new(0.0, 1.0).is_err());
    }

    #[test]
    fn exhausted_budget_reports_no_convergence() {
        let cfg = QuadConfig {
            rel_tol: 1e-14,
            abs_tol: 1e-300,
            max_refinements: 2,
        };
        let err = integrate_interval(|x: f64| (40.0 * x).sin().abs(), 0.0, 3.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::NoConvergence(_)));
    }

    #[test]
    fn gauss_legendre_is_exact_for_degree_15() {
        let v = gauss_legendre_8(|x| x.powi(15) + x.powi(14), 0.0, 1.0);
        assert!((v - (1.0 / 16.0 + 1.0 / 15.0)).abs() < 1e-15);
    }
}
