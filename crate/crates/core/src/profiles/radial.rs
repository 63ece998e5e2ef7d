use std::sync::Arc;

/// Which bubble normalization a [`RadialProfile::Bubble`] carries. The shape
/// is shared; only the amplitude and the equation it solves differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BubbleFamily {
    /// `[K(K-2)]^((K-2)/4) (1+t^2)^(-(K-2)/2)`, solving the plain Lane–Emden form.
    V,
    /// The extremal `U` with its physical amplitude.
    U,
    /// The extremal normalized to unit weighted `L^q` norm.
    B,
}

/// A log-uniform sampled profile written as `eta(t) = t^-shift * g(ln t)`,
/// with `g` interpolated by cubic Hermite pieces and power-law extrapolation
/// outside the node range.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProfile {
    pub x0: f64,
    pub h: f64,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
    pub shift: f64,
    /// `eta ~ t^p0` below the first node.
    pub p0: f64,
    /// `eta ~ t^-p_inf` above the last node.
    pub p_inf: f64,
    /// Angular mode and eigenvalue this profile solves, for residual checks.
    pub k: u32,
    pub mu: f64,
}

impl GridProfile {
    /// Builds slopes by fourth-order central differences (second order at the ends).
    pub fn from_samples(x0: f64, h: f64, g: Vec<f64>, shift: f64, p0: f64, p_inf: f64, k: u32, mu: f64) -> Self {
        let n = g.len();
        let mut dg = vec![0.0; n];
        for i in 0..n {
            dg[i] = if i >= 2 && i + 2 < n {
                (g[i - 2] - 8.0 * g[i - 1] + 8.0 * g[i + 1] - g[i + 2]) / (12.0 * h)
            } else if i >= 1 && i + 1 < n {
                (g[i + 1] - g[i - 1]) / (2.0 * h)
            } else if i == 0 && n > 2 {
                (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * h)
            } else if n > 2 {
                (3.0 * g[n - 1] - 4.0 * g[n - 2] + g[n - 3]) / (2.0 * h)
            } else {
                0.0
            };
        }
        GridProfile {
            x0,
            h,
            g,
            dg,
            shift,
            p0,
            p_inf,
            k,
            mu,
        }
    }

    pub fn x_last(&self) -> f64 {
        self.x0 + self.h * (self.g.len() - 1) as f64
    }

    /// Node positions in `ln t`.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.g.len()).map(move |i| self.x0 + self.h * i as f64)
    }

    /// `(g, g', g'')` at `x` inside the node range.
    pub(crate) fn hermite(&self, x: f64) -> (f64, f64, f64) {
        let n = self.g.len();
        let s = ((x - self.x0) / self.h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let u = s - i as f64;
        let h = self.h;
        let (y0, y1) = (self.g[i], self.g[i + 1]);
        let (m0, m1) = (self.dg[i] * h, self.dg[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        let v = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
        let d = (6.0 * u2 - 6.0 * u) * y0 + (3.0 * u2 - 4.0 * u + 1.0) * m0 + (-6.0 * u2 + 6.0 * u) * y1 + (3.0 * u2 - 2.0 * u) * m1;
        let dd = (12.0 * u - 6.0) * y0 + (6.0 * u - 4.0) * m0 + (-12.0 * u + 6.0) * y1 + (6.0 * u - 2.0) * m1;
        (v, d / h, dd / (h * h))
    }

    /// `(eta, eta', eta'')` in `t`.
    fn jet(&self, t: f64) -> (f64, f64, f64) {
        let x = t.ln();
        let xl = self.x_last();
        if x < self.x0 || x > xl {
            let (xe, p) = if x < self.x0 { (self.x0, self.p0) } else { (xl, -self.p_inf) };
            let te = xe.exp();
            let (g, _, _) = self.hermite(xe);
            let eta_e = (-self.shift * xe).exp() * g;
            let v = eta_e * (t / te).powf(p);
            return (v, p * v / t, p * (p - 1.0) * v / (t * t));
        }
        let (g, gx, gxx) = self.hermite(x);
        let e = (-self.shift * x).exp();
        let b = self.shift;
        let ex = e * (gx - b * g);
        let exx = e * (gxx - 2.0 * b * gx + b * b * g);
        (e * g, ex / t, (exx - ex) / (t * t))
    }
}

/// A radial function of the Emden–Fowler variable `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialProfile {
    /// `amp * zeta^beta * (1 + zeta^2 t^2)^-beta`.
    Bubble {
        family: BubbleFamily,
        amp: f64,
        beta: f64,
        zeta: f64,
    },
    /// The radial kernel element `(1-t^2)/(1+t^2)^(K/2)`.
    KernelEta0 { dim: f64 },
    /// The first-mode kernel shape `t/(1+t^2)^(K/2)`.
    KernelVprime { dim: f64 },
    Grid(Arc<GridProfile>),
    /// `amp * inner(zeta t)`.
    Dilated {
        inner: Arc<RadialProfile>,
        zeta: f64,
        amp: f64,
    },
    Sum(Arc<Vec<(f64, RadialProfile)>>),
}

impl RadialProfile {
    /// The plain bubble `V` in dimension `dim`.
    pub fn bubble_v(dim: f64) -> Self {
        let beta = 0.5 * (dim - 2.0);
        RadialProfile::Bubble {
            family: BubbleFamily::V,
            amp: (dim * (dim - 2.0)).powf(0.5 * beta),
            beta,
            zeta: 1.0,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            RadialProfile::Dilated { inner, zeta, amp } => RadialProfile::Dilated {
                inner: inner.clone(),
                zeta: *zeta,
                amp: amp * c,
            },
            RadialProfile::Sum(parts) => {
                RadialProfile::Sum(Arc::new(parts.iter().map(|(w, p)| (w * c, p.clone())).collect()))
            }
            other => RadialProfile::Dilated {
                inner: Arc::new(other.clone()),
                zeta: 1.0,
                amp: c,
            },
        }
    }

    /// `amp * self(zeta t)`.
    pub fn dilated(&self, zeta: f64, amp: f64) -> Self {
        match self {
            RadialProfile::Bubble { family, amp: a0, beta, zeta: z0 } if amp == zeta.powf(*beta) => {
                RadialProfile::Bubble {
                    family: *family,
                    amp: *a0,
                    beta: *beta,
                    zeta: z0 * zeta,
                }
            }
            RadialProfile::Dilated { inner, zeta: z0, amp: a0 } => RadialProfile::Dilated {
                inner: inner.clone(),
                zeta: z0 * zeta,
                amp: a0 * amp,
            },
            RadialProfile::Sum(parts) => RadialProfile::Sum(Arc::new(
                parts.iter().map(|(w, p)| (*w, p.dilated(zeta, amp))).collect(),
            )),
            other => RadialProfile::Dilated {
                inner: Arc::new(other.clone()),
                zeta,
                amp,
            },
        }
    }

    pub fn plus(&self, w_self: f64, other: &RadialProfile, w_other: f64) -> Self {
        let mut parts: Vec<(f64, RadialProfile)> = Vec::new();
        for (w, p) in [(w_self, self), (w_other, other)] {
            match p {
                RadialProfile::Sum(inner) => parts.extend(inner.iter().map(|(v, q)| (v * w, q.clone()))),
                _ => parts.push((w, p.clone())),
            }
        }
        RadialProfile::Sum(Arc::new(parts))
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.jet(t).0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.jet(t).1
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        self.jet(t).2
    }

    /// `(eta, eta', eta'')` at `t`.
    pub fn jet(&self, t: f64) -> (f64, f64, f64) {
        match self {
            RadialProfile::Bubble { amp, beta, zeta, .. } => {
                let a = amp * zeta.powf(*beta);
                let s = zeta * t;
                let w = 1.0 + s * s;
                let base = a * w.powf(-beta);
                let d1 = -2.0 * beta * zeta * s * base / w;
                let d2 = -2.0 * beta * zeta * zeta * base / w * (1.0 - 2.0 * (beta + 1.0) * s * s / w);
                (base, d1, d2)
            }
            RadialProfile::KernelEta0 { dim } => {
                let w = 1.0 + t * t;
                let hp = w.powf(-0.5 * dim - 1.0);
                let v = (1.0 - t * t) * w * hp;
                let g = (dim - 2.0) * t.powi(3) - (dim + 2.0) * t;
                let gp = 3.0 * (dim - 2.0) * t * t - (dim + 2.0);
                let d1 = g * hp;
                let d2 = gp * hp - g * (dim + 2.0) * t * hp / w;
                (v, d1, d2)
            }
            RadialProfile::KernelVprime { dim } => {
                let w = 1.0 + t * t;
                let hp = w.powf(-0.5 * dim - 1.0);
                let v = t * w * hp;
                let g = 1.0 - (dim - 1.0) * t * t;
                let d1 = g * hp;
                let d2 = -2.0 * (dim - 1.0) * t * hp - g * (dim + 2.0) * t * hp / w;
                (v, d1, d2)
            }
            RadialProfile::Grid(g) => g.jet(t),
            RadialProfile::Dilated { inner, zeta, amp } => {
                let (v, d1, d2) = inner.jet(zeta * t);
                (amp * v, amp * zeta * d1, amp * zeta * zeta * d2)
            }
            RadialProfile::Sum(parts) => {
                let mut acc = (0.0, 0.0, 0.0);
                for (w, p) in parts.iter() {
                    let (v, d1, d2) = p.jet(t);
                    acc.0 += w * v;
                    acc.1 += w * d1;
                    acc.2 += w * d2;
                }
                acc
            }
        }
    }

    /// `(p0, p_inf)` with `eta ~ t^p0` at 0 and `eta ~ t^-p_inf` at infinity
    /// (lower bounds for sums).
    pub fn tails(&self) -> (f64, f64) {
        match self {
            RadialProfile::Bubble { beta, .. } => (0.0, 2.0 * beta),
            RadialProfile::KernelEta0 { dim } => (0.0, dim - 2.0),
            RadialProfile::KernelVprime { dim } => (1.0, dim - 1.0),
            RadialProfile::Grid(g) => (g.p0, g.p_inf),
            RadialProfile::Dilated { inner, .. } => inner.tails(),
            RadialProfile::Sum(parts) => parts
                .iter()
                .map(|(_, p)| p.tails())
                .fold((f64::INFINITY, f64::INFINITY), |acc, x| (acc.0.min(x.0), acc.1.min(x.1))),
        }
    }

    /// Characteristic radii in `t`.
    pub fn scales(&self, out: &mut Vec<f64>) {
        self.scales_inner(1.0, out);
    }

    fn scales_inner(&self, factor: f64, out: &mut Vec<f64>) {
        match self {
            RadialProfile::Bubble { zeta, .. } => out.push(factor / zeta),
            RadialProfile::KernelEta0 { .. } | RadialProfile::KernelVprime { .. } | RadialProfile::Grid(_) => {
                out.push(factor)
            }
            RadialProfile::Dilated { inner, zeta, .. } => inner.scales_inner(factor / zeta, out),
            RadialProfile::Sum(parts) => parts.iter().for_each(|(_, p)| p.scales_inner(factor, out)),
        }
    }

    /// Node sets (in `ln t`) of every grid component, shifted for dilations.
    pub fn grid_nodes(&self, out: &mut Vec<Vec<f64>>) {
        self.grid_nodes_inner(0.0, out);
    }

    fn grid_nodes_inner(&self, shift: f64, out: &mut Vec<Vec<f64>>) {
        match self {
            RadialProfile::Grid(g) => out.push(g.nodes().map(|x| x + shift).collect()),
            RadialProfile::Dilated { inner, zeta, .. } => inner.grid_nodes_inner(shift - zeta.ln(), out),
            RadialProfile::Sum(parts) => parts.iter().for_each(|(_, p)| p.grid_nodes_inner(shift, out)),
            _ => {}
        }
    }
}
