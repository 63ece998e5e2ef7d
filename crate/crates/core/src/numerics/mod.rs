//! Shared numeric substrate: half-line quadrature with power-law tails,
//! bracketed root finding and scalar maximization in log coordinates.

mod optimize;
mod quadrature;
mod roots;

pub use optimize::{maximize_log_scale, LogScaleMax};
pub use quadrature::{
    gauss_legendre_8, integrate_halfline, integrate_halfline_split, integrate_interval, integrate_range,
    QuadConfig,
    TailSpec,
};
pub use roots::find_root;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}
