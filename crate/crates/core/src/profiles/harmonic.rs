use super::{Model, RadialProfile};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Cos,
    Sin,
}

/// One angular component `profile(t) * cos(k theta)` or `* sin(k theta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicTerm {
    pub k: u32,
    pub parity: Parity,
    pub profile: RadialProfile,
}

impl HarmonicTerm {
    pub fn new(k: u32, parity: Parity, profile: RadialProfile) -> Self {
        HarmonicTerm { k, parity, profile }
    }

    pub fn angular(&self, theta: f64) -> f64 {
        let kt = self.k as f64 * theta;
        match self.parity {
            Parity::Cos => kt.cos(),
            Parity::Sin => kt.sin(),
        }
    }
}

/// A finite harmonic expansion on the plane, tied to one [`Model`].
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicFunction {
    model: Model,
    terms: Vec<HarmonicTerm>,
}

impl HarmonicFunction {
    /// Validates the term list: one term per `(k, parity)`, only cosine for
    /// `k = 0`, and profiles vanishing at the origin for `k >= 1`.
    pub fn new(model: &Model, terms: Vec<HarmonicTerm>) -> Result<Self> {
        for (i, term) in terms.iter().enumerate() {
            if term.k == 0 && term.parity == Parity::Sin {
                return Err(Error::InvalidFunction("k = 0 admits only the cosine parity".into()));
            }
            if terms[..i].iter().any(|o| o.k == term.k && o.parity == term.parity) {
                return Err(Error::InvalidFunction(format!(
                    "duplicate term (k = {}, {:?})",
                    term.k, term.parity
                )));
            }
            let (p0, _) = term.profile.tails();
            if term.k >= 1 && p0 <= 0.0 {
                return Err(Error::InvalidFunction(format!(
                    "mode k = {} profile must vanish at the origin",
                    term.k
                )));
            }
            if p0 < 0.0 {
                return Err(Error::InvalidFunction("radial profile is unbounded at the origin".into()));
            }
        }
        let mut terms = terms;
        terms.sort_by_key(|t| (t.k, t.parity));
        Ok(HarmonicFunction {
            model: model.clone(),
            terms,
        })
    }

    pub fn radial(model: &Model, profile: RadialProfile) -> Self {
        HarmonicFunction {
            model: model.clone(),
            terms: vec![HarmonicTerm::new(0, Parity::Cos, profile)],
        }
    }

    pub fn zero(model: &Model) -> Self {
        HarmonicFunction {
            model: model.clone(),
            terms: Vec::new(),
        }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn terms(&self) -> &[HarmonicTerm] {
        &self.terms
    }

    pub fn term(&self, k: u32, parity: Parity) -> Option<&RadialProfile> {
        self.terms
            .iter()
            .find(|t| t.k == k && t.parity == parity)
            .map(|t| &t.profile)
    }

    pub fn max_k(&self) -> u32 {
        self.terms.iter().map(|t| t.k).max().unwrap_or(0)
    }

    pub fn is_radial(&self) -> bool {
        self.terms.iter().all(|t| t.k == 0)
    }

    /// The `k = 0` part alone.
    pub fn radial_part(&self) -> Self {
        HarmonicFunction {
            model: self.model.clone(),
            terms: self.terms.iter().filter(|t| t.k == 0).cloned().collect(),
        }
    }

    /// `self + c * other`, merging terms of equal `(k, parity)`.
    pub fn add_scaled(&self, c: f64, other: &HarmonicFunction) -> Result<Self> {
        if self.model.point() != other.model.point() {
            return Err(Error::InvalidParams("functions belong to different parameter points".into()));
        }
        let mut terms = self.terms.clone();
        for o in &other.terms {
            match terms.iter_mut().find(|t| t.k == o.k && t.parity == o.parity) {
                Some(t) => t.profile = t.profile.plus(1.0, &o.profile, c),
                None => terms.push(HarmonicTerm::new(o.k, o.parity, o.profile.scaled(c))),
            }
        }
        HarmonicFunction::new(&self.model, terms)
    }

    pub fn scaled(&self, c: f64) -> Self {
        HarmonicFunction {
            model: self.model.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| HarmonicTerm::new(t.k, t.parity, t.profile.scaled(c)))
                .collect(),
        }
    }

    /// The physical dilation `u(x) -> lambda^-a u(lambda x)`.
    pub fn dilated(&self, lambda: f64) -> Self {
        let zeta = self.model.zeta(lambda);
        let amp = zeta.powf(self.model.beta());
        HarmonicFunction {
            model: self.model.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| HarmonicTerm::new(t.k, t.parity, t.profile.dilated(zeta, amp)))
                .collect(),
        }
    }

    /// Value at Emden–Fowler radius `t` and angle `theta`.
    pub fn eval(&self, t: f64, theta: f64) -> f64 {
        self.terms.iter().map(|term| term.profile.eval(t) * term.angular(theta)).sum()
    }
}
