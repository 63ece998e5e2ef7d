//! Numerical laboratory for the stability of the two-dimensional
//! Caffarelli–Kohn–Nirenberg inequality.
//!
//! All radial computation happens in the Emden–Fowler variable `t`, related
//! to the physical radius by `r = t^tau`. In that variable the weights reduce
//! to powers of `t` with a real "dimension" `K`, and the extremal becomes the
//! standard `(1+t^2)` power profile.

pub mod error;
pub mod numerics;
pub mod params;
pub mod profiles;
pub mod spectrum;
pub mod stability;
pub mod verify;

pub use error::{Error, Result};
pub use params::{DerivedParams, ParamPoint, Region, TableRow, ThresholdSet};
pub use profiles::{HarmonicFunction, Model, NormReport, Parity, RadialProfile};
pub use spectrum::{ModeSpectrum, SpectrumSummary};
pub use stability::{DeficitReport, ExpansionFit};
