//! Quantum violations of Bell-type inequalities for bipartite qutrit systems.
//!
//! The crate models two-party, two-setting, three-outcome Bell experiments:
//! generalized Wigner inequalities (GWI), the CGLMP inequality and the Wu
//! inequality, evaluated on qutrit pairs measured either with six-port
//! beam-splitter observables or spin-1 component observables. On top of the
//! measurement model it provides derivative-free optimization of settings,
//! Bell-operator spectra for state-independent maxima, white-noise threshold
//! visibilities, mixed-state parameter sweeps, an exhaustive local-hidden-
//! variable bound certifier, and a CHSH-reducibility checker.

// Tensor components are addressed by (setting, setting, outcome, outcome)
// index tuples throughout; plain index loops read better than iterator
// chains for that.
#![allow(clippy::needless_range_loop)]

pub mod bell_operator;
pub mod error;
pub mod inequalities;
pub mod linalg;
pub mod measurements;
pub mod optimizer;
pub mod reducibility;
pub mod robustness;
pub mod states;
pub mod sweeps;

mod exec;

pub use error::{Error, Result};
