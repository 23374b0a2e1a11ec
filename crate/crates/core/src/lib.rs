//! Post-processing orders on finite-dimensional quantum observables and
//! channels: smearing and degrading deciders, canonical Naimark dilations,
//! least-disturbing channels, explicit degrading maps and disturbance bounds.
//!
//! ```
//! use qnd_core::{is_a_channel, least_disturbing_channel, obs_leq, qubit_observable, SolverOptions};
//!
//! let opts = SolverOptions::default();
//! let b = qubit_observable([0.0, 0.0, 0.8])?;
//! let a = qubit_observable([0.0, 0.0, -0.5])?;
//! assert!(obs_leq(&a, &b, &opts)?.is_feasible());
//! assert!(is_a_channel(&least_disturbing_channel(&b), &a, &opts)?.is_feasible());
//! # Ok::<(), qnd_core::Error>(())
//! ```

pub mod bounds;
pub mod channels;
pub mod degrading;
pub mod dilations;
pub mod error;
pub mod instruments;
pub mod io;
pub mod numerics;
pub mod observables;
pub mod ordering;
pub mod qubit;
pub mod random;
pub mod report;
pub mod stochastic;

pub use bounds::{best_constant_approx, dksw_lower_bound, spectral_width, DisturbanceBound};
pub use channels::{Channel, ChoiMatrix, Stinespring};
pub use degrading::{degrade, degrade_channel, DegradingCertificate, DegradingOptions};
pub use dilations::{least_disturbing_channel, least_disturbing_instrument, naimark, NaimarkDilation};
pub use error::{Error, Result};
pub use instruments::Instrument;
pub use numerics::{CMatrix, C64};
pub use observables::Observable;
pub use ordering::{
    chan_leq, is_a_channel, obs_equiv, obs_leq, CompatibilityWitness, FeasibilityOutcome, FeasibilityStatus,
    SolverOptions,
};
pub use qubit::{qubit_observable, WeightedUnitaryMix};
pub use report::{ValidationReport, Violation, ViolationKind};
pub use stochastic::StochasticMatrix;
