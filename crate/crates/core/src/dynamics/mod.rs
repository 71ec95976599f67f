//! Collective master-equation dynamics in the symmetrized basis.
//!
//! The generator is the Lindblad form
//!
//! ```text
//! d rho/dt = -i[H0, rho] + sum_c sum_lm G^c_lm ( L_l rho L_m^+ - 1/2 {L_m^+ L_l, rho} )
//! ```
//!
//! where each channel `c` groups the collective lowering operators radiating
//! into one frequency and `G^c` is its symmetric cross-damping matrix. For a
//! single-operator channel this reduces to ordinary collective decay.

mod generator;
mod init;
mod integrate;
mod observe;

pub use generator::Generator;
pub use init::{pure_state, symmetric_amplitudes, symmetric_init};
pub use integrate::{
    default_step, integrate, integrate_observed, IntegratorConfig, InvariantReport, Trajectory,
};
pub use observe::{
    coherence_spectrum, detect_peak, excited_magnitude, settled_time, spectrum, steady_state_time,
    IntensityModel, IntensityTerm, Peak, SpectralPeak, Spectrum, TimeSeries,
};
