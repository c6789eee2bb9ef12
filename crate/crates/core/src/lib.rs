//! Artificial-noise alignment over the real compound multi-antenna wiretap
//! channel: exact monomial precoder construction, finite-SNR link
//! simulation, and secrecy-rate / degrees-of-freedom analysis.
//!
//! The transmitter superimposes information symbols on artificial-noise
//! symbols. A monomial precoder built from the legitimate channel gains
//! collapses the noise symbols onto a small set of effective dimensions at
//! every legitimate receiver while leaving them full-dimensional at any
//! eavesdropper, so the intended receivers can decode while the message
//! stays masked everywhere else — without the transmitter ever knowing the
//! eavesdropper gains beyond a norm bound. All alignment bookkeeping runs on
//! integer exponent vectors, so the identities hold exactly rather than to a
//! float tolerance.
//!
//! Monte Carlo loops (symbol-error trials, power measurement, leakage grids)
//! run data-parallel through rayon by default; disabling the `parallel`
//! feature falls back to sequential execution with bit-identical output.

pub mod baseline;
pub mod channel;
pub mod error;
mod exec;
pub mod leakage;
pub mod modem;
pub mod precoder;
pub mod rng;
pub mod secrecy;
pub mod ser;

pub use channel::{ChannelSet, GainDist, LinkOutputs, SystemDims};
pub use error::{Error, Result};
pub use exec::ExecMode;
pub use leakage::{leakage_curve, mutual_info_exact, LeakageEstimate, MutualInfoOptions};
pub use modem::{
    choose_info_len, constellation_params, draw_dithers, eaves_effective_channel, encode,
    legit_effective_channel, ml_decode, power_expected, ConstellationParams, EffectiveChannel,
    SchemeConfig, TransmitFrame,
};
pub use precoder::{cardinalities, Cardinalities, Monomial, PrecoderBasis, SelectionMatrix};
pub use secrecy::{dof_at_equality, dof_formula, dof_limit, entropy_b1, rate_lower_bound, RateReport};
pub use ser::{run_ser_trials, SerOptions, SerPoint};
