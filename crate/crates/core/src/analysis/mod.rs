//! Closed-form error analysis, the SINR objective and the optimizers built on them.

mod ber;
mod clark;
mod enumerate;
mod optimize;
mod sinr;

pub use crate::conditional::{conditional_stats, ConditionalStats};
pub use ber::{
    fstd_theoretical_ber, matd_theoretical_ber, ConditionalPair, StatisticMoments, ThresholdTheory,
    MAX_ENUMERATED_MEMORY,
};
pub use clark::{clark_max_stats, ClarkResult};
pub use enumerate::InterferenceEnumerator;
pub use optimize::{
    optimize_derivative_order, optimize_theory_threshold, optimize_threshold, BerObjective, EmpiricalBer, OrderChoice,
    ThresholdChoice, ThresholdSearch,
};
pub use sinr::{sinr, SinrReport};
