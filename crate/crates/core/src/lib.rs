//! Thermodynamic formalism on finite Markov shifts and truncations of
//! countable ones: transfer operators, Gurevich pressure, equilibrium
//! states, taboo path sums, ergodic optimization and zero-temperature
//! limits.
//!
//! Symbols are internal 0-based indices; every shift also carries labels
//! (1-based on the renewal family) used for display and for the family
//! rules.

// NaN-rejecting checks are written as `!(x < y)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equilibrium;
pub mod ergodic_opt;
pub mod error;
pub mod first_passage;
pub mod logspace;
pub mod potential;
pub mod random;
pub mod renewal;
pub mod shift;
pub mod transfer;
pub mod zero_temp;

pub use equilibrium::{equilibrium_state, marginal_tv_distance, InvariantReport, StationaryMarkovMeasure};
pub use ergodic_opt::{
    karp, max_ergodic_average, max_mean_cycle_bruteforce, max_plus_gauge, maximizing_cycle,
    optimal_cycle_states, support_set_i, KarpResult, MaxPlusGauge, MaximizingCycle,
};
pub use error::{Error, Result};
pub use first_passage::{
    cylinder_ratio_from_taboo, excursion_gap, marked_count_bound, paa_by_marked_count,
    q_sum_and_r_sum, restrict_matrix, return_decomposition_residual, taboo_partial_sums, taboo_sum,
    taboo_sum_enumerated, visit_count_ratio, MainPathWeights, SubshiftSums, TabooMethod,
    TabooSystem, TabooWeights, VisitCountRatio,
};
pub use potential::{
    sigma_c, CoercivityData, FamilyRule, MarkovPotential, PotentialKind, PotentialSpec, RuleKind,
    SummabilityReport,
};
pub use renewal::{build_example, RenewalExample, RenewalModel};
pub use shift::{
    build_finite_shift, enumerate_cycles, enumerate_paths, enumerate_simple_cycles, full, renewal,
    truncate, FiniteShift, Path, ShiftFamily, ShiftKind, ShiftSpec, Subshift, Symbol,
};
pub use transfer::{
    conformal_residual, gurevich_pressure_zn, log_power_rows, pressure_truncation_sequence,
    recurrence_diagnostic, rpf_eigendata, rpf_eigendata_with, PowerIteration, RecurrenceReport,
    RpfData, StartVector, TransferMatrix, TruncationSequence, ZnTerm,
};
pub use zero_temp::{
    anneal, anneal_point, anneal_records, check_monotonicity, compare_with_subshift, detect_limit,
    AnnealOutcome, AnnealRecord, AnnealSchedule, LimitEstimate, MonotonicityReport,
    SubshiftComparison,
};
