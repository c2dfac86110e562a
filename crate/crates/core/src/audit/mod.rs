//! Privacy and accuracy audits: exact ε of finite sanitizers, likelihood
//! ratios under the sparse input distribution `𝒜`, concentration checks, the
//! GAP distinguisher experiment and exhaustive checks of small protocols.

mod distinguisher;
mod epsilon;
mod exact;
mod likelihood;
mod report;

pub use distinguisher::{default_tau, distinguisher_experiment, DistinguisherReport};
pub use epsilon::{definition_equivalence_check, exact_epsilon, EquivalenceReport};
pub use exact::{compile_check, factorization_check, CompileCheck, FactorizationCheck};
pub use likelihood::{
    check_v_bounds, chernoff_tail_check, default_d, default_nu, hoeffding_bound, hoeffding_tail_check, interactive_likelihood_ratios,
    likelihood_ratios, party_ratio, sample_a, sample_a_weight, view_probability_transfer, DistributionAParams, HomogeneousViewSampler, RatioStats,
    TailCheck, VBoundReport, VStatistics, ViewSummary,
};
pub use report::{audit_csv, AuditRow, AUDIT_HEADER};
