//! The local model: every party talks only to a deterministic curator.

mod interactive;
mod noninteractive;
mod reductions;
mod sanitizer;

pub use interactive::{
    broadcast_curator, interactive_view_distribution, party_transcript_probability, run_interactive, run_interactive_with_tapes, Curator,
    EchoParty, InteractiveParty, PolicyCurator, RepeatedFlipParty, SanitizerParty,
};
pub use noninteractive::{
    laplace_submission_sum, output_distribution, randomized_response_sum, rr_estimate, rr_estimate_std, rr_sanitizers, run_noninteractive,
    view_distribution, CuratorView, PartyTranscript, ViewEntry,
};
pub use reductions::{gapk_to_gap0, sum_to_gap, ExactSum, GapKToGap0, GapProtocol, LaplaceSubmission, RandomizedResponse, SumProtocol, SumToGap};
pub use sanitizer::SanitizerSpec;
