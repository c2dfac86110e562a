//! Oblivious point-to-point protocols: topologies, a synchronous replayable
//! runner, coalition views, secret sharing and the compiler into the local
//! model.

mod compile;
pub mod fixtures;
mod protocol;
mod protocols;
mod sharing;
mod topology;

pub use compile::{compile_to_local, local_transcript, lonely_transfer_ratios, LocalCompilation, Relay, RelayCurator, RelayParty};
pub use protocol::{
    coalition_view, coalition_view_distribution, consistency_probability, message_count, output_distribution, read_transcript, round_count,
    run_protocol, run_with_tapes, transcript_distribution, write_transcript, CoalitionView, Execution, Protocol, Record, TRANSCRIPT_HEADER,
};
pub use protocols::{
    dist_alpha_protocol, gaussian_aggregator_sum, randomized_response_distributed, DistAlphaProtocol, GaussianAggregator, NoiseCalibration,
    StarRandomizedResponse,
};
pub use sharing::{additive_share, reconstruct, split_with, ShareParams, ShareVector, DEFAULT_MODULUS};
pub use topology::{classify, PartyClassification, Topology};
