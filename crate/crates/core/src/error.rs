use thiserror::Error;

/// Errors raised by the simulator, the mechanisms and the audit engine.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A party's answer or message function failed during an execution.
    #[error("protocol aborted in round {round} at party {party}: {reason}")]
    ProtocolAbort {
        round: usize,
        party: usize,
        reason: String,
    },

    /// A party tried to talk over a channel that is not part of the topology.
    #[error("obliviousness violation in round {round}: channel {sender} -> {receiver} is not declared")]
    ObliviousnessViolation {
        round: usize,
        sender: usize,
        receiver: usize,
    },

    /// A declared channel carried no message, so the run was not oblivious.
    #[error("obliviousness violation: declared channel {0}-{1} was never used")]
    UnusedChannel(usize, usize),

    /// Exact enumeration was requested for a party whose tape is not finite.
    #[error("party {0} has a seed tape; exact enumeration needs a finite tape space")]
    NotEnumerable(usize),

    #[error("malformed record on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
