use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::BufRead;

use rand::Rng;

use crate::distributed::topology::Topology;
use crate::domain::BitVector;
use crate::error::{invalid, Error, Result};
use crate::symbol::{enumerate_tapes, Symbol, TapeSpace};

/// One point-to-point message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Record {
    pub round: usize,
    pub sender: usize,
    pub receiver: usize,
    pub symbol: Symbol,
}

/// A synchronous protocol over a fixed set of channels.
///
/// Each party's behaviour is a pure function of its input, its tape and the
/// messages it received in earlier rounds, which makes every execution
/// replayable from its tapes. Party 0 computes the output once the last
/// round is over.
pub trait Protocol: Sync {
    fn parties(&self) -> usize;

    fn rounds(&self) -> usize;

    /// The channels this protocol uses in every run.
    fn channels(&self) -> Topology;

    fn tape_space(&self, party: usize) -> TapeSpace;

    /// Messages `party` sends in `round`, as `(receiver, symbol)` pairs.
    /// `inbox` holds everything it received in rounds before `round`.
    fn send(&self, round: usize, party: usize, input: u8, tape: u64, inbox: &[Record]) -> Result<Vec<(usize, Symbol)>>;

    /// Party 0's output given everything it received.
    fn output(&self, input: u8, tape: u64, inbox: &[Record]) -> Result<Symbol>;
}

/// A complete run: inputs, tapes, the ordered transcript and the output.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub inputs: BitVector,
    pub tapes: Vec<u64>,
    pub transcript: Vec<Record>,
    pub output: Symbol,
}

impl Execution {
    pub fn parties(&self) -> usize {
        self.inputs.len()
    }

    /// Records addressed to `party`, in transcript order.
    pub fn received_by(&self, party: usize) -> impl Iterator<Item = &Record> + '_ {
        self.transcript.iter().filter(move |r| r.receiver == party)
    }

    /// The `(round, sender, receiver)` pattern, without payloads.
    pub fn pattern(&self) -> Vec<(usize, usize, usize)> {
        self.transcript.iter().map(|r| (r.round, r.sender, r.receiver)).collect()
    }
}

pub fn message_count(e: &Execution) -> usize {
    e.transcript.len()
}

pub fn round_count(e: &Execution) -> usize {
    e.transcript.iter().map(|r| r.round).max().unwrap_or(0)
}

/// Runs `protocol` on `topology`, drawing each party's tape from `rng`.
pub fn run_protocol<P, R>(protocol: &P, topology: &Topology, x: &BitVector, rng: &mut R) -> Result<Execution>
where
    P: Protocol + ?Sized,
    R: Rng + ?Sized,
{
    let tapes: Vec<u64> = (0..protocol.parties()).map(|i| protocol.tape_space(i).sample(rng)).collect();
    run_with_tapes(protocol, topology, x, &tapes)
}

/// Deterministic replay of `protocol` with fixed tapes.
///
/// Fails if a message travels over a channel outside `topology`, or if a
/// channel the protocol declares goes unused.
pub fn run_with_tapes<P: Protocol + ?Sized>(protocol: &P, topology: &Topology, x: &BitVector, tapes: &[u64]) -> Result<Execution> {
    let n = protocol.parties();
    if n == 0 {
        return invalid("protocol has no parties");
    }
    if x.len() != n || tapes.len() != n {
        return invalid(format!("protocol has {n} parties; got {} inputs and {} tapes", x.len(), tapes.len()));
    }
    let declared = protocol.channels();
    if !declared.is_subset_of(topology) {
        return invalid("protocol declares channels outside the topology");
    }
    let index = topology.neighbor_index();
    let mut used = vec![false; index.slots()];
    let mut transcript: Vec<Record> = Vec::with_capacity(index.slots());
    let mut inboxes = Inboxes::new(n);
    for round in 1..=protocol.rounds() {
        for i in 0..n {
            let out = protocol.send(round, i, x.get(i), tapes[i], inboxes.of(i)).map_err(|e| abort(round, i, e))?;
            for (receiver, symbol) in out {
                let Some(slot) = index.slot(i, receiver) else {
                    return Err(Error::ObliviousnessViolation { round, sender: i, receiver });
                };
                used[slot] = true;
                transcript.push(Record {
                    round,
                    sender: i,
                    receiver,
                    symbol,
                });
            }
        }
        if round < protocol.rounds() {
            inboxes = Inboxes::group(n, &transcript);
        }
    }
    let sent = |a: usize, b: usize| index.slot(a, b).is_some_and(|s| used[s]);
    if let Some((a, b)) = declared.channels().find(|&(a, b)| !sent(a, b) && !sent(b, a)) {
        return Err(Error::UnusedChannel(a, b));
    }
    let final_inbox: Vec<Record> = transcript.iter().filter(|r| r.receiver == 0).copied().collect();
    let output = protocol.output(x.get(0), tapes[0], &final_inbox).map_err(|e| abort(protocol.rounds() + 1, 0, e))?;
    Ok(Execution {
        inputs: x.clone(),
        tapes: tapes.to_vec(),
        transcript,
        output,
    })
}

/// Every party's received messages in one buffer, grouped by receiver and
/// in transcript order within each group.
struct Inboxes {
    offsets: Vec<usize>,
    records: Vec<Record>,
}

impl Inboxes {
    fn new(n: usize) -> Self {
        Self {
            offsets: vec![0; n + 1],
            records: Vec::new(),
        }
    }

    fn group(n: usize, transcript: &[Record]) -> Self {
        let mut offsets = vec![0; n + 1];
        for r in transcript {
            offsets[r.receiver + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut records = transcript.to_vec();
        for r in transcript {
            records[fill[r.receiver]] = *r;
            fill[r.receiver] += 1;
        }
        Self { offsets, records }
    }

    fn of(&self, party: usize) -> &[Record] {
        &self.records[self.offsets[party]..self.offsets[party + 1]]
    }
}

fn abort(round: usize, party: usize, e: Error) -> Error {
    match e {
        Error::ObliviousnessViolation { .. } | Error::ProtocolAbort { .. } => e,
        other => Error::ProtocolAbort {
            round,
            party,
            reason: other.to_string(),
        },
    }
}

/// What a coalition of parties knows after a run: their inputs, their tapes
/// and every message addressed to one of them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoalitionView {
    pub coalition: Vec<usize>,
    pub inputs: Vec<u8>,
    pub tapes: Vec<u64>,
    pub received: Vec<Record>,
}

pub fn coalition_view(e: &Execution, coalition: &[usize]) -> Result<CoalitionView> {
    let members: BTreeSet<usize> = coalition.iter().copied().collect();
    if let Some(&bad) = members.iter().find(|&&i| i >= e.parties()) {
        return invalid(format!("party {bad} outside {} parties", e.parties()));
    }
    Ok(CoalitionView {
        coalition: members.iter().copied().collect(),
        inputs: members.iter().map(|&i| e.inputs.get(i)).collect(),
        tapes: members.iter().map(|&i| e.tapes[i]).collect(),
        received: e.transcript.iter().filter(|r| members.contains(&r.receiver)).cloned().collect(),
    })
}

pub const TRANSCRIPT_HEADER: &str = "round,sender,receiver,symbol";

/// Writes a transcript as `round,sender,receiver,symbol` lines after a
/// header line. Symbols use the [`Symbol`] text form.
pub fn write_transcript(records: &[Record]) -> String {
    let mut s = String::with_capacity(16 * (records.len() + 1));
    s.push_str(TRANSCRIPT_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(s, "{},{},{},{}", r.round, r.sender, r.receiver, r.symbol);
    }
    s
}

pub fn read_transcript(reader: impl BufRead) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            reason: e.to_string(),
        })?;
        if k == 0 {
            if line.trim() != TRANSCRIPT_HEADER {
                return Err(Error::Parse {
                    line: 1,
                    reason: format!("expected header `{TRANSCRIPT_HEADER}`"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        let parse_err = |reason: String| Error::Parse { line: line_no, reason };
        if fields.len() != 4 {
            return Err(parse_err(format!("expected 4 fields, found {}", fields.len())));
        }
        let num = |s: &str, name: &str| s.parse::<usize>().map_err(|e| parse_err(format!("{name}: {e}")));
        out.push(Record {
            round: num(fields[0], "round")?,
            sender: num(fields[1], "sender")?,
            receiver: num(fields[2], "receiver")?,
            symbol: fields[3].parse().map_err(|e: Error| parse_err(e.to_string()))?,
        });
    }
    Ok(out)
}

fn finite_tape_spaces<P: Protocol + ?Sized>(protocol: &P) -> Result<Vec<Vec<f64>>> {
    (0..protocol.parties())
        .map(|i| match protocol.tape_space(i) {
            TapeSpace::Finite(p) => Ok(p),
            TapeSpace::Seed => Err(Error::NotEnumerable(i)),
        })
        .collect()
}

pub(crate) fn enumerate_executions<P: Protocol + ?Sized>(protocol: &P, x: &BitVector) -> Result<Vec<(Execution, f64)>> {
    let spaces = finite_tape_spaces(protocol)?;
    let topology = protocol.channels();
    enumerate_tapes(&spaces)
        .into_iter()
        .map(|(tapes, p)| Ok((run_with_tapes(protocol, &topology, x, &tapes)?, p)))
        .collect()
}

/// Exact distribution of the full transcript, by enumerating every joint tape.
pub fn transcript_distribution<P: Protocol + ?Sized>(protocol: &P, x: &BitVector) -> Result<HashMap<Vec<Record>, f64>> {
    let mut dist = HashMap::new();
    for (e, p) in enumerate_executions(protocol, x)? {
        *dist.entry(e.transcript).or_insert(0.0) += p;
    }
    Ok(dist)
}

pub fn output_distribution<P: Protocol + ?Sized>(protocol: &P, x: &BitVector) -> Result<HashMap<Symbol, f64>> {
    let mut dist = HashMap::new();
    for (e, p) in enumerate_executions(protocol, x)? {
        *dist.entry(e.output).or_insert(0.0) += p;
    }
    Ok(dist)
}

pub fn coalition_view_distribution<P: Protocol + ?Sized>(protocol: &P, x: &BitVector, coalition: &[usize]) -> Result<HashMap<CoalitionView, f64>> {
    let mut dist = HashMap::new();
    for (e, p) in enumerate_executions(protocol, x)? {
        *dist.entry(coalition_view(&e, coalition)?).or_insert(0.0) += p;
    }
    Ok(dist)
}

/// `α_i^c(x_i)`: the probability over `party`'s tape that, fed the messages
/// `transcript` says it received, it sends exactly what `transcript` says it
/// sent, round after round.
pub fn consistency_probability<P: Protocol + ?Sized>(protocol: &P, party: usize, input: u8, transcript: &[Record]) -> Result<f64> {
    let TapeSpace::Finite(probs) = protocol.tape_space(party) else {
        return Err(Error::NotEnumerable(party));
    };
    let mut total = 0.0;
    'tapes: for (tape, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for round in 1..=protocol.rounds() {
            let inbox: Vec<Record> = transcript.iter().filter(|r| r.receiver == party && r.round < round).cloned().collect();
            let sent = match protocol.send(round, party, input, tape as u64, &inbox) {
                Ok(s) => s,
                Err(_) => continue 'tapes,
            };
            let expected = transcript
                .iter()
                .filter(|r| r.sender == party && r.round == round)
                .map(|r| (r.receiver, r.symbol));
            if !sent.iter().copied().eq(expected) {
                continue 'tapes;
            }
        }
        total += p;
    }
    Ok(total)
}
