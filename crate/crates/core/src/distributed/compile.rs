use std::collections::{BTreeSet, HashMap};

use crate::distributed::protocol::{enumerate_executions, Protocol, Record};
use crate::distributed::topology::Topology;
use crate::domain::BitVector;
use crate::error::{invalid, Error, Result};
use crate::local::{interactive_view_distribution, Curator, CuratorView, InteractiveParty};
use crate::symbol::{enumerate_tapes, Symbol, TapeSpace};

/// Messages of a compiled protocol.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Relay {
    /// Curator to party: the records addressed to it in the previous round.
    Deliver(Vec<Record>),
    /// Party to curator: what it sends this round, as `(receiver, symbol)`.
    Send(Vec<(usize, Symbol)>),
    /// Party 0's final answer: the protocol output.
    Output(Symbol),
    /// Final-round answer of every party other than 0.
    Idle,
}

/// A distributed party running inside the local model; all its traffic goes
/// through the curator.
#[derive(Debug, Clone)]
pub struct RelayParty<'a, P: ?Sized> {
    protocol: &'a P,
    topology: &'a Topology,
    id: usize,
}

impl<P: Protocol + ?Sized> InteractiveParty<Relay> for RelayParty<'_, P> {
    fn tape_space(&self) -> TapeSpace {
        self.protocol.tape_space(self.id)
    }

    fn answer(&self, input: u8, queries: &[Relay], tape: u64) -> Result<Relay> {
        let round = queries.len();
        let mut inbox = Vec::new();
        for q in queries {
            match q {
                Relay::Deliver(records) => inbox.extend(records.iter().cloned()),
                other => return invalid(format!("unexpected query {other:?}")),
            }
        }
        if round <= self.protocol.rounds() {
            let out = self.protocol.send(round, self.id, input, tape, &inbox)?;
            if let Some(&(receiver, _)) = out.iter().find(|(r, _)| *r == self.id || !self.topology.contains(self.id, *r)) {
                return Err(Error::ObliviousnessViolation {
                    round,
                    sender: self.id,
                    receiver,
                });
            }
            Ok(Relay::Send(out))
        } else if self.id == 0 {
            Ok(Relay::Output(self.protocol.output(input, tape, &inbox)?))
        } else {
            Ok(Relay::Idle)
        }
    }
}

/// Forwards every round-`r` message to its receiver in round `r + 1` and
/// reads the output from party 0's last answer.
#[derive(Debug, Clone, Copy)]
pub struct RelayCurator {
    original_rounds: usize,
}

impl Curator<Relay> for RelayCurator {
    type Output = Option<Symbol>;

    fn query(&self, round: usize, party: usize, view: &CuratorView<Relay>) -> Relay {
        let mut records = Vec::new();
        for e in view.messages.iter().filter(|e| e.round + 1 == round) {
            if let Relay::Send(out) = &e.symbol {
                for &(receiver, symbol) in out.iter().filter(|(r, _)| *r == party) {
                    records.push(Record {
                        round: e.round,
                        sender: e.party,
                        receiver,
                        symbol,
                    });
                }
            }
        }
        Relay::Deliver(records)
    }

    fn output(&self, view: &CuratorView<Relay>) -> Option<Symbol> {
        view.messages.iter().find_map(|e| match e.symbol {
            Relay::Output(s) if e.round == self.original_rounds + 1 && e.party == 0 => Some(s),
            _ => None,
        })
    }
}

/// An `ℓ`-round oblivious protocol recast as an `(ℓ+1)`-round local protocol.
#[derive(Debug, Clone)]
pub struct LocalCompilation<'a, P: ?Sized> {
    pub parties: Vec<RelayParty<'a, P>>,
    pub curator: RelayCurator,
    pub rounds: usize,
}

pub fn compile_to_local<'a, P: Protocol + ?Sized>(protocol: &'a P, topology: &'a Topology) -> Result<LocalCompilation<'a, P>> {
    if !protocol.channels().is_subset_of(topology) {
        return invalid("protocol declares channels outside the topology");
    }
    Ok(LocalCompilation {
        parties: (0..protocol.parties()).map(|id| RelayParty { protocol, topology, id }).collect(),
        curator: RelayCurator {
            original_rounds: protocol.rounds(),
        },
        rounds: protocol.rounds() + 1,
    })
}

/// The distributed transcript carried by a compiled view.
pub fn local_transcript(view: &CuratorView<Relay>) -> Vec<Record> {
    let mut out = Vec::new();
    for e in &view.messages {
        if let Relay::Send(list) = &e.symbol {
            out.extend(list.iter().map(|&(receiver, symbol)| Record {
                round: e.round,
                sender: e.party,
                receiver,
                symbol,
            }));
        }
    }
    out
}

/// For a lonely `party`, compares the compiled protocol's exact view ratio
/// between `x` and `x` with that party's bit flipped against the exact ratio
/// of the coalition view of its neighbours.
///
/// Returns one `(curator ratio, coalition ratio)` pair per curator view and
/// neighbour tape that is consistent with it.
pub fn lonely_transfer_ratios<P: Protocol + ?Sized>(protocol: &P, party: usize, x: &BitVector) -> Result<Vec<(f64, f64)>> {
    let topology = protocol.channels();
    let neighbours: BTreeSet<usize> = topology.neighbors(party).collect();
    let y = x.with_flipped(party);
    let compiled = compile_to_local(protocol, &topology)?;
    let local_x = interactive_view_distribution(&compiled.parties, &compiled.curator, x, compiled.rounds)?;
    let local_y = interactive_view_distribution(&compiled.parties, &compiled.curator, &y, compiled.rounds)?;

    // Probability of (neighbour tapes, messages touching the neighbours).
    type Key = (Vec<u64>, Vec<Record>);
    let restrict = |tapes: &[u64], transcript: &[Record]| -> Key {
        (
            neighbours.iter().map(|&i| tapes[i]).collect(),
            transcript
                .iter()
                .filter(|r| neighbours.contains(&r.sender) || neighbours.contains(&r.receiver))
                .cloned()
                .collect(),
        )
    };
    let coalition = |input: &BitVector| -> Result<HashMap<Key, f64>> {
        let mut dist = HashMap::new();
        for (e, p) in enumerate_executions(protocol, input)? {
            *dist.entry(restrict(&e.tapes, &e.transcript)).or_insert(0.0) += p;
        }
        Ok(dist)
    };
    let (cx, cy) = (coalition(x)?, coalition(&y)?);

    let spaces: Vec<Vec<f64>> = neighbours
        .iter()
        .map(|&i| match protocol.tape_space(i) {
            TapeSpace::Finite(p) => Ok(p),
            TapeSpace::Seed => Err(Error::NotEnumerable(i)),
        })
        .collect::<Result<_>>()?;
    let neighbour_tapes = enumerate_tapes(&spaces);

    let mut out = Vec::new();
    for (view, &px) in &local_x {
        let Some(&py) = local_y.get(view) else {
            out.push((f64::INFINITY, f64::NAN));
            continue;
        };
        let transcript = local_transcript(view);
        let mut tapes = vec![0u64; x.len()];
        for (nt, _) in &neighbour_tapes {
            for (&i, &v) in neighbours.iter().zip(nt) {
                tapes[i] = v;
            }
            let key = restrict(&tapes, &transcript);
            if let (Some(&qx), Some(&qy)) = (cx.get(&key), cy.get(&key)) {
                out.push((px / py, qx / qy));
            }
        }
    }
    Ok(out)
}
