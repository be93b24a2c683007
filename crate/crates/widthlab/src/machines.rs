//! Nondeterministic query machines over fixed-length inputs.
//!
//! A machine is a finite tree of nodes: GUESS nodes fork nondeterministically,
//! QUERY nodes read one input position and branch on its bit, ACCEPT and
//! REJECT are leaves. An input is accepted when some root-to-ACCEPT path is
//! consistent with its bits. Each such path pins down at most as many
//! positions as it queried, so the accepted set is a union of subcubes: a
//! machine whose accepting paths query at most f distinct positions accepts
//! a set of DNF width at most f. [`NdQueryMachine::to_dnf`] materializes
//! exactly that union, one term per satisfiable accepting path.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boolfn::{BitString, Dnf, Term, TruthTable};
use crate::{Error, Result};

/// Largest machine arity whose accepted set may be materialized as a table.
pub const MAX_MACHINE_TABLE_ARITY: u32 = 20;

/// One node of a machine tree. Children are node indices; node 0 is the root.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Node {
    /// Nondeterministic fork: the machine may continue at either child.
    Guess { c0: usize, c1: usize },
    /// Reads input position `pos` (1-based from the left); continues at
    /// `on0` if the bit is 0, at `on1` if it is 1.
    Query { pos: u32, on0: usize, on1: usize },
    Accept,
    Reject,
}

/// A validated machine tree with a fixed input arity.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NdQueryMachine {
    arity: u32,
    nodes: Vec<Node>,
    query_bound: u32,
}

impl NdQueryMachine {
    /// Validates the node table as a tree rooted at 0 and wraps it. The
    /// query bound is inferred: the largest number of distinct positions
    /// queried along any satisfiable root-to-ACCEPT path.
    pub fn new(arity: u32, nodes: Vec<Node>) -> Result<Self> {
        if arity > 64 {
            return Err(Error::MachineArityTooLarge(arity));
        }
        if nodes.is_empty() {
            return Err(Error::MalformedMachine("no nodes".into()));
        }
        let mut parents = vec![0usize; nodes.len()];
        for (id, node) in nodes.iter().enumerate() {
            let children: &[usize] = match node {
                Node::Guess { c0, c1 } => &[*c0, *c1],
                Node::Query { on0, on1, .. } => &[*on0, *on1],
                _ => &[],
            };
            for &c in children {
                if c >= nodes.len() {
                    return Err(Error::MalformedMachine(format!(
                        "node {id} points at nonexistent node {c}"
                    )));
                }
                parents[c] += 1;
            }
            if let Node::Query { pos, .. } = node {
                if *pos < 1 || *pos > arity {
                    return Err(Error::MalformedMachine(format!(
                        "node {id} queries position {pos}, outside 1..={arity}"
                    )));
                }
            }
        }
        if parents[0] != 0 {
            return Err(Error::MalformedMachine("the root has a parent".into()));
        }
        for (id, &p) in parents.iter().enumerate().skip(1) {
            if p != 1 {
                return Err(Error::MalformedMachine(format!(
                    "node {id} has {p} parents, need exactly 1"
                )));
            }
        }
        // Parent counts alone admit disjoint cycles; insist on reachability.
        let mut seen = vec![false; nodes.len()];
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            if seen[id] {
                continue;
            }
            seen[id] = true;
            match nodes[id] {
                Node::Guess { c0, c1 } => stack.extend([c0, c1]),
                Node::Query { on0, on1, .. } => stack.extend([on0, on1]),
                _ => {}
            }
        }
        if let Some(id) = seen.iter().position(|s| !s) {
            return Err(Error::MalformedMachine(format!(
                "node {id} is unreachable from the root"
            )));
        }
        let mut machine = Self {
            arity,
            nodes,
            query_bound: 0,
        };
        machine.query_bound = machine
            .accepting_terms()
            .iter()
            .map(|t| t.width())
            .max()
            .unwrap_or(0);
        Ok(machine)
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Distinct positions queried along the most query-hungry satisfiable
    /// accepting path; an upper bound on the accepted set's DNF width.
    pub fn query_bound(&self) -> u32 {
        self.query_bound
    }

    /// Whether some root-to-ACCEPT path is consistent with the input bits.
    pub fn accepts_value(&self, v: u64) -> bool {
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            match self.nodes[id] {
                Node::Accept => return true,
                Node::Reject => {}
                Node::Guess { c0, c1 } => stack.extend([c0, c1]),
                Node::Query { pos, on0, on1 } => {
                    let bit = (v >> (self.arity - pos)) & 1 == 1;
                    stack.push(if bit { on1 } else { on0 });
                }
            }
        }
        false
    }

    pub fn accepts(&self, x: &BitString) -> bool {
        assert_eq!(x.len(), self.arity, "input length differs from machine arity");
        self.accepts_value(x.value())
    }

    /// The accepted set as a truth table; guarded by
    /// [`MAX_MACHINE_TABLE_ARITY`].
    pub fn accepted_set(&self) -> Result<TruthTable> {
        if self.arity > MAX_MACHINE_TABLE_ARITY {
            return Err(Error::MachineArityTooLarge(self.arity));
        }
        TruthTable::from_fn(self.arity, |v| self.accepts_value(v))
    }

    /// One term per satisfiable accepting path: the constraints the path's
    /// queries impose. Contradictory paths (re-querying a position and
    /// taking the opposite branch) are dropped; consistent re-queries add
    /// nothing. Sorted and deduplicated.
    fn accepting_terms(&self) -> Vec<Term> {
        let mut terms = vec![];
        let mut stack: Vec<(usize, BTreeMap<u32, bool>)> = vec![(0, BTreeMap::new())];
        while let Some((id, constraints)) = stack.pop() {
            match self.nodes[id] {
                Node::Reject => {}
                Node::Accept => {
                    let mut mask = 0u64;
                    let mut values = 0u64;
                    for (&pos, &bit) in &constraints {
                        mask |= 1 << (self.arity - pos);
                        if bit {
                            values |= 1 << (self.arity - pos);
                        }
                    }
                    terms.push(Term::new(self.arity, mask, values));
                }
                Node::Guess { c0, c1 } => {
                    stack.push((c0, constraints.clone()));
                    stack.push((c1, constraints));
                }
                Node::Query { pos, on0, on1 } => match constraints.get(&pos) {
                    Some(&bit) => stack.push((if bit { on1 } else { on0 }, constraints)),
                    None => {
                        let mut with0 = constraints.clone();
                        with0.insert(pos, false);
                        stack.push((on0, with0));
                        let mut with1 = constraints;
                        with1.insert(pos, true);
                        stack.push((on1, with1));
                    }
                },
            }
        }
        terms.sort_by_key(|t| (t.width(), t.free_mask(), t.subcube().points().next()));
        terms.dedup();
        terms
    }

    /// The accepted set as an explicit union of subcubes, one term per
    /// satisfiable accepting path. Its width never exceeds the query bound,
    /// and its table equals [`NdQueryMachine::accepted_set`].
    pub fn to_dnf(&self) -> Dnf {
        Dnf::new(self.arity, self.accepting_terms())
    }

    /// Renders the node table, one line per node in id order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Guess { c0, c1 } => writeln!(out, "{id} GUESS {c0} {c1}"),
                Node::Query { pos, on0, on1 } => writeln!(out, "{id} QUERY {pos} {on0} {on1}"),
                Node::Accept => writeln!(out, "{id} ACCEPT"),
                Node::Reject => writeln!(out, "{id} REJECT"),
            }
            .expect("writing to a String cannot fail");
        }
        out
    }

    /// Parses a node table, inferring the arity as the largest queried
    /// position. Blank lines and lines starting with `#` are skipped; node
    /// ids must cover 0..count exactly.
    pub fn from_text(text: &str) -> Result<Self> {
        Self::parse(text, None)
    }

    /// Parses a node table against an explicit arity, which must cover every
    /// queried position.
    pub fn from_text_with_arity(text: &str, arity: u32) -> Result<Self> {
        Self::parse(text, Some(arity))
    }

    fn parse(text: &str, arity: Option<u32>) -> Result<Self> {
        let mut rows: Vec<(usize, Node, usize)> = vec![];
        let mut max_pos = 0u32;
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let bad = |msg: String| Error::Parse { line, msg };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            let id: usize = parts[0]
                .parse()
                .map_err(|e| bad(format!("bad node id {:?}: {e}", parts[0])))?;
            let field = |i: usize| -> Result<usize> {
                parts
                    .get(i)
                    .ok_or_else(|| bad(format!("missing field {i}")))?
                    .parse()
                    .map_err(|e| bad(format!("bad field {:?}: {e}", parts[i])))
            };
            let node = match parts.get(1).copied() {
                Some("GUESS") if parts.len() == 4 => Node::Guess {
                    c0: field(2)?,
                    c1: field(3)?,
                },
                Some("QUERY") if parts.len() == 5 => {
                    let pos = field(2)? as u32;
                    max_pos = max_pos.max(pos);
                    Node::Query {
                        pos,
                        on0: field(3)?,
                        on1: field(4)?,
                    }
                }
                Some("ACCEPT") if parts.len() == 2 => Node::Accept,
                Some("REJECT") if parts.len() == 2 => Node::Reject,
                Some(kw) => return Err(bad(format!("bad node line with keyword {kw:?}"))),
                None => return Err(bad("missing node keyword".into())),
            };
            rows.push((id, node, line));
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "no nodes in machine text".into(),
            });
        }
        let mut nodes = vec![None; rows.len()];
        for (id, node, line) in rows {
            let slot = nodes.get_mut(id).ok_or_else(|| Error::Parse {
                line,
                msg: format!("node id {id} out of range, ids must cover 0..count"),
            })?;
            if slot.is_some() {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate node id {id}"),
                });
            }
            *slot = Some(node);
        }
        let nodes: Vec<Node> = nodes.into_iter().map(|n| n.expect("all slots filled")).collect();
        let arity = match arity {
            Some(a) if a < max_pos => {
                return Err(Error::MalformedMachine(format!(
                    "arity {a} below largest queried position {max_pos}"
                )))
            }
            Some(a) => a,
            None => max_pos,
        };
        Self::new(arity, nodes)
    }
}

/// Generates a random machine tree over `arity` positions whose every path
/// queries at most `query_bound` distinct positions, using at most `budget`
/// nodes. Deterministic in the seed.
pub fn random_machine(
    arity: u32,
    query_bound: u32,
    budget: usize,
    seed: u64,
) -> Result<NdQueryMachine> {
    assert!(query_bound <= arity, "query bound exceeds arity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = vec![];
    let mut remaining = budget.max(1);
    grow(&mut nodes, &mut rng, &mut remaining, &[], arity, query_bound);
    NdQueryMachine::new(arity, nodes)
}

fn grow(
    nodes: &mut Vec<Node>,
    rng: &mut ChaCha8Rng,
    remaining: &mut usize,
    queried: &[u32],
    arity: u32,
    query_bound: u32,
) -> usize {
    *remaining = remaining.saturating_sub(1);
    let id = nodes.len();
    nodes.push(Node::Reject); // placeholder, patched below
    // Inner nodes need room for two subtrees; queries also need a position
    // they are still allowed to touch.
    let can_fork = *remaining >= 2;
    let can_fresh = (queried.len() as u32) < query_bound && (queried.len() as u32) < arity;
    let can_query = can_fork && (can_fresh || !queried.is_empty());
    let roll = rng.gen_range(0..100);
    let node = if can_query && roll < 45 {
        let pos = if can_fresh && (queried.is_empty() || rng.gen_range(0..100) < 80) {
            // A position not yet queried on this path.
            loop {
                let p = rng.gen_range(1..=arity);
                if !queried.contains(&p) {
                    break p;
                }
            }
        } else {
            *queried.choose(rng).expect("re-query needs a queried position")
        };
        let mut deeper = queried.to_vec();
        if !deeper.contains(&pos) {
            deeper.push(pos);
        }
        let on0 = grow(nodes, rng, remaining, &deeper, arity, query_bound);
        let on1 = grow(nodes, rng, remaining, &deeper, arity, query_bound);
        Node::Query { pos, on0, on1 }
    } else if can_fork && roll < 70 {
        let c0 = grow(nodes, rng, remaining, queried, arity, query_bound);
        let c1 = grow(nodes, rng, remaining, queried, arity, query_bound);
        Node::Guess { c0, c1 }
    } else if rng.gen_bool(0.5) {
        Node::Accept
    } else {
        Node::Reject
    };
    nodes[id] = node;
    id
}
