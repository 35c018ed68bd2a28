//! Data model: noisy networks read from JSON, and the noiseless networks of
//! bit pipes and hyper-arcs that bound them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::Rate;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(s: impl Into<String>) -> NodeId {
        NodeId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> NodeId {
        NodeId(s.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Terminal,
    Auxiliary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
}

/// Per-link channel law. AWGN noise has unit variance, so `snr` absorbs
/// transmit power and gain.
#[derive(Clone, Debug, PartialEq)]
pub enum Channel {
    Awgn { snr: f64 },
    Qsc { q: u32, xi: f64 },
    Bsc { eps: f64 },
}

impl Channel {
    pub fn is_gaussian(&self) -> bool {
        matches!(self, Channel::Awgn { .. })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Channel::Awgn { .. } => "awgn",
            Channel::Qsc { .. } => "qsc",
            Channel::Bsc { .. } => "bsc",
        }
    }

    pub fn capacity(&self) -> Result<Rate> {
        match *self {
            Channel::Awgn { snr } => crate::info::awgn_capacity(snr),
            Channel::Qsc { q, xi } => crate::info::qsc_capacity(q, xi),
            Channel::Bsc { eps } => crate::info::qsc_capacity(2, eps),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoisyLink {
    pub from: NodeId,
    pub to: NodeId,
    pub channel: Channel,
}

impl NoisyLink {
    pub fn awgn(from: &str, to: &str, snr: f64) -> NoisyLink {
        NoisyLink {
            from: from.into(),
            to: to.into(),
            channel: Channel::Awgn { snr },
        }
    }

    pub fn snr(&self) -> Option<f64> {
        match self.channel {
            Channel::Awgn { snr } => Some(snr),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemandKind {
    Unicast,
    Multicast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Demand {
    pub kind: DemandKind,
    pub source: NodeId,
    pub sinks: Vec<NodeId>,
}

impl Demand {
    pub fn unicast(source: &str, sink: &str) -> Demand {
        Demand {
            kind: DemandKind::Unicast,
            source: source.into(),
            sinks: vec![sink.into()],
        }
    }

    pub fn multicast(source: &str, sinks: &[&str]) -> Demand {
        Demand {
            kind: DemandKind::Multicast,
            source: source.into(),
            sinks: sinks.iter().map(|&s| s.into()).collect(),
        }
    }

    pub fn label(&self) -> String {
        let sinks: Vec<&str> = self.sinks.iter().map(|s| s.as_str()).collect();
        format!("{}->{}", self.source, sinks.join("+"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoisyNetwork {
    pub nodes: Vec<NodeId>,
    pub links: Vec<NoisyLink>,
    pub demands: Vec<Demand>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    nodes: Vec<String>,
    links: Vec<RawLink>,
    #[serde(default)]
    demands: Vec<Demand>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    from: String,
    to: String,
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    snr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    snr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    xi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn raw_channel(k: usize, raw: &RawLink) -> Result<Channel> {
    let field = |name: &str| format!("links[{k}].{name}");
    let forbid = |name: &str, present: bool| -> Result<()> {
        if present {
            Err(Error::invalid(field(name), format!("not allowed for kind {:?}", raw.kind)))
        } else {
            Ok(())
        }
    };
    match raw.kind.as_str() {
        "awgn" => {
            forbid("q", raw.q.is_some())?;
            forbid("xi", raw.xi.is_some())?;
            forbid("eps", raw.eps.is_some())?;
            let snr = match (raw.snr, raw.snr_db) {
                (Some(_), Some(_)) => return Err(Error::invalid(field("snr_db"), "give either snr or snr_db, not both")),
                (None, None) => return Err(Error::invalid(field("snr"), "missing snr or snr_db")),
                (Some(s), None) => s,
                (None, Some(db)) => {
                    if !db.is_finite() {
                        return Err(Error::invalid(field("snr_db"), format!("{db} is not finite")));
                    }
                    db_to_linear(db)
                }
            };
            if !(snr >= 0.0) || !snr.is_finite() {
                return Err(Error::invalid(field("snr"), format!("{snr} must be finite and >= 0")));
            }
            Ok(Channel::Awgn { snr })
        }
        "qsc" => {
            forbid("snr", raw.snr.is_some())?;
            forbid("snr_db", raw.snr_db.is_some())?;
            forbid("eps", raw.eps.is_some())?;
            let q = raw.q.ok_or_else(|| Error::invalid(field("q"), "missing"))?;
            let xi = raw.xi.ok_or_else(|| Error::invalid(field("xi"), "missing"))?;
            if q < 2 {
                return Err(Error::invalid(field("q"), format!("{q} must be >= 2")));
            }
            if !(0.0..1.0).contains(&xi) || xi > (q as f64 - 1.0) / q as f64 {
                return Err(Error::invalid(field("xi"), format!("{xi} out of range [0, (q-1)/q]")));
            }
            Ok(Channel::Qsc { q, xi })
        }
        "bsc" => {
            forbid("snr", raw.snr.is_some())?;
            forbid("snr_db", raw.snr_db.is_some())?;
            forbid("q", raw.q.is_some())?;
            forbid("xi", raw.xi.is_some())?;
            let eps = raw.eps.ok_or_else(|| Error::invalid(field("eps"), "missing"))?;
            if !(0.0..=0.5).contains(&eps) {
                return Err(Error::invalid(field("eps"), format!("{eps} out of range [0, 0.5]")));
            }
            Ok(Channel::Bsc { eps })
        }
        other => Err(Error::invalid(field("kind"), format!("unknown kind {other:?}"))),
    }
}

/// Parses and validates a network document.
pub fn parse_network(text: &str) -> Result<NoisyNetwork> {
    let raw: RawNetwork = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let links = raw
        .links
        .iter()
        .enumerate()
        .map(|(k, l)| {
            Ok(NoisyLink {
                from: NodeId(l.from.clone()),
                to: NodeId(l.to.clone()),
                channel: raw_channel(k, l)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let net = NoisyNetwork {
        nodes: raw.nodes.into_iter().map(NodeId).collect(),
        links,
        demands: raw.demands,
    };
    net.validate()?;
    Ok(net)
}

/// Writes a network document; SNRs are written linear.
pub fn serialize_network(net: &NoisyNetwork) -> String {
    let raw = RawNetwork {
        nodes: net.nodes.iter().map(|n| n.0.clone()).collect(),
        links: net
            .links
            .iter()
            .map(|l| {
                let mut r = RawLink {
                    from: l.from.0.clone(),
                    to: l.to.0.clone(),
                    kind: l.channel.kind_name().to_string(),
                    snr: None,
                    snr_db: None,
                    q: None,
                    xi: None,
                    eps: None,
                };
                match l.channel {
                    Channel::Awgn { snr } => r.snr = Some(snr),
                    Channel::Qsc { q, xi } => {
                        r.q = Some(q);
                        r.xi = Some(xi);
                    }
                    Channel::Bsc { eps } => r.eps = Some(eps),
                }
                r
            })
            .collect(),
        demands: net.demands.clone(),
    };
    serde_json::to_string_pretty(&raw).expect("network serializes")
}

impl NoisyNetwork {
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (k, n) in self.nodes.iter().enumerate() {
            if n.0.is_empty() {
                return Err(Error::invalid(format!("nodes[{k}]"), "empty id"));
            }
            if !seen.insert(n) {
                return Err(Error::invalid(format!("nodes[{k}]"), format!("duplicate id {n}")));
            }
        }
        let mut pairs = BTreeSet::new();
        for (k, l) in self.links.iter().enumerate() {
            for (name, end) in [("from", &l.from), ("to", &l.to)] {
                if !seen.contains(end) {
                    return Err(Error::invalid(format!("links[{k}].{name}"), format!("unknown node {end}")));
                }
            }
            if l.from == l.to {
                return Err(Error::invalid(format!("links[{k}]"), format!("self-loop at {}", l.from)));
            }
            if !pairs.insert((&l.from, &l.to)) {
                return Err(Error::invalid(
                    format!("links[{k}]"),
                    format!("duplicate link {} -> {}", l.from, l.to),
                ));
            }
        }
        for (k, d) in self.demands.iter().enumerate() {
            if !seen.contains(&d.source) {
                return Err(Error::invalid(format!("demands[{k}].source"), format!("unknown node {}", d.source)));
            }
            if d.sinks.is_empty() {
                return Err(Error::invalid(format!("demands[{k}].sinks"), "must be nonempty"));
            }
            if d.kind == DemandKind::Unicast && d.sinks.len() != 1 {
                return Err(Error::invalid(format!("demands[{k}].sinks"), "unicast needs exactly one sink"));
            }
            let mut sinks = BTreeSet::new();
            for s in &d.sinks {
                if !seen.contains(s) {
                    return Err(Error::invalid(format!("demands[{k}].sinks"), format!("unknown node {s}")));
                }
                if *s == d.source {
                    return Err(Error::invalid(format!("demands[{k}].sinks"), "sink equals source"));
                }
                if !sinks.insert(s) {
                    return Err(Error::invalid(format!("demands[{k}].sinks"), format!("duplicate sink {s}")));
                }
            }
        }
        Ok(())
    }
}

/// A noiseless point-to-point pipe (one head) or hyper-arc (several heads).
/// `rate` is in bits per channel use; `f64::INFINITY` marks an
/// uncapacitated pipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BitPipe {
    pub tail: NodeId,
    pub heads: Vec<NodeId>,
    pub rate: f64,
    pub provenance: String,
}

impl BitPipe {
    pub fn is_hyper(&self) -> bool {
        self.heads.len() > 1
    }
}

/// Joint constraint: total usage of the listed pipes is at most `rate`.
/// Lower networks use these for the sum-rate face of a decoder that must
/// decode every listed stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointCap {
    pub pipes: Vec<usize>,
    pub rate: f64,
    pub provenance: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiselessNetwork {
    pub nodes: Vec<Node>,
    pub pipes: Vec<BitPipe>,
    pub joint_caps: Vec<JointCap>,
}

impl NoiselessNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: NodeId, kind: NodeKind) {
        if !self.nodes.iter().any(|n| n.id == id) {
            self.nodes.push(Node { id, kind });
        }
    }

    pub fn add_pipe(&mut self, tail: NodeId, heads: Vec<NodeId>, rate: f64, provenance: impl Into<String>) -> usize {
        self.pipes.push(BitPipe {
            tail,
            heads,
            rate,
            provenance: provenance.into(),
        });
        self.pipes.len() - 1
    }

    pub fn add_joint_cap(&mut self, pipes: Vec<usize>, rate: f64, provenance: impl Into<String>) {
        self.joint_caps.push(JointCap {
            pipes,
            rate,
            provenance: provenance.into(),
        });
    }

    pub fn index_of(&self, id: &NodeId) -> Option<usize> {
        self.nodes.iter().position(|n| &n.id == id)
    }

    pub fn has_hyper_arcs(&self) -> bool {
        self.pipes.iter().any(BitPipe::is_hyper)
    }

    /// Provenance keyed by pipe index.
    pub fn provenance(&self) -> BTreeMap<usize, &str> {
        self.pipes.iter().enumerate().map(|(k, p)| (k, p.provenance.as_str())).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Upper,
    Lower,
}

/// Returns every violated invariant; an empty list means the network is a
/// well-formed bounding network for `role`.
pub fn validate_bounding_network(n: &NoiselessNetwork, role: Role) -> Vec<String> {
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    for node in &n.nodes {
        if !ids.insert(&node.id) {
            out.push(format!("duplicate node id {}", node.id));
        }
    }
    for (k, p) in n.pipes.iter().enumerate() {
        if !ids.contains(&p.tail) {
            out.push(format!("pipe {k}: unknown tail {}", p.tail));
        }
        if p.heads.is_empty() {
            out.push(format!("pipe {k}: no heads"));
        }
        let mut hs = BTreeSet::new();
        for h in &p.heads {
            if !ids.contains(h) {
                out.push(format!("pipe {k}: unknown head {h}"));
            }
            if *h == p.tail {
                out.push(format!("pipe {k}: head equals tail {h}"));
            }
            if !hs.insert(h) {
                out.push(format!("pipe {k}: duplicate head {h}"));
            }
        }
        if !(p.rate >= 0.0) {
            out.push(format!("pipe {k}: rate {} is negative or NaN", p.rate));
        }
        if p.provenance.is_empty() {
            out.push(format!("pipe {k}: missing provenance"));
        }
        if role == Role::Upper && p.is_hyper() {
            out.push(format!("pipe {k}: hyper-arc with {} heads in an upper network", p.heads.len()));
        }
    }
    for (k, c) in n.joint_caps.iter().enumerate() {
        if role == Role::Upper {
            out.push(format!("joint cap {k}: joint constraints are not allowed in an upper network"));
        }
        if c.pipes.iter().any(|&p| p >= n.pipes.len()) {
            out.push(format!("joint cap {k}: references a missing pipe"));
        }
        if !(c.rate >= 0.0) {
            out.push(format!("joint cap {k}: rate {} is negative or NaN", c.rate));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const RELAY: &str = r#"{
        "nodes": ["S", "R", "D"],
        "links": [
            {"from": "S", "to": "D", "kind": "awgn", "snr_db": 0},
            {"from": "S", "to": "R", "kind": "awgn", "snr_db": 10},
            {"from": "R", "to": "D", "kind": "awgn", "snr_db": 10}
        ],
        "demands": [{"kind": "unicast", "source": "S", "sinks": ["D"]}]
    }"#;

    #[test]
    fn relay_document_converts_db() {
        let net = parse_network(RELAY).unwrap();
        let snrs: Vec<f64> = net.links.iter().map(|l| l.snr().unwrap()).collect();
        assert_eq!(snrs[0], 1.0);
        assert!((snrs[1] - 10.0).abs() < 1e-12);
        assert!((snrs[2] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn empty_links_is_valid() {
        let net = parse_network(r#"{"nodes": ["A"], "links": []}"#).unwrap();
        assert!(net.links.is_empty());
    }

    #[test]
    fn eps_out_of_range_names_the_field() {
        let doc = r#"{"nodes": ["A","B"], "links": [{"from":"A","to":"B","kind":"bsc","eps":0.7}]}"#;
        match parse_network(doc) {
            Err(Error::Invalid { field, .. }) => assert_eq!(field, "links[0].eps"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_snr_and_snr_db_together() {
        let doc = r#"{"nodes": ["A","B"], "links": [{"from":"A","to":"B","kind":"awgn","snr":1,"snr_db":0}]}"#;
        assert!(matches!(parse_network(doc), Err(Error::Invalid { .. })));
    }

    #[test]
    fn rejects_unknown_keys_and_reports_position() {
        let doc = "{\"nodes\": [\"A\"],\n \"links\": [], \"extra\": 1}";
        match parse_network(doc) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicates_and_self_loops() {
        assert!(parse_network(r#"{"nodes": ["A","A"], "links": []}"#).is_err());
        let doc = r#"{"nodes": ["A"], "links": [{"from":"A","to":"A","kind":"awgn","snr":1}]}"#;
        assert!(parse_network(doc).is_err());
    }

    #[test]
    fn validation_rules() {
        let mut n = NoiselessNetwork::new();
        for id in ["S", "A", "B"] {
            n.add_node(id.into(), NodeKind::Terminal);
        }
        n.add_pipe("S".into(), vec!["A".into(), "B".into()], 1.0, "test");
        assert_eq!(validate_bounding_network(&n, Role::Upper).len(), 1);
        assert!(validate_bounding_network(&n, Role::Lower).is_empty());

        let mut m = NoiselessNetwork::new();
        m.add_node("S".into(), NodeKind::Terminal);
        m.add_node("A".into(), NodeKind::Terminal);
        m.add_pipe("S".into(), vec!["A".into()], -1.0, "test");
        assert_eq!(validate_bounding_network(&m, Role::Lower).len(), 1);
    }
}
