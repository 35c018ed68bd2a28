//! Bound evaluation on noiseless networks.
//!
//! Outer bounds: max-flow/min-cut on point-to-point networks, with cut
//! constraints over demand subsets for several sessions. Inner bounds: a
//! routing LP on networks with hyper-arcs where one session's use of a
//! hyper-arc serves all of its heads, sessions share pipes additively, and
//! joint caps bound the total use of pipe groups.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};

use crate::error::{Error, Result};
use crate::info::Rate;
use crate::netmodel::{Demand, NodeId, NodeKind, NoiselessNetwork};

/// Certificate attached to a flow value.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// Source side of a minimum cut.
    Cut { source_side: Vec<NodeId> },
    /// Per-pipe flow on a point-to-point network.
    Flow { pipe_flow: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowResult {
    pub demand: Demand,
    pub rate: Rate,
    pub witness: Witness,
}

struct Edge {
    to: usize,
    cap: f64,
    rev: usize,
}

/// Dinic's algorithm on f64 capacities.
struct Dinic {
    g: Vec<Vec<Edge>>,
    level: Vec<i64>,
    it: Vec<usize>,
    eps: f64,
}

impl Dinic {
    fn new(n: usize, eps: f64) -> Self {
        Dinic {
            g: (0..n).map(|_| Vec::new()).collect(),
            level: vec![0; n],
            it: vec![0; n],
            eps,
        }
    }

    fn add_edge(&mut self, a: usize, b: usize, cap: f64) -> (usize, usize) {
        let ra = self.g[b].len();
        let rb = self.g[a].len();
        self.g[a].push(Edge { to: b, cap, rev: ra });
        self.g[b].push(Edge { to: a, cap: 0.0, rev: rb });
        (a, rb)
    }

    fn bfs(&mut self, s: usize) {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for e in &self.g[v] {
                if e.cap > self.eps && self.level[e.to] < 0 {
                    self.level[e.to] = self.level[v] + 1;
                    q.push_back(e.to);
                }
            }
        }
    }

    fn dfs(&mut self, v: usize, t: usize, f: f64) -> f64 {
        if v == t {
            return f;
        }
        while self.it[v] < self.g[v].len() {
            let i = self.it[v];
            let (to, cap) = (self.g[v][i].to, self.g[v][i].cap);
            if cap > self.eps && self.level[v] < self.level[to] {
                let d = self.dfs(to, t, f.min(cap));
                if d > 0.0 {
                    self.g[v][i].cap -= d;
                    let rev = self.g[v][i].rev;
                    self.g[to][rev].cap += d;
                    return d;
                }
            }
            self.it[v] += 1;
        }
        0.0
    }

    fn run(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return flow;
            }
            self.it.iter_mut().for_each(|x| *x = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= 0.0 {
                    break;
                }
                flow += f;
            }
        }
    }

    fn reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.g.len()];
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for e in &self.g[v] {
                if e.cap > self.eps && !seen[e.to] {
                    seen[e.to] = true;
                    q.push_back(e.to);
                }
            }
        }
        seen
    }
}

fn require_p2p(net: &NoiselessNetwork) -> Result<()> {
    if net.has_hyper_arcs() {
        return Err(Error::WrongNetwork("max-flow needs a network without hyper-arcs".into()));
    }
    if !net.joint_caps.is_empty() {
        return Err(Error::WrongNetwork("max-flow needs a network without joint caps".into()));
    }
    Ok(())
}

fn node_index(net: &NoiselessNetwork, id: &NodeId) -> Result<usize> {
    net.index_of(id)
        .ok_or_else(|| Error::Config(format!("node {id} is not in the network")))
}

/// Capacity of the cut whose source side is `source_side`.
pub fn cut_capacity(net: &NoiselessNetwork, source_side: &BTreeSet<NodeId>) -> f64 {
    net.pipes
        .iter()
        .filter(|p| source_side.contains(&p.tail) && p.heads.iter().any(|h| !source_side.contains(h)))
        .map(|p| p.rate)
        .sum()
}

/// Max-flow between node sets (super-source/super-sink) with a cut witness.
fn max_flow_sets(net: &NoiselessNetwork, sources: &[usize], sinks: &[usize]) -> (f64, Vec<bool>, Vec<f64>) {
    let n = net.nodes.len();
    let (ss, tt) = (n, n + 1);
    let finite: f64 = net.pipes.iter().filter(|p| p.rate.is_finite()).map(|p| p.rate).sum();
    let big = 2.0 * finite + 1.0;
    let scale = finite.max(1.0);
    let mut d = Dinic::new(n + 2, 1e-13 * scale);
    let mut handles = Vec::with_capacity(net.pipes.len());
    for p in &net.pipes {
        let a = net.index_of(&p.tail).expect("validated tail");
        let b = net.index_of(&p.heads[0]).expect("validated head");
        let cap = if p.rate.is_finite() { p.rate } else { big };
        handles.push(d.add_edge(a, b, cap));
    }
    // Terminal edges must never be the bottleneck.
    let huge = big * (net.pipes.len() as f64 + 2.0);
    for &s in sources {
        d.add_edge(ss, s, huge);
    }
    for &t in sinks {
        d.add_edge(t, tt, huge);
    }
    let flow = d.run(ss, tt);
    let seen = d.reachable(ss);
    let pipe_flow = net
        .pipes
        .iter()
        .zip(&handles)
        .map(|(p, &(a, i))| {
            let cap = if p.rate.is_finite() { p.rate } else { big };
            (cap - d.g[a][i].cap).max(0.0)
        })
        .collect();
    let side = seen[..n].to_vec();
    let cut: f64 = net
        .pipes
        .iter()
        .filter(|p| {
            let a = net.index_of(&p.tail).expect("tail");
            let b = net.index_of(&p.heads[0]).expect("head");
            side[a] && !side[b]
        })
        .map(|p| p.rate)
        .sum();
    // Any flow beyond the finite total must cross an uncapacitated pipe.
    let value = if flow > finite + 0.5 || !cut.is_finite() {
        f64::INFINITY
    } else {
        cut
    };
    (value, side, pipe_flow)
}

/// Max-flow from `source` to `sink`; the rate equals the capacity of the
/// returned minimum cut.
pub fn max_flow(net: &NoiselessNetwork, source: &NodeId, sink: &NodeId) -> Result<FlowResult> {
    require_p2p(net)?;
    let s = node_index(net, source)?;
    let t = node_index(net, sink)?;
    let (value, side, _) = max_flow_sets(net, &[s], &[t]);
    Ok(FlowResult {
        demand: Demand::unicast(source.as_str(), sink.as_str()),
        rate: Rate::new(value)?,
        witness: Witness::Cut {
            source_side: net.nodes.iter().zip(&side).filter(|(_, &b)| b).map(|(n, _)| n.id.clone()).collect(),
        },
    })
}

/// Same computation returning the flow assignment instead of the cut.
pub fn max_flow_assignment(net: &NoiselessNetwork, source: &NodeId, sink: &NodeId) -> Result<FlowResult> {
    require_p2p(net)?;
    let s = node_index(net, source)?;
    let t = node_index(net, sink)?;
    let (value, _, pipe_flow) = max_flow_sets(net, &[s], &[t]);
    Ok(FlowResult {
        demand: Demand::unicast(source.as_str(), sink.as_str()),
        rate: Rate::new(value)?,
        witness: Witness::Flow { pipe_flow },
    })
}

/// Single-source multicast: minimum over sinks of the max-flow.
pub fn multicast_outer(net: &NoiselessNetwork, demand: &Demand) -> Result<Rate> {
    let mut best = Rate::INFINITE;
    for t in &demand.sinks {
        best = best.min(max_flow(net, &demand.source, t)?.rate);
    }
    Ok(best)
}

/// Σ_{d ∈ demands} r_d ≤ capacity, from a cut separating every listed
/// demand's source from its chosen sink.
#[derive(Clone, Debug, PartialEq)]
pub struct CutConstraint {
    pub demands: Vec<usize>,
    pub sinks: Vec<NodeId>,
    pub capacity: f64,
    /// Source side of a node cut; empty for an edge-set constraint.
    pub source_side: Vec<NodeId>,
    /// Pipes whose removal certifies the constraint.
    pub pipes: Vec<usize>,
}

const MAX_CUT_QUERIES: usize = 20_000;

/// Cut constraints for every nonempty demand subset and every choice of one
/// sink per demand in the subset.
pub fn cut_constraints(net: &NoiselessNetwork, demands: &[Demand]) -> Result<Vec<CutConstraint>> {
    require_p2p(net)?;
    if demands.len() > 16 {
        return Err(Error::Config("cut enumeration limited to 16 demands".into()));
    }
    let mut queries = 0usize;
    for mask in 1u32..(1 << demands.len()) {
        let mut c = 1usize;
        for (k, d) in demands.iter().enumerate() {
            if mask >> k & 1 == 1 {
                c = c.saturating_mul(d.sinks.len());
            }
        }
        queries = queries.saturating_add(c);
    }
    if queries > MAX_CUT_QUERIES {
        return Err(Error::Config(format!("{queries} cut queries exceed the limit {MAX_CUT_QUERIES}")));
    }
    let mut out = Vec::new();
    for mask in 1u32..(1 << demands.len()) {
        let members: Vec<usize> = (0..demands.len()).filter(|k| mask >> k & 1 == 1).collect();
        let sources: Vec<usize> = members
            .iter()
            .map(|&k| node_index(net, &demands[k].source))
            .collect::<Result<_>>()?;
        let mut choice = vec![0usize; members.len()];
        loop {
            let sinks: Vec<NodeId> = members.iter().zip(&choice).map(|(&k, &c)| demands[k].sinks[c].clone()).collect();
            let sink_ix: Vec<usize> = sinks.iter().map(|s| node_index(net, s)).collect::<Result<_>>()?;
            if !sink_ix.iter().any(|t| sources.contains(t)) {
                let (value, side, _) = max_flow_sets(net, &sources, &sink_ix);
                let crossing = net
                    .pipes
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| {
                        let a = net.index_of(&p.tail).expect("tail");
                        let b = net.index_of(&p.heads[0]).expect("head");
                        side[a] && !side[b]
                    })
                    .map(|(e, _)| e)
                    .collect();
                out.push(CutConstraint {
                    demands: members.clone(),
                    sinks,
                    capacity: value,
                    source_side: net.nodes.iter().zip(&side).filter(|(_, &b)| b).map(|(n, _)| n.id.clone()).collect(),
                    pipes: crossing,
                });
            }
            let mut pos = 0;
            loop {
                if pos == members.len() {
                    break;
                }
                choice[pos] += 1;
                if choice[pos] < demands[members[pos]].sinks.len() {
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
            if pos == members.len() {
                break;
            }
        }
    }
    Ok(out)
}

const MAX_EDGE_SET: usize = 2;
const MAX_EDGE_SET_DEMANDS: usize = 12;

/// Edge-set constraints for unicast sessions. After removing a set S of
/// finite pipes, let a → b mean that source a still reaches sink b. A
/// demand subset P with no a → a and no cycle among the a → b relations
/// can be ordered so that no source reaches the sink of any session at or
/// after it, and then Σ_{d∈P} r_d ≤ c(S) (generalized network sharing).
/// Edge sets of up to two pipes are tried; only maximal subsets with at
/// least two sessions are kept, each with its smallest capacity.
pub fn edge_set_constraints(net: &NoiselessNetwork, demands: &[Demand]) -> Result<Vec<CutConstraint>> {
    require_p2p(net)?;
    let k = demands.len();
    if !(2..=MAX_EDGE_SET_DEMANDS).contains(&k) || demands.iter().any(|d| d.sinks.len() != 1) {
        return Ok(Vec::new());
    }
    let n = net.nodes.len();
    let ends: Vec<(usize, usize)> = net
        .pipes
        .iter()
        .map(|p| Ok((node_index(net, &p.tail)?, node_index(net, &p.heads[0])?)))
        .collect::<Result<_>>()?;
    let sources: Vec<usize> = demands.iter().map(|d| node_index(net, &d.source)).collect::<Result<_>>()?;
    let sinks: Vec<usize> = demands.iter().map(|d| node_index(net, &d.sinks[0])).collect::<Result<_>>()?;
    let finite: Vec<usize> = (0..net.pipes.len()).filter(|&e| net.pipes[e].rate.is_finite()).collect();

    let mut sets: Vec<Vec<usize>> = finite.iter().map(|&e| vec![e]).collect();
    if MAX_EDGE_SET >= 2 {
        for (x, &a) in finite.iter().enumerate() {
            for &b in &finite[x + 1..] {
                sets.push(vec![a, b]);
            }
        }
    }
    let mut best: BTreeMap<Vec<usize>, (f64, Vec<usize>)> = BTreeMap::new();
    let mut adj = vec![Vec::new(); n];
    for set in sets {
        for a in adj.iter_mut() {
            a.clear();
        }
        for (e, &(a, b)) in ends.iter().enumerate() {
            if !set.contains(&e) {
                adj[a].push(b);
            }
        }
        let reach: Vec<Vec<bool>> = sources
            .iter()
            .map(|&s| {
                let mut seen = vec![false; n];
                seen[s] = true;
                let mut queue = VecDeque::from([s]);
                while let Some(v) = queue.pop_front() {
                    for &w in &adj[v] {
                        if !seen[w] {
                            seen[w] = true;
                            queue.push_back(w);
                        }
                    }
                }
                sinks.iter().map(|&t| seen[t]).collect()
            })
            .collect();
        let capacity: f64 = set.iter().map(|&e| net.pipes[e].rate).sum();
        for members in maximal_orderable(&reach) {
            if members.len() < 2 {
                continue;
            }
            let entry = best.entry(members).or_insert((f64::INFINITY, Vec::new()));
            if capacity < entry.0 {
                *entry = (capacity, set.clone());
            }
        }
    }
    Ok(best
        .into_iter()
        .map(|(members, (capacity, pipes))| CutConstraint {
            sinks: members.iter().map(|&d| demands[d].sinks[0].clone()).collect(),
            demands: members,
            capacity,
            source_side: Vec::new(),
            pipes,
        })
        .collect())
}

/// Maximal demand subsets whose reachability relation is loop-free and
/// acyclic.
fn maximal_orderable(reach: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let k = reach.len();
    let ok = |mask: u32| -> bool {
        let members: Vec<usize> = (0..k).filter(|&a| mask >> a & 1 == 1).collect();
        if members.iter().any(|&a| reach[a][a]) {
            return false;
        }
        // Kahn's algorithm on the induced relation.
        let mut indeg: BTreeMap<usize, usize> = members.iter().map(|&a| (a, 0)).collect();
        for &a in &members {
            for &b in &members {
                if a != b && reach[a][b] {
                    *indeg.get_mut(&b).expect("member") += 1;
                }
            }
        }
        let mut ready: Vec<usize> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&a, _)| a).collect();
        let mut done = 0;
        while let Some(a) = ready.pop() {
            done += 1;
            for &b in &members {
                if a != b && reach[a][b] {
                    let d = indeg.get_mut(&b).expect("member");
                    *d -= 1;
                    if *d == 0 {
                        ready.push(b);
                    }
                }
            }
        }
        done == members.len()
    };
    let valid: Vec<u32> = (1u32..(1 << k)).filter(|&m| ok(m)).collect();
    valid
        .iter()
        .filter(|&&m| !valid.iter().any(|&o| o != m && o & m == m))
        .map(|&m| (0..k).filter(|&a| m >> a & 1 == 1).collect())
        .collect()
}

/// Largest common rate allowed by the cut constraints.
pub fn outer_symmetric(constraints: &[CutConstraint]) -> Rate {
    constraints
        .iter()
        .map(|c| Rate::from_formula(c.capacity / c.demands.len() as f64))
        .fold(Rate::INFINITE, Rate::min)
}

/// Largest sum rate allowed by the cut constraints.
pub fn outer_sum(constraints: &[CutConstraint], n_demands: usize) -> Result<Rate> {
    let mut bounded = vec![false; n_demands];
    for c in constraints {
        if c.capacity.is_finite() && c.demands.len() == 1 {
            bounded[c.demands[0]] = true;
        }
    }
    if bounded.iter().any(|b| !b) {
        return Ok(Rate::INFINITE);
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let r: Vec<Variable> = (0..n_demands).map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect();
    for c in constraints.iter().filter(|c| c.capacity.is_finite()) {
        let terms: Vec<(Variable, f64)> = c.demands.iter().map(|&d| (r[d], 1.0)).collect();
        lp.add_constraint(&terms[..], ComparisonOp::Le, c.capacity);
    }
    let sol = lp.solve().map_err(|e| Error::Lp(e.to_string()))?;
    // The optimum is attained at a constraint; report that constraint's
    // capacity-limited value to stay on the safe side of round-off.
    let value = sol.objective();
    Ok(Rate::from_formula(value))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Objective {
    /// Maximize Σ r_d.
    Sum,
    /// Maximize a common rate r_d = λ.
    Symmetric,
    /// Maximize r_k alone; other demands are idle.
    Single(usize),
}

/// Per-session routing certificate for `hyper_inner`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowWitness {
    /// usage[d][e]: session d's draw on pipe e.
    pub usage: Vec<Vec<f64>>,
    /// flows[d][t]: (pipe, head index, amount) for sink t of session d.
    pub flows: Vec<Vec<Vec<(usize, usize, f64)>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerResult {
    pub rates: Vec<Rate>,
    pub objective: f64,
    pub witness: FlowWitness,
}

impl InnerResult {
    pub fn flow_results(&self, demands: &[Demand]) -> Vec<FlowResult> {
        demands
            .iter()
            .zip(&self.rates)
            .enumerate()
            .map(|(d, (dem, &rate))| FlowResult {
                demand: dem.clone(),
                rate,
                witness: Witness::Flow {
                    pipe_flow: self.witness.usage[d].clone(),
                },
            })
            .collect()
    }
}

struct Topology {
    n: usize,
    tails: Vec<usize>,
    heads: Vec<Vec<usize>>,
}

impl Topology {
    fn new(net: &NoiselessNetwork) -> Result<Topology> {
        let ix: BTreeMap<&NodeId, usize> = net.nodes.iter().enumerate().map(|(k, n)| (&n.id, k)).collect();
        let lookup = |id: &NodeId| {
            ix.get(id)
                .copied()
                .ok_or_else(|| Error::WrongNetwork(format!("pipe endpoint {id} is not a node")))
        };
        let mut tails = Vec::new();
        let mut heads = Vec::new();
        for p in &net.pipes {
            if !(p.rate >= 0.0) {
                return Err(Error::WrongNetwork(format!("pipe rate {} is invalid", p.rate)));
            }
            tails.push(lookup(&p.tail)?);
            heads.push(p.heads.iter().map(lookup).collect::<Result<Vec<_>>>()?);
        }
        Ok(Topology {
            n: net.nodes.len(),
            tails,
            heads,
        })
    }

    fn forward(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[s] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for (e, &t) in self.tails.iter().enumerate() {
                if seen[t] {
                    for &h in &self.heads[e] {
                        if !seen[h] {
                            seen[h] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        seen
    }

    fn backward(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[t] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for (e, &tail) in self.tails.iter().enumerate() {
                if !seen[tail] && self.heads[e].iter().any(|&h| seen[h]) {
                    seen[tail] = true;
                    changed = true;
                }
            }
        }
        seen
    }
}

const WITNESS_TOL: f64 = 1e-9;

/// Routing LP inner bound. The returned witness is cleaned (negatives
/// clipped, usage raised to cover every sink's flow, everything scaled down
/// if round-off pushed a capacity over) and satisfies
/// `validate_inner_witness` exactly up to 1e−9.
pub fn hyper_inner(net: &NoiselessNetwork, demands: &[Demand], objective: &Objective) -> Result<InnerResult> {
    if demands.is_empty() {
        return Err(Error::Config("no demands to route".into()));
    }
    if let Objective::Single(k) = objective {
        if *k >= demands.len() {
            return Err(Error::Config(format!("demand index {k} out of range")));
        }
    }
    if let Some((d, _)) = demands.iter().enumerate().find(|(_, d)| d.sinks.contains(&d.source)) {
        return Err(Error::Config(format!("demand {d} lists its source as a sink")));
    }
    let topo = Topology::new(net)?;
    let active: Vec<bool> = (0..demands.len())
        .map(|d| match objective {
            Objective::Single(k) => d == *k,
            _ => true,
        })
        .collect();

    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let lambda = match objective {
        Objective::Symmetric => Some(lp.add_var(1.0, (0.0, f64::INFINITY))),
        _ => None,
    };
    let mut rate_var = Vec::new();
    for &on in &active {
        rate_var.push(match (lambda, on) {
            (_, false) => None,
            (Some(l), true) => Some(l),
            (None, true) => Some(lp.add_var(1.0, (0.0, f64::INFINITY))),
        });
    }

    let mut usage_var: Vec<Vec<Option<Variable>>> = vec![vec![None; net.pipes.len()]; demands.len()];
    let mut flow_var: Vec<Vec<Vec<(usize, usize, Variable)>>> = vec![Vec::new(); demands.len()];
    for (d, dem) in demands.iter().enumerate() {
        let Some(r) = rate_var[d] else { continue };
        let s = node_index(net, &dem.source)?;
        let fwd = topo.forward(s);
        for sink in &dem.sinks {
            let t = node_index(net, sink)?;
            let back = topo.backward(t);
            let mut vars = Vec::new();
            let mut balance: Vec<Vec<(Variable, f64)>> = vec![Vec::new(); topo.n];
            for e in 0..net.pipes.len() {
                let tail = topo.tails[e];
                if !fwd[tail] || !back[tail] || tail == t {
                    continue;
                }
                let mut terms = Vec::new();
                for (hk, &h) in topo.heads[e].iter().enumerate() {
                    if !back[h] || h == s {
                        continue;
                    }
                    let f = lp.add_var(0.0, (0.0, f64::INFINITY));
                    vars.push((e, hk, f));
                    terms.push((f, 1.0));
                    balance[h].push((f, 1.0));
                    balance[tail].push((f, -1.0));
                }
                if terms.is_empty() {
                    continue;
                }
                let x = *usage_var[d][e].get_or_insert_with(|| lp.add_var(0.0, (0.0, f64::INFINITY)));
                terms.push((x, -1.0));
                lp.add_constraint(&terms[..], ComparisonOp::Le, 0.0);
            }
            for v in 0..topo.n {
                if v == s {
                    continue;
                }
                let mut terms = balance[v].clone();
                if v == t {
                    terms.push((r, -1.0));
                } else if terms.is_empty() {
                    continue;
                }
                lp.add_constraint(&terms[..], ComparisonOp::Eq, 0.0);
            }
            flow_var[d].push(vars);
        }
    }
    for (e, p) in net.pipes.iter().enumerate() {
        let terms: Vec<(Variable, f64)> = (0..demands.len()).filter_map(|d| usage_var[d][e].map(|x| (x, 1.0))).collect();
        if !terms.is_empty() && p.rate.is_finite() {
            lp.add_constraint(&terms[..], ComparisonOp::Le, p.rate);
        }
    }
    for c in &net.joint_caps {
        let terms: Vec<(Variable, f64)> = c
            .pipes
            .iter()
            .flat_map(|&e| (0..demands.len()).map(move |d| (d, e)))
            .filter_map(|(d, e)| usage_var[d].get(e).copied().flatten().map(|x| (x, 1.0)))
            .collect();
        if !terms.is_empty() && c.rate.is_finite() {
            lp.add_constraint(&terms[..], ComparisonOp::Le, c.rate);
        }
    }

    let sol = match lp.solve() {
        Ok(s) => s,
        Err(minilp::Error::Unbounded) => {
            let rates = (0..demands.len())
                .map(|d| if active[d] { Rate::INFINITE } else { Rate::ZERO })
                .collect();
            return Ok(InnerResult {
                rates,
                objective: f64::INFINITY,
                witness: FlowWitness {
                    usage: vec![vec![0.0; net.pipes.len()]; demands.len()],
                    flows: vec![Vec::new(); demands.len()],
                },
            });
        }
        Err(e) => return Err(Error::Lp(e.to_string())),
    };

    let mut usage = vec![vec![0.0; net.pipes.len()]; demands.len()];
    let mut flows: Vec<Vec<Vec<(usize, usize, f64)>>> = vec![Vec::new(); demands.len()];
    for d in 0..demands.len() {
        for vars in &flow_var[d] {
            let list: Vec<(usize, usize, f64)> = vars
                .iter()
                .map(|&(e, hk, v)| (e, hk, sol[v].max(0.0)))
                .filter(|&(_, _, f)| f > 0.0)
                .collect();
            let mut per_pipe = vec![0.0; net.pipes.len()];
            for &(e, _, f) in &list {
                per_pipe[e] += f;
            }
            for e in 0..net.pipes.len() {
                usage[d][e] = f64::max(usage[d][e], per_pipe[e]);
            }
            flows[d].push(list);
        }
    }
    let mut rates: Vec<f64> = (0..demands.len()).map(|d| rate_var[d].map_or(0.0, |v| sol[v].max(0.0))).collect();

    // Scale down if round-off put any capacity over its limit.
    let mut theta: f64 = 1.0;
    for (e, p) in net.pipes.iter().enumerate() {
        let u: f64 = (0..demands.len()).map(|d| usage[d][e]).sum();
        if p.rate.is_finite() && u > p.rate {
            theta = theta.min(p.rate / u);
        }
    }
    for c in &net.joint_caps {
        let u: f64 = c.pipes.iter().map(|&e| (0..demands.len()).map(|d| usage[d][e]).sum::<f64>()).sum();
        if c.rate.is_finite() && u > c.rate {
            theta = theta.min(c.rate / u);
        }
    }
    if theta < 1.0 {
        let shrink = theta * (1.0 - 4.0 * f64::EPSILON);
        usage.iter_mut().flatten().for_each(|x| *x *= shrink);
        flows.iter_mut().flatten().flatten().for_each(|f| f.2 *= shrink);
        rates.iter_mut().for_each(|r| *r *= shrink);
    }
    // A session's rate is what every sink actually receives.
    for d in 0..demands.len() {
        if rate_var[d].is_none() {
            continue;
        }
        for (ti, sink) in demands[d].sinks.iter().enumerate() {
            let t = node_index(net, sink)?;
            let inflow: f64 = flows[d][ti]
                .iter()
                .filter(|&&(e, hk, _)| topo.heads[e][hk] == t)
                .map(|&(_, _, f)| f)
                .sum::<f64>()
                - flows[d][ti]
                    .iter()
                    .filter(|&&(e, _, _)| topo.tails[e] == t)
                    .map(|&(_, _, f)| f)
                    .sum::<f64>();
            if (inflow - rates[d]).abs() > WITNESS_TOL {
                return Err(Error::Lp(format!(
                    "flow to {sink} is {inflow}, expected {} (solver tolerance exceeded)",
                    rates[d]
                )));
            }
        }
    }
    let objective_value = match objective {
        Objective::Sum => rates.iter().sum(),
        Objective::Symmetric => rates.iter().cloned().fold(f64::INFINITY, f64::min),
        Objective::Single(k) => rates[*k],
    };
    Ok(InnerResult {
        rates: rates.iter().map(|&r| Rate::from_formula(r)).collect(),
        objective: objective_value,
        witness: FlowWitness { usage, flows },
    })
}

/// Re-checks an inner-bound witness against the network without trusting
/// the solver. Returns every violation above 1e−9.
pub fn validate_inner_witness(net: &NoiselessNetwork, demands: &[Demand], result: &InnerResult) -> Vec<String> {
    let mut out = Vec::new();
    let topo = match Topology::new(net) {
        Ok(t) => t,
        Err(e) => return vec![e.to_string()],
    };
    let w = &result.witness;
    if w.usage.len() != demands.len() || result.rates.len() != demands.len() {
        return vec!["witness does not match the demand list".into()];
    }
    for (d, dem) in demands.iter().enumerate() {
        let r = result.rates[d].bits();
        if r == 0.0 && w.flows[d].is_empty() {
            continue;
        }
        if w.flows[d].len() != dem.sinks.len() {
            out.push(format!("demand {d}: {} sink flows for {} sinks", w.flows[d].len(), dem.sinks.len()));
            continue;
        }
        let Some(s) = net.index_of(&dem.source) else {
            out.push(format!("demand {d}: unknown source"));
            continue;
        };
        for (ti, sink) in dem.sinks.iter().enumerate() {
            let Some(t) = net.index_of(sink) else {
                out.push(format!("demand {d}: unknown sink {sink}"));
                continue;
            };
            let mut bal = vec![0.0; topo.n];
            let mut per_pipe = vec![0.0; net.pipes.len()];
            for &(e, hk, f) in &w.flows[d][ti] {
                if e >= net.pipes.len() || hk >= topo.heads[e].len() {
                    out.push(format!("demand {d}, sink {sink}: bad pipe reference {e}/{hk}"));
                    continue;
                }
                if f < 0.0 {
                    out.push(format!("demand {d}, sink {sink}: negative flow {f}"));
                }
                bal[topo.heads[e][hk]] += f;
                bal[topo.tails[e]] -= f;
                per_pipe[e] += f;
            }
            for v in 0..topo.n {
                let expect = if v == t {
                    r
                } else if v == s {
                    -r
                } else {
                    0.0
                };
                if (bal[v] - expect).abs() > WITNESS_TOL {
                    out.push(format!(
                        "demand {d}, sink {sink}: node {} balance {} expected {expect}",
                        net.nodes[v].id, bal[v]
                    ));
                }
            }
            for e in 0..net.pipes.len() {
                if per_pipe[e] > w.usage[d][e] + WITNESS_TOL {
                    out.push(format!(
                        "demand {d}, sink {sink}: pipe {e} flow {} exceeds usage {}",
                        per_pipe[e], w.usage[d][e]
                    ));
                }
            }
        }
    }
    for (e, p) in net.pipes.iter().enumerate() {
        let u: f64 = w.usage.iter().map(|row| row[e]).sum();
        if u > p.rate + WITNESS_TOL {
            out.push(format!("pipe {e}: usage {u} exceeds rate {}", p.rate));
        }
    }
    for (k, c) in net.joint_caps.iter().enumerate() {
        let u: f64 = c.pipes.iter().map(|&e| w.usage.iter().map(|row| row[e]).sum::<f64>()).sum();
        if u > c.rate + WITNESS_TOL {
            out.push(format!("joint cap {k}: usage {u} exceeds rate {}", c.rate));
        }
    }
    out
}

/// One evaluated parameter point: a description and one value per metric.
#[derive(Clone, Debug, PartialEq)]
pub struct Run {
    pub params: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub labels: Vec<String>,
    pub outer: Vec<f64>,
    pub outer_params: Vec<String>,
    pub inner: Vec<f64>,
    pub inner_params: Vec<String>,
    /// Vertices of the achievable 2-demand region, sorted by the first rate.
    pub hull: Option<Vec<(f64, f64)>>,
}

impl BoundReport {
    pub fn gaps(&self) -> Vec<f64> {
        self.outer.iter().zip(&self.inner).map(|(o, i)| o - i).collect()
    }
}

/// Pointwise min over outer runs, pointwise max over inner runs.
pub fn combine_bounds(labels: &[String], outer_runs: &[Run], inner_runs: &[Run], want_hull: bool) -> Result<BoundReport> {
    let k = labels.len();
    for r in outer_runs.iter().chain(inner_runs) {
        if r.values.len() != k {
            return Err(Error::Config(format!(
                "run {:?} has {} values for {k} demands",
                r.params,
                r.values.len()
            )));
        }
    }
    let mut outer = vec![f64::INFINITY; k];
    let mut outer_params = vec![String::new(); k];
    for r in outer_runs {
        for j in 0..k {
            if r.values[j] < outer[j] || outer_params[j].is_empty() && r.values[j] <= outer[j] {
                outer[j] = r.values[j];
                outer_params[j] = r.params.clone();
            }
        }
    }
    let mut inner = vec![0.0; k];
    let mut inner_params = vec![String::new(); k];
    for r in inner_runs {
        for j in 0..k {
            if r.values[j] > inner[j] || inner_params[j].is_empty() && r.values[j] >= inner[j] {
                inner[j] = r.values[j];
                inner_params[j] = r.params.clone();
            }
        }
    }
    let hull = if want_hull {
        if k != 2 {
            return Err(Error::Config("a region hull needs exactly two demands".into()));
        }
        Some(upper_hull(inner_runs.iter().map(|r| (r.values[0], r.values[1])).collect()))
    } else {
        None
    };
    Ok(BoundReport {
        labels: labels.to_vec(),
        outer,
        outer_params,
        inner,
        inner_params,
        hull,
    })
}

/// Pareto vertices of the convex hull of the points and their projections.
fn upper_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mx = pts.iter().map(|p| p.0).fold(0.0, f64::max);
    let my = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    pts.push((0.0, my));
    pts.push((mx, 0.0));
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(b.1.partial_cmp(&a.1).unwrap()));
    let mut h: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while h.len() >= 2 {
            let (a, b) = (h[h.len() - 2], h[h.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                h.pop();
            } else {
                break;
            }
        }
        h.push(p);
    }
    let mut out: Vec<(f64, f64)> = Vec::new();
    for p in h {
        if out.last().is_none_or(|q| p.1 < q.1 || p.0 > q.0 && p.1 <= q.1) {
            out.push(p);
        }
    }
    out.retain(|p| p.0 >= 0.0 && p.1 >= 0.0);
    out
}

/// A terminal-only network from (tail, head, rate) triples.
pub fn simple_network(edges: &[(&str, &str, f64)]) -> NoiselessNetwork {
    let mut net = NoiselessNetwork::new();
    for &(a, b, r) in edges {
        net.add_node(a.into(), NodeKind::Terminal);
        net.add_node(b.into(), NodeKind::Terminal);
        net.add_pipe(a.into(), vec![b.into()], r, "test pipe");
    }
    net
}
