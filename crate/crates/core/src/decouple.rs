//! Channel decoupling.
//!
//! Gaussian links form a bipartite transmitter/receiver incidence graph.
//! Each connected piece is a point-to-point link, an independent MAC, an
//! independent BC, or a coupled piece that is split into one decoupled MAC
//! per multi-input receiver and one decoupled BC per broadcasting
//! transmitter. Discrete links are orthogonal side channels and always stand
//! alone. Decoupled BCs see inflated SNRs γ/α from a noise partition shared
//! across the coupled piece; decoupled MACs keep the original SNRs.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::netmodel::{NodeId, NoisyNetwork};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComponentKind {
    P2p,
    Mac,
    Bc,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecoupledComponent {
    pub kind: ComponentKind,
    pub input_nodes: Vec<NodeId>,
    pub output_nodes: Vec<NodeId>,
    /// Indices into the network's link list.
    pub links: Vec<usize>,
    /// SNR seen by this component per link index.
    pub effective_snrs: BTreeMap<usize, f64>,
    /// True when the component came out of a coupled piece.
    pub coupled: bool,
    /// Links also used by another component, with that component's index.
    pub shared: Vec<(usize, usize)>,
}

impl DecoupledComponent {
    pub fn label(&self) -> String {
        let names = |v: &[NodeId]| v.iter().map(|n| n.as_str()).collect::<Vec<_>>().join(",");
        let kind = match self.kind {
            ComponentKind::P2p => "p2p",
            ComponentKind::Mac => "mac",
            ComponentKind::Bc => "bc",
        };
        let tag = if self.coupled { "decoupled " } else { "" };
        format!("{tag}{kind} [{}] -> [{}]", names(&self.input_nodes), names(&self.output_nodes))
    }
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

fn push_unique(v: &mut Vec<NodeId>, n: &NodeId) {
    if !v.contains(n) {
        v.push(n.clone());
    }
}

/// Splits the network into components. Fails only if a noise partition
/// does not converge.
pub fn decompose(net: &NoisyNetwork) -> Result<Vec<DecoupledComponent>> {
    let node_ix: BTreeMap<&NodeId, usize> = net.nodes.iter().enumerate().map(|(k, n)| (n, k)).collect();
    let nn = net.nodes.len();
    // Vertices: transmitter side 0..nn, receiver side nn..2nn.
    let mut parent: Vec<usize> = (0..2 * nn).collect();
    let gaussian: Vec<usize> = (0..net.links.len()).filter(|&k| net.links[k].channel.is_gaussian()).collect();
    for &k in &gaussian {
        let l = &net.links[k];
        let a = find(&mut parent, node_ix[&l.from]);
        let b = find(&mut parent, nn + node_ix[&l.to]);
        parent[a] = b;
    }

    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for &k in &gaussian {
        let root = find(&mut parent, node_ix[&net.links[k].from]);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, v)) => v.push(k),
            None => groups.push((root, vec![k])),
        }
    }

    let mut out = Vec::new();
    let mut group_at_link: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, l) in net.links.iter().enumerate() {
        if !l.channel.is_gaussian() {
            out.push(p2p(net, k));
            continue;
        }
        if group_at_link.contains_key(&k) {
            continue;
        }
        let (_, links) = groups.iter().find(|(_, v)| v.contains(&k)).expect("gaussian link is grouped");
        for &j in links {
            group_at_link.insert(j, k);
        }
        out.extend(classify(net, links)?);
    }

    // Cross-reference links that appear on both sides.
    let mut owners: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (c, comp) in out.iter().enumerate() {
        for &l in &comp.links {
            owners.entry(l).or_default().push(c);
        }
    }
    for (l, cs) in owners {
        if cs.len() == 2 {
            out[cs[0]].shared.push((l, cs[1]));
            out[cs[1]].shared.push((l, cs[0]));
        }
    }
    Ok(out)
}

fn p2p(net: &NoisyNetwork, k: usize) -> DecoupledComponent {
    let l = &net.links[k];
    DecoupledComponent {
        kind: ComponentKind::P2p,
        input_nodes: vec![l.from.clone()],
        output_nodes: vec![l.to.clone()],
        links: vec![k],
        effective_snrs: l.snr().map(|s| BTreeMap::from([(k, s)])).unwrap_or_default(),
        coupled: false,
        shared: Vec::new(),
    }
}

fn classify(net: &NoisyNetwork, links: &[usize]) -> Result<Vec<DecoupledComponent>> {
    if links.len() == 1 {
        return Ok(vec![p2p(net, links[0])]);
    }
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for &k in links {
        push_unique(&mut inputs, &net.links[k].from);
        push_unique(&mut outputs, &net.links[k].to);
    }
    let snrs = |ks: &[usize]| -> BTreeMap<usize, f64> { ks.iter().map(|&k| (k, net.links[k].snr().expect("gaussian"))).collect() };
    if outputs.len() == 1 {
        return Ok(vec![DecoupledComponent {
            kind: ComponentKind::Mac,
            input_nodes: inputs,
            output_nodes: outputs,
            links: links.to_vec(),
            effective_snrs: snrs(links),
            coupled: false,
            shared: Vec::new(),
        }]);
    }
    if inputs.len() == 1 {
        return Ok(vec![DecoupledComponent {
            kind: ComponentKind::Bc,
            input_nodes: inputs,
            output_nodes: outputs,
            links: links.to_vec(),
            effective_snrs: snrs(links),
            coupled: false,
            shared: Vec::new(),
        }]);
    }

    let mut gamma = Array2::zeros((inputs.len(), outputs.len()));
    for &k in links {
        let l = &net.links[k];
        let i = inputs.iter().position(|n| *n == l.from).expect("input");
        let j = outputs.iter().position(|n| *n == l.to).expect("output");
        gamma[[i, j]] = l.snr().expect("gaussian");
    }
    let partition = gauss_noise_partition(&gamma, DEFAULT_PARTITION_TOL)?;
    let eff = decoupled_bc_snrs(&partition, &gamma);

    let mut comps = Vec::new();
    for out_node in &outputs {
        let ks: Vec<usize> = links.iter().copied().filter(|&k| net.links[k].to == *out_node).collect();
        if ks.len() < 2 {
            continue;
        }
        comps.push(DecoupledComponent {
            kind: ComponentKind::Mac,
            input_nodes: ks.iter().map(|&k| net.links[k].from.clone()).collect(),
            output_nodes: vec![out_node.clone()],
            effective_snrs: snrs(&ks),
            links: ks,
            coupled: true,
            shared: Vec::new(),
        });
    }
    for (i, in_node) in inputs.iter().enumerate() {
        let ks: Vec<usize> = links.iter().copied().filter(|&k| net.links[k].from == *in_node).collect();
        if ks.len() < 2 {
            continue;
        }
        let effective_snrs = ks
            .iter()
            .map(|&k| {
                let j = outputs.iter().position(|n| *n == net.links[k].to).expect("output");
                (k, eff[[i, j]])
            })
            .collect();
        comps.push(DecoupledComponent {
            kind: ComponentKind::Bc,
            input_nodes: vec![in_node.clone()],
            output_nodes: ks.iter().map(|&k| net.links[k].to.clone()).collect(),
            links: ks,
            effective_snrs,
            coupled: true,
            shared: Vec::new(),
        });
    }
    Ok(comps)
}

pub const DEFAULT_PARTITION_TOL: f64 = 1e-12;
const PARTITION_MAX_ITER: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct GaussPartition {
    /// α_{i,j}; zero where input i does not reach output j.
    pub alphas: Array2<f64>,
    pub lambdas: Vec<f64>,
    pub mus: Vec<f64>,
    /// Largest relative violation of μ_i = 1 + Σ_j γ_{i,j}/α_{i,j}.
    pub residual: f64,
    pub iterations: usize,
    /// Residual after each iteration.
    pub history: Vec<f64>,
}

fn fixed_point_residual(sqrt_g: &Array2<f64>, sm: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
    let (n, m) = sqrt_g.dim();
    let sl: Vec<f64> = (0..m).map(|j| (0..n).map(|i| sqrt_g[[i, j]] / sm[i]).sum()).collect();
    let t: Vec<f64> = (0..n).map(|i| (0..m).map(|j| sqrt_g[[i, j]] * sl[j]).sum()).collect();
    let residual = (0..n)
        .map(|i| ((sm[i] * sm[i] - 1.0 - t[i] * sm[i]) / (sm[i] * sm[i])).abs())
        .fold(0.0, f64::max);
    (sl, t, residual)
}

/// Minimizes Σ_i log(1 + Σ_j γ_{i,j}/α_{i,j}) subject to unit column sums by
/// alternating the λ and μ updates (damped in √μ) until √μ moves by less
/// than `tol` (relative).
pub fn gauss_noise_partition(gamma: &Array2<f64>, tol: f64) -> Result<GaussPartition> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let (n, m) = gamma.dim();
    if gamma.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
        return Err(Error::Domain("SNR matrix entries must be finite and nonnegative".into()));
    }
    for j in 0..m {
        if (0..n).all(|i| gamma[[i, j]] == 0.0) {
            return Err(Error::Domain(format!("output {j} is reached by no input")));
        }
    }
    let sqrt_g = gamma.mapv(f64::sqrt);
    let mut sm: Vec<f64> = (0..n).map(|i| (1.0 + gamma.row(i).sum()).sqrt()).collect();
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let (_, t, residual) = fixed_point_residual(&sqrt_g, &sm);
        history.push(residual);
        // The raw update is a decreasing map and oscillates; the geometric
        // mean with the current iterate has the same fixed point.
        let next: Vec<f64> = t
            .iter()
            .zip(&sm)
            .map(|(&ti, &s)| (s * 0.5 * ((ti * ti + 4.0).sqrt() + ti)).sqrt())
            .collect();
        let change = next.iter().zip(&sm).map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max);
        sm = next;
        iterations += 1;
        if change < tol {
            break;
        }
        if iterations >= PARTITION_MAX_ITER {
            let (_, _, residual) = fixed_point_residual(&sqrt_g, &sm);
            return Err(Error::NoConvergence {
                iterations,
                lower: 0.0,
                upper: residual,
            });
        }
    }
    let (sl, _, residual) = fixed_point_residual(&sqrt_g, &sm);
    history.push(residual);
    let alphas = Array2::from_shape_fn((n, m), |(i, j)| {
        if gamma[[i, j]] > 0.0 {
            sqrt_g[[i, j]] / (sl[j] * sm[i])
        } else {
            0.0
        }
    });
    Ok(GaussPartition {
        alphas,
        lambdas: sl.iter().map(|s| s * s).collect(),
        mus: sm.iter().map(|s| s * s).collect(),
        residual,
        iterations,
        history,
    })
}

/// Σ_i log2(1 + Σ_j γ_{i,j}/α_{i,j}) over existing links.
pub fn partition_objective(gamma: &Array2<f64>, alphas: &Array2<f64>) -> f64 {
    let (n, m) = gamma.dim();
    (0..n)
        .map(|i| {
            let s: f64 = (0..m)
                .filter(|&j| gamma[[i, j]] > 0.0)
                .map(|j| gamma[[i, j]] / alphas[[i, j]])
                .sum();
            (1.0 + s).log2()
        })
        .sum()
}

/// Effective SNRs γ/α for the decoupled BCs (zero where no link exists).
pub fn decoupled_bc_snrs(partition: &GaussPartition, gamma: &Array2<f64>) -> Array2<f64> {
    Array2::from_shape_fn(gamma.dim(), |(i, j)| {
        if gamma[[i, j]] > 0.0 {
            gamma[[i, j]] / partition.alphas[[i, j]]
        } else {
            0.0
        }
    })
}

/// Source share of the destination noise in the relay channel.
pub fn relay_closed_form_alpha(gamma_sd: f64, gamma_sr: f64, gamma_rd: f64) -> f64 {
    let a = (gamma_sd * (1.0 + gamma_rd)).sqrt();
    let b = (gamma_rd * (1.0 + gamma_sr + gamma_sd)).sqrt();
    a / (a + b)
}
