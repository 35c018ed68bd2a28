//! Assembly of the noiseless bounding networks.
//!
//! Upper network: every MAC gets an auxiliary node `mac:<receiver>` fed by
//! per-input pipes and draining through a sum-rate pipe; every BC gets an
//! auxiliary node `bc:<transmitter>` fed by a sum-rate pipe and fanning out
//! through per-receiver pipes. A link seen by both a BC and a MAC becomes a
//! single `bc:* -> mac:*` pipe carrying the larger of the two rates.
//!
//! Lower network: each BC becomes one hyper-arc per superposition layer,
//! re-rated for the interference its receivers still see; each MAC receiver
//! contributes a joint cap forcing it to decode every stream routed to it.
//! Undecoded power is tracked in an [`InterferenceLedger`].

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::bc_models::{bc_upper_new, beta_grid, sorted_order, BcSpec};
use crate::decouple::{ComponentKind, DecoupledComponent};
use crate::error::{Error, Result};
use crate::info::half_log2_1p;
use crate::mac_models::{mac_upper_new, MacSpec};
use crate::netmodel::{NodeId, NodeKind, NoiselessNetwork, NoisyNetwork};

/// Per-component choices for the upper network, keyed by component index.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct UpperParams {
    pub mac_alpha: BTreeMap<usize, f64>,
    /// Permutation over the BC's output list (see `bc_upper_new`).
    pub bc_perm: BTreeMap<usize, Vec<usize>>,
}

impl UpperParams {
    /// α = 1 everywhere and receivers in SNR-descending order.
    pub fn defaults(net: &NoisyNetwork, comps: &[DecoupledComponent]) -> UpperParams {
        let mut p = UpperParams::default();
        for (c, comp) in comps.iter().enumerate() {
            match comp.kind {
                ComponentKind::Mac => {
                    p.mac_alpha.insert(c, 1.0);
                }
                ComponentKind::Bc => {
                    let mut order = sorted_order(&component_snrs(net, comp));
                    order.reverse();
                    p.bc_perm.insert(c, order);
                }
                ComponentKind::P2p => {}
            }
        }
        p
    }

    pub fn label(&self) -> String {
        let alphas: BTreeSet<String> = self.mac_alpha.values().map(|a| format!("{a}")).collect();
        let mut parts = Vec::new();
        if !alphas.is_empty() {
            parts.push(format!("alpha={}", alphas.into_iter().collect::<Vec<_>>().join("/")));
        }
        for (c, p) in &self.bc_perm {
            let p: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            parts.push(format!("perm{c}=({})", p.join(" ")));
        }
        if parts.is_empty() {
            return "none".into();
        }
        parts.join(";")
    }
}

/// How a MAC receiver orders its decoding in the lower network.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum MacDecoding {
    /// Two-input pentagon: each input is rated with the other's stream
    /// removed, jointly limited by the sum rate.
    TimeShare,
    /// Successive cancellation; entry 0 is decoded first. Indices refer to
    /// the component's input list.
    Order(Vec<usize>),
}

/// Per-component choices for the lower network, keyed by component index.
/// Layer targets are not a free choice: the layer powered by `betas[k]`
/// goes to output k and every output with a larger SNR.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LowerParams {
    /// Power split over the BC's output list, summing to 1.
    pub bc_betas: BTreeMap<usize, Vec<f64>>,
    pub mac_decoding: BTreeMap<usize, MacDecoding>,
}

impl LowerParams {
    /// All power on the layer every receiver decodes; pentagon decoding for
    /// two-input MACs, SNR-descending cancellation otherwise.
    pub fn defaults(net: &NoisyNetwork, comps: &[DecoupledComponent]) -> LowerParams {
        let mut p = LowerParams::default();
        for (c, comp) in comps.iter().enumerate() {
            match comp.kind {
                ComponentKind::Bc => {
                    let snrs = component_snrs(net, comp);
                    let mut betas = vec![0.0; snrs.len()];
                    betas[sorted_order(&snrs)[0]] = 1.0;
                    p.bc_betas.insert(c, betas);
                }
                ComponentKind::Mac => {
                    p.mac_decoding.insert(c, mac_choices(net, comp)[0].clone());
                }
                ComponentKind::P2p => {}
            }
        }
        p
    }

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        for (c, b) in &self.bc_betas {
            let b: Vec<String> = b.iter().map(|x| format!("{x}")).collect();
            parts.push(format!("beta{c}=({})", b.join(" ")));
        }
        for (c, d) in &self.mac_decoding {
            match d {
                MacDecoding::TimeShare => parts.push(format!("mac{c}=ts")),
                MacDecoding::Order(o) => {
                    let o: Vec<String> = o.iter().map(|x| x.to_string()).collect();
                    parts.push(format!("mac{c}=order({})", o.join(" ")));
                }
            }
        }
        if parts.is_empty() {
            return "none".into();
        }
        parts.join(";")
    }
}

/// Undecoded power bookkeeping for the lower network.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct InterferenceLedger {
    /// Γ_ij: power of transmitter i's layers that receiver j does not decode.
    pub gamma: BTreeMap<(NodeId, NodeId), f64>,
    /// P^I_j = Σ_k Γ_kj.
    pub pi_j: BTreeMap<NodeId, f64>,
    /// P^I_{i,j}: interference on i's streams while j decodes them.
    pub pi_ij: BTreeMap<(NodeId, NodeId), f64>,
}

/// Original SNRs of a MAC or BC component in its input (MAC) or output
/// (BC) order.
pub fn component_snrs(net: &NoisyNetwork, comp: &DecoupledComponent) -> Vec<f64> {
    comp.links.iter().map(|&k| net.links[k].snr().unwrap_or(0.0)).collect()
}

fn effective(comp: &DecoupledComponent) -> Vec<f64> {
    comp.links.iter().map(|&k| comp.effective_snrs[&k]).collect()
}

fn aux(prefix: &str, id: &NodeId) -> NodeId {
    NodeId::new(format!("{prefix}:{id}"))
}

fn terminal_network(net: &NoisyNetwork) -> Result<NoiselessNetwork> {
    let mut out = NoiselessNetwork::new();
    for n in &net.nodes {
        if n.as_str().starts_with("mac:") || n.as_str().starts_with("bc:") {
            return Err(Error::Config(format!("node id {n} collides with auxiliary node names")));
        }
        out.add_node(n.clone(), NodeKind::Terminal);
    }
    Ok(out)
}

fn add_p2p(out: &mut NoiselessNetwork, net: &NoisyNetwork, comp: &DecoupledComponent) -> Result<()> {
    let k = comp.links[0];
    let l = &net.links[k];
    let rate = l.channel.capacity()?.bits();
    out.add_pipe(
        l.from.clone(),
        vec![l.to.clone()],
        rate,
        format!("link {k} {}->{} {} capacity", l.from, l.to, l.channel.kind_name()),
    );
    Ok(())
}

/// Upper bounding network. Point-to-point pipes only.
pub fn build_upper(net: &NoisyNetwork, comps: &[DecoupledComponent], params: &UpperParams) -> Result<NoiselessNetwork> {
    let mut out = terminal_network(net)?;
    // Per-link side rates: (value, provenance).
    let mut bc_side: BTreeMap<usize, (f64, String)> = BTreeMap::new();
    let mut mac_side: BTreeMap<usize, (f64, String)> = BTreeMap::new();
    for (c, comp) in comps.iter().enumerate() {
        match comp.kind {
            ComponentKind::P2p => add_p2p(&mut out, net, comp)?,
            ComponentKind::Mac => {
                let alpha = *params
                    .mac_alpha
                    .get(&c)
                    .ok_or_else(|| Error::Config(format!("no alpha for component {c} ({})", comp.label())))?;
                let (rv, _) = mac_upper_new(&MacSpec::gaussian(&effective(comp))?, alpha)?;
                let j = &comp.output_nodes[0];
                let node = aux("mac", j);
                out.add_node(node.clone(), NodeKind::Auxiliary);
                out.add_pipe(node, vec![j.clone()], rv.sum_rate.bits(), format!("{} at {j}", rv.sum_label));
                for (i, &k) in comp.links.iter().enumerate() {
                    mac_side.insert(k, (rv.individual[i].bits(), rv.labels[i].clone()));
                }
            }
            ComponentKind::Bc => {
                let perm = params
                    .bc_perm
                    .get(&c)
                    .ok_or_else(|| Error::Config(format!("no permutation for component {c} ({})", comp.label())))?;
                let rv = bc_upper_new(&BcSpec::gaussian(&effective(comp))?, perm)?;
                let i = &comp.input_nodes[0];
                let node = aux("bc", i);
                out.add_node(node.clone(), NodeKind::Auxiliary);
                out.add_pipe(i.clone(), vec![node], rv.sum_rate.bits(), format!("{} at {i}", rv.sum_label));
                for (o, &k) in comp.links.iter().enumerate() {
                    bc_side.insert(k, (rv.individual[o].bits(), rv.labels[o].clone()));
                }
            }
        }
    }
    let linked: BTreeSet<usize> = bc_side.keys().chain(mac_side.keys()).copied().collect();
    for k in linked {
        let l = &net.links[k];
        let tail = if bc_side.contains_key(&k) {
            aux("bc", &l.from)
        } else {
            l.from.clone()
        };
        let head = if mac_side.contains_key(&k) {
            aux("mac", &l.to)
        } else {
            l.to.clone()
        };
        let (rate, prov) = match (bc_side.get(&k), mac_side.get(&k)) {
            (Some(b), Some(m)) => (b.0.max(m.0), format!("link {k} shared: max({}; {})", b.1, m.1)),
            (Some(b), None) => (b.0, format!("link {k}: {}", b.1)),
            (None, Some(m)) => (m.0, format!("link {k}: {}", m.1)),
            (None, None) => unreachable!(),
        };
        out.add_pipe(tail, vec![head], rate, prov);
    }
    Ok(out)
}

fn bc_betas<'a>(params: &'a LowerParams, c: usize, comp: &DecoupledComponent) -> Result<&'a [f64]> {
    let b = params
        .bc_betas
        .get(&c)
        .ok_or_else(|| Error::Config(format!("no power split for component {c} ({})", comp.label())))?;
    if b.len() != comp.links.len() {
        return Err(Error::Config(format!(
            "power split for component {c} has {} entries, expected {}",
            b.len(),
            comp.links.len()
        )));
    }
    if b.iter().any(|x| !(*x >= 0.0)) || (b.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "power split for component {c} must be nonnegative and sum to 1"
        )));
    }
    Ok(b)
}

fn mac_decoding<'a>(params: &'a LowerParams, c: usize, comp: &DecoupledComponent) -> Result<&'a MacDecoding> {
    let d = params
        .mac_decoding
        .get(&c)
        .ok_or_else(|| Error::Config(format!("no decoding choice for component {c} ({})", comp.label())))?;
    let m = comp.links.len();
    match d {
        MacDecoding::TimeShare if m != 2 => Err(Error::Config(format!(
            "pentagon decoding needs exactly two inputs, component {c} has {m}"
        ))),
        MacDecoding::Order(o) => {
            let mut seen = vec![false; m];
            for &i in o {
                if i >= m || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Config(format!(
                        "decode order {o:?} references an absent input of component {c}"
                    )));
                }
            }
            if o.len() != m {
                return Err(Error::Config(format!("decode order {o:?} does not cover component {c}")));
            }
            Ok(d)
        }
        _ => Ok(d),
    }
}

/// Σβ of the layers that output `o` of a BC does not decode.
fn undecoded_share(snrs: &[f64], betas: &[f64], o: usize) -> f64 {
    let order = sorted_order(snrs);
    let pos = order.iter().position(|&x| x == o).expect("output in order");
    order[pos + 1..].iter().map(|&x| betas[x]).sum()
}

pub fn interference_ledger(net: &NoisyNetwork, comps: &[DecoupledComponent], params: &LowerParams) -> Result<InterferenceLedger> {
    let mut ledger = InterferenceLedger::default();
    let key = |k: usize| (net.links[k].from.clone(), net.links[k].to.clone());
    for (k, l) in net.links.iter().enumerate() {
        if l.channel.is_gaussian() {
            ledger.gamma.insert(key(k), 0.0);
        }
    }
    for (c, comp) in comps.iter().enumerate() {
        if comp.kind != ComponentKind::Bc {
            continue;
        }
        let betas = bc_betas(params, c, comp)?;
        let snrs = component_snrs(net, comp);
        for (o, &k) in comp.links.iter().enumerate() {
            ledger.gamma.insert(key(k), snrs[o] * undecoded_share(&snrs, betas, o));
        }
    }
    for ((_, j), g) in &ledger.gamma {
        *ledger.pi_j.entry(j.clone()).or_insert(0.0) += g;
    }
    for (k, l) in net.links.iter().enumerate() {
        if l.channel.is_gaussian() {
            ledger.pi_ij.insert(key(k), 0.0);
        }
    }
    for (c, comp) in comps.iter().enumerate() {
        if comp.kind != ComponentKind::Mac {
            continue;
        }
        let dec = mac_decoding(params, c, comp)?;
        let snrs = component_snrs(net, comp);
        let gam: Vec<f64> = comp.links.iter().map(|&k| ledger.gamma[&key(k)]).collect();
        for (i, &k) in comp.links.iter().enumerate() {
            let p = match dec {
                MacDecoding::TimeShare => (0..gam.len()).filter(|&x| x != i).map(|x| gam[x]).sum(),
                MacDecoding::Order(o) => {
                    let pos = o.iter().position(|&x| x == i).expect("validated order");
                    o[..pos].iter().map(|&x| gam[x]).sum::<f64>() + o[pos + 1..].iter().map(|&x| snrs[x]).sum::<f64>()
                }
            };
            ledger.pi_ij.insert(key(k), p);
        }
    }
    Ok(ledger)
}

/// Lower bounding network; may contain hyper-arcs and joint caps.
pub fn build_lower(net: &NoisyNetwork, comps: &[DecoupledComponent], params: &LowerParams) -> Result<NoiselessNetwork> {
    let ledger = interference_ledger(net, comps, params)?;
    let mut out = terminal_network(net)?;
    let pij = |k: usize| ledger.pi_ij[&(net.links[k].from.clone(), net.links[k].to.clone())];
    // Pipes whose streams are decoded at each receiver.
    let mut decoded_at: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
    let mut bc_links = BTreeSet::new();
    for (c, comp) in comps.iter().enumerate() {
        match comp.kind {
            ComponentKind::P2p => add_p2p(&mut out, net, comp)?,
            ComponentKind::Mac => {}
            ComponentKind::Bc => {
                let betas = bc_betas(params, c, comp)?;
                let snrs = component_snrs(net, comp);
                let order = sorted_order(&snrs);
                let i = &comp.input_nodes[0];
                for (pos, &layer) in order.iter().enumerate() {
                    if betas[layer] == 0.0 {
                        continue;
                    }
                    let above: f64 = order[pos + 1..].iter().map(|&x| betas[x]).sum();
                    let rate = order[pos..]
                        .iter()
                        .map(|&o| {
                            let g = snrs[o];
                            half_log2_1p(g * betas[layer] / (1.0 + pij(comp.links[o]) + g * above))
                        })
                        .fold(f64::INFINITY, f64::min);
                    let heads: Vec<NodeId> = order[pos..].iter().map(|&o| comp.output_nodes[o].clone()).collect();
                    let names: Vec<&str> = heads.iter().map(|h| h.as_str()).collect();
                    let e = out.add_pipe(
                        i.clone(),
                        heads.clone(),
                        rate,
                        format!("bc layer at {i} to {{{}}}, beta={}", names.join(","), betas[layer]),
                    );
                    for h in heads {
                        decoded_at.entry(h).or_default().push(e);
                    }
                }
                bc_links.extend(comp.links.iter().copied());
            }
        }
    }
    for comp in comps.iter().filter(|c| c.kind == ComponentKind::Mac) {
        let j = &comp.output_nodes[0];
        let snrs = component_snrs(net, comp);
        let mut useful = 0.0;
        for (i, &k) in comp.links.iter().enumerate() {
            let l = &net.links[k];
            useful += snrs[i] - ledger.gamma[&(l.from.clone(), l.to.clone())];
            if bc_links.contains(&k) {
                continue;
            }
            let e = out.add_pipe(
                l.from.clone(),
                vec![j.clone()],
                half_log2_1p(snrs[i] / (1.0 + pij(k))),
                format!("mac input {} at {j}, interference {}", l.from, pij(k)),
            );
            decoded_at.entry(j.clone()).or_default().push(e);
        }
        let pi = ledger.pi_j[j];
        let pipes = decoded_at.get(j).cloned().unwrap_or_default();
        out.add_joint_cap(
            pipes,
            half_log2_1p(useful.max(0.0) / (1.0 + pi)),
            format!("sic sum at {j}, undecoded power {pi}"),
        );
    }
    Ok(out)
}

/// Decoding choices searched for a MAC: pentagon for two inputs, every
/// order for three, SNR-descending cancellation beyond.
pub fn mac_choices(net: &NoisyNetwork, comp: &DecoupledComponent) -> Vec<MacDecoding> {
    let m = comp.links.len();
    match m {
        2 => vec![MacDecoding::TimeShare],
        3 => permutations(3).into_iter().map(MacDecoding::Order).collect(),
        _ => {
            let mut o = sorted_order(&component_snrs(net, comp));
            o.reverse();
            vec![MacDecoding::Order(o)]
        }
    }
}

/// All permutations of 0..m in lexicographic order.
pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// Grid and search limits for parameter sweeps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchOptions {
    pub alpha_grid: Vec<f64>,
    pub beta_step: f64,
    pub max_layers: usize,
    /// Exhaustive search when the number of combinations is at most this;
    /// coordinate ascent otherwise.
    pub exhaustive_limit: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            alpha_grid: (0..=10).map(|k| k as f64 / 10.0).collect(),
            beta_step: 0.125,
            max_layers: 3,
            exhaustive_limit: 1024,
        }
    }
}

/// Power splits tried for a BC with the given SNRs. Up to four receivers:
/// the simplex grid with at most `max_layers` layers. Beyond that: the
/// all-receivers layer alone, or sharing power with one other layer.
/// The first candidate always puts all power on the all-receivers layer.
pub fn beta_candidates(snrs: &[f64], step: f64, max_layers: usize) -> Result<Vec<Vec<f64>>> {
    let m = snrs.len();
    let base = sorted_order(snrs)[0];
    let mut first = vec![0.0; m];
    first[base] = 1.0;
    let mut out = vec![first.clone()];
    if m <= 4 {
        out.extend(beta_grid(m, step, max_layers)?.into_iter().filter(|b| *b != first));
        return Ok(out);
    }
    let units = (1.0 / step).round();
    if !(step > 0.0) || units < 1.0 || (units * step - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("beta step {step} must divide 1")));
    }
    let units = units as usize;
    for other in (0..m).filter(|&o| o != base) {
        for u in 1..units {
            let mut b = vec![0.0; m];
            b[base] = (units - u) as f64 / units as f64;
            b[other] = u as f64 / units as f64;
            out.push(b);
        }
    }
    Ok(out)
}

/// Upper parameter points: a common α across MACs crossed with BC
/// permutation choices. Every permutation is tried for BCs with at most
/// three receivers, SNR-descending and ascending otherwise. Choices are
/// crossed across BCs while that stays within 64 combinations and applied
/// in lockstep beyond.
pub fn upper_grid(net: &NoisyNetwork, comps: &[DecoupledComponent], alpha_grid: &[f64]) -> Vec<UpperParams> {
    let defaults = UpperParams::defaults(net, comps);
    let mut bcs: Vec<(usize, Vec<Vec<usize>>)> = Vec::new();
    for (c, comp) in comps.iter().enumerate() {
        if comp.kind != ComponentKind::Bc {
            continue;
        }
        let desc = defaults.bc_perm[&c].clone();
        let m = desc.len();
        let mut list = vec![desc.clone()];
        if m <= 3 {
            list.extend(permutations(m).into_iter().filter(|p| *p != desc));
        } else {
            list.push(desc.iter().rev().copied().collect());
        }
        bcs.push((c, list));
    }
    let product = bcs.iter().map(|(_, l)| l.len()).try_fold(1usize, |a, n| a.checked_mul(n));
    let perm_points: Vec<BTreeMap<usize, Vec<usize>>> = match product {
        Some(p) if p <= 64 => {
            let mut pts = vec![BTreeMap::new()];
            for (c, list) in &bcs {
                pts = pts
                    .into_iter()
                    .flat_map(|pt| {
                        list.iter().map(move |perm| {
                            let mut pt = pt.clone();
                            pt.insert(*c, perm.clone());
                            pt
                        })
                    })
                    .collect();
            }
            pts
        }
        _ => {
            let width = bcs.iter().map(|(_, l)| l.len()).max().unwrap_or(1);
            (0..width)
                .map(|t| bcs.iter().map(|(c, l)| (*c, l[t % l.len()].clone())).collect())
                .collect()
        }
    };
    // Without MACs every α gives the same network.
    let alphas = if defaults.mac_alpha.is_empty() {
        &alpha_grid[..alpha_grid.len().min(1)]
    } else {
        alpha_grid
    };
    let mut out = Vec::new();
    for &alpha in alphas {
        for perms in &perm_points {
            out.push(UpperParams {
                mac_alpha: defaults.mac_alpha.keys().map(|&c| (c, alpha)).collect(),
                bc_perm: perms.clone(),
            });
        }
    }
    if out.is_empty() {
        out.push(defaults);
    }
    out
}

/// Maximizes `eval` over lower parameters. Exhaustive when the grid is small,
/// coordinate ascent from the defaults otherwise. Ties keep the earlier
/// point, so results are deterministic.
pub fn search_lower<F>(net: &NoisyNetwork, comps: &[DecoupledComponent], opts: &SearchOptions, eval: F) -> Result<(LowerParams, f64)>
where
    F: Fn(&LowerParams) -> Result<f64>,
{
    enum Slot {
        Bc(usize, Vec<Vec<f64>>),
        Mac(usize, Vec<MacDecoding>),
    }
    let mut slots = Vec::new();
    for (c, comp) in comps.iter().enumerate() {
        match comp.kind {
            ComponentKind::Bc => slots.push(Slot::Bc(
                c,
                beta_candidates(&component_snrs(net, comp), opts.beta_step, opts.max_layers)?,
            )),
            ComponentKind::Mac => slots.push(Slot::Mac(c, mac_choices(net, comp))),
            ComponentKind::P2p => {}
        }
    }
    let sizes: Vec<usize> = slots
        .iter()
        .map(|s| match s {
            Slot::Bc(_, v) => v.len(),
            Slot::Mac(_, v) => v.len(),
        })
        .collect();
    let point = |idx: &[usize]| {
        let mut p = LowerParams::default();
        for (s, &i) in slots.iter().zip(idx) {
            match s {
                Slot::Bc(c, v) => {
                    p.bc_betas.insert(*c, v[i].clone());
                }
                Slot::Mac(c, v) => {
                    p.mac_decoding.insert(*c, v[i].clone());
                }
            }
        }
        p
    };

    let mut idx = vec![0usize; slots.len()];
    let mut best = eval(&point(&idx))?;
    let mut best_idx = idx.clone();
    let product = sizes.iter().try_fold(1usize, |a, &n| a.checked_mul(n));
    if matches!(product, Some(p) if p <= opts.exhaustive_limit) {
        // Odometer over all combinations.
        loop {
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < sizes[k] {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
            let v = eval(&point(&idx))?;
            if v > best + 1e-12 {
                best = v;
                best_idx = idx.clone();
            }
        }
    } else {
        let mut improved = true;
        let mut rounds = 0;
        while improved && rounds < 20 {
            improved = false;
            rounds += 1;
            for s in 0..slots.len() {
                let mut trial = best_idx.clone();
                for i in 0..sizes[s] {
                    if i == best_idx[s] {
                        continue;
                    }
                    trial[s] = i;
                    let v = eval(&point(&trial))?;
                    if v > best + 1e-12 {
                        best = v;
                        best_idx = trial.clone();
                        improved = true;
                    }
                }
            }
        }
    }
    Ok((point(&best_idx), best))
}
