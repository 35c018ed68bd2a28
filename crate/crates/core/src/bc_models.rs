//! Broadcast channel bounding models: one-shot upper models, the
//! permutation-based upper model, and the superposition lower model whose
//! constraints are multicast rates to nested receiver sets.
//!
//! Receiver subsets are bit masks over the caller's receiver indices: bit
//! k set means receiver k belongs to the set, so mask 3 is {receiver 1,
//! receiver 0}.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::info::{half_log2_1p, Rate};
use crate::mac_models::RateVector;

#[derive(Clone, Debug, PartialEq)]
pub struct BcSpec {
    pub gammas: Vec<f64>,
    pub alphabet_bits_in: Option<f64>,
    pub alphabet_bits_out: Option<Vec<f64>>,
}

impl BcSpec {
    pub fn gaussian(gammas: &[f64]) -> Result<BcSpec> {
        let spec = BcSpec {
            gammas: gammas.to_vec(),
            alphabet_bits_in: None,
            alphabet_bits_out: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gammas.is_empty() {
            return Err(Error::invalid("gammas", "need at least one receiver"));
        }
        if self.gammas.len() > 63 {
            return Err(Error::invalid("gammas", "at most 63 receivers"));
        }
        if let Some(k) = self.gammas.iter().position(|g| !(*g > 0.0) || !g.is_finite()) {
            return Err(Error::invalid(format!("gammas[{k}]"), "must be positive and finite"));
        }
        if let Some(out) = &self.alphabet_bits_out {
            if out.len() != self.gammas.len() {
                return Err(Error::invalid("alphabet_bits_out", "length differs from gammas"));
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.gammas.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BcVariant {
    /// Sum constraint from the joint output, individual from output alphabets.
    JointOutput,
    /// Sum constraint from the input alphabet, individual per-receiver capacities.
    PerReceiver,
}

pub fn bc_upper_oneshot(spec: &BcSpec, variant: BcVariant) -> Result<RateVector> {
    spec.validate()?;
    let m = spec.m();
    Ok(match variant {
        BcVariant::JointOutput => RateVector {
            sum_rate: Rate::from_formula(half_log2_1p(spec.gammas.iter().sum())),
            individual: match &spec.alphabet_bits_out {
                Some(b) => b.iter().map(|&x| Rate::from_formula(x)).collect(),
                None => vec![Rate::INFINITE; m],
            },
            sum_label: "bc one-shot 1: sum R_BC".into(),
            labels: (0..m).map(|i| format!("bc one-shot 1: receiver {i} alphabet")).collect(),
        },
        BcVariant::PerReceiver => RateVector {
            sum_rate: spec.alphabet_bits_in.map_or(Rate::INFINITE, Rate::from_formula),
            individual: spec.gammas.iter().map(|&g| Rate::from_formula(half_log2_1p(g))).collect(),
            sum_label: "bc one-shot 2: input alphabet".into(),
            labels: (0..m).map(|i| format!("bc one-shot 2: receiver {i} capacity")).collect(),
        },
    })
}

fn check_perm(m: usize, perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; m];
    if perm.len() != m {
        return Err(Error::Config(format!("permutation has {} entries, expected {m}", perm.len())));
    }
    for &i in perm {
        if i >= m || seen[i] {
            return Err(Error::Config(format!("{perm:?} is not a permutation of 0..{m}")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Permutation model: receiver perm[k] gets R_{l_k} = ½log2(1+Σ_{j≤k}γ_perm(j)).
pub fn bc_upper_new(spec: &BcSpec, perm: &[usize]) -> Result<RateVector> {
    spec.validate()?;
    check_perm(spec.m(), perm)?;
    let mut individual = vec![Rate::ZERO; spec.m()];
    let mut labels = vec![String::new(); spec.m()];
    let mut acc = 0.0;
    for (k, &i) in perm.iter().enumerate() {
        acc += spec.gammas[i];
        individual[i] = Rate::from_formula(half_log2_1p(acc));
        labels[i] = format!("bc new: R_l{} for receivers {:?}", k + 1, &perm[..=k]);
    }
    let sum_rate = Rate::from_formula(half_log2_1p(spec.gammas.iter().sum()));
    individual[perm[spec.m() - 1]] = sum_rate;
    Ok(RateVector {
        sum_rate,
        individual,
        sum_label: format!("bc new: sum R_BC, perm {perm:?}"),
        labels,
    })
}

/// Receiver indices sorted by ascending SNR; ties keep caller order.
pub fn sorted_order(gammas: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..gammas.len()).collect();
    idx.sort_by(|&a, &b| gammas[a].partial_cmp(&gammas[b]).expect("finite SNR"));
    idx
}

/// Receivers able to decode the layer whose weakest intended receiver is
/// caller index `k`: that receiver and every stronger one.
pub fn layer_targets(gammas: &[f64]) -> Vec<Vec<usize>> {
    let order = sorted_order(gammas);
    let mut out = vec![Vec::new(); gammas.len()];
    for (pos, &k) in order.iter().enumerate() {
        out[k] = order[pos..].to_vec();
    }
    out
}

pub fn subset_mask(members: &[usize]) -> u64 {
    members.iter().fold(0, |m, &i| m | (1u64 << i))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BcLowerModel {
    /// Multicast rate per receiver-subset mask (only layers with β > 0).
    pub rates: BTreeMap<u64, Rate>,
    pub sum_rate: Rate,
    /// Power split in caller labels: betas[k] powers the layer whose weakest
    /// intended receiver is k.
    pub betas: Vec<f64>,
    pub sorted: Vec<usize>,
}

/// Superposition coding with SIC at every receiver.
pub fn bc_lower_superposition(spec: &BcSpec, betas: &[f64]) -> Result<BcLowerModel> {
    spec.validate()?;
    if betas.len() != spec.m() {
        return Err(Error::invalid(
            "betas",
            format!("{} entries for {} receivers", betas.len(), spec.m()),
        ));
    }
    if betas.iter().any(|b| !(*b >= 0.0)) {
        return Err(Error::invalid("betas", "must be nonnegative"));
    }
    let total: f64 = betas.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("betas", format!("sum to {total}, not 1")));
    }
    let order = sorted_order(&spec.gammas);
    let mut rates = BTreeMap::new();
    let mut sum = 0.0;
    for (pos, &k) in order.iter().enumerate() {
        if betas[k] == 0.0 {
            continue;
        }
        let above: f64 = order[pos + 1..].iter().map(|&j| betas[j]).sum();
        let g = spec.gammas[k];
        let r = half_log2_1p(betas[k] * g / (1.0 + g * above));
        rates.insert(subset_mask(&order[pos..]), Rate::from_formula(r));
        sum += r;
    }
    Ok(BcLowerModel {
        rates,
        sum_rate: Rate::from_formula(sum),
        betas: betas.to_vec(),
        sorted: order,
    })
}

/// R_BC − max_β R_0 = ½log2((1+Σγ)/(1+γ_max)).
pub fn bc_gap(spec: &BcSpec) -> Result<f64> {
    spec.validate()?;
    let total: f64 = spec.gammas.iter().sum();
    let max = spec.gammas.iter().cloned().fold(0.0, f64::max);
    Ok(0.5 * ((1.0 + total) / (1.0 + max)).log2())
}

/// Power splits on a simplex grid of resolution `step` with at most
/// `max_layers` nonzero entries, in a fixed enumeration order.
pub fn beta_grid(m: usize, step: f64, max_layers: usize) -> Result<Vec<Vec<f64>>> {
    let units = (1.0 / step).round();
    if !(step > 0.0) || units < 1.0 || (units * step - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("beta step {step} must divide 1")));
    }
    let n = units as usize;
    let mut out = Vec::new();
    let mut cur = vec![0usize; m];
    fn rec(pos: usize, left: usize, nonzero: usize, max: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        let m = cur.len();
        if pos == m - 1 {
            if left > 0 && nonzero >= max {
                return;
            }
            cur[pos] = left;
            out.push(cur.iter().map(|&u| u as f64 / n as f64).collect());
            return;
        }
        for u in 0..=left {
            let nz = nonzero + usize::from(u > 0);
            if nz > max {
                break;
            }
            cur[pos] = u;
            rec(pos + 1, left - u, nz, max, n, cur, out);
        }
    }
    if m == 0 {
        return Ok(out);
    }
    rec(0, n, 0, max_layers.max(1), n, &mut cur, &mut out);
    Ok(out)
}

/// Best sum rate over a β grid subject to per-subset minimum rates.
pub fn best_superposition(spec: &BcSpec, step: f64, minimums: &BTreeMap<u64, f64>) -> Result<Option<BcLowerModel>> {
    if spec.m() > 4 {
        return Err(Error::Config("grid search limited to at most 4 receivers".into()));
    }
    let mut best: Option<BcLowerModel> = None;
    for betas in beta_grid(spec.m(), step, spec.m())? {
        let model = bc_lower_superposition(spec, &betas)?;
        let ok = minimums
            .iter()
            .all(|(mask, min)| model.rates.get(mask).map_or(0.0, |r| r.bits()) >= *min);
        if ok && best.as_ref().is_none_or(|b| model.sum_rate.bits() > b.sum_rate.bits()) {
            best = Some(model);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn oneshot_examples() {
        let spec = BcSpec::gaussian(&[1.0, 4.0]).unwrap();
        let v1 = bc_upper_oneshot(&spec, BcVariant::JointOutput).unwrap();
        assert!(close(v1.sum_rate.bits(), 0.5 * 6f64.log2(), 1e-12));
        assert!(close(v1.sum_rate.bits(), 1.2925, 1e-4));
        let v2 = bc_upper_oneshot(&spec, BcVariant::PerReceiver).unwrap();
        assert!(close(v2.individual[0].bits(), 0.5, 1e-12));
        assert!(close(v2.individual[1].bits(), 0.5 * 5f64.log2(), 1e-12));
        let one = BcSpec::gaussian(&[3.0]).unwrap();
        assert!(close(
            bc_upper_oneshot(&one, BcVariant::JointOutput).unwrap().sum_rate.bits(),
            1.0,
            1e-12
        ));
        assert!(close(
            bc_upper_oneshot(&one, BcVariant::PerReceiver).unwrap().individual[0].bits(),
            1.0,
            1e-12
        ));
    }

    #[test]
    fn new_model_examples() {
        let spec = BcSpec::gaussian(&[1.0, 4.0]).unwrap();
        let a = bc_upper_new(&spec, &[0, 1]).unwrap();
        assert!(close(a.individual[0].bits(), 0.5, 1e-12));
        assert!(close(a.individual[1].bits(), 0.5 * 6f64.log2(), 1e-12));
        let b = bc_upper_new(&spec, &[1, 0]).unwrap();
        assert!(close(b.individual[1].bits(), 0.5 * 5f64.log2(), 1e-12));
        assert!(close(b.individual[0].bits(), 0.5 * 6f64.log2(), 1e-12));
        assert_eq!(a.sum_rate, b.sum_rate);
        let one = bc_upper_new(&BcSpec::gaussian(&[3.0]).unwrap(), &[0]).unwrap();
        assert!(close(one.individual[0].bits(), 1.0, 1e-12));
    }

    #[test]
    fn superposition_examples() {
        let spec = BcSpec::gaussian(&[1.0, 4.0]).unwrap();
        let m = bc_lower_superposition(&spec, &[0.5, 0.5]).unwrap();
        assert!(close(m.rates[&3].bits(), 0.2075, 1e-4));
        assert!(close(m.rates[&2].bits(), 0.7925, 1e-4));
        assert!(close(m.sum_rate.bits(), 1.0, 1e-12));

        let top = bc_lower_superposition(&spec, &[0.0, 1.0]).unwrap();
        assert_eq!(top.rates.len(), 1);
        assert!(close(top.sum_rate.bits(), half_log2_1p(4.0), 1e-12));

        let one = bc_lower_superposition(&BcSpec::gaussian(&[3.0]).unwrap(), &[1.0]).unwrap();
        assert!(close(one.sum_rate.bits(), 1.0, 1e-12));
    }

    #[test]
    fn unsorted_input_maps_back_to_caller_labels() {
        let spec = BcSpec::gaussian(&[4.0, 1.0]).unwrap();
        let m = bc_lower_superposition(&spec, &[0.5, 0.5]).unwrap();
        assert!(close(m.rates[&3].bits(), 0.2075, 1e-4));
        assert!(close(m.rates[&1].bits(), 0.7925, 1e-4));
        assert_eq!(m.sorted, vec![1, 0]);
    }

    #[test]
    fn gap_examples() {
        assert!(close(bc_gap(&BcSpec::gaussian(&[1.0, 2.0, 100.0]).unwrap()).unwrap(), 0.02, 0.005));
        assert!(close(bc_gap(&BcSpec::gaussian(&[1.0, 1.0, 1.0]).unwrap()).unwrap(), 0.5, 1e-12));
        assert_eq!(bc_gap(&BcSpec::gaussian(&[2.0]).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn beta_grid_sizes() {
        assert_eq!(beta_grid(2, 0.125, 2).unwrap().len(), 9);
        assert_eq!(beta_grid(3, 0.5, 3).unwrap().len(), 6);
        assert_eq!(beta_grid(3, 0.5, 1).unwrap().len(), 3);
        assert!(beta_grid(2, 0.3, 2).is_err());
    }

    #[test]
    fn best_superposition_respects_minimums() {
        let spec = BcSpec::gaussian(&[1.0, 4.0]).unwrap();
        let free = best_superposition(&spec, 1.0 / 32.0, &BTreeMap::new()).unwrap().unwrap();
        assert!(close(free.sum_rate.bits(), half_log2_1p(4.0), 1e-12));
        let mins = BTreeMap::from([(3u64, 0.3)]);
        let m = best_superposition(&spec, 1.0 / 32.0, &mins).unwrap().unwrap();
        assert!(m.rates[&3].bits() >= 0.3);
    }

    fn gammas() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.01f64..100.0, 1..=8)
    }

    proptest! {
        #[test]
        fn new_model_monotone_along_perm(g in gammas(), seed in any::<u64>()) {
            let spec = BcSpec::gaussian(&g).unwrap();
            let mut perm: Vec<usize> = (0..g.len()).collect();
            let mut s = seed;
            for i in (1..perm.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let v = bc_upper_new(&spec, &perm).unwrap();
            for w in perm.windows(2) {
                prop_assert!(v.individual[w[1]] >= v.individual[w[0]]);
            }
            prop_assert_eq!(v.individual[*perm.last().unwrap()], v.sum_rate);
            let one = bc_upper_oneshot(&spec, BcVariant::JointOutput).unwrap();
            prop_assert_eq!(v.sum_rate, one.sum_rate);
        }

        #[test]
        fn superposition_bounded_by_strongest(g in gammas()) {
            let spec = BcSpec::gaussian(&g).unwrap();
            let max = g.iter().cloned().fold(0.0, f64::max);
            for betas in beta_grid(g.len(), 0.25, 3).unwrap() {
                let m = bc_lower_superposition(&spec, &betas).unwrap();
                let s: f64 = m.rates.values().map(|r| r.bits()).sum();
                prop_assert!((s - m.sum_rate.bits()).abs() <= 1e-12);
                prop_assert!(m.sum_rate.bits() <= half_log2_1p(max) + 1e-9);
                prop_assert!(m.rates.len() <= g.len());
            }
        }

        #[test]
        fn gap_below_half_log_m(g in gammas()) {
            let gap = bc_gap(&BcSpec::gaussian(&g).unwrap()).unwrap();
            prop_assert!(gap < 0.5 * (g.len() as f64).log2() + 1e-9);
        }
    }
}
