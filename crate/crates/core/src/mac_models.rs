//! Multiple-access channel bounding models.
//!
//! Upper models: the one-shot alphabet model, the two-user noise-partition
//! model and the α-parameterized model whose individual constraints come from
//! splitting the receiver noise into independent shares α_i with Σα_i = 1−α.
//! Lower model: successive interference cancellation in a given order.

use crate::error::{Error, Result};
use crate::info::{half_log2_1p, Rate};

#[derive(Clone, Debug, PartialEq)]
pub struct MacSpec {
    pub gammas: Vec<f64>,
    pub alphabet_bits: Option<Vec<f64>>,
    pub output_bits: Option<f64>,
}

impl MacSpec {
    pub fn gaussian(gammas: &[f64]) -> Result<MacSpec> {
        let spec = MacSpec {
            gammas: gammas.to_vec(),
            alphabet_bits: None,
            output_bits: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gammas.is_empty() {
            return Err(Error::invalid("gammas", "need at least one transmitter"));
        }
        if let Some(k) = self.gammas.iter().position(|g| !(*g > 0.0) || !g.is_finite()) {
            return Err(Error::invalid(format!("gammas[{k}]"), "must be positive and finite"));
        }
        if let Some(bits) = &self.alphabet_bits {
            if bits.len() != self.gammas.len() {
                return Err(Error::invalid("alphabet_bits", "length differs from gammas"));
            }
            if bits.iter().any(|b| !(*b >= 0.0)) {
                return Err(Error::invalid("alphabet_bits", "must be nonnegative"));
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.gammas.len()
    }

    fn require_gaussian(&self) -> Result<()> {
        self.validate()?;
        if self.alphabet_bits.is_some() {
            return Err(Error::Domain("model needs Gaussian inputs".into()));
        }
        Ok(())
    }

    fn sum_sqrt(&self) -> f64 {
        self.gammas.iter().map(|g| g.sqrt()).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateVector {
    pub sum_rate: Rate,
    pub individual: Vec<Rate>,
    pub sum_label: String,
    pub labels: Vec<String>,
}

impl RateVector {
    pub fn individual_bits(&self) -> Vec<f64> {
        self.individual.iter().map(|r| r.bits()).collect()
    }
}

/// Noise shares of the α-model: α on the sum constraint, α_i on input i,
/// with Lagrange auxiliary μ. At α = 1 all shares are zero and μ = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisePartition {
    pub alpha: f64,
    pub alphas: Vec<f64>,
    pub mu: f64,
}

/// R_MAC = ½·log2(1+(Σ√γ_i)²), the coherent-combining sum-rate bound.
pub fn mac_sum_upper(gammas: &[f64]) -> f64 {
    let s: f64 = gammas.iter().map(|g| g.sqrt()).sum();
    half_log2_1p(s * s)
}

pub fn mac_upper_oneshot1(spec: &MacSpec) -> Result<RateVector> {
    spec.validate()?;
    let individual = match &spec.alphabet_bits {
        Some(bits) => bits.iter().map(|&b| Rate::from_formula(b)).collect(),
        None => vec![Rate::INFINITE; spec.m()],
    };
    Ok(RateVector {
        sum_rate: Rate::from_formula(mac_sum_upper(&spec.gammas)),
        individual,
        sum_label: "mac one-shot 1: sum R_MAC".into(),
        labels: (0..spec.m()).map(|i| format!("mac one-shot 1: input {i} alphabet")).collect(),
    })
}

/// Two-user noise-partition model: individual rates at the α* minimizing
/// ½log2(1+γ1/α)+½log2(1+γ2/(1−α)); the sum constraint is the output
/// alphabet, i.e. +∞ for Gaussian outputs.
pub fn mac_upper_oneshot2_gaussian2(gamma1: f64, gamma2: f64) -> Result<(RateVector, f64)> {
    let gammas = [gamma1, gamma2];
    MacSpec::gaussian(&gammas)?;
    let mu = solve_mu(&gammas, 0.0)?;
    let shares: Vec<f64> = gammas.iter().map(|&g| share(g, mu)).collect();
    let alpha_star = shares[0] / (shares[0] + shares[1]);
    let r1 = half_log2_1p(gamma1 / alpha_star);
    let r2 = half_log2_1p(gamma2 / (1.0 - alpha_star));
    Ok((
        RateVector {
            sum_rate: Rate::INFINITE,
            individual: vec![Rate::from_formula(r1), Rate::from_formula(r2)],
            sum_label: "mac one-shot 2: output alphabet".into(),
            labels: vec![
                format!("mac one-shot 2: input 0 at alpha* = {alpha_star}"),
                format!("mac one-shot 2: input 1 at 1 - alpha* = {}", 1.0 - alpha_star),
            ],
        },
        alpha_star,
    ))
}

/// ε2 such that two independent binary flips ε1, ε2 combine to ε.
pub fn binary_noise_partition(eps: f64, eps1: f64) -> Result<f64> {
    if (eps1 - 0.5).abs() < 1e-15 {
        return Err(Error::Domain("eps1 = 1/2 makes the split singular".into()));
    }
    if !(0.0..=0.5).contains(&eps) || !(0.0..=eps).contains(&eps1) {
        return Err(Error::Domain(format!("need 0 <= eps1 <= eps <= 1/2, got eps={eps}, eps1={eps1}")));
    }
    Ok((eps - eps1) / (1.0 - 2.0 * eps1))
}

/// Equal split ε1 = ε2 = (1−√(1−2ε))/2.
pub fn binary_symmetric_split(eps: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&eps) {
        return Err(Error::Domain(format!("eps {eps} outside [0, 1/2]")));
    }
    Ok((1.0 - (1.0 - 2.0 * eps).sqrt()) / 2.0)
}

/// Optimal noise share α_i = (√(γ(γ+4μ))−γ)/2, written without cancellation.
pub(crate) fn share(gamma: f64, mu: f64) -> f64 {
    2.0 * gamma * mu / ((gamma * (gamma + 4.0 * mu)).sqrt() + gamma)
}

/// Interval guaranteed to contain μ.
pub fn mu_bracket(gammas: &[f64], alpha: f64) -> (f64, f64) {
    let m = gammas.len() as f64;
    let r = 1.0 - alpha;
    let sum: f64 = gammas.iter().sum();
    let min = gammas.iter().cloned().fold(f64::INFINITY, f64::min);
    (r / m + r * r / (m * sum), r / m + r * r / (m * m * min))
}

const MU_MAX_ITER: usize = 200;
const MU_TOL: f64 = 1e-10;

/// Solves ½Σ(√(γ_i(γ_i+4μ))−γ_i) = 1−α for μ by bisection on the bracket.
pub fn solve_mu(gammas: &[f64], alpha: f64) -> Result<f64> {
    MacSpec::gaussian(gammas)?;
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha {alpha} outside [0, 1)")));
    }
    let target = 1.0 - alpha;
    let residual = |mu: f64| gammas.iter().map(|&g| share(g, mu)).sum::<f64>() - target;
    let (mut lo, mut hi) = mu_bracket(gammas, alpha);
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..MU_MAX_ITER {
        mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r.abs() <= MU_TOL || hi - lo <= f64::EPSILON * hi {
            break;
        }
        if r > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r = residual(mid);
    if r.abs() > MU_TOL {
        return Err(Error::Internal(format!("mu bisection ended with residual {r} on [{lo}, {hi}]")));
    }
    Ok(mid)
}

/// α-parameterized upper model. α = 1 gives (R_MAC, +∞, …); α = 0 gives
/// (+∞, tightest individual rates).
pub fn mac_upper_new(spec: &MacSpec, alpha: f64) -> Result<(RateVector, NoisePartition)> {
    spec.require_gaussian()?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha {alpha} outside [0, 1]")));
    }
    let m = spec.m();
    let labels = |what: &str| (0..m).map(|i| format!("mac new(alpha={alpha}): input {i} {what}")).collect();
    if alpha == 1.0 {
        return Ok((
            RateVector {
                sum_rate: Rate::from_formula(mac_sum_upper(&spec.gammas)),
                individual: vec![Rate::INFINITE; m],
                sum_label: "mac new(alpha=1): sum R_MAC".into(),
                labels: labels("unconstrained"),
            },
            NoisePartition {
                alpha,
                alphas: vec![0.0; m],
                mu: 0.0,
            },
        ));
    }
    let mu = solve_mu(&spec.gammas, alpha)?;
    let alphas: Vec<f64> = spec.gammas.iter().map(|&g| share(g, mu)).collect();
    let individual = spec
        .gammas
        .iter()
        .zip(&alphas)
        .map(|(&g, &a)| Rate::from_formula(half_log2_1p(g / a)))
        .collect();
    let sum_rate = if alpha == 0.0 {
        Rate::INFINITE
    } else {
        let s = spec.sum_sqrt();
        Rate::from_formula(0.5 * ((1.0 + s * s) / alpha).log2())
    };
    Ok((
        RateVector {
            sum_rate,
            individual,
            sum_label: format!("mac new(alpha={alpha}): sum R_s"),
            labels: labels("R_i with noise share alpha_i"),
        },
        NoisePartition { alpha, alphas, mu },
    ))
}

fn check_order(m: usize, order: &[usize]) -> Result<()> {
    let mut seen = vec![false; m];
    if order.len() != m {
        return Err(Error::Config(format!("decode order has {} entries, expected {m}", order.len())));
    }
    for &i in order {
        if i >= m || seen[i] {
            return Err(Error::Config(format!("decode order {order:?} is not a permutation of 0..{m}")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// SIC corner point; `decode_order[0]` is decoded first.
pub fn mac_lower(spec: &MacSpec, decode_order: &[usize]) -> Result<RateVector> {
    spec.require_gaussian()?;
    check_order(spec.m(), decode_order)?;
    let mut individual = vec![Rate::ZERO; spec.m()];
    let mut later: f64 = spec.gammas.iter().sum();
    for &i in decode_order {
        later -= spec.gammas[i];
        let after = later.max(0.0);
        individual[i] = Rate::from_formula(half_log2_1p(spec.gammas[i] / (1.0 + after)));
    }
    Ok(RateVector {
        sum_rate: Rate::from_formula(half_log2_1p(spec.gammas.iter().sum())),
        individual,
        sum_label: "mac lower: SIC sum".into(),
        labels: (0..spec.m())
            .map(|i| format!("mac lower: input {i}, order {decode_order:?}"))
            .collect(),
    })
}

/// R_MAC − R_l,s.
pub fn mac_gap(spec: &MacSpec) -> Result<f64> {
    spec.require_gaussian()?;
    let s = spec.sum_sqrt();
    let t: f64 = spec.gammas.iter().sum();
    Ok(0.5 * ((1.0 + s * s) / (1.0 + t)).log2())
}

/// Numeric forms of the two discrete inequalities behind the α-model:
/// dropping the sum constraint's partner cannot loosen an individual bound,
/// and splitting off U cannot tighten the sum bound.
pub mod lemmas {
    use crate::error::Result;
    use crate::info::Pmf;

    /// min{I(X2;V2), log|X2|, log|Y|} − I(X1,X2;Y|U) for
    /// p(x1,x2)·p(u|x1)·p(v2|x2) and y = f(u, v2).
    pub fn lemma1_slack(p_x: &[Vec<f64>], p_u_x1: &[Vec<f64>], p_v_x2: &[Vec<f64>], f: &[Vec<usize>], ny: usize) -> Result<f64> {
        let (n1, n2) = (p_x.len(), p_x[0].len());
        let (nu, nv) = (p_u_x1[0].len(), p_v_x2[0].len());
        let shape = vec![n1, n2, nu, nv, ny];
        let mut p = vec![0.0; n1 * n2 * nu * nv * ny];
        for x1 in 0..n1 {
            for x2 in 0..n2 {
                for u in 0..nu {
                    for v in 0..nv {
                        let y = f[u][v];
                        let k = (((x1 * n2 + x2) * nu + u) * nv + v) * ny + y;
                        p[k] += p_x[x1][x2] * p_u_x1[x1][u] * p_v_x2[x2][v];
                    }
                }
            }
        }
        let pmf = Pmf::new(shape, p)?;
        let lhs = pmf.mutual_information(&[0, 1], &[4], &[2]);
        let rhs = pmf
            .mutual_information(&[1], &[3], &[])
            .min((n2 as f64).log2())
            .min((ny as f64).log2());
        Ok(rhs - lhs)
    }

    /// I(X1;U) + I(X1,X2;Y|U) − I(X1,X2;Y) for p(u|x1)·p(x1,x2)·p(y|x1,x2).
    pub fn lemma2_slack(p_x: &[Vec<f64>], p_u_x1: &[Vec<f64>], p_y_x: &[Vec<Vec<f64>>]) -> Result<f64> {
        let (n1, n2) = (p_x.len(), p_x[0].len());
        let nu = p_u_x1[0].len();
        let ny = p_y_x[0][0].len();
        let mut p = vec![0.0; n1 * n2 * nu * ny];
        for x1 in 0..n1 {
            for x2 in 0..n2 {
                for u in 0..nu {
                    for y in 0..ny {
                        p[((x1 * n2 + x2) * nu + u) * ny + y] = p_x[x1][x2] * p_u_x1[x1][u] * p_y_x[x1][x2][y];
                    }
                }
            }
        }
        let pmf = Pmf::new(vec![n1, n2, nu, ny], p)?;
        Ok(
            pmf.mutual_information(&[0], &[2], &[]) + pmf.mutual_information(&[0, 1], &[3], &[2])
                - pmf.mutual_information(&[0, 1], &[3], &[]),
        )
    }
}
