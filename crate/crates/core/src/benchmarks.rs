//! Classical Gaussian full-duplex relay bounds used as reference curves.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::info::{half_log2_1p, Rate};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RelaySpec {
    pub gamma_sd: f64,
    pub gamma_sr: f64,
    pub gamma_rd: f64,
}

impl RelaySpec {
    pub fn new(gamma_sd: f64, gamma_sr: f64, gamma_rd: f64) -> Result<RelaySpec> {
        for (name, g) in [("gamma_sd", gamma_sd), ("gamma_sr", gamma_sr), ("gamma_rd", gamma_rd)] {
            if !(g > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {g}")));
            }
        }
        Ok(RelaySpec {
            gamma_sd,
            gamma_sr,
            gamma_rd,
        })
    }

    /// Coherent-combining term at the destination for correlation ρ.
    fn mac_cut(&self, rho: f64) -> f64 {
        half_log2_1p(self.gamma_sd + self.gamma_rd + 2.0 * rho * (self.gamma_sd * self.gamma_rd).sqrt())
    }
}

/// Bracket width at which the search stops. Far below the 1e−8 needed for
/// the value itself, because the optimum sits on a kink whose slope can
/// reach 1e4 near ρ = 1.
const GOLDEN_TOL: f64 = 1e-14;

/// Maximizes a unimodal function on [0, 1] by golden-section search; the
/// endpoints are also checked so boundary optima come out exact.
pub fn golden_max<F: Fn(f64) -> f64>(f: F) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > GOLDEN_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    [(mid, f(mid)), (0.0, f(0.0)), (1.0, f(1.0))]
        .into_iter()
        .fold((mid, f64::NEG_INFINITY), |best, p| if p.1 > best.1 { p } else { best })
}

/// Cut-set bound: max over ρ of min(MAC cut, broadcast cut).
pub fn cutset_bound(spec: &RelaySpec) -> Rate {
    let (_, v) = golden_max(|rho| {
        spec.mac_cut(rho)
            .min(half_log2_1p((1.0 - rho * rho) * (spec.gamma_sd + spec.gamma_sr)))
    });
    Rate::from_formula(v)
}

/// Decode-and-forward: the relay must decode the fresh part of the message.
pub fn df_bound(spec: &RelaySpec) -> Rate {
    let (_, v) = golden_max(|rho| half_log2_1p((1.0 - rho * rho) * spec.gamma_sr).min(spec.mac_cut(rho)));
    Rate::from_formula(v)
}

/// Compress-and-forward with Gaussian quantization at the relay.
pub fn cf_bound(spec: &RelaySpec) -> Rate {
    let sigma_q = (1.0 + spec.gamma_sd + spec.gamma_sr) / spec.gamma_rd;
    Rate::from_formula(half_log2_1p(spec.gamma_sd + spec.gamma_sr / (1.0 + sigma_q)))
}
