//! Scalar capacity primitives: rates in bits per channel use, Gaussian and
//! q-ary symmetric capacities, Blahut–Arimoto for arbitrary DMCs, and a small
//! joint-pmf helper for entropy bookkeeping.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A rate in bits per channel use. `+∞` is an explicit marker for
/// uncapacitated constraints (continuous alphabets).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Rate(f64);

impl Rate {
    pub const ZERO: Rate = Rate(0.0);
    pub const INFINITE: Rate = Rate(f64::INFINITY);

    pub fn new(bits: f64) -> Result<Rate> {
        if bits.is_nan() || bits < 0.0 {
            return Err(Error::Domain(format!("rate must be nonnegative, got {bits}")));
        }
        Ok(Rate(bits))
    }

    /// Builds a rate from a formula value, clamping round-off below zero.
    pub(crate) fn from_formula(bits: f64) -> Rate {
        debug_assert!(!bits.is_nan());
        Rate(bits.max(0.0))
    }

    pub fn bits(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn min(self, other: Rate) -> Rate {
        Rate(self.0.min(other.0))
    }

    pub fn max(self, other: Rate) -> Rate {
        Rate(self.0.max(other.0))
    }
}

impl std::ops::Add for Rate {
    type Output = Rate;
    fn add(self, rhs: Rate) -> Rate {
        Rate(self.0 + rhs.0)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else if let Some(p) = f.precision() {
            write!(f, "{:.*}", p, self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Rate, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Rate::new(v).map_err(serde::de::Error::custom),
            Raw::Str(s) if s == "inf" => Ok(Rate::INFINITE),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad rate {s:?}"))),
        }
    }
}

/// ½·log2(1+γ).
pub fn awgn_capacity(gamma: f64) -> Result<Rate> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::Domain(format!("SNR must be nonnegative, got {gamma}")));
    }
    Ok(Rate(half_log2_1p(gamma)))
}

/// ½·log2(1+x) for x ≥ 0, without the domain check.
pub(crate) fn half_log2_1p(x: f64) -> f64 {
    if x.is_infinite() {
        return f64::INFINITY;
    }
    0.5 * x.ln_1p() / std::f64::consts::LN_2
}

pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Capacity of the q-ary symmetric channel with total crossover probability ξ.
pub fn qsc_capacity(q: u32, xi: f64) -> Result<Rate> {
    if q < 2 {
        return Err(Error::Domain(format!("alphabet size must be at least 2, got {q}")));
    }
    let qf = q as f64;
    let edge = (qf - 1.0) / qf;
    if xi.is_nan() || xi < 0.0 || xi > edge + 1e-15 {
        return Err(Error::Domain(format!("crossover {xi} outside [0, {edge}] for q = {q}")));
    }
    if (xi - edge).abs() <= 1e-15 {
        return Ok(Rate::ZERO);
    }
    let c = qf.log2() - binary_entropy(xi) - xi * (qf - 1.0).log2();
    Ok(Rate::from_formula(c))
}

/// Transition matrix of the q-ary symmetric channel.
pub fn qsc_matrix(q: usize, xi: f64) -> Vec<Vec<f64>> {
    let off = xi / (q as f64 - 1.0);
    (0..q)
        .map(|x| (0..q).map(|y| if x == y { 1.0 - xi } else { off }).collect())
        .collect()
}

const BA_MAX_ITER: usize = 2_000_000;

/// D(W_x‖q) in bits for every input x, where q is the output law under p.
fn divergences(p: &[f64], transition: &[Vec<f64>]) -> Vec<f64> {
    let ny = transition[0].len();
    let mut out = vec![0.0; ny];
    for (px, row) in p.iter().zip(transition) {
        for (o, w) in out.iter_mut().zip(row) {
            *o += px * w;
        }
    }
    transition
        .iter()
        .map(|row| {
            row.iter()
                .zip(&out)
                .filter(|(&w, _)| w > 0.0)
                .map(|(&w, &o)| w * (w / o).log2())
                .sum()
        })
        .collect()
}

/// p·2^{a·d}, normalized.
fn tilt(p: &[f64], d: &[f64], a: f64) -> Vec<f64> {
    let top = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = p.iter().zip(d).map(|(px, dx)| px * (a * (dx - top)).exp2()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Capacity of a discrete memoryless channel by Blahut–Arimoto. Each step
/// also tries an over-relaxed update p·2^{a·D} and keeps whichever input law
/// has the larger mutual information; the step size `a` doubles on success.
/// Stops once the classical bracket `max_x D(W_x‖q) − log2 Σ p·2^D` is below
/// `tol` and returns the lower end of the bracket.
pub fn dmc_capacity(transition: &[Vec<f64>], tol: f64) -> Result<Rate> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let nx = transition.len();
    if nx == 0 {
        return Err(Error::Domain("empty transition matrix".into()));
    }
    let ny = transition[0].len();
    for (x, row) in transition.iter().enumerate() {
        if row.len() != ny || ny == 0 {
            return Err(Error::Domain(format!("row {x} has {} entries, expected {ny}", row.len())));
        }
        if row.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::Domain(format!("row {x} has a negative or NaN entry")));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("row {x} sums to {s}, not 1")));
        }
    }

    let mut p = vec![1.0 / nx as f64; nx];
    let mut d = divergences(&p, transition);
    let mut a = 2.0;
    let (mut lower, mut upper) = (0.0, f64::INFINITY);
    for _ in 0..BA_MAX_ITER {
        upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = p.iter().zip(&d).map(|(px, dx)| px * (dx - upper).exp2()).sum();
        lower = z.log2() + upper;
        if upper - lower < tol {
            return Ok(Rate::from_formula(lower));
        }
        let p1 = tilt(&p, &d, 1.0);
        let d1 = divergences(&p1, transition);
        let pa = tilt(&p, &d, a);
        let da = divergences(&pa, transition);
        if dot(&pa, &da) > dot(&p1, &d1) {
            (p, d) = (pa, da);
            a *= 2.0;
        } else {
            (p, d) = (p1, d1);
            a = (a / 2.0).max(2.0);
        }
    }
    Err(Error::NoConvergence {
        iterations: BA_MAX_ITER,
        lower,
        upper,
    })
}

/// Joint pmf over a finite product alphabet, stored row-major.
#[derive(Clone, Debug)]
pub struct Pmf {
    shape: Vec<usize>,
    p: Vec<f64>,
}

impl Pmf {
    pub fn new(shape: Vec<usize>, p: Vec<f64>) -> Result<Pmf> {
        let n: usize = shape.iter().product();
        if n != p.len() {
            return Err(Error::Domain(format!("pmf has {} cells, shape needs {n}", p.len())));
        }
        if p.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::Domain("pmf has a negative entry".into()));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("pmf sums to {s}")));
        }
        Ok(Pmf { shape, p })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Joint entropy in bits of the listed axes.
    pub fn entropy(&self, axes: &[usize]) -> f64 {
        let dims: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        let mut marg = vec![0.0; dims.iter().product::<usize>().max(1)];
        let mut idx = vec![0usize; self.shape.len()];
        for &v in &self.p {
            let mut k = 0;
            for (&a, &d) in axes.iter().zip(&dims) {
                k = k * d + idx[a];
            }
            marg[k] += v;
            for ax in (0..idx.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < self.shape[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        marg.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum()
    }

    /// I(A;B|C) in bits.
    pub fn mutual_information(&self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        let join = |xs: &[&[usize]]| -> Vec<usize> { xs.iter().flat_map(|x| x.iter().copied()).collect() };
        self.entropy(&join(&[a, c])) + self.entropy(&join(&[b, c])) - self.entropy(&join(&[a, b, c])) - self.entropy(c)
    }
}
