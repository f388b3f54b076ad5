//! Scalar reference implementation of the classifier's forward pass and
//! loss, generic over the number type.
//!
//! It shares no code with the tensor path and exists to serve as a
//! finite-difference oracle. Evaluated in [`DoubleDouble`] (about 106
//! significant bits) the rounding noise of a central difference drops far
//! below the size of even very small gradient components.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{HiddenVariant, Hyperparameters, ModelParams};
use crate::corpus::Label;
use crate::textvec::EncodedSequence;

pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + PartialOrd
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn tanh(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn sigmoid(self) -> Self {
        Self::one() / (Self::one() + (-self).exp())
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
}

/// Unevaluated sum `hi + lo` of two doubles with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const LN2: DoubleDouble = DoubleDouble {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

impl DoubleDouble {
    pub const fn new(v: f64) -> Self {
        DoubleDouble { hi: v, lo: 0.0 }
    }

    fn from_parts(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        DoubleDouble { hi, lo }
    }

    fn scale_pow2(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        DoubleDouble {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    /// `exp(x) − 1` for `|x| ≤ 0.35`: Taylor series on `x/1024`, then ten
    /// doublings of `e^{2y} − 1 = 2p + p²`.
    fn expm1_reduced(self) -> Self {
        let s = self.scale_pow2(-10);
        let mut term = s;
        let mut sum = s;
        for n in 2..=12 {
            term = term * s / DoubleDouble::new(n as f64);
            sum = sum + term;
        }
        for _ in 0..10 {
            sum = sum.scale_pow2(1) + sum * sum;
        }
        sum
    }

    pub fn expm1(self) -> Self {
        if self.hi.abs() <= 0.34 {
            self.expm1_reduced()
        } else {
            self.exp() - DoubleDouble::new(1.0)
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, y: Self) -> Self {
        let (s, e) = two_sum(self.hi, y.hi);
        let (t, f) = two_sum(self.lo, y.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Self::from_parts(s, e + f)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, y: Self) -> Self {
        self + (-y)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, y: Self) -> Self {
        let (p, e) = two_prod(self.hi, y.hi);
        Self::from_parts(p, e + (self.hi * y.lo + self.lo * y.hi))
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, y: Self) -> Self {
        let q1 = self.hi / y.hi;
        let r = self - y * DoubleDouble::new(q1);
        let q2 = r.hi / y.hi;
        let r = r - y * DoubleDouble::new(q2);
        let q3 = r.hi / y.hi;
        DoubleDouble::from_parts(q1, q2) + DoubleDouble::new(q3)
    }
}

impl Real for DoubleDouble {
    fn from_f64(v: f64) -> Self {
        DoubleDouble::new(v)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn exp(self) -> Self {
        if self.hi > 709.0 {
            return DoubleDouble::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return DoubleDouble::new(0.0);
        }
        let k = (self.hi / LN2.hi).round();
        let r = self - LN2 * DoubleDouble::new(k);
        (r.expm1_reduced() + DoubleDouble::new(1.0)).scale_pow2(k as i32)
    }

    fn ln(self) -> Self {
        // Newton on exp(y) = x.
        let mut y = DoubleDouble::new(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - DoubleDouble::new(1.0);
        }
        y
    }

    fn tanh(self) -> Self {
        let neg = self.hi < 0.0;
        let a = if neg { -self } else { self };
        if a.hi > 40.0 {
            let one = DoubleDouble::new(1.0);
            return if neg { -one } else { one };
        }
        let t = (a + a).expm1();
        let r = t / (t + DoubleDouble::new(2.0));
        if neg {
            -r
        } else {
            r
        }
    }
}

/// Parameters flattened per tensor in [`ModelParams::tensors`] order.
pub fn flatten_params<R: Real>(model: &ModelParams) -> Vec<Vec<R>> {
    model
        .tensors()
        .iter()
        .map(|t| t.data().iter().map(|&v| R::from_f64(v)).collect())
        .collect()
}

const EMBEDDING: usize = 0;
const FORWARD_LSTM: usize = 1;
const BACKWARD_LSTM: usize = 13;
const DENSE1_W: usize = 25;
const DENSE1_B: usize = 26;
const DENSE2_W: usize = 27;
const DENSE2_B: usize = 28;
const HEAD_W: usize = 29;
const HEAD_B: usize = 30;

/// Final hidden states of one direction, one per processed position.
fn run_lstm<R: Real>(p: &[Vec<R>], base: usize, xs: &[&[R]], h: usize, variant: HiddenVariant) -> Vec<Vec<R>> {
    let d = xs.first().map_or(0, |x| x.len());
    let mut hid = vec![R::zero(); h];
    let mut mem = vec![R::zero(); h];
    let mut out = Vec::with_capacity(xs.len());
    for x in xs {
        let gate = |g: usize, k: usize| {
            let w = &p[base + 3 * g];
            let i = &p[base + 3 * g + 1];
            let b = &p[base + 3 * g + 2];
            let mut a = b[k];
            for j in 0..h {
                a = a + w[k * h + j] * hid[j];
            }
            for j in 0..d {
                a = a + i[k * d + j] * x[j];
            }
            a
        };
        let mut new_h = vec![R::zero(); h];
        let mut new_m = vec![R::zero(); h];
        for k in 0..h {
            let u = gate(0, k).sigmoid();
            let f = gate(1, k).sigmoid();
            let o = gate(2, k).sigmoid();
            let c = gate(3, k).tanh();
            new_m[k] = f * mem[k] + u * c;
            new_h[k] = match variant {
                HiddenVariant::Squashed => (o * new_m[k]).tanh(),
                HiddenVariant::Standard => o * new_m[k].tanh(),
            };
        }
        hid = new_h;
        mem = new_m;
        out.push(hid.clone());
    }
    out
}

/// Positive-class probability with dropout off.
pub fn reference_probability<R: Real>(p: &[Vec<R>], hp: &Hyperparameters, seq: &EncodedSequence) -> R {
    let (d, h, l, dl1, dl2) = (hp.embedding_dim, hp.hidden, hp.seq_len, hp.dense1, hp.dense2);
    let xs: Vec<&[R]> = seq
        .indices
        .iter()
        .map(|&i| &p[EMBEDDING][i * d..(i + 1) * d])
        .collect();
    let fwd = run_lstm(p, FORWARD_LSTM, &xs, h, hp.hidden_variant);
    let rev: Vec<&[R]> = xs.iter().rev().copied().collect();
    let bwd = run_lstm(p, BACKWARD_LSTM, &rev, h, hp.hidden_variant);

    let mut logit = p[HEAD_B][0];
    for t in 0..l {
        let concat: Vec<R> = fwd[t].iter().chain(&bwd[l - 1 - t]).copied().collect();
        let mut y1 = vec![R::zero(); dl1];
        for (j, y) in y1.iter_mut().enumerate() {
            let mut a = p[DENSE1_B][j];
            for (k, &v) in concat.iter().enumerate() {
                a = a + v * p[DENSE1_W][k * dl1 + j];
            }
            *y = if a > R::zero() { a } else { R::zero() };
        }
        for j in 0..dl2 {
            let mut a = p[DENSE2_B][j];
            for (k, &v) in y1.iter().enumerate() {
                a = a + v * p[DENSE2_W][k * dl2 + j];
            }
            logit = logit + a * p[HEAD_W][t * dl2 + j];
        }
    }
    logit.sigmoid()
}

/// Clipped binary cross-entropy of one example.
pub fn reference_loss<R: Real>(p: &[Vec<R>], hp: &Hyperparameters, seq: &EncodedSequence, label: Label) -> R {
    let lo = R::from_f64(crate::train::CLIP);
    let hi = R::one() - lo;
    let mut y = reference_probability(p, hp, seq);
    if y < lo {
        y = lo;
    }
    if y > hi {
        y = hi;
    }
    match label {
        Label::Positive => -y.ln(),
        Label::Negative => -(R::one() - y).ln(),
    }
}
