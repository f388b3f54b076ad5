//! LSTM cell and bidirectional layer.
//!
//! Each gate reads the previous hidden vector, the current input and a bias:
//!
//! ```text
//! u = σ(W_u h₋ + I_u x + b_u)      f = σ(W_f h₋ + I_f x + b_f)
//! o = σ(W_o h₋ + I_o x + b_o)      c = tanh(W_c h₋ + I_c x + b_c)
//! m = f ⊙ m₋ + u ⊙ c
//! h = tanh(o ⊙ m)   (Squashed)   or   h = o ⊙ tanh(m)   (Standard)
//! ```

use rand::Rng;

use super::tensor::{matvec_acc, matvec_t_acc, outer_acc};
use super::{HiddenVariant, NnError, Tensor};

pub const UPDATE: usize = 0;
pub const FORGET: usize = 1;
pub const OUTPUT: usize = 2;
pub const CANDIDATE: usize = 3;

/// Weights of one gate: recurrent `w` (h×h), input projection `i` (h×d_in)
/// and bias `b` (h).
#[derive(Debug, Clone, PartialEq)]
pub struct GateParams {
    pub w: Tensor,
    pub i: Tensor,
    pub b: Tensor,
}

impl GateParams {
    fn zeros(hidden: usize, input_dim: usize) -> Self {
        GateParams {
            w: Tensor::zeros(&[hidden, hidden]),
            i: Tensor::zeros(&[hidden, input_dim]),
            b: Tensor::zeros(&[hidden]),
        }
    }
}

/// Gates in the order update, forget, output, candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub gates: [GateParams; 4],
}

impl LstmParams {
    pub fn zeros(hidden: usize, input_dim: usize) -> Self {
        LstmParams {
            gates: std::array::from_fn(|_| GateParams::zeros(hidden, input_dim)),
        }
    }

    /// Glorot-uniform matrices, zero biases except the forget gate at 1.
    pub fn init<R: Rng + ?Sized>(hidden: usize, input_dim: usize, rng: &mut R) -> Self {
        let bound_w = (6.0 / (2 * hidden) as f64).sqrt();
        let bound_i = (6.0 / (hidden + input_dim) as f64).sqrt();
        let gates = std::array::from_fn(|g| {
            let w = Tensor::uniform(&[hidden, hidden], bound_w, rng);
            let i = Tensor::uniform(&[hidden, input_dim], bound_i, rng);
            let b = Tensor::filled(&[hidden], if g == FORGET { 1.0 } else { 0.0 });
            GateParams { w, i, b }
        });
        LstmParams { gates }
    }

    pub fn hidden(&self) -> usize {
        self.gates[0].b.len()
    }

    pub fn input_dim(&self) -> usize {
        self.gates[0].i.cols()
    }

    pub fn tensors(&self) -> Vec<&Tensor> {
        self.gates.iter().flat_map(|g| [&g.w, &g.i, &g.b]).collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        self.gates
            .iter_mut()
            .flat_map(|g| [&mut g.w, &mut g.i, &mut g.b])
            .collect()
    }

    fn check(&self) -> Result<(), NnError> {
        let (h, d) = (self.hidden(), self.input_dim());
        for g in &self.gates {
            g.w.expect_shape(&[h, h], "recurrent weights")?;
            g.i.expect_shape(&[h, d], "input projection")?;
            g.b.expect_shape(&[h], "gate bias")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub m: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            h: vec![0.0; hidden],
            m: vec![0.0; hidden],
        }
    }
}

/// Everything one step needs for its backward pass.
#[derive(Debug, Clone)]
pub struct StepCache {
    pub x: Vec<f64>,
    pub prev: LstmState,
    /// Gate pre-activations, same order as the gates.
    pub pre: [Vec<f64>; 4],
    /// Gate activations `u, f, o, c`.
    pub act: [Vec<f64>; 4],
    pub next: LstmState,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn lstm_step(
    x: &[f64],
    prev: &LstmState,
    p: &LstmParams,
    variant: HiddenVariant,
) -> Result<(LstmState, StepCache), NnError> {
    p.check()?;
    let h = p.hidden();
    if x.len() != p.input_dim() || prev.h.len() != h || prev.m.len() != h {
        return Err(NnError::ShapeMismatch(format!(
            "lstm step: input {} (want {}), state {}/{} (want {h})",
            x.len(),
            p.input_dim(),
            prev.h.len(),
            prev.m.len()
        )));
    }
    Ok(step_unchecked(x, prev, p, variant))
}

fn step_unchecked(x: &[f64], prev: &LstmState, p: &LstmParams, variant: HiddenVariant) -> (LstmState, StepCache) {
    let pre: [Vec<f64>; 4] = std::array::from_fn(|g| {
        let gate = &p.gates[g];
        let mut a = gate.b.data().to_vec();
        matvec_acc(&mut a, &gate.w, &prev.h);
        matvec_acc(&mut a, &gate.i, x);
        a
    });
    let act: [Vec<f64>; 4] = std::array::from_fn(|g| {
        if g == CANDIDATE {
            pre[g].iter().map(|v| v.tanh()).collect()
        } else {
            pre[g].iter().map(|&v| sigmoid(v)).collect()
        }
    });
    let (u, f, o, c) = (&act[UPDATE], &act[FORGET], &act[OUTPUT], &act[CANDIDATE]);
    let m: Vec<f64> = (0..u.len()).map(|k| f[k] * prev.m[k] + u[k] * c[k]).collect();
    let h: Vec<f64> = match variant {
        HiddenVariant::Squashed => (0..m.len()).map(|k| (o[k] * m[k]).tanh()).collect(),
        HiddenVariant::Standard => (0..m.len()).map(|k| o[k] * m[k].tanh()).collect(),
    };
    let next = LstmState { h, m };
    let cache = StepCache {
        x: x.to_vec(),
        prev: prev.clone(),
        pre,
        act,
        next: next.clone(),
    };
    (next, cache)
}

/// Backward through one step. `dh` and `dm` are the total gradients reaching
/// this step's hidden and remember vectors. Parameter gradients accumulate
/// into `grads`, the input gradient into `dx`. Returns `(dh_prev, dm_prev)`.
pub fn lstm_step_backward(
    cache: &StepCache,
    p: &LstmParams,
    variant: HiddenVariant,
    dh: &[f64],
    dm: &[f64],
    grads: &mut LstmParams,
    dx: &mut [f64],
) -> (Vec<f64>, Vec<f64>) {
    let n = dh.len();
    let (u, f, o, c) = (
        &cache.act[UPDATE],
        &cache.act[FORGET],
        &cache.act[OUTPUT],
        &cache.act[CANDIDATE],
    );
    let m = &cache.next.m;
    let mut do_ = vec![0.0; n];
    let mut dm_total = dm.to_vec();
    match variant {
        HiddenVariant::Squashed => {
            for k in 0..n {
                let hk = cache.next.h[k];
                let dz = dh[k] * (1.0 - hk * hk);
                do_[k] = dz * m[k];
                dm_total[k] += dz * o[k];
            }
        }
        HiddenVariant::Standard => {
            for k in 0..n {
                let tm = m[k].tanh();
                do_[k] = dh[k] * tm;
                dm_total[k] += dh[k] * o[k] * (1.0 - tm * tm);
            }
        }
    }

    let mut da: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);
    let mut dm_prev = vec![0.0; n];
    for k in 0..n {
        let dmk = dm_total[k];
        da[UPDATE][k] = dmk * c[k] * u[k] * (1.0 - u[k]);
        da[FORGET][k] = dmk * cache.prev.m[k] * f[k] * (1.0 - f[k]);
        da[OUTPUT][k] = do_[k] * o[k] * (1.0 - o[k]);
        da[CANDIDATE][k] = dmk * u[k] * (1.0 - c[k] * c[k]);
        dm_prev[k] = dmk * f[k];
    }

    let mut dh_prev = vec![0.0; n];
    for g in 0..4 {
        let gp = &p.gates[g];
        let gg = &mut grads.gates[g];
        outer_acc(&mut gg.w, &da[g], &cache.prev.h);
        outer_acc(&mut gg.i, &da[g], &cache.x);
        for (b, d) in gg.b.data_mut().iter_mut().zip(&da[g]) {
            *b += d;
        }
        matvec_t_acc(&mut dh_prev, &gp.w, &da[g]);
        matvec_t_acc(dx, &gp.i, &da[g]);
    }
    (dh_prev, dm_prev)
}

/// Runs one direction over `rows` (in processing order) from a zero state.
pub fn run_direction<'a, I>(rows: I, p: &LstmParams, variant: HiddenVariant) -> Vec<StepCache>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut state = LstmState::zeros(p.hidden());
    rows.into_iter()
        .map(|x| {
            let (next, cache) = step_unchecked(x, &state, p, variant);
            state = next;
            cache
        })
        .collect()
}

/// Both directions' step caches, each indexed by sequence position.
#[derive(Debug, Clone)]
pub struct BiLstmCache {
    pub forward: Vec<StepCache>,
    /// `backward[t]` is the step that consumed position `t`.
    pub backward: Vec<StepCache>,
}

pub(crate) fn bilstm_forward_cached(
    x: &Tensor,
    fwd: &LstmParams,
    bwd: &LstmParams,
    variant: HiddenVariant,
) -> Result<(Tensor, BiLstmCache), NnError> {
    fwd.check()?;
    bwd.check()?;
    if x.shape().len() != 2 || x.cols() != fwd.input_dim() || x.cols() != bwd.input_dim() {
        return Err(NnError::ShapeMismatch(format!(
            "bilstm input {:?} vs input width {}/{}",
            x.shape(),
            fwd.input_dim(),
            bwd.input_dim()
        )));
    }
    if fwd.hidden() != bwd.hidden() {
        return Err(NnError::ShapeMismatch("direction widths differ".into()));
    }
    let l = x.rows();
    let h = fwd.hidden();
    let forward = run_direction((0..l).map(|t| x.row(t)), fwd, variant);
    let mut backward = run_direction((0..l).rev().map(|t| x.row(t)), bwd, variant);
    backward.reverse();

    let mut out = Tensor::zeros(&[l, 2 * h]);
    for t in 0..l {
        let row = out.row_mut(t);
        row[..h].copy_from_slice(&forward[t].next.h);
        row[h..].copy_from_slice(&backward[t].next.h);
    }
    Ok((out, BiLstmCache { forward, backward }))
}

/// `l×d` input to `l×2h` output: row `t` is the forward hidden state after
/// reading positions `0..=t` next to the backward hidden state after reading
/// positions `l-1` down to `t`.
pub fn bilstm_forward(
    x: &Tensor,
    fwd: &LstmParams,
    bwd: &LstmParams,
    variant: HiddenVariant,
) -> Result<Tensor, NnError> {
    bilstm_forward_cached(x, fwd, bwd, variant).map(|(out, _)| out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_params(h: usize, d: usize, seed: u64) -> LstmParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = LstmParams::init(h, d, &mut rng);
        for t in p.tensors_mut() {
            for v in t.data_mut() {
                *v += rng.gen_range(-0.3..0.3);
            }
        }
        p
    }

    #[test]
    fn zero_params_zero_state() {
        let p = LstmParams::zeros(3, 2);
        let (s, cache) = lstm_step(&[0.7, -1.0], &LstmState::zeros(3), &p, HiddenVariant::Squashed).unwrap();
        for g in [UPDATE, FORGET, OUTPUT] {
            assert!(cache.act[g].iter().all(|&v| v == 0.5));
        }
        assert!(cache.act[CANDIDATE].iter().all(|&v| v == 0.0));
        assert_eq!(s.m, vec![0.0; 3]);
        assert_eq!(s.h, vec![0.0; 3]);
    }

    #[test]
    fn zero_params_carry_memory() {
        let p = LstmParams::zeros(2, 1);
        let prev = LstmState {
            h: vec![0.0; 2],
            m: vec![1.0, 1.0],
        };
        let (s, _) = lstm_step(&[0.0], &prev, &p, HiddenVariant::Squashed).unwrap();
        assert_eq!(s.m, vec![0.5, 0.5]);
        for v in &s.h {
            assert!((v - 0.25f64.tanh()).abs() < 1e-15);
        }
        let (s, _) = lstm_step(&[0.0], &prev, &p, HiddenVariant::Standard).unwrap();
        for v in &s.h {
            assert!((v - 0.5 * 0.5f64.tanh()).abs() < 1e-15);
        }
    }

    #[test]
    fn step_shape_errors() {
        let p = LstmParams::zeros(2, 3);
        assert!(lstm_step(&[0.0; 2], &LstmState::zeros(2), &p, HiddenVariant::Squashed).is_err());
        assert!(lstm_step(&[0.0; 3], &LstmState::zeros(4), &p, HiddenVariant::Squashed).is_err());
    }

    /// Scalar objective `Σ w_k h_k + Σ v_k m_k` over a single step, for
    /// finite-difference checking.
    fn objective(x: &[f64], prev: &LstmState, p: &LstmParams, variant: HiddenVariant, wh: &[f64], wm: &[f64]) -> f64 {
        let (s, _) = lstm_step(x, prev, p, variant).unwrap();
        s.h.iter().zip(wh).map(|(a, b)| a * b).sum::<f64>() + s.m.iter().zip(wm).map(|(a, b)| a * b).sum::<f64>()
    }

    #[test]
    fn step_gradients_match_central_differences() {
        let (h, d) = (4, 3);
        let eps = 1e-5;
        for variant in [HiddenVariant::Squashed, HiddenVariant::Standard] {
            for seed in 0..5 {
                let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
                let p = random_params(h, d, seed);
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let prev = LstmState {
                    h: (0..h).map(|_| rng.gen_range(-0.9..0.9)).collect(),
                    m: (0..h).map(|_| rng.gen_range(-1.5..1.5)).collect(),
                };
                let wh: Vec<f64> = (0..h).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let wm: Vec<f64> = (0..h).map(|_| rng.gen_range(-1.0..1.0)).collect();

                let (_, cache) = lstm_step(&x, &prev, &p, variant).unwrap();
                let mut grads = LstmParams::zeros(h, d);
                let mut dx = vec![0.0; d];
                let (dh_prev, dm_prev) = lstm_step_backward(&cache, &p, variant, &wh, &wm, &mut grads, &mut dx);

                let mut worst: f64 = 0.0;
                let mut compare = |a: f64, n: f64| {
                    let denom = a.abs().max(n.abs()).max(1e-12);
                    worst = worst.max((a - n).abs() / denom);
                };
                let analytic: Vec<f64> = grads.tensors().iter().flat_map(|t| t.data().to_vec()).collect();
                let mut k = 0;
                let mut probe = p.clone();
                for ti in 0..12 {
                    for j in 0..probe.tensors()[ti].len() {
                        let orig = probe.tensors()[ti].data()[j];
                        probe.tensors_mut()[ti].data_mut()[j] = orig + eps;
                        let up = objective(&x, &prev, &probe, variant, &wh, &wm);
                        probe.tensors_mut()[ti].data_mut()[j] = orig - eps;
                        let down = objective(&x, &prev, &probe, variant, &wh, &wm);
                        probe.tensors_mut()[ti].data_mut()[j] = orig;
                        compare(analytic[k], (up - down) / (2.0 * eps));
                        k += 1;
                    }
                }
                let perturb = |which: usize, j: usize, delta: f64| {
                    let mut xx = x.clone();
                    let mut pp = prev.clone();
                    match which {
                        0 => xx[j] += delta,
                        1 => pp.h[j] += delta,
                        _ => pp.m[j] += delta,
                    }
                    objective(&xx, &pp, &p, variant, &wh, &wm)
                };
                for j in 0..d {
                    compare(dx[j], (perturb(0, j, eps) - perturb(0, j, -eps)) / (2.0 * eps));
                }
                for j in 0..h {
                    compare(dh_prev[j], (perturb(1, j, eps) - perturb(1, j, -eps)) / (2.0 * eps));
                    compare(dm_prev[j], (perturb(2, j, eps) - perturb(2, j, -eps)) / (2.0 * eps));
                }
                assert!(worst < 1e-6, "{variant:?} seed {seed}: max rel error {worst:e}");
            }
        }
    }

    #[test]
    fn backward_direction_is_reversed_forward_run() {
        let (l, d, h) = (6, 3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = Tensor::uniform(&[l, d], 1.0, &mut rng);
        let fwd = random_params(h, d, 1);
        let bwd = random_params(h, d, 2);
        for variant in [HiddenVariant::Squashed, HiddenVariant::Standard] {
            let out = bilstm_forward(&x, &fwd, &bwd, variant).unwrap();
            assert_eq!(out.shape(), &[l, 2 * h]);
            let mut rev = Tensor::zeros(&[l, d]);
            for t in 0..l {
                rev.row_mut(t).copy_from_slice(x.row(l - 1 - t));
            }
            let rev_out = bilstm_forward(&rev, &bwd, &fwd, variant).unwrap();
            for t in 0..l {
                assert_eq!(&out.row(t)[h..], &rev_out.row(l - 1 - t)[..h]);
            }
        }
    }

    #[test]
    fn zero_params_zero_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Tensor::uniform(&[5, 3], 1.0, &mut rng);
        let p = LstmParams::zeros(4, 3);
        let out = bilstm_forward(&x, &p, &p, HiddenVariant::Squashed).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn activations_in_range() {
        let p = random_params(5, 3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = Tensor::uniform(&[20, 3], 3.0, &mut rng);
        let caches = run_direction((0..20).map(|t| x.row(t)), &p, HiddenVariant::Squashed);
        for c in &caches {
            for g in [UPDATE, FORGET, OUTPUT] {
                assert!(c.act[g].iter().all(|&v| v > 0.0 && v < 1.0));
            }
            assert!(c.act[CANDIDATE].iter().all(|&v| v > -1.0 && v < 1.0));
            assert!(c.next.h.iter().all(|&v| v > -1.0 && v < 1.0));
        }
    }

    #[test]
    fn init_bounds_and_forget_bias() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = LstmParams::init(4, 3, &mut rng);
        let bw = (6.0f64 / 8.0).sqrt();
        let bi = (6.0f64 / 7.0).sqrt();
        for (g, gate) in p.gates.iter().enumerate() {
            assert!(gate.w.data().iter().all(|v| v.abs() <= bw));
            assert!(gate.i.data().iter().all(|v| v.abs() <= bi));
            let want = if g == FORGET { 1.0 } else { 0.0 };
            assert!(gate.b.data().iter().all(|&v| v == want));
        }
    }
}
