use rand::seq::SliceRandom;
use rand::Rng;

use super::ChainSpec;
use crate::distributions::{cycle_lengths, sample_ewens_blocks, sample_ewens_cycle_lengths};
use crate::{Error, Result};

/// Longest binary string accepted by [`full_burnside_step`].
pub const MAX_FULL_STATE_LEN: usize = 1_000_000;

/// A realized path of the lumped chain. `states[0]` is the start.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub states: Vec<usize>,
    pub seed: u64,
    pub spec: ChainSpec,
}

fn coin_labelled_length<R: Rng + ?Sized>(block: usize, theta: f64, rng: &mut R) -> usize {
    sample_ewens_cycle_lengths(block, theta, rng)
        .into_iter()
        .filter(|_| rng.random_bool(0.5))
        .sum()
}

/// One step of the lumped chain from `state` ones: Ewens cycles of both
/// blocks, a fair coin per cycle, and the total length labelled one.
pub fn lumped_step<R: Rng + ?Sized>(state: usize, spec: &ChainSpec, rng: &mut R) -> Result<usize> {
    if state > spec.n() {
        return Err(Error::OutOfRange {
            what: "lumped state",
            value: state,
            max: spec.n(),
        });
    }
    let theta = spec.theta_f64();
    Ok(coin_labelled_length(state, theta, rng) + coin_labelled_length(spec.n() - state, theta, rng))
}

pub fn lumped_trajectory<R: Rng + ?Sized>(
    start: usize,
    steps: usize,
    spec: &ChainSpec,
    seed: u64,
    rng: &mut R,
) -> Result<TrajectorySample> {
    if start > spec.n() {
        return Err(Error::OutOfRange {
            what: "lumped state",
            value: start,
            max: spec.n(),
        });
    }
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = start;
    states.push(x);
    for _ in 0..steps {
        x = lumped_step(x, spec, rng)?;
        states.push(x);
    }
    Ok(TrajectorySample {
        states,
        seed,
        spec: spec.clone(),
    })
}

/// One step of the unlumped uniform Burnside process on binary strings.
///
/// Shuffles the positions of the ones and of the zeros into uniform
/// permutations, splits them into cycles and writes one fair coin per cycle.
pub fn full_burnside_step<R: Rng + ?Sized>(x: &[u8], rng: &mut R) -> Result<Vec<u8>> {
    if x.len() > MAX_FULL_STATE_LEN {
        return Err(Error::OutOfRange {
            what: "binary string length",
            value: x.len(),
            max: MAX_FULL_STATE_LEN,
        });
    }
    if let Some(bad) = x.iter().find(|&&b| b > 1) {
        return Err(Error::Domain(format!("binary string contains {bad}")));
    }
    let mut y = vec![0u8; x.len()];
    for bit in [0u8, 1] {
        let positions: Vec<usize> = (0..x.len()).filter(|&i| x[i] == bit).collect();
        let mut perm: Vec<usize> = (0..positions.len()).collect();
        perm.shuffle(rng);
        let mut seen = vec![false; perm.len()];
        for start in 0..perm.len() {
            if seen[start] {
                continue;
            }
            let label = u8::from(rng.random_bool(0.5));
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                y[positions[i]] = label;
                i = perm[i];
            }
        }
        debug_assert_eq!(cycle_lengths(&perm).iter().sum::<usize>(), positions.len());
    }
    Ok(y)
}

/// Twisted step on `[k]^n` (colors `0..k`), with `w(s) = theta^{c(s)}` and
/// `v(x) = prod_r gamma_r^{#color r}`, `gamma_0 = 1`.
///
/// `gammas` holds `gamma_1, ..., gamma_{k-1}`. Each color class gets Ewens
/// cycles; a cycle of length `c` takes color `r` with probability
/// `gamma_r^c / sum_l gamma_l^c`.
pub fn kcolors_twisted_step<R: Rng + ?Sized>(
    x: &[usize],
    k: usize,
    theta: f64,
    gammas: &[f64],
    rng: &mut R,
) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Domain("need at least two colors".into()));
    }
    if gammas.len() != k - 1 {
        return Err(Error::DimensionMismatch {
            expected: k - 1,
            got: gammas.len(),
        });
    }
    if !(theta > 0.0) || gammas.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::Domain("theta and gammas must be positive".into()));
    }
    if let Some(&bad) = x.iter().find(|&&c| c >= k) {
        return Err(Error::OutOfRange {
            what: "color",
            value: bad,
            max: k - 1,
        });
    }
    let log_gamma: Vec<f64> = std::iter::once(0.0).chain(gammas.iter().map(|g| g.ln())).collect();
    let mut y = vec![0usize; x.len()];
    let mut weights = vec![0.0; k];
    for color in 0..k {
        let positions: Vec<usize> = (0..x.len()).filter(|&i| x[i] == color).collect();
        let (labels, blocks) = sample_ewens_blocks(positions.len(), theta, rng);
        let mut sizes = vec![0usize; blocks];
        for &l in &labels {
            sizes[l] += 1;
        }
        let colors: Vec<usize> = sizes
            .iter()
            .map(|&c| {
                let scaled: Vec<f64> = log_gamma.iter().map(|lg| lg * c as f64).collect();
                let top = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                for (w, s) in weights.iter_mut().zip(&scaled) {
                    *w = (s - top).exp();
                }
                let total: f64 = weights.iter().sum();
                let mut u = rng.random::<f64>() * total;
                for (r, w) in weights.iter().enumerate() {
                    if u < *w {
                        return r;
                    }
                    u -= w;
                }
                k - 1
            })
            .collect();
        for (p, l) in positions.iter().zip(&labels) {
            y[*p] = colors[*l];
        }
    }
    Ok(y)
}
