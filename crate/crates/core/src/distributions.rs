//! Beta-binomial and Ewens laws, the samplers that drive the chains, and
//! Monte Carlo checks of uniform-permutation cycle moments.

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::hypergeom::pochhammer;
use crate::rational::{binomial, factorial, Rational};
use crate::{Error, Result};

/// Beta-binomial law on `{0, ..., n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaBinomialParams {
    n: usize,
    alpha: Rational,
    beta: Rational,
}

impl BetaBinomialParams {
    pub fn new(n: usize, alpha: Rational, beta: Rational) -> Result<Self> {
        if !alpha.is_positive() || !beta.is_positive() {
            return Err(Error::Domain(format!(
                "beta-binomial needs alpha, beta > 0 (got {alpha}, {beta})"
            )));
        }
        Ok(Self { n, alpha, beta })
    }

    pub fn symmetric(n: usize, theta: Rational) -> Result<Self> {
        Self::new(n, theta.clone(), theta)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    /// Full mass vector `m(0), ..., m(n)`.
    pub fn pmf_vec(&self) -> Vec<Rational> {
        (0..=self.n).map(|j| self.mass(j)).collect()
    }

    fn mass(&self, j: usize) -> Rational {
        let n = self.n;
        Rational::from_integer(binomial(n, j))
            * pochhammer(&self.alpha, j)
            * pochhammer(&self.beta, n - j)
            / pochhammer(&(&self.alpha + &self.beta), n)
    }
}

/// `m(j) = C(n, j) (alpha)_j (beta)_{n-j} / (alpha + beta)_n`.
pub fn beta_binomial_pmf(params: &BetaBinomialParams, j: usize) -> Result<Rational> {
    if j > params.n {
        return Err(Error::OutOfRange {
            what: "beta-binomial point",
            value: j,
            max: params.n,
        });
    }
    Ok(params.mass(j))
}

/// Cycle counts `(a_1, ..., a_n)` of a permutation of `n` points.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycleType {
    counts: Vec<usize>,
}

impl CycleType {
    /// `counts[i - 1]` is the number of `i`-cycles.
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        let n = counts.len();
        let size: usize = counts.iter().enumerate().map(|(i, a)| (i + 1) * a).sum();
        if size != n {
            return Err(Error::InvalidCycleType(format!(
                "sum of i * a_i is {size}, expected {n}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidCycleType("empty cycle type".into()));
        }
        Ok(Self { counts })
    }

    pub fn from_cycle_lengths(lengths: &[usize]) -> Result<Self> {
        let n: usize = lengths.iter().sum();
        let mut counts = vec![0; n];
        for &len in lengths {
            if len == 0 {
                return Err(Error::InvalidCycleType("zero-length cycle".into()));
            }
            counts[len - 1] += 1;
        }
        Self::new(counts)
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Number of `k`-cycles (`k >= 1`); zero beyond `n`.
    pub fn count(&self, k: usize) -> usize {
        if k == 0 {
            return 0;
        }
        self.counts.get(k - 1).copied().unwrap_or(0)
    }

    pub fn cycle_count(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Permutations with this cycle type: `n! / prod(i^{a_i} a_i!)`.
    pub fn class_size(&self) -> BigInt {
        let denom = self
            .counts
            .iter()
            .enumerate()
            .fold(BigInt::one(), |acc, (i, &a)| {
                acc * num_traits::pow(BigInt::from(i + 1), a) * factorial(a)
            });
        factorial(self.n()) / denom
    }
}

/// All cycle types of permutations of `n` points (partitions of `n`).
pub fn cycle_types(n: usize) -> Vec<CycleType> {
    fn rec(remaining: usize, max_part: usize, parts: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(parts.clone());
            return;
        }
        for p in (1..=max_part.min(remaining)).rev() {
            parts.push(p);
            rec(remaining - p, p, parts, out);
            parts.pop();
        }
    }
    if n == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|parts| CycleType::from_cycle_lengths(&parts).expect("partition of n"))
        .collect()
}

/// Ewens measure on permutations of `n` points, `P(s) = theta^{c(s)} / (theta)_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EwensParams {
    n: usize,
    theta: Rational,
}

impl EwensParams {
    pub fn new(n: usize, theta: Rational) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("Ewens law needs n >= 1".into()));
        }
        if !theta.is_positive() {
            return Err(Error::Domain(format!("theta must be positive, got {theta}")));
        }
        Ok(Self { n, theta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> &Rational {
        &self.theta
    }
}

/// Mass of the whole conjugacy class of type `t` under the Ewens law.
pub fn ewens_pmf_cycletype(params: &EwensParams, t: &CycleType) -> Result<Rational> {
    if t.n() != params.n {
        return Err(Error::InvalidCycleType(format!(
            "cycle type is for n = {}, expected {}",
            t.n(),
            params.n
        )));
    }
    let weight = num_traits::pow(params.theta.clone(), t.cycle_count());
    Ok(Rational::from_integer(t.class_size()) * weight / pochhammer(&params.theta, params.n))
}

/// Chinese-restaurant seating of `n` items: returns the block label of each
/// item. Blocks are the cycle sets of an Ewens(`theta`) permutation.
///
/// Item `i` (0-based) opens a new block with probability
/// `theta / (theta + i)` and otherwise joins the block of a uniformly chosen
/// earlier item, which is a size-biased choice of block.
pub fn sample_ewens_blocks<R: Rng + ?Sized>(n: usize, theta: f64, rng: &mut R) -> (Vec<usize>, usize) {
    let mut label = Vec::with_capacity(n);
    let mut blocks = 0;
    for i in 0..n {
        let u: f64 = rng.random::<f64>() * (theta + i as f64);
        if u < theta || i == 0 {
            label.push(blocks);
            blocks += 1;
        } else {
            let pick = rng.random_range(0..i);
            label.push(label[pick]);
        }
    }
    (label, blocks)
}

/// Cycle lengths of an Ewens(`theta`) permutation of `n` points, in order of
/// first appearance.
pub fn sample_ewens_cycle_lengths<R: Rng + ?Sized>(n: usize, theta: f64, rng: &mut R) -> Vec<usize> {
    let (label, blocks) = sample_ewens_blocks(n, theta, rng);
    let mut sizes = vec![0; blocks];
    for l in label {
        sizes[l] += 1;
    }
    sizes
}

pub fn sample_ewens_cycle_type<R: Rng + ?Sized>(params: &EwensParams, rng: &mut R) -> CycleType {
    let theta = crate::rational::to_f64(&params.theta);
    CycleType::from_cycle_lengths(&sample_ewens_cycle_lengths(params.n, theta, rng))
        .expect("sampled lengths sum to n")
}

/// Cycle lengths of a permutation given in one-line notation.
pub fn cycle_lengths(perm: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; perm.len()];
    let mut lengths = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        lengths.push(len);
    }
    lengths
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MomentEstimate {
    pub estimate: f64,
    pub target: f64,
    pub stderr: f64,
}

impl MomentEstimate {
    pub fn within(&self, sigmas: f64) -> bool {
        (self.estimate - self.target).abs() <= sigmas * self.stderr
    }
}

pub(crate) fn mean_and_stderr(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut count = 0.0;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for v in values {
        count += 1.0;
        let delta = v - mean;
        mean += delta / count;
        m2 += delta * (v - mean);
    }
    if count < 2.0 {
        return (mean, f64::INFINITY);
    }
    (mean, (m2 / (count - 1.0) / count).sqrt())
}

/// Estimates `prod l_i! * E[prod C(a_{k_i}(s), l_i)]` over uniform
/// permutations `s` of `n` points, drawn by shuffling. The target is
/// `prod 1/k_i^{l_i}` when `sum k_i l_i <= n` and `0` otherwise.
pub fn polya_moment_check<R: Rng + ?Sized>(
    n: usize,
    moments: &[(usize, usize)],
    samples: usize,
    rng: &mut R,
) -> Result<MomentEstimate> {
    if moments.iter().any(|&(k, l)| k == 0 || l == 0) {
        return Err(Error::Domain("moment specs need k >= 1 and l >= 1".into()));
    }
    let weight: usize = moments.iter().map(|&(k, l)| k * l).sum();
    let target = if weight <= n {
        moments
            .iter()
            .map(|&(k, l)| (k as f64).powi(-(l as i32)))
            .product()
    } else {
        0.0
    };
    let falling = |a: usize, l: usize| -> f64 {
        (0..l).map(|i| a as f64 - i as f64).product::<f64>().max(0.0)
    };
    let mut perm: Vec<usize> = (0..n).collect();
    let values = (0..samples).map(|_| {
        perm.shuffle(rng);
        let lengths = cycle_lengths(&perm);
        moments
            .iter()
            .map(|&(k, l)| falling(lengths.iter().filter(|&&c| c == k).count(), l))
            .product::<f64>()
    });
    let (estimate, stderr) = mean_and_stderr(values.collect::<Vec<_>>().into_iter());
    Ok(MomentEstimate {
        estimate,
        target,
        stderr,
    })
}

/// Two-sample Kolmogorov-Smirnov test. Returns the statistic `D` and the
/// asymptotic p-value from the Kolmogorov distribution.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("KS test needs two non-empty samples".into()));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::Domain("KS test input contains NaN".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let term = 2.0 * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        p += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    Ok((d, p.clamp(0.0, 1.0)))
}

pub const DEFAULT_TRUNCATION_MASS: f64 = 1e-12;

/// GEM(`theta`) stick-breaking of an interval of length `total`.
///
/// Pieces are `Y_1 = total R_1`, `Y_j = total (1-R_1)...(1-R_{j-1}) R_j`
/// with `R_j ~ Beta(1, theta)`. Breaking stops once the unallocated length
/// drops below `truncation_mass * total`; the remainder is appended as a
/// final piece, so a left-to-right float sum of the pieces equals `total`.
pub fn stick_breaking_lengths<R: Rng + ?Sized>(
    total: f64,
    theta: f64,
    truncation_mass: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&total) {
        return Err(Error::Domain(format!("stick length {total} outside [0, 1]")));
    }
    if !(truncation_mass > 0.0 && truncation_mass < 1.0) {
        return Err(Error::Domain(format!(
            "truncation mass {truncation_mass} outside (0, 1)"
        )));
    }
    if total == 0.0 {
        return Ok(Vec::new());
    }
    let ratio = Beta::new(1.0, theta)
        .map_err(|e| Error::Domain(format!("theta = {theta}: {e}")))?;
    let threshold = truncation_mass * total;
    let mut pieces = Vec::new();
    let mut allocated = 0.0;
    loop {
        let remaining = total - allocated;
        if remaining < threshold {
            break;
        }
        let piece = remaining * ratio.sample(rng);
        if allocated + piece >= total {
            break;
        }
        pieces.push(piece);
        allocated += piece;
    }
    // Once allocated is within a factor of two of total this difference is
    // exact, and adding it back reproduces total exactly.
    pieces.push(total - allocated);
    Ok(pieces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ks_detects_shift_and_accepts_same_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
        let c: Vec<f64> = b.iter().map(|x| x + 0.1).collect();
        assert!(ks_two_sample(&a, &b).unwrap().1 > 0.01);
        assert!(ks_two_sample(&a, &c).unwrap().1 < 1e-6);
        assert_eq!(ks_two_sample(&a, &a).unwrap().0, 0.0);
        assert!(ks_two_sample(&a, &[]).is_err());
    }

    #[test]
    fn beta_binomial_examples() {
        for n in 0..6 {
            let p = BetaBinomialParams::new(n, int(1), int(1)).unwrap();
            for j in 0..=n {
                assert_eq!(beta_binomial_pmf(&p, j).unwrap(), ratio(1, n as i64 + 1));
            }
        }
        let p = BetaBinomialParams::symmetric(1, ratio(7, 3)).unwrap();
        assert_eq!(p.pmf_vec(), vec![ratio(1, 2), ratio(1, 2)]);
        let p = BetaBinomialParams::symmetric(2, int(2)).unwrap();
        assert_eq!(p.pmf_vec(), vec![ratio(3, 10), ratio(2, 5), ratio(3, 10)]);
        assert!(beta_binomial_pmf(&p, 3).is_err());
        assert!(BetaBinomialParams::new(2, int(0), int(1)).is_err());
    }

    #[test]
    fn ewens_examples() {
        let params = EwensParams::new(2, int(2)).unwrap();
        let id = CycleType::new(vec![2, 0]).unwrap();
        let tr = CycleType::new(vec![0, 1]).unwrap();
        assert_eq!(ewens_pmf_cycletype(&params, &id).unwrap(), ratio(2, 3));
        assert_eq!(ewens_pmf_cycletype(&params, &tr).unwrap(), ratio(1, 3));

        let one = EwensParams::new(1, ratio(5, 2)).unwrap();
        assert_eq!(
            ewens_pmf_cycletype(&one, &CycleType::new(vec![1]).unwrap()).unwrap(),
            int(1)
        );

        // theta = 1: class mass is class size over n!.
        let uniform = EwensParams::new(5, int(1)).unwrap();
        for t in cycle_types(5) {
            let expected = Rational::new(t.class_size(), factorial(5));
            assert_eq!(ewens_pmf_cycletype(&uniform, &t).unwrap(), expected);
        }
        assert!(ewens_pmf_cycletype(&uniform, &id).is_err());
    }

    #[test]
    fn cycle_type_validation() {
        assert!(CycleType::new(vec![1, 1, 0]).is_ok());
        assert!(CycleType::new(vec![1, 1]).is_err());
        assert!(CycleType::new(vec![]).is_err());
        let t = CycleType::from_cycle_lengths(&[3, 1, 1]).unwrap();
        assert_eq!(t.counts(), &[2, 0, 1, 0, 0]);
        assert_eq!(t.cycle_count(), 3);
        assert_eq!(t.class_size(), BigInt::from(20));
        assert_eq!(cycle_types(5).len(), 7);
        assert_eq!(cycle_types(12).len(), 77);
    }

    #[test]
    fn ewens_sampler_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let one = EwensParams::new(1, int(3)).unwrap();
        for _ in 0..100 {
            assert_eq!(sample_ewens_cycle_type(&one, &mut rng).counts(), &[1]);
        }
        let params = EwensParams::new(2, int(2)).unwrap();
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|_| sample_ewens_cycle_type(&params, &mut rng).count(1) == 2)
            .count() as f64;
        let p = 2.0 / 3.0;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((hits / draws as f64 - p).abs() < 3.0 * se);
    }

    #[test]
    fn cycle_lengths_of_permutation() {
        assert_eq!(cycle_lengths(&[1, 0, 2, 4, 5, 3]), vec![2, 1, 3]);
        assert!(cycle_lengths(&[]).is_empty());
    }

    #[test]
    fn stick_breaking_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(stick_breaking_lengths(0.0, 1.0, 1e-12, &mut rng).unwrap().is_empty());
        for &total in &[1.0, 0.3, 0.7, 1e-3] {
            for _ in 0..200 {
                let pieces = stick_breaking_lengths(total, 2.0, 1e-12, &mut rng).unwrap();
                assert_eq!(pieces.iter().sum::<f64>(), total);
                assert!(pieces.iter().all(|&p| p >= 0.0));
            }
        }
        assert!(stick_breaking_lengths(1.0, 1.0, 0.0, &mut rng).is_err());
        assert!(stick_breaking_lengths(1.0, -1.0, 1e-6, &mut rng).is_err());
    }

    #[test]
    fn stick_breaking_first_piece_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let draws = 100_000;
        let firsts: Vec<f64> = (0..draws)
            .map(|_| stick_breaking_lengths(1.0, 1.0, 1e-12, &mut rng).unwrap()[0])
            .collect();
        let (mean, se) = mean_and_stderr(firsts.into_iter());
        assert!((mean - 0.5).abs() < 3.0 * se, "{mean} +- {se}");
    }

    #[test]
    fn polya_zero_case_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let est = polya_moment_check(4, &[(3, 2)], 1000, &mut rng).unwrap();
        assert_eq!(est.target, 0.0);
        assert_eq!(est.estimate, 0.0);
        assert!(polya_moment_check(4, &[(0, 1)], 10, &mut rng).is_err());
    }
}
