//! The lumped (twisted) Burnside chain on `{0, ..., n}`: exact kernels,
//! samplers, the continuous limit, and a brute-force engine over explicit
//! group actions.

mod continuous;
mod group_action;
mod sampling;

pub use continuous::{beta_density, continuous_density, continuous_step, continuous_step_stickbreaking};
pub use group_action::{
    binary_strings_table, generic_twisted_matrix, lumpability_check, lumped_kernel, words_table,
    GroupActionTable,
};
pub use sampling::{
    full_burnside_step, kcolors_twisted_step, lumped_step, lumped_trajectory, TrajectorySample,
    MAX_FULL_STATE_LEN,
};

use num_traits::{One, Signed, Zero};

use crate::hypergeom::pochhammer;
use crate::rational::{binomial, int, to_f64, Rational};
use crate::{Error, Result};

/// Size and twist of the lumped chain; `theta = 1` is the untwisted chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    n: usize,
    theta: Rational,
}

impl ChainSpec {
    pub fn new(n: usize, theta: Rational) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("chain needs n >= 1".into()));
        }
        if !theta.is_positive() {
            return Err(Error::Domain(format!("theta must be positive, got {theta}")));
        }
        Ok(Self { n, theta })
    }

    pub fn untwisted(n: usize) -> Result<Self> {
        Self::new(n, Rational::one())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> &Rational {
        &self.theta
    }

    pub fn theta_f64(&self) -> f64 {
        to_f64(&self.theta)
    }

    /// Stationary law: beta-binomial with `alpha = beta = theta`.
    pub fn stationary(&self) -> Vec<Rational> {
        crate::distributions::BetaBinomialParams::symmetric(self.n, self.theta.clone())
            .expect("validated theta")
            .pmf_vec()
    }
}

/// Dense square transition kernel with exact entries.
#[derive(Debug, Clone, PartialEq)]
pub struct RowStochasticMatrix {
    entries: Vec<Vec<Rational>>,
}

impl RowStochasticMatrix {
    /// Validates squareness, nonnegativity and exact unit row sums.
    pub fn new(entries: Vec<Vec<Rational>>) -> Result<Self> {
        let order = entries.len();
        for (i, row) in entries.iter().enumerate() {
            if row.len() != order {
                return Err(Error::DimensionMismatch {
                    expected: order,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| v.is_negative()) {
                return Err(Error::Domain(format!("row {i} has a negative entry")));
            }
            let sum: Rational = row.iter().sum();
            if !sum.is_one() {
                return Err(Error::Domain(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self { entries })
    }

    pub fn order(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i]
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(to_f64).collect())
            .collect()
    }

    /// `(P f)(i) = sum_j P(i, j) f(j)`.
    pub fn apply(&self, f: &[Rational]) -> Result<Vec<Rational>> {
        self.check_len(f.len())?;
        Ok(self
            .entries
            .iter()
            .map(|row| row.iter().zip(f).fold(Rational::zero(), |acc, (p, v)| acc + p * v))
            .collect())
    }

    /// `(mu P)(j) = sum_i mu(i) P(i, j)`.
    pub fn left_apply(&self, mu: &[Rational]) -> Result<Vec<Rational>> {
        self.check_len(mu.len())?;
        let mut out = vec![Rational::zero(); self.order()];
        for (m, row) in mu.iter().zip(&self.entries) {
            if m.is_zero() {
                continue;
            }
            for (o, p) in out.iter_mut().zip(row) {
                *o += m * p;
            }
        }
        Ok(out)
    }

    /// Laws of `X_0, ..., X_{steps}` started from the point mass at `start`.
    pub fn distributions_from(&self, start: usize, steps: usize) -> Result<Vec<Vec<Rational>>> {
        if start >= self.order() {
            return Err(Error::OutOfRange {
                what: "start state",
                value: start,
                max: self.order().saturating_sub(1),
            });
        }
        let mut mu = vec![Rational::zero(); self.order()];
        mu[start] = Rational::one();
        let mut laws = Vec::with_capacity(steps + 1);
        laws.push(mu.clone());
        for _ in 0..steps {
            mu = self.left_apply(&mu)?;
            laws.push(mu.clone());
        }
        Ok(laws)
    }

    /// Largest `|pi(i) P(i, j) - pi(j) P(j, i)|`.
    pub fn detailed_balance_defect(&self, pi: &[Rational]) -> Result<Rational> {
        self.check_len(pi.len())?;
        let mut worst = Rational::zero();
        for i in 0..self.order() {
            for j in 0..i {
                let d = (&pi[i] * &self.entries[i][j] - &pi[j] * &self.entries[j][i]).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        Ok(worst)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.order() {
            return Err(Error::DimensionMismatch {
                expected: self.order(),
                got: len,
            });
        }
        Ok(())
    }
}

/// `alpha_j^n = C(2j, j) C(2(n-j), n-j) / 4^n`, row 0 of the untwisted kernel.
pub fn alpha_row(n: usize) -> Vec<Rational> {
    let denom = num_traits::pow(num_bigint::BigInt::from(4), n);
    (0..=n)
        .map(|j| Rational::new(binomial(2 * j, j) * binomial(2 * (n - j), n - j), denom.clone()))
        .collect()
}

fn zero_row(m: usize, theta: &Rational) -> Vec<Rational> {
    let half = theta / int(2);
    let denom = pochhammer(theta, m);
    (0..=m)
        .map(|j| {
            Rational::from_integer(binomial(m, j)) * pochhammer(&half, j) * pochhammer(&half, m - j)
                / &denom
        })
        .collect()
}

/// Row 0: `p_{0j} = C(n, j) (theta/2)_j (theta/2)_{n-j} / (theta)_n`.
pub fn twisted_zero_row(spec: &ChainSpec) -> Vec<Rational> {
    zero_row(spec.n, &spec.theta)
}

/// Full kernel by convolving the zero rows of the two blocks: from `j`
/// ones, the ones-block of size `j` and the zeros-block of size `n - j`
/// relabel independently, so `p_{jk} = sum_l p^{(j)}_{0l} p^{(n-j)}_{0,k-l}`.
/// An empty block contributes the point mass at 0.
pub fn build_matrix(spec: &ChainSpec) -> RowStochasticMatrix {
    let n = spec.n;
    let rows: Vec<Vec<Rational>> = (0..=n).map(|m| zero_row(m, &spec.theta)).collect();
    let entries = (0..=n)
        .map(|j| {
            let (ones, zeros) = (&rows[j], &rows[n - j]);
            let mut out = vec![Rational::zero(); n + 1];
            for (a, pa) in ones.iter().enumerate() {
                for (b, pb) in zeros.iter().enumerate() {
                    out[a + b] += pa * pb;
                }
            }
            out
        })
        .collect();
    RowStochasticMatrix { entries }
}
