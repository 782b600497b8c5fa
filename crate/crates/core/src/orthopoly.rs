//! Hahn, discrete Chebyshev and Jacobi polynomials for the chains'
//! stationary laws, normalized to equal 1 at the origin.

use num_traits::{One, Signed, Zero};

use crate::distributions::BetaBinomialParams;
use crate::hypergeom::{pfq, TerminatingSeries};
use crate::rational::{from_usize, int, to_f64, Rational};
use crate::{Error, Result};

/// Largest support size accepted by the exact tables.
pub const MAX_EXACT_N: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct HahnFamilyParams {
    n: usize,
    alpha: Rational,
    beta: Rational,
}

impl HahnFamilyParams {
    pub fn new(n: usize, alpha: Rational, beta: Rational) -> Result<Self> {
        if !alpha.is_positive() || !beta.is_positive() {
            return Err(Error::Domain(format!(
                "Hahn parameters must be positive (got {alpha}, {beta})"
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

    pub fn weight(&self) -> BetaBinomialParams {
        BetaBinomialParams::new(self.n, self.alpha.clone(), self.beta.clone())
            .expect("validated parameters")
    }

    fn check(&self, what: &'static str, value: usize) -> Result<()> {
        if value > self.n {
            return Err(Error::OutOfRange {
                what,
                value,
                max: self.n,
            });
        }
        Ok(())
    }
}

/// `Q_j(x) = 3F2(-j, j+alpha+beta-1, -x; alpha, -n | 1)`.
pub fn hahn_eval(params: &HahnFamilyParams, j: usize, x: usize) -> Result<Rational> {
    params.check("degree", j)?;
    params.check("point", x)?;
    let upper = [
        -from_usize(j),
        from_usize(j) + &params.alpha + &params.beta - int(1),
        -from_usize(x),
    ];
    let lower = [params.alpha.clone(), -from_usize(params.n)];
    pfq(&upper, &lower, &int(1))
}

/// Closed-form endpoint `Q_j(n) = (1-beta-j)_j / (alpha)_j` (Chu-Vandermonde).
pub fn hahn_endpoint(params: &HahnFamilyParams, j: usize) -> Result<Rational> {
    params.check("degree", j)?;
    let jr = from_usize(j);
    Ok(crate::hypergeom::pochhammer(&(int(1) - &params.beta - &jr), j)
        / crate::hypergeom::pochhammer(&params.alpha, j))
}

/// Tabulated family `values[j][x]` for degrees and points in `0..=n`,
/// together with the weight and the squared norms `sum_x psi_j(x)^2 m(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTable {
    params: HahnFamilyParams,
    values: Vec<Vec<Rational>>,
    weight: Vec<Rational>,
    norms: Vec<Rational>,
}

impl PolyTable {
    fn from_values(params: HahnFamilyParams, values: Vec<Vec<Rational>>) -> Self {
        let weight = params.weight().pmf_vec();
        let norms = values
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&weight)
                    .fold(Rational::zero(), |acc, (v, m)| acc + v * v * m)
            })
            .collect();
        Self {
            params,
            values,
            weight,
            norms,
        }
    }

    /// Exact Hahn table through the hypergeometric representation.
    pub fn hahn(params: HahnFamilyParams) -> Result<Self> {
        if params.n > MAX_EXACT_N {
            return Err(Error::OutOfRange {
                what: "exact table size",
                value: params.n,
                max: MAX_EXACT_N,
            });
        }
        let n = params.n;
        let mut values = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let row = (0..=n)
                .map(|x| hahn_eval(&params, j, x))
                .collect::<Result<Vec<_>>>()?;
            values.push(row);
        }
        Ok(Self::from_values(params, values))
    }

    pub fn params(&self) -> &HahnFamilyParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }

    /// Values of the degree-`j` polynomial on `0..=n`.
    pub fn degree(&self, j: usize) -> &[Rational] {
        &self.values[j]
    }

    /// Weight `m` the family is orthogonal for.
    pub fn weight(&self) -> &[Rational] {
        &self.weight
    }

    pub fn norms(&self) -> &[Rational] {
        &self.norms
    }

    pub fn values_f64(&self) -> Vec<Vec<f64>> {
        self.values
            .iter()
            .map(|row| row.iter().map(to_f64).collect())
            .collect()
    }

    /// Exact inner product `sum_x psi_j(x) psi_k(x) m(x)`.
    pub fn inner_product(&self, j: usize, k: usize) -> Rational {
        self.values[j]
            .iter()
            .zip(&self.values[k])
            .zip(&self.weight)
            .fold(Rational::zero(), |acc, ((a, b), m)| acc + a * b * m)
    }
}

/// Discrete Chebyshev table (`alpha = beta = 1`) from the three-term
/// recurrence `(j+1)(n-j) T_{j+1} = (2j+1)(n-2x) T_j - j(j+n+1) T_{j-1}`.
pub fn chebyshev_table(n: usize) -> Result<PolyTable> {
    if n == 0 {
        return Err(Error::Domain("discrete Chebyshev table needs n >= 1".into()));
    }
    if n > MAX_EXACT_N {
        return Err(Error::OutOfRange {
            what: "exact table size",
            value: n,
            max: MAX_EXACT_N,
        });
    }
    let nr = from_usize(n);
    let mut values: Vec<Vec<Rational>> = Vec::with_capacity(n + 1);
    values.push(vec![Rational::one(); n + 1]);
    values.push(
        (0..=n)
            .map(|x| (&nr - int(2) * from_usize(x)) / &nr)
            .collect(),
    );
    for j in 1..n {
        let jr = from_usize(j);
        let lead = (&jr + int(1)) * (&nr - &jr);
        let next = (0..=n)
            .map(|x| {
                let centered = &nr - int(2) * from_usize(x);
                ((int(2) * &jr + int(1)) * centered * &values[j][x]
                    - &jr * (&jr + &nr + int(1)) * &values[j - 1][x])
                    / &lead
            })
            .collect();
        values.push(next);
    }
    let params = HahnFamilyParams::new(n, int(1), int(1))?;
    Ok(PolyTable::from_values(params, values))
}

/// Series coefficients of `phi_j(x) = 2F1(-j, j + 2 theta - 1; theta | x)`,
/// the Jacobi polynomial for Beta(theta, theta) on `[0, 1]` with `phi_j(0) = 1`.
pub fn jacobi_coefficients(theta: &Rational, degree: usize) -> Result<Vec<Rational>> {
    if !theta.is_positive() {
        return Err(Error::Domain(format!("theta must be positive, got {theta}")));
    }
    let d = from_usize(degree);
    let spec = TerminatingSeries::new(
        vec![-d.clone(), &d + int(2) * theta - int(1)],
        vec![theta.clone()],
        int(1),
    )?;
    Ok(spec.coefficients())
}

pub fn jacobi_eval(theta: &Rational, degree: usize, x: f64) -> Result<f64> {
    let coeffs = jacobi_coefficients(theta, degree)?;
    Ok(coeffs.iter().rev().fold(0.0, |acc, c| acc * x + to_f64(c)))
}

/// Largest `|<psi_j, psi_k>|` over `j != k`, converted to float at the end.
pub fn orthogonality_report(table: &PolyTable) -> f64 {
    let n = table.n();
    let mut worst = Rational::zero();
    for j in 0..=n {
        for k in 0..j {
            let ip = table.inner_product(j, k).abs();
            if ip > worst {
                worst = ip;
            }
        }
    }
    to_f64(&worst)
}
