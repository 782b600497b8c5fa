//! Eigenvalues, eigenpair verification, distances to stationarity, and the
//! quantitative convergence bounds for the lumped chain.

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::Serialize;

use crate::chains::{build_matrix, ChainSpec, RowStochasticMatrix};
use crate::distributions::mean_and_stderr;
use crate::hypergeom::{pfq, pochhammer};
use crate::orthopoly::{chebyshev_table, PolyTable};
use crate::rational::{binomial, from_usize, int, max_abs, ratio, to_f64, Rational};
use crate::{Error, Result};

/// `lambda_k = 3F2(-2k, 2k + 2 theta - 1, theta/2; theta, theta | 1)`,
/// the eigenvalue attached to degree `2k`.
pub fn eigenvalue_closed_form(theta: &Rational, k: usize) -> Result<Rational> {
    if !theta.is_positive() {
        return Err(Error::Domain(format!("theta must be positive, got {theta}")));
    }
    let two_k = from_usize(2 * k);
    pfq(
        &[-two_k.clone(), &two_k + int(2) * theta - int(1), theta / int(2)],
        &[theta.clone(), theta.clone()],
        &int(1),
    )
}

/// Untwisted eigenvalue `C(2k, k)^2 / 16^k`.
pub fn chebyshev_eigenvalue(k: usize) -> Rational {
    let c = binomial(2 * k, k);
    Rational::new(&c * &c, num_traits::pow(BigInt::from(16), k))
}

/// Upper estimate `(1 / (pi k)) (1 + 1/(2k))^{1/3}` on the untwisted eigenvalues.
pub fn chebyshev_eigenvalue_bound(k: usize) -> f64 {
    let k = k as f64;
    (1.0 + 1.0 / (2.0 * k)).cbrt() / (std::f64::consts::PI * k)
}

/// Eigenvalue for polynomial degree `j`: 1 at degree 0, zero for odd
/// degrees, `lambda_{j/2}` otherwise.
pub fn degree_eigenvalue(theta: &Rational, degree: usize) -> Result<Rational> {
    match degree {
        0 => Ok(Rational::one()),
        d if d % 2 == 1 => Ok(Rational::zero()),
        d => eigenvalue_closed_form(theta, d / 2),
    }
}

/// Full spectrum of the `(n+1)`-state chain as a sorted (descending) list.
pub fn expected_spectrum(n: usize, theta: &Rational) -> Result<Vec<Rational>> {
    let mut out = (0..=n)
        .map(|d| degree_eigenvalue(theta, d))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| b.cmp(a));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

/// Monte Carlo estimate of `E[(Z - Z')^{2k}]` with `Z, Z'` independent
/// Beta(theta/2, theta/2).
pub fn eigenvalue_continuous_mc<R: Rng + ?Sized>(
    theta: f64,
    k: usize,
    samples: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    if samples < 10_000 {
        return Err(Error::Domain(format!("need at least 10^4 samples, got {samples}")));
    }
    let half = Beta::new(theta / 2.0, theta / 2.0).map_err(|e| Error::Domain(e.to_string()))?;
    let draws: Vec<f64> = (0..samples)
        .map(|_| (half.sample(rng) - half.sample(rng)).powi(2 * k as i32))
        .collect();
    let (estimate, stderr) = mean_and_stderr(draws.into_iter());
    Ok(McEstimate { estimate, stderr })
}

/// Exact eigenpair check of a lumped kernel against its polynomial family.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub n: usize,
    pub theta: Rational,
    /// Closed-form eigenvalue for each degree `0..=n`.
    pub eigenvalues: Vec<Rational>,
    /// `max_x |(P psi_j)(x) - eigenvalues[j] psi_j(x)|` for each degree.
    pub residuals: Vec<Rational>,
    /// Largest residual over the odd degrees (`P psi_odd` itself).
    pub zero_space_residual: Rational,
}

impl SpectralReport {
    pub fn passes(&self) -> bool {
        self.residuals.iter().all(Zero::is_zero)
    }

    pub fn max_residual(&self) -> Rational {
        max_abs(&self.residuals)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "theta": self.theta.to_string(),
            "eigenvalues": self.eigenvalues.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "eigenvalues_f64": self.eigenvalues.iter().map(to_f64).collect::<Vec<_>>(),
            "residuals": self.residuals.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "zero_space_residual": self.zero_space_residual.to_string(),
            "pass": self.passes(),
        })
    }
}

/// Applies `P` to every tabulated polynomial and compares with the
/// closed-form eigenvalue of its degree. Residuals are exact rationals.
pub fn verify_eigenpairs(matrix: &RowStochasticMatrix, table: &PolyTable) -> Result<SpectralReport> {
    let n = table.n();
    if matrix.order() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: matrix.order(),
        });
    }
    let params = table.params();
    if params.alpha() != params.beta() {
        return Err(Error::Domain("eigenpairs need a symmetric family (alpha = beta)".into()));
    }
    let theta = params.alpha().clone();
    let mut eigenvalues = Vec::with_capacity(n + 1);
    let mut residuals = Vec::with_capacity(n + 1);
    let mut zero_space_residual = Rational::zero();
    for j in 0..=n {
        let lambda = degree_eigenvalue(&theta, j)?;
        let psi = table.degree(j);
        let image = matrix.apply(psi)?;
        let residual = max_abs(
            &image
                .iter()
                .zip(psi)
                .map(|(p, v)| p - &lambda * v)
                .collect::<Vec<_>>(),
        );
        if j % 2 == 1 && residual > zero_space_residual {
            zero_space_residual = residual.clone();
        }
        eigenvalues.push(lambda);
        residuals.push(residual);
    }
    Ok(SpectralReport {
        n,
        theta,
        eigenvalues,
        residuals,
        zero_space_residual,
    })
}

/// Float eigenvalues of a reversible kernel (descending), via the
/// symmetrization `D^{1/2} P D^{-1/2}` with `D = diag(pi)`.
pub fn numeric_eigenvalues(matrix: &RowStochasticMatrix, pi: &[Rational]) -> Result<Vec<f64>> {
    let m = matrix.order();
    if pi.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: pi.len(),
        });
    }
    let p = matrix.to_f64();
    let root: Vec<f64> = pi.iter().map(|v| to_f64(v).sqrt()).collect();
    let sym = DMatrix::from_fn(m, m, |i, j| {
        // Average the two triangles to remove rounding asymmetry.
        0.5 * (root[i] * p[i][j] / root[j] + root[j] * p[j][i] / root[i])
    });
    let mut values: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// `1/2 sum |p - q|`.
pub fn tv_distance<T>(p: &[T], q: &[T]) -> Result<T>
where
    T: Clone + Signed,
{
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    let total = p
        .iter()
        .zip(q)
        .fold(T::zero(), |acc, (a, b)| acc + (a.clone() - b.clone()).abs());
    Ok(total / (T::one() + T::one()))
}

/// `sum (p - pi)^2 / pi`.
pub fn chi_square_distance<T>(p: &[T], pi: &[T]) -> Result<T>
where
    T: Clone + Signed + PartialOrd,
{
    if p.len() != pi.len() {
        return Err(Error::DimensionMismatch {
            expected: pi.len(),
            got: p.len(),
        });
    }
    if pi.iter().any(|v| *v <= T::zero()) {
        return Err(Error::Domain("reference law must be strictly positive".into()));
    }
    Ok(p.iter().zip(pi).fold(T::zero(), |acc, (a, b)| {
        let d = a.clone() - b.clone();
        acc + d.clone() * d / b.clone()
    }))
}

/// `sum_{i >= 1} beta_i^{2l} psi_i(x)^2 / ||psi_i||^2`: the chi-square
/// distance after `l` steps from `x`, written through an orthogonal
/// eigenbasis. `eigenvalues[i]` belongs to `table.degree(i)`.
pub fn spectral_chi_square(table: &PolyTable, eigenvalues: &[Rational], x: usize, l: usize) -> Result<Rational> {
    let n = table.n();
    if eigenvalues.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: eigenvalues.len(),
        });
    }
    if x > n {
        return Err(Error::OutOfRange {
            what: "start state",
            value: x,
            max: n,
        });
    }
    Ok((1..=n).fold(Rational::zero(), |acc, i| {
        let v = &table.degree(i)[x];
        acc + num_traits::pow(eigenvalues[i].clone(), 2 * l) * v * v / &table.norms()[i]
    }))
}

/// One row of the two-sided total variation check for the untwisted chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichRow {
    pub l: usize,
    pub tv: Rational,
    /// `(1/4)^{l+1}`.
    pub lower: Rational,
    /// `4 (1/4)^l`.
    pub upper: Rational,
    /// `|psi(n)| (1/4)^l / (2 ||psi||_inf)` with `psi` the degree-2 eigenfunction.
    pub eigenfunction_lower: Rational,
    pub pass: bool,
}

/// Exact total variation from the all-ones state of the untwisted chain,
/// checked against `(1/4)^{l+1} <= TV <= 4 (1/4)^l` and against the
/// single-eigenfunction lower bound, for `l = 1..=l_max`.
pub fn sandwich_check(n: usize, l_max: usize) -> Result<Vec<SandwichRow>> {
    if n < 2 {
        return Err(Error::Domain("the sandwich bound needs n >= 2".into()));
    }
    let spec = ChainSpec::untwisted(n)?;
    let matrix = build_matrix(&spec);
    let pi = spec.stationary();
    let laws = matrix.distributions_from(n, l_max)?;
    let cheb = chebyshev_table(n)?;
    let psi = cheb.degree(2);
    let sup = max_abs(psi);
    let quarter = ratio(1, 4);
    let mut rows = Vec::with_capacity(l_max);
    for (l, law) in laws.iter().enumerate().skip(1) {
        let tv = tv_distance(law, &pi)?;
        let rate = num_traits::pow(quarter.clone(), l);
        let lower = &rate * &quarter;
        let upper = &rate * int(4);
        let eigenfunction_lower = psi[n].abs() * &rate / (int(2) * &sup);
        let pass = lower <= tv && tv <= upper && eigenfunction_lower <= tv;
        rows.push(SandwichRow {
            l,
            tv,
            lower,
            upper,
            eigenfunction_lower,
            pass,
        });
    }
    Ok(rows)
}

/// First step used when fitting the geometric decay rate.
pub const RATE_FIT_START: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub theta: String,
    pub n: usize,
    /// `lambda_1` from the closed form.
    pub lambda1: String,
    /// Whether `lambda_1 = 1 / (2 (1 + theta))` exactly.
    pub lambda1_matches_rate: bool,
    pub target_slope: f64,
    pub fitted_slope: f64,
    pub relative_error: f64,
    /// Exact total variation at `l = 0..=l_max`, as floats.
    pub tv: Vec<f64>,
    /// `min` and `max` of `TV_l / rate^l` over the fitted range.
    pub c_lower: f64,
    pub c_upper: f64,
}

impl RateReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.lambda1_matches_rate && self.relative_error <= tolerance
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Fits the log-TV slope over `l = RATE_FIT_START..=l_max` from the
/// all-ones state and compares it with `log(1 / (2 (1 + theta)))`.
/// The prefactors are reported, not asserted.
pub fn geometric_rate_check(theta: &Rational, n: usize, l_max: usize) -> Result<RateReport> {
    if l_max < RATE_FIT_START + 1 {
        return Err(Error::Domain(format!("l_max must be at least {}", RATE_FIT_START + 1)));
    }
    let spec = ChainSpec::new(n, theta.clone())?;
    let matrix = build_matrix(&spec);
    let pi = spec.stationary();
    let laws = matrix.distributions_from(n, l_max)?;
    let tv = laws
        .iter()
        .map(|law| tv_distance(law, &pi).map(|t| to_f64(&t)))
        .collect::<Result<Vec<_>>>()?;
    let rate = Rational::one() / (int(2) * (int(1) + theta));
    let lambda1 = eigenvalue_closed_form(theta, 1)?;
    let rate_f = to_f64(&rate);
    let target_slope = rate_f.ln();
    let points: Vec<(f64, f64)> = (RATE_FIT_START..=l_max)
        .map(|l| (l as f64, tv[l].ln()))
        .collect();
    let fitted_slope = least_squares_slope(&points);
    let ratios: Vec<f64> = (RATE_FIT_START..=l_max)
        .map(|l| tv[l] / rate_f.powi(l as i32))
        .collect();
    Ok(RateReport {
        theta: theta.to_string(),
        n,
        lambda1: lambda1.to_string(),
        lambda1_matches_rate: lambda1 == rate,
        target_slope,
        fitted_slope,
        relative_error: ((fitted_slope - target_slope) / target_slope).abs(),
        tv,
        c_lower: ratios.iter().cloned().fold(f64::INFINITY, f64::min),
        c_upper: ratios.iter().cloned().fold(0.0, f64::max),
    })
}

/// The untwisted eigenvalue read off row 0 of the eigen-equation:
/// `sum_l (-2k)_l (2k+1)_l / (l!)^2 * sum_j (-j)_l alpha_j^n / (-n)_l`.
pub fn finite_n_eigenvalue_sum(n: usize, k: usize) -> Result<Rational> {
    if n < 2 * k {
        return Err(Error::Domain(format!("need n >= 2k (n = {n}, k = {k})")));
    }
    let alpha = crate::chains::alpha_row(n);
    let two_k = from_usize(2 * k);
    let mut total = Rational::zero();
    let mut l_fact = Rational::one();
    for l in 0..=2 * k {
        if l > 0 {
            l_fact *= from_usize(l);
        }
        let outer = pochhammer(&-two_k.clone(), l) * pochhammer(&(&two_k + int(1)), l) / (&l_fact * &l_fact);
        if outer.is_zero() {
            continue;
        }
        let inner = alpha
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (j, a)| acc + pochhammer(&-from_usize(j), l) * a)
            / pochhammer(&-from_usize(n), l);
        total += outer * inner;
    }
    Ok(total)
}

/// Exact difference of the two sides of
/// `(a+A)_m 3F2(a, c-b, -m; c, a+A | 1) = (A)_m 3F2(a, b, -m; c, 1-A-m | 1)`
/// at `m = 2k, a = theta/2, c = theta, b = 2 theta + 2k - 1, A = 1 - theta - 2k`.
pub fn transformation_identity_check(theta: &Rational, k: usize) -> Result<Rational> {
    if !theta.is_positive() {
        return Err(Error::Domain(format!("theta must be positive, got {theta}")));
    }
    let m = 2 * k;
    let mr = from_usize(m);
    let a = theta / int(2);
    let c = theta.clone();
    let b = int(2) * theta + &mr - int(1);
    let big_a = int(1) - theta - &mr;
    let lhs = pochhammer(&(&a + &big_a), m)
        * pfq(&[a.clone(), &c - &b, -mr.clone()], &[c.clone(), &a + &big_a], &int(1))?;
    let rhs = pochhammer(&big_a, m)
        * pfq(&[a.clone(), b.clone(), -mr.clone()], &[c.clone(), int(1) - &big_a - &mr], &int(1))?;
    Ok(lhs - rhs)
}

/// Exact chi-square distance from the all-ones state after `l` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareRow {
    pub l: usize,
    pub chi_square: Rational,
    pub tv: Rational,
    /// `60 (1/16)^l`.
    pub bound: Rational,
    pub pass: bool,
}

/// Checks `chi^2_n(l) <= 60 (1/16)^l` for `l = 2..=l_max` on the
/// untwisted chain, along with `4 TV^2 <= chi^2`.
pub fn chi_square_bound_check(n: usize, l_max: usize) -> Result<Vec<ChiSquareRow>> {
    let spec = ChainSpec::untwisted(n)?;
    let matrix = build_matrix(&spec);
    let pi = spec.stationary();
    let laws = matrix.distributions_from(n, l_max)?;
    let mut rows = Vec::new();
    for (l, law) in laws.iter().enumerate().skip(2) {
        let chi_square = chi_square_distance(law, &pi)?;
        let tv = tv_distance(law, &pi)?;
        let bound = int(60) * num_traits::pow(ratio(1, 16), l);
        let pass = chi_square <= bound && int(4) * &tv * &tv <= chi_square;
        rows.push(ChiSquareRow {
            l,
            chi_square,
            tv,
            bound,
            pass,
        });
    }
    Ok(rows)
}

/// Largest order-`(l+1)` finite difference of `P[x^l]` over `l = 0..n`.
/// Zero exactly when the kernel maps degree-`l` polynomials to degree `<= l`.
pub fn degree_preservation_defect(matrix: &RowStochasticMatrix) -> Result<Rational> {
    let size = matrix.order();
    let mut worst = Rational::zero();
    for l in 0..size.saturating_sub(1) {
        let monomial: Vec<Rational> = (0..size)
            .map(|j| num_traits::pow(from_usize(j), l))
            .collect();
        let mut diff = matrix.apply(&monomial)?;
        for _ in 0..=l {
            diff = diff.windows(2).map(|w| &w[1] - &w[0]).collect();
        }
        let d = max_abs(&diff);
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

/// `beta_{2k} = 1 / ((4k + 1) ||T_{2k}||^2)` for the discrete Chebyshev
/// family under the uniform law, `k = 1..=n/2`. With `T_{2k}(n) = 1` this is
/// the weight of degree `2k` in the spectral chi-square sum divided by `4k+1`.
pub fn chebyshev_norm_coefficients(n: usize) -> Result<Vec<Rational>> {
    let table = chebyshev_table(n)?;
    Ok((1..=n / 2)
        .map(|k| Rational::one() / (from_usize(4 * k + 1) * &table.norms()[2 * k]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthopoly::HahnFamilyParams;

    #[test]
    fn closed_form_examples() {
        assert_eq!(eigenvalue_closed_form(&int(1), 1).unwrap(), ratio(1, 4));
        assert_eq!(eigenvalue_closed_form(&int(1), 2).unwrap(), ratio(9, 64));
        assert_eq!(eigenvalue_closed_form(&int(2), 1).unwrap(), ratio(1, 6));
        for k in 1..10 {
            assert_eq!(eigenvalue_closed_form(&int(1), k).unwrap(), chebyshev_eigenvalue(k));
        }
        assert!(eigenvalue_closed_form(&int(0), 1).is_err());
    }

    #[test]
    fn small_eigenpairs() {
        let p = build_matrix(&ChainSpec::untwisted(4).unwrap());
        let report = verify_eigenpairs(&p, &chebyshev_table(4).unwrap()).unwrap();
        assert!(report.passes());
        assert_eq!(
            report.eigenvalues,
            vec![int(1), int(0), ratio(1, 4), int(0), ratio(9, 64)]
        );
        let p = build_matrix(&ChainSpec::new(5, int(2)).unwrap());
        let table = PolyTable::hahn(HahnFamilyParams::symmetric(5, int(2)).unwrap()).unwrap();
        let report = verify_eigenpairs(&p, &table).unwrap();
        assert!(report.passes());
        assert_eq!(report.eigenvalues[2], ratio(1, 6));
        assert_eq!(report.eigenvalues[4], eigenvalue_closed_form(&int(2), 2).unwrap());
        let p3 = build_matrix(&ChainSpec::untwisted(3).unwrap());
        let r3 = verify_eigenpairs(&p3, &chebyshev_table(3).unwrap()).unwrap();
        assert_eq!(r3.eigenvalues.iter().filter(|v| v.is_zero()).count(), 2);
        assert!(r3.zero_space_residual.is_zero());
        assert!(verify_eigenpairs(&p3, &chebyshev_table(4).unwrap()).is_err());
    }

    #[test]
    fn distances() {
        let u = vec![ratio(1, 3); 3];
        assert!(tv_distance(&u, &u).unwrap().is_zero());
        let a = vec![int(1), int(0), int(0)];
        let b = vec![int(0), int(0), int(1)];
        assert_eq!(tv_distance(&a, &b).unwrap(), int(1));
        assert!(chi_square_distance(&u, &u).unwrap().is_zero());
        assert!(tv_distance(&a, &a[..2]).is_err());
        assert!(chi_square_distance(&a, &b).is_err());
        // One step from state 2 of the 3-state untwisted chain.
        let p = build_matrix(&ChainSpec::untwisted(2).unwrap());
        let tv = tv_distance(p.row(2), &u).unwrap();
        assert_eq!(tv, ratio(1, 12));
        assert!((tv_distance(&[0.5, 0.5], &[1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn finite_sum_examples() {
        assert_eq!(finite_n_eigenvalue_sum(2, 1).unwrap(), ratio(1, 4));
        assert_eq!(finite_n_eigenvalue_sum(10, 1).unwrap(), ratio(1, 4));
        assert_eq!(finite_n_eigenvalue_sum(10, 3).unwrap(), ratio(25, 256));
        assert!(finite_n_eigenvalue_sum(3, 2).is_err());
    }

    #[test]
    fn transformation_examples() {
        for (theta, k) in [(int(1), 1), (int(2), 2), (ratio(1, 2), 1)] {
            assert!(transformation_identity_check(&theta, k).unwrap().is_zero());
        }
    }

    #[test]
    fn sandwich_small() {
        let rows = sandwich_check(2, 10).unwrap();
        assert_eq!(rows.len(), 10);
        assert!(rows.iter().all(|r| r.pass));
        assert!(sandwich_check(1, 3).is_err());
    }

    #[test]
    fn eigenvalue_bound_and_norms() {
        for k in 1..=10 {
            assert!(to_f64(&chebyshev_eigenvalue(k)) <= chebyshev_eigenvalue_bound(k));
        }
        for n in 2..=30 {
            let cap = Rational::new(n.into(), (n + 2).into());
            for beta in chebyshev_norm_coefficients(n).unwrap() {
                assert!(beta.is_positive() && beta <= cap);
            }
        }
    }

    #[test]
    fn rate_report_shape() {
        let r = geometric_rate_check(&int(1), 10, 8).unwrap();
        assert!(r.lambda1_matches_rate);
        assert_eq!(r.tv.len(), 9);
        assert!(r.c_lower <= r.c_upper);
        assert!(geometric_rate_check(&int(1), 10, 3).is_err());
    }
}
