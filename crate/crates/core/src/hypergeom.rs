//! Pochhammer symbols and terminating generalized hypergeometric series.
//!
//! Terminating series are summed exactly in rationals. Alternating `3F2`
//! sums cancel catastrophically in floating point, so the only float
//! routines here are the gamma-function oracles (Gauss summation, the
//! explicit Stirling bounds).

use num_traits::{One, Signed, Zero};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::rational::{as_nonpositive_integer, from_f64, to_f64, Rational};
use crate::{Error, Result};

/// Rising factorial `(a)_l = a (a+1) ... (a+l-1)`, with `(a)_0 = 1`.
pub fn pochhammer(a: &Rational, l: usize) -> Rational {
    let mut acc = Rational::one();
    let mut term = a.clone();
    for _ in 0..l {
        acc *= &term;
        term += Rational::one();
    }
    acc
}

pub fn pochhammer_f64(a: f64, l: usize) -> f64 {
    (0..l).fold(1.0, |acc, i| acc * (a + i as f64))
}

/// A validated terminating `rFs(a_1..a_r; b_1..b_s | x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminatingSeries {
    upper: Vec<Rational>,
    lower: Vec<Rational>,
    argument: Rational,
    termination_index: usize,
}

impl TerminatingSeries {
    /// Checks that some upper parameter is `-L` for an integer `L >= 0` and
    /// that no lower parameter vanishes in `(b)_l` for `l <= L`.
    pub fn new(upper: Vec<Rational>, lower: Vec<Rational>, argument: Rational) -> Result<Self> {
        let termination_index = upper
            .iter()
            .filter_map(as_nonpositive_integer)
            .min()
            .ok_or(Error::NonTerminating)?;
        for b in &lower {
            // (b)_l first vanishes at l = m + 1 when b = -m.
            if let Some(m) = as_nonpositive_integer(b) {
                if m < termination_index {
                    return Err(Error::PoisonedDenominator(b.to_string()));
                }
            }
        }
        Ok(Self {
            upper,
            lower,
            argument,
            termination_index,
        })
    }

    pub fn upper(&self) -> &[Rational] {
        &self.upper
    }

    pub fn lower(&self) -> &[Rational] {
        &self.lower
    }

    pub fn argument(&self) -> &Rational {
        &self.argument
    }

    pub fn termination_index(&self) -> usize {
        self.termination_index
    }

    /// Series coefficients `c_l` with the series equal to `sum_l c_l x^l`.
    pub fn coefficients(&self) -> Vec<Rational> {
        let mut coeffs = Vec::with_capacity(self.termination_index + 1);
        let mut c = Rational::one();
        coeffs.push(c.clone());
        for l in 0..self.termination_index {
            let shift = Rational::from_integer(l.into());
            for a in &self.upper {
                c *= a + &shift;
            }
            for b in &self.lower {
                c /= b + &shift;
            }
            c /= Rational::from_integer((l + 1).into());
            coeffs.push(c.clone());
        }
        coeffs
    }
}

/// Exact value of a terminating series.
pub fn pfq_terminating(spec: &TerminatingSeries) -> Rational {
    let mut sum = Rational::zero();
    let mut power = Rational::one();
    for c in spec.coefficients() {
        sum += c * &power;
        power *= &spec.argument;
    }
    sum
}

/// Convenience wrapper: validate and sum in one call.
pub fn pfq(upper: &[Rational], lower: &[Rational], x: &Rational) -> Result<Rational> {
    let spec = TerminatingSeries::new(upper.to_vec(), lower.to_vec(), x.clone())?;
    Ok(pfq_terminating(&spec))
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// Gauss's summation `2F1(a, b; c | 1) = G(c) G(c-a-b) / (G(c-a) G(c-b))`.
pub fn gauss_2f1_at_1(a: &Rational, b: &Rational, c: &Rational) -> Result<f64> {
    if a + b >= *c {
        return Err(Error::Domain(format!(
            "Gauss summation needs a + b < c (a={a}, b={b}, c={c})"
        )));
    }
    let (a, b, c) = (to_f64(a), to_f64(b), to_f64(c));
    for (name, v) in [("c", c), ("c-a", c - a), ("c-b", c - b)] {
        if is_nonpositive_integer(v) {
            return Err(Error::Domain(format!("{name} = {v} is a pole of the gamma function")));
        }
    }
    Ok(gamma(c) * gamma(c - a - b) / (gamma(c - a) * gamma(c - b)))
}

/// `|3F2(2a, 2b, a+b; a+b+1/2, 2a+2b | x) - 2F1(a, b; a+b+1/2 | x)^2|`.
///
/// Only terminating instances are accepted: `a` or `b` must be a
/// nonpositive integer so both sides are polynomials in `x`. The float `x`
/// is converted to its exact dyadic value and both sides are summed
/// exactly, so the residual is the float image of an exact difference.
pub fn clausen_residual(a: &Rational, b: &Rational, x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [0, 1)")));
    }
    if as_nonpositive_integer(a).is_none() && as_nonpositive_integer(b).is_none() {
        return Err(Error::NonTerminating);
    }
    let xr = from_f64(x)?;
    let two = Rational::from_integer(2.into());
    let half = Rational::new(1.into(), 2.into());
    let s = a + b;
    let lhs = pfq(
        &[&two * a, &two * b, s.clone()],
        &[&s + &half, &two * &s],
        &xr,
    )?;
    let inner = pfq(&[a.clone(), b.clone()], &[&s + &half], &xr)?;
    Ok(to_f64(&(lhs - &inner * &inner).abs()))
}

/// Lower and upper explicit Stirling bounds on `ln G(1+x)`.
pub fn stirling_log_bounds(x: f64) -> (f64, f64) {
    let base = 0.5 * std::f64::consts::PI.ln() + x * (x.ln() - 1.0);
    let poly = 8.0 * x.powi(3) + 4.0 * x * x + x;
    (
        base + (poly + 1.0 / 100.0).ln() / 6.0,
        base + (poly + 1.0 / 30.0).ln() / 6.0,
    )
}

/// Whether the two-sided Stirling bound on `G(1+x)` holds strictly at `x`.
pub fn stirling_bound_check(x: f64) -> bool {
    if !(x > 0.0) {
        return false;
    }
    let (lo, hi) = stirling_log_bounds(x);
    let v = ln_gamma(1.0 + x);
    lo < v && v < hi
}
