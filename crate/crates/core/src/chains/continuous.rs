use rand::Rng;
use rand_distr::{Beta, Distribution};
use statrs::function::beta::ln_beta;

use crate::distributions::{stick_breaking_lengths, DEFAULT_TRUNCATION_MASS};
use crate::quadrature::integrate;
use crate::{Error, Result};

const QUADRATURE_TOL: f64 = 1e-10;

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Domain(format!("theta must be positive, got {theta}")));
    }
    Ok(())
}

fn check_unit(what: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{what} = {x} outside [0, 1]")));
    }
    Ok(())
}

/// One step of the continuous chain: `y = x Z + (1 - x) Z'` with
/// `Z, Z'` independent Beta(theta/2, theta/2).
pub fn continuous_step<R: Rng + ?Sized>(x: f64, theta: f64, rng: &mut R) -> Result<f64> {
    check_theta(theta)?;
    check_unit("x", x)?;
    let half = Beta::new(theta / 2.0, theta / 2.0).map_err(|e| Error::Domain(e.to_string()))?;
    let (z, z2) = (half.sample(rng), half.sample(rng));
    Ok((x * z + (1.0 - x) * z2).clamp(0.0, 1.0))
}

/// The same kernel built from GEM(theta) stick-breaking of `[0, x]` and
/// `[x, 1]`, with a fair coin per piece; `y` is the length labelled one.
pub fn continuous_step_stickbreaking<R: Rng + ?Sized>(x: f64, theta: f64, rng: &mut R) -> Result<f64> {
    check_theta(theta)?;
    check_unit("x", x)?;
    let mut y = 0.0;
    for stick in [x, 1.0 - x] {
        for piece in stick_breaking_lengths(stick, theta, DEFAULT_TRUNCATION_MASS, rng)? {
            if rng.random_bool(0.5) {
                y += piece;
            }
        }
    }
    Ok(y.clamp(0.0, 1.0))
}

/// Beta(theta, theta) density, the stationary law of the continuous chain.
pub fn beta_density(x: f64, theta: f64) -> f64 {
    ((theta - 1.0) * (x.ln() + (1.0 - x).ln()) - ln_beta(theta, theta)).exp()
}

/// Transition density `k(x, y)` of the continuous chain.
///
/// `xZ` has density `z^{a} (x-z)^{a} / (B x^{theta-1})` on `[0, x]` with
/// `a = theta/2 - 1`, and likewise for `(1-x)Z'`; `k` is their convolution.
/// The substitution `z = lo + (hi - lo) sin^2 t` absorbs the endpoint power
/// singularities.
pub fn continuous_density(x: f64, y: f64, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    if !(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0) {
        return Err(Error::Domain(format!("(x, y) = ({x}, {y}) outside (0, 1)^2")));
    }
    let lo = (x + y - 1.0).max(0.0);
    let hi = x.min(y);
    if hi <= lo {
        return Ok(0.0);
    }
    let a = theta / 2.0 - 1.0;
    let width = hi - lo;
    // Offsets of each factor at z = lo and z = hi, kept separate so the
    // vanishing factor is computed without cancellation.
    let (z_lo, w_lo) = (lo, lo - (x + y - 1.0));
    let (u_hi, v_hi) = (x - hi, y - hi);
    let log_norm = 2.0 * ln_beta(theta / 2.0, theta / 2.0);
    let integrand = |t: f64| {
        let (s, c) = t.sin_cos();
        let d_lo = width * s * s;
        let d_hi = width * c * c;
        let factors = [z_lo + d_lo, w_lo + d_lo, u_hi + d_hi, v_hi + d_hi];
        if factors.iter().any(|&f| f <= 0.0) {
            return 0.0;
        }
        let log_f: f64 = factors.iter().map(|f| a * f.ln()).sum::<f64>() - log_norm;
        log_f.exp() * width * 2.0 * s * c
    };
    let inner = integrate(integrand, 0.0, std::f64::consts::FRAC_PI_2, QUADRATURE_TOL)?;
    Ok(inner * ((1.0 - theta) * (x.ln() + (1.0 - x).ln())).exp())
}
