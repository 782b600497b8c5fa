//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use burnside_core::chains::{
    binary_strings_table, build_matrix, continuous_density, continuous_step,
    continuous_step_stickbreaking, full_burnside_step, generic_twisted_matrix, lumpability_check,
    lumped_kernel, lumped_step, ChainSpec,
};
use burnside_core::distributions::{beta_binomial_pmf, ks_two_sample, polya_moment_check};
use burnside_core::hypergeom::{clausen_residual, gauss_2f1_at_1, pfq, stirling_bound_check};
use burnside_core::orthopoly::{chebyshev_table, HahnFamilyParams, PolyTable};
use burnside_core::rational::{int, ratio, to_f64};
use burnside_core::spectral::{
    chebyshev_eigenvalue, chi_square_bound_check, eigenvalue_closed_form,
    eigenvalue_continuous_mc, expected_spectrum, finite_n_eigenvalue_sum, geometric_rate_check,
    numeric_eigenvalues, sandwich_check, transformation_identity_check, verify_eigenpairs,
};
use burnside_core::Rational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn thetas() -> Vec<Rational> {
    vec![ratio(1, 2), int(1), int(2), int(5)]
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let elapsed = start.elapsed();
    ensure(elapsed < limit, || format!("took {elapsed:.1?}, limit {limit:?}"))
}

fn eigenvalues_untwisted() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 10..=20 {
        let spec = ChainSpec::untwisted(n).map_err(|e| e.to_string())?;
        let p = build_matrix(&spec);
        let numeric = numeric_eigenvalues(&p, &spec.stationary()).map_err(|e| e.to_string())?;
        let expected = expected_spectrum(n, &int(1)).map_err(|e| e.to_string())?;
        for k in 1..=n / 2 {
            ensure(eigenvalue_closed_form(&int(1), k).unwrap() == chebyshev_eigenvalue(k), || {
                format!("closed form differs from C(2k,k)^2/16^k at k={k}")
            })?;
        }
        for (a, b) in numeric.iter().zip(&expected) {
            worst = worst.max((a - to_f64(b)).abs());
        }
        let report = verify_eigenpairs(&p, &chebyshev_table(n).unwrap()).map_err(|e| e.to_string())?;
        ensure(report.passes(), || format!("nonzero exact residual at n={n}"))?;
    }
    ensure(worst < 1e-9, || format!("eigenvalue mismatch {worst:e}"))?;
    within_time(start, Duration::from_secs(5))?;
    Ok(format!("max float deviation {worst:.1e}, exact residuals 0, {:.2?}", start.elapsed()))
}

fn sandwich_bounds() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for n in 2..=40 {
        for row in sandwich_check(n, 12).map_err(|e| e.to_string())? {
            cases += 1;
            ensure(row.pass, || {
                format!(
                    "n={n} l={}: tv={} outside [{}, {}]",
                    row.l,
                    to_f64(&row.tv),
                    to_f64(&row.lower),
                    to_f64(&row.upper)
                )
            })?;
        }
    }
    within_time(start, Duration::from_secs(60))?;
    Ok(format!("{cases} (n, l) cases inside the bounds, {:.2?}", start.elapsed()))
}

fn twisted_eigenstructure() -> Outcome {
    let mut checked = 0;
    for theta in thetas() {
        let lambda1 = eigenvalue_closed_form(&theta, 1).map_err(|e| e.to_string())?;
        let rate = Rational::one() / (int(2) * (int(1) + &theta));
        ensure(lambda1 == rate, || format!("lambda_1 = {lambda1} at theta = {theta}"))?;
        for n in 1..=20 {
            let p = build_matrix(&ChainSpec::new(n, theta.clone()).unwrap());
            let table = PolyTable::hahn(HahnFamilyParams::symmetric(n, theta.clone()).unwrap())
                .map_err(|e| e.to_string())?;
            let report = verify_eigenpairs(&p, &table).map_err(|e| e.to_string())?;
            ensure(report.passes(), || {
                format!("theta={theta} n={n}: residual {}", report.max_residual())
            })?;
            ensure(report.zero_space_residual.is_zero(), || "odd degree survives".into())?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (theta, n) pairs exact, lambda_1 = 1/(2(1+theta))"))
}

fn geometric_rate() -> Outcome {
    let mut parts = Vec::new();
    let mut failed = false;
    for theta in [int(1), int(2)] {
        let r = geometric_rate_check(&theta, 30, 12).map_err(|e| e.to_string())?;
        failed |= !r.passes(0.02);
        parts.push(format!(
            "theta={}: slope {:.5} vs {:.5} ({:.2}%), c in [{:.3}, {:.3}]",
            r.theta,
            r.fitted_slope,
            r.target_slope,
            100.0 * r.relative_error,
            r.c_lower,
            r.c_upper
        ));
    }
    let detail = parts.join("; ");
    if failed {
        Err(detail)
    } else {
        Ok(detail)
    }
}

fn stationarity_and_lumping() -> Outcome {
    for theta in thetas() {
        for n in 1..=20 {
            let spec = ChainSpec::new(n, theta.clone()).unwrap();
            let p = build_matrix(&spec);
            let pi = spec.stationary();
            ensure(p.left_apply(&pi).unwrap() == pi, || format!("pi P != pi at n={n}"))?;
            ensure(p.detailed_balance_defect(&pi).unwrap().is_zero(), || {
                format!("detailed balance fails at n={n} theta={theta}")
            })?;
        }
        let table = binary_strings_table(4, &theta).map_err(|e| e.to_string())?;
        ensure(table.state_count() == 16, || "expected 16 states".into())?;
        ensure(lumpability_check(&table).is_zero(), || "Dynkin defect nonzero".into())?;
        let full = generic_twisted_matrix(&table);
        let orbits = table.orbits();
        for (i, orbit) in orbits.iter().enumerate() {
            ensure(orbit[0].count_ones() as usize == i, || "orbits not ordered by weight".into())?;
        }
        let lumped = lumped_kernel(&full, &orbits).map_err(|e| e.to_string())?;
        let direct = build_matrix(&ChainSpec::new(4, theta.clone()).unwrap());
        ensure(lumped == direct, || format!("lumped engine differs at theta={theta}"))?;
    }
    Ok("exact for n <= 20, 4 thetas; 16-state engine lumps to the kernel".into())
}

fn empirical_tv(counts: &[u64], row: &[Rational]) -> f64 {
    let total: u64 = counts.iter().sum();
    counts
        .iter()
        .zip(row)
        .map(|(&c, p)| (c as f64 / total as f64 - to_f64(p)).abs())
        .sum::<f64>()
        / 2.0
}

fn sampler_fidelity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut parts = Vec::new();
    for theta in [int(1), int(2)] {
        let spec = ChainSpec::new(6, theta.clone()).unwrap();
        let p = build_matrix(&spec);
        let mut counts = [0u64; 7];
        for _ in 0..1_000_000 {
            counts[lumped_step(6, &spec, &mut rng).unwrap()] += 1;
        }
        let tv = empirical_tv(&counts, p.row(6));
        ensure(tv < 0.01, || format!("lumped_step tv {tv} at theta={theta}"))?;
        parts.push(format!("theta={theta} tv {tv:.4}"));
    }
    let p = build_matrix(&ChainSpec::untwisted(4).unwrap());
    for x in [[1u8, 1, 0, 0], [0, 1, 0, 1]] {
        let mut counts = [0u64; 5];
        for _ in 0..200_000 {
            let y = full_burnside_step(&x, &mut rng).unwrap();
            counts[y.iter().map(|&b| b as usize).sum::<usize>()] += 1;
        }
        let tv = empirical_tv(&counts, p.row(2));
        ensure(tv < 0.01, || format!("full step tv {tv} from {x:?}"))?;
        parts.push(format!("full {x:?} tv {tv:.4}"));
    }
    within_time(start, Duration::from_secs(30))?;
    Ok(format!("{}, {:.2?}", parts.join(", "), start.elapsed()))
}

fn continuous_limit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_z = 0.0f64;
    for theta in [int(1), int(2)] {
        for k in 1..=3 {
            let exact = to_f64(&eigenvalue_closed_form(&theta, k).unwrap());
            let mc = eigenvalue_continuous_mc(to_f64(&theta), k, 1_000_000, &mut rng)
                .map_err(|e| e.to_string())?;
            let z = (mc.estimate - exact).abs() / mc.stderr;
            worst_z = worst_z.max(z);
            ensure(z <= 3.0, || format!("theta={theta} k={k}: {} vs {exact} ({z:.2} SE)", mc.estimate))?;
        }
    }
    let mut min_p = 1.0f64;
    for (x, theta) in [(0.3, 2.0), (0.8, 0.5)] {
        let a: Vec<f64> = (0..20_000).map(|_| continuous_step(x, theta, &mut rng).unwrap()).collect();
        let b: Vec<f64> = (0..20_000)
            .map(|_| continuous_step_stickbreaking(x, theta, &mut rng).unwrap())
            .collect();
        let (_, p) = ks_two_sample(&a, &b).map_err(|e| e.to_string())?;
        min_p = min_p.min(p);
        ensure(p > 0.01, || format!("KS p-value {p} at x={x} theta={theta}"))?;
    }
    let theta = 3.0;
    let grid: Vec<f64> = (1..=10).map(|i| (i as f64 - 0.5) / 10.0).collect();
    let mut worst = 0.0f64;
    for &x in &grid {
        for &y in &grid {
            let lhs = burnside_core::chains::beta_density(x, theta) * continuous_density(x, y, theta).map_err(|e| e.to_string())?;
            let rhs = burnside_core::chains::beta_density(y, theta) * continuous_density(y, x, theta).map_err(|e| e.to_string())?;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    ensure(worst < 1e-8, || format!("reversibility residual {worst:e}"))?;
    Ok(format!(
        "worst moment z {worst_z:.2}, min KS p {min_p:.3}, reversibility {worst:.1e}"
    ))
}

fn identity_suite() -> Outcome {
    for theta in thetas() {
        for k in 1..=3 {
            let r = transformation_identity_check(&theta, k).map_err(|e| e.to_string())?;
            ensure(r.is_zero(), || format!("transformation residual {r} at theta={theta} k={k}"))?;
        }
    }
    let mut clausen_points = 0;
    let mut clausen_worst = 0.0f64;
    for a in 1..=5 {
        for b in [ratio(1, 3), ratio(3, 4)] {
            for x in [0.0, 0.25, 0.5, 0.75, 0.9] {
                let r = clausen_residual(&int(-a), &b, x).map_err(|e| e.to_string())?;
                clausen_worst = clausen_worst.max(r.abs());
                clausen_points += 1;
            }
        }
    }
    ensure(clausen_points >= 50 && clausen_worst < 1e-10, || {
        format!("Clausen residual {clausen_worst:e} over {clausen_points} points")
    })?;
    // Terminating Gauss sums have an exact finite value to compare against.
    let mut gauss_worst = 0.0f64;
    for m in 0..=8 {
        for (b, c) in [(ratio(1, 3), ratio(7, 2)), (ratio(-5, 4), ratio(2, 1)), (ratio(5, 2), ratio(11, 3))] {
            let a = int(-m);
            let exact = to_f64(&pfq(&[a.clone(), b.clone()], &[c.clone()], &int(1)).unwrap());
            let via_gamma = gauss_2f1_at_1(&a, &b, &c).map_err(|e| e.to_string())?;
            let err = (exact - via_gamma).abs() / exact.abs().max(1.0);
            gauss_worst = gauss_worst.max(err);
        }
    }
    ensure(gauss_worst < 1e-12, || format!("Gauss disagreement {gauss_worst:e}"))?;
    let grid: Vec<f64> = (0..=4990).map(|i| 0.1 + i as f64 * 0.01).collect();
    let bad: Vec<f64> = grid.iter().copied().filter(|&x| !stirling_bound_check(x)).collect();
    ensure(bad.is_empty(), || format!("Stirling bounds fail at {:?}", &bad[..bad.len().min(5)]))?;
    Ok(format!(
        "transformation 0, Clausen {clausen_worst:.1e} on {clausen_points} points, Gauss {gauss_worst:.1e}, Stirling on {} points",
        grid.len()
    ))
}

fn polya_moments() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let specs: [(usize, &[(usize, usize)]); 5] = [
        (10, &[(1, 1)]),
        (10, &[(2, 1), (3, 1)]),
        (10, &[(3, 2)]),
        (10, &[(6, 2)]),
        (4, &[(3, 2)]),
    ];
    let mut parts = Vec::new();
    for (n, moments) in specs {
        let m = polya_moment_check(n, moments, 100_000, &mut rng).map_err(|e| e.to_string())?;
        ensure(m.within(3.0), || {
            format!("n={n} {moments:?}: {} vs {} (se {})", m.estimate, m.target, m.stderr)
        })?;
        parts.push(format!("{moments:?}@{n}: {:.4}/{:.4}", m.estimate, m.target));
    }
    Ok(parts.join(", "))
}

fn proof_quantities() -> Outcome {
    for k in 1..=5 {
        let target = chebyshev_eigenvalue(k);
        for n in 2 * k..=20 {
            let s = finite_n_eigenvalue_sum(n, k).map_err(|e| e.to_string())?;
            ensure(s == target, || format!("n={n} k={k}: {s} != {target}"))?;
        }
    }
    let mut rows = 0;
    for n in 1..=40 {
        for row in chi_square_bound_check(n, 15).map_err(|e| e.to_string())? {
            rows += 1;
            ensure(row.pass, || {
                format!("n={n} l={}: chi2 {} > {}", row.l, to_f64(&row.chi_square), to_f64(&row.bound))
            })?;
        }
    }
    // Independent check of the stationary weight used throughout.
    let bb = burnside_core::distributions::BetaBinomialParams::symmetric(3, int(1)).unwrap();
    ensure(beta_binomial_pmf(&bb, 0).unwrap() == ratio(1, 4), || "uniform weight".into())?;
    Ok(format!("eigenvalue sums n-independent for k <= 5, chi-square bound on {rows} rows"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("untwisted eigenvalues", eigenvalues_untwisted),
        ("total variation sandwich", sandwich_bounds),
        ("twisted eigenstructure", twisted_eigenstructure),
        ("geometric rate", geometric_rate),
        ("stationarity and lumping", stationarity_and_lumping),
        ("sampler fidelity", sampler_fidelity),
        ("continuous limit", continuous_limit),
        ("identity suite", identity_suite),
        ("cycle moments", polya_moments),
        ("proof quantities", proof_quantities),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
