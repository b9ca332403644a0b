//! Independent numerical oracles for the integration suites.
//!
//! Everything here deliberately avoids the library's own special-function
//! and distribution code paths: the normal CDF comes from series/continued
//! fraction erf forms, t and studentized-range probabilities from direct
//! quadrature, and discrete test distributions from brute-force
//! enumeration or exact rational arithmetic.

#![allow(dead_code)]

/// erf by the stable all-positive-terms confluent series; good to ~1e-15
/// for |x| <= 5.5.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0u32;
    loop {
        n += 1;
        term *= 2.0 * x2 / (2.0 * n as f64 + 1.0);
        let prev = sum;
        sum += term;
        if sum == prev || n > 500 {
            break;
        }
    }
    2.0 / std::f64::consts::PI.sqrt() * (-x2).exp() * sum
}

/// erfc by the Laplace continued fraction; accurate for x >= 2.
fn erfc_cf(x: f64) -> f64 {
    // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let mut f = 0.0;
    for k in (1..=60).rev() {
        f = (k as f64 / 2.0) / (x + f);
    }
    (-x * x).exp() / std::f64::consts::PI.sqrt() / (x + f)
}

pub fn oracle_erfc(x: f64) -> f64 {
    if x < 0.0 {
        2.0 - oracle_erfc(-x)
    } else if x < 2.0 {
        1.0 - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

/// Standard normal CDF, independent of the library implementation.
pub fn oracle_normal_cdf(x: f64) -> f64 {
    0.5 * oracle_erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile by bisection on [`oracle_normal_cdf`].
pub fn oracle_normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    let (mut lo, mut hi) = (-9.0f64, 9.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if oracle_normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Simpson rule.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n.is_multiple_of(2) { n } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        sum += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

/// Student-t survival P(T > t) by quadrature.
///
/// With u = sqrt(df) tan(theta) the density integral reduces to
/// integrating cos^(df-1); the normalizing constant comes from the same
/// quadrature, so no gamma function is involved anywhere.
pub fn oracle_t_survival(t: f64, df: usize) -> f64 {
    let nu = df as f64;
    let integrand = |theta: f64| theta.cos().powf(nu - 1.0);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let total = simpson(integrand, -half_pi, half_pi, 4000);
    let theta_t = (t / nu.sqrt()).atan();
    let upper = simpson(integrand, theta_t, half_pi, 4000);
    upper / total
}

/// CDF of the studentized range with infinite degrees of freedom:
/// P(Q <= q) = k Integral phi(z) [Phi(z) - Phi(z - q)]^(k-1) dz.
pub fn oracle_range_cdf(q: f64, k: usize) -> f64 {
    let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let f = |z: f64| {
        let inner = oracle_normal_cdf(z) - oracle_normal_cdf(z - q);
        phi(z) * inner.max(0.0).powi(k as i32 - 1)
    };
    k as f64 * simpson(f, -9.0, 9.0 + q, 3000)
}

/// Upper-alpha studentized-range critical value (infinite df), divided by
/// sqrt(2), by bisection on [`oracle_range_cdf`].
pub fn oracle_range_q(alpha: f64, k: usize) -> f64 {
    let target = 1.0 - alpha;
    let (mut lo, mut hi) = (0.0f64, 12.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if oracle_range_cdf(mid, k) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) / std::f64::consts::SQRT_2
}

/// Tie-averaged ranks of absolute values (oracle-side copy).
fn oracle_abs_ranks(deltas: &[f64]) -> Vec<f64> {
    let abs: Vec<f64> = deltas.iter().map(|d| d.abs()).collect();
    let mut order: Vec<usize> = (0..abs.len()).collect();
    order.sort_by(|&a, &b| abs[a].partial_cmp(&abs[b]).unwrap());
    let mut ranks = vec![0.0; abs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && abs[order[j]] == abs[order[i]] {
            j += 1;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        i = j;
    }
    ranks
}

/// Exact Wilcoxon signed-rank p-values by full enumeration of all 2^D sign
/// assignments. Returns (two_sided, greater, less).
pub fn oracle_wilcoxon_enumeration(deltas: &[f64]) -> (f64, f64, f64) {
    let d = deltas.len();
    assert!(d <= 22, "enumeration oracle limited to small D");
    let ranks = oracle_abs_ranks(deltas);
    let w_plus_obs: f64 = ranks
        .iter()
        .zip(deltas)
        .filter(|(_, &x)| x > 0.0)
        .map(|(r, _)| r)
        .sum();
    let mut ge = 0u64;
    let mut le = 0u64;
    for mask in 0u64..(1 << d) {
        let w_plus: f64 = (0..d)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| ranks[i])
            .sum();
        if w_plus >= w_plus_obs {
            ge += 1;
        }
        if w_plus <= w_plus_obs {
            le += 1;
        }
    }
    let total = (1u64 << d) as f64;
    let p_ge = ge as f64 / total;
    let p_le = le as f64 / total;
    ((2.0 * p_ge.min(p_le)).min(1.0), p_ge, p_le)
}

/// Exact two-sided binomial sign-test p-value via rational arithmetic:
/// 2 * min(P(X <= w), P(X >= w)) for X ~ Bin(n, 1/2), capped at 1.
pub fn oracle_sign_binomial(wins: usize, n: usize) -> f64 {
    use num_bigint::BigInt;
    use num_rational::BigRational;

    let choose = |n: usize, k: usize| -> BigInt {
        let mut num = BigInt::from(1);
        let mut den = BigInt::from(1);
        for i in 0..k {
            num *= BigInt::from(n - i);
            den *= BigInt::from(i + 1);
        }
        num / den
    };
    let total = BigInt::from(1) << n;
    let tail = |from: usize, to: usize| -> BigRational {
        let mut acc = BigInt::from(0);
        for k in from..=to {
            acc += choose(n, k);
        }
        BigRational::new(acc, total.clone())
    };
    let p_le = tail(0, wins);
    let p_ge = tail(wins, n);
    let two = BigRational::from(BigInt::from(2)) * p_le.min(p_ge);
    let one = BigRational::from(BigInt::from(1));
    let capped = if two > one { one } else { two };
    // Exact rational -> f64 for comparison.
    let num: f64 = capped.numer().to_string().parse().unwrap();
    let den: f64 = capped.denom().to_string().parse().unwrap();
    num / den
}
