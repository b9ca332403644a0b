//! Comparative hypothesis tests between strategies: paired t-test, Wilcoxon
//! signed-rank, sign test and the Friedman rank test, with effect sizes,
//! one/two-sided p-values and multiple-testing corrections.
//!
//! All pairwise tests operate on performances paired through datasets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::metrics::{Direction, LossTensor};
use crate::special::{self, SpecialFnError};

#[derive(Debug, Error, PartialEq)]
pub enum ComparisonError {
    #[error("strategies share only {0} datasets; need at least 2")]
    InsufficientOverlap(usize),
    #[error("unknown strategy id {0}")]
    UnknownStrategy(String),
    #[error("need at least {need} paired values, got {got}")]
    TooFewPairs { need: usize, got: usize },
    #[error("rank matrix must have at least 2 rows and 2 columns")]
    DegenerateRankMatrix,
    #[error(transparent)]
    Special(#[from] SpecialFnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestKind {
    PairedT,
    WilcoxonSignedRank,
    SignTest,
    Friedman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Alternative {
    TwoSided,
    /// Differences value(k) - value(k') tend negative.
    Less,
    /// Differences value(k) - value(k') tend positive.
    Greater,
}

/// How the p-value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MethodDetail {
    /// Exact enumeration of the null distribution.
    Exact,
    NormalApprox,
    TDistribution,
    FDistribution,
    Binomial,
    Trinomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test: TestKind,
    pub statistic: f64,
    pub p_value: f64,
    pub alternative: Alternative,
    pub effect_raw: f64,
    pub effect_normalized: f64,
    pub method_detail: MethodDetail,
    /// Sample size the p-value is based on.
    pub n_used: usize,
    /// Zero differences removed before ranking (Wilcoxon only).
    pub zeros_dropped: usize,
    /// Set when a degenerate rule produced the p-value (zero variance,
    /// perfectly consistent rankings, all-tied sign test).
    pub degenerate: bool,
}

/// Paired performance differences value(k) - value(k') over the datasets on
/// which both strategies have values.
pub fn paired_differences(
    tensor: &LossTensor,
    k: &str,
    k_prime: &str,
) -> Result<Vec<f64>, ComparisonError> {
    for s in [k, k_prime] {
        if !tensor.strategy_ids.iter().any(|x| x == s) {
            return Err(ComparisonError::UnknownStrategy(s.to_string()));
        }
    }
    let deltas: Vec<f64> = tensor
        .dataset_ids
        .iter()
        .filter_map(|d| match (tensor.value(d, k), tensor.value(d, k_prime)) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        })
        .collect();
    if deltas.len() < 2 {
        return Err(ComparisonError::InsufficientOverlap(deltas.len()));
    }
    Ok(deltas)
}

/// Paired t-test on per-dataset performance differences.
///
/// Statistic t = sqrt(D) * mean / sd; the raw effect size is the mean
/// difference and the normalized effect size is Cohen's d for paired
/// samples. Zero variance falls back to a degenerate rule: p = 1 when the
/// mean is also zero, p = 0 otherwise.
pub fn paired_t_test(
    deltas: &[f64],
    alternative: Alternative,
) -> Result<TestResult, ComparisonError> {
    let d = deltas.len();
    if d < 2 {
        return Err(ComparisonError::TooFewPairs { need: 2, got: d });
    }
    let constant = deltas.windows(2).all(|w| w[0] == w[1]);
    let mean = if constant {
        deltas[0]
    } else {
        deltas.iter().sum::<f64>() / d as f64
    };
    let ss: f64 = deltas.iter().map(|x| (x - mean) * (x - mean)).sum();
    let var = if constant { 0.0 } else { ss / (d - 1) as f64 };
    if var == 0.0 {
        let (stat, cohen, p) = if mean == 0.0 {
            (0.0, 0.0, 1.0)
        } else {
            let sign = mean.signum();
            let p = match alternative {
                Alternative::TwoSided => 0.0,
                Alternative::Less => {
                    if sign < 0.0 {
                        0.0
                    } else {
                        1.0
                    }
                }
                Alternative::Greater => {
                    if sign > 0.0 {
                        0.0
                    } else {
                        1.0
                    }
                }
            };
            (sign * f64::INFINITY, sign * f64::INFINITY, p)
        };
        return Ok(TestResult {
            test: TestKind::PairedT,
            statistic: stat,
            p_value: p,
            alternative,
            effect_raw: mean,
            effect_normalized: cohen,
            method_detail: MethodDetail::TDistribution,
            n_used: d,
            zeros_dropped: 0,
            degenerate: true,
        });
    }
    let cohen = mean / var.sqrt();
    let t = (d as f64).sqrt() * cohen;
    let df = d - 1;
    let p = match alternative {
        Alternative::TwoSided => (2.0 * special::t_survival(t.abs(), df)?).min(1.0),
        Alternative::Greater => special::t_survival(t, df)?,
        Alternative::Less => 1.0 - special::t_survival(t, df)?,
    };
    Ok(TestResult {
        test: TestKind::PairedT,
        statistic: t,
        p_value: p,
        alternative,
        effect_raw: mean,
        effect_normalized: cohen,
        method_detail: MethodDetail::TDistribution,
        n_used: d,
        zeros_dropped: 0,
        degenerate: false,
    })
}

/// Ranks of absolute values with tie-averaging.
fn abs_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let mut order: Vec<usize> = (0..abs.len()).collect();
    order.sort_by(|&a, &b| abs[a].partial_cmp(&abs[b]).unwrap().then(a.cmp(&b)));
    let mut ranks = vec![0.0; abs.len()];
    let mut tie_sizes = Vec::new();
    let mut pos = 0;
    while pos < order.len() {
        let mut end = pos + 1;
        while end < order.len() && abs[order[end]] == abs[order[pos]] {
            end += 1;
        }
        let avg = (pos + 1 + end) as f64 / 2.0;
        for &i in &order[pos..end] {
            ranks[i] = avg;
        }
        tie_sizes.push(end - pos);
        pos = end;
    }
    (ranks, tie_sizes)
}

/// Null distribution of the positive rank sum W+ over all sign assignments
/// of the integer ranks 1..=n: `counts[w]` of subsets of {1..n} summing to w.
fn signed_rank_counts(n: usize) -> Vec<f64> {
    let max = n * (n + 1) / 2;
    let mut counts = vec![0.0; max + 1];
    counts[0] = 1.0;
    for r in 1..=n {
        for w in (r..=max).rev() {
            counts[w] += counts[w - r];
        }
    }
    counts
}

/// Wilcoxon signed-rank test on paired differences.
///
/// Zero differences are dropped before ranking. The statistic is
/// W = W+ - W- (equivalently D times the mean signed rank). With at most 20
/// untied absolute differences the p-value is exact over all 2^D sign
/// assignments; otherwise a normal approximation with tie and continuity
/// corrections is used.
pub fn wilcoxon_signed_rank(
    deltas: &[f64],
    alternative: Alternative,
) -> Result<TestResult, ComparisonError> {
    let nonzero: Vec<f64> = deltas.iter().copied().filter(|&x| x != 0.0).collect();
    let zeros_dropped = deltas.len() - nonzero.len();
    if nonzero.is_empty() {
        return Ok(TestResult {
            test: TestKind::WilcoxonSignedRank,
            statistic: 0.0,
            p_value: 1.0,
            alternative,
            effect_raw: 0.0,
            effect_normalized: 0.0,
            method_detail: MethodDetail::Exact,
            n_used: 0,
            zeros_dropped,
            degenerate: true,
        });
    }
    let d = nonzero.len();
    if d < 2 {
        return Err(ComparisonError::TooFewPairs { need: 2, got: d });
    }
    let (ranks, tie_sizes) = abs_ranks(&nonzero);
    let w_plus: f64 = ranks
        .iter()
        .zip(&nonzero)
        .filter(|(_, &x)| x > 0.0)
        .map(|(r, _)| r)
        .sum();
    let total = d as f64 * (d + 1) as f64 / 2.0;
    let w_stat = 2.0 * w_plus - total; // W+ - W-
    let w_mean = w_stat / d as f64;
    let rho = 2.0 * w_mean / (d + 1) as f64;

    let untied = tie_sizes.iter().all(|&t| t == 1);
    let (p, method) = if untied && d <= 20 {
        // Exact: ranks are exactly 1..=d, W+ is integral.
        let counts = signed_rank_counts(d);
        let denom = 2f64.powi(d as i32);
        let w_obs = w_plus.round() as usize;
        let p_ge: f64 = counts[w_obs..].iter().sum::<f64>() / denom;
        let p_le: f64 = counts[..=w_obs].iter().sum::<f64>() / denom;
        let p = match alternative {
            Alternative::TwoSided => (2.0 * p_ge.min(p_le)).min(1.0),
            Alternative::Greater => p_ge,
            Alternative::Less => p_le,
        };
        (p, MethodDetail::Exact)
    } else {
        let mu = d as f64 * (d + 1) as f64 / 4.0;
        let tie_term: f64 = tie_sizes
            .iter()
            .map(|&t| (t * t * t - t) as f64)
            .sum::<f64>()
            / 48.0;
        let sigma = (d as f64 * (d + 1) as f64 * (2 * d + 1) as f64 / 24.0 - tie_term).sqrt();
        let diff = w_plus - mu;
        // signum(0.0) is 1.0 in Rust; the continuity correction must vanish
        // on a centered statistic.
        let sign = if diff == 0.0 { 0.0 } else { diff.signum() };
        let correction = match alternative {
            Alternative::TwoSided => 0.5 * sign,
            Alternative::Greater => 0.5,
            Alternative::Less => -0.5,
        };
        let z = (diff - correction) / sigma;
        let upper = special::normal_survival(z);
        let lower = special::normal_cdf(z);
        let p = match alternative {
            Alternative::TwoSided => (2.0 * upper.min(lower)).min(1.0),
            Alternative::Greater => upper,
            Alternative::Less => lower,
        };
        (p, MethodDetail::NormalApprox)
    };
    Ok(TestResult {
        test: TestKind::WilcoxonSignedRank,
        statistic: w_stat,
        p_value: p,
        alternative,
        effect_raw: w_mean,
        effect_normalized: rho,
        method_detail: method,
        n_used: d,
        zeros_dropped,
        degenerate: false,
    })
}

/// Binomial tail probabilities for Bin(n, 1/2) computed in log space.
fn binom_half_pmf(n: usize) -> Vec<f64> {
    let ln_half = 0.5f64.ln();
    (0..=n)
        .map(|k| {
            (special::ln_gamma(n as f64 + 1.0)
                - special::ln_gamma(k as f64 + 1.0)
                - special::ln_gamma((n - k) as f64 + 1.0)
                + n as f64 * ln_half)
                .exp()
        })
        .collect()
}

/// Sign test on per-dataset paired performances.
///
/// Within each dataset the two strategies are ranked against each other
/// (1 = better, 2 = worse, 1.5 each on ties) and the per-dataset rank
/// difference sgn is accumulated; negative raw effect favors `perf_k`.
/// Without ties the p-value is an exact binomial on wins vs losses;
/// with ties an exact trinomial with the tie probability estimated from the
/// observed tie fraction.
pub fn sign_test(
    perf_k: &[f64],
    perf_k_prime: &[f64],
    direction: Direction,
    alternative: Alternative,
) -> Result<TestResult, ComparisonError> {
    assert_eq!(perf_k.len(), perf_k_prime.len(), "paired inputs");
    let d = perf_k.len();
    if d < 1 {
        return Err(ComparisonError::TooFewPairs { need: 1, got: 0 });
    }
    let mut wins = 0usize; // datasets where k is better
    let mut losses = 0usize;
    let mut ties = 0usize;
    for (&a, &b) in perf_k.iter().zip(perf_k_prime) {
        let better = match direction {
            Direction::LowerIsBetter => a < b,
            Direction::HigherIsBetter => a > b,
        };
        let worse = match direction {
            Direction::LowerIsBetter => a > b,
            Direction::HigherIsBetter => a < b,
        };
        if better {
            wins += 1;
        } else if worse {
            losses += 1;
        } else {
            ties += 1;
        }
    }
    let s = losses as f64 - wins as f64; // sum of R_k - R_k'
    let df = d as f64;
    let p_hat = (df + s) / (2.0 * df);
    let denom_sq = df * df - s * s;
    let z = if denom_sq > 0.0 {
        df.sqrt() * s / denom_sq.sqrt()
    } else {
        s.signum() * f64::INFINITY
    };
    let degenerate_z = denom_sq <= 0.0;

    if ties == d {
        return Ok(TestResult {
            test: TestKind::SignTest,
            statistic: p_hat,
            p_value: 1.0,
            alternative,
            effect_raw: s,
            effect_normalized: 0.0,
            method_detail: MethodDetail::Trinomial,
            n_used: d,
            zeros_dropped: 0,
            degenerate: true,
        });
    }

    let (p, method) = if ties == 0 {
        // S <= s_obs corresponds to wins >= w_obs under the null.
        let pmf = binom_half_pmf(d);
        let p_le_s: f64 = pmf[wins..].iter().sum();
        let p_ge_s: f64 = pmf[..=wins].iter().sum();
        let p = match alternative {
            Alternative::TwoSided => (2.0 * p_le_s.min(p_ge_s)).min(1.0),
            Alternative::Less => p_le_s,
            Alternative::Greater => p_ge_s,
        };
        (p, MethodDetail::Binomial)
    } else {
        let p_tie = ties as f64 / df;
        let q = (1.0 - p_tie) / 2.0;
        let ln_fact = |x: usize| special::ln_gamma(x as f64 + 1.0);
        let mut p_le = 0.0;
        let mut p_ge = 0.0;
        let mut p_abs = 0.0;
        for w in 0..=d {
            for l in 0..=(d - w) {
                let t = d - w - l;
                let ln_p = ln_fact(d) - ln_fact(w) - ln_fact(l) - ln_fact(t)
                    + (w + l) as f64 * q.ln()
                    + if t > 0 { t as f64 * p_tie.ln() } else { 0.0 };
                let prob = ln_p.exp();
                let s_sim = l as f64 - w as f64;
                if s_sim <= s {
                    p_le += prob;
                }
                if s_sim >= s {
                    p_ge += prob;
                }
                if s_sim.abs() >= s.abs() {
                    p_abs += prob;
                }
            }
        }
        let p = match alternative {
            Alternative::TwoSided => {
                if s == 0.0 {
                    1.0
                } else {
                    p_abs.min(1.0)
                }
            }
            Alternative::Less => p_le,
            Alternative::Greater => p_ge,
        };
        (p, MethodDetail::Trinomial)
    };
    Ok(TestResult {
        test: TestKind::SignTest,
        statistic: p_hat,
        p_value: p,
        alternative,
        effect_raw: s,
        effect_normalized: z,
        method_detail: method,
        n_used: d,
        zeros_dropped: 0,
        degenerate: degenerate_z,
    })
}

/// Friedman rank test over a D x K rank matrix.
///
/// Uses the F-form of the statistic with (K-1, (K-1)(D-1)) degrees of
/// freedom. Perfectly consistent rankings drive the denominator to zero;
/// that case is reported as an infinite statistic with p = 0. The
/// normalized effect size is Q / (D (K - 1)), the concordance coefficient.
pub fn friedman_test(rank_matrix: &Matrix) -> Result<TestResult, ComparisonError> {
    let (d, k) = (rank_matrix.n_rows(), rank_matrix.n_cols());
    if d < 2 || k < 2 {
        return Err(ComparisonError::DegenerateRankMatrix);
    }
    let (df, kf) = (d as f64, k as f64);
    let mut q = 0.0;
    for j in 0..k {
        let r_bar = rank_matrix.column(j).iter().sum::<f64>() / df;
        let dev = r_bar - (kf + 1.0) / 2.0;
        q += dev * dev;
    }
    q *= 12.0 * df / (kf * (kf + 1.0));
    let concordance = q / (df * (kf - 1.0));
    let denom = df * (kf - 1.0) - q;
    let (f_stat, p, degenerate) = if denom <= 0.0 {
        (f64::INFINITY, 0.0, true)
    } else {
        let f_stat = (df - 1.0) * q / denom;
        let p = special::f_survival(f_stat, k - 1, (k - 1) * (d - 1))?;
        (f_stat, p, false)
    };
    Ok(TestResult {
        test: TestKind::Friedman,
        statistic: f_stat,
        p_value: p,
        alternative: Alternative::Greater,
        effect_raw: q,
        effect_normalized: concordance,
        method_detail: MethodDetail::FDistribution,
        n_used: d,
        zeros_dropped: 0,
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Correction {
    #[default]
    None,
    Bonferroni,
    Holm,
}

/// Multiple-testing adjustment of a family of p-values.
///
/// Bonferroni multiplies by the family size; Holm is the step-down variant
/// (sort ascending, multiply the j-th smallest by m - j + 1, enforce
/// monotonicity, cap at 1). Output order matches input order.
pub fn correct_pvalues(p_values: &[f64], method: Correction) -> Vec<f64> {
    let m = p_values.len();
    match method {
        Correction::None => p_values.to_vec(),
        Correction::Bonferroni => p_values.iter().map(|p| (m as f64 * p).min(1.0)).collect(),
        Correction::Holm => {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| p_values[a].partial_cmp(&p_values[b]).unwrap());
            let mut out = vec![0.0; m];
            let mut running = 0.0f64;
            for (j, &idx) in order.iter().enumerate() {
                let adjusted = ((m - j) as f64 * p_values[idx]).min(1.0);
                running = running.max(adjusted);
                out[idx] = running;
            }
            out
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairwiseTest {
    PairedT,
    WilcoxonSignedRank,
    SignTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseCell {
    pub statistic: f64,
    pub p_value: f64,
    pub n_used: usize,
}

/// All-pairs comparison matrix. Cells are `None` for pairs with
/// insufficient dataset overlap; the diagonal holds the self-comparison
/// sentinel (zero-effect statistic, p = 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairwiseMatrix {
    pub strategy_ids: Vec<String>,
    pub cells: Vec<Vec<Option<PairwiseCell>>>,
    pub correction: Correction,
    pub test: PairwiseTest,
    pub alternative: Alternative,
}

/// Tests every unordered strategy pair once and assembles the K x K matrix.
///
/// The correction is applied across the family of unique present pairs.
/// The transposed cell mirrors the statistic (negated for t and Wilcoxon,
/// complemented for the sign-test proportion) and carries the same p-value.
pub fn all_pairs(
    tensor: &LossTensor,
    test: PairwiseTest,
    alternative: Alternative,
    correction: Correction,
) -> Result<PairwiseMatrix, ComparisonError> {
    let ids = tensor.strategy_ids.clone();
    let k = ids.len();
    let mut cells: Vec<Vec<Option<PairwiseCell>>> = vec![vec![None; k]; k];
    let mut family: Vec<(usize, usize, TestResult)> = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            let result = pair_test(tensor, &ids[i], &ids[j], test, alternative);
            match result {
                Ok(r) => family.push((i, j, r)),
                // Too little paired data marks the cell missing and keeps it
                // out of the correction family.
                Err(ComparisonError::InsufficientOverlap(_))
                | Err(ComparisonError::TooFewPairs { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let raw: Vec<f64> = family.iter().map(|(_, _, r)| r.p_value).collect();
    let adjusted = correct_pvalues(&raw, correction);
    for ((i, j, r), p_adj) in family.iter().zip(adjusted) {
        let mirrored_stat = match test {
            PairwiseTest::PairedT | PairwiseTest::WilcoxonSignedRank => -r.statistic,
            PairwiseTest::SignTest => 1.0 - r.statistic,
        };
        cells[*i][*j] = Some(PairwiseCell {
            statistic: r.statistic,
            p_value: p_adj,
            n_used: r.n_used,
        });
        cells[*j][*i] = Some(PairwiseCell {
            statistic: mirrored_stat,
            p_value: p_adj,
            n_used: r.n_used,
        });
    }
    for (i, row) in cells.iter_mut().enumerate() {
        let datasets = tensor.strategy_column(&ids[i]).len();
        row[i] = Some(PairwiseCell {
            statistic: match test {
                PairwiseTest::SignTest => 0.5,
                _ => 0.0,
            },
            p_value: 1.0,
            n_used: datasets,
        });
    }
    Ok(PairwiseMatrix {
        strategy_ids: ids,
        cells,
        correction,
        test,
        alternative,
    })
}

fn pair_test(
    tensor: &LossTensor,
    k: &str,
    k_prime: &str,
    test: PairwiseTest,
    alternative: Alternative,
) -> Result<TestResult, ComparisonError> {
    match test {
        PairwiseTest::PairedT => {
            let deltas = paired_differences(tensor, k, k_prime)?;
            paired_t_test(&deltas, alternative)
        }
        PairwiseTest::WilcoxonSignedRank => {
            let deltas = paired_differences(tensor, k, k_prime)?;
            wilcoxon_signed_rank(&deltas, alternative)
        }
        PairwiseTest::SignTest => {
            let a = tensor.strategy_column(k);
            let b = tensor.strategy_column(k_prime);
            let common: Vec<(f64, f64)> = a
                .iter()
                .filter_map(|(d, va)| {
                    b.iter()
                        .find(|(db, _)| db == d)
                        .map(|(_, vb)| (*va, *vb))
                })
                .collect();
            if common.len() < 2 {
                return Err(ComparisonError::InsufficientOverlap(common.len()));
            }
            let (va, vb): (Vec<f64>, Vec<f64>) = common.into_iter().unzip();
            sign_test(&va, &vb, tensor.kind.direction(), alternative)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paired_t_example() {
        let r = paired_t_test(&[0.1, 0.2, 0.3, 0.4], Alternative::TwoSided).unwrap();
        assert!((r.effect_raw - 0.25).abs() < 1e-15);
        // t = sqrt(15) exactly for this input.
        assert!((r.statistic - 15f64.sqrt()).abs() < 1e-12);
        assert!((r.effect_normalized - 15f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((r.p_value - 0.03047).abs() < 5e-6, "p = {}", r.p_value);
    }

    #[test]
    fn paired_t_degenerate_zero() {
        let r = paired_t_test(&[0.0, 0.0, 0.0], Alternative::TwoSided).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(r.degenerate);
        let r = paired_t_test(&[0.2, 0.2, 0.2], Alternative::TwoSided).unwrap();
        assert_eq!(r.p_value, 0.0);
        assert!(r.degenerate);
    }

    #[test]
    fn paired_t_antisymmetry() {
        let d = [0.12, -0.3, 0.05, 0.2, -0.01];
        let neg: Vec<f64> = d.iter().map(|x| -x).collect();
        let a = paired_t_test(&d, Alternative::TwoSided).unwrap();
        let b = paired_t_test(&neg, Alternative::TwoSided).unwrap();
        assert!((a.statistic + b.statistic).abs() < 1e-12);
        assert!((a.p_value - b.p_value).abs() < 1e-12);
    }

    #[test]
    fn paired_t_one_sided_splits_two_sided() {
        let d = [0.1, 0.25, -0.03, 0.4];
        let less = paired_t_test(&d, Alternative::Less).unwrap();
        let greater = paired_t_test(&d, Alternative::Greater).unwrap();
        assert!((less.p_value + greater.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wilcoxon_example() {
        let r = wilcoxon_signed_rank(&[1.0, -0.5, 2.0], Alternative::TwoSided).unwrap();
        assert!((r.effect_raw - 4.0 / 3.0).abs() < 1e-15);
        assert!((r.effect_normalized - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.statistic, 4.0);
        assert_eq!(r.method_detail, MethodDetail::Exact);
    }

    #[test]
    fn wilcoxon_all_positive_one_sided() {
        let r = wilcoxon_signed_rank(&[0.3, 0.1, 0.7], Alternative::Greater).unwrap();
        assert!((r.p_value - 0.125).abs() < 1e-15);
    }

    #[test]
    fn wilcoxon_symmetry() {
        let d = [0.4, -1.2, 0.3, 2.0, -0.7];
        let neg: Vec<f64> = d.iter().map(|x| -x).collect();
        let a = wilcoxon_signed_rank(&d, Alternative::TwoSided).unwrap();
        let b = wilcoxon_signed_rank(&neg, Alternative::TwoSided).unwrap();
        assert_eq!(a.statistic, -b.statistic);
        assert!((a.p_value - b.p_value).abs() < 1e-15);
    }

    #[test]
    fn wilcoxon_drops_zeros() {
        let r = wilcoxon_signed_rank(&[0.0, 1.0, -0.5, 2.0, 0.0], Alternative::TwoSided).unwrap();
        assert_eq!(r.zeros_dropped, 2);
        assert_eq!(r.n_used, 3);
        assert_eq!(r.statistic, 4.0);
    }

    #[test]
    fn wilcoxon_all_zero() {
        let r = wilcoxon_signed_rank(&[0.0, 0.0], Alternative::TwoSided).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert!(r.degenerate);
    }

    #[test]
    fn sign_test_example() {
        // k better on 8 of 10 datasets, lower-is-better values.
        let k: Vec<f64> = (0..10).map(|i| if i < 8 { 0.1 } else { 0.9 }).collect();
        let kp = vec![0.5; 10];
        let r = sign_test(&k, &kp, Direction::LowerIsBetter, Alternative::TwoSided).unwrap();
        assert_eq!(r.effect_raw, -6.0);
        assert!((r.statistic - 0.2).abs() < 1e-15);
        assert!((r.p_value - 112.0 / 1024.0).abs() < 1e-12);
        assert_eq!(r.method_detail, MethodDetail::Binomial);
    }

    #[test]
    fn sign_test_balanced() {
        let k = vec![0.1, 0.1, 0.1, 0.1, 0.1, 0.9, 0.9, 0.9, 0.9, 0.9];
        let kp = vec![0.5; 10];
        let r = sign_test(&k, &kp, Direction::LowerIsBetter, Alternative::TwoSided).unwrap();
        assert_eq!(r.effect_raw, 0.0);
        assert_eq!(r.effect_normalized, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn sign_test_extreme() {
        let k = vec![0.1; 8];
        let kp = vec![0.5; 8];
        let r = sign_test(&k, &kp, Direction::LowerIsBetter, Alternative::TwoSided).unwrap();
        assert!(r.degenerate);
        assert!(r.effect_normalized.is_infinite());
        assert!((r.p_value - 2.0 * 2f64.powi(-8)).abs() < 1e-15);
    }

    #[test]
    fn sign_test_all_ties() {
        let k = vec![0.5; 4];
        let r = sign_test(&k, &k, Direction::LowerIsBetter, Alternative::TwoSided).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert!(r.degenerate);
    }

    #[test]
    fn friedman_example() {
        let ranks = Matrix::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![1.0, 2.0, 3.0],
            vec![2.0, 1.0, 3.0],
            vec![1.0, 3.0, 2.0],
        ]);
        let r = friedman_test(&ranks).unwrap();
        assert!((r.effect_raw - 4.5).abs() < 1e-12);
        assert!((r.statistic - 27.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn friedman_perfect_consistency() {
        let ranks = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]);
        let r = friedman_test(&ranks).unwrap();
        assert!(r.statistic.is_infinite());
        assert_eq!(r.p_value, 0.0);
        assert!(r.degenerate);
        // Q attains its maximum D(K-1).
        assert!((r.effect_raw - 4.0).abs() < 1e-12);
    }

    #[test]
    fn friedman_all_tied() {
        let ranks = Matrix::from_rows(&[vec![2.0, 2.0, 2.0], vec![2.0, 2.0, 2.0]]);
        let r = friedman_test(&ranks).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn corrections_examples() {
        let p = [0.01, 0.04];
        assert_eq!(correct_pvalues(&p, Correction::Bonferroni), vec![0.02, 0.08]);
        assert_eq!(correct_pvalues(&p, Correction::Holm), vec![0.02, 0.04]);
        assert_eq!(correct_pvalues(&[0.3], Correction::Bonferroni), vec![0.3]);
        assert_eq!(correct_pvalues(&[0.3], Correction::Holm), vec![0.3]);
    }

    #[test]
    fn holm_monotone_and_dominated_by_bonferroni() {
        let p = [0.001, 0.2, 0.04, 0.9, 0.012];
        let holm = correct_pvalues(&p, Correction::Holm);
        let bonf = correct_pvalues(&p, Correction::Bonferroni);
        for i in 0..p.len() {
            assert!(holm[i] >= p[i]);
            assert!(holm[i] <= bonf[i] + 1e-15);
        }
    }
}
