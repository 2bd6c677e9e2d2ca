//! Closed-form convergence bounds and the empirical dominance check.
//!
//! All logarithms are natural.

use alloc::vec::Vec;

use thiserror::Error;

/// Confidence level of the DKW band is `1 - DKW_ALPHA`.
pub const DKW_ALPHA: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum BoundError {
    #[error("n must be at least 1, got {0}")]
    NonPositiveN(u64),
    #[error("failure probability {0} is not in (0, 1)")]
    InvalidDelta(f64),
    #[error("rate {0} must be positive and finite")]
    InvalidRate(f64),
    #[error("no samples to check")]
    EmptySamples,
}

/// Per-round two-step success floor `1 / (2^6 e^5)`.
pub fn two_round_success_floor() -> f64 {
    1.0 / (64.0 * libm::exp(5.0))
}

/// Rate of the dominating exponential, `-ln(1 - 1/(2^6 e^5)) ≈ 0.000105`.
pub fn mu() -> f64 {
    -libm::log1p(-two_round_success_floor())
}

/// Moments of the dominating variable `T` for the Frugal strategy on `n` players.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub mu: f64,
    /// `E(T) <= (2/μ)(1 + ln n)`.
    pub e_t_bound: f64,
    /// `Var(T) <= 4n/μ²`.
    pub var_t_bound: f64,
    pub n: u64,
}

pub fn frugal_bounds(n: u64) -> Result<BoundReport, BoundError> {
    if n == 0 {
        return Err(BoundError::NonPositiveN(n));
    }
    let mu = mu();
    let nf = n as f64;
    Ok(BoundReport {
        mu,
        e_t_bound: 2.0 / mu * (1.0 + libm::log(nf)),
        var_t_bound: 4.0 * nf / (mu * mu),
        n,
    })
}

/// `C = 1050 e^9`, the constant of the Greedy round bound.
pub fn greedy_constant() -> f64 {
    1050.0 * libm::exp(9.0)
}

/// Greedy convergence round bound `C ln(n/δ)`, holding with probability
/// at least `1 - δ` when `k >= Δ + 2`.
pub fn greedy_bound(n: u64, delta: f64) -> Result<f64, BoundError> {
    if n == 0 {
        return Err(BoundError::NonPositiveN(n));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(BoundError::InvalidDelta(delta));
    }
    Ok(greedy_constant() * (libm::log(n as f64) - libm::log(delta)))
}

/// Minimizer and minimum of the max-of-exponentials bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxExpectationBound {
    /// `a_n = F⁻¹(1 - 1/n) = ln(n)/μ`.
    pub a_n: f64,
    /// `E(M) <= (1/μ)(1 + ln n)` for `M` the maximum of `n` Exp(μ) variables.
    pub bound: f64,
}

/// `h(a) = a + n ∫_a^∞ e^{-μx} dx = a + n e^{-μa} / μ`, an upper bound on
/// `E(M)` for every real `a`.
pub fn max_expectation_objective(a: f64, n: u64, mu: f64) -> f64 {
    a + n as f64 * libm::exp(-mu * a) / mu
}

pub fn max_expectation_bound(n: u64, mu: f64) -> Result<MaxExpectationBound, BoundError> {
    if n == 0 {
        return Err(BoundError::NonPositiveN(n));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(BoundError::InvalidRate(mu));
    }
    let ln_n = libm::log(n as f64);
    Ok(MaxExpectationBound {
        a_n: ln_n / mu,
        bound: (1.0 + ln_n) / mu,
    })
}

/// Half-width of the two-sided DKW band for `n` samples at level `1 - alpha`.
pub fn dkw_band(n: usize, alpha: f64) -> f64 {
    libm::sqrt(libm::log(2.0 / alpha) / (2.0 * n as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominancePoint {
    pub t: u64,
    /// Fraction of samples with `τ >= t`, i.e. `P̂(τ > s)` as `s` rises to `t`.
    pub empirical_survival: f64,
    /// `exp(-μt/2) = P(2·E_μ > t)`.
    pub envelope_survival: f64,
    /// `envelope_survival - empirical_survival`; negative values eat into the band.
    pub margin: f64,
}

/// Empirical check of `τ <=_st 2·E_μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    pub grid: Vec<DominancePoint>,
    /// DKW half-width at level `1 - DKW_ALPHA`.
    pub band: f64,
    /// Grid points where the empirical survival exceeds envelope + band.
    pub violations: usize,
    pub sample_size: usize,
    pub min_margin: f64,
}

/// Compares the empirical survival of integer-valued samples with the
/// envelope `exp(-μt/2)`.
///
/// For integer samples the supremum of `P̂(τ > s) - exp(-μs/2)` over real
/// `s` is approached from the left of each observed value `t`, where the
/// empirical survival is the fraction of samples `>= t` and the envelope
/// tends to `exp(-μt/2)`. Those points form the grid.
pub fn check_dominance(samples: &[u64], mu: f64) -> Result<DominanceReport, BoundError> {
    if samples.is_empty() {
        return Err(BoundError::EmptySamples);
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(BoundError::InvalidRate(mu));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let band = dkw_band(n, DKW_ALPHA);
    let mut grid = Vec::new();
    let mut i = 0;
    while i < n {
        let t = sorted[i];
        let empirical_survival = (n - i) as f64 / n as f64;
        let envelope_survival = libm::exp(-mu * t as f64 / 2.0);
        grid.push(DominancePoint {
            t,
            empirical_survival,
            envelope_survival,
            margin: envelope_survival - empirical_survival,
        });
        while i < n && sorted[i] == t {
            i += 1;
        }
    }
    let violations = grid.iter().filter(|p| p.margin + band < 0.0).count();
    let min_margin = grid.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min);
    Ok(DominanceReport {
        grid,
        band,
        violations,
        sample_size: n,
        min_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn mu_value() {
        let m = mu();
        assert!((m - 1.0528596423332964e-4).abs() / m < 1e-12);
        assert!(m > two_round_success_floor());
        let back = 1.0 - libm::exp(-m);
        assert!((back - two_round_success_floor()).abs() / back < 1e-11);
    }

    #[test]
    fn frugal_bounds_n1() {
        let b = frugal_bounds(1).unwrap();
        assert!((b.e_t_bound - 2.0 / b.mu).abs() < 1e-9);
        assert!((b.var_t_bound - 4.0 / (b.mu * b.mu)).abs() / b.var_t_bound < 1e-15);
        assert_eq!(frugal_bounds(0), Err(BoundError::NonPositiveN(0)));
        assert!(frugal_bounds(11).unwrap().e_t_bound > frugal_bounds(10).unwrap().e_t_bound);
    }

    #[test]
    fn greedy_bound_arithmetic() {
        let c = greedy_constant();
        // n/δ = e makes the log exactly one
        let at_e = greedy_bound(1, libm::exp(-1.0)).unwrap();
        assert!((at_e - c).abs() / c < 1e-14);
        let a = greedy_bound(100, 0.1).unwrap();
        let b = greedy_bound(100, 0.05).unwrap();
        assert!((b - a - c * core::f64::consts::LN_2).abs() / b < 1e-13);
        assert_eq!(greedy_bound(10, 0.0), Err(BoundError::InvalidDelta(0.0)));
        assert_eq!(greedy_bound(10, 1.0), Err(BoundError::InvalidDelta(1.0)));
    }

    #[test]
    fn max_expectation_minimizer() {
        let m = mu();
        let r = max_expectation_bound(1, m).unwrap();
        assert_eq!(r.a_n, 0.0);
        assert!((r.bound - 1.0 / m).abs() < 1e-9);
        for n in [2u64, 10, 1000, 1_000_000] {
            let r = max_expectation_bound(n, m).unwrap();
            let at = max_expectation_objective(r.a_n, n, m);
            assert!((at - r.bound).abs() / r.bound < 1e-12);
            assert!(max_expectation_objective(r.a_n + 1.0, n, m) > at);
            assert!(max_expectation_objective(r.a_n - 1.0, n, m) > at);
            let f = frugal_bounds(n).unwrap();
            assert!((2.0 * r.bound - f.e_t_bound).abs() / f.e_t_bound < 1e-15);
        }
    }

    #[test]
    fn dominance_trivial_cases() {
        let r = check_dominance(&[1; 50], mu()).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.grid.len(), 1);
        assert_eq!(r.grid[0].empirical_survival, 1.0);
        assert_eq!(check_dominance(&[], mu()), Err(BoundError::EmptySamples));
    }

    #[test]
    fn dominance_flags_mass_beyond_envelope() {
        // with μ = 1 the envelope at t = 20 is e^-10, far below 1 - band
        let r = check_dominance(&vec![20; 10_000], 1.0).unwrap();
        assert_eq!(r.violations, 1);
        assert!(r.min_margin < -0.99);
    }

    #[test]
    fn empirical_survival_is_non_increasing() {
        let r = check_dominance(&[5, 1, 3, 3, 9, 1, 2], 0.1).unwrap();
        let ts: Vec<u64> = r.grid.iter().map(|p| p.t).collect();
        assert_eq!(ts, vec![1, 2, 3, 5, 9]);
        assert!(r
            .grid
            .windows(2)
            .all(|w| w[0].empirical_survival >= w[1].empirical_survival));
        assert_eq!(r.grid[2].empirical_survival, 4.0 / 7.0);
    }
}
