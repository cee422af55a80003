//! Poisson demand distribution evaluated in log space.

use std::sync::OnceLock;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Number of log-factorials cached by default.
pub const DEFAULT_LOG_FACTORIAL_CAP: usize = 10_000;

// Terms below this fraction of the running sum are under half an ulp and
// cannot change it, so stopping there leaves the sum bit-for-bit unchanged.
const NEGLIGIBLE: f64 = 1e-17;

/// Relative term size at which reciprocal-tail series are truncated.
pub const TAIL_TRUNCATION: f64 = 1e-16;

/// Cache of `ln k!` for `k <= cap`; larger arguments fall back to `ln Γ(k + 1)`.
#[derive(Debug, Clone)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn with_cap(cap: usize) -> Self {
        let mut table = Vec::with_capacity(cap + 1);
        table.push(0.0);
        table.extend((1..=cap).map(|k| ln_gamma(k as f64 + 1.0)));
        Self { table }
    }

    pub fn cap(&self) -> usize {
        self.table.len() - 1
    }

    pub fn ln_factorial(&self, k: u64) -> f64 {
        match self.table.get(k as usize) {
            Some(&v) => v,
            None => ln_gamma(k as f64 + 1.0),
        }
    }
}

fn default_log_factorials() -> &'static LogFactorials {
    static TABLE: OnceLock<LogFactorials> = OnceLock::new();
    TABLE.get_or_init(|| LogFactorials::with_cap(DEFAULT_LOG_FACTORIAL_CAP))
}

/// Poisson(λ) with λ > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poisson {
    lambda: f64,
    ln_lambda: f64,
}

/// Exact and approximated reciprocal tails `Σ_{k ≥ q} pmf(k)/k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReciprocalTail {
    /// `Σ_{k ≥ max(q, 1)} pmf(k) / k`.
    pub exact: f64,
    /// `P(D ≥ q) / λ`, the 1/k → 1/(k+1) substitution with the shifted index.
    pub approx: f64,
}

impl ReciprocalTail {
    pub fn gap(&self) -> f64 {
        self.approx - self.exact
    }
}

impl Poisson {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::Domain(format!(
                "Poisson rate must be finite and positive, got {lambda}"
            )));
        }
        Ok(Self {
            lambda,
            ln_lambda: lambda.ln(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn ln_pmf(&self, k: u64) -> f64 {
        self.ln_pmf_with(k, default_log_factorials())
    }

    pub fn ln_pmf_with(&self, k: u64, table: &LogFactorials) -> f64 {
        k as f64 * self.ln_lambda - self.lambda - table.ln_factorial(k)
    }

    pub fn pmf(&self, k: u64) -> f64 {
        self.ln_pmf(k).exp()
    }

    /// First index whose pmf can be nonzero in double precision. Everything
    /// left of it underflows, so skipping it does not change any sum.
    fn first_significant(&self) -> u64 {
        let cut = self.lambda - 40.0 * self.lambda.sqrt() - 40.0;
        if cut > 0.0 {
            cut.floor() as u64
        } else {
            0
        }
    }

    /// Running `(k, pmf(k), cdf(k))` in increasing `k`. Both `cdf` and
    /// `quantile` read from this so that they agree to the bit.
    fn running_cdf(&self) -> impl Iterator<Item = (u64, f64, f64)> + '_ {
        let start = self.first_significant();
        let mut sum = 0.0;
        (start..).map(move |k| {
            let p = self.pmf(k);
            sum += p;
            (k, p, sum)
        })
    }

    fn is_negligible(&self, k: u64, term: f64, sum: f64) -> bool {
        k as f64 > self.lambda && term <= NEGLIGIBLE * sum
    }

    /// `P(D ≤ k)` as the running pmf sum, capped at 1 against rounding drift.
    pub fn cdf(&self, k: u64) -> f64 {
        if k < self.first_significant() {
            return 0.0;
        }
        let mut last = 0.0;
        for (j, p, sum) in self.running_cdf() {
            last = sum;
            if j >= k || self.is_negligible(j, p, sum) {
                break;
            }
        }
        last.min(1.0)
    }

    /// `P(D > k)` summed directly over the upper tail.
    pub fn sf(&self, k: u64) -> f64 {
        let start = k.saturating_add(1).max(self.first_significant());
        let mut sum = 0.0;
        for j in start.. {
            let p = self.pmf(j);
            sum += p;
            if self.is_negligible(j, p, sum) || (p == 0.0 && j as f64 > self.lambda) {
                break;
            }
        }
        sum
    }

    /// Smallest `k` with `cdf(k) ≥ p`.
    pub fn quantile(&self, p: f64) -> Result<u64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Domain(format!(
                "quantile probability must lie in [0, 1), got {p}"
            )));
        }
        if p == 0.0 {
            return Ok(0);
        }
        let mut answer = 0;
        for (k, pmf, sum) in self.running_cdf() {
            answer = k;
            // The second condition fires only when p sits within rounding of 1.
            if sum >= p || self.is_negligible(k, pmf, sum) {
                break;
            }
        }
        Ok(answer)
    }

    /// `Σ_{k ≥ q} e^{−λ} λ^{k+1} / (k+1)!`, summed term by term.
    pub fn shifted_tail(&self, q: u64) -> f64 {
        self.sf(q)
    }

    /// Reciprocal tail `Σ_{k ≥ q} pmf(k)/k` next to its `P(D ≥ q)/λ` approximation.
    pub fn reciprocal_tail(&self, q: u64) -> ReciprocalTail {
        let exact = self.reciprocal_tail_exact(q);
        let upper = if q == 0 { 1.0 } else { self.sf(q - 1) };
        ReciprocalTail {
            exact,
            approx: upper / self.lambda,
        }
    }

    /// `Σ_{k ≥ max(q, 1)} pmf(k)/k`, truncated once terms past the mode drop
    /// below `TAIL_TRUNCATION` of the running sum.
    pub fn reciprocal_tail_exact(&self, q: u64) -> f64 {
        let start = q.max(1).max(self.first_significant());
        let mut sum = 0.0;
        for k in start.. {
            let term = self.pmf(k) / k as f64;
            sum += term;
            if k as f64 > self.lambda && (term <= TAIL_TRUNCATION * sum || term == 0.0) {
                break;
            }
        }
        sum
    }

    /// `E[min(q, D) / D]` with a zero-demand week counted as fully served.
    pub fn expected_fill_rate(&self, q: f64) -> f64 {
        if q <= 0.0 {
            return self.pmf(0);
        }
        let whole = q.floor() as u64;
        // k = 0..=floor(q) are fully served, including the D = 0 convention.
        self.cdf(whole) + q * self.reciprocal_tail_exact(whole + 1)
    }
}

/// `e^{−λ} λ^k / k!`.
pub fn poisson_pmf(k: u64, lambda: f64) -> Result<f64> {
    Ok(Poisson::new(lambda)?.pmf(k))
}

/// `Σ_{j ≤ k} pmf(j)`.
pub fn poisson_cdf(k: u64, lambda: f64) -> Result<f64> {
    Ok(Poisson::new(lambda)?.cdf(k))
}

/// Generalized inverse `min{k : F(k) ≥ p}`.
pub fn poisson_quantile(p: f64, lambda: f64) -> Result<u64> {
    Poisson::new(lambda)?.quantile(p)
}

pub fn poisson_reciprocal_tail(q: u64, lambda: f64) -> Result<ReciprocalTail> {
    Ok(Poisson::new(lambda)?.reciprocal_tail(q))
}
