use crate::error::{Error, Result};

/// Shaky Ladder parameters. Everything is derived from `(n, k, beta)`:
///
/// ```text
/// delta   = beta / (k n)
/// epsilon = (ln(k/beta) sqrt(ln(1/delta)) / n)^(3/5)
/// sigma   = sqrt(ln(1/delta)) / (epsilon n)
/// lambda  = 4 ln(4k/beta) sigma
/// ```
///
/// All logarithms are natural.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismParams {
    pub n: usize,
    pub k: usize,
    pub beta: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub sigma: f64,
}

impl MechanismParams {
    /// Whether `n >= ln(4 epsilon / delta) / epsilon^2`, the sample size under
    /// which the generalization transfer is stated.
    pub fn sample_size_sufficient(&self) -> bool {
        self.n as f64 >= self.required_sample_size()
    }

    pub fn required_sample_size(&self) -> f64 {
        (4.0 * self.epsilon / self.delta).ln() / (self.epsilon * self.epsilon)
    }

    /// Threshold `ln(4k/beta) sigma` that the max noise magnitude exceeds with
    /// probability at most `beta`.
    pub fn noise_tail_threshold(&self) -> f64 {
        (4.0 * self.k as f64 / self.beta).ln() * self.sigma
    }
}

pub fn shaky_params(n: usize, k: usize, beta: f64) -> Result<MechanismParams> {
    if n == 0 || k == 0 {
        return Err(Error::invalid("n and k must both be at least 1"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::invalid(format!(
            "beta must lie in (0, 1), got {beta}"
        )));
    }
    let (nf, kf) = (n as f64, k as f64);
    let delta = beta / (kf * nf);
    let log_inv_delta = (1.0 / delta).ln();
    let epsilon = ((kf / beta).ln() * log_inv_delta.sqrt() / nf).powf(0.6);
    let sigma = log_inv_delta.sqrt() / (epsilon * nf);
    let lambda = 4.0 * (4.0 * kf / beta).ln() * sigma;

    if epsilon >= 1.0 / 3.0 {
        return Err(Error::ParameterRegime(format!(
            "epsilon = {epsilon} must be below 1/3 (n = {n}, k = {k}, beta = {beta})"
        )));
    }
    if delta >= epsilon / 4.0 {
        return Err(Error::ParameterRegime(format!(
            "delta = {delta} must be below epsilon/4 = {}",
            epsilon / 4.0
        )));
    }
    let params = MechanismParams {
        n,
        k,
        beta,
        delta,
        epsilon,
        lambda,
        sigma,
    };
    if !params.sample_size_sufficient() {
        log::warn!(
            "n = {n} is below ln(4 epsilon/delta)/epsilon^2 = {:.1}; the generalization bound does not formally apply",
            params.required_sample_size()
        );
    }
    Ok(params)
}
