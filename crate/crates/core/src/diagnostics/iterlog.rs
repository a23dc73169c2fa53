use crate::error::{Result, VexError};

/// The tower `e_0 = 1`, `e_{k+1} = exp(e_k)`. `e_k` is `+∞` for `k >= 4`.
pub fn iterated_exp(k: u32) -> f64 {
    (0..k).fold(1.0, |acc, _| acc.exp())
}

/// `log_k x` with `log_0 x = x`, defined for `x > e_k`.
pub fn iterated_log(k: u32, x: f64) -> Result<f64> {
    let lower = iterated_exp(k);
    if !(x > lower) {
        return Err(VexError::DomainError { what: format!("log_{k}"), x, lower });
    }
    Ok(iterated_log_unchecked(k, x))
}

fn iterated_log_unchecked(k: u32, x: f64) -> f64 {
    (0..k).fold(x, |acc, _| acc.ln())
}

/// `b_{k,α}(x) = -(1/α) d/dx (log_k x)^{-α}` in closed form:
/// `(log_k x)^{-α-1} / ∏_{j<k} log_j x`, for `x >= e_k`.
pub fn b_weight(k: u32, alpha: f64, x: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(VexError::BadParameter(format!("α must be positive, got {alpha}")));
    }
    let lower = iterated_exp(k);
    if !(x >= lower) || !x.is_finite() {
        return Err(VexError::DomainError { what: format!("b_{{{k},α}}"), x, lower });
    }
    let mut logs = x;
    let mut product = 1.0;
    for _ in 0..k {
        product *= logs;
        logs = logs.ln();
    }
    Ok(logs.powf(-alpha - 1.0) / product)
}
