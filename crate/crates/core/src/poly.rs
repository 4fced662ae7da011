//! Dense univariate polynomials stored as ascending coefficient lists.

/// `coeffs[k]` multiplies `s^k`.
pub type Coeffs = Vec<f64>;

/// Horner evaluation.
pub fn eval(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * s + a)
}

pub fn derivative(c: &[f64]) -> Coeffs {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| k as f64 * a)
        .collect()
}

/// Antiderivative with the given constant term.
pub fn antiderivative(c: &[f64], constant: f64) -> Coeffs {
    let mut out = Vec::with_capacity(c.len() + 1);
    out.push(constant);
    out.extend(c.iter().enumerate().map(|(k, &a)| a / (k as f64 + 1.0)));
    out
}

/// Returns the coefficients of `q(s) = p(s + shift)`.
///
/// Repeated synthetic division, `O(d^2)`.
pub fn taylor_shift(c: &[f64], shift: f64) -> Coeffs {
    let mut out = c.to_vec();
    if shift == 0.0 {
        return out;
    }
    let n = out.len();
    for i in 0..n {
        for k in (i..n.saturating_sub(1)).rev() {
            out[k] += shift * out[k + 1];
        }
    }
    out
}

/// `acc += scale * c`, growing `acc` as needed.
pub fn axpy(acc: &mut Coeffs, scale: f64, c: &[f64]) {
    if acc.len() < c.len() {
        acc.resize(c.len(), 0.0);
    }
    for (a, &b) in acc.iter_mut().zip(c) {
        *a += scale * b;
    }
}

/// Degree ignoring trailing exact zeros; the zero polynomial has degree 0.
pub fn degree(c: &[f64]) -> usize {
    c.iter().rposition(|&a| a != 0.0).unwrap_or(0)
}
