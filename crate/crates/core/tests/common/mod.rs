//! Independent reference values for the integration tests.
//!
//! Nothing here calls into the library: the rational oracle redoes the
//! method of steps with exact arithmetic, and the series is the closed form
//! of the single-delay problem with constant history.

#![allow(dead_code)]

use num_rational::Ratio;

pub type Q = Ratio<i128>;

pub fn q(n: i128, d: i128) -> Q {
    Ratio::new(n, d)
}

pub fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Solution of `u'(t) = alpha * sum_i w_i u(t - k_i * unit)` on `t >= 0`
/// with `u = c` for `t <= 0`, every delay an integer multiple of `unit`.
///
/// Piece `n` holds the polynomial on `[n*unit, (n+1)*unit]` in the local
/// variable `s = t - n*unit`.
pub struct RationalSteps {
    unit: Q,
    pieces: Vec<Vec<Q>>,
}

fn peval(p: &[Q], s: Q) -> Q {
    p.iter()
        .rev()
        .fold(Q::from_integer(0), |acc, &c| acc * s + c)
}

impl RationalSteps {
    pub fn new(alpha: Q, atoms: &[(i128, Q)], unit: Q, c: Q, n_pieces: usize) -> Self {
        let zero = Q::from_integer(0);
        let mut pieces: Vec<Vec<Q>> = Vec::with_capacity(n_pieces);
        let mut start = c;
        for n in 0..n_pieces as i128 {
            // rhs(s) = alpha * sum_i w_i u_{n - k_i}(s)
            let mut rhs: Vec<Q> = Vec::new();
            for &(k, w) in atoms {
                assert!(k >= 1, "oracle handles positive delays only");
                let m = n - k;
                let lag: Vec<Q> = if m < 0 {
                    vec![c]
                } else {
                    pieces[m as usize].clone()
                };
                if rhs.len() < lag.len() {
                    rhs.resize(lag.len(), zero);
                }
                for (r, l) in rhs.iter_mut().zip(&lag) {
                    *r += alpha * w * *l;
                }
            }
            let mut piece = vec![start];
            for (j, r) in rhs.iter().enumerate() {
                piece.push(*r / Q::from_integer(j as i128 + 1));
            }
            start = peval(&piece, unit);
            pieces.push(piece);
        }
        Self { unit, pieces }
    }

    /// Value at `t >= 0`; points on a piece boundary use the left piece.
    pub fn eval(&self, t: Q) -> Q {
        if t <= Q::from_integer(0) {
            return peval(&self.pieces[0], Q::from_integer(0));
        }
        let x = t / self.unit;
        let mut n = x.ceil().to_integer() - 1;
        n = n.max(0);
        let n = n as usize;
        assert!(n < self.pieces.len(), "t beyond the solved range");
        peval(&self.pieces[n], t - self.unit * Q::from_integer(n as i128))
    }

    /// Rational coefficients, floating-point Horner; safe for long horizons
    /// where rational powers of `t` would overflow.
    pub fn eval_f64(&self, t: f64) -> f64 {
        let unit = to_f64(self.unit);
        if t <= 0.0 {
            return to_f64(self.pieces[0][0]);
        }
        let n = ((t / unit).ceil() as usize)
            .saturating_sub(1)
            .min(self.pieces.len() - 1);
        let s = t - n as f64 * unit;
        self.pieces[n]
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * s + to_f64(c))
    }
}

/// `v(t) = c * sum_k alpha^k (t - (k-1) delay)_+^k / k!` for `u' = alpha u(t - delay)`,
/// `u = c` on `t <= 0`.
pub fn single_delay_series(alpha: f64, delay: f64, c: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return c;
    }
    let mut sum = 0.0;
    let mut fact = 1.0;
    let mut k = 0usize;
    loop {
        if k > 0 {
            fact *= k as f64;
        }
        let x = t - (k as f64 - 1.0) * delay;
        if x <= 0.0 {
            break;
        }
        sum += alpha.powi(k as i32) * x.powi(k as i32) / fact;
        k += 1;
    }
    c * sum
}

/// Canonical instance: alpha = 1, delays {1, 3} with probability 1/2 each.
pub fn canonical_v_r(t: Q) -> Q {
    let one = Q::from_integer(1);
    let a = RationalSteps::new(one, &[(1, one)], one, one, 8);
    let b = RationalSteps::new(one, &[(3, one)], one, one, 8);
    q(1, 2) * (a.eval(t) + b.eval(t))
}

pub fn canonical_v_d(t: Q) -> Q {
    let one = Q::from_integer(1);
    RationalSteps::new(one, &[(1, q(1, 2)), (3, q(1, 2))], one, one, 8).eval(t)
}

#[test]
fn oracle_self_check() {
    let one = Q::from_integer(1);
    let s = RationalSteps::new(one, &[(1, one)], one, one, 4);
    assert_eq!(s.eval(Q::from_integer(1)), q(2, 1));
    assert_eq!(s.eval(Q::from_integer(2)), q(7, 2));
    assert_eq!(s.eval(Q::from_integer(3)), q(37, 6));
    assert_eq!(canonical_v_r(Q::from_integer(3)), q(61, 12));
    assert_eq!(canonical_v_d(Q::from_integer(3)), q(121, 24));
    for k in 0..=300 {
        let t = q(k, 100);
        let series = single_delay_series(1.0, 1.0, 1.0, to_f64(t));
        assert!((series - s.eval_f64(to_f64(t))).abs() < 1e-12);
    }
}
