//! Transfer matrices of the recurrence and the growth quantities read off
//! them.
//!
//! The one-step matrix at index `j` is
//!
//! ```text
//! A_j = a_j^{-1} [ x0 - b_j   -1 ]
//!                [ a_j^2       0 ],          det A_j = 1,
//! ```
//!
//! and the product `T_n = A_n ... A_1` propagates solutions:
//! `T_n (1, 0)^T = (p_n(x0), a_n p_{n-1}(x0))^T`. The Lyapunov exponent is
//! `gamma = lim n^{-1} log ||T_n||`; norms grow exponentially, so products
//! are carried as a normalized matrix plus a log scale.

use crate::models::JacobiSequence;
use crate::recurrence::OrthoEval;

/// A 2x2 real matrix stored as `exp(log_scale) * m`, with the largest entry
/// of `m` kept at magnitude 1 by renormalization. Unimodular inputs stay
/// unimodular: `det = exp(2 log_scale) det(m)`.
#[derive(Clone, Copy, Debug)]
pub struct Mat2Log {
    m: [[f64; 2]; 2],
    log_scale: f64,
}

impl Mat2Log {
    pub fn identity() -> Self {
        Mat2Log {
            m: [[1.0, 0.0], [0.0, 1.0]],
            log_scale: 0.0,
        }
    }

    /// Wraps a plain matrix, normalizing it into the canonical form.
    pub fn from_matrix(m: [[f64; 2]; 2]) -> Self {
        let mut r = Mat2Log { m, log_scale: 0.0 };
        r.normalize();
        r
    }

    fn normalize(&mut self) {
        let mag = self
            .m
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, &v| acc.max(v.abs()));
        if mag > 0.0 && mag.is_finite() {
            let inv = 1.0 / mag;
            for row in &mut self.m {
                for v in row {
                    *v *= inv;
                }
            }
            self.log_scale += mag.ln();
        }
    }

    /// Normalized entries (true matrix is `exp(log_scale)` times these).
    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.m
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// `self * rhs`, renormalized.
    pub fn mul(&self, rhs: &Mat2Log) -> Mat2Log {
        let a = &self.m;
        let b = &rhs.m;
        let mut r = Mat2Log {
            m: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
            log_scale: self.log_scale + rhs.log_scale,
        };
        r.normalize();
        r
    }

    /// `log |det|` of the true matrix; 0 for a product of unimodular steps,
    /// up to accumulated rounding.
    pub fn log_abs_det(&self) -> f64 {
        let d = self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0];
        d.abs().ln() + 2.0 * self.log_scale
    }

    /// `log` of the Frobenius norm of the true matrix.
    pub fn log_frobenius(&self) -> f64 {
        let s: f64 = self.m.iter().flatten().map(|v| v * v).sum();
        0.5 * s.ln() + self.log_scale
    }

    /// Applies the true matrix to a vector, returning a normalized image and
    /// its log magnitude: the result is `exp(log_mag) * unit`.
    pub fn apply_to_unit(&self, v: [f64; 2]) -> ([f64; 2], f64) {
        let w = [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ];
        let norm = (w[0] * w[0] + w[1] * w[1]).sqrt();
        ([w[0] / norm, w[1] / norm], norm.ln() + self.log_scale)
    }
}

/// One-step transfer matrix for parameters `(a, b)` at spectral point `x0`.
pub fn step_matrix(a: f64, b: f64, x0: f64) -> Mat2Log {
    debug_assert!(a > 0.0, "off-diagonal parameters are positive");
    Mat2Log::from_matrix([[(x0 - b) / a, -1.0 / a], [a, 0.0]])
}

/// Full product `T_n = A_n ... A_1` for the sequence, by streaming left
/// multiplications.
pub fn transfer_product(seq: &JacobiSequence, x0: f64, n: u64) -> Mat2Log {
    let mut t = Mat2Log::identity();
    for j in 1..=n {
        let (a, b) = seq.params_at(j);
        t = step_matrix(a, b, x0).mul(&t);
    }
    t
}

/// `log ||T_n||_F` at each requested checkpoint (ascending), in one pass.
pub fn transfer_log_norms(seq: &JacobiSequence, x0: f64, checkpoints: &[u64]) -> Vec<f64> {
    debug_assert!(checkpoints.windows(2).all(|w| w[0] <= w[1]));
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut t = Mat2Log::identity();
    let mut n = 0u64;
    for &c in checkpoints {
        while n < c {
            n += 1;
            let (a, b) = seq.params_at(n);
            t = step_matrix(a, b, x0).mul(&t);
        }
        out.push(t.log_frobenius());
    }
    out
}

/// Finite-volume Lyapunov estimate with convergence diagnostics. The
/// estimate is reported, never asserted: `half_slope` (the slope of
/// `log ||T||` over the trailing half of the run) and the per-window slopes
/// let the caller judge stabilization.
#[derive(Clone, Debug)]
pub struct LyapunovEstimate {
    pub x0: f64,
    pub n: u64,
    /// `log ||T_n||_F / n`.
    pub gamma: f64,
    /// Slope of `log ||T||` between `n/2` and `n`.
    pub half_slope: f64,
    /// Slopes over `windows` equal segments of the run.
    pub window_slopes: Vec<f64>,
}

/// Estimates the Lyapunov exponent at `x0` from a length-`n` product,
/// recording per-window slopes (8 windows) as a convergence diagnostic.
pub fn lyapunov_estimate(seq: &JacobiSequence, x0: f64, n: u64) -> LyapunovEstimate {
    const WINDOWS: u64 = 8;
    let n = n.max(WINDOWS);
    let mut checkpoints: Vec<u64> = (0..=WINDOWS).map(|w| w * n / WINDOWS).collect();
    checkpoints.dedup();
    let logs = transfer_log_norms(seq, x0, &checkpoints);
    let total = *logs.last().expect("at least one checkpoint");
    let half_idx = checkpoints
        .iter()
        .position(|&c| c >= n / 2)
        .unwrap_or(0);
    let half_slope =
        (total - logs[half_idx]) / ((n - checkpoints[half_idx]).max(1)) as f64;
    let window_slopes = logs
        .windows(2)
        .zip(checkpoints.windows(2))
        .map(|(l, c)| (l[1] - l[0]) / (c[1] - c[0]).max(1) as f64)
        .collect();
    LyapunovEstimate {
        x0,
        n,
        gamma: total / n as f64,
        half_slope,
        window_slopes,
    }
}

/// The subexponential-growth test `min_{n in [N/2, N]} (p_n^2 + p_{n+1}^2)^(1/n)`.
///
/// Values near 1 are consistent with subexponential solutions; a value
/// bounded above 1 certifies exponential growth of the pair norm (the
/// trailing-window minimum guards against lucky dips of a single term).
pub fn growth_test(seq: &JacobiSequence, x0: f64, n: u64) -> f64 {
    let n = n.max(2);
    let mut s = OrthoEval::new();
    let mut min_log: f64 = f64::INFINITY;
    // after j advances the state holds (p_{j-1}, p_j): pair index j - 1
    for j in 1..=(n + 1) {
        s.advance_in(seq, x0);
        let pair = j - 1;
        if pair >= n / 2 && pair >= 1 {
            min_log = min_log.min(s.log_pair_norm() / pair as f64);
        }
    }
    min_log.exp()
}

/// Elliptic/hyperbolic rates of the constant-coefficient comparison problem
/// at `x0`: the rotation angle `theta` with `2 cos theta = x0` when
/// `|x0| <= 2`, and the expansion rate `eta = arccosh |x0|` when `|x0| >= 1`
/// (the rate for plateaus with `a = 1/2` at energies inside `(1, 2)`).
pub fn hyperbolic_rate(x0: f64) -> (Option<f64>, Option<f64>) {
    let theta = if x0.abs() <= 2.0 {
        Some((x0 / 2.0).acos())
    } else {
        None
    };
    let eta = if x0.abs() >= 1.0 {
        Some(x0.abs().acosh())
    } else {
        None
    };
    (theta, eta)
}
