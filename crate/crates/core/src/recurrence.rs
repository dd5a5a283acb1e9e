//! Streaming evaluation of the orthonormal polynomials `p_n(x)` of a Jacobi
//! parameter sequence, and the kernel quantities built from them.
//!
//! The three-term recurrence
//!
//! ```text
//! x p_n(x) = a_{n+1} p_{n+1}(x) + b_{n+1} p_n(x) + a_n p_{n-1}(x),
//! p_{-1} = 0,  p_0 = 1,
//! ```
//!
//! drives everything here: the diagonal Christoffel--Darboux (CD) kernel
//! `K_n(x, y) = sum_{j<=n} p_j(x) p_j(y)`, the Christoffel function
//! `lambda_n = 1 / K_n(x0, x0)`, the normalized kernel ("eta") measures
//! `d eta_n = |K_n(x, x0)|^2 d rho(x) / K_n(x0, x0)`, and the ratio
//! `r_n = p_n(x0)^2 / K_n(x0, x0)` whose decay to zero is the Nevai
//! condition at `x0`.
//!
//! Solutions can grow exponentially, so the stream stores `p` values times
//! `exp(-log_scale)` and renormalizes whenever the stored pair leaves
//! `[1e-6, 1e6]`; every derived ratio is formed at matching scales.

use crate::error::{Error, Result};
use crate::models::JacobiSequence;

const RESCALE_LO: f64 = 1e-6;
const RESCALE_HI: f64 = 1e6;

/// Streaming state of the polynomial recurrence at a fixed real point.
///
/// After `n` calls to [`OrthoEval::advance`] the state holds scaled versions
/// of `p_{n-1}(x0)` and `p_n(x0)` together with the kernel diagonal
/// `K_n(x0, x0)`; true values are the stored ones times `exp(log_scale)`
/// (`exp(2 log_scale)` for the kernel).
#[derive(Clone, Debug)]
pub struct OrthoEval {
    n: u64,
    p_prev: f64,
    p_cur: f64,
    kernel: f64,
    log_scale: f64,
    rescale: bool,
}

impl OrthoEval {
    /// Fresh state at index 0: `p_{-1} = 0`, `p_0 = 1`, `K_0 = 1`.
    pub fn new() -> Self {
        OrthoEval {
            n: 0,
            p_prev: 0.0,
            p_cur: 1.0,
            kernel: 1.0,
            log_scale: 0.0,
            rescale: true,
        }
    }

    /// Like [`OrthoEval::new`] but with rescaling disabled, so stored values
    /// are the polynomials themselves (usable while they stay in range).
    pub fn new_unscaled() -> Self {
        OrthoEval {
            rescale: false,
            ..OrthoEval::new()
        }
    }

    /// One recurrence step: consumes `a_n`, `a_{n+1}`, `b_{n+1}` and moves
    /// the state from index `n` to `n + 1`. The `a_n` coefficient multiplies
    /// `p_{n-1}`, whose value is zero at the first step, so any positive
    /// placeholder works there.
    pub fn advance(&mut self, a_n: f64, a_next: f64, b_next: f64, x0: f64) {
        let p_next = ((x0 - b_next) * self.p_cur - a_n * self.p_prev) / a_next;
        self.p_prev = self.p_cur;
        self.p_cur = p_next;
        self.kernel += p_next * p_next;
        self.n += 1;
        if self.rescale {
            let s = self.p_prev * self.p_prev + self.p_cur * self.p_cur;
            if (s < RESCALE_LO || s > RESCALE_HI) && s > 0.0 && s.is_finite() {
                let c = 1.0 / s.sqrt();
                // growing the stored values also grows the stored kernel;
                // skip the renormalization if that would overflow (the true
                // kernel is then dominated by early terms anyway)
                if c <= 1.0 || self.kernel * c * c < 1e290 {
                    self.p_prev *= c;
                    self.p_cur *= c;
                    self.kernel *= c * c;
                    self.log_scale += 0.5 * s.ln();
                }
            }
        }
    }

    /// One step with parameters taken from `seq` at the state's own index.
    pub fn advance_in(&mut self, seq: &JacobiSequence, x0: f64) {
        let n = self.n;
        let a_n = if n == 0 { 1.0 } else { seq.a_at(n) };
        let (a_next, b_next) = seq.params_at(n + 1);
        self.advance(a_n, a_next, b_next, x0);
    }

    /// Current index `n`.
    pub fn index(&self) -> u64 {
        self.n
    }

    /// Stored (scaled) `p_n(x0)`.
    pub fn p_scaled(&self) -> f64 {
        self.p_cur
    }

    /// Stored (scaled) `p_{n-1}(x0)`.
    pub fn p_prev_scaled(&self) -> f64 {
        self.p_prev
    }

    /// Scale exponent: true values are stored values times `exp(log_scale)`.
    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// True `p_n(x0)`; overflows to infinity when the scale exceeds f64
    /// range (use the scaled accessors in that regime).
    pub fn p(&self) -> f64 {
        self.p_cur * self.log_scale.exp()
    }

    /// Stored (scaled) kernel diagonal `K_n(x0, x0)`.
    pub fn kernel_scaled(&self) -> f64 {
        self.kernel
    }

    /// True kernel diagonal `K_n(x0, x0)` (may overflow; see [`OrthoEval::log_kernel`]).
    pub fn kernel(&self) -> f64 {
        self.kernel * (2.0 * self.log_scale).exp()
    }

    /// `ln K_n(x0, x0)`, overflow-safe.
    pub fn log_kernel(&self) -> f64 {
        self.kernel.ln() + 2.0 * self.log_scale
    }

    /// The ratio `r_n = p_n(x0)^2 / K_n(x0, x0)`; scale-free, always in
    /// `[0, 1]`. The Nevai condition at `x0` is `r_n -> 0`.
    pub fn nevai_ratio(&self) -> f64 {
        self.p_cur * self.p_cur / self.kernel
    }

    /// `ln(p_{n-1}^2 + p_n^2)`, overflow-safe.
    pub fn log_pair_norm(&self) -> f64 {
        (self.p_prev * self.p_prev + self.p_cur * self.p_cur).ln() + 2.0 * self.log_scale
    }
}

impl Default for OrthoEval {
    fn default() -> Self {
        OrthoEval::new()
    }
}

/// CD kernel `K_n(x, y) = sum_{j<=n} p_j(x) p_j(y)` by direct summation of
/// two synchronized recurrence streams (no rescaling: the partial sum is
/// exact as long as the products stay in f64 range).
pub fn cd_kernel_direct(seq: &JacobiSequence, x: f64, y: f64, n: u64) -> f64 {
    let mut sx = OrthoEval::new_unscaled();
    let mut sy = OrthoEval::new_unscaled();
    let mut sum = sx.p_scaled() * sy.p_scaled();
    for _ in 0..n {
        sx.advance_in(seq, x);
        sy.advance_in(seq, y);
        sum += sx.p_scaled() * sy.p_scaled();
    }
    sum
}

/// Scale of the CD kernel summation at `(x, y, n)`: the sum of the absolute
/// products `|p_j(x) p_j(y)|`. Agreement between the two kernel routes is
/// meaningful relative to this, not to the (possibly cancelled) sum itself.
pub fn cd_kernel_scale(seq: &JacobiSequence, x: f64, y: f64, n: u64) -> f64 {
    let mut sx = OrthoEval::new_unscaled();
    let mut sy = OrthoEval::new_unscaled();
    let mut sum = (sx.p_scaled() * sy.p_scaled()).abs();
    for _ in 0..n {
        sx.advance_in(seq, x);
        sy.advance_in(seq, y);
        sum += (sx.p_scaled() * sy.p_scaled()).abs();
    }
    sum
}

/// CD kernel via the Christoffel--Darboux formula
/// `K_n(x, y) = a_{n+1} [p_{n+1}(x) p_n(y) - p_n(x) p_{n+1}(y)] / (x - y)`.
///
/// Near-coincident arguments are rejected: the divided difference loses all
/// precision once `|x - y|` is at rounding scale.
pub fn cd_kernel_formula(seq: &JacobiSequence, x: f64, y: f64, n: u64) -> Result<f64> {
    if (x - y).abs() < 1e-12 * x.abs().max(y.abs()).max(1.0) {
        return Err(Error::Degenerate(format!(
            "cd_kernel_formula needs separated arguments, got x = {x}, y = {y}"
        )));
    }
    let mut sx = OrthoEval::new_unscaled();
    let mut sy = OrthoEval::new_unscaled();
    for _ in 0..=n {
        sx.advance_in(seq, x);
        sy.advance_in(seq, y);
    }
    // states now hold (p_n, p_{n+1}) at each point
    let a_next = seq.a_at(n + 1);
    let num = sx.p_scaled() * sy.p_prev_scaled() - sx.p_prev_scaled() * sy.p_scaled();
    Ok(a_next * num / (x - y))
}

/// Christoffel function `lambda_n(x0) = 1 / K_n(x0, x0)`, overflow-safe.
pub fn christoffel(seq: &JacobiSequence, x0: f64, n: u64) -> f64 {
    let mut s = OrthoEval::new();
    for _ in 0..n {
        s.advance_in(seq, x0);
    }
    (-s.log_kernel()).exp()
}

/// Christoffel function by its variational characterization:
/// `lambda_n(x0) = min { integral Q^2 d rho : deg Q <= n, Q(x0) = 1 }`.
///
/// Independent of the recurrence stream: builds the Krylov columns
/// `v_j = (J - x0)^j delta_1` on an `(n+2)`-truncation — whose Gram matrix
/// is exactly the Hankel matrix of the measure's central moments about `x0`
/// — and reads the minimum as the squared distance from `v_0` to the span
/// of `v_1, ..., v_n` via Householder QR.
///
/// Fails with a conditioning error once the triangular factor indicates more
/// than six decimal digits of loss (in practice around `n = 12`).
pub fn christoffel_via_moments(seq: &JacobiSequence, x0: f64, n: u64) -> Result<f64> {
    let n = n as usize;
    let dim = n + 2;
    let a: Vec<f64> = (1..=dim as u64).map(|i| seq.a_at(i)).collect();
    let b: Vec<f64> = (1..=dim as u64).map(|i| seq.b_at(i)).collect();

    // Krylov columns; the minimization target v_0 = delta_1 goes last.
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut v = vec![0.0; dim];
    v[0] = 1.0;
    for _ in 0..n {
        let mut w = vec![0.0; dim];
        for i in 0..dim {
            let mut acc = (b[i] - x0) * v[i];
            if i > 0 {
                acc += a[i - 1] * v[i - 1];
            }
            if i + 1 < dim {
                acc += a[i] * v[i + 1];
            }
            w[i] = acc;
        }
        cols.push(w.clone());
        v = w;
    }
    let mut target = vec![0.0; dim];
    target[0] = 1.0;
    cols.push(target);

    // Householder QR over the first n columns; track the triangular diagonal
    // for the digit-loss gate, then read the residual off the last column.
    let mut diag_max: f64 = 0.0;
    let mut diag_min = f64::INFINITY;
    for k in 0..n {
        let (head, tail) = cols.split_at_mut(k + 1);
        let col = &mut head[k];
        let norm = {
            let mut s = 0.0;
            for i in k..dim {
                s += col[i] * col[i];
            }
            s.sqrt()
        };
        if norm == 0.0 {
            return Err(Error::Conditioning(format!(
                "Krylov column {k} vanished; moment matrix is singular"
            )));
        }
        diag_max = diag_max.max(norm);
        diag_min = diag_min.min(norm);
        let alpha = if col[k] >= 0.0 { -norm } else { norm };
        let mut u = vec![0.0; dim];
        for i in k..dim {
            u[i] = col[i];
        }
        u[k] -= alpha;
        let unorm2: f64 = u[k..].iter().map(|t| t * t).sum();
        if unorm2 > 0.0 {
            for other in tail.iter_mut() {
                let proj: f64 = (k..dim).map(|i| u[i] * other[i]).sum();
                let f = 2.0 * proj / unorm2;
                for i in k..dim {
                    other[i] -= f * u[i];
                }
            }
        }
        col[k] = alpha;
        for i in (k + 1)..dim {
            col[i] = 0.0;
        }
    }
    if n > 0 {
        let digits_lost = (diag_max / diag_min).log10();
        if digits_lost > 6.0 {
            return Err(Error::Conditioning(format!(
                "moment matrix solve would lose {digits_lost:.1} decimal digits (limit 6)"
            )));
        }
    }
    let last = &cols[n];
    let mut resid2 = 0.0;
    for &t in &last[n..] {
        resid2 += t * t;
    }
    Ok(resid2)
}

/// First and second moments of the normalized kernel measure
/// `d eta_n^{(x0)} = |K_n(x, x0)|^2 d rho(x) / K_n(x0, x0)` about `x0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaMoments {
    pub n: u64,
    pub x0: f64,
    /// `integral (x - x0) d eta = -a_{n+1} p_n p_{n+1} / K_n` (from the CD
    /// formula and orthogonality).
    pub first: f64,
    /// `integral (x - x0)^2 d eta = a_{n+1}^2 (p_n^2 + p_{n+1}^2) / K_n`.
    pub second: f64,
}

/// Closed-form eta-measure moments about `x0`. All ratios are formed at a
/// common scale, so growing solutions are handled.
pub fn eta_moments(seq: &JacobiSequence, x0: f64, n: u64) -> EtaMoments {
    let mut s = OrthoEval::new();
    for _ in 0..=n {
        s.advance_in(seq, x0);
    }
    // state holds scaled (p_n, p_{n+1}) and scaled K_{n+1}; the kernel at n
    // is K_{n+1} - p_{n+1}^2 at the same scale
    let p_n = s.p_prev_scaled();
    let p_next = s.p_scaled();
    let kernel_n = s.kernel_scaled() - p_next * p_next;
    let a_next = seq.a_at(n + 1);
    EtaMoments {
        n,
        x0,
        first: -a_next * p_n * p_next / kernel_n,
        second: a_next * a_next * (p_n * p_n + p_next * p_next) / kernel_n,
    }
}

/// Raw `k`-th moment `integral x^k d eta_n^{(x0)}` computed in the operator
/// picture: the kernel's coefficient vector `v = (p_0, ..., p_n) / sqrt(K_n)`
/// is pushed through `k` applications of the Jacobi matrix on an
/// `(n + k + 1)`-truncation. `k = 0` is 1 by normalization.
pub fn eta_moment(seq: &JacobiSequence, x0: f64, n: u64, k: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let v = kernel_coefficient_vector(seq, x0, n, k as usize);
    let dim = v.len();
    let a: Vec<f64> = (1..=dim as u64).map(|i| seq.a_at(i)).collect();
    let b: Vec<f64> = (1..=dim as u64).map(|i| seq.b_at(i)).collect();
    let mut u = v.clone();
    for _ in 0..k {
        let mut w = vec![0.0; dim];
        for i in 0..dim {
            let mut acc = b[i] * u[i];
            if i > 0 {
                acc += a[i - 1] * u[i - 1];
            }
            if i + 1 < dim {
                acc += a[i] * u[i + 1];
            }
            w[i] = acc;
        }
        u = w;
    }
    v.iter().zip(&u).map(|(x, y)| x * y).sum()
}

/// Unit coefficient vector of `K_n(., x0)` in the orthonormal basis, padded
/// with `extra` zeros: entries `p_j(x0) / sqrt(K_n)`, `j = 0..=n`. Collected
/// at a common scale, so early entries of rapidly growing solutions
/// underflow to zero harmlessly (they are that small relative to the norm).
fn kernel_coefficient_vector(seq: &JacobiSequence, x0: f64, n: u64, extra: usize) -> Vec<f64> {
    let mut s = OrthoEval::new();
    let mut stored = Vec::with_capacity(n as usize + 1);
    let mut scales = Vec::with_capacity(n as usize + 1);
    stored.push(s.p_scaled());
    scales.push(s.log_scale());
    for _ in 0..n {
        s.advance_in(seq, x0);
        stored.push(s.p_scaled());
        scales.push(s.log_scale());
    }
    let final_scale = s.log_scale();
    let mut v: Vec<f64> = stored
        .iter()
        .zip(&scales)
        .map(|(&p, &sc)| p * (sc - final_scale).exp())
        .collect();
    let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
    for t in &mut v {
        *t /= norm;
    }
    v.extend(std::iter::repeat(0.0).take(extra + 1));
    v
}

/// The sequence `r_n = p_n(x0)^2 / K_n(x0, x0)` for `n = 0..=n_max`.
pub fn nevai_ratio_stream(seq: &JacobiSequence, x0: f64, n_max: u64) -> Vec<f64> {
    let mut s = OrthoEval::new();
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(s.nevai_ratio());
    for _ in 0..n_max {
        s.advance_in(seq, x0);
        out.push(s.nevai_ratio());
    }
    out
}

/// The five ratio sequences whose convergence to `(0, 1, 0, 0, 0)` is
/// equivalent for non-negative `c` with divergent partial sums `S_n`:
/// `c_n/S_n`, `S_n/S_{n+1}`, `c_{n+1}/S_n`, `(c_n + c_{n+1})/S_n`,
/// `(c_{n-1} + c_n)/S_n`. (The equivalence can fail without the sum
/// structure: `c_n = exp(n^2)` has `c_n/S_n -> 1` yet `c_{n-1}/S_n -> 0`.)
#[derive(Clone, Debug, PartialEq)]
pub struct RatioPanel {
    pub current_over_sum: Vec<f64>,
    pub sum_over_next_sum: Vec<f64>,
    pub next_over_sum: Vec<f64>,
    pub adjacent_over_sum: Vec<f64>,
    pub trailing_over_sum: Vec<f64>,
}

/// Computes the ratio panel for `n = 0..c.len()-2` (the last index needs
/// `c_{n+1}`); `c_{-1}` is taken as zero. Requires `c_0 > 0` and `c_n >= 0`.
pub fn ratio_panel(c: &[f64]) -> Result<RatioPanel> {
    if c.len() < 2 {
        return Err(Error::invalid("ratio panel needs at least two terms"));
    }
    if !(c[0] > 0.0) {
        return Err(Error::invalid("ratio panel requires c_0 > 0"));
    }
    if c.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::invalid("ratio panel requires finite c_n >= 0"));
    }
    let rows = c.len() - 1;
    let mut panel = RatioPanel {
        current_over_sum: Vec::with_capacity(rows),
        sum_over_next_sum: Vec::with_capacity(rows),
        next_over_sum: Vec::with_capacity(rows),
        adjacent_over_sum: Vec::with_capacity(rows),
        trailing_over_sum: Vec::with_capacity(rows),
    };
    let mut sum = 0.0;
    for n in 0..rows {
        sum += c[n];
        let prev = if n == 0 { 0.0 } else { c[n - 1] };
        panel.current_over_sum.push(c[n] / sum);
        panel.sum_over_next_sum.push(sum / (sum + c[n + 1]));
        panel.next_over_sum.push(c[n + 1] / sum);
        panel.adjacent_over_sum.push((c[n] + c[n + 1]) / sum);
        panel.trailing_over_sum.push((prev + c[n]) / sum);
    }
    Ok(panel)
}

/// Cesàro comparison sequence `a_n / (n C_n)` with `C_n = (1/n) sum_{j<=n} a_j`
/// (1-based), i.e. `a_n` over the running total. Errors at the first index
/// whose running mean vanishes.
pub fn cesaro_ratio(a: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(a.len());
    let mut total = 0.0;
    for (i, &v) in a.iter().enumerate() {
        total += v;
        if total == 0.0 {
            return Err(Error::Degenerate(format!(
                "running mean C_n vanishes at n = {}",
                i + 1
            )));
        }
        out.push(v / total);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Decay, JacobiSequence, PlateauGrowth};
    use proptest::prelude::*;

    fn stream_to(seq: &JacobiSequence, x0: f64, n: u64) -> OrthoEval {
        let mut s = OrthoEval::new();
        for _ in 0..n {
            s.advance_in(seq, x0);
        }
        s
    }

    #[test]
    fn free_model_at_zero_cycles_with_period_four() {
        // p_{n+1}(0) = -p_{n-1}(0): values 1, 0, -1, 0, 1, ...
        let seq = JacobiSequence::free();
        let mut s = OrthoEval::new_unscaled();
        let expected = [1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0];
        for (n, &want) in expected.iter().enumerate() {
            assert_eq!(s.p_scaled(), want, "p_{n}(0)");
            s.advance_in(&seq, 0.0);
        }
    }

    #[test]
    fn free_model_at_two_grows_linearly() {
        // p_{n+1}(2) = 2 p_n - p_{n-1} gives p_n(2) = n + 1
        let seq = JacobiSequence::free();
        let mut s = OrthoEval::new_unscaled();
        for n in 0..50u64 {
            assert_eq!(s.p_scaled(), (n + 1) as f64);
            s.advance_in(&seq, 2.0);
        }
    }

    #[test]
    fn kernel_diagonal_accumulates_squares() {
        let seq = JacobiSequence::free();
        let s = stream_to(&seq, 0.0, 4);
        // K_4(0,0) = 1 + 0 + 1 + 0 + 1 = 3
        assert!((s.kernel() - 3.0).abs() < 1e-15);
        assert!((christoffel(&seq, 0.0, 4) - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.nevai_ratio() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rescaling_tracks_true_values() {
        // hyperbolic point: p_n(5/2) grows like 2^n; compare scaled state
        // against the unscaled stream while the latter is in range
        let seq = JacobiSequence::free();
        let mut scaled = OrthoEval::new();
        let mut plain = OrthoEval::new_unscaled();
        for _ in 0..600 {
            scaled.advance_in(&seq, 2.5);
            plain.advance_in(&seq, 2.5);
            if plain.p_scaled().abs() < 1e300 {
                let relative = (scaled.p() - plain.p_scaled()).abs()
                    / plain.p_scaled().abs().max(1e-300);
                assert!(relative < 1e-9, "scale drift at n = {}", scaled.index());
            }
            let stored = scaled.p_scaled().powi(2) + scaled.p_prev_scaled().powi(2);
            assert!((1e-6..=1e6).contains(&stored));
        }
        // r_n -> 1 - 1/4 for the dominant-root growth at x0 = 5/2
        let r = scaled.nevai_ratio();
        assert!((r - 0.75).abs() < 1e-3, "r = {r}");
    }

    #[test]
    fn cd_direct_small_cases() {
        let seq = JacobiSequence::free();
        // K_1(x, y) = 1 + x y
        assert!((cd_kernel_direct(&seq, 0.3, -1.1, 1) - (1.0 + 0.3 * -1.1)).abs() < 1e-15);
        // p(0) = 1, 0, -1; p(2) = 1, 2, 3 -> K_2(0, 2) = 1 - 3 = -2
        assert!((cd_kernel_direct(&seq, 0.0, 2.0, 2) + 2.0).abs() < 1e-15);
    }

    #[test]
    fn cd_formula_matches_direct_and_rejects_coincident_points() {
        let seq = JacobiSequence::free();
        let k = cd_kernel_formula(&seq, 0.0, 1.0, 1).unwrap();
        assert!((k - 1.0).abs() < 1e-15); // 1 + 0*1
        assert!(matches!(
            cd_kernel_formula(&seq, 0.7, 0.7 + 1e-15, 5),
            Err(Error::Degenerate(_))
        ));
        for n in [1u64, 5, 20, 100] {
            let direct = cd_kernel_direct(&seq, 0.4, -0.9, n);
            let formula = cd_kernel_formula(&seq, 0.4, -0.9, n).unwrap();
            assert!((direct - formula).abs() < 1e-10 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn christoffel_variational_route_agrees() {
        let seq = JacobiSequence::free();
        for &x0 in &[0.0, 0.5, 1.5] {
            for n in 0..=10u64 {
                let direct = christoffel(&seq, x0, n);
                let oracle = christoffel_via_moments(&seq, x0, n).unwrap();
                assert!(
                    (direct - oracle).abs() < 1e-8 * direct,
                    "n = {n}, x0 = {x0}: {direct} vs {oracle}"
                );
            }
        }
        // richer model, same identity
        let seq = JacobiSequence::periodic(vec![1.0, 0.6], vec![0.2, -0.3], None).unwrap();
        for n in 0..=8u64 {
            let direct = christoffel(&seq, 0.4, n);
            let oracle = christoffel_via_moments(&seq, 0.4, n).unwrap();
            assert!((direct - oracle).abs() < 1e-8 * direct);
        }
    }

    #[test]
    fn christoffel_oracle_flags_conditioning_past_limit() {
        // inside the essential spectrum the triangular diagonal stays flat
        // and every accepted value must be accurate
        let seq = JacobiSequence::free();
        for n in 0..=16u64 {
            let v = christoffel_via_moments(&seq, 0.5, n).unwrap();
            let direct = christoffel(&seq, 0.5, n);
            assert!(
                (v - direct).abs() < 1e-7 * direct,
                "accepted value must be good at n = {n}"
            );
        }
        // nearly parallel Krylov columns (coupling 1e-4, probe far outside
        // the spectrum) must trip the six-digit gate rather than return junk
        let tiny = JacobiSequence::constant(1e-4, 0.0).unwrap();
        let mut tripped = false;
        for n in 0..=6u64 {
            match christoffel_via_moments(&tiny, 0.5, n) {
                Ok(v) => {
                    let direct = christoffel(&tiny, 0.5, n);
                    assert!((v - direct).abs() < 1e-7 * direct);
                }
                Err(Error::Conditioning(_)) => {
                    tripped = true;
                    break;
                }
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(tripped, "digit-loss gate never fired by n = 6");
    }

    #[test]
    fn eta_moments_free_model_values() {
        let seq = JacobiSequence::free();
        let m = eta_moments(&seq, 0.0, 4);
        // p_4(0) = 1, p_5(0) = 0, K_4 = 3
        assert!((m.second - 1.0 / 3.0).abs() < 1e-15);
        assert!(m.first.abs() < 1e-15);
    }

    #[test]
    fn eta_moment_operator_route_matches_closed_form() {
        let seq = JacobiSequence::free();
        assert_eq!(eta_moment(&seq, 0.0, 4, 0), 1.0);
        let m2 = eta_moment(&seq, 0.0, 4, 2);
        assert!((m2 - 1.0 / 3.0).abs() < 1e-14);

        // k = 1, 2 raw moments vs closed-form moments about x0, across models
        let models = [
            JacobiSequence::free(),
            JacobiSequence::anderson(3),
            JacobiSequence::szwarc(0.7).unwrap(),
        ];
        for seq in &models {
            for &x0 in &[0.0, 0.4, -1.1] {
                for &n in &[3u64, 10, 45] {
                    let closed = eta_moments(seq, x0, n);
                    let m1 = eta_moment(seq, x0, n, 1);
                    let m2 = eta_moment(seq, x0, n, 2);
                    assert!((m1 - x0 - closed.first).abs() < 1e-12);
                    let central2 = m2 - 2.0 * x0 * m1 + x0 * x0;
                    assert!(
                        (central2 - closed.second).abs() < 1e-11 * closed.second.max(1.0),
                        "central second moment mismatch"
                    );
                }
            }
        }
    }

    #[test]
    fn eta_variance_is_nonnegative() {
        // second moment about x0 dominates the squared first moment
        let models = [
            JacobiSequence::anderson(11),
            JacobiSequence::fibonacci(0.2).unwrap(),
        ];
        for seq in &models {
            for &x0 in &[-1.4, 0.1, 0.9] {
                for n in [2u64, 7, 30, 200] {
                    let m = eta_moments(seq, x0, n);
                    assert!(m.second >= m.first * m.first - 1e-14);
                }
            }
        }
    }

    #[test]
    fn nevai_ratio_free_model_even_indices() {
        // at x0 = 0: r_n = 0 for odd n, 2/(n+2) for even n
        let seq = JacobiSequence::free();
        let r = nevai_ratio_stream(&seq, 0.0, 100);
        assert_eq!(r.len(), 101);
        for n in (0..=100).step_by(2) {
            assert!((r[n] - 2.0 / (n as f64 + 2.0)).abs() < 1e-15);
        }
        for n in (1..=99).step_by(2) {
            assert_eq!(r[n], 0.0);
        }
    }

    #[test]
    fn ratio_panel_constant_sequence() {
        let c = vec![1.0; 1002];
        let p = ratio_panel(&c).unwrap();
        let last = p.current_over_sum.len() - 1;
        // limits (0, 1, 0, 0, 0)
        assert!(p.current_over_sum[last] < 1e-2);
        assert!((p.sum_over_next_sum[last] - 1.0).abs() < 1e-2);
        assert!(p.next_over_sum[last] < 1e-2);
        assert!(p.adjacent_over_sum[last] < 1e-2);
        assert!(p.trailing_over_sum[last] < 1e-2);
        // exact small-n values: n = 0 row is (1, 1/2, 1, 2, 1)
        assert_eq!(p.current_over_sum[0], 1.0);
        assert_eq!(p.sum_over_next_sum[0], 0.5);
        assert_eq!(p.trailing_over_sum[0], 1.0);
    }

    #[test]
    fn ratio_panel_geometric_sequence() {
        let c: Vec<f64> = (0..400).map(|n| 2.0_f64.powi(n)).collect();
        let p = ratio_panel(&c).unwrap();
        let last = p.current_over_sum.len() - 1;
        // c_n / S_n -> 1/2: the panel does NOT go to (0, 1, 0, 0, 0)
        assert!((p.current_over_sum[last] - 0.5).abs() < 1e-6);
        assert!((p.sum_over_next_sum[last] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn ratio_panel_super_geometric_asymmetry() {
        // c_n = exp(n^2): c_n/S_n -> 1 while c_{n-1}/S_n -> 0, so the panel
        // rows split instead of co-converging
        let c: Vec<f64> = (0..22).map(|n| ((n * n) as f64).exp()).collect();
        let p = ratio_panel(&c).unwrap();
        let last = p.current_over_sum.len() - 1;
        assert!((p.current_over_sum[last] - 1.0).abs() < 1e-10);
        let s: f64 = c[..=last].iter().sum();
        assert!(c[last - 1] / s < 1e-10, "previous term is negligible in the sum");
        assert!((p.trailing_over_sum[last] - 1.0).abs() < 1e-10);
        assert!(p.next_over_sum[last] > 1.0, "next term dwarfs the sum");
    }

    #[test]
    fn ratio_panel_rejects_bad_input() {
        assert!(ratio_panel(&[1.0]).is_err());
        assert!(ratio_panel(&[0.0, 1.0]).is_err());
        assert!(ratio_panel(&[1.0, -0.5, 2.0]).is_err());
    }

    #[test]
    fn panel_ratios_converge_together_or_not_at_all() {
        // the five smallness ratios are equivalent: on every sampled
        // sequence either all five settle at (0, 1, 0, 0, 0) or none do
        let mut rng = crate::rng::SplitMix64::new(0xc0c0);
        for trial in 0..100usize {
            let (c, expect_small): (Vec<f64>, bool) = match trial % 3 {
                0 => {
                    // bounded positive noise
                    let c = (0..100_000).map(|_| rng.uniform_in(0.5, 1.5)).collect();
                    (c, true)
                }
                1 => {
                    // polynomial growth with multiplicative noise
                    let p = rng.uniform_in(0.5, 3.0);
                    let c = (0..100_000)
                        .map(|k| ((k + 1) as f64).powf(p) * rng.uniform_in(0.9, 1.1))
                        .collect();
                    (c, true)
                }
                _ => {
                    // geometric growth: every ratio stays bounded away
                    let rho: f64 = rng.uniform_in(1.05, 1.3);
                    let c = (0..1500).map(|k| (k as f64 * rho.ln()).exp()).collect();
                    (c, false)
                }
            };
            let panel = ratio_panel(&c).unwrap();
            let last = panel.current_over_sum.len() - 1;
            let deviations = [
                panel.current_over_sum[last],
                panel.sum_over_next_sum[last] - 1.0,
                panel.next_over_sum[last],
                panel.adjacent_over_sum[last],
                panel.trailing_over_sum[last],
            ];
            let small = deviations.iter().filter(|d| d.abs() <= 1e-2).count();
            assert!(
                small == 0 || small == 5,
                "trial {trial}: equivalence broken, {small} of 5 ratios small"
            );
            assert_eq!(small == 5, expect_small, "trial {trial}: {deviations:?}");
        }
    }

    #[test]
    fn cesaro_ratio_closed_forms() {
        // a_n = 1: ratio is 1/n
        let ones = vec![1.0; 50];
        let r = cesaro_ratio(&ones).unwrap();
        for (i, v) in r.iter().enumerate() {
            assert!((v - 1.0 / (i as f64 + 1.0)).abs() < 1e-15);
        }
        // a_n = n: ratio is 2/(n+1)
        let lin: Vec<f64> = (1..=50).map(|n| n as f64).collect();
        let r = cesaro_ratio(&lin).unwrap();
        for (i, v) in r.iter().enumerate() {
            let n = i as f64 + 1.0;
            assert!((v - 2.0 / (n + 1.0)).abs() < 1e-14);
        }
        // zero running mean errors out
        assert!(matches!(
            cesaro_ratio(&[1.0, -1.0, 1.0]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn cesaro_ratio_satisfies_mean_decomposition() {
        // a_n/(n C_n) = (C_n - C_{n-1} + C_{n-1}/n) / C_n with C_0 = 0
        let a: Vec<f64> = (1..=200)
            .map(|n| 1.0 + ((n as f64) * 0.37).sin().powi(2))
            .collect();
        let r = cesaro_ratio(&a).unwrap();
        let mut c_prev = 0.0;
        let mut total = 0.0;
        for (i, &v) in r.iter().enumerate() {
            let n = (i + 1) as f64;
            total += a[i];
            let c_n = total / n;
            let decomposed = (c_n - c_prev + c_prev / n) / c_n;
            assert!((v - decomposed).abs() < 1e-12);
            c_prev = c_n;
        }
    }

    #[test]
    fn domination_bound_holds_along_streams() {
        // |p_n| <= K (|p_{n-2}| + |p_{n-1}|), K = (a_max + |x0| + b_max)/a_min
        let models = [
            JacobiSequence::anderson(5),
            JacobiSequence::szwarc(1.0).unwrap(),
            JacobiSequence::step_blocks(PlateauGrowth::default()).unwrap(),
            JacobiSequence::periodic(
                vec![0.8, 1.3],
                vec![0.1, -0.4],
                Some(Decay { amplitude: 0.3, power: 2.0 }),
            )
            .unwrap(),
        ];
        for seq in &models {
            for &x0 in &[-1.7, 0.0, 0.6, 2.2] {
                let k = seq.bounds().domination_constant(x0);
                let mut s = OrthoEval::new_unscaled();
                for _ in 0..400 {
                    let pm2 = s.p_prev_scaled();
                    let pm1 = s.p_scaled();
                    s.advance_in(seq, x0);
                    let pn = s.p_scaled();
                    assert!(
                        pn.abs() <= k * (pm2.abs() + pm1.abs()) + 1e-12,
                        "domination bound violated"
                    );
                    assert!(
                        pn * pn <= 2.0 * k * k * (pm2 * pm2 + pm1 * pm1) + 1e-12,
                        "squared domination bound violated"
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn cd_identity_random_free_points(
            x in -2.5f64..2.5,
            offset in 0.1f64..2.0,
            n in 1u64..80,
        ) {
            let seq = JacobiSequence::free();
            let y = x + offset;
            let direct = cd_kernel_direct(&seq, x, y, n);
            let formula = cd_kernel_formula(&seq, x, y, n).unwrap();
            let scale = cd_kernel_scale(&seq, x, y, n).max(1.0);
            prop_assert!((direct - formula).abs() <= 1e-10 * scale);
        }

        #[test]
        fn kernel_is_symmetric_and_monotone_on_diagonal(
            x0 in -2.0f64..2.0,
            n in 1u64..60,
        ) {
            let seq = JacobiSequence::anderson(17);
            let shorter = cd_kernel_direct(&seq, x0, x0, n - 1);
            let longer = cd_kernel_direct(&seq, x0, x0, n);
            prop_assert!(longer >= shorter - 1e-12);
            let swapped = cd_kernel_direct(&seq, x0, 0.3, n) - cd_kernel_direct(&seq, 0.3, x0, n);
            prop_assert!(swapped.abs() < 1e-12 * cd_kernel_scale(&seq, x0, 0.3, n).max(1.0));
        }
    }
}
