//! Green's functions of truncated Jacobi matrices.
//!
//! For a truncation `J_N` and a non-real spectral parameter `z`, the
//! resolvent entries `G_ij(z) = <delta_i, (J_N - z)^{-1} delta_j>` come from
//! one tridiagonal solve per column. The first row doubles as the Weyl
//! solution: `u+_m = G_1m` solves the recurrence and is the unique (up to
//! scale) square-summable solution, normalized so that the Wronskian against
//! the orthonormal-polynomial solution is exactly 1:
//!
//! ```text
//! a_n (u+_{n+1} p_{n-1}(z) - u+_n p_n(z)) = 1        for all n >= 1.
//! ```
//!
//! For the k-site block with zero diagonal and off-diagonal 1/2 the resolvent
//! is available in closed form at real `x0` with `|x0| > 1` (a hyperbolic
//! point for the block): with `eta = arccosh |x0|` and `sigma = sign x0`,
//!
//! ```text
//! G_mn = -2 sigma^{m+n+1} sinh(m eta) sinh((k+1-n) eta)
//!                          / (sinh(eta) sinh((k+1) eta)),   m <= n,
//! ```
//!
//! evaluated in log space so deep interior entries do not underflow. The sign
//! convention is the resolvent's (fixed once against direct inversion).

use num_complex::Complex64;

use crate::error::{domain, invalid, Error, Result};
use crate::models::JacobiSequence;

/// The root with `|w| > 1` of `w + 1/w = 2 x0`; carries the sign of `x0`.
pub fn solve_w(x0: f64) -> Result<f64> {
    if x0.abs() <= 1.0 {
        return Err(domain(format!(
            "expansion root needs |x0| > 1, got x0 = {x0} (roots on the unit circle)"
        )));
    }
    Ok(x0.signum() * (x0.abs() + (x0 * x0 - 1.0).sqrt()))
}

/// `log(sinh t)` for `t > 0`, stable for both tiny and huge `t`.
fn log_sinh(t: f64) -> f64 {
    debug_assert!(t > 0.0);
    t + (-(-2.0 * t).exp()).ln_1p() - std::f64::consts::LN_2
}

/// Closed-form resolvent entry `G_mn(x0)` of the k-site block with zero
/// diagonal and off-diagonal 1/2, for real `x0` with `|x0| > 1` (outside the
/// block's spectrum). Entries are symmetric in `(m, n)`; indices are 1-based.
pub fn free_block_green(k: usize, m: usize, n: usize, x0: f64) -> Result<f64> {
    if k == 0 || m == 0 || n == 0 || m > k || n > k {
        return Err(invalid(format!(
            "block resolvent indices must satisfy 1 <= m, n <= k, got k={k}, m={m}, n={n}"
        )));
    }
    if x0.abs() <= 1.0 {
        return Err(domain(format!(
            "block resolvent needs |x0| > 1 (spectral gap), got x0 = {x0}"
        )));
    }
    let (m, n) = if m <= n { (m, n) } else { (n, m) };
    let eta = x0.abs().acosh();
    let log_mag = std::f64::consts::LN_2 + log_sinh(m as f64 * eta)
        + log_sinh((k + 1 - n) as f64 * eta)
        - log_sinh(eta)
        - log_sinh((k + 1) as f64 * eta);
    let sigma_power = if x0 > 0.0 || (m + n + 1) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    Ok(-sigma_power * log_mag.exp())
}

/// Direct-inversion oracle for `free_block_green`: solves the dense k x k
/// system with partial pivoting. Intended for cross-validation at small k.
pub fn free_block_green_direct(k: usize, m: usize, n: usize, x0: f64) -> Result<f64> {
    if k == 0 || m == 0 || n == 0 || m > k || n > k {
        return Err(invalid(format!(
            "block resolvent indices must satisfy 1 <= m, n <= k, got k={k}, m={m}, n={n}"
        )));
    }
    // rows of (J_block - x0), augmented with the unit vector delta_n
    let mut rows = vec![vec![0.0f64; k + 1]; k];
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] = -x0;
        if i + 1 < k {
            row[i + 1] = 0.5;
        }
        if i > 0 {
            row[i - 1] = 0.5;
        }
    }
    rows[n - 1][k] = 1.0;
    for col in 0..k {
        let pivot_row = (col..k)
            .max_by(|&i, &j| rows[i][col].abs().total_cmp(&rows[j][col].abs()))
            .expect("nonempty range");
        rows.swap(col, pivot_row);
        let pivot = rows[col][col];
        if pivot.abs() < 1e-300 {
            return Err(Error::Singular(format!(
                "block matrix is numerically singular at x0 = {x0}"
            )));
        }
        for i in (col + 1)..k {
            let f = rows[i][col] / pivot;
            if f != 0.0 {
                for jj in col..=k {
                    rows[i][jj] -= f * rows[col][jj];
                }
            }
        }
    }
    let mut sol = vec![0.0f64; k];
    for i in (0..k).rev() {
        let mut acc = rows[i][k];
        for jj in (i + 1)..k {
            acc -= rows[i][jj] * sol[jj];
        }
        sol[i] = acc / rows[i][i];
    }
    Ok(sol[m - 1])
}

/// A shifted tridiagonal system `(J_N - z)` with complex diagonal and real
/// positive off-diagonals, solvable in O(N).
#[derive(Clone, Debug)]
pub struct ComplexTridiag {
    diag: Vec<Complex64>,
    off: Vec<f64>,
}

impl ComplexTridiag {
    /// Builds a shifted system from explicit entries: `diag` holds
    /// `b_j - z`, `off` the couplings (length one less, all nonzero).
    pub fn new(diag: Vec<Complex64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(invalid("shifted tridiagonal system needs size >= 1"));
        }
        if off.len() + 1 != diag.len() {
            return Err(invalid(format!(
                "off-diagonal length {} does not match size {}",
                off.len(),
                diag.len()
            )));
        }
        if off.iter().any(|&a| a == 0.0 || !a.is_finite()) {
            return Err(invalid("off-diagonal entries must be nonzero and finite"));
        }
        Ok(ComplexTridiag { diag, off })
    }

    /// The shifted truncation `(J_N - z)` of a parameter sequence; `z` must
    /// be non-real so the system is invertible.
    pub fn from_sequence(seq: &JacobiSequence, size: usize, z: Complex64) -> Result<Self> {
        if size == 0 {
            return Err(invalid("truncation size must be >= 1"));
        }
        if z.im == 0.0 {
            return Err(invalid(
                "spectral parameter must be non-real (real shifts can be singular)",
            ));
        }
        let diag = (1..=size as u64)
            .map(|j| Complex64::new(seq.b_at(j), 0.0) - z)
            .collect();
        let off = (1..size as u64).map(|j| seq.a_at(j)).collect();
        Ok(ComplexTridiag { diag, off })
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    acc += self.off[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Solves `(J_N - z) u = rhs` by elimination without pivoting (the
    /// complex shift keeps pivots away from zero), then verifies the
    /// residual against the matrix scale.
    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.diag.len();
        if rhs.len() != n {
            return Err(invalid(format!(
                "right-hand side length {} does not match size {n}",
                rhs.len()
            )));
        }
        let mut upper = vec![Complex64::new(0.0, 0.0); n];
        let mut work = vec![Complex64::new(0.0, 0.0); n];
        let mut pivot = self.diag[0];
        if pivot.norm() < 1e-300 {
            return Err(Error::Singular("zero pivot in tridiagonal solve".into()));
        }
        work[0] = rhs[0] / pivot;
        for i in 1..n {
            upper[i - 1] = self.off[i - 1] / pivot;
            pivot = self.diag[i] - self.off[i - 1] * upper[i - 1];
            if pivot.norm() < 1e-300 {
                return Err(Error::Singular(format!(
                    "vanishing pivot at row {i} in tridiagonal solve"
                )));
            }
            work[i] = (rhs[i] - self.off[i - 1] * work[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            let t = upper[i] * work[i + 1];
            work[i] -= t;
        }
        // elimination without pivoting can be unstable in principle; reject
        // any solve whose residual is out of line with the data scale
        let residual = self
            .apply(&work)
            .iter()
            .zip(rhs)
            .map(|(lhs, r)| (lhs - r).norm())
            .fold(0.0f64, f64::max);
        let row_norm = (0..n)
            .map(|i| {
                self.diag[i].norm()
                    + if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                    + if i + 1 < n { self.off[i].abs() } else { 0.0 }
            })
            .fold(0.0f64, f64::max);
        let u_norm = work.iter().map(|u| u.norm()).fold(0.0f64, f64::max);
        let rhs_norm = rhs.iter().map(|r| r.norm()).fold(0.0f64, f64::max);
        let scale = row_norm * u_norm + rhs_norm;
        if residual > 1e-8 * scale {
            return Err(Error::Singular(format!(
                "tridiagonal elimination unstable: residual {residual:.3e} vs scale {scale:.3e}"
            )));
        }
        Ok(work)
    }
}

/// Resolvent entry `G_ij(z)` of the size-`n_trunc` truncation (1-based
/// indices), for `Im z > 0`.
pub fn green_numeric(
    seq: &JacobiSequence,
    n_trunc: usize,
    z: Complex64,
    i: usize,
    j: usize,
) -> Result<Complex64> {
    if z.im <= 0.0 {
        return Err(domain(format!(
            "resolvent sampling needs Im z > 0, got Im z = {}",
            z.im
        )));
    }
    if i == 0 || j == 0 || i > n_trunc || j > n_trunc {
        return Err(invalid(format!(
            "indices must lie in 1..={n_trunc}, got ({i}, {j})"
        )));
    }
    let system = ComplexTridiag::from_sequence(seq, n_trunc, z)?;
    let mut rhs = vec![Complex64::new(0.0, 0.0); n_trunc];
    rhs[j - 1] = Complex64::new(1.0, 0.0);
    let u = system.solve(&rhs)?;
    Ok(u[i - 1])
}

/// Full first row `G_1m(z)`, `m = 1..=n_trunc`, from a single solve. This is
/// the (truncated) Weyl solution `u+`.
pub fn green_first_row(
    seq: &JacobiSequence,
    n_trunc: usize,
    z: Complex64,
) -> Result<Vec<Complex64>> {
    if z.im <= 0.0 {
        return Err(domain(format!(
            "resolvent sampling needs Im z > 0, got Im z = {}",
            z.im
        )));
    }
    let system = ComplexTridiag::from_sequence(seq, n_trunc, z)?;
    let mut rhs = vec![Complex64::new(0.0, 0.0); n_trunc];
    rhs[0] = Complex64::new(1.0, 0.0);
    system.solve(&rhs)
}

/// Truncation self-check: recomputes `G_ij(z)` at twice the size and returns
/// `(refined value, relative change)`. Small change indicates the truncation
/// is already converged at this `z`.
pub fn green_truncation_change(
    seq: &JacobiSequence,
    n_trunc: usize,
    z: Complex64,
    i: usize,
    j: usize,
) -> Result<(Complex64, f64)> {
    let coarse = green_numeric(seq, n_trunc, z, i, j)?;
    let fine = green_numeric(seq, 2 * n_trunc, z, i, j)?;
    let change = (fine - coarse).norm() / fine.norm().max(1e-300);
    Ok((fine, change))
}

/// The m-function of the half-line free model (`a = 1`, `b = 0`): the
/// Stieltjes transform of the semicircle weight on `[-2, 2]`, computed as
/// `-1/w` with `w` the larger root of `w + 1/w = z`.
pub fn free_m_function(z: Complex64) -> Complex64 {
    let s = (z * z - Complex64::new(4.0, 0.0)).sqrt();
    let w_plus = (z + s) / 2.0;
    let w_minus = (z - s) / 2.0;
    let w = if w_plus.norm() >= w_minus.norm() {
        w_plus
    } else {
        w_minus
    };
    -w.inv()
}

/// Orthonormal-polynomial pair `(p_{n-1}(z), p_n(z))` at complex `z`,
/// returned as scaled values plus a common log factor (true value =
/// `scaled * exp(log_scale)`).
fn complex_poly_pair(seq: &JacobiSequence, z: Complex64, n: u64) -> (Complex64, Complex64, f64) {
    let mut p_prev = Complex64::new(0.0, 0.0);
    let mut p = Complex64::new(1.0, 0.0);
    let mut log_scale = 0.0f64;
    let mut a_cur = 1.0; // multiplies p_{-1} = 0 on the first step
    for j in 0..n {
        let (a_next, b_next) = seq.params_at(j + 1);
        let p_next = ((z - b_next) * p - a_cur * p_prev) / a_next;
        p_prev = p;
        p = p_next;
        a_cur = a_next;
        let mag = p.norm().max(p_prev.norm());
        if !(1e-6..=1e6).contains(&mag) && mag > 0.0 && mag.is_finite() {
            p_prev /= mag;
            p /= mag;
            log_scale += mag.ln();
        }
    }
    (p_prev, p, log_scale)
}

/// Deviation `|a_n (u+_{n+1} p_{n-1}(z) - u+_n p_n(z)) - 1|` of the Wronskian
/// normalization, with `u+` extracted from the size-`n_trunc` truncation.
/// Requires `n + 1 <= n_trunc`; meaningful for `n` well below `n_trunc`.
pub fn weyl_wronskian_residual(
    seq: &JacobiSequence,
    n_trunc: usize,
    z: Complex64,
    n: u64,
) -> Result<f64> {
    if n == 0 || (n + 1) as usize > n_trunc {
        return Err(invalid(format!(
            "Wronskian index must satisfy 1 <= n < n_trunc = {n_trunc}, got {n}"
        )));
    }
    let row = green_first_row(seq, n_trunc, z)?;
    let u_n = row[(n - 1) as usize];
    let u_next = row[n as usize];
    let (p_prev, p, log_scale) = complex_poly_pair(seq, z, n);
    let diff = u_next * p_prev - u_n * p;
    let a_n = seq.a_at(n);
    let mag = diff.norm();
    if mag == 0.0 {
        return Ok(1.0);
    }
    let total_ln = mag.ln() + log_scale + a_n.ln();
    if total_ln > 700.0 {
        return Ok(f64::INFINITY);
    }
    let w = (diff / mag) * total_ln.exp();
    Ok((w - Complex64::new(1.0, 0.0)).norm())
}

/// Relative residual of the decoupling identity at site `n`: cutting the
/// couplings `a_k` and `a_l` splits the truncation into three blocks, and
/// for `k < n <= l` (middle block `k+1..=l`, resolvent `H`)
///
/// ```text
/// G_1n = -a_k G_1k H_{k+1,n} - a_l G_{1,l+1} H_{l,n}
/// ```
///
/// holds exactly; the residual measures only rounding.
pub fn decoupling_residual(
    seq: &JacobiSequence,
    n_trunc: usize,
    z: Complex64,
    k: u64,
    l: u64,
    n: u64,
) -> Result<f64> {
    if !(k >= 1 && k < n && n <= l && (l as usize) < n_trunc) {
        return Err(invalid(format!(
            "decoupling needs 1 <= k < n <= l < n_trunc, got k={k}, n={n}, l={l}, n_trunc={n_trunc}"
        )));
    }
    let row = green_first_row(seq, n_trunc, z)?;
    let mid_size = (l - k) as usize;
    let diag = ((k + 1)..=l)
        .map(|j| Complex64::new(seq.b_at(j), 0.0) - z)
        .collect();
    let off = ((k + 1)..l).map(|j| seq.a_at(j)).collect();
    let middle = ComplexTridiag::new(diag, off)?;
    let mut e_first = vec![Complex64::new(0.0, 0.0); mid_size];
    e_first[0] = Complex64::new(1.0, 0.0);
    let h_first = middle.solve(&e_first)?; // H_{., k+1}
    let mut e_last = vec![Complex64::new(0.0, 0.0); mid_size];
    e_last[mid_size - 1] = Complex64::new(1.0, 0.0);
    let h_last = middle.solve(&e_last)?; // H_{., l}
    let rel = (n - k - 1) as usize;
    let lhs = row[(n - 1) as usize];
    let rhs = -seq.a_at(k) * row[(k - 1) as usize] * h_first[rel]
        - seq.a_at(l) * row[l as usize] * h_last[rel];
    Ok((lhs - rhs).norm() / lhs.norm().max(1e-300))
}

/// Verdict of a boundary-value probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stabilization {
    /// Final two probe values agree to better than 1% relative.
    Stabilized,
    /// Final two probe values still moving by 1% or more.
    NotStabilized,
    /// Single-point schedule: no comparison possible.
    NotAssessed,
}

/// Probes the boundary value `G_1n(x0 + i 0)` along a decreasing schedule of
/// imaginary offsets. Existence of the limit is only sampled, never proven:
/// the flag reports whether the last two probes agree within 1% relative.
pub fn boundary_value_probe(
    seq: &JacobiSequence,
    n_trunc: usize,
    x0: f64,
    n: usize,
    eps_schedule: &[f64],
) -> Result<(Vec<Complex64>, Stabilization)> {
    if eps_schedule.is_empty() {
        return Err(invalid("probe schedule must be nonempty"));
    }
    if eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("probe schedule must be strictly decreasing"));
    }
    let last = *eps_schedule.last().expect("nonempty");
    if last < 1e-6 {
        return Err(invalid(format!(
            "probe offsets below 1e-6 are unreliable at double precision, got {last:e}"
        )));
    }
    let values = eps_schedule
        .iter()
        .map(|&eps| green_numeric(seq, n_trunc, Complex64::new(x0, eps), 1, n))
        .collect::<Result<Vec<_>>>()?;
    let flag = if values.len() == 1 {
        Stabilization::NotAssessed
    } else {
        let v_last = values[values.len() - 1];
        let v_prev = values[values.len() - 2];
        if (v_last - v_prev).norm() < 1e-2 * v_last.norm().max(1e-300) {
            Stabilization::Stabilized
        } else {
            Stabilization::NotStabilized
        }
    };
    Ok((values, flag))
}
