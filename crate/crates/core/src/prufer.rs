//! Polar (Prüfer-type) variables for solutions of the recurrence with zero
//! diagonal, in the elliptic regime `|x0| < 2 a_n`.
//!
//! With the local wavenumber `k_n` defined by `2 cos k_n = x0 / a_n`, a real
//! solution `u` is encoded as a radius/angle pair
//!
//! ```text
//! R_n sin(theta_n) = a_n u_n sin(k_n)
//! R_n cos(theta_n) = a_n (u_{n+1} - u_n cos(k_n))
//! ```
//!
//! On constant-coefficient stretches the step is a pure rotation:
//! `theta -> theta + k`, `R` frozen. A change of coupling perturbs the
//! squared radius by the exact factor
//!
//! ```text
//! R_{n+1}^2 / R_n^2 = 1 + X_n,
//! X_n = (a_{n+1}^2 - a_n^2) sin^2(theta_n + k_n) / (a_n^2 sin^2 k_n),
//! ```
//!
//! so boundedness of solutions reduces to boundedness of `sum log(1 + X_n)`,
//! which is what the slowly-ramped block models are engineered to provide.
//! The angle is kept on a continuous branch: each step picks the lift of the
//! new angle closest to the rotation prediction `theta_n + k_n`.

use std::f64::consts::TAU;

use crate::error::{domain, invalid, Error, Result};
use crate::models::JacobiSequence;

/// Margin keeping `x0 / (2 a)` strictly inside (-1, 1): at the edge the
/// wavenumber degenerates and `1 / sin^2 k` in the radius update blows up.
const ELLIPTIC_MARGIN: f64 = 1e-9;

/// Local wavenumber `k` in `(0, pi)` with `2 a cos k = x0`.
pub fn wavenumber(a: f64, x0: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(invalid(format!("coupling must be positive, got {a}")));
    }
    let ratio = x0 / a;
    if ratio.abs() > 2.0 - ELLIPTIC_MARGIN {
        return Err(domain(format!(
            "elliptic regime requires |x0 / a| < 2, got x0 = {x0}, a = {a}"
        )));
    }
    Ok((ratio / 2.0).acos())
}

/// Radius/angle state of a solution at index `n`. The radius is carried in
/// log form so long runs neither overflow nor underflow.
#[derive(Clone, Copy, Debug)]
pub struct PruferState {
    n: u64,
    log_r: f64,
    theta: f64,
    k: f64,
    a: f64,
}

impl PruferState {
    pub fn index(&self) -> u64 {
        self.n
    }

    pub fn log_radius(&self) -> f64 {
        self.log_r
    }

    pub fn radius(&self) -> f64 {
        self.log_r.exp()
    }

    /// Angle on its continuous (unwrapped) branch.
    pub fn angle(&self) -> f64 {
        self.theta
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    pub fn coupling(&self) -> f64 {
        self.a
    }

    /// Solution values `(u_n, u_{n+1})` encoded by this state.
    pub fn reconstruct(&self) -> (f64, f64) {
        let r = self.radius();
        let denom = self.a * self.k.sin();
        (
            r * self.theta.sin() / denom,
            r * (self.theta + self.k).sin() / denom,
        )
    }
}

/// Encodes solution data `(u_n, u_{n+1})` at coupling `a_n`; the angle is
/// reported in `(-pi, pi]`.
pub fn to_prufer(u_n: f64, u_next: f64, a_n: f64, x0: f64, n: u64) -> Result<PruferState> {
    let k = wavenumber(a_n, x0)?;
    if u_n == 0.0 && u_next == 0.0 {
        return Err(Error::Degenerate(
            "the zero solution has no polar representation".into(),
        ));
    }
    let y = a_n * u_n * k.sin();
    let x = a_n * (u_next - u_n * k.cos());
    let r = y.hypot(x);
    Ok(PruferState {
        n,
        log_r: r.ln(),
        theta: y.atan2(x),
        k,
        a: a_n,
    })
}

/// Starts a run at index `n` with radius 1 and a chosen initial angle.
pub fn from_angle(theta0: f64, a_n: f64, x0: f64, n: u64) -> Result<PruferState> {
    let k = wavenumber(a_n, x0)?;
    Ok(PruferState {
        n,
        log_r: 0.0,
        theta: theta0,
        k,
        a: a_n,
    })
}

/// The exact squared-radius increment `X_n` incurred by switching the
/// coupling from `a_n` to `a_next` at this state.
pub fn x_increment(state: &PruferState, a_next: f64) -> f64 {
    let s = (state.theta + state.k).sin();
    (a_next * a_next - state.a * state.a) * s * s / (state.a * state.a * state.k.sin().powi(2))
}

/// One step of the polar dynamics under diagonal-free parameters.
pub fn prufer_step(state: &PruferState, a_next: f64, x0: f64) -> Result<PruferState> {
    let k_next = wavenumber(a_next, x0)?;
    let x_n = x_increment(state, a_next);
    if x_n <= -1.0 {
        // cannot happen in the elliptic regime (the radius form is positive
        // definite there); guard against misuse
        return Err(domain(format!(
            "radius update 1 + X = {} is not positive",
            1.0 + x_n
        )));
    }
    // scale-free solution values u / R_n
    let denom = state.a * state.k.sin();
    let u_cur = state.theta.sin() / denom;
    let u_next = (state.theta + state.k).sin() / denom;
    let y = a_next * u_next * k_next.sin();
    let x = a_next * u_next * k_next.cos() - state.a * u_cur;
    let raw = y.atan2(x);
    let target = state.theta + state.k;
    let theta = raw + TAU * ((target - raw) / TAU).round();
    Ok(PruferState {
        n: state.n + 1,
        log_r: state.log_r + 0.5 * x_n.ln_1p(),
        theta,
        k: k_next,
        a: a_next,
    })
}

/// Full polar trajectory along a zero-diagonal model: states at indices
/// `1..=n_steps`, plus the radius increments `X_n` and their partial sums
/// (one entry per step taken).
#[derive(Clone, Debug)]
pub struct PruferRun {
    pub log_radii: Vec<f64>,
    pub thetas: Vec<f64>,
    pub wavenumbers: Vec<f64>,
    pub xs: Vec<f64>,
    pub partial_sums: Vec<f64>,
}

/// Runs the polar dynamics from an initial angle at index 1. The model must
/// have zero diagonal (the transform is defined for `b = 0`) and stay
/// elliptic at every visited coupling.
pub fn prufer_run(seq: &JacobiSequence, x0: f64, n_steps: u64, theta0: f64) -> Result<PruferRun> {
    if n_steps == 0 {
        return Err(invalid("a run needs at least one index"));
    }
    let mut state = from_angle(theta0, seq.a_at(1), x0, 1)?;
    let n = n_steps as usize;
    let mut run = PruferRun {
        log_radii: Vec::with_capacity(n),
        thetas: Vec::with_capacity(n),
        wavenumbers: Vec::with_capacity(n),
        xs: Vec::with_capacity(n.saturating_sub(1)),
        partial_sums: Vec::with_capacity(n.saturating_sub(1)),
    };
    let mut x_sum = 0.0f64;
    for step in 1..=n_steps {
        if seq.b_at(step) != 0.0 {
            return Err(invalid(format!(
                "polar dynamics requires zero diagonal, got b_{step} = {}",
                seq.b_at(step)
            )));
        }
        run.log_radii.push(state.log_radius());
        run.thetas.push(state.angle());
        run.wavenumbers.push(state.wavenumber());
        if step == n_steps {
            break;
        }
        let a_next = seq.a_at(step + 1);
        let x_n = x_increment(&state, a_next);
        state = prufer_step(&state, a_next, x0)?;
        x_sum += x_n;
        run.xs.push(x_n);
        run.partial_sums.push(x_sum);
    }
    Ok(run)
}

/// Direct check of the uniform bound `|sum_{l=1}^{M} cos(q l + theta)| <=
/// 1 / sin(q / 2)` for `q` in `(0, 2 pi)`: returns `(sum, bound)`.
pub fn cosine_sum_check(q: f64, theta: f64, m_terms: u64) -> Result<(f64, f64)> {
    if !(q > 0.0 && q < TAU) {
        return Err(domain(format!(
            "the cosine-sum bound needs q strictly inside (0, 2 pi), got {q}"
        )));
    }
    if m_terms == 0 {
        return Err(invalid("the sum needs at least one term"));
    }
    let mut sum = 0.0f64;
    for l in 1..=m_terms {
        sum += (q * l as f64 + theta).cos();
    }
    Ok((sum, 1.0 / (q / 2.0).sin()))
}
