//! Standalone inequality checkers used by the oscillation estimates, plus
//! randomized fuzz harnesses for them.
//!
//! The three deterministic checks are
//!
//! * rotation averaging: `(12/L) sum_{j<L} |1 - r e^{i(j theta + phi)}|^2
//!   >= |1 - r e^{i phi}|^2`,
//! * its matrix form: `|(A^{L-1} v)_1|^2 <= (12/L) sum_{j<L} |(A^j v)_1|^2`
//!   for unimodular `A` with `|tr A| <= 2`,
//! * the half-angle comparison: `|1 - r e^{i eta}| / |1 - r e^{i phi}| >= 1/2`
//!   whenever `|phi/2| <= |eta| <= pi`.
//!
//! Complex magnitudes are expanded into real trigonometric form throughout:
//! `|1 - r e^{i psi}|^2 = 1 - 2 r cos psi + r^2`.
//!
//! Each fuzzer draws from a seeded deterministic stream, counts violations
//! beyond a relative slack of `1e-12`, and reports the worst observed margin
//! so tightness is visible, not just pass/fail.

use std::f64::consts::{PI, TAU};

use crate::error::{invalid, Error, Result};
use crate::prufer::cosine_sum_check;
use crate::rng::SplitMix64;

/// Relative slack when counting fuzz violations.
const SLACK: f64 = 1e-12;

fn squared_distance_to_circle(r: f64, psi: f64) -> f64 {
    1.0 - 2.0 * r * psi.cos() + r * r
}

/// `(lhs, rhs)` of the rotation-averaging inequality
/// `(12/L) sum_{j=0}^{L-1} |1 - r e^{i(j theta + phi)}|^2 >= |1 - r e^{i phi}|^2`.
pub fn rotation_average_check(r: f64, theta: f64, phi: f64, l: u64) -> (f64, f64) {
    debug_assert!(r >= 0.0 && l >= 1);
    let mut sum = 0.0f64;
    for j in 0..l {
        sum += squared_distance_to_circle(r, j as f64 * theta + phi);
    }
    (12.0 * sum / l as f64, squared_distance_to_circle(r, phi))
}

fn mul2(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn rot2(angle: f64) -> [[f64; 2]; 2] {
    let (s, c) = angle.sin_cos();
    [[c, -s], [s, c]]
}

/// A real 2x2 matrix with `det = 1` and `|trace| <= 2` (elliptic or
/// parabolic, so its powers stay bounded or grow at most linearly).
#[derive(Clone, Copy, Debug)]
pub struct UnimodularElliptic {
    m: [[f64; 2]; 2],
}

impl UnimodularElliptic {
    pub fn new(m: [[f64; 2]; 2]) -> Result<Self> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if (det - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("matrix must be unimodular, det = {det}")));
        }
        let tr = m[0][0] + m[1][1];
        if tr.abs() > 2.0 + 1e-12 {
            return Err(invalid(format!(
                "matrix must have |trace| <= 2, trace = {tr}"
            )));
        }
        Ok(UnimodularElliptic { m })
    }

    /// `S R(angle) S^{-1}` where `S = R(frame) diag(stretch, 1/stretch)
    /// R(-frame)`: unimodular by construction with trace `2 cos(angle)`.
    pub fn conjugated_rotation(angle: f64, stretch: f64, frame_angle: f64) -> Result<Self> {
        if !(stretch > 0.0 && stretch.is_finite()) {
            return Err(invalid(format!("stretch must be positive, got {stretch}")));
        }
        let f = rot2(frame_angle);
        let f_inv = rot2(-frame_angle);
        let d = [[stretch, 0.0], [0.0, 1.0 / stretch]];
        let d_inv = [[1.0 / stretch, 0.0], [0.0, stretch]];
        let s = mul2(mul2(f, d), f_inv);
        let s_inv = mul2(mul2(f, d_inv), f_inv);
        UnimodularElliptic::new(mul2(mul2(s, rot2(angle)), s_inv))
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }
}

/// `(lhs, rhs)` of the matrix form: the final first component against the
/// window average, `|(A^{L-1} v)_1|^2 <= (12/L) sum_{j<L} |(A^j v)_1|^2`.
pub fn matrix_power_check(a: &UnimodularElliptic, v: [f64; 2], l: u64) -> (f64, f64) {
    debug_assert!(l >= 1);
    let mut w = v;
    let mut sum = 0.0f64;
    let mut last = 0.0f64;
    for j in 0..l {
        last = w[0] * w[0];
        sum += last;
        if j + 1 < l {
            w = a.apply(w);
        }
    }
    (last, 12.0 * sum / l as f64)
}

/// The ratio `|1 - r e^{i eta}| / |1 - r e^{i phi}|`, which is at least 1/2
/// whenever `|phi / 2| <= |eta| <= pi`.
pub fn half_angle_ratio_check(r: f64, phi: f64, eta: f64) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(invalid(format!("radius must be finite and >= 0, got {r}")));
    }
    if !(eta.abs() >= phi.abs() / 2.0 && eta.abs() <= PI) {
        return Err(invalid(format!(
            "angles must satisfy |phi|/2 <= |eta| <= pi, got phi = {phi}, eta = {eta}"
        )));
    }
    let denom = squared_distance_to_circle(r, phi);
    if denom < 1e-30 {
        return Err(Error::Degenerate(format!(
            "denominator |1 - r e^(i phi)| vanishes at r = {r}, phi = {phi}"
        )));
    }
    Ok((squared_distance_to_circle(r, eta) / denom).sqrt())
}

/// Outcome of a randomized sweep of one inequality. `min_ratio` is the
/// worst observed value of the quantity that the inequality keeps >= 1
/// (favored side over the other); staying above 1 is the tightness record.
#[derive(Clone, Copy, Debug)]
pub struct FuzzSummary {
    pub samples: u64,
    pub violations: u64,
    /// Worst relative margin `(favored - other) / scale`; negative beyond
    /// the slack counts as a violation.
    pub min_slack: f64,
    /// Worst favored/other ratio over samples where the ratio is defined.
    pub min_ratio: f64,
}

impl FuzzSummary {
    fn new(samples: u64) -> Self {
        FuzzSummary {
            samples,
            violations: 0,
            min_slack: f64::INFINITY,
            min_ratio: f64::INFINITY,
        }
    }

    fn record(&mut self, favored: f64, other: f64) {
        let scale = favored.abs().max(other.abs()).max(1e-300);
        let slack = (favored - other) / scale;
        if slack < self.min_slack {
            self.min_slack = slack;
        }
        if slack < -SLACK {
            self.violations += 1;
        }
        if other > 1e-300 {
            let ratio = favored / other;
            if ratio < self.min_ratio {
                self.min_ratio = ratio;
            }
        }
    }
}

fn sample_radius(rng: &mut SplitMix64, hi: f64) -> f64 {
    if rng.uniform() < 0.5 {
        rng.uniform_in(0.0, hi)
    } else {
        rng.log_uniform_in(1e-6, hi)
    }
}

/// Randomized sweep of the rotation-averaging inequality
/// (`r <= 10`, `L <= 1000`).
pub fn fuzz_rotation_average(samples: u64, seed: u64) -> FuzzSummary {
    let mut rng = SplitMix64::new(seed);
    let mut summary = FuzzSummary::new(samples);
    for _ in 0..samples {
        let r = sample_radius(&mut rng, 10.0);
        let theta = rng.uniform_in(0.0, TAU);
        let phi = rng.uniform_in(0.0, TAU);
        let l = rng.log_uniform_len(1000);
        let (lhs, rhs) = rotation_average_check(r, theta, phi, l);
        summary.record(lhs, rhs);
    }
    summary
}

/// Randomized sweep of the matrix-power inequality over conjugated
/// rotations (`stretch <= 3`, `L <= 200`).
pub fn fuzz_matrix_power(samples: u64, seed: u64) -> FuzzSummary {
    let mut rng = SplitMix64::new(seed);
    let mut summary = FuzzSummary::new(samples);
    for _ in 0..samples {
        let a = UnimodularElliptic::conjugated_rotation(
            rng.uniform_in(0.0, TAU),
            rng.log_uniform_in(1.0 / 3.0, 3.0),
            rng.uniform_in(0.0, PI),
        )
        .expect("construction is admissible by design");
        let v = [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)];
        let l = rng.log_uniform_len(200);
        let (lhs, rhs) = matrix_power_check(&a, v, l);
        // favored side is the window average
        summary.record(rhs, lhs);
    }
    summary
}

/// Randomized sweep of the half-angle ratio bound (ratio floor 1/2, so the
/// recorded ratio is normalized by the floor).
pub fn fuzz_half_angle_ratio(samples: u64, seed: u64) -> FuzzSummary {
    let mut rng = SplitMix64::new(seed);
    let mut summary = FuzzSummary::new(samples);
    let mut done = 0u64;
    while done < samples {
        let r = sample_radius(&mut rng, 10.0);
        let eta_abs = rng.uniform_in(0.0, PI);
        let eta = if rng.uniform() < 0.5 { eta_abs } else { -eta_abs };
        let phi = rng.uniform_in(-2.0 * eta_abs, 2.0 * eta_abs);
        match half_angle_ratio_check(r, phi, eta) {
            Ok(ratio) => {
                summary.record(ratio, 0.5);
                done += 1;
            }
            Err(Error::Degenerate(_)) => continue, // resample at the pole
            Err(e) => unreachable!("admissible sample rejected: {e}"),
        }
    }
    summary
}

/// Randomized sweep of the uniform cosine-sum bound, with extra sampling
/// density near the degenerate frequencies 0 and 2 pi (`M <= 1000`).
pub fn fuzz_cosine_sum(samples: u64, seed: u64) -> FuzzSummary {
    let mut rng = SplitMix64::new(seed);
    let mut summary = FuzzSummary::new(samples);
    for _ in 0..samples {
        let q = match rng.next_u64() % 4 {
            0 => rng.log_uniform_in(1e-9, 1.0),
            1 => TAU - rng.log_uniform_in(1e-9, 1.0),
            _ => rng.uniform_in(1e-9, TAU - 1e-9),
        };
        let theta = rng.uniform_in(-PI, PI);
        let m = rng.log_uniform_len(1000);
        let (sum, bound) = cosine_sum_check(q, theta, m).expect("q is admissible");
        summary.record(bound, sum.abs());
    }
    summary
}
