//! Model zoo: the Jacobi parameter sequences `(a_n, b_n)`, `n >= 1`, that the
//! diagnostics in this crate are exercised on.
//!
//! Every model is deterministic (random entries are keyed on `(seed, n)`),
//! immutable after construction, cheap to query at an arbitrary index, and
//! carries explicit bounds `0 < a_min <= a_n <= a_max` and `|b_n| <= b_max`.
//!
//! The zoo contains:
//! * constant sequences (the free half-line operator is `a = 1`, `b = 0`),
//! * a sparse diagonal bump model (`b = 3/2` on perfect squares),
//! * the Anderson model (`a = 1/2`, i.i.d. uniform diagonal),
//! * two block models alternating long plateaus of `a = 1` and `a = 1/2`,
//!   with sharp steps or geometric interpolation ramps between plateaus,
//! * the Fibonacci potential (`b_n` a golden-rotation indicator), and
//! * periodic sequences with an optional decaying perturbation.

use crate::error::{Error, Result};
use crate::rng;

/// Inverse golden ratio `(sqrt(5) - 1)/2`: the rotation number of the
/// Fibonacci potential.
pub const FIBONACCI_ALPHA: f64 = 0.618_033_988_749_894_9;

/// Declared envelope of a parameter sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SequenceBounds {
    pub a_min: f64,
    pub a_max: f64,
    /// Bound on `|b_n|`.
    pub b_max: f64,
}

impl SequenceBounds {
    /// `a_min^{-1} (a_max + |x0| + b_max)`: the constant in the two-step
    /// domination bound `|p_n| <= K (|p_{n-2}| + |p_{n-1}|)`.
    pub fn domination_constant(&self, x0: f64) -> f64 {
        (self.a_max + x0.abs() + self.b_max) / self.a_min
    }
}

// ---------------------------------------------------------------------------
// Block layout machinery for the plateau models.
// ---------------------------------------------------------------------------

/// Phase of a block within one period `A_j -> B_j -> C_j -> D_j` of a
/// plateau model: `a = 1` on [`BlockPhase::UnitPlateau`], `a = 1/2` on
/// [`BlockPhase::HalfPlateau`], geometric interpolation on the ramps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockPhase {
    UnitPlateau,
    DownRamp,
    HalfPlateau,
    UpRamp,
}

/// One contiguous block of the layout; indices `start ..= end()` (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockInfo {
    pub j: u32,
    pub phase: BlockPhase,
    pub start: u64,
    pub len: u64,
}

impl BlockInfo {
    /// Last index of the block (inclusive).
    pub fn end(&self) -> u64 {
        self.start.saturating_add(self.len - 1)
    }

    /// Center of the block: one half unit before the midpoint, i.e. the
    /// left of the two middle indices when `len` is even.
    pub fn center(&self) -> u64 {
        self.start + (self.len - 1) / 2
    }
}

/// Plateau lengths `(#A_j, #C_j)` as a function of the period index `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlateauGrowth {
    /// `#A_j = unit_base^(j^2)`, `#C_j = half_base^(j^2)`: the doubly
    /// exponential schedule the block models are defined with.
    PowerSquared { unit_base: u64, half_base: u64 },
    /// Constant lengths, independent of `j` (useful for desk-scale runs and
    /// boundary tests).
    Fixed { unit: u64, half: u64 },
}

impl Default for PlateauGrowth {
    fn default() -> Self {
        PlateauGrowth::PowerSquared {
            unit_base: 3,
            half_base: 2,
        }
    }
}

/// Ramp lengths `#B_j = #D_j` as a function of `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RampGrowth {
    /// `j^exponent - 1` (so the first period has no ramp).
    PowerMinusOne { exponent: u32 },
    /// Constant length; `Fixed { len: 0 }` yields sharp steps.
    Fixed { len: u64 },
}

impl Default for RampGrowth {
    fn default() -> Self {
        RampGrowth::PowerMinusOne { exponent: 6 }
    }
}

fn saturating_pow(base: u64, exp: u64) -> u64 {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = match acc.checked_mul(base) {
            Some(v) => v,
            None => return u64::MAX,
        };
    }
    acc
}

impl PlateauGrowth {
    fn sizes(&self, j: u32) -> (u64, u64) {
        match *self {
            PlateauGrowth::PowerSquared {
                unit_base,
                half_base,
            } => {
                let e = (j as u64).saturating_mul(j as u64);
                (saturating_pow(unit_base, e), saturating_pow(half_base, e))
            }
            PlateauGrowth::Fixed { unit, half } => (unit, half),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            PlateauGrowth::PowerSquared {
                unit_base,
                half_base,
            } => unit_base >= 1 && half_base >= 1,
            PlateauGrowth::Fixed { unit, half } => unit >= 1 && half >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("plateau growth must produce positive block lengths"))
        }
    }
}

impl RampGrowth {
    fn len_at(&self, j: u32) -> u64 {
        match *self {
            RampGrowth::PowerMinusOne { exponent } => {
                saturating_pow(j as u64, exponent as u64).saturating_sub(1)
            }
            RampGrowth::Fixed { len } => len,
        }
    }
}

const SPAN_TABLE_LIMIT: usize = 4096;
const SPAN_START_LIMIT: u64 = 1 << 62;

/// Streams the blocks of a layout in index order, for `j = 1, 2, ...`.
/// Zero-length blocks are skipped. Starts saturate at `u64::MAX`.
fn block_stream(
    plateau: PlateauGrowth,
    ramp: RampGrowth,
) -> impl Iterator<Item = BlockInfo> {
    let mut j: u32 = 1;
    let mut start: u64 = 1;
    let mut queue: std::collections::VecDeque<BlockInfo> = Default::default();
    std::iter::from_fn(move || {
        while queue.is_empty() {
            let (unit, half) = plateau.sizes(j);
            let r = ramp.len_at(j);
            let phases = [
                (BlockPhase::UnitPlateau, unit),
                (BlockPhase::DownRamp, r),
                (BlockPhase::HalfPlateau, half),
                (BlockPhase::UpRamp, r),
            ];
            for (phase, len) in phases {
                if len > 0 {
                    queue.push_back(BlockInfo { j, phase, start, len });
                    start = start.saturating_add(len);
                }
            }
            j = j.saturating_add(1);
        }
        queue.pop_front()
    })
}

/// Precomputed block structure of a plateau model. A prefix of the layout is
/// tabulated for O(log) lookups; queries beyond the table fall back to a
/// stateless scan (only reachable with constant growth at extreme indices).
#[derive(Clone, Debug, PartialEq)]
pub struct BlockLayout {
    plateau: PlateauGrowth,
    ramp: RampGrowth,
    spans: Vec<BlockInfo>,
}

impl BlockLayout {
    fn new(plateau: PlateauGrowth, ramp: RampGrowth) -> Result<Self> {
        plateau.validate()?;
        let spans: Vec<BlockInfo> = block_stream(plateau, ramp)
            .take(SPAN_TABLE_LIMIT)
            .take_while(|s| s.start <= SPAN_START_LIMIT)
            .collect();
        Ok(BlockLayout { plateau, ramp, spans })
    }

    fn block_at(&self, n: u64) -> BlockInfo {
        debug_assert!(n >= 1, "sequence indices are 1-based");
        let idx = self.spans.partition_point(|s| s.start <= n);
        if idx > 0 {
            let s = self.spans[idx - 1];
            if n <= s.end() {
                return s;
            }
        }
        block_stream(self.plateau, self.ramp)
            .find(|s| s.start <= n && n <= s.end())
            .expect("block layout covers every index")
    }

    fn span_of(&self, j: u32, phase: BlockPhase) -> Option<BlockInfo> {
        for s in block_stream(self.plateau, self.ramp) {
            if s.j == j && s.phase == phase {
                return Some(s);
            }
            if s.j > j {
                break;
            }
        }
        None
    }

    /// Per-step ratio `c_j` of `a_n^2` on the ramps of period `j`, chosen so
    /// that `c_j^(m_j + 1) = 1/4` closes the gap between the plateaus in
    /// `m_j + 1` steps (`m_j` = ramp length; an empty ramp jumps in one step).
    fn ramp_ratio(&self, j: u32) -> f64 {
        let m = self.ramp.len_at(j);
        0.25_f64.powf(1.0 / (m as f64 + 1.0))
    }

    fn a_at(&self, n: u64) -> f64 {
        let block = self.block_at(n);
        match block.phase {
            BlockPhase::UnitPlateau => 1.0,
            BlockPhase::HalfPlateau => 0.5,
            BlockPhase::DownRamp => {
                // a_n^2 = c_j^t for the t-th ramp index
                let t = (n - block.start + 1) as f64;
                let log_c = self.ramp_ratio(block.j).ln();
                (0.5 * t * log_c).exp()
            }
            BlockPhase::UpRamp => {
                // a_n^2 = (1/4) c_j^(-t)
                let t = (n - block.start + 1) as f64;
                let log_c = self.ramp_ratio(block.j).ln();
                (0.5 * (0.25_f64.ln() - t * log_c)).exp()
            }
        }
    }
}

// ---------------------------------------------------------------------------
// The models.
// ---------------------------------------------------------------------------

/// Decaying perturbation applied to a periodic base sequence:
/// `pert(n) = amplitude * n^(-power)` is added to `b_n` and multiplied into
/// `a_n` as `a_n * (1 + pert(n))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decay {
    pub amplitude: f64,
    pub power: f64,
}

impl Decay {
    fn value(&self, n: u64) -> f64 {
        self.amplitude * (n as f64).powf(-self.power)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Constant {
        a: f64,
        b: f64,
    },
    Szwarc {
        beta: f64,
    },
    Anderson {
        seed: u64,
    },
    StepBlocks {
        layout: BlockLayout,
    },
    RampedBlocks {
        layout: BlockLayout,
    },
    Fibonacci {
        theta: f64,
    },
    Periodic {
        a: Vec<f64>,
        b: Vec<f64>,
        perturbation: Option<Decay>,
    },
}

/// A deterministic Jacobi parameter sequence `(a_n, b_n)`, `n >= 1`, with
/// declared bounds. Immutable and safe to query concurrently.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiSequence {
    kind: Kind,
    bounds: SequenceBounds,
}

impl JacobiSequence {
    /// The free half-line sequence `a = 1`, `b = 0`.
    pub fn free() -> Self {
        JacobiSequence::constant(1.0, 0.0).expect("free model parameters are valid")
    }

    /// Constant sequence `a_n = a > 0`, `b_n = b`.
    pub fn constant(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::invalid("constant model requires finite a > 0"));
        }
        Ok(JacobiSequence {
            kind: Kind::Constant { a, b },
            bounds: SequenceBounds {
                a_min: a,
                a_max: a,
                b_max: b.abs(),
            },
        })
    }

    /// Sparse diagonal bumps on a free background: `a = 1`; `b_1 = beta`,
    /// `b_n = 3/2` when `n = k^2` for some `k >= 2`, and `b_n = 0` otherwise.
    pub fn szwarc(beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::invalid("szwarc model requires finite beta"));
        }
        Ok(JacobiSequence {
            kind: Kind::Szwarc { beta },
            bounds: SequenceBounds {
                a_min: 1.0,
                a_max: 1.0,
                b_max: beta.abs().max(1.5),
            },
        })
    }

    /// Anderson model: `a = 1/2`, `b_n` i.i.d. uniform on `[-1, 1)`, drawn
    /// by counter-mode hashing of `(seed, n)` so any index is O(1).
    pub fn anderson(seed: u64) -> Self {
        JacobiSequence {
            kind: Kind::Anderson { seed },
            bounds: SequenceBounds {
                a_min: 0.5,
                a_max: 0.5,
                b_max: 1.0,
            },
        }
    }

    /// Plateau block model with sharp steps: `a = 1` on blocks `A_j`,
    /// `a = 1/2` on blocks `C_j`, `b = 0`, lengths given by `growth`.
    pub fn step_blocks(growth: PlateauGrowth) -> Result<Self> {
        let layout = BlockLayout::new(growth, RampGrowth::Fixed { len: 0 })?;
        Ok(JacobiSequence {
            kind: Kind::StepBlocks { layout },
            bounds: SequenceBounds {
                a_min: 0.5,
                a_max: 1.0,
                b_max: 0.0,
            },
        })
    }

    /// Plateau block model with geometric interpolation ramps `B_j` (down)
    /// and `D_j` (up) of length `ramp` between the plateaus; on a ramp the
    /// squared parameter moves by the constant factor `c_j` per step with
    /// `c_j^(m_j + 1) = 1/4`.
    pub fn ramped_blocks(growth: PlateauGrowth, ramp: RampGrowth) -> Result<Self> {
        let layout = BlockLayout::new(growth, ramp)?;
        Ok(JacobiSequence {
            kind: Kind::RampedBlocks { layout },
            bounds: SequenceBounds {
                a_min: 0.5,
                a_max: 1.0,
                b_max: 0.0,
            },
        })
    }

    /// Fibonacci potential: `a = 1`,
    /// `b_n = 1` iff `frac(n * alpha + theta)` lies in `[1 - alpha, 1)`
    /// with `alpha = (sqrt(5) - 1)/2`.
    pub fn fibonacci(theta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&theta) {
            return Err(Error::invalid("fibonacci phase must lie in [0, 1)"));
        }
        Ok(JacobiSequence {
            kind: Kind::Fibonacci { theta },
            bounds: SequenceBounds {
                a_min: 1.0,
                a_max: 1.0,
                b_max: 1.0,
            },
        })
    }

    /// Periodic sequence repeating the given parameter lists, optionally
    /// perturbed by a decaying sequence (added to `b`, multiplied into `a`).
    pub fn periodic(a: Vec<f64>, b: Vec<f64>, perturbation: Option<Decay>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::invalid(
                "periodic model requires non-empty parameter lists of equal length",
            ));
        }
        if a.iter().any(|v| !(*v > 0.0 && v.is_finite()))
            || b.iter().any(|v| !v.is_finite())
        {
            return Err(Error::invalid("periodic model requires finite a > 0, finite b"));
        }
        let mut a_min = f64::INFINITY;
        let mut a_max: f64 = 0.0;
        let mut b_max: f64 = 0.0;
        for (&ai, &bi) in a.iter().zip(&b) {
            a_min = a_min.min(ai);
            a_max = a_max.max(ai);
            b_max = b_max.max(bi.abs());
        }
        if let Some(p) = perturbation {
            if !(p.amplitude.abs() < 1.0 && p.power > 0.0) {
                return Err(Error::invalid(
                    "perturbation requires |amplitude| < 1 and power > 0",
                ));
            }
            let amp = p.amplitude.abs();
            a_min *= 1.0 - amp;
            a_max *= 1.0 + amp;
            b_max += amp;
        }
        Ok(JacobiSequence {
            kind: Kind::Periodic { a, b, perturbation },
            bounds: SequenceBounds { a_min, a_max, b_max },
        })
    }

    /// Declared envelope of the sequence.
    pub fn bounds(&self) -> SequenceBounds {
        self.bounds
    }

    /// Off-diagonal entry `a_n`, `n >= 1`.
    pub fn a_at(&self, n: u64) -> f64 {
        debug_assert!(n >= 1, "sequence indices are 1-based");
        match &self.kind {
            Kind::Constant { a, .. } => *a,
            Kind::Szwarc { .. } | Kind::Fibonacci { .. } => 1.0,
            Kind::Anderson { .. } => 0.5,
            Kind::StepBlocks { layout } | Kind::RampedBlocks { layout } => layout.a_at(n),
            Kind::Periodic { a, perturbation, .. } => {
                let base = a[((n - 1) % a.len() as u64) as usize];
                match perturbation {
                    Some(p) => base * (1.0 + p.value(n)),
                    None => base,
                }
            }
        }
    }

    /// Diagonal entry `b_n`, `n >= 1`.
    pub fn b_at(&self, n: u64) -> f64 {
        debug_assert!(n >= 1, "sequence indices are 1-based");
        match &self.kind {
            Kind::Constant { b, .. } => *b,
            Kind::Szwarc { beta } => {
                if n == 1 {
                    *beta
                } else if is_perfect_square(n) {
                    1.5
                } else {
                    0.0
                }
            }
            Kind::Anderson { seed } => rng::uniform_pm1_at(*seed, n),
            Kind::StepBlocks { .. } | Kind::RampedBlocks { .. } => 0.0,
            Kind::Fibonacci { theta } => {
                let frac = ((n as f64) * FIBONACCI_ALPHA + theta).fract();
                if frac >= 1.0 - FIBONACCI_ALPHA {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Periodic { b, perturbation, .. } => {
                let base = b[((n - 1) % b.len() as u64) as usize];
                match perturbation {
                    Some(p) => base + p.value(n),
                    None => base,
                }
            }
        }
    }

    /// Both parameters at index `n`.
    pub fn params_at(&self, n: u64) -> (f64, f64) {
        (self.a_at(n), self.b_at(n))
    }

    /// Block containing index `n` (block models only).
    pub fn block_at(&self, n: u64) -> Option<BlockInfo> {
        self.layout().map(|l| l.block_at(n))
    }

    /// Span of the phase-`phase` block of period `j`, if it has positive
    /// length (block models only).
    pub fn block_span(&self, j: u32, phase: BlockPhase) -> Option<BlockInfo> {
        self.layout().and_then(|l| l.span_of(j, phase))
    }

    /// Center index of the half plateau `C_j` (block models only).
    pub fn half_plateau_center(&self, j: u32) -> Option<u64> {
        self.block_span(j, BlockPhase::HalfPlateau).map(|s| s.center())
    }

    /// Ramp ratio `c_j` (block models only; the step models report the
    /// one-step value `1/4`).
    pub fn ramp_ratio(&self, j: u32) -> Option<f64> {
        self.layout().map(|l| l.ramp_ratio(j))
    }

    fn layout(&self) -> Option<&BlockLayout> {
        match &self.kind {
            Kind::StepBlocks { layout } | Kind::RampedBlocks { layout } => Some(layout),
            _ => None,
        }
    }
}

fn is_perfect_square(n: u64) -> bool {
    let r = (n as f64).sqrt().round() as u64;
    r * r == n || (r + 1) * (r + 1) == n || (r > 0 && (r - 1) * (r - 1) == n)
}
