//! Shortest planar Dubins curves.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

/// Planar pose; heading is CCW from +x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl PlanarPose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Like [`normalize_angle`], but folds values within `1e-12` of a full
/// turn back to zero so round-off never produces a spurious loop.
fn mod2pi(theta: f64) -> f64 {
    let r = normalize_angle(theta);
    if TAU - r < 1e-12 {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Turn {
    Left,
    Straight,
    Right,
}

impl Turn {
    /// Signed curvature multiplier: +1 left (CCW), -1 right.
    pub fn sign(self) -> f64 {
        match self {
            Self::Left => 1.0,
            Self::Straight => 0.0,
            Self::Right => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DubinsWord {
    Lsl,
    Rsr,
    Lsr,
    Rsl,
    Rlr,
    Lrl,
}

impl DubinsWord {
    pub const ALL: [DubinsWord; 6] = [Self::Lsl, Self::Rsr, Self::Lsr, Self::Rsl, Self::Rlr, Self::Lrl];
    pub const CSC: [DubinsWord; 4] = [Self::Lsl, Self::Rsr, Self::Lsr, Self::Rsl];

    pub fn turns(self) -> [Turn; 3] {
        use Turn::*;
        match self {
            Self::Lsl => [Left, Straight, Left],
            Self::Rsr => [Right, Straight, Right],
            Self::Lsr => [Left, Straight, Right],
            Self::Rsl => [Right, Straight, Left],
            Self::Rlr => [Right, Left, Right],
            Self::Lrl => [Left, Right, Left],
        }
    }
}

/// Quantities shared by all six words, in radius-normalized units.
struct Intermediate {
    alpha: f64,
    beta: f64,
    d: f64,
    sa: f64,
    sb: f64,
    ca: f64,
    cb: f64,
    c_ab: f64,
    d_sq: f64,
}

impl Intermediate {
    fn new(q0: PlanarPose, q1: PlanarPose, radius: f64) -> Self {
        let dx = q1.x - q0.x;
        let dy = q1.y - q0.y;
        let d = dx.hypot(dy) / radius;
        let phi = mod2pi(dy.atan2(dx));
        let alpha = mod2pi(q0.theta - phi);
        let beta = mod2pi(q1.theta - phi);
        Self {
            alpha,
            beta,
            d,
            sa: alpha.sin(),
            sb: beta.sin(),
            ca: alpha.cos(),
            cb: beta.cos(),
            c_ab: (alpha - beta).cos(),
            d_sq: d * d,
        }
    }

    fn word(&self, word: DubinsWord) -> Option<[f64; 3]> {
        let Self { alpha, beta, d, sa, sb, ca, cb, c_ab, d_sq } = *self;
        match word {
            DubinsWord::Lsl => {
                let p_sq = 2.0 + d_sq - 2.0 * c_ab + 2.0 * d * (sa - sb);
                (p_sq >= 0.0).then(|| {
                    let tmp = (cb - ca).atan2(d + sa - sb);
                    [mod2pi(tmp - alpha), p_sq.sqrt(), mod2pi(beta - tmp)]
                })
            }
            DubinsWord::Rsr => {
                let p_sq = 2.0 + d_sq - 2.0 * c_ab + 2.0 * d * (sb - sa);
                (p_sq >= 0.0).then(|| {
                    let tmp = (ca - cb).atan2(d - sa + sb);
                    [mod2pi(alpha - tmp), p_sq.sqrt(), mod2pi(tmp - beta)]
                })
            }
            DubinsWord::Lsr => {
                let p_sq = -2.0 + d_sq + 2.0 * c_ab + 2.0 * d * (sa + sb);
                (p_sq >= 0.0).then(|| {
                    let p = p_sq.sqrt();
                    let tmp = (-ca - cb).atan2(d + sa + sb) - (-2.0f64).atan2(p);
                    [mod2pi(tmp - alpha), p, mod2pi(tmp - beta)]
                })
            }
            DubinsWord::Rsl => {
                let p_sq = -2.0 + d_sq + 2.0 * c_ab - 2.0 * d * (sa + sb);
                (p_sq >= 0.0).then(|| {
                    let p = p_sq.sqrt();
                    let tmp = (ca + cb).atan2(d - sa - sb) - 2.0f64.atan2(p);
                    [mod2pi(alpha - tmp), p, mod2pi(beta - tmp)]
                })
            }
            DubinsWord::Rlr => {
                let tmp = (6.0 - d_sq + 2.0 * c_ab + 2.0 * d * (sa - sb)) / 8.0;
                (tmp.abs() <= 1.0).then(|| {
                    let p = mod2pi(TAU - tmp.acos());
                    let phi = (ca - cb).atan2(d - sa + sb);
                    let t = mod2pi(alpha - phi + p / 2.0);
                    [t, p, mod2pi(alpha - beta - t + p)]
                })
            }
            DubinsWord::Lrl => {
                let tmp = (6.0 - d_sq + 2.0 * c_ab + 2.0 * d * (sb - sa)) / 8.0;
                (tmp.abs() <= 1.0).then(|| {
                    let p = mod2pi(TAU - tmp.acos());
                    let phi = (ca - cb).atan2(d + sa - sb);
                    let t = mod2pi(-alpha - phi + p / 2.0);
                    [t, p, mod2pi(beta - alpha - t + p)]
                })
            }
        }
    }

    /// Neither pair of same-turn circles is close enough (4R between
    /// centers) to be chained by a third circle, so no CCC word exists.
    fn is_long_case(&self) -> bool {
        let left = 2.0 + self.d_sq - 2.0 * self.c_ab + 2.0 * self.d * (self.sa - self.sb);
        let right = 2.0 + self.d_sq - 2.0 * self.c_ab + 2.0 * self.d * (self.sb - self.sa);
        left > 16.0 && right > 16.0
    }
}

/// A planar Dubins curve: three segments of a word with normalized
/// parameters (angles for arcs, length/radius for the straight).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarDubins {
    pub start: PlanarPose,
    pub radius: f64,
    pub word: DubinsWord,
    pub params: [f64; 3],
}

impl PlanarDubins {
    pub fn length(&self) -> f64 {
        self.params.iter().sum::<f64>() * self.radius
    }

    pub fn segment_lengths(&self) -> [f64; 3] {
        self.params.map(|p| p * self.radius)
    }

    /// Pose after travelling `s` meters along the curve (clamped to its length).
    pub fn sample(&self, s: f64) -> PlanarPose {
        let mut t = (s / self.radius).max(0.0);
        let mut q = PlanarPose::new(0.0, 0.0, self.start.theta);
        for (turn, p) in self.word.turns().into_iter().zip(self.params) {
            let step = t.min(p);
            q = advance_normalized(q, step, turn);
            t -= step;
            if t <= 0.0 {
                break;
            }
        }
        PlanarPose::new(self.start.x + q.x * self.radius, self.start.y + q.y * self.radius, normalize_angle(q.theta))
    }

    pub fn end(&self) -> PlanarPose {
        self.sample(self.length())
    }
}

fn advance_normalized(q: PlanarPose, t: f64, turn: Turn) -> PlanarPose {
    let (st, ct) = q.theta.sin_cos();
    match turn {
        Turn::Left => PlanarPose::new(q.x + (q.theta + t).sin() - st, q.y - (q.theta + t).cos() + ct, q.theta + t),
        Turn::Right => PlanarPose::new(q.x - (q.theta - t).sin() + st, q.y + (q.theta - t).cos() - ct, q.theta - t),
        Turn::Straight => PlanarPose::new(q.x + t * ct, q.y + t * st, q.theta),
    }
}

fn is_identical(q0: PlanarPose, q1: PlanarPose) -> bool {
    let dtheta = mod2pi(q1.theta - q0.theta);
    (q1.x - q0.x).hypot(q1.y - q0.y) < 1e-12 && (dtheta < 1e-12 || TAU - dtheta < 1e-12)
}

fn best_of(q0: PlanarPose, q1: PlanarPose, radius: f64, words: &[DubinsWord]) -> PlanarDubins {
    if is_identical(q0, q1) {
        return PlanarDubins { start: q0, radius, word: DubinsWord::Lsl, params: [0.0; 3] };
    }
    let inter = Intermediate::new(q0, q1, radius);
    let mut best: Option<PlanarDubins> = None;
    for &word in words {
        if let Some(params) = inter.word(word) {
            let cand = PlanarDubins { start: q0, radius, word, params };
            if best.is_none_or(|b| cand.length() < b.length()) {
                best = Some(cand);
            }
        }
    }
    // CSC words always exist for at least one of the four combinations
    best.expect("a Dubins path exists for every pose pair")
}

/// Evaluates one word, or `None` if it has no solution for this pair.
pub fn dubins_word(q0: PlanarPose, q1: PlanarPose, radius: f64, word: DubinsWord) -> Option<PlanarDubins> {
    Intermediate::new(q0, q1, radius)
        .word(word)
        .map(|params| PlanarDubins { start: q0, radius, word, params })
}

/// Minimum over all six words.
pub fn dubins_exhaustive(q0: PlanarPose, q1: PlanarPose, radius: f64) -> PlanarDubins {
    best_of(q0, q1, radius, &DubinsWord::ALL)
}

/// Shortest Dubins curve with turn radius `radius`.
///
/// Pose pairs whose same-turn circles are more than 4R apart skip the CCC
/// words, which have no solution there.
pub fn dubins_shortest_2d(q0: PlanarPose, q1: PlanarPose, radius: f64) -> PlanarDubins {
    assert!(radius > 0.0, "turn radius must be positive");
    let inter = Intermediate::new(q0, q1, radius);
    if inter.is_long_case() {
        best_of(q0, q1, radius, &DubinsWord::CSC)
    } else {
        best_of(q0, q1, radius, &DubinsWord::ALL)
    }
}
