//! Tracking references and kinematic replay.
//!
//! The reference curvature is the forward moving average of the piecewise
//! constant path curvature over a look-ahead window `l_bar`:
//!
//! ```text
//! κ_ref(s) = (1/l̄) ∫_s^{s+l̄} κ(u) du
//! ```
//!
//! When the segment after the current one is at least `l_bar` long this is
//! exactly `ψ κ_i + (1 − ψ) κ_{i+1}` with `ψ = min(1, l / l̄)` and `l` the
//! arc length left on the current segment. Beyond the path end the curvature
//! continues with a terminal value, usually the goal circle's.

use serde::{Deserialize, Serialize};

use crate::dubins::{AirplanePath, AirplaneState};
use crate::safe_sets::LoiterCircle;

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const COARSE_STEP: f64 = 1.0;
const REFINE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingReference {
    /// Closest point on the path.
    pub p: [f64; 3],
    /// Unit 3D tangent.
    pub tangent: [f64; 3],
    /// Blended horizontal curvature, 1/m.
    pub kappa: f64,
    /// Arc position of `p`.
    pub s: f64,
}

/// One line of a reference stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSample {
    pub t: f64,
    pub p: [f64; 3],
    pub tangent: [f64; 3],
    pub kappa: f64,
}

fn dist2(state: &AirplaneState, q: [f64; 3]) -> f64 {
    let [x, y, z] = state.position();
    (x - q[0]).powi(2) + (y - q[1]).powi(2) + (z - q[2]).powi(2)
}

fn dist2_at(path: &AirplanePath, s: f64, q: [f64; 3]) -> f64 {
    dist2(&path.sample(s).expect("s within range"), q)
}

/// Arc position of the point on `path` closest to `query`.
///
/// Coarse 1 m sampling picks a bracket, golden-section search refines it.
/// Returns `None` for an empty path.
pub fn closest_point(path: &AirplanePath, query: [f64; 3]) -> Option<f64> {
    if path.is_empty() {
        return None;
    }
    let total = path.length();
    let n = ((total / COARSE_STEP).ceil() as usize).max(1);
    let at = |k: usize| if k == n { total } else { total * k as f64 / n as f64 };

    let (mut best_k, mut best_d) = (0, f64::INFINITY);
    for k in 0..=n {
        let d = dist2_at(path, at(k), query);
        if d < best_d {
            best_k = k;
            best_d = d;
        }
    }

    let (mut a, mut b) = (at(best_k.saturating_sub(1)), at((best_k + 1).min(n)));
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (dist2_at(path, c, query), dist2_at(path, d, query));
    while b - a > REFINE_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = dist2_at(path, c, query);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = dist2_at(path, d, query);
        }
    }
    let s = 0.5 * (a + b);
    Some(if dist2_at(path, s, query) <= best_d { s } else { at(best_k) })
}

/// Blended curvature at arc position `s`; `terminal_kappa` applies past the end.
pub fn blended_curvature(path: &AirplanePath, s: f64, l_bar: f64, terminal_kappa: f64) -> f64 {
    assert!(l_bar > 0.0, "look-ahead must be positive");
    let segments = path.segments();
    if segments.is_empty() {
        return terminal_kappa;
    }
    let i = path.segment_index(s);
    let remaining = path.segment_offset(i) + segments[i].length - s;
    if remaining >= l_bar {
        return segments[i].kappa;
    }
    let (next_kappa, next_len) = segments.get(i + 1).map_or((terminal_kappa, f64::INFINITY), |n| (n.kappa, n.length));
    if remaining + next_len >= l_bar {
        let psi = remaining.max(0.0) / l_bar;
        return psi * segments[i].kappa + (1.0 - psi) * next_kappa;
    }

    let end = s + l_bar;
    let mut integral = 0.0;
    for (i, seg) in path.segments().iter().enumerate() {
        let lo = path.segment_offset(i);
        let overlap = (lo + seg.length).min(end) - lo.max(s);
        if overlap > 0.0 {
            integral += seg.kappa * overlap;
        }
    }
    let tail = end - s.max(path.length());
    if tail > 0.0 {
        integral += terminal_kappa * tail;
    }
    integral / l_bar
}

/// Reference at a known arc position.
pub fn reference_at(path: &AirplanePath, s: f64, l_bar: f64, terminal_kappa: f64) -> Option<TrackingReference> {
    if path.is_empty() {
        return None;
    }
    let s = s.clamp(0.0, path.length());
    let state = path.sample(s).ok()?;
    let (_, gamma) = path.curvature_and_gamma(s).ok()?;
    let (sg, cg) = gamma.sin_cos();
    let (st, ct) = state.theta.sin_cos();
    Some(TrackingReference {
        p: state.position(),
        tangent: [cg * ct, cg * st, sg],
        kappa: blended_curvature(path, s, l_bar, terminal_kappa),
        s,
    })
}

/// Reference for a vehicle at `query`. With a goal circle attached, the
/// curvature blends into the circle's curvature at the end of the path.
pub fn reference(
    path: &AirplanePath,
    query: [f64; 3],
    l_bar: f64,
    goal: Option<&LoiterCircle>,
) -> Option<TrackingReference> {
    let s = closest_point(path, query)?;
    reference_at(path, s, l_bar, goal.map_or(0.0, LoiterCircle::curvature))
}

/// Path followed by a loiter continuation of `loiter_s` seconds at `speed`.
fn with_loiter(path: &AirplanePath, goal: &LoiterCircle, speed: f64, loiter_s: f64) -> AirplanePath {
    let from = path.end().unwrap_or_else(|| goal.state_at(0.0));
    let laps = loiter_s * speed / goal.period();
    if laps <= 0.0 {
        return path.clone();
    }
    AirplanePath::concat([path.clone(), goal.orbit(from, laps)])
}

fn arc_positions(total: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        let s = k as f64 * step;
        if s >= total - 1e-9 {
            out.push(total);
            break;
        }
        out.push(s);
        k += 1;
    }
    out
}

/// States every `speed·dt` meters, the last one clamped to the path end.
/// When `goal` is given the vehicle keeps circling it for `loiter_s` seconds.
pub fn replay(
    path: &AirplanePath,
    speed: f64,
    dt: f64,
    goal: Option<(&LoiterCircle, f64)>,
) -> Vec<AirplaneState> {
    assert!(speed > 0.0 && dt > 0.0, "speed and dt must be positive");
    let full = match goal {
        Some((circle, loiter_s)) => with_loiter(path, circle, speed, loiter_s),
        None => path.clone(),
    };
    if full.is_empty() {
        return Vec::new();
    }
    arc_positions(full.length(), speed * dt)
        .into_iter()
        .map(|s| full.sample(s).expect("s within range"))
        .collect()
}

/// Tracking references along a replay, one per time step.
pub fn reference_stream(
    path: &AirplanePath,
    speed: f64,
    dt: f64,
    l_bar: f64,
    goal: Option<(&LoiterCircle, f64)>,
) -> Vec<ReferenceSample> {
    assert!(speed > 0.0 && dt > 0.0, "speed and dt must be positive");
    let terminal = goal.map_or(0.0, |(c, _)| c.curvature());
    let full = match goal {
        Some((circle, loiter_s)) => with_loiter(path, circle, speed, loiter_s),
        None => path.clone(),
    };
    if full.is_empty() {
        return Vec::new();
    }
    arc_positions(full.length(), speed * dt)
        .into_iter()
        .filter_map(|s| {
            let r = reference_at(&full, s, l_bar, terminal)?;
            Some(ReferenceSample { t: s / speed, p: r.p, tangent: r.tangent, kappa: r.kappa })
        })
        .collect()
}

/// Serializes samples as JSON lines.
pub fn to_json_lines(samples: &[ReferenceSample]) -> String {
    let mut out = String::new();
    for s in samples {
        out.push_str(&serde_json::to_string(s).expect("sample serializes"));
        out.push('\n');
    }
    out
}
