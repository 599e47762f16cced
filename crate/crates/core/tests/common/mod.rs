//! Brute-force reference implementations shared by the integration tests.
//!
//! Nothing here calls into the library's own kernels: grids are passed as
//! plain slices with their dimensions, and Dubins lengths come from the
//! tangent-circle construction instead of the closed-form word formulas.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;

/// Plain grid description; row 0 is the southern row.
#[derive(Debug, Clone, Copy)]
pub struct Dims {
    pub cols: usize,
    pub rows: usize,
    pub cell: f64,
    pub origin: [f64; 2],
}

impl Dims {
    pub fn center(&self, c: usize, r: usize) -> [f64; 2] {
        [self.origin[0] + c as f64 * self.cell, self.origin[1] + r as f64 * self.cell]
    }
}

/// `max_{|m'-m| <= d} H(m') + sqrt(d² - |m'-m|²)` by scanning every cell
/// pair within a square window.
pub fn dilation(h: &[f64], dims: Dims, d: f64) -> Vec<f64> {
    let reach = (d / dims.cell).ceil() as isize + 1;
    let mut out = vec![f64::NEG_INFINITY; h.len()];
    for r in 0..dims.rows as isize {
        for c in 0..dims.cols as isize {
            let mut best = f64::NEG_INFINITY;
            for r2 in (r - reach).max(0)..=(r + reach).min(dims.rows as isize - 1) {
                for c2 in (c - reach).max(0)..=(c + reach).min(dims.cols as isize - 1) {
                    let dx = (c2 - c) as f64 * dims.cell;
                    let dy = (r2 - r) as f64 * dims.cell;
                    let q = dx * dx + dy * dy;
                    if q <= d * d {
                        let v = h[(r2 as usize) * dims.cols + c2 as usize];
                        best = best.max(v + (d * d - q).max(0.0).sqrt());
                    }
                }
            }
            out[(r as usize) * dims.cols + c as usize] = best;
        }
    }
    out
}

/// Disk maximum (`take_max`) or minimum over cell centers within `radius`.
pub fn disk_extreme(v: &[f64], dims: Dims, radius: f64, take_max: bool) -> Vec<f64> {
    let reach = (radius / dims.cell).ceil() as isize + 1;
    let mut out = vec![0.0; v.len()];
    for r in 0..dims.rows as isize {
        for c in 0..dims.cols as isize {
            let mut acc = if take_max { f64::NEG_INFINITY } else { f64::INFINITY };
            for r2 in (r - reach).max(0)..=(r + reach).min(dims.rows as isize - 1) {
                for c2 in (c - reach).max(0)..=(c + reach).min(dims.cols as isize - 1) {
                    let dx = (c2 - c) as f64 * dims.cell;
                    let dy = (r2 - r) as f64 * dims.cell;
                    if dx * dx + dy * dy <= radius * radius {
                        let x = v[(r2 as usize) * dims.cols + c2 as usize];
                        acc = if take_max { acc.max(x) } else { acc.min(x) };
                    }
                }
            }
            out[(r as usize) * dims.cols + c as usize] = acc;
        }
    }
    out
}

/// Textbook bilinear interpolation; `None` off the grid.
pub fn bilinear(v: &[f64], dims: Dims, x: f64, y: f64) -> Option<f64> {
    let fx = (x - dims.origin[0]) / dims.cell;
    let fy = (y - dims.origin[1]) / dims.cell;
    let max_x = (dims.cols - 1) as f64;
    let max_y = (dims.rows - 1) as f64;
    if !(0.0..=max_x).contains(&fx) || !(0.0..=max_y).contains(&fy) {
        return None;
    }
    let c0 = (fx.floor() as usize).min(dims.cols - 2);
    let r0 = (fy.floor() as usize).min(dims.rows - 2);
    let tx = fx - c0 as f64;
    let ty = fy - r0 as f64;
    let at = |c: usize, r: usize| v[r * dims.cols + c];
    Some(
        at(c0, r0) * (1.0 - tx) * (1.0 - ty)
            + at(c0 + 1, r0) * tx * (1.0 - ty)
            + at(c0, r0 + 1) * (1.0 - tx) * ty
            + at(c0 + 1, r0 + 1) * tx * ty,
    )
}

/// Samples `n` points around a level circle and checks strict corridor
/// containment against interpolated clearance surfaces.
pub fn circle_clear(
    center: [f64; 3],
    radius: f64,
    d_minus: &[f64],
    d_plus: &[f64],
    dims: Dims,
    n: usize,
) -> bool {
    (0..n).all(|i| {
        let phi = TAU * i as f64 / n as f64;
        let x = center[0] + radius * phi.cos();
        let y = center[1] + radius * phi.sin();
        match (bilinear(d_minus, dims, x, y), bilinear(d_plus, dims, x, y)) {
            (Some(lo), Some(hi)) => lo < center[2] && center[2] < hi,
            _ => false,
        }
    })
}

pub fn random_heights(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.0..scale)).collect()
}

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn left_center(p: [f64; 3], r: f64) -> [f64; 2] {
    [p[0] - r * p[2].sin(), p[1] + r * p[2].cos()]
}

fn right_center(p: [f64; 3], r: f64) -> [f64; 2] {
    [p[0] + r * p[2].sin(), p[1] - r * p[2].cos()]
}

/// Arc length turning from heading `a` to heading `b`.
fn arc(a: f64, b: f64, left: bool, r: f64) -> f64 {
    if left {
        wrap(b - a) * r
    } else {
        wrap(a - b) * r
    }
}

/// Heading of the tangent at point `p` on a circle centered at `c`.
fn tangent_heading(p: [f64; 2], c: [f64; 2], left: bool) -> f64 {
    let polar = (p[1] - c[1]).atan2(p[0] - c[0]);
    if left {
        polar + FRAC_PI_2
    } else {
        polar - FRAC_PI_2
    }
}

/// Shortest planar Dubins length between poses `(x, y, θ)` from explicit
/// turning circles, tangent lines and three-circle chains.
pub fn dubins_length(q0: [f64; 3], q1: [f64; 3], r: f64) -> f64 {
    let mut best = f64::INFINITY;
    for &(l0, l1) in &[(true, true), (false, false), (true, false), (false, true)] {
        let c0 = if l0 { left_center(q0, r) } else { right_center(q0, r) };
        let c1 = if l1 { left_center(q1, r) } else { right_center(q1, r) };
        let dx = c1[0] - c0[0];
        let dy = c1[1] - c0[1];
        let dist = dx.hypot(dy);
        let phi = dy.atan2(dx);
        let (psi, straight) = if l0 == l1 {
            (phi, dist)
        } else {
            if dist < 2.0 * r {
                continue;
            }
            let l = (dist * dist - 4.0 * r * r).max(0.0).sqrt();
            let tilt = (2.0 * r).atan2(l);
            (if l0 { phi + tilt } else { phi - tilt }, l)
        };
        let len = arc(q0[2], psi, l0, r) + straight + arc(psi, q1[2], l1, r);
        best = best.min(len);
    }
    for &outer_left in &[true, false] {
        let c0 = if outer_left { left_center(q0, r) } else { right_center(q0, r) };
        let c1 = if outer_left { left_center(q1, r) } else { right_center(q1, r) };
        let dx = c1[0] - c0[0];
        let dy = c1[1] - c0[1];
        let dist = dx.hypot(dy);
        if dist > 4.0 * r {
            continue;
        }
        let h = (4.0 * r * r - dist * dist / 4.0).max(0.0).sqrt();
        let mid = [(c0[0] + c1[0]) / 2.0, (c0[1] + c1[1]) / 2.0];
        let (nx, ny) = if dist > 0.0 { (-dy / dist, dx / dist) } else { (0.0, 1.0) };
        for sign in [1.0, -1.0] {
            let cm = [mid[0] + sign * h * nx, mid[1] + sign * h * ny];
            let t0 = [(c0[0] + cm[0]) / 2.0, (c0[1] + cm[1]) / 2.0];
            let t1 = [(cm[0] + c1[0]) / 2.0, (cm[1] + c1[1]) / 2.0];
            let ha = tangent_heading(t0, c0, outer_left);
            let hb = tangent_heading(t1, c1, outer_left);
            let len = arc(q0[2], ha, outer_left, r) + arc(ha, hb, !outer_left, r) + arc(hb, q1[2], outer_left, r);
            best = best.min(len);
        }
    }
    best
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}
