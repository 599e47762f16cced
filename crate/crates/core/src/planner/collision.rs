use crate::dubins::{AirplanePath, VehicleLimits};
use crate::terrain::{GridFrame, OffsetSurface};

/// Strict corridor containment `D⁻ < z < D⁺` at arc-length steps no larger
/// than `ds` (endpoints included). Samples off the map are in collision.
pub fn path_collision_free(path: &AirplanePath, d_plus: &OffsetSurface, d_minus: &OffsetSurface, ds: f64) -> bool {
    assert!(ds > 0.0, "collision-check resolution must be positive");
    if path.is_empty() {
        return true;
    }
    let total = path.length();
    let n = ((total / ds).ceil() as usize).max(1);
    (0..=n).all(|k| {
        let s = if k == n { total } else { total * k as f64 / n as f64 };
        let st = path.sample(s).expect("s within range");
        match (d_minus.interpolate(st.x, st.y), d_plus.interpolate(st.x, st.y)) {
            (Some(lo), Some(hi)) => lo < st.z && st.z < hi,
            _ => false,
        }
    })
}

/// Per-node bound on the gradient norm of the bilinear interpolant of
/// `values` over every cell within `reach` cells. Nodata gives infinity.
fn local_slopes(frame: &GridFrame, values: &[f64], reach: usize) -> Vec<f64> {
    let (cols, rows) = (frame.n_cols, frame.n_rows);
    let cs = frame.cell_size;
    let mut cell = vec![0.0; (cols - 1) * (rows - 1)];
    for r in 0..rows - 1 {
        for c in 0..cols - 1 {
            let v = |dc: usize, dr: usize| values[frame.index(c + dc, r + dr)];
            let gx = (v(1, 0) - v(0, 0)).abs().max((v(1, 1) - v(0, 1)).abs()) / cs;
            let gy = (v(0, 1) - v(0, 0)).abs().max((v(1, 1) - v(1, 0)).abs()) / cs;
            let g = gx.hypot(gy);
            cell[r * (cols - 1) + c] = if g.is_nan() { f64::INFINITY } else { g };
        }
    }
    let mut out = vec![0.0; cols * rows];
    for r in 0..rows {
        for c in 0..cols {
            let mut m: f64 = 0.0;
            for rr in r.saturating_sub(reach)..(r + reach).min(rows - 1) {
                for cc in c.saturating_sub(reach)..(c + reach).min(cols - 1) {
                    m = m.max(cell[rr * (cols - 1) + cc]);
                }
            }
            out[frame.index(c, r)] = m;
        }
    }
    out
}

/// Corridor check whose verdict covers the continuous path between samples.
///
/// For consecutive samples `a`, `b` spaced `h` apart the clearance
/// `g = z - D⁻` (and `D⁺ - z`) changes at most at rate `k = sin γ_lim + L`
/// with `L` a local gradient bound of the interpolated surface. The path is
/// accepted when `g(a) > 0`, `g(b) > 0` and `g(a) + g(b) > k h`.
#[derive(Debug, Clone)]
pub struct CorridorChecker<'a> {
    d_plus: &'a OffsetSurface,
    d_minus: &'a OffsetSurface,
    slope_plus: Vec<f64>,
    slope_minus: Vec<f64>,
    ds: f64,
    radius: f64,
    climb: f64,
}

impl<'a> CorridorChecker<'a> {
    pub fn new(d_plus: &'a OffsetSurface, d_minus: &'a OffsetSurface, ds: f64, limits: &VehicleLimits) -> Self {
        assert!(ds > 0.0, "collision-check resolution must be positive");
        let frame = d_plus.frame();
        let reach = (ds / frame.cell_size + std::f64::consts::FRAC_1_SQRT_2).ceil() as usize;
        Self {
            d_plus,
            d_minus,
            slope_plus: local_slopes(frame, d_plus.values(), reach),
            slope_minus: local_slopes(frame, d_minus.values(), reach),
            ds,
            radius: limits.radius,
            climb: limits.gamma_max.sin().max(-limits.gamma_min.sin()),
        }
    }

    pub fn ds(&self) -> f64 {
        self.ds
    }

    pub fn path_free(&self, path: &AirplanePath) -> bool {
        if path.is_empty() {
            return true;
        }
        let frame = self.d_plus.frame();
        let total = path.length();
        let n = ((total / self.ds).ceil() as usize).max(1);
        let h = total / n as f64;
        let bulge = h * h / (8.0 * self.radius);
        let [x0, y0, x1, y1] = frame.bounds();
        let mut prev: Option<(f64, f64, f64, f64)> = None;
        for k in 0..=n {
            let s = if k == n { total } else { h * k as f64 };
            let st = path.sample(s).expect("s within range");
            if st.x < x0 + bulge || st.x > x1 - bulge || st.y < y0 + bulge || st.y > y1 - bulge {
                return false;
            }
            let (Some(lo), Some(hi)) = (self.d_minus.interpolate(st.x, st.y), self.d_plus.interpolate(st.x, st.y))
            else {
                return false;
            };
            let (below, above) = (st.z - lo, hi - st.z);
            if !(below > 0.0 && above > 0.0) {
                return false;
            }
            let Some((c, r)) = frame.nearest_cell(st.x, st.y) else {
                return false;
            };
            let i = frame.index(c, r);
            let (k_lo, k_hi) = (self.climb + self.slope_minus[i], self.climb + self.slope_plus[i]);
            if let Some((pb, pa, pk_lo, pk_hi)) = prev {
                if pb + below <= k_lo.max(pk_lo) * h || pa + above <= k_hi.max(pk_hi) * h {
                    return false;
                }
            }
            prev = Some((below, above, k_lo, k_hi));
        }
        true
    }
}
