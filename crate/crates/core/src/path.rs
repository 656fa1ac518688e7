//! Arc-length parameterized desired path.
//!
//! Waypoints are joined by a natural cubic spline in chord-length parameter
//! τ, then reparameterized to arc length ω with a per-segment table of
//! chord sums. Two waypoints give a straight segment.

use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, Error, Result};
use crate::geometry::Vec2;

const CHORDS_PER_SEGMENT: usize = 50;
const NEWTON_MAX_ITER: usize = 10;
const NEWTON_TOL: f64 = 1e-6;
/// Target spacing (m) of the coarse grid used for cold starts and fallback.
const COARSE_SPACING: f64 = 5.0;

/// Point, unit tangent and curvature vector at a path parameter.
#[derive(Debug, Clone, Copy)]
pub struct PathSample {
    pub point: Vec2,
    pub tangent: Vec2,
    pub curvature: Vec2,
}

#[derive(Debug, Clone)]
struct Spline1 {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl Spline1 {
    fn natural(knots: &[f64], values: &[f64]) -> Self {
        let n = knots.len();
        let mut second = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior equations
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for i in 0..m {
                let h0 = knots[i + 1] - knots[i];
                let h1 = knots[i + 2] - knots[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0
                    * ((values[i + 2] - values[i + 1]) / h1 - (values[i + 1] - values[i]) / h0);
            }
            for i in 1..m {
                let lower = knots[i + 1] - knots[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            let mut sol = vec![0.0; m];
            sol[m - 1] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                sol[i] = (rhs[i] - upper[i] * sol[i + 1]) / diag[i];
            }
            second[1..n - 1].copy_from_slice(&sol);
        }
        Self {
            knots: knots.to_vec(),
            values: values.to_vec(),
            second,
        }
    }

    /// Value and first two derivatives on segment `k` at local `tau`.
    fn eval(&self, k: usize, tau: f64) -> (f64, f64, f64) {
        let (t0, t1) = (self.knots[k], self.knots[k + 1]);
        let h = t1 - t0;
        let (m0, m1) = (self.second[k], self.second[k + 1]);
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let a = t1 - tau;
        let b = tau - t0;
        let val = m0 * a.powi(3) / (6.0 * h)
            + m1 * b.powi(3) / (6.0 * h)
            + (y0 / h - m0 * h / 6.0) * a
            + (y1 / h - m1 * h / 6.0) * b;
        let d1 = -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) - (y0 / h - m0 * h / 6.0)
            + (y1 / h - m1 * h / 6.0);
        let d2 = m0 * a / h + m1 * b / h;
        (val, d1, d2)
    }
}

#[derive(Debug, Clone)]
pub struct PathSpec {
    waypoints: Vec<Vec2>,
    sx: Spline1,
    sy: Spline1,
    /// Arc length at the start of each segment, plus the total at the end.
    seg_start: Vec<f64>,
    /// Per segment: (τ, cumulative arc length from segment start) samples.
    tables: Vec<Vec<Node>>,
}

/// Arc-length table entry: spline parameter, chord-summed length and
/// `dτ/dω` there.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Node {
    tau: f64,
    s: f64,
    slope: f64,
}

impl PathSpec {
    pub fn new(waypoints: Vec<Vec2>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::config("path needs at least two waypoints"));
        }
        if waypoints.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::config("path waypoints must be finite"));
        }
        let mut knots = vec![0.0];
        for w in waypoints.windows(2) {
            let d = (w[1] - w[0]).norm();
            if d < 1e-9 {
                return Err(Error::config("consecutive path waypoints coincide"));
            }
            knots.push(knots.last().unwrap() + d);
        }
        let xs: Vec<f64> = waypoints.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = waypoints.iter().map(|p| p.y).collect();
        let sx = Spline1::natural(&knots, &xs);
        let sy = Spline1::natural(&knots, &ys);

        let mut seg_start = vec![0.0];
        let mut tables = Vec::with_capacity(knots.len() - 1);
        for k in 0..knots.len() - 1 {
            let (t0, t1) = (knots[k], knots[k + 1]);
            let mut table = Vec::with_capacity(CHORDS_PER_SEGMENT + 1);
            let node = |tau: f64, s: f64| {
                let (x, dx, _) = sx.eval(k, tau);
                let (y, dy, _) = sy.eval(k, tau);
                let slope = 1.0 / dx.hypot(dy);
                (Vec2::new(x, y), Node { tau, s, slope })
            };
            let (mut prev, first) = node(t0, 0.0);
            table.push(first);
            let mut s = 0.0;
            for j in 1..=CHORDS_PER_SEGMENT {
                let tau = t0 + (t1 - t0) * j as f64 / CHORDS_PER_SEGMENT as f64;
                let (p, _) = node(tau, 0.0);
                s += (p - prev).norm();
                table.push(node(tau, s).1);
                prev = p;
            }
            seg_start.push(seg_start.last().unwrap() + s);
            tables.push(table);
        }
        Ok(Self {
            waypoints,
            sx,
            sy,
            seg_start,
            tables,
        })
    }

    /// Parses a JSON array of `[x, y]` waypoints.
    pub fn from_json(text: &str) -> Result<Self> {
        let pts: Vec<[f64; 2]> = serde_json::from_str(text)?;
        Self::new(pts.into_iter().map(|p| Vec2::new(p[0], p[1])).collect())
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        Self::from_json(&read_to_string(path)?)
    }

    pub fn waypoints(&self) -> &[Vec2] {
        &self.waypoints
    }

    pub fn length(&self) -> f64 {
        *self.seg_start.last().unwrap()
    }

    fn locate(&self, omega: f64) -> (usize, f64) {
        let omega = omega.clamp(0.0, self.length());
        let n = self.tables.len();
        let k = match self.seg_start[1..n].partition_point(|&s| s <= omega) {
            k if k >= n => n - 1,
            k => k,
        };
        let local = omega - self.seg_start[k];
        let table = &self.tables[k];
        let j = table
            .partition_point(|n| n.s <= local)
            .clamp(1, table.len() - 1);
        let (a, b) = (table[j - 1], table[j]);
        let h = b.s - a.s;
        if h <= 0.0 {
            return (k, a.tau);
        }
        // cubic Hermite in s keeps dτ/dω consistent with the spline speed
        let t = (local - a.s) / h;
        let (t2, t3) = (t * t, t * t * t);
        let tau = (2.0 * t3 - 3.0 * t2 + 1.0) * a.tau
            + (t3 - 2.0 * t2 + t) * h * a.slope
            + (-2.0 * t3 + 3.0 * t2) * b.tau
            + (t3 - t2) * h * b.slope;
        (k, tau)
    }

    pub fn sample(&self, omega: f64) -> PathSample {
        let (k, tau) = self.locate(omega);
        let (x, dx, ddx) = self.sx.eval(k, tau);
        let (y, dy, ddy) = self.sy.eval(k, tau);
        let d = Vec2::new(dx, dy);
        let dd = Vec2::new(ddx, ddy);
        let speed2 = d.norm_squared();
        let speed = speed2.sqrt();
        let tangent = d / speed;
        // second derivative w.r.t. arc length
        let curvature = (dd * speed2 - d * d.dot(&dd)) / (speed2 * speed2);
        PathSample {
            point: Vec2::new(x, y),
            tangent,
            curvature,
        }
    }

    pub fn point(&self, omega: f64) -> Vec2 {
        self.sample(omega).point
    }

    pub fn tangent(&self, omega: f64) -> Vec2 {
        self.sample(omega).tangent
    }

    /// Path angle γ_p(ω), clockwise from North.
    pub fn angle(&self, omega: f64) -> f64 {
        let t = self.tangent(omega);
        t.y.atan2(t.x)
    }

    fn sq_dist(&self, pos: &Vec2, omega: f64) -> f64 {
        (self.point(omega) - pos).norm_squared()
    }

    /// Newton–Raphson on the squared distance, warm-started at `guess`.
    /// Returns `None` if it fails to converge within the iteration budget.
    pub fn newton_closest(&self, pos: &Vec2, guess: f64) -> Option<f64> {
        let end = self.length();
        let mut w = guess.clamp(0.0, end);
        for _ in 0..NEWTON_MAX_ITER {
            let s = self.sample(w);
            let diff = s.point - pos;
            let grad = diff.dot(&s.tangent);
            let hess = 1.0 + diff.dot(&s.curvature);
            if hess <= 0.0 || !hess.is_finite() {
                return None;
            }
            let next = (w - grad / hess).clamp(0.0, end);
            if (next - w).abs() < NEWTON_TOL {
                return Some(next);
            }
            w = next;
        }
        None
    }

    /// Closest path parameter to `pos`, warm-started at `guess`. Falls back to
    /// [`PathSpec::project`] when Newton does not converge.
    pub fn closest_param(&self, pos: &Vec2, guess: f64) -> f64 {
        self.newton_closest(pos, guess)
            .unwrap_or_else(|| self.project(pos))
    }

    /// Cold-start projection: coarse grid, then Newton from the best node,
    /// then golden-section refinement if Newton leaves the bracket.
    pub fn project(&self, pos: &Vec2) -> f64 {
        let end = self.length();
        let n = ((end / COARSE_SPACING).ceil() as usize).max(8);
        let h = end / n as f64;
        let best = (0..=n)
            .map(|i| i as f64 * h)
            .map(|w| (w, self.sq_dist(pos, w)))
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
            .0;
        let lo = (best - h).max(0.0);
        let hi = (best + h).min(end);
        match self.newton_closest(pos, best) {
            Some(w) if (lo..=hi).contains(&w) => w,
            _ => self.golden(pos, lo, hi),
        }
    }

    fn golden(&self, pos: &Vec2, mut a: f64, mut b: f64) -> f64 {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - (b - a) * inv_phi;
        let mut d = a + (b - a) * inv_phi;
        let (mut fc, mut fd) = (self.sq_dist(pos, c), self.sq_dist(pos, d));
        while b - a > NEWTON_TOL {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - (b - a) * inv_phi;
                fc = self.sq_dist(pos, c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + (b - a) * inv_phi;
                fd = self.sq_dist(pos, d);
            }
        }
        0.5 * (a + b)
    }
}

/// Serialized form used inside configs: the waypoint list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Waypoints(pub Vec<[f64; 2]>);

impl Waypoints {
    pub fn build(&self) -> Result<PathSpec> {
        PathSpec::new(self.0.iter().map(|p| Vec2::new(p[0], p[1])).collect())
    }
}

impl From<&PathSpec> for Waypoints {
    fn from(p: &PathSpec) -> Self {
        Waypoints(p.waypoints().iter().map(|w| [w.x, w.y]).collect())
    }
}
