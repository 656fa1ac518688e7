//! Planar helpers shared by guidance, perception and collision checks.
//!
//! All positions are NED: `x` North, `y` East. Angles follow the heading
//! convention, measured clockwise from North, so a unit vector at angle
//! `a` is `(cos a, sin a)`.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

pub type Vec2 = Vector2<f64>;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    // rem_euclid can return TAU itself for tiny negative inputs
    if w <= -PI {
        w += TAU;
    }
    w
}

/// `(sin, cos)` with results that do not depend on optimization level.
/// Optimized builds otherwise fuse separate `sin`/`cos` calls into the
/// platform `sincos`, which can round differently.
pub fn sin_cos(angle: f64) -> (f64, f64) {
    libm::sincos(angle)
}

pub fn unit(angle: f64) -> Vec2 {
    let (s, c) = sin_cos(angle);
    Vec2::new(c, s)
}

/// Heading-convention angle of a vector.
pub fn angle_of(v: &Vec2) -> f64 {
    v.y.atan2(v.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Vec2, radius: f64) -> Self {
        Self {
            center: [center.x, center.y],
            radius,
        }
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(self.center[0], self.center[1])
    }
}

/// Closed polygon given by its vertices; the closing edge is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polygon {
    pub vertices: Vec<[f64; 2]>,
}

impl Polygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Self {
        Self { vertices }
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            (Vec2::new(a[0], a[1]), Vec2::new(b[0], b[1]))
        })
    }

    /// Even-odd point containment.
    pub fn contains(&self, p: &Vec2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn distance_to(&self, p: &Vec2) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        self.edges()
            .map(|(a, b)| point_segment_distance(p, &a, &b))
            .fold(f64::INFINITY, f64::min)
    }

    /// True if no two non-adjacent edges intersect.
    pub fn is_simple(&self) -> bool {
        let edges: Vec<_> = self.edges().collect();
        let n = edges.len();
        if n < 3 {
            return false;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segments_intersect(&edges[i].0, &edges[i].1, &edges[j].0, &edges[j].1) {
                    return false;
                }
            }
        }
        true
    }
}

pub fn point_segment_distance(p: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

fn segments_intersect(p1: &Vec2, p2: &Vec2, q1: &Vec2, q2: &Vec2) -> bool {
    let d1 = cross(&(q2 - q1), &(p1 - q1));
    let d2 = cross(&(q2 - q1), &(p2 - q1));
    let d3 = cross(&(p2 - p1), &(q1 - p1));
    let d4 = cross(&(p2 - p1), &(q2 - p1));
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

/// Smallest `t >= 0` where `origin + t * dir` meets the circle boundary.
/// `dir` must be a unit vector. An origin inside the circle yields 0.
pub fn ray_circle(origin: &Vec2, dir: &Vec2, center: &Vec2, radius: f64) -> Option<f64> {
    let oc = origin - center;
    let c = oc.norm_squared() - radius * radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let b = oc.dot(dir);
    if b >= 0.0 {
        return None;
    }
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    Some(-b - disc.sqrt())
}

/// Ray-segment intersection distance along a unit `dir`.
pub fn ray_segment(origin: &Vec2, dir: &Vec2, a: &Vec2, b: &Vec2) -> Option<f64> {
    let e = b - a;
    let denom = cross(dir, &e);
    if denom.abs() < 1e-12 {
        return None;
    }
    let ao = a - origin;
    let t = cross(&ao, &e) / denom;
    let s = cross(&ao, dir) / denom;
    if t >= 0.0 && (0.0..=1.0).contains(&s) {
        Some(t)
    } else {
        None
    }
}

pub fn ray_polygon(origin: &Vec2, dir: &Vec2, poly: &Polygon) -> Option<f64> {
    if poly.contains(origin) {
        return Some(0.0);
    }
    poly.edges()
        .filter_map(|(a, b)| ray_segment(origin, dir, &a, &b))
        .fold(None, |best, t| Some(best.map_or(t, |b: f64| b.min(t))))
}
