//! Simulated rangefinder suite and its reduction to per-sector features.
//!
//! Rays are ordered counter-clockwise seen from above, starting astern:
//! ray `i` points at vessel-relative angle `π − 2πi/N`, so `i = N/4` is
//! abeam to starboard and `i = N/2` is dead ahead.

use std::f64::consts::{PI, TAU};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::dynamics::VesselState;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::geometry::{ray_circle, ray_polygon, unit, wrap_angle, Circle, Polygon, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerceptionConfig {
    pub n_rays: usize,
    pub n_sectors: usize,
    /// Logistic scaling of the sector partition; larger packs more sectors
    /// toward the bow.
    pub gamma_c: f64,
    pub sensor_range: f64,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        Self {
            n_rays: 180,
            n_sectors: 25,
            gamma_c: 4.0,
            sensor_range: 1500.0,
        }
    }
}

impl PerceptionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_rays < 8 {
            return Err(Error::config("perception.n_rays must be at least 8"));
        }
        if self.n_sectors == 0 || self.n_sectors > self.n_rays {
            return Err(Error::config("perception.n_sectors must be in 1..=n_rays"));
        }
        if !(self.gamma_c > 0.0) || !(self.sensor_range > 0.0) {
            return Err(Error::config("perception.gamma_c and sensor_range must be positive"));
        }
        let layout = SectorLayout::new(self);
        if let Some(k) = layout.ranges.iter().position(|r| r.is_empty()) {
            return Err(Error::config(format!(
                "sector {k} receives no rays; increase n_rays or reduce gamma_c/n_sectors"
            )));
        }
        Ok(())
    }

    pub fn ray_spacing(&self) -> f64 {
        TAU / self.n_rays as f64
    }
}

/// Moving obstacle at one instant. `course` is clockwise from North.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoverState {
    pub id: u32,
    pub position: [f64; 2],
    pub course: f64,
    pub speed: f64,
    /// Hull disc radius used for ray hits and collisions.
    pub radius: f64,
}

impl MoverState {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.position[0], self.position[1])
    }

    pub fn velocity(&self) -> Vec2 {
        unit(self.course) * self.speed
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSet {
    pub circles: Vec<Circle>,
    pub polygons: Vec<Polygon>,
    pub movers: Vec<MoverState>,
}

impl ObstacleSet {
    pub fn validate(&self) -> Result<()> {
        if self.circles.iter().any(|c| !(c.radius > 0.0)) {
            return Err(Error::config("obstacle circle radii must be positive"));
        }
        if let Some(i) = self.polygons.iter().position(|p| !p.is_simple()) {
            return Err(Error::config(format!("obstacle polygon {i} is not simple")));
        }
        if self.movers.iter().any(|m| !(m.radius > 0.0) || m.speed < 0.0) {
            return Err(Error::config("movers need positive radius and non-negative speed"));
        }
        Ok(())
    }
}

/// What a ray hit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayHit {
    Nothing,
    Static,
    /// Index into `ObstacleSet::movers`.
    Mover(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayScan {
    pub distances: Vec<f64>,
    pub hits: Vec<RayHit>,
}

/// Vessel-relative angle of ray `i` (may be fractional).
pub fn ray_angle(i: f64, n_rays: usize) -> f64 {
    wrap_angle(PI - TAU * i / n_rays as f64)
}

fn cast_one(origin: &Vec2, world_angle: f64, obstacles: &ObstacleSet, range: f64) -> (f64, RayHit) {
    let dir = unit(world_angle);
    let mut best = range;
    let mut hit = RayHit::Nothing;
    for c in &obstacles.circles {
        if let Some(t) = ray_circle(origin, &dir, &c.center(), c.radius) {
            if t < best {
                best = t;
                hit = RayHit::Static;
            }
        }
    }
    for p in &obstacles.polygons {
        if let Some(t) = ray_polygon(origin, &dir, p) {
            if t < best {
                best = t;
                hit = RayHit::Static;
            }
        }
    }
    for (k, m) in obstacles.movers.iter().enumerate() {
        if let Some(t) = ray_circle(origin, &dir, &m.position(), m.radius) {
            let wins_tie = match hit {
                RayHit::Mover(j) => t == best && m.id < obstacles.movers[j].id,
                _ => false,
            };
            if t < best || wins_tie {
                best = t;
                hit = RayHit::Mover(k);
            }
        }
    }
    (best, hit)
}

pub fn cast_rays_with(
    exec: Execution,
    os: &VesselState,
    obstacles: &ObstacleSet,
    n_rays: usize,
    range: f64,
) -> RayScan {
    let origin = os.position();
    let (distances, hits) = exec::map_range(exec, n_rays, |i| {
        cast_one(&origin, os.psi + ray_angle(i as f64, n_rays), obstacles, range)
    })
    .into_iter()
    .unzip();
    RayScan { distances, hits }
}

/// Distance along each of `n_rays` rays to the nearest obstacle, clipped to `range`.
pub fn cast_rays(os: &VesselState, obstacles: &ObstacleSet, n_rays: usize, range: f64) -> Vec<f64> {
    cast_rays_with(Execution::Sequential, os, obstacles, n_rays, range).distances
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Sector index of ray `i`. The logistic partition is normalized so the
/// last ray lands in sector `D − 1`, which makes the map onto.
pub fn sector_of(i: usize, n_rays: usize, n_sectors: usize, gamma_c: f64) -> usize {
    let d = n_sectors as f64;
    let x = gamma_c * i as f64 / n_rays as f64 - gamma_c / 2.0;
    let lo = sigmoid(-gamma_c / 2.0);
    let span = sigmoid(gamma_c / 2.0) - lo;
    let k = (d * (sigmoid(x) - lo) / span).floor();
    (k.max(0.0) as usize).min(n_sectors - 1)
}

/// Precomputed partition of ray indices into contiguous sectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorLayout {
    pub ranges: Vec<Range<usize>>,
    /// Vessel-relative centerline angle of each sector.
    pub centerlines: Vec<f64>,
}

impl SectorLayout {
    pub fn new(cfg: &PerceptionConfig) -> Self {
        let mut ranges = vec![0..0; cfg.n_sectors];
        let mut start = 0;
        let mut current = sector_of(0, cfg.n_rays, cfg.n_sectors, cfg.gamma_c);
        for i in 1..=cfg.n_rays {
            let k = if i < cfg.n_rays {
                sector_of(i, cfg.n_rays, cfg.n_sectors, cfg.gamma_c)
            } else {
                usize::MAX
            };
            if k != current {
                ranges[current] = start..i;
                start = i;
                current = k;
            }
        }
        let centerlines = ranges
            .iter()
            .map(|r| {
                if r.is_empty() {
                    0.0
                } else {
                    // median index; averages the middle pair for even counts
                    ray_angle((r.start + r.end - 1) as f64 / 2.0, cfg.n_rays)
                }
            })
            .collect();
        Self {
            ranges,
            centerlines,
        }
    }
}

/// Maximum reachable distance in a sector.
///
/// `distances` are the sector's rays in angular order, `spacing` the angle
/// between neighbouring rays. Levels are visited in ascending order; a level
/// `ℓ` is passable when some run of consecutive rays all longer than `ℓ`
/// spans an arc `ℓ · run · spacing` of at least `vessel_width`. The result is
/// the first level that is not passable.
pub fn feasibility_pool(distances: &[f64], spacing: f64, vessel_width: f64) -> f64 {
    debug_assert!(!distances.is_empty());
    let mut levels = distances.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    for &level in &levels {
        let mut run = 0usize;
        let mut widest = 0usize;
        for &d in distances {
            if d > level {
                run += 1;
                widest = widest.max(run);
            } else {
                run = 0;
            }
        }
        if level * widest as f64 * spacing < vessel_width {
            return level;
        }
    }
    // at the largest level no ray survives, so the loop always returns
    *levels.last().unwrap()
}

/// Logarithmic distance-to-closeness map: 1 at contact, 0 at sensor range.
pub fn closeness(d: f64, sensor_range: f64) -> f64 {
    (1.0 - (d + 1.0).ln() / (sensor_range + 1.0).ln()).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SectorMotion {
    /// Velocity across the sector centerline (m/s).
    pub vx: f64,
    /// Velocity along the centerline, positive toward the vessel (m/s).
    pub vy: f64,
    pub mover: Option<u32>,
}

/// Decomposes a ground velocity into the frame of a sector whose centerline
/// has world angle `centerline`. The frame's y-axis points outward along the
/// centerline and x = y rotated −90°, so (x, y, down) is right-handed. The
/// y-component is returned negated: positive means approaching.
pub fn decompose(velocity: &Vec2, centerline: f64) -> (f64, f64) {
    let ey = unit(centerline);
    let ex = unit(centerline - PI / 2.0);
    (velocity.dot(&ex), -velocity.dot(&ey))
}

pub fn sector_motion(
    os: &VesselState,
    obstacles: &ObstacleSet,
    scan: &RayScan,
    layout: &SectorLayout,
) -> Vec<SectorMotion> {
    layout
        .ranges
        .iter()
        .zip(&layout.centerlines)
        .map(|(range, &center)| {
            let nearest = range
                .clone()
                .filter_map(|i| match scan.hits[i] {
                    RayHit::Mover(k) => Some((scan.distances[i], &obstacles.movers[k])),
                    _ => None,
                })
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));
            match nearest {
                None => SectorMotion::default(),
                Some((_, m)) => {
                    let (vx, vy) = decompose(&m.velocity(), os.psi + center);
                    SectorMotion {
                        vx,
                        vy,
                        mover: Some(m.id),
                    }
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorFrame {
    pub raw: Vec<f64>,
    pub pooled: Vec<f64>,
    pub closeness: Vec<f64>,
    pub vx: Vec<f64>,
    pub vy: Vec<f64>,
    pub nearest_mover: Vec<Option<u32>>,
}

impl SensorFrame {
    /// `(closeness, vx, vy)` per sector, flattened.
    pub fn features(&self) -> Vec<f64> {
        self.closeness
            .iter()
            .zip(&self.vx)
            .zip(&self.vy)
            .flat_map(|((&c, &x), &y)| [c, x, y])
            .collect()
    }
}

/// Full perception pipeline with the sector layout cached.
#[derive(Debug, Clone)]
pub struct Perception {
    cfg: PerceptionConfig,
    layout: SectorLayout,
    ray_angles: Vec<f64>,
    exec: Execution,
}

impl Perception {
    pub fn new(cfg: PerceptionConfig) -> Result<Self> {
        cfg.validate()?;
        let layout = SectorLayout::new(&cfg);
        let ray_angles = (0..cfg.n_rays).map(|i| ray_angle(i as f64, cfg.n_rays)).collect();
        Ok(Self {
            cfg,
            layout,
            ray_angles,
            exec: Execution::Sequential,
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn config(&self) -> &PerceptionConfig {
        &self.cfg
    }

    pub fn layout(&self) -> &SectorLayout {
        &self.layout
    }

    /// Vessel-relative angle of every ray.
    pub fn ray_angles(&self) -> &[f64] {
        &self.ray_angles
    }

    pub fn sense(&self, os: &VesselState, obstacles: &ObstacleSet, vessel_width: f64) -> SensorFrame {
        let cfg = &self.cfg;
        let scan = cast_rays_with(self.exec, os, obstacles, cfg.n_rays, cfg.sensor_range);
        let pooled: Vec<f64> = self
            .layout
            .ranges
            .iter()
            .map(|r| feasibility_pool(&scan.distances[r.clone()], cfg.ray_spacing(), vessel_width))
            .collect();
        let closeness = pooled.iter().map(|&d| closeness(d, cfg.sensor_range)).collect();
        let motion = sector_motion(os, obstacles, &scan, &self.layout);
        SensorFrame {
            raw: scan.distances,
            pooled,
            closeness,
            vx: motion.iter().map(|m| m.vx).collect(),
            vy: motion.iter().map(|m| m.vy).collect(),
            nearest_mover: motion.iter().map(|m| m.mover).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn layout() -> SectorLayout {
        SectorLayout::new(&PerceptionConfig::default())
    }

    #[test]
    fn empty_scene_reads_full_range() {
        let d = cast_rays(&VesselState::default(), &ObstacleSet::default(), 180, 1500.0);
        assert!(d.iter().all(|&x| x == 1500.0));
    }

    #[test]
    fn circle_dead_ahead() {
        let obs = ObstacleSet {
            circles: vec![Circle::new(Vec2::new(400.0, 0.0), 50.0)],
            ..Default::default()
        };
        let d = cast_rays(&VesselState::default(), &obs, 180, 1500.0);
        assert_relative_eq!(d[90], 350.0, epsilon = 1e-9);
        assert_eq!(d[0], 1500.0);
    }

    #[test]
    fn ray_order_starts_astern_and_sweeps_starboard() {
        assert_relative_eq!(ray_angle(0.0, 180), PI);
        assert_relative_eq!(ray_angle(45.0, 180), PI / 2.0, epsilon = 1e-12);
        assert_relative_eq!(ray_angle(90.0, 180), 0.0, epsilon = 1e-12);
        assert_relative_eq!(ray_angle(135.0, 180), -PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn first_ray_maps_to_first_sector() {
        assert_eq!(sector_of(0, 180, 25, 4.0), 0);
        assert_eq!(sector_of(179, 180, 25, 4.0), 24);
    }

    #[test]
    fn layout_partitions_all_rays() {
        let l = layout();
        assert_eq!(l.ranges.iter().map(|r| r.len()).sum::<usize>(), 180);
        for w in l.ranges.windows(2) {
            assert_eq!(w[0].end, w[1].start);
        }
        for (k, r) in l.ranges.iter().enumerate() {
            for i in r.clone() {
                assert_eq!(sector_of(i, 180, 25, 4.0), k);
            }
        }
    }

    #[test]
    fn frontal_sector_is_narrowest() {
        let l = layout();
        let counts: Vec<usize> = l.ranges.iter().map(|r| r.len()).collect();
        let front = sector_of(90, 180, 25, 4.0);
        assert_eq!(counts[front], *counts.iter().min().unwrap());
        assert!(counts[front] < counts[0]);
        assert!(counts[front] < counts[24]);
    }

    #[test]
    fn too_many_sectors_rejected() {
        let cfg = PerceptionConfig {
            n_rays: 8,
            n_sectors: 8,
            gamma_c: 12.0,
            sensor_range: 100.0,
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn closeness_values() {
        assert_eq!(closeness(0.0, 1500.0), 1.0);
        assert_eq!(closeness(1500.0, 1500.0), 0.0);
        assert_relative_eq!(closeness(100.0, 1500.0), 1.0 - 101f64.ln() / 1501f64.ln());
        assert!((closeness(100.0, 1500.0) - 0.36899).abs() < 1e-5);
        assert_eq!(closeness(5000.0, 1500.0), 0.0);
    }

    #[test]
    fn pooling_all_clear() {
        assert_eq!(feasibility_pool(&[1500.0; 12], TAU / 180.0, 20.0), 1500.0);
    }

    #[test]
    fn pooling_passes_wide_opening() {
        // one ray blocked at 10 m; the other 11 leave a 3.84 m arc at that level
        let mut d = [1500.0; 12];
        d[3] = 10.0;
        let pooled = feasibility_pool(&d, TAU / 180.0, 2.0);
        assert!(pooled > 10.0);
        assert_eq!(pooled, 1500.0);
        // a wide vessel cannot use it
        assert_eq!(feasibility_pool(&d, TAU / 180.0, 20.0), 10.0);
    }

    #[test]
    fn pooling_single_ray() {
        assert_eq!(feasibility_pool(&[42.0], 0.1, 1.0), 42.0);
    }

    #[test]
    fn motion_head_on() {
        let obs = ObstacleSet {
            movers: vec![MoverState {
                id: 7,
                position: [800.0, 0.0],
                course: PI,
                speed: 6.0,
                radius: 50.0,
            }],
            ..Default::default()
        };
        let p = Perception::new(PerceptionConfig::default()).unwrap();
        let f = p.sense(&VesselState::default(), &obs, 20.0);
        let front = sector_of(90, 180, 25, 4.0);
        assert_eq!(f.nearest_mover[front], Some(7));
        assert_relative_eq!(f.vy[front], 6.0, epsilon = 1e-9);
        assert!(f.vx[front].abs() < 1e-9);
        for k in 0..25 {
            if f.nearest_mover[k].is_none() {
                assert_eq!((f.vx[k], f.vy[k]), (0.0, 0.0));
            }
        }
    }

    #[test]
    fn nearest_mover_ties_break_by_id() {
        let mk = |id, y| MoverState {
            id,
            position: [500.0, y],
            course: 0.0,
            speed: 1.0,
            radius: 30.0,
        };
        // same range, mirrored about the bow, both inside the frontal sector
        let obs = ObstacleSet {
            movers: vec![mk(9, 1e-3), mk(4, -1e-3)],
            ..Default::default()
        };
        let p = Perception::new(PerceptionConfig::default()).unwrap();
        let f = p.sense(&VesselState::default(), &obs, 20.0);
        let front = sector_of(90, 180, 25, 4.0);
        assert_eq!(f.nearest_mover[front], Some(4));
    }

    proptest! {
        #[test]
        fn decomposition_preserves_speed(course in -PI..PI, speed in 0.0f64..20.0, center in -PI..PI) {
            let v = unit(course) * speed;
            let (vx, vy) = decompose(&v, center);
            prop_assert!((vx.hypot(vy) - speed).abs() < 1e-9);
        }

        #[test]
        fn pooled_between_min_and_max(d in proptest::collection::vec(0.0f64..1500.0, 1..30), w in 0.1f64..40.0) {
            let p = feasibility_pool(&d, TAU / 180.0, w);
            let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = d.iter().cloned().fold(0.0, f64::max);
            prop_assert!(p >= lo && p <= hi);
        }

        #[test]
        fn closeness_strictly_decreasing(a in 0.0f64..1500.0, b in 0.0f64..1500.0) {
            prop_assume!(a < b);
            prop_assert!(closeness(a, 1500.0) > closeness(b, 1500.0));
        }
    }
}
