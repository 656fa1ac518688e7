//! AIS trajectory and terrain import into the local NED frame.

use std::collections::HashMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{read_to_string, Error, Result};
use crate::geometry::{Polygon, Vec2};

use super::config::resolve;
use super::mover::{Motion, MoverSpec};

pub const EARTH_RADIUS: f64 = 6_371_000.0;

/// Equirectangular projection about a fixed origin; north is `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalProjection {
    pub lat0: f64,
    pub lon0: f64,
}

impl LocalProjection {
    pub fn new(lat0: f64, lon0: f64) -> Self {
        Self { lat0, lon0 }
    }

    pub fn project(&self, lat: f64, lon: f64) -> Vec2 {
        let x = (lat - self.lat0).to_radians() * EARTH_RADIUS;
        let y = (lon - self.lon0).to_radians() * EARTH_RADIUS * self.lat0.to_radians().cos();
        Vec2::new(x, y)
    }

    pub fn unproject(&self, p: &Vec2) -> (f64, f64) {
        let lat = self.lat0 + (p.x / EARTH_RADIUS).to_degrees();
        let lon = self.lon0 + (p.y / (EARTH_RADIUS * self.lat0.to_radians().cos())).to_degrees();
        (lat, lon)
    }
}

/// The `ais` section of an episode config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AisSource {
    pub trajectories: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terrain: Option<PathBuf>,
    /// `[lat, lon]` of the local frame origin.
    pub origin: [f64; 2],
    /// Fixes farther than this from the origin along either axis are dropped (m).
    #[serde(default = "default_bounds")]
    pub bounds: f64,
    /// Hull radius given to every imported vessel (m).
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_bounds() -> f64 {
    50_000.0
}

fn default_radius() -> f64 {
    50.0
}

impl AisSource {
    pub(crate) fn rebase(&mut self, base: Option<&Path>) {
        self.trajectories = resolve(base, &self.trajectories.to_string_lossy());
        if let Some(t) = &self.terrain {
            self.terrain = Some(resolve(base, &t.to_string_lossy()));
        }
    }

    pub fn projection(&self) -> LocalProjection {
        LocalProjection::new(self.origin[0], self.origin[1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AisFix {
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
    pub sog: f64,
    pub cog: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AisTrack {
    pub id: String,
    pub fixes: Vec<AisFix>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AisImport {
    pub movers: Vec<MoverSpec>,
    pub polygons: Vec<Polygon>,
    /// Fixes discarded for falling outside the bounds.
    pub dropped: usize,
}

#[derive(Debug, Deserialize)]
struct Row {
    id: String,
    t: f64,
    lat: f64,
    lon: f64,
    sog: f64,
    cog: f64,
}

/// Parses `id,t,lat,lon,sog,cog` rows grouped per vessel in order of first
/// appearance. Each vessel's timestamps must strictly increase.
pub fn parse_ais_csv<R: Read>(reader: R) -> Result<Vec<AisTrack>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut order: Vec<String> = Vec::new();
    let mut by_id: HashMap<String, Vec<AisFix>> = HashMap::new();
    for (line, rec) in rdr.deserialize::<Row>().enumerate() {
        let row = rec.map_err(|e| Error::Parse {
            location: format!("AIS row {}", line + 2),
            message: e.to_string(),
        })?;
        let fixes = by_id.entry(row.id.clone()).or_insert_with(|| {
            order.push(row.id.clone());
            Vec::new()
        });
        if let Some(prev) = fixes.last() {
            if !(row.t > prev.t) {
                return Err(Error::UnorderedTimestamps {
                    id: row.id,
                    prev: prev.t,
                    next: row.t,
                });
            }
        }
        fixes.push(AisFix {
            t: row.t,
            lat: row.lat,
            lon: row.lon,
            sog: row.sog,
            cog: row.cog,
        });
    }
    Ok(order
        .into_iter()
        .map(|id| {
            let fixes = by_id.remove(&id).unwrap_or_default();
            AisTrack { id, fixes }
        })
        .collect())
}

/// Converts tracks to movers. Times are shifted so the earliest kept fix is
/// t = 0. Out-of-bounds fixes are dropped and counted.
pub fn tracks_to_movers(
    tracks: &[AisTrack],
    proj: &LocalProjection,
    bounds: f64,
    radius: f64,
) -> (Vec<MoverSpec>, usize) {
    let mut dropped = 0;
    let mut local: Vec<(String, Vec<[f64; 3]>)> = Vec::new();
    for tr in tracks {
        let mut pts = Vec::with_capacity(tr.fixes.len());
        for f in &tr.fixes {
            let p = proj.project(f.lat, f.lon);
            if p.x.abs() > bounds || p.y.abs() > bounds || !p.x.is_finite() || !p.y.is_finite() {
                dropped += 1;
                continue;
            }
            pts.push([f.t, p.x, p.y]);
        }
        if pts.is_empty() {
            log::warn!("AIS vessel {} has no fixes inside the bounds", tr.id);
        } else {
            local.push((tr.id.clone(), pts));
        }
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} AIS fixes outside ±{bounds} m");
    }
    let t0 = local
        .iter()
        .map(|(_, p)| p[0][0])
        .fold(f64::INFINITY, f64::min);
    let movers = local
        .into_iter()
        .enumerate()
        .map(|(i, (name, mut pts))| {
            for p in &mut pts {
                p[0] -= t0;
            }
            MoverSpec {
                id: i as u32,
                name: Some(name),
                radius,
                motion: Motion::Track { track: pts },
            }
        })
        .collect();
    (movers, dropped)
}

/// Polygon exteriors from a GeoJSON FeatureCollection, Feature or bare
/// geometry. Coordinates are `[lon, lat]`; holes are ignored.
pub fn parse_terrain_geojson(text: &str, proj: &LocalProjection) -> Result<Vec<Polygon>> {
    let v: Value = serde_json::from_str(text)?;
    let mut out = Vec::new();
    collect_polygons(&v, proj, &mut out)?;
    Ok(out)
}

fn collect_polygons(v: &Value, proj: &LocalProjection, out: &mut Vec<Polygon>) -> Result<()> {
    let bad = |m: &str| Error::Parse {
        location: "terrain GeoJSON".into(),
        message: m.into(),
    };
    match v.get("type").and_then(Value::as_str) {
        Some("FeatureCollection") => {
            for f in v.get("features").and_then(Value::as_array).ok_or_else(|| bad("missing features"))? {
                collect_polygons(f, proj, out)?;
            }
        }
        Some("Feature") => {
            if let Some(g) = v.get("geometry").filter(|g| !g.is_null()) {
                collect_polygons(g, proj, out)?;
            }
        }
        Some("GeometryCollection") => {
            for g in v.get("geometries").and_then(Value::as_array).ok_or_else(|| bad("missing geometries"))? {
                collect_polygons(g, proj, out)?;
            }
        }
        Some("Polygon") => {
            let rings = v.get("coordinates").ok_or_else(|| bad("missing coordinates"))?;
            out.push(ring_to_polygon(rings, proj)?);
        }
        Some("MultiPolygon") => {
            let polys = v
                .get("coordinates")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("missing coordinates"))?;
            for rings in polys {
                out.push(ring_to_polygon(rings, proj)?);
            }
        }
        Some(other) => log::debug!("skipping GeoJSON geometry {other}"),
        None => return Err(bad("object without a type")),
    }
    Ok(())
}

fn ring_to_polygon(rings: &Value, proj: &LocalProjection) -> Result<Polygon> {
    let bad = |m: &str| Error::Parse {
        location: "terrain GeoJSON polygon".into(),
        message: m.into(),
    };
    let ring: Vec<[f64; 2]> = serde_json::from_value(
        rings
            .as_array()
            .and_then(|r| r.first())
            .cloned()
            .ok_or_else(|| bad("polygon without an exterior ring"))?,
    )
    .map_err(|e| bad(&e.to_string()))?;
    let mut verts: Vec<[f64; 2]> = ring
        .iter()
        .map(|c| {
            let p = proj.project(c[1], c[0]);
            [p.x, p.y]
        })
        .collect();
    if verts.len() > 1 && verts.first() == verts.last() {
        verts.pop();
    }
    if verts.len() < 3 {
        return Err(bad("exterior ring needs at least three distinct vertices"));
    }
    Ok(Polygon { vertices: verts })
}

pub fn load_ais_scenario(src: &AisSource) -> Result<AisImport> {
    let proj = src.projection();
    let file = std::fs::File::open(&src.trajectories).map_err(|e| Error::io(&src.trajectories, e))?;
    let tracks = parse_ais_csv(file)?;
    let (movers, dropped) = tracks_to_movers(&tracks, &proj, src.bounds, src.radius);
    let polygons = match &src.terrain {
        Some(t) => parse_terrain_geojson(&read_to_string(t)?, &proj)?,
        None => Vec::new(),
    };
    Ok(AisImport {
        movers,
        polygons,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn projection_round_trip() {
        let p = LocalProjection::new(63.4, 10.4);
        let v = p.project(63.41, 10.42);
        assert_relative_eq!(v.x, 0.01f64.to_radians() * EARTH_RADIUS, epsilon = 1e-6);
        let (lat, lon) = p.unproject(&v);
        assert_relative_eq!(lat, 63.41, epsilon = 1e-12);
        assert_relative_eq!(lon, 10.42, epsilon = 1e-12);
    }

    #[test]
    fn unordered_timestamps_name_the_vessel() {
        let csv = "id,t,lat,lon,sog,cog\nA,0,63,10,5,0\nB,0,63,10,5,0\nB,10,63,10,5,0\nB,5,63,10,5,0\n";
        match parse_ais_csv(csv.as_bytes()) {
            Err(Error::UnorderedTimestamps { id, prev, next }) => {
                assert_eq!(id, "B");
                assert_eq!((prev, next), (10.0, 5.0));
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn interleaved_rows_group_by_vessel() {
        let csv = "id,t,lat,lon,sog,cog\nA,0,63,10,5,0\nB,3,63,10,5,0\nA,10,63.001,10,5,0\n";
        let tracks = parse_ais_csv(csv.as_bytes()).unwrap();
        assert_eq!(tracks.len(), 2);
        assert_eq!(tracks[0].fixes.len(), 2);
        let (movers, dropped) = tracks_to_movers(&tracks, &LocalProjection::new(63.0, 10.0), 1e5, 30.0);
        assert_eq!(dropped, 0);
        match &movers[1].motion {
            Motion::Track { track } => assert_eq!(track[0][0], 3.0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn out_of_bounds_fixes_dropped() {
        let csv = "id,t,lat,lon,sog,cog\nA,0,63,10,5,0\nA,1,64,10,5,0\nA,2,63.001,10,5,0\n";
        let tracks = parse_ais_csv(csv.as_bytes()).unwrap();
        let (movers, dropped) = tracks_to_movers(&tracks, &LocalProjection::new(63.0, 10.0), 10_000.0, 30.0);
        assert_eq!(dropped, 1);
        match &movers[0].motion {
            Motion::Track { track } => assert_eq!(track.len(), 2),
            _ => unreachable!(),
        }
    }

    #[test]
    fn malformed_row_reports_location() {
        let csv = "id,t,lat,lon,sog,cog\nA,zero,63,10,5,0\n";
        let err = parse_ais_csv(csv.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
    }

    #[test]
    fn geojson_polygons() {
        let gj = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{},"geometry":{"type":"Polygon",
             "coordinates":[[[10.0,63.0],[10.01,63.0],[10.01,63.01],[10.0,63.0]]]}},
            {"type":"Feature","properties":{},"geometry":{"type":"Point","coordinates":[10,63]}}]}"#;
        let polys = parse_terrain_geojson(gj, &LocalProjection::new(63.0, 10.0)).unwrap();
        assert_eq!(polys.len(), 1);
        assert_eq!(polys[0].vertices.len(), 3);
        assert_relative_eq!(polys[0].vertices[0][0], 0.0, epsilon = 1e-9);
    }
}
