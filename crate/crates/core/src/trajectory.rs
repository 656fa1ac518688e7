//! Per-step trajectory records and their CSV form.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::VesselState;
use crate::env::StepResult;
use crate::error::{Error, Result};

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub u: f64,
    pub v: f64,
    pub r: f64,
    /// Applied surge force (N).
    pub Tu: f64,
    /// Applied yaw moment (N·m).
    pub Tr: f64,
    pub reward: f64,
    pub cri_max: f64,
    pub cte: f64,
}

impl TrajectoryRow {
    pub fn from_step(step: &StepResult) -> Self {
        let s = &step.info.state;
        Self {
            t: step.info.t,
            x: s.x,
            y: s.y,
            psi: s.psi,
            u: s.u,
            v: s.v,
            r: s.r,
            Tu: step.info.control.surge,
            Tr: step.info.control.yaw,
            reward: step.reward.total,
            cri_max: step.info.cri_max,
            cte: step.observation.nav.cte,
        }
    }

    pub fn state(&self) -> VesselState {
        VesselState {
            x: self.x,
            y: self.y,
            psi: self.psi,
            u: self.u,
            v: self.v,
            r: self.r,
        }
    }
}

pub fn write_csv<W: Write>(rows: &[TrajectoryRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<trajectory>", e))?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<TrajectoryRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Parse {
                location: format!("trajectory row {}", i + 2),
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn save(rows: &[TrajectoryRow], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(rows, std::io::BufWriter::new(f))
}

pub fn load(path: &Path) -> Result<Vec<TrajectoryRow>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(std::io::BufReader::new(f))
}
