//! Membership curves sampled for plotting.

use std::io::Write;

use crate::error::{Error, Result};
use crate::risk::{tcpa_bounds, u_dcpa, u_r, u_tcpa, u_theta, RiskParams};

pub const CURVE_POINTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub curve: &'static str,
    pub x: f64,
    pub value: f64,
}

fn grid(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..CURVE_POINTS).map(move |i| lo + (hi - lo) * i as f64 / (CURVE_POINTS - 1) as f64)
}

/// DCPA and range in metres, TCPA in seconds (head-on geometry, DCPA = 0,
/// closing at 10 m/s), bearing in degrees.
pub fn membership_curves(p: &RiskParams) -> Vec<CurvePoint> {
    let (_, r_u) = p.range_bounds();
    let bounds = tcpa_bounds(0.0, 10.0, p);
    let t_lo = -1.5 * bounds.t_nl;
    let t_hi = 1.5 * bounds.t_u;
    let mut out = Vec::with_capacity(4 * CURVE_POINTS);
    out.extend(grid(0.0, 1.25 * p.d_u).map(|x| CurvePoint {
        curve: "dcpa",
        x,
        value: u_dcpa(x, p),
    }));
    out.extend(grid(t_lo, t_hi).map(|x| CurvePoint {
        curve: "tcpa",
        x,
        value: u_tcpa(x, &bounds),
    }));
    out.extend(grid(0.0, 1.25 * r_u).map(|x| CurvePoint {
        curve: "range",
        x,
        value: u_r(x, p),
    }));
    out.extend(grid(-180.0, 180.0).map(|x| CurvePoint {
        curve: "bearing",
        x,
        value: u_theta(x.to_radians(), p),
    }));
    out
}

pub fn write_membership_curves<W: Write>(p: &RiskParams, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["curve", "x", "value"])?;
    for c in membership_curves(p) {
        w.write_record([c.curve.to_string(), c.x.to_string(), c.value.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<curves>", e))
}
