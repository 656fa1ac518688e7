//! Scripted baseline policies and an external action source.

use std::io::{BufRead, BufReader};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::env::{Action, Observation, StepInfo};
use crate::error::{read_to_string, Error, Result};

pub trait Policy: Send {
    fn reset(&mut self) {}

    /// `last` is the info of the previous step, `None` right after reset.
    fn act(&mut self, obs: &Observation, last: Option<&StepInfo>) -> Result<Action>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LosPdGains {
    pub kp: f64,
    /// Per rad/s of yaw rate.
    pub kd: f64,
    pub thrust: f64,
}

impl Default for LosPdGains {
    fn default() -> Self {
        Self {
            kp: 5.0,
            kd: 40.0,
            thrust: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    Idle,
    FullAhead,
    LosPd {
        #[serde(default)]
        gains: LosPdGains,
    },
    GiveWayScripted {
        #[serde(default)]
        gains: LosPdGains,
        #[serde(default = "default_threshold")]
        threshold: f64,
        /// Heading bias added while any target is above threshold (deg,
        /// positive to starboard).
        #[serde(default = "default_bias")]
        bias_deg: f64,
    },
    /// One `surge yaw` pair per line; `-` reads standard input.
    External { actions: PathBuf },
}

fn default_threshold() -> f64 {
    0.4
}

fn default_bias() -> f64 {
    60.0
}

impl PolicySpec {
    pub fn from_name(name: &str, actions: Option<PathBuf>) -> Result<Self> {
        Ok(match name {
            "idle" => PolicySpec::Idle,
            "full_ahead" => PolicySpec::FullAhead,
            "los_pd" => PolicySpec::LosPd {
                gains: LosPdGains::default(),
            },
            "give_way_scripted" => PolicySpec::GiveWayScripted {
                gains: LosPdGains::default(),
                threshold: default_threshold(),
                bias_deg: default_bias(),
            },
            "external" => PolicySpec::External {
                actions: actions.ok_or_else(|| Error::config("external policy needs an action source"))?,
            },
            other => {
                return Err(Error::config(format!(
                    "unknown policy `{other}` (expected idle, full_ahead, los_pd, give_way_scripted or external)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Idle => "idle",
            PolicySpec::FullAhead => "full_ahead",
            PolicySpec::LosPd { .. } => "los_pd",
            PolicySpec::GiveWayScripted { .. } => "give_way_scripted",
            PolicySpec::External { .. } => "external",
        }
    }

    /// Reading from stdin cannot be split across workers.
    pub fn is_streaming(&self) -> bool {
        matches!(self, PolicySpec::External { actions } if actions.as_os_str() == "-")
    }

    pub fn build(&self) -> Result<Box<dyn Policy>> {
        Ok(match self {
            PolicySpec::Idle => Box::new(Constant([0.0, 0.0])),
            PolicySpec::FullAhead => Box::new(Constant([1.0, 0.0])),
            PolicySpec::LosPd { gains } => Box::new(LosPd { gains: *gains }),
            PolicySpec::GiveWayScripted {
                gains,
                threshold,
                bias_deg,
            } => Box::new(GiveWay {
                los: LosPd { gains: *gains },
                threshold: *threshold,
                bias: bias_deg.to_radians(),
            }),
            PolicySpec::External { actions } if actions.as_os_str() == "-" => {
                Box::new(External::streaming(Box::new(BufReader::new(std::io::stdin()))))
            }
            PolicySpec::External { actions } => Box::new(External::from_text(&read_to_string(actions)?)?),
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Constant(pub Action);

impl Policy for Constant {
    fn act(&mut self, _: &Observation, _: Option<&StepInfo>) -> Result<Action> {
        Ok(self.0)
    }
}

/// PD on the look-ahead heading error with constant thrust.
#[derive(Debug, Clone, Copy)]
pub struct LosPd {
    pub gains: LosPdGains,
}

impl LosPd {
    pub fn command(&self, heading_err: f64, r: f64) -> Action {
        let g = &self.gains;
        let yaw = (g.kp * heading_err - g.kd * r).clamp(-1.0, 1.0);
        [g.thrust.clamp(-1.0, 1.0), yaw]
    }
}

impl Policy for LosPd {
    fn act(&mut self, obs: &Observation, _: Option<&StepInfo>) -> Result<Action> {
        Ok(self.command(obs.nav.heading_err, obs.nav.r))
    }
}

/// LOS PD that, while any target's CRI is above the threshold, turns to
/// starboard until both the look-ahead point and the riskiest target lie at
/// least `bias` to port.
#[derive(Debug, Clone, Copy)]
pub struct GiveWay {
    pub los: LosPd,
    pub threshold: f64,
    pub bias: f64,
}

impl Policy for GiveWay {
    fn act(&mut self, obs: &Observation, last: Option<&StepInfo>) -> Result<Action> {
        let riskiest = last
            .into_iter()
            .flat_map(|i| &i.risk)
            .filter(|r| r.cri > self.threshold)
            .max_by(|a, b| a.cri.total_cmp(&b.cri));
        let err = match riskiest {
            Some(r) => (obs.nav.heading_err + self.bias).max(r.theta_t + self.bias),
            None => obs.nav.heading_err,
        };
        Ok(self.los.command(err, obs.nav.r))
    }
}

pub struct External {
    source: ExternalSource,
    step: usize,
}

enum ExternalSource {
    Buffered(Vec<Action>),
    Stream(Box<dyn BufRead + Send>),
}

impl External {
    pub fn from_text(text: &str) -> Result<Self> {
        let actions = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .map(|(i, l)| parse_action(l, i + 1))
            .collect::<Result<_>>()?;
        Ok(Self {
            source: ExternalSource::Buffered(actions),
            step: 0,
        })
    }

    pub fn streaming(reader: Box<dyn BufRead + Send>) -> Self {
        Self {
            source: ExternalSource::Stream(reader),
            step: 0,
        }
    }
}

/// Accepts `a b`, `a,b` or `a, b`.
pub fn parse_action(line: &str, lineno: usize) -> Result<Action> {
    let parts: Vec<&str> = line
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect();
    let bad = |m: String| Error::Parse {
        location: format!("action line {lineno}"),
        message: m,
    };
    if parts.len() != 2 {
        return Err(bad(format!("expected two numbers, got `{}`", line.trim())));
    }
    let mut a = [0.0f64; 2];
    for (slot, p) in a.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|e| bad(format!("`{p}`: {e}")))?;
        if !slot.is_finite() {
            return Err(bad(format!("non-finite value `{p}`")));
        }
    }
    Ok([a[0].clamp(-1.0, 1.0), a[1].clamp(-1.0, 1.0)])
}

impl Policy for External {
    fn reset(&mut self) {
        if let ExternalSource::Buffered(_) = self.source {
            self.step = 0;
        }
    }

    fn act(&mut self, _: &Observation, _: Option<&StepInfo>) -> Result<Action> {
        self.step += 1;
        match &mut self.source {
            ExternalSource::Buffered(actions) => actions.get(self.step - 1).copied().ok_or_else(|| Error::Parse {
                location: "external actions".into(),
                message: format!("ran out of actions at step {}", self.step),
            }),
            ExternalSource::Stream(r) => loop {
                let mut line = String::new();
                let n = r.read_line(&mut line).map_err(|e| Error::io("<stdin>", e))?;
                if n == 0 {
                    return Err(Error::Parse {
                        location: "external actions".into(),
                        message: format!("stream closed at step {}", self.step),
                    });
                }
                if !line.trim().is_empty() {
                    return parse_action(&line, self.step);
                }
            },
        }
    }
}
