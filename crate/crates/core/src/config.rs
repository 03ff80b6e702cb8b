//! Run settings and the flat `key = value` configuration file.
//!
//! ```text
//! # generator
//! seed = 7
//! investors = 25
//! ticks = 5000
//! price_model = walk:100,0.0,0.01      # constant:P | walk:START,DRIFT,VOL | lognormal:MU,SIGMA
//! volume_model = pareto:1.5,1          # fixed:V | uniform:LO,HI | pareto:ALPHA,MIN
//! buy_probability = 0.55
//! # pipeline
//! window = 250
//! tau = 250t
//! policy = fifo
//! oracle = true
//! format = csv
//! ```

use std::path::PathBuf;
use std::str::FromStr;

use crate::anticipated::Tau;
use crate::error::{Error, Result};
use crate::io::ReportFormat;
use crate::pipeline::PipelineOptions;
use crate::sim::{PriceModel, SimConfig, StressCase, VolumeModel};

fn params<const K: usize>(kind: &str, body: &str) -> Result<[f64; K]> {
    let parts: Vec<&str> = body.split(',').map(str::trim).collect();
    if parts.len() != K {
        return Err(Error::config(format!(
            "`{kind}` takes {K} parameter(s), got `{body}`"
        )));
    }
    let mut out = [0.0; K];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p
            .parse()
            .map_err(|_| Error::config(format!("`{p}` is not a number in `{kind}:{body}`")))?;
    }
    Ok(out)
}

fn split_model(s: &str) -> (&str, &str) {
    s.split_once(':')
        .map_or((s, ""), |(k, b)| (k.trim(), b.trim()))
}

impl FromStr for PriceModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let model = match split_model(s) {
            ("constant", b) => PriceModel::Constant(params::<1>("constant", b)?[0]),
            ("walk", b) => {
                let [start, drift, step_vol] = params("walk", b)?;
                PriceModel::GeometricWalk {
                    start,
                    drift,
                    step_vol,
                }
            }
            ("lognormal", b) => {
                let [mu, sigma] = params("lognormal", b)?;
                PriceModel::Lognormal { mu, sigma }
            }
            _ => return Err(Error::config(format!("unknown price model `{s}`"))),
        };
        Ok(model)
    }
}

impl FromStr for VolumeModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let model = match split_model(s) {
            ("fixed", b) => VolumeModel::Fixed(params::<1>("fixed", b)?[0]),
            ("uniform", b) => {
                let [lo, hi] = params("uniform", b)?;
                if lo.fract() != 0.0 || hi.fract() != 0.0 || lo < 0.0 || hi < 0.0 {
                    return Err(Error::config(format!(
                        "uniform bounds must be whole numbers, got `{b}`"
                    )));
                }
                VolumeModel::UniformInt {
                    lo: lo as u64,
                    hi: hi as u64,
                }
            }
            ("pareto", b) => {
                let [alpha, min] = params("pareto", b)?;
                VolumeModel::Pareto { alpha, min }
            }
            _ => return Err(Error::config(format!("unknown volume model `{s}`"))),
        };
        Ok(model)
    }
}

/// Everything a run needs. Without `input` or `stress` the log is simulated
/// from `sim`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Settings {
    pub input: Option<PathBuf>,
    pub stress: Option<StressCase>,
    pub sim: SimConfig,
    pub pipeline: PipelineOptions,
    pub format: ReportFormat,
    pub out: Option<PathBuf>,
    pub events_out: Option<PathBuf>,
    /// Horizons for a sweep report; replaces the regular report when set.
    pub tau_sweep: Option<Vec<Tau>>,
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::config(format!(
            "`{key}` expects true or false, got `{v}`"
        ))),
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::config(format!("cannot parse `{v}` for `{key}`")))
}

pub fn parse_tau_list(s: &str) -> Result<Vec<Tau>> {
    s.split(',').map(|t| t.trim().parse()).collect()
}

impl Settings {
    /// Set one key. Unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "seed" => self.sim.seed = parse_num(key, v)?,
            "investors" | "investor_count" => self.sim.investor_count = parse_num(key, v)?,
            "ticks" | "tick_count" => self.sim.tick_count = parse_num(key, v)?,
            "price_model" => self.sim.price_model = v.parse()?,
            "volume_model" => self.sim.volume_model = v.parse()?,
            "buy_probability" | "buy_sell_mix" => self.sim.buy_probability = parse_num(key, v)?,
            "window" | "window_size" => {
                let n = parse_num(key, v)?;
                self.pipeline.window_size = n;
                self.sim.window_size = n;
            }
            "tau" => self.pipeline.tau = Some(v.parse()?),
            "policy" => self.pipeline.policy = v.parse()?,
            "oracle" => self.pipeline.oracle = parse_bool(key, v)?,
            "integer_volumes" => self.pipeline.integer_volumes = parse_bool(key, v)?,
            "format" => self.format = v.parse()?,
            "input" => self.input = Some(PathBuf::from(v)),
            "out" => self.out = Some(PathBuf::from(v)),
            "events_out" => self.events_out = Some(PathBuf::from(v)),
            "stress" => self.stress = Some(v.parse()?),
            "tau_sweep" => self.tau_sweep = Some(parse_tau_list(v)?),
            other => return Err(Error::config(format!("unknown setting `{other}`"))),
        }
        Ok(())
    }

    /// Apply a `key = value` file. `#` starts a comment; blank lines are ignored.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(key, value)
                .map_err(|e| Error::config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::MatchPolicy;

    #[test]
    fn config_file() {
        let mut s = Settings::default();
        s.apply_config_text(
            "# comment\nseed = 9\n\ninvestors=3 # trailing\nprice_model = constant:10\n\
             volume_model = uniform:1,5\nwindow = 20\npolicy = lifo\noracle = yes\nformat = json\n",
        )
        .unwrap();
        assert_eq!(s.sim.seed, 9);
        assert_eq!(s.sim.investor_count, 3);
        assert_eq!(s.sim.price_model, PriceModel::Constant(10.0));
        assert_eq!(s.sim.volume_model, VolumeModel::UniformInt { lo: 1, hi: 5 });
        assert_eq!(s.pipeline.window_size, 20);
        assert_eq!(s.sim.window_size, 20);
        assert_eq!(s.pipeline.policy, MatchPolicy::Lifo);
        assert!(s.pipeline.oracle);
        assert_eq!(s.format, ReportFormat::Json);
    }

    #[test]
    fn config_errors() {
        let mut s = Settings::default();
        assert!(matches!(
            s.apply_config_text("nope = 1"),
            Err(Error::Config(_))
        ));
        assert!(matches!(s.apply_config_text("seed"), Err(Error::Config(_))));
        assert!(matches!(
            s.set("price_model", "walk:1,2"),
            Err(Error::Config(_))
        ));
        assert!(matches!(s.set("stress", "bogus"), Err(Error::Config(_))));
        assert!(s.set("volume_model", "pareto:1.5,2").is_ok());
    }
}
