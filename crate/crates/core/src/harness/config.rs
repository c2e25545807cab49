use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::Method;
use crate::reduction::{quadrature_phases, ClipConfig, PartitionScheme, PtsPlan, SearchStrategy};

/// How the configured clipping ratio is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClipRatioUnit {
    /// `A = rms * 10^(cr/20)`.
    Db,
    /// `A = rms * cr`.
    Linear,
}

/// Every knob of a CCDF experiment. [`SimConfig::default`] is the 2×2,
/// N = 512, L = 6, QPSK setup with 1000 symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct SimConfig {
    pub n: usize,
    /// `None` picks the default for `n` (301 for 512, 601 for 1024).
    pub n_used: Option<usize>,
    pub oversample: usize,
    pub n_tx: usize,
    pub n_rx: usize,
    pub methods: Vec<Method>,
    pub clip_ratio: f64,
    pub clip_ratio_unit: ClipRatioUnit,
    pub clip_iterations: usize,
    pub slm_routes: usize,
    pub pts_subblocks: usize,
    pub pts_scheme: PartitionScheme,
    pub pts_strategy: SearchStrategy,
    #[serde(rename = "symbols")]
    pub n_symbols: usize,
    pub seed: u64,
    pub threshold_start: f64,
    pub threshold_stop: f64,
    pub threshold_step: f64,
    /// Also measure receive-side CCDFs.
    pub receive: bool,
    pub rx_noise_power: f64,
    /// Permit exhaustive PTS searches larger than [`EXHAUSTIVE_LIMIT`].
    pub allow_exhaustive: bool,
}

/// Largest exhaustive PTS search (candidates per block) run without
/// `allow-exhaustive`.
pub const EXHAUSTIVE_LIMIT: usize = 4096;

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 512,
            n_used: None,
            oversample: 6,
            n_tx: 2,
            n_rx: 2,
            methods: Method::ALL.to_vec(),
            clip_ratio: 4.0,
            clip_ratio_unit: ClipRatioUnit::Db,
            clip_iterations: 1,
            slm_routes: 8,
            pts_subblocks: 8,
            pts_scheme: PartitionScheme::Adjacent,
            pts_strategy: SearchStrategy::Greedy,
            n_symbols: 1000,
            seed: 1,
            threshold_start: 4.0,
            threshold_stop: 13.0,
            threshold_step: 0.1,
            receive: false,
            rx_noise_power: 0.0,
            allow_exhaustive: false,
        }
    }
}

/// `start, start + step, ...` up to and including `stop`, rounded to 1e-9 dB.
pub fn threshold_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && start.is_finite() && stop.is_finite() && stop >= start) {
        return Err(Error::config(
            "threshold-step",
            "empty or invalid threshold grid",
        ));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

/// Default occupied-carrier count: the odd number nearest `0.5875 * n`,
/// which gives 301 of 512 and 601 of 1024.
fn default_n_used(n: usize) -> usize {
    2 * ((0.5875 * n as f64) / 2.0).floor() as usize + 1
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(Error::config(
            key,
            format!("expected a boolean, got `{other}`"),
        )),
    }
}

impl SimConfig {
    pub fn n_used(&self) -> usize {
        self.n_used.unwrap_or_else(|| default_n_used(self.n))
    }

    pub fn cr_db(&self) -> f64 {
        match self.clip_ratio_unit {
            ClipRatioUnit::Db => self.clip_ratio,
            ClipRatioUnit::Linear => 20.0 * self.clip_ratio.log10(),
        }
    }

    pub fn clip_config(&self) -> ClipConfig {
        ClipConfig {
            cr_db: self.cr_db(),
            iterations: self.clip_iterations,
        }
    }

    /// Human-readable account of how the clipping ratio was applied.
    pub fn clip_ratio_interpretation(&self) -> String {
        let unit = match self.clip_ratio_unit {
            ClipRatioUnit::Db => "dB",
            ClipRatioUnit::Linear => "linear",
        };
        format!(
            "clipping ratio {} read as {unit}: A = {:.4} x RMS ({:.4} dB)",
            self.clip_ratio,
            10f64.powf(self.cr_db() / 20.0),
            self.cr_db()
        )
    }

    pub fn slm_alphabet(&self) -> Vec<Complex64> {
        quadrature_phases()
    }

    pub fn pts_plan(&self) -> PtsPlan {
        PtsPlan {
            v_count: self.pts_subblocks,
            scheme: self.pts_scheme,
            alphabet: quadrature_phases(),
            strategy: self.pts_strategy,
        }
    }

    pub fn thresholds(&self) -> Vec<f64> {
        threshold_grid(
            self.threshold_start,
            self.threshold_stop,
            self.threshold_step,
        )
        .unwrap_or_default()
    }

    /// Set one `key=value` setting. Keys are the CLI flag names.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => self.n = parse(key, value)?,
            "n-used" => self.n_used = Some(parse(key, value)?),
            "oversample" => self.oversample = parse(key, value)?,
            "n-tx" => self.n_tx = parse(key, value)?,
            "n-rx" => self.n_rx = parse(key, value)?,
            "methods" => {
                self.methods = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "cr-db" => {
                self.clip_ratio = parse(key, value)?;
                self.clip_ratio_unit = ClipRatioUnit::Db;
            }
            "cr-linear" => {
                self.clip_ratio = parse(key, value)?;
                self.clip_ratio_unit = ClipRatioUnit::Linear;
            }
            "clip-iterations" => self.clip_iterations = parse(key, value)?,
            "slm-routes" => self.slm_routes = parse(key, value)?,
            "pts-subblocks" => self.pts_subblocks = parse(key, value)?,
            "pts-scheme" => {
                self.pts_scheme = match value.trim() {
                    "adjacent" => PartitionScheme::Adjacent,
                    "interleaved" => PartitionScheme::Interleaved,
                    other => return Err(Error::config(key, format!("unknown scheme `{other}`"))),
                }
            }
            "pts-strategy" => {
                self.pts_strategy = match value.trim() {
                    "greedy" => SearchStrategy::Greedy,
                    "exhaustive" => SearchStrategy::Exhaustive,
                    other => return Err(Error::config(key, format!("unknown strategy `{other}`"))),
                }
            }
            "symbols" => self.n_symbols = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "threshold-start" => self.threshold_start = parse(key, value)?,
            "threshold-stop" => self.threshold_stop = parse(key, value)?,
            "threshold-step" => self.threshold_step = parse(key, value)?,
            "receive" => self.receive = parse_bool(key, value)?,
            "rx-noise-power" => self.rx_noise_power = parse(key, value)?,
            "allow-exhaustive" => self.allow_exhaustive = parse_bool(key, value)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Parse flat `key=value` lines. Blank lines and `#` comments are skipped.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(line, "expected key=value"))?;
            cfg.apply(key.trim(), value)?;
        }
        Ok(cfg)
    }

    /// Check every invariant and pin `n_used` to its resolved value.
    pub fn validated(mut self) -> Result<Self> {
        if self.n < 2 || !self.n.is_power_of_two() {
            return Err(Error::config(
                "n",
                format!("{} is not a power of two >= 2", self.n),
            ));
        }
        let n_used = self.n_used();
        if n_used == 0 || n_used > self.n {
            return Err(Error::config(
                "n-used",
                format!("{n_used} occupied carriers do not fit in n = {}", self.n),
            ));
        }
        self.n_used = Some(n_used);
        if self.oversample == 0 {
            return Err(Error::config("oversample", "must be at least 1"));
        }
        if !(1..=2).contains(&self.n_tx) {
            return Err(Error::config(
                "n-tx",
                "supported transmit antenna counts are 1 and 2",
            ));
        }
        if self.n_rx == 0 {
            return Err(Error::config("n-rx", "need at least one receive antenna"));
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods", "no methods selected"));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::config("methods", format!("`{m}` listed twice")));
            }
        }
        let ratio_key = match self.clip_ratio_unit {
            ClipRatioUnit::Db => "cr-db",
            ClipRatioUnit::Linear => "cr-linear",
        };
        if !self.clip_ratio.is_finite()
            || (self.clip_ratio_unit == ClipRatioUnit::Linear && self.clip_ratio <= 0.0)
        {
            return Err(Error::config(
                ratio_key,
                format!("invalid ratio {}", self.clip_ratio),
            ));
        }
        if self.slm_routes == 0 {
            return Err(Error::config("slm-routes", "need at least one route"));
        }
        if self.pts_subblocks == 0 || self.pts_subblocks > n_used {
            return Err(Error::config(
                "pts-subblocks",
                format!("need 1..={n_used} sub-blocks, got {}", self.pts_subblocks),
            ));
        }
        if self.pts_strategy == SearchStrategy::Exhaustive && !self.allow_exhaustive {
            let candidates = (self.slm_alphabet().len() as f64).powi(self.pts_subblocks as i32 - 1);
            if candidates > EXHAUSTIVE_LIMIT as f64 {
                return Err(Error::config(
                    "pts-strategy",
                    format!(
                        "exhaustive search over {candidates} phase vectors per block needs allow-exhaustive"
                    ),
                ));
            }
        }
        if self.n_symbols == 0 {
            return Err(Error::config("symbols", "need at least one symbol"));
        }
        threshold_grid(
            self.threshold_start,
            self.threshold_stop,
            self.threshold_step,
        )?;
        if !(self.rx_noise_power >= 0.0 && self.rx_noise_power.is_finite()) {
            return Err(Error::config("rx-noise-power", "must be finite and >= 0"));
        }
        Ok(self)
    }
}

/// Load a configuration file (flat `key=value` lines, or a JSON result or
/// config object), then apply `overrides` in order, then validate.
pub fn load_config(path: Option<&Path>, overrides: &[(String, String)]) -> Result<SimConfig> {
    let mut cfg = match path {
        None => SimConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| Error::Io {
                path: p.display().to_string(),
                source,
            })?;
            if text.trim_start().starts_with('{') {
                from_json(&text)?
            } else {
                SimConfig::from_key_values(&text)?
            }
        }
    };
    for (k, v) in overrides {
        cfg.apply(k, v)?;
    }
    cfg.validated()
}

fn from_json(text: &str) -> Result<SimConfig> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::config("json", e.to_string()))?;
    let inner = match value.get("config") {
        Some(c) => c.clone(),
        None => value,
    };
    serde_json::from_value(inner).map_err(|e| Error::config("json", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_gives_defaults() {
        let cfg = load_config(None, &[]).unwrap();
        assert_eq!(cfg.n, 512);
        assert_eq!(cfg.n_used, Some(301));
        assert_eq!(cfg.oversample, 6);
        assert_eq!(cfg.slm_routes, 8);
        assert_eq!(cfg.pts_subblocks, 8);
        assert_eq!(cfg.cr_db(), 4.0);
        assert_eq!(cfg.n_symbols, 1000);
        assert_eq!((cfg.n_tx, cfg.n_rx), (2, 2));
        assert_eq!(
            SimConfig::from_key_values("").unwrap(),
            SimConfig::default()
        );
    }

    #[test]
    fn larger_fft_defaults() {
        let cfg = load_config(None, &[("n".into(), "1024".into())]).unwrap();
        assert_eq!(cfg.n_used(), 601);
    }

    #[test]
    fn rejections_name_the_key() {
        let err = load_config(None, &[("n-used".into(), "600".into())]).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "n-used"));

        let err = SimConfig::from_key_values("colour=blue").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "colour"));

        let err = SimConfig::from_key_values("oversample=six").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "oversample"));

        let err = load_config(None, &[("methods".into(), "none,none".into())]).unwrap_err();
        assert!(err.is_config());

        let err = load_config(None, &[("pts-strategy".into(), "exhaustive".into())]).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "pts-strategy"));
        assert!(load_config(
            None,
            &[
                ("pts-strategy".into(), "exhaustive".into()),
                ("allow-exhaustive".into(), "true".into())
            ]
        )
        .is_ok());
    }

    #[test]
    fn key_value_file() {
        let cfg = SimConfig::from_key_values(
            "# small run\nn = 64\nn-used=37\nmethods=none,slm\ncr-linear=2\nreceive=yes\n",
        )
        .unwrap()
        .validated()
        .unwrap();
        assert_eq!(cfg.n, 64);
        assert_eq!(cfg.methods, vec![Method::None, Method::Slm]);
        assert!((cfg.cr_db() - 6.0206).abs() < 1e-4);
        assert!(cfg.receive);
    }

    #[test]
    fn threshold_grid() {
        let t = SimConfig::default().thresholds();
        assert_eq!(t.len(), 91);
        assert_eq!(t[0], 4.0);
        assert_eq!(t[1], 4.1);
        assert_eq!(t[90], 13.0);
    }

    #[test]
    fn json_round_trip() {
        let cfg = SimConfig {
            seed: 99,
            methods: vec![Method::Pts],
            ..SimConfig::default()
        };
        let cfg = cfg.validated().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(from_json(&text).unwrap(), cfg);
    }
}
