use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{RandomStream, SimConfig};
use crate::error::{Error, Result};
use crate::link::{propagate, receive_papr, unit_gain_channels, Method, Transceiver};
use crate::metrics::{exceedance_counts, theoretical_ccdf, threshold_at_probability, CcdfCurve};
use crate::modem::generate_bits;

/// Disclaimer attached to every receive-side curve.
pub const RECEIVE_MODEL: &str = "receive-side CCDF uses an assumed model: flat unit gain on \
every transmit/receive path, no noise unless rx-noise-power is set, PAPR of the period-1 \
superposed signal, maximum over receive antennas. The reference receive channel and \
measurement point are unspecified, so these curves are qualitative.";

/// Probabilities at which each curve's PAPR level is summarised.
const SUMMARY_PROBS: [f64; 3] = [1e-1, 1e-2, 1e-3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub probability: f64,
    pub papr_db: f64,
}

/// One method's CCDF, with exceedance counts and summary levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodCurve {
    pub method: Method,
    pub counts: Vec<usize>,
    pub curve: CcdfCurve,
    pub levels: Vec<Quantile>,
    /// Per-trial PAPR in dB, in trial order.
    #[serde(skip)]
    pub samples_db: Vec<f64>,
}

impl MethodCurve {
    fn new(method: Method, samples_db: Vec<f64>, thresholds: &[f64]) -> Result<Self> {
        let counts = exceedance_counts(&samples_db, thresholds);
        let curve = CcdfCurve::from_counts(thresholds.to_vec(), &counts, samples_db.len())?;
        let levels = SUMMARY_PROBS
            .iter()
            .map(|&p| {
                Ok(Quantile {
                    probability: p,
                    papr_db: threshold_at_probability(&samples_db, p)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            method,
            counts,
            curve,
            levels,
            samples_db,
        })
    }

    /// Resolution-limited PAPR level (dB) exceeded with probability `<= p`.
    pub fn level_at(&self, p: f64) -> f64 {
        threshold_at_probability(&self.samples_db, p).expect("curves are never empty")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub clip_ratio: String,
    pub theory: String,
    pub receive_model: Option<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub config: SimConfig,
    pub thresholds_db: Vec<f64>,
    pub theory: Vec<f64>,
    pub transmit: Vec<MethodCurve>,
    pub receive: Option<Vec<MethodCurve>>,
    pub metadata: Metadata,
    /// Wall-clock time of the run; not serialized so outputs stay
    /// reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl ResultSet {
    pub fn transmit_curve(&self, method: Method) -> Option<&MethodCurve> {
        self.transmit.iter().find(|c| c.method == method)
    }

    pub fn receive_curve(&self, method: Method) -> Option<&MethodCurve> {
        self.receive.as_ref()?.iter().find(|c| c.method == method)
    }
}

struct Trial {
    transmit_db: Vec<f64>,
    receive_db: Vec<f64>,
}

fn run_trial(link: &Transceiver, cfg: &SimConfig, index: u64) -> Result<Trial> {
    let mut stream = RandomStream::new(cfg.seed, index);
    let bits: Vec<_> = (0..cfg.n_tx)
        .map(|_| generate_bits(&mut stream, link.bits_per_block()))
        .collect();
    let channels = unit_gain_channels(cfg.n_rx);
    let mut trial = Trial {
        transmit_db: Vec::with_capacity(cfg.methods.len()),
        receive_db: Vec::new(),
    };
    for &method in &cfg.methods {
        let tx = link.transmit_frame(&bits, method)?;
        trial.transmit_db.push(tx.transmit_papr()?.db());
        if cfg.receive {
            let rx = propagate(&tx, &channels, cfg.rx_noise_power, &mut stream)?;
            trial.receive_db.push(receive_papr(&rx)?.db());
        }
    }
    Ok(trial)
}

fn curves(
    methods: &[Method],
    trials: &[Trial],
    pick: impl Fn(&Trial) -> &[f64],
    thresholds: &[f64],
) -> Result<Vec<MethodCurve>> {
    methods
        .iter()
        .enumerate()
        .map(|(i, &m)| MethodCurve::new(m, trials.iter().map(|t| pick(t)[i]).collect(), thresholds))
        .collect()
}

/// Run on rayon's global pool.
pub fn run_ccdf_experiment(cfg: &SimConfig) -> Result<ResultSet> {
    run(cfg)
}

/// Run on a dedicated pool of `threads` workers (0 picks rayon's default).
/// The result does not depend on `threads`.
pub fn run_ccdf_experiment_on(cfg: &SimConfig, threads: usize) -> Result<ResultSet> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    pool.install(|| run(cfg))
}

fn run(cfg: &SimConfig) -> Result<ResultSet> {
    let started = Instant::now();
    let cfg = cfg.clone().validated()?;
    let link = Transceiver::new(&cfg)?;
    let thresholds = cfg.thresholds();

    let trials = (0..cfg.n_symbols as u64)
        .into_par_iter()
        .map(|i| run_trial(&link, &cfg, i))
        .collect::<Result<Vec<_>>>()?;

    let transmit = curves(&cfg.methods, &trials, |t| &t.transmit_db, &thresholds)?;
    let receive = if cfg.receive {
        Some(curves(
            &cfg.methods,
            &trials,
            |t| &t.receive_db,
            &thresholds,
        )?)
    } else {
        None
    };

    let n_used = cfg.n_used();
    let theory = thresholds
        .iter()
        .map(|&t| theoretical_ccdf(n_used, cfg.n_tx, t))
        .collect();

    let floor = 10.0 / cfg.n_symbols as f64;
    let mut warnings = Vec::new();
    let thin = transmit
        .iter()
        .chain(receive.iter().flatten())
        .any(|c| c.curve.probs.iter().any(|&p| p > 0.0 && p < floor));
    if thin {
        warnings.push(format!(
            "CCDF values below {floor:.3e} rest on fewer than 10 exceedances of {} symbols",
            cfg.n_symbols
        ));
    }

    Ok(ResultSet {
        metadata: Metadata {
            clip_ratio: cfg.clip_ratio_interpretation(),
            theory: format!(
                "1 - (1 - exp(-g))^(n_tx * n_used) with n_used = {n_used}, n_tx = {}; \
                 assumes independent Nyquist-rate samples",
                cfg.n_tx
            ),
            receive_model: cfg.receive.then(|| RECEIVE_MODEL.to_string()),
            warnings,
        },
        config: cfg,
        thresholds_db: thresholds,
        theory,
        transmit,
        receive,
        elapsed: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig {
            n: 64,
            n_used: Some(37),
            oversample: 2,
            pts_subblocks: 4,
            n_symbols: 40,
            receive: true,
            ..SimConfig::default()
        }
    }

    #[test]
    fn curves_are_monotone_and_counted() {
        let rs = run_ccdf_experiment(&small()).unwrap();
        assert_eq!(rs.transmit.len(), 4);
        for c in rs.transmit.iter().chain(rs.receive.iter().flatten()) {
            assert!(c.counts[0] <= 40);
            assert!(c.counts.windows(2).all(|w| w[0] >= w[1]));
            assert!(c.curve.probs.iter().all(|p| (0.0..=1.0).contains(p)));
            assert_eq!(c.samples_db.len(), 40);
        }
        assert!(rs.metadata.receive_model.is_some());
        assert!(rs.metadata.clip_ratio.contains("dB"));
    }

    #[test]
    fn thread_count_does_not_matter() {
        let a = run_ccdf_experiment_on(&small(), 1).unwrap();
        let b = run_ccdf_experiment_on(&small(), 3).unwrap();
        assert_eq!(a.transmit, b.transmit);
        assert_eq!(a.receive, b.receive);
        for (x, y) in a.transmit.iter().zip(&b.transmit) {
            assert_eq!(x.samples_db, y.samples_db);
        }
    }

    #[test]
    fn reductions_never_hurt_per_trial() {
        let rs = run_ccdf_experiment(&small()).unwrap();
        let none = &rs.transmit_curve(Method::None).unwrap().samples_db;
        for m in [Method::Slm, Method::Pts] {
            let got = &rs.transmit_curve(m).unwrap().samples_db;
            for (g, n) in got.iter().zip(none) {
                assert!(g <= &(n + 1e-9), "{m}: {g} > {n}");
            }
        }
    }
}
