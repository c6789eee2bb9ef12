//! Monte Carlo symbol-error-rate trials across a power grid.
//!
//! Each trial derives its own RNG substream from (seed, grid index, trial
//! index) and error counts combine by integer sums, so the table is
//! identical for any thread count.

use std::fmt::Write as _;

use crate::channel::ChannelSet;
use crate::error::Result;
use crate::exec::{batched_map_fold, ExecMode};
use crate::modem::{
    constellation_params, draw_symbols, encode, legit_effective_channel, ml_decode, SchemeConfig,
    DEFAULT_DECODE_CAP,
};
use crate::precoder::PrecoderBasis;
use crate::rng::{label, seed_substream};

/// One (power, receiver) cell of the SER table. Errors count wrong symbols,
/// so `ser = errors / (trials * info_len)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SerPoint {
    pub p_db: f64,
    /// 1-based receiver index, matching the CSV output.
    pub receiver: usize,
    pub trials: u64,
    pub errors: u64,
    pub ser: f64,
}

#[derive(Debug, Clone)]
pub struct SerOptions {
    pub trials: u64,
    pub seed: u64,
    /// Setting this false zeroes the receiver noise (diagnostics only).
    pub noise: bool,
    pub decode_cap: u128,
    pub mode: ExecMode,
}

impl Default for SerOptions {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: 0,
            noise: true,
            decode_cap: DEFAULT_DECODE_CAP,
            mode: ExecMode::default(),
        }
    }
}

/// Runs `trials` independent frames per grid power and reports the per-
/// receiver symbol error fraction. Grid powers are in dB: P = 10^(dB/10)
/// against unit noise variance.
pub fn run_ser_trials(
    ch: &ChannelSet,
    basis: &PrecoderBasis,
    cfg: &SchemeConfig,
    p_grid_db: &[f64],
    opts: &SerOptions,
) -> Result<Vec<SerPoint>> {
    let dims = ch.dims();
    let effs: Vec<_> = (0..dims.j1)
        .map(|j| legit_effective_channel(j, ch, basis, cfg))
        .collect();
    let vmat = basis.precoder_matrix(ch);

    let mut table = Vec::with_capacity(p_grid_db.len() * dims.j1);
    for (p_idx, &p_db) in p_grid_db.iter().enumerate() {
        let p = 10f64.powf(p_db / 10.0);
        let params = constellation_params(p, cfg, &vmat)?;
        // fail fast on oversized instances before spawning trials
        ml_decode(0.0, &effs[0], &params, opts.decode_cap)?;

        let errors: Vec<u64> = batched_map_fold(
            opts.trials,
            opts.mode,
            || vec![0u64; dims.j1],
            |t| {
                let mut rng = seed_substream(opts.seed, &[label::SER_TRIAL, p_idx as u64, t]);
                let b1 = draw_symbols(&mut rng, cfg.info_len, params.half_range);
                let b2 = draw_symbols(&mut rng, cfg.noise_len, params.half_range);
                let frame = encode(&b1, &b2, &params, cfg, &vmat).expect("in-range symbols");
                let out = if opts.noise {
                    ch.apply(&frame.x, Some(&mut rng))
                } else {
                    ch.apply::<rand_chacha::ChaCha8Rng>(&frame.x, None)
                }
                .expect("frame length matches dims");
                (0..dims.j1)
                    .map(|j| {
                        let dec = ml_decode(out.y[j], &effs[j], &params, opts.decode_cap)
                            .expect("cap checked above");
                        dec.info
                            .iter()
                            .zip(&b1)
                            .filter(|(a, b)| a != b)
                            .count() as u64
                    })
                    .collect()
            },
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            },
        );

        let denom = (opts.trials * cfg.info_len as u64) as f64;
        for (j, &e) in errors.iter().enumerate() {
            table.push(SerPoint {
                p_db,
                receiver: j + 1,
                trials: opts.trials,
                errors: e,
                ser: e as f64 / denom,
            });
        }
    }
    Ok(table)
}

/// Wilson score interval for a binomial proportion at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// True when a sequence of binomial counts is nonincreasing up to Monte
/// Carlo noise: each step's lower confidence bound must not exceed the
/// previous step's upper bound. `z = 1.96` gives the 95% level.
pub fn nonincreasing_within_confidence(errors: &[u64], trials: &[u64], z: f64) -> bool {
    errors
        .windows(2)
        .zip(trials.windows(2))
        .all(|(e, t)| wilson_interval(e[1], t[1], z).0 <= wilson_interval(e[0], t[0], z).1)
}

/// CSV with the pinned schema `P_dB,receiver,trials,errors,ser`.
pub fn ser_table_csv(points: &[SerPoint]) -> String {
    let mut out = String::from("P_dB,receiver,trials,errors,ser\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.p_db, p.receiver, p.trials, p.errors, p.ser
        );
    }
    out
}
