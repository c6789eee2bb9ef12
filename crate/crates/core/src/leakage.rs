//! Numerical information leakage on the scalar effective channels.
//!
//! Conditioned on the transmitted symbols, each receiver output is Gaussian,
//! so the output marginal is an equal-weight Gaussian mixture over all
//! (b1, b2) pairs and I(b1; output) = h(output) - avg_b1 h(output | b1).
//! Both differential entropies come from the same quadrature on the mixture
//! density; internals are natural-log, results convert to bits at the end.

use std::fmt::Write as _;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::exec::{indexed_map, ExecMode};
use crate::modem::{
    advance, constellation_params, eaves_effective_channel, legit_effective_channel,
    ConstellationParams, EffectiveChannel, SchemeConfig,
};
use crate::precoder::PrecoderBasis;

/// Default cap on the enumerated constellation (2Q+1)^(KL+ML); beyond it the
/// formula bounds must be used instead.
pub const DEFAULT_ENUM_CAP: u128 = 100_000;

/// Options for the mutual-information quadrature.
#[derive(Debug, Clone)]
pub struct MutualInfoOptions {
    /// Receiver noise standard deviation (the channel model uses 1).
    pub noise_sigma: f64,
    /// Relative tolerance of the entropy quadrature.
    pub rel_tol: f64,
    pub enum_cap: u128,
    /// Force the noise symbols to zero: the no-artificial-noise ablation.
    pub zero_noise_symbols: bool,
    pub mode: ExecMode,
}

impl Default for MutualInfoOptions {
    fn default() -> Self {
        Self {
            noise_sigma: 1.0,
            rel_tol: 1e-4,
            enum_cap: DEFAULT_ENUM_CAP,
            zero_noise_symbols: false,
            mode: ExecMode::default(),
        }
    }
}

/// Numerical leakage quantities at one power point, in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageEstimate {
    pub p_db: f64,
    /// min over legitimate receivers of I(b1; y_j).
    pub i_b1_y: f64,
    /// max over eavesdroppers of I(b1; z_k); 0 when there are none.
    pub i_b1_z: f64,
    /// i_b1_z / (1/2 log2 P).
    pub normalized_leakage: f64,
}

fn ln_mixture_density(y: f64, means: &[f64], sigma: f64) -> f64 {
    // logsumexp of the component exponents, minus the shared normalizer
    let mut max = f64::NEG_INFINITY;
    for &mu in means {
        let t = -0.5 * ((y - mu) / sigma).powi(2);
        if t > max {
            max = t;
        }
    }
    let sum: f64 = means
        .iter()
        .map(|&mu| (-0.5 * ((y - mu) / sigma).powi(2) - max).exp())
        .sum();
    max + sum.ln()
        - (means.len() as f64).ln()
        - sigma.ln()
        - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

/// Differential entropy (nats) of an equal-weight Gaussian mixture by
/// trapezoid refinement with Simpson extrapolation. Integration covers every
/// component to 8 standard deviations; the initial grid resolves sigma/4 so
/// no spike is skipped, then the grid doubles until the relative change is
/// below `rel_tol` (also checked against the previous level).
pub(crate) fn mixture_entropy_nats(means: &[f64], sigma: f64, rel_tol: f64) -> f64 {
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min) - 8.0 * sigma;
    let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 8.0 * sigma;
    let integrand = |y: f64| -> f64 {
        let lnf = ln_mixture_density(y, means, sigma);
        if lnf < -700.0 {
            0.0
        } else {
            -lnf.exp() * lnf
        }
    };

    let range = hi - lo;
    let mut panels: u64 = 256;
    while (panels as f64) < 4.0 * range / sigma && panels < (1 << 20) {
        panels *= 2;
    }

    let composite_trapezoid = |n: u64| -> f64 {
        let h = range / n as f64;
        let mut sum = 0.5 * (integrand(lo) + integrand(hi));
        for i in 1..n {
            sum += integrand(lo + i as f64 * h);
        }
        sum * h
    };

    let mut t_prev = composite_trapezoid(panels);
    let mut s_prev = f64::NAN;
    loop {
        panels *= 2;
        // refine the trapezoid with the new midpoints only
        let h = range / panels as f64;
        let mut mid_sum = 0.0;
        let mut i = 1;
        while i < panels {
            mid_sum += integrand(lo + i as f64 * h);
            i += 2;
        }
        let t_next = 0.5 * t_prev + h * mid_sum;
        let s_next = (4.0 * t_next - t_prev) / 3.0;
        if !s_prev.is_nan() && (s_next - s_prev).abs() <= rel_tol * s_next.abs().max(1e-9) {
            return s_next;
        }
        if panels >= (1 << 22) {
            return s_next;
        }
        t_prev = t_next;
        s_prev = s_next;
    }
}

fn enumerate_symbols(len: usize, q: i64, mut visit: impl FnMut(&[i64])) {
    let lo = vec![-q; len];
    let hi = vec![q; len];
    let mut cur = lo.clone();
    loop {
        visit(&cur);
        if !advance(&mut cur, &lo, &hi) {
            break;
        }
    }
}

/// I(b1; output) in bits for one effective channel, by exact enumeration of
/// the constellation and quadrature on the resulting Gaussian mixtures.
/// Errors when (2Q+1)^(KL+ML) exceeds the enumeration cap.
pub fn mutual_info_exact(
    eff: &EffectiveChannel,
    params: &ConstellationParams,
    opts: &MutualInfoOptions,
) -> Result<f64> {
    let q = params.half_range;
    let info_len = eff.hhat.len();
    let gains = eff.noise_gains();
    let noise_len = if opts.zero_noise_symbols { 0 } else { gains.len() };

    let points_per = 2 * q as u128 + 1;
    let total = points_per
        .checked_pow((info_len + noise_len) as u32)
        .filter(|&t| t <= opts.enum_cap)
        .ok_or(Error::CapExceeded {
            what: "mutual-information enumeration",
            needed: u128::MAX,
            cap: opts.enum_cap,
        })?;
    let _ = total;

    let a = params.spacing;
    // conditional mixture means, one bucket per b1 value
    let mut conditional: Vec<Vec<f64>> = Vec::new();
    enumerate_symbols(info_len, q, |b1| {
        let info: f64 = eff.hhat.iter().zip(b1).map(|(&h, &b)| h * b as f64).sum();
        let mut means = Vec::new();
        if noise_len == 0 {
            means.push(a * info);
        } else {
            enumerate_symbols(noise_len, q, |b2| {
                let noise: f64 = gains.iter().zip(b2).map(|(&g, &b)| g * b as f64).sum();
                means.push(a * (info + noise));
            });
        }
        conditional.push(means);
    });

    let marginal: Vec<f64> = conditional.iter().flatten().copied().collect();
    let h_marginal = mixture_entropy_nats(&marginal, opts.noise_sigma, opts.rel_tol);
    let h_conditional = conditional
        .iter()
        .map(|means| mixture_entropy_nats(means, opts.noise_sigma, opts.rel_tol))
        .sum::<f64>()
        / conditional.len() as f64;

    Ok(((h_marginal - h_conditional) / std::f64::consts::LN_2).max(0.0))
}

/// Evaluates the leakage quantities over a dB power grid. Grid points are
/// independent and may run in parallel; output order follows the grid.
pub fn leakage_curve(
    ch: &ChannelSet,
    basis: &PrecoderBasis,
    cfg: &SchemeConfig,
    p_grid_db: &[f64],
    opts: &MutualInfoOptions,
) -> Result<Vec<LeakageEstimate>> {
    let dims = ch.dims();
    let vmat = basis.precoder_matrix(ch);
    let legit: Vec<_> = (0..dims.j1)
        .map(|j| legit_effective_channel(j, ch, basis, cfg))
        .collect();
    let eaves: Vec<_> = (0..dims.j2)
        .map(|k| eaves_effective_channel(k, ch, basis, cfg))
        .collect();

    let point_opts = MutualInfoOptions {
        mode: ExecMode::Sequential,
        ..opts.clone()
    };
    let results = indexed_map(p_grid_db, opts.mode, |&p_db| -> Result<LeakageEstimate> {
        let p = 10f64.powf(p_db / 10.0);
        let params = constellation_params(p, cfg, &vmat)?;
        let mut i_y = f64::INFINITY;
        for eff in &legit {
            i_y = i_y.min(mutual_info_exact(eff, &params, &point_opts)?);
        }
        let mut i_z = 0.0f64;
        for eff in &eaves {
            i_z = i_z.max(mutual_info_exact(eff, &params, &point_opts)?);
        }
        Ok(LeakageEstimate {
            p_db,
            i_b1_y: i_y,
            i_b1_z: i_z,
            normalized_leakage: i_z / (0.5 * p.log2()),
        })
    });
    results.into_iter().collect()
}

/// CSV with the pinned schema `P_dB,I_b1_y,I_b1_z,norm_leak`.
pub fn leakage_table_csv(points: &[LeakageEstimate]) -> String {
    let mut out = String::from("P_dB,I_b1_y,I_b1_z,norm_leak\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            p.p_db, p.i_b1_y, p.i_b1_z, p.normalized_leakage
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{GainDist, SystemDims};
    use crate::modem::draw_dithers;
    use crate::rng::seed_substream;
    use crate::secrecy::entropy_b1;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn minimal() -> (ChannelSet, PrecoderBasis, SchemeConfig) {
        let dims = SystemDims::new(2, 1, 1).unwrap();
        let ch = ChannelSet::sample(dims, GainDist::StandardNormal, 17).unwrap();
        let basis = PrecoderBasis::build(dims, 1).unwrap();
        let (u, alpha) = draw_dithers(2, 1, 17);
        let cfg = SchemeConfig::new(&basis, 1, u, alpha, 0.05).unwrap();
        (ch, basis, cfg)
    }

    #[test]
    fn single_gaussian_entropy_matches_closed_form() {
        for sigma in [0.5, 1.0, 3.0] {
            let h = mixture_entropy_nats(&[0.7], sigma, 1e-6);
            let exact = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * sigma * sigma).ln();
            assert!((h - exact).abs() < 1e-5, "sigma {sigma}: {h} vs {exact}");
        }
    }

    #[test]
    fn zero_information_gain_means_zero_mi() {
        let (ch, basis, cfg) = minimal();
        let vmat = basis.precoder_matrix(&ch);
        let params = constellation_params(1e3, &cfg, &vmat).unwrap();
        let mut eff = legit_effective_channel(0, &ch, &basis, &cfg);
        eff.hhat = vec![0.0];
        let mi = mutual_info_exact(&eff, &params, &MutualInfoOptions::default()).unwrap();
        assert!(mi.abs() < 1e-6, "mi = {mi}");
    }

    #[test]
    fn overwhelming_noise_kills_information() {
        let (ch, basis, cfg) = minimal();
        let vmat = basis.precoder_matrix(&ch);
        let params = constellation_params(1e3, &cfg, &vmat).unwrap();
        let eff = legit_effective_channel(0, &ch, &basis, &cfg);
        let opts = MutualInfoOptions {
            noise_sigma: 1e3, // variance 1e6
            ..Default::default()
        };
        let mi = mutual_info_exact(&eff, &params, &opts).unwrap();
        assert!(mi < 1e-3, "mi = {mi}");
    }

    #[test]
    fn mi_bounded_by_input_entropy() {
        let (ch, basis, cfg) = minimal();
        let vmat = basis.precoder_matrix(&ch);
        for p_db in [10.0, 25.0, 40.0] {
            let p = 10f64.powf(p_db / 10.0);
            let params = constellation_params(p, &cfg, &vmat).unwrap();
            let eff = legit_effective_channel(0, &ch, &basis, &cfg);
            let mi = mutual_info_exact(&eff, &params, &MutualInfoOptions::default()).unwrap();
            let cap = entropy_b1(cfg.info_len, params.half_range);
            assert!(mi >= 0.0 && mi <= cap + 1e-3, "mi {mi} cap {cap}");
        }
    }

    #[test]
    fn enumeration_cap_enforced() {
        let (ch, basis, cfg) = minimal();
        let vmat = basis.precoder_matrix(&ch);
        let params = constellation_params(1e3, &cfg, &vmat).unwrap();
        let eff = legit_effective_channel(0, &ch, &basis, &cfg);
        let opts = MutualInfoOptions {
            enum_cap: 4,
            ..Default::default()
        };
        assert!(matches!(
            mutual_info_exact(&eff, &params, &opts),
            Err(Error::CapExceeded { .. })
        ));
    }

    /// Plug-in Monte Carlo estimate of I(b1; output): the independent
    /// estimator the quadrature is validated against.
    fn mc_mutual_info(
        eff: &EffectiveChannel,
        params: &ConstellationParams,
        sigma: f64,
        samples: u64,
        seed: u64,
    ) -> f64 {
        let q = params.half_range;
        let a = params.spacing;
        let gains = eff.noise_gains();
        let mut conditional: Vec<Vec<f64>> = Vec::new();
        enumerate_symbols(eff.hhat.len(), q, |b1| {
            let info: f64 = eff.hhat.iter().zip(b1).map(|(&h, &b)| h * b as f64).sum();
            let mut means = Vec::new();
            enumerate_symbols(gains.len(), q, |b2| {
                let noise: f64 = gains.iter().zip(b2).map(|(&g, &b)| g * b as f64).sum();
                means.push(a * (info + noise));
            });
            conditional.push(means);
        });
        let marginal: Vec<f64> = conditional.iter().flatten().copied().collect();
        let normal = Normal::new(0.0, sigma).unwrap();
        let mut rng = seed_substream(seed, &[991]);
        let mut acc = 0.0;
        for _ in 0..samples {
            let b1_idx = rng.random_range(0..conditional.len());
            let means = &conditional[b1_idx];
            let mu = means[rng.random_range(0..means.len())];
            let y = mu + normal.sample(&mut rng);
            acc += ln_mixture_density(y, means, sigma) - ln_mixture_density(y, &marginal, sigma);
        }
        acc / samples as f64 / std::f64::consts::LN_2
    }

    #[test]
    fn quadrature_cross_validates_against_monte_carlo() {
        let (ch, basis, cfg) = minimal();
        let vmat = basis.precoder_matrix(&ch);
        let params = constellation_params(1e2, &cfg, &vmat).unwrap();
        assert_eq!(params.half_range, 1);
        let eff = legit_effective_channel(0, &ch, &basis, &cfg);
        let quad = mutual_info_exact(&eff, &params, &MutualInfoOptions::default()).unwrap();
        let mc = mc_mutual_info(&eff, &params, 1.0, 1_000_000, 8);
        assert!(
            (quad - mc).abs() < 0.02,
            "quadrature {quad} vs monte carlo {mc}"
        );
    }

    #[test]
    fn curve_is_deterministic_across_modes() {
        let (ch, basis, cfg) = minimal();
        let grid = [15.0, 25.0];
        let par = leakage_curve(&ch, &basis, &cfg, &grid, &MutualInfoOptions::default()).unwrap();
        let seq_opts = MutualInfoOptions {
            mode: ExecMode::Sequential,
            ..Default::default()
        };
        let seq = leakage_curve(&ch, &basis, &cfg, &grid, &seq_opts).unwrap();
        assert_eq!(par, seq);
        assert!(par.iter().all(|e| e.i_b1_y >= 0.0 && e.i_b1_z >= 0.0));
    }

    #[test]
    fn masking_ablation_increases_leakage() {
        let (ch, basis, cfg) = minimal();
        let vmat = basis.precoder_matrix(&ch);
        let params = constellation_params(1e4, &cfg, &vmat).unwrap();
        let eff = eaves_effective_channel(0, &ch, &basis, &cfg);
        let full = mutual_info_exact(&eff, &params, &MutualInfoOptions::default()).unwrap();
        let ablated_opts = MutualInfoOptions {
            zero_noise_symbols: true,
            ..Default::default()
        };
        let ablated = mutual_info_exact(&eff, &params, &ablated_opts).unwrap();
        assert!(
            ablated > full,
            "without masking {ablated} should exceed {full}"
        );
    }
}
