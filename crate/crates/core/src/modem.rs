//! Constellation scaling, symbol generation, transmit-vector synthesis,
//! effective receive channels, and maximum-likelihood decoding.
//!
//! The transmit vector is `x = u (alpha^T a b1) + V (a b2)`: information
//! symbols b1 spread over the antennas by the public dithers, noise symbols
//! b2 pushed through the monomial precoder. Symbols are integers in
//! [-Q, Q] scaled by the spacing `a` only at the encoder, so all receiver
//! searches run on exact integer grids.

use rand::Rng;

use crate::channel::{dot, norm_sq, ChannelSet};
use crate::error::{Error, Result};
use crate::precoder::{Cardinalities, PrecoderBasis, PrecoderMatrix, SelectionMatrix};
use crate::rng::{label, seed_substream};

/// Default cap on the exhaustive decode search space.
pub const DEFAULT_DECODE_CAP: u128 = 100_000_000;

/// Smallest information symbol count that keeps the decodability condition
/// `KL + L' >= ML` while maximizing the degrees of freedom: `ML - L'`.
/// Errors when `ML <= L'`, i.e. the box parameter is too small for these
/// dimensions to carry information at the optimal operating point.
pub fn choose_info_len(card: &Cardinalities) -> Result<u128> {
    if card.noise > card.extended {
        Ok(card.noise - card.extended)
    } else {
        Err(Error::Infeasible(format!(
            "noise dimension {} does not exceed the extended set size {}; increase n",
            card.noise, card.extended
        )))
    }
}

/// Fixed public scheme parameters: symbol counts, dithers, rate margin.
#[derive(Debug, Clone)]
pub struct SchemeConfig {
    /// Information symbol count (KL).
    pub info_len: usize,
    /// Noise symbol count (ML).
    pub noise_len: usize,
    /// Extended-set cardinality (L'), kept for the constellation exponent.
    pub extended_len: usize,
    /// Base-set cardinality (L).
    pub base_len: usize,
    /// Antenna dither, length M.
    pub u: Vec<f64>,
    /// Symbol dither, length KL.
    pub alpha: Vec<f64>,
    /// Rate-loss parameter in (0, 1).
    pub epsilon: f64,
}

impl SchemeConfig {
    /// Validates the decodability gate `info_len + L' >= ML` and the dither
    /// shape (pairwise distinct, nonzero, right lengths).
    pub fn new(
        basis: &PrecoderBasis,
        info_len: usize,
        u: Vec<f64>,
        alpha: Vec<f64>,
        epsilon: f64,
    ) -> Result<Self> {
        if info_len < 1 {
            return Err(Error::InvalidConfig("info_len must be >= 1".into()));
        }
        if info_len + basis.extended_len() < basis.noise_len() {
            return Err(Error::InvalidConfig(format!(
                "info_len {} + extended {} < noise {}: eavesdropper masking bound invalid",
                info_len,
                basis.extended_len(),
                basis.noise_len()
            )));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in (0,1), got {epsilon}"
            )));
        }
        if u.len() != basis.dims().m {
            return Err(Error::DimensionMismatch {
                expected: basis.dims().m,
                got: u.len(),
            });
        }
        if alpha.len() != info_len {
            return Err(Error::DimensionMismatch {
                expected: info_len,
                got: alpha.len(),
            });
        }
        let mut all: Vec<f64> = u.iter().chain(alpha.iter()).copied().collect();
        if all.iter().any(|&x| x == 0.0 || !x.is_finite()) {
            return Err(Error::InvalidConfig(
                "dither entries must be finite and nonzero".into(),
            ));
        }
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(
                "dither entries must be pairwise distinct".into(),
            ));
        }
        Ok(Self {
            info_len,
            noise_len: basis.noise_len(),
            extended_len: basis.extended_len(),
            base_len: basis.base_len(),
            u,
            alpha,
            epsilon,
        })
    }
}

/// Draws the public dithers i.i.d. uniform on [0.5, 1.5] from their own
/// substream: `u` (length M) first, then `alpha` (length `info_len`).
pub fn draw_dithers(m: usize, info_len: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = seed_substream(seed, &[label::DITHERS]);
    let mut draw = |len: usize| -> Vec<f64> {
        (0..len).map(|_| rng.random_range(0.5..1.5)).collect()
    };
    (draw(m), draw(info_len))
}

/// PAM constellation `a * {-Q..Q}` plus the power budget it was sized for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationParams {
    /// Half-range Q >= 1.
    pub half_range: i64,
    /// Spacing a > 0.
    pub spacing: f64,
    /// Power budget P the spacing was calibrated against.
    pub power: f64,
}

/// Q = max(1, floor(P^((1-eps) / (2 (KL + L' + eps))))).
pub fn half_range_for(p: f64, epsilon: f64, info_len: usize, extended_len: usize) -> i64 {
    let exponent = (1.0 - epsilon) / (2.0 * (info_len as f64 + extended_len as f64 + epsilon));
    (p.powf(exponent).floor() as i64).max(1)
}

/// Sizes the constellation for power budget `p` (> 1): the half-range from
/// the scaling law above, and the spacing calibrated so the exact transmit
/// second moment [`power_expected`] equals `p`.
pub fn constellation_params(
    p: f64,
    cfg: &SchemeConfig,
    vmat: &PrecoderMatrix,
) -> Result<ConstellationParams> {
    if !(p > 1.0) {
        return Err(Error::InvalidConfig(format!("power must exceed 1, got {p}")));
    }
    let q = half_range_for(p, cfg.epsilon, cfg.info_len, cfg.extended_len);
    let second_moment_unit = q as f64 * (q as f64 + 1.0) / 3.0; // E[k^2], a = 1
    let gain = norm_sq(&cfg.u) * norm_sq(&cfg.alpha) + vmat.frobenius_sq();
    let spacing = (p / (second_moment_unit * gain)).sqrt();
    Ok(ConstellationParams {
        half_range: q,
        spacing,
        power: p,
    })
}

/// Exact expected transmit power sigma^2 (||u||^2 ||alpha||^2 + ||V||_F^2)
/// with sigma^2 = a^2 Q (Q+1) / 3 the per-symbol second moment.
pub fn power_expected(cfg: &SchemeConfig, params: &ConstellationParams, vmat: &PrecoderMatrix) -> f64 {
    let q = params.half_range as f64;
    let sigma_sq = params.spacing * params.spacing * q * (q + 1.0) / 3.0;
    sigma_sq * (norm_sq(&cfg.u) * norm_sq(&cfg.alpha) + vmat.frobenius_sq())
}

/// Monte Carlo mean of ||x||^2 over `frames` random frames; the independent
/// check on [`power_expected`]. Deterministic in `seed` and thread count.
pub fn measure_power(
    cfg: &SchemeConfig,
    params: &ConstellationParams,
    vmat: &PrecoderMatrix,
    frames: u64,
    seed: u64,
    mode: crate::ExecMode,
) -> f64 {
    let total = crate::exec::batched_map_fold(
        frames,
        mode,
        || 0.0f64,
        |t| {
            let mut rng = seed_substream(seed, &[label::POWER_FRAME, t]);
            let b1 = draw_symbols(&mut rng, cfg.info_len, params.half_range);
            let b2 = draw_symbols(&mut rng, cfg.noise_len, params.half_range);
            let frame = encode(&b1, &b2, params, cfg, vmat).expect("in-range symbols");
            norm_sq(&frame.x)
        },
        |a, b| a + b,
    );
    total / frames as f64
}

/// Uniform symbols on the integer grid [-q, q].
pub fn draw_symbols<R: Rng>(rng: &mut R, len: usize, q: i64) -> Vec<i64> {
    (0..len).map(|_| rng.random_range(-q..=q)).collect()
}

/// One encoded frame: integer symbols and the real transmit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitFrame {
    pub b1: Vec<i64>,
    pub b2: Vec<i64>,
    pub x: Vec<f64>,
}

/// x = u (alpha^T a b1) + V (a b2).
pub fn encode(
    b1: &[i64],
    b2: &[i64],
    params: &ConstellationParams,
    cfg: &SchemeConfig,
    vmat: &PrecoderMatrix,
) -> Result<TransmitFrame> {
    if b1.len() != cfg.info_len {
        return Err(Error::DimensionMismatch {
            expected: cfg.info_len,
            got: b1.len(),
        });
    }
    if b2.len() != cfg.noise_len {
        return Err(Error::DimensionMismatch {
            expected: cfg.noise_len,
            got: b2.len(),
        });
    }
    let q = params.half_range;
    if b1.iter().chain(b2.iter()).any(|&s| s.abs() > q) {
        return Err(Error::InvalidConfig(format!(
            "symbol outside [-{q}, {q}]"
        )));
    }
    let a = params.spacing;
    let info_scalar: f64 = cfg
        .alpha
        .iter()
        .zip(b1)
        .map(|(&al, &b)| al * a * b as f64)
        .sum();
    let mut x = vmat.mul_symbols(b2, a);
    for (xi, &ui) in x.iter_mut().zip(&cfg.u) {
        *xi += ui * info_scalar;
    }
    Ok(TransmitFrame {
        b1: b1.to_vec(),
        b2: b2.to_vec(),
        x,
    })
}

/// Scalar effective channel one receiver sees: information gains, noise
/// generators, and (legitimate side only) the selection matrix that folds
/// the noise symbols onto the common generator rows.
#[derive(Debug, Clone)]
pub struct EffectiveChannel {
    /// Per-information-symbol gain, length KL: (h_j^T u) alpha or
    /// (g_k^T u) alpha.
    pub hhat: Vec<f64>,
    /// Legitimate side: evaluated extended set (length L'). Eavesdropper
    /// side: the raw noise generators g_k^T V (length ML).
    pub htilde: Vec<f64>,
    /// Present only at legitimate receivers; there is no alignment at
    /// eavesdroppers.
    pub selection: Option<SelectionMatrix>,
}

impl EffectiveChannel {
    /// Per-noise-symbol gain row (length ML) on either side.
    pub fn noise_gains(&self) -> Vec<f64> {
        match &self.selection {
            Some(sel) => sel.select_gains(&self.htilde),
            None => self.htilde.clone(),
        }
    }

    /// a * (hhat^T b1 + noise_gains^T b2): the noiseless received value.
    pub fn reconstruct(&self, b1: &[i64], b2: &[i64], spacing: f64) -> f64 {
        let info: f64 = self.hhat.iter().zip(b1).map(|(&h, &b)| h * b as f64).sum();
        let gains = self.noise_gains();
        let noise: f64 = gains.iter().zip(b2).map(|(&g, &b)| g * b as f64).sum();
        spacing * (info + noise)
    }
}

/// Effective channel of legitimate receiver `j` (0-based).
pub fn legit_effective_channel(
    j: usize,
    ch: &ChannelSet,
    basis: &PrecoderBasis,
    cfg: &SchemeConfig,
) -> EffectiveChannel {
    let gain = dot(ch.h_row(j), &cfg.u);
    EffectiveChannel {
        hhat: cfg.alpha.iter().map(|&al| gain * al).collect(),
        htilde: basis.extended_values(ch),
        selection: Some(basis.selection(j)),
    }
}

/// Effective channel of eavesdropper `k` (0-based). Panics if the instance
/// has no eavesdroppers.
pub fn eaves_effective_channel(
    k: usize,
    ch: &ChannelSet,
    basis: &PrecoderBasis,
    cfg: &SchemeConfig,
) -> EffectiveChannel {
    assert!(k < ch.dims().j2, "eavesdropper index out of range");
    let g = ch.g_row(k);
    let gain = dot(g, &cfg.u);
    let v = basis.base_values(ch);
    let mut htilde = Vec::with_capacity(basis.noise_len());
    for i in 0..ch.dims().m {
        htilde.extend(v.iter().map(|&vl| g[i] * vl));
    }
    EffectiveChannel {
        hhat: cfg.alpha.iter().map(|&al| gain * al).collect(),
        htilde,
        selection: None,
    }
}

/// Decoder output: the information symbols and the aggregated noise
/// coefficient found for each active generator row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub info: Vec<i64>,
    pub noise_coeffs: Vec<(usize, i64)>,
}

/// Odometer over a per-dimension integer box; `cur` starts at `lo`.
pub(crate) fn advance(cur: &mut [i64], lo: &[i64], hi: &[i64]) -> bool {
    for d in (0..cur.len()).rev() {
        if cur[d] < hi[d] {
            cur[d] += 1;
            return true;
        }
        cur[d] = lo[d];
    }
    false
}

/// Exhaustive minimum-distance decoding of the information symbols from one
/// scalar observation.
///
/// Rather than searching all (2Q+1)^ML noise vectors, the search runs over
/// the aggregated coefficients c = T_j b2: one integer per active generator
/// row, ranging over the achievable sums [-k_r Q, k_r Q] where k_r is the
/// row's column count. That contraction is the alignment gain made
/// operational. Errors when the search space exceeds `cap`.
pub fn ml_decode(
    y: f64,
    eff: &EffectiveChannel,
    params: &ConstellationParams,
    cap: u128,
) -> Result<Decoded> {
    let sel = eff.selection.as_ref().ok_or_else(|| {
        Error::InvalidConfig("decoding is defined for legitimate receivers only".into())
    })?;
    let q = params.half_range;
    let info_len = eff.hhat.len();
    let active = sel.active_rows();

    let mut space: u128 = 1;
    let mut push_dims = |count: i64| -> Result<()> {
        space = space
            .checked_mul((2 * count + 1) as u128)
            .filter(|&s| s <= cap)
            .ok_or(Error::CapExceeded {
                what: "decode search space",
                needed: u128::MAX,
                cap,
            })?;
        Ok(())
    };
    for _ in 0..info_len {
        push_dims(q)?;
    }
    for &(_, k) in &active {
        push_dims(k as i64 * q)?;
    }

    let a = params.spacing;
    let mut gains: Vec<f64> = eff.hhat.iter().map(|&h| a * h).collect();
    let mut lo = vec![-q; info_len];
    let mut hi = vec![q; info_len];
    for &(row, k) in &active {
        gains.push(a * eff.htilde[row]);
        lo.push(-(k as i64) * q);
        hi.push(k as i64 * q);
    }

    let mut cur = lo.clone();
    let mut best = f64::INFINITY;
    let mut best_cur = cur.clone();
    loop {
        let val: f64 = gains.iter().zip(&cur).map(|(&g, &s)| g * s as f64).sum();
        let metric = (y - val) * (y - val);
        if metric < best {
            best = metric;
            best_cur.copy_from_slice(&cur);
        }
        if !advance(&mut cur, &lo, &hi) {
            break;
        }
    }

    let info = best_cur[..info_len].to_vec();
    let noise_coeffs = active
        .iter()
        .zip(&best_cur[info_len..])
        .map(|(&(row, _), &c)| (row, c))
        .collect();
    Ok(Decoded { info, noise_coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{GainDist, SystemDims};
    use crate::precoder::cardinalities;
    use crate::ExecMode;
    use approx::assert_relative_eq;

    fn minimal() -> (ChannelSet, PrecoderBasis, SchemeConfig) {
        let dims = SystemDims::new(2, 1, 1).unwrap();
        let ch = ChannelSet::sample(dims, GainDist::StandardNormal, 17).unwrap();
        let basis = PrecoderBasis::build(dims, 1).unwrap();
        let (u, alpha) = draw_dithers(2, 1, 17);
        let cfg = SchemeConfig::new(&basis, 1, u, alpha, 0.05).unwrap();
        (ch, basis, cfg)
    }

    #[test]
    fn info_len_selection() {
        let d21 = SystemDims::new(2, 1, 0).unwrap();
        assert_eq!(
            choose_info_len(&cardinalities(d21, 3).unwrap()).unwrap(),
            2
        );
        assert!(matches!(
            choose_info_len(&cardinalities(d21, 2).unwrap()),
            Err(Error::Infeasible(_))
        ));
        let d31 = SystemDims::new(3, 1, 0).unwrap();
        assert!(choose_info_len(&cardinalities(d31, 2).unwrap()).is_err());
        assert_eq!(
            choose_info_len(&cardinalities(d31, 3).unwrap()).unwrap(),
            17
        );
    }

    #[test]
    fn decodability_gate_enforced() {
        let dims = SystemDims::new(2, 1, 0).unwrap();
        let basis = PrecoderBasis::build(dims, 3).unwrap(); // extended 16, noise 18
        let (u, alpha) = draw_dithers(2, 1, 0);
        assert!(matches!(
            SchemeConfig::new(&basis, 1, u.clone(), alpha.clone(), 0.05),
            Err(Error::InvalidConfig(_))
        ));
        let (u2, alpha2) = draw_dithers(2, 2, 0);
        assert!(SchemeConfig::new(&basis, 2, u2, alpha2, 0.05).is_ok());
    }

    #[test]
    fn dithers_deterministic_in_range_distinct() {
        let (u1, a1) = draw_dithers(3, 4, 5);
        let (u2, a2) = draw_dithers(3, 4, 5);
        assert_eq!((u1.clone(), a1.clone()), (u2, a2));
        let mut all = u1;
        all.extend(a1);
        assert!(all.iter().all(|&x| (0.5..1.5).contains(&x)));
        let mut sorted = all.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted.dedup();
        assert_eq!(sorted.len(), all.len());
    }

    #[test]
    fn half_range_examples() {
        assert_eq!(half_range_for(1e4, 0.05, 2, 16), 1);
        assert_eq!(half_range_for(16.0, 0.5, 1, 0), 1);
        // nondecreasing in power
        let mut last = 0;
        for p in [1e1, 1e2, 1e4, 1e6, 1e8, 1e12] {
            let q = half_range_for(p, 0.05, 1, 4);
            assert!(q >= last);
            last = q;
        }
        assert!(last > 1);
    }

    #[test]
    fn power_closed_form_examples() {
        let ch = ChannelSet::from_gains(vec![vec![0.9, 1.7]], vec![]).unwrap();
        let basis = PrecoderBasis::build(ch.dims(), 1).unwrap();
        let vmat = basis.precoder_matrix(&ch); // identity, frob^2 = 2
        let cfg = SchemeConfig::new(&basis, 1, vec![1.0, 0.25], vec![2.0], 0.05).unwrap();
        // u = [1, 0.25], alpha = [2]: ||u||^2 ||alpha||^2 = 1.0625 * 4 = 4.25
        let params = ConstellationParams {
            half_range: 1,
            spacing: 1.0,
            power: 10.0,
        };
        let expect = (2.0 / 3.0) * (4.25 + 2.0);
        assert_relative_eq!(power_expected(&cfg, &params, &vmat), expect, max_relative = 1e-12);
        // doubling the spacing quadruples the result
        let double = ConstellationParams {
            spacing: 2.0,
            ..params
        };
        assert_relative_eq!(
            power_expected(&cfg, &double, &vmat),
            4.0 * expect,
            max_relative = 1e-12
        );
    }

    #[test]
    fn calibration_hits_the_budget() {
        let (ch, basis, cfg) = minimal();
        let vmat = basis.precoder_matrix(&ch);
        for p in [10.0, 1e3, 1e5] {
            let params = constellation_params(p, &cfg, &vmat).unwrap();
            assert_relative_eq!(power_expected(&cfg, &params, &vmat), p, max_relative = 1e-12);
        }
        assert!(constellation_params(0.5, &cfg, &vmat).is_err());
    }

    #[test]
    fn measured_power_matches_closed_form() {
        let (ch, basis, cfg) = minimal();
        let vmat = basis.precoder_matrix(&ch);
        let params = constellation_params(1e3, &cfg, &vmat).unwrap();
        let measured = measure_power(&cfg, &params, &vmat, 20_000, 123, ExecMode::Parallel);
        assert!((measured - 1e3).abs() < 0.02 * 1e3, "measured {measured}");
        let seq = measure_power(&cfg, &params, &vmat, 20_000, 123, ExecMode::Sequential);
        assert_eq!(measured.to_bits(), seq.to_bits());
    }

    #[test]
    fn encode_hand_example() {
        // V = I2, u = [1, eps], alpha = [1], a = 1, b1 = [1], b2 = [2, -1]
        let ch = ChannelSet::from_gains(vec![vec![0.9, 1.7]], vec![]).unwrap();
        let basis = PrecoderBasis::build(ch.dims(), 1).unwrap();
        let vmat = basis.precoder_matrix(&ch);
        let cfg = SchemeConfig::new(&basis, 1, vec![1.0, 1e-9], vec![1.0], 0.05).unwrap();
        let params = ConstellationParams {
            half_range: 2,
            spacing: 1.0,
            power: 16.0,
        };
        let frame = encode(&[1], &[2, -1], &params, &cfg, &vmat).unwrap();
        assert_relative_eq!(frame.x[0], 3.0, max_relative = 1e-9);
        assert_relative_eq!(frame.x[1], -1.0, epsilon = 1e-8);

        let zero = encode(&[0], &[0, 0], &params, &cfg, &vmat).unwrap();
        assert_eq!(zero.x, vec![0.0, 0.0]);

        assert!(matches!(
            encode(&[3], &[0, 0], &params, &cfg, &vmat),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn encode_is_linear_in_symbols() {
        let (ch, basis, cfg) = minimal();
        let vmat = basis.precoder_matrix(&ch);
        let params = ConstellationParams {
            half_range: 4,
            spacing: 0.7,
            power: 100.0,
        };
        let xa = encode(&[1], &[2, -1], &params, &cfg, &vmat).unwrap().x;
        let xb = encode(&[-2], &[1, 3], &params, &cfg, &vmat).unwrap().x;
        let xs = encode(&[-1], &[3, 2], &params, &cfg, &vmat).unwrap().x;
        for i in 0..2 {
            assert_relative_eq!(xs[i], xa[i] + xb[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn reconstruction_identity_both_sides() {
        let dims = SystemDims::new(2, 2, 2).unwrap();
        let ch = ChannelSet::sample(dims, GainDist::StandardNormal, 31).unwrap();
        let basis = PrecoderBasis::build(dims, 2).unwrap();
        let (u, alpha) = draw_dithers(2, 3, 31);
        let cfg = SchemeConfig::new(&basis, 3, u, alpha, 0.05).unwrap();
        let vmat = basis.precoder_matrix(&ch);
        let params = constellation_params(1e4, &cfg, &vmat).unwrap();
        let mut rng = seed_substream(31, &[label::SER_TRIAL, 9]);
        for _ in 0..20 {
            let b1 = draw_symbols(&mut rng, cfg.info_len, params.half_range);
            let b2 = draw_symbols(&mut rng, cfg.noise_len, params.half_range);
            let frame = encode(&b1, &b2, &params, &cfg, &vmat).unwrap();
            let out = ch
                .apply::<rand_chacha::ChaCha8Rng>(&frame.x, None)
                .unwrap();
            for j in 0..dims.j1 {
                let eff = legit_effective_channel(j, &ch, &basis, &cfg);
                let rec = eff.reconstruct(&b1, &b2, params.spacing);
                assert_relative_eq!(out.y[j], rec, max_relative = 1e-10);
            }
            for k in 0..dims.j2 {
                let eff = eaves_effective_channel(k, &ch, &basis, &cfg);
                assert_eq!(eff.htilde.len(), basis.noise_len());
                assert!(eff.selection.is_none());
                let rec = eff.reconstruct(&b1, &b2, params.spacing);
                assert_relative_eq!(out.z[k], rec, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn orthogonal_dither_kills_information_term() {
        let ch = ChannelSet::from_gains(vec![vec![0.9, 1.7]], vec![]).unwrap();
        let basis = PrecoderBasis::build(ch.dims(), 1).unwrap();
        // u orthogonal to h: [h12, -h11] (bypasses SchemeConfig validation on purpose)
        let cfg = SchemeConfig {
            info_len: 1,
            noise_len: 2,
            extended_len: 4,
            base_len: 1,
            u: vec![1.7, -0.9],
            alpha: vec![1.0],
            epsilon: 0.05,
        };
        let eff = legit_effective_channel(0, &ch, &basis, &cfg);
        assert!(eff.hhat.iter().all(|&h| h.abs() < 1e-12));
    }

    #[test]
    fn positive_gains_give_positive_generators() {
        let ch = ChannelSet::from_gains(vec![vec![0.5, 2.0]], vec![]).unwrap();
        let basis = PrecoderBasis::build(ch.dims(), 2).unwrap();
        let (u, alpha) = draw_dithers(2, 1, 3);
        let cfg = SchemeConfig::new(&basis, 1, u, alpha, 0.05).unwrap();
        let eff = legit_effective_channel(0, &ch, &basis, &cfg);
        assert!(eff.htilde.iter().all(|&h| h > 0.0));
    }

    /// Brute-force reference decoder: scans every (b1, b2) pair.
    fn brute_force_decode(
        y: f64,
        eff: &EffectiveChannel,
        params: &ConstellationParams,
    ) -> Vec<i64> {
        let q = params.half_range;
        let gains_b2 = eff.noise_gains();
        let kl = eff.hhat.len();
        let total = kl + gains_b2.len();
        let lo = vec![-q; total];
        let hi = vec![q; total];
        let mut cur = lo.clone();
        let mut best = f64::INFINITY;
        let mut best_b1 = vec![0i64; kl];
        loop {
            let info: f64 = eff
                .hhat
                .iter()
                .zip(&cur[..kl])
                .map(|(&h, &b)| h * b as f64)
                .sum();
            let noise: f64 = gains_b2
                .iter()
                .zip(&cur[kl..])
                .map(|(&g, &b)| g * b as f64)
                .sum();
            let val = params.spacing * (info + noise);
            let metric = (y - val) * (y - val);
            if metric < best {
                best = metric;
                best_b1.copy_from_slice(&cur[..kl]);
            }
            if !advance(&mut cur, &lo, &hi) {
                break;
            }
        }
        best_b1
    }

    #[test]
    fn noiseless_decode_recovers_exactly() {
        let (ch, basis, cfg) = minimal();
        let vmat = basis.precoder_matrix(&ch);
        let params = constellation_params(1e4, &cfg, &vmat).unwrap();
        let eff = legit_effective_channel(0, &ch, &basis, &cfg);
        let mut rng = seed_substream(2, &[label::SER_TRIAL, 0]);
        for _ in 0..50 {
            let b1 = draw_symbols(&mut rng, cfg.info_len, params.half_range);
            let b2 = draw_symbols(&mut rng, cfg.noise_len, params.half_range);
            let frame = encode(&b1, &b2, &params, &cfg, &vmat).unwrap();
            let out = ch
                .apply::<rand_chacha::ChaCha8Rng>(&frame.x, None)
                .unwrap();
            let dec = ml_decode(out.y[0], &eff, &params, DEFAULT_DECODE_CAP).unwrap();
            assert_eq!(dec.info, b1);
        }
    }

    #[test]
    fn decode_agrees_with_brute_force_under_noise() {
        let (ch, basis, cfg) = minimal();
        let vmat = basis.precoder_matrix(&ch);
        let params = constellation_params(100.0, &cfg, &vmat).unwrap();
        let eff = legit_effective_channel(0, &ch, &basis, &cfg);
        let mut rng = seed_substream(5, &[label::SER_TRIAL, 7]);
        for _ in 0..500 {
            let b1 = draw_symbols(&mut rng, cfg.info_len, params.half_range);
            let b2 = draw_symbols(&mut rng, cfg.noise_len, params.half_range);
            let frame = encode(&b1, &b2, &params, &cfg, &vmat).unwrap();
            let out = ch.apply(&frame.x, Some(&mut rng)).unwrap();
            let fast = ml_decode(out.y[0], &eff, &params, DEFAULT_DECODE_CAP).unwrap();
            let slow = brute_force_decode(out.y[0], &eff, &params);
            assert_eq!(fast.info, slow);
        }
    }

    #[test]
    fn decode_cap_is_enforced() {
        let (ch, basis, cfg) = minimal();
        let vmat = basis.precoder_matrix(&ch);
        let params = constellation_params(1e4, &cfg, &vmat).unwrap();
        let eff = legit_effective_channel(0, &ch, &basis, &cfg);
        assert!(matches!(
            ml_decode(0.0, &eff, &params, 2),
            Err(Error::CapExceeded { .. })
        ));
    }
}
