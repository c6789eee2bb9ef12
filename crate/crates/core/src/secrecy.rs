//! Secrecy-rate lower bound and secure degrees of freedom.
//!
//! The bound chains three terms: the information-symbol entropy, a Fano
//! penalty for decoding errors at the worst legitimate receiver, and the
//! eavesdropper leakage bound. The leakage term charges the adversary's
//! full channel capacity 1/2 log2(cP + 1) and credits back the noise-symbol
//! entropy the adversary must spend resolving the masking symbols, which is
//! valid exactly when `info_len + L' >= ML` holds.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::modem::half_range_for;

/// All terms of the rate bound at one power point, in bits per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub p: f64,
    /// Information-symbol entropy KL log2(2Q+1).
    pub h_b1: f64,
    /// 1 + pe * H(b1).
    pub fano_term: f64,
    /// max(0, 1/2 log2(cP+1) - ML log2(2Q+1)).
    pub leakage_bound: f64,
    /// max(0, h_b1 - fano_term - leakage_bound).
    pub r_lower: f64,
    /// Degrees-of-freedom formula at the same parameters.
    pub dof: f64,
}

/// H(b1) = info_len * log2(2Q + 1) bits.
pub fn entropy_b1(info_len: usize, half_range: i64) -> f64 {
    debug_assert!(info_len >= 1 && half_range >= 1);
    info_len as f64 * (2.0 * half_range as f64 + 1.0).log2()
}

/// The chained secrecy-rate lower bound at power `p`.
///
/// `empirical_pe` plugs a measured symbol error probability into the Fano
/// term; `None` uses the asymptotic value 0. Vanishing-dimension terms are
/// dropped (they are the measured quantities in simulation mode).
pub fn rate_lower_bound(
    p: f64,
    epsilon: f64,
    info_len: u128,
    base: u128,
    extended: u128,
    m: usize,
    c: f64,
    empirical_pe: Option<f64>,
) -> Result<RateReport> {
    let noise = m as u128 * base;
    if info_len + extended < noise {
        return Err(Error::InvalidConfig(format!(
            "info_len {info_len} + extended {extended} < noise {noise}: leakage bound invalid"
        )));
    }
    if c < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "eavesdropper norm bound must be nonnegative, got {c}"
        )));
    }
    if !(p > 1.0) {
        return Err(Error::InvalidConfig(format!("power must exceed 1, got {p}")));
    }
    let q = half_range_for(p, epsilon, info_len as usize, extended as usize);
    let log_points = (2.0 * q as f64 + 1.0).log2();
    let h_b1 = info_len as f64 * log_points;
    let pe = empirical_pe.unwrap_or(0.0);
    let fano_term = 1.0 + pe * h_b1;
    let leakage_bound = if c == 0.0 {
        0.0
    } else {
        (0.5 * (c * p + 1.0).log2() - noise as f64 * log_points).max(0.0)
    };
    let r_lower = (h_b1 - fano_term - leakage_bound).max(0.0);
    let dof = dof_formula(
        info_len as f64,
        base as f64,
        extended as f64,
        m as f64,
        epsilon,
    );
    Ok(RateReport {
        p,
        h_b1,
        fano_term,
        leakage_bound,
        r_lower,
        dof,
    })
}

/// d = (K + M) L (1 - eps) / (KL + L' + eps) - 1 with K = KL / L.
pub fn dof_formula(info_len: f64, base: f64, extended: f64, m: f64, epsilon: f64) -> f64 {
    (info_len + m * base) * (1.0 - epsilon) / (info_len + extended + epsilon) - 1.0
}

/// The formula at the optimal operating point `KL = ML - L'`, computed from
/// cardinality ratios so arbitrarily large `n` needs no materialization:
/// with r = (1 + 1/n)^(m*j1), K = m - r and
/// d = (K + m)(1 - eps) / (K + r + eps/L) - 1.
pub fn dof_at_equality(m: usize, j1: usize, n: u64, epsilon: f64) -> f64 {
    let mj1 = (m * j1) as i32;
    let ratio = (1.0 + 1.0 / n as f64).powi(mj1); // L'/L
    let k = m as f64 - ratio;
    let eps_over_base = epsilon * (1.0 / n as f64).powi(mj1);
    (k + m as f64) * (1.0 - epsilon) / (k + ratio + eps_over_base) - 1.0
}

/// The limiting secure degrees of freedom 1 - 1/M.
pub fn dof_limit(m: usize) -> f64 {
    debug_assert!(m >= 1);
    1.0 - 1.0 / m as f64
}

/// CSV with the pinned schema `P_dB,H_b1,fano,leak_bound,R_lower,dof`.
pub fn rate_table_csv(reports: &[RateReport]) -> String {
    let mut out = String::from("P_dB,H_b1,fano,leak_bound,R_lower,dof\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            10.0 * r.p.log10(),
            r.h_b1,
            r.fano_term,
            r.leakage_bound,
            r.r_lower,
            r.dof
        );
    }
    out
}
