//! The classical null-space artificial-noise baseline.
//!
//! Noise goes into the orthogonal complement of the legitimate channel rows,
//! which only exists while J1 < M. The feasibility table puts that boundary
//! next to the alignment scheme, which keeps working for any J1 once the box
//! parameter is large enough.

use std::fmt::Write as _;

use crate::channel::{dot, norm_sq, ChannelSet};
use crate::error::{Error, Result};
use crate::modem::choose_info_len;
use crate::precoder::{cardinalities, DEFAULT_BASIS_CAP};
use crate::SystemDims;

/// Beam plus noise-subspace plan for one channel draw.
#[derive(Debug, Clone)]
pub struct NullspaceNoisePlan {
    /// Unit vector maximizing the smallest legitimate gain magnitude.
    pub signal_dir: Vec<f64>,
    /// Orthonormal columns spanning the complement of all h_j; M - J1 of them.
    pub noise_basis: Vec<Vec<f64>>,
}

fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

fn subtract_projection(v: &mut [f64], onto: &[f64]) {
    let coeff = dot(v, onto);
    for (x, &o) in v.iter_mut().zip(onto) {
        *x -= coeff * o;
    }
}

/// Modified Gram-Schmidt returning unit vectors; candidates whose residual
/// falls below `tol` are dropped.
fn orthonormalize(rows: &[Vec<f64>], against: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for row in rows {
        let mut v = row.clone();
        for q in against.iter().chain(out.iter()) {
            subtract_projection(&mut v, q);
        }
        // second pass for numerical hygiene
        for q in against.iter().chain(out.iter()) {
            subtract_projection(&mut v, q);
        }
        let norm = norm_sq(&v).sqrt();
        if norm > tol {
            out.push(scaled(&v, 1.0 / norm));
        }
    }
    out
}

/// Spherical-coordinate point on the unit sphere of dimension `angles.len()+1`.
fn sphere_point(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len() + 1);
    let mut sin_prod = 1.0;
    for &a in angles {
        out.push(sin_prod * a.cos());
        sin_prod *= a.sin();
    }
    out.push(sin_prod);
    out
}

/// Builds the plan for a channel with J1 < M.
///
/// The noise basis is the orthonormal complement of span{h_1..h_J1} by
/// two-pass Gram-Schmidt over the identity candidates. The beam direction
/// maximizes min_j |h_j^T s| inside the legitimate span: coarse grid of 64
/// points per angle, then 40 halving steps of coordinate descent.
pub fn nullspace_plan(ch: &ChannelSet) -> Result<NullspaceNoisePlan> {
    let dims = ch.dims();
    if dims.j1 >= dims.m {
        return Err(Error::Infeasible(format!(
            "null-space noise needs j1 < m, got j1 = {} >= m = {}",
            dims.j1, dims.m
        )));
    }
    let h_rows: Vec<Vec<f64>> = (0..dims.j1).map(|j| ch.h_row(j).to_vec()).collect();
    let span = orthonormalize(&h_rows, &[], 1e-12);
    if span.len() != dims.j1 {
        return Err(Error::Infeasible(
            "legitimate gain rows are numerically dependent".into(),
        ));
    }
    let identity: Vec<Vec<f64>> = (0..dims.m)
        .map(|i| (0..dims.m).map(|k| f64::from(k == i) ).collect())
        .collect();
    let noise_basis: Vec<Vec<f64>> = orthonormalize(&identity, &span, 1e-8)
        .into_iter()
        .take(dims.m - dims.j1)
        .collect();
    debug_assert_eq!(noise_basis.len(), dims.m - dims.j1);

    // beam search in span coordinates
    let in_span = |coords: &[f64]| -> Vec<f64> {
        let mut s = vec![0.0; dims.m];
        for (q, &c) in span.iter().zip(coords) {
            for (si, &qi) in s.iter_mut().zip(q) {
                *si += c * qi;
            }
        }
        s
    };
    let min_gain = |coords: &[f64]| -> f64 {
        let s = in_span(coords);
        h_rows
            .iter()
            .map(|h| dot(h, &s).abs())
            .fold(f64::INFINITY, f64::min)
    };

    let rank = dims.j1;
    let n_angles = rank - 1;
    let mut best_angles = vec![0.0; n_angles];
    if n_angles == 0 {
        // the span is a line: the beam is forced
    } else {
        let grid = 64usize;
        let mut best_val = f64::NEG_INFINITY;
        let mut idx = vec![0usize; n_angles];
        loop {
            let angles: Vec<f64> = idx
                .iter()
                .map(|&i| std::f64::consts::PI * i as f64 / grid as f64)
                .collect();
            let val = min_gain(&sphere_point(&angles));
            if val > best_val {
                best_val = val;
                best_angles = angles;
            }
            let mut d = n_angles;
            loop {
                if d == 0 {
                    break;
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < grid {
                    break;
                }
                idx[d] = 0;
                if d == 0 {
                    d = usize::MAX;
                    break;
                }
            }
            if d == usize::MAX {
                break;
            }
        }
        // local refinement: coordinate steps with halving
        let mut step = std::f64::consts::PI / grid as f64;
        for _ in 0..40 {
            let mut improved = false;
            for d in 0..n_angles {
                for dir in [-1.0, 1.0] {
                    let mut cand = best_angles.clone();
                    cand[d] += dir * step;
                    let val = min_gain(&sphere_point(&cand));
                    if val > best_val {
                        best_val = val;
                        best_angles = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }
    let signal_dir = in_span(&sphere_point(&best_angles));

    Ok(NullspaceNoisePlan {
        signal_dir,
        noise_basis,
    })
}

impl NullspaceNoisePlan {
    /// Largest normalized |h_j^T n| over all receivers and noise columns.
    pub fn max_orthogonality_residual(&self, ch: &ChannelSet) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..ch.dims().j1 {
            let h = ch.h_row(j);
            let hn = norm_sq(h).sqrt();
            for col in &self.noise_basis {
                let r = dot(h, col).abs() / (hn * norm_sq(col).sqrt());
                worst = worst.max(r);
            }
        }
        worst
    }
}

/// One row of the feasibility comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeasibilityEntry {
    pub m: usize,
    pub j1: usize,
    /// The null-space baseline works iff j1 < m.
    pub baseline_feasible: bool,
    /// Smallest box parameter with ML > L' whose extended set fits under
    /// `cap`; `None` when no such n exists under the cap.
    pub min_align_n: Option<u32>,
}

/// Smallest n with m * n^(m*j1) > (n+1)^(m*j1), searching under the basis cap.
pub fn min_alignment_n(m: usize, j1: usize, cap: u128) -> Option<u32> {
    let dims = SystemDims { m, j1, j2: 0 };
    let mut n = 1u32;
    loop {
        let card = cardinalities(dims, n)?;
        if card.extended > cap {
            return None;
        }
        if choose_info_len(&card).is_ok() {
            return Some(n);
        }
        n += 1;
    }
}

/// Feasibility of both schemes over a (m, j1) grid.
pub fn compare_feasibility(grid: &[(usize, usize)], cap: u128) -> Vec<FeasibilityEntry> {
    grid.iter()
        .map(|&(m, j1)| FeasibilityEntry {
            m,
            j1,
            baseline_feasible: j1 < m,
            min_align_n: min_alignment_n(m, j1, cap),
        })
        .collect()
}

/// CSV with the pinned schema `M,J1,baseline_feasible,min_N_alignment`;
/// an empty last field means no feasible n under the cap.
pub fn feasibility_table_csv(entries: &[FeasibilityEntry]) -> String {
    let mut out = String::from("M,J1,baseline_feasible,min_N_alignment\n");
    for e in entries {
        let n = e.min_align_n.map(|n| n.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{}", e.m, e.j1, e.baseline_feasible, n);
    }
    out
}
