//! Monomial precoder construction.
//!
//! The precoder entries are monomials in the legitimate gains h_{ji}: the
//! base set uses exponents in {0..N-1} per gain, the extended set exponents
//! in {0..N}. Multiplying a base monomial by any single gain lands inside the
//! extended set, which is exactly why the noise symbols collapse onto at most
//! (N+1)^(M*J1) effective dimensions at every legitimate receiver. All
//! bookkeeping is done on integer exponent vectors, never on floating-point
//! monomial values, so the alignment identity is exact by construction.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::channel::{ChannelSet, SystemDims};
use crate::error::{Error, Result};

/// Default cap on the extended-set cardinality (N+1)^(M*J1) a basis is
/// allowed to materialize.
pub const DEFAULT_BASIS_CAP: usize = 1_000_000;

/// Exponent vector of one gain monomial, receiver-major: coordinate
/// `j * M + i` holds the exponent of h_{ji}. Ordering is lexicographic on
/// that flattened vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    exponents: Vec<u32>,
}

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self { exponents }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            exponents: vec![0; len],
        }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// Copy with the exponent at flat coordinate `flat` incremented.
    pub fn bump(&self, flat: usize) -> Self {
        let mut exponents = self.exponents.clone();
        exponents[flat] += 1;
        Self { exponents }
    }

    /// Evaluates prod_{j,i} h_{ji}^{e_{ji}}; the all-zeros vector gives 1.
    pub fn eval(&self, ch: &ChannelSet) -> f64 {
        self.exponents
            .iter()
            .enumerate()
            .map(|(flat, &e)| ch.gain_flat(flat).powi(e as i32))
            .product()
    }
}

/// Exact cardinalities for a given (dims, n), without materializing anything.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cardinalities {
    /// |base set| = N^(M*J1).
    pub base: u128,
    /// |extended set| = (N+1)^(M*J1).
    pub extended: u128,
    /// Noise symbol count M * base.
    pub noise: u128,
}

/// Returns `None` on u128 overflow.
pub fn cardinalities(dims: SystemDims, n: u32) -> Option<Cardinalities> {
    let d = u32::try_from(dims.gain_count()).ok()?;
    let base = (n as u128).checked_pow(d)?;
    let extended = (n as u128 + 1).checked_pow(d)?;
    let noise = (dims.m as u128).checked_mul(base)?;
    Some(Cardinalities {
        base,
        extended,
        noise,
    })
}

/// The materialized precoding sets for one (dims, N).
#[derive(Debug, Clone)]
pub struct PrecoderBasis {
    dims: SystemDims,
    n: u32,
    base: Vec<Monomial>,
    extended: Vec<Monomial>,
}

/// 0/1 matrix mapping noise columns onto extended-set rows: column `c` has
/// its single 1 at row `col_to_row[c]`. Each row collects at most M columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionMatrix {
    rows: usize,
    col_to_row: Vec<usize>,
}

/// The block-diagonal precoder: row `i` of the M x (M*base) matrix holds the
/// evaluated base-monomial vector `v` in its own column block and zeros
/// elsewhere. Stored structurally; `to_dense` materializes it for checks.
#[derive(Debug, Clone)]
pub struct PrecoderMatrix {
    m: usize,
    v: Vec<f64>,
}

/// Distinct effective noise generators per receiver side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignmentStats {
    /// |{t + e_(j,i)}| over the base box; identical for every legitimate
    /// receiver by symmetry.
    pub legit_distinct: usize,
    /// M * base: eavesdropper generators never collide because each g_{ki}
    /// factor is fresh.
    pub eaves_distinct: usize,
}

fn enumerate_box(digits: usize, radix: u32, count: usize) -> Vec<Monomial> {
    let mut out = Vec::with_capacity(count);
    let mut cur = vec![0u32; digits];
    'outer: loop {
        out.push(Monomial::new(cur.clone()));
        for d in (0..digits).rev() {
            cur[d] += 1;
            if cur[d] < radix {
                continue 'outer;
            }
            cur[d] = 0;
        }
        break;
    }
    debug_assert_eq!(out.len(), count);
    out
}

impl PrecoderBasis {
    /// Builds both exponent boxes in lexicographic order under the default
    /// cardinality cap.
    pub fn build(dims: SystemDims, n: u32) -> Result<Self> {
        Self::build_with_cap(dims, n, DEFAULT_BASIS_CAP)
    }

    pub fn build_with_cap(dims: SystemDims, n: u32, cap: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidConfig("box parameter n must be >= 1".into()));
        }
        if dims.gain_count() < 1 {
            return Err(Error::InvalidConfig("need m * j1 >= 1 gains".into()));
        }
        let card = cardinalities(dims, n).ok_or(Error::CapExceeded {
            what: "precoder basis",
            needed: u128::MAX,
            cap: cap as u128,
        })?;
        if card.extended > cap as u128 {
            return Err(Error::CapExceeded {
                what: "precoder basis",
                needed: card.extended,
                cap: cap as u128,
            });
        }
        let digits = dims.gain_count();
        let base = enumerate_box(digits, n, card.base as usize);
        let extended = enumerate_box(digits, n + 1, card.extended as usize);
        Ok(Self {
            dims,
            n,
            base,
            extended,
        })
    }

    pub fn dims(&self) -> SystemDims {
        self.dims
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// The base monomials (exponents in {0..N-1}), lexicographic.
    pub fn base_set(&self) -> &[Monomial] {
        &self.base
    }

    /// The extended monomials (exponents in {0..N}), lexicographic.
    pub fn extended_set(&self) -> &[Monomial] {
        &self.extended
    }

    /// L = N^(M*J1).
    pub fn base_len(&self) -> usize {
        self.base.len()
    }

    /// L' = (N+1)^(M*J1).
    pub fn extended_len(&self) -> usize {
        self.extended.len()
    }

    /// Noise symbol count M*L.
    pub fn noise_len(&self) -> usize {
        self.dims.m * self.base.len()
    }

    /// Index of an exponent vector inside the extended set, by radix-(N+1)
    /// positional value. Panics if any exponent exceeds N (impossible for
    /// vectors produced by bumping a base vector once).
    fn extended_index(&self, mon: &Monomial) -> usize {
        let radix = self.n as usize + 1;
        let mut idx = 0usize;
        for &e in mon.exponents() {
            assert!((e as usize) < radix, "exponent outside the extended box");
            idx = idx * radix + e as usize;
        }
        idx
    }

    /// Evaluated base set on this channel: the precoder vector `v`.
    pub fn base_values(&self, ch: &ChannelSet) -> Vec<f64> {
        self.base.iter().map(|m| m.eval(ch)).collect()
    }

    /// Evaluated extended set on this channel: the common generator vector
    /// every legitimate effective noise channel selects from.
    pub fn extended_values(&self, ch: &ChannelSet) -> Vec<f64> {
        self.extended.iter().map(|m| m.eval(ch)).collect()
    }

    /// The block-diagonal precoder matrix for this channel.
    pub fn precoder_matrix(&self, ch: &ChannelSet) -> PrecoderMatrix {
        PrecoderMatrix {
            m: self.dims.m,
            v: self.base_values(ch),
        }
    }

    /// Effective noise channel of legitimate receiver `j` (0-based): value
    /// and exponent vector of every entry of h_j^T V. Entry (i, l) sits at
    /// flat position `i * L + l`, has value h_{ji} * v_l, and exponent vector
    /// base[l] bumped at (j, i).
    pub fn effective_noise_channel(
        &self,
        j: usize,
        ch: &ChannelSet,
    ) -> (Vec<f64>, Vec<Monomial>) {
        assert!(j < self.dims.j1, "receiver index out of range");
        let v = self.base_values(ch);
        let mut values = Vec::with_capacity(self.noise_len());
        let mut exps = Vec::with_capacity(self.noise_len());
        for i in 0..self.dims.m {
            let hji = ch.h_row(j)[i];
            let flat = self.dims.gain_index(j, i);
            for (l, mon) in self.base.iter().enumerate() {
                values.push(hji * v[l]);
                exps.push(mon.bump(flat));
            }
        }
        (values, exps)
    }

    /// Selection matrix of receiver `j`: column (i, l) points at the
    /// extended-set index of base[l] bumped at (j, i). The lookup is exact
    /// exponent arithmetic; a miss would be an internal invariant violation.
    pub fn selection(&self, j: usize) -> SelectionMatrix {
        assert!(j < self.dims.j1, "receiver index out of range");
        let mut col_to_row = Vec::with_capacity(self.noise_len());
        for i in 0..self.dims.m {
            let flat = self.dims.gain_index(j, i);
            for mon in &self.base {
                let bumped = mon.bump(flat);
                let row = self.extended_index(&bumped);
                assert_eq!(
                    self.extended[row], bumped,
                    "selection lookup missed its exponent vector"
                );
                col_to_row.push(row);
            }
        }
        SelectionMatrix {
            rows: self.extended.len(),
            col_to_row,
        }
    }

    /// Distinct generator counts on each side of the channel.
    pub fn alignment_stats(&self) -> AlignmentStats {
        let mut seen = HashSet::new();
        for i in 0..self.dims.m {
            let flat = self.dims.gain_index(0, i);
            for mon in &self.base {
                seen.insert(self.extended_index(&mon.bump(flat)));
            }
        }
        AlignmentStats {
            legit_distinct: seen.len(),
            eaves_distinct: self.noise_len(),
        }
    }

    /// Debug export: one exponent vector per line, space-separated.
    pub fn export_exponents(set: &[Monomial]) -> String {
        let mut out = String::new();
        for mon in set {
            let cells: Vec<String> = mon.exponents().iter().map(|e| e.to_string()).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out
    }
}

impl SelectionMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.col_to_row.len()
    }

    /// Row holding the single 1 of column `col`.
    pub fn row_of(&self, col: usize) -> usize {
        self.col_to_row[col]
    }

    /// Number of columns landing in each row; every count is <= M.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.rows];
        for &r in &self.col_to_row {
            counts[r] += 1;
        }
        counts
    }

    /// Rows with at least one column, with their column multiplicities.
    pub fn active_rows(&self) -> Vec<(usize, usize)> {
        self.row_counts()
            .into_iter()
            .enumerate()
            .filter(|&(_, k)| k > 0)
            .collect()
    }

    /// c = T_j b2: per-row sums of the mapped noise symbols.
    pub fn aggregate(&self, b2: &[i64]) -> Vec<i64> {
        debug_assert_eq!(b2.len(), self.cols());
        let mut c = vec![0i64; self.rows];
        for (col, &row) in self.col_to_row.iter().enumerate() {
            c[row] += b2[col];
        }
        c
    }

    /// The row vector extended^T T_j: per-column generator values.
    pub fn select_gains(&self, extended_values: &[f64]) -> Vec<f64> {
        debug_assert_eq!(extended_values.len(), self.rows);
        self.col_to_row
            .iter()
            .map(|&r| extended_values[r])
            .collect()
    }

    /// Dense 0/1 matrix, rows x cols, for cross-checks.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.cols()]; self.rows];
        for (col, &row) in self.col_to_row.iter().enumerate() {
            dense[row][col] = 1.0;
        }
        dense
    }

    /// Debug export: one `col row` pair per line, 0-based.
    pub fn export_pairs(&self) -> String {
        let mut out = String::new();
        for (col, &row) in self.col_to_row.iter().enumerate() {
            let _ = writeln!(out, "{col} {row}");
        }
        out
    }
}

impl PrecoderMatrix {
    pub fn m(&self) -> usize {
        self.m
    }

    /// The evaluated base-monomial vector repeated along the diagonal blocks.
    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.m * self.v.len()
    }

    /// Entry (i, col) honoring the block structure: zero off-block.
    pub fn value(&self, i: usize, col: usize) -> f64 {
        let l = self.v.len();
        if col / l == i {
            self.v[col % l]
        } else {
            0.0
        }
    }

    /// ||V||_F^2 = M * ||v||^2.
    pub fn frobenius_sq(&self) -> f64 {
        self.m as f64 * self.v.iter().map(|x| x * x).sum::<f64>()
    }

    /// x = V (scale * b2), exploiting the block structure.
    pub fn mul_symbols(&self, b2: &[i64], scale: f64) -> Vec<f64> {
        let l = self.v.len();
        debug_assert_eq!(b2.len(), self.cols());
        (0..self.m)
            .map(|i| {
                let block = &b2[i * l..(i + 1) * l];
                scale
                    * block
                        .iter()
                        .zip(&self.v)
                        .map(|(&b, &v)| b as f64 * v)
                        .sum::<f64>()
            })
            .collect()
    }

    /// Dense M x (M*L) matrix for cross-checks.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.m)
            .map(|i| (0..self.cols()).map(|c| self.value(i, c)).collect())
            .collect()
    }
}
