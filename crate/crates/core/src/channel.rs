//! Compound multi-antenna wiretap channel: one M-antenna transmitter, J1
//! single-antenna legitimate receivers, J2 single-antenna eavesdroppers.
//!
//! Outputs are `y_j = h_j^T x + v_j` and `z_k = g_k^T x + w_k` with
//! unit-variance AWGN. Gains are sampled from a continuous distribution; the
//! transmitter knows the legitimate gains exactly and only the norm bound
//! `c = max_k ||g_k||^2` for the eavesdroppers.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{Error, Result};
use crate::rng::{label, seed_substream};

/// Antenna and receiver counts for one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemDims {
    /// Transmit antenna count (M >= 1).
    pub m: usize,
    /// Legitimate receiver count (J1 >= 1).
    pub j1: usize,
    /// Eavesdropper count (J2 >= 0).
    pub j2: usize,
}

impl SystemDims {
    pub fn new(m: usize, j1: usize, j2: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidConfig("m must be >= 1".into()));
        }
        if j1 < 1 {
            return Err(Error::InvalidConfig("j1 must be >= 1".into()));
        }
        Ok(Self { m, j1, j2 })
    }

    /// Number of legitimate gains M*J1; the exponent-vector length used by
    /// the precoder.
    pub fn gain_count(&self) -> usize {
        self.m * self.j1
    }

    /// Flat index of gain (j, i), receiver-major.
    pub fn gain_index(&self, j: usize, i: usize) -> usize {
        debug_assert!(j < self.j1 && i < self.m);
        j * self.m + i
    }
}

/// Continuous distribution the gains are drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainDist {
    StandardNormal,
    Uniform { lo: f64, hi: f64 },
}

impl GainDist {
    fn validate(&self) -> Result<()> {
        match *self {
            GainDist::StandardNormal => Ok(()),
            GainDist::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    Err(Error::InvalidConfig(format!(
                        "uniform gain distribution needs lo < hi, got [{lo}, {hi}]"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn sample_into<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        match *self {
            GainDist::StandardNormal => {
                let normal = Normal::new(0.0, 1.0).unwrap();
                for x in out {
                    *x = normal.sample(rng);
                }
            }
            GainDist::Uniform { lo, hi } => {
                let uni = Uniform::new(lo, hi).unwrap();
                for x in out {
                    *x = uni.sample(rng);
                }
            }
        }
    }
}

/// One draw of the channel: legitimate gains `h`, eavesdropper gains `g`,
/// and the eavesdropper norm bound `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    dims: SystemDims,
    h: Vec<Vec<f64>>,
    g: Vec<Vec<f64>>,
    c: f64,
}

/// Receiver-side outputs of one channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkOutputs {
    /// Legitimate outputs, length J1.
    pub y: Vec<f64>,
    /// Eavesdropper outputs, length J2.
    pub z: Vec<f64>,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

impl ChannelSet {
    /// Builds a channel set from explicit gain rows, recomputing `c`.
    ///
    /// Rejects non-finite or zero entries and duplicate legitimate gains
    /// (the continuous-sampling surrogate for rational independence).
    pub fn from_gains(h: Vec<Vec<f64>>, g: Vec<Vec<f64>>) -> Result<Self> {
        if h.is_empty() || h[0].is_empty() {
            return Err(Error::InvalidConfig("H must be nonempty".into()));
        }
        let m = h[0].len();
        let dims = SystemDims::new(m, h.len(), g.len())?;
        for row in h.iter().chain(g.iter()) {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: row.len(),
                });
            }
            for &x in row {
                if !x.is_finite() || x == 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "gain entries must be finite and nonzero, got {x}"
                    )));
                }
            }
        }
        let mut flat: Vec<f64> = h.iter().flatten().copied().collect();
        flat.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if flat.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(
                "legitimate gains must be pairwise distinct".into(),
            ));
        }
        let c = g.iter().map(|row| norm_sq(row)).fold(0.0, f64::max);
        Ok(Self { dims, h, g, c })
    }

    /// Samples i.i.d. gains from `dist`, deterministically in `seed`.
    /// `c` is set to the exact maximum eavesdropper norm (0 when J2 = 0).
    pub fn sample(dims: SystemDims, dist: GainDist, seed: u64) -> Result<Self> {
        let mut rng = seed_substream(seed, &[label::CHANNEL]);
        Self::sample_with_rng(dims, dist, &mut rng)
    }

    /// Like [`ChannelSet::sample`] with a caller-owned RNG.
    pub fn sample_with_rng<R: Rng>(dims: SystemDims, dist: GainDist, rng: &mut R) -> Result<Self> {
        dist.validate()?;
        let draw_rows = |rng: &mut R, rows: usize| {
            (0..rows)
                .map(|_| {
                    let mut row = vec![0.0; dims.m];
                    dist.sample_into(rng, &mut row);
                    row
                })
                .collect::<Vec<_>>()
        };
        let h = draw_rows(rng, dims.j1);
        let g = draw_rows(rng, dims.j2);
        Self::from_gains(h, g)
    }

    pub fn dims(&self) -> SystemDims {
        self.dims
    }

    /// Gains of legitimate receiver `j` (0-based).
    pub fn h_row(&self, j: usize) -> &[f64] {
        &self.h[j]
    }

    /// Gains of eavesdropper `k` (0-based).
    pub fn g_row(&self, k: usize) -> &[f64] {
        &self.g[k]
    }

    /// Gain h_{ji} by flat index (receiver-major).
    pub(crate) fn gain_flat(&self, flat: usize) -> f64 {
        self.h[flat / self.dims.m][flat % self.dims.m]
    }

    /// The recorded eavesdropper norm bound.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// max_k ||g_k||^2, recomputed from the gains; 0 when J2 = 0.
    pub fn eaves_norm_bound(&self) -> f64 {
        self.g.iter().map(|row| norm_sq(row)).fold(0.0, f64::max)
    }

    /// One channel use: `y_j = h_j^T x + v_j`, `z_k = g_k^T x + w_k`.
    /// With `noise` = `None` the outputs are exactly noiseless. Noise draws
    /// are ordered: all legitimate receivers first, then all eavesdroppers.
    pub fn apply<R: Rng>(&self, x: &[f64], mut noise: Option<&mut R>) -> Result<LinkOutputs> {
        if x.len() != self.dims.m {
            return Err(Error::DimensionMismatch {
                expected: self.dims.m,
                got: x.len(),
            });
        }
        let mut draw = |mean: f64| -> f64 {
            match noise.as_deref_mut() {
                Some(rng) => {
                    let n: f64 = Normal::new(0.0, 1.0).unwrap().sample(rng);
                    mean + n
                }
                None => mean,
            }
        };
        let y = self.h.iter().map(|row| draw(dot(row, x))).collect();
        let z = self.g.iter().map(|row| draw(dot(row, x))).collect();
        Ok(LinkOutputs { y, z })
    }

    /// Plain-text form: header `M J1 J2 c`, then the rows of H and G,
    /// space-separated, shortest round-trip decimal.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {} {}",
            self.dims.m, self.dims.j1, self.dims.j2, self.c
        );
        for row in self.h.iter().chain(self.g.iter()) {
            let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::ChannelFile("empty file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::ChannelFile(format!(
                "header must be \"M J1 J2 c\", got {} fields",
                fields.len()
            )));
        }
        let parse_count = |s: &str, name: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::ChannelFile(format!("bad {name}: {s}")))
        };
        let m = parse_count(fields[0], "M")?;
        let j1 = parse_count(fields[1], "J1")?;
        let j2 = parse_count(fields[2], "J2")?;
        let c: f64 = fields[3]
            .parse()
            .map_err(|_| Error::ChannelFile(format!("bad c: {}", fields[3])))?;
        let mut parse_row = |what: &str| -> Result<Vec<f64>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::ChannelFile(format!("missing {what} row")))?;
            let row: std::result::Result<Vec<f64>, _> =
                line.split_whitespace().map(str::parse).collect();
            let row = row.map_err(|_| Error::ChannelFile(format!("bad number in {what} row")))?;
            if row.len() != m {
                return Err(Error::ChannelFile(format!(
                    "{what} row has {} entries, expected {m}",
                    row.len()
                )));
            }
            Ok(row)
        };
        let h: Vec<Vec<f64>> = (0..j1).map(|_| parse_row("H")).collect::<Result<_>>()?;
        let g: Vec<Vec<f64>> = (0..j2).map(|_| parse_row("G")).collect::<Result<_>>()?;
        let ch = Self::from_gains(h, g)?;
        if (ch.c - c).abs() > 1e-12 * c.abs().max(1.0) {
            return Err(Error::ChannelFile(format!(
                "header c = {c} does not match max_k ||g_k||^2 = {}",
                ch.c
            )));
        }
        Ok(ch)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }
}
