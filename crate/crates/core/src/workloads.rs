//! Synthetic workload families and workload file I/O.
//!
//! Every generator is a pure function of its parameters and seed. Draws come
//! from [`Rng`] in row-major order, so a seed pins the matrix bit for bit.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng::Rng;

/// Attempts allowed for drawing a row that is not identically zero.
pub const MAX_ROW_ATTEMPTS: usize = 1000;

/// Attributes the marginal domain is factored into.
pub const MARGINAL_ATTRIBUTES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkloadFamily {
    WDiscrete,
    WRange,
    WMarginal,
    WRelated,
    External,
}

impl WorkloadFamily {
    pub const SYNTHETIC: [WorkloadFamily; 4] = [
        WorkloadFamily::WDiscrete,
        WorkloadFamily::WRange,
        WorkloadFamily::WMarginal,
        WorkloadFamily::WRelated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::WDiscrete => "wdiscrete",
            Self::WRange => "wrange",
            Self::WMarginal => "wmarginal",
            Self::WRelated => "wrelated",
            Self::External => "external",
        }
    }
}

impl fmt::Display for WorkloadFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WorkloadFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wdiscrete" | "discrete" => Ok(Self::WDiscrete),
            "wrange" | "range" => Ok(Self::WRange),
            "wmarginal" | "marginal" => Ok(Self::WMarginal),
            "wrelated" | "related" => Ok(Self::WRelated),
            "external" => Ok(Self::External),
            other => Err(Error::InvalidParameter(format!(
                "unknown workload family {other:?}"
            ))),
        }
    }
}

/// Generator parameters; serialized into metadata next to the seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum WorkloadSpec {
    WDiscrete { m: usize, n: usize, p: f64 },
    WRange { m: usize, n: usize },
    WMarginal { m: usize, n: usize },
    WRelated { m: usize, n: usize, s: usize },
    External { m: usize, n: usize },
}

impl WorkloadSpec {
    /// Parameters for `family` with the default secondary parameters
    /// (`p = 0.5`, `s = ⌈min(m, n)/2⌉`).
    pub fn with_defaults(family: WorkloadFamily, m: usize, n: usize) -> Self {
        match family {
            WorkloadFamily::WDiscrete => Self::WDiscrete { m, n, p: 0.5 },
            WorkloadFamily::WRange => Self::WRange { m, n },
            WorkloadFamily::WMarginal => Self::WMarginal { m, n },
            WorkloadFamily::WRelated => Self::WRelated {
                m,
                n,
                s: default_related_rank(m, n),
            },
            WorkloadFamily::External => Self::External { m, n },
        }
    }

    pub fn family(&self) -> WorkloadFamily {
        match self {
            Self::WDiscrete { .. } => WorkloadFamily::WDiscrete,
            Self::WRange { .. } => WorkloadFamily::WRange,
            Self::WMarginal { .. } => WorkloadFamily::WMarginal,
            Self::WRelated { .. } => WorkloadFamily::WRelated,
            Self::External { .. } => WorkloadFamily::External,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match *self {
            Self::WDiscrete { m, n, .. }
            | Self::WRange { m, n }
            | Self::WMarginal { m, n }
            | Self::WRelated { m, n, .. }
            | Self::External { m, n } => (m, n),
        }
    }

    pub fn generate(&self, seed: u64) -> Result<WorkloadMatrix> {
        match *self {
            Self::WDiscrete { m, n, p } => gen_wdiscrete(m, n, p, seed),
            Self::WRange { m, n } => gen_wrange(m, n, seed),
            Self::WMarginal { m, n } => gen_wmarginal(m, n, seed),
            Self::WRelated { m, n, s } => gen_wrelated(m, n, s, seed),
            Self::External { .. } => Err(Error::InvalidParameter(
                "external workloads are loaded, not generated".into(),
            )),
        }
    }
}

pub fn default_related_rank(m: usize, n: usize) -> usize {
    m.min(n).div_ceil(2).max(1)
}

#[derive(Clone, Debug)]
pub struct WorkloadMatrix {
    matrix: DenseMatrix,
    spec: WorkloadSpec,
    seed: u64,
}

impl WorkloadMatrix {
    /// Wraps a user-supplied matrix; it must contain a nonzero entry.
    pub fn external(matrix: DenseMatrix) -> Result<Self> {
        if matrix.rows() == 0 || matrix.cols() == 0 {
            return Err(Error::InvalidParameter("empty workload".into()));
        }
        if matrix.max_abs() == 0.0 {
            return Err(Error::InvalidParameter(
                "workload is identically zero".into(),
            ));
        }
        let spec = WorkloadSpec::External {
            m: matrix.rows(),
            n: matrix.cols(),
        };
        Ok(Self {
            matrix,
            spec,
            seed: 0,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.matrix
    }

    pub fn family(&self) -> WorkloadFamily {
        self.spec.family()
    }

    pub fn spec(&self) -> &WorkloadSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn metadata(&self) -> WorkloadMetadata {
        let conventions = match self.spec {
            WorkloadSpec::WMarginal { n, .. } => Some(format!(
                "two-way marginals over {MARGINAL_ATTRIBUTES} attributes of size {} \
                 (cell c has attribute t value (c / size^t) mod size; cells >= {n} dropped)",
                marginal_attribute_size(n)
            )),
            WorkloadSpec::WDiscrete { .. } => {
                Some("entries i.i.d. Bernoulli(p) over {0, 1}".into())
            }
            WorkloadSpec::WRelated { .. } => {
                Some("W = C·A with C (m×s) then A (s×n) drawn i.i.d. N(0, 1), row-major".into())
            }
            _ => None,
        };
        WorkloadMetadata {
            spec: self.spec.clone(),
            seed: self.seed,
            rows: self.rows(),
            cols: self.cols(),
            rng: "splitmix64".into(),
            conventions,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadMetadata {
    pub spec: WorkloadSpec,
    pub seed: u64,
    pub rows: usize,
    pub cols: usize,
    pub rng: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conventions: Option<String>,
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "workload dimensions must be positive, got {m}x{n}"
        )));
    }
    Ok(())
}

/// Fills each row with `draw`, redrawing rows that come out all zero.
fn fill_rows(
    m: usize,
    n: usize,
    rng: &mut Rng,
    mut draw: impl FnMut(&mut Rng, &mut [f64]),
) -> Result<DenseMatrix> {
    let mut w = DenseMatrix::zeros(m, n);
    for i in 0..m {
        let row = w.row_mut(i);
        let mut attempts = 0;
        loop {
            row.iter_mut().for_each(|v| *v = 0.0);
            draw(rng, row);
            attempts += 1;
            if row.iter().any(|&v| v != 0.0) {
                break;
            }
            if attempts == MAX_ROW_ATTEMPTS {
                return Err(Error::ResamplingExhausted { attempts });
            }
        }
    }
    Ok(w)
}

/// Entries i.i.d. Bernoulli(`p`) in `{0, 1}`.
pub fn gen_wdiscrete(m: usize, n: usize, p: f64, seed: u64) -> Result<WorkloadMatrix> {
    check_dims(m, n)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p must lie in (0, 1], got {p}"
        )));
    }
    let mut rng = Rng::new(seed);
    let matrix = fill_rows(m, n, &mut rng, |rng, row| {
        for v in row.iter_mut() {
            *v = if rng.bernoulli(p) { 1.0 } else { 0.0 };
        }
    })?;
    Ok(WorkloadMatrix {
        matrix,
        spec: WorkloadSpec::WDiscrete { m, n, p },
        seed,
    })
}

/// Each row is the indicator of `[min(a, b), max(a, b)]` for two independent
/// uniform cells `a`, `b`.
pub fn gen_wrange(m: usize, n: usize, seed: u64) -> Result<WorkloadMatrix> {
    check_dims(m, n)?;
    let mut rng = Rng::new(seed);
    let matrix = fill_rows(m, n, &mut rng, |rng, row| {
        let a = rng.next_below(n as u64) as usize;
        let b = rng.next_below(n as u64) as usize;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        row[lo..=hi].iter_mut().for_each(|v| *v = 1.0);
    })?;
    Ok(WorkloadMatrix {
        matrix,
        spec: WorkloadSpec::WRange { m, n },
        seed,
    })
}

/// Smallest `k` with `k⁴ ≥ n`.
pub fn marginal_attribute_size(n: usize) -> usize {
    let mut k = (n as f64).powf(0.25).floor().max(1.0) as usize;
    while k.pow(MARGINAL_ATTRIBUTES as u32) < n {
        k += 1;
    }
    k
}

/// Two-way marginals over `n` cells viewed as the first `n` points of a
/// `k×k×k×k` grid. A query picks a uniform attribute pair and a uniform value
/// for each of the two, and counts every cell matching both.
pub fn gen_wmarginal(m: usize, n: usize, seed: u64) -> Result<WorkloadMatrix> {
    check_dims(m, n)?;
    let k = marginal_attribute_size(n);
    let pairs: Vec<(usize, usize)> = (0..MARGINAL_ATTRIBUTES)
        .flat_map(|i| ((i + 1)..MARGINAL_ATTRIBUTES).map(move |j| (i, j)))
        .collect();
    let strides: Vec<usize> = (0..MARGINAL_ATTRIBUTES).map(|t| k.pow(t as u32)).collect();

    let mut rng = Rng::new(seed);
    let matrix = fill_rows(m, n, &mut rng, |rng, row| {
        let (a, b) = pairs[rng.next_below(pairs.len() as u64) as usize];
        let va = rng.next_below(k as u64) as usize;
        let vb = rng.next_below(k as u64) as usize;
        for (cell, v) in row.iter_mut().enumerate() {
            if (cell / strides[a]) % k == va && (cell / strides[b]) % k == vb {
                *v = 1.0;
            }
        }
    })?;
    Ok(WorkloadMatrix {
        matrix,
        spec: WorkloadSpec::WMarginal { m, n },
        seed,
    })
}

/// Rank-`s` workload `C·A` with standard normal factors.
pub fn gen_wrelated(m: usize, n: usize, s: usize, seed: u64) -> Result<WorkloadMatrix> {
    check_dims(m, n)?;
    if s == 0 || s > m.min(n) {
        return Err(Error::InvalidParameter(format!(
            "rank s must lie in [1, {}], got {s}",
            m.min(n)
        )));
    }
    let mut rng = Rng::new(seed);
    let c = DenseMatrix::from_fn(m, s, |_, _| rng.standard_normal());
    let a = DenseMatrix::from_fn(s, n, |_, _| rng.standard_normal());
    let matrix = c.matmul(&a);
    if matrix.max_abs() == 0.0 {
        return Err(Error::ResamplingExhausted { attempts: 1 });
    }
    Ok(WorkloadMatrix {
        matrix,
        spec: WorkloadSpec::WRelated { m, n, s },
        seed,
    })
}

pub fn load_workload(path: impl AsRef<Path>) -> Result<WorkloadMatrix> {
    let file = File::open(path)?;
    let matrix = DenseMatrix::read_csv(BufReader::new(file))?;
    WorkloadMatrix::external(matrix)
}

pub fn save_workload(w: &WorkloadMatrix, path: impl AsRef<Path>) -> Result<()> {
    save_matrix(w.matrix(), path)
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let file = File::open(path)?;
    DenseMatrix::read_csv(BufReader::new(file))
}

pub fn save_matrix(m: &DenseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    m.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}
