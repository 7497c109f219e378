//! Exact information-theoretic primitives over two substrates: dense joint
//! probability tables on finite alphabets, and linear-Gaussian systems where
//! every variable is a linear combination of independent unit-variance base
//! coordinates. All rates and entropies are in bits (log base 2).

mod linear_gaussian;
mod pmf;

pub use linear_gaussian::LinearGaussianSystem;
pub use pmf::{assemble_joint, FactorKernel, JointPmf};

use thiserror::Error;

/// Hard cap on dense table sizes (number of cells).
pub const SIZE_GUARD: usize = 1 << 26;

/// Normalization slack for probability tables and kernel slices.
pub const NORM_TOL: f64 = 1e-12;

/// Relative tolerance on residual norms below which a Gaussian direction is
/// treated as deterministic given the conditioning set.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum InfoError {
    #[error("table would hold {cells} cells, exceeding the 2^26 size guard")]
    SizeGuardExceeded { cells: u128 },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("kernel parent `{0}` has not been produced by an earlier kernel")]
    UnknownParent(String),
    #[error("{context}: probabilities sum to {sum}, not 1")]
    NotNormalized { context: String, sum: f64 },
    #[error("{context}: negative probability {value}")]
    NegativeProbability { context: String, value: f64 },
    #[error("variable sets overlap on `{0}`")]
    OverlappingSets(String),
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("{context}: table has {got} entries, expected {want}")]
    DimensionMismatch {
        context: String,
        got: usize,
        want: usize,
    },
    #[error("mutual information diverges: `{a}` and `{b}` share a direction given the conditioning set")]
    InfiniteMutualInformation { a: String, b: String },
}

/// An ordered, duplicate-free set of variable names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VarSet(Vec<String>);

impl VarSet {
    pub fn new<I, S>(names: I) -> Result<Self, InfoError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out: Vec<String> = Vec::new();
        for n in names {
            let n = n.into();
            if out.contains(&n) {
                return Err(InfoError::DuplicateName(n));
            }
            out.push(n);
        }
        Ok(VarSet(out))
    }

    /// Infallible constructor for statically known name lists.
    ///
    /// Panics on duplicates.
    pub fn of<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(names).expect("duplicate name in VarSet::of")
    }

    pub fn empty() -> Self {
        VarSet(Vec::new())
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.iter().any(|n| n == name)
    }

    /// Concatenation; duplicates across the two operands are an error at the
    /// call sites that require disjointness, so this stays unchecked.
    pub(crate) fn joined(&self, other: &VarSet) -> VarSet {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        VarSet(v)
    }
}

impl std::fmt::Display for VarSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0.join(","))
    }
}

pub(crate) fn check_disjoint(sets: &[&VarSet]) -> Result<(), InfoError> {
    for (i, a) in sets.iter().enumerate() {
        for b in sets.iter().skip(i + 1) {
            for n in a.names() {
                if b.contains(n) {
                    return Err(InfoError::OverlappingSets(n.clone()));
                }
            }
        }
    }
    Ok(())
}

/// Compensated (Kahan) summation; keeps normalization and entropy sums
/// accurate over multi-million-cell tables.
pub(crate) fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}
