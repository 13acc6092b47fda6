use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

const UNITARITY_TOL: f64 = 1e-10;

/// A passive linear-optical transformation on a set of modes.
///
/// Column `j` holds the image of the creation operator of input mode `j`:
/// `a†_j -> sum_k U[k, j] a†_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeUnitary {
    matrix: DMatrix<Complex64>,
}

impl ModeUnitary {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "unitary must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn from_row_slice(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<Complex64>) -> Self {
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim) }
    }

    /// Symmetric directional coupler `[[√T, i√R], [i√R, √T]]` with power
    /// transmission `T` (probability of staying in the same waveguide).
    pub fn coupler(transmission: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmission) {
            return Err(Error::OutOfRange(format!("transmission {transmission}")));
        }
        let t = Complex64::new(transmission.sqrt(), 0.0);
        let r = Complex64::new(0.0, (1.0 - transmission).sqrt());
        Ok(Self::from_matrix_unchecked(DMatrix::from_row_slice(2, 2, &[t, r, r, t])))
    }

    /// The 50:50 MMI coupler `[[1, i], [i, 1]] / √2`.
    pub fn balanced() -> Self {
        Self::coupler(0.5).expect("0.5 is a valid transmission")
    }

    pub fn diagonal(phases: &[f64]) -> Self {
        let diag: Vec<Complex64> = phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
        Self::from_matrix_unchecked(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
    }

    /// Mach-Zehnder interferometer `C · diag(e^{iθ}, 1) · C` built from two
    /// balanced couplers with an internal phase `θ` on the upper arm.
    ///
    /// Closed form: `i e^{iθ/2} [[sin θ/2, cos θ/2], [cos θ/2, -sin θ/2]]`, so
    /// `θ = 0` is a full cross and `θ = π` is a full bar.
    pub fn mzi(theta: f64) -> Self {
        let c = Self::balanced();
        c.compose(&Self::diagonal(&[theta, 0.0])).compose(&c)
    }

    /// Mode permutation sending input mode `j` to output mode `perm[j]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        let mut m = DMatrix::zeros(n, n);
        for (j, &k) in perm.iter().enumerate() {
            if k >= n || seen[k] {
                return Err(Error::InvalidArgument(format!("not a permutation: {perm:?}")));
            }
            seen[k] = true;
            m[(k, j)] = Complex64::new(1.0, 0.0);
        }
        Ok(Self::from_matrix_unchecked(m))
    }

    /// Haar-random unitary via QR decomposition of a complex Ginibre matrix.
    pub fn haar_random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let g = DMatrix::from_fn(dim, dim, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) / std::f64::consts::SQRT_2
        });
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
        Self::from_matrix_unchecked(q)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    /// `self · other`: `other` acts first.
    pub fn compose(&self, other: &ModeUnitary) -> ModeUnitary {
        Self::from_matrix_unchecked(&self.matrix * &other.matrix)
    }

    pub fn dagger(&self) -> ModeUnitary {
        Self::from_matrix_unchecked(self.matrix.adjoint())
    }

    pub(crate) fn as_2x2(&self) -> Option<[[Complex64; 2]; 2]> {
        (self.dim() == 2).then(|| {
            [
                [self.matrix[(0, 0)], self.matrix[(0, 1)]],
                [self.matrix[(1, 0)], self.matrix[(1, 1)]],
            ]
        })
    }
}

pub(crate) fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let product = m.adjoint() * m;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((product[(i, j)] - target).norm());
        }
    }
    worst
}
