//! Zero-mean Gaussian-state algebra in shot-noise units.
//!
//! Covariance matrices use the interleaved quadrature ordering
//! `(x1, p1, x2, p2, ...)` and the vacuum has variance 1 in every quadrature.
//! Every operation is a pure function of its inputs.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::protocols::ChannelParams;

/// Relative tolerance on `|a_ij - a_ji|` accepted by [`CovarianceMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Default tolerance on symplectic eigenvalues for physicality checks.
pub const PHYSICALITY_TOL: f64 = 1e-9;
/// Relative tolerance when pairing the doubly degenerate spectrum.
pub const PAIRING_TOL: f64 = 1e-8;
/// Smallest measured variance accepted by homodyne conditioning.
pub const DEGENERATE_VARIANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quadrature {
    X,
    P,
}

impl Quadrature {
    fn offset(self) -> usize {
        match self {
            Quadrature::X => 0,
            Quadrature::P => 1,
        }
    }
}

/// Covariance matrix of an `n`-mode zero-mean Gaussian state.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    matrix: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Validates shape and symmetry, then stores the exactly symmetrized matrix.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows == 0 || rows % 2 != 0 {
            return Err(Error::BadDimension { rows, cols });
        }
        let scale = matrix.amax().max(1.0);
        let asymmetry = (&matrix - matrix.transpose()).amax();
        if asymmetry > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric { asymmetry });
        }
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        Ok(Self { matrix })
    }

    pub fn from_row_slice(n_modes: usize, entries: &[f64]) -> Result<Self> {
        let dim = 2 * n_modes;
        if entries.len() != dim * dim {
            return Err(Error::BadDimension {
                rows: dim,
                cols: entries.len() / dim.max(1),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// Single-mode state with the given quadrature variances.
    pub fn single_mode(v_x: f64, v_p: f64) -> Self {
        Self {
            matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![v_x, v_p])),
        }
    }

    /// Block-diagonal product of independent states.
    pub fn direct_sum(parts: &[&CovarianceMatrix]) -> Self {
        let dim: usize = parts.iter().map(|p| p.dim()).sum();
        let mut matrix = DMatrix::zeros(dim, dim);
        let mut at = 0;
        for part in parts {
            let d = part.dim();
            matrix.view_mut((at, at), (d, d)).copy_from(&part.matrix);
            at += d;
        }
        Self { matrix }
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// Entry `(row, col)` in quadrature ordering.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.matrix[(row, col)]
    }

    /// Variance of one quadrature of one mode.
    pub fn variance(&self, mode: usize, quad: Quadrature) -> f64 {
        let i = 2 * mode + quad.offset();
        self.matrix[(i, i)]
    }

    /// Largest entrywise absolute difference to another matrix of the same size.
    pub fn max_abs_diff(&self, other: &CovarianceMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        (&self.matrix - &other.matrix).amax()
    }

    fn check_mode(&self, index: usize) -> Result<()> {
        if index >= self.n_modes() {
            return Err(Error::ModeOutOfRange {
                index,
                n_modes: self.n_modes(),
            });
        }
        Ok(())
    }

    /// Congruence `S Γ Sᵀ` restricted to a set of modes. `local` acts on the
    /// quadratures of `modes` in the listed order.
    fn congruence(&self, modes: &[usize], local: &DMatrix<f64>) -> Self {
        let dim = self.dim();
        let mut s = DMatrix::identity(dim, dim);
        for (a, &ma) in modes.iter().enumerate() {
            for (b, &mb) in modes.iter().enumerate() {
                for qa in 0..2 {
                    for qb in 0..2 {
                        s[(2 * ma + qa, 2 * mb + qb)] = local[(2 * a + qa, 2 * b + qb)];
                    }
                }
            }
        }
        let matrix = &s * &self.matrix * s.transpose();
        Self {
            matrix: (&matrix + matrix.transpose()) * 0.5,
        }
    }
}

/// The canonical symplectic form `Ω = ⊕ ω`, `ω = [[0, 1], [-1, 0]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticForm {
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// # Panics
///
/// Panics when `n_modes` is zero.
pub fn symplectic_form(n_modes: usize) -> SymplecticForm {
    assert!(n_modes >= 1, "symplectic form needs at least one mode");
    let dim = 2 * n_modes;
    let mut matrix = DMatrix::zeros(dim, dim);
    for i in 0..n_modes {
        matrix[(2 * i, 2 * i + 1)] = 1.0;
        matrix[(2 * i + 1, 2 * i)] = -1.0;
    }
    SymplecticForm { matrix }
}

/// Symplectic eigenvalues in descending order.
///
/// Computed as the moduli of the spectrum of `iΩΓ`. Each mode is first
/// rebalanced with a local squeezer so its x and p variances agree; this
/// is a symplectic congruence (spectrum unchanged) and keeps the eigen-solve
/// well conditioned for strongly squeezed states. The spectrum is then read
/// off the symmetric matrix `-(Γ^{1/2} Ω Γ^{1/2})²`, whose eigenvalues are
/// the squared symplectic eigenvalues, each twice.
pub fn symplectic_eigenvalues(cm: &CovarianceMatrix) -> Result<Vec<f64>> {
    let balanced = balance_modes(cm);
    let n = cm.n_modes();
    let eig = SymmetricEigen::new(balanced.matrix.clone());
    let min_eigenvalue = eig.eigenvalues.min();
    if !(min_eigenvalue > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    let sqrt_diag = eig.eigenvalues.map(f64::sqrt);
    let root =
        &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_diag) * eig.eigenvectors.transpose();
    let omega = symplectic_form(n);
    let a = &root * omega.matrix() * &root;
    let m = a.transpose() * &a;
    let m = (&m + m.transpose()) * 0.5;
    let mut squares: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    squares.sort_by(|x, y| y.total_cmp(x));
    let mut out = Vec::with_capacity(n);
    for pair in squares.chunks_exact(2) {
        let (first, second) = (pair[0], pair[1]);
        if (first - second).abs() > PAIRING_TOL * first.abs().max(1.0) {
            return Err(Error::UnpairedSpectrum { first, second });
        }
        out.push((0.5 * (first + second)).max(0.0).sqrt());
    }
    Ok(out)
}

fn balance_modes(cm: &CovarianceMatrix) -> CovarianceMatrix {
    let mut out = cm.clone();
    for mode in 0..cm.n_modes() {
        let vx = out.matrix[(2 * mode, 2 * mode)];
        let vp = out.matrix[(2 * mode + 1, 2 * mode + 1)];
        if vx > 0.0 && vp > 0.0 {
            let r = 0.25 * (vx / vp).ln();
            if r != 0.0 {
                out = out.congruence(&[mode], &squeezer_matrix(r));
            }
        }
    }
    out
}

/// Smallest symplectic eigenvalue, or `None` when `Γ` is not positive definite.
pub fn min_symplectic_eigenvalue(cm: &CovarianceMatrix) -> Option<f64> {
    symplectic_eigenvalues(cm)
        .ok()
        .and_then(|nu| nu.last().copied())
}

/// True when every symplectic eigenvalue is at least `1 - tol`, i.e. `Γ + iΩ ⪰ 0`.
pub fn is_physical(cm: &CovarianceMatrix, tol: f64) -> bool {
    min_symplectic_eigenvalue(cm).is_some_and(|nu| nu >= 1.0 - tol)
}

/// Entropy contribution (bits) of one mode with symplectic eigenvalue `v`.
pub fn g_entropy(v: f64) -> Result<f64> {
    if !(v >= 1.0 - PHYSICALITY_TOL) {
        return Err(Error::UnphysicalEigenvalue(v));
    }
    let v = v.max(1.0);
    let plus = 0.5 * (v + 1.0);
    let minus = 0.5 * (v - 1.0);
    Ok(xlog2x(plus) - xlog2x(minus))
}

fn xlog2x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(cm: &CovarianceMatrix) -> Result<f64> {
    symplectic_eigenvalues(cm)?.into_iter().map(g_entropy).sum()
}

/// Two-mode squeezed vacuum with variance `mu` on both modes.
pub fn two_mode_squeezed(mu: f64) -> Result<CovarianceMatrix> {
    if !(mu >= 1.0) || !mu.is_finite() {
        return Err(Error::param("mu", mu, "EPR variance must be >= 1"));
    }
    let c = (mu * mu - 1.0).sqrt();
    CovarianceMatrix::from_row_slice(
        2,
        &[
            mu, 0.0, c, 0.0, //
            0.0, mu, 0.0, -c, //
            c, 0.0, mu, 0.0, //
            0.0, -c, 0.0, mu,
        ],
    )
}

fn squeezer_matrix(r: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[(-r).exp(), 0.0, 0.0, r.exp()])
}

/// Single-mode squeezer `diag(e^{-r}, e^{r})`; positive `r` squeezes x.
pub fn apply_squeezer(cm: &CovarianceMatrix, mode: usize, r: f64) -> Result<CovarianceMatrix> {
    cm.check_mode(mode)?;
    if !r.is_finite() {
        return Err(Error::param("r", r, "squeezing must be finite"));
    }
    Ok(cm.congruence(&[mode], &squeezer_matrix(r)))
}

/// Beamsplitter with intensity transmissivity `tau`, acting identically on x and p:
///
/// ```text
/// a' =  √τ a + √(1-τ) b
/// b' = -√(1-τ) a + √τ b
/// ```
///
/// At `tau = 0` this is the swap `a' = b`, `b' = -a`.
pub fn apply_beamsplitter(
    cm: &CovarianceMatrix,
    mode_a: usize,
    mode_b: usize,
    tau: f64,
) -> Result<CovarianceMatrix> {
    cm.check_mode(mode_a)?;
    cm.check_mode(mode_b)?;
    if mode_a == mode_b {
        return Err(Error::DuplicateMode(mode_a));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::param("transmissivity", tau, "must lie in [0, 1]"));
    }
    let t = tau.sqrt();
    let s = (1.0 - tau).sqrt();
    let local = DMatrix::from_row_slice(
        4,
        4,
        &[
            t, 0.0, s, 0.0, //
            0.0, t, 0.0, s, //
            -s, 0.0, t, 0.0, //
            0.0, -s, 0.0, t,
        ],
    );
    Ok(cm.congruence(&[mode_a, mode_b], &local))
}

/// Phase-insensitive-per-quadrature thermal-loss channel on one mode.
///
/// Each quadrature of the selected mode is scaled by `√T` and picks up
/// `T ξ + 1 - T` of added noise, so a variance `v` maps to `T (v + ξ) + 1 - T`.
/// Excess noise is referred to the channel input.
pub fn thermal_loss_channel(
    cm: &CovarianceMatrix,
    mode: usize,
    channel: &ChannelParams,
) -> Result<CovarianceMatrix> {
    cm.check_mode(mode)?;
    channel.validate()?;
    let mut matrix = cm.matrix.clone();
    let scale = [channel.t_x.sqrt(), channel.t_p.sqrt()];
    let noise = [
        channel.t_x * channel.xi_x + 1.0 - channel.t_x,
        channel.t_p * channel.xi_p + 1.0 - channel.t_p,
    ];
    for (q, (&k, &added)) in scale.iter().zip(noise.iter()).enumerate() {
        let i = 2 * mode + q;
        for j in 0..cm.dim() {
            matrix[(i, j)] *= k;
            matrix[(j, i)] *= k;
        }
        matrix[(i, i)] += added;
    }
    Ok(CovarianceMatrix { matrix })
}

fn complement_indices(dim: usize, mode: usize) -> Vec<usize> {
    (0..dim).filter(|&i| i / 2 != mode).collect()
}

/// Conditional state of the other modes after homodyning one quadrature of `measured_mode`.
///
/// Rank-one Schur complement `Γ_rest - c cᵀ / γ`, where `γ` is the measured
/// variance and `c` its correlations with the remaining quadratures. The
/// result does not depend on the measurement outcome.
pub fn condition_homodyne(
    cm: &CovarianceMatrix,
    measured_mode: usize,
    quad: Quadrature,
) -> Result<CovarianceMatrix> {
    cm.check_mode(measured_mode)?;
    if cm.n_modes() < 2 {
        return Err(Error::TooFewModes(cm.n_modes()));
    }
    let m = 2 * measured_mode + quad.offset();
    let gamma = cm.matrix[(m, m)];
    if !(gamma > DEGENERATE_VARIANCE) {
        return Err(Error::DegenerateMeasurement(gamma));
    }
    let rest = complement_indices(cm.dim(), measured_mode);
    let k = rest.len();
    let mut matrix = DMatrix::zeros(k, k);
    for (a, &i) in rest.iter().enumerate() {
        for (b, &j) in rest.iter().enumerate() {
            matrix[(a, b)] = cm.matrix[(i, j)] - cm.matrix[(i, m)] * cm.matrix[(j, m)] / gamma;
        }
    }
    Ok(CovarianceMatrix {
        matrix: (&matrix + matrix.transpose()) * 0.5,
    })
}

/// Conditional state of the other modes after heterodyning `measured_mode`:
/// `Γ_rest - C (Γ_m + I)⁻¹ Cᵀ`.
pub fn condition_heterodyne(
    cm: &CovarianceMatrix,
    measured_mode: usize,
) -> Result<CovarianceMatrix> {
    cm.check_mode(measured_mode)?;
    if cm.n_modes() < 2 {
        return Err(Error::TooFewModes(cm.n_modes()));
    }
    let rest = complement_indices(cm.dim(), measured_mode);
    let m0 = 2 * measured_mode;
    let block = cm.matrix.view((m0, m0), (2, 2)) + DMatrix::<f64>::identity(2, 2);
    let det = block.determinant();
    if !(det.abs() > DEGENERATE_VARIANCE) {
        return Err(Error::SingularHeterodyne(det));
    }
    let inv = block.try_inverse().ok_or(Error::SingularHeterodyne(det))?;
    let k = rest.len();
    let g_rest = cm.matrix.select_rows(&rest).select_columns(&rest);
    let c = cm.matrix.select_rows(&rest).columns(m0, 2).into_owned();
    debug_assert_eq!(c.shape(), (k, 2));
    let matrix = g_rest - &c * inv * c.transpose();
    Ok(CovarianceMatrix {
        matrix: (&matrix + matrix.transpose()) * 0.5,
    })
}

/// Reduced state on `modes`, in the order given (also usable as a mode permutation).
pub fn partial_state(cm: &CovarianceMatrix, modes: &[usize]) -> Result<CovarianceMatrix> {
    if modes.is_empty() {
        return Err(Error::BadDimension { rows: 0, cols: 0 });
    }
    for (i, &m) in modes.iter().enumerate() {
        cm.check_mode(m)?;
        if modes[..i].contains(&m) {
            return Err(Error::DuplicateMode(m));
        }
    }
    let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    Ok(CovarianceMatrix {
        matrix: cm.matrix.select_rows(&idx).select_columns(&idx),
    })
}

/// Rotates every mode by 90° in phase space (`x → p`, `p → -x`).
pub fn rotate_quarter_turn(cm: &CovarianceMatrix) -> CovarianceMatrix {
    let rot = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let mut out = cm.clone();
    for mode in 0..cm.n_modes() {
        out = out.congruence(&[mode], &rot);
    }
    out
}
