//! Dense complex linear algebra shared by every other module.
//!
//! Matrices are plain `nalgebra` dynamic matrices of `Complex64`. Qubit-indexed
//! matrices have dimension `2^n` with qubit 1 as the most significant bit of
//! the basis index, so `|j_1 j_2 ... j_n>` is the Kronecker product in reading
//! order.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const DEFAULT_MAX_QUBITS: usize = 12;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Numerical thresholds used across the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub herm: f64,
    pub unitary: f64,
    /// Eigenvalue degeneracy grouping.
    pub cluster: f64,
    /// Width of the boundary band in convex hull membership tests.
    pub hull: f64,
    pub max_qubits: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            unitary: 1e-10,
            cluster: 1e-8,
            hull: 1e-9,
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

/// Returns `n` when `dim == 2^n`.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotQubitDimension(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

pub fn ensure_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Kronecker product, refusing results beyond `DEFAULT_MAX_QUBITS` qubits.
pub fn kron(a: &CMat, b: &CMat) -> Result<CMat> {
    kron_capped(a, b, DEFAULT_MAX_QUBITS)
}

pub fn kron_capped(a: &CMat, b: &CMat, max_qubits: usize) -> Result<CMat> {
    let limit = 1usize << max_qubits;
    let rows = a.nrows().checked_mul(b.nrows());
    let cols = a.ncols().checked_mul(b.ncols());
    match (rows, cols) {
        (Some(r), Some(c)) if r <= limit && c <= limit => Ok(a.kronecker(b)),
        (r, c) => {
            let dim = r.unwrap_or(usize::MAX).max(c.unwrap_or(usize::MAX));
            let qubits = if dim == usize::MAX {
                usize::BITS as usize
            } else {
                dim.next_power_of_two().trailing_zeros() as usize
            };
            Err(Error::TooManyQubits {
                qubits,
                max: max_qubits,
            })
        }
    }
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn diag(entries: &[Complex64]) -> CMat {
    CMat::from_diagonal(&CVec::from_column_slice(entries))
}

pub fn real_to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn frob(m: &CMat) -> f64 {
    m.norm()
}

pub fn hermitian_deviation(m: &CMat) -> f64 {
    frob(&(m - m.adjoint()))
}

pub fn unitary_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    frob(&(m.adjoint() * m - identity(n)))
}

pub fn ensure_unitary(m: &CMat, tol: f64) -> Result<usize> {
    let n = ensure_square(m)?;
    let dev = unitary_deviation(m);
    if dev.is_nan() || dev > tol {
        return Err(Error::NotUnitary(dev));
    }
    Ok(n)
}

pub fn ensure_hermitian(m: &CMat, tol: f64) -> Result<usize> {
    let n = ensure_square(m)?;
    let dev = hermitian_deviation(m);
    if dev.is_nan() || dev > tol * frob(m).max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(n)
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn determinant(m: &CMat) -> Complex64 {
    m.clone().determinant()
}

/// Splits `u = phase * v` with `det v = 1`, taking the `N`-th root of the
/// determinant whose argument lies in `(-pi/N, pi/N]`.
pub fn normalize_to_special(u: &CMat) -> (CMat, Complex64) {
    let dim = u.nrows() as f64;
    let arg = determinant(u).arg();
    let phase = Complex64::from_polar(1.0, arg / dim);
    (u.map(|z| z / phase), phase)
}

/// One-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> CMat {
        let (a, b, c, d) = match self {
            Pauli::I => (ONE, ZERO, ZERO, ONE),
            Pauli::X => (ZERO, ONE, ONE, ZERO),
            Pauli::Y => (ZERO, -I, I, ZERO),
            Pauli::Z => (ONE, ZERO, ZERO, -ONE),
        };
        CMat::from_row_slice(2, 2, &[a, b, c, d])
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => '0',
            Pauli::X => 'x',
            Pauli::Y => 'y',
            Pauli::Z => 'z',
        }
    }
}

impl TryFrom<char> for Pauli {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c {
            '0' | 'i' | 'I' => Ok(Pauli::I),
            'x' | 'X' => Ok(Pauli::X),
            'y' | 'Y' => Ok(Pauli::Y),
            'z' | 'Z' => Ok(Pauli::Z),
            other => Err(Error::InvalidPauli(other)),
        }
    }
}

/// Multi-index `J` over `{0, x, y, z}^n`; letter `k` acts on qubit `k + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self(letters)
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// All `4^n` strings in lexicographic order `0 < x < y < z`.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        (0..4usize.pow(n as u32)).map(move |mut code| {
            let mut letters = vec![Pauli::I; n];
            for slot in letters.iter_mut().rev() {
                *slot = Pauli::ALL[code % 4];
                code /= 4;
            }
            PauliString(letters)
        })
    }

    /// Single-letter string `p` on qubit `site` (0-based) of `n`.
    pub fn single(n: usize, site: usize, p: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n];
        letters[site] = p;
        Self(letters)
    }

    /// Two-letter string with `p` on both `a` and `b` (0-based, distinct).
    pub fn pair(n: usize, a: usize, b: usize, p: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n];
        letters[a] = p;
        letters[b] = p;
        Self(letters)
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(Pauli::try_from)
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|p| write!(f, "{}", p.letter()))
    }
}

/// Dense matrix of the tensor `sigma^{j_1} (x) ... (x) sigma^{j_n}`.
///
/// Built entrywise: the only nonzero in column `c` sits at row `c ^ xmask`,
/// where `xmask` marks the `x`/`y` letters.
pub fn pauli_matrix(j: &PauliString) -> CMat {
    let n = j.len();
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    let mut xmask = 0usize;
    for (k, p) in j.letters().iter().enumerate() {
        if matches!(p, Pauli::X | Pauli::Y) {
            xmask |= 1 << (n - 1 - k);
        }
    }
    for col in 0..dim {
        let row = col ^ xmask;
        let mut val = ONE;
        for (k, p) in j.letters().iter().enumerate() {
            let bit = (col >> (n - 1 - k)) & 1;
            val *= match (p, bit) {
                (Pauli::I, _) | (Pauli::X, _) => ONE,
                (Pauli::Y, 0) => I,
                (Pauli::Y, _) => -I,
                (Pauli::Z, 0) => ONE,
                (Pauli::Z, _) => -ONE,
            };
        }
        m[(row, col)] = val;
    }
    m
}

/// Real-coefficient expansion `sum_J c_J sigma^J`.
pub fn pauli_sum(n: usize, terms: &[(PauliString, f64)]) -> CMat {
    let dim = 1usize << n;
    terms.iter().fold(CMat::zeros(dim, dim), |acc, (j, c)| {
        acc + pauli_matrix(j).scale(*c)
    })
}

/// Coefficients of `m` in the Pauli basis, `c_J = tr(sigma^J m) / N`.
pub fn pauli_coefficients(m: &CMat) -> Result<Vec<(PauliString, Complex64)>> {
    let n = qubits_for_dim(ensure_square(m)?)?;
    let dim = (1usize << n) as f64;
    Ok(PauliString::all(n)
        .map(|j| {
            let c = trace(&(pauli_matrix(&j) * m)) / dim;
            (j, c)
        })
        .collect())
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermitianEig {
    pub fn residual(&self, h: &CMat) -> f64 {
        let lam = diag(
            &self
                .values
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect::<Vec<_>>(),
        );
        frob(&(h * &self.vectors - &self.vectors * lam))
    }
}

pub fn eig_hermitian(h: &CMat, tol_herm: f64) -> Result<HermitianEig> {
    let n = ensure_hermitian(h, tol_herm)?;
    let sym = (h + h.adjoint()).unscale(2.0);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0).ok_or(Error::NoConvergence {
        what: "Hermitian eigensolver",
        iterations: 0,
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEig { values, vectors })
}

/// `exp(i t H)` for Hermitian `H`.
pub fn exp_i_hermitian(h: &CMat, t: f64, tol_herm: f64) -> Result<CMat> {
    let eig = eig_hermitian(h, tol_herm)?;
    let phases: Vec<Complex64> = eig
        .values
        .iter()
        .map(|&x| Complex64::from_polar(1.0, x * t))
        .collect();
    Ok(&eig.vectors * diag(&phases) * eig.vectors.adjoint())
}

/// `exp(X)` for skew-Hermitian `X`.
pub fn exp_skew_hermitian(x: &CMat, tol_herm: f64) -> Result<CMat> {
    let h = x.map(|z| z * -I);
    exp_i_hermitian(&h, 1.0, tol_herm)
}

/// Eigenphases and (unitary) eigenvectors of a unitary matrix.
///
/// `u` is normal, so its Hermitian and anti-Hermitian parts commute and a
/// generic real combination of them shares its eigenvectors. The third value
/// is the off-diagonal mass of `Q^dagger u Q`. Complex Schur is only a
/// fallback: its shifts stall on nearly scalar input.
pub fn unitary_eig(u: &CMat) -> (Vec<Complex64>, CMat, f64) {
    let n = u.nrows();
    let herm = (u + u.adjoint()).unscale(2.0);
    let anti = (u - u.adjoint()).map(|z| z * Complex64::new(0.0, -0.5));
    let mut best: Option<(Vec<Complex64>, CMat, f64)> = None;
    for gamma in [0.577_215_664_901_532_9, -1.324_717_957_244_746, 2.618_033_988_749_895] {
        let c = &herm + anti.scale(gamma);
        let c = (&c + c.adjoint()).unscale(2.0);
        let q = nalgebra::SymmetricEigen::new(c).eigenvectors;
        let d = q.adjoint() * u * &q;
        let values: Vec<Complex64> = (0..n).map(|k| d[(k, k)]).collect();
        let off = offdiag_norm(&d);
        let done = off <= 1e-10 * (n as f64).sqrt().max(1.0);
        if best.as_ref().is_none_or(|b| off < b.2) {
            best = Some((values, q, off));
        }
        if done {
            return best.unwrap();
        }
    }
    let (q, t) = Schur::new(u.clone()).unpack();
    let values: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();
    let off = offdiag_norm(&t);
    match best {
        Some(b) if b.2 <= off => b,
        _ => (values, q, off),
    }
}

fn offdiag_norm(m: &CMat) -> f64 {
    let mut off = 0.0;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if r != c {
                off += m[(r, c)].norm_sqr();
            }
        }
    }
    off.sqrt()
}

/// Principal branch argument in `(-pi, pi]`, with phases within `tol_cluster`
/// of `+-pi` snapped to `+pi`.
pub fn principal_phase(z: Complex64, tol_cluster: f64) -> f64 {
    let phi = z.arg();
    if PI - phi.abs() <= tol_cluster {
        PI
    } else {
        phi
    }
}

/// Skew-Hermitian logarithm of a unitary matrix on the principal branch.
pub fn log_unitary(u: &CMat, tol: &Tolerances) -> Result<CMat> {
    ensure_unitary(u, tol.unitary * (u.nrows() as f64).sqrt().max(1.0))?;
    let (values, q, _) = unitary_eig(u);
    let logs: Vec<Complex64> = values
        .iter()
        .map(|&z| Complex64::new(0.0, principal_phase(z, tol.cluster)))
        .collect();
    let x = &q * diag(&logs) * q.adjoint();
    Ok((&x - x.adjoint()).unscale(2.0))
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed unitary from the QR factorization of a complex Gaussian
/// matrix with the phases of `diag(R)` pushed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    let z = CMat::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let rk = r[(k, k)];
        let phase = if rk.norm() > 0.0 { rk / rk.norm() } else { ONE };
        for row in 0..dim {
            q[(row, k)] *= phase;
        }
    }
    q
}

pub fn haar_special_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    normalize_to_special(&haar_unitary(dim, rng)).0
}

/// Deterministic Haar sample from `SU(dim)` for a given seed.
pub fn random_special_unitary(dim: usize, seed: u64) -> Result<CMat> {
    if dim < 2 {
        return Err(Error::Precondition(format!(
            "special unitary sampling needs dimension >= 2, got {dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(haar_special_unitary(dim, &mut rng))
}

/// Independent RNG stream for task `index` of a run seeded with `seed`.
pub fn task_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Random Hermitian matrix with i.i.d. Gaussian entries (GUE-like).
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    let z = CMat::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    (&z + z.adjoint()).unscale(2.0)
}

/// Random unit state vector.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVec {
    let v = CVec::from_fn(dim, |_, _| gaussian_complex(rng));
    let norm = v.norm();
    v.unscale(norm)
}
