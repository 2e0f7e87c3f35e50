//! The n-qubit spin-flip, the concurrence monotone and bilinear form, the
//! GHZ-like change-of-basis matrices, and the Cartan involution it induces on
//! `su(N)`.
//!
//! The spin-flip is antilinear: it is stored as the real orthogonal matrix
//! `S = (-i sigma^y)^{(x) n}` and applied as `psi -> S conj(psi)`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    ensure_hermitian, ensure_square, ensure_unitary, frob, identity, qubits_for_dim, trace,
    CMat, CVec, PauliString, I, ONE, ZERO,
};

/// `(-1)^{popcount(j)}`.
fn parity_sign(j: usize) -> f64 {
    if j.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `S = (-i sigma^y)^{(x) n}`, with `S|j> = (-1)^{popcount(j)} |N-1-j>`.
pub fn spin_flip_matrix(n: usize) -> CMat {
    let dim = 1usize << n;
    let mut s = CMat::zeros(dim, dim);
    for j in 0..dim {
        s[(dim - 1 - j, j)] = Complex64::new(parity_sign(j), 0.0);
    }
    s
}

/// `J_N = (-i sigma^y) (x) I_{N/2}` for an even dimension `N`.
pub fn standard_j(dim: usize) -> CMat {
    let half = dim / 2;
    let mut j = CMat::zeros(dim, dim);
    for k in 0..half {
        j[(half + k, k)] = ONE;
        j[(k, half + k)] = -ONE;
    }
    j
}

/// The antiunitary spin-flip on `n` qubits.
#[derive(Clone, Debug)]
pub struct SpinFlip {
    n: usize,
    matrix: CMat,
}

impl SpinFlip {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            matrix: spin_flip_matrix(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The linear part `(-i sigma^y)^{(x) n}`.
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn apply(&self, psi: &CVec) -> Result<CVec> {
        check_len(psi, 1 << self.n)?;
        Ok(&self.matrix * psi.conjugate())
    }
}

fn check_len(psi: &CVec, dim: usize) -> Result<()> {
    if psi.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: psi.len(),
        });
    }
    Ok(())
}

fn state_qubits(psi: &CVec) -> Result<usize> {
    qubits_for_dim(psi.len())
}

/// `psi -> (-i sigma^y)^{(x) n} conj(psi)`.
pub fn spin_flip(psi: &CVec) -> Result<CVec> {
    let n = state_qubits(psi)?;
    SpinFlip::new(n).apply(psi)
}

/// `phi^T S psi`, the complex bilinear lift `conj(<phi| flip |psi>)`.
fn form_unchecked(phi: &CVec, psi: &CVec) -> Complex64 {
    let dim = phi.len();
    (0..dim)
        .map(|j| phi[dim - 1 - j] * psi[j] * parity_sign(j))
        .sum()
}

pub fn concurrence_form(phi: &CVec, psi: &CVec) -> Result<Complex64> {
    state_qubits(psi)?;
    check_len(phi, psi.len())?;
    Ok(form_unchecked(phi, psi))
}

/// `|<psi| flip |psi>| / <psi|psi>`.
pub fn concurrence(psi: &CVec) -> Result<f64> {
    state_qubits(psi)?;
    let norm2 = psi.norm_squared();
    if norm2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(form_unchecked(psi, psi).norm() / norm2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    MagicE0,
    GhzF0,
    StandardJ,
}

#[derive(Clone, Debug)]
pub struct BasisMatrix {
    pub kind: BasisKind,
    pub n: usize,
    pub matrix: CMat,
    /// Signs `iota_j` used in the `F_0` columns.
    pub iota: Option<Vec<i8>>,
}

/// Builds `E_0` (even `n`), `F_0` (odd `n`) or `J_N`.
///
/// `E_0` has columns `(|j> + s_j|N-1-j>)/sqrt2` and `i(|j> - s_j|N-1-j>)/sqrt2`
/// for `j < N/2`, where `S|j> = s_j|N-1-j>`. These are the `+1` and `-1`
/// eigenvectors of the symmetric `S`, the second set multiplied by `i`, so
/// `E_0 E_0^T = S`. At `n = 2` this is the magic basis.
///
/// `F_0` has columns `(|j> + |N-1-j>)/sqrt2` and `iota_j(|j> - |N-1-j>)/sqrt2`
/// with `iota_j = <j|S|N-1-j>`, giving `F_0 J_N F_0^T = S`.
pub fn build_basis(kind: BasisKind, n: usize) -> Result<BasisMatrix> {
    if n == 0 {
        return Err(Error::Precondition("basis needs n >= 1".into()));
    }
    let dim = 1usize << n;
    let half = dim / 2;
    let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
    match kind {
        BasisKind::MagicE0 => {
            if !n.is_multiple_of(2) {
                return Err(Error::Parity {
                    what: "magic basis E0",
                    expected: "an even",
                    n,
                });
            }
            let mut m = CMat::zeros(dim, dim);
            for j in 0..half {
                let mirror = dim - 1 - j;
                let s = parity_sign(j);
                m[(j, j)] = r;
                m[(mirror, j)] = r * s;
                m[(j, half + j)] = I * r;
                m[(mirror, half + j)] = -I * r * s;
            }
            Ok(BasisMatrix {
                kind,
                n,
                matrix: m,
                iota: None,
            })
        }
        BasisKind::GhzF0 => {
            if n.is_multiple_of(2) {
                return Err(Error::Parity {
                    what: "GHZ-like basis F0",
                    expected: "an odd",
                    n,
                });
            }
            let mut m = CMat::zeros(dim, dim);
            let mut iota = Vec::with_capacity(half);
            for j in 0..half {
                let mirror = dim - 1 - j;
                let sign = parity_sign(mirror);
                iota.push(sign as i8);
                m[(j, j)] = r;
                m[(mirror, j)] = r;
                m[(j, half + j)] = r * sign;
                m[(mirror, half + j)] = -r * sign;
            }
            Ok(BasisMatrix {
                kind,
                n,
                matrix: m,
                iota: Some(iota),
            })
        }
        BasisKind::StandardJ => Ok(BasisMatrix {
            kind,
            n,
            matrix: standard_j(dim),
            iota: None,
        }),
    }
}

/// `theta(X) = S^dagger conj(X) S` without input validation.
pub fn theta(x: &CMat) -> CMat {
    let dim = x.nrows();
    // S is a signed anti-diagonal permutation, so conjugation is a reindexing:
    // (S^T conj(X) S)_{ab} = s_a s_b conj(X)_{N-1-a, N-1-b}.
    CMat::from_fn(dim, dim, |a, b| {
        x[(dim - 1 - a, dim - 1 - b)].conj() * (parity_sign(a) * parity_sign(b))
    })
}

/// Checks `X` is skew-Hermitian and traceless within `tol`.
pub fn ensure_su(x: &CMat, tol: f64) -> Result<usize> {
    let dim = ensure_square(x)?;
    qubits_for_dim(dim)?;
    let skew = frob(&(x + x.adjoint()));
    let tr = trace(x).norm();
    let dev = skew.max(tr);
    if dev.is_nan() || dev > tol * frob(x).max(1.0) {
        return Err(Error::NotInLieAlgebra(dev));
    }
    Ok(dim)
}

/// The Cartan involution `theta(X) = [S]^dagger conj(X) S` on `su(N)`.
pub fn cartan_involution(x: &CMat, tol: f64) -> Result<CMat> {
    ensure_su(x, tol)?;
    Ok(theta(x))
}

/// `X = Xp + Xk` with `theta(Xp) = -Xp` and `theta(Xk) = Xk`.
pub fn pk_split(x: &CMat, tol: f64) -> Result<(CMat, CMat)> {
    ensure_su(x, tol)?;
    let t = theta(x);
    Ok(((x - &t).unscale(2.0), (x + &t).unscale(2.0)))
}

/// Cartan class of a Pauli generator `i sigma^J`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PauliClass {
    /// Even weight: `theta = -1`, time symmetric.
    PSymmetric,
    /// Odd weight: `theta = +1`, time antisymmetric.
    KAntisymmetric,
}

pub fn pauli_class(j: &PauliString) -> Result<PauliClass> {
    if j.is_identity() {
        return Err(Error::IdentityPauli);
    }
    Ok(if j.weight().is_multiple_of(2) {
        PauliClass::PSymmetric
    } else {
        PauliClass::KAntisymmetric
    })
}

/// Part of a Hermitian `H` with `i H` in `p`: `(H + S^T conj(H) S) / 2`.
pub fn time_symmetric_part(h: &CMat) -> CMat {
    // theta(iH) = -i S^T conj(H) S, so iH in p iff S^T conj(H) S = H.
    let flipped = theta(h);
    (h + flipped).unscale(2.0)
}

/// Part of a Hermitian `H` with `i H` in `k`.
pub fn time_antisymmetric_part(h: &CMat) -> CMat {
    let flipped = theta(h);
    (h - flipped).unscale(2.0)
}

fn time_check(h: &CMat, tol: f64) -> Result<(f64, f64, f64)> {
    ensure_hermitian(h, tol)?;
    qubits_for_dim(h.nrows())?;
    let scale = frob(h).max(1.0);
    let tr = trace(h).norm();
    if tr > tol * scale {
        return Err(Error::Precondition(format!(
            "Hamiltonian must be traceless (|tr H| = {tr:.3e})"
        )));
    }
    let ih = h.map(|z| z * I);
    let t = theta(&ih);
    Ok((frob(&(&t + &ih)), frob(&(&t - &ih)), scale))
}

/// `H = flip H flip^{-1}`, equivalently `i H` in `p`.
///
/// The zero Hamiltonian is both symmetric and antisymmetric.
pub fn is_time_symmetric(h: &CMat, tol: f64) -> Result<bool> {
    let (sym, _, scale) = time_check(h, tol)?;
    Ok(sym <= tol * scale)
}

/// `H = -flip H flip^{-1}`, equivalently `i H` in `k`.
pub fn is_time_antisymmetric(h: &CMat, tol: f64) -> Result<bool> {
    let (_, anti, scale) = time_check(h, tol)?;
    Ok(anti <= tol * scale)
}

/// Deviation `||k^T S k - S||` from the concurrence-form symmetry group.
pub fn concurrence_symmetry_residual(k: &CMat) -> f64 {
    let n = k.nrows().trailing_zeros() as usize;
    let s = spin_flip_matrix(n);
    frob(&(k.transpose() * &s * k - s))
}

/// `k^T S k = S`, the matrix form of preserving the concurrence form.
pub fn is_concurrence_symmetry(k: &CMat, tol: f64) -> Result<bool> {
    let dim = ensure_unitary(k, tol.max(1e-10) * (k.nrows() as f64).sqrt())?;
    qubits_for_dim(dim)?;
    Ok(concurrence_symmetry_residual(k) <= tol)
}

/// Product state `psi_1 (x) ... (x) psi_n`.
pub fn product_state(factors: &[CVec]) -> CVec {
    factors.iter().fold(CVec::from_element(1, ONE), |acc, f| acc.kronecker(f))
}

/// `sum_k c_k |k>` from `(index, amplitude)` pairs, normalized.
pub fn basis_superposition(n: usize, terms: &[(usize, Complex64)]) -> CVec {
    let mut v = CVec::from_element(1 << n, ZERO);
    for &(k, c) in terms {
        v[k] += c;
    }
    let norm = v.norm();
    v.unscale(norm)
}

pub fn ghz_state(n: usize) -> CVec {
    basis_superposition(n, &[(0, ONE), ((1 << n) - 1, ONE)])
}

/// `|W_n>`: equal superposition of the weight-one basis states.
pub fn w_state(n: usize) -> CVec {
    let terms: Vec<_> = (0..n).map(|k| (1usize << k, ONE)).collect();
    basis_superposition(n, &terms)
}

pub fn identity_like(x: &CMat) -> CMat {
    identity(x.nrows())
}
