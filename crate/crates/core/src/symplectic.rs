//! Structure-preserving eigensolver for Hermitian `H` with `H J - J H^T = 0`.
//!
//! Such matrices have the block form `[[A, B], [-conj(B), conj(A)]]` with
//! `A = A^dagger` and `B = -B^T`. Unitary similarities of the same block form
//! reduce `H` to `diag(T, T)` with `T` real symmetric tridiagonal, after which
//! a standard implicit QR iteration finishes the job. Every eigenvalue comes
//! out doubled and the eigenvector matrix keeps the block structure.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ensure_hermitian, ensure_square, frob, random_hermitian, CMat, ZERO};
use crate::spinflip::standard_j;

const EPS: f64 = f64::EPSILON;

#[derive(Clone, Debug)]
pub struct SkewSymmetricHamiltonian {
    ell: usize,
    a: CMat,
    b: CMat,
}

impl SkewSymmetricHamiltonian {
    /// From the blocks, checking `A = A^dagger` and `B = -B^T` within `tol`
    /// (relative to the block norms).
    pub fn new(a: CMat, b: CMat, tol: f64) -> Result<Self> {
        let ell = ensure_square(&a)?;
        if ensure_square(&b)? != ell {
            return Err(Error::DimensionMismatch {
                expected: ell,
                found: b.nrows(),
            });
        }
        ensure_hermitian(&a, tol)?;
        let anti = frob(&(&b + b.transpose()));
        if anti > tol * frob(&b).max(1.0) {
            return Err(Error::Structure(format!(
                "B block is not antisymmetric (deviation {anti:.3e})"
            )));
        }
        let a = (&a + a.adjoint()).unscale(2.0);
        let b = (&b - b.transpose()).unscale(2.0);
        Ok(Self { ell, a, b })
    }

    /// From a full `2l x 2l` matrix, projecting onto the exact block form.
    pub fn from_full(h: &CMat, tol: f64) -> Result<Self> {
        if !is_j_skew_symmetric(h, tol)? {
            let dev = j_skew_deviation(h);
            return Err(Error::Structure(format!(
                "matrix is not J-skew-symmetric (deviation {dev:.3e})"
            )));
        }
        let ell = h.nrows() / 2;
        let h11 = h.view((0, 0), (ell, ell));
        let h12 = h.view((0, ell), (ell, ell));
        let h21 = h.view((ell, 0), (ell, ell));
        let h22 = h.view((ell, ell), (ell, ell));
        let a = (h11 + h22.conjugate()).unscale(2.0);
        let b = (h12 - h21.conjugate()).unscale(2.0);
        Self::new(a, b, tol.max(1e-8))
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }

    pub fn b(&self) -> &CMat {
        &self.b
    }

    pub fn full(&self) -> CMat {
        let l = self.ell;
        let mut h = CMat::zeros(2 * l, 2 * l);
        h.view_mut((0, 0), (l, l)).copy_from(&self.a);
        h.view_mut((0, l), (l, l)).copy_from(&self.b);
        h.view_mut((l, 0), (l, l)).copy_from(&(-self.b.conjugate()));
        h.view_mut((l, l), (l, l)).copy_from(&self.a.conjugate());
        h
    }

    /// A random instance with Gaussian entries.
    pub fn random<R: Rng + ?Sized>(ell: usize, rng: &mut R) -> Self {
        let a = random_hermitian(ell, rng);
        let g = random_hermitian(ell, rng);
        let h = random_hermitian(ell, rng);
        // Complex Gaussian antisymmetric: entries of g + i h above the diagonal.
        let mut b = CMat::zeros(ell, ell);
        for r in 0..ell {
            for c in (r + 1)..ell {
                let z = Complex64::new(g[(r, c)].re, h[(r, c)].re);
                b[(r, c)] = z;
                b[(c, r)] = -z;
            }
        }
        Self { ell, a, b }
    }
}

fn j_skew_deviation(h: &CMat) -> f64 {
    let j = standard_j(h.nrows());
    frob(&(h * &j - &j * h.transpose()))
}

/// `||H J - J H^T|| <= tol * max(||H||, 1)` for Hermitian `H`.
pub fn is_j_skew_symmetric(h: &CMat, tol: f64) -> Result<bool> {
    let dim = ensure_hermitian(h, tol)?;
    if dim % 2 != 0 {
        return Err(Error::Precondition(format!(
            "J-skew symmetry needs an even dimension, got {dim}"
        )));
    }
    Ok(j_skew_deviation(h) <= tol * frob(h).max(1.0))
}

/// Distance of a `2l x 2l` matrix from the form `[[U, V], [-conj(V), conj(U)]]`.
pub fn block_structure_deviation(m: &CMat) -> f64 {
    let l = m.nrows() / 2;
    let u = m.view((0, 0), (l, l));
    let v = m.view((0, l), (l, l));
    let lower_left = m.view((l, 0), (l, l));
    let lower_right = m.view((l, l), (l, l));
    let d1 = (lower_left + v.conjugate()).norm();
    let d2 = (lower_right - u.conjugate()).norm();
    d1.hypot(d2)
}

/// `||W^T J W - J||`.
pub fn symplectic_deviation(w: &CMat) -> f64 {
    let j = standard_j(w.nrows());
    frob(&(w.transpose() * &j * w - j))
}

/// Real symmetric tridiagonal matrix stored by diagonals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Precondition(format!(
                "tridiagonal needs m >= 1 diagonal and m-1 off-diagonal entries, got {} and {}",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.len();
        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = self.diag[i];
        }
        for (i, &e) in self.off.iter().enumerate() {
            t[(i + 1, i)] = e;
            t[(i, i + 1)] = e;
        }
        t
    }
}

/// In-place row and column operations for the structured reduction.
struct Reducer {
    ell: usize,
    m: CMat,
    q: CMat,
}

impl Reducer {
    /// Applies `R` on rows `(p, q)` of `M` and `Q` and `R^dagger` on columns of `M`.
    fn rotate(&mut self, p: usize, q: usize, r: [[Complex64; 2]; 2]) {
        let dim = 2 * self.ell;
        for mat in [&mut self.m, &mut self.q] {
            for c in 0..dim {
                let (x, y) = (mat[(p, c)], mat[(q, c)]);
                mat[(p, c)] = r[0][0] * x + r[0][1] * y;
                mat[(q, c)] = r[1][0] * x + r[1][1] * y;
            }
        }
        for row in 0..dim {
            let (x, y) = (self.m[(row, p)], self.m[(row, q)]);
            self.m[(row, p)] = x * r[0][0].conj() + y * r[0][1].conj();
            self.m[(row, q)] = x * r[1][0].conj() + y * r[1][1].conj();
        }
    }

    /// Applies `I - 2 v v^T / v^T v` on indices `start..start+len` of both blocks.
    fn reflect(&mut self, start: usize, v: &[f64]) {
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            return;
        }
        let dim = 2 * self.ell;
        let scale = 2.0 / vv;
        for offset in [0, self.ell] {
            let base = start + offset;
            for mat in [&mut self.m, &mut self.q] {
                for c in 0..dim {
                    let dot: Complex64 = v
                        .iter()
                        .enumerate()
                        .map(|(i, &vi)| mat[(base + i, c)] * vi)
                        .sum();
                    let f = dot * scale;
                    for (i, &vi) in v.iter().enumerate() {
                        mat[(base + i, c)] -= f * vi;
                    }
                }
            }
            for row in 0..dim {
                let dot: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(i, &vi)| self.m[(row, base + i)] * vi)
                    .sum();
                let f = dot * scale;
                for (i, &vi) in v.iter().enumerate() {
                    self.m[(row, base + i)] -= f * vi;
                }
            }
        }
    }
}

/// Unitary `Q` of block form with `Q H Q^dagger = diag(T, T)`.
///
/// Column `k` of the upper-left block is processed in turn: 2x2 rotations on
/// row pairs `(j, l+j)` clear the `B` entries and make the `A` entries real,
/// then a real Householder reflection applied as `diag(P, P)` clears the
/// entries below the subdiagonal.
pub fn reduce_to_tridiagonal(h: &SkewSymmetricHamiltonian) -> Result<(CMat, Tridiagonal)> {
    let ell = h.ell();
    let full = h.full();
    let hnorm = frob(&full).max(f64::MIN_POSITIVE);
    let zero_tol = EPS * hnorm;
    let mut red = Reducer {
        ell,
        m: full,
        q: CMat::identity(2 * ell, 2 * ell),
    };

    for k in 0..ell.saturating_sub(1) {
        for j in (k + 1)..ell {
            let a = red.m[(j, k)];
            // Lower block entry is -conj(B_{j,k}).
            let b = -red.m[(ell + j, k)].conj();
            if b.norm() <= zero_tol && a.im.abs() <= zero_tol {
                continue;
            }
            let r = a.norm().hypot(b.norm());
            if r <= zero_tol {
                continue;
            }
            let rot = [[a.conj() / r, -b / r], [b.conj() / r, a / r]];
            red.rotate(j, ell + j, rot);
        }

        if k + 2 < ell {
            let x: Vec<f64> = ((k + 1)..ell).map(|j| red.m[(j, k)].re).collect();
            let tail: f64 = x[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
            if tail > zero_tol {
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let sign = if x[0] >= 0.0 { 1.0 } else { -1.0 };
                let mut v = x;
                v[0] += sign * norm;
                red.reflect(k + 1, &v);
            }
        }

        debug_assert!(
            block_structure_deviation(&red.m) <= 1e-10 * hnorm,
            "structure lost at sweep {k}"
        );
    }

    let diag: Vec<f64> = (0..ell).map(|i| red.m[(i, i)].re).collect();
    let off: Vec<f64> = (1..ell).map(|i| red.m[(i, i - 1)].re).collect();
    let t = Tridiagonal::new(diag, off)?;

    let mut target = CMat::zeros(2 * ell, 2 * ell);
    let td = t.to_dense().map(|x| Complex64::new(x, 0.0));
    target.view_mut((0, 0), (ell, ell)).copy_from(&td);
    target.view_mut((ell, ell), (ell, ell)).copy_from(&td);
    let residual = frob(&(&red.m - target));
    let tol = 1e-10 * hnorm.max(1.0);
    if residual > tol {
        return Err(Error::Tolerance {
            what: "tridiagonal reduction",
            residual,
            tol,
        });
    }
    Ok((red.q, t))
}

/// `(c, s)` with `[c s; -s c]^T [a; b] = [r; 0]`.
fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else if b.abs() > a.abs() {
        let tau = -a / b;
        let s = 1.0 / (1.0 + tau * tau).sqrt();
        (s * tau, s)
    } else {
        let tau = -b / a;
        let c = 1.0 / (1.0 + tau * tau).sqrt();
        (c, c * tau)
    }
}

/// Eigenvalues (ascending) and orthogonal eigenvectors of a symmetric
/// tridiagonal matrix by implicit QR with Wilkinson shifts.
///
/// The iteration budget is `max_iter` implicit steps in total; `None` means
/// `30 m`.
pub fn tridiagonal_qr(t: &Tridiagonal, max_iter: Option<usize>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let m = t.len();
    let budget = max_iter.unwrap_or(30 * m.max(1));
    let mut d = t.diag.clone();
    let mut e = t.off.clone();
    let mut z = DMatrix::<f64>::identity(m, m);
    let tnorm = d
        .iter()
        .chain(e.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    let floor = EPS * EPS * tnorm;

    let mut iterations = 0;
    let mut hi = m.saturating_sub(1);
    while hi > 0 {
        for i in 0..hi {
            if e[i].abs() <= EPS * (d[i].abs() + d[i + 1].abs()) || e[i].abs() <= floor {
                e[i] = 0.0;
            }
        }
        if e[hi - 1] == 0.0 {
            hi -= 1;
            continue;
        }
        let mut lo = hi - 1;
        while lo > 0 && e[lo - 1] != 0.0 {
            lo -= 1;
        }
        if iterations >= budget {
            return Err(Error::NoConvergence {
                what: "tridiagonal QR",
                iterations,
            });
        }
        iterations += 1;
        implicit_step(&mut d, &mut e, &mut z, lo, hi);
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| d[i]).collect();
    let x = DMatrix::from_fn(m, m, |r, c| z[(r, order[c])]);
    Ok((values, x))
}

/// One implicit symmetric QR step with Wilkinson shift on the unreduced block
/// `lo..=hi`, chasing the bulge down the band.
fn implicit_step(d: &mut [f64], e: &mut [f64], z: &mut DMatrix<f64>, lo: usize, hi: usize) {
    let delta = (d[hi - 1] - d[hi]) / 2.0;
    let ehi = e[hi - 1];
    let sign = if delta >= 0.0 { 1.0 } else { -1.0 };
    let mu = d[hi] - ehi * ehi / (delta + sign * delta.hypot(ehi));

    let mut x = d[lo] - mu;
    let mut y = e[lo];
    let mut bulge = 0.0;
    for k in lo..hi {
        let (c, s) = givens(x, y);
        // Rotate rows/columns k and k+1 of the band.
        if k > lo {
            e[k - 1] = c * e[k - 1] - s * bulge;
        }
        let (dk, dk1, ek) = (d[k], d[k + 1], e[k]);
        d[k] = c * c * dk - 2.0 * c * s * ek + s * s * dk1;
        d[k + 1] = s * s * dk + 2.0 * c * s * ek + c * c * dk1;
        e[k] = c * s * (dk - dk1) + (c * c - s * s) * ek;
        if k + 1 < hi {
            bulge = -s * e[k + 1];
            e[k + 1] *= c;
            x = e[k];
            y = bulge;
        }
        for r in 0..z.nrows() {
            let (zk, zk1) = (z[(r, k)], z[(r, k + 1)]);
            z[(r, k)] = c * zk - s * zk1;
            z[(r, k + 1)] = s * zk + c * zk1;
        }
    }
}

#[derive(Clone, Debug)]
pub struct SymplecticEigResult {
    /// Columns `k` and `l+k` are eigenvectors for `eigenvalues[k]`.
    pub w: CMat,
    /// The `l` distinct-slot eigenvalues, ascending; each has multiplicity two.
    pub eigenvalues: Vec<f64>,
    /// `||H W - W diag(lambda, lambda)||`.
    pub residual: f64,
    /// Index groups of eigenvalues within the clustering tolerance.
    pub clusters: Vec<Vec<usize>>,
}

impl SymplecticEigResult {
    /// The full doubled spectrum `(lambda, lambda)` in slot order.
    pub fn doubled(&self) -> Vec<f64> {
        let mut v = self.eigenvalues.clone();
        v.extend_from_slice(&self.eigenvalues);
        v
    }
}

/// Groups consecutive sorted values closer than `tol * max(1, spread)`.
pub fn cluster_sorted(values: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let spread = match (values.first(), values.last()) {
        (Some(a), Some(b)) => (b - a).abs(),
        _ => 0.0,
    };
    let gap = tol * spread.max(1.0);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (v - values[*g.last().unwrap()]).abs() <= gap => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// Modified Gram-Schmidt on selected columns of a real matrix.
fn reorthonormalize(x: &mut DMatrix<f64>, cols: &[usize]) {
    for (a, &ca) in cols.iter().enumerate() {
        for &cb in &cols[..a] {
            let dot = x.column(ca).dot(&x.column(cb));
            let prev = x.column(cb).clone_owned();
            x.column_mut(ca).axpy(-dot, &prev, 1.0);
        }
        let norm = x.column(ca).norm();
        if norm > 0.0 {
            x.column_mut(ca).unscale_mut(norm);
        }
    }
}

/// Full structured eigendecomposition `H W = W diag(lambda, lambda)`.
pub fn symplectic_eig(h: &SkewSymmetricHamiltonian, tol_cluster: f64) -> Result<SymplecticEigResult> {
    let ell = h.ell();
    let (q, t) = reduce_to_tridiagonal(h)?;
    let (values, mut x) = tridiagonal_qr(&t, None)?;
    let clusters = cluster_sorted(&values, tol_cluster);
    for group in clusters.iter().filter(|g| g.len() > 1) {
        reorthonormalize(&mut x, group);
    }

    let xc = x.map(|v| Complex64::new(v, 0.0));
    let mut dx = CMat::from_element(2 * ell, 2 * ell, ZERO);
    dx.view_mut((0, 0), (ell, ell)).copy_from(&xc);
    dx.view_mut((ell, ell), (ell, ell)).copy_from(&xc);
    let w = q.adjoint() * dx;

    let full = h.full();
    let lam: Vec<Complex64> = values
        .iter()
        .chain(values.iter())
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    let mut wl = w.clone();
    for (c, l) in lam.iter().enumerate() {
        wl.column_mut(c).scale_mut(l.re);
    }
    let residual = frob(&(&full * &w - wl));
    Ok(SymplecticEigResult {
        w,
        eigenvalues: values,
        residual,
        clusters,
    })
}
