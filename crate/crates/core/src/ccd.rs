//! Concurrence canonical decomposition `v = k1 a k2`.
//!
//! For odd `n` the work happens in the GHZ-like basis, where `K` becomes the
//! symplectic group and the problem is the type AII `Sp D Sp` decomposition.
//! For even `n` the magic basis turns `K` into `SO(N)` and the type AI
//! analogue needs only a real orthogonal diagonalization of `m m^T`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    determinant, diag, ensure_unitary, frob, identity, log_unitary, normalize_to_special,
    principal_phase, qubits_for_dim, unitary_eig, CMat, CVec, Tolerances, I, ONE,
};
use crate::spinflip::{
    build_basis, concurrence_symmetry_residual, standard_j, theta, BasisKind,
};
use crate::symplectic::{symplectic_eig, symplectic_deviation, SkewSymmetricHamiltonian};

/// Re-phasing applied to `v` when the principal log of `p^2` loses structure.
pub const REPHASE_EPSILON: f64 = 1e-6;

/// Largest structure correction accepted after projecting `log(p^2)`.
pub const LOG_PROJECTION_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Self {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// `v = omega1 d omega2` with `omega_i` in `Sp(N/2)` and `d` repeat diagonal.
#[derive(Clone, Debug)]
pub struct AiiFactors {
    pub omega1: CMat,
    pub d: CMat,
    pub omega2: CMat,
    /// `d = diag(e^{i phi}, e^{i phi})`, one phase per slot pair.
    pub phases: Vec<f64>,
    /// Re-phasing angle used to dodge the log branch cut (0 when not needed).
    pub rephase: f64,
    /// `max ||omega^T J omega - J||` over both side factors.
    pub sp_residual: f64,
    pub residual: f64,
}

fn theta_aii(y: &CMat) -> CMat {
    let j = standard_j(y.nrows());
    &j * y.conjugate() * j.transpose()
}

fn sp_tolerance(dim: usize) -> f64 {
    1e-10 * dim as f64
}

/// Type AII `KAK` decomposition of `v` in `SU(N)`, `N` even.
pub fn kak_aii(v: &CMat, tol: &Tolerances) -> Result<AiiFactors> {
    let dim = ensure_unitary(v, tol.unitary * (v.nrows() as f64).sqrt())?;
    if dim % 2 != 0 {
        return Err(Error::Precondition(format!(
            "type AII decomposition needs an even dimension, got {dim}"
        )));
    }
    let det = determinant(v);
    if (det - ONE).norm() > 1e-8 {
        return Err(Error::Precondition(format!(
            "input must lie in SU(N) (|det - 1| = {:.3e})",
            (det - ONE).norm()
        )));
    }
    match kak_aii_attempt(v, 0.0, tol) {
        Ok(f) => Ok(f),
        Err(Error::Structure(_)) | Err(Error::Tolerance { .. }) => {
            kak_aii_attempt(v, REPHASE_EPSILON, tol)
        }
        Err(e) => Err(e),
    }
}

fn kak_aii_attempt(v: &CMat, eps: f64, tol: &Tolerances) -> Result<AiiFactors> {
    let dim = v.nrows();
    let ell = dim / 2;
    let j = standard_j(dim);
    let shift = Complex64::from_polar(1.0, eps);
    let w = v.map(|z| z * shift);

    let p2 = -(&w * &j * w.transpose() * &j);
    let x = log_unitary(&p2, tol)?;
    let projected = (&x - theta_aii(&x)).unscale(2.0);
    let correction = frob(&(&projected - &x));
    if correction > LOG_PROJECTION_TOL {
        return Err(Error::Structure(format!(
            "log(p^2) is not J-skew-symmetric (correction {correction:.3e})"
        )));
    }
    // X = 2iH.
    let h = projected.map(|z| z / (2.0 * I));
    let h = SkewSymmetricHamiltonian::from_full(&h, 1e-8)?;
    let eig = symplectic_eig(&h, tol.cluster)?;
    let omega1 = eig.w;

    // Undo the re-phasing inside d so that omega1 d omega2 = v.
    let phases: Vec<f64> = eig.eigenvalues.iter().map(|&l| l - eps).collect();
    let entries: Vec<Complex64> = phases
        .iter()
        .chain(phases.iter())
        .map(|&phi| Complex64::from_polar(1.0, phi))
        .collect();
    let d = diag(&entries);
    let d_adj: Vec<Complex64> = entries.iter().map(|z| z.conj()).collect();
    let omega2 = diag(&d_adj) * omega1.adjoint() * v;

    let sp_residual = symplectic_deviation(&omega1).max(symplectic_deviation(&omega2));
    let sp_tol = sp_tolerance(dim);
    if sp_residual > sp_tol {
        return Err(Error::Tolerance {
            what: "symplectic side factor",
            residual: sp_residual,
            tol: sp_tol,
        });
    }
    let residual = frob(&(&omega1 * &d * &omega2 - v));
    debug_assert_eq!(phases.len(), ell);
    Ok(AiiFactors {
        omega1,
        d,
        omega2,
        phases,
        rephase: eps,
        sp_residual,
        residual,
    })
}

#[derive(Clone, Debug)]
pub struct CcdFactors {
    pub n: usize,
    pub parity: Parity,
    /// `v = phase * k1 * a * k2`; `phase^N = det v`.
    pub phase: Complex64,
    pub k1: CMat,
    pub a: CMat,
    pub k2: CMat,
    /// Inner factors in the similarity basis: `(omega1, d, omega2)` for odd
    /// `n`, `(o1, d, o2)` for even `n`.
    pub inner: (CMat, CMat, CMat),
    /// `d = diag(e^{i phi_j})` over all `N` slots.
    pub d_phases: Vec<f64>,
    /// `||phase * k1 a k2 - v||`.
    pub residual: f64,
    /// Structure residual of the inner side factors (symplectic or orthogonal).
    pub inner_residual: f64,
}

impl CcdFactors {
    /// `spec(a^2)` in slot order.
    pub fn a_squared_spectrum(&self) -> Vec<Complex64> {
        self.d_phases
            .iter()
            .map(|&p| Complex64::from_polar(1.0, 2.0 * p))
            .collect()
    }

    /// One representative per repeated pair (odd `n` only).
    pub fn reduced_spectrum(&self) -> Option<Vec<Complex64>> {
        match self.parity {
            Parity::Odd => {
                let half = self.d_phases.len() / 2;
                Some(self.a_squared_spectrum()[..half].to_vec())
            }
            Parity::Even => None,
        }
    }

    pub fn basis(&self) -> CMat {
        similarity_basis(self.n).expect("n was validated at construction")
    }

    /// `max(||k^T S k - S||)` over both side factors.
    pub fn k_residual(&self) -> f64 {
        concurrence_symmetry_residual(&self.k1).max(concurrence_symmetry_residual(&self.k2))
    }

    /// Off-diagonal mass of `B^dagger a B`, plus for odd `n` the mismatch
    /// between slots `j` and `N/2 + j`.
    pub fn a_form_residual(&self) -> f64 {
        let b = self.basis();
        let inner = b.adjoint() * &self.a * &b;
        let dim = inner.nrows();
        let mut off = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                if r != c {
                    off += inner[(r, c)].norm_sqr();
                }
            }
        }
        let mut pair = 0.0;
        if self.parity == Parity::Odd {
            let half = dim / 2;
            for j in 0..half {
                pair += (inner[(j, j)] - inner[(half + j, half + j)]).norm_sqr();
            }
        }
        (off + pair).sqrt()
    }
}

fn similarity_basis(n: usize) -> Result<CMat> {
    let kind = match Parity::of(n) {
        Parity::Even => BasisKind::MagicE0,
        Parity::Odd => BasisKind::GhzF0,
    };
    Ok(build_basis(kind, n)?.matrix)
}

fn check_qubits(v: &CMat, n: usize, tol: &Tolerances) -> Result<()> {
    let dim = ensure_unitary(v, tol.unitary * (v.nrows() as f64).sqrt())?;
    let found = qubits_for_dim(dim)?;
    if found != n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: dim,
        });
    }
    if n == 0 {
        return Err(Error::Precondition("CCD needs n >= 1".into()));
    }
    if n > tol.max_qubits {
        return Err(Error::TooManyQubits {
            qubits: n,
            max: tol.max_qubits,
        });
    }
    Ok(())
}

/// Concurrence canonical decomposition of an `n`-qubit unitary.
pub fn ccd(v: &CMat, n: usize, tol: &Tolerances) -> Result<CcdFactors> {
    check_qubits(v, n, tol)?;
    let (v_su, phase) = normalize_to_special(v);
    let basis = similarity_basis(n)?;
    let (inner, d_phases, inner_residual) = match Parity::of(n) {
        Parity::Odd => {
            // F0 is real orthogonal.
            let w = basis.transpose() * &v_su * &basis;
            let f = kak_aii(&w, tol)?;
            let mut phases = f.phases.clone();
            phases.extend_from_slice(&f.phases);
            ((f.omega1, f.d, f.omega2), phases, f.sp_residual)
        }
        Parity::Even => {
            let m = basis.adjoint() * &v_su * &basis;
            let (o1, phases, o2) = kak_ai(&m, tol)?;
            let residual = orthogonal_deviation(&o1).max(orthogonal_deviation(&o2));
            let entries: Vec<Complex64> =
                phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
            ((o1, diag(&entries), o2), phases, residual)
        }
    };
    let back = basis.adjoint();
    let k1 = &basis * &inner.0 * &back;
    let a = &basis * &inner.1 * &back;
    let k2 = &basis * &inner.2 * &back;
    let residual = frob(&((&k1 * &a * &k2).map(|z| z * phase) - v));
    let f = CcdFactors {
        n,
        parity: Parity::of(n),
        phase,
        k1,
        a,
        k2,
        inner,
        d_phases,
        residual,
        inner_residual,
    };
    let ktol = 1e-8 * (1u64 << n) as f64;
    let kres = f.k_residual();
    if kres > ktol {
        return Err(Error::Tolerance {
            what: "side factor K-membership",
            residual: kres,
            tol: ktol,
        });
    }
    Ok(f)
}

/// `||o^T o - I||` for a (numerically) real orthogonal matrix.
fn orthogonal_deviation(o: &CMat) -> f64 {
    let imag = o.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
    frob(&(o.transpose() * o - identity(o.nrows()))) + imag
}

/// Shear factors for combining `Re(s)` and `Im(s)`; several are tried in turn
/// in case an input happens to make one of them degenerate.
const SHEARS: [f64; 4] = [
    std::f64::consts::FRAC_1_SQRT_2,
    -0.381_966_011_250_105_1,
    1.732_050_807_568_877_2,
    0.123_456_789,
];

/// Type AI decomposition `m = o1 d o2` of a special unitary `m` with real
/// orthogonal `o1`, `o2` of determinant one and diagonal `d`.
///
/// Returns `(o1, phases of d, o2)`.
fn kak_ai(m: &CMat, tol: &Tolerances) -> Result<(CMat, Vec<f64>, CMat)> {
    let dim = m.nrows();
    let s = m * m.transpose();
    let s = (&s + s.transpose()).unscale(2.0);
    let re = s.map(|z| z.re);
    let im = s.map(|z| z.im);

    let diag_tol = 1e-10 * (dim as f64).sqrt();
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    for gamma in SHEARS {
        let combo = &re + &im * gamma;
        let combo = (&combo + combo.transpose()) * 0.5;
        let o = SymmetricEigen::new(combo).eigenvectors;
        let oc = o.map(|x| Complex64::new(x, 0.0));
        let t = oc.transpose() * &s * &oc;
        let off = offdiag_norm(&t);
        if best.as_ref().is_none_or(|(b, _)| off < *b) {
            best = Some((off, o));
        }
        if off <= diag_tol {
            break;
        }
    }
    let (off, mut o1) = best.expect("at least one shear is tried");
    if off > 1e-6 {
        return Err(Error::Tolerance {
            what: "real orthogonal diagonalization of m m^T",
            residual: off,
            tol: 1e-6,
        });
    }
    if o1.determinant() < 0.0 {
        o1.column_mut(0).neg_mut();
    }
    let o1 = o1.map(|x| Complex64::new(x, 0.0));
    let t = o1.transpose() * &s * &o1;

    let mut phases: Vec<f64> = (0..dim)
        .map(|k| principal_phase(t[(k, k)], tol.cluster) / 2.0)
        .collect();
    let total: f64 = phases.iter().sum();
    // det d = e^{i total} is +-1; move a -1 into the first slot.
    let wrapped = (total / PI).round() as i64;
    if wrapped.rem_euclid(2) == 1 {
        phases[0] += if phases[0] > 0.0 { -PI } else { PI };
    }
    let d_adj: Vec<Complex64> = phases
        .iter()
        .map(|&p| Complex64::from_polar(1.0, -p))
        .collect();
    let o2 = diag(&d_adj) * o1.transpose() * m;
    Ok((o1, phases, o2))
}

fn offdiag_norm(t: &CMat) -> f64 {
    let mut off = 0.0;
    for r in 0..t.nrows() {
        for c in 0..t.ncols() {
            if r != c {
                off += t[(r, c)].norm_sqr();
            }
        }
    }
    off.sqrt()
}

/// `v = exp(i Hp) exp(i Hk)` with `i Hp` in `p` and `i Hk` in `k`.
#[derive(Clone, Debug)]
pub struct PolarFactors {
    pub hp: CMat,
    pub hk: CMat,
    /// `||exp(i Hp) exp(i Hk) - v||`.
    pub residual: f64,
    /// `||theta(i Hp) + i Hp||`.
    pub p_residual: f64,
    /// `||theta(i Hk) - i Hk||`.
    pub k_residual: f64,
}

/// Time-reversal polar decomposition from `v = (k1 a k1^dagger)(k1 k2)`.
pub fn polar_time_reversal(v: &CMat, n: usize, tol: &Tolerances) -> Result<PolarFactors> {
    let f = ccd(v, n, tol)?;
    polar_from_ccd(v, &f, tol)
}

pub fn polar_from_ccd(v: &CMat, f: &CcdFactors, tol: &Tolerances) -> Result<PolarFactors> {
    let dim = v.nrows();
    let basis = f.basis();
    let phases: Vec<Complex64> = f
        .d_phases
        .iter()
        .map(|&p| Complex64::new(p, 0.0))
        .collect();
    let log_a = &basis * diag(&phases) * basis.adjoint();
    let hp = &f.k1 * log_a * f.k1.adjoint() + identity(dim).scale(f.phase.arg());
    let hp = (&hp + hp.adjoint()).unscale(2.0);

    let k = &f.k1 * &f.k2;
    let xk = log_in_k(&k, f.n, tol)?;
    let hk = xk.map(|z| z / I);
    let hk = (&hk + hk.adjoint()).unscale(2.0);

    let ihp = hp.map(|z| z * I);
    let ihk = hk.map(|z| z * I);
    let p_residual = frob(&(theta(&ihp) + &ihp));
    let k_residual = frob(&(theta(&ihk) - &ihk));
    let recon = exp_i(&hp) * exp_i(&hk);
    let residual = frob(&(recon - v));
    Ok(PolarFactors {
        hp,
        hk,
        residual,
        p_residual,
        k_residual,
    })
}

/// `exp(i H)` for Hermitian `H` via its eigendecomposition.
fn exp_i(h: &CMat) -> CMat {
    let eig = crate::linalg::eig_hermitian(h, 1e-8).expect("Hermitian by construction");
    let e: Vec<Complex64> = eig
        .values
        .iter()
        .map(|&l| Complex64::from_polar(1.0, l))
        .collect();
    &eig.vectors * diag(&e) * eig.vectors.adjoint()
}

/// `A x = S^T conj(x)`, the antiunitary pairing eigenvectors of `k` in `K`
/// with eigenvalue `mu` to eigenvectors with eigenvalue `conj(mu)`.
fn antiunitary(x: &CVec) -> CVec {
    let dim = x.len();
    // S^T |b> = (-1)^{popcount(N-1-b)} |N-1-b>.
    CVec::from_fn(dim, |a, _| {
        let b = dim - 1 - a;
        let sign = if a.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        x[b].conj() * sign
    })
}

fn project_out(y: &mut CVec, basis: &[CVec]) {
    for _ in 0..2 {
        for b in basis {
            let c = b.dotc(y);
            y.axpy(-c, b, ONE);
        }
    }
}

/// Logarithm of `k` in `K` lying in `k`.
///
/// Away from the eigenvalue `-1` the principal log already lies in `k`. On the
/// `-1` eigenspace `E` the phases `+pi` and `-pi` must be split between a
/// subspace `E+` and its image under the antiunitary pairing.
fn log_in_k(k: &CMat, n: usize, tol: &Tolerances) -> Result<CMat> {
    let dim = k.nrows();
    let (values, q, _) = unitary_eig(k);
    let near_minus_one = |z: Complex64| (z + ONE).norm() <= 1e-6;
    let mut x = CMat::zeros(dim, dim);
    let mut e_cols = Vec::new();
    for (c, &z) in values.iter().enumerate() {
        if near_minus_one(z) {
            e_cols.push(q.column(c).clone_owned());
            continue;
        }
        let col = q.column(c);
        let phi = Complex64::new(0.0, principal_phase(z, tol.cluster));
        x += (col * col.adjoint()).map(|w| w * phi);
    }

    if !e_cols.is_empty() {
        let plus = split_minus_one_space(&e_cols, n)?;
        for xp in &plus {
            let xm = antiunitary(xp);
            x += (xp * xp.adjoint()).map(|w| w * (I * PI));
            x += (&xm * xm.adjoint()).map(|w| w * (-I * PI));
        }
    }

    let x = (&x - x.adjoint()).unscale(2.0);
    let projected = (&x + theta(&x)).unscale(2.0);
    let correction = frob(&(&projected - &x));
    if correction > LOG_PROJECTION_TOL {
        return Err(Error::Structure(format!(
            "log of k1 k2 is not in k (correction {correction:.3e})"
        )));
    }
    Ok(projected)
}

/// Orthonormal `E+` with `E = E+ (+) A(E+)` for the `-1` eigenspace `E`.
fn split_minus_one_space(e_cols: &[CVec], n: usize) -> Result<Vec<CVec>> {
    let m = e_cols.len();
    if !m.is_multiple_of(2) {
        return Err(Error::Structure(format!(
            "-1 eigenspace of k1 k2 has odd dimension {m}"
        )));
    }
    let mut plus = Vec::new();
    if n % 2 == 1 {
        // A^2 = -1: x and A x are always orthogonal.
        let mut span: Vec<CVec> = Vec::new();
        for y in e_cols {
            if span.len() == m {
                break;
            }
            let mut y = y.clone();
            project_out(&mut y, &span);
            let norm = y.norm();
            if norm < 1e-3 {
                continue;
            }
            let x = y.unscale(norm);
            let mut ax = antiunitary(&x);
            project_out(&mut ax, &span);
            let ax_norm = ax.norm();
            span.push(x.clone());
            span.push(ax.unscale(ax_norm));
            plus.push(x);
        }
        if span.len() != m {
            return Err(Error::Structure("could not pair the -1 eigenspace".into()));
        }
    } else {
        // A^2 = +1: build an orthonormal basis of A-fixed vectors, then pair
        // them as (f1 + i f2)/sqrt2.
        let mut fixed: Vec<CVec> = Vec::new();
        for y in e_cols {
            let ay = antiunitary(y);
            for cand in [y + &ay, (y - &ay).map(|z| z * I)] {
                if fixed.len() == m {
                    break;
                }
                let mut f = cand;
                project_out(&mut f, &fixed);
                // Keep f exactly fixed: average with its image.
                f = (&f + antiunitary(&f)).unscale(2.0);
                let norm = f.norm();
                if norm < 1e-3 {
                    continue;
                }
                fixed.push(f.unscale(norm));
            }
        }
        if fixed.len() != m {
            return Err(Error::Structure(
                "could not find a real basis of the -1 eigenspace".into(),
            ));
        }
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for pair in fixed.chunks(2) {
            plus.push((&pair[0] + pair[1].map(|z| z * I)).scale(r));
        }
    }
    Ok(plus)
}
