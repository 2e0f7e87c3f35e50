//! Spin-chain Hamiltonians, their evolution spectra and Kramers-type reports.
//!
//! Site `k` (0-based) is the `k`-th tensor factor, i.e. bit `n - 1 - k` of a
//! basis index.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{
    capacity_is_maximal, concurrence_spectrum, multiset_distance, pair_duplicates, sort_by_arg,
    ConcurrenceSpectrum,
};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ensure_hermitian, exp_i_hermitian, frob, qubits_for_dim, CMat, CVec, Tolerances, ZERO};
use crate::spinflip::{concurrence, is_time_symmetric, spin_flip_matrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

/// Coupling families. `Xyz` and `Ising` use the couplings as given;
/// `XyField` carries the `J (1 +- g) / 4` and `h_z / 2` normalizations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ChainModel {
    Xyz { jx: f64, jy: f64, jz: f64 },
    Ising { jz: f64 },
    XyField { j: f64, g: f64, h_z: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinChainSpec {
    pub n: usize,
    #[serde(flatten)]
    pub model: ChainModel,
    #[serde(default)]
    pub boundary: Boundary,
}

impl SpinChainSpec {
    pub fn xyz(n: usize, jx: f64, jy: f64, jz: f64) -> Self {
        Self {
            n,
            model: ChainModel::Xyz { jx, jy, jz },
            boundary: Boundary::Periodic,
        }
    }

    /// `Jx = Jy = Jz = j`.
    pub fn xxx(n: usize, j: f64) -> Self {
        Self::xyz(n, j, j, j)
    }

    /// `Jx = Jy = j`, `Jz = 0`.
    pub fn xy(n: usize, j: f64) -> Self {
        Self::xyz(n, j, j, 0.0)
    }

    pub fn ising(n: usize, jz: f64) -> Self {
        Self {
            n,
            model: ChainModel::Ising { jz },
            boundary: Boundary::Periodic,
        }
    }

    pub fn xy_field(n: usize, j: f64, g: f64, h_z: f64) -> Self {
        Self {
            n,
            model: ChainModel::XyField { j, g, h_z },
            boundary: Boundary::Periodic,
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    /// `(Jx, Jy, Jz)` per bond and the per-site `sigma^z` coefficient.
    pub fn couplings(&self) -> ([f64; 3], f64) {
        match self.model {
            ChainModel::Xyz { jx, jy, jz } => ([jx, jy, jz], 0.0),
            ChainModel::Ising { jz } => ([0.0, 0.0, jz], 0.0),
            ChainModel::XyField { j, g, h_z } => ([j * (1.0 + g) / 4.0, j * (1.0 - g) / 4.0, 0.0], h_z / 2.0),
        }
    }

    pub fn validate(&self, max_qubits: usize) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Precondition(format!("a chain needs at least 2 sites, got {}", self.n)));
        }
        if self.n > max_qubits {
            return Err(Error::TooManyQubits { qubits: self.n, max: max_qubits });
        }
        let (c, h) = self.couplings();
        if c.iter().chain([&h]).any(|x| !x.is_finite()) {
            return Err(Error::Input("non-finite coupling".into()));
        }
        Ok(())
    }

    /// Nearest-neighbour bonds. A periodic chain of two sites has the bond
    /// `(1, 0)` in addition to `(0, 1)`.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut b: Vec<_> = (0..self.n - 1).map(|k| (k, k + 1)).collect();
        if self.boundary == Boundary::Periodic {
            b.push((self.n - 1, 0));
        }
        b
    }
}

fn bit(j: usize, n: usize, site: usize) -> usize {
    (j >> (n - 1 - site)) & 1
}

fn sign(b: usize) -> f64 {
    if b == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Dense Hamiltonian of the chain.
pub fn build_hamiltonian(spec: &SpinChainSpec) -> Result<CMat> {
    build_hamiltonian_capped(spec, crate::linalg::DEFAULT_MAX_QUBITS)
}

pub fn build_hamiltonian_capped(spec: &SpinChainSpec, max_qubits: usize) -> Result<CMat> {
    spec.validate(max_qubits)?;
    let n = spec.n;
    let dim = 1usize << n;
    let ([cx, cy, cz], field) = spec.couplings();
    let bonds = spec.bonds();
    let mut h = CMat::zeros(dim, dim);
    for j in 0..dim {
        let mut d = 0.0;
        for &(a, b) in &bonds {
            let (ba, bb) = (bit(j, n, a), bit(j, n, b));
            let flipped = j ^ (1 << (n - 1 - a)) ^ (1 << (n - 1 - b));
            // sigma^y sigma^y |ba bb> = -(-1)^(ba + bb) |flipped>
            let off = cx - cy * sign(ba) * sign(bb);
            h[(flipped, j)] += Complex64::new(off, 0.0);
            d += cz * sign(ba) * sign(bb);
        }
        for site in 0..n {
            d += field * sign(bit(j, n, site));
        }
        h[(j, j)] += Complex64::new(d, 0.0);
    }
    Ok(h)
}

/// Total spin projection `S_z = sum_k sigma^z_k`, diagonal in the computational basis.
pub fn total_sz_diagonal(n: usize) -> Vec<f64> {
    (0..1usize << n)
        .map(|j| (0..n).map(|k| sign(bit(j, n, k))).sum())
        .collect()
}

/// `J_z (n - 2 sum_k j_k xor j_{k+1})` for every bitstring `j`, indices cyclic,
/// listed in basis order.
pub fn ising_spectrum_analytic(n: usize, jz: f64) -> Result<Vec<f64>> {
    if n > crate::linalg::DEFAULT_MAX_QUBITS {
        return Err(Error::TooManyQubits { qubits: n, max: crate::linalg::DEFAULT_MAX_QUBITS });
    }
    Ok((0..1usize << n)
        .map(|j| {
            let flips: usize = (0..n).map(|k| bit(j, n, k) ^ bit(j, n, (k + 1) % n)).sum();
            jz * (n as f64 - 2.0 * flips as f64)
        })
        .collect())
}

fn ensure_real_time_symmetric(h: &CMat, tol: &Tolerances) -> Result<usize> {
    ensure_hermitian(h, tol.herm * frob(h).max(1.0))?;
    let n = qubits_for_dim(h.nrows())?;
    let imag = h.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > tol.herm * frob(h).max(1.0) {
        return Err(Error::Precondition(format!(
            "evolution shortcut needs a real Hamiltonian (max |Im H| = {imag:.3e})"
        )));
    }
    if !is_time_symmetric(h, tol.herm)? {
        return Err(Error::Precondition("Hamiltonian is not time-symmetric".into()));
    }
    Ok(n)
}

/// `{exp(-2 i lambda_j t)}` over the eigenvalues of a real, time-symmetric `H`.
pub fn evolution_concurrence_spectrum(h: &CMat, t: f64, tol: &Tolerances) -> Result<ConcurrenceSpectrum> {
    let n = ensure_real_time_symmetric(h, tol)?;
    let eig = eig_hermitian(h, tol.herm * frob(h).max(1.0))?;
    let mut points: Vec<Complex64> = eig
        .values
        .iter()
        .map(|&l| Complex64::from_polar(1.0, -2.0 * l * t))
        .collect();
    sort_by_arg(&mut points);
    let reduced = if n % 2 == 1 {
        Some(pair_duplicates(&points, tol.cluster)?)
    } else {
        None
    };
    Ok(ConcurrenceSpectrum { n, points, reduced })
}

/// The shortcut spectrum together with its distance from the spectrum of the
/// explicitly formed `exp(-i H t)`.
pub fn evolution_concurrence_spectrum_verified(
    h: &CMat,
    t: f64,
    tol: &Tolerances,
) -> Result<(ConcurrenceSpectrum, f64)> {
    let spec = evolution_concurrence_spectrum(h, t, tol)?;
    let u = exp_i_hermitian(h, -t, tol.herm * frob(h).max(1.0))?;
    let direct = concurrence_spectrum(&u, spec.n, tol)?;
    Ok((spec.clone(), multiset_distance(&spec.points, &direct.points)))
}

/// `pi / (4 n |J_z|)`: first time the periodic Ising evolution reaches capacity one.
pub fn min_maximal_capacity_time(n: usize, jz: f64) -> Result<f64> {
    if n % 2 == 1 {
        return Err(Error::Parity {
            what: "minimal maximal-capacity time",
            expected: "an even",
            n,
        });
    }
    if n < 2 {
        return Err(Error::Precondition("a chain needs at least 2 sites".into()));
    }
    if jz == 0.0 || !jz.is_finite() {
        return Err(Error::Precondition(format!("J_z must be nonzero and finite, got {jz}")));
    }
    Ok(PI / (4.0 * n as f64 * jz.abs()))
}

#[derive(Clone, Debug, Serialize)]
pub struct TminSweep {
    pub n: usize,
    pub jz: f64,
    pub t_min: f64,
    pub step: f64,
    pub times: Vec<f64>,
    pub maximal: Vec<bool>,
    pub first_maximal: Option<f64>,
    /// Maximality evaluated exactly at `t_min`.
    pub maximal_at_t_min: bool,
    /// Every grid point at or beyond `t_min` is maximal. Fails for `n = 2`,
    /// where the spectrum is one conjugate pair and only `t_min` itself works.
    pub maximal_after: bool,
    /// No grid point more than one step below `t_min` is maximal, and `t_min` is.
    pub consistent: bool,
}

/// Samples `capacity_is_maximal(exp(-i H_Is t))` on `points` equally spaced
/// times in `[0, 2 t_min]`.
pub fn t_min_sweep(n: usize, jz: f64, points: usize, tol: &Tolerances) -> Result<TminSweep> {
    let t_min = min_maximal_capacity_time(n, jz)?;
    if points < 2 {
        return Err(Error::Precondition("a sweep needs at least 2 points".into()));
    }
    let h = build_hamiltonian(&SpinChainSpec::ising(n, jz))?;
    let step = 2.0 * t_min / (points - 1) as f64;
    let times: Vec<f64> = (0..points).map(|k| k as f64 * step).collect();
    let is_maximal = |t: f64| -> Result<bool> {
        let u = exp_i_hermitian(&h, -t, tol.herm * frob(&h).max(1.0))?;
        capacity_is_maximal(&u, n, tol)
    };
    let maximal = times.par_iter().map(|&t| is_maximal(t)).collect::<Result<Vec<bool>>>()?;
    let maximal_at_t_min = is_maximal(t_min)?;
    let first_maximal = maximal.iter().position(|&m| m).map(|k| times[k]);
    let below_clear = times
        .iter()
        .zip(&maximal)
        .all(|(&t, &m)| !m || t >= t_min - step * (1.0 + 1e-9));
    let maximal_after = times.iter().zip(&maximal).all(|(&t, &m)| m || t < t_min);
    let consistent = below_clear && maximal_at_t_min;
    Ok(TminSweep {
        n,
        jz,
        t_min,
        step,
        times,
        maximal,
        first_maximal,
        maximal_at_t_min,
        maximal_after,
        consistent,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterKind {
    EvenMultiplicity,
    Nondegenerate,
    /// Odd multiplicity above one; allowed only for even `n`.
    OddDegenerate,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyCluster {
    pub energy: f64,
    pub multiplicity: usize,
    pub kind: ClusterKind,
    /// Concurrence of the eigenstate when the level is nondegenerate.
    pub concurrence: Option<f64>,
    /// A neighbouring gap lies within a factor 100 of the clustering threshold.
    pub ambiguous: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Ambiguous,
}

#[derive(Clone, Debug, Serialize)]
pub struct KramersReport {
    pub n: usize,
    pub clusters: Vec<EnergyCluster>,
    /// Largest `||H flip(psi) - lambda flip(psi)||` over the eigenbasis.
    pub flip_residual: f64,
    pub ground_unique: bool,
    pub ground_concurrence: Option<f64>,
    pub violations: Vec<String>,
    pub verdict: Verdict,
}

/// Concurrence below `1 - CONCURRENCE_SLACK` on a nondegenerate level is a violation.
pub const CONCURRENCE_SLACK: f64 = 1e-8;

/// Groups ascending values with gaps up to `tol * diameter`; the second
/// vector flags groups next to a gap in `(tol, 100 tol] * diameter`.
fn cluster_levels(values: &[f64], tol: f64) -> (Vec<Vec<usize>>, Vec<bool>) {
    let diameter = match (values.first(), values.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    let gap = tol * diameter;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut near: Vec<bool> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        let d = if i == 0 { f64::INFINITY } else { v - values[i - 1] };
        if i > 0 && d <= gap {
            groups.last_mut().unwrap().push(i);
        } else {
            let close = i > 0 && d <= 100.0 * gap;
            if close {
                *near.last_mut().unwrap() = true;
            }
            groups.push(vec![i]);
            near.push(close);
        }
    }
    (groups, near)
}

/// Degeneracy structure and eigenstate concurrences of a time-symmetric `H`.
pub fn kramers_report(h: &CMat, n: usize, tol: &Tolerances) -> Result<KramersReport> {
    let scale = frob(h).max(1.0);
    let dim = ensure_hermitian(h, tol.herm * scale)?;
    if dim != 1 << n {
        return Err(Error::DimensionMismatch { expected: 1 << n, found: dim });
    }
    if !is_time_symmetric(h, tol.herm)? {
        return Err(Error::Precondition("Hamiltonian is not time-symmetric".into()));
    }
    let eig = eig_hermitian(h, tol.herm * scale)?;
    let s = spin_flip_matrix(n);
    let mut flip_residual: f64 = 0.0;
    for (k, &lambda) in eig.values.iter().enumerate() {
        let psi: CVec = eig.vectors.column(k).into_owned();
        let flipped = &s * psi.conjugate();
        let r = (h * &flipped - flipped.scale(lambda)).norm();
        flip_residual = flip_residual.max(r);
    }
    let (groups, near) = cluster_levels(&eig.values, tol.cluster);
    let mut clusters = Vec::with_capacity(groups.len());
    let mut violations = Vec::new();
    for (g, ambiguous) in groups.iter().zip(near) {
        let energy = g.iter().map(|&k| eig.values[k]).sum::<f64>() / g.len() as f64;
        let multiplicity = g.len();
        let kind = match multiplicity {
            1 => ClusterKind::Nondegenerate,
            m if m % 2 == 0 => ClusterKind::EvenMultiplicity,
            _ => ClusterKind::OddDegenerate,
        };
        let conc = if multiplicity == 1 {
            Some(concurrence(&eig.vectors.column(g[0]).into_owned())?)
        } else {
            None
        };
        if n % 2 == 1 && kind != ClusterKind::EvenMultiplicity {
            violations.push(format!("level {energy:.12e} has multiplicity {multiplicity} for odd n"));
        }
        if let Some(c) = conc {
            if c < 1.0 - CONCURRENCE_SLACK {
                violations.push(format!("nondegenerate level {energy:.12e} has concurrence {c:.12}"));
            }
        }
        clusters.push(EnergyCluster {
            energy,
            multiplicity,
            kind,
            concurrence: conc,
            ambiguous,
        });
    }
    let verdict = if !violations.is_empty() {
        Verdict::Violated
    } else if clusters.iter().any(|c| c.ambiguous) {
        Verdict::Ambiguous
    } else {
        Verdict::Holds
    };
    let ground_unique = clusters.first().is_some_and(|c| c.multiplicity == 1);
    let ground_concurrence = clusters.first().and_then(|c| c.concurrence);
    Ok(KramersReport {
        n,
        clusters,
        flip_residual,
        ground_unique,
        ground_concurrence,
        violations,
        verdict,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GroundStateRow {
    pub parameter: f64,
    pub ground_energy: f64,
    pub degeneracy: usize,
    /// `<S_z>` of the reported ground state.
    pub sz_sector: f64,
    pub concurrence: f64,
}

/// Ground state of `H` as reported in sweeps. A degenerate ground space is
/// resolved by diagonalizing `S_z` inside it and taking the vector with the
/// smallest `|s_z|`.
pub fn ground_state_row(h: &CMat, n: usize, parameter: f64, tol: &Tolerances) -> Result<(GroundStateRow, CVec)> {
    let scale = frob(h).max(1.0);
    let eig = eig_hermitian(h, tol.herm * scale)?;
    let (groups, _) = cluster_levels(&eig.values, tol.cluster);
    let ground = &groups[0];
    let sz = total_sz_diagonal(n);
    let sz_of = |v: &CVec| -> f64 { v.iter().zip(&sz).map(|(z, s)| z.norm_sqr() * s).sum() };
    let psi: CVec = if ground.len() == 1 {
        eig.vectors.column(ground[0]).into_owned()
    } else {
        let basis = eig.vectors.columns(ground[0], ground.len()).into_owned();
        let szm = CMat::from_diagonal(&CVec::from_iterator(sz.len(), sz.iter().map(|&s| Complex64::new(s, 0.0))));
        let restricted = basis.adjoint() * szm * &basis;
        let inner = eig_hermitian(&restricted, 1e-8)?;
        let pick = (0..inner.values.len())
            .min_by(|&a, &b| {
                inner.values[a]
                    .abs()
                    .total_cmp(&inner.values[b].abs())
                    .then(inner.values[a].total_cmp(&inner.values[b]))
            })
            .unwrap_or(0);
        &basis * inner.vectors.column(pick)
    };
    let row = GroundStateRow {
        parameter,
        ground_energy: eig.values[ground[0]],
        degeneracy: ground.len(),
        sz_sector: sz_of(&psi),
        concurrence: concurrence(&psi)?,
    };
    Ok((row, psi))
}

/// Ground-state data of the XY chain in a field for each `h_z`.
pub fn ground_state_concurrence_sweep(
    n: usize,
    j: f64,
    g: f64,
    h_values: &[f64],
    tol: &Tolerances,
) -> Result<Vec<GroundStateRow>> {
    if n % 2 == 1 {
        return Err(Error::Parity {
            what: "ground-state concurrence sweep",
            expected: "an even",
            n,
        });
    }
    SpinChainSpec::xy_field(n, j, g, 0.0).validate(tol.max_qubits)?;
    h_values
        .par_iter()
        .map(|&h_z| {
            let h = build_hamiltonian_capped(&SpinChainSpec::xy_field(n, j, g, h_z), tol.max_qubits)?;
            ground_state_row(&h, n, h_z, tol).map(|(row, _)| row)
        })
        .collect()
}

/// Field at which the ground state leaves the `S_z` sector it has at `lo`,
/// located by bisection on `[lo, hi]`. `None` when the sector never changes.
pub fn critical_field(n: usize, j: f64, g: f64, lo: f64, hi: f64, tol: &Tolerances) -> Result<Option<f64>> {
    // Near the crossing the two levels fall inside the clustering window and
    // the tie-break would pin the sector; resolve levels as finely as possible.
    let fine = Tolerances {
        cluster: 1e-14,
        ..*tol
    };
    let sector = |h_z: f64| -> Result<f64> {
        let h = build_hamiltonian_capped(&SpinChainSpec::xy_field(n, j, g, h_z), tol.max_qubits)?;
        Ok(ground_state_row(&h, n, h_z, &fine)?.0.sz_sector)
    };
    let s0 = sector(lo)?;
    if (sector(hi)? - s0).abs() <= 0.5 {
        return Ok(None);
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-12 * b.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (a + b);
        if (sector(mid)? - s0).abs() <= 0.5 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Some(0.5 * (a + b)))
}

/// Random Hamiltonian built from even-weight Pauli strings with real
/// coefficients, hence time-symmetric; multiplied by `i` where needed to stay Hermitian.
pub fn random_time_symmetric<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let h = crate::linalg::random_hermitian(1 << n, rng);
    let sym = crate::spinflip::time_symmetric_part(&h);
    let tr = crate::linalg::trace(&sym) / (1usize << n) as f64;
    let mut out = sym;
    for k in 0..out.nrows() {
        out[(k, k)] -= tr;
    }
    out
}

pub fn zero_state(n: usize) -> CVec {
    let mut v = CVec::from_element(1 << n, ZERO);
    v[0] = Complex64::new(1.0, 0.0);
    v
}
