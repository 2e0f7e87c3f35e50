//! Concurrence spectra, pairwise concurrence capacities and their witnesses,
//! and Monte Carlo estimates of the maximal-capacity fraction.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ccd::{ccd, CcdFactors, Parity};
use crate::error::{Error, Result};
use crate::geometry::{center_weights, hull_contains_zero, smallest_enclosing_circle};
use crate::linalg::{
    ensure_unitary, identity, kron_capped, normalize_to_special, qubits_for_dim, task_rng,
    unitary_eig, CMat, CVec, Tolerances, ONE, ZERO,
};
use crate::spinflip::{concurrence_form, spin_flip_matrix};

/// Default slack for the monotonicity inequality.
pub const TOL_MONO: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcurrenceSpectrum {
    pub n: usize,
    /// All `N` eigenvalues, sorted by argument.
    pub points: Vec<Complex64>,
    /// One point per Kramers pair (odd `n` only), sorted by argument.
    pub reduced: Option<Vec<Complex64>>,
}

impl ConcurrenceSpectrum {
    /// The points entering the capacity: the full multiset for even `n`, the
    /// reduced one for odd `n`.
    pub fn capacity_points(&self) -> &[Complex64] {
        self.reduced.as_deref().unwrap_or(&self.points)
    }
}

pub(crate) fn sort_by_arg(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.arg().total_cmp(&b.arg()).then(a.norm().total_cmp(&b.norm())));
}

/// Largest distance in a greedy nearest-point matching of two multisets of
/// equal size; infinite when the sizes differ.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for z in a {
        let best = (0..b.len())
            .filter(|&k| !used[k])
            .min_by(|&p, &q| (b[p] - z).norm().total_cmp(&(b[q] - z).norm()));
        if let Some(k) = best {
            used[k] = true;
            worst = worst.max((b[k] - z).norm());
        }
    }
    worst
}

/// Splits a multiset into nearest-neighbour pairs and returns one (averaged)
/// representative per pair.
pub fn pair_duplicates(points: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    if !points.len().is_multiple_of(2) {
        return Err(Error::Structure(format!(
            "cannot pair an odd number ({}) of spectrum points",
            points.len()
        )));
    }
    let mut used = vec![false; points.len()];
    let mut reduced = Vec::with_capacity(points.len() / 2);
    for i in 0..points.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let (j, dist) = (0..points.len())
            .filter(|&j| !used[j])
            .map(|j| (j, (points[j] - points[i]).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("an even count leaves a partner");
        if dist > tol {
            return Err(Error::Structure(format!(
                "spectrum point {} has no duplicate within {tol:.1e} (nearest at {dist:.3e})",
                points[i]
            )));
        }
        used[j] = true;
        let mid = (points[i] + points[j]) / 2.0;
        reduced.push(mid / mid.norm());
    }
    sort_by_arg(&mut reduced);
    Ok(reduced)
}

fn validated_qubits(v: &CMat, n: usize, tol: &Tolerances) -> Result<()> {
    let dim = ensure_unitary(v, tol.unitary * (v.nrows() as f64).sqrt())?;
    if qubits_for_dim(dim)? != n || n == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: dim,
        });
    }
    Ok(())
}

/// Eigenvalues of `S^dagger v S v^T` for the special-unitary normalization of `v`.
pub fn concurrence_spectrum(v: &CMat, n: usize, tol: &Tolerances) -> Result<ConcurrenceSpectrum> {
    validated_qubits(v, n, tol)?;
    let (v, _) = normalize_to_special(v);
    let s = spin_flip_matrix(n);
    let m = s.transpose() * &v * &s * v.transpose();
    let (values, _, _) = unitary_eig(&m);
    let mut points = Vec::with_capacity(values.len());
    for z in values {
        if (z.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::Tolerance {
                what: "concurrence spectrum point off the unit circle",
                residual: (z.norm() - 1.0).abs(),
                tol: 1e-8,
            });
        }
        points.push(z / z.norm());
    }
    sort_by_arg(&mut points);
    let reduced = if n % 2 == 1 {
        Some(pair_duplicates(&points, tol.cluster)?)
    } else {
        None
    };
    Ok(ConcurrenceSpectrum { n, points, reduced })
}

/// Concurrence spectrum read off a decomposition: `spec(a^2)`.
pub fn spectrum_from_ccd(f: &CcdFactors) -> ConcurrenceSpectrum {
    let mut points = f.a_squared_spectrum();
    sort_by_arg(&mut points);
    let reduced = f.reduced_spectrum().map(|mut r| {
        sort_by_arg(&mut r);
        r
    });
    ConcurrenceSpectrum {
        n: f.n,
        points,
        reduced,
    }
}

/// `kappa_n(v) = 1` iff 0 is in the hull of the (reduced) spectrum.
pub fn capacity_is_maximal(v: &CMat, n: usize, tol: &Tolerances) -> Result<bool> {
    let spec = concurrence_spectrum(v, n, tol)?;
    Ok(hull_contains_zero(spec.capacity_points(), tol.hull))
}

/// States realizing the capacity, with the coefficients they were built from.
#[derive(Clone, Debug, Serialize)]
pub struct CapacityWitness {
    /// `beta_j` per capacity point: `sum beta = 0`, `sum |beta| <= 1`.
    pub beta: Vec<Complex64>,
    /// `sum beta_j lambda_j`.
    pub achieved: Complex64,
    #[serde(serialize_with = "crate::io::serialize_cvec")]
    pub phi: CVec,
    #[serde(serialize_with = "crate::io::serialize_cvec")]
    pub psi: CVec,
    /// Concurrence form of the pair before `v` (should vanish).
    pub form_before: Complex64,
    /// Concurrence form of the pair after `v`; its modulus is the capacity.
    pub form_after: Complex64,
    pub center: Complex64,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CapacityReport {
    pub n: usize,
    pub spectrum: ConcurrenceSpectrum,
    pub value: f64,
    pub maximal: bool,
    pub witness: CapacityWitness,
}

/// Maximum of `|sum beta_j lambda_j|` over `sum beta = 0`, `sum |beta| <= 1`,
/// which equals the radius of the smallest disk covering the points.
///
/// Returns the radius, the center and the optimal `beta`.
pub fn chebyshev_capacity(points: &[Complex64]) -> (f64, Complex64, Vec<Complex64>) {
    let mut beta = vec![ZERO; points.len()];
    let Some(circle) = smallest_enclosing_circle(points) else {
        return (0.0, ZERO, beta);
    };
    if circle.radius == 0.0 {
        return (0.0, circle.center, beta);
    }
    let (idx, w) = center_weights(points, &circle);
    let center: Complex64 = idx.iter().zip(&w).map(|(&i, &t)| points[i] * t).sum();
    for (&i, &t) in idx.iter().zip(&w) {
        beta[i] += (points[i] - center).conj() * (t / circle.radius);
    }
    (circle.radius, center, beta)
}

/// Pairwise concurrence capacity of `v` with achieving states.
pub fn capacity(v: &CMat, n: usize, tol: &Tolerances) -> Result<CapacityReport> {
    validated_qubits(v, n, tol)?;
    let f = ccd(v, n, tol)?;
    capacity_from_ccd(v, &f, tol)
}

pub fn capacity_from_ccd(v: &CMat, f: &CcdFactors, tol: &Tolerances) -> Result<CapacityReport> {
    let n = f.n;
    let dim = 1usize << n;
    let half = dim / 2;
    // Capacity points in slot order, matching the coefficient layout below.
    let slot_points: Vec<Complex64> = match f.parity {
        Parity::Even => f.a_squared_spectrum(),
        Parity::Odd => f.a_squared_spectrum()[..half].to_vec(),
    };
    let (value, center, beta) = chebyshev_capacity(&slot_points);

    let mut z1 = CVec::zeros(dim);
    let mut z2 = CVec::zeros(dim);
    if beta.iter().all(|b| *b == ZERO) {
        z1[0] = ONE;
        match f.parity {
            Parity::Even => z2[1] = ONE,
            Parity::Odd => z2[0] = ONE,
        }
    } else {
        for (j, b) in beta.iter().enumerate() {
            let r = b.norm().sqrt();
            if r == 0.0 {
                continue;
            }
            let unit = b / b.norm();
            match f.parity {
                Parity::Even => {
                    z1[j] = Complex64::new(r, 0.0);
                    z2[j] = unit * r;
                }
                Parity::Odd => {
                    z1[j] = Complex64::new(r, 0.0);
                    z2[half + j] = -unit * r;
                }
            }
        }
    }
    let basis = f.basis();
    let to_state = |z: &CVec| {
        let s = f.k2.adjoint() * (&basis * z);
        let norm = s.norm();
        s.unscale(norm)
    };
    let phi = to_state(&z1);
    let psi = to_state(&z2);
    let form_before = concurrence_form(&phi, &psi)?;
    let form_after = concurrence_form(&(v * &phi), &(v * &psi))?;
    let achieved: Complex64 = beta.iter().zip(&slot_points).map(|(b, l)| b * l).sum();

    let mut spectrum = spectrum_from_ccd(f);
    spectrum.n = n;
    let maximal = hull_contains_zero(spectrum.capacity_points(), tol.hull);
    Ok(CapacityReport {
        n,
        spectrum,
        value,
        maximal,
        witness: CapacityWitness {
            beta,
            achieved,
            phi,
            psi,
            form_before,
            form_after,
            center,
            value,
        },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub kappa_n: f64,
    pub kappa_n_plus_one: f64,
    pub holds: bool,
}

/// Compares `kappa_{n+1}(v (x) I_2)` with `kappa_n(v)`.
///
/// A violation beyond `TOL_MONO` is a bug, reported as a theorem violation.
pub fn capacity_monotonicity_check(v: &CMat, n: usize, tol: &Tolerances) -> Result<MonotonicityReport> {
    let small = capacity(v, n, tol)?.value;
    let big_v = kron_capped(v, &identity(2), tol.max_qubits)?;
    let big = capacity(&big_v, n + 1, tol)?.value;
    let holds = big >= small - TOL_MONO;
    if !holds {
        return Err(Error::TheoremViolation(format!(
            "capacity decreased under v -> v (x) I_2: {small} -> {big}"
        )));
    }
    Ok(MonotonicityReport {
        kappa_n: small,
        kappa_n_plus_one: big,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    /// Number of reduced spectrum points per sample (`N/2`).
    pub points_per_sample: usize,
    pub maximal: usize,
    pub fraction: f64,
    /// Binomial standard error `sqrt(f (1 - f) / samples)`.
    pub std_error: f64,
}

/// One Haar sample from the torus `A`: `N/2` phases, mean-subtracted so that
/// the doubled diagonal has determinant one. Returns the squared phases.
pub fn sample_reduced_spectrum<R: Rng + ?Sized>(half: usize, rng: &mut R) -> Vec<Complex64> {
    let phases: Vec<f64> = (0..half).map(|_| rng.random_range(0.0..TAU)).collect();
    let mean = phases.iter().sum::<f64>() / half as f64;
    phases
        .iter()
        .map(|p| Complex64::from_polar(1.0, 2.0 * (p - mean)))
        .collect()
}

/// Fraction of Haar-random `a` in `A` with maximal capacity, odd `n`.
///
/// Sample `i` draws from stream `i` of `seed`, so the result does not depend
/// on the thread count.
pub fn maximal_capacity_fraction(n: usize, samples: usize, seed: u64, tol_hull: f64) -> Result<MonteCarloReport> {
    if n.is_multiple_of(2) {
        return Err(Error::Parity {
            what: "maximal-capacity fraction",
            expected: "an odd",
            n,
        });
    }
    if samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    if n > 20 {
        return Err(Error::TooManyQubits { qubits: n, max: 20 });
    }
    let half = 1usize << (n - 1);
    let maximal = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = task_rng(seed, i as u64);
            let pts = sample_reduced_spectrum(half, &mut rng);
            hull_contains_zero(&pts, tol_hull)
        })
        .filter(|&m| m)
        .count();
    let fraction = maximal as f64 / samples as f64;
    Ok(MonteCarloReport {
        n,
        samples,
        seed,
        points_per_sample: half,
        maximal,
        fraction,
        std_error: (fraction * (1.0 - fraction) / samples as f64).sqrt(),
    })
}

/// Probability that `m` i.i.d. uniform points on the circle have 0 in their
/// convex hull: `1 - m 2^{1-m}`.
pub fn half_plane_fraction(m: usize) -> f64 {
    1.0 - m as f64 * 2f64.powi(1 - m as i32)
}
