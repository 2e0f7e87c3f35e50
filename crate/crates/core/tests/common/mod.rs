//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use ccd_lab::linalg::{kron, pauli_sum, CMat, PauliString};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, TAU};

pub fn cphase(t: f64) -> CMat {
    let e = |x: f64| Complex64::from_polar(1.0, x);
    ccd_lab::linalg::diag(&[e(-t), e(-t), e(-t), e(3.0 * t)])
}

fn objective(pts: &[Complex64], idx: [usize; 3], phi: f64, delta: f64) -> f64 {
    let bi = Complex64::new(phi.cos(), 0.0);
    let bj = Complex64::from_polar(phi.sin(), delta);
    let bk = -bi - bj;
    let l1 = bi.norm() + bj.norm() + bk.norm();
    (bi * pts[idx[0]] + bj * pts[idx[1]] + bk * pts[idx[2]]).norm() / l1
}

/// `max |sum beta_j lambda_j|` over `sum beta = 0`, `sum |beta| <= 1`.
///
/// Extreme points of the feasible set are supported on at most three
/// indices, so it is enough to scan pairs exactly and every triple over the
/// two free parameters of `beta` (ratio angle and relative phase), refining
/// the best grid cell by repeated zooming.
pub fn capacity_oracle(pts: &[Complex64]) -> f64 {
    let m = pts.len();
    let mut best: f64 = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            best = best.max((pts[i] - pts[j]).norm() / 2.0);
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                for idx in [[i, j, k], [j, k, i], [k, i, j]] {
                    best = best.max(zoom(pts, idx));
                }
            }
        }
    }
    best
}

fn zoom(pts: &[Complex64], idx: [usize; 3]) -> f64 {
    let (gp, gd) = (48, 96);
    let mut best = (0.0, 0.0, 0.0);
    for a in 0..=gp {
        for b in 0..gd {
            let (phi, delta) = (FRAC_PI_2 * a as f64 / gp as f64, TAU * b as f64 / gd as f64);
            let f = objective(pts, idx, phi, delta);
            if f > best.0 {
                best = (f, phi, delta);
            }
        }
    }
    let (mut wp, mut wd) = (FRAC_PI_2 / gp as f64, TAU / gd as f64);
    for _ in 0..40 {
        let (_, p0, d0) = best;
        for a in -8..=8 {
            for b in -8..=8 {
                let phi = (p0 + wp * a as f64 / 8.0).clamp(0.0, FRAC_PI_2);
                let delta = d0 + wd * b as f64 / 8.0;
                let f = objective(pts, idx, phi, delta);
                if f > best.0 {
                    best = (f, phi, delta);
                }
            }
        }
        wp *= 0.5;
        wd *= 0.5;
    }
    best.0
}

/// Spin-flip matrix assembled from single-qubit factors.
pub fn spin_flip_by_kron(n: usize) -> CMat {
    let y = CMat::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    );
    (1..n).fold(y.clone(), |acc, _| kron(&acc, &y).unwrap())
}

/// Periodic XY chain in a field from Pauli strings, for cross-checking the
/// direct builder.
pub fn xy_field_by_paulis(n: usize, j: f64, g: f64, h: f64) -> CMat {
    let mut terms = Vec::new();
    for a in 0..n {
        let b = (a + 1) % n;
        for (p, c) in [('X', j * (1.0 + g) / 4.0), ('Y', j * (1.0 - g) / 4.0)] {
            let mut s = vec!['I'; n];
            s[a] = p;
            s[b] = p;
            terms.push((s.iter().collect::<String>().parse::<PauliString>().unwrap(), c));
        }
        let mut s = vec!['I'; n];
        s[a] = 'Z';
        terms.push((s.iter().collect::<String>().parse::<PauliString>().unwrap(), h / 2.0));
    }
    pauli_sum(n, &terms)
}

/// Lowest energy inside the `S_z = s` sector, by restricting to the basis
/// states with that magnetization.
pub fn sector_ground_energy(h: &CMat, n: usize, s: i32) -> Option<f64> {
    let idx: Vec<usize> = (0..1usize << n)
        .filter(|j| n as i32 - 2 * j.count_ones() as i32 == s)
        .collect();
    if idx.is_empty() {
        return None;
    }
    let block = CMat::from_fn(idx.len(), idx.len(), |r, c| h[(idx[r], idx[c])]);
    let e = nalgebra::SymmetricEigen::new(block).eigenvalues;
    e.iter().copied().reduce(f64::min)
}
