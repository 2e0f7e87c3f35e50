//! Input resolution: matrix files, seeded random draws and named examples.

use std::f64::consts::FRAC_PI_4;

use ccd_lab::io::read_matrix;
use ccd_lab::linalg::{diag, exp_i_hermitian, frob, random_special_unitary, task_rng, CMat, CVec, ONE};
use ccd_lab::spinchain::{build_hamiltonian_capped, SpinChainSpec};
use ccd_lab::spinflip::{ghz_state, w_state};
use ccd_lab::symplectic::SkewSymmetricHamiltonian;
use ccd_lab::Tolerances;
use num_complex::Complex64;

use crate::args::{parse_grid, Example, Family, Opts};
use crate::CliError;

pub enum Object {
    Unitary { n: usize, matrix: CMat },
    State { n: usize, vector: CVec },
    Hamiltonian { n: usize, matrix: CMat, t: f64 },
}

impl Object {
    /// The unitary this object stands for; Hamiltonians evolve for time `t`.
    pub fn into_unitary(self, tol: &Tolerances) -> Result<(usize, CMat), CliError> {
        match self {
            Object::Unitary { n, matrix } => Ok((n, matrix)),
            Object::Hamiltonian { n, matrix, t } => {
                let u = exp_i_hermitian(&matrix, -t, tol.herm * frob(&matrix).max(1.0))?;
                Ok((n, u))
            }
            Object::State { .. } => Err(CliError::Input("this command needs a unitary, not a state".into())),
        }
    }
}

pub fn tolerances(o: &Opts) -> Tolerances {
    Tolerances {
        herm: o.tol_unitary,
        unitary: o.tol_unitary,
        cluster: o.tol_cluster,
        hull: o.tol_hull,
        ..Tolerances::default()
    }
}

pub fn times(o: &Opts) -> Result<Vec<f64>, CliError> {
    match &o.t {
        Some(s) => parse_grid(s).map_err(CliError::Input),
        None => Ok(vec![FRAC_PI_4]),
    }
}

pub fn single_time(o: &Opts) -> Result<f64, CliError> {
    let ts = times(o)?;
    match ts.as_slice() {
        [t] => Ok(*t),
        _ => Err(CliError::Input("this command takes a single --t value".into())),
    }
}

pub fn cphase(t: f64) -> CMat {
    let e = |x: f64| Complex64::from_polar(1.0, x);
    diag(&[e(-t), e(-t), e(-t), e(3.0 * t)])
}

pub fn cnot() -> CMat {
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

fn fixed_n(o: &Opts, name: &str, n: usize) -> Result<usize, CliError> {
    match o.n {
        Some(k) if k != n => Err(CliError::Input(format!("example {name} has n = {n}, got --n {k}"))),
        _ => Ok(n),
    }
}

pub fn chain_spec(family: Family, n: usize, o: &Opts, h_z: f64) -> SpinChainSpec {
    let j = o.jz;
    match family {
        Family::Xxx => SpinChainSpec::xxx(n, j),
        Family::Xy => SpinChainSpec::xy(n, j),
        Family::Xyz => SpinChainSpec::xyz(n, o.jx.unwrap_or(j), o.jy.unwrap_or(j), j),
        Family::Ising => SpinChainSpec::ising(n, j),
        Family::XyField => SpinChainSpec::xy_field(n, j, o.g, h_z),
    }
}

pub fn chain_hamiltonian(family: Family, n: usize, o: &Opts, h_z: f64, tol: &Tolerances) -> Result<CMat, CliError> {
    Ok(build_hamiltonian_capped(&chain_spec(family, n, o, h_z), tol.max_qubits)?)
}

fn example(e: Example, o: &Opts, tol: &Tolerances) -> Result<Object, CliError> {
    Ok(match e {
        Example::Cphase => Object::Unitary {
            n: fixed_n(o, "cphase", 2)?,
            matrix: cphase(single_time(o)?),
        },
        Example::Cnot => Object::Unitary {
            n: fixed_n(o, "cnot", 2)?,
            matrix: cnot(),
        },
        Example::Ghz => {
            let n = o.n.unwrap_or(3);
            check_n(n, tol)?;
            Object::State { n, vector: ghz_state(n) }
        }
        Example::W => {
            let n = o.n.unwrap_or(3);
            check_n(n, tol)?;
            Object::State { n, vector: w_state(n) }
        }
        Example::W4 => Object::State {
            n: fixed_n(o, "w4", 4)?,
            vector: w_state(4),
        },
        Example::Xxx | Example::Xy | Example::Ising => {
            let family = match e {
                Example::Xxx => Family::Xxx,
                Example::Xy => Family::Xy,
                _ => Family::Ising,
            };
            let n = o.n.unwrap_or(4);
            Object::Hamiltonian {
                n,
                matrix: chain_hamiltonian(family, n, o, 0.0, tol)?,
                t: single_time(o)?,
            }
        }
    })
}

fn check_n(n: usize, tol: &Tolerances) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Input("--n must be at least 1".into()));
    }
    if n > tol.max_qubits {
        return Err(CliError::Input(format!("--n {n} exceeds the cap of {} qubits", tol.max_qubits)));
    }
    Ok(())
}

/// Resolves exactly one of --input, --random and --example.
pub fn resolve(o: &Opts, tol: &Tolerances) -> Result<Object, CliError> {
    let given = [o.input.is_some(), o.random, o.example.is_some()].iter().filter(|&&b| b).count();
    if given != 1 {
        return Err(CliError::Input("give exactly one of --input, --random, --example".into()));
    }
    if let Some(path) = &o.input {
        let (n, m) = read_matrix(path, tol.max_qubits)?;
        if let Some(k) = o.n {
            if k != n {
                return Err(CliError::Input(format!("--n {k} does not match the file (n = {n})")));
            }
        }
        return Ok(Object::Unitary { n, matrix: m });
    }
    if o.random {
        let n = o.n.ok_or_else(|| CliError::Input("--random needs --n".into()))?;
        check_n(n, tol)?;
        return Ok(Object::Unitary {
            n,
            matrix: random_special_unitary(1 << n, o.seed)?,
        });
    }
    example(o.example.expect("counted above"), o, tol)
}

/// Hamiltonian for the symmetric-eigensolver command.
pub fn skew_hamiltonian(o: &Opts, tol: &Tolerances) -> Result<SkewSymmetricHamiltonian, CliError> {
    if let Some(path) = &o.input {
        let (_, h) = read_matrix(path, tol.max_qubits)?;
        return Ok(SkewSymmetricHamiltonian::from_full(&h, tol.herm * frob(&h).max(1.0))?);
    }
    let ell = match (o.ell, o.n) {
        (Some(l), _) => l,
        (None, Some(n)) if n >= 1 => 1usize << (n - 1),
        _ => return Err(CliError::Input("symeig needs --input, --ell or --n".into())),
    };
    if ell == 0 || ell > 1 << 11 {
        return Err(CliError::Input(format!("--ell {ell} out of range")));
    }
    let mut rng = task_rng(o.seed, 0);
    Ok(SkewSymmetricHamiltonian::random(ell, &mut rng))
}
