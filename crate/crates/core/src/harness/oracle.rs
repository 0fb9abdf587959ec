//! Brute-force reference for small two-rotor systems.
//!
//! Nothing here goes through the engine's transform or phase tables: the
//! DFT is a dense matrix built by direct summation, the diagonal factors are
//! re-evaluated from the Hamiltonian, and the one-period map is assembled
//! column by column as an explicit `L² × L²` unitary.

use std::f64::consts::PI;

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::Serialize;

use crate::entanglement::{schmidt_spectrum, SchmidtSpectrum};
use crate::error::{Error, Result};
use crate::evolution::Simulation;
use crate::hilbert::{Representation, StateVector};
use crate::model::{InteractionKind, SystemConfig};

pub const MAX_ORACLE_BASIS: usize = 16;

/// Largest deviations between the engine and the dense oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub steps: usize,
    pub basis_size: usize,
    /// `max_t max_k |ψ_engine − ψ_oracle|`.
    pub state_deviation: f64,
    pub von_neumann_deviation: f64,
    pub linear_entropy_deviation: f64,
    /// `max |U†U − 1|` of the dense step matrix.
    pub unitarity_deviation: f64,
    /// `max |U − 1|`; zero when the step is the identity.
    pub identity_deviation: f64,
}

/// Spectrum of `ρ_1` from a dense Hermitian eigensolve, for checking the
/// SVD path.
pub fn dense_reduced_spectrum(state: &StateVector) -> Result<SchmidtSpectrum> {
    if state.rotors() < 2 || state.representation() != Representation::Momentum {
        return Err(Error::Usage(
            "dense reduced spectrum needs a momentum state of two or more rotors".to_string(),
        ));
    }
    let rows = state.basis();
    let cols = state.len() / rows;
    let psi = state.amplitudes();
    let rho = Mat::<Complex64>::from_fn(rows, rows, |a, b| {
        let (ra, rb) = (&psi[a * cols..(a + 1) * cols], &psi[b * cols..(b + 1) * cols]);
        ra.iter().zip(rb).map(|(x, y)| x * y.conj()).sum()
    });
    let eig = rho
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Domain(format!("eigensolver failed: {e:?}")))?;
    Ok(SchmidtSpectrum::from_eigenvalues(eig, 0))
}

fn expi(theta: f64) -> Complex64 {
    Complex64::new(theta.cos(), theta.sin())
}

/// Dense step matrix, column-major over momentum storage indices
/// `k_1 L + k_2`.
pub fn dense_step_matrix(config: &SystemConfig) -> Result<Vec<Complex64>> {
    if config.num_rotors() != 2 || config.basis_size > MAX_ORACLE_BASIS {
        return Err(Error::Usage(format!(
            "dense oracle supports N = 2 and L <= {MAX_ORACLE_BASIS}, got N = {}, L = {}",
            config.num_rotors(),
            config.basis_size
        )));
    }
    config.validate().into_result()?;
    let l = config.basis_size;
    let res = &config.resonance;
    let hbar = 4.0 * PI * res.r as f64 / (res.s as f64 * (res.period + res.detuning));
    let x: Vec<f64> = (0..l).map(|j| 2.0 * PI * j as f64 / l as f64).collect();
    let n: Vec<f64> = (0..l).map(|k| k as f64 - (l / 2) as f64).collect();

    // F[j][k] = exp(i n_k x_j) / sqrt(L)
    let norm = 1.0 / (l as f64).sqrt();
    let f: Vec<Vec<Complex64>> = x
        .iter()
        .map(|&xj| n.iter().map(|&nk| expi(nk * xj) * norm).collect())
        .collect();

    let (r1, r2) = (&config.rotors[0], &config.rotors[1]);
    let k = match config.interaction.kind {
        InteractionKind::None => 0.0,
        _ => config.interaction.strength,
    };
    let mut diag = vec![Complex64::new(0.0, 0.0); l * l];
    for j1 in 0..l {
        for j2 in 0..l {
            let coupling = match config.interaction.kind {
                InteractionKind::AllToAll => (x[j1] + x[j2]).cos(),
                InteractionKind::NearestNeighbor => (x[j1] - x[j2]).cos(),
                InteractionKind::None => 0.0,
            };
            let v = k * coupling
                + r1.kick_strength * (x[j1] + r1.kick_phase).cos()
                + r2.kick_strength * (x[j2] + r2.kick_phase).cos();
            diag[j1 * l + j2] = expi(-v / hbar);
        }
    }
    let free: Vec<Complex64> = (0..l * l)
        .map(|idx| {
            let (n1, n2) = (n[idx / l], n[idx % l]);
            let e = (r1.tau as f64 * n1 * n1 + r2.tau as f64 * n2 * n2) * hbar * res.period / 2.0;
            expi(-e)
        })
        .collect();

    let dim = l * l;
    let mut u = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut psi_x = vec![Complex64::new(0.0, 0.0); dim];
    for col in 0..dim {
        let (k1, k2) = (col / l, col % l);
        for j1 in 0..l {
            for j2 in 0..l {
                psi_x[j1 * l + j2] = f[j1][k1] * f[j2][k2] * diag[j1 * l + j2];
            }
        }
        for m1 in 0..l {
            for m2 in 0..l {
                let mut acc = Complex64::new(0.0, 0.0);
                for j1 in 0..l {
                    for j2 in 0..l {
                        acc += f[j1][m1].conj() * f[j2][m2].conj() * psi_x[j1 * l + j2];
                    }
                }
                let row = m1 * l + m2;
                u[col * dim + row] = free[row] * acc;
            }
        }
    }
    Ok(u)
}

fn apply(u: &[Complex64], psi: &[Complex64]) -> Vec<Complex64> {
    let dim = psi.len();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for (col, &c) in psi.iter().enumerate() {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (o, &m) in out.iter_mut().zip(&u[col * dim..(col + 1) * dim]) {
            *o += m * c;
        }
    }
    out
}

/// Evolve `steps` periods with both the engine and the dense matrix and
/// report the largest deviations.
pub fn dense_oracle(config: &SystemConfig, steps: usize) -> Result<OracleReport> {
    let u = dense_step_matrix(config)?;
    let l = config.basis_size;
    let dim = l * l;

    let mut unitarity: f64 = 0.0;
    let mut identity: f64 = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            let g: Complex64 = (0..dim)
                .map(|r| u[a * dim + r].conj() * u[b * dim + r])
                .sum();
            let delta = if a == b { 1.0 } else { 0.0 };
            unitarity = unitarity.max((g - delta).norm());
            identity = identity.max((u[b * dim + a] - delta).norm());
        }
    }

    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    psi[(l / 2) * l + l / 2] = Complex64::new(1.0, 0.0);
    let mut sim = Simulation::new(config)?;
    let mut report = OracleReport {
        steps,
        basis_size: l,
        state_deviation: 0.0,
        von_neumann_deviation: 0.0,
        linear_entropy_deviation: 0.0,
        unitarity_deviation: unitarity,
        identity_deviation: identity,
    };
    for _ in 0..steps {
        psi = apply(&u, &psi);
        sim.step()?;
        let engine = sim.state();
        let dev = engine
            .amplitudes()
            .iter()
            .zip(&psi)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        report.state_deviation = report.state_deviation.max(dev);

        let oracle_state = StateVector::from_amplitudes(2, l, Representation::Momentum, psi.clone())?;
        let dense = dense_reduced_spectrum(&oracle_state)?;
        let fast = schmidt_spectrum(engine)?;
        report.von_neumann_deviation = report
            .von_neumann_deviation
            .max((dense.von_neumann() - fast.von_neumann()).abs());
        report.linear_entropy_deviation = report
            .linear_entropy_deviation
            .max((dense.linear_entropy() - fast.linear_entropy()).abs());
    }
    Ok(report)
}
