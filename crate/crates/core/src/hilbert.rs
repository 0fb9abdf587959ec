//! Tensor-product state storage and per-rotor changes of basis.
//!
//! Amplitudes of an `N`-rotor state live in one flat array of length `L^N`
//! with rotor 1 varying slowest: the flat index of the multi-index
//! `(k_1, ..., k_N)` is `Σ k_i L^(N−i)`. Storage index `k` on a rotor axis
//! maps to the momentum quantum number `n = k − L/2`, so `n` runs over
//! `{−L/2, ..., L/2 − 1}`; in position representation it maps to the node
//! `x_k = 2πk/L`.
//!
//! The change of basis is the symmetric unitary DFT
//!
//! ```text
//! ψ(x_j) = L^(−1/2) Σ_n c(n) exp(+i n x_j)
//! c(n)   = L^(−1/2) Σ_j ψ(x_j) exp(−i n x_j)
//! ```
//!
//! applied independently along every rotor axis.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::model::SystemConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    Momentum,
    Position,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    MomentumToPosition,
    PositionToMomentum,
}

impl Direction {
    fn source(self) -> Representation {
        match self {
            Direction::MomentumToPosition => Representation::Momentum,
            Direction::PositionToMomentum => Representation::Position,
        }
    }

    fn target(self) -> Representation {
        match self {
            Direction::MomentumToPosition => Representation::Position,
            Direction::PositionToMomentum => Representation::Momentum,
        }
    }
}

/// Momentum and position grids of one rotor axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub len: usize,
}

impl Grid {
    pub fn new(len: usize) -> Self {
        Grid { len }
    }

    /// Momentum quantum number `n` stored at index `k`.
    #[inline]
    pub fn momentum_index(&self, k: usize) -> i64 {
        k as i64 - (self.len / 2) as i64
    }

    /// Storage index of momentum quantum number `n`, if it is on the grid.
    pub fn storage_index(&self, n: i64) -> Option<usize> {
        let k = n + (self.len / 2) as i64;
        (k >= 0 && (k as usize) < self.len).then_some(k as usize)
    }

    #[inline]
    pub fn position(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.len as f64
    }

    pub fn momenta(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.len).map(|k| self.momentum_index(k))
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|j| self.position(j))
    }

    /// Width of the band at each end of the grid watched by the edge guard.
    pub fn edge_width(&self) -> usize {
        (self.len / 16).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    rotors: usize,
    basis: usize,
    representation: Representation,
}

impl StateVector {
    pub fn from_amplitudes(
        rotors: usize,
        basis: usize,
        representation: Representation,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        let expected = (0..rotors).try_fold(1usize, |acc, _| acc.checked_mul(basis));
        if rotors == 0 || expected != Some(amplitudes.len()) {
            return Err(Error::Usage(format!(
                "{} amplitudes do not form a {rotors}-rotor state with {basis} states per rotor",
                amplitudes.len()
            )));
        }
        Ok(StateVector {
            amplitudes,
            rotors,
            basis,
            representation,
        })
    }

    /// `|n_1 = 0⟩ ⊗ ... ⊗ |n_N = 0⟩`.
    pub fn zero_momentum_product(rotors: usize, basis: usize) -> Self {
        let dim = basis.pow(rotors as u32);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        let center = basis / 2;
        let flat = (0..rotors).fold(0usize, |acc, _| acc * basis + center);
        amplitudes[flat] = Complex64::new(1.0, 0.0);
        StateVector {
            amplitudes,
            rotors,
            basis,
            representation: Representation::Momentum,
        }
    }

    pub fn rotors(&self) -> usize {
        self.rotors
    }

    pub fn basis(&self) -> usize {
        self.basis
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.basis)
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Flat index of a multi-index of storage indices.
    pub fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.rotors);
        index.iter().fold(0, |acc, &k| acc * self.basis + k)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.amplitudes.iter_mut().for_each(|c| *c *= inv);
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Marginal probability distribution of one rotor (0-based) over its
    /// storage indices.
    pub fn marginal(&self, rotor: usize) -> Vec<f64> {
        let l = self.basis;
        let stride = l.pow((self.rotors - 1 - rotor) as u32);
        let mut out = vec![0.0; l];
        for (flat, c) in self.amplitudes.iter().enumerate() {
            out[(flat / stride) % l] += c.norm_sqr();
        }
        out
    }

    /// Probability in the outer `L/16` band at either end of each rotor's
    /// grid.
    pub fn edge_weights(&self) -> Vec<f64> {
        let width = self.grid().edge_width();
        let l = self.basis;
        (0..self.rotors)
            .map(|rotor| {
                let marginal = self.marginal(rotor);
                marginal[..width].iter().sum::<f64>() + marginal[l - width..].iter().sum::<f64>()
            })
            .collect()
    }

    /// Reshape as the `L × L^(N−1)` matrix with rotor 1 as the row index.
    pub fn bipartition_matrix(&self) -> Result<BipartitionMatrix<'_>> {
        if self.rotors < 2 {
            return Err(Error::Usage(
                "a single rotor has no bipartition".to_string(),
            ));
        }
        if self.representation != Representation::Momentum {
            return Err(Error::Usage(
                "bipartition requires the momentum representation".to_string(),
            ));
        }
        Ok(BipartitionMatrix {
            data: &self.amplitudes,
            rows: self.basis,
            cols: self.amplitudes.len() / self.basis,
        })
    }
}

/// Row-major view of a state as a rotor-1-by-rest matrix.
#[derive(Debug, Clone, Copy)]
pub struct BipartitionMatrix<'a> {
    data: &'a [Complex64],
    rows: usize,
    cols: usize,
}

impl<'a> BipartitionMatrix<'a> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &'a [Complex64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    /// `ρ₁ = M M†` as a dense row-major `L × L` matrix.
    pub fn reduced_density(&self) -> Vec<Complex64> {
        let mut rho = vec![Complex64::new(0.0, 0.0); self.rows * self.rows];
        for i in 0..self.rows {
            let ri = self.row(i);
            for j in i..self.rows {
                let rj = self.row(j);
                let v: Complex64 = ri.iter().zip(rj).map(|(a, b)| a * b.conj()).sum();
                rho[i * self.rows + j] = v;
                rho[j * self.rows + i] = v.conj();
            }
        }
        rho
    }
}

/// Cached FFT plans for transforming every axis of states with a fixed
/// grid length.
pub struct SpectralTransform {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    twist: Vec<f64>,
    scratch: Vec<Complex64>,
    lines: Vec<Complex64>,
}

/// Columns gathered per batch when transforming a strided axis.
const BATCH: usize = 64;

impl SpectralTransform {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let scale = 1.0 / (len as f64).sqrt();
        // (−1)^j from the half-grid momentum offset, folded with the unitary scale.
        let twist = (0..len)
            .map(|j| if j % 2 == 0 { scale } else { -scale })
            .collect();
        SpectralTransform {
            len,
            forward,
            inverse,
            twist,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            lines: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn apply(&mut self, state: &mut StateVector, direction: Direction) -> Result<()> {
        if state.representation != direction.source() {
            return Err(Error::Usage(format!(
                "state is in {:?} representation, {:?} needs {:?}",
                state.representation,
                direction,
                direction.source()
            )));
        }
        if state.basis != self.len {
            return Err(Error::Usage(format!(
                "transform planned for {} points, state has {}",
                self.len, state.basis
            )));
        }
        for axis in 0..state.rotors {
            self.transform_axis(state, axis, direction);
        }
        state.representation = direction.target();
        Ok(())
    }

    fn transform_line_batch(&mut self, buf: &mut [Complex64], direction: Direction) {
        let l = self.len;
        match direction {
            Direction::MomentumToPosition => {
                self.inverse.process_with_scratch(buf, &mut self.scratch);
                for line in buf.chunks_exact_mut(l) {
                    for (c, &w) in line.iter_mut().zip(&self.twist) {
                        *c *= w;
                    }
                }
            }
            Direction::PositionToMomentum => {
                for line in buf.chunks_exact_mut(l) {
                    for (c, &w) in line.iter_mut().zip(&self.twist) {
                        *c *= w;
                    }
                }
                self.forward.process_with_scratch(buf, &mut self.scratch);
            }
        }
    }

    fn transform_axis(&mut self, state: &mut StateVector, axis: usize, direction: Direction) {
        let l = self.len;
        let stride = l.pow((state.rotors - 1 - axis) as u32);
        if stride == 1 {
            self.transform_line_batch(&mut state.amplitudes, direction);
            return;
        }
        let block = l * stride;
        let mut lines = std::mem::take(&mut self.lines);
        lines.resize(BATCH * l, Complex64::new(0.0, 0.0));
        for base in (0..state.amplitudes.len()).step_by(block) {
            let data = &mut state.amplitudes[base..base + block];
            for start in (0..stride).step_by(BATCH) {
                let width = BATCH.min(stride - start);
                let buf = &mut lines[..width * l];
                for k in 0..l {
                    let row = &data[k * stride + start..k * stride + start + width];
                    for (c, &v) in row.iter().enumerate() {
                        buf[c * l + k] = v;
                    }
                }
                self.transform_line_batch(buf, direction);
                for k in 0..l {
                    let row = &mut data[k * stride + start..k * stride + start + width];
                    for (c, v) in row.iter_mut().enumerate() {
                        *v = buf[c * l + k];
                    }
                }
            }
        }
        self.lines = lines;
    }
}

/// One-shot change of basis; plans a fresh transform.
pub fn axis_dft(state: &StateVector, direction: Direction) -> Result<StateVector> {
    let mut out = state.clone();
    SpectralTransform::new(state.basis).apply(&mut out, direction)?;
    Ok(out)
}

pub fn zero_momentum_product_state(config: &SystemConfig) -> StateVector {
    StateVector::zero_momentum_product(config.num_rotors(), config.basis_size)
}

const DUMP_MAGIC: &[u8; 4] = b"QKRS";

/// Binary dump: magic `QKRS`, then little-endian `u32` rotor count, `u64`
/// basis size, `u8` representation (0 momentum, 1 position), `u64` kick
/// index, followed by `L^N` interleaved `(re, im)` `f64` pairs in storage
/// order.
pub fn write_dump<W: Write>(mut w: W, state: &StateVector, kick: u64) -> std::io::Result<()> {
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&(state.rotors as u32).to_le_bytes())?;
    w.write_all(&(state.basis as u64).to_le_bytes())?;
    let repr: u8 = match state.representation {
        Representation::Momentum => 0,
        Representation::Position => 1,
    };
    w.write_all(&[repr])?;
    w.write_all(&kick.to_le_bytes())?;
    for c in &state.amplitudes {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

/// Inverse of [`write_dump`]; returns the state and its kick index.
pub fn read_dump<R: Read>(mut r: R) -> Result<(StateVector, u64)> {
    let bad = |msg: &str| Error::Usage(format!("malformed state dump: {msg}"));
    let io = |e: std::io::Error| bad(&e.to_string());
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != DUMP_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4).map_err(io)?;
    let rotors = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8).map_err(io)?;
    let basis = u64::from_le_bytes(b8) as usize;
    let mut b1 = [0u8; 1];
    r.read_exact(&mut b1).map_err(io)?;
    let representation = match b1[0] {
        0 => Representation::Momentum,
        1 => Representation::Position,
        _ => return Err(bad("unknown representation tag")),
    };
    r.read_exact(&mut b8).map_err(io)?;
    let kick = u64::from_le_bytes(b8);
    let dim = (0..rotors)
        .try_fold(1usize, |acc, _| acc.checked_mul(basis))
        .ok_or_else(|| bad("dimension overflow"))?;
    let mut amplitudes = Vec::with_capacity(dim);
    for _ in 0..dim {
        r.read_exact(&mut b8).map_err(io)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8).map_err(io)?;
        let im = f64::from_le_bytes(b8);
        amplitudes.push(Complex64::new(re, im));
    }
    let state = StateVector::from_amplitudes(rotors, basis, representation, amplitudes)?;
    Ok((state, kick))
}
