//! Schmidt spectrum of the rotor-1-versus-rest cut and the entropies built
//! on it.

use std::io::Write;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::StateVector;

/// Rows or columns of the bipartition matrix carrying less probability than
/// this are dropped before the SVD. The induced change in `ρ₁` is bounded by
/// `sqrt(ROW_CUTOFF)` entrywise.
const ROW_CUTOFF: f64 = 1e-28;

/// Eigenvalues below this are treated as exact zeros.
pub const EIGEN_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchmidtSpectrum {
    /// Descending, non-negative; length `min(L, L^(N−1))`.
    pub eigenvalues: Vec<f64>,
    pub kick_index: usize,
}

impl SchmidtSpectrum {
    /// Sort descending and clamp values below [`EIGEN_FLOOR`] to zero.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>, kick_index: usize) -> Self {
        for v in eigenvalues.iter_mut() {
            if *v < EIGEN_FLOOR {
                *v = 0.0;
            }
        }
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        SchmidtSpectrum {
            eigenvalues,
            kick_index,
        }
    }

    pub fn von_neumann(&self) -> f64 {
        von_neumann(self)
    }

    pub fn purity(&self) -> f64 {
        purity(self)
    }

    pub fn linear_entropy(&self) -> f64 {
        linear_entropy(self)
    }

    pub fn one_minus_lambda1(&self) -> f64 {
        one_minus_lambda1(self)
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// The `k` largest eigenvalues, zero-padded.
    pub fn top(&self, k: usize) -> Vec<f64> {
        (0..k)
            .map(|i| self.eigenvalues.get(i).copied().unwrap_or(0.0))
            .collect()
    }
}

/// Squared singular values of the rotor-1-by-rest matrix.
pub fn schmidt_spectrum(state: &StateVector) -> Result<SchmidtSpectrum> {
    schmidt_spectrum_at(state, 0)
}

pub fn schmidt_spectrum_at(state: &StateVector, kick_index: usize) -> Result<SchmidtSpectrum> {
    let m = state.bipartition_matrix()?;
    let full_len = m.rows().min(m.cols());

    let mut col_weight = vec![0.0; m.cols()];
    let mut rows = Vec::new();
    for i in 0..m.rows() {
        let row = m.row(i);
        let mut w = 0.0;
        for (acc, c) in col_weight.iter_mut().zip(row) {
            let p = c.norm_sqr();
            *acc += p;
            w += p;
        }
        if w > ROW_CUTOFF {
            rows.push(i);
        }
    }
    let cols: Vec<usize> = (0..m.cols()).filter(|&j| col_weight[j] > ROW_CUTOFF).collect();

    let mut eigenvalues = if rows.is_empty() || cols.is_empty() {
        Vec::new()
    } else {
        let sub = Mat::<Complex64>::from_fn(rows.len(), cols.len(), |i, j| m.get(rows[i], cols[j]));
        sub.singular_values()
            .map_err(|e| Error::Domain(format!("SVD did not converge: {e:?}")))?
            .into_iter()
            .map(|s| s * s)
            .collect()
    };
    eigenvalues.resize(full_len, 0.0);
    Ok(SchmidtSpectrum::from_eigenvalues(eigenvalues, kick_index))
}

fn positive(spectrum: &SchmidtSpectrum) -> impl Iterator<Item = f64> + '_ {
    spectrum.eigenvalues.iter().copied().filter(|&l| l > 0.0)
}

/// `−Σ λ ln λ`, with `0 ln 0 = 0`.
pub fn von_neumann(spectrum: &SchmidtSpectrum) -> f64 {
    let s: f64 = positive(spectrum).map(|l| -l * l.ln()).sum();
    s.max(0.0)
}

/// `Σ λ²`.
pub fn purity(spectrum: &SchmidtSpectrum) -> f64 {
    positive(spectrum).map(|l| l * l).sum()
}

/// `1 − Σ λ²`.
pub fn linear_entropy(spectrum: &SchmidtSpectrum) -> f64 {
    1.0 - purity(spectrum)
}

pub fn one_minus_lambda1(spectrum: &SchmidtSpectrum) -> f64 {
    1.0 - spectrum.largest()
}

/// One row of an [`EntanglementTrace`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub t: usize,
    pub s_vn: f64,
    pub s_lin: f64,
    pub purity: f64,
    /// Leading Schmidt eigenvalues, descending.
    pub top: Vec<f64>,
    pub energy: f64,
}

impl TraceRecord {
    /// Entanglement observables of `state` at kick `t`. A single rotor has
    /// no partner, so its record is that of a product state.
    pub fn from_state(t: usize, state: &StateVector, top_k: usize, energy: f64) -> Result<Self> {
        let spectrum = if state.rotors() < 2 {
            SchmidtSpectrum::from_eigenvalues(vec![1.0], t)
        } else {
            schmidt_spectrum_at(state, t)?
        };
        Ok(Self::from_spectrum(&spectrum, top_k, energy))
    }

    pub fn from_spectrum(spectrum: &SchmidtSpectrum, top_k: usize, energy: f64) -> Self {
        let purity = purity(spectrum);
        TraceRecord {
            t: spectrum.kick_index,
            s_vn: von_neumann(spectrum),
            s_lin: 1.0 - purity,
            purity,
            top: spectrum.top(top_k),
            energy,
        }
    }

    pub fn one_minus_lambda1(&self) -> f64 {
        1.0 - self.top.first().copied().unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementTrace {
    pub top_k: usize,
    pub records: Vec<TraceRecord>,
    /// First kick at which the momentum-edge guard tripped.
    pub edge_trip: Option<usize>,
}

impl EntanglementTrace {
    pub fn new(top_k: usize) -> Self {
        EntanglementTrace {
            top_k,
            records: Vec::new(),
            edge_trip: None,
        }
    }

    pub fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t as f64).collect()
    }

    pub fn s_vn(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.s_vn).collect()
    }

    pub fn s_lin(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.s_lin).collect()
    }

    pub fn one_minus_lambda1(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.one_minus_lambda1()).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.energy).collect()
    }

    /// Records strictly before the edge guard tripped (all of them if it
    /// never did).
    pub fn clean_records(&self) -> &[TraceRecord] {
        match self.edge_trip {
            Some(kick) => {
                let end = self.records.iter().position(|r| r.t >= kick).unwrap_or(self.records.len());
                &self.records[..end]
            }
            None => &self.records,
        }
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut header = vec!["t".to_string(), "S_vN".into(), "S_lin".into(), "purity".into()];
        header.extend((1..=self.top_k).map(|i| format!("lambda_{i}")));
        header.push("E".into());
        header
    }

    /// Columns `t, S_vN, S_lin, purity, lambda_1..lambda_k, E`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(w);
        writer.write_record(self.csv_header())?;
        for r in &self.records {
            let mut row = vec![r.t.to_string(), r.s_vn.to_string(), r.s_lin.to_string(), r.purity.to_string()];
            row.extend((0..self.top_k).map(|i| r.top.get(i).copied().unwrap_or(0.0).to_string()));
            row.push(r.energy.to_string());
            writer.write_record(&row)?;
        }
        writer.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::oracle::dense_reduced_spectrum;
    use crate::hilbert::Representation;
    use proptest::prelude::*;

    fn state_from(l: usize, entries: &[(usize, usize, Complex64)]) -> StateVector {
        let mut amps = vec![Complex64::new(0.0, 0.0); l * l];
        for &(i, j, v) in entries {
            amps[i * l + j] = v;
        }
        StateVector::from_amplitudes(2, l, Representation::Momentum, amps).unwrap()
    }

    fn random_state(rotors: usize, l: usize, seed: u64) -> StateVector {
        let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let amps = (0..l.pow(rotors as u32)).map(|_| Complex64::new(next(), next())).collect();
        let mut s = StateVector::from_amplitudes(rotors, l, Representation::Momentum, amps).unwrap();
        s.normalize();
        s
    }

    #[test]
    fn product_state_spectrum() {
        let s = StateVector::zero_momentum_product(2, 8);
        let spec = schmidt_spectrum(&s).unwrap();
        assert_eq!(spec.eigenvalues.len(), 8);
        assert!((spec.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!(spec.eigenvalues[1..].iter().all(|&v| v == 0.0));
        assert_eq!(spec.von_neumann(), 0.0);
        assert!(spec.linear_entropy().abs() < 1e-15);
        assert!(spec.one_minus_lambda1().abs() < 1e-15);
    }

    #[test]
    fn bell_pair_spectrum() {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let s = state_from(4, &[(0, 0, h), (1, 1, h)]);
        let spec = schmidt_spectrum(&s).unwrap();
        assert!((spec.eigenvalues[0] - 0.5).abs() < 1e-15);
        assert!((spec.eigenvalues[1] - 0.5).abs() < 1e-15);
        assert!((spec.von_neumann() - 2f64.ln()).abs() < 1e-14);
        assert!((spec.one_minus_lambda1() - 0.5).abs() < 1e-15);
        assert!((spec.linear_entropy() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn uniform_spectrum() {
        let l = 16;
        let spec = SchmidtSpectrum::from_eigenvalues(vec![1.0 / l as f64; l], 0);
        assert!((von_neumann(&spec) - (l as f64).ln()).abs() < 1e-14);
        assert!((linear_entropy(&spec) - (1.0 - 1.0 / l as f64)).abs() < 1e-15);
    }

    #[test]
    fn single_rotor_is_usage_error() {
        let s = StateVector::zero_momentum_product(1, 8);
        assert!(matches!(schmidt_spectrum(&s), Err(Error::Usage(_))));
    }

    #[test]
    fn svd_matches_dense_eigensolve() {
        for (rotors, l, seed) in [(2, 8, 1u64), (2, 12, 2), (3, 4, 3), (3, 6, 4)] {
            let s = random_state(rotors, l, seed);
            let svd = schmidt_spectrum(&s).unwrap();
            let dense = dense_reduced_spectrum(&s).unwrap();
            assert!((svd.eigenvalues.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for (a, b) in svd.eigenvalues.iter().zip(&dense.eigenvalues) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn csv_layout() {
        let mut trace = EntanglementTrace::new(2);
        let spec = SchmidtSpectrum::from_eigenvalues(vec![0.75, 0.25], 3);
        trace.push(TraceRecord::from_spectrum(&spec, 2, 1.5));
        let mut out = Vec::new();
        trace.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,S_vN,S_lin,purity,lambda_1,lambda_2,E");
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "3");
        assert_eq!(row[3], "0.625");
        assert_eq!(row[4], "0.75");
        assert_eq!(row[6], "1.5");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn entropy_ordering_and_phase_invariance(seed in any::<u64>(), phase in 0.0f64..6.28, half in 2usize..6) {
            let l = 2 * half;
            let s = random_state(2, l, seed);
            let spec = schmidt_spectrum(&s).unwrap();
            prop_assert!((spec.eigenvalues.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(spec.von_neumann() >= spec.linear_entropy() - 1e-12);
            prop_assert!(spec.linear_entropy() >= -1e-12);
            prop_assert_eq!(spec.purity() + spec.linear_entropy(), 1.0);

            // Global phase and a local diagonal phase on rotor 2.
            let mut t = s.clone();
            for (flat, c) in t.amplitudes_mut().iter_mut().enumerate() {
                let k2 = flat % l;
                *c *= Complex64::from_polar(1.0, phase + 0.37 * (k2 * k2) as f64);
            }
            let spec2 = schmidt_spectrum(&t).unwrap();
            prop_assert!((spec.von_neumann() - spec2.von_neumann()).abs() < 1e-9);
            prop_assert!((spec.linear_entropy() - spec2.linear_entropy()).abs() < 1e-9);
        }
    }
}
