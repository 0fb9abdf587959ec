//! System configuration, validation and resonance arithmetic.
//!
//! A run is fully described by a [`SystemConfig`]: the per-rotor parameters
//! (inverse mass, kick strength, kick phase), the interaction, the kick
//! period together with the resonance ratio `r/s` and a detuning, the number
//! of momentum states per rotor, and the number of kicks to simulate.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the total number of stored amplitudes, `L^N`.
pub const DEFAULT_MAX_AMPLITUDES: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotorParams {
    /// Inverse mass.
    pub tau: u32,
    pub kick_strength: f64,
    /// Phase offset of the kicking potential, radians.
    pub kick_phase: f64,
}

impl RotorParams {
    pub fn new(tau: u32, kick_strength: f64, kick_phase: f64) -> Self {
        RotorParams {
            tau,
            kick_strength,
            kick_phase,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InteractionKind {
    /// `K cos(x_1 + x_2 + ... + x_N)`.
    AllToAll,
    /// `K Σ cos(x_i − x_{i+1})` on a ring (the closing bond is only added
    /// for `N ≥ 3`).
    NearestNeighbor,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionSpec {
    pub kind: InteractionKind,
    pub strength: f64,
}

impl InteractionSpec {
    pub fn all_to_all(strength: f64) -> Self {
        InteractionSpec {
            kind: InteractionKind::AllToAll,
            strength,
        }
    }

    pub fn nearest_neighbor(strength: f64) -> Self {
        InteractionSpec {
            kind: InteractionKind::NearestNeighbor,
            strength,
        }
    }

    pub fn none() -> Self {
        InteractionSpec {
            kind: InteractionKind::None,
            strength: 0.0,
        }
    }

    /// Coupling actually applied; `None` ignores whatever strength is set.
    pub fn effective_strength(&self) -> f64 {
        match self.kind {
            InteractionKind::None => 0.0,
            _ => self.strength,
        }
    }
}

/// Kick period, resonance ratio and detuning.
///
/// The effective Planck constant is `4π r / (s (T + ε))`. The kick period
/// entering the free-evolution phase stays `T`, so detuning only acts
/// through the Planck constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSpec {
    pub period: f64,
    pub r: u32,
    pub s: u32,
    pub detuning: f64,
}

impl ResonanceSpec {
    /// Primary resonance (`r = s = 1`) for kick period `period`.
    pub fn primary(period: f64) -> Self {
        ResonanceSpec {
            period,
            r: 1,
            s: 1,
            detuning: 0.0,
        }
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    /// `4π r / (s T)`, the Planck constant at exact resonance.
    pub fn nominal_planck(&self) -> f64 {
        4.0 * PI * self.r as f64 / (self.s as f64 * self.period)
    }

    pub fn planck(&self) -> Result<f64> {
        effective_planck(self)
    }

    pub fn is_detuned(&self) -> bool {
        self.detuning != 0.0
    }
}

/// `ℏ'_s = 4π r / (s (T + ε))`.
pub fn effective_planck(res: &ResonanceSpec) -> Result<f64> {
    let shifted = res.period + res.detuning;
    if !(shifted > 0.0) || !shifted.is_finite() {
        return Err(Error::Domain(format!(
            "period + detuning must be positive, got {} + {}",
            res.period, res.detuning
        )));
    }
    if res.r == 0 || res.s == 0 {
        return Err(Error::Domain(format!(
            "resonance ratio r/s needs positive integers, got {}/{}",
            res.r, res.s
        )));
    }
    Ok(4.0 * PI * res.r as f64 / (res.s as f64 * shifted))
}

/// What to do when probability reaches the outer sixteenth of a momentum
/// grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeGuard {
    /// Abort the evolution with [`Error::EdgeContamination`].
    Error,
    /// Record the first offending kick in the trace and keep going.
    #[default]
    Warn,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub rotors: Vec<RotorParams>,
    pub interaction: InteractionSpec,
    pub resonance: ResonanceSpec,
    /// Momentum states per rotor, `L`.
    pub basis_size: usize,
    /// Number of kicks to simulate.
    pub horizon: usize,
    /// Number of leading Schmidt eigenvalues recorded per kick.
    pub observe_top_k: usize,
    #[serde(default)]
    pub edge_guard: EdgeGuard,
}

impl SystemConfig {
    /// Two rotors with `τ = (1, 2)`, kicks `(4, 5)`, phases `(0.1, 0.15)`,
    /// all-to-all coupling `0.05` and `T = 12` at primary resonance.
    pub fn reference_two_rotor() -> Self {
        SystemConfig {
            rotors: vec![RotorParams::new(1, 4.0, 0.1), RotorParams::new(2, 5.0, 0.15)],
            interaction: InteractionSpec::all_to_all(0.05),
            resonance: ResonanceSpec::primary(12.0),
            basis_size: 1 << 10,
            horizon: 1000,
            observe_top_k: 6,
            edge_guard: EdgeGuard::Warn,
        }
    }

    /// The two-rotor reference plus a third rotor (`τ = 3`, kick `5.5`,
    /// phase `0.01`) on a 64-state grid.
    pub fn reference_three_rotor(kind: InteractionKind) -> Self {
        let mut config = Self::reference_two_rotor();
        config.rotors.push(RotorParams::new(3, 5.5, 0.01));
        config.interaction.kind = kind;
        config.basis_size = 1 << 6;
        config
    }

    pub fn num_rotors(&self) -> usize {
        self.rotors.len()
    }

    /// `L^N`, or `None` on overflow.
    pub fn dimension(&self) -> Option<usize> {
        let mut dim: usize = 1;
        for _ in 0..self.rotors.len() {
            dim = dim.checked_mul(self.basis_size)?;
        }
        Some(dim)
    }

    pub fn planck(&self) -> Result<f64> {
        effective_planck(&self.resonance)
    }

    /// True when every free-evolution phase `2π τ_i (r/s) n²` is a multiple
    /// of `2π` for all integer `n`, i.e. `s` divides `τ_i r`, and there is
    /// no detuning.
    pub fn free_evolution_is_identity(&self) -> bool {
        let res = &self.resonance;
        !res.is_detuned()
            && res.s > 0
            && self
                .rotors
                .iter()
                .all(|rotor| (rotor.tau as u64 * res.r as u64) % res.s as u64 == 0)
    }

    pub fn with_kick_strengths(mut self, kicks: &[f64]) -> Self {
        for (rotor, &k) in self.rotors.iter_mut().zip(kicks) {
            rotor.kick_strength = k;
        }
        self
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationLimits {
    pub max_amplitudes: usize,
}

impl Default for ValidationLimits {
    fn default() -> Self {
        ValidationLimits {
            max_amplitudes: DEFAULT_MAX_AMPLITUDES,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_pass() {
            Ok(())
        } else {
            Err(Error::Invalid(self))
        }
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.failures.push(msg.into());
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_pass() {
            return write!(f, "pass");
        }
        for (i, failure) in self.failures.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {failure}")?;
        }
        Ok(())
    }
}

pub fn validate(config: &SystemConfig) -> ValidationReport {
    validate_with(config, &ValidationLimits::default())
}

pub fn validate_with(config: &SystemConfig, limits: &ValidationLimits) -> ValidationReport {
    let mut report = ValidationReport::default();

    if config.rotors.is_empty() {
        report.fail("at least one rotor is required");
    }
    for (i, rotor) in config.rotors.iter().enumerate() {
        let idx = i + 1;
        if rotor.tau == 0 {
            report.fail(format!("rotors.{idx}.tau must be >= 1"));
        }
        if !(rotor.kick_strength >= 0.0) || !rotor.kick_strength.is_finite() {
            report.fail(format!(
                "rotors.{idx}.kick_strength must be finite and >= 0, got {}",
                rotor.kick_strength
            ));
        }
        if !rotor.kick_phase.is_finite() {
            report.fail(format!("rotors.{idx}.kick_phase must be finite"));
        }
    }
    for i in 0..config.rotors.len() {
        for j in (i + 1)..config.rotors.len() {
            if config.rotors[i].tau == config.rotors[j].tau {
                report.fail(format!(
                    "rotors.{}.tau and rotors.{}.tau are equal ({}): duplicate tau ratio 1",
                    i + 1,
                    j + 1,
                    config.rotors[i].tau
                ));
            }
        }
    }

    let strength = config.interaction.strength;
    if config.interaction.kind != InteractionKind::None
        && (!(strength >= 0.0) || !strength.is_finite())
    {
        report.fail(format!(
            "interaction.strength must be finite and >= 0, got {strength}"
        ));
    }

    let res = &config.resonance;
    if !(res.period > 0.0) || !res.period.is_finite() {
        report.fail(format!("resonance.period must be positive, got {}", res.period));
    }
    if res.r == 0 || res.s == 0 {
        report.fail("resonance.r and resonance.s must be >= 1");
    }
    if !res.detuning.is_finite() {
        report.fail("resonance.detuning must be finite");
    } else if let Err(e) = effective_planck(res) {
        report.fail(format!("resonance: {e}"));
    }

    let l = config.basis_size;
    if l < 4 {
        report.fail(format!("basis_size must be >= 4, got {l}"));
    }
    if l % 2 != 0 {
        report.fail(format!("basis_size must be even, got odd basis size {l}"));
    }
    match config.dimension() {
        Some(dim) if dim <= limits.max_amplitudes => {}
        _ => report.fail(format!(
            "basis_size^N = {}^{} exceeds the memory budget of {} amplitudes",
            l,
            config.rotors.len(),
            limits.max_amplitudes
        )),
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_config_passes() {
        let report = validate(&SystemConfig::reference_two_rotor());
        assert!(report.is_pass(), "{report}");
    }

    #[test]
    fn equal_taus_fail() {
        let mut config = SystemConfig::reference_two_rotor();
        config.rotors[1].tau = 1;
        config.rotors[0].tau = 1;
        let report = validate(&config);
        assert!(!report.is_pass());
        assert!(report.failures.iter().any(|f| f.contains("duplicate tau")));
    }

    #[test]
    fn odd_basis_fails() {
        let mut config = SystemConfig::reference_two_rotor();
        config.basis_size = 3;
        let report = validate(&config);
        assert!(report.failures.iter().any(|f| f.contains("odd basis size")));
    }

    #[test]
    fn memory_budget_is_a_validation_failure() {
        let mut config = SystemConfig::reference_three_rotor(InteractionKind::AllToAll);
        config.basis_size = 1024;
        let report = validate(&config);
        assert!(report.failures.iter().any(|f| f.contains("memory budget")));
        let report = validate_with(
            &config,
            &ValidationLimits {
                max_amplitudes: 1 << 30,
            },
        );
        assert!(report.is_pass(), "{report}");
    }

    #[test]
    fn validate_does_not_mutate() {
        let config = SystemConfig::reference_two_rotor();
        let before = config.clone();
        let _ = validate(&config);
        assert_eq!(before, config);
    }

    #[test]
    fn planck_at_resonance() {
        let res = ResonanceSpec::primary(12.0);
        let h = effective_planck(&res).unwrap();
        assert_eq!(h, 4.0 * PI / 12.0);
        assert!((h - 1.0471975512).abs() < 1e-10);
    }

    #[test]
    fn planck_detuned() {
        let res = ResonanceSpec::primary(12.0).with_detuning(1e-4);
        let h = effective_planck(&res).unwrap();
        assert!((h - 4.0 * PI / 12.0001).abs() < 1e-15);
    }

    #[test]
    fn planck_degenerate_period() {
        let res = ResonanceSpec::primary(12.0).with_detuning(-12.0);
        assert!(matches!(effective_planck(&res), Err(Error::Domain(_))));
    }

    #[test]
    fn free_identity_needs_divisibility() {
        let mut config = SystemConfig::reference_two_rotor();
        assert!(config.free_evolution_is_identity());
        config.resonance.s = 2;
        // tau = 1 with r/s = 1/2 gives phase π n².
        assert!(!config.free_evolution_is_identity());
        config.rotors = vec![RotorParams::new(2, 0.0, 0.0), RotorParams::new(4, 0.0, 0.0)];
        assert!(config.free_evolution_is_identity());
        config.resonance.detuning = 1e-4;
        assert!(!config.free_evolution_is_identity());
    }

    #[test]
    fn none_interaction_ignores_strength() {
        let spec = InteractionSpec {
            kind: InteractionKind::None,
            strength: 3.0,
        };
        assert_eq!(spec.effective_strength(), 0.0);
    }

    proptest::proptest! {
        #[test]
        fn planck_decreases_with_detuning(
            period in 1.0f64..50.0,
            e1 in -0.5f64..0.5,
            e2 in -0.5f64..0.5,
            r in 1u32..5,
            s in 1u32..5,
        ) {
            proptest::prop_assume!(e1 != e2);
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let base = ResonanceSpec { period, r, s, detuning: 0.0 };
            let a = effective_planck(&base.with_detuning(lo)).unwrap();
            let b = effective_planck(&base.with_detuning(hi)).unwrap();
            proptest::prop_assert!(a > b);
            proptest::prop_assert!(b > 0.0);
        }
    }
}
