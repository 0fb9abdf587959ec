//! Closed-form results at exact resonance.
//!
//! With the free rotation equal to the identity, the all-to-all coupling
//! `K cos(Σ x_i)` acts on the collective angle `Θ = Σ x_i` as the kick of a
//! single resonant rotor. After `t` kicks that rotor's momentum amplitudes
//! are `(−i)^n J_n(Kt/ℏ_s)`, and the purity of any one-rotor cut equals its
//! participation ratio `Σ_n J_n(Kt/ℏ_s)^4`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{InteractionKind, SystemConfig};

/// Largest Bessel order accepted by [`bessel_j`].
pub const MAX_ORDER: u64 = 100_000;

/// Orders summed beyond `⌈x⌉` in the participation-ratio series.
pub const SERIES_MARGIN: usize = 40;

/// Values above this trigger a rescale during the downward recurrence.
const RESCALE_ABOVE: f64 = 1e200;

/// Start order offset for Miller's recurrence: `⌈x⌉ + 40`, widened to
/// `10 x^(1/3)` for large arguments where the turning-point region of
/// `J_n(x)` is wider than 40 orders.
fn miller_margin(x: f64) -> usize {
    let cube = (10.0 * x.cbrt()).ceil() as usize;
    cube.max(SERIES_MARGIN)
}

/// `J_0(x), ..., J_{n_max}(x)` for one argument.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselTable {
    x: f64,
    values: Vec<f64>,
}

impl BesselTable {
    /// Miller's downward recurrence `J_{k−1} = (2k/x) J_k − J_{k+1}`,
    /// normalized with `J_0 + 2 Σ_k J_{2k} = 1`.
    pub fn new(x: f64, n_max: usize) -> Self {
        let ax = x.abs();
        let mut values = vec![0.0; n_max + 1];
        if ax == 0.0 {
            values[0] = 1.0;
            return BesselTable { x, values };
        }
        let mut start = n_max.max(ax.ceil() as usize) + miller_margin(ax);
        if start % 2 == 1 {
            start += 1;
        }

        let mut next = 0.0; // J_{k+1}
        let mut cur = 1e-30; // J_k, k = start
        let mut even_sum = 0.0;
        for k in (1..=start).rev() {
            if k <= n_max {
                values[k] = cur;
            }
            if k % 2 == 0 {
                even_sum += cur;
            }
            let prev = 2.0 * k as f64 / ax * cur - next;
            next = cur;
            cur = prev;
            if cur.abs() > RESCALE_ABOVE {
                let scale = 1.0 / RESCALE_ABOVE;
                cur *= scale;
                next *= scale;
                even_sum *= scale;
                for v in values[k.min(n_max + 1)..].iter_mut() {
                    *v *= scale;
                }
            }
        }
        values[0] = cur;
        let norm = cur + 2.0 * even_sum;
        for v in values.iter_mut() {
            *v /= norm;
        }
        if x < 0.0 {
            for (n, v) in values.iter_mut().enumerate() {
                if n % 2 == 1 {
                    *v = -*v;
                }
            }
        }
        BesselTable { x, values }
    }

    pub fn argument(&self) -> f64 {
        self.x
    }

    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    /// `J_n(x)` for any integer order; zero beyond the table.
    pub fn get(&self, n: i64) -> f64 {
        let k = n.unsigned_abs() as usize;
        match self.values.get(k) {
            Some(&v) if n < 0 && k % 2 == 1 => -v,
            Some(&v) => v,
            None => 0.0,
        }
    }

    /// Non-negative orders.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Bessel function of the first kind `J_n(x)` for integer order.
pub fn bessel_j(order: i64, x: f64) -> Result<f64> {
    if order.unsigned_abs() > MAX_ORDER {
        return Err(Error::Domain(format!(
            "Bessel order {order} beyond the supported table (|n| <= {MAX_ORDER})"
        )));
    }
    if !x.is_finite() {
        return Err(Error::Domain(format!("Bessel argument must be finite, got {x}")));
    }
    let n = order.unsigned_abs() as usize;
    Ok(BesselTable::new(x, n).get(order))
}

/// `Kt/ℏ`.
pub fn kick_argument(coupling: f64, t: f64, planck: f64) -> f64 {
    coupling * t / planck
}

/// `Σ_n J_n(x)^4` with `x = Kt/ℏ`, summed over `|n| <= ⌈x⌉ + 40`.
pub fn analytic_purity(coupling: f64, t: f64, planck: f64) -> f64 {
    let x = kick_argument(coupling, t, planck);
    let n_max = x.abs().ceil() as usize + SERIES_MARGIN;
    let table = BesselTable::new(x, n_max);
    let v = table.values();
    let tail: f64 = v[1..].iter().map(|j| j.powi(4)).sum();
    v[0].powi(4) + 2.0 * tail
}

/// `1 − Σ_n J_n(Kt/ℏ)^4`.
pub fn analytic_linear_entropy(coupling: f64, t: f64, planck: f64) -> f64 {
    1.0 - analytic_purity(coupling, t, planck)
}

/// Momentum distribution over a contiguous range of quantum numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumDistribution {
    /// Quantum number of `probabilities[0]`.
    pub n_min: i64,
    pub probabilities: Vec<f64>,
}

impl MomentumDistribution {
    pub fn get(&self, n: i64) -> f64 {
        let k = n - self.n_min;
        if k < 0 {
            return 0.0;
        }
        self.probabilities.get(k as usize).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probabilities
            .iter()
            .enumerate()
            .map(move |(k, &p)| (self.n_min + k as i64, p))
    }

    pub fn second_moment(&self) -> f64 {
        self.iter().map(|(n, p)| (n * n) as f64 * p).sum()
    }
}

/// `P(n) = J_n(Kt/ℏ)²` for a single rotor kicked `t` times at resonance
/// from `|n = 0⟩`.
pub fn resonant_single_rotor_distribution(coupling: f64, t: f64, planck: f64) -> MomentumDistribution {
    let x = kick_argument(coupling, t, planck);
    let n_max = x.abs().ceil() as usize + SERIES_MARGIN;
    let table = BesselTable::new(x, n_max);
    let reach = n_max as i64;
    let mut probabilities: Vec<f64> = (-reach..=reach).map(|n| table.get(n).powi(2)).collect();
    let total: f64 = probabilities.iter().sum();
    probabilities.iter_mut().for_each(|p| *p /= total);
    MomentumDistribution {
        n_min: -reach,
        probabilities,
    }
}

/// The single resonant rotor that carries all entanglement of the
/// all-to-all system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveModel {
    /// Kick strength of the effective rotor; equals the coupling `K`.
    pub effective_kick: f64,
    /// `τ_1 − τ_2`, the coefficient of the momentum-space coupling `u v`
    /// that the collective coordinates produce for two rotors.
    pub eta: Option<i64>,
    pub planck: f64,
    pub period: f64,
}

impl EffectiveModel {
    /// Participation ratio after `t` kicks, equal to the purity of any
    /// one-rotor reduced state.
    pub fn purity(&self, t: f64) -> f64 {
        analytic_purity(self.effective_kick, t, self.planck)
    }

    pub fn linear_entropy(&self, t: f64) -> f64 {
        1.0 - self.purity(t)
    }
}

pub fn reduce_to_effective(config: &SystemConfig) -> Result<EffectiveModel> {
    if config.interaction.kind != InteractionKind::AllToAll {
        return Err(Error::UnsupportedReduction(format!(
            "needs all-to-all coupling, got {:?}",
            config.interaction.kind
        )));
    }
    if !config.free_evolution_is_identity() {
        return Err(Error::UnsupportedReduction(format!(
            "needs exact resonance with identity free evolution (r/s = {}/{}, detuning {})",
            config.resonance.r, config.resonance.s, config.resonance.detuning
        )));
    }
    let eta = match config.rotors.as_slice() {
        [a, b] => Some(a.tau as i64 - b.tau as i64),
        _ => None,
    };
    Ok(EffectiveModel {
        effective_kick: config.interaction.strength,
        eta,
        planck: config.planck()?,
        period: config.resonance.period,
    })
}
