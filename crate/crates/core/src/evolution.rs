//! Diagonal Floquet factors and the stroboscopic kick-to-kick map.
//!
//! One period applies, right to left,
//! `(U_1^free U_1^kick ⊗ ... ⊗ U_N^free U_N^kick) U_int`: the interaction
//! and the kicks are diagonal on the position grid, the free rotation is
//! diagonal on the momentum grid.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::entanglement::{EntanglementTrace, TraceRecord};
use crate::error::{Error, Result};
use crate::hilbert::{Direction, Grid, Representation, SpectralTransform, StateVector};
use crate::model::{EdgeGuard, InteractionKind, SystemConfig};

/// Edge probability above which the guard trips.
pub const EDGE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KickOrder {
    /// `U_kick U_int`: the interaction acts first.
    #[default]
    InteractionFirst,
    KicksFirst,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InteractionPhases {
    None,
    /// Indexed by `(Σ_i j_i) mod L`.
    AllToAll(Vec<Complex64>),
    /// One table indexed by `(j_a − j_b) mod L`, shared by every bond `(a, b)`.
    NearestNeighbor {
        table: Vec<Complex64>,
        bonds: Vec<(usize, usize)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloquetPlan {
    pub rotors: usize,
    pub basis: usize,
    pub planck: f64,
    /// `exp[−i K_i cos(x_j + Φ_i) / ℏ']` per rotor, over position nodes.
    pub kick_phases: Vec<Vec<Complex64>>,
    pub interaction_phases: InteractionPhases,
    /// `exp[−i τ_i ℏ' n² T / 2]` per rotor, over momentum storage indices.
    pub free_phases: Vec<Vec<Complex64>>,
    pub resonant_identity: bool,
    pub order: KickOrder,
}

/// `exp[−i τ ℏ' n² T / 2]` with `ℏ' = 4π r / (s (T + ε))`.
///
/// The phase in units of `2π` is `τ r n² / s · T / (T + ε)`; the integer part
/// of `τ r n² / s` is removed exactly before going to floating point so that
/// large `n` keeps full precision.
pub fn free_phase(tau: u32, n: i64, r: u32, s: u32, period: f64, detuning: f64) -> Complex64 {
    let q = tau as u128 * r as u128 * (n.unsigned_abs() as u128).pow(2);
    let s = s as u128;
    let whole = (q % s) as f64 / s as f64;
    let shift = q as f64 / s as f64 * detuning / (period + detuning);
    let turns = (whole - shift).rem_euclid(1.0);
    Complex64::from_polar(1.0, -2.0 * PI * turns)
}

fn nearest_neighbor_bonds(rotors: usize) -> Vec<(usize, usize)> {
    let mut bonds: Vec<(usize, usize)> = (0..rotors.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    if rotors >= 3 {
        bonds.push((rotors - 1, 0));
    }
    bonds
}

impl FloquetPlan {
    pub fn build(config: &SystemConfig) -> Result<Self> {
        config.validate().into_result()?;
        let planck = config.planck()?;
        let l = config.basis_size;
        let grid = Grid::new(l);
        let res = &config.resonance;

        let kick_phases = config
            .rotors
            .iter()
            .map(|rotor| {
                grid.positions()
                    .map(|x| {
                        Complex64::from_polar(
                            1.0,
                            -rotor.kick_strength * (x + rotor.kick_phase).cos() / planck,
                        )
                    })
                    .collect()
            })
            .collect();

        let coupling = config.interaction.effective_strength();
        let table = || -> Vec<Complex64> {
            grid.positions()
                .map(|x| Complex64::from_polar(1.0, -coupling * x.cos() / planck))
                .collect()
        };
        let interaction_phases = match config.interaction.kind {
            InteractionKind::None => InteractionPhases::None,
            InteractionKind::AllToAll => InteractionPhases::AllToAll(table()),
            InteractionKind::NearestNeighbor => InteractionPhases::NearestNeighbor {
                table: table(),
                bonds: nearest_neighbor_bonds(config.num_rotors()),
            },
        };

        let free_phases: Vec<Vec<Complex64>> = config
            .rotors
            .iter()
            .map(|rotor| {
                grid.momenta()
                    .map(|n| free_phase(rotor.tau, n, res.r, res.s, res.period, res.detuning))
                    .collect()
            })
            .collect();
        let resonant_identity = free_phases
            .iter()
            .flatten()
            .all(|c| (c - Complex64::new(1.0, 0.0)).norm() <= 1e-12);

        Ok(FloquetPlan {
            rotors: config.num_rotors(),
            basis: l,
            planck,
            kick_phases,
            interaction_phases,
            free_phases,
            resonant_identity,
            order: KickOrder::default(),
        })
    }

    pub fn with_order(mut self, order: KickOrder) -> Self {
        self.order = order;
        self
    }

    /// Multiply a position-representation state by the kick and interaction
    /// phases, or by their conjugates when `inverse` is set.
    fn apply_position_diagonal(&self, amps: &mut [Complex64], inverse: bool) {
        let l = self.basis;
        let n = self.rotors;
        let conj = |c: Complex64| if inverse { c.conj() } else { c };
        let mut index = vec![0usize; n];
        let kicks_first = match self.order {
            KickOrder::KicksFirst => !inverse,
            KickOrder::InteractionFirst => inverse,
        };

        for line in amps.chunks_exact_mut(l) {
            // Prefix contributions from rotors 1..N−1.
            let mut prefix_kick = Complex64::new(1.0, 0.0);
            let mut prefix_sum = 0usize;
            for (axis, &j) in index[..n - 1].iter().enumerate() {
                prefix_kick *= self.kick_phases[axis][j];
                prefix_sum += j;
            }
            let mut prefix_bond = Complex64::new(1.0, 0.0);
            if let InteractionPhases::NearestNeighbor { table, bonds } = &self.interaction_phases {
                for &(a, b) in bonds {
                    if a != n - 1 && b != n - 1 {
                        prefix_bond *= table[(index[a] + l - index[b]) % l];
                    }
                }
            }
            let last_kick = &self.kick_phases[n - 1];
            for (j, c) in line.iter_mut().enumerate() {
                let interaction = match &self.interaction_phases {
                    InteractionPhases::None => Complex64::new(1.0, 0.0),
                    InteractionPhases::AllToAll(table) => table[(prefix_sum + j) % l],
                    InteractionPhases::NearestNeighbor { table, bonds } => {
                        let mut v = prefix_bond;
                        for &(a, b) in bonds {
                            let ja = if a == n - 1 { j } else { index[a] };
                            let jb = if b == n - 1 { j } else { index[b] };
                            if a == n - 1 || b == n - 1 {
                                v *= table[(ja + l - jb) % l];
                            }
                        }
                        v
                    }
                };
                let kick = prefix_kick * last_kick[j];
                if kicks_first {
                    *c *= conj(kick);
                    *c *= conj(interaction);
                } else {
                    *c *= conj(interaction);
                    *c *= conj(kick);
                }
            }
            // Advance the prefix multi-index (rotor N−1 fastest).
            for axis in (0..n - 1).rev() {
                index[axis] += 1;
                if index[axis] < l {
                    break;
                }
                index[axis] = 0;
            }
        }
    }

    fn apply_free(&self, amps: &mut [Complex64], inverse: bool) {
        if self.resonant_identity {
            return;
        }
        let l = self.basis;
        let n = self.rotors;
        for (flat, c) in amps.iter_mut().enumerate() {
            let mut rest = flat;
            let mut phase = Complex64::new(1.0, 0.0);
            for axis in (0..n).rev() {
                phase *= self.free_phases[axis][rest % l];
                rest /= l;
            }
            *c *= if inverse { phase.conj() } else { phase };
        }
    }
}

pub fn build_plan(config: &SystemConfig) -> Result<FloquetPlan> {
    FloquetPlan::build(config)
}

/// Advances states by whole periods with cached transforms.
pub struct Stepper {
    plan: FloquetPlan,
    transform: SpectralTransform,
}

impl Stepper {
    pub fn new(plan: FloquetPlan) -> Self {
        let transform = SpectralTransform::new(plan.basis);
        Stepper { plan, transform }
    }

    pub fn plan(&self) -> &FloquetPlan {
        &self.plan
    }

    fn check(&self, state: &StateVector) -> Result<()> {
        if state.representation() != Representation::Momentum {
            return Err(Error::Usage(
                "step expects a momentum-representation state".to_string(),
            ));
        }
        if state.rotors() != self.plan.rotors || state.basis() != self.plan.basis {
            return Err(Error::Usage(format!(
                "state shape {}^{} does not match plan {}^{}",
                state.basis(),
                state.rotors(),
                self.plan.basis,
                self.plan.rotors
            )));
        }
        Ok(())
    }

    /// One full period.
    pub fn step(&mut self, state: &mut StateVector) -> Result<()> {
        self.check(state)?;
        self.transform.apply(state, Direction::MomentumToPosition)?;
        self.plan.apply_position_diagonal(state.amplitudes_mut(), false);
        self.transform.apply(state, Direction::PositionToMomentum)?;
        self.plan.apply_free(state.amplitudes_mut(), false);
        Ok(())
    }

    /// Inverse of [`Stepper::step`]: conjugated factors in reverse order.
    pub fn step_back(&mut self, state: &mut StateVector) -> Result<()> {
        self.check(state)?;
        self.plan.apply_free(state.amplitudes_mut(), true);
        self.transform.apply(state, Direction::MomentumToPosition)?;
        self.plan.apply_position_diagonal(state.amplitudes_mut(), true);
        self.transform.apply(state, Direction::PositionToMomentum)?;
        Ok(())
    }
}

/// Apply one period to a copy of `state`.
pub fn step(state: &StateVector, plan: &FloquetPlan) -> Result<StateVector> {
    let mut out = state.clone();
    Stepper::new(plan.clone()).step(&mut out)?;
    Ok(out)
}

/// `Σ_i τ_i ⟨p_i²⟩ / 2` with `p = n ℏ'`.
pub fn mean_energy(state: &StateVector, config: &SystemConfig) -> Result<f64> {
    if state.representation() != Representation::Momentum {
        return Err(Error::Usage(
            "mean energy needs the momentum representation".to_string(),
        ));
    }
    let planck = config.planck()?;
    let grid = state.grid();
    let mut energy = 0.0;
    for (axis, rotor) in config.rotors.iter().enumerate() {
        let marginal = state.marginal(axis);
        let n2: f64 = marginal
            .iter()
            .enumerate()
            .map(|(k, p)| (grid.momentum_index(k) as f64).powi(2) * p)
            .sum();
        energy += rotor.tau as f64 * n2 * planck * planck / 2.0;
    }
    Ok(energy)
}

/// Called after every kick (and once for the initial state at kick 0).
pub trait Observer {
    fn observe(&mut self, kick: usize, state: &StateVector) -> Result<()>;
}

impl<F> Observer for F
where
    F: FnMut(usize, &StateVector) -> Result<()>,
{
    fn observe(&mut self, kick: usize, state: &StateVector) -> Result<()> {
        self(kick, state)
    }
}

/// A single evolution from the zero-momentum product state.
pub struct Simulation {
    config: SystemConfig,
    stepper: Stepper,
    state: StateVector,
    kick: usize,
    edge_trip: Option<usize>,
}

impl Simulation {
    pub fn new(config: &SystemConfig) -> Result<Self> {
        let plan = FloquetPlan::build(config)?;
        Ok(Simulation {
            config: config.clone(),
            stepper: Stepper::new(plan),
            state: StateVector::zero_momentum_product(config.num_rotors(), config.basis_size),
            kick: 0,
            edge_trip: None,
        })
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn kick(&self) -> usize {
        self.kick
    }

    pub fn plan(&self) -> &FloquetPlan {
        self.stepper.plan()
    }

    /// First kick at which the edge guard tripped, if any.
    pub fn edge_trip(&self) -> Option<usize> {
        self.edge_trip
    }

    pub fn step(&mut self) -> Result<()> {
        self.stepper.step(&mut self.state)?;
        self.kick += 1;
        if self.config.edge_guard != EdgeGuard::Off && self.edge_trip.is_none() {
            let weights = self.state.edge_weights();
            if let Some((rotor, &weight)) = weights
                .iter()
                .enumerate()
                .find(|(_, &w)| w > EDGE_TOLERANCE)
            {
                self.edge_trip = Some(self.kick);
                if self.config.edge_guard == EdgeGuard::Error {
                    return Err(Error::EdgeContamination {
                        kick: self.kick,
                        rotor: rotor + 1,
                        weight,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn record(&self) -> Result<TraceRecord> {
        let energy = mean_energy(&self.state, &self.config)?;
        TraceRecord::from_state(self.kick, &self.state, self.config.observe_top_k, energy)
    }

    /// Steps to the configured horizon, recording one row per kick
    /// (including kick 0) and calling every observer after each record.
    pub fn run(mut self, observers: &mut [&mut dyn Observer]) -> Result<EntanglementTrace> {
        let mut trace = EntanglementTrace::new(self.config.observe_top_k);
        trace.push(self.record()?);
        for obs in observers.iter_mut() {
            obs.observe(self.kick, &self.state)?;
        }
        while self.kick < self.config.horizon {
            self.step()?;
            trace.push(self.record()?);
            for obs in observers.iter_mut() {
                obs.observe(self.kick, &self.state)?;
            }
        }
        trace.edge_trip = self.edge_trip;
        Ok(trace)
    }
}

/// Evolve the configured system from `|0, ..., 0⟩` for `horizon` kicks.
pub fn evolve(config: &SystemConfig, observers: &mut [&mut dyn Observer]) -> Result<EntanglementTrace> {
    Simulation::new(config)?.run(observers)
}
