//! Solution state, time history and event counters.

use serde::{Deserialize, Serialize};

use super::config::Model;
use crate::error::{Error, Result};

/// Past levels for BDF/EXT, most recent first.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    /// Step sizes, `dts[0]` being the last completed step.
    pub dts: Vec<f64>,
    /// `(u, v)` at `t^{n−1}, t^{n−2}, …`.
    pub velocity: Vec<[Vec<f64>; 2]>,
    /// Explicit momentum terms at `t^{n−1}, …`.
    pub explicit: Vec<[Vec<f64>; 2]>,
    /// Viscous pressure-boundary terms at `t^{n−1}, …`.
    pub viscous: Vec<[Vec<f64>; 2]>,
    /// `(k, τ)` at `t^{n−1}, …`.
    pub scalars: Vec<[Vec<f64>; 2]>,
    /// Explicit `(k, τ)` terms at `t^{n−1}, …`.
    pub scalar_explicit: Vec<[Vec<f64>; 2]>,
}

impl History {
    pub fn depth(&self) -> usize {
        self.velocity.len()
    }

    pub(crate) fn push(
        &mut self,
        keep: usize,
        dt: f64,
        velocity: [Vec<f64>; 2],
        explicit: [Vec<f64>; 2],
        viscous: [Vec<f64>; 2],
        scalars: Option<([Vec<f64>; 2], [Vec<f64>; 2])>,
    ) {
        fn push_front<T>(v: &mut Vec<T>, x: T, keep: usize) {
            v.insert(0, x);
            v.truncate(keep);
        }
        push_front(&mut self.dts, dt, keep);
        push_front(&mut self.velocity, velocity, keep);
        push_front(&mut self.explicit, explicit, keep);
        push_front(&mut self.viscous, viscous, keep);
        if let Some((s, e)) = scalars {
            push_front(&mut self.scalars, s, keep);
            push_front(&mut self.scalar_explicit, e, keep);
        }
    }
}

/// Clipping and guard events accumulated over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounters {
    pub k_clips: u64,
    pub tau_clips: u64,
    pub tau_floor: u64,
    pub ddes_guards: u64,
}

/// Pointwise closure diagnostics of the latest state.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClosureFields {
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub f_d: Vec<f64>,
    /// `l_DDES / l_RANS` (1 in RANS mode).
    pub l_ratio: Vec<f64>,
    pub l_ddes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationState {
    pub model: Model,
    pub t: f64,
    pub step: u64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
    pub k: Vec<f64>,
    pub tau: Vec<f64>,
    /// Kinematic eddy viscosity.
    pub nu_t: Vec<f64>,
    pub history: History,
    pub counters: EventCounters,
    #[serde(default)]
    pub closure: ClosureFields,
}

impl SimulationState {
    pub fn new(model: Model, n: usize) -> Self {
        Self {
            model,
            t: 0.0,
            step: 0,
            u: vec![0.0; n],
            v: vec![0.0; n],
            p: vec![0.0; n],
            k: vec![0.0; n],
            tau: vec![0.0; n],
            nu_t: vec![0.0; n],
            history: History::default(),
            counters: EventCounters::default(),
            closure: ClosureFields::default(),
        }
    }

    pub fn num_points(&self) -> usize {
        self.u.len()
    }

    /// Fail on the first non-finite value of any primary field.
    pub fn check_finite(&self) -> Result<()> {
        for (name, f) in [
            ("u", &self.u),
            ("v", &self.v),
            ("p", &self.p),
            ("k", &self.k),
            ("tau", &self.tau),
        ] {
            if let Some(l) = f.iter().position(|x| !x.is_finite()) {
                return Err(Error::Divergence {
                    step: self.step,
                    message: format!("non-finite {name} at point {l}"),
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_bitwise() {
        let mut s = SimulationState::new(Model::RansKtau, 5);
        s.u = vec![0.1, 1.0 / 3.0, -2.5e-300, 7.0, f64::MIN_POSITIVE];
        s.history.dts = vec![0.1 + 0.2];
        let back = SimulationState::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(back.u.iter().zip(&s.u).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn nan_is_divergence() {
        let mut s = SimulationState::new(Model::Laminar, 3);
        s.step = 7;
        s.v[2] = f64::NAN;
        assert!(matches!(s.check_finite(), Err(Error::Divergence { step: 7, .. })));
    }
}
