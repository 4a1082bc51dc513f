//! First-generation Digital Annealer: every iteration evaluates all single
//! flips, marks each one with the offset-relaxed Metropolis test, applies one
//! marked flip chosen uniformly, and raises a dynamic energy offset while
//! nothing is accepted.
//!
//! All randomness comes from a counter-based hash keyed by
//! `(seed, run, iteration, variable)`, so a run is fully determined by its
//! inputs no matter how the proposal phase is split across lanes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{decode, evaluate, DenseCouplings, EffectiveFields, Permutation, QuboModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealerConfig {
    pub initial_temperature: f64,
    pub final_temperature: f64,
    /// Fractional temperature decay per iteration.
    pub decay: f64,
    pub offset_increase_rate: f64,
    pub iterations: u64,
    pub seed: u64,
    pub runs: usize,
    /// Number of chunks the proposal phase is split into. Results do not
    /// depend on it.
    #[serde(default = "one")]
    pub lanes: usize,
}

fn one() -> usize {
    1
}

impl AnnealerConfig {
    /// Standard schedule for a QUBO with `m` variables: `delta0 = multiplier *
    /// beta`, final temperature 1, decay 0.001, offset step `delta0 / m^2`,
    /// `m^2` iterations and 20 runs.
    pub fn standard(beta: i64, multiplier: f64, m: usize, seed: u64) -> Self {
        let t0 = multiplier * beta as f64;
        let m2 = (m * m) as f64;
        AnnealerConfig {
            initial_temperature: t0,
            final_temperature: 1.0,
            decay: 0.001,
            offset_increase_rate: t0 / m2,
            iterations: (m * m) as u64,
            seed,
            runs: 20,
            lanes: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::arg(msg));
        if !(self.final_temperature > 0.0 && self.final_temperature.is_finite()) {
            return bad(format!(
                "final temperature must be > 0, got {}",
                self.final_temperature
            ));
        }
        if !(self.initial_temperature >= self.final_temperature
            && self.initial_temperature.is_finite())
        {
            return bad(format!(
                "initial temperature {} must be finite and >= final temperature {}",
                self.initial_temperature, self.final_temperature
            ));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return bad(format!("decay must lie in (0, 1), got {}", self.decay));
        }
        if !(self.offset_increase_rate >= 0.0 && self.offset_increase_rate.is_finite()) {
            return bad(format!(
                "offset increase rate must be >= 0, got {}",
                self.offset_increase_rate
            ));
        }
        if self.iterations == 0 {
            return bad("iterations must be >= 1".into());
        }
        if self.runs == 0 {
            return bad("runs must be >= 1".into());
        }
        if self.lanes == 0 {
            return bad("lanes must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub run: usize,
    pub best_energy: i64,
    pub best_x: Vec<bool>,
    pub best_iteration: u64,
    pub feasible: bool,
    pub permutation: Option<Permutation>,
    /// Objective value of the decoded permutation. With a zero-constant cost
    /// matrix this is the best energy, since the penalty vanishes.
    pub cost: Option<i64>,
    pub accepted_flips: u64,
}

/// Snapshot handed to an observer after every iteration.
#[derive(Clone, Copy, Debug)]
pub struct IterationState {
    pub iteration: u64,
    pub temperature: f64,
    /// Offset in force after this iteration's update.
    pub offset: f64,
    pub energy: i64,
    pub best_energy: i64,
    /// Flipped variable and its energy change, if a flip was applied.
    pub flip: Option<(usize, i64)>,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const INIT_TAG: u64 = u64::MAX;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Key for one iteration of one run; per-variable draws hash the key with
/// the variable index.
#[inline]
fn iteration_key(seed: u64, run: u64, iteration: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ run) ^ iteration)
}

#[inline]
fn lane_draw(key: u64, lane: u64) -> u64 {
    splitmix64(key ^ lane.wrapping_mul(GOLDEN))
}

#[inline]
fn unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Offset-relaxed acceptance for one candidate flip.
#[inline]
fn accepts(delta: i64, offset: f64, temperature: f64, key: u64, lane: u64) -> bool {
    let t = delta as f64 - offset;
    if t <= 0.0 {
        return true;
    }
    let p = (-t / temperature).exp();
    p > 0.0 && unit(lane_draw(key, lane)) < p
}

fn propose(
    fields: &EffectiveFields,
    offset: f64,
    temperature: f64,
    key: u64,
    lanes: usize,
    out: &mut Vec<usize>,
) {
    out.clear();
    let m = fields.x().len();
    let check = |j: usize| accepts(fields.delta(j), offset, temperature, key, j as u64);
    if lanes <= 1 || m < 2 {
        out.extend((0..m).filter(|&j| check(j)));
    } else {
        let chunk = m.div_ceil(lanes);
        let parts: Vec<Vec<usize>> = (0..m)
            .collect::<Vec<_>>()
            .par_chunks(chunk)
            .map(|c| c.iter().copied().filter(|&j| check(j)).collect())
            .collect();
        out.extend(parts.into_iter().flatten());
    }
}

/// Runs one annealing chain, reporting each iteration to `observe`.
pub fn anneal_run_observed<F>(
    q: &QuboModel,
    couplings: &DenseCouplings,
    cfg: &AnnealerConfig,
    run: usize,
    mut observe: F,
) -> Result<RunResult>
where
    F: FnMut(&IterationState),
{
    cfg.validate()?;
    let m = q.m();
    let init_key = iteration_key(cfg.seed, run as u64, INIT_TAG);
    let x0: Vec<bool> = (0..m)
        .map(|j| lane_draw(init_key, j as u64) >> 63 == 1)
        .collect();
    let mut fields = EffectiveFields::new(couplings, &x0)?;
    let mut energy = evaluate(q, &x0)?;
    let mut best_energy = energy;
    let mut best_feasible = decode(q.layout(), &x0).is_some();
    let mut best_x = x0;
    let mut best_iteration = 0;
    let mut accepted_flips = 0;
    let mut offset = 0.0f64;
    let mut temperature = cfg.initial_temperature;
    let mut marked = Vec::with_capacity(m);
    let check_every = if cfg!(debug_assertions) {
        1000
    } else {
        u64::MAX
    };

    for it in 0..cfg.iterations {
        if it > 0 {
            temperature = (temperature * (1.0 - cfg.decay)).max(cfg.final_temperature);
        }
        let key = iteration_key(cfg.seed, run as u64, it);
        propose(&fields, offset, temperature, key, cfg.lanes, &mut marked);
        let mut flip = None;
        if marked.is_empty() {
            offset += cfg.offset_increase_rate;
        } else {
            let pick = ((lane_draw(key, m as u64) as u128 * marked.len() as u128) >> 64) as usize;
            let j = marked[pick];
            let delta = fields.flip_unchecked(couplings, j);
            energy += delta;
            offset = 0.0;
            accepted_flips += 1;
            flip = Some((j, delta));
            // equal energies: a feasible state replaces an infeasible best
            let improves = energy < best_energy
                || (energy == best_energy
                    && !best_feasible
                    && decode(q.layout(), fields.x()).is_some());
            if improves {
                best_energy = energy;
                best_feasible = decode(q.layout(), fields.x()).is_some();
                best_x.copy_from_slice(fields.x());
                best_iteration = it + 1;
            }
        }
        if (it + 1) % check_every == 0 {
            debug_assert_eq!(energy, evaluate(q, fields.x())?);
        }
        observe(&IterationState {
            iteration: it,
            temperature,
            offset,
            energy,
            best_energy,
            flip,
        });
    }

    let permutation = decode(q.layout(), &best_x);
    let feasible = permutation.is_some();
    Ok(RunResult {
        run,
        best_energy,
        best_x,
        best_iteration,
        feasible,
        cost: feasible.then_some(best_energy),
        permutation,
        accepted_flips,
    })
}

/// The first run (index 0) of `cfg`.
pub fn anneal(q: &QuboModel, cfg: &AnnealerConfig) -> Result<RunResult> {
    let couplings = DenseCouplings::new(q)?;
    anneal_run_observed(q, &couplings, cfg, 0, |_| {})
}

/// `cfg.runs` independent runs, in run order. Runs execute in parallel on the
/// current rayon pool.
pub fn anneal_many(q: &QuboModel, cfg: &AnnealerConfig) -> Result<Vec<RunResult>> {
    cfg.validate()?;
    let couplings = DenseCouplings::new(q)?;
    (0..cfg.runs)
        .into_par_iter()
        .map(|r| anneal_run_observed(q, &couplings, cfg, r, |_| {}))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::parse_qaplib;
    use crate::qubo::{build_constraint, build_qap_cost, combine, LayoutKind, VariableLayout};

    fn cfg(iterations: u64, seed: u64) -> AnnealerConfig {
        AnnealerConfig {
            initial_temperature: 10.0,
            final_temperature: 1.0,
            decay: 0.001,
            offset_increase_rate: 0.5,
            iterations,
            seed,
            runs: 4,
            lanes: 1,
        }
    }

    fn tiny_q(alpha: i64) -> QuboModel {
        let c = build_qap_cost(&parse_qaplib("2 0 3 3 0 0 5 5 0").unwrap()).unwrap();
        let g = build_constraint(*c.layout()).unwrap();
        combine(&c, &g, alpha).unwrap()
    }

    #[test]
    fn single_negative_variable() {
        let l = VariableLayout {
            rows: 1,
            cols: 1,
            kind: LayoutKind::QapFull,
        };
        let mut q = QuboModel::zeros(l);
        q.add_term(0, 0, -5).unwrap();
        for seed in 0..5 {
            let r = anneal(&q, &cfg(3, seed)).unwrap();
            assert_eq!(r.best_x, vec![true]);
            assert_eq!(r.best_energy, -5);
        }
    }

    #[test]
    fn tiny_qap_all_runs_feasible() {
        let q = tiny_q(16);
        let mut c = AnnealerConfig::standard(30, 1.0, 4, 42);
        c.runs = 20;
        for r in anneal_many(&q, &c).unwrap() {
            assert!(r.feasible);
            assert_eq!(r.cost, Some(30));
            assert_eq!(r.best_energy, evaluate(&q, &r.best_x).unwrap());
        }
    }

    #[test]
    fn runs_are_deterministic_and_lane_independent() {
        let q = tiny_q(15);
        let a = anneal_many(&q, &cfg(200, 9)).unwrap();
        assert_eq!(a, anneal_many(&q, &cfg(200, 9)).unwrap());
        assert_eq!(a[0], anneal(&q, &cfg(200, 9)).unwrap());
        for lanes in [2, 3, 7] {
            let mut c = cfg(200, 9);
            c.lanes = lanes;
            assert_eq!(a, anneal_many(&q, &c).unwrap());
        }
    }

    #[test]
    fn config_validation() {
        let good = cfg(10, 0);
        assert!(good.validate().is_ok());
        type Tweak = Box<dyn Fn(&mut AnnealerConfig)>;
        let cases: Vec<Tweak> = vec![
            Box::new(|c| c.final_temperature = 0.0),
            Box::new(|c| c.initial_temperature = 0.5),
            Box::new(|c| c.decay = 1.0),
            Box::new(|c| c.decay = 0.0),
            Box::new(|c| c.offset_increase_rate = -1.0),
            Box::new(|c| c.iterations = 0),
            Box::new(|c| c.runs = 0),
            Box::new(|c| c.lanes = 0),
        ];
        for f in cases {
            let mut c = good.clone();
            f(&mut c);
            assert!(matches!(c.validate(), Err(Error::Argument(_))));
        }
    }

    #[test]
    fn acceptance_edges() {
        assert!(accepts(5, 5.0, 1.0, 0, 0));
        assert!(accepts(-1, 0.0, 1e-300, 0, 0));
        assert!(!accepts(1_000_000, 0.0, 1.0, 0, 0));
    }

    #[test]
    fn standard_schedule() {
        let c = AnnealerConfig::standard(5460, 0.1, 144, 1);
        assert_eq!(c.iterations, 144 * 144);
        assert!((c.initial_temperature - 546.0).abs() < 1e-9);
        assert!((c.offset_increase_rate - 546.0 / 20736.0).abs() < 1e-12);
        assert_eq!(c.runs, 20);
    }
}
