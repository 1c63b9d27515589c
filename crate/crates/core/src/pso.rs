//! Binary particle swarm optimization, the comparison baseline.
//!
//! Positions are feature masks and velocities are real vectors of the same
//! length. After each velocity update bit `j` is redrawn as 1 with
//! probability `sigmoid(v_j)`.

use std::fmt;
use std::ops::ControlFlow;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::Classifier;
use crate::corpus::DocTermMatrix;
use crate::error::{Error, Result};
use crate::heuristic::{generate_neighbor, ChangeSchedule, FeatureMask, FitnessEvaluator, RngStream};
use crate::Termination;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    pub swarm_size: usize,
    /// Inertia weight, decayed linearly from `w_start` to `w_end`.
    pub w_start: f64,
    pub w_end: f64,
    pub c1: f64,
    pub c2: f64,
    pub v_max: f64,
    pub max_iterations: usize,
    pub budget_seconds: f64,
    pub seed: u64,
    /// Only used to size the perturbations of the initial swarm.
    pub schedule: ChangeSchedule,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            swarm_size: 30,
            w_start: 0.9,
            w_end: 0.4,
            c1: 2.0,
            c2: 2.0,
            v_max: 6.0,
            max_iterations: 100,
            budget_seconds: 600.0,
            seed: 0,
            schedule: ChangeSchedule::default(),
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 1 {
            return Err(Error::config("swarm size must be at least 1"));
        }
        if self.max_iterations < 1 {
            return Err(Error::config("PSO needs at least one iteration"));
        }
        if !(self.v_max > 0.0) {
            return Err(Error::config("v_max must be positive"));
        }
        if !(self.budget_seconds > 0.0) {
            return Err(Error::config("budget must be positive"));
        }
        for (name, v) in [("w_start", self.w_start), ("w_end", self.w_end), ("c1", self.c1), ("c2", self.c2)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::config(format!("{name} must be a non-negative number, got {v}")));
            }
        }
        Ok(())
    }

    /// Inertia at iteration `t` (0-based).
    pub fn inertia(&self, t: usize) -> f64 {
        if self.max_iterations <= 1 {
            return self.w_start;
        }
        let frac = t.min(self.max_iterations - 1) as f64 / (self.max_iterations - 1) as f64;
        self.w_start + (self.w_end - self.w_start) * frac
    }
}

pub fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub mask: FeatureMask,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: FeatureMask,
    pub fitness: f64,
    pub velocity: Vec<f64>,
    pub pbest: Scored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Swarm {
    pub particles: Vec<Particle>,
    pub gbest: Scored,
}

impl Swarm {
    /// Folds every particle's pbest into gbest in index order; only strict
    /// improvements replace it.
    fn update_gbest(&mut self) {
        for p in &self.particles {
            if p.pbest.fitness > self.gbest.fitness {
                self.gbest = p.pbest.clone();
            }
        }
    }
}

/// Particle 0 is an exact copy of `input`; the rest are perturbations of it
/// sized like the first MBO tour. Velocities start at zero.
pub fn initialize_swarm(
    evaluator: &FitnessEvaluator<'_>,
    input: &FeatureMask,
    config: &PsoConfig,
    rng: &RngStream,
) -> Result<Swarm> {
    config.validate()?;
    if input.count_ones() == 0 {
        return Err(Error::EmptyMask);
    }
    let change = config.schedule.change_count(0, input.count_ones()).min(input.len());
    let mut masks = vec![input.clone()];
    for i in 1..config.swarm_size {
        masks.push(generate_neighbor(input, change, &mut rng.child("init", i as u64).rng())?);
    }
    let particles = masks
        .into_par_iter()
        .map(|mask| {
            let fitness = evaluator.evaluate(&mask)?;
            Ok(Particle {
                velocity: vec![0.0; mask.len()],
                pbest: Scored { mask: mask.clone(), fitness },
                position: mask,
                fitness,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gbest = particles[0].pbest.clone();
    let mut swarm = Swarm { particles, gbest };
    swarm.update_gbest();
    Ok(swarm)
}

fn bit(mask: &FeatureMask, j: usize) -> f64 {
    if mask.get(j) {
        1.0
    } else {
        0.0
    }
}

/// Moves one particle. Velocity uses the swarm's gbest from before this
/// iteration; the new position is unevaluated.
fn move_particle(p: &Particle, gbest: &FeatureMask, w: f64, config: &PsoConfig, rng: &RngStream) -> (FeatureMask, Vec<f64>) {
    let mut rng = rng.rng();
    let m = p.position.len();
    let mut velocity = Vec::with_capacity(m);
    let mut position = FeatureMask::zeros(m);
    for j in 0..m {
        let x = bit(&p.position, j);
        let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
        let v = w * p.velocity[j]
            + config.c1 * r1 * (bit(&p.pbest.mask, j) - x)
            + config.c2 * r2 * (bit(gbest, j) - x);
        let v = v.clamp(-config.v_max, config.v_max);
        if rng.gen::<f64>() < sigmoid(v) {
            position.set(j, true);
        }
        velocity.push(v);
    }
    (position, velocity)
}

/// One synchronous iteration: every particle moves and is scored in
/// parallel, then pbests and gbest are updated in particle order.
pub fn step(evaluator: &FitnessEvaluator<'_>, swarm: &Swarm, t: usize, config: &PsoConfig, rng: &RngStream) -> Result<Swarm> {
    let w = config.inertia(t);
    let moved = swarm
        .particles
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let (position, velocity) =
                move_particle(p, &swarm.gbest.mask, w, config, &rng.child("particle", i as u64));
            let fitness = evaluator.evaluate(&position)?;
            Ok((position, velocity, fitness))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut next = swarm.clone();
    for (p, (position, velocity, fitness)) in next.particles.iter_mut().zip(moved) {
        if fitness > p.pbest.fitness {
            p.pbest = Scored { mask: position.clone(), fitness };
        }
        p.position = position;
        p.velocity = velocity;
        p.fitness = fitness;
    }
    next.update_gbest();
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub iteration: usize,
    pub gbest: f64,
    pub elapsed_ms: u64,
}

impl fmt::Display for IterationTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "iter={} gbest={:.6} elapsed_ms={}", self.iteration, self.gbest, self.elapsed_ms)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoSnapshot {
    /// Completed iterations.
    pub iteration: usize,
    pub swarm: Swarm,
    pub trace: Vec<IterationTrace>,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone)]
pub struct PsoOutcome {
    pub mask: FeatureMask,
    pub fitness: f64,
    pub input_fitness: f64,
    pub iterations: usize,
    pub trace: Vec<IterationTrace>,
    pub termination: Termination,
    pub elapsed: Duration,
}

pub trait PsoObserver {
    /// Called after every iteration; `Break` stops the run as
    /// [`Termination::Halted`].
    fn after_iteration(&mut self, _snapshot: &PsoSnapshot) -> ControlFlow<()> {
        ControlFlow::Continue(())
    }
}

impl PsoObserver for () {}

/// Runs the swarm with the same 5-fold NB fitness as [`crate::mbo::mbo_select`].
pub fn pso_select(matrix: &DocTermMatrix, input: &FeatureMask, config: &PsoConfig) -> Result<PsoOutcome> {
    let evaluator = FitnessEvaluator::new(matrix, Classifier::naive_bayes(), 5, config.seed)?;
    pso_run(&evaluator, input, config, None, &mut ())
}

pub fn pso_run(
    evaluator: &FitnessEvaluator<'_>,
    input: &FeatureMask,
    config: &PsoConfig,
    resume: Option<PsoSnapshot>,
    observer: &mut dyn PsoObserver,
) -> Result<PsoOutcome> {
    config.validate()?;
    if input.len() != evaluator.matrix().n_features() {
        return Err(Error::MaskLength { mask: input.len(), features: evaluator.matrix().n_features() });
    }
    if input.count_ones() == 0 {
        return Err(Error::EmptyMask);
    }
    let root = RngStream::new(config.seed).child("pso", 0);
    let budget = Duration::from_secs_f64(config.budget_seconds);
    let input_fitness = evaluator.evaluate(input)?;

    let (mut iteration, mut swarm, mut trace, offset) = match resume {
        Some(s) => {
            if s.swarm.gbest.mask.len() != input.len() {
                return Err(Error::CheckpointFingerprint);
            }
            (s.iteration, s.swarm, s.trace, Duration::from_millis(s.elapsed_ms))
        }
        None => (0, initialize_swarm(evaluator, input, config, &root)?, Vec::new(), Duration::ZERO),
    };
    let start = Instant::now();
    let elapsed = || offset + start.elapsed();

    let mut termination = Termination::MaxIterations;
    while iteration < config.max_iterations {
        if elapsed() >= budget {
            termination = Termination::Budget;
            break;
        }
        swarm = step(evaluator, &swarm, iteration, config, &root.child("iter", iteration as u64))?;
        iteration += 1;
        trace.push(IterationTrace { iteration, gbest: swarm.gbest.fitness, elapsed_ms: elapsed().as_millis() as u64 });
        let snapshot = PsoSnapshot {
            iteration,
            swarm: swarm.clone(),
            trace: trace.clone(),
            elapsed_ms: elapsed().as_millis() as u64,
        };
        if observer.after_iteration(&snapshot).is_break() {
            termination = Termination::Halted;
            break;
        }
    }
    Ok(PsoOutcome {
        mask: swarm.gbest.mask.clone(),
        fitness: swarm.gbest.fitness,
        input_fitness,
        iterations: iteration,
        trace,
        termination,
        elapsed: elapsed(),
    })
}
