//! Migrating birds optimization over feature masks.
//!
//! The flock flies in a V: a leader followed by two equally long wings. In
//! each fly step every bird draws `k` neighbors of its own mask, replaces
//! itself with the best candidate in its pool, and hands its runner-up to the
//! bird behind it. The leader feeds both wings: its second-best candidate goes
//! down the left wing and its third-best down the right. Ten fly steps make a
//! tour; after each tour the best bird swaps places with the leader.

use std::fmt;
use std::ops::ControlFlow;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::Classifier;
use crate::corpus::DocTermMatrix;
use crate::error::{Error, Result};
use crate::heuristic::{generate_neighbor, ChangeSchedule, FeatureMask, FitnessEvaluator, RngStream};
use crate::Termination;

pub const STEPS_PER_TOUR: usize = 10;
pub const MAX_TOURS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MboConfig {
    /// Odd, at least 3.
    pub flock_size: usize,
    /// Neighbors drawn per bird per fly step, at least 3.
    pub neighbors: usize,
    pub schedule: ChangeSchedule,
    pub budget_seconds: f64,
    pub seed: u64,
}

impl Default for MboConfig {
    fn default() -> Self {
        MboConfig {
            flock_size: 7,
            neighbors: 3,
            schedule: ChangeSchedule::default(),
            budget_seconds: 600.0,
            seed: 0,
        }
    }
}

impl MboConfig {
    pub fn validate(&self) -> Result<()> {
        if self.flock_size < 3 || self.flock_size % 2 == 0 {
            return Err(Error::config(format!(
                "flock size must be odd and at least 3, got {}",
                self.flock_size
            )));
        }
        if self.neighbors < 3 {
            return Err(Error::config(format!(
                "neighbors per bird must be at least 3, got {}",
                self.neighbors
            )));
        }
        if !(self.budget_seconds > 0.0) {
            return Err(Error::config("budget must be positive"));
        }
        if !(self.schedule.base_fraction >= 0.0) {
            return Err(Error::config("change fraction must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bird {
    pub mask: FeatureMask,
    pub fitness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Leader,
    Left(usize),
    Right(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flock {
    pub leader: Bird,
    pub left: Vec<Bird>,
    pub right: Vec<Bird>,
}

impl Flock {
    pub fn size(&self) -> usize {
        1 + self.left.len() + self.right.len()
    }

    /// Leader, then the left wing front to back, then the right wing.
    pub fn iter(&self) -> impl Iterator<Item = (Position, &Bird)> {
        std::iter::once((Position::Leader, &self.leader))
            .chain(self.left.iter().enumerate().map(|(i, b)| (Position::Left(i), b)))
            .chain(self.right.iter().enumerate().map(|(i, b)| (Position::Right(i), b)))
    }

    pub fn get(&self, pos: Position) -> &Bird {
        match pos {
            Position::Leader => &self.leader,
            Position::Left(i) => &self.left[i],
            Position::Right(i) => &self.right[i],
        }
    }

    fn get_mut(&mut self, pos: Position) -> &mut Bird {
        match pos {
            Position::Leader => &mut self.leader,
            Position::Left(i) => &mut self.left[i],
            Position::Right(i) => &mut self.right[i],
        }
    }

    /// Stable per-bird id used to derive random streams: leader 0, left wing
    /// odd, right wing even.
    fn stream_id(pos: Position) -> u64 {
        match pos {
            Position::Leader => 0,
            Position::Left(i) => 1 + 2 * i as u64,
            Position::Right(i) => 2 + 2 * i as u64,
        }
    }

    pub fn is_well_formed(&self) -> bool {
        self.left.len() == self.right.len() && !self.left.is_empty()
    }
}

/// Leader is `input` itself; the other birds are perturbations of it dealt
/// alternately to the left and right wings.
pub fn initialize_flock(
    evaluator: &FitnessEvaluator<'_>,
    input: &FeatureMask,
    config: &MboConfig,
    rng: &RngStream,
) -> Result<Flock> {
    config.validate()?;
    if input.count_ones() == 0 {
        return Err(Error::EmptyMask);
    }
    let change = config.schedule.change_count(0, input.count_ones()).min(input.len());
    let masks = (1..config.flock_size)
        .map(|i| generate_neighbor(input, change, &mut rng.child("init", i as u64).rng()))
        .collect::<Result<Vec<_>>>()?;
    let mut birds = std::iter::once(input.clone())
        .chain(masks)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|mask| Ok(Bird { fitness: evaluator.evaluate(&mask)?, mask }))
        .collect::<Result<Vec<_>>>()?
        .into_iter();
    let leader = birds.next().expect("flock has a leader");
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for (i, bird) in birds.enumerate() {
        if i % 2 == 0 {
            left.push(bird);
        } else {
            right.push(bird);
        }
    }
    Ok(Flock { leader, left, right })
}

/// Indices of `pool` ordered by fitness descending; ties keep pool order.
fn ranked(pool: &[Bird]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    idx.sort_by(|&a, &b| pool[b].fitness.total_cmp(&pool[a].fitness));
    idx
}

/// One fly step. Each bird's pool is its current self, then its own
/// neighbors in draw order, then the share inherited from the bird ahead.
pub fn fly(
    evaluator: &FitnessEvaluator<'_>,
    flock: &Flock,
    neighbors: usize,
    change: usize,
    rng: &RngStream,
) -> Result<Flock> {
    let positions: Vec<Position> = flock.iter().map(|(p, _)| p).collect();
    let change = change.clamp(1, flock.leader.mask.len());
    let jobs: Vec<(usize, usize)> =
        (0..positions.len()).flat_map(|b| (0..neighbors).map(move |n| (b, n))).collect();
    let drawn: Vec<Bird> = jobs
        .par_iter()
        .map(|&(b, n)| {
            let pos = positions[b];
            let stream = rng.child("bird", Flock::stream_id(pos)).child("neighbor", n as u64);
            let mask = generate_neighbor(&flock.get(pos).mask, change, &mut stream.rng())?;
            Ok(Bird { fitness: evaluator.evaluate(&mask)?, mask })
        })
        .collect::<Result<_>>()?;
    let own = |b: usize| &drawn[b * neighbors..(b + 1) * neighbors];

    let mut next = flock.clone();
    let mut pool = vec![flock.leader.clone()];
    pool.extend_from_slice(own(0));
    let order = ranked(&pool);
    next.leader = pool[order[0]].clone();
    let left_share = pool[order[1]].clone();
    let right_share = pool[order[2]].clone();

    for (wing, mut share) in [(0usize, left_share), (1usize, right_share)] {
        let len = if wing == 0 { flock.left.len() } else { flock.right.len() };
        for i in 0..len {
            let pos = if wing == 0 { Position::Left(i) } else { Position::Right(i) };
            let b = positions.iter().position(|&p| p == pos).expect("position exists");
            let mut pool = vec![flock.get(pos).clone()];
            pool.extend_from_slice(own(b));
            pool.push(share);
            let order = ranked(&pool);
            *next.get_mut(pos) = pool[order[0]].clone();
            share = pool[order[1]].clone();
        }
    }
    Ok(next)
}

/// Highest-fitness bird; ties prefer the leader, then the left wing front to
/// back, then the right wing.
pub fn find_best_bird(flock: &Flock) -> (Position, &Bird) {
    let mut best = (Position::Leader, &flock.leader);
    for (pos, bird) in flock.iter().skip(1) {
        if bird.fitness > best.1.fitness {
            best = (pos, bird);
        }
    }
    best
}

/// Swaps the best bird with the leader; everything else stays in place.
pub fn reorder(flock: &Flock) -> Flock {
    let (pos, _) = find_best_bird(flock);
    let mut next = flock.clone();
    if pos != Position::Leader {
        let best = next.get(pos).clone();
        let old_leader = std::mem::replace(&mut next.leader, best);
        *next.get_mut(pos) = old_leader;
    }
    next
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MboState {
    pub f_max: f64,
    pub b_max: FeatureMask,
    /// Best fitness after the latest tour, one tour earlier, two tours earlier.
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    /// Completed tours.
    pub counter: usize,
}

impl MboState {
    fn should_continue(&self) -> bool {
        (self.counter < 3 || self.f1 != self.f3) && self.counter < MAX_TOURS
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourTrace {
    pub counter: usize,
    pub change: usize,
    pub f_max: f64,
    pub elapsed_ms: u64,
}

impl fmt::Display for TourTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "tour={} change={} f_max={:.6} elapsed_ms={}",
            self.counter, self.change, self.f_max, self.elapsed_ms
        )
    }
}

/// Everything needed to continue a run from a tour boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MboSnapshot {
    pub state: MboState,
    pub flock: Flock,
    pub trace: Vec<TourTrace>,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone)]
pub struct MboOutcome {
    pub mask: FeatureMask,
    pub fitness: f64,
    pub input_fitness: f64,
    pub state: MboState,
    pub trace: Vec<TourTrace>,
    pub termination: Termination,
    pub elapsed: Duration,
}

/// Hooks into a running search.
pub trait MboObserver {
    fn after_fly(&mut self, _tour: usize, _step: usize, _before: &Flock, _after: &Flock) {}

    /// Called at every tour boundary; `Break` stops the run as
    /// [`Termination::Halted`].
    fn after_tour(&mut self, _snapshot: &MboSnapshot) -> ControlFlow<()> {
        ControlFlow::Continue(())
    }
}

impl MboObserver for () {}

/// Runs the search with a 5-fold multinomial NB fitness whose fold seed is `config.seed`.
pub fn mbo_select(matrix: &DocTermMatrix, input: &FeatureMask, config: &MboConfig) -> Result<MboOutcome> {
    let evaluator = FitnessEvaluator::new(matrix, Classifier::naive_bayes(), 5, config.seed)?;
    mbo_run(&evaluator, input, config, None, &mut ())
}

/// The full search loop, optionally continuing from a snapshot.
pub fn mbo_run(
    evaluator: &FitnessEvaluator<'_>,
    input: &FeatureMask,
    config: &MboConfig,
    resume: Option<MboSnapshot>,
    observer: &mut dyn MboObserver,
) -> Result<MboOutcome> {
    config.validate()?;
    if input.len() != evaluator.matrix().n_features() {
        return Err(Error::MaskLength { mask: input.len(), features: evaluator.matrix().n_features() });
    }
    if input.count_ones() == 0 {
        return Err(Error::EmptyMask);
    }
    let root = RngStream::new(config.seed).child("mbo", 0);
    let budget = Duration::from_secs_f64(config.budget_seconds);
    let m_prime = input.count_ones();
    let input_fitness = evaluator.evaluate(input)?;

    let (mut state, mut flock, mut trace, offset) = match resume {
        Some(s) => {
            if s.flock.leader.mask.len() != input.len() {
                return Err(Error::CheckpointFingerprint);
            }
            (s.state, s.flock, s.trace, Duration::from_millis(s.elapsed_ms))
        }
        None => {
            let state = MboState {
                f_max: input_fitness,
                b_max: input.clone(),
                f1: input_fitness,
                f2: input_fitness,
                f3: input_fitness,
                counter: 0,
            };
            let flock = initialize_flock(evaluator, input, config, &root)?;
            (state, flock, Vec::new(), Duration::ZERO)
        }
    };
    let start = Instant::now();
    let elapsed = || offset + start.elapsed();

    let mut termination = None;
    'tours: while state.should_continue() {
        if elapsed() >= budget {
            termination = Some(Termination::Budget);
            break;
        }
        let change = config.schedule.change_count(state.counter, m_prime);
        let tour_rng = root.child("tour", state.counter as u64);
        for step in 0..STEPS_PER_TOUR {
            let next = fly(evaluator, &flock, config.neighbors, change, &tour_rng.child("step", step as u64))?;
            observer.after_fly(state.counter, step, &flock, &next);
            flock = next;
            let (_, best) = find_best_bird(&flock);
            if best.fitness > state.f_max {
                state.f_max = best.fitness;
                state.b_max = best.mask.clone();
            }
            if elapsed() >= budget {
                termination = Some(Termination::Budget);
                break 'tours;
            }
        }
        flock = reorder(&flock);
        state.f3 = state.f2;
        state.f2 = state.f1;
        state.f1 = state.f_max;
        state.counter += 1;
        trace.push(TourTrace {
            counter: state.counter,
            change,
            f_max: state.f_max,
            elapsed_ms: elapsed().as_millis() as u64,
        });
        let snapshot = MboSnapshot {
            state: state.clone(),
            flock: flock.clone(),
            trace: trace.clone(),
            elapsed_ms: elapsed().as_millis() as u64,
        };
        if observer.after_tour(&snapshot).is_break() {
            termination = Some(Termination::Halted);
            break;
        }
    }
    let termination = termination.unwrap_or(if state.counter >= 3 && state.f1 == state.f3 {
        Termination::Stagnation
    } else {
        Termination::MaxTours
    });
    Ok(MboOutcome {
        mask: state.b_max.clone(),
        fitness: state.f_max,
        input_fitness,
        state,
        trace,
        termination,
        elapsed: elapsed(),
    })
}
