//! Cycle-level Monte Carlo of the heralded link.
//!
//! Per-attempt branch probabilities come from the exact engine. Each cycle
//! draws its heralds from a Poisson proposal whose mean is floored at
//! `min_heralds_per_cycle` and reweights them by the likelihood ratio; every
//! herald then carries its expected fourfold weight instead of a rare
//! Bernoulli draw.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{pauli_correlator, TwoQubitDensityMatrix};
use crate::error::{Error, Result};
use crate::memory::{MemorySpec, TemporalModeRegister};
use crate::scalar::Real;
use crate::sources::PairStatistics;

use super::events::{Event, EventKind, EventLog};
use super::timing::{heralding_margin, DutyCycleSpec, LinkTimingSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec<T> {
    pub seed: u64,
    pub cycles: usize,
    /// Temporal modes per memory.
    pub modes: usize,
    /// Batches for batch-means error bars.
    #[serde(default = "default_batches")]
    pub batches: usize,
    /// Floor on the proposal mean of heralds per cycle.
    pub min_heralds_per_cycle: T,
    /// Cycles whose events are kept in the report.
    #[serde(default)]
    pub log_cycles: usize,
}

fn default_batches() -> usize {
    20
}

impl<T: Real> Default for RunSpec<T> {
    fn default() -> Self {
        Self {
            seed: 1,
            cycles: 2000,
            modes: 4,
            batches: default_batches(),
            min_heralds_per_cycle: T::one(),
            log_cycles: 1,
        }
    }
}

impl<T: Real> RunSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return Err(Error::OutOfRange { name: "modes", reason: "must be at least 1".into() });
        }
        if self.batches < 2 {
            return Err(Error::OutOfRange { name: "batches", reason: "need at least 2".into() });
        }
        if self.cycles < self.batches {
            return Err(Error::OutOfRange {
                name: "cycles",
                reason: format!("{} cycles cannot fill {} batches", self.cycles, self.batches),
            });
        }
        if !(self.min_heralds_per_cycle >= T::zero()) {
            return Err(Error::OutOfRange {
                name: "min_heralds_per_cycle",
                reason: format!("{} < 0", self.min_heralds_per_cycle),
            });
        }
        Ok(())
    }
}

/// Everything the Monte Carlo needs, with engine-derived branch probabilities.
#[derive(Clone, Debug)]
pub struct LinkModel<T: Real> {
    /// Accepted-herald probability per attempt.
    pub herald_probability: T,
    /// Herald plus one retrieved photon detected per node, per attempt.
    pub fourfold_probability: T,
    /// Conditional memory-pair state on a signal fourfold.
    pub signal_rho: TwoQubitDensityMatrix<T>,
    /// Accidental retrieved-photon coincidence probability per herald.
    pub noise_per_herald: T,
    /// Click statistics of node A's source for the g² estimate.
    pub source_a: PairStatistics<T>,
    pub repetition_rate_hz: T,
    pub memory_a: MemorySpec<T>,
    pub memory_b: MemorySpec<T>,
    pub timing: LinkTimingSpec<T>,
    pub duty: DutyCycleSpec<T>,
}

impl<T: Real> LinkModel<T> {
    pub fn slot_spacing_ns(&self) -> T {
        T::lit(1e9) / self.repetition_rate_hz
    }

    pub fn frames_per_cycle(&self) -> usize {
        let frames = self.duty.storage_window_ms * T::lit(1e6) / self.timing.storage_time_ns;
        frames.floor().to_usize().unwrap_or(0)
    }

    pub fn attempts_per_cycle(&self, modes: usize) -> usize {
        self.frames_per_cycle() * modes
    }

    pub fn pulses_per_cycle(&self) -> u64 {
        (self.duty.storage_window_ms * T::lit(1e-3) * self.repetition_rate_hz)
            .floor()
            .to_u64()
            .unwrap_or(0)
    }

    /// Exact expected fourfold rate per hour, noise included.
    pub fn expected_fourfold_rate_per_h(&self, modes: usize) -> f64 {
        let per_cycle = f(self.fourfold_probability + self.herald_probability * self.noise_per_herald)
            * self.attempts_per_cycle(modes) as f64;
        per_cycle * f(self.duty.cycle_rate_hz) * 3600.0
    }

    /// Rejects more modes than either memory holds at this repetition rate.
    pub fn validate_modes(modes: usize, a: &MemorySpec<T>, b: &MemorySpec<T>, repetition_rate_hz: T) -> Result<()> {
        for (name, m) in [("memory_a", a), ("memory_b", b)] {
            let cap = crate::memory::multimode_capacity(m, repetition_rate_hz).repetition_limited;
            if modes > cap {
                return Err(Error::OutOfRange {
                    name: "modes",
                    reason: format!("{modes} modes requested but {name} holds {cap}"),
                });
            }
        }
        Ok(())
    }

    pub fn validate(&self, run: &RunSpec<T>) -> Result<()> {
        self.timing.validate()?;
        self.duty.validate()?;
        self.memory_a.validate()?;
        self.memory_b.validate()?;
        Self::validate_modes(run.modes, &self.memory_a, &self.memory_b, self.repetition_rate_hz)?;
        if !(self.herald_probability >= T::zero() && self.fourfold_probability <= self.herald_probability) {
            return Err(Error::OutOfRange {
                name: "fourfold_probability",
                reason: "exceeds the herald probability".into(),
            });
        }
        if self.frames_per_cycle() == 0 {
            return Err(Error::OutOfRange {
                name: "storage_window_ms",
                reason: "shorter than one storage time".into(),
            });
        }
        Ok(())
    }
}

/// Mean with a batch-means standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn ci95(&self) -> (f64, f64) {
        (self.value - 1.96 * self.std_error, self.value + 1.96 * self.std_error)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkReport {
    pub seed: u64,
    pub cycles: usize,
    pub modes: usize,
    pub attempts_per_cycle: usize,
    pub heralding_margin_ns: f64,
    pub storage_fraction: f64,
    /// Heralds drawn, before reweighting.
    pub raw_heralds: u64,
    pub failed_heralds: u64,
    pub failed_cycles: usize,
    pub herald_rate_hz: Estimate,
    pub fourfold_rate_per_h: Estimate,
    pub fidelity: Estimate,
    pub witness: Estimate,
    pub g2: Estimate,
    pub expected_herald_rate_hz: f64,
    pub expected_fourfold_rate_per_h: f64,
    pub events: Vec<Event>,
}

#[derive(Clone, Debug, Default)]
struct CycleStats {
    herald_weight: f64,
    fourfold_weight: f64,
    /// Σw and Σw·outcome per basis X, Y, Z.
    basis: [(f64, f64); 3],
    raw_heralds: u64,
    failed_heralds: u64,
    singles: [u64; 2],
    coincidences: u64,
    pulses: u64,
    storage_ms: f64,
    events: Vec<Event>,
}

impl CycleStats {
    fn merge(&mut self, o: &CycleStats) {
        self.herald_weight += o.herald_weight;
        self.fourfold_weight += o.fourfold_weight;
        for k in 0..3 {
            self.basis[k].0 += o.basis[k].0;
            self.basis[k].1 += o.basis[k].1;
        }
        self.raw_heralds += o.raw_heralds;
        self.failed_heralds += o.failed_heralds;
        self.singles[0] += o.singles[0];
        self.singles[1] += o.singles[1];
        self.coincidences += o.coincidences;
        self.pulses += o.pulses;
        self.storage_ms += o.storage_ms;
    }

    fn fidelity(&self) -> f64 {
        let c: Vec<f64> = self.basis.iter().map(|(w, ws)| if *w > 0.0 { ws / w } else { f64::NAN }).collect();
        (1.0 + c[0] - c[1] + c[2]) / 4.0
    }

    fn g2(&self) -> f64 {
        self.coincidences as f64 * self.pulses as f64 / (self.singles[0] as f64 * self.singles[1] as f64)
    }
}

fn f<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

struct Prepared {
    attempts: usize,
    modes: usize,
    lambda: f64,
    proposal: f64,
    q_signal: f64,
    noise: f64,
    correlators: [f64; 3],
    spacing_ns: f64,
    storage_ns: f64,
    cycle_ns: f64,
    window_start_ns: f64,
    absorb_ns: f64,
    margin_ns: f64,
    detect_ns: f64,
    pulses: u64,
    singles_p: [f64; 3],
}

/// Runs `run.cycles` cycles, in parallel over cycles on at most `jobs` threads.
///
/// Results depend only on the model, `run` and the seed.
pub fn simulate<T: Real>(model: &LinkModel<T>, run: &RunSpec<T>, jobs: Option<usize>) -> Result<LinkReport> {
    run.validate()?;
    model.validate(run)?;
    let attempts = model.attempts_per_cycle(run.modes);
    let ph = f(model.herald_probability);
    let lambda = ph * attempts as f64;
    let proposal = lambda.max(f(run.min_heralds_per_cycle));
    let s = &model.source_a;
    let prep = Prepared {
        attempts,
        modes: run.modes,
        lambda,
        proposal,
        q_signal: if ph > 0.0 { f(model.fourfold_probability) / ph } else { 0.0 },
        noise: f(model.noise_per_herald),
        correlators: [0, 1, 2].map(|k| f(pauli_correlator(&model.signal_rho, k))),
        spacing_ns: f(model.slot_spacing_ns()),
        storage_ns: f(model.timing.storage_time_ns),
        cycle_ns: f(model.duty.cycle_period_ms()) * 1e6,
        window_start_ns: f(model.duty.storage_start_ms()) * 1e6,
        absorb_ns: f(model.timing.absorption_delay_ns()),
        margin_ns: f(heralding_margin(&model.timing)),
        detect_ns: f(model.timing.detection_delay_ns()),
        pulses: model.pulses_per_cycle(),
        singles_p: [f(s.p12), f(s.p1 - s.p12), f(s.p2 - s.p12)],
    };
    let body = || -> Result<Vec<CycleStats>> {
        (0..run.cycles)
            .into_par_iter()
            .map(|c| run_cycle(model, &prep, run.seed, c, c < run.log_cycles))
            .collect()
    };
    let cycles = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::OutOfRange { name: "jobs", reason: e.to_string() })?
            .install(body)?,
        None => body()?,
    };
    Ok(aggregate(model, run, &prep, cycles))
}

fn run_cycle<T: Real>(model: &LinkModel<T>, prep: &Prepared, seed: u64, cycle: usize, keep: bool) -> Result<CycleStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cycle as u64);
    let mut st = CycleStats {
        pulses: prep.pulses,
        storage_ms: f(model.duty.storage_window_ms),
        ..CycleStats::default()
    };

    // source A singles for g²
    let p = prep.singles_p;
    let n = prep.pulses;
    let c12 = binomial(&mut rng, n, p[0])?;
    let c1 = binomial(&mut rng, n - c12, p[1] / (1.0 - p[0]))?;
    let c2 = binomial(&mut rng, n - c12 - c1, p[2] / (1.0 - p[0] - p[1]))?;
    st.coincidences = c12;
    st.singles = [c12 + c1, c12 + c2];

    let k = if prep.proposal > 0.0 {
        Poisson::new(prep.proposal)
            .map_err(|e| Error::OutOfRange { name: "herald rate", reason: e.to_string() })?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let k = k.min(prep.attempts);
    let weight = if prep.proposal > 0.0 { prep.lambda / prep.proposal } else { 0.0 };
    st.raw_heralds = k as u64;

    let mut chosen = HashSet::with_capacity(k);
    let mut log = EventLog::new(keep);
    let start = cycle as f64 * prep.cycle_ns + prep.window_start_ns;
    for _ in 0..k {
        let pulse = loop {
            let i = rng.random_range(0..prep.attempts);
            if chosen.insert(i) {
                break i;
            }
        };
        let slot = pulse % prep.modes;
        let frame = pulse / prep.modes;
        // one expression for every frame so a retrieval and the next
        // absorption into the same slot tie exactly
        let at = |fr: usize, dt: f64| start + fr as f64 * prep.storage_ns + slot as f64 * prep.spacing_ns + dt;
        let pattern = if rng.random_bool(0.5) { "{T1,R2}" } else { "{R1,T2}" };
        let ev = |time_ns: f64, kind: EventKind, detail: &str| Event {
            time_ns,
            kind,
            cycle,
            pulse,
            slot,
            detail: detail.to_string(),
        };
        log.schedule(ev(at(frame, 0.0), EventKind::Pulse, ""));
        log.schedule(ev(at(frame, 0.0), EventKind::Emission, ""));
        log.schedule(ev(at(frame, prep.absorb_ns), EventKind::Absorption, ""));
        log.schedule(ev(at(frame + 1, prep.absorb_ns - prep.margin_ns), EventKind::Herald, pattern));
        log.schedule(ev(at(frame + 1, prep.absorb_ns), EventKind::Retrieval, ""));
    }

    let mut reg_a = TemporalModeRegister::with_capacity("A", model.memory_a, model.repetition_rate_hz, prep.modes)?;
    let mut reg_b = TemporalModeRegister::with_capacity("B", model.memory_b, model.repetition_rate_hz, prep.modes)?;
    let mut heralded = HashSet::with_capacity(k);
    let w_total = prep.q_signal + prep.noise;
    while let Some(e) = log.next_event() {
        match e.kind {
            EventKind::Absorption => {
                reg_a.reserve(e.slot, "1", T::lit(e.time_ns))?;
                reg_b.reserve(e.slot, "4", T::lit(e.time_ns))?;
            }
            EventKind::Herald => {
                st.herald_weight += weight;
                heralded.insert(e.pulse);
            }
            EventKind::Retrieval => {
                reg_a.release(e.slot)?;
                reg_b.release(e.slot)?;
                if !heralded.remove(&e.pulse) {
                    st.failed_heralds += 1;
                    continue;
                }
                st.fourfold_weight += weight * w_total;
                if w_total > 0.0 {
                    let b = rng.random_range(0..3);
                    let c = prep.q_signal * prep.correlators[b] / w_total;
                    let outcome = if rng.random_bool(((1.0 + c) / 2.0).clamp(0.0, 1.0)) { 1.0 } else { -1.0 };
                    st.basis[b].0 += weight * w_total;
                    st.basis[b].1 += weight * w_total * outcome;
                }
                log.schedule(Event {
                    time_ns: e.time_ns + prep.detect_ns,
                    kind: EventKind::Detection,
                    detail: format!("w={:.6e}", weight * w_total),
                    ..e
                });
            }
            _ => {}
        }
    }
    st.events = log.into_processed();
    Ok(st)
}

fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> Result<u64> {
    if n == 0 || p <= 0.0 {
        return Ok(0);
    }
    Binomial::new(n, p.min(1.0))
        .map(|d| d.sample(rng))
        .map_err(|e| Error::OutOfRange { name: "probability", reason: e.to_string() })
}

fn batch_estimate(total: f64, batches: &[f64]) -> Estimate {
    let vals: Vec<f64> = batches.iter().copied().filter(|v| v.is_finite()).collect();
    let b = vals.len();
    if b < 2 {
        return Estimate { value: total, std_error: f64::NAN };
    }
    let mean = vals.iter().sum::<f64>() / b as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
    Estimate { value: total, std_error: (var / b as f64).sqrt() }
}

fn aggregate<T: Real>(model: &LinkModel<T>, run: &RunSpec<T>, prep: &Prepared, cycles: Vec<CycleStats>) -> LinkReport {
    let cycle_s = prep.cycle_ns * 1e-9;
    let n_batches = run.batches;
    let per = cycles.len() / n_batches;
    let mut total = CycleStats::default();
    let mut batches = Vec::with_capacity(n_batches);
    let mut failed_cycles = 0;
    let mut events = Vec::new();
    for (i, c) in cycles.iter().enumerate() {
        total.merge(c);
        if c.failed_heralds > 0 {
            failed_cycles += 1;
        }
        let b = (i / per).min(n_batches - 1);
        if batches.len() <= b {
            batches.push((CycleStats::default(), 0usize));
        }
        batches[b].0.merge(c);
        batches[b].1 += 1;
        events.extend(c.events.iter().cloned());
    }
    let n = cycles.len() as f64;
    let rate = |m: usize, x: f64| x / (m as f64 * cycle_s);
    let herald: Vec<f64> = batches.iter().map(|(s, m)| rate(*m, s.herald_weight)).collect();
    let four: Vec<f64> = batches.iter().map(|(s, m)| rate(*m, s.fourfold_weight) * 3600.0).collect();
    let fid: Vec<f64> = batches.iter().map(|(s, _)| s.fidelity()).collect();
    let wit: Vec<f64> = fid.iter().map(|f| 0.5 - f).collect();
    let g2: Vec<f64> = batches.iter().map(|(s, _)| s.g2()).collect();
    let fidelity = total.fidelity();
    LinkReport {
        seed: run.seed,
        cycles: cycles.len(),
        modes: run.modes,
        attempts_per_cycle: prep.attempts,
        heralding_margin_ns: f(heralding_margin(&model.timing)),
        storage_fraction: total.storage_ms / (n * cycle_s * 1e3),
        raw_heralds: total.raw_heralds,
        failed_heralds: total.failed_heralds,
        failed_cycles,
        herald_rate_hz: batch_estimate(total.herald_weight / (n * cycle_s), &herald),
        fourfold_rate_per_h: batch_estimate(total.fourfold_weight / (n * cycle_s) * 3600.0, &four),
        fidelity: batch_estimate(fidelity, &fid),
        witness: batch_estimate(0.5 - fidelity, &wit),
        g2: batch_estimate(total.g2(), &g2),
        expected_herald_rate_hz: prep.lambda / cycle_s,
        expected_fourfold_rate_per_h: model.expected_fourfold_rate_per_h(run.modes),
        events,
    }
}
