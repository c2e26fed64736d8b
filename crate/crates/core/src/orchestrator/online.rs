use std::collections::VecDeque;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::metrics::{Event, RunMetrics};
use super::{AttemptConfig, OnlineOracle, Refresh, RunConfig, Theorem};
use crate::env::Env;
use crate::htps::search;
use crate::learn::{extract_critic_samples, extract_tactic_samples, CriticSample, PolicyOracle, SampleQueue, TacticSample};

/// Immediate reschedules per statement after crashed attempts.
const MAX_CRASH_RETRIES: u64 = 3;

/// Picks the next statement and parameters; uniform over splits,
/// round-robin within a split, crashed statements first.
struct Controller {
    rng: ChaCha8Rng,
    splits: Vec<Vec<usize>>,
    cursors: Vec<usize>,
    retry: VecDeque<usize>,
    dispatched: u64,
    start: Instant,
}

impl Controller {
    fn new(theorems: &[Theorem], seed: u64, start: Instant) -> Self {
        let mut names: Vec<&str> = Vec::new();
        let mut splits: Vec<Vec<usize>> = Vec::new();
        for (i, t) in theorems.iter().enumerate() {
            match names.iter().position(|n| *n == t.split) {
                Some(k) => splits[k].push(i),
                None => {
                    names.push(&t.split);
                    splits.push(vec![i]);
                }
            }
        }
        let cursors = vec![0; splits.len()];
        Controller { rng: ChaCha8Rng::seed_from_u64(seed), splits, cursors, retry: VecDeque::new(), dispatched: 0, start }
    }

    fn next(&mut self, cfg: &RunConfig) -> Option<AttemptConfig> {
        if cfg.budget.attempts.is_some_and(|n| self.dispatched >= n)
            || cfg.budget.secs.is_some_and(|s| self.start.elapsed().as_secs_f64() >= s)
        {
            return None;
        }
        let statement = match self.retry.pop_front() {
            Some(s) => s,
            None => {
                let k = self.rng.gen_range(0..self.splits.len());
                let s = self.splits[k][self.cursors[k]];
                self.cursors[k] = (self.cursors[k] + 1) % self.splits[k].len();
                s
            }
        };
        let params = cfg.params.draw(&mut self.rng);
        let index = self.dispatched;
        self.dispatched += 1;
        Some(AttemptConfig { index, statement, params })
    }
}

struct Outcome {
    attempt: AttemptConfig,
    worker: usize,
    version: u64,
    proof: Option<(usize, usize)>,
    crashed: bool,
    expansions: u64,
    tactics: Vec<TacticSample>,
    critics: Vec<CriticSample>,
    secs: f64,
    refresh: Option<(u64, u64, u64)>,
}

fn run_attempt(env: &Env, theorems: &[Theorem], oracle: &dyn PolicyOracle, attempt: AttemptConfig, cfg: &RunConfig) -> Outcome {
    let t0 = Instant::now();
    let goal = theorems[attempt.statement].goal.clone();
    let done = catch_unwind(AssertUnwindSafe(|| {
        let result = search(env, goal, oracle, &attempt.params);
        let tactics = extract_tactic_samples(&result, cfg.tactic_mode);
        let critics = extract_critic_samples(&result, cfg.critic_visit_threshold, cfg.hard_critic);
        let proof = result.proof.as_ref().map(|p| (p.size(), p.depth()));
        (proof, result.stats.expansions, tactics, critics)
    }));
    let (proof, expansions, tactics, critics, crashed) = match done {
        Ok((p, e, t, c)) => (p, e, t, c, false),
        Err(_) => (None, 0, Vec::new(), Vec::new(), true),
    };
    Outcome {
        attempt,
        worker: 0,
        version: 0,
        proof,
        crashed,
        expansions,
        tactics,
        critics,
        secs: t0.elapsed().as_secs_f64(),
        refresh: None,
    }
}

/// A prover's view of the oracle.
struct Holder {
    oracle: Arc<dyn PolicyOracle>,
    version: u64,
    last: Instant,
    since: u64,
}

impl Holder {
    fn due(&self, refresh: Refresh) -> bool {
        match refresh {
            Refresh::Never => false,
            Refresh::Always => true,
            Refresh::EverySecs(s) => self.last.elapsed().as_secs_f64() >= s,
            Refresh::EveryAttempts(n) => self.since >= n,
        }
    }

    /// Swaps in `latest` if newer; returns (from, to, attempts since last swap).
    fn refresh(&mut self, latest: &(u64, Arc<dyn PolicyOracle>), regressions: &AtomicU64) -> Option<(u64, u64, u64)> {
        self.last = Instant::now();
        if latest.0 < self.version {
            regressions.fetch_add(1, Ordering::Relaxed);
            return None;
        }
        if latest.0 == self.version {
            return None;
        }
        let info = (self.version, latest.0, self.since);
        self.oracle = latest.1.clone();
        self.version = latest.0;
        self.since = 0;
        Some(info)
    }
}

struct Trainer<'a, O: OnlineOracle> {
    oracle: &'a mut O,
    tactics: SampleQueue<TacticSample>,
    critics: SampleQueue<CriticSample>,
    rng: ChaCha8Rng,
    metrics: RunMetrics,
    log: Option<&'a mut dyn Write>,
    start: Instant,
    cfg: &'a RunConfig,
}

impl<O: OnlineOracle> Trainer<'_, O> {
    fn emit(&mut self, e: &Event) {
        if let Some(w) = self.log.as_mut() {
            if let Err(err) = serde_json::to_writer(&mut **w, e).map_err(std::io::Error::from).and_then(|_| writeln!(w)) {
                log::warn!("event log write failed: {err}");
            }
        }
    }

    /// Returns true when the oracle changed.
    fn handle(&mut self, o: Outcome, theorems: &[Theorem], retry: impl FnOnce(usize)) -> bool {
        if let Some((from, to, since)) = o.refresh {
            self.metrics.refreshes += 1;
            self.emit(&Event::Refresh { worker: o.worker, from, to, attempts_since: since });
        }
        let secs = self.start.elapsed().as_secs_f64();
        self.metrics.record(o.attempt.statement, o.attempt.index, o.proof, secs);
        if o.crashed {
            self.metrics.crashes += 1;
            let st = &mut self.metrics.statements[o.attempt.statement];
            st.crashes += 1;
            // A statement that keeps crashing falls back to its normal turn.
            if st.crashes <= MAX_CRASH_RETRIES {
                retry(o.attempt.statement);
            }
        }
        self.emit(&Event::Attempt {
            index: o.attempt.index,
            statement: theorems[o.attempt.statement].id.clone(),
            worker: o.worker,
            version: o.version,
            solved: o.proof.is_some(),
            crashed: o.crashed,
            size: o.proof.map(|p| p.0),
            expansions: o.expansions,
            budget: o.attempt.params.budget,
            secs: o.secs,
        });
        self.metrics.tactic_samples.received += o.tactics.len() as u64;
        self.metrics.critic_samples.received += o.critics.len() as u64;
        self.tactics.extend(o.tactics);
        self.critics.extend(o.critics);
        if self.tactics.is_empty() && self.critics.is_empty() {
            return false;
        }
        for _ in 0..self.cfg.train_steps_per_result {
            let tb = self.tactics.sample_batch(&mut self.rng, self.cfg.train_batch);
            let cb = self.critics.sample_batch(&mut self.rng, self.cfg.train_batch);
            let version = self.oracle.train_step(&tb, &cb);
            self.metrics.train_steps += 1;
            let e = Event::Train {
                step: self.metrics.train_steps,
                version,
                tactic_queue: self.tactics.len(),
                critic_queue: self.critics.len(),
            };
            self.emit(&e);
        }
        self.cfg.train_steps_per_result > 0
    }

    fn finish(mut self, emitted: (u64, u64), regressions: u64) -> RunMetrics {
        let m = &mut self.metrics;
        m.secs = self.start.elapsed().as_secs_f64();
        m.final_version = self.oracle.version();
        m.version_regressions = regressions;
        m.tactic_samples.emitted = emitted.0;
        m.critic_samples.emitted = emitted.1;
        m.tactic_samples.queued = self.tactics.len() as u64;
        m.tactic_samples.evicted = self.tactics.evicted();
        m.tactic_samples.drawn = self.tactics.drawn();
        m.critic_samples.queued = self.critics.len() as u64;
        m.critic_samples.evicted = self.critics.evicted();
        m.critic_samples.drawn = self.critics.drawn();
        let e = Event::Summary {
            attempts: m.attempts,
            solved: m.solved(),
            total: m.statements.len(),
            pass_rate: m.cumulative_pass_rate(),
            secs: m.secs,
        };
        self.emit(&e);
        self.metrics
    }
}

/// Runs provers and the trainer until the budget is spent.
///
/// With one worker everything happens on the calling thread in a fixed
/// order, so identical inputs give identical metrics (timings aside).
/// Otherwise `cfg.workers` prover threads share a controller and send
/// finished searches to the trainer over a bounded channel.
pub fn run_online<'a, O: OnlineOracle>(
    env: &Env,
    theorems: &[Theorem],
    oracle: &'a mut O,
    cfg: &'a RunConfig,
    log: Option<&'a mut dyn Write>,
) -> RunMetrics {
    assert!(!theorems.is_empty(), "run_online needs at least one statement");
    assert!(cfg.workers >= 1, "run_online needs at least one worker");
    let start = Instant::now();
    let controller = Mutex::new(Controller::new(theorems, cfg.seed, start));
    let latest = RwLock::new((oracle.version(), oracle.snapshot()));
    let regressions = AtomicU64::new(0);
    let emitted = (AtomicU64::new(0), AtomicU64::new(0));
    let new_holder = || {
        let l = latest.read().expect("snapshot lock");
        Holder { oracle: l.1.clone(), version: l.0, last: Instant::now(), since: 0 }
    };
    let mut trainer = Trainer {
        oracle,
        tactics: SampleQueue::new(cfg.queue_capacity),
        critics: SampleQueue::new(cfg.queue_capacity),
        rng: ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15),
        metrics: RunMetrics::new(theorems),
        log,
        start,
        cfg,
    };

    let publish = |trainer: &Trainer<'_, O>| {
        *latest.write().expect("snapshot lock") = (trainer.oracle.version(), trainer.oracle.snapshot());
    };
    let prove = |holder: &mut Holder, worker: usize| -> Option<Outcome> {
        let attempt = controller.lock().expect("controller lock").next(cfg)?;
        let refresh = if holder.due(cfg.refresh) {
            holder.refresh(&latest.read().expect("snapshot lock"), &regressions)
        } else {
            None
        };
        let mut o = run_attempt(env, theorems, holder.oracle.as_ref(), attempt, cfg);
        holder.since += 1;
        o.worker = worker;
        o.version = holder.version;
        o.refresh = refresh;
        emitted.0.fetch_add(o.tactics.len() as u64, Ordering::Relaxed);
        emitted.1.fetch_add(o.critics.len() as u64, Ordering::Relaxed);
        Some(o)
    };

    if cfg.workers == 1 {
        let mut holder = new_holder();
        while let Some(o) = prove(&mut holder, 0) {
            if trainer.handle(o, theorems, |s| controller.lock().expect("controller lock").retry.push_back(s)) {
                publish(&trainer);
            }
        }
    } else {
        let (tx, rx) = crossbeam_channel::bounded::<Outcome>(cfg.result_queue);
        std::thread::scope(|scope| {
            for worker in 0..cfg.workers {
                let tx = tx.clone();
                let prove = &prove;
                let new_holder = &new_holder;
                scope.spawn(move || {
                    let mut holder = new_holder();
                    while let Some(o) = prove(&mut holder, worker) {
                        if tx.send(o).is_err() {
                            break;
                        }
                    }
                });
            }
            drop(tx);
            for o in rx {
                if trainer.handle(o, theorems, |s| controller.lock().expect("controller lock").retry.push_back(s)) {
                    publish(&trainer);
                }
            }
        });
    }
    let emitted = (emitted.0.load(Ordering::Relaxed), emitted.1.load(Ordering::Relaxed));
    trainer.finish(emitted, regressions.load(Ordering::Relaxed))
}
