//! Deterministic in-process runs.

use crossdrop_core::{load_library, load_ruleset, DRuleSet, DWorldState, CoreError};
use crossdrop_hub::{Engine, EngineConfig, Envelope, Message, Outbound};

use crate::log::{EventLog, LogRecord};
use crate::scenario::Scenario;

/// A finished run: the log plus the hub's final world.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub log: EventLog,
    pub world: DWorldState,
}

/// Tick at which an event scheduled at `at` seconds is injected.
pub fn tick_of(at: f64, tick_hz: u32) -> u64 {
    // The slack keeps 0.6 s at 60 Hz on tick 36 despite rounding.
    (at * tick_hz as f64 - 1e-9).ceil().max(0.0) as u64
}

pub fn run_scenario(scenario: &Scenario, tick_hz: u32) -> Result<EventLog, CoreError> {
    Ok(run_scenario_full(scenario, tick_hz)?.log)
}

/// Loads the scenario's library and ruleset, then runs it.
pub fn run_scenario_full(scenario: &Scenario, tick_hz: u32) -> Result<Outcome, CoreError> {
    let contents = load_library(&scenario.content_library)?;
    let rules: DRuleSet = load_ruleset(&scenario.ruleset)?;
    let config = EngineConfig {
        policy: scenario.policy,
        rules,
        // Sessions in a scripted run never time out.
        session_timeout: None,
        ..EngineConfig::default()
    };
    run_with_engine(Engine::with_contents(contents, config), scenario, tick_hz)
}

/// Drives `engine` through the scenario on a virtual clock.
///
/// The operator and the scenario's displays register before tick 0; their
/// deltas are left out of the log. Every
/// tick first injects the script events due at it, in file order, then
/// advances the clock to `tick / tick_hz`.
pub fn run_with_engine(mut engine: Engine, scenario: &Scenario, tick_hz: u32) -> Result<Outcome, CoreError> {
    if tick_hz == 0 {
        return Err(CoreError::InvalidArgument("tick_hz must be positive".into()));
    }
    scenario.validate().map_err(CoreError::InvalidArgument)?;
    let mut run = Runner {
        engine: &mut engine,
        log: EventLog::default(),
        logged_seq: 0,
        tick: 0,
        seqs: Default::default(),
    };
    let operator = run.open();
    run.send(&operator, Message::RegisterOperator {}, 0.0);
    for d in &scenario.displays {
        let s = run.open();
        run.send(&s, Message::RegisterDisplay { profile: d.clone() }, 0.0);
    }
    // Setup is fully described by the scenario file, so it is not logged.
    // A display that fails to register would still show up as an error.
    run.log.records.retain(|r| matches!(r.message, Message::Error { .. }));

    let last_tick = tick_of(scenario.end_time, tick_hz);
    let mut script = scenario.script.iter().peekable();
    for tick in 0..=last_tick {
        run.tick = tick;
        let now = tick as f64 / tick_hz as f64;
        while let Some(entry) = script.next_if(|e| tick_of(e.at, tick_hz) <= tick) {
            let session = match entry.event {
                Message::RegisterDisplay { .. } => run.open(),
                _ => operator.clone(),
            };
            run.send(&session, entry.event.clone(), now);
        }
        let out = run
            .engine
            .tick(now)
            .map_err(|e| CoreError::InvalidState(e.to_string()))?;
        run.record(&out);
    }
    let log = run.log;
    Ok(Outcome {
        log,
        world: engine.snapshot(),
    })
}

struct Runner<'a> {
    engine: &'a mut Engine,
    log: EventLog,
    /// World seq of the last delta logged; each delta is logged once even
    /// though it goes to every session.
    logged_seq: u64,
    tick: u64,
    seqs: std::collections::BTreeMap<String, u64>,
}

impl Runner<'_> {
    fn open(&mut self) -> String {
        let id = self.engine.open_session(self.engine.last_tick());
        self.seqs.insert(id.clone(), 0);
        id
    }

    fn send(&mut self, session: &str, message: Message, now: f64) {
        let seq = self.seqs.get_mut(session).expect("opened");
        *seq += 1;
        let out = self.engine.handle(session, Envelope::new(session, *seq, message), now);
        self.record(&out);
    }

    fn record(&mut self, out: &[Outbound]) {
        for o in out {
            let keep = match &o.envelope.message {
                Message::Delta(d) if d.seq > self.logged_seq => {
                    self.logged_seq = d.seq;
                    true
                }
                Message::Error { .. } => true,
                _ => false,
            };
            if keep {
                self.log.records.push(LogRecord {
                    tick: self.tick,
                    message: o.envelope.message.clone(),
                });
            }
        }
    }
}
