//! Execution of verified systems: one sequential unit per participant,
//! unbounded FIFO channels, deterministic round-robin or seeded random
//! scheduling, and optional runtime assertion monitoring. This realises the
//! code-generation stage as an interpreter.

mod engine;
mod value;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use value::{deserialize_value, serialize_label, serialize_value, DecodeError, Value};

use crate::parse::ProtocolFile;
use crate::presburger::{LogicError, Solver};
use crate::syntax::{Channel, Participant, Process};

use engine::{event, Channels, StepOutcome, Task};

/// What a participant did at one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Send,
    Receive,
    Select,
    Branch,
    RecCall,
    End,
}

impl Action {
    pub fn name(self) -> &'static str {
        match self {
            Action::Send => "send",
            Action::Receive => "receive",
            Action::Select => "select",
            Action::Branch => "branch",
            Action::RecCall => "recCall",
            Action::End => "end",
        }
    }
}

/// One observable action: `<step> <participant> <action> <channel>
/// <payload>` when printed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub step: usize,
    pub participant: Participant,
    pub action: Action,
    pub channel: Option<Channel>,
    pub payload: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let channel = self.channel.as_ref().map(|c| c.name()).unwrap_or("-");
        write!(
            f,
            "{} {} {} {} {}",
            self.step,
            self.participant,
            self.action.name(),
            channel,
            if self.payload.is_empty() { "-" } else { &self.payload }
        )
    }
}

/// The full interleaved history of one simulation run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    /// The subsequence belonging to one participant.
    pub fn of(&self, participant: &str) -> Vec<&TraceEvent> {
        self.events.iter().filter(|e| e.participant.name() == participant).collect()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Scheduling policy: deterministic round robin (one action per participant
/// per round, in file order) or a seeded random interleaving.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheduler {
    RoundRobin,
    Seeded(u64),
}

#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub monitor_assertions: bool,
    pub scheduler: Scheduler,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { monitor_assertions: false, scheduler: Scheduler::RoundRobin }
    }
}

#[derive(Debug, Clone, Error)]
pub enum RuntimeError {
    #[error("deadlock: {}", render_blocked(.0))]
    Deadlock(Vec<(Participant, Channel)>),
    /// Unreachable for verified inputs; reaching it indicates a toolchain
    /// bug upstream of the simulator.
    #[error("assertion monitor violation at {participant}: [{assertion}] under {store}")]
    MonitorViolation { participant: Participant, assertion: String, store: String },
    #[error(transparent)]
    Decode(DecodeError),
    #[error(transparent)]
    Logic(LogicError),
    #[error("session setup failed: {0}")]
    Setup(String),
    #[error("runtime invariant broken: {0}")]
    Internal(String),
}

fn render_blocked(blocked: &[(Participant, Channel)]) -> String {
    blocked
        .iter()
        .map(|(p, c)| format!("{p} awaits {c}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Small deterministic generator for the seeded scheduler; self-contained
/// so traces stay stable across dependency upgrades.
struct SplitMix(u64);

impl SplitMix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
}

/// Runs the system to completion. Session initiation synchronises all
/// declared participants on the shared service, creates the channels fresh
/// and starts every unit at its body; the trace then records every
/// observable action until all units reach `end`.
pub fn simulate(
    file: &ProtocolFile,
    options: &SimOptions,
    solver: &Solver,
) -> Result<Trace, RuntimeError> {
    let mut session_channels: Option<Vec<Channel>> = None;
    let mut tasks: Vec<Task> = Vec::new();
    for (participant, process) in &file.participants {
        let (channels, body) = match process {
            Process::Init { channels, body, .. } | Process::Join { channels, body, .. } => {
                (channels.clone(), (**body).clone())
            }
            _ => {
                return Err(RuntimeError::Setup(format!(
                    "participant `{participant}` does not open the session"
                )))
            }
        };
        match &session_channels {
            None => session_channels = Some(channels),
            Some(seen) if *seen == channels => {}
            Some(_) => {
                return Err(RuntimeError::Setup(
                    "participants disagree on the session channels".into(),
                ))
            }
        }
        tasks.push(Task::new(
            participant.clone(),
            body,
            session_channels.as_ref().unwrap(),
            options.monitor_assertions,
        ));
    }
    let Some(session_channels) = session_channels else {
        return Ok(Trace::default()); // empty system
    };
    let mut channels = Channels::new(&session_channels);
    let mut trace = Trace::default();
    let mut step = 1usize;
    let mut rng = match options.scheduler {
        Scheduler::Seeded(seed) => Some(SplitMix(seed)),
        Scheduler::RoundRobin => None,
    };

    loop {
        if tasks.iter().all(Task::is_done) {
            return Ok(trace);
        }
        let mut progressed = false;
        let mut blocked: Vec<(Participant, Channel)> = Vec::new();
        let order: Vec<usize> = match &mut rng {
            None => (0..tasks.len()).collect(),
            Some(rng) => {
                // Fisher-Yates on the task indices.
                let mut order: Vec<usize> = (0..tasks.len()).collect();
                for i in (1..order.len()).rev() {
                    let j = (rng.next() % (i as u64 + 1)) as usize;
                    order.swap(i, j);
                }
                order
            }
        };
        for idx in order {
            let task = &mut tasks[idx];
            if task.is_done() {
                continue;
            }
            match task.step(&mut channels, solver)? {
                StepOutcome::Progressed(action, channel, payload) => {
                    let participant = task.participant.clone();
                    trace.events.push(event(step, &participant, action, channel, payload));
                    step += 1;
                    progressed = true;
                }
                StepOutcome::Blocked(channel) => {
                    blocked.push((task.participant.clone(), channel));
                }
                StepOutcome::Done => {}
            }
        }
        if !progressed {
            return Err(RuntimeError::Deadlock(blocked));
        }
    }
}
