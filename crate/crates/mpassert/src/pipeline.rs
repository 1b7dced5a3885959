//! The full pipeline over one input file: parse, unfold, linearity,
//! well-assertedness, projection, typing with refinement, and optionally
//! simulation — rendering the classic two-stream report.

use serde::Serialize;

use crate::analysis;
use crate::diagnostics::{Verdict, Violation};
use crate::parse::{self, ProtocolFile};
use crate::presburger::{QeConfig, Solver};
use crate::projection;
use crate::runtime::{self, Scheduler, SimOptions, Trace};
use crate::syntax::{Formula, GlobalAssertion, GlobalBranchArm, Process, ProcessBranchArm};
use crate::typing::{self, TypingMode};

/// Pipeline configuration, mirroring the CLI flags.
#[derive(Debug, Clone)]
pub struct PipelineFlags {
    /// Simulate after successful verification.
    pub run: bool,
    pub mode: TypingMode,
    pub seed: Option<u64>,
    /// Replace every assertion by the trivial one before checking.
    pub no_assertions: bool,
    /// Step budget for the decision procedure.
    pub qe_budget: Option<u64>,
    /// Simulate even when verification failed.
    pub force: bool,
    /// Continue through failing stages.
    pub keep_going: bool,
    /// Monitor assertions during simulation.
    pub monitor: bool,
}

impl Default for PipelineFlags {
    fn default() -> Self {
        PipelineFlags {
            run: false,
            mode: TypingMode::Multiparty,
            seed: None,
            no_assertions: false,
            qe_budget: None,
            force: false,
            keep_going: false,
            monitor: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ok,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageResult {
    pub name: String,
    pub status: StageStatus,
}

/// One rendered diagnostic; `line`/`col` are present where the source
/// position is known.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub stage: String,
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub col: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedType {
    pub participant: String,
    pub local_type: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TypedLine {
    pub participant: String,
    pub session: String,
    pub local_type: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MismatchLine {
    pub participant: String,
    pub path: String,
    pub inferred: String,
    pub projected: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceLine {
    pub step: usize,
    pub participant: String,
    pub action: String,
    pub channel: Option<String>,
    pub payload: String,
}

/// Everything one pipeline run produced; renders to text or JSON.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub file: String,
    pub mode: String,
    pub status: String,
    pub stages: Vec<StageResult>,
    pub diagnostics: Vec<Diagnostic>,
    pub projections: Vec<NamedType>,
    pub types: Vec<TypedLine>,
    pub mismatches: Vec<MismatchLine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceLine>>,
    #[serde(skip)]
    pub exit_code: i32,
}

impl Report {
    fn new(file: &str, mode: TypingMode) -> Self {
        Report {
            file: file.to_string(),
            mode: mode.name().to_string(),
            status: "ok".to_string(),
            stages: Vec::new(),
            diagnostics: Vec::new(),
            projections: Vec::new(),
            types: Vec::new(),
            mismatches: Vec::new(),
            trace: None,
            exit_code: 0,
        }
    }

    fn stage(&mut self, name: &str, status: StageStatus) {
        self.stages.push(StageResult { name: name.to_string(), status });
        if status == StageStatus::Failed {
            self.status = "failed".to_string();
            self.exit_code = 1;
        }
    }

    fn diagnostic(&mut self, stage: &str, violation: &Violation) {
        self.diagnostics.push(Diagnostic {
            stage: stage.to_string(),
            kind: violation.kind.label().to_string(),
            message: violation.message.clone(),
            line: violation.pos.map(|p| p.line),
            col: violation.pos.map(|p| p.col),
            path: Some(violation.path.clone()),
        });
    }

    /// The text report, one section per stream.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let stage_ok = |name: &str| {
            self.stages.iter().any(|s| s.name == name && s.status == StageStatus::Ok)
        };
        let stage_ran = |name: &str| {
            self.stages.iter().any(|s| s.name == name && s.status != StageStatus::Skipped)
        };
        if stage_ok("parse") {
            out.push_str("Parsing successful\n");
        }
        if stage_ok("well-assertedness") {
            if stage_ok("linearity") {
                out.push_str("Global description is well-asserted (and linear)\n");
            } else if !stage_ran("linearity") {
                out.push_str("Global description is well-asserted\n");
            }
        }
        for d in &self.diagnostics {
            // Refinement mismatches get their own block below.
            if d.kind == "TypeMismatch" {
                continue;
            }
            out.push('\n');
            match (d.line, d.col) {
                (Some(line), Some(col)) => {
                    out.push_str(&format!("{}:{}:{}: {}\n", self.file, line, col, d.message));
                }
                _ => {
                    if let Some(path) = &d.path {
                        out.push_str(&format!("{} at {}: {}\n", d.kind, path, d.message));
                    } else {
                        out.push_str(&format!("{}: {}\n", d.kind, d.message));
                    }
                }
            }
        }
        if !self.projections.is_empty() {
            out.push_str("\nProjections:\n");
            for p in &self.projections {
                out.push_str(&format!("{}: {}\n", p.participant, p.local_type));
            }
        }
        if !self.types.is_empty() {
            out.push_str("\nTypes:\n");
            for t in &self.types {
                out.push_str(&format!("{}: {} |- {}\n", t.participant, t.session, t.local_type));
            }
        }
        for m in &self.mismatches {
            out.push_str(&format!(
                "\nLocal type doesn't match projection for {}!\n\
                 Type:       {}\n\
                 Projection: {}\n",
                m.participant, m.inferred, m.projected
            ));
        }
        if self.mismatches.is_empty()
            && stage_ok("typing")
            && !self.types.is_empty()
        {
            out.push_str("\nAll local types match their projections.\n");
        }
        if let Some(trace) = &self.trace {
            out.push_str("\nTrace:\n");
            for e in trace {
                out.push_str(&format!(
                    "{} {} {} {} {}\n",
                    e.step,
                    e.participant,
                    e.action,
                    e.channel.as_deref().unwrap_or("-"),
                    if e.payload.is_empty() { "-" } else { &e.payload }
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serialises")
    }
}

/// Runs the pipeline on file contents. `file_name` is used in diagnostics
/// only.
pub fn run_on_text(file_name: &str, text: &str, flags: &PipelineFlags) -> Report {
    let mut report = Report::new(file_name, flags.mode);
    let solver = match flags.qe_budget {
        Some(max_steps) => Solver::with_config(QeConfig { max_steps }),
        None => Solver::new(),
    };

    // Stage: parse.
    let file = match parse::parse_protocol_file(text) {
        Ok(file) => file,
        Err(err) => {
            report.stage("parse", StageStatus::Failed);
            report.diagnostics.push(Diagnostic {
                stage: "parse".into(),
                kind: "ParseError".into(),
                message: err.kind.to_string(),
                line: Some(err.pos.line),
                col: Some(err.pos.col),
                path: None,
            });
            return report;
        }
    };
    report.stage("parse", StageStatus::Ok);
    let file = if flags.no_assertions { strip_assertions(&file) } else { file };

    // Stream 1: unfold, linearity, well-assertedness, projection.
    let unfolded = analysis::unfold_once(&file.global);
    report.stage("unfold", StageStatus::Ok);

    if flags.mode == TypingMode::Multiparty {
        let linearity = analysis::check_linearity(&unfolded);
        for v in &linearity.violations {
            report.diagnostic("linearity", v);
        }
        let status = if linearity.is_ok() { StageStatus::Ok } else { StageStatus::Failed };
        report.stage("linearity", status);
        if status == StageStatus::Failed && !flags.keep_going {
            return report;
        }
    } else {
        // Binary sessions go straight to typing; there is no race to rule
        // out on two-party channels.
        report.stage("linearity", StageStatus::Skipped);
    }

    match analysis::check_well_asserted(&file.global, &solver) {
        Ok(wa) => {
            for v in &wa.violations {
                report.diagnostic("well-assertedness", v);
            }
            let status =
                if wa.verdict() == Verdict::Ok { StageStatus::Ok } else { StageStatus::Failed };
            report.stage("well-assertedness", status);
            if status == StageStatus::Failed && !flags.keep_going {
                return report;
            }
        }
        Err(err) => {
            report.stage("well-assertedness", StageStatus::Failed);
            report.diagnostics.push(Diagnostic {
                stage: "well-assertedness".into(),
                kind: "Logic".into(),
                message: err.to_string(),
                line: None,
                col: None,
                path: None,
            });
            if !flags.keep_going {
                return report;
            }
        }
    }

    let projections = match projection::project_all(&file.global) {
        Ok(projections) => {
            report.stage("projection", StageStatus::Ok);
            for (participant, local) in &projections {
                report.projections.push(NamedType {
                    participant: participant.name().to_string(),
                    local_type: local.to_string(),
                });
            }
            projections
        }
        Err(err) => {
            report.stage("projection", StageStatus::Failed);
            report.diagnostics.push(Diagnostic {
                stage: "projection".into(),
                kind: "Projection".into(),
                message: err.to_string(),
                line: None,
                col: None,
                path: None,
            });
            return report;
        }
    };

    // Stream 2: inference, composition, refinement.
    if !file.participants.is_empty() {
        let outcome = typing::validate_all(&file, &projections, flags.mode, &solver);
        for t in &outcome.typed {
            let session = file
                .process_of(t.participant.name())
                .map(session_header)
                .unwrap_or_default();
            report.types.push(TypedLine {
                participant: t.participant.name().to_string(),
                session,
                local_type: t.ty.to_string(),
            });
        }
        for m in &outcome.mismatches {
            report.mismatches.push(MismatchLine {
                participant: m.participant.name().to_string(),
                path: m.mismatch.path.to_string(),
                inferred: m.inferred.to_string(),
                projected: m.projected.to_string(),
                reason: m.mismatch.reason.clone(),
            });
        }
        for v in &outcome.report.violations {
            report.diagnostic("typing", v);
        }
        let status =
            if outcome.report.is_ok() { StageStatus::Ok } else { StageStatus::Failed };
        report.stage("typing", status);
        if status == StageStatus::Failed && !flags.keep_going && !flags.force {
            return report;
        }
    }

    // Simulation, on request.
    if flags.run {
        let verified = report.status == "ok";
        if !verified && !flags.force {
            report.stage("simulation", StageStatus::Skipped);
            return report;
        }
        let options = SimOptions {
            monitor_assertions: flags.monitor,
            scheduler: match flags.seed {
                Some(seed) => Scheduler::Seeded(seed),
                None => Scheduler::RoundRobin,
            },
        };
        match runtime::simulate(&file, &options, &solver) {
            Ok(trace) => {
                report.stage("simulation", StageStatus::Ok);
                report.trace = Some(trace_lines(&trace));
            }
            Err(err) => {
                report.stage("simulation", StageStatus::Failed);
                report.diagnostics.push(Diagnostic {
                    stage: "simulation".into(),
                    kind: "Runtime".into(),
                    message: err.to_string(),
                    line: None,
                    col: None,
                    path: None,
                });
            }
        }
    }
    report
}

/// Runs the pipeline on a file path. IO failures exit with code 2.
pub fn run_on_file(path: &std::path::Path, flags: &PipelineFlags) -> Result<Report, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    Ok(run_on_text(&path.display().to_string(), &text, flags))
}

fn trace_lines(trace: &Trace) -> Vec<TraceLine> {
    trace
        .events
        .iter()
        .map(|e| TraceLine {
            step: e.step,
            participant: e.participant.name().to_string(),
            action: e.action.name().to_string(),
            channel: e.channel.as_ref().map(|c| c.name().to_string()),
            payload: e.payload.clone(),
        })
        .collect()
}

/// The session heading of a participant, e.g. `init:a[B1,B2,S](s,b1,b2)`.
fn session_header(p: &Process) -> String {
    match p {
        Process::Init { service, participants, channels, .. } => {
            let names: Vec<&str> = participants.iter().map(|p| p.name()).collect();
            let chans: Vec<&str> = channels.iter().map(|c| c.name()).collect();
            format!("init:{service}[{}]({})", names.join(","), chans.join(","))
        }
        Process::Join { service, participant, channels, .. } => {
            let chans: Vec<&str> = channels.iter().map(|c| c.name()).collect();
            format!("join:{service}[{participant}]({})", chans.join(","))
        }
        _ => String::new(),
    }
}

/// Replaces every assertion by the trivial `[-]`, for running descriptions
/// without their contracts.
fn strip_assertions(file: &ProtocolFile) -> ProtocolFile {
    ProtocolFile {
        global: strip_global(&file.global),
        participants: file
            .participants
            .iter()
            .map(|(p, process)| (p.clone(), strip_process(process)))
            .collect(),
        source_map: file.source_map.clone(),
    }
}

fn strip_global(g: &GlobalAssertion) -> GlobalAssertion {
    match g {
        GlobalAssertion::Interaction {
            sender,
            receiver,
            channel,
            payload_var,
            sort,
            continuation,
            ..
        } => GlobalAssertion::Interaction {
            sender: sender.clone(),
            receiver: receiver.clone(),
            channel: channel.clone(),
            payload_var: payload_var.clone(),
            sort: *sort,
            assertion: Formula::True,
            continuation: Box::new(strip_global(continuation)),
        },
        GlobalAssertion::Branch { sender, receiver, channel, branch_id, arms } => {
            GlobalAssertion::Branch {
                sender: sender.clone(),
                receiver: receiver.clone(),
                channel: channel.clone(),
                branch_id: branch_id.clone(),
                arms: arms
                    .iter()
                    .map(|arm| GlobalBranchArm {
                        label: arm.label.clone(),
                        assertion: Formula::True,
                        continuation: strip_global(&arm.continuation),
                    })
                    .collect(),
            }
        }
        GlobalAssertion::Rec { var, params, body, .. } => GlobalAssertion::Rec {
            var: var.clone(),
            params: params.clone(),
            invariant: Formula::True,
            body: Box::new(strip_global(body)),
        },
        GlobalAssertion::Call { .. } | GlobalAssertion::End => g.clone(),
    }
}

fn strip_process(p: &Process) -> Process {
    match p {
        Process::Init { service, participants, channels, body } => Process::Init {
            service: service.clone(),
            participants: participants.clone(),
            channels: channels.clone(),
            body: Box::new(strip_process(body)),
        },
        Process::Join { service, participant, channels, body } => Process::Join {
            service: service.clone(),
            participant: participant.clone(),
            channels: channels.clone(),
            body: Box::new(strip_process(body)),
        },
        Process::Send { channel, expr, payload_var, sort, body, .. } => Process::Send {
            channel: channel.clone(),
            expr: expr.clone(),
            payload_var: payload_var.clone(),
            sort: *sort,
            assertion: Formula::True,
            body: Box::new(strip_process(body)),
        },
        Process::Receive { channel, payload_var, sort, body, .. } => Process::Receive {
            channel: channel.clone(),
            payload_var: payload_var.clone(),
            sort: *sort,
            assertion: Formula::True,
            body: Box::new(strip_process(body)),
        },
        Process::Select { channel, branch_id, label, body, .. } => Process::Select {
            channel: channel.clone(),
            assertion: Formula::True,
            branch_id: branch_id.clone(),
            label: label.clone(),
            body: Box::new(strip_process(body)),
        },
        Process::Branch { channel, branch_id, arms } => Process::Branch {
            channel: channel.clone(),
            branch_id: branch_id.clone(),
            arms: arms
                .iter()
                .map(|arm| ProcessBranchArm {
                    label: arm.label.clone(),
                    assertion: Formula::True,
                    body: strip_process(&arm.body),
                })
                .collect(),
        },
        Process::IfThenElse { cond, then_body, else_body } => Process::IfThenElse {
            cond: cond.clone(),
            then_body: Box::new(strip_process(then_body)),
            else_body: Box::new(strip_process(else_body)),
        },
        Process::Rec { var, value_args, channel_args, value_params, channel_params, body } => {
            Process::Rec {
                var: var.clone(),
                value_args: value_args.clone(),
                channel_args: channel_args.clone(),
                value_params: value_params.clone(),
                channel_params: channel_params.clone(),
                body: Box::new(strip_process(body)),
            }
        }
        Process::Call { .. } | Process::Inact => p.clone(),
    }
}
