//! Pipeline and CLI tests: golden report outputs, the failure modes of the
//! two mutations, exit codes of the installed binary, JSON schema
//! conformance, and the remaining flags.

mod common;

use std::process::Command;

use mpassert::pipeline::{run_on_text, PipelineFlags};
use mpassert::typing::TypingMode;

fn golden(name: &str) -> String {
    std::fs::read_to_string(format!(
        "{}/tests/golden/{name}",
        env!("CARGO_MANIFEST_DIR")
    ))
    .unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mpassert"))
}

fn protocol_path(name: &str) -> String {
    format!("{}/protocols/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn buyer_seller_report_matches_golden() {
    let report = run_on_text("buyer_seller.gp", &common::buyer_seller_text(), &PipelineFlags::default());
    assert_eq!(report.exit_code, 0);
    assert_eq!(report.render_text(), golden("buyer_seller.out"));
}

#[test]
fn guessing_game_report_matches_golden() {
    let report = run_on_text("guessing_game.gp", &common::guessing_game_text(), &PipelineFlags::default());
    assert_eq!(report.exit_code, 0);
    assert_eq!(report.render_text(), golden("guessing_game.out"));
}

#[test]
fn mismatch_report_prints_type_and_projection() {
    let mutated = common::buyer_seller_text().replace(
        "s!(\"The art of computer programming\")(t:string)[-];",
        "s!(112)(t:int)[-];",
    );
    let report = run_on_text("mutated.gp", &mutated, &PipelineFlags::default());
    assert_eq!(report.exit_code, 1);
    let text = report.render_text();
    assert!(text.contains("Local type doesn't match projection for B1!"));
    assert!(text.contains("Type:       s!<t:int> [true];"));
    assert!(text.contains("Projection: s!<t:string> [true];"));
}

#[test]
fn typing_send_diagnostic_carries_file_position() {
    let mutated = common::buyer_seller_text()
        .replace("b1!(100)(q:int)[q > 50];", "b1!(0)(q:int)[q > 50];");
    let report = run_on_text("mutated.gp", &mutated, &PipelineFlags::default());
    assert_eq!(report.exit_code, 1);
    let text = report.render_text();
    assert!(
        text.contains("[Typing-Send] Assertion not satisfiable: true => 0 > 50"),
        "{text}"
    );
    // Rendered as file:line:col.
    assert!(text.contains("mutated.gp:"), "{text}");
}

#[test]
fn parse_errors_render_as_file_line_col() {
    let report = run_on_text("broken.gp", "A -> A : k(x:int)[-]; end", &PipelineFlags::default());
    assert_eq!(report.exit_code, 1);
    let text = report.render_text();
    assert!(text.contains("broken.gp:1:1:"), "{text}");
}

#[test]
fn json_report_validates_against_the_schema() {
    let schema: serde_json::Value = serde_json::from_str(&golden("report.schema.json")).unwrap();
    let flags = PipelineFlags { run: true, ..PipelineFlags::default() };
    for (name, text) in [
        ("buyer_seller.gp", common::buyer_seller_text()),
        ("guessing_game.gp", common::guessing_game_text()),
    ] {
        let report = run_on_text(name, &text, &flags);
        common::schema::validate(&report.to_json(), &schema)
            .unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    // Failing runs validate too, and the JSON carries every diagnostic the
    // text output shows.
    let mutated = common::buyer_seller_text()
        .replace("b1!(100)(q:int)[q > 50];", "b1!(0)(q:int)[q > 50];");
    let report = run_on_text("mutated.gp", &mutated, &PipelineFlags::default());
    let json = report.to_json();
    common::schema::validate(&json, &schema).unwrap();
    let diagnostics = json["diagnostics"].as_array().unwrap();
    assert!(diagnostics
        .iter()
        .any(|d| d["message"].as_str().unwrap().contains("[Typing-Send]")));
}

#[test]
fn no_assertions_treats_contracts_as_trivial() {
    // With assertions stripped, even the broken seller passes: the
    // assertion language degenerates to [-] everywhere.
    let mutated = common::buyer_seller_text()
        .replace("b1!(100)(q:int)[q > 50];", "b1!(0)(q:int)[q > 50];");
    let flags = PipelineFlags { no_assertions: true, ..PipelineFlags::default() };
    let report = run_on_text("mutated.gp", &mutated, &flags);
    assert_eq!(report.exit_code, 0, "{}", report.render_text());
}

#[test]
fn keep_going_reports_later_stages() {
    // A linearity race plus nothing else: with --keep-going the projection
    // stage still reports.
    let text = "A -> B : k(x:int)[-]; C -> D : k(y:int)[-]; end";
    let stop = run_on_text("race.gp", text, &PipelineFlags::default());
    assert!(stop.projections.is_empty());
    let keep = run_on_text(
        "race.gp",
        text,
        &PipelineFlags { keep_going: true, ..PipelineFlags::default() },
    );
    assert_eq!(keep.exit_code, 1);
    assert_eq!(keep.projections.len(), 4);
}

#[test]
fn binary_mode_skips_linearity_and_checks_duality() {
    let text = "\
C -> Srv : k(x:int)[x > 0];
Srv -> C : b(y:int)[y >= x];
end

C :: init:svc[C,Srv](k,b).
  k!(7)(x:int)[x > 0];
  b?(y:int)[y >= x];
  end

Srv :: join:svc[Srv](k,b).
  k?(x:int)[x > 0];
  b!(x + 1)(y:int)[y >= x];
  end
";
    let flags = PipelineFlags { mode: TypingMode::Binary, ..PipelineFlags::default() };
    let report = run_on_text("binary.gp", text, &flags);
    assert_eq!(report.exit_code, 0, "{}", report.render_text());
    let json = report.to_json();
    let stages = json["stages"].as_array().unwrap();
    assert!(stages
        .iter()
        .any(|s| s["name"] == "linearity" && s["status"] == "skipped"));
    assert!(report.render_text().contains("Global description is well-asserted\n"));
}

#[test]
fn cli_exit_codes() {
    // 0: clean verification.
    let ok = bin().arg("check").arg(protocol_path("buyer_seller.gp")).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    // Default subcommand: a bare file argument checks it.
    let bare = bin().arg(protocol_path("buyer_seller.gp")).output().unwrap();
    assert_eq!(bare.status.code(), Some(0));

    // 2: unreadable input.
    let missing = bin().arg("check").arg("no_such_file.gp").output().unwrap();
    assert_eq!(missing.status.code(), Some(2));

    // 2: usage error.
    let usage = bin().output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn cli_reports_mutation_failure_with_exit_1() {
    let mutated = common::buyer_seller_text().replace(
        "s!(\"The art of computer programming\")(t:string)[-];",
        "s!(112)(t:int)[-];",
    );
    let dir = std::env::temp_dir().join("mpassert-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("mutated_buyer_seller.gp");
    std::fs::write(&path, mutated).unwrap();
    let out = bin().arg("check").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Local type doesn't match projection for B1!"), "{stdout}");
}

#[test]
fn cli_run_prints_trace() {
    let out = bin()
        .arg("check")
        .arg(protocol_path("guessing_game.gp"))
        .arg("--run")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Trace:"), "{stdout}");
    assert!(stdout.contains("recCall - t(15,4)"), "{stdout}");
}

#[test]
fn cli_qe_subcommand() {
    let out = bin()
        .arg("qe")
        .arg("forall q:int. q > 50 => q > 0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Result:      true"), "{stdout}");

    let json_out = bin()
        .arg("qe")
        .arg("exists x:int. 2 * x = y")
        .arg("--json")
        .output()
        .unwrap();
    let value: serde_json::Value =
        serde_json::from_slice(&json_out.stdout).expect("qe --json emits JSON");
    assert_eq!(value["eliminated_quantifiers"], 1);

    let budget = bin()
        .arg("qe")
        .arg("forall a:int. forall b:int. forall c:int. exists d:int. exists e:int. \
              (5*d + 7*e > 3*a - 2*b + c && 7*d - 5*e < 2*a + 3*b - 4*c) && \
              (3*d - 11*e > a + b + c || 11*d + 3*e < a - b + 2*c)")
        .arg("--qe-budget")
        .arg("10000")
        .output()
        .unwrap();
    assert_eq!(budget.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&budget.stderr).contains("budget"));
}

#[test]
fn cli_seeded_run_completes() {
    let out = bin()
        .arg("check")
        .arg(protocol_path("buyer_seller.gp"))
        .arg("--run")
        .arg("--seed")
        .arg("7")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn approval_protocol_carries_booleans_end_to_end() {
    // Boolean payloads: the approver sends the comparison itself, which is
    // what makes its truthfulness assertion provable.
    let text = std::fs::read_to_string(protocol_path("approval.gp")).unwrap();
    let flags = PipelineFlags { run: true, ..PipelineFlags::default() };
    let report = run_on_text("approval.gp", &text, &flags);
    assert_eq!(report.exit_code, 0, "{}", report.render_text());
    let a = report.types.iter().find(|t| t.participant == "A").unwrap();
    assert_eq!(
        a.local_type,
        "req?<amount:int> [amount>0];dec!<ok:bool> [ok => amount<=100];end"
    );
    let r = report.projections.iter().find(|p| p.participant == "R").unwrap();
    assert_eq!(
        r.local_type,
        "req!<amount:int> [amount>0];dec?<ok:bool> [(ok => amount<=100) && amount>0];end"
    );
    let trace = report.trace.as_ref().unwrap();
    assert!(trace.iter().any(|e| e.action == "send" && e.payload == "true"));

    // Lifting the amount over the limit flips the flag but still verifies.
    let big = text.replace("req!(42)", "req!(4200)");
    let report = run_on_text("approval.gp", &big, &flags);
    assert_eq!(report.exit_code, 0);
    let trace = report.trace.as_ref().unwrap();
    assert!(trace.iter().any(|e| e.action == "send" && e.payload == "false"));
}

#[test]
fn force_runs_unverified_systems() {
    // The int-payload mutant fails refinement but still executes: payloads
    // travel serialised, so the seller happily treats "112" as the title.
    let mutated = common::buyer_seller_text().replace(
        "s!(\"The art of computer programming\")(t:string)[-];",
        "s!(112)(t:int)[-];",
    );
    let flags = PipelineFlags { run: true, force: true, monitor: false, ..PipelineFlags::default() };
    let report = run_on_text("mutated.gp", &mutated, &flags);
    assert_eq!(report.exit_code, 1); // verification still failed
    let trace = report.trace.as_ref().expect("forced simulation ran");
    assert!(trace.iter().any(|e| e.action == "send" && e.payload == "112"));

    // Without --force the simulation stage is skipped.
    let flags = PipelineFlags { run: true, ..PipelineFlags::default() };
    let report = run_on_text("mutated.gp", &mutated, &flags);
    assert!(report.trace.is_none());
}
