//! Binary sessions: the same inference algorithm under the dual
//! compatibility and Bottom-producing composition. Two endpoints of a
//! client/server exchange compose away into internal channels.
//!
//!     cargo run --example binary_duality

use mpassert::parse_process;
use mpassert::presburger::Solver;
use mpassert::syntax::Participant;
use mpassert::typing::{dual, infer_type, TypingMode};

fn main() {
    let solver = Solver::new();
    let mode = TypingMode::Binary;

    let client = parse_process(
        "init:svc[C,Srv](req,rsp). req!(7)(x:int)[x > 0]; rsp?(y:int)[y >= x]; end",
    )
    .unwrap();
    let server = parse_process(
        "join:svc[Srv](req,rsp). req?(x:int)[x > 0]; rsp!(x + 1)(y:int)[y >= x]; end",
    )
    .unwrap();

    let client_env = infer_type(&client, &mode, &solver).unwrap();
    let server_env = infer_type(&server, &mode, &solver).unwrap();
    let client_ty = client_env.type_of(&Participant::new("C")).unwrap();
    let server_ty = server_env.type_of(&Participant::new("Srv")).unwrap();
    println!("client: {client_ty}");
    println!("server: {server_ty}");
    println!("dual(client) == server: {}", &dual(client_ty) == server_ty);

    match mode.compose(&client_env, &server_env) {
        Ok(composed) => {
            println!("composed environment:");
            for entry in &composed.entries {
                println!("  {entry}");
            }
        }
        Err(reason) => println!("incompatible: {reason}"),
    }

    // Flipping one assertion breaks duality.
    let lax_server = parse_process(
        "join:svc[Srv](req,rsp). req?(x:int)[x > 1]; rsp!(x + 1)(y:int)[y >= x]; end",
    )
    .unwrap();
    let lax_env = infer_type(&lax_server, &mode, &solver).unwrap();
    match mode.compose(&client_env, &lax_env) {
        Ok(_) => println!("unexpectedly compatible"),
        Err(reason) => println!("as expected, not dual: {reason}"),
    }
}
