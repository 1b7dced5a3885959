//! Run the whole verification pipeline over a protocol file and print the
//! report: parsing, linearity, well-assertedness, projections, inferred
//! types and the refinement verdict.
//!
//!     cargo run --example check_protocol [FILE]

use mpassert::pipeline::{run_on_file, PipelineFlags};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/protocols/buyer_seller.gp").to_string()
    });
    let report = run_on_file(std::path::Path::new(&path), &PipelineFlags::default())
        .unwrap_or_else(|e| {
            eprintln!("{e}");
            std::process::exit(2);
        });
    print!("{}", report.render_text());
    std::process::exit(report.exit_code);
}
