//! Runs every acceptance criterion at its stated tolerance and prints one
//! line per criterion. Exits non-zero if any criterion fails.

use ckn_core::verify::{run_all, VerifyConfig};

fn main() {
    println!("acceptance criteria:");
    let outcomes = run_all(&VerifyConfig::default());
    for o in &outcomes {
        println!("{o}");
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.id).collect();
    if failed.is_empty() {
        println!("all {} criteria passed", outcomes.len());
    } else {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
