//! Prints one PASS/FAIL line per acceptance criterion; exits nonzero if
//! any criterion fails. Pass criterion numbers as arguments to run a subset.

fn main() {
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let results = hofa::acceptance::run(&only);
    for r in &results {
        println!("{}", r.line());
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
