use std::process::ExitCode;

use carlitz_core::selftest::{run_all, SelftestConfig};

fn main() -> ExitCode {
    let cfg = SelftestConfig {
        table_path: Some(std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("nu_scan.csv")),
        ..SelftestConfig::default()
    };
    println!("acceptance suite, seed {:#x}", cfg.seed);
    let results = run_all(&cfg, |r| println!("{r}"));
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        ExitCode::FAILURE
    }
}
