//! Run a config file through the experiment runner, as the `solve` binary does.
//!
//! `cargo run --example run_config -- examples/configs/sweep.conf`

use kirchhoff_nehari::runner::{load_config, run};

fn main() -> kirchhoff_nehari::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/sweep.conf").into());
    let mut cfg = load_config(&path)?;
    cfg.output.dir = std::env::temp_dir().join("kirchhoff-nehari-run");
    let out = run(&cfg)?;
    println!("{} mode, regime {}, {:.2}s", cfg.mode, out.manifest.regime, out.manifest.wall_time_s);
    for f in &out.manifest.files {
        println!("  {}", out.dir.join(f).display());
    }
    Ok(())
}
