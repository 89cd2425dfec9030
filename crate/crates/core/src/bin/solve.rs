use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kirchhoff_nehari::runner::{load_config_with, run};

/// Run a Nehari-manifold experiment described by a key = value config file.
#[derive(Parser)]
#[command(name = "solve", version)]
struct Cli {
    config: PathBuf,
    /// thresholds, solve, sweep or oracle
    #[arg(long)]
    mode: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut overrides = Vec::new();
    if let Some(m) = cli.mode {
        overrides.push(("mode", m));
    }
    if let Some(d) = cli.out {
        overrides.push(("output.dir", d.display().to_string()));
    }
    if let Some(s) = cli.seed {
        overrides.push(("seed", s.to_string()));
    }
    if let Some(r) = cli.restarts {
        overrides.push(("restarts", r.to_string()));
    }

    let result = load_config_with(&cli.config, &overrides).and_then(|cfg| run(&cfg));
    match result {
        Ok(out) => {
            let m = &out.manifest;
            println!("{} run ({}) finished in {:.2}s", m.config.mode, m.regime, m.wall_time_s);
            for f in &m.files {
                println!("  {}", out.dir.join(f).display());
            }
            for f in &m.flags {
                println!("  flag {f}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error [{}]: {e}", e.class());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
