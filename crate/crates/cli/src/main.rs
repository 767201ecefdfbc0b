use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hyperbolic_dss::harness::{
    compare_runs, exit_code_for, restart_check, run_batch, search_cert, CheckName, ExperimentConfig, Summary,
    EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_PASS,
};
use hyperbolic_dss::Error;

#[derive(Parser)]
#[command(name = "dss", about = "Boundary-controlled hyperbolic system experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one or more experiment configs.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Output directory (with several configs, one subdirectory per config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated checks, e.g. `sandwich,dss`.
        #[arg(long)]
        checks: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Search for a certificate and print the report.
    SearchCert { config: PathBuf },
    /// Compare summaries in the given order.
    Compare {
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
    },
    /// Check that split-and-resume matches a monolithic run.
    RestartCheck {
        config: PathBuf,
        #[arg(long)]
        split: f64,
    },
}

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    exit_code_for(e)
}

fn print_json(v: &impl serde::Serialize) {
    match serde_json::to_string_pretty(v) {
        Ok(s) => println!("{s}"),
        Err(e) => eprintln!("error: {e}"),
    }
}

fn load(path: &Path, checks: Option<&str>, seed: Option<u64>) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(list) = checks {
        let parsed = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(CheckName::parse)
            .collect::<Result<Vec<_>, _>>()?;
        cfg.checks = Some(parsed);
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn cmd_run(configs: &[PathBuf], out: Option<PathBuf>, checks: Option<String>, seed: Option<u64>) -> i32 {
    let mut jobs = Vec::new();
    for p in configs {
        match load(p, checks.as_deref(), seed) {
            Ok(cfg) => {
                let dir = out.as_ref().map(|o| {
                    if configs.len() > 1 {
                        o.join(&cfg.name)
                    } else {
                        o.clone()
                    }
                });
                jobs.push((cfg, dir));
            }
            Err(e) => return fail(&e),
        }
    }
    let mut code = EXIT_PASS;
    for ((cfg, _), res) in jobs.iter().zip(run_batch(&jobs)) {
        let c = match res {
            Ok(s) => {
                report(&s);
                s.exit_code
            }
            Err(e) => {
                eprintln!("{}: error: {e}", cfg.name);
                exit_code_for(&e)
            }
        };
        code = code.max(c);
    }
    code
}

fn report(s: &Summary) {
    println!("{} [certificate: {}]", s.name, s.certificate_status);
    for (name, c) in &s.checks {
        println!("  {name:<15} {:?}", c.status);
    }
    if let Some(b) = &s.blow_up {
        println!("  blow-up at t = {} (|X| = {:.3e})", b.t, b.magnitude);
    }
    if let Some(u) = s.ultimate_maxnorm {
        println!("  ultimate maxnorm {u:.6e}");
    }
    if let Some(t) = s.t_eps {
        println!("  T_eps {t}");
    }
}

fn run_cli(cli: Cli) -> i32 {
    match cli.cmd {
        Cmd::Run {
            configs,
            out,
            checks,
            seed,
        } => cmd_run(&configs, out, checks, seed),
        Cmd::SearchCert { config } => {
            let res = ExperimentConfig::load(&config).and_then(|c| search_cert(&c));
            match res {
                Ok(v) => {
                    print_json(&v);
                    if v["status"] == "certified" {
                        EXIT_PASS
                    } else {
                        EXIT_CHECK_FAILED
                    }
                }
                Err(e) => fail(&e),
            }
        }
        Cmd::Compare { summaries } => {
            let loaded: Result<Vec<Summary>, Error> = summaries
                .iter()
                .map(|p| Summary::load(p).map_err(|e| Error::Config(format!("{}: {e}", p.display()))))
                .collect();
            match loaded.and_then(|s| compare_runs(&s)) {
                Ok(r) => {
                    print_json(&r);
                    if r.strictly_decreasing {
                        EXIT_PASS
                    } else {
                        EXIT_CHECK_FAILED
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_CONFIG
                }
            }
        }
        Cmd::RestartCheck { config, split } => {
            match ExperimentConfig::load(&config).and_then(|c| restart_check(&c, split)) {
                Ok(r) => {
                    print_json(&r);
                    if r.passed {
                        EXIT_PASS
                    } else {
                        EXIT_CHECK_FAILED
                    }
                }
                Err(e) => fail(&e),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    ExitCode::from(run_cli(cli) as u8)
}
