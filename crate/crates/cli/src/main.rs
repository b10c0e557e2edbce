use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bpbkit_core::harness::{generate_instance, run_scenario, solve_instance, verify_instance, InstanceDoc, Scenario, ScenarioKind, Solution};
use bpbkit_core::moduli::ModulusCurve;
use bpbkit_core::CertificateLog;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

#[derive(Parser)]
#[command(name = "bpbkit", version, about = "Seeded scenarios, constructions and certificate checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Align,
    CorrectL1sum,
    AhspDirectSum,
    AhspLatticeSum,
    ModuliCurve,
    DualityCheck,
}

impl From<Kind> for ScenarioKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Align => ScenarioKind::Align,
            Kind::CorrectL1sum => ScenarioKind::CorrectL1sum,
            Kind::AhspDirectSum => ScenarioKind::AhspDirectSum,
            Kind::AhspLatticeSum => ScenarioKind::AhspLatticeSum,
            Kind::ModuliCurve => ScenarioKind::ModuliCurve,
            Kind::DualityCheck => ScenarioKind::DualityCheck,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run every trial of a scenario file and write the report.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the seed in the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write one seeded instance.
    Generate {
        #[arg(long, value_enum)]
        kind: Kind,
        /// JSON file with the kind's parameters.
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recheck a witness against the instance it claims to solve.
    Verify {
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        instance: PathBuf,
    },
    /// Correct an operator on an l1-sum of euclidean spaces.
    CorrectL1sum(SolveArgs),
    /// Recheck a series witness.
    AhspVerify {
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        instance: PathBuf,
    },
    /// Build a series witness on a two-summand absolute sum.
    AhspDirectSum(SolveArgs),
    /// Build a witness in one summand through the sum oracle.
    AhspRestrict(SolveArgs),
    /// Build a series witness on a lattice sum.
    AhspLatticeSum(SolveArgs),
    /// Evaluate a modulus curve and compare it with its closed form.
    Moduli {
        #[arg(long)]
        params: PathBuf,
        /// Write the curve as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn summarize(log: &CertificateLog) -> bool {
    for c in log.failures() {
        eprintln!("failed {}: lhs {} rhs {} margin {}", c.label, c.lhs, c.rhs, c.margin);
    }
    let ok = log.all_hold();
    eprintln!("{} certificates, {}", log.len(), if ok { "all hold" } else { "FAILED" });
    ok
}

/// A witness file may hold a bare witness or a full construction output.
fn witness_value(v: Value) -> Value {
    match serde_json::from_value::<Solution>(v.clone()) {
        Ok(sol) => sol.witness,
        Err(_) => v,
    }
}

fn solve(args: &SolveArgs, expected: ScenarioKind, restricted: Option<bool>) -> Result<bool> {
    let doc: InstanceDoc = read_json(&args.instance)?;
    if doc.kind != expected {
        bail!("instance kind is {}, expected {}", doc.kind.name(), expected.name());
    }
    if let Some(want) = restricted {
        let has = doc.params.get("restrict").is_some_and(|v| !v.is_null());
        if has != want {
            bail!(if want {
                "instance was generated without `restrict`; use ahsp-direct-sum"
            } else {
                "instance was generated for restriction; use ahsp-restrict"
            });
        }
    }
    let sol = solve_instance(&doc)?;
    let mut log = sol.certificates.clone();
    log.extend(verify_instance(&doc, &sol.witness)?);
    emit(&sol, args.out.as_deref())?;
    Ok(summarize(&log))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            scenario,
            seed,
            trials,
            out,
        } => {
            let mut s: Scenario = read_json(&scenario)?;
            if let Some(seed) = seed {
                s.seed = seed;
            }
            if let Some(t) = trials {
                s.trials = t;
            }
            let report = run_scenario(&s)?;
            emit(&report, out.as_deref())?;
            for t in report.trials.iter().filter(|t| !t.passed) {
                match &t.error {
                    Some(e) => eprintln!("trial {} (seed {}): {e}", t.index, t.seed),
                    None => {
                        let labels: Vec<&str> = t.certificates().filter(|c| !c.holds).map(|c| c.label.as_str()).collect();
                        eprintln!("trial {} (seed {}): failed {}", t.index, t.seed, labels.join(", "));
                    }
                }
            }
            eprintln!(
                "{}: {}/{} trials passed, {} certificates",
                s.kind.name(),
                report.passed,
                report.trials.len(),
                report.certificates_checked
            );
            Ok(report.all_pass)
        }
        Command::Generate {
            kind,
            params,
            seed,
            out,
        } => {
            let params: Value = read_json(&params)?;
            let doc = generate_instance(kind.into(), &params, seed)?;
            if let Some(m) = doc.hypothesis_margin {
                eprintln!("hypothesis margin {m:e}");
            }
            emit(&doc, out.as_deref())?;
            Ok(true)
        }
        Command::Verify { witness, instance } => {
            let doc: InstanceDoc = read_json(&instance)?;
            let w = witness_value(read_json(&witness)?);
            Ok(summarize(&verify_instance(&doc, &w)?))
        }
        Command::AhspVerify { witness, instance } => {
            let doc: InstanceDoc = read_json(&instance)?;
            if !matches!(doc.kind, ScenarioKind::AhspDirectSum | ScenarioKind::AhspLatticeSum) {
                bail!("instance kind {} is not a series instance", doc.kind.name());
            }
            let w = witness_value(read_json(&witness)?);
            Ok(summarize(&verify_instance(&doc, &w)?))
        }
        Command::CorrectL1sum(args) => solve(&args, ScenarioKind::CorrectL1sum, None),
        Command::AhspDirectSum(args) => solve(&args, ScenarioKind::AhspDirectSum, Some(false)),
        Command::AhspRestrict(args) => solve(&args, ScenarioKind::AhspDirectSum, Some(true)),
        Command::AhspLatticeSum(args) => solve(&args, ScenarioKind::AhspLatticeSum, None),
        Command::Moduli { params, csv, out } => {
            let params: Value = read_json(&params)?;
            let doc = generate_instance(ScenarioKind::ModuliCurve, &params, 0)?;
            let sol = solve_instance(&doc)?;
            let log = verify_instance(&doc, &sol.witness)?;
            let curve: ModulusCurve = serde_json::from_value(sol.witness.clone())?;
            if let Some(path) = csv {
                fs::write(&path, curve.to_csv()?).with_context(|| format!("writing {}", path.display()))?;
            }
            emit(&curve, out.as_deref())?;
            Ok(summarize(&log))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
