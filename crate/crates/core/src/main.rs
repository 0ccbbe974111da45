use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use arrfaces::cli::{bench, generate, run, Algo, Kind, RunOptions, Verdict};
use arrfaces::geom::{format_instance, parse_instance};
use arrfaces::{Error, Result};

#[derive(Parser)]
#[command(name = "arrfaces", about = "Faces of line arrangements")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a random instance.
    Generate {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one algorithm on an instance file.
    Run {
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long)]
        instance: PathBuf,
        /// Query points for the face-query algorithms; defaults to the
        /// instance's points.
        #[arg(long)]
        queries: Option<PathBuf>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        emit_faces: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sweep n over random instances and fit the scaling exponent.
    Bench {
        #[arg(long, value_enum)]
        algo: Algo,
        /// Comma-separated sizes.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        /// Points per instance; defaults to n.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn emit(json: String, path: Option<PathBuf>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn main_inner(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Generate { kind, n, m, seed, out } => {
            let (lines, points) = generate(kind, n, m, seed)?;
            let text = format_instance(&lines, &points);
            match out {
                Some(p) => fs::write(p, text)?,
                None => print!("{text}"),
            }
            Ok(true)
        }
        Cmd::Run { algo, instance, queries, r, seed, verify, emit_faces, report } => {
            let (lines, mut points) = parse_instance(&fs::read_to_string(instance)?)?;
            if let Some(q) = queries {
                points = parse_instance(&fs::read_to_string(q)?)?.1;
            }
            let rep = run(algo, &lines, &points, RunOptions { r, seed, verify, emit_faces })?;
            let ok = rep.verification != Verdict::Fail;
            if let Some(mm) = rep.mismatch.as_ref().filter(|_| !ok) {
                eprintln!("verification failed\nours:   {}\noracle: {}", to_json(&mm.ours), to_json(&mm.oracle));
            }
            emit(to_json(&rep), report)?;
            Ok(ok)
        }
        Cmd::Bench { algo, n, m, r, seed, verify, report } => {
            let sizes: Vec<(usize, usize)> = n.iter().map(|&k| (k, m.unwrap_or(k))).collect();
            let rep = bench(algo, &sizes, RunOptions { r, seed, verify, emit_faces: false })?;
            let ok = rep.runs.iter().all(|r| r.verification != Verdict::Fail);
            emit(to_json(&rep), report)?;
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Parse(_) | Error::ParamRange(_) | Error::Io(_) => 2,
                _ => 3,
            })
        }
    }
}
