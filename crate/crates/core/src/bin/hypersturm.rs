use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hypersturm::config::RunConfig;
use hypersturm::report::{compare, comparison_table, Report};
use hypersturm::runner::{plotdata, run};

#[derive(Parser)]
#[command(name = "hypersturm", about = "Hyperspherical Sturmian spectra of two-electron atoms")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a configuration and write the report (TSV).
    Run {
        config: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Also compare against the config's reference table.
        #[arg(long)]
        compare: bool,
    },
    /// Compare a report with a bundled reference table (e.g. table3, table4-S).
    Compare { report: PathBuf, table: String },
    /// Write plot columns (reduced charge, Sturmian vs Jacobi functions, ρ_p).
    Plotdata {
        config: PathBuf,
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
}

fn print_cmp(report: &Report, table: &str) -> hypersturm::Result<bool> {
    let cmp = compare(report, table)?;
    print!("{}", comparison_table(&cmp));
    let failed = cmp.iter().filter(|c| !c.pass).count();
    eprintln!("{table}: {} rows, {failed} failed", cmp.len());
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res: hypersturm::Result<bool> = (|| match cli.cmd {
        Cmd::Run { config, out, compare } => {
            let cfg = RunConfig::load(&config)?;
            let rep = run(&cfg)?;
            for l in &rep.summary {
                eprintln!("{l}");
            }
            match &out {
                Some(p) => std::fs::write(p, rep.to_tsv())?,
                None => print!("{}", rep.to_tsv()),
            }
            match (compare, &cfg.reference) {
                (true, Some(t)) => print_cmp(&rep, t),
                (true, None) => Err(hypersturm::Error::Config("config has no reference table".into())),
                _ => Ok(true),
            }
        }
        Cmd::Compare { report, table } => {
            let rep = Report::from_tsv(&std::fs::read_to_string(report)?)?;
            print_cmp(&rep, &table)
        }
        Cmd::Plotdata { config, grid } => {
            let cfg = RunConfig::load(&config)?;
            print!("{}", plotdata(&cfg, grid)?);
            Ok(true)
        }
    })();
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
