use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use partial_cstar::format::{instance_to_json, write_instance};
use partial_cstar_cli::{
    cmd_audit, cmd_build, cmd_reverse, list_instances, load, AuditOptions, BuildParams, CliError, CliResult,
};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "pcstar", version, about = "Build and audit unbounded C*-seminorm instances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an instance file from a named builder or fixture.
    Build {
        name: String,
        #[command(flatten)]
        params: ParamArgs,
        /// Write the instance here instead of stdout.
        #[arg(long, alias = "emit")]
        out: Option<PathBuf>,
    },
    /// Audit one or more instance files.
    Audit {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the reverse pipeline on an instance with a truncation tower.
    Reverse {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// List builder and fixture names.
    ListInstances,
}

#[derive(Args)]
struct CommonArgs {
    /// Report file, or a directory when auditing several files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the algebra tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Worker threads for multi-file audits.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Omit the timestamp field.
    #[arg(long)]
    no_timestamp: bool,
}

impl CommonArgs {
    fn options(&self) -> AuditOptions {
        AuditOptions {
            tol: self.tol,
            timestamp: !self.no_timestamp,
        }
    }
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    blocks: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
}

impl From<&ParamArgs> for BuildParams {
    fn from(a: &ParamArgs) -> Self {
        BuildParams {
            k: a.k,
            depth: a.depth,
            ratio: a.ratio,
            d: a.d,
            m: a.m,
            points: a.points,
            degree: a.degree,
            step: a.step,
            blocks: a.blocks.clone(),
            lambdas: a.lambdas.clone(),
        }
    }
}

fn write_out(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn audit_many(files: &[PathBuf], common: &CommonArgs) -> CliResult<()> {
    let opts = common.options();
    if files.len() == 1 {
        let inst = load(&files[0])?;
        return write_out(&cmd_audit(&inst, &opts).to_json(), common.out.as_deref());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs.max(1))
        .build()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let reports: Vec<CliResult<String>> = pool.install(|| {
        files
            .par_iter()
            .map(|f| load(f).map(|inst| cmd_audit(&inst, &opts).to_json()))
            .collect()
    });
    for (file, report) in files.iter().zip(reports) {
        let text = report?;
        match &common.out {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Input(e.to_string()))?;
                let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
                write_out(&text, Some(&dir.join(format!("{stem}.audit.json"))))?;
            }
            None => println!("{text}"),
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Build { name, params, out } => {
            let inst = cmd_build(&name, &BuildParams::from(&params))?;
            match out {
                Some(path) => write_instance(&inst, &path)?,
                None => println!("{}", instance_to_json(&inst)?),
            }
            Ok(())
        }
        Command::Audit { files, common } => audit_many(&files, &common),
        Command::Reverse { file, common } => {
            let inst = load(&file)?;
            let report = cmd_reverse(&inst, &common.options())?;
            write_out(&report.to_json(), common.out.as_deref())
        }
        Command::ListInstances => {
            for name in list_instances() {
                println!("{name}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
