use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;

use advisor::cli::{self, EXIT_INVALID, EXIT_USAGE};
use advisor::{serve, ServeConfig, ServeError};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "advisor", version, about = "Legal advisory consultations and knowledge-base tools")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long, env = "ADVISOR_KB_DIR")]
        kb: PathBuf,
        #[arg(long, env = "ADVISOR_DATA_DIR", default_value = "data")]
        data: PathBuf,
    },
    /// Check a knowledge-base directory. Exit 0 when clean, 1 otherwise.
    Validate { dir: PathBuf },
    /// Print declared rule counts per regulation.
    Stats {
        dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run one consultation from a file of yes/no answers, one per line.
    Consult {
        #[arg(long, env = "ADVISOR_KB_DIR")]
        kb: PathBuf,
        #[arg(long)]
        topic: String,
        #[arg(long)]
        answers: PathBuf,
    },
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            // clap's own usage code would collide with the "denied" exit code
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();

    let (mut out, mut err) = (std::io::stdout(), std::io::stderr());
    let code = match args.command {
        Command::Validate { dir } => cli::validate(&dir, &mut out, &mut err),
        Command::Stats { dir, json } => cli::stats(&dir, json, &mut out, &mut err),
        Command::Consult { kb, topic, answers } => cli::consult(&kb, &topic, &answers, &mut out, &mut err),
        Command::Serve { port, host, kb, data } => run_server(ServeConfig {
            addr: SocketAddr::new(host, port),
            kb_dir: kb,
            data_dir: data,
        }),
    };
    ExitCode::from(code as u8)
}

fn run_server(config: ServeConfig) -> i32 {
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("cannot start runtime: {e}");
            return EXIT_INVALID;
        }
    };
    let result = runtime.block_on(serve(config, |addr| {
        let mut stdout = std::io::stdout();
        let _ = writeln!(stdout, "listening on {addr}");
        let _ = stdout.flush();
    }));
    match result {
        Ok(()) => 0,
        Err(ServeError::Kb(e)) => {
            eprintln!("invalid knowledge base:");
            cli::print_report(&mut std::io::stderr(), &e.report());
            EXIT_INVALID
        }
        Err(e) => {
            eprintln!("{e}");
            EXIT_INVALID
        }
    }
}
