use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use padlight::frame_codec::{Decoded, StepClock, StreamDecoder};
use padlight::pipeline::{format_command_log, parse_trace, run_replay, server, TraceRecord};
use padlight::slider_engine::{
    locate_slider, quantize_level, EngineConfig, SliderHit, SliderLayout,
};
use padlight::ChannelId;

/// Exit status for a run that succeeded but produced nothing.
const EXIT_EMPTY: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "padlight",
    version,
    about = "Touchpad virtual-slider lighting controller"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    layout: LayoutArgs,
}

#[derive(Debug, Args)]
struct LayoutArgs {
    /// Width of each slider band in pad units.
    #[arg(long, global = true, default_value_t = 1024)]
    band_width: u16,

    /// Width of each gap between bands in pad units.
    #[arg(long, global = true, default_value_t = 256)]
    gap_width: u16,

    /// Number of intensity levels (at most 23).
    #[arg(long, global = true, default_value_t = 23)]
    levels: u8,

    /// Minimum pressure for a touch to count.
    #[arg(long, global = true, default_value_t = 30)]
    z_threshold: u8,

    /// Treat y = 0 as the top of the pad.
    #[arg(long, global = true)]
    y_inverted: bool,
}

impl LayoutArgs {
    fn engine_config(&self) -> padlight::Result<EngineConfig> {
        let layout = SliderLayout::new(
            self.band_width,
            self.gap_width,
            self.levels,
            self.y_inverted,
        )?;
        Ok(EngineConfig {
            z_threshold: self.z_threshold,
            layout,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decode a raw 6-byte frame stream into trace lines (JSON).
    Decode {
        /// Input file; stdin when omitted or "-".
        input: Option<PathBuf>,

        /// Timestamp step between decoded samples, in milliseconds.
        #[arg(long, default_value_t = 25)]
        period_ms: u64,
    },
    /// Show which slider and level a pad coordinate maps to.
    Map { x: u16, y: u16 },
    /// Replay a trace file and print the light command log.
    Replay {
        trace: PathBuf,

        #[arg(long, value_enum, default_value_t = Switch::On)]
        limiter: Switch,

        /// Print pipeline metrics as JSON on stderr.
        #[arg(long)]
        metrics: bool,
    },
    /// Serve the WebSocket control interface.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8740")]
        bind: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    let config = match cli.layout.engine_config() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };

    match cli.command {
        Command::Decode { input, period_ms } => cmd_decode(input, period_ms),
        Command::Map { x, y } => cmd_map(x, y, &config),
        Command::Replay {
            trace,
            limiter,
            metrics,
        } => cmd_replay(&trace, limiter == Switch::On, metrics, &config),
        Command::Serve { bind } => cmd_serve(&bind, config),
    }
}

fn fail(err: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::FAILURE
}

fn read_input(input: Option<PathBuf>) -> io::Result<Vec<u8>> {
    match input {
        Some(path) if path.as_os_str() != "-" => std::fs::read(path),
        _ => {
            let mut buf = Vec::new();
            io::stdin().read_to_end(&mut buf)?;
            Ok(buf)
        }
    }
}

fn cmd_decode(input: Option<PathBuf>, period_ms: u64) -> ExitCode {
    let bytes = match read_input(input) {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    let mut decoder = StreamDecoder::with_clock(StepClock::new(0, period_ms));
    let mut decoded = decoder.extend(&bytes);
    decoded.extend(decoder.finish());

    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut count = 0usize;
    for item in decoded {
        match item {
            Decoded::Sample(s) => {
                count += 1;
                if writeln!(out, "{}", TraceRecord::from(s).to_line()).is_err() {
                    return ExitCode::FAILURE;
                }
            }
            Decoded::Diagnostic(d) => eprintln!("diagnostic: {d}"),
        }
    }
    if count == 0 {
        ExitCode::from(EXIT_EMPTY)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_map(x: u16, y: u16, config: &EngineConfig) -> ExitCode {
    let layout = &config.layout;
    let hit = match locate_slider(x, layout) {
        Ok(h) => h,
        Err(e) => return fail(e),
    };
    let level = match quantize_level(y, layout) {
        Ok(l) => l,
        Err(e) => return fail(e),
    };
    match hit {
        SliderHit::Band(i) => {
            let channel = ChannelId::ALL[i as usize];
            println!("slider={i} channel={channel} level={level}");
        }
        SliderHit::Gap => println!("gap"),
    }
    ExitCode::SUCCESS
}

fn cmd_replay(path: &PathBuf, limiter_on: bool, metrics: bool, config: &EngineConfig) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(format_args!("{}: {e}", path.display())),
    };
    let trace = match parse_trace(&text) {
        Ok(t) => t,
        Err(e) => return fail(format_args!("{}: {e}", path.display())),
    };
    let outcome = match run_replay(&trace, config, limiter_on) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    print!("{}", format_command_log(&outcome.log));
    if metrics {
        eprintln!("{}", outcome.metrics.to_json());
    }
    ExitCode::SUCCESS
}

fn cmd_serve(bind: &str, config: EngineConfig) -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(io::stderr)
        .init();

    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    runtime.block_on(async {
        let srv = match server::bind(config, bind).await {
            Ok(s) => s,
            Err(e) => return fail(format_args!("cannot bind {bind}: {e}")),
        };
        match srv.local_addr() {
            Ok(addr) => tracing::info!("listening on ws://{addr}{}", server::WS_PATH),
            Err(e) => return fail(e),
        }
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        match srv.run_until(shutdown).await {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        }
    })
}
