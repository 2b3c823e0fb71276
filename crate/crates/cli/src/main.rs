// SPDX-License-Identifier: Apache-2.0

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use axdse::autoax::{
    build_palette, build_template, export_autoax, summarize_autoax, synthetic_image, AcceleratorTemplate, AutoaxConfig,
    Evaluator, GrayImage, Kernel, Palette, PaletteOptions,
};
use axdse::circuit::{build_exact_adder, build_exact_multiplier, gen_library, Library, Netlist};
use axdse::cost::{measure, measure_sampled, write_measurements, Measurement, OracleConfig, DEFAULT_LUT_K};
use axdse::explorer::{export_report, ground_truth, load_report, run_exploration, summarize, ExplorationConfig};
use axdse::surrogate::ModelKind;
use clap::{Parser, Subcommand, ValueEnum};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

/// Largest input width whose error metrics are computed exhaustively.
const EXHAUSTIVE_BITS: usize = 24;

#[derive(Parser)]
#[command(
    name = "axdse",
    version,
    about = "Design-space exploration of approximate arithmetic circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Base {
    Adder,
    Multiplier,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded library of approximate variants of an exact circuit.
    GenLib {
        #[arg(long, value_enum)]
        base: Base,
        #[arg(long)]
        bits: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the cost oracle on every circuit of a library.
    Measure {
        #[arg(long)]
        lib: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LUT_K)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
        /// Oracle constants as JSON; missing fields keep their defaults.
        #[arg(long)]
        oracle: Option<PathBuf>,
        /// Random words for circuits too wide for exhaustive error metrics.
        #[arg(long, default_value_t = 100_000)]
        error_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Estimate-and-verify exploration of a library.
    Explore {
        #[arg(long)]
        lib: PathBuf,
        /// Exploration settings as JSON; defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also measure the whole library and report coverage of the true fronts.
        #[arg(long)]
        ground_truth: bool,
    },
    /// Print the summary of an exported exploration.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Build a component palette for the accelerator search.
    GenPalette {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 9)]
        mult_size: usize,
        #[arg(long, default_value_t = 8)]
        add_size: usize,
        #[arg(long, default_value_t = 300)]
        library_size: usize,
        /// Ignore variants above this mean error (percent of the output range).
        #[arg(long)]
        max_med: Option<f64>,
    },
    /// Search accelerator configurations with a hill climber and random search.
    Autoax {
        #[arg(long)]
        palette_dir: PathBuf,
        /// Directory of .pgm images.
        #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
        images: Option<PathBuf>,
        /// Use N seeded synthetic images instead.
        #[arg(long)]
        synthetic: Option<u64>,
        /// Side length of synthetic images.
        #[arg(long, default_value_t = 64)]
        size: usize,
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Nine comma-separated coefficients, row-major; the default is the 3×3 binomial kernel.
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long, default_value = "RANDOM_FOREST")]
        model: String,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Bad arguments discovered after parsing.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    if let Some(e) = err.downcast_ref::<axdse::Error>() {
        return match e {
            axdse::Error::AllModelsFailed | axdse::Error::Singular(_) | axdse::Error::MissingActivity(_) => {
                EXIT_INTERNAL
            }
            _ => EXIT_DATA,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return EXIT_DATA;
    }
    EXIT_INTERNAL
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                // --help and --version
                ExitCode::SUCCESS
            };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenLib {
            base,
            bits,
            count,
            seed,
            out,
        } => gen_lib(base, bits, count, seed, &out),
        Command::Measure {
            lib,
            k,
            out,
            oracle,
            error_samples,
            seed,
        } => measure_lib(&lib, k, &out, oracle.as_deref(), error_samples, seed),
        Command::Explore {
            lib,
            config,
            out,
            ground_truth: gt,
        } => explore(&lib, config.as_deref(), &out, gt),
        Command::Report { input } => {
            print!("{}", summarize(&load_report(&input)?));
            Ok(())
        }
        Command::GenPalette {
            out,
            seed,
            mult_size,
            add_size,
            library_size,
            max_med,
        } => {
            if mult_size == 0 || add_size == 0 {
                return Err(usage("palette sizes must be at least 1"));
            }
            let opts = PaletteOptions {
                mult_size,
                add_size,
                library_size,
                seed,
                max_med_norm_pct: max_med.unwrap_or(f64::INFINITY),
                ..Default::default()
            };
            let palette = build_palette(&opts)?;
            palette.write(&out)?;
            for c in palette.mult().iter().chain(palette.add()) {
                println!(
                    "{:<24} med {:>8.4}%  luts {:>4}  latency {:>6.2} ns  power {:>7.3} mW",
                    c.id, c.med_norm_pct, c.cost.luts, c.cost.latency_ns, c.cost.power_mw
                );
            }
            Ok(())
        }
        Command::Autoax {
            palette_dir,
            images,
            synthetic,
            size,
            budget,
            samples,
            seed,
            kernel,
            model,
            out,
        } => {
            let template = match kernel {
                Some(k) => build_template(parse_kernel(&k)?)?,
                None => AcceleratorTemplate::default(),
            };
            let palette = Palette::read(&palette_dir)?;
            let images = match (images, synthetic) {
                (Some(dir), _) => read_images(&dir)?,
                (None, Some(n)) => {
                    if n == 0 {
                        return Err(usage("--synthetic needs at least one image"));
                    }
                    (0..n)
                        .map(|i| synthetic_image(size, size, seed.wrapping_add(i)))
                        .collect::<Result<_, _>>()?
                }
                (None, None) => return Err(usage("one of --images or --synthetic is required")),
            };
            let model: ModelKind = model.parse().map_err(|e: axdse::Error| usage(e.to_string()))?;
            let cfg = AutoaxConfig {
                samples,
                budget,
                seed,
                model,
                ..Default::default()
            };
            cfg.validate().map_err(|e| usage(e.to_string()))?;
            let evaluator = Evaluator::new(&template, &palette, images)?;
            let report = axdse::autoax::run_autoax(&evaluator, &cfg)?;
            export_autoax(&report, &out)?;
            print!("{}", summarize_autoax(&report));
            Ok(())
        }
    }
}

fn gen_lib(base: Base, bits: usize, count: usize, seed: u64, out: &Path) -> Result<()> {
    if count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    let exact = match base {
        Base::Adder => build_exact_adder(bits),
        Base::Multiplier => build_exact_multiplier(bits),
    }
    .map_err(|e| usage(e.to_string()))?;
    let circuits = gen_library(&exact, count, seed);
    let n = circuits.len();
    Library { exact, circuits }.write(out)?;
    println!("wrote {n} circuits to {}", out.display());
    Ok(())
}

fn oracle_of(
    circuit: &Netlist,
    exact: &Netlist,
    k: usize,
    oracle: &OracleConfig,
    samples: usize,
    seed: u64,
) -> axdse::Result<Measurement> {
    if circuit.n_inputs() > EXHAUSTIVE_BITS {
        measure_sampled(circuit, exact, k, oracle, samples, seed)
    } else {
        measure(circuit, exact, k, oracle)
    }
}

fn measure_lib(lib: &Path, k: usize, out: &Path, oracle: Option<&Path>, samples: usize, seed: u64) -> Result<()> {
    if !(2..=6).contains(&k) {
        return Err(usage(format!("--k must be between 2 and 6, got {k}")));
    }
    let oracle = match oracle {
        Some(p) => OracleConfig::load(p)?,
        None => OracleConfig::default(),
    };
    let library = Library::read(lib)?;
    let measurements = library
        .circuits
        .iter()
        .map(|c| oracle_of(c, &library.exact, k, &oracle, samples, seed))
        .collect::<axdse::Result<Vec<_>>>()?;
    let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    write_measurements(BufWriter::new(file), &measurements)?;
    println!("measured {} circuits", measurements.len());
    Ok(())
}

fn explore(lib: &Path, config: Option<&Path>, out: &Path, with_truth: bool) -> Result<()> {
    let cfg = match config {
        Some(p) => ExplorationConfig::load(p)?,
        None => ExplorationConfig::default(),
    };
    let library = Library::read(lib)?;
    let mut report = run_exploration(&library.circuits, &library.exact, &cfg)?;
    if with_truth {
        let truth = ground_truth(&library.circuits, &library.exact, &cfg)?;
        report.attach_coverage(&truth)?;
    }
    export_report(&report, out)?;
    print!("{}", summarize(&report));
    Ok(())
}

fn parse_kernel(text: &str) -> Result<Kernel> {
    let values: Vec<u32> = text
        .split(',')
        .map(|v| v.trim().parse::<u32>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("bad kernel `{text}`")))?;
    if values.len() != 9 {
        return Err(usage(format!("kernel needs 9 coefficients, got {}", values.len())));
    }
    let mut k = [[0u32; 3]; 3];
    for (i, v) in values.into_iter().enumerate() {
        k[i / 3][i % 3] = v;
    }
    Ok(k)
}

fn read_images(dir: &Path) -> Result<Vec<GrayImage>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!(axdse::Error::Image(format!("no .pgm files in {}", dir.display())));
    }
    Ok(paths.iter().map(|p| GrayImage::load(p)).collect::<Result<_, _>>()?)
}
