//! `hsisae` — hyperspectral classification experiments from the command
//! line.
//!
//! Exit codes: 0 success, 1 failed verification (gradcheck), 2 config
//! error, 3 data error, 4 numerical divergence.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hsisae_core::autoenc;
use hsisae_core::hsidata::{load_labels_csv, save_cube, save_labels_pgm, synth_scene, SynthSpec};
use hsisae_core::pipeline::{render_map, run_experiment, ExperimentConfig};
use hsisae_core::Error;

#[derive(Parser)]
#[command(
    name = "hsisae",
    about = "Hyperspectral image classification with autoencoder features",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scene: an HSC cube and its PGM ground truth
    Synth {
        /// Scene description (JSON, see README for the schema)
        #[arg(long)]
        spec: PathBuf,
        /// Output cube path (.hsc)
        #[arg(long)]
        out: PathBuf,
        /// Output ground-truth path (.pgm)
        #[arg(long)]
        gt: PathBuf,
    },
    /// Verify analytic gradients against central finite differences
    Gradcheck {
        /// Input size
        #[arg(long, default_value_t = 10)]
        d: usize,
        /// Hidden size
        #[arg(long, default_value_t = 5)]
        h: usize,
        /// Minibatch size
        #[arg(long, default_value_t = 4)]
        m: usize,
        /// First seed
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of consecutive seeds to test
        #[arg(long, default_value_t = 1)]
        trials: u64,
    },
    /// Run one classification experiment and write its report
    Run {
        /// Experiment configuration (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Report output path (JSON)
        #[arg(long)]
        report: PathBuf,
        /// Optional classification map output (PPM)
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Convert a row,col,label CSV into a 16-bit PGM label map
    ConvertGt {
        /// Input CSV
        #[arg(long)]
        csv: PathBuf,
        /// Output PGM
        #[arg(long)]
        out: PathBuf,
        /// Scene width in pixels
        #[arg(long)]
        width: usize,
        /// Scene height in pixels
        #[arg(long)]
        height: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Synth { spec, out, gt } => {
            let text = fs::read_to_string(&spec)
                .map_err(|e| Error::io(spec.display().to_string(), e))?;
            let spec: SynthSpec =
                serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
            let (cube, truth) = synth_scene(&spec)?;
            save_cube(&cube, &out)?;
            save_labels_pgm(&truth, &gt)?;
            let labeled = truth.labels().iter().filter(|&&l| l > 0).count();
            println!(
                "wrote {}x{}x{} cube to {} and {} labeled pixels ({} classes) to {}",
                cube.width(),
                cube.height(),
                cube.bands(),
                out.display(),
                labeled,
                truth.num_classes(),
                gt.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Gradcheck {
            d,
            h,
            m,
            seed,
            trials,
        } => {
            if d == 0 || h == 0 || m == 0 || trials == 0 {
                return Err(Error::Config(
                    "d, h, m and trials must be positive".into(),
                ));
            }
            let mut worst = autoenc::GradCheckReport {
                max_rel_error: 0.0,
                worst_analytic: 0.0,
                worst_numeric: 0.0,
            };
            let mut worst_seed = seed;
            for s in seed..seed + trials {
                let report = autoenc::grad_check_detail(d, h, m, s);
                if report.max_rel_error > worst.max_rel_error {
                    worst = report;
                    worst_seed = s;
                }
            }
            println!(
                "gradcheck d={d} h={h} m={m} seeds {seed}..={}: max relative error {:.3e} \
                 (seed {worst_seed}: analytic {:.6e} vs finite-diff {:.6e})",
                seed + trials - 1,
                worst.max_rel_error,
                worst.worst_analytic,
                worst.worst_numeric
            );
            if worst.max_rel_error < 1e-6 {
                println!("PASS (threshold 1e-6)");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("FAIL (threshold 1e-6)");
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Run {
            config,
            report,
            map,
        } => {
            let text = fs::read_to_string(&config)
                .map_err(|e| Error::io(config.display().to_string(), e))?;
            let config = ExperimentConfig::from_json(&text)?;
            let output = run_experiment(&config)?;
            fs::write(&report, output.report.to_json())
                .map_err(|e| Error::io(report.display().to_string(), e))?;
            if let Some(map_path) = map {
                render_map(&output.predictions, &output.ground_truth, &map_path)?;
            }
            println!(
                "{}: overall test error {:.3}% ({} train / {} test pixels, {:.2}s)",
                output.report.scheme.name(),
                100.0 * output.report.metrics.overall_error_rate,
                output.report.n_train,
                output.report.n_test,
                output.report.wall_clock_seconds
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::ConvertGt {
            csv,
            out,
            width,
            height,
        } => {
            if width == 0 || height == 0 {
                return Err(Error::Config("width and height must be positive".into()));
            }
            let gt = load_labels_csv(&csv, width, height)?;
            save_labels_pgm(&gt, &out)?;
            let labeled = gt.labels().iter().filter(|&&l| l > 0).count();
            println!(
                "wrote {width}x{height} label map with {labeled} labeled pixels to {}",
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
