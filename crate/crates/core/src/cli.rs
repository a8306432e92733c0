//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, ValueEnum};

use crate::harness::{run, ConfigOverrides, ExperimentSpec, Mode, SEARCH_RATE_REFS};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Denoise,
    SynthDenoise,
    SearchRate,
    Metrics,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Denoise => Mode::Denoise,
            ModeArg::SynthDenoise => Mode::SynthDenoise,
            ModeArg::SearchRate => Mode::SearchRate,
            ModeArg::Metrics => Mode::Metrics,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct SigmaList(Vec<f64>);

/// Parses a comma-separated list of noise levels, e.g. `10,25.5,50`.
/// Every entry must be a finite number `>= 0`.
pub fn parse_sigma_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Err("empty sigma list".into());
    }
    s.split(',')
        .map(|part| {
            let t = part.trim();
            let v: f64 = t
                .parse()
                .map_err(|_| format!("'{t}' is not a number"))?;
            if !v.is_finite() || v < 0.0 {
                return Err(format!("sigma must be finite and >= 0, got '{t}'"));
            }
            Ok(v)
        })
        .collect()
}

fn sigma_list(s: &str) -> Result<SigmaList, String> {
    parse_sigma_list(s).map(SigmaList)
}

fn sigma_rgb(s: &str) -> Result<[f64; 3], String> {
    let v = parse_sigma_list(s)?;
    <[f64; 3]>::try_from(v.as_slice())
        .map_err(|_| format!("expected three values R,G,B, got {}", v.len()))
}

#[derive(Debug, Parser)]
#[command(
    name = "gcp-denoise",
    version,
    about = "Green-guided nonlocal t-SVD denoiser for color images and video",
    after_help = "Examples:\n  \
        gcp-denoise --mode denoise --input noisy.png --sigma 25 --output out/\n  \
        gcp-denoise --mode synth-denoise --synthetic 6 --sigma 25,50 --seed 1 --report r.csv\n  \
        gcp-denoise --mode search-rate --synthetic 5 --sigma-rgb 30,15,30 --seed 1\n  \
        gcp-denoise --mode metrics --input clean.ppm out/noisy.png"
)]
struct Args {
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Input images (frame directories with --video); reference/test pairs
    /// in metrics mode.
    #[arg(long, num_args = 1.., value_name = "PATH")]
    input: Vec<PathBuf>,
    /// Directory for denoised outputs.
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
    /// Noise level(s), comma-separated.
    #[arg(long, value_name = "F[,F...]", value_parser = sigma_list)]
    sigma: Option<SigmaList>,
    /// Per-channel synthetic noise levels.
    #[arg(long = "sigma-rgb", value_name = "R,G,B", value_parser = sigma_rgb)]
    sigma_rgb: Option<[f64; 3]>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Patch side [default: 8]
    #[arg(long)]
    ps: Option<usize>,
    /// Search window side [default: 20, 16 with --video]
    #[arg(long)]
    window: Option<usize>,
    /// Patches per group [default: 30, 60 in search-rate]
    #[arg(long)]
    k: Option<usize>,
    /// Green dominance ratio for guided search [default: 0.8]
    #[arg(long)]
    lambda: Option<f64>,
    /// Threshold multiplier [default: 1.1]
    #[arg(long = "tau-scale")]
    tau_scale: Option<f64>,
    /// Reference grid step [default: 4]
    #[arg(long)]
    stride: Option<usize>,
    /// Treat inputs as frame directories and group across frames.
    #[arg(long)]
    video: bool,
    /// Write the CSV report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Round images to 8 bits before computing metrics.
    #[arg(long = "quantize-metrics")]
    quantize_metrics: bool,
    /// Add N generated test images to the inputs.
    #[arg(long, value_name = "N", default_value_t = 0)]
    synthetic: usize,
    /// Side of generated images.
    #[arg(long, default_value_t = 256)]
    size: usize,
    /// Random references per image in search-rate mode.
    #[arg(long, default_value_t = SEARCH_RATE_REFS)]
    refs: usize,
}

impl Args {
    fn into_spec(self) -> ExperimentSpec {
        ExperimentSpec {
            mode: self.mode.into(),
            inputs: self.input,
            synthetic: self.synthetic,
            size: self.size,
            sigmas: self.sigma.map(|s| s.0).unwrap_or_default(),
            sigma_rgb: self.sigma_rgb,
            seed: self.seed,
            overrides: ConfigOverrides {
                ps: self.ps,
                window: self.window,
                k: self.k,
                lambda: self.lambda,
                tau_scale: self.tau_scale,
                stride: self.stride,
            },
            video: self.video,
            output: self.output,
            report: self.report,
            quantize_metrics: self.quantize_metrics,
            n_refs: self.refs,
        }
    }
}

/// Checks flag combinations clap cannot express.
fn usage_problem(args: &Args) -> Option<String> {
    match args.mode {
        ModeArg::Denoise if args.sigma.is_none() => {
            Some("the argument '--sigma <F[,F...]>' is required in denoise mode".into())
        }
        ModeArg::Denoise if args.input.is_empty() => {
            Some("the argument '--input <PATH>...' is required in denoise mode".into())
        }
        ModeArg::Denoise if args.output.is_none() => {
            Some("the argument '--output <DIR>' is required in denoise mode".into())
        }
        ModeArg::SynthDenoise | ModeArg::SearchRate
            if args.sigma.is_none() && args.sigma_rgb.is_none() =>
        {
            Some("one of '--sigma' or '--sigma-rgb' is required in this mode".into())
        }
        _ => None,
    }
}

/// Parses `argv` (program name first), runs the requested mode and returns
/// the exit code: 0 on success, 1 on runtime failure, 2 on usage errors.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    if let Some(msg) = usage_problem(&args) {
        let _ = Args::command().error(ErrorKind::MissingRequiredArgument, msg).print();
        return 2;
    }
    let to_stdout = args.report.is_none();
    let spec = args.into_spec();
    if let Err(e) = spec.validate() {
        let _ = Args::command().error(ErrorKind::ValueValidation, e).print();
        return 2;
    }
    match run(&spec) {
        Ok(out) => {
            if to_stdout {
                let _ = std::io::stdout().write_all(&out.csv);
            }
            if out.failures > 0 {
                eprintln!("error: {} item(s) failed; see the error column of the report", out.failures);
                1
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_lists() {
        assert_eq!(parse_sigma_list("25").unwrap(), vec![25.0]);
        assert_eq!(parse_sigma_list("10, 25.5,0").unwrap(), vec![10.0, 25.5, 0.0]);
        for bad in ["", " ", "10,", ",10", "a", "-1", "nan", "inf", "1e400", "10;20"] {
            assert!(parse_sigma_list(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn sigma_rgb_needs_three() {
        assert_eq!(sigma_rgb("30,15,30").unwrap(), [30.0, 15.0, 30.0]);
        assert!(sigma_rgb("30,15").is_err());
        assert!(sigma_rgb("1,2,3,4").is_err());
    }

    #[test]
    fn command_is_well_formed() {
        Args::command().debug_assert();
    }
}
