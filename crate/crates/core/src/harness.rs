//! Seeded experiment runner and CSV reports.
//!
//! Four modes share one [`ExperimentSpec`]:
//!
//! * `denoise` reads images (or frame directories with `video`), denoises
//!   them at a known sigma and writes the results to the output directory.
//! * `synth-denoise` adds seeded noise to clean inputs, denoises, and
//!   reports PSNR/SSIM before and after.
//! * `search-rate` measures how often each search scheme recovers the
//!   clean-image matches.
//! * `metrics` scores `(reference, test)` image pairs.
//!
//! Every random draw derives from `seed` and the item's position in the
//! batch, so a rerun with the same arguments reproduces every metric.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codec::{load_image, load_video, save_image, save_video, write_atomic};
use crate::config::DenoiseConfig;
use crate::denoise::{denoise_image, denoise_video};
use crate::error::{Error, Result};
use crate::image::{add_awgn_per_channel, Image, VideoSequence};
use crate::metrics::{evaluate, MetricsReport};
use crate::search::{success_rate, SearchScheme};
use crate::synth::corpus;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Denoise,
    SynthDenoise,
    SearchRate,
    Metrics,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Denoise => "denoise",
            Mode::SynthDenoise => "synth-denoise",
            Mode::SearchRate => "search-rate",
            Mode::Metrics => "metrics",
        }
    }
}

/// Per-field replacements for the [`DenoiseConfig`] defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigOverrides {
    pub ps: Option<usize>,
    pub window: Option<usize>,
    pub k: Option<usize>,
    pub lambda: Option<f64>,
    pub tau_scale: Option<f64>,
    pub stride: Option<usize>,
}

/// Group size used by `search-rate` unless overridden.
pub const SEARCH_RATE_K: usize = 60;
/// Random references per image in `search-rate`.
pub const SEARCH_RATE_REFS: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub mode: Mode,
    /// Image files, or frame directories when `video` is set.
    pub inputs: Vec<PathBuf>,
    /// Number of generated images appended to the inputs.
    pub synthetic: usize,
    /// Side of generated images.
    pub size: usize,
    /// Noise levels; in `denoise` mode the single level of the input.
    pub sigmas: Vec<f64>,
    /// Per-channel synthetic noise. When set, `sigmas` only selects the
    /// denoiser's sigma.
    pub sigma_rgb: Option<[f64; 3]>,
    pub seed: u64,
    pub overrides: ConfigOverrides,
    pub video: bool,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub quantize_metrics: bool,
    pub n_refs: usize,
}

impl ExperimentSpec {
    pub fn new(mode: Mode) -> Self {
        ExperimentSpec {
            mode,
            inputs: Vec::new(),
            synthetic: 0,
            size: 256,
            sigmas: Vec::new(),
            sigma_rgb: None,
            seed: 0,
            overrides: ConfigOverrides::default(),
            video: false,
            output: None,
            report: None,
            quantize_metrics: false,
            n_refs: SEARCH_RATE_REFS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad_sigma = |s: &f64| !(s.is_finite() && *s >= 0.0);
        if let Some(s) = self.sigmas.iter().find(|s| bad_sigma(s)) {
            return Err(Error::Config(format!("sigma must be finite and >= 0, got {s}")));
        }
        if let Some(rgb) = self.sigma_rgb {
            if rgb.iter().any(bad_sigma) {
                return Err(Error::Config(format!("sigma-rgb values must be finite and >= 0, got {rgb:?}")));
            }
        }
        match self.mode {
            Mode::Denoise => {
                if self.sigmas.len() != 1 {
                    return Err(Error::Config("denoise mode takes exactly one --sigma".into()));
                }
                if self.inputs.is_empty() {
                    return Err(Error::Config("denoise mode needs at least one --input".into()));
                }
                if self.output.is_none() {
                    return Err(Error::Config("denoise mode needs --output".into()));
                }
                if self.synthetic > 0 {
                    return Err(Error::Config("--synthetic is not used in denoise mode".into()));
                }
            }
            Mode::SynthDenoise | Mode::SearchRate => {
                if self.sigmas.is_empty() && self.sigma_rgb.is_none() {
                    return Err(Error::Config(format!(
                        "{} mode needs --sigma or --sigma-rgb",
                        self.mode.name()
                    )));
                }
                if self.mode == Mode::SearchRate && self.video {
                    return Err(Error::Config("search-rate works on still images".into()));
                }
                if self.synthetic > 0 && self.size == 0 {
                    return Err(Error::Config("--size must be positive".into()));
                }
                if self.n_refs == 0 {
                    return Err(Error::Config("reference count must be positive".into()));
                }
            }
            Mode::Metrics => {
                if self.inputs.is_empty() || !self.inputs.len().is_multiple_of(2) {
                    return Err(Error::Config(
                        "metrics mode takes --input REFERENCE TEST [REFERENCE TEST ...]".into(),
                    ));
                }
                if self.video || self.synthetic > 0 {
                    return Err(Error::Config("metrics mode compares image files".into()));
                }
            }
        }
        self.config(0.0).validate()
    }

    /// Denoiser configuration at `sigma` with the mode's defaults and the
    /// user's overrides applied.
    pub fn config(&self, sigma: f64) -> DenoiseConfig {
        let mut cfg = if self.video {
            DenoiseConfig::video(sigma)
        } else {
            DenoiseConfig::with_sigma(sigma)
        };
        if self.mode == Mode::SearchRate {
            cfg.k = SEARCH_RATE_K;
        }
        let o = &self.overrides;
        cfg.ps = o.ps.unwrap_or(cfg.ps);
        cfg.window = o.window.unwrap_or(cfg.window);
        cfg.k = o.k.unwrap_or(cfg.k);
        cfg.lambda = o.lambda.unwrap_or(cfg.lambda);
        cfg.tau_scale = o.tau_scale.unwrap_or(cfg.tau_scale);
        cfg.stride = o.stride.unwrap_or(cfg.stride);
        cfg
    }

    fn noise_cases(&self) -> Vec<NoiseCase> {
        match self.sigma_rgb {
            Some(rgb) if self.sigmas.is_empty() => {
                let rms = (rgb.iter().map(|s| s * s).sum::<f64>() / 3.0).sqrt();
                vec![(rms, rgb)]
            }
            Some(rgb) => self.sigmas.iter().map(|&s| (s, rgb)).collect(),
            None => self.sigmas.iter().map(|&s| (s, [s; 3])).collect(),
        }
    }
}

/// Denoiser sigma and per-channel noise of one run.
type NoiseCase = (f64, [f64; 3]);

/// A clean input: a single image, or the frames of a video.
struct Source {
    id: String,
    frames: Result<Vec<Image>>,
}

fn input_id(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load_sources(spec: &ExperimentSpec) -> Vec<Source> {
    let mut out: Vec<Source> = spec
        .inputs
        .par_iter()
        .map(|p| Source {
            id: input_id(p),
            frames: if spec.video {
                load_video(p).map(VideoSequence::into_frames)
            } else {
                load_image(p).map(|i| vec![i])
            },
        })
        .collect();
    out.extend(
        corpus(spec.synthetic, spec.size, spec.size, spec.seed)
            .into_iter()
            .map(|(id, img)| Source {
                id,
                frames: Ok(vec![img]),
            }),
    );
    out
}

/// Seed for batch item `index`, independent of scheduling.
fn item_seed(seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.random()
}

fn denoise_stack(frames: &[Image], cfg: &DenoiseConfig) -> Result<Vec<Image>> {
    if let [single] = frames {
        Ok(vec![denoise_image(single, cfg)?])
    } else {
        Ok(denoise_video(&VideoSequence::new(frames.to_vec())?, cfg)?.into_frames())
    }
}

/// Mean PSNR and SSIM over frames.
fn stack_metrics(clean: &[Image], test: &[Image], quantize: bool) -> Result<(f64, f64)> {
    let reports = clean
        .iter()
        .zip(test)
        .map(|(c, t)| evaluate("", c, t, quantize))
        .collect::<Result<Vec<MetricsReport>>>()?;
    let n = reports.len() as f64;
    Ok((
        reports.iter().map(|r| r.psnr).sum::<f64>() / n,
        reports.iter().map(|r| r.ssim).sum::<f64>() / n,
    ))
}

/// One line of a denoising report. Metric fields are `None` when they do
/// not apply (no clean reference) or the item failed; `error` says why.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub image: String,
    /// Sigma given to the denoiser.
    pub sigma: f64,
    /// Per-channel sigma of the synthetic noise, when noise was added.
    pub noise: Option<[f64; 3]>,
    pub config: String,
    pub psnr_noisy: Option<f64>,
    pub psnr_denoised: Option<f64>,
    pub ssim_noisy: Option<f64>,
    pub ssim_denoised: Option<f64>,
    pub wall_time: f64,
    pub error: Option<String>,
}

pub const REPORT_HEADER: [&str; 12] = [
    "image",
    "sigma",
    "noise_r",
    "noise_g",
    "noise_b",
    "config",
    "psnr_noisy",
    "psnr_denoised",
    "ssim_noisy",
    "ssim_denoised",
    "wall_time_s",
    "error",
];

fn num(v: f64) -> String {
    format!("{v:.6}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl ReportRow {
    fn record(&self) -> Vec<String> {
        let noise = self.noise.map(|n| n.map(num)).unwrap_or_default();
        vec![
            self.image.clone(),
            num(self.sigma),
            noise[0].clone(),
            noise[1].clone(),
            noise[2].clone(),
            self.config.clone(),
            opt(self.psnr_noisy),
            opt(self.psnr_denoised),
            opt(self.ssim_noisy),
            opt(self.ssim_denoised),
            format!("{:.3}", self.wall_time),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

fn to_csv<R>(header: &[&str], rows: impl IntoIterator<Item = R>, record: impl Fn(R) -> Vec<String>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(record(r))?;
    }
    w.into_inner()
        .map_err(|e| Error::Csv(e.into_error().into()))
}

pub fn report_csv(rows: &[ReportRow]) -> Result<Vec<u8>> {
    to_csv(&REPORT_HEADER, rows, ReportRow::record)
}

fn sort_rows(rows: &mut [ReportRow]) {
    rows.sort_by(|a, b| {
        a.image
            .cmp(&b.image)
            .then(a.sigma.total_cmp(&b.sigma))
            .then_with(|| {
                let key = |r: &ReportRow| r.noise.unwrap_or_default();
                key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal)
            })
    });
}

/// Adds seeded noise to every input at every noise level, denoises, and
/// scores both against the clean input. Failures become rows with `error`
/// set. Rows are sorted by image id, then sigma.
pub fn run_synth_denoise(spec: &ExperimentSpec) -> Result<Vec<ReportRow>> {
    spec.validate()?;
    let sources = load_sources(spec);
    let cases = spec.noise_cases();
    let items: Vec<(usize, &Source, NoiseCase)> = sources
        .iter()
        .flat_map(|s| cases.iter().map(move |&c| (s, c)))
        .enumerate()
        .map(|(i, (s, c))| (i, s, c))
        .collect();
    let mut rows: Vec<ReportRow> = items
        .par_iter()
        .map(|&(index, src, (sigma, noise))| {
            let cfg = spec.config(sigma);
            let start = Instant::now();
            let result = src.frames.as_ref().map_err(|e| e.to_string()).and_then(|clean| {
                let seed = item_seed(spec.seed, index);
                let noisy: Vec<Image> = clean
                    .iter()
                    .enumerate()
                    .map(|(f, img)| add_awgn_per_channel(img, &noise, seed.wrapping_add(f as u64)))
                    .collect();
                let run = || -> Result<_> {
                    let out = denoise_stack(&noisy, &cfg)?;
                    Ok((
                        stack_metrics(clean, &noisy, spec.quantize_metrics)?,
                        stack_metrics(clean, &out, spec.quantize_metrics)?,
                    ))
                };
                run().map_err(|e| e.to_string())
            });
            let wall_time = start.elapsed().as_secs_f64();
            let (before, after, error) = match result {
                Ok((b, a)) => (Some(b), Some(a), None),
                Err(e) => (None, None, Some(e)),
            };
            ReportRow {
                image: src.id.clone(),
                sigma,
                noise: Some(noise),
                config: cfg.summary(),
                psnr_noisy: before.map(|m| m.0),
                psnr_denoised: after.map(|m| m.0),
                ssim_noisy: before.map(|m| m.1),
                ssim_denoised: after.map(|m| m.1),
                wall_time,
                error,
            }
        })
        .collect();
    sort_rows(&mut rows);
    Ok(rows)
}

fn output_target(input: &Path, out_dir: &Path) -> Result<PathBuf> {
    let target = out_dir.join(input.file_name().ok_or_else(|| {
        Error::Config(format!("input {} has no file name", input.display()))
    })?);
    let same = match (input.canonicalize(), target.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    };
    if same {
        return Err(Error::Config(format!(
            "refusing to overwrite input {}; choose another --output",
            input.display()
        )));
    }
    Ok(target)
}

/// Denoises files whose noise level is known and writes the results under
/// `spec.output` with the input's file name (a frame directory in video
/// mode). Inputs are never modified.
pub fn run_denoise(spec: &ExperimentSpec) -> Result<Vec<ReportRow>> {
    spec.validate()?;
    let out_dir = spec.output.as_deref().expect("validated");
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let sigma = spec.sigmas[0];
    let cfg = spec.config(sigma);
    let mut rows: Vec<ReportRow> = spec
        .inputs
        .par_iter()
        .map(|input| {
            let start = Instant::now();
            let run = || -> Result<()> {
                let target = output_target(input, out_dir)?;
                if spec.video {
                    let out = denoise_video(&load_video(input)?, &cfg)?;
                    save_video(&out, &target, "ppm")?;
                } else {
                    save_image(&denoise_image(&load_image(input)?, &cfg)?, &target)?;
                }
                Ok(())
            };
            let error = run().err().map(|e| e.to_string());
            ReportRow {
                image: input_id(input),
                sigma,
                noise: None,
                config: cfg.summary(),
                psnr_noisy: None,
                psnr_denoised: None,
                ssim_noisy: None,
                ssim_denoised: None,
                wall_time: start.elapsed().as_secs_f64(),
                error,
            }
        })
        .collect();
    sort_rows(&mut rows);
    Ok(rows)
}

/// Success rate of one scheme on one image. `image` is `"mean"` for the
/// per-scheme averages.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchRateRow {
    pub image: String,
    pub scheme: SearchScheme,
    pub noise: [f64; 3],
    pub k: usize,
    pub window: usize,
    pub rate: Option<f64>,
    pub error: Option<String>,
}

pub const SEARCH_RATE_HEADER: [&str; 9] = [
    "image", "scheme", "noise_r", "noise_g", "noise_b", "k", "window", "rate", "error",
];

pub fn search_rate_csv(rows: &[SearchRateRow]) -> Result<Vec<u8>> {
    to_csv(&SEARCH_RATE_HEADER, rows, |r| {
        vec![
            r.image.clone(),
            r.scheme.name().to_string(),
            num(r.noise[0]),
            num(r.noise[1]),
            num(r.noise[2]),
            r.k.to_string(),
            r.window.to_string(),
            opt(r.rate),
            r.error.clone().unwrap_or_default(),
        ]
    })
}

/// Mean rate per scheme and noise level over the rows without errors, in
/// [`SearchScheme::ALL`] order.
pub fn scheme_averages(rows: &[SearchRateRow]) -> Vec<SearchRateRow> {
    let mut levels: Vec<[f64; 3]> = Vec::new();
    for r in rows {
        if !levels.contains(&r.noise) {
            levels.push(r.noise);
        }
    }
    let mut out = Vec::new();
    for noise in levels {
        for scheme in SearchScheme::ALL {
            let sel: Vec<&SearchRateRow> = rows
                .iter()
                .filter(|r| r.scheme == scheme && r.noise == noise && r.image != "mean")
                .collect();
            let rates: Vec<f64> = sel.iter().filter_map(|r| r.rate).collect();
            if let Some(first) = sel.first() {
                out.push(SearchRateRow {
                    image: "mean".into(),
                    scheme,
                    noise,
                    k: first.k,
                    window: first.window,
                    rate: (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64),
                    error: rates.is_empty().then(|| "no successful images".to_string()),
                });
            }
        }
    }
    out
}

/// Patch-search success rate of every scheme on every input and noise
/// level, `spec.n_refs` random references each. Returns per-image rows
/// followed by the per-scheme means.
pub fn run_search_rate(spec: &ExperimentSpec) -> Result<Vec<SearchRateRow>> {
    spec.validate()?;
    let sources = load_sources(spec);
    let noises: Vec<[f64; 3]> = spec.noise_cases().into_iter().map(|c| c.1).collect();
    let cfg = &spec.config(0.0);
    let items: Vec<(usize, &Source, [f64; 3])> = sources
        .iter()
        .flat_map(|s| noises.iter().map(move |&n| (s, n)))
        .enumerate()
        .map(|(i, (s, n))| (i, s, n))
        .collect();
    let mut rows: Vec<SearchRateRow> = items
        .par_iter()
        .flat_map_iter(|&(index, src, noise)| {
            let seed = item_seed(spec.seed, index);
            let noisy = src
                .frames
                .as_ref()
                .map(|f| add_awgn_per_channel(&f[0], &noise, seed))
                .map_err(|e| e.to_string());
            SearchScheme::ALL.into_iter().map(move |scheme| {
                let rate = noisy.clone().and_then(|noisy| {
                    let clean = &src.frames.as_ref().expect("loaded")[0];
                    success_rate(clean, &noisy, cfg, scheme, spec.n_refs, seed).map_err(|e| e.to_string())
                });
                SearchRateRow {
                    image: src.id.clone(),
                    scheme,
                    noise,
                    k: cfg.k,
                    window: cfg.window,
                    rate: rate.as_ref().ok().copied(),
                    error: rate.err(),
                }
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        a.image
            .cmp(&b.image)
            .then(a.noise.partial_cmp(&b.noise).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.scheme.cmp(&b.scheme))
    });
    let means = scheme_averages(&rows);
    rows.extend(means);
    Ok(rows)
}

/// Scores of one `(reference, test)` pair.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub reference: String,
    pub test: String,
    pub report: Option<MetricsReport>,
    pub error: Option<String>,
}

pub const METRICS_HEADER: [&str; 11] = [
    "reference", "test", "psnr", "ssim", "psnr_r", "psnr_g", "psnr_b", "ssim_r", "ssim_g", "ssim_b", "error",
];

pub fn metrics_csv(rows: &[MetricsRow]) -> Result<Vec<u8>> {
    to_csv(&METRICS_HEADER, rows, |r| {
        let mut rec = vec![r.reference.clone(), r.test.clone()];
        match &r.report {
            Some(m) => {
                rec.extend([num(m.psnr), num(m.ssim)]);
                rec.extend(m.psnr_channels.iter().map(|&v| num(v)));
                rec.extend(m.ssim_channels.iter().map(|&v| num(v)));
            }
            None => rec.extend(std::iter::repeat_n(String::new(), 8)),
        }
        rec.push(r.error.clone().unwrap_or_default());
        rec
    })
}

/// Scores each `(inputs[2i], inputs[2i + 1])` pair, reference first.
pub fn run_metrics(spec: &ExperimentSpec) -> Result<Vec<MetricsRow>> {
    spec.validate()?;
    Ok(spec
        .inputs
        .par_chunks(2)
        .map(|pair| {
            let (r, t) = (&pair[0], &pair[1]);
            let result = load_image(r).and_then(|ri| {
                let ti = load_image(t)?;
                evaluate(input_id(t), &ri, &ti, spec.quantize_metrics)
            });
            MetricsRow {
                reference: r.display().to_string(),
                test: t.display().to_string(),
                error: result.as_ref().err().map(|e| e.to_string()),
                report: result.ok(),
            }
        })
        .collect())
}

/// Outcome of [`run`]: the report CSV and the number of failed items.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub csv: Vec<u8>,
    pub failures: usize,
}

/// Runs the spec's mode, writes the report atomically when `spec.report`
/// is set, and returns the CSV.
pub fn run(spec: &ExperimentSpec) -> Result<RunOutput> {
    let (csv, failures) = match spec.mode {
        Mode::Denoise | Mode::SynthDenoise => {
            let rows = if spec.mode == Mode::Denoise {
                run_denoise(spec)?
            } else {
                run_synth_denoise(spec)?
            };
            (report_csv(&rows)?, rows.iter().filter(|r| r.error.is_some()).count())
        }
        Mode::SearchRate => {
            let rows = run_search_rate(spec)?;
            let failed = rows.iter().filter(|r| r.error.is_some() && r.image != "mean").count();
            (search_rate_csv(&rows)?, failed)
        }
        Mode::Metrics => {
            let rows = run_metrics(spec)?;
            (metrics_csv(&rows)?, rows.iter().filter(|r| r.error.is_some()).count())
        }
    };
    if let Some(path) = &spec.report {
        write_atomic(path, &csv)?;
    }
    Ok(RunOutput { csv, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth_spec(sigmas: &[f64]) -> ExperimentSpec {
        ExperimentSpec {
            synthetic: 1,
            size: 48,
            sigmas: sigmas.to_vec(),
            seed: 5,
            ..ExperimentSpec::new(Mode::SynthDenoise)
        }
    }

    #[test]
    fn empty_input_gives_header_only() {
        let spec = ExperimentSpec {
            sigmas: vec![25.0],
            ..ExperimentSpec::new(Mode::SynthDenoise)
        };
        let rows = run_synth_denoise(&spec).unwrap();
        assert!(rows.is_empty());
        let csv = String::from_utf8(report_csv(&rows).unwrap()).unwrap();
        assert_eq!(csv, REPORT_HEADER.join(",") + "\n");
    }

    #[test]
    fn two_sigmas_give_two_improving_rows() {
        let rows = run_synth_denoise(&synth_spec(&[25.0, 15.0])).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].sigma, rows[1].sigma), (15.0, 25.0));
        for r in &rows {
            assert!(r.error.is_none(), "{:?}", r.error);
            assert!(r.psnr_denoised.unwrap() > r.psnr_noisy.unwrap());
            assert!(r.ssim_denoised.unwrap() > r.ssim_noisy.unwrap());
        }
    }

    #[test]
    fn missing_file_is_recorded_not_fatal() {
        let spec = ExperimentSpec {
            inputs: vec![PathBuf::from("/nonexistent/x.ppm")],
            ..synth_spec(&[10.0])
        };
        let rows = run_synth_denoise(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        let bad = rows.iter().find(|r| r.image == "x.ppm").unwrap();
        assert!(bad.error.as_deref().unwrap().contains("/nonexistent/x.ppm"));
        assert!(bad.psnr_denoised.is_none());
        assert!(rows.iter().any(|r| r.error.is_none()));
    }

    #[test]
    fn mode_requirements() {
        let mut s = ExperimentSpec::new(Mode::Denoise);
        s.inputs = vec!["a.ppm".into()];
        s.output = Some("out".into());
        assert!(s.validate().is_err());
        s.sigmas = vec![10.0];
        s.validate().unwrap();
        s.sigmas = vec![-1.0];
        assert!(s.validate().is_err());

        let mut m = ExperimentSpec::new(Mode::Metrics);
        m.inputs = vec!["a.ppm".into()];
        assert!(m.validate().is_err());
        m.inputs.push("b.ppm".into());
        m.validate().unwrap();

        let r = ExperimentSpec::new(Mode::SearchRate);
        assert!(r.validate().is_err());
    }

    #[test]
    fn search_rate_defaults_and_overrides() {
        let mut s = ExperimentSpec::new(Mode::SearchRate);
        assert_eq!((s.config(0.0).k, s.config(0.0).window), (60, 20));
        s.overrides.k = Some(20);
        assert_eq!(s.config(0.0).k, 20);
        s.mode = Mode::SynthDenoise;
        s.video = true;
        assert_eq!(s.config(1.0).window, 16);
    }

    #[test]
    fn noise_cases_use_rms_for_per_channel_noise() {
        let mut s = synth_spec(&[]);
        s.sigma_rgb = Some([30.0, 15.0, 30.0]);
        let cases = s.noise_cases();
        assert_eq!(cases.len(), 1);
        assert!((cases[0].0 - 675f64.sqrt()).abs() < 1e-12);
        s.sigmas = vec![10.0, 20.0];
        assert_eq!(s.noise_cases(), vec![(10.0, [30.0, 15.0, 30.0]), (20.0, [30.0, 15.0, 30.0])]);
    }

    #[test]
    fn search_rate_is_one_without_noise() {
        let spec = ExperimentSpec {
            synthetic: 1,
            size: 40,
            sigmas: vec![0.0],
            n_refs: 20,
            ..ExperimentSpec::new(Mode::SearchRate)
        };
        let rows = run_search_rate(&spec).unwrap();
        assert_eq!(rows.len(), 2 * SearchScheme::ALL.len());
        let full = rows
            .iter()
            .find(|r| r.scheme == SearchScheme::FullRgb && r.image == "mean")
            .unwrap();
        assert_eq!(full.rate, Some(1.0));
    }

    #[test]
    fn item_seeds_differ() {
        assert_ne!(item_seed(1, 0), item_seed(1, 1));
        assert_eq!(item_seed(1, 3), item_seed(1, 3));
    }
}
