use crate::error::{Error, Result};

/// Tunables for grouping, thresholding and aggregation.
#[derive(Clone, Debug, PartialEq)]
pub struct DenoiseConfig {
    /// Patch side.
    pub ps: usize,
    /// Search window side, in candidate top-left positions.
    pub window: usize,
    /// Number of similar patches per group.
    pub k: usize,
    /// Green-dominance threshold for guided search.
    pub lambda: f64,
    /// Noise standard deviation on the `[0, 255]` scale.
    pub sigma: f64,
    /// Multiplier in front of the universal threshold.
    pub tau_scale: f64,
    /// Reference grid step.
    pub stride: usize,
    pub video: bool,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        DenoiseConfig {
            ps: 8,
            window: 20,
            k: 30,
            lambda: 0.8,
            sigma: 0.0,
            tau_scale: 1.1,
            stride: 4,
            video: false,
        }
    }
}

impl DenoiseConfig {
    pub const VIDEO_WINDOW: usize = 16;

    pub fn with_sigma(sigma: f64) -> Self {
        DenoiseConfig {
            sigma,
            ..Default::default()
        }
    }

    /// Video defaults: smaller spatial window, video threshold formula.
    pub fn video(sigma: f64) -> Self {
        DenoiseConfig {
            sigma,
            window: Self::VIDEO_WINDOW,
            video: true,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ps < 2 {
            return Err(Error::Config(format!("ps must be >= 2, got {}", self.ps)));
        }
        if self.k < 1 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if self.window < self.ps {
            return Err(Error::Config(format!(
                "window {} must be >= ps {}",
                self.window, self.ps
            )));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if !(self.tau_scale >= 0.0 && self.tau_scale.is_finite()) {
            return Err(Error::Config(format!(
                "tau scale must be >= 0, got {}",
                self.tau_scale
            )));
        }
        if self.stride < 1 {
            return Err(Error::Config("stride must be >= 1".into()));
        }
        Ok(())
    }

    /// Compact `key=value` summary used in reports.
    pub fn summary(&self) -> String {
        format!(
            "ps={} W={} K={} lambda={} tau_scale={} stride={}{}",
            self.ps,
            self.window,
            self.k,
            self.lambda,
            self.tau_scale,
            self.stride,
            if self.video { " video" } else { "" }
        )
    }
}
