//! Run configuration shared by the command line subcommands.

use crate::embed::{Method, SsmrpeParams, DEFAULT_RIDGE};
use crate::error::{HsiError, Result};
use crate::eval::{MethodConfig, SplitMode, SplitSpec};
use crate::ssgraph::{ScdMode, DEFAULT_EPS};
use crate::wmf::{FilterConfig, DEFAULT_GAMMA0};

pub const DEFAULT_W: usize = 13;
pub const DEFAULT_K: usize = 20;
/// The reduced dimension when none is given.
pub const DEFAULT_D: usize = 30;
pub const DEFAULT_REPEATS: usize = 5;
pub const DEFAULT_TRAIN_COUNT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub w: usize,
    pub k: usize,
    pub d: usize,
    pub gamma0: f64,
    pub eps: f64,
    pub ridge: f64,
    pub seed: u64,
    pub repeats: usize,
    pub split: SplitMode,
    pub project_filtered: bool,
    /// Constant in place of the spatial coordinate distance.
    pub scd_const: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: Method::Ssmrpe,
            w: DEFAULT_W,
            k: DEFAULT_K,
            d: DEFAULT_D,
            gamma0: DEFAULT_GAMMA0,
            eps: DEFAULT_EPS,
            ridge: DEFAULT_RIDGE,
            seed: 0,
            repeats: DEFAULT_REPEATS,
            split: SplitMode::Count(DEFAULT_TRAIN_COUNT),
            project_filtered: false,
            scd_const: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        FilterConfig::new(self.w, self.gamma0)?;
        if self.k == 0 {
            return Err(HsiError::config("k must be at least 1"));
        }
        if self.d == 0 {
            return Err(HsiError::config("d must be at least 1"));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(HsiError::config(format!("eps must be finite and >= 0, got {}", self.eps)));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(HsiError::config(format!("ridge must be finite and >= 0, got {}", self.ridge)));
        }
        if let Some(c) = self.scd_const {
            if !(c > 0.0 && c.is_finite()) {
                return Err(HsiError::config(format!("scd constant must be finite and > 0, got {c}")));
            }
        }
        self.split_spec().validate()
    }

    pub fn params(&self) -> Result<SsmrpeParams> {
        Ok(SsmrpeParams {
            filter: FilterConfig::new(self.w, self.gamma0)?,
            k: self.k,
            d: self.d,
            eps: self.eps,
            ridge: self.ridge,
            project_filtered: self.project_filtered,
            scd: self.scd_const.map_or(ScdMode::Coordinates, ScdMode::Constant),
        })
    }

    pub fn method_config(&self) -> Result<MethodConfig> {
        self.validate()?;
        Ok(MethodConfig {
            method: self.method,
            params: self.params()?,
        })
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            mode: self.split,
            seed: self.seed,
            repeats: self.repeats,
        }
    }
}
