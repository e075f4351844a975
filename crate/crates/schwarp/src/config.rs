//! Run configuration: a single JSON document drives every pipeline, so runs
//! are reproducible from the manifest echo alone.

use serde::{Deserialize, Serialize};

use crate::abc::LayerProfile;
use crate::error::{Error, Result};
use crate::generator::AbcKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Schrodingerized,
    Both,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl DomainBox {
    pub fn square(lo: f64, hi: f64) -> Self {
        DomainBox {
            x_min: lo,
            x_max: hi,
            y_min: lo,
            y_max: hi,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub abc: AbcKind,
    pub method: Method,
    /// Computational domain Ω (also the grid domain for CAP/PML).
    pub domain: DomainBox,
    /// Interior points per direction across `domain`.
    pub n: usize,
    /// Auxiliary interval [a, b].
    pub p_interval: (f64, f64),
    /// p-grid points (even).
    pub m: usize,
    pub cap_profile: LayerProfile,
    pub pml_profile: LayerProfile,
    /// DtN interpolation point.
    pub s0: f64,
    /// Exterior truncation domain D for the DtN kernel.
    pub dtn_domain: DomainBox,
    /// Output times, nondecreasing.
    pub times: Vec<f64>,
    pub out_dir: String,
    /// Divide recovered states by the quadrature constant.
    pub renormalize: bool,
    /// Error target for the query-complexity estimate.
    pub epsilon: f64,
    /// RK4 step override for the direct solver (None: 1/(32 ||L||_1)).
    pub dt: Option<f64>,
    /// Dense-eigensolve threshold override for the mode evolution.
    pub dense_limit: Option<usize>,
    /// When set (with method = both), a rel_l2 above this fails the run with
    /// exit code 4.
    pub self_test_rel_l2: Option<f64>,
    /// M values for the convergence study.
    pub m_sequence: Vec<usize>,
    /// Comparison time for the convergence study.
    pub convergence_time: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            abc: AbcKind::Cap,
            method: Method::Both,
            domain: DomainBox::square(-3.0, 3.0),
            n: 64,
            p_interval: (-5.0, 5.0),
            m: 64,
            cap_profile: LayerProfile::default(),
            pml_profile: LayerProfile::default(),
            s0: 1.0,
            dtn_domain: DomainBox::square(-6.0, 6.0),
            times: vec![0.3, 0.6, 0.9],
            out_dir: "out".into(),
            renormalize: false,
            epsilon: 1e-3,
            dt: None,
            dense_limit: None,
            self_test_rel_l2: None,
            m_sequence: vec![16, 32, 64],
            convergence_time: 0.6,
        }
    }
}

fn fail(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: format!("config.{path}"),
        message: message.into(),
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::from_json(&text)
    }

    /// Fail-fast validation with a field path on every rejection.
    pub fn validate(&self) -> Result<()> {
        let d = &self.domain;
        if d.x_max <= d.x_min {
            return Err(fail("domain.x_max", "must exceed x_min"));
        }
        if d.y_max <= d.y_min {
            return Err(fail("domain.y_max", "must exceed y_min"));
        }
        let wx = d.x_max - d.x_min;
        let wy = d.y_max - d.y_min;
        if ((wx - wy) / wx).abs() > 1e-12 {
            return Err(fail("domain", "x and y widths must agree (shared spacing)"));
        }
        if self.n < 1 {
            return Err(fail("n", "need at least one interior point"));
        }
        let (a, b) = self.p_interval;
        if !(a < 0.0 && 0.0 < b) {
            return Err(fail("p_interval", "must straddle 0 with a < 0 < b"));
        }
        if self.m < 4 || self.m % 2 != 0 {
            return Err(fail("m", "must be even and at least 4"));
        }
        if self.times.is_empty() {
            return Err(fail("times", "need at least one output time"));
        }
        for w in self.times.windows(2) {
            if w[1] < w[0] {
                return Err(fail("times", "must be nondecreasing"));
            }
        }
        if self.times.iter().any(|&t| t < 0.0) {
            return Err(fail("times", "must be nonnegative"));
        }
        self.cap_profile
            .validate()
            .map_err(|_| fail("cap_profile", "invalid layer profile"))?;
        self.pml_profile
            .validate()
            .map_err(|_| fail("pml_profile", "invalid layer profile"))?;
        if self.epsilon <= 0.0 {
            return Err(fail("epsilon", "must be positive"));
        }
        if let Some(dt) = self.dt {
            if dt <= 0.0 {
                return Err(fail("dt", "must be positive"));
            }
        }
        for (k, &m) in self.m_sequence.iter().enumerate() {
            if m < 4 || m % 2 != 0 {
                return Err(fail(
                    &format!("m_sequence[{k}]"),
                    "must be even and at least 4",
                ));
            }
        }
        if self.convergence_time < 0.0 {
            return Err(fail("convergence_time", "must be nonnegative"));
        }
        match self.abc {
            AbcKind::Cap => {
                let p = self.cap_profile.inner_half_width;
                if -p < d.x_min || p > d.x_max || -p < d.y_min || p > d.y_max {
                    return Err(fail(
                        "cap_profile.inner_half_width",
                        "inner box must lie inside the domain",
                    ));
                }
            }
            AbcKind::Pml => {
                let p = self.pml_profile.inner_half_width;
                if -p < d.x_min || p > d.x_max || -p < d.y_min || p > d.y_max {
                    return Err(fail(
                        "pml_profile.inner_half_width",
                        "inner box must lie inside the domain",
                    ));
                }
            }
            AbcKind::Dtn0 | AbcKind::Dtn1 => {
                if self.s0 == 0.0 {
                    return Err(fail("s0", "must be nonzero"));
                }
                let dd = &self.dtn_domain;
                if dd.x_min >= d.x_min
                    || dd.x_max <= d.x_max
                    || dd.y_min >= d.y_min
                    || dd.y_max <= d.y_max
                {
                    return Err(fail(
                        "dtn_domain",
                        "must strictly contain the computational domain",
                    ));
                }
                let dx = wx / (self.n as f64 + 1.0);
                for (name, w) in [("x", dd.x_max - dd.x_min), ("y", dd.y_max - dd.y_min)] {
                    let ratio = w / dx;
                    if (ratio - ratio.round()).abs() > 1e-9 {
                        return Err(fail(
                            "dtn_domain",
                            format!("{name} width {w} is not a multiple of the spacing {dx}"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}
