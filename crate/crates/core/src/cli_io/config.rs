//! Flat `key = value` configuration files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::tensor2d::MaterialParams;

/// Named initial designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialDesign {
    /// All level sets zero, no orientation: the three phases tie everywhere.
    A,
    /// Fiber everywhere at θ = 0.
    B,
    /// Void in the lower half, fiber at θ = 0 in the upper half.
    C,
    /// Fiber everywhere, oriented radially from the domain center.
    D,
    /// Checkerboard of fiber (θ = 0) and isotropic cells.
    E,
}

impl InitialDesign {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "A" => Self::A,
            "B" => Self::B,
            "C" => Self::C,
            "D" => Self::D,
            "E" => Self::E,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Self::A => "A",
            Self::B => "B",
            Self::C => "C",
            Self::D => "D",
            Self::E => "E",
        }
    }
}

/// Starting design: a preset or the point data of a saved snapshot.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSource {
    Preset(InitialDesign),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptConfig {
    pub width: f64,
    pub height: f64,
    pub nx: usize,
    pub ny: usize,
    /// Height of the loaded segment centred on the right edge.
    pub load_height: f64,
    pub traction: [f64; 2],
    pub materials: MaterialParams,
    /// Weight limit as a fraction of the all-isotropic design weight.
    pub w_max_fraction: f64,
    /// Absolute weight limit; overrides the fraction when set.
    pub w_max: Option<f64>,
    pub n_angles: usize,
    /// PID gains in units of `1/W_max`.
    pub gain_p: f64,
    pub gain_d: f64,
    pub gain_ip: f64,
    pub gain_id: f64,
    /// Largest nodal level-set change per step before clamping.
    pub phi_step: f64,
    pub alpha_theta: f64,
    /// Diffusion coefficients; default `1e-4 · width²`.
    pub tau_phi: Option<f64>,
    pub tau_theta: Option<f64>,
    pub w_m: f64,
    pub eps_chi: f64,
    pub initial: InitialSource,
    pub max_iters: usize,
    pub snapshot_interval: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub conv_window: usize,
    pub conv_tol_l: f64,
    pub conv_tol_field: f64,
    /// Feasibility tolerance as a fraction of `W_max`.
    pub feas_tol: f64,
    /// Directory for the derivative-table cache; no caching when unset.
    pub table_cache: Option<PathBuf>,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            width: 2.0,
            height: 1.0,
            nx: 160,
            ny: 80,
            load_height: 0.1,
            traction: [0.0, -1.0],
            materials: MaterialParams::default(),
            w_max_fraction: 0.4,
            w_max: None,
            n_angles: 36,
            gain_p: 20.0,
            gain_d: 10.0,
            gain_ip: 2.0,
            gain_id: 1.0,
            phi_step: 0.2,
            alpha_theta: 0.2,
            tau_phi: None,
            tau_theta: None,
            w_m: 0.5,
            eps_chi: 1e-3,
            initial: InitialSource::Preset(InitialDesign::A),
            max_iters: 400,
            snapshot_interval: 10,
            output_dir: PathBuf::from("out"),
            seed: 0,
            conv_window: 10,
            conv_tol_l: 1e-4,
            conv_tol_field: 1e-3,
            feas_tol: 0.01,
            table_cache: None,
        }
    }
}

fn num(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| Error::validation(key, format!("expected a number, got `{v}`")))?;
    if !x.is_finite() {
        return Err(Error::validation(key, "must be finite"));
    }
    Ok(x)
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| Error::validation(key, format!("expected a nonnegative integer, got `{v}`")))
}

fn positive(key: &str, x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(key, format!("must be positive, got {x}")))
    }
}

/// Full-precision float formatting shared by every export.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl OptConfig {
    pub fn tau_phi(&self) -> f64 {
        self.tau_phi.unwrap_or(1e-4 * self.width * self.width)
    }

    pub fn tau_theta(&self) -> f64 {
        self.tau_theta.unwrap_or(1e-4 * self.width * self.width)
    }

    /// `W_max` in weight units (density × area).
    pub fn weight_limit(&self) -> f64 {
        self.w_max
            .unwrap_or(self.w_max_fraction * self.materials.rho_iso * self.width * self.height)
    }

    /// Assigns one key from its text form, as in a config file. The result
    /// is not validated.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let m = &mut self.materials;
        match key {
            "width" => self.width = num(key, v)?,
            "height" => self.height = num(key, v)?,
            "nx" => self.nx = count(key, v)?,
            "ny" => self.ny = count(key, v)?,
            "load_height" => self.load_height = num(key, v)?,
            "traction_x" => self.traction[0] = num(key, v)?,
            "traction_y" => self.traction[1] = num(key, v)?,
            "nu_V" => m.nu_void = num(key, v)?,
            "nu_I" => m.nu_iso = num(key, v)?,
            "nu_F" => m.nu_fiber = num(key, v)?,
            "E_V" => m.e_void = num(key, v)?,
            "E_I" => m.e_iso = num(key, v)?,
            "E_fib" => m.e_fiber = num(key, v)?,
            "E_back_ratio" => m.back_ratio = num(key, v)?,
            "rho_V" => m.rho_void = num(key, v)?,
            "rho_I" => m.rho_iso = num(key, v)?,
            "rho_F" => m.rho_fiber = num(key, v)?,
            "W_max_fraction" => self.w_max_fraction = num(key, v)?,
            "W_max" => self.w_max = Some(num(key, v)?),
            "n_angles" => self.n_angles = count(key, v)?,
            "K_P" => self.gain_p = num(key, v)?,
            "K_D" => self.gain_d = num(key, v)?,
            "K_IP" => self.gain_ip = num(key, v)?,
            "K_ID" => self.gain_id = num(key, v)?,
            "phi_step" => self.phi_step = num(key, v)?,
            "alpha_theta" => self.alpha_theta = num(key, v)?,
            "tau_phi" => self.tau_phi = Some(num(key, v)?),
            "tau_theta" => self.tau_theta = Some(num(key, v)?),
            "w_m" => self.w_m = num(key, v)?,
            "eps_chi" => self.eps_chi = num(key, v)?,
            "initial_design" => {
                self.initial = InitialSource::Preset(InitialDesign::parse(v).ok_or_else(|| {
                    Error::validation(key, format!("expected one of A, B, C, D, E, got `{v}`"))
                })?)
            }
            "initial_file" => self.initial = InitialSource::File(PathBuf::from(v)),
            "max_iters" => self.max_iters = count(key, v)?,
            "snapshot_interval" => self.snapshot_interval = count(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "seed" => {
                self.seed = v
                    .parse()
                    .map_err(|_| Error::validation(key, format!("expected an unsigned integer, got `{v}`")))?
            }
            "conv_window" => self.conv_window = count(key, v)?,
            "conv_tol_L" => self.conv_tol_l = num(key, v)?,
            "conv_tol_field" => self.conv_tol_field = num(key, v)?,
            "feas_tol" => self.feas_tol = num(key, v)?,
            "table_cache" => self.table_cache = Some(PathBuf::from(v)),
            _ => return Err(Error::validation(key, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        positive("width", self.width)?;
        positive("height", self.height)?;
        if self.nx < 2 {
            return Err(Error::validation("nx", "must be at least 2"));
        }
        if self.ny < 2 {
            return Err(Error::validation("ny", "must be at least 2"));
        }
        positive("load_height", self.load_height)?;
        if self.load_height > self.height {
            return Err(Error::validation("load_height", "exceeds the domain height"));
        }
        self.materials.validate().map_err(|e| match e {
            Error::InvalidMaterial { name, reason } => Error::validation(name, reason),
            other => other,
        })?;
        if let Some(w) = self.w_max {
            positive("W_max", w)?;
        } else {
            positive("W_max_fraction", self.w_max_fraction)?;
        }
        if self.n_angles < 8 || self.n_angles % 2 != 0 {
            return Err(Error::validation("n_angles", "must be even and at least 8"));
        }
        for (k, g) in [("K_P", self.gain_p), ("K_D", self.gain_d), ("K_IP", self.gain_ip), ("K_ID", self.gain_id)] {
            if g < 0.0 {
                return Err(Error::validation(k, "gains must be nonnegative"));
            }
        }
        positive("phi_step", self.phi_step)?;
        if !(self.alpha_theta > 0.0 && self.alpha_theta <= 1.0) {
            return Err(Error::validation("alpha_theta", "must lie in (0, 1]"));
        }
        for (k, t) in [("tau_phi", self.tau_phi), ("tau_theta", self.tau_theta)] {
            if let Some(t) = t {
                if t < 0.0 {
                    return Err(Error::validation(k, "must be nonnegative"));
                }
            }
        }
        if !(self.w_m > 0.0 && self.w_m < 1.0) {
            return Err(Error::validation("w_m", "must lie in (0, 1)"));
        }
        if !(self.eps_chi > 0.0 && self.eps_chi < 0.1) {
            return Err(Error::validation("eps_chi", "must lie in (0, 0.1)"));
        }
        if self.conv_window < 2 {
            return Err(Error::validation("conv_window", "must be at least 2"));
        }
        positive("conv_tol_L", self.conv_tol_l)?;
        positive("conv_tol_field", self.conv_tol_field)?;
        positive("feas_tol", self.feas_tol)?;
        Ok(())
    }

    /// Parses configuration text; absent keys keep their defaults.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |column: usize, message: &str| Error::Parse {
                path: path.to_path_buf(),
                line: ln + 1,
                column,
                message: message.to_string(),
            };
            let Some(eq) = line.find('=') else {
                let col = line.len() - line.trim_start().len() + 1;
                return Err(parse_err(col, "expected `key = value`"));
            };
            let key = line[..eq].trim();
            let value = line[eq + 1..].trim();
            if key.is_empty() {
                return Err(parse_err(eq + 1, "missing key before `=`"));
            }
            if let Some(bad) = key.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')) {
                let col = line.find(key).unwrap_or(0) + bad + 1;
                return Err(parse_err(col, "keys may contain only letters, digits and `_`"));
            }
            if value.is_empty() {
                return Err(parse_err(eq + 2, "missing value after `=`"));
            }
            if !seen.insert(key.to_string()) {
                return Err(Error::validation(key, "given more than once"));
            }
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// The effective configuration as loadable text.
    pub fn echo(&self) -> String {
        let m = &self.materials;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("width", fmt_f64(self.width));
        kv("height", fmt_f64(self.height));
        kv("nx", self.nx.to_string());
        kv("ny", self.ny.to_string());
        kv("load_height", fmt_f64(self.load_height));
        kv("traction_x", fmt_f64(self.traction[0]));
        kv("traction_y", fmt_f64(self.traction[1]));
        kv("nu_V", fmt_f64(m.nu_void));
        kv("nu_I", fmt_f64(m.nu_iso));
        kv("nu_F", fmt_f64(m.nu_fiber));
        kv("E_V", fmt_f64(m.e_void));
        kv("E_I", fmt_f64(m.e_iso));
        kv("E_fib", fmt_f64(m.e_fiber));
        kv("E_back_ratio", fmt_f64(m.back_ratio));
        kv("rho_V", fmt_f64(m.rho_void));
        kv("rho_I", fmt_f64(m.rho_iso));
        kv("rho_F", fmt_f64(m.rho_fiber));
        kv("W_max_fraction", fmt_f64(self.w_max_fraction));
        if let Some(w) = self.w_max {
            kv("W_max", fmt_f64(w));
        }
        kv("n_angles", self.n_angles.to_string());
        kv("K_P", fmt_f64(self.gain_p));
        kv("K_D", fmt_f64(self.gain_d));
        kv("K_IP", fmt_f64(self.gain_ip));
        kv("K_ID", fmt_f64(self.gain_id));
        kv("phi_step", fmt_f64(self.phi_step));
        kv("alpha_theta", fmt_f64(self.alpha_theta));
        if let Some(t) = self.tau_phi {
            kv("tau_phi", fmt_f64(t));
        }
        if let Some(t) = self.tau_theta {
            kv("tau_theta", fmt_f64(t));
        }
        kv("w_m", fmt_f64(self.w_m));
        kv("eps_chi", fmt_f64(self.eps_chi));
        match &self.initial {
            InitialSource::Preset(p) => kv("initial_design", p.name().to_string()),
            InitialSource::File(p) => kv("initial_file", p.display().to_string()),
        }
        kv("max_iters", self.max_iters.to_string());
        kv("snapshot_interval", self.snapshot_interval.to_string());
        kv("output_dir", self.output_dir.display().to_string());
        kv("seed", self.seed.to_string());
        kv("conv_window", self.conv_window.to_string());
        kv("conv_tol_L", fmt_f64(self.conv_tol_l));
        kv("conv_tol_field", fmt_f64(self.conv_tol_field));
        kv("feas_tol", fmt_f64(self.feas_tol));
        if let Some(p) = &self.table_cache {
            kv("table_cache", p.display().to_string());
        }
        s
    }

    /// Writes `config.echo` into `dir`.
    pub fn write_echo(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join("config.echo");
        fs::write(&path, self.echo())?;
        Ok(path)
    }
}

pub fn load_config(path: &Path) -> Result<OptConfig> {
    let text = fs::read_to_string(path)?;
    OptConfig::parse(&text, path)
}
