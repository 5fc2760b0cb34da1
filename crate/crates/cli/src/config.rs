//! Run configuration: flat JSON keys mirroring the physical parameters and
//! Hilbert-space cutoffs, plus the grids of each command. Resolution order is
//! command preset, then `--config` file, then `--set key=value`.

use std::path::Path;

use anyhow::{bail, Context};
use optomech::{HilbertSpec, SystemParams};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    DeltaC,
    G0,
    GCk,
    Kappa,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::DeltaC => "delta_c",
            SweepVar::G0 => "g0",
            SweepVar::GCk => "g_ck",
            SweepVar::Kappa => "kappa",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub omega_c: f64,
    pub omega_m: f64,
    pub g0: f64,
    pub g_ck: f64,
    pub kappa: f64,
    pub gamma_m: f64,
    pub nbar_m: f64,
    /// `null`: lock to the zero-phonon single-photon resonance of each point.
    pub delta_c: Option<f64>,
    /// `null`: `0.01 kappa`.
    pub drive: Option<f64>,
    pub n_cav: usize,
    pub n_mech: usize,

    pub sweep_var: SweepVar,
    pub sweep_min: f64,
    pub sweep_max: f64,
    pub sweep_step: f64,

    pub g0_min: f64,
    pub g0_max: f64,
    pub g0_step: f64,
    pub g_ck_min: f64,
    pub g_ck_max: f64,
    pub g_ck_step: f64,
    pub locus_max_order: usize,

    /// `null`: detection time `pi/(omega_m - g_ck)`.
    pub t: Option<f64>,
    pub t_min: f64,
    /// `null`: one revival period `2 pi/(omega_m - g_ck)`.
    pub t_max: Option<f64>,
    pub t_points: usize,

    pub re_min: f64,
    pub re_max: f64,
    pub re_points: usize,
    pub im_min: f64,
    pub im_max: f64,
    pub im_points: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub x_points: usize,
    /// `null`: perpendicular to the cat separation, `arg(beta) - pi/2`.
    pub theta: Option<f64>,

    /// Mechanical cutoff of the reference propagator used by `verify`.
    pub oracle_n_mech: usize,
}

impl RunConfig {
    /// Photon-blockade reference point.
    pub fn blockade() -> Self {
        let p = SystemParams::blockade_reference();
        Self {
            omega_c: p.omega_c,
            omega_m: p.omega_m,
            g0: p.g0,
            g_ck: p.g_ck,
            kappa: p.kappa,
            gamma_m: p.gamma_m,
            nbar_m: p.nbar_m,
            delta_c: None,
            drive: None,
            n_cav: 4,
            n_mech: 30,
            sweep_var: SweepVar::DeltaC,
            sweep_min: -4.0,
            sweep_max: 2.0,
            sweep_step: 0.005,
            g0_min: 0.2,
            g0_max: 1.2,
            g0_step: 0.02,
            g_ck_min: 0.0,
            g_ck_max: 0.4,
            g_ck_step: 0.02,
            locus_max_order: 3,
            ..Self::cat()
        }
    }

    /// Closed-system cat reference point.
    pub fn cat() -> Self {
        let p = SystemParams::cat_reference();
        let (re, im) = optomech::quasiprob::default_wigner_axes();
        let x = optomech::quasiprob::default_quadrature_axis();
        Self {
            omega_c: p.omega_c,
            omega_m: p.omega_m,
            g0: p.g0,
            g_ck: p.g_ck,
            kappa: p.kappa,
            gamma_m: p.gamma_m,
            nbar_m: p.nbar_m,
            delta_c: None,
            drive: None,
            n_cav: 2,
            n_mech: 60,
            sweep_var: SweepVar::DeltaC,
            sweep_min: -4.0,
            sweep_max: 2.0,
            sweep_step: 0.005,
            g0_min: 0.2,
            g0_max: 1.2,
            g0_step: 0.02,
            g_ck_min: 0.0,
            g_ck_max: 0.4,
            g_ck_step: 0.02,
            locus_max_order: 3,
            t: None,
            t_min: 0.0,
            t_max: None,
            t_points: 201,
            re_min: re.min,
            re_max: re.max,
            re_points: re.n,
            im_min: im.min,
            im_max: im.max,
            im_points: im.n,
            x_min: x.min,
            x_max: x.max,
            x_points: x.n,
            theta: None,
            oracle_n_mech: 640,
        }
    }

    /// Identity checks: the cat point with two-photon blocks and 20 times
    /// over one revival period.
    pub fn verify() -> Self {
        Self { n_cav: 3, t_points: 20, ..Self::cat() }
    }

    /// Overlays a config file and `key=value` overrides on `self`.
    pub fn resolve(self, file: Option<&Path>, overrides: &[String]) -> anyhow::Result<Self> {
        let Value::Object(mut map) = serde_json::to_value(&self)? else { unreachable!("config serializes to an object") };
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
            let Value::Object(entries) = value else { bail!("config {} must be a JSON object", path.display()) };
            for (k, v) in entries {
                set_key(&mut map, &k, v)?;
            }
        }
        for kv in overrides {
            let Some((k, v)) = kv.split_once('=') else { bail!("--set expects key=value, got '{kv}'") };
            let v = v.trim();
            let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
            set_key(&mut map, k.trim(), value)?;
        }
        let cfg: RunConfig = serde_json::from_value(Value::Object(map)).context("invalid config value")?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> anyhow::Result<()> {
        for (name, lo, hi, step) in [
            ("sweep", self.sweep_min, self.sweep_max, self.sweep_step),
            ("g0", self.g0_min, self.g0_max, self.g0_step),
            ("g_ck", self.g_ck_min, self.g_ck_max, self.g_ck_step),
        ] {
            if !(step > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) {
                bail!("{name} grid [{lo}, {hi}] with step {step} is not a non-empty increasing grid");
            }
        }
        if self.t_points == 0 {
            bail!("t_points must be at least 1");
        }
        for (name, lo, hi, n) in [
            ("re", self.re_min, self.re_max, self.re_points),
            ("im", self.im_min, self.im_max, self.im_points),
            ("x", self.x_min, self.x_max, self.x_points),
        ] {
            if !(hi > lo) || n < 2 {
                bail!("{name} axis [{lo}, {hi}] with {n} points is not a valid grid");
            }
        }
        self.hilbert()?;
        Ok(())
    }

    pub fn hilbert(&self) -> anyhow::Result<HilbertSpec> {
        HilbertSpec::new(self.n_cav, self.n_mech).context("invalid Hilbert space")
    }

    /// Parameters as written, with an unset detuning left at zero.
    pub fn raw_params(&self) -> SystemParams {
        SystemParams {
            omega_c: self.omega_c,
            omega_m: self.omega_m,
            g0: self.g0,
            g_ck: self.g_ck,
            kappa: self.kappa,
            gamma_m: self.gamma_m,
            nbar_m: self.nbar_m,
            delta_c: self.delta_c.unwrap_or(0.0),
            drive: self.drive.unwrap_or(0.01 * self.kappa),
        }
    }

    /// Applies the detuning rule to a point whose couplings may have been
    /// changed by a sweep.
    pub fn lock_detuning(&self, mut p: SystemParams) -> optomech::Result<SystemParams> {
        if self.drive.is_none() {
            p.drive = 0.01 * p.kappa;
        }
        p.delta_c = match self.delta_c {
            Some(d) => d,
            None => p.delta_m(1)?,
        };
        Ok(p)
    }

    /// Sorted `key = value` lines for the CSV comment block.
    pub fn echo(&self) -> Vec<String> {
        let Ok(Value::Object(map)) = serde_json::to_value(self) else { return Vec::new() };
        map.into_iter().map(|(k, v)| format!("{k} = {v}")).collect()
    }
}

fn set_key(map: &mut Map<String, Value>, key: &str, value: Value) -> anyhow::Result<()> {
    match map.get_mut(key) {
        Some(slot) => {
            *slot = value;
            Ok(())
        }
        None => bail!("unknown config key '{key}'"),
    }
}
