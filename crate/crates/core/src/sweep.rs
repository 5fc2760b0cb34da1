//! Detuning sweeps of the photon statistics and matching of the detected
//! g2 extrema to the closed-form resonance detunings.

use serde::{Deserialize, Serialize};

use crate::analysis::{local_maxima, local_minima};
use crate::blockade::{photon_stats_exact, photon_stats_lamb_dicke, PhotonStats};
use crate::error::{Error, Result};
use crate::lindblad::{observables, steady_state_with, LindbladSpec, SteadyStateOptions};
use crate::model::{Resonance, SystemParams};
use crate::operators::HilbertSpec;

/// Points solved in sequence, each starting from its neighbour's steady
/// state. Fixed so results do not depend on how chunks are scheduled.
pub const SWEEP_CHUNK: usize = 40;

/// Half-width (in grid points) of the window a detected extremum must
/// dominate.
pub const EXTREMUM_WINDOW: usize = 3;

/// `[min, max]` in steps of `step`, endpoints included.
pub fn detuning_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(max >= min) || !min.is_finite() || !max.is_finite() {
        return Err(Error::Domain(format!("bad sweep [{min}, {max}] step {step}")));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| min + k as f64 * step).collect())
}

/// Master-equation statistics at one setting, optionally warm-started.
pub fn photon_stats_master(params: &SystemParams, spec: HilbertSpec, warm: Option<&crate::DensityMatrix>) -> Result<(PhotonStats, crate::DensityMatrix)> {
    let ls = LindbladSpec::from_params(spec, params)?;
    let opts = SteadyStateOptions { initial: warm.cloned(), ..SteadyStateOptions::default() };
    let ss = steady_state_with(&ls, &opts)?;
    let stats = observables(&ss.rho)?.photon_stats();
    Ok((stats, ss.rho))
}

/// Master-equation statistics for consecutive settings, each solve
/// starting from the previous steady state.
pub fn master_chunk(points: &[SystemParams], spec: HilbertSpec) -> Vec<Result<PhotonStats>> {
    let mut warm = None;
    points
        .iter()
        .map(|p| match photon_stats_master(p, spec, warm.as_ref()) {
            Ok((s, rho)) => {
                warm = Some(rho);
                Ok(s)
            }
            Err(e) => {
                warm = None;
                Err(e)
            }
        })
        .collect()
}

/// Settings processed in chunks of [`SWEEP_CHUNK`].
pub fn master_sweep_points(points: &[SystemParams], spec: HilbertSpec) -> Vec<Result<PhotonStats>> {
    points.chunks(SWEEP_CHUNK).flat_map(|c| master_chunk(c, spec)).collect()
}

/// `params` with `delta_c` replaced by each detuning.
pub fn detuned(params: &SystemParams, deltas: &[f64]) -> Vec<SystemParams> {
    deltas.iter().map(|&d| SystemParams { delta_c: d, ..*params }).collect()
}

pub fn master_sweep(params: &SystemParams, spec: HilbertSpec, deltas: &[f64]) -> Vec<Result<PhotonStats>> {
    master_sweep_points(&detuned(params, deltas), spec)
}

pub fn exact_sweep(params: &SystemParams, spec: HilbertSpec, deltas: &[f64]) -> Vec<Result<PhotonStats>> {
    deltas.iter().map(|&d| photon_stats_exact(&SystemParams { delta_c: d, ..*params }, &spec)).collect()
}

pub fn lamb_dicke_sweep(params: &SystemParams, deltas: &[f64]) -> Vec<Result<PhotonStats>> {
    deltas.iter().map(|&d| photon_stats_lamb_dicke(&SystemParams { delta_c: d, ..*params })).collect()
}

/// Sideband indices listed for the single- and two-photon resonances.
pub const TABLE_SINGLE: [usize; 6] = [0, 1, 2, 3, 4, 5];
pub const TABLE_TWO: [usize; 6] = [0, 1, 2, 3, 5, 8];

/// One predicted resonance and the nearest detected g2 extremum (minimum
/// for single-photon, maximum for two-photon).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatch {
    pub kind: Resonance,
    pub sideband: usize,
    pub predicted: f64,
    pub detected: Option<f64>,
}

impl FeatureMatch {
    pub fn offset(&self) -> Option<f64> {
        self.detected.map(|d| d - self.predicted)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.offset().is_some_and(|o| o.abs() <= tol)
    }

    pub fn label(&self) -> String {
        match self.kind {
            Resonance::SinglePhoton => format!("single[{}]", self.sideband),
            Resonance::TwoPhoton => format!("two[{}]", self.sideband),
        }
    }
}

/// Matches every listed resonance to the nearest strict local extremum of
/// `g2` (NaN points never qualify).
pub fn match_features(params: &SystemParams, deltas: &[f64], g2: &[f64], single: &[usize], two: &[usize]) -> Result<Vec<FeatureMatch>> {
    if deltas.len() != g2.len() {
        return Err(Error::DimensionMismatch { expected: deltas.len(), found: g2.len() });
    }
    let minima: Vec<f64> = local_minima(g2, EXTREMUM_WINDOW).into_iter().map(|i| deltas[i]).collect();
    let maxima: Vec<f64> = local_maxima(g2, EXTREMUM_WINDOW).into_iter().map(|i| deltas[i]).collect();
    let mut out = Vec::with_capacity(single.len() + two.len());
    for (kind, idx, cands) in [(Resonance::SinglePhoton, single, &minima), (Resonance::TwoPhoton, two, &maxima)] {
        for &n in idx {
            let predicted = params.optimal_detuning(kind, n)?;
            out.push(FeatureMatch { kind, sideband: n, predicted, detected: crate::analysis::nearest(cands, predicted) });
        }
    }
    Ok(out)
}

/// `g2` column with failed points as NaN.
pub fn g2_column(stats: &[Result<PhotonStats>]) -> Vec<f64> {
    stats.iter().map(|s| s.as_ref().map_or(f64::NAN, |s| s.g2)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = detuning_grid(-4.0, 2.0, 0.005).unwrap();
        assert_eq!(g.len(), 1201);
        assert!((g[1200] - 2.0).abs() < 1e-12);
        assert!(detuning_grid(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn analytic_sweep_finds_table_features() {
        let p = SystemParams::blockade_reference();
        let spec = HilbertSpec::blockade_default();
        let d = detuning_grid(-4.0, 2.0, 0.005).unwrap();
        let g2 = g2_column(&exact_sweep(&p, spec, &d));
        let m = match_features(&p, &d, &g2, &TABLE_SINGLE, &TABLE_TWO).unwrap();
        assert_eq!(m.len(), 12);
        assert!(m.iter().all(|f| f.detected.is_some()));
        assert!((m[0].predicted - 0.5939394).abs() < 1e-6);
        assert!((m[11].predicted + 1.0923077).abs() < 1e-6);
    }

    #[test]
    fn warm_started_chunk_matches_cold_solves() {
        let p = SystemParams::blockade_reference();
        let spec = HilbertSpec::new(3, 12).unwrap();
        let d = [0.55, 0.56, 0.57];
        let warm = master_chunk(&detuned(&p, &d), spec);
        for (k, &dc) in d.iter().enumerate() {
            let (cold, _) = photon_stats_master(&SystemParams { delta_c: dc, ..p }, spec, None).unwrap();
            let w = warm[k].as_ref().unwrap();
            assert!((w.g2 - cold.g2).abs() < 1e-8 * cold.g2.abs().max(1.0));
        }
    }
}
