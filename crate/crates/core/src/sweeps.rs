//! Parameter sweeps of the maximal reference-GWI violation over the four
//! mixed-state families.
//!
//! Grid points are optimized independently (in parallel when the `parallel`
//! feature is on), then a sequential warm-start refinement pass chains each
//! point's best settings into its neighbors, forward and backward, which
//! smooths out restarts that landed in poor basins.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::inequalities::gwi_eq3;
use crate::measurements::{ObservableKind, ScenarioSettings};
use crate::optimizer::{maximize_violation_seeded, OptConfig};
use crate::states::{mixed_family, MixedFamily};

/// One optimized grid point.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub p: f64,
    /// Maximal LHS value of the reference GWI (bound 0); negative values
    /// are kept as-is.
    pub w_max: f64,
    pub settings: ScenarioSettings,
}

/// A full sweep of one family under one observable kind.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSeries {
    pub family: MixedFamily,
    pub kind: ObservableKind,
    /// Mixing weight, only meaningful for rho4.
    pub q: Option<f64>,
    pub points: Vec<SweepPoint>,
}

/// Uniform grid of `n` points spanning [0, 1].
pub fn uniform_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs at least two points");
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Sweep the maximal reference-GWI violation of `family` over the visibility
/// grid.
pub fn sweep(
    family: MixedFamily,
    kind: ObservableKind,
    q: f64,
    grid: &[f64],
    config: &OptConfig,
) -> Result<SweepSeries> {
    if grid.is_empty() {
        return Err(Error::InvalidState("empty sweep grid".into()));
    }
    for window in grid.windows(2) {
        if window[1] <= window[0] {
            return Err(Error::InvalidState(
                "sweep grid must be strictly increasing".into(),
            ));
        }
    }
    if grid[0] < 0.0 || *grid.last().unwrap() > 1.0 {
        return Err(Error::InvalidState("sweep grid must lie in [0, 1]".into()));
    }
    let spec = gwi_eq3();

    // Independent optimization of every grid point.
    let first_pass: Vec<Result<(f64, f64, ScenarioSettings)>> =
        exec::map_indexed(grid.len(), |idx| {
            let p = grid[idx];
            let state = mixed_family(family, p, q)?;
            let result = maximize_violation_seeded(&spec, kind, &state, config, &[])?;
            Ok((p, result.best_value, result.best_settings))
        });

    let mut points = Vec::with_capacity(grid.len());
    for entry in first_pass {
        let (p, w_max, settings) = entry?;
        points.push(SweepPoint { p, w_max, settings });
    }

    // Warm-start refinement: a cheap deterministic re-run per point, seeded
    // with the neighboring optimum, forward then backward.
    let refine_config = OptConfig {
        restarts: 0,
        keep_history: false,
        ..config.clone()
    };
    for direction in [1i64, -1] {
        let order: Vec<usize> = if direction == 1 {
            (0..points.len()).collect()
        } else {
            (0..points.len()).rev().collect()
        };
        for pair in order.windows(2) {
            let (from, to) = (pair[0], pair[1]);
            let warm = vec![
                points[from].settings.to_coords(),
                points[to].settings.to_coords(),
            ];
            let state = mixed_family(family, points[to].p, q)?;
            let refined = maximize_violation_seeded(&spec, kind, &state, &refine_config, &warm)?;
            if refined.best_value > points[to].w_max {
                points[to].w_max = refined.best_value;
                points[to].settings = refined.best_settings;
            }
        }
    }

    Ok(SweepSeries {
        family,
        kind,
        q: (family == MixedFamily::Rho4).then_some(q),
        points,
    })
}

impl SweepSeries {
    /// CSV with header `family,kind,q,p,w_max`; q is empty for families
    /// without a mixing weight.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "family,kind,q,p,w_max")?;
        let q = self.q.map(|v| format!("{v}")).unwrap_or_default();
        for point in &self.points {
            writeln!(
                out,
                "{},{},{},{},{}",
                self.family.name(),
                self.kind.name(),
                q,
                point.p,
                point.w_max
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writes to memory");
        String::from_utf8(buf).expect("csv is ascii")
    }
}
