//! Parallel evaluation over grids and modes with ordered reductions.

use expseries_core::bounds::{self, BoundError, BoundReport};
use expseries_core::fieldeval::{sample_point, FieldError, FieldEvaluator, GridSpec, PointSample, TimeSlice};
use expseries_core::ring::Rational;
use expseries_core::table::CoefficientTable;
use rayon::prelude::*;

/// Samples every grid point in parallel; results come back in grid order.
pub fn sample_grid(ev: &FieldEvaluator, grid: &GridSpec, h: f64) -> Result<Vec<PointSample>, FieldError> {
    grid.validate(ev.kind())?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(FieldError::Step(h));
    }
    let slices: Vec<TimeSlice<'_>> = grid.t.values().into_iter().map(|t| ev.slice(t)).collect();
    grid.points()
        .par_iter()
        .map(|(x, it)| sample_point(ev, &slices[*it], x, h))
        .collect()
}

/// Decay report with modes checked in parallel and records kept in mode
/// order.
pub fn check_decay(table: &CoefficientTable, epsilon: &Rational, t_samples: &[f64]) -> Result<BoundReport, BoundError> {
    let modes: Vec<_> = table.iter().map(|(k, _)| *k).filter(|k| !k.is_zero()).collect();
    let per_mode: Vec<_> = modes
        .par_iter()
        .map(|k| bounds::mode_records(table, k, epsilon, t_samples))
        .collect::<Result<_, _>>()?;
    bounds::report_from_records(table, epsilon, per_mode.into_iter().flatten().collect())
}

/// Fields and symbolic residuals only, for export.
pub fn sample_fields(ev: &FieldEvaluator, grid: &GridSpec) -> Result<Vec<PointSample>, FieldError> {
    grid.validate(ev.kind())?;
    let slices: Vec<TimeSlice<'_>> = grid.t.values().into_iter().map(|t| ev.slice(t)).collect();
    grid.points()
        .par_iter()
        .map(|(x, it)| {
            let s = &slices[*it];
            Ok(PointSample {
                x: *x,
                t: s.t(),
                field: s.field(x)?,
                residual: s.residual(x)?,
                fd: None,
            })
        })
        .collect()
}
