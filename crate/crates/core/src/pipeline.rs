//! Transfer matrix to realizable state space, keeping every intermediate stage.

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::realizability::{
    check_doubled_up_symmetry, check_transform_conditions_with, transform_to_realizable_with,
    RealizabilityReport, SymmetryReport, TransformConditions,
};
use crate::statespace::{denormalize, minimality_report_with, tf_to_minimal_ss_with, MinimalityReport, Scale, StateSpace};
use crate::tfio::{assemble_doubled_up, RationalGrid, TransferMatrix};
use crate::tolerance::Tolerances;

#[derive(Clone, Debug)]
pub struct Realized {
    pub doubled: RationalGrid,
    /// Minimal realization before the transform, in the working variable.
    pub minimal: StateSpace,
    pub minimality: MinimalityReport,
    pub conditions: TransformConditions,
    pub x: CMat,
    pub t: CMat,
    /// Realizable model in the working variable (dimensionless when normalized).
    pub working: StateSpace,
    /// Realizable model in physical units.
    pub physical: StateSpace,
    pub report: RealizabilityReport,
    pub symmetry: SymmetryReport,
}

/// Realizes in `s~ = 2 s / s0` when `normalize_rate` is `Some(s0)`, then reverses the scaling.
pub fn realize_transfer_matrix(
    tm: &TransferMatrix,
    normalize_rate: Option<f64>,
    tol: &Tolerances,
) -> Result<Realized> {
    realize_grid(&assemble_doubled_up(tm), normalize_rate, tol)
}

pub fn realize_grid(doubled: &RationalGrid, normalize_rate: Option<f64>, tol: &Tolerances) -> Result<Realized> {
    let work_grid = match normalize_rate {
        Some(s0) if s0 > 0.0 && s0.is_finite() => doubled.scale_variable(C64::new(s0 / 2.0, 0.0)),
        Some(s0) => return Err(Error::InvalidParameter(format!("reference rate {s0} must be positive"))),
        None => doubled.clone(),
    };
    let minimal = tf_to_minimal_ss_with(&work_grid, tol)?;
    let minimality = minimality_report_with(&minimal, tol.rank);
    let conditions = check_transform_conditions_with(&minimal, tol)?;
    let tr = transform_to_realizable_with(&minimal, tol)?;
    let physical = match normalize_rate {
        Some(s0) => denormalize(&tr.ss.clone().with_scale(Some(Scale { s0, dimensionless: true })))?,
        None => tr.ss.clone(),
    };
    let symmetry = check_doubled_up_symmetry(&physical);
    Ok(Realized {
        doubled: doubled.clone(),
        minimal,
        minimality,
        conditions,
        x: tr.x,
        t: tr.t,
        working: tr.ss,
        physical,
        report: tr.report,
        symmetry,
    })
}
