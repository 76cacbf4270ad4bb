//! Isotropic log-concave measures and the moments of their exponential tilts
//! `p ∝ ρ(x) exp(⟨θ, x⟩ - t|x|²/2)`.

mod component;
mod spec;

pub use component::{
    Component1D, ComponentKind, Piece, Standardization, TiltMoments1D, PANEL_DROP, TRUNCATION_NATS,
};
pub use spec::{parse_model, read_grid_file};

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{LoclabError, Result};
use crate::numerics::{jacobi_spectrum, Spectrum, SymMatrix};

/// Slack allowed in `λ_max(A) ≤ 1/t` before a covariance is rejected.
pub const LICHNEROWICZ_TOL: f64 = 1e-8;
/// Default tolerance for [`verify_isotropic`].
pub const ISOTROPY_TOL: f64 = 1e-8;

/// A component repeated `multiplicity` times, with the label used in specs.
#[derive(Clone, Debug)]
pub struct Block {
    pub label: String,
    pub component: Arc<Component1D>,
    pub multiplicity: usize,
}

#[derive(Clone, Debug)]
pub enum MeasureModel {
    Gaussian { dim: usize },
    Product { blocks: Vec<Block>, coord_block: Vec<usize> },
}

impl MeasureModel {
    pub fn gaussian(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(LoclabError::ModelSpec("dimension must be at least 1".into()));
        }
        Ok(MeasureModel::Gaussian { dim })
    }

    pub fn product(blocks: Vec<Block>) -> Result<Self> {
        let mut coord_block = Vec::new();
        for (i, b) in blocks.iter().enumerate() {
            coord_block.extend(std::iter::repeat_n(i, b.multiplicity));
        }
        if coord_block.is_empty() {
            return Err(LoclabError::ModelSpec("product needs at least one coordinate".into()));
        }
        Ok(MeasureModel::Product { blocks, coord_block })
    }

    /// `label*multiplicity` of a single standardized component.
    pub fn product_of(label: &str, kind: ComponentKind, multiplicity: usize) -> Result<Self> {
        Self::product(vec![Block {
            label: label.to_string(),
            component: Arc::new(Component1D::new(kind)?),
            multiplicity,
        }])
    }

    pub fn dim(&self) -> usize {
        match self {
            MeasureModel::Gaussian { dim } => *dim,
            MeasureModel::Product { coord_block, .. } => coord_block.len(),
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, MeasureModel::Gaussian { .. })
    }

    /// True when every component is symmetric about the origin.
    pub fn is_symmetric(&self) -> bool {
        match self {
            MeasureModel::Gaussian { .. } => true,
            MeasureModel::Product { blocks, .. } => blocks.iter().all(|b| b.component.is_symmetric()),
        }
    }

    /// Component governing coordinate `i` (a standard Gaussian for Gaussian models).
    pub fn component(&self, i: usize) -> Option<&Component1D> {
        match self {
            MeasureModel::Gaussian { .. } => None,
            MeasureModel::Product { blocks, coord_block } => Some(&blocks[coord_block[i]].component),
        }
    }

    /// Per-coordinate tilted moments. Both model kinds factorize over coordinates.
    pub fn coordinate_moments(&self, theta: &[f64], t: f64, out: &mut [TiltMoments1D]) -> Result<()> {
        self.check_state(theta, t)?;
        match self {
            MeasureModel::Gaussian { .. } => {
                let s = 1.0 + t;
                for (o, &th) in out.iter_mut().zip(theta) {
                    *o = TiltMoments1D {
                        mean: th / s,
                        var: 1.0 / s,
                        log_z: th * th / (2.0 * s) - 0.5 * s.ln(),
                    };
                }
            }
            MeasureModel::Product { blocks, coord_block } => {
                for (i, (o, &th)) in out.iter_mut().zip(theta).enumerate() {
                    *o = blocks[coord_block[i]].component.tilt(th, t).map_err(|e| match e {
                        LoclabError::DivergentTilt { theta, .. } => LoclabError::DivergentTilt { coord: i, theta },
                        e => e,
                    })?;
                }
            }
        }
        Ok(())
    }

    /// Barycenter of the tilted measure, written into `out`.
    pub fn barycenter(&self, theta: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        self.check_state(theta, t)?;
        match self {
            MeasureModel::Gaussian { .. } => {
                let s = 1.0 + t;
                for (o, &th) in out.iter_mut().zip(theta) {
                    *o = th / s;
                }
            }
            MeasureModel::Product { blocks, coord_block } => {
                for (i, (o, &th)) in out.iter_mut().zip(theta).enumerate() {
                    *o = blocks[coord_block[i]]
                        .component
                        .tilt(th, t)
                        .map_err(|e| match e {
                            LoclabError::DivergentTilt { theta, .. } => LoclabError::DivergentTilt { coord: i, theta },
                            e => e,
                        })?
                        .mean;
                }
            }
        }
        Ok(())
    }

    fn check_state(&self, theta: &[f64], t: f64) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(LoclabError::InvalidArgument(format!(
                "tilt has {} coordinates, model has {}",
                theta.len(),
                self.dim()
            )));
        }
        if !(t >= 0.0 && t.is_finite()) || theta.iter().any(|x| !x.is_finite()) {
            return Err(LoclabError::InvalidArgument(format!("non-finite tilt state at t = {t}")));
        }
        Ok(())
    }
}

impl fmt::Display for MeasureModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureModel::Gaussian { dim } => write!(f, "gaussian({dim})"),
            MeasureModel::Product { blocks, .. } => {
                write!(f, "product(")?;
                for (i, b) in blocks.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}*{}", b.label, b.multiplicity)?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Barycenter, covariance and log-partition of a tilted measure.
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    pub a: Vec<f64>,
    pub cov: SymMatrix,
    pub log_z: f64,
}

impl Moments {
    /// Covariance spectrum; diagonal covariances skip the eigensolver.
    pub fn spectrum(&self) -> Result<Spectrum> {
        if self.cov.is_diagonal() {
            let d: Vec<f64> = (0..self.cov.dim()).map(|i| self.cov.get(i, i)).collect();
            Ok(Spectrum::from_diagonal(&d))
        } else {
            jacobi_spectrum(&self.cov, 1e-14)
        }
    }
}

/// Fails with a Lichnerowicz violation when `λ_max > 1/t + tol` for `t > 0`.
pub fn lichnerowicz_guard(t: f64, lambda_max: f64) -> Result<()> {
    if t > 0.0 && lambda_max > 1.0 / t + LICHNEROWICZ_TOL {
        return Err(LoclabError::LichnerowiczViolation { t, lambda_max });
    }
    Ok(())
}

/// Moments of `ρ(x) exp(⟨θ, x⟩ - t|x|²/2)`, normalized.
pub fn tilted_moments(model: &MeasureModel, theta: &[f64], t: f64) -> Result<Moments> {
    let n = model.dim();
    let mut per = vec![TiltMoments1D { mean: 0.0, var: 0.0, log_z: 0.0 }; n];
    model.coordinate_moments(theta, t, &mut per)?;
    let vars: Vec<f64> = per.iter().map(|m| m.var).collect();
    let lambda_max = vars.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    lichnerowicz_guard(t, lambda_max)?;
    Ok(Moments {
        a: per.iter().map(|m| m.mean).collect(),
        cov: SymMatrix::diagonal(&vars),
        log_z: per.iter().map(|m| m.log_z).sum(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoordinateDeviation {
    pub coord: usize,
    pub mean: f64,
    pub var: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsotropyReport {
    pub pass: bool,
    pub tol: f64,
    pub max_mean_error: f64,
    pub max_var_error: f64,
    pub failing: Vec<CoordinateDeviation>,
}

/// Checks that the untilted measure has barycenter 0 and covariance `Id`.
pub fn verify_isotropic(model: &MeasureModel, tol: f64) -> Result<IsotropyReport> {
    if !(tol >= 1e-10) {
        return Err(LoclabError::InvalidArgument(format!("isotropy tolerance {tol} below 1e-10")));
    }
    let n = model.dim();
    let m = tilted_moments(model, &vec![0.0; n], 0.0)?;
    let mut failing = Vec::new();
    let (mut max_mean_error, mut max_var_error) = (0.0f64, 0.0f64);
    for i in 0..n {
        let mean = m.a[i];
        let var = m.cov.get(i, i);
        max_mean_error = max_mean_error.max(mean.abs());
        max_var_error = max_var_error.max((var - 1.0).abs());
        if mean.abs() > tol || (var - 1.0).abs() > tol {
            failing.push(CoordinateDeviation { coord: i, mean, var });
        }
    }
    Ok(IsotropyReport {
        pass: failing.is_empty(),
        tol,
        max_mean_error,
        max_var_error,
        failing,
    })
}

/// For Gaussian moments the spectral-variance bound reduces to `‖A‖_op ≤ 1/t`.
pub fn poincare_gaussian_check(t: f64, moments: &Moments) -> Result<bool> {
    if !(t > 0.0) {
        return Err(LoclabError::InvalidArgument(format!("time must be positive, got {t}")));
    }
    let norm = moments
        .spectrum()?
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, l| m.max(l.abs()));
    Ok(norm <= 1.0 / t + 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dexp(k: usize) -> MeasureModel {
        MeasureModel::product_of("dexp", ComponentKind::TwoSidedExponential { rate: 1.0 }, k).unwrap()
    }

    #[test]
    fn gaussian_untilted_is_isotropic() {
        let m = tilted_moments(&MeasureModel::gaussian(2).unwrap(), &[0.0, 0.0], 0.0).unwrap();
        assert_eq!(m.a, vec![0.0, 0.0]);
        assert_eq!(m.cov, SymMatrix::identity(2));
    }

    #[test]
    fn gaussian_conjugacy() {
        let m = tilted_moments(&MeasureModel::gaussian(2).unwrap(), &[1.0, 0.0], 1.0).unwrap();
        assert_eq!(m.a, vec![0.5, 0.0]);
        assert_eq!(m.cov, SymMatrix::diagonal(&[0.5, 0.5]));
    }

    #[test]
    fn standardized_uniform_product_is_isotropic() {
        let model = MeasureModel::product_of("uniform", ComponentKind::Uniform { a: -1.0, b: 3.0 }, 3).unwrap();
        let m = tilted_moments(&model, &[0.0; 3], 0.0).unwrap();
        for i in 0..3 {
            assert!(m.a[i].abs() < 1e-12);
            assert!((m.cov.get(i, i) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn isotropy_reports() {
        assert!(verify_isotropic(&MeasureModel::gaussian(5).unwrap(), ISOTROPY_TOL).unwrap().pass);
        assert!(verify_isotropic(&dexp(4), ISOTROPY_TOL).unwrap().pass);
        let raw = MeasureModel::product(vec![Block {
            label: "raw".into(),
            component: Arc::new(Component1D::unstandardized(ComponentKind::Uniform { a: 0.0, b: 1.0 }).unwrap()),
            multiplicity: 1,
        }])
        .unwrap();
        let r = verify_isotropic(&raw, ISOTROPY_TOL).unwrap();
        assert!(!r.pass);
        assert!((r.failing[0].mean - 0.5).abs() < 1e-12);
        assert!(verify_isotropic(&raw, 1e-12).is_err());
    }

    #[test]
    fn poincare_gaussian_examples() {
        let g = MeasureModel::gaussian(3).unwrap();
        for t in [1.0, 0.1, 1e-9] {
            let m = tilted_moments(&g, &[0.3, -1.0, 2.0], t).unwrap();
            assert!(poincare_gaussian_check(t, &m).unwrap());
        }
    }

    #[test]
    fn divergent_tilt_names_the_coordinate() {
        let r = tilted_moments(&dexp(3), &[0.0, 0.0, 2.0], 0.0);
        assert!(matches!(r, Err(LoclabError::DivergentTilt { coord: 2, .. })));
    }

    #[test]
    fn lichnerowicz_guard_rejects() {
        assert!(lichnerowicz_guard(2.0, 0.5).is_ok());
        assert!(lichnerowicz_guard(2.0, 0.6).is_err());
        assert!(lichnerowicz_guard(0.0, 50.0).is_ok());
    }

    #[test]
    fn display_round_trips_through_parser() {
        let m = parse_model("product(uniform*4, dexp*4)", None).unwrap();
        assert_eq!(m.to_string(), "product(uniform*4,dexp*4)");
        assert_eq!(m.dim(), 8);
    }
}
