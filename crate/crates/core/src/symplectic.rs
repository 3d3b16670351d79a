//! Linear quadrature maps r → M r and their action on Wigner functions.
//!
//! Two-mode objects use the ordering (x_L, p_L, θ_M, L_M).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{ensure_finite, Error, Result};
use crate::phase_space::{symplectic_form, GaussianState, GridWigner};

/// Tolerance for accepting externally supplied matrices as symplectic.
pub const SYMPLECTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    m: DMatrix<f64>,
}

impl Serialize for SymplecticMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = self.m.row_iter().map(|r| r.iter().cloned().collect()).collect();
        rows.serialize(s)
    }
}

impl SymplecticMatrix {
    /// Accepts `m` if MᵀΩM = Ω to [`SYMPLECTIC_TOL`].
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || !m.nrows().is_multiple_of(2) || m.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: m.nrows().max(2),
                got: m.ncols(),
            });
        }
        let s = Self { m };
        let dev = s.symplectic_defect();
        if dev > SYMPLECTIC_TOL {
            return Err(Error::param("M", format!("not symplectic (defect {dev:e})")));
        }
        Ok(s)
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            m: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn n_modes(&self) -> usize {
        self.m.nrows() / 2
    }

    /// max |MᵀΩM − Ω|.
    pub fn symplectic_defect(&self) -> f64 {
        let om = symplectic_form(self.n_modes());
        (self.m.transpose() * &om * &self.m - om).amax()
    }

    pub fn is_identity(&self) -> bool {
        self.m == DMatrix::identity(self.m.nrows(), self.m.ncols())
    }

    /// M⁻¹ = −Ω Mᵀ Ω, exact up to sign flips.
    pub fn inverse(&self) -> SymplecticMatrix {
        let om = symplectic_form(self.n_modes());
        Self {
            m: -(&om * self.m.transpose() * &om),
        }
    }

    /// `self · other`, i.e. `other` acts first.
    pub fn compose(&self, other: &SymplecticMatrix) -> Result<SymplecticMatrix> {
        if self.m.nrows() != other.m.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.m.nrows(),
                got: other.m.nrows(),
            });
        }
        Ok(Self { m: &self.m * &other.m })
    }
}

/// Beam splitter between the two modes with power transmittance `t_tap`.
pub fn beam_splitter(t_tap: f64) -> Result<SymplecticMatrix> {
    if !(0.0..=1.0).contains(&t_tap) {
        return Err(Error::param("T_tap", format!("must lie in [0, 1], got {t_tap}")));
    }
    let t = t_tap.sqrt();
    let r = (1.0 - t_tap).sqrt();
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        t, 0.0, r, 0.0,
        0.0, t, 0.0, r,
        -r, 0.0, t, 0.0,
        0.0, -r, 0.0, t,
    ]);
    Ok(SymplecticMatrix { m })
}

/// Pulsed optomechanical map: p_L → p_L − χθ, L_M → L_M − χx_L.
pub fn om_interaction(chi: f64) -> Result<SymplecticMatrix> {
    ensure_finite("chi", chi)?;
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, -chi, 0.0,
        0.0, 0.0, 1.0, 0.0,
        -chi, 0.0, 0.0, 1.0,
    ]);
    Ok(SymplecticMatrix { m })
}

/// Rotation [[cos, sin], [−sin, cos]] on one mode.
pub fn phase_rotation(angle: f64, mode_index: usize, n_modes: usize) -> Result<SymplecticMatrix> {
    ensure_finite("angle", angle)?;
    if mode_index >= n_modes {
        return Err(Error::param("mode_index", format!("{mode_index} out of range for {n_modes} modes")));
    }
    let (s, c) = angle.sin_cos();
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let i = 2 * mode_index;
    m[(i, i)] = c;
    m[(i, i + 1)] = s;
    m[(i + 1, i)] = -s;
    m[(i + 1, i + 1)] = c;
    Ok(SymplecticMatrix { m })
}

/// diag(e^r, e^{−r}) on a single mode.
pub fn single_mode_squeeze(r: f64) -> Result<SymplecticMatrix> {
    ensure_finite("r", r)?;
    Ok(SymplecticMatrix {
        m: DMatrix::from_diagonal(&DVector::from_vec(vec![r.exp(), (-r).exp()])),
    })
}

pub fn apply_gaussian(m: &SymplecticMatrix, s: &GaussianState) -> Result<GaussianState> {
    if m.m.nrows() != s.mean().len() {
        return Err(Error::DimensionMismatch {
            expected: s.mean().len(),
            got: m.m.nrows(),
        });
    }
    let mean = &m.m * s.mean();
    let cov = &m.m * s.cov() * m.m.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianState::new(mean, cov)
}

/// Pullback W_out(r) = W_in(M⁻¹r) on the same grid, bilinear with zero
/// extension, then renormalized.
pub fn apply_grid(m: &SymplecticMatrix, w: &GridWigner) -> Result<GridWigner> {
    if m.n_modes() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: m.m.nrows(),
        });
    }
    if m.is_identity() {
        return Ok(w.clone());
    }
    let inv = m.inverse();
    let (a, b, c, d) = (inv.m[(0, 0)], inv.m[(0, 1)], inv.m[(1, 0)], inv.m[(1, 1)]);
    let np = w.p_axis.points;
    let mut values = vec![0.0; w.x_axis.points * np];
    values.par_chunks_mut(np).enumerate().for_each(|(ix, row)| {
        let x = w.x_axis.value(ix);
        for (ip, v) in row.iter_mut().enumerate() {
            let p = w.p_axis.value(ip);
            *v = w.interpolate(a * x + b * p, c * x + d * p);
        }
    });
    let before = w.integral();
    let out = GridWigner::new(w.x_axis, w.p_axis, values, format!("{} | symplectic pullback", w.provenance))?;
    let after = out.integral();
    if (before - after).abs() > 1e-6 * before.abs().max(1e-300) {
        return Err(Error::Coverage(format!(
            "pullback lost {:.3e} of the norm off the grid",
            (before - after) / before
        )));
    }
    if w.is_normalized() {
        out.normalized()
    } else {
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{gaussian_to_grid, make_fock_wigner, make_squeezed, make_vacuum, Axis};
    use std::f64::consts::PI;

    #[test]
    fn constructors_are_symplectic() {
        for m in [
            beam_splitter(0.909).unwrap(),
            beam_splitter(0.0).unwrap(),
            om_interaction(1.0).unwrap(),
            om_interaction(-3.7).unwrap(),
            phase_rotation(0.3, 1, 2).unwrap(),
        ] {
            assert!(m.symplectic_defect() < 1e-12);
            assert!((m.matrix().determinant() - 1.0).abs() < 1e-12);
        }
        assert_eq!(om_interaction(1.0).unwrap().symplectic_defect(), 0.0);
    }

    #[test]
    fn special_cases() {
        assert!(beam_splitter(1.0).unwrap().is_identity());
        assert!(om_interaction(0.0).unwrap().is_identity());
        assert!(beam_splitter(1.2).is_err());
        assert!(phase_rotation(0.1, 2, 2).is_err());
        let bs = beam_splitter(0.5).unwrap();
        let v = bs.matrix() * bs.matrix() * DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        assert!((v - DVector::from_vec(vec![0.0, 0.0, -1.0, 0.0])).amax() < 1e-15);
        let inv = om_interaction(1.3).unwrap().inverse();
        assert_eq!(&inv, &om_interaction(-1.3).unwrap());
        let full = phase_rotation(2.0 * PI, 0, 1).unwrap();
        assert!((full.matrix() - DMatrix::identity(2, 2)).amax() < 1e-15);
        let q = phase_rotation(PI / 2.0, 0, 1).unwrap();
        let r = q.matrix() * DVector::from_vec(vec![0.7, 0.2]);
        assert!((r[0] - 0.2).abs() < 1e-15 && (r[1] + 0.7).abs() < 1e-15);
    }

    #[test]
    fn gaussian_action() {
        let vv = make_vacuum().product(&make_vacuum());
        let out = apply_gaussian(&om_interaction(1.0).unwrap(), &vv).unwrap();
        let c = out.cov();
        assert_eq!(c[(1, 1)], 2.0);
        assert_eq!(c[(3, 3)], 2.0);
        assert_eq!(c[(1, 2)], -1.0);
        assert_eq!(c[(3, 0)], -1.0);
        let sq = make_squeezed(0.4).unwrap().product(&make_squeezed(-0.9).unwrap());
        let bs = apply_gaussian(&beam_splitter(0.5).unwrap(), &sq).unwrap();
        assert!((bs.cov().trace() - sq.cov().trace()).abs() < 1e-12);
    }

    #[test]
    fn grid_pullbacks() {
        let f1 = make_fock_wigner(1).unwrap();
        assert_eq!(apply_grid(&SymplecticMatrix::identity(1), &f1).unwrap(), f1);
        let rot = apply_grid(&phase_rotation(PI / 2.0, 0, 1).unwrap(), &f1).unwrap();
        assert!(rot.linf_distance(&f1).unwrap() < 1e-9);
        let ax = Axis::default_axis();
        let vac = gaussian_to_grid(&make_vacuum(), ax, ax).unwrap();
        let sq = apply_grid(&single_mode_squeeze(0.5).unwrap(), &vac).unwrap();
        let expect = gaussian_to_grid(&make_squeezed(0.5).unwrap(), ax, ax).unwrap();
        assert!(sq.linf_distance(&expect).unwrap() < 1e-4);
    }

    #[test]
    fn pullback_detects_clipping() {
        let ax = Axis::symmetric(6.0, 121).unwrap();
        let vac = gaussian_to_grid(&make_vacuum(), ax, ax).unwrap();
        assert!(matches!(
            apply_grid(&single_mode_squeeze(1.0).unwrap(), &vac),
            Err(Error::Coverage(_))
        ));
    }
}
