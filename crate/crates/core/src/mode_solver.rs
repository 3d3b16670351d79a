//! Torsional modes of a clamped beam: closed forms for the uniform beam and a
//! finite-difference Webster solver for a sampled cross-section profile.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::quadrature::simpson;

/// Number of samples stored for analytic modes.
pub const ANALYTIC_SAMPLES: usize = 1025;
/// Smallest profile grid the Webster solver accepts.
pub const MIN_PROFILE_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Closed form behind a mode's samples, when there is one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeShape {
    Cosine { k: f64 },
    Sine { k: f64 },
    Numeric,
}

#[derive(Debug, Clone)]
pub struct TorsionalMode {
    pub mode_index: usize,
    pub parity: Parity,
    pub wavevector_kt: f64,
    pub frequency_omega: f64,
    pub length: f64,
    pub z: Vec<f64>,
    pub theta: Vec<f64>,
    pub shape: ModeShape,
}

impl TorsionalMode {
    pub fn spacing(&self) -> f64 {
        self.z[1] - self.z[0]
    }

    /// θ at an arbitrary z, exact for analytic modes, linear otherwise.
    pub fn eval(&self, z: f64) -> f64 {
        match self.shape {
            ModeShape::Cosine { k } => (k * z).cos(),
            ModeShape::Sine { k } => (k * z).sin(),
            ModeShape::Numeric => {
                let h = self.spacing();
                let t = ((z - self.z[0]) / h).clamp(0.0, (self.z.len() - 1) as f64);
                let i = (t.floor() as usize).min(self.z.len() - 2);
                let f = t - i as f64;
                self.theta[i] * (1.0 - f) + self.theta[i + 1] * f
            }
        }
    }

    /// Largest |θ| at the two ends.
    pub fn boundary_residual(&self) -> f64 {
        let h = 0.5 * self.length;
        self.eval(-h).abs().max(self.eval(h).abs())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "z,theta")?;
        for (z, t) in self.z.iter().zip(&self.theta) {
            writeln!(w, "{z:.16e},{t:.16e}")?;
        }
        Ok(())
    }
}

fn uniform_z(length: f64, points: usize) -> Vec<f64> {
    let h = length / (points - 1) as f64;
    (0..points).map(|i| -0.5 * length + i as f64 * h).collect()
}

fn analytic_mode(length: f64, c_t: f64, index: usize, parity: Parity, k: f64) -> TorsionalMode {
    let z = uniform_z(length, ANALYTIC_SAMPLES);
    let (shape, theta): (ModeShape, Vec<f64>) = match parity {
        Parity::Even => (ModeShape::Cosine { k }, z.iter().map(|z| (k * z).cos()).collect()),
        Parity::Odd => (ModeShape::Sine { k }, z.iter().map(|z| (k * z).sin()).collect()),
    };
    TorsionalMode {
        mode_index: index,
        parity,
        wavevector_kt: k,
        frequency_omega: c_t * k,
        length,
        z,
        theta,
        shape,
    }
}

/// Clamped uniform-beam mode: cos(2π(n+½)z/L) or sin(2πnz/L).
pub fn uniform_beam_mode(length: f64, c_t: f64, n: usize, parity: Parity) -> Result<TorsionalMode> {
    ensure_positive("L", length)?;
    ensure_positive("c_t", c_t)?;
    let tau = 2.0 * std::f64::consts::PI;
    let k = match parity {
        Parity::Even => tau * (n as f64 + 0.5) / length,
        Parity::Odd => {
            if n == 0 {
                return Err(Error::NoSuchMode("odd mode with n = 0 vanishes identically".into()));
            }
            tau * n as f64 / length
        }
    };
    Ok(analytic_mode(length, c_t, n, parity, k))
}

/// cos(k_t z) on [−L/2, L/2] for a wavevector not fixed by the end conditions.
/// This is the mode entering the moment of inertia when k_t comes from Ω/c_t.
pub fn cosine_mode(length: f64, k_t: f64, c_t: f64) -> Result<TorsionalMode> {
    ensure_positive("L", length)?;
    ensure_positive("c_t", c_t)?;
    if !(k_t.is_finite() && k_t >= 0.0) {
        return Err(Error::param("k_t", "must be non-negative"));
    }
    Ok(analytic_mode(length, c_t, 0, Parity::Even, k_t))
}

/// Sampled polar moment of area I_p(z) on a uniform grid.
#[derive(Debug, Clone)]
pub struct CrossSectionProfile {
    pub grid_z: Vec<f64>,
    pub polar_moment_ip: Vec<f64>,
}

impl CrossSectionProfile {
    pub fn new(grid_z: Vec<f64>, polar_moment_ip: Vec<f64>) -> Result<Self> {
        if grid_z.len() != polar_moment_ip.len() {
            return Err(Error::InvalidProfile(format!(
                "{} z samples but {} I_p samples",
                grid_z.len(),
                polar_moment_ip.len()
            )));
        }
        if grid_z.len() < 3 {
            return Err(Error::InvalidProfile("need at least three samples".into()));
        }
        if let Some((i, v)) = polar_moment_ip.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidProfile(format!("I_p[{i}] = {v} is not positive")));
        }
        let h = grid_z[1] - grid_z[0];
        if !(h > 0.0) {
            return Err(Error::InvalidProfile("grid must be strictly increasing".into()));
        }
        let span = grid_z[grid_z.len() - 1] - grid_z[0];
        for (i, w) in grid_z.windows(2).enumerate() {
            if (w[1] - w[0] - h).abs() > 1e-9 * span {
                return Err(Error::InvalidProfile(format!("grid spacing is not uniform at index {i}")));
            }
        }
        Ok(Self { grid_z, polar_moment_ip })
    }

    pub fn uniform(length: f64, ip: f64, points: usize) -> Result<Self> {
        ensure_positive("L", length)?;
        let z = uniform_z(length, points.max(3));
        let n = z.len();
        Self::new(z, vec![ip; n])
    }

    pub fn length(&self) -> f64 {
        self.grid_z[self.grid_z.len() - 1] - self.grid_z[0]
    }

    /// Two-column CSV `z,I_p`; a non-numeric first line is taken as a header.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut z = Vec::new();
        let mut ip = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (a, b) = match (cols.next(), cols.next()) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::Parse(format!("line {}: expected two columns", lineno + 1))),
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    z.push(a);
                    ip.push(b);
                }
                _ if z.is_empty() && lineno == 0 => continue,
                _ => return Err(Error::Parse(format!("line {}: not a number pair", lineno + 1))),
            }
        }
        Self::new(z, ip)
    }
}

/// Lowest `count` clamped modes of (I_p θ')' + k² I_p θ = 0.
///
/// The operator is discretized with central differences, I_p taken at the
/// half nodes, and the generalized problem symmetrized by the diagonal mass
/// matrix before a dense eigensolve.
pub fn webster_eigenmodes(profile: &CrossSectionProfile, c_t: f64, count: usize) -> Result<Vec<TorsionalMode>> {
    ensure_positive("c_t", c_t)?;
    let n = profile.grid_z.len();
    if n < MIN_PROFILE_POINTS {
        return Err(Error::InvalidProfile(format!(
            "grid has {n} points, need at least {MIN_PROFILE_POINTS}"
        )));
    }
    let interior = n - 2;
    if count == 0 || count > interior {
        return Err(Error::param("count", format!("must be in 1..={interior}")));
    }
    let h = profile.grid_z[1] - profile.grid_z[0];
    let ip = &profile.polar_moment_ip;
    let half = |i: usize| 0.5 * (ip[i] + ip[i + 1]);
    let scale: Vec<f64> = (1..n - 1).map(|i| 1.0 / ip[i].sqrt()).collect();

    let mut a = DMatrix::<f64>::zeros(interior, interior);
    for r in 0..interior {
        let i = r + 1;
        a[(r, r)] = (half(i - 1) + half(i)) / (h * h) * scale[r] * scale[r];
        if r + 1 < interior {
            let off = -half(i) / (h * h) * scale[r] * scale[r + 1];
            a[(r, r + 1)] = off;
            a[(r + 1, r)] = off;
        }
    }
    let eig = SymmetricEigen::try_new(a, 1e-14, 0)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..interior).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let length = profile.length();
    let symmetric = (0..n).all(|i| (ip[i] - ip[n - 1 - i]).abs() <= 1e-12 * ip[i]);
    let mut modes = Vec::with_capacity(count);
    for (idx, &col) in order.iter().take(count).enumerate() {
        let lambda = eig.eigenvalues[col];
        if !(lambda > 0.0) {
            return Err(Error::Numerical(format!("non-positive eigenvalue {lambda}")));
        }
        let mut theta = Vec::with_capacity(n);
        theta.push(0.0);
        theta.extend(scale.iter().take(interior).enumerate().map(|(r, s)| eig.eigenvectors[(r, col)] * s));
        theta.push(0.0);
        let peak = theta.iter().cloned().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        theta.iter_mut().for_each(|v| *v /= peak);

        let mut even = 0.0;
        let mut odd = 0.0;
        for i in 0..n {
            let j = n - 1 - i;
            even += (theta[i] + theta[j]).powi(2);
            odd += (theta[i] - theta[j]).powi(2);
        }
        let parity = if even >= odd { Parity::Even } else { Parity::Odd };
        if symmetric {
            // The eigensolver leaves roundoff-level parity mixing; project it out.
            let sign = if parity == Parity::Even { 1.0 } else { -1.0 };
            let reflected: Vec<f64> = theta.iter().rev().cloned().collect();
            for (t, r) in theta.iter_mut().zip(&reflected) {
                *t = 0.5 * (*t + sign * r);
            }
            let peak = theta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            theta.iter_mut().for_each(|v| *v /= peak);
        }
        let k = lambda.sqrt();
        modes.push(TorsionalMode {
            mode_index: idx,
            parity,
            wavevector_kt: k,
            frequency_omega: c_t * k,
            length,
            z: profile.grid_z.clone(),
            theta,
            shape: ModeShape::Numeric,
        });
    }
    Ok(modes)
}

/// ∫θ(z)² dz over the beam, closed form for analytic modes.
pub fn mode_square_integral(mode: &TorsionalMode) -> f64 {
    let l = mode.length;
    let sym = |k: f64| {
        if k * l == 0.0 {
            0.0
        } else {
            (k * l).sin() / (2.0 * k)
        }
    };
    match mode.shape {
        ModeShape::Cosine { k } => 0.5 * l + sym(k),
        ModeShape::Sine { k } => 0.5 * l - sym(k),
        ModeShape::Numeric => mode_square_integral_sampled(mode),
    }
}

/// Composite Simpson on the stored samples.
pub fn mode_square_integral_sampled(mode: &TorsionalMode) -> f64 {
    let sq: Vec<f64> = mode.theta.iter().map(|t| t * t).collect();
    simpson(&sq, mode.spacing())
}
