//! Dyadic Fourier multipliers and Littlewood-Paley band projections.
//!
//! The cutoff `χ` equals 1 on `|ξ| <= 1`, vanishes on `|ξ| >= 2` and is
//! smooth in between; the band profile is `ψ̂(ξ) = χ(ξ) - χ(2ξ)`, supported
//! in `1/2 <= |ξ| <= 2`, and `ψ̂_j(ξ) = ψ̂(2^{-j} ξ)`. Sums over consecutive
//! bands telescope, so the lowpass `χ(2^{1-j_min} ξ)` plus the bands
//! `j_min..=L+1` is exactly one at every grid frequency.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{inverse_transform, transform, validate_shape, GridFunction, SpectralFunction};

/// `exp(-1/t)` for `t > 0`, else 0.
fn eta(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Shape of the transition of `χ` between radius 1 and radius 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileShape {
    /// Smooth step in `|ξ|`.
    #[default]
    Linear,
    /// Smooth step in `log2 |ξ|`; same support, different shape.
    Logarithmic,
}

impl ProfileShape {
    /// Radial cutoff `χ(r)`.
    pub fn cutoff(self, r: f64) -> f64 {
        match self {
            ProfileShape::Linear => {
                if r <= 1.0 {
                    1.0
                } else if r >= 2.0 {
                    0.0
                } else {
                    let (a, b) = (eta(2.0 - r), eta(r - 1.0));
                    a / (a + b)
                }
            }
            ProfileShape::Logarithmic => {
                if r <= 1.0 {
                    1.0
                } else if r >= 2.0 {
                    0.0
                } else {
                    let t = r.log2();
                    let (a, b) = (eta(1.0 - t), eta(t));
                    a / (a + b)
                }
            }
        }
    }

    /// Band profile `ψ̂(r) = χ(r) - χ(2r)`.
    pub fn band(self, r: f64) -> f64 {
        self.cutoff(r) - self.cutoff(2.0 * r)
    }

    /// `ψ̂_j(r) = ψ̂(2^{-j} r)`.
    pub fn band_j(self, j: i64, r: f64) -> f64 {
        self.band(r * 2f64.powi(-(j as i32)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Standard,
    /// Multiplier `|2^{-j} ξ|^α ψ̂(2^{-j} ξ)`.
    Modified { alpha: f64 },
    Lowpass,
}

/// Multiplier values over the grid frequencies, in FFT storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct BandProfile {
    pub band: i64,
    pub kind: ProfileKind,
    pub dim: usize,
    pub size: usize,
    pub values: Vec<f64>,
}

/// Euclidean `|ξ|` for every stored frequency.
fn radii(dim: usize, size: usize) -> Vec<f64> {
    let s = SpectralFunction::new(dim, size, vec![Default::default(); size.pow(dim as u32)])
        .expect("shape validated by caller");
    s.frequencies()
        .map(|xi| xi.iter().map(|&k| (k * k) as f64).sum::<f64>().sqrt())
        .collect()
}

impl BandProfile {
    pub fn standard(dim: usize, size: usize, j: i64, shape: ProfileShape) -> Result<Self> {
        validate_shape(dim, size)?;
        let values = radii(dim, size).into_iter().map(|r| shape.band_j(j, r)).collect();
        Ok(Self { band: j, kind: ProfileKind::Standard, dim, size, values })
    }

    pub fn modified(dim: usize, size: usize, j: i64, alpha: f64, shape: ProfileShape) -> Result<Self> {
        validate_shape(dim, size)?;
        let scale = 2f64.powi(-(j as i32));
        let values = radii(dim, size)
            .into_iter()
            .map(|r| if r == 0.0 { 0.0 } else { (scale * r).powf(alpha) * shape.band(scale * r) })
            .collect();
        Ok(Self { band: j, kind: ProfileKind::Modified { alpha }, dim, size, values })
    }

    /// `χ(2^{1-j_min} ξ)`, the complement of the bands `j >= j_min`.
    pub fn lowpass(dim: usize, size: usize, j_min: i64, shape: ProfileShape) -> Result<Self> {
        validate_shape(dim, size)?;
        let scale = 2f64.powi(1 - j_min as i32);
        let values = radii(dim, size).into_iter().map(|r| shape.cutoff(scale * r)).collect();
        Ok(Self { band: j_min, kind: ProfileKind::Lowpass, dim, size, values })
    }
}

/// Lowpass plus standard profiles `j_min..=L+1` for one grid shape.
#[derive(Debug, Clone)]
pub struct FilterBank {
    pub dim: usize,
    pub size: usize,
    pub j_min: i64,
    pub shape: ProfileShape,
    pub lowpass: BandProfile,
    pub bands: Vec<BandProfile>,
}

impl FilterBank {
    pub fn j_max(&self) -> i64 {
        self.j_min + self.bands.len() as i64 - 1
    }

    pub fn band(&self, j: i64) -> Option<&BandProfile> {
        if j < self.j_min {
            return None;
        }
        self.bands.get((j - self.j_min) as usize)
    }

    /// Largest `|lowpass + Σ_j ψ̂_j - 1|` over stored nonzero frequencies.
    pub fn partition_residual(&self) -> f64 {
        let r = radii(self.dim, self.size);
        (0..r.len())
            .filter(|&i| r[i] > 0.0)
            .map(|i| {
                let total: f64 = self.lowpass.values[i] + self.bands.iter().map(|b| b.values[i]).sum::<f64>();
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// CSV rows `kind, j, xi_0[, xi_1], abs_xi, value` for every profile.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["kind".to_string(), "j".to_string()];
        header.extend((0..self.dim).map(|a| format!("xi_{a}")));
        header.extend(["abs_xi".to_string(), "value".to_string()]);
        out.write_record(&header)?;
        let spec = SpectralFunction::new(self.dim, self.size, vec![Default::default(); self.lowpass.values.len()])?;
        let freqs: Vec<Vec<i64>> = spec.frequencies().collect();
        let profiles = std::iter::once(&self.lowpass).chain(&self.bands);
        for p in profiles {
            let kind = match p.kind {
                ProfileKind::Lowpass => "lowpass",
                ProfileKind::Standard => "standard",
                ProfileKind::Modified { .. } => "modified",
            };
            for (xi, v) in freqs.iter().zip(&p.values) {
                let abs = xi.iter().map(|&k| (k * k) as f64).sum::<f64>().sqrt();
                let mut row = vec![kind.to_string(), p.band.to_string()];
                row.extend(xi.iter().map(|k| k.to_string()));
                row.push(abs.to_string());
                row.push(v.to_string());
                out.write_record(&row)?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Profiles for `j = j_min..=L+1` and the matching lowpass.
pub fn build_profiles(dim: usize, log2_size: u32, j_min: i64, shape: ProfileShape) -> Result<FilterBank> {
    let size = 1usize << log2_size;
    validate_shape(dim, size)?;
    if j_min < 0 || j_min > log2_size as i64 {
        return Err(Error::config(format!("j_min {j_min} outside [0, {log2_size}]")));
    }
    let j_max = log2_size as i64 + 1;
    let bands = (j_min..=j_max)
        .map(|j| BandProfile::standard(dim, size, j, shape))
        .collect::<Result<Vec<_>>>()?;
    Ok(FilterBank {
        dim,
        size,
        j_min,
        shape,
        lowpass: BandProfile::lowpass(dim, size, j_min, shape)?,
        bands,
    })
}

fn check_shape(f: &GridFunction, p: &BandProfile) -> Result<()> {
    if f.dim() != p.dim || f.size() != p.size {
        return Err(Error::config(format!(
            "profile shape (n={}, N={}) does not match grid (n={}, N={})",
            p.dim,
            p.size,
            f.dim(),
            f.size()
        )));
    }
    Ok(())
}

/// Apply a multiplier to a precomputed spectrum.
pub fn apply_profile(spectrum: &SpectralFunction, p: &BandProfile) -> Result<GridFunction> {
    inverse_transform(&spectrum.multiplied(&p.values))
}

/// `Δ_j f`: inverse transform of `p(ξ) f̂(ξ)`.
pub fn band_project(f: &GridFunction, p: &BandProfile) -> Result<GridFunction> {
    check_shape(f, p)?;
    apply_profile(&transform(f), p)
}

/// `Δ'_j f` with multiplier `|2^{-j} ξ|^α ψ̂(2^{-j} ξ)`.
pub fn band_project_modified(f: &GridFunction, j: i64, alpha: f64, shape: ProfileShape) -> Result<GridFunction> {
    if !(alpha > 0.0 && alpha < 1.0) {
        log::warn!("modified band operator with alpha = {alpha} outside (0, 1)");
    }
    let p = BandProfile::modified(f.dim(), f.size(), j, alpha, shape)?;
    band_project(f, &p)
}

/// Lowpass part plus every band `Δ_j f`, `j = j_min..=j_max`.
#[derive(Debug, Clone)]
pub struct BandDecomposition {
    pub j_min: i64,
    pub j_max: i64,
    pub bands: Vec<GridFunction>,
    pub lowpass: GridFunction,
}

impl BandDecomposition {
    pub fn band(&self, j: i64) -> Option<&GridFunction> {
        if j < self.j_min {
            return None;
        }
        self.bands.get((j - self.j_min) as usize)
    }

    /// `lowpass + Σ_j Δ_j f`.
    pub fn reconstruct(&self) -> GridFunction {
        let mut acc = self.lowpass.values().to_vec();
        for b in &self.bands {
            acc.iter_mut().zip(b.values()).for_each(|(a, v)| *a += v);
        }
        GridFunction::new(self.lowpass.dim(), self.lowpass.size(), acc).expect("same shape")
    }

    /// `Σ_j ‖Δ_j f‖²` over the torus.
    pub fn band_energy(&self) -> f64 {
        self.bands.iter().map(GridFunction::l2_squared).sum()
    }
}

pub fn decompose(f: &GridFunction, j_min: i64) -> Result<BandDecomposition> {
    let bank = build_profiles(f.dim(), f.log2_size(), j_min, ProfileShape::default())?;
    decompose_with(f, &bank)
}

pub fn decompose_with(f: &GridFunction, bank: &FilterBank) -> Result<BandDecomposition> {
    check_shape(f, &bank.lowpass)?;
    let spectrum = transform(f);
    let bands = bank
        .bands
        .iter()
        .map(|p| apply_profile(&spectrum, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(BandDecomposition {
        j_min: bank.j_min,
        j_max: bank.j_max(),
        bands,
        lowpass: apply_profile(&spectrum, &bank.lowpass)?,
    })
}
