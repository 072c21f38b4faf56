//! Periodic grid functions on the torus `[0,1)^n`, their discrete Fourier
//! pair, axis-parallel cubes and cube-restricted lattice sums.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest supported `log2(N)`.
pub const MIN_LOG2_SIZE: u32 = 3;

/// Minimum number of lattice points per cube edge in enumerated families.
pub const MIN_POINTS_PER_EDGE: u32 = 8;

/// Real samples of a periodic function at `x_i = i / N`, `i ∈ {0..N-1}^n`.
///
/// Values are stored row-major: for `n = 2` the flat index is `i0 * N + i1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dim: usize,
    size: usize,
    values: Vec<f64>,
}

/// Check `dim ∈ {1,2}` and `size = 2^L` with `L >= 3`; returns `L`.
pub fn validate_shape(dim: usize, size: usize) -> Result<u32> {
    if dim != 1 && dim != 2 {
        return Err(Error::config(format!("dimension must be 1 or 2, got {dim}")));
    }
    if !size.is_power_of_two() {
        return Err(Error::config(format!("grid size {size} is not a power of two")));
    }
    let log2 = size.trailing_zeros();
    if log2 < MIN_LOG2_SIZE {
        return Err(Error::config(format!(
            "grid size {size} below minimum {}",
            1usize << MIN_LOG2_SIZE
        )));
    }
    Ok(log2)
}

impl GridFunction {
    pub fn new(dim: usize, size: usize, values: Vec<f64>) -> Result<Self> {
        validate_shape(dim, size)?;
        let expected = size.pow(dim as u32);
        if values.len() != expected {
            return Err(Error::config(format!(
                "expected {expected} values for n={dim}, N={size}, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::config(format!("non-finite value at flat index {i}")));
        }
        Ok(Self { dim, size, values })
    }

    /// Sample `f` at every lattice position.
    pub fn from_fn(dim: usize, size: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        validate_shape(dim, size)?;
        let h = 1.0 / size as f64;
        let mut pos = vec![0.0; dim];
        let values = (0..size.pow(dim as u32))
            .map(|flat| {
                let mut rem = flat;
                for a in (0..dim).rev() {
                    pos[a] = (rem % size) as f64 * h;
                    rem /= size;
                }
                f(&pos)
            })
            .collect();
        Self::new(dim, size, values)
    }

    pub fn constant(dim: usize, size: usize, c: f64) -> Result<Self> {
        Self::new(dim, size, vec![c; size.pow(dim as u32)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn log2_size(&self) -> u32 {
        self.size.trailing_zeros()
    }

    /// Lattice spacing `h = 1/N`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.size as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at an unwrapped integer lattice coordinate (periodic).
    pub fn at(&self, coord: &[i64]) -> f64 {
        let n = self.size as i64;
        let flat = coord
            .iter()
            .fold(0usize, |acc, &c| acc * self.size + c.rem_euclid(n) as usize);
        self.values[flat]
    }

    /// Cyclic shift: `g(i) = f(i - offset)`.
    pub fn shifted(&self, offset: &[i64]) -> Self {
        assert_eq!(offset.len(), self.dim);
        let n = self.size;
        let mut values = vec![0.0; self.values.len()];
        let mut coord = vec![0i64; self.dim];
        for (flat, v) in values.iter_mut().enumerate() {
            let mut rem = flat;
            for a in (0..self.dim).rev() {
                coord[a] = (rem % n) as i64 - offset[a];
                rem /= n;
            }
            *v = self.at(&coord);
        }
        Self { dim: self.dim, size: self.size, values }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            size: self.size,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Squared discrete L² norm over the whole torus, `h^n Σ f²`.
    pub fn l2_squared(&self) -> f64 {
        self.spacing().powi(self.dim as i32) * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn same_shape(&self, other: &GridFunction) -> bool {
        self.dim == other.dim && self.size == other.size
    }

    /// Write the plain-text record: header line `n N`, then row-major values
    /// (one line per row for `n = 2`, one value per line for `n = 1`).
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.dim, self.size)?;
        match self.dim {
            1 => {
                for v in &self.values {
                    writeln!(w, "{v:e}")?;
                }
            }
            _ => {
                for row in self.values.chunks(self.size) {
                    let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
                    writeln!(w, "{}", line.join(" "))?;
                }
            }
        }
        Ok(())
    }

    /// Parse the plain-text record written by [`GridFunction::write_text`].
    /// Blank lines and lines starting with `#` are ignored.
    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut values = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: lineno + 1, msg };
            if header.is_none() {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 2 {
                    return Err(parse_err("header must be `n N`".into()));
                }
                let dim = toks[0].parse().map_err(|e| parse_err(format!("bad n: {e}")))?;
                let size = toks[1].parse().map_err(|e| parse_err(format!("bad N: {e}")))?;
                header = Some((dim, size));
                continue;
            }
            for tok in line.split_whitespace() {
                values.push(
                    tok.parse::<f64>()
                        .map_err(|e| parse_err(format!("bad value `{tok}`: {e}")))?,
                );
            }
        }
        let (dim, size) = header.ok_or_else(|| Error::Parse { line: 0, msg: "empty input".into() })?;
        Self::new(dim, size, values)
    }
}

/// Fourier coefficients `f̂(ξ) = h^n Σ_x f(x) e^{-2πi ξ·x}` stored in FFT
/// order: along each axis index `i` carries frequency `i` for `i < N/2` and
/// `i - N` otherwise, so frequencies span `{-N/2, …, N/2-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    dim: usize,
    size: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralFunction {
    pub fn new(dim: usize, size: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        validate_shape(dim, size)?;
        if coeffs.len() != size.pow(dim as u32) {
            return Err(Error::config("coefficient count does not match shape"));
        }
        Ok(Self { dim, size, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at a signed frequency (taken modulo N per axis).
    pub fn coeff(&self, freq: &[i64]) -> Complex64 {
        self.coeffs[flat_index_of_frequency(self.size, freq)]
    }

    /// Signed frequency vector for each flat index, in storage order.
    pub fn frequencies(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.coeffs.len()).map(move |flat| frequency_of_flat_index(self.dim, self.size, flat))
    }

    /// Multiply pointwise by a real multiplier given in storage order.
    pub fn multiplied(&self, multiplier: &[f64]) -> Self {
        assert_eq!(multiplier.len(), self.coeffs.len());
        Self {
            dim: self.dim,
            size: self.size,
            coeffs: self.coeffs.iter().zip(multiplier).map(|(c, m)| c * m).collect(),
        }
    }

    /// `Σ |f̂(ξ)|²`, equal to `h^n Σ |f|²` by Parseval.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Signed frequency of an FFT-order index along one axis.
pub fn signed_frequency(size: usize, index: usize) -> i64 {
    if index < size / 2 {
        index as i64
    } else {
        index as i64 - size as i64
    }
}

pub fn frequency_of_flat_index(dim: usize, size: usize, flat: usize) -> Vec<i64> {
    let mut freq = vec![0i64; dim];
    let mut rem = flat;
    for a in (0..dim).rev() {
        freq[a] = signed_frequency(size, rem % size);
        rem /= size;
    }
    freq
}

pub fn flat_index_of_frequency(size: usize, freq: &[i64]) -> usize {
    let n = size as i64;
    freq.iter().fold(0usize, |acc, &k| acc * size + k.rem_euclid(n) as usize)
}

fn fft_in_place(dim: usize, size: usize, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
    match dim {
        1 => fft.process(data),
        _ => {
            // rows (axis 1 contiguous)
            fft.process(data);
            // columns
            let mut column = vec![Complex64::new(0.0, 0.0); size];
            for c in 0..size {
                for r in 0..size {
                    column[r] = data[r * size + c];
                }
                fft.process(&mut column);
                for r in 0..size {
                    data[r * size + c] = column[r];
                }
            }
        }
    }
}

/// Forward transform with the `h^n` normalization.
pub fn transform(f: &GridFunction) -> SpectralFunction {
    let (dim, size) = (f.dim, f.size);
    let fft = FftPlanner::new().plan_fft_forward(size);
    let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(dim, size, &mut data, &fft);
    let scale = (size as f64).powi(-(dim as i32));
    data.iter_mut().for_each(|c| *c *= scale);
    SpectralFunction { dim, size, coeffs: data }
}

/// Inverse transform returning complex samples `Σ_ξ f̂(ξ) e^{2πi ξ·x}`.
pub fn inverse_transform_complex(s: &SpectralFunction) -> Vec<Complex64> {
    let fft = FftPlanner::new().plan_fft_inverse(s.size);
    let mut data = s.coeffs.clone();
    fft_in_place(s.dim, s.size, &mut data, &fft);
    data
}

/// Inverse transform to a real grid function. Fails if the imaginary
/// residue exceeds `1e-12` relative to the largest real sample (or absolute
/// `1e-12` for tiny outputs).
pub fn inverse_transform(s: &SpectralFunction) -> Result<GridFunction> {
    let data = inverse_transform_complex(s);
    let max_re = data.iter().fold(0.0f64, |m, c| m.max(c.re.abs()));
    let max_im = data.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
    if max_im > 1e-12 * max_re.max(1.0) {
        return Err(Error::Invariant(format!(
            "inverse transform is not real: imaginary residue {max_im:e}"
        )));
    }
    GridFunction::new(s.dim, s.size, data.into_iter().map(|c| c.re).collect())
}

/// How lattice points on a cube's upper faces are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// `[corner, corner + edge)` per axis. Dyadic children partition the
    /// lattice points of their parent exactly.
    #[default]
    HalfOpen,
    /// `[corner, corner + edge]` per axis.
    Closed,
}

/// Axis-parallel cube `corner + [0, edge]^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub corner: Vec<f64>,
    pub edge: f64,
}

impl Cube {
    pub fn new(corner: Vec<f64>, edge: f64) -> Result<Self> {
        if !(edge > 0.0 && edge.is_finite()) {
            return Err(Error::config(format!("cube edge must be positive, got {edge}")));
        }
        if corner.is_empty() || corner.iter().any(|c| !c.is_finite()) {
            return Err(Error::config("cube corner must be a finite non-empty vector"));
        }
        Ok(Self { corner, edge })
    }

    /// `[0,1]^n`.
    pub fn unit(dim: usize) -> Self {
        Self { corner: vec![0.0; dim], edge: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.corner.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.corner.iter().map(|c| c + 0.5 * self.edge).collect()
    }

    /// `|I| = l(I)^n`.
    pub fn volume(&self) -> f64 {
        self.edge.powi(self.dim() as i32)
    }

    /// Same center, edge `m * l`.
    pub fn dilate(&self, m: f64) -> Cube {
        let half = 0.5 * self.edge;
        let new_half = 0.5 * m * self.edge;
        Cube {
            corner: self.corner.iter().map(|c| c + half - new_half).collect(),
            edge: m * self.edge,
        }
    }

    pub fn upper(&self, axis: usize) -> f64 {
        self.corner[axis] + self.edge
    }

    /// Closed membership.
    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .enumerate()
            .all(|(a, &x)| self.corner[a] <= x && x <= self.upper(a))
    }

    /// Closed sets intersect.
    pub fn intersects(&self, other: &Cube) -> bool {
        (0..self.dim()).all(|a| self.corner[a] <= other.upper(a) && other.corner[a] <= self.upper(a))
    }

    pub fn is_subset_of(&self, other: &Cube) -> bool {
        (0..self.dim()).all(|a| other.corner[a] <= self.corner[a] && self.upper(a) <= other.upper(a))
    }

    /// Open interiors are disjoint.
    pub fn interiors_disjoint(&self, other: &Cube) -> bool {
        (0..self.dim()).any(|a| self.upper(a) <= other.corner[a] || other.upper(a) <= self.corner[a])
    }

    /// `k` when `edge = 2^{-k}` exactly.
    pub fn dyadic_level(&self) -> Option<u32> {
        let k = -self.edge.log2();
        (k >= 0.0 && k.fract() == 0.0 && 2f64.powi(-(k as i32)) == self.edge).then_some(k as u32)
    }

    /// Smallest integer `j` with `j >= -log2 l(I)`.
    pub fn band_floor(&self) -> i64 {
        (-self.edge.log2()).ceil() as i64
    }
}

impl fmt::Display for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .corner
            .iter()
            .map(|c| format!("[{c}, {}]", c + self.edge))
            .collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// Block of unwrapped lattice coordinates covered by a cube.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBlock {
    pub start: Vec<i64>,
    pub counts: Vec<usize>,
}

impl LatticeBlock {
    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Local multi-index of local flat index `p` (row-major).
    pub fn local_coord(&self, p: usize, out: &mut [i64]) {
        let mut rem = p;
        for a in (0..self.counts.len()).rev() {
            out[a] = (rem % self.counts[a]) as i64;
            rem /= self.counts[a];
        }
    }
}

/// Lattice points `i / N` (with periodic images) lying in `cube`.
pub fn lattice_block(size: usize, cube: &Cube, boundary: Boundary) -> Option<LatticeBlock> {
    let n = size as f64;
    let mut start = Vec::with_capacity(cube.dim());
    let mut counts = Vec::with_capacity(cube.dim());
    for a in 0..cube.dim() {
        let lo = (cube.corner[a] * n).ceil();
        let hi = cube.upper(a) * n;
        let count = match boundary {
            Boundary::HalfOpen => hi.ceil() - lo,
            Boundary::Closed => hi.floor() - lo + 1.0,
        };
        if count < 1.0 {
            return None;
        }
        start.push(lo as i64);
        counts.push(count as usize);
    }
    Some(LatticeBlock { start, counts })
}

/// Values of `f` on the block, local row-major order.
pub fn gather(f: &GridFunction, block: &LatticeBlock) -> Vec<f64> {
    let mut local = vec![0i64; block.counts.len()];
    let mut global = vec![0i64; block.counts.len()];
    (0..block.len())
        .map(|p| {
            block.local_coord(p, &mut local);
            for a in 0..local.len() {
                global[a] = block.start[a] + local[a];
            }
            f.at(&global)
        })
        .collect()
}

fn block_or_err(f: &GridFunction, cube: &Cube, boundary: Boundary) -> Result<LatticeBlock> {
    if cube.dim() != f.dim() {
        return Err(Error::config("cube and grid dimensions differ"));
    }
    lattice_block(f.size(), cube, boundary).ok_or_else(|| Error::DegenerateCube(cube.to_string()))
}

/// Mean of `f` over the lattice points in `cube` (half-open rule).
pub fn cube_mean(f: &GridFunction, cube: &Cube) -> Result<f64> {
    cube_mean_with(f, cube, Boundary::HalfOpen)
}

pub fn cube_mean_with(f: &GridFunction, cube: &Cube, boundary: Boundary) -> Result<f64> {
    let block = block_or_err(f, cube, boundary)?;
    let vals = gather(f, &block);
    Ok(vals.iter().sum::<f64>() / vals.len() as f64)
}

/// Squared discrete `L²(I)` norm, `h^n Σ_{x_i ∈ I} f(x_i)²` (half-open rule).
pub fn l2_on_cube(f: &GridFunction, cube: &Cube) -> Result<f64> {
    l2_on_cube_with(f, cube, Boundary::HalfOpen)
}

pub fn l2_on_cube_with(f: &GridFunction, cube: &Cube, boundary: Boundary) -> Result<f64> {
    let block = block_or_err(f, cube, boundary)?;
    let sum: f64 = gather(f, &block).iter().map(|v| v * v).sum();
    Ok(f.spacing().powi(f.dim() as i32) * sum)
}

/// The `2^{kn}` dyadic subcubes of level `k` inside `cube`, row-major.
pub fn dyadic_children(cube: &Cube, k: u32) -> Vec<Cube> {
    let per_axis = 1usize << k;
    let edge = cube.edge / per_axis as f64;
    let dim = cube.dim();
    (0..per_axis.pow(dim as u32))
        .map(|flat| {
            let mut corner = vec![0.0; dim];
            let mut rem = flat;
            for a in (0..dim).rev() {
                corner[a] = cube.corner[a] + (rem % per_axis) as f64 * edge;
                rem /= per_axis;
            }
            Cube { corner, edge }
        })
        .collect()
}

/// Grid-aligned dyadic cubes of `[0,1)^n` of levels `0..=level_max`, and if
/// `shifted`, the same family translated by half an edge along every axis.
pub fn enumerate_cubes(dim: usize, log2_size: u32, level_max: u32, shifted: bool) -> Result<Vec<Cube>> {
    validate_shape(dim, 1usize << log2_size)?;
    let deepest = log2_size - MIN_LOG2_SIZE;
    if level_max > deepest {
        return Err(Error::config(format!(
            "level_max {level_max} leaves fewer than {MIN_POINTS_PER_EDGE} points per edge at N = 2^{log2_size} (max {deepest})"
        )));
    }
    let unit = Cube::unit(dim);
    let mut cubes: Vec<Cube> = (0..=level_max).flat_map(|k| dyadic_children(&unit, k)).collect();
    if shifted {
        let extra: Vec<Cube> = cubes
            .iter()
            .map(|c| Cube {
                corner: c.corner.iter().map(|x| x + 0.5 * c.edge).collect(),
                edge: c.edge,
            })
            .collect();
        cubes.extend(extra);
    }
    Ok(cubes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn naive_dft(f: &GridFunction) -> Vec<Complex64> {
        let (dim, n) = (f.dim(), f.size());
        let total = n.pow(dim as u32);
        let h = 1.0 / n as f64;
        (0..total)
            .map(|kf| {
                let xi = frequency_of_flat_index(dim, n, kf);
                let mut acc = Complex64::new(0.0, 0.0);
                for xf in 0..total {
                    let mut rem = xf;
                    let mut phase = 0.0;
                    for a in (0..dim).rev() {
                        let i = (rem % n) as f64;
                        rem /= n;
                        phase += xi[a] as f64 * i * h;
                    }
                    acc += f.values()[xf] * Complex64::from_polar(1.0, -2.0 * PI * phase);
                }
                acc * h.powi(dim as i32)
            })
            .collect()
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(GridFunction::constant(1, 12, 0.0), Err(Error::Config(_))));
        assert!(matches!(GridFunction::constant(1, 4, 0.0), Err(Error::Config(_))));
        assert!(matches!(GridFunction::constant(3, 8, 0.0), Err(Error::Config(_))));
        assert!(GridFunction::new(1, 8, vec![f64::NAN; 8]).is_err());
    }

    #[test]
    fn constant_has_only_zero_frequency() {
        let f = GridFunction::constant(1, 8, 1.0).unwrap();
        let s = transform(&f);
        assert_abs_diff_eq!(s.coeff(&[0]).re, 1.0, epsilon = 1e-15);
        for xi in 1..8 {
            assert!(s.coeff(&[xi]).norm() < 1e-15);
        }
    }

    #[test]
    fn single_harmonic_spectrum() {
        let f = GridFunction::from_fn(1, 16, |x| (2.0 * PI * 3.0 * x[0]).cos()).unwrap();
        let s = transform(&f);
        for xi in -8..8i64 {
            let expect = if xi.abs() == 3 { 0.5 } else { 0.0 };
            assert_abs_diff_eq!(s.coeff(&[xi]).re, expect, epsilon = 1e-14);
            assert_abs_diff_eq!(s.coeff(&[xi]).im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn fft_matches_naive_dft_and_parseval_2d() {
        let vals: Vec<f64> = (0..64).map(|i| ((i * 37 % 17) as f64 - 8.0) * 0.3).collect();
        let f = GridFunction::new(2, 8, vals).unwrap();
        let fast = transform(&f);
        let slow = naive_dft(&f);
        for (a, b) in fast.coeffs().iter().zip(&slow) {
            assert!((a - b).norm() < 1e-13);
        }
        let lhs = f.l2_squared();
        let rhs: f64 = slow.iter().map(|c| c.norm_sqr()).sum();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs);
        assert!((fast.energy() - lhs).abs() <= 1e-12 * lhs);
    }

    #[test]
    fn frequencies_cover_signed_range() {
        let f = GridFunction::constant(1, 8, 0.0).unwrap();
        let s = transform(&f);
        let freqs: Vec<i64> = s.frequencies().map(|v| v[0]).collect();
        assert_eq!(freqs, vec![0, 1, 2, 3, -4, -3, -2, -1]);
    }

    #[test]
    fn cube_mean_examples() {
        let ramp = GridFunction::from_fn(1, 8, |x| x[0]).unwrap();
        let half = Cube::new(vec![0.0], 0.5).unwrap();
        // closed: {0, 1/8, ..., 4/8}
        assert_abs_diff_eq!(cube_mean_with(&ramp, &half, Boundary::Closed).unwrap(), 0.25, epsilon = 1e-15);
        // half-open: {0, ..., 3/8}
        assert_abs_diff_eq!(cube_mean(&ramp, &half).unwrap(), 0.1875, epsilon = 1e-15);

        let c = GridFunction::constant(2, 8, 3.5).unwrap();
        let odd = Cube::new(vec![0.3, 0.71], 0.2).unwrap();
        assert_eq!(cube_mean(&c, &odd).unwrap(), 3.5);

        let cos = GridFunction::from_fn(1, 16, |x| (2.0 * PI * x[0]).cos()).unwrap();
        assert!(cube_mean(&cos, &Cube::unit(1)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn degenerate_cube_is_an_error() {
        let f = GridFunction::constant(1, 8, 1.0).unwrap();
        let tiny = Cube::new(vec![0.01], 0.05).unwrap();
        assert!(matches!(cube_mean(&f, &tiny), Err(Error::DegenerateCube(_))));
        assert!(matches!(l2_on_cube(&f, &tiny), Err(Error::DegenerateCube(_))));
    }

    #[test]
    fn l2_on_cube_examples() {
        let one = GridFunction::constant(1, 8, 1.0).unwrap();
        assert_abs_diff_eq!(l2_on_cube(&one, &Cube::unit(1)).unwrap(), 1.0, epsilon = 1e-15);
        let one2 = GridFunction::constant(2, 16, 1.0).unwrap();
        let q = Cube::new(vec![0.5, 0.0], 0.5).unwrap();
        assert_abs_diff_eq!(l2_on_cube(&one2, &q).unwrap(), 0.25, epsilon = 1e-15);
        // the closed rule picks up one extra shell
        assert_abs_diff_eq!(l2_on_cube_with(&one2, &q, Boundary::Closed).unwrap(), 81.0 / 256.0, epsilon = 1e-15);
    }

    #[test]
    fn l2_on_cube_matches_direct_loop() {
        let f = GridFunction::from_fn(2, 32, |x| (7.0 * x[0]).sin() + (x[1] * 13.0).cos() * x[0]).unwrap();
        let cube = Cube::new(vec![0.25, 0.5], 0.25).unwrap();
        let mut direct = 0.0;
        for i in 0..32 {
            for j in 0..32 {
                let (x, y) = (i as f64 / 32.0, j as f64 / 32.0);
                if (0.25..0.5).contains(&x) && (0.5..0.75).contains(&y) {
                    direct += f.values()[i * 32 + j].powi(2);
                }
            }
        }
        direct /= 1024.0;
        assert!((l2_on_cube(&f, &cube).unwrap() - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn shifted_cube_wraps_periodically() {
        let f = GridFunction::from_fn(1, 8, |x| x[0]).unwrap();
        let c = Cube::new(vec![0.75], 0.5).unwrap();
        let block = lattice_block(8, &c, Boundary::HalfOpen).unwrap();
        assert_eq!(block.start, vec![6]);
        assert_eq!(gather(&f, &block), vec![0.75, 0.875, 0.0, 0.125]);
    }

    #[test]
    fn enumerate_counts() {
        assert_eq!(enumerate_cubes(1, 5, 2, false).unwrap().len(), 7);
        assert_eq!(enumerate_cubes(2, 4, 1, false).unwrap().len(), 5);
        assert_eq!(enumerate_cubes(1, 4, 1, true).unwrap().len(), 6);
        assert!(enumerate_cubes(1, 4, 2, false).is_err());
    }

    #[test]
    fn shifted_enumeration_matches_brute_force() {
        // brute force: every corner on the 2^{-k} grid offset by half an edge
        let got = enumerate_cubes(1, 4, 1, true).unwrap();
        let mut expect = vec![(0.0, 1.0), (0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (0.25, 0.5), (0.75, 0.5)];
        let mut have: Vec<(f64, f64)> = got.iter().map(|c| (c.corner[0], c.edge)).collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        have.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(have, expect);
    }

    #[test]
    fn cube_geometry() {
        let j = Cube::new(vec![0.25], 0.25).unwrap();
        assert_eq!(j.dilate(2.0), Cube::new(vec![0.125], 0.5).unwrap());
        assert_eq!(Cube::unit(1).dilate(2.0), Cube::new(vec![-0.5], 2.0).unwrap());
        assert_eq!(j.dilate(2.0).dilate(3.0), j.dilate(6.0));
        assert_eq!(j.dyadic_level(), Some(2));
        assert_eq!(Cube::new(vec![0.0], 0.3).unwrap().dyadic_level(), None);
        assert_eq!(Cube::new(vec![0.0], 0.3).unwrap().band_floor(), 2);
        let a = Cube::new(vec![0.0, 0.0], 0.5).unwrap();
        let b = Cube::new(vec![0.5, 0.0], 0.5).unwrap();
        assert!(a.intersects(&b));
        assert!(a.interiors_disjoint(&b));
        assert!(a.is_subset_of(&Cube::unit(2)));
    }

    #[test]
    fn text_round_trip() {
        let f = GridFunction::from_fn(2, 8, |x| (x[0] * 3.1).sin() / 7.0 + x[1]).unwrap();
        let mut buf = Vec::new();
        f.write_text(&mut buf).unwrap();
        let g = GridFunction::read_text(buf.as_slice()).unwrap();
        assert_eq!(f, g);
        let bad = "1 8\n1 2 3\n";
        assert!(GridFunction::read_text(bad.as_bytes()).is_err());
        let commented = "# a constant\n1 8\n1 1 1 1\n1 1 1 1\n";
        assert_eq!(GridFunction::read_text(commented.as_bytes()).unwrap().values(), &[1.0; 8]);
    }
}
