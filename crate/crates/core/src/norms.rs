//! Sup-over-cubes norm functionals on grid functions.
//!
//! * `q_alpha`: `l(I)^{2α-n} ∫_I∫_I |f(x)-f(y)|² / |x-y|^{2α+n}`, midpoint
//!   rule on the lattice with the diagonal cell dropped.
//! * `campanato`: `l(I)^{-λ} ∫_I |f - f_I|²`; `λ = n` is the BMO case.
//! * `lp_morrey`: `|I|^{-(1-2α/n)} Σ_{j >= -log2 l(I)} 2^{2αj} ‖Δ_j f‖²_{L²(I)}`.
//! * `dyadic_lp`: the same quantity spread over the dyadic subcubes of `I`.
//! * `morrey_besov`: `(Σ_j sup_I |I|^{-σ/n} ∫_I (2^{αj}|Δ_j f|)²)^{1/2}`.
//!
//! Every sup-type norm reports the square root of the largest per-cube value
//! together with the cube attaining it. Lattice membership is half-open.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filterbank::BandDecomposition;
use crate::grid::{gather, l2_on_cube, lattice_block, Boundary, Cube, GridFunction, LatticeBlock};
use crate::reduce::{chunked_sum, CHUNK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    QAlpha,
    Campanato,
    LpMorrey,
    DyadicLp,
    MorreyBesov,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::QAlpha => "qalpha",
            NormKind::Campanato => "campanato",
            NormKind::LpMorrey => "lpmorrey",
            NormKind::DyadicLp => "dyadiclp",
            NormKind::MorreyBesov => "mb",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubeValue {
    pub cube: Cube,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub kind: NormKind,
    /// `α` for every kind except Campanato, where it is `λ`.
    pub exponent: f64,
    pub value: f64,
    pub argmax: Option<Cube>,
    pub table: Vec<CubeValue>,
    pub notes: Vec<String>,
}

impl NormReport {
    fn from_squares(kind: NormKind, exponent: f64, squares: Vec<(Cube, f64)>, notes: Vec<String>) -> Self {
        let table: Vec<CubeValue> = squares
            .into_iter()
            .map(|(cube, sq)| CubeValue { cube, value: sq.max(0.0).sqrt() })
            .collect();
        // first maximum wins, so ties resolve to the earliest cube
        let best = table.iter().fold(None::<&CubeValue>, |acc, cv| match acc {
            Some(b) if b.value >= cv.value => Some(b),
            _ => Some(cv),
        });
        Self {
            kind,
            exponent,
            value: best.map_or(0.0, |b| b.value),
            argmax: best.map(|b| b.cube.clone()),
            table,
            notes,
        }
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    /// One row per cube: `kind, exponent, corner_0[, corner_1], edge, value`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let dim = self.table.first().map_or(1, |c| c.cube.dim());
        let mut header = vec!["kind".to_string(), "exponent".to_string()];
        header.extend((0..dim).map(|a| format!("corner_{a}")));
        header.extend(["edge".to_string(), "value".to_string()]);
        out.write_record(&header)?;
        for cv in &self.table {
            let mut row = vec![self.kind.name().to_string(), self.exponent.to_string()];
            row.extend(cv.cube.corner.iter().map(|c| c.to_string()));
            row.push(cv.cube.edge.to_string());
            row.push(cv.value.to_string());
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn check_cube_dims(f: &GridFunction, cubes: &[Cube]) -> Result<()> {
    if cubes.iter().any(|c| c.dim() != f.dim()) {
        return Err(Error::config("cube and grid dimensions differ"));
    }
    Ok(())
}

fn alpha_regime_note(alpha: f64) -> Option<String> {
    if alpha < 0.0 {
        Some(format!("alpha = {alpha} < 0: Q_alpha coincides with BMO"))
    } else if alpha >= 1.0 {
        Some(format!("alpha = {alpha} >= 1: Q_alpha contains only constants; discrete values grow with N"))
    } else if alpha == 0.0 {
        Some("alpha = 0 is a borderline exponent".to_string())
    } else {
        None
    }
}

/// `(h |d|)^{-(2α+n)}` indexed by absolute lattice offsets inside a block.
struct OffsetKernel {
    counts: Vec<usize>,
    table: Vec<f64>,
}

impl OffsetKernel {
    fn new(block: &LatticeBlock, h: f64, power: f64) -> Self {
        let counts = block.counts.clone();
        let table = (0..block.len())
            .map(|p| {
                let mut rem = p;
                let mut r2 = 0.0;
                for a in (0..counts.len()).rev() {
                    let d = (rem % counts[a]) as f64;
                    rem /= counts[a];
                    r2 += d * d;
                }
                if r2 == 0.0 {
                    0.0
                } else {
                    (h * r2.sqrt()).powf(-power)
                }
            })
            .collect();
        Self { counts, table }
    }
}

/// `Σ_{p ≠ q} (v_p - v_q)² K(p - q)` over one block, chunked over `p`.
fn singular_pair_sum(values: &[f64], block: &LatticeBlock, kernel: &OffsetKernel) -> f64 {
    let dim = block.counts.len();
    let counts = &kernel.counts;
    let mut coords = vec![0i64; values.len() * dim];
    for (p, c) in coords.chunks_mut(dim).enumerate() {
        block.local_coord(p, c);
    }
    chunked_sum(values.len(), CHUNK, |range| {
        let mut acc = 0.0;
        for p in range {
            let pc = &coords[p * dim..(p + 1) * dim];
            let vp = values[p];
            for (q, (&vq, qc)) in values.iter().zip(coords.chunks(dim)).enumerate() {
                if q == p {
                    continue;
                }
                let mut off = 0usize;
                for a in 0..dim {
                    off = off * counts[a] + (pc[a] - qc[a]).unsigned_abs() as usize;
                }
                let d = vp - vq;
                acc += d * d * kernel.table[off];
            }
        }
        acc
    })
}

/// Per-cube squared Q_α quantity, or `None` when the cube holds fewer than
/// two lattice points.
pub fn q_alpha_cube(f: &GridFunction, alpha: f64, cube: &Cube) -> Option<f64> {
    let block = lattice_block(f.size(), cube, Boundary::HalfOpen)?;
    if block.len() < 2 {
        return None;
    }
    let n = f.dim() as f64;
    let h = f.spacing();
    let values = gather(f, &block);
    let kernel = OffsetKernel::new(&block, h, 2.0 * alpha + n);
    let s = singular_pair_sum(&values, &block, &kernel);
    Some(cube.edge.powf(2.0 * alpha - n) * h.powi(2 * f.dim() as i32) * s)
}

pub fn q_alpha(f: &GridFunction, alpha: f64, cubes: &[Cube]) -> Result<NormReport> {
    check_cube_dims(f, cubes)?;
    let mut notes: Vec<String> = alpha_regime_note(alpha).into_iter().collect();
    let per_cube: Vec<Option<f64>> = cubes.par_iter().map(|c| q_alpha_cube(f, alpha, c)).collect();
    let mut squares = Vec::with_capacity(cubes.len());
    for (cube, v) in cubes.iter().zip(per_cube) {
        match v {
            Some(v) => squares.push((cube.clone(), v)),
            None => {
                log::warn!("q_alpha: skipping cube {cube} with fewer than two lattice points");
                notes.push(format!("skipped cube {cube}: fewer than two lattice points"));
            }
        }
    }
    Ok(NormReport::from_squares(NormKind::QAlpha, alpha, squares, notes))
}

pub fn campanato_cube(f: &GridFunction, lambda: f64, cube: &Cube) -> Option<f64> {
    let block = lattice_block(f.size(), cube, Boundary::HalfOpen)?;
    if block.len() < 2 {
        return None;
    }
    let values = gather(f, &block);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let osc: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Some(cube.edge.powf(-lambda) * f.spacing().powi(f.dim() as i32) * osc)
}

/// Campanato norm `sup_I (l(I)^{-λ} ∫_I |f - f_I|²)^{1/2}` for `0 <= λ <= n`.
pub fn campanato(f: &GridFunction, lambda: f64, cubes: &[Cube]) -> Result<NormReport> {
    check_cube_dims(f, cubes)?;
    if !(0.0..=f.dim() as f64).contains(&lambda) {
        return Err(Error::config(format!("lambda {lambda} outside [0, n]")));
    }
    let per_cube: Vec<Option<f64>> = cubes.par_iter().map(|c| campanato_cube(f, lambda, c)).collect();
    let mut notes = Vec::new();
    let mut squares = Vec::with_capacity(cubes.len());
    for (cube, v) in cubes.iter().zip(per_cube) {
        match v {
            Some(v) => squares.push((cube.clone(), v)),
            None => {
                log::warn!("campanato: skipping cube {cube} with fewer than two lattice points");
                notes.push(format!("skipped cube {cube}: fewer than two lattice points"));
            }
        }
    }
    Ok(NormReport::from_squares(NormKind::Campanato, lambda, squares, notes))
}

fn check_decomposition(f: &GridFunction, d: &BandDecomposition) -> Result<()> {
    if !f.same_shape(&d.lowpass) {
        return Err(Error::config("decomposition shape does not match the grid function"));
    }
    Ok(())
}

/// First band and, for non-dyadic edges, a note that `-log2 l(I)` was
/// rounded up.
fn band_start(cube: &Cube, d: &BandDecomposition) -> Result<(i64, Option<String>)> {
    let j0 = cube.band_floor();
    if j0 < d.j_min {
        return Err(Error::config(format!(
            "cube {cube} needs bands from j = {j0} but the decomposition starts at {}",
            d.j_min
        )));
    }
    let note = cube
        .dyadic_level()
        .is_none()
        .then(|| format!("cube {cube}: non-dyadic edge, band floor rounded up to j = {j0}"));
    Ok((j0, note))
}

/// Per-cube squared LP Morrey quantity.
pub fn lp_morrey_cube(alpha: f64, cube: &Cube, d: &BandDecomposition) -> Result<f64> {
    let (j0, _) = band_start(cube, d)?;
    let n = d.lowpass.dim() as f64;
    let mut acc = 0.0;
    for j in j0..=d.j_max {
        let band = d.band(j).expect("j within decomposition range");
        acc += 2f64.powf(2.0 * alpha * j as f64) * l2_on_cube(band, cube)?;
    }
    Ok(cube.edge.powf(2.0 * alpha - n) * acc)
}

pub fn lp_morrey(f: &GridFunction, alpha: f64, cubes: &[Cube], d: &BandDecomposition) -> Result<NormReport> {
    check_cube_dims(f, cubes)?;
    check_decomposition(f, d)?;
    let mut notes: Vec<String> = alpha_regime_note(alpha).into_iter().collect();
    for c in cubes {
        notes.extend(band_start(c, d)?.1);
    }
    let squares = cubes
        .par_iter()
        .map(|c| lp_morrey_cube(alpha, c, d).map(|v| (c.clone(), v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormReport::from_squares(NormKind::LpMorrey, alpha, squares, notes))
}

fn dyadic_root_level(f: &GridFunction, cube: &Cube, k_max: u32) -> Result<u32> {
    let level = cube
        .dyadic_level()
        .ok_or_else(|| Error::config(format!("cube {cube} is not dyadic")))?;
    let limit = f.log2_size() as i64 - level as i64 - crate::grid::MIN_LOG2_SIZE as i64;
    if (k_max as i64) > limit {
        return Err(Error::config(format!(
            "K = {k_max} too deep for a level-{level} cube at N = {} (max {limit})",
            f.size()
        )));
    }
    Ok(level)
}

/// `Σ_{k=0}^{K} 2^{(2α-n)k} Σ_{J ∈ D_k(I)} |J|^{-1} Σ_{j >= -log2 l(J)} ‖Δ_j f‖²_{L²(J)}`.
pub fn dyadic_lp(f: &GridFunction, alpha: f64, cube: &Cube, k_max: u32, d: &BandDecomposition) -> Result<f64> {
    check_decomposition(f, d)?;
    if !(alpha > 0.0) {
        return Err(Error::config(format!("dyadic rearrangement needs alpha > 0, got {alpha}")));
    }
    let level = dyadic_root_level(f, cube, k_max)?;
    let n = f.dim() as f64;
    let mut total = 0.0;
    for k in 0..=k_max {
        let weight = 2f64.powf((2.0 * alpha - n) * k as f64);
        let mut level_sum = 0.0;
        for sub in crate::grid::dyadic_children(cube, k) {
            let j0 = (level + k) as i64;
            let mut inner = 0.0;
            for j in j0.max(d.j_min)..=d.j_max {
                inner += l2_on_cube(d.band(j).expect("in range"), &sub)?;
            }
            level_sum += inner / sub.volume();
        }
        total += weight * level_sum;
    }
    Ok(total)
}

/// `w_j(K) = Σ_{k=0}^{min(K, j - level)} 2^{2αk}`.
pub fn fubini_weight(alpha: f64, k_max: u32, j_minus_level: i64) -> f64 {
    if j_minus_level < 0 {
        return 0.0;
    }
    let top = (k_max as i64).min(j_minus_level);
    (0..=top).map(|k| 2f64.powf(2.0 * alpha * k as f64)).sum()
}

/// The order-exchanged form of [`dyadic_lp`]:
/// `|I|^{-1} Σ_{j >= level} w_j(K) ‖Δ_j f‖²_{L²(I)}`.
pub fn dyadic_lp_rearranged(
    f: &GridFunction,
    alpha: f64,
    cube: &Cube,
    k_max: u32,
    d: &BandDecomposition,
) -> Result<f64> {
    check_decomposition(f, d)?;
    let level = dyadic_root_level(f, cube, k_max)?;
    let mut acc = 0.0;
    for j in (level as i64).max(d.j_min)..=d.j_max {
        acc += fubini_weight(alpha, k_max, j - level as i64) * l2_on_cube(d.band(j).expect("in range"), cube)?;
    }
    Ok(acc / cube.volume())
}

/// Sup over the admissible cubes of `dyadic_lp^{1/2}`; cubes too deep for
/// `K` are skipped with a note.
pub fn dyadic_lp_norm(
    f: &GridFunction,
    alpha: f64,
    cubes: &[Cube],
    k_max: u32,
    d: &BandDecomposition,
) -> Result<NormReport> {
    check_cube_dims(f, cubes)?;
    let mut notes = Vec::new();
    let mut admissible = Vec::new();
    for c in cubes {
        match dyadic_root_level(f, c, k_max) {
            Ok(_) => admissible.push(c.clone()),
            Err(_) => notes.push(format!("skipped cube {c}: too deep for K = {k_max}")),
        }
    }
    let squares = admissible
        .par_iter()
        .map(|c| dyadic_lp(f, alpha, c, k_max, d).map(|v| (c.clone(), v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormReport::from_squares(NormKind::DyadicLp, alpha, squares, notes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSup {
    pub band: i64,
    /// `sup_I |I|^{-σ/n} 2^{2αj} ‖Δ_j f‖²_{L²(I)}`.
    pub sup: f64,
    pub argmax: Option<Cube>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorreyBesovReport {
    pub alpha: f64,
    pub sigma: f64,
    pub value: f64,
    pub bands: Vec<BandSup>,
}

/// Morrey-Besov norm; only `p = q = 2`, `σ = n - 2α` is supported.
pub fn morrey_besov(
    f: &GridFunction,
    alpha: f64,
    sigma: f64,
    p: f64,
    q: f64,
    cubes: &[Cube],
    d: &BandDecomposition,
) -> Result<MorreyBesovReport> {
    check_cube_dims(f, cubes)?;
    check_decomposition(f, d)?;
    let n = f.dim() as f64;
    if p != 2.0 || q != 2.0 || (sigma - (n - 2.0 * alpha)).abs() > 1e-12 {
        return Err(Error::Unsupported(
            "only the embedding case p = q = 2, sigma = n - 2 alpha is implemented".into(),
        ));
    }
    let bands = (d.j_min..=d.j_max)
        .into_par_iter()
        .map(|j| {
            let band = d.band(j).expect("in range");
            let weight = 2f64.powf(2.0 * alpha * j as f64);
            let mut best: Option<(f64, &Cube)> = None;
            for c in cubes {
                let v = c.edge.powf(-sigma) * weight * l2_on_cube(band, c)?;
                if best.is_none_or(|(b, _)| v > b) {
                    best = Some((v, c));
                }
            }
            Ok(BandSup { band: j, sup: best.map_or(0.0, |b| b.0), argmax: best.map(|b| b.1.clone()) })
        })
        .collect::<Result<Vec<_>>>()?;
    let value = bands.iter().map(|b| b.sup).sum::<f64>().sqrt();
    Ok(MorreyBesovReport { alpha, sigma, value, bands })
}
