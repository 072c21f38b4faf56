//! Experiment harness: the norm-equivalence sweep, the exact rearrangement
//! identity, the kernel-sum bound, kernel decay, the Morrey-Besov embedding
//! and the `α ≥ 1` degeneracy diagnostic.
//!
//! "Verifying" a `≲` statement here means the relevant ratio stays bounded
//! over the corpus and stable under refinement. No continuum constant is
//! certified.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{generate_at, CorpusKind, CorpusSpec};
use crate::cubes::{kernel_sample, sample_pairs, KernelSample};
use crate::error::{Error, Result};
use crate::filterbank::{decompose, BandDecomposition};
use crate::grid::{dyadic_children, enumerate_cubes, gather, lattice_block, validate_shape, Boundary, Cube, GridFunction};
use crate::norms::{campanato, dyadic_lp, dyadic_lp_norm, dyadic_lp_rearranged, lp_morrey, morrey_besov, q_alpha, NormKind};

/// Floor for relative-discrepancy denominators.
pub const DISCREPANCY_FLOOR: f64 = 1e-300;
/// A norm below this (relative to `max |f|`, floored at 1) counts as zero.
pub const ZERO_TOLERANCE: f64 = 1e-10;
/// Largest tolerated ratio change per grid doubling.
pub const DRIFT_LIMIT: f64 = 0.2;
/// Pair distances for the decay regression, as fractions of the root edge.
pub const DECAY_RANGE: (f64, f64) = (1e-3, 1e-1);

fn is_zero(value: f64, f: &GridFunction) -> bool {
    value < ZERO_TOLERANCE * f.max_abs().max(1.0)
}

fn relative_discrepancy(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs()).max(DISCREPANCY_FLOOR)
    }
}

fn log2_exact(size: usize) -> u32 {
    size.trailing_zeros()
}

/// Cubes of levels `0..=L-3` with shifted copies: the standard family.
pub fn standard_family(dim: usize, size: usize) -> Result<Vec<Cube>> {
    let l = validate_shape(dim, size)?;
    enumerate_cubes(dim, l, l - crate::grid::MIN_LOG2_SIZE, true)
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn write_json<T: Serialize, W: Write>(report: &T, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, report)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceRow {
    pub id: String,
    pub size: usize,
    pub q_alpha: f64,
    pub lp_morrey: f64,
    /// `lp_morrey / q_alpha`; absent when both vanish.
    pub ratio: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceTrend {
    pub id: String,
    /// Relative ratio change between consecutive sizes.
    pub drifts: Vec<f64>,
    pub max_drift: f64,
    pub monotone: bool,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub alpha: f64,
    pub dim: usize,
    pub sizes: Vec<usize>,
    /// Finest cube level; the same family is used at every size.
    pub level_max: u32,
    pub rows: Vec<EquivalenceRow>,
    pub trends: Vec<EquivalenceTrend>,
    pub c_low: Option<f64>,
    pub c_high: Option<f64>,
    pub spread: Option<f64>,
}

impl EquivalenceReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["id", "N", "q_alpha", "lp_morrey", "ratio", "status"])?;
        for r in &self.rows {
            out.write_record([
                r.id.clone(),
                r.size.to_string(),
                r.q_alpha.to_string(),
                r.lp_morrey.to_string(),
                r.ratio.map_or(String::new(), |v| v.to_string()),
                r.status.clone(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Both sides of the Littlewood-Paley characterization for every corpus
/// member at every size. The cube family is fixed by the coarsest size
/// (levels `0..=L_min-3`, shifted copies included) so each row measures the
/// same supremum.
pub fn equivalence_report(corpus: &[CorpusSpec], alpha: f64, dim: usize, sizes: &[usize]) -> Result<EquivalenceReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::config(format!("equivalence needs alpha in (0, 1), got {alpha}")));
    }
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("sizes must be non-empty and strictly ascending"));
    }
    for &s in sizes {
        validate_shape(dim, s)?;
    }
    let level_max = log2_exact(sizes[0]) - crate::grid::MIN_LOG2_SIZE;
    let cubes = enumerate_cubes(dim, log2_exact(sizes[0]), level_max, true)?;
    let tasks: Vec<(&CorpusSpec, usize)> = corpus.iter().flat_map(|s| sizes.iter().map(move |&n| (s, n))).collect();
    let rows = tasks
        .par_iter()
        .map(|&(spec, size)| {
            let f = generate_at(spec, dim, size)?;
            let d = decompose(&f, 0)?;
            let q = q_alpha(&f, alpha, &cubes)?.value;
            let l = lp_morrey(&f, alpha, &cubes, &d)?.value;
            let (ratio, status) = match (is_zero(q, &f), is_zero(l, &f)) {
                (true, true) => (None, "both zero"),
                (false, false) => (Some(l / q), "ok"),
                _ => (None, "one side zero"),
            };
            Ok(EquivalenceRow { id: spec.label(), size, q_alpha: q, lp_morrey: l, ratio, status: status.into() })
        })
        .collect::<Result<Vec<_>>>()?;

    let trends = corpus
        .iter()
        .enumerate()
        .filter_map(|(i, spec)| {
            let ratios: Option<Vec<f64>> = rows[i * sizes.len()..(i + 1) * sizes.len()].iter().map(|r| r.ratio).collect();
            let ratios = ratios?;
            let drifts: Vec<f64> = ratios.windows(2).map(|w| (w[1] / w[0] - 1.0).abs()).collect();
            let signs: Vec<bool> = ratios.windows(2).map(|w| w[1] >= w[0]).collect();
            let monotone = signs.windows(2).all(|s| s[0] == s[1]);
            let max_drift = drifts.iter().cloned().fold(0.0, f64::max);
            if max_drift > DRIFT_LIMIT {
                log::warn!("{}: ratio drifts {:.1}% per doubling", spec.label(), 100.0 * max_drift);
            }
            Some(EquivalenceTrend { id: spec.label(), drifts, max_drift, monotone, flagged: max_drift > DRIFT_LIMIT })
        })
        .collect();

    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let c_low = ratios.iter().cloned().reduce(f64::min);
    let c_high = ratios.iter().cloned().reduce(f64::max);
    Ok(EquivalenceReport {
        alpha,
        dim,
        sizes: sizes.to_vec(),
        level_max,
        rows,
        trends,
        c_low,
        c_high,
        spread: c_low.zip(c_high).map(|(lo, hi)| hi / lo),
    })
}

/// Relative gap between the dyadic sum and its order-exchanged form.
pub fn fubini_identity_check(f: &GridFunction, alpha: f64, cube: &Cube, k_max: u32, d: &BandDecomposition) -> Result<f64> {
    let direct = dyadic_lp(f, alpha, cube, k_max, d)?;
    let swapped = dyadic_lp_rearranged(f, alpha, cube, k_max, d)?;
    Ok(relative_discrepancy(direct, swapped))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FubiniRecord {
    pub id: String,
    pub alpha: f64,
    pub cube: Cube,
    pub k_max: u32,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FubiniReport {
    pub dim: usize,
    pub size: usize,
    pub records: Vec<FubiniRecord>,
    /// `(level, K)` combinations too deep for the grid.
    pub skipped: usize,
    pub max_discrepancy: f64,
}

impl FubiniReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["id", "alpha", "cube", "K", "discrepancy"])?;
        for r in &self.records {
            out.write_record([r.id.clone(), r.alpha.to_string(), r.cube.to_string(), r.k_max.to_string(), r.discrepancy.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Every corpus member, every dyadic cube of levels `0..=level_max`, every
/// `K` in `0..=k_max` that the grid resolves.
pub fn fubini_sweep(
    corpus: &[CorpusSpec],
    alphas: &[f64],
    dim: usize,
    size: usize,
    level_max: u32,
    k_max: u32,
) -> Result<FubiniReport> {
    let l = validate_shape(dim, size)?;
    let deepest = l - crate::grid::MIN_LOG2_SIZE;
    let unit = Cube::unit(dim);
    let mut jobs = Vec::new();
    let mut skipped = 0;
    for level in 0..=level_max {
        for k in 0..=k_max {
            if level + k > deepest {
                skipped += 1;
                continue;
            }
            for cube in dyadic_children(&unit, level) {
                jobs.push((cube, k));
            }
        }
    }
    let mut records = Vec::new();
    for spec in corpus {
        let f = generate_at(spec, dim, size)?;
        let d = decompose(&f, 0)?;
        for &alpha in alphas {
            let batch = jobs
                .par_iter()
                .map(|(cube, k)| {
                    Ok(FubiniRecord {
                        id: spec.label(),
                        alpha,
                        cube: cube.clone(),
                        k_max: *k,
                        discrepancy: fubini_identity_check(&f, alpha, cube, *k, &d)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            records.extend(batch);
        }
    }
    let max_discrepancy = records.iter().map(|r| r.discrepancy).fold(0.0, f64::max);
    Ok(FubiniReport { dim, size, records, skipped, max_discrepancy })
}

/// `Σ_{x,y ∈ mJ} |f(x) - f(y)|² h^{2n}` via `2M Σ (f - mean)²`, lattice points
/// of `mJ` taken with periodic images.
pub fn dilated_pair_energy(f: &GridFunction, cube: &Cube, m: f64) -> Result<f64> {
    let dilated = cube.dilate(m);
    let block =
        lattice_block(f.size(), &dilated, Boundary::HalfOpen).ok_or_else(|| Error::DegenerateCube(dilated.to_string()))?;
    let values = gather(f, &block);
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let osc: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok(2.0 * count * osc * f.spacing().powi(2 * f.dim() as i32))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma23Record {
    pub id: String,
    pub alpha: f64,
    pub m: f64,
    pub k_max: u32,
    pub lhs: f64,
    pub q_alpha: f64,
    /// `lhs / (m^{2α+2n} q_alpha²)`; 0 when both vanish.
    pub ratio: f64,
}

/// `Σ_{k<=K} 2^{(2α-n)k} Σ_{J ∈ D_k(I)} |J|^{-2} ∬_{mJ×mJ} |f(x)-f(y)|²`.
pub fn lemma23_lhs(f: &GridFunction, alpha: f64, m: f64, cube: &Cube, k_max: u32) -> Result<f64> {
    let n = f.dim() as f64;
    let mut total = 0.0;
    for k in 0..=k_max {
        let subs = dyadic_children(cube, k);
        let level: f64 = subs
            .par_iter()
            .map(|j| dilated_pair_energy(f, j, m).map(|e| e / (j.volume() * j.volume())))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum();
        total += 2f64.powf((2.0 * alpha - n) * k as f64) * level;
    }
    Ok(total)
}

/// The truncated kernel-sum bound for one function and fixed cube, against
/// the Q_α norm over the standard family.
pub fn lemma23_check(f: &GridFunction, alpha: f64, m: f64, cube: &Cube, k_max: u32) -> Result<Lemma23Record> {
    lemma23_with_norm(f, alpha, m, cube, k_max, None)
}

fn lemma23_with_norm(
    f: &GridFunction,
    alpha: f64,
    m: f64,
    cube: &Cube,
    k_max: u32,
    q: Option<f64>,
) -> Result<Lemma23Record> {
    let n = f.dim() as f64;
    if !(m >= 2.0) {
        return Err(Error::config(format!("m must be at least 2, got {m}")));
    }
    if !(alpha > -n / 2.0) {
        return Err(Error::DivergentRegime { alpha, bound: -n / 2.0 });
    }
    let level = cube.dyadic_level().ok_or_else(|| Error::config(format!("cube {cube} is not dyadic")))?;
    let deepest = f.log2_size() - crate::grid::MIN_LOG2_SIZE;
    if level + k_max > deepest {
        return Err(Error::config(format!("K = {k_max} too deep for a level-{level} cube at N = {}", f.size())));
    }
    let lhs = lemma23_lhs(f, alpha, m, cube, k_max)?;
    let q = match q {
        Some(q) => q,
        None => q_alpha(f, alpha, &standard_family(f.dim(), f.size())?)?.value,
    };
    let ratio = if is_zero(lhs, f) && is_zero(q, f) { 0.0 } else { lhs / (m.powf(2.0 * alpha + 2.0 * n) * q * q) };
    Ok(Lemma23Record { id: String::new(), alpha, m, k_max, lhs, q_alpha: q, ratio })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma23Report {
    pub dim: usize,
    pub size: usize,
    pub records: Vec<Lemma23Record>,
    pub max_ratio: f64,
}

impl Lemma23Report {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["id", "alpha", "m", "K", "lhs", "q_alpha", "ratio"])?;
        for r in &self.records {
            out.write_record([
                r.id.clone(),
                r.alpha.to_string(),
                r.m.to_string(),
                r.k_max.to_string(),
                r.lhs.to_string(),
                r.q_alpha.to_string(),
                r.ratio.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Ratio for one `(id, m, K)`, if it was computed.
    pub fn ratio(&self, id: &str, m: f64, k_max: u32) -> Option<f64> {
        self.records.iter().find(|r| r.id == id && r.m == m && r.k_max == k_max).map(|r| r.ratio)
    }
}

/// [`lemma23_check`] on the unit cube for every corpus member, `m` and `K`.
pub fn lemma23_sweep(
    corpus: &[CorpusSpec],
    alpha: f64,
    dim: usize,
    size: usize,
    ms: &[f64],
    ks: &[u32],
) -> Result<Lemma23Report> {
    let unit = Cube::unit(dim);
    let mut records = Vec::new();
    for spec in corpus {
        let f = generate_at(spec, dim, size)?;
        let q = q_alpha(&f, alpha, &standard_family(dim, size)?)?.value;
        for &m in ms {
            for &k in ks {
                let mut rec = lemma23_with_norm(&f, alpha, m, &unit, k, Some(q))?;
                rec.id = spec.label();
                records.push(rec);
            }
        }
    }
    let max_ratio = records.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(Lemma23Report { dim, size, records, max_ratio })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub alpha: f64,
    pub m: f64,
    pub dim: usize,
    pub seed: u64,
    pub samples: Vec<KernelSample>,
    /// Slope of `ln k_full` against `ln |x - y|`.
    pub slope: f64,
    pub expected_slope: f64,
    /// `max k_full |x-y|^{2α+n}` and the same for the allowed sum.
    pub max_scaled_full: f64,
    pub max_scaled_allowed: f64,
    /// Empirical constant in `k_full <= C k_allowed`.
    pub equivalence_constant: f64,
    pub max_first_normalized: f64,
    pub max_second: usize,
}

impl DecayReport {
    /// One row per pair: coordinates, distance, both kernel sums, set sizes
    /// and the per-ring counts as `k:first/second` pairs.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (0..self.dim).map(|a| format!("x_{a}")).collect();
        header.extend((0..self.dim).map(|a| format!("y_{a}")));
        header.extend(
            ["distance", "k_full", "k_allowed", "gamma_size", "allowed_size", "max_first", "max_second", "rings"]
                .map(String::from),
        );
        out.write_record(&header)?;
        for s in &self.samples {
            let mut row: Vec<String> = s.x.iter().chain(&s.y).map(|v| v.to_string()).collect();
            let rings: Vec<String> =
                s.counts.per_k.iter().map(|r| format!("{}:{}/{}", r.k, r.first, r.second)).collect();
            row.extend([
                s.distance.to_string(),
                s.k_full.to_string(),
                s.k_allowed.to_string(),
                s.gamma_size.to_string(),
                s.allowed_size.to_string(),
                s.counts.max_first.to_string(),
                s.counts.max_second.to_string(),
                rings.join(";"),
            ]);
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Kernel sums on seeded pairs in `[0,1]^n` spanning [`DECAY_RANGE`].
pub fn kernel_decay_check(alpha: f64, m: f64, dim: usize, pairs: usize, seed: u64) -> Result<DecayReport> {
    if !(1..=2).contains(&dim) {
        return Err(Error::config(format!("dimension must be 1 or 2, got {dim}")));
    }
    if !(m >= 2.0) {
        return Err(Error::config(format!("m must be at least 2, got {m}")));
    }
    if pairs < 2 {
        return Err(Error::config("need at least two pairs"));
    }
    let root = Cube::unit(dim);
    let samples = sample_pairs(&root, pairs, seed, DECAY_RANGE.0, DECAY_RANGE.1)
        .par_iter()
        .map(|(x, y)| kernel_sample(&root, x, y, alpha, m))
        .collect::<Result<Vec<_>>>()?;
    let p = 2.0 * alpha + dim as f64;
    let points: Vec<(f64, f64)> = samples.iter().map(|s| (s.distance.ln(), s.k_full.ln())).collect();
    let (slope, _) = linear_fit(&points);
    let fold = |g: &dyn Fn(&KernelSample) -> f64| samples.iter().map(g).fold(0.0, f64::max);
    Ok(DecayReport {
        alpha,
        m,
        dim,
        seed,
        slope,
        expected_slope: -p,
        max_scaled_full: fold(&|s| s.k_full * s.distance.powf(p)),
        max_scaled_allowed: fold(&|s| s.k_allowed * s.distance.powf(p)),
        equivalence_constant: fold(&|s| s.k_full / s.k_allowed),
        max_first_normalized: fold(&|s| s.counts.max_first_normalized),
        max_second: samples.iter().map(|s| s.counts.max_second).max().unwrap_or(0),
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingRow {
    pub id: String,
    pub q_alpha: f64,
    pub morrey_besov: f64,
    /// `q_alpha / morrey_besov`; absent when both vanish.
    pub ratio: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub alpha: f64,
    pub dim: usize,
    pub size: usize,
    pub rows: Vec<EmbeddingRow>,
    pub max_ratio: Option<f64>,
    pub violations: Vec<String>,
}

impl EmbeddingReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["id", "q_alpha", "morrey_besov", "ratio", "status"])?;
        for r in &self.rows {
            out.write_record([
                r.id.clone(),
                r.q_alpha.to_string(),
                r.morrey_besov.to_string(),
                r.ratio.map_or(String::new(), |v| v.to_string()),
                r.status.clone(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `q_alpha / morrey_besov` over the corpus on the standard family.
pub fn embedding_check(corpus: &[CorpusSpec], alpha: f64, dim: usize, size: usize) -> Result<EmbeddingReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::config(format!("embedding needs alpha in (0, 1), got {alpha}")));
    }
    let cubes = standard_family(dim, size)?;
    let sigma = dim as f64 - 2.0 * alpha;
    let rows = corpus
        .par_iter()
        .map(|spec| {
            let f = generate_at(spec, dim, size)?;
            let d = decompose(&f, 0)?;
            let q = q_alpha(&f, alpha, &cubes)?.value;
            let mb = morrey_besov(&f, alpha, sigma, 2.0, 2.0, &cubes, &d)?.value;
            let (ratio, status) = match (is_zero(q, &f), is_zero(mb, &f)) {
                (true, true) => (None, "both zero"),
                (false, true) => (None, "violation"),
                _ => (Some(q / mb), "ok"),
            };
            Ok(EmbeddingRow { id: spec.label(), q_alpha: q, morrey_besov: mb, ratio, status: status.into() })
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = rows.iter().filter(|r| r.status == "violation").map(|r| r.id.clone()).collect();
    let max_ratio = rows.iter().filter_map(|r| r.ratio).reduce(f64::max);
    Ok(EmbeddingReport { alpha, dim, size, rows, max_ratio, violations })
}

/// Every norm of the constant `value` on the standard family.
pub fn constant_norms(dim: usize, size: usize, alpha: f64, value: f64) -> Result<Vec<(NormKind, f64)>> {
    let f = GridFunction::constant(dim, size, value)?;
    let cubes = standard_family(dim, size)?;
    let d = decompose(&f, 0)?;
    let n = dim as f64;
    Ok(vec![
        (NormKind::QAlpha, q_alpha(&f, alpha, &cubes)?.value),
        (NormKind::Campanato, campanato(&f, (n - 2.0 * alpha).clamp(0.0, n), &cubes)?.value),
        (NormKind::LpMorrey, lp_morrey(&f, alpha, &cubes, &d)?.value),
        (NormKind::DyadicLp, dyadic_lp_norm(&f, alpha, &cubes, 0, &d)?.value),
        (NormKind::MorreyBesov, morrey_besov(&f, alpha, n - 2.0 * alpha, 2.0, 2.0, &cubes, &d)?.value),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyRow {
    pub size: usize,
    pub lp_morrey: f64,
    pub q_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyReport {
    pub alpha: f64,
    pub dim: usize,
    pub rows: Vec<DegeneracyRow>,
    /// `max f - min f` on the finest grid.
    pub oscillation: f64,
    /// Largest relative change of `lp_morrey` per doubling.
    pub lp_morrey_drift: f64,
    /// `q_alpha` on the finest grid over `q_alpha` on the coarsest.
    pub q_alpha_growth: f64,
}

/// Both norms of the smooth wave packet across sizes, on the family fixed by
/// the coarsest size. For `α >= 1` the LP side stays finite while the
/// discrete Q_α side keeps growing.
pub fn degeneracy_diagnostic(alpha: f64, dim: usize, sizes: &[usize]) -> Result<DegeneracyReport> {
    if sizes.len() < 2 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("need at least two strictly ascending sizes"));
    }
    let l0 = validate_shape(dim, sizes[0])?;
    let cubes = enumerate_cubes(dim, l0, l0 - crate::grid::MIN_LOG2_SIZE, true)?;
    let spec = CorpusSpec::new(CorpusKind::SchwartzLike);
    let mut rows = Vec::new();
    let mut oscillation = 0.0;
    for &size in sizes {
        let f = generate_at(&spec, dim, size)?;
        let d = decompose(&f, 0)?;
        rows.push(DegeneracyRow {
            size,
            lp_morrey: lp_morrey(&f, alpha, &cubes, &d)?.value,
            q_alpha: q_alpha(&f, alpha, &cubes)?.value,
        });
        let (lo, hi) = f.values().iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        oscillation = hi - lo;
    }
    let lp_morrey_drift = rows.windows(2).map(|w| (w[1].lp_morrey / w[0].lp_morrey - 1.0).abs()).fold(0.0, f64::max);
    let q_alpha_growth = rows.last().unwrap().q_alpha / rows[0].q_alpha;
    Ok(DegeneracyReport { alpha, dim, rows, oscillation, lp_morrey_drift, q_alpha_growth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::converged_corpus;

    #[test]
    fn constant_rows_are_both_zero() {
        let corpus = vec![CorpusSpec::new(CorpusKind::Constant { value: 2.0 })];
        let r = equivalence_report(&corpus, 0.5, 1, &[32, 64]).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(r.rows.iter().all(|row| row.status == "both zero" && row.ratio.is_none()));
        assert!(r.trends.is_empty() && r.c_low.is_none());
    }

    #[test]
    fn harmonic_ratio_is_resolution_stable() {
        let corpus = vec![CorpusSpec::new(CorpusKind::Harmonic { xi0: 4 })];
        let r = equivalence_report(&corpus, 0.5, 1, &[64, 128]).unwrap();
        let (a, b) = (r.rows[0].ratio.unwrap(), r.rows[1].ratio.unwrap());
        assert!((b / a - 1.0).abs() < 0.1, "{a} vs {b}");
    }

    #[test]
    fn equivalence_rejects_bad_config() {
        let corpus = converged_corpus(0.5);
        assert!(equivalence_report(&corpus, 1.2, 1, &[64]).is_err());
        assert!(equivalence_report(&corpus, 0.5, 1, &[128, 64]).is_err());
    }

    #[test]
    fn fubini_sweep_is_exact() {
        let mut corpus = converged_corpus(0.5);
        corpus.push(CorpusSpec::new(CorpusKind::Constant { value: 1.0 }));
        let r = fubini_sweep(&corpus, &[0.5], 1, 64, 2, 3).unwrap();
        assert!(r.max_discrepancy < 1e-12, "{}", r.max_discrepancy);
        assert!(r.skipped > 0);
    }

    #[test]
    fn pair_energy_matches_double_loop() {
        let spec = CorpusSpec::new(CorpusKind::SpectralNoise { slope: 0.7 }).with_seed(5);
        for (dim, size) in [(1, 64), (2, 16)] {
            let f = generate_at(&spec, dim, size).unwrap();
            let h = f.spacing();
            for (cube, m) in [(Cube::new(vec![0.75; dim], 0.25).unwrap(), 2.0), (Cube::unit(dim), 4.0)] {
                let block = lattice_block(size, &cube.dilate(m), Boundary::HalfOpen).unwrap();
                let v = gather(&f, &block);
                // compensated, so the oracle's own rounding stays below the tolerance
                let (mut naive, mut comp) = (0.0f64, 0.0f64);
                for a in &v {
                    for b in &v {
                        let y = (a - b) * (a - b) - comp;
                        let t = naive + y;
                        comp = (t - naive) - y;
                        naive = t;
                    }
                }
                naive *= h.powi(2 * dim as i32);
                let fast = dilated_pair_energy(&f, &cube, m).unwrap();
                assert!(relative_discrepancy(naive, fast) < 1e-12, "{dim} {m}: {naive} {fast}");
            }
        }
    }

    #[test]
    fn lemma23_preconditions_and_constants() {
        let c = GridFunction::constant(1, 64, 1.0).unwrap();
        let unit = Cube::unit(1);
        assert_eq!(lemma23_check(&c, 0.5, 2.0, &unit, 2).unwrap().ratio, 0.0);
        assert!(matches!(lemma23_check(&c, 0.5, 1.5, &unit, 2), Err(Error::Config(_))));
        assert!(lemma23_check(&c, 0.5, 2.0, &unit, 4).is_err());
        assert!(lemma23_check(&c, -0.6, 2.0, &unit, 1).is_err());
    }

    #[test]
    fn decay_report_basics() {
        let r = kernel_decay_check(0.5, 2.0, 1, 200, 7).unwrap();
        assert_eq!(r.samples.len(), 200);
        assert!(r.samples.iter().all(|s| s.k_full >= s.k_allowed));
        assert!(r.equivalence_constant >= 1.0);
        assert!((r.slope + 2.0).abs() < 0.15, "slope {}", r.slope);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 201);
    }

    #[test]
    fn embedding_harmonic_matches_direct_norms() {
        let spec = CorpusSpec::new(CorpusKind::Harmonic { xi0: 4 });
        let r = embedding_check(std::slice::from_ref(&spec), 0.5, 1, 64).unwrap();
        let f = generate_at(&spec, 1, 64).unwrap();
        let cubes = standard_family(1, 64).unwrap();
        let d = decompose(&f, 0).unwrap();
        let q = q_alpha(&f, 0.5, &cubes).unwrap().value;
        let mb = morrey_besov(&f, 0.5, 0.0, 2.0, 2.0, &cubes, &d).unwrap().value;
        assert_eq!(r.rows[0].ratio.unwrap(), q / mb);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn constants_have_vanishing_norms() {
        for (dim, size) in [(1, 64), (2, 16)] {
            for (kind, v) in constant_norms(dim, size, 0.5, 3.0).unwrap() {
                assert!(v < 1e-10, "{kind:?}: {v}");
            }
        }
    }

    #[test]
    fn fit_recovers_a_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 3.0 - 2.0 * i as f64)).collect();
        let (s, b) = linear_fit(&pts);
        assert!((s + 2.0).abs() < 1e-14 && (b - 3.0).abs() < 1e-14);
    }
}
