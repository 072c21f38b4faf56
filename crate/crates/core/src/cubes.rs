//! Dyadic-cube combinatorics behind the kernel
//! `k(x, y) = Σ_{J ∈ D(I)} χ_{mJ}(x) χ_{mJ}(y) l(J)^{-2α-n}`.
//!
//! Everything here works on the continuum root cube, independent of any
//! grid. Cubes are addressed by `(level, integer index)`; with a root whose
//! corner and edge are dyadic rationals every corner, edge and dilation by a
//! power-of-two factor is an exact `f64`, so membership tests are exact.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Cube;

/// Dyadic subcube of a root cube: level `k`, index in `{0..2^k-1}^n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DyadicCube {
    pub level: u32,
    pub index: Vec<u64>,
}

impl DyadicCube {
    pub fn root(dim: usize) -> Self {
        Self { level: 0, index: vec![0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn edge(&self, root: &Cube) -> f64 {
        root.edge * 2f64.powi(-(self.level as i32))
    }

    pub fn to_cube(&self, root: &Cube) -> Cube {
        let edge = self.edge(root);
        Cube {
            corner: root.corner.iter().zip(&self.index).map(|(c, &i)| c + i as f64 * edge).collect(),
            edge,
        }
    }

    /// The `2^n` cubes of the next level partitioning this one.
    pub fn children(&self) -> Vec<DyadicCube> {
        let dim = self.dim();
        (0..1u64 << dim)
            .map(|bits| DyadicCube {
                level: self.level + 1,
                index: (0..dim).map(|a| 2 * self.index[a] + ((bits >> (dim - 1 - a)) & 1)).collect(),
            })
            .collect()
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        (self.level > 0).then(|| DyadicCube {
            level: self.level - 1,
            index: self.index.iter().map(|i| i / 2).collect(),
        })
    }

    /// `self ⊆ other` in the dyadic tree (not necessarily proper).
    pub fn is_within(&self, other: &DyadicCube) -> bool {
        if self.level < other.level {
            return false;
        }
        let shift = self.level - other.level;
        self.index.iter().zip(&other.index).all(|(&a, &b)| a >> shift == b)
    }
}

/// `Γ = {J ∈ D(I) : x, y ∈ mJ}` for one point pair.
#[derive(Debug, Clone)]
pub struct GammaSet {
    pub root: Cube,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub m: f64,
    pub max_level: u32,
    pub members: BTreeSet<DyadicCube>,
}

fn sup_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn euclid_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Depth below which no cube can belong to Γ, plus one level of margin:
/// `⌈log2(m l(I) / |x-y|_∞)⌉ + 1`.
pub fn required_depth(root: &Cube, x: &[f64], y: &[f64], m: f64) -> u32 {
    let d = sup_distance(x, y);
    ((m * root.edge / d).log2().ceil().max(0.0) as u32) + 1
}

fn check_pair(root: &Cube, x: &[f64], y: &[f64], m: f64) -> Result<()> {
    if x.len() != root.dim() || y.len() != root.dim() {
        return Err(Error::config("point dimension does not match the root cube"));
    }
    if x == y {
        return Err(Error::DiagonalPair);
    }
    if !(m >= 2.0) {
        return Err(Error::config(format!("dilation m must be >= 2, got {m}")));
    }
    Ok(())
}

/// Tree descent with pruning: a subtree is skipped as soon as `mJ` misses
/// `x` or `y`, because `mJ' ⊆ mJ` whenever `J' ⊆ J` and `m >= 1`.
pub fn gamma_set(root: &Cube, x: &[f64], y: &[f64], m: f64, max_level: u32) -> Result<GammaSet> {
    check_pair(root, x, y, m)?;
    let required = required_depth(root, x, y, m);
    if max_level < required {
        return Err(Error::InsufficientDepth { required, given: max_level });
    }
    let mut members = BTreeSet::new();
    let mut stack = vec![DyadicCube::root(root.dim())];
    while let Some(j) = stack.pop() {
        let dilated = j.to_cube(root).dilate(m);
        if !(dilated.contains(x) && dilated.contains(y)) {
            continue;
        }
        if j.level < max_level {
            stack.extend(j.children());
        }
        members.insert(j);
    }
    Ok(GammaSet { root: root.clone(), x: x.to_vec(), y: y.to_vec(), m, max_level, members })
}

impl GammaSet {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = f64> + '_ {
        self.members.iter().map(|j| j.edge(&self.root))
    }
}

/// Minimal members of Γ: no proper dyadic descendant lies in Γ. Since Γ is
/// upward closed it suffices to look at the children.
pub fn allowed_cubes(gamma: &GammaSet) -> BTreeSet<DyadicCube> {
    gamma
        .members
        .iter()
        .filter(|j| !j.children().iter().any(|c| gamma.members.contains(c)))
        .cloned()
        .collect()
}

/// `Σ_J l(J)^{-2α-n}` over the given edge lengths.
pub fn kernel_sum(edges: impl IntoIterator<Item = f64>, alpha: f64, dim: usize) -> Result<f64> {
    let bound = -(dim as f64) / 2.0;
    if alpha <= bound {
        return Err(Error::DivergentRegime { alpha, bound });
    }
    let p = -(2.0 * alpha + dim as f64);
    Ok(edges.into_iter().map(|l| l.powf(p)).sum())
}

/// Ring class of an allowed cube: `kind` 1 when it fits in `I_{k+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RingClass {
    pub k: u32,
    pub kind: u8,
}

#[derive(Debug, Clone)]
pub struct AllowedClassification {
    pub allowed: BTreeSet<DyadicCube>,
    pub rings: BTreeMap<RingClass, Vec<DyadicCube>>,
    /// Cube centered at `(x+y)/2` with edge `√n |x-y|`.
    pub i0: Cube,
}

/// `I_0` centered at the midpoint with edge `√n |x-y|_2`.
pub fn initial_cube(x: &[f64], y: &[f64]) -> Cube {
    let edge = (x.len() as f64).sqrt() * euclid_distance(x, y);
    let corner = x.iter().zip(y).map(|(a, b)| 0.5 * (a + b) - 0.5 * edge).collect();
    Cube { corner, edge }
}

/// `I_k = 2^k I_0`.
pub fn ring_cube(i0: &Cube, k: u32) -> Cube {
    i0.dilate(2f64.powi(k as i32))
}

/// Hard stop for the ring search; `I_k` outgrows any bounded cube long before.
const MAX_RING: u32 = 2048;

/// Assign each allowed cube to the unique class `(k, kind)`: `k` is the
/// first index with `J ∩ I_k ≠ ∅` (so `J` misses `I_0 ∪ … ∪ I_{k-1}`), and
/// `kind` is 1 if `J ⊆ I_{k+1}`, 2 otherwise.
pub fn classify_allowed(
    root: &Cube,
    allowed: &BTreeSet<DyadicCube>,
    x: &[f64],
    y: &[f64],
    m: f64,
) -> Result<AllowedClassification> {
    check_pair(root, x, y, m)?;
    let i0 = initial_cube(x, y);
    let mut rings: BTreeMap<RingClass, Vec<DyadicCube>> = BTreeMap::new();
    for j in allowed {
        let cube = j.to_cube(root);
        let k = (0..MAX_RING)
            .find(|&k| cube.intersects(&ring_cube(&i0, k)))
            .ok_or_else(|| Error::Invariant(format!("allowed cube {cube} meets no ring")))?;
        let kind = if cube.is_subset_of(&ring_cube(&i0, k + 1)) { 1 } else { 2 };
        rings.entry(RingClass { k, kind }).or_default().push(j.clone());
    }
    let classified: usize = rings.values().map(Vec::len).sum();
    if classified != allowed.len() {
        return Err(Error::Invariant("ring classes do not cover the allowed set".into()));
    }
    Ok(AllowedClassification { allowed: allowed.clone(), rings, i0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingCount {
    pub k: u32,
    pub first: usize,
    pub second: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountSummary {
    pub per_k: Vec<RingCount>,
    pub max_first: usize,
    pub max_second: usize,
    /// `max_k #Γ_k^(1) / m^n`.
    pub max_first_normalized: f64,
}

pub fn count_summary(c: &AllowedClassification, m: f64, dim: usize) -> CountSummary {
    let mut by_k: BTreeMap<u32, RingCount> = BTreeMap::new();
    for (class, cubes) in &c.rings {
        let e = by_k.entry(class.k).or_insert(RingCount { k: class.k, first: 0, second: 0 });
        if class.kind == 1 {
            e.first += cubes.len();
        } else {
            e.second += cubes.len();
        }
    }
    let per_k: Vec<RingCount> = by_k.into_values().collect();
    let max_first = per_k.iter().map(|r| r.first).max().unwrap_or(0);
    let max_second = per_k.iter().map(|r| r.second).max().unwrap_or(0);
    CountSummary {
        max_first_normalized: max_first as f64 / m.powi(dim as i32),
        per_k,
        max_first,
        max_second,
    }
}

/// Seeded point pairs in `root`: `x` uniform, `y = x + r u` with `r`
/// log-uniform in `[r_min, r_max] · l(I)` and `u` a uniform direction;
/// candidates with `y ∉ I` are rejected.
pub fn sample_pairs(root: &Cube, count: usize, seed: u64, r_min: f64, r_max: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let dim = root.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (r_min.ln(), r_max.ln());
    let mut pairs = Vec::with_capacity(count);
    while pairs.len() < count {
        let x: Vec<f64> = root.corner.iter().map(|c| c + rng.random::<f64>() * root.edge).collect();
        let r = (lo + (hi - lo) * rng.random::<f64>()).exp() * root.edge;
        let u: Vec<f64> = match dim {
            1 => vec![if rng.random::<bool>() { 1.0 } else { -1.0 }],
            _ => {
                let t = std::f64::consts::TAU * rng.random::<f64>();
                vec![t.cos(), t.sin()]
            }
        };
        let y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + r * b).collect();
        if root.contains(&y) && x != y {
            pairs.push((x, y));
        }
    }
    pairs
}

/// Full and allowed kernel sums plus ring counts for one pair.
#[derive(Debug, Clone, Serialize)]
pub struct KernelSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub distance: f64,
    pub k_full: f64,
    pub k_allowed: f64,
    pub gamma_size: usize,
    pub allowed_size: usize,
    pub counts: CountSummary,
}

pub fn kernel_sample(root: &Cube, x: &[f64], y: &[f64], alpha: f64, m: f64) -> Result<KernelSample> {
    let depth = required_depth(root, x, y, m);
    let gamma = gamma_set(root, x, y, m, depth)?;
    let allowed = allowed_cubes(&gamma);
    let k_full = kernel_sum(gamma.edges(), alpha, root.dim())?;
    let k_allowed = kernel_sum(allowed.iter().map(|j| j.edge(root)), alpha, root.dim())?;
    let classification = classify_allowed(root, &allowed, x, y, m)?;
    Ok(KernelSample {
        x: x.to_vec(),
        y: y.to_vec(),
        distance: euclid_distance(x, y),
        k_full,
        k_allowed,
        gamma_size: gamma.len(),
        allowed_size: allowed.len(),
        counts: count_summary(&classification, m, root.dim()),
    })
}
