//! Convex-hull volume ratios by Monte Carlo sampling.
//!
//! Membership of a sample in the hull of a point set is the feasibility of
//! `sum(l_i p_i) = x, sum(l_i) = 1, l >= 0`, decided with a phase-one revised
//! simplex. Point sets are first reduced to a superset of their hull
//! vertices so each test prices only a few hundred columns.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{DesignMetrics, Tier};
use crate::error::{Error, Result};

use super::Metric;

const FEASIBLE_TOL: f64 = 1e-9;
const PIVOT_EPS: f64 = 1e-11;
const PRICE_EPS: f64 = 1e-10;
/// Degenerate pivots in a row before switching to Bland's rule.
const STALL_LIMIT: usize = 8;
/// Samples per independently seeded RNG stream.
const CHUNK: u64 = 4096;

/// Number of affinely independent directions spanned by `points`.
pub fn affine_rank(points: &[Vec<f64>]) -> usize {
    let Some(origin) = points.first() else {
        return 0;
    };
    let d = origin.len();
    let mut rows: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(origin).map(|(a, b)| a - b).collect())
        .collect();
    let mut rank = 0;
    for col in 0..d {
        let Some(pivot) = (rank..rows.len())
            .filter(|&r| rows[r][col].abs() > 1e-9)
            .max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs()))
        else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank].clone();
        for r in rows.iter_mut().skip(rank + 1) {
            let f = r[col] / p[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&p) {
                    *v -= f * pv;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Phase-one feasibility of `x` as a convex combination of `pts` (row-major,
/// `dim` columns).
pub fn in_convex_hull(pts: &[f64], dim: usize, x: &[f64]) -> bool {
    let n = pts.len() / dim;
    let m = dim + 1;
    let mut flip = vec![1.0; m];
    let mut xb = vec![0.0; m];
    for k in 0..m {
        let b = if k < dim { x[k] } else { 1.0 };
        if b < 0.0 {
            flip[k] = -1.0;
        }
        xb[k] = b.abs();
    }
    let column = |j: usize, out: &mut [f64]| {
        for k in 0..dim {
            out[k] = pts[j * dim + k] * flip[k];
        }
        out[dim] = flip[dim];
    };

    // Basis starts on the artificials, indices n..n+m.
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut binv = vec![0.0; m * m];
    for i in 0..m {
        binv[i * m + i] = 1.0;
    }
    let mut in_basis = vec![false; n];
    let mut col = vec![0.0; m];
    let mut u = vec![0.0; m];
    let mut pi = vec![0.0; m];
    let mut stall = 0;

    for _ in 0..(50 * m + 2 * n) {
        let infeasibility: f64 = basis.iter().zip(&xb).filter(|(&b, _)| b >= n).map(|(_, v)| v).sum();
        if infeasibility <= FEASIBLE_TOL {
            return true;
        }
        pi.iter_mut().for_each(|v| *v = 0.0);
        for (i, &b) in basis.iter().enumerate() {
            if b >= n {
                for k in 0..m {
                    pi[k] += binv[i * m + k];
                }
            }
        }

        let bland = stall >= STALL_LIMIT;
        let mut entering = None;
        let mut best = -PRICE_EPS;
        for j in 0..n {
            if in_basis[j] {
                continue;
            }
            column(j, &mut col);
            let reduced: f64 = -pi.iter().zip(&col).map(|(a, b)| a * b).sum::<f64>();
            if reduced < best {
                entering = Some(j);
                if bland {
                    break;
                }
                best = reduced;
            }
        }
        let Some(j) = entering else {
            return false;
        };

        column(j, &mut col);
        for i in 0..m {
            u[i] = (0..m).map(|k| binv[i * m + k] * col[k]).sum();
        }
        let mut leave: Option<usize> = None;
        let mut theta = f64::INFINITY;
        for i in 0..m {
            if u[i] > PIVOT_EPS {
                let r = xb[i] / u[i];
                let tie = leave.is_some_and(|l| (r - theta).abs() <= 1e-15 && basis[i] < basis[l]);
                if r < theta - 1e-15 || tie {
                    theta = r;
                    leave = Some(i);
                }
            }
        }
        let Some(r) = leave else {
            // Phase one is bounded below by zero; treat as numerical failure.
            return false;
        };
        stall = if theta <= 1e-14 { stall + 1 } else { 0 };

        let ur = u[r];
        for k in 0..m {
            binv[r * m + k] /= ur;
        }
        xb[r] /= ur;
        for i in 0..m {
            if i != r && u[i] != 0.0 {
                let f = u[i];
                for k in 0..m {
                    binv[i * m + k] -= f * binv[r * m + k];
                }
                xb[i] -= f * xb[r];
                if xb[i].abs() < 1e-14 {
                    xb[i] = 0.0;
                }
            }
        }
        if basis[r] < n {
            in_basis[basis[r]] = false;
        }
        basis[r] = j;
        in_basis[j] = true;
    }
    let infeasibility: f64 = basis.iter().zip(&xb).filter(|(&b, _)| b >= n).map(|(_, v)| v).sum();
    infeasibility <= FEASIBLE_TOL
}

/// Hull of a point set, kept as a superset of its vertices.
#[derive(Debug, Clone)]
pub struct ConvexHull {
    dim: usize,
    vertices: Vec<f64>,
    rank: usize,
}

impl ConvexHull {
    pub fn new(points: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidArgument("hull of an empty point set".into()));
        };
        let dim = first.len();
        if points.iter().any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidArgument("hull points must be finite and of equal dimension".into()));
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
        pts.dedup();
        let rank = affine_rank(&pts);
        let vertices = if rank < dim { pts } else { reduce_to_vertices(pts, dim) };
        Ok(ConvexHull {
            dim,
            vertices: vertices.into_iter().flatten().collect(),
            rank,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn affine_rank(&self) -> usize {
        self.rank
    }

    /// Whether the hull has positive volume.
    pub fn is_full_dimensional(&self) -> bool {
        self.rank == self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len() / self.dim
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        in_convex_hull(&self.vertices, self.dim, x)
    }
}

/// Drops points that lie inside the hull of the others. Extreme points along
/// many directions seed the kept set; every remaining point is tested
/// against it and kept if outside.
fn reduce_to_vertices(pts: Vec<Vec<f64>>, dim: usize) -> Vec<Vec<f64>> {
    let n = pts.len();
    if n <= 4 * (dim + 1) {
        return pts;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut keep = vec![false; n];
    for k in 0..(64 * dim) {
        let dir: Vec<f64> = if k < 2 * dim {
            (0..dim).map(|i| if i == k / 2 { if k % 2 == 0 { 1.0 } else { -1.0 } } else { 0.0 }).collect()
        } else {
            (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };
        let score = |p: &Vec<f64>| p.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>();
        let best = (0..n).max_by(|&a, &b| score(&pts[a]).total_cmp(&score(&pts[b]))).expect("non-empty");
        keep[best] = true;
    }
    let centroid: Vec<f64> = (0..dim).map(|i| pts.iter().map(|p| p[i]).sum::<f64>() / n as f64).collect();
    let dist = |p: &Vec<f64>| p.iter().zip(&centroid).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let mut rest: Vec<usize> = (0..n).filter(|&i| !keep[i]).collect();
    rest.sort_by(|&a, &b| dist(&pts[b]).total_cmp(&dist(&pts[a])).then(a.cmp(&b)));

    let mut kept: Vec<f64> = (0..n).filter(|&i| keep[i]).flat_map(|i| pts[i].clone()).collect();
    for batch in rest.chunks(512) {
        let outside: Vec<usize> = batch
            .par_iter()
            .copied()
            .filter(|&i| !in_convex_hull(&kept, dim, &pts[i]))
            .collect();
        for i in outside {
            keep[i] = true;
            kept.extend_from_slice(&pts[i]);
        }
    }
    (0..n).filter(|&i| keep[i]).map(|i| pts[i].clone()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HullOptions {
    pub samples: u64,
    pub seed: u64,
    /// Worker threads; 0 uses all cores. Results do not depend on it.
    pub jobs: usize,
}

impl Default for HullOptions {
    fn default() -> Self {
        HullOptions {
            samples: 100_000,
            seed: 1,
            jobs: 0,
        }
    }
}

/// Hits per hull for nested hulls ordered innermost first. A sample is only
/// tested against a hull if it lies in the next larger one, so hit counts
/// never decrease outward. Degenerate hulls receive no hits.
pub fn nested_hits(hulls: &[&ConvexHull], lo: &[f64], hi: &[f64], opts: &HullOptions) -> Result<Vec<u64>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let chunks = opts.samples.div_ceil(CHUNK);
    let k = hulls.len();
    let per_chunk = |c: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(c);
        let count = CHUNK.min(opts.samples - c * CHUNK);
        let mut hits = vec![0u64; k];
        let mut x = vec![0.0; lo.len()];
        for _ in 0..count {
            for (i, v) in x.iter_mut().enumerate() {
                *v = lo[i] + (hi[i] - lo[i]) * rng.gen::<f64>();
            }
            for h in (0..k).rev() {
                if !hulls[h].is_full_dimensional() || !hulls[h].contains(&x) {
                    break;
                }
                hits[h] += 1;
            }
        }
        hits
    };
    let totals = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(per_chunk)
            .reduce(|| vec![0u64; k], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect())
    });
    Ok(totals)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HullReport {
    pub tier: Tier,
    pub points: usize,
    pub vertices: usize,
    pub affine_rank: usize,
    /// Hull volume as a fraction of the tier-E hull volume.
    pub volume_fraction: f64,
    pub std_error: f64,
    pub hits: u64,
    /// Samples inside the tier-E hull.
    pub sample_count: u64,
}

/// Min-max normalizes the design-space axes over the whole table.
pub fn normalized_space(rows: &[DesignMetrics]) -> Vec<Vec<f64>> {
    let axes = Metric::SPACE;
    let lo: Vec<f64> = axes.iter().map(|m| rows.iter().map(|r| m.value(r)).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = axes.iter().map(|m| rows.iter().map(|r| m.value(r)).fold(f64::NEG_INFINITY, f64::max)).collect();
    rows.iter()
        .map(|r| {
            axes.iter()
                .enumerate()
                .map(|(i, m)| {
                    let span = hi[i] - lo[i];
                    if span > 0.0 {
                        (m.value(r) - lo[i]) / span
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Volume of each tier's hull relative to tier E's, in the normalized
/// five-metric space.
pub fn hull_volume_fractions(rows: &[DesignMetrics], opts: &HullOptions) -> Result<Vec<HullReport>> {
    let space = normalized_space(rows);
    let mut hulls = Vec::new();
    let mut counts = Vec::new();
    for tier in Tier::ALL {
        let pts: Vec<Vec<f64>> = rows.iter().zip(&space).filter(|(r, _)| r.tier <= tier).map(|(_, p)| p.clone()).collect();
        if pts.is_empty() {
            return Err(Error::EmptyTier(tier.to_string()));
        }
        counts.push(pts.len());
        hulls.push(ConvexHull::new(&pts)?);
    }
    let outer = hulls.last().expect("five tiers");
    let dim = outer.dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for v in outer.vertices.chunks(dim) {
        for i in 0..dim {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    let refs: Vec<&ConvexHull> = hulls.iter().collect();
    let hits = nested_hits(&refs, &lo, &hi, opts)?;
    let n_e = hits[hits.len() - 1];
    Ok(Tier::ALL
        .iter()
        .enumerate()
        .map(|(i, &tier)| {
            let (fraction, err) = if tier == Tier::E {
                (1.0, 0.0)
            } else if n_e == 0 {
                (0.0, 0.0)
            } else {
                let f = hits[i] as f64 / n_e as f64;
                (f, (f * (1.0 - f) / n_e as f64).sqrt())
            };
            HullReport {
                tier,
                points: counts[i],
                vertices: hulls[i].vertex_count(),
                affine_rank: hulls[i].affine_rank(),
                volume_fraction: fraction,
                std_error: err,
                hits: hits[i],
                sample_count: n_e,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn cube(dim: usize) -> Vec<Vec<f64>> {
        (0..1u32 << dim).map(|m| (0..dim).map(|i| f64::from((m >> i) & 1)).collect()).collect()
    }

    fn simplex(dim: usize) -> Vec<Vec<f64>> {
        let mut pts = vec![vec![0.0; dim]];
        for i in 0..dim {
            let mut p = vec![0.0; dim];
            p[i] = 1.0;
            pts.push(p);
        }
        pts
    }

    #[test]
    fn rank_of_degenerate_sets() {
        assert_eq!(affine_rank(&simplex(5)[..5]), 4);
        assert_eq!(affine_rank(&simplex(5)), 5);
        let line: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64, 0.0]).collect();
        assert_eq!(affine_rank(&line), 1);
    }

    #[test]
    fn five_points_have_no_volume() {
        let h = ConvexHull::new(&simplex(5)[..5]).unwrap();
        assert!(!h.is_full_dimensional());
    }

    #[test]
    fn membership_basics() {
        let h = ConvexHull::new(&simplex(3)).unwrap();
        assert!(h.contains(&[0.2, 0.2, 0.2]));
        assert!(!h.contains(&[0.5, 0.5, 0.5]));
        assert!(!h.contains(&[-0.1, 0.2, 0.2]));
        assert!(h.contains(&[0.0, 0.0, 0.0]));
    }

    #[test]
    fn interior_points_are_dropped() {
        let mut pts = cube(4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            pts.push((0..4).map(|_| rng.gen_range(0.05..0.95)).collect());
        }
        let h = ConvexHull::new(&pts).unwrap();
        assert_eq!(h.vertex_count(), 16);
    }

    #[test]
    fn half_cube_fraction() {
        // Tier hull is the half of the unit square below the diagonal.
        let inner = ConvexHull::new(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let outer = ConvexHull::new(&cube(2)).unwrap();
        let opts = HullOptions { samples: 40_000, seed: 7, jobs: 2 };
        let hits = nested_hits(&[&inner, &outer], &[0.0, 0.0], &[1.0, 1.0], &opts).unwrap();
        assert_eq!(hits[1], 40_000);
        let f = hits[0] as f64 / hits[1] as f64;
        assert!((f - 0.5).abs() < 0.01, "{f}");
    }

    #[test]
    fn estimate_does_not_depend_on_workers() {
        let inner = ConvexHull::new(&simplex(3)).unwrap();
        let outer = ConvexHull::new(&cube(3)).unwrap();
        let run = |jobs| {
            let opts = HullOptions { samples: 20_000, seed: 11, jobs };
            nested_hits(&[&inner, &outer], &[0.0; 3], &[1.0; 3], &opts).unwrap()
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn std_error_shrinks_with_samples() {
        let inner = ConvexHull::new(&simplex(3)).unwrap();
        let outer = ConvexHull::new(&cube(3)).unwrap();
        let err = |samples| {
            let opts = HullOptions { samples, seed: 5, jobs: 0 };
            let h = nested_hits(&[&inner, &outer], &[0.0; 3], &[1.0; 3], &opts).unwrap();
            let f = h[0] as f64 / h[1] as f64;
            (f * (1.0 - f) / h[1] as f64).sqrt()
        };
        let ratio = err(80_000) / err(40_000);
        assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.05, "{ratio}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn vertices_and_convex_combinations(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<Vec<f64>> = (0..30).map(|_| (0..5).map(|_| rng.gen::<f64>()).collect()).collect();
            let h = ConvexHull::new(&pts).unwrap();
            for p in &pts {
                prop_assert!(h.contains(p));
            }
            let w: Vec<f64> = (0..30).map(|_| rng.gen::<f64>()).collect();
            let s: f64 = w.iter().sum();
            let x: Vec<f64> = (0..5).map(|i| pts.iter().zip(&w).map(|(p, wi)| p[i] * wi / s).sum()).collect();
            prop_assert!(h.contains(&x));
            let far: Vec<f64> = x.iter().map(|v| v + 2.0).collect();
            prop_assert!(!h.contains(&far));
        }
    }
}
