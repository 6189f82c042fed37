//! Monte Carlo estimates of the real Leray density and its split over the
//! connected components of `S(R)`.
//!
//! With `‖x‖∞ = 1` as normalization, `τ_∞ = Σ_i ∫ dy_a dy_b / |∂_c F|` over the
//! affine surfaces `F(…, x_i = 1, …) = 0` with all coordinates in `[−1, 1]`;
//! each face is covered by three charts solving for `y_c`, the chart being
//! the coordinate with the largest partial derivative.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::surface::SurfaceModel;

/// Samples drawn per parallel work unit.
const BLOCK: u64 = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RealRegion {
    Empty,
    Full,
}

#[derive(Clone, Copy, Debug)]
pub struct RealDensityOptions {
    /// Samples per chart (twelve charts).
    pub samples: u64,
    pub seed: u64,
    /// Cell size on the unit sphere for component clustering.
    pub cell: f64,
}

impl Default for RealDensityOptions {
    fn default() -> Self {
        RealDensityOptions { samples: 1 << 17, seed: 0, cell: 0.02 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealDensityReport {
    pub total: Estimate,
    /// Per connected component, largest first.
    pub components: Vec<Estimate>,
    pub samples_per_chart: u64,
    pub seed: u64,
    /// Roots discarded because the chart partial vanished.
    pub degenerate: u64,
}

/// Real roots of `c3 t³ + c2 t² + c1 t + c0`.
pub(crate) fn real_roots(c: [f64; 4]) -> Vec<f64> {
    let [c0, c1, c2, c3] = c;
    let scale = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    if c3.abs() <= 1e-14 * scale {
        if c2.abs() <= 1e-14 * scale {
            return if c1.abs() <= 1e-14 * scale { Vec::new() } else { vec![-c0 / c1] };
        }
        let d = c1 * c1 - 4.0 * c2 * c0;
        if d < 0.0 {
            return Vec::new();
        }
        let q = -0.5 * (c1 + c1.signum() * d.sqrt());
        let mut r = vec![q / c2];
        if q != 0.0 {
            r.push(c0 / q);
        }
        return r;
    }
    let (a, b, cc) = (c2 / c3, c1 / c3, c0 / c3);
    let q = (a * a - 3.0 * b) / 9.0;
    let r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * cc) / 54.0;
    let mut roots = if r * r < q * q * q {
        let theta = (r / q.powf(1.5)).clamp(-1.0, 1.0).acos();
        let s = -2.0 * q.sqrt();
        vec![
            s * (theta / 3.0).cos() - a / 3.0,
            s * ((theta + 2.0 * std::f64::consts::PI) / 3.0).cos() - a / 3.0,
            s * ((theta - 2.0 * std::f64::consts::PI) / 3.0).cos() - a / 3.0,
        ]
    } else {
        let big = -r.signum() * (r.abs() + (r * r - q * q * q).sqrt()).cbrt();
        let small = if big == 0.0 { 0.0 } else { q / big };
        vec![big + small - a / 3.0]
    };
    // One Newton step on the original polynomial for accuracy.
    for t in roots.iter_mut() {
        let f = ((c3 * *t + c2) * *t + c1) * *t + c0;
        let df = (3.0 * c3 * *t + 2.0 * c2) * *t + c1;
        if df != 0.0 {
            *t -= f / df;
        }
    }
    roots
}

/// One accepted root: its point (on the face `x_i = 1`), weight, and sample index.
struct Hit {
    point: [f64; 4],
    weight: f64,
    sample: u64,
}

fn chart_block(s: &SurfaceModel, face: usize, chart: usize, block: u64, n: u64, seed: u64) -> (Vec<Hit>, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((face * 3 + chart) as u64) << 40 | block);
    let free: Vec<usize> = (0..4).filter(|&i| i != face).collect();
    let c = free[chart];
    let others: Vec<usize> = free.iter().copied().filter(|&i| i != c).collect();
    let mut hits = Vec::new();
    let mut degenerate = 0;
    for k in 0..n {
        let mut x = [0.0f64; 4];
        x[face] = 1.0;
        x[others[0]] = rng.gen_range(-1.0..1.0);
        x[others[1]] = rng.gen_range(-1.0..1.0);
        let at = |t: f64| {
            let mut y = x;
            y[c] = t;
            s.eval_f64(&y)
        };
        // Interpolate the cubic in x_c from its values at −1, 0, 1, 2.
        let (fm, f0, f1, f2) = (at(-1.0), at(0.0), at(1.0), at(2.0));
        let c0 = f0;
        let c2 = (f1 + fm) / 2.0 - f0;
        let odd = (f1 - fm) / 2.0;
        let c3 = (f2 - c0 - 2.0 * odd - 4.0 * c2) / 6.0;
        let c1 = odd - c3;
        for t in real_roots([c0, c1, c2, c3]) {
            if !(-1.0..=1.0).contains(&t) {
                continue;
            }
            let mut y = x;
            y[c] = t;
            let g = s.gradient_f64(&y);
            let dc = g[c].abs();
            if dc < g[others[0]].abs() || dc < g[others[1]].abs() {
                continue;
            }
            if dc < 1e-12 {
                degenerate += 1;
                continue;
            }
            hits.push(Hit { point: y, weight: 4.0 / dc, sample: block * BLOCK + k });
        }
    }
    (hits, degenerate)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

fn cell_of(p: &[f64; 4], h: f64) -> [i32; 4] {
    let n = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    p.map(|x| (x / n / h).floor() as i32)
}

/// Estimates `τ_∞` of a region, with a per-component split.
pub fn leray_density_real(s: &SurfaceModel, region: RealRegion, opts: RealDensityOptions) -> RealDensityReport {
    let empty = RealDensityReport {
        total: Estimate { value: 0.0, stderr: 0.0 },
        components: Vec::new(),
        samples_per_chart: opts.samples,
        seed: opts.seed,
        degenerate: 0,
    };
    if region == RealRegion::Empty || opts.samples == 0 {
        return empty;
    }
    let blocks = opts.samples.div_ceil(BLOCK);
    let jobs: Vec<(usize, usize, u64)> =
        (0..4).flat_map(|f| (0..3).flat_map(move |c| (0..blocks).map(move |b| (f, c, b)))).collect();
    let results: Vec<(Vec<Hit>, u64)> = jobs
        .par_iter()
        .map(|&(f, c, b)| {
            let n = BLOCK.min(opts.samples - b * BLOCK);
            chart_block(s, f, c, b, n, opts.seed)
        })
        .collect();

    // Cluster occupied cells; a cell and its antipode belong to one projective component.
    let mut cells: HashMap<[i32; 4], usize> = HashMap::new();
    let mut hit_cells: Vec<Vec<usize>> = Vec::with_capacity(results.len());
    for (hits, _) in &results {
        let mut ids = Vec::with_capacity(hits.len());
        for h in hits {
            let key = cell_of(&h.point, opts.cell);
            let n = cells.len();
            let id = *cells.entry(key).or_insert(n);
            let neg = cell_of(&h.point.map(|x| -x), opts.cell);
            let n = cells.len();
            cells.entry(neg).or_insert(n);
            ids.push(id);
        }
        hit_cells.push(ids);
    }
    let mut uf = UnionFind((0..cells.len()).collect());
    let offsets: Vec<[i32; 4]> = (0..81)
        .map(|k| [k % 3 - 1, k / 3 % 3 - 1, k / 9 % 3 - 1, k / 27 - 1])
        .filter(|o| o.iter().any(|&d| d != 0))
        .collect();
    for (key, &id) in &cells {
        for o in &offsets {
            let nb = [key[0] + o[0], key[1] + o[1], key[2] + o[2], key[3] + o[3]];
            if let Some(&j) = cells.get(&nb) {
                uf.union(id, j);
            }
        }
        let anti = key.map(|k| -k - 1);
        if let Some(&j) = cells.get(&anti) {
            uf.union(id, j);
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut comp_of_cell = vec![0usize; cells.len()];
    for i in 0..cells.len() {
        let r = uf.find(i);
        let k = roots.iter().position(|&x| x == r).unwrap_or_else(|| {
            roots.push(r);
            roots.len() - 1
        });
        comp_of_cell[i] = k;
    }
    let ncomp = roots.len();

    // Per chart: mean and variance of the per-sample contributions per component.
    let n = opts.samples as f64;
    let mut comp_mean = vec![0.0; ncomp];
    let mut comp_var = vec![0.0; ncomp];
    let (mut tot_mean, mut tot_var) = (0.0, 0.0);
    let mut degenerate = 0;
    for chart in 0..12 {
        let mut sums = vec![0.0; ncomp];
        let mut sq = vec![0.0; ncomp];
        let (mut tsum, mut tsq) = (0.0, 0.0);
        let mut current: Option<u64> = None;
        let mut acc = vec![0.0; ncomp];
        let flush = |acc: &mut Vec<f64>, sums: &mut Vec<f64>, sq: &mut Vec<f64>, tsum: &mut f64, tsq: &mut f64| {
            let t: f64 = acc.iter().sum();
            *tsum += t;
            *tsq += t * t;
            for k in 0..acc.len() {
                sums[k] += acc[k];
                sq[k] += acc[k] * acc[k];
                acc[k] = 0.0;
            }
        };
        for b in 0..blocks as usize {
            let idx = chart * blocks as usize + b;
            let (hits, deg) = &results[idx];
            degenerate += deg;
            for (h, &cell) in hits.iter().zip(&hit_cells[idx]) {
                if current != Some(h.sample) {
                    flush(&mut acc, &mut sums, &mut sq, &mut tsum, &mut tsq);
                    current = Some(h.sample);
                }
                acc[comp_of_cell[cell]] += h.weight;
            }
        }
        flush(&mut acc, &mut sums, &mut sq, &mut tsum, &mut tsq);
        for k in 0..ncomp {
            let m = sums[k] / n;
            comp_mean[k] += m;
            comp_var[k] += (sq[k] / n - m * m).max(0.0) / n;
        }
        let m = tsum / n;
        tot_mean += m;
        tot_var += (tsq / n - m * m).max(0.0) / n;
    }
    let mut components: Vec<Estimate> =
        (0..ncomp).map(|k| Estimate { value: comp_mean[k], stderr: comp_var[k].sqrt() }).collect();
    components.sort_by(|a, b| b.value.total_cmp(&a.value));
    RealDensityReport { total: Estimate { value: tot_mean, stderr: tot_var.sqrt() }, components, degenerate, ..empty }
}
