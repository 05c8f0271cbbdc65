//! Decision layer: output sigmoid, spike mapping, windowed collision
//! warning, DBSCAN over attention pixels, and population-coded targets.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::params::SpikeParams;

/// `1 / (1 + exp(-|u| / n))`, in `[0.5, 1)`.
pub fn membrane_to_output(u: f64, n: usize) -> f64 {
    1.0 / (1.0 + (-u.abs() / n as f64).exp())
}

/// `floor(exp(scale * (out - threshold)))`, saturating at `u64::MAX`.
pub fn output_to_spikes(out: f64, scale: f64, threshold: f64) -> u64 {
    (scale * (out - threshold)).exp().floor() as u64
}

#[derive(Debug, Clone)]
pub struct SpikeState {
    window: VecDeque<u64>,
    params: SpikeParams,
    dt: f64,
}

impl SpikeState {
    pub fn new(params: SpikeParams, dt: f64) -> Self {
        Self {
            window: VecDeque::with_capacity(params.window + 1),
            params,
            dt,
        }
    }

    pub fn params(&self) -> SpikeParams {
        self.params
    }

    /// Previous spike counts, oldest first.
    pub fn window(&self) -> impl Iterator<Item = u64> + '_ {
        self.window.iter().copied()
    }

    /// Spike frequency over the previous `N_t` samples plus `spike`, always
    /// divided by the full window duration.
    pub fn frequency_with(&self, spike: u64) -> f64 {
        let total: u64 = self.window.iter().copied().fold(spike, u64::saturating_add);
        total as f64 / (self.params.window as f64 * self.dt)
    }

    /// Records `spike` and reports whether the frequency reaches `T_c`.
    pub fn collision_warning(&mut self, spike: u64) -> bool {
        let warn = self.frequency_with(spike) >= self.params.warn_threshold;
        self.window.push_back(spike);
        while self.window.len() > self.params.window {
            self.window.pop_front();
        }
        warn
    }
}

/// Pixel coordinates `(x, y)`.
pub type Point = (usize, usize);

/// All pixels where `mask > 0`, in row-major order.
pub fn mask_pixels(mask: &Field) -> Vec<Point> {
    mask.iter_xy()
        .filter(|&(_, _, v)| v > 0.0)
        .map(|(x, y, _)| (x, y))
        .collect()
}

fn within(a: Point, b: Point, eps2: f64) -> bool {
    let dx = a.0 as f64 - b.0 as f64;
    let dy = a.1 as f64 - b.1 as f64;
    dx * dx + dy * dy <= eps2
}

struct Grid {
    cell: f64,
    reach: i64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl Grid {
    fn new(points: &[Point], eps: f64) -> Self {
        let cell = eps.max(1.0);
        let reach = (eps / cell).ceil() as i64;
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, &p) in points.iter().enumerate() {
            buckets.entry(Self::key(p, cell)).or_default().push(i);
        }
        Self {
            cell,
            reach,
            buckets,
        }
    }

    fn key(p: Point, cell: f64) -> (i64, i64) {
        (
            (p.0 as f64 / cell).floor() as i64,
            (p.1 as f64 / cell).floor() as i64,
        )
    }

    /// Indices within `eps` of `points[i]`, itself included, ascending.
    fn neighbors(&self, points: &[Point], i: usize, eps2: f64) -> Vec<usize> {
        let (cx, cy) = Self::key(points[i], self.cell);
        let mut out = Vec::new();
        for gy in cy - self.reach..=cy + self.reach {
            for gx in cx - self.reach..=cx + self.reach {
                if let Some(bucket) = self.buckets.get(&(gx, gy)) {
                    out.extend(
                        bucket
                            .iter()
                            .copied()
                            .filter(|&j| within(points[i], points[j], eps2)),
                    );
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// DBSCAN with Euclidean distance `<= eps`; a point counts as its own
/// neighbor. Points are deduplicated and visited in row-major order, so the
/// labeling does not depend on input order. Noise is dropped.
pub fn cluster_targets(points: &[Point], eps: f64, min_pts: usize) -> Vec<Vec<Point>> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by_key(|&(x, y)| (y, x));
    pts.dedup();
    if pts.is_empty() {
        return Vec::new();
    }

    let eps2 = eps * eps;
    let grid = Grid::new(&pts, eps);
    let mut label: Vec<Option<usize>> = vec![None; pts.len()];
    let mut visited = vec![false; pts.len()];
    let mut clusters: Vec<Vec<usize>> = Vec::new();

    for start in 0..pts.len() {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let seeds = grid.neighbors(&pts, start, eps2);
        if seeds.len() < min_pts {
            continue;
        }
        let id = clusters.len();
        let mut members = Vec::new();
        label[start] = Some(id);
        members.push(start);
        let mut queue: VecDeque<usize> = seeds.into();
        while let Some(j) = queue.pop_front() {
            if label[j].is_none() {
                label[j] = Some(id);
                members.push(j);
            }
            if visited[j] {
                continue;
            }
            visited[j] = true;
            let nb = grid.neighbors(&pts, j, eps2);
            if nb.len() >= min_pts {
                queue.extend(nb);
            }
        }
        clusters.push(members);
    }

    clusters
        .into_iter()
        .map(|mut m| {
            m.sort_unstable();
            m.into_iter().map(|i| pts[i]).collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetEstimate {
    pub x: f64,
    pub y: f64,
    /// Population-coded direction in radians.
    pub phi: f64,
    pub energy: f64,
    pub member_count: usize,
    #[serde(skip)]
    pub members: Vec<Point>,
}

impl TargetEstimate {
    /// `(x_min, y_min, x_max, y_max)` of the members.
    pub fn bounding_box(&self) -> (usize, usize, usize, usize) {
        let mut b = (usize::MAX, usize::MAX, 0, 0);
        for &(x, y) in &self.members {
            b = (b.0.min(x), b.1.min(y), b.2.max(x), b.3.max(y));
        }
        b
    }

    pub fn mean_member_energy(&self, v: &Field) -> f64 {
        self.members.iter().map(|&(x, y)| v.get(x, y)).sum::<f64>() / self.members.len() as f64
    }
}

/// Vector mean of `(V cos φ̂, V sin φ̂)` over the cluster; direction is
/// `atan2(V_Y, V_X)`.
pub fn population_code(cluster: &[Point], v: &Field, phi_hat: &Field) -> Result<TargetEstimate> {
    if cluster.is_empty() {
        return Err(Error::Empty("cluster"));
    }
    let n = cluster.len() as f64;
    let (mut vx, mut vy, mut cx, mut cy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in cluster {
        let (e, a) = (v.get(x, y), phi_hat.get(x, y));
        vx += e * a.cos();
        vy += e * a.sin();
        cx += x as f64;
        cy += y as f64;
    }
    let (vx, vy) = (vx / n, vy / n);
    Ok(TargetEstimate {
        x: cx / n,
        y: cy / n,
        phi: vy.atan2(vx),
        energy: vx.hypot(vy),
        member_count: cluster.len(),
        members: cluster.to_vec(),
    })
}
