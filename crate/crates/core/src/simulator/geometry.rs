//! Network snapshots around the typical UE.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::{Geometry, McConfig, MAX_PLACEMENT_ATTEMPTS};
use crate::error::{Error, Result};
use crate::model::PropagationModel;

/// One UE of an interfering cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeSample {
    /// Distance to its own BS.
    pub own_distance: f64,
    /// Distance to the typical UE's serving BS.
    pub typical_bs_distance: f64,
}

impl UeSample {
    /// `(own_distance / typical_bs_distance)^α`, or zero when the UE is closer
    /// to BS 0 than to its own BS.
    pub fn interference_ratio(&self, alpha: f64) -> f64 {
        if self.typical_bs_distance < self.own_distance {
            0.0
        } else {
            (self.own_distance / self.typical_bs_distance).powf(alpha)
        }
    }
}

/// One interfering BS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSample {
    /// Position relative to the typical UE.
    pub position: (f64, f64),
    /// Whether its pilot-`k` UE reuses the typical UE's pilot.
    pub shares_pilot: bool,
    /// Whether the cell may be distorted by the window boundary.
    pub edge: bool,
}

impl CellSample {
    pub fn distance_to_typical_ue(&self) -> f64 {
        self.position.0.hypot(self.position.1)
    }
}

/// A snapshot: the typical UE at the origin, its BS at `(serving_distance, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryRealization {
    pub serving_distance: f64,
    pub cells: Vec<CellSample>,
    /// `k` UEs per cell, cell-major. The first UE of each cell uses the
    /// typical UE's pilot index.
    pub ues: Vec<UeSample>,
    pub k: usize,
}

impl GeometryRealization {
    pub fn cell_ues(&self, j: usize) -> &[UeSample] {
        &self.ues[j * self.k..(j + 1) * self.k]
    }
}

fn rayleigh(rng: &mut ChaCha8Rng, scale: f64) -> f64 {
    let u: f64 = rng.random();
    scale * (-2.0 * (1.0 - u).ln()).sqrt()
}

fn direction(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let t: f64 = rng.random::<f64>() * 2.0 * PI;
    let (s, c) = t.sin_cos();
    (c, s)
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> Result<usize> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| Error::Simulation(e.to_string()))?;
    Ok(d.sample(rng) as usize)
}

/// Draws one snapshot with the geometry selected in `cfg`.
pub fn sample_geometry(
    cfg: &McConfig,
    prop: &PropagationModel,
    rng: &mut ChaCha8Rng,
) -> Result<GeometryRealization> {
    let scale = 1.0 / (2.0 * PI * cfg.lambda).sqrt();
    let window = cfg.window(prop);
    match cfg.geometry {
        Geometry::BsCentric => bs_centric(cfg, scale, window, rng),
        Geometry::UeCentric => ue_centric(cfg, scale, window, rng),
    }
}

fn bs_centric(
    cfg: &McConfig,
    scale: f64,
    window: f64,
    rng: &mut ChaCha8Rng,
) -> Result<GeometryRealization> {
    let k = cfg.k as usize;
    let d0 = rayleigh(rng, scale);
    let n = poisson(rng, cfg.lambda * PI * window * window)?;
    let share = cfg.share_probability();
    let mut cells = Vec::with_capacity(n);
    let mut ues = Vec::with_capacity(n * k);
    for _ in 0..n {
        let r = window * rng.random::<f64>().sqrt();
        let (cx, cy) = direction(rng);
        let (bx, by) = (r * cx, r * cy);
        cells.push(CellSample {
            position: (d0 + bx, by),
            shares_pilot: rng.random::<f64>() < share,
            edge: false,
        });
        for _ in 0..k {
            let d = rayleigh(rng, scale);
            let (ux, uy) = direction(rng);
            ues.push(UeSample {
                own_distance: d,
                typical_bs_distance: (bx + d * ux).hypot(by + d * uy),
            });
        }
    }
    Ok(GeometryRealization {
        serving_distance: d0,
        cells,
        ues,
        k,
    })
}

fn ue_centric(
    cfg: &McConfig,
    scale: f64,
    window: f64,
    rng: &mut ChaCha8Rng,
) -> Result<GeometryRealization> {
    let k = cfg.k as usize;
    let d0 = rayleigh(rng, scale);
    if d0 >= window {
        return Err(Error::Simulation(format!(
            "serving distance {d0} exceeds window radius {window}; enlarge the window"
        )));
    }
    let n = poisson(rng, cfg.lambda * PI * (window * window - d0 * d0))?;
    let mut points = Vec::with_capacity(n + 1);
    points.push((d0, 0.0));
    for _ in 0..n {
        let u: f64 = rng.random();
        let r = (d0 * d0 + u * (window * window - d0 * d0)).sqrt();
        let (cx, cy) = direction(rng);
        points.push((r * cx, r * cy));
    }
    let proposal = 3.0 / cfg.lambda.sqrt();
    let grid = GridIndex::new(&points, window + proposal, 1.0 / cfg.lambda.sqrt());
    let share = cfg.share_probability();
    let mut cells = Vec::with_capacity(n);
    let mut ues = Vec::with_capacity(n * k);
    for (j, &(bx, by)) in points.iter().enumerate().skip(1) {
        cells.push(CellSample {
            position: (bx, by),
            shares_pilot: rng.random::<f64>() < share,
            edge: bx.hypot(by) > window - proposal,
        });
        for _ in 0..k {
            let (ux, uy) = place_in_cell(rng, &grid, &points, j, proposal);
            ues.push(UeSample {
                own_distance: (ux - bx).hypot(uy - by),
                typical_bs_distance: (ux - d0).hypot(uy),
            });
        }
    }
    Ok(GeometryRealization {
        serving_distance: d0,
        cells,
        ues,
        k,
    })
}

/// Uniform point of BS `j`'s Voronoi cell, by rejection from a disk around it.
/// Falls back to the attempted candidate closest to the BS.
fn place_in_cell(
    rng: &mut ChaCha8Rng,
    grid: &GridIndex,
    points: &[(f64, f64)],
    j: usize,
    radius: f64,
) -> (f64, f64) {
    let (bx, by) = points[j];
    let mut fallback = (bx, by);
    let mut fallback_d2 = f64::INFINITY;
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        let r = radius * rng.random::<f64>().sqrt();
        let (cx, cy) = direction(rng);
        let p = (bx + r * cx, by + r * cy);
        let d2 = r * r;
        if !grid.closer_exists(points, p, j, d2) {
            return p;
        }
        if d2 < fallback_d2 {
            fallback_d2 = d2;
            fallback = p;
        }
    }
    fallback
}

/// Uniform bucket grid over `[-half, half]²` for nearest-BS queries.
struct GridIndex {
    half: f64,
    cell: f64,
    n: usize,
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl GridIndex {
    fn new(points: &[(f64, f64)], half: f64, cell: f64) -> Self {
        let n = ((2.0 * half / cell).ceil() as usize).max(1);
        let mut grid = GridIndex {
            half,
            cell,
            n,
            starts: vec![0; n * n + 1],
            items: vec![0; points.len()],
        };
        let ids: Vec<usize> = points
            .iter()
            .map(|&(x, y)| grid.bucket(grid.coord(y)) * n + grid.bucket(grid.coord(x)))
            .collect();
        for &id in &ids {
            grid.starts[id + 1] += 1;
        }
        for i in 0..n * n {
            grid.starts[i + 1] += grid.starts[i];
        }
        let mut fill = grid.starts.clone();
        for (p, &id) in ids.iter().enumerate() {
            grid.items[fill[id] as usize] = p as u32;
            fill[id] += 1;
        }
        grid
    }

    fn coord(&self, v: f64) -> f64 {
        (v + self.half) / self.cell
    }

    fn bucket(&self, c: f64) -> usize {
        (c.max(0.0) as usize).min(self.n - 1)
    }

    /// Whether some point other than `skip` lies strictly within `sqrt(d2)` of `p`.
    fn closer_exists(&self, points: &[(f64, f64)], p: (f64, f64), skip: usize, d2: f64) -> bool {
        let r = d2.sqrt();
        let x0 = self.bucket(self.coord(p.0 - r));
        let x1 = self.bucket(self.coord(p.0 + r));
        let y0 = self.bucket(self.coord(p.1 - r));
        let y1 = self.bucket(self.coord(p.1 + r));
        for gy in y0..=y1 {
            for gx in x0..=x1 {
                let id = gy * self.n + gx;
                for &i in &self.items[self.starts[id] as usize..self.starts[id + 1] as usize] {
                    let i = i as usize;
                    if i == skip {
                        continue;
                    }
                    let (qx, qy) = points[i];
                    let dx = qx - p.0;
                    let dy = qy - p.1;
                    if dx * dx + dy * dy < d2 {
                        return true;
                    }
                }
            }
        }
        false
    }
}
