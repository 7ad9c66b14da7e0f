use std::collections::HashMap;

use crate::error::Result;
use crate::initial_data::SaddleFrame;
use crate::polyline::{Point, Polyline};
use crate::spectral::{grid_to_spectral, refine_evaluate, GridField, MeanPolicy};

/// Rectangle `[alpha.0, alpha.1] × [beta.0, beta.1]` in the `(α, β)` frame of a saddle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbWindow {
    pub frame: SaddleFrame,
    pub alpha: (f64, f64),
    pub beta: (f64, f64),
}

impl AbWindow {
    pub fn centered(frame: SaddleFrame, alpha_half: f64, beta_half: f64) -> Self {
        Self {
            frame,
            alpha: (-alpha_half, alpha_half),
            beta: (-beta_half, beta_half),
        }
    }

    pub fn contains(&self, a: Point) -> bool {
        a[0] >= self.alpha.0 && a[0] <= self.alpha.1 && a[1] >= self.beta.0 && a[1] <= self.beta.1
    }

    fn corners_xy(&self) -> [Point; 4] {
        [
            [self.alpha.0, self.beta.0],
            [self.alpha.1, self.beta.0],
            [self.alpha.1, self.beta.1],
            [self.alpha.0, self.beta.1],
        ]
        .map(|a| self.frame.from_alpha_beta(a))
    }
}

/// Level curves of `f` inside `window` on the factor-4 refined grid, returned
/// as closed polylines in `(α, β)` coordinates.
///
/// The mean of `f` is kept, so `level` refers to the actual field values.
pub fn extract_level_curve(f: &GridField, level: f64, window: &AbWindow) -> Result<Vec<Polyline>> {
    let fine = refine_with_mean(f)?;
    Ok(extract_level_curve_refined(&fine, level, window))
}

pub(crate) fn refine_with_mean(f: &GridField) -> Result<GridField> {
    let mean = f.mean();
    let s = grid_to_spectral(f, MeanPolicy::Subtract)?;
    let fine = refine_evaluate(&s, 4)?;
    let n = fine.n();
    GridField::new(n, fine.into_values().into_iter().map(|v| v + mean).collect())
}

/// Periodic grid patch covering the window, with nodes outside the window
/// pushed below `level` so every contour closes.
struct Patch {
    i0: i64,
    j0: i64,
    nx: usize,
    ny: usize,
    h: f64,
    values: Vec<f64>,
}

impl Patch {
    fn new(fine: &GridField, level: f64, window: &AbWindow) -> Self {
        let m = fine.n() as i64;
        let h = fine.spacing();
        let corners = window.corners_xy();
        let xs = corners.iter().map(|c| c[0]);
        let ys = corners.iter().map(|c| c[1]);
        let (xmin, xmax) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        let (ymin, ymax) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
        let i0 = (xmin / h).floor() as i64 - 1;
        let j0 = (ymin / h).floor() as i64 - 1;
        let nx = ((xmax / h).ceil() as i64 + 1 - i0 + 1) as usize;
        let ny = ((ymax / h).ceil() as i64 + 1 - j0 + 1) as usize;
        let pad = level - 1.0 - (level.abs() + fine.max_abs());
        let mut values = vec![pad; nx * ny];
        for b in 0..ny {
            for a in 0..nx {
                let (gi, gj) = (i0 + a as i64, j0 + b as i64);
                let ab = window.frame.to_alpha_beta([gi as f64 * h, gj as f64 * h]);
                let border = a == 0 || b == 0 || a + 1 == nx || b + 1 == ny;
                if !border && window.contains(ab) {
                    values[b * nx + a] = fine.get(gi.rem_euclid(m) as usize, gj.rem_euclid(m) as usize);
                }
            }
        }
        Self { i0, j0, nx, ny, h, values }
    }

    #[inline]
    fn at(&self, a: usize, b: usize) -> f64 {
        self.values[b * self.nx + a]
    }

    fn node_xy(&self, a: f64, b: f64) -> Point {
        [(self.i0 as f64 + a) * self.h, (self.j0 as f64 + b) * self.h]
    }
}

/// Edge identifiers: horizontal edge from node `(a, b)` is `2k`, vertical `2k + 1`.
fn edge_point(p: &Patch, id: usize, level: f64) -> Point {
    let k = id / 2;
    let (a, b) = (k % p.nx, k / p.nx);
    let (a2, b2) = if id % 2 == 0 { (a + 1, b) } else { (a, b + 1) };
    let (v0, v1) = (p.at(a, b), p.at(a2, b2));
    let s = ((level - v0) / (v1 - v0)).clamp(0.0, 1.0);
    p.node_xy(a as f64 + s * (a2 - a) as f64, b as f64 + s * (b2 - b) as f64)
}

fn marching_segments(p: &Patch, level: f64) -> Vec<(usize, usize)> {
    let nx = p.nx;
    let mut segs = Vec::new();
    for b in 0..p.ny - 1 {
        for a in 0..nx - 1 {
            let c = [p.at(a, b), p.at(a + 1, b), p.at(a + 1, b + 1), p.at(a, b + 1)];
            let bits = c
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &v)| acc | (((v >= level) as u8) << i));
            if bits == 0 || bits == 15 {
                continue;
            }
            // bottom, right, top, left
            let e = [
                2 * (b * nx + a),
                2 * (b * nx + a + 1) + 1,
                2 * ((b + 1) * nx + a),
                2 * (b * nx + a) + 1,
            ];
            let around = |k: usize| match k {
                0 => (e[3], e[0]),
                1 => (e[0], e[1]),
                2 => (e[1], e[2]),
                _ => (e[2], e[3]),
            };
            let center_in = c.iter().sum::<f64>() * 0.25 >= level;
            match bits {
                1 | 14 => segs.push(around(0)),
                2 | 13 => segs.push(around(1)),
                4 | 11 => segs.push(around(2)),
                8 | 7 => segs.push(around(3)),
                3 | 12 => segs.push((e[3], e[1])),
                6 | 9 => segs.push((e[0], e[2])),
                5 => {
                    let (x, y) = if center_in { (1, 3) } else { (0, 2) };
                    segs.push(around(x));
                    segs.push(around(y));
                }
                10 => {
                    let (x, y) = if center_in { (0, 2) } else { (1, 3) };
                    segs.push(around(x));
                    segs.push(around(y));
                }
                _ => unreachable!(),
            }
        }
    }
    segs
}

fn join_loops(segs: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::with_capacity(2 * segs.len());
    for &(a, b) in segs {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut starts: Vec<usize> = adj.keys().copied().collect();
    starts.sort_unstable();
    let mut seen = std::collections::HashSet::with_capacity(adj.len());
    let mut loops = Vec::new();
    for s in starts {
        if seen.contains(&s) {
            continue;
        }
        let mut path = vec![s];
        seen.insert(s);
        let mut prev = usize::MAX;
        let mut cur = s;
        loop {
            let next = adj[&cur].iter().copied().find(|&x| x != prev && !seen.contains(&x));
            match next {
                Some(x) => {
                    seen.insert(x);
                    path.push(x);
                    prev = cur;
                    cur = x;
                }
                None => break,
            }
        }
        loops.push(path);
    }
    loops
}

/// Same as [`extract_level_curve`] on an already refined grid.
pub fn extract_level_curve_refined(fine: &GridField, level: f64, window: &AbWindow) -> Vec<Polyline> {
    let patch = Patch::new(fine, level, window);
    let segs = marching_segments(&patch, level);
    let max_seg = 2.0 * patch.h;
    join_loops(&segs)
        .into_iter()
        .map(|ids| {
            let pts = ids
                .into_iter()
                .map(|id| window.frame.to_alpha_beta(edge_point(&patch, id, level)))
                .collect();
            Polyline::new(pts, true, max_seg)
        })
        .filter(|p| p.len() >= 3)
        .collect()
}
