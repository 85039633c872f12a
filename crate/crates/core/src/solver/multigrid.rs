//! Geometric multigrid V-cycle used as a preconditioner.
//!
//! Coarse levels rediscretize the same polygon at twice the spacing. They
//! share the origin of the fine grid, so coarse node `(I, J)` sits on fine
//! node `(2I, 2J)`. Prolongation is bilinear with zero correction outside the
//! interior; restriction is its transpose, which for the `h²`-scaled rows is
//! exactly full weighting.

use super::grid::MaskedGrid;
use super::linear::{assemble, System};

const NONE: u32 = u32::MAX;
/// Below this many unknowns a level is solved directly.
const DIRECT_SIZE: usize = 2500;
const MIN_COARSENING: f64 = 0.6;
const SMOOTHING_SWEEPS: usize = 2;

struct Transfer {
    /// For each fine node, the coarse nodes and weights interpolating it.
    weights: Vec<[(u32, f64); 4]>,
    coarse_len: usize,
}

impl Transfer {
    fn new(fine: &MaskedGrid, coarse: &MaskedGrid) -> Self {
        let coarse_index = |i: usize, j: usize| {
            (i < coarse.nx() && j < coarse.ny())
                .then(|| coarse.index_of(i, j))
                .flatten()
        };
        let weights = (0..fine.len())
            .map(|k| {
                let (i, j) = fine.node_ij(k);
                let xs: &[(usize, f64)] = if i % 2 == 0 {
                    &[(i / 2, 1.0)]
                } else {
                    &[(i / 2, 0.5), (i / 2 + 1, 0.5)]
                };
                let ys: &[(usize, f64)] = if j % 2 == 0 {
                    &[(j / 2, 1.0)]
                } else {
                    &[(j / 2, 0.5), (j / 2 + 1, 0.5)]
                };
                let mut out = [(NONE, 0.0); 4];
                let mut n = 0;
                for &(ci, wx) in xs {
                    for &(cj, wy) in ys {
                        if let Some(c) = coarse_index(ci, cj) {
                            out[n] = (c as u32, wx * wy);
                            n += 1;
                        }
                    }
                }
                out
            })
            .collect();
        Transfer {
            weights,
            coarse_len: coarse.len(),
        }
    }

    fn restrict(&self, r: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (k, w) in self.weights.iter().enumerate() {
            for &(c, wt) in w {
                if c != NONE {
                    out[c as usize] += wt * r[k];
                }
            }
        }
    }

    fn prolong_add(&self, xc: &[f64], x: &mut [f64]) {
        for (k, w) in self.weights.iter().enumerate() {
            let mut v = 0.0;
            for &(c, wt) in w {
                if c != NONE {
                    v += wt * xc[c as usize];
                }
            }
            x[k] += v;
        }
    }
}

/// LU factors of a banded matrix without pivoting (the level matrices are
/// diagonally dominant M-matrices).
struct BandedLu {
    n: usize,
    bw: usize,
    /// Row-major band storage, `2 bw + 1` entries per row, diagonal at `bw`.
    band: Vec<f64>,
}

impl BandedLu {
    fn new(a: &System) -> Self {
        let n = a.diag.len();
        let mut bw = 0;
        for k in 0..n {
            for &j in &a.nbr[k] {
                if j != NONE {
                    bw = bw.max((j as usize).abs_diff(k));
                }
            }
        }
        let w = 2 * bw + 1;
        let mut band = vec![0.0; n * w];
        for k in 0..n {
            band[k * w + bw] = a.diag[k];
            for d in 0..4 {
                let j = a.nbr[k][d];
                if j != NONE {
                    band[k * w + bw + j as usize - k] = -a.coef[k][d];
                }
            }
        }
        for p in 0..n {
            let pivot = band[p * w + bw];
            for i in p + 1..(p + bw + 1).min(n) {
                let f = band[i * w + bw + p - i] / pivot;
                if f == 0.0 {
                    continue;
                }
                band[i * w + bw + p - i] = f;
                for j in p + 1..(p + bw + 1).min(n) {
                    band[i * w + bw + j - i] -= f * band[p * w + bw + j - p];
                }
            }
        }
        BandedLu { n, bw, band }
    }

    fn solve(&self, b: &[f64], x: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, 2 * self.bw + 1);
        x.copy_from_slice(b);
        for i in 0..n {
            let mut v = x[i];
            for p in i.saturating_sub(bw)..i {
                v -= self.band[i * w + bw + p - i] * x[p];
            }
            x[i] = v;
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for j in i + 1..(i + bw + 1).min(n) {
                v -= self.band[i * w + bw + j - i] * x[j];
            }
            x[i] = v / self.band[i * w + bw];
        }
    }
}

struct Level {
    system: System,
    /// Transfer to the next coarser level.
    transfer: Option<Transfer>,
}

pub(crate) struct Multigrid {
    /// Coarse levels only; the finest operator is passed to [`Multigrid::apply`].
    levels: Vec<Level>,
    fine_transfer: Transfer,
    direct: BandedLu,
}

fn gauss_seidel(a: &System, b: &[f64], x: &mut [f64], forward: bool) {
    let n = a.diag.len();
    let mut step = |k: usize| {
        let mut s = b[k];
        for d in 0..4 {
            let j = a.nbr[k][d];
            if j != NONE {
                s += a.coef[k][d] * x[j as usize];
            }
        }
        x[k] = s / a.diag[k];
    };
    if forward {
        (0..n).for_each(&mut step);
    } else {
        (0..n).rev().for_each(&mut step);
    }
}

fn residual(a: &System, b: &[f64], x: &[f64], r: &mut [f64]) {
    for k in 0..a.diag.len() {
        let mut s = b[k] - a.diag[k] * x[k];
        for d in 0..4 {
            let j = a.nbr[k][d];
            if j != NONE {
                s += a.coef[k][d] * x[j as usize];
            }
        }
        r[k] = s;
    }
}

impl Multigrid {
    /// Builds the hierarchy below `fine`, or `None` when the fine level is
    /// already small enough for direct or single-level methods.
    pub fn new(fine: &MaskedGrid) -> Option<Self> {
        if fine.len() <= DIRECT_SIZE {
            return None;
        }
        let zero = |_| 0.0;
        let mut grids: Vec<MaskedGrid> = Vec::new();
        let mut transfers = Vec::new();
        let mut current_len = fine.len();
        loop {
            let prev = grids.last().unwrap_or(fine);
            let Ok(coarse) = MaskedGrid::build_unchecked(prev.polygon(), 2.0 * prev.h()) else {
                break;
            };
            if coarse.len() as f64 > MIN_COARSENING * current_len as f64 {
                break;
            }
            transfers.push(Transfer::new(prev, &coarse));
            current_len = coarse.len();
            grids.push(coarse);
            if current_len <= DIRECT_SIZE {
                break;
            }
        }
        if grids.is_empty() || current_len > 4 * DIRECT_SIZE {
            return None;
        }
        let mut transfers = transfers.into_iter();
        let fine_transfer = transfers.next()?;
        let mut levels: Vec<Level> = grids
            .iter()
            .map(|g| Level {
                system: assemble(g, 0.0, &zero),
                transfer: None,
            })
            .collect();
        for (l, t) in transfers.enumerate() {
            levels[l].transfer = Some(t);
        }
        let direct = BandedLu::new(&levels.last()?.system);
        Some(Multigrid {
            levels,
            fine_transfer,
            direct,
        })
    }

    #[cfg(test)]
    pub fn depth(&self) -> usize {
        self.levels.len() + 1
    }

    /// One V-cycle for `A z = r` from `z = 0`.
    pub fn apply(&self, a: &System, r: &[f64], z: &mut [f64]) {
        self.cycle(a, &self.fine_transfer, 0, r, z);
    }

    fn cycle(&self, a: &System, transfer: &Transfer, next: usize, b: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|v| *v = 0.0);
        for _ in 0..SMOOTHING_SWEEPS {
            gauss_seidel(a, b, x, true);
        }
        let mut r = vec![0.0; b.len()];
        residual(a, b, x, &mut r);
        let mut bc = vec![0.0; transfer.coarse_len];
        transfer.restrict(&r, &mut bc);
        let mut xc = vec![0.0; transfer.coarse_len];
        let level = &self.levels[next];
        match &level.transfer {
            Some(t) => self.cycle(&level.system, t, next + 1, &bc, &mut xc),
            None => self.direct.solve(&bc, &mut xc),
        }
        transfer.prolong_add(&xc, x);
        for _ in 0..SMOOTHING_SWEEPS {
            gauss_seidel(a, b, x, false);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexPolygon;

    #[test]
    fn banded_lu_solves_exactly() {
        let p = ConvexPolygon::regular(9, 1.0).unwrap();
        let g = MaskedGrid::build(&p, 1.0 / 16.0).unwrap();
        let a = assemble(&g, 1.0, &|_| 0.0);
        let lu = BandedLu::new(&a);
        let mut x = vec![0.0; a.diag.len()];
        lu.solve(&a.rhs, &mut x);
        let mut r = vec![0.0; x.len()];
        residual(&a, &a.rhs, &x, &mut r);
        assert!(r.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn v_cycle_contracts() {
        let p = ConvexPolygon::regular(64, 1.0).unwrap();
        let g = MaskedGrid::build(&p, 1.0 / 64.0).unwrap();
        let a = assemble(&g, 1.0, &|_| 0.0);
        let mg = Multigrid::new(&g).expect("hierarchy");
        assert!(mg.depth() >= 2);
        // Stationary iteration x += V(b - A x) should converge quickly.
        let n = a.diag.len();
        let mut x = vec![0.0; n];
        let mut r = a.rhs.clone();
        let mut z = vec![0.0; n];
        let r0: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        for _ in 0..10 {
            mg.apply(&a, &r, &mut z);
            for k in 0..n {
                x[k] += z[k];
            }
            residual(&a, &a.rhs, &x, &mut r);
        }
        let r1: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(r1 < 1e-6 * r0, "{}", r1 / r0);
    }
}
