//! Discrete closed measures, Mather LPs, the (L4) check, Peierls barriers and
//! the selection formula for the vanishing-discount limit.

mod barrier;
mod selection;

pub use barrier::{aubry_set, peierls_barrier, BarrierParams, BarrierTable};
pub use selection::{
    select_u0, verify_largest_subsolution, LargestSubsolutionReport, ScreenedFace, Selection, SelectionParams,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{solve_lp, BasisEntry, LpOptions, LpProblem, LpSolution, SparseMatrix};
use crate::measure::OccupationMeasure;
use crate::model::{partial_l_u0, Model};
use crate::scalar::Real;
use crate::solver::{SchemeParams, Stencil};
use crate::torus::{Grid, VelocityGrid};

/// Default margin for the (L4) verdict.
pub const L4_MARGIN: f64 = 1e-3;

/// `face_tol = 1e-7 (1 + |value|)`.
pub fn default_face_tol(value: f64) -> f64 {
    1e-7 * (1.0 + value.abs())
}

/// Probability measures on the `(node, velocity)` grid that are closed for the
/// one-step transport `x -> x - tau v`, with `L^r` as the cost vector.
///
/// Row `k < n - 1` is the closure constraint of the hat function at node `k`
/// (the last one is implied by the others); row `n - 1` is total mass.
#[derive(Debug, Clone)]
pub struct ClosedMeasurePolytope<T> {
    grid: Grid<T>,
    vgrid: VelocityGrid<T>,
    tau: T,
    a: SparseMatrix,
    b: Vec<f64>,
    lagrangian: Vec<f64>,
    label: String,
}

impl<T: Real> ClosedMeasurePolytope<T> {
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn vgrid(&self) -> &VelocityGrid<T> {
        &self.vgrid
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn variables(&self) -> usize {
        self.a.cols()
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    /// `L^r(x_i, v_j, 0)` in variable order.
    pub fn lagrangian(&self) -> &[f64] {
        &self.lagrangian
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn index(&self, node: usize, vel: usize) -> usize {
        node * self.vgrid.count() + vel
    }

    #[inline]
    pub fn split(&self, k: usize) -> (usize, usize) {
        (k / self.vgrid.count(), k % self.vgrid.count())
    }

    /// Replaces the cost vector by `L^r` of another (frozen) model on the same grid.
    pub fn reprice<M: Model<T> + ?Sized>(&mut self, m_r: &M) {
        self.lagrangian = lagrangian_costs(m_r, &self.grid, &self.vgrid);
        self.label = m_r.label();
    }

    /// `f(x_i, v_j)` for every variable.
    pub fn sample(&self, f: impl Fn(T, T) -> T) -> Vec<f64> {
        let nv = self.vgrid.count();
        (0..self.variables())
            .map(|k| f(self.grid.node(k / nv), self.vgrid.velocity(k % nv)).as_f64())
            .collect()
    }

    /// `dL/du(x_i, v_j, 0)` for every variable.
    pub fn dl_du0<M: Model<T> + ?Sized>(&self, m: &M) -> Result<Vec<f64>> {
        let nv = self.vgrid.count();
        (0..self.variables())
            .map(|k| partial_l_u0(m, self.grid.node(k / nv), self.vgrid.velocity(k % nv)).map(|v| v.as_f64()))
            .collect()
    }

    fn measure(&self, x: &[f64], origin: String) -> Result<OccupationMeasure<T>> {
        let w = x.iter().map(|&v| T::lit(v.max(0.0))).collect();
        OccupationMeasure::new(self.grid, self.vgrid, w, origin)
    }

    /// Basis made of the rest Dirac at the cheapest node plus closure artificials.
    fn crash_basis(&self) -> Vec<BasisEntry> {
        let n = self.grid.points();
        let zero = self.vgrid.zero_index();
        let best = (0..n)
            .min_by(|&a, &b| self.lagrangian[self.index(a, zero)].total_cmp(&self.lagrangian[self.index(b, zero)]))
            .unwrap_or(0);
        let mut basis: Vec<BasisEntry> = (0..n - 1).map(BasisEntry::Artificial).collect();
        basis.push(BasisEntry::Structural(self.index(best, zero)));
        basis
    }
}

fn lagrangian_costs<T: Real, M: Model<T> + ?Sized>(m_r: &M, grid: &Grid<T>, vgrid: &VelocityGrid<T>) -> Vec<f64> {
    let vs = vgrid.velocities();
    grid.nodes()
        .flat_map(|x| vs.iter().map(move |&v| m_r.lagrangian(x, v, T::zero()).as_f64()).collect::<Vec<_>>())
        .collect()
}

/// Builds the discrete closed-measure polytope and prices it with `L^r(., ., 0)`.
pub fn build_polytope<T: Real, M: Model<T> + ?Sized>(
    m_r: &M,
    grid: &Grid<T>,
    vgrid: &VelocityGrid<T>,
    tau: T,
) -> Result<ClosedMeasurePolytope<T>> {
    let sp = SchemeParams::new(tau, *vgrid, T::one(), 1);
    sp.validate(grid)?;
    let stencil = Stencil::new(grid, &sp);
    let n = grid.points();
    let nv = vgrid.count();
    let inv_tau = 1.0 / tau.as_f64();
    let mass_row = n - 1;
    let mut a = SparseMatrix::new(n);
    let mut entries = Vec::with_capacity(4);
    for i in 0..n {
        for j in 0..nv {
            let cell = stencil.cell(i, j);
            entries.clear();
            for (r, v) in [
                (cell.left, cell.w_left.as_f64() * inv_tau),
                (cell.right, cell.w_right.as_f64() * inv_tau),
                (i, -inv_tau),
            ] {
                if r != mass_row {
                    entries.push((r, v));
                }
            }
            entries.push((mass_row, 1.0));
            a.push_column(&entries);
        }
    }
    let mut b = vec![0.0; n];
    b[mass_row] = 1.0;
    Ok(ClosedMeasurePolytope {
        grid: *grid,
        vgrid: *vgrid,
        tau,
        a,
        b,
        lagrangian: lagrangian_costs(m_r, grid, vgrid),
        label: m_r.label(),
    })
}

#[derive(Debug, Clone)]
pub struct MatherSolution<T> {
    /// `min sum mu L^r`, approximately `-c(H^r)`.
    pub value: T,
    pub measure: OccupationMeasure<T>,
    pub lp: LpSolution,
}

/// Minimizes the average of `L^r` over the closed-measure polytope.
pub fn solve_mather_lp<T: Real>(p: &ClosedMeasurePolytope<T>) -> Result<MatherSolution<T>> {
    let problem = LpProblem { a: p.a.clone(), b: p.b.clone(), c: p.lagrangian.clone() };
    let crash = p.crash_basis();
    let lp = solve_lp(&problem, Some(&crash), &LpOptions::default())?;
    let measure = p.measure(&lp.x, format!("Mather LP, {}", p.label))?;
    Ok(MatherSolution { value: T::lit(lp.objective), measure, lp })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone)]
pub struct FaceOptimum<T> {
    pub value: T,
    pub measure: OccupationMeasure<T>,
    /// Simplex pivots summed over the pricing rounds.
    pub iterations: usize,
    /// Columns in the final restricted problem.
    pub columns: usize,
}

/// Initial column screen, relative to `1 + |value|`, on the Mather reduced costs.
const FACE_SEED_SCREEN: f64 = 1e-4;

/// Columns added per pricing round.
const PRICING_BATCH: usize = 512;

/// Optimizes `sum mu objective` over closed measures with
/// `sum mu L^r <= value + face_tol` (default [`default_face_tol`]).
///
/// Solved by column generation: the restricted problem starts from columns with
/// small Mather reduced cost, and columns priced out negative by its duals are
/// added until none remain.
pub fn optimal_face_optimize<T: Real>(
    p: &ClosedMeasurePolytope<T>,
    mather: &MatherSolution<T>,
    objective: &[f64],
    sense: Sense,
    face_tol: Option<f64>,
) -> Result<FaceOptimum<T>> {
    let n = p.variables();
    if objective.len() != n {
        return Err(Error::LpMalformed(format!("objective has {} entries, expected {n}", objective.len())));
    }
    let value = mather.value.as_f64();
    let face_tol = face_tol.unwrap_or_else(|| default_face_tol(value));
    let m = p.rows();
    let sign = match sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let cost = |k: usize| sign * objective[k];
    let mut b = p.b.clone();
    b.push(value + face_tol);

    let cut = FACE_SEED_SCREEN * (1.0 + value.abs());
    let mut active: Vec<usize> = (0..n).filter(|&k| mather.lp.reduced_costs[k] <= cut).collect();
    let mut chosen = vec![false; n];
    for &k in &active {
        chosen[k] = true;
    }
    for e in &mather.lp.basis {
        if let BasisEntry::Structural(k) = *e {
            if !chosen[k] {
                chosen[k] = true;
                active.push(k);
            }
        }
    }
    // local column 0 is the face slack, local j >= 1 is active[j - 1]
    let mut warm: Vec<BasisEntry> = Vec::with_capacity(m + 1);
    let local: std::collections::HashMap<usize, usize> = active.iter().enumerate().map(|(j, &k)| (k, j + 1)).collect();
    for e in &mather.lp.basis {
        warm.push(match *e {
            BasisEntry::Structural(k) => BasisEntry::Structural(local[&k]),
            a => a,
        });
    }
    warm.push(BasisEntry::Structural(0));

    let mut a = SparseMatrix::new(m + 1);
    a.push_column(&[(m, 1.0)]);
    let mut c = vec![0.0];
    let mut iterations = 0;
    let mut added = 0;
    let mut col = Vec::with_capacity(5);
    loop {
        for &k in &active[added..] {
            col.clear();
            col.extend(p.a.column(k));
            col.push((m, p.lagrangian[k]));
            a.push_column(&col);
            c.push(cost(k));
        }
        added = active.len();
        let problem = LpProblem { a: a.clone(), b: b.clone(), c: c.clone() };
        let lp = match solve_lp(&problem, Some(&warm), &LpOptions::default()) {
            Err(Error::LpInfeasible) => return Err(Error::FaceInfeasible { face_tol }),
            other => other?,
        };
        iterations += lp.iterations;
        let y = &lp.duals;
        let tol = LpOptions::default().opt_tol * (1.0 + y.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        let mut priced: Vec<(f64, usize)> = (0..n)
            .filter(|&k| !chosen[k])
            .filter_map(|k| {
                let mut d = cost(k) - y[m] * p.lagrangian[k];
                for (r, v) in p.a.column(k) {
                    d -= y[r] * v;
                }
                (d < -tol).then_some((d, k))
            })
            .collect();
        if priced.is_empty() {
            let mut x = vec![0.0; n];
            for (j, &k) in active.iter().enumerate() {
                x[k] = lp.x[j + 1];
            }
            let opt: f64 = x.iter().zip(objective).map(|(a, b)| a * b).sum();
            let measure = p.measure(&x, format!("optimal face ({sense:?}), {}", p.label))?;
            return Ok(FaceOptimum { value: T::lit(opt), measure, iterations, columns: active.len() });
        }
        priced.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(_, k) in priced.iter().take(PRICING_BATCH) {
            chosen[k] = true;
            active.push(k);
        }
        warm = lp.basis;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum L4Verdict {
    Holds,
    Fails,
    Marginal,
}

/// Serialized as `{lp_value, face_max_dLdu, verdict}` plus the margin used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L4Report {
    pub lp_value: f64,
    #[serde(rename = "face_max_dLdu")]
    pub face_max_dl_du: f64,
    pub verdict: L4Verdict,
    pub margin: f64,
}

/// Largest `sum mu dL/du(., ., 0)` over the Mather face; (L4) holds when it is
/// at most `-margin`, fails when it is nonnegative up to LP tolerance.
pub fn check_l4<T: Real, M: Model<T> + ?Sized>(
    m: &M,
    p: &ClosedMeasurePolytope<T>,
    mather: &MatherSolution<T>,
    margin: f64,
) -> Result<L4Report> {
    let g = p.dl_du0(m)?;
    let face = optimal_face_optimize(p, mather, &g, Sense::Max, None)?;
    let face_max = face.value.as_f64();
    let verdict = if face_max <= -margin {
        L4Verdict::Holds
    } else if face_max >= -1e-7 {
        L4Verdict::Fails
    } else {
        L4Verdict::Marginal
    };
    Ok(L4Report { lp_value: mather.value.as_f64(), face_max_dl_du: face_max, verdict, margin })
}
