//! The selection formula
//! `u0(x) = inf over Mather measures of int h(y, x) dL/du dmu / int dL/du dmu`
//! and checks that a candidate is the largest constrained subsolution.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{solve_lp, BasisEntry, LpOptions, LpProblem, SparseMatrix};
use crate::model::{Frozen, Model};
use crate::scalar::Real;
use crate::solver::{Operator, SchemeParams};
use crate::torus::GridFunction;

use super::{default_face_tol, BarrierTable, ClosedMeasurePolytope, MatherSolution, L4_MARGIN};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionParams {
    /// (L4) must hold with this margin.
    pub margin: f64,
    /// Face slack; `None` means [`default_face_tol`].
    pub face_tol: Option<f64>,
    /// Columns with Mather reduced cost above `screen (1 + |value|)` are left out;
    /// face measures put at most `face_tol / screen` mass on them.
    pub screen: f64,
}

impl Default for SelectionParams {
    fn default() -> Self {
        Self { margin: L4_MARGIN, face_tol: None, screen: 1e-4 }
    }
}

/// The Mather face restricted to columns whose reduced cost is near zero.
///
/// Any optimal measure is supported on zero reduced cost columns, so the
/// restriction only drops near-optimal measures with tiny off-support mass.
#[derive(Debug, Clone)]
pub struct ScreenedFace {
    /// Polytope variable index of each kept column.
    pub columns: Vec<usize>,
    /// Grid node of each kept column.
    pub nodes: Vec<usize>,
    lagrangian: Vec<f64>,
    /// Closure rows touched by the kept columns, as local sparse columns.
    closure: Vec<Vec<(usize, f64)>>,
    closure_rows: usize,
    bound: f64,
}

impl ScreenedFace {
    pub fn new<T: Real>(
        p: &ClosedMeasurePolytope<T>,
        mather: &MatherSolution<T>,
        screen: f64,
        face_tol: Option<f64>,
    ) -> Self {
        let value = mather.value.as_f64();
        let cutoff = screen * (1.0 + value.abs());
        let mass_row = p.rows() - 1;
        let columns: Vec<usize> =
            (0..p.variables()).filter(|&k| mather.lp.reduced_costs[k] <= cutoff).collect();
        let mut local: BTreeMap<usize, usize> = BTreeMap::new();
        let mut closure = Vec::with_capacity(columns.len());
        for &k in &columns {
            let mut col = Vec::new();
            for (r, v) in p.matrix().column(k) {
                if r == mass_row {
                    continue;
                }
                let next = local.len();
                let lr = *local.entry(r).or_insert(next);
                col.push((lr, v));
            }
            closure.push(col);
        }
        Self {
            nodes: columns.iter().map(|&k| p.split(k).0).collect(),
            lagrangian: columns.iter().map(|&k| p.lagrangian()[k]).collect(),
            columns,
            closure,
            closure_rows: local.len(),
            bound: value + face_tol.unwrap_or_else(|| default_face_tol(value)),
        }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Distinct grid nodes carrying kept columns.
    pub fn support_nodes(&self) -> Vec<usize> {
        let mut v = self.nodes.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// `min sum mu_k obj_k` over face measures supported on the kept columns.
    pub fn linear_min(&self, obj: &[f64]) -> Result<(f64, Vec<f64>)> {
        let q = self.len();
        let r = self.closure_rows;
        // rows: closure, mass, face
        let mut a = SparseMatrix::new(r + 2);
        for k in 0..q {
            let mut col = self.closure[k].clone();
            col.push((r, 1.0));
            col.push((r + 1, self.lagrangian[k]));
            a.push_column(&col);
        }
        a.push_column(&[(r + 1, 1.0)]);
        let mut b = vec![0.0; r + 2];
        b[r] = 1.0;
        b[r + 1] = self.bound;
        let mut c = obj.to_vec();
        c.push(0.0);
        let lp = solve_lp(&LpProblem { a, b, c }, None, &LpOptions::default())?;
        Ok((lp.objective, lp.x[..q].to_vec()))
    }

    fn ratio_problem(&self, den: &[f64]) -> LpProblem {
        let q = self.len();
        let r = self.closure_rows;
        // rows: closure, mass link sum y - t = 0, face sum L y - bound t + s = 0, sum den y = 1
        let mut a = SparseMatrix::new(r + 3);
        for k in 0..q {
            let mut col = self.closure[k].clone();
            col.push((r, 1.0));
            col.push((r + 1, self.lagrangian[k]));
            col.push((r + 2, den[k]));
            a.push_column(&col);
        }
        a.push_column(&[(r, -1.0), (r + 1, -self.bound)]);
        a.push_column(&[(r + 1, 1.0)]);
        let mut b = vec![0.0; r + 3];
        b[r + 2] = 1.0;
        LpProblem { a, b, c: vec![0.0; q + 2] }
    }

    /// `min sum num_k mu_k / sum den_k mu_k` over face measures (`den > 0` on the face),
    /// by the Charnes-Cooper substitution `y = mu / sum den mu`.
    pub fn ratio_min(&self, num: &[f64], den: &[f64]) -> Result<f64> {
        let mut p = self.ratio_problem(den);
        p.c[..num.len()].copy_from_slice(num);
        Ok(solve_lp(&p, None, &LpOptions::default())?.objective)
    }
}

#[derive(Debug, Clone)]
pub struct Selection<T> {
    pub u0: GridFunction<T>,
    /// Nodes carrying the screened Mather face.
    pub support_nodes: Vec<usize>,
    /// `max int dL/du dmu` over the screened face.
    pub face_max_dl_du: f64,
}

/// `u0(x) = min over the Mather face of sum h(x_i, x) a_ij mu_ij / sum a_ij mu_ij`
/// with `a = -dL/du(., ., 0)`, one Charnes-Cooper LP per grid node.
pub fn select_u0<T: Real, M: Model<T> + ?Sized>(
    m: &M,
    bt: &BarrierTable<T>,
    p: &ClosedMeasurePolytope<T>,
    mather: &MatherSolution<T>,
    params: &SelectionParams,
) -> Result<Selection<T>> {
    if bt.grid() != p.grid() {
        return Err(Error::GridMismatch);
    }
    let face = ScreenedFace::new(p, mather, params.screen, params.face_tol);
    let g_all = p.dl_du0(m)?;
    let g: Vec<f64> = face.columns.iter().map(|&k| g_all[k]).collect();
    let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
    let (min_neg, _) = face.linear_min(&neg_g)?;
    let face_max = -min_neg;
    if face_max > -params.margin {
        return Err(Error::L4Fails { face_max });
    }
    let support_nodes = face.support_nodes();
    for &node in &support_nodes {
        if bt.value(node, 0).is_none() {
            return Err(Error::MissingBarrierSource(node));
        }
    }
    let n = p.grid().points();
    let mut problem = face.ratio_problem(&neg_g);
    let q = face.len();
    let mut warm: Option<Vec<BasisEntry>> = None;
    let mut values = Vec::with_capacity(n);
    for x in 0..n {
        for k in 0..q {
            let h = bt.value(face.nodes[k], x).expect("checked above");
            problem.c[k] = h.as_f64() * neg_g[k];
        }
        let lp = solve_lp(&problem, warm.as_deref(), &LpOptions::default())?;
        values.push(T::lit(lp.objective));
        warm = Some(lp.basis);
    }
    Ok(Selection { u0: GridFunction::new(*p.grid(), values)?, support_nodes, face_max_dl_du: face_max })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LargestSubsolutionReport {
    /// `min_x (T u0)(x) - u0(x)` for the critical operator; `>= -tol` for a subsolution.
    pub subsolution_slack: f64,
    /// `min over the face of int u0 dL/du dmu`; `>= -tol` when the constraint holds.
    pub face_min: f64,
    pub delta: f64,
    /// Same as `face_min` for `u0 + delta`.
    pub shifted_face_min: f64,
    /// `max_{y, x} U_y(x) - u0(x)` over the barrier test family
    /// `U_y = h(y, .) + a_y`, `a_y` the largest constant meeting the constraint.
    pub maximality_gap: f64,
    pub tol: f64,
    pub is_subsolution: bool,
    pub satisfies_constraint: bool,
    pub shift_rejected: bool,
    pub is_largest: bool,
}

/// Checks that `u0` is a critical subsolution meeting the Mather constraint,
/// that `u0 + delta` breaks the constraint, and that no barrier-generated
/// admissible subsolution exceeds it.
#[allow(clippy::too_many_arguments)]
pub fn verify_largest_subsolution<T: Real, M: Model<T>>(
    u0: &GridFunction<T>,
    m: &M,
    c: T,
    p: &ClosedMeasurePolytope<T>,
    mather: &MatherSolution<T>,
    bt: &BarrierTable<T>,
    sp: &SchemeParams<T>,
    tol: f64,
    delta: f64,
) -> Result<LargestSubsolutionReport> {
    let grid = *u0.grid();
    let frozen = Frozen::new(m, T::zero());
    let op = Operator::new(&frozen, &grid, c, sp)?;
    let mut tu = vec![T::zero(); grid.points()];
    op.apply(u0.values(), &vec![T::zero(); grid.points()], &mut tu);
    let slack = tu.iter().zip(u0.values()).fold(f64::INFINITY, |a, (t, u)| a.min((*t - *u).as_f64()));

    let face = ScreenedFace::new(p, mather, SelectionParams::default().screen, None);
    let g_all = p.dl_du0(m)?;
    let g: Vec<f64> = face.columns.iter().map(|&k| g_all[k]).collect();
    let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
    let obj: Vec<f64> = (0..face.len()).map(|k| u0.value(face.nodes[k]).as_f64() * g[k]).collect();
    let (face_min, _) = face.linear_min(&obj)?;
    let shifted: Vec<f64> = (0..face.len()).map(|k| (u0.value(face.nodes[k]).as_f64() + delta) * g[k]).collect();
    let (shifted_face_min, _) = face.linear_min(&shifted)?;

    let mut gap = f64::NEG_INFINITY;
    for &y in bt.sources() {
        let row = bt.row(y).expect("source listed in table");
        // a_y = -max over the face of int h(y, .) (-g) / int (-g)
        let num: Vec<f64> = (0..face.len()).map(|k| -row.value(face.nodes[k]).as_f64() * neg_g[k]).collect();
        let a_y = face.ratio_min(&num, &neg_g)?;
        for x in 0..grid.points() {
            gap = gap.max(row.value(x).as_f64() + a_y - u0.value(x).as_f64());
        }
    }
    Ok(LargestSubsolutionReport {
        subsolution_slack: slack,
        face_min,
        delta,
        shifted_face_min,
        maximality_gap: gap,
        tol,
        is_subsolution: slack >= -tol,
        satisfies_constraint: face_min >= -tol,
        shift_rejected: shifted_face_min < -tol,
        is_largest: gap <= tol,
    })
}
