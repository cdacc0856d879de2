//! Revised simplex for `min c^T x` subject to `A x = b`, `x >= 0`.
//!
//! Desk-scale design: a dense explicit basis inverse updated by pivoting,
//! sparse columns, Dantzig pricing with a switch to Bland's rule after a run
//! of degenerate pivots, and a two-phase start from artificial columns (or
//! from a caller-supplied basis).

use crate::error::{Error, Result};

/// Column-compressed sparse matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseMatrix {
    rows: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    pub fn new(rows: usize) -> Self {
        Self { rows, col_ptr: vec![0], row_idx: Vec::new(), vals: Vec::new() }
    }

    /// Appends a column; repeated row indices are summed and zeros dropped.
    pub fn push_column(&mut self, entries: &[(usize, f64)]) -> usize {
        let start = self.row_idx.len();
        for &(r, v) in entries {
            assert!(r < self.rows, "row {r} out of range");
            if let Some(k) = self.row_idx[start..].iter().position(|&x| x == r) {
                self.vals[start + k] += v;
            } else {
                self.row_idx.push(r);
                self.vals.push(v);
            }
        }
        let mut k = start;
        while k < self.row_idx.len() {
            if self.vals[k] == 0.0 {
                self.row_idx.remove(k);
                self.vals.remove(k);
            } else {
                k += 1;
            }
        }
        self.col_ptr.push(self.row_idx.len());
        self.col_ptr.len() - 2
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.col_ptr[j], self.col_ptr[j + 1]);
        self.row_idx[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    /// `A x`.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (r, v) in self.column(j) {
                    out[r] += v * xj;
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl LpProblem {
    fn check(&self) -> Result<()> {
        if self.b.len() != self.a.rows() {
            return Err(Error::LpMalformed(format!("b has {} rows, A has {}", self.b.len(), self.a.rows())));
        }
        if self.c.len() != self.a.cols() {
            return Err(Error::LpMalformed(format!("c has {} entries, A has {} columns", self.c.len(), self.a.cols())));
        }
        if self.b.iter().chain(&self.c).any(|v| !v.is_finite()) {
            return Err(Error::LpMalformed("non-finite data".into()));
        }
        Ok(())
    }
}

/// A basic variable: a structural column or the artificial of a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisEntry {
    Structural(usize),
    Artificial(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    pub max_iter: usize,
    /// Reduced-cost threshold for optimality.
    pub opt_tol: f64,
    /// Primal feasibility tolerance.
    pub feas_tol: f64,
    /// Smallest pivot magnitude accepted in the ratio test.
    pub pivot_tol: f64,
    pub refactor_every: usize,
    /// Degenerate pivots in a row before switching to Bland's rule.
    pub bland_after: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self { max_iter: 200_000, opt_tol: 1e-10, feas_tol: 1e-10, pivot_tol: 1e-9, refactor_every: 400, bland_after: 60 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub basis: Vec<BasisEntry>,
    /// Row multipliers `y` with `c - A^T y >= 0` at optimality.
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

struct Simplex<'a> {
    p: &'a LpProblem,
    m: usize,
    n: usize,
    sign: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    /// column-major `B^-1`: entry `(i, k)` at `k * m + i`
    binv: Vec<f64>,
    xb: Vec<f64>,
    opts: LpOptions,
    iterations: usize,
    since_refactor: usize,
}

enum Phase {
    One,
    Two,
}

impl<'a> Simplex<'a> {
    fn new(p: &'a LpProblem, opts: LpOptions) -> Self {
        let m = p.a.rows();
        let n = p.a.cols();
        let sign: Vec<f64> = p.b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        let b: Vec<f64> = p.b.iter().zip(&sign).map(|(v, s)| v * s).collect();
        let mut s = Self {
            p,
            m,
            n,
            sign,
            b,
            basis: Vec::new(),
            in_basis: vec![false; n + m],
            binv: Vec::new(),
            xb: Vec::new(),
            opts,
            iterations: 0,
            since_refactor: 0,
        };
        s.artificial_start();
        s
    }

    fn artificial_start(&mut self) {
        let (m, n) = (self.m, self.n);
        self.in_basis = vec![false; n + m];
        self.basis = (0..m).map(|r| n + r).collect();
        for r in 0..m {
            self.in_basis[n + r] = true;
        }
        self.binv = vec![0.0; m * m];
        for r in 0..m {
            self.binv[r * m + r] = 1.0;
        }
        self.xb = self.b.clone();
    }

    fn try_warm(&mut self, warm: &[BasisEntry]) -> bool {
        if warm.len() != self.m {
            return false;
        }
        let mut vars = Vec::with_capacity(self.m);
        for e in warm {
            let v = match *e {
                BasisEntry::Structural(j) if j < self.n => j,
                BasisEntry::Artificial(r) if r < self.m => self.n + r,
                _ => return false,
            };
            vars.push(v);
        }
        let saved = (self.basis.clone(), self.in_basis.clone(), self.binv.clone(), self.xb.clone());
        self.in_basis = vec![false; self.n + self.m];
        for &v in &vars {
            if self.in_basis[v] {
                (self.basis, self.in_basis, self.binv, self.xb) = saved;
                return false;
            }
            self.in_basis[v] = true;
        }
        self.basis = vars;
        if !self.refactor() || self.xb.iter().any(|&v| v < -self.opts.feas_tol * 1e3) {
            (self.basis, self.in_basis, self.binv, self.xb) = saved;
            return false;
        }
        for v in &mut self.xb {
            *v = v.max(0.0);
        }
        true
    }

    /// Column `j` of the row-flipped matrix (artificials are unit columns).
    fn for_column(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for (r, v) in self.p.a.column(j) {
                f(r, v * self.sign[r]);
            }
        } else {
            f(j - self.n, 1.0);
        }
    }

    fn cost(&self, j: usize, phase: &Phase) -> f64 {
        match phase {
            Phase::One => {
                if j >= self.n {
                    1.0
                } else {
                    0.0
                }
            }
            Phase::Two => {
                if j >= self.n {
                    0.0
                } else {
                    self.p.c[j]
                }
            }
        }
    }

    /// Rebuilds `B^-1` by Gauss-Jordan elimination and recomputes `x_B`.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        // row-major dense B and identity
        let mut a = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            let mut col = Vec::new();
            self.for_column(j, |r, v| col.push((r, v)));
            for (r, v) in col {
                a[r * m + k] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for k in 0..m {
            let mut piv = k;
            let mut best = a[k * m + k].abs();
            for i in k + 1..m {
                let v = a[i * m + k].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best < 1e-13 {
                return false;
            }
            if piv != k {
                for c in 0..m {
                    a.swap(k * m + c, piv * m + c);
                    inv.swap(k * m + c, piv * m + c);
                }
            }
            let d = a[k * m + k];
            let nz_a: Vec<usize> = (0..m).filter(|&c| a[k * m + c] != 0.0).collect();
            let nz_i: Vec<usize> = (0..m).filter(|&c| inv[k * m + c] != 0.0).collect();
            for &c in &nz_a {
                a[k * m + c] /= d;
            }
            for &c in &nz_i {
                inv[k * m + c] /= d;
            }
            for i in 0..m {
                if i == k {
                    continue;
                }
                let f = a[i * m + k];
                if f == 0.0 {
                    continue;
                }
                for &c in &nz_a {
                    a[i * m + c] -= f * a[k * m + c];
                }
                for &c in &nz_i {
                    inv[i * m + c] -= f * inv[k * m + c];
                }
            }
        }
        // inv is B^-1 row-major: (i, k) at i * m + k
        for i in 0..m {
            for k in 0..m {
                self.binv[k * m + i] = inv[i * m + k];
            }
        }
        self.recompute_xb();
        self.since_refactor = 0;
        true
    }

    fn recompute_xb(&mut self) {
        let m = self.m;
        let mut xb = vec![0.0; m];
        for (k, &bk) in self.b.iter().enumerate() {
            if bk != 0.0 {
                let col = &self.binv[k * m..(k + 1) * m];
                for i in 0..m {
                    xb[i] += col[i] * bk;
                }
            }
        }
        self.xb = xb;
    }

    fn duals(&self, phase: &Phase) -> Vec<f64> {
        let m = self.m;
        let cb: Vec<f64> = self.basis.iter().map(|&j| self.cost(j, phase)).collect();
        (0..m)
            .map(|k| {
                let col = &self.binv[k * m..(k + 1) * m];
                col.iter().zip(&cb).map(|(a, c)| a * c).sum()
            })
            .collect()
    }

    fn reduced_cost(&self, j: usize, y: &[f64], phase: &Phase) -> f64 {
        let mut d = self.cost(j, phase);
        self.for_column(j, |r, v| d -= y[r] * v);
        d
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        self.for_column(j, |r, v| {
            let col = &self.binv[r * m..(r + 1) * m];
            for i in 0..m {
                alpha[i] += col[i] * v;
            }
        });
        alpha
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64], theta: f64) {
        let m = self.m;
        for i in 0..m {
            self.xb[i] -= theta * alpha[i];
        }
        self.xb[r] = theta;
        for v in &mut self.xb {
            if *v < 0.0 && *v > -self.opts.feas_tol {
                *v = 0.0;
            }
        }
        let ar = alpha[r];
        for k in 0..m {
            let col = &mut self.binv[k * m..(k + 1) * m];
            let pr = col[r] / ar;
            if pr != 0.0 {
                for i in 0..m {
                    col[i] -= alpha[i] * pr;
                }
            }
            col[r] = pr;
        }
        let leaving = self.basis[r];
        self.in_basis[leaving] = false;
        self.in_basis[q] = true;
        self.basis[r] = q;
        self.iterations += 1;
        self.since_refactor += 1;
        if self.since_refactor >= self.opts.refactor_every && !self.refactor() {
            // keep the updated inverse; a singular refactor only happens on
            // numerically broken bases and the next pivots will expose it
            self.since_refactor = 0;
        }
    }

    fn run(&mut self, phase: Phase) -> Result<()> {
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut refreshed = false;
        loop {
            if self.iterations >= self.opts.max_iter {
                return Err(Error::LpIterationLimit(self.iterations));
            }
            let y = self.duals(&phase);
            let scale = 1.0 + y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let tol = self.opts.opt_tol * scale;
            let mut enter = None;
            let mut best = -tol;
            let limit = match phase {
                Phase::One => self.n + self.m,
                Phase::Two => self.n,
            };
            for j in 0..limit {
                if self.in_basis[j] {
                    continue;
                }
                let d = self.reduced_cost(j, &y, &phase);
                if bland {
                    if d < -tol {
                        enter = Some(j);
                        break;
                    }
                } else if d < best {
                    best = d;
                    enter = Some(j);
                }
            }
            let Some(q) = enter else { return Ok(()) };
            let alpha = self.ftran(q);
            let Some((r, theta)) = self.ratio_test(&alpha, &phase, bland) else {
                // an empty ratio test on a drifted inverse is spurious: refresh
                // once before trusting it (phase one is never unbounded)
                if refreshed {
                    return Err(match phase {
                        Phase::Two => Error::LpUnbounded,
                        Phase::One => Error::LpMalformed("no leaving row in phase one".into()),
                    });
                }
                if !self.refactor() {
                    return Err(Error::LpMalformed("singular basis".into()));
                }
                refreshed = true;
                continue;
            };
            refreshed = false;
            if theta <= 1e-12 {
                degenerate += 1;
                if degenerate > self.opts.bland_after {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            self.pivot(r, q, &alpha, theta);
        }
    }

    /// Harris-style two-pass ratio test; in phase two a basic artificial with
    /// a nonzero pivot leaves at step zero so artificials never turn positive.
    fn ratio_test(&self, alpha: &[f64], phase: &Phase, bland: bool) -> Option<(usize, f64)> {
        let ptol = self.opts.pivot_tol;
        if matches!(phase, Phase::Two) {
            let mut pick: Option<usize> = None;
            for i in 0..self.m {
                if self.basis[i] >= self.n && alpha[i].abs() > ptol {
                    let better = match pick {
                        None => true,
                        Some(k) => {
                            if bland {
                                self.basis[i] < self.basis[k]
                            } else {
                                alpha[i].abs() > alpha[k].abs()
                            }
                        }
                    };
                    if better {
                        pick = Some(i);
                    }
                }
            }
            if let Some(i) = pick {
                if alpha[i] < 0.0 || self.xb[i] <= self.opts.feas_tol {
                    return Some((i, 0.0));
                }
            }
        }
        if bland {
            let mut pick: Option<(usize, f64)> = None;
            for i in 0..self.m {
                if alpha[i] > ptol {
                    let ratio = self.xb[i].max(0.0) / alpha[i];
                    let better = match pick {
                        None => true,
                        Some((k, best)) => {
                            ratio < best - 1e-14 || (ratio <= best + 1e-14 && self.basis[i] < self.basis[k])
                        }
                    };
                    if better {
                        pick = Some((i, ratio));
                    }
                }
            }
            return pick;
        }
        let mut bound = f64::INFINITY;
        for i in 0..self.m {
            if alpha[i] > ptol {
                bound = bound.min((self.xb[i].max(0.0) + self.opts.feas_tol) / alpha[i]);
            }
        }
        if !bound.is_finite() {
            return None;
        }
        let mut pick: Option<usize> = None;
        for i in 0..self.m {
            if alpha[i] > ptol && self.xb[i].max(0.0) / alpha[i] <= bound && pick.is_none_or(|k| alpha[i] > alpha[k]) {
                pick = Some(i);
            }
        }
        pick.map(|i| (i, self.xb[i].max(0.0) / alpha[i]))
    }

    fn artificial_mass(&self) -> f64 {
        self.basis.iter().zip(&self.xb).filter(|(&j, _)| j >= self.n).map(|(_, &v)| v.max(0.0)).sum()
    }
}

/// Solves `min c^T x`, `A x = b`, `x >= 0`, optionally starting from `warm`
/// (ignored when it is not a feasible basis).
pub fn solve_lp(p: &LpProblem, warm: Option<&[BasisEntry]>, opts: &LpOptions) -> Result<LpSolution> {
    p.check()?;
    let mut s = Simplex::new(p, *opts);
    if let Some(w) = warm {
        if !s.try_warm(w) {
            s.artificial_start();
        }
    }
    let bscale = 1.0 + p.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if s.artificial_mass() > opts.feas_tol * bscale {
        s.run(Phase::One)?;
        s.refactor();
        if s.artificial_mass() > 1e-8 * bscale {
            return Err(Error::LpInfeasible);
        }
    }
    s.run(Phase::Two)?;
    if !s.refactor() {
        return Err(Error::LpMalformed("singular final basis".into()));
    }
    let mut x = vec![0.0; s.n];
    for (i, &j) in s.basis.iter().enumerate() {
        if j < s.n {
            x[j] = s.xb[i].max(0.0);
        }
    }
    let y = s.duals(&Phase::Two);
    let reduced_costs = (0..s.n).map(|j| s.reduced_cost(j, &y, &Phase::Two)).collect();
    let duals = y.iter().zip(&s.sign).map(|(v, sg)| v * sg).collect();
    let objective = x.iter().zip(&p.c).map(|(a, b)| a * b).sum();
    let basis = s
        .basis
        .iter()
        .map(|&j| if j < s.n { BasisEntry::Structural(j) } else { BasisEntry::Artificial(j - s.n) })
        .collect();
    Ok(LpSolution { x, objective, basis, duals, reduced_costs, iterations: s.iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense(rows: &[Vec<f64>]) -> SparseMatrix {
        let m = rows.len();
        let n = rows[0].len();
        let mut a = SparseMatrix::new(m);
        for j in 0..n {
            let col: Vec<(usize, f64)> = (0..m).map(|i| (i, rows[i][j])).collect();
            a.push_column(&col);
        }
        a
    }

    /// Minimum over all basic feasible solutions, by enumerating column subsets.
    fn brute_force(rows: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<f64> {
        let m = rows.len();
        let n = c.len();
        let mut best: Option<f64> = None;
        let mut subset = vec![0usize; m];
        fn rec(
            k: usize,
            start: usize,
            subset: &mut Vec<usize>,
            rows: &[Vec<f64>],
            b: &[f64],
            c: &[f64],
            best: &mut Option<f64>,
        ) {
            let m = rows.len();
            if k == m {
                if let Some(x) = solve_square(rows, subset, b) {
                    if x.iter().all(|&v| v >= -1e-9) {
                        let val: f64 = subset.iter().zip(&x).map(|(&j, v)| c[j] * v).sum();
                        if best.is_none_or(|bv| val < bv) {
                            *best = Some(val);
                        }
                    }
                }
                return;
            }
            for j in start..c.len() {
                subset[k] = j;
                rec(k + 1, j + 1, subset, rows, b, c, best);
            }
        }
        if n >= m {
            rec(0, 0, &mut subset, rows, b, c, &mut best);
        }
        best
    }

    fn solve_square(rows: &[Vec<f64>], cols: &[usize], b: &[f64]) -> Option<Vec<f64>> {
        let m = rows.len();
        let mut a: Vec<Vec<f64>> = (0..m).map(|i| cols.iter().map(|&j| rows[i][j]).chain([b[i]]).collect()).collect();
        for k in 0..m {
            let p = (k..m).max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs()))?;
            if a[p][k].abs() < 1e-9 {
                return None;
            }
            a.swap(k, p);
            for i in 0..m {
                if i != k {
                    let f = a[i][k] / a[k][k];
                    for c in k..=m {
                        a[i][c] -= f * a[k][c];
                    }
                }
            }
        }
        Some((0..m).map(|i| a[i][m] / a[i][i]).collect())
    }

    #[test]
    fn small_textbook_problem() {
        // min -x - y  s.t. x + s1 = 2, y + s2 = 3, x + y + s3 = 4
        let rows = vec![
            vec![1.0, 0.0, 1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0, 0.0, 1.0],
        ];
        let p = LpProblem { a: dense(&rows), b: vec![2.0, 3.0, 4.0], c: vec![-1.0, -1.0, 0.0, 0.0, 0.0] };
        let s = solve_lp(&p, None, &LpOptions::default()).unwrap();
        assert!((s.objective + 4.0).abs() < 1e-12);
        let ax = p.a.mul(&s.x);
        for (l, r) in ax.iter().zip(&p.b) {
            assert!((l - r).abs() < 1e-12);
        }
        assert!(s.reduced_costs.iter().all(|&d| d >= -1e-10));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let rows = vec![vec![1.0, 1.0]];
        let p = LpProblem { a: dense(&rows), b: vec![-1.0], c: vec![1.0, 1.0] };
        assert_eq!(solve_lp(&p, None, &LpOptions::default()), Err(Error::LpInfeasible));
        let rows = vec![vec![1.0, -1.0]];
        let p = LpProblem { a: dense(&rows), b: vec![1.0], c: vec![0.0, -1.0] };
        assert_eq!(solve_lp(&p, None, &LpOptions::default()), Err(Error::LpUnbounded));
    }

    #[test]
    fn warm_start_and_bad_warm_start() {
        let rows = vec![vec![1.0, 1.0, 1.0], vec![1.0, -1.0, 0.0]];
        let p = LpProblem { a: dense(&rows), b: vec![1.0, 0.0], c: vec![1.0, 2.0, 3.0] };
        let cold = solve_lp(&p, None, &LpOptions::default()).unwrap();
        let warm = solve_lp(&p, Some(&cold.basis), &LpOptions::default()).unwrap();
        assert_eq!(warm.iterations, 0);
        assert!((warm.objective - cold.objective).abs() < 1e-12);
        let junk = [BasisEntry::Structural(7), BasisEntry::Artificial(0)];
        let again = solve_lp(&p, Some(&junk), &LpOptions::default()).unwrap();
        assert!((again.objective - cold.objective).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under naive Dantzig pricing
        let rows = vec![
            vec![0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
            vec![0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ];
        let p = LpProblem {
            a: dense(&rows),
            b: vec![0.0, 0.0, 1.0],
            c: vec![-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0],
        };
        let s = solve_lp(&p, None, &LpOptions::default()).unwrap();
        assert!((s.objective + 0.05).abs() < 1e-9, "{}", s.objective);
    }

    #[test]
    fn random_problems_match_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut solved = 0;
        for _ in 0..200 {
            let m = rng.gen_range(1..=3);
            let n = rng.gen_range(m..=6);
            let rows: Vec<Vec<f64>> =
                (0..m).map(|_| (0..n).map(|_| rng.gen_range(-3i32..=3) as f64).collect()).collect();
            let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-3i32..=3) as f64).collect();
            // bounded objective: keep costs positive so enumeration gives the optimum
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(0i32..=5) as f64).collect();
            let p = LpProblem { a: dense(&rows), b: b.clone(), c: c.clone() };
            let expect = brute_force(&rows, &b, &c);
            match (solve_lp(&p, None, &LpOptions::default()), expect) {
                (Ok(s), Some(v)) => {
                    assert!((s.objective - v).abs() < 1e-7, "{} vs {v}", s.objective);
                    solved += 1;
                }
                (Err(Error::LpInfeasible), None) => {}
                (got, want) => panic!("mismatch: {got:?} vs {want:?}"),
            }
        }
        assert!(solved > 50);
    }

    proptest! {
        #[test]
        fn feasible_transport_problems(supply in prop::collection::vec(1u32..10, 2..5), cost_seed in 0u64..1000) {
            // balanced transportation problem: always feasible, optimum checked by duality
            let k = supply.len();
            let total: u32 = supply.iter().sum();
            let mut demand = vec![total / k as u32; k];
            demand[0] += total - demand.iter().sum::<u32>();
            let mut rng = ChaCha8Rng::seed_from_u64(cost_seed);
            let mut a = SparseMatrix::new(2 * k);
            let mut c = Vec::new();
            for i in 0..k {
                for j in 0..k {
                    a.push_column(&[(i, 1.0), (k + j, 1.0)]);
                    c.push(rng.gen_range(0.0..10.0));
                }
            }
            let b: Vec<f64> = supply.iter().chain(&demand).map(|&v| v as f64).collect();
            let p = LpProblem { a, b, c };
            let s = solve_lp(&p, None, &LpOptions::default()).unwrap();
            let dual_obj: f64 = s.duals.iter().zip(&p.b).map(|(y, b)| y * b).sum();
            prop_assert!((dual_obj - s.objective).abs() < 1e-8);
            prop_assert!(s.reduced_costs.iter().all(|&d| d >= -1e-9));
            prop_assert!(s.x.iter().all(|&v| v >= 0.0));
        }
    }
}
