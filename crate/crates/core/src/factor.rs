//! Direct solvers for the structurally symmetric matrices produced by
//! assembly: reverse Cuthill-McKee reordering followed by an envelope
//! (variable band) factorization. Fill stays inside the envelope, so the
//! cost is governed by the profile of the reordered matrix.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ordering {
    /// Keep the input numbering.
    Natural,
    /// Reverse Cuthill-McKee.
    #[default]
    Rcm,
}

/// Symmetric permutation; `perm[new] = old`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    perm: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self { perm: (0..n).collect(), inverse: (0..n).collect() }
    }

    pub fn from_new_to_old(perm: Vec<usize>) -> Self {
        let mut inverse = vec![usize::MAX; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        debug_assert!(inverse.iter().all(|&i| i != usize::MAX));
        Self { perm, inverse }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn old_of(&self, new: usize) -> usize {
        self.perm[new]
    }

    pub fn new_of(&self, old: usize) -> usize {
        self.inverse[old]
    }

    fn gather(&self, x: &[f64]) -> Vec<f64> {
        self.perm.iter().map(|&old| x[old]).collect()
    }

    fn scatter(&self, x: &[f64], out: &mut [f64]) {
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
    }
}

fn symmetric_adjacency(a: &CsrMatrix) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut adj = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

fn bfs_levels(adj: &[Vec<usize>], start: usize, seen: &mut [bool]) -> Vec<Vec<usize>> {
    let mut levels = vec![vec![start]];
    let mut local = vec![start];
    seen[start] = true;
    loop {
        let mut next = Vec::new();
        for &v in levels.last().unwrap() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    next.push(w);
                    local.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    for v in local {
        seen[v] = false;
    }
    levels
}

/// Reverse Cuthill-McKee ordering of the symmetrized pattern of `a`.
pub fn rcm(a: &CsrMatrix) -> Permutation {
    let n = a.nrows();
    let adj = symmetric_adjacency(a);
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut placed = vec![false; n];
    let mut scratch = vec![false; n];
    let mut order = Vec::with_capacity(n);

    for root in 0..n {
        if placed[root] {
            continue;
        }
        // Pseudo-peripheral start: min degree in the component, then walk to
        // the far end of the level structure until the depth stops growing.
        let component: Vec<usize> = bfs_levels(&adj, root, &mut scratch).concat();
        let mut start = *component.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        let mut depth = bfs_levels(&adj, start, &mut scratch).len();
        for _ in 0..8 {
            let levels = bfs_levels(&adj, start, &mut scratch);
            let candidate = *levels.last().unwrap().iter().min_by_key(|&&v| (degree[v], v)).unwrap();
            let cand_depth = bfs_levels(&adj, candidate, &mut scratch).len();
            if cand_depth > depth {
                start = candidate;
                depth = cand_depth;
            } else {
                break;
            }
        }

        let mut queue = VecDeque::from([start]);
        placed[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !placed[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                placed[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    Permutation::from_new_to_old(order)
}

fn ordering_for(a: &CsrMatrix, ordering: Ordering) -> Permutation {
    match ordering {
        Ordering::Natural => Permutation::identity(a.nrows()),
        Ordering::Rcm => rcm(a),
    }
}

/// Envelope of a permuted, structurally symmetrized pattern: `first[i]` is
/// the smallest column coupled to row `i` (in the new numbering), and row
/// `i` owns the slots `offset[i]..offset[i + 1]` for columns `first[i]..i`.
#[derive(Debug, Clone)]
struct Envelope {
    first: Vec<usize>,
    offset: Vec<usize>,
}

impl Envelope {
    fn new(a: &CsrMatrix, p: &Permutation) -> Self {
        let n = a.nrows();
        let mut first: Vec<usize> = (0..n).collect();
        for (i, j, _) in a.triplets() {
            let (ni, nj) = (p.new_of(i), p.new_of(j));
            let (hi, lo) = if ni > nj { (ni, nj) } else { (nj, ni) };
            first[hi] = first[hi].min(lo);
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + (i - first[i]));
        }
        Self { first, offset }
    }

    fn len(&self) -> usize {
        *self.offset.last().unwrap()
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j >= self.first[i] && j < i);
        self.offset[i] + (j - self.first[i])
    }
}

fn check_square(a: &CsrMatrix) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension { expected: a.nrows(), got: a.ncols() });
    }
    if !a.is_finite() {
        return Err(Error::Factorization("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// `A = L U` without pivoting on the envelope of the reordered matrix, with
/// unit lower `L`. Suitable for matrices whose symmetric part is positive
/// definite (all leading minors are then nonzero).
#[derive(Debug, Clone)]
pub struct EnvelopeLu {
    perm: Permutation,
    env: Envelope,
    lower: Vec<f64>,
    upper: Vec<f64>,
    diag: Vec<f64>,
}

impl EnvelopeLu {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        Self::with_ordering(a, Ordering::Rcm)
    }

    pub fn with_ordering(a: &CsrMatrix, ordering: Ordering) -> Result<Self> {
        check_square(a)?;
        let perm = ordering_for(a, ordering);
        let env = Envelope::new(a, &perm);
        let n = a.nrows();
        let mut lower = vec![0.0; env.len()];
        let mut upper = vec![0.0; env.len()];
        let mut diag = vec![0.0; n];
        for (i, j, v) in a.triplets() {
            let (ni, nj) = (perm.new_of(i), perm.new_of(j));
            match ni.cmp(&nj) {
                std::cmp::Ordering::Equal => diag[ni] += v,
                std::cmp::Ordering::Greater => lower[env.slot(ni, nj)] += v,
                std::cmp::Ordering::Less => upper[env.slot(nj, ni)] += v,
            }
        }

        let scale = diag.iter().map(|d| d.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for i in 0..n {
            let fi = env.first[i];
            for j in fi..i {
                let fj = env.first[j];
                let m = fi.max(fj);
                // U(j, i): column i of U, stored alongside row i.
                let mut u = upper[env.slot(i, j)];
                let mut l = lower[env.slot(i, j)];
                for k in m..j {
                    u -= lower[env.slot(j, k)] * upper[env.slot(i, k)];
                    l -= lower[env.slot(i, k)] * upper[env.slot(j, k)];
                }
                upper[env.slot(i, j)] = u;
                lower[env.slot(i, j)] = l / diag[j];
            }
            let mut d = diag[i];
            for k in fi..i {
                d -= lower[env.slot(i, k)] * upper[env.slot(i, k)];
            }
            if !(d.abs() > 1e-13 * scale) || !d.is_finite() {
                return Err(Error::Factorization(format!("zero pivot {d:.3e} at row {} of {n}", perm.old_of(i))));
            }
            diag[i] = d;
        }
        Ok(Self { perm, env, lower, upper, diag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Stored envelope entries (per triangle).
    pub fn envelope_size(&self) -> usize {
        self.env.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; b.len()];
        self.solve_into(b, &mut x);
        x
    }

    pub fn solve_into(&self, b: &[f64], out: &mut [f64]) {
        assert_eq!(b.len(), self.dim(), "solve: right-hand side length");
        let n = self.dim();
        let mut y = self.perm.gather(b);
        for i in 0..n {
            let fi = self.env.first[i];
            let row = &self.lower[self.env.offset[i]..self.env.offset[i + 1]];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let xi = y[i] / self.diag[i];
            y[i] = xi;
            let fi = self.env.first[i];
            let col = &self.upper[self.env.offset[i]..self.env.offset[i + 1]];
            for (yk, u) in y[fi..i].iter_mut().zip(col) {
                *yk -= u * xi;
            }
        }
        self.perm.scatter(&y, out);
    }
}

/// `P A Pᵀ = L Lᵀ` on the envelope of the reordered matrix.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    perm: Permutation,
    env: Envelope,
    lower: Vec<f64>,
    diag: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        Self::with_ordering(a, Ordering::Rcm)
    }

    pub fn with_ordering(a: &CsrMatrix, ordering: Ordering) -> Result<Self> {
        check_square(a)?;
        let perm = ordering_for(a, ordering);
        let env = Envelope::new(a, &perm);
        let n = a.nrows();
        let mut lower = vec![0.0; env.len()];
        let mut diag = vec![0.0; n];
        for (i, j, v) in a.triplets() {
            let (ni, nj) = (perm.new_of(i), perm.new_of(j));
            if ni == nj {
                diag[ni] += v;
            } else if ni > nj {
                lower[env.slot(ni, nj)] += v;
            }
        }
        let scale = diag.iter().map(|d| d.abs()).fold(0.0, f64::max);
        for i in 0..n {
            let fi = env.first[i];
            for j in fi..i {
                let m = fi.max(env.first[j]);
                let mut l = lower[env.slot(i, j)];
                for k in m..j {
                    l -= lower[env.slot(i, k)] * lower[env.slot(j, k)];
                }
                lower[env.slot(i, j)] = l / diag[j];
            }
            let mut d = diag[i];
            for k in fi..i {
                let l = lower[env.slot(i, k)];
                d -= l * l;
            }
            if !(d > 1e-13 * scale) || !d.is_finite() {
                return Err(Error::Factorization(format!(
                    "matrix is not positive definite (pivot {d:.3e} at row {})",
                    perm.old_of(i)
                )));
            }
            diag[i] = d.sqrt();
        }
        Ok(Self { perm, env, lower, diag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn permutation(&self) -> &Permutation {
        &self.perm
    }

    /// Entry `(i, j)` of the factor in the reordered numbering.
    pub fn factor_entry(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => self.diag[i],
            std::cmp::Ordering::Less => 0.0,
            std::cmp::Ordering::Greater if j < self.env.first[i] => 0.0,
            std::cmp::Ordering::Greater => self.lower[self.env.slot(i, j)],
        }
    }

    /// `Pᵀ L z`, so that `E[(Pᵀ L z)(Pᵀ L z)ᵀ] = A` for `z ~ N(0, I)`.
    pub fn mul_factor(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.dim(), "factor product: input length");
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let fi = self.env.first[i];
            let row = &self.lower[self.env.offset[i]..self.env.offset[i + 1]];
            let s: f64 = row.iter().zip(&z[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = s + self.diag[i] * z[i];
        }
        let mut out = vec![0.0; n];
        self.perm.scatter(&y, &mut out);
        out
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.dim(), "solve: right-hand side length");
        let n = self.dim();
        let mut y = self.perm.gather(b);
        for i in 0..n {
            let fi = self.env.first[i];
            let row = &self.lower[self.env.offset[i]..self.env.offset[i + 1]];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - s) / self.diag[i];
        }
        for i in (0..n).rev() {
            let xi = y[i] / self.diag[i];
            y[i] = xi;
            let fi = self.env.first[i];
            let row = &self.lower[self.env.offset[i]..self.env.offset[i + 1]];
            for (yk, l) in y[fi..i].iter_mut().zip(row) {
                *yk -= l * xi;
            }
        }
        let mut out = vec![0.0; n];
        self.perm.scatter(&y, &mut out);
        out
    }

    /// Dense `Pᵀ L` in the original numbering (tests and small problems).
    pub fn dense_factor(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        let mut out = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                out[(self.perm.old_of(i), j)] = self.factor_entry(i, j);
            }
        }
        out
    }
}

/// Direct solver picked by symmetry: Cholesky for symmetric input, envelope
/// LU otherwise.
#[derive(Debug, Clone)]
pub enum SparseSolver {
    Cholesky(EnvelopeCholesky),
    Lu(EnvelopeLu),
}

impl SparseSolver {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        if a.is_symmetric(1e-14) {
            EnvelopeCholesky::new(a).map(SparseSolver::Cholesky)
        } else {
            EnvelopeLu::new(a).map(SparseSolver::Lu)
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SparseSolver::Cholesky(c) => c.dim(),
            SparseSolver::Lu(l) => l.dim(),
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        match self {
            SparseSolver::Cholesky(c) => c.solve(b),
            SparseSolver::Lu(l) => l.solve(b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn ring_laplacian(n: usize, shift: f64) -> CsrMatrix {
        let mut e = Vec::new();
        for i in 0..n {
            let j = (i + 1) % n;
            e.push((i, i, 2.0 + shift));
            e.push((i, j, -1.0));
            e.push((j, i, -1.0));
        }
        CsrMatrix::from_triplets(n, n, &e)
    }

    #[test]
    fn rcm_keeps_ring_bandwidth_small() {
        let a = ring_laplacian(200, 0.1);
        let p = rcm(&a);
        let bw = a.triplets().map(|(i, j, _)| p.new_of(i).abs_diff(p.new_of(j))).max().unwrap();
        assert!(bw <= 2, "bandwidth {bw}");
    }

    #[test]
    fn hand_cholesky() {
        let a = CsrMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]));
        let c = EnvelopeCholesky::with_ordering(&a, Ordering::Natural).unwrap();
        let l = c.dense_factor();
        let expected = DMatrix::from_row_slice(2, 2, &[2f64.sqrt(), 0.0, 1.0 / 2f64.sqrt(), 1.5f64.sqrt()]);
        assert!((l - expected).norm() < 1e-15);
    }

    #[test]
    fn rejects_indefinite() {
        let a = CsrMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]));
        assert!(matches!(EnvelopeCholesky::new(&a), Err(Error::Factorization(_))));
    }

    fn random_system(n: usize, vals: &[f64], skew: f64) -> CsrMatrix {
        let mut dense = DMatrix::zeros(n, n);
        let mut it = vals.iter().cycle();
        for i in 0..n {
            for j in 0..i {
                // sparse-ish coupling pattern
                if (i * 7 + j * 3) % 4 == 0 {
                    let v = *it.next().unwrap();
                    let w = skew * *it.next().unwrap();
                    dense[(i, j)] = v + w;
                    dense[(j, i)] = v - w;
                }
            }
        }
        for i in 0..n {
            let row: f64 = (0..n).filter(|&j| j != i).map(|j| dense[(i, j)].abs() + dense[(j, i)].abs()).sum();
            dense[(i, i)] = row + 1.0;
        }
        CsrMatrix::from_dense(&dense)
    }

    proptest! {
        #[test]
        fn lu_solves(n in 1usize..40, vals in prop::collection::vec(-1.0f64..1.0, 16), skew in 0.0f64..1.0) {
            let a = random_system(n, &vals, skew);
            let lu = EnvelopeLu::new(&a).unwrap();
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let b = a.mul_vec(&x);
            let got = lu.solve(&b);
            for (g, e) in got.iter().zip(&x) {
                prop_assert!((g - e).abs() < 1e-10);
            }
        }

        #[test]
        fn cholesky_reconstructs(n in 1usize..40, vals in prop::collection::vec(-1.0f64..1.0, 16)) {
            let a = random_system(n, &vals, 0.0);
            let c = EnvelopeCholesky::new(&a).unwrap();
            let l = c.dense_factor();
            let dense = a.to_dense();
            prop_assert!((&l * l.transpose() - &dense).norm() <= 1e-12 * dense.norm());
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).cos()).collect();
            let got = c.solve(&a.mul_vec(&x));
            for (g, e) in got.iter().zip(&x) {
                prop_assert!((g - e).abs() < 1e-10);
            }
            let z: Vec<f64> = (0..n).map(|i| i as f64 - 3.0).collect();
            let lz = c.mul_factor(&z);
            let dz = &l * nalgebra::DVector::from_vec(z);
            for (a, b) in lz.iter().zip(dz.iter()) {
                prop_assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
            }
        }
    }
}
