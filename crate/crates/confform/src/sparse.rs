//! Symmetric sparse matrices and a direct LDL^T factorization.
//!
//! The curvature solves need many factorizations of matrices sharing one
//! sparsity pattern (cotangent stiffness plus diagonal terms), so the
//! factorization splits into a symbolic phase computed once per pattern and
//! a cheap numeric phase per Newton step. A reverse Cuthill-McKee ordering
//! keeps fill low on meshes whatever their vertex numbering.

use crate::error::{Error, Result};
use crate::scalar::Real;

const NONE: usize = usize::MAX;

/// Symmetric sparse matrix in CSR form with full (both-triangle) storage.
#[derive(Debug, Clone)]
pub struct SymmetricCsr<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
    diag_pos: Vec<usize>,
}

/// Accumulates symmetric triplets before compression.
#[derive(Debug)]
pub struct SymmetricBuilder<T> {
    n: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Real> SymmetricBuilder<T> {
    pub fn new(n: usize) -> Self {
        SymmetricBuilder {
            n,
            entries: Vec::new(),
        }
    }

    /// Adds `w` at (i, j) and (j, i), i != j.
    pub fn add_off_diagonal(&mut self, i: usize, j: usize, w: T) {
        debug_assert!(i != j && i < self.n && j < self.n);
        self.entries.push((i, j, w));
        self.entries.push((j, i, w));
    }

    pub fn add_diagonal(&mut self, i: usize, w: T) {
        debug_assert!(i < self.n);
        self.entries.push((i, i, w));
    }

    /// Compresses to CSR, merging duplicates. Diagonal entries are always
    /// present even when numerically zero.
    pub fn build(mut self) -> SymmetricCsr<T> {
        for i in 0..self.n {
            self.entries.push((i, i, T::zero()));
        }
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut row = 0usize;
        for (i, j, v) in self.entries {
            while row < i {
                row_ptr.push(col_idx.len());
                row += 1;
            }
            if let (Some(&last_j), true) = (col_idx.last(), col_idx.len() > row_ptr[row]) {
                if last_j == j {
                    let k = values.len() - 1;
                    values[k] = values[k] + v;
                    continue;
                }
            }
            col_idx.push(j);
            values.push(v);
        }
        while row < self.n {
            row_ptr.push(col_idx.len());
            row += 1;
        }

        let mut diag_pos = vec![NONE; self.n];
        for i in 0..self.n {
            for p in row_ptr[i]..row_ptr[i + 1] {
                if col_idx[p] == i {
                    diag_pos[i] = p;
                }
            }
            debug_assert!(diag_pos[i] != NONE);
        }

        SymmetricCsr {
            n: self.n,
            row_ptr,
            col_idx,
            values,
            diag_pos,
        }
    }
}

impl<T: Real> SymmetricCsr<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn mul_vec(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for i in 0..self.n {
            let mut acc = T::zero();
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            out[i] = acc;
        }
    }

    /// Copies this matrix's values and adds `delta[i]` to each diagonal.
    /// The sparsity pattern is shared with `self`.
    pub fn with_diagonal_added(&self, delta: &[T]) -> SymmetricCsr<T> {
        debug_assert_eq!(delta.len(), self.n);
        let mut out = self.clone();
        for i in 0..self.n {
            let p = out.diag_pos[i];
            out.values[p] = out.values[p] + delta[i];
        }
        out
    }

    /// Max over rows of the sum of absolute values.
    pub fn max_abs_row_sum(&self) -> T {
        let mut best = T::zero();
        for i in 0..self.n {
            let mut s = T::zero();
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[p].abs();
            }
            if s > best {
                best = s;
            }
        }
        best
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut dense = vec![vec![T::zero(); self.n]; self.n];
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                dense[i][self.col_idx[p]] = self.values[p];
            }
        }
        dense
    }
}

/// Reverse Cuthill-McKee ordering of the pattern graph.
///
/// Returns `perm` with `perm[old] = new`. Deterministic: ties break on the
/// smaller vertex index.
fn reverse_cuthill_mckee<T: Real>(a: &SymmetricCsr<T>) -> Vec<usize> {
    let n = a.n;
    let degree = |v: usize| a.row_ptr[v + 1] - a.row_ptr[v];
    let mut visited = vec![false; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut scratch: Vec<usize> = Vec::new();

    while order.len() < n {
        let mut start = (0..n)
            .filter(|&v| !visited[v])
            .min_by_key(|&v| (degree(v), v))
            .expect("unvisited vertex exists");

        // Two sweeps toward a pseudo-peripheral start vertex.
        for _ in 0..2 {
            let mut level = vec![NONE; n];
            level[start] = 0;
            let mut frontier = vec![start];
            let mut last = vec![start];
            while !frontier.is_empty() {
                last = frontier.clone();
                let mut next = Vec::new();
                for &v in &frontier {
                    for p in a.row_ptr[v]..a.row_ptr[v + 1] {
                        let w = a.col_idx[p];
                        if !visited[w] && level[w] == NONE {
                            level[w] = level[v] + 1;
                            next.push(w);
                        }
                    }
                }
                frontier = next;
            }
            start = *last
                .iter()
                .min_by_key(|&&v| (degree(v), v))
                .expect("level set nonempty");
        }

        let component_start = order.len();
        visited[start] = true;
        order.push(start);
        let mut head = component_start;
        while head < order.len() {
            let v = order[head];
            head += 1;
            scratch.clear();
            for p in a.row_ptr[v]..a.row_ptr[v + 1] {
                let w = a.col_idx[p];
                if !visited[w] && w != v {
                    scratch.push(w);
                }
            }
            scratch.sort_by_key(|&w| (degree(w), w));
            for &w in &scratch {
                if !visited[w] {
                    visited[w] = true;
                    order.push(w);
                }
            }
        }
    }

    order.reverse();
    let mut perm = vec![0usize; n];
    for (new, &old) in order.iter().enumerate() {
        perm[old] = new;
    }
    perm
}

/// Sparse LDL^T factorization with a fixed symbolic structure.
///
/// `LdltSolver::new` fixes the ordering and elimination structure for one
/// sparsity pattern; `factor` accepts any matrix with that same pattern.
pub struct LdltSolver<T> {
    n: usize,
    perm: Vec<usize>,
    iperm: Vec<usize>,
    // Upper-triangular part of the permuted matrix, CSC.
    ucol_ptr: Vec<usize>,
    urow_idx: Vec<usize>,
    // Gather map: CSC slot -> value index in the source CSR.
    from_csr: Vec<usize>,
    parent: Vec<usize>,
    lcol_ptr: Vec<usize>,
    // Numeric payload, rebuilt by `factor`.
    lrow_idx: Vec<usize>,
    lvalues: Vec<T>,
    diag: Vec<T>,
    factored: bool,
}

impl<T: Real> LdltSolver<T> {
    /// Symbolic setup for the pattern of `a` (values ignored).
    pub fn new(a: &SymmetricCsr<T>) -> Self {
        let n = a.n;
        let perm = reverse_cuthill_mckee(a);
        let mut iperm = vec![0usize; n];
        for old in 0..n {
            iperm[perm[old]] = old;
        }

        // Upper CSC of the permuted matrix: column j gathers entries of the
        // source row iperm[j] whose permuted index is <= j.
        let mut counts = vec![0usize; n + 1];
        for j in 0..n {
            let old = iperm[j];
            for p in a.row_ptr[old]..a.row_ptr[old + 1] {
                if perm[a.col_idx[p]] <= j {
                    counts[j + 1] += 1;
                }
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let ucol_ptr = counts;
        let nnz_u = ucol_ptr[n];
        let mut urow_idx = vec![0usize; nnz_u];
        let mut from_csr = vec![0usize; nnz_u];
        let mut cursor: Vec<usize> = ucol_ptr[..n].to_vec();
        let mut slot: Vec<(usize, usize)> = Vec::new();
        for j in 0..n {
            let old = iperm[j];
            slot.clear();
            for p in a.row_ptr[old]..a.row_ptr[old + 1] {
                let i = perm[a.col_idx[p]];
                if i <= j {
                    slot.push((i, p));
                }
            }
            slot.sort_unstable();
            for &(i, p) in &slot {
                urow_idx[cursor[j]] = i;
                from_csr[cursor[j]] = p;
                cursor[j] += 1;
            }
        }

        // Elimination tree and column counts of L.
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            parent[k] = NONE;
            flag[k] = k;
            for p in ucol_ptr[k]..ucol_ptr[k + 1] {
                let mut i = urow_idx[p];
                if i < k {
                    while flag[i] != k {
                        if parent[i] == NONE {
                            parent[i] = k;
                        }
                        lnz[i] += 1;
                        flag[i] = k;
                        i = parent[i];
                    }
                }
            }
        }
        let mut lcol_ptr = vec![0usize; n + 1];
        for k in 0..n {
            lcol_ptr[k + 1] = lcol_ptr[k] + lnz[k];
        }
        let nnz_l = lcol_ptr[n];

        LdltSolver {
            n,
            perm,
            iperm,
            ucol_ptr,
            urow_idx,
            from_csr,
            parent,
            lcol_ptr,
            lrow_idx: vec![0; nnz_l],
            lvalues: vec![T::zero(); nnz_l],
            diag: vec![T::zero(); n],
            factored: false,
        }
    }

    /// Numeric factorization of `a`, which must share the pattern given to
    /// `new`. Fails on an exactly zero pivot.
    pub fn factor(&mut self, a: &SymmetricCsr<T>) -> Result<()> {
        assert_eq!(a.n, self.n, "pattern mismatch");
        let n = self.n;
        let mut y = vec![T::zero(); n];
        let mut pattern = vec![0usize; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        self.factored = false;

        for k in 0..n {
            y[k] = T::zero();
            let mut top = n;
            flag[k] = k;
            lnz[k] = 0;
            for p in self.ucol_ptr[k]..self.ucol_ptr[k + 1] {
                let mut i = self.urow_idx[p];
                y[i] += a.values[self.from_csr[p]];
                let mut len = 0usize;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = self.parent[i];
                }
                while len > 0 {
                    len -= 1;
                    top -= 1;
                    pattern[top] = pattern[len];
                }
            }
            let mut d = y[k];
            y[k] = T::zero();
            for t in top..n {
                let i = pattern[t];
                let yi = y[i];
                y[i] = T::zero();
                let p2 = self.lcol_ptr[i] + lnz[i];
                for p in self.lcol_ptr[i]..p2 {
                    y[self.lrow_idx[p]] -= self.lvalues[p] * yi;
                }
                let l_ki = yi / self.diag[i];
                d -= l_ki * yi;
                self.lrow_idx[p2] = k;
                self.lvalues[p2] = l_ki;
                lnz[i] += 1;
            }
            if d == T::zero() || !d.is_finite() {
                return Err(Error::SingularSystem {
                    col: k,
                    pivot: d.to_f64().unwrap_or(0.0),
                });
            }
            self.diag[k] = d;
        }
        self.factored = true;
        Ok(())
    }

    /// True when every pivot is positive (matrix positive definite).
    pub fn is_positive_definite(&self) -> bool {
        self.factored && self.diag.iter().all(|&d| d > T::zero())
    }

    /// Solves `a x = b` for the last factored matrix.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert!(self.factored, "factor() before solve()");
        let n = self.n;
        let mut x = vec![T::zero(); n];
        for new in 0..n {
            x[new] = b[self.iperm[new]];
        }
        for j in 0..n {
            let xj = x[j];
            for p in self.lcol_ptr[j]..self.lcol_ptr[j + 1] {
                x[self.lrow_idx[p]] -= self.lvalues[p] * xj;
            }
        }
        for j in 0..n {
            x[j] /= self.diag[j];
        }
        for j in (0..n).rev() {
            let mut xj = x[j];
            for p in self.lcol_ptr[j]..self.lcol_ptr[j + 1] {
                xj -= self.lvalues[p] * x[self.lrow_idx[p]];
            }
            x[j] = xj;
        }
        let mut out = vec![T::zero(); n];
        for old in 0..n {
            out[old] = x[self.perm[old]];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_chain(n: usize, shift: f64) -> SymmetricCsr<f64> {
        let mut b = SymmetricBuilder::new(n);
        for i in 0..n - 1 {
            b.add_off_diagonal(i, i + 1, -1.0);
            b.add_diagonal(i, 1.0);
            b.add_diagonal(i + 1, 1.0);
        }
        for i in 0..n {
            b.add_diagonal(i, shift);
        }
        b.build()
    }

    #[test]
    fn builder_merges_duplicates() {
        let mut b = SymmetricBuilder::new(3);
        b.add_off_diagonal(0, 1, 2.0);
        b.add_off_diagonal(0, 1, 3.0);
        b.add_diagonal(2, 1.5);
        let m = b.build();
        let d = m.to_dense();
        assert_eq!(d[0][1], 5.0);
        assert_eq!(d[1][0], 5.0);
        assert_eq!(d[2][2], 1.5);
        assert_eq!(d[0][0], 0.0);
    }

    #[test]
    fn solves_small_spd_system() {
        let a = laplacian_chain(6, 0.7);
        let mut solver = LdltSolver::new(&a);
        solver.factor(&a).unwrap();
        assert!(solver.is_positive_definite());
        let b: Vec<f64> = (0..6).map(|i| (i as f64) - 2.0).collect();
        let x = solver.solve(&b);
        let mut ax = vec![0.0; 6];
        a.mul_vec(&x, &mut ax);
        for i in 0..6 {
            assert!((ax[i] - b[i]).abs() < 1e-12, "residual at {i}");
        }
    }

    #[test]
    fn refactors_with_shared_pattern() {
        let a = laplacian_chain(8, 0.5);
        let mut solver = LdltSolver::new(&a);
        solver.factor(&a).unwrap();
        let shifted = a.with_diagonal_added(&vec![2.5; 8]);
        solver.factor(&shifted).unwrap();
        let b = vec![1.0; 8];
        let x = solver.solve(&b);
        let mut ax = vec![0.0; 8];
        shifted.mul_vec(&x, &mut ax);
        for i in 0..8 {
            assert!((ax[i] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn handles_indefinite_matrix() {
        // Chain Laplacian with a strongly negative shift is indefinite but
        // still admits an LDL^T with negative pivots.
        let a = laplacian_chain(5, -3.0);
        let mut solver = LdltSolver::new(&a);
        solver.factor(&a).unwrap();
        assert!(!solver.is_positive_definite());
        let b = vec![1.0, 0.0, -1.0, 2.0, 0.5];
        let x = solver.solve(&b);
        let mut ax = vec![0.0; 5];
        a.mul_vec(&x, &mut ax);
        for i in 0..5 {
            assert!((ax[i] - b[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_singular_matrix() {
        let mut b = SymmetricBuilder::new(2);
        b.add_diagonal(0, 1.0);
        // row 1 left exactly zero
        let a = b.build();
        let mut solver = LdltSolver::new(&a);
        assert!(matches!(
            solver.factor(&a),
            Err(Error::SingularSystem { .. })
        ));
    }

    #[test]
    fn rcm_produces_permutation() {
        let a = laplacian_chain(12, 1.0);
        let perm = reverse_cuthill_mckee(&a);
        let mut seen = vec![false; 12];
        for &p in &perm {
            assert!(!seen[p]);
            seen[p] = true;
        }
    }
}
