use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Square sparse matrix in compressed-row form with a fixed pattern.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Pattern from per-row neighbour lists; the diagonal is always included.
    pub fn from_adjacency(adj: &[Vec<usize>]) -> Self {
        let n = adj.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for (i, row) in adj.iter().enumerate() {
            let mut r: Vec<usize> = row.iter().copied().chain(std::iter::once(i)).collect();
            r.sort_unstable();
            r.dedup();
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        let values = vec![0.0; cols.len()];
        CsrMatrix { n, row_ptr, cols, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Adds `v` at `(i, j)`, which must be in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let row = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        let k = row.binary_search(&j).expect("entry outside the sparsity pattern");
        self.values[self.row_ptr[i] + k] += v;
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|i| self.row(i).map(|(j, _)| j).filter(|&j| j != i).collect()).collect()
    }
}

/// Minimum-degree ordering on the explicit elimination graph; returns
/// `perm` with `perm[new] = old`. Ties go to the lower index.
pub fn minimum_degree(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut graph: Vec<Vec<usize>> = adj
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<usize> = row.iter().copied().filter(|&j| j != i).collect();
            r.sort_unstable();
            r.dedup();
            r
        })
        .collect();
    let mut done = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..n).map(|i| Reverse((graph[i].len(), i))).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((deg, v))) = heap.pop() {
        if done[v] || deg != graph[v].len() {
            continue;
        }
        done[v] = true;
        order.push(v);
        let nbrs = std::mem::take(&mut graph[v]);
        for &u in &nbrs {
            let merged = merge_without(&graph[u], &nbrs, u, v);
            graph[u] = merged;
            heap.push(Reverse((graph[u].len(), u)));
        }
    }
    order
}

/// Sorted union of `a` and `b` with `skip_a` and `skip_b` removed.
fn merge_without(a: &[usize], b: &[usize], skip_a: usize, skip_b: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (_, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if x != skip_a && x != skip_b {
            out.push(x);
        }
    }
    out
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    Diag(usize),
    /// Position in the shared `L`-row / `U`-column storage.
    Lower(usize),
    Upper(usize),
}

/// Fill pattern of `LU` for a matrix with symmetric structure under a fixed ordering.
///
/// Row `i` of `L` and column `i` of `U` share the pattern `rows[row_ptr[i]..row_ptr[i+1]]`.
#[derive(Clone, Debug)]
pub struct SymbolicLu {
    perm: Vec<usize>,
    row_ptr: Vec<usize>,
    rows: Vec<usize>,
    /// For each column `j`: the rows `k > j` whose pattern holds `j`, with
    /// the storage position of `(k, j)`.
    col_ptr: Vec<usize>,
    col_entries: Vec<(usize, usize)>,
    /// Destination of each stored entry of the input matrix.
    scatter: Vec<Slot>,
}

impl SymbolicLu {
    pub fn analyze(a: &CsrMatrix, perm: &[usize]) -> Self {
        let n = a.dim();
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut lower: Vec<Vec<usize>> = vec![Vec::new(); n];
        for old in 0..n {
            let i = inv[old];
            for (j_old, _) in a.row(old) {
                let j = inv[j_old];
                if j < i {
                    lower[i].push(j);
                } else if j > i {
                    lower[j].push(i);
                }
            }
        }
        // Elimination tree with path compression.
        const NONE: usize = usize::MAX;
        let mut parent = vec![NONE; n];
        let mut ancestor = vec![NONE; n];
        for i in 0..n {
            for &j in &lower[i] {
                let mut r = j;
                while r != NONE && r != i {
                    let next = ancestor[r];
                    ancestor[r] = i;
                    if next == NONE {
                        parent[r] = i;
                    }
                    r = next;
                }
            }
        }
        // Row patterns: everything reached from the row's entries along the tree.
        let mut mark = vec![NONE; n];
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut rows = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            mark[i] = i;
            let start = rows.len();
            for &j in &lower[i] {
                let mut r = j;
                while mark[r] != i {
                    mark[r] = i;
                    rows.push(r);
                    r = parent[r];
                }
            }
            rows[start..].sort_unstable();
            row_ptr.push(rows.len());
        }
        let mut count = vec![0usize; n + 1];
        for &j in &rows {
            count[j + 1] += 1;
        }
        for j in 0..n {
            count[j + 1] += count[j];
        }
        let col_ptr = count.clone();
        let mut col_entries = vec![(0, 0); rows.len()];
        for k in 0..n {
            for q in row_ptr[k]..row_ptr[k + 1] {
                let j = rows[q];
                col_entries[count[j]] = (k, q);
                count[j] += 1;
            }
        }
        let position = |i: usize, j: usize| row_ptr[i] + rows[row_ptr[i]..row_ptr[i + 1]].binary_search(&j).expect("pattern covers the input");
        let mut scatter = Vec::with_capacity(a.cols.len());
        for old in 0..n {
            let i = inv[old];
            for (j_old, _) in a.row(old) {
                let j = inv[j_old];
                scatter.push(match j.cmp(&i) {
                    std::cmp::Ordering::Equal => Slot::Diag(i),
                    std::cmp::Ordering::Less => Slot::Lower(position(i, j)),
                    std::cmp::Ordering::Greater => Slot::Upper(position(j, i)),
                });
            }
        }
        SymbolicLu { perm: perm.to_vec(), row_ptr, rows, col_ptr, col_entries, scatter }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Off-diagonal entries in each triangular factor.
    pub fn fill(&self) -> usize {
        self.rows.len()
    }
}

/// LU factorization without pivoting on a precomputed pattern, computed one
/// row of `L` and one column of `U` at a time.
#[derive(Clone, Debug)]
pub struct SparseLu<'a> {
    sym: &'a SymbolicLu,
    lower: Vec<f64>,
    upper: Vec<f64>,
    diag: Vec<f64>,
}

impl<'a> SparseLu<'a> {
    pub fn factor(a: &CsrMatrix, sym: &'a SymbolicLu) -> Result<Self> {
        let n = sym.dim();
        if a.dim() != n || a.values.len() != sym.scatter.len() {
            return Err(Error::LinearSolve("matrix does not match its symbolic analysis".into()));
        }
        let mut lower = vec![0.0; sym.rows.len()];
        let mut upper = vec![0.0; sym.rows.len()];
        let mut diag = vec![0.0; n];
        for (&v, &slot) in a.values.iter().zip(&sym.scatter) {
            match slot {
                Slot::Diag(i) => diag[i] += v,
                Slot::Lower(p) => lower[p] += v,
                Slot::Upper(p) => upper[p] += v,
            }
        }
        let mut slot_of = vec![0usize; n];
        for i in 0..n {
            let range = sym.row_ptr[i]..sym.row_ptr[i + 1];
            for p in range.clone() {
                slot_of[sym.rows[p]] = p;
            }
            let mut d = diag[i];
            for p in range {
                let j = sym.rows[p];
                let l = lower[p] / diag[j];
                lower[p] = l;
                let u = upper[p];
                for &(k, q) in &sym.col_entries[sym.col_ptr[j]..sym.col_ptr[j + 1]] {
                    if k >= i {
                        break;
                    }
                    // q holds L(k, j) and U(j, k).
                    lower[slot_of[k]] -= l * upper[q];
                    upper[slot_of[k]] -= lower[q] * u;
                }
                d -= l * u;
            }
            if !(d.abs() > 1e-300) || !d.is_finite() {
                return Err(Error::LinearSolve(format!("zero or non-finite pivot {d} at row {i}")));
            }
            diag[i] = d;
        }
        Ok(SparseLu { sym, lower, upper, diag })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let sym = self.sym;
        let n = sym.dim();
        let mut y: Vec<f64> = sym.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let mut s = y[i];
            for p in sym.row_ptr[i]..sym.row_ptr[i + 1] {
                s -= self.lower[p] * y[sym.rows[p]];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let xi = y[i] / self.diag[i];
            y[i] = xi;
            for p in sym.row_ptr[i]..sym.row_ptr[i + 1] {
                y[sym.rows[p]] -= self.upper[p] * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in sym.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid_laplacian(m: usize, skew: f64) -> CsrMatrix {
        let idx = |i: usize, j: usize| i * m + j;
        let mut adj = vec![Vec::new(); m * m];
        for i in 0..m {
            for j in 0..m {
                if i + 1 < m {
                    adj[idx(i, j)].push(idx(i + 1, j));
                    adj[idx(i + 1, j)].push(idx(i, j));
                }
                if j + 1 < m {
                    adj[idx(i, j)].push(idx(i, j + 1));
                    adj[idx(i, j + 1)].push(idx(i, j));
                }
            }
        }
        let mut a = CsrMatrix::from_adjacency(&adj);
        for (u, row) in adj.iter().enumerate() {
            a.add(u, u, 4.0 + 0.1);
            for &v in row {
                a.add(u, v, -1.0 + if v > u { skew } else { -skew });
            }
        }
        a
    }

    #[test]
    fn solves_nonsymmetric_system() {
        let a = grid_laplacian(20, 0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..a.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b = a.mul_vec(&x);
        let sym = SymbolicLu::analyze(&a, &minimum_degree(&a.adjacency()));
        let lu = SparseLu::factor(&a, &sym).unwrap();
        let got = lu.solve(&b);
        let err = got.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "error {err}");
    }

    #[test]
    fn ordering_reduces_fill() {
        let a = grid_laplacian(30, 0.0);
        let natural = SymbolicLu::analyze(&a, &(0..900).collect::<Vec<_>>());
        let md = SymbolicLu::analyze(&a, &minimum_degree(&a.adjacency()));
        // A banded factor fills the whole band.
        assert_eq!(natural.fill(), 29 + 870 * 30);
        assert!(md.fill() < natural.fill() / 2, "{} vs {}", md.fill(), natural.fill());
    }

    #[test]
    fn ordering_is_a_permutation() {
        let a = grid_laplacian(7, 0.0);
        let mut p = minimum_degree(&a.adjacency());
        p.sort_unstable();
        assert_eq!(p, (0..49).collect::<Vec<_>>());
    }

    #[test]
    fn singular_pivot_is_reported() {
        let mut a = CsrMatrix::from_adjacency(&[vec![1], vec![0]]);
        a.add(0, 1, 1.0);
        a.add(1, 0, 1.0);
        let sym = SymbolicLu::analyze(&a, &[0, 1]);
        assert!(matches!(SparseLu::factor(&a, &sym), Err(Error::LinearSolve(_))));
    }
}
