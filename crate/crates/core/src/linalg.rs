//! Thin wrappers over faer's sparse factorizations and dense symmetric
//! eigensolver, plus a plain CSR matrix for matrix-vector products.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use rayon::prelude::*;

/// Compressed sparse row matrix with sorted, duplicate-free rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl Csr {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut trip: Vec<(usize, usize, f64)>) -> Csr {
        trip.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col = Vec::with_capacity(trip.len());
        let mut val: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *val.last_mut().unwrap() += v;
                continue;
            }
            col.push(c);
            val.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Csr { n, row_ptr, col, val }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.val[k] * x[self.col[k]];
            }
            y[r] = acc;
        }
    }

    /// [`Csr::matvec`] with rows split across the rayon pool.
    pub fn par_matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(r, yr)| {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.val[k] * x[self.col[k]];
            }
            *yr = acc;
        });
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.col[lo..hi].binary_search(&c) {
            Ok(k) => self.val[lo + k],
            Err(_) => 0.0,
        }
    }

    /// Largest `|A_ij − A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col[k];
                worst = worst.max((self.val[k] - self.get(c, r)).abs());
            }
        }
        worst
    }

    /// `A + shift·diag(d)`.
    pub fn add_diagonal(&self, shift: f64, d: &[f64]) -> Csr {
        let mut trip = self.triplets();
        for (i, &di) in d.iter().enumerate() {
            trip.push((i, i, shift * di));
        }
        Csr::from_triplets(self.n, trip)
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.val.len());
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out.push((r, self.col[k], self.val[k]));
            }
        }
        out
    }

    fn to_faer(&self, lower_only: bool) -> Result<SparseColMat<usize, f64>, String> {
        let trip: Vec<Triplet<usize, usize, f64>> = self
            .triplets()
            .into_iter()
            .filter(|&(r, c, _)| !lower_only || r >= c)
            .map(|(r, c, v)| Triplet::new(r, c, v))
            .collect();
        SparseColMat::try_new_from_triplets(self.n, self.n, &trip).map_err(|e| format!("{e:?}"))
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.n, self.n);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }
}

/// Sparse LU with partial pivoting.
pub struct SparseLu {
    n: usize,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl SparseLu {
    pub fn factor(a: &Csr) -> Result<SparseLu, String> {
        let m = a.to_faer(false)?;
        let lu = m.sp_lu().map_err(|e| format!("{e:?}"))?;
        Ok(SparseLu { n: a.n, lu })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        solve_with(self.n, rhs, |b| self.lu.solve_in_place(b))
    }
}

/// Sparse Cholesky of a symmetric positive definite matrix.
pub struct SparseCholesky {
    n: usize,
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
}

impl SparseCholesky {
    pub fn factor(a: &Csr) -> Result<SparseCholesky, String> {
        let m = a.to_faer(true)?;
        let llt = m.sp_cholesky(Side::Lower).map_err(|e| format!("{e:?}"))?;
        Ok(SparseCholesky { n: a.n, llt })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        solve_with(self.n, rhs, |b| self.llt.solve_in_place(b))
    }
}

fn solve_with(n: usize, rhs: &[f64], f: impl FnOnce(faer::MatMut<'_, f64>)) -> Vec<f64> {
    let mut b = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
    f(b.as_mut());
    (0..n).map(|i| b[(i, 0)]).collect()
}

/// Eigenvalues of a dense symmetric matrix, ascending.
pub fn dense_symmetric_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>, String> {
    a.self_adjoint_eigenvalues(Side::Lower).map_err(|e| format!("{e:?}"))
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a dense symmetric matrix.
pub fn dense_symmetric_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>), String> {
    let e = a.self_adjoint_eigen(Side::Lower).map_err(|e| format!("{e:?}"))?;
    let s = e.S().column_vector();
    Ok(((0..a.nrows()).map(|i| s[i]).collect(), e.U().to_owned()))
}
