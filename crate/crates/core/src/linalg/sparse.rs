/// Square sparse matrix in compressed-row form, immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Coordinate-format accumulator; duplicate coordinates are summed on build.
#[derive(Clone, Debug)]
pub struct TripletBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        TripletBuilder { n, entries: Vec::new() }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        TripletBuilder { n, entries: Vec::with_capacity(cap) }
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, val: f64) {
        debug_assert!(row < self.n && col < self.n);
        self.entries.push((row, col, val));
    }

    pub fn build(mut self) -> SparseMatrix {
        // stable sort keeps summation order deterministic
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix { n: self.n, row_ptr, cols, vals }
    }
}

impl SparseMatrix {
    pub fn identity(n: usize) -> Self {
        SparseMatrix { n, row_ptr: (0..=n).collect(), cols: (0..n).collect(), vals: vec![1.0; n] }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut b = TripletBuilder::new(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    b.add(i, j, v);
                }
            }
        }
        b.build()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored entries of row `i` as `(column, value)`, columns ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(p) => self.vals[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, j, v) in self.triplets() {
            d[i][j] = v;
        }
        d
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut b = TripletBuilder::with_capacity(self.n, self.nnz());
        for (i, j, v) in self.triplets() {
            b.add(j, i, v);
        }
        b.build()
    }

    /// `diag + scale · self`, e.g. the backward Euler operator `I + Δt M`.
    pub fn scaled_plus_diagonal(&self, scale: f64, diag: &[f64]) -> SparseMatrix {
        assert_eq!(diag.len(), self.n);
        let mut b = TripletBuilder::with_capacity(self.n, self.nnz() + self.n);
        for (i, j, v) in self.triplets() {
            b.add(i, j, scale * v);
        }
        for (i, &d) in diag.iter().enumerate() {
            b.add(i, i, d);
        }
        b.build()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.triplets().all(|(i, j, v)| (v - self.get(j, i)).abs() <= tol * (1.0 + v.abs()))
    }
}
