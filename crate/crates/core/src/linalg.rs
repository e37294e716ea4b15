//! Exact integer and rational matrices: Hermite and Smith normal forms,
//! integer kernels, lattice saturation, rational elimination and
//! signatures of symmetric forms.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Int = BigInt;
pub type Rat = BigRational;

pub fn int(v: i64) -> Int {
    BigInt::from(v)
}

pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_from_int(v: &Int) -> Rat {
    BigRational::from_integer(v.clone())
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type IntMatrix = Matrix<Int>;
pub type RatMatrix = Matrix<Rat>;

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
        }
        write!(f, "] ({}x{})", self.rows, self.cols)
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero + One,
{
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    /// Builds from rows; `cols` is needed when there are no rows.
    pub fn from_rows(rows: &[Vec<T>], cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend(r.iter().cloned());
        }
        Matrix { rows: rows.len(), cols, data }
    }

    pub fn from_cols(cols: &[Vec<T>], rows: usize) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "ragged matrix columns");
            for (i, v) in c.iter().enumerate() {
                m.data[i * cols.len() + j] = v.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn col_vecs(&self) -> Vec<Vec<T>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        let cols: Vec<Vec<T>> = idx.iter().map(|&j| self.col(j)).collect();
        Self::from_cols(&cols, self.rows)
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let rows: Vec<Vec<T>> = idx.iter().map(|&i| self.row(i).to_vec()).collect();
        Self::from_rows(&rows, self.cols)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn map<U, F: Fn(&T) -> U>(&self, f: F) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero + One,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * other.cols + j;
                    let prod = a * b;
                    out.data[idx] = out.data[idx].clone() + prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![T::zero(); self.cols];
        for (i, a) in v.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                out[j] = out[j].clone() + a * self.get(i, j);
            }
        }
        out
    }
}

pub fn dot<T>(a: &[T], b: &[T]) -> T
where
    T: Clone + Zero,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    assert_eq!(a.len(), b.len());
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s = s + x * y;
        }
    }
    s
}

pub fn to_rat_matrix(m: &IntMatrix) -> RatMatrix {
    m.map(rat_from_int)
}

pub fn to_rat_vec(v: &[Int]) -> Vec<Rat> {
    v.iter().map(rat_from_int).collect()
}

/// Integral entries of a rational vector, if all are integers.
pub fn to_int_vec(v: &[Rat]) -> Option<Vec<Int>> {
    v.iter().map(|x| if x.is_integer() { Some(x.to_integer()) } else { None }).collect()
}

pub fn to_int_matrix(m: &RatMatrix) -> Option<IntMatrix> {
    let rows: Option<Vec<Vec<Int>>> = m.row_vecs().iter().map(|r| to_int_vec(r)).collect();
    rows.map(|r| IntMatrix::from_rows(&r, m.cols()))
}

pub fn vec_add<T>(a: &[T], b: &[T]) -> Vec<T>
where
    T: Clone,
    for<'a> &'a T: Add<&'a T, Output = T>,
{
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub<T>(a: &[T], b: &[T]) -> Vec<T>
where
    T: Clone,
    for<'a> &'a T: Sub<&'a T, Output = T>,
{
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale<T>(c: &T, a: &[T]) -> Vec<T>
where
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    a.iter().map(|x| c * x).collect()
}

pub fn vec_neg<T>(a: &[T]) -> Vec<T>
where
    for<'a> &'a T: Neg<Output = T>,
{
    a.iter().map(|x| -x).collect()
}

/// gcd of the entries (nonnegative; zero for the zero vector).
pub fn content(v: &[Int]) -> Int {
    v.iter().fold(Int::zero(), |g, x| g.gcd(x))
}

/// Divides out the content. The zero vector is returned unchanged.
pub fn primitive(v: &[Int]) -> (Vec<Int>, Int) {
    let g = content(v);
    if g.is_zero() || g.is_one() {
        return (v.to_vec(), if g.is_zero() { Int::one() } else { g });
    }
    (v.iter().map(|x| x / &g).collect(), g)
}

/// Returns (g, x, y) with x*a + y*b = g = gcd(a, b) >= 0.
pub fn ext_gcd(a: &Int, b: &Int) -> (Int, Int, Int) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

// ---------------------------------------------------------------------------
// Hermite normal form

/// Column-style Hermite form `H = A * U` with `U` unimodular.
#[derive(Clone, Debug)]
pub struct Hermite {
    pub h: IntMatrix,
    pub u: IntMatrix,
    /// Row index of the pivot of each nonzero column, strictly increasing.
    pub pivots: Vec<usize>,
}

impl Hermite {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

fn col_combine(m: &mut IntMatrix, c: usize, j: usize, x: &Int, y: &Int, p: &Int, q: &Int) {
    // (col_c, col_j) <- (x col_c + y col_j, p col_c + q col_j)
    for i in 0..m.rows {
        let a = m.get(i, c).clone();
        let b = m.get(i, j).clone();
        if a.is_zero() && b.is_zero() {
            continue;
        }
        m.set(i, c, x * &a + y * &b);
        m.set(i, j, p * &a + q * &b);
    }
}

fn col_axpy(m: &mut IntMatrix, dst: usize, src: usize, k: &Int) {
    // col_dst <- col_dst + k col_src
    for i in 0..m.rows {
        let s = m.get(i, src);
        if s.is_zero() {
            continue;
        }
        let v = m.get(i, dst) + k * s;
        m.set(i, dst, v);
    }
}

fn col_negate(m: &mut IntMatrix, c: usize) {
    for i in 0..m.rows {
        let v = -m.get(i, c);
        m.set(i, c, v);
    }
}

/// Column echelon form by unimodular column operations. Each nonzero
/// column has a positive pivot at its first nonzero row, pivot rows
/// increase with the column index, and entries of a pivot row to the
/// left of the pivot lie in `[0, pivot)`. Zero columns come last.
pub fn hermite_column(a: &IntMatrix) -> Hermite {
    let mut h = a.clone();
    let mut u = IntMatrix::identity(a.cols);
    let mut pivots = Vec::new();
    let mut c = 0usize;
    for i in 0..a.rows {
        if c >= a.cols {
            break;
        }
        for j in (c + 1)..a.cols {
            if h.get(i, j).is_zero() {
                continue;
            }
            let av = h.get(i, c).clone();
            let bv = h.get(i, j).clone();
            if av.is_zero() {
                h.swap_cols(c, j);
                u.swap_cols(c, j);
                continue;
            }
            let (g, x, y) = ext_gcd(&av, &bv);
            let p = -(&bv / &g);
            let q = &av / &g;
            col_combine(&mut h, c, j, &x, &y, &p, &q);
            col_combine(&mut u, c, j, &x, &y, &p, &q);
        }
        if h.get(i, c).is_zero() {
            continue;
        }
        if h.get(i, c).is_negative() {
            col_negate(&mut h, c);
            col_negate(&mut u, c);
        }
        let piv = h.get(i, c).clone();
        for k in 0..c {
            let q = h.get(i, k).div_floor(&piv);
            if !q.is_zero() {
                let nq = -q;
                col_axpy(&mut h, k, c, &nq);
                col_axpy(&mut u, k, c, &nq);
            }
        }
        pivots.push(i);
        c += 1;
    }
    Hermite { h, u, pivots }
}

/// Row-style Hermite form `H = V * A`: the transpose of the column form
/// of `A^T`. Nonzero rows first, positive pivots, entries above each
/// pivot reduced into `[0, pivot)`.
pub fn hermite_row(a: &IntMatrix) -> (IntMatrix, IntMatrix, Vec<usize>) {
    let hc = hermite_column(&a.transpose());
    (hc.h.transpose(), hc.u.transpose(), hc.pivots)
}

/// Nonzero rows of the row Hermite form: a canonical basis of the row lattice.
pub fn row_lattice_basis(a: &IntMatrix) -> IntMatrix {
    let (h, _, piv) = hermite_row(a);
    let r = piv.len();
    h.select_rows(&(0..r).collect::<Vec<_>>())
}

/// Reduces `v` modulo the row lattice given by a row Hermite basis
/// (as produced by [`row_lattice_basis`]). Canonical on cosets.
pub fn reduce_mod_rows(basis: &IntMatrix, v: &[Int]) -> Vec<Int> {
    let mut out = v.to_vec();
    for i in 0..basis.rows() {
        let row = basis.row(i);
        let Some(p) = row.iter().position(|x| !x.is_zero()) else { continue };
        let q = out[p].div_floor(&row[p]);
        if !q.is_zero() {
            for (o, r) in out.iter_mut().zip(row) {
                *o -= &q * r;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Smith normal form

#[derive(Clone, Debug)]
pub struct SmithData {
    /// Nonzero diagonal entries, positive, each dividing the next.
    pub invariant_factors: Vec<Int>,
    /// `left * A * right` is diagonal with the invariant factors.
    pub left: IntMatrix,
    pub right: IntMatrix,
}

impl SmithData {
    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }

    /// Factors different from one.
    pub fn torsion(&self) -> Vec<Int> {
        self.invariant_factors.iter().filter(|d| !d.is_one()).cloned().collect()
    }

    pub fn diagonal(&self, rows: usize, cols: usize) -> IntMatrix {
        let mut d = IntMatrix::zeros(rows, cols);
        for (i, f) in self.invariant_factors.iter().enumerate() {
            d.set(i, i, f.clone());
        }
        d
    }
}

fn row_axpy(m: &mut IntMatrix, dst: usize, src: usize, k: &Int) {
    for j in 0..m.cols {
        let s = m.get(src, j);
        if s.is_zero() {
            continue;
        }
        let v = m.get(dst, j) + k * s;
        m.set(dst, j, v);
    }
}

fn row_negate(m: &mut IntMatrix, r: usize) {
    for j in 0..m.cols {
        let v = -m.get(r, j);
        m.set(r, j, v);
    }
}

pub fn smith(a: &IntMatrix) -> SmithData {
    let (m, n) = (a.rows, a.cols);
    let mut d = a.clone();
    let mut left = IntMatrix::identity(m);
    let mut right = IntMatrix::identity(n);
    let mut factors = Vec::new();
    let mut t = 0usize;
    while t < m.min(n) {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                let v = d.get(i, j);
                if v.is_zero() {
                    continue;
                }
                match best {
                    Some((bi, bj)) if d.get(bi, bj).abs() <= v.abs() => {}
                    _ => best = Some((i, j)),
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        d.swap_rows(t, bi);
        left.swap_rows(t, bi);
        d.swap_cols(t, bj);
        right.swap_cols(t, bj);
        loop {
            let mut clean = true;
            for i in (t + 1)..m {
                if d.get(i, t).is_zero() {
                    continue;
                }
                let q = d.get(i, t).div_floor(d.get(t, t));
                let nq = -q;
                row_axpy(&mut d, i, t, &nq);
                row_axpy(&mut left, i, t, &nq);
                if !d.get(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in (t + 1)..n {
                if d.get(t, j).is_zero() {
                    continue;
                }
                let q = d.get(t, j).div_floor(d.get(t, t));
                let nq = -q;
                col_axpy(&mut d, j, t, &nq);
                col_axpy(&mut right, j, t, &nq);
                if !d.get(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                // bring the smallest remainder of row/column t to the pivot
                let mut bi = t;
                let mut bj = t;
                for i in (t + 1)..m {
                    let v = d.get(i, t);
                    if !v.is_zero() && v.abs() < d.get(bi, bj).abs() {
                        bi = i;
                        bj = t;
                    }
                }
                for j in (t + 1)..n {
                    let v = d.get(t, j);
                    if !v.is_zero() && v.abs() < d.get(bi, bj).abs() {
                        bi = t;
                        bj = j;
                    }
                }
                d.swap_rows(t, bi);
                left.swap_rows(t, bi);
                d.swap_cols(t, bj);
                right.swap_cols(t, bj);
                continue;
            }
            // divisibility of the trailing block
            let piv = d.get(t, t).clone();
            let mut bad = None;
            'outer: for i in (t + 1)..m {
                for j in (t + 1)..n {
                    if !d.get(i, j).is_multiple_of(&piv) {
                        bad = Some(i);
                        break 'outer;
                    }
                }
            }
            match bad {
                Some(i) => {
                    let one = Int::one();
                    row_axpy(&mut d, t, i, &one);
                    row_axpy(&mut left, t, i, &one);
                }
                None => break,
            }
        }
        if d.get(t, t).is_negative() {
            row_negate(&mut d, t);
            row_negate(&mut left, t);
        }
        factors.push(d.get(t, t).clone());
        t += 1;
    }
    SmithData { invariant_factors: factors, left, right }
}

/// Hermite and Smith data of one matrix.
pub fn normal_forms(a: &IntMatrix) -> (Hermite, SmithData) {
    (hermite_column(a), smith(a))
}

// ---------------------------------------------------------------------------
// kernels, saturation, solving

/// Columns form a canonical (column Hermite) basis of `{v : A v = 0}`.
pub fn integer_kernel(a: &IntMatrix) -> IntMatrix {
    let hc = hermite_column(a);
    let r = hc.rank();
    let k: Vec<usize> = (r..a.cols).collect();
    let basis = hc.u.select_cols(&k);
    canonical_lattice_basis(&basis)
}

/// Column Hermite basis of the lattice spanned by the columns.
pub fn canonical_lattice_basis(b: &IntMatrix) -> IntMatrix {
    let hc = hermite_column(b);
    let r = hc.rank();
    hc.h.select_cols(&(0..r).collect::<Vec<_>>())
}

/// Basis (columns) of `(L ⊗ Q) ∩ Z^n` for the lattice `L` spanned by the columns of `b`.
pub fn saturate_lattice(b: &IntMatrix) -> IntMatrix {
    let n = b.rows();
    if b.cols() == 0 {
        return IntMatrix::zeros(n, 0);
    }
    let ann = integer_kernel(&b.transpose());
    if ann.cols() == 0 {
        return IntMatrix::identity(n);
    }
    integer_kernel(&ann.transpose())
}

/// Index of the column lattice of `b` in its saturation (product of the
/// invariant factors).
pub fn saturation_index(b: &IntMatrix) -> Int {
    smith(b).invariant_factors.iter().fold(Int::one(), |a, d| a * d)
}

/// Some integer solution of `A x = b`, if one exists.
pub fn solve_integer(a: &IntMatrix, b: &[Int]) -> Option<Vec<Int>> {
    assert_eq!(a.rows(), b.len());
    let s = smith(a);
    let lb = s.left.mul_vec(b);
    let r = s.rank();
    let mut y = vec![Int::zero(); a.cols()];
    for i in 0..lb.len() {
        if i < r {
            let (q, rem) = lb[i].div_rem(&s.invariant_factors[i]);
            if !rem.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !lb[i].is_zero() {
            return None;
        }
    }
    Some(s.right.mul_vec(&y))
}

/// Reduced row echelon form over Q, with pivot columns.
pub fn rref(a: &RatMatrix) -> (RatMatrix, Vec<usize>) {
    let mut m = a.clone();
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for c in 0..m.cols() {
        if r >= m.rows() {
            break;
        }
        let Some(p) = (r..m.rows()).find(|&i| !m.get(i, c).is_zero()) else { continue };
        m.swap_rows(r, p);
        let inv = m.get(r, c).recip();
        for j in 0..m.cols() {
            let v = m.get(r, j) * &inv;
            m.set(r, j, v);
        }
        for i in 0..m.rows() {
            if i == r || m.get(i, c).is_zero() {
                continue;
            }
            let f = m.get(i, c).clone();
            for j in 0..m.cols() {
                let s = m.get(r, j);
                if s.is_zero() {
                    continue;
                }
                let v = m.get(i, j) - &f * s;
                m.set(i, j, v);
            }
        }
        pivots.push(c);
        r += 1;
    }
    (m, pivots)
}

pub fn rank_rat(a: &RatMatrix) -> usize {
    rref(a).1.len()
}

pub fn rank_int(a: &IntMatrix) -> usize {
    hermite_column(a).rank()
}

/// Basis of the rational null space `{v : A v = 0}`.
pub fn rational_kernel(a: &RatMatrix) -> Vec<Vec<Rat>> {
    let (m, piv) = rref(a);
    let n = a.cols();
    let free: Vec<usize> = (0..n).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); n];
            v[f] = Rat::one();
            for (r, &p) in piv.iter().enumerate() {
                v[p] = -m.get(r, f).clone();
            }
            v
        })
        .collect()
}

/// Some rational solution of `A x = b` (free variables zero), if any.
pub fn solve_rational(a: &RatMatrix, b: &[Rat]) -> Option<Vec<Rat>> {
    assert_eq!(a.rows(), b.len());
    let n = a.cols();
    let mut aug = RatMatrix::zeros(a.rows(), n + 1);
    for i in 0..a.rows() {
        for j in 0..n {
            aug.set(i, j, a.get(i, j).clone());
        }
        aug.set(i, n, b[i].clone());
    }
    let (m, piv) = rref(&aug);
    if piv.last() == Some(&n) {
        return None;
    }
    let mut x = vec![Rat::zero(); n];
    for (r, &p) in piv.iter().enumerate() {
        x[p] = m.get(r, n).clone();
    }
    Some(x)
}

pub fn inverse_rat(a: &RatMatrix) -> Option<RatMatrix> {
    let n = a.rows();
    if n != a.cols() {
        return None;
    }
    if n == 0 {
        return Some(RatMatrix::zeros(0, 0));
    }
    let mut aug = RatMatrix::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug.set(i, j, a.get(i, j).clone());
        }
        aug.set(i, n + i, Rat::one());
    }
    let (m, piv) = rref(&aug);
    if piv.len() < n || piv[n - 1] != n - 1 {
        return None;
    }
    let mut inv = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            inv.set(i, j, m.get(i, n + j).clone());
        }
    }
    Some(inv)
}

/// Inverse of a unimodular integer matrix.
pub fn inverse_unimodular(a: &IntMatrix) -> Option<IntMatrix> {
    inverse_rat(&to_rat_matrix(a)).and_then(|m| to_int_matrix(&m))
}

pub fn det_rat(a: &RatMatrix) -> Rat {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let mut m = a.clone();
    let mut det = Rat::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m.get(i, c).is_zero()) else { return Rat::zero() };
        if p != c {
            m.swap_rows(p, c);
            det = -det;
        }
        let piv = m.get(c, c).clone();
        det *= &piv;
        for i in (c + 1)..n {
            if m.get(i, c).is_zero() {
                continue;
            }
            let f = m.get(i, c) / &piv;
            for j in c..n {
                let v = m.get(i, j) - &f * m.get(c, j);
                m.set(i, j, v);
            }
        }
    }
    det
}

pub fn det_int(a: &IntMatrix) -> Int {
    det_rat(&to_rat_matrix(a)).to_integer()
}

// ---------------------------------------------------------------------------
// signature

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

impl Signature {
    pub fn value(&self) -> i64 {
        self.plus as i64 - self.minus as i64
    }
}

/// Inertia of a symmetric rational matrix by congruence diagonalization.
pub fn signature(q: &RatMatrix) -> Result<Signature> {
    let n = q.rows();
    if q.cols() != n {
        return Err(Error::NonSymmetric);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if q.get(i, j) != q.get(j, i) {
                return Err(Error::NonSymmetric);
            }
        }
    }
    let mut a = q.clone();
    let mut sig = Signature { plus: 0, minus: 0, zero: 0 };
    let mut k = 0usize;
    while k < n {
        if let Some(p) = (k..n).find(|&i| !a.get(i, i).is_zero()) {
            sym_swap(&mut a, k, p);
            let piv = a.get(k, k).clone();
            for r in (k + 1)..n {
                if a.get(r, k).is_zero() {
                    continue;
                }
                let f = a.get(r, k) / &piv;
                sym_axpy(&mut a, r, k, &(-f));
            }
            if piv.is_positive() {
                sig.plus += 1;
            } else {
                sig.minus += 1;
            }
            k += 1;
            continue;
        }
        let pair = (k..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).find(|&(i, j)| !a.get(i, j).is_zero());
        let Some((i, j)) = pair else {
            sig.zero += n - k;
            break;
        };
        // hyperbolic block [[0 c] [c 0]]
        sym_swap(&mut a, k, i);
        let j = if j == k { i } else { j };
        sym_swap(&mut a, k + 1, j);
        let c = a.get(k, k + 1).clone();
        for r in (k + 2)..n {
            let alpha = a.get(r, k + 1) / &c;
            let beta = a.get(r, k) / &c;
            if !alpha.is_zero() {
                sym_axpy(&mut a, r, k, &(-alpha));
            }
            if !beta.is_zero() {
                sym_axpy(&mut a, r, k + 1, &(-beta));
            }
        }
        sig.plus += 1;
        sig.minus += 1;
        k += 2;
    }
    Ok(sig)
}

fn sym_swap(a: &mut RatMatrix, i: usize, j: usize) {
    a.swap_rows(i, j);
    a.swap_cols(i, j);
}

/// row_r += f row_s and col_r += f col_s (a congruence).
fn sym_axpy(a: &mut RatMatrix, r: usize, s: usize, f: &Rat) {
    let n = a.rows();
    for j in 0..n {
        let v = a.get(r, j) + f * a.get(s, j);
        a.set(r, j, v);
    }
    for i in 0..n {
        let v = a.get(i, r) + f * a.get(i, s);
        a.set(i, r, v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn im(rows: &[&[i64]]) -> IntMatrix {
        let cols = rows.first().map_or(0, |r| r.len());
        let r: Vec<Vec<Int>> = rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        IntMatrix::from_rows(&r, cols)
    }

    #[test]
    fn smith_small_cases() {
        assert_eq!(smith(&im(&[&[1, 0], &[0, 1]])).invariant_factors, vec![int(1), int(1)]);
        assert_eq!(smith(&im(&[&[2, 0], &[0, 3]])).invariant_factors, vec![int(1), int(6)]);
        assert!(smith(&im(&[&[0, 0], &[0, 0]])).invariant_factors.is_empty());
        let a = im(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let s = smith(&a);
        assert_eq!(s.invariant_factors, vec![int(2), int(6), int(12)]);
        assert_eq!(s.left.mul(&a).mul(&s.right), s.diagonal(3, 3));
    }

    #[test]
    fn hermite_identity_and_shape() {
        let h = hermite_column(&im(&[&[1, 0], &[0, 1]]));
        assert_eq!(h.h, im(&[&[1, 0], &[0, 1]]));
        let a = im(&[&[3, 5, 7], &[1, 2, 9]]);
        let h = hermite_column(&a);
        assert_eq!(a.mul(&h.u), h.h);
        assert_eq!(det_int(&h.u).abs(), int(1));
        assert_eq!(h.pivots, vec![0, 1]);
        assert_eq!(h.h.get(0, 0), &int(1));
        assert!(h.h.col(2).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn kernel_examples() {
        let k = integer_kernel(&im(&[&[1, 1]]));
        assert_eq!(k, im(&[&[1], &[-1]]));
        assert_eq!(integer_kernel(&IntMatrix::identity(3)).cols(), 0);
    }

    #[test]
    fn saturation_examples() {
        assert_eq!(saturate_lattice(&im(&[&[2], &[0]])), im(&[&[1], &[0]]));
        assert_eq!(saturate_lattice(&im(&[&[1, 0], &[0, 1]])), IntMatrix::identity(2));
        let b = im(&[&[1, 1], &[1, -1]]);
        assert_eq!(saturate_lattice(&b), IntMatrix::identity(2));
        assert_eq!(saturation_index(&b), int(2));
    }

    #[test]
    fn signature_examples() {
        let q = im(&[&[1, 0], &[0, -1]]);
        let s = signature(&to_rat_matrix(&q)).unwrap();
        assert_eq!((s.plus, s.minus, s.zero), (1, 1, 0));
        let hyp = im(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 0]]);
        let s = signature(&to_rat_matrix(&hyp)).unwrap();
        assert_eq!((s.plus, s.minus, s.zero), (1, 1, 1));
        let bad = im(&[&[0, 1], &[2, 0]]);
        assert!(matches!(signature(&to_rat_matrix(&bad)), Err(Error::NonSymmetric)));
    }

    #[test]
    fn solving() {
        let a = im(&[&[2, 0], &[0, 3]]);
        assert_eq!(solve_integer(&a, &[int(4), int(3)]), Some(vec![int(2), int(1)]));
        assert_eq!(solve_integer(&a, &[int(1), int(3)]), None);
        let r = to_rat_matrix(&im(&[&[1, 1], &[2, 2]]));
        assert!(solve_rational(&r, &[rat(1, 1), rat(3, 1)]).is_none());
        assert_eq!(rational_kernel(&r).len(), 1);
    }

    #[test]
    fn reduce_is_canonical() {
        let basis = row_lattice_basis(&im(&[&[2, 1, 0], &[0, 3, 3]]));
        let v = vec![int(5), int(7), int(1)];
        let w: Vec<Int> = vec_add(&v, &vec_scale(&int(4), basis.row(0)));
        let w = vec_sub(&w, &vec_scale(&int(2), basis.row(1)));
        assert_eq!(reduce_mod_rows(&basis, &v), reduce_mod_rows(&basis, &w));
    }
}
