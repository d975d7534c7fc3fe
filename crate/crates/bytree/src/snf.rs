//! Exact integer matrices, Smith normal form with transformation matrices,
//! and derived lattice operations (kernels, exact solving, lattice bases).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Dense matrix of arbitrary-precision integers, row major.
#[derive(Clone, PartialEq, Eq)]
pub struct IMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

impl std::fmt::Debug for IMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "IMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for IMat {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl IMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IMat { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IMat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<BigInt>], cols: usize) -> Self {
        let mut m = IMat::zero(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "row length mismatch");
            for (j, v) in r.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let data: Vec<Vec<BigInt>> =
            rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
        IMat::from_rows(&data, cols)
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        (0..self.cols).map(|j| self[(i, j)].clone()).collect()
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> IMat {
        let mut t = IMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IMat) -> IMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = IMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let p = &self[(i, k)] * &other[(k, j)];
                    out[(i, j)] += p;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| &self[(i, j)] * &v[j]).sum())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    /// Stack `other` below `self` (same column count).
    pub fn vstack(&self, other: &IMat) -> IMat {
        assert_eq!(self.cols, other.cols);
        let mut m = IMat::zero(self.rows + other.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..self.cols {
                m[(self.rows + i, j)] = other[(i, j)].clone();
            }
        }
        m
    }

    /// Place `other` to the right of `self` (same row count).
    pub fn hstack(&self, other: &IMat) -> IMat {
        assert_eq!(self.rows, other.rows);
        let mut m = IMat::zero(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                m[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        m
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }
}

/// Result of a Smith normal form computation: `u * a * v = d` with `u`, `v`
/// unimodular and `d` diagonal with a divisibility chain d1 | d2 | ...
/// Inverses of the transforms are tracked alongside.
#[derive(Clone, Debug)]
pub struct Snf {
    pub d: IMat,
    pub u: IMat,
    pub u_inv: IMat,
    pub v: IMat,
    pub v_inv: IMat,
    pub rank: usize,
}

pub fn smith_normal_form(a: &IMat) -> Snf {
    let mut d = a.clone();
    let rows = d.rows;
    let cols = d.cols;
    let mut u = IMat::identity(rows);
    let mut u_inv = IMat::identity(rows);
    let mut v = IMat::identity(cols);
    let mut v_inv = IMat::identity(cols);

    // Elementary operations, mirrored onto the transforms and their inverses.
    macro_rules! row_swap {
        ($i:expr, $j:expr) => {{
            let (i, j) = ($i, $j);
            if i != j {
                for c in 0..cols {
                    let t = d[(i, c)].clone();
                    d[(i, c)] = d[(j, c)].clone();
                    d[(j, c)] = t;
                }
                for c in 0..rows {
                    let t = u[(i, c)].clone();
                    u[(i, c)] = u[(j, c)].clone();
                    u[(j, c)] = t;
                    let t = u_inv[(c, i)].clone();
                    u_inv[(c, i)] = u_inv[(c, j)].clone();
                    u_inv[(c, j)] = t;
                }
            }
        }};
    }
    macro_rules! col_swap {
        ($i:expr, $j:expr) => {{
            let (i, j) = ($i, $j);
            if i != j {
                for r in 0..rows {
                    let t = d[(r, i)].clone();
                    d[(r, i)] = d[(r, j)].clone();
                    d[(r, j)] = t;
                }
                for r in 0..cols {
                    let t = v[(r, i)].clone();
                    v[(r, i)] = v[(r, j)].clone();
                    v[(r, j)] = t;
                    let t = v_inv[(i, r)].clone();
                    v_inv[(i, r)] = v_inv[(j, r)].clone();
                    v_inv[(j, r)] = t;
                }
            }
        }};
    }
    // row i -= q * row t
    macro_rules! row_sub {
        ($i:expr, $t:expr, $q:expr) => {{
            let (i, t, q) = ($i, $t, $q);
            for c in 0..cols {
                let p = &q * &d[(t, c)];
                d[(i, c)] -= p;
            }
            for c in 0..rows {
                let p = &q * &u[(t, c)];
                u[(i, c)] -= p;
                let p = &q * &u_inv[(c, i)];
                u_inv[(c, t)] += p;
            }
        }};
    }
    // col j -= q * col t
    macro_rules! col_sub {
        ($j:expr, $t:expr, $q:expr) => {{
            let (j, t, q) = ($j, $t, $q);
            for r in 0..rows {
                let p = &q * &d[(r, t)];
                d[(r, j)] -= p;
            }
            for r in 0..cols {
                let p = &q * &v[(r, t)];
                v[(r, j)] -= p;
                let p = &q * &v_inv[(j, r)];
                v_inv[(t, r)] += p;
            }
        }};
    }
    macro_rules! row_negate {
        ($i:expr) => {{
            let i = $i;
            for c in 0..cols {
                let t = -d[(i, c)].clone();
                d[(i, c)] = t;
            }
            for c in 0..rows {
                let t = -u[(i, c)].clone();
                u[(i, c)] = t;
                let t = -u_inv[(c, i)].clone();
                u_inv[(c, i)] = t;
            }
        }};
    }

    let n = rows.min(cols);
    let mut t = 0;
    while t < n {
        // Find a pivot of smallest absolute value in the trailing submatrix.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !d[(i, j)].is_zero()
                    && pivot.map_or(true, |(pi, pj)| d[(i, j)].abs() < d[(pi, pj)].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        row_swap!(t, pi);
        col_swap!(t, pj);

        // Clear row and column t; the pivot may shrink, so iterate.
        'clear: loop {
            for i in (t + 1)..rows {
                if !d[(i, t)].is_zero() {
                    let (q, r) = d[(i, t)].div_rem(&d[(t, t)]);
                    row_sub!(i, t, q);
                    if !r.is_zero() {
                        // Remainder becomes the new, smaller pivot.
                        row_swap!(t, i);
                        continue 'clear;
                    }
                }
            }
            for j in (t + 1)..cols {
                if !d[(t, j)].is_zero() {
                    let (q, r) = d[(t, j)].div_rem(&d[(t, t)]);
                    col_sub!(j, t, q);
                    if !r.is_zero() {
                        col_swap!(t, j);
                        continue 'clear;
                    }
                }
            }
            // Enforce divisibility of the trailing submatrix by the pivot.
            let mut fixed = true;
            'divcheck: for i in (t + 1)..rows {
                for j in (t + 1)..cols {
                    if !(&d[(i, j)] % &d[(t, t)]).is_zero() {
                        // Fold row i into row t to expose a smaller pivot.
                        row_sub!(t, i, BigInt::from(-1));
                        fixed = false;
                        break 'divcheck;
                    }
                }
            }
            if fixed {
                break;
            }
        }
        if d[(t, t)].is_negative() {
            row_negate!(t);
        }
        t += 1;
    }

    let rank = (0..n).take_while(|&i| !d[(i, i)].is_zero()).count();
    Snf { d, u, u_inv, v, v_inv, rank }
}

impl Snf {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.d[(i, i)].clone()).collect()
    }
}

/// Basis of the integer kernel of `a` (as a map on column vectors),
/// returned as the columns of the result.
pub fn kernel_basis(a: &IMat) -> IMat {
    let s = smith_normal_form(a);
    let mut out = IMat::zero(a.cols, a.cols - s.rank);
    for (k, j) in (s.rank..a.cols).enumerate() {
        for i in 0..a.cols {
            out[(i, k)] = s.v[(i, j)].clone();
        }
    }
    out
}

/// Solve `a * x = b` exactly over the integers; `None` if unsolvable.
pub fn solve(a: &IMat, b: &[BigInt]) -> Option<Vec<BigInt>> {
    solve_snf(&smith_normal_form(a), b)
}

/// Same as `solve` but reusing a precomputed normal form of `a`.
pub fn solve_snf(s: &Snf, b: &[BigInt]) -> Option<Vec<BigInt>> {
    let ub = s.u.mul_vec(b);
    let mut y = vec![BigInt::zero(); s.d.cols];
    for i in 0..s.d.rows {
        if i < s.rank {
            let (q, r) = ub[i].div_rem(&s.d[(i, i)]);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !ub[i].is_zero() {
            return None;
        }
    }
    Some(s.v.mul_vec(&y))
}

/// A canonical basis (as columns) of the lattice generated by the columns
/// of `gens`: the column-style Hermite normal form, with positive pivots
/// and the entries left of each pivot reduced modulo it. Column operations
/// with Euclidean pivoting keep the entries small, unlike bases read off
/// the Smith transforms.
pub fn column_lattice_basis(gens: &IMat) -> IMat {
    let mut h = gens.clone();
    let rows = h.rows;
    let cols = h.cols;

    // col j -= q * col t
    fn col_sub(h: &mut IMat, j: usize, t: usize, q: &BigInt) {
        for r in 0..h.rows {
            let p = q * &h[(r, t)];
            h[(r, j)] -= p;
        }
    }
    fn col_swap(h: &mut IMat, a: usize, b: usize) {
        for r in 0..h.rows {
            let t = h[(r, a)].clone();
            h[(r, a)] = h[(r, b)].clone();
            h[(r, b)] = t;
        }
    }

    let mut p = 0; // next pivot column
    for r in 0..rows {
        if p >= cols {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for j in p..cols {
                if !h[(r, j)].is_zero()
                    && best.map_or(true, |b| h[(r, j)].abs() < h[(r, b)].abs())
                {
                    best = Some(j);
                }
            }
            let Some(bj) = best else { break };
            if bj != p {
                col_swap(&mut h, p, bj);
            }
            let mut clean = true;
            for j in (p + 1)..cols {
                if !h[(r, j)].is_zero() {
                    let q = &h[(r, j)] / &h[(r, p)];
                    if !q.is_zero() {
                        col_sub(&mut h, j, p, &q);
                    }
                    if !h[(r, j)].is_zero() {
                        clean = false;
                    }
                }
            }
            if clean {
                if h[(r, p)].is_negative() {
                    for i in 0..rows {
                        let t = -h[(i, p)].clone();
                        h[(i, p)] = t;
                    }
                }
                // reduce the pivot row entries of the earlier columns
                for j in 0..p {
                    let q = h[(r, j)].div_floor(&h[(r, p)]);
                    if !q.is_zero() {
                        col_sub(&mut h, j, p, &q);
                    }
                }
                p += 1;
                break;
            }
        }
    }

    let mut out = IMat::zero(rows, p);
    for j in 0..p {
        for i in 0..rows {
            out[(i, j)] = h[(i, j)].clone();
        }
    }
    out
}

/// Inverse of a unimodular integer matrix.
pub fn unimodular_inverse(a: &IMat) -> IMat {
    assert_eq!(a.rows, a.cols);
    let s = smith_normal_form(a);
    assert_eq!(s.rank, a.rows, "matrix is singular");
    // a = u_inv d v_inv with d = diag(+-1)... enforce d = I by exactness:
    for i in 0..a.rows {
        assert!(s.d[(i, i)].abs().is_one(), "matrix is not unimodular");
    }
    // a^{-1} = v d^{-1} u, and d is its own inverse entrywise when +-1.
    let mut di = IMat::zero(a.rows, a.rows);
    for i in 0..a.rows {
        di[(i, i)] = s.d[(i, i)].clone();
    }
    s.v.mul(&di).mul(&s.u)
}

/// Determinant via the normal form (product of diagonal times det of the
/// transforms, which are unimodular; the sign is not tracked, so this is
/// the absolute value).
pub fn abs_det(a: &IMat) -> BigInt {
    assert_eq!(a.rows, a.cols);
    let s = smith_normal_form(a);
    if s.rank < a.rows {
        return BigInt::zero();
    }
    let mut p = BigInt::one();
    for i in 0..a.rows {
        p *= &s.d[(i, i)];
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_snf(a: &IMat) {
        let s = smith_normal_form(a);
        assert_eq!(s.u.mul(a).mul(&s.v), s.d, "u*a*v != d");
        assert_eq!(s.u.mul(&s.u_inv), IMat::identity(a.rows));
        assert_eq!(s.v.mul(&s.v_inv), IMat::identity(a.cols));
        // divisibility chain
        for i in 1..s.rank {
            assert!((&s.d[(i, i)] % &s.d[(i - 1, i - 1)]).is_zero());
        }
    }

    #[test]
    fn snf_identity() {
        let a = IMat::identity(3);
        let s = smith_normal_form(&a);
        assert_eq!(s.d, IMat::identity(3));
        check_snf(&a);
    }

    #[test]
    fn snf_zero() {
        let a = IMat::zero(2, 3);
        let s = smith_normal_form(&a);
        assert!(s.d.is_zero());
        assert_eq!(s.rank, 0);
    }

    #[test]
    fn snf_star_gram() {
        // Gram matrix of the 4-leaf star at lengths (1,2,3): determinant 17.
        let a = IMat::from_i64(&[&[5, 3, 3], &[3, 4, 3], &[3, 3, 4]]);
        let s = smith_normal_form(&a);
        check_snf(&a);
        assert_eq!(
            s.diagonal(),
            vec![BigInt::from(1), BigInt::from(1), BigInt::from(17)]
        );
    }

    #[test]
    fn snf_random_consistency() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let rows = rng.gen_range(1..6);
            let cols = rng.gen_range(1..6);
            let mut a = IMat::zero(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    a[(i, j)] = BigInt::from(rng.gen_range(-9i64..=9));
                }
            }
            check_snf(&a);
        }
    }

    #[test]
    fn solve_and_kernel() {
        let a = IMat::from_i64(&[&[2, 0, 4], &[0, 3, 6]]);
        let b = vec![BigInt::from(6), BigInt::from(9)];
        let x = solve(&a, &b).unwrap();
        assert_eq!(a.mul_vec(&x), b);
        assert!(solve(&a, &[BigInt::from(1), BigInt::from(0)]).is_none());
        let k = kernel_basis(&a);
        assert_eq!(k.cols, 1);
        assert!(a.mul(&k).is_zero());
    }

    #[test]
    fn lattice_basis_and_inverse() {
        let gens = IMat::from_i64(&[&[2, 4, 6], &[0, 0, 3]]);
        let b = column_lattice_basis(&gens);
        assert_eq!(b.cols, 2);
        // every generator lies in the span of the basis
        for j in 0..gens.cols {
            assert!(solve(&b, &gens.col(j)).is_some());
        }
        let m = IMat::from_i64(&[&[1, 2], &[1, 3]]);
        let mi = unimodular_inverse(&m);
        assert_eq!(m.mul(&mi), IMat::identity(2));
    }
}

/// Signed determinant via fraction-free (Bareiss) elimination.
pub fn det(a: &IMat) -> BigInt {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = a.to_rows();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = t / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// True if the symmetric matrix has all leading principal minors positive.
pub fn is_positive_definite(a: &IMat) -> bool {
    assert_eq!(a.rows, a.cols);
    for k in 1..=a.rows {
        let mut sub = IMat::zero(k, k);
        for i in 0..k {
            for j in 0..k {
                sub[(i, j)] = a[(i, j)].clone();
            }
        }
        if det(&sub) <= BigInt::zero() {
            return false;
        }
    }
    true
}
