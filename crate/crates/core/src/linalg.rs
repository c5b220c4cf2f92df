//! Dense exact linear algebra.
//!
//! The elimination kernel is generic over a num-traits field bound so one
//! routine serves the rational paths (rank, RREF, nullspaces, solves, LP
//! pivots). Integer matrices additionally get fraction-free Bareiss
//! elimination, and `modular` holds the word-sized prime screen.

use num_traits::{Num, One, Signed, Zero};

use crate::{Int, Rat};

/// Field bound for the generic elimination kernel.
pub trait Field: Num + Clone {}
impl<T: Num + Clone> Field for T {}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

/// Outcome of `reduced_row_echelon`: pivot column per pivot row.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// In-place Gauss–Jordan over any field. Returns the pivot structure.
pub fn reduced_row_echelon<T: Field>(m: &mut Matrix<T>) -> Echelon {
    let mut pivots = Vec::new();
    let mut pr = 0;
    for col in 0..m.cols {
        if pr == m.rows {
            break;
        }
        let Some(sel) = (pr..m.rows).find(|&r| !m.at(r, col).is_zero()) else {
            continue;
        };
        m.swap_rows(pr, sel);
        let inv_pivot = T::one() / m.at(pr, col).clone();
        for j in col..m.cols {
            let v = m.at(pr, j).clone() * inv_pivot.clone();
            m.set(pr, j, v);
        }
        for r in 0..m.rows {
            if r == pr || m.at(r, col).is_zero() {
                continue;
            }
            let factor = m.at(r, col).clone();
            for j in col..m.cols {
                let v = m.at(r, j).clone() - factor.clone() * m.at(pr, j).clone();
                m.set(r, j, v);
            }
        }
        pivots.push(col);
        pr += 1;
    }
    Echelon { pivots }
}

/// Rank over a field (Gauss–Jordan).
pub fn rank_over_field<T: Field>(m: &Matrix<T>) -> usize {
    let mut work = m.clone();
    reduced_row_echelon(&mut work).rank()
}

/// One nonzero kernel vector of `m` (viewing rows as equations m·x = 0),
/// or `None` when the kernel is trivial.
pub fn kernel_vector<T: Field>(m: &Matrix<T>) -> Option<Vec<T>> {
    let mut work = m.clone();
    let ech = reduced_row_echelon(&mut work);
    let free = (0..m.cols).find(|c| !ech.pivots.contains(c))?;
    let mut v = vec![T::zero(); m.cols];
    v[free] = T::one();
    for (row, &pc) in ech.pivots.iter().enumerate() {
        v[pc] = T::zero() - work.at(row, free).clone();
    }
    Some(v)
}

/// Solve m·x = rhs over a field; `None` if inconsistent. When the system is
/// underdetermined, free variables are set to zero.
pub fn solve<T: Field>(m: &Matrix<T>, rhs: &[T]) -> Option<Vec<T>> {
    assert_eq!(m.rows, rhs.len());
    let mut aug = Matrix::from_fn(m.rows, m.cols + 1, |i, j| {
        if j < m.cols {
            m.at(i, j).clone()
        } else {
            rhs[i].clone()
        }
    });
    let ech = reduced_row_echelon(&mut aug);
    if ech.pivots.last() == Some(&m.cols) {
        return None; // pivot in the rhs column: inconsistent
    }
    let mut x = vec![T::zero(); m.cols];
    for (row, &pc) in ech.pivots.iter().enumerate() {
        x[pc] = aug.at(row, m.cols).clone();
    }
    Some(x)
}

/// Exact inverse of a square matrix over a field; `None` if singular.
pub fn inverse<T: Field>(m: &Matrix<T>) -> Option<Matrix<T>> {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut aug = Matrix::from_fn(n, 2 * n, |i, j| {
        if j < n {
            m.at(i, j).clone()
        } else if j - n == i {
            T::one()
        } else {
            T::zero()
        }
    });
    let ech = reduced_row_echelon(&mut aug);
    if ech.rank() < n || ech.pivots.iter().any(|&p| p >= n) {
        return None;
    }
    Some(Matrix::from_fn(n, n, |i, j| aug.at(i, n + j).clone()))
}

/// Exact rank of an integer matrix by fraction-free Bareiss elimination.
///
/// Row and column pivots are searched freely; the exact-division property
/// survives the permutations since it only depends on leading minors of the
/// permuted matrix.
pub fn rank_bareiss(m: &Matrix<Int>) -> usize {
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut prev = Int::one();
    let mut pr = 0;
    for col in 0..cols {
        if pr == rows {
            break;
        }
        let Some(sel) = (pr..rows).find(|&r| !a.at(r, col).is_zero()) else {
            continue;
        };
        a.swap_rows(pr, sel);
        for r in pr + 1..rows {
            for j in col + 1..cols {
                let num =
                    a.at(pr, col) * a.at(r, j) - a.at(r, col) * a.at(pr, j);
                a.set(r, j, num / &prev);
            }
            a.set(r, col, Int::zero());
        }
        prev = a.at(pr, col).clone();
        pr += 1;
    }
    pr
}

/// Exact determinant of a square integer matrix (Bareiss).
pub fn det_bareiss(m: &Matrix<Int>) -> Int {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    if n == 0 {
        return Int::one();
    }
    let mut a = m.clone();
    let mut prev = Int::one();
    let mut sign = 1i32;
    for k in 0..n - 1 {
        if a.at(k, k).is_zero() {
            let Some(sel) = (k + 1..n).find(|&r| !a.at(r, k).is_zero()) else {
                return Int::zero();
            };
            a.swap_rows(k, sel);
            sign = -sign;
        }
        for r in k + 1..n {
            for j in k + 1..n {
                let num = a.at(k, k) * a.at(r, j) - a.at(r, k) * a.at(k, j);
                a.set(r, j, num / &prev);
            }
            a.set(r, k, Int::zero());
        }
        prev = a.at(k, k).clone();
    }
    let det = a.at(n - 1, n - 1).clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Clear denominators row by row: returns an integer matrix with the same
/// rank (each row is scaled by the positive lcm of its denominators).
pub fn integerize_rows(m: &Matrix<Rat>) -> Matrix<Int> {
    let mut out = Matrix::from_fn(m.rows(), m.cols(), |_, _| Int::zero());
    for i in 0..m.rows() {
        let mut lcm = Int::one();
        for j in 0..m.cols() {
            lcm = num_integer::lcm(lcm, m.at(i, j).denom().clone());
        }
        let lcm = lcm.abs();
        for j in 0..m.cols() {
            let v = m.at(i, j) * Rat::from_integer(lcm.clone());
            debug_assert!(crate::rat_is_integer(&v));
            out.set(i, j, v.to_integer());
        }
    }
    out
}

pub mod modular {
    //! Rank screening modulo random word-sized primes.

    use rand::Rng;

    use super::Matrix;
    use crate::Int;

    /// Deterministic Miller–Rabin for u64 (the fixed witness set is exact
    /// below 3.3e24).
    pub fn is_prime_u64(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
            if n == p {
                return true;
            }
            if n.is_multiple_of(p) {
                return false;
            }
        }
        let mut d = n - 1;
        let mut s = 0;
        while d.is_multiple_of(2) {
            d /= 2;
            s += 1;
        }
        'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
            let mut x = pow_mod(a % n, d, n);
            if x == 1 || x == n - 1 {
                continue;
            }
            for _ in 0..s - 1 {
                x = mul_mod(x, x, n);
                if x == n - 1 {
                    continue 'witness;
                }
            }
            return false;
        }
        true
    }

    fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
        ((a as u128 * b as u128) % m as u128) as u64
    }

    fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
        let mut acc = 1u64 % m;
        base %= m;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul_mod(acc, base, m);
            }
            base = mul_mod(base, base, m);
            exp >>= 1;
        }
        acc
    }

    /// Random prime in (2^30, 2^40); the lower cutoff avoids
    /// small-characteristic rank coincidences.
    pub fn random_prime(rng: &mut impl Rng) -> u64 {
        loop {
            let candidate: u64 = rng.gen_range((1u64 << 30) + 1..1u64 << 40) | 1;
            if is_prime_u64(candidate) {
                return candidate;
            }
        }
    }

    fn reduce(v: &Int, p: u64) -> u64 {
        use num_traits::{Signed, ToPrimitive};
        let m = v % Int::from(p);
        let m = if m.is_negative() { m + Int::from(p) } else { m };
        m.to_u64().unwrap_or_else(|| unreachable!("residue fits u64: {m} < {p}"))
    }

    /// Rank of an integer matrix reduced mod `p`. Always at most the exact
    /// rank; a full-rank answer therefore certifies full rank over Q.
    pub fn rank_mod_p(m: &Matrix<Int>, p: u64) -> usize {
        assert!(p > 1 << 30, "prime must exceed 2^30");
        let rows = m.rows();
        let cols = m.cols();
        let mut a: Vec<Vec<u64>> = (0..rows)
            .map(|i| (0..cols).map(|j| reduce(m.at(i, j), p)).collect())
            .collect();
        let mut rank = 0;
        for col in 0..cols {
            if rank == rows {
                break;
            }
            let Some(sel) = (rank..rows).find(|&r| a[r][col] != 0) else {
                continue;
            };
            a.swap(rank, sel);
            let inv = pow_mod(a[rank][col], p - 2, p);
            for v in a[rank][col..].iter_mut() {
                *v = mul_mod(*v, inv, p);
            }
            for r in 0..rows {
                if r == rank || a[r][col] == 0 {
                    continue;
                }
                let f = a[r][col];
                let pivot_row = a[rank][col..].to_vec();
                for (v, pv) in a[r][col..].iter_mut().zip(&pivot_row) {
                    let sub = mul_mod(f, *pv, p);
                    *v = (*v + p - sub) % p;
                }
            }
            rank += 1;
        }
        rank
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn int_matrix(rows: Vec<Vec<i64>>) -> Matrix<Int> {
        Matrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(Int::from).collect())
                .collect(),
        )
    }

    fn rat_matrix(rows: Vec<Vec<i64>>) -> Matrix<Rat> {
        Matrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(crate::rat_from_i64).collect())
                .collect(),
        )
    }

    #[test]
    fn vandermonde_rank_three_ways() {
        let v = int_matrix(vec![vec![1, 1, 1], vec![0, 1, 2], vec![0, 1, 4]]);
        assert_eq!(rank_bareiss(&v), 3);
        assert_eq!(rank_over_field(&v.map(|x| Rat::from_integer(x.clone()))), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = modular::random_prime(&mut rng);
        assert_eq!(modular::rank_mod_p(&v, p), 3);
    }

    #[test]
    fn zero_matrix_rank() {
        let z = int_matrix(vec![vec![0, 0], vec![0, 0]]);
        assert_eq!(rank_bareiss(&z), 0);
        assert_eq!(modular::rank_mod_p(&z, 2_147_483_647), 0);
    }

    #[test]
    fn bareiss_det_matches_cofactor() {
        let m = int_matrix(vec![vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1]]);
        assert_eq!(det_bareiss(&m), Int::from(-2));
        let id = int_matrix(vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(det_bareiss(&id), Int::one());
        let sing = int_matrix(vec![vec![1, 2], vec![2, 4]]);
        assert_eq!(det_bareiss(&sing), Int::zero());
    }

    #[test]
    fn kernel_vector_annihilates() {
        let m = rat_matrix(vec![vec![1, 2, 3], vec![2, 4, 6]]);
        let k = kernel_vector(&m).expect("rank-deficient");
        assert!(k.iter().any(|v| !v.is_zero()));
        for i in 0..m.rows() {
            let dot: Rat = (0..m.cols()).map(|j| m.at(i, j) * &k[j]).sum();
            assert!(dot.is_zero());
        }
        let full = rat_matrix(vec![vec![1, 0], vec![0, 1]]);
        assert!(kernel_vector(&full).is_none());
    }

    #[test]
    fn solve_and_inverse_roundtrip() {
        let m = rat_matrix(vec![vec![2, 1], vec![1, 1]]);
        let inv = inverse(&m).expect("invertible");
        for i in 0..2 {
            for j in 0..2 {
                let dot: Rat = (0..2).map(|k| m.at(i, k) * inv.at(k, j)).sum();
                let expect = if i == j { Rat::one() } else { Rat::zero() };
                assert_eq!(dot, expect);
            }
        }
        let x = solve(&m, &[crate::rat_from_i64(3), crate::rat_from_i64(2)]).unwrap();
        assert_eq!(x, vec![crate::rat_from_i64(1), crate::rat_from_i64(1)]);
        let sing = rat_matrix(vec![vec![1, 1], vec![1, 1]]);
        assert!(inverse(&sing).is_none());
        assert!(solve(&sing, &[Rat::zero(), Rat::one()]).is_none());
    }

    #[test]
    fn integerize_preserves_rank() {
        let m = Matrix::from_rows(vec![
            vec![Rat::new(Int::from(1), Int::from(2)), Rat::new(Int::from(1), Int::from(3))],
            vec![Rat::new(Int::from(3), Int::from(2)), Rat::new(Int::from(1), Int::from(1))],
        ]);
        let z = integerize_rows(&m);
        assert_eq!(rank_bareiss(&z), rank_over_field(&m));
    }

    #[test]
    fn random_primes_exceed_cutoff() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..5 {
            let p = modular::random_prime(&mut rng);
            assert!(p > 1 << 30);
            assert!(modular::is_prime_u64(p));
        }
    }

    #[test]
    fn bareiss_rank_on_low_rank_products() {
        // products of thin matrices force repeated pivot-column skips,
        // stressing the exact-division property under permuted pivoting
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..300 {
            let rows = rng.gen_range(2..=6);
            let cols = rng.gen_range(2..=6);
            let inner = rng.gen_range(1..=2);
            let b = Matrix::from_fn(rows, inner, |_, _| Int::from(rng.gen_range(-5i64..=5)));
            let c = Matrix::from_fn(inner, cols, |_, _| Int::from(rng.gen_range(-5i64..=5)));
            let mut m = Matrix::from_fn(rows, cols, |i, j| {
                (0..inner).map(|k| b.at(i, k) * c.at(k, j)).sum()
            });
            // sprinkle zero columns to trigger skips
            if cols > 2 {
                let dead = rng.gen_range(0..cols);
                for i in 0..rows {
                    m.set(i, dead, Int::zero());
                }
            }
            let exact = rank_bareiss(&m);
            let field = rank_over_field(&m.map(|x| Rat::from_integer(x.clone())));
            assert_eq!(exact, field);
            assert!(exact <= inner);
        }
    }

    #[test]
    fn modular_rank_bounded_by_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            use rand::Rng;
            let rows = rng.gen_range(1..5);
            let cols = rng.gen_range(1..5);
            let m = Matrix::from_fn(rows, cols, |_, _| Int::from(rng.gen_range(-9i64..=9)));
            let exact = rank_bareiss(&m);
            let p = modular::random_prime(&mut rng);
            assert!(modular::rank_mod_p(&m, p) <= exact);
        }
    }
}
