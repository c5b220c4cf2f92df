//! Independent brute-force oracles backing the test suites.
//!
//! Nothing in here is called from production paths; tests use these slower
//! routes to cross-check the optimized ones. Kept as a hidden public module
//! so integration suites in dependent crates can reach it.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::lattice_geometry::{Halfspace, RationalVector};
use crate::linalg::{kernel_vector, Matrix};
use crate::{Int, Rat};

/// Supporting-hyperplane hull: for every n-subset of the points, take the
/// hyperplane through it and keep it when all points lie on one side.
/// Complete for full-dimensional hulls.
pub fn brute_force_hull(points: &[RationalVector]) -> Vec<Halfspace> {
    let n = points[0].dim();
    let mut found: BTreeSet<Halfspace> = BTreeSet::new();
    let mut subset = vec![0usize; n];
    subsets(points.len(), n, 0, 0, &mut subset, &mut |idx| {
        // (a, b) with a . v = b for all chosen v: kernel of [v | -1]
        let sys = Matrix::from_fn(n, n + 1, |i, j| {
            if j < n {
                points[idx[i]].coords()[j].clone()
            } else {
                -Rat::one()
            }
        });
        let Some(kv) = kernel_vector(&sys) else {
            return;
        };
        if kv[..n].iter().all(Zero::is_zero) {
            return;
        }
        let normal: Vec<Rat> = kv[..n].to_vec();
        let offset = kv[n].clone();
        let side = |p: &RationalVector| -> std::cmp::Ordering {
            let dot: Rat = normal.iter().zip(p.coords()).map(|(a, x)| a * x).sum();
            dot.cmp(&offset)
        };
        use std::cmp::Ordering::*;
        if points.iter().all(|p| side(p) != Greater) {
            found.insert(to_primitive(&normal, &offset));
        }
        if points.iter().all(|p| side(p) != Less) {
            let neg: Vec<Rat> = normal.iter().map(|a| -a).collect();
            found.insert(to_primitive(&neg, &(-offset.clone())));
        }
    });
    found.into_iter().collect()
}

use num_traits::One;

fn to_primitive(normal: &[Rat], offset: &Rat) -> Halfspace {
    let mut lcm = offset.denom().clone();
    for c in normal {
        lcm = lcm.lcm(c.denom());
    }
    let lcm = Rat::from_integer(lcm.abs());
    let mut ints: Vec<Int> = normal.iter().map(|c| (c * &lcm).to_integer()).collect();
    let mut off = (offset * &lcm).to_integer();
    let mut g = off.abs();
    for a in &ints {
        g = g.gcd(a);
    }
    if !g.is_zero() && !g.is_one() {
        for a in ints.iter_mut() {
            *a /= &g;
        }
        off /= &g;
    }
    Halfspace { normal: ints, offset: off }
}

/// Set equality of two primitive halfspace lists.
pub fn same_halfspace_sets(a: &[Halfspace], b: &[Halfspace]) -> bool {
    let sa: BTreeSet<_> = a.iter().cloned().collect();
    let sb: BTreeSet<_> = b.iter().cloned().collect();
    sa == sb
}

/// Count lattice points of the hull of `points` by scanning the bounding
/// box against the brute-force hull halfspaces. Only valid for
/// full-dimensional hulls.
pub fn brute_force_lattice_count(points: &[RationalVector]) -> usize {
    let n = points[0].dim();
    let hull = brute_force_hull(points);
    let mut lo = vec![i64::MAX; n];
    let mut hi = vec![i64::MIN; n];
    for p in points {
        for i in 0..n {
            let c = &p.coords()[i];
            let f = c.floor().to_integer();
            let cground: i64 = use_i64(&f);
            let cc = c.ceil().to_integer();
            let cceil: i64 = use_i64(&cc);
            lo[i] = lo[i].min(cground);
            hi[i] = hi[i].max(cceil);
        }
    }
    let mut count = 0usize;
    let mut cursor = vec![0i64; n];
    scan(&lo, &hi, 0, &mut cursor, &mut |p| {
        if hull.iter().all(|h| h.admits_lattice(p)) {
            count += 1;
        }
    });
    count
}

fn use_i64(v: &Int) -> i64 {
    use num_traits::ToPrimitive;
    v.to_i64().expect("oracle inputs are small")
}

fn scan(lo: &[i64], hi: &[i64], d: usize, cursor: &mut Vec<i64>, f: &mut impl FnMut(&[i64])) {
    if d == lo.len() {
        f(cursor);
        return;
    }
    for c in lo[d]..=hi[d] {
        cursor[d] = c;
        scan(lo, hi, d + 1, cursor, f);
    }
}

fn subsets(
    total: usize,
    k: usize,
    start: usize,
    depth: usize,
    subset: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    if depth == k {
        f(subset);
        return;
    }
    for i in start..total {
        subset[depth] = i;
        subsets(total, k, i + 1, depth + 1, subset, f);
    }
}

/// Determinant by Laplace cofactor expansion. Exponential; test sizes only.
pub fn laplace_det(m: &Matrix<Int>) -> Int {
    let n = m.rows();
    assert_eq!(n, m.cols());
    if n == 0 {
        return Int::from(1);
    }
    if n == 1 {
        return m.at(0, 0).clone();
    }
    let mut det = Int::zero();
    for j in 0..n {
        if m.at(0, j).is_zero() {
            continue;
        }
        let minor = Matrix::from_fn(n - 1, n - 1, |r, c| {
            m.at(r + 1, if c < j { c } else { c + 1 }).clone()
        });
        let term = m.at(0, j) * laplace_det(&minor);
        if j % 2 == 0 {
            det += term;
        } else {
            det -= term;
        }
    }
    det
}

/// Rank as the largest k admitting a nonzero k-by-k minor, minors evaluated
/// by cofactor expansion. Exponential; keep matrices small.
pub fn rank_by_minors(m: &Matrix<Int>) -> usize {
    let max_k = m.rows().min(m.cols());
    for k in (1..=max_k).rev() {
        let mut rows_sel = vec![0usize; k];
        let mut hit = false;
        subsets(m.rows(), k, 0, 0, &mut rows_sel, &mut |ridx| {
            if hit {
                return;
            }
            let ridx = ridx.to_vec();
            let mut cols_sel = vec![0usize; k];
            subsets(m.cols(), k, 0, 0, &mut cols_sel, &mut |cidx| {
                if hit {
                    return;
                }
                let sub = Matrix::from_fn(k, k, |i, j| m.at(ridx[i], cidx[j]).clone());
                if !laplace_det(&sub).is_zero() {
                    hit = true;
                }
            });
        });
        if hit {
            return k;
        }
    }
    0
}
