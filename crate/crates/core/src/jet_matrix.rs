//! Jet matrices for monomial spaces: staircase ideals, the integer matrices
//! whose rank decides jet separation at the point 1_n, and the rational
//! multipoint variant for randomized r-point tests.

use num_traits::{One, Zero};

use crate::lattice_geometry::{LatticePointSet, RationalVector};
use crate::linalg::{self, Matrix};
use crate::{Error, Int, Rat, Result};

/// m-primary monomial ideal in the shifted variables, encoded by its finite
/// lower set `phi` of standard exponents and its minimal generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaircaseIdeal {
    phi: LatticePointSet,
    generators: Vec<Vec<i64>>,
}

impl StaircaseIdeal {
    /// The power ideal with `phi = { lambda : |lambda| <= m }` and the
    /// degree-(m+1) monomials as generators.
    pub fn power(m: u32, n: usize) -> Self {
        assert!(n >= 1, "dimension must be positive");
        let mut phi = Vec::new();
        let mut cursor = vec![0i64; n];
        enumerate_simplex(m as i64, 0, &mut cursor, &mut |p| phi.push(p.to_vec()));
        let mut generators = Vec::new();
        let mut cursor = vec![0i64; n];
        enumerate_degree(m as i64 + 1, 0, &mut cursor, &mut |p| generators.push(p.to_vec()));
        StaircaseIdeal {
            phi: LatticePointSet::new(phi, n).expect("consistent dims"),
            generators,
        }
    }

    /// Build from monomial generators. Errors unless the ideal is m-primary
    /// (a pure power generator on every axis) and proper.
    pub fn from_generators(gens: Vec<Vec<i64>>) -> Result<Self> {
        let Some(first) = gens.first() else {
            return Err(Error::EmptyGenerators);
        };
        let n = first.len();
        if n == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        for g in &gens {
            if g.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: g.len() });
            }
            if g.iter().any(|&c| c < 0) {
                return Err(Error::NegativeCoordinate(g.clone()));
            }
            if g.iter().all(|&c| c == 0) {
                return Err(Error::UnitIdeal);
            }
        }
        // box bound: the pure power on axis k caps lambda_k
        let mut cap = vec![0i64; n];
        for (axis, c) in cap.iter_mut().enumerate() {
            let pure = gens
                .iter()
                .filter(|g| g.iter().enumerate().all(|(i, &v)| i == axis || v == 0))
                .map(|g| g[axis])
                .min();
            match pure {
                Some(p) => *c = p - 1,
                None => return Err(Error::NotPrimary { axis }),
            }
        }
        let mut phi = Vec::new();
        let mut cursor = vec![0i64; n];
        scan_cap(&cap, 0, &mut cursor, &mut |p| {
            if !gens.iter().any(|g| dominates(p, g)) {
                phi.push(p.to_vec());
            }
        });
        let mut minimal: Vec<Vec<i64>> = gens
            .iter()
            .filter(|g| !gens.iter().any(|h| h != *g && dominates(g, h)))
            .cloned()
            .collect();
        minimal.sort();
        minimal.dedup();
        Ok(StaircaseIdeal {
            phi: LatticePointSet::new(phi, n).expect("consistent dims"),
            generators: minimal,
        })
    }

    pub fn phi(&self) -> &LatticePointSet {
        &self.phi
    }

    pub fn generators(&self) -> &[Vec<i64>] {
        &self.generators
    }

    pub fn colength(&self) -> usize {
        self.phi.len()
    }

    pub fn dim(&self) -> usize {
        self.phi.ambient_dim()
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut b = b"ideal:".to_vec();
        b.extend_from_slice(&self.phi.canonical_bytes());
        b
    }
}

/// `lambda` dominates `g` when `lambda - g` is componentwise nonnegative.
fn dominates(lambda: &[i64], g: &[i64]) -> bool {
    lambda.iter().zip(g).all(|(l, gg)| l >= gg)
}

fn enumerate_simplex(budget: i64, depth: usize, cursor: &mut Vec<i64>, f: &mut impl FnMut(&[i64])) {
    if depth == cursor.len() {
        f(cursor);
        return;
    }
    for c in 0..=budget {
        cursor[depth] = c;
        enumerate_simplex(budget - c, depth + 1, cursor, f);
    }
}

fn enumerate_degree(degree: i64, depth: usize, cursor: &mut Vec<i64>, f: &mut impl FnMut(&[i64])) {
    if depth + 1 == cursor.len() {
        cursor[depth] = degree;
        f(cursor);
        return;
    }
    for c in 0..=degree {
        cursor[depth] = c;
        enumerate_degree(degree - c, depth + 1, cursor, f);
    }
}

fn scan_cap(cap: &[i64], depth: usize, cursor: &mut Vec<i64>, f: &mut impl FnMut(&[i64])) {
    if depth == cap.len() {
        f(cursor);
        return;
    }
    for c in 0..=cap[depth] {
        cursor[depth] = c;
        scan_cap(cap, depth + 1, cursor, f);
    }
}

/// Entry convention for jet matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixForm {
    /// entry(lambda, u) = prod_k C(u_k, lambda_k)
    Binomial,
    /// entry(lambda, u) = prod_k u_k^lambda_k (rank-equivalent over lower sets)
    Power,
}

impl MatrixForm {
    pub fn tag(&self) -> &'static str {
        match self {
            MatrixForm::Binomial => "binomial",
            MatrixForm::Power => "power",
        }
    }
}

/// Integer jet matrix with rows indexed by the staircase exponents and
/// columns by the lattice points.
#[derive(Debug, Clone)]
pub struct JetMatrix {
    entries: Matrix<Int>,
    row_index: Vec<Vec<i64>>,
    col_index: Vec<Vec<i64>>,
    form: MatrixForm,
}

impl JetMatrix {
    pub fn entries(&self) -> &Matrix<Int> {
        &self.entries
    }

    pub fn rows(&self) -> usize {
        self.entries.rows()
    }

    pub fn cols(&self) -> usize {
        self.entries.cols()
    }

    pub fn row_index(&self) -> &[Vec<i64>] {
        &self.row_index
    }

    pub fn col_index(&self) -> &[Vec<i64>] {
        &self.col_index
    }

    pub fn form(&self) -> MatrixForm {
        self.form
    }

    /// Exact rank over Q (fraction-free elimination on big integers).
    pub fn rank_exact(&self) -> usize {
        linalg::rank_bareiss(&self.entries)
    }

    /// Rank mod a word prime; never exceeds the exact rank, so a full
    /// answer certifies fullness.
    pub fn rank_modular(&self, prime: u64) -> usize {
        linalg::modular::rank_mod_p(&self.entries, prime)
    }
}

fn binom_int(u: i64, l: i64) -> Int {
    if l > u {
        return Int::zero();
    }
    num_integer::binomial(Int::from(u), Int::from(l))
}

fn entry_for(form: MatrixForm, lambda: &[i64], u: &[i64]) -> Int {
    match form {
        MatrixForm::Binomial => {
            let mut acc = Int::one();
            for (&l, &uu) in lambda.iter().zip(u) {
                if l > uu {
                    return Int::zero();
                }
                acc *= binom_int(uu, l);
            }
            acc
        }
        MatrixForm::Power => {
            let mut acc = Int::one();
            for (&l, &uu) in lambda.iter().zip(u) {
                acc *= Int::from(uu).pow(l as u32);
            }
            acc
        }
    }
}

/// Build the jet matrix of a lattice-point set against a staircase ideal.
/// The set must live in N^n (normalize upstream).
pub fn build_jet_matrix(
    s: &LatticePointSet,
    ideal: &StaircaseIdeal,
    form: MatrixForm,
) -> Result<JetMatrix> {
    if !s.is_empty() && s.ambient_dim() != ideal.dim() {
        return Err(Error::DimensionMismatch { expected: ideal.dim(), got: s.ambient_dim() });
    }
    if let Some(bad) = s.points().iter().find(|p| p.iter().any(|&c| c < 0)) {
        return Err(Error::NegativeCoordinate(bad.clone()));
    }
    let row_index: Vec<Vec<i64>> = ideal.phi().points().to_vec();
    let col_index: Vec<Vec<i64>> = s.points().to_vec();
    let entries = Matrix::from_fn(row_index.len(), col_index.len(), |i, j| {
        entry_for(form, &row_index[i], &col_index[j])
    });
    Ok(JetMatrix { entries, row_index, col_index, form })
}

/// Verdict of the surjectivity test, with the optional hypersurface
/// certificate.
#[derive(Debug, Clone)]
pub struct JetRankOutcome {
    pub rank: usize,
    pub needed: usize,
    pub full: bool,
    /// Coefficients c_lambda (aligned with phi order) of a nonzero
    /// polynomial sum c_lambda u^lambda vanishing on all of S. Row-rank
    /// deficiency always yields one; the converse (a vanishing polynomial
    /// forcing deficiency) holds only in the square case #S = #phi.
    pub certificate: Option<Vec<Rat>>,
}

/// Decide whether the monomials indexed by `s` surject onto the jets cut
/// out by `ideal` at 1_n: rank A equals #phi.
pub fn is_full_jet_rank(s: &LatticePointSet, ideal: &StaircaseIdeal) -> Result<JetRankOutcome> {
    let jm = build_jet_matrix(s, ideal, MatrixForm::Power)?;
    let needed = ideal.colength();
    let rank = jm.rank_exact();
    let full = rank == needed;
    let certificate = if !full {
        let rat = jm.entries.map(|v| Rat::from_integer(v.clone()));
        linalg::kernel_vector(&rat.transpose())
    } else {
        None
    };
    Ok(JetRankOutcome { rank, needed, full, certificate })
}

/// Exact check that a certificate vector vanishes on every point of `s`.
pub fn certificate_vanishes(cert: &[Rat], ideal: &StaircaseIdeal, s: &LatticePointSet) -> bool {
    if cert.len() != ideal.colength() || cert.iter().all(Zero::is_zero) {
        return false;
    }
    s.points().iter().all(|u| {
        let mut acc = Rat::zero();
        for (c, lambda) in cert.iter().zip(ideal.phi().points()) {
            if c.is_zero() {
                continue;
            }
            acc += c * Rat::from_integer(entry_for(MatrixForm::Power, lambda, u));
        }
        acc.is_zero()
    })
}

/// Rational jet matrix for several base points: rows are (point, lambda)
/// pairs with |lambda| <= m_i, entries C(u, lambda) p_i^(u - lambda).
#[derive(Debug, Clone)]
pub struct MultiPointJetMatrix {
    entries: Matrix<Rat>,
    row_index: Vec<(usize, Vec<i64>)>,
    col_index: Vec<Vec<i64>>,
}

impl MultiPointJetMatrix {
    pub fn entries(&self) -> &Matrix<Rat> {
        &self.entries
    }

    pub fn rows(&self) -> usize {
        self.entries.rows()
    }

    pub fn cols(&self) -> usize {
        self.entries.cols()
    }

    pub fn row_index(&self) -> &[(usize, Vec<i64>)] {
        &self.row_index
    }

    pub fn col_index(&self) -> &[Vec<i64>] {
        &self.col_index
    }

    /// Exact rank: clear denominators per row, then Bareiss.
    pub fn rank_exact(&self) -> usize {
        linalg::rank_bareiss(&linalg::integerize_rows(&self.entries))
    }

    pub fn rank_modular(&self, prime: u64) -> usize {
        linalg::modular::rank_mod_p(&linalg::integerize_rows(&self.entries), prime)
    }

    pub fn has_full_row_rank_exact(&self) -> bool {
        self.rank_exact() == self.rows()
    }
}

/// Build the multipoint jet matrix at the given rational base points (all
/// coordinates nonzero, points distinct) for jet orders `mbar`.
pub fn build_multipoint_matrix(
    s: &LatticePointSet,
    points: &[RationalVector],
    mbar: &[u32],
) -> Result<MultiPointJetMatrix> {
    assert_eq!(points.len(), mbar.len(), "one jet order per point");
    let n = s.ambient_dim();
    if let Some(bad) = s.points().iter().find(|p| p.iter().any(|&c| c < 0)) {
        return Err(Error::NegativeCoordinate(bad.clone()));
    }
    for p in points {
        if p.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: p.dim() });
        }
        if p.coords().iter().any(Zero::is_zero) {
            return Err(Error::ZeroCoordinatePoint);
        }
    }
    for (i, p) in points.iter().enumerate() {
        if points[i + 1..].contains(p) {
            return Err(Error::CoincidentPoints);
        }
    }
    let mut row_index = Vec::new();
    for (i, &m) in mbar.iter().enumerate() {
        for lambda in StaircaseIdeal::power(m, n).phi().points() {
            row_index.push((i, lambda.clone()));
        }
    }
    let col_index: Vec<Vec<i64>> = s.points().to_vec();
    let entries = Matrix::from_fn(row_index.len(), col_index.len(), |r, c| {
        let (pi, lambda) = &row_index[r];
        multipoint_entry(&points[*pi], lambda, &col_index[c])
    });
    Ok(MultiPointJetMatrix { entries, row_index, col_index })
}

fn multipoint_entry(p: &RationalVector, lambda: &[i64], u: &[i64]) -> Rat {
    let mut acc = Rat::one();
    for ((&l, &uu), coord) in lambda.iter().zip(u).zip(p.coords()) {
        if l > uu {
            return Rat::zero();
        }
        let b = binom_int(uu, l);
        if b.is_zero() {
            return Rat::zero();
        }
        let exp = (uu - l) as u32;
        let num = coord.numer().pow(exp);
        let den = coord.denom().pow(exp);
        acc *= Rat::from_integer(b) * Rat::new(num, den);
    }
    acc
}

/// Number of jet conditions `C(m + n, n)` imposed by an order-m jet in
/// dimension n.
pub fn jet_conditions(m: u32, n: usize) -> usize {
    use num_traits::ToPrimitive;
    num_integer::binomial(Int::from(m as i64 + n as i64), Int::from(n as i64))
        .to_usize()
        .expect("jet condition counts stay small")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn set(points: &[&[i64]]) -> LatticePointSet {
        LatticePointSet::new(points.iter().map(|p| p.to_vec()).collect(), points[0].len())
            .unwrap()
    }

    #[test]
    fn power_ideal_sizes() {
        assert_eq!(StaircaseIdeal::power(0, 2).colength(), 1);
        assert_eq!(StaircaseIdeal::power(2, 2).colength(), 6);
        assert_eq!(StaircaseIdeal::power(3, 3).colength(), 20);
        // generators of m^(m+1) are the degree m+1 monomials
        let p = StaircaseIdeal::power(2, 2);
        let mut gens = p.generators().to_vec();
        gens.sort();
        assert_eq!(gens, vec![vec![0, 3], vec![1, 2], vec![2, 1], vec![3, 0]]);
    }

    #[test]
    fn collision_staircase_from_generators() {
        let ideal = StaircaseIdeal::from_generators(vec![
            vec![6, 0],
            vec![4, 1],
            vec![2, 2],
            vec![1, 3],
            vec![0, 4],
        ])
        .unwrap();
        assert_eq!(ideal.colength(), 13);
        let mut expect: Vec<Vec<i64>> = Vec::new();
        for x in 0..=5 {
            expect.push(vec![x, 0]);
        }
        for x in 0..=3 {
            expect.push(vec![x, 1]);
        }
        expect.push(vec![0, 2]);
        expect.push(vec![1, 2]);
        expect.push(vec![0, 3]);
        expect.sort();
        assert_eq!(ideal.phi().points(), &expect[..]);
    }

    #[test]
    fn maximal_ideal_and_error_cases() {
        let m = StaircaseIdeal::from_generators(vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(m.phi().points(), &[vec![0, 0]]);

        assert_eq!(
            StaircaseIdeal::from_generators(vec![vec![2, 0]]).unwrap_err(),
            Error::NotPrimary { axis: 1 }
        );
        assert!(matches!(
            StaircaseIdeal::from_generators(vec![]),
            Err(Error::EmptyGenerators)
        ));
        assert_eq!(
            StaircaseIdeal::from_generators(vec![vec![0, 0], vec![1, 0]]).unwrap_err(),
            Error::UnitIdeal
        );
    }

    #[test]
    fn nonminimal_generators_are_minimized() {
        let ideal =
            StaircaseIdeal::from_generators(vec![vec![2, 0], vec![0, 2], vec![2, 1]]).unwrap();
        assert_eq!(ideal.generators(), &[vec![0, 2], vec![2, 0]]);
        assert_eq!(ideal.colength(), 4);
    }

    #[test]
    fn vandermonde_from_power_form() {
        let s = set(&[&[0], &[1], &[2]]);
        let jm = build_jet_matrix(&s, &StaircaseIdeal::power(2, 1), MatrixForm::Power).unwrap();
        let expect = Matrix::from_rows(vec![
            vec![Int::from(1), Int::from(1), Int::from(1)],
            vec![Int::from(0), Int::from(1), Int::from(2)],
            vec![Int::from(0), Int::from(1), Int::from(4)],
        ]);
        assert_eq!(jm.entries(), &expect);
        assert_eq!(jm.rank_exact(), 3);
    }

    #[test]
    fn binomial_form_rank_three() {
        let s = set(&[&[0, 0], &[1, 0], &[0, 1]]);
        let jm = build_jet_matrix(&s, &StaircaseIdeal::power(1, 2), MatrixForm::Binomial).unwrap();
        assert_eq!(jm.rank_exact(), 3);
        assert_eq!(jm.entries().at(0, 0), &Int::from(1));
        assert_eq!(oracle::rank_by_minors(jm.entries()), 3);
    }

    #[test]
    fn empty_set_zero_columns() {
        let s = LatticePointSet::new(vec![], 2).unwrap();
        let jm = build_jet_matrix(&s, &StaircaseIdeal::power(1, 2), MatrixForm::Power).unwrap();
        assert_eq!(jm.cols(), 0);
        assert_eq!(jm.rank_exact(), 0);
    }

    #[test]
    fn negative_coordinates_rejected() {
        let s = set(&[&[-1, 0]]);
        assert!(matches!(
            build_jet_matrix(&s, &StaircaseIdeal::power(1, 2), MatrixForm::Power),
            Err(Error::NegativeCoordinate(_))
        ));
    }

    #[test]
    fn full_rank_triangle_points() {
        let s = set(&[&[0, 0], &[1, 1], &[2, 1], &[1, 2]]);
        let out = is_full_jet_rank(&s, &StaircaseIdeal::power(1, 2)).unwrap();
        assert!(out.full);
        assert_eq!(out.rank, 3);
    }

    #[test]
    fn collinear_points_fail_with_line_certificate() {
        let s = set(&[&[0, 0], &[1, 1], &[2, 2]]);
        let out = is_full_jet_rank(&s, &StaircaseIdeal::power(1, 2)).unwrap();
        assert!(!out.full);
        let cert = out.certificate.expect("deficient rank emits certificate");
        assert!(certificate_vanishes(&cert, &StaircaseIdeal::power(1, 2), &s));

        // four collinear points: still rank-deficient, still a line witness
        let s4 = set(&[&[0, 0], &[1, 1], &[2, 2], &[3, 3]]);
        let out = is_full_jet_rank(&s4, &StaircaseIdeal::power(1, 2)).unwrap();
        assert!(!out.full);
        let cert = out.certificate.expect("kernel direction is unconditional");
        assert!(certificate_vanishes(&cert, &StaircaseIdeal::power(1, 2), &s4));
    }

    #[test]
    fn collision_witness_set_has_rank_thirteen() {
        let ideal = StaircaseIdeal::from_generators(vec![
            vec![6, 0],
            vec![4, 1],
            vec![2, 2],
            vec![1, 3],
            vec![0, 4],
        ])
        .unwrap();
        let s = collision_witness_set();
        let jm = build_jet_matrix(&s, &ideal, MatrixForm::Power).unwrap();
        assert_eq!(jm.rank_exact(), 13);
        // independent route: plain rational elimination
        let rat = jm.entries().map(|v| Rat::from_integer(v.clone()));
        assert_eq!(linalg::rank_over_field(&rat), 13);
        // and the modular screen agrees at several random primes
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..3 {
            let prime = linalg::modular::random_prime(&mut rng);
            assert_eq!(jm.rank_modular(prime), 13);
        }
    }

    fn collision_witness_set() -> LatticePointSet {
        let mut pts = vec![vec![0i64, 0]];
        for x in 0..=3 {
            pts.push(vec![x, 1]);
        }
        for x in 0..=5 {
            pts.push(vec![x, 2]);
        }
        for x in 0..=1 {
            pts.push(vec![x, 3]);
        }
        LatticePointSet::new(pts, 2).unwrap()
    }

    #[test]
    fn multipoint_at_ones_is_binomial_matrix() {
        let s = set(&[&[0, 0], &[1, 0], &[0, 1], &[2, 2]]);
        let ones = RationalVector::from_integers(&[1, 1]);
        let mp = build_multipoint_matrix(&s, &[ones], &[1]).unwrap();
        let jm = build_jet_matrix(&s, &StaircaseIdeal::power(1, 2), MatrixForm::Binomial).unwrap();
        for i in 0..mp.rows() {
            for j in 0..mp.cols() {
                assert_eq!(
                    mp.entries().at(i, j),
                    &Rat::from_integer(jm.entries().at(i, j).clone())
                );
            }
        }
    }

    #[test]
    fn multipoint_errors() {
        let s = set(&[&[0, 0], &[1, 0]]);
        let p = RationalVector::from_integers(&[1, 1]);
        let q = RationalVector::from_integers(&[1, 0]);
        assert!(matches!(
            build_multipoint_matrix(&s, &[p.clone(), p.clone()], &[0, 0]),
            Err(Error::CoincidentPoints)
        ));
        assert!(matches!(
            build_multipoint_matrix(&s, &[q], &[0]),
            Err(Error::ZeroCoordinatePoint)
        ));
    }

    #[test]
    fn two_point_evaluation_full_rank_on_nonproportional_monomials() {
        // r = 2, mbar = (0,0): 2x2 evaluation matrix at generic points
        let s = set(&[&[1, 0], &[0, 1]]);
        let p = RationalVector::from_integers(&[2, 3]);
        let q = RationalVector::from_integers(&[5, 7]);
        let mp = build_multipoint_matrix(&s, &[p, q], &[0, 0]).unwrap();
        assert_eq!(mp.rows(), 2);
        assert!(mp.has_full_row_rank_exact());
        // oracle: the 2x2 determinant via cofactor expansion
        let det = oracle::laplace_det(&linalg::integerize_rows(mp.entries()));
        assert!(!det.is_zero());
    }

    #[test]
    fn hermite_two_point_interpolation_full_rank() {
        // univariate: S = {0..5}, orders (a, b) = (2, 1), a+b+2 <= 6
        let s = set(&[&[0], &[1], &[2], &[3], &[4], &[5]]);
        let p = RationalVector::from_integers(&[4]);
        let q = RationalVector::from_integers(&[9]);
        let mp = build_multipoint_matrix(&s, &[p, q], &[2, 1]).unwrap();
        assert_eq!(mp.rows(), 5);
        assert!(mp.has_full_row_rank_exact());
        // Hermite interpolation at distinct nodes is solvable; cross-check
        // the rank by cofactor minors
        assert_eq!(
            oracle::rank_by_minors(&linalg::integerize_rows(mp.entries())),
            5
        );
    }

    #[test]
    fn jet_condition_counts() {
        assert_eq!(jet_conditions(0, 3), 1);
        assert_eq!(jet_conditions(2, 2), 6);
        assert_eq!(jet_conditions(5, 1), 6);
    }
}
