//! Exact rational convex geometry: polytopes with dual V/H representations,
//! dilations, translations, Minkowski sums, exact volumes, lattice-point
//! enumeration and lattice-map preimages.
//!
//! Everything is exact. Vertices are rational, halfspaces are primitive
//! integer rows `normal . x <= offset`, and all predicates are decided with
//! integer or rational arithmetic.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::linalg::{self, Matrix};
use crate::lp::{self, Constraint, Feasibility, Optimum};
use crate::{rat_from_i64, Error, Int, Rat, Result};

/// Default ambient-dimension cap for hull conversion (Fourier-Motzkin is
/// exact but not asymptotically clever; the supported workloads are small).
pub const DEFAULT_MAX_DIM: usize = 6;

/// Point of Q^n.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalVector {
    coords: Vec<Rat>,
}

impl RationalVector {
    pub fn new(coords: Vec<Rat>) -> Self {
        RationalVector { coords }
    }

    pub fn from_integers(coords: &[i64]) -> Self {
        RationalVector {
            coords: coords.iter().map(|&c| rat_from_i64(c)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Rat] {
        &self.coords
    }

    pub fn add(&self, other: &RationalVector) -> RationalVector {
        debug_assert_eq!(self.dim(), other.dim());
        RationalVector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, t: &Rat) -> RationalVector {
        RationalVector {
            coords: self.coords.iter().map(|c| c * t).collect(),
        }
    }

    fn canonical_string(&self) -> String {
        self.coords
            .iter()
            .map(|c| format!("{}/{}", c.numer(), c.denom()))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Halfspace `normal . x <= offset` with primitive integer data.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Halfspace {
    pub normal: Vec<Int>,
    pub offset: Int,
}

impl Halfspace {
    /// Exact membership test.
    pub fn admits(&self, p: &RationalVector) -> bool {
        self.eval(p) <= Rat::zero()
    }

    /// `normal . p - offset` as an exact rational.
    pub fn eval(&self, p: &RationalVector) -> Rat {
        let dot: Rat = self
            .normal
            .iter()
            .zip(p.coords())
            .map(|(a, x)| Rat::from_integer(a.clone()) * x)
            .sum();
        dot - Rat::from_integer(self.offset.clone())
    }

    pub fn admits_lattice(&self, p: &[i64]) -> bool {
        let dot: Int = self
            .normal
            .iter()
            .zip(p)
            .map(|(a, &x)| a * Int::from(x))
            .sum();
        dot <= self.offset
    }

    pub fn is_tight(&self, p: &RationalVector) -> bool {
        self.eval(p).is_zero()
    }
}

/// Bounded rational polytope carrying both representations.
///
/// Construction is V-rep first (convex hull of a finite vertex list), so
/// boundedness holds structurally; the derived H-rep is irredundant, with
/// equality pairs cutting the affine span when the polytope is not
/// full-dimensional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPolytope {
    vertices: Vec<RationalVector>,
    halfspaces: Vec<Halfspace>,
    dim_ambient: usize,
    dim_affine: usize,
}

impl RationalPolytope {
    /// Convex hull: derives the irredundant H-representation by exact
    /// Fourier-Motzkin elimination and drops non-vertex input points.
    pub fn from_vertices(vertices: Vec<RationalVector>) -> Result<Self> {
        Self::from_vertices_capped(vertices, DEFAULT_MAX_DIM)
    }

    /// Same as [`from_vertices`](Self::from_vertices) with a custom
    /// ambient-dimension cap.
    pub fn from_vertices_capped(vertices: Vec<RationalVector>, max_dim: usize) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::EmptyVertexSet);
        };
        let n = first.dim();
        if n == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if n > max_dim {
            return Err(Error::DimensionTooLarge { dim: n, max: max_dim });
        }
        for v in &vertices {
            if v.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.dim() });
            }
        }
        let mut points: Vec<RationalVector> = BTreeSet::from_iter(vertices).into_iter().collect();
        points = irredundant_vertices(points)?;
        let dim_affine = affine_dim_of(&points);
        let halfspaces = fourier_motzkin_hull(&points, n)?;
        Ok(RationalPolytope {
            vertices: points,
            halfspaces,
            dim_ambient: n,
            dim_affine,
        })
    }

    pub fn vertices(&self) -> &[RationalVector] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim_ambient
    }

    pub fn affine_dim(&self) -> usize {
        self.dim_affine
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.dim_affine == self.dim_ambient
    }

    pub fn contains(&self, p: &RationalVector) -> bool {
        p.dim() == self.dim_ambient && self.halfspaces.iter().all(|h| h.admits(p))
    }

    pub fn contains_lattice(&self, p: &[i64]) -> bool {
        p.len() == self.dim_ambient && self.halfspaces.iter().all(|h| h.admits_lattice(p))
    }

    /// Exact dilation by a positive rational factor.
    pub fn dilate(&self, t: &Rat) -> Result<Self> {
        if !t.is_positive() {
            return Err(Error::NonPositiveDilation);
        }
        let vertices = self.vertices.iter().map(|v| v.scale(t)).collect();
        let halfspaces = self
            .halfspaces
            .iter()
            .map(|h| scale_halfspace(h, t))
            .collect();
        Ok(RationalPolytope {
            vertices,
            halfspaces,
            dim_ambient: self.dim_ambient,
            dim_affine: self.dim_affine,
        })
    }

    /// Exact translation of both representations.
    pub fn translate(&self, u: &RationalVector) -> Result<Self> {
        if u.dim() != self.dim_ambient {
            return Err(Error::DimensionMismatch { expected: self.dim_ambient, got: u.dim() });
        }
        let vertices = self.vertices.iter().map(|v| v.add(u)).collect();
        let halfspaces = self
            .halfspaces
            .iter()
            .map(|h| translate_halfspace(h, u))
            .collect();
        Ok(RationalPolytope {
            vertices,
            halfspaces,
            dim_ambient: self.dim_ambient,
            dim_affine: self.dim_affine,
        })
    }

    /// Minimal integer shift into the nonnegative orthant: component `i` of
    /// the shift is `ceil(-min_i)`, so after shifting every coordinate
    /// hyperplane is approached within distance < 1.
    pub fn normalize_to_nonneg(&self) -> (Self, Vec<Int>) {
        let n = self.dim_ambient;
        let mut shift = Vec::with_capacity(n);
        for i in 0..n {
            let min = self
                .vertices
                .iter()
                .map(|v| v.coords()[i].clone())
                .min()
                .expect("polytope has vertices");
            shift.push((-min).ceil().to_integer());
        }
        let u = RationalVector::new(shift.iter().map(|s| Rat::from_integer(s.clone())).collect());
        let shifted = self.translate(&u).expect("dimensions match");
        (shifted, shift)
    }

    /// Hull of pairwise vertex sums.
    pub fn minkowski_sum(&self, other: &Self) -> Result<Self> {
        if other.dim_ambient != self.dim_ambient {
            return Err(Error::DimensionMismatch {
                expected: self.dim_ambient,
                got: other.dim_ambient,
            });
        }
        let mut sums = Vec::with_capacity(self.vertices.len() * other.vertices.len());
        for a in &self.vertices {
            for b in &other.vertices {
                sums.push(a.add(b));
            }
        }
        Self::from_vertices(sums)
    }

    /// Exact Euclidean volume; 0 when the polytope is lower-dimensional.
    ///
    /// Pyramid recursion over facets: projecting a facet along a coordinate
    /// with nonzero normal component cancels the norm factors exactly, so
    /// the whole computation stays rational.
    pub fn volume(&self) -> Rat {
        if self.dim_affine < self.dim_ambient {
            return Rat::zero();
        }
        let n = self.dim_ambient;
        if n == 1 {
            let min = self.vertices.iter().map(|v| v.coords()[0].clone()).min();
            let max = self.vertices.iter().map(|v| v.coords()[0].clone()).max();
            return max.unwrap() - min.unwrap();
        }
        let apex = &self.vertices[0];
        let mut total = Rat::zero();
        for h in &self.halfspaces {
            let height = -h.eval(apex); // offset - normal . apex >= 0
            if height.is_zero() {
                continue;
            }
            let Some(j) = h.normal.iter().position(|c| !c.is_zero()) else {
                continue;
            };
            let facet_vertices: Vec<RationalVector> = self
                .vertices
                .iter()
                .filter(|v| h.is_tight(v))
                .map(|v| drop_coordinate(v, j))
                .collect();
            if facet_vertices.len() < n {
                continue; // tight set too small to carry an (n-1)-face
            }
            let facet = RationalPolytope::from_vertices_capped(facet_vertices, self.dim_ambient)
                .expect("facet vertex list is nonempty and consistent");
            let base = facet.volume();
            if base.is_zero() {
                continue;
            }
            let aj = Rat::from_integer(h.normal[j].abs());
            total += height / aj * base;
        }
        total / rat_from_i64(n as i64)
    }

    /// All lattice points of the polytope, sorted lexicographically.
    pub fn lattice_points(&self) -> Result<LatticePointSet> {
        let n = self.dim_ambient;
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for i in 0..n {
            let coords = self.vertices.iter().map(|v| &v.coords()[i]);
            let min = coords.clone().min().expect("nonempty").clone();
            let max = coords.max().expect("nonempty").clone();
            lo.push(int_to_i64(&min.ceil().to_integer())?);
            hi.push(int_to_i64(&max.floor().to_integer())?);
        }
        let mut points = Vec::new();
        let mut cursor = vec![0i64; n];
        scan_box(&lo, &hi, 0, &mut cursor, &mut |p| {
            if self.contains_lattice(p) {
                points.push(p.to_vec());
            }
        });
        LatticePointSet::new(points, n)
    }

    /// Preimage under an invertible lattice map: applies the exact rational
    /// inverse to every vertex.
    pub fn preimage_under_lattice_map(&self, map: &LatticeMap) -> Result<Self> {
        if map.dim() != self.dim_ambient {
            return Err(Error::DimensionMismatch {
                expected: self.dim_ambient,
                got: map.dim(),
            });
        }
        let inv = map.rational_inverse();
        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                RationalVector::new(
                    (0..map.dim())
                        .map(|i| {
                            (0..map.dim())
                                .map(|j| inv.at(i, j) * &v.coords()[j])
                                .sum()
                        })
                        .collect(),
                )
            })
            .collect();
        Self::from_vertices(vertices)
    }

    /// Exact intersection with another polytope; `None` when empty.
    ///
    /// Vertex enumeration over the combined halfspace system: every vertex
    /// of the intersection is pinned by some n linearly independent tight
    /// rows, so enumerating n-subsets is complete.
    pub fn intersect(&self, other: &Self) -> Result<Option<Self>> {
        if other.dim_ambient != self.dim_ambient {
            return Err(Error::DimensionMismatch {
                expected: self.dim_ambient,
                got: other.dim_ambient,
            });
        }
        let n = self.dim_ambient;
        let rows: Vec<&Halfspace> = self.halfspaces.iter().chain(&other.halfspaces).collect();
        let mut candidates: BTreeSet<RationalVector> = BTreeSet::new();
        let mut subset = vec![0usize; n];
        enumerate_subsets(rows.len(), n, 0, 0, &mut subset, &mut |idx| {
            if let Some(p) = unique_tight_solution(&rows, idx, n) {
                if rows.iter().all(|h| h.admits(&p)) {
                    candidates.insert(p);
                }
            }
        });
        if candidates.is_empty() {
            return Ok(None);
        }
        Ok(Some(Self::from_vertices(candidates.into_iter().collect())?))
    }

    /// Deterministic canonical encoding for hashing.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let body = self
            .vertices
            .iter()
            .map(RationalVector::canonical_string)
            .collect::<Vec<_>>()
            .join(";");
        format!("polytope:{}:{}", self.dim_ambient, body).into_bytes()
    }
}

/// Finite subset of Z^n, sorted lexicographically and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePointSet {
    points: Vec<Vec<i64>>,
    ambient_dim: usize,
}

impl LatticePointSet {
    pub fn new(mut points: Vec<Vec<i64>>, ambient_dim: usize) -> Result<Self> {
        for p in &points {
            if p.len() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, got: p.len() });
            }
        }
        points.sort();
        points.dedup();
        Ok(LatticePointSet { points, ambient_dim })
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn is_nonnegative(&self) -> bool {
        self.points.iter().all(|p| p.iter().all(|&c| c >= 0))
    }

    pub fn translate(&self, shift: &[i64]) -> Result<Self> {
        if shift.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: shift.len(),
            });
        }
        let points = self
            .points
            .iter()
            .map(|p| p.iter().zip(shift).map(|(a, b)| a + b).collect())
            .collect();
        Self::new(points, self.ambient_dim)
    }

    /// Shift by `-min` per coordinate: lands in N^n touching every axis.
    pub fn normalize_to_nonneg(&self) -> (Self, Vec<i64>) {
        if self.points.is_empty() {
            return (self.clone(), vec![0; self.ambient_dim]);
        }
        let shift: Vec<i64> = (0..self.ambient_dim)
            .map(|i| -self.points.iter().map(|p| p[i]).min().unwrap())
            .collect();
        let shifted = self.translate(&shift).expect("dimension matches");
        (shifted, shift)
    }

    /// All pairwise sums (the Minkowski sum at the point-set level).
    pub fn minkowski_sum(&self, other: &Self) -> Result<Self> {
        if other.ambient_dim != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: other.ambient_dim,
            });
        }
        let mut sums = Vec::with_capacity(self.points.len() * other.points.len());
        for a in &self.points {
            for b in &other.points {
                sums.push(a.iter().zip(b).map(|(x, y)| x + y).collect());
            }
        }
        Self::new(sums, self.ambient_dim)
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let body = self
            .points
            .iter()
            .map(|p| {
                p.iter()
                    .map(i64::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(";");
        format!("lattice-set:{}:{}", self.ambient_dim, body).into_bytes()
    }
}

/// Injective endomorphism of Z^n given by an integer matrix with nonzero
/// determinant; the degree of the induced toric cover is |det|.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeMap {
    matrix: Matrix<Int>,
    degree: Int,
}

impl LatticeMap {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n.max(1),
                got: rows.iter().map(Vec::len).max().unwrap_or(0),
            });
        }
        let matrix = Matrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(Int::from).collect())
                .collect(),
        );
        let det = linalg::det_bareiss(&matrix);
        if det.is_zero() {
            return Err(Error::SingularMap);
        }
        Ok(LatticeMap { matrix, degree: det.abs() })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn degree(&self) -> &Int {
        &self.degree
    }

    pub fn matrix(&self) -> &Matrix<Int> {
        &self.matrix
    }

    fn rational_inverse(&self) -> Matrix<Rat> {
        let rat = self.matrix.map(|v| Rat::from_integer(v.clone()));
        linalg::inverse(&rat).expect("nonzero determinant")
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut body = String::new();
        for i in 0..self.matrix.rows() {
            for j in 0..self.matrix.cols() {
                body.push_str(&self.matrix.at(i, j).to_string());
                body.push(',');
            }
            body.push(';');
        }
        format!("lattice-map:{}:{}", self.dim(), body).into_bytes()
    }
}

fn drop_coordinate(v: &RationalVector, j: usize) -> RationalVector {
    RationalVector::new(
        v.coords()
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, c)| c.clone())
            .collect(),
    )
}

fn int_to_i64(v: &Int) -> Result<i64> {
    use num_traits::ToPrimitive;
    v.to_i64().ok_or(Error::CoordinateOverflow)
}

fn scale_halfspace(h: &Halfspace, t: &Rat) -> Halfspace {
    let offset = Rat::from_integer(h.offset.clone()) * t;
    let den = offset.denom().clone();
    normalize_halfspace(
        h.normal.iter().map(|a| a * &den).collect(),
        offset.numer().clone(),
    )
}

fn translate_halfspace(h: &Halfspace, u: &RationalVector) -> Halfspace {
    let dot: Rat = h
        .normal
        .iter()
        .zip(u.coords())
        .map(|(a, x)| Rat::from_integer(a.clone()) * x)
        .sum();
    let offset = Rat::from_integer(h.offset.clone()) + dot;
    let den = offset.denom().clone();
    normalize_halfspace(
        h.normal.iter().map(|a| a * &den).collect(),
        offset.numer().clone(),
    )
}

fn normalize_halfspace(normal: Vec<Int>, offset: Int) -> Halfspace {
    let mut g = offset.abs();
    for a in &normal {
        g = g.gcd(a);
    }
    if g.is_zero() || g.is_one() {
        return Halfspace { normal, offset };
    }
    Halfspace {
        normal: normal.iter().map(|a| a / &g).collect(),
        offset: offset / &g,
    }
}

fn affine_dim_of(points: &[RationalVector]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let base = &points[0];
    let rows: Vec<Vec<Rat>> = points[1..]
        .iter()
        .map(|p| {
            p.coords()
                .iter()
                .zip(base.coords())
                .map(|(a, b)| a - b)
                .collect()
        })
        .collect();
    linalg::rank_over_field(&Matrix::from_rows(rows))
}

/// Drop every input point lying in the hull of the others (exact LP test).
fn irredundant_vertices(points: Vec<RationalVector>) -> Result<Vec<RationalVector>> {
    if points.len() <= 1 {
        return Ok(points);
    }
    let n = points[0].dim();
    let mut kept = points;
    let mut i = 0;
    while i < kept.len() {
        if kept.len() == 1 {
            break;
        }
        let others: Vec<&RationalVector> =
            kept.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, p)| p).collect();
        let target = kept[i].clone();
        // lambda >= 0, sum lambda = 1, sum lambda_j v_j = target
        let vars = others.len();
        let mut cons = Vec::with_capacity(n + 1 + vars);
        for coord in 0..n {
            let coeffs: Vec<Rat> = others.iter().map(|p| p.coords()[coord].clone()).collect();
            cons.push(Constraint::eq(coeffs, target.coords()[coord].clone()));
        }
        cons.push(Constraint::eq(vec![Rat::one(); vars], Rat::one()));
        for j in 0..vars {
            let mut coeffs = vec![Rat::zero(); vars];
            coeffs[j] = Rat::one();
            cons.push(Constraint::ge(coeffs, Rat::zero()));
        }
        match lp::feasible_point(vars, &cons)? {
            Feasibility::Feasible(_) => {
                kept.remove(i);
            }
            Feasibility::Infeasible(_) => i += 1,
        }
    }
    Ok(kept)
}

#[derive(Debug, Clone)]
struct FmRow {
    coeffs: Vec<Rat>,
    rhs: Rat,
    eq: bool,
}

impl FmRow {
    fn canonical(&self) -> (Vec<Int>, Int, bool) {
        let mut lcm = self.rhs.denom().clone();
        for c in &self.coeffs {
            lcm = lcm.lcm(c.denom());
        }
        let lcm = Rat::from_integer(lcm.abs());
        let mut normal: Vec<Int> = self.coeffs.iter().map(|c| (c * &lcm).to_integer()).collect();
        let mut offset = (&self.rhs * &lcm).to_integer();
        let mut g = offset.abs();
        for a in &normal {
            g = g.gcd(a);
        }
        if !g.is_zero() && !g.is_one() {
            for a in normal.iter_mut() {
                *a /= &g;
            }
            offset /= &g;
        }
        if self.eq {
            // canonical orientation for equalities: first nonzero coeff positive
            if let Some(first) = normal.iter().find(|c| !c.is_zero()) {
                if first.is_negative() {
                    for a in normal.iter_mut() {
                        *a = -a.clone();
                    }
                    offset = -offset;
                }
            }
        }
        (normal, offset, self.eq)
    }
}

const FM_PRUNE_THRESHOLD: usize = 48;

/// Exact V-rep to H-rep conversion: express the hull as the projection of
/// the barycentric simplex and eliminate the weight variables.
fn fourier_motzkin_hull(points: &[RationalVector], n: usize) -> Result<Vec<Halfspace>> {
    let v = points.len();
    let total = n + v; // variables: x_0..x_{n-1}, lambda_0..lambda_{v-1}
    let mut rows: Vec<FmRow> = Vec::new();
    for coord in 0..n {
        let mut coeffs = vec![Rat::zero(); total];
        coeffs[coord] = Rat::one();
        for (j, p) in points.iter().enumerate() {
            coeffs[n + j] = -p.coords()[coord].clone();
        }
        rows.push(FmRow { coeffs, rhs: Rat::zero(), eq: true });
    }
    let mut ones = vec![Rat::zero(); total];
    for j in 0..v {
        ones[n + j] = Rat::one();
    }
    rows.push(FmRow { coeffs: ones, rhs: Rat::one(), eq: true });
    for j in 0..v {
        let mut coeffs = vec![Rat::zero(); total];
        coeffs[n + j] = -Rat::one();
        rows.push(FmRow { coeffs, rhs: Rat::zero(), eq: false });
    }

    for var in (n..total).rev() {
        rows = eliminate_variable(rows, var);
        rows = dedupe_rows(rows);
        if rows.len() > FM_PRUNE_THRESHOLD {
            rows = lp_prune(rows, var)?;
        }
    }
    // project coefficient vectors down to the x-variables
    for row in rows.iter_mut() {
        debug_assert!(row.coeffs[n..].iter().all(Zero::is_zero));
        row.coeffs.truncate(n);
    }
    // split equalities into opposite halfspace pairs
    let mut ineqs: Vec<FmRow> = Vec::new();
    for row in rows {
        if row.eq {
            ineqs.push(FmRow { coeffs: row.coeffs.clone(), rhs: row.rhs.clone(), eq: false });
            ineqs.push(FmRow {
                coeffs: row.coeffs.iter().map(|c| -c).collect(),
                rhs: -row.rhs,
                eq: false,
            });
        } else {
            ineqs.push(row);
        }
    }
    ineqs = dedupe_rows(ineqs);
    ineqs = lp_prune(ineqs, n)?;
    let mut out: Vec<Halfspace> = ineqs
        .into_iter()
        .map(|r| {
            let (normal, offset, _) = r.canonical();
            Halfspace { normal, offset }
        })
        .collect();
    out.sort();
    Ok(out)
}

fn eliminate_variable(rows: Vec<FmRow>, var: usize) -> Vec<FmRow> {
    // substitution through an equality row when available
    if let Some(pos) = rows.iter().position(|r| r.eq && !r.coeffs[var].is_zero()) {
        let pivot = rows[pos].clone();
        let pv = pivot.coeffs[var].clone();
        let mut out = Vec::with_capacity(rows.len() - 1);
        for (i, mut row) in rows.into_iter().enumerate() {
            if i == pos {
                continue;
            }
            if !row.coeffs[var].is_zero() {
                let f = &row.coeffs[var] / &pv;
                for (c, p) in row.coeffs.iter_mut().zip(&pivot.coeffs) {
                    *c = &*c - &(&f * p);
                }
                row.rhs = &row.rhs - &(&f * &pivot.rhs);
            }
            out.push(row);
        }
        return out;
    }
    let mut zero = Vec::new();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for row in rows {
        if row.coeffs[var].is_zero() {
            zero.push(row);
        } else if row.coeffs[var].is_positive() {
            pos.push(row);
        } else {
            neg.push(row);
        }
    }
    for p in &pos {
        for q in &neg {
            let cp = p.coeffs[var].clone();
            let cq = -q.coeffs[var].clone();
            let coeffs: Vec<Rat> = p
                .coeffs
                .iter()
                .zip(&q.coeffs)
                .map(|(a, b)| &(&cq * a) + &(&cp * b))
                .collect();
            let rhs = &(&cq * &p.rhs) + &(&cp * &q.rhs);
            debug_assert!(coeffs[var].is_zero());
            zero.push(FmRow { coeffs, rhs, eq: false });
        }
    }
    zero
}

fn dedupe_rows(rows: Vec<FmRow>) -> Vec<FmRow> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for row in rows {
        if row.coeffs.iter().all(Zero::is_zero) {
            debug_assert!(if row.eq { row.rhs.is_zero() } else { !row.rhs.is_negative() });
            continue;
        }
        if seen.insert(row.canonical()) {
            out.push(row);
        }
    }
    out
}

/// Remove rows implied by the remaining ones (exact max-LP per row).
/// `n_active` is the number of leading variables still meaningful.
fn lp_prune(mut rows: Vec<FmRow>, n_active: usize) -> Result<Vec<FmRow>> {
    let mut i = 0;
    while i < rows.len() {
        if rows[i].eq {
            i += 1;
            continue;
        }
        let objective: Vec<Rat> = rows[i].coeffs[..n_active].to_vec();
        let rhs = rows[i].rhs.clone();
        let others: Vec<Constraint> = rows
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, r)| {
                let coeffs = r.coeffs[..n_active].to_vec();
                if r.eq {
                    Constraint::eq(coeffs, r.rhs.clone())
                } else {
                    Constraint::le(coeffs, r.rhs.clone())
                }
            })
            .collect();
        let redundant = match lp::maximize(n_active, &objective, &others)? {
            Optimum::Optimal { value, .. } => value <= rhs,
            Optimum::Unbounded => false,
            // the projected set is nonempty, so the rest cannot be infeasible
            Optimum::Infeasible(_) => {
                return Err(Error::Internal("projection of a nonempty set is empty".into()))
            }
        };
        if redundant {
            rows.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(rows)
}

fn scan_box(lo: &[i64], hi: &[i64], depth: usize, cursor: &mut Vec<i64>, f: &mut impl FnMut(&[i64])) {
    if depth == lo.len() {
        f(cursor);
        return;
    }
    let mut c = lo[depth];
    while c <= hi[depth] {
        cursor[depth] = c;
        scan_box(lo, hi, depth + 1, cursor, f);
        c += 1;
    }
}

fn enumerate_subsets(
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
        enumerate_subsets(total, k, i + 1, depth + 1, subset, f);
    }
}

/// Solve `normal_i . x = offset_i` for the given subset; `None` unless the
/// system pins a unique point.
fn unique_tight_solution(rows: &[&Halfspace], idx: &[usize], n: usize) -> Option<RationalVector> {
    let mut aug = Matrix::from_fn(idx.len(), n + 1, |i, j| {
        let h = rows[idx[i]];
        if j < n {
            Rat::from_integer(h.normal[j].clone())
        } else {
            Rat::from_integer(h.offset.clone())
        }
    });
    let ech = linalg::reduced_row_echelon(&mut aug);
    if ech.pivots.last() == Some(&n) {
        return None; // inconsistent
    }
    if ech.rank() < n {
        return None; // not pinned
    }
    let mut x = vec![Rat::zero(); n];
    for (row, &pc) in ech.pivots.iter().enumerate() {
        x[pc] = aug.at(row, n).clone();
    }
    Some(RationalVector::new(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn pt(coords: &[i64]) -> RationalVector {
        RationalVector::from_integers(coords)
    }

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(Int::from(n), Int::from(d))
    }

    fn poly(vertices: &[&[i64]]) -> RationalPolytope {
        RationalPolytope::from_vertices(vertices.iter().map(|v| pt(v)).collect()).unwrap()
    }

    fn unit_square() -> RationalPolytope {
        poly(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]])
    }

    fn skew_triangle() -> RationalPolytope {
        poly(&[&[0, 0], &[2, 1], &[1, 2]])
    }

    #[test]
    fn standard_simplex_halfspaces() {
        let p = poly(&[&[0, 0], &[1, 0], &[0, 1]]);
        let mut want = [
            Halfspace { normal: vec![Int::from(-1), Int::from(0)], offset: Int::from(0) },
            Halfspace { normal: vec![Int::from(0), Int::from(-1)], offset: Int::from(0) },
            Halfspace { normal: vec![Int::from(1), Int::from(1)], offset: Int::from(1) },
        ];
        want.sort();
        assert_eq!(p.halfspaces(), &want[..]);
    }

    #[test]
    fn skew_triangle_edges_match_supporting_line_oracle() {
        let p = skew_triangle();
        // supporting lines: y <= 2x, y >= x/2, x + y <= 3
        let mut want = [
            Halfspace { normal: vec![Int::from(-2), Int::from(1)], offset: Int::from(0) },
            Halfspace { normal: vec![Int::from(1), Int::from(-2)], offset: Int::from(0) },
            Halfspace { normal: vec![Int::from(1), Int::from(1)], offset: Int::from(3) },
        ];
        want.sort();
        assert_eq!(p.halfspaces(), &want[..]);
        let oracle_hs = oracle::brute_force_hull(p.vertices());
        assert!(oracle::same_halfspace_sets(p.halfspaces(), &oracle_hs));
    }

    #[test]
    fn single_vertex_has_equality_pairs() {
        let p = poly(&[&[1, 1]]);
        assert_eq!(p.affine_dim(), 0);
        assert_eq!(p.halfspaces().len(), 4);
        assert!(p.contains(&pt(&[1, 1])));
        assert!(!p.contains(&pt(&[1, 2])));
        assert_eq!(p.lattice_points().unwrap().points(), &[vec![1, 1]]);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let err = RationalPolytope::from_vertices(vec![pt(&[0, 0]), pt(&[1, 2, 3])]);
        assert_eq!(err.unwrap_err(), Error::DimensionMismatch { expected: 2, got: 3 });
        assert!(matches!(
            RationalPolytope::from_vertices(vec![]),
            Err(Error::EmptyVertexSet)
        ));
    }

    #[test]
    fn redundant_input_points_are_dropped() {
        let p = poly(&[&[0, 0], &[2, 0], &[0, 2], &[1, 1], &[1, 0]]);
        assert_eq!(p.vertices().len(), 3);
    }

    #[test]
    fn lattice_points_examples() {
        let sq = unit_square();
        let pts = sq.lattice_points().unwrap();
        assert_eq!(pts.points(), &[vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);

        let tri = skew_triangle();
        let pts = tri.lattice_points().unwrap();
        assert_eq!(
            pts.points(),
            &[vec![0, 0], vec![1, 1], vec![1, 2], vec![2, 1]]
        );

        let tet = poly(&[&[0, 0, 0], &[1, 1, 0], &[1, 0, 1], &[0, 1, 1]]);
        let pts = tet.lattice_points().unwrap();
        assert_eq!(
            pts.points(),
            &[vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]
        );
    }

    #[test]
    fn dilate_examples() {
        let simplex = poly(&[&[0, 0], &[1, 0], &[0, 1]]);
        let same = simplex.dilate(&rat(1, 1)).unwrap();
        assert_eq!(same, simplex);

        let sq3 = unit_square().dilate(&rat(3, 1)).unwrap();
        assert_eq!(sq3.lattice_points().unwrap().len(), 16);

        let half = skew_triangle().dilate(&rat(1, 2)).unwrap();
        let mut verts = half.vertices().to_vec();
        verts.sort();
        assert_eq!(
            verts,
            vec![
                pt(&[0, 0]),
                RationalVector::new(vec![rat(1, 2), rat(1, 1)]),
                RationalVector::new(vec![rat(1, 1), rat(1, 2)]),
            ]
        );
        assert!(half.dilate(&rat(0, 1)).is_err());
        assert!(half.dilate(&rat(-2, 1)).is_err());
    }

    #[test]
    fn translate_examples() {
        let sq = unit_square();
        let zero = RationalVector::from_integers(&[0, 0]);
        assert_eq!(sq.translate(&zero).unwrap(), sq);

        let u = RationalVector::from_integers(&[5, 7]);
        let moved = sq.translate(&u).unwrap();
        let pts = moved.lattice_points().unwrap();
        assert_eq!(
            pts.points(),
            &[vec![5, 7], vec![5, 8], vec![6, 7], vec![6, 8]]
        );
        let back = moved
            .translate(&RationalVector::from_integers(&[-5, -7]))
            .unwrap();
        assert_eq!(back, sq);
        assert!(sq.translate(&pt(&[1])).is_err());
    }

    #[test]
    fn normalize_examples() {
        let sq = unit_square();
        let (norm, shift) = sq.normalize_to_nonneg();
        assert_eq!(shift, vec![Int::from(0), Int::from(0)]);
        assert_eq!(norm, sq);

        let p = poly(&[&[-1, -1], &[0, 0]]);
        let (_, shift) = p.normalize_to_nonneg();
        assert_eq!(shift, vec![Int::from(1), Int::from(1)]);

        let q = RationalPolytope::from_vertices(vec![
            RationalVector::new(vec![rat(-3, 2), rat(0, 1)]),
            RationalVector::new(vec![rat(0, 1), rat(2, 1)]),
        ])
        .unwrap();
        let (qn, shift) = q.normalize_to_nonneg();
        assert_eq!(shift, vec![Int::from(2), Int::from(0)]);
        assert!(qn
            .vertices()
            .iter()
            .all(|v| v.coords().iter().all(|c| !c.is_negative())));

        // a polytope deep inside the orthant is pulled back to the axes so
        // every coordinate hyperplane is approached within distance < 1
        let far = poly(&[&[5, 7], &[6, 7], &[5, 8], &[6, 8]]);
        let (fn_, shift) = far.normalize_to_nonneg();
        assert_eq!(shift, vec![Int::from(-5), Int::from(-7)]);
        for i in 0..2 {
            let min = fn_
                .vertices()
                .iter()
                .map(|v| v.coords()[i].clone())
                .min()
                .unwrap();
            assert!(!min.is_negative() && min < rat(1, 1));
        }
    }

    #[test]
    fn minkowski_examples() {
        let tri = skew_triangle();
        let origin = poly(&[&[0, 0]]);
        assert_eq!(tri.minkowski_sum(&origin).unwrap(), tri);

        let seg = RationalPolytope::from_vertices(vec![pt(&[0]), pt(&[1])]).unwrap();
        let sum = seg.minkowski_sum(&seg).unwrap();
        let mut verts = sum.vertices().to_vec();
        verts.sort();
        assert_eq!(verts, vec![pt(&[0]), pt(&[2])]);

        let simplex = poly(&[&[0, 0], &[1, 0], &[0, 1]]);
        let double = simplex.minkowski_sum(&simplex).unwrap();
        assert_eq!(double, simplex.dilate(&rat(2, 1)).unwrap());
    }

    #[test]
    fn volume_examples() {
        assert_eq!(skew_triangle().volume(), rat(3, 2));
        let tet = poly(&[&[0, 0, 0], &[1, 1, 0], &[1, 0, 1], &[0, 1, 1]]);
        assert_eq!(tet.volume(), rat(1, 3));
        assert_eq!(unit_square().volume(), rat(1, 1));
        let cube = poly(&[
            &[0, 0, 0],
            &[1, 0, 0],
            &[0, 1, 0],
            &[0, 0, 1],
            &[1, 1, 0],
            &[1, 0, 1],
            &[0, 1, 1],
            &[1, 1, 1],
        ]);
        assert_eq!(cube.volume(), rat(1, 1));
        let segment = poly(&[&[0, 0], &[2, 2]]);
        assert_eq!(segment.volume(), rat(0, 1));
    }

    #[test]
    fn preimage_examples() {
        let tet = poly(&[&[0, 0, 0], &[1, 1, 0], &[1, 0, 1], &[0, 1, 1]]);
        // columns are the images of e1, e2, e3
        let map = LatticeMap::new(vec![vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1]]).unwrap();
        assert_eq!(map.degree(), &Int::from(2));
        let pre = tet.preimage_under_lattice_map(&map).unwrap();
        let simplex3 = poly(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(pre, simplex3);

        let idmap = LatticeMap::new(vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        assert_eq!(tet.preimage_under_lattice_map(&idmap).unwrap(), tet);

        let twice = LatticeMap::new(vec![vec![2, 0], vec![0, 2]]).unwrap();
        let big = unit_square().dilate(&rat(2, 1)).unwrap();
        assert_eq!(big.preimage_under_lattice_map(&twice).unwrap(), unit_square());

        assert!(matches!(
            LatticeMap::new(vec![vec![1, 1], vec![2, 2]]),
            Err(Error::SingularMap)
        ));
    }

    #[test]
    fn intersection_examples() {
        let sq = unit_square();
        // crossing edge creates the new vertex (1, 1/2)
        let tri = poly(&[&[0, 0], &[2, 0], &[0, 1]]);
        let both = sq.intersect(&tri).unwrap().unwrap();
        assert_eq!(both.volume(), rat(3, 4));
        assert!(both
            .vertices()
            .contains(&RationalVector::new(vec![rat(1, 1), rat(1, 2)])));
        let far = poly(&[&[5, 5], &[6, 5], &[5, 6]]);
        assert!(sq.intersect(&far).unwrap().is_none());
        let same = sq.intersect(&sq).unwrap().unwrap();
        assert_eq!(same, sq);
    }

    #[test]
    fn lattice_set_basics() {
        let s = LatticePointSet::new(vec![vec![1, 0], vec![0, 1], vec![1, 0]], 2).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.points(), &[vec![0, 1], vec![1, 0]]);
        let (norm, shift) = LatticePointSet::new(vec![vec![-2, 3]], 2)
            .unwrap()
            .normalize_to_nonneg();
        assert_eq!(shift, vec![2, -3]);
        assert!(norm.is_nonnegative());
        let sum = s.minkowski_sum(&s).unwrap();
        assert_eq!(sum.points(), &[vec![0, 2], vec![1, 1], vec![2, 0]]);
    }

    #[test]
    fn lower_dimensional_bodies_in_higher_ambient() {
        // diagonal segment in R^3: equality pairs cut the affine span
        let seg = poly(&[&[0, 0, 0], &[1, 1, 1]]);
        assert_eq!(seg.affine_dim(), 1);
        assert_eq!(seg.volume(), rat(0, 1));
        assert_eq!(
            seg.lattice_points().unwrap().points(),
            &[vec![0, 0, 0], vec![1, 1, 1]]
        );
        assert!(seg.contains(&RationalVector::new(vec![
            rat(1, 2),
            rat(1, 2),
            rat(1, 2)
        ])));
        assert!(!seg.contains(&pt(&[1, 0, 0])));

        // a 2-flat triangle inside R^3
        let tri = poly(&[&[0, 0, 0], &[2, 0, 0], &[0, 2, 0]]);
        assert_eq!(tri.affine_dim(), 2);
        assert_eq!(tri.lattice_points().unwrap().len(), 6);
    }

    #[test]
    fn fractional_vertices_hull() {
        let p = RationalPolytope::from_vertices(vec![
            RationalVector::new(vec![rat(1, 2), rat(0, 1)]),
            RationalVector::new(vec![rat(0, 1), rat(1, 2)]),
            RationalVector::new(vec![rat(3, 2), rat(3, 2)]),
        ])
        .unwrap();
        assert_eq!(p.vertices().len(), 3);
        assert_eq!(p.volume(), rat(5, 8));
        // only (1,1) lies inside
        assert_eq!(p.lattice_points().unwrap().points(), &[vec![1, 1]]);
        let oracle_hs = oracle::brute_force_hull(p.vertices());
        assert!(oracle::same_halfspace_sets(p.halfspaces(), &oracle_hs));
    }

    #[test]
    fn volume_respects_dilation_and_translation() {
        let tri = skew_triangle();
        let t = rat(3, 2);
        let scaled = tri.dilate(&t).unwrap();
        assert_eq!(scaled.volume(), tri.volume() * &t * &t);
        let moved = tri
            .translate(&RationalVector::new(vec![rat(-7, 3), rat(5, 2)]))
            .unwrap();
        assert_eq!(moved.volume(), tri.volume());
    }

    #[test]
    fn preimage_volume_is_divided_by_degree() {
        let tet = poly(&[&[0, 0, 0], &[1, 1, 0], &[1, 0, 1], &[0, 1, 1]]);
        let map = LatticeMap::new(vec![vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1]]).unwrap();
        let pre = tet.preimage_under_lattice_map(&map).unwrap();
        let degree = Rat::from_integer(map.degree().clone());
        assert_eq!(pre.volume() * degree, tet.volume());
    }
}
