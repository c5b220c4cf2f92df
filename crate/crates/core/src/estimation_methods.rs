//! Lower-bound procedures for r > 1: staircase degeneration checks,
//! lattice-change pullbacks, and regular polytope decompositions with an
//! exact LP lifting-function test.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::bound_engine::{
    multipoint_seshadri_lower, volume_upper_bound, BoundResult, Config, Method, Weights,
};
use crate::jet_matrix::{is_full_jet_rank, jet_conditions, StaircaseIdeal};
use crate::lattice_geometry::{LatticePointSet, RationalPolytope, RationalVector};
use crate::lp::{self, Constraint, FarkasCertificate, Feasibility};
use crate::{rat_is_integer, Error, Int, Rat, Result};

/// Verdict of the staircase degeneration test. `separates` is conditional
/// on the user's family being flat; the artifact verifies only the
/// colength equality and the rank.
#[derive(Debug, Clone)]
pub struct DegenerationOutcome {
    pub separates: bool,
    pub rank: usize,
    pub colength: usize,
    /// Hypersurface certificate when the rank test fails and #S = #phi.
    pub certificate: Option<Vec<Rat>>,
}

/// Check rank A_{S, n0} = #phi for a claimed flat limit of the fat-point
/// scheme with jet orders `mbar`. Errors when the colengths cannot match
/// (the ideal cannot be a flat limit of that scheme). Flatness of the
/// family itself is a declared trust boundary and is not verified.
pub fn degeneration_check(
    s: &LatticePointSet,
    ideal: &StaircaseIdeal,
    mbar: &[u32],
) -> Result<DegenerationOutcome> {
    let n = ideal.dim();
    let expected: usize = mbar.iter().map(|&m| jet_conditions(m, n)).sum();
    if ideal.colength() != expected {
        return Err(Error::ColengthMismatch { expected, found: ideal.colength() });
    }
    let (s, _) = s.normalize_to_nonneg();
    let out = is_full_jet_rank(&s, ideal)?;
    Ok(DegenerationOutcome {
        separates: out.full,
        rank: out.rank,
        colength: ideal.colength(),
        certificate: out.certificate,
    })
}

/// Bundled known-flat collision pattern in the plane: the flat limit of two
/// fat points of multiplicities `a`, `b` colliding horizontally. Row j of
/// the limit staircase has width max(a-j, 0) + max(b-j, 0); suitable for
/// jets (a-1, b-1). For (a, b) = (4, 2) the minimal generators are
/// (6,0), (4,1), (2,2), (1,3), (0,4).
pub fn horizontal_collision_ideal(a: u32, b: u32) -> Result<StaircaseIdeal> {
    if a == 0 || b == 0 {
        return Err(Error::InvalidWeights);
    }
    let (a, b) = (i64::from(a), i64::from(b));
    let mut gens = Vec::new();
    for j in 0..=a.max(b) {
        let e = (a - j).max(0) + (b - j).max(0);
        gens.push(vec![e, j]);
        if e == 0 {
            break;
        }
    }
    StaircaseIdeal::from_generators(gens)
}

/// Lower bound for s(Delta; mbar, ..., mbar) (degree-many copies) through
/// the pullback polytope of an injective lattice map.
pub fn lattice_change_bound(
    delta: &RationalPolytope,
    map: &crate::lattice_geometry::LatticeMap,
    w: &Weights,
    cfg: &Config,
) -> Result<BoundResult> {
    use num_traits::ToPrimitive;
    let pulled = delta.preimage_under_lattice_map(map)?;
    let inner = multipoint_seshadri_lower(&pulled, w, cfg)?;
    let d = map.degree().to_usize().ok_or(Error::CoordinateOverflow)?;
    let repeated = w.repeat(d)?;
    let upper = volume_upper_bound(delta, &repeated);
    BoundResult::checked(
        inner.lower,
        upper,
        Method::LatticeChange,
        inner.k_used,
        inner.m_achieved,
        inner.certified,
    )
}

/// Integral polytope decomposition of an integral parent polytope: the
/// maximal cells only; lower faces are implied.
#[derive(Debug, Clone)]
pub struct Decomposition {
    parent: RationalPolytope,
    cells: Vec<RationalPolytope>,
}

/// First rule a decomposition breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoCells,
    NonIntegralParent,
    NonIntegralCell(usize),
    CellDimensionMismatch(usize),
    CellNotFullDim(usize),
    CellNotContained(usize),
    VolumeMismatch { cells: Rat, parent: Rat },
    IntersectionNotCommonFace { i: usize, j: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NoCells => write!(f, "decomposition has no cells"),
            Violation::NonIntegralParent => write!(f, "parent polytope is not integral"),
            Violation::NonIntegralCell(i) => write!(f, "cell {i} is not integral"),
            Violation::CellDimensionMismatch(i) => {
                write!(f, "cell {i} lives in a different ambient dimension")
            }
            Violation::CellNotFullDim(i) => write!(f, "cell {i} is lower-dimensional"),
            Violation::CellNotContained(i) => write!(f, "cell {i} is not contained in the parent"),
            Violation::VolumeMismatch { cells, parent } => {
                write!(f, "cell volumes sum to {cells}, parent volume is {parent}")
            }
            Violation::IntersectionNotCommonFace { i, j } => {
                write!(f, "cells {i} and {j} meet outside a common face")
            }
        }
    }
}

/// Nonempty pairwise intersection, recorded during validation.
#[derive(Debug, Clone)]
pub struct SharedFace {
    pub i: usize,
    pub j: usize,
    pub face: RationalPolytope,
    /// True when the shared face is a facet (dimension n-1).
    pub adjacent: bool,
}

/// Decomposition whose cover, integrality and common-face conditions have
/// been verified; carries the derived face complex.
#[derive(Debug, Clone)]
pub struct ValidatedDecomposition {
    parent: RationalPolytope,
    cells: Vec<RationalPolytope>,
    shared: Vec<SharedFace>,
}

/// Outcome of `Decomposition::validate`; violations are values, not errors.
#[derive(Debug, Clone)]
pub enum ValidationOutcome {
    Valid(Box<ValidatedDecomposition>),
    Invalid(Violation),
}

impl ValidationOutcome {
    pub fn is_valid(&self) -> bool {
        matches!(self, ValidationOutcome::Valid(_))
    }

    pub fn violation(&self) -> Option<&Violation> {
        match self {
            ValidationOutcome::Valid(_) => None,
            ValidationOutcome::Invalid(v) => Some(v),
        }
    }

    pub fn into_valid(self) -> Result<ValidatedDecomposition> {
        match self {
            ValidationOutcome::Valid(v) => Ok(*v),
            ValidationOutcome::Invalid(v) => Err(Error::InvalidDecomposition(v.to_string())),
        }
    }
}

fn is_integral(p: &RationalPolytope) -> bool {
    p.vertices()
        .iter()
        .all(|v| v.coords().iter().all(rat_is_integer))
}

impl Decomposition {
    pub fn new(parent: RationalPolytope, cells: Vec<RationalPolytope>) -> Self {
        Decomposition { parent, cells }
    }

    pub fn parent(&self) -> &RationalPolytope {
        &self.parent
    }

    pub fn cells(&self) -> &[RationalPolytope] {
        &self.cells
    }

    /// Check cover (volume sum), integrality, containment, and the
    /// common-face condition for every cell pair; reports the first
    /// violation.
    pub fn validate(&self) -> Result<ValidationOutcome> {
        let n = self.parent.ambient_dim();
        if self.cells.is_empty() {
            return Ok(ValidationOutcome::Invalid(Violation::NoCells));
        }
        if !is_integral(&self.parent) {
            return Ok(ValidationOutcome::Invalid(Violation::NonIntegralParent));
        }
        for (i, cell) in self.cells.iter().enumerate() {
            if cell.ambient_dim() != n {
                return Ok(ValidationOutcome::Invalid(Violation::CellDimensionMismatch(i)));
            }
            if !is_integral(cell) {
                return Ok(ValidationOutcome::Invalid(Violation::NonIntegralCell(i)));
            }
            if cell.affine_dim() != n {
                return Ok(ValidationOutcome::Invalid(Violation::CellNotFullDim(i)));
            }
            if !cell.vertices().iter().all(|v| self.parent.contains(v)) {
                return Ok(ValidationOutcome::Invalid(Violation::CellNotContained(i)));
            }
        }
        let cell_sum: Rat = self.cells.iter().map(RationalPolytope::volume).sum();
        let parent_vol = self.parent.volume();
        if cell_sum != parent_vol {
            return Ok(ValidationOutcome::Invalid(Violation::VolumeMismatch {
                cells: cell_sum,
                parent: parent_vol,
            }));
        }
        let mut shared = Vec::new();
        for i in 0..self.cells.len() {
            for j in i + 1..self.cells.len() {
                let Some(meet) = self.cells[i].intersect(&self.cells[j])? else {
                    continue;
                };
                if !(is_face_of(&meet, &self.cells[i]) && is_face_of(&meet, &self.cells[j])) {
                    return Ok(ValidationOutcome::Invalid(
                        Violation::IntersectionNotCommonFace { i, j },
                    ));
                }
                let adjacent = meet.affine_dim() + 1 == n;
                shared.push(SharedFace { i, j, face: meet, adjacent });
            }
        }
        Ok(ValidationOutcome::Valid(Box::new(ValidatedDecomposition {
            parent: self.parent.clone(),
            cells: self.cells.clone(),
            shared,
        })))
    }
}

/// Is the (nonempty) polytope `f` a face of `p`? The smallest face of `p`
/// containing a relative-interior point z of `f` is `p` cut by the
/// halfspaces tight at z; `f` is a face exactly when that cut equals `f`.
fn is_face_of(f: &RationalPolytope, p: &RationalPolytope) -> bool {
    let z = barycenter(f.vertices());
    if !p.contains(&z) {
        return false;
    }
    let tight: Vec<_> = p.halfspaces().iter().filter(|h| h.is_tight(&z)).collect();
    let face_vertices: Vec<RationalVector> = p
        .vertices()
        .iter()
        .filter(|v| tight.iter().all(|h| h.is_tight(v)))
        .cloned()
        .collect();
    if face_vertices.is_empty() {
        return false;
    }
    let mut smallest = face_vertices;
    smallest.sort();
    let mut fv = f.vertices().to_vec();
    fv.sort();
    smallest == fv
}

fn barycenter(points: &[RationalVector]) -> RationalVector {
    let n = points[0].dim();
    let count = crate::rat_from_i64(points.len() as i64);
    RationalVector::new(
        (0..n)
            .map(|i| {
                let sum: Rat = points.iter().map(|p| p.coords()[i].clone()).sum();
                sum / &count
            })
            .collect(),
    )
}

impl ValidatedDecomposition {
    pub fn parent(&self) -> &RationalPolytope {
        &self.parent
    }

    pub fn cells(&self) -> &[RationalPolytope] {
        &self.cells
    }

    pub fn shared_faces(&self) -> &[SharedFace] {
        &self.shared
    }

    pub fn adjacency(&self) -> Vec<(usize, usize)> {
        self.shared
            .iter()
            .filter(|s| s.adjacent)
            .map(|s| (s.i, s.j))
            .collect()
    }
}

/// Piecewise-affine lifting witness: one affine function per maximal cell
/// plus a positive integer scale making every lattice-point value integral.
#[derive(Debug, Clone)]
pub struct LiftingWitness {
    affine: Vec<(Vec<Rat>, Rat)>,
    scale: Int,
}

/// Outcome of the lifting LP.
#[derive(Debug, Clone)]
pub enum LiftingResult {
    Witness(Box<LiftingWitness>),
    /// The decomposition is non-regular; the certificate proves the strict
    /// system infeasible.
    NonRegular(FarkasCertificate),
}

impl LiftingWitness {
    pub fn affine(&self) -> &[(Vec<Rat>, Rat)] {
        &self.affine
    }

    pub fn scale(&self) -> &Int {
        &self.scale
    }

    /// Value of the cell-i affine piece at a rational point.
    pub fn value_at(&self, cell: usize, p: &RationalVector) -> Rat {
        let (a, b) = &self.affine[cell];
        let dot: Rat = a.iter().zip(p.coords()).map(|(ai, xi)| ai * xi).sum();
        dot + b
    }

    fn value_at_lattice(&self, cell: usize, u: &[i64]) -> Rat {
        let (a, b) = &self.affine[cell];
        let dot: Rat = a
            .iter()
            .zip(u)
            .map(|(ai, &xi)| ai * crate::rat_from_i64(xi))
            .sum();
        dot + b
    }

    /// Multiply all affine data by a positive integer; stays a valid
    /// witness for the same decomposition.
    pub fn scaled(&self, factor: i64) -> LiftingWitness {
        assert!(factor > 0);
        let f = crate::rat_from_i64(factor);
        LiftingWitness {
            affine: self
                .affine
                .iter()
                .map(|(a, b)| (a.iter().map(|c| c * &f).collect(), b * &f))
                .collect(),
            scale: self.scale.clone(),
        }
    }

    /// Independent exact checker for the three witness invariants:
    /// agreement on shared-face lattice points, strict convexity across
    /// adjacent cells, and integrality of scaled values.
    pub fn verify(&self, vd: &ValidatedDecomposition) -> std::result::Result<(), String> {
        if self.affine.len() != vd.cells().len() {
            return Err("one affine function per cell required".into());
        }
        if !self.scale.is_positive() {
            return Err("scale must be positive".into());
        }
        for sf in vd.shared_faces() {
            for u in sf.face.lattice_points().map_err(|e| e.to_string())?.points() {
                if self.value_at_lattice(sf.i, u) != self.value_at_lattice(sf.j, u) {
                    return Err(format!(
                        "cells {} and {} disagree at shared lattice point {u:?}",
                        sf.i, sf.j
                    ));
                }
            }
        }
        for sf in vd.shared_faces() {
            if !sf.adjacent {
                continue;
            }
            for (home, foreign) in [(sf.j, sf.i), (sf.i, sf.j)] {
                for v in vd.cells()[home].vertices() {
                    if vd.cells()[foreign].contains(v) {
                        continue;
                    }
                    if self.value_at(foreign, v) <= self.value_at(home, v) {
                        return Err(format!(
                            "strict convexity fails between cells {foreign} and {home}"
                        ));
                    }
                }
            }
        }
        let scale = Rat::from_integer(self.scale.clone());
        for (i, cell) in vd.cells().iter().enumerate() {
            for u in cell.lattice_points().map_err(|e| e.to_string())?.points() {
                let v = self.value_at_lattice(i, u) * &scale;
                if !rat_is_integer(&v) {
                    return Err(format!("scaled value at {u:?} in cell {i} is not integral"));
                }
            }
        }
        Ok(())
    }
}

/// Solve the exact lifting-function feasibility LP: unknown affine data per
/// cell, equalities on shared-face vertices, margin-1 strict inequalities
/// across adjacent pairs (WLOG by cone scaling). The returned witness is
/// re-verified; infeasibility comes back with the Farkas certificate.
pub fn lifting_function_exists(vd: &ValidatedDecomposition) -> Result<LiftingResult> {
    let n = vd.parent().ambient_dim();
    let r = vd.cells().len();
    let vars = r * (n + 1);
    let coeff_row = |cell: usize, v: &RationalVector, sign: &Rat| -> Vec<Rat> {
        let mut row = vec![Rat::zero(); vars];
        for (k, c) in v.coords().iter().enumerate() {
            row[cell * (n + 1) + k] = sign * c;
        }
        row[cell * (n + 1) + n] = sign.clone();
        row
    };
    let mut cons: Vec<Constraint> = Vec::new();
    for sf in vd.shared_faces() {
        for v in sf.face.vertices() {
            let mut row = coeff_row(sf.i, v, &Rat::one());
            for (dst, src) in row.iter_mut().zip(coeff_row(sf.j, v, &(-Rat::one()))) {
                *dst = &*dst + &src;
            }
            cons.push(Constraint::eq(row, Rat::zero()));
        }
        if sf.adjacent {
            for (home, foreign) in [(sf.j, sf.i), (sf.i, sf.j)] {
                for v in vd.cells()[home].vertices() {
                    if vd.cells()[foreign].contains(v) {
                        continue;
                    }
                    // phi_foreign(v) >= phi_home(v) + 1
                    let mut row = coeff_row(foreign, v, &Rat::one());
                    for (dst, src) in row.iter_mut().zip(coeff_row(home, v, &(-Rat::one()))) {
                        *dst = &*dst + &src;
                    }
                    cons.push(Constraint::ge(row, Rat::one()));
                }
            }
        }
    }
    match lp::feasible_point(vars, &cons)? {
        Feasibility::Infeasible(cert) => Ok(LiftingResult::NonRegular(cert)),
        Feasibility::Feasible(x) => {
            let affine: Vec<(Vec<Rat>, Rat)> = (0..r)
                .map(|i| {
                    let a = x[i * (n + 1)..i * (n + 1) + n].to_vec();
                    let b = x[i * (n + 1) + n].clone();
                    (a, b)
                })
                .collect();
            let mut witness = LiftingWitness { affine, scale: Int::one() };
            let mut scale = Int::one();
            for (i, cell) in vd.cells().iter().enumerate() {
                for u in cell.lattice_points()?.points() {
                    scale = scale.lcm(witness.value_at_lattice(i, u).denom());
                }
            }
            witness.scale = scale.abs().max(Int::one());
            witness.verify(vd).map_err(Error::Internal)?;
            Ok(LiftingResult::Witness(Box::new(witness)))
        }
    }
}

/// Bound from a regular decomposition: min over selected cells of the
/// multipoint bound on the cell-target intersections, against the volume
/// bound for the concatenated weights.
#[derive(Debug, Clone)]
pub struct DecompositionBound {
    pub result: BoundResult,
    pub witness: LiftingWitness,
    pub per_cell: Vec<(usize, BoundResult)>,
}

pub fn decomposition_bound(
    delta: &RationalPolytope,
    decomposition: &Decomposition,
    selected: &[(usize, Weights)],
    cfg: &Config,
) -> Result<DecompositionBound> {
    let vd = decomposition.validate()?.into_valid()?;
    let witness = match lifting_function_exists(&vd)? {
        LiftingResult::Witness(w) => *w,
        LiftingResult::NonRegular(_) => return Err(Error::NonRegular),
    };
    decomposition_bound_with(delta, &vd, witness, selected, cfg)
}

/// Same bound computation for an already validated decomposition and
/// lifting witness.
pub fn decomposition_bound_with(
    delta: &RationalPolytope,
    vd: &ValidatedDecomposition,
    witness: LiftingWitness,
    selected: &[(usize, Weights)],
    cfg: &Config,
) -> Result<DecompositionBound> {
    if selected.is_empty() {
        return Err(Error::InvalidDecomposition("no cells selected".into()));
    }
    let mut per_cell: Vec<(usize, BoundResult)> = Vec::new();
    let mut lower: Option<Rat> = None;
    let mut min_cell = 0usize;
    for (idx, w) in selected {
        let cell = vd
            .cells()
            .get(*idx)
            .ok_or(Error::CellIndexOutOfRange { cell: *idx, cells: vd.cells().len() })?;
        let piece = cell
            .intersect(delta)?
            .ok_or(Error::EmptyInterior { cell: *idx })?;
        if !piece.volume().is_positive() {
            return Err(Error::EmptyInterior { cell: *idx });
        }
        let bound = multipoint_seshadri_lower(&piece, w, cfg)?;
        if lower.as_ref().is_none_or(|l| bound.lower < *l) {
            lower = Some(bound.lower.clone());
            min_cell = per_cell.len();
        }
        per_cell.push((*idx, bound));
    }
    let concat =
        Weights::concat(&selected.iter().map(|(_, w)| w.clone()).collect::<Vec<_>>())?;
    let upper = volume_upper_bound(delta, &concat);
    let pick = &per_cell[min_cell].1;
    let result = BoundResult::checked(
        lower.expect("at least one selected cell"),
        upper,
        Method::Decomposition,
        pick.k_used,
        pick.m_achieved,
        cfg.certify,
    )?;
    Ok(DecompositionBound { result, witness, per_cell })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat_from_i64;

    fn poly(vertices: &[&[i64]]) -> RationalPolytope {
        RationalPolytope::from_vertices(
            vertices.iter().map(|v| RationalVector::from_integers(v)).collect(),
        )
        .unwrap()
    }

    fn set(points: &[&[i64]]) -> LatticePointSet {
        LatticePointSet::new(points.iter().map(|p| p.to_vec()).collect(), points[0].len())
            .unwrap()
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
    fn collision_ideal_generators_for_four_two() {
        let ideal = horizontal_collision_ideal(4, 2).unwrap();
        let mut gens = ideal.generators().to_vec();
        gens.sort();
        assert_eq!(
            gens,
            vec![vec![0, 4], vec![1, 3], vec![2, 2], vec![4, 1], vec![6, 0]]
        );
        assert_eq!(ideal.colength(), 13);
    }

    #[test]
    fn degeneration_check_on_collision_witness() {
        let ideal = horizontal_collision_ideal(4, 2).unwrap();
        let out = degeneration_check(&collision_witness_set(), &ideal, &[3, 1]).unwrap();
        assert!(out.separates);
        assert_eq!(out.rank, 13);
    }

    #[test]
    fn degeneration_colength_mismatch_detected() {
        let ideal = horizontal_collision_ideal(4, 2).unwrap();
        let err = degeneration_check(&collision_witness_set(), &ideal, &[1, 1]).unwrap_err();
        assert_eq!(err, Error::ColengthMismatch { expected: 6, found: 13 });
    }

    #[test]
    fn degeneration_with_zero_jets_is_evaluation() {
        let m = StaircaseIdeal::from_generators(vec![vec![1, 0], vec![0, 1]]).unwrap();
        let out = degeneration_check(&set(&[&[2, 3]]), &m, &[0]).unwrap();
        assert!(out.separates);
    }

    #[test]
    fn degeneration_with_power_ideal_agrees_with_jet_rank() {
        // r = 1, n0 = phi_m: same verdict as the surjectivity test
        for m in 0..=2u32 {
            let ideal = StaircaseIdeal::power(m, 2);
            for pts in [
                vec![vec![0i64, 0], vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 0], vec![0, 2]],
                vec![vec![0, 0], vec![1, 1], vec![2, 2], vec![3, 3], vec![4, 4], vec![5, 5]],
            ] {
                let s = set(&pts.iter().map(|p| p.as_slice()).collect::<Vec<_>>());
                let via_jet = is_full_jet_rank(&s, &ideal).unwrap();
                let via_degeneration = degeneration_check(&s, &ideal, &[m]).unwrap();
                assert_eq!(via_jet.full, via_degeneration.separates);
                assert_eq!(via_jet.rank, via_degeneration.rank);
            }
        }
    }

    #[test]
    fn degeneration_false_with_certificate_on_constructed_set() {
        // collinear S against the order-1 staircase: 3 conditions, 3 points
        let out = degeneration_check(
            &set(&[&[0, 0], &[1, 1], &[2, 2]]),
            &StaircaseIdeal::power(1, 2),
            &[1],
        )
        .unwrap();
        assert!(!out.separates);
        assert!(out.certificate.is_some());
    }

    fn fan_decomposition() -> Decomposition {
        let parent = poly(&[&[0, 0], &[2, 1], &[1, 2]]);
        let cells = vec![
            poly(&[&[1, 1], &[2, 1], &[1, 2]]),
            poly(&[&[0, 0], &[1, 1], &[1, 2]]),
            poly(&[&[0, 0], &[1, 1], &[2, 1]]),
        ];
        Decomposition::new(parent, cells)
    }

    #[test]
    fn fan_decomposition_validates() {
        let outcome = fan_decomposition().validate().unwrap();
        let vd = outcome.into_valid().unwrap();
        assert_eq!(vd.adjacency().len(), 3);
        assert_eq!(vd.shared_faces().len(), 3);
    }

    #[test]
    fn trivial_decomposition_validates() {
        let parent = poly(&[&[0, 0], &[2, 1], &[1, 2]]);
        let d = Decomposition::new(parent.clone(), vec![parent]);
        assert!(d.validate().unwrap().is_valid());
    }

    #[test]
    fn overlapping_cells_rejected() {
        let parent = poly(&[&[0, 0], &[2, 0], &[2, 2], &[0, 2]]);
        let d = Decomposition::new(
            parent,
            vec![
                poly(&[&[0, 0], &[2, 0], &[2, 2]]),
                poly(&[&[0, 0], &[2, 2], &[0, 2]]),
                poly(&[&[0, 0], &[2, 0], &[0, 2]]),
            ],
        );
        let out = d.validate().unwrap();
        assert!(!out.is_valid());
    }

    #[test]
    fn volume_gap_detected() {
        let parent = poly(&[&[0, 0], &[4, 0], &[4, 2], &[0, 2]]);
        let overlap = Decomposition::new(
            parent,
            vec![
                poly(&[&[0, 0], &[3, 0], &[3, 2], &[0, 2]]),
                poly(&[&[2, 0], &[4, 0], &[4, 2], &[2, 2]]),
            ],
        );
        let out = overlap.validate().unwrap();
        assert_eq!(
            out.violation(),
            Some(&Violation::VolumeMismatch {
                cells: rat_from_i64(10),
                parent: rat_from_i64(8)
            })
        );
    }

    #[test]
    fn t_vertex_is_not_a_common_face() {
        // two aligned boxes sharing a full edge: valid
        let parent = poly(&[&[0, 0], &[4, 0], &[4, 1], &[0, 1]]);
        let d = Decomposition::new(
            parent,
            vec![
                poly(&[&[0, 0], &[2, 0], &[2, 1], &[0, 1]]),
                poly(&[&[2, 0], &[4, 0], &[4, 1], &[2, 1]]),
            ],
        );
        assert!(d.validate().unwrap().is_valid());

        // T-vertex: the bottom box meets the top-left box along half of its
        // top edge, which is a face of the small cell only
        let parent = poly(&[&[0, 0], &[2, 0], &[2, 2], &[0, 2]]);
        let bad = Decomposition::new(
            parent,
            vec![
                poly(&[&[0, 0], &[2, 0], &[2, 1], &[0, 1]]),
                poly(&[&[0, 1], &[1, 1], &[1, 2], &[0, 2]]),
                poly(&[&[1, 1], &[2, 1], &[2, 2], &[1, 2]]),
            ],
        );
        let out = bad.validate().unwrap();
        assert_eq!(
            out.violation(),
            Some(&Violation::IntersectionNotCommonFace { i: 0, j: 1 })
        );
    }

    #[test]
    fn fan_lifting_function_exists_and_verifies() {
        let vd = fan_decomposition().validate().unwrap().into_valid().unwrap();
        match lifting_function_exists(&vd).unwrap() {
            LiftingResult::Witness(w) => {
                w.verify(&vd).unwrap();
                w.scaled(7).verify(&vd).unwrap();
            }
            LiftingResult::NonRegular(_) => panic!("stellar fan is regular"),
        }
    }

    #[test]
    fn trivial_decomposition_lifting_is_vacuous() {
        let parent = poly(&[&[0, 0], &[2, 1], &[1, 2]]);
        let d = Decomposition::new(parent.clone(), vec![parent]);
        let vd = d.validate().unwrap().into_valid().unwrap();
        match lifting_function_exists(&vd).unwrap() {
            LiftingResult::Witness(w) => w.verify(&vd).unwrap(),
            LiftingResult::NonRegular(_) => panic!("single cell is vacuously regular"),
        }
    }

    fn pinwheel() -> Decomposition {
        // spiral triangulation of nested triangles: classically non-regular
        let v1 = [0i64, 0];
        let v2 = [4, 0];
        let v3 = [0, 4];
        let w1 = [1, 1];
        let w2 = [2, 1];
        let w3 = [1, 2];
        let parent = poly(&[&v1, &v2, &v3]);
        let cells = vec![
            poly(&[&v1, &v2, &w1]),
            poly(&[&v2, &w2, &w1]),
            poly(&[&v2, &v3, &w2]),
            poly(&[&v3, &w3, &w2]),
            poly(&[&v3, &v1, &w3]),
            poly(&[&v1, &w1, &w3]),
            poly(&[&w1, &w2, &w3]),
        ];
        Decomposition::new(parent, cells)
    }

    #[test]
    fn pinwheel_is_valid_but_non_regular() {
        let vd = pinwheel().validate().unwrap().into_valid().unwrap();
        match lifting_function_exists(&vd).unwrap() {
            LiftingResult::NonRegular(_) => {}
            LiftingResult::Witness(_) => panic!("pinwheel triangulation is not regular"),
        }
    }

    #[test]
    fn lattice_change_on_halfcube_tetrahedron() {
        let tet = poly(&[&[0, 0, 0], &[1, 1, 0], &[1, 0, 1], &[0, 1, 1]]);
        let map = crate::lattice_geometry::LatticeMap::new(vec![
            vec![1, 1, 0],
            vec![1, 0, 1],
            vec![0, 1, 1],
        ])
        .unwrap();
        let cfg = Config::new().with_budget(3).with_certify(true);
        let res = lattice_change_bound(&tet, &map, &Weights::unit(), &cfg).unwrap();
        assert_eq!(res.lower, Rat::one());
        assert_eq!(res.exact_value(), Some(Rat::one()));
    }

    #[test]
    fn direct_multipoint_on_tetrahedron_stays_below_one() {
        // two-point jets on k*Delta need 2*C(k+3,3) conditions but k*Delta
        // has only (k^3+3k^2+5k+3)/3 lattice points, so the direct route
        // tops out at (k-1)/k; the lattice-change route is what reaches 1
        let tet = poly(&[&[0, 0, 0], &[1, 1, 0], &[1, 0, 1], &[0, 1, 1]]);
        let w = Weights::from_integers(&[1, 1]).unwrap();
        let cfg = Config::new().with_budget(3).with_certify(true);
        let res = multipoint_seshadri_lower(&tet, &w, &cfg).unwrap();
        assert_eq!(res.lower, Rat::new(2.into(), 3.into()));
        assert_eq!(res.k_used, 3);
    }

    #[test]
    fn lattice_change_identity_matches_multipoint() {
        let tri = poly(&[&[0, 0], &[2, 1], &[1, 2]]);
        let id = crate::lattice_geometry::LatticeMap::new(vec![vec![1, 0], vec![0, 1]]).unwrap();
        let cfg = Config::new().with_budget(2).with_seed(9);
        let a = lattice_change_bound(&tri, &id, &Weights::unit(), &cfg).unwrap();
        let b = multipoint_seshadri_lower(&tri, &Weights::unit(), &cfg).unwrap();
        assert_eq!(a.lower, b.lower);
        assert_eq!(a.k_used, b.k_used);
        assert_eq!(a.m_achieved, b.m_achieved);
    }

    #[test]
    fn decomposition_bound_on_fan() {
        let d = fan_decomposition();
        let delta = d.parent().clone();
        let selected: Vec<(usize, Weights)> = (0..3).map(|i| (i, Weights::unit())).collect();
        let cfg = Config::new().with_budget(2).with_certify(true);
        let out = decomposition_bound(&delta, &d, &selected, &cfg).unwrap();
        assert_eq!(out.result.lower, Rat::one());
        assert_eq!(out.result.exact_value(), Some(Rat::one()));
        assert_eq!(out.per_cell.len(), 3);
    }

    #[test]
    fn decomposition_bound_square_diagonal() {
        let parent = poly(&[&[0, 0], &[1, 0], &[1, 1], &[0, 1]]);
        let d = Decomposition::new(
            parent.clone(),
            vec![
                poly(&[&[0, 0], &[1, 0], &[1, 1]]),
                poly(&[&[0, 0], &[1, 1], &[0, 1]]),
            ],
        );
        let selected = vec![(0, Weights::unit()), (1, Weights::unit())];
        let cfg = Config::new().with_budget(2).with_certify(true);
        let out = decomposition_bound(&parent, &d, &selected, &cfg).unwrap();
        assert_eq!(out.result.lower, Rat::one());
        // volume bound: sqrt(2 * 1 / 2) = 1, so the value is exact
        assert_eq!(out.result.exact_value(), Some(Rat::one()));
    }

    #[test]
    fn decomposition_bound_with_proper_subtarget() {
        // square split along the diagonal; the target is a sub-square
        // meeting both cells in half-size triangles
        let parent = poly(&[&[0, 0], &[2, 0], &[2, 2], &[0, 2]]);
        let d = Decomposition::new(
            parent,
            vec![
                poly(&[&[0, 0], &[2, 0], &[2, 2]]),
                poly(&[&[0, 0], &[2, 2], &[0, 2]]),
            ],
        );
        let delta = poly(&[&[0, 0], &[1, 0], &[1, 1], &[0, 1]]);
        let selected = vec![(0, Weights::unit()), (1, Weights::unit())];
        let cfg = Config::new().with_budget(3).with_certify(true);
        let out = decomposition_bound(&delta, &d, &selected, &cfg).unwrap();
        // each half-triangle of the unit square is unimodular: bound 1
        assert_eq!(out.result.lower, Rat::one());
        assert_eq!(out.result.exact_value(), Some(Rat::one()));
    }

    #[test]
    fn decomposition_bound_empty_interior_rejected() {
        let d = fan_decomposition();
        // target polytope missing cell 0 entirely
        let delta = poly(&[&[0, 0], &[1, 0], &[0, 1]]);
        let selected = vec![(0, Weights::unit())];
        let cfg = Config::new().with_budget(1);
        let err = decomposition_bound(&delta, &d, &selected, &cfg).unwrap_err();
        assert!(matches!(err, Error::EmptyInterior { cell: 0 }));
    }
}
