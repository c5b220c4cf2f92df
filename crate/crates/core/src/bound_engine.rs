//! Bound engine: turns rank computations into certified intervals for
//! s(Delta; mbar) via the ascending k-sweep and the volume upper bound.
//!
//! Lower bounds are always witnessed by a full-rank computation (full rank
//! modulo a word prime already certifies full rank over Q); randomized
//! multipoint failures are never interpreted as upper bounds. The only
//! upper-bound source is the volume formula, kept symbolic as a radicand
//! with a root index so comparisons stay exact.

use std::cmp::Ordering;
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::jet_matrix::{self, jet_conditions, MatrixForm, StaircaseIdeal};
use crate::lattice_geometry::{LatticePointSet, RationalPolytope, RationalVector};
use crate::linalg::{self, Matrix};
use crate::{canonical_hash, derive_seed, rat_from_i64, Error, Int, Rat, Result};

/// Positive weight tuple (m_1, ..., m_r).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weights {
    values: Vec<Rat>,
}

impl Weights {
    pub fn new(values: Vec<Rat>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_positive()) {
            return Err(Error::InvalidWeights);
        }
        Ok(Weights { values })
    }

    /// The single weight 1 (the r = 1 case).
    pub fn unit() -> Self {
        Weights { values: vec![Rat::one()] }
    }

    pub fn from_integers(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| rat_from_i64(v)).collect())
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn r(&self) -> usize {
        self.values.len()
    }

    /// |mbar|_n = sum m_i^n.
    pub fn norm_pow(&self, n: usize) -> Rat {
        self.values
            .iter()
            .map(|m| pow_rat(m, n as u32))
            .sum()
    }

    /// Concatenation (mbar_1, ..., mbar_k) of several weight tuples.
    pub fn concat(parts: &[Weights]) -> Result<Self> {
        let values: Vec<Rat> = parts.iter().flat_map(|w| w.values.clone()).collect();
        Self::new(values)
    }

    /// d copies of this tuple.
    pub fn repeat(&self, d: usize) -> Result<Self> {
        let mut values = Vec::with_capacity(self.values.len() * d);
        for _ in 0..d {
            values.extend(self.values.iter().cloned());
        }
        Self::new(values)
    }

    pub fn scale(&self, t: &Rat) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * t).collect())
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let body = self
            .values
            .iter()
            .map(|v| format!("{}/{}", v.numer(), v.denom()))
            .collect::<Vec<_>>()
            .join(",");
        format!("weights:{body}").into_bytes()
    }
}

fn pow_rat(v: &Rat, e: u32) -> Rat {
    Rat::new(v.numer().pow(e), v.denom().pow(e))
}

/// Upper bound value: exact rational, or the n-th root of a rational kept
/// symbolic so the sandwich invariant stays exactly checkable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UpperBound {
    Exact(Rat),
    Root { radicand: Rat, index: u32 },
}

impl UpperBound {
    /// `radicand^(1/index)`, simplified to an exact rational when the root
    /// is exact.
    pub fn nth_root(radicand: Rat, index: u32) -> UpperBound {
        assert!(index >= 1);
        assert!(!radicand.is_negative());
        if index == 1 {
            return UpperBound::Exact(radicand);
        }
        let rn = radicand.numer().nth_root(index);
        let rd = radicand.denom().nth_root(index);
        if &rn.pow(index) == radicand.numer() && &rd.pow(index) == radicand.denom() {
            return UpperBound::Exact(Rat::new(rn, rd));
        }
        UpperBound::Root { radicand, index }
    }

    pub fn zero() -> UpperBound {
        UpperBound::Exact(Rat::zero())
    }

    pub fn as_exact(&self) -> Option<&Rat> {
        match self {
            UpperBound::Exact(v) => Some(v),
            UpperBound::Root { .. } => None,
        }
    }

    /// Exact comparison of this value with a rational.
    pub fn cmp_rat(&self, q: &Rat) -> Ordering {
        match self {
            UpperBound::Exact(v) => v.cmp(q),
            UpperBound::Root { radicand, index } => {
                if q.is_negative() {
                    return Ordering::Greater;
                }
                radicand.cmp(&pow_rat(q, *index))
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            UpperBound::Exact(v) => v.to_f64().unwrap_or(f64::NAN),
            UpperBound::Root { radicand, index } => radicand
                .to_f64()
                .map(|r| r.powf(1.0 / f64::from(*index)))
                .unwrap_or(f64::NAN),
        }
    }
}

impl std::fmt::Display for UpperBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UpperBound::Exact(v) => write!(f, "{v}"),
            UpperBound::Root { radicand, index } => write!(f, "({radicand})^(1/{index})"),
        }
    }
}

/// How a bound was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    KSweep,
    Multipoint,
    LatticeChange,
    Decomposition,
    DegenerateDim,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::KSweep => "k-sweep",
            Method::Multipoint => "multipoint",
            Method::LatticeChange => "lattice-change",
            Method::Decomposition => "decomposition",
            Method::DegenerateDim => "degenerate-dim",
        }
    }
}

/// Certified interval for s(Delta; mbar) with provenance.
#[derive(Debug, Clone)]
pub struct BoundResult {
    pub lower: Rat,
    pub upper: UpperBound,
    pub method: Method,
    pub k_used: u32,
    pub m_achieved: i64,
    pub certified: bool,
}

impl BoundResult {
    pub(crate) fn checked(
        lower: Rat,
        upper: UpperBound,
        method: Method,
        k_used: u32,
        m_achieved: i64,
        certified: bool,
    ) -> Result<Self> {
        if upper.cmp_rat(&lower) == Ordering::Less {
            return Err(Error::Internal(format!(
                "sandwich violated: lower {lower} exceeds upper {upper}"
            )));
        }
        Ok(BoundResult { lower, upper, method, k_used, m_achieved, certified })
    }

    /// The exact value when the interval collapses.
    pub fn exact_value(&self) -> Option<Rat> {
        (self.upper.cmp_rat(&self.lower) == Ordering::Equal).then(|| self.lower.clone())
    }
}

/// Cached rank value (the certified flag records which path produced it).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CachedRank {
    pub rank: usize,
    pub certified: bool,
}

/// Content-addressed rank store; insertions must be safe under concurrency.
pub trait RankCache: Send + Sync {
    fn get(&self, key: &str) -> Option<CachedRank>;
    fn put(&self, key: &str, value: CachedRank);
}

/// Engine knobs. `seed` feeds every per-cell RNG derivation, so equal seeds
/// reproduce results bit for bit.
#[derive(Clone, Default)]
pub struct Config {
    pub k_budget: u32,
    pub trials: u32,
    pub certify: bool,
    pub seed: u64,
    pub cache: Option<Arc<dyn RankCache>>,
}

impl Config {
    pub fn new() -> Self {
        Config { k_budget: 6, trials: 3, certify: false, seed: 0, cache: None }
    }

    pub fn with_budget(mut self, k_budget: u32) -> Self {
        self.k_budget = k_budget;
        self
    }

    pub fn with_trials(mut self, trials: u32) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_certify(mut self, certify: bool) -> Self {
        self.certify = certify;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Rank of an integer matrix under the configured policy: Bareiss under
/// `certify`, otherwise two independent random primes with a Bareiss
/// fallback when they disagree.
fn policy_rank(entries: &Matrix<Int>, cell_seed: u64, cfg: &Config, key: &str) -> CachedRank {
    if let Some(cache) = &cfg.cache {
        if let Some(hit) = cache.get(key) {
            return hit;
        }
    }
    let value = if cfg.certify || entries.rows() == 0 || entries.cols() == 0 {
        CachedRank { rank: linalg::rank_bareiss(entries), certified: true }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cell_seed);
        let p1 = linalg::modular::random_prime(&mut rng);
        let p2 = linalg::modular::random_prime(&mut rng);
        let r1 = linalg::modular::rank_mod_p(entries, p1);
        let r2 = linalg::modular::rank_mod_p(entries, p2);
        if r1 == r2 {
            CachedRank { rank: r1, certified: false }
        } else {
            CachedRank { rank: linalg::rank_bareiss(entries), certified: true }
        }
    };
    if let Some(cache) = &cfg.cache {
        cache.put(key, value);
    }
    value
}

/// Result of the m-ascent for one lattice-point set.
#[derive(Debug, Clone)]
pub struct JetOrder {
    /// Largest m with full rank; -1 for the empty set.
    pub order: i64,
    /// True when every rank on the path was computed exactly.
    pub certified: bool,
}

/// Largest m with rank A_{S,m} = C(m+n, n), by ascending m with the
/// counting cutoff. Full rank modulo a prime already certifies full rank,
/// so the reported order is a true jet order lower bound on either path;
/// `certified` records whether the stopping failure was exact too.
pub fn max_jet_order(s: &LatticePointSet, cfg: &Config) -> Result<JetOrder> {
    max_jet_order_capped(s, cfg, None)
}

/// Same ascent with an optional hard cap on the tested jet order.
pub fn max_jet_order_capped(
    s: &LatticePointSet,
    cfg: &Config,
    cap: Option<u32>,
) -> Result<JetOrder> {
    if s.is_empty() {
        return Ok(JetOrder { order: -1, certified: true });
    }
    let (s, _) = s.normalize_to_nonneg();
    let n = s.ambient_dim();
    let bytes = s.canonical_bytes();
    let mut order = -1i64;
    let mut certified = true;
    let mut m = 0u32;
    loop {
        if cap.is_some_and(|c| m > c) {
            break;
        }
        let needed = jet_conditions(m, n);
        if needed > s.len() {
            break;
        }
        let ideal = StaircaseIdeal::power(m, n);
        let jm = jet_matrix::build_jet_matrix(&s, &ideal, MatrixForm::Power)?;
        let cell_seed = derive_seed(&[
            &bytes,
            b"jet",
            &u64::from(m).to_le_bytes(),
            &cfg.seed.to_le_bytes(),
        ]);
        let key = canonical_hash(&[
            &bytes,
            b"jet",
            MatrixForm::Power.tag().as_bytes(),
            &u64::from(m).to_le_bytes(),
            &cell_seed.to_le_bytes(),
            &[cfg.certify as u8],
        ]);
        let report = policy_rank(jm.entries(), cell_seed, cfg, &key);
        if report.rank == needed {
            order = i64::from(m);
            m += 1;
        } else {
            certified = report.certified;
            break;
        }
    }
    Ok(JetOrder { order, certified })
}

/// `(n! vol(delta) / |mbar|_n)^(1/n)` as an exact radicand plus root index.
pub fn volume_upper_bound(delta: &RationalPolytope, w: &Weights) -> UpperBound {
    let n = delta.ambient_dim();
    let vol = delta.volume();
    if vol.is_zero() {
        return UpperBound::zero();
    }
    let mut fact = Int::one();
    for i in 2..=n {
        fact *= Int::from(i as u64);
    }
    let radicand = Rat::from_integer(fact) * vol / w.norm_pow(n);
    UpperBound::nth_root(radicand, n as u32)
}

/// One-point k-sweep: lower = max over k <= budget of max_jet_order(k
/// Delta)/k, upper from the volume formula. Ascending k with early exit
/// when the interval collapses.
pub fn seshadri_lower_bound(delta: &RationalPolytope, cfg: &Config) -> Result<BoundResult> {
    if cfg.k_budget == 0 {
        return Err(Error::ZeroBudget);
    }
    let n = delta.ambient_dim();
    if delta.affine_dim() < n {
        return BoundResult::checked(Rat::zero(), UpperBound::zero(), Method::DegenerateDim, 0, -1, true);
    }
    let (delta, _) = delta.normalize_to_nonneg();
    let upper = volume_upper_bound(&delta, &Weights::unit());
    let mut lower = Rat::zero();
    let mut k_used = 0u32;
    let mut m_achieved = -1i64;
    for k in 1..=cfg.k_budget {
        let scaled = delta.dilate(&rat_from_i64(i64::from(k)))?;
        let s = scaled.lattice_points()?;
        if s.is_empty() {
            continue;
        }
        let jo = max_jet_order(&s, cfg)?;
        if jo.order < 0 {
            continue;
        }
        let cand = Rat::new(Int::from(jo.order), Int::from(k));
        if cand > lower {
            lower = cand;
            k_used = k;
            m_achieved = jo.order;
        }
        if upper.cmp_rat(&lower) == Ordering::Equal {
            break; // the value is pinned exactly
        }
    }
    BoundResult::checked(lower, upper, Method::KSweep, k_used, m_achieved, cfg.certify)
}

/// Witnessed multipoint jet bound for one lattice-point set.
#[derive(Debug, Clone)]
pub struct MultipointJetReport {
    /// Largest grid value t whose ceil-jets tuple had a full-rank sample;
    /// `None` when no candidate was witnessed. One-sided by construction: a
    /// failed sample is never evidence against separation.
    pub t: Option<Rat>,
    /// The jets tuple at the witness.
    pub jets: Vec<u32>,
    pub certified: bool,
}

fn ceil_jets(t: &Rat, w: &Weights) -> Vec<u32> {
    w.values()
        .iter()
        .map(|m| {
            let v = (t * m).ceil().to_integer();
            v.to_u32().expect("jet orders stay small")
        })
        .collect()
}

/// Search the grid {j/m_i} descending for the largest t such that
/// ceil(t mbar)-jets are separated at some random sample of r points.
pub fn multipoint_jet_lower(
    s: &LatticePointSet,
    w: &Weights,
    cfg: &Config,
) -> Result<MultipointJetReport> {
    let none = MultipointJetReport { t: None, jets: vec![], certified: cfg.certify };
    if s.is_empty() {
        return Ok(none);
    }
    let (s, _) = s.normalize_to_nonneg();
    let n = s.ambient_dim();
    let r = w.r();
    if s.len() < r {
        return Ok(none); // counting: 0-jets at r points already need r sections
    }
    // candidate grid: all j/m_i whose jets tuple passes the counting bound
    let mut candidates: std::collections::BTreeSet<Rat> = std::collections::BTreeSet::new();
    candidates.insert(Rat::zero());
    for m in w.values() {
        let mut j = 1i64;
        loop {
            let t = rat_from_i64(j) / m;
            let jets = ceil_jets(&t, w);
            let rows: usize = jets.iter().map(|&mi| jet_conditions(mi, n)).sum();
            if rows > s.len() {
                break;
            }
            candidates.insert(t);
            j += 1;
        }
    }
    let bytes = s.canonical_bytes();
    let mut tested: std::collections::BTreeSet<Vec<u32>> = std::collections::BTreeSet::new();
    for t in candidates.into_iter().rev() {
        let jets = ceil_jets(&t, w);
        if !tested.insert(jets.clone()) {
            continue; // same tuple was already sampled at a larger t
        }
        if let Some(certified) = witness_jets(&s, &jets, &bytes, n, cfg)? {
            return Ok(MultipointJetReport { t: Some(t), jets, certified });
        }
    }
    Ok(none)
}

/// Try `cfg.trials` random samples for one jets tuple; `Some(certified)` on
/// the first full-row-rank sample.
fn witness_jets(
    s: &LatticePointSet,
    jets: &[u32],
    instance_bytes: &[u8],
    n: usize,
    cfg: &Config,
) -> Result<Option<bool>> {
    let rows: usize = jets.iter().map(|&mi| jet_conditions(mi, n)).sum();
    let jets_bytes: Vec<u8> = jets.iter().flat_map(|j| j.to_le_bytes()).collect();
    for trial in 0..cfg.trials.max(1) {
        let cell_seed = derive_seed(&[
            instance_bytes,
            b"multipoint",
            &jets_bytes,
            &u64::from(trial).to_le_bytes(),
            &cfg.seed.to_le_bytes(),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(cell_seed);
        let points = sample_points(&mut rng, jets.len(), n);
        let mp = jet_matrix::build_multipoint_matrix(s, &points, jets)?;
        let entries = linalg::integerize_rows(mp.entries());
        let key = canonical_hash(&[
            instance_bytes,
            b"multipoint",
            &jets_bytes,
            &cell_seed.to_le_bytes(),
            &[cfg.certify as u8],
        ]);
        let report = policy_rank(&entries, cell_seed, cfg, &key);
        if report.rank == rows {
            return Ok(Some(report.certified || cfg.certify));
        }
    }
    Ok(None)
}

/// Integer points with coordinates uniform in [1, 2^20], resampled on
/// coincidence; full rank at any such sample certifies generic separation.
fn sample_points(rng: &mut ChaCha8Rng, r: usize, n: usize) -> Vec<RationalVector> {
    let mut points: Vec<RationalVector> = Vec::with_capacity(r);
    while points.len() < r {
        let coords: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=(1i64 << 20))).collect();
        let p = RationalVector::from_integers(&coords);
        if !points.contains(&p) {
            points.push(p);
        }
    }
    points
}

/// Multipoint k-sweep: lower = max over k of multipoint_jet_lower(k
/// Delta)/k; upper from the volume formula for the weight tuple.
pub fn multipoint_seshadri_lower(
    delta: &RationalPolytope,
    w: &Weights,
    cfg: &Config,
) -> Result<BoundResult> {
    if cfg.k_budget == 0 {
        return Err(Error::ZeroBudget);
    }
    let n = delta.ambient_dim();
    if delta.affine_dim() < n {
        return BoundResult::checked(Rat::zero(), UpperBound::zero(), Method::DegenerateDim, 0, -1, true);
    }
    let (delta, _) = delta.normalize_to_nonneg();
    let upper = volume_upper_bound(&delta, w);
    let mut lower = Rat::zero();
    let mut k_used = 0u32;
    let mut m_achieved = -1i64;
    for k in 1..=cfg.k_budget {
        let scaled = delta.dilate(&rat_from_i64(i64::from(k)))?;
        let s = scaled.lattice_points()?;
        if s.is_empty() {
            continue;
        }
        let rep = multipoint_jet_lower(&s, w, cfg)?;
        let Some(t) = rep.t else {
            continue;
        };
        let cand = t / rat_from_i64(i64::from(k));
        if cand > lower {
            lower = cand;
            k_used = k;
            m_achieved = rep.jets.iter().copied().max().unwrap_or(0) as i64;
        }
        if upper.cmp_rat(&lower) == Ordering::Equal {
            break;
        }
    }
    BoundResult::checked(lower, upper, Method::Multipoint, k_used, m_achieved, cfg.certify)
}
