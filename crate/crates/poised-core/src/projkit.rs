//! Polarized layer: Newton–Okounkov polytopes and the integral special
//! fibers of equivariant one-parameter degenerations.
//!
//! A *polarized input* is a polyhedral divisor $\mathcal{D} = \sum_i \Delta_i
//! \cdot P_i$ on a lattice of the form $N \times \mathbb{Z}$ together with a
//! distinguished primitive grading co-character $\xi$: the coordinate ring
//! $A(\mathcal{D})$ is then viewed as a section ring
//! $R = \bigoplus_{k \ge 0} R_k$ with $R_k$ spanned by the weight spaces of
//! all $u$ with $\langle \xi, u \rangle = k$.  Two constructions live here:
//!
//! * [`nok_body`] — the Newton–Okounkov polytope of the full-rank valuation
//!   attached to a boundary point $P_j$ and a flag datum $(\psi, \gamma)$.
//!   Over the degree-one slice
//!   $\operatorname{Box}_{\mathcal{D}} = \{u : (1, u) \in \sigma^\vee\}$ the
//!   body is the *un-floored* slab
//!   $\{(u, \lambda) : -\Delta_j(1, u) \le \lambda \le
//!   \sum_{i \ne j} \Delta_i(1, u)\}$, mapped through the affine value map
//!   $\rho$ determined by $(\psi, \gamma)$.
//!
//! * [`test_config_fibers`] — the integral special fibers of the equivariant
//!   test configurations.  Each boundary point $P_j$ contributes the graded
//!   semigroup
//!   $S_j = \{(u, v) : -\lfloor\Delta_j(u)\rfloor \le v \le
//!   \sum_{i \ne j} \lfloor\Delta_i(u)\rfloor\}$,
//!   a general (interior) point contributes
//!   $\{(u, v) : 0 \le v \le \sum_i \lfloor\Delta_i(u)\rfloor\}$, and the
//!   trivial configuration is reported as a marker carrying the original
//!   embedding semigroup.  Each fiber comes with bounded-degree semigroup
//!   generators, its toric ideal, and a normality flag; fibers isomorphic as
//!   graded semigroups are merged via [`lattice_equivalent`].
//!
//! Throughout, generators of graded semigroups are written in *normalized
//! coordinates*: an integral change of basis $A$ with first row $\xi$ makes
//! the grading the first coordinate, so a generator $(u, v)$ is stored as
//! $(A u, v)$ with $(A u)_1 = \langle \xi, u \rangle$ the degree.

use std::collections::BTreeSet;

use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exactla::{
    dot_int, dot_rat, int_determinant, integer_kernel, primitive_of_rational, rat_to_string,
    rational_solve, to_rat_vec, Int, Rat, RatMat, RatVec,
};
use crate::idealkit::{ideal_presentation, toric_ideal_generators, XPolynomial};
use crate::polycore::{dual_cone, lattice_generators, AffIneq, PolyError, Polyhedron, SupportValue};
use crate::tgeom::{
    build_embedding, check_admissible, check_admissible_line, Line, PolyhedralDivisor,
};
use crate::tropkit::degenerate_line;

/// Errors of the polarized layer.
#[derive(Debug, Error)]
pub enum ProjError {
    /// The grading co-character pairs to a proper multiple of one.
    #[error("grading co-character [{0}] is not primitive")]
    NonPrimitiveGrading(String),
    /// No lattice point of the dual tailcone has degree one.
    #[error("the degree-one slice of the dual tailcone is empty")]
    EmptyDegreeSlice,
    /// The degree-one slice of the dual tailcone is not a polytope.
    #[error("the degree-one slice of the dual tailcone is unbounded")]
    UnboundedDegreeSlice,
    /// Polarized constructions need every coefficient nonempty.
    #[error("coefficient {0} is empty; a polarized input needs every coefficient nonempty")]
    EmptyCoefficient(usize),
    /// A boundary-point index outside `0..=m`.
    #[error("boundary index {index} out of range: the divisor has {count} points")]
    BoundaryIndex { index: usize, count: usize },
    /// The affine value map collapses the slab.
    #[error("value map is not injective: {0}")]
    RhoNotInjective(String),
    /// Internal contract violation while assembling a result.
    #[error("{0}")]
    Pipeline(String),
}

// ---------------------------------------------------------------------------
// Integer utilities
// ---------------------------------------------------------------------------

/// Solve $\langle \xi, x \rangle = 1$ over the integers by iterated extended
/// gcd; `None` when the entries of $\xi$ have a common factor (or all vanish).
fn unimodular_column(xi: &[Int]) -> Option<Vec<Int>> {
    let mut g = Int::zero();
    let mut x = vec![Int::zero(); xi.len()];
    for (i, c) in xi.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let eg = g.extended_gcd(c);
        for entry in x.iter_mut() {
            *entry = &*entry * &eg.x;
        }
        x[i] = &x[i] + &eg.y;
        g = eg.gcd;
    }
    if g.is_one() {
        Some(x)
    } else {
        None
    }
}

/// Exact inverse of a square integer matrix, provided the inverse is again
/// integral (determinant $\pm 1$); `None` otherwise.
fn unimodular_inverse(m: &[Vec<Int>]) -> Option<Vec<Vec<Int>>> {
    let n = m.len();
    let a = RatMat::from_int_rows(m).ok()?;
    let mut inv_cols: Vec<Vec<Int>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut e = vec![Rat::zero(); n];
        e[k] = Rat::one();
        let sol = rational_solve(&a, &e).ok()??;
        let mut col = Vec::with_capacity(n);
        for entry in &sol {
            if !entry.denom().is_one() {
                return None;
            }
            col.push(entry.numer().clone());
        }
        inv_cols.push(col);
    }
    Some((0..n).map(|i| (0..n).map(|k| inv_cols[k][i].clone()).collect()).collect())
}

/// All integer vectors in the box $\prod_j [\mathrm{lo}_j, \mathrm{hi}_j]$.
fn integer_box(ranges: &[(Int, Int)]) -> Vec<Vec<Int>> {
    let mut out = vec![Vec::new()];
    for (lo, hi) in ranges {
        let mut next = Vec::new();
        let mut v = lo.clone();
        while &v <= hi {
            for stem in &out {
                let mut s = stem.clone();
                s.push(v.clone());
                next.push(s);
            }
            v += 1;
        }
        out = next;
    }
    out
}

// ---------------------------------------------------------------------------
// Polarized inputs
// ---------------------------------------------------------------------------

/// A polyhedral divisor together with a primitive grading co-character
/// $\xi$ and the derived normalization data: an integral change of basis $A$
/// whose first row is $\xi$ (so degrees become first coordinates), and the
/// degree-one slice $\operatorname{Box}_{\mathcal{D}}$ of the dual tailcone,
/// stored as a polytope in the complementary coordinates.
#[derive(Debug, Clone)]
pub struct PolarizedInput {
    divisor: PolyhedralDivisor,
    grading: Vec<Int>,
    /// Rows of $A$; `a[0] == grading`.
    a: Vec<Vec<Int>>,
    /// Columns of $A^{-1}$: a degree-one base point followed by a lattice
    /// basis of the degree-zero hyperplane.
    a_inv: Vec<Vec<Int>>,
    /// $\{v : A^{-1}(1, v) \in \sigma^\vee\}$, a polytope of dimension
    /// `lattice_rank - 1` (a single point when the rank is one).
    box_d: Polyhedron,
}

impl PolarizedInput {
    /// Validate a divisor/co-character pair and derive the normalization.
    ///
    /// Errors: the co-character is not primitive, some coefficient is empty,
    /// or the degree-one slice of $\sigma^\vee$ is empty or unbounded.
    pub fn new(divisor: PolyhedralDivisor, grading: Vec<Int>) -> Result<Self, ProjError> {
        let r = divisor.lattice_rank();
        if grading.len() != r {
            return Err(ProjError::Pipeline(format!(
                "grading co-character has {} entries but the lattice rank is {}",
                grading.len(),
                r
            )));
        }
        for i in 0..=divisor.m() {
            if divisor.coefficient(i).is_empty() {
                return Err(ProjError::EmptyCoefficient(i));
            }
        }
        let x0 = unimodular_column(&grading)
            .ok_or_else(|| ProjError::NonPrimitiveGrading(fmt_int_vec(&grading)))?;
        let kernel = integer_kernel(&[grading.clone()]);
        debug_assert_eq!(kernel.len(), r - 1);
        let mut a_inv = vec![vec![Int::zero(); r]; r];
        for i in 0..r {
            a_inv[i][0] = x0[i].clone();
        }
        for (t, kv) in kernel.iter().enumerate() {
            for i in 0..r {
                a_inv[i][t + 1] = kv[i].clone();
            }
        }
        let a = unimodular_inverse(&a_inv).ok_or_else(|| {
            ProjError::Pipeline("derived coordinate change is not unimodular".into())
        })?;
        debug_assert_eq!(a[0], grading);
        // The degree-one slice in the complementary coordinates v, where
        // u = A^{-1}(1, v): one inequality per tailcone generator.
        let mut rows = Vec::new();
        for g in divisor.tailcone().generators() {
            let mut coeffs = Vec::with_capacity(r - 1);
            for j in 1..r {
                coeffs.push(dot_int(&column(&a_inv, j), g));
            }
            let constant = dot_int(&column(&a_inv, 0), g);
            if coeffs.iter().all(|c| c.is_zero()) {
                if constant.is_negative() {
                    return Err(ProjError::EmptyDegreeSlice);
                }
                continue;
            }
            rows.push(AffIneq::new(coeffs, constant));
        }
        let box_d = match Polyhedron::from_h_rep(r - 1, &rows) {
            Ok(p) => p,
            Err(PolyError::ContainsLine) => return Err(ProjError::UnboundedDegreeSlice),
            Err(e) => return Err(ProjError::Pipeline(format!("degree-one slice: {e}"))),
        };
        if box_d.is_empty() {
            return Err(ProjError::EmptyDegreeSlice);
        }
        if !box_d.tailcone().rays().is_empty() {
            return Err(ProjError::UnboundedDegreeSlice);
        }
        Ok(PolarizedInput {
            divisor,
            grading,
            a,
            a_inv,
            box_d,
        })
    }

    pub fn divisor(&self) -> &PolyhedralDivisor {
        &self.divisor
    }

    pub fn grading(&self) -> &[Int] {
        &self.grading
    }

    /// The degree-one slice $\{v : A^{-1}(1,v) \in \sigma^\vee\}$ in the
    /// complementary coordinates (ambient rank `lattice_rank - 1`).
    pub fn box_d(&self) -> &Polyhedron {
        &self.box_d
    }

    /// Normalized coordinates $A u$ of a weight; first entry is the degree.
    pub fn normalize(&self, u: &[Int]) -> Vec<Int> {
        self.a.iter().map(|row| dot_int(row, u)).collect()
    }

    /// Original coordinates $A^{-1} w$ of a normalized weight.
    pub fn denormalize(&self, w: &[Int]) -> Vec<Int> {
        (0..w.len())
            .map(|i| dot_int(&self.a_inv[i], w))
            .collect()
    }

    /// $\langle \xi, u \rangle$.
    pub fn degree_of(&self, u: &[Int]) -> Int {
        dot_int(&self.grading, u)
    }

    /// The distinguished full-rank value map on the slab: $\psi$ reads off
    /// the complementary normalized coordinates (rows $2..r$ of $A$, padded
    /// with a zero row) and $\gamma = e_r$ records the slab height, so the
    /// transport matrix is the identity and the body coincides with the
    /// slab itself.
    pub fn identity_value_map(&self) -> (Vec<Vec<Int>>, Vec<Int>) {
        let r = self.divisor.lattice_rank();
        let mut psi: Vec<Vec<Int>> = self.a[1..].to_vec();
        psi.push(vec![Int::zero(); r]);
        let mut gamma = vec![Int::zero(); r];
        gamma[r - 1] = Int::one();
        (psi, gamma)
    }

    /// All lattice weights of degree `k` in the dual tailcone, in original
    /// coordinates, sorted.
    pub fn slice_points(&self, k: u32) -> Vec<Vec<Int>> {
        let r = self.divisor.lattice_rank();
        let sigma_gens = self.divisor.tailcone().generators();
        let kk = Int::from(k);
        if r == 1 {
            let u = vec![&self.a_inv[0][0] * &kk];
            if sigma_gens.iter().all(|g| !dot_int(&u, g).is_negative()) {
                return vec![u];
            }
            return Vec::new();
        }
        let mut ranges = Vec::with_capacity(r - 1);
        for j in 0..r - 1 {
            let mut lo: Option<Rat> = None;
            let mut hi: Option<Rat> = None;
            for vtx in self.box_d.vertices() {
                let val = &vtx[j] * Rat::from_integer(kk.clone());
                if lo.as_ref().map_or(true, |l| val < *l) {
                    lo = Some(val.clone());
                }
                if hi.as_ref().map_or(true, |h| val > *h) {
                    hi = Some(val);
                }
            }
            let (lo, hi) = (lo.expect("nonempty slice"), hi.expect("nonempty slice"));
            ranges.push((lo.ceil().to_integer(), hi.floor().to_integer()));
        }
        let mut out = Vec::new();
        for v in integer_box(&ranges) {
            let mut w = Vec::with_capacity(r);
            w.push(kk.clone());
            w.extend(v);
            let u = self.denormalize(&w);
            if sigma_gens.iter().all(|g| !dot_int(&u, g).is_negative()) {
                out.push(u);
            }
        }
        out.sort();
        out
    }
}

fn column(m: &[Vec<Int>], j: usize) -> Vec<Int> {
    m.iter().map(|row| row[j].clone()).collect()
}

fn fmt_int_vec(v: &[Int]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

// ---------------------------------------------------------------------------
// Newton–Okounkov bodies
// ---------------------------------------------------------------------------

/// A Newton–Okounkov polytope: both exact representations of the image of
/// the degree-one slab under the affine value map $\rho$, together with the
/// map itself and its domain.
#[derive(Debug, Clone)]
pub struct NOBody {
    /// Integral H-representation of the image (affine-hull equations appear
    /// as paired opposite inequalities when the map raises dimension).
    pub inequalities: Vec<AffIneq>,
    /// Rational vertices of the image, sorted.
    pub vertices: Vec<RatVec>,
    /// Rows of the linear part of $\rho$ on slab coordinates $(v, \lambda)$.
    pub rho_linear: Vec<Vec<Rat>>,
    /// Constant part of $\rho$.
    pub rho_translate: Vec<Rat>,
    /// The slab itself, in the coordinates $(v, \lambda)$.
    pub preimage: Polyhedron,
}

impl NOBody {
    /// JSON form: `{"inequalities": [[coeffs..., constant]], "vertices":
    /// [[rational strings]], "rho": {...}}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "inequalities": serde_json::Value::Array(
                self.inequalities
                    .iter()
                    .map(|iq| {
                        let mut row: Vec<serde_json::Value> = iq
                            .coeffs
                            .iter()
                            .map(|c| serde_json::Value::String(c.to_string()))
                            .collect();
                        row.push(serde_json::Value::String(iq.constant.to_string()));
                        serde_json::Value::Array(row)
                    })
                    .collect(),
            ),
            "vertices": serde_json::Value::Array(
                self.vertices
                    .iter()
                    .map(|v| {
                        serde_json::Value::Array(
                            v.iter()
                                .map(|x| serde_json::Value::String(rat_to_string(x)))
                                .collect(),
                        )
                    })
                    .collect(),
            ),
            "rho": {
                "linear": serde_json::Value::Array(
                    self.rho_linear
                        .iter()
                        .map(|row| {
                            serde_json::Value::Array(
                                row.iter()
                                    .map(|x| serde_json::Value::String(rat_to_string(x)))
                                    .collect(),
                            )
                        })
                        .collect(),
                ),
                "translate": serde_json::Value::Array(
                    self.rho_translate
                        .iter()
                        .map(|x| serde_json::Value::String(rat_to_string(x)))
                        .collect(),
                ),
            },
        })
    }
}

/// The Newton–Okounkov polytope of the valuation at boundary point `j` with
/// flag datum `(psi, gamma)`.
///
/// The slab $\{(v, \lambda) : A^{-1}(1,v) \in \sigma^\vee,\;
/// -\Delta_j(A^{-1}(1,v)) \le \lambda \le \sum_{i \ne j}
/// \Delta_i(A^{-1}(1,v))\}$ uses the exact (un-floored) support values; it is
/// then mapped through
/// $\rho(v, \lambda) = \psi\,A^{-1}(1, v) + \lambda\,\gamma$.
///
/// `psi` has one row per output coordinate (entries pair against the
/// original lattice coordinates) and `gamma` is the image of the unit of the
/// slab coordinate $\lambda$. Errors: boundary index out of range, the line
/// not matching the divisor, or $\rho$ not injective.
pub fn nok_body(
    p: &PolarizedInput,
    line: &Line,
    j: usize,
    psi: &[Vec<Int>],
    gamma: &[Int],
) -> Result<NOBody, ProjError> {
    let d = p.divisor();
    let r = d.lattice_rank();
    let m = d.m();
    if line.ambient() != m {
        return Err(ProjError::Pipeline(format!(
            "line lives in projective {}-space but the divisor has {} points",
            line.ambient(),
            m + 1
        )));
    }
    if j > m {
        return Err(ProjError::BoundaryIndex { index: j, count: m + 1 });
    }
    let t = psi.len();
    if t == 0 || gamma.len() != t || psi.iter().any(|row| row.len() != r) {
        return Err(ProjError::Pipeline(
            "value map needs matching psi rows (one per output coordinate, \
             width the lattice rank) and gamma entries"
                .into(),
        ));
    }
    // Slab H-representation in coordinates (v, lambda), dimension s = r.
    let s = r;
    let mut rows: Vec<AffIneq> = Vec::new();
    for g in d.tailcone().generators() {
        let mut coeffs = Vec::with_capacity(s);
        for jj in 1..r {
            coeffs.push(Rat::from_integer(dot_int(&column(&p.a_inv, jj), g)));
        }
        coeffs.push(Rat::zero());
        push_scaled(&mut rows, &coeffs, &Rat::from_integer(dot_int(&column(&p.a_inv, 0), g)));
    }
    // Lower bound: lambda + <u, w> >= 0 for every vertex w of Delta_j.
    for w in d.coefficient(j).vertices() {
        let (c0, mut coeffs) = pullback_affine(&p.a_inv, w);
        coeffs.push(Rat::one());
        push_scaled(&mut rows, &coeffs, &c0);
    }
    // Upper bound: <u, W> - lambda >= 0 for every sum W of vertices of the
    // other coefficients (the support function of a sum is the minimum over
    // vertex sums).
    for w_sum in vertex_sums(d, j) {
        let (c0, mut coeffs) = pullback_affine(&p.a_inv, &w_sum);
        coeffs.push(-Rat::one());
        push_scaled(&mut rows, &coeffs, &c0);
    }
    let preimage = match Polyhedron::from_h_rep(s, &rows) {
        Ok(b) => b,
        Err(e) => {
            return Err(ProjError::Pipeline(format!(
                "degree-one slab construction failed: {e}"
            )))
        }
    };
    if !preimage.tailcone().rays().is_empty() {
        return Err(ProjError::Pipeline("degree-one slab is unbounded".into()));
    }
    // Linear part T of rho on (v, lambda): the v_k column is psi applied to
    // the k-th column of A^{-1}; the lambda column is gamma.
    let mut t_cols: Vec<Vec<Rat>> = Vec::with_capacity(s);
    for k in 1..r {
        let ak = column(&p.a_inv, k);
        t_cols.push(psi.iter().map(|row| Rat::from_integer(dot_int(row, &ak))).collect());
    }
    t_cols.push(gamma.iter().map(|x| Rat::from_integer(x.clone())).collect());
    let t_rows: Vec<RatVec> = (0..t)
        .map(|i| (0..s).map(|k| t_cols[k][i].clone()).collect())
        .collect();
    let translate: Vec<Rat> = {
        let a0 = column(&p.a_inv, 0);
        psi.iter().map(|row| Rat::from_integer(dot_int(row, &a0))).collect()
    };
    let t_mat = RatMat::from_rows(t_rows.clone())
        .map_err(|e| ProjError::Pipeline(format!("value map shape: {e}")))?;
    if t_mat.rank() != s {
        return Err(ProjError::RhoNotInjective(format!(
            "linear part has rank {} on a slab of dimension {}",
            t_mat.rank(),
            s
        )));
    }
    // Vertices of the image.
    let mut vertices: Vec<RatVec> = preimage
        .vertices()
        .iter()
        .map(|x| {
            (0..t)
                .map(|i| dot_rat(&t_rows[i], x) + &translate[i])
                .collect()
        })
        .collect();
    vertices.sort();
    // Left inverse L of T (s x t), for transporting the H-representation.
    let t_transpose = RatMat::from_rows(
        (0..s)
            .map(|k| (0..t).map(|i| t_rows[i][k].clone()).collect())
            .collect(),
    )
    .map_err(|e| ProjError::Pipeline(format!("value map shape: {e}")))?;
    let mut left_inverse: Vec<RatVec> = Vec::with_capacity(s);
    for k in 0..s {
        let mut e = vec![Rat::zero(); s];
        e[k] = Rat::one();
        let sol = rational_solve(&t_transpose, &e)
            .map_err(|e| ProjError::Pipeline(format!("left inverse: {e}")))?
            .ok_or_else(|| ProjError::Pipeline("left inverse does not exist".into()))?;
        left_inverse.push(sol);
    }
    let mut inequalities: Vec<AffIneq> = Vec::new();
    for iq in preimage.ineqs() {
        // a.x + c >= 0 with x = L(y - translate) becomes (a L).y + (c - (a L).translate) >= 0.
        let mut ay = vec![Rat::zero(); t];
        for (k, lk) in left_inverse.iter().enumerate() {
            let ak = Rat::from_integer(iq.coeffs[k].clone());
            for i in 0..t {
                ay[i] += &ak * &lk[i];
            }
        }
        let c = Rat::from_integer(iq.constant.clone()) - dot_rat(&ay, &translate);
        push_scaled(&mut inequalities, &ay, &c);
    }
    // When rho raises dimension, cut the image down to the affine hull.
    for kappa in t_transpose.nullspace() {
        let c = -dot_rat(&kappa, &translate);
        push_scaled(&mut inequalities, &kappa, &c);
        let neg: Vec<Rat> = kappa.iter().map(|x| -x).collect();
        push_scaled(&mut inequalities, &neg, &-c);
    }
    Ok(NOBody {
        inequalities,
        vertices,
        rho_linear: t_rows,
        rho_translate: translate,
        preimage,
    })
}

/// Scale a rational inequality to a primitive integral one and push it
/// (dropping identically-zero rows).
fn push_scaled(rows: &mut Vec<AffIneq>, coeffs: &[Rat], constant: &Rat) {
    let mut full = coeffs.to_vec();
    full.push(constant.clone());
    let prim = primitive_of_rational(&full);
    if prim.iter().all(|x| x.is_zero()) {
        return;
    }
    let constant = prim.last().expect("nonempty").clone();
    let coeffs = prim[..prim.len() - 1].to_vec();
    rows.push(AffIneq::new(coeffs, constant));
}

/// $\langle A^{-1}(1, v), w\rangle$ as an affine expression in $v$:
/// returns (constant, coefficients).
fn pullback_affine(a_inv: &[Vec<Int>], w: &[Rat]) -> (Rat, Vec<Rat>) {
    let r = a_inv.len();
    let mut vals = Vec::with_capacity(r);
    for j in 0..r {
        let col: RatVec = (0..r).map(|i| Rat::from_integer(a_inv[i][j].clone())).collect();
        vals.push(dot_rat(&col, w));
    }
    let coeffs = vals.split_off(1);
    (vals.pop().expect("constant"), coeffs)
}

/// All sums $\sum_{i \ne j} w_i$ over vertices $w_i$ of the coefficients,
/// deduplicated.
fn vertex_sums(d: &PolyhedralDivisor, skip: usize) -> Vec<RatVec> {
    let r = d.lattice_rank();
    let mut sums: BTreeSet<RatVec> = BTreeSet::new();
    sums.insert(vec![Rat::zero(); r]);
    for i in 0..=d.m() {
        if i == skip {
            continue;
        }
        let mut next = BTreeSet::new();
        for s in &sums {
            for w in d.coefficient(i).vertices() {
                let sum: RatVec = s.iter().zip(w).map(|(a, b)| a + b).collect();
                next.insert(sum);
            }
        }
        sums = next;
    }
    sums.into_iter().collect()
}

// ---------------------------------------------------------------------------
// Degeneration fibers
// ---------------------------------------------------------------------------

/// One integral special fiber of an equivariant test configuration: a graded
/// semigroup with bounded-degree generators (normalized coordinates, degree
/// first), its toric ideal, and a normality flag.
#[derive(Debug, Clone)]
pub struct DegenerationFiber {
    /// `"0"`, …, `"m"` for boundary points, `"interior-point"`, or
    /// `"trivial"`.
    pub label: String,
    /// Labels of further configurations merged into this one because their
    /// semigroups are lattice-equivalent.
    pub represents: Vec<String>,
    /// Semigroup generators found up to the degree bound, each with positive
    /// degree in its first coordinate.
    pub generators: Vec<Vec<Int>>,
    /// Human-readable description of the defining region.
    pub region: String,
    /// Generators of the fiber's defining ideal up to the degree bound.
    pub ideal_generators: Vec<XPolynomial>,
    /// Whether the fiber is a normal variety (projective normality of the
    /// corresponding coefficient data).
    pub normal: bool,
    pub warnings: Vec<String>,
}

impl DegenerationFiber {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "label": self.label,
            "represents": serde_json::Value::Array(
                self.represents.iter().map(|s| serde_json::Value::String(s.clone())).collect()
            ),
            "generators": serde_json::Value::Array(
                self.generators
                    .iter()
                    .map(|g| {
                        serde_json::Value::Array(
                            g.iter().map(|x| serde_json::Value::String(x.to_string())).collect(),
                        )
                    })
                    .collect(),
            ),
            "region": self.region,
            "ideal_generators": serde_json::Value::Array(
                self.ideal_generators.iter().map(|f| f.to_json()).collect()
            ),
            "ideal_generators_pretty": serde_json::Value::Array(
                self.ideal_generators
                    .iter()
                    .map(|f| serde_json::Value::String(f.to_string()))
                    .collect(),
            ),
            "normal": self.normal,
            "warnings": serde_json::Value::Array(
                self.warnings.iter().map(|w| serde_json::Value::String(w.clone())).collect()
            ),
        })
    }
}

/// The integral special fibers of all equivariant test configurations of a
/// polarized input: the trivial one (a marker carrying the original
/// embedding semigroup), one per boundary point $P_j$, and the one attached
/// to a general point of the base curve.  Fibers whose graded semigroups are
/// unimodularly equivalent are merged, keeping the earliest label
/// (`"trivial"`, then `"0"`, …, `"m"`, then `"interior-point"`) and listing
/// the merged ones in `represents`.  Results are sorted by label.
///
/// Semigroup generators, and hence the toric ideals, are certified only up
/// to `degree_bound` (minimum two); a warning is attached when generators
/// still appear at the bound itself.
pub fn test_config_fibers(
    p: &PolarizedInput,
    line: &Line,
    degree_bound: u32,
) -> Result<Vec<DegenerationFiber>, ProjError> {
    let d = p.divisor();
    let m = d.m();
    if line.ambient() != m {
        return Err(ProjError::Pipeline(format!(
            "line lives in projective {}-space but the divisor has {} points",
            line.ambient(),
            m + 1
        )));
    }
    let bound = degree_bound.max(2);
    let mut fibers: Vec<DegenerationFiber> = Vec::new();
    fibers.push(trivial_fiber(p, line, bound)?);
    for j in 0..=m {
        fibers.push(region_fiber(p, line, Some(j), bound)?);
    }
    fibers.push(region_fiber(p, line, None, bound)?);
    // Merge lattice-equivalent semigroups into the earliest emitted fiber.
    let mut kept: Vec<DegenerationFiber> = Vec::new();
    for f in fibers {
        if let Some(k) = kept
            .iter_mut()
            .find(|k| lattice_equivalent(&k.generators, &f.generators))
        {
            k.represents.push(f.label);
            k.warnings.extend(f.warnings);
        } else {
            kept.push(f);
        }
    }
    for k in &mut kept {
        k.represents.sort();
        k.warnings.sort();
        k.warnings.dedup();
    }
    kept.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(kept)
}

/// The trivial configuration: fiber the original variety itself, reported
/// through the embedding semigroup (normalized Hilbert-basis columns) and
/// the full defining ideal.
fn trivial_fiber(
    p: &PolarizedInput,
    line: &Line,
    bound: u32,
) -> Result<DegenerationFiber, ProjError> {
    let d = p.divisor();
    let r = d.lattice_rank();
    let e = build_embedding(d).map_err(|err| ProjError::Pipeline(format!("embedding: {err}")))?;
    let mut generators = Vec::with_capacity(e.hilbert.len());
    for col in &e.hilbert {
        let (u, v) = col.split_at(r);
        let mut g = p.normalize(u);
        g.extend_from_slice(v);
        if !g[0].is_positive() {
            return Err(ProjError::Pipeline(
                "an embedding generator has nonpositive degree under the grading".into(),
            ));
        }
        generators.push(g);
    }
    let pres = ideal_presentation(&e, line, d, bound)
        .map_err(|err| ProjError::Pipeline(format!("ideal presentation: {err}")))?;
    let normal = check_admissible_line(d.coefficients(), line, d.tailcone()).admissible;
    Ok(DegenerationFiber {
        label: "trivial".into(),
        represents: Vec::new(),
        generators,
        region: "the full embedding semigroup (generators kept in embedding column order)"
            .into(),
        ideal_generators: pres.all_generators(),
        normal,
        warnings: pres.warnings,
    })
}

/// The fiber of the configuration at boundary point `j` (`Some`) or at a
/// general interior point of the base curve (`None`).
fn region_fiber(
    p: &PolarizedInput,
    line: &Line,
    j_opt: Option<usize>,
    bound: u32,
) -> Result<DegenerationFiber, ProjError> {
    let d = p.divisor();
    let m = d.m();
    // Collect the region's lattice points, degree by degree.
    let mut by_degree: Vec<BTreeSet<Vec<Int>>> = vec![BTreeSet::new(); bound as usize + 1];
    for k in 1..=bound {
        for u in p.slice_points(k) {
            let Some((lo, hi)) = region_interval(d, j_opt, &u)? else {
                continue;
            };
            let nu = p.normalize(&u);
            let mut v = lo;
            while v <= hi {
                let mut g = nu.clone();
                g.push(v.clone());
                by_degree[k as usize].insert(g);
                v += 1;
            }
        }
    }
    // Greedy minimal generators: a point is a generator exactly when it is
    // not a sum of lower-degree semigroup points (the region is closed under
    // addition, so sums of generators stay inside it).
    let mut generators: Vec<Vec<Int>> = Vec::new();
    for k in 1..=bound as usize {
        let mut reachable: BTreeSet<Vec<Int>> = BTreeSet::new();
        for g in &generators {
            let dg = usize::try_from(&g[0]).expect("degree fits");
            if dg < k {
                for pnt in &by_degree[k - dg] {
                    let sum: Vec<Int> = g.iter().zip(pnt).map(|(a, b)| a + b).collect();
                    reachable.insert(sum);
                }
            }
        }
        for pnt in &by_degree[k] {
            if !reachable.contains(pnt) {
                generators.push(pnt.clone());
            }
        }
    }
    generators.sort();
    let mut warnings = Vec::new();
    if generators
        .iter()
        .any(|g| usize::try_from(&g[0]).expect("degree fits") == bound as usize)
    {
        warnings.push(format!(
            "semigroup generators appear at the degree bound {bound}; raise the bound to \
             certify completeness"
        ));
    }
    let toric = toric_ideal_generators(&generators, bound);
    if let Some(w) = toric.completeness_warning {
        warnings.push(w);
    }
    // Normality of the fiber via admissibility of the coefficient data,
    // grouped by the coincidences of the degenerated line.
    let sigma_dual_gens = lattice_generators(&dual_cone(d.tailcone()));
    let normal = match j_opt {
        Some(j) if m >= 2 => {
            let bp = line
                .boundary_points()
                .iter()
                .find(|bp| bp.vanishing.contains(&j))
                .ok_or_else(|| {
                    ProjError::Pipeline(format!("no boundary point of the line covers form {j}"))
                })?;
            let dl = degenerate_line(line, &bp.ord_table).map_err(|e| {
                ProjError::Pipeline(format!("degenerating the line at point {j}: {e}"))
            })?;
            check_admissible_line(d.coefficients(), &dl, d.tailcone()).admissible
        }
        Some(_) => {
            // With two marked points nothing coincides under degeneration.
            let groups: Vec<Vec<usize>> = (0..=m).map(|i| vec![i]).collect();
            check_admissible(d.coefficients(), &groups, &sigma_dual_gens).admissible
        }
        None => {
            // At a general point all coefficients collapse onto one fiber.
            let groups: Vec<Vec<usize>> = vec![(0..=m).collect()];
            check_admissible(d.coefficients(), &groups, &sigma_dual_gens).admissible
        }
    };
    let (label, region) = match j_opt {
        Some(j) => (
            j.to_string(),
            format!(
                "(u, v) with -floor(Delta_{j}(u)) <= v <= sum over i != {j} of \
                 floor(Delta_i(u))"
            ),
        ),
        None => (
            "interior-point".to_string(),
            "(u, v) with 0 <= v <= sum over all i of floor(Delta_i(u))".to_string(),
        ),
    };
    Ok(DegenerationFiber {
        label,
        represents: Vec::new(),
        generators,
        region,
        ideal_generators: toric.generators,
        normal,
        warnings,
    })
}

/// The interval of the fiber region over a fixed weight `u`, or `None` when
/// it is empty: floors of the support values bound the extra coordinate.
fn region_interval(
    d: &PolyhedralDivisor,
    j_opt: Option<usize>,
    u: &[Int],
) -> Result<Option<(Int, Int)>, ProjError> {
    let u_rat = to_rat_vec(u);
    let mut floors = Vec::with_capacity(d.m() + 1);
    for i in 0..=d.m() {
        match d.support(i, &u_rat) {
            Ok(SupportValue::Finite(val)) => floors.push(val.floor().to_integer()),
            Ok(SupportValue::PlusInfinity) => {
                return Err(ProjError::EmptyCoefficient(i));
            }
            Err(e) => {
                return Err(ProjError::Pipeline(format!(
                    "support value at coefficient {i}: {e}"
                )))
            }
        }
    }
    let (lo, hi) = match j_opt {
        Some(j) => {
            let lo = -floors[j].clone();
            let hi = floors
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .fold(Int::zero(), |acc, (_, f)| acc + f);
            (lo, hi)
        }
        None => (
            Int::zero(),
            floors.iter().fold(Int::zero(), |acc, f| acc + f),
        ),
    };
    if lo > hi {
        Ok(None)
    } else {
        Ok(Some((lo, hi)))
    }
}

// ---------------------------------------------------------------------------
// Lattice equivalence of graded semigroups
// ---------------------------------------------------------------------------

/// Whether a unimodular change of coordinates fixing the grading (first)
/// coordinate maps one generator set onto the other.
///
/// Both sets must span their ambient lattice rationally for the search to be
/// conclusive; otherwise only literal equality (after sorting) is detected.
/// The search matches an independent subset of `s1` to candidates in `s2` of
/// equal degree, solves for the map, and verifies integrality, determinant
/// $\pm 1$, and a set-wise match.
pub fn lattice_equivalent(s1: &[Vec<Int>], s2: &[Vec<Int>]) -> bool {
    if s1.len() != s2.len() {
        return false;
    }
    if s1.is_empty() {
        return true;
    }
    let k = s1[0].len();
    if k == 0 || s1.iter().chain(s2.iter()).any(|v| v.len() != k) {
        return false;
    }
    let mut a: Vec<Vec<Int>> = s1.to_vec();
    a.sort();
    a.dedup();
    let mut b: Vec<Vec<Int>> = s2.to_vec();
    b.sort();
    b.dedup();
    if a.len() != b.len() {
        return false;
    }
    if a == b {
        return true;
    }
    // A grading-preserving map fixes the degree multiset.
    let mut da: Vec<Int> = a.iter().map(|v| v[0].clone()).collect();
    let mut db: Vec<Int> = b.iter().map(|v| v[0].clone()).collect();
    da.sort();
    db.sort();
    if da != db {
        return false;
    }
    let Some(base) = independent_subset(&a, k) else {
        // Rank-deficient generator sets: only literal equality is decided.
        return false;
    };
    let b1_rows: Vec<RatVec> = (0..k)
        .map(|row| base.iter().map(|&idx| Rat::from_integer(a[idx][row].clone())).collect())
        .collect();
    let b1 = RatMat::from_rows(b1_rows).expect("square");
    let b_set: BTreeSet<Vec<Int>> = b.iter().cloned().collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut used = vec![false; b.len()];
    try_assignments(&a, &b, &base, &b1, &b_set, &mut chosen, &mut used)
}

/// Greedily select indices of a rationally independent spanning subset;
/// `None` when the set does not span.
fn independent_subset(a: &[Vec<Int>], k: usize) -> Option<Vec<usize>> {
    let mut picked: Vec<usize> = Vec::new();
    let mut rows: Vec<RatVec> = Vec::new();
    for (idx, v) in a.iter().enumerate() {
        let mut candidate = rows.clone();
        candidate.push(to_rat_vec(v));
        let rank = RatMat::from_rows(candidate.clone()).expect("rectangular").rank();
        if rank == rows.len() + 1 {
            rows = candidate;
            picked.push(idx);
            if picked.len() == k {
                return Some(picked);
            }
        }
    }
    None
}

/// Depth-first search over degree-respecting images of the chosen base.
fn try_assignments(
    a: &[Vec<Int>],
    b: &[Vec<Int>],
    base: &[usize],
    b1: &RatMat,
    b_set: &BTreeSet<Vec<Int>>,
    chosen: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> bool {
    let pos = chosen.len();
    if pos == base.len() {
        return check_candidate_map(a, base, b1, b, chosen, b_set);
    }
    let want_degree = &a[base[pos]][0];
    for (idx, cand) in b.iter().enumerate() {
        if used[idx] || &cand[0] != want_degree {
            continue;
        }
        used[idx] = true;
        chosen.push(idx);
        if try_assignments(a, b, base, b1, b_set, chosen, used) {
            return true;
        }
        chosen.pop();
        used[idx] = false;
    }
    false
}

/// Solve for the map sending the base to the chosen images and verify it is
/// unimodular, grading-preserving, and a set bijection.
fn check_candidate_map(
    a: &[Vec<Int>],
    base: &[usize],
    b1: &RatMat,
    b: &[Vec<Int>],
    chosen: &[usize],
    b_set: &BTreeSet<Vec<Int>>,
) -> bool {
    let k = base.len();
    // U . a[base[c]] = b[chosen[c]] for all c: solve row by row, i.e.
    // B1^T . (U row)^T = (target row over the chosen columns).
    let b1_t = RatMat::from_rows(
        (0..k).map(|c| (0..k).map(|row| b1.at(row, c).clone()).collect()).collect(),
    )
    .expect("square");
    let mut u_rows: Vec<Vec<Int>> = Vec::with_capacity(k);
    for row in 0..k {
        let rhs: RatVec = chosen
            .iter()
            .map(|&idx| Rat::from_integer(b[idx][row].clone()))
            .collect();
        let Ok(Some(sol)) = rational_solve(&b1_t, &rhs) else {
            return false;
        };
        let mut int_row = Vec::with_capacity(k);
        for entry in &sol {
            if !entry.denom().is_one() {
                return false;
            }
            int_row.push(entry.numer().clone());
        }
        u_rows.push(int_row);
    }
    // Grading preservation: the first row must be the first unit vector.
    if !u_rows[0][0].is_one() || u_rows[0][1..].iter().any(|x| !x.is_zero()) {
        return false;
    }
    let det = int_determinant(&u_rows);
    if !(det.clone().abs()).is_one() {
        return false;
    }
    for v in a {
        let img: Vec<Int> = u_rows.iter().map(|row| dot_int(row, v)).collect();
        if !b_set.contains(&img) {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::exactla::{int, rat, rat_int};
    use crate::idealkit::{fiber_points, graded_piece, ideal_generators_il};
    use crate::polycore::Cone;
    use crate::tgeom::line_from_divisor;
    use crate::tgeom::tests::{d6_divisor, pomega_divisor};

    fn ints(v: &[i64]) -> Vec<Int> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn int_rows(rows: &[&[i64]]) -> Vec<Vec<Int>> {
        rows.iter().map(|r| ints(r)).collect()
    }

    fn rvec(entries: &[(i64, i64)]) -> RatVec {
        entries.iter().map(|&(n, d)| rat(n, d)).collect()
    }

    /// Rank two, tailcone spanned by (0,1) and (2,-1), grading (1,0)
    /// (normalization is the identity), three lattice-vertex coefficients.
    fn slab_divisor() -> PolyhedralDivisor {
        let sigma = Cone::from_rays(2, &int_rows(&[&[0, 1], &[2, -1]]));
        PolyhedralDivisor::new(
            2,
            sigma,
            &[
                (rat_int(0), rat_int(1)),
                (rat_int(1), rat_int(0)),
                (rat_int(1), rat_int(1)),
            ],
            &[
                Some(vec![rvec(&[(1, 1), (0, 1)])]),
                Some(vec![rvec(&[(1, 1), (1, 1)])]),
                Some(vec![rvec(&[(0, 1), (-1, 1)])]),
            ],
        )
        .unwrap()
    }

    /// Same tailcone with the first and last coefficients equal, so that the
    /// bodies at boundary indices 0 and 2 coincide.
    fn swap_divisor() -> PolyhedralDivisor {
        let sigma = Cone::from_rays(2, &int_rows(&[&[0, 1], &[2, -1]]));
        PolyhedralDivisor::new(
            2,
            sigma,
            &[
                (rat_int(0), rat_int(1)),
                (rat_int(1), rat_int(0)),
                (rat_int(1), rat_int(1)),
            ],
            &[
                Some(vec![rvec(&[(1, 1), (0, 1)])]),
                Some(vec![rvec(&[(0, 1), (-1, 1)])]),
                Some(vec![rvec(&[(1, 1), (0, 1)])]),
            ],
        )
        .unwrap()
    }

    /// A rank-two divisor with two marked points and lattice vertices: the
    /// associated variety is already toric (m = 1).
    fn toric_divisor() -> PolyhedralDivisor {
        let sigma = Cone::from_rays(2, &int_rows(&[&[1, 1], &[-1, 1]]));
        PolyhedralDivisor::new(
            2,
            sigma,
            &[(rat_int(0), rat_int(1)), (rat_int(1), rat_int(0))],
            &[
                Some(vec![rvec(&[(1, 1), (0, 1)])]),
                Some(vec![rvec(&[(0, 1), (0, 1)])]),
            ],
        )
        .unwrap()
    }

    fn pomega_polarized() -> PolarizedInput {
        PolarizedInput::new(pomega_divisor(), ints(&[0, 0, 1])).unwrap()
    }

    fn d6_polarized() -> PolarizedInput {
        PolarizedInput::new(d6_divisor(), ints(&[1])).unwrap()
    }

    /// psi/gamma giving the identity value map on the slab coordinates.
    fn identity_rho(p: &PolarizedInput) -> (Vec<Vec<Int>>, Vec<Int>) {
        p.identity_value_map()
    }

    #[test]
    fn grading_normalization_round_trips() {
        let p = pomega_polarized();
        assert_eq!(p.a[0], ints(&[0, 0, 1]));
        let u = ints(&[5, -3, 2]);
        assert_eq!(p.normalize(&u)[0], int(2));
        assert_eq!(p.denormalize(&p.normalize(&u)), u);
        assert_eq!(p.normalize(&u), ints(&[2, 5, -3]));
        let slice = p.slice_points(1);
        assert_eq!(
            slice,
            int_rows(&[
                &[-1, 0, 1],
                &[-1, 1, 1],
                &[0, -1, 1],
                &[0, 0, 1],
                &[0, 1, 1],
                &[1, -1, 1],
                &[1, 0, 1]
            ])
        );
        for u in &slice {
            assert_eq!(p.degree_of(u), int(1));
        }
    }

    #[test]
    fn trivial_slab_body_is_a_box() {
        let d = slab_divisor();
        let p = PolarizedInput::new(d, ints(&[1, 0])).unwrap();
        // Degree-one slice: the segment 0 <= v <= 2.
        assert_eq!(
            p.box_d().vertices(),
            &[rvec(&[(0, 1)]), rvec(&[(2, 1)])]
        );
        let line = line_from_divisor(p.divisor());
        let (psi, gamma) = identity_rho(&p);
        let body = nok_body(&p, &line, 0, &psi, &gamma).unwrap();
        assert_eq!(
            body.vertices,
            vec![
                rvec(&[(0, 1), (-1, 1)]),
                rvec(&[(0, 1), (1, 1)]),
                rvec(&[(2, 1), (-1, 1)]),
                rvec(&[(2, 1), (1, 1)]),
            ]
        );
        for v in &body.vertices {
            for iq in &body.inequalities {
                assert!(!iq.eval_rat(v).is_negative());
            }
            // Each vertex of the 2-polytope lies on two independent facets.
            let tight: Vec<RatVec> = body
                .inequalities
                .iter()
                .filter(|iq| iq.eval_rat(v).is_zero())
                .map(|iq| to_rat_vec(&iq.coeffs))
                .collect();
            assert_eq!(RatMat::from_rows(tight).unwrap().rank(), 2);
        }
    }

    #[test]
    fn swapped_boundary_indices_give_the_same_body() {
        let d = swap_divisor();
        let p = PolarizedInput::new(d, ints(&[1, 0])).unwrap();
        let line = line_from_divisor(p.divisor());
        let (psi, gamma) = identity_rho(&p);
        let body0 = nok_body(&p, &line, 0, &psi, &gamma).unwrap();
        let body2 = nok_body(&p, &line, 2, &psi, &gamma).unwrap();
        assert_eq!(body0.vertices, body2.vertices);
        assert!(!body0.vertices.is_empty());
    }

    /// Count lattice points of the k-fold dilation of a body given by its
    /// integral H-representation and rational vertices.
    fn dilation_count(body: &NOBody, k: i64) -> usize {
        let dim = body.vertices[0].len();
        let kk = rat_int(k);
        let mut ranges = Vec::with_capacity(dim);
        for j in 0..dim {
            let vals: Vec<Rat> = body.vertices.iter().map(|v| &v[j] * &kk).collect();
            let lo = vals.iter().min().unwrap().ceil().to_integer();
            let hi = vals.iter().max().unwrap().floor().to_integer();
            ranges.push((lo, hi));
        }
        integer_box(&ranges)
            .into_iter()
            .filter(|x| {
                body.inequalities.iter().all(|iq| {
                    let mut val = iq.constant.clone() * int(k);
                    for (c, xi) in iq.coeffs.iter().zip(x.iter()) {
                        val += c * xi;
                    }
                    !val.is_negative()
                })
            })
            .count()
    }

    #[test]
    fn rank_three_dilations_count_sections() {
        let p = pomega_polarized();
        let d = p.divisor().clone();
        let line = line_from_divisor(&d);
        let (psi, gamma) = identity_rho(&p);
        let body = nok_body(&p, &line, 0, &psi, &gamma).unwrap();
        let e = build_embedding(&d).unwrap();
        let mut counts = Vec::new();
        let mut section_dims = Vec::new();
        for k in 1..=3u32 {
            counts.push(dilation_count(&body, k as i64));
            let mut total = 0usize;
            for u in p.slice_points(k) {
                total += graded_piece(&e, &line, &d, &u).unwrap().dim_al;
            }
            section_dims.push(total);
        }
        assert_eq!(counts, vec![8, 27, 64]);
        assert_eq!(section_dims, vec![8, 27, 64]);
    }

    #[test]
    fn value_maps_that_collapse_the_slab_are_rejected() {
        let d = slab_divisor();
        let p = PolarizedInput::new(d, ints(&[1, 0])).unwrap();
        let line = line_from_divisor(p.divisor());
        let psi = int_rows(&[&[0, 0], &[0, 0]]);
        let gamma = ints(&[0, 1]);
        match nok_body(&p, &line, 0, &psi, &gamma) {
            Err(ProjError::RhoNotInjective(_)) => {}
            other => panic!("expected RhoNotInjective, got {other:?}"),
        }
        match nok_body(&p, &line, 7, &psi, &gamma) {
            Err(ProjError::BoundaryIndex { index: 7, count: 3 }) => {}
            other => panic!("expected BoundaryIndex, got {other:?}"),
        }
    }

    #[test]
    fn constructor_rejects_bad_polarizations() {
        match PolarizedInput::new(pomega_divisor(), ints(&[0, 0, 2])) {
            Err(ProjError::NonPrimitiveGrading(_)) => {}
            other => panic!("expected NonPrimitiveGrading, got {other:?}"),
        }
        match PolarizedInput::new(d6_divisor(), ints(&[-1])) {
            Err(ProjError::EmptyDegreeSlice) => {}
            other => panic!("expected EmptyDegreeSlice, got {other:?}"),
        }
        let halfplane = Cone::from_rays(2, &int_rows(&[&[1, 0]]));
        let d = PolyhedralDivisor::new(
            2,
            halfplane,
            &[(rat_int(0), rat_int(1)), (rat_int(1), rat_int(0))],
            &[
                Some(vec![rvec(&[(0, 1), (0, 1)])]),
                Some(vec![rvec(&[(0, 1), (0, 1)])]),
            ],
        )
        .unwrap();
        match PolarizedInput::new(d, ints(&[1, 0])) {
            Err(ProjError::UnboundedDegreeSlice) => {}
            other => panic!("expected UnboundedDegreeSlice, got {other:?}"),
        }
    }

    #[test]
    fn fibers_of_the_rank_three_fixture() {
        let p = pomega_polarized();
        let line = line_from_divisor(p.divisor());
        let fibers = test_config_fibers(&p, &line, 6).unwrap();
        let labels: Vec<&str> = fibers.iter().map(|f| f.label.as_str()).collect();
        assert_eq!(labels, vec!["0", "interior-point", "trivial"]);
        let boundary = &fibers[0];
        assert_eq!(boundary.represents, vec!["1".to_string(), "2".to_string()]);
        assert!(fibers.iter().all(|f| f.normal));
        for f in [&fibers[0], &fibers[1]] {
            assert_eq!(f.generators.len(), 8);
            assert!(f.generators.iter().all(|g| g[0].is_one()));
            assert_eq!(f.ideal_generators.len(), 9);
            assert!(f.warnings.is_empty());
        }
        assert_eq!(fibers[2].generators.len(), 9);
        // The interior fiber has one free generator: the second semigroup
        // point over the central weight never enters a relation.
        let interior = &fibers[1];
        let free_index = interior
            .generators
            .iter()
            .position(|g| g == &ints(&[1, 0, 0, 1]))
            .expect("central generator present");
        for f in &interior.ideal_generators {
            for exps in f.terms.keys() {
                assert_eq!(exps[free_index], 0);
            }
        }
        // Every other variable does appear.
        for var in 0..interior.generators.len() {
            if var == free_index {
                continue;
            }
            assert!(interior
                .ideal_generators
                .iter()
                .any(|f| f.terms.keys().any(|e| e[var] > 0)));
        }
    }

    #[test]
    fn fibers_of_the_quadric_fixture() {
        let p = d6_polarized();
        let line = line_from_divisor(p.divisor());
        let fibers = test_config_fibers(&p, &line, 6).unwrap();
        let labels: Vec<&str> = fibers.iter().map(|f| f.label.as_str()).collect();
        assert_eq!(labels, vec!["0", "interior-point", "trivial"]);
        let boundary = &fibers[0];
        assert_eq!(boundary.generators, int_rows(&[&[2, -3], &[2, -2], &[3, -4]]));
        assert_eq!(boundary.represents, vec!["1".to_string(), "2".to_string()]);
        assert!(!boundary.normal);
        assert_eq!(boundary.ideal_generators.len(), 1);
        let rel = &boundary.ideal_generators[0];
        let exps: Vec<Vec<u32>> = rel.terms.keys().cloned().collect();
        assert_eq!(exps, vec![vec![0, 0, 2], vec![2, 1, 0]]);
        let interior = &fibers[1];
        assert_eq!(interior.generators, int_rows(&[&[2, 0], &[2, 1], &[3, 0]]));
        assert!(!interior.normal);
        let trivial = &fibers[2];
        assert!(trivial.normal);
        assert_eq!(trivial.generators.len(), 4);
        // Toric binomial plus one lifted linear relation.
        assert_eq!(trivial.ideal_generators.len(), 2);
    }

    #[test]
    fn toric_inputs_degenerate_to_themselves() {
        let d = toric_divisor();
        let p = PolarizedInput::new(d, ints(&[0, 1])).unwrap();
        let line = line_from_divisor(p.divisor());
        let fibers = test_config_fibers(&p, &line, 6).unwrap();
        assert_eq!(fibers.len(), 1);
        let f = &fibers[0];
        assert_eq!(f.label, "trivial");
        assert_eq!(
            f.represents,
            vec!["0".to_string(), "1".to_string(), "interior-point".to_string()]
        );
        assert!(f.normal);
        assert_eq!(
            f.generators,
            int_rows(&[&[1, 0, 0], &[1, 1, 0], &[1, 1, 1]])
        );
        assert!(f.ideal_generators.is_empty());
    }

    #[test]
    fn lattice_equivalence_identity_and_twists() {
        let s = int_rows(&[&[2, -3], &[2, -2], &[3, -4]]);
        assert!(lattice_equivalent(&s, &s));
        // Image under the unimodular grading-preserving map [[1,0],[3,-1]].
        let image = int_rows(&[&[2, 9], &[2, 8], &[3, 13]]);
        assert!(lattice_equivalent(&s, &image));
        assert!(lattice_equivalent(&image, &s));
        // A semigroup with a different relation lattice.
        let other = int_rows(&[&[2, -3], &[2, -2], &[3, -5]]);
        assert!(!lattice_equivalent(&s, &other));
        // Size and ambient-rank mismatches.
        assert!(!lattice_equivalent(&s, &int_rows(&[&[2, -3]])));
        assert!(!lattice_equivalent(&s, &int_rows(&[&[2, -3, 0], &[2, -2, 0], &[3, -4, 0]])));
        // Degree multisets must match.
        assert!(!lattice_equivalent(
            &int_rows(&[&[1, 0], &[2, 1]]),
            &int_rows(&[&[1, 0], &[3, 1]])
        ));
        // A free semigroup is not equivalent to one with a relation.
        let free = int_rows(&[&[2, 0], &[2, 1], &[3, 0]]);
        assert!(!lattice_equivalent(&s, &free));
    }

    /// dim of the degree-`u` piece of the degenerated line's ideal inside
    /// the ambient coordinate algebra, by explicit row reduction of the
    /// monomial multiples of its generators.
    fn ideal_dim_at(
        e: &crate::tgeom::SemiCanonicalEmbedding,
        dl: &Line,
        d: &PolyhedralDivisor,
        u: &[Int],
    ) -> usize {
        let fiber = fiber_points(d, u).unwrap().unwrap_or_default();
        if fiber.is_empty() {
            return 0;
        }
        let col_index: BTreeMap<Vec<Int>, usize> = fiber
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        let gens = ideal_generators_il(e, dl, d);
        let mut rows: Vec<RatVec> = Vec::new();
        for g in &gens {
            let shift: Vec<Int> = u.iter().zip(&g.degree).map(|(a, b)| a - b).collect();
            let Some(base_fiber) = fiber_points(d, &shift).unwrap() else {
                continue;
            };
            for v in &base_fiber {
                let mut row = vec![Rat::zero(); fiber.len()];
                for (term, coeff) in &g.terms {
                    let target: Vec<Int> = v.iter().zip(term).map(|(a, b)| a + b).collect();
                    let idx = col_index
                        .get(&target)
                        .expect("products of algebra elements stay in the algebra");
                    row[*idx] = coeff.clone();
                }
                rows.push(row);
            }
        }
        if rows.is_empty() {
            return 0;
        }
        RatMat::from_rows(rows).unwrap().rank()
    }

    #[test]
    fn fiber_slices_match_the_degenerate_lines() {
        // For each boundary configuration the semigroup's counts per weight
        // agree with the codimension of the degenerated line's ideal.
        let cases: Vec<(PolarizedInput, u32)> = vec![(d6_polarized(), 8), (pomega_polarized(), 2)];
        for (p, max_degree) in cases {
            let d = p.divisor().clone();
            let line = line_from_divisor(&d);
            let e = build_embedding(&d).unwrap();
            for j in 0..=d.m() {
                let bp = line
                    .boundary_points()
                    .iter()
                    .find(|bp| bp.vanishing.contains(&j))
                    .unwrap();
                let dl = degenerate_line(&line, &bp.ord_table).unwrap();
                for k in 1..=max_degree {
                    for u in p.slice_points(k) {
                        let expected = match region_interval(&d, Some(j), &u).unwrap() {
                            None => 0usize,
                            Some((lo, hi)) => usize::try_from(&(hi - lo + 1)).unwrap(),
                        };
                        let dim_ac = fiber_points(&d, &u).unwrap().map_or(0, |f| f.len());
                        let dim_ideal = ideal_dim_at(&e, &dl, &d, &u);
                        assert_eq!(
                            expected,
                            dim_ac - dim_ideal,
                            "degree {k}, weight {u:?}, boundary {j}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn fibers_are_finitely_graded_to_degree_four() {
        let p = pomega_polarized();
        let line = line_from_divisor(p.divisor());
        let fibers = test_config_fibers(&p, &line, 4).unwrap();
        for f in &fibers {
            for g in &f.generators {
                assert!(g[0].is_positive());
            }
            // Count elements per degree by expanding generator sums.
            let d = p.divisor();
            if f.label == "trivial" {
                continue;
            }
            let j_opt = match f.label.as_str() {
                "interior-point" => None,
                s => Some(s.parse::<usize>().unwrap()),
            };
            for k in 1..=4u32 {
                let mut count = 0usize;
                for u in p.slice_points(k) {
                    if let Some((lo, hi)) = region_interval(d, j_opt, &u).unwrap() {
                        count += usize::try_from(&(hi - lo + 1)).unwrap();
                    }
                }
                assert_eq!(count, ((k + 1) as usize).pow(3));
            }
        }
    }

    #[test]
    fn json_shapes_are_stable() {
        let d = slab_divisor();
        let p = PolarizedInput::new(d, ints(&[1, 0])).unwrap();
        let line = line_from_divisor(p.divisor());
        let (psi, gamma) = identity_rho(&p);
        let body = nok_body(&p, &line, 0, &psi, &gamma).unwrap();
        let bj = body.to_json();
        assert!(bj.get("inequalities").unwrap().is_array());
        assert!(bj.get("vertices").unwrap().is_array());
        assert!(bj.get("rho").unwrap().get("linear").unwrap().is_array());
        let fibers = test_config_fibers(&p, &line, 4).unwrap();
        let fj = fibers[0].to_json();
        for key in ["label", "represents", "generators", "ideal_generators", "normal", "warnings"] {
            assert!(fj.get(key).is_some(), "missing key {key}");
        }
    }
}
