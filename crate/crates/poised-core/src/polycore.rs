//! Cones, polyhedra, dual cones, Hilbert bases, and support functions.
//!
//! The polyhedral substrate. Cones are kept in *both* representations at all
//! times: a V-representation (extreme rays, plus a lineality basis when the
//! cone contains lines) and an H-representation (facet inequalities, with
//! equalities encoded as $\pm$ pairs when the cone is not full-dimensional).
//! Conversion runs through an exact double-description pass, and both lists
//! are canonically sorted, so structural equality of two [`Cone`] values is
//! set equality of the cones.
//!
//! Hilbert bases are computed by the classical triangulate-and-sweep recipe:
//! triangulate the cone into simplicial subcones over its extreme-ray order,
//! enumerate the lattice points of each half-open fundamental parallelepiped
//! $\{\sum_i t_i g_i : 0 \le t_i < 1\}$ by walking the finite group
//! $\mathbb{Z}^d / \mathbb{Z}^d G$ (Hermite pivots give the transversal),
//! union in the primitive ray generators, and finally delete every candidate
//! $x$ that splits as $x = c + s$ with $c$ a candidate and $s$ a nonzero
//! lattice point of the cone. For a pointed cone the surviving set is the
//! unique minimal generating set of the lattice-point semigroup.
//!
//! Polyhedra are vertex/tailcone pairs with the empty polyhedron as a
//! first-class value; their support function
//! $\Delta(u) = \min_{v \in \Delta} \langle v, u\rangle$ evaluates to $+\infty$
//! on the empty polyhedron and reports an unbounded error when $u$ pairs
//! negatively with a tailcone direction.

use crate::exactla::{
    dot_int, dot_rat, dot_rat_int, hermite_normal_form, integer_kernel, primitive,
    primitive_of_rational, rat_to_string, rational_solve, to_rat_vec, Int, Rat, RatMat, RatVec,
};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;

/// Errors from polyhedral computation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    /// An operation that needs a pointed cone received one containing a line.
    #[error("cone is not pointed (contains a line)")]
    NotPointed,
    /// A polyhedron construction produced a line (no vertices exist).
    #[error("polyhedron contains a line, so it has no vertices")]
    ContainsLine,
    /// Support function evaluated outside the dual of the tailcone.
    #[error("support function is unbounded below at this argument")]
    UnboundedBelow,
    /// Shape mismatch between operands.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Value of a support function: finite, or $+\infty$ for the empty polyhedron.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SupportValue {
    Finite(Rat),
    PlusInfinity,
}

impl SupportValue {
    /// Finite value, panicking on $+\infty$ (callers check emptiness first).
    pub fn finite(&self) -> &Rat {
        match self {
            SupportValue::Finite(r) => r,
            SupportValue::PlusInfinity => panic!("support value is +infinity"),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, SupportValue::Finite(_))
    }
}

// ---------------------------------------------------------------------------
// Double description
// ---------------------------------------------------------------------------

/// Extreme rays and lineality of $\{x : \langle h, x\rangle \ge 0 \ \forall h\}$.
///
/// Returns `(lineality, rays)`:
/// * `lineality` — a saturated HNF basis of the largest linear subspace
///   contained in the cone (equivalently $\{x : \langle h, x \rangle = 0\ \forall h\}$),
/// * `rays` — primitive generators of the extreme rays modulo lineality,
///   orthogonalized against the lineality space and sorted; together with the
///   lineality they generate the cone.
pub fn extreme_rays(ineqs: &[Vec<Int>], ambient: usize) -> (Vec<Vec<Int>>, Vec<Vec<Int>>) {
    // Start from the whole space and insert inequalities one at a time.
    let mut lineality: Vec<Vec<Int>> = (0..ambient)
        .map(|i| {
            (0..ambient)
                .map(|j| if i == j { Int::one() } else { Int::zero() })
                .collect()
        })
        .collect();
    let mut rays: Vec<Vec<Int>> = Vec::new();
    let mut processed: Vec<Vec<Int>> = Vec::new();

    for a in ineqs {
        assert_eq!(a.len(), ambient, "inequality length mismatch");
        if a.iter().all(|x| x.is_zero()) {
            continue;
        }
        let pairing: Vec<Int> = lineality.iter().map(|l| dot_int(a, l)).collect();
        if let Some(k) = pairing.iter().position(|p| !p.is_zero()) {
            // A lineality direction leaves the new halfspace: split it.
            let mut l0 = lineality.remove(k);
            let mut p0 = pairing[k].clone();
            if p0.is_negative() {
                l0 = l0.iter().map(|x| -x).collect();
                p0 = -p0;
            }
            // Push every other lineality vector and every ray into the
            // hyperplane of the new inequality; l0 survives as a ray.
            for l in lineality.iter_mut() {
                let p = dot_int(a, l);
                if !p.is_zero() {
                    let nl: Vec<Int> = l
                        .iter()
                        .zip(&l0)
                        .map(|(x, y)| x * &p0 - &p * y)
                        .collect();
                    *l = primitive(&nl);
                }
            }
            for r in rays.iter_mut() {
                let p = dot_int(a, r);
                if !p.is_zero() {
                    let nr: Vec<Int> = r
                        .iter()
                        .zip(&l0)
                        .map(|(x, y)| x * &p0 - &p * y)
                        .collect();
                    *r = primitive(&nr);
                }
            }
            rays.push(primitive(&l0));
        } else {
            // Classical double-description step within fixed lineality.
            let mut plus: Vec<usize> = Vec::new();
            let mut minus: Vec<usize> = Vec::new();
            let mut keep: Vec<Vec<Int>> = Vec::new();
            let vals: Vec<Int> = rays.iter().map(|r| dot_int(a, r)).collect();
            for (i, v) in vals.iter().enumerate() {
                if v.is_positive() {
                    plus.push(i);
                } else if v.is_negative() {
                    minus.push(i);
                }
            }
            if minus.is_empty() {
                processed.push(a.clone());
                continue;
            }
            for (i, r) in rays.iter().enumerate() {
                if !vals[i].is_negative() {
                    keep.push(r.clone());
                }
            }
            for &p in &plus {
                for &m in &minus {
                    // Positive combination lying on the new hyperplane.
                    let comb: Vec<Int> = rays[m]
                        .iter()
                        .zip(&rays[p])
                        .map(|(rm, rp)| &vals[p] * rm - &vals[m] * rp)
                        .collect();
                    let comb = primitive(&comb);
                    if comb.iter().all(|x| x.is_zero()) {
                        continue;
                    }
                    keep.push(comb);
                }
            }
            processed.push(a.clone());
            rays = prune_rays(keep, &lineality, &processed, ambient);
            continue;
        }
        processed.push(a.clone());
        rays = prune_rays(std::mem::take(&mut rays), &lineality, &processed, ambient);
    }

    // Canonicalize: saturated lineality basis straight from the constraints,
    // rays orthogonalized against the lineality, made primitive, deduped.
    let lin = if processed.is_empty() {
        lineality
    } else {
        integer_kernel(&processed)
    };
    let mut out: BTreeSet<Vec<Int>> = BTreeSet::new();
    for r in rays {
        let rp = project_off(&r, &lin);
        if rp.iter().any(|x| !x.is_zero()) {
            out.insert(rp);
        }
    }
    (lin, out.into_iter().collect())
}

/// Keep exactly the rays that are extreme for the cone cut out by
/// `processed`, given its lineality dimension: a ray is extreme iff its tight
/// constraints have rank `ambient - dim lineality - 1`.
fn prune_rays(
    rays: Vec<Vec<Int>>,
    lineality: &[Vec<Int>],
    processed: &[Vec<Int>],
    ambient: usize,
) -> Vec<Vec<Int>> {
    let ldim = lineality.len();
    if ambient < ldim + 1 {
        return Vec::new();
    }
    let target = ambient - ldim - 1;
    let mut seen: BTreeSet<Vec<Int>> = BTreeSet::new();
    let mut out = Vec::new();
    for r in rays {
        if r.iter().all(|x| x.is_zero()) {
            continue;
        }
        // Discard vectors lying in the lineality space: they generate nothing.
        if in_span(&r, lineality) {
            continue;
        }
        let tight: Vec<RatVec> = processed
            .iter()
            .filter(|h| dot_int(h, &r).is_zero())
            .map(|h| to_rat_vec(h))
            .collect();
        let rank = if tight.is_empty() {
            0
        } else {
            RatMat::from_rows(tight).expect("rectangular").rank()
        };
        if rank == target {
            let rp = primitive(&r);
            if seen.insert(rp.clone()) {
                out.push(rp);
            }
        }
    }
    out
}

/// Is `v` in the rational span of `basis` rows?
fn in_span(v: &[Int], basis: &[Vec<Int>]) -> bool {
    if v.iter().all(|x| x.is_zero()) {
        return true;
    }
    if basis.is_empty() {
        return false;
    }
    let mat = RatMat::from_rows(
        (0..v.len())
            .map(|j| basis.iter().map(|b| Rat::from_integer(b[j].clone())).collect())
            .collect(),
    )
    .expect("rectangular");
    matches!(rational_solve(&mat, &to_rat_vec(v)), Ok(Some(_)))
}

/// Component of `v` orthogonal to the span of `basis`, cleared to a primitive
/// integer vector (identity when `basis` is empty).
fn project_off(v: &[Int], basis: &[Vec<Int>]) -> Vec<Int> {
    if basis.is_empty() {
        return primitive(v);
    }
    // Solve (B Bᵀ) y = B v, then v_perp = v − Bᵀ y.
    let k = basis.len();
    let mut gram = RatMat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram.set(i, j, Rat::from_integer(dot_int(&basis[i], &basis[j])));
        }
    }
    let rhs: RatVec = basis
        .iter()
        .map(|b| Rat::from_integer(dot_int(b, v)))
        .collect();
    let y = rational_solve(&gram, &rhs)
        .expect("shape ok")
        .expect("Gram matrix of independent rows is invertible");
    let mut perp: RatVec = to_rat_vec(v);
    for (yi, b) in y.iter().zip(basis) {
        for (p, bj) in perp.iter_mut().zip(b) {
            *p -= yi * Rat::from_integer(bj.clone());
        }
    }
    primitive_of_rational(&perp)
}

// ---------------------------------------------------------------------------
// Cone
// ---------------------------------------------------------------------------

/// A rational polyhedral cone with both representations cached and canonical.
///
/// Invariants: every generator satisfies every facet inequality with $\ge 0$;
/// the generator list is irredundant (each generator spans an extreme ray
/// when the cone is pointed; otherwise it is the extreme rays modulo
/// lineality together with a $\pm$ lineality basis); facet rows are
/// irredundant, with equalities stored as $\pm$ pairs. Both lists are sorted,
/// so equal cones compare equal structurally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cone {
    ambient_rank: usize,
    generators: Vec<Vec<Int>>,
    facets: Vec<Vec<Int>>,
    lineality: Vec<Vec<Int>>,
    rays: Vec<Vec<Int>>,
}

impl Cone {
    /// Cone generated by arbitrary integer vectors (redundancy welcome).
    pub fn from_rays(ambient_rank: usize, gens: &[Vec<Int>]) -> Cone {
        for g in gens {
            assert_eq!(g.len(), ambient_rank, "generator length mismatch");
        }
        // Dual description: inequalities of the cone = generators of the dual.
        let (dual_lin, dual_rays) = extreme_rays(gens, ambient_rank);
        let facets = assemble_generators(&dual_lin, &dual_rays);
        // Round trip for canonical rays and lineality.
        let (lin, rays) = extreme_rays(&facets, ambient_rank);
        let generators = assemble_generators(&lin, &rays);
        Cone {
            ambient_rank,
            generators,
            facets,
            lineality: lin,
            rays,
        }
    }

    /// Cone $\{x : \langle h, x \rangle \ge 0\ \forall h\}$.
    pub fn from_inequalities(ambient_rank: usize, ineqs: &[Vec<Int>]) -> Cone {
        for h in ineqs {
            assert_eq!(h.len(), ambient_rank, "inequality length mismatch");
        }
        let (lin, rays) = extreme_rays(ineqs, ambient_rank);
        let generators = assemble_generators(&lin, &rays);
        // Canonicalize the facet system through the V-representation.
        let (dual_lin, dual_rays) = extreme_rays(&generators, ambient_rank);
        let facets = assemble_generators(&dual_lin, &dual_rays);
        Cone {
            ambient_rank,
            generators,
            facets,
            lineality: lin,
            rays,
        }
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    /// Canonical generator list (extreme rays; plus $\pm$ lineality basis when
    /// the cone contains lines).
    pub fn generators(&self) -> &[Vec<Int>] {
        &self.generators
    }

    /// Canonical irredundant inequality list ($\pm$ pairs encode equalities).
    pub fn facets(&self) -> &[Vec<Int>] {
        &self.facets
    }

    /// Extreme rays modulo lineality (canonical representatives).
    pub fn rays(&self) -> &[Vec<Int>] {
        &self.rays
    }

    /// Saturated basis of the lineality space (empty iff pointed).
    pub fn lineality(&self) -> &[Vec<Int>] {
        &self.lineality
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    /// Dimension of the cone (rank of its span).
    pub fn dim(&self) -> usize {
        if self.generators.is_empty() {
            return 0;
        }
        RatMat::from_int_rows(&self.generators)
            .expect("rectangular")
            .rank()
    }

    /// Exact membership for integer points.
    pub fn contains(&self, x: &[Int]) -> bool {
        assert_eq!(x.len(), self.ambient_rank, "point length mismatch");
        self.facets.iter().all(|f| !dot_int(f, x).is_negative())
    }

    /// Exact membership for rational points.
    pub fn contains_rat(&self, x: &[Rat]) -> bool {
        assert_eq!(x.len(), self.ambient_rank, "point length mismatch");
        self.facets
            .iter()
            .all(|f| !dot_rat_int(x, f).is_negative())
    }

    /// Structural sanity check: every generator satisfies every facet.
    pub fn check_invariants(&self) -> Result<(), &'static str> {
        for g in &self.generators {
            for f in &self.facets {
                if dot_int(f, g).is_negative() {
                    return Err("generator violates facet inequality");
                }
            }
        }
        if !self.generators.windows(2).all(|w| w[0] < w[1]) {
            return Err("generators not sorted");
        }
        if !self.facets.windows(2).all(|w| w[0] < w[1]) {
            return Err("facets not sorted");
        }
        Ok(())
    }

    /// JSON form `{"rays": [...], "facets": [...]}` with string integers.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rays": int_rows_json(&self.generators),
            "facets": int_rows_json(&self.facets),
        })
    }
}

fn assemble_generators(lineality: &[Vec<Int>], rays: &[Vec<Int>]) -> Vec<Vec<Int>> {
    let mut out: BTreeSet<Vec<Int>> = rays.iter().cloned().collect();
    for l in lineality {
        out.insert(primitive(l));
        out.insert(primitive(&l.iter().map(|x| -x).collect::<Vec<Int>>()));
    }
    out.into_iter().collect()
}

/// Integer rows rendered as arrays of decimal strings (JSON payloads carry
/// all numerics as strings).
pub fn int_rows_json(rows: &[Vec<Int>]) -> serde_json::Value {
    serde_json::Value::Array(
        rows.iter()
            .map(|r| {
                serde_json::Value::Array(
                    r.iter()
                        .map(|x| serde_json::Value::String(x.to_string()))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Dual cone $\{u : \langle u, g\rangle \ge 0\ \forall g \in c\}$, with both
/// representations populated, generators primitive and sorted.
pub fn dual_cone(c: &Cone) -> Cone {
    Cone::from_inequalities(c.ambient_rank(), c.generators())
}

// ---------------------------------------------------------------------------
// Hilbert bases
// ---------------------------------------------------------------------------

/// Hilbert basis of a pointed cone: the unique minimal generating set of its
/// semigroup of lattice points, sorted lexicographically.
pub fn hilbert_basis(c: &Cone) -> Result<Vec<Vec<Int>>, PolyError> {
    if !c.is_pointed() {
        return Err(PolyError::NotPointed);
    }
    let rays = c.rays();
    if rays.is_empty() {
        return Ok(Vec::new());
    }
    let mut candidates: BTreeSet<Vec<Int>> = rays.iter().cloned().collect();
    for simplex in triangulate(rays) {
        let gens: Vec<Vec<Int>> = simplex.iter().map(|&i| rays[i].clone()).collect();
        for p in parallelepiped_points(&gens) {
            if p.iter().any(|x| !x.is_zero()) {
                candidates.insert(p);
            }
        }
    }
    // Minimality sweep: x is reducible iff x = c + s with c a candidate and s
    // a nonzero lattice point of the cone. Candidates generate the semigroup,
    // so this single pass leaves exactly the Hilbert basis.
    let cand_vec: Vec<Vec<Int>> = candidates.iter().cloned().collect();
    let mut basis = Vec::new();
    'outer: for x in &cand_vec {
        for cnd in &cand_vec {
            let diff: Vec<Int> = x.iter().zip(cnd).map(|(a, b)| a - b).collect();
            if diff.iter().all(|d| d.is_zero()) {
                continue;
            }
            if c.contains(&diff) {
                continue 'outer;
            }
        }
        basis.push(x.clone());
    }
    Ok(basis)
}

/// Triangulation of `cone(rays)` into simplicial subcones, returned as lists
/// of ray indices. Pulling recursion: cone off the first ray over the facets
/// not containing it.
fn triangulate(rays: &[Vec<Int>]) -> Vec<Vec<usize>> {
    let idx: Vec<usize> = (0..rays.len()).collect();
    triangulate_rec(rays, &idx)
}

fn triangulate_rec(all: &[Vec<Int>], live: &[usize]) -> Vec<Vec<usize>> {
    let mat: Vec<Vec<Int>> = live.iter().map(|&i| all[i].clone()).collect();
    let d = RatMat::from_int_rows(&mat).expect("rectangular").rank();
    if live.len() == d {
        return vec![live.to_vec()];
    }
    // Facets of the subcone: supporting hyperplanes from the dual rays whose
    // tight sets have rank d−1.
    let ambient = all[0].len();
    let (_, dual_rays) = extreme_rays(&mat, ambient);
    let apex = live[0];
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut out = Vec::new();
    for h in &dual_rays {
        if dot_int(h, &all[apex]).is_zero() {
            continue; // facet contains the apex
        }
        let tight: Vec<usize> = live
            .iter()
            .copied()
            .filter(|&i| dot_int(h, &all[i]).is_zero())
            .collect();
        if tight.is_empty() {
            continue;
        }
        let tmat: Vec<Vec<Int>> = tight.iter().map(|&i| all[i].clone()).collect();
        if RatMat::from_int_rows(&tmat).expect("rectangular").rank() != d - 1 {
            continue;
        }
        if !seen.insert(tight.clone()) {
            continue;
        }
        for mut simplex in triangulate_rec(all, &tight) {
            simplex.push(apex);
            simplex.sort_unstable();
            out.push(simplex);
        }
    }
    out
}

/// Lattice points of the half-open parallelepiped
/// $\{\sum_i t_i g_i : 0 \le t_i < 1\}$ spanned by linearly independent
/// integer vectors, via the finite group $\mathbb{Z}^d / \mathbb{Z}^d C$.
fn parallelepiped_points(gens: &[Vec<Int>]) -> Vec<Vec<Int>> {
    let d = gens.len();
    let n = gens[0].len();
    // Saturated basis B of span(gens) ∩ Z^n.
    let b: Vec<Vec<Int>> = if d == n {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Int::one() } else { Int::zero() })
                    .collect()
            })
            .collect()
    } else {
        let ns = RatMat::from_int_rows(gens).expect("rectangular").nullspace();
        let ns_int: Vec<Vec<Int>> = ns.iter().map(|v| primitive_of_rational(v)).collect();
        integer_kernel(&ns_int)
    };
    assert_eq!(b.len(), d, "saturated basis rank mismatch");
    // Coordinates of each generator in the basis B: solve Bᵀ c = g.
    let bt = RatMat::from_rows(
        (0..n)
            .map(|j| b.iter().map(|row| Rat::from_integer(row[j].clone())).collect())
            .collect(),
    )
    .expect("rectangular");
    let mut cmat: Vec<Vec<Int>> = Vec::with_capacity(d);
    for g in gens {
        let sol = rational_solve(&bt, &to_rat_vec(g))
            .expect("shape ok")
            .expect("generator lies in its own span");
        let row: Vec<Int> = sol
            .iter()
            .map(|x| {
                assert!(x.denom().is_one(), "saturation guarantees integrality");
                x.numer().clone()
            })
            .collect();
        cmat.push(row);
    }
    // Transversal of Z^d / Z^d·C from the Hermite pivots of C.
    let (h, _) = hermite_normal_form(&cmat);
    let pivots: Vec<Int> = (0..d).map(|i| h[i][i].clone()).collect();
    assert!(
        pivots.iter().all(|p| p.is_positive()),
        "parallelepiped generators must be independent"
    );
    // Solve tᵀ C = r for each representative r, then reduce t into [0,1)^d
    // and map back: y = r − floor(t)·C lies in the half-open parallelepiped.
    let ct = RatMat::from_rows(
        (0..d)
            .map(|j| cmat.iter().map(|row| Rat::from_integer(row[j].clone())).collect())
            .collect(),
    )
    .expect("rectangular");
    let mut points = Vec::new();
    let mut rep = vec![Int::zero(); d];
    loop {
        let t = rational_solve(&ct, &to_rat_vec(&rep))
            .expect("shape ok")
            .expect("C is invertible");
        let mut y = rep.clone();
        for (i, ti) in t.iter().enumerate() {
            let f = ti.floor().to_integer();
            if !f.is_zero() {
                for j in 0..d {
                    y[j] -= &f * &cmat[i][j];
                }
            }
        }
        // Map back to ambient coordinates: x = y·B.
        let x: Vec<Int> = (0..n)
            .map(|j| (0..d).map(|i| &y[i] * &b[i][j]).sum())
            .collect();
        points.push(x);
        // Advance the mixed-radix counter over the pivot boxes.
        let mut i = 0;
        loop {
            if i == d {
                return points;
            }
            rep[i] += 1;
            if rep[i] < pivots[i] {
                break;
            }
            rep[i] = Int::zero();
            i += 1;
        }
    }
}

/// Generating set of the lattice-point semigroup of an arbitrary rational
/// cone: the Hilbert basis when pointed; otherwise a $\pm$ basis of the
/// lineality lattice together with lifted Hilbert-basis elements of the
/// pointed quotient.
pub fn lattice_generators(c: &Cone) -> Vec<Vec<Int>> {
    if c.is_pointed() {
        return hilbert_basis(c).expect("pointed by branch");
    }
    let d = c.ambient_rank();
    let lin = c.lineality().to_vec();
    let l = lin.len();
    // Unimodular V with lin·V = [T | 0]: from the HNF of linᵀ.
    let lin_t: Vec<Vec<Int>> = (0..d).map(|j| lin.iter().map(|r| r[j].clone()).collect()).collect();
    let (_, u2) = hermite_normal_form(&lin_t);
    // V = u2ᵀ.
    let v: Vec<Vec<Int>> = (0..d).map(|i| (0..d).map(|j| u2[j][i].clone()).collect()).collect();
    let v_inv = int_matrix_inverse(&v);
    // Quotient cone: last d−l coordinates of ray·V.
    let q = d - l;
    let proj_rays: Vec<Vec<Int>> = c
        .rays()
        .iter()
        .map(|r| {
            let rv = row_times_matrix(r, &v);
            rv[l..].to_vec()
        })
        .collect();
    let qcone = Cone::from_rays(q, &proj_rays);
    let qbasis = hilbert_basis(&qcone).expect("quotient by lineality is pointed");
    let mut out: BTreeSet<Vec<Int>> = BTreeSet::new();
    for b in &lin {
        out.insert(b.clone());
        out.insert(b.iter().map(|x| -x).collect());
    }
    for h in qbasis {
        let mut y = vec![Int::zero(); d];
        y[l..].clone_from_slice(&h);
        out.insert(row_times_matrix(&y, &v_inv));
    }
    out.into_iter().collect()
}

fn row_times_matrix(row: &[Int], m: &[Vec<Int>]) -> Vec<Int> {
    let cols = m[0].len();
    (0..cols)
        .map(|j| row.iter().zip(m).map(|(r, mr)| r * &mr[j]).sum())
        .collect()
}

/// Inverse of a unimodular integer matrix (integer entries by unimodularity).
fn int_matrix_inverse(m: &[Vec<Int>]) -> Vec<Vec<Int>> {
    let n = m.len();
    let mat = RatMat::from_int_rows(m).expect("rectangular");
    let mut inv = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = vec![Rat::zero(); n];
        e[i] = Rat::one();
        // Column i of the inverse: solve M x = e_i; assemble as rows of Mᵀ⁻¹
        // then transpose at the end.
        let x = rational_solve(&mat, &e)
            .expect("shape ok")
            .expect("unimodular matrix is invertible");
        inv.push(x);
    }
    // inv currently holds columns of M⁻¹ as rows; transpose and check integrality.
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = &inv[j][i];
                    assert!(v.denom().is_one(), "unimodular inverse must be integral");
                    v.numer().clone()
                })
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Polyhedra and support functions
// ---------------------------------------------------------------------------

/// An affine inequality $\langle a, x\rangle + c \ge 0$ with integer data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffIneq {
    pub coeffs: Vec<Int>,
    pub constant: Int,
}

impl AffIneq {
    pub fn new(coeffs: Vec<Int>, constant: Int) -> Self {
        AffIneq { coeffs, constant }
    }

    pub fn eval_rat(&self, x: &[Rat]) -> Rat {
        dot_rat_int(x, &self.coeffs) + Rat::from_integer(self.constant.clone())
    }

    pub fn eval_int(&self, x: &[Int]) -> Int {
        dot_int(&self.coeffs, x) + &self.constant
    }
}

/// A rational polyhedron: vertices plus a pointed tailcone, or the empty
/// polyhedron as a first-class value. An H-representation is kept alongside.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polyhedron {
    ambient_rank: usize,
    empty: bool,
    vertices: Vec<RatVec>,
    tailcone: Cone,
    ineqs: Vec<AffIneq>,
}

impl Polyhedron {
    /// The empty polyhedron with a recorded tailcone (the recession cone of
    /// whatever inequality system produced it).
    pub fn empty(ambient_rank: usize, tailcone: Cone) -> Self {
        Polyhedron {
            ambient_rank,
            empty: true,
            vertices: Vec::new(),
            tailcone,
            // An unsatisfiable witness row keeps the H-representation honest.
            ineqs: vec![AffIneq::new(vec![Int::zero(); ambient_rank], Int::from(-1))],
        }
    }

    /// Polyhedron from vertices and a pointed tailcone; the canonical vertex
    /// list (redundant inputs removed) and an H-representation are computed.
    pub fn from_vertices(
        ambient_rank: usize,
        vertices: &[RatVec],
        tailcone: &Cone,
    ) -> Result<Self, PolyError> {
        if vertices.is_empty() {
            return Ok(Self::empty(ambient_rank, tailcone.clone()));
        }
        if !tailcone.is_pointed() {
            return Err(PolyError::ContainsLine);
        }
        let mut lifted: Vec<Vec<Int>> = Vec::new();
        for v in vertices {
            if v.len() != ambient_rank {
                return Err(PolyError::DimensionMismatch("vertex length".into()));
            }
            let mut w = v.clone();
            w.push(Rat::one());
            lifted.push(primitive_of_rational(&w));
        }
        for r in tailcone.rays() {
            let mut w = r.clone();
            w.push(Int::zero());
            lifted.push(w);
        }
        let cone = Cone::from_rays(ambient_rank + 1, &lifted);
        Self::from_lifted_cone(ambient_rank, cone)
    }

    /// Polyhedron $\{x : \langle a, x \rangle + c \ge 0\}$ from affine rows.
    pub fn from_h_rep(ambient_rank: usize, ineqs: &[AffIneq]) -> Result<Self, PolyError> {
        let mut rows: Vec<Vec<Int>> = Vec::new();
        for iq in ineqs {
            if iq.coeffs.len() != ambient_rank {
                return Err(PolyError::DimensionMismatch("inequality length".into()));
            }
            let mut r = iq.coeffs.clone();
            r.push(iq.constant.clone());
            rows.push(r);
        }
        // Homogenizing coordinate is nonnegative.
        let mut t_row = vec![Int::zero(); ambient_rank];
        t_row.push(Int::one());
        rows.push(t_row);
        let cone = Cone::from_inequalities(ambient_rank + 1, &rows);
        Self::from_lifted_cone(ambient_rank, cone)
    }

    fn from_lifted_cone(ambient_rank: usize, cone: Cone) -> Result<Self, PolyError> {
        let mut vertices: Vec<RatVec> = Vec::new();
        let mut tail_rays: Vec<Vec<Int>> = Vec::new();
        for r in cone.rays() {
            let t = &r[ambient_rank];
            if t.is_zero() {
                tail_rays.push(r[..ambient_rank].to_vec());
            } else {
                let td = Rat::from_integer(t.clone());
                vertices.push(
                    r[..ambient_rank]
                        .iter()
                        .map(|x| Rat::from_integer(x.clone()) / &td)
                        .collect(),
                );
            }
        }
        if vertices.is_empty() {
            // Infeasible system: the recession cone may still contain lines
            // (unconstrained coordinates), so fold the lineality in.
            for l in cone.lineality() {
                tail_rays.push(l[..ambient_rank].to_vec());
                tail_rays.push(l[..ambient_rank].iter().map(|x| -x).collect());
            }
            return Ok(Self::empty(
                ambient_rank,
                Cone::from_rays(ambient_rank, &tail_rays),
            ));
        }
        if !cone.lineality().is_empty() {
            return Err(PolyError::ContainsLine);
        }
        let tailcone = Cone::from_rays(ambient_rank, &tail_rays);
        vertices.sort();
        // Affine inequality rows from the lifted facets, dropping rows with a
        // zero linear part (they say only "const ≥ 0").
        let mut ineqs = Vec::new();
        for f in cone.facets() {
            let coeffs = f[..ambient_rank].to_vec();
            if coeffs.iter().all(|x| x.is_zero()) {
                continue;
            }
            ineqs.push(AffIneq::new(coeffs, f[ambient_rank].clone()));
        }
        Ok(Polyhedron {
            ambient_rank,
            empty: false,
            vertices,
            tailcone,
            ineqs,
        })
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn vertices(&self) -> &[RatVec] {
        &self.vertices
    }

    pub fn tailcone(&self) -> &Cone {
        &self.tailcone
    }

    pub fn ineqs(&self) -> &[AffIneq] {
        &self.ineqs
    }

    pub fn contains_rat(&self, x: &[Rat]) -> bool {
        !self.empty && self.ineqs.iter().all(|iq| !iq.eval_rat(x).is_negative())
    }

    pub fn contains_int(&self, x: &[Int]) -> bool {
        !self.empty && self.ineqs.iter().all(|iq| !iq.eval_int(x).is_negative())
    }

    /// Structural sanity: vertices are irredundant and inside the system.
    pub fn check_invariants(&self) -> Result<(), &'static str> {
        if self.empty {
            return if self.vertices.is_empty() {
                Ok(())
            } else {
                Err("empty polyhedron with vertices")
            };
        }
        if self.vertices.is_empty() {
            return Err("nonempty polyhedron without vertices");
        }
        for v in &self.vertices {
            if !self.contains_rat(v) {
                return Err("vertex violates inequality system");
            }
        }
        Ok(())
    }

    /// JSON form `{"empty": bool, "vertices": [...], "tailcone": {...}}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "empty": self.empty,
            "vertices": serde_json::Value::Array(
                self.vertices
                    .iter()
                    .map(|v| serde_json::Value::Array(
                        v.iter().map(|x| serde_json::Value::String(rat_to_string(x))).collect()
                    ))
                    .collect(),
            ),
            "tailcone": self.tailcone.to_json(),
        })
    }
}

/// Support function $\Delta(u) = \min_{v \in \Delta}\langle v, u\rangle$:
/// $+\infty$ on the empty polyhedron, an unbounded-below error when $u$ pairs
/// negatively with a tailcone direction, otherwise the minimum over vertices.
pub fn support_value(p: &Polyhedron, u: &[Rat]) -> Result<SupportValue, PolyError> {
    if u.len() != p.ambient_rank() {
        return Err(PolyError::DimensionMismatch("argument length".into()));
    }
    if p.is_empty() {
        return Ok(SupportValue::PlusInfinity);
    }
    for g in p.tailcone().generators() {
        if dot_rat_int(u, g).is_negative() {
            return Err(PolyError::UnboundedBelow);
        }
    }
    let m = p
        .vertices()
        .iter()
        .map(|v| dot_rat(v, u))
        .min()
        .expect("nonempty polyhedron has vertices");
    Ok(SupportValue::Finite(m))
}

/// Generating set of the lattice points of `p` as a module over the
/// lattice-point semigroup of `c_dual` (the recession cone of `p`'s
/// inequality system): Hilbert-basis elements of the cone over $p \times 1$
/// at height one.
pub fn module_generators(p: &Polyhedron, c_dual: &Cone) -> Result<Vec<Vec<Int>>, PolyError> {
    if p.is_empty() {
        return Ok(Vec::new());
    }
    let d = p.ambient_rank();
    debug_assert_eq!(
        p.tailcone(),
        c_dual,
        "module_generators: tailcone must match the ambient semigroup cone"
    );
    let mut lifted: Vec<Vec<Int>> = Vec::new();
    for v in p.vertices() {
        let mut w = v.clone();
        w.push(Rat::one());
        lifted.push(primitive_of_rational(&w));
    }
    for r in c_dual.rays() {
        let mut w = r.clone();
        w.push(Int::zero());
        lifted.push(w);
    }
    let cone = Cone::from_rays(d + 1, &lifted);
    let basis = hilbert_basis(&cone)?;
    Ok(basis
        .into_iter()
        .filter(|h| h[d].is_one())
        .map(|h| h[..d].to_vec())
        .collect())
}
