//! Tropicalization and well-poisedness: the tropical line of a parametrized
//! line, its image fan under the embedding pairing, initial forms (min
//! convention), degenerated lines $L_w$, iterated initial ideals, and the
//! operational well-poisedness verdict.
//!
//! The tropicalization of the embedded variety is the image of
//! $N_\mathbb{R} \times \mathrm{trop}(L^\circ)$ under the injective linear
//! map $\varphi(v) = (\langle v, H_k\rangle)_k$. For an interior weight $w$
//! of each maximal cone, the initial forms of the defining generators are
//! compared — by exact bounded-degree ideal membership in both directions —
//! against the independently recomputed ideal of the degenerate line $L_w$.
//! Agreement on every cone is the well-poisedness verdict.
//!
//! Throughout, **min convention**: the initial form of $f$ at $w$ keeps the
//! terms with $\alpha\cdot w$ minimal. Max-convention tools differ by the
//! sign of $w$.

use crate::exactla::{dot_int, primitive_of_rational, Int, Rat, RatMat};
use crate::idealkit::{
    ideal_generators_il, ideal_membership, ideal_presentation, lift_to_polynomial,
    monomials_up_to, IdealError, XPolynomial,
};
use crate::tgeom::{Line, PolyhedralDivisor, SemiCanonicalEmbedding, TGeomError};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Errors from tropical computation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TropError {
    /// The initial ideal of the line contains a monomial: the weight is not
    /// on the tropical line, so no degenerate line exists.
    #[error("initial ideal contains a monomial ({0}): the weight is not on the tropical line")]
    MonomialInitial(String),
    /// The initial linear forms do not cut out a line.
    #[error("initial forms cut out a subspace of dimension {0}, not a line")]
    DegenerateSolution(usize),
    /// A homogeneous coordinate vanishes identically on the degenerate line.
    #[error("coordinate {0} vanishes identically on the degenerate line")]
    ZeroCoordinate(usize),
    /// Operand shapes disagree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// The requested degree bound cannot certify anything.
    #[error("degree bound {got} is too small: need at least {required} (max generator degree + 2)")]
    BoundTooSmall { required: u32, got: u32 },
    /// An upstream pipeline stage failed.
    #[error("pipeline error: {0}")]
    Pipeline(String),
}

impl From<TGeomError> for TropError {
    fn from(e: TGeomError) -> Self {
        TropError::Pipeline(e.to_string())
    }
}

impl From<IdealError> for TropError {
    fn from(e: IdealError) -> Self {
        TropError::Pipeline(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Tropical line and fan
// ---------------------------------------------------------------------------

/// The tropicalization of the line's torus part: one ray per boundary point,
/// in the direction of that point's order table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TropicalLine {
    /// Primitive integer ray directions, one per boundary point, in
    /// boundary order.
    pub rays: Vec<Vec<Int>>,
    /// How many of the defining forms vanish at each boundary point.
    pub multiplicities: Vec<usize>,
}

impl TropicalLine {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rays": int_rows(&self.rays),
            "multiplicities": self.multiplicities,
        })
    }
}

/// The tropicalization of the embedded variety: a fan of maximal cones, one
/// per tropical-line ray, sharing a common lineality space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TropicalFan {
    pub ambient: usize,
    /// Images under the embedding pairing of a lattice basis.
    pub lineality: Vec<Vec<Int>>,
    /// For each tropical-line ray: its image, then the lineality generators.
    pub maximal_cones: Vec<Vec<Vec<Int>>>,
}

impl TropicalFan {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "ambient": self.ambient,
            "lineality": int_rows(&self.lineality),
            "maximal_cones": serde_json::Value::Array(
                self.maximal_cones.iter().map(|c| int_rows(c)).collect()
            ),
        })
    }
}

/// A rectangular rational weight matrix whose rows are applied in order by
/// [`iterated_initial`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightMatrix {
    pub rows: Vec<Vec<Rat>>,
}

impl WeightMatrix {
    pub fn new(rows: Vec<Vec<Rat>>) -> Result<Self, TropError> {
        if let Some(first) = rows.first() {
            let n = first.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(TropError::DimensionMismatch(
                    "weight matrix rows have unequal lengths".into(),
                ));
            }
        }
        Ok(WeightMatrix { rows })
    }
}

fn int_rows(rows: &[Vec<Int>]) -> serde_json::Value {
    serde_json::Value::Array(
        rows.iter()
            .map(|r| {
                serde_json::Value::Array(
                    r.iter()
                        .map(|x| serde_json::json!(i64::try_from(x).expect("fits i64")))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// The tropical line of a parametrized line: ray directions are the order
/// tables of the boundary points (already primitive: entries lie in
/// $\{-1,0,1\}$), with the count of vanishing forms recorded per ray. The
/// balancing identity $\sum_Q \mathrm{ord}_Q = 0$ is asserted.
pub fn trop_line(line: &Line) -> TropicalLine {
    let m = line.ambient();
    let mut rays = Vec::new();
    let mut multiplicities = Vec::new();
    for q in line.boundary_points() {
        rays.push(q.ord_table.clone());
        multiplicities.push(q.vanishing.len());
    }
    let mut sum = vec![Int::zero(); m];
    for r in &rays {
        for (s, x) in sum.iter_mut().zip(r) {
            *s += x;
        }
    }
    assert!(
        sum.iter().all(|x| x.is_zero()),
        "tropical line rays must balance to zero"
    );
    TropicalLine {
        rays,
        multiplicities,
    }
}

/// The embedding pairing $\varphi(v) = (\langle v, H_k\rangle)_{k}$ sending
/// a cocharacter of the big torus to a weight on the variables.
pub fn phi(e: &SemiCanonicalEmbedding, v: &[Int]) -> Vec<Int> {
    assert_eq!(
        v.len(),
        e.lattice_rank + e.m,
        "cocharacter length must match the embedding lattice"
    );
    e.hilbert.iter().map(|h| dot_int(v, h)).collect()
}

/// The tropicalization of the embedded variety: lineality is the image of a
/// lattice basis of $N$, and each tropical-line ray $\rho$ spans a maximal
/// cone together with the lineality.
pub fn trop_x(e: &SemiCanonicalEmbedding, line: &Line) -> TropicalFan {
    let r = e.lattice_rank;
    let m = e.m;
    assert_eq!(line.ambient(), m, "line/embedding shape mismatch");
    let lineality: Vec<Vec<Int>> = (0..r)
        .map(|j| {
            let mut v = vec![Int::zero(); r + m];
            v[j] = Int::one();
            phi(e, &v)
        })
        .collect();
    let tl = trop_line(line);
    let maximal_cones: Vec<Vec<Vec<Int>>> = tl
        .rays
        .iter()
        .map(|rho| {
            let mut v = vec![Int::zero(); r];
            v.extend(rho.iter().cloned());
            let mut cone = vec![phi(e, &v)];
            cone.extend(lineality.iter().cloned());
            cone
        })
        .collect();
    TropicalFan {
        ambient: e.n(),
        lineality,
        maximal_cones,
    }
}

// ---------------------------------------------------------------------------
// Initial forms
// ---------------------------------------------------------------------------

/// The initial form of `f` at weight `w` (min convention): the sum of the
/// terms whose exponent pairs minimally with `w`.
pub fn initial_form(f: &XPolynomial, w: &[Rat]) -> XPolynomial {
    if f.is_zero() {
        return XPolynomial::zero();
    }
    assert_eq!(
        f.num_vars(),
        Some(w.len()),
        "weight length must match the variable count"
    );
    let weight_of = |e: &[u32]| -> Rat {
        e.iter()
            .zip(w)
            .map(|(&a, wk)| wk * Rat::from_integer(Int::from(a)))
            .fold(Rat::zero(), |acc, x| acc + x)
    };
    let min = f
        .terms
        .keys()
        .map(|e| weight_of(e))
        .min()
        .expect("nonzero");
    XPolynomial::from_terms(
        f.terms
            .iter()
            .filter(|(e, _)| weight_of(e) == min)
            .map(|(e, c)| (e.clone(), c.clone())),
    )
}

/// Integer weights as rationals, for [`initial_form`].
pub fn rat_weights(w: &[Int]) -> Vec<Rat> {
    w.iter().map(|x| Rat::from_integer(x.clone())).collect()
}

/// Apply the rows of `w` in order to the generator set, taking initial forms
/// row by row. Returns the final generators and a flag that is set when any
/// generator became a monomial at any stage (evidence that some row left the
/// tropicalization). Intermediate generating sets are *not* re-saturated:
/// rows are assumed to satisfy the lineality condition of the iterated
/// construction, as they do for weight matrices built from homogeneous
/// valuations.
pub fn iterated_initial(
    gens: &[XPolynomial],
    w: &WeightMatrix,
) -> (Vec<XPolynomial>, bool) {
    let mut current: Vec<XPolynomial> = gens.to_vec();
    let mut monomial_seen = false;
    for row in &w.rows {
        current = current.iter().map(|g| initial_form(g, row)).collect();
        if current
            .iter()
            .any(|g| g.terms.len() == 1)
        {
            monomial_seen = true;
        }
    }
    (current, monomial_seen)
}

// ---------------------------------------------------------------------------
// Degenerate lines
// ---------------------------------------------------------------------------

/// The degenerate line $L_w$: the line cut out by the initial forms, at the
/// $\mathbb{Z}^m$ part of `v`, of the linear forms vanishing on `line`. The
/// result is reparametrized from a canonical basis of the initial solution
/// plane.
///
/// Errors when some initial form is a monomial (the weight is off the
/// tropical line), when the initial forms fail to cut out a plane, or when
/// a homogeneous coordinate vanishes identically on it.
pub fn degenerate_line(line: &Line, v: &[Int]) -> Result<Line, TropError> {
    let m = line.ambient();
    if v.len() < m {
        return Err(TropError::DimensionMismatch(format!(
            "cocharacter has {} entries, need at least the {} torus coordinates",
            v.len(),
            m
        )));
    }
    let w = &v[v.len() - m..];
    let gl = crate::idealkit::line_linear_forms(line);
    // Initial form of c_0 + sum_i c_i z_i: the constant term carries weight
    // 0, the z_i term weight w_i; keep the minimizers.
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for g in &gl {
        let mut best: Option<Int> = None;
        for (i, c) in g.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let wt = if i == 0 { Int::zero() } else { w[i - 1].clone() };
            if best.as_ref().map_or(true, |b| &wt < b) {
                best = Some(wt);
            }
        }
        let best = best.expect("linear forms are nonzero");
        let init: Vec<Rat> = g
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let wt = if i == 0 { Int::zero() } else { w[i - 1].clone() };
                if !c.is_zero() && wt == best {
                    Rat::from_integer(c.clone())
                } else {
                    Rat::zero()
                }
            })
            .collect();
        if init.iter().filter(|c| !c.is_zero()).count() == 1 {
            let idx = init.iter().position(|c| !c.is_zero()).expect("one term");
            let name = if idx == 0 {
                "1".to_string()
            } else {
                format!("z{idx}")
            };
            return Err(TropError::MonomialInitial(name));
        }
        rows.push(init);
    }
    // Solve for the plane the initial forms cut out.
    let basis: Vec<Vec<Int>> = if rows.is_empty() {
        // No linear relations (m = 1): the full coordinate plane.
        (0..=m)
            .map(|j| {
                let mut b = vec![Int::zero(); m + 1];
                b[j] = Int::one();
                b
            })
            .collect()
    } else {
        RatMat::from_rows(rows)
            .expect("rectangular")
            .nullspace()
            .iter()
            .map(|b| primitive_of_rational(b))
            .collect()
    };
    if basis.len() != 2 {
        return Err(TropError::DegenerateSolution(basis.len()));
    }
    let forms: Vec<(Rat, Rat)> = (0..=m)
        .map(|j| {
            (
                Rat::from_integer(basis[0][j].clone()),
                Rat::from_integer(basis[1][j].clone()),
            )
        })
        .collect();
    if let Some(j) = forms
        .iter()
        .position(|(a, b)| a.is_zero() && b.is_zero())
    {
        return Err(TropError::ZeroCoordinate(j));
    }
    Line::from_forms(&forms).map_err(TropError::from)
}

// ---------------------------------------------------------------------------
// Well-poisedness
// ---------------------------------------------------------------------------

/// One maximal cone's verification record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeReport {
    /// Tropical-line ray defining the cone.
    pub ray: Vec<Int>,
    /// Interior weight used: the image of the ray with zero lineality part.
    pub weight: Vec<Int>,
    /// Initial forms of the defining generators at that weight.
    pub initial_gens: Vec<XPolynomial>,
    /// Independently recomputed generators for the degenerate line.
    pub expected_gens: Vec<XPolynomial>,
    /// Whether the two ideals agree to the degree bound.
    pub matches: bool,
    /// A human-readable reason when they do not.
    pub witness: Option<String>,
}

/// The full well-poisedness report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WellPoisedReport {
    pub cones: Vec<ConeReport>,
    pub well_poised: bool,
    pub degree_bound: u32,
}

impl WellPoisedReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "cones": serde_json::Value::Array(
                self.cones.iter().map(|c| serde_json::json!({
                    "ray": c.ray.iter().map(|x| i64::try_from(x).expect("fits")).collect::<Vec<i64>>(),
                    "weight": c.weight.iter().map(|x| i64::try_from(x).expect("fits")).collect::<Vec<i64>>(),
                    "initial_gens": c.initial_gens.iter().map(|g| g.to_string()).collect::<Vec<String>>(),
                    "expected_gens": c.expected_gens.iter().map(|g| g.to_string()).collect::<Vec<String>>(),
                    "match": c.matches,
                    "witness": c.witness,
                })).collect()
            ),
            "well_poised": self.well_poised,
            "degree_bound": self.degree_bound,
        })
    }
}

/// Mutual bounded-degree ideal membership of two generating sets, with a
/// witness string on the first failure.
fn ideals_agree(
    g1: &[XPolynomial],
    g2: &[XPolynomial],
    bound: u32,
) -> (bool, Option<String>) {
    for g in g1 {
        if !ideal_membership(g, g2, bound) {
            return (
                false,
                Some(format!(
                    "initial form {g} is not in the degenerate line's ideal to degree {bound}"
                )),
            );
        }
    }
    for g in g2 {
        if !ideal_membership(g, g1, bound) {
            return (
                false,
                Some(format!(
                    "degenerate-line generator {g} is not in the initial ideal to degree {bound}"
                )),
            );
        }
    }
    (true, None)
}

/// A term-wise monomial or common-variable-factor witness. The initial
/// ideal of a torus-meeting irreducible variety contains neither.
fn degeneracy_witness(gens: &[XPolynomial]) -> Option<String> {
    for g in gens {
        if g.terms.len() == 1 {
            return Some(format!("initial form {g} is a monomial"));
        }
        if let Some(n) = g.num_vars() {
            for k in 0..n {
                if g.terms.keys().all(|e| e[k] > 0) {
                    return Some(format!(
                        "initial form {g} is divisible by the variable x{}",
                        k + 1
                    ));
                }
            }
        }
    }
    None
}

/// Verify well-poisedness of the semi-canonical embedding: for an interior
/// weight of each maximal tropical cone, compare the initial forms of the
/// defining generators against the independently recomputed generators of
/// the degenerate line's ideal, by mutual bounded-degree membership.
pub fn verify_well_poised(
    e: &SemiCanonicalEmbedding,
    line: &Line,
    d: &PolyhedralDivisor,
    degree_bound: u32,
) -> Result<WellPoisedReport, TropError> {
    let pres = ideal_presentation(e, line, d, degree_bound)?;
    let gens = pres.all_generators();
    let max_deg = gens.iter().map(|g| g.total_degree()).max().unwrap_or(0);
    // The certificate needs two degrees of headroom over the generators; an
    // incomplete toric search means the bound is already too small to have
    // seen them all.
    let mut required = max_deg + 2;
    if !pres.warnings.is_empty() {
        required = required.max(degree_bound + 1);
    }
    if degree_bound < required {
        return Err(TropError::BoundTooSmall {
            required,
            got: degree_bound,
        });
    }
    let tl = trop_line(line);
    let r = e.lattice_rank;
    let mut cones = Vec::new();
    for rho in &tl.rays {
        let mut v = vec![Int::zero(); r];
        v.extend(rho.iter().cloned());
        let weight = phi(e, &v);
        let wr = rat_weights(&weight);
        let initial_gens: Vec<XPolynomial> =
            gens.iter().map(|g| initial_form(g, &wr)).collect();
        let (expected_gens, matches, witness) = match degenerate_line(line, &v) {
            Ok(lw) => {
                let mut expected = pres.toric_generators.clone();
                for il in ideal_generators_il(e, &lw, d) {
                    expected.push(lift_to_polynomial(&il, e)?);
                }
                match degeneracy_witness(&initial_gens) {
                    Some(wit) => (expected, false, Some(wit)),
                    None => {
                        let (ok, wit) = ideals_agree(&initial_gens, &expected, degree_bound);
                        (expected, ok, wit)
                    }
                }
            }
            Err(err) => (Vec::new(), false, Some(err.to_string())),
        };
        cones.push(ConeReport {
            ray: rho.clone(),
            weight,
            initial_gens,
            expected_gens,
            matches,
            witness,
        });
    }
    let well_poised = cones.iter().all(|c| c.matches);
    Ok(WellPoisedReport {
        cones,
        well_poised,
        degree_bound,
    })
}

// ---------------------------------------------------------------------------
// Hand-supplied embeddings
// ---------------------------------------------------------------------------

/// An explicitly supplied monomial embedding: variable $x_k$ carries the
/// character `columns[k]` in the $(u, v)$ lattice of rank
/// `lattice_rank` + `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuppliedEmbedding {
    pub lattice_rank: usize,
    pub m: usize,
    pub columns: Vec<Vec<Int>>,
}

impl SuppliedEmbedding {
    pub fn new(
        lattice_rank: usize,
        m: usize,
        columns: Vec<Vec<Int>>,
    ) -> Result<Self, TropError> {
        if columns.iter().any(|c| c.len() != lattice_rank + m) {
            return Err(TropError::DimensionMismatch(
                "embedding columns must live in the rank + m lattice".into(),
            ));
        }
        Ok(SuppliedEmbedding {
            lattice_rank,
            m,
            columns,
        })
    }

    pub fn n(&self) -> usize {
        self.columns.len()
    }
}

/// All polynomial relations, to the degree bound, among the parametrizing
/// functions $x_k = \lambda^{u_k} z(s)^{v_k}$ on the (degenerate) line:
/// monomials are grouped by torus character, and each character fiber
/// contributes the nullspace of its matrix of binary forms in the line
/// parameter. This is an independent elimination-free kernel computation.
pub fn parametrization_kernel(
    emb: &SuppliedEmbedding,
    line: &Line,
    degree_bound: u32,
) -> Vec<XPolynomial> {
    let r = emb.lattice_rank;
    let m = emb.m;
    assert_eq!(line.ambient(), m, "line/embedding shape mismatch");
    let n = emb.n();
    // Group exponent vectors by their torus character.
    let mut fibers: BTreeMap<Vec<Int>, Vec<(Vec<u32>, Vec<Int>)>> = BTreeMap::new();
    for alpha in monomials_up_to(n, degree_bound) {
        let mut t = vec![Int::zero(); r];
        let mut vexp = vec![Int::zero(); m];
        for (k, &a) in alpha.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for j in 0..r {
                t[j] += &emb.columns[k][j] * Int::from(a);
            }
            for i in 0..m {
                vexp[i] += &emb.columns[k][r + i] * Int::from(a);
            }
        }
        fibers.entry(t).or_default().push((alpha, vexp));
    }
    let forms = line.forms();
    let mut out: Vec<XPolynomial> = Vec::new();
    for fiber in fibers.values() {
        if fiber.len() < 2 {
            continue;
        }
        // Shift exponents to be nonnegative and of equal total degree.
        let mins: Vec<Int> = (0..m)
            .map(|i| fiber.iter().map(|(_, v)| v[i].clone()).min().expect("nonempty"))
            .collect();
        let shifted: Vec<Vec<Int>> = fiber
            .iter()
            .map(|(_, v)| v.iter().zip(&mins).map(|(x, mn)| x - mn).collect())
            .collect();
        let peak = shifted
            .iter()
            .map(|s| s.iter().sum::<Int>())
            .max()
            .expect("nonempty");
        // numerator = prod_i l_i^{shifted_i} * l_0^{peak - sum shifted}.
        let columns: Vec<Vec<Rat>> = shifted
            .iter()
            .map(|s| {
                let mut form = vec![Rat::one()];
                for (i, pow) in s.iter().enumerate() {
                    let p = u32::try_from(pow).expect("small exponent");
                    for _ in 0..p {
                        form = binary_mul(&form, &forms[i + 1]);
                    }
                }
                let rem = &peak - s.iter().sum::<Int>();
                let p = u32::try_from(&rem).expect("small exponent");
                for _ in 0..p {
                    form = binary_mul(&form, &forms[0]);
                }
                form
            })
            .collect();
        let degree = usize::try_from(&peak).expect("small degree");
        // Matrix rows = form coefficients, columns = fiber monomials.
        let rows: Vec<Vec<Rat>> = (0..=degree)
            .map(|row| columns.iter().map(|c| c[row].clone()).collect())
            .collect();
        for null in RatMat::from_rows(rows).expect("rectangular").nullspace() {
            let prim = primitive_of_rational(&null);
            out.push(XPolynomial::from_terms(
                prim.iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| (fiber[i].0.clone(), Rat::from_integer(c.clone()))),
            ));
        }
    }
    out
}

/// Multiply a binary form (coefficients of $s_1^j$, ascending) by the
/// linear form $a s_0 + b s_1$.
fn binary_mul(form: &[Rat], linear: &(Rat, Rat)) -> Vec<Rat> {
    let (a, b) = linear;
    let mut out = vec![Rat::zero(); form.len() + 1];
    for (j, c) in form.iter().enumerate() {
        out[j] += c * a;
        out[j + 1] += c * b;
    }
    out
}

/// Verify well-poisedness of a hand-supplied embedding of the same cone
/// construction: initial forms of the supplied generators at each cone's
/// interior weight are compared against the parametrization kernel of the
/// degenerate line. Monomial or variable-divisible initial forms fail
/// immediately.
pub fn verify_well_poised_supplied(
    emb: &SuppliedEmbedding,
    gens: &[XPolynomial],
    line: &Line,
    degree_bound: u32,
) -> Result<WellPoisedReport, TropError> {
    let max_deg = gens.iter().map(|g| g.total_degree()).max().unwrap_or(0);
    if degree_bound < max_deg + 2 {
        return Err(TropError::BoundTooSmall {
            required: max_deg + 2,
            got: degree_bound,
        });
    }
    let r = emb.lattice_rank;
    let tl = trop_line(line);
    let mut cones = Vec::new();
    for rho in &tl.rays {
        let mut v = vec![Int::zero(); r];
        v.extend(rho.iter().cloned());
        let weight: Vec<Int> = emb.columns.iter().map(|c| dot_int(&v, c)).collect();
        let wr = rat_weights(&weight);
        let initial_gens: Vec<XPolynomial> =
            gens.iter().map(|g| initial_form(g, &wr)).collect();
        let (expected_gens, matches, witness) = match degenerate_line(line, &v) {
            Ok(lw) => {
                let expected = parametrization_kernel(emb, &lw, degree_bound);
                match degeneracy_witness(&initial_gens) {
                    Some(wit) => (expected, false, Some(wit)),
                    None => {
                        let (ok, wit) = ideals_agree(&initial_gens, &expected, degree_bound);
                        (expected, ok, wit)
                    }
                }
            }
            Err(err) => (Vec::new(), false, Some(err.to_string())),
        };
        cones.push(ConeReport {
            ray: rho.clone(),
            weight,
            initial_gens,
            expected_gens,
            matches,
            witness,
        });
    }
    let well_poised = cones.iter().all(|c| c.matches);
    Ok(WellPoisedReport {
        cones,
        well_poised,
        degree_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::{int, rat};
    use crate::idealkit::toric_ideal_generators;
    use crate::tgeom::{
        build_embedding, line_from_divisor,
        tests::{d6_divisor, pomega_divisor},
    };

    fn iv(v: &[i64]) -> Vec<Int> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn rv(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| Rat::from_integer(int(x))).collect()
    }

    fn expo(n: usize, pairs: &[(usize, u32)]) -> Vec<u32> {
        let mut e = vec![0u32; n];
        for &(var, p) in pairs {
            e[var - 1] += p;
        }
        e
    }

    #[test]
    fn tropical_line_of_generic_line() {
        let line = line_from_divisor(&d6_divisor());
        let tl = trop_line(&line);
        let mut rays = tl.rays.clone();
        rays.sort();
        assert_eq!(rays, vec![iv(&[-1, -1]), iv(&[0, 1]), iv(&[1, 0])]);
        assert_eq!(tl.multiplicities, vec![1, 1, 1]);
    }

    #[test]
    fn tropical_line_with_coincident_zeros() {
        let line = Line::from_forms(&[
            (Rat::one(), Rat::zero()),
            (Rat::zero(), Rat::one()),
            (Rat::zero(), Rat::from_integer(int(2))),
        ])
        .unwrap();
        let tl = trop_line(&line);
        assert_eq!(tl.rays, vec![iv(&[-1, -1]), iv(&[1, 1])]);
        assert_eq!(tl.multiplicities, vec![1, 2]);
    }

    #[test]
    fn tropical_line_on_projective_line() {
        let sigma = crate::polycore::Cone::from_rays(1, &[iv(&[1])]);
        let d = PolyhedralDivisor::new(
            1,
            sigma,
            &[
                (Rat::from_integer(int(0)), Rat::one()),
                (Rat::one(), Rat::from_integer(int(0))),
            ],
            &[Some(vec![vec![rat(1, 2)]]), Some(vec![vec![rat(-1, 3)]])],
        )
        .unwrap();
        let line = line_from_divisor(&d);
        let tl = trop_line(&line);
        let mut rays = tl.rays.clone();
        rays.sort();
        assert_eq!(rays, vec![iv(&[-1]), iv(&[1])]);
    }

    #[test]
    fn phi_pairs_with_hilbert_columns() {
        let e = build_embedding(&d6_divisor()).unwrap();
        // Our variables, ascending: (2,1,1), (2,1,2), (2,2,1), (3,2,2).
        assert_eq!(phi(&e, &iv(&[0, 1, 0])), iv(&[1, 1, 2, 2]));
        assert_eq!(phi(&e, &iv(&[1, 0, 0])), iv(&[2, 2, 2, 3]));
        assert_eq!(phi(&e, &iv(&[0, 0, 0])), iv(&[0, 0, 0, 0]));
    }

    #[test]
    fn phi_is_injective_on_fixtures() {
        for d in [d6_divisor(), pomega_divisor()] {
            let e = build_embedding(&d).unwrap();
            let dim = e.lattice_rank + e.m;
            let rows: Vec<Vec<Rat>> = e
                .hilbert
                .iter()
                .map(|h| h.iter().map(|x| Rat::from_integer(x.clone())).collect())
                .collect();
            let rank = RatMat::from_rows(rows).unwrap().rank();
            assert_eq!(rank, dim, "pairing matrix must have full column rank");
        }
    }

    #[test]
    fn tropical_fan_shapes() {
        let d = d6_divisor();
        let e = build_embedding(&d).unwrap();
        let fan = trop_x(&e, &line_from_divisor(&d));
        assert_eq!(fan.ambient, 4);
        assert_eq!(fan.maximal_cones.len(), 3);
        assert_eq!(fan.lineality.len(), 1);

        let dp = pomega_divisor();
        let ep = build_embedding(&dp).unwrap();
        let fanp = trop_x(&ep, &line_from_divisor(&dp));
        assert_eq!(fanp.ambient, 9);
        assert_eq!(fanp.maximal_cones.len(), 3);
        assert_eq!(fanp.lineality.len(), 3);
        let rows: Vec<Vec<Rat>> = fanp
            .lineality
            .iter()
            .map(|h| h.iter().map(|x| Rat::from_integer(x.clone())).collect())
            .collect();
        assert_eq!(RatMat::from_rows(rows).unwrap().rank(), 3);
    }

    #[test]
    fn tropical_fan_of_toric_line() {
        let line = Line::from_forms(&[
            (Rat::one(), Rat::zero()),
            (Rat::zero(), Rat::one()),
            (Rat::zero(), Rat::one()),
        ])
        .unwrap();
        let d = d6_divisor();
        let e = build_embedding(&d).unwrap();
        let fan = trop_x(&e, &line);
        assert_eq!(fan.maximal_cones.len(), 2);
        // The two rays are opposite: a line modulo lineality.
        let tl = trop_line(&line);
        let sum: Vec<Int> = tl.rays[0]
            .iter()
            .zip(&tl.rays[1])
            .map(|(a, b)| a + b)
            .collect();
        assert!(sum.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn initial_form_examples() {
        let e = build_embedding(&d6_divisor()).unwrap();
        let lift = XPolynomial::from_terms([
            (expo(4, &[(1, 1)]), Rat::one()),
            (expo(4, &[(2, 1)]), Rat::one()),
            (expo(4, &[(3, 1)]), Rat::one()),
        ]);
        let w = rv(&[1, 1, 2, 2]);
        assert_eq!(
            initial_form(&lift, &w),
            XPolynomial::from_terms([
                (expo(4, &[(1, 1)]), Rat::one()),
                (expo(4, &[(2, 1)]), Rat::one()),
            ])
        );
        let t = toric_ideal_generators(&e.hilbert, 6);
        let b = &t.generators[0];
        assert_eq!(initial_form(b, &w), b.clone(), "tied weights keep both terms");
        let zero_w = rv(&[0, 0, 0, 0]);
        assert_eq!(initial_form(&lift, &zero_w), lift);
    }

    #[test]
    fn degenerate_line_examples() {
        let d = d6_divisor();
        let line = line_from_divisor(&d);
        // Ray e1 in the torus part: initial forms 1 + z2.
        let lw = degenerate_line(&line, &iv(&[0, 1, 0])).unwrap();
        assert_eq!(lw.boundary_points().len(), 2);
        assert!(crate::tgeom::detect_toric(&lw));
        assert_eq!(
            crate::idealkit::line_linear_forms(&lw),
            vec![iv(&[1, 0, 1])]
        );
        // Zero weight: the same line.
        let l0 = degenerate_line(&line, &iv(&[0, 0, 0])).unwrap();
        assert_eq!(
            crate::idealkit::line_linear_forms(&l0),
            crate::idealkit::line_linear_forms(&line)
        );
        assert_eq!(l0.boundary_points().len(), 3);
        // Weights off the tropical line give monomial initial ideals.
        assert_eq!(
            degenerate_line(&line, &iv(&[0, 1, 1])),
            Err(TropError::MonomialInitial("1".into()))
        );
        assert_eq!(
            degenerate_line(&line, &iv(&[0, -2, -1])),
            Err(TropError::MonomialInitial("z1".into()))
        );
    }

    #[test]
    fn degenerate_line_of_projective_line_is_identity() {
        let sigma = crate::polycore::Cone::from_rays(1, &[iv(&[1])]);
        let d = PolyhedralDivisor::new(
            1,
            sigma,
            &[
                (Rat::from_integer(int(0)), Rat::one()),
                (Rat::one(), Rat::from_integer(int(0))),
            ],
            &[Some(vec![vec![rat(1, 2)]]), Some(vec![vec![rat(-1, 3)]])],
        )
        .unwrap();
        let line = line_from_divisor(&d);
        let lw = degenerate_line(&line, &iv(&[0, 5])).unwrap();
        assert_eq!(lw.ambient(), 1);
        assert_eq!(lw.boundary_points().len(), 2);
    }

    #[test]
    fn well_poised_verdict_for_quadric_fixture() {
        let d = d6_divisor();
        let e = build_embedding(&d).unwrap();
        let line = line_from_divisor(&d);
        let report = verify_well_poised(&e, &line, &d, 6).unwrap();
        assert_eq!(report.cones.len(), 3);
        assert!(report.well_poised, "{:?}", report.to_json());
        for cone in &report.cones {
            assert!(cone.matches);
            assert!(cone.witness.is_none());
            // No initial generator is a monomial on the tropicalization.
            assert!(cone.initial_gens.iter().all(|g| g.terms.len() > 1));
        }
        // The e1-cone initial ideal: the binomial survives whole (tied
        // weights) and the linear form truncates to x1 + x2.
        let c1 = report
            .cones
            .iter()
            .find(|c| c.ray == iv(&[1, 0]))
            .expect("ray present");
        let t = toric_ideal_generators(&e.hilbert, 6);
        assert!(c1.initial_gens.contains(&t.generators[0]));
        let x1_plus_x2 = XPolynomial::from_terms([
            (expo(4, &[(1, 1)]), Rat::one()),
            (expo(4, &[(2, 1)]), Rat::one()),
        ]);
        assert!(c1.initial_gens.contains(&x1_plus_x2));
    }

    #[test]
    fn well_poised_verdict_for_rank_three_fixture() {
        let d = pomega_divisor();
        let e = build_embedding(&d).unwrap();
        let line = line_from_divisor(&d);
        let report = verify_well_poised(&e, &line, &d, 6).unwrap();
        assert_eq!(report.cones.len(), 3);
        assert!(report.well_poised, "{:?}", report.to_json());
    }

    #[test]
    fn bound_too_small_is_rejected() {
        let d = d6_divisor();
        let e = build_embedding(&d).unwrap();
        let line = line_from_divisor(&d);
        // At bound 2 the cubic toric generator is not even visible; the
        // incomplete search is reported as an insufficient bound.
        assert_eq!(
            verify_well_poised(&e, &line, &d, 2),
            Err(TropError::BoundTooSmall {
                required: 3,
                got: 2
            })
        );
        // At bound 4 the generators are all present but lack the two
        // degrees of certification headroom over the cubic.
        assert_eq!(
            verify_well_poised(&e, &line, &d, 4),
            Err(TropError::BoundTooSmall {
                required: 5,
                got: 4
            })
        );
    }

    #[test]
    fn off_tropical_weights_expose_monomial_initials() {
        // A weight outside the linear span of the tropicalization forces a
        // monomial initial form of some defining generator.
        let d = d6_divisor();
        let e = build_embedding(&d).unwrap();
        let line = line_from_divisor(&d);
        let pres = crate::idealkit::ideal_presentation(&e, &line, &d, 6).unwrap();
        let gens = pres.all_generators();
        // (1,0,0,0) is not in the span of the pairing image.
        let pairing: Vec<Vec<Rat>> = e
            .hilbert
            .iter()
            .map(|h| h.iter().map(|x| Rat::from_integer(x.clone())).collect())
            .collect();
        let mut cols: Vec<Vec<Rat>> = (0..3)
            .map(|j| pairing.iter().map(|row| row[j].clone()).collect())
            .collect();
        cols.push(rv(&[1, 0, 0, 0]));
        assert_eq!(RatMat::from_rows(cols).unwrap().rank(), 4);
        let w = rv(&[1, 0, 0, 0]);
        assert!(
            gens.iter().any(|g| initial_form(g, &w).terms.len() == 1),
            "off-tropical weight must produce a monomial initial form"
        );
    }

    #[test]
    fn iterated_initial_single_row_agrees() {
        let e = build_embedding(&d6_divisor()).unwrap();
        let t = toric_ideal_generators(&e.hilbert, 6);
        let w = WeightMatrix::new(vec![rv(&[1, 1, 2, 2])]).unwrap();
        let (result, flag) = iterated_initial(&t.generators, &w);
        assert_eq!(result[0], initial_form(&t.generators[0], &rv(&[1, 1, 2, 2])));
        assert!(!flag);
    }

    #[test]
    fn iterated_initial_second_row_in_lineality_is_stable() {
        let d = d6_divisor();
        let e = build_embedding(&d).unwrap();
        let line = line_from_divisor(&d);
        let pres = crate::idealkit::ideal_presentation(&e, &line, &d, 6).unwrap();
        let gens = pres.all_generators();
        let row1 = rv(&[1, 1, 2, 2]);
        let row2 = rv(&[2, 2, 2, 3]);
        let single = WeightMatrix::new(vec![row1.clone()]).unwrap();
        let double = WeightMatrix::new(vec![row1, row2]).unwrap();
        let (one, f1) = iterated_initial(&gens, &single);
        let (two, f2) = iterated_initial(&gens, &double);
        assert_eq!(one, two);
        assert!(!f1 && !f2);
    }

    #[test]
    fn iterated_initial_flags_monomials() {
        let e = build_embedding(&d6_divisor()).unwrap();
        let t = toric_ideal_generators(&e.hilbert, 6);
        let w = WeightMatrix::new(vec![rv(&[1, 0, 0, 0])]).unwrap();
        let (result, flag) = iterated_initial(&t.generators, &w);
        assert!(flag, "got {result:?}");
    }

    #[test]
    fn weight_matrix_rejects_ragged_rows() {
        assert!(WeightMatrix::new(vec![rv(&[1, 2]), rv(&[1])]).is_err());
    }

    fn minimal_embedding() -> (SuppliedEmbedding, Vec<XPolynomial>) {
        let emb = SuppliedEmbedding::new(
            1,
            2,
            vec![iv(&[3, 2, 2]), iv(&[2, 1, 2]), iv(&[2, 2, 1])],
        )
        .unwrap();
        // x1^2 + x2^2*x3 + x2*x3^2 cuts out the image in the minimal
        // coordinates.
        let f = XPolynomial::from_terms([
            (expo(3, &[(1, 2)]), Rat::one()),
            (expo(3, &[(2, 2), (3, 1)]), Rat::one()),
            (expo(3, &[(2, 1), (3, 2)]), Rat::one()),
        ]);
        (emb, vec![f])
    }

    #[test]
    fn parametrization_kernel_recovers_the_minimal_relation() {
        let (emb, gens) = minimal_embedding();
        let line = line_from_divisor(&d6_divisor());
        let kernel = parametrization_kernel(&emb, &line, 4);
        assert!(
            !kernel.is_empty(),
            "the defining relation must appear by degree 4"
        );
        // The supplied generator lies in the kernel ideal and vice versa.
        assert!(ideal_membership(&gens[0], &kernel, 4));
        for k in &kernel {
            assert!(
                ideal_membership(k, &gens, 6),
                "unexpected extra relation {k}"
            );
        }
    }

    #[test]
    fn minimal_embedding_is_not_well_poised() {
        let (emb, gens) = minimal_embedding();
        let line = line_from_divisor(&d6_divisor());
        let report = verify_well_poised_supplied(&emb, &gens, &line, 6).unwrap();
        assert!(!report.well_poised);
        // The failing cone is the one through (-1,-1): the initial form
        // x2^2*x3 + x2*x3^2 is divisible by x2*x3.
        let bad = report
            .cones
            .iter()
            .find(|c| c.ray == iv(&[-1, -1]))
            .expect("ray present");
        assert!(!bad.matches);
        let witness = bad.witness.as_deref().expect("witness recorded");
        assert!(
            witness.contains("divisible") || witness.contains("not in"),
            "unexpected witness: {witness}"
        );
        // The two coordinate-direction cones pass: their initial forms stay
        // irreducible and match the degenerate lines.
        for ray in [iv(&[1, 0]), iv(&[0, 1])] {
            let cone = report.cones.iter().find(|c| c.ray == ray).unwrap();
            assert!(cone.matches, "{:?}", cone.witness);
        }
    }

    #[test]
    fn supplied_semi_canonical_embedding_passes() {
        // Routing the semi-canonical data through the hand-supplied path
        // must agree with the pipeline verdict.
        let d = d6_divisor();
        let e = build_embedding(&d).unwrap();
        let line = line_from_divisor(&d);
        let emb = SuppliedEmbedding::new(1, 2, e.hilbert.clone()).unwrap();
        let pres = crate::idealkit::ideal_presentation(&e, &line, &d, 6).unwrap();
        let report =
            verify_well_poised_supplied(&emb, &pres.all_generators(), &line, 6).unwrap();
        assert!(report.well_poised, "{:?}", report.to_json());
    }

    #[test]
    fn report_json_shape() {
        let d = d6_divisor();
        let e = build_embedding(&d).unwrap();
        let line = line_from_divisor(&d);
        let report = verify_well_poised(&e, &line, &d, 6).unwrap();
        let json = report.to_json();
        assert_eq!(json["well_poised"], serde_json::json!(true));
        assert_eq!(json["degree_bound"], serde_json::json!(6));
        assert_eq!(json["cones"].as_array().unwrap().len(), 3);
        let cone = &json["cones"][0];
        assert!(cone["ray"].is_array());
        assert!(cone["weight"].is_array());
        assert!(cone["initial_gens"].is_array());
        assert_eq!(cone["match"], serde_json::json!(true));
    }
}
