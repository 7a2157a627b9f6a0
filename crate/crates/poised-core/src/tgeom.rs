//! Polyhedral divisors on the projective line, lines in $\mathbb{P}^m$, and
//! the semi-canonical embedding.
//!
//! A divisor here is a formal sum $D = \sum_i \Delta_i \cdot P_i$ of
//! polyhedral coefficients $\Delta_i \subset N_\mathbb{Q}$ (all sharing the
//! tailcone $\sigma$, possibly empty) attached to pairwise distinct points
//! $P_i \in \mathbb{P}^1$. Its combinatorial shadow is the cone
//! $$C \;=\; \mathbb{Q}_{\ge 0}\Bigl(\bigcup_i \Delta_i\times e_i \;\cup\;
//! \sigma\times 0\Bigr) \;\subset\; N_\mathbb{Q}\times\mathbb{Q}^m,$$
//! where $e_1,\dots,e_m$ is the standard basis and $e_0 = -\sum_i e_i$.
//! Rational vertices enter through the primitive lattice vector on their ray.
//! The cone must be pointed — non-pointed input data is rejected.
//!
//! A Hilbert basis $H$ of $C^\vee \cap (M\times\mathbb{Z}^m)$, sorted
//! ascending lexicographically, names the coordinates $x_1,\dots,x_n$ of the
//! semi-canonical embedding.
//!
//! Divisors also determine a *line*: the image of
//! $(s_0:s_1) \mapsto (\ell_0 : \cdots : \ell_m)$ with
//! $\ell_i(s_0,s_1) = b_i s_0 - a_i s_1$ for $P_i = (a_i : b_i)$. Boundary
//! points of the line off the torus carry order tables
//! $\mathrm{ord}_Q(z_i) = \mathrm{mult}_Q(\ell_i) - \mathrm{mult}_Q(\ell_0)$,
//! the discrete data consumed by the tropical and valuation layers.

use crate::exactla::{
    dot_rat_int, parse_rat, primitive_of_rational, rat_to_string, Int, Rat, RatMat, RatVec,
};
use crate::polycore::{
    dual_cone, hilbert_basis, int_rows_json, lattice_generators, support_value, Cone, PolyError,
    Polyhedron, SupportValue,
};
use num_traits::{One, Signed, Zero};

/// Errors from divisor, line, and embedding construction.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TGeomError {
    #[error("points must be distinct")]
    DuplicatePoints,
    #[error("invalid divisor: {0}")]
    InvalidDivisor(String),
    #[error("invalid line: {0}")]
    InvalidLine(String),
    #[error("cone C is not pointed; the divisor does not define an affine embedding")]
    NotPointed,
    #[error("cone C is not full-dimensional, so its dual has no finite Hilbert basis")]
    DualNotPointed,
    #[error("{0}")]
    Parse(String),
}

impl From<PolyError> for TGeomError {
    fn from(e: PolyError) -> Self {
        TGeomError::InvalidDivisor(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Polyhedral divisors
// ---------------------------------------------------------------------------

/// A polyhedral divisor $D = \sum_{i=0}^{m} \Delta_i \cdot P_i$ on the
/// projective line, with tailcone $\sigma$ and pairwise distinct points.
///
/// Point representatives are kept exactly as supplied (after clearing
/// denominators to a primitive integer pair); different representatives of
/// the same projective point act on everything downstream by the torus, and
/// fixing the input representative keeps every derived object deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyhedralDivisor {
    lattice_rank: usize,
    tailcone: Cone,
    points: Vec<(Int, Int)>,
    coefficients: Vec<Polyhedron>,
}

impl PolyhedralDivisor {
    /// Assemble and validate a divisor. Coefficients are built from vertex
    /// lists (`None` marks the empty polyhedron), all with tailcone `sigma`.
    pub fn new(
        lattice_rank: usize,
        sigma: Cone,
        points: &[(Rat, Rat)],
        coefficient_vertices: &[Option<Vec<RatVec>>],
    ) -> Result<Self, TGeomError> {
        if sigma.ambient_rank() != lattice_rank {
            return Err(TGeomError::InvalidDivisor(
                "tailcone ambient rank differs from lattice rank".into(),
            ));
        }
        if points.len() < 2 {
            return Err(TGeomError::InvalidDivisor(
                "a divisor needs at least two points".into(),
            ));
        }
        if coefficient_vertices.len() != points.len() {
            return Err(TGeomError::InvalidDivisor(
                "coefficient count differs from point count".into(),
            ));
        }
        let mut pts = Vec::with_capacity(points.len());
        for (a, b) in points {
            if a.is_zero() && b.is_zero() {
                return Err(TGeomError::InvalidDivisor(
                    "(0 : 0) is not a point of the projective line".into(),
                ));
            }
            let prim = primitive_of_rational(&[a.clone(), b.clone()]);
            pts.push((prim[0].clone(), prim[1].clone()));
        }
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                if (&pts[i].0 * &pts[j].1 - &pts[j].0 * &pts[i].1).is_zero() {
                    return Err(TGeomError::DuplicatePoints);
                }
            }
        }
        let mut coefficients = Vec::with_capacity(points.len());
        for (idx, cv) in coefficient_vertices.iter().enumerate() {
            match cv {
                None => coefficients.push(Polyhedron::empty(lattice_rank, sigma.clone())),
                Some(verts) => {
                    if verts.is_empty() {
                        return Err(TGeomError::InvalidDivisor(format!(
                            "coefficient {idx}: vertex list empty but not marked empty"
                        )));
                    }
                    let p = Polyhedron::from_vertices(lattice_rank, verts, &sigma)
                        .map_err(|e| TGeomError::InvalidDivisor(format!("coefficient {idx}: {e}")))?;
                    coefficients.push(p);
                }
            }
        }
        Ok(PolyhedralDivisor {
            lattice_rank,
            tailcone: sigma,
            points: pts,
            coefficients,
        })
    }

    pub fn lattice_rank(&self) -> usize {
        self.lattice_rank
    }

    /// Number of coefficients minus one: coordinates of the ambient
    /// $\mathbb{P}^m$ of the associated line.
    pub fn m(&self) -> usize {
        self.points.len() - 1
    }

    pub fn tailcone(&self) -> &Cone {
        &self.tailcone
    }

    pub fn points(&self) -> &[(Int, Int)] {
        &self.points
    }

    pub fn coefficients(&self) -> &[Polyhedron] {
        &self.coefficients
    }

    pub fn coefficient(&self, i: usize) -> &Polyhedron {
        &self.coefficients[i]
    }

    /// Support value $\Delta_i(u) = \min_{v\in\Delta_i}\langle v,u\rangle$.
    pub fn support(&self, i: usize, u: &[Rat]) -> Result<SupportValue, PolyError> {
        support_value(&self.coefficients[i], u)
    }

    /// Re-check all invariants; returns advisory warnings (currently only the
    /// positivity condition on the degree polyhedron).
    pub fn validate(&self) -> Result<Vec<String>, TGeomError> {
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                let (a1, b1) = &self.points[i];
                let (a2, b2) = &self.points[j];
                if (a1 * b2 - a2 * b1).is_zero() {
                    return Err(TGeomError::DuplicatePoints);
                }
            }
        }
        for (i, c) in self.coefficients.iter().enumerate() {
            if c.ambient_rank() != self.lattice_rank {
                return Err(TGeomError::InvalidDivisor(format!(
                    "coefficient {i} lives in the wrong rank"
                )));
            }
            if !c.is_empty() && c.tailcone() != &self.tailcone {
                return Err(TGeomError::InvalidDivisor(format!(
                    "coefficient {i} has a tailcone different from sigma"
                )));
            }
        }
        let mut warnings = Vec::new();
        if let Some(w) = self.positivity_warning() {
            warnings.push(w);
        }
        Ok(warnings)
    }

    /// Advisory check of the positivity condition: the Minkowski sum of the
    /// nonempty coefficients should be a proper subset of $\sigma$. Violations
    /// are reported as warnings, not errors: pointedness of the cone $C$ is
    /// the property the pipeline actually needs, and that one is enforced.
    fn positivity_warning(&self) -> Option<String> {
        let nonempty: Vec<&Polyhedron> = self.coefficients.iter().filter(|c| !c.is_empty()).collect();
        if nonempty.is_empty() {
            return Some("all coefficients are empty; positivity is vacuous but the divisor carries no data".into());
        }
        // Vertices of the Minkowski sum are sums of one vertex from each part.
        let mut sums: Vec<RatVec> = vec![vec![Rat::zero(); self.lattice_rank]];
        for part in &nonempty {
            let mut next = Vec::new();
            for base in &sums {
                for v in part.vertices() {
                    next.push(base.iter().zip(v).map(|(a, b)| a + b).collect());
                }
            }
            sums = next;
        }
        for s in &sums {
            if !self.tailcone.contains_rat(s) {
                return Some(
                    "positivity suspect: the Minkowski sum of the coefficients is not contained in sigma"
                        .into(),
                );
            }
        }
        let sum_poly = Polyhedron::from_vertices(self.lattice_rank, &sums, &self.tailcone).ok()?;
        let origin = vec![Rat::zero(); self.lattice_rank];
        if sum_poly.contains_rat(&origin) {
            return Some(
                "positivity suspect: the Minkowski sum of the coefficients is not a proper subset of sigma"
                    .into(),
            );
        }
        None
    }

    /// Parse the divisor JSON document
    /// `{"rank_N", "tailcone_rays", "points", "coefficients"}`.
    pub fn from_json(v: &serde_json::Value) -> Result<Self, TGeomError> {
        let obj = v
            .as_object()
            .ok_or_else(|| TGeomError::Parse("divisor document must be a JSON object".into()))?;
        let rank = obj
            .get("rank_N")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| TGeomError::Parse("/rank_N: expected a positive integer".into()))?
            as usize;
        if rank == 0 {
            return Err(TGeomError::Parse("/rank_N: expected a positive integer".into()));
        }
        let rays_val = obj
            .get("tailcone_rays")
            .and_then(|x| x.as_array())
            .ok_or_else(|| TGeomError::Parse("/tailcone_rays: expected an array".into()))?;
        let mut rays: Vec<Vec<Int>> = Vec::new();
        for (i, rv) in rays_val.iter().enumerate() {
            let row = rv.as_array().ok_or_else(|| {
                TGeomError::Parse(format!("/tailcone_rays/{i}: expected an array"))
            })?;
            if row.len() != rank {
                return Err(TGeomError::Parse(format!(
                    "/tailcone_rays/{i}: expected {rank} entries"
                )));
            }
            let mut out = Vec::with_capacity(rank);
            for (j, e) in row.iter().enumerate() {
                out.push(json_int(e).map_err(|m| {
                    TGeomError::Parse(format!("/tailcone_rays/{i}/{j}: {m}"))
                })?);
            }
            rays.push(out);
        }
        let sigma = Cone::from_rays(rank, &rays);
        let pts_val = obj
            .get("points")
            .and_then(|x| x.as_array())
            .ok_or_else(|| TGeomError::Parse("/points: expected an array".into()))?;
        let mut points: Vec<(Rat, Rat)> = Vec::new();
        for (i, pv) in pts_val.iter().enumerate() {
            let pair = pv
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| TGeomError::Parse(format!("/points/{i}: expected a pair [a, b]")))?;
            let a = json_rat(&pair[0])
                .map_err(|m| TGeomError::Parse(format!("/points/{i}/0: {m}")))?;
            let b = json_rat(&pair[1])
                .map_err(|m| TGeomError::Parse(format!("/points/{i}/1: {m}")))?;
            points.push((a, b));
        }
        let coeff_val = obj
            .get("coefficients")
            .and_then(|x| x.as_array())
            .ok_or_else(|| TGeomError::Parse("/coefficients: expected an array".into()))?;
        let mut coeffs: Vec<Option<Vec<RatVec>>> = Vec::new();
        for (i, cv) in coeff_val.iter().enumerate() {
            let cobj = cv.as_object().ok_or_else(|| {
                TGeomError::Parse(format!("/coefficients/{i}: expected an object"))
            })?;
            let empty = cobj.get("empty").and_then(|x| x.as_bool()).unwrap_or(false);
            if empty {
                coeffs.push(None);
                continue;
            }
            let verts_val = cobj.get("vertices").and_then(|x| x.as_array()).ok_or_else(|| {
                TGeomError::Parse(format!(
                    "/coefficients/{i}/vertices: expected an array (or \"empty\": true)"
                ))
            })?;
            let mut verts: Vec<RatVec> = Vec::new();
            for (j, vv) in verts_val.iter().enumerate() {
                let row = vv.as_array().filter(|a| a.len() == rank).ok_or_else(|| {
                    TGeomError::Parse(format!(
                        "/coefficients/{i}/vertices/{j}: expected {rank} entries"
                    ))
                })?;
                let mut out = Vec::with_capacity(rank);
                for (k, e) in row.iter().enumerate() {
                    out.push(json_rat(e).map_err(|m| {
                        TGeomError::Parse(format!("/coefficients/{i}/vertices/{j}/{k}: {m}"))
                    })?);
                }
                verts.push(out);
            }
            coeffs.push(Some(verts));
        }
        Self::new(rank, sigma, &points, &coeffs)
    }

    /// Serialize per the divisor JSON schema (rationals as strings).
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rank_N": self.lattice_rank,
            "tailcone_rays": serde_json::Value::Array(
                self.tailcone.rays().iter().map(|r| serde_json::Value::Array(
                    r.iter().map(|x| serde_json::json!(i64::try_from(x).expect("ray entry fits i64"))).collect()
                )).collect()
            ),
            "points": serde_json::Value::Array(
                self.points.iter().map(|(a, b)| serde_json::json!([a.to_string(), b.to_string()])).collect()
            ),
            "coefficients": serde_json::Value::Array(
                self.coefficients.iter().map(|c| {
                    if c.is_empty() {
                        serde_json::json!({"empty": true, "vertices": []})
                    } else {
                        serde_json::json!({
                            "empty": false,
                            "vertices": serde_json::Value::Array(
                                c.vertices().iter().map(|v| serde_json::Value::Array(
                                    v.iter().map(|x| serde_json::Value::String(rat_to_string(x))).collect()
                                )).collect()
                            ),
                        })
                    }
                }).collect()
            ),
        })
    }
}

fn json_int(v: &serde_json::Value) -> Result<Int, String> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(Int::from)
            .ok_or_else(|| "expected an integer".into()),
        serde_json::Value::String(s) => {
            let r = parse_rat(s).map_err(|e| e.to_string())?;
            if r.denom().is_one() {
                Ok(r.numer().clone())
            } else {
                Err("expected an integer".into())
            }
        }
        _ => Err("expected an integer".into()),
    }
}

fn json_rat(v: &serde_json::Value) -> Result<Rat, String> {
    match v {
        serde_json::Value::String(s) => parse_rat(s).map_err(|e| e.to_string()),
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(|x| Rat::from_integer(Int::from(x)))
            .ok_or_else(|| "malformed rational: non-integer number".into()),
        _ => Err("malformed rational: expected a string like \"3/2\"".into()),
    }
}

// ---------------------------------------------------------------------------
// Lines
// ---------------------------------------------------------------------------

/// A boundary point of a line: a parameter value where some coordinate
/// vanishes, with the set of vanishing coordinate indices and the order table
/// $(\mathrm{ord}_Q(z_1),\dots,\mathrm{ord}_Q(z_m))$.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryPoint {
    pub param: (Int, Int),
    pub vanishing: Vec<usize>,
    pub ord_table: Vec<Int>,
}

/// A parametrized line $(s_0:s_1) \mapsto (\ell_0 : \cdots : \ell_m)$ in
/// $\mathbb{P}^m$ meeting the torus, together with its boundary points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    ambient: usize,
    forms: Vec<(Rat, Rat)>,
    boundary: Vec<BoundaryPoint>,
}

impl Line {
    /// Build a line from the coefficient pairs $(c_0, c_1)$ of its forms
    /// $\ell_i = c_0 s_0 + c_1 s_1$. Boundary points and order tables are
    /// derived: $\ell_i$ vanishes exactly at $(-c_1 : c_0)$, and proportional
    /// forms share a boundary point.
    pub fn from_forms(forms: &[(Rat, Rat)]) -> Result<Line, TGeomError> {
        if forms.len() < 2 {
            return Err(TGeomError::InvalidLine("need at least two forms".into()));
        }
        let m = forms.len() - 1;
        for (i, (c0, c1)) in forms.iter().enumerate() {
            if c0.is_zero() && c1.is_zero() {
                return Err(TGeomError::InvalidLine(format!(
                    "form {i} is identically zero, so the line misses the torus"
                )));
            }
        }
        let rank = RatMat::from_rows(forms.iter().map(|(a, b)| vec![a.clone(), b.clone()]).collect())
            .expect("rectangular")
            .rank();
        if rank != 2 {
            return Err(TGeomError::InvalidLine(
                "forms are all proportional; the image is a point, not a line".into(),
            ));
        }
        // Boundary points: distinct zeros of the forms, in first-occurrence order.
        let mut boundary: Vec<BoundaryPoint> = Vec::new();
        for (i, (c0, c1)) in forms.iter().enumerate() {
            let zero = primitive_of_rational(&[-c1.clone(), c0.clone()]);
            let param = (zero[0].clone(), zero[1].clone());
            if let Some(bp) = boundary
                .iter_mut()
                .find(|bp| (&bp.param.0 * &param.1 - &param.0 * &bp.param.1).is_zero())
            {
                bp.vanishing.push(i);
            } else {
                boundary.push(BoundaryPoint {
                    param,
                    vanishing: vec![i],
                    ord_table: Vec::new(),
                });
            }
        }
        for bp in boundary.iter_mut() {
            let zero0 = bp.vanishing.contains(&0);
            bp.ord_table = (1..=m)
                .map(|i| {
                    let mult_i = if bp.vanishing.contains(&i) { 1 } else { 0 };
                    let mult_0 = if zero0 { 1 } else { 0 };
                    Int::from(mult_i - mult_0)
                })
                .collect();
        }
        Ok(Line {
            ambient: m,
            forms: forms.to_vec(),
            boundary,
        })
    }

    /// Ambient dimension $m$ of the projective space.
    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn forms(&self) -> &[(Rat, Rat)] {
        &self.forms
    }

    pub fn boundary_points(&self) -> &[BoundaryPoint] {
        &self.boundary
    }

    /// Coincidence classes: for each boundary point, the coordinate indices
    /// vanishing there.
    pub fn vanishing_groups(&self) -> Vec<Vec<usize>> {
        self.boundary.iter().map(|b| b.vanishing.clone()).collect()
    }

    /// JSON form `{"forms": [["c0","c1"]], "boundary": [{"param", "ord"}]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "forms": serde_json::Value::Array(
                self.forms.iter().map(|(a, b)| serde_json::json!([rat_to_string(a), rat_to_string(b)])).collect()
            ),
            "boundary": serde_json::Value::Array(
                self.boundary.iter().map(|bp| serde_json::json!({
                    "param": [bp.param.0.to_string(), bp.param.1.to_string()],
                    "ord": serde_json::Value::Array(
                        bp.ord_table.iter().map(|x| serde_json::json!(i64::try_from(x).expect("ord fits i64"))).collect()
                    ),
                })).collect()
            ),
        })
    }
}

/// The line attached to a divisor: $\ell_i(s_0,s_1) = b_i s_0 - a_i s_1$,
/// vanishing exactly at $P_i = (a_i : b_i)$. Boundary points inherit the
/// divisor's point representatives and come in divisor order.
pub fn line_from_divisor(d: &PolyhedralDivisor) -> Line {
    let forms: Vec<(Rat, Rat)> = d
        .points()
        .iter()
        .map(|(a, b)| {
            (
                Rat::from_integer(b.clone()),
                Rat::from_integer(-a.clone()),
            )
        })
        .collect();
    Line::from_forms(&forms).expect("divisor invariants guarantee a valid line")
}

/// A line is the closure of a one-dimensional torus orbit precisely when it
/// has exactly two boundary points.
pub fn detect_toric(line: &Line) -> bool {
    line.boundary_points().len() == 2
}

// ---------------------------------------------------------------------------
// The cone C and the semi-canonical embedding
// ---------------------------------------------------------------------------

/// The block vector $e_i \in \mathbb{Z}^m$ ($e_0 = -\sum_{i\ge1} e_i$).
fn e_block(i: usize, m: usize) -> Vec<Rat> {
    let mut v = vec![Rat::zero(); m];
    if i == 0 {
        for x in v.iter_mut() {
            *x = -Rat::one();
        }
    } else {
        v[i - 1] = Rat::one();
    }
    v
}

/// The cone $C = \mathbb{Q}_{\ge0}(\bigcup_i \Delta_i\times e_i \cup
/// \sigma\times 0) \subset N_\mathbb{Q}\times\mathbb{Q}^m$: each vertex $w$
/// of $\Delta_i$ contributes the primitive vector on the ray through
/// $(w, e_i)$, empty coefficients contribute nothing, and $\sigma\times 0$ is
/// always included. Errors when the result is not pointed.
pub fn build_cone_c(d: &PolyhedralDivisor) -> Result<Cone, TGeomError> {
    let r = d.lattice_rank();
    let m = d.m();
    let mut gens: Vec<Vec<Int>> = Vec::new();
    for (i, delta) in d.coefficients().iter().enumerate() {
        if delta.is_empty() {
            continue;
        }
        let block = e_block(i, m);
        for v in delta.vertices() {
            let mut w: RatVec = v.clone();
            w.extend(block.iter().cloned());
            gens.push(primitive_of_rational(&w));
        }
    }
    for ray in d.tailcone().rays() {
        let mut w = ray.clone();
        w.extend(std::iter::repeat(Int::zero()).take(m));
        gens.push(w);
    }
    let c = Cone::from_rays(r + m, &gens);
    if !c.is_pointed() {
        return Err(TGeomError::NotPointed);
    }
    Ok(c)
}

/// The semi-canonical embedding data: the cone $C$, its dual, and a sorted
/// Hilbert basis $H$ of $C^\vee\cap(M\times\mathbb{Z}^m)$ whose elements name
/// the coordinates $x_1,\dots,x_n$.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiCanonicalEmbedding {
    pub cone_c: Cone,
    pub dual_c: Cone,
    pub hilbert: Vec<Vec<Int>>,
    pub lattice_rank: usize,
    pub m: usize,
}

impl SemiCanonicalEmbedding {
    /// Number of coordinates $n = |H|$.
    pub fn n(&self) -> usize {
        self.hilbert.len()
    }

    /// Display name of the k-th coordinate (1-indexed: `x1`, …, `xn`).
    pub fn var_name(k: usize) -> String {
        format!("x{}", k + 1)
    }

    /// The $(u, v)$ column of the k-th coordinate (0-indexed).
    pub fn degree(&self, k: usize) -> &[Int] {
        &self.hilbert[k]
    }

    /// Split a Hilbert-basis column into its $u \in M$ and $v \in \mathbb{Z}^m$ parts.
    pub fn split<'a>(&self, col: &'a [Int]) -> (&'a [Int], &'a [Int]) {
        col.split_at(self.lattice_rank)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rank_N": self.lattice_rank,
            "m": self.m,
            "cone": self.cone_c.to_json(),
            "dual": self.dual_c.to_json(),
            "hilbert_basis": int_rows_json(&self.hilbert),
            "variables": serde_json::Value::Array(
                (0..self.n()).map(|k| serde_json::Value::String(Self::var_name(k))).collect()
            ),
        })
    }
}

/// Compose [`build_cone_c`], [`dual_cone`], and a Hilbert basis computation
/// into the semi-canonical embedding, with variables in ascending
/// lexicographic Hilbert-basis order.
pub fn build_embedding(d: &PolyhedralDivisor) -> Result<SemiCanonicalEmbedding, TGeomError> {
    let cone_c = build_cone_c(d)?;
    let dual_c = dual_cone(&cone_c);
    let hilbert = hilbert_basis(&dual_c).map_err(|e| match e {
        PolyError::NotPointed => TGeomError::DualNotPointed,
        other => TGeomError::InvalidDivisor(other.to_string()),
    })?;
    Ok(SemiCanonicalEmbedding {
        cone_c,
        dual_c,
        hilbert,
        lattice_rank: d.lattice_rank(),
        m: d.m(),
    })
}

// ---------------------------------------------------------------------------
// Admissibility (normality of boundary fibers)
// ---------------------------------------------------------------------------

/// Witness of an admissibility failure: the boundary-point index and the
/// functional $u$ at which more than one coinciding coefficient has a
/// non-integral support value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibilityWitness {
    pub boundary_index: usize,
    pub functional: Vec<Int>,
}

/// Result of an admissibility check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibleResult {
    pub admissible: bool,
    pub witness: Option<AdmissibilityWitness>,
}

/// Core admissibility test over explicit coincidence classes: for every
/// class, either some member coefficient is empty, or for every $u$ in the
/// given generating set of $\sigma^\vee\cap M$ at most one member has
/// non-integral support value $\Delta_i(u)$.
pub fn check_admissible(
    coefficients: &[Polyhedron],
    groups: &[Vec<usize>],
    sigma_dual_gens: &[Vec<Int>],
) -> AdmissibleResult {
    for (gi, group) in groups.iter().enumerate() {
        if group.iter().any(|&i| coefficients[i].is_empty()) {
            continue;
        }
        for u in sigma_dual_gens {
            let u_rat: RatVec = u.iter().map(|x| Rat::from_integer(x.clone())).collect();
            let mut non_integral = 0usize;
            for &i in group {
                match support_value(&coefficients[i], &u_rat) {
                    Ok(SupportValue::Finite(val)) => {
                        if !val.denom().is_one() {
                            non_integral += 1;
                        }
                    }
                    Ok(SupportValue::PlusInfinity) => unreachable!("empty handled above"),
                    Err(_) => {
                        // u outside the dual of the tailcone cannot happen for
                        // generators of sigma-dual; treat defensively as failure.
                        non_integral += 2;
                    }
                }
            }
            if non_integral > 1 {
                return AdmissibleResult {
                    admissible: false,
                    witness: Some(AdmissibilityWitness {
                        boundary_index: gi,
                        functional: u.clone(),
                    }),
                };
            }
        }
    }
    AdmissibleResult {
        admissible: true,
        witness: None,
    }
}

/// Admissibility of divisor coefficients grouped by the coincidence classes
/// of a line's boundary points.
pub fn check_admissible_line(
    coefficients: &[Polyhedron],
    line: &Line,
    sigma: &Cone,
) -> AdmissibleResult {
    let gens = lattice_generators(&dual_cone(sigma));
    check_admissible(coefficients, &line.vanishing_groups(), &gens)
}

/// Admissibility of a divisor with its own line (points pairwise distinct, so
/// every coincidence class is a singleton and the result is always true; kept
/// for uniformity).
pub fn check_admissible_divisor(d: &PolyhedralDivisor) -> AdmissibleResult {
    let line = line_from_divisor(d);
    check_admissible_line(d.coefficients(), &line, d.tailcone())
}

/// Membership test of $(u, v)$ in $C^\vee$ via support functions:
/// $u \in \sigma^\vee$, $v_i \ge -\Delta_i(u)$ for $i \ge 1$, and
/// $\sum_i v_i \le \Delta_0(u)$, with empty coefficients imposing nothing.
pub fn dual_membership_by_support(d: &PolyhedralDivisor, u: &[Rat], v: &[Rat]) -> bool {
    assert_eq!(u.len(), d.lattice_rank());
    assert_eq!(v.len(), d.m());
    for g in d.tailcone().generators() {
        if dot_rat_int(u, g).is_negative() {
            return false;
        }
    }
    for i in 1..=d.m() {
        match support_value(d.coefficient(i), u) {
            Ok(SupportValue::Finite(s)) => {
                if v[i - 1] < -s {
                    return false;
                }
            }
            Ok(SupportValue::PlusInfinity) => {}
            Err(_) => return false,
        }
    }
    let total: Rat = v.iter().fold(Rat::zero(), |a, b| a + b);
    match support_value(d.coefficient(0), u) {
        Ok(SupportValue::Finite(s)) => total <= s,
        Ok(SupportValue::PlusInfinity) => true,
        Err(_) => false,
    }
}
