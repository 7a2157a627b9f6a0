//! Homogeneous valuations on the coordinate ring of an embedded line.
//!
//! A rank-$r$ homogeneous valuation is assembled from three pieces of data:
//! a homomorphism $\psi\colon M \to \mathbb{Z}^r$ on the grading lattice, a
//! boundary point $Q$ of the line (given by its index in the boundary list),
//! and a direction $\gamma \in \mathbb{Z}^r$ with $\gamma \ge_{\mathrm{lex}}
//! 0$.  On a homogeneous element $f\cdot\chi^u$ it takes the value
//!
//! $$ \mathfrak{v}(f\cdot\chi^u) = \psi(u) + \mathrm{ord}_Q(f)\cdot\gamma
//!    \in \mathbb{Z}^r, $$
//!
//! where $\mathrm{ord}_Q$ is the vanishing order at $Q$ of the restriction of
//! $f$ to the line.  The value group is $\mathbb{Z}^r$ ordered
//! lexicographically.
//!
//! The module computes:
//! * exact valuation values, including cancellation between terms, by
//!   restricting to the parametrized line and factoring the binary form at
//!   $Q$ ([`valuation_eval`]);
//! * the value semigroup together with its defining lattice region
//!   $\{-\lfloor\Delta_j(u)\rfloor \le \lambda \le
//!   \sum_{i\ne j}\lfloor\Delta_i(u)\rfloor\}$ and a membership test
//!   ([`value_semigroup`]);
//! * a bounded-degree certificate that the distinguished generators generate
//!   the value semigroup, i.e. that they form a Khovanskii basis
//!   ([`khovanskii_check`]);
//! * the weight matrix whose columns are the generator values, cross-checked
//!   against the tropical variety via iterated initial forms
//!   ([`weight_matrix_from_valuation`]).

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{Signed, Zero};

use crate::exactla::{dot_int, int, primitive_of_rational, Int, Rat, RatMat};
use crate::idealkit::{ideal_presentation, GradedLaurentElement, IdealError, XPolynomial};
use crate::polycore::SupportValue;
use crate::tgeom::{BoundaryPoint, Line, PolyhedralDivisor, SemiCanonicalEmbedding};
use crate::tropkit::{iterated_initial, WeightMatrix};

/// Errors raised by valuation computations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValError {
    /// The zero element has no valuation value.
    #[error("the zero element has no valuation value")]
    ZeroElement,
    /// The element restricts to zero on the line, so its order is infinite.
    #[error("the element vanishes identically on the line; its order at the center is infinite")]
    VanishesOnLine,
    /// With a custom order table the order of a sum is only defined when a
    /// unique term realizes the minimum.
    #[error("ambiguous order: several terms realize the minimal candidate value under the custom order table")]
    AmbiguousOrder,
    /// The valuation center must be one of the line's boundary points.
    #[error("valuation center {index} is not a boundary point (the line has {count}); re-embed the line so the center becomes a boundary point")]
    NotBoundaryPoint { index: usize, count: usize },
    /// Operations on semigroup regions and weight matrices need a genuine
    /// boundary center, not a custom order table.
    #[error("not applicable for a custom order table center; re-embed the line so the center becomes a boundary point")]
    CustomCenter,
    /// The valuation does not have full rank.
    #[error("the valuation is not of full rank: psi must be injective and gamma must avoid its image")]
    NotFullRank,
    /// Incompatible dimensions between the valuation and the other inputs.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// Malformed serialized data.
    #[error("parse error: {0}")]
    Parse(String),
    /// Internal pipeline failure (dependency error or exceeded search budget).
    #[error("pipeline error: {0}")]
    Pipeline(String),
}

impl From<IdealError> for ValError {
    fn from(e: IdealError) -> Self {
        ValError::Pipeline(e.to_string())
    }
}

/// `true` when the first nonzero entry of `v` is positive (or `v = 0`).
fn lex_nonneg(v: &[Int]) -> bool {
    for x in v {
        if !x.is_zero() {
            return x.is_positive();
        }
    }
    true
}

/// Solve the rational linear system `rows * x = rhs`.
///
/// Returns one solution when the system is consistent and `None` otherwise.
/// (When the kernel is nontrivial the returned solution is an arbitrary
/// representative; callers enumerate the kernel themselves.)
pub(crate) fn solve_rational(rows: &[Vec<Rat>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    let n = rows.first().map_or(0, |r| r.len());
    let aug: Vec<Vec<Rat>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut v = r.clone();
            v.push(-b.clone());
            v
        })
        .collect();
    let mat = RatMat::from_rows(aug).ok()?;
    for y in mat.nullspace() {
        if !y[n].is_zero() {
            let scale = y[n].clone();
            return Some(y[..n].iter().map(|c| c / &scale).collect());
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Homogeneous valuations
// ---------------------------------------------------------------------------

/// A homogeneous valuation $\mathfrak{v}(f\chi^u) = \psi(u) +
/// \mathrm{ord}_Q(f)\gamma$ with values in lexicographically ordered
/// $\mathbb{Z}^r$.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogeneousValuation {
    /// Rows of the matrix of $\psi\colon M \to \mathbb{Z}^r$ ($r$ rows, one
    /// column per lattice coordinate).
    psi: Vec<Vec<Int>>,
    /// Index of the center $Q$ in the line's boundary-point list.
    point_index: usize,
    /// Direction $\gamma \in \mathbb{Z}^r$, lexicographically nonnegative.
    gamma: Vec<Int>,
    /// Overrides the order table of the center; used to probe centers that
    /// are not boundary points.  Restricts evaluation to elements whose
    /// minimal term is unique and disables semigroup/weight operations.
    custom_ord_table: Option<Vec<Int>>,
}

impl HomogeneousValuation {
    pub fn new(
        psi: Vec<Vec<Int>>,
        point_index: usize,
        gamma: Vec<Int>,
    ) -> Result<Self, ValError> {
        if psi.is_empty() {
            return Err(ValError::DimensionMismatch("psi has no rows".into()));
        }
        let cols = psi[0].len();
        if cols == 0 {
            return Err(ValError::DimensionMismatch("psi has no columns".into()));
        }
        if psi.iter().any(|r| r.len() != cols) {
            return Err(ValError::DimensionMismatch(
                "psi rows have unequal lengths".into(),
            ));
        }
        if gamma.len() != psi.len() {
            return Err(ValError::DimensionMismatch(format!(
                "gamma has length {} but psi has {} rows",
                gamma.len(),
                psi.len()
            )));
        }
        if !lex_nonneg(&gamma) {
            return Err(ValError::DimensionMismatch(
                "gamma must be lexicographically nonnegative".into(),
            ));
        }
        Ok(HomogeneousValuation {
            psi,
            point_index,
            gamma,
            custom_ord_table: None,
        })
    }

    /// Replace the order table of the center by an explicit table.  The
    /// result evaluates monomials (and sums with a unique minimal term) but
    /// is rejected by the semigroup and weight-matrix operations.
    pub fn with_custom_ord_table(mut self, table: Vec<Int>) -> Self {
        self.custom_ord_table = Some(table);
        self
    }

    /// Rank $r$ of the value group $\mathbb{Z}^r$.
    pub fn target_rank(&self) -> usize {
        self.gamma.len()
    }

    /// Rank of the grading lattice $M$ (number of columns of $\psi$).
    pub fn lattice_rank(&self) -> usize {
        self.psi[0].len()
    }

    pub fn point_index(&self) -> usize {
        self.point_index
    }

    pub fn gamma(&self) -> &[Int] {
        &self.gamma
    }

    pub fn psi(&self) -> &[Vec<Int>] {
        &self.psi
    }

    pub fn custom_ord_table(&self) -> Option<&[Int]> {
        self.custom_ord_table.as_deref()
    }

    /// Apply $\psi$ to a lattice point.
    pub fn psi_apply(&self, u: &[Int]) -> Vec<Int> {
        self.psi.iter().map(|row| dot_int(row, u)).collect()
    }

    /// Full rank means: $\psi$ is injective and no nonzero multiple of
    /// $\gamma$ lies in the image of $\psi$; then $\mathfrak{v}$ has rational
    /// rank $\operatorname{rank} M + 1$ and distinguishes the graded pieces.
    pub fn is_full_rank(&self) -> bool {
        if self.gamma.iter().all(Zero::is_zero) {
            return false;
        }
        let rows: Vec<Vec<Rat>> = self
            .psi
            .iter()
            .map(|r| r.iter().map(|x| Rat::from(x.clone())).collect())
            .collect();
        let rank = RatMat::from_rows(rows.clone())
            .expect("rectangular psi")
            .rank();
        if rank != self.lattice_rank() {
            return false;
        }
        let rhs: Vec<Rat> = self.gamma.iter().map(|x| Rat::from(x.clone())).collect();
        solve_rational(&rows, &rhs).is_none()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "psi": self.psi.iter().map(|row| {
                row.iter().map(|x| serde_json::json!(x.to_string().parse::<i64>().unwrap_or_default())).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
            "point_index": self.point_index,
            "gamma": self.gamma.iter().map(|x| serde_json::json!(x.to_string().parse::<i64>().unwrap_or_default())).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, ValError> {
        let psi_v = v
            .get("psi")
            .and_then(|x| x.as_array())
            .ok_or_else(|| ValError::Parse("missing \"psi\" matrix".into()))?;
        let mut psi = Vec::with_capacity(psi_v.len());
        for row in psi_v {
            psi.push(parse_int_vec(row, "psi row")?);
        }
        let point_index = v
            .get("point_index")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| ValError::Parse("missing \"point_index\"".into()))?
            as usize;
        let gamma = parse_int_vec(
            v.get("gamma")
                .ok_or_else(|| ValError::Parse("missing \"gamma\"".into()))?,
            "gamma",
        )?;
        HomogeneousValuation::new(psi, point_index, gamma)
    }
}

fn parse_int_vec(v: &serde_json::Value, what: &str) -> Result<Vec<Int>, ValError> {
    let arr = v
        .as_array()
        .ok_or_else(|| ValError::Parse(format!("{what} must be an array")))?;
    arr.iter()
        .map(|x| {
            x.as_i64()
                .map(int)
                .ok_or_else(|| ValError::Parse(format!("{what} entries must be integers")))
        })
        .collect()
}

fn int_vec_json(v: &[Int]) -> serde_json::Value {
    serde_json::Value::Array(
        v.iter()
            .map(|x| serde_json::json!(x.to_string().parse::<i64>().unwrap_or_default()))
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// Exact orders along the line
// ---------------------------------------------------------------------------

/// Multiply two binary forms given by coefficient vectors; index $j$ holds
/// the coefficient of $s_0^{d-j}s_1^j$.
fn binary_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn binary_pow(base: &[Rat], e: usize) -> Vec<Rat> {
    let mut out = vec![Rat::from(int(1))];
    for _ in 0..e {
        out = binary_mul(&out, base);
    }
    out
}

/// Evaluate a binary form at the projective point `(p0, p1)`.
fn eval_form(coeffs: &[Rat], p: &(Int, Int)) -> Rat {
    let d = coeffs.len() - 1;
    let mut acc = Rat::zero();
    for (j, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let term = Rat::from(p.0.pow((d - j) as u32)) * Rat::from(p.1.pow(j as u32));
        acc += c * term;
    }
    acc
}

/// Divide a binary form by the linear form `p1*s0 - p0*s1` vanishing at the
/// projective point `(p0, p1)`.  Returns `None` when the division is not
/// exact.
fn divide_at_point(coeffs: &[Rat], p: &(Int, Int)) -> Option<Vec<Rat>> {
    let d = coeffs.len() - 1;
    if d == 0 {
        return None;
    }
    let a = Rat::from(p.1.clone());
    let b = -Rat::from(p.0.clone());
    let mut q = vec![Rat::zero(); d];
    if !a.is_zero() {
        q[0] = &coeffs[0] / &a;
        for j in 1..d {
            q[j] = (&coeffs[j] - &(&b * &q[j - 1])) / &a;
        }
        if coeffs[d] != &b * &q[d - 1] {
            return None;
        }
    } else {
        if !coeffs[0].is_zero() {
            return None;
        }
        for j in 0..d {
            q[j] = &coeffs[j + 1] / &b;
        }
    }
    Some(q)
}

/// Vanishing multiplicity of a nonzero binary form at a projective point.
fn multiplicity_at(coeffs: &[Rat], p: &(Int, Int)) -> usize {
    let mut f = coeffs.to_vec();
    let mut mult = 0usize;
    loop {
        if !eval_form(&f, p).is_zero() {
            return mult;
        }
        f = divide_at_point(&f, p).expect("form vanishing at a point is divisible by its linear form");
        mult += 1;
    }
}

/// Exact vanishing order at the boundary point `q` of the restriction of the
/// Laurent polynomial $\sum c_v z^v$ to the line.
///
/// Writing $v_{\min}$ for the componentwise minimum of the exponents, the
/// restriction equals $z^{v_{\min}}\cdot P(s_0,s_1)/\ell_0^D$ for a binary
/// form $P$ of degree $D$, so the order is
/// $\langle v_{\min}, \mathrm{ord}(Q)\rangle + \mathrm{mult}_Q(P) -
/// D\cdot\mathrm{mult}_Q(\ell_0)$.
fn ord_on_line(
    terms: &BTreeMap<Vec<Int>, Rat>,
    line: &Line,
    q: &BoundaryPoint,
) -> Result<Int, ValError> {
    let m = line.ambient();
    let mut vmin: Vec<Int> = terms.keys().next().expect("nonempty").clone();
    for v in terms.keys() {
        for i in 0..m {
            if v[i] < vmin[i] {
                vmin[i] = v[i].clone();
            }
        }
    }
    let shifted: Vec<(Vec<usize>, &Rat)> = terms
        .iter()
        .map(|(v, c)| {
            let w: Vec<usize> = (0..m)
                .map(|i| {
                    let d = &v[i] - &vmin[i];
                    d.to_string().parse::<usize>().expect("small shift")
                })
                .collect();
            (w, c)
        })
        .collect();
    let cap = shifted
        .iter()
        .map(|(w, _)| w.iter().sum::<usize>())
        .max()
        .unwrap_or(0);
    let forms = line.forms();
    let lin: Vec<Vec<Rat>> = forms.iter().map(|(c0, c1)| vec![c0.clone(), c1.clone()]).collect();
    let mut acc = vec![Rat::zero(); cap + 1];
    for (w, c) in &shifted {
        let total: usize = w.iter().sum();
        let mut f = vec![(*c).clone()];
        for (i, wi) in w.iter().enumerate() {
            if *wi > 0 {
                f = binary_mul(&f, &binary_pow(&lin[i + 1], *wi));
            }
        }
        if cap > total {
            f = binary_mul(&f, &binary_pow(&lin[0], cap - total));
        }
        for (j, x) in f.into_iter().enumerate() {
            acc[j] += x;
        }
    }
    if acc.iter().all(Zero::is_zero) {
        return Err(ValError::VanishesOnLine);
    }
    let mult = multiplicity_at(&acc, &q.param);
    let ell0_mult: Int = if q.vanishing.contains(&0) { int(1) } else { int(0) };
    Ok(dot_int(&vmin, &q.ord_table) + int(mult as i64) - int(cap as i64) * ell0_mult)
}

/// Evaluate the valuation on a homogeneous element $f\cdot\chi^u$.
///
/// With a boundary-point center the order of $f$ is computed exactly from
/// the restriction to the line (cancellation between terms is handled; an
/// element restricting to zero is rejected).  With a custom order table only
/// elements whose minimal candidate order is attained by a unique term are
/// accepted.
pub fn valuation_eval(
    val: &HomogeneousValuation,
    g: &GradedLaurentElement,
    line: &Line,
) -> Result<Vec<Int>, ValError> {
    if g.terms.is_empty() {
        return Err(ValError::ZeroElement);
    }
    if g.degree.len() != val.lattice_rank() {
        return Err(ValError::DimensionMismatch(format!(
            "element degree has length {} but psi expects {}",
            g.degree.len(),
            val.lattice_rank()
        )));
    }
    let m = line.ambient();
    if g.terms.keys().any(|v| v.len() != m) {
        return Err(ValError::DimensionMismatch(
            "term exponents do not match the line's torus rank".into(),
        ));
    }
    let ord: Int = match &val.custom_ord_table {
        Some(table) => {
            if table.len() != m {
                return Err(ValError::DimensionMismatch(
                    "custom order table does not match the line's torus rank".into(),
                ));
            }
            let candidates: Vec<Int> = g.terms.keys().map(|v| dot_int(v, table)).collect();
            let min = candidates.iter().min().expect("nonempty").clone();
            if candidates.iter().filter(|c| **c == min).count() > 1 {
                return Err(ValError::AmbiguousOrder);
            }
            min
        }
        None => {
            let points = line.boundary_points();
            let q = points
                .get(val.point_index)
                .ok_or(ValError::NotBoundaryPoint {
                    index: val.point_index,
                    count: points.len(),
                })?;
            if g.terms.len() == 1 {
                let v = g.terms.keys().next().expect("single term");
                dot_int(v, &q.ord_table)
            } else {
                ord_on_line(&g.terms, line, q)?
            }
        }
    };
    let psi_u = val.psi_apply(&g.degree);
    Ok(psi_u
        .into_iter()
        .zip(&val.gamma)
        .map(|(p, gam)| p + &ord * gam)
        .collect())
}

// ---------------------------------------------------------------------------
// Value semigroups
// ---------------------------------------------------------------------------

/// One-sided or two-sided bounds of a region fiber.
type Interval = (Option<Int>, Option<Int>);

/// The value semigroup $S = \mathfrak{v}(A(L)\setminus\{0\})$ of a full-rank
/// homogeneous valuation, presented by its generator values and the lattice
/// region
/// $\{(u,\lambda) : u \in \sigma^\vee,\ -{\textstyle\sum_{i\in V}}
/// \lfloor\Delta_i(u)\rfloor \le \lambda \le
/// {\textstyle\sum_{i\notin V}}\lfloor\Delta_i(u)\rfloor\}$,
/// where $V$ is the set of coordinates vanishing at the center; the
/// projection $\rho(u,\lambda) = \psi(u) + \lambda\gamma$ maps the region
/// bijectively onto $S$.
#[derive(Debug, Clone)]
pub struct ValueSemigroup {
    target_rank: usize,
    generator_values: Vec<Vec<Int>>,
    variable_values: Vec<Vec<Int>>,
    psi: Vec<Vec<Int>>,
    gamma: Vec<Int>,
    point_index: usize,
    vanishing: Vec<usize>,
    divisor: PolyhedralDivisor,
}

impl ValueSemigroup {
    /// Rank of the ambient value lattice $\mathbb{Z}^r$.
    pub fn target_rank(&self) -> usize {
        self.target_rank
    }

    /// Distinct generator values, sorted lexicographically.
    pub fn generator_values(&self) -> &[Vec<Int>] {
        &self.generator_values
    }

    /// Value of each embedding variable, in variable order (with repeats).
    pub fn variable_values(&self) -> &[Vec<Int>] {
        &self.variable_values
    }

    pub fn point_index(&self) -> usize {
        self.point_index
    }

    /// Bounds of the region fiber over `u`: `None` when `u` is outside
    /// $\sigma^\vee$, otherwise lower/upper bounds for $\lambda$ (`None` on a
    /// side means unbounded, which only happens with empty coefficients).
    pub fn region_interval(&self, u: &[Int]) -> Option<Interval> {
        let sigma = self.divisor.tailcone();
        for gener in sigma.generators() {
            if dot_int(gener, u).is_negative() {
                return None;
            }
        }
        let urat: Vec<Rat> = u.iter().map(|x| Rat::from(x.clone())).collect();
        let mut lo_sum: Option<Int> = Some(int(0));
        let mut hi_sum: Option<Int> = Some(int(0));
        for i in 0..=self.divisor.m() {
            let sv = self.divisor.support(i, &urat).ok()?;
            let fl: Option<Int> = match sv {
                SupportValue::Finite(r) => Some(r.floor().to_integer()),
                SupportValue::PlusInfinity => None,
            };
            let side = if self.vanishing.contains(&i) {
                &mut lo_sum
            } else {
                &mut hi_sum
            };
            *side = match (side.take(), fl) {
                (Some(s), Some(f)) => Some(s + f),
                _ => None,
            };
        }
        Some((lo_sum.map(|s| -s), hi_sum))
    }

    /// Does the lattice point `(u, lambda)` lie in the defining region?
    pub fn region_contains(&self, u: &[Int], lambda: &Int) -> bool {
        match self.region_interval(u) {
            None => false,
            Some((lo, hi)) => {
                lo.map_or(true, |l| *lambda >= l) && hi.map_or(true, |h| *lambda <= h)
            }
        }
    }

    /// Membership test: is `w` the value of some nonzero element, i.e. does
    /// `w = rho(u, lambda)` for a lattice point of the region?  The search
    /// over `rho`-preimages is exact when `[psi | gamma]` is injective and a
    /// bounded kernel enumeration otherwise.
    pub fn contains(&self, w: &[Int]) -> Result<bool, ValError> {
        if w.len() != self.target_rank {
            return Err(ValError::DimensionMismatch(format!(
                "query vector has length {} but values live in rank {}",
                w.len(),
                self.target_rank
            )));
        }
        let rank = self.psi[0].len();
        let rows: Vec<Vec<Rat>> = self
            .psi
            .iter()
            .zip(&self.gamma)
            .map(|(row, g)| {
                let mut r: Vec<Rat> = row.iter().map(|x| Rat::from(x.clone())).collect();
                r.push(Rat::from(g.clone()));
                r
            })
            .collect();
        let rhs: Vec<Rat> = w.iter().map(|x| Rat::from(x.clone())).collect();
        let Some(x0) = solve_rational(&rows, &rhs) else {
            return Ok(false);
        };
        let kernel = RatMat::from_rows(rows).expect("rectangular").nullspace();
        let check = |x: &[Rat]| -> bool {
            if x.iter().any(|c| !c.is_integer()) {
                return false;
            }
            let u: Vec<Int> = x[..rank].iter().map(|c| c.to_integer()).collect();
            let lambda = x[rank].to_integer();
            self.region_contains(&u, &lambda)
        };
        if kernel.is_empty() {
            return Ok(check(&x0));
        }
        // Bounded enumeration along the kernel lattice.
        let basis: Vec<Vec<Int>> = kernel.iter().map(|k| primitive_of_rational(k)).collect();
        if basis.len() > 3 {
            return Err(ValError::Pipeline(
                "kernel of [psi | gamma] has dimension > 3; membership search not supported".into(),
            ));
        }
        const RADIUS: i64 = 12;
        let dims = basis.len();
        let mut counters = vec![-RADIUS; dims];
        loop {
            let mut x = x0.clone();
            for (c, k) in counters.iter().zip(&basis) {
                for (xi, ki) in x.iter_mut().zip(k) {
                    *xi += Rat::from(int(*c) * ki);
                }
            }
            if check(&x) {
                return Ok(true);
            }
            let mut pos = 0;
            loop {
                if pos == dims {
                    return Ok(false);
                }
                counters[pos] += 1;
                if counters[pos] <= RADIUS {
                    break;
                }
                counters[pos] = -RADIUS;
                pos += 1;
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rank": self.target_rank,
            "generators": self.generator_values.iter().map(|v| int_vec_json(v)).collect::<Vec<_>>(),
            "region": {
                "point_index": self.point_index,
                "vanishing": self.vanishing.clone(),
                "sigma_rays": self.divisor.tailcone().rays().iter().map(|r| int_vec_json(r)).collect::<Vec<_>>(),
                "lower": "-sum_{i in vanishing} floor(Delta_i(u))",
                "upper": "sum_{i not in vanishing} floor(Delta_i(u))",
            },
        })
    }
}

/// Value of the `k`-th embedding variable under the valuation with order
/// table `table`: the variable is the monomial $z^v\chi^u$ read off from the
/// `k`-th Hilbert-basis column.
fn variable_value(
    e: &SemiCanonicalEmbedding,
    val: &HomogeneousValuation,
    table: &[Int],
    k: usize,
) -> Vec<Int> {
    let rank = e.lattice_rank;
    let h = &e.hilbert[k];
    let u = &h[..rank];
    let v = &h[rank..];
    let lambda = dot_int(v, table);
    val.psi_apply(u)
        .into_iter()
        .zip(&val.gamma)
        .map(|(p, g)| p + &lambda * g)
        .collect()
}

/// Resolve the center of a valuation to a boundary point of the line,
/// rejecting custom order tables and out-of-range indices.
fn center_of<'l>(
    val: &HomogeneousValuation,
    line: &'l Line,
) -> Result<&'l BoundaryPoint, ValError> {
    if val.custom_ord_table.is_some() {
        return Err(ValError::CustomCenter);
    }
    let points = line.boundary_points();
    points.get(val.point_index).ok_or(ValError::NotBoundaryPoint {
        index: val.point_index,
        count: points.len(),
    })
}

/// Compute the value semigroup of a full- or partial-rank homogeneous
/// valuation centered at a boundary point of the line.
pub fn value_semigroup(
    e: &SemiCanonicalEmbedding,
    line: &Line,
    d: &PolyhedralDivisor,
    val: &HomogeneousValuation,
) -> Result<ValueSemigroup, ValError> {
    if val.lattice_rank() != e.lattice_rank || e.lattice_rank != d.lattice_rank() {
        return Err(ValError::DimensionMismatch(
            "psi, embedding and divisor must share the grading lattice rank".into(),
        ));
    }
    if line.ambient() != d.m() {
        return Err(ValError::DimensionMismatch(
            "line and divisor have different torus ranks".into(),
        ));
    }
    let q = center_of(val, line)?;
    let table = q.ord_table.clone();
    let n = e.n();
    let variable_values: Vec<Vec<Int>> =
        (0..n).map(|k| variable_value(e, val, &table, k)).collect();
    let generator_values: Vec<Vec<Int>> = variable_values
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let sg = ValueSemigroup {
        target_rank: val.target_rank(),
        generator_values,
        variable_values,
        psi: val.psi.clone(),
        gamma: val.gamma.clone(),
        point_index: val.point_index,
        vanishing: q.vanishing.clone(),
        divisor: d.clone(),
    };
    // Every generator value must be the projection of a region lattice point:
    // the variable z^v chi^u itself provides (u, <v, ord(Q)>).
    let rank = e.lattice_rank;
    for (k, h) in e.hilbert.iter().enumerate() {
        let u = &h[..rank];
        let lambda = dot_int(&h[rank..], &table);
        if !sg.region_contains(u, &lambda) {
            return Err(ValError::Pipeline(format!(
                "generator value of variable {} is not the projection of a region lattice point",
                k + 1
            )));
        }
    }
    Ok(sg)
}

// ---------------------------------------------------------------------------
// Khovanskii certificates
// ---------------------------------------------------------------------------

/// A degree, monomial and value witnessing that the generator values do not
/// generate the observed value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KhovanskiiWitness {
    /// Grading degree of the failing element.
    pub degree: Vec<Int>,
    /// Exponent vector of the failing standard monomial.
    pub exponent: Vec<Int>,
    /// Its valuation value.
    pub value: Vec<Int>,
}

/// Result of a bounded Khovanskii-basis check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KhovanskiiReport {
    /// `true` when every checked value is a nonnegative integer combination
    /// of the generator values.
    pub passed: bool,
    /// Number of grading degrees inspected.
    pub degrees_checked: usize,
    /// Number of basis elements whose values were tested.
    pub elements_checked: usize,
    /// First failing element, if any.
    pub witness: Option<KhovanskiiWitness>,
}

impl KhovanskiiReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "passed": self.passed,
            "degrees_checked": self.degrees_checked,
            "elements_checked": self.elements_checked,
            "witness": self.witness.as_ref().map(|w| serde_json::json!({
                "degree": int_vec_json(&w.degree),
                "exponent": int_vec_json(&w.exponent),
                "value": int_vec_json(&w.value),
            })),
        })
    }
}

/// Index `i >= 1` of a coordinate whose linear form is independent of
/// $\ell_0$, preferring one with a nonzero order at the center so that the
/// standard monomials $g_u z_i^a$ take distinct values.
fn standard_direction(line: &Line, table: &[Int]) -> usize {
    let forms = line.forms();
    let (c0, c1) = &forms[0];
    let independent: Vec<usize> = (1..forms.len())
        .filter(|&i| {
            let (d0, d1) = &forms[i];
            !(c0 * d1 - c1 * d0).is_zero()
        })
        .collect();
    independent
        .iter()
        .copied()
        .find(|&i| !table[i - 1].is_zero())
        .or_else(|| independent.first().copied())
        .expect("a line has a form independent of the zeroth")
}

/// All values reachable as nonnegative integer combinations of the generator
/// values whose grading parts could still reach one of the targets.  States
/// pair a value with its accumulated grading degree; the degree is pruned
/// against the componentwise maximum of the targets' pairings with the
/// tailcone generators.
fn reachable_values(
    gens: &[(Vec<Int>, Vec<Int>)],
    sigma_gens: &[Vec<Int>],
    target_degrees: &[Vec<Int>],
) -> Result<BTreeSet<Vec<Int>>, ValError> {
    let pairing = |u: &[Int]| -> Vec<Int> { sigma_gens.iter().map(|g| dot_int(g, u)).collect() };
    let mut pmax: Vec<Int> = vec![int(0); sigma_gens.len()];
    for t in target_degrees {
        for (slot, p) in pmax.iter_mut().zip(pairing(t)) {
            if p > *slot {
                *slot = p;
            }
        }
    }
    let rank = gens.first().map_or(0, |(_, u)| u.len());
    let zero_state = (vec![int(0); gens.first().map_or(0, |(v, _)| v.len())], vec![int(0); rank]);
    let mut seen: BTreeSet<(Vec<Int>, Vec<Int>)> = BTreeSet::new();
    seen.insert(zero_state.clone());
    let mut work: VecDeque<(Vec<Int>, Vec<Int>)> = VecDeque::new();
    work.push_back(zero_state);
    while let Some((value, u)) = work.pop_front() {
        for (gv, gu) in gens {
            let nu: Vec<Int> = u.iter().zip(gu).map(|(a, b)| a + b).collect();
            if pairing(&nu)
                .iter()
                .zip(&pmax)
                .any(|(p, cap)| p > cap)
            {
                continue;
            }
            let nv: Vec<Int> = value.iter().zip(gv).map(|(a, b)| a + b).collect();
            let state = (nv, nu);
            if seen.insert(state.clone()) {
                if seen.len() > 500_000 {
                    return Err(ValError::Pipeline(
                        "semigroup membership search exceeded its state budget".into(),
                    ));
                }
                work.push_back(state);
            }
        }
    }
    Ok(seen.into_iter().map(|(v, _)| v).collect())
}

/// Bounded certificate that the embedding variables form a Khovanskii basis:
/// for every grading degree `u` with $|u|_\infty \le$ `degree_bound`, the
/// value of every standard monomial of the degree-`u` piece must be a
/// nonnegative integer combination of the generator values.
pub fn khovanskii_check(
    e: &SemiCanonicalEmbedding,
    line: &Line,
    d: &PolyhedralDivisor,
    val: &HomogeneousValuation,
    degree_bound: u32,
) -> Result<KhovanskiiReport, ValError> {
    if val.lattice_rank() != e.lattice_rank || e.lattice_rank != d.lattice_rank() {
        return Err(ValError::DimensionMismatch(
            "psi, embedding and divisor must share the grading lattice rank".into(),
        ));
    }
    let q = center_of(val, line)?;
    let table = &q.ord_table;
    let m = d.m();
    let rank = e.lattice_rank;
    let sigma_gens: Vec<Vec<Int>> = d.tailcone().generators().to_vec();

    // Grading degrees in the box, in lexicographic order.
    let b = degree_bound as i64;
    let mut degrees: Vec<Vec<Int>> = vec![Vec::new()];
    for _ in 0..rank {
        let mut next = Vec::new();
        for prefix in &degrees {
            for c in -b..=b {
                let mut p = prefix.clone();
                p.push(int(c));
                next.push(p);
            }
        }
        degrees = next;
    }

    let dir = standard_direction(line, table);
    let mut targets: Vec<(Vec<Int>, Vec<Int>, Vec<Int>)> = Vec::new(); // (value, u, exponent)
    let mut degrees_checked = 0usize;
    for u in &degrees {
        if sigma_gens.iter().any(|g| dot_int(g, u).is_negative()) {
            continue;
        }
        let urat: Vec<Rat> = u.iter().map(|x| Rat::from(x.clone())).collect();
        let mut floors: Vec<Int> = Vec::with_capacity(m + 1);
        let mut ok = true;
        for i in 0..=m {
            match d.support(i, &urat) {
                Ok(SupportValue::Finite(r)) => floors.push(r.floor().to_integer()),
                Ok(SupportValue::PlusInfinity) => {
                    return Err(ValError::Pipeline(format!(
                        "coefficient {i} is empty, so the graded pieces are infinite-dimensional"
                    )));
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let d_u: Int = floors.iter().sum();
        degrees_checked += 1;
        if d_u.is_negative() {
            continue;
        }
        let base: Vec<Int> = (1..=m).map(|i| -&floors[i]).collect();
        let steps = d_u.to_string().parse::<i64>().expect("small degree");
        for a in 0..=steps {
            let mut v = base.clone();
            v[dir - 1] += int(a);
            let lambda = dot_int(&v, table);
            let value: Vec<Int> = val
                .psi_apply(u)
                .into_iter()
                .zip(&val.gamma)
                .map(|(p, g)| p + &lambda * g)
                .collect();
            targets.push((value, u.clone(), v));
        }
    }

    let n = e.n();
    let gens: Vec<(Vec<Int>, Vec<Int>)> = (0..n)
        .map(|k| {
            let value = variable_value(e, val, table, k);
            let u = e.hilbert[k][..rank].to_vec();
            (value, u)
        })
        .collect();
    let target_degrees: Vec<Vec<Int>> = targets.iter().map(|(_, u, _)| u.clone()).collect();
    let reachable = reachable_values(&gens, &sigma_gens, &target_degrees)?;

    let elements_checked = targets.len();
    for (value, u, v) in targets {
        if !reachable.contains(&value) {
            return Ok(KhovanskiiReport {
                passed: false,
                degrees_checked,
                elements_checked,
                witness: Some(KhovanskiiWitness {
                    degree: u,
                    exponent: v,
                    value,
                }),
            });
        }
    }
    Ok(KhovanskiiReport {
        passed: true,
        degrees_checked,
        elements_checked,
        witness: None,
    })
}

// ---------------------------------------------------------------------------
// Weight matrices from valuations
// ---------------------------------------------------------------------------

/// A weight matrix read off from a full-rank valuation, together with the
/// tropical cross-checks: iterating initial forms along its rows must never
/// produce a monomial, and the first $\gamma$-active row must lie in the
/// tropical cone of the valuation's center.
#[derive(Debug, Clone)]
pub struct ValuationWeightReport {
    /// Integer weight matrix; column `k` is the value of variable `k`.
    pub matrix: Vec<Vec<Int>>,
    /// The same matrix as a tropical weight matrix.
    pub weight_matrix: WeightMatrix,
    /// `true` when no iterated initial form is a monomial.
    pub monomial_free: bool,
    /// Index of the first row in which $\gamma$ acts.
    pub gamma_row: usize,
    /// Index of the boundary point whose tropical cone contains the
    /// $\gamma$-active row, when one matches.
    pub cone_index: Option<usize>,
    /// The iterated initial forms of the presentation generators.
    pub final_initials: Vec<XPolynomial>,
}

impl ValuationWeightReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "matrix": self.matrix.iter().map(|row| int_vec_json(row)).collect::<Vec<_>>(),
            "monomial_free": self.monomial_free,
            "gamma_row": self.gamma_row,
            "cone_index": self.cone_index,
            "final_initials": self.final_initials.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// Express a weight vector as $\varphi(v)$ and decide which boundary point's
/// tropical cone contains it: the torus part of $v$ must be a nonnegative
/// rational multiple of some order table.
fn tropical_cone_of(
    e: &SemiCanonicalEmbedding,
    line: &Line,
    weight: &[Int],
) -> Option<usize> {
    let rank = e.lattice_rank;
    let rows: Vec<Vec<Rat>> = e
        .hilbert
        .iter()
        .map(|h| h.iter().map(|x| Rat::from(x.clone())).collect())
        .collect();
    let rhs: Vec<Rat> = weight.iter().map(|x| Rat::from(x.clone())).collect();
    let v = solve_rational(&rows, &rhs)?;
    let z = &v[rank..];
    if z.iter().all(Zero::is_zero) {
        return None;
    }
    for (j, bp) in line.boundary_points().iter().enumerate() {
        let table = &bp.ord_table;
        let Some(pivot) = table.iter().position(|t| !t.is_zero()) else {
            continue;
        };
        let a = &z[pivot] / Rat::from(table[pivot].clone());
        if a.is_negative() {
            continue;
        }
        if z.iter()
            .zip(table)
            .all(|(zi, ti)| *zi == &a * Rat::from(ti.clone()))
        {
            return Some(j);
        }
    }
    None
}

/// Read off the weight matrix of a full-rank valuation (column `k` = value
/// of variable `k`) and verify it tropically: iterated initial forms of the
/// degree-bounded presentation must stay monomial-free, and the first
/// $\gamma$-active row must land in the tropical cone of the center.
pub fn weight_matrix_from_valuation(
    e: &SemiCanonicalEmbedding,
    line: &Line,
    d: &PolyhedralDivisor,
    val: &HomogeneousValuation,
    degree_bound: u32,
) -> Result<ValuationWeightReport, ValError> {
    if !val.is_full_rank() {
        return Err(ValError::NotFullRank);
    }
    if val.lattice_rank() != e.lattice_rank || e.lattice_rank != d.lattice_rank() {
        return Err(ValError::DimensionMismatch(
            "psi, embedding and divisor must share the grading lattice rank".into(),
        ));
    }
    let q = center_of(val, line)?;
    let table = q.ord_table.clone();
    let n = e.n();
    let r = val.target_rank();
    let columns: Vec<Vec<Int>> = (0..n).map(|k| variable_value(e, val, &table, k)).collect();
    let matrix: Vec<Vec<Int>> = (0..r)
        .map(|i| columns.iter().map(|c| c[i].clone()).collect())
        .collect();
    let rat_rows: Vec<Vec<Rat>> = matrix
        .iter()
        .map(|row| row.iter().map(|x| Rat::from(x.clone())).collect())
        .collect();
    let weight_matrix = WeightMatrix::new(rat_rows)
        .map_err(|err| ValError::Pipeline(err.to_string()))?;
    let presentation = ideal_presentation(e, line, d, degree_bound)?;
    let gens = presentation.all_generators();
    let (final_initials, monomial_seen) = iterated_initial(&gens, &weight_matrix);
    let gamma_row = val
        .gamma
        .iter()
        .position(|g| !g.is_zero())
        .expect("full rank implies gamma nonzero");
    let cone_index = tropical_cone_of(e, line, &matrix[gamma_row]);
    Ok(ValuationWeightReport {
        matrix,
        weight_matrix,
        monomial_free: !monomial_seen,
        gamma_row,
        cone_index,
        final_initials,
    })
}
