//! End-to-end acceptance checks over the shipped fixtures.
//!
//! Each test exercises one documented behavior of the library front to back,
//! asserts the exact expected output, enforces a wall-clock budget, and
//! prints a single `criterion N: PASS` line (visible under `--nocapture`).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use num_traits::{One, Signed, Zero};

use poised_core::exactla::{dot_int, Int, Rat};
use poised_core::idealkit::{
    fiber_points, graded_piece, ideal_membership, ideal_presentation, GradedLaurentElement,
    XPolynomial,
};
use poised_core::polycore::{dual_cone, Cone};
use poised_core::projkit::{nok_body, test_config_fibers, NOBody, PolarizedInput};
use poised_core::tgeom::{
    build_cone_c, build_embedding, line_from_divisor, Line, PolyhedralDivisor,
    SemiCanonicalEmbedding,
};
use poised_core::tropkit::{
    initial_form, rat_weights, trop_x, verify_well_poised, verify_well_poised_supplied,
    SuppliedEmbedding,
};
use poised_core::valkit::{
    khovanskii_check, valuation_eval, value_semigroup, HomogeneousValuation,
};

// ---------------------------------------------------------------- utilities

fn fixture_doc(name: &str) -> serde_json::Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    serde_json::from_str(&text).expect("fixture is valid JSON")
}

fn d6() -> PolyhedralDivisor {
    PolyhedralDivisor::from_json(&fixture_doc("d6.json")).expect("d6 fixture parses")
}

fn pomega() -> PolyhedralDivisor {
    PolyhedralDivisor::from_json(&fixture_doc("pomega.json")).expect("pomega fixture parses")
}

fn ints(v: &[i64]) -> Vec<Int> {
    v.iter().map(|&x| Int::from(x)).collect()
}

fn int_rows(vs: &[&[i64]]) -> Vec<Vec<Int>> {
    vs.iter().map(|v| ints(v)).collect()
}

fn rat1() -> Rat {
    Rat::from_integer(Int::one())
}

/// Assert the budget and print the single status line for a criterion.
fn finish(criterion: usize, start: Instant, budget_ms: u128) {
    let ms = start.elapsed().as_millis();
    assert!(
        ms < budget_ms,
        "criterion {criterion} exceeded its {budget_ms} ms budget ({ms} ms)"
    );
    println!("criterion {criterion}: PASS ({ms} ms)");
}

fn pretty_all(gens: &[XPolynomial]) -> Vec<String> {
    gens.iter().map(|g| g.to_string()).collect()
}

/// All permutations of `0..n` (Heap's algorithm).
fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k {
            go(k - 1, a, out);
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    go(n, &mut a, &mut out);
    out
}

/// Does `f` equal `g` after some variable permutation, per-variable sign
/// flips, and an overall sign?
fn equal_up_to_relabeling(f: &XPolynomial, g: &XPolynomial) -> bool {
    let n = match (f.num_vars(), g.num_vars()) {
        (Some(a), Some(b)) if a == b => a,
        _ => return f.is_zero() && g.is_zero(),
    };
    for perm in permutations(n) {
        for smask in 0u32..(1 << n) {
            for overall in [1i64, -1] {
                let mut mapped: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
                for (e, c) in &f.terms {
                    let mut e2 = vec![0u32; n];
                    let mut c2 = c * Rat::from_integer(Int::from(overall));
                    for (i, &k) in e.iter().enumerate() {
                        e2[perm[i]] = k;
                        if smask >> i & 1 == 1 && k % 2 == 1 {
                            c2 = -c2;
                        }
                    }
                    mapped.insert(e2, c2);
                }
                if mapped == g.terms {
                    return true;
                }
            }
        }
    }
    false
}

/// Find the unique two-term linear generator; return its variable indices
/// and coefficients ((a, ca), (b, cb)).
fn linear_binomial(gens: &[XPolynomial]) -> ((usize, Rat), (usize, Rat)) {
    let mut hit = None;
    for g in gens {
        if g.total_degree() == 1 && g.terms.len() == 2 {
            let parts: Vec<(usize, Rat)> = g
                .terms
                .iter()
                .map(|(e, c)| {
                    assert_eq!(e.iter().sum::<u32>(), 1, "linear generator");
                    (e.iter().position(|&k| k == 1).unwrap(), c.clone())
                })
                .collect();
            assert!(hit.is_none(), "more than one two-term linear generator");
            hit = Some((parts[0].clone(), parts[1].clone()));
        }
    }
    hit.expect("a two-term linear generator exists")
}

/// Substitute `x_a -> scale * x_b` into `f`.
fn substitute_var(f: &XPolynomial, a: usize, b: usize, scale: &Rat) -> XPolynomial {
    let mut terms: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
    for (e, c) in &f.terms {
        let mut e2 = e.clone();
        let k = e2[a];
        e2[a] = 0;
        e2[b] += k;
        let mut c2 = c.clone();
        for _ in 0..k {
            c2 *= scale.clone();
        }
        let entry = terms.entry(e2).or_insert_with(Rat::zero);
        *entry += c2;
    }
    terms.retain(|_, c| !c.is_zero());
    XPolynomial::from_terms(terms)
}

/// Mutual ideal membership of two generating sets at the given degree bound.
fn same_ideal(a: &[XPolynomial], b: &[XPolynomial], bound: u32) -> bool {
    a.iter().all(|f| ideal_membership(f, b, bound))
        && b.iter().all(|f| ideal_membership(f, a, bound))
}

/// The nine 2x2-minor relations of a 3x3 matrix of signed variables,
/// as polynomials in `nvars` variables.
fn minor_relations(matrix: &[[(usize, i64); 3]; 3], nvars: usize) -> Vec<XPolynomial> {
    let mut out = Vec::new();
    for r1 in 0..3 {
        for r2 in r1 + 1..3 {
            for c1 in 0..3 {
                for c2 in c1 + 1..3 {
                    let term = |i: usize, j: usize, k: usize, l: usize, sign: i64| {
                        let (va, sa) = matrix[i][j];
                        let (vb, sb) = matrix[k][l];
                        let mut e = vec![0u32; nvars];
                        e[va] += 1;
                        e[vb] += 1;
                        (e, Rat::from_integer(Int::from(sign * sa * sb)))
                    };
                    let mut terms: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
                    for (e, c) in [term(r1, c1, r2, c2, 1), term(r1, c2, r2, c1, -1)] {
                        *terms.entry(e).or_insert_with(Rat::zero) += c;
                    }
                    terms.retain(|_, c| !c.is_zero());
                    out.push(XPolynomial::from_terms(terms));
                }
            }
        }
    }
    out
}

/// Can `p` be written as a sum of elements of `gens`, with every partial
/// sum staying inside `cone`?  (`p == 0` counts as the empty sum.)
fn decomposes(
    p: &[Int],
    gens: &[Vec<Int>],
    cone: &Cone,
    memo: &mut BTreeMap<Vec<Int>, bool>,
) -> bool {
    if p.iter().all(|x| x.is_zero()) {
        return true;
    }
    if let Some(&v) = memo.get(p) {
        return v;
    }
    memo.insert(p.to_vec(), false); // cycle guard; gens have positive degree
    let mut ok = false;
    for g in gens {
        let q: Vec<Int> = p.iter().zip(g).map(|(a, b)| a - b).collect();
        if cone.contains(&q) && decomposes(&q, gens, cone, memo) {
            ok = true;
            break;
        }
    }
    memo.insert(p.to_vec(), ok);
    ok
}

/// Deterministic linear-congruential sampler.
struct Lcg(u64);

impl Lcg {
    fn next_index(&mut self, len: usize) -> usize {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 33) as usize) % len
    }
}

/// Lattice-point count of the `k`-fold dilation of a body given by
/// inequalities `<a, x> + c >= 0` and rational vertices.
fn dilated_lattice_count(body: &NOBody, k: i64) -> usize {
    let dim = body.vertices[0].len();
    let mut lo = vec![i64::MAX; dim];
    let mut hi = vec![i64::MIN; dim];
    let kk = Rat::from_integer(Int::from(k));
    for v in &body.vertices {
        for (i, x) in v.iter().enumerate() {
            let s = x * kk.clone();
            let fl = i64::try_from(&s.floor().to_integer()).unwrap();
            let ce = i64::try_from(&s.ceil().to_integer()).unwrap();
            lo[i] = lo[i].min(fl);
            hi[i] = hi[i].max(ce);
        }
    }
    let inside = |x: &[Int]| {
        body.inequalities.iter().all(|ineq| {
            let v = dot_int(&ineq.coeffs, x) + &ineq.constant * Int::from(k);
            !v.is_negative()
        })
    };
    let mut count = 0usize;
    let mut cursor = lo.clone();
    'outer: loop {
        let point: Vec<Int> = cursor.iter().map(|&x| Int::from(x)).collect();
        if inside(&point) {
            count += 1;
        }
        for i in 0..dim {
            if cursor[i] < hi[i] {
                cursor[i] += 1;
                continue 'outer;
            }
            cursor[i] = lo[i];
        }
        break;
    }
    count
}

/// Target-value last coordinate (the vanishing-order direction for the
/// fixture valuations, whose `gamma` is the final unit vector).
fn order_part(value: &[Int]) -> Int {
    value.last().unwrap().clone()
}

fn quadric_embedding() -> (PolyhedralDivisor, Line, SemiCanonicalEmbedding) {
    let d = d6();
    let line = line_from_divisor(&d);
    let e = build_embedding(&d).expect("embedding builds");
    (d, line, e)
}

fn rank3_embedding() -> (PolyhedralDivisor, Line, SemiCanonicalEmbedding) {
    let d = pomega();
    let line = line_from_divisor(&d);
    let e = build_embedding(&d).expect("embedding builds");
    (d, line, e)
}

/// The 3x3 presentation matrix of the rank-three fixture's nine quadric
/// relations, as 0-based variable indices in this library's variable order.
const RANK3_MATRIX: [[usize; 3]; 3] = [[4, 0, 2], [8, 3, 7], [6, 1, 5]];

// ---------------------------------------------------------------- criteria

/// Full pipeline on the quadric-surface fixture: cone, dual cone, Hilbert
/// basis, and both defining relations come out exactly.
#[test]
fn criterion_1_quadric_pipeline_is_exact() {
    let t = Instant::now();
    let (d, line, e) = quadric_embedding();

    let c = build_cone_c(&d).expect("cone builds");
    assert_eq!(c.rays(), int_rows(&[&[-1, 0, 2], &[-1, 2, 0], &[3, -2, -2]]));
    let dual = dual_cone(&c);
    assert_eq!(dual.rays(), int_rows(&[&[2, 1, 1], &[2, 1, 2], &[2, 2, 1]]));
    assert_eq!(e.cone_c, c);
    assert_eq!(e.dual_c, dual);
    assert_eq!(
        e.hilbert,
        int_rows(&[&[2, 1, 1], &[2, 1, 2], &[2, 2, 1], &[3, 2, 2]])
    );
    assert_eq!((e.lattice_rank, e.m, e.n()), (1, 2, 4));

    let pres = ideal_presentation(&e, &line, &d, 6).expect("presentation");
    assert_eq!(pretty_all(&pres.toric_generators), ["x4^2 - x1*x2*x3"]);
    assert_eq!(pretty_all(&pres.linear_lift_generators), ["x1 + x2 + x3"]);
    assert!(pres.warnings.is_empty(), "no warnings expected");

    finish(1, t, 1_000);
}

/// Tropicalization of the quadric surface: three maximal cones, every
/// initial ideal matches the degenerate line's ideal, each initial ideal
/// collapses to the same plane quadric after eliminating its linear
/// binomial, and the hand-supplied three-variable embedding fails with a
/// witness on exactly one cone.
#[test]
fn criterion_2_quadric_tropicalization_and_minimal_embedding() {
    let t = Instant::now();
    let (d, line, e) = quadric_embedding();

    let fan = trop_x(&e, &line);
    assert_eq!(fan.maximal_cones.len(), 3);

    let report = verify_well_poised(&e, &line, &d, 6).expect("verification runs");
    assert!(report.well_poised);
    assert_eq!(report.cones.len(), 3);

    // After eliminating the degenerated linear form, every initial ideal is
    // the cuspidal plane quadric x^2 + y^2 z, up to relabeling and signs.
    let target = XPolynomial::from_terms([
        (vec![2, 0, 0, 0], rat1()),
        (vec![0, 2, 1, 0], rat1()),
    ]);
    for cone in &report.cones {
        assert!(cone.matches, "cone at ray {:?} must match", cone.ray);
        let ((a, ca), (b, cb)) = linear_binomial(&cone.initial_gens);
        let scale = -(cb / ca);
        let collapsed: Vec<XPolynomial> = cone
            .initial_gens
            .iter()
            .filter(|g| g.total_degree() > 1)
            .map(|g| substitute_var(g, a, b, &scale))
            .collect();
        assert_eq!(collapsed.len(), 1, "one non-linear generator per cone");
        assert!(
            equal_up_to_relabeling(&collapsed[0], &target),
            "cone at ray {:?} collapses to {}, not the expected quadric",
            cone.ray,
            collapsed[0],
        );
    }

    // The three-column embedding (no fourth generator) is not well-poised:
    // exactly one cone fails, with a witness.
    let emb = SuppliedEmbedding::new(1, 2, int_rows(&[&[3, 2, 2], &[2, 1, 2], &[2, 2, 1]]))
        .expect("supplied embedding");
    let gen = XPolynomial::from_terms([
        (vec![2, 0, 0], rat1()),
        (vec![0, 2, 1], rat1()),
        (vec![0, 1, 2], rat1()),
    ]);
    let supplied =
        verify_well_poised_supplied(&emb, &[gen], &line, 6).expect("supplied verification");
    assert!(!supplied.well_poised);
    let failing: Vec<_> = supplied.cones.iter().filter(|c| !c.matches).collect();
    assert_eq!(failing.len(), 1, "exactly one cone fails");
    assert_eq!(failing[0].ray, ints(&[-1, -1]));
    assert!(
        failing[0].witness.as_deref().is_some_and(|w| !w.is_empty()),
        "failing cone carries a witness"
    );

    finish(2, t, 5_000);
}

/// Full pipeline on the rank-three fixture: nine degree-one generators,
/// defining ideal equal to the nine 2x2 minors of the presentation matrix
/// plus one linear form, three tropical cones whose initial ideals are the
/// minors with the degenerated variable pair identified up to sign, and
/// every special fiber normal.
#[test]
fn criterion_3_rank_three_pipeline() {
    let t = Instant::now();
    let (d, line, e) = rank3_embedding();

    assert_eq!(e.n(), 9);
    // Grading (0,0,1): each generator has degree one.
    for h in &e.hilbert {
        assert_eq!(h[2], Int::one(), "generator {h:?} must have degree 1");
    }

    let pres = ideal_presentation(&e, &line, &d, 6).expect("presentation");
    assert_eq!(pres.toric_generators.len(), 9);
    assert_eq!(pretty_all(&pres.linear_lift_generators), ["x4 + x5 + x6"]);
    assert!(pres.warnings.is_empty());

    // The nine quadrics are exactly the 2x2 minors of the 3x3 matrix.
    let plain: [[(usize, i64); 3]; 3] = RANK3_MATRIX.map(|row| row.map(|v| (v, 1)));
    let minors = minor_relations(&plain, 9);
    assert!(
        same_ideal(&pres.toric_generators, &minors, 3),
        "quadric relations are the minors of the presentation matrix"
    );

    let fan = trop_x(&e, &line);
    assert_eq!(fan.maximal_cones.len(), 3);

    let report = verify_well_poised(&e, &line, &d, 6).expect("verification runs");
    assert!(report.well_poised);
    assert_eq!(report.cones.len(), 3);
    for cone in &report.cones {
        assert!(cone.matches, "cone at ray {:?} must match", cone.ray);
        // The initial ideal is the minors with the degenerated variable
        // pair identified: substitute x_a -> -x_b into every minor.
        let ((a, ca), (b, cb)) = linear_binomial(&cone.initial_gens);
        let scale = -(cb.clone() / ca.clone());
        let mut expected: Vec<XPolynomial> =
            minors.iter().map(|g| substitute_var(g, a, b, &scale)).collect();
        expected.push(XPolynomial::from_terms([
            (unit_exp(9, a), ca.clone()),
            (unit_exp(9, b), cb.clone()),
        ]));
        assert!(
            same_ideal(&cone.initial_gens, &expected, 3),
            "initial ideal at ray {:?} is the identified minors",
            cone.ray
        );
    }

    // Every special fiber is a normal variety.
    let pol = PolarizedInput::new(d.clone(), ints(&[0, 0, 1])).expect("polarized input");
    let fibers = test_config_fibers(&pol, &line, 6).expect("fibers");
    assert!(!fibers.is_empty());
    for f in &fibers {
        assert!(f.normal, "fiber {} must be normal", f.label);
    }

    finish(3, t, 10_000);
}

fn unit_exp(n: usize, i: usize) -> Vec<u32> {
    let mut e = vec![0u32; n];
    e[i] = 1;
    e
}

/// The quadric fixture's value semigroup: the three stated generators, and
/// grid membership over the window [0,4] x [-6,0] agreeing with the closed
/// form u >= 0, -3u/2 <= v <= 2*floor(-u/2).
#[test]
fn criterion_4_value_semigroup_membership() {
    let t = Instant::now();
    let (d, line, e) = quadric_embedding();

    let doc = fixture_doc("d6.json");
    let val = HomogeneousValuation::from_json(&doc["valuation"]).expect("fixture valuation");
    let sg = value_semigroup(&e, &line, &d, &val).expect("semigroup computes");

    let mut gens = sg.generator_values().to_vec();
    gens.sort();
    assert_eq!(gens, int_rows(&[&[2, -3], &[2, -2], &[3, -4]]));

    // Named members and non-members of the membership picture.
    for (u, v) in [(2, -2), (2, -3), (3, -4), (4, -4), (4, -5), (4, -6)] {
        assert!(
            sg.contains(&ints(&[u, v])).unwrap(),
            "({u},{v}) must belong to the semigroup"
        );
    }
    for (u, v) in [(1, -1), (3, -3)] {
        assert!(
            !sg.contains(&ints(&[u, v])).unwrap(),
            "({u},{v}) must not belong to the semigroup"
        );
    }

    // Whole-window agreement with the closed form.
    for u in 0..=4i64 {
        for v in -6..=0i64 {
            let closed = 2 * v >= -3 * u && v <= 2 * ((-u).div_euclid(2));
            assert_eq!(
                sg.contains(&ints(&[u, v])).unwrap(),
                closed,
                "membership of ({u},{v}) disagrees with the closed form"
            );
        }
    }

    finish(4, t, 1_000);
}

/// The generating set is a Khovanskii basis at every boundary point of both
/// fixtures, checked through degree six.
#[test]
fn criterion_5_khovanskii_basis_at_every_boundary_point() {
    let t = Instant::now();

    let quadric_psi = int_rows(&[&[1], &[0]]);
    let quadric_gamma = ints(&[0, 1]);
    let rank3_psi = int_rows(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[0, 0, 0]]);
    let rank3_gamma = ints(&[0, 0, 0, 1]);

    for (d, psi, gamma) in [
        (d6(), quadric_psi, quadric_gamma),
        (pomega(), rank3_psi, rank3_gamma),
    ] {
        let line = line_from_divisor(&d);
        let e = build_embedding(&d).expect("embedding builds");
        for j in 0..line.boundary_points().len() {
            let val = HomogeneousValuation::new(psi.clone(), j, gamma.clone())
                .expect("valuation builds");
            let rep = khovanskii_check(&e, &line, &d, &val, 6).expect("check runs");
            assert!(
                rep.passed,
                "Khovanskii property fails at boundary point {j}: {:?}",
                rep.witness
            );
            assert!(rep.degrees_checked >= 6);
            assert!(rep.elements_checked > 0);
        }
    }

    finish(5, t, 30_000);
}

/// Dimension bookkeeping: in every graded piece, the cone algebra dimension
/// equals the line-ideal dimension plus the section count
/// max(0, sum of floors + 1).
#[test]
fn criterion_6_graded_dimension_identity() {
    let t = Instant::now();

    let check = |gp: &poised_core::idealkit::GradedPiece| {
        if !gp.in_domain {
            assert_eq!((gp.dim_ac, gp.dim_il, gp.dim_al), (0, 0, 0));
            return;
        }
        let cap = i64::try_from(&gp.degree_cap).expect("small cap");
        let sections = usize::try_from((cap + 1).max(0)).unwrap();
        assert_eq!(
            gp.dim_ac,
            gp.dim_il + sections,
            "degree {:?}: dim_ac == dim_il + max(0, cap+1) fails",
            gp.degree
        );
        assert_eq!(gp.dim_al, sections, "degree {:?}", gp.degree);
    };

    let (d, line, e) = quadric_embedding();
    for u in -8..=8i64 {
        let gp = graded_piece(&e, &line, &d, &ints(&[u])).expect("piece computes");
        check(&gp);
    }

    let (d, line, e) = rank3_embedding();
    let pol = PolarizedInput::new(d.clone(), ints(&[0, 0, 1])).expect("polarized input");
    let mut seen = 0usize;
    for k in 0..=3u32 {
        for u in pol.slice_points(k) {
            let gp = graded_piece(&e, &line, &d, &u).expect("piece computes");
            check(&gp);
            seen += 1;
        }
    }
    assert!(seen > 50, "degree slices must be non-trivial (saw {seen})");

    finish(6, t, 30_000);
}

/// Special fibers of the rank-three fixture: exactly two non-isomorphic
/// non-trivial fibers, and each is cut out by the minors of the 3x3 matrix
/// with the colliding variables identified (up to sign on the boundary
/// fiber, plainly on the interior fiber).
#[test]
fn criterion_7_special_fibers_recover_both_matrices() {
    let t = Instant::now();
    let (d, line, e) = rank3_embedding();
    let pol = PolarizedInput::new(d.clone(), ints(&[0, 0, 1])).expect("polarized input");
    let fibers = test_config_fibers(&pol, &line, 6).expect("fibers");

    let labels: Vec<&str> = fibers.iter().map(|f| f.label.as_str()).collect();
    assert_eq!(labels, ["0", "interior-point", "trivial"]);
    // All three boundary fibers are isomorphic (merged into "0"), and the
    // interior fiber is a genuinely different degeneration: exactly two
    // non-isomorphic non-trivial fibers.
    assert_eq!(fibers[0].represents, ["1", "2"]);
    assert!(fibers[1].represents.is_empty());

    let boundary = &fibers[0];
    let interior = &fibers[1];
    assert_eq!(boundary.generators.len(), 8);
    assert_eq!(interior.generators.len(), 8);

    // Map each ambient variable to its image among the fiber's semigroup
    // generators: normalized character part plus the vanishing order at the
    // degenerating point (zero for the interior fiber).
    let var_point = |k: usize, table: Option<&[Int]>| -> Vec<Int> {
        let h = &e.hilbert[k];
        let (u, v) = h.split_at(3);
        let mut p = pol.normalize(u);
        p.push(match table {
            Some(tbl) => dot_int(v, tbl),
            None => Int::zero(),
        });
        p
    };
    let gen_index = |fiber: &poised_core::projkit::DegenerationFiber,
                     point: &[Int]|
     -> usize {
        fiber
            .generators
            .iter()
            .position(|g| g[..] == point[..])
            .unwrap_or_else(|| panic!("fiber {} misses generator {point:?}", fiber.label))
    };

    // Boundary fiber: exactly one pair of the shared-character triple
    // x4, x5, x6 collides (which pair depends on the boundary point), with
    // opposite signs; the minors of the matrix with that sign twist cut out
    // the fiber.  The torus gauge of the computed fiber may flip the shared
    // coordinate, so accept either orientation.
    let table = line.boundary_points()[0].ord_table.clone();
    let b_idx: Vec<usize> = (0..9)
        .map(|k| gen_index(boundary, &var_point(k, Some(&table))))
        .collect();
    let distinct: std::collections::BTreeSet<usize> = b_idx.iter().copied().collect();
    assert_eq!(distinct.len(), 8, "eight distinct generator images");
    let colliding: Vec<(usize, usize)> = [(3usize, 4usize), (3, 5), (4, 5)]
        .into_iter()
        .filter(|&(p, q)| b_idx[p] == b_idx[q])
        .collect();
    assert_eq!(colliding.len(), 1, "exactly one colliding pair");
    let (p, q) = colliding[0];
    // In the fiber's own coordinates the sign of the identification is a
    // torus-gauge choice, so accept the plain matrix or either twist.
    let boundary_ok = [usize::MAX, p, q].iter().any(|&neg| {
        let signed = RANK3_MATRIX.map(|row| {
            row.map(|v| (b_idx[v], if v == neg { -1i64 } else { 1 }))
        });
        let minors = minor_relations(&signed, boundary.generators.len());
        same_ideal(&minors, &boundary.ideal_generators, 3)
    });
    assert!(
        boundary_ok,
        "boundary fiber is cut out by the pair-identified minors (pair x{}, x{})",
        p + 1,
        q + 1
    );

    // Interior fiber: variables 4, 5, 6 all collide (positively), and the
    // minors of the matrix with the three diagonal slots identified cut out
    // the fiber.
    let i_idx: Vec<usize> = (0..9)
        .map(|k| gen_index(interior, &var_point(k, None)))
        .collect();
    assert_eq!(i_idx[3], i_idx[4]);
    assert_eq!(i_idx[4], i_idx[5]);
    let identified = RANK3_MATRIX.map(|row| row.map(|v| (i_idx[v], 1i64)));
    let minors = minor_relations(&identified, interior.generators.len());
    assert!(
        same_ideal(&minors, &interior.ideal_generators, 3),
        "interior fiber is cut out by the identified minors"
    );

    finish(7, t, 10_000);
}

/// Property suites: cone double-dual; Hilbert-basis minimality and
/// completeness through degree ten; valuation axioms on 500 sampled
/// monomial pairs; no monomials in any initial ideal taken inside the
/// tropicalization, and a monomial witness for a weight outside it; and
/// lattice-point/section agreement for dilations of the convex bodies.
#[test]
fn criterion_8_property_suites() {
    let t = Instant::now();

    // (a) Double dual is the identity on our canonical cone form.
    let mut cones = vec![
        build_cone_c(&d6()).unwrap(),
        build_cone_c(&pomega()).unwrap(),
        d6().tailcone().clone(),
        pomega().tailcone().clone(),
        Cone::from_rays(2, &int_rows(&[&[1, 0], &[1, 2]])),
        Cone::from_rays(3, &int_rows(&[&[2, 3, 5], &[1, 1, 1], &[0, 1, 4]])),
        Cone::from_rays(2, &int_rows(&[&[1, 0], &[-1, 0], &[0, 1]])),
        Cone::from_rays(3, &int_rows(&[&[1, 0, 0], &[0, 1, 0]])),
    ];
    cones.push(dual_cone(&build_cone_c(&d6()).unwrap()));
    for c in &cones {
        assert_eq!(
            dual_cone(&dual_cone(c)),
            *c,
            "double dual must reproduce the cone with rays {:?}",
            c.rays()
        );
    }

    // (b) Hilbert basis minimality and completeness through degree ten.
    {
        let (d, _, e) = quadric_embedding();
        let dual = dual_cone(&build_cone_c(&d).unwrap());
        hilbert_minimal_and_complete(&e.hilbert, &dual, |deg| {
            let u = ints(&[deg as i64]);
            fiber_points(&d, &u)
                .unwrap()
                .map(|vs| (u.clone(), vs))
                .into_iter()
                .collect()
        });
    }
    {
        let (d, _, e) = rank3_embedding();
        let dual = dual_cone(&build_cone_c(&d).unwrap());
        let pol = PolarizedInput::new(d.clone(), ints(&[0, 0, 1])).unwrap();
        hilbert_minimal_and_complete(&e.hilbert, &dual, |deg| {
            pol.slice_points(deg)
                .into_iter()
                .filter_map(|u| {
                    fiber_points(&d, &u).unwrap().map(|vs| (u, vs))
                })
                .collect()
        });
    }

    // (c) Valuation axioms on 500 sampled monomial pairs.
    {
        let (d, line, _) = quadric_embedding();
        let doc = fixture_doc("d6.json");
        let val = HomogeneousValuation::from_json(&doc["valuation"]).unwrap();
        let mut pool = Vec::new();
        for u in 1..=8i64 {
            if let Some(vs) = fiber_points(&d, &ints(&[u])).unwrap() {
                for v in vs {
                    pool.push((ints(&[u]), v));
                }
            }
        }
        valuation_axioms(&val, &line, &pool, 250, 0x5eed_0001);
    }
    {
        let (d, line, _) = rank3_embedding();
        let doc = fixture_doc("pomega.json");
        let val = HomogeneousValuation::from_json(&doc["valuation"]).unwrap();
        let pol = PolarizedInput::new(d.clone(), ints(&[0, 0, 1])).unwrap();
        let mut pool = Vec::new();
        for k in 1..=3u32 {
            for u in pol.slice_points(k) {
                if let Some(vs) = fiber_points(&d, &u).unwrap() {
                    for v in vs {
                        pool.push((u.clone(), v));
                    }
                }
            }
        }
        valuation_axioms(&val, &line, &pool, 250, 0x5eed_0002);
    }

    // (d) Initial ideals taken inside the tropicalization contain no
    // monomial; a weight outside it yields a monomial witness.
    {
        let (d, line, e) = quadric_embedding();
        let report = verify_well_poised(&e, &line, &d, 6).unwrap();
        for cone in &report.cones {
            assert_monomial_free(&cone.initial_gens, 4, 3);
        }
        // Weight on the first variable only: lies outside the fan (it has a
        // non-trivial positive part on a single coordinate, while every fan
        // point is a lineality shift of a ray image), and the quadric's
        // initial form becomes the monomial x4^2.
        let pres = ideal_presentation(&e, &line, &d, 6).unwrap();
        let w = rat_weights(&ints(&[1, 0, 0, 0]));
        assert!(
            !in_fan_d6(&trop_x(&e, &line), &ints(&[1, 0, 0, 0])),
            "witness weight must lie outside the tropicalization"
        );
        let monomials = pres
            .toric_generators
            .iter()
            .chain(&pres.linear_lift_generators)
            .filter(|g| initial_form(g, &w).terms.len() == 1)
            .count();
        assert!(monomials > 0, "outside weight must expose a monomial");
    }
    {
        let (d, line, e) = rank3_embedding();
        let report = verify_well_poised(&e, &line, &d, 6).unwrap();
        for cone in &report.cones {
            assert_monomial_free(&cone.initial_gens, 9, 2);
        }
        let pres = ideal_presentation(&e, &line, &d, 6).unwrap();
        let mut w_raw = vec![0i64; 9];
        w_raw[0] = 1;
        let w = rat_weights(&ints(&w_raw));
        let monomials = pres
            .toric_generators
            .iter()
            .filter(|g| initial_form(g, &w).terms.len() == 1)
            .count();
        assert!(monomials > 0, "outside weight must expose a monomial");
    }

    // (e) Convex-body dilations: lattice-point counts against section
    // dimensions, for each boundary point of the rank-three fixture; the
    // quadric fixture agrees at the even dilation and dominates elsewhere
    // (its section semigroup is not saturated in degrees one and three).
    {
        let (d, line, e) = rank3_embedding();
        let pol = PolarizedInput::new(d.clone(), ints(&[0, 0, 1])).unwrap();
        let (psi, gamma) = pol.identity_value_map();
        for j in 0..3 {
            let body = nok_body(&pol, &line, j, &psi, &gamma).unwrap();
            for k in 1..=3i64 {
                let sections: usize = pol
                    .slice_points(k as u32)
                    .into_iter()
                    .map(|u| graded_piece(&e, &line, &d, &u).unwrap().dim_al)
                    .sum();
                assert_eq!(
                    dilated_lattice_count(&body, k),
                    sections,
                    "dilation {k} at boundary point {j}"
                );
            }
        }
    }
    {
        let (d, line, e) = quadric_embedding();
        let pol = PolarizedInput::new(d.clone(), ints(&[1])).unwrap();
        let (psi, gamma) = pol.identity_value_map();
        let body = nok_body(&pol, &line, 0, &psi, &gamma).unwrap();
        for k in 1..=3i64 {
            let sections = graded_piece(&e, &line, &d, &ints(&[k])).unwrap().dim_al;
            let count = dilated_lattice_count(&body, k);
            assert!(count >= sections, "body dominates sections at dilation {k}");
            if k == 2 {
                assert_eq!(count, sections, "even dilation agrees exactly");
            }
        }
    }

    finish(8, t, 120_000);
}

/// Assert minimality (no generator decomposes over the others) and
/// completeness (every semigroup point of degree at most ten decomposes
/// over the basis), with `points_of_degree` enumerating each graded slice.
fn hilbert_minimal_and_complete<F>(hilbert: &[Vec<Int>], dual: &Cone, points_of_degree: F)
where
    F: Fn(u32) -> Vec<(Vec<Int>, Vec<Vec<Int>>)>,
{
    for (i, h) in hilbert.iter().enumerate() {
        let others: Vec<Vec<Int>> = hilbert
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, g)| g.clone())
            .collect();
        let mut memo = BTreeMap::new();
        assert!(
            !decomposes(h, &others, dual, &mut memo),
            "generator {h:?} is redundant"
        );
    }
    let gens: Vec<Vec<Int>> = hilbert.to_vec();
    let mut memo = BTreeMap::new();
    let mut total = 0usize;
    for deg in 0..=10u32 {
        for (u, vs) in points_of_degree(deg) {
            for v in vs {
                let mut p = u.clone();
                p.extend(v);
                assert!(
                    decomposes(&p, &gens, dual, &mut memo),
                    "semigroup point {p:?} (degree {deg}) is not generated"
                );
                total += 1;
            }
        }
    }
    assert!(total > 20, "completeness sweep must be non-trivial");
}

/// Valuation axioms over sampled monomial pairs: additivity on products,
/// and the ultrametric rule on sums (the fixtures' order direction is the
/// last coordinate of the value).
fn valuation_axioms(
    val: &HomogeneousValuation,
    line: &Line,
    pool: &[(Vec<Int>, Vec<Int>)],
    pairs: usize,
    seed: u64,
) {
    assert!(pool.len() > 10, "sample pool must be non-trivial");
    let mut rng = Lcg(seed);
    let monomial = |u: &[Int], v: &[Int]| {
        GradedLaurentElement::new(u.to_vec(), BTreeMap::from([(v.to_vec(), rat1())]))
    };
    let mut checked = 0usize;
    while checked < pairs {
        let (u1, v1) = &pool[rng.next_index(pool.len())];
        let (u2, v2) = &pool[rng.next_index(pool.len())];
        let m1 = monomial(u1, v1);
        let m2 = monomial(u2, v2);
        let w1 = valuation_eval(val, &m1, line).expect("monomial value");
        let w2 = valuation_eval(val, &m2, line).expect("monomial value");

        // Product additivity.
        let usum: Vec<Int> = u1.iter().zip(u2).map(|(a, b)| a + b).collect();
        let vsum: Vec<Int> = v1.iter().zip(v2).map(|(a, b)| a + b).collect();
        let prod = monomial(&usum, &vsum);
        let wp = valuation_eval(val, &prod, line).expect("product value");
        let expected: Vec<Int> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
        assert_eq!(wp, expected, "value of product must add");

        // Ultrametric rule on same-degree sums.
        if u1 == u2 && v1 != v2 {
            let f = GradedLaurentElement::new(
                u1.clone(),
                BTreeMap::from([(v1.clone(), rat1()), (v2.clone(), rat1())]),
            );
            let wf = valuation_eval(val, &f, line).expect("sum value");
            let (o1, o2, of) = (order_part(&w1), order_part(&w2), order_part(&wf));
            let min = o1.clone().min(o2.clone());
            if o1 != o2 {
                assert_eq!(of, min, "sum takes the smaller order");
                let wmin = if o1 < o2 { &w1 } else { &w2 };
                assert_eq!(&wf, wmin, "sum takes the smaller value");
            } else {
                assert!(of >= min, "sum order can only go up");
            }
        }
        checked += 1;
    }
}

/// No monomial of total degree <= `max_deg` lies in the ideal.
fn assert_monomial_free(gens: &[XPolynomial], nvars: usize, max_deg: u32) {
    fn walk(
        e: &mut Vec<u32>,
        i: usize,
        left: u32,
        started: bool,
        gens: &[XPolynomial],
        out: &mut usize,
    ) {
        if i == e.len() {
            if started {
                let mono = XPolynomial::from_terms([(e.clone(), rat1())]);
                assert!(
                    !ideal_membership(&mono, gens, 4),
                    "monomial {mono} lies in the initial ideal"
                );
                *out += 1;
            }
            return;
        }
        for k in 0..=left {
            e[i] = k;
            walk(e, i + 1, left - k, started || k > 0, gens, out);
        }
        e[i] = 0;
    }
    let mut e = vec![0u32; nvars];
    let mut count = 0usize;
    walk(&mut e, 0, max_deg, false, gens, &mut count);
    assert!(count > 0);
}

/// Fan membership for the quadric fixture's tropicalization: is `w` equal
/// to a non-negative multiple of some cone's ray image plus a rational
/// multiple of the (one-dimensional) lineality space?
fn in_fan_d6(fan: &poised_core::tropkit::TropicalFan, w: &[Int]) -> bool {
    assert_eq!(fan.lineality.len(), 1, "quadric fan has line lineality");
    let lin = &fan.lineality[0];
    let to_rat = |x: &Int| Rat::from_integer(x.clone());
    for cone in &fan.maximal_cones {
        let ray = &cone[0];
        // Solve w = b*ray + a*lin from the first two independent rows, then
        // verify the rest and b >= 0.
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                let det = &ray[i] * &lin[j] - &ray[j] * &lin[i];
                if det.is_zero() {
                    continue;
                }
                let det = to_rat(&det);
                let b = (to_rat(&(&w[i] * &lin[j] - &w[j] * &lin[i]))) / det.clone();
                let a = (to_rat(&(&ray[i] * &w[j] - &ray[j] * &w[i]))) / det;
                let fits = (0..w.len()).all(|k| {
                    b.clone() * to_rat(&ray[k]) + a.clone() * to_rat(&lin[k]) == to_rat(&w[k])
                });
                if fits && !b.is_negative() {
                    return true;
                }
            }
        }
    }
    false
}
