//! Exact machinery for rational complexity-one T-varieties presented by
//! polyhedral divisors on the projective line.
//!
//! Given a divisor $\mathcal{D} = \sum_i \Delta_i \cdot P_i$ on $\mathbb{P}^1$
//! with common pointed tailcone $\sigma \subset N_\mathbb{Q}$, the library
//! constructs the associated embedding of the variety into affine space via
//! the cone
//! $C = \mathbb{Q}_{\ge 0}\big(\bigcup_i \Delta_i \times e_i \cup \sigma \times 0\big)$,
//! its dual, and the Hilbert basis of $C^\vee \cap (M \times \mathbb{Z}^m)$,
//! then computes:
//!
//! * the defining ideal (toric binomials plus lifted linear relations),
//! * the tropicalization and its initial ideals, with a verification routine
//!   for the property that every such initial ideal is again the ideal of a
//!   degenerated line ("well-poisedness"),
//! * homogeneous valuations, their value semigroups, and generator
//!   (Khovanskii-basis) checks,
//! * Newton–Okounkov polytopes of polarized inputs, and
//! * the special fibers of equivariant one-parameter degenerations.
//!
//! All arithmetic is exact: arbitrary-precision integers and rationals
//! throughout, no floating point anywhere. Every set-valued output is
//! canonically sorted so that identical inputs produce byte-identical
//! serialized reports.
//!
//! Module layout mirrors the mathematical layering:
//!
//! * [`exactla`] — exact rational/integer linear algebra (HNF, kernels, solving),
//! * [`polycore`] — cones, polyhedra, dual cones, Hilbert bases, support functions,
//! * [`tgeom`] — polyhedral divisors, lines in $\mathbb{P}^m$, the embedding itself,
//! * [`idealkit`] — defining ideals, lifts, graded-piece dimension bookkeeping,
//! * [`tropkit`] — tropicalization, initial forms, well-poisedness verification,
//! * [`valkit`] — homogeneous valuations and value semigroups,
//! * [`projkit`] — polarized inputs: Newton–Okounkov bodies and degeneration fibers.

pub mod exactla;
pub mod idealkit;
pub mod polycore;
pub mod projkit;
pub mod tgeom;
pub mod tropkit;
pub mod valkit;
