//! Split-step quantum walks on finite lattice windows.
//!
//! A walk is a block-tridiagonal unitary acting on `⊕_x C²`. This crate checks
//! the structural conditions such walks must satisfy, reduces them by
//! site-diagonal gauge transforms to the canonical family `U_{p,r,θ,κ}`,
//! decides unitary equivalence, certifies chiral symmetry and simulates the
//! dynamics.
//!
//! A window `[lo, hi]` is a closed segment: no amplitude crosses its ends.

pub mod builders;
pub mod canonical;
pub mod chiral;
pub mod dynamics;
pub mod equivalence;
pub mod error;
pub mod io;
pub mod linalg;
pub mod operator;
pub mod structure;

pub use builders::{
    apply_gauge, build_canonical, build_kitagawa, build_suzuki, random_admissible_walk,
    random_gauge, random_ssqw_params, random_suzuki_params, GaugeTransform, KitagawaParams,
    SSQWParams, SiteParams, SuzukiParams, SuzukiSite, WalkProfile,
};
pub use canonical::{
    build_w1, canonicalize, choose_anchor, extract_raw_phases, segment_walk, telescope_phases,
    Anchor, AnchorRule, CanonicalForm, CanonicalSegment, CaseTag, Geometry, RawPhaseData,
    SegmentSpec,
};
pub use chiral::{
    chiral_factorize, chiral_search, suzuki_certificate, suzuki_reduce, verify_chiral,
    ChiralCertificate, ChiralResiduals,
};
pub use dynamics::{
    distribution, evolve, evolve_closed, evolve_line, moments, Distribution, LineWalk,
    TailedCanonical, TailedSuzuki,
};
pub use equivalence::{
    decide_equivalence, phase_propagation_oracle, window_spectrum, Discrepancy, EquivalenceStatus,
    EquivalenceVerdict, Stage,
};
pub use error::{Error, Result};
pub use linalg::{Mat2, C64, V2};
pub use operator::{
    check_unitary, compose, operator_distance, rank_profile, DenseMatrix, RankProfile, StateVector,
    UnitarityCheck, WalkOperator, Window,
};
pub use structure::{
    check_admissibility, extract_eta, extract_zeta_xi, AdmissibilityReport, LocalBases,
};
