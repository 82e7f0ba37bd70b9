//! Unitary equivalence under site-diagonal gauges.
//!
//! [`decide_equivalence`] compares canonical parameters segment by segment.
//! [`phase_propagation_oracle`] solves for a diagonal gauge directly from
//! the matrix entries in the `η` frames and shares no code with the
//! canonicalizer beyond `η` extraction.

use std::collections::VecDeque;
use std::fmt;

use crate::builders::{apply_gauge, GaugeTransform};
use crate::canonical::{canonical_parts, CanonicalSegment, Geometry, Part};
use crate::linalg::{circle_distance, Mat2, C64};
use crate::operator::{operator_distance, rank_profile, WalkOperator, Window};
use crate::structure::{check_admissibility, extract_eta, AdmissibilityReport};

pub const MAGNITUDE_TOL: f64 = 1e-9;
pub const PHASE_TOL: f64 = 1e-9;
pub const WITNESS_TOL: f64 = 1e-8;
/// Spectra are compared as a sanity check only up to this dimension.
const TRIPWIRE_DIM: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquivalenceStatus {
    Equivalent,
    NotEquivalent,
    Incomparable,
}

impl fmt::Display for EquivalenceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EquivalenceStatus::Equivalent => "equivalent",
            EquivalenceStatus::NotEquivalent => "not_equivalent",
            EquivalenceStatus::Incomparable => "incomparable",
        })
    }
}

/// The comparison stage at which the verdict was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Admissibility,
    CutPattern,
    Magnitudes,
    IsolatedBlocks,
    Phases,
    Verified,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Admissibility => "admissibility",
            Stage::CutPattern => "cut_pattern",
            Stage::Magnitudes => "magnitudes",
            Stage::IsolatedBlocks => "isolated_blocks",
            Stage::Phases => "phases",
            Stage::Verified => "verified",
        })
    }
}

/// First parameter found to differ. `site` is the left site of the bond
/// for `theta` and `p` (so `lo − 1` names a segment's entry bond).
#[derive(Clone, Debug, PartialEq)]
pub struct Discrepancy {
    pub site: i64,
    pub parameter: &'static str,
    pub left: f64,
    pub right: f64,
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "site={} parameter={} left={} right={}",
            self.site, self.parameter, self.left, self.right
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceVerdict {
    pub status: EquivalenceStatus,
    pub stage: Stage,
    /// `W` with `W U W* = U′`, only when equivalent.
    pub witness: Option<GaugeTransform>,
    pub discrepancy: Option<Discrepancy>,
    pub reason: Option<String>,
}

impl EquivalenceVerdict {
    fn incomparable(stage: Stage, reason: impl Into<String>) -> Self {
        EquivalenceVerdict {
            status: EquivalenceStatus::Incomparable,
            stage,
            witness: None,
            discrepancy: None,
            reason: Some(reason.into()),
        }
    }

    fn differs(stage: Stage, d: Discrepancy) -> Self {
        EquivalenceVerdict {
            status: EquivalenceStatus::NotEquivalent,
            stage,
            witness: None,
            discrepancy: Some(d),
            reason: None,
        }
    }

    pub fn is_equivalent(&self) -> bool {
        self.status == EquivalenceStatus::Equivalent
    }
}

impl fmt::Display for EquivalenceVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "status: {}", self.status)?;
        write!(f, "stage: {}", self.stage)?;
        if let Some(d) = &self.discrepancy {
            write!(f, "\ndiscrepancy: {d}")?;
        }
        if let Some(r) = &self.reason {
            write!(f, "\nreason: {r}")?;
        }
        Ok(())
    }
}

fn failed_checks(rep: &AdmissibilityReport) -> Vec<String> {
    let mut out = Vec::new();
    if !rep.band_ok {
        out.push("band".to_string());
    }
    if !rep.unitary_ok {
        out.push(format!("unitarity (residual {:e})", rep.unitary_residual));
    }
    if !rep.rank_ok {
        out.push(format!("rank at bonds {:?}", rep.rank_offenders));
    }
    if !rep.assumption_a_ok {
        out.push(format!(
            "assumption A at sites {:?}",
            rep.assumption_a_offenders
        ));
    }
    out
}

fn eigen_match(a: &Mat2, b: &Mat2) -> (f64, [C64; 2], [C64; 2], Mat2) {
    let (la, ea) = a.normal_eigen(1e-12);
    let (lb, eb) = b.normal_eigen(1e-12);
    let straight = (la[0] - lb[0]).norm().max((la[1] - lb[1]).norm());
    let swapped = (la[0] - lb[1]).norm().max((la[1] - lb[0]).norm());
    let (dist, eb, lb) = if straight <= swapped {
        (straight, eb, lb)
    } else {
        (swapped, [eb[1], eb[0]], [lb[1], lb[0]])
    };
    let e = Mat2::from_columns(&ea[0], &ea[1]);
    let e2 = Mat2::from_columns(&eb[0], &eb[1]);
    (dist, la, lb, e2 * e.adjoint())
}

fn compare_magnitudes(a: &CanonicalSegment, b: &CanonicalSegment) -> Option<Discrepancy> {
    let window = a.spec.window;
    for (j, (x, y)) in a.params.sites().iter().zip(b.params.sites()).enumerate() {
        let site = window.site(j);
        if (x.p - y.p).abs() > MAGNITUDE_TOL {
            return Some(Discrepancy {
                site,
                parameter: "p",
                left: x.p,
                right: y.p,
            });
        }
        if (x.r - y.r).abs() > MAGNITUDE_TOL {
            return Some(Discrepancy {
                site,
                parameter: "r",
                left: x.r,
                right: y.r,
            });
        }
    }
    None
}

fn compare_phases(a: &CanonicalSegment, b: &CanonicalSegment) -> Option<Discrepancy> {
    let window = a.spec.window;
    let (ea, eb) = (a.params.entry_theta(), b.params.entry_theta());
    if circle_distance(ea, eb) > PHASE_TOL {
        return Some(Discrepancy {
            site: window.lo() - 1,
            parameter: "theta",
            left: ea,
            right: eb,
        });
    }
    for (j, (x, y)) in a.params.sites().iter().zip(b.params.sites()).enumerate() {
        let site = window.site(j);
        if circle_distance(x.theta, y.theta) > PHASE_TOL {
            return Some(Discrepancy {
                site,
                parameter: "theta",
                left: x.theta,
                right: y.theta,
            });
        }
        if circle_distance(x.kappa, y.kappa) > PHASE_TOL {
            return Some(Discrepancy {
                site,
                parameter: "kappa",
                left: x.kappa,
                right: y.kappa,
            });
        }
    }
    None
}

/// Decides whether `v = W u W*` for some site-diagonal unitary `W`, both
/// walks read with the same geometry.
///
/// Checks run in order: admissibility (Assumption B may fail), cut
/// pattern, `p` and `r` on all segments, eigenvalues of isolated blocks,
/// then the phases. An equivalent verdict always carries a witness that
/// has been checked against `v`.
pub fn decide_equivalence(
    u: &WalkOperator,
    v: &WalkOperator,
    geometry: Geometry,
) -> EquivalenceVerdict {
    if u.window() != v.window() {
        return EquivalenceVerdict::incomparable(
            Stage::Admissibility,
            format!("windows differ: {} vs {}", u.window(), v.window()),
        );
    }
    let (ru, rv) = (check_admissibility(u), check_admissibility(v));
    for (name, rep) in [("left", &ru), ("right", &rv)] {
        let failed = failed_checks(rep);
        if !failed.is_empty() {
            return EquivalenceVerdict::incomparable(
                Stage::Admissibility,
                format!("{name} walk fails {}", failed.join(", ")),
            );
        }
    }

    if ru.cuts != rv.cuts {
        let site = ru
            .cuts
            .iter()
            .chain(&rv.cuts)
            .copied()
            .filter(|x| ru.cuts.contains(x) != rv.cuts.contains(x))
            .min()
            .expect("cut sets differ");
        let flag = |c: &[i64]| if c.contains(&site) { 1.0 } else { 0.0 };
        return EquivalenceVerdict::differs(
            Stage::CutPattern,
            Discrepancy {
                site,
                parameter: "cut",
                left: flag(&ru.cuts),
                right: flag(&rv.cuts),
            },
        );
    }

    let parts = |w: &WalkOperator, rep: &AdmissibilityReport, name: &str| {
        canonical_parts(w, rep, geometry).map_err(|e| {
            EquivalenceVerdict::incomparable(Stage::Admissibility, format!("{name} walk: {e}"))
        })
    };
    let pu = match parts(u, &ru, "left") {
        Ok(p) => p,
        Err(v) => return v,
    };
    let pv = match parts(v, &rv, "right") {
        Ok(p) => p,
        Err(v) => return v,
    };

    for (a, b) in pu.iter().zip(&pv) {
        if let (Part::Segment(a), Part::Segment(b)) = (a, b) {
            if let Some(d) = compare_magnitudes(a, b) {
                return EquivalenceVerdict::differs(Stage::Magnitudes, d);
            }
        }
    }

    let mut blocks = Vec::with_capacity(pu.len());
    for (a, b) in pu.iter().zip(&pv) {
        match (a, b) {
            (Part::Isolated { site, block: ba }, Part::Isolated { block: bb, .. }) => {
                let (dist, la, lb, g) = eigen_match(ba, bb);
                if dist > MAGNITUDE_TOL {
                    let i = if (la[0] - lb[0]).norm() > MAGNITUDE_TOL {
                        0
                    } else {
                        1
                    };
                    return EquivalenceVerdict::differs(
                        Stage::IsolatedBlocks,
                        Discrepancy {
                            site: *site,
                            parameter: "eigenvalue",
                            left: la[i].arg(),
                            right: lb[i].arg(),
                        },
                    );
                }
                blocks.push(GaugeTransform::from_blocks(
                    Window::new(*site, *site).unwrap(),
                    vec![g],
                ));
            }
            (Part::Segment(a), Part::Segment(b)) => {
                if let Some(d) = compare_phases(a, b) {
                    return EquivalenceVerdict::differs(Stage::Phases, d);
                }
                blocks.push(b.gauge.adjoint().compose(&a.gauge));
            }
            _ => unreachable!("identical cut patterns give identical segments"),
        }
    }
    let witness = match blocks
        .into_iter()
        .collect::<crate::Result<Vec<_>>>()
        .and_then(|b| GaugeTransform::concat(&b))
    {
        Ok(w) => w,
        Err(e) => {
            return EquivalenceVerdict::incomparable(
                Stage::Verified,
                format!("witness assembly: {e}"),
            )
        }
    };

    let residual = apply_gauge(u, &witness)
        .and_then(|m| operator_distance(&m.to_dense(), &v.to_dense()))
        .unwrap_or(f64::INFINITY);
    if !(residual < WITNESS_TOL) {
        return EquivalenceVerdict::incomparable(
            Stage::Verified,
            format!("parameters agree but the witness misses by {residual:e}"),
        );
    }
    if u.window().dim() <= TRIPWIRE_DIM {
        let (su, sv) = (window_spectrum(u), window_spectrum(v));
        if spectrum_distance(&su, &sv) > WITNESS_TOL {
            return EquivalenceVerdict::incomparable(Stage::Verified, "window spectra differ");
        }
    }
    EquivalenceVerdict {
        status: EquivalenceStatus::Equivalent,
        stage: Stage::Verified,
        witness: Some(witness),
        discrepancy: None,
        reason: None,
    }
}

/// Eigenvalues of the dense window matrix sorted by argument in `(−π, π]`.
pub fn window_spectrum(u: &WalkOperator) -> Vec<C64> {
    let mut ev = u.to_dense().eigenvalues().unwrap_or_default();
    ev.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    ev
}

/// Matching distance between two spectra sorted by argument. Eigenvalues
/// near `−1` may sort to opposite ends, so each is matched to the nearest
/// unused one in a small cyclic neighbourhood.
pub fn spectrum_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    // best cyclic alignment of the sorted lists
    let mut best = f64::INFINITY;
    for shift in [0, 1, n - 1, 2, n.saturating_sub(2)] {
        let shift = shift % n;
        let d = (0..n)
            .map(|i| (a[i] - b[(i + shift) % n]).norm())
            .fold(0.0, f64::max);
        best = best.min(d);
    }
    best
}

/// Independent check: finds a site-diagonal `W` with `W U W* = U′` by
/// propagating phase constraints along the nonzero entries in the `η`
/// frames, or `None`.
pub fn phase_propagation_oracle(u: &WalkOperator, v: &WalkOperator) -> Option<GaugeTransform> {
    if u.window() != v.window() {
        return None;
    }
    if !check_admissibility(u).all_ok() || !check_admissibility(v).all_ok() {
        return None;
    }
    if !rank_profile(u).same_ranks(&rank_profile(v)) {
        return None;
    }
    let frame = |w: &WalkOperator| {
        let eta = extract_eta(w).ok()?;
        let blocks = eta
            .iter()
            .map(|[e1, e2]| Mat2([[e1[0].conj(), e1[1].conj()], [e2[0].conj(), e2[1].conj()]]))
            .collect();
        GaugeTransform::from_blocks(w.window(), blocks).ok()
    };
    let (fu, fv) = (frame(u)?, frame(v)?);
    let a = apply_gauge(u, &fu).ok()?.to_dense();
    let b = apply_gauge(v, &fv).ok()?.to_dense();
    let dim = a.nrows();

    let mut edges = Vec::new();
    for j in 0..dim {
        let lo = j.saturating_sub(3);
        let hi = (j + 4).min(dim);
        for i in lo..hi {
            let (x, y) = (a[(i, j)], b[(i, j)]);
            if (x.norm() - y.norm()).abs() > MAGNITUDE_TOL {
                return None;
            }
            if x.norm() > 1e-7 && i != j {
                edges.push((x.norm(), i, j, y.arg() - x.arg()));
            }
        }
    }
    edges.sort_by(|p, q| q.0.total_cmp(&p.0));

    // spanning forest over the heaviest edges; φ_i − φ_j = arg b_ij − arg a_ij
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
    let mut uf = UnionFind::new(dim);
    for &(_, i, j, d) in &edges {
        if uf.union(i, j) {
            adj[j].push((i, d));
            adj[i].push((j, -d));
        }
    }
    let mut phi = vec![f64::NAN; dim];
    for root in 0..dim {
        if !phi[root].is_nan() {
            continue;
        }
        phi[root] = 0.0;
        let mut queue = VecDeque::from([root]);
        while let Some(k) = queue.pop_front() {
            for &(m, d) in &adj[k] {
                if phi[m].is_nan() {
                    phi[m] = phi[k] + d;
                    queue.push_back(m);
                }
            }
        }
    }
    let g: Vec<f64> = phi.iter().step_by(2).copied().collect();
    let h: Vec<f64> = phi.iter().skip(1).step_by(2).copied().collect();
    let d = GaugeTransform::diagonal(u.window(), &g, &h).ok()?;
    let w = fv.adjoint().compose(&d).ok()?.compose(&fu).ok()?;
    let moved = apply_gauge(u, &w).ok()?;
    let residual = operator_distance(&moved.to_dense(), &v.to_dense()).ok()?;
    (residual < WITNESS_TOL).then_some(w)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, i: usize, j: usize) -> bool {
        let (a, b) = (self.find(i), self.find(j));
        if a == b {
            return false;
        }
        self.parent[a] = b;
        true
    }
}
