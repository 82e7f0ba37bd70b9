//! Gauge reduction of an admissible walk to the canonical family
//! `U_{p,r,θ,κ}`.
//!
//! Each segment between cuts is handled on its own: the frame change `W₁`
//! (from the `η` bases), extraction of the raw phases, elimination of
//! `b` and `c`, then the telescoping diagonal gauge `W₂ = ⊕ diag(e^{ig}, e^{ih})`
//! whose one free constant `ℓ` is fixed by an anchor rule.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::builders::{build_canonical, GaugeTransform, SSQWParams, SiteParams};
use crate::error::{Error, Result};
use crate::linalg::{circle_distance, dot, wrap_phase, Mat2};
use crate::operator::{operator_distance, WalkOperator, Window};
use crate::structure::{
    check_admissibility, extract_eta, extract_zeta_xi, AdmissibilityReport, LocalBases,
};

/// Magnitudes below this are treated as exact zeros.
pub const SNAP_TOL: f64 = 1e-12;

/// What the window stands for. Numerics cannot tell a finite segment from
/// a truncated line, so the caller declares it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Geometry {
    Line,
    /// `(−∞, hi]`
    HalfLeft,
    /// `[lo, ∞)`
    HalfRight,
    Finite,
}

impl Geometry {
    fn open_left(self) -> bool {
        matches!(self, Geometry::Line | Geometry::HalfLeft)
    }

    fn open_right(self) -> bool {
        matches!(self, Geometry::Line | Geometry::HalfRight)
    }
}

impl FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(Geometry::Line),
            "half-left" => Ok(Geometry::HalfLeft),
            "half-right" => Ok(Geometry::HalfRight),
            "finite" => Ok(Geometry::Finite),
            _ => Err(Error::InvalidArgument(format!(
                "unknown geometry '{s}' (expected line, half-left, half-right or finite)"
            ))),
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::Line => "line",
            Geometry::HalfLeft => "half-left",
            Geometry::HalfRight => "half-right",
            Geometry::Finite => "finite",
        })
    }
}

/// Which ends of a segment are open.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CaseTag {
    /// Both ends open.
    FullLine,
    /// Cut on the left, open to the right.
    RightHalf,
    /// Open to the left, cut on the right.
    LeftHalf,
    /// Cuts on both ends.
    Finite,
}

impl CaseTag {
    pub fn number(self) -> u8 {
        match self {
            CaseTag::FullLine => 1,
            CaseTag::RightHalf => 2,
            CaseTag::LeftHalf => 3,
            CaseTag::Finite => 4,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(CaseTag::FullLine),
            2 => Some(CaseTag::RightHalf),
            3 => Some(CaseTag::LeftHalf),
            4 => Some(CaseTag::Finite),
            _ => None,
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// The rule that fixed `ℓ`.
///
/// `I`–`V` scan for the first site with `r ≠ 0` (then `p ≠ 0`) to the right
/// of the origin, then to the left. `Boundary` sets the phase of a cut bond
/// at the segment end to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AnchorRule {
    I,
    II,
    III,
    IV,
    V,
    Boundary,
}

impl fmt::Display for AnchorRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnchorRule::I => "i",
            AnchorRule::II => "ii",
            AnchorRule::III => "iii",
            AnchorRule::IV => "iv",
            AnchorRule::V => "v",
            AnchorRule::Boundary => "boundary",
        })
    }
}

impl FromStr for AnchorRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "i" => AnchorRule::I,
            "ii" => AnchorRule::II,
            "iii" => AnchorRule::III,
            "iv" => AnchorRule::IV,
            "v" => AnchorRule::V,
            "boundary" => AnchorRule::Boundary,
            _ => return Err(Error::InvalidArgument(format!("unknown anchor rule '{s}'"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Anchor {
    /// Site whose `κ` (rules i, ii) or bond `θ` (other rules) is zeroed.
    /// For the entry bond of a segment starting at `a` this is `a − 1`.
    pub site: i64,
    pub rule: AnchorRule,
    /// Value of `h` at the telescoping origin.
    pub ell: f64,
    pub origin: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SegmentSpec {
    pub window: Window,
    pub case: CaseTag,
}

impl SegmentSpec {
    /// A single site between two cuts: a standalone 2×2 block.
    pub fn is_isolated(&self) -> bool {
        self.window.len() == 1
    }
}

/// Phases of bond `(x, x+1)`: `W₁ξ₁^x = e^{ia}p e₁^x + e^{ib}q e₂^{x+1}` and
/// `W₁ξ₂^{x+1} = e^{ic}q e₁^x + e^{id}p e₂^{x+1}`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BondPhases {
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Phases of site `x`: `W₁ζ₁^x = e^{iα}r e₁^x + e^{iβ}s e₂^x` and
/// `W₁ζ₂^x = e^{iγ}s e₁^x + e^{iδ}r e₂^x`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SitePhases {
    pub r: f64,
    pub s: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

/// Raw phase data of one segment after `b` and `c` have been eliminated.
///
/// `bonds[0]` is the cut bond entering the segment, `bonds[n]` the cut bond
/// leaving it.
#[derive(Clone, Debug, PartialEq)]
pub struct RawPhaseData {
    pub window: Window,
    pub bonds: Vec<BondPhases>,
    pub sites: Vec<SitePhases>,
}

impl RawPhaseData {
    /// Bond `(x, x+1)` for `lo − 1 ≤ x ≤ hi`.
    pub fn bond(&self, x: i64) -> &BondPhases {
        &self.bonds[(x - self.window.lo() + 1) as usize]
    }

    pub fn site(&self, x: i64) -> &SitePhases {
        &self.sites[(x - self.window.lo()) as usize]
    }

    /// Largest violation of `a = −d + π` and `α − β = γ − δ + π`.
    pub fn convention_residual(&self) -> f64 {
        let bonds = self
            .bonds
            .iter()
            .map(|b| circle_distance(b.a - b.b, b.c - b.d + PI));
        let sites = self
            .sites
            .iter()
            .map(|s| circle_distance(s.alpha - s.beta, s.gamma - s.delta + PI));
        bonds.chain(sites).fold(0.0, f64::max)
    }
}

/// Snapped `(small, large)` magnitude pair.
fn snap(m: f64) -> (f64, f64) {
    let m = m.clamp(0.0, 1.0);
    if m < SNAP_TOL {
        (0.0, 1.0)
    } else if 1.0 - m * m < SNAP_TOL * SNAP_TOL {
        (1.0, 0.0)
    } else {
        (m, (1.0 - m * m).sqrt())
    }
}

/// `W₁ = ⊕_x |e₁^x⟩⟨η₁^x| + |e₂^x⟩⟨η₂^x|`.
pub fn build_w1(bases: &LocalBases) -> GaugeTransform {
    let blocks = bases
        .eta
        .iter()
        .map(|[e1, e2]| Mat2([[e1[0].conj(), e1[1].conj()], [e2[0].conj(), e2[1].conj()]]))
        .collect();
    GaugeTransform::from_blocks(bases.window, blocks).expect("eta pairs are orthonormal")
}

/// Reads magnitudes and phases off the local frames of one segment (the
/// coefficients of `ξ` in the `η` frame are those of `W₁ξ` in the standard
/// frame), fills free phases so the conventions hold, and eliminates `b`
/// and `c`.
pub fn extract_raw_phases(bases: &LocalBases) -> RawPhaseData {
    let window = bases.window;
    let n = window.len();
    let mut bonds = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut bp = BondPhases::default();
        if k == 0 {
            // entry bond: only ξ₂^{lo} lives in the segment
            bp.p = 1.0;
            bp.d = bases.xi[0][1][1].arg();
            bp.a = PI - bp.d;
        } else if k == n {
            bp.p = 1.0;
            bp.a = bases.xi[n - 1][0][0].arg();
            bp.d = PI - bp.a;
        } else {
            let [ca, cb] = bases.xi[k - 1][0];
            let [cc, cd] = bases.xi[k][1];
            let (p, q) = snap(ca.norm());
            bp.p = p;
            bp.q = q;
            if p == 0.0 {
                bp.b = cb.arg();
                bp.c = cc.arg();
                bp.a = bp.b;
                bp.d = bp.c + PI;
            } else if q == 0.0 {
                bp.a = ca.arg();
                bp.d = PI - bp.a;
            } else {
                bp.a = ca.arg();
                bp.b = cb.arg();
                bp.c = cc.arg();
                bp.d = cd.arg();
            }
        }
        bonds.push(bp);
    }

    let mut sites: Vec<SitePhases> = (0..n)
        .map(|j| {
            let [e1, e2] = &bases.eta[j];
            let [z1, z2] = &bases.zeta[j];
            let (w11, w21) = (dot(e1, z1), dot(e2, z1));
            let (w12, w22) = (dot(e1, z2), dot(e2, z2));
            let (r, s) = snap(w11.norm());
            let mut sp = SitePhases {
                r,
                s,
                ..Default::default()
            };
            if r == 0.0 {
                sp.beta = w21.arg();
                sp.gamma = w12.arg();
                sp.delta = 0.0;
                sp.alpha = sp.beta + sp.gamma + PI;
            } else if s == 0.0 {
                sp.alpha = w11.arg();
                sp.delta = w22.arg();
                sp.gamma = 0.0;
                sp.beta = sp.alpha + sp.delta - PI;
            } else {
                sp.alpha = w11.arg();
                sp.beta = w21.arg();
                sp.gamma = w12.arg();
                sp.delta = w22.arg();
            }
            sp
        })
        .collect();

    for (j, sp) in sites.iter_mut().enumerate() {
        let b = bonds[j + 1].b;
        let c = bonds[j].c;
        sp.alpha -= b;
        sp.beta -= b;
        sp.gamma -= c;
        sp.delta -= c;
    }
    for bp in bonds.iter_mut() {
        bp.a -= bp.b;
        bp.d -= bp.c;
        bp.b = 0.0;
        bp.c = 0.0;
    }
    RawPhaseData {
        window,
        bonds,
        sites,
    }
}

/// `g_origin = 0`, `h_origin = ℓ`, `g_x − g_{x−1} = −γ_x`, `h_{x+1} − h_x = β_x`.
pub fn telescope_phases(raw: &RawPhaseData, ell: f64, origin: i64) -> Result<GaugeTransform> {
    let (g, h) = telescope(raw, ell, origin)?;
    GaugeTransform::diagonal(raw.window, &g, &h)
}

fn telescope(raw: &RawPhaseData, ell: f64, origin: i64) -> Result<(Vec<f64>, Vec<f64>)> {
    let window = raw.window;
    let o = window.index(origin).ok_or_else(|| {
        Error::InvalidArgument(format!("origin {origin} outside segment {window}"))
    })?;
    let n = window.len();
    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n];
    h[o] = ell;
    for j in o + 1..n {
        g[j] = g[j - 1] - raw.sites[j].gamma;
        h[j] = h[j - 1] + raw.sites[j - 1].beta;
    }
    for j in (0..o).rev() {
        g[j] = g[j + 1] + raw.sites[j + 1].gamma;
        h[j] = h[j + 1] - raw.sites[j].beta;
    }
    Ok((g, h))
}

fn origin_for(window: Window, case: CaseTag) -> i64 {
    match case {
        CaseTag::FullLine => 0i64.clamp(window.lo(), window.hi()),
        CaseTag::RightHalf | CaseTag::Finite => window.lo(),
        CaseTag::LeftHalf => window.hi(),
    }
}

/// Fixes `ℓ`. Segments with a cut on the left zero the entry bond phase;
/// segments open on the left but cut on the right zero the exit bond phase;
/// open segments use rules i–v around the origin `clamp(0, lo, hi)`.
pub fn choose_anchor(raw: &RawPhaseData, case: CaseTag) -> Anchor {
    let window = raw.window;
    let origin = origin_for(window, case);
    let (g, h0) = telescope(raw, 0.0, origin).expect("origin inside segment");
    let j = |x: i64| (x - window.lo()) as usize;
    // h at x+1 with ℓ = 0, including the virtual value past the right end
    let h_next = |x: i64| {
        if x == window.hi() {
            h0[j(x)] + raw.site(x).beta
        } else {
            h0[j(x + 1)]
        }
    };
    let anchor = |site: i64, rule: AnchorRule, ell: f64| Anchor {
        site,
        rule,
        ell,
        origin,
    };
    match case {
        CaseTag::RightHalf | CaseTag::Finite => {
            let lo = window.lo();
            let g_prev = g[0] + raw.site(lo).gamma;
            anchor(
                lo - 1,
                AnchorRule::Boundary,
                raw.bond(lo - 1).a + g_prev - h0[0],
            )
        }
        CaseTag::LeftHalf => {
            let hi = window.hi();
            anchor(
                hi,
                AnchorRule::Boundary,
                raw.bond(hi).a + g[j(hi)] - h_next(hi),
            )
        }
        CaseTag::FullLine => {
            let right = origin..=window.hi();
            let left = (window.lo()..origin).rev();
            let r_nz = |x: &i64| raw.site(*x).r != 0.0;
            let p_nz = |x: &i64| raw.bond(*x).p != 0.0;
            let kappa_ell = |w: i64| raw.site(w).alpha + g[j(w)] - h_next(w);
            let theta_ell = |w: i64| raw.bond(w).a + g[j(w)] - h_next(w);
            if let Some(w) = right.clone().find(r_nz) {
                anchor(w, AnchorRule::I, kappa_ell(w))
            } else if let Some(w) = left.clone().find(r_nz) {
                anchor(w, AnchorRule::II, kappa_ell(w))
            } else if let Some(w) = right.clone().find(p_nz) {
                anchor(w, AnchorRule::III, theta_ell(w))
            } else if let Some(w) = left.clone().find(p_nz) {
                anchor(w, AnchorRule::IV, theta_ell(w))
            } else {
                anchor(origin, AnchorRule::V, 0.0)
            }
        }
    }
}

/// Maximal runs of sites between cuts, with their case tags.
pub fn segment_walk(report: &AdmissibilityReport, geometry: Geometry) -> Vec<SegmentSpec> {
    let window = report.window;
    let mut ends: Vec<i64> = report.cuts.clone();
    ends.sort_unstable();
    ends.push(window.hi());
    let mut out = Vec::with_capacity(ends.len());
    let mut start = window.lo();
    for end in ends {
        let open_left = geometry.open_left() && start == window.lo();
        let open_right = geometry.open_right() && end == window.hi();
        let case = match (open_left, open_right) {
            (true, true) => CaseTag::FullLine,
            (false, true) => CaseTag::RightHalf,
            (true, false) => CaseTag::LeftHalf,
            (false, false) => CaseTag::Finite,
        };
        out.push(SegmentSpec {
            window: Window::new(start, end).expect("segment inside window"),
            case,
        });
        start = end + 1;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalSegment {
    pub spec: SegmentSpec,
    /// Parameters on the segment window; the entry bond phase is
    /// `params.entry_theta()`.
    pub params: SSQWParams,
    pub anchor: Anchor,
    /// `W₂W₁` on the segment window.
    pub gauge: GaugeTransform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalForm {
    pub window: Window,
    pub geometry: Geometry,
    pub segments: Vec<CanonicalSegment>,
}

impl CanonicalForm {
    /// The gauge on the whole window.
    pub fn gauge(&self) -> GaugeTransform {
        let parts: Vec<GaugeTransform> = self.segments.iter().map(|s| s.gauge.clone()).collect();
        GaugeTransform::concat(&parts).expect("segments tile the window")
    }

    /// `⊕` of the canonical segment operators.
    pub fn operator(&self) -> WalkOperator {
        let parts: Vec<WalkOperator> = self
            .segments
            .iter()
            .map(|s| build_canonical(&s.params))
            .collect();
        WalkOperator::direct_sum(&parts).expect("segments tile the window")
    }

    /// `‖W U W* − U_{p,r,θ,κ}‖`.
    pub fn certificate_residual(&self, u: &WalkOperator) -> Result<f64> {
        let moved = crate::builders::apply_gauge(u, &self.gauge())?;
        operator_distance(&moved.to_dense(), &self.operator().to_dense())
    }

    pub fn segment_at(&self, x: i64) -> Option<&CanonicalSegment> {
        self.segments.iter().find(|s| s.spec.window.contains(x))
    }
}

/// One piece of a walk split at its cuts.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Part {
    Segment(CanonicalSegment),
    Isolated { site: i64, block: Mat2 },
}

pub(crate) fn canonicalize_segment(
    u: &WalkOperator,
    spec: SegmentSpec,
) -> Result<CanonicalSegment> {
    let sub = u.restrict(spec.window)?;
    let eta = extract_eta(&sub)?;
    let bases = extract_zeta_xi(&sub, &eta)?;
    let raw = extract_raw_phases(&bases);
    let anchor = choose_anchor(&raw, spec.case);
    let (g, mut h) = telescope(&raw, anchor.ell, anchor.origin)?;

    let window = spec.window;
    let n = window.len();
    let h_next = |h: &[f64], j: usize| {
        if j + 1 < n {
            h[j + 1]
        } else {
            h[j] + raw.sites[j].beta
        }
    };
    let g_prev = g[0] + raw.sites[0].gamma;
    let mut entry = raw.bonds[0].a + g_prev - h[0];
    let mut theta: Vec<f64> = (0..n)
        .map(|j| raw.bonds[j + 1].a + g[j] - h_next(&h, j))
        .collect();
    let mut kappa: Vec<f64> = (0..n)
        .map(|j| raw.sites[j].alpha + g[j] - h_next(&h, j))
        .collect();

    // remove rounding left at the anchor
    let residual = match anchor.rule {
        AnchorRule::I | AnchorRule::II => kappa[(anchor.site - window.lo()) as usize],
        AnchorRule::III | AnchorRule::IV => theta[(anchor.site - window.lo()) as usize],
        AnchorRule::Boundary if anchor.site < window.lo() => entry,
        AnchorRule::Boundary => theta[(anchor.site - window.lo()) as usize],
        AnchorRule::V => 0.0,
    };
    let residual = (residual + PI).rem_euclid(2.0 * PI) - PI;
    entry -= residual;
    for v in theta.iter_mut().chain(kappa.iter_mut()) {
        *v -= residual;
    }
    for v in h.iter_mut() {
        *v += residual;
    }
    match anchor.rule {
        AnchorRule::I | AnchorRule::II => kappa[(anchor.site - window.lo()) as usize] = 0.0,
        AnchorRule::III | AnchorRule::IV => theta[(anchor.site - window.lo()) as usize] = 0.0,
        AnchorRule::Boundary if anchor.site < window.lo() => entry = 0.0,
        AnchorRule::Boundary => theta[(anchor.site - window.lo()) as usize] = 0.0,
        AnchorRule::V => {}
    }

    let sites: Vec<SiteParams> = (0..n)
        .map(|j| {
            let p = raw.bonds[j + 1].p;
            let r = raw.sites[j].r;
            SiteParams {
                p,
                r,
                theta: if p == 0.0 { 0.0 } else { wrap_phase(theta[j]) },
                kappa: if r == 0.0 { 0.0 } else { wrap_phase(kappa[j]) },
            }
        })
        .collect();
    let mut cut_after = vec![false; n];
    cut_after[n - 1] = true;
    let params = SSQWParams::with_entry(window, sites, cut_after, wrap_phase(entry))?;

    let w1 = build_w1(&bases);
    let w2 = GaugeTransform::diagonal(window, &g, &h)?;
    let gauge = w2.compose(&w1)?;
    Ok(CanonicalSegment {
        spec,
        params,
        anchor: Anchor {
            ell: anchor.ell + residual,
            ..anchor
        },
        gauge,
    })
}

/// Splits at cuts and canonicalizes every segment of more than one site.
/// Needs unitarity, rank and Assumption A; isolated blocks are passed
/// through.
pub(crate) fn canonical_parts(
    u: &WalkOperator,
    report: &AdmissibilityReport,
    geometry: Geometry,
) -> Result<Vec<Part>> {
    segment_walk(report, geometry)
        .into_iter()
        .map(|spec| {
            if spec.is_isolated() {
                let x = spec.window.lo();
                Ok(Part::Isolated {
                    site: x,
                    block: u.block(x, x),
                })
            } else {
                canonicalize_segment(u, spec).map(Part::Segment)
            }
        })
        .collect()
}

/// Reduces an admissible walk to `U_{p,r,θ,κ}` segment by segment.
pub fn canonicalize(u: &WalkOperator, geometry: Geometry) -> Result<CanonicalForm> {
    let report = check_admissibility(u);
    if !report.all_ok() {
        return Err(Error::NotAdmissible(Box::new(report)));
    }
    let segments = canonical_parts(u, &report, geometry)?
        .into_iter()
        .map(|p| match p {
            Part::Segment(s) => Ok(s),
            Part::Isolated { site, .. } => Err(Error::DegenerateFrame { site }),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CanonicalForm {
        window: u.window(),
        geometry,
        segments,
    })
}

/// Largest circle or absolute deviation between two parameter sets on the
/// same window.
pub fn params_deviation(a: &SSQWParams, b: &SSQWParams) -> f64 {
    if a.window() != b.window() {
        return f64::INFINITY;
    }
    let mut dev = circle_distance(a.entry_theta(), b.entry_theta());
    for (x, y) in a.sites().iter().zip(b.sites()) {
        dev = dev
            .max((x.p - y.p).abs())
            .max((x.r - y.r).abs())
            .max(circle_distance(x.theta, y.theta))
            .max(circle_distance(x.kappa, y.kappa));
    }
    if a.cut_flags() != b.cut_flags() {
        dev = f64::INFINITY;
    }
    dev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{
        apply_gauge, random_admissible_walk, random_gauge, random_ssqw_params, WalkProfile,
    };
    use crate::linalg::cis;
    use crate::operator::rank_profile;

    fn w(lo: i64, hi: i64) -> Window {
        Window::new(lo, hi).unwrap()
    }

    fn only_params(form: &CanonicalForm) -> SSQWParams {
        assert_eq!(form.segments.len(), 1);
        form.segments[0].params.clone()
    }

    #[test]
    fn gauge_certificate_on_random_walks() {
        for geometry in [
            Geometry::Line,
            Geometry::HalfLeft,
            Geometry::HalfRight,
            Geometry::Finite,
        ] {
            let prof = WalkProfile {
                zero_p: vec![2],
                zero_r: vec![5],
                cuts: vec![7],
            };
            let u = random_admissible_walk(21, w(0, 13), &prof).unwrap();
            let form = canonicalize(&u, geometry).unwrap();
            assert_eq!(form.segments.len(), 2);
            let res = form.certificate_residual(&u).unwrap();
            assert!(res < 1e-9, "{geometry}: {res}");
        }
    }

    #[test]
    fn canonical_input_with_anchor_is_a_fixed_point() {
        let p = random_ssqw_params(3, w(1, 9), &WalkProfile::default()).unwrap();
        let first = only_params(&canonicalize(&build_canonical(&p), Geometry::Finite).unwrap());
        assert_eq!(first.entry_theta(), 0.0);
        let again = only_params(&canonicalize(&build_canonical(&first), Geometry::Finite).unwrap());
        assert!(params_deviation(&first, &again) < 1e-9);
        // finite segments only lose the entry phase
        let shift = p.entry_theta();
        for (a, b) in p.sites().iter().zip(first.sites()) {
            assert!(circle_distance(a.theta - shift, b.theta) < 1e-9);
            assert!(circle_distance(a.kappa - shift, b.kappa) < 1e-9);
        }
    }

    #[test]
    fn gauged_canonical_walk_round_trips() {
        for seed in 0..20 {
            let prof = WalkProfile {
                zero_p: vec![3],
                zero_r: vec![1, 4],
                cuts: vec![],
            };
            let p = random_ssqw_params(seed, w(-4, 5), &prof).unwrap();
            let u = build_canonical(&p);
            for geometry in [
                Geometry::Line,
                Geometry::HalfLeft,
                Geometry::HalfRight,
                Geometry::Finite,
            ] {
                let fixed = only_params(&canonicalize(&u, geometry).unwrap());
                let g = random_gauge(seed + 100, u.window(), false);
                let v = apply_gauge(&u, &g).unwrap();
                let back = only_params(&canonicalize(&v, geometry).unwrap());
                let dev = params_deviation(&fixed, &back);
                assert!(dev < 1e-9, "seed {seed} {geometry}: {dev}");
            }
        }
    }

    #[test]
    fn raw_phases_of_canonical_input() {
        let p = random_ssqw_params(7, w(0, 7), &WalkProfile::default()).unwrap();
        let u = build_canonical(&p);
        let bases = extract_zeta_xi(&u, &extract_eta(&u).unwrap()).unwrap();
        let raw = extract_raw_phases(&bases);
        assert!(raw.convention_residual() < 1e-10);
        for x in 0..7 {
            assert!((raw.bond(x).p - p.site(x).unwrap().p).abs() < 1e-12);
            assert!((raw.site(x).r - p.site(x).unwrap().r).abs() < 1e-12);
        }
    }

    #[test]
    fn p_zero_bond_has_zero_phase() {
        let prof = WalkProfile {
            zero_p: vec![3],
            ..Default::default()
        };
        let u = random_admissible_walk(2, w(0, 7), &prof).unwrap();
        let bases = extract_zeta_xi(&u, &extract_eta(&u).unwrap()).unwrap();
        let raw = extract_raw_phases(&bases);
        assert_eq!(raw.bond(3).p, 0.0);
        assert_eq!(raw.bond(3).a, 0.0);
        assert!(raw.convention_residual() < 1e-10);
    }

    #[test]
    fn telescoping_recurrences() {
        let u = random_admissible_walk(9, w(-3, 6), &WalkProfile::default()).unwrap();
        let raw = extract_raw_phases(&extract_zeta_xi(&u, &extract_eta(&u).unwrap()).unwrap());
        let (g, h) = telescope(&raw, 0.4, 0).unwrap();
        assert_eq!(g[3], 0.0);
        assert_eq!(h[3], 0.4);
        for j in 1..g.len() {
            assert!((g[j] - g[j - 1] + raw.sites[j].gamma).abs() < 1e-12);
            assert!((h[j] - h[j - 1] - raw.sites[j - 1].beta).abs() < 1e-12);
        }
        let trivial = RawPhaseData {
            window: w(0, 3),
            bonds: vec![BondPhases::default(); 5],
            sites: vec![
                SitePhases {
                    gamma: 0.25,
                    ..Default::default()
                };
                4
            ],
        };
        let (g, _) = telescope(&trivial, 0.0, 0).unwrap();
        assert!((g[3] + 0.75).abs() < 1e-15);
        let id = telescope_phases(
            &RawPhaseData {
                sites: vec![SitePhases::default(); 4],
                ..trivial
            },
            0.0,
            0,
        )
        .unwrap();
        assert_eq!(
            id,
            GaugeTransform::diagonal(w(0, 3), &[0.0; 4], &[0.0; 4]).unwrap()
        );
    }

    fn raw_with(r: &[f64], p: &[f64], lo: i64) -> RawPhaseData {
        let n = r.len();
        let window = w(lo, lo + n as i64 - 1);
        let mut bonds = vec![
            BondPhases {
                p: 1.0,
                ..Default::default()
            };
            n + 1
        ];
        for (k, &pv) in p.iter().enumerate() {
            bonds[k + 1].p = pv;
        }
        let sites = r
            .iter()
            .map(|&r| SitePhases {
                r,
                ..Default::default()
            })
            .collect();
        RawPhaseData {
            window,
            bonds,
            sites,
        }
    }

    #[test]
    fn anchor_rules() {
        // r = p = 0 everywhere except the closing cut: rule iii lands on it
        let raw = raw_with(&[0.0; 5], &[0.0, 0.0, 0.0, 0.0, 1.0], -2);
        let a = choose_anchor(&raw, CaseTag::FullLine);
        assert_eq!((a.rule, a.site), (AnchorRule::III, 2));
        let raw = raw_with(&[0.0; 5], &[0.0; 5], -2);
        let a = choose_anchor(&raw, CaseTag::FullLine);
        assert_eq!((a.rule, a.site, a.ell), (AnchorRule::V, 0, 0.0));
        let raw = raw_with(&[0.0, 0.0, 0.5, 0.0, 0.0], &[0.5; 5], -2);
        assert_eq!(choose_anchor(&raw, CaseTag::FullLine).rule, AnchorRule::I);
        let raw = raw_with(&[0.0, 0.5, 0.0, 0.0, 0.0], &[0.5; 5], -3);
        let a = choose_anchor(&raw, CaseTag::FullLine);
        assert_eq!((a.rule, a.site), (AnchorRule::II, -2));
        let a = choose_anchor(&raw, CaseTag::Finite);
        assert_eq!((a.rule, a.site), (AnchorRule::Boundary, -4));
    }

    #[test]
    fn anchor_zeroes_kappa() {
        let p = random_ssqw_params(
            12,
            w(-3, 4),
            &WalkProfile {
                zero_r: vec![0, 1],
                ..Default::default()
            },
        )
        .unwrap();
        let form = canonicalize(&build_canonical(&p), Geometry::Line).unwrap();
        let seg = &form.segments[0];
        assert_eq!((seg.anchor.rule, seg.anchor.site), (AnchorRule::I, 2));
        assert_eq!(seg.params.site(2).unwrap().kappa, 0.0);
    }

    #[test]
    fn segmentation_tags() {
        let prof = WalkProfile {
            cuts: vec![0],
            ..Default::default()
        };
        let u = random_admissible_walk(1, w(-3, 4), &prof).unwrap();
        let rep = check_admissibility(&u);
        let segs = segment_walk(&rep, Geometry::Line);
        assert_eq!(
            segs.iter().map(|s| s.case.number()).collect::<Vec<_>>(),
            vec![3, 2]
        );
        let prof = WalkProfile {
            cuts: vec![0, 4],
            ..Default::default()
        };
        let u = random_admissible_walk(1, w(-3, 8), &prof).unwrap();
        let segs = segment_walk(&check_admissibility(&u), Geometry::Line);
        assert_eq!(segs[1].window, w(1, 4));
        assert_eq!(segs[1].case, CaseTag::Finite);
        let one = segment_walk(
            &check_admissibility(
                &random_admissible_walk(1, w(0, 5), &WalkProfile::default()).unwrap(),
            ),
            Geometry::Line,
        );
        assert_eq!(one[0].case, CaseTag::FullLine);
        assert_eq!(rank_profile(&u).cuts(), vec![0, 4]);
    }

    #[test]
    fn suzuki_like_walk_has_zero_phases() {
        use crate::builders::{build_suzuki, random_suzuki_params};
        let s = random_suzuki_params(5, w(0, 9), &[], true);
        let form = canonicalize(&build_suzuki(&s), Geometry::Finite).unwrap();
        for sp in form.segments[0].params.sites() {
            assert!(circle_distance(sp.theta, 0.0) < 1e-9);
            assert!(circle_distance(sp.kappa, 0.0) < 1e-9);
        }
        let _ = cis(0.0);
    }

    #[test]
    fn inadmissible_input_is_rejected() {
        let u = crate::builders::build_kitagawa(&crate::builders::KitagawaParams::new(
            w(0, 5),
            PI / 2.0,
            0.3,
        ));
        assert!(matches!(
            canonicalize(&u, Geometry::Finite),
            Err(Error::NotAdmissible(_))
        ));
    }
}
