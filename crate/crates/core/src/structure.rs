//! Admissibility checks and the local bases `η`, `ζ`, `ξ` of the structure
//! theorem `U = Σ_x |ξ₁^x⟩⟨ζ₁^x| + |ξ₂^x⟩⟨ζ₂^x|`.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{
    complement, dot, fix_phase, norm, orthonormalize_against, Mat2, C64, ONE, V2, ZERO,
};
use crate::operator::{
    block_rank, check_unitary, rank_profile, RankProfile, WalkOperator, Window, RANK_TOL,
};

/// Overlap allowed between directions that must be orthogonal.
pub const ORTHO_TOL: f64 = 1e-8;

/// Residual below which a column counts as one of the excluded half-shift
/// shapes.
pub const EXCLUDE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub window: Window,
    /// Always true for a `WalkOperator`, whose storage is banded.
    pub band_ok: bool,
    pub unitary_ok: bool,
    pub unitary_residual: f64,
    pub rank_ok: bool,
    pub rank_offenders: Vec<i64>,
    pub assumption_a_ok: bool,
    pub assumption_a_offenders: Vec<i64>,
    pub assumption_b_ok: bool,
    pub assumption_b_offenders: Vec<i64>,
    /// Bonds `(x, x+1)` with both off-diagonal ranks zero, labelled by `x`.
    pub cuts: Vec<i64>,
    pub profile: RankProfile,
}

impl AdmissibilityReport {
    pub fn all_ok(&self) -> bool {
        self.band_ok
            && self.unitary_ok
            && self.rank_ok
            && self.assumption_a_ok
            && self.assumption_b_ok
    }
}

fn list(v: &[i64]) -> String {
    let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(", "))
}

impl fmt::Display for AdmissibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "window: {}", self.window)?;
        writeln!(f, "band_ok: {}", self.band_ok)?;
        writeln!(f, "unitary_ok: {}", self.unitary_ok)?;
        writeln!(f, "unitary_residual: {:e}", self.unitary_residual)?;
        writeln!(f, "rank_ok: {}", self.rank_ok)?;
        writeln!(f, "assumption_a_ok: {}", self.assumption_a_ok)?;
        writeln!(f, "assumption_b_ok: {}", self.assumption_b_ok)?;
        writeln!(f, "cuts: {}", list(&self.cuts))?;
        write!(
            f,
            "offenders: {{rank: {}, assumption_a: {}, assumption_b: {}}}",
            list(&self.rank_offenders),
            list(&self.assumption_a_offenders),
            list(&self.assumption_b_offenders)
        )
    }
}

/// Range directions at one site, before completion.
struct EtaScan {
    pairs: Vec<[V2; 2]>,
    /// First site where the two ranges are not orthogonal, with the overlap.
    skew: Option<(i64, f64)>,
}

fn scan_eta(u: &WalkOperator, prof: &RankProfile) -> EtaScan {
    let window = u.window();
    let mut skew = None;
    let pairs = window
        .sites()
        .map(|x| {
            let down = prof.bond(x).map_or(0, |b| b.down);
            let up = prof.bond(x - 1).map_or(0, |b| b.up);
            let e1 = (down >= 1)
                .then(|| u.block(x, x + 1).range_direction())
                .flatten()
                .map(|v| fix_phase(&v));
            let e2 = (up >= 1)
                .then(|| u.block(x, x - 1).range_direction())
                .flatten()
                .map(|v| fix_phase(&v));
            match (e1, e2) {
                (Some(a), Some(b)) => {
                    let ov = dot(&a, &b).norm();
                    if ov > ORTHO_TOL && skew.is_none() {
                        skew = Some((x, ov));
                    }
                    let b = orthonormalize_against(&b, &a).unwrap_or_else(|| complement(&a));
                    [a, fix_phase(&b)]
                }
                (Some(a), None) => [a, fix_phase(&complement(&a))],
                (None, Some(b)) => [fix_phase(&complement(&b)), b],
                (None, None) => [[ONE, ZERO], [ZERO, ONE]],
            }
        })
        .collect();
    EtaScan { pairs, skew }
}

/// Per-site pairs `{η₁^x, η₂^x}` with `Ran P_x U P_{x+1} = C η₁^x` and
/// `Ran P_x U P_{x−1} = C η₂^x`. At rank-0 bonds the free vector is the
/// orthogonal complement of the determined one; every vector has its first
/// non-negligible component real and positive.
pub fn extract_eta(u: &WalkOperator) -> Result<Vec<[V2; 2]>> {
    let prof = rank_profile(u);
    if let Some(&bond) = prof.rank2_bonds().first() {
        return Err(Error::RankViolation { bond });
    }
    let scan = scan_eta(u, &prof);
    if let Some((site, overlap)) = scan.skew {
        return Err(Error::OrthogonalityFailure { site, overlap });
    }
    Ok(scan.pairs)
}

fn proj_residual(m: &Mat2, dir: Option<&V2>) -> f64 {
    match dir {
        Some(d) => (*m - Mat2::outer(d, d) * *m).norm(),
        None => m.norm(),
    }
}

/// Residuals of the two excluded shapes at site `y`:
/// `UP_y = |η₁^{y−1}⟩⟨ζ₁| + |η₂^y⟩⟨ζ₂|` and `UP_y = |η₁^y⟩⟨ζ₁| + |η₂^{y+1}⟩⟨ζ₂|`.
fn exclusion_residuals(u: &WalkOperator, eta: &[[V2; 2]], y: i64) -> (f64, f64) {
    let w = u.window();
    let eta_at = |x: i64, k: usize| w.index(x).map(|j| &eta[j][k]);
    let (bm, b0, bp) = (u.block(y - 1, y), u.block(y, y), u.block(y + 1, y));
    let gram = bm.adjoint() * bm + b0.adjoint() * b0 + bp.adjoint() * bp;
    let iso = (gram - Mat2::identity()).norm();
    let left =
        bp.norm() + proj_residual(&b0, eta_at(y, 1)) + proj_residual(&bm, eta_at(y - 1, 0)) + iso;
    let right =
        bm.norm() + proj_residual(&b0, eta_at(y, 0)) + proj_residual(&bp, eta_at(y + 1, 1)) + iso;
    (left, right)
}

/// Band, rank, unitarity and Assumptions A and B. Never fails; problems are
/// reported.
pub fn check_admissibility(u: &WalkOperator) -> AdmissibilityReport {
    let window = u.window();
    let profile = rank_profile(u);
    let unit = check_unitary(u);
    let rank_offenders = profile.rank2_bonds();
    let cuts = profile.cuts();
    let scan = scan_eta(u, &profile);

    let assumption_a_offenders: Vec<i64> = window
        .sites()
        .filter(|&y| {
            let (l, r) = exclusion_residuals(u, &scan.pairs, y);
            l < EXCLUDE_TOL || r < EXCLUDE_TOL
        })
        .collect();

    // window ends count as cuts
    let is_cut = |x: i64| x < window.lo() || x >= window.hi() || cuts.contains(&x);
    let assumption_b_offenders: Vec<i64> = window
        .sites()
        .filter(|&x| is_cut(x - 1) && is_cut(x))
        .collect();

    AdmissibilityReport {
        window,
        band_ok: true,
        unitary_ok: unit.ok,
        unitary_residual: unit.residual,
        rank_ok: rank_offenders.is_empty(),
        rank_offenders,
        assumption_a_ok: assumption_a_offenders.is_empty(),
        assumption_a_offenders,
        assumption_b_ok: assumption_b_offenders.is_empty(),
        assumption_b_offenders,
        cuts,
        profile,
    }
}

/// Local frames of the structure theorem.
///
/// `xi[j][0]` holds `ξ₁^x` as coefficients on `(η₁^x, η₂^{x+1})` and
/// `xi[j][1]` holds `ξ₂^x` as coefficients on `(η₁^{x−1}, η₂^x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalBases {
    pub window: Window,
    pub eta: Vec<[V2; 2]>,
    pub zeta: Vec<[V2; 2]>,
    pub xi: Vec<[[C64; 2]; 2]>,
}

impl LocalBases {
    pub fn eta(&self, x: i64) -> Option<&[V2; 2]> {
        self.window.index(x).map(|j| &self.eta[j])
    }

    pub fn zeta(&self, x: i64) -> Option<&[V2; 2]> {
        self.window.index(x).map(|j| &self.zeta[j])
    }

    pub fn xi(&self, x: i64) -> Option<&[[C64; 2]; 2]> {
        self.window.index(x).map(|j| &self.xi[j])
    }

    /// `Σ_x |ξ₁^x⟩⟨ζ₁^x| + |ξ₂^x⟩⟨ζ₂^x|`.
    pub fn reconstruct(&self) -> WalkOperator {
        let n = self.window.len();
        let cols = (0..n)
            .map(|j| {
                let [z1, z2] = self.zeta[j];
                let [c1, c2] = self.xi[j];
                let mut col = [Mat2::zero(); 3];
                let here1 = crate::linalg::scale(&self.eta[j][0], c1[0]);
                let here2 = crate::linalg::scale(&self.eta[j][1], c2[1]);
                col[1] = Mat2::outer(&here1, &z1) + Mat2::outer(&here2, &z2);
                if j + 1 < n {
                    let up = crate::linalg::scale(&self.eta[j + 1][1], c1[1]);
                    col[2] = Mat2::outer(&up, &z1);
                }
                if j > 0 {
                    let down = crate::linalg::scale(&self.eta[j - 1][0], c2[0]);
                    col[0] = Mat2::outer(&down, &z2);
                }
                col
            })
            .collect();
        WalkOperator::from_columns(self.window, cols).expect("blocks stay inside the window")
    }

    pub fn restrict(&self, sub: Window) -> Result<LocalBases> {
        if !self.window.contains_window(&sub) {
            return Err(Error::WindowMismatch(format!(
                "{sub} is not inside {}",
                self.window
            )));
        }
        let a = self.window.index(sub.lo()).unwrap();
        let b = self.window.index(sub.hi()).unwrap();
        Ok(LocalBases {
            window: sub,
            eta: self.eta[a..=b].to_vec(),
            zeta: self.zeta[a..=b].to_vec(),
            xi: self.xi[a..=b].to_vec(),
        })
    }

    /// Largest deviation from orthonormality over all `η` and `ζ` pairs
    /// and from unit norm over all `ξ`.
    pub fn frame_defect(&self) -> f64 {
        let pair = |p: &[V2; 2]| {
            (norm(&p[0]) - 1.0)
                .abs()
                .max((norm(&p[1]) - 1.0).abs())
                .max(dot(&p[0], &p[1]).norm())
        };
        let xi = |c: &[C64; 2]| ((c[0].norm_sqr() + c[1].norm_sqr()).sqrt() - 1.0).abs();
        self.eta
            .iter()
            .chain(&self.zeta)
            .map(pair)
            .chain(self.xi.iter().flat_map(|c| [xi(&c[0]), xi(&c[1])]))
            .fold(0.0, f64::max)
    }
}

/// Completes `η` to the full local frames: `ζ₁^x` spans the kernel of
/// `P_{x−1} U P_x`, `ζ₂^x` the kernel of `P_{x+1} U P_x`, and `ξ = Uζ` is
/// expanded in the `η` frame.
pub fn extract_zeta_xi(u: &WalkOperator, eta: &[[V2; 2]]) -> Result<LocalBases> {
    let window = u.window();
    if eta.len() != window.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} eta pairs for window {window}",
            eta.len()
        )));
    }
    let eta_at = |x: i64, k: usize| window.index(x).map(|j| eta[j][k]);
    let mut zeta = Vec::with_capacity(window.len());
    let mut xi = Vec::with_capacity(window.len());
    for x in window.sites() {
        let (bm, b0, bp) = (u.block(x - 1, x), u.block(x, x), u.block(x + 1, x));
        let rm = block_rank(&bm, RANK_TOL);
        let rp = block_rank(&bp, RANK_TOL);
        if rm == 2 {
            return Err(Error::RankViolation { bond: x - 1 });
        }
        if rp == 2 {
            return Err(Error::RankViolation { bond: x });
        }
        let k1 = (rm == 1).then(|| bm.kernel_direction()).flatten();
        let k2 = (rp == 1).then(|| bp.kernel_direction()).flatten();
        let [z1, z2] = match (k1, k2) {
            (Some(a), Some(b)) => {
                let ov = dot(&a, &b).norm();
                if ov > ORTHO_TOL {
                    return Err(Error::OrthogonalityFailure {
                        site: x,
                        overlap: ov,
                    });
                }
                let a = fix_phase(&a);
                let b = orthonormalize_against(&b, &a).ok_or(Error::DegenerateFrame { site: x })?;
                [a, fix_phase(&b)]
            }
            (Some(a), None) => {
                let a = fix_phase(&a);
                [a, fix_phase(&complement(&a))]
            }
            (None, Some(b)) => {
                let b = fix_phase(&b);
                [fix_phase(&complement(&b)), b]
            }
            (None, None) => return Err(Error::DegenerateFrame { site: x }),
        };
        let coef = |e: Option<V2>, v: V2| e.map_or(ZERO, |e| dot(&e, &v));
        let xi1 = [
            coef(eta_at(x, 0), b0.apply(&z1)),
            coef(eta_at(x + 1, 1), bp.apply(&z1)),
        ];
        let xi2 = [
            coef(eta_at(x - 1, 0), bm.apply(&z2)),
            coef(eta_at(x, 1), b0.apply(&z2)),
        ];
        for c in [&xi1, &xi2] {
            let n = (c[0].norm_sqr() + c[1].norm_sqr()).sqrt();
            if (n - 1.0).abs() > ORTHO_TOL {
                return Err(Error::DegenerateFrame { site: x });
            }
        }
        zeta.push([z1, z2]);
        xi.push([xi1, xi2]);
    }
    Ok(LocalBases {
        window,
        eta: eta.to_vec(),
        zeta,
        xi,
    })
}
