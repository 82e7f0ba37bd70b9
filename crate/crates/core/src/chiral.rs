//! Chiral symmetry: certificates `U = ΓC` with `Γ`, `C` self-adjoint
//! unitaries, the closed-form reduction of Suzuki walks, and a numerical
//! search for site-diagonal symmetries.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::builders::{
    build_canonical, build_suzuki, suzuki_coin, suzuki_shift_column, GaugeTransform, SSQWParams,
    SiteParams, SuzukiParams,
};
use crate::canonical::{
    canonicalize, choose_anchor, segment_walk, Anchor, BondPhases, CanonicalForm, CanonicalSegment,
    Geometry, RawPhaseData, SitePhases,
};
use crate::error::{Error, Result};
use crate::linalg::{circle_distance, Mat2, C64, ONE, ZERO};
use crate::operator::{spectral_norm, DenseMatrix, WalkOperator, Window};
use crate::structure::check_admissibility;

/// Certificates are valid when every residual is below this.
pub const CERTIFICATE_TOL: f64 = 1e-10;
/// Phases closer than this to zero pass the `θ = κ = 0` gate.
pub const GATE_TOL: f64 = 1e-9;
/// `chiral_search` accepts a symmetry with `‖ΓUΓ − U*‖` below this.
pub const SEARCH_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiralResiduals {
    /// `‖Γ − Γ*‖`
    pub gamma_hermitian: f64,
    /// `‖Γ² − I‖`
    pub gamma_involution: f64,
    /// `‖C − C*‖`
    pub coin_hermitian: f64,
    /// `‖C² − I‖`
    pub coin_involution: f64,
    /// `‖ΓC − U‖`
    pub factorization: f64,
    /// `‖ΓUΓ − U*‖`
    pub symmetry: f64,
}

impl ChiralResiduals {
    pub fn as_array(&self) -> [(&'static str, f64); 6] {
        [
            ("gamma_hermitian", self.gamma_hermitian),
            ("gamma_involution", self.gamma_involution),
            ("coin_hermitian", self.coin_hermitian),
            ("coin_involution", self.coin_involution),
            ("factorization", self.factorization),
            ("symmetry", self.symmetry),
        ]
    }

    pub fn max(&self) -> f64 {
        self.as_array().iter().map(|(_, v)| *v).fold(0.0, f64::max)
    }

    pub fn is_valid(&self) -> bool {
        self.max() < CERTIFICATE_TOL
    }
}

#[derive(Clone, Debug)]
pub struct ChiralCertificate {
    pub window: Window,
    pub gamma: DenseMatrix,
    pub coin: DenseMatrix,
    pub residuals: ChiralResiduals,
}

fn norm_or_inf(m: &DenseMatrix) -> f64 {
    spectral_norm(m).unwrap_or(f64::INFINITY)
}

fn certify(u: &WalkOperator, gamma: DenseMatrix, coin: DenseMatrix) -> ChiralCertificate {
    let ud = u.to_dense();
    let id = DenseMatrix::identity(ud.nrows(), ud.ncols());
    let residuals = ChiralResiduals {
        gamma_hermitian: norm_or_inf(&(&gamma - gamma.adjoint())),
        gamma_involution: norm_or_inf(&(&gamma * &gamma - &id)),
        coin_hermitian: norm_or_inf(&(&coin - coin.adjoint())),
        coin_involution: norm_or_inf(&(&coin * &coin - &id)),
        factorization: norm_or_inf(&(&gamma * &coin - &ud)),
        symmetry: norm_or_inf(&(&gamma * &ud * &gamma - ud.adjoint())),
    };
    ChiralCertificate {
        window: u.window(),
        gamma,
        coin,
        residuals,
    }
}

fn site_diagonal(window: Window, blocks: &[Mat2]) -> DenseMatrix {
    let dim = window.dim();
    let mut m = DenseMatrix::zeros(dim, dim);
    for (j, b) in blocks.iter().enumerate() {
        for r in 0..2 {
            for c in 0..2 {
                m[(2 * j + r, 2 * j + c)] = b.0[r][c];
            }
        }
    }
    m
}

/// `U = SC` for `θ = κ = 0`, with the shift
/// `S = [[p, qL], [L*q, −L*pL]]` and the coin `C_x = [[r, s], [s, −r]]`.
/// Returns `None` unless every `θ` (entry bond included) and `κ` is zero.
pub fn chiral_factorize(params: &SSQWParams) -> Option<ChiralCertificate> {
    let zero = |v: f64| circle_distance(v, 0.0) < GATE_TOL;
    if !zero(params.entry_theta())
        || !params
            .sites()
            .iter()
            .all(|s| zero(s.theta) && zero(s.kappa))
    {
        return None;
    }
    let window = params.window();
    let pq = |x: i64| -> (f64, f64) {
        if x < window.lo() {
            (1.0, 0.0)
        } else {
            (params.site(x).unwrap().p, params.q(x))
        }
    };
    let shift = window.sites().flat_map(|x| {
        let (p, q) = pq(x);
        let (pl, _) = pq(x - 1);
        let mut out = vec![(x, x, Mat2::real(p, 0.0, 0.0, -pl))];
        if x < window.hi() {
            out.push((x + 1, x, Mat2::real(0.0, 0.0, q, 0.0)));
            out.push((x, x + 1, Mat2::real(0.0, q, 0.0, 0.0)));
        }
        out
    });
    let gamma = WalkOperator::from_blocks(window, shift)
        .expect("shift is banded")
        .to_dense();
    let coins: Vec<Mat2> = params
        .sites()
        .iter()
        .map(|s| Mat2::real(s.r, s.s(), s.s(), -s.r))
        .collect();
    let coin = site_diagonal(window, &coins);
    // the gate tolerance allows tiny phases, so certify against θ = κ = 0
    let flat: Vec<SiteParams> = params
        .sites()
        .iter()
        .map(|s| SiteParams {
            theta: 0.0,
            kappa: 0.0,
            ..*s
        })
        .collect();
    let exact =
        SSQWParams::new(window, flat, params.cut_flags().to_vec()).expect("valid parameters");
    Some(certify(&build_canonical(&exact), gamma, coin))
}

/// `‖ΓUΓ − U*‖` for a self-adjoint unitary `Γ`.
pub fn verify_chiral(u: &WalkOperator, gamma: &DenseMatrix) -> Result<f64> {
    let dim = u.window().dim();
    if gamma.nrows() != dim || gamma.ncols() != dim {
        return Err(Error::ShapeMismatch(format!(
            "gamma is {}x{}, walk has dimension {dim}",
            gamma.nrows(),
            gamma.ncols()
        )));
    }
    let herm = norm_or_inf(&(gamma - gamma.adjoint()));
    let inv = norm_or_inf(&(gamma * gamma - DenseMatrix::identity(dim, dim)));
    if !(herm < CERTIFICATE_TOL && inv < CERTIFICATE_TOL) {
        return Err(Error::NotASymmetryCandidate(format!(
            "gamma is not a self-adjoint unitary (‖Γ − Γ*‖ = {herm:e}, ‖Γ² − I‖ = {inv:e})"
        )));
    }
    let ud = u.to_dense();
    spectral_norm(&(gamma * &ud * gamma - ud.adjoint()))
}

/// Suzuki's factorization `U = SC` read off directly.
pub fn suzuki_certificate(s: &SuzukiParams) -> ChiralCertificate {
    let window = s.window();
    let shift = window.sites().flat_map(|x| {
        let col = suzuki_shift_column(s, x);
        [(x - 1, x, col[0]), (x, x, col[1]), (x + 1, x, col[2])]
            .into_iter()
            .filter(|(t, _, _)| window.contains(*t))
    });
    let gamma = WalkOperator::from_blocks(window, shift)
        .expect("shift is banded")
        .to_dense();
    let coins: Vec<Mat2> = s.sites().iter().map(suzuki_coin).collect();
    certify(&build_suzuki(s), gamma, site_diagonal(window, &coins))
}

/// Closed-form reduction of a Suzuki walk: with `q_x = e^{iμ_x}|q_x|` and
/// `b_x = e^{iν_x}|b_x|` the gauge `g_{x+1} = g_x + μ_x + ν_{x+1}`,
/// `h_x = g_x − ν_x` makes every coefficient real, giving `(p, r) = (p, a)`
/// and `θ = κ = 0`.
pub fn suzuki_reduce(s: &SuzukiParams, geometry: Geometry) -> Result<CanonicalForm> {
    let u = build_suzuki(s);
    let window = s.window();
    if let Some(j) = s.sites().iter().position(|t| t.p < 0.0 || t.a < 0.0) {
        let generic = canonicalize(&u, geometry)?;
        return Err(Error::NegativeRealPart {
            site: window.site(j),
            generic: Box::new(generic),
        });
    }
    let report = check_admissibility(&u);
    if !report.all_ok() {
        return Err(Error::NotAdmissible(Box::new(report)));
    }

    let arg = |z: C64| if z == ZERO { 0.0 } else { z.arg() };
    let n = window.len();
    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n];
    for j in 0..n {
        let nu = arg(s.sites()[j].b);
        if j > 0 {
            g[j] = g[j - 1] + arg(s.sites()[j - 1].q) + nu;
        }
        h[j] = g[j] - nu;
    }
    let cuts = s.cuts();
    let sites: Vec<SiteParams> = s
        .sites()
        .iter()
        .map(|t| SiteParams::new(t.p.min(1.0), t.a.min(1.0), 0.0, 0.0))
        .collect();
    let cut_after: Vec<bool> = window
        .sites()
        .map(|x| cuts.contains(&x) || x == window.hi())
        .collect();
    let params = SSQWParams::new(window, sites, cut_after)?;

    let segments = segment_walk(&report, geometry)
        .into_iter()
        .map(|spec| {
            let sub = spec.window;
            let seg_params = params.restrict(sub)?;
            let raw = RawPhaseData {
                window: sub,
                bonds: std::iter::once(BondPhases {
                    p: 1.0,
                    ..Default::default()
                })
                .chain(seg_params.sites().iter().map(|t| BondPhases {
                    p: t.p,
                    q: t.q(),
                    ..Default::default()
                }))
                .collect(),
                sites: seg_params
                    .sites()
                    .iter()
                    .map(|t| SitePhases {
                        r: t.r,
                        s: t.s(),
                        ..Default::default()
                    })
                    .collect(),
            };
            let anchor = choose_anchor(&raw, spec.case);
            let a = window.index(sub.lo()).unwrap();
            let b = window.index(sub.hi()).unwrap();
            let (gs, hs) = (&g[a..=b], &h[a..=b]);
            let ell = hs[(anchor.origin - sub.lo()) as usize];
            Ok(CanonicalSegment {
                spec,
                params: seg_params,
                anchor: Anchor { ell, ..anchor },
                gauge: GaugeTransform::diagonal(sub, gs, hs)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CanonicalForm {
        window,
        geometry,
        segments,
    })
}

/// `Γ(n) = n·σ` for a unit vector given in spherical angles.
fn sigma(theta: f64, phi: f64) -> Mat2 {
    let (n1, n2, n3) = (
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    );
    Mat2::new(
        C64::from(n3),
        C64::new(n1, -n2),
        C64::new(n1, n2),
        C64::from(-n3),
    )
}

/// Per-site choice in the search: `±I` or `n·σ`.
#[derive(Clone, Copy, Debug)]
enum Local {
    Plus,
    Minus,
    Sigma(f64, f64),
}

impl Local {
    fn matrix(self) -> Mat2 {
        match self {
            Local::Plus => Mat2::identity(),
            Local::Minus => Mat2::identity().scale(-ONE),
            Local::Sigma(t, p) => sigma(t, p),
        }
    }

    /// Nearest point of the family to a 2×2 matrix, used to seed from a
    /// known coin.
    fn project(m: &Mat2) -> Local {
        let h = (*m + m.adjoint()).scale(C64::from(0.5));
        let tr = h.trace().re / 2.0;
        let n3 = (h.get(0, 0).re - h.get(1, 1).re) / 2.0;
        let n1 = h.get(1, 0).re;
        let n2 = h.get(1, 0).im;
        let len = (n1 * n1 + n2 * n2 + n3 * n3).sqrt();
        if len < tr.abs() {
            if tr >= 0.0 {
                Local::Plus
            } else {
                Local::Minus
            }
        } else if len == 0.0 {
            Local::Sigma(0.0, 0.0)
        } else {
            Local::Sigma((n3 / len).clamp(-1.0, 1.0).acos(), n2.atan2(n1))
        }
    }
}

struct Search<'a> {
    blocks: &'a [[Mat2; 3]],
    gamma: Vec<Mat2>,
}

impl Search<'_> {
    /// `‖Γ_t B Γ_x − B′*‖²` summed over blocks touching site `j`.
    fn local(&self, j: usize, gj: &Mat2) -> f64 {
        let n = self.gamma.len();
        let g = |k: usize| if k == j { *gj } else { self.gamma[k] };
        let mut acc =
            (g(j) * self.blocks[j][1] * g(j) - self.blocks[j][1].adjoint()).frobenius_sqr();
        for k in [j.wrapping_sub(1), j + 1] {
            if k >= n {
                continue;
            }
            // blocks[src][target − src + 1]
            let down = if k < j { 0 } else { 2 };
            let up = 2 - down;
            let bkj = self.blocks[j][down];
            let bjk = self.blocks[k][up];
            acc += (g(k) * bkj * g(j) - bjk.adjoint()).frobenius_sqr();
            acc += (g(j) * bjk * g(k) - bkj.adjoint()).frobenius_sqr();
        }
        acc
    }

    fn total(&self) -> f64 {
        let n = self.gamma.len();
        let mut acc = 0.0;
        for j in 0..n {
            acc += (self.gamma[j] * self.blocks[j][1] * self.gamma[j]
                - self.blocks[j][1].adjoint())
            .frobenius_sqr();
            if j + 1 < n {
                let (bup, bdown) = (self.blocks[j][2], self.blocks[j + 1][0]);
                acc += (self.gamma[j + 1] * bup * self.gamma[j] - bdown.adjoint()).frobenius_sqr();
                acc += (self.gamma[j] * bdown * self.gamma[j + 1] - bup.adjoint()).frobenius_sqr();
            }
        }
        acc
    }

    fn improve_site(&mut self, j: usize) {
        let mut best = (self.local(j, &self.gamma[j]), None::<Local>);
        let consider = |c: Local, best: &mut (f64, Option<Local>), s: &Search| {
            let v = s.local(j, &c.matrix());
            if v < best.0 {
                *best = (v, Some(c));
            }
        };
        consider(Local::Plus, &mut best, self);
        consider(Local::Minus, &mut best, self);
        const NT: usize = 12;
        const NP: usize = 24;
        for a in 0..=NT {
            for b in 0..NP {
                let c = Local::Sigma(PI * a as f64 / NT as f64, 2.0 * PI * b as f64 / NP as f64);
                consider(c, &mut best, self);
            }
        }
        if let Some(c) = best.1 {
            self.gamma[j] = c.matrix();
        }
        // pattern refinement around the current σ direction
        let Local::Sigma(mut t, mut p) = Local::project(&self.gamma[j]) else {
            return;
        };
        let mut val = self.local(j, &sigma(t, p));
        let mut step = PI / NT as f64;
        while step > 1e-13 {
            let mut moved = false;
            for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let v = self.local(j, &sigma(t + dt, p + dp));
                if v < val {
                    val = v;
                    t += dt;
                    p += dp;
                    moved = true;
                }
            }
            if !moved {
                step /= 2.0;
            }
        }
        if val < self.local(j, &self.gamma[j]) {
            self.gamma[j] = sigma(t, p);
        }
    }
}

/// Looks for a site-diagonal self-adjoint unitary `Γ = ⊕ Γ_x` with
/// `ΓUΓ = U*` by coordinate descent, `budget` sweeps in total spread over
/// a few restarts. The first restart starts from the coin of the canonical
/// form when `U` is admissible. `None` means inconclusive.
pub fn chiral_search(u: &WalkOperator, budget: usize, seed: u64) -> Option<ChiralCertificate> {
    const RESTARTS: usize = 4;
    if budget == 0 {
        return None;
    }
    let window = u.window();
    let n = window.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = u.columns();

    let canonical_seed = canonicalize(u, Geometry::Finite).ok().map(|form| {
        let g = form.gauge();
        form.segments
            .iter()
            .flat_map(|s| s.params.sites().to_vec())
            .zip(g.blocks())
            .map(|(sp, w)| {
                let c = Mat2::new(
                    crate::linalg::cis(-sp.kappa) * sp.r,
                    C64::from(sp.s()),
                    C64::from(sp.s()),
                    -crate::linalg::cis(sp.kappa) * sp.r,
                );
                w.adjoint() * c * *w
            })
            .collect::<Vec<_>>()
    });

    let mut remaining = budget;
    for restart in 0..RESTARTS {
        if remaining == 0 {
            break;
        }
        let share = if restart + 1 == RESTARTS {
            remaining
        } else {
            (budget / RESTARTS).max(1).min(remaining)
        };
        let start = match (&canonical_seed, restart) {
            (Some(c), 0) => c.clone(),
            _ => (0..n)
                .map(|_| sigma(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI)))
                .collect(),
        };
        let mut search = Search {
            blocks,
            gamma: start,
        };
        for _ in 0..share {
            if search.total().sqrt() < SEARCH_TOL * 1e-2 {
                break;
            }
            remaining -= 1;
            for j in 0..n {
                search.improve_site(j);
            }
        }
        if search.total().sqrt() < SEARCH_TOL {
            let gamma = site_diagonal(window, &search.gamma);
            let coin = &gamma * u.to_dense();
            let cert = certify(u, gamma, coin);
            if cert.residuals.symmetry < SEARCH_TOL {
                return Some(cert);
            }
        }
    }
    None
}
