//! Constructors for walks and gauge transforms.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    circle_distance, cis, dot, fix_phase, norm, normalize, scale, wrap_phase, Mat2, C64, V2, ZERO,
};
use crate::operator::{DenseMatrix, StateVector, WalkOperator, Window};

/// Tolerance on `p² + |q|² = 1` style constraints and on gauge unitarity.
pub const PARAM_TOL: f64 = 1e-12;

/// Canonical parameters of one site. `p` and `theta` belong to the bond
/// `(x, x+1)`, `r` and `kappa` to the site itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SiteParams {
    pub p: f64,
    pub r: f64,
    pub theta: f64,
    pub kappa: f64,
}

impl SiteParams {
    pub fn new(p: f64, r: f64, theta: f64, kappa: f64) -> Self {
        SiteParams { p, r, theta, kappa }
    }

    pub fn q(&self) -> f64 {
        (1.0 - self.p * self.p).max(0.0).sqrt()
    }

    pub fn s(&self) -> f64 {
        (1.0 - self.r * self.r).max(0.0).sqrt()
    }
}

/// Parameters of `U_{p,r,θ,κ}` on a window.
///
/// `cut_after[j]` forces `q = 0` on the bond to the right of the `j`-th
/// site; the last bond is always cut. At cut bonds `p` is stored as 1.
/// `entry_theta` is the phase of the (cut) bond entering the window from
/// the left, which survives in the block of the first site.
#[derive(Clone, Debug, PartialEq)]
pub struct SSQWParams {
    window: Window,
    sites: Vec<SiteParams>,
    cut_after: Vec<bool>,
    entry_theta: f64,
}

impl SSQWParams {
    pub fn new(window: Window, sites: Vec<SiteParams>, cut_after: Vec<bool>) -> Result<Self> {
        Self::with_entry(window, sites, cut_after, 0.0)
    }

    pub fn with_entry(
        window: Window,
        mut sites: Vec<SiteParams>,
        mut cut_after: Vec<bool>,
        entry_theta: f64,
    ) -> Result<Self> {
        let n = window.len();
        if sites.len() != n {
            return Err(Error::InvalidParams(format!(
                "{} sites given for window {window}",
                sites.len()
            )));
        }
        if cut_after.len() == n.saturating_sub(1) {
            cut_after.push(true);
        }
        if cut_after.len() != n {
            return Err(Error::InvalidParams(format!(
                "{} cut flags given for window {window}",
                cut_after.len()
            )));
        }
        cut_after[n - 1] = true;
        if !entry_theta.is_finite() {
            return Err(Error::InvalidParams("entry theta is not finite".into()));
        }
        for (j, sp) in sites.iter_mut().enumerate() {
            let x = window.site(j);
            for (name, v) in [("p", sp.p), ("r", sp.r)] {
                if !(v.is_finite() && (-PARAM_TOL..=1.0 + PARAM_TOL).contains(&v)) {
                    return Err(Error::InvalidParams(format!(
                        "{name} = {v} at site {x} is outside [0, 1]"
                    )));
                }
            }
            if !(sp.theta.is_finite() && sp.kappa.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "non-finite phase at site {x}"
                )));
            }
            sp.p = sp.p.clamp(0.0, 1.0);
            sp.r = sp.r.clamp(0.0, 1.0);
            if cut_after[j] {
                sp.p = 1.0;
            }
            sp.theta = wrap_phase(sp.theta);
            sp.kappa = wrap_phase(sp.kappa);
            if sp.p == 0.0 {
                if circle_distance(sp.theta, 0.0) > PARAM_TOL {
                    return Err(Error::InvalidParams(format!(
                        "theta must be 0 where p = 0 (site {x}, theta = {})",
                        sp.theta
                    )));
                }
                sp.theta = 0.0;
            }
            if sp.r == 0.0 {
                if circle_distance(sp.kappa, 0.0) > PARAM_TOL {
                    return Err(Error::InvalidParams(format!(
                        "kappa must be 0 where r = 0 (site {x}, kappa = {})",
                        sp.kappa
                    )));
                }
                sp.kappa = 0.0;
            }
        }
        Ok(SSQWParams {
            window,
            sites,
            cut_after,
            entry_theta: wrap_phase(entry_theta),
        })
    }

    /// Same parameters on every site, no interior cuts.
    pub fn uniform(window: Window, site: SiteParams) -> Result<Self> {
        Self::new(window, vec![site; window.len()], vec![false; window.len()])
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn sites(&self) -> &[SiteParams] {
        &self.sites
    }

    pub fn site(&self, x: i64) -> Option<&SiteParams> {
        self.window.index(x).map(|j| &self.sites[j])
    }

    pub fn cut_flags(&self) -> &[bool] {
        &self.cut_after
    }

    pub fn is_cut_after(&self, x: i64) -> bool {
        self.window.index(x).is_some_and(|j| self.cut_after[j])
    }

    /// Interior cut bonds.
    pub fn cuts(&self) -> Vec<i64> {
        self.window
            .bonds()
            .filter(|&x| self.is_cut_after(x))
            .collect()
    }

    pub fn entry_theta(&self) -> f64 {
        self.entry_theta
    }

    /// `q` on bond `(x, x+1)`, zero at cuts.
    pub fn q(&self, x: i64) -> f64 {
        match self.window.index(x) {
            Some(j) if !self.cut_after[j] => self.sites[j].q(),
            _ => 0.0,
        }
    }

    /// `(p, θ)` of bond `(x, x+1)`, including the entry bond `x = lo − 1`.
    fn bond(&self, x: i64) -> (f64, f64, f64) {
        if x == self.window.lo() - 1 {
            return (1.0, 0.0, self.entry_theta);
        }
        let j = self.window.index(x).expect("bond inside window");
        let sp = &self.sites[j];
        (sp.p, self.q(x), sp.theta)
    }

    /// Parameters of a sub-window; the entry phase is inherited from the
    /// bond entering it.
    pub fn restrict(&self, sub: Window) -> Result<SSQWParams> {
        if !self.window.contains_window(&sub) {
            return Err(Error::WindowMismatch(format!(
                "{sub} is not inside {}",
                self.window
            )));
        }
        let a = self.window.index(sub.lo()).unwrap();
        let b = self.window.index(sub.hi()).unwrap();
        let entry = self.bond(sub.lo() - 1).2;
        SSQWParams::with_entry(
            sub,
            self.sites[a..=b].to_vec(),
            self.cut_after[a..=b].to_vec(),
            entry,
        )
    }
}

/// Builds `U_{p,r,θ,κ}` on the window of `params`.
pub fn build_canonical(params: &SSQWParams) -> WalkOperator {
    let window = params.window;
    let cols = window
        .sites()
        .enumerate()
        .map(|(j, x)| {
            let sp = &params.sites[j];
            let (p, q, th) = params.bond(x);
            let (pl, ql, thl) = params.bond(x - 1);
            let (r, s) = (sp.r, sp.s());
            let v1 = [cis(sp.kappa) * r, C64::from(s)];
            let v2 = [C64::from(s), -cis(-sp.kappa) * r];
            let k1_here = [cis(th) * p, ZERO];
            let k1_up = [ZERO, C64::from(q)];
            let k2_down = [C64::from(ql), ZERO];
            let k2_here = [ZERO, -cis(-thl) * pl];
            [
                Mat2::outer(&k2_down, &v2),
                Mat2::outer(&k1_here, &v1) + Mat2::outer(&k2_here, &v2),
                Mat2::outer(&k1_up, &v1),
            ]
        })
        .collect();
    WalkOperator::from_columns(window, cols).expect("canonical blocks stay inside the window")
}

/// Kitagawa's split-step walk with angles `theta1`, `theta2`.
///
/// By default the `σ_x`-conjugated form
/// `[[sin θ₁, cos θ₁ L], [cos θ₁ L*, −sin θ₁]]·[[−sin θ₂, cos θ₂], [cos θ₂, sin θ₂]]`
/// is produced; `unconjugated` undoes the per-site `σ_x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KitagawaParams {
    pub window: Window,
    pub theta1: f64,
    pub theta2: f64,
    pub unconjugated: bool,
}

impl KitagawaParams {
    pub fn new(window: Window, theta1: f64, theta2: f64) -> Self {
        KitagawaParams {
            window,
            theta1,
            theta2,
            unconjugated: false,
        }
    }

    /// The equivalent Suzuki data.
    pub fn to_suzuki(&self) -> SuzukiParams {
        let site = SuzukiSite {
            p: self.theta1.sin(),
            a: -self.theta2.sin(),
            q: C64::from(self.theta1.cos()),
            b: C64::from(self.theta2.cos()),
        };
        SuzukiParams {
            window: self.window,
            sites: vec![site; self.window.len()],
        }
    }
}

pub fn build_kitagawa(k: &KitagawaParams) -> WalkOperator {
    let u = build_suzuki(&k.to_suzuki());
    if !k.unconjugated {
        return u;
    }
    let sx = Mat2::real(0.0, 1.0, 1.0, 0.0);
    let g = GaugeTransform::from_blocks(k.window, vec![sx; k.window.len()])
        .expect("sigma_x is unitary");
    apply_gauge(&u, &g).expect("same window")
}

/// Suzuki coefficients of one site: `p`, `q` on the bond `(x, x+1)` and
/// the coin `[[a, b̄], [b, −a]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuzukiSite {
    pub p: f64,
    pub a: f64,
    pub q: C64,
    pub b: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuzukiParams {
    window: Window,
    sites: Vec<SuzukiSite>,
}

impl SuzukiParams {
    pub fn new(window: Window, sites: Vec<SuzukiSite>) -> Result<Self> {
        if sites.len() != window.len() {
            return Err(Error::InvalidParams(format!(
                "{} sites given for window {window}",
                sites.len()
            )));
        }
        for (j, s) in sites.iter().enumerate() {
            let x = window.site(j);
            let finite = [s.p, s.a, s.q.re, s.q.im, s.b.re, s.b.im]
                .iter()
                .all(|v| v.is_finite());
            if !finite {
                return Err(Error::InvalidParams(format!(
                    "non-finite value at site {x}"
                )));
            }
            let e1 = (s.p * s.p + s.q.norm_sqr() - 1.0).abs();
            let e2 = (s.a * s.a + s.b.norm_sqr() - 1.0).abs();
            if e1 > PARAM_TOL {
                return Err(Error::InvalidParams(format!(
                    "p^2 + |q|^2 != 1 at site {x} (off by {e1:e})"
                )));
            }
            if e2 > PARAM_TOL {
                return Err(Error::InvalidParams(format!(
                    "a^2 + |b|^2 != 1 at site {x} (off by {e2:e})"
                )));
            }
        }
        Ok(SuzukiParams { window, sites })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn sites(&self) -> &[SuzukiSite] {
        &self.sites
    }

    /// `(p, q)` of bond `(x, x+1)` as used by the builder: the entry bond is
    /// `(1, 0)` and the last bond keeps only the sign of `p`.
    pub(crate) fn bond(&self, x: i64) -> (f64, C64) {
        if x == self.window.lo() - 1 {
            return (1.0, ZERO);
        }
        let s = &self.sites[self.window.index(x).expect("bond inside window")];
        if x == self.window.hi() {
            (if s.p < 0.0 { -1.0 } else { 1.0 }, ZERO)
        } else {
            (s.p, s.q)
        }
    }

    /// Interior bonds with `q = 0`.
    pub fn cuts(&self) -> Vec<i64> {
        self.window
            .bonds()
            .filter(|&x| self.bond(x).1 == ZERO)
            .collect()
    }
}

/// Blocks of the shift factor `S` leaving cell `x`: `(x−1, x, x+1)`.
pub(crate) fn suzuki_shift_column(s: &SuzukiParams, x: i64) -> [Mat2; 3] {
    let (p, q) = s.bond(x);
    let (pl, ql) = s.bond(x - 1);
    [
        Mat2::new(ZERO, ql, ZERO, ZERO),
        Mat2::diag(C64::from(p), C64::from(-pl)),
        Mat2::new(ZERO, ZERO, q.conj(), ZERO),
    ]
}

pub(crate) fn suzuki_coin(site: &SuzukiSite) -> Mat2 {
    Mat2::new(C64::from(site.a), site.b.conj(), site.b, C64::from(-site.a))
}

/// `U = SC` for Suzuki's split-step walk.
pub fn build_suzuki(s: &SuzukiParams) -> WalkOperator {
    let cols = s
        .window
        .sites()
        .enumerate()
        .map(|(j, x)| {
            let c = suzuki_coin(&s.sites[j]);
            suzuki_shift_column(s, x).map(|m| m * c)
        })
        .collect();
    WalkOperator::from_columns(s.window, cols).expect("Suzuki blocks stay inside the window")
}

/// A site-diagonal unitary `W = ⊕_x W_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeTransform {
    window: Window,
    blocks: Vec<Mat2>,
    phases: Option<Vec<(f64, f64)>>,
}

impl GaugeTransform {
    pub fn identity(window: Window) -> Self {
        GaugeTransform {
            window,
            blocks: vec![Mat2::identity(); window.len()],
            phases: Some(vec![(0.0, 0.0); window.len()]),
        }
    }

    /// `W_x = diag(e^{i g_x}, e^{i h_x})`.
    pub fn diagonal(window: Window, g: &[f64], h: &[f64]) -> Result<Self> {
        if g.len() != window.len() || h.len() != window.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} / {} phases for window {window}",
                g.len(),
                h.len()
            )));
        }
        if g.iter().chain(h).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite gauge phase".into()));
        }
        let blocks = g
            .iter()
            .zip(h)
            .map(|(&a, &b)| Mat2::diag(cis(a), cis(b)))
            .collect();
        Ok(GaugeTransform {
            window,
            blocks,
            phases: Some(g.iter().copied().zip(h.iter().copied()).collect()),
        })
    }

    pub fn from_blocks(window: Window, blocks: Vec<Mat2>) -> Result<Self> {
        if blocks.len() != window.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} blocks for window {window}",
                blocks.len()
            )));
        }
        for (j, b) in blocks.iter().enumerate() {
            let res = b.unitarity_residual();
            if !(res <= PARAM_TOL) {
                return Err(Error::InvalidParams(format!(
                    "gauge block at site {} is not unitary (residual {res:e})",
                    window.site(j)
                )));
            }
        }
        Ok(GaugeTransform {
            window,
            blocks,
            phases: None,
        })
    }

    pub fn global_phase(window: Window, phi: f64) -> Self {
        let v = vec![phi; window.len()];
        GaugeTransform::diagonal(window, &v, &v).expect("finite phase")
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn blocks(&self) -> &[Mat2] {
        &self.blocks
    }

    pub fn block(&self, x: i64) -> Option<&Mat2> {
        self.window.index(x).map(|j| &self.blocks[j])
    }

    /// `(g_x, h_x)` when the transform was built from diagonal phases.
    pub fn phases(&self) -> Option<&[(f64, f64)]> {
        self.phases.as_deref()
    }

    /// Largest `‖W_x* W_x − I‖` over sites.
    pub fn unitarity_residual(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.unitarity_residual())
            .fold(0.0, f64::max)
    }

    /// `self ∘ other`: `other` acts first.
    pub fn compose(&self, other: &GaugeTransform) -> Result<GaugeTransform> {
        if self.window != other.window {
            return Err(Error::WindowMismatch(format!(
                "{} vs {}",
                self.window, other.window
            )));
        }
        let phases = match (&self.phases, &other.phases) {
            (Some(a), Some(b)) => Some(
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x.0 + y.0, x.1 + y.1))
                    .collect(),
            ),
            _ => None,
        };
        Ok(GaugeTransform {
            window: self.window,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| *a * *b)
                .collect(),
            phases,
        })
    }

    pub fn adjoint(&self) -> GaugeTransform {
        GaugeTransform {
            window: self.window,
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
            phases: self
                .phases
                .as_ref()
                .map(|v| v.iter().map(|&(g, h)| (-g, -h)).collect()),
        }
    }

    pub fn restrict(&self, sub: Window) -> Result<GaugeTransform> {
        if !self.window.contains_window(&sub) {
            return Err(Error::WindowMismatch(format!(
                "{sub} is not inside {}",
                self.window
            )));
        }
        let a = self.window.index(sub.lo()).unwrap();
        let b = self.window.index(sub.hi()).unwrap();
        Ok(GaugeTransform {
            window: sub,
            blocks: self.blocks[a..=b].to_vec(),
            phases: self.phases.as_ref().map(|v| v[a..=b].to_vec()),
        })
    }

    /// Joins transforms on adjacent, increasing windows.
    pub fn concat(parts: &[GaugeTransform]) -> Result<GaugeTransform> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("no gauge parts to join".into()))?;
        let mut blocks = Vec::new();
        let mut phases = Some(Vec::new());
        let mut next = first.window.lo();
        for part in parts {
            if part.window.lo() != next {
                return Err(Error::WindowMismatch(format!(
                    "gauge part {} does not start at {next}",
                    part.window
                )));
            }
            next = part.window.hi() + 1;
            blocks.extend_from_slice(&part.blocks);
            phases = match (phases, &part.phases) {
                (Some(mut acc), Some(p)) => {
                    acc.extend_from_slice(p);
                    Some(acc)
                }
                _ => None,
            };
        }
        Ok(GaugeTransform {
            window: Window::new(first.window.lo(), next - 1)?,
            blocks,
            phases,
        })
    }

    pub fn apply_to_state(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.window() != self.window {
            return Err(Error::WindowMismatch(format!(
                "{} vs {}",
                psi.window(),
                self.window
            )));
        }
        let amps = psi
            .amplitudes()
            .iter()
            .zip(&self.blocks)
            .map(|(v, b)| b.apply(v))
            .collect();
        StateVector::new(self.window, amps)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let dim = self.window.dim();
        let mut m = DenseMatrix::zeros(dim, dim);
        for (j, b) in self.blocks.iter().enumerate() {
            for r in 0..2 {
                for c in 0..2 {
                    m[(2 * j + r, 2 * j + c)] = b.0[r][c];
                }
            }
        }
        m
    }
}

/// `W U W*`.
pub fn apply_gauge(u: &WalkOperator, w: &GaugeTransform) -> Result<WalkOperator> {
    let window = u.window();
    if w.window != window {
        return Err(Error::WindowMismatch(format!("{} vs {}", window, w.window)));
    }
    let n = window.len();
    let cols = u
        .columns()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let wx = w.blocks[j].adjoint();
            let mut out = [Mat2::zero(); 3];
            for (k, m) in c.iter().enumerate() {
                if let Some(t) = (j + k).checked_sub(1).filter(|t| *t < n) {
                    out[k] = w.blocks[t] * *m * wx;
                }
            }
            out
        })
        .collect();
    Ok(WalkOperator::from_columns(window, cols)?.with_tol(u.tol()))
}

fn gaussian_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn random_phase(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0.0..2.0 * PI)
}

/// A random 2×2 unitary from the QR factorization of a complex Gaussian
/// matrix; the first column has its leading component real and positive.
fn random_unitary(rng: &mut ChaCha8Rng) -> Mat2 {
    loop {
        let c0 = [gaussian_c64(rng), gaussian_c64(rng)];
        let c1 = [gaussian_c64(rng), gaussian_c64(rng)];
        let Some(q0) = normalize(&c0) else { continue };
        let overlap = dot(&q0, &c1);
        let rest = [c1[0] - q0[0] * overlap, c1[1] - q0[1] * overlap];
        if norm(&rest) < 1e-6 {
            continue;
        }
        let q1 = normalize(&rest).expect("nonzero residual");
        return Mat2::from_columns(&fix_phase(&q0), &q1);
    }
}

fn random_pair(rng: &mut ChaCha8Rng) -> [V2; 2] {
    let u = random_unitary(rng);
    [u.column(0), fix_phase(&u.column(1))]
}

pub fn random_gauge(seed: u64, window: Window, diagonal_only: bool) -> GaugeTransform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if diagonal_only {
        let g: Vec<f64> = (0..window.len()).map(|_| random_phase(&mut rng)).collect();
        let h: Vec<f64> = (0..window.len()).map(|_| random_phase(&mut rng)).collect();
        return GaugeTransform::diagonal(window, &g, &h).expect("finite phases");
    }
    let blocks = (0..window.len())
        .map(|_| {
            let u = random_unitary(&mut rng);
            u * Mat2::diag(cis(random_phase(&mut rng)), cis(random_phase(&mut rng)))
        })
        .collect();
    GaugeTransform {
        window,
        blocks,
        phases: None,
    }
}

/// Degeneracies to inject into random walks.
///
/// `zero_p` lists bonds `(x, x+1)` with `p_x = 0`, `zero_r` sites with
/// `r_x = 0`, `cuts` interior bonds with `q_x = 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WalkProfile {
    pub zero_p: Vec<i64>,
    pub zero_r: Vec<i64>,
    pub cuts: Vec<i64>,
}

impl WalkProfile {
    fn validate(&self, window: Window) -> Result<()> {
        let infeasible = |m: String| Err(Error::InfeasibleProfile(m));
        if window.len() < 2 {
            return infeasible(format!("window {window} is a single isolated site"));
        }
        let mut cuts = self.cuts.clone();
        cuts.sort_unstable();
        cuts.dedup();
        for &c in &cuts {
            if !(window.lo() <= c && c < window.hi()) {
                return infeasible(format!(
                    "cut bond ({c}, {}) is not an interior bond of {window}",
                    c + 1
                ));
            }
            if c == window.lo() {
                return infeasible(format!("cut at bond ({c}, {}) isolates site {c}", c + 1));
            }
            if c == window.hi() - 1 {
                return infeasible(format!(
                    "cut at bond ({c}, {}) isolates site {}",
                    c + 1,
                    c + 1
                ));
            }
        }
        for w in cuts.windows(2) {
            if w[1] == w[0] + 1 {
                return infeasible(format!(
                    "adjacent cuts at bonds ({}, {}) and ({}, {}) isolate site {}",
                    w[0],
                    w[0] + 1,
                    w[1],
                    w[1] + 1,
                    w[1]
                ));
            }
        }
        for &x in &self.zero_p {
            if !(window.lo() <= x && x < window.hi()) {
                return infeasible(format!(
                    "p = 0 requested on bond ({x}, {}) outside the interior of {window}",
                    x + 1
                ));
            }
            if cuts.contains(&x) {
                return infeasible(format!("p = 0 requested on cut bond ({x}, {})", x + 1));
            }
        }
        for &x in &self.zero_r {
            if !window.contains(x) {
                return infeasible(format!("r = 0 requested at site {x} outside {window}"));
            }
        }
        Ok(())
    }
}

/// Magnitudes away from the degenerate ends.
fn random_magnitude(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0.05..0.95)
}

/// A random walk generated directly in the form
/// `U = Σ_x |ξ₁^x⟩⟨ζ₁^x| + |ξ₂^x⟩⟨ζ₂^x|`, which satisfies the band and
/// rank conditions by construction.
pub fn random_admissible_walk(
    seed: u64,
    window: Window,
    profile: &WalkProfile,
) -> Result<WalkOperator> {
    profile.validate(window)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = window.len();
    let eta: Vec<[V2; 2]> = (0..n).map(|_| random_pair(&mut rng)).collect();
    let zeta: Vec<[V2; 2]> = eta
        .iter()
        .enumerate()
        .map(|(j, e)| {
            let r = if profile.zero_r.contains(&window.site(j)) {
                0.0
            } else {
                random_magnitude(&mut rng)
            };
            let s = (1.0 - r * r).sqrt();
            let u = cis(random_phase(&mut rng)) * r;
            let v = cis(random_phase(&mut rng)) * s;
            let ph = cis(random_phase(&mut rng));
            let z1 = [e[0][0] * u + e[1][0] * v, e[0][1] * u + e[1][1] * v];
            let z2 = [
                (-e[0][0] * v.conj() + e[1][0] * u.conj()) * ph,
                (-e[0][1] * v.conj() + e[1][1] * u.conj()) * ph,
            ];
            [z1, z2]
        })
        .collect();

    // xi1[j] = (part in cell x, part in cell x+1); xi2[j] = (cell x−1, cell x)
    let mut xi1 = vec![[[ZERO; 2]; 2]; n];
    let mut xi2 = vec![[[ZERO; 2]; 2]; n];
    xi2[0][1] = scale(&eta[0][1], cis(random_phase(&mut rng)));
    for j in 0..n {
        let x = window.site(j);
        let (p, q) = if j == n - 1 || profile.cuts.contains(&x) {
            (1.0, 0.0)
        } else if profile.zero_p.contains(&x) {
            (0.0, 1.0)
        } else {
            let p = random_magnitude(&mut rng);
            (p, (1.0 - p * p).sqrt())
        };
        let u = cis(random_phase(&mut rng)) * p;
        let v = cis(random_phase(&mut rng)) * q;
        let ph = cis(random_phase(&mut rng));
        xi1[j][0] = scale(&eta[j][0], u);
        if j + 1 < n {
            xi1[j][1] = scale(&eta[j + 1][1], v);
            xi2[j + 1][0] = scale(&eta[j][0], -v.conj() * ph);
            xi2[j + 1][1] = scale(&eta[j + 1][1], u.conj() * ph);
        }
    }
    let cols = (0..n)
        .map(|j| {
            let [z1, z2] = zeta[j];
            [
                Mat2::outer(&xi2[j][0], &z2),
                Mat2::outer(&xi1[j][0], &z1) + Mat2::outer(&xi2[j][1], &z2),
                Mat2::outer(&xi1[j][1], &z1),
            ]
        })
        .collect();
    WalkOperator::from_columns(window, cols)
}

/// Random canonical parameters with the degeneracies of `profile`.
pub fn random_ssqw_params(seed: u64, window: Window, profile: &WalkProfile) -> Result<SSQWParams> {
    profile.validate(window)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = window.len();
    let mut sites = Vec::with_capacity(n);
    let mut cut_after = Vec::with_capacity(n);
    for j in 0..n {
        let x = window.site(j);
        let cut = j == n - 1 || profile.cuts.contains(&x);
        let p = if cut {
            1.0
        } else if profile.zero_p.contains(&x) {
            0.0
        } else {
            random_magnitude(&mut rng)
        };
        let r = if profile.zero_r.contains(&x) {
            0.0
        } else {
            random_magnitude(&mut rng)
        };
        let theta = if p == 0.0 {
            0.0
        } else {
            random_phase(&mut rng)
        };
        let kappa = if r == 0.0 {
            0.0
        } else {
            random_phase(&mut rng)
        };
        sites.push(SiteParams { p, r, theta, kappa });
        cut_after.push(cut);
    }
    let entry = random_phase(&mut rng);
    SSQWParams::with_entry(window, sites, cut_after, entry)
}

/// Random Suzuki data with complex `q`, `b`. `cuts` lists interior bonds
/// with `p = 1`, `q = 0`; adjacent cuts are allowed here and produce
/// isolated 2×2 blocks.
pub fn random_suzuki_params(
    seed: u64,
    window: Window,
    cuts: &[i64],
    nonnegative: bool,
) -> SuzukiParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let range = if nonnegative { 0.0..1.0 } else { -1.0..1.0 };
    let sites = window
        .sites()
        .map(|x| {
            let (p, q) = if cuts.contains(&x) {
                (1.0, ZERO)
            } else {
                let p: f64 = rng.gen_range(range.clone());
                (p, cis(random_phase(&mut rng)) * (1.0 - p * p).sqrt())
            };
            let a: f64 = rng.gen_range(range.clone());
            let b = cis(random_phase(&mut rng)) * (1.0 - a * a).sqrt();
            SuzukiSite { p, a, q, b }
        })
        .collect();
    SuzukiParams { window, sites }
}
