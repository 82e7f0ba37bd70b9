//! States, banded walk operators and the checks that every other module
//! relies on.

use std::fmt;
use std::ops::RangeInclusive;

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::{Mat2, C64, V2, ZERO};

/// Dense matrix on a window, indexed `2·(x − lo) + component`.
pub type DenseMatrix = Mat<C64>;

/// Largest window the dense cross-checks are meant for.
pub const MAX_SITES: usize = 4096;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Relative singular-value threshold for block ranks.
pub const RANK_TOL: f64 = 1e-10;

/// Above this matrix dimension `check_unitary` uses a norm bound instead of
/// a dense SVD.
const DENSE_UNITARY_DIM: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    lo: i64,
    hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return Err(Error::InvalidWindow {
                lo,
                hi,
                reason: "hi < lo".into(),
            });
        }
        if (hi - lo) as u64 + 1 > MAX_SITES as u64 {
            return Err(Error::InvalidWindow {
                lo,
                hi,
                reason: format!("more than {MAX_SITES} sites"),
            });
        }
        Ok(Window { lo, hi })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo) as usize + 1
    }

    /// Windows always hold at least one site.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Dimension of the Hilbert space `⊕_x C²` on the window.
    pub fn dim(&self) -> usize {
        2 * self.len()
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn index(&self, x: i64) -> Option<usize> {
        self.contains(x).then(|| (x - self.lo) as usize)
    }

    pub fn site(&self, j: usize) -> i64 {
        self.lo + j as i64
    }

    pub fn sites(&self) -> RangeInclusive<i64> {
        self.lo..=self.hi
    }

    /// Interior bonds `(x, x+1)`, labelled by `x`.
    pub fn bonds(&self) -> std::ops::Range<i64> {
        self.lo..self.hi
    }

    fn check_same(&self, other: &Window) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::WindowMismatch(format!("{self} vs {other}")))
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A vector `Ψ = ⊕_x (c₁(x), c₂(x))` on a window.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    window: Window,
    amps: Vec<V2>,
}

impl StateVector {
    pub fn new(window: Window, amps: Vec<V2>) -> Result<Self> {
        if amps.len() != window.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} amplitude pairs for window {window}",
                amps.len()
            )));
        }
        if amps
            .iter()
            .flatten()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        Ok(StateVector { window, amps })
    }

    pub fn zeros(window: Window) -> Self {
        StateVector {
            window,
            amps: vec![[ZERO; 2]; window.len()],
        }
    }

    /// `e_c^x` with `component` 1 or 2.
    pub fn basis(window: Window, site: i64, component: usize) -> Result<Self> {
        let j = window
            .index(site)
            .ok_or_else(|| Error::WindowMismatch(format!("site {site} outside {window}")))?;
        if !(1..=2).contains(&component) {
            return Err(Error::InvalidArgument(format!("component {component}")));
        }
        let mut s = StateVector::zeros(window);
        s.amps[j][component - 1] = C64::new(1.0, 0.0);
        Ok(s)
    }

    /// Builds a state from sparse `(site, amplitudes)` entries; unspecified
    /// sites are zero.
    pub fn from_sites(
        window: Window,
        entries: impl IntoIterator<Item = (i64, V2)>,
    ) -> Result<Self> {
        let mut s = StateVector::zeros(window);
        for (x, v) in entries {
            let j = window
                .index(x)
                .ok_or_else(|| Error::WindowMismatch(format!("site {x} outside {window}")))?;
            s.amps[j] = v;
        }
        StateVector::new(window, s.amps)
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn amplitudes(&self) -> &[V2] {
        &self.amps
    }

    pub fn amplitude(&self, x: i64) -> V2 {
        self.window.index(x).map_or([ZERO; 2], |j| self.amps[j])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Smallest and largest site carrying a nonzero amplitude.
    pub fn support(&self) -> Option<(i64, i64)> {
        let nz = |v: &V2| v[0] != ZERO || v[1] != ZERO;
        let first = self.amps.iter().position(nz)?;
        let last = self.amps.iter().rposition(nz)?;
        Some((self.window.site(first), self.window.site(last)))
    }

    /// Zero-pads onto a larger window.
    pub fn extend_to(&self, window: Window) -> Result<StateVector> {
        if !window.contains_window(&self.window) {
            return Err(Error::WindowMismatch(format!(
                "{} does not contain {}",
                window, self.window
            )));
        }
        let offset = (self.window.lo - window.lo) as usize;
        let mut out = StateVector::zeros(window);
        out.amps[offset..offset + self.amps.len()].copy_from_slice(&self.amps);
        Ok(out)
    }

    pub fn to_dense(&self) -> Vec<C64> {
        self.amps.iter().flatten().copied().collect()
    }
}

/// Residual of a unitarity check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitarityCheck {
    pub ok: bool,
    pub residual: f64,
}

/// A block-tridiagonal operator on a window.
///
/// Column `x` stores the three blocks leaving cell `x`: towards `x−1`, `x`
/// and `x+1`. Blocks that would leave the window are always zero.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkOperator {
    window: Window,
    cols: Vec<[Mat2; 3]>,
    tol: f64,
}

impl WalkOperator {
    /// Assembles an operator from `(target, source, block)` triples. Later
    /// triples for the same pair replace earlier ones.
    pub fn from_blocks(
        window: Window,
        blocks: impl IntoIterator<Item = (i64, i64, Mat2)>,
    ) -> Result<Self> {
        let mut cols = vec![[Mat2::zero(); 3]; window.len()];
        for (target, source, m) in blocks {
            let d = target - source;
            if d.abs() > 1 {
                return Err(Error::BandViolation {
                    target,
                    src: source,
                });
            }
            let (Some(_), Some(j)) = (window.index(target), window.index(source)) else {
                return Err(Error::WindowMismatch(format!(
                    "block ({target} <- {source}) outside {window}"
                )));
            };
            if !m.is_finite() {
                return Err(Error::NonFinite {
                    target,
                    src: source,
                });
            }
            cols[j][(d + 1) as usize] = m;
        }
        Ok(WalkOperator {
            window,
            cols,
            tol: DEFAULT_TOL,
        })
    }

    pub(crate) fn from_columns(window: Window, cols: Vec<[Mat2; 3]>) -> Result<Self> {
        if cols.len() != window.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} columns for window {window}",
                cols.len()
            )));
        }
        let n = cols.len();
        if !cols[0][0].is_zero() {
            return Err(Error::WindowMismatch(format!(
                "block leaves the window at site {}",
                window.lo
            )));
        }
        if !cols[n - 1][2].is_zero() {
            return Err(Error::WindowMismatch(format!(
                "block leaves the window at site {}",
                window.hi
            )));
        }
        for (j, c) in cols.iter().enumerate() {
            for (k, m) in c.iter().enumerate() {
                if !m.is_finite() {
                    let source = window.site(j);
                    return Err(Error::NonFinite {
                        target: source + k as i64 - 1,
                        src: source,
                    });
                }
            }
        }
        Ok(WalkOperator {
            window,
            cols,
            tol: DEFAULT_TOL,
        })
    }

    /// Re-ingests a dense window matrix. Entries outside the band must not
    /// exceed `band_tol` in modulus; they are dropped.
    pub fn from_dense(window: Window, m: &DenseMatrix, band_tol: f64) -> Result<Self> {
        let dim = window.dim();
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix for window {window}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = window.len();
        let mut cols = vec![[Mat2::zero(); 3]; n];
        for i in 0..dim {
            for j in 0..dim {
                let z = m[(i, j)];
                let (ti, si) = (i / 2, j / 2);
                let d = ti as i64 - si as i64;
                if d.abs() > 1 {
                    if z.norm() > band_tol {
                        return Err(Error::BandViolation {
                            target: window.site(ti),
                            src: window.site(si),
                        });
                    }
                    continue;
                }
                cols[si][(d + 1) as usize].0[i % 2][j % 2] = z;
            }
        }
        WalkOperator::from_columns(window, cols)
    }

    pub fn identity(window: Window) -> Self {
        let mut cols = vec![[Mat2::zero(); 3]; window.len()];
        for c in cols.iter_mut() {
            c[1] = Mat2::identity();
        }
        WalkOperator {
            window,
            cols,
            tol: DEFAULT_TOL,
        }
    }

    /// `P U P` for the projection `P` onto a sub-window. Equals the direct
    /// summand of `U` when the sub-window is bounded by cuts.
    pub fn restrict(&self, sub: Window) -> Result<WalkOperator> {
        if !self.window.contains_window(&sub) {
            return Err(Error::WindowMismatch(format!(
                "{sub} is not inside {}",
                self.window
            )));
        }
        let a = self.window.index(sub.lo).unwrap();
        let b = self.window.index(sub.hi).unwrap();
        let mut cols = self.cols[a..=b].to_vec();
        cols[0][0] = Mat2::zero();
        cols[b - a][2] = Mat2::zero();
        Ok(WalkOperator {
            window: sub,
            cols,
            tol: self.tol,
        })
    }

    /// Joins operators on adjacent, increasing windows.
    pub fn direct_sum(parts: &[WalkOperator]) -> Result<WalkOperator> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("no operators to join".into()))?;
        let mut next = first.window.lo;
        let mut cols = Vec::new();
        for p in parts {
            if p.window.lo != next {
                return Err(Error::WindowMismatch(format!(
                    "part {} does not start at {next}",
                    p.window
                )));
            }
            next = p.window.hi + 1;
            cols.extend_from_slice(&p.cols);
        }
        let window = Window::new(first.window.lo, next - 1)?;
        Ok(WalkOperator::from_columns(window, cols)?.with_tol(first.tol))
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// `P_target U P_source`; zero outside the band or the window.
    pub fn block(&self, target: i64, source: i64) -> Mat2 {
        let d = target - source;
        if d.abs() > 1 || !self.window.contains(target) {
            return Mat2::zero();
        }
        match self.window.index(source) {
            Some(j) => self.cols[j][(d + 1) as usize],
            None => Mat2::zero(),
        }
    }

    pub(crate) fn columns(&self) -> &[[Mat2; 3]] {
        &self.cols
    }

    /// All nonzero blocks as `(target, source, block)`, ordered by source.
    pub fn blocks(&self) -> impl Iterator<Item = (i64, i64, Mat2)> + '_ {
        self.cols.iter().enumerate().flat_map(move |(j, c)| {
            let source = self.window.site(j);
            c.iter()
                .enumerate()
                .filter(|(_, m)| !m.is_zero())
                .map(move |(k, m)| (source + k as i64 - 1, source, *m))
        })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let dim = self.window.dim();
        let mut m = DenseMatrix::zeros(dim, dim);
        for (target, source, b) in self.blocks() {
            let ti = 2 * (target - self.window.lo) as usize;
            let si = 2 * (source - self.window.lo) as usize;
            for r in 0..2 {
                for c in 0..2 {
                    m[(ti + r, si + c)] = b.0[r][c];
                }
            }
        }
        m
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.window.check_same(&psi.window)?;
        let n = self.window.len();
        let mut out = vec![[ZERO; 2]; n];
        for (j, c) in self.cols.iter().enumerate() {
            let v = psi.amps[j];
            if v[0] == ZERO && v[1] == ZERO {
                continue;
            }
            for (k, m) in c.iter().enumerate() {
                let Some(t) = (j + k).checked_sub(1).filter(|t| *t < n) else {
                    continue;
                };
                let w = m.apply(&v);
                out[t][0] += w[0];
                out[t][1] += w[1];
            }
        }
        Ok(StateVector {
            window: self.window,
            amps: out,
        })
    }

    pub fn adjoint(&self) -> WalkOperator {
        let n = self.window.len();
        let mut cols = vec![[Mat2::zero(); 3]; n];
        for (j, c) in cols.iter_mut().enumerate() {
            for (k, m) in c.iter_mut().enumerate() {
                if let Some(y) = (j + k).checked_sub(1).filter(|y| *y < n) {
                    *m = self.cols[y][2 - k].adjoint();
                }
            }
        }
        WalkOperator {
            window: self.window,
            cols,
            tol: self.tol,
        }
    }

    /// Banded blocks of `U*U − I` keyed by `(target, source)` offsets.
    fn gram_defect(&self) -> Vec<[Mat2; 5]> {
        let n = self.window.len();
        let mut out = vec![[Mat2::zero(); 5]; n];
        for (x, row) in out.iter_mut().enumerate() {
            for (dk, slot) in row.iter_mut().enumerate() {
                let Some(y) = (x + dk).checked_sub(2).filter(|y| *y < n) else {
                    continue;
                };
                // (U*U)(y <- x) = Σ_z B(z <- y)* B(z <- x)
                let mut acc = Mat2::zero();
                for z in x.saturating_sub(1)..=(x + 1).min(n - 1) {
                    let ky = z as i64 - y as i64 + 1;
                    if !(0..=2).contains(&ky) {
                        continue;
                    }
                    let kx = z + 1 - x;
                    acc += self.cols[y][ky as usize].adjoint() * self.cols[x][kx];
                }
                if x == y {
                    acc = acc - Mat2::identity();
                }
                *slot = acc;
            }
        }
        out
    }
}

/// Product `A·B` as a dense window matrix (the product of two band-1
/// operators has band 2).
pub fn compose(a: &WalkOperator, b: &WalkOperator) -> Result<DenseMatrix> {
    a.window.check_same(&b.window)?;
    Ok(a.to_dense() * b.to_dense())
}

/// Largest singular value of a dense matrix.
pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    let s = m
        .singular_values()
        .map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    Ok(s.first().copied().unwrap_or(0.0))
}

/// Spectral norm of `A − B`.
pub fn operator_distance(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    spectral_norm(&(a - b))
}

/// `‖U*U − I‖`. Exact spectral norm for moderate windows; above that the
/// bound `√(‖E‖₁‖E‖∞)` on the banded defect is reported.
pub fn check_unitary(u: &WalkOperator) -> UnitarityCheck {
    let defect = u.gram_defect();
    let n = u.window.len();
    let residual = if u.window.dim() <= DENSE_UNITARY_DIM {
        let dim = u.window.dim();
        let mut e = DenseMatrix::zeros(dim, dim);
        for (x, row) in defect.iter().enumerate() {
            for (dk, m) in row.iter().enumerate() {
                let Some(y) = (x + dk).checked_sub(2).filter(|y| *y < n) else {
                    continue;
                };
                for r in 0..2 {
                    for c in 0..2 {
                        e[(2 * y + r, 2 * x + c)] = m.0[r][c];
                    }
                }
            }
        }
        spectral_norm(&e).unwrap_or(f64::INFINITY)
    } else {
        let mut col_sums = vec![0.0f64; 2 * n];
        let mut row_sums = vec![0.0f64; 2 * n];
        for (x, row) in defect.iter().enumerate() {
            for (dk, m) in row.iter().enumerate() {
                let Some(y) = (x + dk).checked_sub(2).filter(|y| *y < n) else {
                    continue;
                };
                for r in 0..2 {
                    for c in 0..2 {
                        let a = m.0[r][c].norm();
                        col_sums[2 * x + c] += a;
                        row_sums[2 * y + r] += a;
                    }
                }
            }
        }
        let one = col_sums.iter().copied().fold(0.0, f64::max);
        let inf = row_sums.iter().copied().fold(0.0, f64::max);
        (one * inf).sqrt()
    };
    let residual = if residual.is_nan() {
        f64::INFINITY
    } else {
        residual
    };
    UnitarityCheck {
        ok: residual <= u.tol,
        residual,
    }
}

/// Number of singular values above `tol · max(1, ‖m‖)`.
pub fn block_rank(m: &Mat2, tol: f64) -> u8 {
    let (smax, smin) = m.singular_values();
    let thr = tol * smax.max(1.0);
    (smax > thr) as u8 + (smin > thr) as u8
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BondRank {
    /// Bond `(bond, bond+1)`.
    pub bond: i64,
    /// `rank P_{x+1} U P_x`.
    pub up: u8,
    /// `rank P_x U P_{x+1}`.
    pub down: u8,
}

impl BondRank {
    pub fn is_cut(&self) -> bool {
        self.up == 0 && self.down == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankProfile {
    pub window: Window,
    pub bonds: Vec<BondRank>,
    pub rank_tol: f64,
}

impl RankProfile {
    pub fn bond(&self, x: i64) -> Option<&BondRank> {
        let j = x.checked_sub(self.window.lo)?;
        self.bonds.get(usize::try_from(j).ok()?)
    }

    /// Bonds where both off-diagonal blocks vanish.
    pub fn cuts(&self) -> Vec<i64> {
        self.bonds
            .iter()
            .filter(|b| b.is_cut())
            .map(|b| b.bond)
            .collect()
    }

    /// Bonds carrying a rank-2 block (inadmissible).
    pub fn rank2_bonds(&self) -> Vec<i64> {
        self.bonds
            .iter()
            .filter(|b| b.up == 2 || b.down == 2)
            .map(|b| b.bond)
            .collect()
    }

    /// Ranks only; the threshold is ignored.
    pub fn same_ranks(&self, other: &RankProfile) -> bool {
        self.window == other.window && self.bonds == other.bonds
    }
}

pub fn rank_profile(u: &WalkOperator) -> RankProfile {
    rank_profile_with_tol(u, RANK_TOL)
}

pub fn rank_profile_with_tol(u: &WalkOperator, rank_tol: f64) -> RankProfile {
    let bonds = u
        .window
        .bonds()
        .map(|x| BondRank {
            bond: x,
            up: block_rank(&u.block(x + 1, x), rank_tol),
            down: block_rank(&u.block(x, x + 1), rank_tol),
        })
        .collect();
    RankProfile {
        window: u.window,
        bonds,
        rank_tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn w(lo: i64, hi: i64) -> Window {
        Window::new(lo, hi).unwrap()
    }

    /// Swap of two cells: a unitary whose off-diagonal blocks are `I`.
    fn cell_swap() -> WalkOperator {
        WalkOperator::from_blocks(
            w(0, 1),
            [(1, 0, Mat2::identity()), (0, 1, Mat2::identity())],
        )
        .unwrap()
    }

    #[test]
    fn window_validation() {
        assert!(Window::new(3, 2).is_err());
        assert!(Window::new(0, MAX_SITES as i64).is_err());
        assert_eq!(w(-2, 2).dim(), 10);
        assert_eq!(w(-2, 2).index(-2), Some(0));
    }

    #[test]
    fn band_is_enforced() {
        let err = WalkOperator::from_blocks(w(0, 3), [(2, 0, Mat2::identity())]);
        assert!(matches!(
            err,
            Err(Error::BandViolation { target: 2, src: 0 })
        ));
    }

    #[test]
    fn identity_leaves_states_alone() {
        let win = w(-1, 2);
        let psi =
            StateVector::from_sites(win, [(0, [C64::new(0.6, 0.0), C64::new(0.0, 0.8)])]).unwrap();
        let u = WalkOperator::identity(win);
        assert_eq!(u.apply(&psi).unwrap(), psi);
        let zero = StateVector::zeros(win);
        assert_eq!(u.apply(&zero).unwrap(), zero);
    }

    #[test]
    fn apply_rejects_other_windows() {
        let u = WalkOperator::identity(w(0, 2));
        let psi = StateVector::zeros(w(0, 3));
        assert!(matches!(u.apply(&psi), Err(Error::WindowMismatch(_))));
    }

    #[test]
    fn swap_is_unitary_with_rank_two_bond() {
        let u = cell_swap();
        let chk = check_unitary(&u);
        assert!(chk.ok, "{}", chk.residual);
        let prof = rank_profile(&u);
        assert_eq!(prof.rank2_bonds(), vec![0]);
    }

    #[test]
    fn scaled_block_fails_unitarity() {
        let u = WalkOperator::from_blocks(
            w(0, 0),
            [(0, 0, Mat2::identity().scale(C64::new(1.01, 0.0)))],
        )
        .unwrap();
        let chk = check_unitary(&u);
        assert!(!chk.ok);
        assert!((chk.residual - (1.01f64 * 1.01 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn distance_of_opposite_identities() {
        let a = WalkOperator::identity(w(0, 0)).to_dense();
        let b = -&a;
        assert!((operator_distance(&a, &b).unwrap() - 2.0).abs() < 1e-14);
        let c = DenseMatrix::zeros(4, 4);
        assert!(matches!(
            operator_distance(&a, &c),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn adjoint_matches_dense_conjugate_transpose() {
        let m = Mat2::new(
            ONE,
            C64::new(0.0, 2.0),
            C64::new(3.0, -1.0),
            C64::new(0.5, 0.5),
        );
        let u = WalkOperator::from_blocks(w(0, 2), [(0, 1, m), (1, 1, m.adjoint()), (2, 1, m * m)])
            .unwrap();
        let dense = u.to_dense();
        let adj = u.adjoint().to_dense();
        let expected = dense.adjoint().to_owned();
        assert!(operator_distance(&adj, &expected).unwrap() < 1e-15);
    }

    #[test]
    fn dense_round_trip() {
        let u = cell_swap();
        let back = WalkOperator::from_dense(u.window(), &u.to_dense(), 1e-14).unwrap();
        assert_eq!(back, u);
        let mut d = WalkOperator::identity(w(0, 2)).to_dense();
        d[(0, 5)] = C64::new(1e-3, 0.0);
        assert!(WalkOperator::from_dense(w(0, 2), &d, 1e-12).is_err());
    }

    #[test]
    fn compose_with_adjoint_is_identity() {
        let u = cell_swap();
        let p = compose(&u.adjoint(), &u).unwrap();
        let id = WalkOperator::identity(u.window()).to_dense();
        assert!(operator_distance(&p, &id).unwrap() < 1e-15);
    }

    #[test]
    fn large_windows_use_the_norm_bound() {
        let u = WalkOperator::identity(w(0, 600));
        let chk = check_unitary(&u);
        assert!(chk.ok && chk.residual == 0.0);
    }

    #[test]
    fn rank_threshold_is_relative() {
        let tiny = Mat2::real(1e-11, 0.0, 0.0, 0.0);
        assert_eq!(block_rank(&tiny, RANK_TOL), 0);
        let big = Mat2::real(1e3, 0.0, 0.0, 1e-8);
        assert_eq!(block_rank(&big, RANK_TOL), 1);
        assert_eq!(block_rank(&Mat2::identity(), RANK_TOL), 2);
    }
}
