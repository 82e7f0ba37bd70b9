//! Time evolution and position statistics.

use crate::builders::{
    build_canonical, build_suzuki, SSQWParams, SiteParams, SuzukiParams, SuzukiSite,
};
use crate::error::{Error, Result};
use crate::operator::{StateVector, WalkOperator, Window};

/// Position distribution `P(x) = |c₁(x)|² + |c₂(x)|²`.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    window: Window,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn window(&self) -> Window {
        self.window
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: i64) -> f64 {
        self.window.index(x).map_or(0.0, |j| self.probs[j])
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.window.sites().zip(self.probs.iter().copied())
    }
}

pub fn distribution(psi: &StateVector) -> Distribution {
    Distribution {
        window: psi.window(),
        probs: psi
            .amplitudes()
            .iter()
            .map(|v| v[0].norm_sqr() + v[1].norm_sqr())
            .collect(),
    }
}

/// `Σ x^k P(x)` for `k ∈ {1, 2}`.
pub fn moments(d: &Distribution, k: u32) -> Result<f64> {
    if !(k == 1 || k == 2) {
        return Err(Error::InvalidArgument(format!(
            "moment order {k} (expected 1 or 2)"
        )));
    }
    Ok(d.iter().map(|(x, p)| (x as f64).powi(k as i32) * p).sum())
}

fn check_unit(psi: &StateVector) -> Result<()> {
    let n = psi.norm();
    if (n - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState(format!("initial state has norm {n}")));
    }
    Ok(())
}

/// `U^t ψ₀` on the window of `U`, refusing when the support of `ψ₀` is
/// closer than `t` sites to either end (the truncated walk would then
/// differ from the walk on the line).
pub fn evolve(u: &WalkOperator, psi0: &StateVector, t: usize) -> Result<StateVector> {
    check_unit(psi0)?;
    if let Some((a, b)) = psi0.support() {
        let w = u.window();
        let distance = (a - w.lo()).min(w.hi() - b);
        if distance < t as i64 {
            return Err(Error::SupportOverflow { distance, steps: t });
        }
    }
    evolve_closed(u, psi0, t)
}

/// `U^t ψ₀` with the window ends treated as walls.
pub fn evolve_closed(u: &WalkOperator, psi0: &StateVector, t: usize) -> Result<StateVector> {
    let mut psi = psi0.clone();
    for _ in 0..t {
        psi = u.apply(&psi)?;
    }
    Ok(psi)
}

/// A walk on the whole line that can be cut to any window.
pub trait LineWalk {
    fn operator_on(&self, window: Window) -> Result<WalkOperator>;
}

/// Canonical parameters on a core window continued by constant tails.
#[derive(Clone, Debug, PartialEq)]
pub struct TailedCanonical {
    pub left: SiteParams,
    pub core: Window,
    pub core_sites: Vec<SiteParams>,
    /// Cut bonds `(x, x+1)`.
    pub cuts: Vec<i64>,
    pub right: SiteParams,
}

impl TailedCanonical {
    pub fn uniform(site: SiteParams) -> Self {
        TailedCanonical {
            left: site,
            core: Window::new(0, 0).unwrap(),
            core_sites: vec![site],
            cuts: Vec::new(),
            right: site,
        }
    }

    fn site(&self, x: i64) -> SiteParams {
        match self.core.index(x) {
            Some(j) => self.core_sites[j],
            None if x < self.core.lo() => self.left,
            None => self.right,
        }
    }
}

impl LineWalk for TailedCanonical {
    fn operator_on(&self, window: Window) -> Result<WalkOperator> {
        if self.core_sites.len() != self.core.len() {
            return Err(Error::InvalidParams(
                "core sites do not match the core window".into(),
            ));
        }
        let sites = window.sites().map(|x| self.site(x)).collect();
        let cuts = window.sites().map(|x| self.cuts.contains(&x)).collect();
        let entry = self.site(window.lo() - 1).theta;
        Ok(build_canonical(&SSQWParams::with_entry(
            window, sites, cuts, entry,
        )?))
    }
}

/// Suzuki coefficients on a core window continued by constant tails.
#[derive(Clone, Debug, PartialEq)]
pub struct TailedSuzuki {
    pub left: SuzukiSite,
    pub core: Window,
    pub core_sites: Vec<SuzukiSite>,
    pub right: SuzukiSite,
}

impl TailedSuzuki {
    pub fn uniform(site: SuzukiSite) -> Self {
        TailedSuzuki {
            left: site,
            core: Window::new(0, 0).unwrap(),
            core_sites: vec![site],
            right: site,
        }
    }
}

impl LineWalk for TailedSuzuki {
    fn operator_on(&self, window: Window) -> Result<WalkOperator> {
        if self.core_sites.len() != self.core.len() {
            return Err(Error::InvalidParams(
                "core sites do not match the core window".into(),
            ));
        }
        let sites = window
            .sites()
            .map(|x| match self.core.index(x) {
                Some(j) => self.core_sites[j],
                None if x < self.core.lo() => self.left,
                None => self.right,
            })
            .collect();
        Ok(build_suzuki(&SuzukiParams::new(window, sites)?))
    }
}

/// Sites kept free between the support and the window ends.
const MARGIN: i64 = 2;

/// `U^t ψ₀` for a walk on the line. The window grows ahead of the support
/// so the truncation never touches the state.
pub fn evolve_line(walk: &dyn LineWalk, psi0: &StateVector, t: usize) -> Result<StateVector> {
    check_unit(psi0)?;
    let mut psi = psi0.clone();
    let mut u = walk.operator_on(psi.window())?;
    for _ in 0..t {
        if let Some((a, b)) = psi.support() {
            let w = psi.window();
            if a - w.lo() < MARGIN || w.hi() - b < MARGIN {
                let grow = (w.len() as i64 / 2).max(8);
                let lo = if a - w.lo() < MARGIN {
                    w.lo() - grow
                } else {
                    w.lo()
                };
                let hi = if w.hi() - b < MARGIN {
                    w.hi() + grow
                } else {
                    w.hi()
                };
                let bigger = Window::new(lo, hi)?;
                psi = psi.extend_to(bigger)?;
                u = walk.operator_on(bigger)?;
            }
        }
        psi = u.apply(&psi)?;
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{apply_gauge, random_gauge, GaugeTransform};
    use crate::linalg::{cis, C64, ZERO};

    fn w(lo: i64, hi: i64) -> Window {
        Window::new(lo, hi).unwrap()
    }

    fn hadamard_like() -> SiteParams {
        SiteParams::new(0.6, std::f64::consts::FRAC_1_SQRT_2, 0.4, 0.9)
    }

    #[test]
    fn trivial_evolutions() {
        let psi = StateVector::basis(w(-5, 5), 0, 1).unwrap();
        let u = WalkOperator::identity(w(-5, 5));
        assert_eq!(evolve(&u, &psi, 0).unwrap(), psi);
        assert_eq!(evolve(&u, &psi, 5).unwrap(), psi);
        let v = TailedCanonical::uniform(hadamard_like())
            .operator_on(w(-5, 5))
            .unwrap();
        assert_eq!(evolve(&v, &psi, 1).unwrap(), v.apply(&psi).unwrap());
        assert!(matches!(
            evolve(&v, &psi, 6),
            Err(Error::SupportOverflow {
                distance: 5,
                steps: 6
            })
        ));
        assert!(evolve_closed(&v, &psi, 30).is_ok());
    }

    #[test]
    fn distributions_and_moments() {
        let psi = StateVector::basis(w(0, 5), 0, 1).unwrap();
        let d = distribution(&psi);
        assert_eq!(d.prob(0), 1.0);
        assert_eq!(moments(&d, 1).unwrap(), 0.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::from_sites(
            w(0, 5),
            [(0, [C64::from(h), ZERO]), (5, [ZERO, C64::from(h)])],
        )
        .unwrap();
        let d = distribution(&psi);
        assert!((d.prob(0) - 0.5).abs() < 1e-15 && (d.prob(5) - 0.5).abs() < 1e-15);
        let psi = StateVector::from_sites(
            w(-1, 1),
            [(-1, [C64::from(h), ZERO]), (1, [ZERO, C64::from(h)])],
        )
        .unwrap();
        let d = distribution(&psi);
        assert!(moments(&d, 1).unwrap().abs() < 1e-15);
        assert!((moments(&d, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!(moments(&d, 3).is_err());
        let g = random_gauge(1, w(-1, 1), false);
        assert_eq!(
            distribution(&g.apply_to_state(&psi).unwrap()).probs().len(),
            3
        );
    }

    #[test]
    fn line_evolution_conserves_and_spreads_ballistically() {
        let walk = TailedCanonical::uniform(hadamard_like());
        let psi = StateVector::basis(w(0, 0), 0, 1).unwrap();
        let out = evolve_line(&walk, &psi, 200).unwrap();
        let d = distribution(&out);
        assert!((d.total() - 1.0).abs() < 1e-10);
        let (a, b) = out.support().unwrap();
        assert!(a >= -200 && b <= 200);
        // the same evolution on a fixed window large enough
        let u = walk.operator_on(w(-210, 210)).unwrap();
        let fixed = evolve(&u, &psi.extend_to(w(-210, 210)).unwrap(), 200).unwrap();
        let fixed = distribution(&fixed);
        for (x, p) in d.iter() {
            assert!((fixed.prob(x) - p).abs() < 1e-12);
        }
        assert!(moments(&d, 2).unwrap() > 100.0);
    }

    #[test]
    fn gauge_does_not_change_the_distribution() {
        let walk = TailedCanonical {
            left: hadamard_like(),
            core: w(-2, 2),
            core_sites: vec![SiteParams::new(0.3, 0.8, 1.0, 2.0); 5],
            cuts: vec![],
            right: SiteParams::new(0.9, 0.2, 0.0, 0.0),
        };
        let win = w(-30, 30);
        let u = walk.operator_on(win).unwrap();
        let g: GaugeTransform = random_gauge(5, win, false);
        let v = apply_gauge(&u, &g).unwrap();
        let psi = StateVector::from_sites(win, [(0, [C64::from(0.6), cis(0.3) * 0.8])]).unwrap();
        let a = evolve(&u, &psi, 25).unwrap();
        let b = evolve(&v, &g.apply_to_state(&psi).unwrap(), 25).unwrap();
        for (p, q) in distribution(&a)
            .probs()
            .iter()
            .zip(distribution(&b).probs())
        {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn suzuki_tails() {
        let site = SuzukiSite {
            p: 0.6,
            a: 0.8,
            q: cis(0.5) * 0.8,
            b: cis(-0.2) * 0.6,
        };
        let walk = TailedSuzuki::uniform(site);
        let psi = StateVector::basis(w(3, 3), 3, 2).unwrap();
        let out = evolve_line(&walk, &psi, 50).unwrap();
        assert!((distribution(&out).total() - 1.0).abs() < 1e-12);
        assert!(evolve_line(&walk, &StateVector::zeros(w(0, 1)), 1).is_err());
    }
}
