//! Acceptance suite. Prints one line per criterion and fails the target if
//! any criterion fails.

use std::process::Command;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssqw::canonical::params_deviation;
use ssqw::equivalence::spectrum_distance;
use ssqw::linalg::{circle_distance, cis};
use ssqw::{
    apply_gauge, build_canonical, build_kitagawa, build_suzuki, canonicalize, check_admissibility,
    chiral_factorize, decide_equivalence, distribution, evolve_line, extract_eta, extract_zeta_xi,
    operator_distance, phase_propagation_oracle, random_admissible_walk, random_gauge,
    random_ssqw_params, random_suzuki_params, rank_profile, segment_walk, suzuki_reduce,
    window_spectrum, CaseTag, EquivalenceStatus, Error, Geometry, KitagawaParams, SSQWParams,
    SiteParams, Stage, StateVector, SuzukiParams, SuzukiSite, TailedCanonical, WalkProfile, Window,
};

const GEOMETRIES: [Geometry; 4] = [
    Geometry::Line,
    Geometry::HalfLeft,
    Geometry::HalfRight,
    Geometry::Finite,
];

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

/// Random window of `n` sites with degeneracies that respect both
/// assumptions: cuts interior, never adjacent, and every segment at least
/// two sites long.
fn random_profile(rng: &mut ChaCha8Rng, window: Window, with_cuts: bool) -> WalkProfile {
    let (lo, hi) = (window.lo(), window.hi());
    let mut cuts = Vec::new();
    if with_cuts && window.len() >= 6 {
        let count = rng.gen_range(0..=3);
        for _ in 0..count {
            let c = rng.gen_range(lo + 1..hi - 1);
            if cuts.iter().all(|&d: &i64| (c - d).abs() >= 2) {
                cuts.push(c);
            }
        }
        cuts.sort_unstable();
    }
    let mut zero_p = Vec::new();
    let mut zero_r = Vec::new();
    for x in lo..=hi {
        if x < hi && !cuts.contains(&x) && rng.gen_bool(0.12) {
            zero_p.push(x);
        }
        if rng.gen_bool(0.12) {
            zero_r.push(x);
        }
    }
    WalkProfile {
        zero_p,
        zero_r,
        cuts,
    }
}

/// Anchored parameters computed straight from the conventions: every
/// segment shifts all its phases by the value of its anchor parameter.
fn anchored_oracle(p: &SSQWParams, geometry: Geometry) -> Vec<SSQWParams> {
    let u = build_canonical(p);
    let report = check_admissibility(&u);
    segment_walk(&report, geometry)
        .into_iter()
        .map(|spec| {
            let seg = p.restrict(spec.window).unwrap();
            let (lo, hi) = (spec.window.lo(), spec.window.hi());
            let site = |x: i64| *seg.site(x).unwrap();
            let shift = match spec.case {
                CaseTag::RightHalf | CaseTag::Finite => seg.entry_theta(),
                CaseTag::LeftHalf => site(hi).theta,
                CaseTag::FullLine => {
                    let o = 0i64.clamp(lo, hi);
                    let right = o..=hi;
                    let left = (lo..o).rev();
                    if let Some(x) = right.clone().find(|&x| site(x).r != 0.0) {
                        site(x).kappa
                    } else if let Some(x) = left.clone().find(|&x| site(x).r != 0.0) {
                        site(x).kappa
                    } else if let Some(x) = right.clone().find(|&x| site(x).p != 0.0) {
                        site(x).theta
                    } else if let Some(x) = left.clone().find(|&x| site(x).p != 0.0) {
                        site(x).theta
                    } else {
                        0.0
                    }
                }
            };
            let sites = seg
                .sites()
                .iter()
                .map(|s| SiteParams {
                    theta: if s.p == 0.0 { 0.0 } else { s.theta - shift },
                    kappa: if s.r == 0.0 { 0.0 } else { s.kappa - shift },
                    ..*s
                })
                .collect();
            SSQWParams::with_entry(
                spec.window,
                sites,
                seg.cut_flags().to_vec(),
                seg.entry_theta() - shift,
            )
            .unwrap()
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for trial in 0..1000u64 {
        let n = rng.gen_range(2..=64i64);
        let lo = rng.gen_range(-40..=10);
        let window = Window::new(lo, lo + n - 1).unwrap();
        let profile = random_profile(&mut rng, window, true);
        let p = random_ssqw_params(trial, window, &profile).unwrap();
        let geometry = *GEOMETRIES.choose(&mut rng).unwrap();
        let u = build_canonical(&p);
        let v = apply_gauge(&u, &random_gauge(10_000 + trial, window, false)).unwrap();
        let expected = anchored_oracle(&p, geometry);
        match canonicalize(&v, geometry) {
            Ok(form) if form.segments.len() == expected.len() => {
                for (seg, exp) in form.segments.iter().zip(&expected) {
                    worst = worst.max(params_deviation(&seg.params, exp));
                }
            }
            _ => failures += 1,
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && worst < 1e-9 && secs < 30.0,
        format!("1000 trials, max deviation {worst:.2e}, {failures} failures, {secs:.1} s"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut wrong = Vec::new();
    let cases = [
        (Geometry::Line, CaseTag::FullLine),
        (Geometry::HalfRight, CaseTag::RightHalf),
        (Geometry::HalfLeft, CaseTag::LeftHalf),
        (Geometry::Finite, CaseTag::Finite),
    ];
    for (geometry, case) in cases {
        for trial in 0..100u64 {
            let n = rng.gen_range(3..=24i64);
            let lo = rng.gen_range(-12..=2);
            let window = Window::new(lo, lo + n - 1).unwrap();
            let profile = random_profile(&mut rng, window, false);
            let p = random_ssqw_params(trial * 7 + case.number() as u64, window, &profile).unwrap();
            let u = build_canonical(&p);
            let spec = segment_walk(&check_admissibility(&u), geometry)[0];
            assert_eq!(spec.case, case);
            let anchor = canonicalize(&u, geometry).unwrap().segments[0].anchor;
            let mut targets = Vec::new();
            for x in window.sites() {
                let s = p.site(x).unwrap();
                if s.p == 0.0 || s.r == 0.0 {
                    continue;
                }
                let anchored_theta = anchor.site == x
                    && anchor.rule.to_string() != "i"
                    && anchor.rule.to_string() != "ii";
                let anchored_kappa = anchor.site == x && !anchored_theta;
                if !anchored_theta {
                    targets.push((x, "theta"));
                }
                if !anchored_kappa {
                    targets.push((x, "kappa"));
                }
            }
            let Some(&(x, name)) = targets.choose(&mut rng) else {
                continue;
            };
            let mut sites = p.sites().to_vec();
            let j = window.index(x).unwrap();
            if name == "theta" {
                sites[j].theta += 0.1;
            } else {
                sites[j].kappa += 0.1;
            }
            let q = SSQWParams::with_entry(window, sites, p.cut_flags().to_vec(), p.entry_theta())
                .unwrap();
            let v = build_canonical(&q);
            let verdict = decide_equivalence(&u, &v, geometry);
            let named = verdict
                .discrepancy
                .as_ref()
                .is_some_and(|d| d.site == x && d.parameter == name);
            let oracle = phase_propagation_oracle(&u, &v);
            if verdict.status != EquivalenceStatus::NotEquivalent || !named || oracle.is_some() {
                wrong.push(format!(
                    "case {} trial {trial} ({x}, {name})",
                    case.number()
                ));
            }
        }
    }
    outcome(
        wrong.is_empty(),
        format!(
            "400 perturbations, {} misses {:?}",
            wrong.len(),
            wrong.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut wrong = 0;
    for trial in 0..100u64 {
        let n = rng.gen_range(3..=24i64);
        let window = Window::new(0, n - 1).unwrap();
        let profile = random_profile(&mut rng, window, true);
        let p = random_ssqw_params(300 + trial, window, &profile).unwrap();
        let mut sites = p.sites().to_vec();
        let geometry = *GEOMETRIES.choose(&mut rng).unwrap();
        let movable: Vec<(usize, bool)> = (0..sites.len())
            .flat_map(|j| [(j, true), (j, false)])
            .filter(|&(j, is_p)| !(is_p && p.cut_flags()[j]))
            .collect();
        let &(j, is_p) = movable.choose(&mut rng).unwrap();
        let field = if is_p {
            &mut sites[j].p
        } else {
            &mut sites[j].r
        };
        let was_zero = *field == 0.0;
        *field = if *field > 0.5 {
            *field - 0.05
        } else {
            *field + 0.05
        };
        if was_zero {
            // a phase may now be attached where the convention forced zero
            if is_p {
                sites[j].theta = 0.0;
            } else {
                sites[j].kappa = 0.0;
            }
        }
        let q =
            SSQWParams::with_entry(window, sites, p.cut_flags().to_vec(), p.entry_theta()).unwrap();
        let verdict = decide_equivalence(&build_canonical(&p), &build_canonical(&q), geometry);
        let name = if is_p { "p" } else { "r" };
        let ok = verdict.status == EquivalenceStatus::NotEquivalent
            && verdict.stage == Stage::Magnitudes
            && verdict
                .discrepancy
                .is_some_and(|d| d.site == window.site(j) && d.parameter == name);
        if !ok {
            wrong += 1;
        }
    }
    outcome(
        wrong == 0,
        format!("100 perturbations, {wrong} not decided from magnitudes"),
    )
}

fn suzuki_cuts(rng: &mut ChaCha8Rng, window: Window, allow_isolated: bool) -> Vec<i64> {
    let mut cuts = Vec::new();
    if window.len() < 6 {
        return cuts;
    }
    for _ in 0..rng.gen_range(0..=2) {
        let c = rng.gen_range(window.lo() + 1..window.hi() - 1);
        if cuts.iter().all(|&d: &i64| (c - d).abs() >= 2) {
            cuts.push(c);
        }
    }
    if allow_isolated {
        // two adjacent cuts isolate the site between them
        let c = rng.gen_range(window.lo() + 2..window.hi() - 2);
        cuts.retain(|&d| (d - c).abs() > 2);
        cuts.push(c - 1);
        cuts.push(c);
    }
    cuts.sort_unstable();
    cuts
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_phase, mut worst_dev) = (0.0f64, 0.0f64);
    let mut failures = 0;
    for trial in 0..500u64 {
        let n = rng.gen_range(2..=32i64);
        let window = Window::new(-5, n - 6).unwrap();
        let cuts = suzuki_cuts(&mut rng, window, false);
        let s = random_suzuki_params(4000 + trial, window, &cuts, true);
        let geometry = *GEOMETRIES.choose(&mut rng).unwrap();
        let (Ok(generic), Ok(closed)) = (
            canonicalize(&build_suzuki(&s), geometry),
            suzuki_reduce(&s, geometry),
        ) else {
            failures += 1;
            continue;
        };
        for (g, c) in generic.segments.iter().zip(&closed.segments) {
            worst_dev = worst_dev.max(params_deviation(&g.params, &c.params));
            worst_phase = worst_phase.max(circle_distance(g.params.entry_theta(), 0.0));
            for sp in g.params.sites() {
                worst_phase = worst_phase
                    .max(circle_distance(sp.theta, 0.0))
                    .max(circle_distance(sp.kappa, 0.0));
            }
        }
    }
    outcome(
        failures == 0 && worst_phase < 1e-9 && worst_dev < 1e-9,
        format!("500 walks, max |θ|,|κ| {worst_phase:.2e}, closed vs generic {worst_dev:.2e}, {failures} failures"),
    )
}

/// Same `(p, a)` with fresh phases on `q` and `b`.
fn rephase(rng: &mut ChaCha8Rng, s: &SuzukiParams) -> SuzukiParams {
    let sites = s
        .sites()
        .iter()
        .map(|t| SuzukiSite {
            q: cis(rng.gen_range(0.0..std::f64::consts::TAU)) * t.q.norm(),
            b: cis(rng.gen_range(0.0..std::f64::consts::TAU)) * t.b.norm(),
            ..*t
        })
        .collect();
    SuzukiParams::new(s.window(), sites).unwrap()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut wrong = 0;
    let mut isolated_pairs = 0;
    for trial in 0..200u64 {
        let n = rng.gen_range(8..=24i64);
        let window = Window::new(0, n - 1).unwrap();
        let with_isolated = trial % 2 == 0;
        let cuts = suzuki_cuts(&mut rng, window, with_isolated);
        let s = random_suzuki_params(5000 + trial, window, &cuts, true);
        let mut t = rephase(&mut rng, &s);
        let same = rng.gen_bool(0.5);
        if !same {
            let mut sites = t.sites().to_vec();
            let j = rng.gen_range(0..sites.len());
            let change_p =
                !cuts.contains(&window.site(j)) && j + 1 < sites.len() && rng.gen_bool(0.5);
            let site = &mut sites[j];
            if change_p {
                site.p = if site.p > 0.5 {
                    site.p - 0.1
                } else {
                    site.p + 0.1
                };
                site.q = cis(site.q.arg()) * (1.0 - site.p * site.p).sqrt();
            } else {
                site.a = if site.a > 0.5 {
                    site.a - 0.1
                } else {
                    site.a + 0.1
                };
                site.b = cis(site.b.arg()) * (1.0 - site.a * site.a).sqrt();
            }
            t = SuzukiParams::new(window, sites).unwrap();
        }
        let verdict = decide_equivalence(&build_suzuki(&s), &build_suzuki(&t), Geometry::Line);
        if with_isolated && verdict.stage >= Stage::IsolatedBlocks {
            isolated_pairs += 1;
        }
        let expected = if same {
            EquivalenceStatus::Equivalent
        } else {
            EquivalenceStatus::NotEquivalent
        };
        if verdict.status != expected {
            wrong += 1;
        }
    }
    outcome(
        wrong == 0,
        format!("200 pairs ({isolated_pairs} through isolated blocks), {wrong} misclassified"),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut missing = 0;
    for trial in 0..200u64 {
        let n = rng.gen_range(2..=32i64);
        let window = Window::new(0, n - 1).unwrap();
        let profile = random_profile(&mut rng, window, true);
        let p = random_ssqw_params(6000 + trial, window, &profile).unwrap();
        let sites = p
            .sites()
            .iter()
            .map(|s| SiteParams {
                theta: 0.0,
                kappa: 0.0,
                ..*s
            })
            .collect();
        let p = SSQWParams::new(window, sites, p.cut_flags().to_vec()).unwrap();
        match chiral_factorize(&p) {
            Some(cert) => worst = worst.max(cert.residuals.max()),
            None => missing += 1,
        }
    }
    outcome(
        missing == 0 && worst < 1e-10,
        format!("200 certificates, largest residual {worst:.2e}, {missing} missing"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for trial in 0..100u64 {
        let window = Window::new(0, 31).unwrap();
        let profile = random_profile(&mut rng, window, true);
        let u = random_admissible_walk(7000 + trial, window, &profile).unwrap();
        let rebuilt = extract_eta(&u)
            .and_then(|eta| extract_zeta_xi(&u, &eta))
            .map(|b| b.reconstruct());
        match rebuilt {
            Ok(r) => worst = worst.max(operator_distance(&u.to_dense(), &r.to_dense()).unwrap()),
            Err(_) => failures += 1,
        }
    }
    outcome(
        failures == 0 && worst < 1e-9,
        format!("100 walks of 32 sites, max distance {worst:.2e}, {failures} failures"),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut rank_mismatch = 0;
    let mut worst_spec = 0.0f64;
    for trial in 0..100u64 {
        let n = rng.gen_range(2..=32i64);
        let window = Window::new(0, n - 1).unwrap();
        let profile = random_profile(&mut rng, window, true);
        let u = random_admissible_walk(8000 + trial, window, &profile).unwrap();
        let v = apply_gauge(&u, &random_gauge(8500 + trial, window, false)).unwrap();
        if !rank_profile(&u).same_ranks(&rank_profile(&v)) {
            rank_mismatch += 1;
        }
        worst_spec = worst_spec.max(spectrum_distance(
            &window_spectrum(&u),
            &window_spectrum(&v),
        ));
    }
    let mut worst_norm = 0.0f64;
    for seed in 0..3u64 {
        let p = random_ssqw_params(
            8900 + seed,
            Window::new(-4, 4).unwrap(),
            &WalkProfile::default(),
        )
        .unwrap();
        let walk = TailedCanonical {
            left: p.sites()[0],
            core: p.window(),
            core_sites: p.sites().to_vec(),
            cuts: vec![],
            right: p.sites()[7],
        };
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::new(
            Window::new(0, 0).unwrap(),
            vec![[cis(0.0) * h, cis(0.7) * h]],
        )
        .unwrap();
        let out = evolve_line(&walk, &psi, 1000).unwrap();
        worst_norm = worst_norm.max((distribution(&out).total() - 1.0).abs());
    }
    outcome(
        rank_mismatch == 0 && worst_spec < 1e-10 && worst_norm < 1e-10,
        format!(
            "100 gauges: {rank_mismatch} rank mismatches, spectra within {worst_spec:.2e}; 1000 steps: probability drift {worst_norm:.2e}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let window = Window::new(0, 9).unwrap();
    let u = build_kitagawa(&KitagawaParams::new(
        window,
        std::f64::consts::FRAC_PI_2,
        0.3,
    ));
    let report = check_admissibility(&u);
    let all_b = report.assumption_b_offenders == window.sites().collect::<Vec<_>>();
    let status = Command::new(env!("CARGO_BIN_EXE_ssqw"))
        .args([
            "check",
            "--kitagawa",
            &std::f64::consts::FRAC_PI_2.to_string(),
            "0.3",
            "--lo",
            "0",
            "--hi",
            "9",
        ])
        .output()
        .expect("run ssqw");
    let exit = status.status.code();
    let adjacent = WalkProfile {
        cuts: vec![3, 4],
        ..Default::default()
    };
    let rejected = matches!(
        random_admissible_walk(0, window, &adjacent),
        Err(Error::InfeasibleProfile(_))
    ) && matches!(
        random_ssqw_params(0, window, &adjacent),
        Err(Error::InfeasibleProfile(_))
    );
    outcome(
        all_b && exit == Some(1) && rejected,
        format!("assumption B offenders on every site: {all_b}, exit code {exit:?}, adjacent cuts rejected: {rejected}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("round-trip canonicalization", criterion_1),
        ("theorem discrimination, cases 1-4", criterion_2),
        ("magnitudes decide first", criterion_3),
        ("Suzuki reduction", criterion_4),
        ("Suzuki classes", criterion_5),
        ("chiral certificate", criterion_6),
        ("structure reconstruction", criterion_7),
        ("gauge invariants", criterion_8),
        ("degenerate inputs", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        println!(
            "criterion {} [{name}]: {} ({})",
            k + 1,
            if o.ok { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.ok {
            failed += 1;
        }
    }
    println!("acceptance: {} of 9 passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
