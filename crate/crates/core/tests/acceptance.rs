//! Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and exits
//! non-zero on any failure not listed in `EXPECTED_FAILURES`.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use ccd_lab::capacity::{
    capacity, capacity_is_maximal, concurrence_spectrum, half_plane_fraction, maximal_capacity_fraction,
    multiset_distance, spectrum_from_ccd,
};
use ccd_lab::ccd::{ccd, polar_time_reversal};
use ccd_lab::linalg::{
    eig_hermitian, exp_skew_hermitian, frob, haar_unitary, identity, kron, random_hermitian, task_rng,
    unitary_deviation, CMat, Tolerances, I,
};
use ccd_lab::spinchain::{
    build_hamiltonian, critical_field, ground_state_concurrence_sweep, ising_spectrum_analytic, kramers_report,
    random_time_symmetric, t_min_sweep, ClusterKind, SpinChainSpec, Verdict,
};
use ccd_lab::spinflip::time_antisymmetric_part;
use ccd_lab::symplectic::{block_structure_deviation, symplectic_eig, SkewSymmetricHamiltonian};
use num_complex::Complex64;

use common::{capacity_oracle, cphase};

/// Criteria that are run faithfully but are known to fail, with the reason.
const EXPECTED_FAILURES: &[(usize, &str)] = &[(
    9,
    "the 0.9375 target is 1 - m 2^(1-m) at m = 8 points, but the reduced spectrum for n = 5 has 16 points",
)];

/// Name of the single sub-check allowed to fail inside an expected failure.
const EXPECTED_SUBCHECK: &str = "n=5 fraction vs 0.9375";

struct Check {
    name: String,
    ok: bool,
    detail: String,
}

#[derive(Default)]
struct Criterion {
    checks: Vec<Check>,
}

impl Criterion {
    fn check(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            ok,
            detail: detail.into(),
        });
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    fn summary(&self) -> String {
        let failed: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.ok)
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect();
        let info: Vec<String> = self
            .checks
            .iter()
            .filter(|c| c.ok && !c.detail.is_empty())
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect();
        let mut s = format!("{}/{} checks", self.checks.iter().filter(|c| c.ok).count(), self.checks.len());
        if !failed.is_empty() {
            s += &format!("; failed: {}", failed.join(", "));
        }
        if !info.is_empty() {
            s += &format!("; {}", info.join("; "));
        }
        s
    }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn criterion_1() -> Criterion {
    let mut c = Criterion::default();
    let tol = tol();
    let start = Instant::now();
    for n in 2..=7usize {
        let bound = 1e-9 * 2f64.powf(n as f64 / 2.0);
        let (mut worst_r, mut worst_k, mut worst_a) = (0f64, 0f64, 0f64);
        let mut errors = 0;
        for i in 0..20 {
            let mut rng = task_rng(100 + n as u64, i);
            let v = haar_unitary(1 << n, &mut rng);
            match ccd(&v, n, &tol) {
                Ok(f) => {
                    worst_r = worst_r.max(f.residual);
                    worst_k = worst_k.max(f.k_residual());
                    worst_a = worst_a.max(f.a_form_residual());
                }
                Err(_) => errors += 1,
            }
        }
        c.check(format!("n={n} decompositions"), errors == 0, if errors > 0 { format!("{errors} errors") } else { String::new() });
        c.check(format!("n={n} reconstruction"), worst_r <= bound, format!("{worst_r:.1e}"));
        c.check(format!("n={n} K-membership"), worst_k <= 1e-9, if worst_k > 1e-9 { format!("{worst_k:.1e}") } else { String::new() });
        c.check(format!("n={n} a diagonal"), worst_a <= 1e-9, if worst_a > 1e-9 { format!("{worst_a:.1e}") } else { String::new() });
    }
    let secs = start.elapsed().as_secs_f64();
    c.check("runtime", secs < 60.0, format!("{secs:.1} s"));
    c
}

fn criterion_2() -> Criterion {
    let mut c = Criterion::default();
    let tol = tol();
    for ell in [2usize, 4, 8, 16, 32] {
        let (mut res, mut block, mut unit, mut gap) = (0f64, 0f64, 0f64, 0f64);
        let mut even = true;
        for i in 0..5 {
            let mut rng = task_rng(200 + ell as u64, i);
            let h = SkewSymmetricHamiltonian::random(ell, &mut rng);
            let full = h.full();
            let norm = frob(&full);
            let r = symplectic_eig(&h, tol.cluster).expect("structured eigensolver");
            res = res.max(r.residual / norm);
            block = block.max(block_structure_deviation(&r.w));
            unit = unit.max(unitary_deviation(&r.w));
            let generic = eig_hermitian(&full, 1e-10).unwrap();
            let mut doubled = r.doubled();
            doubled.sort_by(f64::total_cmp);
            gap = gap.max(doubled.iter().zip(&generic.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            let groups = ccd_lab::symplectic::cluster_sorted(&generic.values, tol.cluster);
            even &= groups.iter().all(|g| g.len() % 2 == 0);
        }
        c.check(format!("l={ell} residual/|H|"), res <= 1e-10, if res > 1e-10 { format!("{res:.1e}") } else { String::new() });
        c.check(format!("l={ell} block structure"), block <= 1e-10, if block > 1e-10 { format!("{block:.1e}") } else { String::new() });
        c.check(format!("l={ell} unitarity"), unit <= 1e-10, if unit > 1e-10 { format!("{unit:.1e}") } else { String::new() });
        c.check(format!("l={ell} vs generic solver"), gap <= 1e-10, format!("{gap:.1e}"));
        c.check(format!("l={ell} even multiplicities"), even, "");
    }
    c
}

fn criterion_3() -> Criterion {
    let mut c = Criterion::default();
    let tol = tol();
    let mut worst: f64 = 0.0;
    for t in [0.0, 0.1, 0.3, PI / 8.0, 0.6, PI / 4.0, 1.1, 2.0] {
        let spec = concurrence_spectrum(&cphase(t), 2, &tol).unwrap();
        let want: Vec<Complex64> = [2.0 * t, 2.0 * t, -2.0 * t, -2.0 * t]
            .iter()
            .map(|&a| Complex64::from_polar(1.0, a))
            .collect();
        worst = worst.max(multiset_distance(&spec.points, &want));
    }
    c.check("spectrum {e^(+-2it)} doubled", worst <= 1e-12, format!("{worst:.1e}"));
    c.check("maximal at pi/4", capacity_is_maximal(&cphase(PI / 4.0), 2, &tol).unwrap(), "");
    c.check("maximal at 3pi/4", capacity_is_maximal(&cphase(3.0 * PI / 4.0), 2, &tol).unwrap(), "");
    c.check("not maximal at pi/8", !capacity_is_maximal(&cphase(PI / 8.0), 2, &tol).unwrap(), "");
    let (mut vs_closed, mut vs_oracle): (f64, f64) = (0.0, 0.0);
    for k in 0..=24 {
        let t = k as f64 * PI / 48.0;
        let r = capacity(&cphase(t), 2, &tol).unwrap();
        vs_closed = vs_closed.max((r.value - (2.0 * t).sin().abs()).abs());
        vs_oracle = vs_oracle.max((r.value - capacity_oracle(&r.spectrum.points)).abs());
    }
    c.check("capacity = |sin 2t|", vs_closed <= 1e-6, format!("{vs_closed:.1e}"));
    c.check("capacity vs sampling oracle", vs_oracle <= 1e-6, format!("{vs_oracle:.1e}"));
    c
}

fn random_k(n: usize, rng: &mut impl rand::Rng) -> CMat {
    let h = time_antisymmetric_part(&random_hermitian(1 << n, rng));
    exp_skew_hermitian(&h.map(|z| z * I), 1e-10).unwrap()
}

fn criterion_4() -> Criterion {
    let mut c = Criterion::default();
    let tol = tol();
    for n in [3usize, 5] {
        let mut even = true;
        let (mut repeat, mut conj): (f64, f64) = (0.0, 0.0);
        for i in 0..5 {
            let mut rng = task_rng(400 + n as u64, i);
            let v = ccd_lab::linalg::haar_special_unitary(1 << n, &mut rng);
            let spec = concurrence_spectrum(&v, n, &tol).unwrap();
            let args: Vec<f64> = spec.points.iter().map(|z| z.arg()).collect();
            let mut groups: Vec<usize> = Vec::new();
            let mut used = vec![false; args.len()];
            for a in 0..args.len() {
                if used[a] {
                    continue;
                }
                let members: Vec<usize> = (a..args.len())
                    .filter(|&b| !used[b] && (spec.points[a] - spec.points[b]).norm() <= tol.cluster)
                    .collect();
                members.iter().for_each(|&b| used[b] = true);
                groups.push(members.len());
            }
            even &= groups.iter().all(|g| g % 2 == 0) && spec.reduced.is_some();
            let f1 = ccd(&v, n, &tol).unwrap();
            let f2 = ccd(&v, n, &tol).unwrap();
            repeat = repeat.max(multiset_distance(&f1.a_squared_spectrum(), &f2.a_squared_spectrum()));
            let w = random_k(n, &mut rng) * &v * random_k(n, &mut rng);
            let f3 = ccd(&w, n, &tol).unwrap();
            conj = conj.max(multiset_distance(&spectrum_from_ccd(&f1).points, &spectrum_from_ccd(&f3).points));
        }
        c.check(format!("SU({}) even multiplicities", 1 << n), even, "");
        c.check(format!("SU({}) repeated runs", 1 << n), repeat <= tol.cluster, format!("{repeat:.1e}"));
        c.check(format!("SU({}) K-conjugated runs", 1 << n), conj <= tol.cluster, format!("{conj:.1e}"));
    }
    c
}

fn criterion_5() -> Criterion {
    let mut c = Criterion::default();
    let tol = tol();
    let i2 = identity(2);
    let mut slack = f64::INFINITY;
    for i in 0..50 {
        let mut rng = task_rng(500, i);
        let v = ccd_lab::linalg::haar_special_unitary(4, &mut rng);
        let k2 = capacity(&v, 2, &tol).unwrap().value;
        let k3 = capacity(&kron(&v, &i2).unwrap(), 3, &tol).unwrap().value;
        slack = slack.min(k3 - k2);
    }
    c.check("kappa_3(v (x) I) >= kappa_2(v) - 1e-8", slack >= -1e-8, format!("min gap {slack:.1e}"));
    let spot = capacity(&kron(&cphase(PI / 4.0), &i2).unwrap(), 3, &tol).unwrap().value;
    c.check("kappa_3(v(pi/4) (x) I) = 1", (spot - 1.0).abs() <= 1e-8, format!("{spot:.12}"));
    c
}

fn criterion_6() -> Criterion {
    let mut c = Criterion::default();
    let tol = tol();
    for n in [2usize, 3, 4, 5] {
        let mut verdict_ok = true;
        let mut flip: f64 = 0.0;
        let mut min_conc: f64 = 1.0;
        for i in 0..100 {
            let mut rng = task_rng(600 + n as u64, i);
            let h = random_time_symmetric(n, &mut rng);
            let r = kramers_report(&h, n, &tol).unwrap();
            flip = flip.max(r.flip_residual / frob(&h).max(1.0));
            if n % 2 == 1 {
                verdict_ok &= r.clusters.iter().all(|cl| cl.kind == ClusterKind::EvenMultiplicity);
            } else {
                for cl in &r.clusters {
                    if let Some(x) = cl.concurrence {
                        min_conc = min_conc.min(x);
                    }
                }
            }
            verdict_ok &= r.verdict != Verdict::Violated;
        }
        if n % 2 == 1 {
            c.check(format!("n={n} even multiplicities"), verdict_ok, "");
        } else {
            c.check(format!("n={n} nondegenerate concurrence"), verdict_ok && min_conc >= 1.0 - 1e-8, format!("min {min_conc:.12}"));
        }
        c.check(format!("n={n} spin-flip eigenstate residual"), flip <= 1e-9, if flip > 1e-9 { format!("{flip:.1e}") } else { String::new() });
    }
    c
}

fn criterion_7() -> Criterion {
    let mut c = Criterion::default();
    let tol = tol();
    for n in 2..=5usize {
        let (mut r, mut p, mut k) = (0f64, 0f64, 0f64);
        for i in 0..20 {
            let mut rng = task_rng(700 + n as u64, i);
            let v = haar_unitary(1 << n, &mut rng);
            let f = polar_time_reversal(&v, n, &tol).unwrap();
            r = r.max(f.residual);
            p = p.max(f.p_residual);
            k = k.max(f.k_residual);
        }
        c.check(format!("n={n} reconstruction"), r <= 1e-9, format!("{r:.1e}"));
        c.check(format!("n={n} i Hp in p"), p <= 1e-9, if p > 1e-9 { format!("{p:.1e}") } else { String::new() });
        c.check(format!("n={n} i Hk in k"), k <= 1e-9, if k > 1e-9 { format!("{k:.1e}") } else { String::new() });
    }
    c
}

fn criterion_8() -> Criterion {
    let mut c = Criterion::default();
    let tol = tol();
    let mut gap: f64 = 0.0;
    for n in 2..=8 {
        let h = build_hamiltonian(&SpinChainSpec::ising(n, 1.0)).unwrap();
        let numeric = eig_hermitian(&h, 1e-12).unwrap().values;
        let mut analytic = ising_spectrum_analytic(n, 1.0).unwrap();
        analytic.sort_by(f64::total_cmp);
        gap = gap.max(numeric.iter().zip(&analytic).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    c.check("Ising analytic = numeric (n <= 8)", gap <= 1e-12, format!("{gap:.1e}"));
    for n in [2usize, 4] {
        let s = t_min_sweep(n, 1.0, 400, &tol).unwrap();
        let want = PI / (4.0 * n as f64);
        c.check(
            format!("n={n} t_min sweep"),
            s.consistent && (s.t_min - want).abs() < 1e-15,
            format!("t_min {:.6}, first maximal grid point {:?}", s.t_min, s.first_maximal.map(|t| (t * 1e6).round() / 1e6)),
        );
    }
    let h = build_hamiltonian(&SpinChainSpec::xxx(4, 1.0)).unwrap();
    let r = kramers_report(&h, 4, &tol).unwrap();
    let conc = r.ground_concurrence.unwrap_or(0.0);
    c.check("XXX n=4 ground state", r.ground_unique && conc >= 1.0 - 1e-8, format!("concurrence {conc:.12}"));
    let hs: Vec<f64> = (0..=30).map(|k| k as f64 * 0.1).collect();
    let rows = ground_state_concurrence_sweep(4, 1.0, 0.0, &hs, &tol).unwrap();
    let hc = critical_field(4, 1.0, 0.0, 0.0, 3.0, &tol).unwrap();
    match hc {
        Some(hc) => {
            let below = rows.iter().filter(|r| r.parameter < hc).all(|r| (r.concurrence - 1.0).abs() <= 1e-8);
            let above = rows.iter().filter(|r| r.parameter > hc).all(|r| r.concurrence <= 1e-8);
            c.check("XY g=0 concurrence 1 below crossing", below, format!("h_crit {hc:.10}"));
            c.check("XY g=0 concurrence 0 above crossing", above, "");
        }
        None => c.check("XY g=0 crossing located", false, "no sector change in [0, 3]"),
    }
    c
}

fn criterion_9() -> Criterion {
    let mut c = Criterion::default();
    let samples = 10_000;
    let tol = tol();
    let r5 = maximal_capacity_fraction(5, samples, 1, tol.hull).unwrap();
    let sigma_lit = (0.9375f64 * 0.0625 / samples as f64).sqrt();
    c.check(
        EXPECTED_SUBCHECK,
        (r5.fraction - 0.9375).abs() <= 3.0 * sigma_lit,
        format!("fraction {:.4}, 3 sigma = {:.4}", r5.fraction, 3.0 * sigma_lit),
    );
    let p = half_plane_fraction(r5.points_per_sample);
    let sigma = (p * (1.0 - p) / samples as f64).sqrt();
    c.check(
        "n=5 fraction vs 1 - m 2^(1-m), m = 16",
        (r5.fraction - p).abs() <= 3.0 * sigma + 0.5 / samples as f64,
        format!("{:.4} vs {:.5}", r5.fraction, p),
    );
    let mut fractions = Vec::new();
    for n in [3usize, 5, 7, 9] {
        fractions.push(maximal_capacity_fraction(n, samples, 1, tol.hull).unwrap().fraction);
    }
    c.check(
        "nondecreasing over n = 3, 5, 7, 9",
        fractions.windows(2).all(|w| w[1] >= w[0]),
        format!("{fractions:?}"),
    );
    let p3 = half_plane_fraction(4);
    let s3 = (p3 * (1.0 - p3) / samples as f64).sqrt();
    c.check("n=3 fraction vs 1/2", (fractions[0] - p3).abs() <= 3.0 * s3, format!("{:.4}", fractions[0]));
    let a = serde_json::to_string(&r5).unwrap();
    let b = serde_json::to_string(&maximal_capacity_fraction(5, samples, 1, tol.hull).unwrap()).unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c1 = single.install(|| serde_json::to_string(&maximal_capacity_fraction(5, samples, 1, tol.hull).unwrap()).unwrap());
    c.check("byte-identical reports", a == b && a == c1, "");
    c
}

fn main() -> ExitCode {
    let criteria: [(usize, fn() -> Criterion); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut unexpected = Vec::new();
    for (k, run) in criteria {
        let start = Instant::now();
        let result = run();
        let status = if result.passed() { "PASS" } else { "FAIL" };
        println!(
            "criterion {k}: {status} [{:.1} s] {}",
            start.elapsed().as_secs_f64(),
            result.summary()
        );
        let expected = EXPECTED_FAILURES.iter().find(|(e, _)| *e == k);
        match (result.passed(), expected) {
            (true, None) => {}
            (false, Some((_, why))) => {
                let only_known = result.checks.iter().filter(|c| !c.ok).all(|c| c.name == EXPECTED_SUBCHECK);
                if only_known {
                    println!("criterion {k}: expected failure: {why}");
                } else {
                    unexpected.push(k);
                }
            }
            (true, Some(_)) => {
                println!("criterion {k}: listed as an expected failure but passed");
                unexpected.push(k);
            }
            (false, None) => unexpected.push(k),
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria behave as recorded");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected results for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
