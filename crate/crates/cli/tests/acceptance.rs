//! Acceptance criteria, one line per check. Runs without the libtest harness
//! so the lines always appear in `cargo test` output.
//!
//! Known failures are listed in `KNOWN_FAILURES`; the run succeeds only when
//! every other check passes and every known failure still fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use freelip_cli::config::ExperimentConfig;
use freelip_cli::suites::{run_suite, Suite, SuiteOutcome};
use freelip_core::banach_lab::{alpha_beta, estimate_bilip, geometric_radii, squeeze_radius, RadialNet, Side};
use freelip_core::decomposition::{
    kalton_weight, random_gluing, random_kalton_instance, random_separated_clusters, random_star, two_legs,
};
use freelip_core::free_norm::{free_norm, free_norm_dual, free_norm_flow, lip_norm, FreeVector, LipFunction, NormSolver};
use freelip_core::lip_ops::infconv_extend;
use freelip_core::metric::{cusp_space, segments_space};
use freelip_core::numeric::floor_log2;
use freelip_core::quotient::{quotient_pseudometric, quotient_via_lip, segments_counterexample, Partition};
use freelip_core::rng::Rng;
use freelip_core::{sample, BasePolicy, PointedMetricSpace};

const SEED: u64 = 20_240_601;
const GAP: f64 = 1e-9;
const EXACT: f64 = 1e-12;
const EPSILON: f64 = 0.05;

/// Checks that fail by design: the measured inverse ratios of the squeeze
/// maps are 2, above the claimed 4/3 and 1.
const KNOWN_FAILURES: [&str; 2] = ["8c-L", "8c-R"];

struct Line {
    id: String,
    ok: bool,
    detail: String,
}

struct Report {
    lines: Vec<Line>,
}

impl Report {
    fn check(&mut self, id: &str, ok: bool, detail: String) {
        let tag = if ok { "PASS" } else { "FAIL" };
        let known = if KNOWN_FAILURES.contains(&id) { " (known failure)" } else { "" };
        println!("[{tag}] {id}: {detail}{known}");
        self.lines.push(Line { id: id.to_string(), ok, detail });
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn config() -> ExperimentConfig {
    ExperimentConfig { seed: Some(SEED), ..ExperimentConfig::default() }
}

fn suite(s: Suite) -> (SuiteOutcome, Duration) {
    let start = Instant::now();
    let out = run_suite(&config(), s).unwrap_or_else(|e| panic!("suite {s}: {e}"));
    (out, start.elapsed())
}

fn worst_slack(o: &SuiteOutcome) -> f64 {
    o.rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min)
}

fn worst_of(o: &SuiteOutcome, quantity: &str) -> (f64, f64) {
    o.rows
        .iter()
        .filter(|r| r.quantity.starts_with(quantity))
        .map(|r| (r.measured, r.bound))
        .fold((f64::NEG_INFINITY, 0.0), |a, b| if b.0 - b.1 > a.0 - a.1 { b } else { a })
}

/// α, β by locating the octave with repeated halving and doubling.
fn alpha_beta_oracle(t: f64) -> (f64, f64) {
    let mut a = 1.0;
    while a > t {
        a /= 2.0;
    }
    while 2.0 * a <= t {
        a *= 2.0;
    }
    if t <= a + a / 2.0 {
        (t - a / 2.0, a / 2.0)
    } else {
        (a, t - a)
    }
}

fn duality(r: &mut Report) {
    let start = Instant::now();
    let (mut worst, mut worst_brute, mut brute_count) = (0.0f64, 0.0f64, 0);
    for i in 0..500u64 {
        let mut rng = Rng::stream(SEED, i);
        let n = 2 + rng.below(29);
        let space = sample::random_space(&mut rng, n);
        let k = 1 + rng.below(n);
        let mu = sample::random_free_vector(&mut rng, n, k);
        let dual = free_norm_dual(&mu, &space).expect("lp").0;
        let flow = free_norm_flow(&mu, &space).0;
        worst = worst.max((dual - flow).abs());
        if n <= 5 {
            let brute = common::brute_free_norm(&space, &mu.to_dense(n));
            worst_brute = worst_brute.max((dual - brute).abs()).max((flow - brute).abs());
            brute_count += 1;
        }
    }
    let own = start.elapsed();
    let (out, t) = suite(Suite::Duality);
    r.check(
        "1",
        worst <= GAP && worst_brute <= GAP && out.passed() && out.rows.len() == 500 && secs(own + t) <= 60.0,
        format!(
            "duality on 500 spaces: max |lp - flow| = {worst:.2e}, {brute_count} spaces with n <= 5 vs vertex oracle max {worst_brute:.2e}, suite {} rows, {:.1} s <= 60 s",
            out.rows.len(),
            secs(own + t)
        ),
    );
}

fn delta_isometry(r: &mut Report) {
    let mut rng = Rng::new(SEED);
    let mut spaces: Vec<PointedMetricSpace> = vec![
        segments_space(3, 5).unwrap(),
        segments_counterexample(3).unwrap().0,
        cusp_space(6, 1.5).unwrap(),
        sample::random_cloud(&mut rng, 12, 3),
        sample::random_graph(&mut rng, 12, 6),
        sample::random_space(&mut rng, 10),
        random_kalton_instance(&mut rng, 15, -8.0, 8.0).0,
        random_separated_clusters(&mut rng, 4, 3).0,
        random_gluing(&mut rng, 10).0,
        random_star(&mut rng, 3, 3).0,
        two_legs(&[0.5, 1.0, 2.0], &[0.25, 1.5], 0.3).unwrap().0,
        RadialNet::planar(6, geometric_radii(-1, 1, 2), 2.0).unwrap().space().clone(),
    ];
    spaces.push(spaces[3].scale(0.01).unwrap());
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for s in &spaces {
        for x in 0..s.len() {
            for y in x + 1..s.len() {
                let mu = FreeVector::dipole(x, y);
                let d = s.d(x, y);
                for solver in [NormSolver::Lp, NormSolver::Flow] {
                    let v = free_norm(&mu, s, solver).expect("norm");
                    worst = worst.max((v - d).abs() / d.max(1.0));
                }
                pairs += 1;
            }
        }
    }
    r.check(
        "2",
        worst <= EXACT,
        format!("|norm(delta_x - delta_y) - d(x,y)| over {pairs} pairs of {} generated spaces: {worst:.2e} <= 1e-12", spaces.len()),
    );
}

fn kalton(r: &mut Report) {
    let mut rng = Rng::new(SEED);
    let mut pou = 0.0f64;
    for _ in 0..100_000 {
        let t = 2f64.powf(rng.range(-8.0, 8.0));
        let k0 = floor_log2(t);
        let sum: f64 = (k0 - 3..=k0 + 3).map(|k| kalton_weight(t, k).unwrap()).sum();
        pou = pou.max((sum - 1.0).abs());
    }
    let (out, t) = suite(Suite::Kalton);
    let exact = out.rows.iter().filter(|r| r.quantity == "reconstruction").all(|r| r.measured == 0.0);
    let ratios = out.rows.iter().filter(|r| r.quantity == "ratio").count();
    let separated = out.rows.iter().filter(|r| r.quantity == "separated").count();
    let (ratio, _) = worst_of(&out, "ratio");
    let sep = out.rows.iter().filter(|r| r.quantity == "separated").map(|r| r.slack).fold(f64::INFINITY, f64::min);
    r.check(
        "3",
        exact && out.passed() && ratios == 200 && separated == 100 && pou <= EXACT && secs(t) <= 120.0,
        format!(
            "reconstruction exact on {ratios} instances, max sum/norm ratio {ratio:.3} <= 72, partition of unity error {pou:.1e}, separated bound min slack {sep:.2e} on {separated} instances, {:.1} s <= 120 s",
            secs(t)
        ),
    );
}

fn suite_line(r: &mut Report, id: &str, s: Suite, what: &str) {
    let (out, t) = suite(s);
    let mut kinds: Vec<&str> = Vec::new();
    for row in &out.rows {
        let k = row.quantity.trim_end_matches(|c: char| c.is_ascii_digit());
        if !kinds.contains(&k) {
            kinds.push(k);
        }
    }
    let parts: Vec<String> = kinds
        .iter()
        .map(|k| {
            let slack = out
                .rows
                .iter()
                .filter(|r| r.quantity.trim_end_matches(|c: char| c.is_ascii_digit()) == *k)
                .map(|r| r.slack)
                .fold(f64::INFINITY, f64::min);
            format!("{k} min slack {slack:.2e}")
        })
        .collect();
    let instances = out.rows.iter().map(|r| r.instance).max().map_or(0, |m| m + 1);
    r.check(
        id,
        out.passed() && worst_slack(&out) >= -GAP,
        format!("{what} on {instances} instances: {} ({:.1} s)", parts.join(", "), secs(t)),
    );
}

fn segments(r: &mut Report) {
    let mut worst = 0.0f64;
    let mut monotone = true;
    let mut prev = f64::INFINITY;
    let mut last = 0.0;
    for j in 1..=10usize {
        let (space, part) = segments_counterexample(j).unwrap();
        let q = quotient_pseudometric(&space, &part);
        let tip = space.index_of("1:1").expect("tip of the first branch");
        let v = q.d(part.class_of(space.base()), part.class_of(tip));
        worst = worst.max((v - (0.5 + 2f64.powi(-(1 + j as i32)))).abs());
        monotone &= v < prev && v > 0.5;
        prev = v;
        last = v;
    }
    r.check(
        "6",
        worst <= EXACT && monotone,
        format!("quotient distance to the first tip equals 1/2 + 2^-(1+J) for J = 1..10 (max error {worst:.1e}), decreasing to 1/2 (J = 10 gives {last})"),
    );
}

fn quotient_duality(r: &mut Report) {
    let mut worst = 0.0f64;
    let mut worst_paths = 0.0f64;
    for i in 0..200u64 {
        let mut rng = Rng::stream(SEED ^ 7, i);
        let n = 2 + rng.below(9);
        let space = sample::random_space(&mut rng, n);
        let k = 1 + rng.below(n);
        let labels = sample::random_labels(&mut rng, n, k);
        let part = Partition::from_labels(&labels);
        let pm = quotient_pseudometric(&space, &part);
        let paths = if n <= 7 { Some(common::path_enumeration_quotient(&space, &labels)) } else { None };
        for x in 0..n {
            for y in x + 1..n {
                let v = pm.d(part.class_of(x), part.class_of(y));
                worst = worst.max((quotient_via_lip(&space, &part, x, y).unwrap() - v).abs());
                if let Some(p) = &paths {
                    worst_paths = worst_paths.max((p[x][y] - v).abs());
                }
            }
        }
    }
    let (out, _) = suite(Suite::QuotientOracle);
    r.check(
        "7",
        worst <= GAP && worst_paths <= GAP && out.passed(),
        format!(
            "quotient by duality vs shortest paths on 200 instances: max gap {worst:.2e}; path enumeration (n <= 7) max gap {worst_paths:.2e}; suite {} rows",
            out.rows.len()
        ),
    );
}

fn radial(r: &mut Report) {
    let start = Instant::now();
    let mut rng = Rng::new(SEED);
    let (mut identity, mut oracle_ok, mut lip_ok) = (0.0f64, true, true);
    let mut prev: Option<(f64, f64, f64)> = None;
    for _ in 0..1_000_000 {
        let t = 2f64.powf(rng.range(-10.0, 10.0));
        let (a, b) = alpha_beta(t).unwrap();
        identity = identity.max((a + b - t).abs() / t.max(1.0));
        oracle_ok &= (a, b) == alpha_beta_oracle(t);
        if let Some((s, sa, sb)) = prev {
            let step = (t - s).abs() * (1.0 + EXACT) + 1e-15;
            lip_ok &= (a - sa).abs() <= step && (b - sb).abs() <= step;
        }
        prev = Some((t, a, b));
    }
    r.check(
        "8a",
        identity <= EXACT && oracle_ok && lip_ok,
        format!("alpha + beta = t within {identity:.1e} on 10^6 radii, matches the octave oracle: {oracle_ok}, 1-Lipschitz on consecutive pairs: {lip_ok}"),
    );

    let mut inside = true;
    for _ in 0..200_000 {
        let m = rng.int_between(-8, 8) as i32;
        let lo = 2f64.powi(m);
        let t = lo * (1.0 + rng.uniform());
        let t = if t <= lo { 2.0 * lo } else { t };
        let rr = squeeze_radius(Side::R, t).unwrap();
        let ll = squeeze_radius(Side::L, t).unwrap();
        inside &= rr >= lo + lo / 2.0 && rr <= 2.0 * lo && ll >= lo && ll <= lo + lo / 2.0;
    }
    r.check("8b", inside, "crown images: R in [1.5*2^m, 2^(m+1)], L in [2^m, 1.5*2^m] on 2*10^5 radii".into());

    let net = RadialNet::planar(64, geometric_radii(-2, 2, 8), 2.0).unwrap();
    for side in [Side::L, Side::R] {
        let rep = estimate_bilip(&net, side, 4, EPSILON).unwrap();
        r.check(
            &format!("8c-{side}"),
            rep.passed(),
            format!(
                "{side} on the {}x{} net: forward {:.4} (claimed {}), inverse {:.4} (claimed {:.4}), {} of {} pairs beyond eps = {EPSILON}",
                net.n_directions(),
                net.n_radii(),
                rep.forward.value,
                rep.forward_bound,
                rep.inverse.value,
                rep.inverse_bound,
                rep.violation_count,
                rep.pairs
            ),
        );
    }

    let (out, _) = suite(Suite::Bm4);
    let (m, _) = worst_of(&out, "2s_star");
    r.check(
        "8d",
        out.passed() && out.rows.len() == 100,
        format!("2*s*(h) over {} random 1-Lipschitz h: max {m:.4} <= 4 + {EPSILON}", out.rows.len()),
    );
    let t = start.elapsed();
    r.check("8e", secs(t) <= 600.0, format!("criterion 8 runtime {:.1} s <= 600 s", secs(t)));
}

fn infconv(r: &mut Report) {
    let mut worst_ext = 0.0f64;
    let mut worst_norm = 0.0f64;
    for i in 0..200u64 {
        let mut rng = Rng::stream(SEED ^ 9, i);
        let n = 2 + rng.below(14);
        let k = 1 + rng.below(n);
        let space = sample::random_space(&mut rng, n);
        let idx = sample::random_subset_with(&mut rng, n, k, space.base());
        let (sub, _) = space.restrict(&idx, BasePolicy::Keep).unwrap();
        let f = LipFunction::new((0..idx.len()).map(|_| rng.range(-2.0, 2.0)).collect(), sub.base());
        let ef = infconv_extend(&space, &idx, &f).unwrap();
        for (j, &x) in idx.iter().enumerate() {
            worst_ext = worst_ext.max((ef.get(x) - f.get(j)).abs());
        }
        let (a, b) = (lip_norm(ef.values(), &space), lip_norm(f.values(), &sub));
        worst_norm = worst_norm.max((a - b).abs() / b.max(1.0));
    }
    // points 0, a, x at 0, 1, 2 on a line, F = {0, a}
    let line = PointedMetricSpace::from_point_cloud(vec![vec![0.0], vec![1.0], vec![2.0]], 2.0, 0).unwrap();
    let ef = infconv_extend(&line, &[0, 1], &LipFunction::new(vec![0.0, 1.0], 0)).unwrap();
    let eg = infconv_extend(&line, &[0, 1], &LipFunction::new(vec![0.0, -1.0], 0)).unwrap();
    let esum = infconv_extend(&line, &[0, 1], &LipFunction::zero(2)).unwrap();
    let witness = ef.get(2) + eg.get(2) != esum.get(2);
    r.check(
        "9",
        worst_ext == 0.0 && worst_norm <= EXACT && witness,
        format!(
            "extension exact (max error {worst_ext:.1e}), norm preserved within {worst_norm:.1e} on 200 instances; non-additive at x: E(f)(x) + E(g)(x) = {} but E(f+g)(x) = {}",
            ef.get(2) + eg.get(2),
            esum.get(2)
        ),
    );
}

fn determinism(r: &mut Report) {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let run = |name: &str, timing: bool| -> (bool, String) {
        let path: PathBuf = dir.join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_freelip"));
        cmd.args(["run-suite", "kalton", "--seed", "11", "-o"]).arg(&path);
        if !timing {
            cmd.arg("--no-timing");
        }
        let status = cmd.output().expect("spawn freelip").status;
        (status.success(), std::fs::read_to_string(&path).unwrap_or_default())
    };
    let (ok1, a) = run("a.csv", false);
    let (ok2, b) = run("b.csv", false);
    let (ok3, c) = run("c.csv", true);
    let strip = |s: &str| s.lines().map(|l| l.rsplit_once(',').map_or(l, |p| p.0).to_string()).collect::<Vec<_>>().join("\n");
    let same = ok1 && ok2 && ok3 && !a.is_empty() && a == b && strip(&c) == a.trim_end();
    r.check(
        "10",
        same,
        format!("run-suite kalton --seed 11 twice: {} identical bytes; with timing identical after dropping wall_ms: {}", a.len(), strip(&c) == a.trim_end()),
    );
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut r = Report { lines: Vec::new() };
    duality(&mut r);
    delta_isometry(&mut r);
    kalton(&mut r);
    suite_line(&mut r, "4", Suite::Extfm, "extension split with nearest-point E: norms <= |E| + 1, distortion <= (|E| + 1)^2");
    suite_line(&mut r, "5a", Suite::Union, "pieces glued at the base: sandwich with computed C");
    suite_line(&mut r, "5b", Suite::Godard, "separated pieces: phi <= B, phi_inv <= (B + 1)/A");
    suite_line(&mut r, "5c", Suite::Union2, "union of two: distortion <= C(|E| + 1)^2");
    segments(&mut r);
    quotient_duality(&mut r);
    radial(&mut r);
    infconv(&mut r);
    determinism(&mut r);
    let unexpected: Vec<&Line> = r.lines.iter().filter(|l| l.ok == KNOWN_FAILURES.contains(&l.id.as_str())).collect();
    let failed = r.lines.iter().filter(|l| !l.ok).count();
    println!(
        "acceptance: {} checks, {} passed, {} failed ({} known), {:.1} s",
        r.lines.len(),
        r.lines.len() - failed,
        failed,
        KNOWN_FAILURES.len(),
        secs(start.elapsed())
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        for l in unexpected {
            println!("unexpected outcome for {}: {}", l.id, l.detail);
        }
        ExitCode::FAILURE
    }
}
