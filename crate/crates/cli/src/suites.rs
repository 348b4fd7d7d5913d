//! The experiment suites behind `run-suite`. Every instance draws from its
//! own generator `Rng::stream(seed, instance)`, so rows do not depend on
//! scheduling; they are emitted in instance order.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use freelip_core::banach_lab::{
    class_endpoints, estimate_bilip, geometric_radii, merge_radii, random_directions, sum_decomposition_lp, RadialNet, Side,
};
use freelip_core::decomposition::{
    ext_fm_distortion, kalton_check, orthogonal_union_check, random_gluing, random_kalton_instance, random_separated_clusters,
    random_separated_instance, random_star, separated_lower_bound_check, separated_union_decompose, union2_check, KALTON_CONSTANT,
};
use freelip_core::free_norm::{free_norm_dual, free_norm_flow, lip_norm, FreeVector, NormSolver};
use freelip_core::lip_ops::nearest_point_extension;
use freelip_core::numeric::pow2;
use freelip_core::quotient::{quotient_pseudometric, quotient_via_lip, Partition};
use freelip_core::rng::Rng;
use freelip_core::sample;

use crate::config::{Bm4Config, ExperimentConfig};
use crate::report::ReportRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Duality,
    QuotientOracle,
    Kalton,
    Extfm,
    Union,
    Godard,
    Union2,
    Bm4,
    Squeeze,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Duality,
        Suite::QuotientOracle,
        Suite::Kalton,
        Suite::Extfm,
        Suite::Union,
        Suite::Godard,
        Suite::Union2,
        Suite::Bm4,
        Suite::Squeeze,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Duality => "duality",
            Suite::QuotientOracle => "quotient-oracle",
            Suite::Kalton => "kalton",
            Suite::Extfm => "extfm",
            Suite::Union => "union",
            Suite::Godard => "godard",
            Suite::Union2 => "union2",
            Suite::Bm4 => "bm4",
            Suite::Squeeze => "squeeze",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
            format!("unknown suite \"{s}\" (expected one of {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub rows: Vec<ReportRow>,
    /// Rows pass when `slack ≥ −tolerance`.
    pub tolerance: f64,
    pub warnings: Vec<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passes(self.tolerance))
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| !r.passes(self.tolerance))
    }
}

type Checks = Vec<(String, f64, f64)>;

/// Runs `count` instances with ids `first..first + count` in parallel.
fn instances<F>(suite: Suite, seed: u64, first: usize, count: usize, f: F) -> Result<Vec<ReportRow>, String>
where
    F: Fn(&mut Rng) -> freelip_core::Result<Checks> + Sync,
{
    let per: Vec<Result<Vec<ReportRow>, String>> = (first..first + count)
        .into_par_iter()
        .map(|i| {
            let mut rng = Rng::stream(seed, i as u64);
            let start = Instant::now();
            let checks = f(&mut rng).map_err(|e| format!("{suite} instance {i}: {e}"))?;
            let ms = start.elapsed().as_secs_f64() * 1e3;
            Ok(checks.into_iter().map(|(q, m, b)| ReportRow::new(suite.name(), i, q, m, b, ms)).collect())
        })
        .collect();
    let mut rows = Vec::new();
    for r in per {
        rows.extend(r?);
    }
    Ok(rows)
}

fn size_in(rng: &mut Rng, lo: usize, hi: usize) -> usize {
    lo + rng.below(hi.max(lo) - lo + 1)
}

pub fn run_suite(cfg: &ExperimentConfig, suite: Suite) -> Result<SuiteOutcome, String> {
    cfg.validate()?;
    let mut warnings = Vec::new();
    let mut tolerance = cfg.gap_tolerance;
    let counts: usize = match suite {
        Suite::Duality => cfg.duality.instances,
        Suite::QuotientOracle => cfg.quotient_oracle.instances,
        Suite::Kalton => cfg.kalton.instances + cfg.kalton.separated_instances,
        Suite::Extfm => cfg.extfm.instances,
        Suite::Union => cfg.union.instances,
        Suite::Godard => cfg.godard.instances,
        Suite::Union2 => cfg.union2.instances,
        Suite::Bm4 => cfg.bm4.samples,
        Suite::Squeeze => 2,
    };
    if counts == 0 {
        warnings.push(format!("warning: suite {suite} has no instances configured"));
        return Ok(SuiteOutcome { suite, rows: Vec::new(), tolerance, warnings });
    }
    let needs_seed = !(suite == Suite::Squeeze && cfg.bm4.dim == 2);
    let seed = if needs_seed { cfg.require_seed()? } else { cfg.seed.unwrap_or(0) };
    let rows = match suite {
        Suite::Duality => {
            let c = cfg.duality;
            instances(suite, seed, 0, c.instances, |rng| {
                let n = size_in(rng, 2, c.max_n);
                let space = sample::random_space(rng, n);
                let k = size_in(rng, 1, n);
                let mu = sample::random_free_vector(rng, n, k);
                let (dual, _) = free_norm_dual(&mu, &space)?;
                let (flow, _) = free_norm_flow(&mu, &space);
                Ok(vec![("gap".into(), (dual - flow).abs(), 0.0)])
            })?
        }
        Suite::QuotientOracle => {
            let c = cfg.quotient_oracle;
            instances(suite, seed, 0, c.instances, |rng| {
                let n = size_in(rng, 2, c.max_n);
                let space = sample::random_space(rng, n);
                let classes = size_in(rng, 1, n);
                let part = Partition::from_labels(&sample::random_labels(rng, n, classes));
                let pm = quotient_pseudometric(&space, &part);
                let mut gap = 0.0f64;
                for x in 0..n {
                    for y in x + 1..n {
                        gap = gap.max((quotient_via_lip(&space, &part, x, y)? - pm.d(part.class_of(x), part.class_of(y))).abs());
                    }
                }
                Ok(vec![("max_gap".into(), gap, 0.0)])
            })?
        }
        Suite::Kalton => {
            let c = cfg.kalton;
            let mut rows = instances(suite, seed, 0, c.instances, |rng| {
                let n = size_in(rng, 1, c.max_support);
                let (space, mu) = random_kalton_instance(rng, n, c.min_exp, c.max_exp);
                let r = kalton_check(&mu, &space, NormSolver::Flow)?;
                let exact = if r.exact_reconstruction { 0.0 } else { 1.0 };
                Ok(vec![("reconstruction".into(), exact, 0.0), ("ratio".into(), r.ratio, KALTON_CONSTANT)])
            })?;
            rows.extend(instances(suite, seed, c.instances, c.separated_instances, |rng| {
                let parts = size_in(rng, 1, 4);
                let per_part = size_in(rng, 1, 4);
                let (space, parts) = random_separated_instance(rng, parts, per_part);
                let r = separated_lower_bound_check(&parts, &space, NormSolver::Flow)?;
                Ok(vec![("separated".into(), r.constant * r.sum_of_norms, r.norm_of_sum)])
            })?);
            rows
        }
        Suite::Extfm => {
            let c = cfg.extfm;
            instances(suite, seed, 0, c.instances, |rng| {
                let n = size_in(rng, 2, c.max_n);
                let space = sample::random_space(rng, n);
                let k = size_in(rng, 1, n);
                let f = sample::random_subset_with(rng, n, k, space.base());
                let e = nearest_point_extension(&space, &f)?;
                let r = ext_fm_distortion(&e, NormSolver::Flow)?;
                Ok(vec![
                    ("phi".into(), r.phi_norm, r.factor_bound),
                    ("phi_inv".into(), r.phi_inv_norm, r.factor_bound),
                    ("distortion".into(), r.distortion, r.distortion_bound),
                ])
            })?
        }
        Suite::Union => {
            let c = cfg.union;
            instances(suite, seed, 0, c.instances, |rng| {
                let legs = size_in(rng, 2, c.max_legs);
                let (space, pieces) = random_star(rng, legs, 3);
                let tests: Vec<FreeVector> = (0..c.tests_per_instance)
                    .map(|_| sample::random_free_vector(rng, space.len(), 3.min(space.len())))
                    .collect();
                let r = orthogonal_union_check(&space, &pieces, &tests, NormSolver::Flow)?;
                let mut out: Checks = vec![
                    ("concat_norm".into(), r.concat_norm, r.c),
                    ("restrict_norm".into(), r.restrict_norm, 1.0),
                ];
                for (j, &(whole, split, upper)) in r.sandwiches.iter().enumerate() {
                    out.push((format!("lower{j}"), whole, split));
                    out.push((format!("upper{j}"), split, upper));
                }
                Ok(out)
            })?
        }
        Suite::Godard => {
            let c = cfg.godard;
            instances(suite, seed, 0, c.instances, |rng| {
                let clusters = size_in(rng, 2, c.max_clusters);
                let (space, pieces) = random_separated_clusters(rng, clusters, c.max_cluster_size);
                let r = separated_union_decompose(&space, &pieces, None, NormSolver::Flow)?;
                Ok(vec![
                    ("phi".into(), r.max_phi, r.phi_bound),
                    ("phi_inv".into(), r.max_phi_inv, r.phi_inv_bound),
                    ("distortion".into(), r.distortion, r.distortion_bound),
                ])
            })?
        }
        Suite::Union2 => {
            let c = cfg.union2;
            instances(suite, seed, 0, c.instances, |rng| {
                let n = size_in(rng, 3, c.max_n);
                let (space, m, nn) = random_gluing(rng, n);
                let f: Vec<usize> = m.iter().copied().filter(|x| nn.binary_search(x).is_ok()).collect();
                let e = nearest_point_extension(&space, &f)?;
                let r = union2_check(&space, &m, &nn, &e, NormSolver::Flow)?;
                Ok(vec![("distortion".into(), r.distortion, r.bound)])
            })?
        }
        Suite::Bm4 => {
            tolerance = cfg.epsilon;
            bm4_samples(&cfg.bm4, seed)?
                .into_iter()
                .map(|s| ReportRow::new(suite.name(), s.h_id, "2s_star", 2.0 * s.s_star, 4.0 * s.h_lip, s.wall_ms))
                .collect()
        }
        Suite::Squeeze => {
            tolerance = cfg.epsilon;
            let net = build_net(&cfg.bm4, seed, false)?;
            let mut rows = Vec::new();
            for (i, side) in [Side::L, Side::R].into_iter().enumerate() {
                let start = Instant::now();
                let r = estimate_bilip(&net, side, cfg.squeeze.refinement, cfg.epsilon).map_err(|e| format!("squeeze {side}: {e}"))?;
                let ms = start.elapsed().as_secs_f64() * 1e3;
                rows.push(ReportRow::new(suite.name(), i, format!("{side}_forward"), r.forward.value, r.forward_bound, ms));
                rows.push(ReportRow::new(suite.name(), i, format!("{side}_inverse"), r.inverse.value, r.inverse_bound, ms));
            }
            rows
        }
    };
    Ok(SuiteOutcome { suite, rows, tolerance, warnings })
}

/// The radial net described by `cfg`. Planar nets use equally spaced
/// directions; higher dimensions draw them from stream `u64::MAX` of `seed`.
/// Radii are `2^(k·step)` between the two exponents, plus the class
/// endpoints when `align` is set.
pub fn build_net(cfg: &Bm4Config, seed: u64, align: bool) -> Result<RadialNet, String> {
    cfg.validate()?;
    let geo = geometric_radii(cfg.radius_min_exp, cfg.radius_max_exp, cfg.steps()?);
    let radii = if align {
        merge_radii(&[&geo, &class_endpoints(pow2(cfg.radius_min_exp), pow2(cfg.radius_max_exp))])
    } else {
        geo
    };
    let net = if cfg.dim == 2 {
        RadialNet::planar(cfg.directions, radii, cfg.norm_p)
    } else {
        let dirs = random_directions(&mut Rng::stream(seed, u64::MAX), cfg.dim, cfg.directions, cfg.norm_p);
        RadialNet::new(dirs, radii, cfg.norm_p)
    };
    net.map_err(|e| format!("net: {e}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bm4Sample {
    pub h_id: usize,
    pub s_star: f64,
    /// Lipschitz constant of the test function (1 unless it vanished).
    pub h_lip: f64,
    pub components: usize,
    pub wall_ms: f64,
}

/// Splits `samples` random 1-Lipschitz functions on the net as `f + g`
/// and records the optimal `max(‖f‖, ‖g‖)`.
pub fn bm4_samples(cfg: &Bm4Config, seed: u64) -> Result<Vec<Bm4Sample>, String> {
    let net = build_net(cfg, seed, cfg.align_endpoints)?;
    (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = Rng::stream(seed, i as u64);
            let start = Instant::now();
            let mut h = sample::random_lip1(&mut rng, net.space(), cfg.anchors);
            let lip = lip_norm(&h, net.space());
            if lip > 0.0 {
                h.iter_mut().for_each(|v| *v /= lip);
            }
            let d = sum_decomposition_lp(&net, &h).map_err(|e| format!("bm4 h{i}: {e}"))?;
            Ok(Bm4Sample {
                h_id: i,
                s_star: d.s_star,
                h_lip: if lip > 0.0 { 1.0 } else { 0.0 },
                components: d.components,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect()
}
