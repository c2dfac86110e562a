use anyhow::{bail, Result};
use rand::seq::SliceRandom;
use serde_json::{json, Value as Json};

use distdp::audit::*;
use distdp::distributed::fixtures::{ChainRelay, Forwarding, LonelyRelay, SecureSum};
use distdp::distributed::{
    classify, gaussian_aggregator_sum, message_count, randomized_response_distributed, round_count, run_protocol, DistAlphaProtocol,
    GaussianAggregator, NoiseCalibration, Protocol, StarRandomizedResponse, Topology,
};
use distdp::domain::{dist_alpha, dist_alpha_gridded, sum, GapParams};
use distdp::local::{
    gapk_to_gap0, output_distribution, randomized_response_sum, CuratorView, rr_estimate, rr_estimate_std, rr_sanitizers, sum_to_gap, GapProtocol,
    RandomizedResponse, SanitizerSpec, SumProtocol,
};
use distdp::mechanisms::{flip_bias_for, sample_laplace, LaplaceParams};
use distdp::montecarlo::{run_trials, try_run_trials};
use distdp::rng::{derive_seed, seeded};
use distdp::stats::{chi_squared_two_sample, histogram, mean, std_dev, variance};
use distdp::{BitVector, Symbol};

use crate::config::{field, Defaults, Params};
use crate::output::Rows;

pub struct Experiment {
    pub name: &'static str,
    /// The result the experiment reproduces.
    pub anchor: &'static str,
    pub description: &'static str,
    /// Acceptance criteria exercised.
    pub criteria: &'static str,
    pub defaults: Defaults,
    pub run: fn(&Params) -> Result<Rows>,
}

const D: Defaults = Defaults {
    n: 10_000,
    eps: 1.0,
    delta: 0.01,
    t: 1,
    rounds: 1,
    d: None,
    trials: 1_000,
};

pub const REGISTRY: &[Experiment] = &[
    Experiment {
        name: "rr-sum-error",
        anchor: "randomized-response SUM",
        description: "per-trial |estimate - sum| of non-interactive randomized response",
        criteria: "C1",
        defaults: D,
        run: rr_sum_error,
    },
    Experiment {
        name: "exact-epsilon",
        anchor: "randomized-response privacy",
        description: "exact privacy loss of the randomized-response and Laplace sanitizers",
        criteria: "C2",
        defaults: Defaults { trials: 1, ..D },
        run: exact_eps,
    },
    Experiment {
        name: "laplace-tail",
        anchor: "Laplace tail bound",
        description: "empirical Pr[|Lap(1/eps)| > k/eps] against e^-k",
        criteria: "C3",
        defaults: Defaults { trials: 10_000, ..D },
        run: laplace_tail,
    },
    Experiment {
        name: "likelihood-bounds",
        anchor: "per-party log-ratio bounds",
        description: "log-likelihood ratios of randomized-response views under the sparse input distribution",
        criteria: "C4 C5",
        defaults: Defaults { d: Some(4.0), ..D },
        run: likelihood_bounds,
    },
    Experiment {
        name: "hoeffding-tail",
        anchor: "Hoeffding ratio tail",
        description: "frequency of r(view) > e^(nu/d) against exp(-(nu-32)^2/32d)",
        criteria: "C6",
        defaults: Defaults { d: Some(4.0), ..D },
        run: hoeffding_tail,
    },
    Experiment {
        name: "chernoff-tail",
        anchor: "Chernoff weight tail",
        description: "frequency of sum(x) <= a*n/2 under the sparse input distribution",
        criteria: "C7",
        defaults: Defaults { d: Some(4.0), ..D },
        run: chernoff_tail,
    },
    Experiment {
        name: "phase-transition",
        anchor: "local GAP lower bound",
        description: "distinguisher error of randomized-response GAP across tau in {0.1,0.3,1,3,10}*sqrt(n)/eps",
        criteria: "C8",
        defaults: D,
        run: phase_transition,
    },
    Experiment {
        name: "compile-to-local",
        anchor: "distributed to local transformation",
        description: "exact output equality of 3-party fixtures and their local compilation",
        criteria: "C9",
        defaults: Defaults { trials: 1, ..D },
        run: compile_to_local_exp,
    },
    Experiment {
        name: "lonely-count",
        anchor: "lonely parties in sparse topologies",
        description: "lonely parties in random topologies with n(t+1)/4 channels",
        criteria: "C10",
        defaults: Defaults { n: 64, trials: 100, ..D },
        run: lonely_count,
    },
    Experiment {
        name: "mult-lemma",
        anchor: "transcript probability factorization",
        description: "transcript probabilities against the product of per-party consistency probabilities",
        criteria: "C11",
        defaults: Defaults { trials: 1, ..D },
        run: mult_lemma,
    },
    Experiment {
        name: "dist-alpha",
        anchor: "DIST_alpha protocol",
        description: "secret-shared window minimum: error against the exact minimum",
        criteria: "C12",
        defaults: Defaults { n: 4096, trials: 100, ..D },
        run: dist_alpha_exp,
    },
    Experiment {
        name: "gaussian-aggregator",
        anchor: "Gaussian-noise sum with t-coalitions",
        description: "noise variance and tail of the aggregated Gaussian-noise SUM",
        criteria: "C13",
        defaults: Defaults { trials: 1_000, ..D },
        run: gaussian_aggregator,
    },
    Experiment {
        name: "symmetry",
        anchor: "symmetric randomized functions",
        description: "output distribution of randomized response under input permutations",
        criteria: "C14",
        defaults: Defaults { n: 100, trials: 10_000, ..D },
        run: symmetry,
    },
    Experiment {
        name: "definition-equivalence",
        anchor: "local-model privacy definitions",
        description: "collective vs per-party privacy loss on small finite protocols",
        criteria: "C15",
        defaults: Defaults { n: 4, trials: 1, ..D },
        run: definition_equivalence,
    },
    Experiment {
        name: "message-accounting",
        anchor: "message complexity",
        description: "message counts of the distributed protocols against their closed forms",
        criteria: "C12 C13",
        defaults: Defaults { n: 256, t: 7, trials: 1, ..D },
        run: message_accounting,
    },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name)
}

fn with(p: &Params, extra: Json) -> String {
    let mut v = serde_json::to_value(p).expect("parameters serialize");
    if let (Json::Object(map), Json::Object(more)) = (&mut v, extra) {
        map.extend(more);
    }
    v.to_string()
}

fn rows(p: &Params) -> Rows {
    Rows::new(with(p, json!({})))
}

fn sum_input(n: usize) -> BitVector {
    BitVector::from_fn(n, |i| i % 3 == 0)
}

fn rr_sum_error(p: &Params) -> Result<Rows> {
    let rr = field("eps", RandomizedResponse::new(p.eps))?;
    let x = sum_input(p.n);
    let truth = sum(&x) as f64;
    let estimates = try_run_trials(p.seed, p.trials, |_, rng| rr.estimate(&x, rng))?;
    let mut out = rows(p);
    for (k, &e) in estimates.iter().enumerate() {
        out.trial(k, "abs_error", (e - truth).abs());
    }
    let errors: Vec<f64> = estimates.iter().map(|e| (e - truth).abs()).collect();
    out.all("mean_abs_error", mean(&errors));
    if estimates.len() > 1 {
        out.all("std_estimate", std_dev(&estimates));
    }
    out.all("predicted_std", rr_estimate_std(p.n, rr.flip));
    Ok(out)
}

fn exact_eps(p: &Params) -> Result<Rows> {
    let flip = field("eps", flip_bias_for(p.eps))?;
    let mut out = rows(p);
    out.all("flip_bias", flip.flip_bias);
    out.all("exact_epsilon", exact_epsilon(&SanitizerSpec::flip(0, flip)));
    out.all("ln_one_plus_eps", (1.0 + p.eps).ln());
    let lap = field("eps", LaplaceParams::new(1.0 / p.eps))?;
    out.all("laplace_exact_epsilon", exact_epsilon(&SanitizerSpec::laplace(0, lap)));
    Ok(out)
}

fn laplace_tail(p: &Params) -> Result<Rows> {
    let lap = field("eps", LaplaceParams::new(1.0 / p.eps))?;
    let draws = run_trials(p.seed, p.trials, |_, rng| sample_laplace(lap, rng).abs());
    let mut out = rows(p);
    for (k, &y) in draws.iter().enumerate() {
        out.trial(k, "abs_noise", y);
    }
    for k in 1..=3 {
        let rate = draws.iter().filter(|&&y| y > k as f64 / p.eps).count() as f64 / draws.len() as f64;
        out.all(&format!("tail_rate_k{k}"), rate);
        out.all(&format!("tail_bound_k{k}"), (-(k as f64)).exp());
    }
    Ok(out)
}

fn rr_sampler(p: &Params) -> Result<(DistributionAParams, HomogeneousViewSampler)> {
    let a = field("d", DistributionAParams::new(p.n, p.eps, p.d))?;
    let flip = field("eps", flip_bias_for(p.eps))?;
    let sampler = HomogeneousViewSampler::new(&SanitizerSpec::flip(0, flip), a)?;
    Ok((a, sampler))
}

fn likelihood_bounds(p: &Params) -> Result<Rows> {
    let (a, sampler) = rr_sampler(p)?;
    let views = run_trials(p.seed, p.trials, |_, rng| sampler.sample(rng));
    let mut stats = VStatistics::default();
    let mut out = rows(p);
    for (k, v) in views.iter().enumerate() {
        stats.push_summary(*v);
        out.trial(k, "sum_v", v.total_log);
        out.trial(k, "max_abs_v", v.max_abs_log);
    }
    out.all("mean_sum_v", stats.mean_total());
    if views.len() > 1 {
        out.all("se_sum_v", stats.se_total());
    }
    out.all("exact_mean_sum_v", p.n as f64 * sampler.expected_v());
    out.all("sum_bound", a.v_sum_bound());
    out.all("max_abs_v", stats.max_abs());
    out.all("hard_bound", a.v_hard_bound());
    Ok(out)
}

fn hoeffding_tail(p: &Params) -> Result<Rows> {
    let (_, sampler) = rr_sampler(p)?;
    let logs: Vec<f64> = run_trials(p.seed, p.trials, |_, rng| sampler.sample(rng).total_log);
    let check = field("nu", hoeffding_tail_check(&logs, p.nu, p.d))?;
    let mut out = rows(p);
    for (k, &v) in logs.iter().enumerate() {
        out.trial(k, "ln_ratio", v);
    }
    out.all("threshold", p.nu / p.d);
    out.all("tail_rate", check.empirical);
    out.all("bound", check.bound);
    out.all("bound_std_error", check.std_error);
    out.all("pass", check.pass);
    Ok(out)
}

fn chernoff_tail(p: &Params) -> Result<Rows> {
    let a = field("d", DistributionAParams::new(p.n, p.eps, p.d))?;
    let weights = run_trials(p.seed, p.trials, |_, rng| sample_a_weight(a, rng));
    let check = chernoff_tail_check(&weights, a, 0.5)?;
    let mut out = rows(p);
    for (k, &w) in weights.iter().enumerate() {
        out.trial(k, "weight", w);
    }
    out.all("threshold", 0.5 * a.expected_sum());
    out.all("tail_rate", check.empirical);
    out.all("bound", check.bound);
    out.all("bound_std_error", check.std_error);
    out.all("pass", check.pass);
    Ok(out)
}

fn distinguish<G: GapProtocol>(g: &G, a: DistributionAParams, tau: f64, trials: usize, seed: u64) -> Result<DistinguisherReport> {
    Ok(distinguisher_experiment(g, a, tau, trials, seed)?)
}

fn phase_transition(p: &Params) -> Result<Rows> {
    let rr = field("eps", RandomizedResponse::new(p.eps))?;
    let root = (p.n as f64).sqrt() / p.eps;
    let taus: Vec<(Option<f64>, f64)> = match p.tau {
        Some(tau) => vec![(None, tau)],
        None => [0.1, 0.3, 1.0, 3.0, 10.0].into_iter().map(|s| (Some(s), s * root)).collect(),
    };
    let mut out = rows(p);
    for (i, (scale, tau)) in taus.into_iter().enumerate() {
        let tau_int = tau.round().max(1.0) as usize;
        let params = field("tau", GapParams::new(p.kappa, tau_int))?;
        let seed = derive_seed(p.seed, i as u64);
        let report = if p.kappa == 0 {
            let a = field("d", DistributionAParams::new(p.n, p.eps, p.d))?;
            distinguish(&sum_to_gap(rr, params), a, tau, p.trials, seed)?
        } else {
            if p.n % 2 != 0 {
                bail!("invalid value for `n`: the kappa reduction needs an even party count, got {}", p.n);
            }
            let g = field("kappa", gapk_to_gap0(sum_to_gap(rr, params), p.n))?;
            let a = field("d", DistributionAParams::new(p.n / 2, p.eps, p.d))?;
            distinguish(&g, a, tau, p.trials, seed)?
        };
        let json = with(p, json!({ "tau": tau, "tau_scale": scale }));
        out.all_with(json.clone(), "error_case_i", report.error_case_i);
        out.all_with(json.clone(), "error_case_ii", report.error_case_ii);
        out.all_with(json.clone(), "total_error", report.total_error());
        out.all_with(json, "promise_violations", report.promise_violations);
    }
    Ok(out)
}

fn three_party_fixtures(eps: f64) -> Result<Vec<(&'static str, Box<dyn Protocol>)>> {
    let flip = field("eps", flip_bias_for(eps))?;
    Ok(vec![
        ("chain-relay", Box::new(ChainRelay { flip })),
        ("secure-sum-mod4", Box::new(SecureSum::new(3, 4)?)),
        ("star-randomized-response", Box::new(field("eps", StarRandomizedResponse::new(3, eps))?)),
    ])
}

fn compile_to_local_exp(p: &Params) -> Result<Rows> {
    let mut out = rows(p);
    for (name, proto) in three_party_fixtures(p.eps)? {
        let c = compile_check(proto.as_ref())?;
        let json = with(p, json!({ "fixture": name }));
        out.all_with(json.clone(), "max_probability_gap", c.max_gap);
        out.all_with(json.clone(), "inputs", c.inputs);
        out.all_with(json.clone(), "original_rounds", c.original_rounds);
        out.all_with(json, "compiled_rounds", c.compiled_rounds);
    }
    Ok(out)
}

fn lonely_count(p: &Params) -> Result<Rows> {
    if p.t >= p.n {
        bail!("invalid value for `t`: must be below n = {}", p.n);
    }
    let channels = p.n * (p.t + 1) / 4;
    let counts = try_run_trials(p.seed, p.trials, |_, rng| -> Result<usize> {
        let topo = field("n", Topology::random(p.n, channels, rng))?;
        Ok(classify(&topo, p.t)?.lonely.len())
    })?;
    let mut out = rows(p);
    for (k, &c) in counts.iter().enumerate() {
        out.trial(k, "lonely_parties", c);
    }
    out.all("channels", channels);
    out.all("min_lonely_parties", counts.iter().copied().min().unwrap_or(0));
    out.all("half_n", p.n / 2);
    Ok(out)
}

fn mult_lemma(p: &Params) -> Result<Rows> {
    let flip = field("eps", flip_bias_for(p.eps))?;
    let fixtures: Vec<(&str, Box<dyn Protocol>)> = vec![
        ("forwarding", Box::new(Forwarding { flip: Some(flip) })),
        ("chain-relay", Box::new(ChainRelay { flip })),
        ("lonely-relay", Box::new(LonelyRelay { flip })),
        ("star-randomized-response-3", Box::new(field("eps", StarRandomizedResponse::new(3, p.eps))?)),
        ("star-randomized-response-4", Box::new(field("eps", StarRandomizedResponse::new(4, p.eps))?)),
        ("secure-sum-mod4", Box::new(SecureSum::new(3, 4)?)),
    ];
    let mut out = rows(p);
    for (name, proto) in fixtures {
        let f = factorization_check(proto.as_ref())?;
        let json = with(p, json!({ "fixture": name }));
        out.all_with(json.clone(), "max_factorization_error", f.max_error);
        out.all_with(json, "transcripts", f.transcripts);
    }
    Ok(out)
}

const ALPHA_EXP: f64 = 0.75;

fn dist_alpha_params(p: &Params) -> Result<DistAlphaProtocol> {
    if 2 * p.t >= p.n {
        bail!("invalid value for `t`: need 2t < n, got t = {} and n = {}", p.t, p.n);
    }
    field("n", DistAlphaProtocol::new(p.n, p.eps, p.delta, p.t, ALPHA_EXP))
}

fn dist_alpha_exp(p: &Params) -> Result<Rows> {
    let proto = dist_alpha_params(p)?;
    let x = BitVector::from_fn(p.n, |i| (i * 7919) % 5 == 0);
    let truth = dist_alpha(&x, proto.window)? as f64;
    let grid = dist_alpha_gridded(&x, proto.window, proto.interval)? as f64;
    let scale = (p.n as f64).powf(1.0 - ALPHA_EXP);
    let bound = scale * (1.0 + 6.0 * (2.0 * proto.noise_scale()).sqrt() / scale);
    let topo = proto.channels();
    let estimates = try_run_trials(p.seed, p.trials, |_, rng| -> Result<f64> {
        let e = run_protocol(&proto, &topo, &x, rng)?;
        Ok(e.output.as_real().expect("window minimum is real"))
    })?;
    let quiet = proto.with_calibration(NoiseCalibration::Disabled);
    let e0 = run_protocol(&quiet, &quiet.channels(), &x, &mut seeded(derive_seed(p.seed, 1)))?;
    let mut out = rows(p);
    for (k, &v) in estimates.iter().enumerate() {
        out.trial(k, "abs_error", (v - truth).abs());
    }
    out.all("window", proto.window);
    out.all("interval", proto.interval);
    out.all("true_minimum", truth);
    out.all("gridded_minimum", grid);
    out.all("zero_noise_output", e0.output.as_real().expect("window minimum is real"));
    out.all("error_bound", bound);
    let within = estimates.iter().filter(|&&v| (v - truth).abs() <= bound).count() as f64 / estimates.len() as f64;
    out.all("within_bound_rate", within);
    out.all("message_count", message_count(&e0));
    Ok(out)
}

fn gaussian_aggregator(p: &Params) -> Result<Rows> {
    let agg = field("n", GaussianAggregator::new(p.n, p.eps))?;
    let x = sum_input(p.n);
    let truth = sum(&x) as f64;
    let errors = try_run_trials(p.seed, p.trials, |_, rng| -> Result<f64> { Ok(gaussian_aggregator_sum(&x, p.eps, rng)?.0 - truth) })?;
    let ln = (p.n as f64).ln();
    let threshold = 6.0 * ln / p.eps;
    let mut out = rows(p);
    for (k, &e) in errors.iter().enumerate() {
        out.trial(k, "error", e);
    }
    if errors.len() > 1 {
        out.all("noise_variance", variance(&errors));
    }
    out.all("target_variance", agg.total_noise_variance());
    out.all("coalition_residual_variance", agg.residual_noise_variance(agg.coalition_bound));
    out.all("tail_threshold", threshold);
    out.all(
        "tail_rate",
        errors.iter().filter(|e| e.abs() > threshold).count() as f64 / errors.len() as f64,
    );
    Ok(out)
}

fn symmetry(p: &Params) -> Result<Rows> {
    let flip = field("eps", flip_bias_for(p.eps))?;
    let small = rr_sanitizers(4, flip);
    let curator = |c: &[i64]| rr_estimate(c.iter().filter(|&&s| s == 1).count(), 4, flip).to_bits();
    let mut exact_gap: f64 = 0.0;
    let mut perm = vec![0, 1, 2, 3];
    let mut perms = Vec::new();
    permutations(&mut perm, 0, &mut perms);
    for x in BitVector::all(4) {
        let base = output_distribution(&small, &x, curator)?;
        for perm in &perms {
            let other = output_distribution(&small, &x.permuted(perm)?, curator)?;
            for k in base.keys().chain(other.keys()) {
                exact_gap = exact_gap.max((base.get(k).copied().unwrap_or(0.0) - other.get(k).copied().unwrap_or(0.0)).abs());
            }
        }
    }

    let x = BitVector::from_fn(p.n, |i| i < p.n * 3 / 10);
    let mut order: Vec<usize> = (0..p.n).collect();
    order.shuffle(&mut seeded(derive_seed(p.seed, 0)));
    let y = x.permuted(&order)?;
    let ones = |view: &CuratorView<Symbol>| view.messages.iter().filter(|e| e.symbol == Symbol::Int(1)).count() as i64;
    let a = try_run_trials(derive_seed(p.seed, 1), p.trials, |_, rng| -> Result<i64> { Ok(ones(&randomized_response_sum(&x, p.eps, rng)?.1)) })?;
    let b = try_run_trials(derive_seed(p.seed, 2), p.trials, |_, rng| -> Result<i64> { Ok(ones(&randomized_response_sum(&y, p.eps, rng)?.1)) })?;
    let mut out = rows(p);
    for (k, (&ka, &kb)) in a.iter().zip(&b).enumerate() {
        out.trial(k, "ones_original", ka as u64);
        out.trial(k, "ones_permuted", kb as u64);
    }
    out.all("exact_n4_max_gap", exact_gap);
    // pool the sparse tails into the end cells
    let alpha = flip.flip_bias;
    let centre = (0.5 - alpha) * p.n as f64 + 2.0 * alpha * sum(&x) as f64;
    let spread = 3.0 * (p.n as f64 * (0.25 - alpha * alpha)).sqrt();
    let (lo, hi) = ((centre - spread).floor().max(0.0) as i64, (centre + spread).ceil().min(p.n as f64) as i64);
    match chi_squared_two_sample(&histogram(a, lo, hi), &histogram(b, lo, hi)) {
        Ok(t) => {
            out.all("chi_squared", t.statistic);
            out.all("dof", t.dof);
            out.all("p_value", t.p_value);
        }
        Err(e) => bail!("chi-squared test failed: {e}"),
    }
    Ok(out)
}

fn permutations(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, out);
        v.swap(k, i);
    }
}

fn definition_equivalence(p: &Params) -> Result<Rows> {
    if p.n > 4 {
        bail!("invalid value for `n`: exhaustive check supports at most 4 parties, got {}", p.n);
    }
    let flip = field("eps", flip_bias_for(p.eps))?;
    let three = |i| SanitizerSpec::table(i, vec![-1, 0, 1], vec![0.5, 0.3, 0.2], vec![0.2, 0.3, 0.5]);
    let fixtures: Vec<(&str, Vec<SanitizerSpec>)> = vec![
        ("randomized-response", rr_sanitizers(p.n, flip)),
        (
            "mixed-tables",
            (0..p.n)
                .map(|i| if i % 2 == 0 { three(i) } else { Ok(SanitizerSpec::flip(i, flip)) })
                .collect::<distdp::Result<_>>()?,
        ),
        (
            "one-constant",
            (0..p.n).map(|i| if i == 0 { SanitizerSpec::constant(i, 0) } else { SanitizerSpec::flip(i, flip) }).collect(),
        ),
    ];
    let mut out = rows(p);
    for (name, sanitizers) in fixtures {
        let r = definition_equivalence_check(&sanitizers)?;
        let json = with(p, json!({ "fixture": name }));
        out.all_with(json.clone(), "collective_epsilon", r.collective);
        out.all_with(json.clone(), "individual_epsilon", r.individual);
        out.all_with(json, "equal", r.pass);
    }
    Ok(out)
}

fn message_accounting(p: &Params) -> Result<Rows> {
    let proto = dist_alpha_params(p)?;
    let x = BitVector::zeros(p.n);
    let mut rng = seeded(p.seed);
    let e = run_protocol(&proto, &proto.channels(), &x, &mut rng)?;
    let mut out = rows(p);
    let (n, t, intervals) = (p.n, p.t, proto.intervals());
    out.all("dist_alpha_message_count", message_count(&e));
    out.all("dist_alpha_closed_form", (t + 1) * (n - 1) + t * intervals + (n - 1));
    out.all("dist_alpha_rounds", round_count(&e));
    let star = randomized_response_distributed(&x, p.eps, &mut rng)?;
    out.all("star_rr_message_count", message_count(&star));
    out.all("star_rr_closed_form", 2 * (n - 1));
    let (_, agg) = gaussian_aggregator_sum(&x, p.eps, &mut rng)?;
    out.all("gaussian_aggregator_message_count", message_count(&agg));
    out.all("gaussian_aggregator_closed_form", 2 * (n - 1));
    Ok(out)
}
