use std::time::Instant;

use minami_lab::estimators::{
    estimate_dos_grid, estimate_ids_grid, frac_moment_decay, mc_minami, mc_wegner_levels, pair_trace_identity,
    spacing_experiment, BoundCheck, McConfig, McEstimate,
};
use minami_lab::oracle::oracle_suite;
use minami_lab::suite::{identity_sweep, minor_sum_sweep};
use minami_lab::{ComplexEnergy, Interval, Model, SeedRecord};
use serde_json::{json, Value};

use crate::config::{Experiment, Resolved};
use crate::output::{num, Record};

pub const KREIN_TOLERANCE: f64 = 1e-9;
pub const DET_IDENTITY_TOLERANCE: f64 = 1e-8;
pub const SCHUR_TOLERANCE: f64 = 1e-9;
pub const POSITIVITY_FLOOR: f64 = -1e-12;
pub const MINOR_TOLERANCE: f64 = 1e-9;
pub const PAIR_TRACE_TOLERANCE: f64 = 1e-8;
/// Pair-trace checks run on the configured model only up to this many sites.
pub const PAIR_TRACE_MAX_SITES: usize = 64;
const PAIR_TRACE_REALIZATIONS: usize = 20;
const MINOR_MAX_SIZE: usize = 10;

/// A numerical fault, with the realization or check that raised it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunError(pub String);

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for RunError {}

fn fault(context: &str) -> impl Fn(minami_lab::estimators::EstimatorError) -> RunError + '_ {
    move |e| RunError(format!("{context}: {e}"))
}

struct Ctx<'a> {
    resolved: &'a Resolved,
    config: Value,
    records: Vec<Record>,
    clock: Instant,
}

impl Ctx<'_> {
    fn record(&mut self, label: impl Into<String>) -> Record {
        let mut r = Record::new(
            self.resolved.experiment.kind().as_str(),
            label,
            self.resolved.seed,
            self.config.clone(),
        );
        r.samples = self.resolved.experiment.samples();
        r
    }

    fn push(&mut self, mut r: Record) {
        r.duration_s = self.clock.elapsed().as_secs_f64();
        self.clock = Instant::now();
        self.records.push(r);
    }

    fn mc(&self, model: Model, samples: usize) -> McConfig {
        McConfig::new(model, samples, self.resolved.seed).with_workers(self.resolved.workers)
    }
}

fn estimate_fields(r: &mut Record, e: &McEstimate) {
    r.mean = Some(e.mean);
    r.stderr = Some(e.stderr);
}

fn bound_fields(r: &mut Record, c: &BoundCheck) {
    estimate_fields(r, &c.estimate);
    r.bound = Some(c.bound);
    r.slack = Some(c.slack);
    r.z_score = Some(c.z_score);
    r.verdict = Some(c.verdict.as_str());
}

fn verdict(ok: bool) -> Option<&'static str> {
    Some(if ok { "PASS" } else { "FAIL" })
}

/// Runs the resolved experiment and returns its records in a fixed order.
pub fn run(resolved: &Resolved) -> Result<Vec<Record>, RunError> {
    let config = serde_json::to_value(resolved.echo()).expect("config serializes");
    let mut ctx = Ctx {
        resolved,
        config,
        records: Vec::new(),
        clock: Instant::now(),
    };
    let model = resolved.model.clone();
    match resolved.experiment.clone() {
        Experiment::Minami { samples, z, subsets } => {
            let model = model.expect("validated");
            let rho = model.density().sup_density();
            let cfg = ctx.mc(model, samples);
            let energy = ComplexEnergy::new(z[0], z[1]).map_err(|e| RunError(format!("z: {e}")))?;
            for subset in subsets {
                let label = format!("subset {subset:?}");
                let c = mc_minami(&cfg, energy, &subset).map_err(fault(&label))?;
                let mut r = ctx.record(label);
                bound_fields(&mut r, &c);
                r.metric("n", subset.len())
                    .metric("subset", subset.clone())
                    .metric("z", vec![num(z[0]), num(z[1])])
                    .metric("sup_density", num(rho));
                ctx.push(r);
            }
        }
        Experiment::Wegner {
            samples,
            interval,
            levels,
        } => {
            let model = model.expect("validated");
            let rho = model.density().sup_density();
            let sites = model.lattice().len();
            let cfg = ctx.mc(model, samples);
            let j = Interval::new(interval[0], interval[1]);
            let checks = mc_wegner_levels(&cfg, j, &levels).map_err(fault("wegner"))?;
            for (n, c) in levels.iter().zip(checks) {
                let mut r = ctx.record(format!("n={n}"));
                bound_fields(&mut r, &c);
                r.metric("n", *n)
                    .metric("interval", vec![num(j.lo), num(j.hi)])
                    .metric("sites", sites)
                    .metric("sup_density", num(rho));
                ctx.push(r);
            }
        }
        Experiment::Ids { samples, energies } => {
            let cfg = ctx.mc(model.expect("validated"), samples);
            let ids = estimate_ids_grid(&cfg, &energies).map_err(fault("ids"))?;
            for (e, est) in energies.iter().zip(ids) {
                let mut r = ctx.record(format!("E={e}"));
                estimate_fields(&mut r, &est);
                r.metric("energy", num(*e));
                ctx.push(r);
            }
        }
        Experiment::Dos { samples, energies, h } => {
            let cfg = ctx.mc(model.expect("validated"), samples);
            let dos = estimate_dos_grid(&cfg, &energies, h).map_err(fault("dos"))?;
            for (e, est) in energies.iter().zip(dos) {
                let mut r = ctx.record(format!("E={e}"));
                estimate_fields(&mut r, &est);
                r.metric("energy", num(*e)).metric("h", num(h));
                ctx.push(r);
            }
        }
        Experiment::Spacing {
            samples,
            energy,
            window,
            h,
            sizes,
        } => {
            let model = model.expect("validated");
            let boxes: Vec<Model> = match sizes {
                None => vec![model],
                Some(sizes) => {
                    let mc = resolved.model_config.as_ref().expect("validated");
                    sizes
                        .iter()
                        .map(|&side| mc.build_with_sides(&vec![side; mc.dimension]).expect("validated"))
                        .collect()
                }
            };
            for m in boxes {
                let sides = m.lattice().sides().to_vec();
                let label = format!("sides {sides:?}");
                let stats = spacing_experiment(&ctx.mc(m, samples), energy, window, h).map_err(fault(&label))?;
                let mut r = ctx.record(label);
                let histogram: Vec<Value> = stats
                    .histogram
                    .iter()
                    .map(|b| json!({"count": b.count, "observed": b.observed, "expected": num(b.expected)}))
                    .collect();
                let chi = stats.chi_square.as_ref().map_or(Value::Null, |c| {
                    json!({"statistic": num(c.statistic), "dof": c.dof, "p_value": num(c.p_value)})
                });
                r.metric("sides", sides)
                    .metric("sites", stats.sites)
                    .metric("energy", num(energy))
                    .metric("window", num(window))
                    .metric("h", num(h))
                    .metric("dos", num(stats.dos.mean))
                    .metric("dos_stderr", num(stats.dos.stderr))
                    .metric("gaps", stats.gaps.len())
                    .metric("ks_distance", num(stats.ks_distance))
                    .metric("ks_p_value", num(stats.ks_p_value))
                    .metric("expected_count", num(stats.expected_count))
                    .metric("mean_count", num(stats.mean_count()))
                    .metric("chi_square", chi)
                    .metric("histogram", histogram);
                ctx.push(r);
            }
        }
        Experiment::Fracmoment { samples, energy, eps, s } => {
            let cfg = ctx.mc(model.expect("validated"), samples);
            let fit = frac_moment_decay(&cfg, energy, eps, s).map_err(fault("fracmoment"))?;
            let mut r = ctx.record(format!("E={energy} eps={eps} s={s}"));
            let moments: Vec<Value> = fit
                .distances
                .iter()
                .zip(&fit.moments)
                .map(|(d, m)| json!({"distance": d, "mean": num(m.mean), "stderr": num(m.stderr)}))
                .collect();
            r.metric("energy", num(energy))
                .metric("eps", num(eps))
                .metric("s", num(s))
                .metric("origin", fit.origin)
                .metric("axis", 0)
                .metric("slope", num(fit.slope))
                .metric("intercept", num(fit.intercept))
                .metric("r_squared", num(fit.r_squared))
                .metric("status", fit.status.as_str())
                .metric("moments", moments);
            ctx.push(r);
        }
        Experiment::Identities { triples, draws } => identities(&mut ctx, triples, draws)?,
    }
    Ok(ctx.records)
}

fn identities(ctx: &mut Ctx, triples: usize, draws: usize) -> Result<(), RunError> {
    let seed = ctx.resolved.seed;
    for o in oracle_suite(seed, draws) {
        let mut r = ctx.record(o.check.clone());
        r.verdict = verdict(o.passed);
        r.metric("check", o.check).metric("measured", num(o.measured)).metric("tolerance", num(o.tolerance));
        ctx.push(r);
    }

    let sweep = identity_sweep(seed, triples).map_err(|e| RunError(format!("identity sweep: {e}")))?;
    let positivity = -sweep.negative_positivity.value;
    for (name, worst, tolerance, ok) in [
        ("krein", &sweep.krein, KREIN_TOLERANCE, sweep.krein.value <= KREIN_TOLERANCE),
        (
            "determinant identity",
            &sweep.determinant,
            DET_IDENTITY_TOLERANCE,
            sweep.determinant.value <= DET_IDENTITY_TOLERANCE,
        ),
        ("schur block inverse", &sweep.schur, SCHUR_TOLERANCE, sweep.schur.value <= SCHUR_TOLERANCE),
        (
            "positivity",
            &sweep.negative_positivity,
            POSITIVITY_FLOOR,
            positivity > POSITIVITY_FLOOR,
        ),
    ] {
        let mut r = ctx.record(name);
        r.verdict = verdict(ok && sweep.triples > 0);
        let measured = if name == "positivity" { positivity } else { worst.value };
        r.metric("check", name)
            .metric("triples", sweep.triples)
            .metric("measured", num(measured))
            .metric("tolerance", num(tolerance))
            .metric("worst_case", worst.case.clone());
        ctx.push(r);
    }

    let minors = minor_sum_sweep(seed, draws.max(MINOR_MAX_SIZE), MINOR_MAX_SIZE)
        .map_err(|e| RunError(format!("minor sums: {e}")))?;
    let mut r = ctx.record("minor sums");
    r.verdict = verdict(minors.max_relative <= MINOR_TOLERANCE);
    r.metric("check", "minor sums")
        .metric("comparisons", minors.comparisons)
        .metric("measured", num(minors.max_relative))
        .metric("tolerance", num(MINOR_TOLERANCE))
        .metric("max_scaled", num(minors.max_scaled));
    ctx.push(r);

    if let Some(model) = ctx.resolved.model.clone() {
        let mut r = ctx.record("pair trace");
        r.metric("check", "pair trace");
        if model.lattice().len() <= PAIR_TRACE_MAX_SITES && model.lattice().len() >= 2 {
            let z = ComplexEnergy::new(0.5, 0.1).expect("valid energy");
            let mut worst = 0.0f64;
            for k in 0..PAIR_TRACE_REALIZATIONS {
                let s = model
                    .sample(SeedRecord::new(seed, k as u64))
                    .map_err(|e| RunError(format!("pair trace realization {k}: {e}")))?;
                let res = pair_trace_identity(&s, z).map_err(|e| RunError(format!("pair trace realization {k}: {e}")))?;
                worst = worst.max(res);
            }
            r.verdict = verdict(worst <= PAIR_TRACE_TOLERANCE);
            r.metric("realizations", PAIR_TRACE_REALIZATIONS)
                .metric("measured", num(worst))
                .metric("tolerance", num(PAIR_TRACE_TOLERANCE));
        } else {
            r.metric("skipped", format!("more than {PAIR_TRACE_MAX_SITES} sites"));
        }
        ctx.push(r);
    }
    Ok(())
}
