use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use mms_core::asymptotics::{
    bbm_limit, interpolation_inequality_report, k_functional, sharpness_trace, stability_test,
    Smoothing, DEFAULT_COUPLING,
};
use mms_core::covering::{greedy_select, Ball, BallCollection, BallMetric};
use mms_core::fields::FieldSpec;
use mms_core::functionals::{
    anisotropic_gradient, anisotropic_weak_functional, bvy_profile, fractional_energy,
    luxemburg_norm, orlicz_fd_seminorm, varexp_fd_seminorm, varexp_weak_functional, ExponentField,
    ScalarField, YoungFunction,
};
use mms_core::nonlocal::{
    apply_nonlocal_p_laplacian, energy_equivalence_report, holder_probe, poincare_check,
    solve_dirichlet, symmetrized_p_laplacian, DirichletProblem, HolderNorms, NonlocalParams,
    SolverOptions,
};
use mms_core::space::{
    build_space, growth_diagnostics, AnisotropyMatrix, MetricMeasureSpace, SpaceConfig,
};
use mms_core::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{
    resolve_space, seeded_field, seeded_space, BallSpec, ExperimentConfig, LoadedConfig,
    SeedSource, SpaceSource, SUBCOMMANDS,
};
use crate::report::{config_hash, Cell, ExperimentReport, Provenance, ReportBuilder, Table};

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    base: &'a Path,
    seeds: SeedSource,
}

fn require<T: Clone>(value: &Option<T>, name: &str) -> Result<T> {
    value
        .clone()
        .ok_or_else(|| Error::Config(format!("missing `{name}`")))
}

impl Ctx<'_> {
    fn build(&self, source: &SpaceSource, k: u64) -> Result<(SpaceConfig, MetricMeasureSpace)> {
        let config = seeded_space(&resolve_space(source, self.base)?, &self.seeds, k)?;
        let space = build_space(&config)?;
        Ok((config, space))
    }

    fn space(&self) -> Result<MetricMeasureSpace> {
        Ok(self.build(&require(&self.cfg.space, "space")?, 0)?.1)
    }

    /// The `spaces` list, or unit-interval grids with sides `grids.n`.
    fn family(&self) -> Result<Vec<MetricMeasureSpace>> {
        match (&self.cfg.spaces, &self.cfg.grids.n) {
            (Some(list), _) => list
                .iter()
                .enumerate()
                .map(|(k, s)| Ok(self.build(s, k as u64)?.1))
                .collect(),
            (None, Some(sides)) => sides
                .iter()
                .map(|&n| build_space(&SpaceConfig::grid_1d(n)))
                .collect(),
            (None, None) => Err(Error::Config("missing `spaces` or `grids.n`".into())),
        }
    }

    fn field_spec(&self) -> Result<FieldSpec> {
        seeded_field(&require(&self.cfg.field, "field")?, &self.seeds, 1000)
    }

    fn field(&self, space: &MetricMeasureSpace) -> Result<ScalarField> {
        self.field_spec()?.evaluate(space)
    }

    fn p(&self) -> Result<f64> {
        require(&self.cfg.params.p, "params.p")
    }

    fn s(&self) -> Result<f64> {
        require(&self.cfg.params.s, "params.s")
    }

    fn nonlocal(&self) -> Result<NonlocalParams> {
        NonlocalParams::new(self.s()?, self.p()?)
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => 4,
        Error::NoBracket(_)
        | Error::GradientCheck { .. }
        | Error::InvariantViolated(_)
        | Error::NonFinite(_) => 3,
        _ => 2,
    }
}

/// Runs one experiment. Nothing is written; see [`ExperimentReport::write`].
pub fn run(
    subcommand: &str,
    loaded: &LoadedConfig,
    seed_override: Option<u64>,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    let cfg = &loaded.config;
    if !SUBCOMMANDS.contains(&subcommand) {
        return Err(Error::Config(format!("unknown subcommand `{subcommand}`")));
    }
    if let Some(named) = &cfg.subcommand {
        if named != subcommand {
            return Err(Error::Config(format!(
                "config is for `{named}`, not `{subcommand}`"
            )));
        }
    }
    let seed = seed_override.or(cfg.seed);
    let ctx = Ctx {
        cfg,
        base: &loaded.base_dir,
        seeds: SeedSource::new(seed),
    };
    let mut out = ReportBuilder::default();
    match subcommand {
        "space-gen" => space_gen(&ctx, &mut out)?,
        "bvy" => bvy(&ctx, &mut out)?,
        "seminorm" => seminorm(&ctx, &mut out)?,
        "orlicz" => orlicz(&ctx, &mut out)?,
        "varexp" => varexp(&ctx, &mut out)?,
        "anisotropic" => anisotropic(&ctx, &mut out)?,
        "covering" => covering(&ctx, &mut out)?,
        "nonlocal-apply" => nonlocal_apply(&ctx, &mut out)?,
        "nonlocal-solve" => nonlocal_solve(&ctx, &mut out)?,
        "poincare" => poincare(&ctx, &mut out)?,
        "equivalence" => equivalence(&ctx, &mut out)?,
        "kfunc" => kfunc(&ctx, &mut out)?,
        "interp" => interp(&ctx, &mut out)?,
        "bbm" => bbm(&ctx, &mut out)?,
        "sharpness" => sharpness(&ctx, &mut out)?,
        "stability" => stability(&ctx, &mut out)?,
        _ => unreachable!("subcommand list checked above"),
    }
    out.check_finite(subcommand)?;

    let mut raw = loaded.raw.clone();
    if let (Some(s), Some(obj)) = (seed, raw.as_object_mut()) {
        obj.insert("seed".into(), s.into());
    }
    Ok(ExperimentReport {
        subcommand: subcommand.to_string(),
        tables: out
            .tables
            .iter()
            .map(|(k, t)| (k.clone(), t.rows.len()))
            .collect(),
        scalars: out.scalars,
        flags: out.flags,
        notes: out.notes,
        provenance: Provenance {
            config_hash: config_hash(&raw),
            library_version: mms_core::VERSION.to_string(),
            seed,
            threads: rayon::current_num_threads(),
            wall_clock_ms: start.elapsed().as_millis() as u64,
        },
        table_data: out.tables,
        files: out.files,
        numerical_failure: out.numerical_failure,
    })
}

fn space_gen(ctx: &Ctx, out: &mut ReportBuilder) -> Result<()> {
    let (config, space) = ctx.build(&require(&ctx.cfg.space, "space")?, 0)?;
    let mut points = Table::new(&["id", "weight", "coords"]);
    for i in 0..space.len() {
        let coords = space
            .coords(i)
            .map(|c| {
                c.iter()
                    .map(|v| format!("{v:?}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .unwrap_or_default();
        points.push(vec![i.into(), space.weight(i).into(), coords.into()]);
    }
    out.table("points", points);
    out.scalar("points", space.len() as f64)
        .scalar("total_mass", space.total_mass())
        .scalar("diameter", space.diameter())
        .scalar("min_distance", space.min_positive_distance());
    if space.len() >= 2 {
        let growth = growth_diagnostics(&space)?;
        out.scalar("doubling", growth.doubling);
        match growth.fitted() {
            Some(fit) => {
                out.scalar("growth_exponent", fit.exponent)
                    .scalar("growth_constant", fit.c_p)
                    .scalar("growth_residual", fit.residual)
                    .flag("growth_bound_holds", fit.bound_holds);
            }
            None => {
                out.flag("growth_fit_degenerate", true);
            }
        }
    }
    let text = serde_json::to_string_pretty(&config).map_err(|e| Error::Config(e.to_string()))?;
    out.files.insert("space.json".into(), text + "\n");
    Ok(())
}

fn bvy(ctx: &Ctx, out: &mut ReportBuilder) -> Result<()> {
    let space = ctx.space()?;
    let f = ctx.field(&space)?;
    let p = ctx.p()?;
    let profile = bvy_profile(&space, &f, p)?;
    let mut t = Table::new(&["ratio", "tail_weight", "lambda_p_weight"]);
    for (r, w) in profile.ratios().iter().zip(profile.tail_weights()) {
        t.push(vec![(*r).into(), (*w).into(), (r.powf(p) * w).into()]);
    }
    out.table("level_sets", t);
    out.scalar("value", profile.sup_power(p)).scalar("p", p);
    if let Some((_, lambda)) = profile.argmax(p) {
        out.scalar("lambda_star", lambda);
    }
    Ok(())
}

fn seminorm(ctx: &Ctx, out: &mut ReportBuilder) -> Result<()> {
    let space = ctx.space()?;
    let f = ctx.field(&space)?;
    let (s, p) = (ctx.s()?, ctx.p()?);
    let energy = fractional_energy(&space, &f, s, p)?;
    out.scalar("energy", energy)
        .scalar("seminorm", energy.powf(1.0 / p));
    Ok(())
}

fn orlicz(ctx: &Ctx, out: &mut ReportBuilder) -> Result<()> {
    let space = ctx.space()?;
    let f = ctx.field(&space)?;
    let phi = YoungFunction::new(require(&ctx.cfg.params.phi, "params.phi")?)?;
    out.scalar("seminorm", orlicz_fd_seminorm(&space, &f, ctx.s()?, &phi)?)
        .scalar("norm", luxemburg_norm(&space, &f, &phi)?)
        .scalar("delta2", phi.delta2());
    Ok(())
}

fn varexp(ctx: &Ctx, out: &mut ReportBuilder) -> Result<()> {
    let space = ctx.space()?;
    let f = ctx.field(&space)?;
    let rule = seeded_field(
        &require(&ctx.cfg.params.exponent, "params.exponent")?,
        &ctx.seeds,
        2000,
    )?;
    let pfield = ExponentField::new(&space, rule.evaluate(&space)?.into_values())?;
    out.scalar("p_minus", pfield.p_minus())
        .scalar("p_plus", pfield.p_plus())
        .scalar("log_holder", pfield.log_holder())
        .scalar(
            "weak",
            varexp_weak_functional(&space, &f, &pfield, ctx.cfg.params.pstar)?,
        );
    if let Some(s) = ctx.cfg.params.s {
        out.scalar("seminorm", varexp_fd_seminorm(&space, &f, s, &pfield)?);
    }
    Ok(())
}

fn anisotropic(ctx: &Ctx, out: &mut ReportBuilder) -> Result<()> {
    let space = ctx.space()?;
    let f = ctx.field(&space)?;
    let a = AnisotropyMatrix::new(&require(&ctx.cfg.params.matrix, "params.matrix")?)?;
    let p = ctx.p()?;
    let n = match ctx.cfg.params.n {
        Some(n) => n,
        None => space.dim().ok_or(Error::MissingCoordinates(
            "anisotropic functional needs coordinates",
        ))?,
    };
    out.scalar("weak", anisotropic_weak_functional(&space, &f, &a, p, n)?)
        .scalar("condition", a.condition())
        .scalar("effective_dimension", n as f64);
    if space.grid().is_some() {
        out.scalar(
            "gradient_energy",
            anisotropic_gradient(&space, &f, &a)?.p_energy(space.weights(), p),
        );
    }
    Ok(())
}

fn covering(ctx: &Ctx, out: &mut ReportBuilder) -> Result<()> {
    let space = ctx.space()?;
    let cov = require(&ctx.cfg.covering, "covering")?;
    let balls = match &cov.balls {
        BallSpec::List { balls } => balls.clone(),
        BallSpec::Random {
            count,
            r_min,
            r_max,
            seed,
        } => {
            if !(0.0 < *r_min && r_min <= r_max && r_max.is_finite()) {
                return Err(Error::Config("random balls need 0 < r_min ≤ r_max".into()));
            }
            let seed = match seed {
                Some(s) => *s,
                None => ctx.seeds.component(3000, "random ball collection")?,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..*count)
                .map(|_| Ball {
                    center: rng.gen_range(0..space.len()),
                    radius: if r_min == r_max {
                        *r_min
                    } else {
                        rng.gen_range(*r_min..*r_max)
                    },
                })
                .collect()
        }
    };
    let bound = cov
        .radius_bound
        .unwrap_or_else(|| balls.iter().map(|b| b.radius).fold(0.0, f64::max));
    let metric = match &cov.anisotropy {
        Some(m) => BallMetric::Anisotropic(AnisotropyMatrix::new(m)?),
        None => BallMetric::Isotropic,
    };
    let collection = BallCollection::new(balls, metric, bound)?;
    let result = greedy_select(&space, &collection)?;
    let disjoint = result.selected_disjoint(&space, &collection);
    let mut t = Table::new(&[
        "ball",
        "center",
        "radius",
        "selected",
        "removed_by",
        "witness_at_3",
    ]);
    let witness: BTreeMap<usize, usize> = result
        .certificate
        .iter()
        .map(|w| (w.ball, w.selected))
        .collect();
    for (b, ball) in collection.balls().iter().enumerate() {
        t.push(vec![
            b.into(),
            ball.center.into(),
            ball.radius.into(),
            (result.removed_by[b] == b).into(),
            result.removed_by[b].into(),
            witness.get(&b).map_or(Cell::Empty, |&s| s.into()),
        ]);
    }
    out.table("balls", t);
    out.scalar("balls", collection.balls().len() as f64)
        .scalar("selected", result.selected.len() as f64)
        .opt_scalar("k_hat", result.k_hat)
        .flag("disjoint", disjoint)
        .flag("contained_at_3", result.contained_at_3)
        .flag("contained_at_5", result.contained_at_5);
    Ok(())
}

fn nonlocal_apply(ctx: &Ctx, out: &mut ReportBuilder) -> Result<()> {
    let space = ctx.space()?;
    let f = ctx.field(&space)?;
    let params = ctx.nonlocal()?;
    let lf = apply_nonlocal_p_laplacian(&space, &f, params)?;
    let sym = symmetrized_p_laplacian(&space, &f, params)?;
    let mut t = Table::new(&["id", "f", "operator", "symmetrized"]);
    for i in 0..space.len() {
        t.push(vec![
            i.into(),
            f.values()[i].into(),
            lf.values()[i].into(),
            sym.values()[i].into(),
        ]);
    }
    out.table("operator", t);
    out.scalar("sup_norm", lf.sup_norm());
    Ok(())
}

fn boundary_points(ctx: &Ctx, space: &MetricMeasureSpace) -> Result<BTreeMap<usize, f64>> {
    let bc = require(&ctx.cfg.boundary, "boundary")?;
    let mut ids = bc.points.clone();
    if bc.grid_faces {
        let grid = space.grid().ok_or(Error::NotAGrid)?;
        ids.extend((0..space.len()).filter(|&i| {
            grid.multi_index(i)
                .iter()
                .any(|&k| k == 0 || k + 1 == grid.side)
        }));
    }
    if let Some(&k) = ids.iter().find(|&&k| k >= space.len()) {
        return Err(Error::Config(format!(
            "boundary point {k} is not in the space"
        )));
    }
    let values = seeded_field(&bc.values, &ctx.seeds, 4000)?.evaluate(space)?;
    Ok(ids.into_iter().map(|k| (k, values.values()[k])).collect())
}

fn nonlocal_solve(ctx: &Ctx, out: &mut ReportBuilder) -> Result<()> {
    let space = ctx.space()?;
    let params = ctx.nonlocal()?;
    let rhs = seeded_field(&require(&ctx.cfg.rhs, "rhs")?, &ctx.seeds, 5000)?.evaluate(&space)?;
    let boundary = boundary_points(ctx, &space)?;
    let defaults = SolverOptions::default();
    let sc = &ctx.cfg.solver;
    let options = SolverOptions {
        max_iter: sc.max_iter.unwrap_or(defaults.max_iter),
        residual_tol: sc.residual_tol.unwrap_or(defaults.residual_tol),
        energy_rtol: sc.energy_rtol.unwrap_or(defaults.energy_rtol),
        check_gradient: sc.check_gradient.unwrap_or(defaults.check_gradient),
        ..defaults
    };
    let problem = DirichletProblem {
        rhs: rhs.clone(),
        boundary: boundary.clone(),
    };
    let report = solve_dirichlet(&space, &problem, params, &options)?;

    let mut sol = Table::new(&["id", "u", "boundary"]);
    for (i, u) in report.solution.values().iter().enumerate() {
        sol.push(vec![
            i.into(),
            (*u).into(),
            boundary.contains_key(&i).into(),
        ]);
    }
    let mut trace = Table::new(&["iteration", "energy", "step"]);
    for (k, e) in report.energy_trace.iter().enumerate() {
        let step = if k == 0 {
            Cell::Empty
        } else {
            report.step_trace[k - 1].into()
        };
        trace.push(vec![k.into(), (*e).into(), step]);
    }
    out.table("solution", sol).table("energy_trace", trace);
    out.scalar("energy", report.energy)
        .scalar("residual", report.residual)
        .scalar("gradient_norm", report.gradient_norm)
        .scalar("iterations", report.iterations as f64)
        .flag("converged", report.converged)
        .flag(
            "energy_monotone",
            report.energy_trace.windows(2).all(|w| w[1] <= w[0]),
        )
        .note(
            "stop_reason",
            serde_json::to_value(report.stop_reason)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
        );
    if let Some(err) = report.gradient_check {
        out.scalar("gradient_check_error", err);
    }
    if !report.converged {
        out.numerical_failure = Some(format!(
            "solver stopped ({:?}) with residual {:e} after {} iterations",
            report.stop_reason, report.residual, report.iterations
        ));
    }

    if let Some(h) = &ctx.cfg.holder {
        let subdomain = match (&h.subdomain, h.margin) {
            (Some(ids), _) => ids.clone(),
            (None, Some(margin)) => (0..space.len())
                .filter(|&i| {
                    !boundary.contains_key(&i)
                        && boundary.keys().all(|&b| space.dist(i, b) >= margin)
                })
                .collect(),
            (None, None) => {
                return Err(Error::Config(
                    "holder probe needs `subdomain` or `margin`".into(),
                ))
            }
        };
        let probe = holder_probe(
            &space,
            &report.solution,
            &subdomain,
            h.alpha,
            HolderNorms {
                p: params.p,
                q: ctx.cfg.params.q.unwrap_or(2.0),
                rhs: Some(&rhs),
            },
        )?;
        out.scalar("holder_seminorm", probe.seminorm)
            .opt_scalar("holder_c_emp", probe.c_emp)
            .scalar("holder_subdomain_points", subdomain.len() as f64);
        let mut osc = Table::new(&["radius", "oscillation", "decay"]);
        for row in &probe.oscillation {
            osc.push(vec![row.radius.into(), row.osc.into(), row.decay.into()]);
        }
        let mut sweep = Table::new(&["alpha", "seminorm"]);
        for (a, v) in &probe.sweep {
            sweep.push(vec![(*a).into(), (*v).into()]);
        }
        out.table("holder_oscillation", osc)
            .table("holder_sweep", sweep);
    }
    Ok(())
}

fn poincare(ctx: &Ctx, out: &mut ReportBuilder) -> Result<()> {
    let space = ctx.space()?;
    let f = ctx.field(&space)?;
    let r = poincare_check(&space, &f, require(&ctx.cfg.ball, "ball")?, ctx.nonlocal()?)?;
    out.scalar("lhs", r.lhs)
        .scalar("rhs_raw", r.rhs_raw)
        .scalar("c0", r.c0)
        .scalar("bound", r.bound)
        .scalar("ball_points", r.members.len() as f64)
        .flag("holds", r.holds);
    Ok(())
}

fn equivalence(ctx: &Ctx, out: &mut ReportBuilder) -> Result<()> {
    let spaces = ctx.family()?;
    let spec = ctx.field_spec()?;
    let r = energy_equivalence_report(&spaces, |s| spec.evaluate(s), ctx.nonlocal()?)?;
    let mut t = Table::new(&["n", "nonlocal", "local", "ratio"]);
    for row in &r.rows {
        t.push(vec![
            row.n.into(),
            row.nonlocal.into(),
            row.local.into(),
            row.ratio.into(),
        ]);
    }
    out.table("equivalence", t);
    out.opt_scalar("spread", r.spread).flag("stable", r.stable);
    Ok(())
}

fn smoothing_cells(s: Smoothing) -> (Cell, Cell) {
    match s {
        Smoothing::Identity => ("identity".into(), Cell::Empty),
        Smoothing::Radius(d) => ("radius".into(), d.into()),
        Smoothing::GlobalMean => ("global-mean".into(), Cell::Empty),
    }
}

fn kfunc(ctx: &Ctx, out: &mut ReportBuilder) -> Result<()> {
    let space = ctx.space()?;
    let f = ctx.field(&space)?;
    let p = &ctx.cfg.params;
    let curve = k_functional(
        &space,
        &f,
        require(&p.s1, "params.s1")?,
        require(&p.p1, "params.p1")?,
        ctx.p()?,
        &require(&ctx.cfg.grids.t, "grids.t")?,
        &require(&ctx.cfg.grids.delta, "grids.delta")?,
    )?;
    let mut t = Table::new(&["t", "k", "smoothing", "delta_star"]);
    for q in &curve.points {
        let (kind, d) = smoothing_cells(q.delta_star);
        t.push(vec![q.t.into(), q.k.into(), kind, d]);
    }
    let mut c = Table::new(&["smoothing", "delta", "x0_term", "x1_term"]);
    for (s, a, b) in &curve.candidates {
        let (kind, d) = smoothing_cells(*s);
        c.push(vec![kind, d, (*a).into(), (*b).into()]);
    }
    out.table("k_curve", t).table("candidates", c);
    out.scalar("x0_norm", curve.x0_norm)
        .scalar("x1_norm", curve.x1_norm)
        .flag("nondecreasing", curve.nondecreasing)
        .flag("concave", curve.concave)
        .flag("endpoint_bounds", curve.endpoint_bounds);
    if !curve.warnings.is_empty() {
        out.note("warnings", curve.warnings.join("; "));
    }
    Ok(())
}

fn interp(ctx: &Ctx, out: &mut ReportBuilder) -> Result<()> {
    let spaces = ctx.family()?;
    let specs = match (&ctx.cfg.fields, &ctx.cfg.field) {
        (Some(list), _) => list.clone(),
        (None, Some(one)) => vec![one.clone()],
        (None, None) => return Err(Error::Config("missing `fields` or `field`".into())),
    };
    let p = &ctx.cfg.params;
    let (s1, p1, theta) = (
        require(&p.s1, "params.s1")?,
        require(&p.p1, "params.p1")?,
        require(&p.theta, "params.theta")?,
    );
    let mut t = Table::new(&["field", "n", "s", "p", "lhs", "rhs_core", "c_emp"]);
    let mut c: Vec<f64> = Vec::new();
    for (k, spec) in specs.iter().enumerate() {
        let spec = seeded_field(spec, &ctx.seeds, 6000 + k as u64)?;
        for space in &spaces {
            let r = interpolation_inequality_report(space, &spec.evaluate(space)?, s1, p1, theta)?;
            c.extend(r.c_emp);
            t.push(vec![
                k.into(),
                space.len().into(),
                r.s.into(),
                r.p.into(),
                r.lhs.into(),
                r.rhs_core.into(),
                r.c_emp.into(),
            ]);
        }
    }
    out.table("interpolation", t);
    let spread = (!c.is_empty()).then(|| {
        c.iter().copied().fold(f64::MIN, f64::max) / c.iter().copied().fold(f64::MAX, f64::min)
    });
    out.opt_scalar("spread", spread)
        .flag("bounded", spread.is_some_and(|s| s <= 4.0));
    if let Some(max) = c.iter().copied().reduce(f64::max) {
        out.scalar("c_emp_max", max);
    }
    Ok(())
}

fn bbm(ctx: &Ctx, out: &mut ReportBuilder) -> Result<()> {
    let spec = ctx.field_spec()?;
    let p = ctx.cfg.params.p.unwrap_or(2.0);
    let (s_grid, spaces) = match (
        &ctx.cfg.grids.s,
        ctx.cfg.spaces.is_some() || ctx.cfg.grids.n.is_some(),
    ) {
        (Some(s), true) => (s.clone(), ctx.family()?),
        (None, false) => (
            DEFAULT_COUPLING.iter().map(|c| c.0).collect(),
            DEFAULT_COUPLING
                .iter()
                .map(|c| build_space(&SpaceConfig::grid_1d(c.1)))
                .collect::<Result<Vec<_>>>()?,
        ),
        _ => {
            return Err(Error::Config(
                "give both `grids.s` and a space family, or neither".into(),
            ))
        }
    };
    let finest = spaces.last().expect("family is nonempty");
    let (integral, provenance) = match ctx.cfg.gradient_integral {
        Some(v) => (v, "supplied in config".to_string()),
        None => {
            let grid = finest.grid().filter(|g| g.dim == 1).ok_or_else(|| {
                Error::Config("`gradient_integral` is required off one-dimensional grids".into())
            })?;
            let (v, how) = spec
                .gradient_integral_1d(p, 0.0, grid.side as f64 * grid.spacing)
                .ok_or_else(|| Error::Config("no gradient integral for this field rule".into()))?;
            (v, how.to_string())
        }
    };
    let sweep = bbm_limit(
        &spaces,
        |s| spec.evaluate(s),
        p,
        &s_grid,
        integral,
        &provenance,
        ctx.cfg.full_table,
    )?;
    let mut t = Table::new(&["s", "n", "value", "rel_error", "diagonal"]);
    for e in &sweep.diagonal {
        t.push(vec![
            e.s.into(),
            e.n.into(),
            e.value.into(),
            e.rel_error.into(),
            true.into(),
        ]);
    }
    for e in sweep.table.iter().filter(|e| !sweep.diagonal.contains(e)) {
        t.push(vec![
            e.s.into(),
            e.n.into(),
            e.value.into(),
            e.rel_error.into(),
            false.into(),
        ]);
    }
    out.table("bbm", t);
    out.scalar("target", sweep.target)
        .scalar("gradient_integral", sweep.gradient_integral)
        .scalar("angular_constant", sweep.angular_constant)
        .scalar("c_hat", sweep.c_hat[sweep.c_hat.len() - 1])
        .scalar("final_rel_error", sweep.final_rel_error)
        .flag("monotone", sweep.monotone)
        .flag("within_10_percent", sweep.within_10_percent)
        .flag("pass", sweep.monotone && sweep.within_10_percent)
        .note("target_provenance", sweep.target_provenance);
    Ok(())
}

fn sharpness(ctx: &Ctx, out: &mut ReportBuilder) -> Result<()> {
    let cfg = require(&ctx.cfg.sharpness, "sharpness")?;
    let deltas = require(&ctx.cfg.grids.delta, "grids.delta")?;
    let p = ctx.p()?;
    if cfg.profiles.is_empty() {
        return Err(Error::Config("`sharpness.profiles` is empty".into()));
    }
    let mut t = Table::new(&["profile", "delta", "n", "e", "s", "ratio", "doubled_ratio"]);
    let mut best = f64::INFINITY;
    let mut homogeneity = 0.0_f64;
    for profile in &cfg.profiles {
        let trace = sharpness_trace(*profile, cfg.x0, &deltas, p, cfg.resolution)?;
        let name = serde_json::to_value(profile)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        for r in &trace.rows {
            t.push(vec![
                name.clone().into(),
                r.delta.into(),
                r.n.into(),
                r.e.into(),
                r.s.into(),
                r.ratio.into(),
                r.doubled_ratio.into(),
            ]);
        }
        out.scalar(format!("c_hat_{name}"), trace.c_hat)
            .flag(format!("converged_{name}"), trace.converged);
        best = best.min(trace.c_hat);
        homogeneity = homogeneity.max(trace.homogeneity_error);
    }
    out.table("sharpness", t);
    out.scalar("c_hat_min", best)
        .scalar("homogeneity_error", homogeneity)
        .flag("homogeneous", homogeneity <= 1e-10);
    Ok(())
}

fn stability(ctx: &Ctx, out: &mut ReportBuilder) -> Result<()> {
    let space = ctx.space()?;
    let f = ctx.field(&space)?;
    let eps = require(&ctx.cfg.grids.eps, "grids.eps")?;
    let mut gs = Vec::new();
    if let Some(list) = &ctx.cfg.fields {
        for (k, spec) in list.iter().enumerate() {
            gs.push(seeded_field(spec, &ctx.seeds, 7000 + k as u64)?.evaluate(&space)?);
        }
    }
    if let Some(rp) = &ctx.cfg.perturbations {
        let seed = match rp.seed {
            Some(s) => s,
            None => ctx.seeds.component(8000, "random perturbations")?,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..rp.count {
            gs.push(ScalarField::new(
                (0..space.len()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )?);
        }
    }
    if gs.is_empty() {
        return Err(Error::Config("missing `fields` or `perturbations`".into()));
    }
    let r = stability_test(&space, &f, &gs, &eps, ctx.p()?)?;
    let mut t = Table::new(&["perturbation", "eps", "energy", "diff"]);
    for row in &r.rows {
        t.push(vec![
            row.perturbation.into(),
            row.eps.into(),
            row.energy.into(),
            row.diff.into(),
        ]);
    }
    let mut per = Table::new(&[
        "perturbation",
        "tail_decreasing",
        "tolerance",
        "final_within_tolerance",
    ]);
    for k in 0..gs.len() {
        per.push(vec![
            k.into(),
            r.tail_decreasing[k].into(),
            r.tolerance[k].into(),
            r.final_within_tolerance[k].into(),
        ]);
    }
    out.table("stability", t).table("stability_checks", per);
    out.scalar("base_energy", r.base_energy)
        .scalar("perturbations", gs.len() as f64)
        .flag("tail_decreasing", r.tail_decreasing.iter().all(|&b| b))
        .flag(
            "within_tolerance",
            r.final_within_tolerance.iter().all(|&b| b),
        )
        .flag("pass", r.all_pass);
    Ok(())
}
