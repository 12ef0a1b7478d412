use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use deflact::grid::{load_problem, load_space, problem_manifest, read_grid, save_problem, save_space, write_grid, Grid, Manifest, MANIFEST};
use deflact::linops::NORM_ESTIMATE_ITERS;
use deflact::nonlinear::StepRule;
use deflact::problems::exactness_error;
use deflact::vecops::norm;
use deflact::{
    augmented_regularize, delta_sweep, first_discrepancy_index, make_blur_problem, make_dense_problem,
    make_diagonal_problem, make_nonlinear_toy, nl_augmented_landweber, nl_gradient_descent, norm_estimate,
    prior_solve_vectors, qr_against, recycle_from_solutions, semiconvergence_index, solve, sweep_csv,
    top_eigenvectors, ErrorMetric, ImageKind, KTuple, LinearMap, Linearization, Method, NormalOperator,
    ProblemOperator, RecycleSpace, SolveConfig, SolveResult, SweepPoint, TestProblem, WHatInput,
};

use crate::options::{
    CompareArgs, DataSource, DeltaMode, GenArgs, InspectArgs, Kind, Metric, NoiseArgs, ProblemShape, RecycleArgs,
    RunArgs, SolveArgs, Strategy, SweepArgs, Threshold, What,
};
use crate::{usage, CliError, CliResult};

const EXPERIMENTAL: &str = "warning: nonlinear methods are experimental";

#[derive(Debug, Clone, Copy)]
enum Noise {
    Rel(f64),
    Abs(f64),
}

fn noise_of(n: &NoiseArgs) -> Noise {
    match (n.noise_rel, n.noise_abs) {
        (_, Some(a)) => Noise::Abs(a),
        (Some(r), None) => Noise::Rel(r),
        (None, None) => Noise::Rel(0.01),
    }
}

// Generator parameter errors are the caller's fault.
fn param_err(e: deflact::Error) -> CliError {
    match e {
        deflact::Error::InvalidParameter { .. } => usage(e.to_string()),
        other => other.into(),
    }
}

fn image_of(s: &ProblemShape) -> ImageKind {
    match s.image.as_str() {
        "geometric" => ImageKind::Geometric,
        "starfield" => ImageKind::Starfield { count: s.stars },
        path => ImageKind::File(path.into()),
    }
}

fn validate_shape(s: &ProblemShape) -> CliResult<()> {
    match s.kind {
        Kind::Blur => {
            if let ImageKind::File(path) = image_of(s) {
                if !path.is_file() {
                    return Err(usage(format!("--image: no such file `{}`", path.display())));
                }
            }
        }
        Kind::Diagonal => {
            if s.sv.is_empty() {
                return Err(usage("--sv is required for diagonal problems"));
            }
            if s.x_true.len() != s.sv.len() {
                return Err(usage(format!(
                    "--x-true has {} entries, --sv has {}",
                    s.x_true.len(),
                    s.sv.len()
                )));
            }
        }
        Kind::Dense | Kind::Nonlinear => {}
    }
    Ok(())
}

fn absolute_noise(noise: Noise, gen: impl Fn(f64) -> deflact::Result<TestProblem>) -> deflact::Result<TestProblem> {
    let abs = match noise {
        Noise::Abs(a) => a,
        Noise::Rel(r) => {
            let clean = gen(0.0)?;
            r * clean.y_exact.as_deref().map_or(0.0, norm)
        }
    };
    gen(abs)
}

fn generate(s: &ProblemShape, noise: Noise) -> deflact::Result<TestProblem> {
    match s.kind {
        Kind::Blur => {
            let (rows, cols) = (s.rows.unwrap_or(s.size), s.cols.unwrap_or(s.size));
            let image = image_of(s);
            let rel = match noise {
                Noise::Rel(r) => r,
                Noise::Abs(a) => {
                    let clean = make_blur_problem(rows, cols, s.sigma, &image, 0.0, s.seed)?;
                    let ny = clean.y_exact.as_deref().map_or(0.0, norm);
                    if ny > 0.0 {
                        a / ny
                    } else {
                        0.0
                    }
                }
            };
            make_blur_problem(rows, cols, s.sigma, &image, rel, s.seed)
        }
        Kind::Dense => absolute_noise(noise, |d| make_dense_problem(s.size, s.decay, d, s.seed)),
        Kind::Diagonal => absolute_noise(noise, |d| make_diagonal_problem(&s.sv, &s.x_true, d, s.seed)),
        Kind::Nonlinear => absolute_noise(noise, |d| make_nonlinear_toy(s.size, s.epsilon, d, s.seed)),
    }
}

pub fn gen(a: &GenArgs) -> CliResult<()> {
    validate_shape(&a.shape)?;
    let p = generate(&a.shape, noise_of(&a.noise)).map_err(param_err)?;
    save_problem(&a.out, &p)?;
    print!("{}", problem_manifest(&p).render());
    Ok(())
}

fn load(dir: &Path) -> CliResult<TestProblem> {
    if !dir.join(MANIFEST).is_file() {
        return Err(usage(format!("--problem: `{}` is not a problem directory", dir.display())));
    }
    Ok(load_problem(dir)?)
}

/// The problem operator, or the derivative at `at` for nonlinear problems.
fn linear_view<'a>(p: &'a TestProblem, at: &[f64]) -> CliResult<Box<dyn LinearMap + 'a>> {
    Ok(match &p.op {
        ProblemOperator::Nonlinear(f) => Box::new(Linearization::new(f, at)?),
        other => Box::new(other.as_linear().expect("linear problem")),
    })
}

fn strategy_name(s: Strategy) -> &'static str {
    match s {
        Strategy::PriorSolves => "prior-solves",
        Strategy::Eigen => "eigen",
        Strategy::Files => "files",
    }
}

fn joined(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

pub fn recycle(a: &RecycleArgs) -> CliResult<()> {
    let p = load(&a.problem)?;
    let n = p.op.dim_domain();
    let name = strategy_name(a.strategy);
    let lin = linear_view(&p, &vec![0.0; n])?;
    let mut extra = Manifest::new();
    extra.set("strategy", name);
    extra.set("problem", a.problem.display());

    let (vectors, dropped) = match a.strategy {
        Strategy::PriorSolves => {
            if !matches!(p.op, ProblemOperator::Convolution(_)) {
                return Err(usage("--strategy prior-solves needs a blur problem"));
            }
            if a.sigmas.0.iter().any(|s| *s <= 0.0) {
                return Err(usage("--sigmas must be positive"));
            }
            let data = match a.data {
                DataSource::Noisy => p.y_delta.clone(),
                DataSource::Exact => p
                    .y_exact
                    .clone()
                    .ok_or_else(|| usage("--data exact needs a problem with stored exact data"))?,
            };
            extra.set("sigmas", joined(&a.sigmas.0));
            extra.set("iters", a.iters);
            extra.set("data", if a.data == DataSource::Noisy { "noisy" } else { "exact" });
            let raw = prior_solve_vectors(&p, &data, &a.sigmas.0, a.iters)?;
            let basis = recycle_from_solutions(&raw)?;
            (basis.basis, basis.dropped)
        }
        Strategy::Eigen => {
            if a.count > n {
                return Err(usage(format!("--count {} exceeds the problem dimension {n}", a.count)));
            }
            let pairs = top_eigenvectors(&NormalOperator(&*lin), a.count, a.eigen_iters, a.seed)?;
            if pairs.pruned > 0 {
                log::warn!("pruned {} of {} eigenvectors with large residuals", pairs.pruned, a.count);
            }
            extra.set("count", a.count);
            extra.set("pruned", pairs.pruned);
            extra.set("eigen_iters", a.eigen_iters);
            extra.set("seed", a.seed);
            (pairs.vectors, 0)
        }
        Strategy::Files => {
            let mut vs = Vec::with_capacity(a.files.len());
            for f in &a.files {
                if !f.is_file() {
                    return Err(usage(format!("--file: no such file `{}`", f.display())));
                }
                let g = read_grid(f)?;
                if g.values.len() != n {
                    return Err(usage(format!(
                        "--file {}: {} entries, the problem dimension is {n}",
                        f.display(),
                        g.values.len()
                    )));
                }
                vs.push(g.values);
            }
            extra.set("files", a.files.len());
            if vs.is_empty() {
                (KTuple::empty(n), 0)
            } else {
                let basis = recycle_from_solutions(&vs)?;
                (basis.basis, basis.dropped)
            }
        }
    };
    if dropped > 0 {
        log::warn!("dropped {dropped} linearly dependent vector(s)");
    }
    extra.set("dropped", dropped);
    let rs = if vectors.is_empty() {
        RecycleSpace::empty(n, p.op.dim_range())
    } else {
        qr_against(&*lin, &vectors).map_err(|e| CliError::Runtime(anyhow!("strategy {name}: {e}")))?
    };
    save_space(&a.out, &rs, p.shape, &extra)?;
    println!("strategy={name} k={} dropped={dropped}", rs.k());
    Ok(())
}

fn load_recycle(s: &SolveArgs, p: &TestProblem) -> CliResult<Option<RecycleSpace>> {
    let Some(dir) = &s.recycle else {
        return Ok(None);
    };
    if !dir.join(MANIFEST).is_file() {
        return Err(usage(format!("--recycle: `{}` is not a recycle-space directory", dir.display())));
    }
    let (rs, _) = load_space(dir)?;
    if rs.dim_domain() != p.op.dim_domain() || rs.dim_range() != p.op.dim_range() {
        return Err(usage(format!(
            "--recycle: space maps {} -> {}, the problem maps {} -> {}",
            rs.dim_domain(),
            rs.dim_range(),
            p.op.dim_domain(),
            p.op.dim_range()
        )));
    }
    Ok(Some(rs))
}

fn resolve_delta(s: &SolveArgs, p: &TestProblem) -> CliResult<f64> {
    match (s.delta, s.delta_mode) {
        (None, _) => Ok(p.delta),
        (Some(d), DeltaMode::Absolute) => Ok(d),
        (Some(d), DeltaMode::Relative) => {
            let y = p
                .y_exact
                .as_deref()
                .ok_or_else(|| usage("--delta-mode relative needs a problem with stored exact data"))?;
            Ok(d * norm(y))
        }
    }
}

fn metric_of(m: Metric) -> ErrorMetric {
    match m {
        Metric::Euclidean => ErrorMetric::Euclidean,
        Metric::Energy => ErrorMetric::Energy,
    }
}

fn base_config(s: &SolveArgs, p: &TestProblem, delta: f64) -> SolveConfig {
    let mut cfg = SolveConfig::new(s.tau, delta, s.max_iters).with_error_metric(metric_of(s.error_metric));
    if let Some(x) = &p.x_true {
        cfg = cfg.with_x_true(x.clone());
    }
    cfg
}

fn parse_linear(name: &str) -> CliResult<Method> {
    name.parse::<Method>().map_err(|e| usage(format!("--method: {e}")))
}

#[derive(Debug, Clone, Copy)]
enum RunMethod {
    Linear(Method),
    NlLandweber,
    NlSteepest,
    NlAugLandweber,
}

impl RunMethod {
    fn parse(name: &str) -> CliResult<Self> {
        Ok(match name {
            "nl-landweber" => RunMethod::NlLandweber,
            "nl-sd" | "nl-steepest-descent" => RunMethod::NlSteepest,
            "nl-aug-landweber" => RunMethod::NlAugLandweber,
            other => RunMethod::Linear(parse_linear(other)?),
        })
    }

    fn name(self) -> String {
        match self {
            RunMethod::Linear(m) => m.to_string(),
            RunMethod::NlLandweber => "nl-landweber".into(),
            RunMethod::NlSteepest => "nl-sd".into(),
            RunMethod::NlAugLandweber => "nl-aug-landweber".into(),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(())
}

fn grid_for(p: &TestProblem, x: &[f64]) -> CliResult<Grid> {
    let (rows, cols) = p.shape;
    Ok(if rows * cols == x.len() {
        Grid::new(rows, cols, x.to_vec())?
    } else {
        Grid::column(x.to_vec())
    })
}

fn final_error(res: &SolveResult) -> Option<f64> {
    res.trace.last().and_then(|r| r.error_norm)
}

fn solver_failure(method: &str, e: deflact::Error) -> CliError {
    CliError::Runtime(anyhow!("{method} failed: {e}"))
}

pub fn run(a: &RunArgs) -> CliResult<()> {
    let s = &a.solve;
    let method = RunMethod::parse(&a.method)?;
    let p = load(&s.problem)?;
    let rs = load_recycle(s, &p)?;
    let delta = resolve_delta(s, &p)?;
    let n = p.op.dim_domain();
    let x0 = vec![0.0; n];
    let mut cfg = base_config(s, &p, delta);
    let mut record = Manifest::new();

    let result = match method {
        RunMethod::Linear(m) => {
            let op = p
                .op
                .as_linear()
                .ok_or_else(|| usage(format!("method {m} needs a linear problem; use an nl-* method")))?;
            if rs.is_some() && !m.is_augmented() {
                return Err(usage(format!("--recycle needs an augmented method, got {m}")));
            }
            let op_norm = norm_estimate(op, NORM_ESTIMATE_ITERS, s.seed)?;
            cfg.op_norm = Some(op_norm);
            if m.needs_beta() {
                let beta = s.beta.unwrap_or(1.0 / (op_norm * op_norm));
                cfg.beta = Some(beta);
                record.set("beta", beta);
            }
            if let (true, Some(rs), Threshold::Kappa) = (m.is_augmented(), &rs, s.threshold) {
                let b = rs.bounds(op_norm, delta)?;
                record.set("kappa_u", b.kappa_u);
                cfg.delta = b.kappa_u * delta;
            }
            solve(m, op, rs.as_ref(), &p.y_delta, &x0, &cfg).map_err(|e| solver_failure(&m.to_string(), e))?
        }
        nl => {
            eprintln!("{EXPERIMENTAL}");
            let f = p.op.as_nonlinear();
            let alpha = match a.alpha.or(s.beta) {
                Some(v) => v,
                None => {
                    let d = norm_estimate(&Linearization::new(f.as_ref(), &x0)?, NORM_ESTIMATE_ITERS, s.seed)?;
                    1.0 / (d * d)
                }
            };
            if rs.is_some() && !matches!(nl, RunMethod::NlAugLandweber) {
                return Err(usage(format!("--recycle needs an augmented method, got {}", nl.name())));
            }
            let res = match nl {
                RunMethod::NlLandweber => {
                    record.set("alpha", alpha);
                    nl_gradient_descent(f.as_ref(), &p.y_delta, &x0, StepRule::Fixed(alpha), &cfg)
                }
                RunMethod::NlSteepest => nl_gradient_descent(f.as_ref(), &p.y_delta, &x0, StepRule::Steepest, &cfg),
                _ => {
                    record.set("alpha", alpha);
                    let u = rs.as_ref().map_or_else(|| KTuple::empty(n), |r| r.u().clone());
                    let what = match a.what {
                        What::Projected => WHatInput::Projected,
                        What::Raw => WHatInput::Raw,
                    };
                    record.set("what", if what == WHatInput::Raw { "raw" } else { "projected" });
                    nl_augmented_landweber(f.as_ref(), &u, &p.y_delta, &x0, alpha, what, &cfg)
                }
            };
            res.map_err(|e| solver_failure(&nl.name(), e))?
        }
    };

    ensure_dir(&s.out)?;
    write_file(&s.out.join("trace.csv"), &result.trace.to_csv(Some(result.stop_reason)))?;
    write_grid(&s.out.join("x.rg"), &grid_for(&p, &result.x)?)?;
    let iterations = result.trace.last().map_or(0, |r| r.iter);
    record.set("problem", s.problem.display());
    record.set("method", method.name());
    if let Some(dir) = &s.recycle {
        record.set("recycle", dir.display());
        record.set("k", rs.as_ref().map_or(0, RecycleSpace::k));
    }
    record.set("tau", s.tau);
    record.set("delta", delta);
    record.set("stop_delta", cfg.delta);
    record.set("max_iters", s.max_iters);
    record.set("stop_reason", result.stop_reason);
    record.set("iterations", iterations);
    record.set("final_residual", result.final_residual);
    if let Some(e) = final_error(&result) {
        record.set("final_error", e);
    }
    record.write(&s.out.join("run.txt"))?;
    let mut line = format!(
        "method={} stop={} iterations={iterations} residual={:.6e}",
        method.name(),
        result.stop_reason,
        result.final_residual
    );
    if let Some(e) = final_error(&result) {
        let _ = write!(line, " error={e:.6e}");
    }
    println!("{line}");
    Ok(())
}

fn index_text(i: Option<usize>) -> String {
    i.map_or_else(|| "none".into(), |v| v.to_string())
}

pub fn compare(a: &CompareArgs) -> CliResult<()> {
    let s = &a.solve;
    let base = parse_linear(&a.method)?;
    let aug_method = match base {
        Method::Landweber | Method::SteepestDescent => base.augmented().expect("augmentable"),
        other => return Err(usage(format!("--method: compare needs landweber or sd, got {other}"))),
    };
    let p = load(&s.problem)?;
    let op = p.op.as_linear().ok_or_else(|| usage("compare needs a linear problem"))?;
    let rs = load_recycle(s, &p)?.ok_or_else(|| usage("compare needs --recycle"))?;
    let delta = resolve_delta(s, &p)?;
    let x0 = vec![0.0; op.dim_domain()];
    let op_norm = norm_estimate(op, NORM_ESTIMATE_ITERS, s.seed)?;
    let kappa_u = rs.bounds(op_norm, delta)?.kappa_u;
    let aug_delta = match s.threshold {
        Threshold::Kappa => kappa_u * delta,
        Threshold::Plain => delta,
    };

    // Both runs continue past the discrepancy index to expose semiconvergence.
    let mut cfg = base_config(s, &p, 0.0);
    cfg.op_norm = Some(op_norm);
    if base.needs_beta() {
        cfg.beta = Some(s.beta.unwrap_or(1.0 / (op_norm * op_norm)));
    }
    let plain = solve(base, op, None, &p.y_delta, &x0, &cfg).map_err(|e| solver_failure(&base.to_string(), e))?;
    let aug = solve(aug_method, op, Some(&rs), &p.y_delta, &x0, &cfg)
        .map_err(|e| solver_failure(&aug_method.to_string(), e))?;

    let stop_plain = first_discrepancy_index(&plain.trace, s.tau, delta)?;
    let stop_aug = first_discrepancy_index(&aug.trace, s.tau, aug_delta)?;
    let semi_plain = semiconvergence_index(&plain.trace);
    let semi_aug = semiconvergence_index(&aug.trace);

    let mut csv = String::from("iter,plain_residual,plain_error,aug_residual,aug_error\n");
    let len = plain.trace.len().max(aug.trace.len());
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for i in 0..len {
        let pr = plain.trace.rows().get(i);
        let ar = aug.trace.rows().get(i);
        let _ = writeln!(
            csv,
            "{i},{},{},{},{}",
            cell(pr.map(|r| r.residual_norm)),
            cell(pr.and_then(|r| r.error_norm)),
            cell(ar.map(|r| r.residual_norm)),
            cell(ar.and_then(|r| r.error_norm)),
        );
    }
    ensure_dir(&s.out)?;
    write_file(&s.out.join("compare.csv"), &csv)?;

    let mut summary = Manifest::new();
    summary.set("problem", s.problem.display());
    summary.set("method", base);
    summary.set("k", rs.k());
    summary.set("kappa_u", kappa_u);
    summary.set("delta", delta);
    summary.set("threshold", if s.threshold == Threshold::Kappa { "kappa" } else { "plain" });
    summary.set("plain_stop", index_text(stop_plain));
    summary.set("plain_semiconvergence", index_text(semi_plain));
    summary.set("aug_stop", index_text(stop_aug));
    summary.set("aug_semiconvergence", index_text(semi_aug));
    summary.write(&s.out.join("summary.txt"))?;
    println!(
        "plain {base}: stop={} semiconvergence={} | {aug_method} (k={}, kappa_U={kappa_u:.3e}): stop={} semiconvergence={}",
        index_text(stop_plain),
        index_text(semi_plain),
        rs.k(),
        index_text(stop_aug),
        index_text(semi_aug)
    );
    Ok(())
}

pub fn sweep(a: &SweepArgs) -> CliResult<()> {
    let m = parse_linear(&a.method)?;
    if a.shape.kind == Kind::Nonlinear {
        return Err(usage("sweep supports linear problems only"));
    }
    validate_shape(&a.shape)?;
    let deltas = &a.deltas.0;
    if deltas.iter().any(|d| *d < 0.0) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(usage("--deltas must be nonnegative and strictly decreasing"));
    }
    let rs = match &a.recycle {
        Some(dir) if dir.join(MANIFEST).is_file() => Some(load_space(dir)?.0),
        Some(dir) => return Err(usage(format!("--recycle: `{}` is not a recycle-space directory", dir.display()))),
        None => None,
    };
    match (m.is_augmented(), rs.is_some()) {
        (true, false) => return Err(usage(format!("method {m} needs --recycle"))),
        (false, true) => return Err(usage(format!("--recycle needs an augmented method, got {m}"))),
        _ => {}
    }
    let noise = |d: f64| match a.delta_mode {
        DeltaMode::Absolute => Noise::Abs(d),
        DeltaMode::Relative => Noise::Rel(d),
    };
    let rows = delta_sweep(
        |d| generate(&a.shape, noise(d)),
        |p| {
            let op = p.op.as_linear().expect("linear problem");
            let x0 = vec![0.0; op.dim_domain()];
            let op_norm = norm_estimate(op, NORM_ESTIMATE_ITERS, 0)?;
            let mut cfg = SolveConfig::new(a.tau, p.delta, a.max_iters).with_op_norm(op_norm);
            if m.needs_beta() {
                cfg = cfg.with_beta(a.beta.unwrap_or(1.0 / (op_norm * op_norm)));
            }
            match (&rs, a.threshold) {
                (Some(rs), Threshold::Kappa) => {
                    let out = augmented_regularize(m.plain(), rs, op, &p.y_delta, p.delta, &cfg)?;
                    Ok(SweepPoint {
                        result: out.result,
                        effective_delta: out.inner_delta,
                    })
                }
                (rs, _) => Ok(SweepPoint {
                    result: solve(m, op, rs.as_ref(), &p.y_delta, &x0, &cfg)?,
                    effective_delta: p.delta,
                }),
            }
        },
        deltas,
    )
    .map_err(param_err)?;
    let csv = sweep_csv(&rows);
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    write_file(&a.out, &csv)?;
    print!("{csv}");
    Ok(())
}

pub fn inspect(a: &InspectArgs) -> CliResult<()> {
    if a.path.is_file() {
        let g = read_grid(&a.path)?;
        let min = g.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = g.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!("rows={} cols={} min={min} max={max} norm={}", g.rows, g.cols, norm(&g.values));
        return Ok(());
    }
    let mpath = a.path.join(MANIFEST);
    if !mpath.is_file() {
        return Err(usage(format!(
            "`{}` is neither a grid file nor a directory with {MANIFEST}",
            a.path.display()
        )));
    }
    let m = Manifest::read(&mpath)?;
    if m.get("kind").is_some() {
        let p = load_problem(&a.path)?;
        print!("{}", m.render());
        let mut line = format!(
            "dim_domain={} dim_range={} y_delta_norm={} delta={}",
            p.op.dim_domain(),
            p.op.dim_range(),
            norm(&p.y_delta),
            p.delta
        );
        if let Some(rel) = p.delta_rel() {
            let _ = write!(line, " delta_rel={rel}");
        }
        if let Some(e) = exactness_error(&p) {
            let _ = write!(line, " exactness={e:e}");
        }
        println!("{line}");
    } else if m.get("k").is_some() {
        let (rs, m) = load_space(&a.path)?;
        print!("{}", m.render());
        if let Some(pdir) = &a.problem {
            let p = load(pdir)?;
            if rs.dim_domain() != p.op.dim_domain() || rs.dim_range() != p.op.dim_range() {
                return Err(usage("--problem does not match the recycle space dimensions"));
            }
            let lin = linear_view(&p, &vec![0.0; p.op.dim_domain()])?;
            let op_norm = norm_estimate(&*lin, NORM_ESTIMATE_ITERS, 0)?;
            let b = rs.bounds(op_norm, p.delta)?;
            let consistency = if rs.is_empty() { 0.0 } else { rs.consistency(&*lin)? };
            println!(
                "op_norm={op_norm} consistency={consistency:e} kappa_u={} init_proj_bound={}",
                b.kappa_u, b.init_proj_bound
            );
        }
    } else {
        return Err(usage(format!("{}: unrecognized manifest", mpath.display())));
    }
    Ok(())
}
