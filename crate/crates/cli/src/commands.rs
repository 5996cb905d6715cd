//! One function per subcommand, each returning the envelope and a CSV table.

use std::path::{Path, PathBuf};

use bb84_probe::distillation::compression_from_frontier;
use bb84_probe::numeric_search::{grid_samples, SampleRow};
use bb84_probe::probe_model::evaluate_coefficients;
use bb84_probe::simulator::{SimulationReport, SweepRow};
use bb84_probe::*;
use serde_json::{json, Value};

use crate::output::{angle_echo, destination, to_json, write_atomic, Cell, OutputEnvelope, Table};
use crate::{AlphaArg, AnglesArg, AttackArgs, Command, Family, Format, Reference, Variable};

type Res<T> = std::result::Result<T, String>;

fn fail(e: Error) -> String {
    e.to_string()
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

struct Output {
    envelope: OutputEnvelope,
    table: Table,
    exit: u8,
}

impl Output {
    fn new(envelope: OutputEnvelope, results: Value, table: Table) -> Self {
        let mut envelope = envelope;
        envelope.results = results;
        Self {
            envelope,
            table,
            exit: 0,
        }
    }
}

pub fn dispatch(command: Command, format: Option<Format>, out: Option<PathBuf>) -> Res<u8> {
    let (name, default_format) = match &command {
        Command::Evaluate { .. } => ("evaluate", Format::Json),
        Command::Optimal { .. } => ("optimal", Format::Json),
        Command::Verify { .. } => ("verify", Format::Json),
        Command::Capacity { .. } => ("capacity", Format::Csv),
        Command::Frontier { .. } => ("frontier", Format::Json),
        Command::Simulate { .. } => ("simulate", Format::Json),
        Command::Possibilities { .. } => ("possibilities", Format::Json),
        Command::Sweep { .. } => ("sweep", Format::Csv),
    };
    let format = format.unwrap_or(default_format);
    let output = match command {
        Command::Evaluate { alpha, angles } => evaluate(&alpha, &angles),
        Command::Optimal { alpha, error_rate } => optimal(&alpha, error_rate),
        Command::Verify {
            alpha,
            error_rate,
            resolution,
            restarts,
            seed,
            tolerance,
            reference,
            penalty,
        } => {
            let reference = match reference {
                Reference::Optimal => ReferenceCurve::Optimal,
                Reference::Csc => ReferenceCurve::Csc,
                Reference::Sec => ReferenceCurve::Sec,
            };
            let geom = SignalGeometry::new(alpha.alpha).map_err(fail)?;
            let config = SearchConfig {
                grid_resolution: resolution,
                random_restarts: restarts,
                seed,
                tolerance,
                reference,
                ..SearchConfig::new(geom, error_rate)
            };
            verify(&config, penalty, format)
        }
        Command::Capacity {
            alpha,
            e_min,
            e_max,
            steps,
        } => capacity(&alpha, e_min, e_max, steps),
        Command::Frontier {
            alpha,
            n,
            errors,
            p_fail,
            leak_fraction,
            no_clamp,
        } => frontier(&alpha, n, errors, p_fail, leak_fraction, no_clamp),
        Command::Simulate { attack } => simulate(&attack),
        Command::Possibilities { alpha, error_rate } => possibilities(&alpha, error_rate),
        Command::Sweep {
            attack,
            variable,
            values,
            from,
            to,
            steps,
        } => sweep_cmd(&attack, variable, values, from, to, steps),
    }?;
    let mut envelope = output.envelope;
    if let Value::Object(map) = &mut envelope.inputs {
        let tag = match format {
            Format::Json => "json",
            Format::Csv => "csv",
        };
        map.insert("format".into(), json!(tag));
    }
    emit(name, format, &envelope, &output.table, out.as_deref())?;
    Ok(output.exit)
}

fn emit(
    name: &str,
    format: Format,
    envelope: &OutputEnvelope,
    table: &Table,
    out: Option<&Path>,
) -> Res<()> {
    let output_dir = std::env::var_os("OUTPUT_DIR")
        .filter(|v| !v.is_empty())
        .map(PathBuf::from);
    let json = to_json(&to_value(envelope));
    let io = |e: std::io::Error| format!("writing output: {e}");
    match format {
        Format::Json => match destination(out, output_dir.as_deref(), &format!("{name}.json")) {
            Some(path) => write_atomic(&path, &json).map_err(io)?,
            None => print!("{json}"),
        },
        Format::Csv => {
            let csv = table.to_csv();
            match destination(out, output_dir.as_deref(), &format!("{name}.csv")) {
                Some(path) => {
                    write_atomic(&path, &csv).map_err(io)?;
                    let mut sidecar = path.into_os_string();
                    sidecar.push(".json");
                    write_atomic(Path::new(&sidecar), &json).map_err(io)?;
                }
                None => print!("{csv}"),
            }
        }
    }
    for warning in &envelope.warnings {
        log::warn!("{warning}");
    }
    Ok(())
}

fn geometry(alpha: &AlphaArg) -> Res<SignalGeometry<f64>> {
    SignalGeometry::new(alpha.alpha).map_err(fail)
}

fn explicit_params(angles: &AnglesArg) -> Res<Option<ProbeParams<f64>>> {
    match (angles.lambda, angles.mu, angles.theta, angles.phi) {
        (Some(l), Some(m), Some(t), Some(f)) => {
            ProbeParams::new(l, m, t, f).map(Some).map_err(fail)
        }
        (None, None, None, None) => Ok(None),
        _ => Err("--lambda, --mu, --theta and --phi must be given together".into()),
    }
}

fn params_echo(p: &ProbeParams<f64>) -> Value {
    json!({
        "lambda": angle_echo(p.lambda),
        "mu": angle_echo(p.mu),
        "theta": angle_echo(p.theta),
        "phi": angle_echo(p.phi),
    })
}

fn evaluate(alpha: &AlphaArg, angles: &AnglesArg) -> Res<Output> {
    let params =
        explicit_params(angles)?.ok_or("evaluate needs --lambda, --mu, --theta and --phi")?;
    let geom = geometry(alpha)?;
    let mut envelope = OutputEnvelope::new(
        "evaluate",
        json!({ "alpha": angle_echo(alpha.alpha), "params": params_echo(&params) }),
    );
    let coeffs = coefficients(&params);
    let probs = detection_probabilities(&coeffs, &geom).map_err(fail)?;
    let eval = evaluate_coefficients(&coeffs, &geom).map_err(fail)?;
    let optimum = match optimal_overlap(eval.error_rate, &geom) {
        Ok(opt) => to_value(&opt),
        Err(e) => {
            envelope
                .warnings
                .push(format!("no optimum comparison: {e}"));
            Value::Null
        }
    };
    let results = json!({
        "E": eval.error_rate,
        "Q": eval.overlap,
        "I": eval.renyi_info,
        "coefficients": coeffs,
        "probabilities": probs,
        "optimum": optimum,
        "csc_branch_Q": csc_branch_overlap(eval.error_rate, &geom),
    });
    let mut table = Table::new("alpha,lambda,mu,theta,phi,a,b,c,d,E,Q,I");
    table.push(
        [
            geom.alpha(),
            params.lambda,
            params.mu,
            params.theta,
            params.phi,
            coeffs.a,
            coeffs.b,
            coeffs.c,
            coeffs.d,
            eval.error_rate,
            eval.overlap,
            eval.renyi_info,
        ]
        .map(Cell::F)
        .into(),
    );
    Ok(Output::new(envelope, results, table))
}

fn family_tag(f: Family) -> FamilyTag {
    match f {
        Family::SetE => FamilyTag::SetE,
        Family::SetH => FamilyTag::SetH,
        Family::SetPhiNeg => FamilyTag::SetPhiNeg,
    }
}

fn optimal(alpha: &AlphaArg, error_rate: f64) -> Res<Output> {
    let geom = geometry(alpha)?;
    let mut envelope = OutputEnvelope::new(
        "optimal",
        json!({ "alpha": angle_echo(alpha.alpha), "error_rate": error_rate }),
    );
    let opt = optimal_overlap(error_rate, &geom).map_err(fail)?;
    let families = optimal_parameter_families(error_rate, &geom).map_err(fail)?;
    let mut listed = Vec::new();
    for family in &families {
        let attack = Attack::Family {
            tag: family.tag,
            error_rate,
        };
        let sample = match attack.resolve(&geom) {
            Ok(r) => json!({
                "params": params_echo(&r.params),
                "frame_alpha": angle_echo(r.frame.alpha()),
                "E": r.error_rate,
            }),
            Err(e) => {
                envelope
                    .warnings
                    .push(format!("{:?}: no sample point: {e}", family.tag));
                Value::Null
            }
        };
        let mut entry = to_value(family);
        entry["sample"] = sample;
        listed.push(entry);
    }
    let results = json!({
        "Q": opt.overlap,
        "I": opt.renyi_bits,
        "branch": opt.branch,
        "max_E": max_error_rate(&geom),
        "families": listed,
    });
    let mut table = Table::new("alpha,E,Q_opt,I_opt");
    table.push(
        [geom.alpha(), error_rate, opt.overlap, opt.renyi_bits]
            .map(Cell::F)
            .into(),
    );
    Ok(Output::new(envelope, results, table))
}

fn verify(config: &SearchConfig, penalty: Option<f64>, format: Format) -> Res<Output> {
    let mut envelope = OutputEnvelope::new(
        "verify",
        json!({
            "alpha": angle_echo(config.geom.alpha()),
            "error_rate": config.target_error_rate,
            "resolution": config.grid_resolution,
            "restarts": config.random_restarts,
            "seed": config.seed,
            "tolerance": config.tolerance,
            "reference": config.reference,
            "penalty": penalty,
        }),
    );
    let report = match penalty {
        Some(weight) => penalty_scan(config, weight),
        None => constrained_scan(config),
    }
    .map_err(fail)?;
    let mut table = Table::new(SampleRow::CSV_HEADER);
    if format == Format::Csv {
        for row in grid_samples(config).map_err(fail)? {
            table.push(
                [
                    row.lambda,
                    row.theta,
                    row.phi,
                    row.mu,
                    row.error_rate,
                    row.overlap,
                ]
                .map(Cell::F)
                .into(),
            );
        }
    }
    let exit = if report.violations > 0 {
        envelope.warnings.push(format!(
            "{} sampled points lie below the reference overlap {}",
            report.violations, report.analytic_q
        ));
        1
    } else {
        0
    };
    let mut output = Output::new(envelope, to_value(&report), table);
    output.exit = exit;
    Ok(output)
}

fn capacity(alpha: &AlphaArg, e_min: f64, e_max: Option<f64>, steps: usize) -> Res<Output> {
    let geom = geometry(alpha)?;
    let e_max = e_max.unwrap_or_else(|| max_error_rate(&geom));
    let envelope = OutputEnvelope::new(
        "capacity",
        json!({
            "alpha": angle_echo(alpha.alpha),
            "e_min": e_min,
            "e_max": e_max,
            "steps": steps,
        }),
    );
    let points = capacity_curve(&geom, e_min, e_max, steps).map_err(fail)?;
    let mut table = Table::new("alpha,E,Q_opt,I_opt,capacity");
    let mut rows = Vec::new();
    for p in &points {
        let opt = optimal_overlap(p.error_rate, &geom).map_err(fail)?;
        table.push(
            [
                geom.alpha(),
                p.error_rate,
                opt.overlap,
                opt.renyi_bits,
                p.capacity,
            ]
            .map(Cell::F)
            .into(),
        );
        rows.push(json!({
            "E": p.error_rate,
            "Q_opt": opt.overlap,
            "I_opt": opt.renyi_bits,
            "capacity": p.capacity,
            "inner_argmax": p.inner_argmax,
        }));
    }
    let zero = distillation::capacity_zero_crossing(&geom).map_err(fail)?;
    let results = json!({ "points": rows, "zero_crossing": zero });
    Ok(Output::new(envelope, results, table))
}

fn q_model(leak_fraction: Option<f64>) -> Res<QModel> {
    match leak_fraction {
        None => Ok(QModel::Zero),
        Some(f) if f.is_finite() && f >= 0.0 => Ok(QModel::BinaryEntropy { f }),
        Some(f) => Err(format!(
            "--leak-fraction {f} must be finite and nonnegative"
        )),
    }
}

fn frontier(
    alpha: &AlphaArg,
    n: u64,
    errors: u64,
    p_fail: f64,
    leak_fraction: Option<f64>,
    no_clamp: bool,
) -> Res<Output> {
    let geom = geometry(alpha)?;
    let model = q_model(leak_fraction)?;
    let mut envelope = OutputEnvelope::new(
        "frontier",
        json!({
            "alpha": angle_echo(alpha.alpha),
            "n": n,
            "errors": errors,
            "p_fail": p_fail,
            "q_model": model,
            "clamp": !no_clamp,
        }),
    );
    let mut config = DistillationConfig::new(n, errors, p_fail).map_err(fail)?;
    config.q_leak = model.leakage(n, errors);
    config.clamp = !no_clamp;
    let result = defense_frontier(&config, &geom).map_err(fail)?;
    let s = compression_from_frontier(&config, &result);
    if result.clamped {
        envelope
            .warnings
            .push("error rates beyond the admissible maximum were clamped".into());
    }
    let final_len = n as i128 - errors as i128 - s as i128;
    if final_len <= 0 {
        envelope.warnings.push("no secret key survives".into());
    }
    let results = json!({
        "xi": result.xi,
        "t_F": result.t_f,
        "argmax_e": result.argmax_e,
        "clamped": result.clamped,
        "q_leak": config.q_leak,
        "s": s,
        "final_key_len": final_len.max(0) as u64,
    });
    let mut table = Table::new("n,e_T,p,xi,t_F,argmax_e,s");
    table.push(vec![
        Cell::U(n),
        Cell::U(errors),
        Cell::F(p_fail),
        Cell::F(result.xi),
        Cell::F(result.t_f),
        Cell::U(result.argmax_e),
        Cell::U(s),
    ]);
    Ok(Output::new(envelope, results, table))
}

fn simulation_config(args: &AttackArgs, default_error_rate: Option<f64>) -> Res<SimulationConfig> {
    let geom = geometry(&args.alpha)?;
    let attack = match explicit_params(&args.angles)? {
        Some(params) => Attack::Explicit { params },
        None => Attack::Family {
            tag: family_tag(args.family.unwrap_or(Family::SetE)),
            error_rate: args
                .error_rate
                .or(default_error_rate)
                .ok_or("a family attack needs --error-rate")?,
        },
    };
    let mut config = SimulationConfig::new(args.n, geom, attack, args.p_fail, args.seed);
    config.q_model = q_model(args.leak_fraction)?;
    config.four_state = args.four_state;
    Ok(config)
}

fn attack_echo(config: &SimulationConfig) -> Value {
    let attack = match config.attack {
        Attack::Explicit { params } => {
            json!({ "kind": "Explicit", "params": params_echo(&params) })
        }
        Attack::Family { tag, error_rate } => {
            json!({ "kind": "Family", "tag": tag, "error_rate": error_rate })
        }
    };
    json!({
        "alpha": angle_echo(config.geom.alpha()),
        "n": config.m,
        "attack": attack,
        "p_fail": config.p,
        "q_model": config.q_model,
        "seed": config.seed,
        "four_state": config.four_state,
    })
}

fn report_row(table: &mut Table, alpha: f64, error_rate: f64, r: &SimulationReport) {
    table.push(vec![
        Cell::F(alpha),
        Cell::F(error_rate),
        Cell::U(r.seed),
        Cell::U(r.m),
        Cell::U(r.n),
        Cell::U(r.e_t),
        Cell::U(r.s),
        Cell::U(r.final_key_len),
        Cell::F(r.empirical_error_rate),
        Cell::F(r.empirical_rate),
        Cell::F(r.analytic_capacity),
    ]);
}

fn report_warnings(warnings: &mut Vec<String>, label: &str, r: &SimulationReport) {
    if r.frontier.clamped {
        warnings.push(format!(
            "{label}error rates beyond the admissible maximum were clamped"
        ));
    }
    if r.final_key_len == 0 {
        warnings.push(format!("{label}no secret key survives"));
    }
}

fn simulate(args: &AttackArgs) -> Res<Output> {
    let config = simulation_config(args, None)?;
    let mut envelope = OutputEnvelope::new("simulate", attack_echo(&config));
    let resolved = config.attack.resolve(&config.geom).map_err(fail)?;
    let report = run(&config).map_err(fail)?;
    report_warnings(&mut envelope.warnings, "", &report);
    let mut table = Table::new(SweepRow::CSV_HEADER);
    report_row(
        &mut table,
        config.geom.alpha(),
        report.analytic_error_rate,
        &report,
    );
    let results = json!({
        "attack": {
            "params": params_echo(&resolved.params),
            "frame_alpha": angle_echo(resolved.frame.alpha()),
            "E": resolved.error_rate,
        },
        "report": report,
    });
    Ok(Output::new(envelope, results, table))
}

fn possibilities(alpha: &AlphaArg, error_rate: f64) -> Res<Output> {
    let geom = geometry(alpha)?;
    let envelope = OutputEnvelope::new(
        "possibilities",
        json!({ "alpha": angle_echo(alpha.alpha), "error_rate": error_rate }),
    );
    let reports = enumerate_possibilities(error_rate, &geom).map_err(fail)?;
    let mut table = Table::new("label,status,Q,lambda,mu,theta,phi,detail");
    for r in &reports {
        let opt = |x: Option<f64>| x.map_or(Cell::S(String::new()), Cell::F);
        let p = r.params;
        table.push(vec![
            Cell::S(r.label.to_string()),
            Cell::S(format!("{:?}", r.status)),
            opt(r.achieved_q),
            opt(p.map(|p| p.lambda)),
            opt(p.map(|p| p.mu)),
            opt(p.map(|p| p.theta)),
            opt(p.map(|p| p.phi)),
            Cell::S(r.detail.clone()),
        ]);
    }
    Ok(Output::new(envelope, to_value(&reports), table))
}

fn sweep_cmd(
    args: &AttackArgs,
    variable: Variable,
    values: Option<Vec<f64>>,
    from: Option<f64>,
    to: Option<f64>,
    steps: usize,
) -> Res<Output> {
    let values = match (values, from, to) {
        (Some(v), None, None) => v,
        (None, Some(a), Some(b)) if steps >= 1 => (0..steps)
            .map(|i| match i {
                0 => a,
                i if i + 1 == steps => b,
                i => a + (b - a) * i as f64 / (steps - 1) as f64,
            })
            .collect(),
        _ => return Err("give either --values or --from, --to and --steps >= 1".into()),
    };
    if values.is_empty() {
        return Err("--values is empty".into());
    }
    let template = simulation_config(args, Some(values[0]))?;
    let variable = match variable {
        Variable::ErrorRate => SweepVariable::ErrorRate,
        Variable::Alpha => SweepVariable::Alpha,
    };
    let mut inputs = attack_echo(&template);
    inputs["variable"] = to_value(&variable);
    inputs["values"] = match variable {
        SweepVariable::Alpha => values.iter().map(|&v| angle_echo(v)).collect(),
        SweepVariable::ErrorRate => to_value(&values),
    };
    let mut envelope = OutputEnvelope::new("sweep", inputs);
    let rows = sweep(&template, variable, &values).map_err(fail)?;
    let mut table = Table::new(SweepRow::CSV_HEADER);
    for (i, row) in rows.iter().enumerate() {
        report_row(&mut table, row.alpha, row.error_rate, &row.report);
        report_warnings(&mut envelope.warnings, &format!("value {i}: "), &row.report);
    }
    Ok(Output::new(envelope, to_value(&rows), table))
}
