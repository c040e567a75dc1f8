use std::io::Write;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use cvqkd::protocols::{db_to_variance, eb_to_pm, ChannelParams, EbParams, PmParams, ProtocolKind};
use cvqkd::security::{
    key_rate_asym_channel, key_rate_asym_tol, key_rate_comparison, key_rate_heralding,
    optimize_modulation, optimize_modulation_tol, AttackModel, KeyRateResult, BOUND_TOL,
    DEFAULT_BETA, DEFAULT_V_MAX,
};
use cvqkd::sweeps::{run, SweepSpec, DEFAULT_CONTOUR_POINTS, DEFAULT_D_MAX_KM};
use cvqkd::validation::run_all;
use cvqkd::Execution;
use serde_json::{json, Map, Value};

use crate::args::{AttackArg, Figure, Format, Params, ProtocolArg};
use crate::output::{json_bytes, table_bytes, Row, Table};
use crate::CliError;

const OUTPUT_FLAGS: [&str; 2] = ["format", "out"];

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

fn emit(params: &Params, bytes: &[u8]) -> Result<(), CliError> {
    match &params.out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Runtime(e.to_string())),
    }
}

fn base_metadata(command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("library".into(), json!("cvqkd"));
    m.insert("library_version".into(), json!(env!("CARGO_PKG_VERSION")));
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    m.insert("generated_unix".into(), json!(now));
    m
}

fn protocol_kind(p: ProtocolArg) -> ProtocolKind {
    match p {
        ProtocolArg::Asym => ProtocolKind::AsymmetricMinLeak,
        ProtocolArg::Heralding => ProtocolKind::Heralding,
        ProtocolArg::SqueezedHomodyne => ProtocolKind::SqueezedHomodyne,
        ProtocolArg::CoherentHeterodyne => ProtocolKind::CoherentHeterodyne,
    }
}

fn attack_model(a: AttackArg) -> AttackModel {
    match a {
        AttackArg::Symmetric => AttackModel::SymmetricChannel,
        AttackArg::General => AttackModel::GeneralPhysicalityBound,
        AttackArg::EqualNoise => AttackModel::EqualExcessNoise,
    }
}

/// Exactly one of the prepare-and-measure (`v-sig` with `v-sqz` or `sqz-db`)
/// and entanglement-based (`mu`, `r`) parameterizations.
fn state_params(p: &Params) -> Result<PmParams, CliError> {
    let pm_given = p.v_sig.is_some() || p.v_sqz.is_some() || p.sqz_db.is_some();
    let eb_given = p.mu.is_some() || p.r.is_some();
    match (pm_given, eb_given) {
        (true, true) => usage("give either --v-sig/--v-sqz (or --sqz-db) or --mu/--r, not both"),
        (false, false) => {
            usage("missing state parameters: --v-sig with --v-sqz or --sqz-db, or --mu with --r")
        }
        (true, false) => {
            let v_sqz = match (p.v_sqz, p.sqz_db) {
                (Some(_), Some(_)) => return usage("give either --v-sqz or --sqz-db, not both"),
                (None, None) => return usage("missing --v-sqz (or --sqz-db)"),
                (Some(v), None) => v,
                (None, Some(db)) => {
                    if !db.is_finite() {
                        return usage("--sqz-db must be finite");
                    }
                    db_to_variance(db)
                }
            };
            let Some(v_sig) = p.v_sig else {
                return usage("missing --v-sig");
            };
            Ok(PmParams::new(v_sig, v_sqz)?)
        }
        (false, true) => {
            let (Some(mu), Some(r)) = (p.mu, p.r) else {
                return usage("--mu and --r must be given together");
            };
            Ok(eb_to_pm(EbParams::new(mu, r)?)?)
        }
    }
}

fn either(
    a: Option<f64>,
    b: Option<f64>,
    a_name: &str,
    b_name: &str,
) -> Result<Option<f64>, CliError> {
    match (a, b) {
        (Some(_), Some(_)) => usage(format!("give either --{a_name} or --{b_name}, not both")),
        (x, y) => Ok(x.or(y)),
    }
}

/// Channel from `--T`/`--T-x`, `--xi`/`--xi-x` and optional p-quadrature values.
fn channel(p: &Params) -> Result<ChannelParams, CliError> {
    let Some(t_x) = either(p.t, p.t_x, "T", "T-x")? else {
        return usage("missing --T");
    };
    let xi_x = either(p.xi, p.xi_x, "xi", "xi-x")?.unwrap_or(0.0);
    let t_p = p.t_p.unwrap_or(t_x);
    let xi_p = p.xi_p.unwrap_or(xi_x);
    Ok(ChannelParams::new(t_x, t_p, xi_x, xi_p)?)
}

fn check_unit(name: &str, v: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&v) {
        return usage(format!("--{name} must lie in [0, 1], got {v}"));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<(), CliError> {
    if !(v > 0.0) || !v.is_finite() {
        return usage(format!("--{name} must be finite and > 0, got {v}"));
    }
    Ok(())
}

struct Evaluation {
    protocol: ProtocolKind,
    attack: Option<AttackModel>,
    inputs: Value,
    result: KeyRateResult,
    sifting: Option<f64>,
}

const POINT_FLAGS: [&str; 17] = [
    "protocol", "v-sig", "v-sqz", "sqz-db", "mu", "r", "T", "T-x", "T-p", "xi", "xi-x", "xi-p",
    "beta", "attack", "tol", "format", "out",
];

/// Validates every input, then evaluates the key rate.
fn evaluate(p: &Params, command: &str) -> Result<Evaluation, CliError> {
    let mut allowed: Vec<&str> = POINT_FLAGS.to_vec();
    if command == "rate" {
        allowed.push("sifting");
    }
    p.only(command, &allowed)?;
    let Some(protocol) = p.protocol.map(protocol_kind) else {
        return usage("missing --protocol");
    };
    let beta = p.beta.unwrap_or(DEFAULT_BETA);
    check_unit("beta", beta)?;
    if let Some(s) = p.sifting {
        check_unit("sifting", s)?;
    }
    if let Some(tol) = p.tol {
        check_positive("tol", tol)?;
    }
    let ch = channel(p)?;
    let asymmetric_channel = !ch.is_symmetric();
    if protocol != ProtocolKind::AsymmetricMinLeak {
        if p.attack.is_some() {
            return usage("--attack applies only to --protocol asym");
        }
        if asymmetric_channel {
            return usage("--T-p/--xi-p apply only to --protocol asym");
        }
    }

    let mut inputs = json!({
        "T_x": ch.t_x, "T_p": ch.t_p, "xi_x": ch.xi_x, "xi_p": ch.xi_p, "beta": beta,
    });
    let mut attack = None;
    let result = match protocol {
        ProtocolKind::AsymmetricMinLeak | ProtocolKind::Heralding => {
            let pm = state_params(p)?;
            inputs["v_sig"] = json!(pm.v_sig);
            inputs["v_sqz"] = json!(pm.v_sqz);
            if protocol == ProtocolKind::Heralding {
                key_rate_heralding(pm, ch.t_x, ch.xi_x, beta)?
            } else {
                let model = attack_model(p.attack.unwrap_or(AttackArg::Symmetric));
                attack = Some(model);
                if asymmetric_channel {
                    if model != AttackModel::SymmetricChannel {
                        return usage(
                            "--T-p/--xi-p describe a known channel; use --attack symmetric",
                        );
                    }
                    key_rate_asym_channel(pm, &ch, beta)?
                } else {
                    let tol = p.tol.unwrap_or(BOUND_TOL);
                    key_rate_asym_tol(pm, ch.t_x, ch.xi_x, beta, model, tol)?
                }
            }
        }
        ProtocolKind::SqueezedHomodyne | ProtocolKind::CoherentHeterodyne => {
            if p.v_sig.is_some() || p.v_sqz.is_some() || p.sqz_db.is_some() || p.r.is_some() {
                return usage(
                    "comparison protocols take only --mu (modulation V); omit it to optimize",
                );
            }
            match p.mu {
                Some(v) => {
                    inputs["V"] = json!(v);
                    key_rate_comparison(protocol, v, ch.t_x, ch.xi_x, beta)?
                }
                None => {
                    inputs["V_max"] = json!(DEFAULT_V_MAX);
                    let (_, r) = match p.tol {
                        Some(tol) => optimize_modulation_tol(
                            protocol,
                            ch.t_x,
                            ch.xi_x,
                            beta,
                            DEFAULT_V_MAX,
                            tol,
                        )?,
                        None => {
                            optimize_modulation(protocol, ch.t_x, ch.xi_x, beta, DEFAULT_V_MAX)?
                        }
                    };
                    r
                }
            }
        }
    };
    Ok(Evaluation {
        protocol,
        attack,
        inputs,
        result,
        sifting: p.sifting,
    })
}

fn point_table(command: &str, e: &Evaluation, columns: &[&str], values: Vec<Option<f64>>) -> Table {
    let mut metadata = base_metadata(command);
    metadata.insert("protocol".into(), json!(e.protocol.name()));
    metadata.insert("attack".into(), json!(e.attack.map(|a| a.name())));
    metadata.insert("inputs".into(), e.inputs.clone());
    metadata.insert("diagnostics".into(), json!(e.result.diagnostics));
    metadata.insert("sifting".into(), json!(e.sifting));
    Table {
        metadata,
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows: vec![Row {
            values,
            status: "ok".into(),
        }],
    }
}

pub fn rate(p: Params) -> Result<ExitCode, CliError> {
    let p = p.resolve()?;
    let e = evaluate(&p, "rate")?;
    let r = &e.result;
    let key_rate = r.key_rate * e.sifting.unwrap_or(1.0);
    let table = point_table(
        "rate",
        &e,
        &["i_ab", "chi_eb", "key_rate", "beta", "argmax"],
        vec![
            Some(r.i_ab),
            Some(r.chi_eb),
            Some(key_rate),
            Some(r.beta),
            r.diagnostics.argmax,
        ],
    );
    let bytes = table_bytes(&table, p.format()).map_err(CliError::Runtime)?;
    emit(&p, &bytes)?;
    Ok(ExitCode::SUCCESS)
}

pub fn chi(p: Params) -> Result<ExitCode, CliError> {
    let p = p.resolve()?;
    let e = evaluate(&p, "chi")?;
    let r = &e.result;
    let table = point_table(
        "chi",
        &e,
        &["chi_eb", "argmax"],
        vec![Some(r.chi_eb), r.diagnostics.argmax],
    );
    let bytes = table_bytes(&table, p.format()).map_err(CliError::Runtime)?;
    emit(&p, &bytes)?;
    Ok(ExitCode::SUCCESS)
}

fn set_fixed(spec: &mut SweepSpec, key: &str, value: Option<f64>) {
    if let Some(v) = value {
        spec.fixed.insert(key.to_string(), v);
    }
}

fn sweep_spec(figure: Figure, p: &Params) -> Result<SweepSpec, CliError> {
    let common = ["points", "jobs", "format", "out"];
    let with = |extra: &[&'static str]| -> Vec<&'static str> {
        common.iter().chain(extra).copied().collect()
    };
    let points = p.points;
    if points.is_some_and(|n| n < 2) {
        return usage("--points must be at least 2");
    }
    let spec = match figure {
        Figure::Fig2 => {
            p.only("sweep fig2", &with(&["v-sig", "T", "T-x", "xi", "xi-x"]))?;
            let mut s = SweepSpec::fig2(points.unwrap_or(100));
            set_fixed(&mut s, "v_sig", p.v_sig);
            set_fixed(&mut s, "t_x", either(p.t, p.t_x, "T", "T-x")?);
            set_fixed(&mut s, "xi_x", either(p.xi, p.xi_x, "xi", "xi-x")?);
            s
        }
        Figure::Fig4 => {
            p.only("sweep fig4", &with(&["v-sig", "xi"]))?;
            let n = points.unwrap_or(DEFAULT_CONTOUR_POINTS);
            let mut s = SweepSpec::fig4(p.xi.unwrap_or(0.0), n, n);
            set_fixed(&mut s, "v_sig", p.v_sig);
            s
        }
        Figure::Fig5 => {
            p.only("sweep fig5", &with(&["T", "xi"]))?;
            let n = points.unwrap_or(DEFAULT_CONTOUR_POINTS);
            let mut s = SweepSpec::fig5(n, n);
            set_fixed(&mut s, "t", p.t);
            set_fixed(&mut s, "xi", p.xi);
            s
        }
        Figure::Fig6 => {
            p.only(
                "sweep fig6",
                &with(&["d-max", "loss-db-per-km", "xi", "beta"]),
            )?;
            let d_max = p.d_max.unwrap_or(DEFAULT_D_MAX_KM);
            check_positive("d-max", d_max)?;
            let mut s = SweepSpec::fig6(d_max, points.unwrap_or(201));
            set_fixed(&mut s, "loss_db_per_km", p.loss_db_per_km);
            set_fixed(&mut s, "xi", p.xi);
            set_fixed(&mut s, "beta", p.beta);
            s
        }
    };
    for (name, v) in [("T", p.t), ("T-x", p.t_x), ("beta", p.beta)] {
        if let Some(v) = v {
            check_unit(name, v)?;
        }
    }
    for (name, v) in [
        ("xi", p.xi),
        ("xi-x", p.xi_x),
        ("v-sig", p.v_sig),
        ("loss-db-per-km", p.loss_db_per_km),
    ] {
        if v.is_some_and(|v| !(v >= 0.0) || !v.is_finite()) {
            return usage(format!("--{name} must be finite and >= 0"));
        }
    }
    spec.validate()?;
    Ok(spec)
}

pub fn sweep(figure: Figure, p: Params) -> Result<ExitCode, CliError> {
    let p = p.resolve()?;
    let spec = sweep_spec(figure, &p)?;
    let mut result = match p.jobs {
        Some(0) => return usage("--jobs must be at least 1"),
        Some(1) => run(&spec, Execution::Sequential)?,
        Some(n) => cvqkd::exec::with_jobs(n, || run(&spec, Execution::default()))?,
        None => run(&spec, Execution::default())?,
    };
    result.floor_key_rates();
    let mut table = Table::from(result);
    for (k, v) in base_metadata("sweep") {
        table.metadata.entry(k).or_insert(v);
    }
    let bytes = table_bytes(&table, p.format()).map_err(CliError::Runtime)?;
    emit(&p, &bytes)?;
    Ok(ExitCode::SUCCESS)
}

pub fn validate(p: Params) -> Result<ExitCode, CliError> {
    let p = p.resolve()?;
    p.only("validate", &OUTPUT_FLAGS)?;
    let reports = run_all();
    let all_passed = reports.iter().all(|r| r.passed);
    let bytes = match p.format {
        Some(Format::Json) => json_bytes(&json!({
            "metadata": base_metadata("validate"),
            "passed": all_passed,
            "suites": reports,
        }))
        .map_err(CliError::Runtime)?,
        _ => {
            let mut text = String::new();
            for r in &reports {
                text.push_str(&format!(
                    "{} {:<26} max_deviation={:.3e} tolerance={:.1e} checks={}{}\n",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.max_deviation,
                    r.tolerance,
                    r.checks,
                    r.detail
                        .as_ref()
                        .map(|d| format!(" ({d})"))
                        .unwrap_or_default(),
                ));
            }
            text.into_bytes()
        }
    };
    emit(&p, &bytes)?;
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
