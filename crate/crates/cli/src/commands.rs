//! One function per subcommand, each producing a [`Report`].

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use si2d_core::abel::{self, BranchSpec, PeriodFamily};
use si2d_core::actions::{self, EffectiveWell};
use si2d_core::classify;
use si2d_core::csv::write_table;
use si2d_core::dynamics::{self, System};
use si2d_core::potentials::{self, AngularPotential};
use si2d_core::verify::{self, Check};

use crate::args::{
    AbelArgs, ActionsArgs, AngularArgs, BertrandArgs, BranchArg, ClassifyArgs, Format, OrbitArgs, PeriodsArgs,
    PotentialArgs, Tabulate, VerifyArgs,
};
use crate::CliError;

/// The JSON document printed by every command.
pub struct Report {
    pub command: &'static str,
    pub inputs: Value,
    pub results: Value,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(
        command: &'static str,
        inputs: &impl Serialize,
        results: Value,
        checks: Vec<Check>,
    ) -> Result<Self, CliError> {
        Ok(Self {
            command,
            inputs: serde_json::to_value(inputs)?,
            results,
            checks,
        })
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
            "checks": self.checks.iter().map(|c| json!({
                "id": c.id,
                "pass": c.pass,
                "value": c.value,
                "tolerance": c.tolerance,
            })).collect::<Vec<_>>(),
        })
    }
}

/// What a command hands back: a JSON report or a CSV table.
pub enum Output {
    Json(Report),
    Table {
        header: Vec<&'static str>,
        rows: Vec<Vec<f64>>,
        out: Option<std::path::PathBuf>,
    },
}

fn writer(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_rows(header: &[&str], rows: &[Vec<f64>], out: Option<&Path>) -> io::Result<()> {
    let mut w = writer(out)?;
    write_table(&mut w, header, rows.iter().cloned())?;
    w.flush()
}

fn table(
    command: &'static str,
    inputs: &impl Serialize,
    format: Format,
    header: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
    out: Option<&Path>,
) -> Result<Output, CliError> {
    Ok(match format {
        Format::Csv => Output::Table {
            header,
            rows,
            out: out.map(Path::to_path_buf),
        },
        Format::Json => Output::Json(Report::new(
            command,
            inputs,
            json!({ "columns": header, "rows": rows }),
            Vec::new(),
        )?),
    })
}

fn rel(x: f64, y: f64) -> f64 {
    ((x - y) / y).abs()
}

pub fn periods(args: &PeriodsArgs) -> Result<Output, CliError> {
    let v = args.radial.radial(&args.angular)?;
    let report = actions::isochrony_scan(&v, args.a, &args.e)?;
    let times = args
        .e
        .iter()
        .map(|&e| actions::radial_time_period(&v, args.a, e))
        .collect::<Result<Vec<_>, _>>()?;
    let t_rho: Vec<f64> = report.samples.iter().map(|s| s.1).collect();
    let closed = report.t_closed_form.unwrap_or(f64::NAN);
    let checks = vec![
        Check::below("isochrony_spread", report.relative_spread, 1e-6),
        Check::below("closed_form_agreement", rel(report.t_quadrature, closed), 1e-8),
    ];
    let results = json!({
        "A": args.a,
        "E": args.e,
        "T_rho": t_rho,
        "T_time": times,
        "T_closed_form": closed,
        "relative_spread": report.relative_spread,
    });
    Ok(Output::Json(Report::new("periods", args, results, checks)?))
}

pub fn orbit(args: &OrbitArgs) -> Result<Output, CliError> {
    let sys_args = args.radial.system(&args.angular)?;
    let sys = System::new(&sys_args.radial, &sys_args.angular);
    let s0 = sys.initial_state(args.a, args.e)?;
    let traj = sys.integrate(s0, args.t_max, args.dt)?;
    if let Some(path) = &args.out {
        let mut w = writer(Some(path))?;
        traj.write_csv(&mut w)?;
        w.flush()?;
    }
    let closure = dynamics::orbit_closure(&traj, args.tol);
    let e0 = traj.energies[0];
    let mut checks = vec![
        Check::below("energy_drift", traj.energy_drift, 1e-8 * (1.0 + e0.abs())),
        Check::below("l_drift", traj.l_drift, 1e-8 * (1.0 + args.a.abs())),
    ];
    let frequencies = dynamics::measure_frequencies(&traj).ok();
    if let Some(q) = sys_args.q {
        checks.push(Check::below(
            "closure",
            closure.map_or(f64::INFINITY, |c| c.phase_distance),
            args.tol,
        ));
        if frequencies.is_some() {
            checks.push(Check::below(
                "third_integral",
                dynamics::third_integral_check(&traj, q.num(), q.den())?,
                1e-5,
            ));
        }
    }
    let results = json!({
        "initial_state": s0,
        "samples": traj.states.len(),
        "closure": closure,
        "energy_drift": traj.energy_drift,
        "l_drift": traj.l_drift,
        "omega_r": frequencies.map(|f| f.0),
        "omega_phi": frequencies.map(|f| f.1),
        "q": sys_args.q.map(|q| q.to_string()),
        "trajectory": args.out.as_ref().map(|p| p.display().to_string()),
    });
    Ok(Output::Json(Report::new("orbit", args, results, checks)?))
}

pub fn verify(args: &VerifyArgs) -> Result<Output, CliError> {
    let reports = if args.all || args.criterion.is_empty() {
        if !args.all {
            return Err(CliError::Usage("pass --all or --criterion <ids>".into()));
        }
        verify::run_all()
    } else {
        args.criterion
            .iter()
            .map(|&id| verify::run(id).ok_or_else(|| CliError::Usage(format!("--criterion: no criterion {id}"))))
            .collect::<Result<_, _>>()?
    };
    let mut stderr = io::stderr().lock();
    for r in &reports {
        writeln!(stderr, "{}", r.summary())?;
    }
    let failed: Vec<u8> = reports.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    if !failed.is_empty() {
        let list: Vec<String> = failed.iter().map(u8::to_string).collect();
        writeln!(stderr, "failed criteria: {}", list.join(", "))?;
    }
    let checks = reports
        .iter()
        .flat_map(|r| {
            let prefix = r.id;
            let mut cs: Vec<Check> = r
                .checks
                .iter()
                .cloned()
                .map(|mut c| {
                    c.id = format!("{prefix}.{}", c.id);
                    c
                })
                .collect();
            if r.error.is_some() {
                cs.push(Check::flag(format!("{prefix}.completed"), false));
            }
            cs
        })
        .collect();
    let results = json!({
        "criteria": reports.iter().map(|r| json!({"id": r.id, "name": r.name, "pass": r.pass, "error": r.error})).collect::<Vec<_>>(),
        "failed": failed,
    });
    Ok(Output::Json(Report::new("verify", args, results, checks)?))
}

fn open_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (1..=points)
        .map(|i| lo + (hi - lo) * i as f64 / (points + 1) as f64)
        .collect()
}

pub fn potential(args: &PotentialArgs) -> Result<Output, CliError> {
    if args.points == 0 {
        return Err(CliError::Usage("--points must be positive".into()));
    }
    if !(args.max > 0.0 && args.max.is_finite()) {
        return Err(CliError::Usage("--max must be positive".into()));
    }
    let sys = args.radial.system(&args.angular)?;
    let (header, rows) = match args.what {
        Tabulate::Radial => {
            let limit = sys.radial.curvature.chart_limit().min(args.max);
            let rows = open_grid(0.0, limit, args.points)
                .into_iter()
                .map(|r| Ok(vec![r, sys.radial.eval_radial(r)?]))
                .collect::<Result<Vec<_>, CliError>>()?;
            (vec!["r", "V"], rows)
        }
        Tabulate::Angular => {
            let ((lo, hi), _) = sys.angular.domain();
            let rows = open_grid(lo, hi, args.points)
                .into_iter()
                .map(|phi| Ok(vec![phi, sys.angular.eval(phi)?]))
                .collect::<Result<Vec<_>, CliError>>()?;
            (vec!["phi", "U"], rows)
        }
        Tabulate::Effective => {
            let a = args
                .a
                .ok_or_else(|| CliError::Usage("--A is required for the effective potential".into()))?;
            let well = EffectiveWell {
                profile: &sys.radial.family,
                a,
                k: sys.radial.curvature,
            };
            let (lo, hi) = well.domain();
            let lo = if lo.is_finite() { lo } else { -args.max };
            let hi = if hi.is_finite() { hi } else { args.max };
            if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
                return Err(CliError::Usage(format!(
                    "--max = {} lies below the rho domain start {lo}",
                    args.max
                )));
            }
            let rows = open_grid(lo, hi, args.points)
                .into_iter()
                .map(|rho| {
                    Ok(vec![
                        rho,
                        potentials::effective_potential_checked(&sys.radial.family, a, sys.radial.curvature, rho)?,
                    ])
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            (vec!["rho", "W"], rows)
        }
    };
    table("potential", args, args.format, header, rows, args.out.as_deref())
}

pub fn actions(args: &ActionsArgs) -> Result<Output, CliError> {
    let sys = args.radial.system(&args.angular)?;
    let j_phi = actions::angular_action(&sys.angular, args.a)?;
    let t_phi = actions::angular_period(&sys.angular, args.a)?;
    let closed = sys
        .q
        .map(|q| actions::closed_form_angular_action(&sys.radial.family, args.a, q))
        .transpose()?;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for &e in &args.e {
        let j_r = actions::radial_action(&sys.radial, args.a, e)?;
        let t_rho = actions::radial_period(&sys.radial, args.a, e)?;
        if let Some(q) = sys.q {
            checks.push(Check::below(
                format!("period_ratio.E{e}"),
                rel(t_rho / t_phi, q.to_f64()),
                1e-7,
            ));
        }
        rows.push(json!({ "E": e, "J_r": j_r, "T_rho": t_rho }));
    }
    let results = json!({
        "A": args.a,
        "J_phi": j_phi,
        "T_phi": t_phi,
        "J_phi_closed_form": closed,
        "J_phi_minus_closed_form": closed.map(|c| j_phi - c),
        "q": sys.q.map(|q| q.to_string()),
        "radial": rows,
    });
    Ok(Output::Json(Report::new("actions", args, results, checks)?))
}

pub fn abel(args: &AbelArgs) -> Result<Output, CliError> {
    if args.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let sys = args.radial.system(&args.angular)?;
    let q = sys
        .q
        .ok_or_else(|| CliError::Usage("--q is required without a preset".into()))?;
    let family = PeriodFamily::from(&sys.radial.family);
    let pt = match sys.angular {
        AngularPotential::PoschlTeller { alpha, beta, n } => Some((alpha, beta, n)),
        _ => None,
    };
    let u0 = match (args.u0, pt) {
        (Some(u0), _) => u0,
        (None, Some(_)) => sys.angular.minimum().1,
        (None, None) => return Err(CliError::Usage("--U0 is required without a Poschl-Teller well".into())),
    };
    let branch = match (args.branch, pt) {
        (Some(BranchArg::Constant), _) | (None, None) => BranchSpec::Constant(
            args.g
                .ok_or_else(|| CliError::Usage("--G is required for a constant branch".into()))?,
        ),
        (Some(BranchArg::Ttw), Some((alpha, beta, n))) | (None, Some((alpha, beta, n))) => {
            BranchSpec::Ttw { alpha, beta, n }
        }
        (Some(BranchArg::Ttw), None) => {
            return Err(CliError::Usage(
                "--branch ttw needs a Poschl-Teller well (--alpha, --beta, --n)".into(),
            ))
        }
    };
    let grid = abel::default_u_grid(u0, args.points);
    let rec = abel::reconstruct_angular(&family, q, u0, &branch, &grid)?;
    let rows: Vec<Vec<f64>> = rec.well.points().map(|(p, u)| vec![p, u]).collect();
    table("abel", args, args.format, vec!["phi", "U"], rows, args.out.as_deref())
}

pub fn classify(args: &ClassifyArgs) -> Result<Output, CliError> {
    let sys = args.radial.system(&args.angular)?;
    let verdict = classify::superintegrability_report(&sys.radial, &sys.angular, &args.a, &args.e)?;
    let mut checks = Vec::new();
    if args.radial.preset.is_some() {
        checks.push(Check::flag("q_matches_preset", verdict.q_estimate == sys.q));
    }
    Ok(Output::Json(Report::new(
        "classify",
        args,
        serde_json::to_value(&verdict)?,
        checks,
    )?))
}

pub fn bertrand(args: &BertrandArgs) -> Result<Output, CliError> {
    let family = match args.radial.preset_name()? {
        Some(_) => args.radial.radial(&AngularArgs::default())?.family,
        None => args.radial.family()?,
    };
    let report = classify::bertrand_report(&family, args.radial.curvature()?, args.a, args.e, args.tol, args.dt)?;
    let mut checks = Vec::new();
    if report.central_q.is_some() {
        checks.push(Check::flag("q_verdict", report.verdict.q_estimate == report.central_q));
        checks.push(Check::below(
            "closure",
            report.closure.map_or(f64::INFINITY, |c| c.phase_distance),
            args.tol,
        ));
        let timing = match (report.closure, report.t_expected) {
            (Some(c), Some(t)) => rel(c.t_close, t),
            _ => f64::INFINITY,
        };
        checks.push(Check::below("closure_time", timing, 1e-6));
    }
    let results = json!({
        "central_q": report.central_q.map(|q| q.to_string()),
        "verdict": report.verdict,
        "t_expected": report.t_expected,
        "closure": report.closure,
        "energy_drift": report.energy_drift,
    });
    Ok(Output::Json(Report::new("bertrand", args, results, checks)?))
}
