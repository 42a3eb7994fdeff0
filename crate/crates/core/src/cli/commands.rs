use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use rayon::prelude::*;
use serde_json::Value;

use super::config::{DatumConfig, Route, RunConfig};
use super::json::{self, float, fmt_float, object};
use super::table::{read_csv, Table};
use super::{CommandKind, Format};
use crate::bounds::{gradient_rearrangement_bound, marcinkiewicz_bound_curve, solution_rearrangement_bound, BoundCurve};
use crate::criteria::{
    embedding_condition, gradient_norm_condition, lorentz_gradient_condition, solution_norm_condition, wellposedness,
    wellposedness_via_lambda, CriterionReport, Verdict,
};
use crate::domains::{catalog, lambda_iso, nu_p, DomainSpec, Family, IsocapFn, NuModel, Profile};
use crate::error::Error;
use crate::numerics::log_space;
use crate::rearrange::{RearrangedDatum, Rearrangement, Sign};
use crate::solver::{
    datum_rearrangement, named_datum, project_compatible, sample_levels, solve_weighted_neumann, verify_bound,
    verify_coarea, verify_flux_inequality, verify_isocap_levelset, BoundMode, CheckReport, Datum, SolverGrid,
};

/// Result of one command: the main document, its listing, extra CSV
/// artifacts and the exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: CommandKind,
    pub json: Value,
    pub table: Table,
    /// Additional `(name, table)` pairs written as `<name>.csv`.
    pub extra: Vec<(String, Table)>,
    pub exit_code: i32,
    /// Lines for stderr.
    pub messages: Vec<String>,
}

impl Outcome {
    fn new(command: CommandKind, json: Value, table: Table) -> Self {
        Outcome {
            command,
            json,
            table,
            extra: Vec::new(),
            exit_code: 0,
            messages: Vec::new(),
        }
    }

    pub fn render(&self, format: Format) -> anyhow::Result<String> {
        Ok(match format {
            Format::Json => json::to_string(&self.json),
            Format::Csv => self.table.to_csv()?,
            Format::Table => {
                let mut s = self.table.to_text();
                for (name, t) in &self.extra {
                    s.push_str(&format!("\n{name}\n"));
                    s.push_str(&t.to_text());
                }
                s
            }
        })
    }

    /// Writes `<command>.json`, `<command>.csv` and the extra tables into `dir`.
    pub fn write_artifacts(&self, dir: &Path) -> anyhow::Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let stem = self.command.as_str();
        let write = |name: String, text: String| {
            let path = dir.join(name);
            fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
        };
        write(format!("{stem}.json"), json::to_string(&self.json))?;
        write(format!("{stem}.csv"), self.table.to_csv()?)?;
        for (name, t) in &self.extra {
            write(format!("{name}.csv"), t.to_csv()?)?;
        }
        Ok(())
    }
}

pub fn run_config(cmd: CommandKind, c: &RunConfig, threads: Option<usize>) -> anyhow::Result<Outcome> {
    c.validate(cmd)?;
    match cmd {
        CommandKind::Catalog => Ok(catalog_cmd()),
        CommandKind::Analyze => analyze(c),
        CommandKind::Bound => bound(c),
        CommandKind::Verify => verify(c),
        CommandKind::Sweep => match threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("cannot start the worker pool")?
                .install(|| sweep(c)),
            None => sweep(c),
        },
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

fn catalog_cmd() -> Outcome {
    let entries = catalog();
    let mut t = Table::new(["family", "parameters", "validity", "nu_p", "lambda", "exactness"]);
    let mut docs = Vec::new();
    for e in &entries {
        t.push(
            [e.family, e.parameters, e.validity, e.nu_p, e.lambda, e.exactness]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        );
        docs.push(object([
            ("family", Value::from(e.family)),
            ("parameters", Value::from(e.parameters)),
            ("validity", Value::from(e.validity)),
            ("nu_p", Value::from(e.nu_p)),
            ("lambda", Value::from(e.lambda)),
            ("exactness", Value::from(e.exactness)),
        ]));
    }
    Outcome::new(CommandKind::Catalog, Value::Array(docs), t)
}

pub(crate) fn report_table(reports: &[CriterionReport]) -> Table {
    let mut t = Table::new(["criterion", "verdict", "quantity", "p", "q", "sigma", "rho", "gamma", "rate", "label"]);
    for r in reports {
        let par = |k: &str| opt(r.parameters.get(k).copied());
        t.push(vec![
            r.criterion_id.to_string(),
            r.verdict.as_str().to_string(),
            opt(r.quantity),
            par("p"),
            par("q"),
            par("sigma"),
            par("rho"),
            par("gamma"),
            r.rate.map(|c| c.to_string()).unwrap_or_default(),
            r.label.clone(),
        ]);
    }
    t
}

fn analyze(c: &RunConfig) -> anyhow::Result<Outcome> {
    let cmd = CommandKind::Analyze;
    let d = c.domain(cmd)?;
    let p = c.p(cmd)?;
    let q = c.q_or(f64::NAN);
    let measure = d.total_measure()?;
    let nu = nu_p(d, p)?;
    let explicit = c.criteria.is_some();
    let families = c.criteria.clone().unwrap_or_else(|| {
        let mut f = vec!["WP".to_string()];
        if lambda_iso(d).is_ok() {
            f.push("ISO".into());
        }
        if c.sigma.is_some() {
            f.push("SOL".into());
            f.push("GRAD".into());
            if c.rho.is_some() && c.gamma.is_some() {
                f.push("LOR".into());
            }
        }
        f
    });
    let need = |key: &str, v: Option<f64>, fam: &str| v.ok_or_else(|| anyhow!("{fam}: config is missing {key:?}"));
    let mut reports = Vec::new();
    let mut messages = Vec::new();
    for fam in &families {
        let r = match fam.as_str() {
            "WP" => wellposedness(&nu, measure, p, q),
            "SOL" => solution_norm_condition(&nu, measure, p, q, need("sigma", c.sigma, fam)?),
            "GRAD" => gradient_norm_condition(&nu, measure, p, q, need("sigma", c.sigma, fam)?),
            "LOR" => lorentz_gradient_condition(
                &nu,
                measure,
                p,
                q,
                need("sigma", c.sigma, fam)?,
                need("rho", c.rho, fam)?,
                need("gamma", c.gamma, fam)?,
            ),
            "ISO" => lambda_iso(d).and_then(|lam| wellposedness_via_lambda(&lam, measure, p, q)),
            "EMB" => embedding_condition(&nu, measure, p, need("sigma", c.sigma, fam)?),
            other => bail!("unknown criterion family {other:?}"),
        };
        match r {
            Ok(r) => reports.push(r),
            Err(e @ Error::CaseTable(_)) if !explicit => messages.push(format!("{fam}: not applicable: {e}")),
            Err(e) => bail!("{fam}: {e}"),
        }
    }
    let mut out = Outcome::new(
        cmd,
        Value::Array(reports.iter().map(json::report_value).collect()),
        report_table(&reports),
    );
    out.messages = messages;
    Ok(out)
}

fn model_nu(d: &DomainSpec, p: f64) -> anyhow::Result<(IsocapFn, &'static str)> {
    Ok(match d.profile_model() {
        Ok(m) => (m.isocap(p)?, "one-dimensional model"),
        Err(_) => (nu_p(d, p)?, "catalog"),
    })
}

fn closed_form(d: &DomainSpec, dc: &DatumConfig, cells: usize) -> anyhow::Result<(crate::domains::ProfileModel, Datum, SolverGrid)> {
    let DatumConfig::ClosedForm { id, params, project } = dc else {
        bail!("a closed-form datum is required");
    };
    let model = d.profile_model()?;
    let grid = SolverGrid::new(model.length, cells)?;
    let mut datum = named_datum(id, model.length, params)?;
    if *project {
        datum = project_compatible(&model.weight, &datum, grid);
    }
    Ok((model, datum, grid))
}

fn read_tabulated(path: &Path, measure: f64, q: f64) -> anyhow::Result<RearrangedDatum> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read tabulated f* {}", path.display()))?;
    let t = read_csv(&text)?;
    if t.header.len() != 2 {
        bail!("tabulated f* must have two columns (s, f*(s)), found {}", t.header.len());
    }
    let mut s = Vec::new();
    let mut f = Vec::new();
    for (i, row) in t.rows.iter().enumerate() {
        let parse = |x: &str| json::parse_float(x).ok_or_else(|| anyhow!("tabulated f* row {}: {x:?} is not a number", i + 1));
        s.push(parse(&row[0])?);
        f.push(parse(&row[1])?);
    }
    if f.windows(2).any(|w| w[1] > w[0]) {
        bail!("tabulated f* must be non-increasing");
    }
    let last = *s.last().ok_or_else(|| anyhow!("tabulated f* is empty"))?;
    if (last - measure).abs() > 1e-9 * measure {
        bail!("tabulated f* masses must end at the domain measure M = {measure} (last s = {last})");
    }
    Ok(RearrangedDatum::from_majorant(Rearrangement::from_table(&s, &f)?, q)?)
}

fn curve_value(c: &BoundCurve) -> Value {
    object([
        ("provenance", Value::from(c.provenance.as_str())),
        ("sign", Value::from(sign_str(c.sign))),
        ("p", float(c.p)),
        ("constants_known", Value::Bool(c.constants_known)),
        ("s", json::floats(&c.s_grid)),
        ("values", json::floats(&c.values)),
        ("flags", Value::Array(c.flags.iter().map(|f| Value::from(f.as_str())).collect())),
    ])
}

fn sign_str(s: Sign) -> &'static str {
    match s {
        Sign::Plus => "plus",
        Sign::Minus => "minus",
    }
}

fn bound(c: &RunConfig) -> anyhow::Result<Outcome> {
    let cmd = CommandKind::Bound;
    let d = c.domain(cmd)?;
    let p = c.p(cmd)?;
    let q = c.q_or(2.0);
    let (nu, source) = model_nu(d, p)?;
    let m = nu.measure;
    let dc = c.datum.as_ref().expect("validated");
    let (f, label) = match dc {
        DatumConfig::Tabulated { path } => (read_tabulated(path, m, q)?, format!("tabulated {}", path.display())),
        DatumConfig::ClosedForm { .. } => {
            let (model, datum, grid) = closed_form(d, dc, c.grid.cells)?;
            let f = datum_rearrangement(&model.weight, &datum, grid, q, c.grid.datum_refinement)?;
            let r = f.compatibility_residual();
            if r > 1e-9 {
                bail!("datum {} violates the compatibility condition int f = 0 (residual {r:e}); set \"project\": true", datum.label);
            }
            (f, datum.label.clone())
        }
    };
    let n = c.grid.bound_points;
    let lo = c.grid.s_min * m;
    let s_half = log_space(lo, 0.999 * 0.5 * m, n);
    let s_full = log_space(lo, 0.999 * m, n);
    let mut curves = Vec::new();
    for sign in [Sign::Plus, Sign::Minus] {
        curves.push(solution_rearrangement_bound(&nu, &f, sign, &s_half).map_err(|e| anyhow!("SOLUTION_BOUND: {e}"))?);
        curves.push(gradient_rearrangement_bound(&nu, &f, sign, &s_full).map_err(|e| anyhow!("GRADIENT_BOUND: {e}"))?);
        curves.push(marcinkiewicz_bound_curve(&nu, &f, sign, &s_full).map_err(|e| anyhow!("MARCINKIEWICZ_BOUND: {e}"))?);
    }
    let mut t = Table::new(["provenance", "sign", "s", "bound", "flag"]);
    for cv in &curves {
        for i in 0..cv.len() {
            t.push(vec![
                cv.provenance.to_string(),
                sign_str(cv.sign).into(),
                fmt_float(cv.s_grid[i]),
                fmt_float(cv.values[i]),
                cv.flags[i].as_str().into(),
            ]);
        }
    }
    let doc = object([
        ("datum", Value::from(label)),
        ("nu", Value::from(nu.label.clone())),
        ("nu_source", Value::from(source)),
        ("measure", float(m)),
        ("p", float(p)),
        ("q", float(q)),
        ("curves", Value::Array(curves.iter().map(curve_value).collect())),
    ]);
    Ok(Outcome::new(cmd, doc, t))
}

/// Every pointwise check of the 1D model for one solution.
pub fn verify_checks(
    sol: &crate::solver::NeumannSolution,
    nu: &IsocapFn,
    f: &RearrangedDatum,
    bound_points: usize,
    s_min: f64,
    levels: usize,
) -> crate::error::Result<Vec<CheckReport>> {
    let m = nu.measure;
    let mode = if nu.exactness == crate::domains::Exactness::Exact {
        BoundMode::Strict
    } else {
        BoundMode::FittedConstant
    };
    let s_half = log_space(s_min * m, 0.999 * 0.5 * m, bound_points);
    let s_full = log_space(s_min * m, 0.999 * m, bound_points);
    let mut out = Vec::new();
    for sign in [Sign::Plus, Sign::Minus] {
        out.push(verify_bound(sol, &solution_rearrangement_bound(nu, f, sign, &s_half)?, mode)?);
        out.push(verify_bound(sol, &gradient_rearrangement_bound(nu, f, sign, &s_full)?, mode)?);
        out.push(verify_bound(sol, &marcinkiewicz_bound_curve(nu, f, sign, &s_full)?, mode)?);
        let (t, _) = sample_levels(sol, sign, levels);
        out.push(verify_flux_inequality(sol, f, sign, &t)?);
        out.push(verify_isocap_levelset(sol, nu, sign, &t)?);
        out.push(verify_coarea(sol, sign, &t)?);
    }
    Ok(out)
}

fn verify(c: &RunConfig) -> anyhow::Result<Outcome> {
    let cmd = CommandKind::Verify;
    let d = c.domain(cmd)?;
    let p = c.p(cmd)?;
    let q = c.q_or(2.0);
    let (model, datum, grid) = closed_form(d, c.datum.as_ref().expect("validated"), c.grid.cells)?;
    let sol = solve_weighted_neumann(&model.weight, p, &datum, grid).map_err(|e| anyhow!("verify: {e}"))?;
    let nu = model.isocap(p)?;
    let f = sol.datum_rearrangement(q, c.grid.datum_refinement)?;
    let checks = verify_checks(&sol, &nu, &f, c.grid.bound_points, c.grid.s_min, c.grid.levels)
        .map_err(|e| anyhow!("verify: {e}"))?;
    let passed = checks.iter().all(|r| r.passed);
    let mut t = Table::new(["check", "passed", "checked", "violations", "skipped", "worst_at", "worst_ratio"]);
    for r in &checks {
        t.push(vec![
            r.name.clone(),
            r.passed.to_string(),
            r.checked.to_string(),
            r.violations.to_string(),
            r.skipped.to_string(),
            opt(r.worst_at),
            fmt_float(r.worst_ratio),
        ]);
    }
    let doc = object([
        ("passed", Value::Bool(passed)),
        ("datum", Value::from(datum.label.clone())),
        ("p", float(p)),
        ("cells", Value::from(grid.cells)),
        ("length", float(grid.length)),
        ("measure", float(model.measure)),
        ("compatibility_residual", float(sol.compatibility_residual)),
        ("checks", Value::Array(checks.iter().map(json::check_value).collect())),
    ]);
    let mut out = Outcome::new(cmd, doc, t);
    if !passed {
        out.exit_code = 2;
        let failed: Vec<&str> = checks.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
        out.messages.push(format!("verify: {} check(s) failed: {}", failed.len(), failed.join("; ")));
    }
    Ok(out)
}

/// `domain` with its shape parameter set to `alpha`.
pub fn with_alpha(d: &DomainSpec, alpha: f64) -> anyhow::Result<DomainSpec> {
    let mut out = d.clone();
    out.family = match d.family.clone() {
        Family::NikodymComb { delta } => Family::NikodymComb {
            delta: set_power(delta, alpha)?,
        },
        Family::CouhilComb { delta } => Family::CouhilComb {
            delta: set_power(delta, alpha)?,
        },
        Family::Cusp { n, theta, length } => Family::Cusp {
            n,
            theta: set_power(theta, alpha)?,
            length,
        },
        Family::Funnel { n, zeta } => Family::Funnel {
            n,
            zeta: match zeta {
                Profile::ShiftedPower { .. } => Profile::ShiftedPower { exponent: alpha },
                Profile::Exponential { .. } => Profile::Exponential { rate: alpha },
                p => bail!("sweep parameter alpha is undefined for the funnel profile {p:?}"),
            },
        },
        Family::Holder { n, .. } => Family::Holder { n, alpha },
        Family::GammaJohn { n, .. } => Family::GammaJohn { n, gamma: alpha },
        Family::Custom {
            nu: NuModel::Power { coef, .. },
            lambda,
        } => Family::Custom {
            nu: NuModel::Power { coef, exponent: alpha },
            lambda,
        },
        _ => bail!("sweep parameter alpha is undefined for the {} family", d.family_name()),
    };
    Ok(out)
}

fn set_power(p: Profile, alpha: f64) -> anyhow::Result<Profile> {
    match p {
        Profile::Power { coef, .. } => Ok(Profile::Power { coef, exponent: alpha }),
        other => bail!("sweep parameter alpha needs a power profile, found {other:?}"),
    }
}

#[derive(Debug, Clone)]
struct SweepRow {
    alpha: f64,
    p: f64,
    q: f64,
    criterion: String,
    verdict: String,
    holds: bool,
    quantity: Option<f64>,
    note: String,
}

fn sweep_point(d: &DomainSpec, route: Route, alpha: f64, p: f64, q: f64) -> anyhow::Result<SweepRow> {
    let dom = with_alpha(d, alpha)?;
    let id = match route {
        Route::Nu => "WP",
        Route::Lambda => "ISO",
    };
    let mut row = SweepRow {
        alpha,
        p,
        q,
        criterion: String::new(),
        verdict: "rejected".into(),
        holds: false,
        quantity: None,
        note: String::new(),
    };
    if let Err(e) = dom.validate_p(p) {
        row.note = e.to_string();
        return Ok(row);
    }
    let measure = dom.total_measure()?;
    let r = match route {
        Route::Nu => nu_p(&dom, p).and_then(|nu| wellposedness(&nu, measure, p, q)),
        Route::Lambda => lambda_iso(&dom).and_then(|lam| wellposedness_via_lambda(&lam, measure, p, q)),
    }
    .map_err(|e| anyhow!("{id} at alpha = {alpha}, p = {p}, q = {q}: {e}"))?;
    row.criterion = r.criterion_id.to_string();
    row.verdict = r.verdict.as_str().to_string();
    row.holds = r.verdict == Verdict::Holds;
    row.quantity = r.quantity;
    row.note = r.notes.join("; ");
    Ok(row)
}

fn sweep(c: &RunConfig) -> anyhow::Result<Outcome> {
    let cmd = CommandKind::Sweep;
    let d = c.domain(cmd)?;
    let s = c.sweep.as_ref().expect("validated");
    let alphas = s.alpha.expand()?;
    with_alpha(d, alphas[0])?;
    let mut points = Vec::new();
    for &p in &s.p {
        for q in &s.q {
            for &a in &alphas {
                points.push((a, p, q.0));
            }
        }
    }
    let rows = points
        .par_iter()
        .map(|&(a, p, q)| sweep_point(d, s.route, a, p, q))
        .collect::<anyhow::Result<Vec<_>>>()?;

    let mut t = Table::new(["alpha", "p", "q", "criterion", "verdict", "quantity", "note"]);
    for r in &rows {
        t.push(vec![
            fmt_float(r.alpha),
            fmt_float(r.p),
            fmt_float(r.q),
            r.criterion.clone(),
            r.verdict.clone(),
            opt(r.quantity),
            r.note.clone(),
        ]);
    }
    let mut b = Table::new(["p", "q", "alpha_lo", "alpha_hi", "alpha_boundary", "from", "to"]);
    let mut boundary = Vec::new();
    for group in rows.chunks(alphas.len()) {
        for w in group.windows(2) {
            if w[0].holds != w[1].holds {
                let mid = 0.5 * (w[0].alpha + w[1].alpha);
                b.push(vec![
                    fmt_float(w[0].p),
                    fmt_float(w[0].q),
                    fmt_float(w[0].alpha),
                    fmt_float(w[1].alpha),
                    fmt_float(mid),
                    w[0].verdict.clone(),
                    w[1].verdict.clone(),
                ]);
                boundary.push(object([
                    ("p", float(w[0].p)),
                    ("q", float(w[0].q)),
                    ("alpha_lo", float(w[0].alpha)),
                    ("alpha_hi", float(w[1].alpha)),
                    ("alpha_boundary", float(mid)),
                    ("from", Value::from(w[0].verdict.clone())),
                    ("to", Value::from(w[1].verdict.clone())),
                ]));
            }
        }
    }
    let doc = object([
        (
            "points",
            Value::Array(
                rows.iter()
                    .map(|r| {
                        object([
                            ("alpha", float(r.alpha)),
                            ("p", float(r.p)),
                            ("q", float(r.q)),
                            ("criterion_id", Value::from(r.criterion.clone())),
                            ("verdict", Value::from(r.verdict.clone())),
                            ("quantity", json::opt_float(r.quantity)),
                            ("note", Value::from(r.note.clone())),
                        ])
                    })
                    .collect(),
            ),
        ),
        ("boundary", Value::Array(boundary)),
    ]);
    let mut out = Outcome::new(cmd, doc, t);
    out.extra.push(("boundary".into(), b));
    Ok(out)
}
