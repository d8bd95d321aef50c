//! The `ginv` command line.
//!
//! Exit codes: `0` everything held, `1` a mathematical failure was found,
//! `2` the input was unusable.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ginv_core::gen_inverse::{
    compute_outer_pql, compute_outer_pql_exact, exact_checks, exists_dual_check, exists_outer_pql,
};
use ginv_core::perturbation::{
    equivalence_cor28, equivalence_thm212, equivalence_thm24, equivalence_thm27,
    equivalence_thm_tm27, is_stable, lemma26_f, update_formula, EquivalenceReport,
};
use ginv_core::subspace::{gap, range_of};
use ginv_core::{Error, Tolerances};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::campaign::{run_campaign, write_csv};
use crate::checks::{run_check, Detail, Theorem};
use crate::config::EnsembleConfig;
use crate::json::{
    BoundJson, EquivalenceJson, ExactResultJson, ExistenceJson, GInvResultJson, GapJson,
    ImplicationJson, InstanceJson, MatrixJson, Real, ScenarioJson, TolJson,
};
use crate::InputError;

pub const ENV_TOL: &str = "GINV_DEFAULT_TOL";

#[derive(Debug, Parser)]
#[command(
    name = "ginv",
    version,
    about = "Outer generalized inverses with prescribed idempotents"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub tol: TolArgs,
}

#[derive(Debug, Default, Args)]
pub struct TolArgs {
    #[arg(long, global = true)]
    pub tol_rank: Option<f64>,
    #[arg(long, global = true)]
    pub tol_eq: Option<f64>,
    #[arg(long, global = true)]
    pub tol_inv: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the inverse for an instance `{a, p, q}`.
    Compute {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use exact rational arithmetic (all entries must be finite).
        #[arg(long)]
        exact: bool,
    },
    /// Existence report for an instance, with the dual test.
    Exists {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gap between the column spans of two matrices.
    Gap {
        #[arg(long)]
        m: PathBuf,
        #[arg(long)]
        n: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Update formula and equivalence reports for a scenario.
    Perturb {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one check on a scenario file or over an ensemble.
    Verify {
        #[arg(value_name = "THEOREM", required_unless_present = "theorem")]
        id: Option<String>,
        #[arg(long, conflicts_with = "id")]
        theorem: Option<String>,
        #[arg(
            long = "in",
            conflicts_with = "config",
            required_unless_present = "config"
        )]
        input: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification campaign.
    Ensemble {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Bound table with columns theorem,n,kappa,hyp,lhs,rhs,margin.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// Outcome of a subcommand that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Failure,
}

impl Verdict {
    fn from_ok(ok: bool) -> Self {
        if ok {
            Verdict::Ok
        } else {
            Verdict::Failure
        }
    }

    pub fn code(self) -> i32 {
        match self {
            Verdict::Ok => 0,
            Verdict::Failure => 1,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Math(Error),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Math(_) => 1,
            _ => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotExists
            | Error::IllConditioned { .. }
            | Error::Singular
            | Error::NoGroupInverse
            | Error::RepresentationMismatch(_)
            | Error::PerturbationTooLarge => CliError::Math(e),
            other => CliError::Input(InputError::Core(other)),
        }
    }
}

/// Parses `rank=..,eq=..,inv=..` (any subset, any order).
pub fn parse_tol_env(text: &str) -> Result<TolJson, InputError> {
    let mut t = TolJson::default();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| {
            InputError::Invalid(format!("{ENV_TOL}: expected key=value, got {part:?}"))
        })?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| InputError::Invalid(format!("{ENV_TOL}: bad number {value:?}")))?;
        match key.trim() {
            "rank" => t.rank = Some(v),
            "eq" => t.eq = Some(v),
            "inv" => t.inv = Some(v),
            other => {
                return Err(InputError::Invalid(format!(
                    "{ENV_TOL}: unknown key {other:?}"
                )))
            }
        }
    }
    Ok(t)
}

/// Defaults, then the environment, then the input file, then flags.
fn resolve_tol(
    env: Option<&str>,
    file: Option<&TolJson>,
    flags: &TolArgs,
) -> Result<Tolerances, InputError> {
    let mut t = Tolerances::default();
    if let Some(text) = env {
        t = parse_tol_env(text)?.apply(t);
    }
    if let Some(f) = file {
        t = f.apply(t);
    }
    t = TolJson {
        rank: flags.tol_rank,
        eq: flags.tol_eq,
        inv: flags.tol_inv,
    }
    .apply(t);
    t.validate().map_err(InputError::Core)?;
    Ok(t)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: name.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: name, source })
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string(value).expect("reports serialize");
    text.push('\n');
    let io = |path: &str, source| CliError::Io {
        path: path.to_string(),
        source,
    };
    match out {
        Some(p) => fs::write(p, text).map_err(|e| io(&p.display().to_string(), e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io("<stdout>", e)),
    }
}

#[derive(Serialize)]
struct ExactOutput {
    #[serde(flatten)]
    exact: ExactResultJson,
    /// Largest entry gap between the floating-point result and the rounded
    /// exact one; absent when no floating-point inverse exists.
    float_deviation: Option<Real>,
}

#[derive(Serialize)]
struct PerturbOutput {
    stable: bool,
    /// `b(1 + δa·b)⁻¹`; absent when the core is singular.
    update: Option<MatrixJson>,
    equivalences: BTreeMap<&'static str, Option<EquivalenceJson>>,
    consistent: bool,
}

#[derive(Serialize)]
struct VerifyOutput {
    #[serde(flatten)]
    outcome: crate::checks::Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    equivalence: Option<EquivalenceJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    implications: Option<Vec<ImplicationJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<BoundJson>,
}

fn compute(
    input: &Path,
    out: Option<&Path>,
    exact: bool,
    env: Option<&str>,
    flags: &TolArgs,
) -> Result<Verdict, CliError> {
    let inst: InstanceJson = read_json(input)?;
    let tol = resolve_tol(env, inst.tolerances.as_ref(), flags)?;
    if exact {
        let ex = |m: &MatrixJson, name: &str| -> Result<_, CliError> {
            m.to_exact()?.ok_or_else(|| {
                InputError::Invalid(format!("{name}: exact mode needs finite entries")).into()
            })
        };
        let (a, p, q) = (ex(&inst.a, "a")?, ex(&inst.p, "p")?, ex(&inst.q, "q")?);
        let b = compute_outer_pql_exact(&a, &p, &q)?;
        let c = exact_checks(&a, &p, &q, &b);
        let float_deviation = inst
            .parse(&tol)
            .ok()
            .and_then(|i| compute_outer_pql(&i.a, &i.p, &i.q, &tol).ok())
            .map(|r| Real((&r.b - &b.to_matrix()).max_abs()));
        let ok = c.bab_eq_b && c.range_eq && c.kernel_eq;
        emit(
            &ExactOutput {
                exact: ExactResultJson {
                    b: (&b).into(),
                    bab_eq_b: c.bab_eq_b,
                    range_eq: c.range_eq,
                    kernel_eq: c.kernel_eq,
                    aba_eq_a: c.aba_eq_a,
                    ba_eq_p: c.ba_eq_p,
                    one_ab_eq_q: c.one_ab_eq_q,
                },
                float_deviation,
            },
            out,
        )?;
        return Ok(Verdict::from_ok(ok));
    }
    let i = inst.parse(&tol)?;
    let r = compute_outer_pql(&i.a, &i.p, &i.q, &tol)?;
    emit(&GInvResultJson::from(&r), out)?;
    Ok(Verdict::from_ok(r.flags.outer_pql))
}

fn exists(
    input: &Path,
    out: Option<&Path>,
    env: Option<&str>,
    flags: &TolArgs,
) -> Result<Verdict, CliError> {
    let inst: InstanceJson = read_json(input)?;
    let tol = resolve_tol(env, inst.tolerances.as_ref(), flags)?;
    let i = inst.parse(&tol)?;
    let r = exists_outer_pql(&i.a, &i.p, &i.q, &tol)?;
    let dual = exists_dual_check(&i.a, &i.p, &i.q, &tol)?;
    let mut j = ExistenceJson::from(&r);
    j.dual_check = Some(dual);
    emit(&j, out)?;
    Ok(Verdict::from_ok(dual == r.exists))
}

fn gap_cmd(
    m: &Path,
    n: &Path,
    out: Option<&Path>,
    env: Option<&str>,
    flags: &TolArgs,
) -> Result<Verdict, CliError> {
    let tol = resolve_tol(env, None, flags)?;
    let mm = read_json::<MatrixJson>(m)?.to_matrix()?;
    let nn = read_json::<MatrixJson>(n)?.to_matrix()?;
    let g = gap(&range_of(&mm, &tol), &range_of(&nn, &tol))?;
    emit(&GapJson::from(&g), out)?;
    Ok(Verdict::Ok)
}

fn perturb(
    input: &Path,
    out: Option<&Path>,
    env: Option<&str>,
    flags: &TolArgs,
) -> Result<Verdict, CliError> {
    let sj: ScenarioJson = read_json(input)?;
    let tol = resolve_tol(env, sj.tolerances.as_ref(), flags)?;
    let s = sj.parse(&tol)?;
    let b = compute_outer_pql(&s.a, &s.p, &s.q, &tol)?.b;
    let update = match update_formula(&b, &s.delta_a, &tol) {
        Ok(m) => Some(MatrixJson::from(&m)),
        Err(Error::NotExists | Error::Singular) => None,
        Err(e) => return Err(e.into()),
    };
    let optional =
        |r: ginv_core::Result<EquivalenceReport>| -> Result<Option<EquivalenceReport>, CliError> {
            match r {
                Ok(r) => Ok(Some(r)),
                Err(Error::NotExists | Error::Singular) => Ok(None),
                Err(e) => Err(e.into()),
            }
        };
    let reports = [
        (Theorem::UpdateFormula, optional(equivalence_thm24(&s))?),
        (
            Theorem::KernelIdempotent,
            optional(lemma26_f(&s).map(|(_, r)| r))?,
        ),
        (Theorem::StableEquivalence, optional(equivalence_thm27(&s))?),
        (
            Theorem::SubspaceEquivalence,
            optional(equivalence_thm_tm27(&s))?,
        ),
        (Theorem::RangeEquivalence, optional(equivalence_cor28(&s))?),
        (
            Theorem::StrictEquivalence,
            optional(equivalence_thm212(&s))?,
        ),
    ];
    let consistent = reports
        .iter()
        .flat_map(|(_, r)| r)
        .all(|r| r.consistent && r.formula_agrees != Some(false));
    let equivalences = reports
        .iter()
        .map(|(t, r)| (t.id(), r.as_ref().map(EquivalenceJson::from)))
        .collect();
    emit(
        &PerturbOutput {
            stable: is_stable(&s),
            update,
            equivalences,
            consistent,
        },
        out,
    )?;
    Ok(Verdict::from_ok(consistent))
}

fn load_config(
    path: &Path,
    seed: Option<u64>,
    env: Option<&str>,
    flags: &TolArgs,
) -> Result<EnsembleConfig, CliError> {
    let mut c: EnsembleConfig = read_json(path)?;
    if let Some(s) = seed {
        c.seed = s;
    }
    c.tolerances = TolJson::full(&resolve_tol(env, Some(&c.tolerances), flags)?);
    c.validate()?;
    Ok(c)
}

#[allow(clippy::too_many_arguments)]
fn verify(
    id: &str,
    input: Option<&Path>,
    config: Option<&Path>,
    seed: Option<u64>,
    out: Option<&Path>,
    env: Option<&str>,
    flags: &TolArgs,
) -> Result<Verdict, CliError> {
    let theorem: Theorem = id.parse()?;
    if let Some(path) = config {
        let mut c = load_config(path, seed, env, flags)?;
        c.theorems = vec![theorem.id().to_string()];
        let (report, _) = run_campaign(&c)?;
        emit(&report, out)?;
        return Ok(Verdict::from_ok(report.clean()));
    }
    let path = input.ok_or_else(|| InputError::Invalid("verify needs --in or --config".into()))?;
    let sj: ScenarioJson = read_json(path)?;
    let tol = resolve_tol(env, sj.tolerances.as_ref(), flags)?;
    let s = sj.parse(&tol)?;
    let (outcome, detail) = run_check(theorem, &s, 1.0)?;
    let ok = outcome.ok || !outcome.applicable;
    let mut v = VerifyOutput {
        outcome,
        equivalence: None,
        implications: None,
        bound: None,
    };
    match &detail {
        Detail::None => {}
        Detail::Equivalence(r) => v.equivalence = Some(r.into()),
        Detail::Implications(rs) => v.implications = Some(rs.iter().map(Into::into).collect()),
        Detail::Bound(r) => v.bound = Some(r.into()),
    }
    emit(&v, out)?;
    Ok(Verdict::from_ok(ok))
}

fn ensemble(
    config: &Path,
    seed: Option<u64>,
    out: Option<&Path>,
    csv_path: Option<&Path>,
    env: Option<&str>,
    flags: &TolArgs,
) -> Result<Verdict, CliError> {
    let c = load_config(config, seed, env, flags)?;
    let (report, rows) = run_campaign(&c)?;
    emit(&report, out)?;
    if let Some(p) = csv_path {
        let name = p.display().to_string();
        let file = fs::File::create(p).map_err(|source| CliError::Io {
            path: name.clone(),
            source,
        })?;
        write_csv(&rows, file).map_err(|e| CliError::Io {
            path: name,
            source: std::io::Error::other(e),
        })?;
    }
    Ok(Verdict::from_ok(report.clean()))
}

/// Runs a parsed command line. `env_tol` is the value of [`ENV_TOL`].
pub fn run(cli: &Cli, env_tol: Option<&str>) -> Result<Verdict, CliError> {
    let flags = &cli.tol;
    match &cli.command {
        Command::Compute { input, out, exact } => {
            compute(input, out.as_deref(), *exact, env_tol, flags)
        }
        Command::Exists { input, out } => exists(input, out.as_deref(), env_tol, flags),
        Command::Gap { m, n, out } => gap_cmd(m, n, out.as_deref(), env_tol, flags),
        Command::Perturb { input, out } => perturb(input, out.as_deref(), env_tol, flags),
        Command::Verify {
            id,
            theorem,
            input,
            config,
            seed,
            out,
        } => {
            let id = id.as_deref().or(theorem.as_deref()).unwrap_or_default();
            verify(
                id,
                input.as_deref(),
                config.as_deref(),
                *seed,
                out.as_deref(),
                env_tol,
                flags,
            )
        }
        Command::Ensemble {
            config,
            seed,
            out,
            csv,
        } => ensemble(
            config,
            *seed,
            out.as_deref(),
            csv.as_deref(),
            env_tol,
            flags,
        ),
    }
}
