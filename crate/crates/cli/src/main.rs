use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use k3orb_core::bundles::{orbifold_serre_x30, scan_orbifold_x30};
use k3orb_core::catalog::{Catalog, CatalogEntry, Expectations, CATALOG_ENV};
use k3orb_core::graded::generator_data;
use k3orb_core::lattice::{
    search_q, verify_q, DivisorClass, ExceptionalBlock, LatticeBasis, Profile, SearchBounds,
    SurfaceState,
};
use k3orb_core::orbchar::{self, orbchar_report};
use k3orb_core::pipeline::{budget_table, pipeline, verify_tables, PipelineOptions, RowStatus};
use k3orb_core::rational::{self, Rational};
use k3orb_core::seifert::{
    find_parameters, verify_seifert, ParameterBounds, SeifertCertificate, SeifertContext,
    SeifertParameters,
};
use k3orb_core::wps::{singularity_report, HypersurfaceSpec};
use k3orb_core::Error;

#[derive(Parser)]
#[command(name = "k3orb", version, about = "Arithmetic checks on blown-up K3 orbisurfaces")]
struct Cli {
    /// Emit structured JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Alternate catalog file.
    #[arg(long, global = true, env = CATALOG_ENV)]
    catalog: Option<PathBuf>,
    #[arg(long, global = true, default_value = "ample-only")]
    profile: Profile,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Surface {
    /// Catalog id such as X30 or Xt9.
    id: Option<String>,
    #[arg(long, value_delimiter = ',', requires = "degree", conflicts_with = "id")]
    weights: Option<Vec<u64>>,
    #[arg(long)]
    degree: Option<u64>,
}

#[derive(clap::Args)]
struct Bounds {
    #[arg(long, default_value_t = SearchBounds::default().a0_max)]
    a0_max: u64,
    #[arg(long, default_value_t = SearchBounds::default().coeff_max)]
    coeff_max: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Singularities, Betti numbers and Picard generator of a surface.
    Analyze(Surface),
    /// Blow up further points of a surface.
    Blowup {
        #[command(flatten)]
        surface: Surface,
        /// Points to blow up in order, e.g. A4 or A2#2.
        #[arg(long = "at", required = true)]
        at: Vec<String>,
    },
    /// Enumerate ample Q with prescribed self-intersection.
    SearchQ {
        /// Catalog id; omit to use --h-self and --blocks.
        id: Option<String>,
        #[arg(long, default_value = "2")]
        target: String,
        #[arg(long)]
        h_self: Option<String>,
        /// Comma-separated blocks: P<n> for a pair block, S for a single.
        #[arg(long, value_delimiter = ',')]
        blocks: Vec<String>,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Check a tuple against Q^2 = target, ampleness and the profile.
    VerifyQ {
        id: String,
        /// Tuple such as "(14, 11, 28)".
        tuple: String,
        #[arg(long, default_value = "2")]
        target: String,
    },
    /// Exact local correction terms.
    Mu {
        m: u64,
        /// Character index; all characters when omitted.
        j: Option<u64>,
    },
    /// Anomaly budgets: one entry, or the whole table.
    Budget { id: Option<String> },
    /// Seifert divisor data for the last pair block of an entry, or for
    /// a bare (n, c).
    Seifert {
        id: Option<String>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        c: Option<i64>,
        #[arg(long, requires = "k")]
        m: Option<i64>,
        #[arg(long, requires = "m")]
        k: Option<i64>,
        #[arg(long, default_value_t = ParameterBounds::default().m_max)]
        m_max: i64,
        #[arg(long, default_value_t = ParameterBounds::default().k_max)]
        k_max: i64,
    },
    /// Every stage on one catalog entry.
    Pipeline { id: String },
    /// Recheck the printed tables: 1, 2, 3 or all.
    VerifyTables {
        #[arg(default_value = "all")]
        which: String,
    },
    /// Orbifold certificate for Q = a H-bar - b G on the A1 blow-up of X30.
    Orbifold {
        #[arg(default_value_t = 40)]
        a: i64,
        #[arg(default_value_t = 3)]
        b: i64,
    },
}

/// Command failures that are verdicts, not usage errors.
#[derive(Debug)]
struct Verdict(String);

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Verdict {}

struct Out {
    json: bool,
}

impl Out {
    fn emit(&self, value: Value, text: impl FnOnce() -> String) {
        let body = if self.json {
            serde_json::to_string_pretty(&value).unwrap()
        } else {
            text()
        };
        let mut stdout = std::io::stdout().lock();
        if let Err(e) = writeln!(stdout, "{body}") {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            panic!("writing to stdout: {e}");
        }
    }
}

fn r(x: &Rational) -> String {
    rational::to_string(x)
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

fn resolve(cat: &Catalog, s: &Surface) -> anyhow::Result<(String, HypersurfaceSpec, Vec<String>)> {
    match (&s.id, &s.weights, s.degree) {
        (Some(id), _, _) => {
            let e = cat.get(id)?;
            Ok((id.clone(), e.spec()?, e.chain.clone()))
        }
        (None, Some(w), Some(d)) => {
            let w: [u64; 4] = w
                .as_slice()
                .try_into()
                .map_err(|_| Error::InvalidWeights(format!("{w:?}")))?;
            Ok((format!("P{w:?}[{d}]"), HypersurfaceSpec::generic(w, d)?, Vec::new()))
        }
        _ => Err(Error::InvalidParameter("give a catalog id or --weights and --degree".into()).into()),
    }
}

fn state_of(spec: &HypersurfaceSpec, id: &str, chain: &[String]) -> anyhow::Result<SurfaceState> {
    let report = singularity_report(spec)?;
    let g = generator_data(spec, &report)?;
    Ok(SurfaceState::from_report(id, &report, g.degree, g.h_self)?.apply_chain(chain)?)
}

fn parse_rational(s: &str) -> anyhow::Result<Rational> {
    Ok(rational::parse(s).ok_or_else(|| Error::InvalidParameter(format!("not a rational: {s}")))?)
}

fn parse_block(s: &str) -> anyhow::Result<ExceptionalBlock> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("s") {
        return Ok(ExceptionalBlock::Single);
    }
    s.strip_prefix(['P', 'p'])
        .and_then(|n| n.parse().ok())
        .map(ExceptionalBlock::Pair)
        .ok_or_else(|| Error::InvalidParameter(format!("bad block {s}")).into())
}

fn state_text(s: &SurfaceState) -> String {
    format!(
        "singularities: {}\nb2 = {}, e = {}, e_orb = {}\nblocks: {:?}",
        if s.singularities.is_empty() { "none".into() } else { s.labels().join(", ") },
        s.b2,
        s.euler,
        r(&orbchar::euler_orb(s)),
        s.lattice.blocks
    )
}

fn seifert_text(c: &SeifertCertificate) -> String {
    let p = &c.params;
    let mut out = format!(
        "n = {}, c = {}, m = {}, k = {}, a = {}, b = {}\nE.C = {}, E.C' = {}, E^2 = {}",
        p.n,
        p.c,
        p.m,
        p.k,
        p.a,
        p.b,
        r(&c.e_c),
        r(&c.e_cprime),
        r(&c.e_self)
    );
    for ch in &c.checks {
        out += &format!("\n  {:<20} {}  {}", ch.name, if ch.passed { "pass" } else { "FAIL" }, ch.witness);
    }
    out
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let out = Out { json: cli.json };
    let cat = Catalog::load(cli.catalog.as_deref())?;
    let exp = Expectations::embedded();
    let opts = PipelineOptions {
        profile: cli.profile,
        ..PipelineOptions::default()
    };
    match cli.cmd {
        Cmd::Analyze(s) => {
            let (id, spec, _) = resolve(&cat, &s)?;
            let report = singularity_report(&spec)?;
            let gen = report.is_k3.then(|| generator_data(&spec, &report)).transpose()?;
            let value = json!({ "id": id, "report": to_value(&report), "generator": to_value(&gen) });
            out.emit(value, || {
                let sing: Vec<_> = report.singularities().iter().map(|n| format!("A{n}")).collect();
                let mut t = format!(
                    "{id}: {}\nsum n = {}",
                    if sing.is_empty() { "smooth".into() } else { sing.join(", ") },
                    report.sum_n
                );
                if let (Some(b2), Some(chi)) = (report.b2, report.chi_top) {
                    t += &format!(", b2 = {b2}, chi_top = {chi}");
                }
                if let Some(g) = &gen {
                    t += &format!(
                        "\ngenerator O({}): genus {}, H^2 = {}, O(1)^2 = {}",
                        g.degree,
                        g.genus,
                        g.h_self,
                        r(&g.orb_self)
                    );
                }
                for w in &report.warnings {
                    t += &format!("\nwarning: {w}");
                }
                t
            });
        }
        Cmd::Blowup { surface, at } => {
            let (id, spec, chain) = resolve(&cat, &surface)?;
            let state = state_of(&spec, &id, &chain)?.apply_chain(&at)?;
            let value = json!({ "state": to_value(&state), "orbchar": to_value(&orbchar_report(&state)?) });
            out.emit(value, || state_text(&state));
        }
        Cmd::SearchQ {
            id,
            target,
            h_self,
            blocks,
            bounds,
            limit,
        } => {
            let basis = match (&id, &h_self) {
                (Some(id), None) => cat.get(id)?.state()?.lattice,
                (None, Some(h)) => LatticeBasis::new(
                    parse_rational(h)?,
                    blocks.iter().map(|b| parse_block(b)).collect::<anyhow::Result<_>>()?,
                )?,
                _ => return Err(Error::InvalidParameter("give a catalog id or --h-self".into()).into()),
            };
            let target = parse_rational(&target)?;
            let b = SearchBounds {
                a0_max: bounds.a0_max,
                coeff_max: bounds.coeff_max,
            };
            let found = search_q(&basis, &target, cli.profile, b, limit)?;
            for t in &found {
                let v = verify_q(&basis, &DivisorClass::from_tuple(t), &target, cli.profile)?;
                if !v.passed {
                    anyhow::bail!(Verdict(format!("search produced {t:?} which does not verify")));
                }
            }
            out.emit(json!({ "profile": cli.profile, "target": r(&target), "tuples": found }), || {
                found
                    .iter()
                    .map(|t| DivisorClass::from_tuple(t).to_string())
                    .collect::<Vec<_>>()
                    .join("\n")
            });
            if found.is_empty() {
                anyhow::bail!(Verdict("no tuple within bounds".into()));
            }
        }
        Cmd::VerifyQ { id, tuple, target } => {
            let basis = cat.get(&id)?.state()?.lattice;
            let q: DivisorClass = tuple.parse()?;
            let v = verify_q(&basis, &q, &parse_rational(&target)?, cli.profile)?;
            out.emit(to_value(&v), || {
                format!(
                    "{}: Q^2 = {} (target {}), ample {}, {} {}",
                    v.q,
                    r(&v.q_self),
                    r(&v.target),
                    v.ample,
                    v.profile.profile,
                    if v.profile.passed { "pass" } else { "FAIL" }
                )
            });
            if !v.passed {
                anyhow::bail!(Verdict(format!("{} does not verify", v.q)));
            }
        }
        Cmd::Mu { m, j } => {
            let values: Vec<(u64, Rational)> = match j {
                Some(j) => vec![(j, orbchar::mu_local(m, j)?)],
                None => k3orb_core::cyclotomic::character_sums(m)?
                    .into_iter()
                    .enumerate()
                    .map(|(j, v)| (j as u64, v))
                    .collect(),
            };
            let value = json!({
                "m": m,
                "values": values.iter().map(|(j, v)| json!({"j": j, "mu": r(v)})).collect::<Vec<_>>(),
            });
            out.emit(value, || {
                values
                    .iter()
                    .map(|(j, v)| format!("mu({m}, {j}) = {}", r(v)))
                    .collect::<Vec<_>>()
                    .join("\n")
            });
        }
        Cmd::Budget { id } => {
            let rows = match id {
                Some(id) => {
                    let rep = pipeline(cat.get(&id)?, &exp, &opts)?;
                    vec![(rep.id, rep.singularities, rep.euler, rep.budget)]
                }
                None => budget_table(&cat, &exp, &opts)?
                    .into_iter()
                    .map(|b| (b.id, b.singularities, b.euler, b.report))
                    .collect(),
            };
            let value = Value::Array(
                rows.iter()
                    .map(|(id, s, e, b)| json!({"id": id, "singularities": s, "euler": e, "budget": to_value(b)}))
                    .collect(),
            );
            out.emit(value, || {
                rows.iter()
                    .map(|(id, s, e, b)| {
                        let v = b.as_ref().map_or("-".to_string(), |b| r(&b.budget));
                        format!("{id:<5} {:<20} {e:>3}  {v}", s.join(", "))
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            });
            if rows.iter().any(|(.., b)| b.as_ref().is_none_or(|b| b.alpha_prime_sign <= 0)) {
                anyhow::bail!(Verdict("a budget is missing or not positive".into()));
            }
        }
        Cmd::Seifert {
            id,
            n,
            c,
            m,
            k,
            m_max,
            k_max,
        } => {
            let (ctx, c) = match (&id, n, c) {
                (Some(id), None, _) => {
                    let e: &CatalogEntry = cat.get(id)?;
                    let ctx = SeifertContext::from_state(&e.state()?)?;
                    let c = c.unwrap_or(e.base()?.generator.h_self);
                    (ctx, c)
                }
                (None, Some(n), Some(c)) => (SeifertContext::minimal(n, c)?, c),
                _ => return Err(Error::InvalidParameter("give a catalog id or --n and --c".into()).into()),
            };
            let cert = match (m, k) {
                (Some(m), Some(k)) => {
                    verify_seifert(&ctx, &SeifertParameters::new(ctx.last_n() as i64, c, m, k)?)?
                }
                _ => find_parameters(&ctx, c, ParameterBounds { m_max, k_max })?,
            };
            out.emit(to_value(&cert), || seifert_text(&cert));
            if !cert.valid() {
                anyhow::bail!(Verdict("Seifert certificate has failing checks".into()));
            }
        }
        Cmd::Pipeline { id } => {
            let rep = pipeline(cat.get(&id)?, &exp, &opts)?;
            out.emit(to_value(&rep), || {
                let mut t = format!("{}: {} (e = {})", rep.id, rep.singularities.join(", "), rep.euler);
                for c in &rep.checks {
                    t += &format!("\n  {:<20} {}  {}", c.name, if c.passed { "pass" } else { "FAIL" }, c.witness);
                }
                for f in &rep.flags {
                    t += &format!(
                        "\n  flag {}: printed {}, computed {}{}",
                        f.quantity,
                        f.printed,
                        f.computed,
                        if f.known { " (known)" } else { "" }
                    );
                }
                t + &format!("\nverdict: {}", if rep.verdict { "pass" } else { "FAIL" })
            });
            if let Some(stage) = &rep.first_failure {
                anyhow::bail!(Verdict(format!("{id}: stage {stage} failed")));
            }
        }
        Cmd::VerifyTables { which } => {
            let table = match which.as_str() {
                "all" => None,
                "1" | "2" | "3" => Some(which.parse::<u8>().unwrap()),
                other => return Err(Error::InvalidParameter(format!("no table {other}")).into()),
            };
            let summary = verify_tables(&cat, &exp, table, &opts)?;
            out.emit(to_value(&summary), || {
                summary
                    .rows
                    .iter()
                    .map(|row| {
                        let status = match row.status {
                            RowStatus::Pass => "pass",
                            RowStatus::KnownDiscrepancy => "known",
                            RowStatus::Fail => "FAIL",
                        };
                        let detail = match (&row.q_self, &row.budget) {
                            (Some(q), _) => {
                                let strict = row
                                    .profiles
                                    .iter()
                                    .find(|p| p.profile == Profile::Strict)
                                    .is_some_and(|p| p.passed);
                                let mut d = format!(
                                    "Q^2 = {}, ample {}, strict {}",
                                    r(q),
                                    row.ample.unwrap_or(false),
                                    if strict { "pass" } else { "fail" }
                                );
                                if let Some(t) = &row.replacement {
                                    d += &format!(", replacement {}", DivisorClass::from_tuple(t));
                                }
                                d
                            }
                            (None, b) => format!(
                                "budget {} (printed {})",
                                b.as_ref().map_or("-".into(), r),
                                row.expected_budget.as_ref().map_or("-".into(), r)
                            ),
                        };
                        format!("table {} {:<5} {:<6} {detail}", row.table, row.id, status)
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            });
            if !summary.all_as_expected {
                anyhow::bail!(Verdict("unexpected mismatch".into()));
            }
        }
        Cmd::Orbifold { a, b } => {
            let scan = scan_orbifold_x30(a.max(40), b.max(3));
            let cert = orbifold_serre_x30(a, b);
            let value = json!({ "scan": scan, "certificate": cert.as_ref().ok().map(to_value) });
            out.emit(value, || match &cert {
                Ok(c) => format!(
                    "Q = {}: Q^2 = {}, chi(2Q) <= {} < {}, c2 = {}",
                    c.q,
                    r(&c.q_self),
                    r(&c.ell1),
                    c.ell,
                    r(&c.c2)
                ),
                Err(e) => e.to_string(),
            });
            cert?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let input = e.downcast_ref::<Error>().is_some_and(Error::is_input_error);
            ExitCode::from(if input { 2 } else { 1 })
        }
    }
}
