//! Command-line front end. Every command builds a JSON report; the text
//! format is rendered from that report.
//!
//! Exit codes: 0 when the verdict holds or the computation succeeded, 1 when
//! a verdict fails, 2 on input errors and 3 when a cap is exceeded.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::bundle::advice_bundle;
use crate::config::Caps;
use crate::envelope::{
    compose_envelopes, is_uniformly_universal, principal_o2_envelope, star, O2Map,
};
use crate::error::{Error, Result};
use crate::finspace::{FinSpace, PointMap, UpFamily};
use crate::io::{
    family_json, pa_envelope_json, read_json, render_text, EnvelopeSpec, MapSpec, PaSpec, SCHEMA,
};
use crate::realpw::{
    cluster_envelope, default_max_delta, format_q, kleisli_compose, local_modulus, parse_q,
    universality_defects, PAFunction,
};
use crate::verify::verify_corpus;

#[derive(Parser, Debug)]
#[command(
    name = "envlab",
    version,
    about = "Envelopes of functions between finite spaces and piecewise-affine reals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Largest space whose opens may be enumerated.
    #[arg(long, global = true, default_value_t = Caps::default().opens)]
    pub cap_opens: usize,

    /// Largest base space for the monad multiplication.
    #[arg(long, global = true, default_value_t = Caps::default().mu)]
    pub cap_mu: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Principal O² envelope of a map and its star table.
    PosetEnvelope { map: PathBuf },
    /// Whether an envelope (the principal one by default) is uniformly universal.
    PosetUniversal {
        map: PathBuf,
        #[arg(long)]
        envelope: Option<PathBuf>,
    },
    /// Composite G∙F of the principal envelopes of g and f.
    PosetCompose { g: PathBuf, f: PathBuf },
    /// The least advice bundle of a map.
    PosetBundle { map: PathBuf },
    /// Cluster envelope of a piecewise-affine function.
    RealEnvelope { function: PathBuf },
    /// Kleisli composite G∙F of two cluster envelopes.
    RealCompose { g: PathBuf, f: PathBuf },
    /// Cluster values that no robust property witnesses.
    RealUniversal { function: PathBuf },
    /// Exact local modulus of continuity.
    RealModulus {
        function: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        max_delta: Option<String>,
    },
    /// Runs the exhaustive property suites.
    VerifyCorpus {
        #[arg(long, default_value_t = 3)]
        max_size: usize,
        /// Restrict to these suites (repeatable).
        #[arg(long = "suite")]
        suites: Vec<String>,
    },
}

/// A finished report and whether its verdict holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub verdict: bool,
}

impl Cli {
    pub fn caps(&self) -> Caps {
        Caps {
            opens: self.cap_opens,
            mu: self.cap_mu,
            ..Caps::default()
        }
    }
}

pub fn exit_code(result: &Result<Outcome>) -> u8 {
    match result {
        Ok(o) if o.verdict => 0,
        Ok(_) => 1,
        Err(Error::CapExceeded { .. }) => 3,
        Err(_) => 2,
    }
}

fn location(path: &Path) -> String {
    path.display().to_string()
}

fn load_map(path: &Path) -> Result<(MapSpec, PointMap)> {
    let spec: MapSpec = read_json(path)?;
    let f = spec.build(&location(path))?;
    Ok((spec, f))
}

fn load_pa(path: &Path) -> Result<(PaSpec, PAFunction)> {
    let spec: PaSpec = read_json(path)?;
    let f = spec.build(&location(path))?;
    Ok((spec, f))
}

fn families_json(x: &FinSpace, y: &FinSpace, values: &[UpFamily]) -> Value {
    Value::Object(
        values
            .iter()
            .enumerate()
            .map(|(p, fam)| (x.name(p).to_string(), family_json(y, fam)))
            .collect(),
    )
}

fn rational_arg(s: &str, name: &str) -> Result<crate::realpw::Q> {
    parse_q(s).map_err(|e| Error::parse(format!("--{name}"), e.to_string()))
}

fn report(cli: &Cli, command: &str, input: Value, body: Value) -> Value {
    let caps = cli.caps();
    let mut out = Map::new();
    out.insert("schema".into(), json!(SCHEMA));
    out.insert(
        "tool".into(),
        json!(concat!("envlab ", env!("CARGO_PKG_VERSION"))),
    );
    out.insert("command".into(), json!(command));
    out.insert("caps".into(), json!({"opens": caps.opens, "mu": caps.mu}));
    out.insert("input".into(), input);
    if let Value::Object(fields) = body {
        out.extend(fields);
    }
    Value::Object(out)
}

/// Runs one command and builds its report.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let caps = cli.caps();
    match &cli.command {
        Command::PosetEnvelope { map } => {
            let (spec, f) = load_map(map)?;
            let env = principal_o2_envelope(&f);
            let st = star(env.map(), &caps)?;
            let (x, y) = (f.domain(), f.codomain());
            let star_rows: Map<String, Value> = st
                .opens()
                .opens()
                .iter()
                .zip(st.rows())
                .map(|(v, row)| (y.render_set(&v.members()), json!(x.sorted_names(row))))
                .collect();
            let body = json!({
                "verdict": true,
                "envelope": families_json(x, y, env.map().values()),
                "star": star_rows,
            });
            Ok(Outcome {
                report: report(cli, "poset-envelope", json!({"map": spec}), body),
                verdict: true,
            })
        }
        Command::PosetUniversal { map, envelope } => {
            let (spec, f) = load_map(map)?;
            let (x, y) = (f.domain(), f.codomain());
            let (values, env_spec) = match envelope {
                Some(path) => {
                    let es: EnvelopeSpec = read_json(path)?;
                    (es.build(x, y, &location(path))?, Some(es))
                }
                None => (principal_o2_envelope(&f).map().values().to_vec(), None),
            };
            let o2map = O2Map::new(x.clone(), y.clone(), values)
                .map_err(|e| Error::parse("envelope", e.to_string()))?;
            let verdict = is_uniformly_universal(&f, &o2map, &caps)?;
            let counterexample = verdict
                .counterexample
                .as_ref()
                .map(|(p, v)| json!({"point": x.name(*p), "open": y.sorted_names(&v.members())}));
            let body = json!({
                "verdict": verdict.holds,
                "counterexample": counterexample,
                "envelope": families_json(x, y, o2map.values()),
            });
            Ok(Outcome {
                report: report(
                    cli,
                    "poset-universal",
                    json!({"map": spec, "envelope": env_spec}),
                    body,
                ),
                verdict: verdict.holds,
            })
        }
        Command::PosetCompose { g, f } => {
            let (g_spec, g_map) = load_map(g)?;
            let (f_spec, f_map) = load_map(f)?;
            if f_map.codomain() != g_map.domain() {
                return Err(Error::parse(
                    location(g),
                    "domain of g must equal the codomain of f",
                ));
            }
            let composite = compose_envelopes(
                &principal_o2_envelope(&g_map),
                &principal_o2_envelope(&f_map),
                &caps,
            )?;
            let gf = composite.f().clone();
            let principal = principal_o2_envelope(&gf);
            let universal = is_uniformly_universal(&gf, composite.map(), &caps)?;
            let (x, z) = (gf.domain(), gf.codomain());
            let counterexample = universal
                .counterexample
                .as_ref()
                .map(|(p, v)| json!({"point": x.name(*p), "open": z.sorted_names(&v.members())}));
            let body = json!({
                "verdict": true,
                "composite": families_json(x, z, composite.map().values()),
                "equals_principal": composite.map() == principal.map(),
                "uniformly_universal": {"verdict": universal.holds, "counterexample": counterexample},
            });
            Ok(Outcome {
                report: report(
                    cli,
                    "poset-compose",
                    json!({"g": g_spec, "f": f_spec}),
                    body,
                ),
                verdict: true,
            })
        }
        Command::PosetBundle { map } => {
            let (spec, f) = load_map(map)?;
            let ab = advice_bundle(&f, &caps)?;
            let l = ab.rel.lattice.space();
            let sigma: Map<String, Value> = (0..ab.rel.y_opens.len())
                .map(|v| (ab.rel.y_opens.name(v), json!(l.name(ab.sigma(v)))))
                .collect();
            let pf: Map<String, Value> = (0..l.len())
                .map(|a| (l.name(a).to_string(), json!(l.name(ab.pf[a]))))
                .collect();
            let body = json!({
                "verdict": ab.iso_oy,
                "Lf_size": ab.rel.len(),
                "Af_iso_OY": ab.iso_oy,
                "Af_distributive": ab.distributive,
                "sigma": sigma,
                "Pf": pf,
            });
            Ok(Outcome {
                report: report(cli, "poset-bundle", json!({"map": spec}), body),
                verdict: ab.iso_oy,
            })
        }
        Command::RealEnvelope { function } => {
            let (spec, f) = load_pa(function)?;
            let body =
                json!({"verdict": true, "envelope": pa_envelope_json(&cluster_envelope(&f))});
            Ok(Outcome {
                report: report(cli, "real-envelope", json!({"function": spec}), body),
                verdict: true,
            })
        }
        Command::RealCompose { g, f } => {
            let (g_spec, g_fn) = load_pa(g)?;
            let (f_spec, f_fn) = load_pa(f)?;
            let composite =
                kleisli_compose(&cluster_envelope(&g_fn), &cluster_envelope(&f_fn), &caps)?;
            let body = json!({"verdict": true, "composite": pa_envelope_json(&composite)});
            Ok(Outcome {
                report: report(cli, "real-compose", json!({"g": g_spec, "f": f_spec}), body),
                verdict: true,
            })
        }
        Command::RealUniversal { function } => {
            let (spec, f) = load_pa(function)?;
            let defects: Vec<Value> = universality_defects(&f)
                .iter()
                .map(|d| {
                    json!({
                        "breakpoint": format_q(&d.breakpoint),
                        "value": format_q(&d.value),
                        "witness": d.witness.to_string(),
                    })
                })
                .collect();
            let holds = defects.is_empty();
            let body = json!({
                "verdict": holds,
                "counterexample": defects.first(),
                "defects": defects,
            });
            Ok(Outcome {
                report: report(cli, "real-universal", json!({"function": spec}), body),
                verdict: holds,
            })
        }
        Command::RealModulus {
            function,
            x0,
            eps,
            max_delta,
        } => {
            let (spec, f) = load_pa(function)?;
            let x0q = rational_arg(x0, "x0")?;
            let epsq = rational_arg(eps, "eps")?;
            if epsq <= crate::realpw::q(0) {
                return Err(Error::parse("--eps", "must be positive"));
            }
            let cap = match max_delta {
                Some(s) => rational_arg(s, "max-delta")?,
                None => default_max_delta(),
            };
            let delta = local_modulus(&f, &x0q, &epsq, &cap);
            let input = json!({
                "function": spec,
                "x0": format_q(&x0q),
                "eps": format_q(&epsq),
                "max_delta": format_q(&cap),
            });
            let body = json!({
                "verdict": delta.is_some(),
                "delta": delta.as_ref().map(format_q),
                "continuous_at_x0": f.is_continuous_at(&x0q),
            });
            Ok(Outcome {
                report: report(cli, "real-modulus", input, body),
                verdict: delta.is_some(),
            })
        }
        Command::VerifyCorpus { max_size, suites } => {
            let reports = verify_corpus(*max_size, suites, &caps)?;
            let total: u64 = reports.iter().map(|r| r.instances).sum();
            let failures: u64 = reports.iter().map(|r| r.failures).sum();
            let body = json!({
                "verdict": failures == 0,
                "total_instances": total,
                "total_failures": failures,
                "suites": reports,
            });
            Ok(Outcome {
                report: report(
                    cli,
                    "verify-corpus",
                    json!({"max_size": max_size, "suites": suites}),
                    body,
                ),
                verdict: failures == 0,
            })
        }
    }
}

/// Renders a report in the requested format.
pub fn render(report: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => render_text(report),
    }
}

/// Parses arguments, runs the command and writes the report.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = execute(&cli);
    let code = exit_code(&result);
    match result {
        Ok(outcome) => {
            let text = render(&outcome.report, cli.format);
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        eprintln!("envlab: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{text}"),
            }
        }
        Err(e) => eprintln!("envlab: {e}"),
    }
    ExitCode::from(code)
}
