use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use geoproj::acceptance;
use geoproj::expr::ScalarField;
use geoproj::flow::{detect_closure, integrate_geodesic, ClosureOptions, GeodesicOptions, GeodesicState};
use geoproj::integrals::{clairaut, energy, relative_drift, FiberIntegral};
use geoproj::metric::{pullback, ChartDescription, ChartMap, MetricChart};
use geoproj::projective::{
    check_affinity, check_isometry, check_projective_equivalence, EquivalenceOptions, MapCheckOptions, Verdict,
};
use geoproj::verify;
use geoproj::zoo::{self, ShiftedSpec, ShiftReading, ZooParams, CATALOGUE};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "geoproj", version, about = "Geodesic flows, first integrals and projective equivalence of surface metrics")]
struct Cli {
    /// Seed for every sampled quantity.
    #[arg(long, global = true, env = "GEOPROJ_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Browse the catalogue of explicit metrics.
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
    /// Integrate one geodesic and report its conserved quantities.
    Geodesic(GeodesicArgs),
    /// Compare two metrics, or a metric and a map.
    Check {
        #[command(subcommand)]
        kind: CheckKind,
    },
    /// Numerical verification of the identities behind the constructions.
    Verify {
        #[command(subcommand)]
        which: VerifyKind,
    },
    /// Run the acceptance suite.
    Accept,
}

#[derive(Subcommand)]
enum ZooAction {
    List,
    Show {
        name: String,
        #[command(flatten)]
        params: ParamArgs,
        /// Print only the loadable chart description.
        #[arg(long)]
        toml: bool,
    },
}

#[derive(Args, Clone, Default)]
struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    l: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Profile in x.
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    q: Option<u32>,
    /// Odd function of x.
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    h1: Option<String>,
    #[arg(long)]
    h2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sign: Option<f64>,
}

impl ParamArgs {
    fn zoo(&self) -> ZooParams {
        ZooParams {
            a: self.a,
            l: self.l,
            eps: self.eps,
            f: self.f.clone(),
            p: self.p,
            q: self.q,
            h: self.h.clone(),
            h1: self.h1.clone(),
            h2: self.h2.clone(),
            sign: self.sign,
        }
    }
}

#[derive(Args)]
struct ChartArgs {
    /// Catalogue name or path to a chart description.
    #[arg(long)]
    chart: String,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct GeodesicArgs {
    #[command(flatten)]
    chart: ChartArgs,
    x0: f64,
    y0: f64,
    vx0: f64,
    vy0: f64,
    #[arg(long, default_value_t = 10.0)]
    tmax: f64,
    /// Write the sampled trace as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also look for the first return to the initial state.
    #[arg(long)]
    closure: bool,
    /// Largest integrator step, which sets the CSV resolution.
    #[arg(long, default_value_t = 0.02)]
    step: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Subcommand)]
enum CheckKind {
    /// Whether two metrics share their unparametrized geodesics.
    Projective(PairArgs),
    /// Whether a map preserves the Levi-Civita connection.
    Affine(MapArgs),
    /// Whether a map preserves the metric.
    Isometry(MapArgs),
}

#[derive(Args)]
struct PairArgs {
    #[command(flatten)]
    chart: ChartArgs,
    /// Second metric: catalogue name (default parameters) or file.
    #[arg(long, group = "second")]
    other: Option<String>,
    /// Compare with the catalogued partner of the chart.
    #[arg(long, group = "second")]
    partner: bool,
    /// Compare with the pullback by this map.
    #[arg(long, group = "second")]
    map: Option<String>,
    /// Add this multiple of dy² to the second metric.
    #[arg(long)]
    perturb: Option<String>,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Hausdorff tolerance on compared segments.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Euclidean length of compared segments.
    #[arg(long, default_value_t = 1.0)]
    tmax: f64,
}

#[derive(Args)]
struct MapArgs {
    #[command(flatten)]
    chart: ChartArgs,
    /// A map registered with the chart, or `u;v` in x and y.
    #[arg(long)]
    map: String,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Grid resolution per axis.
    #[arg(long, default_value_t = 12)]
    samples: usize,
}

#[derive(Subcommand)]
enum VerifyKind {
    /// The matrix identity at random admissible tuples.
    #[command(name = "lemma23", alias = "matrix-identity")]
    MatrixIdentity {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// The period relation of the shifted construction.
    #[command(name = "sec31-relation", alias = "shift-relation")]
    ShiftRelation {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = Reading::Definition)]
        reading: Reading,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// The band reparametrization identity.
    TanneryX {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Lightlike vectors of the deformed chart.
    TanneryLightlike {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Conservation of the quadratic integral against its swapped variant.
    LiouvilleI0 {
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Reading {
    Definition,
    Cubed,
}

/// A failed check, as opposed to a usage or configuration error.
struct Outcome {
    report: Value,
    pass: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&out.report, cli.json.as_deref()) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn emit(report: &Value, path: Option<&Path>) -> Result<()> {
    if report.is_null() {
        return Ok(());
    }
    let text = serde_json::to_string_pretty(report)? + "\n";
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    let seed = cli.seed;
    match &cli.command {
        Command::Zoo { action } => zoo_cmd(action),
        Command::Geodesic(args) => geodesic_cmd(args),
        Command::Check { kind } => check_cmd(kind, seed),
        Command::Verify { which } => verify_cmd(which, seed),
        Command::Accept => {
            let report = acceptance::run(seed, |r| eprintln!("{}", r.line()));
            for c in &report.controls {
                eprintln!("{}", c.line());
            }
            let pass = report.pass;
            Ok(Outcome {
                report: serde_json::to_value(report)?,
                pass,
            })
        }
    }
}

struct Loaded {
    chart: MetricChart,
    integrals: Vec<FiberIntegral>,
    maps: Vec<ChartMap>,
    partner: Option<MetricChart>,
    report: Option<Value>,
    killing: Option<geoproj::VectorField>,
}

fn load(name: &str, params: &ZooParams) -> Result<Loaded> {
    let path = Path::new(name);
    if path.extension().is_some_and(|e| e == "toml") || path.is_file() {
        let src = fs::read_to_string(path).with_context(|| format!("reading {name}"))?;
        let (chart, killing) = ChartDescription::from_toml(&src)?.to_chart()?;
        let mut integrals = vec![energy(&chart)];
        if let Some(k) = &killing {
            integrals.push(clairaut(&chart, k)?);
        }
        return Ok(Loaded {
            chart,
            integrals,
            maps: Vec::new(),
            partner: None,
            report: None,
            killing,
        });
    }
    let e = zoo::entry(name, params)?;
    Ok(Loaded {
        chart: e.chart,
        integrals: e.integrals,
        maps: e.maps,
        partner: e.partner,
        report: e.report,
        killing: e.killing,
    })
}

fn zoo_cmd(action: &ZooAction) -> Result<Outcome> {
    match action {
        ZooAction::List => {
            let width = CATALOGUE.iter().map(|c| c.name.len()).max().unwrap_or(0);
            let mut out = String::new();
            for c in CATALOGUE {
                writeln!(out, "{:width$}  {}", c.name, c.description)?;
            }
            print!("{out}");
            Ok(Outcome {
                report: Value::Null,
                pass: true,
            })
        }
        ZooAction::Show { name, params, toml } => {
            let l = load(name, &params.zoo())?;
            let desc = ChartDescription::from_chart(&l.chart, l.killing.as_ref());
            if *toml {
                print!("{}", desc.to_toml()?);
                return Ok(Outcome {
                    report: Value::Null,
                    pass: true,
                });
            }
            Ok(Outcome {
                report: json!({
                    "schema": 1,
                    "chart": desc,
                    "integrals": l.integrals.iter().map(|i| &i.name).collect::<Vec<_>>(),
                    "maps": l.maps.iter().map(|m| &m.name).collect::<Vec<_>>(),
                    "partner": l.partner.as_ref().map(|p| p.name()),
                    "report": l.report,
                }),
                pass: true,
            })
        }
    }
}

fn geodesic_cmd(args: &GeodesicArgs) -> Result<Outcome> {
    let l = load(&args.chart.chart, &args.chart.params.zoo())?;
    let s0 = GeodesicState::new([args.x0, args.y0], [args.vx0, args.vy0]);
    if args.vx0 == 0.0 && args.vy0 == 0.0 {
        bail!("initial velocity must be nonzero");
    }
    if !(args.step > 0.0) {
        bail!("--step must be positive");
    }
    let mut opts = GeodesicOptions::default();
    opts.tol.h_max = args.step;
    let trace = integrate_geodesic(&l.chart, s0, args.tmax, &opts)?;
    if let Some(path) = &args.csv {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        let mut header = vec!["t", "x", "y", "vx", "vy", "energy"];
        header.extend(l.integrals[1..].iter().map(|i| i.name.as_str()));
        w.write_record(&header)?;
        for s in &trace.samples {
            let mut row = vec![s.t, s.x, s.y, s.vx, s.vy];
            row.extend(l.integrals.iter().map(|i| i.value(s.position(), s.velocity())));
            w.write_record(row.iter().map(f64::to_string))?;
        }
        w.flush()?;
    }
    let drifts: Vec<Value> = l
        .integrals
        .iter()
        .map(|i| {
            let s = trace.start();
            json!({
                "name": i.name,
                "initial": i.value(s.position(), s.velocity()),
                "relative_drift": relative_drift(i, &trace),
            })
        })
        .collect();
    let pass = drifts
        .iter()
        .all(|d| d["relative_drift"].as_f64().is_some_and(|v| v <= args.tol));
    let mut report = json!({
        "schema": 1,
        "chart": l.chart.name(),
        "start": [args.x0, args.y0, args.vx0, args.vy0],
        "t_max": args.tmax,
        "termination": trace.termination,
        "duration": trace.duration(),
        "length": trace.length(),
        "end": [trace.end().x, trace.end().y, trace.end().vx, trace.end().vy],
        "n_samples": trace.samples.len(),
        "integrals": drifts,
        "tol": args.tol,
        "pass": pass,
    });
    if args.closure {
        let c = detect_closure(&l.chart, s0, args.tmax, &ClosureOptions::default())?;
        report["closure"] = serde_json::to_value(&c)?;
        report["period"] = json!(c.period());
    }
    Ok(Outcome { report, pass })
}

fn parse_map(l: &Loaded, spec: &str) -> Result<ChartMap> {
    if let Some(m) = l.maps.iter().find(|m| m.name == spec) {
        return Ok(m.clone());
    }
    let Some((u, v)) = spec.split_once(';') else {
        let known: Vec<&str> = l.maps.iter().map(|m| m.name.as_str()).collect();
        bail!("unknown map `{spec}`; registered: [{}], or give `u;v`", known.join(", "));
    };
    Ok(ChartMap::new(spec, ScalarField::parse(u.trim())?, ScalarField::parse(v.trim())?))
}

fn check_cmd(kind: &CheckKind, seed: u64) -> Result<Outcome> {
    match kind {
        CheckKind::Projective(args) => {
            let l = load(&args.chart.chart, &args.chart.params.zoo())?;
            let mut other = if args.partner {
                l.partner
                    .clone()
                    .with_context(|| format!("{} has no catalogued partner", l.chart.name()))?
            } else if let Some(spec) = &args.map {
                pullback(&l.chart, &parse_map(&l, spec)?)
            } else if let Some(name) = &args.other {
                load(name, &ZooParams::default())?.chart
            } else {
                bail!("give one of --other, --partner or --map");
            };
            if let Some(p) = &args.perturb {
                let [a, b, c] = other.coeffs().clone();
                let c = &c + &ScalarField::parse(p)?;
                other = MetricChart::new(format!("{}+({p})dy²", other.name()), [a, b, c], other.signature())
                    .with_domain(other.domain().clone())
                    .with_sample_box(other.sample_box())
                    .with_periods(other.periods());
            }
            let opts = EquivalenceOptions {
                n_traces: args.samples,
                seed,
                length: args.tmax,
                hausdorff_tol: args.tol,
                ..Default::default()
            };
            let r = check_projective_equivalence(&l.chart, &other, &opts)?;
            let pass = r.verdict == Verdict::Equivalent;
            Ok(Outcome {
                report: serde_json::to_value(r)?,
                pass,
            })
        }
        CheckKind::Affine(args) | CheckKind::Isometry(args) => {
            let l = load(&args.chart.chart, &args.chart.params.zoo())?;
            let phi = parse_map(&l, &args.map)?;
            let opts = MapCheckOptions {
                tol: args.tol,
                grid: args.samples,
            };
            let r = match kind {
                CheckKind::Affine(_) => check_affinity(&l.chart, &phi, &opts)?,
                _ => check_isometry(&l.chart, &phi, &opts)?,
            };
            let pass = r.holds;
            Ok(Outcome {
                report: serde_json::to_value(r)?,
                pass,
            })
        }
    }
}

fn verify_cmd(which: &VerifyKind, seed: u64) -> Result<Outcome> {
    let report = match which {
        VerifyKind::MatrixIdentity { samples, tol } => verify::matrix_identity_random(*samples, seed, *tol)?,
        VerifyKind::ShiftRelation {
            params,
            reading,
            samples,
            tol,
        } => {
            let mut spec = ShiftedSpec::standard();
            if let Some(f) = &params.f {
                spec.f = ScalarField::parse(f)?;
            }
            spec.a = params.a.unwrap_or(spec.a);
            spec.eps = params.eps.unwrap_or(spec.eps);
            let reading = match reading {
                Reading::Definition => ShiftReading::Definition,
                Reading::Cubed => ShiftReading::Cubed,
            };
            verify::shift_relation(&spec, *samples, seed, reading, *tol)?
        }
        VerifyKind::TanneryX { samples, tol } => verify::tannery_x(*samples, *tol),
        VerifyKind::TanneryLightlike { samples, tol } => verify::tannery_lightlike(*samples, seed, *tol)?,
        VerifyKind::LiouvilleI0 { params } => {
            let (d1, d2) = zoo::liouville_instance();
            let h1 = params.h1.as_deref().map(ScalarField::parse).transpose()?.unwrap_or(d1);
            let h2 = params.h2.as_deref().map(ScalarField::parse).transpose()?.unwrap_or(d2);
            let r = verify::liouville_i0(&h1, &h2, params.sign.unwrap_or(1.0), seed)?;
            let pass = r.pass;
            return Ok(Outcome {
                report: serde_json::to_value(r)?,
                pass,
            });
        }
    };
    let pass = report.pass;
    Ok(Outcome {
        report: serde_json::to_value(report)?,
        pass,
    })
}
