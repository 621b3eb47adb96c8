#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod model;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gibbs_core::ifs::PROBE_REL_TOL;
use gibbs_core::thermo::{self, BETA_TOL, EIGEN_TOL, Q_ALPHA_TOL};
use gibbs_core::wordsets;
use gibbs_core::{CdfModel, Error, MassDistribution, MassOptions, QAlpha, RatioSystem, Result, Word};
use serde_json::{json, Map, Value};

use model::Model;
use output::{Cell, Report};

const DEFAULT_EPS: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "gibbs",
    version,
    about = "Birkhoff sums, ratio spectra and Gibbs distribution functions on subshifts of finite type"
)]
struct Cli {
    /// Model file (JSON).
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Accuracy of distribution-function values and probe differences.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Potential playing the role of φ.
    #[arg(long, global = true)]
    phi: Option<String>,
    /// Potential playing the role of ψ; defaults to `psi` or the geometric potential.
    #[arg(long, global = true)]
    psi: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Load and check the model.
    Validate,
    /// Topological pressure of a potential.
    Pressure {
        #[arg(long)]
        potential: Option<String>,
    },
    /// β(q) and β'(q).
    Beta {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        q: Vec<f64>,
    },
    /// b(α) over a grid `lo:hi:step`, plus the row at α₀.
    Spectrum {
        #[arg(long = "alpha-grid")]
        alpha_grid: String,
    },
    /// Extreme Birkhoff ratios and the periodic words realizing them.
    AlphaRange,
    /// The exponent of full dimension.
    Alpha0,
    /// A sub-action for φ shifted to zero maximal cycle mean.
    Subaction,
    /// The words of length m whose Birkhoff sums stay within K.
    Words {
        #[arg(long = "K", allow_negative_numbers = true)]
        k: f64,
        #[arg(long)]
        m: usize,
    },
    /// The postfix family for (K', K).
    Postfix {
        #[arg(long = "Kp")]
        kp: f64,
        #[arg(long = "K")]
        k: f64,
        #[arg(long = "verify-maxlen")]
        verify_maxlen: Option<usize>,
    },
    /// Mass distribution on words with bounded sums and a recurring marker.
    Massdist {
        #[command(subcommand)]
        action: MassAction,
    },
    /// A word whose cylinder avoids every periodic orbit of the family.
    SeparatingWord {
        #[arg(long = "F", value_delimiter = ',', required = true)]
        family: Vec<String>,
    },
    /// The word defeating uniform recurrence when 0 is a ratio endpoint.
    Counterexample,
    /// Distribution function of the projected Gibbs measure.
    Cdf {
        #[command(subcommand)]
        action: CdfAction,
    },
    /// Hölder ratios at dyadic scales around x.
    Holder {
        #[arg(long, value_parser = parse_real)]
        x: f64,
        #[arg(long, value_parser = parse_real)]
        alpha: f64,
        #[arg(long, default_value_t = 30)]
        depth: usize,
    },
    /// A point built from the mass distribution at exponent α, with checks.
    CertifiedPoint {
        #[arg(long, value_parser = parse_real)]
        alpha: Option<f64>,
        #[arg(long)]
        l: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
}

#[derive(Subcommand)]
enum MassAction {
    Build(MassArgs),
    Sample(MassArgs),
    Certify(MassArgs),
}

#[derive(Args)]
struct MassArgs {
    #[arg(long)]
    s: f64,
    /// Marker family, comma separated.
    #[arg(long = "F", value_delimiter = ',', required = true)]
    family: Vec<String>,
    #[arg(long, default_value_t = 1)]
    depth: usize,
    #[arg(long = "K")]
    k: Option<f64>,
}

#[derive(Subcommand)]
enum CdfAction {
    Eval {
        #[arg(long, value_parser = parse_real, allow_negative_numbers = true)]
        x: f64,
        #[arg(long)]
        eps: Option<f64>,
    },
    Curve {
        #[arg(long, default_value_t = 101)]
        resolution: usize,
        #[arg(long)]
        eps: Option<f64>,
    },
}

/// Decimal or `p/q`.
fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let bad = || format!("{s:?} is not a number");
    match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            Ok(p / q)
        }
        None => s.trim().parse().map_err(|_| bad()),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numerical { .. } => 3,
        Error::Capacity { .. } => 4,
        _ => 2,
    }
}

struct Ctx {
    model: Model,
    cli_phi: Option<String>,
    cli_psi: Option<String>,
    eps: f64,
    probe_tol: f64,
    seed: u64,
}

impl Ctx {
    fn phi(&self) -> Result<&gibbs_core::Potential> {
        self.model.phi(self.cli_phi.as_deref(), "phi")
    }

    fn pair(&self) -> Result<RatioSystem> {
        RatioSystem::new(self.phi()?, &self.model.psi(self.cli_psi.as_deref())?)
    }

    fn cdf(&self) -> Result<CdfModel> {
        CdfModel::new(self.model.ifs()?, self.phi()?)
    }

    fn words(&self, list: &[String]) -> Result<Vec<Word>> {
        list.iter().map(|s| self.model.sft.parse_word(s)).collect()
    }

    fn fmt(&self, w: &Word) -> String {
        self.model.sft.format_word(w)
    }

    fn fmt_all(&self, ws: &[Word]) -> Vec<String> {
        ws.iter().map(|w| self.fmt(w)).collect()
    }
}

fn q_cell(q: QAlpha) -> Cell {
    Cell::Num(q.as_f64())
}

fn run(cli: &Cli) -> Result<(Report, &'static str, Model)> {
    let path = cli
        .model
        .as_ref()
        .ok_or_else(|| Error::Validation("--model is required".into()))?;
    let model = Model::load(path)?;
    let ctx = Ctx {
        model,
        cli_phi: cli.phi.clone(),
        cli_psi: cli.psi.clone(),
        eps: cli.tol.unwrap_or(DEFAULT_EPS),
        probe_tol: cli.tol.unwrap_or(PROBE_REL_TOL),
        seed: cli.seed,
    };
    if !(ctx.eps > 0.0) {
        return Err(Error::Validation("--tol must be positive".into()));
    }
    let (report, name) = dispatch(&ctx, &cli.command)?;
    Ok((report, name, ctx.model))
}

fn dispatch(ctx: &Ctx, command: &Command) -> Result<(Report, &'static str)> {
    let sft = &ctx.model.sft;
    Ok(match command {
        Command::Validate => {
            let mut v = json!({
                "symbols": sft.size(),
                "mixing": sft.is_mixing(),
                "potentials": ctx.model.potentials.iter().map(|(k, p)| (k.clone(), json!(p.depth()))).collect::<Map<_, _>>(),
                "ifs": ctx.model.ifs.is_some(),
            });
            if sft.is_mixing() {
                v["mixing_window"] = json!(sft.mixing_window()?);
            }
            (Report::object(v), "validate")
        }
        Command::Pressure { potential } => {
            let f = match potential {
                Some(n) => ctx.model.phi(Some(n), "phi")?,
                None => ctx.phi()?,
            };
            let p = thermo::pressure(f)?;
            (Report::table(&["pressure"], vec![vec![p.into()]]), "pressure")
        }
        Command::Beta { q } => {
            let sys = ctx.pair()?;
            let mut rows = Vec::new();
            for &x in q {
                rows.push(vec![x.into(), sys.beta(x)?.into(), sys.beta_prime(x)?.into()]);
            }
            (Report::table(&["q", "beta", "beta_prime"], rows), "beta")
        }
        Command::Spectrum { alpha_grid } => (spectrum(ctx, alpha_grid)?, "spectrum"),
        Command::AlphaRange => {
            let sys = ctx.pair()?;
            let r = sys.alpha_range();
            let rows = vec![
                vec!["lo".into(), r.lo.into(), ctx.fmt(&r.lo_cycle).into()],
                vec!["hi".into(), r.hi.into(), ctx.fmt(&r.hi_cycle).into()],
            ];
            (Report::table(&["end", "alpha", "cycle"], rows), "alpha-range")
        }
        Command::Alpha0 => {
            let v = if ctx.model.ifs.is_some() {
                serde_json::to_value(ctx.cdf()?.alpha0()?).unwrap()
            } else {
                let sys = ctx.pair()?;
                let a = sys.full_dim_alpha()?;
                json!({"alpha0": a, "dimension": sys.spectrum_at(a)?.value, "beta0": sys.beta(0.0)?})
            };
            (Report::object(v), "alpha0")
        }
        Command::Subaction => {
            let phi = ctx.phi()?;
            let mean = thermo::max_cycle_mean(phi)?;
            let shifted = phi.shifted(-mean);
            let f = thermo::subaction(&shifted)?;
            let check = thermo::check_subaction(&shifted, &f)?;
            let sup = thermo::birkhoff_sup(&shifted)?;
            let rows: Vec<Vec<Cell>> = f
                .entries()
                .into_iter()
                .map(|(w, v)| vec![ctx.fmt(&w).into(), v.into()])
                .collect();
            let json = json!({
                "shift": -mean,
                "values": f.entries().into_iter().map(|(w, v)| (ctx.fmt(&w), json!(v))).collect::<Map<_, _>>(),
                "max_excess": check.max_excess,
                "tight_cycle": check.tight_cycle,
                "birkhoff_sup": sup,
            });
            (Report::table(&["word", "value"], rows).with_json(json), "subaction")
        }
        Command::Words { k, m } => {
            let phi = ctx.phi()?;
            let fam = wordsets::enumerate_w(phi, *k, *m)?;
            let mut rows = Vec::new();
            for w in &fam.words {
                let b = phi.word_sum_bounds(w)?;
                rows.push(vec![ctx.fmt(w).into(), b.inf.into(), b.sup.into()]);
            }
            (Report::table(&["word", "sum_inf", "sum_sup"], rows), "words")
        }
        Command::Postfix { kp, k, verify_maxlen } => {
            let phi = ctx.phi()?;
            let t = wordsets::build_postfix_set(phi, *kp, *k)?;
            let mut json = json!({
                "k_prime": t.k_prime,
                "k": t.k,
                "norm": t.norm(),
                "minus_segment": ctx.fmt(&t.minus_segment),
                "plus_segment": ctx.fmt(&t.plus_segment),
                "words": ctx.fmt_all(&t.words),
            });
            let rows: Vec<Vec<Cell>> = t
                .words
                .iter()
                .map(|w| vec![ctx.fmt(w).into(), w.len().into()])
                .collect();
            match verify_maxlen {
                Some(n) => {
                    let r = wordsets::verify_postfix(&t, phi, *n)?;
                    json["verify"] = json!({
                        "max_len": r.max_len,
                        "checked": r.checked,
                        "passed": r.passed,
                        "failures": ctx.fmt_all(&r.failures),
                    });
                    (Report::object(json), "postfix")
                }
                None => (Report::table(&["word", "length"], rows).with_json(json), "postfix"),
            }
        }
        Command::Massdist { action } => massdist(ctx, action)?,
        Command::SeparatingWord { family } => {
            let w = wordsets::separating_word(&ctx.words(family)?, sft)?;
            (
                Report::table(&["word"], vec![vec![ctx.fmt(&w).into()]]),
                "separating-word",
            )
        }
        Command::Counterexample => {
            let c = wordsets::counterexample_word(ctx.phi()?, &ctx.model.psi(ctx.cli_psi.as_deref())?)?;
            let v = json!({
                "word": ctx.fmt(&c.word),
                "orientation": c.orientation,
                "c_minus": c.c_minus,
                "word_sup": c.word_sup,
            });
            (Report::object(v), "counterexample")
        }
        Command::Cdf { action } => {
            let m = ctx.cdf()?;
            match action {
                CdfAction::Eval { x, eps } => {
                    let e = eps.unwrap_or(ctx.eps);
                    let v = m.cdf_eval(*x, e)?;
                    (
                        Report::table(&["x", "cdf"], vec![vec![(*x).into(), v.into()]]),
                        "cdf eval",
                    )
                }
                CdfAction::Curve { resolution, eps } => {
                    let e = eps.unwrap_or(ctx.eps);
                    let rows = m
                        .cdf_curve(*resolution, e)?
                        .into_iter()
                        .map(|(x, y)| vec![x.into(), y.into()])
                        .collect();
                    (Report::table(&["x", "cdf"], rows), "cdf curve")
                }
            }
        }
        Command::Holder { x, alpha, depth } => {
            let p = ctx.cdf()?.holder_probe_with_tol(*x, *alpha, 1, *depth, ctx.probe_tol)?;
            let rows = p
                .records
                .iter()
                .map(|r| {
                    let side = match r.side {
                        gibbs_core::ifs::Side::Left => "left",
                        gibbs_core::ifs::Side::Right => "right",
                    };
                    vec![r.scale.into(), side.into(), r.diff.into(), r.ratio.into()]
                })
                .collect();
            let json = serde_json::to_value(&p).unwrap();
            (
                Report::table(&["scale", "side", "diff", "ratio"], rows).with_json(json),
                "holder",
            )
        }
        Command::CertifiedPoint { alpha, l, depth } => {
            let m = ctx.cdf()?;
            let a = match alpha {
                Some(a) => *a,
                None => m.alpha0()?.alpha0,
            };
            let p = m.certified_point(a, *l, *depth, ctx.seed)?;
            (Report::object(serde_json::to_value(&p).unwrap()), "certified-point")
        }
    })
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::Validation(format!("alpha grid {text:?} must look like lo:hi:step with step > 0"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums = parts
        .iter()
        .map(|p| parse_real(p).map_err(|_| bad()))
        .collect::<Result<Vec<f64>>>()?;
    let (lo, hi, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || !(lo <= hi) {
        return Err(bad());
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(Error::Capacity {
            what: "alpha grid".into(),
            requested: n as u128 + 1,
            cap: 1_000_001,
        });
    }
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

fn spectrum(ctx: &Ctx, grid: &str) -> Result<Report> {
    let sys = ctx.pair()?;
    let mut alphas = parse_grid(grid)?;
    if let Ok(a0) = sys.full_dim_alpha() {
        if !alphas.iter().any(|a| (a - a0).abs() <= 1e-12) {
            alphas.push(a0);
            alphas.sort_by(f64::total_cmp);
        }
    }
    let mut rows = Vec::new();
    for a in alphas {
        let p = match sys.spectrum_at(a) {
            Ok(p) => p,
            Err(Error::EmptyLevelSet { .. }) => continue,
            Err(e) => return Err(e),
        };
        let gap = p.endpoint_gap.map(Cell::Num).unwrap_or(Cell::Text(String::new()));
        rows.push(vec![a.into(), q_cell(p.q), p.value.into(), gap]);
    }
    Ok(Report::table(&["alpha", "q", "b", "endpoint_gap"], rows))
}

fn massdist(ctx: &Ctx, action: &MassAction) -> Result<(Report, &'static str)> {
    let (args, name) = match action {
        MassAction::Build(a) => (a, "massdist build"),
        MassAction::Sample(a) => (a, "massdist sample"),
        MassAction::Certify(a) => (a, "massdist certify"),
    };
    let phi = ctx.phi()?;
    let psi = ctx.model.psi(ctx.cli_psi.as_deref())?;
    let options = MassOptions { k: args.k, m_cap: None };
    let d = MassDistribution::build(phi, &psi, args.s, &ctx.words(&args.family)?, &options)?;
    let v = match action {
        MassAction::Build(_) => serde_json::to_value(d.summary()).unwrap(),
        MassAction::Sample(_) => {
            let n = d.sample(args.depth, ctx.seed)?;
            json!({
                "generation": n.generation,
                "word": ctx.fmt(&n.word),
                "length": n.word.len(),
                "mass": n.mass(),
                "log_mass": n.log_mass,
            })
        }
        MassAction::Certify(_) => {
            let n = d.sample(args.depth, ctx.seed)?;
            serde_json::to_value(d.certify(&n)?).unwrap()
        }
    };
    Ok((Report::object(v), name))
}

fn metadata(model: &Model, command: &str, cli: &Cli) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("tool".into(), json!(format!("gibbs {}", env!("CARGO_PKG_VERSION"))));
    m.insert("command".into(), json!(command));
    m.insert("model_sha256".into(), json!(model.hash));
    m.insert(
        "tolerances".into(),
        json!({
            "eigen": EIGEN_TOL,
            "beta": BETA_TOL,
            "q_alpha": Q_ALPHA_TOL,
            "cdf_eps": cli.tol.unwrap_or(DEFAULT_EPS),
            "probe_rel": cli.tol.unwrap_or(PROBE_REL_TOL),
        }),
    );
    m.insert("seed".into(), json!(cli.seed));
    m.insert(
        "sign_convention".into(),
        json!("b(alpha) = beta(q_alpha) - q_alpha*alpha"),
    );
    m
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, name, model) = match run(&cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("gibbs: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let meta = metadata(&model, name, &cli);
    let text = match cli.format {
        Format::Csv => report.render_csv(&meta),
        Format::Json => report.render_json(&meta),
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("gibbs: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}
