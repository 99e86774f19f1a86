//! The `sublab` command line.
//!
//! Exit codes: 0 success, 2 invalid input, 3 arbitrage where none is
//! allowed, 4 numeric breakdown.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::arbitrage::{check_global_nfl, check_submarket_nfl, ArbitrageError, NflOutcome};
use crate::document::{LoadedMarket, MarketSpecDocument};
use crate::generate::{arbitrage_free_model, random_claim, random_model, RandomModelConfig};
use crate::lp::LpError;
use crate::market::{validate_model, Claim, MarketModel, ModelError};
use crate::multicurve::{fra_rate, merge_submarkets, MulticurveError};
use crate::numeric::{format_float, format_rational, int, parse_rational, to_f64, NumericMode, Rational};
use crate::pricing::{
    dual_bounds_global, dual_certificate_value, pair_identities, price, price_constant_ratio, price_global, two_market_report,
    PricingError, Venue,
};
use crate::report::{self, Fmt};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_ARBITRAGE: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "sublab", version, about = "Arbitrage and superreplication in markets split into submarkets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Rational,
    Float,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Schema and model validation report.
    Validate { spec: PathBuf },
    /// No-arbitrage verdict with a deflator certificate or an arbitrage witness.
    Arb {
        spec: PathBuf,
        /// Check one submarket (label or index) instead of the global market.
        #[arg(long)]
        submarket: Option<String>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Deflator, martingale measures and state-price deflators.
    Deflator {
        spec: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Superreplication price of a claim.
    Price {
        spec: PathBuf,
        /// Declared claim label, or `S<submarket>` for a submarket's asset.
        #[arg(long)]
        claim: String,
        /// global, lower, upper or submarket:<label>
        #[arg(long, default_value = "global")]
        venue: String,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Price ordering, dual certificates, bounds and closed-form identities.
    Verify {
        spec: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Forward rate implied by two discount factors.
    Fra {
        #[arg(long, allow_hyphen_values = true)]
        bi: String,
        #[arg(long, allow_hyphen_values = true)]
        bm: String,
        #[arg(long, allow_hyphen_values = true)]
        i: String,
        #[arg(long, allow_hyphen_values = true)]
        m: String,
    },
    /// Worked demonstrations.
    Demo {
        #[command(subcommand)]
        demo: Demo,
    },
    /// Emit a random market-spec document.
    Gen {
        #[arg(long)]
        atoms: usize,
        #[arg(long)]
        submarkets: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        periods: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Keep sampling until the global market is arbitrage-free.
        #[arg(long)]
        arbitrage_free: bool,
    },
}

#[derive(Debug, Subcommand)]
enum Demo {
    /// Trade all submarkets of a spec together and compare with the split market.
    Cotrade {
        spec: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::new(EXIT_INVALID, e.to_string())
    }
}

fn numeric(e: &LpError) -> Failure {
    Failure::new(EXIT_NUMERIC, format!("{e}; retry with --mode rational"))
}

impl From<ArbitrageError> for Failure {
    fn from(e: ArbitrageError) -> Self {
        match &e {
            ArbitrageError::ArbitrageExists(_) => Failure::new(EXIT_ARBITRAGE, e.to_string()),
            ArbitrageError::Lp(lp) => numeric(lp),
            _ => Failure::new(EXIT_INVALID, e.to_string()),
        }
    }
}

impl From<PricingError> for Failure {
    fn from(e: PricingError) -> Self {
        match e {
            PricingError::Arbitrage(a) => a.into(),
            PricingError::Lp(lp) => numeric(&lp),
            PricingError::GlobalArbitrage | PricingError::SubmarketArbitrage(_) => Failure::new(EXIT_ARBITRAGE, e.to_string()),
            PricingError::InfeasiblePrice => Failure::new(EXIT_NUMERIC, e.to_string()),
            other => Failure::new(EXIT_INVALID, other.to_string()),
        }
    }
}

impl From<MulticurveError> for Failure {
    fn from(e: MulticurveError) -> Self {
        match e {
            MulticurveError::Model(m) => m.into(),
            MulticurveError::Arbitrage(a) => a.into(),
            other => Failure::new(EXIT_INVALID, other.to_string()),
        }
    }
}

type Outcome = Result<(Value, i32), Failure>;

/// Runs one command, writing JSON to `out`, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(out, "{}", e.render());
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let (value, code) = match dispatch(cli.command) {
        Ok(v) => v,
        Err(f) => (json!({"error": f.message, "exit": f.code}), f.code),
    };
    let _ = out.write_all(report::render(&value).as_bytes());
    code
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Validate { spec } => validate(&spec),
        Command::Arb { spec, submarket, mode } => arb(&spec, submarket.as_deref(), mode),
        Command::Deflator { spec, mode } => deflator(&spec, mode),
        Command::Price { spec, claim, venue, mode } => price_cmd(&spec, &claim, &venue, mode),
        Command::Verify { spec, mode } => verify(&spec, mode),
        Command::Fra { bi, bm, i, m } => fra(&bi, &bm, &i, &m),
        Command::Demo { demo: Demo::Cotrade { spec, mode } } => cotrade(&spec, mode),
        Command::Gen {
            atoms,
            submarkets,
            seed,
            periods,
            dim,
            arbitrage_free,
        } => gen(atoms, submarkets, seed, periods, dim, arbitrage_free),
    }
}

fn read_doc(path: &Path) -> Result<MarketSpecDocument, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::new(EXIT_INVALID, format!("{}: {e}", path.display())))?;
    Ok(MarketSpecDocument::from_json(&text)?)
}

fn load(path: &Path, mode: Option<ModeArg>) -> Result<LoadedMarket, Failure> {
    let mut loaded = read_doc(path)?.load()?;
    if let Some(m) = mode {
        loaded.mode = match m {
            ModeArg::Rational => NumericMode::Rational,
            ModeArg::Float => NumericMode::float(),
        };
    }
    Ok(loaded)
}

fn resolve_submarket(model: &MarketModel, s: &str) -> Result<usize, Failure> {
    if let Ok(t) = model.submarket_index(s) {
        return Ok(t);
    }
    match s.parse::<usize>() {
        Ok(t) if t < model.submarkets().len() => Ok(t),
        _ => Err(ModelError::UnknownSubmarket(s.to_string()).into()),
    }
}

fn parse_venue(model: &MarketModel, s: &str) -> Result<Venue, Failure> {
    match s {
        "global" => Ok(Venue::Global),
        "lower" => Ok(Venue::Lower),
        "upper" => Ok(Venue::Upper),
        _ => match s.strip_prefix("submarket:") {
            Some(label) => Ok(Venue::Submarket(resolve_submarket(model, label)?)),
            None => Err(Failure::new(EXIT_INVALID, format!("unknown venue `{s}`"))),
        },
    }
}

fn validate(path: &Path) -> Outcome {
    let loaded = read_doc(path)?.assemble()?;
    let report = validate_model(&loaded.model);
    let code = if report.ok { EXIT_OK } else { EXIT_INVALID };
    Ok((report::validation(&loaded.model, &report, Fmt(loaded.mode)), code))
}

fn arb(path: &Path, submarket: Option<&str>, mode: Option<ModeArg>) -> Outcome {
    let loaded = load(path, mode)?;
    let model = &loaded.model;
    let (scope, outcome) = match submarket {
        None => ("global".to_string(), check_global_nfl(model, loaded.mode)?),
        Some(s) => {
            let t = resolve_submarket(model, s)?;
            (format!("submarket:{}", model.submarket(t).label), check_submarket_nfl(model, t, loaded.mode)?)
        }
    };
    let code = if outcome.is_free() { EXIT_OK } else { EXIT_ARBITRAGE };
    Ok((report::nfl(model, &scope, &outcome, Fmt(loaded.mode)), code))
}

fn deflator(path: &Path, mode: Option<ModeArg>) -> Outcome {
    let loaded = load(path, mode)?;
    match check_global_nfl(&loaded.model, loaded.mode)? {
        NflOutcome::Free(cert) => Ok((report::deflator(&loaded.model, &cert, Fmt(loaded.mode)), EXIT_OK)),
        arb @ NflOutcome::Arbitrage(_) => Ok((report::nfl(&loaded.model, "global", &arb, Fmt(loaded.mode)), EXIT_ARBITRAGE)),
    }
}

fn price_cmd(path: &Path, claim: &str, venue: &str, mode: Option<ModeArg>) -> Outcome {
    let loaded = load(path, mode)?;
    let venue = parse_venue(&loaded.model, venue)?;
    let claim = loaded.claim(claim)?;
    let r = price(&loaded.model, &claim.payoff, venue, loaded.mode)?;
    Ok((report::price(&loaded.model, &claim.label, &r, Fmt(loaded.mode)), EXIT_OK))
}

fn not_applicable(e: PricingError) -> Result<Value, Failure> {
    match e {
        PricingError::ConditionNotMet(_) | PricingError::WrongShape | PricingError::DimensionNotOne(_) => {
            Ok(json!({"not_applicable": e.to_string()}))
        }
        other => Err(other.into()),
    }
}

fn verify(path: &Path, mode: Option<ModeArg>) -> Outcome {
    let loaded = load(path, mode)?;
    let (model, mode) = (&loaded.model, loaded.mode);
    let f = Fmt(mode);
    check_global_nfl(model, mode)?
        .certificate()
        .ok_or_else(|| Failure::new(EXIT_ARBITRAGE, "the global market admits an arbitrage"))?;
    let n_sub = model.submarkets().len();
    let mut claims: Vec<Claim> = loaded.claims.clone();
    for t in 0..n_sub {
        for i in 0..model.submarket(t).dim {
            claims.push(model.asset_claim(t, i));
        }
    }
    let mut lambdas: Vec<Vec<Rational>> = vec![vec![int(1); n_sub]];
    if n_sub > 1 {
        lambdas.extend((0..n_sub).map(|t| (0..n_sub).map(|s| int(i64::from(s == t))).collect()));
    }
    let mut all_hold = true;
    let mut per_claim = Vec::new();
    for claim in &claims {
        let h = &claim.payoff;
        let global = price_global(model, h, mode)?;
        let lower = price(model, h, Venue::Lower, mode)?;
        let upper = price(model, h, Venue::Upper, mode)?;
        let ordering = mode.le(&global.price, &lower.price) && mode.le(&lower.price, &upper.price);
        let mut certificates = Vec::new();
        let mut certificates_hold = true;
        for lambda in &lambdas {
            let value = dual_certificate_value(model, h, &global.allocation, lambda, mode)?;
            let holds = mode.is_zero(&value);
            certificates_hold &= holds;
            certificates.push(json!({"lambda": f.vs(lambda), "value": f.v(&value), "holds": holds}));
        }
        let bounds = dual_bounds_global(model, h, mode)?;
        let gaps_zero = mode.is_zero(&global.duality_gap) && lower.components.len() == n_sub;
        let submarket_gaps: Vec<Rational> = (0..n_sub)
            .map(|t| price(model, h, Venue::Submarket(t), mode).map(|r| r.duality_gap))
            .collect::<Result<_, _>>()?;
        let gaps_zero = gaps_zero && submarket_gaps.iter().all(|g| mode.is_zero(g));
        let constant_ratio = match price_constant_ratio(model, h, &vec![int(1); n_sub], mode) {
            Ok(r) => {
                let matches = mode.approx_eq(&r.price, &r.global_price);
                all_hold &= matches;
                json!({
                    "c": f.submarkets(model, &r.c),
                    "tau_max": model.submarket(r.tau_max).label,
                    "price": f.v(&r.price),
                    "global_price": f.v(&r.global_price),
                    "matches": matches,
                })
            }
            Err(e) => not_applicable(e)?,
        };
        all_hold &= ordering && certificates_hold && bounds.brackets(mode) && gaps_zero;
        per_claim.push(json!({
            "claim": claim.label,
            "prices": {
                "global": f.v(&global.price),
                "lower": f.v(&lower.price),
                "upper": f.v(&upper.price),
                "submarkets": f.submarkets(model, &lower.components),
            },
            "ordering": ordering,
            "certificates": certificates,
            "bounds": {"lower": f.v(&bounds.lower), "upper": f.v(&bounds.upper), "brackets": bounds.brackets(mode)},
            "gaps": {"global": f.v(&global.duality_gap), "submarkets": f.submarkets(model, &submarket_gaps)},
            "constant_ratio": constant_ratio,
        }));
    }
    let mut pairs = Vec::new();
    for a in 0..n_sub {
        for b in 0..n_sub {
            if a == b || model.submarket(a).dim != 1 || model.submarket(b).dim != 1 {
                continue;
            }
            let pair = [model.submarket(a).label.clone(), model.submarket(b).label.clone()];
            let entry = match pair_identities(model, a, b, mode) {
                Ok(r) => json!({"pair": pair, "all_hold": r.all_hold(mode), "identities": report::identities(&r, f)}),
                Err(e) => {
                    let mut v = not_applicable(e)?;
                    v["pair"] = json!(pair);
                    v
                }
            };
            pairs.push(entry);
        }
    }
    let two_market = match two_market_report(model, mode) {
        Ok(r) => {
            let formula = r.formula_matches(mode);
            let swap = r.swap_matches(mode);
            all_hold &= formula && swap.unwrap_or(true);
            json!({
                "global": f.vs(&r.global),
                "cross": f.vs(&r.cross),
                "own": f.vs(&r.own),
                "formula": f.vs(&r.formula),
                "formula_matches": formula,
                "hypothesis_holds": r.hypothesis_holds,
                "swap": f.v(&r.swap),
                "swap_closed_forms": r.swap_closed_forms.as_ref().map(|c| f.vs(c)),
                "swap_matches": swap,
                "ratio_range": f.vs(&r.ratio_range),
            })
        }
        Err(e) => not_applicable(e)?,
    };
    Ok((
        json!({
            "mode": if mode.is_exact() { "rational" } else { "float" },
            "claims": per_claim,
            "pair_identities": pairs,
            "two_market": two_market,
            "all_hold": all_hold,
        }),
        EXIT_OK,
    ))
}

fn fra(bi: &str, bm: &str, i: &str, m: &str) -> Outcome {
    let p = |s: &str| parse_rational(s).map_err(|e| Failure::new(EXIT_INVALID, e));
    let r = fra_rate(&p(bi)?, &p(bm)?, &p(i)?, &p(m)?)?;
    Ok((json!({"rate": format_float(to_f64(&r)), "exact": format_rational(&r)}), EXIT_OK))
}

fn cotrade(path: &Path, mode: Option<ModeArg>) -> Outcome {
    let loaded = load(path, mode)?;
    let (split, mode) = (&loaded.model, loaded.mode);
    let f = Fmt(mode);
    let merged = merge_submarkets(split)?;
    let split_outcome = check_global_nfl(split, mode)?;
    let merged_outcome = check_global_nfl(&merged, mode)?;
    let labels: Vec<String> = split.submarkets().iter().map(|s| format!("`{}`", s.label)).collect();
    let mut narrative = vec![format!(
        "split: {} traded in separate submarkets, no lending between them",
        labels.join(", ")
    )];
    narrative.push(if split_outcome.is_free() {
        "split: no arbitrage, a common deflator exists".to_string()
    } else {
        "split: arbitrage even without co-trading".to_string()
    });
    narrative.push(format!(
        "merged: every instrument traded against the numeraire of `{}`",
        split.submarket(0).label
    ));
    match merged_outcome.witness() {
        Some(w) => {
            let gains: Vec<String> = w
                .violating_atoms
                .iter()
                .map(|&k| format!("{} at `{}`", format_float(to_f64(&w.payoff[k])), merged.tree().atom_label(k)))
                .collect();
            narrative.push(format!("merged: a zero-cost strategy never loses and earns {}", gains.join(", ")));
        }
        None => narrative.push("merged: no arbitrage either".to_string()),
    }
    let code = if split_outcome.is_free() { EXIT_OK } else { EXIT_ARBITRAGE };
    Ok((
        json!({
            "narrative": narrative,
            "split": report::nfl(split, "global", &split_outcome, f),
            "merged": report::nfl(&merged, "global", &merged_outcome, f),
            "demonstrated": split_outcome.is_free() && !merged_outcome.is_free(),
        }),
        code,
    ))
}

fn gen(atoms: usize, submarkets: usize, seed: u64, periods: usize, dim: usize, arbitrage_free: bool) -> Outcome {
    if atoms < 2 || submarkets == 0 || periods == 0 || dim == 0 {
        return Err(Failure::new(EXIT_INVALID, "need at least 2 atoms, 1 submarket, 1 period and 1 asset"));
    }
    if atoms > 64 || periods > 8 {
        return Err(Failure::new(EXIT_INVALID, "at most 64 atoms and 8 periods"));
    }
    let cfg = RandomModelConfig {
        atoms: atoms..=atoms,
        periods: periods..=periods,
        submarkets: submarkets..=submarkets,
        dim: dim..=dim,
    };
    let model = if arbitrage_free {
        let mut found = None;
        for attempt in 0..64u64 {
            let candidate = arbitrage_free_model(&cfg, seed.wrapping_add(attempt << 32));
            if check_global_nfl(&candidate, NumericMode::Rational)?.is_free() {
                found = Some(candidate);
                break;
            }
        }
        found.ok_or_else(|| Failure::new(EXIT_ARBITRAGE, "no arbitrage-free sample found"))?
    } else {
        random_model(&cfg, seed)
    };
    let claim = random_claim(&model, seed);
    let doc = MarketSpecDocument::from_model(&model, &[claim], NumericMode::Rational);
    let value: Value = serde_json::to_value(&doc).expect("serialisable");
    Ok((value, EXIT_OK))
}
