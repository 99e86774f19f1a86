//! Superreplication prices.
//!
//! * `price_submarket`: hedge inside one submarket, financed by its numeraire.
//! * `price_lower` / `price_upper`: the cheapest / dearest single submarket.
//! * `price_global`: split the initial wealth over the submarkets, trade in
//!   all of them, never lend across them.
//!
//! Every price is computed twice: as the primal hedging LP and as the dual
//! program over deflators, and the gap is reported.

mod identities;

pub use identities::{
    basis_swap_price, pair_identities, price_constant_ratio, two_market_report, BasisSwapReport, ConstantRatioReport,
    Identity, IdentityReport, TwoMarketReport,
};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arbitrage::{optimise_over_measures, ArbitrageError, MeasureOptimum, MeasureSelector, SelectorCone};
use crate::gains::{global_gains, submarket_gains, GainsBasis, SimpleStrategy};
use crate::lp::{solve_lp, FractionalSense, LinearProgram, LpError, LpStatus, Relation, Sense, VarBound};
use crate::market::{Claim, MarketModel};
use crate::numeric::{NumericMode, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PricingError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Arbitrage(#[from] ArbitrageError),
    #[error("submarket `{0}` admits an arbitrage")]
    SubmarketArbitrage(String),
    #[error("the global market admits an arbitrage")]
    GlobalArbitrage,
    #[error("no finite superreplication price")]
    InfeasiblePrice,
    #[error("dual certificate evaluates to {value} instead of 0")]
    CertificateViolation { value: String },
    #[error("submarket `{0}` does not have exactly one asset")]
    DimensionNotOne(String),
    #[error("expected exactly two one-asset submarkets")]
    WrongShape,
    #[error("hypothesis not met: {0}")]
    ConditionNotMet(String),
    #[error("claim has {got} payoffs for {atoms} atoms")]
    ClaimShape { got: usize, atoms: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Venue {
    Global,
    Lower,
    Upper,
    Submarket(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceReport {
    pub venue: Venue,
    pub price: Rational,
    /// Initial wealth per submarket.
    pub allocation: Vec<Rational>,
    /// Risky positions of the hedge (numeraire holdings not filled in).
    pub hedge: SimpleStrategy,
    /// Terminal value of allocation plus hedge; dominates the claim.
    pub hedge_payoff: Vec<Rational>,
    pub dual_value: Rational,
    /// Optimal measure (single-submarket prices) or unnormalised deflator
    /// (global price) attaining the dual value.
    pub dual_witness: Vec<Rational>,
    /// The witness charges some atom with zero mass.
    pub boundary: bool,
    pub duality_gap: Rational,
    /// Per-submarket prices behind `Lower` / `Upper`.
    pub components: Vec<Rational>,
    /// Submarket attaining `Lower` / `Upper`.
    pub attained_by: Option<usize>,
}

fn check_claim(model: &MarketModel, h: &[Rational]) -> Result<(), PricingError> {
    if h.len() != model.atom_count() {
        return Err(PricingError::ClaimShape {
            got: h.len(),
            atoms: model.atom_count(),
        });
    }
    Ok(())
}

fn dominates(mode: NumericMode, v: &[Rational], h: &[Rational]) -> bool {
    v.iter().zip(h).all(|(a, b)| mode.le(b, a))
}

/// `min sum x` over `x >= 0` (or free) with `sum x_t R_t + W >= H`, `W` in
/// the span of `basis`. Returns the LP outcome with variables `[x.., c..]`.
fn hedging_lp(
    model: &MarketModel,
    h: &[Rational],
    submarkets: &[usize],
    basis: &GainsBasis,
    wealth_free: bool,
    mode: NumericMode,
) -> Result<crate::lp::LpOutcome, PricingError> {
    let k = submarkets.len();
    let m = basis.len();
    let mut objective = vec![Rational::one(); k];
    objective.extend(vec![Rational::zero(); m]);
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for j in 0..k + m {
        if j >= k || wealth_free {
            lp.set_bound(j, VarBound::free());
        }
    }
    let growth: Vec<Vec<Rational>> = submarkets.iter().map(|&t| model.growth(t)).collect();
    for (w, hw) in h.iter().enumerate() {
        let mut row: Vec<Rational> = growth.iter().map(|g| g[w].clone()).collect();
        row.extend(basis.vectors.iter().map(|g| g[w].clone()));
        lp.add(row, Relation::Ge, hw.clone());
    }
    Ok(solve_lp(&lp, mode)?)
}

/// Turns the optimal LP point into a report skeleton.
fn hedge_from(
    model: &MarketModel,
    h: &[Rational],
    submarkets: &[usize],
    basis: &GainsBasis,
    primal: &[Rational],
    mode: NumericMode,
) -> Result<(Vec<Rational>, SimpleStrategy, Vec<Rational>), PricingError> {
    let k = submarkets.len();
    let mut allocation = vec![Rational::zero(); model.submarkets().len()];
    for (j, &t) in submarkets.iter().enumerate() {
        allocation[t] = primal[j].clone();
    }
    let hedge = basis.strategy(model, &primal[k..]);
    let payoff = crate::gains::terminal_value(model, &allocation, &hedge).expect("shape checked");
    if !dominates(mode, &payoff, h) {
        return Err(LpError::NumericBreakdown("hedge does not superreplicate".into()).into());
    }
    Ok((allocation, hedge, payoff))
}

/// Price of `h` in submarket `tau` alone.
pub fn price_submarket(model: &MarketModel, h: &[Rational], tau: usize, mode: NumericMode) -> Result<PriceReport, PricingError> {
    check_claim(model, h)?;
    let basis = submarket_gains(model, tau).map_err(ArbitrageError::from)?;
    let label = model.submarket(tau).label.clone();
    let out = hedging_lp(model, h, &[tau], &basis, true, mode)?;
    match out.status {
        LpStatus::Optimal => {}
        LpStatus::Unbounded => return Err(PricingError::SubmarketArbitrage(label)),
        LpStatus::Infeasible => return Err(PricingError::InfeasiblePrice),
    }
    let price = out.objective.clone().expect("optimal");
    let (allocation, hedge, hedge_payoff) = hedge_from(model, h, &[tau], &basis, &out.primal, mode)?;
    let dual = match optimise_over_measures(model, &MeasureSelector::hat(model, tau), h, FractionalSense::Max, mode) {
        Err(ArbitrageError::EmptyMeasureSet) => return Err(PricingError::SubmarketArbitrage(label)),
        other => other?,
    };
    Ok(PriceReport {
        venue: Venue::Submarket(tau),
        duality_gap: &price - &dual.value,
        price,
        allocation,
        hedge,
        hedge_payoff,
        dual_value: dual.value,
        dual_witness: dual.measure,
        boundary: dual.boundary,
        components: Vec::new(),
        attained_by: None,
    })
}

fn extreme_submarket(model: &MarketModel, h: &[Rational], lower: bool, mode: NumericMode) -> Result<PriceReport, PricingError> {
    let reports = (0..model.submarkets().len())
        .map(|t| price_submarket(model, h, t, mode))
        .collect::<Result<Vec<_>, _>>()?;
    let components: Vec<Rational> = reports.iter().map(|r| r.price.clone()).collect();
    let mut best = 0;
    for (t, p) in components.iter().enumerate().skip(1) {
        let better = if lower { p < &components[best] } else { p > &components[best] };
        if better {
            best = t;
        }
    }
    let mut report = reports.into_iter().nth(best).expect("at least one submarket");
    report.venue = if lower { Venue::Lower } else { Venue::Upper };
    report.components = components;
    report.attained_by = Some(best);
    Ok(report)
}

/// Cheapest single submarket; ties go to the first declared.
pub fn price_lower(model: &MarketModel, h: &[Rational], mode: NumericMode) -> Result<PriceReport, PricingError> {
    extreme_submarket(model, h, true, mode)
}

/// Dearest single submarket; ties go to the first declared.
pub fn price_upper(model: &MarketModel, h: &[Rational], mode: NumericMode) -> Result<PriceReport, PricingError> {
    extreme_submarket(model, h, false, mode)
}

/// `max E[mu H]` over `mu >= 0` orthogonal to all gains with
/// `E[mu R_tau] <= 1` for every submarket (`mu` already P-weighted).
pub fn global_dual(model: &MarketModel, h: &[Rational], mode: NumericMode) -> Result<(Rational, Vec<Rational>), PricingError> {
    let basis = global_gains(model);
    let mut lp = LinearProgram::new(Sense::Maximize, h.to_vec());
    for g in &basis.vectors {
        lp.add(g.clone(), Relation::Eq, Rational::zero());
    }
    for t in 0..model.submarkets().len() {
        lp.add(model.growth(t), Relation::Le, Rational::one());
    }
    let out = solve_lp(&lp, mode)?;
    match out.status {
        LpStatus::Optimal => Ok((out.objective.expect("optimal"), out.primal)),
        LpStatus::Unbounded => Err(PricingError::GlobalArbitrage),
        LpStatus::Infeasible => Err(PricingError::InfeasiblePrice),
    }
}

/// Price with wealth split across submarkets.
pub fn price_global(model: &MarketModel, h: &[Rational], mode: NumericMode) -> Result<PriceReport, PricingError> {
    check_claim(model, h)?;
    let basis = global_gains(model);
    let all: Vec<usize> = (0..model.submarkets().len()).collect();
    let out = hedging_lp(model, h, &all, &basis, false, mode)?;
    match out.status {
        LpStatus::Optimal => {}
        LpStatus::Unbounded => return Err(PricingError::GlobalArbitrage),
        LpStatus::Infeasible => return Err(PricingError::InfeasiblePrice),
    }
    let price = out.objective.clone().expect("optimal");
    let (allocation, hedge, hedge_payoff) = hedge_from(model, h, &all, &basis, &out.primal, mode)?;
    let (dual_value, mu) = global_dual(model, h, mode)?;
    let p = model.tree().atom_probs();
    let deflator: Vec<Rational> = mu.iter().zip(p).map(|(m, pk)| m / pk).collect();
    let boundary = deflator.iter().any(|v| !mode.is_positive(v));
    Ok(PriceReport {
        venue: Venue::Global,
        duality_gap: &price - &dual_value,
        price,
        allocation,
        hedge,
        hedge_payoff,
        dual_value,
        dual_witness: deflator,
        boundary,
        components: Vec::new(),
        attained_by: None,
    })
}

pub fn price(model: &MarketModel, h: &[Rational], venue: Venue, mode: NumericMode) -> Result<PriceReport, PricingError> {
    match venue {
        Venue::Global => price_global(model, h, mode),
        Venue::Lower => price_lower(model, h, mode),
        Venue::Upper => price_upper(model, h, mode),
        Venue::Submarket(t) => price_submarket(model, h, t, mode),
    }
}

pub fn price_claim(model: &MarketModel, claim: &Claim, venue: Venue, mode: NumericMode) -> Result<PriceReport, PricingError> {
    price(model, &claim.payoff, venue, mode)
}

/// Whether fixed initial wealths `x` can superreplicate `h` with some
/// global strategy.
pub fn allocation_superreplicates(model: &MarketModel, h: &[Rational], x: &[Rational], mode: NumericMode) -> Result<bool, PricingError> {
    let basis = global_gains(model);
    let m = basis.len();
    let mut lp = LinearProgram::new(Sense::Minimize, vec![Rational::zero(); m]);
    for j in 0..m {
        lp.set_bound(j, VarBound::free());
    }
    for (w, hw) in h.iter().enumerate() {
        let funded: Rational = x.iter().enumerate().map(|(t, xt)| xt * &model.growth(t)[w]).sum();
        let row = basis.vectors.iter().map(|g| g[w].clone()).collect();
        lp.add(row, Relation::Ge, hw - funded);
    }
    Ok(solve_lp(&lp, mode)?.status == LpStatus::Optimal)
}

/// `sup` over the closed combined-numeraire measure set of
/// `E_Q[(H - sum_tau x_tau R_tau) / Z_lambda]`.
pub fn dual_certificate_value(
    model: &MarketModel,
    h: &[Rational],
    xhat: &[Rational],
    lambda: &[Rational],
    mode: NumericMode,
) -> Result<Rational, PricingError> {
    check_claim(model, h)?;
    let selector = MeasureSelector::lc(model, lambda)?;
    let net: Vec<Rational> = (0..model.atom_count())
        .map(|w| {
            let funded: Rational = xhat.iter().enumerate().map(|(t, x)| x * &model.growth(t)[w]).sum();
            &h[w] - funded
        })
        .collect();
    Ok(optimise_over_measures(model, &selector, &net, FractionalSense::Max, mode)?.value)
}

/// As [`dual_certificate_value`], failing unless the value is zero.
pub fn dual_certificate_global(
    model: &MarketModel,
    h: &[Rational],
    xhat: &[Rational],
    lambda: &[Rational],
    mode: NumericMode,
) -> Result<Rational, PricingError> {
    let value = dual_certificate_value(model, h, xhat, lambda, mode)?;
    if !mode.is_zero(&value) {
        return Err(PricingError::CertificateViolation {
            value: crate::numeric::format_value(&value, mode),
        });
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualBounds {
    /// `sup E_Q[H / max_tau R_tau]` over the max-numeraire measures.
    pub lower: Rational,
    /// `sup E_Q[H / min_tau R_tau]` over the min-numeraire measures.
    pub upper: Rational,
    pub price: Rational,
}

impl DualBounds {
    pub fn brackets(&self, mode: NumericMode) -> bool {
        mode.le(&self.lower, &self.price) && mode.le(&self.price, &self.upper)
    }
}

pub fn dual_bounds_global(model: &MarketModel, h: &[Rational], mode: NumericMode) -> Result<DualBounds, PricingError> {
    let price = price_global(model, h, mode)?.price;
    let lower = optimise_over_measures(model, &MeasureSelector::max(model), h, FractionalSense::Max, mode)?.value;
    let upper = optimise_over_measures(model, &MeasureSelector::min(model), h, FractionalSense::Max, mode)?.value;
    Ok(DualBounds { lower, upper, price })
}

/// `sup E_Q[H / Z]` over the closed set selected by `cone` and `z`.
pub fn price_fractional(
    model: &MarketModel,
    h: &[Rational],
    z: &[Rational],
    cone: SelectorCone,
    mode: NumericMode,
) -> Result<MeasureOptimum, PricingError> {
    check_claim(model, h)?;
    let selector = MeasureSelector::new(cone, z.to_vec())?;
    Ok(optimise_over_measures(model, &selector, h, FractionalSense::Max, mode)?)
}

/// `1 / inf E_Q[Z / H]` over the measures with weight `H`; equals
/// [`price_fractional`] when `H > 0`.
pub fn price_fractional_reciprocal(
    model: &MarketModel,
    h: &[Rational],
    z: &[Rational],
    cone: SelectorCone,
    mode: NumericMode,
) -> Result<Rational, PricingError> {
    check_claim(model, h)?;
    let selector = MeasureSelector::new(cone, h.to_vec())?;
    let inf = optimise_over_measures(model, &selector, z, FractionalSense::Min, mode)?.value;
    if !inf.is_positive() {
        return Err(PricingError::InfeasiblePrice);
    }
    Ok(Rational::one() / inf)
}
