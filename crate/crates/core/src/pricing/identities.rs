//! Closed-form price identities for one-asset submarkets, each evaluated on
//! both sides so the residual can be inspected.

use num_traits::Zero;

use super::{price, price_global, price_submarket, PriceReport, PricingError, Venue};
use crate::arbitrage::{optimise_over_measures, MeasureSelector};
use crate::lp::FractionalSense;
use crate::market::MarketModel;
use crate::numeric::{NumericMode, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct Identity {
    pub name: &'static str,
    pub lhs: Rational,
    pub rhs: Rational,
    pub residual: Rational,
}

impl Identity {
    fn new(name: &'static str, lhs: Rational, rhs: Rational) -> Self {
        Identity {
            name,
            residual: &lhs - &rhs,
            lhs,
            rhs,
        }
    }

    pub fn holds(&self, mode: NumericMode) -> bool {
        mode.approx_eq(&self.lhs, &self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub identities: Vec<Identity>,
}

impl IdentityReport {
    pub fn all_hold(&self, mode: NumericMode) -> bool {
        self.identities.iter().all(|i| i.holds(mode))
    }

    pub fn get(&self, name: &str) -> Option<&Identity> {
        self.identities.iter().find(|i| i.name == name)
    }
}

fn one_asset(model: &MarketModel, tau: usize) -> Result<(), PricingError> {
    if model.submarket(tau).dim != 1 {
        return Err(PricingError::DimensionNotOne(model.submarket(tau).label.clone()));
    }
    Ok(())
}

fn terminal(model: &MarketModel, tau: usize) -> Vec<Rational> {
    model.asset_claim(tau, 0).payoff
}

fn initial(model: &MarketModel, tau: usize) -> Rational {
    model.submarket(tau).assets[model.tree().root().0][0].clone()
}

fn minus(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `sup`/`inf` over the closed set of `selector` of `E_Q[h / Z]`.
fn extreme(model: &MarketModel, selector: &MeasureSelector, h: &[Rational], sense: FractionalSense, mode: NumericMode) -> Result<Rational, PricingError> {
    Ok(optimise_over_measures(model, selector, h, sense, mode)?.value)
}

/// Own-asset, cross-asset and basis-swap identities for the pair
/// `(tau, tbar)` of one-asset submarkets. They are exact when each
/// submarket's own measure set is a single point.
pub fn pair_identities(model: &MarketModel, tau: usize, tbar: usize, mode: NumericMode) -> Result<IdentityReport, PricingError> {
    one_asset(model, tau)?;
    one_asset(model, tbar)?;
    let s = terminal(model, tau);
    let sbar = terminal(model, tbar);
    let s0 = initial(model, tau);
    let swap = minus(&s, &sbar);
    let (r, rbar) = (model.growth(tau), model.growth(tbar));

    let own = price_submarket(model, &s, tau, mode)?.price;
    let cross = price_submarket(model, &s, tbar, mode)?.price;
    let other_own = price_submarket(model, &sbar, tbar, mode)?.price;
    let other_in_own = price_submarket(model, &sbar, tau, mode)?.price;
    let swap_other = price_submarket(model, &swap, tbar, mode)?.price;
    let swap_own = price_submarket(model, &swap, tau, mode)?.price;

    let sup_bar = extreme(model, &MeasureSelector::hat(model, tbar), &r, FractionalSense::Max, mode)?;
    let hat = MeasureSelector::hat(model, tau);
    let inf_own = extreme(model, &hat, &rbar, FractionalSense::Min, mode)?;
    let sup_own = extreme(model, &hat, &rbar, FractionalSense::Max, mode)?;

    Ok(IdentityReport {
        identities: vec![
            Identity::new("own_asset", own.clone(), s0.clone()),
            Identity::new("cross_asset_sup", cross.clone(), &s0 * &sup_bar),
            Identity::new("cross_asset_inf", cross.clone(), &s0 / &inf_own),
            Identity::new("swap_other_venue", swap_other.clone(), &cross - &other_own),
            Identity::new("swap_own_venue", swap_own.clone(), &inf_own * (&cross - &other_own)),
            Identity::new("swap_own_venue_ratio", swap_own.clone(), &own - &other_in_own * &inf_own / &sup_own),
            Identity::new("swap_price_ratio", &swap_other * &own, &cross * &swap_own),
        ],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantRatioReport {
    /// `E_Q[R_tau / Z_lambda]`, constant over the measure set.
    pub c: Vec<Rational>,
    pub tau_max: usize,
    /// `sup E_Q[H / Z_lambda]`.
    pub sup_value: Rational,
    pub price: Rational,
    /// Everything in `tau_max`.
    pub allocation: Vec<Rational>,
    pub global_price: Rational,
}

/// Closed-form global price when every numeraire growth has a constant
/// expectation over the combined-numeraire measures.
pub fn price_constant_ratio(model: &MarketModel, h: &[Rational], lambda: &[Rational], mode: NumericMode) -> Result<ConstantRatioReport, PricingError> {
    let selector = MeasureSelector::lc(model, lambda)?;
    let mut c = Vec::new();
    for t in 0..model.submarkets().len() {
        let g = model.growth(t);
        let hi = extreme(model, &selector, &g, FractionalSense::Max, mode)?;
        let lo = extreme(model, &selector, &g, FractionalSense::Min, mode)?;
        if !mode.approx_eq(&hi, &lo) {
            return Err(PricingError::ConditionNotMet(format!(
                "growth of `{}` ranges over [{}, {}]",
                model.submarket(t).label,
                crate::numeric::format_value(&lo, mode),
                crate::numeric::format_value(&hi, mode)
            )));
        }
        c.push(hi);
    }
    let mut tau_max = 0;
    for t in 1..c.len() {
        if c[t] > c[tau_max] {
            tau_max = t;
        }
    }
    let sup_value = extreme(model, &selector, h, FractionalSense::Max, mode)?;
    let clipped = if sup_value.is_zero() || sup_value < Rational::zero() { Rational::zero() } else { sup_value.clone() };
    let price = clipped / &c[tau_max];
    let mut allocation = vec![Rational::zero(); c.len()];
    allocation[tau_max] = price.clone();
    let global_price = price_global(model, h, mode)?.price;
    Ok(ConstantRatioReport {
        c,
        tau_max,
        sup_value,
        price,
        allocation,
        global_price,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoMarketReport {
    /// `pi(S1)`, `pi(S2)` from the global LP.
    pub global: [Rational; 2],
    /// `p^{tau2}(S1)`, `p^{tau1}(S2)`: sup over the global measures in the
    /// other submarket's numeraire.
    pub cross: [Rational; 2],
    /// `pi^{tau1}(S1)`, `pi^{tau2}(S2)`.
    pub own: [Rational; 2],
    /// `min(cross, own)` per asset.
    pub formula: [Rational; 2],
    /// `p^{tau2}(S1) >= pi^{tau2}(S2)`.
    pub hypothesis_holds: bool,
    /// `pi(S1 - S2)` from the global LP.
    pub swap: Rational,
    /// Both closed forms for the swap when the hypothesis holds.
    pub swap_closed_forms: Option<[Rational; 2]>,
    /// `inf` / `sup` of `E_Q[R1 / R2]` over the global measures in the
    /// numeraire of the second submarket.
    pub ratio_range: [Rational; 2],
}

impl TwoMarketReport {
    pub fn formula_matches(&self, mode: NumericMode) -> bool {
        (0..2).all(|i| mode.approx_eq(&self.global[i], &self.formula[i]))
    }

    pub fn swap_matches(&self, mode: NumericMode) -> Option<bool> {
        self.swap_closed_forms
            .as_ref()
            .map(|f| f.iter().all(|v| mode.approx_eq(v, &self.swap)))
    }
}

pub fn two_market_report(model: &MarketModel, mode: NumericMode) -> Result<TwoMarketReport, PricingError> {
    if model.submarkets().len() != 2 || model.submarkets().iter().any(|s| s.dim != 1) {
        return Err(PricingError::WrongShape);
    }
    let s = [terminal(model, 0), terminal(model, 1)];
    let global = [price_global(model, &s[0], mode)?.price, price_global(model, &s[1], mode)?.price];
    let cross = [
        extreme(model, &MeasureSelector::tau(model, 1), &s[0], FractionalSense::Max, mode)?,
        extreme(model, &MeasureSelector::tau(model, 0), &s[1], FractionalSense::Max, mode)?,
    ];
    let own = [price_submarket(model, &s[0], 0, mode)?.price, price_submarket(model, &s[1], 1, mode)?.price];
    let formula = [cross[0].clone().min(own[0].clone()), cross[1].clone().min(own[1].clone())];
    let hypothesis_holds = mode.le(&own[1], &cross[0]);
    let swap = price_global(model, &minus(&s[0], &s[1]), mode)?.price;

    let sel = MeasureSelector::tau(model, 1);
    let r1 = model.growth(0);
    let inf = extreme(model, &sel, &r1, FractionalSense::Min, mode)?;
    let sup = extreme(model, &sel, &r1, FractionalSense::Max, mode)?;
    let one = Rational::from_integer(1.into());
    let swap_closed_forms = hypothesis_holds.then(|| {
        let first = (&own[0] / &cross[0]).min(one.clone()) * (&cross[0] - &own[1]);
        let second = &global[0] - &global[1] * inf.clone().max(one.clone()) / sup.clone().max(one.clone());
        [first, second]
    });
    Ok(TwoMarketReport {
        global,
        cross,
        own,
        formula,
        hypothesis_holds,
        swap,
        swap_closed_forms,
        ratio_range: [inf, sup],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisSwapReport {
    pub report: PriceReport,
    /// Decomposition of the swap in a single-submarket venue.
    pub decomposition: Option<Identity>,
}

/// Prices `S_tau - S_tbar` in `venue`.
pub fn basis_swap_price(model: &MarketModel, tau: usize, tbar: usize, venue: Venue, mode: NumericMode) -> Result<BasisSwapReport, PricingError> {
    one_asset(model, tau)?;
    one_asset(model, tbar)?;
    let s = terminal(model, tau);
    let sbar = terminal(model, tbar);
    let swap = minus(&s, &sbar);
    let report = price(model, &swap, venue, mode)?;
    let decomposition = match venue {
        Venue::Submarket(v) if v == tbar => {
            let leg = price_submarket(model, &sbar, tbar, mode)?.price;
            let whole = price_submarket(model, &s, tbar, mode)?.price;
            Some(Identity::new("swap_plus_own_asset", &report.price + leg, whole))
        }
        Venue::Submarket(v) if v == tau => {
            let hat = MeasureSelector::hat(model, tau);
            let rbar = model.growth(tbar);
            let inf = extreme(model, &hat, &rbar, FractionalSense::Min, mode)?;
            let sup = extreme(model, &hat, &rbar, FractionalSense::Max, mode)?;
            let leg = price_submarket(model, &sbar, tau, mode)?.price;
            let whole = price_submarket(model, &s, tau, mode)?.price;
            Some(Identity::new("swap_plus_scaled_other_asset", leg * inf / sup + &report.price, whole))
        }
        _ => None,
    };
    Ok(BasisSwapReport { report, decomposition })
}
