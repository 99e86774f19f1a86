//! No-arbitrage checks, deflator extraction and the associated measures.
//!
//! A deflator is a strictly positive `X` with `E[X g] = 0` for every gain
//! vector `g`. It is assembled atom by atom: for each atom we maximise the
//! mass a non-negative orthogonal `X` can put there. When every atom admits
//! positive mass the average of the maximisers is strictly positive; when
//! one does not, the dual of that LP is a gain vector that is non-negative
//! and positive on the atom, i.e. an arbitrage.

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::gains::{global_gains, submarket_gains, terminal_value, GainsBasis, GainsError, SimpleStrategy};
use crate::lp::{solve_fractional, solve_lp, Cone, FractionalSense, LinearProgram, LpError, Relation, Sense, VarBound};
use crate::market::MarketModel;
use crate::numeric::{NumericMode, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArbitrageError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Gains(#[from] GainsError),
    #[error("weight is not strictly positive at atom {atom}")]
    NonPositiveWeight { atom: usize },
    #[error("weights must be non-negative with a strictly positive combination")]
    InvalidLambda,
    #[error("the market admits an arbitrage")]
    ArbitrageExists(Box<ArbitrageWitness>),
    #[error("the measure set is empty")]
    EmptyMeasureSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeflatorCertificate {
    /// Strictly positive, `E[X*] = 1`.
    pub xstar: Vec<Rational>,
    /// Maximiser of each atom's LP.
    pub per_atom_solutions: Vec<Vec<Rational>>,
    /// Gain vectors orthogonality was checked against.
    pub basis_checked: Vec<Vec<Rational>>,
}

impl DeflatorCertificate {
    /// Positivity, normalisation and orthogonality to `basis_checked`.
    pub fn verify(&self, model: &MarketModel, mode: NumericMode) -> bool {
        let tree = model.tree();
        let positive = self.xstar.iter().all(|x| mode.is_positive(x));
        let mean = tree.expectation(&self.xstar);
        let orthogonal = self.basis_checked.iter().all(|g| {
            let e: Rational = (0..g.len()).map(|k| &tree.atom_probs()[k] * &self.xstar[k] * &g[k]).sum();
            mode.is_zero(&e)
        });
        positive && mode.approx_eq(&mean, &Rational::one()) && orthogonal
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArbitrageWitness {
    /// Zero initial wealth in every submarket.
    pub strategy: SimpleStrategy,
    /// Weight on each gain direction of the basis the check ran against.
    pub coefficients: Vec<Rational>,
    pub payoff: Vec<Rational>,
    pub violating_atoms: Vec<usize>,
    /// Submarkets with a non-zero position.
    pub submarkets_used: Vec<usize>,
}

impl ArbitrageWitness {
    fn build(model: &MarketModel, basis: &GainsBasis, coefficients: Vec<Rational>, mode: NumericMode) -> Option<Self> {
        let strategy = basis.strategy(model, &coefficients);
        let zero = vec![Rational::zero(); model.submarkets().len()];
        let payoff = terminal_value(model, &zero, &strategy).ok()?;
        let violating_atoms: Vec<usize> = (0..payoff.len()).filter(|&k| mode.is_positive(&payoff[k])).collect();
        let submarkets_used = (0..model.submarkets().len())
            .filter(|&t| strategy.positions[t].iter().flatten().any(|v| !v.is_zero()))
            .collect();
        let w = ArbitrageWitness {
            strategy,
            coefficients,
            payoff,
            violating_atoms,
            submarkets_used,
        };
        w.verify(model, mode).then_some(w)
    }

    /// Zero cost, payoff reproduced by the strategy, non-negative and
    /// positive somewhere.
    pub fn verify(&self, model: &MarketModel, mode: NumericMode) -> bool {
        let zero = vec![Rational::zero(); model.submarkets().len()];
        let Ok(replay) = terminal_value(model, &zero, &self.strategy) else {
            return false;
        };
        replay == self.payoff
            && self.payoff.iter().all(|v| !v.is_negative() || mode.is_zero(v))
            && self.payoff.iter().any(|v| mode.is_positive(v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NflOutcome {
    Free(DeflatorCertificate),
    Arbitrage(ArbitrageWitness),
}

impl NflOutcome {
    pub fn is_free(&self) -> bool {
        matches!(self, NflOutcome::Free(_))
    }

    pub fn certificate(&self) -> Option<&DeflatorCertificate> {
        match self {
            NflOutcome::Free(c) => Some(c),
            NflOutcome::Arbitrage(_) => None,
        }
    }

    pub fn witness(&self) -> Option<&ArbitrageWitness> {
        match self {
            NflOutcome::Free(_) => None,
            NflOutcome::Arbitrage(w) => Some(w),
        }
    }
}

/// `E[X g]` as a row acting on `X`.
fn weighted_rows(model: &MarketModel, basis: &GainsBasis) -> Vec<Vec<Rational>> {
    let p = model.tree().atom_probs();
    basis
        .vectors
        .iter()
        .map(|g| g.iter().zip(p).map(|(gk, pk)| gk * pk).collect())
        .collect()
}

/// Exhaustion over the atoms against an arbitrary gains basis.
pub fn exhaust(model: &MarketModel, basis: &GainsBasis, mode: NumericMode) -> Result<NflOutcome, ArbitrageError> {
    let tree = model.tree();
    let n = tree.atom_count();
    let rows = weighted_rows(model, basis);
    let mut solutions = Vec::with_capacity(n);
    for atom in 0..n {
        let mut objective = vec![Rational::zero(); n];
        objective[atom] = Rational::one();
        let mut lp = LinearProgram::new(Sense::Maximize, objective);
        for row in &rows {
            lp.add(row.clone(), Relation::Eq, Rational::zero());
        }
        lp.add(tree.atom_probs().to_vec(), Relation::Le, Rational::one());
        let out = solve_lp(&lp, mode)?;
        let value = out.objective.clone().unwrap_or_else(Rational::zero);
        if mode.is_positive(&value) {
            solutions.push(out.primal);
            continue;
        }
        let coefficients = out.duals[..rows.len()].to_vec();
        return match ArbitrageWitness::build(model, basis, coefficients, mode) {
            Some(w) => Ok(NflOutcome::Arbitrage(w)),
            None => Err(LpError::NumericBreakdown("dual witness failed verification".into()).into()),
        };
    }
    let count = Rational::from_integer(n.into());
    let mut avg = vec![Rational::zero(); n];
    for s in &solutions {
        for (a, v) in avg.iter_mut().zip(s) {
            *a += v / &count;
        }
    }
    let mean = tree.expectation(&avg);
    let xstar: Vec<Rational> = avg.iter().map(|a| a / &mean).collect();
    let cert = DeflatorCertificate {
        xstar,
        per_atom_solutions: solutions,
        basis_checked: basis.vectors.clone(),
    };
    if !cert.verify(model, mode) {
        return Err(LpError::NumericBreakdown("deflator failed verification".into()).into());
    }
    Ok(NflOutcome::Free(cert))
}

/// No-arbitrage for the whole market, trading in every submarket at once.
pub fn check_global_nfl(model: &MarketModel, mode: NumericMode) -> Result<NflOutcome, ArbitrageError> {
    exhaust(model, &global_gains(model), mode)
}

/// No-arbitrage of submarket `tau` on its own.
pub fn check_submarket_nfl(model: &MarketModel, tau: usize, mode: NumericMode) -> Result<NflOutcome, ArbitrageError> {
    exhaust(model, &submarket_gains(model, tau)?, mode)
}

pub fn extract_deflator(model: &MarketModel, mode: NumericMode) -> Result<DeflatorCertificate, ArbitrageError> {
    match check_global_nfl(model, mode)? {
        NflOutcome::Free(c) => Ok(c),
        NflOutcome::Arbitrage(w) => Err(ArbitrageError::ArbitrageExists(Box::new(w))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectArbitrage {
    /// `max sum W` over attainable `0 <= W <= 1`.
    pub optimum: Rational,
    pub witness: Option<ArbitrageWitness>,
}

/// Searches for an arbitrage directly in the primal: maximise the total
/// payoff of a zero-cost gain capped at one per atom.
pub fn direct_arbitrage_lp(model: &MarketModel, mode: NumericMode) -> Result<DirectArbitrage, ArbitrageError> {
    let basis = global_gains(model);
    let n = model.atom_count();
    let m = basis.len();
    let mut objective = vec![Rational::zero(); m];
    objective.extend(vec![Rational::one(); n]);
    let mut lp = LinearProgram::new(Sense::Maximize, objective);
    for j in 0..m {
        lp.set_bound(j, VarBound::free());
    }
    for j in 0..n {
        lp.set_bound(
            m + j,
            VarBound {
                lower: Some(Rational::zero()),
                upper: Some(Rational::one()),
            },
        );
    }
    for k in 0..n {
        let mut row: Vec<Rational> = basis.vectors.iter().map(|g| -&g[k]).collect();
        row.extend((0..n).map(|j| if j == k { Rational::one() } else { Rational::zero() }));
        lp.add(row, Relation::Eq, Rational::zero());
    }
    let out = solve_lp(&lp, mode)?;
    let optimum = out.objective.clone().expect("bounded and feasible");
    let witness = if mode.is_positive(&optimum) {
        let w = ArbitrageWitness::build(model, &basis, out.primal[..m].to_vec(), mode);
        if w.is_none() {
            return Err(LpError::NumericBreakdown("direct witness failed verification".into()).into());
        }
        w
    } else {
        None
    };
    Ok(DirectArbitrage { optimum, witness })
}

/// `Q_Z = P X* Z / E[X* Z]`.
pub fn measure_from_weight(model: &MarketModel, cert: &DeflatorCertificate, z: &[Rational]) -> Result<Vec<Rational>, ArbitrageError> {
    if let Some(atom) = z.iter().position(|v| !v.is_positive()) {
        return Err(ArbitrageError::NonPositiveWeight { atom });
    }
    let p = model.tree().atom_probs();
    let w: Vec<Rational> = (0..z.len()).map(|k| &p[k] * &cert.xstar[k] * &z[k]).collect();
    let total: Rational = w.iter().sum();
    Ok(w.into_iter().map(|v| v / &total).collect())
}

/// The risk-neutral measure of submarket `tau` built from the deflator.
pub fn martingale_measure(model: &MarketModel, cert: &DeflatorCertificate, tau: usize) -> Vec<Rational> {
    measure_from_weight(model, cert, &model.growth(tau)).expect("numeraires are positive")
}

/// `D(n) = E[X* S^0_T | n] / S^0(n)` for every node.
pub fn state_price_deflator(model: &MarketModel, cert: &DeflatorCertificate, tau: usize) -> Vec<Rational> {
    let tree = model.tree();
    let sm = model.submarket(tau);
    let xs: Vec<Rational> = (0..tree.atom_count())
        .map(|k| &cert.xstar[k] * &sm.numeraire[tree.leaves()[k].0])
        .collect();
    tree.nodes()
        .iter()
        .map(|n| tree.conditional_expectation(n.id, &xs) / &sm.numeraire[n.id.0])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "submarket", rename_all = "snake_case")]
pub enum SelectorCone {
    Global,
    Submarket(usize),
}

/// A closed measure set: `q >= 0`, `sum q = 1`, and `q / Z` orthogonal to the
/// gains of the cone.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSelector {
    pub cone: SelectorCone,
    pub weight: Vec<Rational>,
}

impl MeasureSelector {
    pub fn new(cone: SelectorCone, weight: Vec<Rational>) -> Result<Self, ArbitrageError> {
        if let Some(atom) = weight.iter().position(|v| !v.is_positive()) {
            return Err(ArbitrageError::NonPositiveWeight { atom });
        }
        Ok(MeasureSelector { cone, weight })
    }

    /// Measures making submarket `tau` alone a martingale.
    pub fn hat(model: &MarketModel, tau: usize) -> Self {
        MeasureSelector {
            cone: SelectorCone::Submarket(tau),
            weight: model.growth(tau),
        }
    }

    /// Measures of the global cone in the numeraire of `tau`.
    pub fn tau(model: &MarketModel, tau: usize) -> Self {
        MeasureSelector {
            cone: SelectorCone::Global,
            weight: model.growth(tau),
        }
    }

    /// Weight `sum_tau lambda_tau * growth_tau`.
    pub fn lc(model: &MarketModel, lambda: &[Rational]) -> Result<Self, ArbitrageError> {
        if lambda.len() != model.submarkets().len() || lambda.iter().any(Signed::is_negative) {
            return Err(ArbitrageError::InvalidLambda);
        }
        let z = combined_growth(model, lambda);
        if z.iter().any(|v| !v.is_positive()) {
            return Err(ArbitrageError::InvalidLambda);
        }
        Ok(MeasureSelector {
            cone: SelectorCone::Global,
            weight: z,
        })
    }

    pub fn max(model: &MarketModel) -> Self {
        MeasureSelector {
            cone: SelectorCone::Global,
            weight: growth_extreme(model, true),
        }
    }

    pub fn min(model: &MarketModel) -> Self {
        MeasureSelector {
            cone: SelectorCone::Global,
            weight: growth_extreme(model, false),
        }
    }

    pub fn basis(&self, model: &MarketModel) -> Result<GainsBasis, ArbitrageError> {
        Ok(match self.cone {
            SelectorCone::Global => global_gains(model),
            SelectorCone::Submarket(t) => submarket_gains(model, t)?,
        })
    }

    /// Rows `g / Z` acting on `q`.
    pub fn constraint_rows(&self, model: &MarketModel) -> Result<Vec<Vec<Rational>>, ArbitrageError> {
        Ok(self
            .basis(model)?
            .vectors
            .iter()
            .map(|g| g.iter().zip(&self.weight).map(|(a, z)| a / z).collect())
            .collect())
    }
}

pub fn combined_growth(model: &MarketModel, lambda: &[Rational]) -> Vec<Rational> {
    let mut z = vec![Rational::zero(); model.atom_count()];
    for (tau, l) in lambda.iter().enumerate() {
        if l.is_zero() {
            continue;
        }
        for (zk, g) in z.iter_mut().zip(model.growth(tau)) {
            *zk += l * g;
        }
    }
    z
}

/// Atom-wise max (or min) of the numeraire growths.
pub fn growth_extreme(model: &MarketModel, max: bool) -> Vec<Rational> {
    let all: Vec<Vec<Rational>> = (0..model.submarkets().len()).map(|t| model.growth(t)).collect();
    (0..model.atom_count())
        .map(|k| {
            let it = all.iter().map(|g| g[k].clone());
            if max {
                it.max().expect("at least one submarket")
            } else {
                it.min().expect("at least one submarket")
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    /// In the closed set.
    pub member: bool,
    /// Member and every atom charged.
    pub equivalent: bool,
    /// `sum q - 1` followed by one martingale residual per gain vector.
    pub residuals: Vec<Rational>,
}

pub fn check_measure_membership(
    model: &MarketModel,
    q: &[Rational],
    selector: &MeasureSelector,
    mode: NumericMode,
) -> Result<MembershipReport, ArbitrageError> {
    let rows = selector.constraint_rows(model)?;
    let mass: Rational = q.iter().sum();
    let mut residuals = vec![mass - Rational::one()];
    residuals.extend(rows.iter().map(|r| r.iter().zip(q).map(|(a, b)| a * b).sum::<Rational>()));
    let within = |r: &Rational| match mode {
        NumericMode::Rational => r.is_zero(),
        NumericMode::Float { .. } => crate::numeric::to_f64(r).abs() <= 1e-8,
    };
    let nonneg = q.iter().all(|v| !v.is_negative() || mode.is_zero(v));
    let member = q.len() == model.atom_count() && nonneg && residuals.iter().all(within);
    let equivalent = member && q.iter().all(|v| mode.is_positive(v));
    Ok(MembershipReport {
        member,
        equivalent,
        residuals,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureOptimum {
    pub value: Rational,
    /// An optimising measure; `boundary` when it charges some atom with zero.
    pub measure: Vec<Rational>,
    pub boundary: bool,
}

/// `sup` (or `inf`) over the closed set of `E_Q[h / Z]`, computed as the
/// linear-fractional program `E[X h] / E[X Z]` over the deflator cone.
pub fn optimise_over_measures(
    model: &MarketModel,
    selector: &MeasureSelector,
    h: &[Rational],
    sense: FractionalSense,
    mode: NumericMode,
) -> Result<MeasureOptimum, ArbitrageError> {
    let basis = selector.basis(model)?;
    let p = model.tree().atom_probs();
    let cone = Cone::new(model.atom_count(), weighted_rows(model, &basis));
    let num: Vec<Rational> = h.iter().zip(p).map(|(a, b)| a * b).collect();
    let den: Vec<Rational> = selector.weight.iter().zip(p).map(|(a, b)| a * b).collect();
    let out = match solve_fractional(&num, &den, &cone, sense, mode) {
        Err(LpError::DegenerateDenominator) => return Err(ArbitrageError::EmptyMeasureSet),
        other => other?,
    };
    let value = out.value.expect("bounded: the denominator is positive on the cone");
    let measure: Vec<Rational> = out.witness.iter().zip(&den).map(|(y, d)| y * d).collect();
    let boundary = measure.iter().any(|v| !mode.is_positive(v));
    Ok(MeasureOptimum {
        value,
        measure,
        boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{m1, m2, single_classical};
    use crate::generate::{arbitrage_free_model, mixed_model, RandomModelConfig};
    use crate::market::Submarket;
    use crate::numeric::{int, ratio};
    use proptest::prelude::*;

    const R: NumericMode = NumericMode::Rational;

    #[test]
    fn m2_deflator_is_unique_ray() {
        let m = m2();
        let cert = extract_deflator(&m, R).unwrap();
        assert_eq!(cert.xstar, vec![ratio(2, 3), ratio(4, 3)]);
        for s in &cert.per_atom_solutions {
            assert_eq!(&s[1], &(&s[0] * int(2)));
        }
        assert!(cert.verify(&m, R));
        let float = extract_deflator(&m, NumericMode::float()).unwrap();
        assert!(NumericMode::float().approx_eq(&float.xstar[0], &ratio(2, 3)));
    }

    #[test]
    fn m2_submarkets_pass() {
        let m = m2();
        let c = check_submarket_nfl(&m, 0, R).unwrap();
        assert_eq!(c.certificate().unwrap().xstar, vec![ratio(2, 3), ratio(4, 3)]);
        assert!(check_submarket_nfl(&m, 1, R).unwrap().is_free());
    }

    #[test]
    fn m1_fails_only_globally() {
        let m = m1();
        assert!(check_submarket_nfl(&m, 0, R).unwrap().is_free());
        assert!(check_submarket_nfl(&m, 1, R).unwrap().is_free());
        let out = check_global_nfl(&m, R).unwrap();
        let w = out.witness().expect("cross-submarket arbitrage");
        assert!(w.verify(&m, R));
        assert_eq!(w.submarkets_used, vec![0, 1]);
        match extract_deflator(&m, R) {
            Err(ArbitrageError::ArbitrageExists(w)) => assert!(!w.violating_atoms.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
        let direct = direct_arbitrage_lp(&m, R).unwrap();
        assert!(direct.optimum.is_positive());
        assert!(direct.witness.unwrap().verify(&m, R));
    }

    #[test]
    fn increasing_asset_is_an_arbitrage() {
        let m = single_classical();
        let mut sm = m.submarket(0).clone();
        sm.assets = vec![vec![int(4)], vec![int(6)], vec![int(5)]];
        let up = m.with_submarkets(vec![sm]).unwrap();
        let out = check_submarket_nfl(&up, 0, R).unwrap();
        let w = out.witness().unwrap();
        assert!(w.coefficients[0].is_positive());
        assert_eq!(w.violating_atoms, vec![0, 1]);
    }

    #[test]
    fn constant_prices_give_unit_deflator() {
        let m = single_classical();
        let sm = Submarket {
            assets: vec![vec![int(4)]; 3],
            ..m.submarket(0).clone()
        };
        let flat = m.with_submarkets(vec![sm]).unwrap();
        assert_eq!(extract_deflator(&flat, R).unwrap().xstar, vec![int(1), int(1)]);
    }

    #[test]
    fn m2_measures() {
        let m = m2();
        let cert = extract_deflator(&m, R).unwrap();
        assert_eq!(martingale_measure(&m, &cert, 0), vec![ratio(1, 3), ratio(2, 3)]);
        let q2 = martingale_measure(&m, &cert, 1);
        assert_eq!(q2, vec![ratio(3, 8), ratio(5, 8)]);
        assert_eq!(&q2[0] * int(6) + &q2[1] * ratio(22, 5), int(5));
        let d = state_price_deflator(&m, &cert, 1);
        assert_eq!(d[0], ratio(16, 15));
        let tree = m.tree();
        let lhs: Rational = (0..2)
            .map(|k| &tree.atom_probs()[k] * &cert.xstar[k] * &m.submarket(1).assets[tree.leaves()[k].0][0])
            .sum();
        assert_eq!(lhs, ratio(16, 15) * int(5));
        assert_eq!(measure_from_weight(&m, &cert, &[int(1), int(1)]).unwrap(), vec![ratio(1, 3), ratio(2, 3)]);
        let zmax = growth_extreme(&m, true);
        assert_eq!(zmax, vec![ratio(6, 5), int(1)]);
        assert_eq!(measure_from_weight(&m, &cert, &zmax).unwrap(), q2);
        assert!(matches!(
            measure_from_weight(&m, &cert, &[int(0), int(1)]),
            Err(ArbitrageError::NonPositiveWeight { atom: 0 })
        ));
    }

    #[test]
    fn m2_membership() {
        let m = m2();
        let cert = extract_deflator(&m, R).unwrap();
        let q = martingale_measure(&m, &cert, 1);
        let rep = check_measure_membership(&m, &q, &MeasureSelector::tau(&m, 1), R).unwrap();
        assert!(rep.member && rep.equivalent);
        assert!(rep.residuals.iter().all(Zero::is_zero));
        let half = vec![ratio(1, 2), ratio(1, 2)];
        let rep = check_measure_membership(&m, &half, &MeasureSelector::hat(&m, 0), R).unwrap();
        assert!(!rep.member);
        assert_eq!(rep.residuals[1], ratio(1, 2));
    }

    #[test]
    fn boundary_measure_is_flagged() {
        let m = single_classical();
        let flat = m
            .with_submarkets(vec![Submarket {
                assets: vec![vec![int(4)]; 3],
                ..m.submarket(0).clone()
            }])
            .unwrap();
        let q = vec![int(1), int(0)];
        let rep = check_measure_membership(&flat, &q, &MeasureSelector::hat(&flat, 0), R).unwrap();
        assert!(rep.member);
        assert!(!rep.equivalent);
    }

    #[test]
    fn optimise_matches_unique_measure() {
        let m = m2();
        let h = vec![int(6), int(3)];
        let sup = optimise_over_measures(&m, &MeasureSelector::hat(&m, 1), &h, FractionalSense::Max, R).unwrap();
        assert_eq!(sup.value, ratio(15, 4));
        assert_eq!(sup.measure, vec![ratio(3, 8), ratio(5, 8)]);
        assert!(!sup.boundary);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn both_arbitrage_tests_agree(seed in 0u64..100_000) {
            let model = mixed_model(&RandomModelConfig::small(), seed);
            let out = check_global_nfl(&model, R).unwrap();
            let direct = direct_arbitrage_lp(&model, R).unwrap();
            prop_assert_eq!(out.is_free(), direct.optimum.is_zero());
            match out {
                NflOutcome::Free(c) => prop_assert!(c.verify(&model, R)),
                NflOutcome::Arbitrage(w) => prop_assert!(w.verify(&model, R)),
            }
        }

        #[test]
        fn martingale_measures_kill_one_step_gains(seed in 0u64..100_000) {
            let model = arbitrage_free_model(&RandomModelConfig::small(), seed);
            let cert = extract_deflator(&model, R).unwrap();
            for tau in 0..model.submarkets().len() {
                let q = martingale_measure(&model, &cert, tau);
                let rep = check_measure_membership(&model, &q, &MeasureSelector::tau(&model, tau), R).unwrap();
                prop_assert!(rep.equivalent);
                let hat = check_measure_membership(&model, &q, &MeasureSelector::hat(&model, tau), R).unwrap();
                prop_assert!(hat.equivalent);
            }
        }

        #[test]
        fn deflator_kills_stopping_time_gains(seed in 0u64..100_000) {
            let mut cfg = RandomModelConfig::small();
            cfg.periods = 2..=3;
            let model = arbitrage_free_model(&cfg, seed);
            let cert = extract_deflator(&model, R).unwrap();
            let tree = model.tree();
            let b1 = crate::tree::sample_stopping_times(tree, 1, seed).remove(0);
            let b2 = crate::tree::sample_later_stopping_time(tree, &b1, seed ^ 77);
            for sm in model.submarkets() {
                let e: Rational = (0..tree.atom_count())
                    .map(|k| {
                        let n1 = b1.node_for_atom(tree, k);
                        let n2 = b2.node_for_atom(tree, k);
                        let phi = Rational::from_integer(((n1.0 % 3) as i64 - 1).into());
                        let d: Rational = sm.discounted(n2).iter().zip(sm.discounted(n1)).map(|(a, b)| a - b).sum();
                        &tree.atom_probs()[k] * &cert.xstar[k] * &sm.numeraire[tree.leaves()[k].0] * phi * d
                    })
                    .sum();
                prop_assert!(e.is_zero());
            }
        }
    }
}
