//! Brute-force cross-checks for tiny instances: measure polytopes by
//! support enumeration, superreplication by active-set enumeration and by
//! grid search.

use itertools::Itertools;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arbitrage::{ArbitrageError, MeasureSelector};
use crate::gains::{global_gains, submarket_gains, GainsBasis};
use crate::linalg::{independent_subset, rref, solve_square};
use crate::market::MarketModel;
use crate::numeric::{from_f64, to_f64, Rational};
use crate::pricing::Venue;

pub const MAX_ATOMS: usize = 12;
pub const MAX_GAINS: usize = 10;
/// Grid search only handles this many free coordinates.
pub const MAX_GRID_DIM: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("instance too large: {atoms} atoms, {gains} independent gains")]
    TooLarge { atoms: usize, gains: usize },
    #[error("no feasible vertex; the instance is not arbitrage-free")]
    NoVertex,
    #[error(transparent)]
    Arbitrage(#[from] ArbitrageError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    VertexEnumeration,
    GridSearch,
    ExhaustiveSystem,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: Rational,
    pub method: OracleMethod,
    /// `(atoms, variables)`.
    pub instance_size: (usize, usize),
}

fn reduced(basis: &GainsBasis) -> Vec<Vec<Rational>> {
    independent_subset(&basis.vectors).into_iter().map(|i| basis.vectors[i].clone()).collect()
}

fn check_caps(atoms: usize, gains: usize) -> Result<(), OracleError> {
    if atoms > MAX_ATOMS || gains > MAX_GAINS {
        return Err(OracleError::TooLarge { atoms, gains });
    }
    Ok(())
}

/// Unique solution of `a x = b` if the system is consistent and of full
/// column rank.
fn unique_solution(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| r.iter().cloned().chain(std::iter::once(bi.clone())).collect())
        .collect();
    let pivots = rref(&mut m);
    if pivots.contains(&n) || pivots.len() != n {
        return None;
    }
    Some((0..n).map(|i| m[i][n].clone()).collect())
}

/// Vertices of `{q >= 0, sum q = 1, E_q[g / Z] = 0 for every gain g}`.
pub fn enumerate_measure_vertices(model: &MarketModel, selector: &MeasureSelector) -> Result<Vec<Vec<Rational>>, OracleError> {
    let atoms = model.atom_count();
    let rows = selector.constraint_rows(model)?;
    let rows: Vec<Vec<Rational>> = independent_subset(&rows).into_iter().map(|i| rows[i].clone()).collect();
    check_caps(atoms, rows.len())?;
    let mut vertices = Vec::new();
    for size in 1..=atoms.min(rows.len() + 1) {
        for support in (0..atoms).combinations(size) {
            let mut a: Vec<Vec<Rational>> = rows.iter().map(|r| support.iter().map(|&k| r[k].clone()).collect()).collect();
            a.push(vec![Rational::one(); size]);
            let mut b = vec![Rational::zero(); rows.len()];
            b.push(Rational::one());
            let Some(sol) = unique_solution(&a, &b) else { continue };
            if sol.iter().any(|v| !v.is_positive()) {
                continue;
            }
            let mut q = vec![Rational::zero(); atoms];
            for (&k, v) in support.iter().zip(sol) {
                q[k] = v;
            }
            vertices.push(q);
        }
    }
    Ok(vertices)
}

/// `sup E_q[h / Z]` over the selector's measures, as a maximum over
/// enumerated vertices. `None` for an empty set.
pub fn measure_sup(model: &MarketModel, selector: &MeasureSelector, h: &[Rational]) -> Result<Option<OracleResult>, OracleError> {
    let vertices = enumerate_measure_vertices(model, selector)?;
    let value = vertices
        .iter()
        .map(|q| q.iter().zip(h).zip(&selector.weight).map(|((qk, hk), z)| qk * hk / z).sum::<Rational>())
        .max();
    Ok(value.map(|value| OracleResult {
        value,
        method: OracleMethod::ExhaustiveSystem,
        instance_size: (model.atom_count(), vertices.len()),
    }))
}

/// The hedging polyhedron `x R + G c >= h` (plus `x >= 0` when the wealth
/// is sign-constrained), variables `(x_tau..., c...)`.
struct Hedging {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    wealth: usize,
}

fn hedging(model: &MarketModel, h: &[Rational], submarkets: &[usize], basis: &GainsBasis, nonneg: bool) -> Result<Hedging, OracleError> {
    let gains = reduced(basis);
    check_caps(model.atom_count(), gains.len())?;
    let growth: Vec<Vec<Rational>> = submarkets.iter().map(|&t| model.growth(t)).collect();
    let vars = submarkets.len() + gains.len();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (w, hw) in h.iter().enumerate() {
        rows.push(growth.iter().chain(&gains).map(|v| v[w].clone()).collect::<Vec<_>>());
        rhs.push(hw.clone());
    }
    if nonneg {
        for j in 0..submarkets.len() {
            let mut e = vec![Rational::zero(); vars];
            e[j] = Rational::one();
            rows.push(e);
            rhs.push(Rational::zero());
        }
    }
    Ok(Hedging {
        rows,
        rhs,
        wealth: submarkets.len(),
    })
}

impl Hedging {
    fn vars(&self) -> usize {
        self.rows[0].len()
    }

    /// Minimum of the total wealth over all basic feasible points.
    fn active_sets(&self) -> Option<Rational> {
        let n = self.vars();
        let mut best: Option<Rational> = None;
        for active in (0..self.rows.len()).combinations(n) {
            let a: Vec<Vec<Rational>> = active.iter().map(|&i| self.rows[i].clone()).collect();
            let b: Vec<Rational> = active.iter().map(|&i| self.rhs[i].clone()).collect();
            let Some(v) = solve_square(&a, &b) else { continue };
            let feasible = self
                .rows
                .iter()
                .zip(&self.rhs)
                .all(|(r, bi)| r.iter().zip(&v).map(|(x, y)| x * y).sum::<Rational>() >= *bi);
            if !feasible {
                continue;
            }
            let cost: Rational = v[..self.wealth].iter().sum();
            if best.as_ref().is_none_or(|b| cost < *b) {
                best = Some(cost);
            }
        }
        best
    }
}

fn polyhedron(model: &MarketModel, h: &[Rational], tau: Option<usize>) -> Result<Hedging, OracleError> {
    match tau {
        Some(t) => {
            let basis = submarket_gains(model, t).map_err(ArbitrageError::from)?;
            hedging(model, h, &[t], &basis, false)
        }
        None => {
            let all: Vec<usize> = (0..model.submarkets().len()).collect();
            hedging(model, h, &all, &global_gains(model), true)
        }
    }
}

fn per_submarket<F>(model: &MarketModel, pick_max: bool, mut f: F) -> Result<OracleResult, OracleError>
where
    F: FnMut(usize) -> Result<OracleResult, OracleError>,
{
    let all = (0..model.submarkets().len()).map(&mut f).collect::<Result<Vec<_>, _>>()?;
    let mut best = all[0].clone();
    for r in all.into_iter().skip(1) {
        if (pick_max && r.value > best.value) || (!pick_max && r.value < best.value) {
            best = r;
        }
    }
    Ok(best)
}

/// Exact superreplication price by enumerating active constraint sets.
pub fn brute_superreplication(model: &MarketModel, h: &[Rational], venue: Venue) -> Result<OracleResult, OracleError> {
    let tau = match venue {
        Venue::Global => None,
        Venue::Submarket(t) => Some(t),
        Venue::Lower | Venue::Upper => {
            return per_submarket(model, venue == Venue::Upper, |t| brute_superreplication(model, h, Venue::Submarket(t)))
        }
    };
    let poly = polyhedron(model, h, tau)?;
    let value = poly.active_sets().ok_or(OracleError::NoVertex)?;
    Ok(OracleResult {
        value,
        method: OracleMethod::VertexEnumeration,
        instance_size: (model.atom_count(), poly.vars()),
    })
}

const GRID: usize = 10;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimum of a convex function of one variable: a coarse grid (widened
/// while the best point sits on its edge) brackets the minimiser between
/// the neighbours of the best grid point, then golden-section refines.
fn line_min(f: &mut dyn FnMut(f64) -> f64, scale: f64, tolerance: f64) -> (f64, f64) {
    let step = 2.0 * scale / GRID as f64;
    let values: Vec<f64> = (0..=GRID).map(|i| f(-scale + step * i as f64)).collect();
    let best = (0..=GRID).fold(0, |b, i| if values[i] < values[b] { i } else { b });
    let (lo, hi) = if best == 0 || best == GRID {
        // walk outward with doubling steps until the value stops falling
        let dir = if best == 0 { -1.0 } else { 1.0 };
        let (mut prev, mut x, mut fx, mut s) = (dir * (scale - step), dir * scale, values[best], step);
        loop {
            s *= 2.0;
            let next = x + dir * s;
            let fnext = f(next);
            if fnext.partial_cmp(&fx) != Some(std::cmp::Ordering::Less) || !next.is_finite() {
                break if dir > 0.0 { (prev, next) } else { (next, prev) };
            }
            (prev, x, fx) = (x, next, fnext);
        }
    } else {
        (-scale + step * (best - 1) as f64, -scale + step * (best + 1) as f64)
    };
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tolerance * (1.0 + a.abs().max(b.abs())) {
        if fc <= fd {
            (b, d, fd) = (d, c, fc);
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            (a, c, fc) = (c, d, fd);
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Coordinate `k` onwards minimised by nested line searches; partial
/// minima of a convex function stay convex, so every level is unimodal.
fn nested_min(objective: &dyn Fn(&[f64]) -> f64, point: &mut Vec<f64>, k: usize, scale: f64, tolerance: f64) -> f64 {
    if k == point.len() {
        return objective(point);
    }
    let mut inner = |x: f64| {
        point[k] = x;
        nested_min(objective, point, k + 1, scale, tolerance)
    };
    let (x, _) = line_min(&mut inner, scale, tolerance);
    point[k] = x;
    nested_min(objective, point, k + 1, scale, tolerance)
}

/// Superreplication price by grid search in floating point.
/// The last wealth coordinate is eliminated (it is the smallest value that
/// makes the hedge dominate), so the search runs over the others and the
/// gain coefficients.
pub fn grid_superreplication(model: &MarketModel, h: &[Rational], venue: Venue, tolerance: f64) -> Result<OracleResult, OracleError> {
    let tau = match venue {
        Venue::Global => None,
        Venue::Submarket(t) => Some(t),
        Venue::Lower | Venue::Upper => {
            return per_submarket(model, venue == Venue::Upper, |t| {
                grid_superreplication(model, h, Venue::Submarket(t), tolerance)
            })
        }
    };
    let poly = polyhedron(model, h, tau)?;
    let atoms = model.atom_count();
    let dim = poly.vars() - 1;
    if dim > MAX_GRID_DIM {
        return Err(OracleError::TooLarge { atoms, gains: dim });
    }
    let nonneg = tau.is_none();
    let last = poly.wealth - 1;
    let rows: Vec<Vec<f64>> = poly.rows[..atoms].iter().map(|r| r.iter().map(to_f64).collect()).collect();
    let rhs: Vec<f64> = poly.rhs[..atoms].iter().map(to_f64).collect();
    // point = wealth coordinates except `last`, then gain coefficients
    let objective = |p: &[f64]| -> f64 {
        let full = |j: usize| if j < last { p[j] } else { p[j - 1] };
        if nonneg && p[..last].iter().any(|&x| x < 0.0) {
            return f64::INFINITY;
        }
        let mut x_last = if nonneg { 0.0f64 } else { f64::NEG_INFINITY };
        for (r, b) in rows.iter().zip(&rhs) {
            let rest: f64 = (0..r.len()).filter(|&j| j != last).map(|j| r[j] * full(j)).sum();
            x_last = x_last.max((b - rest) / r[last]);
        }
        p[..last].iter().sum::<f64>() + x_last
    };
    let scale = 1.0 + rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let mut point = vec![0.0; dim];
    let best = nested_min(&objective, &mut point, 0, scale, tolerance);
    let value = from_f64(best).ok_or(OracleError::NoVertex)?;
    Ok(OracleResult {
        value,
        method: OracleMethod::GridSearch,
        instance_size: (atoms, poly.vars()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arbitrage::SelectorCone;
    use crate::fixtures::m2;
    use crate::generate::{arbitrage_free_model, random_claim, RandomModelConfig};
    use crate::numeric::{int, ratio, NumericMode};
    use crate::pricing::price;

    #[test]
    fn m2_vertices() {
        let m = m2();
        let hat = enumerate_measure_vertices(&m, &MeasureSelector::hat(&m, 0)).unwrap();
        assert_eq!(hat, vec![vec![ratio(1, 3), ratio(2, 3)]]);
        let sel = MeasureSelector::new(SelectorCone::Global, vec![ratio(6, 5), int(1)]).unwrap();
        assert_eq!(enumerate_measure_vertices(&m, &sel).unwrap(), vec![vec![ratio(3, 8), ratio(5, 8)]]);
    }

    #[test]
    fn simplex_vertices_without_assets() {
        let tree = m2().tree().clone();
        let m = MarketModel::new(
            tree,
            vec![crate::market::Submarket {
                label: "cash".into(),
                dim: 1,
                assets: vec![vec![int(1)]; 3],
                numeraire: vec![int(1); 3],
            }],
            None,
        )
        .unwrap();
        let v = enumerate_measure_vertices(&m, &MeasureSelector::hat(&m, 0)).unwrap();
        assert_eq!(v, vec![vec![int(1), int(0)], vec![int(0), int(1)]]);
    }

    #[test]
    fn m2_superreplication() {
        let m = m2();
        let h = m.asset_claim(0, 0).payoff;
        assert_eq!(brute_superreplication(&m, &h, Venue::Global).unwrap().value, ratio(15, 4));
        assert_eq!(brute_superreplication(&m, &h, Venue::Submarket(0)).unwrap().value, int(4));
        assert_eq!(brute_superreplication(&m, &[int(0), int(0)], Venue::Global).unwrap().value, int(0));
        let g = grid_superreplication(&m, &h, Venue::Global, 1e-9).unwrap();
        assert!((to_f64(&g.value) - 3.75).abs() < 1e-6);
        assert_eq!(g.method, OracleMethod::GridSearch);
    }

    #[test]
    fn matches_engine_on_random_models() {
        for seed in 0..25 {
            let m = arbitrage_free_model(&RandomModelConfig::small(), seed);
            let h = random_claim(&m, seed).payoff;
            for venue in [Venue::Global, Venue::Lower, Venue::Upper, Venue::Submarket(0)] {
                let engine = price(&m, &h, venue, NumericMode::Rational).unwrap().price;
                let brute = brute_superreplication(&m, &h, venue).unwrap();
                assert_eq!(engine, brute.value, "seed {seed} {venue:?}");
            }
        }
    }

    #[test]
    fn measure_sup_matches_submarket_price() {
        let m = m2();
        let h = m.asset_claim(0, 0).payoff;
        let sup = measure_sup(&m, &MeasureSelector::hat(&m, 1), &h).unwrap().unwrap();
        assert_eq!(sup.value, ratio(15, 4));
    }

    #[test]
    fn caps_are_enforced() {
        let tree = crate::tree::build_tree(
            &crate::tree::BranchingSpec::Levels(vec![13]),
            vec![ratio(1, 13); 13],
            NumericMode::Rational,
        )
        .unwrap();
        let m = MarketModel::new(
            tree,
            vec![crate::market::Submarket {
                label: "x".into(),
                dim: 1,
                assets: vec![vec![int(1)]; 14],
                numeraire: vec![int(1); 14],
            }],
            None,
        )
        .unwrap();
        assert!(matches!(
            brute_superreplication(&m, &vec![int(0); 13], Venue::Global),
            Err(OracleError::TooLarge { .. })
        ));
    }
}
