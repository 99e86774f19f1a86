//! Linear-fractional optimisation over a polyhedral cone via the
//! Charnes-Cooper normalisation.

use num_traits::{One, Zero};

use super::{solve_lp, LinearProgram, LpError, LpStatus, Relation, Sense};
use crate::numeric::{NumericMode, Rational};

/// `{ y >= 0 : E y = 0 }` in `dim` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Cone {
    pub dim: usize,
    pub equalities: Vec<Vec<Rational>>,
}

impl Cone {
    pub fn new(dim: usize, equalities: Vec<Vec<Rational>>) -> Self {
        Cone { dim, equalities }
    }

    /// The whole non-negative orthant.
    pub fn orthant(dim: usize) -> Self {
        Cone {
            dim,
            equalities: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FractionalSense {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalOutcome {
    /// `None` when the ratio is unbounded in the optimisation direction.
    pub value: Option<Rational>,
    /// Optimiser normalised to `den . y = 1`.
    pub witness: Vec<Rational>,
}

impl FractionalOutcome {
    pub fn is_unbounded(&self) -> bool {
        self.value.is_none()
    }
}

/// Optimises `num . y / den . y` over the cone. The denominator is assumed
/// non-negative on the cone; it must be positive somewhere on it.
pub fn solve_fractional(
    num: &[Rational],
    den: &[Rational],
    cone: &Cone,
    sense: FractionalSense,
    mode: NumericMode,
) -> Result<FractionalOutcome, LpError> {
    let n = cone.dim;
    if num.len() != n || den.len() != n || cone.equalities.iter().any(|r| r.len() != n) {
        return Err(LpError::DimensionMismatch(format!(
            "fractional program expects {n} coordinates"
        )));
    }

    // Auxiliary check: max den . y over the cone cut by sum(y) <= 1.
    let mut aux = LinearProgram::new(Sense::Maximize, den.to_vec());
    for row in &cone.equalities {
        aux.add(row.clone(), Relation::Eq, Rational::zero());
    }
    aux.add(vec![Rational::one(); n], Relation::Le, Rational::one());
    let aux_out = solve_lp(&aux, mode)?;
    match aux_out.value() {
        Some(v) if mode.is_positive(v) => {}
        _ => return Err(LpError::DegenerateDenominator),
    }

    let lp_sense = match sense {
        FractionalSense::Max => Sense::Maximize,
        FractionalSense::Min => Sense::Minimize,
    };
    let mut lp = LinearProgram::new(lp_sense, num.to_vec());
    for row in &cone.equalities {
        lp.add(row.clone(), Relation::Eq, Rational::zero());
    }
    lp.add(den.to_vec(), Relation::Eq, Rational::one());
    let out = solve_lp(&lp, mode)?;
    match out.status {
        LpStatus::Optimal => Ok(FractionalOutcome {
            value: out.objective,
            witness: out.primal,
        }),
        LpStatus::Unbounded => Ok(FractionalOutcome {
            value: None,
            witness: Vec::new(),
        }),
        LpStatus::Infeasible => Err(LpError::DegenerateDenominator),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, ratio};
    use proptest::prelude::*;

    fn m2_cone() -> Cone {
        // P = (1/2, 1/2); gains (2, -1) and (6/5, -3/5), weighted by P.
        Cone::new(
            2,
            vec![vec![int(1), ratio(-1, 2)], vec![ratio(3, 5), ratio(-3, 10)]],
        )
    }

    #[test]
    fn ratio_over_single_ray() {
        let p = ratio(1, 2);
        let num = vec![&p * int(6), &p * int(3)];
        let den = vec![&p * ratio(6, 5), p.clone()];
        let out = solve_fractional(&num, &den, &m2_cone(), FractionalSense::Max, NumericMode::Rational).unwrap();
        assert_eq!(out.value, Some(ratio(15, 4)));
        let min = solve_fractional(&num, &den, &m2_cone(), FractionalSense::Min, NumericMode::Rational).unwrap();
        assert_eq!(min.value, Some(ratio(15, 4)));
    }

    #[test]
    fn identical_functionals() {
        let den = vec![int(1), int(2), int(3)];
        let out = solve_fractional(&den, &den, &Cone::orthant(3), FractionalSense::Max, NumericMode::Rational).unwrap();
        assert_eq!(out.value, Some(int(1)));
    }

    #[test]
    fn complete_binomial_expectation() {
        // Gain (2, -1) under P = (1/2, 1/2): risk-neutral weights (1/3, 2/3).
        let cone = Cone::new(2, vec![vec![int(1), ratio(-1, 2)]]);
        let p = ratio(1, 2);
        let h = [int(5), int(-1)];
        let num: Vec<_> = h.iter().map(|x| x * &p).collect();
        let den = vec![p.clone(), p];
        let out = solve_fractional(&num, &den, &cone, FractionalSense::Max, NumericMode::Rational).unwrap();
        assert_eq!(out.value, Some(int(1)));
    }

    #[test]
    fn vanishing_denominator() {
        let cone = Cone::orthant(2);
        let err = solve_fractional(&[int(1), int(1)], &[int(0), int(0)], &cone, FractionalSense::Max, NumericMode::Rational);
        assert_eq!(err, Err(LpError::DegenerateDenominator));
    }

    #[test]
    fn unbounded_ratio() {
        // den vanishes on the second axis while num grows there.
        let cone = Cone::orthant(2);
        let out = solve_fractional(&[int(0), int(1)], &[int(1), int(0)], &cone, FractionalSense::Max, NumericMode::Rational).unwrap();
        assert!(out.is_unbounded());
    }

    proptest! {
        #[test]
        fn positive_scaling_of_numerator(
            h in proptest::collection::vec(-20i64..20, 3),
            z in proptest::collection::vec(1i64..10, 3),
            c in 1i64..12,
        ) {
            let cone = Cone::new(3, vec![vec![int(1), int(-1), int(1)]]);
            let num: Vec<_> = h.iter().map(|&x| int(x)).collect();
            let den: Vec<_> = z.iter().map(|&x| int(x)).collect();
            let scaled: Vec<_> = num.iter().map(|x| x * int(c)).collect();
            let a = solve_fractional(&num, &den, &cone, FractionalSense::Max, NumericMode::Rational).unwrap();
            let b = solve_fractional(&scaled, &den, &cone, FractionalSense::Max, NumericMode::Rational).unwrap();
            prop_assert_eq!(b.value, a.value.map(|v| v * int(c)));
        }
    }
}
