use crate::system::lie_derivative;
use crate::{decoupling, ControlAffineSystem, DynamicsError, RANK_CUTOFF};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed for the decoupling-rank sampling; fixed so the decision is
/// reproducible run to run.
const RANK_SEED: u64 = 0xA11C_0DE5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelativeDegreeProfile {
    pub r: Vec<u32>,
    pub sum_r: u32,
    /// sum_r equals the state dimension, so the η map is a candidate local
    /// coordinate change with no internal dynamics left over.
    pub fully_linearizable: bool,
}

/// Settings for the numeric zero test that drives the relative-degree
/// decision, and for the rank sampling of the decoupling matrix.
#[derive(Debug, Clone, Copy)]
pub struct ZeroTestConfig {
    pub samples: usize,
    pub tol: f64,
}

impl Default for ZeroTestConfig {
    fn default() -> Self {
        ZeroTestConfig {
            samples: 64,
            tol: 1e-9,
        }
    }
}

/// For each output, the least rᵢ such that every L_{gⱼ}L_f^k hᵢ vanishes
/// identically on the state box for k ≤ rᵢ−2 while some j breaks through at
/// k = rᵢ−1. The profile is then cross-checked by sampling the decoupling
/// matrix and requiring full rank at a majority of points.
pub fn vector_relative_degree(
    sys: &ControlAffineSystem,
    cfg: &ZeroTestConfig,
) -> Result<RelativeDegreeProfile, DynamicsError> {
    let n = sys.state_dim();
    let m = sys.input_dim();
    let columns: Vec<Vec<_>> = (0..m).map(|j| sys.g_column(j)).collect();

    let mut r = Vec::with_capacity(m);
    for i in 0..m {
        let mut scalar = sys.outputs()[i].clone();
        let mut found = None;
        for k in 1..=n {
            let mut reached = false;
            for col in &columns {
                let lg = lie_derivative(&scalar, col);
                if !lg.is_identically_zero(sys.state_box(), cfg.samples, cfg.tol)? {
                    reached = true;
                    break;
                }
            }
            if reached {
                found = Some(k as u32);
                break;
            }
            scalar = lie_derivative(&scalar, sys.drift());
        }
        match found {
            Some(ri) => r.push(ri),
            None => {
                return Err(DynamicsError::UndefinedRelativeDegree {
                    reason: format!(
                        "output {i} is not reached by any input within {n} differentiations"
                    ),
                })
            }
        }
    }

    let sum_r: u32 = r.iter().sum();
    let profile = RelativeDegreeProfile {
        r,
        sum_r,
        fully_linearizable: sum_r as usize == n,
    };

    // The chain test is necessary but not sufficient: A(x) must also have
    // rank m. Sample the box; tolerate a minority of bad points (isolated
    // singular sets like v = 0 for a Dubins car are expected).
    let dec = decoupling(sys, &profile);
    let mut rng = ChaCha8Rng::seed_from_u64(RANK_SEED);
    let samples = cfg.samples.max(1);
    let mut failures = 0usize;
    for _ in 0..samples {
        let x: Vec<f64> = sys
            .state_box()
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..hi))
            .collect();
        let full_rank = match dec.eval_a(&x) {
            Ok(a) => {
                let sv = a.svd(false, false).singular_values;
                let smax = sv.max();
                smax > 0.0 && sv.min() > RANK_CUTOFF * smax
            }
            // evaluation failures (e.g. a pole inside the box) count
            // against the rank check rather than aborting it
            Err(_) => false,
        };
        if !full_rank {
            failures += 1;
        }
    }
    if 2 * failures > samples {
        return Err(DynamicsError::UndefinedRelativeDegree {
            reason: format!(
                "decoupling matrix rank deficient at {failures}/{samples} sampled points"
            ),
        });
    }

    if !profile.fully_linearizable {
        log::warn!(
            "sum of relative degrees {} is below the state dimension {}; \
             internal dynamics are not analyzed and no certificate claim covers them",
            profile.sum_r,
            n
        );
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use reachstep_symbolic::{parse_expression, Expression, VarTable};

    #[test]
    fn single_integrator_has_unit_degrees() {
        let t = VarTable::from_names(["y1", "y2"]).unwrap();
        let f = vec![Expression::zero(), Expression::zero()];
        let g = vec![
            vec![Expression::one(), Expression::zero()],
            vec![Expression::zero(), Expression::one()],
        ];
        let h = vec![
            parse_expression("y1", &t).unwrap(),
            parse_expression("y2", &t).unwrap(),
        ];
        let sys =
            ControlAffineSystem::new(t, f, g, h, vec![(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        let p = vector_relative_degree(&sys, &ZeroTestConfig::default()).unwrap();
        assert_eq!(p.r, vec![1, 1]);
        assert_eq!(p.sum_r, 2);
        assert!(p.fully_linearizable);
    }

    #[test]
    fn unreachable_output_is_undefined() {
        // x2 never appears in y's derivative chain: y = x1, ẋ1 = x1.
        let t = VarTable::from_names(["x1", "x2"]).unwrap();
        let f = vec![
            parse_expression("x1", &t).unwrap(),
            Expression::zero(),
        ];
        let g = vec![vec![Expression::zero()], vec![Expression::one()]];
        let h = vec![parse_expression("x1", &t).unwrap()];
        let sys =
            ControlAffineSystem::new(t, f, g, h, vec![(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        assert!(matches!(
            vector_relative_degree(&sys, &ZeroTestConfig::default()),
            Err(DynamicsError::UndefinedRelativeDegree { .. })
        ));
    }
}
