//! Exact approximate-exchange constants and related structural checks.
//!
//! A density has the `α`-exchange property when for all `S`, `T` and `i ∈ S`
//! some `j ∈ T` gives `α·μ(S − i + j)·μ(T + i − j) ≥ μ(S)·μ(T)`. The smallest
//! such `α` is computed here by exhaustive search over the support.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::densities::{hessian_at, positive_eigenvalue_count, DensityError, DppDensity, SubsetDensity};
use crate::subsets::swap_element;

/// Largest support [`exchange_alpha`] scans (the scan is quadratic in it).
pub const EXCHANGE_SUPPORT_CAP: usize = 5000;
/// Log-ratio slack below which two candidate maxima count as tied.
pub const RATIO_TOLERANCE: f64 = 1e-9;
/// Stored violations are truncated to this many; the count is kept.
pub const MAX_LISTED_VIOLATIONS: usize = 1000;
/// Absolute slack in the `√A ≤ √B + √C` comparison.
pub const QUADRATIC_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ExchangeError {
    #[error("support has {size} sets, above cap {cap}")]
    AboveCap { size: usize, cap: usize },
    #[error("density has empty support")]
    EmptySupport,
    #[error("check requires k = {expected}, density has k = {found}")]
    WrongSubsetSize { expected: usize, found: usize },
    #[error("sets {s:?} and {t:?} must be disjoint")]
    Overlapping { s: Vec<usize>, t: Vec<usize> },
    #[error(transparent)]
    Density(#[from] DensityError),
}

/// A `(S, T, i)` triple from the exchange definition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExchangeTriple {
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub i: usize,
}

/// The triple attaining `alpha_min`, with its best partner `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeWitness {
    pub triple: ExchangeTriple,
    pub j: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeReport {
    /// Smallest valid `α`; `+∞` when some triple has no partner at all.
    pub alpha_min: f64,
    pub subset_size: usize,
    pub witness: Option<ExchangeWitness>,
    /// Ordered `(S, T)` support pairs examined.
    pub pair_count: usize,
    pub violation_count: usize,
    /// Triples with no `j` of positive denominator, truncated to
    /// [`MAX_LISTED_VIOLATIONS`].
    pub violations: Vec<ExchangeTriple>,
}

impl ExchangeReport {
    pub fn is_finite(&self) -> bool {
        self.violation_count == 0
    }

    pub fn k_squared(&self) -> f64 {
        (self.subset_size * self.subset_size) as f64
    }

    /// `{ "alpha_min", "k_squared", "witness", "violations", "pair_count",
    /// "violation_count" }`, with `"inf"` for an infinite `alpha_min`.
    pub fn to_json(&self) -> Value {
        let alpha = if self.is_finite() {
            json!(self.alpha_min)
        } else {
            json!("inf")
        };
        let witness = match &self.witness {
            Some(w) => json!({
                "s": w.triple.s,
                "t": w.triple.t,
                "i": w.triple.i,
                "j": w.j,
                "ratio": w.ratio,
            }),
            None => Value::Null,
        };
        json!({
            "alpha_min": alpha,
            "k_squared": self.k_squared(),
            "witness": witness,
            "violations": self.violations,
            "pair_count": self.pair_count,
            "violation_count": self.violation_count,
        })
    }
}

#[derive(Default)]
struct Partial {
    best: Option<(f64, ExchangeWitness)>,
    violations: Vec<ExchangeTriple>,
    violation_count: usize,
}

/// Exhaustive `α` over all ordered support pairs.
///
/// When `i ∈ T` the only size-preserving partner is `j = i` (ratio 1);
/// otherwise `j` ranges over `T ∖ S`. Partners with a zero denominator are
/// skipped, and a triple left without partners is a violation.
pub fn exchange_alpha<D>(d: &D) -> Result<ExchangeReport, ExchangeError>
where
    D: SubsetDensity + Sync + ?Sized,
{
    let support = d.support()?;
    if support.is_empty() {
        return Err(ExchangeError::EmptySupport);
    }
    if support.len() > EXCHANGE_SUPPORT_CAP {
        return Err(ExchangeError::AboveCap {
            size: support.len(),
            cap: EXCHANGE_SUPPORT_CAP,
        });
    }
    let log_mass: Vec<f64> = support.iter().map(|s| d.eval(s).ln()).collect();

    let partials: Vec<Partial> = (0..support.len())
        .into_par_iter()
        .map(|a| {
            let s = &support[a];
            let mut part = Partial::default();
            for (b, t) in support.iter().enumerate() {
                for &i in s {
                    let triple_log = log_mass[a] + log_mass[b];
                    let (ratio_log, j) = if t.binary_search(&i).is_ok() {
                        (0.0, Some(i))
                    } else {
                        best_partner(d, s, t, i, triple_log)
                    };
                    let Some(j) = j else {
                        part.violation_count += 1;
                        if part.violations.len() < MAX_LISTED_VIOLATIONS {
                            part.violations.push(ExchangeTriple { s: s.clone(), t: t.clone(), i });
                        }
                        continue;
                    };
                    let improves = match &part.best {
                        None => true,
                        Some((current, _)) => ratio_log > current + RATIO_TOLERANCE,
                    };
                    if improves {
                        part.best = Some((
                            ratio_log,
                            ExchangeWitness {
                                triple: ExchangeTriple { s: s.clone(), t: t.clone(), i },
                                j,
                                ratio: ratio_log.exp(),
                            },
                        ));
                    }
                }
            }
            part
        })
        .collect();

    let mut best: Option<(f64, ExchangeWitness)> = None;
    let mut violations = Vec::new();
    let mut violation_count = 0;
    for part in partials {
        violation_count += part.violation_count;
        for v in part.violations {
            if violations.len() < MAX_LISTED_VIOLATIONS {
                violations.push(v);
            }
        }
        if let Some((value, witness)) = part.best {
            let improves = match &best {
                None => true,
                Some((current, _)) => value > current + RATIO_TOLERANCE,
            };
            if improves {
                best = Some((value, witness));
            }
        }
    }

    let alpha_min = if violation_count > 0 {
        f64::INFINITY
    } else {
        // S = T always contributes ratio 1, so rounding below 1 is noise.
        best.as_ref().map(|(v, _)| v.exp().max(1.0)).unwrap_or(1.0)
    };
    Ok(ExchangeReport {
        alpha_min,
        subset_size: d.subset_size(),
        witness: best.map(|(_, w)| w),
        pair_count: support.len() * support.len(),
        violation_count,
        violations,
    })
}

/// Minimum log-ratio over `j ∈ T ∖ S` with positive denominator.
fn best_partner<D: SubsetDensity + ?Sized>(
    d: &D,
    s: &[usize],
    t: &[usize],
    i: usize,
    triple_log: f64,
) -> (f64, Option<usize>) {
    let mut best = (f64::INFINITY, None);
    for &j in t.iter().filter(|j| s.binary_search(j).is_err()) {
        let left = d.eval(&swap_element(s, i, j));
        if left <= 0.0 {
            continue;
        }
        let right = d.eval(&swap_element(t, j, i));
        if right <= 0.0 {
            continue;
        }
        let ratio_log = triple_log - left.ln() - right.ln();
        if ratio_log < best.0 {
            best = (ratio_log, Some(j));
        }
    }
    best
}

/// Values of the rank-2 inequality `√A ≤ √B + √C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticCheck {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub pass: bool,
}

/// For disjoint `S = {s1, s2}` and `T = {t1, t2}`: `A = μ(S)μ(T)`,
/// `B = μ(s1 t1)μ(s2 t2)`, `C = μ(s1 t2)μ(s2 t1)`.
pub fn quadratic_exchange_check<D: SubsetDensity + ?Sized>(
    d: &D,
    s: [usize; 2],
    t: [usize; 2],
) -> Result<QuadraticCheck, ExchangeError> {
    if d.subset_size() != 2 {
        return Err(ExchangeError::WrongSubsetSize {
            expected: 2,
            found: d.subset_size(),
        });
    }
    if s[0] == s[1] || t[0] == t[1] || s.iter().any(|x| t.contains(x)) {
        return Err(ExchangeError::Overlapping {
            s: s.to_vec(),
            t: t.to_vec(),
        });
    }
    let pair = |x: usize, y: usize| d.eval(&[x.min(y), x.max(y)]);
    let a = pair(s[0], s[1]) * pair(t[0], t[1]);
    let b = pair(s[0], t[0]) * pair(s[1], t[1]);
    let c = pair(s[0], t[1]) * pair(s[1], t[0]);
    let pass = a.sqrt() <= b.sqrt() + c.sqrt() + QUADRATIC_TOLERANCE;
    Ok(QuadraticCheck { a, b, c, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DppBoundCheck {
    pub alpha_min: f64,
    pub k_squared: f64,
    pub pass: bool,
}

/// Checks `alpha_min ≤ k²` for a DPP.
pub fn dpp_exchange_bound_check(d: &DppDensity) -> Result<DppBoundCheck, ExchangeError> {
    let report = exchange_alpha(d)?;
    let k_squared = report.k_squared();
    Ok(DppBoundCheck {
        alpha_min: report.alpha_min,
        k_squared,
        pass: report.alpha_min <= k_squared + 1e-9,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HessianCheck {
    pub max_positive_eigs: usize,
    pub points_tested: usize,
    pub pass: bool,
}

/// Necessary condition for a log-concave generating polynomial: at most one
/// positive Hessian eigenvalue at `z = 1` and at `num_points` random points
/// drawn log-uniformly from `[e⁻², e²]ⁿ`.
pub fn logconcavity_necessary_check<D, R>(d: &D, num_points: usize, rng: &mut R) -> Result<HessianCheck, ExchangeError>
where
    D: SubsetDensity + ?Sized,
    R: Rng + ?Sized,
{
    let n = d.ground_size();
    let mut points = vec![vec![1.0; n]];
    for _ in 0..num_points {
        points.push((0..n).map(|_| rng.random_range(-2.0..2.0_f64).exp()).collect());
    }
    let mut max_positive_eigs = 0;
    for z in &points {
        let h = hessian_at(d, z)?;
        max_positive_eigs = max_positive_eigs.max(positive_eigenvalue_count(&h)?);
    }
    Ok(HessianCheck {
        max_positive_eigs,
        points_tested: points.len(),
        pass: max_positive_eigs <= 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::{graphic_basis_density, TableDensity};
    use crate::graph::WeightedGraph;
    use crate::walk::chain_rng;

    fn two_blocks() -> TableDensity {
        TableDensity::new(4, 2, [(vec![0, 1], 1.0), (vec![2, 3], 1.0)]).unwrap()
    }

    fn dpp(vectors: &[[f64; 2]]) -> DppDensity {
        DppDensity::new(2, vectors.iter().map(|v| v.to_vec()).collect()).unwrap()
    }

    #[test]
    fn uniform_matroid_has_unit_exchange() {
        let report = exchange_alpha(&TableDensity::uniform(4, 2).unwrap()).unwrap();
        assert_eq!(report.alpha_min, 1.0);
        assert!(report.violations.is_empty());
        assert_eq!(report.pair_count, 36);
    }

    #[test]
    fn disconnected_blocks_have_infinite_alpha() {
        let report = exchange_alpha(&two_blocks()).unwrap();
        assert_eq!(report.alpha_min, f64::INFINITY);
        assert!(!report.is_finite());
        // (S, T, i) with S ≠ T: 2 ordered pairs × 2 choices of i.
        assert_eq!(report.violation_count, 4);
        assert_eq!(report.to_json()["alpha_min"], "inf");
    }

    #[test]
    fn small_dpp_has_unit_exchange() {
        let d = dpp(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        let report = exchange_alpha(&d).unwrap();
        assert!((report.alpha_min - 1.0).abs() < 1e-9);
    }

    #[test]
    fn weighted_alpha_matches_hand_computation() {
        // μ({0,1}) = μ({2,3}) = 4, every other pair 1.
        let entries = vec![
            (vec![0, 1], 4.0),
            (vec![2, 3], 4.0),
            (vec![0, 2], 1.0),
            (vec![0, 3], 1.0),
            (vec![1, 2], 1.0),
            (vec![1, 3], 1.0),
        ];
        let d = TableDensity::new(4, 2, entries).unwrap();
        // S = {0,1}, T = {2,3}: each partner gives 16 / (1·1) = 16.
        let report = exchange_alpha(&d).unwrap();
        assert!((report.alpha_min - 16.0).abs() < 1e-9);
        let w = report.witness.unwrap();
        assert_eq!((w.triple.s.as_slice(), w.triple.t.as_slice()), (&[0, 1][..], &[2, 3][..]));
    }

    #[test]
    fn rescaling_leaves_report_unchanged() {
        let d = TableDensity::new(4, 2, [(vec![0, 1], 2.0), (vec![0, 2], 0.3), (vec![1, 2], 5.0), (vec![2, 3], 1.0), (vec![1, 3], 0.7)]).unwrap();
        let a = exchange_alpha(&d).unwrap();
        let b = exchange_alpha(&d.scaled(7.3)).unwrap();
        assert_eq!(a.violations, b.violations);
        assert_eq!(a.witness.as_ref().map(|w| (&w.triple, w.j)), b.witness.as_ref().map(|w| (&w.triple, w.j)));
        assert!((a.alpha_min - b.alpha_min).abs() <= 1e-9 * a.alpha_min);
    }

    #[test]
    fn graphic_k4_is_a_matroid() {
        let d = graphic_basis_density(&WeightedGraph::complete(4).unwrap());
        assert_eq!(exchange_alpha(&d).unwrap().alpha_min, 1.0);
    }

    #[test]
    fn quadratic_inequality_cases() {
        let d = dpp(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]]);
        let check = quadratic_exchange_check(&d, [0, 1], [2, 3]).unwrap();
        assert!((check.a - 4.0).abs() < 1e-12);
        assert!((check.b - 1.0).abs() < 1e-12);
        assert!((check.c - 1.0).abs() < 1e-12);
        assert!(check.pass);

        let blocks = quadratic_exchange_check(&two_blocks(), [0, 1], [2, 3]).unwrap();
        assert_eq!((blocks.a, blocks.b, blocks.c), (1.0, 0.0, 0.0));
        assert!(!blocks.pass);

        let sparse = TableDensity::new(4, 2, [(vec![0, 2], 1.0)]).unwrap();
        let zero_a = quadratic_exchange_check(&sparse, [0, 1], [2, 3]).unwrap();
        assert_eq!(zero_a.a, 0.0);
        assert!(zero_a.pass);

        assert!(matches!(
            quadratic_exchange_check(&d, [0, 1], [1, 2]),
            Err(ExchangeError::Overlapping { .. })
        ));
        let rank_one = TableDensity::uniform(4, 1).unwrap();
        assert!(matches!(
            quadratic_exchange_check(&rank_one, [0, 1], [2, 3]),
            Err(ExchangeError::WrongSubsetSize { .. })
        ));
    }

    #[test]
    fn dpp_bound_for_rank_one_and_three() {
        let rank_one = DppDensity::new(1, vec![vec![2.0], vec![-0.5], vec![3.0]]).unwrap();
        let check = dpp_exchange_bound_check(&rank_one).unwrap();
        assert!(check.pass);
        assert!((check.alpha_min - 1.0).abs() < 1e-9);

        let rank_three = DppDensity::new(
            3,
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 1.0]],
        )
        .unwrap();
        let check = dpp_exchange_bound_check(&rank_three).unwrap();
        assert!(check.pass && check.alpha_min <= 9.0);
    }

    #[test]
    fn hessian_check_cases() {
        let mut rng = chain_rng(11, 0);
        let k4 = graphic_basis_density(&WeightedGraph::complete(4).unwrap());
        assert!(logconcavity_necessary_check(&k4, 5, &mut rng).unwrap().pass);
        let blocks = logconcavity_necessary_check(&two_blocks(), 5, &mut rng).unwrap();
        assert!(!blocks.pass);
        assert_eq!(blocks.max_positive_eigs, 2);
        let linear = logconcavity_necessary_check(&TableDensity::uniform(5, 1).unwrap(), 3, &mut rng).unwrap();
        assert_eq!(linear.max_positive_eigs, 0);
        assert_eq!(linear.points_tested, 4);
    }
}
