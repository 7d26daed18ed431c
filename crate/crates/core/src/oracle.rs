//! Ground truth: exact envelopes over the credal set, certification of bound
//! reports against them, and seeded sampling for property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::consistency::{CredalPolytope, Sense};
use crate::error::{Error, Result};
use crate::gamble::{Assessment, Gamble, Partition};
use crate::report::{Bound, Direction, Quantity};

/// A certificate is valid when its slack is at least `-CERT_TOL`.
pub const CERT_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopePair {
    pub lower: f64,
    pub upper: f64,
    pub gamble_description: String,
}

pub fn exact_envelope(a: &Assessment, y: &Gamble) -> Result<EnvelopePair> {
    let poly = CredalPolytope::new(a);
    Ok(EnvelopePair {
        lower: poly.optimize(y, Sense::Min)?.value,
        upper: poly.optimize(y, Sense::Max)?.value,
        gamble_description: format!("{:?}", y.values()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub rule: String,
    pub target: String,
    pub direction: Direction,
    pub bound: Option<f64>,
    pub exact: f64,
    /// `bound - exact` for `<=` bounds, `exact - bound` for `>=`; absent when
    /// the report's inequality did not apply.
    pub slack: Option<f64>,
    pub valid: bool,
}

/// Compares a report's bound with the exact envelope of its target.
/// Reports on generic measures or linear previsions, or without attached
/// target values, cannot be certified.
pub fn certify<B: Bound + ?Sized>(a: &Assessment, report: &B) -> Result<Certificate> {
    let target = report.target();
    let values = target.values.clone().ok_or(Error::MissingTarget)?;
    let y = Gamble::new(a.partition(), values)?;
    let sense = match target.quantity {
        Quantity::Lower => Sense::Min,
        Quantity::Upper => Sense::Max,
        _ => return Err(Error::MissingTarget),
    };
    let exact = CredalPolytope::new(a).optimize(&y, sense)?.value;
    let slack = report.bound().map(|b| match report.direction() {
        Direction::AtMost => b - exact,
        Direction::AtLeast => exact - b,
    });
    Ok(Certificate {
        rule: report.rule(),
        target: target.describe(),
        direction: report.direction(),
        bound: report.bound(),
        exact,
        slack,
        valid: slack.is_none_or(|s| s >= -CERT_TOL),
    })
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform random weights on the probability simplex of dimension `k`.
fn simplex_weights<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    if s > 0.0 {
        e.into_iter().map(|v| v / s).collect()
    } else {
        vec![1.0 / k as f64; k]
    }
}

/// `count` random convex combinations of the credal vertices. Sample `i`
/// depends only on `seed` and `i`.
pub fn sample_credal(a: &Assessment, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let vertices = CredalPolytope::new(a).vertices()?;
    if vertices.is_empty() {
        return Err(Error::EmptyCredalSet);
    }
    let n = a.partition().len();
    Ok((0..count)
        .map(|i| {
            let w = simplex_weights(&mut stream(seed, i as u64), vertices.len());
            let mut p = vec![0.0; n];
            for (wk, v) in w.iter().zip(&vertices) {
                for (pj, vj) in p.iter_mut().zip(v) {
                    *pj += wk * vj;
                }
            }
            p
        })
        .collect())
}

fn variance(x: &Gamble, p: &[f64]) -> f64 {
    let m = x.expectation(p);
    x.values()
        .iter()
        .zip(p)
        .map(|(v, pi)| pi * (v - m) * (v - m))
        .sum::<f64>()
        .max(0.0)
}

/// Minimum and maximum of the variance of `x_name` over the credal vertices
/// and `samples` sampled points.
pub fn brute_variance(a: &Assessment, x_name: &str, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let x = a.gamble(x_name)?;
    let mut points = CredalPolytope::new(a).vertices()?;
    if points.is_empty() {
        return Err(Error::EmptyCredalSet);
    }
    points.extend(sample_credal(a, samples, seed)?);
    Ok(points
        .iter()
        .map(|p| variance(&x, p))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v))))
}

/// Random assessment generators for property tests.
pub mod gen {
    use super::*;

    /// Gamble values on a half-unit grid in `[lo, hi]`, so images have holes
    /// and ties.
    pub fn grid_gamble<R: Rng>(rng: &mut R, p: &Partition, lo: i32, hi: i32) -> Gamble {
        let v = (0..p.len())
            .map(|_| rng.gen_range(2 * lo..=2 * hi) as f64 / 2.0)
            .collect();
        Gamble::new(p, v).expect("finite values")
    }

    pub fn probability<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
        simplex_weights(rng, n)
    }

    /// A coherent assessment: the lower envelope of `generators` random
    /// probability vectors on `X` (values in `[0, 6]`) and `extra` further
    /// gambles (values in `[-5, 5]`).
    pub fn coherent<R: Rng>(rng: &mut R, atoms: usize, extra: usize, generators: usize) -> Assessment {
        let p = Partition::numbered(atoms).expect("atoms > 0");
        let ps: Vec<Vec<f64>> = (0..generators.max(1)).map(|_| probability(rng, atoms)).collect();
        let mut a = Assessment::new(&p);
        let mut gambles = vec![("X".to_string(), grid_gamble(rng, &p, 0, 6))];
        for k in 0..extra {
            gambles.push((format!("Y{k}"), grid_gamble(rng, &p, -5, 5)));
        }
        for (name, g) in gambles {
            let lower = ps.iter().map(|q| g.expectation(q)).fold(f64::INFINITY, f64::min);
            a.push_lower(name, g, lower).expect("fresh names");
        }
        a
    }

    /// An assessment with lower values drawn anywhere in `[inf - 1, sup + 1]`
    /// of each gamble; mostly incoherent, sometimes not even avoiding sure
    /// loss.
    pub fn arbitrary<R: Rng>(rng: &mut R, atoms: usize, gambles: usize) -> Assessment {
        let p = Partition::numbered(atoms).expect("atoms > 0");
        let mut a = Assessment::new(&p);
        for k in 0..gambles {
            let g = grid_gamble(rng, &p, -3, 3);
            let (lo, hi) = g.bounds();
            let lower = if rng.gen_bool(0.5) {
                rng.gen_range(lo - 1.0..=hi + 1.0)
            } else {
                rng.gen_range(lo..=hi)
            };
            a.push_lower(format!("G{k}"), g, lower).expect("fresh names");
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consistency::{check_2coherence, check_coherence};
    use crate::tailbounds::{cauchy_like_check, markov_for, variances, Side};
    use approx::assert_abs_diff_eq;

    fn three() -> Partition {
        Partition::numbered(3).unwrap()
    }

    fn x_three() -> Gamble {
        Gamble::new(&three(), vec![-1.0, 1.0, 2.0]).unwrap()
    }

    fn three_atoms() -> Assessment {
        Assessment::new(&three()).with_lower("X", x_three(), 0.75).unwrap()
    }

    #[test]
    fn envelope_three_atoms() {
        let e = exact_envelope(&three_atoms(), &x_three().map(|v| v * v)).unwrap();
        assert_abs_diff_eq!(e.lower, 1.0, epsilon = 1e-12);
        // The maximum sits at the vertex (0, 0, 1).
        assert_abs_diff_eq!(e.upper, 4.0, epsilon = 1e-12);

        let e = exact_envelope(&three_atoms(), &Gamble::constant(&three(), 2.5).unwrap()).unwrap();
        assert_abs_diff_eq!(e.lower, 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(e.upper, 2.5, epsilon = 1e-12);

        let e = exact_envelope(&three_atoms(), &x_three()).unwrap();
        assert_abs_diff_eq!(e.lower, 0.75, epsilon = 1e-12);
    }

    #[test]
    fn certify_examples() {
        let p = three();
        let x = Gamble::new(&p, vec![0.0, 1.0, 4.0]).unwrap();
        let a = Assessment::new(&p).with_lower("X", x, 0.75).unwrap();
        let r = markov_for(&a, "X", 3.0, Side::Lower).unwrap();
        assert!(certify(&a, &r).unwrap().valid);

        let mut r = markov_for(&a, "X", 1.0, Side::Upper).unwrap();
        assert!(certify(&a, &r).unwrap().valid);
        r.bound -= 0.5;
        assert!(!certify(&a, &r).unwrap().valid);

        let vac = markov_for(&a, "X", 0.5, Side::Upper).unwrap();
        assert_eq!(vac.bound, 1.0);
        assert!(certify(&a, &vac).unwrap().valid);
    }

    #[test]
    fn sampling_examples() {
        assert!(sample_credal(&three_atoms(), 0, 7).unwrap().is_empty());

        let probs = [0.2, 0.5, 0.3];
        let precise = Assessment::precise(&three(), &probs).unwrap();
        for p in sample_credal(&precise, 20, 3).unwrap() {
            for (a, b) in p.iter().zip(&probs) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }

        let s = sample_credal(&three_atoms(), 100, 42).unwrap();
        assert_eq!(s.len(), 100);
        assert!(s.iter().all(|p| x_three().expectation(p) >= 0.75 - 1e-9));
        assert_eq!(s, sample_credal(&three_atoms(), 100, 42).unwrap());
        assert_eq!(s[10..20], sample_credal(&three_atoms(), 20, 42).unwrap()[10..20]);
    }

    #[test]
    fn brute_variance_examples() {
        let (lo, _) = brute_variance(&three_atoms(), "X", 200, 1).unwrap();
        assert_abs_diff_eq!(lo, 0.0, epsilon = 1e-12);

        let probs = [0.2, 0.5, 0.3];
        let a = Assessment::precise(&three(), &probs)
            .unwrap()
            .with_gamble("X", x_three())
            .unwrap();
        let (lo, hi) = brute_variance(&a, "X", 50, 1).unwrap();
        let v = variance(&x_three(), &probs);
        assert_abs_diff_eq!(lo, v, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, v, epsilon = 1e-12);

        let a = Assessment::new(&three())
            .with_gamble("C", Gamble::constant(&three(), 1.0).unwrap())
            .unwrap();
        let (lo, hi) = brute_variance(&a, "C", 10, 1).unwrap();
        assert!(lo.abs() < 1e-15 && hi.abs() < 1e-15);
    }

    #[test]
    fn generators_behave() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = gen::coherent(&mut rng, 4, 2, 3);
            assert!(check_coherence(&a).unwrap().pass);
            assert!(check_2coherence(&a).unwrap().pass);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn envelope_conjugacy(seed in any::<u64>(), atoms in 3usize..=6) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = gen::coherent(&mut rng, atoms, 1, 3);
                let y = gen::grid_gamble(&mut rng, a.partition(), -4, 4);
                let e = exact_envelope(&a, &y).unwrap();
                let n = exact_envelope(&a, &y.neg()).unwrap();
                prop_assert!((n.lower + e.upper).abs() < 1e-9);
                prop_assert!((n.upper + e.lower).abs() < 1e-9);
                prop_assert!(e.lower <= e.upper + 1e-12);
                prop_assert!(y.inf() <= e.lower + 1e-9 && e.upper <= y.sup() + 1e-9);
            }

            #[test]
            fn samples_satisfy_constraints_and_cauchy(seed in any::<u64>(), atoms in 3usize..=6) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = gen::coherent(&mut rng, atoms, 2, 3);
                let catalog: Vec<Gamble> = (0..4).map(|_| gen::grid_gamble(&mut rng, a.partition(), -4, 4)).collect();
                for p in sample_credal(&a, 30, seed).unwrap() {
                    for e in a.entries() {
                        prop_assert!(e.gamble.expectation(&p) >= e.lower - 1e-9);
                    }
                    for g in &catalog {
                        prop_assert!(cauchy_like_check(&p, g));
                    }
                }
            }

            #[test]
            fn brute_variance_inside_exact(seed in any::<u64>(), atoms in 3usize..=5) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = gen::coherent(&mut rng, atoms, 1, 3);
                let vr = variances(&a, "X").unwrap();
                let (lo, hi) = brute_variance(&a, "X", 200, seed).unwrap();
                prop_assert!(lo >= vr.lower_variance - 1e-9);
                prop_assert!(hi <= vr.upper_variance + 1e-6);
            }
        }
    }
}
