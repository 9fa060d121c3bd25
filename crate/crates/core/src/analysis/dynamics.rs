//! Finite-precision dynamics: the short cycles of the `alpha = 1/2` map,
//! rho lengths of random digital orbits, and how soon orbits reach `{0, 1}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::csv::Report;
use crate::error::{Error, Result};
use crate::scalar::{Backend, Unit};
use crate::tentmap::{analyze_orbit, binary_precision, OrbitReport, TentParams};

/// Census precisions are kept small enough that every orbit closes quickly.
pub const MAX_CENSUS_BITS: u32 = 24;

/// Cycle structure of `G_{1/2, beta}` from `x0`, checked against the
/// period law `n_beta + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DegradationReport<T> {
    pub beta: T,
    pub x0: T,
    pub orbit: OrbitReport<T>,
    pub beta_precision: u32,
    /// `None` for `x0 = 0`.
    pub x0_precision: Option<u32>,
    pub expected_period: u64,
    pub period_matches: bool,
    pub transient_within_bound: bool,
}

impl<T: Unit> DegradationReport<T> {
    /// Set when the backend deviates from exact dyadic arithmetic.
    pub fn flagged(&self) -> bool {
        !(self.period_matches && self.transient_within_bound)
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new();
        r.push("backend", T::backend());
        r.push("alpha", "0.5");
        r.push("beta", self.beta.to_f64());
        r.push("x0", self.x0.to_f64());
        r.push("beta_precision", self.beta_precision);
        r.push("x0_precision", opt(self.x0_precision));
        r.push("transient", opt(self.orbit.transient_len()));
        r.push("period", opt(self.orbit.period()));
        r.push("expected_period", self.expected_period);
        r.push("first_boundary_hit", opt(self.orbit.hit_boundary_at));
        r.push("period_matches", self.period_matches);
        r.push("transient_within_bound", self.transient_within_bound);
        r.push("flagged", self.flagged());
        r
    }
}

fn opt<V: ToString>(v: Option<V>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

pub fn degradation_report<T: Unit>(beta: T, x0: T, max_iter: u64) -> Result<DegradationReport<T>> {
    let p = TentParams::new(T::half(), beta)?;
    let orbit = analyze_orbit(x0, &p, max_iter);
    let beta_precision = binary_precision(beta)?;
    let x0_precision = x0.binary_precision();
    let expected_period = beta_precision as u64 + 1;
    let period_matches = orbit.period() == Some(expected_period);
    let transient_within_bound = orbit
        .transient_len()
        .is_some_and(|t| t <= x0_precision.unwrap_or(0) as u64 + 1);
    Ok(DegradationReport {
        beta,
        x0,
        orbit,
        beta_precision,
        x0_precision,
        expected_period,
        period_matches,
        transient_within_bound,
    })
}

fn check_census_bits(l: u32) -> Result<()> {
    if !(1..=MAX_CENSUS_BITS).contains(&l) {
        return Err(Error::ParameterDomain(format!(
            "census precision {l} outside 1..={MAX_CENSUS_BITS}"
        )));
    }
    Ok(())
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))
}

/// Independent stream per sample, so results do not depend on `workers`.
fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Rho lengths (transient + period) of orbits from random starting points.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitCensus {
    pub l: u32,
    pub rho_lengths: Vec<u64>,
}

impl OrbitCensus {
    pub fn mean(&self) -> f64 {
        self.rho_lengths.iter().sum::<u64>() as f64 / self.rho_lengths.len().max(1) as f64
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new();
        r.push("precision_bits", self.l);
        r.push("samples", self.rho_lengths.len());
        r.push("mean_rho_length", self.mean());
        r.push("max_rho_length", self.rho_lengths.iter().max().copied().unwrap_or(0));
        r.push("sqrt_state_space", 2f64.powf(self.l as f64 / 2.0));
        r
    }
}

fn rho_length<T: Unit>(x0: T, p: &TentParams<T>, l: u32) -> u64 {
    // at most 2^L + 1 distinct states, so a repeat is certain within budget
    let report = analyze_orbit(x0, p, (1u64 << l) + 2);
    report.cycle.expect("finite state space").rho_len()
}

fn census_with<T: Unit>(l: u32, alpha: f64, beta: f64, samples: usize, seed: u64, workers: usize) -> Result<OrbitCensus> {
    let p = TentParams::new(T::from_f64(alpha), T::from_f64(beta))?;
    let rho_lengths = pool(workers)?.install(|| {
        (0..samples)
            .into_par_iter()
            .map(|i| rho_length(T::random_interior(&mut sample_rng(seed, i)), &p, l))
            .collect()
    });
    Ok(OrbitCensus { l, rho_lengths })
}

/// Mean rho length over `samples` random starting points at `L`-bit
/// fixed-point precision. `alpha` and `beta` are rounded to the grid.
pub fn orbit_length_census(l: u32, alpha: f64, beta: f64, samples: usize, seed: u64, workers: usize) -> Result<OrbitCensus> {
    check_census_bits(l)?;
    crate::with_unit!(Backend::Fixed(l), |T| census_with::<T>(l, alpha, beta, samples, seed, workers))
}

/// Every starting point `k / 2^L`, `k = 0 .. 2^L - 1`.
pub fn exhaustive_orbit_census(l: u32, alpha: f64, beta: f64) -> Result<OrbitCensus> {
    check_census_bits(l)?;
    crate::with_unit!(Backend::Fixed(l), |T| {
        let p = TentParams::new(T::from_f64(alpha), T::from_f64(beta))?;
        let rho_lengths = (0..1u64 << l)
            .map(|k| rho_length(T::from_ratio(k, 1 << l), &p, l))
            .collect();
        Ok(OrbitCensus { l, rho_lengths })
    })
}

/// First index at which random orbits reach `{0, 1}`, or `None` for orbits
/// that settle into a cycle avoiding both.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstHitCensus {
    pub l: u32,
    pub first_hits: Vec<Option<u64>>,
}

impl FirstHitCensus {
    pub fn hits(&self) -> impl Iterator<Item = u64> + '_ {
        self.first_hits.iter().flatten().copied()
    }

    pub fn hit_count(&self) -> usize {
        self.hits().count()
    }

    /// Mean over orbits that hit at all.
    pub fn mean_hit(&self) -> Option<f64> {
        let k = self.hit_count();
        (k > 0).then(|| self.hits().sum::<u64>() as f64 / k as f64)
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new();
        r.push("precision_bits", self.l);
        r.push("orbits", self.first_hits.len());
        r.push("orbits_hitting_boundary", self.hit_count());
        r.push("mean_first_hit", opt(self.mean_hit()));
        r.push("model_expectation", 2f64.powi(self.l as i32 - 1));
        r
    }
}

fn first_hit_with<T: Unit>(l: u32, samples: usize, seed: u64, workers: usize) -> Result<FirstHitCensus> {
    let first_hits = pool(workers)?.install(|| {
        (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = sample_rng(seed, i);
                let p = TentParams::new(T::random_interior(&mut rng), T::random_interior(&mut rng)).expect("interior");
                let x0 = T::random_interior(&mut rng);
                analyze_orbit(x0, &p, (1u64 << l) + 2).hit_boundary_at
            })
            .collect()
    });
    Ok(FirstHitCensus { l, first_hits })
}

/// Random `alpha`, `beta`, `x0` at `L`-bit fixed-point precision; each
/// orbit is followed until it closes a cycle.
pub fn first_hit_census(l: u32, samples: usize, seed: u64, workers: usize) -> Result<FirstHitCensus> {
    check_census_bits(l)?;
    if l < 2 {
        return Err(Error::ParameterDomain("first-hit census needs at least 2 bits".into()));
    }
    crate::with_unit!(Backend::Fixed(l), |T| first_hit_with::<T>(l, samples, seed, workers))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::CsvTable;
    use crate::{Fixed, Fp62};

    #[test]
    fn period_law_examples() {
        let r = degradation_report(Fp62::from_decimal("0.375").unwrap(), Fp62::from_decimal("0.3").unwrap(), 1 << 12).unwrap();
        assert_eq!(r.orbit.period(), Some(4));
        assert!(!r.flagged());

        let r = degradation_report(0.4f64, 0.123, 1 << 12).unwrap();
        assert_eq!(r.beta_precision, 53);
        assert_eq!(r.orbit.period(), Some(54));
        assert!(!r.flagged());

        let half = Fp62::from_decimal("0.5").unwrap();
        let r = degradation_report(half, half, 100).unwrap();
        assert_eq!((r.orbit.transient_len(), r.orbit.period()), (Some(0), Some(2)));
        let rows = r.to_report().to_csv();
        assert!(rows.contains("period,2\n"));
        assert!(rows.contains("flagged,false\n"));
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let r = degradation_report(0.4f64, 0.123, 10).unwrap();
        assert!(r.flagged());
        assert_eq!(r.orbit.period(), None);
    }

    #[test]
    fn exhaustive_two_bit_census() {
        // states 0, 1/4, 1/2, 3/4 under G_{1/2, 1/4}: cycle 1/4 -> 1/2 -> 1 -> 1/4,
        // 0 and 3/4 each one step off it
        let c = exhaustive_orbit_census(2, 0.5, 0.25).unwrap();
        assert_eq!(c.rho_lengths, vec![4, 3, 3, 4]);
        assert_eq!(c.mean(), 3.5);
    }

    #[test]
    fn census_grows_like_square_root() {
        let means: Vec<f64> = [12u32, 16, 20]
            .iter()
            .map(|&l| orbit_length_census(l, 0.37, 0.7, 300, 9, 4).unwrap().mean())
            .collect();
        for w in means.windows(2) {
            let ratio = w[1] / w[0];
            assert!((2.0..=8.0).contains(&ratio), "{means:?}");
        }
    }

    #[test]
    fn census_is_independent_of_workers() {
        let a = orbit_length_census(14, 0.37, 0.7, 64, 1, 1).unwrap();
        let b = orbit_length_census(14, 0.37, 0.7, 64, 1, 7).unwrap();
        assert_eq!(a, b);
        let c = first_hit_census(10, 32, 5, 1).unwrap();
        let d = first_hit_census(10, 32, 5, 3).unwrap();
        assert_eq!(c, d);
    }

    /// Integer model of `G_{1/2, beta}` on `k / 2^16`: rho length from `k0`.
    fn dyadic_rho(k0: u64, beta: u64) -> u64 {
        let one = 1u64 << 16;
        let step = |k: u64| match k {
            0 | 65536 => beta,
            k if k <= one / 2 => 2 * k,
            k => 2 * (one - k),
        };
        let mut cycle = vec![beta];
        let mut k = step(beta);
        while k != beta {
            cycle.push(k);
            k = step(k);
        }
        let mut k = k0;
        let mut transient = 0;
        while !cycle.contains(&k) {
            k = step(k);
            transient += 1;
        }
        transient + cycle.len() as u64
    }

    #[test]
    fn half_alpha_census_follows_period_law() {
        let samples = 400;
        let beta = 0.7;
        let c = orbit_length_census(16, 0.5, beta, samples, 3, 2).unwrap();
        let b = Fixed::<16>::from_f64(beta);
        for (i, &rho) in c.rho_lengths.iter().enumerate() {
            let x0 = Fixed::<16>::random_interior(&mut sample_rng(3, i));
            assert_eq!(rho, dyadic_rho(x0.raw(), b.raw()));
        }
        // x0 reaches the beta cycle within binary_precision(x0) doublings
        let n_beta = b.binary_precision().unwrap() as f64;
        let mean_bp = (0..samples)
            .map(|i| Fixed::<16>::random_interior(&mut sample_rng(3, i)).binary_precision().unwrap() as f64)
            .sum::<f64>()
            / samples as f64;
        assert!((c.mean() - (mean_bp + n_beta + 1.0)).abs() <= 3.0, "{} vs {}", c.mean(), mean_bp + n_beta + 1.0);
        assert!(c.mean() < 2f64.powi(8));
    }

    #[test]
    fn census_domain() {
        assert!(orbit_length_census(0, 0.3, 0.7, 1, 0, 1).is_err());
        assert!(orbit_length_census(25, 0.3, 0.7, 1, 0, 1).is_err());
        assert!(first_hit_census(1, 1, 0, 1).is_err());
    }

    #[test]
    fn first_hits_precede_cycle_closure() {
        let c = first_hit_census(8, 200, 11, 2).unwrap();
        assert_eq!(c.first_hits.len(), 200);
        assert!(c.hits().all(|h| (1..=258).contains(&h)));
        let r = c.to_report().to_csv();
        assert!(r.contains("model_expectation,128\n"));
    }
}
