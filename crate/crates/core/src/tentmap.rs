//! Skew and extended tent maps over a finite-precision [`Unit`], plus the
//! orbit diagnostics used to study their digital degradation.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::Unit;

/// Orbit values kept in an [`OrbitReport`].
pub const SAMPLE_LEN: usize = 128;

/// Above this budget cycle detection switches from a visited-state table to
/// Brent's two-pointer method.
const TABLE_LIMIT: u64 = 1 << 20;

/// Parameters of the extended tent map: the peak `alpha` and the restart
/// value `beta` used whenever the orbit touches 0 or 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TentParams<T> {
    pub alpha: T,
    pub beta: T,
}

impl<T: Unit> TentParams<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        check_interior("alpha", alpha)?;
        check_interior("beta", beta)?;
        Ok(TentParams { alpha, beta })
    }
}

pub(crate) fn check_interior<T: Unit>(name: &str, v: T) -> Result<()> {
    if v.is_interior() {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{name} = {} must lie in (0, 1)", v.to_f64())))
    }
}

#[inline]
fn tent<T: Unit>(x: T, alpha: T) -> T {
    let y = if x <= alpha {
        x / alpha
    } else {
        (T::one() - x) / (T::one() - alpha)
    };
    if y > T::one() {
        T::one()
    } else if y < T::zero() {
        T::zero()
    } else {
        y
    }
}

/// One step of the skew tent map `F_alpha`.
pub fn skew_tent_step<T: Unit>(x: T, alpha: T) -> Result<T> {
    check_interior("alpha", alpha)?;
    Ok(tent(x, alpha))
}

/// One step of the extended map: `F_alpha` on the open interval, `beta` on
/// the two boundary states.
#[inline]
pub fn extended_step<T: Unit>(x: T, p: &TentParams<T>) -> T {
    if x.is_interior() {
        tent(x, p.alpha)
    } else {
        p.beta
    }
}

/// Secret initial condition from a public timestamp: `F_gamma^(4n)(10^floor(log10 t) / t)`.
pub fn derive_x0<T: Unit>(t: u64, gamma: T, n: u32) -> Result<T> {
    if t == 0 {
        return Err(Error::Domain("timestamp t must be positive".into()));
    }
    check_interior("gamma", gamma)?;
    let scale = 10u64.pow(t.ilog10());
    let mut x = T::from_ratio(scale, t);
    for _ in 0..4 * n {
        x = tent(x, gamma);
    }
    Ok(x)
}

/// Lazily generated orbit `x_1, x_2, ...` of the extended map.
#[derive(Clone, Debug)]
pub struct Orbit<T> {
    x: T,
    params: TentParams<T>,
}

impl<T: Unit> Orbit<T> {
    pub fn new(x0: T, params: TentParams<T>) -> Self {
        Orbit { x: x0, params }
    }

    pub fn current(&self) -> T {
        self.x
    }
}

impl<T: Unit> Iterator for Orbit<T> {
    type Item = T;

    #[inline]
    fn next(&mut self) -> Option<T> {
        self.x = extended_step(self.x, &self.params);
        Some(self.x)
    }
}

/// Orbit whose least significant bit is XORed with a caller-supplied bit
/// every `interval` steps. Yields `x_1, x_2, ...` after perturbation; stops
/// when the perturbation source runs dry.
pub struct PerturbedOrbit<T, I> {
    orbit: Orbit<T>,
    interval: u64,
    step: u64,
    source: I,
}

impl<T: Unit, I: Iterator<Item = bool>> PerturbedOrbit<T, I> {
    pub fn new(x0: T, params: TentParams<T>, interval: u64, source: I) -> Self {
        assert!(interval > 0, "perturbation interval must be positive");
        PerturbedOrbit {
            orbit: Orbit::new(x0, params),
            interval,
            step: 0,
            source,
        }
    }
}

impl<T: Unit, I: Iterator<Item = bool>> Iterator for PerturbedOrbit<T, I> {
    type Item = T;

    fn next(&mut self) -> Option<T> {
        let mut x = self.orbit.next()?;
        self.step += 1;
        if self.step.is_multiple_of(self.interval) && self.source.next()? {
            x = x.flip_lsb();
            self.orbit.x = x;
        }
        Some(x)
    }
}

/// `[x_1, ..., x_count]`.
pub fn iterate_orbit<T: Unit>(x0: T, p: &TentParams<T>, count: usize) -> Vec<T> {
    Orbit::new(x0, *p).take(count).collect()
}

/// Binary precision of a nonzero value (`n_x` for `x = (0.a1...an)_2`, `a_n = 1`).
pub fn binary_precision<T: Unit>(x: T) -> Result<u32> {
    x.binary_precision()
        .ok_or_else(|| Error::Domain("binary precision of zero is undefined".into()))
}

/// Rho shape of an eventually periodic orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cycle {
    /// Index of the first orbit value that lies on the cycle (`x_0` is index 0).
    pub transient_len: u64,
    pub period: u64,
}

impl Cycle {
    pub fn rho_len(&self) -> u64 {
        self.transient_len + self.period
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitReport<T> {
    /// `None` when no repetition was found within the iteration budget.
    pub cycle: Option<Cycle>,
    /// Index of the first iterate (`i >= 1`) equal to 0 or 1.
    pub hit_boundary_at: Option<u64>,
    /// `x_0, x_1, ...` up to [`SAMPLE_LEN`] values.
    pub samples: Vec<T>,
}

impl<T> OrbitReport<T> {
    pub fn is_conclusive(&self) -> bool {
        self.cycle.is_some()
    }

    pub fn transient_len(&self) -> Option<u64> {
        self.cycle.map(|c| c.transient_len)
    }

    pub fn period(&self) -> Option<u64> {
        self.cycle.map(|c| c.period)
    }
}

/// Finds the eventual cycle of the orbit from `x0` by exact state equality,
/// computing at most `max_iter` map steps during detection.
pub fn analyze_orbit<T: Unit>(x0: T, p: &TentParams<T>, max_iter: u64) -> OrbitReport<T> {
    let samples = std::iter::once(x0)
        .chain(Orbit::new(x0, *p))
        .take(SAMPLE_LEN.min(max_iter.saturating_add(1) as usize))
        .collect();
    let (cycle, hit_boundary_at) = if max_iter <= TABLE_LIMIT {
        detect_with_table(x0, p, max_iter)
    } else {
        detect_brent(x0, p, max_iter)
    };
    OrbitReport {
        cycle,
        hit_boundary_at,
        samples,
    }
}

fn is_boundary<T: Unit>(x: T) -> bool {
    !x.is_interior()
}

fn detect_with_table<T: Unit>(x0: T, p: &TentParams<T>, max_iter: u64) -> (Option<Cycle>, Option<u64>) {
    let mut seen: HashMap<T::Key, u64> = HashMap::new();
    let mut hit = None;
    let mut x = x0;
    seen.insert(x.key(), 0);
    for i in 1..=max_iter {
        x = extended_step(x, p);
        if hit.is_none() && is_boundary(x) {
            hit = Some(i);
        }
        if let Some(&first) = seen.get(&x.key()) {
            let cycle = Cycle {
                transient_len: first,
                period: i - first,
            };
            return (Some(cycle), hit);
        }
        seen.insert(x.key(), i);
    }
    (None, hit)
}

fn detect_brent<T: Unit>(x0: T, p: &TentParams<T>, max_iter: u64) -> (Option<Cycle>, Option<u64>) {
    let step = |x| extended_step(x, p);
    let mut hit = None;
    let mut power = 1u64;
    let mut period = 1u64;
    let mut tortoise = x0;
    let mut hare = step(x0);
    let mut hare_index = 1u64;
    if is_boundary(hare) {
        hit = Some(1);
    }
    while tortoise.key() != hare.key() {
        if hare_index >= max_iter {
            return (None, hit);
        }
        if power == period {
            tortoise = hare;
            power *= 2;
            period = 0;
        }
        hare = step(hare);
        hare_index += 1;
        period += 1;
        if hit.is_none() && is_boundary(hare) {
            hit = Some(hare_index);
        }
    }

    let mut tortoise = x0;
    let mut hare = x0;
    for _ in 0..period {
        hare = step(hare);
    }
    let mut transient = 0u64;
    while tortoise.key() != hare.key() {
        tortoise = step(tortoise);
        hare = step(hare);
        transient += 1;
    }
    let cycle = Cycle {
        transient_len: transient,
        period,
    };
    (Some(cycle), hit)
}

/// Index of the first iterate in `1..=max_iter` that equals 0 or 1.
pub fn first_hit_boundary<T: Unit>(x0: T, p: &TentParams<T>, max_iter: u64) -> Option<u64> {
    let mut x = x0;
    for i in 1..=max_iter {
        x = extended_step(x, p);
        if is_boundary(x) {
            return Some(i);
        }
    }
    None
}
