//! Statistics of the keystream and of the digitized map: value histograms,
//! guess complexity of biased noise vectors, and orbit censuses.

mod complexity;
mod csv;
mod dynamics;
mod histogram;

pub use complexity::{
    beta_impact, binomial, class_member_prob, class_offset_h, complexity_curve, full_complexity_curve,
    guess_complexity, printed_guess_complexity, theoretical_prob, BetaImpact, ComplexityCurve, GuessComplexity,
};
pub use csv::{emit_csv, format_number, CsvTable, Report, ReportValue, SIGNIFICANT_DIGITS};
pub use dynamics::{
    degradation_report, exhaustive_orbit_census, first_hit_census, orbit_length_census, DegradationReport,
    FirstHitCensus, OrbitCensus, MAX_CENSUS_BITS,
};
pub use histogram::{sample_histogram, Histogram, MAX_HISTOGRAM_N};
