use tentbreak::analysis::{
    beta_impact, degradation_report, first_hit_census, full_complexity_curve, orbit_length_census, sample_histogram,
    CsvTable, Report,
};
use tentbreak::tentmap::iterate_orbit;
use tentbreak::{with_unit, Backend, Extractor, TentParams, Unit};

use crate::args::{AnalyzeArgs, Config, ExtractorArg, Target};
use crate::io::{emit, parse_unit};
use crate::UsageError;

pub fn run(args: &AnalyzeArgs, cfg: &Config) -> anyhow::Result<()> {
    let csv = match args.target {
        Target::Fig1 => with_unit!(cfg.backend.unwrap_or(Backend::Binary64), |T| fig1::<T>(args, cfg))?,
        Target::Fig2 => full_complexity_curve(cfg.n.unwrap_or(16))?.to_csv(),
        Target::Fig3 => with_unit!(cfg.backend.unwrap_or(Backend::Binary64), |T| fig3::<T>(args))?,
        Target::Beta => beta(args, cfg)?.to_csv(),
        Target::Census => census(args, cfg)?.to_csv(),
    };
    emit(cfg.out.as_deref(), csv.as_bytes())
}

fn value<T: Unit>(what: &str, given: &Option<String>, default: &str) -> anyhow::Result<T> {
    parse_unit(what, given.as_deref().unwrap_or(default))
}

fn fig1<T: Unit>(args: &AnalyzeArgs, cfg: &Config) -> anyhow::Result<String> {
    let p = TentParams::new(value::<T>("alpha", &args.alpha, "0.1")?, value::<T>("beta", &args.beta, "0.7")?)?;
    let x0 = value::<T>("x0", &args.x0, "0.3")?;
    let extractor = match args.extractor {
        ExtractorArg::Standard => Extractor::Standard,
        ExtractorArg::Mended => Extractor::Mended,
    };
    let h = sample_histogram(&p, x0, cfg.n.unwrap_or(2), args.samples.unwrap_or(1000), extractor)?;
    Ok(h.to_csv())
}

/// Summary of the `alpha = 0.5` orbit, or its first values with `--orbit`.
fn fig3<T: Unit>(args: &AnalyzeArgs) -> anyhow::Result<String> {
    if args.alpha.is_some() {
        return Err(UsageError("fig3 fixes alpha = 0.5".into()).into());
    }
    let beta = value::<T>("beta", &args.beta, "0.4")?;
    let x0 = value::<T>("x0", &args.x0, "0.123")?;
    if args.orbit {
        let p = TentParams::new(T::half(), beta)?;
        let mut s = String::from("index,x\n");
        for (i, x) in iterate_orbit(x0, &p, args.steps).into_iter().enumerate() {
            s.push_str(&format!("{i},{:?}\n", x.to_f64()));
        }
        return Ok(s);
    }
    Ok(degradation_report(beta, x0, args.max_iter)?.to_report().to_csv())
}

fn single_l(args: &AnalyzeArgs, default: u32) -> anyhow::Result<u32> {
    match args.l.as_slice() {
        [] => Ok(default),
        [l] => Ok(*l),
        _ => Err(UsageError("beta takes a single --l".into()).into()),
    }
}

/// Boundary-hit expectation at `--l`, plus a measured census at
/// `--empirical-l`.
fn beta(args: &AnalyzeArgs, cfg: &Config) -> anyhow::Result<Report> {
    let impact = beta_impact(single_l(args, 62)?)?;
    let mut r = Report::new();
    r.push("precision_bits", impact.l);
    r.push("hit_probability", impact.p);
    r.push("expected_first_hit", impact.expected_first_hit);
    r.push("decryptable_bytes", impact.decryptable_bytes);
    let samples = args.samples.unwrap_or(200) as usize;
    let census = first_hit_census(args.empirical_l, samples, cfg.seed, cfg.workers)?;
    for (k, v) in census.to_report().rows() {
        r.push(format!("empirical_{k}"), v.as_str());
    }
    Ok(r)
}

/// Mean rho length per precision and its growth between precisions.
fn census(args: &AnalyzeArgs, cfg: &Config) -> anyhow::Result<Report> {
    let ls = if args.l.is_empty() { vec![12, 16, 20] } else { args.l.clone() };
    let alpha = value::<f64>("alpha", &args.alpha, "0.37")?;
    let beta = value::<f64>("beta", &args.beta, "0.7")?;
    let samples = args.samples.unwrap_or(500) as usize;
    let mut r = Report::new();
    r.push("alpha", alpha);
    r.push("beta", beta);
    r.push("samples", samples);
    let mut prev: Option<(u32, f64)> = None;
    for &l in &ls {
        let mean = orbit_length_census(l, alpha, beta, samples, cfg.seed, cfg.workers)?.mean();
        r.push(format!("mean_rho_length_L{l}"), mean);
        r.push(format!("sqrt_state_space_L{l}"), 2f64.powf(l as f64 / 2.0));
        if let Some((pl, pm)) = prev {
            r.push(format!("growth_L{pl}_to_L{l}"), mean / pm);
        }
        prev = Some((l, mean));
    }
    Ok(r)
}
