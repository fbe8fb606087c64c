mod args;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use cm_core::dist::{self, DistributionFamily, LowerBoundParams};
use cm_core::io::{self, CertificationFile, FORMAT_VERSION};
use cm_core::{experiments, mechanisms, verify, Error};
use serde::Serialize;

use args::{Cli, Command};

/// Certification ran but at least one verdict failed.
const EXIT_VERDICT_FAILED: u8 = 1;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 3,
        Error::Json(_) => 4,
        Error::InvalidTypeSpace(_) => 10,
        Error::WrongLength { .. } => 11,
        Error::NegativeMass { .. } => 12,
        Error::NotNormalized { .. } => 13,
        Error::ZeroMarginal { .. } => 14,
        Error::BadEps(_) => 15,
        Error::BadH(_) => 16,
        Error::HeterogeneousTypeSpaces => 17,
        Error::EmptyFamily => 18,
        Error::InfeasibleSizes(_) => 19,
        Error::DimensionOverflow { .. } => 20,
        Error::NoSolution { .. } => 21,
        Error::CmViolation { .. } => 22,
        Error::RankDeficient { .. } => 23,
        Error::ProfileOutOfSupport(_) => 24,
        Error::UnsupportedBidderCount { .. } => 25,
        Error::AllZeroLikelihood => 26,
        Error::InvalidArgument(_) => 27,
    }
}

/// 12 significant digits, fixed notation for moderate magnitudes.
fn sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp) as usize, x)
    } else {
        format!("{x:.11e}")
    }
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    format: u32,
    #[serde(flatten)]
    body: &'a T,
}

fn write_versioned<T: Serialize>(path: &Path, body: &T) -> cm_core::Result<()> {
    io::write_json(path, &Versioned { format: FORMAT_VERSION, body })
}

fn run(cli: Cli) -> cm_core::Result<u8> {
    let (tol, cap) = (cli.tol, cli.cap);
    if !(tol > 0.0) || cap == 0 {
        return Err(Error::InvalidArgument("tol must be positive and cap at least 1".into()));
    }
    match cli.command {
        Command::CheckCm(a) => {
            let fam = match (&a.dist, &a.family) {
                (Some(p), _) => DistributionFamily::new(vec![io::read_distribution(p)?])?,
                (None, Some(p)) => io::read_family(p)?,
                (None, None) => return Err(Error::InvalidArgument("pass --dist or --family".into())),
            };
            for (label, d) in fam.labels().iter().zip(fam.members()) {
                let verdicts = dist::check_cm_condition(d, tol)?;
                let shown: Vec<String> =
                    verdicts.iter().enumerate().map(|(i, ok)| format!("bidder {}: {ok}", i + 1)).collect();
                println!("{label}: {}", shown.join(", "));
            }
        }
        Command::Span(a) => println!("{}", dist::span_dimension(&io::read_family(&a.family)?, tol)),
        Command::Bound(a) => println!("{}", mechanisms::sample_bound(&io::read_family(&a.family)?, tol)),
        Command::Search(a) => println!("{}", mechanisms::sample_search(&io::read_family(&a.family)?, tol, cap)?),
        Command::Build(a) => {
            let fam = io::read_family(&a.family)?;
            let m = match a.m {
                Some(m) => m,
                None => mechanisms::sample_search(&fam, tol, cap)?,
            };
            // residual tolerance is looser than the rank tolerance by default
            let auction = mechanisms::solve_lotteries(&fam, m, tol.max(cm_core::linalg::DEFAULT_SOLVE_TOL), cap)?;
            io::write_auction(&a.out, &auction)?;
            println!("m = {m}");
            for (i, r) in auction.residuals().iter().enumerate() {
                println!("bidder {} residual {}", i + 1, sig(*r));
            }
            println!("max |charge| {}", sig(auction.max_abs_charge()));
            println!("wrote {}", a.out.display());
        }
        Command::Certify(a) => {
            let fam = io::read_family(&a.family)?;
            let auction = io::read_auction(&a.auction, fam)?;
            let file = CertificationFile::new(tol, verify::exact_certify(&auction, tol, cap)?);
            for r in &file.reports {
                println!(
                    "{}: revenue {} surplus {} max|interim| {} dsic {} interim_ir {} full_surplus {}",
                    r.label,
                    sig(r.revenue),
                    sig(r.surplus),
                    sig(r.max_abs_interim_utility),
                    r.dsic_ok,
                    r.interim_ir_ok,
                    r.full_surplus_ok
                );
            }
            if let Some(out) = &a.out {
                io::write_json(out, &file)?;
            }
            if !file.all_ok {
                return Ok(EXIT_VERDICT_FAILED);
            }
        }
        Command::Simulate(a) => {
            let fam = io::read_family(&a.family)?;
            let auction = io::read_auction(&a.auction, fam)?;
            let res = verify::monte_carlo(&auction, a.member, a.trials, a.seed)?;
            println!("trials {} seed {}", res.trials, res.seed);
            println!("revenue {} +/- {}", sig(res.mean_revenue), sig(res.revenue_std_error));
            for (i, (u, se)) in res.mean_utility.iter().zip(&res.utility_std_error).enumerate() {
                println!("bidder {} utility {} +/- {}", i + 1, sig(*u), sig(*se));
            }
            if let Some(out) = &a.out {
                write_versioned(out, &res)?;
            }
        }
        Command::DemoCoin(a) => {
            if let Some(p) = &a.family_out {
                io::write_family(p, &dist::coin_family(a.h, a.eps)?)?;
            }
            let curve = experiments::distinguisher_curve(a.h, a.eps, &a.counts, a.trials, a.seed)?;
            println!("{:>10}  {:>16}  {:>16}", "samples", "error_rate", "std_error");
            for (k, m) in curve.sample_counts.iter().enumerate() {
                println!("{m:>10}  {:>16}  {:>16}", sig(curve.error_rates[k]), sig(curve.std_error(k)));
            }
            if let Some(p) = &a.out {
                write_versioned(p, &curve)?;
            }
            if let Some(p) = &a.csv {
                std::fs::write(p, curve.to_csv())?;
            }
        }
        Command::DemoGap(a) => {
            let reports = a.h.iter().map(|&h| experiments::surplus_gap(h, a.eps)).collect::<cm_core::Result<Vec<_>>>()?;
            println!("{:>5}  {:>16}  {:>16}  {:>16}  {:>16}", "h", "full_surplus", "lookahead_D_A", "bound", "ratio");
            for g in &reports {
                println!(
                    "{:>5}  {:>16}  {:>16}  {:>16}  {:>16}",
                    g.h,
                    sig(g.full_surplus),
                    sig(g.lookahead_rev_da),
                    sig(g.revenue_bound),
                    sig(g.ratio)
                );
            }
            if let Some(p) = &a.out {
                write_versioned(p, &reports)?;
            }
        }
        Command::DemoLb(a) => {
            let t = a.t.unwrap_or(a.r + 1);
            let params = match a.seed {
                Some(seed) => LowerBoundParams::seeded(t, seed),
                None => LowerBoundParams::uniform(t),
            };
            let fam = dist::lower_bound_family_with(a.k, a.r, (t, t), &params)?;
            if let Some(p) = &a.family_out {
                io::write_family(p, &fam)?;
            }
            println!("k = {}, r = {}, span = {}", a.k, a.r, dist::span_dimension(&fam, tol));
            let full = t * a.k;
            for m in [a.k - a.r, a.k - a.r + 1] {
                for i in 0..2 {
                    let rank = mechanisms::stacked_rank(&fam, i, m, tol, cap)?;
                    println!("m = {m} bidder {} rank {rank} / {full}", i + 1);
                }
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
