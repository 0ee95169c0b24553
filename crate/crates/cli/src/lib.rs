//! Command implementations behind the `gauss-eof` binary. Each command
//! returns its full standard output and exit code, so nothing is printed
//! until a command has succeeded.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gauss_eof::channels::{fiber_output, FiberSpec, Setting};
use gauss_eof::decomp::{lemma3_witness_tol, matrix_from_rows, GaussMixture};
use gauss_eof::eof_analytic::{eof_two_mode_with, EofOptions};
use gauss_eof::eof_numeric::{additivity_gap, additivity_gap_exploratory, eof_numeric, OptimizerConfig};
use gauss_eof::normal_form::two_mode_invariants;
use gauss_eof::symplectic::{
    is_pure, is_valid_state, log_negativity, partial_transpose, purity_defect, symplectic_eigenvalues,
    GaussianState, Partition,
};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "gauss-eof", version, about = "Gaussian entanglement of formation toolkit")]
pub struct Cli {
    /// Numerical tolerance for validity, purity and separability decisions.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seed for randomized solvers.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 uses all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a covariance matrix is physical and report its spectrum.
    Validate { input: PathBuf },
    /// Two-mode normal-form invariants (na, nb, kq, kp).
    Invariants { input: PathBuf },
    /// Logarithmic negativity (natural log) for a bipartition.
    Negativity {
        input: PathBuf,
        #[command(flatten)]
        party: PartyArg,
    },
    /// Closed-form entanglement of formation of a two-mode state.
    Eof { input: PathBuf },
    /// Numeric entanglement of formation for up to four modes.
    EofNumeric {
        input: PathBuf,
        #[command(flatten)]
        party: PartyArg,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
    },
    /// Compare the numeric value on a tensor product of two two-mode states
    /// with the sum of single-copy values.
    AdditivityCheck {
        first: PathBuf,
        second: PathBuf,
        /// Allow non-symmetric inputs; the report is flagged exploratory.
        #[arg(long)]
        force: bool,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
    },
    /// Entanglement along a lossy fibre as CSV.
    FiberSweep(FiberSweepArgs),
    /// Entanglement over a squeezing by length grid, symmetric setting at zero temperature, as CSV.
    SqueezeSurface(SqueezeSurfaceArgs),
    /// Check a Gaussian mixture against a target precision matrix.
    DecompCheck {
        #[arg(long)]
        mixture: PathBuf,
        /// JSON array of matrix rows.
        #[arg(long)]
        target: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct PartyArg {
    /// Comma-separated modes of party A (default: first half).
    #[arg(long, value_delimiter = ',')]
    pub party_a: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SettingArg {
    Sym,
    Asym,
    Both,
}

impl SettingArg {
    fn settings(self) -> Vec<Setting> {
        match self {
            SettingArg::Sym => vec![Setting::Symmetric],
            SettingArg::Asym => vec![Setting::Asymmetric],
            SettingArg::Both => vec![Setting::Symmetric, Setting::Asymmetric],
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FiberSweepArgs {
    /// Initial two-mode squeezing.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Fibre temperature in units of the photon energy.
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = SettingArg::Both)]
    pub setting: SettingArg,
    /// Largest length in units of the attenuation length.
    #[arg(long, default_value_t = 4.0)]
    pub lmax: f64,
    /// Number of grid intervals; the grid has steps + 1 points.
    #[arg(long, default_value_t = 40)]
    pub steps: usize,
    /// Also write each grid state as JSON into this directory.
    #[arg(long)]
    pub emit_states: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SqueezeSurfaceArgs {
    #[arg(long, default_value_t = 4.0)]
    pub rmax: f64,
    #[arg(long, default_value_t = 40)]
    pub rsteps: usize,
    #[arg(long, default_value_t = 2.0)]
    pub lmax: f64,
    #[arg(long, default_value_t = 10)]
    pub lsteps: usize,
}

/// Result of a command: text for standard output and the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, code: 0 }
    }
}

/// One line of sweep output.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub l_over_la: f64,
    pub setting: Setting,
    pub tau: f64,
    pub r: f64,
    pub e_g_ebits: f64,
    pub log_negativity: f64,
}

pub const CSV_HEADER: &str = "l_over_lA,setting,tau,r,e_g_ebits,log_negativity";

impl SweepRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            fmt_g(self.l_over_la),
            self.setting,
            fmt_g(self.tau),
            fmt_g(self.r),
            fmt_g(self.e_g_ebits),
            fmt_g(self.log_negativity)
        )
    }
}

/// `printf("%.12g")` formatting.
pub fn fmt_g(x: f64) -> String {
    const SIG: usize = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", SIG - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIG as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn read_state(path: &Path) -> Result<GaussianState> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    GaussianState::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn partition_for(state: &GaussianState, party: &PartyArg) -> Result<Partition> {
    let n = state.n_modes();
    let part = match &party.party_a {
        Some(modes) => Partition::from_party_a(n, modes.clone())?,
        None => Partition::split(n, n / 2)?,
    };
    Ok(part)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn optimizer(cli: &Cli, restarts: usize, max_iters: usize) -> OptimizerConfig {
    OptimizerConfig { restarts, max_iters, seed: cli.seed, ..Default::default() }
}

fn eof_options(cli: &Cli) -> EofOptions {
    EofOptions { tol: cli.tol, ..Default::default() }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome> {
    if !(cli.tol > 0.0) {
        bail!("--tol must be positive");
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build()?;
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Validate { input } => cmd_validate(cli, input),
        Command::Invariants { input } => {
            let inv = two_mode_invariants(&read_state(input)?)?;
            Ok(Outcome::ok(to_json(&json!({
                "na": inv.n_a,
                "nb": inv.n_b,
                "kq": inv.k_q,
                "kp": inv.k_p,
                "symmetric": inv.is_symmetric(cli.tol.max(1e-8)),
            }))?))
        }
        Command::Negativity { input, party } => {
            let st = read_state(input)?;
            let part = partition_for(&st, party)?;
            let s1 = symplectic_eigenvalues(&partial_transpose(&st, &part)?)?.min();
            Ok(Outcome::ok(to_json(&json!({
                "party_a": part.modes_a(),
                "log_negativity": log_negativity(&st, &part)?,
                "s1": s1,
            }))?))
        }
        Command::Eof { input } => {
            let res = eof_two_mode_with(&read_state(input)?, &eof_options(cli))?;
            Ok(Outcome::ok(to_json(&json!({
                "e_g_ebits": res.value.ebits(),
                "separable": res.separable,
                "optimal_x": res.optimal_x.map(|x| vec![vec![x[(0, 0)], x[(0, 1)]], vec![x[(1, 0)], x[(1, 1)]]]),
                "optimal_theta": res.optimal_theta,
                "invariants": res.invariants,
            }))?))
        }
        Command::EofNumeric { input, party, restarts, max_iters } => {
            let st = read_state(input)?;
            let part = partition_for(&st, party)?;
            let res = eof_numeric(&st, &part, &optimizer(cli, *restarts, *max_iters))?;
            let feasible = res.restarts.iter().filter(|o| o.feasible).count();
            Ok(Outcome::ok(to_json(&json!({
                "party_a": part.modes_a(),
                "e_g_ebits": res.value.ebits(),
                "feasibility_slack": res.feasibility_slack,
                "x": rows(res.param.x()),
                "y": rows(res.param.y()),
                "restarts": res.restarts.len(),
                "feasible_restarts": feasible,
            }))?))
        }
        Command::AdditivityCheck { first, second, force, restarts, max_iters } => {
            let i1 = two_mode_invariants(&read_state(first)?)?;
            let i2 = two_mode_invariants(&read_state(second)?)?;
            let cfg = optimizer(cli, *restarts, *max_iters);
            let rep = if *force { additivity_gap_exploratory(&i1, &i2, &cfg)? } else { additivity_gap(&i1, &i2, &cfg)? };
            Ok(Outcome::ok(to_json(&json!({
                "joint_ebits": rep.joint.value.ebits(),
                "single_copy_sum_ebits": rep.single_copy_sum,
                "gap": rep.gap,
                "exploratory": rep.exploratory,
                "feasibility_slack": rep.joint.feasibility_slack,
            }))?))
        }
        Command::FiberSweep(args) => cmd_fiber_sweep(cli, args),
        Command::SqueezeSurface(args) => cmd_squeeze_surface(cli, args),
        Command::DecompCheck { mixture, target } => cmd_decomp_check(cli, mixture, target),
    }
}

fn cmd_validate(cli: &Cli, input: &Path) -> Result<Outcome> {
    let st = read_state(input)?;
    let valid = is_valid_state(&st, cli.tol);
    let spectrum = symplectic_eigenvalues(&st).ok().map(|s| s.values().to_vec());
    let report = json!({
        "n_modes": st.n_modes(),
        "ordering": st.ordering(),
        "valid": valid,
        "pure": valid && is_pure(&st, cli.tol.max(1e-9)),
        "purity_defect": purity_defect(&st).ok(),
        "symplectic_spectrum": spectrum,
    });
    Ok(Outcome { stdout: to_json(&report)?, code: if valid { 0 } else { 1 } })
}

fn grid(max: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| if steps == 0 { 0.0 } else { max * i as f64 / steps as f64 }).collect()
}

fn sweep_row(r: f64, l: f64, tau: f64, setting: Setting, opts: &EofOptions) -> Result<(SweepRow, GaussianState)> {
    let st = fiber_output(r, &FiberSpec::new(l, tau, setting)?)?;
    let e = eof_two_mode_with(&st, opts)?;
    let en = log_negativity(&st, &Partition::two_mode())?;
    let row = SweepRow { l_over_la: l, setting, tau, r, e_g_ebits: e.value.ebits(), log_negativity: en };
    Ok((row, st))
}

fn check_range(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        bail!("--{name} must be a finite non-negative number, got {v}");
    }
    Ok(())
}

fn render_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.to_csv());
    }
    out
}

fn cmd_fiber_sweep(cli: &Cli, args: &FiberSweepArgs) -> Result<Outcome> {
    check_range("r", args.r)?;
    check_range("tau", args.tau)?;
    check_range("lmax", args.lmax)?;
    if args.steps == 0 {
        bail!("--steps must be at least 1");
    }
    let opts = eof_options(cli);
    let settings = args.setting.settings();
    let points: Vec<(usize, f64, Setting)> = grid(args.lmax, args.steps)
        .into_iter()
        .enumerate()
        .flat_map(|(i, l)| settings.iter().map(move |&s| (i, l, s)))
        .collect();
    let results: Vec<(usize, SweepRow, GaussianState)> = points
        .par_iter()
        .map(|&(i, l, s)| sweep_row(args.r, l, args.tau, s, &opts).map(|(row, st)| (i, row, st)))
        .collect::<Result<_>>()?;

    if let Some(dir) = &args.emit_states {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (i, row, st) in &results {
            let path = dir.join(format!("state_{}_{i:04}.json", row.setting));
            fs::write(&path, st.to_json()).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    let rows: Vec<SweepRow> = results.into_iter().map(|(_, row, _)| row).collect();
    Ok(Outcome::ok(render_csv(&rows)))
}

fn cmd_squeeze_surface(cli: &Cli, args: &SqueezeSurfaceArgs) -> Result<Outcome> {
    check_range("rmax", args.rmax)?;
    check_range("lmax", args.lmax)?;
    if args.rsteps == 0 {
        bail!("--rsteps must be at least 1");
    }
    let opts = eof_options(cli);
    let points: Vec<(f64, f64)> = grid(args.lmax, args.lsteps)
        .into_iter()
        .flat_map(|l| grid(args.rmax, args.rsteps).into_iter().map(move |r| (l, r)))
        .collect();
    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(l, r)| sweep_row(r, l, 0.0, Setting::Symmetric, &opts).map(|(row, _)| row))
        .collect::<Result<_>>()?;
    Ok(Outcome::ok(render_csv(&rows)))
}

fn cmd_decomp_check(cli: &Cli, mixture: &Path, target: &Path) -> Result<Outcome> {
    let text = fs::read_to_string(mixture).with_context(|| format!("reading {}", mixture.display()))?;
    let mix = GaussMixture::from_json(&text).with_context(|| format!("parsing {}", mixture.display()))?;
    let text = fs::read_to_string(target).with_context(|| format!("reading {}", target.display()))?;
    let target_rows: Vec<Vec<f64>> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", target.display()))?;
    let a = matrix_from_rows(&target_rows)?;
    let witness = lemma3_witness_tol(&a, &mix, cli.tol)?;
    let report = match witness {
        None => json!({ "verdict": "consistent", "components": mix.len() }),
        Some(w) => json!({
            "verdict": "violated",
            "components": mix.len(),
            "witness": {
                "component": w.component,
                "direction": w.direction.iter().copied().collect::<Vec<f64>>(),
                "excess": w.excess,
            },
        }),
    };
    Ok(Outcome::ok(to_json(&report)?))
}
