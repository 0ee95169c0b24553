//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use common::{gauss_eof, parse_csv, split_settings, write};
use gauss_eof::channels::{fiber_output, FiberSpec, Setting};
use gauss_eof::decomp::{lemma3_witness, GaussMixture};
use gauss_eof::eof_analytic::{eof_symmetric, eof_two_mode, pt_min_symplectic};
use gauss_eof::eof_numeric::{additivity_gap, eof_numeric, OptimizerConfig};
use gauss_eof::linalg::{eig2, inv2, min_eigenvalue, psd_sqrt};
use gauss_eof::normal_form::two_mode_invariants;
use gauss_eof::pure_states::{entanglement_entropy, h_of_r, tmss_cm, PureCMParam};
use gauss_eof::sample::{random_entangled_two_mode, random_symmetric_fiber_state};
use gauss_eof::symplectic::{GaussianState, ModeOrdering, Partition};
use nalgebra::{DMatrix, DVector, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("runtime {elapsed:.2?} exceeds {limit:?}"))
    }
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for r in [0.1, 0.5, 1.0, 2.0] {
        let got = eof_two_mode(&tmss_cm(r)).map_err(|e| e.to_string())?.value.ebits();
        worst = worst.max((got - h_of_r(2.0 * r).ebits()).abs());
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1))?;
    if worst > 1e-9 {
        return Err(format!("max deviation from H(2r) {worst:e}"));
    }
    Ok(format!("max |E - H(2r)| = {worst:.1e}, {elapsed:.2?}"))
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut entangled = 0;
    for _ in 0..200 {
        let st = random_symmetric_fiber_state(&mut rng);
        let inv = two_mode_invariants(&st).map_err(|e| e.to_string())?;
        let a = eof_two_mode(&st).map_err(|e| e.to_string())?;
        let b = eof_symmetric(&inv).map_err(|e| e.to_string())?.ebits();
        entangled += usize::from(!a.separable);
        worst = worst.max((a.value.ebits() - b).abs());
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(5))?;
    if worst > 1e-9 {
        return Err(format!("max deviation {worst:e}"));
    }
    Ok(format!("200 states ({entangled} entangled), max deviation {worst:.1e}, {elapsed:.2?}"))
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = OptimizerConfig::default();
    let mut worst = 0.0f64;
    let mut lowest = f64::INFINITY;
    for i in 0..100 {
        let st = random_entangled_two_mode(1e-6, &mut rng);
        let exact = eof_two_mode(&st).map_err(|e| e.to_string())?.value.ebits();
        let cfg = OptimizerConfig { seed: i, ..cfg.clone() };
        let num = eof_numeric(&st, &Partition::two_mode(), &cfg).map_err(|e| e.to_string())?.value.ebits();
        worst = worst.max((num - exact).abs());
        lowest = lowest.min(num - exact);
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(300))?;
    if worst > 1e-5 || lowest < -1e-5 {
        return Err(format!("max |numeric - analytic| {worst:e}, min signed gap {lowest:e}"));
    }
    Ok(format!("max |numeric - analytic| = {worst:.1e}, min signed gap {lowest:.1e}, {elapsed:.2?}"))
}

fn saturation_defect(st: &GaussianState) -> Result<Option<(f64, f64)>, String> {
    let res = eof_two_mode(st).map_err(|e| e.to_string())?;
    if res.separable {
        return Ok(None);
    }
    let x = res.optimal_x.ok_or("missing optimum")?;
    let cq = res.invariants.c_q();
    let cp_inv = inv2(&res.invariants.c_p()).map_err(|e| e.to_string())?;
    let det = (cq - x).determinant().abs().max((x - cp_inv).determinant().abs());
    let min_eig = |m: Matrix2<f64>| {
        let (a, b) = eig2(&m);
        a.min(b)
    };
    Ok(Some((det, min_eig(cq - x).min(min_eig(x - cp_inv)))))
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut states: Vec<GaussianState> = (0..250).map(|_| random_entangled_two_mode(1e-6, &mut rng)).collect();
    states.extend((0..250).map(|_| random_symmetric_fiber_state(&mut rng)));
    let (mut worst_det, mut worst_gap, mut checked) = (0.0f64, f64::INFINITY, 0);
    for st in &states {
        if let Some((det, gap)) = saturation_defect(st)? {
            worst_det = worst_det.max(det);
            worst_gap = worst_gap.min(gap);
            checked += 1;
        }
    }
    if worst_det >= 1e-8 || worst_gap < -1e-9 {
        return Err(format!("max |det| {worst_det:e}, min gap eigenvalue {worst_gap:e}"));
    }
    Ok(format!("{checked} entangled results, max |det| = {worst_det:.1e}, min gap eigenvalue {worst_gap:.1e}"))
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pt_opt = |st: &GaussianState| -> Result<Option<(f64, f64)>, String> {
        let res = eof_two_mode(st).map_err(|e| e.to_string())?;
        if res.separable {
            return Ok(None);
        }
        let opt = res.optimal_pure_state().ok_or("missing optimum")?;
        let s_opt = pt_min_symplectic(&opt).map_err(|e| e.to_string())?;
        let s_in = pt_min_symplectic(st).map_err(|e| e.to_string())?;
        Ok(Some((s_opt, s_in)))
    };
    let (mut sym_worst, mut sym_count) = (0.0f64, 0);
    while sym_count < 100 {
        if let Some((a, b)) = pt_opt(&random_symmetric_fiber_state(&mut rng))? {
            sym_worst = sym_worst.max((a - b).abs());
            sym_count += 1;
        }
    }
    let mut excess = f64::NEG_INFINITY;
    let mut gen_count = 0;
    while gen_count < 100 {
        let st = random_entangled_two_mode(1e-6, &mut rng);
        let inv = two_mode_invariants(&st).map_err(|e| e.to_string())?;
        if inv.is_symmetric(1e-6) {
            continue;
        }
        if let Some((a, b)) = pt_opt(&st)? {
            excess = excess.max(a - b);
            gen_count += 1;
        }
    }
    if sym_worst >= 1e-8 || excess > 1e-8 {
        return Err(format!("symmetric max |ds1| {sym_worst:e}, general max s1 excess {excess:e}"));
    }
    Ok(format!("symmetric max |ds1| = {sym_worst:.1e}; non-symmetric max s1(opt) - s1 = {excess:.1e}"))
}

fn eg_on_grid(r: f64, tau: f64, setting: Setting, points: usize, lmax: f64) -> Result<Vec<f64>, String> {
    (0..points)
        .map(|i| {
            let l = lmax * i as f64 / (points - 1) as f64;
            let spec = FiberSpec::new(l, tau, setting).map_err(|e| e.to_string())?;
            let st = fiber_output(r, &spec).map_err(|e| e.to_string())?;
            Ok(eof_two_mode(&st).map_err(|e| e.to_string())?.value.ebits())
        })
        .collect()
}

fn criterion_6() -> Verdict {
    let mut notes = Vec::new();
    for tau in [0.0, 1.0] {
        for setting in [Setting::Symmetric, Setting::Asymmetric] {
            let e = eg_on_grid(1.0, tau, setting, 50, 4.0)?;
            if let Some(i) = (1..e.len()).find(|&i| e[i] > e[i - 1]) {
                return Err(format!("tau {tau} {setting}: E_G rises at grid index {i}: {} -> {}", e[i - 1], e[i]));
            }
            notes.push(format!("tau={tau}/{setting}"));
        }
    }
    Ok(format!("non-increasing on 50 points for {}", notes.join(", ")))
}

fn sweep(args: &[&str]) -> Result<Vec<common::Row>, String> {
    let run = gauss_eof(args);
    if run.code != 0 {
        return Err(format!("fiber-sweep failed: {}", run.stderr));
    }
    Ok(parse_csv(&run.text()))
}

fn criterion_7() -> Verdict {
    let rows = sweep(&["fiber-sweep", "--r", "1", "--tau", "0", "--setting", "both", "--lmax", "4", "--steps", "400"])?;
    let (sym, asym) = split_settings(&rows);
    if sym.len() != 401 || asym.len() != 401 {
        return Err("unexpected row count".into());
    }
    if let Some((s, a)) = sym.iter().zip(&asym).find(|(s, a)| a.e_g < s.e_g) {
        return Err(format!("at l = {} asymmetric {} < symmetric {}", s.l, a.e_g, s.e_g));
    }
    Ok("asymmetric >= symmetric at all 401 grid points of [0, 4]".into())
}

fn criterion_8() -> Verdict {
    let rows = sweep(&["fiber-sweep", "--r", "1", "--tau", "1", "--setting", "both", "--lmax", "4", "--steps", "400"])?;
    let (sym, asym) = split_settings(&rows);
    // Beyond the separability length of the symmetric state both settings
    // carry no entanglement and cannot be ordered; the comparison runs over
    // grid points where the symmetric state is still entangled.
    let pairs: Vec<(f64, f64, f64)> = sym.iter().zip(&asym).map(|(s, a)| (s.l, s.e_g, a.e_g)).collect();
    let last_not_better = pairs
        .iter()
        .filter(|(l, s, a)| *l > 0.0 && *s > 0.0 && s <= a)
        .map(|p| p.0)
        .fold(0.0f64, f64::max);
    let l_star = pairs
        .iter()
        .map(|p| p.0)
        .find(|&l| l >= last_not_better && l > 0.0)
        .ok_or("empty grid")?;
    let beyond: Vec<&(f64, f64, f64)> = pairs.iter().filter(|(l, s, _)| *l > l_star && *s > 0.0).collect();
    if beyond.is_empty() || l_star > 4.0 {
        return Err(format!("no crossover: symmetric never ahead (last l with sym <= asym: {last_not_better})"));
    }
    let sym_end = pairs.iter().filter(|p| p.1 > 0.0).map(|p| p.0).fold(0.0f64, f64::max);
    let asym_end = pairs.iter().filter(|p| p.2 > 0.0).map(|p| p.0).fold(0.0f64, f64::max);
    Ok(format!(
        "l* = {l_star}: symmetric > asymmetric at all {} entangled samples beyond; \
         entanglement ends at l = {sym_end} (sym) vs {asym_end} (asym)",
        beyond.len()
    ))
}

fn criterion_9() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = OptimizerConfig::default();
    let mut worst = 0.0f64;
    let mut pairs = 0;
    while pairs < 5 {
        let a = two_mode_invariants(&random_symmetric_fiber_state(&mut rng)).map_err(|e| e.to_string())?;
        let b = two_mode_invariants(&random_symmetric_fiber_state(&mut rng)).map_err(|e| e.to_string())?;
        let ea = eof_symmetric(&a).map_err(|e| e.to_string())?.ebits();
        let eb = eof_symmetric(&b).map_err(|e| e.to_string())?.ebits();
        if ea == 0.0 || eb == 0.0 {
            continue;
        }
        let rep = additivity_gap(&a, &b, &cfg).map_err(|e| e.to_string())?;
        worst = worst.max(rep.gap.abs());
        pairs += 1;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(600))?;
    if worst > 2e-3 {
        return Err(format!("max |gap| {worst:e}"));
    }
    Ok(format!("5 pairs, max |gap| = {worst:.1e}, {elapsed:.2?}"))
}

fn pure_qqpp(x: &Matrix2<f64>, y: &Matrix2<f64>) -> Result<DMatrix<f64>, String> {
    let to_d = |m: &Matrix2<f64>| DMatrix::from_fn(2, 2, |i, j| m[(i, j)]);
    Ok(PureCMParam::new(to_d(x), to_d(y)).map_err(|e| e.to_string())?.cov_qqpp())
}

fn criterion_10() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let entropy = |cov: DMatrix<f64>| -> Result<f64, String> {
        let st = GaussianState::from_cov(cov, ModeOrdering::Qqpp).map_err(|e| e.to_string())?;
        Ok(entanglement_entropy(&st, &Partition::two_mode()).map_err(|e| e.to_string())?.ebits())
    };
    let (mut worst_gain, mut worst_slack) = (f64::NEG_INFINITY, f64::INFINITY);
    for _ in 0..500 {
        let g = Matrix2::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let x = g * g.transpose() + Matrix2::identity() * 0.1;
        let y = Matrix2::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let y = (y + y.transpose()) * 0.5;
        let gp = pure_qqpp(&x, &y)?;
        // Normal-form target above gp: [[A, B], [B^T, D]] <= (1+t) A (+) (1+1/t) D.
        let t: f64 = rng.random_range(0.2..5.0);
        let mut gamma = DMatrix::zeros(4, 4);
        gamma.view_mut((0, 0), (2, 2)).copy_from(&(gp.view((0, 0), (2, 2)) * (1.0 + t)));
        gamma.view_mut((2, 2), (2, 2)).copy_from(&(gp.view((2, 2), (2, 2)) * (1.0 + 1.0 / t)));
        gamma += DMatrix::identity(4, 4) * rng.random_range(0.0..0.2);
        if min_eigenvalue(&(&gamma - &gp)) < -1e-10 {
            return Err("construction produced an infeasible pair".into());
        }
        let g0 = pure_qqpp(&x, &Matrix2::zeros())?;
        worst_slack = worst_slack.min(min_eigenvalue(&(&gamma - &g0)));
        worst_gain = worst_gain.max(entropy(g0)? - entropy(gp)?);
    }
    if worst_gain > 0.0 || worst_slack < -1e-9 {
        return Err(format!("max E(X,0) - E(X,Y) {worst_gain:e}, min slack {worst_slack:e}"));
    }
    Ok(format!("500 pairs: max E(X,0) - E(X,Y) = {worst_gain:.1e}, min eig(gamma - gamma_p(X,0)) = {worst_slack:.1e}"))
}

fn criterion_11() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut found, mut clean) = (0, 0);
    for case in 0..1000 {
        let dim = rng.random_range(1..7);
        let g = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
        let a = &g * g.transpose() + DMatrix::identity(dim, dim) * 0.1;
        let k = rng.random_range(1..5);
        let mut precisions: Vec<DMatrix<f64>> = (0..k)
            .map(|_| {
                let h = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
                &a + &h * h.transpose() * rng.random_range(0.0..1.0)
            })
            .collect();
        let violated = case % 2 == 1;
        if violated {
            let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0)).normalize();
            let eps: f64 = rng.random_range(1e-3..0.999);
            let root = psd_sqrt(&a);
            let b = &root * (DMatrix::identity(dim, dim) - &v * v.transpose() * eps) * &root;
            let idx = rng.random_range(0..k);
            precisions[idx] = (&b + b.transpose()) * 0.5;
        }
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let head: f64 = weights[..k - 1].iter().sum();
        weights[k - 1] = 1.0 - head;
        let centers = (0..k).map(|_| DVector::from_fn(dim, |_, _| rng.random_range(-2.0..2.0))).collect();
        let mix = GaussMixture::new(dim, precisions.clone(), centers, weights).map_err(|e| e.to_string())?;
        match (violated, lemma3_witness(&a, &mix).map_err(|e| e.to_string())?) {
            (true, Some(w)) => {
                let gap = &a - &precisions[w.component];
                if w.direction.dot(&(&gap * &w.direction)) <= 0.0 {
                    return Err(format!("case {case}: unsound witness"));
                }
                found += 1;
            }
            (true, None) => return Err(format!("case {case}: violation missed")),
            (false, Some(_)) => return Err(format!("case {case}: witness for a valid mixture")),
            (false, None) => clean += 1,
        }
    }
    Ok(format!("{found} violations witnessed soundly, {clean} valid mixtures passed"))
}

fn criterion_12() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let state = write(d, "state.json", &random_entangled_two_mode(1e-3, &mut rng).to_json());
    let three = write(d, "three.json", &gauss_eof::sample::random_state(3, 1.5, 0.5, &mut rng).to_json());
    let spec = FiberSpec::new(0.3, 0.0, Setting::Symmetric).map_err(|e| e.to_string())?;
    let sym = write(d, "sym.json", &fiber_output(0.8, &spec).map_err(|e| e.to_string())?.to_json());
    let mix = GaussMixture::new(
        2,
        vec![DMatrix::identity(2, 2) * 2.0, DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 3.0])],
        vec![DVector::zeros(2), DVector::from_vec(vec![1.0, -1.0])],
        vec![0.5, 0.5],
    )
    .map_err(|e| e.to_string())?;
    let mixture = write(d, "mix.json", &mix.to_json());
    let target = write(d, "target.json", "[[1.5, 0.0], [0.0, 1.5]]");
    let emit_a = d.join("emit_a");
    let emit_b = d.join("emit_b");
    let (emit_a, emit_b) = (emit_a.to_str().unwrap(), emit_b.to_str().unwrap());

    let commands: Vec<Vec<&str>> = vec![
        vec!["validate", &state],
        vec!["invariants", &state],
        vec!["negativity", &three, "--party-a", "0"],
        vec!["eof", &state],
        vec!["--seed", "7", "eof-numeric", &state, "--restarts", "4"],
        vec!["--seed", "7", "additivity-check", &sym, &sym, "--restarts", "4"],
        vec!["fiber-sweep", "--r", "1", "--tau", "0.5", "--setting", "both", "--steps", "20"],
        vec!["squeeze-surface", "--rsteps", "8", "--lsteps", "4"],
        vec!["decomp-check", "--mixture", &mixture, "--target", &target],
    ];
    for cmd in &commands {
        let a = gauss_eof(cmd);
        let b = gauss_eof(cmd);
        if a.code != 0 {
            return Err(format!("{} failed: {}", cmd.join(" "), a.stderr));
        }
        if a.stdout != b.stdout || a.code != b.code {
            return Err(format!("{} is not reproducible", cmd.join(" ")));
        }
    }
    let sweep = |dir: &str, threads: &str| {
        gauss_eof(&["--threads", threads, "fiber-sweep", "--steps", "10", "--emit-states", dir])
    };
    let (a, b) = (sweep(emit_a, "1"), sweep(emit_b, "2"));
    if a.stdout != b.stdout {
        return Err("fiber-sweep output depends on thread count".into());
    }
    let mut files: Vec<_> = std::fs::read_dir(emit_a).map_err(|e| e.to_string())?.flatten().collect();
    files.sort_by_key(|f| f.file_name());
    for f in &files {
        let other = std::path::Path::new(emit_b).join(f.file_name());
        if std::fs::read(f.path()).ok() != std::fs::read(other).ok() {
            return Err("emitted states differ between runs".into());
        }
    }
    Ok(format!("{} commands byte-identical on repeat; {} emitted states identical across thread counts", commands.len(), files.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("pure-state anchor", criterion_1),
        ("symmetric closed form", criterion_2),
        ("oracle equivalence", criterion_3),
        ("saturation", criterion_4),
        ("negativity coincidence", criterion_5),
        ("GLOCC monotonicity", criterion_6),
        ("zero-temperature ordering", criterion_7),
        ("finite-temperature crossover", criterion_8),
        ("additivity", criterion_9),
        ("dropping Y", criterion_10),
        ("mixture witness", criterion_11),
        ("determinism", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let verdict = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match verdict {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
