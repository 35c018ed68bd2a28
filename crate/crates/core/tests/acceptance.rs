//! Acceptance checks, one test per criterion. Each test writes a single
//! PASS/FAIL line (plus sub-check lines) straight to stderr so the lines
//! survive output capture. Tests hold a shared lock so runtimes are not
//! inflated by running side by side.

use std::collections::BTreeSet;
use std::io::Write;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use netequiv::assemble::SearchOptions;
use netequiv::bc_models::{bc_gap, bc_lower_superposition, beta_grid, BcSpec};
use netequiv::decouple::{gauss_noise_partition, partition_objective, relay_closed_form_alpha};
use netequiv::experiments::{
    layered_closed_form, layered_rows, multicast_row, relay_row, relay_search, LayeredRow, MulticastRow, RelayRow,
};
use netequiv::flowcalc::{cut_capacity, hyper_inner, max_flow, validate_inner_witness, Objective};
use netequiv::mac_models::lemmas::{lemma1_slack, lemma2_slack};
use netequiv::mac_models::{mac_gap, mac_lower, mac_upper_new, mac_upper_oneshot1, solve_mu, MacSpec};
use netequiv::netmodel::{Demand, NodeId, NodeKind, NoiselessNetwork};

fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn line(text: &str) {
    let _ = writeln!(std::io::stderr(), "{text}");
}

/// Prints the verdict line and fails the test if any check failed.
fn report(id: &str, checks: &[(String, bool)], elapsed: Duration, limit: Duration) {
    let in_time = elapsed < limit;
    let ok = in_time && checks.iter().all(|c| c.1);
    line(&format!(
        "criterion {id}: {} ({:.3}s, limit {:.0?})",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit
    ));
    for (what, pass) in checks {
        line(&format!("    [{}] {what}", if *pass { "ok" } else { "FAIL" }));
    }
    if !in_time {
        line("    [FAIL] runtime over limit");
    }
    assert!(ok, "criterion {id} failed");
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Uniform point on the probability simplex.
fn simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

fn half_log2_1p(x: f64) -> f64 {
    0.5 * (1.0 + x).log2()
}

#[test]
fn criterion_01_gap_examples() {
    let _g = serial();
    let t = Instant::now();
    let g = [1.0, 2.0, 100.0];
    let mac = mac_gap(&MacSpec::gaussian(&g).unwrap()).unwrap();
    let bc = bc_gap(&BcSpec::gaussian(&g).unwrap()).unwrap();
    let elapsed = t.elapsed();

    // Oracles: the coherent sum-rate bound minus the SIC sum rate, and the
    // broadcast sum capacity minus the best superposition sum rate on a grid.
    let spec = MacSpec::gaussian(&g).unwrap();
    let r_mac = half_log2_1p((1.0 + 2f64.sqrt() + 10.0).powi(2));
    let sic = mac_lower(&spec, &[2, 1, 0]).unwrap().individual_bits().iter().sum::<f64>();
    let bspec = BcSpec::gaussian(&g).unwrap();
    let best_sup = beta_grid(3, 1.0 / 64.0, 3)
        .unwrap()
        .iter()
        .map(|b| bc_lower_superposition(&bspec, b).unwrap().sum_rate.bits())
        .fold(f64::NEG_INFINITY, f64::max);
    let bc_oracle = half_log2_1p(103.0) - best_sup;
    let upper_sum = mac_upper_oneshot1(&spec).unwrap().sum_rate.bits();

    let checks = vec![
        (format!("mac_gap = {mac:.4}, want 0.29 +- 0.01"), (mac - 0.29).abs() <= 0.01),
        (format!("bc_gap = {bc:.4}, want 0.02 +- 0.005"), (bc - 0.02).abs() <= 0.005),
        (
            format!("mac_gap matches R_MAC - SIC sum {:.6}", r_mac - sic),
            (mac - (upper_sum - sic)).abs() < 1e-12 && (upper_sum - r_mac).abs() < 1e-12,
        ),
        (
            format!("bc_gap matches sum capacity - best superposition {bc_oracle:.6}"),
            (bc - bc_oracle).abs() < 1e-9,
        ),
    ];
    report("1", &checks, elapsed, Duration::from_millis(1));
}

#[test]
fn criterion_02_gap_bounds() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let specs: Vec<Vec<f64>> = (0..1000)
        .map(|_| {
            let m = rng.gen_range(1..=8);
            (0..m).map(|_| log_uniform(&mut rng, 0.01, 100.0)).collect()
        })
        .collect();
    let t = Instant::now();
    let mut worst_mac = f64::NEG_INFINITY;
    let mut worst_bc = f64::NEG_INFINITY;
    for g in &specs {
        let limit = 0.5 * (g.len() as f64).log2();
        worst_mac = worst_mac.max(mac_gap(&MacSpec::gaussian(g).unwrap()).unwrap() - limit);
        worst_bc = worst_bc.max(bc_gap(&BcSpec::gaussian(g).unwrap()).unwrap() - limit);
    }
    let elapsed = t.elapsed();
    let checks = vec![
        (format!("max mac_gap - half log2 m = {worst_mac:.3e}"), worst_mac < 1e-9),
        (format!("max bc_gap - half log2 m = {worst_bc:.3e}"), worst_bc < 1e-9),
    ];
    report("2", &checks, elapsed, Duration::from_secs(1));
}

#[test]
fn criterion_03_mu_bracket_and_sum_rate() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cases: Vec<(Vec<f64>, f64)> = (0..1000)
        .map(|_| {
            let m = rng.gen_range(1..=8);
            let g = (0..m).map(|_| log_uniform(&mut rng, 0.01, 100.0)).collect();
            (g, rng.gen_range(0.0..1.0))
        })
        .collect();
    let t = Instant::now();
    let mut outside = 0;
    let mut below = 0;
    let mut unequal = 0;
    for (g, alpha) in &cases {
        let m = g.len() as f64;
        let r = 1.0 - alpha;
        let total: f64 = g.iter().sum();
        let min = g.iter().cloned().fold(f64::INFINITY, f64::min);
        let (lo, hi) = (r / m + r * r / (m * total), r / m + r * r / (m * m * min));
        let mu = solve_mu(g, *alpha).unwrap();
        if mu < lo * (1.0 - 1e-9) || mu > hi * (1.0 + 1e-9) {
            outside += 1;
        }
        let r_mac = half_log2_1p(g.iter().map(|x| x.sqrt()).sum::<f64>().powi(2));
        let spec = MacSpec::gaussian(g).unwrap();
        let (v, _) = mac_upper_new(&spec, *alpha).unwrap();
        let bound = v.sum_rate.bits().min(v.individual_bits().iter().sum());
        if bound < r_mac - 1e-9 {
            below += 1;
        }
        let (v1, _) = mac_upper_new(&spec, 1.0).unwrap();
        let b1 = v1.sum_rate.bits().min(v1.individual_bits().iter().sum());
        if (b1 - r_mac).abs() > 1e-9 {
            unequal += 1;
        }
    }
    let elapsed = t.elapsed();
    let checks = vec![
        (format!("mu outside bracket: {outside} of 1000"), outside == 0),
        (format!("min(R_s, sum R_i) below R_MAC - 1e-9: {below} of 1000"), below == 0),
        (format!("alpha = 1 differs from R_MAC by > 1e-9: {unequal} of 1000"), unequal == 0),
    ];
    report("3", &checks, elapsed, Duration::from_secs(2));
}

fn random_channel(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| simplex(rng, cols)).collect()
}

#[test]
fn criterion_04_discrete_lemmas() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let t = Instant::now();
    let (mut v1, mut v2) = (0, 0);
    let (mut worst1, mut worst2) = (f64::INFINITY, f64::INFINITY);
    let n = 10_000;
    for _ in 0..n {
        let mut size = || rng.gen_range(2..=4usize);
        let (n1, n2, nu, nv, ny) = (size(), size(), size(), size(), size());
        let flat = simplex(&mut rng, n1 * n2);
        let p_x: Vec<Vec<f64>> = flat.chunks(n2).map(|c| c.to_vec()).collect();
        let p_u = random_channel(&mut rng, n1, nu);
        let p_v = random_channel(&mut rng, n2, nv);
        let f: Vec<Vec<usize>> = (0..nu).map(|_| (0..nv).map(|_| rng.gen_range(0..ny)).collect()).collect();
        let s1 = lemma1_slack(&p_x, &p_u, &p_v, &f, ny).unwrap();
        worst1 = worst1.min(s1);
        if s1 < -1e-9 {
            v1 += 1;
        }
        let p_y: Vec<Vec<Vec<f64>>> = (0..n1).map(|_| random_channel(&mut rng, n2, ny)).collect();
        let s2 = lemma2_slack(&p_x, &p_u, &p_y).unwrap();
        worst2 = worst2.min(s2);
        if s2 < -1e-9 {
            v2 += 1;
        }
    }
    let elapsed = t.elapsed();
    let checks = vec![
        (
            format!("individual-bound inequality violations: {v1} of {n} (min slack {worst1:.3e})"),
            v1 == 0,
        ),
        (
            format!("sum-bound inequality violations: {v2} of {n} (min slack {worst2:.3e})"),
            v2 == 0,
        ),
    ];
    report("4", &checks, elapsed, Duration::from_secs(30));
}

#[test]
fn criterion_05_partition_oracle() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let t = Instant::now();
    let (mut worse, mut bad_residual, mut bad_columns) = (0, 0, 0);
    let mut worst = f64::NEG_INFINITY;
    let steps = 1000;
    for _ in 0..200 {
        let g = Array2::from_shape_fn((2, 2), |_| rng.gen_range(0.1..50.0));
        let p = gauss_noise_partition(&g, 1e-12).unwrap();
        let fixed = partition_objective(&g, &p.alphas);
        // Grid oracle over the two column splits a, b: row 0 gets (a, b).
        let mut grid = f64::INFINITY;
        for ka in 1..steps {
            let a = ka as f64 / steps as f64;
            let r0a = g[[0, 0]] / a;
            let r1a = g[[1, 0]] / (1.0 - a);
            for kb in 1..steps {
                let b = kb as f64 / steps as f64;
                let v = (1.0 + r0a + g[[0, 1]] / b).log2() + (1.0 + r1a + g[[1, 1]] / (1.0 - b)).log2();
                grid = grid.min(v);
            }
        }
        worst = worst.max(fixed - grid);
        if fixed > grid + 1e-5 {
            worse += 1;
        }
        if p.residual > 1e-8 {
            bad_residual += 1;
        }
        for j in 0..2 {
            if (p.alphas[[0, j]] + p.alphas[[1, j]] - 1.0).abs() > 1e-9 {
                bad_columns += 1;
            }
        }
    }
    let elapsed = t.elapsed();
    let checks = vec![
        (
            format!("fixed point above grid + 1e-5: {worse} of 200 (max excess {worst:.3e})"),
            worse == 0,
        ),
        (format!("residual > 1e-8: {bad_residual}"), bad_residual == 0),
        (format!("column sums off by > 1e-9: {bad_columns}"), bad_columns == 0),
    ];
    report("5", &checks, elapsed, Duration::from_secs(30));
}

#[test]
fn criterion_06_relay_closed_form_alpha() {
    let _g = serial();
    let t = Instant::now();
    let dbs: Vec<f64> = (0..10).map(|k| -10.0 + 10.0 * k as f64 / 3.0).collect();
    let mut worst: f64 = 0.0;
    for &sd in &dbs {
        for &sr in &dbs {
            for &rd in &dbs {
                let (gsd, gsr, grd) = (10f64.powf(sd / 10.0), 10f64.powf(sr / 10.0), 10f64.powf(rd / 10.0));
                // Rows: transmitters S, R. Columns: receivers D, R.
                let g = ndarray::array![[gsd, gsr], [grd, 0.0]];
                let p = gauss_noise_partition(&g, 1e-13).unwrap();
                worst = worst.max((p.alphas[[0, 0]] - relay_closed_form_alpha(gsd, gsr, grd)).abs());
            }
        }
    }
    let elapsed = t.elapsed();
    let checks = vec![(
        format!("max |alpha_fixed_point - alpha_closed_form| over 1000 points = {worst:.3e}"),
        worst <= 1e-6,
    )];
    report("6", &checks, elapsed, Duration::from_secs(5));
}

// Shared experiment sweeps, computed once and reused by the sandwich check.

struct Timed<T> {
    rows: T,
    elapsed: Duration,
}

fn relay_sweep() -> &'static Timed<Vec<RelayRow>> {
    static CELL: OnceLock<Timed<Vec<RelayRow>>> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = Instant::now();
        let opts = relay_search();
        let rows = (-10..=30).map(|db| relay_row(0.0, 10.0, db as f64, &opts).unwrap()).collect();
        Timed {
            rows,
            elapsed: t.elapsed(),
        }
    })
}

const LAYERED_GAMMAS: [f64; 4] = [0.25, 1.0, 1.5, 10.0];

type LayeredSweep = Timed<Vec<(f64, Vec<LayeredRow>)>>;

fn layered_sweep() -> &'static LayeredSweep {
    static CELL: OnceLock<LayeredSweep> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = Instant::now();
        let opts = SearchOptions::default();
        let mut rows = Vec::new();
        for n in 2..=6 {
            for g in LAYERED_GAMMAS {
                rows.push((g, layered_rows(n, 10.0 * g.log10(), &opts).unwrap()));
            }
        }
        Timed {
            rows,
            elapsed: t.elapsed(),
        }
    })
}

fn multicast_sweep() -> &'static Timed<Vec<MulticastRow>> {
    static CELL: OnceLock<Timed<Vec<MulticastRow>>> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = Instant::now();
        let opts = SearchOptions::default();
        let rows = (-5..=25)
            .map(|p| multicast_row(10, p as f64, -3.0, 8, 0.1, &opts).unwrap())
            .collect();
        Timed {
            rows,
            elapsed: t.elapsed(),
        }
    })
}

#[test]
fn criterion_07_relay_reproduction() {
    let _g = serial();
    let sweep = relay_sweep();
    let rows = &sweep.rows;
    let off: Vec<&RelayRow> = rows.iter().filter(|r| r.gamma_sr_db <= 0.0).collect();
    let exact = off.iter().filter(|r| r.eq_lower == 0.5).count();
    let cf_short: Vec<String> = rows
        .iter()
        .filter(|r| r.eq_lower < r.cf - 0.02)
        .map(|r| format!("{}dB ({:.4} vs cf {:.4})", r.gamma_sr_db, r.eq_lower, r.cf))
        .collect();
    let top = rows.last().unwrap();
    let gaps: Vec<f64> = rows.iter().map(|r| r.eq_upper - r.cutset).collect();
    let (gmin, gmax) = gaps
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &g| (a.min(g), b.max(g)));
    let top_gap = top.eq_upper - top.cutset;
    let checks = vec![
        (
            format!("(a) eq_lower = 0.5 exactly for gamma_sr <= 0 dB: {exact} of {}", off.len()),
            exact == off.len(),
        ),
        (
            format!(
                "(b) eq_lower >= cf - 0.02 over the grid: {} points short{}",
                cf_short.len(),
                if cf_short.is_empty() {
                    String::new()
                } else {
                    format!(", e.g. {}", cf_short[..cf_short.len().min(3)].join(", "))
                }
            ),
            cf_short.is_empty(),
        ),
        (
            format!("(c) df - eq_lower at 30 dB = {:.4} <= 0.35", top.df - top.eq_lower),
            top.df - top.eq_lower <= 0.35,
        ),
        (
            format!("(d) eq_upper - cutset in [{gmin:.4}, {gmax:.4}] within [-0.02, 0.5]"),
            gmin >= -0.02 && gmax <= 0.5,
        ),
        (format!("(d) eq_upper - cutset at 30 dB = {top_gap:.4} <= 0.05"), top_gap <= 0.05),
    ];
    report("7", &checks, sweep.elapsed, Duration::from_secs(5));
}

#[test]
fn criterion_08_layered_unicast() {
    let _g = serial();
    let sweep = layered_sweep();
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let (mut outer_bad, mut inner_bad, mut regime_bad, mut total) = (0, 0, 0, 0);
    for (g, rows) in &sweep.rows {
        for r in rows {
            total += 1;
            let n = r.n;
            // Closed forms recomputed from the SNR.
            let big_r = half_log2_1p(*g);
            let r_m = half_log2_1p(2.0 * g);
            let cap = big_r / n as f64;
            let r_l = cap.min(r_m / (n + 1) as f64);
            if (r.outer_flow - cap).abs() > 1e-6 {
                outer_bad += 1;
            }
            if (r.inner_flow - r_l).abs() > 1e-6 {
                inner_bad += 1;
            }
            let cf = layered_closed_form(n, *g);
            let capacity_wins = cap <= r_m / (n + 1) as f64 + 1e-12;
            if (*g < golden && !cf.capacity_regime) || cf.capacity_regime != capacity_wins || (r.regime == "R/n") != cf.capacity_regime {
                regime_bad += 1;
            }
        }
    }
    let checks = vec![
        (format!("outer symmetric rate != R/n: {outer_bad} of {total} rows"), outer_bad == 0),
        (
            format!("inner rate != min(R/n, R_m/(n+1)): {inner_bad} of {total} rows"),
            inner_bad == 0,
        ),
        (
            format!("regime indicator inconsistent: {regime_bad} of {total} rows"),
            regime_bad == 0,
        ),
    ];
    report("8", &checks, sweep.elapsed, Duration::from_secs(10));
}

#[test]
fn criterion_09_multicast() {
    let _g = serial();
    let sweep = multicast_sweep();
    let rows = &sweep.rows;
    let crossed = rows.iter().filter(|r| r.eq_lower_sum > r.eq_upper_sum + 1e-9).count();
    let low_snr_gap = rows
        .iter()
        .filter(|r| r.p_db <= 5.0)
        .map(|r| r.eq_upper_sum - r.coop)
        .fold(f64::NEG_INFINITY, f64::max);
    let coop_gap = rows.iter().map(|r| r.coop - r.eq_lower_sum).fold(f64::NEG_INFINITY, f64::max);
    let top = rows.iter().find(|r| r.p_db == 25.0).unwrap();
    // Side-link oracle: log2 q - Hb(xi) - xi log2(q-1).
    let hb = -(0.1f64 * 0.1f64.log2() + 0.9 * 0.9f64.log2());
    let c12_oracle = 3.0 - hb - 0.1 * 7f64.log2();
    let note = netequiv::experiments::c12_note(8, 0.1).unwrap();
    let checks = vec![
        (
            format!("eq_lower_sum > eq_upper_sum: {crossed} of {} points", rows.len()),
            crossed == 0,
        ),
        (
            format!("max eq_upper_sum - coop for P <= 5 dB = {low_snr_gap:.4} <= 0.1"),
            low_snr_gap <= 0.1,
        ),
        (format!("max coop - eq_lower_sum = {coop_gap:.4} <= 0.45"), coop_gap <= 0.45),
        (
            format!("eq_lower_sum - mac at 25 dB = {:.3e} >= 0", top.eq_lower_sum - top.mac),
            top.eq_lower_sum >= top.mac - 1e-9,
        ),
        (
            format!("C12 = {:.4} (oracle {c12_oracle:.4}), want 2.2503 +- 1e-4", top.c12),
            (top.c12 - 2.2503).abs() <= 1e-4 && (top.c12 - c12_oracle).abs() < 1e-12,
        ),
        (
            format!("discrepancy note emitted: {note}"),
            note.contains("2.85") && rows.iter().all(|r| r.c12_discrepancy),
        ),
    ];
    report("9", &checks, sweep.elapsed, Duration::from_secs(60));
}

fn node(k: usize) -> NodeId {
    NodeId::new(format!("v{k}"))
}

#[test]
fn criterion_10_flow_certificates() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let t = Instant::now();
    let (mut mismatches, mut flows) = (0, 0);
    for _ in 0..300 {
        let n = rng.gen_range(2..=12);
        let mut net = NoiselessNetwork::new();
        for k in 0..n {
            net.add_node(node(k), NodeKind::Terminal);
        }
        for a in 0..n {
            for b in 0..n {
                if a != b && rng.gen_bool(0.3) {
                    net.add_pipe(node(a), vec![node(b)], rng.gen_range(1..=10) as f64, "random");
                }
            }
        }
        let flow = max_flow(&net, &node(0), &node(n - 1)).unwrap().rate.bits();
        // Brute force over every cut separating v0 from v(n-1).
        let inner = n - 2;
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << inner) {
            let mut side: BTreeSet<NodeId> = BTreeSet::from([node(0)]);
            for k in 0..inner {
                if mask & (1 << k) != 0 {
                    side.insert(node(k + 1));
                }
            }
            best = best.min(cut_capacity(&net, &side));
        }
        flows += 1;
        if flow != best {
            mismatches += 1;
        }
    }

    let mut violations = Vec::new();
    let mut solved = 0;
    for trial in 0..150 {
        let n = rng.gen_range(3..=8);
        let mut net = NoiselessNetwork::new();
        for k in 0..n {
            net.add_node(node(k), NodeKind::Terminal);
        }
        for a in 0..n {
            if rng.gen_bool(0.2) {
                continue;
            }
            for _ in 0..rng.gen_range(1..=2) {
                let mut heads: Vec<NodeId> = (0..n).filter(|&b| b != a && rng.gen_bool(0.35)).map(node).collect();
                if heads.is_empty() {
                    heads.push(node((a + 1) % n));
                }
                heads.truncate(3);
                net.add_pipe(node(a), heads, rng.gen_range(0.1..3.0), "random");
            }
        }
        if net.pipes.len() >= 2 && rng.gen_bool(0.5) {
            let cap = rng.gen_range(0.5..3.0);
            net.add_joint_cap(vec![0, 1], cap, "random joint");
        }
        let mut demands = vec![Demand::unicast("v0", &format!("v{}", n - 1))];
        if rng.gen_bool(0.5) {
            demands.push(Demand::multicast("v1", &["v0", &format!("v{}", n - 1)]));
        }
        let objective = match trial % 3 {
            0 => Objective::Sum,
            1 => Objective::Symmetric,
            _ => Objective::Single(0),
        };
        let res = hyper_inner(&net, &demands, &objective).unwrap();
        solved += 1;
        violations.extend(
            validate_inner_witness(&net, &demands, &res)
                .into_iter()
                .map(|v| format!("trial {trial}: {v}")),
        );
    }
    let elapsed = t.elapsed();
    let checks = vec![
        (
            format!("max-flow != brute-force min-cut: {mismatches} of {flows} networks"),
            mismatches == 0,
        ),
        (
            format!(
                "routing witness violations above 1e-9: {} over {solved} solves{}",
                violations.len(),
                violations.first().map(|v| format!(" ({v})")).unwrap_or_default()
            ),
            violations.is_empty(),
        ),
    ];
    report("10", &checks, elapsed, Duration::from_secs(30));
}

#[test]
fn criterion_11_sandwich() {
    let _g = serial();
    let t = Instant::now();
    let relay = relay_sweep();
    let layered = layered_sweep();
    let multicast = multicast_sweep();
    let bundled = relay.elapsed + layered.elapsed + multicast.elapsed;
    let relay_bad = relay
        .rows
        .iter()
        .filter(|r| r.eq_lower > r.eq_upper + 1e-9 || r.eq_lower > r.cutset + 1e-9)
        .count();
    let layered_bad = layered
        .rows
        .iter()
        .flat_map(|(_, rs)| rs)
        .filter(|r| r.inner_flow > r.outer_flow + 1e-9)
        .count();
    let multicast_bad = multicast.rows.iter().filter(|r| r.eq_lower_sum > r.eq_upper_sum + 1e-9).count();
    let elapsed = t.elapsed().max(bundled);
    let checks = vec![
        (format!("relay points with inner above an outer bound: {relay_bad}"), relay_bad == 0),
        (format!("layered rows with inner above outer: {layered_bad}"), layered_bad == 0),
        (
            format!("multicast points with inner above outer: {multicast_bad}"),
            multicast_bad == 0,
        ),
    ];
    report("11", &checks, elapsed, Duration::from_secs(75));
}
