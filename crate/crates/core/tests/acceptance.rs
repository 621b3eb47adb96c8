//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::time::Instant;

use gibbs_core::ifs::{AffineIfs, AffineMap, CdfModel};
use gibbs_core::massdist::{MassDistribution, MassOptions, Node};
use gibbs_core::thermo::{self, RatioSystem};
use gibbs_core::wordsets::{build_postfix_set, counterexample_word, verify_postfix};
use gibbs_core::{EdgeGraph, GibbsChain, Potential, Sft, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LN2: f64 = std::f64::consts::LN_2;

// Pinned tolerances.
const TOL_PRESSURE_FULL2: f64 = 1e-12;
const TOL_PRESSURE: f64 = 1e-10;
const TOL_BETA: f64 = 1e-9;
const TOL_ALPHA0: f64 = 1e-6;
const TOL_B_ALPHA0: f64 = 1e-8;
const B_AT_ONE: f64 = 0.949918;
const TOL_B_AT_ONE: f64 = 1e-4;
const TOL_LEGENDRE: f64 = 1e-8;
const TOL_ENDPOINT: f64 = 1e-6;
const TOL_RANGE: f64 = 1e-9;
const TOL_SUBACTION: f64 = 1e-9;
const TOL_MASS_REL: f64 = 1e-12;
const LOCAL_DIM_SLACK: f64 = 0.05;
const TOL_CDF: f64 = 1e-9;
const TOL_EXPONENT: f64 = 0.02;
const C_MODERATE: f64 = 50.0;
const C_CERTIFIED: f64 = 1e3;
const TOL_DRIFT: f64 = 1e-12;
const RECURRENCE_SHARE: f64 = 0.95;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn w(s: &str) -> Word {
    Word(s.bytes().map(|b| (b - b'0') as usize).collect())
}

fn full2() -> Sft {
    Sft::full(2)
}

fn gold() -> Sft {
    Sft::from_matrix(&[&[1, 1], &[1, 0]]).unwrap()
}

fn bin14() -> Potential {
    Potential::from_symbol_values(&full2(), &[0.25f64.ln(), 0.75f64.ln()]).unwrap()
}

fn log2_psi() -> Potential {
    Potential::constant(&full2(), LN2)
}

fn phi_pm() -> Potential {
    Potential::from_symbol_values(&full2(), &[-0.5, 0.5]).unwrap()
}

fn phi_neg() -> Potential {
    Potential::from_symbol_values(&full2(), &[-(3f64.ln()), 0.0]).unwrap()
}

fn ifs_bin() -> AffineIfs {
    let maps = vec![
        AffineMap { rate: 0.5, offset: 0.0 },
        AffineMap { rate: 0.5, offset: 0.5 },
    ];
    AffineIfs::new(&full2(), 0.0, 1.0, maps).unwrap()
}

fn beta_closed(q: f64) -> f64 {
    (4f64.powf(q) + (4.0f64 / 3.0).powf(q)).log2()
}

fn beta_prime_closed(q: f64) -> f64 {
    let (a, b) = (4f64.powf(q), (4.0f64 / 3.0).powf(q));
    (a * 4f64.ln() + b * (4.0f64 / 3.0).ln()) / ((a + b) * LN2)
}

/// Legendre transform of the closed-form β at α, by Newton on β'(q) = α.
fn legendre_closed(alpha: f64) -> f64 {
    let mut q = 0.0;
    for _ in 0..200 {
        let h = 1e-6;
        let slope = (beta_prime_closed(q + h) - beta_prime_closed(q - h)) / (2.0 * h);
        let step = (beta_prime_closed(q) - alpha) / slope;
        q -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    beta_closed(q) - q * alpha
}

fn random_mixing_sft(rng: &mut ChaCha8Rng, max_symbols: usize) -> Sft {
    loop {
        let n = rng.gen_range(2..=max_symbols);
        let rows: Vec<Vec<bool>> = (0..n).map(|_| (0..n).map(|_| rng.gen_bool(0.6)).collect()).collect();
        let names = (0..n).map(|i| i.to_string()).collect();
        if let Ok(sft) = Sft::new(names, rows) {
            if sft.is_mixing() {
                return sft;
            }
        }
    }
}

fn random_potential(rng: &mut ChaCha8Rng, sft: &Sft, depth: usize, lo: f64, hi: f64) -> Potential {
    let entries: Vec<(Word, f64)> = sft
        .enumerate_words(depth)
        .unwrap()
        .into_iter()
        .map(|x| (x, rng.gen_range(lo..hi)))
        .collect();
    Potential::new(sft, depth, entries).unwrap()
}

fn criterion_1() -> Outcome {
    let full = thermo::pressure(&Potential::constant(&full2(), 0.0)).unwrap();
    let golden = thermo::pressure(&Potential::constant(&gold(), 0.0)).unwrap();
    let b = thermo::pressure(&bin14()).unwrap();
    let e1 = (full - LN2).abs();
    let e2 = (golden - ((1.0 + 5f64.sqrt()) / 2.0).ln()).abs();
    let e3 = b.abs();
    outcome(
        e1 <= TOL_PRESSURE_FULL2 && e2 <= TOL_PRESSURE && e3 <= TOL_PRESSURE,
        format!("errors full2 {e1:.1e}, gold {e2:.1e}, bin14 {e3:.1e}"),
    )
}

fn criterion_2() -> Outcome {
    let sys = RatioSystem::new(&bin14(), &log2_psi()).unwrap();
    let mut worst = 0.0f64;
    for i in 0..=20 {
        let q = -5.0 + 0.5 * i as f64;
        worst = worst.max((sys.beta(q).unwrap() - beta_closed(q)).abs());
    }
    outcome(
        worst <= TOL_BETA,
        format!("max |β - closed form| over 21 points {worst:.1e}"),
    )
}

fn criterion_3() -> Outcome {
    let sys = RatioSystem::new(&bin14(), &log2_psi()).unwrap();
    let a0 = sys.full_dim_alpha().unwrap();
    let b0 = sys.spectrum_at(a0).unwrap().value;
    let b1 = sys.spectrum_at(1.0).unwrap().value;
    let oracle = legendre_closed(1.0);
    let hi = sys.spectrum_at(2.0).unwrap().value;
    let lo = sys.spectrum_at(sys.alpha_range().lo).unwrap().value;
    let pass = (a0 - 1.2075187).abs() <= TOL_ALPHA0
        && (b0 - 1.0).abs() <= TOL_B_ALPHA0
        && (b1 - B_AT_ONE).abs() <= TOL_B_AT_ONE
        && (b1 - oracle).abs() <= TOL_LEGENDRE
        && hi.abs() <= TOL_ENDPOINT
        && lo.abs() <= TOL_ENDPOINT;
    outcome(
        pass,
        format!("α₀ {a0:.9}, b(α₀) {b0:.10}, b(1) {b1:.7} (oracle {oracle:.7}), b(2) {hi:.1e}, b(α₋) {lo:.1e}"),
    )
}

fn enumerated_range(phi: &Potential, psi: &Potential) -> (f64, f64) {
    let g = EdgeGraph::for_potentials(&[phi, psi]).unwrap();
    let (wp, ws) = (g.weights(phi).unwrap(), g.weights(psi).unwrap());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in g.simple_cycles(1_000_000).unwrap() {
        let sp: f64 = c.iter().map(|&e| wp[e]).sum();
        let ss: f64 = c.iter().map(|&e| ws[e]).sum();
        lo = lo.min(-sp / ss);
        hi = hi.max(-sp / ss);
    }
    (lo, hi)
}

fn criterion_4() -> Outcome {
    let r = thermo::alpha_range(&bin14(), &log2_psi()).unwrap();
    let e_bin = (r.0 - (4.0f64 / 3.0).log2()).abs().max((r.1 - 2.0).abs());
    let p = thermo::alpha_range(&phi_pm(), &log2_psi()).unwrap();
    let e_pm = (p.0 + 0.5 / LN2).abs().max((p.1 - 0.5 / LN2).abs());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let sft = random_mixing_sft(&mut rng, 5);
        let depth = rng.gen_range(1..=2);
        let phi = random_potential(&mut rng, &sft, depth, -2.0, 2.0);
        let psi = random_potential(&mut rng, &sft, depth, 0.2, 2.0);
        let (lo, hi) = thermo::alpha_range(&phi, &psi).unwrap();
        let (elo, ehi) = enumerated_range(&phi, &psi);
        worst = worst.max((lo - elo).abs()).max((hi - ehi).abs());
    }
    outcome(
        e_bin <= TOL_RANGE && e_pm <= TOL_RANGE && worst <= TOL_RANGE,
        format!("bin14 err {e_bin:.1e}, phi-pm err {e_pm:.1e}, 50 random specs max err {worst:.1e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut failures = 0;
    for _ in 0..100 {
        let sft = random_mixing_sft(&mut rng, 4);
        let raw = random_potential(&mut rng, &sft, 2, -1.0, 1.0);
        let phi = raw.shifted(-thermo::max_cycle_mean(&raw).unwrap());
        let f = thermo::subaction(&phi).unwrap();
        let check = thermo::check_subaction(&phi, &f).unwrap();
        let sup = thermo::birkhoff_sup(&phi).unwrap();
        worst_excess = worst_excess.max(check.max_excess);
        if check.max_excess > TOL_SUBACTION || !check.tight_cycle || sup > 2.0 * f.sup_norm() + TOL_SUBACTION {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("100 random potentials, {failures} failures, worst edge excess {worst_excess:.1e}"),
    )
}

fn criterion_6() -> Outcome {
    let t = build_postfix_set(&phi_pm(), 2.0, 0.6).unwrap();
    let r = verify_postfix(&t, &phi_pm(), 14).unwrap();
    outcome(
        r.all_passed(),
        format!(
            "‖T‖ = {}, {}/{} words of W_K' up to length 14 pass",
            t.norm(),
            r.passed,
            r.checked
        ),
    )
}

fn children_sum_ok(d: &MassDistribution, node: &Node) -> bool {
    let kids = d.children(node).unwrap();
    let sum: f64 = kids.iter().map(|c| c.mass()).sum();
    (sum - node.mass()).abs() <= TOL_MASS_REL * node.mass()
}

fn criterion_7() -> Outcome {
    let psi = log2_psi();
    let mut notes = Vec::new();
    let mut pass = true;

    // Exhaustive part on a small instance.
    let small = MassDistribution::build(&phi_pm(), &psi, 0.1, &[w("01")], &MassOptions::default()).unwrap();
    let mut last = f64::INFINITY;
    let mut monotone = true;
    for k in 1..=6 {
        let r = small.max_ratio(k, 1 << 12).unwrap();
        monotone &= r <= last * (1.0 + TOL_MASS_REL);
        last = r;
    }
    let mut sums_ok = true;
    for k in 1..=5 {
        for n in small.generation(k, 1 << 12).unwrap() {
            sums_ok &= children_sum_ok(&small, &n);
        }
    }
    pass &= monotone && sums_ok;
    notes.push(format!("s=0.1: ratio monotone k<=6 {monotone}, child sums {sums_ok}"));

    let b0 = thermo::spectrum_at(0.0, &phi_pm(), &psi).unwrap().value;
    let s = 0.5 * b0;
    let d = MassDistribution::build(&phi_pm(), &psi, s, &[w("01")], &MassOptions::default()).unwrap();
    let total: f64 = d.level1().iter().map(|n| n.mass()).sum();
    let normalized = (total - 1.0).abs() <= TOL_MASS_REL;
    let mut bounded = 0;
    let mut windows = 0;
    let mut children = true;
    let mut min_dim = f64::INFINITY;
    for seed in 0..100 {
        let node = d.sample(8, seed).unwrap();
        let c = d.certify(&node).unwrap();
        bounded += c.sum_ok as usize;
        windows += c.window_ok as usize;
        min_dim = min_dim.min(c.local_dimension);
        if seed < 3 {
            children &= children_sum_ok(&d, &node);
        }
    }
    pass &= normalized && children && bounded == 100 && windows == 100 && min_dim >= s - LOCAL_DIM_SLACK;
    notes.push(format!(
        "s={s:.4} (m={}, |A1|={}): normalized {normalized}, sums bounded {bounded}/100, windows {windows}/100, min local dim {min_dim:.4}",
        d.m(),
        d.level1().len()
    ));
    outcome(pass, notes.join("; "))
}

fn criterion_8() -> Outcome {
    let leb = CdfModel::new(&ifs_bin(), &Potential::constant(&full2(), 0.0)).unwrap();
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let x = (i as f64 + 0.5) / 1000.0;
        worst = worst.max((leb.cdf_eval(x, TOL_CDF).unwrap() - x).abs());
    }
    let b = CdfModel::new(&ifs_bin(), &bin14()).unwrap();
    let half = b.cdf_eval(0.5, TOL_CDF).unwrap();
    let three = b.cdf_eval(0.75, TOL_CDF).unwrap();
    let curve = b.cdf_curve(1001, TOL_CDF).unwrap();
    let monotone = curve.windows(2).all(|p| p[0].1 <= p[1].1);
    let ends = curve[0].1 == 0.0 && curve[1000].1 == 1.0;
    let pass =
        worst <= TOL_CDF && (half - 0.25).abs() <= TOL_CDF && (three - 0.4375).abs() <= TOL_CDF && monotone && ends;
    outcome(
        pass,
        format!(
            "uniform max err {worst:.1e}, C(1/2) {half:.10}, C(3/4) {three:.10}, monotone {monotone}, endpoints {ends}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let m = CdfModel::new(&ifs_bin(), &bin14()).unwrap();
    let x = 1.0 / 3.0;
    let a0 = m.alpha0().unwrap().alpha0;
    let exponent = m.holder_probe(x, a0, 30).unwrap().exponent;
    let at_a0 = m.moderate_check(x, a0, C_MODERATE, 5, 25).unwrap();
    let at_one = m.moderate_check(x, 1.0, C_MODERATE, 5, 25).unwrap();
    let p = m.certified_point(a0, 12, 3, 0).unwrap();
    let certified = m.moderate_check(p.x, a0, C_CERTIFIED, 5, 20).unwrap();
    let pass = (exponent - 1.2075).abs() <= TOL_EXPONENT && at_a0 && !at_one && certified && p.n_ok;
    outcome(
        pass,
        format!(
            "exponent {exponent:.5}, moderate at α₀ {at_a0}, at 1 {at_one}, certified point x={:.12} passes {certified} (N-check {})",
            p.x, p.n_ok
        ),
    )
}

fn criterion_10() -> Outcome {
    let c = counterexample_word(&phi_neg(), &log2_psi()).unwrap();
    let mut worst = 0.0f64;
    for n in 1..=200 {
        let word = Word(w("01").repeat(n));
        let s = phi_neg().birkhoff_sum(&word, 2 * n).unwrap();
        worst = worst.max((s + n as f64 * 3f64.ln()).abs() / n as f64);
    }
    outcome(
        c.word == w("0") && worst <= TOL_DRIFT,
        format!("word {:?}, max |S_2n + n log 3|/n over n<=200 {worst:.1e}", c.word.0),
    )
}

fn criterion_11() -> Outcome {
    let chain = GibbsChain::new(&Potential::constant(&full2(), 0.0)).unwrap();
    let mut hits = 0;
    for seed in 0..200 {
        let orbit = chain.sample_orbit(10_000, seed).unwrap();
        let mut s = 0i64;
        if orbit.iter().any(|&a| {
            s += if a == 0 { 1 } else { -1 };
            s == 0
        }) {
            hits += 1;
        }
    }
    let share = hits as f64 / 200.0;
    outcome(
        share >= RECURRENCE_SHARE,
        format!("{hits}/200 orbits return to 0 within 10^4 steps"),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("pressure oracles", criterion_1),
        ("beta closed form", criterion_2),
        ("spectrum values", criterion_3),
        ("ratio range", criterion_4),
        ("sub-actions", criterion_5),
        ("postfix set", criterion_6),
        ("mass distribution", criterion_7),
        ("distribution function", criterion_8),
        ("Hölder probes", criterion_9),
        ("drift counterexample", criterion_10),
        ("random walk recurrence", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        failed += !o.pass as usize;
        println!(
            "criterion {:>2} {status} {name}: {} ({:.1}s)",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
