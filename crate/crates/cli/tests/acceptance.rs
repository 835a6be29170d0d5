//! One line per acceptance criterion, written straight to stderr so it shows
//! without `--nocapture`:
//!
//! ```text
//! cargo test -p bk-cli --test acceptance
//! ```
//!
//! Every exact criterion uses zero tolerance. The sampler criterion uses a
//! fixed seed and a 3-standard-error band per support point.

use std::io::Write;
use std::process::Command;
use std::time::Instant;

use bk_core::boxop::{box_general, box_increasing};
use bk_core::demo::remark_counterexample;
use bk_core::proofkit::{
    check_T_bar_equality, check_T_inclusion, check_cell_partition, check_convex_decomposition,
    sweep_section_inclusion, T_decode,
};
use bk_core::rational::{int, ratio};
use bk_core::verify::{
    is_bk_measure, search_mixtures, sweep, CandidateSource, Classification, Inequality, SearchConfig, SweepOptions,
    Universe,
};
use bk_core::{
    cylinder_subset, enumerate_monotone_events, k_out_of_n_measure, product_measure, tensor, weighted_k_out_of_n_measure,
    Config, Event, IndexSet, Rational,
};

fn report(id: u32, name: &str, ok: bool, detail: &str, start: Instant) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let line = format!("criterion {id:>2} [{verdict}] {name}: {detail} ({:.1}s)\n", start.elapsed().as_secs_f64());
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {id} failed: {detail}");
}

fn bkcheck(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_bkcheck")).args(args).output().expect("run bkcheck");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn single_threaded() -> SweepOptions {
    SweepOptions { workers: 1, ..Default::default() }
}

#[test]
fn c01_k_out_of_n_is_bk_on_monotone_pairs() {
    let start = Instant::now();
    let mut pairs = 0;
    let mut violations = 0;
    for n in 1..=4 {
        for k in 0..=n {
            let mu = k_out_of_n_measure(k, n).unwrap();
            let r = sweep(Some(&mu), n, &Universe::AllMonotone, Inequality::Bk, &single_threaded()).unwrap();
            pairs += r.pairs_checked;
            violations += r.violation_count;
        }
    }
    let n4 = sweep(Some(&k_out_of_n_measure(2, 4).unwrap()), 4, &Universe::AllMonotone, Inequality::Bk, &single_threaded())
        .unwrap()
        .pairs_checked;
    report(
        1,
        "k-out-of-n BK, n <= 4, all k, all monotone pairs",
        violations == 0 && n4 == 168 * 168,
        &format!("{pairs} pairs, {violations} violations, {n4} pairs per k at n = 4"),
        start,
    );
}

#[test]
fn c02_product_measures_are_bk_on_all_pairs() {
    let start = Instant::now();
    let mut pairs = 0;
    let mut violations = 0;
    for n in 1..=3 {
        for p in [ratio(1, 4), ratio(1, 2), ratio(3, 4)] {
            let mu = product_measure(&vec![p; n]).unwrap();
            let r = sweep(Some(&mu), n, &Universe::AllEvents, Inequality::Bk, &SweepOptions::default()).unwrap();
            pairs += r.pairs_checked;
            violations += r.violation_count;
        }
    }
    report(
        2,
        "product BK, n <= 3, p in {1/4,1/2,3/4}, all event pairs",
        violations == 0,
        &format!("{pairs} pairs, {violations} violations"),
        start,
    );
}

#[test]
fn c03_cardinality_inequality() {
    let start = Instant::now();
    let mut pairs = 0;
    let mut violations = 0;
    for n in 1..=3 {
        let r = sweep(None, n, &Universe::AllEvents, Inequality::Reimer, &SweepOptions::default()).unwrap();
        pairs += r.pairs_checked;
        violations += r.violation_count;
    }
    let random = Universe::RandomSample { count: 1_000_000, seed: 20240601 };
    let r = sweep(None, 4, &random, Inequality::Reimer, &SweepOptions::default()).unwrap();
    report(
        3,
        "|A box B| <= |A and not-B|, all pairs n <= 3 and 10^6 random pairs at n = 4",
        violations == 0 && r.holds() && r.pairs_checked == 1_000_000,
        &format!("{pairs} exhaustive pairs, {} random pairs, {} violations", r.pairs_checked, violations + r.violation_count),
        start,
    );
}

#[test]
fn c04_half_k_out_of_n_cardinality_form() {
    let start = Instant::now();
    let mut pairs = 0;
    let mut violations = 0;
    for m in [2, 4] {
        let r = sweep(None, m, &Universe::AllMonotone, Inequality::Prop2, &single_threaded()).unwrap();
        pairs += r.pairs_checked;
        violations += r.violation_count;
    }
    report(
        4,
        "P_{m/2,m}(A box B) <= P_{m/2,m}(A and not-B), m in {2,4}",
        violations == 0 && pairs == 36 + 168 * 168,
        &format!("{pairs} pairs, {violations} violations"),
        start,
    );
}

#[test]
fn c05_proof_gadgets() {
    let start = Instant::now();
    let mut partitions = 0;
    let mut partition_ok = true;
    for n in 0..=5 {
        for k in 0..=n {
            let s = check_cell_partition(k, n).expect("cell construction assertions never fire");
            partition_ok &= s.holds;
            partitions += 1;
        }
    }
    let mut section_instances = 0;
    for n in 1..=3 {
        let events: Vec<Event> = (0..1u64 << (1 << n)).map(|w| Event::from_word(n, w).unwrap()).collect();
        section_instances += sweep_section_inclusion(&events).expect("section inclusion").instances;
    }
    let monotone = enumerate_monotone_events(4).unwrap();
    let mut t_inclusions = 0;
    let mut t_ok = true;
    for a in &monotone {
        for b in &monotone {
            t_ok &= check_T_inclusion(a, b, 4).unwrap().holds;
            t_ok &= check_T_bar_equality(a, b, 4).unwrap().holds;
            t_inclusions += 1;
        }
    }
    // The T-bar identity only sees A ∩ Ω̂_4 and B ∩ Ω̂_4, so these 16 × 16 pairs cover every event pair.
    let alternating = |mask: u64| {
        let members: Vec<Config> =
            (0..4u64).filter(|t| mask >> t & 1 == 1).map(|t| T_decode(&Config::new(2, t).unwrap()).unwrap()).collect();
        Event::from_configs(4, members).unwrap()
    };
    let mut bar_pairs = 0;
    for x in 0..16 {
        for y in 0..16 {
            t_ok &= check_T_bar_equality(&alternating(x), &alternating(y), 4).unwrap().holds;
            bar_pairs += 1;
        }
    }
    let mut convex_ok = true;
    for m in [2, 4, 6] {
        let r = check_convex_decomposition(m).unwrap();
        convex_ok &= r.holds && r.max_deviation == int(0);
    }
    report(
        5,
        "cell partition, section inclusion, T inclusion/equality, convex decomposition",
        partition_ok && t_ok && convex_ok,
        &format!(
            "{partitions} (k,n) partitions, {section_instances} section instances, {t_inclusions} monotone T pairs, \
             {bar_pairs} alternating T-bar pairs, convex deviation 0 for m = 2,4,6"
        ),
        start,
    );
}

#[test]
fn c06_n4_alternating_instance() {
    let start = Instant::now();
    let (code, stdout, _) = bkcheck(&["demo", "remark-counterexample"]);
    let w = remark_counterexample().unwrap();
    let printed = stdout.contains("(A □ B) ∩ Ω̂4 = ∅")
        && stdout.contains("T((A □ B) ∩ Ω̂4) = ∅")
        && stdout.contains("T(A ∩ Ω̂4) □ T(B ∩ Ω̂4) = {11}");
    let exact = w.box_alternating.is_empty()
        && w.lhs.is_empty()
        && w.rhs == Event::from_bitstrings(2, &["11"]).unwrap()
        && w.box_full == Event::from_bitstrings(4, &["1111"]).unwrap();
    report(
        6,
        "n = 4 instance with a proper T inclusion",
        code == 0 && printed && exact,
        "restricted box = ∅, T right side = {11}; on the full cube A box B = {1111}",
        start,
    );
}

#[test]
fn c07_weighted_and_tensor_extensions() {
    let start = Instant::now();
    let ints = |v: &[i64]| v.iter().map(|&x| int(x)).collect::<Vec<Rational>>();
    let weighted = weighted_k_out_of_n_measure(2, 3, &ints(&[1, 2, 3])).unwrap();
    let p12 = k_out_of_n_measure(1, 2).unwrap();
    let plain_tensor = tensor(&[p12.clone(), p12]).unwrap();
    let weighted_tensor = tensor(&[
        weighted_k_out_of_n_measure(1, 2, &ints(&[1, 2])).unwrap(),
        weighted_k_out_of_n_measure(1, 2, &ints(&[3, 5])).unwrap(),
    ])
    .unwrap();
    let verdicts: Vec<bool> =
        [&weighted, &plain_tensor, &weighted_tensor].iter().map(|mu| is_bk_measure(mu).unwrap().is_bk).collect();
    report(
        7,
        "weighted P^(1,2,3)_{2,3}, P_{1,2} x P_{1,2}, P^(1,2)_{1,2} x P^(3,5)_{1,2} are BK",
        verdicts.iter().all(|&v| v),
        &format!("verdicts {verdicts:?}"),
        start,
    );
}

#[test]
fn c08_mixture_search() {
    let start = Instant::now();
    let mut projections = 0;
    let mut all_bk = true;
    for n in 1..=3 {
        let cfg = SearchConfig { source: CandidateSource::None, ..SearchConfig::grid(n, 1) };
        let r = search_mixtures(&cfg).unwrap();
        projections += r.candidates_total;
        all_bk &= r.bk_count == r.candidates_total;
    }
    let r = search_mixtures(&SearchConfig::grid(2, 2)).unwrap();
    let two_point = r.results.iter().find(|c| c.pmf == vec![ratio(1, 2), int(0), ratio(1, 2)]).unwrap();
    let pair = two_point.worst_pair.as_ref().unwrap();
    let witness_ok = two_point.classification == Classification::NonBk
        && two_point.min_slack == Some(ratio(-1, 4))
        && pair.a.short() == "up{10}"
        && pair.b.short() == "up{01}";
    report(
        8,
        "projection mixtures BK; {00,11} mixture non-BK",
        all_bk && witness_ok,
        &format!("{projections} projection candidates BK; two-point witness ({}, {}) slack -1/4", pair.a.short(), pair.b.short()),
        start,
    );
}

#[test]
fn c09_oracle_equivalence() {
    let start = Instant::now();
    let mut box_pairs = 0;
    let mut box_ok = true;
    for n in 1..=4 {
        let events = enumerate_monotone_events(n).unwrap();
        for a in &events {
            for b in &events {
                box_ok &= box_increasing(a, b).unwrap() == box_general(a, b).unwrap();
                box_pairs += 1;
            }
        }
    }
    let mut cyl_checks = 0;
    let mut cyl_ok = true;
    for n in 1..=4 {
        let full = (1u64 << n) - 1;
        for a in enumerate_monotone_events(n).unwrap() {
            for w in 0..1u64 << n {
                for s in 0..1u64 << n {
                    let free = full & !s;
                    let fixed = w & s;
                    let oracle = (0..=free).filter(|x| x & !free == 0).all(|x| a.contains_bits(fixed | x));
                    let fast =
                        cylinder_subset(&Config::new(n, w).unwrap(), &IndexSet::new(n, s).unwrap(), &a).unwrap();
                    cyl_ok &= oracle == fast;
                    cyl_checks += 1;
                }
            }
        }
    }
    report(
        9,
        "box_increasing == box_general and cylinder fast path == enumeration, n <= 4",
        box_ok && cyl_ok,
        &format!("{box_pairs} box pairs, {cyl_checks} cylinder checks"),
        start,
    );
}

#[test]
fn c10_sampler_statistics() {
    let start = Instant::now();
    let args = ["sample", "--n", "5", "--k", "2", "--w", "1,2,3,4,5", "--N", "100000", "--seed", "1"];
    let (code, first, _) = bkcheck(&args);
    let (_, second, _) = bkcheck(&args);
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    let report_v = &v["report"];
    let freqs = report_v["frequencies"].as_array().unwrap();
    let p00011 = freqs.iter().find(|f| f["config"] == "00011").unwrap();
    let max_z = report_v["max_abs_z"].as_f64().unwrap();
    report(
        10,
        "weighted k-out-of-n sampler, n = 5, k = 2, w = (1..5), N = 10^5",
        code == 0
            && freqs.len() == 10
            && report_v["within_3_sigma"] == true
            && p00011["exact"] == "4/17"
            && first == second,
        &format!("max |z| = {max_z:.3} over 10 support points, P(00011) = 4/17, repeat run identical"),
        start,
    );
}

fn normalized(json: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    v["report"].as_object_mut().unwrap().remove("elapsed_ms");
    v["run_config"]["common"].as_object_mut().unwrap().remove("workers");
    v
}

#[test]
fn c11_worker_count_independence() {
    let start = Instant::now();
    let runs: [&[&str]; 3] = [
        &["sweep", "--inequality", "bk", "--measure", "k_out_of_n", "--n", "4", "--k", "2", "--universe", "monotone"],
        &["sweep", "--inequality", "reimer", "--n", "4", "--universe", "random", "--count", "200000", "--seed", "5"],
        &["sweep", "--inequality", "bk", "--measure", "mixture", "--n", "2", "--pmf", "1/2,0,1/2", "--universe", "monotone"],
    ];
    let mut ok = true;
    for args in runs {
        let outputs: Vec<serde_json::Value> = ["1", "2", "8"]
            .iter()
            .map(|w| {
                let mut full = args.to_vec();
                full.extend(["--workers", w]);
                normalized(&bkcheck(&full).1)
            })
            .collect();
        let bytes: Vec<String> = outputs.iter().map(|v| serde_json::to_string(v).unwrap()).collect();
        ok &= bytes.windows(2).all(|w| w[0] == w[1]);
    }
    report(
        11,
        "sweep JSON identical for 1, 2 and 8 workers (timing and worker fields removed)",
        ok,
        "3 sweeps x 3 worker counts",
        start,
    );
}
