//! Worked examples with every intermediate set printed.

use std::fmt::Write;

use crate::boxop::disjoint_occurrence;
use crate::cube::{Config, Event};
use crate::error::Result;
use crate::measures::WeightedSampler;
use crate::proofkit::{check_T_inclusion, is_pair_alternating, t_image};
use crate::verify::{monte_carlo_bk, random_support_family, MonteCarloReport};

pub const DEMOS: &[&str] = &["remark-counterexample", "alice-bob"];

fn show(e: &Event) -> String {
    if e.is_empty() {
        "∅".into()
    } else {
        e.to_string()
    }
}

/// The n = 4 instance where the `T` inclusion is proper.
#[derive(Debug, Clone)]
pub struct RemarkWalkthrough {
    pub a: Event,
    pub b: Event,
    pub alternating: Event,
    /// `A □ B` on the full cube.
    pub box_full: Event,
    /// `(A □ B) ∩ Ω̂_4`.
    pub box_alternating: Event,
    /// `T((A □ B) ∩ Ω̂_4)`.
    pub lhs: Event,
    pub t_a: Event,
    pub t_b: Event,
    /// `T(A ∩ Ω̂_4) □ T(B ∩ Ω̂_4)`.
    pub rhs: Event,
    pub text: String,
}

/// `A = {ω_1 = 1} ∩ {ω_3 = 1 or ω_4 = 1}`, `B = {ω_3 = 1} ∩ {ω_1 = 1 or ω_2 = 1}` on `{0,1}^4`.
pub fn remark_counterexample() -> Result<RemarkWalkthrough> {
    let a = Event::from_predicate(4, |c| c.get(0) && (c.get(2) || c.get(3)))?;
    let b = Event::from_predicate(4, |c| c.get(2) && (c.get(0) || c.get(1)))?;
    let alternating = Event::from_predicate(4, |c: Config| is_pair_alternating(&c))?;
    let box_full = disjoint_occurrence(&a, &b)?;
    let box_alternating = box_full.intersection(&alternating)?;
    let report = check_T_inclusion(&a, &b, 4)?;
    let (t_a, t_b) = (t_image(&a)?, t_image(&b)?);
    let minimal = |e: &Event| -> Result<String> {
        Ok(e.minimal_elements()?.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","))
    };

    let mut text = String::new();
    let mut line = |s: String| {
        text.push_str(&s);
        text.push('\n');
    };
    line("n = 4, bitstrings are ω1ω2ω3ω4".into());
    line(format!("A = {{ω1=1}} ∩ {{ω3=1 or ω4=1}} = {}  (minimal {})", show(&a), minimal(&a)?));
    line(format!("B = {{ω3=1}} ∩ {{ω1=1 or ω2=1}} = {}  (minimal {})", show(&b), minimal(&b)?));
    line(format!("Ω̂4 = {}", show(&alternating)));
    line(format!("A ∩ Ω̂4 = {}", show(&a.intersection(&alternating)?)));
    line(format!("B ∩ Ω̂4 = {}", show(&b.intersection(&alternating)?)));
    line(format!(
        "A □ B = {}  (only 1111 holds disjoint witnesses: 1001 ≤ 1111 for A, 0110 ≤ 1111 for B)",
        show(&box_full)
    ));
    line(format!("(A □ B) ∩ Ω̂4 = {}", show(&box_alternating)));
    line(format!("T((A □ B) ∩ Ω̂4) = {}", show(&report.lhs)));
    line(format!("T(A ∩ Ω̂4) = {}", show(&t_a)));
    line(format!("T(B ∩ Ω̂4) = {}", show(&t_b)));
    line(format!("T(A ∩ Ω̂4) □ T(B ∩ Ω̂4) = {}", show(&report.rhs)));
    line(format!(
        "inclusion holds: {}; proper: {}",
        report.holds,
        report.strict_witness.map(|c| format!("yes, {c} is only on the right")).unwrap_or_else(|| "no".into())
    ));
    Ok(RemarkWalkthrough {
        a,
        b,
        alternating,
        box_full,
        box_alternating,
        lhs: report.lhs,
        t_a,
        t_b,
        rhs: report.rhs,
        text,
    })
}

/// Thirty items, ten drawn uniformly; Alice and Bob each list eight sets of
/// two or three items. Estimates whether both lists are satisfied by
/// disjoint items less often than independence would suggest.
pub fn alice_bob(draws: u64, seed: u64, workers: usize) -> Result<(String, MonteCarloReport)> {
    let (n, k) = (30, 10);
    let alice = random_support_family(n, 8, 2, 3, seed)?;
    let bob = random_support_family(n, 8, 2, 3, seed.wrapping_add(1))?;
    let sampler = WeightedSampler::new(k, n, vec![1.0; n])?;
    let r = monte_carlo_bk(&sampler, &alice, &bob, draws, seed, workers)?;

    let mut text = String::new();
    let fmt_sets = |sets: &[Vec<usize>]| {
        sets.iter()
            .map(|s| format!("{{{}}}", s.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(text, "{k} of {n} items drawn uniformly, {draws} draws, seed {seed}");
    let _ = writeln!(text, "Alice's list: {}", fmt_sets(&r.a));
    let _ = writeln!(text, "Bob's list:   {}", fmt_sets(&r.b));
    for (name, e) in [("P(A)", &r.p_a), ("P(B)", &r.p_b), ("P(A ∩ B)", &r.p_ab), ("P(A □ B)", &r.p_box)] {
        let _ = writeln!(text, "{name:<9} = {:.6} ± {:.6}", e.value, e.std_error);
    }
    let _ = writeln!(text, "P(A)P(B) − P(A □ B) = {:.6} ± {:.6}", r.slack, r.slack_std_error);
    let _ = writeln!(text, "verdict at 3σ: {:?}", r.verdict);
    Ok((text, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::Verdict;

    #[test]
    fn n4_instance_sets() {
        let w = remark_counterexample().unwrap();
        assert_eq!(w.box_full, Event::from_bitstrings(4, &["1111"]).unwrap());
        assert!(w.box_alternating.is_empty());
        assert!(w.lhs.is_empty());
        assert_eq!(w.t_a, Event::from_bitstrings(2, &["10", "11"]).unwrap());
        assert_eq!(w.t_b, Event::from_bitstrings(2, &["01", "11"]).unwrap());
        assert_eq!(w.rhs, Event::from_bitstrings(2, &["11"]).unwrap());
        assert!(w.text.contains("T(A ∩ Ω̂4) □ T(B ∩ Ω̂4) = {11}"));
        assert!(w.text.contains("(A □ B) ∩ Ω̂4 = ∅"));
    }

    #[test]
    fn alice_bob_small_run() {
        let (text, r) = alice_bob(20_000, 1, 0).unwrap();
        assert_eq!(r.draws, 20_000);
        assert_eq!(r.verdict, Verdict::Consistent);
        assert!(text.contains("verdict"));
    }
}
