//! Summary statistics over a results CSV: messages saved by the constrained
//! protocol, outcome-utility comparison categories, and negotiation-length
//! histograms.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{bail, Result};
use serde::Serialize;

use crate::results::ResultRow;

/// How a constrained-protocol outcome compares to its unconstrained
/// counterpart. The Much* buckets require a utility-sum difference greater
/// than 10 (a tenth of the theoretical maximum in the experiment's scale).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ComparisonCategory {
    MuchBetter,
    Better,
    Equal,
    Worse,
    MuchWorse,
}

impl ComparisonCategory {
    pub const ALL: [ComparisonCategory; 5] = [
        ComparisonCategory::MuchBetter,
        ComparisonCategory::Better,
        ComparisonCategory::Equal,
        ComparisonCategory::Worse,
        ComparisonCategory::MuchWorse,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ComparisonCategory::MuchBetter => "much_better",
            ComparisonCategory::Better => "better",
            ComparisonCategory::Equal => "equal",
            ComparisonCategory::Worse => "worse",
            ComparisonCategory::MuchWorse => "much_worse",
        }
    }
}

const CATEGORY_MARGIN: f64 = 10.0;
const UTILITY_EPS: f64 = 1e-9;

/// Categorizes a utility difference (constrained minus unconstrained).
pub fn categorize(diff: f64) -> ComparisonCategory {
    if diff > CATEGORY_MARGIN {
        ComparisonCategory::MuchBetter
    } else if diff > UTILITY_EPS {
        ComparisonCategory::Better
    } else if diff < -CATEGORY_MARGIN {
        ComparisonCategory::MuchWorse
    } else if diff < -UTILITY_EPS {
        ComparisonCategory::Worse
    } else {
        ComparisonCategory::Equal
    }
}

/// One configuration's paired outcomes under both protocols, per strategy.
#[derive(Debug, Clone)]
pub struct PairedOutcome {
    pub config_id: String,
    pub strategy: String,
    pub possible: bool,
    pub messages_aop: u64,
    pub messages_acop: u64,
    pub utility_a_aop: f64,
    pub utility_b_aop: f64,
    pub utility_a_acop: f64,
    pub utility_b_acop: f64,
}

impl PairedOutcome {
    /// Messages saved by the constrained protocol.
    pub fn messages_saved(&self) -> i64 {
        self.messages_aop as i64 - self.messages_acop as i64
    }

    /// Utility-sum difference, constrained minus unconstrained.
    pub fn sum_diff(&self) -> f64 {
        (self.utility_a_acop + self.utility_b_acop) - (self.utility_a_aop + self.utility_b_aop)
    }

    pub fn category(&self) -> ComparisonCategory {
        categorize(self.sum_diff())
    }
}

type ProtocolPair<'a> = (Option<&'a ResultRow>, Option<&'a ResultRow>);

/// Pairs each configuration's rows across the two protocols. Rows missing
/// their counterpart are reported in the second return value and excluded.
pub fn pair_rows(rows: &[ResultRow]) -> (Vec<PairedOutcome>, Vec<String>) {
    let mut by_key: BTreeMap<(String, String), ProtocolPair> = BTreeMap::new();
    for row in rows {
        let entry = by_key
            .entry((row.config_id.clone(), row.strategy.clone()))
            .or_default();
        match row.protocol.as_str() {
            "aop" => entry.0 = Some(row),
            "acop" => entry.1 = Some(row),
            _ => {}
        }
    }
    let mut pairs = Vec::new();
    let mut incomplete = Vec::new();
    for ((config_id, strategy), entry) in by_key {
        match entry {
            (Some(aop), Some(acop)) => pairs.push(PairedOutcome {
                config_id,
                strategy,
                possible: aop.n_solutions >= 1,
                messages_aop: aop.message_count,
                messages_acop: acop.message_count,
                utility_a_aop: aop.utility_a,
                utility_b_aop: aop.utility_b,
                utility_a_acop: acop.utility_a,
                utility_b_acop: acop.utility_b,
            }),
            _ => incomplete.push(format!("{config_id}/{strategy}")),
        }
    }
    (pairs, incomplete)
}

/// Five-number summary with Tukey whiskers for a box plot.
#[derive(Debug, Clone, Serialize)]
pub struct BoxStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
}

/// Linear-interpolation percentile over a sorted slice.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let rank = p * (n - 1) as f64;
            let lo = rank.floor() as usize;
            let hi = rank.ceil() as usize;
            let frac = rank - lo as f64;
            sorted[lo] + (sorted[hi] - sorted[lo]) * frac
        }
    }
}

pub fn box_stats(values: &[f64]) -> BoxStats {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mean = if n == 0 {
        f64::NAN
    } else {
        sorted.iter().sum::<f64>() / n as f64
    };
    let q1 = percentile(&sorted, 0.25);
    let median = percentile(&sorted, 0.5);
    let q3 = percentile(&sorted, 0.75);
    let iqr = q3 - q1;
    let (whisker_lo, whisker_hi) = if n == 0 {
        (f64::NAN, f64::NAN)
    } else {
        // whiskers clamp to the most extreme points inside 1.5 IQR
        let lo_fence = q1 - 1.5 * iqr;
        let hi_fence = q3 + 1.5 * iqr;
        let lo = sorted.iter().copied().find(|&v| v >= lo_fence).unwrap();
        let hi = sorted
            .iter()
            .rev()
            .copied()
            .find(|&v| v <= hi_fence)
            .unwrap();
        (lo, hi)
    };
    BoxStats {
        n,
        mean,
        median,
        q1,
        q3,
        whisker_lo,
        whisker_hi,
    }
}

/// Which pairs a statistic covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Subset {
    All,
    Possible,
    Impossible,
}

impl Subset {
    pub const ALL: [Subset; 3] = [Subset::All, Subset::Possible, Subset::Impossible];

    pub fn as_str(&self) -> &'static str {
        match self {
            Subset::All => "all",
            Subset::Possible => "possible",
            Subset::Impossible => "impossible",
        }
    }

    fn contains(&self, pair: &PairedOutcome) -> bool {
        match self {
            Subset::All => true,
            Subset::Possible => pair.possible,
            Subset::Impossible => !pair.possible,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SavedStatsLine {
    pub strategy: String,
    pub subset: &'static str,
    #[serde(flatten)]
    pub stats: BoxStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct CategoryLine {
    pub strategy: String,
    pub category: &'static str,
    pub count: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HistogramLine {
    pub strategy: String,
    pub protocol: String,
    pub bin_lo: u64,
    pub bin_hi: u64,
    pub count: usize,
}

/// Everything the analyze command reports.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub pairs: usize,
    pub incomplete: Vec<String>,
    pub saved: Vec<SavedStatsLine>,
    pub categories: Vec<CategoryLine>,
    /// Per-agent sensitivity breakdown, present with `per_agent`.
    pub categories_per_agent: Option<Vec<(String, Vec<CategoryLine>)>>,
    pub histograms: Vec<HistogramLine>,
}

fn strategies_of(pairs: &[PairedOutcome]) -> Vec<String> {
    let mut out: Vec<String> = pairs.iter().map(|p| p.strategy.clone()).collect();
    out.sort();
    out.dedup();
    out
}

fn category_table<F: Fn(&PairedOutcome) -> f64>(
    pairs: &[PairedOutcome],
    strategy: &str,
    diff_of: F,
) -> Vec<CategoryLine> {
    let selected: Vec<&PairedOutcome> =
        pairs.iter().filter(|p| p.strategy == strategy).collect();
    let total = selected.len().max(1);
    ComparisonCategory::ALL
        .iter()
        .map(|category| {
            let count = selected
                .iter()
                .filter(|p| categorize(diff_of(p)) == *category)
                .count();
            CategoryLine {
                strategy: strategy.to_string(),
                category: category.as_str(),
                count,
                percent: 100.0 * count as f64 / total as f64,
            }
        })
        .collect()
}

/// Geometric (log-scale-ready) bins: [1,2), [2,4), [4,8), ...
fn length_bin(count: u64) -> (u64, u64) {
    let lo = if count == 0 {
        0
    } else {
        1u64 << (63 - count.leading_zeros())
    };
    (lo, lo * 2)
}

pub fn analyze(rows: &[ResultRow], per_agent: bool) -> Result<AnalysisReport> {
    if rows.is_empty() {
        bail!("no rows to analyze");
    }
    let (pairs, incomplete) = pair_rows(rows);
    let strategies = strategies_of(&pairs);

    let mut saved = Vec::new();
    for strategy in &strategies {
        for subset in Subset::ALL {
            let values: Vec<f64> = pairs
                .iter()
                .filter(|p| &p.strategy == strategy && subset.contains(p))
                .map(|p| p.messages_saved() as f64)
                .collect();
            saved.push(SavedStatsLine {
                strategy: strategy.clone(),
                subset: subset.as_str(),
                stats: box_stats(&values),
            });
        }
    }

    let mut categories = Vec::new();
    for strategy in &strategies {
        categories.extend(category_table(&pairs, strategy, |p| p.sum_diff()));
    }

    let categories_per_agent = per_agent.then(|| {
        ["A", "B"]
            .iter()
            .map(|agent| {
                let mut lines = Vec::new();
                for strategy in &strategies {
                    lines.extend(category_table(&pairs, strategy, |p| match *agent {
                        "A" => p.utility_a_acop - p.utility_a_aop,
                        _ => p.utility_b_acop - p.utility_b_aop,
                    }));
                }
                (agent.to_string(), lines)
            })
            .collect()
    });

    let mut hist_map: BTreeMap<(String, String, u64, u64), usize> = BTreeMap::new();
    for row in rows {
        let (lo, hi) = length_bin(row.message_count);
        *hist_map
            .entry((row.strategy.clone(), row.protocol.clone(), lo, hi))
            .or_default() += 1;
    }
    let histograms = hist_map
        .into_iter()
        .map(|((strategy, protocol, bin_lo, bin_hi), count)| HistogramLine {
            strategy,
            protocol,
            bin_lo,
            bin_hi,
            count,
        })
        .collect();

    Ok(AnalysisReport {
        pairs: pairs.len(),
        incomplete,
        saved,
        categories,
        categories_per_agent,
        histograms,
    })
}

impl AnalysisReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "pairs analyzed: {}", self.pairs);
        if !self.incomplete.is_empty() {
            let _ = writeln!(
                out,
                "excluded (missing protocol counterpart): {}",
                self.incomplete.len()
            );
        }
        let _ = writeln!(out, "\nmessages saved by the constrained protocol:");
        let _ = writeln!(
            out,
            "{:<12} {:<11} {:>8} {:>10} {:>8} {:>8} {:>8} {:>9} {:>9}",
            "strategy", "subset", "n", "mean", "median", "q1", "q3", "lo-whisk", "hi-whisk"
        );
        for line in &self.saved {
            let s = &line.stats;
            let _ = writeln!(
                out,
                "{:<12} {:<11} {:>8} {:>10.2} {:>8.1} {:>8.1} {:>8.1} {:>9.1} {:>9.1}",
                line.strategy,
                line.subset,
                s.n,
                s.mean,
                s.median,
                s.q1,
                s.q3,
                s.whisker_lo,
                s.whisker_hi
            );
        }
        let _ = writeln!(out, "\noutcome utility, constrained vs unconstrained:");
        let _ = writeln!(
            out,
            "{:<12} {:<12} {:>8} {:>9}",
            "strategy", "category", "count", "percent"
        );
        for line in &self.categories {
            let _ = writeln!(
                out,
                "{:<12} {:<12} {:>8} {:>8.2}%",
                line.strategy, line.category, line.count, line.percent
            );
        }
        if let Some(per_agent) = &self.categories_per_agent {
            for (agent, lines) in per_agent {
                let _ = writeln!(out, "\nper-agent breakdown, agent {agent}:");
                for line in lines {
                    let _ = writeln!(
                        out,
                        "{:<12} {:<12} {:>8} {:>8.2}%",
                        line.strategy, line.category, line.count, line.percent
                    );
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(
        config_id: &str,
        strategy: &str,
        protocol: &str,
        message_count: u64,
        ua: f64,
        ub: f64,
        n_solutions: u64,
    ) -> ResultRow {
        ResultRow {
            config_id: config_id.into(),
            strategy: strategy.into(),
            protocol: protocol.into(),
            success: ua > 0.0,
            message_count,
            utility_a: ua,
            utility_b: ub,
            termination_reason: "accepted".into(),
            n_constraints_injected: 0,
            rho_a: 0.5,
            rho_b: 0.5,
            n_solutions,
            seed: 0,
        }
    }

    #[test]
    fn identical_protocol_outcomes_are_all_equal_with_zero_saved() {
        let mut rows = Vec::new();
        for i in 0..10 {
            let id = format!("c{i}");
            rows.push(row(&id, "random", "aop", 8, 40.0, 30.0, 5));
            rows.push(row(&id, "random", "acop", 8, 40.0, 30.0, 5));
        }
        let report = analyze(&rows, false).unwrap();
        assert_eq!(report.pairs, 10);
        for line in &report.saved {
            if line.stats.n > 0 {
                assert_eq!(line.stats.mean, 0.0);
                assert_eq!(line.stats.median, 0.0);
            }
        }
        let equal = report
            .categories
            .iter()
            .find(|c| c.category == "equal")
            .unwrap();
        assert_eq!(equal.count, 10);
        assert_eq!(equal.percent, 100.0);
    }

    #[test]
    fn two_row_fixture_saves_six_messages_and_stays_equal() {
        let rows = vec![
            row("c0", "concession", "aop", 10, 55.0, 62.0, 3),
            row("c0", "concession", "acop", 4, 55.0, 62.0, 3),
        ];
        let (pairs, incomplete) = pair_rows(&rows);
        assert!(incomplete.is_empty());
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].messages_saved(), 6);
        assert_eq!(pairs[0].category(), ComparisonCategory::Equal);
    }

    #[test]
    fn categories_partition_and_follow_the_ten_point_margin() {
        assert_eq!(categorize(10.5), ComparisonCategory::MuchBetter);
        assert_eq!(categorize(10.0), ComparisonCategory::Better);
        assert_eq!(categorize(0.5), ComparisonCategory::Better);
        assert_eq!(categorize(0.0), ComparisonCategory::Equal);
        assert_eq!(categorize(-0.5), ComparisonCategory::Worse);
        assert_eq!(categorize(-10.0), ComparisonCategory::Worse);
        assert_eq!(categorize(-10.5), ComparisonCategory::MuchWorse);
    }

    #[test]
    fn percentages_sum_to_one_hundred_per_strategy() {
        let mut rows = Vec::new();
        let outcomes = [
            (20.0, 0.0),
            (5.0, 0.0),
            (0.0, 0.0),
            (0.0, 5.0),
            (0.0, 20.0),
            (3.0, 3.0),
            (7.0, 0.0),
        ];
        for (i, (acop, aop)) in outcomes.iter().enumerate() {
            let id = format!("c{i}");
            rows.push(row(&id, "random", "aop", 6, *aop, 0.0, 1));
            rows.push(row(&id, "random", "acop", 6, *acop, 0.0, 1));
        }
        let report = analyze(&rows, false).unwrap();
        let total: f64 = report
            .categories
            .iter()
            .filter(|c| c.strategy == "random")
            .map(|c| c.percent)
            .sum();
        assert!((total - 100.0).abs() < 0.01);
    }

    #[test]
    fn missing_counterparts_are_reported_and_excluded() {
        let rows = vec![
            row("c0", "random", "aop", 6, 1.0, 1.0, 1),
            row("c1", "random", "aop", 6, 1.0, 1.0, 1),
            row("c1", "random", "acop", 6, 1.0, 1.0, 1),
        ];
        let report = analyze(&rows, false).unwrap();
        assert_eq!(report.pairs, 1);
        assert_eq!(report.incomplete, vec!["c0/random".to_string()]);
    }

    #[test]
    fn ten_row_fixture_matches_hand_computed_stats() {
        // saved values: 10-2=8, 9-3=6, 8-4=4, 7-5=2, 6-6=0
        let mut rows = Vec::new();
        for (i, (aop, acop)) in [(10, 2), (9, 3), (8, 4), (7, 5), (6, 6)]
            .iter()
            .enumerate()
        {
            let id = format!("c{i}");
            rows.push(row(&id, "concession", "aop", *aop, 1.0, 1.0, 1));
            rows.push(row(&id, "concession", "acop", *acop, 1.0, 1.0, 1));
        }
        let report = analyze(&rows, false).unwrap();
        let all = report
            .saved
            .iter()
            .find(|l| l.strategy == "concession" && l.subset == "all")
            .unwrap();
        assert_eq!(all.stats.n, 5);
        assert_eq!(all.stats.mean, 4.0);
        assert_eq!(all.stats.median, 4.0);
        assert_eq!(all.stats.q1, 2.0);
        assert_eq!(all.stats.q3, 6.0);
        assert_eq!(all.stats.whisker_lo, 0.0);
        assert_eq!(all.stats.whisker_hi, 8.0);
    }

    #[test]
    fn histogram_bins_are_geometric() {
        assert_eq!(length_bin(1), (1, 2));
        assert_eq!(length_bin(2), (2, 4));
        assert_eq!(length_bin(3), (2, 4));
        assert_eq!(length_bin(4), (4, 8));
        assert_eq!(length_bin(400), (256, 512));
        let rows = vec![
            row("c0", "random", "aop", 3, 1.0, 1.0, 1),
            row("c0", "random", "acop", 2, 1.0, 1.0, 1),
        ];
        let report = analyze(&rows, false).unwrap();
        assert_eq!(report.histograms.len(), 2);
        assert!(report
            .histograms
            .iter()
            .all(|h| h.bin_lo == 2 && h.bin_hi == 4 && h.count == 1));
    }

    #[test]
    fn per_agent_breakdown_appears_on_request() {
        let rows = vec![
            row("c0", "random", "aop", 6, 10.0, 30.0, 1),
            row("c0", "random", "acop", 6, 30.0, 10.0, 1),
        ];
        let report = analyze(&rows, true).unwrap();
        // sum is unchanged, so the headline category is equal
        assert_eq!(
            report
                .categories
                .iter()
                .find(|c| c.category == "equal")
                .unwrap()
                .count,
            1
        );
        let per_agent = report.categories_per_agent.unwrap();
        let (_, agent_a) = &per_agent[0];
        assert_eq!(
            agent_a
                .iter()
                .find(|c| c.category == "much_better")
                .unwrap()
                .count,
            1
        );
        let (_, agent_b) = &per_agent[1];
        assert_eq!(
            agent_b
                .iter()
                .find(|c| c.category == "much_worse")
                .unwrap()
                .count,
            1
        );
    }
}
