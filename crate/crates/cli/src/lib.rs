//! Library surface of the experiment harness, shared by the `acop` binary
//! and the test suites.

pub mod analysis;
pub mod manifest;
pub mod peer;
pub mod results;
pub mod runner;

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;

use analysis::AnalysisReport;

/// Writes the plot-ready CSVs next to the textual summary.
pub fn write_plot_data(report: &AnalysisReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;

    let mut saved = String::from("strategy,subset,n,mean,median,q1,q3,whisker_lo,whisker_hi\n");
    for line in &report.saved {
        let s = &line.stats;
        let _ = writeln!(
            saved,
            "{},{},{},{},{},{},{},{},{}",
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
    std::fs::write(dir.join("messages_saved_box.csv"), saved)?;

    let mut categories = String::from("strategy,category,count,percent\n");
    for line in &report.categories {
        let _ = writeln!(
            categories,
            "{},{},{},{}",
            line.strategy, line.category, line.count, line.percent
        );
    }
    std::fs::write(dir.join("utility_categories.csv"), categories)?;

    let mut hist = String::from("strategy,protocol,bin_lo,bin_hi,count\n");
    for line in &report.histograms {
        let _ = writeln!(
            hist,
            "{},{},{},{},{}",
            line.strategy, line.protocol, line.bin_lo, line.bin_hi, line.count
        );
    }
    std::fs::write(dir.join("length_histogram.csv"), hist)?;
    Ok(())
}
