use std::str::FromStr;

use super::aggregate::{Metric, SummaryTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// `method,metric,avg,std,max,delta_pct,wins`, one row per method and metric.
    Csv,
    /// Aligned columns; `*` marks the per-metric best mean and delta.
    Text,
    /// Pipe table; best values in bold.
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "text" | "txt" => Ok(ReportFormat::Text),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

fn precision(metric: Metric) -> usize {
    match metric {
        Metric::Aesthetic => 2,
        Metric::Clip | Metric::Fitness => 4,
    }
}

fn metric_title(metric: Metric) -> &'static str {
    match metric {
        Metric::Aesthetic => "Aesthetic",
        Metric::Clip => "CLIPScore",
        Metric::Fitness => "Fitness",
    }
}

/// Which rows hold the highest mean / delta for each metric (ties all marked),
/// and which rows hold the highest mean fitness.
struct Marks {
    avg: Vec<[bool; 3]>,
    delta: Vec<[bool; 3]>,
    method: Vec<bool>,
}

fn marks(table: &SummaryTable) -> Marks {
    let n = table.rows.len();
    let mut avg = vec![[false; 3]; n];
    let mut delta = vec![[false; 3]; n];
    for (k, metric) in Metric::ALL.into_iter().enumerate() {
        let best_avg = table
            .rows
            .iter()
            .map(|r| r.stats(metric).avg)
            .fold(f64::NEG_INFINITY, f64::max);
        let best_delta = table
            .rows
            .iter()
            .map(|r| r.stats(metric).delta_pct)
            .fold(f64::NEG_INFINITY, f64::max);
        for (i, r) in table.rows.iter().enumerate() {
            avg[i][k] = r.stats(metric).avg == best_avg;
            delta[i][k] = r.stats(metric).delta_pct == best_delta;
        }
    }
    let method = (0..n).map(|i| avg[i][2]).collect();
    Marks { avg, delta, method }
}

pub fn render(table: &SummaryTable, format: ReportFormat) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::Precondition("summary table has no methods".into()));
    }
    match format {
        ReportFormat::Csv => render_csv(table),
        ReportFormat::Text => Ok(render_grid(table, false)),
        ReportFormat::Markdown => Ok(render_grid(table, true)),
    }
}

fn render_csv(table: &SummaryTable) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["method", "metric", "avg", "std", "max", "delta_pct", "wins"])?;
    for row in &table.rows {
        for metric in Metric::ALL {
            let s = row.stats(metric);
            w.write_record([
                row.method.clone(),
                metric.as_str().to_owned(),
                format!("{:.6}", s.avg),
                format!("{:.6}", s.std),
                format!("{:.6}", s.max),
                format!("{:.6}", s.delta_pct),
                row.wins.to_string(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn render_grid(table: &SummaryTable, markdown: bool) -> String {
    let m = marks(table);
    let mark = |s: String, on: bool| match (on, markdown) {
        (false, _) => s,
        (true, true) => format!("**{s}**"),
        (true, false) => format!("{s}*"),
    };

    let mut header = vec!["Method".to_owned()];
    for metric in Metric::ALL {
        let t = metric_title(metric);
        header.extend([
            format!("{t} Avg"),
            format!("{t} Std"),
            format!("{t} Max"),
            format!("{t} Δ%"),
        ]);
    }
    header.push(format!("Wins [0-{}]", table.prompt_count));

    let mut body = Vec::with_capacity(table.rows.len());
    for (i, row) in table.rows.iter().enumerate() {
        let mut cells = vec![mark(row.method.clone(), m.method[i])];
        for (k, metric) in Metric::ALL.into_iter().enumerate() {
            let s = row.stats(metric);
            let p = precision(metric);
            cells.push(mark(format!("{:.p$}", s.avg), m.avg[i][k]));
            cells.push(format!("{:.p$}", s.std));
            cells.push(format!("{:.p$}", s.max));
            cells.push(mark(format!("{:.2}", s.delta_pct), m.delta[i][k]));
        }
        cells.push(row.wins.to_string());
        body.push(cells);
    }

    let cols = header.len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            std::iter::once(&header)
                .chain(&body)
                .map(|r| r[c].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let pad = |s: &str, c: usize| {
        let fill = " ".repeat(widths[c] - s.chars().count());
        if c == 0 {
            format!("{s}{fill}")
        } else {
            format!("{fill}{s}")
        }
    };

    let mut out = String::new();
    let sep = if markdown { " | " } else { "  " };
    let line = |cells: &[String]| {
        let joined = cells
            .iter()
            .enumerate()
            .map(|(c, s)| pad(s, c))
            .collect::<Vec<_>>()
            .join(sep);
        if markdown {
            format!("| {joined} |\n")
        } else {
            format!("{}\n", joined.trim_end())
        }
    };
    out.push_str(&line(&header));
    if markdown {
        let rule: Vec<String> = (0..cols)
            .map(|c| {
                let dashes = "-".repeat(widths[c].max(3) - 1);
                if c == 0 {
                    format!(":{dashes}")
                } else {
                    format!("{dashes}:")
                }
            })
            .collect();
        out.push_str(&format!("| {} |\n", rule.join(" | ")));
    } else {
        out.push_str(&format!(
            "{}\n",
            "-".repeat(widths.iter().sum::<usize>() + sep.len() * (cols - 1))
        ));
    }
    for cells in &body {
        out.push_str(&line(cells));
    }
    if !markdown {
        out.push_str(&format!(
            "\n* best mean and best Δ% per metric; method with the best mean fitness. Δ% vs {}.\n",
            table.baseline
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::aggregate::{aggregate, FinalScore};

    fn table() -> SummaryTable {
        let mk = |p: &str, m: &str, a: f64, c: f64, f: f64| FinalScore {
            prompt_id: p.into(),
            method: m.into(),
            aesthetic: a,
            clip: c,
            fitness: f,
        };
        aggregate(
            &[
                mk("p1", "baseline_no_opt", 5.0, 0.2, 0.5),
                mk("p1", "ga_mutated", 7.0, 0.3, 0.7),
                mk("p2", "baseline_no_opt", 6.0, 0.25, 0.55),
                mk("p2", "ga_mutated", 6.5, 0.35, 0.65),
            ],
            "baseline_no_opt",
        )
        .unwrap()
    }

    #[test]
    fn csv_layout() {
        let csv = render(&table(), ReportFormat::Csv).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "method,metric,avg,std,max,delta_pct,wins");
        assert_eq!(lines.len(), 1 + 2 * 3);
        assert!(lines[4].starts_with("ga_mutated,aesthetic,6.750000,"));
        assert!(lines[4].ends_with(",2"));
    }

    #[test]
    fn csv_is_stable() {
        let t = table();
        assert_eq!(
            render(&t, ReportFormat::Csv).unwrap(),
            render(&t, ReportFormat::Csv).unwrap()
        );
    }

    #[test]
    fn text_marks_best() {
        let text = render(&table(), ReportFormat::Text).unwrap();
        let ga_line = text.lines().find(|l| l.starts_with("ga_mutated")).unwrap();
        assert!(ga_line.starts_with("ga_mutated*"));
        assert!(ga_line.contains("6.75*"));
        let md = render(&table(), ReportFormat::Markdown).unwrap();
        assert!(md.contains("**ga_mutated**"));
        assert!(md.contains("**0.6750**"));
    }

    #[test]
    fn empty_table_rejected() {
        let t = SummaryTable {
            baseline: "b".into(),
            prompt_count: 0,
            rows: vec![],
        };
        assert!(render(&t, ReportFormat::Csv).is_err());
    }

    #[test]
    fn format_parse() {
        assert_eq!("md".parse::<ReportFormat>().unwrap(), ReportFormat::Markdown);
        assert!("pdf".parse::<ReportFormat>().is_err());
    }
}
