//! Emits a standalone matplotlib script that redraws a sweep CSV: outage
//! probabilities on a log axis, throughput on a linear one. Closed-form
//! rows are drawn as lines and Monte-Carlo rows as markers.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sweep::{OutputSet, CSV_HEADER};

/// A CSV row kept as text so the script reproduces the numbers verbatim.
#[derive(Debug, Clone)]
struct Row {
    gamma0_db: f64,
    gamma0_text: String,
    pair: (usize, usize),
    engine: String,
    mode: String,
    p_out_n: String,
    p_out_m: String,
    throughput: String,
}

fn parse_rows(csv: &str) -> Result<Vec<Row>> {
    let mut lines = csv.lines().enumerate();
    match lines.next() {
        None => {
            return Err(Error::Csv {
                line: 1,
                reason: "empty file".into(),
            })
        }
        Some((_, h)) if h.trim_end() == CSV_HEADER => {}
        Some((_, h)) => {
            return Err(Error::Csv {
                line: 1,
                reason: format!("unexpected header `{h}`"),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| Error::Csv {
            line: line_no,
            reason,
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(bad(format!("expected 10 fields, found {}", f.len())));
        }
        let num = |i: usize, name: &str| -> Result<f64> {
            f[i].parse::<f64>()
                .map_err(|_| bad(format!("{name} `{}` is not a number", f[i])))
        };
        let idx_field = |i: usize, name: &str| -> Result<usize> {
            f[i].parse::<usize>()
                .map_err(|_| bad(format!("{name} `{}` is not an index", f[i])))
        };
        let gamma0_db = num(0, "gamma0_db")?;
        for (i, name) in [(5, "p_out_n"), (6, "p_out_m"), (9, "throughput")] {
            num(i, name)?;
        }
        if !matches!(f[3], "analytic" | "mc") {
            return Err(bad(format!("unknown engine `{}`", f[3])));
        }
        rows.push(Row {
            gamma0_db,
            gamma0_text: f[0].to_string(),
            pair: (idx_field(1, "m")?, idx_field(2, "n")?),
            engine: f[3].to_string(),
            mode: f[4].to_string(),
            p_out_n: f[5].to_string(),
            p_out_m: f[6].to_string(),
            throughput: f[9].to_string(),
        });
    }
    if rows.is_empty() {
        return Err(Error::Csv {
            line: 2,
            reason: "no data rows".into(),
        });
    }
    Ok(rows)
}

struct Series {
    block: usize,
    pair: (usize, usize),
    engine: String,
    mode: String,
    rows: Vec<Row>,
}

/// Cuts the row stream into curves. A new family block starts when the
/// pair changes, the SNR steps backwards, or a curve would get a second
/// point at the same SNR.
fn group(rows: Vec<Row>) -> Vec<Series> {
    let mut series: Vec<Series> = Vec::new();
    let mut block = 0;
    let mut block_start = 0;
    let mut prev: Option<(f64, (usize, usize))> = None;
    for row in rows {
        if let Some((db, pair)) = prev {
            let repeat = series[block_start..].iter().any(|s| {
                s.engine == row.engine
                    && s.mode == row.mode
                    && s.rows.last().is_some_and(|r| r.gamma0_db == row.gamma0_db)
            });
            if pair != row.pair || row.gamma0_db < db || repeat {
                block += 1;
                block_start = series.len();
            }
        }
        prev = Some((row.gamma0_db, row.pair));
        let pos = series[block_start..]
            .iter()
            .position(|s| s.engine == row.engine && s.mode == row.mode);
        match pos {
            Some(p) => series[block_start + p].rows.push(row),
            None => series.push(Series {
                block,
                pair: row.pair,
                engine: row.engine.clone(),
                mode: row.mode.clone(),
                rows: vec![row],
            }),
        }
    }
    series
}

fn py_list<'a>(items: impl Iterator<Item = &'a str>) -> String {
    let v: Vec<&str> = items.collect();
    format!("[{}]", v.join(", "))
}

/// Builds the plot script for the given CSV text.
pub fn plot_script(csv: &str, outputs: OutputSet) -> Result<String> {
    let series = group(parse_rows(csv)?);
    let blocks = series.last().map_or(0, |s| s.block + 1);
    let single_point = series.iter().all(|s| s.rows.len() == 1);
    let mut pairs: Vec<(usize, usize)> = series.iter().map(|s| s.pair).collect();
    pairs.dedup();
    let pairs_label_blocks = pairs.len() == blocks;

    let mut out = String::new();
    out.push_str(
        "#!/usr/bin/env python3\n\
         # Generated by coopnoma. Usage: python3 <script> [output.png]\n\
         import sys\n\
         import matplotlib\n\
         matplotlib.use(\"Agg\")\n\
         import matplotlib.pyplot as plt\n\n",
    );
    out.push_str("SERIES = [\n");
    for s in &series {
        let label = if blocks == 1 || pairs_label_blocks {
            format!("(m,n)=({},{})", s.pair.0, s.pair.1)
        } else {
            format!("set {} (m,n)=({},{})", s.block + 1, s.pair.0, s.pair.1)
        };
        writeln!(
            out,
            "    dict(block={}, label=\"{}\", engine=\"{}\", mode=\"{}\",\n         \
             gamma0_db={},\n         p_out_n={},\n         p_out_m={},\n         throughput={}),",
            s.block,
            label,
            s.engine,
            s.mode,
            py_list(s.rows.iter().map(|r| r.gamma0_text.as_str())),
            py_list(s.rows.iter().map(|r| r.p_out_n.as_str())),
            py_list(s.rows.iter().map(|r| r.p_out_m.as_str())),
            py_list(s.rows.iter().map(|r| r.throughput.as_str())),
        )
        .expect("writing to a String");
    }
    out.push_str("]\n\n");

    let mut op_keys = Vec::new();
    if outputs.p_out_n {
        op_keys.push("\"p_out_n\"");
    }
    if outputs.p_out_m {
        op_keys.push("\"p_out_m\"");
    }
    writeln!(out, "OP_KEYS = [{}]", op_keys.join(", ")).unwrap();
    writeln!(
        out,
        "SHOW_THROUGHPUT = {}",
        if outputs.throughput { "True" } else { "False" }
    )
    .unwrap();
    writeln!(
        out,
        "BY_FAMILY = {}\n",
        if single_point && blocks > 1 {
            "True"
        } else {
            "False"
        }
    )
    .unwrap();
    out.push_str(PLOT_BODY);
    Ok(out)
}

const PLOT_BODY: &str = r#"USER = {"p_out_n": "D_n", "p_out_m": "D_m"}


def style(s):
    if s["engine"] == "analytic":
        return dict(linestyle="--" if s["mode"].endswith("norelay") else "-", marker=None)
    return dict(linestyle="none", marker="s" if s["mode"].endswith("norelay") else "o",
                markerfacecolor="none")


def xs(s):
    return [s["block"]] if BY_FAMILY else s["gamma0_db"]


panels = (1 if OP_KEYS else 0) + (1 if SHOW_THROUGHPUT else 0)
fig, axes = plt.subplots(1, panels, figsize=(6.4 * panels, 4.8), squeeze=False)
axes = list(axes[0])
colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]

if OP_KEYS:
    ax = axes.pop(0)
    for i, s in enumerate(SERIES):
        for j, key in enumerate(OP_KEYS):
            tag = s["engine"] + ("" if s["engine"] == "analytic" else " " + s["mode"])
            ax.plot(xs(s), s[key], color=colors[(2 * s["block"] + j) % len(colors)],
                    label="%s %s %s" % (s["label"], USER[key], tag), **style(s))
    ax.set_yscale("log", nonpositive="mask")
    ax.set_ylabel("Outage probability")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize="small")

if SHOW_THROUGHPUT:
    ax = axes.pop(0)
    for s in SERIES:
        tag = s["engine"] + ("" if s["engine"] == "analytic" else " " + s["mode"])
        ax.plot(xs(s), s["throughput"], color=colors[s["block"] % len(colors)],
                label="%s %s" % (s["label"], tag), **style(s))
    ax.set_ylabel("Throughput (bit/s/Hz)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize="small")

for ax in fig.axes:
    if BY_FAMILY:
        ticks = sorted({s["block"]: s["label"] for s in SERIES}.items())
        ax.set_xticks([t for t, _ in ticks])
        ax.set_xticklabels([l for _, l in ticks])
    else:
        ax.set_xlabel("gamma0 (dB)")

fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else "coopnoma.png", dpi=150)
"#;

/// Reads a sweep CSV from disk and returns the plot script for it.
pub fn emit_plot_script(csv_path: impl AsRef<Path>) -> Result<String> {
    let path = csv_path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("reading {}: {e}", path.display())))?;
    plot_script(&text, OutputSet::default())
}
