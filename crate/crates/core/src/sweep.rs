//! Parameter sweeps over the transmit SNR, optionally repeated for a family
//! of user pairs or distance sets, and their CSV serialization.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::analytic::{self, Relaying};
use crate::error::{Error, Result};
use crate::linklevel::SystemConfig;
use crate::mcsim;
use crate::scenario::{Layout, Scenario};

/// Column header of every sweep CSV.
pub const CSV_HEADER: &str =
    "gamma0_db,m,n,engine,mode,p_out_n,p_out_m,stderr_n,stderr_m,throughput";

/// Linear SNR from decibels.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Outer sweep dimension. Each member is swept across the whole γ₀ grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Family {
    /// Only the γ₀ grid.
    #[default]
    Gamma0,
    /// User pairs `(m, n)`.
    Pairs(Vec<(usize, usize)>),
    /// `[d_sdn, d_sdm, d_dnr]` triples, angles from the scenario.
    DistanceSets(Vec<[f64; 3]>),
}

impl Family {
    pub fn variable(&self) -> &'static str {
        match self {
            Family::Gamma0 => "gamma0_db",
            Family::Pairs(_) => "pair",
            Family::DistanceSets(_) => "distance-set",
        }
    }

    fn len(&self) -> usize {
        match self {
            Family::Gamma0 => 1,
            Family::Pairs(p) => p.len(),
            Family::DistanceSets(d) => d.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineSet {
    pub analytic: bool,
    pub mc: bool,
}

impl Default for EngineSet {
    fn default() -> Self {
        Self {
            analytic: true,
            mc: true,
        }
    }
}

impl EngineSet {
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let mut set = EngineSet {
            analytic: false,
            mc: false,
        };
        for name in names {
            match name.as_ref() {
                "analytic" => set.analytic = true,
                "mc" => set.mc = true,
                "both" => set = EngineSet::default(),
                other => return Err(Error::arg(format!("unknown engine `{other}`"))),
            }
        }
        if !(set.analytic || set.mc) {
            return Err(Error::arg("at least one engine is required"));
        }
        Ok(set)
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.analytic {
            v.push("analytic");
        }
        if self.mc {
            v.push("mc");
        }
        v
    }
}

/// Quantities drawn by the emitted plot script. The CSV always carries all
/// columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputSet {
    pub p_out_n: bool,
    pub p_out_m: bool,
    pub throughput: bool,
}

impl Default for OutputSet {
    fn default() -> Self {
        Self {
            p_out_n: true,
            p_out_m: true,
            throughput: true,
        }
    }
}

impl OutputSet {
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let mut set = OutputSet {
            p_out_n: false,
            p_out_m: false,
            throughput: false,
        };
        for name in names {
            match name.as_ref() {
                "p_out_n" => set.p_out_n = true,
                "p_out_m" => set.p_out_m = true,
                "throughput" => set.throughput = true,
                other => return Err(Error::arg(format!("unknown output `{other}`"))),
            }
        }
        if set
            == (OutputSet {
                p_out_n: false,
                p_out_m: false,
                throughput: false,
            })
        {
            return Err(Error::arg("at least one output is required"));
        }
        Ok(set)
    }

    pub fn names(&self) -> Vec<&'static str> {
        [
            (self.p_out_n, "p_out_n"),
            (self.p_out_m, "p_out_m"),
            (self.throughput, "throughput"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub family: Family,
    /// Transmit SNR grid in dB.
    pub gamma0_db: Vec<f64>,
    pub engines: EngineSet,
    pub outputs: OutputSet,
    /// Also emit the non-relaying comparison rows.
    pub baseline: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            family: Family::Gamma0,
            gamma0_db: (0..=8).map(|k| 5.0 * k as f64).collect(),
            engines: EngineSet::default(),
            outputs: OutputSet::default(),
            baseline: false,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self, system: &SystemConfig, layout: &Layout) -> Result<()> {
        if self.gamma0_db.is_empty() {
            return Err(Error::config("sweep.values", "SNR grid must not be empty"));
        }
        if let Some(bad) = self.gamma0_db.iter().find(|g| !g.is_finite()) {
            return Err(Error::config(
                "sweep.values",
                format!("non-finite SNR {bad}"),
            ));
        }
        if self.family.len() == 0 {
            return Err(Error::config("sweep.values", "family must not be empty"));
        }
        if !(self.engines.analytic || self.engines.mc) {
            return Err(Error::config(
                "sweep.engines",
                "at least one engine is required",
            ));
        }
        for (system, layout) in members(&self.family, system, layout) {
            system
                .validate()
                .map_err(|e| Error::config("sweep.values", e.to_string()))?;
            layout
                .geometry()
                .map_err(|e| Error::config("sweep.values", e.to_string()))?;
        }
        Ok(())
    }
}

fn members(family: &Family, system: &SystemConfig, layout: &Layout) -> Vec<(SystemConfig, Layout)> {
    match family {
        Family::Gamma0 => vec![(system.clone(), *layout)],
        Family::Pairs(pairs) => pairs
            .iter()
            .map(|&(m, n)| (system.clone().with_pair(m, n), *layout))
            .collect(),
        Family::DistanceSets(sets) => sets
            .iter()
            .map(|&d| (system.clone(), layout.with_distances(d)))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Analytic,
    MonteCarlo,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::MonteCarlo => "mc",
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gamma0_db: f64,
    pub m: usize,
    pub n: usize,
    pub engine: Engine,
    /// `closed-form`, `joint` or `independent`; baseline rows add `-norelay`.
    pub mode: String,
    pub p_out_n: f64,
    pub p_out_m: f64,
    pub stderr_n: Option<f64>,
    pub stderr_m: Option<f64>,
    pub throughput: f64,
}

fn mode_label(base: &str, relaying: Relaying) -> String {
    match relaying {
        Relaying::Enabled => base.to_string(),
        Relaying::Disabled => format!("{base}-norelay"),
    }
}

fn point_rows(
    s: &Scenario,
    system: &SystemConfig,
    layout: &Layout,
    db: f64,
) -> Result<Vec<SweepRow>> {
    let cfg = system.clone().with_gamma0(db_to_linear(db));
    let geo = layout.geometry()?;
    let mut relayings = vec![Relaying::Enabled];
    if s.sweep.baseline {
        relayings.push(Relaying::Disabled);
    }
    let mut rows = Vec::new();
    for relaying in relayings {
        if s.sweep.engines.analytic {
            let pt = analytic::evaluate(&cfg, &geo, relaying)?;
            rows.push(SweepRow {
                gamma0_db: db,
                m: cfg.weak,
                n: cfg.strong,
                engine: Engine::Analytic,
                mode: mode_label("closed-form", relaying),
                p_out_n: pt.p_out_n,
                p_out_m: pt.p_out_m,
                stderr_n: None,
                stderr_m: None,
                throughput: pt.throughput,
            });
        }
        if s.sweep.engines.mc {
            let r = mcsim::estimate_with(&cfg, &geo, &s.mc, relaying)?;
            rows.push(SweepRow {
                gamma0_db: db,
                m: cfg.weak,
                n: cfg.strong,
                engine: Engine::MonteCarlo,
                mode: mode_label(s.mc.mode.as_str(), relaying),
                p_out_n: r.strong.p_hat,
                p_out_m: r.weak.p_hat,
                stderr_n: Some(r.strong.stderr),
                stderr_m: Some(r.weak.stderr),
                throughput: r.throughput,
            });
        }
    }
    Ok(rows)
}

/// Runs every sweep point. Rows come out ordered by family member, then SNR,
/// then engine, whatever order the points finish in.
pub fn run_sweep(s: &Scenario) -> Result<Vec<SweepRow>> {
    s.validate()?;
    let points: Vec<(SystemConfig, Layout, f64)> = members(&s.sweep.family, &s.system, &s.layout)
        .into_iter()
        .flat_map(|(sys, lay)| {
            s.sweep
                .gamma0_db
                .iter()
                .map(move |&db| (sys.clone(), lay, db))
        })
        .collect();
    let per_point: Vec<Vec<SweepRow>> = points
        .par_iter()
        .map(|(sys, lay, db)| {
            point_rows(s, sys, lay, *db).map_err(|e| {
                e.context(format!(
                    "sweep point gamma0_db = {db}, m = {}, n = {}",
                    sys.weak, sys.strong
                ))
            })
        })
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

fn sig10(v: f64) -> String {
    format!("{v:.9e}")
}

/// Renders rows as CSV text with the fixed header and number formatting.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let opt = |v: Option<f64>| v.map(sig10).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.gamma0_db,
            r.m,
            r.n,
            r.engine.as_str(),
            r.mode,
            sig10(r.p_out_n),
            sig10(r.p_out_m),
            opt(r.stderr_n),
            opt(r.stderr_m),
            sig10(r.throughput),
        )
        .expect("writing to a String");
    }
    out
}
