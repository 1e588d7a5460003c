//! Scenario files: TOML with `[system]`, `[geometry]`, `[mc]` and `[sweep]`
//! sections. Every key is optional; omitted keys take the reference
//! scenario values (six users, pair (3, 6), 0.7/0.3 split, unit rates and
//! fading means, θ = 2, distances 4/6/4 m, angles 40°/60°).

use std::path::Path;

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::linklevel::{Geometry, SystemConfig};
use crate::mcsim::{McConfig, SamplingMode};
use crate::sweep::{EngineSet, Family, OutputSet, SweepSpec};

/// Geometry as written in the file (angles in degrees).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layout {
    pub d_sdn: f64,
    pub d_sdm: f64,
    pub d_dnr: f64,
    pub alpha1_deg: f64,
    pub alpha2_deg: f64,
}

impl Default for Layout {
    fn default() -> Self {
        Self {
            d_sdn: 4.0,
            d_sdm: 6.0,
            d_dnr: 4.0,
            alpha1_deg: 40.0,
            alpha2_deg: 60.0,
        }
    }
}

impl Layout {
    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::from_degrees(
            self.d_sdn,
            self.d_sdm,
            self.d_dnr,
            self.alpha1_deg,
            self.alpha2_deg,
        )
    }

    pub fn with_distances(self, [d_sdn, d_sdm, d_dnr]: [f64; 3]) -> Self {
        Self {
            d_sdn,
            d_sdm,
            d_dnr,
            ..self
        }
    }
}

/// A fully validated scenario. `system.gamma0` is a placeholder; the sweep
/// sets it per point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scenario {
    pub system: SystemConfig,
    pub layout: Layout,
    pub mc: McConfig,
    pub sweep: SweepSpec,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.system.validate().map_err(|e| e.context("[system]"))?;
        self.layout
            .geometry()
            .map_err(|e| e.context("[geometry]"))?;
        self.mc.validate().map_err(|e| e.context("[mc]"))?;
        self.sweep.validate(&self.system, &self.layout)
    }
}

/// Loads and validates a scenario file.
pub fn load_config(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("reading {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Serializes a scenario so that [`parse_config`] returns it unchanged.
pub fn write_config(s: &Scenario) -> String {
    let mut system = Table::new();
    let c = &s.system;
    system.insert("M".into(), Value::Integer(c.users as i64));
    system.insert("m".into(), Value::Integer(c.weak as i64));
    system.insert("n".into(), Value::Integer(c.strong as i64));
    for (k, v) in [
        ("a_m", c.a_m),
        ("a_n", c.a_n),
        ("theta", c.theta),
        ("lambda_sd", c.lambda_sd),
        ("lambda_dnr", c.lambda_dnr),
        ("lambda_rdm", c.lambda_rdm),
        ("R_m", c.rate_m),
        ("R_n", c.rate_n),
    ] {
        system.insert(k.into(), Value::Float(v));
    }

    let mut geometry = Table::new();
    let l = &s.layout;
    for (k, v) in [
        ("d_sdn", l.d_sdn),
        ("d_sdm", l.d_sdm),
        ("d_dnr", l.d_dnr),
        ("alpha1_deg", l.alpha1_deg),
        ("alpha2_deg", l.alpha2_deg),
    ] {
        geometry.insert(k.into(), Value::Float(v));
    }

    let mut mc = Table::new();
    mc.insert("trials".into(), Value::Integer(s.mc.trials as i64));
    // seeds above i64::MAX are stored as their two's-complement image
    mc.insert("seed".into(), Value::Integer(s.mc.seed as i64));
    mc.insert("chunk_size".into(), Value::Integer(s.mc.chunk_size as i64));
    mc.insert("mode".into(), Value::String(s.mc.mode.as_str().into()));

    let floats = |xs: &[f64]| Value::Array(xs.iter().map(|&x| Value::Float(x)).collect());
    let mut sweep = Table::new();
    let sw = &s.sweep;
    sweep.insert(
        "variable".into(),
        Value::String(sw.family.variable().into()),
    );
    match &sw.family {
        Family::Gamma0 => {
            sweep.insert("values".into(), floats(&sw.gamma0_db));
        }
        Family::Pairs(pairs) => {
            let v = pairs
                .iter()
                .map(|&(m, n)| {
                    Value::Array(vec![Value::Integer(m as i64), Value::Integer(n as i64)])
                })
                .collect();
            sweep.insert("values".into(), Value::Array(v));
            sweep.insert("gamma0_db".into(), floats(&sw.gamma0_db));
        }
        Family::DistanceSets(sets) => {
            let v = sets.iter().map(|d| floats(d)).collect();
            sweep.insert("values".into(), Value::Array(v));
            sweep.insert("gamma0_db".into(), floats(&sw.gamma0_db));
        }
    }
    sweep.insert(
        "engines".into(),
        Value::Array(
            sw.engines
                .names()
                .into_iter()
                .map(|e| Value::String(e.into()))
                .collect(),
        ),
    );
    sweep.insert("baseline".into(), Value::Boolean(sw.baseline));
    sweep.insert(
        "outputs".into(),
        Value::Array(
            sw.outputs
                .names()
                .into_iter()
                .map(|e| Value::String(e.into()))
                .collect(),
        ),
    );

    let mut root = Table::new();
    root.insert("system".into(), Value::Table(system));
    root.insert("geometry".into(), Value::Table(geometry));
    root.insert("mc".into(), Value::Table(mc));
    root.insert("sweep".into(), Value::Table(sweep));
    toml::to_string(&root).expect("scenario tables serialize")
}

/// Parses scenario text. Errors name the offending key.
pub fn parse_config(text: &str) -> Result<Scenario> {
    let mut root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_string()))?;

    let mut s = Scenario::default();
    let mut system = Section::take(&mut root, "system")?;
    let mut geometry = Section::take(&mut root, "geometry")?;
    let mut mc = Section::take(&mut root, "mc")?;
    let mut sweep = Section::take(&mut root, "sweep")?;
    if let Some(key) = root.keys().next() {
        return Err(Error::config(key.clone(), "unknown section"));
    }

    let c = &mut s.system;
    system.index("M", &mut c.users)?;
    system.index("m", &mut c.weak)?;
    system.index("n", &mut c.strong)?;
    system.float("a_m", &mut c.a_m)?;
    system.float("a_n", &mut c.a_n)?;
    system.float("theta", &mut c.theta)?;
    system.float("lambda_sd", &mut c.lambda_sd)?;
    system.float("lambda_dnr", &mut c.lambda_dnr)?;
    system.float("lambda_rdm", &mut c.lambda_rdm)?;
    let (mut rate_m, mut rate_n) = (c.rate_m, c.rate_n);
    system.float("R_m", &mut rate_m)?;
    system.float("R_n", &mut rate_n)?;
    *c = c
        .clone()
        .with_rates(rate_m, rate_n)
        .map_err(|e| Error::config("system.R_m/R_n", e.to_string()))?;
    system.finish()?;
    s.system
        .validate()
        .map_err(|e| Error::config("system", e.to_string()))?;

    let l = &mut s.layout;
    geometry.float("d_sdn", &mut l.d_sdn)?;
    geometry.float("d_sdm", &mut l.d_sdm)?;
    geometry.float("d_dnr", &mut l.d_dnr)?;
    geometry.float("alpha1_deg", &mut l.alpha1_deg)?;
    geometry.float("alpha2_deg", &mut l.alpha2_deg)?;
    geometry.finish()?;
    s.layout
        .geometry()
        .map_err(|e| Error::config("geometry", e.to_string()))?;

    let m = &mut s.mc;
    mc.count("trials", &mut m.trials)?;
    if let Some(v) = mc.get("seed") {
        m.seed = match v {
            // negative values are the image of seeds above i64::MAX
            Value::Integer(i) => i as u64,
            _ => return Err(Error::config("mc.seed", "expected an integer")),
        };
    }
    mc.count("chunk_size", &mut m.chunk_size)?;
    if let Some(v) = mc.get("mode") {
        let text = v
            .as_str()
            .ok_or_else(|| Error::config("mc.mode", "expected a string"))?;
        m.mode = text
            .parse::<SamplingMode>()
            .map_err(|e| Error::config("mc.mode", e.to_string()))?;
    }
    mc.finish()?;
    s.mc.validate()
        .map_err(|e| Error::config("mc", e.to_string()))?;

    s.sweep = parse_sweep(&mut sweep)?;
    sweep.finish()?;
    s.sweep.validate(&s.system, &s.layout)?;
    Ok(s)
}

fn parse_sweep(sec: &mut Section) -> Result<SweepSpec> {
    let mut spec = SweepSpec::default();
    let variable = match sec.get("variable") {
        None => "gamma0_db".to_string(),
        Some(Value::String(s)) => s,
        Some(_) => return Err(Error::config("sweep.variable", "expected a string")),
    };
    let values = sec.get("values");
    let grid = sec.get("gamma0_db");
    spec.family = match variable.as_str() {
        "gamma0_db" => {
            if grid.is_some() {
                return Err(Error::config(
                    "sweep.gamma0_db",
                    "not used when variable = \"gamma0_db\"; put the grid in `values`",
                ));
            }
            if let Some(v) = values {
                spec.gamma0_db = parse_grid("sweep.values", v)?;
            }
            Family::Gamma0
        }
        "pair" => {
            let v =
                values.ok_or_else(|| Error::config("sweep.values", "required for pair sweeps"))?;
            Family::Pairs(parse_pairs(v)?)
        }
        "distance-set" => {
            let v = values
                .ok_or_else(|| Error::config("sweep.values", "required for distance-set sweeps"))?;
            Family::DistanceSets(parse_distance_sets(v)?)
        }
        other => {
            return Err(Error::config(
                "sweep.variable",
                format!("unknown variable `{other}` (expected gamma0_db, pair or distance-set)"),
            ))
        }
    };
    if !matches!(spec.family, Family::Gamma0) {
        if let Some(g) = grid {
            spec.gamma0_db = parse_grid("sweep.gamma0_db", g)?;
        }
    }
    if let Some(v) = sec.get("engines") {
        spec.engines = EngineSet::from_names(&string_list("sweep.engines", v)?)
            .map_err(|e| Error::config("sweep.engines", e.to_string()))?;
    }
    if let Some(v) = sec.get("outputs") {
        spec.outputs = OutputSet::from_names(&string_list("sweep.outputs", v)?)
            .map_err(|e| Error::config("sweep.outputs", e.to_string()))?;
    }
    if let Some(v) = sec.get("baseline") {
        spec.baseline = v
            .as_bool()
            .ok_or_else(|| Error::config("sweep.baseline", "expected true or false"))?;
    }
    Ok(spec)
}

/// Parses `START:STOP:STEP` (inclusive of STOP) into an ascending grid.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::arg(format!("`{text}` is not START:STOP:STEP")))?;
    let [start, stop, step] = nums[..] else {
        return Err(Error::arg(format!("`{text}` is not START:STOP:STEP")));
    };
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(Error::arg(format!("range `{text}` must be finite")));
    }
    if start == stop {
        return Ok(vec![start]);
    }
    if step.is_nan() || step <= 0.0 || stop < start {
        return Err(Error::arg(format!(
            "range `{text}` needs START <= STOP and STEP > 0"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(Error::arg(format!("range `{text}` has too many points")));
    }
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

fn parse_grid(key: &str, v: Value) -> Result<Vec<f64>> {
    let grid = match v {
        Value::String(s) => parse_range(&s).map_err(|e| Error::config(key, e.to_string()))?,
        Value::Array(items) => items
            .into_iter()
            .map(|x| as_float(&x).ok_or_else(|| Error::config(key, "expected numbers")))
            .collect::<Result<_>>()?,
        _ => {
            return Err(Error::config(
                key,
                "expected an array or a START:STOP:STEP string",
            ))
        }
    };
    if grid.is_empty() {
        return Err(Error::config(key, "grid must not be empty"));
    }
    if grid.iter().any(|g| !g.is_finite()) {
        return Err(Error::config(key, "grid values must be finite"));
    }
    Ok(grid)
}

fn parse_pairs(v: Value) -> Result<Vec<(usize, usize)>> {
    let key = "sweep.values";
    let Value::Array(items) = v else {
        return Err(Error::config(key, "expected an array of [m, n] pairs"));
    };
    items
        .into_iter()
        .map(|item| match item.as_array().map(|a| a.as_slice()) {
            Some([Value::Integer(m), Value::Integer(n)]) if *m > 0 && *n > 0 => {
                Ok((*m as usize, *n as usize))
            }
            _ => Err(Error::config(
                key,
                format!("`{item}` is not an [m, n] pair"),
            )),
        })
        .collect()
}

fn parse_distance_sets(v: Value) -> Result<Vec<[f64; 3]>> {
    let key = "sweep.values";
    let Value::Array(items) = v else {
        return Err(Error::config(
            key,
            "expected an array of [d_sdn, d_sdm, d_dnr] triples",
        ));
    };
    items
        .into_iter()
        .map(|item| {
            let nums: Option<Vec<f64>> = item
                .as_array()
                .and_then(|a| a.iter().map(as_float).collect::<Option<Vec<_>>>());
            match nums.as_deref() {
                Some(&[a, b, c]) => Ok([a, b, c]),
                _ => Err(Error::config(
                    key,
                    format!("`{item}` is not a [d_sdn, d_sdm, d_dnr] triple"),
                )),
            }
        })
        .collect()
}

fn string_list(key: &str, v: Value) -> Result<Vec<String>> {
    match v {
        Value::String(s) => Ok(vec![s]),
        Value::Array(items) => items
            .into_iter()
            .map(|x| match x {
                Value::String(s) => Ok(s),
                _ => Err(Error::config(key, "expected strings")),
            })
            .collect(),
        _ => Err(Error::config(
            key,
            "expected a string or an array of strings",
        )),
    }
}

fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

/// One section's remaining keys; taken keys are removed so that leftovers
/// can be reported as unknown.
struct Section {
    name: &'static str,
    table: Table,
}

impl Section {
    fn take(root: &mut Table, name: &'static str) -> Result<Self> {
        let table = match root.remove(name) {
            None => Table::new(),
            Some(Value::Table(t)) => t,
            Some(_) => return Err(Error::config(name, "expected a [section]")),
        };
        Ok(Self { name, table })
    }

    fn get(&mut self, key: &str) -> Option<Value> {
        self.table.remove(key)
    }

    fn key(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn float(&mut self, key: &str, slot: &mut f64) -> Result<()> {
        if let Some(v) = self.get(key) {
            *slot =
                as_float(&v).ok_or_else(|| Error::config(self.key(key), "expected a number"))?;
        }
        Ok(())
    }

    fn count(&mut self, key: &str, slot: &mut u64) -> Result<()> {
        if let Some(v) = self.get(key) {
            *slot = match v {
                Value::Integer(i) if i > 0 => i as u64,
                _ => return Err(Error::config(self.key(key), "expected a positive integer")),
            };
        }
        Ok(())
    }

    fn index(&mut self, key: &str, slot: &mut usize) -> Result<()> {
        let mut wide = *slot as u64;
        self.count(key, &mut wide)?;
        *slot = wide as usize;
        Ok(())
    }

    fn finish(self) -> Result<()> {
        match self.table.keys().next() {
            Some(k) => Err(Error::config(format!("{}.{k}", self.name), "unknown key")),
            None => Ok(()),
        }
    }
}
