//! Monte-Carlo comparison of screening methods on simulated data.
//!
//! Every replication draws its own dataset from a stream derived from the base
//! seed, so outcomes do not depend on scheduling or on how many replications
//! run alongside. All methods of one replication see the same dataset.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{generate_replication, Design, SimSetting};
use crate::error::{Error, Result};
use crate::screening::{
    fr_screen, lambda_presets, select_top_k, sis_scores, standardize, RidgeEngine, StandardizedData,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MethodKind {
    /// RPC at an explicit penalty.
    Rpc,
    Rpc1,
    Rpc2,
    Rpc3,
    /// Union of the three preset RPC submodels.
    Urpc,
    Holp,
    Sis,
    Fr,
}

impl MethodKind {
    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Rpc => "RPC",
            MethodKind::Rpc1 => "RPC1",
            MethodKind::Rpc2 => "RPC2",
            MethodKind::Rpc3 => "RPC3",
            MethodKind::Urpc => "URPC",
            MethodKind::Holp => "HOLP",
            MethodKind::Sis => "SIS",
            MethodKind::Fr => "FR",
        }
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "RPC" => MethodKind::Rpc,
            "RPC1" => MethodKind::Rpc1,
            "RPC2" => MethodKind::Rpc2,
            "RPC3" => MethodKind::Rpc3,
            "URPC" => MethodKind::Urpc,
            "HOLP" => MethodKind::Holp,
            "SIS" => MethodKind::Sis,
            "FR" => MethodKind::Fr,
            other => return Err(Error::invalid(format!("unknown method {other:?}"))),
        })
    }
}

/// A method with an optional penalty override.
///
/// In JSON either a bare name (`"RPC1"`) or `{"method": "HOLP", "lambda": 0.5}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MethodSpecRepr", into = "MethodSpecRepr")]
pub struct MethodSpec {
    kind: MethodKind,
    lambda: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MethodSpecRepr {
    Name(MethodKind),
    Full {
        method: MethodKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
}

impl TryFrom<MethodSpecRepr> for MethodSpec {
    type Error = Error;

    fn try_from(r: MethodSpecRepr) -> Result<Self> {
        match r {
            MethodSpecRepr::Name(kind) => MethodSpec::new(kind, None),
            MethodSpecRepr::Full { method, lambda } => MethodSpec::new(method, lambda),
        }
    }
}

impl From<MethodSpec> for MethodSpecRepr {
    fn from(m: MethodSpec) -> Self {
        match m.lambda {
            None => MethodSpecRepr::Name(m.kind),
            lambda => MethodSpecRepr::Full { method: m.kind, lambda },
        }
    }
}

impl MethodSpec {
    /// SIS, FR and URPC take no penalty; plain RPC needs one.
    pub fn new(kind: MethodKind, lambda: Option<f64>) -> Result<Self> {
        match (kind, lambda) {
            (MethodKind::Sis | MethodKind::Fr | MethodKind::Urpc, Some(_)) => {
                Err(Error::invalid(format!("{} does not take a lambda", kind.name())))
            }
            (MethodKind::Rpc, None) => Err(Error::invalid("RPC needs an explicit lambda")),
            (_, Some(l)) if !(l.is_finite() && l > 0.0) => {
                Err(Error::invalid(format!("lambda must be positive and finite, got {l}")))
            }
            _ => Ok(MethodSpec { kind, lambda }),
        }
    }

    pub fn preset(kind: MethodKind) -> Self {
        Self::new(kind, None).expect("method without a penalty")
    }

    pub fn kind(&self) -> MethodKind {
        self.kind
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    /// Row label in tables and summaries.
    pub fn label(&self) -> String {
        match self.lambda {
            None => self.kind.name().to_string(),
            Some(l) => format!("{}[lambda={l}]", self.kind.name()),
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A simulation study: one setting, optionally swept over several designs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkPlan {
    /// Base setting; its seed is the base seed of every replication stream.
    pub setting: SimSetting,
    pub replications: u64,
    pub methods: Vec<MethodSpec>,
    /// Submodel size; defaults to `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Designs to run in turn, replacing `setting.design`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub designs: Option<Vec<Design>>,
}

impl BenchmarkPlan {
    /// Parses and validates a plan; schema errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let plan: BenchmarkPlan = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "plan".to_string() } else { path };
            Error::config(field, e.into_inner().to_string())
        })?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn k(&self) -> usize {
        self.k.unwrap_or(self.setting.n)
    }

    pub fn designs(&self) -> Vec<Design> {
        self.designs.clone().unwrap_or_else(|| vec![self.setting.design])
    }

    /// The base setting with `design` swapped in.
    pub fn setting_for(&self, design: Design) -> SimSetting {
        SimSetting {
            design,
            ..self.setting.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::config("replications", "need at least one replication"));
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods", "need at least one method"));
        }
        let mut seen = Vec::new();
        for m in &self.methods {
            let label = m.label();
            if seen.contains(&label) {
                return Err(Error::config("methods", format!("{label} is listed twice")));
            }
            seen.push(label);
        }
        let k = self.k();
        if k == 0 || k > self.setting.p {
            return Err(Error::config(
                "k",
                format!("k must lie in 1..={}, got {k}", self.setting.p),
            ));
        }
        let designs = self.designs();
        if designs.is_empty() {
            return Err(Error::config("designs", "list is empty"));
        }
        for (i, &d) in designs.iter().enumerate() {
            if designs[..i].contains(&d) {
                return Err(Error::config("designs", format!("{} is listed twice", d.label())));
            }
            self.setting_for(d).validate()?;
        }
        Ok(())
    }
}

/// What one method selected in one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: String,
    pub selected: Vec<usize>,
    /// `|γ̂ ∩ t|`.
    pub hits: usize,
    /// `t ⊆ γ̂`.
    pub covers: bool,
    /// Wall time as if the method had run alone, excluding data generation.
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub rep: u64,
    pub true_model_size: usize,
    pub methods: Vec<MethodOutcome>,
}

/// Penalty HOLP uses without an override: the smallest preset, `n/p`.
pub fn default_holp_lambda(n: usize, p: usize) -> Result<f64> {
    Ok(lambda_presets(n, p)?.rpc3)
}

/// Per-penalty ridge results of one replication.
struct RidgeCache<'a> {
    data: &'a StandardizedData,
    engine: Option<RidgeEngine<'a>>,
    gram_ms: f64,
    k: usize,
    /// λ bits → (RPC selection, HOLP selection, solve time).
    fits: HashMap<u64, (Vec<usize>, Vec<usize>, f64)>,
}

impl<'a> RidgeCache<'a> {
    fn fit(&mut self, lambda: f64) -> Result<&(Vec<usize>, Vec<usize>, f64)> {
        if self.engine.is_none() {
            let t = Instant::now();
            self.engine = Some(RidgeEngine::new(self.data));
            self.gram_ms = elapsed_ms(t);
        }
        let key = lambda.to_bits();
        if !self.fits.contains_key(&key) {
            let t = Instant::now();
            let c = self.engine.as_ref().expect("engine built above").components(lambda)?;
            let rpc = select_top_k(&c.scores, self.k)?;
            let holp = select_top_k(&c.ridge_beta, self.k)?;
            self.fits.insert(key, (rpc, holp, elapsed_ms(t)));
        }
        Ok(&self.fits[&key])
    }
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Generates replication `rep`, standardizes it once and screens it with
/// every method. FR stops after `min(k, n - 2)` steps.
pub fn run_replication(setting: &SimSetting, rep: u64, methods: &[MethodSpec], k: usize) -> Result<ReplicationOutcome> {
    let wrap = |method: &str, e: Error| Error::Replication {
        rep,
        method: method.to_string(),
        source: Box::new(e),
    };
    let ds = generate_replication(setting, rep).map_err(|e| wrap("generate", e))?;
    let data = standardize(&ds.x_raw, &ds.y_raw).map_err(|e| wrap("standardize", e))?;
    drop(ds.x_raw);
    let (n, p) = (data.n(), data.p());
    let presets = lambda_presets(n, p)?;
    let truth = &ds.true_model;

    let mut cache = RidgeCache {
        data: &data,
        engine: None,
        gram_ms: 0.0,
        k,
        fits: HashMap::new(),
    };
    let mut out = Vec::with_capacity(methods.len());
    for m in methods {
        let label = m.label();
        let run = |cache: &mut RidgeCache<'_>| -> Result<(Vec<usize>, f64)> {
            let preset = |kind| match kind {
                MethodKind::Rpc1 => presets.rpc1,
                MethodKind::Rpc2 => presets.rpc2,
                _ => presets.rpc3,
            };
            match m.kind() {
                MethodKind::Rpc | MethodKind::Rpc1 | MethodKind::Rpc2 | MethodKind::Rpc3 => {
                    let lambda = m.lambda().unwrap_or_else(|| preset(m.kind()));
                    let (sel, _, ms) = cache.fit(lambda)?.clone();
                    Ok((sel, ms + cache.gram_ms))
                }
                MethodKind::Holp => {
                    let lambda = match m.lambda() {
                        Some(l) => l,
                        None => default_holp_lambda(n, p)?,
                    };
                    let (_, sel, ms) = cache.fit(lambda)?.clone();
                    Ok((sel, ms + cache.gram_ms))
                }
                MethodKind::Urpc => {
                    let mut sel: Vec<usize> = Vec::new();
                    let mut ms = cache.gram_ms;
                    for lambda in presets.all() {
                        let (s, _, t) = cache.fit(lambda)?;
                        ms += t;
                        for &j in s {
                            if !sel.contains(&j) {
                                sel.push(j);
                            }
                        }
                    }
                    Ok((sel, ms))
                }
                MethodKind::Sis => {
                    let t = Instant::now();
                    let sel = select_top_k(&sis_scores(&data)?, k)?;
                    Ok((sel, elapsed_ms(t)))
                }
                MethodKind::Fr => {
                    let t = Instant::now();
                    let steps = k.min(n.saturating_sub(2)).min(p);
                    let mut sel = fr_screen(&data, steps)?.selected;
                    if sel.len() < k {
                        // past n - 2 steps the path is saturated; fill by marginal correlation
                        let rest = select_top_k(&sis_scores(&data)?, p)?;
                        let fill: Vec<usize> = rest.into_iter().filter(|j| !sel.contains(j)).take(k - steps).collect();
                        sel.extend(fill);
                    }
                    Ok((sel, elapsed_ms(t)))
                }
            }
        };
        let (selected, runtime_ms) = run(&mut cache).map_err(|e| wrap(&label, e))?;
        let hits = truth.iter().filter(|j| selected.contains(j)).count();
        out.push(MethodOutcome {
            method: label,
            covers: hits == truth.len(),
            hits,
            selected,
            runtime_ms,
        });
    }
    Ok(ReplicationOutcome {
        rep,
        true_model_size: truth.len(),
        methods: out,
    })
}

/// Runs replications `0..replications` in parallel; results come back in
/// replication order. The first failure aborts the run.
pub fn run_replications(
    setting: &SimSetting,
    replications: u64,
    methods: &[MethodSpec],
    k: usize,
) -> Result<Vec<ReplicationOutcome>> {
    (0..replications)
        .into_par_iter()
        .map(|rep| run_replication(setting, rep, methods, k))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodMetrics {
    pub method: String,
    /// Fraction of replications whose submodel contains the true model.
    pub cp: f64,
    /// Mean fraction of the true model retained.
    pub tpr: f64,
    pub mean_runtime_ms: f64,
    pub replications: u64,
}

/// CP/TPR for one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub setting: SimSetting,
    pub k: usize,
    pub methods: Vec<MethodMetrics>,
}

/// Per-method CP, TPR and mean runtime, in the method order of the first replication.
pub fn aggregate(outcomes: &[ReplicationOutcome]) -> Result<Vec<MethodMetrics>> {
    let first = outcomes
        .first()
        .ok_or_else(|| Error::invalid("cannot aggregate zero replications"))?;
    let reps = outcomes.len() as f64;
    first
        .methods
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let (mut covered, mut frac, mut ms) = (0u64, 0.0, 0.0);
            for o in outcomes {
                let r = o
                    .methods
                    .get(i)
                    .filter(|r| r.method == m.method)
                    .ok_or_else(|| Error::invalid(format!("replication {} lacks method {}", o.rep, m.method)))?;
                covered += u64::from(r.covers);
                frac += r.hits as f64 / o.true_model_size as f64;
                ms += r.runtime_ms;
            }
            Ok(MethodMetrics {
                method: m.method.clone(),
                cp: covered as f64 / reps,
                tpr: frac / reps,
                mean_runtime_ms: ms / reps,
                replications: outcomes.len() as u64,
            })
        })
        .collect()
}

/// Runs every design of the plan in order.
pub fn run_plan(plan: &BenchmarkPlan) -> Result<Vec<MetricsSummary>> {
    plan.validate()?;
    plan.designs()
        .into_iter()
        .map(|d| {
            let setting = plan.setting_for(d);
            let outcomes = run_replications(&setting, plan.replications, &plan.methods, plan.k())?;
            Ok(MetricsSummary {
                methods: aggregate(&outcomes)?,
                setting,
                k: plan.k(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Text,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "text" | "txt" => Ok(TableFormat::Text),
            other => Err(Error::invalid(format!("unknown table format {other:?}"))),
        }
    }
}

/// Methods as rows, a TPR and a CP column per design, percentages to one decimal.
pub fn emit_table(summaries: &[MetricsSummary], format: TableFormat) -> Result<String> {
    if summaries.is_empty() {
        return Err(Error::invalid("no summaries to tabulate"));
    }
    let mut designs: Vec<String> = Vec::new();
    for s in summaries {
        let base = s.setting.design.label();
        let mut name = base.to_string();
        let mut dup = 2;
        while designs.contains(&name) {
            name = format!("{base}#{dup}");
            dup += 1;
        }
        designs.push(name);
    }
    let mut rows: Vec<String> = Vec::new();
    for s in summaries {
        for m in &s.methods {
            if !rows.contains(&m.method) {
                rows.push(m.method.clone());
            }
        }
    }
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|method| {
            summaries
                .iter()
                .flat_map(|s| match s.methods.iter().find(|m| &m.method == method) {
                    Some(m) => [pct(m.tpr), pct(m.cp)],
                    None => [String::new(), String::new()],
                })
                .collect()
        })
        .collect();

    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["method".to_string()];
            for d in &designs {
                header.push(format!("{d}_TPR"));
                header.push(format!("{d}_CP"));
            }
            w.write_record(&header).map_err(csv_err)?;
            for (method, row) in rows.iter().zip(&cells) {
                w.write_record(std::iter::once(method).chain(row)).map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
        }
        TableFormat::Text => {
            let label_w = rows.iter().map(String::len).max().unwrap_or(0).max("Method".len());
            let cell_w = 6;
            let group_w = designs.iter().map(String::len).max().unwrap_or(0).max(2 * cell_w + 1);
            let mut out = format!("{:<label_w$}", "Method");
            for d in &designs {
                out.push_str(&format!("  {d:<group_w$}"));
            }
            out.push('\n');
            out.push_str(&" ".repeat(label_w));
            for _ in &designs {
                out.push_str(&format!(
                    "  {:>cell_w$} {:>cell_w$}{}",
                    "TPR",
                    "CP",
                    " ".repeat(group_w - 2 * cell_w - 1)
                ));
            }
            out.push('\n');
            for (method, row) in rows.iter().zip(&cells) {
                out.push_str(&format!("{method:<label_w$}"));
                for pair in row.chunks(2) {
                    out.push_str(&format!(
                        "  {:>cell_w$} {:>cell_w$}{}",
                        pair[0],
                        pair[1],
                        " ".repeat(group_w - 2 * cell_w - 1)
                    ));
                }
                out.push('\n');
            }
            Ok(out.lines().map(str::trim_end).collect::<Vec<_>>().join("\n") + "\n")
        }
    }
}

fn pct(v: f64) -> String {
    format!("{:.1}", 100.0 * v)
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid(format!("csv output: {e}"))
}
