//! Command-line front end: strict TOML configuration, subcommand dispatch and
//! CSV/JSON emission.
//!
//! Every subcommand reads one config file. Sections that a command does not
//! use may be present or absent; unknown keys anywhere are rejected. Numbers
//! are written in the shortest decimal form that parses back to the same
//! `f64`, so output files are bit-faithful and byte-stable across runs.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::analytic::{dressed_spectrum, SpectrumResult};
use crate::coherence::CoherenceConfig;
use crate::error::{Error, FluxError, Result};
use crate::flux::{
    e_jsigma_for_qubit_frequency, fit_area_ratio, sweep_energies, AnchorTarget, FluxConfig,
    FluxMode,
};
use crate::numeric::{numeric_spectrum, Truncation};
use crate::params::{derive_energies, validate, CircuitParams, ModeEnergies};
use crate::readout::{
    analyze, error_vs_integration, phase_separation, simulate_shots, ReadoutParams, ShotSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Complete run configuration as read from TOML.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<CircuitParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<FluxSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence: Option<CoherenceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numeric: Option<NumericSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout: Option<ReadoutParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout_sim: Option<ReadoutSimSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout_fit: Option<ReadoutFitSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSection {
    pub mode: FluxMode,
    /// Required unless `calibrate` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_ratio_a: Option<f64>,
    /// Zero-flux junction energies (Hz); derived from the circuit when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_j1_zero: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_j2_zero: Option<f64>,
    pub n_list: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibrate: Option<Calibration>,
}

/// Fit the area ratio at run time so bias `anchor_n` reproduces one observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub anchor_n: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit_frequency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asymmetry: Option<f64>,
    /// Sets E_JΣ from the symmetric dressed qubit frequency at zero flux.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_flux_frequency: Option<f64>,
    /// Zero-flux asymmetry; defaults to the circuit's `d_j`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_flux_asymmetry: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericSection {
    pub n_q: usize,
    pub n_r: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutSimSection {
    pub shots: usize,
    pub seed: u64,
    /// Integration times (s) for an additional error-vs-integration table.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tau_list: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutFitSection {
    /// Paths are relative to the config file.
    pub shots0: PathBuf,
    pub shots1: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Read a config and resolve the shot files it references against the
    /// config's directory. Fails before any work if a referenced file is missing.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let Some(fit) = &mut cfg.readout_fit {
            let dir = path.parent().unwrap_or(Path::new("."));
            for p in [&mut fit.shots0, &mut fit.shots1] {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
                if !p.is_file() {
                    return Err(Error::Config(format!(
                        "shot file {} does not exist",
                        p.display()
                    )));
                }
            }
        }
        Ok(cfg)
    }

    fn circuit(&self) -> Result<&CircuitParams> {
        self.circuit.as_ref().ok_or_else(|| missing("circuit"))
    }

    fn readout(&self) -> Result<&ReadoutParams> {
        self.readout.as_ref().ok_or_else(|| missing("readout"))
    }

    /// Validated circuit energies; any invariant violation is a config error.
    pub fn energies(&self) -> Result<ModeEnergies> {
        let c = self.circuit()?;
        let report = validate(c);
        if let Some(v) = report.violations.first() {
            return Err(Error::Config(format!(
                "[circuit] {}: {}",
                v.parameter, v.message
            )));
        }
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        Ok(derive_energies(c)?)
    }

    /// Flux configuration with any calibration applied, plus the energies it tunes.
    pub fn resolved_flux(&self) -> Result<(ModeEnergies, FluxConfig, Vec<i64>)> {
        let mut base = self.energies()?;
        let Some(f) = &self.flux else {
            let cfg = FluxConfig::from_energies(FluxMode::Fixed, &base, 0.0);
            return Ok((base, cfg, vec![0]));
        };
        let d0 = f
            .calibrate
            .as_ref()
            .and_then(|c| c.zero_flux_asymmetry)
            .unwrap_or(base.d_j);
        if let Some(freq) = f.calibrate.as_ref().and_then(|c| c.zero_flux_frequency) {
            base = base.with_junctions(e_jsigma_for_qubit_frequency(&base, freq)?, d0);
        } else {
            base = base.with_asymmetry(d0);
        }
        let mut cfg = FluxConfig::from_energies(f.mode, &base, f.area_ratio_a.unwrap_or(0.5));
        if let Some(e1) = f.e_j1_zero {
            cfg.e_j1_zero = e1;
        }
        if let Some(e2) = f.e_j2_zero {
            cfg.e_j2_zero = e2;
        }
        match (&f.calibrate, f.area_ratio_a) {
            (Some(c), None) => {
                let target = match (c.qubit_frequency, c.asymmetry) {
                    (Some(v), None) => AnchorTarget::QubitFrequency(v),
                    (None, Some(v)) => AnchorTarget::Asymmetry(v),
                    _ => {
                        return Err(Error::Config(
                            "[flux.calibrate] needs exactly one of qubit_frequency, asymmetry"
                                .into(),
                        ))
                    }
                };
                cfg.area_ratio_a = fit_area_ratio(&base, &cfg, c.anchor_n, target)?;
            }
            (None, Some(_)) => {}
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "[flux] give either area_ratio_a or calibrate, not both".into(),
                ))
            }
            (None, None) if f.mode != FluxMode::Fixed => {
                return Err(Error::Config(
                    "[flux] area_ratio_a or calibrate is required".into(),
                ))
            }
            (None, None) => {}
        }
        cfg.validate().map_err(|e| match e {
            FluxError::InvalidConfig(m) => Error::Config(format!("[flux] {m}")),
            other => other.into(),
        })?;
        Ok((base, cfg, f.n_list.clone()))
    }
}

fn missing(section: &str) -> Error {
    Error::Config(format!("missing [{section}] section"))
}

/// Column-oriented output with a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(x.to_string()), Value::Number)
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(cell).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (k, v) in self.columns.iter().zip(r) {
                    m.insert((*k).to_string(), v.clone());
                }
                Value::Object(m)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("table values serialize");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

pub fn energies_table(en: &ModeEnergies) -> Table {
    let mut t = Table::new(vec![
        "e_j",
        "e_lr",
        "e_cq",
        "e_cr",
        "e_jq",
        "e_jr",
        "e_jsigma",
        "b",
        "d_j",
        "regime_ratio",
    ]);
    t.push(
        [
            en.e_j,
            en.e_lr,
            en.e_cq,
            en.e_cr,
            en.e_jq,
            en.e_jr,
            en.e_jsigma(),
            en.b,
            en.d_j,
            en.regime_ratio(),
        ]
        .map(num)
        .to_vec(),
    );
    t
}

/// Analytic and numeric spectra side by side. The numeric cross-Kerr column
/// is taken at zero asymmetry so it compares like with like.
pub fn spectrum_table(en: &ModeEnergies, trunc: Truncation) -> Result<Table> {
    let a = dressed_spectrum(en)?;
    let full = numeric_spectrum(en, trunc)?;
    let sym = if en.d_j == 0.0 {
        full
    } else {
        numeric_spectrum(&en.with_asymmetry(0.0), trunc)?
    };
    let pick = |s: &SpectrumResult, k: usize| {
        [
            s.omega_q_t,
            s.omega_r_t,
            s.alpha_q,
            s.two_chi,
            s.g_asymm,
            s.two_chi_total,
        ][k]
    };
    let mut t = Table::new(vec!["quantity", "analytic", "numeric", "rel_delta"]);
    for (k, name) in [
        "omega_q_t",
        "omega_r_t",
        "alpha_q",
        "two_chi",
        "g_asymm",
        "two_chi_total",
    ]
    .into_iter()
    .enumerate()
    {
        let x = pick(&a, k);
        let y = if k == 3 { sym.two_chi } else { pick(&full, k) };
        let rel = if x != 0.0 { (y - x) / x } else { f64::NAN };
        t.push(vec![Value::String(name.into()), num(x), num(y), num(rel)]);
    }
    Ok(t)
}

fn sweep_table(cfg: &RunConfig, columns: &[&'static str]) -> Result<Table> {
    let (base, flux, n_list) = cfg.resolved_flux()?;
    let coherence = cfg.coherence.unwrap_or_default();
    coherence.validate()?;
    let mut cols = vec!["n"];
    cols.extend_from_slice(columns);
    cols.push("status");
    let mut t = Table::new(cols);
    for out in sweep_energies(&base, &flux, &n_list, &coherence) {
        let mut row = vec![Value::from(out.n)];
        match out.row {
            Ok(r) => {
                let v = serde_json::to_value(r).expect("sweep row serializes");
                row.extend(columns.iter().map(|c| v[*c].clone()));
                row.push(Value::String("ok".into()));
            }
            Err(e) => {
                eprintln!("warning: n = {}: {e}", out.n);
                row.extend(columns.iter().map(|_| Value::Null));
                row.push(Value::String(format!("error: {e}")));
            }
        }
        t.push(row);
    }
    Ok(t)
}

const SWEEP_COLUMNS: [&str; 12] = [
    "e_jsigma",
    "d_j",
    "omega_q_t",
    "omega_r_t",
    "delta",
    "two_chi",
    "g_asymm",
    "two_chi_total",
    "t1_diel",
    "t1_asymm",
    "t1_model",
    "t1_transmon_purcell",
];

const T1_COLUMNS: [&str; 7] = [
    "omega_q_t",
    "delta",
    "d_j",
    "t1_diel",
    "t1_asymm",
    "t1_model",
    "t1_transmon_purcell",
];

fn analysis_table(a: &crate::readout::Analysis) -> Table {
    let mut t = Table::new(vec![
        "mu0",
        "mu1",
        "sigma0",
        "sigma1",
        "a0",
        "a1",
        "residual_norm",
        "threshold",
        "p01",
        "p10",
        "fidelity",
        "eps_id",
        "eps_01",
        "eps_10",
        "degenerate",
    ]);
    let (f, r) = (&a.fit, &a.report);
    let mut row: Vec<Value> = [
        f.mu0,
        f.mu1,
        f.sigma0,
        f.sigma1,
        f.a0,
        f.a1,
        f.residual_norm,
        r.threshold,
        r.p01,
        r.p10,
        r.fidelity,
        r.eps_id,
        r.eps_01,
        r.eps_10,
    ]
    .map(num)
    .to_vec();
    row.push(Value::Bool(r.degenerate));
    t.push(row);
    t
}

#[derive(Debug, Parser)]
#[command(
    name = "quantromon",
    version,
    about = "Spectrum, coherence and readout modeling for the quantromon circuit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (a directory for readout-sim); stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; overrides [output] format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Simulation seed; overrides [readout_sim] seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Fock truncation per mode, e.g. 12x12.
    #[arg(long, global = true, value_parser = parse_trunc)]
    pub trunc: Option<(usize, usize)>,
    /// Shots per prepared state; overrides [readout_sim] shots.
    #[arg(long, global = true)]
    pub shots: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Derived energy scales.
    Energies,
    /// Analytic vs numeric dressed spectrum.
    Spectrum,
    /// Dispersive shift and T1 budget over the flux bias list.
    ChiSweep,
    /// T1 contributions per flux bias.
    T1Model,
    /// Simulate shots, write them and the fitted fidelity report.
    ReadoutSim,
    /// Fit and report on shot files named in the config.
    ReadoutFit,
    /// Reflection phase separation at the midpoint readout frequency.
    Phase,
}

fn parse_trunc(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected <nq>x<nr>, got `{s}`"))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok((p(a)?, p(b)?))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn ext(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

/// Execute a parsed command line.
pub fn execute(cli: &Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let output = cfg.output.clone().unwrap_or_default();
    let format = cli.format.or(output.format).unwrap_or_default();
    let out = cli.out.clone().or(output.path);
    let out = out.as_deref();

    match cli.command {
        Command::Energies => emit(&energies_table(&cfg.energies()?).render(format), out),
        Command::Spectrum => {
            let (n_q, n_r) = cli
                .trunc
                .or(cfg.numeric.map(|n| (n.n_q, n.n_r)))
                .unwrap_or((Truncation::default().n_q, Truncation::default().n_r));
            let trunc = Truncation::new(n_q, n_r).map_err(|e| Error::Config(e.to_string()))?;
            emit(
                &spectrum_table(&cfg.energies()?, trunc)?.render(format),
                out,
            )
        }
        Command::ChiSweep => emit(&sweep_table(&cfg, &SWEEP_COLUMNS)?.render(format), out),
        Command::T1Model => emit(&sweep_table(&cfg, &T1_COLUMNS)?.render(format), out),
        Command::Phase => {
            let r = cfg.readout()?;
            let mut t = Table::new(vec![
                "two_chi",
                "kappa_ext",
                "kappa_int",
                "phase_separation_deg",
            ]);
            let deg = phase_separation(r.two_chi, r.kappa_ext, r.kappa_int)?;
            t.push([r.two_chi, r.kappa_ext, r.kappa_int, deg].map(num).to_vec());
            emit(&t.render(format), out)
        }
        Command::ReadoutSim => {
            let p = cfg.readout()?;
            let sim = cfg.readout_sim.clone();
            let shots = cli.shots.or(sim.as_ref().map(|s| s.shots)).ok_or_else(|| {
                Error::Config("shot count missing: pass --shots or set [readout_sim] shots".into())
            })?;
            let seed = cli.seed.or(sim.as_ref().map(|s| s.seed)).unwrap_or(0);
            let dir =
                out.ok_or_else(|| Error::Config("readout-sim needs --out <directory>".into()))?;
            fs::create_dir_all(dir)?;
            let s0 = simulate_shots(p, 0, shots, seed)?;
            let s1 = simulate_shots(p, 1, shots, seed)?;
            fs::write(dir.join("shots0.csv"), s0.to_csv())?;
            fs::write(dir.join("shots1.csv"), s1.to_csv())?;
            let report = analysis_table(&analyze(&s0, &s1)?).render(format);
            fs::write(dir.join(format!("report.{}", ext(format))), &report)?;
            if let Some(taus) = sim.map(|s| s.tau_list).filter(|t| !t.is_empty()) {
                let mut t = Table::new(vec![
                    "tau",
                    "fidelity",
                    "eps_id",
                    "eps_01",
                    "eps_10",
                    "degenerate",
                ]);
                for r in error_vs_integration(p, &taus, shots, seed)? {
                    let mut row = [r.tau, r.fidelity, r.eps_id, r.eps_01, r.eps_10]
                        .map(num)
                        .to_vec();
                    row.push(Value::Bool(r.degenerate));
                    t.push(row);
                }
                fs::write(
                    dir.join(format!("errors.{}", ext(format))),
                    t.render(format),
                )?;
            }
            Ok(())
        }
        Command::ReadoutFit => {
            let f = cfg
                .readout_fit
                .as_ref()
                .ok_or_else(|| missing("readout_fit"))?;
            let read = |p: &Path, s: u8| -> Result<ShotSet> {
                let text = fs::read_to_string(p)?;
                ShotSet::from_csv(&text, Some(s))
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))
            };
            let (s0, s1) = (read(&f.shots0, 0)?, read(&f.shots1, 1)?);
            emit(&analysis_table(&analyze(&s0, &s1)?).render(format), out)
        }
    }
}

/// Parse `argv`, run, and map the outcome to a process exit code:
/// 0 success, 1 invalid input, 2 numerical failure.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE_ONE: &str = r#"
[circuit]
l_j = 8.2e-9
c_j = 56.88e-15
l_r = 0.546e-9
c_r = 781.8e-15
b = 0.405
"#;

    #[test]
    fn unknown_keys_rejected_with_name() {
        let err = RunConfig::from_toml(&format!("{TABLE_ONE}\nfoo = 1\n")).unwrap_err();
        assert!(err.to_string().contains("foo"), "{err}");
        let err = RunConfig::from_toml("[circuit]\nl_j = 1e-9\n").unwrap_err();
        assert!(err.to_string().contains("c_j"), "{err}");
    }

    #[test]
    fn config_round_trips() {
        let text = format!(
            "{TABLE_ONE}d_j = 0.045\n[flux]\nmode = \"both_squids\"\nn_list = [0, 1, 2]\n[flux.calibrate]\nanchor_n = 9\nqubit_frequency = 4.281e9\n[coherence]\nq_diel = 1.1e6\nkappa = 1.28e6\n"
        );
        let cfg = RunConfig::from_toml(&text).unwrap();
        let again = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(again.to_toml().unwrap(), cfg.to_toml().unwrap());
    }

    #[test]
    fn b_out_of_range_is_config_error() {
        let cfg = RunConfig::from_toml(&TABLE_ONE.replace("0.405", "1.2")).unwrap();
        let err = cfg.energies().unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("b out of [0,1]"), "{err}");
    }

    #[test]
    fn trunc_flag() {
        assert_eq!(parse_trunc("10x14"), Ok((10, 14)));
        assert!(parse_trunc("10").is_err());
        assert!(parse_trunc("ax3").is_err());
    }

    #[test]
    fn csv_cells_are_quoted_when_needed() {
        let mut t = Table::new(vec!["a", "b"]);
        t.push(vec![Value::String("x, y".into()), num(0.1)]);
        assert_eq!(t.to_csv(), "a,b\n\"x, y\",0.1\n");
    }

    #[test]
    fn spectrum_deltas_are_small() {
        let cfg = RunConfig::from_toml(TABLE_ONE).unwrap();
        let t = spectrum_table(&cfg.energies().unwrap(), Truncation::default()).unwrap();
        let two_chi = &t.rows[3];
        assert_eq!(two_chi[0], Value::String("two_chi".into()));
        assert!(two_chi[3].as_f64().unwrap().abs() < 0.1);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["quantromon", "bogus"]), 1);
        assert_eq!(run(["quantromon", "spectrum", "--trunc", "3"]), 1);
    }

    fn bundled(name: &str) -> String {
        format!("{}/configs/{name}", env!("CARGO_MANIFEST_DIR"))
    }

    fn arg(p: &Path) -> &str {
        p.to_str().unwrap()
    }

    #[test]
    fn exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("bad_b.toml");
        fs::write(&cfg, TABLE_ONE.replace("0.405", "1.2")).unwrap();
        assert_eq!(run(["quantromon", "energies", "--config", arg(&cfg)]), 1);
        fs::write(&cfg, format!("{TABLE_ONE}colour = 3\n")).unwrap();
        assert_eq!(run(["quantromon", "energies", "--config", arg(&cfg)]), 1);
        fs::write(
            &cfg,
            "[readout_fit]\nshots0 = \"nope0.csv\"\nshots1 = \"nope1.csv\"\n",
        )
        .unwrap();
        assert_eq!(run(["quantromon", "readout-fit", "--config", arg(&cfg)]), 1);
        // too few levels is an input problem, caught before any numerics
        let out = dir.path().join("spec.csv");
        assert_eq!(
            run([
                "quantromon",
                "spectrum",
                "--config",
                &bundled("sample_a.toml"),
                "--trunc",
                "3x3",
                "--out",
                arg(&out)
            ]),
            1
        );
        assert_eq!(
            run([
                "quantromon",
                "energies",
                "--config",
                &bundled("sample_a.toml"),
                "--out",
                arg(&out)
            ]),
            0
        );
    }

    #[test]
    fn sim_then_fit_reproduces_report() {
        let dir = tempfile::tempdir().unwrap();
        let sim = dir.path().join("sim");
        for format in ["csv", "json"] {
            let code = run([
                "quantromon",
                "readout-sim",
                "--config",
                &bundled("sample_c.toml"),
                "--out",
                arg(&sim),
                "--shots",
                "3000",
                "--seed",
                "5",
                "--format",
                format,
            ]);
            assert_eq!(code, 0);
            let cfg = dir.path().join("fit.toml");
            fs::write(
                &cfg,
                "[readout_fit]\nshots0 = \"sim/shots0.csv\"\nshots1 = \"sim/shots1.csv\"\n",
            )
            .unwrap();
            let out = dir.path().join(format!("fit.{format}"));
            assert_eq!(
                run([
                    "quantromon",
                    "readout-fit",
                    "--config",
                    arg(&cfg),
                    "--out",
                    arg(&out),
                    "--format",
                    format
                ]),
                0
            );
            let report = fs::read(sim.join(format!("report.{format}"))).unwrap();
            assert_eq!(fs::read(&out).unwrap(), report);
        }
        let shots = fs::read_to_string(sim.join("shots1.csv")).unwrap();
        assert_eq!(shots.lines().filter(|l| !l.starts_with('#')).count(), 3001);
    }

    #[test]
    fn json_rows_carry_column_names() {
        let cfg = RunConfig::load(Path::new(&bundled("sample_a.toml"))).unwrap();
        let t = energies_table(&cfg.energies().unwrap());
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v[0]["b"], Value::from(0.405));
    }
}
