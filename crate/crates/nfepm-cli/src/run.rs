use nfepm_core::channel::{nf_channel, rerr, RerrKind};
use nfepm_core::ecrb::{ecrb, ecrb_ao};
use nfepm_core::geometry::{classify_region, phase_ambiguity_distance, spacing_constraint_distance};
use nfepm_core::map::monte_carlo_mse;
use nfepm_core::observation::db_to_ratio;
use nfepm_core::solver::{default_pair, rmse_grid, SolveMode};
use nfepm_core::zzb::{zzb_ao_t_curve, zzb_t_curve, zzb_z_curve};
use nfepm_core::{PoseCpl, RegionClass};

use crate::config::{ExperimentConfig, Scenario, SolverChoice};
use crate::error::{at, CliError};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    /// Floats use the shortest representation that round-trips.
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:?}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].clone()).collect())
    }

    /// Appends the named columns of `other`, which must have as many rows.
    pub fn join(mut self, other: &Table, names: &[&str]) -> Self {
        assert_eq!(self.rows.len(), other.rows.len(), "joined tables differ in length");
        for n in names {
            let col = other.column(n).unwrap_or_else(|| panic!("no column {n}"));
            self.columns.push(n.to_string());
            for (row, c) in self.rows.iter_mut().zip(col) {
                row.push(c);
            }
        }
        self
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let scenario = cfg.scenario.ok_or_else(|| CliError::invariant("scenario", "no scenario selected"))?;
    match scenario {
        Scenario::Channel => run_channel(cfg),
        Scenario::Solve => run_solve(cfg),
        Scenario::Zzb => run_zzb(cfg),
        Scenario::Ecrb => run_ecrb(cfg),
        Scenario::MapMc => run_map(cfg),
    }
}

fn run_channel(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let wave = cfg.wave()?;
    let c = &cfg.channel;
    if c.z_t.is_empty() {
        return Err(CliError::invariant("channel.z_t", "need at least one distance"));
    }
    let mut cols = vec!["z_t", "z_over_lambda", "h_re", "h_im"];
    let names: Vec<String> = RerrKind::ALL.iter().map(|k| format!("rerr_{}", k.name())).collect();
    cols.extend(names.iter().map(String::as_str));
    let mut t = Table::new(&cols);
    for &z in &c.z_t {
        let pose = PoseCpl::new(z, c.t_z).map_err(at("channel"))?;
        let h = nf_channel(&pose, c.x_r, c.y_r, &wave)?;
        let mut row = vec![Cell::Num(z), Cell::Num(z / wave.lambda()), Cell::Num(h.re), Cell::Num(h.im)];
        for k in RerrKind::ALL {
            row.push(Cell::Num(rerr(k, &pose, c.x_r, c.y_r, &wave)?));
        }
        t.rows.push(row);
    }
    Ok(t)
}

fn run_solve(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let wave = cfg.wave()?;
    let geom = cfg.geometry()?;
    let prior = cfg.prior()?;
    let s = &cfg.solve;
    if s.u < 2 || s.v < 2 {
        return Err(CliError::invariant("solve", "u and v must be >= 2"));
    }
    let pair = if s.alpha == 0 && s.beta == 0 { default_pair(&geom) } else { (s.alpha, s.beta) };
    let region = classify_region(&prior, &geom, &wave, pair.0, pair.1)?;
    let solver = match s.solver {
        SolverChoice::Auto => region.clone(),
        SolverChoice::Case1 => RegionClass::CaseI,
        SolverChoice::Case2Pa => {
            phase_ambiguity_distance(&geom, &wave)?;
            RegionClass::CaseIIPa
        }
        SolverChoice::Case2Sc => RegionClass::CaseIISc,
    };
    if let RegionClass::Unsupported(r) = &solver {
        return Err(CliError::Validity(format!("no closed-form solver for this prior: {r}")));
    }
    let mode = if solver == region { SolveMode::Strict } else { SolveMode::Diagnostic };
    let (ez, et) = rmse_grid(&solver, &prior, &geom, &wave, s.u, s.v, pair, mode)?;
    let mut t = Table::new(&[
        "case", "solver", "lambda", "d_r", "l_s", "h1", "h2", "d_pa", "d_sc", "rmse_z_re", "rmse_z_im", "rmse_t_re", "rmse_t_im",
    ]);
    let d_pa = phase_ambiguity_distance(&geom, &wave).map(Cell::Num).unwrap_or(Cell::Empty);
    t.rows.push(vec![
        Cell::Text(region.to_string()),
        Cell::Text(solver.to_string()),
        Cell::Num(wave.lambda()),
        Cell::Num(geom.d_r()),
        Cell::Num(geom.l_s()),
        Cell::Num(prior.h1),
        Cell::Num(prior.h2),
        d_pa,
        Cell::Num(spacing_constraint_distance(&geom, &wave)),
        Cell::Num(ez.re),
        Cell::Num(ez.im),
        Cell::Num(et.re),
        Cell::Num(et.im),
    ]);
    Ok(t)
}

fn snr_column(cfg: &ExperimentConfig) -> Result<(Table, Vec<f64>), CliError> {
    let dbs = cfg.snrs_db()?;
    let mut t = Table::new(&["snr_db"]);
    t.rows = dbs.iter().map(|&d| vec![Cell::Num(d)]).collect();
    Ok((t, dbs.iter().map(|&d| db_to_ratio(d)).collect()))
}

fn push_column(t: &mut Table, name: &str, values: &[f64]) {
    t.columns.push(name.to_string());
    for (row, &v) in t.rows.iter_mut().zip(values) {
        row.push(Cell::Num(v));
    }
}

fn run_zzb(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let (wave, geom, prior, grid) = (cfg.wave()?, cfg.geometry()?, cfg.prior()?, cfg.zzb_grid()?);
    let (mut t, snrs) = snr_column(cfg)?;
    push_column(&mut t, "zzb_z", &zzb_z_curve(&prior, &snrs, &geom, &wave, &grid)?);
    push_column(&mut t, "zzb_t", &zzb_t_curve(&prior, &snrs, &geom, &wave, &grid)?);
    push_column(&mut t, "zzb_ao_t", &zzb_ao_t_curve(&prior, &snrs, &geom, &grid)?);
    Ok(t)
}

fn run_ecrb(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let (wave, geom, prior, grid) = (cfg.wave()?, cfg.geometry()?, cfg.prior()?, cfg.expectation_grid()?);
    let (mut t, snrs) = snr_column(cfg)?;
    let mut cols = [Vec::new(), Vec::new(), Vec::new()];
    for &snr in &snrs {
        let e = ecrb(&prior, snr, &geom, &wave, &grid, cfg.singular_policy())?;
        cols[0].push(e.z);
        cols[1].push(e.t);
        cols[2].push(ecrb_ao(&prior, snr, &geom, &grid)?);
    }
    push_column(&mut t, "ecrb_z", &cols[0]);
    push_column(&mut t, "ecrb_t", &cols[1]);
    push_column(&mut t, "ecrb_ao_t", &cols[2]);
    Ok(t)
}

fn run_map(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let (wave, geom, prior, grid) = (cfg.wave()?, cfg.geometry()?, cfg.prior()?, cfg.map_grid()?);
    if geom.is_unbounded() {
        return Err(CliError::invariant("array.d_r", "Monte Carlo needs a finite array"));
    }
    let dbs = cfg.snrs_db()?;
    let mut t = Table::new(&["snr_db", "mse_z", "mse_t", "se_z", "se_t", "trials", "seed"]);
    for &db in dbs {
        let r = monte_carlo_mse(&prior, &geom, &wave, db, cfg.map.trials, cfg.seed, &grid)?;
        t.rows.push(vec![
            Cell::Num(db),
            Cell::Num(r.mse_z),
            Cell::Num(r.mse_t),
            Cell::Num(r.se_z),
            Cell::Num(r.se_t),
            Cell::Int(r.trials as u64),
            Cell::Int(cfg.seed),
        ]);
    }
    Ok(t)
}
