//! Built-in experiments. Every physical parameter is fixed; only grid sizes,
//! trial counts and sweep lengths can be overridden.

use crate::config::{ArrayCfg, ExperimentConfig, PriorCfg, Scenario, SolverChoice, WaveCfg};
use crate::error::CliError;
use crate::run::{run, Cell, Table};

pub const PRESETS: [&str; 8] = ["table2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"];

pub const OVERRIDABLE: [&str; 13] = [
    "zzb.n_delta",
    "zzb.n_theta_z",
    "zzb.n_theta_t",
    "zzb.n_max_search",
    "ecrb.n_z",
    "ecrb.n_t",
    "map.n_z",
    "map.n_t",
    "map.refine_levels",
    "map.trials",
    "solve.u",
    "solve.v",
    "sweep.points",
];

/// One CSV produced by a preset.
#[derive(Debug, Clone)]
pub struct Product {
    pub file: String,
    pub table: Table,
    /// Parameters of the curve; the swept quantity holds its first value.
    pub config: ExperimentConfig,
    pub notes: Vec<String>,
}

struct Ctx {
    overrides: Vec<(String, String)>,
    points: Option<usize>,
    seed: Option<u64>,
}

impl Ctx {
    fn new(overrides: &[(String, String)], seed: Option<u64>) -> Result<Self, CliError> {
        let mut points = None;
        let mut rest = Vec::new();
        for (k, v) in overrides {
            if !OVERRIDABLE.contains(&k.as_str()) {
                return Err(CliError::invariant(
                    k.as_str(),
                    format!("not overridable in presets (allowed: {})", OVERRIDABLE.join(", ")),
                ));
            }
            if k == "sweep.points" {
                let n: usize = v.parse().map_err(|_| CliError::invariant("sweep.points", format!("`{v}` is not a count")))?;
                if n < 2 {
                    return Err(CliError::invariant("sweep.points", "need at least 2 points"));
                }
                points = Some(n);
            } else {
                rest.push((k.clone(), v.clone()));
            }
        }
        Ok(Self { overrides: rest, points, seed })
    }

    fn finish(&self, base: ExperimentConfig) -> Result<ExperimentConfig, CliError> {
        let mut cfg = crate::config::parse(&base.to_toml(), "preset", &self.overrides)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }

    fn points(&self, default: usize) -> usize {
        self.points.unwrap_or(default)
    }
}

fn base(scenario: Scenario, lambda: f64, array: Option<(f64, f64)>, prior: Option<(f64, f64)>) -> ExperimentConfig {
    let mut cfg = crate::config::parse(&format!("[wave]\nlambda = {lambda:?}\n"), "preset", &[]).expect("static config parses");
    cfg.scenario = Some(scenario);
    cfg.array = array.map(|(d_r, l_s)| ArrayCfg { d_r, l_s });
    cfg.prior = prior.map(|(h1, h2)| PriorCfg { h1, h2 });
    cfg.wave = WaveCfg { lambda, e_in: 1.0 };
    cfg
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| match i {
            0 => a,
            _ if i + 1 == n => b,
            _ => (la + (lb - la) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

fn snr_sweep() -> Vec<f64> {
    (0..=12).map(|i| 5.0 * i as f64).collect()
}

fn echo(mut cfg: ExperimentConfig) -> ExperimentConfig {
    cfg.scenario = None;
    cfg
}

pub fn run_preset(name: &str, overrides: &[(String, String)], seed: Option<u64>) -> Result<Vec<Product>, CliError> {
    let ctx = Ctx::new(overrides, seed)?;
    match name {
        "table2" => table2(&ctx),
        "fig3" => fig3(&ctx),
        "fig4" => fig4(&ctx),
        "fig5" => fig5(&ctx),
        "fig6" => snr_family(&ctx, "fig6", &[0.1, 0.01, 0.001], |x| ("lambda", x, 5.0, 0.1, x), (5.0, 6.0)),
        "fig7" => snr_family(&ctx, "fig7", &[0.02, 0.1, 0.5, 2.5], |x| ("ls", 0.01, 5.0, x, x), (5.0, 6.0)),
        "fig8" => fig8(&ctx),
        "fig9" => fig9(&ctx),
        other => Err(CliError::Usage(format!("unknown preset `{other}` (available: {})", PRESETS.join(", ")))),
    }
}

/// `(λ, D_r, l_s, H1, H2)` of the nine columns.
pub const TABLE2: [(f64, f64, f64, f64, f64); 9] = [
    (1.0, 0.5, 0.05, 0.5, 0.9),
    (0.5, 1.0, 0.05, 0.1, 0.45),
    (0.1, 1.0, 0.05, 5.0, 20.0),
    (0.1, 2.0, 0.05, 20.0, 80.0),
    (0.01, 2.0, 0.05, 200.0, 400.0),
    (0.1, 1.0, 0.05, 0.18, 4.98),
    (0.1, 1.0, 0.1, 0.36, 4.98),
    (0.01, 2.0, 0.05, 0.25, 199.0),
    (0.01, 2.0, 0.005, 0.018, 199.0),
];

fn table2(ctx: &Ctx) -> Result<Vec<Product>, CliError> {
    let mut main: Option<Table> = None;
    let mut mismatch: Option<Table> = None;
    let mut first = None;
    for (i, &(lambda, d_r, l_s, h1, h2)) in TABLE2.iter().enumerate() {
        let cfg = ctx.finish(base(Scenario::Solve, lambda, Some((d_r, l_s)), Some((h1, h2))))?;
        let t = run(&cfg)?;
        let wrong = match i {
            2..=4 => Some(SolverChoice::Case1),
            5..=8 => Some(SolverChoice::Case2Pa),
            _ => None,
        };
        if let Some(s) = wrong {
            let mut c = cfg.clone();
            c.solve.solver = s;
            append(&mut mismatch, run(&c)?);
        }
        append(&mut main, t);
        first.get_or_insert(cfg);
    }
    let config = echo(first.expect("table has columns"));
    let notes = vec!["rows follow the nine parameter columns in order".to_string()];
    Ok(vec![
        Product { file: "table2.csv".into(), table: main.expect("rows"), config: config.clone(), notes: notes.clone() },
        Product { file: "table2_mismatch.csv".into(), table: mismatch.expect("rows"), config, notes },
    ])
}

fn append(acc: &mut Option<Table>, t: Table) {
    match acc {
        Some(a) => a.rows.extend(t.rows),
        None => *acc = Some(t),
    }
}

fn fig3(ctx: &Ctx) -> Result<Vec<Product>, CliError> {
    let lambda = 0.01;
    let mut out = Vec::new();
    for t2 in [0.1, 0.5, 0.9] {
        let mut b = base(Scenario::Channel, lambda, None, None);
        b.channel.t_z = f64::sqrt(t2);
        b.channel.x_r = 0.0;
        b.channel.y_r = 10.0 * lambda;
        b.channel.z_t = logspace(1.0, 1000.0, ctx.points(61)).into_iter().map(|r| r * lambda).collect();
        let cfg = ctx.finish(b)?;
        let table = run(&cfg)?;
        out.push(Product { file: format!("fig3_tzsq{t2:?}.csv"), table, config: echo(cfg), notes: vec![format!("t_z = sqrt({t2:?})")] });
    }
    Ok(out)
}

fn fig4(ctx: &Ctx) -> Result<Vec<Product>, CliError> {
    let mut b = base(Scenario::Zzb, 0.1, Some((5.0, 0.1)), Some((3.0, 5.0)));
    b.snr_db = snr_sweep();
    b.map.trials = 200;
    let zcfg = ctx.finish(b)?;
    let mut ecfg = zcfg.clone();
    ecfg.scenario = Some(Scenario::Ecrb);
    let mut mcfg = zcfg.clone();
    mcfg.scenario = Some(Scenario::MapMc);
    let z = run(&zcfg)?;
    let e = run(&ecfg)?;
    let m = run(&mcfg)?;
    let mut table = Table { columns: vec!["snr_db".into()], rows: z.rows.iter().map(|r| vec![r[0].clone()]).collect() };
    table = table.join(&z, &["zzb_z", "zzb_t"]).join(&e, &["ecrb_z", "ecrb_t"]).join(&m, &["mse_z", "mse_t", "se_z", "se_t"]);
    Ok(vec![Product { file: "fig4.csv".into(), table, config: echo(mcfg), notes: vec![] }])
}

/// Bounds at each `D_r`, one CSV per SNR.
fn fig5(ctx: &Ctx) -> Result<Vec<Product>, CliError> {
    let dbs = [30.0, 40.0, 50.0];
    let d_rs = logspace(0.1, 20.0, ctx.points(12));
    let mut tables: Vec<Table> = dbs.iter().map(|_| Table::new(&["d_r", "zzb_z", "zzb_t", "ecrb_z", "ecrb_t"])).collect();
    let mut first = None;
    for &d_r in &d_rs {
        let mut b = base(Scenario::Zzb, 0.1, Some((d_r, 0.1)), Some((4.0, 8.0)));
        b.snr_db = dbs.to_vec();
        let zcfg = ctx.finish(b)?;
        let mut ecfg = zcfg.clone();
        ecfg.scenario = Some(Scenario::Ecrb);
        let (z, e) = (run(&zcfg)?, run(&ecfg)?);
        for (k, t) in tables.iter_mut().enumerate() {
            t.rows.push(vec![Cell::Num(d_r), z.rows[k][1].clone(), z.rows[k][2].clone(), e.rows[k][1].clone(), e.rows[k][2].clone()]);
        }
        first.get_or_insert(zcfg);
    }
    let cfg = echo(first.expect("sweep is non-empty"));
    let note = format!("D_r swept over {} log-spaced values in [0.1, 20]", d_rs.len());
    Ok(tables
        .into_iter()
        .zip(dbs)
        .map(|(table, db)| Product { file: format!("fig5_snr{db}db.csv"), table, config: cfg.clone(), notes: vec![note.clone()] })
        .collect())
}

/// Bound curves over SNR for a family of configurations. `param` maps the
/// family value to `(tag, λ, D_r, l_s, tag value)`.
fn snr_family(
    ctx: &Ctx,
    name: &str,
    values: &[f64],
    param: impl Fn(f64) -> (&'static str, f64, f64, f64, f64),
    prior: (f64, f64),
) -> Result<Vec<Product>, CliError> {
    let mut out = Vec::new();
    for &v in values {
        let (tag, lambda, d_r, l_s, x) = param(v);
        let mut b = base(Scenario::Zzb, lambda, Some((d_r, l_s)), Some(prior));
        b.snr_db = snr_sweep();
        let zcfg = ctx.finish(b)?;
        let mut ecfg = zcfg.clone();
        ecfg.scenario = Some(Scenario::Ecrb);
        let (z, e) = (run(&zcfg)?, run(&ecfg)?);
        let table = Table { columns: vec!["snr_db".into()], rows: z.rows.iter().map(|r| vec![r[0].clone()]).collect() }
            .join(&z, &["zzb_z", "zzb_t"])
            .join(&e, &["ecrb_z", "ecrb_t"]);
        out.push(Product { file: format!("{name}_{tag}{x:?}.csv"), table, config: echo(zcfg), notes: vec![] });
    }
    Ok(out)
}

fn fig8(ctx: &Ctx) -> Result<Vec<Product>, CliError> {
    let mut out = Vec::new();
    for d_r in [5.0, f64::INFINITY] {
        for l_s in [0.5, 2.5] {
            let mut b = base(Scenario::Zzb, 0.1, Some((d_r, l_s)), Some((3.0, 4.0)));
            b.snr_db = snr_sweep();
            let zcfg = ctx.finish(b)?;
            let mut ecfg = zcfg.clone();
            ecfg.scenario = Some(Scenario::Ecrb);
            let (z, e) = (run(&zcfg)?, run(&ecfg)?);
            let table = Table { columns: vec!["snr_db".into()], rows: z.rows.iter().map(|r| vec![r[0].clone()]).collect() }
                .join(&z, &["zzb_t", "zzb_ao_t"])
                .join(&e, &["ecrb_t", "ecrb_ao_t"]);
            out.push(Product { file: format!("fig8_dr{d_r:?}_ls{l_s:?}.csv"), table, config: echo(zcfg), notes: vec![] });
        }
    }
    Ok(out)
}

fn fig9(ctx: &Ctx) -> Result<Vec<Product>, CliError> {
    let (lambda, l_s) = (0.01, 0.5);
    let d_rs = logspace(l_s, 100.0, ctx.points(31));
    let mut out = Vec::new();
    for (h1, h2) in [(4.0, 5.0), (4.0, 7.0), (4.0, 10.0), (6.0, 7.0), (9.0, 10.0)] {
        let mut table = Table::new(&["d_r", "ecrb_z", "ecrb_t"]);
        let mut first = None;
        for &d_r in &d_rs {
            let mut b = base(Scenario::Ecrb, lambda, Some((d_r, l_s)), Some((h1, h2)));
            b.snr_db = vec![40.0];
            let cfg = ctx.finish(b)?;
            let e = run(&cfg)?;
            table.rows.push(vec![Cell::Num(d_r), e.rows[0][1].clone(), e.rows[0][2].clone()]);
            first.get_or_insert(cfg);
        }
        let note = format!("D_r swept over {} log-spaced values in [{l_s:?}, 100]", d_rs.len());
        out.push(Product { file: format!("fig9_h{h1:?}-{h2:?}.csv"), table, config: echo(first.expect("sweep")), notes: vec![note] });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logspace_hits_endpoints() {
        let v = logspace(0.1, 20.0, 5);
        assert_eq!(v[0], 0.1);
        assert_eq!(v[4], 20.0);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn physical_parameters_are_not_overridable() {
        let e = run_preset("fig4", &[("wave.lambda".into(), "0.2".into())], None).unwrap_err();
        assert!(e.to_string().contains("not overridable"));
        assert!(run_preset("fig10", &[], None).is_err());
    }
}
