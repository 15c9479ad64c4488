use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use cpt_core::analysis::{
    epr_db, min_quadrature_spectrum, optimize_alpha, optimize_entanglement, spin_point, transform_basis, ModeBasis,
};
use cpt_core::analytic_spin::{gamma_z, jz_variance_analytic, optimal_alpha};
use cpt_core::langevin::{self, default_frequency_grid, Fluctuation, FluctuationModel, RMat};
use cpt_core::semiclassical::{reflectivity, OperatingPoint};
use cpt_core::SystemParams64;
use rayon::prelude::*;

use crate::config::{Format, Grid, RunConfig};
use crate::output::{emit, write_atomic, Cell, Table};
use crate::CliError;

pub const STEADY_COLUMNS: [&str; 8] = [
    "delta_bar",
    "intensity",
    "absorption",
    "phase_nl",
    "input_intensity",
    "re_r",
    "im_r",
    "stable",
];
pub const SPECTRUM_COLUMNS: [&str; 9] = [
    "omega", "s_a1", "s_a2", "s_ax", "s_ay", "theta_a1", "theta_a2", "theta_ax", "theta_ay",
];
pub const ENTANGLE_COLUMNS: [&str; 8] = ["omega", "e_star", "e_star_db", "chi", "psi", "zeta", "theta_a", "theta_b"];
pub const SPIN_COLUMNS: [&str; 6] = [
    "phi",
    "alpha",
    "var_jz_numeric",
    "var_jz_analytic",
    "gamma_z_fit",
    "gamma_z_analytic",
];

/// Map over `items` on a pool of `threads` workers, keeping input order.
fn par_map<T, U, F>(threads: Option<usize>, items: &[T], f: F) -> Result<Vec<U>, CliError>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U, CliError> + Sync + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}

fn stable_model(params: &SystemParams64, intensity: f64) -> Result<FluctuationModel, CliError> {
    let model = FluctuationModel::new(params, intensity)?;
    if !model.is_stable() {
        return Err(CliError::Unstable(format!(
            "largest drift eigenvalue real part {:e} at I = {intensity}",
            model.max_real_eigenvalue()
        )));
    }
    Ok(model)
}

fn frequencies(grid: &Option<Grid>) -> Vec<f64> {
    grid.as_ref().map_or_else(default_frequency_grid, Grid::points)
}

pub fn steady(cfg: &RunConfig) -> Result<Table, CliError> {
    let base = cfg.params()?;
    let grid = cfg.delta_range.clone().unwrap_or(Grid::linear(-3.0, 3.0, 601)).points();
    let i = cfg.intensity;
    let rows = par_map(cfg.threads, &grid, |&d| {
        let p = base.with_delta_bar(d)?;
        let point = OperatingPoint::new(&p, i)?;
        let (r1, _) = reflectivity(i, d, p.cooperativity, p.phi)?;
        let stable = if cfg.exact_stability {
            langevin::stability(&p, i)?
        } else {
            point.stable
        };
        Ok(vec![
            d.into(),
            i.into(),
            point.absorption.into(),
            point.phase_nl.into(),
            point.input_intensity.into(),
            r1.re.into(),
            r1.im.into(),
            stable.into(),
        ])
    })?;
    let mut table = Table::new(cfg.header(), &STEADY_COLUMNS);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Minimal spectra of `A₁, A₂, A_x, A_y` at each frequency, with the
/// optimal quadrature angles.
fn spectrum_rows(model: &FluctuationModel, omegas: &[f64], threads: Option<usize>) -> Result<Vec<[f64; 9]>, CliError> {
    let linear = ModeBasis::dark_bright();
    par_map(threads, omegas, |&w| {
        let s = model.output_spectra(w)?;
        let lin = transform_basis(&s.output, &linear);
        let (s1, t1) = min_quadrature_spectrum(&s.mode_block(0));
        let (s2, t2) = min_quadrature_spectrum(&s.mode_block(1));
        let (sx, tx) = min_quadrature_spectrum(&lin.fixed_view::<2, 2>(0, 0).into_owned());
        let (sy, ty) = min_quadrature_spectrum(&lin.fixed_view::<2, 2>(2, 2).into_owned());
        Ok([w, s1, s2, sx, sy, t1, t2, tx, ty])
    })
}

pub fn spectrum(cfg: &RunConfig, dump: Option<&Path>) -> Result<Table, CliError> {
    let model = stable_model(&cfg.params()?, cfg.intensity)?;
    if let Some(dir) = dump {
        dump_matrices(&model, dir)?;
    }
    let rows = spectrum_rows(&model, &frequencies(&cfg.omega_range), cfg.threads)?;
    let mut table = Table::new(cfg.header(), &SPECTRUM_COLUMNS);
    for r in rows {
        table.push(r.iter().map(|&x| x.into()).collect());
    }
    Ok(table)
}

fn matrix_csv(rows: &[&str], cols: &[&str], entry: impl Fn(usize, usize) -> f64) -> String {
    let mut s = format!("row,{}\n", cols.join(","));
    for (i, name) in rows.iter().enumerate() {
        let cells: Vec<String> = (0..cols.len()).map(|j| crate::output::format_number(entry(i, j))).collect();
        s.push_str(&format!("{name},{}\n", cells.join(",")));
    }
    s
}

/// Drift, diffusion and input coupling in the quadrature basis.
fn dump_matrices(model: &FluctuationModel, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let labels: Vec<&str> = Fluctuation::ALL.iter().map(|f| f.quadrature_label()).collect();
    let inputs = ["X_A1_in", "Y_A1_in", "X_A2_in", "Y_A2_in"];
    let q = model.quadrature();
    let square: [(&str, &RMat); 3] = [
        ("drift.csv", &q.drift),
        ("diffusion.csv", &q.diffusion),
        ("total_diffusion.csv", &q.total_diffusion),
    ];
    for (name, m) in square {
        write_atomic(&dir.join(name), &matrix_csv(&labels, &labels, |i, j| m[(i, j)]))?;
    }
    write_atomic(&dir.join("input_coupling.csv"), &matrix_csv(&labels, &inputs, |i, j| q.input_coupling[(i, j)]))?;
    Ok(())
}

fn entangle_rows(model: &FluctuationModel, omegas: &[f64], seed: u64, threads: Option<usize>) -> Result<Vec<Vec<f64>>, CliError> {
    par_map(threads, omegas, |&w| {
        let r = optimize_entanglement(&model.output_spectra(w)?, seed)?;
        let mut row = vec![w, r.e_star, epr_db(r.e_star)];
        row.extend(r.angles.iter().map(|a| a.rem_euclid(TAU)));
        Ok(row)
    })
}

pub fn entangle(cfg: &RunConfig) -> Result<Table, CliError> {
    let model = stable_model(&cfg.params()?, cfg.intensity)?;
    let rows = entangle_rows(&model, &frequencies(&cfg.omega_range), cfg.seed, cfg.threads)?;
    let mut table = Table::new(cfg.header(), &ENTANGLE_COLUMNS);
    for r in rows {
        table.push(r.into_iter().map(Cell::from).collect());
    }
    Ok(table)
}

/// Upper end of the α search: well past the closed-form optimum.
fn alpha_search_limit(phi: f64) -> f64 {
    optimal_alpha(phi).map_or(10.0, |(a, _)| (4.0 * a).max(4.0))
}

const ALPHA_FLOOR: f64 = 1.0 + 1e-3;

pub fn spin(cfg: &RunConfig) -> Result<Table, CliError> {
    let base = cfg.params()?;
    if base.delta_bar == 0.0 {
        return Err(CliError::Config("spin squeezing needs a nonzero --delta-bar".into()));
    }
    let phis = cfg.phi_range.clone().unwrap_or(Grid::linear(1.0, 5.0, 41)).points();
    let delta = base.delta_bar.abs();
    let rows = par_map(cfg.threads, &phis, |&phi| {
        let p = base.with_phi(phi)?;
        let (alpha, analytic) = match cfg.alpha {
            Some(a) => (a, jz_variance_analytic(a, phi)?),
            None => {
                let (_, best) = optimal_alpha(phi)?;
                let (a, _) = optimize_alpha(&p, ALPHA_FLOOR, alpha_search_limit(phi))?;
                (a, best)
            }
        };
        let r = spin_point(&p, alpha)?;
        Ok(vec![
            phi.into(),
            alpha.into(),
            r.var_jz_normalized.into(),
            analytic.into(),
            r.gamma_z_fit.into(),
            gamma_z(delta, phi, alpha)?.into(),
        ])
    })?;
    let mut table = Table::new(cfg.header(), &SPIN_COLUMNS);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Preset figure data sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Reflectivity = 1,
    Squeezing = 3,
    Entanglement = 4,
    SpinVariance = 5,
}

impl Figure {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Self::Reflectivity),
            3 => Some(Self::Squeezing),
            4 => Some(Self::Entanglement),
            5 => Some(Self::SpinVariance),
            _ => None,
        }
    }

    pub fn file_name(self, format: Format) -> String {
        let ext = match format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        format!("fig{}.{ext}", self as u8)
    }
}

/// Settings common to every preset.
#[derive(Debug, Clone)]
pub struct FigureRun {
    pub out_dir: PathBuf,
    pub format: Format,
    pub seed: u64,
    pub threads: Option<usize>,
}

fn preset(command: &'static str, run: &FigureRun, c: f64, phi: f64, delta_bar: f64, intensity: f64) -> RunConfig {
    RunConfig {
        command,
        cooperativity: c,
        kappa: 2.0,
        phi,
        delta_bar,
        gamma0: 0.0,
        atom_number: None,
        intensity,
        delta_range: None,
        omega_range: None,
        phi_range: None,
        alpha: None,
        format: run.format,
        seed: run.seed,
        exact_stability: false,
        threads: run.threads,
        out: None,
    }
}

pub fn figure(which: Figure, run: &FigureRun) -> Result<PathBuf, CliError> {
    let table = match which {
        Figure::Reflectivity => {
            let mut cfg = preset("fig1", run, 100.0, 0.0, 0.0, 1.0);
            cfg.delta_range = Some(Grid::linear(-3.0, 3.0, 601));
            steady(&cfg)?
        }
        Figure::Squeezing => {
            let cfg = preset("fig3", run, 100.0, 1.0, 1.0, 144.0);
            let model = stable_model(&cfg.params()?, cfg.intensity)?;
            let rows = spectrum_rows(&model, &default_frequency_grid(), run.threads)?;
            let mut t = Table::new(cfg.header(), &["omega", "s_a1", "s_a2", "s_ax", "s_ay"]);
            for r in rows {
                t.push(r[..5].iter().map(|&x| x.into()).collect());
            }
            t
        }
        Figure::Entanglement => {
            let a = preset("fig4", run, 100.0, 1.0, 1.0, 144.0);
            let b = preset("fig4", run, 1000.0, 2.0, 0.1, 49.0);
            let omegas = default_frequency_grid();
            let ea = entangle_rows(&stable_model(&a.params()?, a.intensity)?, &omegas, run.seed, run.threads)?;
            let eb = entangle_rows(&stable_model(&b.params()?, b.intensity)?, &omegas, run.seed, run.threads)?;
            let header = format!("{{\"a\":{},\"b\":{}}}", a.header(), b.header());
            let mut t = Table::new(header, &["omega", "e_star_a", "e_star_a_db", "e_star_b", "e_star_b_db"]);
            for (ra, rb) in ea.iter().zip(&eb) {
                t.push(vec![ra[0].into(), ra[1].into(), ra[2].into(), rb[1].into(), rb[2].into()]);
            }
            t
        }
        Figure::SpinVariance => {
            let b = preset("fig5", run, 1000.0, 1.0, 0.005, 0.0);
            let c = preset("fig5", run, 100.0, 1.0, 0.005, 0.0);
            let phis = Grid::linear(0.5, 5.0, 46).points();
            let optimum = |cfg: &RunConfig| {
                let base = cfg.params()?;
                par_map(run.threads, &phis, |&phi| {
                    Ok(optimize_alpha(&base.with_phi(phi)?, ALPHA_FLOOR, alpha_search_limit(phi))?.1)
                })
            };
            let vb = optimum(&b)?;
            let vc = optimum(&c)?;
            let header = format!(
                "{{\"phi_range\":\"{}\",\"b\":{},\"c\":{}}}",
                Grid::linear(0.5, 5.0, 46),
                b.header(),
                c.header()
            );
            let mut t = Table::new(header, &["phi", "var_a", "var_b", "var_c"]);
            for (k, &phi) in phis.iter().enumerate() {
                t.push(vec![phi.into(), optimal_alpha(phi)?.1.into(), vb[k].into(), vc[k].into()]);
            }
            t
        }
    };
    std::fs::create_dir_all(&run.out_dir)?;
    let path = run.out_dir.join(which.file_name(run.format));
    emit(Some(&path), &table.render(run.format))?;
    Ok(path)
}
