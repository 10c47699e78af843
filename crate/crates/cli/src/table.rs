//! Tip displacement grid of the Cook panel against the reference values.

use std::fmt::Write as _;

use psfem::scenarios::{cook_material, cook_problem, cook_reference, default_formulation, CookOptions, COOK_POINT_A};
use psfem::{solver, Probe, Regime, SolveSettings, System};
use rayon::prelude::*;

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct TableFilter {
    pub regimes: Vec<Regime>,
    pub orders: Vec<usize>,
    pub n: Vec<usize>,
    pub loads: Vec<f64>,
}

impl Default for TableFilter {
    fn default() -> Self {
        Self { regimes: Regime::ALL.to_vec(), orders: vec![1, 2], n: vec![2, 4, 8, 16], loads: vec![24.0, 40.0] }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CookCell {
    pub load: f64,
    pub n: usize,
    pub regime: Regime,
    pub order: usize,
    pub u2: f64,
    pub reference: Option<f64>,
}

/// Solves one cell: `u2` at point A, three-d panels one element thick.
pub fn cook_cell(regime: Regime, order: usize, n: usize, load: f64) -> Result<CookCell, psfem::Error> {
    let o = CookOptions { n, order, regime, traction: load, ..Default::default() };
    let system = System::new(cook_problem(&o, default_formulation(regime), cook_material())?)?;
    let a = Probe::at(&system.problem.mesh, "A", COOK_POINT_A)?;
    let (history, _) = solver::run(&system, &SolveSettings::default())?;
    let q = &history.last().expect("load steps").q;
    let u2 = q[system.layout().u_dof(a.node, 1)];
    Ok(CookCell { load, n, regime, order, u2, reference: cook_reference(regime, order, n, load) })
}

pub fn cook_table(filter: &TableFilter, jobs: usize) -> Result<Vec<CookCell>, CliError> {
    let mut cases = Vec::new();
    for &load in &filter.loads {
        for &n in &filter.n {
            for &regime in &filter.regimes {
                for &order in &filter.orders {
                    cases.push((regime, order, n, load));
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| CliError::config("jobs", e))?;
    let cells: Vec<Result<CookCell, psfem::Error>> =
        pool.install(|| cases.par_iter().map(|&(r, o, n, f)| cook_cell(r, o, n, f)).collect());
    Ok(cells.into_iter().collect::<Result<_, _>>()?)
}

pub fn to_csv(cells: &[CookCell]) -> String {
    let mut s = String::from("load,n,regime,order,u2,reference,rel_diff\n");
    for c in cells {
        let (r, d) = match c.reference {
            Some(r) => (r.to_string(), (c.u2 / r - 1.0).to_string()),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(s, "{},{},{},{},{},{r},{d}", c.load, c.n, c.regime.name(), c.order, c.u2);
    }
    s
}

/// Grid with one row per `(load, n)` and one column per `(regime, order)`;
/// each entry shows the computed value and the reference in brackets.
pub fn to_markdown(cells: &[CookCell]) -> String {
    let mut cols: Vec<(Regime, usize)> = Vec::new();
    let mut rows: Vec<(f64, usize)> = Vec::new();
    for c in cells {
        if !cols.contains(&(c.regime, c.order)) {
            cols.push((c.regime, c.order));
        }
        if !rows.contains(&(c.load, c.n)) {
            rows.push((c.load, c.n));
        }
    }
    let mut s = String::from("| f | mesh |");
    for (r, o) in &cols {
        let _ = write!(s, " {} p{o} |", r.name());
    }
    s.push_str("\n|---|---|");
    s.push_str(&"---|".repeat(cols.len()));
    s.push('\n');
    for &(load, n) in &rows {
        let _ = write!(s, "| {load} | {n}x{n} |");
        for &(r, o) in &cols {
            match cells.iter().find(|c| c.load == load && c.n == n && c.regime == r && c.order == o) {
                Some(c) => match c.reference {
                    Some(rf) => {
                        let _ = write!(s, " {:.2} ({rf:.2}) |", c.u2);
                    }
                    None => {
                        let _ = write!(s, " {:.2} |", c.u2);
                    }
                },
                None => s.push_str(" |"),
            }
        }
        s.push('\n');
    }
    s
}
