//! Convergence sweeps over `(r, n)`: for each grid point the defect
//! `||M_rho lambda(f) - lambda(f)||` of the rescaled truncated heat multiplier
//! is bracketed, and the first point below a target epsilon is selected.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::DecayCertificate;
use crate::multiplier::{map_defect, Multiplier};
use crate::operators::{PowerOptions, RdParams};
use crate::ring::GroupRingElement;

/// Truncation radius as a function of `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NRule {
    /// `n(r) = ceil(factor * s / r)`.
    Proportional { factor: f64 },
    Fixed(u64),
}

impl NRule {
    pub const DEFAULT_FACTOR: f64 = 40.0;

    pub fn radius(&self, r: f64, s: f64) -> u64 {
        match *self {
            NRule::Proportional { factor } => (factor * s / r).ceil() as u64,
            NRule::Fixed(n) => n,
        }
    }
}

impl Default for NRule {
    fn default() -> Self {
        NRule::Proportional {
            factor: Self::DEFAULT_FACTOR,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSchedule {
    r_values: Vec<f64>,
    n_rule: NRule,
    rd: RdParams,
}

impl GridSchedule {
    pub const DEFAULT_R: [f64; 3] = [0.5, 0.1, 0.02];

    /// `r_values` must be positive and strictly decreasing, and every `n(r)`
    /// must lie where the tail bound decreases (`n >= s/r - 1`).
    pub fn new(r_values: Vec<f64>, n_rule: NRule, rd: RdParams) -> Result<Self> {
        if r_values.is_empty() {
            return Err(Error::EmptySchedule);
        }
        if let NRule::Proportional { factor } = n_rule {
            if !(factor > 0.0 && factor.is_finite()) {
                return Err(Error::param(format!("n-rule factor must be positive, got {factor}")));
            }
        }
        for &r in &r_values {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::param(format!("grid r must be positive, got {r}")));
            }
            let n = n_rule.radius(r, rd.s);
            if (n as f64) < rd.s / r - 1.0 {
                return Err(Error::param(format!(
                    "n({r}) = {n} is below s/r - 1 = {}",
                    rd.s / r - 1.0
                )));
            }
        }
        if r_values.windows(2).any(|p| p[1] >= p[0]) {
            return Err(Error::param("grid r values must be strictly decreasing"));
        }
        Ok(GridSchedule {
            r_values,
            n_rule,
            rd,
        })
    }

    /// `r in {0.5, 0.1, 0.02}` with `n(r) = ceil(40 s / r)`.
    pub fn default_for(rd: RdParams) -> Self {
        Self::new(Self::DEFAULT_R.to_vec(), NRule::default(), rd).expect("default schedule is valid")
    }

    pub fn r_values(&self) -> &[f64] {
        &self.r_values
    }

    pub fn n_rule(&self) -> NRule {
        self.n_rule
    }

    pub fn rd(&self) -> RdParams {
        self.rd
    }
}

/// One grid point of a convergence sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub r: f64,
    pub n: u64,
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "K_n")]
    pub k_n: f64,
    pub defect_lower: f64,
    pub defect_upper: f64,
    /// Wall-clock time of the grid point; only recorded when requested,
    /// since it would otherwise break reproducible output.
    pub runtime_ms: Option<f64>,
}

impl ConvergenceRow {
    /// The multiplier `phi_{r,n} / U` this row measured.
    pub fn multiplier(&self) -> Multiplier {
        Multiplier::scaled(
            Multiplier::truncated_heat(self.r, self.n).expect("row r is valid"),
            self.u,
        )
        .expect("row U is at least 1")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridOptions {
    pub power: PowerOptions,
    pub record_timing: bool,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            power: PowerOptions::default(),
            record_timing: false,
        }
    }
}

/// Rows in schedule order.
pub fn run_grid(
    f: &GroupRingElement,
    schedule: &GridSchedule,
    opts: &GridOptions,
) -> Result<Vec<ConvergenceRow>> {
    let rd = schedule.rd;
    schedule
        .r_values
        .iter()
        .map(|&r| {
            let start = Instant::now();
            let n = schedule.n_rule.radius(r, rd.s);
            let k_n = DecayCertificate::new(r, rd.s, true)?.tail(n);
            let u = 1.0 + rd.c * k_n;
            let rho = Multiplier::scaled(Multiplier::truncated_heat(r, n)?, u)?;
            let defect = map_defect(f, &rho, &rd, &opts.power)?;
            Ok(ConvergenceRow {
                r,
                n,
                u,
                k_n,
                defect_lower: defect.bracket.lower,
                defect_upper: defect.bracket.upper,
                runtime_ms: opts
                    .record_timing
                    .then(|| start.elapsed().as_secs_f64() * 1e3),
            })
        })
        .collect()
}

/// Index of the first row whose `defect_upper` is below `epsilon`.
pub fn select_epsilon(rows: &[ConvergenceRow], epsilon: f64) -> Result<Option<usize>> {
    if rows.is_empty() {
        return Err(Error::EmptySchedule);
    }
    Ok(rows.iter().position(|row| row.defect_upper < epsilon))
}
