//! One simulation with all of its derived artifacts.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::bounds::{self, BoundReport, DecayBound};
use crate::diagnostics::{self, CurvatureMode, EnergyTrace};
use crate::error::{Error, Result};
use crate::problem::BeamProblem;
use crate::stepper::{self, Resolution, SolutionTrace};

pub const TRACE_FILE: &str = "trace.csv";
pub const ENERGY_FILE: &str = "energy.csv";
pub const BOUNDS_FILE: &str = "bounds.json";

#[derive(Debug)]
pub struct Simulation {
    pub trace: SolutionTrace,
    pub energy: EnergyTrace,
    /// Absent when the problem has no admissible penalty; the reason is kept.
    pub bound: std::result::Result<BoundReport, Error>,
}

/// Runs the problem, then computes energies and, when a decay estimate
/// applies, the bound report with envelope checks.
///
/// An explicit `lambda` outside the window is an error; without one, a problem
/// with no admissible window still simulates and records why.
pub fn simulate(
    problem: &BeamProblem,
    resolution: &Resolution,
    lambda: Option<f64>,
    mode: CurvatureMode,
) -> Result<Simulation> {
    let trace = stepper::run_at(problem, resolution)?;
    let bound = match DecayBound::compute(problem, Some(&trace), lambda) {
        Ok(b) => Ok(b),
        Err(e @ (Error::NoAdmissibleLambda(_) | Error::VelocityConditionFails { .. })) if lambda.is_none() => Err(e),
        Err(e) => return Err(e),
    };
    let energy = diagnostics::energy(&trace, bound.as_ref().ok().map(|b| b.lambda), mode)?;
    let bound = match bound {
        Ok(b) => {
            let envelope = bounds::verify_envelopes(&energy, &b);
            Ok(BoundReport::new(&b, Some(envelope))?)
        }
        Err(e) => Err(e),
    };
    Ok(Simulation { trace, energy, bound })
}

impl Simulation {
    pub fn bounds_json(&self) -> Result<String> {
        match &self.bound {
            Ok(report) => report.to_json(),
            Err(e) => {
                let (beta0, beta1) = bounds::beta_constants(&self.trace.problem);
                let value = json!({ "beta0": beta0, "beta1": beta1, "error": e.to_string() });
                let mut s = serde_json::to_string_pretty(&value)?;
                s.push('\n');
                Ok(s)
            }
        }
    }

    /// Writes the trace, energy and bound files into `dir`, creating it if needed.
    pub fn write_outputs(&self, dir: &Path, decimation: usize) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let paths = [dir.join(TRACE_FILE), dir.join(ENERGY_FILE), dir.join(BOUNDS_FILE)];
        self.trace.write_csv(BufWriter::new(File::create(&paths[0])?), decimation)?;
        self.energy.write_csv(BufWriter::new(File::create(&paths[1])?))?;
        fs::write(&paths[2], self.bounds_json()?)?;
        Ok(paths.to_vec())
    }
}
