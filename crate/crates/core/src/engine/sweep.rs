use std::io::{self, Write};

use super::{run_ensemble, EngineConfig};
use crate::error::{Error, Result};
use crate::hamiltonian::Variant;
use crate::instance::QlspInstance;
use crate::rng::derive_seed;
use crate::schedule::build_schedule_with_steps;

pub const CSV_COLUMNS: &str =
    "q,error,inv_error,expected_time_T,variant,kappa,n,d,nrep,master_seed";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub q: usize,
    pub error: f64,
    pub inv_error: f64,
    pub expected_time_t: f64,
    pub variant: Variant,
    pub kappa: f64,
    pub n: u32,
    pub d: usize,
    pub n_rep: usize,
    pub master_seed: u64,
}

impl SweepRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{},{:.16e},{},{},{},{}",
            self.q,
            self.error,
            self.inv_error,
            self.expected_time_t,
            self.variant,
            self.kappa,
            self.n,
            self.d,
            self.n_rep,
            self.master_seed
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Least-squares fit of `1/error` against `q`.
    pub fn inverse_error_fit(&self) -> Option<LinearFit> {
        let xs: Vec<f64> = self.rows.iter().map(|r| r.q as f64).collect();
        let ys: Vec<f64> = self.rows.iter().map(|r| r.inv_error).collect();
        linear_fit(&xs, &ys)
    }

    /// Writes `# config:` lines, the column header, then one row per `q`.
    pub fn write_csv<W: Write>(&self, w: &mut W, config: &[String]) -> io::Result<()> {
        for line in config {
            writeln!(w, "# config: {line}")?;
        }
        writeln!(w, "{CSV_COLUMNS}")?;
        for row in &self.rows {
            writeln!(w, "{}", row.to_csv_line())?;
        }
        Ok(())
    }
}

/// Runs one ensemble per `q` on a single instance. Row `q` uses the master
/// seed `derive_seed(master_seed, q)`, so each row is independent of the rest
/// of the list.
pub fn error_vs_q_sweep(
    inst: &QlspInstance,
    q_list: &[usize],
    variant: Variant,
    n_rep: usize,
    master_seed: u64,
    cfg: &EngineConfig,
) -> Result<SweepResult> {
    if q_list.is_empty() {
        return Err(Error::invalid("q list must not be empty"));
    }
    if !q_list.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid("q list must be strictly ascending"));
    }
    let rows = q_list
        .iter()
        .map(|&q| {
            let sched = build_schedule_with_steps(inst.kappa(), variant, q)?;
            let res = run_ensemble(inst, &sched, n_rep, derive_seed(master_seed, q as u64), cfg)?;
            Ok(SweepRow {
                q,
                error: res.error,
                inv_error: 1.0 / res.error,
                expected_time_t: res.total_expected_time,
                variant,
                kappa: inst.kappa(),
                n: inst.n(),
                d: inst.d(),
                n_rep,
                master_seed,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepResult { rows })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`. `None` for fewer than two
/// points, constant `x`, or non-finite data.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_fits_perfectly() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let fit = linear_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 2.5).abs() < 1e-14);
        assert!((fit.intercept + 1.0).abs() < 1e-14);
        assert!((fit.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_fits_rejected() {
        assert!(linear_fit(&[1.0], &[2.0]).is_none());
        assert!(linear_fit(&[1.0, 1.0], &[2.0, 3.0]).is_none());
        assert!(linear_fit(&[1.0, 2.0], &[f64::INFINITY, 3.0]).is_none());
    }

    #[test]
    fn csv_layout() {
        let row = SweepRow {
            q: 10,
            error: 0.25,
            inv_error: 4.0,
            expected_time_t: 100.0,
            variant: Variant::GapAmplified,
            kappa: 2.0,
            n: 1,
            d: 2,
            n_rep: 5,
            master_seed: 42,
        };
        let mut out = Vec::new();
        SweepResult { rows: vec![row] }
            .write_csv(&mut out, &["x=1".to_string()])
            .unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "# config: x=1\n\
             q,error,inv_error,expected_time_T,variant,kappa,n,d,nrep,master_seed\n\
             10,2.5000000000000000e-1,4.0000000000000000e0,1.0000000000000000e2,amplified,2.0000000000000000e0,1,2,5,42\n"
        );
    }
}
