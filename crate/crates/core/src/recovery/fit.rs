use serde::Serialize;

use super::binary::logit;
use crate::error::{Error, Result};
use crate::reporting::{report_from_base, Lambda};

/// Empirical means are clipped to `[EMPIRICAL_CLIP, 1 − EMPIRICAL_CLIP]`
/// before taking logits.
pub const EMPIRICAL_CLIP: f64 = 1e-9;

/// One partition's induced base probabilities and empirical bin means.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRow {
    pub label: String,
    pub base: Vec<f64>,
    pub empirical: Vec<f64>,
}

impl FitRow {
    pub fn new(label: impl Into<String>, base: Vec<f64>, empirical: Vec<f64>) -> Result<Self> {
        let row = FitRow {
            label: label.into(),
            base,
            empirical,
        };
        row.validate()?;
        Ok(row)
    }

    fn validate(&self) -> Result<()> {
        if self.base.len() != self.empirical.len() || self.base.len() < 2 {
            return Err(Error::structural(format!(
                "row {}: {} base probabilities and {} empirical means",
                self.label,
                self.base.len(),
                self.empirical.len()
            )));
        }
        if let Some(b) = self.base.iter().find(|b| !(**b > 0.0) || !b.is_finite()) {
            return Err(Error::domain(format!("row {}: base probability {b} is not positive", self.label)));
        }
        if let Some(e) = self.empirical.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::domain(format!("row {}: empirical mean {e} outside [0, 1]", self.label)));
        }
        Ok(())
    }

    fn squared_errors(&self, lambda: f64) -> (f64, usize) {
        let model = report_from_base(&self.base, Lambda::new(lambda).expect("finite λ"))
            .expect("validated base");
        let sse = model
            .iter()
            .zip(&self.empirical)
            .map(|(m, e)| (m - e) * (m - e))
            .sum();
        (sse, model.len())
    }

    /// Bin-level RMSE of the model report at `lambda`.
    pub fn rmse(&self, lambda: f64) -> f64 {
        let (sse, n) = self.squared_errors(lambda);
        (sse / n as f64).sqrt()
    }
}

/// A response format: one partition, or a family fitted as a single entity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitFormat {
    pub name: String,
    pub rows: Vec<FitRow>,
}

/// How a multi-partition format turns its members' errors into one RMSE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyAggregation {
    /// Root of the mean squared error over all member bins.
    #[default]
    Pooled,
    /// Mean of per-member RMSEs.
    MeanOfMembers,
}

impl FitFormat {
    pub fn rmse(&self, lambda: f64, aggregation: FamilyAggregation) -> f64 {
        match aggregation {
            FamilyAggregation::Pooled => {
                let (sse, n) = self
                    .rows
                    .iter()
                    .map(|r| r.squared_errors(lambda))
                    .fold((0.0, 0), |(s, n), (s1, n1)| (s + s1, n + n1));
                (sse / n as f64).sqrt()
            }
            FamilyAggregation::MeanOfMembers => {
                self.rows.iter().map(|r| r.rmse(lambda)).sum::<f64>() / self.rows.len() as f64
            }
        }
    }
}

/// Equal-weight average of format RMSEs.
pub fn rmse(formats: &[FitFormat], lambda: f64, aggregation: FamilyAggregation) -> f64 {
    formats.iter().map(|f| f.rmse(lambda, aggregation)).sum::<f64>() / formats.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub grid_step: f64,
    /// Golden-section refinement stops when the bracket is this narrow.
    pub tol: f64,
    /// Number of best local grid minima refined.
    pub candidates: usize,
    pub aggregation: FamilyAggregation,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            lambda_min: -2.0,
            lambda_max: 4.0,
            grid_step: 0.01,
            tol: 1e-6,
            candidates: 3,
            aggregation: FamilyAggregation::Pooled,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.lambda_min.is_finite()
            && self.lambda_max.is_finite()
            && self.lambda_max > self.lambda_min
            && self.grid_step > 0.0
            && self.tol > 0.0
            && self.candidates > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid fit configuration {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    GridGolden,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub lambda: f64,
    pub rmse: f64,
    /// Per-member RMSE at the fitted `λ`, in input order.
    pub rmse_by_partition: Vec<(String, f64)>,
    /// Per-format RMSE at the fitted `λ`, in input order.
    pub rmse_by_format: Vec<(String, f64)>,
    pub weighting: String,
    pub method: FitMethod,
    /// Empirical means moved by the logit clip.
    pub clipped: usize,
}

/// Minimizes `f` on `[a, b]` by golden-section search; returns `(x, f(x))`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(c, fc), (d, fd), (x, fx)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .expect("non-empty")
}

/// One parabolic step on `f²` through `x − h, x, x + h`. The squared RMSE is
/// smooth at an exact fit where the RMSE itself has a kink. Keeps the better
/// of the two points.
fn polish<F: Fn(f64) -> f64>(f: F, (x, fx): (f64, f64), h: f64) -> (f64, f64) {
    let (g0, g1, g2) = (f(x - h).powi(2), (fx).powi(2), f(x + h).powi(2));
    let curvature = g0 - 2.0 * g1 + g2;
    if !(curvature > 0.0) {
        return (x, fx);
    }
    let step = 0.5 * h * (g0 - g2) / curvature;
    if step.abs() > h {
        return (x, fx);
    }
    let y = x + step;
    let fy = f(y);
    if fy < fx {
        (y, fy)
    } else {
        (x, fx)
    }
}

fn minimize<F: Fn(f64) -> f64>(f: F, config: &FitConfig) -> (f64, f64) {
    let steps = ((config.lambda_max - config.lambda_min) / config.grid_step).round() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| (config.lambda_min + i as f64 * config.grid_step).min(config.lambda_max))
        .collect();
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let last = grid.len() - 1;
    let mut minima: Vec<usize> = (0..=last)
        .filter(|&i| (i == 0 || values[i] <= values[i - 1]) && (i == last || values[i] <= values[i + 1]))
        .collect();
    minima.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    minima.truncate(config.candidates);

    let mut best = minima
        .first()
        .map(|&i| (grid[i], values[i]))
        .expect("grid has a minimum");
    for &i in &minima {
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(last)];
        let (x, fx) = polish(&f, golden_section(&f, lo, hi, config.tol), config.tol);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

fn validate_formats(formats: &[FitFormat]) -> Result<()> {
    if formats.is_empty() || formats.iter().any(|f| f.rows.is_empty()) {
        return Err(Error::structural("fitting needs at least one format with at least one row"));
    }
    for f in formats {
        for r in &f.rows {
            r.validate()?;
        }
    }
    Ok(())
}

fn result_at(
    formats: &[FitFormat],
    lambda: f64,
    aggregation: FamilyAggregation,
    weighting: String,
    method: FitMethod,
) -> FitResult {
    FitResult {
        lambda,
        rmse: rmse(formats, lambda, aggregation),
        rmse_by_partition: formats
            .iter()
            .flat_map(|f| f.rows.iter().map(|r| (r.label.clone(), r.rmse(lambda))))
            .collect(),
        rmse_by_format: formats
            .iter()
            .map(|f| (f.name.clone(), f.rmse(lambda, aggregation)))
            .collect(),
        weighting,
        method,
        clipped: 0,
    }
}

fn aggregation_name(a: FamilyAggregation) -> &'static str {
    match a {
        FamilyAggregation::Pooled => "pooled bins within a format",
        FamilyAggregation::MeanOfMembers => "mean of member RMSEs within a format",
    }
}

/// One `λ` for all formats, minimizing the equal-weight mean of format RMSEs.
pub fn fit_lambda_single(formats: &[FitFormat], config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    validate_formats(formats)?;
    let (lambda, _) = minimize(|l| rmse(formats, l, config.aggregation), config);
    let weighting = format!(
        "equal weight across {} formats; {}",
        formats.len(),
        aggregation_name(config.aggregation)
    );
    Ok(result_at(formats, lambda, config.aggregation, weighting, FitMethod::GridGolden))
}

/// One `λ` shared by every member of a family, fitted as a single format.
pub fn fit_family_common_lambda(rows: &[FitRow], config: &FitConfig) -> Result<FitResult> {
    let format = FitFormat {
        name: "family".into(),
        rows: rows.to_vec(),
    };
    let mut result = fit_lambda_single(std::slice::from_ref(&format), config)?;
    result.weighting = format!("single family; {}", aggregation_name(config.aggregation));
    Ok(result)
}

fn clip(x: f64) -> (f64, bool) {
    let c = x.clamp(EMPIRICAL_CLIP, 1.0 - EMPIRICAL_CLIP);
    (c, c != x)
}

/// `λ` for one partition. Binary partitions whose empirical means sum to one
/// use the exact logit ratio; others are searched.
pub fn fit_lambda_per_partition(row: &FitRow, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    row.validate()?;
    let formats = [FitFormat {
        name: row.label.clone(),
        rows: vec![row.clone()],
    }];
    let emp_sum: f64 = row.empirical.iter().sum();
    if row.base.len() == 2 && (emp_sum - 1.0).abs() <= 1e-6 {
        let total: f64 = row.base.iter().sum();
        let base = row.base[0] / total;
        let (emp, was_clipped) = clip(row.empirical[0]);
        let (lb, le) = (logit(base), logit(emp));
        let lambda = match (lb == 0.0, le == 0.0) {
            (true, true) => 1.0,
            (true, false) => return Err(Error::NoExactFit { empirical: emp }),
            (false, _) => le / lb,
        };
        let mut r = result_at(
            &formats,
            lambda,
            FamilyAggregation::Pooled,
            "single partition".into(),
            FitMethod::ClosedForm,
        );
        r.clipped = usize::from(was_clipped);
        return Ok(r);
    }
    let (lambda, _) = minimize(|l| formats[0].rmse(l, FamilyAggregation::Pooled), config);
    Ok(result_at(
        &formats,
        lambda,
        FamilyAggregation::Pooled,
        "single partition".into(),
        FitMethod::GridGolden,
    ))
}
