use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("t = {t} lies outside the solution domain [{start}, {end}]")]
pub struct DomainError {
    pub t: f64,
    pub start: f64,
    pub end: f64,
}

/// A scalar solution that can be evaluated anywhere on its domain.
pub trait Evaluate {
    /// Closed time interval on which [`Evaluate::value_at`] succeeds.
    fn domain(&self) -> (f64, f64);

    fn value_at(&self, t: f64) -> Result<f64, DomainError>;

    fn sample(&self, grid: &[f64]) -> Result<Vec<f64>, DomainError> {
        grid.iter().map(|&t| self.value_at(t)).collect()
    }
}

impl<T: Evaluate + ?Sized> Evaluate for &T {
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }

    fn value_at(&self, t: f64) -> Result<f64, DomainError> {
        (**self).value_at(t)
    }
}

/// `n + 1` points `start + k * step`, with the last point snapped to `end`.
pub fn uniform_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && end >= start);
    let n = ((end - start) / step - 1e-9).ceil().max(0.0) as usize;
    let mut grid: Vec<f64> = (0..n).map(|k| start + k as f64 * step).collect();
    grid.push(end);
    grid
}
