//! Inclusive `start:stop:step` grids for sweeps. A bare number is a
//! one-point grid.

use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn single(x: f64) -> Grid {
        Grid {
            start: x,
            stop: x,
            step: 1.0,
        }
    }

    /// Grid points, rounded to 12 decimals so that 0:1:0.1 prints cleanly.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=count)
            .map(|k| {
                let x = self.start + k as f64 * self.step;
                (x * 1e12).round() / 1e12
            })
            .collect()
    }

    pub fn check_within(&self, name: &str, lo: f64, hi: f64) -> Result<(), String> {
        if self.start < lo || self.stop > hi {
            return Err(format!("{name} grid {self} leaves [{lo}, {hi}]"));
        }
        Ok(())
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.start == self.stop {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}:{}:{}", self.start, self.stop, self.step)
        }
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Grid, String> {
        let num = |t: &str| -> Result<f64, String> {
            let x: f64 = t.trim().parse().map_err(|_| format!("{t:?} is not a number"))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("{t:?} is not finite"))
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        let grid = match parts.as_slice() {
            [x] => Grid::single(num(x)?),
            [a, b, c] => Grid {
                start: num(a)?,
                stop: num(b)?,
                step: num(c)?,
            },
            _ => return Err(format!("expected start:stop:step or a number, got {s:?}")),
        };
        if !(grid.step > 0.0) {
            return Err(format!("step must be positive in {s:?}"));
        }
        if grid.stop < grid.start {
            return Err(format!("empty grid {s:?}: stop is below start"));
        }
        Ok(grid)
    }
}
