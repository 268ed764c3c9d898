//! Piecewise-constant refractive-index profiles on `[0, L]` and the admissible
//! sets they are optimized over. The exterior index is always 1.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest lower material bound accepted by [`AdmissibleSet`].
pub const N_MINUS_FLOOR: f64 = 1e-6;

/// Relative tolerance used when identifying breakpoints that coincide after
/// reflection about `L/2`.
const BREAKPOINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub x0: f64,
    pub x1: f64,
    pub n: f64,
}

impl Cell {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }
}

/// Refractive index `n(x)` on `[0, L]`, constant on each cell.
///
/// Cells are stored by their exact endpoints so long stacks do not accumulate
/// width round-off. Values are immutable once built; every edit returns a new
/// structure.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstantStructure {
    length: f64,
    cells: Vec<Cell>,
}

#[derive(Serialize, Deserialize)]
struct StructureFile {
    #[serde(rename = "L")]
    length: f64,
    cells: Vec<Cell>,
}

impl PiecewiseConstantStructure {
    pub fn new(length: f64, cells: Vec<Cell>) -> Result<Self> {
        check_cells(length, &cells)?;
        Ok(Self { length, cells })
    }

    /// `m` equal cells with the given values.
    pub fn from_values(length: f64, values: &[f64]) -> Result<Self> {
        let m = values.len();
        if m == 0 {
            return Err(Error::Structure {
                index: 0,
                reason: "empty cell list".into(),
            });
        }
        let cells = values
            .iter()
            .enumerate()
            .map(|(k, &n)| Cell {
                x0: grid_point(length, k, m),
                x1: grid_point(length, k + 1, m),
                n,
            })
            .collect();
        Self::new(length, cells)
    }

    pub fn uniform(length: f64, m: usize, n: f64) -> Result<Self> {
        Self::from_values(length, &vec![n; m])
    }

    /// Rebuild with the same geometry and new cell values.
    pub fn with_values(&self, values: &[f64]) -> Result<Self> {
        if values.len() != self.cells.len() {
            return Err(Error::Precondition(format!(
                "expected {} values, got {}",
                self.cells.len(),
                values.len()
            )));
        }
        let cells = self
            .cells
            .iter()
            .zip(values)
            .map(|(c, &n)| Cell { n, ..*c })
            .collect();
        Self::new(self.length, cells)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.n).collect()
    }

    pub fn n_max(&self) -> f64 {
        self.cells.iter().map(|c| c.n).fold(f64::MIN, f64::max)
    }

    pub fn n_min(&self) -> f64 {
        self.cells.iter().map(|c| c.n).fold(f64::MAX, f64::min)
    }

    /// Index of the cell containing `x`; interior breakpoints belong to the
    /// cell on their right, `x = L` to the last cell.
    pub fn cell_index(&self, x: f64) -> Option<usize> {
        if !(0.0..=self.length).contains(&x) {
            return None;
        }
        let k = self.cells.partition_point(|c| c.x1 <= x);
        Some(k.min(self.cells.len() - 1))
    }

    /// `n(x)`, with `n = 1` outside `[0, L]`.
    pub fn n_at(&self, x: f64) -> f64 {
        match self.cell_index(x) {
            Some(k) => self.cells[k].n,
            None => 1.0,
        }
    }

    /// Breakpoints `0 = b_0 < b_1 < ... < b_M = L`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.cells.iter().map(|c| c.x0).collect();
        b.push(self.length);
        b
    }

    /// The mirror image `x -> L - x`.
    pub fn reversed(&self) -> Self {
        let l = self.length;
        let cells = self
            .cells
            .iter()
            .rev()
            .map(|c| Cell {
                x0: l - c.x1,
                x1: l - c.x0,
                n: c.n,
            })
            .collect::<Vec<_>>();
        let mut cells = cells;
        // pin the ends exactly
        cells[0].x0 = 0.0;
        let last = cells.len() - 1;
        cells[last].x1 = l;
        Self { length: l, cells }
    }

    /// L-infinity distance between `n(x)` and `n(L - x)`.
    pub fn asymmetry(&self) -> f64 {
        let grid = self.mirrored_grid();
        grid.windows(2)
            .map(|w| {
                let m = 0.5 * (w[0] + w[1]);
                (self.n_at(m) - self.n_at(self.length - m)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Average `n(x)` with `n(L - x)` on the merged breakpoint grid.
    pub fn symmetrize(&self) -> Self {
        let l = self.length;
        let grid = self.mirrored_grid();
        let mut cells: Vec<Cell> = grid
            .windows(2)
            .map(|w| Cell {
                x0: w[0],
                x1: w[1],
                n: 0.0,
            })
            .collect();
        let m = cells.len();
        for k in 0..m.div_ceil(2) {
            let c = cells[k];
            let mid = 0.5 * (c.x0 + c.x1);
            let v = 0.5 * (self.n_at(mid) + self.n_at(l - mid));
            cells[k].n = v;
            cells[m - 1 - k].n = v;
        }
        Self { length: l, cells }
    }

    /// Coalesce runs of adjacent cells whose values span at most `tol`.
    pub fn merge_cells(&self, tol: f64) -> Self {
        let mut out: Vec<Cell> = Vec::with_capacity(self.cells.len());
        let mut start = 0;
        while start < self.cells.len() {
            let mut lo = self.cells[start].n;
            let mut hi = lo;
            let mut end = start + 1;
            while end < self.cells.len() {
                let n = self.cells[end].n;
                let (nlo, nhi) = (lo.min(n), hi.max(n));
                if nhi - nlo > tol {
                    break;
                }
                lo = nlo;
                hi = nhi;
                end += 1;
            }
            let run = &self.cells[start..end];
            let n = if lo == hi {
                lo
            } else {
                let w: f64 = run.iter().map(Cell::width).sum();
                run.iter().map(|c| c.n * c.width()).sum::<f64>() / w
            };
            out.push(Cell {
                x0: run[0].x0,
                x1: run[run.len() - 1].x1,
                n,
            });
            start = end;
        }
        Self {
            length: self.length,
            cells: out,
        }
    }

    /// Breakpoints together with their reflections, arranged so the grid is
    /// mirror symmetric. Original breakpoints win over reflected copies that
    /// land within round-off of them.
    fn mirrored_grid(&self) -> Vec<f64> {
        let l = self.length;
        let tol = BREAKPOINT_TOL * l;
        let half = 0.5 * l;
        let originals = self.breakpoints();
        // (position, is_original)
        let mut pts: Vec<(f64, bool)> = originals.iter().map(|&b| (b, true)).collect();
        pts.extend(originals.iter().map(|&b| (l - b, false)));
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left: Vec<(f64, bool)> = Vec::new();
        for p in pts.into_iter().filter(|p| p.0 <= half + tol) {
            match left.last_mut() {
                Some(last) if (p.0 - last.0).abs() <= tol => {
                    if p.1 && !last.1 {
                        *last = p;
                    }
                }
                _ => left.push(p),
            }
        }
        let mut left: Vec<f64> = left.into_iter().map(|p| p.0).collect();
        left[0] = 0.0;
        let has_center = left
            .last()
            .is_some_and(|&p| (p - half).abs() <= tol);
        let snap = |target: f64| -> f64 {
            originals
                .iter()
                .copied()
                .find(|&b| (b - target).abs() <= tol)
                .unwrap_or(target)
        };
        let mut grid = left.clone();
        let right_start = if has_center { left.len() - 1 } else { left.len() };
        for &p in left[..right_start].iter().rev() {
            grid.push(snap(l - p));
        }
        let last = grid.len() - 1;
        grid[last] = l;
        grid
    }

    pub fn to_json_string(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{{\"L\": {:.16e}, \"cells\": [", self.length);
        for (k, c) in self.cells.iter().enumerate() {
            if k > 0 {
                s.push_str(", ");
            }
            let _ = write!(
                s,
                "{{\"x0\": {:.16e}, \"x1\": {:.16e}, \"n\": {:.16e}}}",
                c.x0, c.x1, c.n
            );
        }
        s.push_str("]}\n");
        s
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: StructureFile = serde_json::from_str(text)?;
        Self::new(file.length, file.cells)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

fn grid_point(length: f64, k: usize, m: usize) -> f64 {
    if k == m {
        length
    } else {
        length * k as f64 / m as f64
    }
}

/// Structural checks shared by every constructor.
pub fn check_cells(length: f64, cells: &[Cell]) -> Result<()> {
    let err = |index: usize, reason: String| Err(Error::Structure { index, reason });
    if !(length.is_finite() && length > 0.0) {
        return err(0, format!("length {length} must be positive and finite"));
    }
    if cells.is_empty() {
        return err(0, "empty cell list".into());
    }
    if cells[0].x0 != 0.0 {
        return err(0, format!("first cell starts at {} instead of 0", cells[0].x0));
    }
    let last = cells.len() - 1;
    if cells[last].x1 != length {
        return err(
            last,
            format!("last cell ends at {} instead of L = {}", cells[last].x1, length),
        );
    }
    for (k, c) in cells.iter().enumerate() {
        if !(c.x0.is_finite() && c.x1.is_finite()) || c.x1 <= c.x0 {
            return err(k, format!("non-positive width [{}, {}]", c.x0, c.x1));
        }
        if !(c.n.is_finite() && c.n > 0.0) {
            return err(k, format!("index value {} must be finite and positive", c.n));
        }
        if k < last {
            let next = cells[k + 1].x0;
            if next > c.x1 {
                return err(k, format!("gap between {} and {}", c.x1, next));
            }
            if next < c.x1 {
                return err(k, format!("overlap between {} and {}", next, c.x1));
            }
        }
    }
    Ok(())
}

/// Constraint data: support `[0, L]`, material bounds, the `|Re omega|`
/// window `rho`, and whether only mirror-symmetric profiles are admitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleSet {
    #[serde(rename = "L")]
    pub length: f64,
    pub n_minus: f64,
    pub n_plus: f64,
    pub rho: f64,
    #[serde(default)]
    pub symmetric: bool,
}

impl AdmissibleSet {
    pub fn new(length: f64, n_minus: f64, n_plus: f64, rho: f64, symmetric: bool) -> Result<Self> {
        let a = Self {
            length,
            n_minus,
            n_plus,
            rho,
            symmetric,
        };
        a.check()?;
        Ok(a)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::Admissible(format!("L = {} must be positive", self.length)));
        }
        if !(self.n_minus >= N_MINUS_FLOOR && self.n_minus < self.n_plus && self.n_plus.is_finite())
        {
            return Err(Error::Admissible(format!(
                "need {} <= n_minus < n_plus < inf, got [{}, {}]",
                N_MINUS_FLOOR, self.n_minus, self.n_plus
            )));
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::Admissible(format!("rho = {} must be positive", self.rho)));
        }
        Ok(())
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.n_minus + self.n_plus)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundViolation {
    pub cell: usize,
    pub n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub member: bool,
    pub within_bounds: bool,
    pub length_matches: bool,
    pub violations: Vec<BoundViolation>,
    /// Present only when the admissible set demands symmetry.
    pub asymmetry: Option<f64>,
}

/// Membership of `s` in the admissible set `a` (or its symmetric subset).
pub fn validate_structure(s: &PiecewiseConstantStructure, a: &AdmissibleSet) -> MembershipReport {
    let violations: Vec<BoundViolation> = s
        .cells()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.n < a.n_minus || c.n > a.n_plus)
        .map(|(cell, c)| BoundViolation { cell, n: c.n })
        .collect();
    let within_bounds = violations.is_empty();
    let length_matches = s.length() == a.length;
    let asymmetry = a.symmetric.then(|| s.asymmetry());
    let symmetric_ok = asymmetry.is_none_or(|d| d == 0.0);
    MembershipReport {
        member: within_bounds && length_matches && symmetric_ok,
        within_bounds,
        length_matches,
        violations,
        asymmetry,
    }
}

/// Clamp every cell value into `[n_minus, n_plus]`; geometry is untouched.
pub fn project_to_admissible(
    s: &PiecewiseConstantStructure,
    a: &AdmissibleSet,
) -> PiecewiseConstantStructure {
    let cells = s
        .cells()
        .iter()
        .map(|c| Cell {
            n: c.n.clamp(a.n_minus, a.n_plus),
            ..*c
        })
        .collect();
    PiecewiseConstantStructure {
        length: s.length(),
        cells,
    }
}
