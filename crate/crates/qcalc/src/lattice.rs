//! Complex functions sampled on the points `x = σqⁿ`.
//!
//! Every site carries a validity flag. Shifts and differences that would read
//! outside the window produce invalid sites rather than guessing a boundary value.

use std::io::{Read, Write};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("window [{n_min}, {n_max}] is empty or has no sectors")]
    InvalidWindow { n_min: i32, n_max: i32 },
    #[error("lattice functions live on different grids")]
    GridMismatch,
    #[error("parity tag {0:?} contradicts the support of the values")]
    ParityMismatch(Parity),
    #[error("malformed lattice table: {0}")]
    Format(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sector {
    Plus,
    Minus,
}

impl Sector {
    pub fn sign(self) -> f64 {
        match self {
            Sector::Plus => 1.0,
            Sector::Minus => -1.0,
        }
    }

    pub fn from_sign(sigma: i64) -> Option<Sector> {
        match sigma {
            1 => Some(Sector::Plus),
            -1 => Some(Sector::Minus),
            _ => None,
        }
    }

    fn as_int(self) -> i8 {
        match self {
            Sector::Plus => 1,
            Sector::Minus => -1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    #[default]
    Mixed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeGrid {
    q: f64,
    n_min: i32,
    n_max: i32,
    sectors: Vec<Sector>,
}

impl LatticeGrid {
    pub fn new(q: f64, n_min: i32, n_max: i32, sectors: &[Sector]) -> Result<Self, LatticeError> {
        let mut sectors = sectors.to_vec();
        sectors.sort();
        sectors.dedup();
        if n_min >= n_max || sectors.is_empty() {
            return Err(LatticeError::InvalidWindow { n_min, n_max });
        }
        Ok(LatticeGrid { q, n_min, n_max, sectors })
    }

    /// Both sectors on `[n_min, n_max]`.
    pub fn symmetric(q: f64, n_min: i32, n_max: i32) -> Result<Self, LatticeError> {
        Self::new(q, n_min, n_max, &[Sector::Plus, Sector::Minus])
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn lambda(&self) -> f64 {
        self.q - 1.0 / self.q
    }

    pub fn n_min(&self) -> i32 {
        self.n_min
    }

    pub fn n_max(&self) -> i32 {
        self.n_max
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn sites_per_sector(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.sites_per_sector() * self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, sector: Sector, n: i32) -> Option<usize> {
        if n < self.n_min || n > self.n_max {
            return None;
        }
        let s = self.sectors.iter().position(|&t| t == sector)?;
        Some(s * self.sites_per_sector() + (n - self.n_min) as usize)
    }

    /// Site at a flat index.
    pub fn site(&self, idx: usize) -> (Sector, i32) {
        let per = self.sites_per_sector();
        (self.sectors[idx / per], self.n_min + (idx % per) as i32)
    }

    pub fn x(&self, sector: Sector, n: i32) -> f64 {
        sector.sign() * self.q.powi(n)
    }

    pub fn sites(&self) -> impl Iterator<Item = (Sector, i32)> + '_ {
        self.sectors.iter().flat_map(move |&s| (self.n_min..=self.n_max).map(move |n| (s, n)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeFn {
    grid: LatticeGrid,
    values: Vec<Complex64>,
    valid: Vec<bool>,
    parity: Parity,
}

impl LatticeFn {
    pub fn zeros(grid: &LatticeGrid) -> Self {
        LatticeFn {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            valid: vec![true; grid.len()],
            parity: Parity::Mixed,
        }
    }

    /// Samples `f(x)` at every site.
    pub fn from_fn(grid: &LatticeGrid, f: impl Fn(f64) -> Complex64) -> Self {
        Self::from_sites(grid, |s, n| f(grid.x(s, n)))
    }

    pub fn from_sites(grid: &LatticeGrid, f: impl Fn(Sector, i32) -> Complex64) -> Self {
        let mut out = Self::zeros(grid);
        for (idx, (s, n)) in grid.sites().enumerate() {
            out.values[idx] = f(s, n);
        }
        out
    }

    pub fn grid(&self) -> &LatticeGrid {
        &self.grid
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Tags the function as living on even or odd `n` only.
    pub fn with_parity(mut self, parity: Parity) -> Result<Self, LatticeError> {
        let wanted = match parity {
            Parity::Even => 0,
            Parity::Odd => 1,
            Parity::Mixed => {
                self.parity = parity;
                return Ok(self);
            }
        };
        for (idx, (_, n)) in self.grid.sites().enumerate() {
            if n.rem_euclid(2) != wanted && self.valid[idx] && self.values[idx] != Complex64::new(0.0, 0.0) {
                return Err(LatticeError::ParityMismatch(parity));
            }
        }
        self.parity = parity;
        Ok(self)
    }

    /// Value at a valid site.
    pub fn value(&self, sector: Sector, n: i32) -> Option<Complex64> {
        let idx = self.grid.index(sector, n)?;
        self.valid[idx].then_some(self.values[idx])
    }

    pub fn set(&mut self, sector: Sector, n: i32, v: Complex64) {
        if let Some(idx) = self.grid.index(sector, n) {
            self.values[idx] = v;
            self.valid[idx] = true;
        }
    }

    pub fn is_valid(&self, sector: Sector, n: i32) -> bool {
        self.grid.index(sector, n).is_some_and(|i| self.valid[i])
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `(site, value)` over valid sites.
    pub fn valid_sites(&self) -> impl Iterator<Item = (Sector, i32, Complex64)> + '_ {
        self.grid
            .sites()
            .enumerate()
            .filter(|(i, _)| self.valid[*i])
            .map(|(i, (s, n))| (s, n, self.values[i]))
    }

    pub fn same_grid(&self, other: &LatticeFn) -> Result<(), LatticeError> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(LatticeError::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        LatticeFn {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            valid: self.valid.clone(),
            parity: self.parity,
        }
    }

    /// Pointwise map that may read the site.
    pub fn map_sites(&self, f: impl Fn(Sector, i32, Complex64) -> Complex64) -> Self {
        let mut out = self.clone();
        for (idx, (s, n)) in self.grid.sites().enumerate() {
            out.values[idx] = f(s, n, self.values[idx]);
        }
        out
    }

    /// # Panics
    /// If the grids differ; use [`LatticeFn::same_grid`] first when that is possible.
    pub fn zip_with(&self, other: &LatticeFn, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.grid, other.grid, "lattice functions on different grids");
        LatticeFn {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            valid: self.valid.iter().zip(&other.valid).map(|(&a, &b)| a && b).collect(),
            parity: if self.parity == other.parity { self.parity } else { Parity::Mixed },
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    /// `(Lᵏf)(σqⁿ) = f(σq^{n−k})`.
    pub fn shift(&self, k: i32) -> Self {
        let mut out = self.clone();
        for (idx, (s, n)) in self.grid.sites().enumerate() {
            match self.grid.index(s, n - k) {
                Some(src) => {
                    out.values[idx] = self.values[src];
                    out.valid[idx] = self.valid[src];
                }
                None => {
                    out.values[idx] = Complex64::new(0.0, 0.0);
                    out.valid[idx] = false;
                }
            }
        }
        if k % 2 != 0 {
            out.parity = match self.parity {
                Parity::Even => Parity::Odd,
                Parity::Odd => Parity::Even,
                Parity::Mixed => Parity::Mixed,
            };
        }
        out
    }

    /// `(∇f)(σqⁿ) = [f(σq^{n+1}) − f(σq^{n−1})] / (λσqⁿ)`.
    pub fn nabla(&self) -> Self {
        let lam = self.grid.lambda();
        let up = self.shift(-1);
        let down = self.shift(1);
        let grid = &self.grid;
        let mut out = up.zip_with(&down, |a, b| a - b);
        for (idx, (s, n)) in grid.sites().enumerate() {
            out.values[idx] /= lam * grid.x(s, n);
        }
        out.parity = Parity::Mixed;
        out
    }

    /// Multiplies by `xᵏ`.
    pub fn times_x_pow(&self, k: i32) -> Self {
        let grid = &self.grid;
        self.map_sites(|s, n, v| v * grid.x(s, n).powi(k))
    }

    /// Marks sites within `margin` of either window end invalid.
    pub fn interior(&self, margin: i32) -> Self {
        let mut out = self.clone();
        for (idx, (_, n)) in self.grid.sites().enumerate() {
            if n < self.grid.n_min + margin || n > self.grid.n_max - margin {
                out.valid[idx] = false;
            }
        }
        out
    }

    /// Largest modulus over valid sites.
    pub fn max_abs(&self) -> f64 {
        self.valid_sites().map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), LatticeError> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["sigma", "n", "re", "im"])?;
        for (s, n, v) in self.valid_sites() {
            wr.write_record([
                s.as_int().to_string(),
                n.to_string(),
                v.re.to_string(),
                v.im.to_string(),
            ])?;
        }
        wr.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Reads a `sigma,n,re,im` table; sites missing from the table are invalid.
    pub fn read_csv<R: Read>(q: f64, r: R) -> Result<Self, LatticeError> {
        let mut rows = Vec::new();
        for rec in csv::Reader::from_reader(r).deserialize() {
            let row: SiteRecord = rec?;
            rows.push(row);
        }
        Self::from_records(q, None, Parity::Mixed, &rows)
    }

    pub fn to_json(&self) -> Result<String, LatticeError> {
        let doc = LatticeJson {
            q: self.grid.q,
            n_min: self.grid.n_min,
            n_max: self.grid.n_max,
            sectors: self.grid.sectors.iter().map(|s| s.as_int()).collect(),
            parity: self.parity,
            sites: self
                .valid_sites()
                .map(|(s, n, v)| SiteRecord { sigma: s.as_int(), n, re: v.re, im: v.im })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self, LatticeError> {
        let doc: LatticeJson = serde_json::from_str(text)?;
        let sectors = doc
            .sectors
            .iter()
            .map(|&s| Sector::from_sign(s as i64).ok_or_else(|| LatticeError::Format(format!("sector {s}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let grid = LatticeGrid::new(doc.q, doc.n_min, doc.n_max, &sectors)?;
        Self::from_records(doc.q, Some(grid), doc.parity, &doc.sites)
    }

    fn from_records(
        q: f64,
        grid: Option<LatticeGrid>,
        parity: Parity,
        rows: &[SiteRecord],
    ) -> Result<Self, LatticeError> {
        let grid = match grid {
            Some(g) => g,
            None => {
                let n_min = rows.iter().map(|r| r.n).min().ok_or_else(|| LatticeError::Format("no rows".into()))?;
                let n_max = rows.iter().map(|r| r.n).max().unwrap_or(n_min);
                let sectors = rows
                    .iter()
                    .map(|r| Sector::from_sign(r.sigma as i64).ok_or_else(|| LatticeError::Format(format!("sigma {}", r.sigma))))
                    .collect::<Result<Vec<_>, _>>()?;
                LatticeGrid::new(q, n_min, n_max.max(n_min + 1), &sectors)?
            }
        };
        let mut out = LatticeFn::zeros(&grid);
        out.valid.iter_mut().for_each(|v| *v = false);
        for r in rows {
            let s = Sector::from_sign(r.sigma as i64).ok_or_else(|| LatticeError::Format(format!("sigma {}", r.sigma)))?;
            let idx = grid
                .index(s, r.n)
                .ok_or_else(|| LatticeError::Format(format!("site ({}, {}) outside window", r.sigma, r.n)))?;
            out.values[idx] = Complex64::new(r.re, r.im);
            out.valid[idx] = true;
        }
        out.with_parity(parity)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SiteRecord {
    sigma: i8,
    n: i32,
    re: f64,
    im: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct LatticeJson {
    q: f64,
    n_min: i32,
    n_max: i32,
    sectors: Vec<i8>,
    parity: Parity,
    sites: Vec<SiteRecord>,
}

impl Add for &LatticeFn {
    type Output = LatticeFn;
    fn add(self, rhs: &LatticeFn) -> LatticeFn {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &LatticeFn {
    type Output = LatticeFn;
    fn sub(self, rhs: &LatticeFn) -> LatticeFn {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &LatticeFn {
    type Output = LatticeFn;
    fn mul(self, rhs: &LatticeFn) -> LatticeFn {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl Neg for &LatticeFn {
    type Output = LatticeFn;
    fn neg(self) -> LatticeFn {
        self.map(|v| -v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> LatticeGrid {
        LatticeGrid::symmetric(2.0, -4, 4).unwrap()
    }

    #[test]
    fn shift_is_scale_map() {
        let g = grid();
        let f = LatticeFn::from_fn(&g, |x| Complex64::new(x * x, 0.0));
        let lf = f.shift(1);
        assert_eq!(lf.value(Sector::Plus, 2), Some(Complex64::new(4.0, 0.0)));
        assert!(!lf.is_valid(Sector::Plus, -4));
    }

    #[test]
    fn nabla_of_square() {
        let g = grid();
        let f = LatticeFn::from_fn(&g, |x| Complex64::new(x * x, 0.0));
        let d = f.nabla();
        for (s, n, v) in d.valid_sites() {
            let want = (2.0 + 0.5) * g.x(s, n);
            assert!((v.re - want).abs() < 1e-12 * want.abs().max(1.0));
        }
        assert!(!d.is_valid(Sector::Minus, 4));
    }

    #[test]
    fn parity_tag_checks_support() {
        let g = grid();
        let f = LatticeFn::from_sites(&g, |_, n| Complex64::new(if n % 2 == 0 { 1.0 } else { 0.0 }, 0.0));
        assert!(f.clone().with_parity(Parity::Even).is_ok());
        assert!(f.with_parity(Parity::Odd).is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let g = grid();
        let f = LatticeFn::from_fn(&g, |x| Complex64::new(x.sin() / 3.0, 1e-300 * x));
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = LatticeFn::read_csv(2.0, buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn json_round_trip_keeps_parity() {
        let g = grid();
        let f = LatticeFn::from_sites(&g, |_, n| Complex64::new(if n % 2 != 0 { 0.1 * n as f64 } else { 0.0 }, 0.0))
            .with_parity(Parity::Odd)
            .unwrap();
        let back = LatticeFn::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
    }
}
