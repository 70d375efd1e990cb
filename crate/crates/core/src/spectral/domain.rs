use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary condition of the box `(0, L_1) x ... x (0, L_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// `u = u'' = 0` at both ends; one dimension only.
    Dirichlet,
    /// `L`-periodic and odd under `x -> -x`; sine modes only.
    OddPeriodic,
    /// `L`-periodic with the mean removed.
    Periodic,
}

impl Boundary {
    pub fn name(self) -> &'static str {
        match self {
            Boundary::Dirichlet => "dirichlet",
            Boundary::OddPeriodic => "odd-periodic",
            Boundary::Periodic => "periodic",
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "dirichlet" => Ok(Boundary::Dirichlet),
            "odd-periodic" | "oddperiodic" => Ok(Boundary::OddPeriodic),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::Range(format!("unknown boundary condition '{other}'"))),
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Sin,
    Cos,
}

/// A retained basis function: `sin(kappa . x)` or `cos(kappa . x)` with the
/// integer wave vector `k` (unused trailing components are zero).
///
/// The wave vector is sign-normalized: its first nonzero component is positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub k: [i32; 3],
    pub parity: Parity,
}

impl ModeIndex {
    pub fn sin(k: &[i32]) -> Self {
        Self::new(k, Parity::Sin)
    }

    pub fn cos(k: &[i32]) -> Self {
        Self::new(k, Parity::Cos)
    }

    pub fn new(k: &[i32], parity: Parity) -> Self {
        let mut kk = [0; 3];
        kk[..k.len()].copy_from_slice(k);
        Self { k: kk, parity }
    }

    /// Same wave vector with the other parity.
    pub fn partner(&self) -> Self {
        let parity = match self.parity {
            Parity::Sin => Parity::Cos,
            Parity::Cos => Parity::Sin,
        };
        Self { k: self.k, parity }
    }

    pub fn scaled(&self, factor: i32) -> Self {
        Self {
            k: [self.k[0] * factor, self.k[1] * factor, self.k[2] * factor],
            parity: self.parity,
        }
    }

    pub fn squared_index(&self) -> i64 {
        self.k.iter().map(|&k| (k as i64) * (k as i64)).sum()
    }

    fn is_normalized(k: &[i32]) -> bool {
        match k.iter().find(|&&c| c != 0) {
            Some(&c) => c > 0,
            None => false,
        }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.parity {
            Parity::Sin => "sin",
            Parity::Cos => "cos",
        };
        write!(f, "{p}({},{},{})", self.k[0], self.k[1], self.k[2])
    }
}

/// Serializable description of a domain; [`Domain`] adds the derived tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub bc: Boundary,
    pub lengths: Vec<f64>,
    pub band: Vec<usize>,
    pub grid: Vec<usize>,
}

pub(crate) type Plan = Arc<dyn Fft<f64>>;

/// Computational box, boundary condition, retained band and collocation grid.
///
/// Coefficients of a [`SpectralField`](super::SpectralField) are stored densely
/// in the order of [`Domain::modes`], over every sign-normalized wave vector with
/// `|k_a| <= band_a` (Dirichlet: `1 <= k <= band`).
///
/// Wave vectors are `kappa_a = k_a pi / L` for Dirichlet and `kappa_a = 2 pi k_a / L`
/// for the periodic conditions, so that each basis function has period `L`.
/// Internally every transform runs on a periodic box: the Dirichlet interval is
/// odd-extended to period `2L`.
pub struct Domain {
    spec: DomainSpec,
    modes: Vec<ModeIndex>,
    kappa2: Vec<f64>,
    /// Flat positions of `+k` and `-k` in the extended FFT array.
    pub(crate) pos: Vec<usize>,
    pub(crate) neg: Vec<usize>,
    pub(crate) ext_len: Vec<usize>,
    pub(crate) plans: Vec<(Plan, Plan)>,
    /// Sine projection of `cos(m pi x / L)` on `(0, L)`, row-major `band x grid`.
    pub(crate) cos_to_sin: Vec<f64>,
    scale: f64,
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain")
            .field("bc", &self.spec.bc)
            .field("lengths", &self.spec.lengths)
            .field("band", &self.spec.band)
            .field("grid", &self.spec.grid)
            .finish()
    }
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

fn next_pow2_above(n: usize) -> usize {
    (n + 1).next_power_of_two().max(8)
}

impl Domain {
    /// Domain with the smallest power-of-two grid that dealiases cubic products.
    pub fn new(bc: Boundary, lengths: &[f64], band: &[usize]) -> Result<Arc<Self>> {
        let grid: Vec<usize> = band
            .iter()
            .map(|&m| match bc {
                Boundary::Dirichlet => next_pow2_above(2 * m),
                _ => next_pow2_above(4 * m),
            })
            .collect();
        Self::with_grid(bc, lengths, band, &grid)
    }

    /// Line `(0, length)` in one dimension.
    pub fn line(bc: Boundary, length: f64, band: usize) -> Result<Arc<Self>> {
        Self::new(bc, &[length], &[band])
    }

    /// Cube `(0, length)^dim` with a common band.
    pub fn cube(bc: Boundary, dim: usize, length: f64, band: usize) -> Result<Arc<Self>> {
        Self::new(bc, &vec![length; dim], &vec![band; dim])
    }

    pub fn from_spec(spec: &DomainSpec) -> Result<Arc<Self>> {
        Self::with_grid(spec.bc, &spec.lengths, &spec.band, &spec.grid)
    }

    /// Explicit grid. For Dirichlet `grid` counts intervals (`grid - 1` interior
    /// collocation points); for the periodic conditions it counts points per period.
    pub fn with_grid(
        bc: Boundary,
        lengths: &[f64],
        band: &[usize],
        grid: &[usize],
    ) -> Result<Arc<Self>> {
        let dim = lengths.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidDomain(format!("dimension {dim} not in 1..=3")));
        }
        if band.len() != dim || grid.len() != dim {
            return Err(Error::InvalidDomain(
                "lengths, band and grid must have one entry per axis".into(),
            ));
        }
        if bc == Boundary::Dirichlet && dim != 1 {
            return Err(Error::InvalidDomain(
                "Dirichlet conditions are supported in one dimension only".into(),
            ));
        }
        for a in 0..dim {
            if !(lengths[a].is_finite() && lengths[a] > 0.0) {
                return Err(Error::InvalidDomain(format!("length {} must be positive", lengths[a])));
            }
            if band[a] == 0 {
                return Err(Error::InvalidDomain("band must be at least 1".into()));
            }
            if grid[a] < 8 || !grid[a].is_power_of_two() {
                return Err(Error::InvalidDomain(format!(
                    "grid {} must be a power of two >= 8",
                    grid[a]
                )));
            }
            let resolvable = match bc {
                Boundary::Dirichlet => grid[a] > band[a],
                _ => grid[a] > 2 * band[a],
            };
            if !resolvable {
                return Err(Error::InvalidDomain(format!(
                    "grid {} cannot resolve band {} on axis {a}",
                    grid[a], band[a]
                )));
            }
        }

        let spec = DomainSpec {
            bc,
            lengths: lengths.to_vec(),
            band: band.to_vec(),
            grid: grid.to_vec(),
        };
        let ext_len: Vec<usize> = match bc {
            Boundary::Dirichlet => vec![2 * grid[0]],
            _ => grid.to_vec(),
        };
        let periods: Vec<f64> = match bc {
            Boundary::Dirichlet => vec![2.0 * lengths[0]],
            _ => lengths.to_vec(),
        };

        let mut modes = Vec::new();
        match bc {
            Boundary::Dirichlet => {
                for k in 1..=band[0] as i32 {
                    modes.push(ModeIndex::sin(&[k]));
                }
            }
            _ => {
                let mut k = vec![0i32; dim];
                lattice(&spec.band, 0, &mut k, &mut |k| {
                    if ModeIndex::is_normalized(k) {
                        modes.push(ModeIndex::sin(k));
                        if bc == Boundary::Periodic {
                            modes.push(ModeIndex::cos(k));
                        }
                    }
                });
            }
        }

        let mut strides = vec![1usize; dim];
        for a in (0..dim.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * ext_len[a + 1];
        }
        let flat = |k: &[i32; 3], sign: i32| -> usize {
            (0..dim)
                .map(|a| {
                    let n = ext_len[a] as i64;
                    ((sign as i64 * k[a] as i64).rem_euclid(n)) as usize * strides[a]
                })
                .sum()
        };
        let kappa2 = modes
            .iter()
            .map(|m| {
                (0..dim)
                    .map(|a| (2.0 * PI * m.k[a] as f64 / periods[a]).powi(2))
                    .sum()
            })
            .collect();
        let pos = modes.iter().map(|m| flat(&m.k, 1)).collect();
        let neg = modes.iter().map(|m| flat(&m.k, -1)).collect();

        let mut planner = FftPlanner::new();
        let plans = ext_len
            .iter()
            .map(|&n| (planner.plan_fft_forward(n), planner.plan_fft_inverse(n)))
            .collect();

        let volume: f64 = lengths.iter().product();
        let scale = (2.0 / volume).sqrt();

        let cos_to_sin = if bc == Boundary::Dirichlet {
            let l = lengths[0];
            let n_cos = grid[0];
            let mut table = vec![0.0; band[0] * n_cos];
            let pref = (2.0 / l).sqrt() * l / PI;
            for n in 1..=band[0] {
                for m in 0..n_cos {
                    if n != m && (n + m) % 2 == 1 {
                        let (nf, mf) = (n as f64, m as f64);
                        table[(n - 1) * n_cos + m] = pref * 2.0 * nf / (nf * nf - mf * mf);
                    }
                }
            }
            table
        } else {
            Vec::new()
        };

        Ok(Arc::new(Self {
            spec,
            modes,
            kappa2,
            pos,
            neg,
            ext_len,
            plans,
            cos_to_sin,
            scale,
        }))
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn bc(&self) -> Boundary {
        self.spec.bc
    }

    pub fn dim(&self) -> usize {
        self.spec.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.spec.lengths
    }

    pub fn band(&self) -> &[usize] {
        &self.spec.band
    }

    pub fn grid(&self) -> &[usize] {
        &self.spec.grid
    }

    /// Lebesgue measure `|Omega|` of the physical box.
    pub fn volume(&self) -> f64 {
        self.spec.lengths.iter().product()
    }

    /// Normalization `sqrt(2 / |Omega|)` of the basis functions.
    pub fn basis_scale(&self) -> f64 {
        self.scale
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// `|kappa|^2` of every retained mode, aligned with [`Domain::modes`].
    pub fn kappa2(&self) -> &[f64] {
        &self.kappa2
    }

    /// Wave number of axis `a` for integer index `k`.
    pub fn wavenumber(&self, a: usize, k: i32) -> f64 {
        match self.spec.bc {
            Boundary::Dirichlet => k as f64 * PI / self.spec.lengths[a],
            _ => 2.0 * PI * k as f64 / self.spec.lengths[a],
        }
    }

    /// `|kappa|^2` for an arbitrary integer wave vector (need not be retained).
    pub fn kappa2_of(&self, k: &[i32]) -> f64 {
        k.iter()
            .enumerate()
            .map(|(a, &ka)| self.wavenumber(a, ka).powi(2))
            .sum()
    }

    pub fn index_of(&self, mode: &ModeIndex) -> Option<usize> {
        // modes are sorted lexicographically by (k, parity) within the periodic lattice
        // and by k for Dirichlet, so a binary search suffices.
        self.modes.binary_search(mode).ok()
    }

    /// Whether the grid resolves cubic products of band-limited fields exactly.
    pub fn check_dealiased(&self) -> Result<()> {
        for a in 0..self.dim() {
            let (band, grid) = (self.spec.band[a], self.spec.grid[a]);
            let needed = match self.spec.bc {
                Boundary::Dirichlet => 2 * band,
                _ => 4 * band,
            };
            if grid <= needed {
                return Err(Error::Aliasing {
                    axis: a,
                    grid,
                    band,
                    needed,
                });
            }
        }
        Ok(())
    }

    /// Number of points of the physical collocation grid.
    pub fn grid_points(&self) -> usize {
        match self.spec.bc {
            Boundary::Dirichlet => self.spec.grid[0] - 1,
            _ => self.spec.grid.iter().product(),
        }
    }

    pub(crate) fn ext_points(&self) -> usize {
        self.ext_len.iter().product()
    }

    /// Coordinates of physical grid point `i` (row-major, axis 0 slowest).
    pub fn grid_coords(&self, i: usize) -> Vec<f64> {
        match self.spec.bc {
            Boundary::Dirichlet => {
                vec![(i + 1) as f64 * self.spec.lengths[0] / self.spec.grid[0] as f64]
            }
            _ => {
                let dim = self.dim();
                let mut rem = i;
                let mut x = vec![0.0; dim];
                for a in (0..dim).rev() {
                    let n = self.spec.grid[a];
                    x[a] = (rem % n) as f64 * self.spec.lengths[a] / n as f64;
                    rem /= n;
                }
                x
            }
        }
    }

    /// Evaluates basis function `idx` at a point.
    pub fn basis_value(&self, idx: usize, x: &[f64]) -> f64 {
        let m = &self.modes[idx];
        let phase: f64 = (0..self.dim())
            .map(|a| self.wavenumber(a, m.k[a]) * x[a])
            .sum();
        self.scale
            * match m.parity {
                Parity::Sin => phase.sin(),
                Parity::Cos => phase.cos(),
            }
    }
}

fn lattice(band: &[usize], axis: usize, k: &mut Vec<i32>, f: &mut impl FnMut(&[i32])) {
    if axis == band.len() {
        f(k);
        return;
    }
    let m = band[axis] as i32;
    for v in -m..=m {
        k[axis] = v;
        lattice(band, axis + 1, k, f);
    }
}
