//! Chain geometry, random occupancy and the site pairs brought together by a
//! lattice displacement.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Upper bound on lattice sites. The register only stores occupied sites, so
/// this limits bookkeeping, not memory.
pub const MAX_LATTICE_SITES: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    Open,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LatticeConfig {
    num_sites: usize,
    boundary: Boundary,
}

impl LatticeConfig {
    pub fn new(num_sites: usize, boundary: Boundary) -> Result<Self> {
        if num_sites < 2 {
            return Err(Error::Argument(format!(
                "a lattice needs at least 2 sites, got {num_sites}"
            )));
        }
        if num_sites > MAX_LATTICE_SITES {
            return Err(Error::Capacity {
                what: "lattice sites",
                requested: num_sites,
                limit: MAX_LATTICE_SITES,
            });
        }
        Ok(Self {
            num_sites,
            boundary,
        })
    }

    pub fn periodic(num_sites: usize) -> Result<Self> {
        Self::new(num_sites, Boundary::Periodic)
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Site reached from `site` by a signed displacement, or `None` if the
    /// displacement leaves an open chain.
    pub fn shift(&self, site: usize, displacement: i64) -> Option<usize> {
        let m = self.num_sites as i64;
        let raw = site as i64 + displacement;
        match self.boundary {
            Boundary::Periodic => Some(raw.rem_euclid(m) as usize),
            Boundary::Open => (0..m).contains(&raw).then_some(raw as usize),
        }
    }
}

/// Which lattice sites hold an atom (`h_k`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OccupancyMask {
    bits: Vec<bool>,
    atom_count: usize,
}

impl OccupancyMask {
    pub fn full(num_sites: usize) -> Self {
        Self::from_bits(vec![true; num_sites])
    }

    pub fn empty(num_sites: usize) -> Self {
        Self::from_bits(vec![false; num_sites])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        let atom_count = bits.iter().filter(|&&b| b).count();
        Self { bits, atom_count }
    }

    pub fn num_sites(&self) -> usize {
        self.bits.len()
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn is_occupied(&self, site: usize) -> bool {
        self.bits.get(site).copied().unwrap_or(false)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn occupied_sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(k, &b)| b.then_some(k))
    }

    /// Register index of each lattice site (`None` for empty sites). Atoms are
    /// numbered in increasing site order.
    pub fn register_indices(&self) -> Vec<Option<usize>> {
        let mut next = 0;
        self.bits
            .iter()
            .map(|&b| {
                b.then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    }
}

impl fmt::Display for OccupancyMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for OccupancyMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '1' => Ok(true),
                '0' => Ok(false),
                other => Err(Error::Argument(format!(
                    "occupancy strings hold only 0/1, found {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::from_bits)
    }
}

/// Counter-based stream for one ensemble member: ChaCha8 keyed by the master
/// seed, with the realization index selecting the stream. Realizations can be
/// drawn in any order or in parallel.
pub fn realization_rng(master_seed: u64, realization: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(realization);
    rng
}

/// Places exactly `atom_count` atoms on distinct sites chosen uniformly.
pub fn sample_occupancy(
    lattice: &LatticeConfig,
    atom_count: usize,
    master_seed: u64,
    realization: u64,
) -> Result<OccupancyMask> {
    let m = lattice.num_sites();
    if atom_count > m {
        return Err(Error::Infeasible(format!(
            "cannot place {atom_count} atoms on {m} sites"
        )));
    }
    let mut rng = realization_rng(master_seed, realization);
    let mut bits = vec![false; m];
    for site in rand::seq::index::sample(&mut rng, m, atom_count) {
        bits[site] = true;
    }
    Ok(OccupancyMask::from_bits(bits))
}

/// Ordered site pairs `(k, k+d)` that both hold atoms. On an open chain pairs
/// that would cross the edge are dropped.
pub fn displacement_pairs(
    lattice: &LatticeConfig,
    mask: &OccupancyMask,
    displacement: i64,
) -> Result<Vec<(usize, usize)>> {
    let m = lattice.num_sites();
    if mask.num_sites() != m {
        return Err(Error::Validation(format!(
            "mask covers {} sites, lattice has {m}",
            mask.num_sites()
        )));
    }
    let d = displacement.unsigned_abs() as usize;
    if d == 0 || d >= m {
        return Err(Error::Argument(format!(
            "displacement must satisfy 1 <= |d| < {m}, got {displacement}"
        )));
    }
    Ok(mask
        .occupied_sites()
        .filter_map(|k| {
            lattice
                .shift(k, displacement)
                .filter(|&l| mask.is_occupied(l))
                .map(|l| (k, l))
        })
        .collect())
}

/// Ensemble average `⟨h_k h_l⟩` over the given masks.
pub fn pair_correlation(masks: &[OccupancyMask], k: usize, l: usize) -> Result<f64> {
    if masks.is_empty() {
        return Err(Error::Argument(
            "pair correlation of an empty ensemble".into(),
        ));
    }
    let hits = masks
        .iter()
        .filter(|m| m.is_occupied(k) && m.is_occupied(l))
        .count();
    Ok(hits as f64 / masks.len() as f64)
}

/// Exact `⟨h_k h_l⟩` (k ≠ l) when `atom_count` atoms are placed uniformly on
/// `num_sites` sites: `N(N−1) / (M(M−1))`.
pub fn exact_count_pair_correlation(atom_count: usize, num_sites: usize) -> f64 {
    let (n, m) = (atom_count as f64, num_sites as f64);
    n * (n - 1.0) / (m * (m - 1.0))
}
