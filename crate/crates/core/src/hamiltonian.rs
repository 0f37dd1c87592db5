//! Which pairwise coupling to simulate and between which atoms.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lattice::{displacement_pairs, LatticeConfig, OccupancyMask};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CouplingKind {
    /// `χ Σ j_z,k j_z,l` (Ising).
    Zz,
    /// `Σ χ j_z j_z + η j_x j_x + λ j_y j_y`.
    Heisenberg,
    /// `Σ χ_{k,l} j_x,k j_x,l`.
    Xx,
    /// `Σ χ_{k,l} (j_x,k j_x,l − j_y,k j_y,l)`.
    XxMinusYy,
    /// `Σ χ_{k,l} h_k j_x,k h_l j_x,l` with `χ_{k,l}` symmetric.
    PartialXx,
}

impl CouplingKind {
    pub fn label(self) -> &'static str {
        match self {
            CouplingKind::Zz => "zz",
            CouplingKind::Heisenberg => "heisenberg",
            CouplingKind::Xx => "xx",
            CouplingKind::XxMinusYy => "xxyy",
            CouplingKind::PartialXx => "partial_xx",
        }
    }

    /// Whether every term commutes, so a single pass is exact.
    pub fn is_exact(self) -> bool {
        matches!(
            self,
            CouplingKind::Zz | CouplingKind::Xx | CouplingKind::PartialXx
        )
    }
}

impl fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CouplingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zz" => Ok(CouplingKind::Zz),
            "heisenberg" => Ok(CouplingKind::Heisenberg),
            "xx" => Ok(CouplingKind::Xx),
            "xxyy" | "xx_minus_yy" => Ok(CouplingKind::XxMinusYy),
            "partial_xx" => Ok(CouplingKind::PartialXx),
            other => Err(Error::Argument(format!("unknown coupling kind {other:?}"))),
        }
    }
}

/// One ordered entry of the coupling table, in lattice-site indices.
/// `weight` multiplies the kind's axis coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairCoupling {
    pub site_k: usize,
    pub site_l: usize,
    pub displacement: i64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec {
    pub kind: CouplingKind,
    pub chi: f64,
    pub eta: f64,
    pub lambda: f64,
    pub range: usize,
    pub lattice: LatticeConfig,
    pub mask: Option<OccupancyMask>,
    overrides: Vec<(usize, usize, f64)>,
}

impl HamiltonianSpec {
    pub fn new(kind: CouplingKind, lattice: LatticeConfig) -> Self {
        Self {
            kind,
            chi: 1.0,
            eta: 0.0,
            lambda: 0.0,
            range: 1,
            lattice,
            mask: None,
            overrides: Vec::new(),
        }
    }

    pub fn heisenberg(lattice: LatticeConfig, chi: f64, eta: f64, lambda: f64) -> Self {
        Self {
            eta,
            lambda,
            ..Self::new(CouplingKind::Heisenberg, lattice).with_chi(chi)
        }
    }

    pub fn with_chi(mut self, chi: f64) -> Self {
        self.chi = chi;
        self
    }

    pub fn with_range(mut self, range: usize) -> Self {
        self.range = range;
        self
    }

    pub fn with_mask(mut self, mask: OccupancyMask) -> Self {
        self.mask = Some(mask);
        self
    }

    /// Replaces the weight of the ordered site pair `(k, l)` wherever it
    /// appears in the table.
    pub fn with_override(mut self, k: usize, l: usize, weight: f64) -> Self {
        self.overrides.push((k, l, weight));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.range == 0 {
            return Err(Error::Argument("neighbor range must be at least 1".into()));
        }
        for (name, v) in [
            ("chi", self.chi),
            ("eta", self.eta),
            ("lambda", self.lambda),
        ] {
            if !v.is_finite() {
                return Err(Error::Argument(format!("{name} must be finite, got {v}")));
            }
        }
        if self.kind == CouplingKind::PartialXx && self.mask.is_none() {
            return Err(Error::Argument(
                "partial_xx coupling requires an occupancy mask".into(),
            ));
        }
        if let Some(mask) = &self.mask {
            if mask.num_sites() != self.lattice.num_sites() {
                return Err(Error::Validation(format!(
                    "mask covers {} sites, lattice has {}",
                    mask.num_sites(),
                    self.lattice.num_sites()
                )));
            }
        }
        if self.overrides.iter().any(|o| !o.2.is_finite()) {
            return Err(Error::Argument("coupling override must be finite".into()));
        }
        Ok(())
    }

    pub fn effective_mask(&self) -> OccupancyMask {
        self.mask
            .clone()
            .unwrap_or_else(|| OccupancyMask::full(self.lattice.num_sites()))
    }

    /// Number of spins in the simulated register.
    pub fn atom_count(&self) -> usize {
        self.mask
            .as_ref()
            .map_or(self.lattice.num_sites(), OccupancyMask::atom_count)
    }

    /// Displacements are limited to `d < M`; a range of `M − 1` or more couples
    /// every pair of a periodic lattice.
    pub fn effective_range(&self) -> usize {
        self.range.min(self.lattice.num_sites() - 1)
    }

    /// Coefficients of `(j_x j_x, j_y j_y, j_z j_z)` per unit pair weight.
    pub fn axis_coefficients(&self) -> [f64; 3] {
        match self.kind {
            CouplingKind::Zz => [0.0, 0.0, self.chi],
            CouplingKind::Heisenberg => [self.eta, self.lambda, self.chi],
            CouplingKind::Xx | CouplingKind::PartialXx => [self.chi, 0.0, 0.0],
            CouplingKind::XxMinusYy => [self.chi, -self.chi, 0.0],
        }
    }

    /// Ordered pair table for displacements `d = 1..=r`. Every kind except
    /// `PartialXx` visits in the `+d` direction with unit weight. `PartialXx`
    /// visits both `±d` with weight 1/2 each, so `χ_{k,l}` is symmetric and
    /// each atom pair carries the same total coupling as in the one-directional
    /// table.
    pub fn coupling_table(&self) -> Result<Vec<PairCoupling>> {
        self.validate()?;
        let mask = self.effective_mask();
        let range = self.effective_range() as i64;
        let (directions, weight): (&[i64], f64) = match self.kind {
            CouplingKind::PartialXx => (&[1, -1], 0.5),
            _ => (&[1], 1.0),
        };
        let mut table = Vec::new();
        for d in 1..=range {
            for &sign in directions {
                let displacement = sign * d;
                for (k, l) in displacement_pairs(&self.lattice, &mask, displacement)? {
                    let weight = self
                        .overrides
                        .iter()
                        .rev()
                        .find(|o| o.0 == k && o.1 == l)
                        .map_or(weight, |o| o.2);
                    table.push(PairCoupling {
                        site_k: k,
                        site_l: l,
                        displacement,
                        weight,
                    });
                }
            }
        }
        Ok(table)
    }

    /// Coupling table translated to register (atom) indices.
    pub fn register_table(&self) -> Result<Vec<PairCoupling>> {
        let index = self.effective_mask().register_indices();
        self.coupling_table()?
            .into_iter()
            .map(|p| match (index[p.site_k], index[p.site_l]) {
                (Some(k), Some(l)) => Ok(PairCoupling {
                    site_k: k,
                    site_l: l,
                    ..p
                }),
                _ => Err(Error::Validation("coupling touches an empty site".into())),
            })
            .collect()
    }

    /// `χ_{k,l}` entries of the `j_x j_x` coupling in site indices, for the
    /// initial-slope prediction.
    pub fn xx_couplings(&self) -> Result<Vec<PairCoupling>> {
        let cx = self.axis_coefficients()[0];
        Ok(self
            .coupling_table()?
            .into_iter()
            .map(|p| PairCoupling {
                weight: p.weight * cx,
                ..p
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Boundary;

    #[test]
    fn table_sizes() {
        let ring = LatticeConfig::periodic(15).unwrap();
        let spec = HamiltonianSpec::new(CouplingKind::Xx, ring).with_range(3);
        assert_eq!(spec.coupling_table().unwrap().len(), 45);

        let partial = HamiltonianSpec::new(CouplingKind::PartialXx, ring)
            .with_range(2)
            .with_mask(OccupancyMask::full(15));
        let table = partial.coupling_table().unwrap();
        assert_eq!(table.len(), 60);
        assert!(table.iter().all(|p| p.weight == 0.5));
    }

    #[test]
    fn range_is_clamped_below_lattice_size() {
        let ring = LatticeConfig::periodic(5).unwrap();
        let spec = HamiltonianSpec::new(CouplingKind::Xx, ring).with_range(5);
        assert_eq!(spec.effective_range(), 4);
        assert_eq!(spec.coupling_table().unwrap().len(), 20);
    }

    #[test]
    fn partial_requires_mask() {
        let ring = LatticeConfig::periodic(6).unwrap();
        let spec = HamiltonianSpec::new(CouplingKind::PartialXx, ring);
        assert!(matches!(spec.validate(), Err(Error::Argument(_))));
    }

    #[test]
    fn register_table_skips_empty_sites() {
        let ring = LatticeConfig::new(6, Boundary::Periodic).unwrap();
        let mask: OccupancyMask = "110010".parse().unwrap();
        let spec = HamiltonianSpec::new(CouplingKind::PartialXx, ring).with_mask(mask);
        let table = spec.register_table().unwrap();
        // sites 0, 1, 4 hold atoms; only 0 and 1 are adjacent
        let pairs: Vec<_> = table.iter().map(|p| (p.site_k, p.site_l)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 0)]);
        assert_eq!(spec.atom_count(), 3);
    }

    #[test]
    fn overrides_replace_weights() {
        let ring = LatticeConfig::periodic(4).unwrap();
        let spec = HamiltonianSpec::new(CouplingKind::Zz, ring).with_override(1, 2, 3.0);
        let table = spec.coupling_table().unwrap();
        assert_eq!(table.iter().find(|p| p.site_k == 1).unwrap().weight, 3.0);
        assert_eq!(table.iter().filter(|p| p.weight == 1.0).count(), 3);
    }

    #[test]
    fn kind_labels_parse_back() {
        for kind in [
            CouplingKind::Zz,
            CouplingKind::Heisenberg,
            CouplingKind::Xx,
            CouplingKind::XxMinusYy,
            CouplingKind::PartialXx,
        ] {
            assert_eq!(kind.label().parse::<CouplingKind>().unwrap(), kind);
        }
    }
}
