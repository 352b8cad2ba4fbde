use super::blockslide::BlockSlideMap;
use super::lattice::Lattice;
use super::partition::PartitionSpec;
use super::TorusError;

/// A bijection of the atoms of a partition: `mapping[a]` is the image of atom `a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomPermutation {
    pub partition: PartitionSpec,
    pub mapping: Vec<usize>,
}

impl AtomPermutation {
    pub fn new(partition: PartitionSpec, mapping: Vec<usize>) -> Result<Self, TorusError> {
        let n = partition.atom_count();
        if mapping.len() != n {
            return Err(TorusError::NotAtomPermutation {
                atom: mapping.len().min(n),
            });
        }
        let mut seen = vec![false; n];
        for (a, &b) in mapping.iter().enumerate() {
            if b >= n || seen[b] {
                return Err(TorusError::NotAtomPermutation { atom: a });
            }
            seen[b] = true;
        }
        Ok(AtomPermutation { partition, mapping })
    }

    pub fn identity(partition: PartitionSpec) -> Self {
        let n = partition.atom_count();
        AtomPermutation {
            partition,
            mapping: (0..n).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(a, &b)| a == b)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.mapping.len()];
        for (a, &b) in self.mapping.iter().enumerate() {
            inv[b] = a;
        }
        AtomPermutation {
            partition: self.partition.clone(),
            mapping: inv,
        }
    }

    /// `self` first, then `other`.
    pub fn then(&self, other: &AtomPermutation) -> Self {
        let mapping = self.mapping.iter().map(|&b| other.mapping[b]).collect();
        AtomPermutation {
            partition: self.partition.clone(),
            mapping,
        }
    }

    /// Non-trivial cycles, each starting at its smallest element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.mapping.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] || self.mapping[s] == s {
                seen[s] = true;
                continue;
            }
            let mut cyc = vec![s];
            seen[s] = true;
            let mut x = self.mapping[s];
            while x != s {
                seen[x] = true;
                cyc.push(x);
                x = self.mapping[x];
            }
            out.push(cyc);
        }
        out
    }

    /// Whether the mapping commutes with the index action of `φ^{1/q}`.
    pub fn is_equivariant(&self, q: u64) -> bool {
        match self.partition.rotation_action(q) {
            None => false,
            Some(rot) => {
                (0..self.mapping.len()).all(|a| self.mapping[rot[a]] == rot[self.mapping[a]])
            }
        }
    }

    /// Cycle notation, e.g. `(0 1)(4 5)`; `()` for the identity.
    pub fn cycle_string(&self) -> String {
        let c = self.cycles();
        if c.is_empty() {
            return "()".into();
        }
        c.iter()
            .map(|cy| {
                format!(
                    "({})",
                    cy.iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                )
            })
            .collect()
    }
}

/// Atom map `from → to` induced by `m`, required to send each atom of `from`
/// onto a single atom of `to`, bijectively.
pub fn induced_atom_map(
    m: &BlockSlideMap,
    from: &PartitionSpec,
    to: &PartitionSpec,
) -> Result<Vec<usize>, TorusError> {
    if from.atom_count() != to.atom_count() {
        return Err(TorusError::NotAtomPermutation { atom: 0 });
    }
    let mut lat = Lattice::new(&[m], &[from, to], &[])?;
    lat.compile(m);
    let den = lat.den.clone();
    let n = from.atom_count();
    let unset = usize::MAX;
    type Acc = Result<Vec<usize>, usize>;
    let merge = |a: Acc, b: Acc| -> Acc {
        let (mut a, b) = (a?, b?);
        for (i, v) in b.into_iter().enumerate() {
            if v == unset {
                continue;
            }
            if a[i] == unset {
                a[i] = v;
            } else if a[i] != v {
                return Err(i);
            }
        }
        Ok(a)
    };
    let res = lat.sweep(
        Ok(vec![unset; n]) as Acc,
        |acc, x, y| {
            if let Ok(v) = acc {
                let a = from.atom_of_units(x, &den);
                let b = to.atom_of_units(y, &den);
                if v[a] == unset {
                    v[a] = b;
                } else if v[a] != b {
                    *acc = Err(a);
                }
            }
        },
        merge,
    );
    let mapping = res.map_err(|atom| TorusError::NotAtomPermutation { atom })?;
    let mut seen = vec![false; n];
    for (a, &b) in mapping.iter().enumerate() {
        if b == unset || seen[b] {
            return Err(TorusError::NotAtomPermutation { atom: a });
        }
        seen[b] = true;
    }
    Ok(mapping)
}

pub fn induced_atom_permutation(
    m: &BlockSlideMap,
    p: &PartitionSpec,
) -> Result<AtomPermutation, TorusError> {
    let mapping = induced_atom_map(m, p, p)?;
    Ok(AtomPermutation {
        partition: p.clone(),
        mapping,
    })
}

/// Exact check of `m ∘ φ^{1/q} = φ^{1/q} ∘ m` on the distinguishing lattice.
pub fn commutes_with_rotation(m: &BlockSlideMap, q: u64) -> Result<bool, TorusError> {
    if q == 0 {
        return Err(TorusError::ParamOutOfRange("q must be positive".into()));
    }
    let mut lat = Lattice::new(&[m], &[], &[q])?;
    lat.compile(m);
    let d0 = lat.den[0];
    let shift = d0 / q;
    let ok = lat.sweep(
        true,
        |acc, x, y| {
            if !*acc {
                return;
            }
            let mut xr = x.to_vec();
            xr[0] = (xr[0] + shift) % d0;
            lat.apply(&mut xr);
            let mut yr = y.to_vec();
            yr[0] = (yr[0] + shift) % d0;
            *acc = xr == yr;
        },
        |a, b| a && b,
    );
    Ok(ok)
}

/// Sufficient structural condition for commuting with `φ^{1/q}`: every step
/// sourced from coordinate 0 is `1/q`-periodic.
pub fn structurally_equivariant(m: &BlockSlideMap, q: u64) -> bool {
    let t = super::point::rat(1, q as i64);
    m.moves()
        .iter()
        .filter(|mv| mv.source == 0)
        .all(|mv| mv.step.is_periodic_with(&t))
}
