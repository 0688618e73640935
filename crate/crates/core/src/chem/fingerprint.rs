use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::graph::ring_bonds;
use super::Molecule;

/// Fixed-width bit vector produced by [`Molecule::morgan_fingerprint`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint {
    nbits: usize,
    words: Vec<u64>,
}

impl Fingerprint {
    pub fn new(nbits: usize) -> Fingerprint {
        Fingerprint {
            nbits,
            words: vec![0; nbits.div_ceil(64)],
        }
    }

    pub fn len(&self) -> usize {
        self.nbits
    }

    pub fn is_empty(&self) -> bool {
        self.nbits == 0
    }

    pub fn set(&mut self, bit: usize) {
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn on_bits(&self) -> Vec<usize> {
        (0..self.nbits).filter(|&b| self.get(b)).collect()
    }

    pub fn tanimoto(&self, other: &Fingerprint) -> f64 {
        let inter: u32 = self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum();
        let union: u32 = self.words.iter().zip(&other.words).map(|(a, b)| (a | b).count_ones()).sum();
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv(values: &[u64]) -> u64 {
    let mut h = FNV_OFFSET;
    for v in values {
        for byte in v.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

/// Identifiers of every distinct circular environment up to `radius`;
/// environments covering an already seen bond set are dropped.
pub(crate) fn environment_ids(mol: &Molecule, radius: usize) -> Vec<u64> {
    let n = mol.num_atoms();
    let in_ring = ring_bonds(mol.adjacency(), mol.bonds().len());
    let mut ids: Vec<u64> = (0..n)
        .map(|i| {
            let a = mol.atom(i);
            let ring = mol.neighbors(i).iter().any(|&(_, b)| in_ring[b]);
            fnv(&[
                a.element.0 as u64,
                mol.degree(i) as u64,
                a.hydrogens as u64,
                (a.charge as i64) as u64,
                a.aromatic as u64,
                ring as u64,
            ])
        })
        .collect();
    let mut out: Vec<u64> = ids.clone();
    let mut seen_envs: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut coverage: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for layer in 1..=radius {
        let mut next_ids = Vec::with_capacity(n);
        let mut next_cov = Vec::with_capacity(n);
        let mut layer_envs: Vec<(Vec<usize>, u64)> = Vec::new();
        for i in 0..n {
            let mut nb: Vec<(u64, u64)> = mol
                .neighbors(i)
                .iter()
                .map(|&(j, b)| (mol.bonds()[b].order.code(), ids[j]))
                .collect();
            nb.sort_unstable();
            let mut vals = vec![layer as u64, ids[i]];
            for (o, id) in nb {
                vals.push(o);
                vals.push(id);
            }
            let id = fnv(&vals);
            let mut cov = coverage[i].clone();
            for &(j, b) in mol.neighbors(i) {
                cov.insert(b);
                cov.extend(coverage[j].iter().copied());
            }
            layer_envs.push((cov.iter().copied().collect(), id));
            next_ids.push(id);
            next_cov.push(cov);
        }
        layer_envs.sort();
        for (env, id) in layer_envs {
            if !env.is_empty() && seen_envs.insert(env) {
                out.push(id);
            }
        }
        ids = next_ids;
        coverage = next_cov;
    }
    out.sort_unstable();
    out.dedup();
    out
}

pub(crate) fn morgan(mol: &Molecule, radius: usize, nbits: usize) -> Fingerprint {
    assert!(nbits.is_power_of_two(), "fingerprint width must be a power of two");
    let mut fp = Fingerprint::new(nbits);
    for id in environment_ids(mol, radius) {
        fp.set((id % nbits as u64) as usize);
    }
    fp
}
