//! Moment / free-cumulant transform for set-indexed scalar functions.
//! The same machinery serves the semicircle averages, the exponential
//! moments phi, and the divided differences m.

use crate::error::CoreError;
use crate::ncp::{enumerate_ncp, mobius_to_top, GroundSet};
use crate::numeric::KahanSumC;
use crate::C64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest order a [`SetFunction`] supports.
pub const SET_FUNCTION_CAP: usize = 12;

/// A complex-valued function on the nonempty subsets of `[k]`, stored
/// densely: index `mask - 1` holds the value on the subset whose bit `i`
/// means element `i + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SetFunction {
    k: usize,
    table: Vec<C64>,
}

fn check_order(k: usize) -> Result<(), CoreError> {
    if k == 0 || k > SET_FUNCTION_CAP {
        return Err(CoreError::SizeLimit {
            what: "set function order",
            cap: SET_FUNCTION_CAP,
            got: k,
        });
    }
    Ok(())
}

impl SetFunction {
    pub fn zeros(k: usize) -> Result<Self, CoreError> {
        check_order(k)?;
        Ok(SetFunction {
            k,
            table: vec![C64::new(0.0, 0.0); (1 << k) - 1],
        })
    }

    /// Fills the table by evaluating `f` on every nonempty subset,
    /// passed as a sorted list of elements of `[k]`.
    pub fn from_fn(
        k: usize,
        mut f: impl FnMut(&[u32]) -> C64,
    ) -> Result<Self, CoreError> {
        let mut sf = SetFunction::zeros(k)?;
        let mut subset: Vec<u32> = Vec::with_capacity(k);
        for mask in 1u32..(1 << k) {
            subset.clear();
            for i in 0..k {
                if mask & (1 << i) != 0 {
                    subset.push(i as u32 + 1);
                }
            }
            sf.table[(mask - 1) as usize] = f(&subset);
        }
        Ok(sf)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get_mask(&self, mask: u32) -> C64 {
        debug_assert!(mask >= 1 && mask < (1u32 << self.k));
        self.table[(mask - 1) as usize]
    }

    pub fn set_mask(&mut self, mask: u32, v: C64) {
        self.table[(mask - 1) as usize] = v;
    }

    pub fn mask_of(&self, subset: &[u32]) -> Result<u32, CoreError> {
        let mut mask = 0u32;
        for &e in subset {
            if e == 0 || e as usize > self.k {
                return Err(CoreError::validation(format!(
                    "element {e} outside [1, {}]",
                    self.k
                )));
            }
            let bit = 1u32 << (e - 1);
            if mask & bit != 0 {
                return Err(CoreError::validation("repeated subset element"));
            }
            mask |= bit;
        }
        if mask == 0 {
            return Err(CoreError::validation("empty subset"));
        }
        Ok(mask)
    }

    pub fn get(&self, subset: &[u32]) -> Result<C64, CoreError> {
        Ok(self.get_mask(self.mask_of(subset)?))
    }

    pub fn subset_of(mask: u32) -> Vec<u32> {
        (0..32)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| i + 1)
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct SetFunctionEntry {
    subset: Vec<u32>,
    re: f64,
    im: f64,
}

impl Serialize for SetFunction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<SetFunctionEntry> = (1u32..(1 << self.k))
            .map(|mask| {
                let v = self.get_mask(mask);
                SetFunctionEntry {
                    subset: SetFunction::subset_of(mask),
                    re: v.re,
                    im: v.im,
                }
            })
            .collect();
        entries.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SetFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let entries = Vec::<SetFunctionEntry>::deserialize(d)?;
        let k = entries
            .iter()
            .flat_map(|e| e.subset.iter().copied())
            .max()
            .ok_or_else(|| D::Error::custom("empty set function"))? as usize;
        let mut sf = SetFunction::zeros(k).map_err(D::Error::custom)?;
        let mut seen = vec![false; (1 << k) - 1];
        for e in &entries {
            let mask = sf.mask_of(&e.subset).map_err(D::Error::custom)?;
            if std::mem::replace(&mut seen[(mask - 1) as usize], true) {
                return Err(D::Error::custom("duplicate subset entry"));
            }
            sf.set_mask(mask, C64::new(e.re, e.im));
        }
        if !seen.iter().all(|&s| s) {
            return Err(D::Error::custom("incomplete set function table"));
        }
        Ok(sf)
    }
}

/// Partitions of `[1..=size]` with blocks as 0-based position lists,
/// paired with their Möbius value to the top. Enumerated once per size
/// and reused for every subset of that size.
struct PartitionShapes {
    by_size: Vec<Vec<(Vec<Vec<usize>>, i64)>>,
}

impl PartitionShapes {
    fn new(k: usize) -> Self {
        let mut by_size = Vec::with_capacity(k + 1);
        by_size.push(Vec::new());
        for j in 1..=k {
            let shapes = enumerate_ncp(&GroundSet::first_n(j))
                .expect("size under cap")
                .into_iter()
                .map(|pi| {
                    let mu = mobius_to_top(&pi);
                    let blocks = pi
                        .blocks()
                        .iter()
                        .map(|b| b.iter().map(|&e| (e - 1) as usize).collect())
                        .collect();
                    (blocks, mu)
                })
                .collect();
            by_size.push(shapes);
        }
        PartitionShapes { by_size }
    }
}

fn subset_elements(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

/// Free cumulants by Möbius inversion over the NCP lattice:
/// fc[S] = sum over pi in NCP(S) of mu(pi, 1_S) * prod over blocks of f[B].
pub fn free_cumulant_table(f: &SetFunction) -> Result<SetFunction, CoreError> {
    let k = f.k();
    let shapes = PartitionShapes::new(k);
    let mut out = SetFunction::zeros(k)?;
    for mask in 1u32..(1 << k) {
        let elems = subset_elements(mask);
        let mut acc = KahanSumC::default();
        for (blocks, mu) in &shapes.by_size[elems.len()] {
            let mut prod = C64::new(*mu as f64, 0.0);
            for b in blocks {
                let mut bmask = 0u32;
                for &p in b {
                    bmask |= 1 << elems[p];
                }
                prod *= f.get_mask(bmask);
            }
            acc.add(prod);
        }
        out.set_mask(mask, acc.value());
    }
    Ok(out)
}

/// Moments from free cumulants: f[S] = sum over pi of prod over blocks
/// of fc[B]. Exact inverse of [`free_cumulant_table`].
pub fn moments_from_cumulants(fc: &SetFunction) -> Result<SetFunction, CoreError> {
    let k = fc.k();
    let shapes = PartitionShapes::new(k);
    let mut out = SetFunction::zeros(k)?;
    for mask in 1u32..(1 << k) {
        let elems = subset_elements(mask);
        let mut acc = KahanSumC::default();
        for (blocks, _) in &shapes.by_size[elems.len()] {
            let mut prod = C64::new(1.0, 0.0);
            for b in blocks {
                let mut bmask = 0u32;
                for &p in b {
                    bmask |= 1 << elems[p];
                }
                prod *= fc.get_mask(bmask);
            }
            acc.add(prod);
        }
        out.set_mask(mask, acc.value());
    }
    Ok(out)
}
