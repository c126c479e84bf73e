use std::fmt;

use crate::error::{Error, Result};

/// Integer wavevector `α ∈ Z^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex(pub Vec<i32>);

impl ModeIndex {
    pub fn zero(dim: usize) -> Self {
        ModeIndex(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Euclidean magnitude `|α|`.
    pub fn magnitude(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|&a| (a as f64) * (a as f64)).sum()
    }
}

impl From<Vec<i32>> for ModeIndex {
    fn from(v: Vec<i32>) -> Self {
        ModeIndex(v)
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Box-truncated mode lattice `{α ∈ Z^n : |α_i| ≤ L}` on a torus of side `l`.
///
/// Modes are stored in lexicographic order of `(α_1, …, α_n)`, with the first
/// component most significant. Because the box is symmetric, the flat index of
/// `−α` is `len − 1 − index(α)` and the zero mode sits at `len / 2`. Every
/// matrix assembly and every serialized field uses this order.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeLattice {
    dim: usize,
    truncation: usize,
    torus_size: f64,
    side: usize,
    len: usize,
    coords: Vec<i32>,
    norm_sq: Vec<f64>,
}

impl ModeLattice {
    pub fn new(dim: usize, truncation: usize, torus_size: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("n", "dimension must be at least 1"));
        }
        if !(torus_size > 0.0 && torus_size.is_finite()) {
            return Err(Error::param("l", format!("torus size must be positive, got {torus_size}")));
        }
        let side = 2 * truncation + 1;
        let len = side
            .checked_pow(dim as u32)
            .filter(|&len| len <= 1 << 24)
            .ok_or_else(|| Error::param("L", "lattice too large"))?;
        let mut coords = Vec::with_capacity(len * dim);
        let mut norm_sq = Vec::with_capacity(len);
        for flat in 0..len {
            let mut rem = flat;
            let start = coords.len();
            coords.resize(start + dim, 0);
            for axis in (0..dim).rev() {
                coords[start + axis] = (rem % side) as i32 - truncation as i32;
                rem /= side;
            }
            norm_sq.push(
                coords[start..start + dim]
                    .iter()
                    .map(|&a| (a as f64) * (a as f64))
                    .sum(),
            );
        }
        Ok(ModeLattice {
            dim,
            truncation,
            torus_size,
            side,
            len,
            coords,
            norm_sq,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    #[inline]
    pub fn torus_size(&self) -> f64 {
        self.torus_size
    }

    /// Number of retained modes, `(2L+1)^n`.
    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn zero_index(&self) -> usize {
        self.len / 2
    }

    #[inline]
    pub fn neg_index(&self, k: usize) -> usize {
        self.len - 1 - k
    }

    /// Components of the `k`-th wavevector.
    #[inline]
    pub fn alpha(&self, k: usize) -> &[i32] {
        &self.coords[k * self.dim..(k + 1) * self.dim]
    }

    pub fn mode(&self, k: usize) -> ModeIndex {
        ModeIndex(self.alpha(k).to_vec())
    }

    /// `|α|²` for the `k`-th mode.
    #[inline]
    pub fn norm_sq(&self, k: usize) -> f64 {
        self.norm_sq[k]
    }

    #[inline]
    pub fn magnitude(&self, k: usize) -> f64 {
        self.norm_sq[k].sqrt()
    }

    /// Flat index of `α`, or `None` when `α` lies outside the box.
    pub fn index_of(&self, alpha: &[i32]) -> Option<usize> {
        if alpha.len() != self.dim {
            return None;
        }
        let bound = self.truncation as i32;
        let mut flat = 0usize;
        for &a in alpha {
            if a.abs() > bound {
                return None;
            }
            flat = flat * self.side + (a + bound) as usize;
        }
        Some(flat)
    }

    /// Flat index of `α_a + α_b` if it is retained.
    #[inline]
    pub fn sum_index(&self, a: usize, b: usize) -> Option<usize> {
        let bound = self.truncation as i32;
        let (xa, xb) = (self.alpha(a), self.alpha(b));
        let mut flat = 0usize;
        for axis in 0..self.dim {
            let s = xa[axis] + xb[axis];
            if s.abs() > bound {
                return None;
            }
            flat = flat * self.side + (s + bound) as usize;
        }
        Some(flat)
    }

    /// Flat index of `α_a − α_b` if it is retained.
    #[inline]
    pub fn diff_index(&self, a: usize, b: usize) -> Option<usize> {
        self.sum_index(a, self.neg_index(b))
    }

    /// `|α_a − α_b|` (always defined, even when the difference leaves the box).
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.alpha(a)
            .iter()
            .zip(self.alpha(b))
            .map(|(&x, &y)| {
                let d = (x - y) as f64;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Wavenumber factor `2π/l`.
    #[inline]
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.torus_size
    }

    pub fn same_shape(&self, other: &ModeLattice) -> bool {
        self.dim == other.dim && self.truncation == other.truncation && self.torus_size == other.torus_size
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[i32])> + '_ {
        (0..self.len).map(move |k| (k, self.alpha(k)))
    }
}
