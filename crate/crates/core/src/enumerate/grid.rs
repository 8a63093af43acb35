use crate::error::{Error, Result};
use crate::lattice::{BoundingBox, Domain, Point};

/// Largest number of cells a dense grid may have.
pub(crate) const MAX_CELLS: u128 = 1 << 27;

/// Dense row-major indexing of a box, padded by one cell on every side so
/// that neighbours of interior cells never need a bounds check.
#[derive(Clone, Debug)]
pub(crate) struct Grid {
    lo: Vec<i64>,
    ext: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
    inner: BoundingBox,
}

impl Grid {
    /// Grid whose interior is `inner`.
    pub fn new(inner: &BoundingBox) -> Result<Grid> {
        let lo: Vec<i64> = inner.lo.iter().map(|v| v - 1).collect();
        let ext: Vec<usize> = inner
            .lo
            .iter()
            .zip(&inner.hi)
            .map(|(l, h)| (h - l + 3).max(2) as usize)
            .collect();
        let total: u128 = ext.iter().map(|&e| e as u128).product();
        if total > MAX_CELLS {
            return Err(Error::TooLarge(format!(
                "enumeration window of {total} cells exceeds the limit of {MAX_CELLS}"
            )));
        }
        let d = ext.len();
        let mut strides = vec![1usize; d];
        for j in (0..d.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * ext[j + 1];
        }
        Ok(Grid {
            lo,
            ext,
            strides,
            len: total as usize,
            inner: inner.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn inner(&self) -> &BoundingBox {
        &self.inner
    }

    pub fn index(&self, p: &Point) -> Option<usize> {
        if p.dim() != self.lo.len() {
            return None;
        }
        let mut idx = 0usize;
        for j in 0..self.lo.len() {
            let off = p.0[j] - self.lo[j];
            if off < 0 || off as usize >= self.ext[j] {
                return None;
            }
            idx += off as usize * self.strides[j];
        }
        Some(idx)
    }

    pub fn point(&self, mut idx: usize) -> Point {
        let mut c = vec![0i64; self.lo.len()];
        for j in 0..self.lo.len() {
            c[j] = self.lo[j] + (idx / self.strides[j]) as i64;
            idx %= self.strides[j];
        }
        Point(c)
    }

    /// Index offsets of the neighbours in canonical order `+e1, -e1, +e2, ...`.
    pub fn offsets(&self) -> Vec<isize> {
        self.strides
            .iter()
            .flat_map(|&s| [s as isize, -(s as isize)])
            .collect()
    }

    /// Contiguous index runs `(start, len)` covering a sub-box of the grid,
    /// along the last axis.
    pub fn runs(&self, sub: &BoundingBox) -> Vec<(usize, usize)> {
        let d = self.lo.len();
        let len = (sub.hi[d - 1] - sub.lo[d - 1] + 1).max(0) as usize;
        if len == 0 {
            return Vec::new();
        }
        let mut heads = sub.clone();
        heads.hi[d - 1] = heads.lo[d - 1];
        heads
            .points()
            .map(|p| (self.index(&p).expect("sub-box of the grid"), len))
            .collect()
    }

    /// Cells of the interior that belong to `domain`.
    pub fn mask(&self, domain: &Domain) -> Vec<bool> {
        let mut m = vec![false; self.len];
        let bb = match domain.bounding_box() {
            Some(b) => match b.intersect(&self.inner) {
                Some(x) => x,
                None => return m,
            },
            None => self.inner.clone(),
        };
        for p in bb.points() {
            if domain.contains_point(&p) {
                m[self.index(&p).expect("interior point")] = true;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trips_and_offsets_are_neighbours() {
        let inner = BoundingBox::around(&Point::new(vec![1, -2, 0]), 2);
        let g = Grid::new(&inner).unwrap();
        assert_eq!(g.len(), 7 * 7 * 7);
        let p = Point::new(vec![2, -3, 1]);
        let i = g.index(&p).unwrap();
        assert_eq!(g.point(i), p);
        let offs = g.offsets();
        for (k, q) in p.neighbors().iter().enumerate() {
            assert_eq!(g.index(q).unwrap() as isize, i as isize + offs[k]);
        }
    }

    #[test]
    fn mask_excludes_padding() {
        let inner = BoundingBox::around(&Point::origin(2), 1);
        let g = Grid::new(&inner).unwrap();
        let m = g.mask(&Domain::full(2));
        assert_eq!(m.iter().filter(|b| **b).count(), 9);
        assert!(!m[g.index(&Point::new(vec![2, 0])).unwrap()]);
    }
}
