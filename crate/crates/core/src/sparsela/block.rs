use crate::scalar::Real;

/// State `(E, B, p)` stored contiguously: edge block, face block, vertex
/// block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector<T = f64> {
    data: Vec<T>,
    sizes: [usize; 3],
}

impl<T: Real> BlockVector<T> {
    pub fn zeros(n_edge: usize, n_face: usize, n_vertex: usize) -> Self {
        Self {
            data: vec![T::zero(); n_edge + n_face + n_vertex],
            sizes: [n_edge, n_face, n_vertex],
        }
    }

    pub fn from_parts(e: &[T], b: &[T], p: &[T]) -> Self {
        let mut data = Vec::with_capacity(e.len() + b.len() + p.len());
        data.extend_from_slice(e);
        data.extend_from_slice(b);
        data.extend_from_slice(p);
        Self {
            data,
            sizes: [e.len(), b.len(), p.len()],
        }
    }

    pub fn from_vec(data: Vec<T>, sizes: [usize; 3]) -> Self {
        assert_eq!(data.len(), sizes.iter().sum::<usize>(), "block sizes do not match data");
        Self { data, sizes }
    }

    pub fn sizes(&self) -> [usize; 3] {
        self.sizes
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn e(&self) -> &[T] {
        &self.data[..self.sizes[0]]
    }

    pub fn b(&self) -> &[T] {
        &self.data[self.sizes[0]..self.sizes[0] + self.sizes[1]]
    }

    pub fn p(&self) -> &[T] {
        &self.data[self.sizes[0] + self.sizes[1]..]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
