use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Append-only vector whose full chunks are shared between clones, so that
/// duplicating a particle does not copy its history.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkedVec<T> {
    chunk: usize,
    frozen: Vec<Arc<Vec<T>>>,
    tail: Vec<T>,
}

impl<T: Clone> ChunkedVec<T> {
    pub fn new(chunk: usize) -> Self {
        assert!(chunk > 0);
        Self {
            chunk,
            frozen: Vec::new(),
            tail: Vec::with_capacity(chunk.min(64)),
        }
    }

    pub fn len(&self) -> usize {
        self.frozen.len() * self.chunk + self.tail.len()
    }

    pub fn push(&mut self, value: T) {
        self.tail.push(value);
        if self.tail.len() == self.chunk {
            let full = std::mem::replace(&mut self.tail, Vec::with_capacity(self.chunk.min(64)));
            self.frozen.push(Arc::new(full));
        }
    }

    /// Appends a slice that must not straddle a chunk boundary; used for
    /// fixed-width rows with `chunk` a multiple of the row width.
    pub fn push_row(&mut self, row: &[T]) {
        debug_assert!(self.tail.len() + row.len() <= self.chunk);
        self.tail.extend_from_slice(row);
        if self.tail.len() == self.chunk {
            let full = std::mem::replace(&mut self.tail, Vec::with_capacity(self.chunk.min(64)));
            self.frozen.push(Arc::new(full));
        }
    }

    #[cfg(test)]
    pub fn get(&self, i: usize) -> Option<&T> {
        let (c, o) = (i / self.chunk, i % self.chunk);
        match self.frozen.get(c) {
            Some(chunk) => chunk.get(o),
            None if c == self.frozen.len() => self.tail.get(o),
            None => None,
        }
    }

    /// Contiguous pieces in order.
    pub fn slices(&self) -> impl Iterator<Item = &[T]> {
        self.frozen
            .iter()
            .map(|c| c.as_slice())
            .chain(std::iter::once(self.tail.as_slice()))
    }

    /// Contiguous pieces covering elements `from..`.
    pub fn slices_from(&self, from: usize) -> impl Iterator<Item = &[T]> {
        let mut skip = from;
        self.slices().filter_map(move |s| {
            if skip >= s.len() {
                skip -= s.len();
                None
            } else {
                let out = &s[skip..];
                skip = 0;
                Some(out)
            }
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.slices().flat_map(|s| s.iter())
    }

    pub fn to_vec(&self) -> Vec<T> {
        self.iter().cloned().collect()
    }
}

#[derive(Serialize, Deserialize)]
struct Repr<T> {
    chunk: usize,
    items: Vec<T>,
}

impl<T: Clone + Serialize> Serialize for ChunkedVec<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Repr {
            chunk: self.chunk,
            items: self.to_vec(),
        }
        .serialize(s)
    }
}

impl<'de, T: Clone + Deserialize<'de>> Deserialize<'de> for ChunkedVec<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = Repr::<T>::deserialize(d)?;
        if repr.chunk == 0 {
            return Err(serde::de::Error::custom("chunk size must be positive"));
        }
        let mut out = ChunkedVec::new(repr.chunk);
        for item in repr.items {
            out.push(item);
        }
        Ok(out)
    }
}
