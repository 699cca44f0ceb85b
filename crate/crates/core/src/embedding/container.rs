//! The `QDVW` tensor container.
//!
//! Layout, all integers little-endian `u32`:
//!
//! ```text
//! "QDVW" | version | tensor_count |
//!   { name_len | name (UTF-8) | rank | dim_0 .. dim_{rank-1} | f32 LE values (row-major) }*
//! ```

use std::path::Path;

use crate::error::{Error, IoContext, Result};

pub const MAGIC: &[u8; 4] = b"QDVW";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub dims: Vec<usize>,
    pub data: Vec<f32>,
}

impl Tensor {
    pub fn new(name: impl Into<String>, dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let name = name.into();
        let expected: usize = dims.iter().product();
        if expected != data.len() {
            return Err(Error::Format(format!(
                "tensor `{name}` has shape {dims:?} ({expected} values) but {} values",
                data.len()
            )));
        }
        Ok(Self { name, dims, data })
    }
}

/// Ordered collection of named tensors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TensorFile {
    pub tensors: Vec<Tensor>,
}

impl TensorFile {
    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.tensors.iter().find(|t| t.name == name)
    }

    /// Look up a tensor and check its shape, naming it in any error.
    pub fn expect(&self, name: &str, dims: &[usize]) -> Result<&Tensor> {
        let t = self
            .get(name)
            .ok_or_else(|| Error::Format(format!("missing tensor `{name}`")))?;
        if t.dims != dims {
            return Err(Error::Format(format!(
                "tensor `{name}` has shape {:?}, expected {dims:?}",
                t.dims
            )));
        }
        if let Some(i) = t.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!(
                "tensor `{name}` has a non-finite value at flat index {i}"
            )));
        }
        Ok(t)
    }

    pub fn push(&mut self, tensor: Tensor) {
        self.tensors.push(tensor);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for t in &self.tensors {
            out.extend_from_slice(&(t.name.len() as u32).to_le_bytes());
            out.extend_from_slice(t.name.as_bytes());
            out.extend_from_slice(&(t.dims.len() as u32).to_le_bytes());
            for &d in &t.dims {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
            for v in &t.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad magic, expected \"QDVW\"".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported container version {version}"
            )));
        }
        let count = r.u32()? as usize;
        let mut tensors = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let name_len = r.u32()? as usize;
            let name = std::str::from_utf8(r.take(name_len)?)
                .map_err(|_| Error::Format("tensor name is not UTF-8".into()))?
                .to_owned();
            let rank = r.u32()? as usize;
            let dims = (0..rank)
                .map(|_| r.u32().map(|d| d as usize))
                .collect::<Result<Vec<_>>>()?;
            let n = dims
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .ok_or_else(|| Error::Format(format!("tensor `{name}` is too large")))?;
            let raw = r
                .take(n.saturating_mul(4))
                .map_err(|_| Error::Format(format!("tensor `{name}` is truncated")))?;
            let data = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            tensors.push(Tensor { name, dims, data });
        }
        if r.pos != bytes.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes after last tensor",
                bytes.len() - r.pos
            )));
        }
        Ok(Self { tensors })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_bytes(&std::fs::read(path).at(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).at(path)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format("unexpected end of container".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn byte_layout_is_pinned() {
        let mut f = TensorFile::default();
        f.push(Tensor::new("ab", vec![2], vec![1.0, -2.0]).unwrap());
        let b = f.to_bytes();
        let mut expected = b"QDVW".to_vec();
        expected.extend([1, 0, 0, 0]); // version
        expected.extend([1, 0, 0, 0]); // count
        expected.extend([2, 0, 0, 0]);
        expected.extend(b"ab");
        expected.extend([1, 0, 0, 0]); // rank
        expected.extend([2, 0, 0, 0]); // dim
        expected.extend(1.0f32.to_le_bytes());
        expected.extend((-2.0f32).to_le_bytes());
        assert_eq!(b, expected);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        assert!(TensorFile::from_bytes(b"QDVX\x01\0\0\0\0\0\0\0").is_err());
        let mut f = TensorFile::default();
        f.push(Tensor::new("w", vec![3, 2], vec![0.0; 6]).unwrap());
        let b = f.to_bytes();
        let err = TensorFile::from_bytes(&b[..b.len() - 1]).unwrap_err();
        assert!(err.to_string().contains("`w`"), "{err}");
    }

    #[test]
    fn expect_names_the_tensor() {
        let mut f = TensorFile::default();
        f.push(Tensor::new("enc.conv1.weight", vec![2, 2], vec![0.0; 4]).unwrap());
        let e = f.expect("enc.conv1.weight", &[16, 1, 3, 3]).unwrap_err();
        assert!(e.to_string().contains("enc.conv1.weight"));
        let e = f.expect("enc.conv2.weight", &[2]).unwrap_err();
        assert!(e.to_string().contains("missing tensor `enc.conv2.weight`"));
    }

    proptest! {
        #[test]
        fn round_trip(
            tensors in prop::collection::vec(
                ("[a-z.]{1,12}", prop::collection::vec(1usize..4, 0..3)),
                0..4,
            ),
            fill in -1e6f32..1e6,
        ) {
            let mut f = TensorFile::default();
            for (name, dims) in tensors {
                let n: usize = dims.iter().product();
                let data = (0..n).map(|i| fill * i as f32).collect();
                f.push(Tensor::new(name, dims, data).unwrap());
            }
            prop_assert_eq!(TensorFile::from_bytes(&f.to_bytes()).unwrap(), f);
        }
    }
}
