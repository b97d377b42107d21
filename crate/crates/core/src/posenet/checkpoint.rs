//! Versioned binary checkpoints.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! [8]  magic "HPOSECK\0"
//! u32  format version (currently 1)
//! u32  architecture string length, then UTF-8 bytes (see PoseNet::architecture)
//! u64  epochs completed
//! u64  run seed
//! u8   1 if an angle normalizer follows, else 0
//!      [3 x f64 pitch/roll/yaw scales in degrees, only when the flag is 1]
//! u32  number of parameterized layers
//! per parameterized layer, in network order, four arrays each stored as
//!      u32 element count followed by that many f64:
//!      weights, biases, weight momentum, bias momentum
//! u32  CRC-32 (IEEE) of every preceding byte
//! ```

use std::path::Path;

use super::model::{build_model_with, ArchOptions, PoseNet};
use crate::dataset_io::AngleNormalizer;
use crate::error::CheckpointError;
use crate::nn::Tensor;

pub const MAGIC: &[u8; 8] = b"HPOSECK\0";
pub const FORMAT_VERSION: u32 = 1;

/// Model snapshot plus the training state needed to resume or reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: PoseNet,
    pub epoch: u64,
    pub seed: u64,
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            CheckpointError::Corrupt(format!("unexpected end of data at byte {}", self.pos))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn array_into(&mut self, dst: &mut Tensor, what: &str) -> Result<(), CheckpointError> {
        let n = self.u32()? as usize;
        if n != dst.len() {
            return Err(CheckpointError::Architecture(format!(
                "{what}: stored {n} values, model expects {}",
                dst.len()
            )));
        }
        for v in dst.data_mut() {
            *v = self.f64()?;
        }
        Ok(())
    }
}

fn put_array(out: &mut Vec<u8>, t: &Tensor) {
    out.extend_from_slice(&(t.len() as u32).to_le_bytes());
    for v in t.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        let arch = self.model.architecture();
        out.extend_from_slice(&(arch.len() as u32).to_le_bytes());
        out.extend_from_slice(arch.as_bytes());
        out.extend_from_slice(&self.epoch.to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        match self.model.normalizer {
            Some(n) => {
                out.push(1);
                for s in n.scales() {
                    out.extend_from_slice(&s.to_le_bytes());
                }
            }
            None => out.push(0),
        }
        let params: Vec<_> = self.model.net.params().collect();
        out.extend_from_slice(&(params.len() as u32).to_le_bytes());
        for p in params {
            put_array(&mut out, &p.weights);
            put_array(&mut out, &p.biases);
            put_array(&mut out, &p.weight_momentum);
            put_array(&mut out, &p.bias_momentum);
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let mut r = Reader {
            bytes,
            pos: MAGIC.len(),
        };
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(CheckpointError::Version {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        if bytes.len() < r.pos + 4 {
            return Err(CheckpointError::Corrupt("file too short".into()));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().unwrap());
        if crc32fast::hash(body) != stored {
            return Err(CheckpointError::Corrupt("checksum mismatch".into()));
        }
        let mut r = Reader { bytes: body, pos: r.pos };

        let arch_len = r.u32()? as usize;
        let arch = std::str::from_utf8(r.take(arch_len)?)
            .map_err(|_| CheckpointError::Corrupt("architecture is not UTF-8".into()))?
            .to_string();
        let epoch = r.u64()?;
        let seed = r.u64()?;
        let normalizer = match r.u8()? {
            0 => None,
            1 => {
                let scales = [r.f64()?, r.f64()?, r.f64()?];
                Some(AngleNormalizer::new(scales).ok_or_else(|| {
                    CheckpointError::Corrupt(format!("invalid angle scales {scales:?}"))
                })?)
            }
            other => return Err(CheckpointError::Corrupt(format!("bad normalizer flag {other}"))),
        };

        let mut model = [true, false]
            .into_iter()
            .map(|output_tanh| build_model_with(0, ArchOptions { output_tanh }))
            .find(|m| m.architecture() == arch)
            .ok_or_else(|| CheckpointError::Architecture(format!("unknown architecture {arch}")))?;
        model.normalizer = normalizer;

        let layers = r.u32()? as usize;
        let expected = model.net.params().count();
        if layers != expected {
            return Err(CheckpointError::Architecture(format!(
                "{layers} parameterized layers stored, {expected} expected"
            )));
        }
        for (i, p) in model.net.params_mut().enumerate() {
            r.array_into(&mut p.weights, &format!("layer {i} weights"))?;
            r.array_into(&mut p.biases, &format!("layer {i} biases"))?;
            r.array_into(&mut p.weight_momentum, &format!("layer {i} weight momentum"))?;
            r.array_into(&mut p.bias_momentum, &format!("layer {i} bias momentum"))?;
            p.zero_grads();
        }
        if r.pos != body.len() {
            return Err(CheckpointError::Corrupt("trailing data before checksum".into()));
        }
        Ok(Self { model, epoch, seed })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CheckpointError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CheckpointError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posenet::model::build_model;

    fn sample() -> Checkpoint {
        let mut model = build_model(4);
        model.normalizer = Some(AngleNormalizer::default());
        for p in model.net.params_mut() {
            p.weight_momentum.data_mut()[0] = 0.125;
        }
        Checkpoint { model, epoch: 12, seed: 99 }
    }

    #[test]
    fn round_trip_is_exact() {
        let ck = sample();
        assert_eq!(Checkpoint::from_bytes(&ck.to_bytes()).unwrap(), ck);
        let bare = Checkpoint { model: build_model(1), epoch: 0, seed: 0 };
        assert_eq!(Checkpoint::from_bytes(&bare.to_bytes()).unwrap(), bare);
    }

    #[test]
    fn truncation_is_corruption() {
        let bytes = sample().to_bytes();
        for cut in [13, 100, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(
                Checkpoint::from_bytes(&bytes[..cut]),
                Err(CheckpointError::Corrupt(_))
            ), "cut at {cut}");
        }
    }

    #[test]
    fn flipped_byte_is_corruption() {
        let mut bytes = sample().to_bytes();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        assert!(matches!(Checkpoint::from_bytes(&bytes), Err(CheckpointError::Corrupt(_))));
    }

    #[test]
    fn older_version_is_reported() {
        let mut bytes = sample().to_bytes();
        bytes[8..12].copy_from_slice(&0u32.to_le_bytes());
        let n = bytes.len();
        let crc = crc32fast::hash(&bytes[..n - 4]);
        bytes[n - 4..].copy_from_slice(&crc.to_le_bytes());
        assert!(matches!(
            Checkpoint::from_bytes(&bytes),
            Err(CheckpointError::Version { found: 0, expected: 1 })
        ));
    }

    #[test]
    fn bad_magic() {
        assert!(matches!(Checkpoint::from_bytes(b"nope"), Err(CheckpointError::BadMagic)));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(proptest::num::u8::ANY, 0..256)) {
            let _ = Checkpoint::from_bytes(&bytes);
        }

        #[test]
        fn any_single_byte_flip_is_detected(pos in 0usize..1_000_000, bit in 0u8..8) {
            let mut bytes = Checkpoint { model: build_model(1), epoch: 3, seed: 5 }.to_bytes();
            let i = pos % bytes.len();
            bytes[i] ^= 1 << bit;
            proptest::prop_assert!(Checkpoint::from_bytes(&bytes).is_err());
        }
    }
}
