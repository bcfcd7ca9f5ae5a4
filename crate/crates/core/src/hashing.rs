//! Content hashes used for provenance and compatibility checks.

use sha2::{Digest, Sha256};

pub fn sha256(bytes: &[u8]) -> [u8; 32] {
    let mut out = [0u8; 32];
    out.copy_from_slice(&Sha256::digest(bytes));
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(sha256(bytes))
}

/// Serde adapter storing `Vec<f64>` as a `0x`-prefixed hex string of
/// little-endian bytes, so floats round-trip bit-exactly through JSON.
pub mod hex_f64 {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn encode(values: &[f64]) -> String {
        let mut bytes = Vec::with_capacity(values.len() * 8);
        for v in values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        format!("0x{}", hex::encode(bytes))
    }

    pub fn decode(s: &str) -> Result<Vec<f64>, String> {
        let body = s.strip_prefix("0x").ok_or("missing 0x prefix")?;
        let bytes = hex::decode(body).map_err(|e| e.to_string())?;
        if bytes.len() % 8 != 0 {
            return Err(format!("byte length {} is not a multiple of 8", bytes.len()));
        }
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect())
    }

    pub fn serialize<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&encode(values))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let s = String::deserialize(d)?;
        decode(&s).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip_is_bit_exact() {
        let v = vec![0.1, -0.0, f64::MIN_POSITIVE, 1.0 / 3.0, f64::MAX];
        let back = hex_f64::decode(&hex_f64::encode(&v)).unwrap();
        let bits = |xs: &[f64]| xs.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&v));
        assert!(hex_f64::decode("0xabc").is_err());
        assert!(hex_f64::decode("abcd").is_err());
    }
}
