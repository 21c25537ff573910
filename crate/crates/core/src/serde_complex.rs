//! Serde helpers encoding complex numbers as `[re, im]` pairs.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
    let [re, im] = <[f64; 2]>::deserialize(d)?;
    Ok(C64::new(re, im))
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<C64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(|z| [z.re, z.im]).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<C64>, D::Error> {
        Ok(Option::<[f64; 2]>::deserialize(d)?.map(|[re, im]| C64::new(re, im)))
    }
}
