//! Serde adapters rendering complex values as `{"re": …, "im": …}`
//! objects (the wire format for every complex quantity this crate
//! emits).

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
struct Repr {
    re: f64,
    im: f64,
}

pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        Repr { re: z.re, im: z.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let r = Repr::deserialize(d)?;
        Ok(Complex64::new(r.re, r.im))
    }
}

pub mod complex_pair {
    use super::*;

    pub fn serialize<S: Serializer>(
        z: &(Complex64, Complex64),
        s: S,
    ) -> Result<S::Ok, S::Error> {
        [Repr { re: z.0.re, im: z.0.im }, Repr { re: z.1.re, im: z.1.im }].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<(Complex64, Complex64), D::Error> {
        let [a, b] = <[Repr; 2]>::deserialize(d)?;
        Ok((Complex64::new(a.re, a.im), Complex64::new(b.re, b.im)))
    }
}
