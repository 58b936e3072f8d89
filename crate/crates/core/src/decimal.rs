//! Serde helpers: big integers go over the wire as decimal strings.

use serde::ser::SerializeSeq;
use serde::Serializer;

pub fn big<T: std::fmt::Display, S: Serializer>(x: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(x)
}

pub fn big_seq<T: std::fmt::Display, S: Serializer>(xs: &[T], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}
