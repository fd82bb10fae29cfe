//! Fixed-format emission: every float is written with 17 significant digits.

use std::io;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use serde_json::ser::Formatter;

use crate::linalg::{ComplexMatrix, C64};

/// Compact JSON formatter writing floats as `{:.16e}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct FixedFloat;

impl Formatter for FixedFloat {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", float(value))
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloat);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn complex<S: Serializer>(c: &C64, s: S) -> Result<S::Ok, S::Error> {
    let mut st = s.serialize_struct("Complex", 2)?;
    st.serialize_field("re", &c.re)?;
    st.serialize_field("im", &c.im)?;
    st.end()
}

pub fn matrix<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
    let (re, im) = m.to_re_im();
    let mut st = s.serialize_struct("Matrix", 2)?;
    st.serialize_field("re", &re)?;
    st.serialize_field("im", &im)?;
    st.end()
}
