//! JSON serialization with floats written at 17 significant digits.
//!
//! The default shortest-round-trip float formatting is already deterministic,
//! but report files pin the full 17-digit form so that artifacts are
//! byte-comparable across runs and remain exact under parse-back.

use std::io;

use serde::Serialize;

struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.write_f64(writer, value as f64)
    }
}

/// Serialize to compact JSON with 17-significant-digit floats.
pub fn to_string<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serialized JSON is UTF-8"))
}
