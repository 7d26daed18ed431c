//! JSON rendering with every float written to 17 significant digits, which
//! round-trips an IEEE double bit for bit.

use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter};

pub const SCHEMA: u32 = 1;

#[derive(Default)]
struct Sig17(CompactFormatter);

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17::default());
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}
