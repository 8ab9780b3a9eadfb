//! Report documents and their deterministic JSON rendering.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `+∞` (rendered `null`) when the quotient is trivial.
    pub min_quotient_gap: Option<f64>,
    pub residuals: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub task: String,
    pub k0_class: Vec<i64>,
    pub tau: Option<f64>,
    pub partition: Vec<f64>,
    pub diagnostics: Diagnostics,
    pub version: String,
}

impl Report {
    pub fn new(task: &str) -> Self {
        Self {
            task: task.to_string(),
            k0_class: Vec::new(),
            tau: None,
            partition: Vec::new(),
            diagnostics: Diagnostics { min_quotient_gap: None, residuals: BTreeMap::new() },
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn residual(&mut self, name: &str, value: f64) {
        self.diagnostics.residuals.insert(name.to_string(), value);
    }
}

/// Pretty printer that writes every float with 17 significant digits.
struct FixedPrecision<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(w $(, $arg)*)
            }
        )*
    };
}

impl Formatter for FixedPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        // Non-finite values never reach here; serde_json writes them as null.
        let value = if value == 0.0 { 0.0 } else { value };
        write!(w, "{value:.16e}")
    }

    delegate! {
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        end_object_key(),
        begin_object_value(),
        end_object_value(),
    }
}

/// Serialize `value` as indented JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedPrecision(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json emits UTF-8")
}
