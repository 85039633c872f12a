//! Polygon files and fixed-precision output.
//!
//! Every float is written as `{:.16e}` (17 significant digits), which
//! round-trips through `f64` exactly, so re-serializing a parsed document
//! reproduces it byte for byte.

use std::io::{self, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{HhError, Result};
use crate::geometry::{ConvexPolygon, Point};

/// Formats a float with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// `serde_json` formatter that writes floats via [`format_f64`], pretty-printed.
#[derive(Debug)]
pub struct FixedFormatter {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl Default for FixedFormatter {
    fn default() -> Self {
        FixedFormatter {
            inner: serde_json::ser::PrettyFormatter::with_indent(b"  "),
        }
    }
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.inner.$name(w $(, $arg)*)
        })*
    };
}

impl serde_json::ser::Formatter for FixedFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        end_object_key();
        begin_object_value();
        end_object_value();
    }
}

/// Serializes `value` as pretty JSON with 17-digit floats.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFormatter::default());
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Compact variant of [`FixedFormatter`] for JSON lines.
#[derive(Debug, Default)]
struct CompactFixedFormatter;

impl serde_json::ser::Formatter for CompactFixedFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
}

/// Serializes `value` on a single line with 17-digit floats.
pub fn to_json_line<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, CompactFixedFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[derive(Debug, Serialize, Deserialize)]
struct PolygonFile {
    vertices: Vec<[f64; 2]>,
}

/// Parses `{"vertices": [[x, y], ...]}`. Clockwise input is reversed with a warning.
pub fn parse_polygon(text: &str) -> Result<ConvexPolygon> {
    let file: PolygonFile = serde_json::from_str(text)?;
    let pts = file.vertices.iter().map(|v| Point::new(v[0], v[1])).collect();
    let (p, reversed) = ConvexPolygon::from_points(pts)?;
    if reversed {
        warn!("polygon vertices were clockwise; reversed to counter-clockwise order");
    }
    Ok(p)
}

pub fn read_polygon(path: impl AsRef<Path>) -> Result<ConvexPolygon> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| HhError::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    parse_polygon(&text)
}

pub fn polygon_to_json(p: &ConvexPolygon) -> Result<String> {
    let file = PolygonFile {
        vertices: p.vertices().iter().map(|v| [v.x, v.y]).collect(),
    };
    to_json_string(&file)
}

pub fn write_polygon(path: impl AsRef<Path>, p: &ConvexPolygon) -> Result<()> {
    std::fs::write(path, polygon_to_json(p)?)?;
    Ok(())
}
