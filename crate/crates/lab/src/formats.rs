//! On-disk formats. Structured data is JSON, plot data is CSV.

use std::fmt;
use std::path::Path;

use loewner_core::maps::{infinity, is_infinity};
use loewner_core::{CurveSamples, DrivingFunction};
use num_complex::Complex64;
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

pub const FORMAT_VERSION: u32 = 1;

/// A point of the Riemann sphere: `[re, im]`, or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point(pub Complex64);

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if is_infinity(self.0) {
            s.serialize_str("inf")
        } else {
            [self.0.re, self.0.im].serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Point;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a pair [re, im] or \"inf\"")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Point, E> {
                if v == "inf" {
                    Ok(Point(infinity()))
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }

            fn visit_seq<A: de::SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Point, A::Error> {
                let re: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let im: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<f64>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(Point(Complex64::new(re, im)))
            }
        }
        d.deserialize_any(V)
    }
}

/// An energy that may be `+∞`, written as the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Energy(pub f64);

impl Serialize for Energy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Energy {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Energy(x)),
            Raw::Text(t) if t == "inf" => Ok(Energy(f64::INFINITY)),
            Raw::Text(t) => Err(de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    #[serde(rename = "arc")]
    Arc,
    #[serde(rename = "loop")]
    Loop,
    #[serde(rename = "chord-in-H")]
    Chord,
    #[serde(rename = "tangential-to-R+")]
    Tangential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    pub version: u32,
    pub kind: CurveKind,
    pub points: Vec<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

impl CurveFile {
    pub fn new(kind: CurveKind, curve: &CurveSamples) -> Self {
        CurveFile {
            version: FORMAT_VERSION,
            kind,
            points: curve.points().iter().map(|&z| Point(z)).collect(),
            beta: None,
        }
    }

    pub fn samples(&self) -> Result<CurveSamples> {
        if self.version != FORMAT_VERSION {
            return Err(LabError::input(format!("unsupported curve format version {}", self.version)));
        }
        let pts = self.points.iter().map(|p| p.0).collect();
        Ok(CurveSamples::new(pts, self.kind == CurveKind::Loop)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrivingFile {
    pub version: u32,
    pub t: Vec<f64>,
    pub w: Vec<f64>,
}

impl DrivingFile {
    pub fn new(w: &DrivingFunction) -> Self {
        DrivingFile { version: FORMAT_VERSION, t: w.t().to_vec(), w: w.w().to_vec() }
    }

    pub fn driving(&self) -> Result<DrivingFunction> {
        if self.version != FORMAT_VERSION {
            return Err(LabError::input(format!("unsupported driving format version {}", self.version)));
        }
        Ok(DrivingFunction::new(self.t.clone(), self.w.clone())?)
    }
}

/// Either kind of input accepted by commands that work on curves and on driving functions.
pub enum Input {
    Curve(CurveFile),
    Driving(DrivingFile),
}

/// A file read into memory together with its content hash.
pub struct Loaded {
    pub name: String,
    pub bytes: Vec<u8>,
    pub hash: String,
}

pub fn load(path: &Path) -> Result<Loaded> {
    let bytes = std::fs::read(path).map_err(|e| LabError::io(path, e))?;
    let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    let hash = content_hash(&bytes);
    Ok(Loaded { name, bytes, hash })
}

/// Git-style object hash, `sha256("blob <len>\0" ++ bytes)`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    format!("sha256:{}", hex::encode(h.finalize()))
}

fn is_csv(name: &str) -> bool {
    name.rsplit('.').next().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn parse_curve(file: &Loaded) -> Result<CurveFile> {
    serde_json::from_slice(&file.bytes).map_err(|e| LabError::input(format!("{}: {e}", file.name)))
}

/// Driving functions come as JSON or as a CSV with columns `t,W`.
pub fn parse_driving(file: &Loaded) -> Result<DrivingFile> {
    if is_csv(&file.name) {
        let mut rd = csv::Reader::from_reader(file.bytes.as_slice());
        let (mut t, mut w) = (Vec::new(), Vec::new());
        for rec in rd.deserialize::<(f64, f64)>() {
            let (a, b) = rec.map_err(|e| LabError::input(format!("{}: {e}", file.name)))?;
            t.push(a);
            w.push(b);
        }
        return Ok(DrivingFile { version: FORMAT_VERSION, t, w });
    }
    serde_json::from_slice(&file.bytes).map_err(|e| LabError::input(format!("{}: {e}", file.name)))
}

pub fn parse_input(file: &Loaded) -> Result<Input> {
    if is_csv(&file.name) {
        return Ok(Input::Driving(parse_driving(file)?));
    }
    let v: serde_json::Value =
        serde_json::from_slice(&file.bytes).map_err(|e| LabError::input(format!("{}: {e}", file.name)))?;
    if v.get("kind").is_some() {
        Ok(Input::Curve(serde_json::from_value(v).map_err(|e| LabError::input(format!("{}: {e}", file.name)))?))
    } else {
        Ok(Input::Driving(serde_json::from_value(v).map_err(|e| LabError::input(format!("{}: {e}", file.name)))?))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| LabError::io(path, e))
}

pub fn write_csv<R: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut wr = csv::Writer::from_path(path).map_err(|e| LabError::io(path, std::io::Error::other(e)))?;
    wr.write_record(header)?;
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush().map_err(|e| LabError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_and_energies() {
        let pts = vec![Point(Complex64::new(1.5, -2.0)), Point(infinity())];
        let text = serde_json::to_string(&pts).unwrap();
        assert_eq!(text, r#"[[1.5,-2.0],"inf"]"#);
        let back: Vec<Point> = serde_json::from_str(&text).unwrap();
        assert_eq!(back[0], pts[0]);
        assert!(is_infinity(back[1].0));
        assert!(serde_json::from_str::<Point>("[1.0]").is_err());
        assert!(serde_json::from_str::<Point>(r#""nan""#).is_err());
        assert_eq!(serde_json::to_string(&Energy(f64::INFINITY)).unwrap(), r#""inf""#);
        assert_eq!(serde_json::from_str::<Energy>("0.25").unwrap(), Energy(0.25));
        assert_eq!(serde_json::from_str::<Energy>(r#""inf""#).unwrap(), Energy(f64::INFINITY));
    }

    #[test]
    fn hash_matches_git_blob_layout() {
        // sha256 of "blob 0\0"
        assert_eq!(content_hash(b""), "sha256:473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813");
        assert_ne!(content_hash(b"a"), content_hash(b"b"));
    }
}
