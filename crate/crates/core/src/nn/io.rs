//! Plain-text container for named arrays plus key/value metadata.
//!
//! ```text
//! lugre-pinn-model v1
//! meta variant = pe2
//! array layer0.weight 3 128
//! 1.2345678901234567e-1 ...
//! end
//! ```
//!
//! Values are written with 17 significant digits, so a round trip is exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};

pub const MAGIC: &str = "lugre-pinn-model v1";
const PER_LINE: usize = 8;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NamedArray {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelFile {
    pub meta: BTreeMap<String, String>,
    pub arrays: BTreeMap<String, NamedArray>,
}

impl ModelFile {
    pub fn set_meta(&mut self, key: &str, value: impl ToString) {
        self.meta.insert(key.to_string(), value.to_string());
    }

    pub fn meta(&self, key: &str) -> Result<&str> {
        self.meta
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::ModelFormat(format!("missing meta key `{key}`")))
    }

    pub fn set_array(&mut self, name: &str, shape: &[usize], data: Vec<f64>) {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        self.arrays.insert(
            name.to_string(),
            NamedArray {
                shape: shape.to_vec(),
                data,
            },
        );
    }

    pub fn array(&self, name: &str) -> Result<&NamedArray> {
        self.arrays
            .get(name)
            .ok_or_else(|| Error::ModelFormat(format!("missing array `{name}`")))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        for (k, v) in &self.meta {
            if k.contains(char::is_whitespace) || v.contains('\n') {
                return Err(Error::ModelFormat(format!("unserializable meta entry `{k}`")));
            }
            let _ = writeln!(out, "meta {k} = {v}");
        }
        for (name, arr) in &self.arrays {
            let dims: Vec<String> = arr.shape.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "array {name} {}", dims.join(" "));
            for chunk in arr.data.chunks(PER_LINE) {
                let line: Vec<String> = chunk.iter().map(|v| format!("{v:.16e}")).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.push_str("end\n");
        }
        w.write_all(out.as_bytes())?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut lines = BufReader::new(r).lines().enumerate();
        let bad = |line: usize, msg: String| Error::ModelFormat(format!("line {}: {msg}", line + 1));
        match lines.next() {
            Some((_, Ok(first))) if first.trim() == MAGIC => {}
            _ => return Err(Error::ModelFormat(format!("missing `{MAGIC}` header"))),
        }
        let mut file = ModelFile::default();
        while let Some((no, line)) = lines.next() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("meta ") {
                let (k, v) = rest
                    .split_once(" = ")
                    .ok_or_else(|| bad(no, "expected `meta key = value`".into()))?;
                file.meta.insert(k.trim().to_string(), v.trim().to_string());
            } else if let Some(rest) = line.strip_prefix("array ") {
                let mut parts = rest.split_whitespace();
                let name = parts.next().ok_or_else(|| bad(no, "array without name".into()))?;
                let shape = parts
                    .map(|d| d.parse::<usize>().map_err(|_| bad(no, format!("bad dimension `{d}`"))))
                    .collect::<Result<Vec<_>>>()?;
                let want: usize = shape.iter().product();
                let mut data = Vec::with_capacity(want);
                loop {
                    let (no, l) = lines.next().ok_or_else(|| bad(no, format!("array `{name}` not terminated")))?;
                    let l = l?;
                    if l.trim() == "end" {
                        break;
                    }
                    for tok in l.split_whitespace() {
                        data.push(tok.parse::<f64>().map_err(|_| bad(no, format!("bad number `{tok}`")))?);
                    }
                }
                if data.len() != want {
                    return Err(bad(no, format!("array `{name}` has {} values, shape needs {want}", data.len())));
                }
                file.arrays.insert(name.to_string(), NamedArray { shape, data });
            } else {
                return Err(bad(no, format!("unexpected line `{line}`")));
            }
        }
        Ok(file)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut f = ModelFile::default();
        f.set_meta("variant", "pe2");
        f.set_meta("seed", 42);
        let data: Vec<f64> = (0..21).map(|i| (i as f64).sin() * 1e-7 + 1.0 / 3.0).collect();
        f.set_array("w", &[3, 7], data);
        f.set_array("empty", &[0], vec![]);
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        let g = ModelFile::read_from(buf.as_slice()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(ModelFile::read_from("nope\n".as_bytes()).is_err());
        let short = format!("{MAGIC}\narray w 2 2\n1 2 3\nend\n");
        assert!(matches!(ModelFile::read_from(short.as_bytes()), Err(Error::ModelFormat(_))));
        let open = format!("{MAGIC}\narray w 1\n1\n");
        assert!(ModelFile::read_from(open.as_bytes()).is_err());
        let f = ModelFile::default();
        assert!(f.meta("missing").is_err());
    }
}
