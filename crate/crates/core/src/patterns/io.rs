//! Pattern/activation ingestion.
//!
//! CSV: one vector per line, comma-separated decimal floats; lines starting
//! with `#` are skipped. AMV1: magic `AMV1`, `u32` LE dimension, `u64` LE
//! count, then `count·dim` binary64 LE values, row-major.

use std::io::{Read, Write};

use super::{PatternSet, VectorSet};
use crate::error::{Error, Result};

pub const AMV1_MAGIC: [u8; 4] = *b"AMV1";
const AMV1_HEADER_LEN: usize = 4 + 4 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Amv1,
}

impl Format {
    /// Guesses the format from a path extension (`.amv1`/`.amv` → AMV1, else CSV).
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("amv1") || e.eq_ignore_ascii_case("amv") => Format::Amv1,
            _ => Format::Csv,
        }
    }
}

fn ingestion(line: usize, message: impl Into<String>) -> Error {
    Error::Ingestion {
        line,
        message: message.into(),
    }
}

/// Parses CSV vectors. Rows keep their order; duplicates are allowed here.
pub fn parse_patterns_csv(bytes: &[u8]) -> Result<VectorSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes);
    let mut dim = None;
    let mut data = Vec::new();
    let mut record = csv::ByteRecord::new();
    loop {
        let more = reader.read_byte_record(&mut record).map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            ingestion(line, e.to_string())
        })?;
        if !more {
            break;
        }
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let width = *dim.get_or_insert(record.len());
        if record.len() != width {
            return Err(ingestion(
                line,
                format!("expected {width} values, found {}", record.len()),
            ));
        }
        for (col, field) in record.iter().enumerate() {
            let text = std::str::from_utf8(field)
                .map_err(|_| ingestion(line, format!("column {} is not UTF-8", col + 1)))?;
            let v: f64 = text
                .parse()
                .map_err(|_| ingestion(line, format!("column {}: cannot parse {text:?} as a number", col + 1)))?;
            if !v.is_finite() {
                return Err(ingestion(line, format!("column {}: value {text:?} is not finite", col + 1)));
            }
            data.push(v);
        }
    }
    let dim = dim.ok_or_else(|| ingestion(0, "no vectors found"))?;
    VectorSet::new(dim, data).map_err(|e| ingestion(0, e.to_string()))
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        offset,
        message: message.into(),
    }
}

/// Decodes an AMV1 buffer. The buffer must end exactly after the last value.
pub fn parse_amv1(bytes: &[u8]) -> Result<VectorSet> {
    if bytes.len() < AMV1_HEADER_LEN {
        return Err(format_err(bytes.len(), "truncated header"));
    }
    if bytes[..4] != AMV1_MAGIC {
        return Err(format_err(0, "bad magic, expected \"AMV1\""));
    }
    let dim = u32::from_le_bytes(bytes[4..8].try_into().expect("4-byte slice")) as usize;
    let count = u64::from_le_bytes(bytes[8..16].try_into().expect("8-byte slice"));
    if dim == 0 {
        return Err(format_err(4, "dimension must be ≥ 1"));
    }
    if count == 0 {
        return Err(format_err(8, "empty vector set (count = 0)"));
    }
    let payload = usize::try_from(count)
        .ok()
        .and_then(|c| c.checked_mul(dim))
        .and_then(|v| v.checked_mul(8))
        .ok_or_else(|| format_err(8, "count × dimension overflows"))?;
    let body = &bytes[AMV1_HEADER_LEN..];
    if body.len() != payload {
        return Err(format_err(
            AMV1_HEADER_LEN + body.len().min(payload),
            format!("expected {payload} payload bytes, found {}", body.len()),
        ));
    }
    let mut data = Vec::with_capacity(payload / 8);
    for (k, chunk) in body.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        if !v.is_finite() {
            return Err(format_err(
                AMV1_HEADER_LEN + 8 * k,
                format!("row {} column {} is not finite", k / dim, k % dim),
            ));
        }
        data.push(v);
    }
    VectorSet::new(dim, data)
}

/// Reads raw vectors: repeated rows are kept (activation dumps may contain them).
pub fn load_vectors<R: Read>(mut source: R, format: Format) -> Result<VectorSet> {
    let mut bytes = Vec::new();
    source
        .read_to_end(&mut bytes)
        .map_err(|e| ingestion(0, format!("read failed: {e}")))?;
    match format {
        Format::Csv => parse_patterns_csv(&bytes),
        Format::Amv1 => parse_amv1(&bytes),
    }
}

/// Reads a pattern set; identical rows are an error naming both row indices.
pub fn load_patterns<R: Read>(source: R, format: Format) -> Result<PatternSet> {
    PatternSet::new(load_vectors(source, format)?)
}

pub fn write_amv1<W: Write>(mut sink: W, vectors: &VectorSet) -> std::io::Result<()> {
    sink.write_all(&AMV1_MAGIC)?;
    let dim = u32::try_from(vectors.dim())
        .map_err(|_| std::io::Error::new(std::io::ErrorKind::InvalidInput, "dimension exceeds u32"))?;
    sink.write_all(&dim.to_le_bytes())?;
    sink.write_all(&(vectors.len() as u64).to_le_bytes())?;
    for v in vectors.as_slice() {
        sink.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Writes CSV using shortest round-trip formatting.
pub fn write_csv<W: Write>(mut sink: W, vectors: &VectorSet) -> std::io::Result<()> {
    for row in vectors.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(sink, "{}", line.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_sample_sets() {
        let two = load_patterns("-2,-0.5\n0.2,-0.3\n1.5,1.5".as_bytes(), Format::Csv).unwrap();
        assert_eq!((two.len(), two.dim()), (3, 2));
        assert_eq!(two.pattern(1), &[0.2, -0.3]);
        let one = load_patterns("# x\n-2\n0\n1\n".as_bytes(), Format::Csv).unwrap();
        assert_eq!((one.len(), one.dim()), (3, 1));
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let err = parse_patterns_csv(b"1,2\n3,4\n5\n").unwrap_err();
        assert!(matches!(err, Error::Ingestion { line: 3, .. }), "{err:?}");
        let err = parse_patterns_csv(b"# header\n1,2\n3,x\n").unwrap_err();
        assert!(matches!(err, Error::Ingestion { line: 3, .. }), "{err:?}");
        let err = parse_patterns_csv(b"1,nan\n").unwrap_err();
        assert!(matches!(err, Error::Ingestion { line: 1, .. }), "{err:?}");
        assert!(parse_patterns_csv(b"# only a comment\n").is_err());
        let err = load_patterns("1,2\n3,4\n1,2\n".as_bytes(), Format::Csv).unwrap_err();
        assert_eq!(err, Error::DuplicatePattern { first: 0, second: 2 });
    }

    #[test]
    fn amv1_layout_is_bit_exact() {
        let v = VectorSet::from_rows(&[[1.0, -2.0], [0.5, 3.25]]).unwrap();
        let mut buf = Vec::new();
        write_amv1(&mut buf, &v).unwrap();
        let mut want = b"AMV1".to_vec();
        want.extend_from_slice(&2u32.to_le_bytes());
        want.extend_from_slice(&2u64.to_le_bytes());
        for x in [1.0f64, -2.0, 0.5, 3.25] {
            want.extend_from_slice(&x.to_le_bytes());
        }
        assert_eq!(buf, want);
        assert_eq!(parse_amv1(&buf).unwrap(), v);
    }

    #[test]
    fn amv1_rejects_malformed() {
        let mut empty = b"AMV1".to_vec();
        empty.extend_from_slice(&4u32.to_le_bytes());
        empty.extend_from_slice(&0u64.to_le_bytes());
        assert!(matches!(parse_amv1(&empty), Err(Error::Format { offset: 8, .. })));

        assert!(parse_amv1(b"AMV").is_err());
        assert!(parse_amv1(b"AMV2\x01\0\0\0\x01\0\0\0\0\0\0\0\0\0\0\0\0\0\xf0\x3f").is_err());

        let mut huge = b"AMV1".to_vec();
        huge.extend_from_slice(&u32::MAX.to_le_bytes());
        huge.extend_from_slice(&u64::MAX.to_le_bytes());
        assert!(parse_amv1(&huge).is_err());

        let mut trailing = b"AMV1".to_vec();
        trailing.extend_from_slice(&1u32.to_le_bytes());
        trailing.extend_from_slice(&1u64.to_le_bytes());
        trailing.extend_from_slice(&1.0f64.to_le_bytes());
        assert!(parse_amv1(&trailing).is_ok());
        trailing.push(0);
        assert!(parse_amv1(&trailing).is_err());
    }

    #[test]
    fn format_from_extension() {
        use std::path::Path;
        assert_eq!(Format::from_path(Path::new("a/b.AMV1")), Format::Amv1);
        assert_eq!(Format::from_path(Path::new("p.csv")), Format::Csv);
    }
}
