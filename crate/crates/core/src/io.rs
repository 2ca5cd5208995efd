//! Text formats for embedding tables and sequence vectors.
//!
//! Embeddings: a header line `n d`, then `id v1 ... vd` per row.
//! Sequence vectors: a header line `q d`, then the `d` values on one line.
//! Values are written in scientific notation with ten significant digits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Named rows as read from or written to an embedding file.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFile {
    pub ids: Vec<String>,
    pub rows: Matrix,
}

fn fmt_value(v: f64) -> String {
    format!("{v:.9e}")
}

pub fn write_embeddings<W: Write>(mut w: W, ids: &[String], rows: &Matrix) -> std::io::Result<()> {
    assert_eq!(ids.len(), rows.rows());
    writeln!(w, "{} {}", rows.rows(), rows.cols())?;
    let mut line = String::new();
    for (id, row) in ids.iter().zip(rows.iter_rows()) {
        line.clear();
        line.push_str(id);
        for &v in row {
            line.push(' ');
            line.push_str(&fmt_value(v));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()
}

pub fn save_embeddings(path: impl AsRef<Path>, ids: &[String], rows: &Matrix) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_embeddings(BufWriter::new(file), ids, rows).map_err(|e| Error::io(path, e))
}

fn parse_header(line: Option<std::io::Result<String>>, origin: &Path, what: &str) -> Result<(usize, usize)> {
    let line = match line {
        Some(l) => l.map_err(|e| Error::io(origin, e))?,
        None => return Err(Error::EmptyInput { path: origin.into() }),
    };
    let fields: Vec<&str> = line.split_whitespace().collect();
    match fields.as_slice() {
        [a, b] => match (a.parse(), b.parse()) {
            (Ok(a), Ok(b)) => Ok((a, b)),
            _ => Err(Error::parse(origin, 1, format!("bad {what} header `{line}`"))),
        },
        _ => Err(Error::parse(
            origin,
            1,
            format!("expected `{what}` header, got `{line}`"),
        )),
    }
}

fn parse_values<'a>(
    fields: impl Iterator<Item = &'a str>,
    origin: &Path,
    line: usize,
    out: &mut Vec<f64>,
) -> Result<usize> {
    let mut count = 0;
    for f in fields {
        let v: f64 = f
            .parse()
            .map_err(|_| Error::parse(origin, line, format!("bad number `{f}`")))?;
        out.push(v);
        count += 1;
    }
    Ok(count)
}

pub fn read_embeddings<R: BufRead>(reader: R, origin: &Path) -> Result<EmbeddingFile> {
    let mut lines = reader.lines();
    let (n, d) = parse_header(lines.next(), origin, "n d")?;
    let mut ids = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * d);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let id = fields.next().unwrap();
        let got = parse_values(fields, origin, lineno, &mut data)?;
        if got != d {
            return Err(Error::parse(origin, lineno, format!("expected {d} values, got {got}")));
        }
        ids.push(id.to_owned());
    }
    if ids.len() != n {
        return Err(Error::parse(
            origin,
            ids.len() + 1,
            format!("header promises {n} rows, found {}", ids.len()),
        ));
    }
    Ok(EmbeddingFile {
        ids,
        rows: Matrix::from_vec(n, d, data),
    })
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingFile> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_embeddings(BufReader::new(file), path)
}

pub fn write_sequence_vector<W: Write>(mut w: W, length: usize, values: &[f64]) -> std::io::Result<()> {
    writeln!(w, "{} {}", length, values.len())?;
    let line: Vec<String> = values.iter().map(|&v| fmt_value(v)).collect();
    writeln!(w, "{}", line.join(" "))?;
    w.flush()
}

/// Returns the declared length and the values.
pub fn read_sequence_vector<R: BufRead>(reader: R, origin: &Path) -> Result<(usize, Vec<f64>)> {
    let mut lines = reader.lines();
    let (q, d) = parse_header(lines.next(), origin, "q d")?;
    let mut values = Vec::with_capacity(d);
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        parse_values(line.split_whitespace(), origin, i + 2, &mut values)?;
    }
    if values.len() != d {
        return Err(Error::parse(
            origin,
            2,
            format!("header promises {d} values, found {}", values.len()),
        ));
    }
    Ok((q, values))
}

#[cfg(test)]
mod tests {
    use std::io::Cursor;

    use super::*;

    #[test]
    fn embedding_round_trip() {
        let rows = Matrix::from_rows(&[vec![0.1, -2.5e-7], vec![3.0, 1.0 / 3.0]]);
        let ids = vec!["a".to_string(), "b c".replace(' ', "_")];
        let mut buf = Vec::new();
        write_embeddings(&mut buf, &ids, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("2 2\na 1.000000000e-1 "));
        let back = read_embeddings(Cursor::new(buf), Path::new("e")).unwrap();
        assert_eq!(back.ids, ids);
        for (a, b) in back.rows.as_slice().iter().zip(rows.as_slice()) {
            assert!((a - b).abs() <= 1e-9 * b.abs());
        }
    }

    #[test]
    fn embedding_errors() {
        let read = |s: &str| read_embeddings(Cursor::new(s.to_string()), Path::new("e"));
        assert!(matches!(read(""), Err(Error::EmptyInput { .. })));
        assert!(matches!(read("x y\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read("1 2\na 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read("2 1\na 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(read("1 1\na zz\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn sequence_vector_round_trip() {
        let mut buf = Vec::new();
        write_sequence_vector(&mut buf, 3, &[1.0, 0.0, -0.5, 2.0]).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("3 4\n"));
        let (q, v) = read_sequence_vector(Cursor::new(buf), Path::new("s")).unwrap();
        assert_eq!(q, 3);
        assert_eq!(v, [1.0, 0.0, -0.5, 2.0]);
        assert!(read_sequence_vector(Cursor::new("1 3\n1 2\n"), Path::new("s")).is_err());
    }
}
