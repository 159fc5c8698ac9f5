//! CSV and JSON encodings of systems and scalar columns.
//!
//! # JSON
//!
//! ```json
//! { "schema_version": 1, "field": "real",
//!   "weights": [0.25, 0.25, 0.25, 0.25], "dims": [1, 1, 1, 1],
//!   "elements": [ { "blocks": [[1.0], [1.0], [-1.0], [-1.0]] } ] }
//! ```
//!
//! Complex entries are `[re, im]` pairs.
//!
//! # CSV
//!
//! One row per `(element, atom)` pair:
//!
//! ```text
//! element,atom,weight,dim,c0,c1,...
//! 0,0,0.25,1,1.0
//! ```
//!
//! For complex systems the value columns are named `c0_re,c0_im,c1_re,...`
//! and hold real and imaginary parts in adjacent columns. Rows are
//! variable-length when fiber dimensions vary. Values are written with the
//! shortest decimal that parses back to the same binary64, so the round
//! trip is exact.

use super::{Element, HilbertCollection, MeasureSpace, System};
use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar, C64};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

pub const SYSTEM_SCHEMA_VERSION: u32 = 1;

/// A system whose scalar field is only known at run time.
#[derive(Debug, Clone)]
pub enum AnySystem {
    Real(System<f64>),
    Complex(System<C64>),
}

impl AnySystem {
    pub fn field(&self) -> Field {
        match self {
            AnySystem::Real(_) => Field::Real,
            AnySystem::Complex(_) => Field::Complex,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AnySystem::Real(s) => s.len(),
            AnySystem::Complex(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl From<System<f64>> for AnySystem {
    fn from(s: System<f64>) -> Self {
        AnySystem::Real(s)
    }
}

impl From<System<C64>> for AnySystem {
    fn from(s: System<C64>) -> Self {
        AnySystem::Complex(s)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum JsonScalar {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonElement {
    blocks: Vec<Vec<JsonScalar>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonSystem {
    schema_version: u32,
    field: Field,
    weights: Vec<f64>,
    dims: Vec<usize>,
    elements: Vec<JsonElement>,
}

fn to_json_scalar<S: Scalar>(x: S) -> JsonScalar {
    match S::FIELD {
        Field::Real => JsonScalar::Real(x.real()),
        Field::Complex => JsonScalar::Complex([x.real(), x.imaginary()]),
    }
}

fn to_json_system<S: Scalar>(sys: &System<S>) -> JsonSystem {
    JsonSystem {
        schema_version: SYSTEM_SCHEMA_VERSION,
        field: S::FIELD,
        weights: sys.space.weights().to_vec(),
        dims: sys.fibers.dims().to_vec(),
        elements: sys
            .elements()
            .iter()
            .map(|e| JsonElement {
                blocks: e
                    .blocks()
                    .map(|b| b.iter().map(|x| to_json_scalar(*x)).collect())
                    .collect(),
            })
            .collect(),
    }
}

fn from_json_blocks<S: Scalar>(js: JsonSystem) -> Result<System<S>> {
    let space = MeasureSpace::new(js.weights)?;
    let fibers = HilbertCollection::new(js.dims, js.field)?;
    let mut elements = Vec::with_capacity(js.elements.len());
    for (n, je) in js.elements.into_iter().enumerate() {
        let mut blocks = Vec::with_capacity(je.blocks.len());
        for (i, b) in je.blocks.into_iter().enumerate() {
            let mut out = Vec::with_capacity(b.len());
            for x in b {
                let v = match x {
                    JsonScalar::Real(re) => S::from_parts(re, 0.0),
                    JsonScalar::Complex([re, im]) if S::FIELD == Field::Complex => S::from_parts(re, im),
                    JsonScalar::Complex(_) => None,
                };
                out.push(
                    v.ok_or_else(|| Error::Parse(format!("element {n}, atom {i}: complex entry in a real system")))?,
                );
            }
            blocks.push(out);
        }
        elements.push(Element::from_blocks(blocks, &fibers)?);
    }
    System::new(space, fibers, elements)
}

pub fn write_json<S: Scalar, W: Write>(sys: &System<S>, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, &to_json_system(sys))?;
    Ok(())
}

pub fn read_json<R: Read>(r: R) -> Result<AnySystem> {
    let js: JsonSystem = serde_json::from_reader(r)?;
    if js.schema_version != SYSTEM_SCHEMA_VERSION {
        return Err(Error::Parse(format!(
            "unsupported system schema_version {} (expected {SYSTEM_SCHEMA_VERSION})",
            js.schema_version
        )));
    }
    Ok(match js.field {
        Field::Real => AnySystem::Real(from_json_blocks(js)?),
        Field::Complex => AnySystem::Complex(from_json_blocks(js)?),
    })
}

/// Shortest round-trip decimal for a binary64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_csv<S: Scalar, W: Write>(sys: &System<S>, w: W) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().flexible(true).from_writer(w);
    let max_dim = sys.fibers.dims().iter().copied().max().unwrap_or(0);
    let mut header: Vec<String> = ["element", "atom", "weight", "dim"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for c in 0..max_dim {
        match S::FIELD {
            Field::Real => header.push(format!("c{c}")),
            Field::Complex => {
                header.push(format!("c{c}_re"));
                header.push(format!("c{c}_im"));
            }
        }
    }
    wr.write_record(&header)?;
    for (n, e) in sys.elements().iter().enumerate() {
        for i in 0..sys.fibers.len() {
            let mut row = vec![
                n.to_string(),
                i.to_string(),
                fmt_f64(sys.space.weight(i)),
                sys.fibers.dim(i).to_string(),
            ];
            for x in e.block(i) {
                row.push(fmt_f64(x.real()));
                if S::FIELD == Field::Complex {
                    row.push(fmt_f64(x.imaginary()));
                }
            }
            wr.write_record(&row)?;
        }
    }
    wr.flush()?;
    Ok(())
}

fn parse_f64(s: &str, line: u64, col: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line}, column {col}: not a number: {s:?}")))
}

fn parse_usize(s: &str, line: u64, col: usize) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| Error::Parse(format!("line {line}, column {col}: not a nonnegative integer: {s:?}")))
}

pub fn read_csv<R: Read>(r: R) -> Result<AnySystem> {
    let mut rd = csv::ReaderBuilder::new().flexible(true).from_reader(r);
    let header = rd.headers()?.clone();
    let field = match header.get(4) {
        Some(h) if h.trim().ends_with("_re") => Field::Complex,
        _ => Field::Real,
    };
    let width = field.width();

    struct Row {
        line: u64,
        element: usize,
        atom: usize,
        weight: f64,
        dim: usize,
        values: Vec<(f64, f64)>,
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() < 4 {
            return Err(Error::Parse(format!("line {line}: expected at least 4 columns")));
        }
        let element = parse_usize(&rec[0], line, 1)?;
        let atom = parse_usize(&rec[1], line, 2)?;
        let weight = parse_f64(&rec[2], line, 3)?;
        let dim = parse_usize(&rec[3], line, 4)?;
        if rec.len() != 4 + dim * width {
            return Err(Error::Parse(format!(
                "line {line}: dim {dim} needs {} value columns, found {}",
                dim * width,
                rec.len() - 4
            )));
        }
        let mut values = Vec::with_capacity(dim);
        for c in 0..dim {
            let col = 4 + c * width;
            let re = parse_f64(&rec[col], line, col + 1)?;
            let im = if width == 2 {
                parse_f64(&rec[col + 1], line, col + 2)?
            } else {
                0.0
            };
            values.push((re, im));
        }
        rows.push(Row {
            line,
            element,
            atom,
            weight,
            dim,
            values,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptySystem);
    }
    let n_elem = rows.iter().map(|r| r.element).max().unwrap() + 1;
    let n_atoms = rows.iter().map(|r| r.atom).max().unwrap() + 1;
    if rows.len() != n_elem * n_atoms {
        return Err(Error::Parse(format!(
            "expected {} rows for {n_elem} elements x {n_atoms} atoms, found {}",
            n_elem * n_atoms,
            rows.len()
        )));
    }
    let mut weights = vec![f64::NAN; n_atoms];
    let mut dims = vec![0usize; n_atoms];
    let mut grid: Vec<Option<Vec<(f64, f64)>>> = (0..n_elem * n_atoms).map(|_| None).collect();
    for row in rows {
        let slot = &mut grid[row.element * n_atoms + row.atom];
        if slot.is_some() {
            return Err(Error::Parse(format!(
                "line {}: duplicate row for element {}, atom {}",
                row.line, row.element, row.atom
            )));
        }
        if dims[row.atom] == 0 {
            dims[row.atom] = row.dim;
            weights[row.atom] = row.weight;
        } else if dims[row.atom] != row.dim || weights[row.atom].to_bits() != row.weight.to_bits() {
            return Err(Error::Parse(format!(
                "line {}: weight/dim of atom {} disagree with an earlier row",
                row.line, row.atom
            )));
        }
        *slot = Some(row.values);
    }
    fn build<S: Scalar>(
        weights: Vec<f64>,
        dims: Vec<usize>,
        field: Field,
        n_atoms: usize,
        grid: Vec<Option<Vec<(f64, f64)>>>,
    ) -> Result<System<S>> {
        let space = MeasureSpace::new(weights)?;
        let fibers = HilbertCollection::new(dims, field)?;
        let mut elements = Vec::new();
        for chunk in grid.chunks(n_atoms) {
            let blocks = chunk
                .iter()
                .map(|b| {
                    b.as_ref()
                        .expect("grid fully populated")
                        .iter()
                        .map(|&(re, im)| S::from_parts(re, im).expect("field matches header"))
                        .collect()
                })
                .collect();
            elements.push(Element::from_blocks(blocks, &fibers)?);
        }
        System::new(space, fibers, elements)
    }
    Ok(match field {
        Field::Real => AnySystem::Real(build(weights, dims, field, n_atoms, grid)?),
        Field::Complex => AnySystem::Complex(build(weights, dims, field, n_atoms, grid)?),
    })
}

/// Reads a one- or two-column CSV of scalars (`re` or `re,im` per line, no
/// header; blank lines and `#` comments skipped).
pub fn read_scalar_column<R: Read>(r: R) -> Result<Vec<(f64, f64)>> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        match rec.len() {
            1 => out.push((parse_f64(&rec[0], line, 1)?, 0.0)),
            2 => out.push((parse_f64(&rec[0], line, 1)?, parse_f64(&rec[1], line, 2)?)),
            k => return Err(Error::Parse(format!("line {line}: expected 1 or 2 columns, found {k}"))),
        }
    }
    Ok(out)
}

/// Converts parsed `(re, im)` pairs into scalars of the system's field.
pub fn scalars_from_pairs<S: Scalar>(pairs: &[(f64, f64)]) -> Result<Vec<S>> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, &(re, im))| {
            S::from_parts(re, im)
                .ok_or_else(|| Error::Parse(format!("entry {}: complex value for a real system", i + 1)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_real() -> System<f64> {
        let space = MeasureSpace::new(vec![0.1, 1.0 / 3.0, 0.0]).unwrap();
        let fibers = HilbertCollection::new(vec![1, 2, 3], Field::Real).unwrap();
        let e = Element::from_blocks(
            vec![
                vec![std::f64::consts::PI],
                vec![-1e-300, 1.0 / 7.0],
                vec![0.0, -0.0, 5e300],
            ],
            &fibers,
        )
        .unwrap();
        System::new(space, fibers, vec![e.clone(), e]).unwrap()
    }

    fn bits<S: Scalar>(s: &System<S>) -> Vec<u64> {
        let mut v: Vec<u64> = s.space.weights().iter().map(|w| w.to_bits()).collect();
        for e in s.elements() {
            for x in e.as_flat() {
                v.push(x.real().to_bits());
                v.push(x.imaginary().to_bits());
            }
        }
        v
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let s = sample_real();
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        let AnySystem::Real(back) = read_csv(buf.as_slice()).unwrap() else {
            panic!()
        };
        assert_eq!(bits(&s), bits(&back));
        assert_eq!(back.fibers.dims(), s.fibers.dims());
    }

    #[test]
    fn json_round_trip_complex() {
        let space = MeasureSpace::counting(2).unwrap();
        let fibers = HilbertCollection::new(vec![2, 1], Field::Complex).unwrap();
        let e = Element::from_blocks(
            vec![
                vec![C64::new(0.1, -0.2), C64::new(1e-17, 3.0)],
                vec![C64::new(-0.0, 1.0 / 3.0)],
            ],
            &fibers,
        )
        .unwrap();
        let s = System::new(space, fibers, vec![e]).unwrap();
        let mut buf = Vec::new();
        write_json(&s, &mut buf).unwrap();
        let AnySystem::Complex(back) = read_json(buf.as_slice()).unwrap() else {
            panic!()
        };
        assert_eq!(bits(&s), bits(&back));

        let mut csvbuf = Vec::new();
        write_csv(&s, &mut csvbuf).unwrap();
        let AnySystem::Complex(back) = read_csv(csvbuf.as_slice()).unwrap() else {
            panic!()
        };
        assert_eq!(bits(&s), bits(&back));
    }

    #[test]
    fn malformed_csv_names_line() {
        let text = "element,atom,weight,dim,c0\n0,0,1.0,1,1.0\n0,1,1.0,1,abc\n";
        let err = read_csv(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = read_json("{\"schema_version\": 1,\n \"field\": \"real\", }".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn scalar_column_parsing() {
        let v = read_scalar_column("# coeffs\n1.5\n-2,0.5\n\n3e-3\n".as_bytes()).unwrap();
        assert_eq!(v, vec![(1.5, 0.0), (-2.0, 0.5), (3e-3, 0.0)]);
        assert!(scalars_from_pairs::<f64>(&v).is_err());
        assert_eq!(scalars_from_pairs::<C64>(&v).unwrap()[1], C64::new(-2.0, 0.5));
    }
}
