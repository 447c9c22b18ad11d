//! Plain-text field format.
//!
//! Header line `# ldg-field v1 n_rho=<int> n_z=<int> a=<float> mu=<float>`,
//! then one row per in-mask node, `rho z u1 u2 u3`, in z-major order
//! with 17 significant digits so files round-trip bit-exactly.

use crate::grid::{Grid, GridError, OrderField};
use crate::tensor::UVec;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use thiserror::Error;

pub const FORMAT_VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("format version mismatch: expected {FORMAT_VERSION}, found {0}")]
    VersionMismatch(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Header metadata carried by a field file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldHeader {
    pub n: usize,
    pub a: f64,
    pub mu: f64,
}

pub fn write_field<P: AsRef<Path>>(
    path: P,
    field: &OrderField,
    grid: &Grid,
    a: f64,
    mu: f64,
) -> Result<(), IoError> {
    if field.n != grid.n {
        return Err(GridError::ShapeError { field: field.n, grid: grid.n }.into());
    }
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(
        w,
        "# ldg-field {FORMAT_VERSION} n_rho={} n_z={} a={a:.16e} mu={mu:.16e}",
        grid.n + 1,
        grid.n + 1
    )?;
    for j in 0..=grid.n {
        for i in 0..=grid.n {
            if !grid.in_mask(i, j) {
                continue;
            }
            let u = field.at(grid, i, j);
            writeln!(
                w,
                "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
                grid.rho(i),
                grid.z(j),
                u.u1,
                u.u2,
                u.u3
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_field<P: AsRef<Path>>(path: P) -> Result<(FieldHeader, Grid, OrderField), IoError> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or(IoError::Parse { line: 1, msg: "empty file".into() })??;
    let header = parse_header(&header_line)?;
    let grid = Grid::build(header.n)?;
    let mut field = OrderField::zeros(&grid);
    let order: Vec<(usize, usize)> = grid.mask_nodes().collect();
    let mut expected = order.iter().copied();
    let mut line_no = 1usize;
    for line in lines {
        let line = line?;
        line_no += 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_ascii_whitespace();
        let mut next = |what: &str| -> Result<f64, IoError> {
            parts
                .next()
                .ok_or(IoError::Parse { line: line_no, msg: format!("missing {what}") })?
                .parse::<f64>()
                .map_err(|e| IoError::Parse { line: line_no, msg: format!("{what}: {e}") })
        };
        let rho = next("rho")?;
        let z = next("z")?;
        let u1 = next("u1")?;
        let u2 = next("u2")?;
        let u3 = next("u3")?;
        let (i, j) = expected.next().ok_or(IoError::Parse {
            line: line_no,
            msg: "more rows than grid nodes".into(),
        })?;
        if (rho - grid.rho(i)).abs() > 1e-12 || (z - grid.z(j)).abs() > 1e-12 {
            return Err(IoError::Parse {
                line: line_no,
                msg: format!(
                    "node order mismatch: expected ({}, {}), found ({rho}, {z})",
                    grid.rho(i),
                    grid.z(j)
                ),
            });
        }
        field.set(&grid, i, j, UVec::new(u1, u2, u3));
    }
    if expected.next().is_some() {
        return Err(IoError::Parse { line: line_no, msg: "fewer rows than grid nodes".into() });
    }
    Ok((header, grid, field))
}

fn parse_header(line: &str) -> Result<FieldHeader, IoError> {
    let mut parts = line.split_ascii_whitespace();
    if parts.next() != Some("#") || parts.next() != Some("ldg-field") {
        return Err(IoError::Parse { line: 1, msg: "not an ldg-field file".into() });
    }
    let version = parts
        .next()
        .ok_or(IoError::Parse { line: 1, msg: "missing version".into() })?;
    if version != FORMAT_VERSION {
        return Err(IoError::VersionMismatch(version.to_string()));
    }
    let mut n_rho = None;
    let mut a = None;
    let mut mu = None;
    for kv in parts {
        let (key, value) = kv.split_once('=').ok_or(IoError::Parse {
            line: 1,
            msg: format!("bad header entry {kv}"),
        })?;
        match key {
            "n_rho" => {
                n_rho = Some(value.parse::<usize>().map_err(|e| IoError::Parse {
                    line: 1,
                    msg: format!("n_rho: {e}"),
                })?)
            }
            "n_z" => {
                let nz = value.parse::<usize>().map_err(|e| IoError::Parse {
                    line: 1,
                    msg: format!("n_z: {e}"),
                })?;
                if let Some(nr) = n_rho {
                    if nz != nr {
                        return Err(IoError::Parse {
                            line: 1,
                            msg: format!("n_z = {nz} differs from n_rho = {nr}"),
                        });
                    }
                }
            }
            "a" => {
                a = Some(value.parse::<f64>().map_err(|e| IoError::Parse {
                    line: 1,
                    msg: format!("a: {e}"),
                })?)
            }
            "mu" => {
                mu = Some(value.parse::<f64>().map_err(|e| IoError::Parse {
                    line: 1,
                    msg: format!("mu: {e}"),
                })?)
            }
            _ => {}
        }
    }
    let n_nodes = n_rho.ok_or(IoError::Parse { line: 1, msg: "missing n_rho".into() })?;
    if n_nodes < 2 {
        return Err(IoError::Parse { line: 1, msg: format!("bad n_rho = {n_nodes}") });
    }
    Ok(FieldHeader {
        n: n_nodes - 1,
        a: a.ok_or(IoError::Parse { line: 1, msg: "missing a".into() })?,
        mu: mu.ok_or(IoError::Parse { line: 1, msg: "missing mu".into() })?,
    })
}
