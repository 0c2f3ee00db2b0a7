//! Plain-text model container.
//!
//! ```text
//! rfppg-model 1 mlp 400 512 512 512 400
//! param leaky_slope 1e-2
//! tensor w0 512 400
//! <512 lines of 400 floats>
//! tensor b0 1 512
//! <1 line of 512 floats>
//! ...
//! end
//! ```
//!
//! The header carries the format version, the model kind (`ridge` or
//! `mlp`) and the dimension chain. Each tensor block names the tensor,
//! gives its shape and lists its entries row-major, one matrix row per
//! line, as shortest round-trip decimal floats. MLP tensors are `w<i>`
//! (`out x in`) and `b<i>` for every layer; ridge models have `w`
//! (`in x out`) and `b`. Blank lines and lines starting with `#` are
//! ignored.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::regress::{Layer, MlpModel, Regressor, RidgeModel};

pub const FORMAT_MAGIC: &str = "rfppg-model";
pub const FORMAT_VERSION: u32 = 1;

fn write_tensor(out: &mut String, name: &str, rows: usize, cols: usize, data: &[f64]) {
    let _ = writeln!(out, "tensor {name} {rows} {cols}");
    for row in data.chunks(cols.max(1)) {
        let mut first = true;
        for v in row {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{v:e}");
        }
        out.push('\n');
    }
}

/// Serializes a model; identical models give identical text.
pub fn write_model(model: &Regressor) -> String {
    let mut out = String::new();
    match model {
        Regressor::Ridge(m) => {
            let _ = writeln!(out, "{FORMAT_MAGIC} {FORMAT_VERSION} ridge {} {}", m.input_dim(), m.output_dim());
            let _ = writeln!(out, "param alpha {:e}", m.alpha);
            write_tensor(&mut out, "w", m.w.rows(), m.w.cols(), m.w.data());
            write_tensor(&mut out, "b", 1, m.b.len(), &m.b);
        }
        Regressor::Mlp(m) => {
            let _ = write!(out, "{FORMAT_MAGIC} {FORMAT_VERSION} mlp");
            for d in m.dims() {
                let _ = write!(out, " {d}");
            }
            out.push('\n');
            let _ = writeln!(out, "param leaky_slope {:e}", m.leaky_slope);
            for (i, l) in m.layers.iter().enumerate() {
                write_tensor(&mut out, &alloc::format!("w{i}"), l.w.rows(), l.w.cols(), l.w.data());
                write_tensor(&mut out, &alloc::format!("b{i}"), 1, l.b.len(), &l.b);
            }
        }
    }
    out.push_str("end\n");
    out
}

struct Lines<'a> {
    inner: core::iter::Enumerate<core::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<&'a str> {
        for (i, l) in self.inner.by_ref() {
            let t = l.trim();
            if !t.is_empty() && !t.starts_with('#') {
                self.line = i + 1;
                return Some(t);
            }
        }
        None
    }

    fn err(&self, msg: impl ToString) -> Error {
        Error::ModelFormat { line: self.line, msg: msg.to_string() }
    }

    fn expect(&mut self) -> Result<&'a str> {
        self.next().ok_or_else(|| Error::ModelFormat { line: self.line + 1, msg: "unexpected end of file".into() })
    }

    fn number<T: core::str::FromStr>(&self, s: &str, what: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(alloc::format!("bad {what} '{s}'")))
    }

    fn param(&mut self, name: &str) -> Result<f64> {
        let l = self.expect()?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 3 || f[0] != "param" || f[1] != name {
            return Err(self.err(alloc::format!("expected 'param {name} <value>'")));
        }
        self.number(f[2], name)
    }

    fn tensor(&mut self, name: &str, rows: usize, cols: usize) -> Result<Vec<f64>> {
        let l = self.expect()?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 4 || f[0] != "tensor" || f[1] != name {
            return Err(self.err(alloc::format!("expected tensor '{name}'")));
        }
        let shape: (usize, usize) = (self.number(f[2], "rows")?, self.number(f[3], "cols")?);
        if shape != (rows, cols) {
            return Err(self.err(alloc::format!("tensor {name} is {}x{}, expected {rows}x{cols}", shape.0, shape.1)));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let l = self.expect()?;
            let before = data.len();
            for tok in l.split_whitespace() {
                let v: f64 = self.number(tok, "value")?;
                if !v.is_finite() {
                    return Err(self.err("non-finite value"));
                }
                data.push(v);
            }
            if data.len() - before != cols {
                return Err(self.err(alloc::format!("row has {} values, expected {cols}", data.len() - before)));
            }
        }
        Ok(data)
    }
}

/// Parses text written by [`write_model`].
pub fn read_model(text: &str) -> Result<Regressor> {
    let mut lines = Lines { inner: text.lines().enumerate(), line: 0 };
    let header = lines.expect()?;
    let f: Vec<&str> = header.split_whitespace().collect();
    if f.len() < 3 || f[0] != FORMAT_MAGIC {
        return Err(lines.err("missing rfppg-model header"));
    }
    let version: u32 = lines.number(f[1], "version")?;
    if version != FORMAT_VERSION {
        return Err(lines.err(alloc::format!("unsupported version {version}")));
    }
    let dims = f[3..].iter().map(|d| lines.number::<usize>(d, "dimension")).collect::<Result<Vec<_>>>()?;
    if dims.contains(&0) {
        return Err(lines.err("zero dimension"));
    }
    let model = match f[2] {
        "ridge" => {
            if dims.len() != 2 {
                return Err(lines.err("ridge needs two dimensions"));
            }
            let alpha = lines.param("alpha")?;
            let w = lines.tensor("w", dims[0], dims[1])?;
            let b = lines.tensor("b", 1, dims[1])?;
            Regressor::Ridge(RidgeModel { w: Matrix::from_vec(dims[0], dims[1], w)?, b, alpha })
        }
        "mlp" => {
            if dims.len() < 2 {
                return Err(lines.err("mlp needs at least two dimensions"));
            }
            let slope = lines.param("leaky_slope")?;
            let mut layers = Vec::new();
            for (i, d) in dims.windows(2).enumerate() {
                let w = lines.tensor(&alloc::format!("w{i}"), d[1], d[0])?;
                let b = lines.tensor(&alloc::format!("b{i}"), 1, d[1])?;
                layers.push(Layer { w: Matrix::from_vec(d[1], d[0], w)?, b });
            }
            Regressor::Mlp(MlpModel::from_layers(layers, slope)?)
        }
        other => return Err(lines.err(alloc::format!("unknown model kind '{other}'"))),
    };
    match lines.next() {
        Some("end") => {}
        _ => return Err(lines.err("expected 'end'")),
    }
    if let Some(_) = lines.next() {
        return Err(lines.err("trailing content after 'end'"));
    }
    Ok(model)
}
