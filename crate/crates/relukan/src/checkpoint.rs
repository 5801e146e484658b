use crate::bspline::BsplineKanLayer;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::{Layer, ModelKind, NetConfig, Network};
use crate::relukan::{NormMode, ReluKanConfig, ReluKanLayer};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

const MAGIC: &str = "relukan-checkpoint v1";

/// Serializes a network as line-oriented text. Values use the shortest
/// decimal representation that parses back to the identical f64, so a
/// save/load round trip is bit-exact.
pub fn to_string(net: &Network) -> String {
    let mut out = String::new();
    let c = &net.config;
    out.push_str(MAGIC);
    out.push('\n');
    writeln!(out, "kind {}", c.kind.name()).unwrap();
    let widths: Vec<String> = c.widths.iter().map(|w| w.to_string()).collect();
    writeln!(out, "widths {}", widths.join(",")).unwrap();
    writeln!(out, "g {}", c.g).unwrap();
    writeln!(out, "k {}", c.k).unwrap();
    let norm = match c.norm_mode {
        NormMode::Constant => "constant",
        NormMode::Dynamic => "dynamic",
    };
    writeln!(out, "norm {norm}").unwrap();
    writeln!(out, "hidden_affine {}", c.hidden_affine).unwrap();
    writeln!(out, "init_scale {}", c.init_scale).unwrap();
    for layer in &net.layers {
        match layer {
            Layer::ReluKan(l) => {
                writeln!(out, "layer relukan").unwrap();
                for (i, w) in l.w.iter().enumerate() {
                    write_matrix(&mut out, &format!("W{i}"), w);
                }
                write_matrix(&mut out, "S", &l.s);
                write_matrix(&mut out, "E", &l.e);
            }
            Layer::Bspline(l) => {
                writeln!(out, "layer bspline").unwrap();
                for (i, c) in l.c.iter().enumerate() {
                    write_matrix(&mut out, &format!("C{i}"), c);
                }
                write_matrix(&mut out, "WB", &l.w_b);
                write_matrix(&mut out, "WS", &l.w_s);
            }
        }
    }
    out
}

fn write_matrix(out: &mut String, tag: &str, m: &Matrix) {
    write!(out, "{tag} {} {}", m.rows(), m.cols()).unwrap();
    for v in m.iter() {
        write!(out, " {v}").unwrap();
    }
    out.push('\n');
}

pub fn save(net: &Network, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(to_string(net).as_bytes())?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Network> {
    let f = std::fs::File::open(path)?;
    from_lines(BufReader::new(f).lines().collect::<std::io::Result<Vec<_>>>()?)
}

pub fn from_str(text: &str) -> Result<Network> {
    from_lines(text.lines().map(|s| s.to_string()).collect())
}

struct Parser {
    lines: Vec<String>,
    pos: usize,
}

impl Parser {
    fn next(&mut self) -> Result<&str> {
        let line = self
            .lines
            .get(self.pos)
            .ok_or_else(|| Error::Parse("unexpected end of checkpoint".into()))?;
        self.pos += 1;
        Ok(line)
    }

    fn peek(&self) -> Option<&str> {
        self.lines.get(self.pos).map(|s| s.as_str())
    }

    fn keyed(&mut self, key: &str) -> Result<String> {
        let line = self.next()?;
        let rest = line
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| Error::Parse(format!("expected '{key} ...', got '{line}'")))?;
        Ok(rest.to_string())
    }

    fn matrix(&mut self, tag: &str) -> Result<Matrix> {
        let line = self.next()?.to_string();
        let mut parts = line.split_whitespace();
        let got = parts
            .next()
            .ok_or_else(|| Error::Parse("empty matrix line".into()))?;
        if got != tag {
            return Err(Error::Parse(format!("expected matrix '{tag}', got '{got}'")));
        }
        let rows: usize = parse_field(parts.next(), "matrix rows")?;
        let cols: usize = parse_field(parts.next(), "matrix cols")?;
        let mut data = Vec::with_capacity(rows * cols);
        for p in parts {
            data.push(
                p.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad float '{p}' in matrix {tag}")))?,
            );
        }
        if data.len() != rows * cols {
            return Err(Error::Parse(format!(
                "matrix {tag} claims {rows}x{cols} but carries {} values",
                data.len()
            )));
        }
        Matrix::from_vec(rows, cols, data)
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, what: &str) -> Result<T> {
    field
        .ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .parse::<T>()
        .map_err(|_| Error::Parse(format!("bad {what}")))
}

fn from_lines(lines: Vec<String>) -> Result<Network> {
    let mut p = Parser { lines, pos: 0 };
    let magic = p.next()?;
    if magic != MAGIC {
        return Err(Error::Parse(format!(
            "unsupported checkpoint header '{magic}' (expected '{MAGIC}')"
        )));
    }
    let kind = ModelKind::parse(&p.keyed("kind")?)?;
    let widths: Vec<usize> = p
        .keyed("widths")?
        .split(',')
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad width '{s}'")))
        })
        .collect::<Result<_>>()?;
    if widths.len() < 2 {
        return Err(Error::Parse("checkpoint lists fewer than two widths".into()));
    }
    let g: usize = p
        .keyed("g")?
        .parse()
        .map_err(|_| Error::Parse("bad g".into()))?;
    let k: usize = p
        .keyed("k")?
        .parse()
        .map_err(|_| Error::Parse("bad k".into()))?;
    let norm_mode = match p.keyed("norm")?.as_str() {
        "constant" => NormMode::Constant,
        "dynamic" => NormMode::Dynamic,
        other => return Err(Error::Parse(format!("bad norm mode '{other}'"))),
    };
    let hidden_affine = match p.keyed("hidden_affine")?.as_str() {
        "true" => true,
        "false" => false,
        other => return Err(Error::Parse(format!("bad hidden_affine '{other}'"))),
    };
    let init_scale: f64 = p
        .keyed("init_scale")?
        .parse()
        .map_err(|_| Error::Parse("bad init_scale".into()))?;
    let mut config = NetConfig::new(kind, widths.clone(), g, k);
    config.norm_mode = norm_mode;
    config.hidden_affine = hidden_affine;
    config.init_scale = init_scale;
    let mut layers = Vec::with_capacity(widths.len() - 1);
    for t in 0..widths.len() - 1 {
        let n_in = widths[t];
        let n_out = widths[t + 1];
        let header = p.next()?.to_string();
        match (kind, header.as_str()) {
            (ModelKind::ReluKan1 | ModelKind::ReluKan2, "layer relukan") => {
                let mut w = Vec::with_capacity(n_out);
                for i in 0..n_out {
                    w.push(p.matrix(&format!("W{i}"))?);
                }
                let s = p.matrix("S")?;
                let e = p.matrix("E")?;
                let mut lc = ReluKanConfig::new(n_in, n_out, g, k);
                lc.trainable_endpoints = kind == ModelKind::ReluKan2;
                lc.norm_mode = norm_mode;
                lc.init_scale = init_scale;
                let nb = lc.n_basis();
                for (name, m) in [("S", &s), ("E", &e)] {
                    if m.shape() != (n_in, nb) {
                        return Err(Error::Parse(format!(
                            "layer {t}: {name} has shape {:?}, expected ({n_in}, {nb})",
                            m.shape()
                        )));
                    }
                }
                for (i, m) in w.iter().enumerate() {
                    if m.shape() != (n_in, nb) {
                        return Err(Error::Parse(format!(
                            "layer {t}: W{i} has shape {:?}, expected ({n_in}, {nb})",
                            m.shape()
                        )));
                    }
                }
                layers.push(Layer::ReluKan(ReluKanLayer {
                    config: lc,
                    s,
                    e,
                    w,
                }));
            }
            (ModelKind::Bspline, "layer bspline") => {
                let mut c = Vec::with_capacity(n_out);
                for i in 0..n_out {
                    c.push(p.matrix(&format!("C{i}"))?);
                }
                let w_b = p.matrix("WB")?;
                let w_s = p.matrix("WS")?;
                let grid = crate::bspline::BsplineGrid::new(g, k)?;
                let nb = grid.n_basis();
                for (i, m) in c.iter().enumerate() {
                    if m.shape() != (n_in, nb) {
                        return Err(Error::Parse(format!(
                            "layer {t}: C{i} has shape {:?}, expected ({n_in}, {nb})",
                            m.shape()
                        )));
                    }
                }
                if w_b.shape() != (n_out, n_in) || w_s.shape() != (n_out, n_in) {
                    return Err(Error::Parse(format!(
                        "layer {t}: gain matrices must be ({n_out}, {n_in})"
                    )));
                }
                layers.push(Layer::Bspline(BsplineKanLayer {
                    n_in,
                    n_out,
                    grid,
                    c,
                    w_b,
                    w_s,
                }));
            }
            (_, other) => {
                return Err(Error::Parse(format!(
                    "layer {t}: unexpected record '{other}' for model kind {}",
                    kind.name()
                )))
            }
        }
    }
    if let Some(extra) = p.peek() {
        if !extra.trim().is_empty() {
            return Err(Error::Parse(format!(
                "trailing content after last layer: '{extra}'"
            )));
        }
    }
    Ok(Network { config, layers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::build;
    use tempfile::tempdir;

    fn sample_net(kind: ModelKind) -> Network {
        let mut c = NetConfig::new(kind, vec![2, 3, 1], 5, 3);
        c.hidden_affine = true;
        build(c, 42).unwrap()
    }

    fn params_equal(a: &Network, b: &Network) -> bool {
        to_string(a) == to_string(b)
    }

    #[test]
    fn round_trip_is_bit_exact_relukan() {
        let net = sample_net(ModelKind::ReluKan2);
        let text = to_string(&net);
        let back = from_str(&text).unwrap();
        assert!(params_equal(&net, &back));
        // spot-check an actual weight bitwise
        match (&net.layers[0], &back.layers[0]) {
            (Layer::ReluKan(a), Layer::ReluKan(b)) => {
                for (x, y) in a.w[0].iter().zip(b.w[0].iter()) {
                    assert_eq!(x.to_bits(), y.to_bits());
                }
                assert_eq!(a.config.trainable_endpoints, b.config.trainable_endpoints);
            }
            _ => panic!("wrong kind after load"),
        }
    }

    #[test]
    fn round_trip_is_bit_exact_bspline() {
        let net = sample_net(ModelKind::Bspline);
        let back = from_str(&to_string(&net)).unwrap();
        assert!(params_equal(&net, &back));
        let x = [0.37, 0.81];
        assert_eq!(net.forward(&x).unwrap(), back.forward(&x).unwrap());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let net = sample_net(ModelKind::ReluKan1);
        save(&net, &path).unwrap();
        let back = load(&path).unwrap();
        assert!(params_equal(&net, &back));
    }

    #[test]
    fn awkward_floats_survive() {
        let mut net = sample_net(ModelKind::ReluKan2);
        if let Layer::ReluKan(l) = &mut net.layers[0] {
            l.w[0].set(0, 0, f64::MIN_POSITIVE);
            l.w[0].set(0, 1, 1.0 + f64::EPSILON);
            l.w[0].set(0, 2, -2.2250738585072014e-308);
            l.w[0].set(0, 3, 1e300);
        }
        let back = from_str(&to_string(&net)).unwrap();
        assert!(params_equal(&net, &back));
    }

    #[test]
    fn wrong_version_and_malformed_bodies_are_rejected() {
        assert!(matches!(
            from_str("relukan-checkpoint v2\n"),
            Err(Error::Parse(_))
        ));
        let net = sample_net(ModelKind::ReluKan2);
        let text = to_string(&net);
        // truncate mid-matrix
        let cut = &text[..text.len() / 2];
        assert!(from_str(cut).is_err());
        // corrupt a dimension
        let bad = text.replacen("S 2 8", "S 2 9", 1);
        assert!(matches!(from_str(&bad), Err(Error::Parse(_))));
    }
}
