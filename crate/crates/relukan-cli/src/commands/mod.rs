use relukan::{Error, ModelKind, NormMode, Result};

pub mod bench;
pub mod fit;
pub mod forget;
pub mod gradcheck;

pub fn parse_widths(s: &str) -> Result<Vec<usize>> {
    let widths: Vec<usize> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::Param(format!("bad width '{p}' in '{s}'")))
        })
        .collect::<Result<_>>()?;
    if widths.len() < 2 {
        return Err(Error::Param(format!(
            "widths must list at least input and output, got '{s}'"
        )));
    }
    Ok(widths)
}

pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let seeds: Vec<u64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<u64>()
                .map_err(|_| Error::Param(format!("bad seed '{p}' in '{s}'")))
        })
        .collect::<Result<_>>()?;
    if seeds.is_empty() {
        return Err(Error::Param("at least one seed required".into()));
    }
    Ok(seeds)
}

pub fn parse_norm(s: &str) -> Result<NormMode> {
    match s {
        "constant" => Ok(NormMode::Constant),
        "dynamic" => Ok(NormMode::Dynamic),
        other => Err(Error::Param(format!(
            "unknown norm mode '{other}' (expected constant or dynamic)"
        ))),
    }
}

/// All three models when no --model is given.
pub fn resolve_models(arg: Option<&str>) -> Result<Vec<ModelKind>> {
    match arg {
        Some(m) => Ok(vec![ModelKind::parse(m)?]),
        None => Ok(vec![
            ModelKind::ReluKan1,
            ModelKind::ReluKan2,
            ModelKind::Bspline,
        ]),
    }
}

pub fn join_usize(values: &[usize]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn join_u64(values: &[u64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
