use fiberaudit_core::{BoxBounds, Error, Point, Result, DEFAULT_SEED};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seed {
    Default,
    Fixed(u64),
    Random,
}

impl Seed {
    pub fn resolve(self) -> u64 {
        match self {
            Seed::Default => DEFAULT_SEED,
            Seed::Fixed(s) => s,
            Seed::Random => rand::random(),
        }
    }
}

pub fn parse_seed(s: &str) -> std::result::Result<Seed, String> {
    match s {
        "default" => Ok(Seed::Default),
        "random" => Ok(Seed::Random),
        _ => parse_count(s).map(Seed::Fixed),
    }
}

pub fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

/// Nonnegative integer, also accepted in scientific notation (`1e4`).
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    let t = s.trim();
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let v = parse_real(t)?;
    if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(format!("`{s}` is not a nonnegative integer"));
    }
    Ok(v as u64)
}

pub fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|part| parse_real(part).map_err(|e| Error::Input(format!("{what}: {e}"))))
        .collect()
}

pub fn parse_point(s: &str, what: &str) -> Result<Point> {
    Point::new(parse_list(s, what)?)
}

/// `lo:hi,lo:hi,...`, or a single `lo:hi` repeated `dim` times.
pub fn parse_box(s: &str, dim: usize) -> Result<BoxBounds> {
    let sides: Vec<(f64, f64)> = s
        .split(',')
        .map(|side| {
            let (lo, hi) = side.split_once(':').ok_or_else(|| {
                Error::Input(format!("box side `{side}` is not of the form lo:hi"))
            })?;
            let lo = parse_real(lo).map_err(|e| Error::Input(format!("box: {e}")))?;
            let hi = parse_real(hi).map_err(|e| Error::Input(format!("box: {e}")))?;
            Ok((lo, hi))
        })
        .collect::<Result<_>>()?;
    let sides = match sides.len() {
        1 => vec![sides[0]; dim],
        k if k == dim => sides,
        k => {
            return Err(Error::Input(format!(
                "box has {k} sides, expected 1 or {dim}"
            )))
        }
    };
    BoxBounds::new(
        sides.iter().map(|s| s.0).collect(),
        sides.iter().map(|s| s.1).collect(),
    )
}
