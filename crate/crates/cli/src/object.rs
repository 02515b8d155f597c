//! `KIND:DIM[:X,Y]` object syntax.
//!
//! * `circle:D` – diameter `D`
//! * `box:W` or `box:WxH` – width `W`, height `H` (square when omitted)
//! * `plate:T` or `plate:TxW` – thickness `T` along the closing axis, width
//!   `W` upright (default [`DEFAULT_PLATE_WIDTH_MM`])
//!
//! Without `X,Y` the object stands centered on the support plane.

use anyhow::{anyhow, bail, Context};
use hoecken_core::{Point, Shape};

pub const DEFAULT_PLATE_WIDTH_MM: f64 = 20.0;

fn number(s: &str, what: &str) -> anyhow::Result<f64> {
    let v: f64 = s.trim().parse().with_context(|| format!("{what} `{s}` is not a number"))?;
    if !v.is_finite() {
        bail!("{what} must be finite");
    }
    Ok(v)
}

fn pair(s: &str, sep: char, what: &str) -> anyhow::Result<(f64, Option<f64>)> {
    match s.split_once(sep) {
        Some((a, b)) => Ok((number(a, what)?, Some(number(b, what)?))),
        None => Ok((number(s, what)?, None)),
    }
}

pub fn parse_object(spec: &str) -> anyhow::Result<Shape> {
    let mut parts = spec.splitn(3, ':');
    let kind = parts.next().unwrap_or_default();
    let dim = parts.next().ok_or_else(|| anyhow!("object `{spec}` needs KIND:DIM"))?;
    let center = parts
        .next()
        .map(|c| {
            let (x, y) = pair(c, ',', "center")?;
            let y = y.ok_or_else(|| anyhow!("center must be X,Y"))?;
            Ok::<_, anyhow::Error>(Point::new(x, y))
        })
        .transpose()?;
    let shape = match kind {
        "circle" => {
            let d = number(dim, "diameter")?;
            Shape::circle(center.unwrap_or(Point::new(0.0, 0.5 * d)), d)
        }
        "box" => {
            let (w, h) = pair(dim, 'x', "box size")?;
            let h = h.unwrap_or(w);
            Shape::rect(center.unwrap_or(Point::new(0.0, 0.5 * h)), w, h)
        }
        "plate" => {
            let (t, w) = pair(dim, 'x', "plate size")?;
            let w = w.unwrap_or(DEFAULT_PLATE_WIDTH_MM);
            Shape::plate(center.unwrap_or(Point::new(0.0, 0.5 * w)), w, t)
        }
        other => bail!("unknown object kind `{other}` (expected circle, box or plate)"),
    };
    shape.map_err(|e| anyhow!("object `{spec}`: {e}"))
}

/// File-name friendly form of an object spec.
pub fn label(spec: &str) -> String {
    spec.chars()
        .map(|c| match c {
            ':' | ',' => '_',
            '.' => 'p',
            c if c.is_ascii_alphanumeric() || c == '-' => c,
            _ => '_',
        })
        .collect()
}
