//! Parsing of numeric expressions, grid strings, presets and domain files.

use std::f64::consts::PI;

use serde::Deserialize;
use steklov_core::geometry::{ConeDomain, CylinderBase, CylinderDomain, Domain, Point, PolygonalDomain};
use steklov_core::{Error, Result};

/// Largest grid an input may expand to.
pub const MAX_GRID: usize = 10_000_000;

/// A number, `pi`, or a product/quotient of those (`pi/4`, `3*pi/8`, `-2pi`).
pub fn number(text: &str) -> Result<f64> {
    let t = text.trim().to_ascii_lowercase();
    let bad = || Error::Parse(format!("cannot read '{text}' as a number"));
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.as_str()),
    };
    if body.is_empty() {
        return Err(bad());
    }
    let mut value = 1.0;
    let mut divide = false;
    let mut factor = String::new();
    let apply = |factor: &str, divide: bool, value: &mut f64| -> Result<()> {
        let f = atom(factor).ok_or_else(bad)?;
        if divide {
            *value /= f;
        } else {
            *value *= f;
        }
        Ok(())
    };
    for c in body.chars() {
        if c == '*' || c == '/' {
            apply(&factor, divide, &mut value)?;
            factor.clear();
            divide = c == '/';
        } else {
            factor.push(c);
        }
    }
    apply(&factor, divide, &mut value)?;
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(if neg { -value } else { value })
}

fn atom(s: &str) -> Option<f64> {
    let s = s.trim();
    if s == "pi" {
        return Some(PI);
    }
    if let Some(coef) = s.strip_suffix("pi") {
        return coef.parse::<f64>().ok().map(|c| c * PI);
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// `start:stop:step`, `logN(start,stop)`, or a comma-separated list.
/// The result is strictly increasing.
pub fn grid(input: &str) -> Result<Vec<f64>> {
    let s = input.trim();
    let g = if let Some(rest) = s.strip_prefix("log") {
        let open = rest.find('(').ok_or_else(|| Error::Parse(format!("bad log grid '{input}'")))?;
        let count: usize = rest[..open]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad point count in '{input}'")))?;
        let inner = rest[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| Error::Parse(format!("missing ')' in '{input}'")))?;
        let (a, b) = inner.split_once(',').ok_or_else(|| Error::Parse(format!("expected logN(start,stop), got '{input}'")))?;
        let (a, b) = (number(a)?, number(b)?);
        if !(a > 0.0 && b > a) || !(2..=MAX_GRID).contains(&count) {
            return Err(Error::InvalidArgument(format!(
                "log grid needs 0 < start < stop and 2 ≤ N ≤ {MAX_GRID}, got '{input}'"
            )));
        }
        let (la, lb) = (a.ln(), b.ln());
        (0..count)
            .map(|i| match i {
                0 => a,
                i if i == count - 1 => b,
                i => (la + (lb - la) * i as f64 / (count - 1) as f64).exp(),
            })
            .collect()
    } else if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected start:stop:step, got '{input}'")));
        }
        let (a, b, h) = (number(parts[0])?, number(parts[1])?, number(parts[2])?);
        if !(h > 0.0) || b < a {
            return Err(Error::InvalidArgument(format!("grid '{input}' needs step > 0 and stop ≥ start")));
        }
        let n = ((b - a) / h + 1e-9).floor();
        if n >= MAX_GRID as f64 {
            return Err(Error::InvalidArgument(format!("grid '{input}' has more than {MAX_GRID} points")));
        }
        (0..=n as usize).map(|i| a + i as f64 * h).collect()
    } else {
        s.split(',').map(number).collect::<Result<Vec<f64>>>()?
    };
    if g.is_empty() {
        return Err(Error::InvalidArgument(format!("grid '{input}' is empty")));
    }
    if g.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!("grid '{input}' is not strictly increasing")));
    }
    Ok(g)
}

/// `a:b` fit window.
pub fn window(input: &str) -> Result<[f64; 2]> {
    let (a, b) = input
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("expected a window 'start:stop', got '{input}'")))?;
    Ok([number(a)?, number(b)?])
}

/// A domain together with whether a closed-form spectrum is known for it.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub domain: Domain,
    pub exact: bool,
}

fn args(name: &str, body: &str, n: &[usize]) -> Result<Vec<f64>> {
    let v: Vec<f64> = body.split(',').map(number).collect::<Result<_>>()?;
    if !n.contains(&v.len()) {
        return Err(Error::Parse(format!(
            "preset '{name}' takes {} parameters, got {}",
            n.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" or "),
            v.len()
        )));
    }
    if let Some(x) = v.iter().find(|x| !(**x > 0.0)) {
        return Err(Error::InvalidArgument(format!("preset parameters must be positive, got {x}")));
    }
    Ok(v)
}

/// `rectangle:ℓ,h`, `triangle:L,α` (isoceles), `trapezoid:L,h,α`,
/// `cylinder:ℓ,h` or `cylinder:a,b,h`, `cone:α,h`.
pub fn preset(input: &str) -> Result<Geometry> {
    let (name, body) = input
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("expected name:params, got '{input}'")))?;
    let name = name.trim().to_ascii_lowercase();
    Ok(match name.as_str() {
        "rectangle" => {
            let v = args(&name, body, &[2])?;
            Geometry { domain: Domain::Polygon(PolygonalDomain::rectangle(v[0], v[1])?), exact: true }
        }
        "triangle" | "isoceles-triangle" => {
            let v = args(&name, body, &[2])?;
            Geometry { domain: Domain::Polygon(PolygonalDomain::isoceles_triangle(v[0], v[1])?), exact: false }
        }
        "trapezoid" => {
            let v = args(&name, body, &[3])?;
            Geometry { domain: Domain::Polygon(PolygonalDomain::trapezoid(v[0], v[1], v[2])?), exact: false }
        }
        "cylinder" => {
            let v = args(&name, body, &[2, 3])?;
            let c = if v.len() == 2 {
                CylinderDomain::new(2, CylinderBase::Interval { length: v[0] }, v[1])?
            } else {
                CylinderDomain::new(3, CylinderBase::Rectangle { a: v[0], b: v[1] }, v[2])?
            };
            Geometry { domain: Domain::Cylinder(c), exact: true }
        }
        "cone" => {
            let v = args(&name, body, &[2])?;
            Geometry { domain: Domain::Cone(ConeDomain::new(v[0], v[1])?), exact: false }
        }
        other => {
            return Err(Error::Parse(format!(
                "unknown preset '{other}' (rectangle, triangle, trapezoid, cylinder, cone)"
            )))
        }
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolygonFile {
    vertices: Vec<[f64; 2]>,
    free_edges: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BaseFile {
    Length(f64),
    Sides([f64; 2]),
    Full(CylinderBase),
}

#[derive(Deserialize)]
struct CylinderFile {
    n: u32,
    base: BaseFile,
    h: f64,
}

#[derive(Deserialize)]
struct ConeFile {
    alpha: f64,
    h: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DomainFile {
    Polygon(PolygonFile),
    Cylinder { cylinder: CylinderFile },
    Cone { cone: ConeFile },
}

/// Domain JSON: `{"vertices": [[x, y], …], "free_edges": [i, …]}`,
/// `{"cylinder": {"n": 3, "base": [a, b], "h": 1}}` (base may also be a
/// length or an explicit eigenvalue list), or `{"cone": {"alpha": …, "h": …}}`.
pub fn domain_json(text: &str, origin: &str) -> Result<Geometry> {
    let file: DomainFile = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("{origin}: not a recognised domain description ({e})")))?;
    Ok(match file {
        DomainFile::Polygon(p) => {
            let v = p.vertices.iter().map(|[x, y]| Point::new(*x, *y)).collect();
            Geometry { domain: Domain::Polygon(PolygonalDomain::new(v, &p.free_edges)?), exact: false }
        }
        DomainFile::Cylinder { cylinder: c } => {
            let base = match c.base {
                BaseFile::Length(length) => CylinderBase::Interval { length },
                BaseFile::Sides([a, b]) => CylinderBase::Rectangle { a, b },
                BaseFile::Full(b) => b,
            };
            Geometry { domain: Domain::Cylinder(CylinderDomain::new(c.n, base, c.h)?), exact: true }
        }
        DomainFile::Cone { cone } => Geometry { domain: Domain::Cone(ConeDomain::new(cone.alpha, cone.h)?), exact: false },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(number("1.5").unwrap(), 1.5);
        assert_eq!(number("pi").unwrap(), PI);
        assert_eq!(number("pi/4").unwrap(), PI / 4.0);
        assert_eq!(number("3*pi/8").unwrap(), 3.0 * PI / 8.0);
        assert_eq!(number("-2pi").unwrap(), -2.0 * PI);
        assert!(number("pie").is_err());
        assert!(number("").is_err());
        assert!(number("1/0").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(grid("0:2:0.5").unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(grid("1:500:1").unwrap().len(), 500);
        let g = grid("log2000(0.1,1000)").unwrap();
        assert_eq!(g.len(), 2000);
        assert_eq!((g[0], g[1999]), (0.1, 1000.0));
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(grid("0.1, 1").unwrap(), vec![0.1, 1.0]);
        assert!(grid("2,1").is_err());
        assert!(grid("0:1:0").is_err());
        assert!(grid("log1(1,2)").is_err());
        assert!(matches!(grid("a:b"), Err(Error::Parse(_))));
    }

    #[test]
    fn presets() {
        let g = preset("rectangle:pi,1").unwrap();
        assert!(g.exact);
        assert!((g.domain.free_area() - PI).abs() < 1e-15);
        let t = preset("triangle:pi,pi/4").unwrap();
        assert!(!t.exact && (t.domain.depth() - PI / 2.0).abs() < 1e-12);
        assert_eq!(preset("cylinder:1,2,1").unwrap().domain.dimension(), 3);
        assert!(preset("cone:pi/4,1").is_ok());
        assert!(preset("rectangle:1").is_err());
        assert!(preset("rectangle:1,-1").is_err());
        assert!(preset("disk:1").is_err());
    }

    #[test]
    fn domain_files() {
        let p = domain_json(r#"{"vertices": [[0,0],[0,-1],[2,-1],[2,0]], "free_edges": [3]}"#, "x").unwrap();
        assert!((p.domain.free_area() - 2.0).abs() < 1e-15);
        let c = domain_json(r#"{"cylinder": {"n": 3, "base": [1, 2], "h": 0.5}}"#, "x").unwrap();
        assert!(c.exact && (c.domain.free_area() - 2.0).abs() < 1e-15);
        let c = domain_json(r#"{"cylinder": {"n": 2, "base": 3, "h": 1}}"#, "x").unwrap();
        assert_eq!(c.domain.dimension(), 2);
        assert!(domain_json(r#"{"cone": {"alpha": 0.7, "h": 1}}"#, "x").is_ok());
        assert!(matches!(domain_json("{}", "x"), Err(Error::Parse(_))));
    }
}
