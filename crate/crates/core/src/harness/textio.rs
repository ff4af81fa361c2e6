//! Plain-text matrices and vectors.
//!
//! A matrix file starts with a header line `n p` (dimension and ambient
//! norm exponent, `inf` allowed) followed by `n` rows of `n` complex tokens.
//! A vector file starts with `n` followed by `n` tokens. Tokens are written
//! `re`, `imj` or `re+imj` (`i` is accepted for `j`); `#` starts a comment.

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};
use crate::operator::FiniteOperator;
use crate::C64;

/// Parses one complex token such as `1.5`, `-2e-3j`, `0.5-1j` or `j`.
pub fn parse_complex(token: &str) -> Result<C64> {
    let t = token.trim();
    let bad = || Error::Parse(format!("invalid complex token `{token}`"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix(['j', 'i']) else {
        return t.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent or leading
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |s: &str| -> Result<f64> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => s.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            Ok(C64::new(re, imag(&body[i..])?))
        }
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

pub fn format_complex(z: C64) -> String {
    format!("{:e}{:+e}j", z.re, z.im)
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty())
}

fn parse_p(token: &str) -> Result<f64> {
    let p = match token {
        "inf" | "infinity" | "Infinity" => f64::INFINITY,
        _ => token
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("invalid norm exponent `{token}`")))?,
    };
    if !(p >= 1.0) {
        return Err(Error::Parse(format!("norm exponent {p} must be at least 1")));
    }
    Ok(p)
}

/// Parses a matrix file into an operator.
pub fn parse_operator(text: &str) -> Result<FiniteOperator> {
    let mut lines = content_lines(text);
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let head: Vec<&str> = tokens(header).collect();
    if head.len() != 2 {
        return Err(Error::Parse(format!("header must be `n p`, got `{header}`")));
    }
    let n: usize = head[0]
        .parse()
        .map_err(|_| Error::Parse(format!("invalid dimension `{}`", head[0])))?;
    let p = parse_p(head[1])?;
    let mut rows = Vec::with_capacity(n);
    for (number, line) in lines {
        let row = tokens(line).map(parse_complex).collect::<Result<Vec<_>>>()?;
        if row.len() != n {
            return Err(Error::Parse(format!("line {number}: expected {n} entries, got {}", row.len())));
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(Error::Parse(format!("expected {n} rows, got {}", rows.len())));
    }
    FiniteOperator::new(CMat::from_fn(n, n, |i, j| rows[i][j]), p)
}

pub fn parse_vector(text: &str) -> Result<CVec> {
    let mut lines = content_lines(text);
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty vector file".into()))?;
    let n: usize = header
        .parse()
        .map_err(|_| Error::Parse(format!("vector header must be the length, got `{header}`")))?;
    let values = lines
        .flat_map(|(_, l)| tokens(l))
        .map(parse_complex)
        .collect::<Result<Vec<_>>>()?;
    if values.len() != n {
        return Err(Error::Parse(format!("expected {n} entries, got {}", values.len())));
    }
    Ok(CVec::from_vec(values))
}

pub fn format_matrix(m: &CMat, p: f64) -> String {
    let p = if p.is_infinite() { "inf".to_string() } else { p.to_string() };
    let mut out = format!("{} {p}\n", m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_complex(m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn format_operator(op: &FiniteOperator) -> String {
    format_matrix(op.entries(), op.ambient_p())
}

pub fn format_vector(v: &CVec) -> String {
    let mut out = format!("{}\n", v.len());
    let body: Vec<String> = v.iter().map(|&z| format_complex(z)).collect();
    out.push_str(&body.join(" "));
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_tokens() {
        let cases = [
            ("1.5", C64::new(1.5, 0.0)),
            ("-2", C64::new(-2.0, 0.0)),
            ("3j", C64::new(0.0, 3.0)),
            ("-j", C64::new(0.0, -1.0)),
            ("0.5-1j", C64::new(0.5, -1.0)),
            ("1e-3+2.5e+1j", C64::new(1e-3, 25.0)),
            ("-1.0E-2-4i", C64::new(-0.01, -4.0)),
        ];
        for (t, z) in cases {
            assert_eq!(parse_complex(t).unwrap(), z, "{t}");
        }
        for bad in ["", "x", "1+", "1..2j", "2jj"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn matrix_round_trip() {
        let text = "# a Jordan block\n2 2\n0.9 1\n0 0.9+0.1j\n";
        let op = parse_operator(text).unwrap();
        assert_eq!(op.entries()[(1, 1)], C64::new(0.9, 0.1));
        let again = parse_operator(&format_operator(&op)).unwrap();
        assert_eq!(again, op);
        let v = CVec::from_vec(vec![C64::new(1.0, -2.0), C64::new(0.0, 1e-17)]);
        assert_eq!(parse_vector(&format_vector(&v)).unwrap(), v);
        let inf = parse_operator("1 inf\n3\n").unwrap();
        assert!(inf.ambient_p().is_infinite());
    }

    #[test]
    fn malformed_matrices() {
        assert!(parse_operator("").is_err());
        assert!(parse_operator("2\n1 0\n0 1\n").is_err());
        assert!(parse_operator("2 2\n1 0\n0\n").is_err());
        assert!(parse_operator("2 2\n1 0\n").is_err());
        assert!(parse_operator("1 0.5\n1\n").is_err());
        assert!(parse_vector("3\n1 2\n").is_err());
    }
}
