//! Inline exponent grammar: `const:<v>`, `lerner:a=<α>,b=<β>`, `file:<path>`.

use std::path::Path;

use vexlab_core::exponent::{build_exponent, ExponentSpec};
use vexlab_core::expr::Expr;

use crate::error::{spec_error, HarnessError, HarnessResult};

/// Parses an inline exponent for dimension `n` and checks that it builds.
pub fn parse_exponent(text: &str, n: usize) -> HarnessResult<ExponentSpec> {
    let (head, rest) = text
        .split_once(':')
        .ok_or_else(|| HarnessError::Spec(format!("exponent {text:?}: expected const:, lerner: or file:")))?;
    let spec = match head.trim() {
        "const" => {
            let v: f64 = rest
                .trim()
                .parse()
                .map_err(|_| HarnessError::Spec(format!("exponent {text:?}: bad constant")))?;
            ExponentSpec::constant(v, n)
        }
        "lerner" => {
            let (mut alpha, mut beta) = (None, None);
            for part in rest.split(',') {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| HarnessError::Spec(format!("exponent {text:?}: expected key=value")))?;
                let v: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| HarnessError::Spec(format!("exponent {text:?}: bad number {v:?}")))?;
                match k.trim() {
                    "a" | "alpha" => alpha = Some(v),
                    "b" | "beta" => beta = Some(v),
                    other => return Err(HarnessError::Spec(format!("exponent {text:?}: unknown key {other:?}"))),
                }
            }
            match (alpha, beta) {
                (Some(a), Some(b)) => ExponentSpec::lerner(a, b, n),
                _ => return Err(HarnessError::Spec(format!("exponent {text:?}: need a= and b="))),
            }
        }
        "file" => read_spec(Path::new(rest.trim()))?,
        other => return Err(HarnessError::Spec(format!("exponent {text:?}: unknown kind {other:?}"))),
    };
    build_exponent(&spec).map_err(|e| spec_error("exponent", e))?;
    Ok(spec)
}

fn read_spec(path: &Path) -> HarnessResult<ExponentSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| HarnessError::Io { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Spec(format!("{}: {e}", path.display())))
}

/// Parses a function expression and checks it fits dimension `n`.
pub fn parse_function(text: &str, n: usize) -> HarnessResult<Expr> {
    let expr = Expr::parse(text).map_err(|e| spec_error("function", e))?;
    if expr.min_dimension() > n {
        return Err(HarnessError::Spec(format!(
            "function {text:?} uses x{} but the domain has dimension {n}",
            expr.min_dimension()
        )));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_and_lerner() {
        let s = parse_exponent("const:2", 1).unwrap();
        assert_eq!(s.family, "constant");
        let s = parse_exponent("lerner:a=0.1,b=0.05", 2).unwrap();
        assert_eq!(s.dimension, 2);
    }

    #[test]
    fn rejects_invalid() {
        let e = parse_exponent("const:1", 1).unwrap_err().to_string();
        assert!(e.contains("p_- must exceed 1"), "{e}");
        let e = parse_exponent("lerner:a=0.05,b=0.1", 1).unwrap_err().to_string();
        assert!(e.contains("require 0<β<α"), "{e}");
        for bad in ["const", "const:x", "lerner:a=0.1", "lerner:z=1,b=2", "magic:3"] {
            assert!(matches!(parse_exponent(bad, 1), Err(HarnessError::Spec(_))), "{bad}");
        }
        assert!(matches!(parse_exponent("file:/nonexistent/p.json", 1), Err(HarnessError::Io { .. })));
    }

    #[test]
    fn function_dimension() {
        assert!(parse_function("x2 + 1", 1).is_err());
        assert!(parse_function("x2 + 1", 2).is_ok());
        assert!(parse_function("indicator(0,", 1).is_err());
    }
}
