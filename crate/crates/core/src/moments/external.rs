use serde_json::Value;

use super::{MomentError, MomentSet, Provenance};
use crate::poly::parse_rational;

/// Reads a moments document, either `{"var", "n", "values"}` or
/// `{"var", "n", "closed_form"}`. Closed forms are evaluated at `n_override`
/// when given, otherwise at the document's `n`.
pub fn load_moments(text: &str, n_override: Option<u64>) -> Result<MomentSet, MomentError> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| MomentError::Schema(format!("invalid JSON: {}", e)))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| MomentError::Schema("expected an object".into()))?;
    let var = obj
        .get("var")
        .and_then(Value::as_str)
        .ok_or_else(|| MomentError::Schema("missing string field \"var\"".into()))?
        .to_string();
    let doc_n = match obj.get("n") {
        None => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| MomentError::Schema("\"n\" must be a non-negative integer".into()))?,
        ),
    };
    let provenance = match obj.get("provenance") {
        None => Provenance::External,
        Some(p) => serde_json::from_value(p.clone())
            .map_err(|_| MomentError::Schema("unknown provenance".into()))?,
    };

    let (values, exact, n) = match (obj.get("values"), obj.get("closed_form")) {
        (Some(_), Some(_)) => {
            return Err(MomentError::Schema(
                "\"values\" and \"closed_form\" are mutually exclusive".into(),
            ))
        }
        (None, None) => {
            return Err(MomentError::Schema(
                "one of \"values\" or \"closed_form\" is required".into(),
            ))
        }
        (Some(v), None) => {
            let arr = v
                .as_array()
                .ok_or_else(|| MomentError::Schema("\"values\" must be an array".into()))?;
            let values = arr
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| MomentError::Schema("\"values\" must hold numbers".into()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let exact = match obj.get("exact") {
                None => None,
                Some(e) => Some(
                    e.as_array()
                        .ok_or_else(|| MomentError::Schema("\"exact\" must be an array".into()))?
                        .iter()
                        .map(|s| s.as_str().and_then(parse_rational))
                        .collect::<Option<Vec<_>>>()
                        .filter(|ex| ex.len() == values.len())
                        .ok_or_else(|| MomentError::Schema("malformed \"exact\" entries".into()))?,
                ),
            };
            (values, exact, doc_n.unwrap_or(0))
        }
        (None, Some(cf)) => {
            let arr = cf
                .as_array()
                .ok_or_else(|| MomentError::Schema("\"closed_form\" must be an array".into()))?;
            let n = n_override.or(doc_n).ok_or_else(|| {
                MomentError::Schema("closed forms need \"n\" or an explicit iteration".into())
            })?;
            let values = arr
                .iter()
                .map(|x| {
                    let s = x.as_str().ok_or_else(|| {
                        MomentError::Schema("\"closed_form\" must hold strings".into())
                    })?;
                    eval_closed_form(s, n as f64)
                })
                .collect::<Result<Vec<_>, _>>()?;
            (values, None, n)
        }
    };
    if values.is_empty() {
        return Err(MomentError::Schema("at least one moment is required".into()));
    }
    Ok(MomentSet {
        var,
        n,
        values,
        exact,
        provenance,
    })
}

/// Evaluates an arithmetic expression in `n` with `+ - * / ^`, parentheses
/// and the constant `e`.
pub fn eval_closed_form(expr: &str, n: f64) -> Result<f64, MomentError> {
    let fail = |reason: &str| MomentError::Eval {
        expr: expr.to_string(),
        reason: reason.to_string(),
    };
    let tokens = lex(expr).map_err(|r| fail(&r))?;
    let mut p = Pratt {
        tokens: &tokens,
        pos: 0,
        n,
    };
    let v = p.expr(0).map_err(|r| fail(&r))?;
    if p.pos != tokens.len() {
        return Err(fail("trailing input"));
    }
    if !v.is_finite() {
        return Err(fail("result is not finite"));
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    N,
    E,
    Op(char),
    LParen,
    RParen,
}

fn lex(s: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' | '-' | '*' | '/' | '^' => {
                out.push(Tok::Op(c));
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            'n' => {
                out.push(Tok::N);
                i += 1;
            }
            'e' => {
                out.push(Tok::E);
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push(Tok::Num(
                    text.parse().map_err(|_| format!("bad number `{}`", text))?,
                ));
            }
            other => return Err(format!("unexpected character `{}`", other)),
        }
    }
    Ok(out)
}

struct Pratt<'a> {
    tokens: &'a [Tok],
    pos: usize,
    n: f64,
}

impl Pratt<'_> {
    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self, min_bp: u8) -> Result<f64, String> {
        let mut lhs = match self.next() {
            Some(Tok::Num(v)) => v,
            Some(Tok::N) => self.n,
            Some(Tok::E) => std::f64::consts::E,
            Some(Tok::LParen) => {
                let v = self.expr(0)?;
                if self.next() != Some(Tok::RParen) {
                    return Err("expected `)`".into());
                }
                v
            }
            // unary minus binds looser than `^`: -2^2 = -4
            Some(Tok::Op('-')) => -self.expr(5)?,
            Some(Tok::Op('+')) => self.expr(5)?,
            Some(t) => return Err(format!("unexpected {:?}", t)),
            None => return Err("unexpected end of expression".into()),
        };
        loop {
            let op = match self.tokens.get(self.pos) {
                Some(Tok::Op(op)) => *op,
                Some(Tok::RParen) | None => break,
                Some(t) => return Err(format!("unexpected {:?}", t)),
            };
            let (lbp, rbp) = match op {
                '+' | '-' => (1, 2),
                '*' | '/' => (3, 4),
                '^' => (8, 7),
                _ => unreachable!(),
            };
            if lbp < min_bp {
                break;
            }
            self.pos += 1;
            let rhs = self.expr(rbp)?;
            lhs = match op {
                '+' => lhs + rhs,
                '-' => lhs - rhs,
                '*' => lhs * rhs,
                '/' => lhs / rhs,
                _ => lhs.powf(rhs),
            };
        }
        Ok(lhs)
    }
}
