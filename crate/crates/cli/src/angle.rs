//! Angle arguments: plain radians or arithmetic in `pi`.
//!
//! Accepted forms include `0.3927`, `pi/8`, `0.3pi`, `3*pi/8`, `pi/8+1e-6`
//! and `(1/5)π`. A number directly followed by `pi` multiplies it.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Pi,
    Op(char),
    Open,
    Close,
}

fn tokenize(s: &str) -> Result<Vec<Token>, String> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' | '-' | '*' | '/' => {
                out.push(Token::Op(c));
                i += 1;
            }
            '(' => {
                out.push(Token::Open);
                i += 1;
            }
            ')' => {
                out.push(Token::Close);
                i += 1;
            }
            'π' => {
                out.push(Token::Pi);
                i += 1;
            }
            'p' | 'P' if matches!(chars.get(i + 1), Some('i' | 'I')) => {
                out.push(Token::Pi);
                i += 2;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && matches!(chars[i], 'e' | 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && matches!(chars[j], '+' | '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let value = text
                    .parse::<f64>()
                    .map_err(|_| format!("bad number `{text}`"))?;
                out.push(Token::Num(value));
            }
            _ => return Err(format!("unexpected character `{c}`")),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<f64, String> {
        let mut value = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            value = if op == '+' { value + rhs } else { value - rhs };
        }
        Ok(value)
    }

    fn term(&mut self) -> Result<f64, String> {
        let mut value = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Op('*')) => {
                    self.pos += 1;
                    value *= self.factor()?;
                }
                Some(Token::Op('/')) => {
                    self.pos += 1;
                    value /= self.factor()?;
                }
                Some(Token::Pi | Token::Open) => value *= self.factor()?,
                _ => return Ok(value),
            }
        }
    }

    fn factor(&mut self) -> Result<f64, String> {
        match self.next() {
            Some(Token::Num(v)) => Ok(v),
            Some(Token::Pi) => Ok(PI),
            Some(Token::Op('-')) => Ok(-self.factor()?),
            Some(Token::Op('+')) => self.factor(),
            Some(Token::Open) => {
                let v = self.expr()?;
                match self.next() {
                    Some(Token::Close) => Ok(v),
                    _ => Err("missing `)`".into()),
                }
            }
            Some(t) => Err(format!("unexpected {t:?}")),
            None => Err("unexpected end of input".into()),
        }
    }
}

/// Parse an angle expression to radians.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let mut parser = Parser {
        tokens: tokenize(s)?,
        pos: 0,
    };
    let value = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(format!("trailing input in `{s}`"));
    }
    if !value.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        let cases = [
            ("0.5", 0.5),
            ("pi", PI),
            ("pi/8", PI / 8.0),
            ("0.3pi", 0.3 * PI),
            ("0.3 * pi", 0.3 * PI),
            ("3pi/8", 3.0 * PI / 8.0),
            ("pi/8+1e-6", PI / 8.0 + 1e-6),
            ("pi/8 - 2E-3", PI / 8.0 - 2e-3),
            ("(1/5)π", PI / 5.0),
            ("-pi/4", -PI / 4.0),
            ("1.5e2", 150.0),
        ];
        for (text, expected) in cases {
            assert_eq!(parse_angle(text).unwrap(), expected, "{text}");
        }
    }

    #[test]
    fn rejects_garbage() {
        for text in ["", "pi/", "2x", "(pi", "pi)", "1/0", "e5"] {
            assert!(parse_angle(text).is_err(), "{text}");
        }
    }
}
