use super::{BinaryOp, Constant, Expr, Function, ParseError, Variable};

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Number(v) => format!("number `{v}`"),
            TokenKind::Ident(name) => format!("identifier `{name}`"),
            TokenKind::Plus => "`+`".into(),
            TokenKind::Minus => "`-`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Slash => "`/`".into(),
            TokenKind::Caret => "`^`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b'+' => Some(TokenKind::Plus),
            b'-' => Some(TokenKind::Minus),
            b'*' => Some(TokenKind::Star),
            b'/' => Some(TokenKind::Slash),
            b'^' => Some(TokenKind::Caret),
            b'(' => Some(TokenKind::LParen),
            b')' => Some(TokenKind::RParen),
            b',' => Some(TokenKind::Comma),
            _ => None,
        };
        if let Some(kind) = single {
            tokens.push(Token { kind, offset: start });
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            i = scan_number(bytes, i);
            let text = &source[start..i];
            let value: f64 = text.parse().map_err(|_| ParseError::InvalidNumber {
                offset: start,
                text: text.to_string(),
            })?;
            if !value.is_finite() {
                return Err(ParseError::InvalidNumber {
                    offset: start,
                    text: text.to_string(),
                });
            }
            tokens.push(Token {
                kind: TokenKind::Number(value),
                offset: start,
            });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Ident(source[start..i].to_string()),
                offset: start,
            });
        } else if source[i..].starts_with('\u{2212}') {
            // typographic minus sign
            tokens.push(Token {
                kind: TokenKind::Minus,
                offset: start,
            });
            i += '\u{2212}'.len_utf8();
        } else {
            let ch = source[i..].chars().next().unwrap_or('?');
            return Err(ParseError::UnexpectedCharacter { offset: start, ch });
        }
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        offset: source.len(),
    });
    Ok(tokens)
}

// digits [. digits] [(e|E) [+|-] digits]; the exponent is only taken when
// at least one digit follows it.
fn scan_number(bytes: &[u8], mut i: usize) -> usize {
    let digits = |mut j: usize| {
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        j
    };
    i = digits(i);
    if i < bytes.len() && bytes[i] == b'.' {
        i = digits(i + 1);
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            i = digits(j);
        }
    }
    i
}

const OPERAND: &[&str] = &["number", "identifier", "`(`", "`-`"];

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if tok.kind != TokenKind::Eof {
            self.pos += 1;
        }
        tok
    }

    fn syntax_error(&self, expected: &[&str]) -> ParseError {
        let tok = self.peek();
        ParseError::Syntax {
            offset: tok.offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.kind.describe(),
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Plus => BinaryOp::Add,
                TokenKind::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Star => BinaryOp::Mul,
                TokenKind::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().kind == TokenKind::Minus {
            self.advance();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    // power := primary ('^' unary)?
    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek().kind == TokenKind::Caret {
            self.advance();
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::Number(v) => {
                self.advance();
                Ok(Expr::Num(v))
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect_close()?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                self.advance();
                let is_call = self.peek().kind == TokenKind::LParen;
                if is_call {
                    let func = Function::from_name(&name).ok_or_else(|| {
                        ParseError::UnknownFunction {
                            offset: tok.offset,
                            name: name.clone(),
                        }
                    })?;
                    self.advance();
                    let arg = self.call_argument(&name, tok.offset)?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                if let Some(var) = Variable::from_name(&name) {
                    Ok(Expr::Var(var))
                } else if let Some(c) = Constant::from_name(&name) {
                    Ok(Expr::Const(c))
                } else if Function::from_name(&name).is_some() {
                    Err(self.syntax_error(&["`(`"]))
                } else {
                    Ok(Expr::Param(name))
                }
            }
            _ => Err(self.syntax_error(OPERAND)),
        }
    }

    // Parses `expr (',' expr)* ')'` after a function's `(`; anything other
    // than exactly one argument is an arity error.
    fn call_argument(&mut self, name: &str, offset: usize) -> Result<Expr, ParseError> {
        if self.peek().kind == TokenKind::RParen {
            return Err(ParseError::Arity {
                offset,
                name: name.to_string(),
                found: 0,
            });
        }
        let arg = self.expr()?;
        let mut count = 1;
        while self.peek().kind == TokenKind::Comma {
            self.advance();
            self.expr()?;
            count += 1;
        }
        self.expect_close()?;
        if count != 1 {
            return Err(ParseError::Arity {
                offset,
                name: name.to_string(),
                found: count,
            });
        }
        Ok(arg)
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        if self.peek().kind == TokenKind::RParen {
            self.advance();
            Ok(())
        } else {
            Err(self.syntax_error(&["`)`", "operator"]))
        }
    }
}

pub(super) fn parse(source: &str) -> Result<Expr, ParseError> {
    if source.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let mut parser = Parser {
        tokens: tokenize(source)?,
        pos: 0,
    };
    let ast = parser.expr()?;
    if parser.peek().kind != TokenKind::Eof {
        return Err(parser.syntax_error(&["operator", "end of input"]));
    }
    Ok(ast)
}
