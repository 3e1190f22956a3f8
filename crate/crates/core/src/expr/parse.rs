use std::collections::BTreeMap;

use super::{Func, JetExpr, JetVar};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("field index {index} out of range 1..={fields} at {pos}")]
    FieldOutOfRange { pos: usize, index: usize, fields: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UnknownIdentifier { pos, .. }
            | ParseError::FieldOutOfRange { pos, .. } => *pos,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

/// Recursive-descent parser for the jet expression grammar.
///
/// ```text
/// expr   := term (('+'|'-') term)*
/// term   := factor (('*'|'/') factor)*
/// factor := '-' factor | base ('^' '-'? integer)?
/// base   := number | 'x' | jetvar | const | func '(' expr ')' | '(' expr ')'
/// ```
#[derive(Clone, Debug)]
pub struct Parser {
    fields: usize,
    constants: BTreeMap<String, f64>,
}

impl Parser {
    pub fn new(fields: usize) -> Self {
        Self { fields, constants: BTreeMap::new() }
    }

    /// Named constants substituted at parse time.
    pub fn with_constants(mut self, constants: BTreeMap<String, f64>) -> Self {
        self.constants = constants;
        self
    }

    pub fn fields(&self) -> usize {
        self.fields
    }

    pub fn parse(&self, source: &str) -> Result<JetExpr, ParseError> {
        let toks = tokenize(source)?;
        let mut st = State { toks, i: 0, end: source.len(), parser: self };
        let e = st.expr()?;
        if st.i < st.toks.len() {
            return Err(ParseError::Syntax { pos: st.pos(), msg: "unexpected trailing input".into() });
        }
        Ok(e)
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    if let Some(pos) = src.find(|c: char| !c.is_ascii()) {
        return Err(ParseError::Syntax { pos, msg: "non-ASCII character".into() });
    }
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && b.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && b[j].is_ascii_digit() {
                    while j < b.len() && b[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v = text
                .parse::<f64>()
                .map_err(|_| ParseError::Syntax { pos: start, msg: format!("bad number `{text}`") })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(ParseError::Syntax { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct State<'a> {
    toks: Vec<(Tok, usize)>,
    i: usize,
    end: usize,
    parser: &'a Parser,
}

pub(crate) fn negate(e: JetExpr) -> JetExpr {
    match e {
        JetExpr::Const(c) => JetExpr::Const(-c),
        other => JetExpr::Neg(Box::new(other)),
    }
}

impl State<'_> {
    fn pos(&self) -> usize {
        self.toks.get(self.i).map_or(self.end, |t| t.1)
    }

    fn peek_op(&self) -> Option<char> {
        match self.toks.get(self.i) {
            Some((Tok::Op(c), _)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ParseError> {
        if self.peek_op() == Some(op) {
            self.i += 1;
            Ok(())
        } else {
            Err(ParseError::Syntax { pos: self.pos(), msg: format!("expected `{op}`") })
        }
    }

    fn expr(&mut self) -> Result<JetExpr, ParseError> {
        let mut terms = vec![self.term()?];
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.i += 1;
            let t = self.term()?;
            terms.push(if op == '-' { negate(t) } else { t });
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { JetExpr::Sum(terms) })
    }

    fn term(&mut self) -> Result<JetExpr, ParseError> {
        let mut lhs = self.factor()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.i += 1;
            let rhs = self.factor()?;
            lhs = if op == '*' {
                match lhs {
                    JetExpr::Product(mut fs) => {
                        fs.push(rhs);
                        JetExpr::Product(fs)
                    }
                    other => JetExpr::Product(vec![other, rhs]),
                }
            } else {
                JetExpr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<JetExpr, ParseError> {
        if self.peek_op() == Some('-') {
            self.i += 1;
            return Ok(negate(self.factor()?));
        }
        let base = self.base()?;
        if self.peek_op() != Some('^') {
            return Ok(base);
        }
        self.i += 1;
        let neg = if self.peek_op() == Some('-') {
            self.i += 1;
            true
        } else {
            false
        };
        let pos = self.pos();
        match self.toks.get(self.i) {
            Some((Tok::Num(v), _)) if v.fract() == 0.0 && *v <= i32::MAX as f64 => {
                self.i += 1;
                let k = *v as i32;
                Ok(JetExpr::Pow(Box::new(base), if neg { -k } else { k }))
            }
            _ => Err(ParseError::Syntax { pos, msg: "exponent must be an integer".into() }),
        }
    }

    fn base(&mut self) -> Result<JetExpr, ParseError> {
        let pos = self.pos();
        let Some((tok, _)) = self.toks.get(self.i).cloned() else {
            return Err(ParseError::Syntax { pos, msg: "unexpected end of input".into() });
        };
        self.i += 1;
        match tok {
            Tok::Num(v) => Ok(JetExpr::Const(v)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Op(c) => Err(ParseError::Syntax { pos, msg: format!("unexpected `{c}`") }),
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(JetExpr::Func(f, Box::new(arg)));
                }
                if name == "x" {
                    return Ok(JetExpr::X);
                }
                if let Some(v) = self.jet_var(&name, pos)? {
                    return Ok(JetExpr::Var(v));
                }
                if let Some(c) = self.parser.constants.get(&name) {
                    return Ok(JetExpr::Const(*c));
                }
                Err(ParseError::UnknownIdentifier { pos, name })
            }
        }
    }

    fn jet_var(&self, name: &str, pos: usize) -> Result<Option<JetVar>, ParseError> {
        let (head, suffix) = match name.find('_') {
            Some(k) => (&name[..k], Some(&name[k + 1..])),
            None => (name, None),
        };
        let fields = self.parser.fields;
        let index = match head {
            "u" | "v" | "w" if fields <= 3 && !self.parser.constants.contains_key(name) => {
                match head {
                    "u" => 1,
                    "v" => 2,
                    _ => 3,
                }
            }
            _ => match head.strip_prefix('u') {
                Some(digits) if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) => {
                    digits.parse::<usize>().map_err(|_| ParseError::UnknownIdentifier { pos, name: name.into() })?
                }
                _ => return Ok(None),
            },
        };
        let order = match suffix {
            None => 0,
            Some(s) if !s.is_empty() && s.bytes().all(|b| b == b'x') => s.len(),
            Some(s) => match s.strip_prefix('d') {
                Some(k) if !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit()) => {
                    k.parse::<usize>().map_err(|_| ParseError::UnknownIdentifier { pos, name: name.into() })?
                }
                _ => return Err(ParseError::UnknownIdentifier { pos, name: name.into() }),
            },
        };
        if index == 0 || index > fields {
            return Err(ParseError::FieldOutOfRange { pos, index, fields });
        }
        Ok(Some(JetVar::new(index - 1, order)))
    }
}
