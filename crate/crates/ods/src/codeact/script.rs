//! The action-script grammar: a deliberately small, statically checkable
//! language the script agent emits instead of general-purpose code.
//!
//! ```text
//! stmt    := ident '=' expr | 'final_answer' '(' expr ')' | expr
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | primary
//! primary := NUMBER | STRING | ident | ident '(' args ')'
//!          | '(' expr ')' | '[' args ']'
//! ```
//!
//! Statements are newline-separated; `#` starts a comment. Every
//! identifier must be defined before use, and every call target must be a
//! known tool name — both are checked at parse time, so a script that
//! parses cannot reach outside its execution environment.

use std::collections::BTreeMap;

/// Maps script-visible call names onto tool registry names.
#[derive(Debug, Clone)]
pub struct BindingTable {
    entries: BTreeMap<String, String>,
}

impl BindingTable {
    pub fn new(entries: &[(&str, &str)]) -> Self {
        BindingTable {
            entries: entries.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }

    /// The standard table: the default registry names plus `search` as an
    /// alias of `search_internet`.
    pub fn standard() -> Self {
        BindingTable::new(&[
            ("search_internet", "search_internet"),
            ("search", "search_internet"),
            ("calculate", "calculate"),
            ("continue_think", "continue_think"),
        ])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn resolve(&self, name: &str) -> Option<&str> {
        self.entries.get(name).map(String::as_str)
    }

    pub fn script_names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScriptError {
    #[error("syntax error at line {line}, column {col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("undefined identifier `{name}` at line {line}")]
    UndefinedIdentifier { name: String, line: usize },
    #[error("unknown tool `{name}` at line {line}")]
    UnknownTool { name: String, line: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Str(String),
    Num(f64),
    Ident(String),
    List(Vec<Expr>),
    Unary(Box<Expr>),
    Binary { op: BinOp, left: Box<Expr>, right: Box<Expr> },
    ToolCall { name: String, args: Vec<Expr> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Assign { name: String, expr: Expr, line: usize },
    Bare { expr: Expr, line: usize },
    FinalAnswer { expr: Expr, line: usize },
}

/// A parsed, statically checked script.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionScript {
    pub source: String,
    pub statements: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Str(String),
    Num(f64),
    Equals,
    Plus,
    Minus,
    Star,
    Slash,
    Open,
    Close,
    BracketOpen,
    BracketClose,
    Comma,
    Newline,
}

struct Lexed {
    token: Token,
    line: usize,
    col: usize,
}

fn lex(source: &str) -> Result<Vec<Lexed>, ScriptError> {
    let mut out = Vec::new();
    for (lineno, raw_line) in source.lines().enumerate() {
        let line = lineno + 1;
        let chars: Vec<char> = raw_line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let col = i + 1;
            let c = chars[i];
            match c {
                '#' => break,
                ' ' | '\t' | '\r' => i += 1,
                '=' => {
                    out.push(Lexed { token: Token::Equals, line, col });
                    i += 1;
                }
                '+' => {
                    out.push(Lexed { token: Token::Plus, line, col });
                    i += 1;
                }
                '-' => {
                    out.push(Lexed { token: Token::Minus, line, col });
                    i += 1;
                }
                '*' => {
                    out.push(Lexed { token: Token::Star, line, col });
                    i += 1;
                }
                '/' => {
                    out.push(Lexed { token: Token::Slash, line, col });
                    i += 1;
                }
                '(' => {
                    out.push(Lexed { token: Token::Open, line, col });
                    i += 1;
                }
                ')' => {
                    out.push(Lexed { token: Token::Close, line, col });
                    i += 1;
                }
                '[' => {
                    out.push(Lexed { token: Token::BracketOpen, line, col });
                    i += 1;
                }
                ']' => {
                    out.push(Lexed { token: Token::BracketClose, line, col });
                    i += 1;
                }
                ',' => {
                    out.push(Lexed { token: Token::Comma, line, col });
                    i += 1;
                }
                '"' => {
                    let mut s = String::new();
                    i += 1;
                    let mut closed = false;
                    while i < chars.len() {
                        match chars[i] {
                            '\\' => {
                                let escaped = chars.get(i + 1).copied().ok_or_else(|| {
                                    ScriptError::Syntax {
                                        line,
                                        col: i + 1,
                                        message: "dangling escape".into(),
                                    }
                                })?;
                                s.push(match escaped {
                                    'n' => '\n',
                                    't' => '\t',
                                    '"' => '"',
                                    '\\' => '\\',
                                    other => other,
                                });
                                i += 2;
                            }
                            '"' => {
                                closed = true;
                                i += 1;
                                break;
                            }
                            ch => {
                                s.push(ch);
                                i += 1;
                            }
                        }
                    }
                    if !closed {
                        return Err(ScriptError::Syntax {
                            line,
                            col,
                            message: "unterminated string literal".into(),
                        });
                    }
                    out.push(Lexed { token: Token::Str(s), line, col });
                }
                '0'..='9' => {
                    let mut text = String::new();
                    while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                        text.push(chars[i]);
                        i += 1;
                    }
                    let value: f64 = text.parse().map_err(|_| ScriptError::Syntax {
                        line,
                        col,
                        message: format!("bad number literal `{text}`"),
                    })?;
                    out.push(Lexed { token: Token::Num(value), line, col });
                }
                c if c.is_alphabetic() || c == '_' => {
                    let mut name = String::new();
                    while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                        name.push(chars[i]);
                        i += 1;
                    }
                    out.push(Lexed { token: Token::Ident(name), line, col });
                }
                other => {
                    return Err(ScriptError::Syntax {
                        line,
                        col,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            }
        }
        out.push(Lexed { token: Token::Newline, line, col: chars.len() + 1 });
    }
    Ok(out)
}

struct ScriptParser<'a> {
    tokens: Vec<Lexed>,
    tools: &'a BindingTable,
    pos: usize,
}

impl<'a> ScriptParser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|l| &l.token)
    }

    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos.min(self.tokens.len().saturating_sub(1)))
            .map(|l| (l.line, l.col))
            .unwrap_or((1, 1))
    }

    fn error(&self, message: impl Into<String>) -> ScriptError {
        let (line, col) = self.here();
        ScriptError::Syntax { line, col, message: message.into() }
    }

    fn eat_newlines(&mut self) {
        while matches!(self.peek(), Some(Token::Newline)) {
            self.pos += 1;
        }
    }

    fn statement(&mut self) -> Result<Stmt, ScriptError> {
        let (line, _) = self.here();
        // Lookahead for `ident = …`.
        if let Some(Token::Ident(name)) = self.peek() {
            let name = name.clone();
            if matches!(self.tokens.get(self.pos + 1).map(|l| &l.token), Some(Token::Equals)) {
                if name == "final_answer" {
                    return Err(self.error("`final_answer` is reserved"));
                }
                self.pos += 2;
                let expr = self.expr()?;
                return Ok(Stmt::Assign { name, expr, line });
            }
            if name == "final_answer" {
                self.pos += 1;
                if !matches!(self.peek(), Some(Token::Open)) {
                    return Err(self.error("expected `(` after final_answer"));
                }
                self.pos += 1;
                let expr = self.expr()?;
                if !matches!(self.peek(), Some(Token::Close)) {
                    return Err(self.error("expected `)` to close final_answer"));
                }
                self.pos += 1;
                return Ok(Stmt::FinalAnswer { expr, line });
            }
        }
        let expr = self.expr()?;
        Ok(Stmt::Bare { expr, line })
    }

    fn expr(&mut self) -> Result<Expr, ScriptError> {
        let mut left = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => BinOp::Add,
                Some(Token::Minus) => BinOp::Sub,
                _ => return Ok(left),
            };
            self.pos += 1;
            let right = self.term()?;
            left = Expr::Binary { op, left: Box::new(left), right: Box::new(right) };
        }
    }

    fn term(&mut self) -> Result<Expr, ScriptError> {
        let mut left = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Token::Star) => BinOp::Mul,
                Some(Token::Slash) => BinOp::Div,
                _ => return Ok(left),
            };
            self.pos += 1;
            let right = self.unary()?;
            left = Expr::Binary { op, left: Box::new(left), right: Box::new(right) };
        }
    }

    fn unary(&mut self) -> Result<Expr, ScriptError> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Expr::Unary(Box::new(inner)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ScriptError> {
        let (line, _) = self.here();
        match self.peek().cloned() {
            Some(Token::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Token::Str(s)) => {
                self.pos += 1;
                Ok(Expr::Str(s))
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                if matches!(self.peek(), Some(Token::Open)) {
                    if name == "final_answer" {
                        return Err(self.error("final_answer is a statement, not an expression"));
                    }
                    if !self.tools.contains(&name) {
                        return Err(ScriptError::UnknownTool { name, line });
                    }
                    self.pos += 1;
                    let mut args = Vec::new();
                    if !matches!(self.peek(), Some(Token::Close)) {
                        loop {
                            args.push(self.expr()?);
                            match self.peek() {
                                Some(Token::Comma) => self.pos += 1,
                                Some(Token::Close) => break,
                                _ => return Err(self.error("expected `,` or `)` in call")),
                            }
                        }
                    }
                    self.pos += 1; // consume ')'
                    return Ok(Expr::ToolCall { name, args });
                }
                Ok(Expr::Ident(name))
            }
            Some(Token::Open) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !matches!(self.peek(), Some(Token::Close)) {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(Token::BracketOpen) => {
                self.pos += 1;
                let mut items = Vec::new();
                if !matches!(self.peek(), Some(Token::BracketClose)) {
                    loop {
                        items.push(self.expr()?);
                        match self.peek() {
                            Some(Token::Comma) => self.pos += 1,
                            Some(Token::BracketClose) => break,
                            _ => return Err(self.error("expected `,` or `]` in list")),
                        }
                    }
                }
                self.pos += 1; // consume ']'
                Ok(Expr::List(items))
            }
            _ => Err(self.error("expected an expression")),
        }
    }
}

fn check_defined(expr: &Expr, defined: &std::collections::BTreeSet<String>, line: usize) -> Result<(), ScriptError> {
    match expr {
        Expr::Ident(name) => {
            if defined.contains(name) {
                Ok(())
            } else {
                Err(ScriptError::UndefinedIdentifier { name: name.clone(), line })
            }
        }
        Expr::List(items) => items.iter().try_for_each(|e| check_defined(e, defined, line)),
        Expr::Unary(inner) => check_defined(inner, defined, line),
        Expr::Binary { left, right, .. } => {
            check_defined(left, defined, line)?;
            check_defined(right, defined, line)
        }
        Expr::ToolCall { args, .. } => {
            args.iter().try_for_each(|e| check_defined(e, defined, line))
        }
        Expr::Str(_) | Expr::Num(_) => Ok(()),
    }
}

/// Parses and statically checks one script against a tool binding table.
pub fn parse_script(source: &str, tools: &BindingTable) -> Result<ActionScript, ScriptError> {
    let tokens = lex(source)?;
    let mut parser = ScriptParser { tokens, tools, pos: 0 };
    let mut statements = Vec::new();
    loop {
        parser.eat_newlines();
        if parser.peek().is_none() {
            break;
        }
        let stmt = parser.statement()?;
        match parser.peek() {
            Some(Token::Newline) | None => {}
            _ => return Err(parser.error("expected end of statement")),
        }
        statements.push(stmt);
    }

    // Every identifier must be defined before use.
    let mut defined = std::collections::BTreeSet::new();
    for stmt in &statements {
        match stmt {
            Stmt::Assign { name, expr, line } => {
                check_defined(expr, &defined, *line)?;
                defined.insert(name.clone());
            }
            Stmt::Bare { expr, line } | Stmt::FinalAnswer { expr, line } => {
                check_defined(expr, &defined, *line)?;
            }
        }
    }
    Ok(ActionScript { source: source.to_string(), statements })
}
