//! Calculator: a local exact-rational evaluator, a fixed unit-conversion
//! table, and an optional remote math API adapter.
//!
//! Resolution order: if the input parses as a pure arithmetic expression
//! it is evaluated locally with exact rational arithmetic; if it matches
//! `<number> <unit> to <unit>` over the supported table it is converted
//! with exact factors; otherwise it is forwarded to the remote API when
//! one is configured. The remote adapter is never contacted for inputs
//! the local grammar accepts.

use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::gateway::{Gateway, HttpRequestSpec};

use super::ToolResult;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CalcError {
    #[error("division by zero")]
    DivisionByZero,
}

/// Grammar: `expr := term (('+'|'-') term)*`, `term := factor (('*'|'/')
/// factor)*`, `factor := NUMBER | '(' expr ')' | '-' factor`. Numbers are
/// integers or decimals, optionally with digit-grouping commas; the
/// unicode −, ×, and ÷ signs are accepted.
pub fn evaluate_arithmetic(input: &str) -> Option<Result<BigRational, CalcError>> {
    let tokens = lex(input)?;
    let mut parser = Parser { tokens, pos: 0 };
    let result = parser.expr();
    if parser.pos != parser.tokens.len() {
        return None;
    }
    result
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(BigRational),
    Plus,
    Minus,
    Star,
    Slash,
    Open,
    Close,
}

fn lex(input: &str) -> Option<Vec<Token>> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                tokens.push(Token::Plus);
                i += 1;
            }
            '-' | '−' => {
                tokens.push(Token::Minus);
                i += 1;
            }
            '*' | '×' => {
                tokens.push(Token::Star);
                i += 1;
            }
            '/' | '÷' => {
                tokens.push(Token::Slash);
                i += 1;
            }
            '(' => {
                tokens.push(Token::Open);
                i += 1;
            }
            ')' => {
                tokens.push(Token::Close);
                i += 1;
            }
            '0'..='9' => {
                let mut digits = String::new();
                let mut frac = String::new();
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == ',') {
                    if chars[i] != ',' {
                        digits.push(chars[i]);
                    }
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        frac.push(chars[i]);
                        i += 1;
                    }
                    if frac.is_empty() {
                        return None;
                    }
                }
                tokens.push(Token::Number(decimal_to_rational(&digits, &frac)?));
            }
            _ => return None,
        }
    }
    if tokens.is_empty() {
        return None;
    }
    Some(tokens)
}

fn decimal_to_rational(int_digits: &str, frac_digits: &str) -> Option<BigRational> {
    let combined = format!("{int_digits}{frac_digits}");
    let numer: BigInt = combined.parse().ok()?;
    let denom = BigInt::from(10u32).pow(frac_digits.len() as u32);
    Some(BigRational::new(numer, denom))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Option<Result<BigRational, CalcError>> {
        let mut acc = match self.term()? {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    match self.term()? {
                        Ok(v) => acc += v,
                        Err(e) => return Some(Err(e)),
                    }
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    match self.term()? {
                        Ok(v) => acc -= v,
                        Err(e) => return Some(Err(e)),
                    }
                }
                _ => return Some(Ok(acc)),
            }
        }
    }

    fn term(&mut self) -> Option<Result<BigRational, CalcError>> {
        let mut acc = match self.factor()? {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    match self.factor()? {
                        Ok(v) => acc *= v,
                        Err(e) => return Some(Err(e)),
                    }
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    match self.factor()? {
                        Ok(v) => {
                            if v.is_zero() {
                                return Some(Err(CalcError::DivisionByZero));
                            }
                            acc /= v;
                        }
                        Err(e) => return Some(Err(e)),
                    }
                }
                _ => return Some(Ok(acc)),
            }
        }
    }

    fn factor(&mut self) -> Option<Result<BigRational, CalcError>> {
        match self.peek()?.clone() {
            Token::Number(n) => {
                self.pos += 1;
                Some(Ok(n))
            }
            Token::Minus => {
                self.pos += 1;
                match self.factor()? {
                    Ok(v) => Some(Ok(-v)),
                    Err(e) => Some(Err(e)),
                }
            }
            Token::Open => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Token::Close) => {
                        self.pos += 1;
                        Some(inner)
                    }
                    _ => None,
                }
            }
            _ => None,
        }
    }
}

/// Integers render without a decimal point; everything else rounds to at
/// most 6 significant digits (half away from zero, trailing zeros
/// trimmed).
pub fn render_rational(value: &BigRational) -> String {
    if value.is_integer() {
        return value.to_integer().to_string();
    }
    let negative = value.is_negative();
    let a = value.abs();
    let ten = BigInt::from(10u32);

    // Decimal exponent: 10^e <= a < 10^(e+1).
    let mut e: i64 = (a.numer().to_string().len() as i64) - (a.denom().to_string().len() as i64);
    loop {
        let lower = pow10_rational(&ten, e);
        let upper = pow10_rational(&ten, e + 1);
        if a < lower {
            e -= 1;
        } else if a >= upper {
            e += 1;
        } else {
            break;
        }
    }

    let mut keep_decimals = 5 - e;
    let mut scaled = round_half_away(&(a.clone() * pow10_rational(&ten, keep_decimals)));
    let million = ten.pow(6);
    if scaled == million {
        // Rounding rolled over to a 7th digit.
        scaled = ten.pow(5);
        keep_decimals -= 1;
    }

    let mut digits = scaled.to_string();
    let text = if keep_decimals <= 0 {
        digits.push_str(&"0".repeat((-keep_decimals) as usize));
        digits
    } else {
        let kd = keep_decimals as usize;
        if digits.len() <= kd {
            digits = format!("{}{}", "0".repeat(kd + 1 - digits.len()), digits);
        }
        let split = digits.len() - kd;
        let (int_part, frac_part) = digits.split_at(split);
        let frac_trimmed = frac_part.trim_end_matches('0');
        if frac_trimmed.is_empty() {
            int_part.to_string()
        } else {
            format!("{int_part}.{frac_trimmed}")
        }
    };
    if negative {
        format!("-{text}")
    } else {
        text
    }
}

fn pow10_rational(ten: &BigInt, e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(ten.pow(e as u32))
    } else {
        BigRational::new(BigInt::one(), ten.pow((-e) as u32))
    }
}

/// Nearest integer, ties away from zero. Input is non-negative here.
fn round_half_away(value: &BigRational) -> BigInt {
    let doubled = value * BigRational::from_integer(BigInt::from(2u32));
    ((doubled + BigRational::one()) / BigRational::from_integer(BigInt::from(2u32))).floor().to_integer()
}

/// Supported conversion units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Inch,
    Millimeter,
    Centimeter,
    Meter,
    Mile,
    Kilometer,
    Pound,
    Kilogram,
    Fahrenheit,
    Celsius,
}

impl Unit {
    pub fn symbol(&self) -> &'static str {
        match self {
            Unit::Inch => "in",
            Unit::Millimeter => "mm",
            Unit::Centimeter => "cm",
            Unit::Meter => "m",
            Unit::Mile => "mi",
            Unit::Kilometer => "km",
            Unit::Pound => "lb",
            Unit::Kilogram => "kg",
            Unit::Fahrenheit => "°F",
            Unit::Celsius => "°C",
        }
    }

    fn parse(word: &str) -> Option<Unit> {
        let lower = word.to_lowercase();
        Some(match lower.as_str() {
            "in" | "inch" | "inches" => Unit::Inch,
            "mm" | "millimeter" | "millimeters" | "millimetre" | "millimetres" => Unit::Millimeter,
            "cm" | "centimeter" | "centimeters" | "centimetre" | "centimetres" => Unit::Centimeter,
            "m" | "meter" | "meters" | "metre" | "metres" => Unit::Meter,
            "mi" | "mile" | "miles" => Unit::Mile,
            "km" | "kilometer" | "kilometers" | "kilometre" | "kilometres" => Unit::Kilometer,
            "lb" | "lbs" | "pound" | "pounds" => Unit::Pound,
            "kg" | "kilogram" | "kilograms" => Unit::Kilogram,
            "f" | "°f" | "fahrenheit" => Unit::Fahrenheit,
            "c" | "°c" | "celsius" => Unit::Celsius,
            _ => return None,
        })
    }
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact conversion over the supported table; `None` when the pair is
/// outside the table.
fn convert_value(value: &BigRational, from: Unit, to: Unit) -> Option<BigRational> {
    use Unit::*;
    // Linear factors (from -> to), exact.
    let factor = match (from, to) {
        (Inch, Millimeter) => Some(ratio(254, 10)),
        (Millimeter, Inch) => Some(ratio(10, 254)),
        (Inch, Centimeter) => Some(ratio(254, 100)),
        (Centimeter, Inch) => Some(ratio(100, 254)),
        (Inch, Meter) => Some(ratio(254, 10000)),
        (Meter, Inch) => Some(ratio(10000, 254)),
        (Mile, Kilometer) => Some(ratio(1_609_344, 1_000_000)),
        (Kilometer, Mile) => Some(ratio(1_000_000, 1_609_344)),
        (Pound, Kilogram) => Some(ratio(45_359_237, 100_000_000)),
        (Kilogram, Pound) => Some(ratio(100_000_000, 45_359_237)),
        _ => None,
    };
    if let Some(f) = factor {
        return Some(value * f);
    }
    match (from, to) {
        (Fahrenheit, Celsius) => Some((value - ratio(32, 1)) * ratio(5, 9)),
        (Celsius, Fahrenheit) => Some(value * ratio(9, 5) + ratio(32, 1)),
        _ => None,
    }
}

/// Parses `<number> <unit> to <unit>` and converts. An integral source
/// rounds to the nearest integer in the target unit; otherwise the value
/// renders like arithmetic output.
pub fn convert_units(input: &str) -> Option<Result<String, CalcError>> {
    let tokens: Vec<&str> = input.split_whitespace().collect();
    if tokens.len() != 4 || !tokens[2].eq_ignore_ascii_case("to") {
        return None;
    }
    let number = parse_plain_number(tokens[0])?;
    let from = Unit::parse(tokens[1])?;
    let to = Unit::parse(tokens[3])?;
    let converted = convert_value(&number, from, to)?;
    let rendered = if number.is_integer() {
        round_half_away_signed(&converted).to_string()
    } else {
        render_rational(&converted)
    };
    Some(Ok(format!("{rendered} {}", to.symbol())))
}

fn round_half_away_signed(value: &BigRational) -> BigInt {
    if value.is_negative() {
        -round_half_away(&value.abs())
    } else {
        round_half_away(value)
    }
}

fn parse_plain_number(word: &str) -> Option<BigRational> {
    let (negative, body) = match word.strip_prefix('-').or_else(|| word.strip_prefix('−')) {
        Some(rest) => (true, rest),
        None => (false, word),
    };
    let mut int_digits = String::new();
    let mut frac_digits = String::new();
    let mut in_frac = false;
    for c in body.chars() {
        match c {
            '0'..='9' => {
                if in_frac {
                    frac_digits.push(c);
                } else {
                    int_digits.push(c);
                }
            }
            ',' if !in_frac => {}
            '.' if !in_frac => in_frac = true,
            _ => return None,
        }
    }
    if int_digits.is_empty() && frac_digits.is_empty() {
        return None;
    }
    if int_digits.is_empty() {
        int_digits.push('0');
    }
    let value = decimal_to_rational(&int_digits, &frac_digits)?;
    Some(if negative { -value } else { value })
}

/// Remote math API: GET with query parameter `i=<input>`, plaintext
/// answer body; the key comes from an environment variable.
#[derive(Clone)]
pub struct RemoteMath {
    pub gateway: Arc<Gateway>,
    pub base_url: String,
    pub key_env: String,
}

/// The calculate tool. Off-the-shelf construction leaves the remote
/// adapter unset so the whole suite runs offline.
#[derive(Clone, Default)]
pub struct Calculator {
    pub remote: Option<RemoteMath>,
}

impl Calculator {
    pub fn local_only() -> Self {
        Calculator { remote: None }
    }

    pub fn with_remote(remote: RemoteMath) -> Self {
        Calculator { remote: Some(remote) }
    }

    pub fn calculate(&self, input: &str) -> ToolResult {
        if input.trim().is_empty() {
            return ToolResult::error("ERROR: empty calculator input", "local");
        }
        if let Some(result) = evaluate_arithmetic(input) {
            return match result {
                Ok(value) => ToolResult::ok(render_rational(&value), "local"),
                Err(CalcError::DivisionByZero) => {
                    ToolResult::error("ERROR: division by zero", "local")
                }
            };
        }
        if let Some(result) = convert_units(input) {
            return match result {
                Ok(text) => ToolResult::ok(text, "local"),
                Err(CalcError::DivisionByZero) => {
                    ToolResult::error("ERROR: division by zero", "local")
                }
            };
        }
        if let Some(remote) = &self.remote {
            let mut req = HttpRequestSpec::get(remote.base_url.clone())
                .with_auth_query("appid", std::env::var(&remote.key_env).unwrap_or_default());
            req.url = format!("{}?i={}", remote.base_url.trim_end_matches('?'), urlencode(input));
            return match remote.gateway.http(&req) {
                Ok(resp) if resp.status < 400 => {
                    ToolResult::ok(resp.body_text().trim().to_string(), "remote")
                }
                Ok(resp) => {
                    ToolResult::error(format!("ERROR: remote math status {}", resp.status), "remote")
                }
                Err(e) => ToolResult::error(format!("ERROR: remote math failed: {e}"), "remote"),
            };
        }
        ToolResult::error("ERROR: unsupported expression", "local")
    }
}

fn urlencode(s: &str) -> String {
    let mut out = String::new();
    for b in s.bytes() {
        match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' => {
                out.push(b as char)
            }
            b' ' => out.push_str("%20"),
            _ => out.push_str(&format!("%{:02X}", b)),
        }
    }
    out
}
