use crate::error::{Error, Result};
use crate::symbol::valid_token;
use crate::text::{content_lines, header};

use super::{Bpa, StackString};

/// Splits a rule line `X a -> rhs` into head, action and the raw right side.
pub(crate) fn split_rule(line_no: usize, line: &str) -> Result<(&str, &str, &str)> {
    let (lhs, rhs) = line
        .split_once("->")
        .ok_or_else(|| Error::parse(line_no, "expected `X a -> ...`"))?;
    let lhs: Vec<&str> = lhs.split_whitespace().collect();
    let [head, action] = lhs[..] else {
        return Err(Error::parse(line_no, "left side must be `symbol action`"));
    };
    Ok((head, action, rhs.trim()))
}

pub(crate) fn parse_body(bpa: &mut Bpa, line_no: usize, rhs: &str) -> Result<StackString> {
    let rhs = rhs.trim();
    if rhs == "." {
        return Ok(StackString::empty());
    }
    if rhs.is_empty() {
        return Err(Error::parse(line_no, "empty right side; write `.` for the empty word"));
    }
    rhs.split_whitespace()
        .map(|name| symbol(bpa, line_no, name))
        .collect()
}

pub(crate) fn symbol(bpa: &mut Bpa, line_no: usize, name: &str) -> Result<crate::StackSymbol> {
    if !valid_token(name) {
        return Err(Error::parse(line_no, format!("invalid symbol name `{name}`")));
    }
    bpa.add_symbol(name).map_err(|e| Error::parse(line_no, e.to_string()))
}

/// Handles the `actions:` and `symbols:` headers; returns whether the line
/// was a header. Actions must be declared before use.
pub(crate) fn parse_header(bpa: &mut Bpa, line_no: usize, line: &str) -> Result<bool> {
    if let Some(rest) = header(line, "actions") {
        for name in rest.split_whitespace() {
            if !valid_token(name) {
                return Err(Error::parse(line_no, format!("invalid action name `{name}`")));
            }
            bpa.add_action(name)?;
        }
        return Ok(true);
    }
    if let Some(rest) = header(line, "symbols") {
        for name in rest.split_whitespace() {
            symbol(bpa, line_no, name)?;
        }
        return Ok(true);
    }
    Ok(false)
}

pub(crate) fn action(bpa: &Bpa, line_no: usize, name: &str) -> Result<crate::Action> {
    bpa.action(name)
        .ok_or_else(|| Error::parse(line_no, format!("undeclared action `{name}`")))
}

pub(super) fn parse_bpa(text: &str) -> Result<Bpa> {
    let mut bpa = Bpa::new();
    for (line_no, line) in content_lines(text) {
        if parse_header(&mut bpa, line_no, line)? {
            continue;
        }
        let (head, act, rhs) = split_rule(line_no, line)?;
        let a = action(&bpa, line_no, act)?;
        let h = symbol(&mut bpa, line_no, head)?;
        let body = parse_body(&mut bpa, line_no, rhs)?;
        bpa.add_rule(h, a, body)?;
    }
    Ok(bpa)
}

pub(crate) fn write_headers(out: &mut String, actions: Vec<&str>, symbols: Vec<&str>) {
    out.push_str(&format!("actions: {}\n", actions.join(" ")));
    if !symbols.is_empty() {
        out.push_str(&format!("symbols: {}\n", symbols.join(" ")));
    }
}

pub(super) fn write_bpa(bpa: &Bpa) -> String {
    let mut out = String::new();
    write_headers(
        &mut out,
        bpa.actions().map(|a| bpa.action_name(a)).collect(),
        bpa.symbols().map(|s| bpa.symbol_name(s)).collect(),
    );
    for r in bpa.rules() {
        out.push_str(&format!(
            "{} {} -> {}\n",
            bpa.symbol_name(r.head),
            bpa.action_name(r.action),
            bpa.show(&r.body)
        ));
    }
    out
}
