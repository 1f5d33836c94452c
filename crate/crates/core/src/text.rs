//! Line handling shared by the text formats.

/// Removes a trailing comment. A comment starts at a `#` that stands alone
/// as a token (followed by whitespace or end of line), so `#0` stays a name.
pub(crate) fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    for (i, &c) in bytes.iter().enumerate() {
        if c != b'#' {
            continue;
        }
        let starts_token = i == 0 || bytes[i - 1].is_ascii_whitespace();
        let ends_token = bytes.get(i + 1).is_none_or(|n| n.is_ascii_whitespace());
        if starts_token && ends_token {
            return &line[..i];
        }
    }
    line
}

/// Non-empty, comment-stripped lines with 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l).trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Splits `key: rest` if the line starts with one of the given keys.
pub(crate) fn header<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.strip_prefix(key)?;
    let rest = rest.trim_start().strip_prefix(':')?;
    Some(rest.trim())
}
