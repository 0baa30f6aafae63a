//! Line-oriented N-Triples parsing.
//!
//! Only the subset needed for class-hierarchy dumps is handled: IRI
//! subjects/predicates and IRI, language-tagged or typed-literal objects.
//! Blank nodes are recognized but rejected by the ingest filter upstream.

use std::borrow::Cow;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Object<'a> {
    Iri(&'a str),
    /// Plain literal with an optional language tag.
    Literal {
        lexical: Cow<'a, str>,
        lang: Option<&'a str>,
    },
    /// `"..."^^<datatype>` — counted and dropped by ingest.
    TypedLiteral,
    BlankNode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedTriple<'a> {
    pub subject: &'a str,
    pub predicate: &'a str,
    pub object: Object<'a>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalformedLine;

/// Parses one N-Triples line. `Ok(None)` means blank or comment.
pub fn parse_line(line: &str) -> Result<Option<ParsedTriple<'_>>, MalformedLine> {
    let mut rest = line.trim_start();
    if rest.is_empty() || rest.starts_with('#') {
        return Ok(None);
    }
    let subject = match take_iri(&mut rest)? {
        Some(iri) => iri,
        // blank-node subject: parse far enough to call the line well-formed
        None => {
            take_blank_node(&mut rest)?;
            skip_ws(&mut rest);
            let predicate = take_iri(&mut rest)?.ok_or(MalformedLine)?;
            skip_ws(&mut rest);
            take_object(&mut rest)?;
            take_terminator(rest)?;
            return Ok(Some(ParsedTriple {
                subject: "",
                predicate,
                object: Object::BlankNode,
            }));
        }
    };
    skip_ws(&mut rest);
    let predicate = take_iri(&mut rest)?.ok_or(MalformedLine)?;
    skip_ws(&mut rest);
    let object = take_object(&mut rest)?;
    take_terminator(rest)?;
    Ok(Some(ParsedTriple {
        subject,
        predicate,
        object,
    }))
}

fn skip_ws(rest: &mut &str) {
    *rest = rest.trim_start();
}

fn take_iri<'a>(rest: &mut &'a str) -> Result<Option<&'a str>, MalformedLine> {
    if !rest.starts_with('<') {
        return Ok(None);
    }
    let end = rest.find('>').ok_or(MalformedLine)?;
    let iri = &rest[1..end];
    if iri.is_empty() {
        return Err(MalformedLine);
    }
    *rest = &rest[end + 1..];
    Ok(Some(iri))
}

fn take_blank_node(rest: &mut &str) -> Result<(), MalformedLine> {
    if !rest.starts_with("_:") {
        return Err(MalformedLine);
    }
    let end = rest
        .find(|c: char| c.is_whitespace())
        .ok_or(MalformedLine)?;
    *rest = &rest[end..];
    Ok(())
}

fn take_object<'a>(rest: &mut &'a str) -> Result<Object<'a>, MalformedLine> {
    if rest.starts_with('<') {
        let iri = take_iri(rest)?.ok_or(MalformedLine)?;
        return Ok(Object::Iri(iri));
    }
    if rest.starts_with("_:") {
        take_blank_node(rest)?;
        return Ok(Object::BlankNode);
    }
    if !rest.starts_with('"') {
        return Err(MalformedLine);
    }
    let (lexical, after) = take_quoted(&rest[1..])?;
    *rest = after;
    if let Some(stripped) = rest.strip_prefix("^^") {
        *rest = stripped;
        take_iri(rest)?.ok_or(MalformedLine)?;
        return Ok(Object::TypedLiteral);
    }
    let lang = if let Some(stripped) = rest.strip_prefix('@') {
        let end = stripped
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
            .unwrap_or(stripped.len());
        if end == 0 {
            return Err(MalformedLine);
        }
        let tag = &stripped[..end];
        *rest = &stripped[end..];
        Some(tag)
    } else {
        None
    };
    Ok(Object::Literal { lexical, lang })
}

/// Reads a quoted literal body starting after the opening quote.
/// Returns the unescaped lexical form and the remainder after the close quote.
fn take_quoted(s: &str) -> Result<(Cow<'_, str>, &str), MalformedLine> {
    // fast path: no escapes
    let mut iter = s.char_indices();
    while let Some((i, c)) = iter.next() {
        match c {
            '"' => return Ok((Cow::Borrowed(&s[..i]), &s[i + 1..])),
            '\\' => {
                let mut out = String::with_capacity(s.len());
                out.push_str(&s[..i]);
                let mut chars = s[i..].chars();
                return unescape_tail(&mut chars, &mut out)
                    .map(|rest| (Cow::Owned(out), rest));
            }
            _ => {}
        }
    }
    Err(MalformedLine)
}

fn unescape_tail<'a>(
    chars: &mut std::str::Chars<'a>,
    out: &mut String,
) -> Result<&'a str, MalformedLine> {
    while let Some(c) = chars.next() {
        match c {
            '"' => return Ok(chars.as_str()),
            '\\' => {
                let esc = chars.next().ok_or(MalformedLine)?;
                match esc {
                    't' => out.push('\t'),
                    'b' => out.push('\u{8}'),
                    'n' => out.push('\n'),
                    'r' => out.push('\r'),
                    'f' => out.push('\u{c}'),
                    '"' => out.push('"'),
                    '\'' => out.push('\''),
                    '\\' => out.push('\\'),
                    'u' => out.push(read_hex_escape(chars, 4)?),
                    'U' => out.push(read_hex_escape(chars, 8)?),
                    _ => return Err(MalformedLine),
                }
            }
            _ => out.push(c),
        }
    }
    Err(MalformedLine)
}

fn read_hex_escape(chars: &mut std::str::Chars<'_>, digits: u32) -> Result<char, MalformedLine> {
    let mut code: u32 = 0;
    for _ in 0..digits {
        let d = chars.next().ok_or(MalformedLine)?;
        let digit = d.to_digit(16).ok_or(MalformedLine)?;
        code = code
            .checked_mul(16)
            .and_then(|c| c.checked_add(digit))
            .ok_or(MalformedLine)?;
    }
    char::from_u32(code).ok_or(MalformedLine)
}

fn take_terminator(rest: &str) -> Result<(), MalformedLine> {
    let rest = rest.trim();
    if rest == "." {
        Ok(())
    } else {
        Err(MalformedLine)
    }
}
