//! HTML to plain text.
//!
//! Tags are replaced by a single space, `script`/`style` element bodies and
//! comments are dropped, and the five XML entities plus `&#39;` and `&nbsp;`
//! are decoded.
//! The output never contains a `<` directly followed by something that would
//! open a tag, nor an `&` that would start an entity, so stripping twice is a
//! no-op.

const ENTITIES: [(&str, char); 7] = [
    ("&amp;", '&'),
    ("&lt;", '<'),
    ("&gt;", '>'),
    ("&quot;", '"'),
    ("&apos;", '\''),
    ("&#39;", '\''),
    ("&nbsp;", ' '),
];

/// Remove markup from `raw` and collapse whitespace runs to single spaces.
pub fn strip_markup(raw: &str) -> String {
    let mut text = String::with_capacity(raw.len());
    let mut rest = raw;

    while let Some(ch) = rest.chars().next() {
        match ch {
            '<' if opens_tag(&rest[1..]) => {
                rest = skip_tag(rest);
                text.push(' ');
            }
            '&' => match decode_entity(rest) {
                Some((decoded, len)) => {
                    text.push(decoded);
                    rest = &rest[len..];
                    if would_reopen(decoded, rest) {
                        text.push(' ');
                    }
                }
                None => {
                    text.push('&');
                    rest = &rest[1..];
                }
            },
            _ => {
                text.push(ch);
                rest = &rest[ch.len_utf8()..];
            }
        }
    }

    collapse_whitespace(&text)
}

fn opens_tag(after_lt: &str) -> bool {
    matches!(after_lt.chars().next(), Some(c) if c.is_ascii_alphabetic() || matches!(c, '/' | '!' | '?'))
}

/// Skip a tag starting at `s[0] == '<'`, including the whole element body for
/// script and style elements. Unclosed constructs consume the rest of the input.
fn skip_tag(s: &str) -> &str {
    if s.starts_with("<!--") {
        return match s[4..].find("-->") {
            Some(end) => &s[4 + end + 3..],
            None => "",
        };
    }

    let after = match s.find('>') {
        Some(end) => &s[end + 1..],
        None => return "",
    };

    for element in ["script", "style"] {
        if starts_with_element(&s[1..], element) {
            return skip_element_body(after, element);
        }
    }
    after
}

fn starts_with_element(s: &str, name: &str) -> bool {
    let bytes = s.as_bytes();
    if bytes.len() < name.len() || !bytes[..name.len()].eq_ignore_ascii_case(name.as_bytes()) {
        return false;
    }
    match bytes.get(name.len()) {
        None => true,
        Some(b) => !b.is_ascii_alphanumeric(),
    }
}

fn skip_element_body<'a>(s: &'a str, name: &str) -> &'a str {
    let bytes = s.as_bytes();
    let mut i = 0;
    while let Some(offset) = s[i..].find("</") {
        let start = i + offset;
        if starts_with_element(&s[start + 2..], name) {
            return match s[start..].find('>') {
                Some(end) => &s[start + end + 1..],
                None => "",
            };
        }
        i = start + 2;
        if i >= bytes.len() {
            break;
        }
    }
    ""
}

fn decode_entity(s: &str) -> Option<(char, usize)> {
    ENTITIES
        .iter()
        .find(|(name, _)| {
            s.len() >= name.len() && s.is_char_boundary(name.len()) && s[..name.len()].eq_ignore_ascii_case(name)
        })
        .map(|&(name, ch)| (ch, name.len()))
}

// A decoded `<` or `&` must not combine with the following text into
// something a second pass would strip or decode again.
fn would_reopen(decoded: char, rest: &str) -> bool {
    match decoded {
        '<' => opens_tag(rest),
        '&' => ENTITIES.iter().any(|(name, _)| {
            let tail = &name[1..];
            rest.len() >= tail.len() && rest.is_char_boundary(tail.len()) && rest[..tail.len()].eq_ignore_ascii_case(tail)
        }),
        _ => false,
    }
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
