/// Extract the place name from a news dateline.
///
/// Returns the leading span of all-caps words (uppercase letters, spaces and
/// periods), lowercased with whitespace collapsed. A word that starts in
/// capitals but continues in lowercase ("March") ends the span before it.
/// Returns `None` when the dateline does not open with such a span.
///
/// `"SAN ANTONIO, March 29"` yields `"san antonio"`; `"march 29"` yields `None`.
pub fn parse_dateline(dateline: &str) -> Option<String> {
    let s = dateline.trim_start();
    let allowed = |c: char| c.is_uppercase() || c == ' ' || c == '.';
    let mut end = s.len();
    for (i, c) in s.char_indices() {
        if !allowed(c) {
            end = i;
            // A letter or digit glued to the span means the last word is not
            // all caps; drop it.
            if c.is_alphanumeric() {
                end = s[..i].rfind(' ').unwrap_or(0);
            }
            break;
        }
    }
    let words: Vec<&str> = s[..end].split_whitespace().collect();
    if !words.iter().any(|w| w.chars().any(char::is_alphabetic)) {
        return None;
    }
    Some(words.join(" ").to_lowercase())
}

/// Normalize a place name for gazetteer lookup.
pub fn normalize_place(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn datelines_from_the_news() {
        assert_eq!(
            parse_dateline("BAGHDAD, Iraq, March 29").as_deref(),
            Some("baghdad")
        );
        assert_eq!(
            parse_dateline("SAN ANTONIO, March 29").as_deref(),
            Some("san antonio")
        );
        assert_eq!(
            parse_dateline("KUWAIT, Sunday, March 30").as_deref(),
            Some("kuwait")
        );
    }

    #[test]
    fn no_caps_span() {
        assert_eq!(parse_dateline("march 29"), None);
        assert_eq!(parse_dateline("March 29"), None);
        assert_eq!(parse_dateline(""), None);
        assert_eq!(parse_dateline(", 1990"), None);
        assert_eq!(parse_dateline("..."), None);
    }

    #[test]
    fn span_stops_before_mixed_case_word() {
        assert_eq!(
            parse_dateline("NEW YORK Sunday").as_deref(),
            Some("new york")
        );
        assert_eq!(
            parse_dateline("ST. LOUIS, May 2").as_deref(),
            Some("st. louis")
        );
        assert_eq!(
            parse_dateline("  SAN   FRANCISCO  , Jan. 4").as_deref(),
            Some("san francisco")
        );
    }

    #[test]
    fn non_ascii_capitals() {
        assert_eq!(
            parse_dateline("SÃO PAULO, Brazil").as_deref(),
            Some("são paulo")
        );
    }
}
