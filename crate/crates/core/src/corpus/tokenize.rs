/// Split text into lowercase tokens.
///
/// A token is a maximal run of Unicode alphanumeric characters; everything
/// else separates tokens. Lowercasing can expand a character into several
/// (e.g. `İ` becomes `i` plus a combining dot); only the alphanumeric part of
/// the expansion is kept so the output re-tokenizes to itself.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for_each_token(text, |t| tokens.push(t.to_owned()));
    tokens
}

/// Streaming form of [`tokenize`]: calls `f` with each token in order without
/// allocating a vector. The `&str` handed to `f` is only valid for the call.
pub fn for_each_token(text: &str, mut f: impl FnMut(&str)) {
    let mut buf = String::new();
    if text.is_ascii() {
        for run in text.split(|c: char| !c.is_ascii_alphanumeric()) {
            if run.is_empty() {
                continue;
            }
            if run.bytes().any(|b| b.is_ascii_uppercase()) {
                buf.clear();
                buf.push_str(run);
                buf.make_ascii_lowercase();
                f(&buf);
            } else {
                f(run);
            }
        }
        return;
    }
    for c in text.chars() {
        if c.is_alphanumeric() {
            buf.extend(c.to_lowercase().filter(|l| l.is_alphanumeric()));
        } else if !buf.is_empty() {
            f(&buf);
            buf.clear();
        }
    }
    if !buf.is_empty() {
        f(&buf);
    }
}
