use crate::token::TaggedToken;

/// Joins tagged tokens into display text, appending each tag's symbol.
///
/// With `capitalize`, the first letter of the text and of every word after a
/// sentence boundary is uppercased. No other casing is restored.
pub fn render(tagged: &[TaggedToken], capitalize: bool) -> String {
    let mut out = String::new();
    let mut sentence_start = true;
    for (i, tt) in tagged.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let text = tt.token.as_str();
        if capitalize && sentence_start {
            let mut chars = text.chars();
            if let Some(first) = chars.next() {
                out.extend(first.to_uppercase());
                out.push_str(chars.as_str());
            }
        } else {
            out.push_str(text);
        }
        out.push_str(tt.tag.symbol());
        sentence_start = tt.tag.is_boundary();
    }
    out
}
