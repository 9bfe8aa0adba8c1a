/// Splits text into lowercase words: maximal runs of alphabetic characters.
/// Everything else (digits, punctuation, apostrophes, whitespace) separates
/// words. Invalid UTF-8 is replaced, never fatal.
pub fn tokenize(text: &[u8]) -> Vec<String> {
    tokenize_str(&String::from_utf8_lossy(text))
}

pub fn tokenize_str(text: &str) -> Vec<String> {
    let mut words = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphabetic() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            words.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        words.push(current);
    }
    words
}

/// Splits a file into documents at blank lines. Windows never cross a
/// document boundary; sentence boundaries inside a document are ignored.
pub fn split_documents(text: &str) -> Vec<Vec<String>> {
    let mut docs = Vec::new();
    let mut current: Vec<String> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                docs.push(std::mem::take(&mut current));
            }
        } else {
            current.extend(tokenize_str(line));
        }
    }
    if !current.is_empty() {
        docs.push(current);
    }
    docs
}
