//! Word-level tokenizer.
//!
//! Text is lowercased and split on whitespace. Within each chunk, runs of
//! alphanumerics form words (hyphens between letters and `.`/`,` between
//! digits stay inside the word), every other symbol is its own token, and
//! English clitics are split off: `it's` → `it 's`, `don't` → `do n't`.

const CLITICS: [&str; 6] = ["s", "re", "ve", "ll", "d", "m"];

pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let lower = chunk.to_lowercase();
        let chars: Vec<char> = lower.chars().collect();
        split_chunk(&chars, &mut tokens);
    }
    tokens
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric()
}

fn split_chunk(chars: &[char], out: &mut Vec<String>) {
    let mut i = 0;
    let mut prev_was_word = false;
    while i < chars.len() {
        let c = chars[i];
        if is_word(c) {
            let start = i;
            i += 1;
            while i < chars.len() {
                let d = chars[i];
                let joins = i + 1 < chars.len()
                    && ((d == '-' && chars[i - 1].is_alphabetic() && chars[i + 1].is_alphabetic())
                        || ((d == '.' || d == ',')
                            && chars[i - 1].is_ascii_digit()
                            && chars[i + 1].is_ascii_digit()));
                if is_word(d) || joins {
                    i += 1;
                } else {
                    break;
                }
            }
            out.push(chars[start..i].iter().collect());
            prev_was_word = true;
            continue;
        }

        // A chunk that starts with a clitic is an already split one ("'s", "n't").
        if c == '\'' && (prev_was_word || i == 0) {
            let rest_end = chars[i + 1..]
                .iter()
                .position(|&d| !is_word(d))
                .map_or(chars.len(), |p| i + 1 + p);
            let rest: String = chars[i + 1..rest_end].iter().collect();
            if rest == "t" {
                if let Some(last) = out.last_mut() {
                    if prev_was_word && last == "n" {
                        last.push_str("'t");
                        i = rest_end;
                        prev_was_word = false;
                        continue;
                    }
                    if prev_was_word && last.ends_with('n') {
                        last.pop();
                        out.push("n't".to_string());
                        i = rest_end;
                        prev_was_word = false;
                        continue;
                    }
                }
            }
            if CLITICS.contains(&rest.as_str()) {
                out.push(format!("'{rest}"));
                i = rest_end;
                prev_was_word = false;
                continue;
            }
        }

        out.push(c.to_string());
        prev_was_word = false;
        i += 1;
    }
}
