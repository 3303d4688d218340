//! Tokenization, vocabulary building and token vectors.

use contextualizer::text::{tokenize, EmbeddingTable, PositionEncoder, TextEncoder, Vocabulary};

fn main() -> contextualizer::Result<()> {
    let corpus = [
        "It's a gripping, well-made film.",
        "The film isn't gripping; it's dull.",
        "A well-made, 1.5-hour film that's never dull!",
    ];
    let tokens: Vec<Vec<String>> = corpus.iter().map(|s| tokenize(s)).collect();
    for (s, t) in corpus.iter().zip(&tokens) {
        println!("{s:?}\n  -> {t:?}");
    }
    let vocab = Vocabulary::build(&tokens, 2)?;
    println!("vocabulary at min count 2 ({} rows, OOV at {}): {:?}", vocab.len(), vocab.oov_index(), vocab.tokens());

    let rows = vocab.len();
    let encoder = TextEncoder::new(vocab, EmbeddingTable::new(rows, 6, 1, false)?, PositionEncoder::new(4))?;
    let doc = encoder.encode(&tokenize("a dull, dull film"), false)?;
    println!("ids {:?}", doc.token_ids);
    for i in 0..doc.len() {
        println!("  x_{i} = {:.3?}", doc.vectors.row(i));
    }
    Ok(())
}
