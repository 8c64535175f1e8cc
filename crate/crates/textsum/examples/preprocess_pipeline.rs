//! Walk one sentence through every preprocessing stage.
//!
//! ```bash
//! cargo run -p textsum --example preprocess_pipeline
//! ```

use textsum::textproc::{
    expand_contractions, filter_stopwords, normalize_and_tokenize, preprocess,
    reduce_morphology, segment_sentences, Morphology, PipelineConfig,
};

fn main() {
    let text = "The ministers weren't expecting protests. Mr. Smith's advisers were running late.";
    let config = PipelineConfig::default();

    println!("input:        {text}");
    println!("sentences:    {:?}", segment_sentences(text).sentences);
    println!("contractions: {}", expand_contractions(text));
    println!("tokens:       {:?}", normalize_and_tokenize(text, &config));
    println!(
        "content:      {:?}",
        filter_stopwords(normalize_and_tokenize(text, &config), &config)
    );
    println!("preprocessed: {:?}", preprocess(text, &config));

    for word in ["running", "ministers", "went", "studies"] {
        println!(
            "{word}: stem={} lemma={}",
            reduce_morphology(word, Morphology::Stem),
            reduce_morphology(word, Morphology::Lemmatize),
        );
    }
}
