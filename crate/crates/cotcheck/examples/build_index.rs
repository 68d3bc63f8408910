//! Build an exact-search embedding index over a KG and query it.
//!
//! Run with: cargo run --example build_index

use std::io::Cursor;

use cotcheck::embed::{EmbeddingProvider, TrigramEmbedder};
use cotcheck::index::{build_index, load_index, save_index, top_k};
use cotcheck::kg::load_triples;

fn main() -> cotcheck::Result<()> {
    let kg = "\
Justin Bieber\tchild_of\tJeremy Bieber
Jeremy Bieber\tfather_of\tJaxon Bieber
Greece\tlocation.country.languages_spoken\tGreek Language
Greece\tlocation.country.administrative_divisions\tCorfu
Rihanna\tpeople.person.place_of_birth\tSaint Michael Parish
";
    let graph = load_triples(Cursor::new(kg))?;
    println!(
        "loaded {} triples, {} entities, {} relations",
        graph.triple_count(),
        graph.entity_count(),
        graph.relation_count()
    );

    // The trigram embedder is deterministic and fully offline; swap in
    // HttpEmbeddingProvider to call a real embedding model.
    let provider = TrigramEmbedder::new();
    let index = build_index(&graph, &provider, 16)?;
    println!(
        "index: {} entries, dimension {}, provider tag {}",
        index.len(),
        index.dimension(),
        index.provider_tag()
    );

    // Round-trip through the binary file format.
    let mut bytes = Vec::new();
    save_index(&index, &mut bytes)?;
    let reloaded = load_index(&mut Cursor::new(&bytes))?;
    println!("saved {} bytes; reload equal: {}", bytes.len(), reloaded == index);

    // Cosine top-k over the index.
    let query = "who is the brother of Justin Bieber";
    let hits = top_k(&index, &provider.embed_one(query)?, 3)?;
    println!("\ntop 3 for {query:?}:");
    for (triple, sim) in hits {
        println!("  {sim:+.4}  {triple}");
    }
    Ok(())
}
