//! Exact top-K retrieval over embedded triples, plus the on-disk index
//! format.
//!
//! Search is a brute-force scan: at the graph sizes this crate targets the
//! scan is fast, exact, and directly checkable against an oracle. The
//! interface is stable, so an approximate backend could replace the scan
//! without touching callers.
//!
//! File layout (little-endian): magic `CTIX`, format version u32,
//! dimension u32, entry count u64, provider tag (u32 length + UTF-8), then
//! per entry three length-prefixed UTF-8 fields (head, relation, tail
//! labels) followed by `dimension` f32 values.

use std::io::{Read, Write};

use crate::embed::{cosine, EmbeddingProvider, EmbeddingVector};
use crate::error::{Error, Result};
use crate::kg::{verbalize, KnowledgeGraph, Triple};

const MAGIC: &[u8; 4] = b"CTIX";
const FORMAT_VERSION: u32 = 1;

/// One embedded vector per triple, in graph iteration order.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleIndex {
    entries: Vec<(Triple, EmbeddingVector)>,
    dimension: usize,
    provider_tag: String,
}

impl TripleIndex {
    pub fn entries(&self) -> &[(Triple, EmbeddingVector)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn provider_tag(&self) -> &str {
        &self.provider_tag
    }
}

/// Embed `verbalize(t)` for every triple in `g`, in graph order, batching
/// provider calls. Vectors are stored L2-normalized.
pub fn build_index(
    g: &KnowledgeGraph,
    provider: &dyn EmbeddingProvider,
    batch_size: usize,
) -> Result<TripleIndex> {
    assert!(batch_size > 0, "batch_size must be positive");
    let mut entries = Vec::with_capacity(g.triple_count());
    let triples = g.triples();
    for (offset, chunk) in triples.chunks(batch_size).enumerate() {
        let texts: Vec<String> = chunk.iter().map(verbalize).collect();
        let vectors = provider.embed(&texts).map_err(|e| match e {
            Error::Provider { msg, .. } => Error::Provider {
                offset: offset * batch_size,
                msg,
            },
            other => other,
        })?;
        if vectors.len() != chunk.len() {
            return Err(Error::Provider {
                offset: offset * batch_size,
                msg: format!("expected {} vectors, got {}", chunk.len(), vectors.len()),
            });
        }
        for (t, v) in chunk.iter().zip(vectors) {
            if v.dimension() != provider.dimension() {
                return Err(Error::Dimension {
                    expected: provider.dimension(),
                    got: v.dimension(),
                });
            }
            entries.push((t.clone(), v.normalized()));
        }
    }
    Ok(TripleIndex {
        entries,
        dimension: provider.dimension(),
        provider_tag: provider.tag().to_string(),
    })
}

/// The `k` entries most similar to `query` by cosine, descending. Ties keep
/// index entry order. Asking for more entries than exist returns them all.
pub fn top_k(
    index: &TripleIndex,
    query: &EmbeddingVector,
    k: usize,
) -> Result<Vec<(Triple, f64)>> {
    assert!(k > 0, "k must be positive");
    if index.is_empty() {
        return Ok(Vec::new());
    }
    if query.dimension() != index.dimension {
        return Err(Error::Dimension {
            expected: index.dimension,
            got: query.dimension(),
        });
    }
    let mut scored: Vec<(usize, f64)> = Vec::with_capacity(index.entries.len());
    for (i, (_, v)) in index.entries.iter().enumerate() {
        scored.push((i, cosine(query, v)?));
    }
    // Stable sort keeps entry order within equal similarities.
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(scored
        .into_iter()
        .take(k)
        .map(|(i, sim)| (index.entries[i].0.clone(), sim))
        .collect())
}

fn write_field<W: Write>(w: &mut W, s: &str) -> Result<()> {
    let bytes = s.as_bytes();
    w.write_all(&(bytes.len() as u32).to_le_bytes())?;
    w.write_all(bytes)?;
    Ok(())
}

/// Serialize the index. `load_index(save_index(x)) == x`, including the
/// provider tag and entry order.
pub fn save_index<W: Write>(index: &TripleIndex, sink: &mut W) -> Result<()> {
    sink.write_all(MAGIC)?;
    sink.write_all(&FORMAT_VERSION.to_le_bytes())?;
    sink.write_all(&(index.dimension as u32).to_le_bytes())?;
    sink.write_all(&(index.entries.len() as u64).to_le_bytes())?;
    write_field(sink, &index.provider_tag)?;
    for (t, v) in &index.entries {
        write_field(sink, &t.head.label)?;
        write_field(sink, &t.relation.name)?;
        write_field(sink, &t.tail.label)?;
        for &x in &v.values {
            sink.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Format("truncated index file".into()))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(r, &mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_field(r: &mut impl Read) -> Result<String> {
    let len = read_u32(r)? as usize;
    let mut buf = vec![0u8; len];
    read_exact(r, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Format(format!("invalid UTF-8 field: {e}")))
}

/// Deserialize an index written by [`save_index`]. A truncated or
/// mismatched file yields a format error and no partial index.
pub fn load_index<R: Read>(source: &mut R) -> Result<TripleIndex> {
    let mut magic = [0u8; 4];
    read_exact(source, &mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic bytes".into()));
    }
    let version = read_u32(source)?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let dimension = read_u32(source)? as usize;
    let mut count_buf = [0u8; 8];
    read_exact(source, &mut count_buf)?;
    let count = u64::from_le_bytes(count_buf) as usize;
    let provider_tag = read_field(source)?;
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let head = read_field(source)?;
        let relation = read_field(source)?;
        let tail = read_field(source)?;
        let mut values = Vec::with_capacity(dimension);
        let mut buf = [0u8; 4];
        for _ in 0..dimension {
            read_exact(source, &mut buf)?;
            values.push(f32::from_le_bytes(buf));
        }
        entries.push((
            Triple::from_labels(&head, &relation, &tail),
            EmbeddingVector::new(values),
        ));
    }
    Ok(TripleIndex {
        entries,
        dimension,
        provider_tag,
    })
}

/// Load and check the provider tag. Returns the index together with a
/// warning message when `expected_tag` is given and does not match.
pub fn load_index_expecting<R: Read>(
    source: &mut R,
    expected_tag: Option<&str>,
) -> Result<(TripleIndex, Option<String>)> {
    let index = load_index(source)?;
    let warning = expected_tag.and_then(|want| {
        if index.provider_tag != want {
            Some(format!(
                "index was built with provider '{}' but '{want}' was expected",
                index.provider_tag
            ))
        } else {
            None
        }
    });
    Ok((index, warning))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::TrigramEmbedder;
    use crate::kg::load_triples;
    use std::io::Cursor;

    fn small_graph() -> KnowledgeGraph {
        load_triples(Cursor::new(
            "Justin Bieber\tchild_of\tJeremy Bieber\n\
             Jeremy Bieber\tfather_of\tJaxon Bieber\n\
             Greece\tlocation.country.languages_spoken\tGreek Language\n",
        ))
        .unwrap()
    }

    #[test]
    fn build_has_one_entry_per_triple() {
        let provider = TrigramEmbedder::new();
        let index = build_index(&small_graph(), &provider, 2).unwrap();
        assert_eq!(index.len(), 3);
        assert_eq!(index.dimension(), provider.dimension());
        assert_eq!(index.provider_tag(), provider.tag());
    }

    #[test]
    fn rebuild_is_byte_identical() {
        let provider = TrigramEmbedder::new();
        let g = small_graph();
        let mut a = Vec::new();
        let mut b = Vec::new();
        save_index(&build_index(&g, &provider, 1).unwrap(), &mut a).unwrap();
        save_index(&build_index(&g, &provider, 3).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stored_vectors_are_unit_norm() {
        // Independent recomputation of every norm.
        let mut src = String::new();
        for i in 0..200 {
            src.push_str(&format!("subject {i}\trelated_to\tobject {}\n", i % 17));
        }
        let g = load_triples(Cursor::new(src)).unwrap();
        let index = build_index(&g, &TrigramEmbedder::new(), 16).unwrap();
        assert_eq!(index.len(), 200);
        for (_, v) in index.entries() {
            let norm: f64 = v
                .values
                .iter()
                .fold(0f64, |acc, &x| acc + (x as f64) * (x as f64))
                .sqrt();
            assert!((norm - 1.0).abs() < 1e-6, "norm was {norm}");
        }
    }

    #[test]
    fn top_k_exact_hit() {
        let provider = TrigramEmbedder::new();
        let g = small_graph();
        let index = build_index(&g, &provider, 8).unwrap();
        let query = provider.embed_one(&verbalize(&g.triples()[1])).unwrap();
        let hits = top_k(&index, &query, 1).unwrap();
        assert_eq!(hits[0].0, g.triples()[1]);
        assert!((hits[0].1 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn top_k_with_k_equal_len_is_a_sorted_permutation() {
        let provider = TrigramEmbedder::new();
        let index = build_index(&small_graph(), &provider, 8).unwrap();
        let query = provider.embed_one("who is the brother of Justin Bieber").unwrap();
        let hits = top_k(&index, &query, index.len()).unwrap();
        assert_eq!(hits.len(), index.len());
        for w in hits.windows(2) {
            assert!(w[0].1 >= w[1].1);
        }
    }

    #[test]
    fn top_k_matches_full_sort_oracle() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut src = String::new();
        for i in 0..200 {
            src.push_str(&format!("node{i}\tlinks_to\tnode{}\n", (i * 7) % 200));
        }
        let g = load_triples(Cursor::new(src)).unwrap();
        let provider = TrigramEmbedder::new();
        let index = build_index(&g, &provider, 32).unwrap();
        for _ in 0..50 {
            let raw: Vec<f32> = (0..provider.dimension())
                .map(|_| rng.random_range(-1.0f32..1.0))
                .collect();
            let query = EmbeddingVector::new(raw).normalized();
            let got = top_k(&index, &query, 10).unwrap();
            // Oracle: score everything, full sort with stable tie order.
            let mut all: Vec<(usize, f64)> = index
                .entries()
                .iter()
                .enumerate()
                .map(|(i, (_, v))| (i, cosine(&query, v).unwrap()))
                .collect();
            all.sort_by(|a, b| b.1.total_cmp(&a.1));
            for (rank, (idx, sim)) in all.into_iter().take(10).enumerate() {
                assert_eq!(got[rank].0, index.entries()[idx].0);
                assert!((got[rank].1 - sim).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empty_index_returns_empty() {
        let index = TripleIndex {
            entries: Vec::new(),
            dimension: 4,
            provider_tag: "t".into(),
        };
        let q = EmbeddingVector::new(vec![1.0, 0.0, 0.0, 0.0]);
        assert!(top_k(&index, &q, 3).unwrap().is_empty());
    }

    #[test]
    fn save_load_round_trip() {
        let index = build_index(&small_graph(), &TrigramEmbedder::new(), 2).unwrap();
        let mut buf = Vec::new();
        save_index(&index, &mut buf).unwrap();
        let loaded = load_index(&mut Cursor::new(&buf)).unwrap();
        assert_eq!(index, loaded);
    }

    #[test]
    fn stored_vectors_make_cosine_equal_dot() {
        let index = build_index(&small_graph(), &TrigramEmbedder::new(), 2).unwrap();
        let a = &index.entries()[0].1;
        let b = &index.entries()[1].1;
        let dot: f64 = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(&x, &y)| x as f64 * y as f64)
            .sum();
        assert!((cosine(a, b).unwrap() - dot).abs() < 1e-6);
    }

    #[test]
    fn version_mismatch_is_a_format_error() {
        let index = build_index(&small_graph(), &TrigramEmbedder::new(), 2).unwrap();
        let mut buf = Vec::new();
        save_index(&index, &mut buf).unwrap();
        buf[4] = 99; // format version field
        match load_index(&mut Cursor::new(&buf)) {
            Err(Error::Format(msg)) => assert!(msg.contains("version")),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn truncated_file_is_a_format_error() {
        let index = build_index(&small_graph(), &TrigramEmbedder::new(), 2).unwrap();
        let mut buf = Vec::new();
        save_index(&index, &mut buf).unwrap();
        buf.truncate(buf.len() - 7);
        match load_index(&mut Cursor::new(&buf)) {
            Err(Error::Format(_)) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn tag_mismatch_surfaces_a_warning() {
        let index = build_index(&small_graph(), &TrigramEmbedder::new(), 2).unwrap();
        let mut buf = Vec::new();
        save_index(&index, &mut buf).unwrap();
        let (_, warn) =
            load_index_expecting(&mut Cursor::new(&buf), Some("http:other-model:768")).unwrap();
        assert!(warn.is_some());
        let (_, none) =
            load_index_expecting(&mut Cursor::new(&buf), Some(index.provider_tag())).unwrap();
        assert!(none.is_none());
    }
}
