//! Graph, per-node text and label ingestion.
//!
//! Node ids are opaque strings. Dense indices are assigned in order of first
//! appearance in the edge list, so the same file always produces the same
//! indexing.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Directed graph over dense node indices `0..n`.
///
/// Undirected input is stored as two arcs. Duplicate arcs are collapsed,
/// self-loops are kept.
#[derive(Debug, Clone)]
pub struct Graph {
    node_ids: Vec<String>,
    index: HashMap<String, usize>,
    out: Vec<Vec<usize>>,
    // Same neighbors, sorted, for membership tests during biased walks.
    sorted_out: Vec<Vec<usize>>,
    // Every arc once, in insertion order.
    arcs: Vec<(usize, usize)>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.node_ids == other.node_ids && self.out == other.out
    }
}

impl Graph {
    /// Builds a graph from external ids and arcs over their indices.
    ///
    /// Duplicate arcs are dropped; ids must be unique and every endpoint in range.
    pub fn from_arcs(node_ids: Vec<String>, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let n = node_ids.len();
        if n == 0 {
            return Err(Error::Data("graph has no nodes".into()));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, id) in node_ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::Data(format!("duplicate node id `{id}`")));
            }
        }
        let mut graph = Graph {
            node_ids,
            index,
            out: vec![Vec::new(); n],
            sorted_out: vec![Vec::new(); n],
            arcs: Vec::new(),
        };
        for (src, dst) in arcs {
            if src >= n || dst >= n {
                return Err(Error::Data(format!("arc ({src}, {dst}) out of range for {n} nodes")));
            }
            graph.insert_arc(src, dst);
        }
        Ok(graph)
    }

    fn insert_arc(&mut self, src: usize, dst: usize) -> bool {
        let sorted = &mut self.sorted_out[src];
        match sorted.binary_search(&dst) {
            Ok(_) => false,
            Err(pos) => {
                sorted.insert(pos, dst);
                self.out[src].push(dst);
                self.arcs.push((src, dst));
                true
            }
        }
    }

    fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.node_ids.len();
        self.node_ids.push(id.to_owned());
        self.index.insert(id.to_owned(), i);
        self.out.push(Vec::new());
        self.sorted_out.push(Vec::new());
        i
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn node_id(&self, index: usize) -> &str {
        &self.node_ids[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Out-neighbors in insertion order.
    pub fn out_neighbors(&self, node: usize) -> &[usize] {
        &self.out[node]
    }

    pub fn has_arc(&self, src: usize, dst: usize) -> bool {
        self.sorted_out[src].binary_search(&dst).is_ok()
    }

    /// All arcs in insertion order.
    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    /// True when every arc has its reverse.
    pub fn is_symmetric(&self) -> bool {
        self.arcs.iter().all(|&(s, d)| self.has_arc(d, s))
    }

    /// Writes the graph as `src<TAB>dst` lines in insertion order.
    ///
    /// Reloading the output with `directed = true` reproduces the graph.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for &(s, d) in &self.arcs {
            writeln!(w, "{}\t{}", self.node_ids[s], self.node_ids[d])?;
        }
        Ok(())
    }

    pub fn load_edge_list(path: impl AsRef<Path>, directed: bool) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_edge_list(BufReader::new(file), path, directed)
    }

    /// Parses edge-list lines from any reader; `origin` is used in error messages.
    pub fn read_edge_list<R: BufRead>(reader: R, origin: &Path, directed: bool) -> Result<Self> {
        let mut graph = Graph {
            node_ids: Vec::new(),
            index: HashMap::new(),
            out: Vec::new(),
            sorted_out: Vec::new(),
            arcs: Vec::new(),
        };
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let (src, dst) = match (fields.next(), fields.next(), fields.next()) {
                (Some(s), Some(d), None) if !s.is_empty() && !d.is_empty() => (s, d),
                _ => {
                    return Err(Error::parse(
                        origin,
                        lineno + 1,
                        format!("expected `src<TAB>dst`, got `{line}`"),
                    ))
                }
            };
            let s = graph.intern(src);
            let d = graph.intern(dst);
            graph.insert_arc(s, d);
            if !directed {
                graph.insert_arc(d, s);
            }
        }
        if graph.node_ids.is_empty() {
            return Err(Error::EmptyInput {
                path: origin.to_path_buf(),
            });
        }
        Ok(graph)
    }
}

/// Tokenized text description of every node, index-aligned with a [`Graph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeDocs {
    pub docs: Vec<Vec<String>>,
    pub char_limit: Option<usize>,
}

/// Splits on non-alphanumeric characters and lowercases; empty tokens are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Keeps the first `limit` characters (not bytes).
pub fn truncate_chars(text: &str, limit: usize) -> &str {
    match text.char_indices().nth(limit) {
        Some((byte, _)) => &text[..byte],
        None => text,
    }
}

impl NodeDocs {
    pub fn empty(n: usize) -> Self {
        NodeDocs {
            docs: vec![Vec::new(); n],
            char_limit: None,
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn load(path: impl AsRef<Path>, graph: &Graph, char_limit: Option<usize>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file), path, graph, char_limit)
    }

    pub fn read<R: BufRead>(reader: R, origin: &Path, graph: &Graph, char_limit: Option<usize>) -> Result<Self> {
        let mut docs = NodeDocs {
            docs: vec![Vec::new(); graph.node_count()],
            char_limit,
        };
        let mut seen = vec![false; graph.node_count()];
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let (id, text) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, lineno + 1, "expected `node_id<TAB>text`"))?;
            let node = graph.index_of(id).ok_or_else(|| Error::UnknownNode(id.to_owned()))?;
            if std::mem::replace(&mut seen[node], true) {
                return Err(Error::parse(
                    origin,
                    lineno + 1,
                    format!("duplicate text for node `{id}`"),
                ));
            }
            let text = match char_limit {
                Some(limit) => truncate_chars(text, limit),
                None => text,
            };
            docs.docs[node] = tokenize(text);
        }
        Ok(docs)
    }
}

/// Per-node label sets over a sorted label universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    /// Per node, indices into `universe`.
    pub labels: Vec<BTreeSet<usize>>,
    pub universe: Vec<String>,
}

impl LabelSet {
    /// Builds a label set from per-node label strings.
    pub fn from_names<S: AsRef<str>>(per_node: &[Vec<S>]) -> Self {
        let universe: Vec<String> = per_node
            .iter()
            .flatten()
            .map(|s| s.as_ref().to_owned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let labels = per_node
            .iter()
            .map(|names| {
                names
                    .iter()
                    .map(|s| universe.binary_search_by(|u| u.as_str().cmp(s.as_ref())).unwrap())
                    .collect()
            })
            .collect();
        LabelSet { labels, universe }
    }

    pub fn names_of(&self, node: usize) -> impl Iterator<Item = &str> {
        self.labels[node].iter().map(|&l| self.universe[l].as_str())
    }

    pub fn load(path: impl AsRef<Path>, graph: &Graph) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file), path, graph)
    }

    pub fn read<R: BufRead>(reader: R, origin: &Path, graph: &Graph) -> Result<Self> {
        let mut per_node: Vec<Vec<String>> = vec![Vec::new(); graph.node_count()];
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let (id, list) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, lineno + 1, "expected `node_id<TAB>label,label,...`"))?;
            let node = graph.index_of(id).ok_or_else(|| Error::UnknownNode(id.to_owned()))?;
            per_node[node].extend(
                list.split(',')
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(str::to_owned),
            );
        }
        Ok(Self::from_names(&per_node))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;
    use std::io::Cursor;

    use super::*;

    fn edges(text: &str, directed: bool) -> Result<Graph> {
        Graph::read_edge_list(Cursor::new(text), Path::new("edges.tsv"), directed)
    }

    fn names(g: &Graph, node: &str) -> Vec<String> {
        let i = g.index_of(node).unwrap();
        g.out_neighbors(i).iter().map(|&j| g.node_id(j).to_owned()).collect()
    }

    #[test]
    fn directed_chain() {
        let g = edges("a\tb\nb\tc\n", true).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.node_ids(), ["a", "b", "c"]);
        assert_eq!(names(&g, "a"), ["b"]);
        assert_eq!(names(&g, "b"), ["c"]);
        assert!(names(&g, "c").is_empty());
    }

    #[test]
    fn undirected_line_gives_both_arcs() {
        let g = edges("a\tb\n", false).unwrap();
        assert_eq!(names(&g, "a"), ["b"]);
        assert_eq!(names(&g, "b"), ["a"]);
        assert!(g.is_symmetric());
    }

    #[test]
    fn duplicate_arcs_collapse() {
        let g = edges("a\tb\na\tb\n", true).unwrap();
        let arcs: BTreeSet<_> = g.arcs().iter().copied().collect();
        assert_eq!(arcs.len(), g.arc_count());
        assert_eq!(names(&g, "a"), ["b"]);
    }

    #[test]
    fn self_loops_are_kept() {
        let g = edges("a\ta\n", true).unwrap();
        assert_eq!(names(&g, "a"), ["a"]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = edges("a\tb\nbroken\n", true).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(edges("a\tb\tc\n", true), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn empty_edge_file_is_an_error() {
        assert!(matches!(edges("", true), Err(Error::EmptyInput { .. })));
        assert!(matches!(edges("\n\n", true), Err(Error::EmptyInput { .. })));
    }

    #[test]
    fn tokenizer() {
        assert_eq!(tokenize("The Cat, the cat"), ["the", "cat", "the", "cat"]);
        assert_eq!(tokenize("  --  "), Vec::<String>::new());
        assert_eq!(tokenize("Ünïcode café"), ["ünïcode", "café"]);
    }

    #[test]
    fn node_texts_truncate_before_tokenizing() {
        let g = edges("a\tb\nb\tc\n", true).unwrap();
        let read = |limit| NodeDocs::read(Cursor::new("a\tThe Cat, the cat\n"), Path::new("n"), &g, limit).unwrap();
        assert_eq!(read(None).docs[0], ["the", "cat", "the", "cat"]);
        assert_eq!(read(Some(7)).docs[0], ["the", "cat"]);
        // nodes without a line get empty docs
        assert!(read(None).docs[2].is_empty());
    }

    #[test]
    fn truncation_counts_characters() {
        assert_eq!(truncate_chars("héllo", 2), "hé");
        assert_eq!(truncate_chars("ab", 10), "ab");
    }

    #[test]
    fn node_texts_unknown_id() {
        let g = edges("a\tb\n", true).unwrap();
        let err = NodeDocs::read(Cursor::new("zzz\thi\n"), Path::new("n"), &g, None).unwrap_err();
        assert!(err.to_string().contains("zzz"));
    }

    #[test]
    fn labels() {
        let g = edges("a\tb\nb\tc\n", true).unwrap();
        let ls = LabelSet::read(Cursor::new("a\thistory,science\n"), Path::new("l"), &g).unwrap();
        assert_eq!(ls.names_of(0).collect::<Vec<_>>(), ["history", "science"]);
        assert!(ls.labels[1].is_empty());

        let ls = LabelSet::read(Cursor::new("a\tx\nb\ty,x\n"), Path::new("l"), &g).unwrap();
        assert_eq!(ls.universe, ["x", "y"]);

        let err = LabelSet::read(Cursor::new("q\tx\n"), Path::new("l"), &g).unwrap_err();
        assert!(matches!(err, Error::UnknownNode(id) if id == "q"));
    }

    #[test]
    fn from_arcs_rejects_bad_input() {
        assert!(Graph::from_arcs(vec!["a".into(), "a".into()], []).is_err());
        assert!(Graph::from_arcs(vec!["a".into()], [(0, 1)]).is_err());
    }
}
