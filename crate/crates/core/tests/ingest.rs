use std::io::Cursor;
use std::path::Path;

use proptest::prelude::*;
use sense::Graph;

fn node_name() -> impl Strategy<Value = String> {
    "[a-z]{1,3}"
}

proptest! {
    #[test]
    fn edge_list_round_trip(edges in prop::collection::vec((node_name(), node_name()), 1..40), directed in any::<bool>()) {
        let text: String = edges.iter().map(|(a, b)| format!("{a}\t{b}\n")).collect();
        let g = Graph::read_edge_list(Cursor::new(text), Path::new("e"), directed).unwrap();

        let mut out = Vec::new();
        g.write_edge_list(&mut out).unwrap();
        let back = Graph::read_edge_list(Cursor::new(out), Path::new("e"), true).unwrap();
        prop_assert_eq!(&back, &g);

        // ids and dense indices are a bijection
        for (i, id) in g.node_ids().iter().enumerate() {
            prop_assert_eq!(g.index_of(id), Some(i));
        }
        let mut ids = g.node_ids().to_vec();
        ids.sort();
        ids.dedup();
        prop_assert_eq!(ids.len(), g.node_count());

        // no duplicate arcs, every neighbor in range
        for v in 0..g.node_count() {
            let mut nbrs = g.out_neighbors(v).to_vec();
            prop_assert!(nbrs.iter().all(|&u| u < g.node_count()));
            nbrs.sort_unstable();
            let len = nbrs.len();
            nbrs.dedup();
            prop_assert_eq!(nbrs.len(), len);
        }
    }
}

#[test]
fn files_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("edges.tsv");
    let nodes = dir.path().join("nodes.tsv");
    let labels = dir.path().join("labels.tsv");
    std::fs::write(&edges, "a\tb\nb\tc\n").unwrap();
    std::fs::write(&nodes, "a\tThe Cat, the cat\nc\tDog\n").unwrap();
    std::fs::write(&labels, "a\tx\nb\ty,x\n").unwrap();

    let g = Graph::load_edge_list(&edges, true).unwrap();
    let docs = sense::NodeDocs::load(&nodes, &g, Some(500)).unwrap();
    assert_eq!(docs.docs, [vec!["the", "cat", "the", "cat"], vec![], vec!["dog"]]);
    let ls = sense::LabelSet::load(&labels, &g).unwrap();
    assert_eq!(ls.universe, ["x", "y"]);

    let missing = Graph::load_edge_list(dir.path().join("nope.tsv"), true).unwrap_err();
    assert_eq!(missing.code(), "E_IO");
}
