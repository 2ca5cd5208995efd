//! Synthetic graphs and corpora with planted community structure.

use rand::Rng;

use crate::graph::{Graph, LabelSet, NodeDocs};
use crate::rng::derived;

/// Undirected planted-partition graph parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedPartition {
    pub communities: usize,
    pub community_size: usize,
    /// Link probability inside a community.
    pub p_in: f64,
    /// Link probability across communities.
    pub p_out: f64,
    pub seed: u64,
}

impl PlantedPartition {
    pub fn node_count(&self) -> usize {
        self.communities * self.community_size
    }

    pub fn community_of(&self, node: usize) -> usize {
        node / self.community_size
    }

    /// Samples the graph. Nodes left without links get one link into their own community.
    pub fn generate(&self) -> Graph {
        let n = self.node_count();
        let mut rng = derived(self.seed, &[30]);
        let mut arcs = Vec::new();
        let mut degree = vec![0usize; n];
        for u in 0..n {
            for v in u + 1..n {
                let p = if self.community_of(u) == self.community_of(v) {
                    self.p_in
                } else {
                    self.p_out
                };
                if rng.random::<f64>() < p {
                    arcs.push((u, v));
                    arcs.push((v, u));
                    degree[u] += 1;
                    degree[v] += 1;
                }
            }
        }
        for u in 0..n {
            if degree[u] == 0 && self.community_size > 1 {
                let base = self.community_of(u) * self.community_size;
                let mut v = base + rng.random_range(0..self.community_size);
                while v == u {
                    v = base + rng.random_range(0..self.community_size);
                }
                arcs.push((u, v));
                arcs.push((v, u));
                degree[u] += 1;
                degree[v] += 1;
            }
        }
        let ids = (0..n).map(|i| format!("n{i}")).collect();
        Graph::from_arcs(ids, arcs).expect("generated arcs are in range")
    }

    /// One label per node: its community.
    pub fn labels(&self) -> LabelSet {
        let names: Vec<Vec<String>> = (0..self.node_count())
            .map(|v| vec![format!("community{}", self.community_of(v))])
            .collect();
        LabelSet::from_names(&names)
    }
}

/// Graph, documents and community labels of a joint text+graph fixture.
#[derive(Debug, Clone)]
pub struct JointFixture {
    pub graph: Graph,
    pub docs: NodeDocs,
    pub labels: LabelSet,
    pub partition: PlantedPartition,
}

/// Planted-partition graph whose nodes describe themselves with words from a
/// community-specific vocabulary mixed with words shared by everyone.
///
/// `topic_share` is the fraction of each document drawn from the community's
/// own words.
pub fn joint_fixture(partition: PlantedPartition, words_per_doc: usize, topic_share: f64) -> JointFixture {
    const TOPIC_WORDS: usize = 40;
    const SHARED_WORDS: usize = 60;
    let graph = partition.generate();
    let mut rng = derived(partition.seed, &[31]);
    let docs = (0..partition.node_count())
        .map(|v| {
            let c = partition.community_of(v);
            (0..words_per_doc)
                .map(|_| {
                    if rng.random::<f64>() < topic_share {
                        format!("topic{c}word{}", rng.random_range(0..TOPIC_WORDS))
                    } else {
                        format!("common{}", rng.random_range(0..SHARED_WORDS))
                    }
                })
                .collect()
        })
        .collect();
    JointFixture {
        graph,
        docs: NodeDocs { docs, char_limit: None },
        labels: partition.labels(),
        partition,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_partition_shape() {
        let p = PlantedPartition {
            communities: 4,
            community_size: 25,
            p_in: 0.3,
            p_out: 0.01,
            seed: 3,
        };
        let g = p.generate();
        assert_eq!(g.node_count(), 100);
        assert!(g.is_symmetric());
        assert!((0..100).all(|v| !g.out_neighbors(v).is_empty()));
        let (mut inside, mut across) = (0, 0);
        for &(u, v) in g.arcs() {
            if p.community_of(u) == p.community_of(v) {
                inside += 1;
            } else {
                across += 1;
            }
        }
        assert!(inside > 5 * across);
        assert_eq!(p.generate(), g);
    }

    #[test]
    fn joint_fixture_docs_follow_communities() {
        let p = PlantedPartition {
            communities: 2,
            community_size: 10,
            p_in: 0.5,
            p_out: 0.02,
            seed: 1,
        };
        let f = joint_fixture(p, 30, 1.0);
        assert_eq!(f.docs.len(), 20);
        assert!(f.docs.docs[0].iter().all(|w| w.starts_with("topic0")));
        assert!(f.docs.docs[15].iter().all(|w| w.starts_with("topic1")));
        assert_eq!(f.labels.universe, ["community0", "community1"]);
    }
}
