use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::text::tokenize;
use super::{ClusterAssignment, ClusterError, ClusterMethod, ClusterParams};
use crate::graph::PolicyGraph;
use crate::points::{seeded_rng, streams};

/// One token list per node: the node label plus the text of every incident
/// edge (a self-loop's text counts once).
pub fn node_documents(g: &PolicyGraph) -> Vec<Vec<String>> {
    let mut docs: Vec<Vec<String>> = g.nodes().iter().map(|n| tokenize(&n.label)).collect();
    for (edge, (s, t)) in g.edges().iter().zip(g.edge_indices()) {
        let tokens = tokenize(&edge.text);
        docs[s].extend(tokens.iter().cloned());
        if t != s {
            docs[t].extend(tokens);
        }
    }
    docs
}

/// Collapsed Gibbs sampler state for LDA with symmetric priors.
#[derive(Debug, Clone)]
pub struct LdaModel {
    docs: Vec<Vec<usize>>,
    vocab: Vec<String>,
    n_topics: usize,
    alpha: f64,
    beta: f64,
    z: Vec<Vec<usize>>,
    doc_topic: Vec<Vec<usize>>,
    topic_word: Vec<Vec<usize>>,
    topic_total: Vec<usize>,
    rng: ChaCha8Rng,
}

impl LdaModel {
    /// Builds the vocabulary (sorted) and draws uniform initial topics.
    pub fn new(docs: &[Vec<String>], n_topics: usize, alpha: f64, beta: f64, seed: u64) -> Result<Self, ClusterError> {
        if n_topics == 0 {
            return Err(ClusterError::InvalidParams("n_topics must be >= 1".into()));
        }
        let vocab: Vec<String> =
            docs.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        if vocab.is_empty() {
            return Err(ClusterError::EmptyVocabulary);
        }
        let word_ids: Vec<Vec<usize>> = docs
            .iter()
            .map(|d| d.iter().map(|w| vocab.binary_search(w).expect("word in vocab")).collect())
            .collect();
        let mut rng = seeded_rng(seed, streams::LDA);
        let v = vocab.len();
        let mut doc_topic = vec![vec![0; n_topics]; docs.len()];
        let mut topic_word = vec![vec![0; v]; n_topics];
        let mut topic_total = vec![0; n_topics];
        let z: Vec<Vec<usize>> = word_ids
            .iter()
            .enumerate()
            .map(|(d, words)| {
                words
                    .iter()
                    .map(|&w| {
                        let t = rng.random_range(0..n_topics);
                        doc_topic[d][t] += 1;
                        topic_word[t][w] += 1;
                        topic_total[t] += 1;
                        t
                    })
                    .collect()
            })
            .collect();
        Ok(Self { docs: word_ids, vocab, n_topics, alpha, beta, z, doc_topic, topic_word, topic_total, rng })
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn topics(&self) -> &[Vec<usize>] {
        &self.z
    }

    /// Resamples every token once from
    /// `p(t) ∝ (n_dt + α)(n_tw + β) / (n_t + Vβ)` with its own count removed.
    pub fn sweep(&mut self) {
        let v_beta = self.vocab.len() as f64 * self.beta;
        let mut p = vec![0.0; self.n_topics];
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.z[d][i];
                self.doc_topic[d][old] -= 1;
                self.topic_word[old][w] -= 1;
                self.topic_total[old] -= 1;
                let mut total = 0.0;
                for (t, slot) in p.iter_mut().enumerate() {
                    *slot = (self.doc_topic[d][t] as f64 + self.alpha) * (self.topic_word[t][w] as f64 + self.beta)
                        / (self.topic_total[t] as f64 + v_beta);
                    total += *slot;
                }
                let target = self.rng.random::<f64>() * total;
                let mut cum = 0.0;
                let mut new = self.n_topics - 1;
                for (t, &pt) in p.iter().enumerate() {
                    cum += pt;
                    if target < cum {
                        new = t;
                        break;
                    }
                }
                self.z[d][i] = new;
                self.doc_topic[d][new] += 1;
                self.topic_word[new][w] += 1;
                self.topic_total[new] += 1;
            }
        }
    }

    /// Count tables agree with the current topic assignments.
    pub fn counts_consistent(&self) -> bool {
        let mut dt = vec![vec![0; self.n_topics]; self.docs.len()];
        let mut tw = vec![vec![0; self.vocab.len()]; self.n_topics];
        let mut tt = vec![0; self.n_topics];
        for (d, (words, topics)) in self.docs.iter().zip(&self.z).enumerate() {
            for (&w, &t) in words.iter().zip(topics) {
                dt[d][t] += 1;
                tw[t][w] += 1;
                tt[t] += 1;
            }
        }
        dt == self.doc_topic && tw == self.topic_word && tt == self.topic_total
    }

    /// `θ_dt = (n_dt + α) / (n_d + Tα)`.
    pub fn doc_topic_distribution(&self) -> Vec<Vec<f64>> {
        let t_alpha = self.n_topics as f64 * self.alpha;
        self.doc_topic
            .iter()
            .map(|row| {
                let n_d: usize = row.iter().sum();
                row.iter().map(|&c| (c as f64 + self.alpha) / (n_d as f64 + t_alpha)).collect()
            })
            .collect()
    }

    /// `φ_tw = (n_tw + β) / (n_t + Vβ)`.
    pub fn topic_word_distribution(&self) -> Vec<Vec<f64>> {
        let v_beta = self.vocab.len() as f64 * self.beta;
        self.topic_word
            .iter()
            .zip(&self.topic_total)
            .map(|(row, &n_t)| row.iter().map(|&c| (c as f64 + self.beta) / (n_t as f64 + v_beta)).collect())
            .collect()
    }

    /// Dominant topic per document (lowest index on ties); empty documents
    /// get −1.
    pub fn dominant_topics(&self) -> Vec<i64> {
        self.doc_topic_distribution()
            .iter()
            .zip(&self.docs)
            .map(|(theta, words)| {
                if words.is_empty() {
                    return -1;
                }
                let mut best = 0;
                for (t, &v) in theta.iter().enumerate() {
                    if v > theta[best] {
                        best = t;
                    }
                }
                best as i64
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct LdaOutput {
    pub assignment: ClusterAssignment,
    pub doc_topic: Vec<Vec<f64>>,
    pub topic_word: Vec<Vec<f64>>,
    pub vocab: Vec<String>,
}

/// Runs `gibbs_iters` sweeps and labels each document by its dominant topic.
pub fn lda_cluster(docs: &[Vec<String>], p: &ClusterParams) -> Result<LdaOutput, ClusterError> {
    p.validate()?;
    let mut model = LdaModel::new(docs, p.n_topics, p.alpha, p.beta, p.seed)?;
    for _ in 0..p.gibbs_iters {
        model.sweep();
    }
    let labels = model.dominant_topics();
    Ok(LdaOutput {
        assignment: ClusterAssignment::new(&labels, ClusterMethod::Lda, p.clone()),
        doc_topic: model.doc_topic_distribution(),
        topic_word: model.topic_word_distribution(),
        vocab: model.vocab,
    })
}
