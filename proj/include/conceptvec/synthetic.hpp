#pragma once

#include <cstdint>
#include <vector>

#include "conceptvec/corpus.hpp"

namespace cvec {

/// Planted-cluster layout for the desk-scale corpus.
struct ClusterSpec {
    std::vector<std::size_t> sizes;  // concepts per cluster; must sum to n_concepts
    std::size_t max_concepts_per_problem = 3;
    std::size_t min_words = 8;
    std::size_t max_words = 16;
    std::size_t vocabulary_size = 48;  // filler words, independent of concepts
    std::size_t n_triplets = 50;

    /// k clusters of as-equal-as-possible size.
    static ClusterSpec even(std::size_t n_concepts, std::size_t k);
};

struct SyntheticCorpus {
    Corpus corpus;                    // planted concept sets attached
    std::vector<ConceptRule> rules;   // recover the planted sets exactly from raw text
    std::vector<Triplet> triplets;    // |C_A & C_B| > |C_A & C_C| for every triplet
    std::vector<std::size_t> cluster_of;  // concept -> cluster
    WordSelection selection;          // a fixed half of the filler vocabulary
};

/// Every problem draws 1..max_concepts_per_problem concepts from a single
/// cluster. Concept footprints are punctuation-only markup (e.g. "[!?]"), so
/// the tokenizer sees none of them and word overlap carries no concept
/// signal. Triplets pair A with a B sharing a concept and a C from another
/// cluster (or, with a single cluster, any C of strictly smaller overlap).
SyntheticCorpus generate_synthetic_corpus(std::size_t n_concepts, std::size_t n_problems,
                                          const ClusterSpec& spec, std::uint64_t seed);

/// Imbalanced single-concept task: a "target" concept marked by signal
/// words, plus topic concepts whose words appear on both sides of the
/// target label, buried in label-free noise words.
struct ImbalancedSpec {
    std::size_t positives = 12;
    std::size_t negatives = 600;
    std::size_t signal_vocabulary = 6;
    std::size_t topics = 8;
    std::size_t topic_vocabulary = 6;
    std::size_t noise_vocabulary = 300;
    std::size_t subject_words_per_problem = 3;
    std::size_t min_noise_words = 10;
    std::size_t max_noise_words = 20;
};

struct ImbalancedBenchmark {
    Corpus corpus;             // concept 0 is "target"
    WordSelection selection;   // signal and topic words
    ConceptId target = 0;
};

ImbalancedBenchmark generate_imbalanced_benchmark(const ImbalancedSpec& spec, std::uint64_t seed);

}  // namespace cvec
