#pragma once

#include <optional>
#include <span>
#include <vector>

#include "conceptvec/baselines.hpp"
#include "conceptvec/compose.hpp"
#include "conceptvec/corpus.hpp"
#include "conceptvec/skipgram.hpp"
#include "conceptvec/triplet.hpp"

namespace cvec {

/// Everything any method may need. Pointers are borrowed.
struct MethodOptions {
    TrainConfig skipgram;                          // prob2vec, when no model is given
    const SkipGramModel* model = nullptr;          // prob2vec
    const WordVectorTable* word_vectors = nullptr; // word averages and SIF
    const WordSelection* selection = nullptr;      // word averages and SIF
    double sif_a = kSifDefaultA;
    std::optional<std::size_t> svd_dim;            // default min(10, N)
    double k_shift = 5.0;
};

/// Skip-gram concept vectors trained on the corpus' co-occurrence pairs.
SkipGramModel train_concept_model(const Corpus& corpus, const TrainConfig& config, TrainingTrace* trace = nullptr);

CorpusEmbedding build_embedding(Method method, const Corpus& corpus, const MethodOptions& options);

/// Builds and scores each method on the same triplets. A method that fails
/// to build or to cover every triplet gets a row with an error message.
std::vector<MethodAccuracy> compare_methods(const Corpus& corpus, std::span<const Triplet> triplets,
                                            std::span<const Method> methods, const MethodOptions& options);

}  // namespace cvec
