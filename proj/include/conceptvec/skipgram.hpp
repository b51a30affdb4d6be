#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "conceptvec/common.hpp"
#include "conceptvec/corpus.hpp"

namespace cvec {

struct TrainingPair {
    ConceptId input;
    ConceptId output;

    bool operator==(const TrainingPair&) const = default;
};

/// All ordered pairs of distinct concepts within each problem's concept set,
/// problem by problem, in ascending (input, output) order.
std::vector<TrainingPair> make_pairs(const Corpus& corpus);
std::vector<TrainingPair> make_pairs(std::span<const std::vector<ConceptId>> concept_sets);

struct TrainConfig {
    std::size_t dim = 10;
    double learning_rate = 0.05;      // decays linearly to min_learning_rate
    double min_learning_rate = 1e-4;
    std::size_t epochs = 200;
    std::uint64_t seed = 0;
    std::optional<double> init_scale;  // default 0.5 / dim

    double resolved_init_scale() const { return init_scale ? *init_scale : 0.5 / static_cast<double>(dim); }
    void validate() const;
};

/// Numerically stable softmax of a column vector.
template <typename Derived>
VectorX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
    using Scalar = typename Derived::Scalar;
    const Scalar peak = logits.maxCoeff();
    VectorX<Scalar> e = (logits.array() - peak).exp().matrix();
    return e / e.sum();
}

/// One-hidden-layer skip-gram network with a full softmax output.
/// Row c of the input weights is the embedding of concept c.
class SkipGramModel {
public:
    SkipGramModel(Matrix input_weights, Matrix output_weights, TrainConfig config = {});

    /// Input weights uniform in [-init_scale, init_scale]; output weights zero.
    static SkipGramModel initialize(std::size_t n_concepts, const TrainConfig& config);

    std::size_t num_concepts() const { return static_cast<std::size_t>(w_in_.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(w_in_.cols()); }
    const Matrix& input_weights() const { return w_in_; }    // N x d
    const Matrix& output_weights() const { return w_out_; }  // d x N
    const TrainConfig& config() const { return config_; }

    /// softmax(W_out^T W_in[c]).
    Vector forward(ConceptId c) const;
    Vector concept_vector(ConceptId c) const;

    /// -log forward(input)[output]
    double loss(const TrainingPair& pair) const;
    double mean_loss(std::span<const TrainingPair> pairs) const;

    bool operator==(const SkipGramModel& other) const;

private:
    void check_concept(ConceptId c) const;

    Matrix w_in_;
    Matrix w_out_;
    TrainConfig config_;
};

/// Dense gradients of the single-pair cross-entropy loss.
struct SkipGramGradients {
    Matrix input;   // N x d, only row pair.input nonzero
    Matrix output;  // d x N
};

SkipGramGradients loss_gradient(const SkipGramModel& model, const TrainingPair& pair);

struct TrainingTrace {
    double initial_loss = 0;
    std::vector<double> epoch_losses;  // full-pass mean loss after each epoch
};

/// Plain SGD over the pair list, reshuffled every epoch from config.seed.
SkipGramModel train(std::span<const TrainingPair> pairs, std::size_t n_concepts, const TrainConfig& config,
                    TrainingTrace* trace = nullptr);

/// k nearest concepts to c by cosine of their vectors, c excluded; ties go
/// to the smaller index.
std::vector<std::pair<ConceptId, double>> nearest_concepts(const SkipGramModel& model, ConceptId c, std::size_t k);

void save_model(const SkipGramModel& model, const std::filesystem::path& path);
SkipGramModel load_model(const std::filesystem::path& path);
/// `name<TAB>v1<TAB>...<TAB>vd` per concept.
void export_concept_vectors(const SkipGramModel& model, const ConceptDictionary& dictionary,
                            const std::filesystem::path& path);

}  // namespace cvec
