#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "conceptvec/baselines.hpp"
#include "conceptvec/common.hpp"
#include "conceptvec/corpus.hpp"

namespace cvec {

/// Token -> embedding row, tokens sorted.
class Vocabulary {
public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::string> tokens);

    /// Every corpus token, or only those kept by `selection`.
    static Vocabulary from_corpus(const Corpus& corpus, const WordSelection* selection = nullptr);

    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }
    std::optional<std::size_t> find(const std::string& token) const;

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Embedding-row ids of a problem's kept tokens, duplicates kept.
using EncodedProblem = std::vector<std::size_t>;

EncodedProblem encode(const Problem& problem, const Vocabulary& vocabulary, const WordSelection* selection = nullptr);

struct LayerSizes {
    std::size_t embedding_dim = 300;
    std::size_t hidden1 = 60;
    std::size_t hidden2 = 60;
};

/// Embedding layer (mean-pooled over the problem's tokens), two sigmoid
/// hidden layers and one sigmoid output unit.
struct MlpClassifier {
    RowMajorMatrix embedding;  // V x dim_w
    Matrix w1;                 // h1 x dim_w
    Vector b1;
    Matrix w2;                 // h2 x h1
    Vector b2;
    Vector w3;                 // h2
    double b3 = 0;

    /// Embedding rows come from `pretrained` where it has the token, else
    /// uniform in [-1, 1]. Dense layers use uniform +-1/sqrt(fan_in), zero bias.
    static MlpClassifier initialize(const Vocabulary& vocabulary, const LayerSizes& sizes, std::uint64_t seed,
                                    const WordVectorTable* pretrained = nullptr);

    void validate() const;
    std::size_t vocabulary_size() const { return static_cast<std::size_t>(embedding.rows()); }
};

struct PooledInput {
    Vector x;
    bool empty = false;  // no kept tokens; x is zero
};

/// Mean of the embedding rows of the kept tokens.
PooledInput problem_to_input(const MlpClassifier& model, const EncodedProblem& rows);

/// Output unit in the open interval (0, 1).
double predict(const MlpClassifier& model, const EncodedProblem& rows);

/// Binary cross-entropy, computed from the output logit.
double loss(const MlpClassifier& model, const EncodedProblem& rows, double label);

struct MlpGradients {
    RowMajorMatrix embedding;  // dense, V x dim_w
    Matrix w1;
    Vector b1;
    Matrix w2;
    Vector b2;
    Vector w3;
    double b3 = 0;
};

MlpGradients loss_gradient(const MlpClassifier& model, const EncodedProblem& rows, double label);

struct PhaseConfig {
    std::size_t epochs = 0;
    double learning_rate = 0.05;
};

inline constexpr PhaseConfig kDefaultPretrainPhase{50, 0.05};
inline constexpr PhaseConfig kDefaultFinetunePhase{200, 0.05};

struct LabeledProblem {
    EncodedProblem rows;
    double label = 0;
};

/// Seeded per-sample SGD, reshuffling each epoch.
MlpClassifier train_phase(MlpClassifier model, std::span<const LabeledProblem> samples, const PhaseConfig& phase,
                          std::uint64_t seed);

/// Phase on negatives only (all targets 0).
MlpClassifier pretrain_negative(MlpClassifier model, std::span<const EncodedProblem> negatives,
                                const PhaseConfig& phase, std::uint64_t seed);

struct ConceptBag {
    std::vector<EncodedProblem> positives;
    std::vector<EncodedProblem> negatives;  // same size as positives
};

/// Phase on the union of balanced bags of other concepts.
MlpClassifier pretrain_oneshot(MlpClassifier model, std::span<const ConceptBag> bags, const PhaseConfig& phase,
                               std::uint64_t seed);

/// Phase on a balanced positive/negative mixture. Sizes must match.
MlpClassifier train_balanced(MlpClassifier model, std::span<const EncodedProblem> positives,
                             std::span<const EncodedProblem> negatives, const PhaseConfig& phase, std::uint64_t seed);

struct FnFp {
    std::optional<double> fn;  // missed positives / positives
    std::optional<double> fp;  // false alarms / negatives
};

/// A score at or above threshold is a positive prediction.
FnFp fnfp_from_scores(std::span<const double> scores, std::span<const bool> labels, double threshold = 0.5);

FnFp evaluate_fnfp(const MlpClassifier& model, std::span<const EncodedProblem> positives,
                   std::span<const EncodedProblem> negatives, double threshold = 0.5);

enum class Pretraining { none, negative, one_shot, one_shot_then_negative };

std::string_view to_string(Pretraining p);
Pretraining pretraining_from_string(std::string_view s);

struct Regime {
    std::string name;
    Pretraining pretraining = Pretraining::none;
    bool word_selection = false;
    PhaseConfig pretrain = kDefaultPretrainPhase;
    PhaseConfig finetune = kDefaultFinetunePhase;
};

/// The eight training regimes compared in the FN/FP table, in table order.
const std::vector<Regime>& regime_presets();
const Regime& regime_preset(std::string_view name);

/// JSON list of {name, pretraining, word_selection, pretrain{epochs, lr},
/// finetune{epochs, lr}}; a bare string names a preset.
std::vector<Regime> load_regimes(const std::filesystem::path& path);
nlohmann::json to_json(const Regime& regime);

struct BenchConfig {
    LayerSizes layers;
    std::size_t rounds = 100;
    double test_fraction = 0.25;
    double threshold = 0.5;
    std::uint64_t seed = 0;
    const WordSelection* selection = nullptr;      // required by word-selection regimes
    const WordVectorTable* pretrained = nullptr;   // optional embedding init
};

struct FnFpResult {
    double fn_ratio = 0;  // mean over rounds with a defined value
    double fp_ratio = 0;
    std::size_t rounds = 0;
    std::vector<FnFp> per_round;
};

/// Train-and-test rounds for one concept. Round r draws its test split,
/// balanced negatives and initialization from (seed, r) alone, so every
/// regime sees the same splits.
FnFpResult run_rounds(const Corpus& corpus, ConceptId concept_id, const Regime& regime, const BenchConfig& config);

struct RegimeRow {
    Regime regime;
    std::vector<FnFpResult> per_concept;
};

std::vector<RegimeRow> regime_comparison(const Corpus& corpus, std::span<const ConceptId> concepts,
                                         std::span<const Regime> regimes, const BenchConfig& config);

/// Regimes as row pairs (FN, FP), concepts as columns, percentages.
std::string render_regime_table(const Corpus& corpus, std::span<const ConceptId> concepts,
                                std::span<const RegimeRow> rows);
nlohmann::json to_json(const Corpus& corpus, std::span<const ConceptId> concepts, std::span<const RegimeRow> rows);

}  // namespace cvec
