#include "conceptvec/imbalanced.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include "conceptvec/rng.hpp"

namespace cvec {

using nlohmann::json;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Vector sigmoid(const Vector& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

struct Forward {
    Vector x;
    Vector a1;
    Vector a2;
    double logit = 0;
};

Forward run_forward(const MlpClassifier& m, const EncodedProblem& rows) {
    Forward f;
    f.x = problem_to_input(m, rows).x;
    f.a1 = sigmoid(m.w1 * f.x + m.b1);
    f.a2 = sigmoid(m.w2 * f.a1 + m.b2);
    f.logit = m.w3.dot(f.a2) + m.b3;
    return f;
}

// Back-propagated error terms for the output, both hidden layers and the pooled input.
struct Backward {
    double dlogit;
    Vector dz2;
    Vector dz1;
    Vector dx;
};

Backward run_backward(const MlpClassifier& m, const Forward& f, double label) {
    Backward b;
    b.dlogit = sigmoid(f.logit) - label;
    b.dz2 = (b.dlogit * m.w3).cwiseProduct(f.a2.cwiseProduct(Vector::Ones(f.a2.size()) - f.a2));
    b.dz1 = (m.w2.transpose() * b.dz2).cwiseProduct(f.a1.cwiseProduct(Vector::Ones(f.a1.size()) - f.a1));
    b.dx = m.w1.transpose() * b.dz1;
    return b;
}

void sgd_step(MlpClassifier& m, const EncodedProblem& rows, double label, double lr) {
    const Forward f = run_forward(m, rows);
    const Backward b = run_backward(m, f, label);
    m.w3 -= lr * b.dlogit * f.a2;
    m.b3 -= lr * b.dlogit;
    m.w2.noalias() -= lr * b.dz2 * f.a1.transpose();
    m.b2 -= lr * b.dz2;
    m.w1.noalias() -= lr * b.dz1 * f.x.transpose();
    m.b1 -= lr * b.dz1;
    if (!rows.empty()) {
        const Vector step = (lr / static_cast<double>(rows.size())) * b.dx;
        for (std::size_t r : rows) m.embedding.row(static_cast<Eigen::Index>(r)) -= step.transpose();
    }
}

void check_rows(const MlpClassifier& m, const EncodedProblem& rows) {
    for (std::size_t r : rows) {
        if (r >= m.vocabulary_size()) throw Error("embedding row " + std::to_string(r) + " out of range");
    }
}

std::string percent(std::optional<double> v) {
    if (!v) return "n/a";
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << 100.0 * *v << "%";
    return out.str();
}

PhaseConfig phase_from_json(const json& j, PhaseConfig fallback) {
    if (j.contains("epochs")) fallback.epochs = j.at("epochs").get<std::size_t>();
    if (j.contains("lr")) fallback.learning_rate = j.at("lr").get<double>();
    return fallback;
}

}  // namespace

// ---------------------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    std::sort(tokens_.begin(), tokens_.end());
    tokens_.erase(std::unique(tokens_.begin(), tokens_.end()), tokens_.end());
    for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], i);
}

Vocabulary Vocabulary::from_corpus(const Corpus& corpus, const WordSelection* selection) {
    std::vector<std::string> tokens;
    for (const auto& [w, _] : corpus.word_freq()) {
        if (!selection || selection->contains(w)) tokens.push_back(w);
    }
    return Vocabulary(std::move(tokens));
}

std::optional<std::size_t> Vocabulary::find(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

EncodedProblem encode(const Problem& problem, const Vocabulary& vocabulary, const WordSelection* selection) {
    EncodedProblem rows;
    for (const auto& w : problem.words) {
        if (selection && !selection->contains(w)) continue;
        if (auto r = vocabulary.find(w)) rows.push_back(*r);
    }
    return rows;
}

// ---------------------------------------------------------------------------

MlpClassifier MlpClassifier::initialize(const Vocabulary& vocabulary, const LayerSizes& sizes, std::uint64_t seed,
                                        const WordVectorTable* pretrained) {
    if (sizes.embedding_dim == 0 || sizes.hidden1 == 0 || sizes.hidden2 == 0) throw Error("layer sizes must be positive");
    if (pretrained && pretrained->dim() != sizes.embedding_dim) {
        throw Error("pretrained word vectors have dimension " + std::to_string(pretrained->dim()) +
                    ", classifier expects " + std::to_string(sizes.embedding_dim));
    }
    Rng rng(seed);
    const auto v = static_cast<Eigen::Index>(vocabulary.size());
    const auto d = static_cast<Eigen::Index>(sizes.embedding_dim);
    const auto h1 = static_cast<Eigen::Index>(sizes.hidden1);
    const auto h2 = static_cast<Eigen::Index>(sizes.hidden2);
    auto fill = [&](auto& m, double scale) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-scale, scale);
        }
    };

    MlpClassifier m;
    m.embedding.resize(v, d);
    fill(m.embedding, 1.0);
    if (pretrained) {
        for (Eigen::Index i = 0; i < v; ++i) {
            const auto& token = vocabulary.tokens()[static_cast<std::size_t>(i)];
            if (pretrained->contains(token)) m.embedding.row(i) = pretrained->entries().at(token).transpose();
        }
    }
    m.w1.resize(h1, d);
    fill(m.w1, 1.0 / std::sqrt(static_cast<double>(d)));
    m.b1 = Vector::Zero(h1);
    m.w2.resize(h2, h1);
    fill(m.w2, 1.0 / std::sqrt(static_cast<double>(h1)));
    m.b2 = Vector::Zero(h2);
    m.w3.resize(h2);
    {
        const double scale = 1.0 / std::sqrt(static_cast<double>(h2));
        for (Eigen::Index i = 0; i < h2; ++i) m.w3[i] = rng.uniform(-scale, scale);
    }
    m.b3 = 0;
    return m;
}

void MlpClassifier::validate() const {
    const auto d = embedding.cols();
    if (w1.cols() != d || b1.size() != w1.rows() || w2.cols() != w1.rows() || b2.size() != w2.rows() ||
        w3.size() != w2.rows()) {
        throw Error("classifier layer shapes are inconsistent");
    }
    if (!embedding.allFinite() || !w1.allFinite() || !b1.allFinite() || !w2.allFinite() || !b2.allFinite() ||
        !w3.allFinite() || !std::isfinite(b3)) {
        throw Error("classifier has non-finite weights");
    }
}

PooledInput problem_to_input(const MlpClassifier& model, const EncodedProblem& rows) {
    check_rows(model, rows);
    PooledInput in{Vector::Zero(model.embedding.cols()), rows.empty()};
    for (std::size_t r : rows) in.x += model.embedding.row(static_cast<Eigen::Index>(r)).transpose();
    if (!rows.empty()) in.x /= static_cast<double>(rows.size());
    return in;
}

double predict(const MlpClassifier& model, const EncodedProblem& rows) {
    const double y = sigmoid(run_forward(model, rows).logit);
    return std::clamp(y, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

double loss(const MlpClassifier& model, const EncodedProblem& rows, double label) {
    const double z = run_forward(model, rows).logit;
    return softplus(z) - label * z;
}

MlpGradients loss_gradient(const MlpClassifier& model, const EncodedProblem& rows, double label) {
    const Forward f = run_forward(model, rows);
    const Backward b = run_backward(model, f, label);
    MlpGradients g;
    g.w3 = b.dlogit * f.a2;
    g.b3 = b.dlogit;
    g.w2 = b.dz2 * f.a1.transpose();
    g.b2 = b.dz2;
    g.w1 = b.dz1 * f.x.transpose();
    g.b1 = b.dz1;
    g.embedding = RowMajorMatrix::Zero(model.embedding.rows(), model.embedding.cols());
    for (std::size_t r : rows) {
        g.embedding.row(static_cast<Eigen::Index>(r)) += b.dx.transpose() / static_cast<double>(rows.size());
    }
    return g;
}

// ---------------------------------------------------------------------------

MlpClassifier train_phase(MlpClassifier model, std::span<const LabeledProblem> samples, const PhaseConfig& phase,
                          std::uint64_t seed) {
    if (!(phase.learning_rate > 0)) throw Error("learning rate must be positive");
    for (const auto& s : samples) check_rows(model, s.rows);
    Rng rng(seed);
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t epoch = 0; epoch < phase.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t i : order) sgd_step(model, samples[i].rows, samples[i].label, phase.learning_rate);
    }
    return model;
}

MlpClassifier pretrain_negative(MlpClassifier model, std::span<const EncodedProblem> negatives,
                                const PhaseConfig& phase, std::uint64_t seed) {
    if (negatives.empty()) throw Error("negative pre-training needs at least one negative");
    std::vector<LabeledProblem> samples;
    samples.reserve(negatives.size());
    for (const auto& n : negatives) samples.push_back({n, 0.0});
    return train_phase(std::move(model), samples, phase, seed);
}

MlpClassifier pretrain_oneshot(MlpClassifier model, std::span<const ConceptBag> bags, const PhaseConfig& phase,
                               std::uint64_t seed) {
    std::vector<LabeledProblem> samples;
    for (const auto& bag : bags) {
        if (bag.positives.size() != bag.negatives.size()) throw Error("one-shot bags must be balanced");
        for (const auto& p : bag.positives) samples.push_back({p, 1.0});
        for (const auto& n : bag.negatives) samples.push_back({n, 0.0});
    }
    if (samples.empty()) throw Error("one-shot pre-training needs at least one nonempty bag");
    return train_phase(std::move(model), samples, phase, seed);
}

MlpClassifier train_balanced(MlpClassifier model, std::span<const EncodedProblem> positives,
                             std::span<const EncodedProblem> negatives, const PhaseConfig& phase, std::uint64_t seed) {
    if (positives.size() != negatives.size()) {
        throw Error("balanced training needs equal counts, got " + std::to_string(positives.size()) + " positives and " +
                    std::to_string(negatives.size()) + " negatives");
    }
    std::vector<LabeledProblem> samples;
    for (const auto& p : positives) samples.push_back({p, 1.0});
    for (const auto& n : negatives) samples.push_back({n, 0.0});
    return train_phase(std::move(model), samples, phase, seed);
}

FnFp fnfp_from_scores(std::span<const double> scores, std::span<const bool> labels, double threshold) {
    if (scores.size() != labels.size()) throw Error("scores and labels differ in length");
    std::size_t pos = 0, neg = 0, missed = 0, alarms = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        if (labels[i]) {
            ++pos;
            missed += predicted ? 0 : 1;
        } else {
            ++neg;
            alarms += predicted ? 1 : 0;
        }
    }
    FnFp out;
    if (pos > 0) out.fn = static_cast<double>(missed) / static_cast<double>(pos);
    if (neg > 0) out.fp = static_cast<double>(alarms) / static_cast<double>(neg);
    return out;
}

FnFp evaluate_fnfp(const MlpClassifier& model, std::span<const EncodedProblem> positives,
                   std::span<const EncodedProblem> negatives, double threshold) {
    const std::size_t n = positives.size() + negatives.size();
    std::vector<double> scores;
    scores.reserve(n);
    auto labels = std::make_unique<bool[]>(n);
    for (const auto& p : positives) {
        labels[scores.size()] = true;
        scores.push_back(predict(model, p));
    }
    for (const auto& q : negatives) {
        labels[scores.size()] = false;
        scores.push_back(predict(model, q));
    }
    return fnfp_from_scores(scores, std::span<const bool>(labels.get(), n), threshold);
}

// ---------------------------------------------------------------------------

std::string_view to_string(Pretraining p) {
    switch (p) {
        case Pretraining::none: return "none";
        case Pretraining::negative: return "negative";
        case Pretraining::one_shot: return "one_shot";
        case Pretraining::one_shot_then_negative: return "one_shot_then_negative";
    }
    return "none";
}

Pretraining pretraining_from_string(std::string_view s) {
    for (auto p : {Pretraining::none, Pretraining::negative, Pretraining::one_shot, Pretraining::one_shot_then_negative}) {
        if (to_string(p) == s) return p;
    }
    throw Error("unknown pretraining: " + std::string(s));
}

const std::vector<Regime>& regime_presets() {
    static const std::vector<Regime> presets = {
        {"down-sampling", Pretraining::none, false},
        {"down-sampling+word-selection", Pretraining::none, true},
        {"negative-pretraining", Pretraining::negative, false},
        {"one-shot", Pretraining::one_shot, false},
        {"word-selection+negative-pretraining", Pretraining::negative, true},
        {"word-selection+one-shot", Pretraining::one_shot, true},
        {"one-shot+negative-pretraining", Pretraining::one_shot_then_negative, false},
        {"word-selection+one-shot+negative-pretraining", Pretraining::one_shot_then_negative, true},
    };
    return presets;
}

const Regime& regime_preset(std::string_view name) {
    for (const auto& r : regime_presets()) {
        if (r.name == name) return r;
    }
    throw Error("unknown regime preset: " + std::string(name));
}

std::vector<Regime> load_regimes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<Regime> regimes;
    try {
        const json doc = json::parse(in);
        if (!doc.is_array()) throw Error("regime file must be a JSON array");
        for (const auto& entry : doc) {
            if (entry.is_string()) {
                regimes.push_back(regime_preset(entry.get<std::string>()));
                continue;
            }
            Regime r;
            if (entry.contains("preset")) r = regime_preset(entry.at("preset").get<std::string>());
            if (entry.contains("name")) r.name = entry.at("name").get<std::string>();
            if (entry.contains("pretraining")) r.pretraining = pretraining_from_string(entry.at("pretraining").get<std::string>());
            if (entry.contains("word_selection")) r.word_selection = entry.at("word_selection").get<bool>();
            if (entry.contains("pretrain")) r.pretrain = phase_from_json(entry.at("pretrain"), r.pretrain);
            if (entry.contains("finetune")) r.finetune = phase_from_json(entry.at("finetune"), r.finetune);
            if (r.name.empty()) throw Error("regime entry without a name");
            regimes.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return regimes;
}

json to_json(const Regime& regime) {
    return {{"name", regime.name},
            {"pretraining", std::string(to_string(regime.pretraining))},
            {"word_selection", regime.word_selection},
            {"pretrain", {{"epochs", regime.pretrain.epochs}, {"lr", regime.pretrain.learning_rate}}},
            {"finetune", {{"epochs", regime.finetune.epochs}, {"lr", regime.finetune.learning_rate}}}};
}

// ---------------------------------------------------------------------------

FnFpResult run_rounds(const Corpus& corpus, ConceptId concept_id, const Regime& regime, const BenchConfig& config) {
    if (concept_id >= corpus.num_concepts()) throw Error("concept index out of range: " + std::to_string(concept_id));
    if (config.rounds == 0) throw Error("rounds must be positive");
    if (!(config.test_fraction > 0 && config.test_fraction < 1)) throw Error("test fraction must lie in (0, 1)");
    if (regime.word_selection && !config.selection) {
        throw Error("regime " + regime.name + " needs a word selection");
    }

    const WordSelection* selection = regime.word_selection ? config.selection : nullptr;
    const Vocabulary vocabulary = Vocabulary::from_corpus(corpus, selection);

    const auto& problems = corpus.problems();
    std::vector<EncodedProblem> encoded;
    encoded.reserve(problems.size());
    for (const auto& p : problems) encoded.push_back(encode(p, vocabulary, selection));

    auto has = [&](std::size_t i, ConceptId c) {
        return std::binary_search(problems[i].concepts.begin(), problems[i].concepts.end(), c);
    };
    std::vector<std::size_t> positives, negatives;
    for (std::size_t i = 0; i < problems.size(); ++i) (has(i, concept_id) ? positives : negatives).push_back(i);
    if (positives.size() < 2) {
        throw Error("concept " + corpus.dictionary().name(concept_id) + " has " + std::to_string(positives.size()) +
                    " positive(s); at least 2 are needed to split");
    }

    auto held_out = [&](std::size_t n) {
        auto k = static_cast<std::size_t>(std::llround(config.test_fraction * static_cast<double>(n)));
        return std::clamp<std::size_t>(k, 1, n - 1);
    };
    if (negatives.size() < 2) throw Error("concept " + corpus.dictionary().name(concept_id) + " has too few negatives");
    const std::size_t test_pos = held_out(positives.size());
    const std::size_t test_neg = held_out(negatives.size());
    const std::size_t train_pos = positives.size() - test_pos;
    if (negatives.size() - test_neg < train_pos) {
        throw Error("concept " + corpus.dictionary().name(concept_id) + ": not enough negatives to balance training");
    }

    FnFpResult result;
    double fn_sum = 0, fp_sum = 0;
    std::size_t fn_n = 0, fp_n = 0;
    for (std::size_t round = 0; round < config.rounds; ++round) {
        const std::uint64_t round_seed = mix_seed(config.seed, round);
        Rng split(round_seed);
        auto pos = positives;
        auto neg = negatives;
        split.shuffle(pos);
        split.shuffle(neg);

        auto gather = [&](const std::vector<std::size_t>& idx, std::size_t from, std::size_t to) {
            std::vector<EncodedProblem> out;
            for (std::size_t i = from; i < to; ++i) out.push_back(encoded[idx[i]]);
            return out;
        };
        const auto test_p = gather(pos, 0, test_pos);
        const auto test_n = gather(neg, 0, test_neg);
        const auto train_p = gather(pos, test_pos, pos.size());
        const auto balanced_n = gather(neg, test_neg, test_neg + train_pos);
        const auto surplus_n = gather(neg, test_neg + train_pos, neg.size());

        MlpClassifier model = MlpClassifier::initialize(vocabulary, config.layers, mix_seed(round_seed, 1), config.pretrained);

        if (regime.pretraining == Pretraining::one_shot || regime.pretraining == Pretraining::one_shot_then_negative) {
            std::vector<bool> in_test(problems.size(), false);
            for (std::size_t i = 0; i < test_pos; ++i) in_test[pos[i]] = true;
            for (std::size_t i = 0; i < test_neg; ++i) in_test[neg[i]] = true;
            Rng bag_rng(mix_seed(round_seed, 3));
            std::vector<ConceptBag> bags;
            for (ConceptId other = 0; other < corpus.num_concepts(); ++other) {
                if (other == concept_id) continue;
                std::vector<std::size_t> p_other, n_other;
                for (std::size_t i = 0; i < problems.size(); ++i) {
                    if (in_test[i]) continue;
                    (has(i, other) ? p_other : n_other).push_back(i);
                }
                if (p_other.empty() || n_other.size() < p_other.size()) continue;
                bag_rng.shuffle(n_other);
                ConceptBag bag;
                for (std::size_t i : p_other) bag.positives.push_back(encoded[i]);
                for (std::size_t i = 0; i < p_other.size(); ++i) bag.negatives.push_back(encoded[n_other[i]]);
                bags.push_back(std::move(bag));
            }
            if (bags.empty()) throw Error("one-shot regime found no other concept to pre-train on");
            model = pretrain_oneshot(std::move(model), bags, regime.pretrain, mix_seed(round_seed, 5));
        }
        if (regime.pretraining == Pretraining::negative || regime.pretraining == Pretraining::one_shot_then_negative) {
            if (surplus_n.empty()) throw Error("no surplus negatives left for negative pre-training");
            model = pretrain_negative(std::move(model), surplus_n, regime.pretrain, mix_seed(round_seed, 2));
        }
        model = train_balanced(std::move(model), train_p, balanced_n, regime.finetune, mix_seed(round_seed, 4));

        const FnFp r = evaluate_fnfp(model, test_p, test_n, config.threshold);
        if (r.fn) {
            fn_sum += *r.fn;
            ++fn_n;
        }
        if (r.fp) {
            fp_sum += *r.fp;
            ++fp_n;
        }
        result.per_round.push_back(r);
    }
    result.rounds = config.rounds;
    result.fn_ratio = fn_n ? fn_sum / static_cast<double>(fn_n) : std::numeric_limits<double>::quiet_NaN();
    result.fp_ratio = fp_n ? fp_sum / static_cast<double>(fp_n) : std::numeric_limits<double>::quiet_NaN();
    return result;
}

std::vector<RegimeRow> regime_comparison(const Corpus& corpus, std::span<const ConceptId> concepts,
                                         std::span<const Regime> regimes, const BenchConfig& config) {
    std::vector<RegimeRow> rows;
    for (const auto& regime : regimes) {
        RegimeRow row{regime, {}};
        for (ConceptId c : concepts) row.per_concept.push_back(run_rounds(corpus, c, regime, config));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string render_regime_table(const Corpus& corpus, std::span<const ConceptId> concepts,
                                std::span<const RegimeRow> rows) {
    std::size_t name_width = std::string("regime").size();
    for (const auto& r : rows) name_width = std::max(name_width, r.regime.name.size());
    std::vector<std::size_t> col_width;
    for (ConceptId c : concepts) col_width.push_back(std::max<std::size_t>(8, corpus.dictionary().name(c).size()));

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(name_width)) << "regime" << "    ";
    for (std::size_t k = 0; k < concepts.size(); ++k) {
        out << "  " << std::right << std::setw(static_cast<int>(col_width[k])) << corpus.dictionary().name(concepts[k]);
    }
    out << '\n';
    for (const auto& r : rows) {
        for (int line = 0; line < 2; ++line) {
            out << std::left << std::setw(static_cast<int>(name_width)) << (line == 0 ? r.regime.name : "")
                << (line == 0 ? "  FN" : "  FP");
            for (std::size_t k = 0; k < concepts.size(); ++k) {
                const auto& res = r.per_concept[k];
                const double v = line == 0 ? res.fn_ratio : res.fp_ratio;
                out << "  " << std::right << std::setw(static_cast<int>(col_width[k]))
                    << percent(std::isnan(v) ? std::nullopt : std::optional<double>(v));
            }
            out << '\n';
        }
    }
    return out.str();
}

json to_json(const Corpus& corpus, std::span<const ConceptId> concepts, std::span<const RegimeRow> rows) {
    json out = json::array();
    for (const auto& r : rows) {
        json per = json::array();
        for (std::size_t k = 0; k < concepts.size(); ++k) {
            const auto& res = r.per_concept[k];
            json trace = json::array();
            for (const auto& fr : res.per_round) {
                trace.push_back({{"fn", fr.fn ? json(*fr.fn) : json(nullptr)}, {"fp", fr.fp ? json(*fr.fp) : json(nullptr)}});
            }
            per.push_back({{"concept", corpus.dictionary().name(concepts[k])},
                           {"fn_ratio", std::isnan(res.fn_ratio) ? json(nullptr) : json(res.fn_ratio)},
                           {"fp_ratio", std::isnan(res.fp_ratio) ? json(nullptr) : json(res.fp_ratio)},
                           {"rounds", res.rounds},
                           {"per_round", trace}});
        }
        out.push_back({{"regime", to_json(r.regime)}, {"results", per}});
    }
    return out;
}

}  // namespace cvec
