#include "conceptvec/skipgram.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "conceptvec/compose.hpp"
#include "conceptvec/rng.hpp"

namespace cvec {

namespace {

constexpr char kMagic[8] = {'C', 'V', 'S', 'G', 'M', 'D', 'L', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error("truncated model file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

// Cross-entropy gradient for one pair, written into the caller's buffers.
// Returns the hidden activation h (a copy of W_in[input]).
Vector output_error(const Matrix& w_in, const Matrix& w_out, const TrainingPair& pair, Vector& dlogits) {
    Vector h = w_in.row(static_cast<Eigen::Index>(pair.input)).transpose();
    dlogits = softmax(w_out.transpose() * h);
    dlogits[static_cast<Eigen::Index>(pair.output)] -= 1.0;
    return h;
}

}  // namespace

void TrainConfig::validate() const {
    if (dim == 0) throw Error("embedding dimension must be positive");
    if (!(learning_rate > 0) || !(min_learning_rate > 0)) throw Error("learning rates must be positive");
    if (epochs == 0) throw Error("epochs must be positive");
    if (init_scale && !(*init_scale > 0)) throw Error("init_scale must be positive");
}

std::vector<TrainingPair> make_pairs(std::span<const std::vector<ConceptId>> concept_sets) {
    std::vector<TrainingPair> pairs;
    for (const auto& set : concept_sets) {
        for (ConceptId a : set) {
            for (ConceptId b : set) {
                if (a != b) pairs.push_back({a, b});
            }
        }
    }
    return pairs;
}

std::vector<TrainingPair> make_pairs(const Corpus& corpus) {
    std::vector<std::vector<ConceptId>> sets;
    sets.reserve(corpus.size());
    for (const auto& p : corpus.problems()) sets.push_back(p.concepts);
    return make_pairs(std::span<const std::vector<ConceptId>>(sets));
}

// ---------------------------------------------------------------------------

SkipGramModel::SkipGramModel(Matrix input_weights, Matrix output_weights, TrainConfig config)
    : w_in_(std::move(input_weights)), w_out_(std::move(output_weights)), config_(std::move(config)) {
    if (w_in_.rows() == 0 || w_in_.cols() == 0) throw Error("skip-gram model needs N >= 1 and d >= 1");
    if (w_out_.rows() != w_in_.cols() || w_out_.cols() != w_in_.rows()) {
        throw Error("skip-gram weight shapes disagree: input " + std::to_string(w_in_.rows()) + "x" +
                    std::to_string(w_in_.cols()) + ", output " + std::to_string(w_out_.rows()) + "x" +
                    std::to_string(w_out_.cols()));
    }
    if (!w_in_.allFinite() || !w_out_.allFinite()) throw Error("skip-gram weights must be finite");
    config_.dim = static_cast<std::size_t>(w_in_.cols());
}

SkipGramModel SkipGramModel::initialize(std::size_t n_concepts, const TrainConfig& config) {
    config.validate();
    if (n_concepts == 0) throw Error("cannot initialize a model over zero concepts");
    Rng rng(config.seed);
    const double scale = config.resolved_init_scale();
    const auto n = static_cast<Eigen::Index>(n_concepts);
    const auto d = static_cast<Eigen::Index>(config.dim);
    Matrix w_in(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) w_in(i, j) = rng.uniform(-scale, scale);
    }
    return SkipGramModel(std::move(w_in), Matrix::Zero(d, n), config);
}

void SkipGramModel::check_concept(ConceptId c) const {
    if (c >= num_concepts()) {
        throw Error("concept index " + std::to_string(c) + " out of range (N=" + std::to_string(num_concepts()) + ")");
    }
}

Vector SkipGramModel::forward(ConceptId c) const {
    check_concept(c);
    return softmax(w_out_.transpose() * w_in_.row(static_cast<Eigen::Index>(c)).transpose());
}

Vector SkipGramModel::concept_vector(ConceptId c) const {
    check_concept(c);
    return w_in_.row(static_cast<Eigen::Index>(c)).transpose();
}

double SkipGramModel::loss(const TrainingPair& pair) const {
    check_concept(pair.input);
    check_concept(pair.output);
    const Vector logits = w_out_.transpose() * w_in_.row(static_cast<Eigen::Index>(pair.input)).transpose();
    const double peak = logits.maxCoeff();
    const double log_z = peak + std::log((logits.array() - peak).exp().sum());
    return log_z - logits[static_cast<Eigen::Index>(pair.output)];
}

double SkipGramModel::mean_loss(std::span<const TrainingPair> pairs) const {
    if (pairs.empty()) return 0.0;
    double total = 0;
    for (const auto& p : pairs) total += loss(p);
    return total / static_cast<double>(pairs.size());
}

bool SkipGramModel::operator==(const SkipGramModel& other) const {
    return w_in_.rows() == other.w_in_.rows() && w_in_.cols() == other.w_in_.cols() &&
           std::memcmp(w_in_.data(), other.w_in_.data(), sizeof(double) * static_cast<std::size_t>(w_in_.size())) == 0 &&
           std::memcmp(w_out_.data(), other.w_out_.data(), sizeof(double) * static_cast<std::size_t>(w_out_.size())) == 0;
}

SkipGramGradients loss_gradient(const SkipGramModel& model, const TrainingPair& pair) {
    if (pair.input >= model.num_concepts() || pair.output >= model.num_concepts()) {
        throw Error("training pair index out of range");
    }
    Vector dlogits;
    const Vector h = output_error(model.input_weights(), model.output_weights(), pair, dlogits);
    SkipGramGradients g{Matrix::Zero(model.input_weights().rows(), model.input_weights().cols()), h * dlogits.transpose()};
    g.input.row(static_cast<Eigen::Index>(pair.input)) = (model.output_weights() * dlogits).transpose();
    return g;
}

SkipGramModel train(std::span<const TrainingPair> pairs, std::size_t n_concepts, const TrainConfig& config,
                    TrainingTrace* trace) {
    config.validate();
    if (pairs.empty()) throw Error("cannot train on an empty pair list");
    for (const auto& p : pairs) {
        if (p.input >= n_concepts || p.output >= n_concepts) {
            throw Error("training pair (" + std::to_string(p.input) + ", " + std::to_string(p.output) +
                        ") outside N=" + std::to_string(n_concepts));
        }
        if (p.input == p.output) throw Error("training pair with identical input and output");
    }

    const SkipGramModel init = SkipGramModel::initialize(n_concepts, config);
    Matrix w_in = init.input_weights();
    Matrix w_out = init.output_weights();
    if (trace) {
        trace->initial_loss = init.mean_loss(pairs);
        trace->epoch_losses.clear();
    }

    // Separate stream from the one used for initialization.
    Rng rng(mix_seed(config.seed, 1));
    std::vector<std::size_t> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const double total_steps = static_cast<double>(config.epochs * pairs.size());
    std::size_t step = 0;
    Vector dlogits;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t idx : order) {
            const double progress = total_steps > 1 ? static_cast<double>(step) / (total_steps - 1) : 0.0;
            const double lr = config.learning_rate + (config.min_learning_rate - config.learning_rate) * progress;
            ++step;

            const TrainingPair& pair = pairs[idx];
            const Vector h = output_error(w_in, w_out, pair, dlogits);
            const Vector dh = w_out * dlogits;
            w_out.noalias() -= lr * h * dlogits.transpose();
            w_in.row(static_cast<Eigen::Index>(pair.input)) -= lr * dh.transpose();
        }
        if (trace) {
            trace->epoch_losses.push_back(SkipGramModel(w_in, w_out, config).mean_loss(pairs));
        }
    }
    return SkipGramModel(std::move(w_in), std::move(w_out), config);
}

std::vector<std::pair<ConceptId, double>> nearest_concepts(const SkipGramModel& model, ConceptId c, std::size_t k) {
    if (c >= model.num_concepts()) throw Error("concept index out of range: " + std::to_string(c));
    if (k >= model.num_concepts()) {
        throw Error("k=" + std::to_string(k) + " must be smaller than N=" + std::to_string(model.num_concepts()));
    }
    const Vector query = model.concept_vector(c);
    std::vector<std::pair<ConceptId, double>> scored;
    for (ConceptId other = 0; other < model.num_concepts(); ++other) {
        if (other == c) continue;
        scored.emplace_back(other, cosine(query, model.input_weights().row(static_cast<Eigen::Index>(other)).transpose()));
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
    scored.resize(k);
    return scored;
}

// ---------------------------------------------------------------------------

void save_model(const SkipGramModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    const auto& cfg = model.config();
    out.write(kMagic, sizeof(kMagic));
    put_u64(out, model.num_concepts());
    put_u64(out, model.dim());
    put_u64(out, cfg.seed);
    put_u64(out, cfg.epochs);
    put_f64(out, cfg.learning_rate);
    put_f64(out, cfg.min_learning_rate);
    put_f64(out, cfg.resolved_init_scale());
    const RowMajorMatrix w_in = model.input_weights();
    const RowMajorMatrix w_out = model.output_weights();
    for (Eigen::Index i = 0; i < w_in.size(); ++i) put_f64(out, w_in.data()[i]);
    for (Eigen::Index i = 0; i < w_out.size(); ++i) put_f64(out, w_out.data()[i]);
}

SkipGramModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    try {
        char magic[sizeof(kMagic)];
        if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
            throw Error("not a skip-gram model file");
        }
        TrainConfig cfg;
        const auto n = get_u64(in);
        cfg.dim = get_u64(in);
        cfg.seed = get_u64(in);
        cfg.epochs = get_u64(in);
        cfg.learning_rate = get_f64(in);
        cfg.min_learning_rate = get_f64(in);
        cfg.init_scale = get_f64(in);
        if (n == 0 || cfg.dim == 0 || n > (1u << 24) || cfg.dim > (1u << 16)) throw Error("implausible model shape");
        RowMajorMatrix w_in(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cfg.dim));
        RowMajorMatrix w_out(static_cast<Eigen::Index>(cfg.dim), static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < w_in.size(); ++i) w_in.data()[i] = get_f64(in);
        for (Eigen::Index i = 0; i < w_out.size(); ++i) w_out.data()[i] = get_f64(in);
        if (in.peek() != std::char_traits<char>::eof()) throw Error("trailing bytes after weights");
        return SkipGramModel(Matrix(w_in), Matrix(w_out), cfg);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void export_concept_vectors(const SkipGramModel& model, const ConceptDictionary& dictionary,
                            const std::filesystem::path& path) {
    if (dictionary.size() != model.num_concepts()) throw Error("dictionary size does not match model");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    for (ConceptId c = 0; c < model.num_concepts(); ++c) {
        out << dictionary.name(c);
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(model.dim()); ++j) {
            out << '\t' << format_double(model.input_weights()(static_cast<Eigen::Index>(c), j));
        }
        out << '\n';
    }
}

}  // namespace cvec
