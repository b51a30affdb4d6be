#include "conceptvec/baselines.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "conceptvec/rng.hpp"

namespace cvec {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string f;
    while (ss >> f) out.push_back(f);
    return out;
}

bool parse_double(const std::string& s, double& v) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

bool is_unsigned(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= '0' && c <= '9'; });
}

template <typename Fn>
Vector average_usable(const Problem& problem, const WordVectorTable& table, const WordSelection* selection,
                      Fn weight) {
    Vector sum = Vector::Zero(static_cast<Eigen::Index>(table.dim()));
    std::size_t used = 0;
    for (const auto& w : problem.words) {
        if (selection && !selection->contains(w)) continue;
        auto v = table.lookup(w);
        if (!v) continue;
        sum += weight(w) * *v;
        ++used;
    }
    if (used == 0) throw UnembeddableError("unembeddable problem " + problem.id + ": no usable tokens");
    return sum / static_cast<double>(used);
}

}  // namespace

// ---------------------------------------------------------------------------

WordVectorTable::WordVectorTable(std::size_t dim, OovPolicy policy, std::uint64_t seed)
    : dim_(dim), policy_(policy), seed_(seed) {
    if (dim == 0) throw Error("word vector dimension must be positive");
}

void WordVectorTable::set_oov_policy(OovPolicy policy, std::uint64_t seed) {
    policy_ = policy;
    seed_ = seed;
}

void WordVectorTable::set(const std::string& token, Vector v) {
    if (static_cast<std::size_t>(v.size()) != dim_) {
        throw Error("word vector for '" + token + "' has dimension " + std::to_string(v.size()) + ", expected " +
                    std::to_string(dim_));
    }
    if (!v.allFinite()) throw Error("word vector for '" + token + "' has non-finite entries");
    vectors_[token] = std::move(v);
}

std::optional<Vector> WordVectorTable::lookup(const std::string& token) const {
    auto it = vectors_.find(token);
    if (it != vectors_.end()) return it->second;
    if (policy_ == OovPolicy::skip) return std::nullopt;
    Rng rng(mix_seed(seed_, fnv1a(token)));
    Vector v(static_cast<Eigen::Index>(dim_));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-1.0, 1.0);
    return v;
}

WordVectorTable WordVectorTable::random(const std::vector<std::string>& tokens, std::size_t dim, std::uint64_t seed) {
    WordVectorTable seeded(dim, OovPolicy::random, seed);
    WordVectorTable table(dim, OovPolicy::skip, seed);
    for (const auto& t : tokens) table.set(t, *seeded.lookup(t));
    return table;
}

WordVectorTable load_word_vectors(const std::filesystem::path& path, OovPolicy policy, std::uint64_t seed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::optional<WordVectorTable> table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto fields = split_ws(line);
        if (fields.empty()) continue;
        if (!table && fields.size() == 2 && is_unsigned(fields[0]) && is_unsigned(fields[1])) continue;
        if (fields.size() < 2) throw Error(path.string() + ": line " + std::to_string(line_no) + ": no vector values");
        if (!table) table.emplace(fields.size() - 1, policy, seed);
        if (fields.size() - 1 != table->dim()) {
            throw Error(path.string() + ": line " + std::to_string(line_no) + ": expected " +
                        std::to_string(table->dim()) + " values, got " + std::to_string(fields.size() - 1));
        }
        Vector v(static_cast<Eigen::Index>(table->dim()));
        for (std::size_t i = 0; i < table->dim(); ++i) {
            if (!parse_double(fields[i + 1], v[static_cast<Eigen::Index>(i)])) {
                throw Error(path.string() + ": line " + std::to_string(line_no) + ": bad number '" + fields[i + 1] + "'");
            }
        }
        try {
            table->set(fields[0], std::move(v));
        } catch (const Error& e) {
            throw Error(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!table) throw Error(path.string() + ": no word vectors");
    return std::move(*table);
}

void save_word_vectors(const WordVectorTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    std::vector<std::string> tokens;
    for (const auto& [t, _] : table.entries()) tokens.push_back(t);
    std::sort(tokens.begin(), tokens.end());
    for (const auto& t : tokens) {
        out << t;
        const Vector& v = table.entries().at(t);
        for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << format_double(v[i]);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------

Vector word_average(const Problem& problem, const Corpus& corpus, const WordVectorTable& table, Weighting weighting,
                    const WordSelection* selection) {
    if (weighting == Weighting::uniform) {
        return average_usable(problem, table, selection, [](const std::string&) { return 1.0; });
    }
    return average_usable(problem, table, selection, [&](const std::string& w) {
        auto it = corpus.word_freq().find(w);
        if (it == corpus.word_freq().end() || it->second == 0) {
            throw Error("token '" + w + "' has no corpus frequency");
        }
        return 1.0 / static_cast<double>(it->second);
    });
}

CorpusEmbedding word_average_embed(const Corpus& corpus, const WordVectorTable& table, Weighting weighting,
                                   const WordSelection* selection) {
    const Method tag = weighting == Weighting::uniform ? Method::word_avg_uniform : Method::word_avg_weighted;
    CorpusEmbedding out{EmbeddingSet(tag, table.dim()), {}};
    for (const auto& p : corpus.problems()) {
        try {
            Vector e = word_average(p, corpus, table, weighting, selection);
            if (e.isZero(0.0)) {
                out.skipped.push_back({p.id, "zero vector"});
                continue;
            }
            out.set.insert(p.id, std::move(e));
        } catch (const UnembeddableError&) {
            out.skipped.push_back({p.id, "no usable tokens"});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

Vector sif_weighted_average(const Problem& problem, const Corpus& corpus, const WordVectorTable& table, double a,
                            const WordSelection* selection) {
    if (!(a > 0)) throw Error("SIF parameter a must be positive");
    return average_usable(problem, table, selection, [&](const std::string& w) {
        auto it = corpus.word_prob().find(w);
        const double p = it == corpus.word_prob().end() ? 0.0 : it->second;
        return a / (a + p);
    });
}

Vector first_principal_component(const Matrix& rows) {
    if (rows.rows() < 2) throw Error("principal component needs at least two vectors");
    Eigen::JacobiSVD<Matrix> svd(rows, Eigen::ComputeThinV);
    if (svd.singularValues()[0] == 0.0) throw Error("principal component of all-zero vectors is undefined");
    Vector u = svd.matrixV().col(0);
    Eigen::Index arg = 0;
    u.cwiseAbs().maxCoeff(&arg);
    if (u[arg] < 0) u = -u;
    return u / u.norm();
}

SifResult sif_embed(const Corpus& corpus, const WordVectorTable& table, double a, const WordSelection* selection) {
    if (!(a > 0)) throw Error("SIF parameter a must be positive");
    std::vector<std::string> ids;
    std::vector<Vector> averages;
    std::vector<SkippedProblem> skipped;
    for (const auto& p : corpus.problems()) {
        try {
            averages.push_back(sif_weighted_average(p, corpus, table, a, selection));
            ids.push_back(p.id);
        } catch (const UnembeddableError&) {
            skipped.push_back({p.id, "no usable tokens"});
        }
    }
    if (averages.size() < 2) throw Error("SIF needs at least two embeddable problems");

    Matrix stacked(static_cast<Eigen::Index>(averages.size()), static_cast<Eigen::Index>(table.dim()));
    for (std::size_t i = 0; i < averages.size(); ++i) stacked.row(static_cast<Eigen::Index>(i)) = averages[i].transpose();
    Vector u = first_principal_component(stacked);

    SifResult out{{EmbeddingSet(Method::sif, table.dim()), std::move(skipped)}, u};
    for (std::size_t i = 0; i < averages.size(); ++i) {
        Vector e = remove_projection(averages[i], u);
        if (e.isZero(0.0)) {
            out.embedding.skipped.push_back({ids[i], "zero vector"});
            continue;
        }
        out.embedding.set.insert(ids[i], std::move(e));
    }
    return out;
}

// ---------------------------------------------------------------------------

CooccurrenceMatrix cooccurrence(const Corpus& corpus) {
    const auto n = static_cast<Eigen::Index>(corpus.num_concepts());
    CooccurrenceMatrix m = CooccurrenceMatrix::Zero(n, n);
    for (const auto& p : corpus.problems()) {
        for (ConceptId a : p.concepts) {
            for (ConceptId b : p.concepts) {
                if (a != b) ++m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            }
        }
    }
    return m;
}

void validate_cooccurrence(const CooccurrenceMatrix& m) {
    if (m.rows() != m.cols()) throw Error("co-occurrence matrix must be square");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (m(i, i) != 0) throw Error("co-occurrence matrix must have a zero diagonal");
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (m(i, j) < 0) throw Error("co-occurrence counts must be nonnegative");
            if (m(i, j) != m(j, i)) throw Error("co-occurrence matrix must be symmetric");
        }
    }
}

PpmiVariant ppmi_variant_for(SvdFlavor flavor, double k_shift) {
    switch (flavor) {
        case SvdFlavor::shifted: return PpmiVariant::shifted(k_shift);
        case SvdFlavor::cds: return PpmiVariant::cds();
        default: return PpmiVariant::standard();
    }
}

Method method_for(SvdFlavor flavor) {
    switch (flavor) {
        case SvdFlavor::eig: return Method::svd_eig;
        case SvdFlavor::wandc: return Method::svd_wandc;
        case SvdFlavor::sub: return Method::svd_sub;
        case SvdFlavor::shifted: return Method::svd_shifted;
        case SvdFlavor::cds: return Method::svd_cds;
    }
    throw Error("unknown SVD flavor");
}

SvdFlavor svd_flavor_for(Method method) {
    switch (method) {
        case Method::svd_eig: return SvdFlavor::eig;
        case Method::svd_wandc: return SvdFlavor::wandc;
        case Method::svd_sub: return SvdFlavor::sub;
        case Method::svd_shifted: return SvdFlavor::shifted;
        case Method::svd_cds: return SvdFlavor::cds;
        default: throw Error("method " + std::string(to_string(method)) + " is not an SVD variant");
    }
}

CorpusEmbedding svd_prob_embed(const Corpus& corpus, SvdFlavor flavor, std::size_t d, double k_shift) {
    const Matrix p = ppmi<double>(cooccurrence(corpus), ppmi_variant_for(flavor, k_shift));
    const Matrix vectors = svd_concept_embed(p, d, flavor);
    return embed_corpus(corpus, vectors, method_for(flavor));
}

}  // namespace cvec
