#include "conceptvec/compose.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace cvec {

namespace {

constexpr std::pair<Method, std::string_view> kMethodTags[] = {
    {Method::prob2vec, "prob2vec"},       {Method::word_avg_uniform, "word-avg-uniform"},
    {Method::word_avg_weighted, "word-avg-weighted"}, {Method::sif, "sif"},
    {Method::svd_eig, "svd-eig"},         {Method::svd_wandc, "svd-wandc"},
    {Method::svd_sub, "svd-sub"},         {Method::svd_shifted, "svd-shifted"},
    {Method::svd_cds, "svd-cds"},
};

double parse_double(std::string_view s) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw Error("bad number '" + std::string(s) + "'");
    return v;
}

}  // namespace

std::string_view to_string(Method method) {
    for (const auto& [m, tag] : kMethodTags) {
        if (m == method) return tag;
    }
    return "unknown";
}

Method method_from_string(std::string_view tag) {
    for (const auto& [m, t] : kMethodTags) {
        if (t == tag) return m;
    }
    throw Error("unknown method: " + std::string(tag));
}

const std::vector<Method>& all_methods() {
    static const std::vector<Method> methods = [] {
        std::vector<Method> v;
        for (const auto& entry : kMethodTags) v.push_back(entry.first);
        return v;
    }();
    return methods;
}

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc{}) throw Error("cannot format number");
    return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------

void EmbeddingSet::insert(const std::string& id, Vector v) {
    if (static_cast<std::size_t>(v.size()) != dim_) {
        throw Error("embedding for " + id + " has dimension " + std::to_string(v.size()) + ", expected " +
                    std::to_string(dim_));
    }
    if (!v.allFinite()) throw Error("embedding for " + id + " has non-finite entries");
    if (!vectors_.emplace(id, std::move(v)).second) throw Error("duplicate embedding id: " + id);
}

const Vector& EmbeddingSet::at(std::string_view id) const {
    auto it = vectors_.find(std::string(id));
    if (it == vectors_.end()) throw Error("no embedding for problem " + std::string(id));
    return it->second;
}

EmbeddingSet EmbeddingSet::scaled(double factor) const {
    EmbeddingSet out(method_, dim_);
    for (const auto& [id, v] : vectors_) out.insert(id, v * factor);
    return out;
}

CorpusEmbedding embed_corpus(const Corpus& corpus, const Matrix& concept_vectors, Method tag) {
    if (static_cast<std::size_t>(concept_vectors.rows()) != corpus.num_concepts()) {
        throw Error("concept vector table has " + std::to_string(concept_vectors.rows()) + " rows, dictionary has " +
                    std::to_string(corpus.num_concepts()));
    }
    CorpusEmbedding out{EmbeddingSet(tag, static_cast<std::size_t>(concept_vectors.cols())), {}};
    for (const auto& p : corpus.problems()) {
        if (p.concepts.empty()) {
            out.skipped.push_back({p.id, "empty concept set"});
            continue;
        }
        Vector e = embed_problem(std::span<const ConceptId>(p.concepts), concept_vectors,
                                 std::span<const std::size_t>(corpus.concept_freq()));
        if (e.isZero(0.0)) {
            out.skipped.push_back({p.id, "zero vector"});
            continue;
        }
        out.set.insert(p.id, std::move(e));
    }
    return out;
}

std::vector<std::pair<std::string, double>> rank_similar(const EmbeddingSet& set, std::string_view query,
                                                         std::size_t k) {
    const Vector& q = set.at(query);
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(set.size());
    for (const auto& [id, v] : set.vectors()) {
        if (id == query) continue;
        scored.emplace_back(id, cosine(q, v));
    }
    // std::map iteration gives ids in order, so a stable sort keeps id order on ties.
    std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

void save_embeddings(const EmbeddingSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "# method=" << to_string(set.method()) << " dim=" << set.dim() << '\n';
    for (const auto& [id, v] : set.vectors()) {
        out << id;
        for (Eigen::Index i = 0; i < v.size(); ++i) out << '\t' << format_double(v[i]);
        out << '\n';
    }
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
        throw Error(path.string() + ": missing '# method=... dim=...' header");
    }
    std::optional<Method> method;
    std::optional<std::size_t> dim;
    {
        std::istringstream hs(line.substr(2));
        std::string kv;
        while (hs >> kv) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            auto key = kv.substr(0, eq), value = kv.substr(eq + 1);
            if (key == "method") method = method_from_string(value);
            if (key == "dim") dim = static_cast<std::size_t>(parse_double(value));
        }
    }
    if (!method || !dim) throw Error(path.string() + ": header needs method and dim");
    EmbeddingSet set(*method, *dim);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string_view> fields;
        std::string_view rest(line);
        while (true) {
            auto tab = rest.find('\t');
            fields.push_back(rest.substr(0, tab));
            if (tab == std::string_view::npos) break;
            rest.remove_prefix(tab + 1);
        }
        if (fields.size() != *dim + 1) {
            throw Error(path.string() + ": line " + std::to_string(line_no) + ": expected id and " +
                        std::to_string(*dim) + " values");
        }
        Vector v(static_cast<Eigen::Index>(*dim));
        try {
            for (std::size_t i = 0; i < *dim; ++i) v[static_cast<Eigen::Index>(i)] = parse_double(fields[i + 1]);
            set.insert(std::string(fields[0]), std::move(v));
        } catch (const Error& e) {
            throw Error(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return set;
}

}  // namespace cvec
