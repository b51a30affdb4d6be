#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "conceptvec/common.hpp"
#include "conceptvec/corpus.hpp"

namespace cvec {

enum class Method {
    prob2vec,
    word_avg_uniform,
    word_avg_weighted,
    sif,
    svd_eig,
    svd_wandc,
    svd_sub,
    svd_shifted,
    svd_cds,
};

std::string_view to_string(Method method);
Method method_from_string(std::string_view tag);
const std::vector<Method>& all_methods();

/// u.v / (|u| |v|), clamped to [-1, 1]. Throws on a zero vector or a
/// dimension mismatch. Symmetric bit-for-bit.
template <typename A, typename B>
typename A::Scalar cosine(const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& v) {
    using Scalar = typename A::Scalar;
    if (u.size() != v.size()) throw Error("cosine: dimension mismatch");
    const Scalar nu = u.norm();
    const Scalar nv = v.norm();
    if (nu == Scalar(0) || nv == Scalar(0)) throw Error("cosine: zero vector");
    const Scalar c = u.dot(v) / (nu * nv);
    return std::clamp(c, Scalar(-1), Scalar(1));
}

/// Per-problem vectors produced by one method.
class EmbeddingSet {
public:
    EmbeddingSet(Method method, std::size_t dim) : method_(method), dim_(dim) {}

    Method method() const { return method_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return vectors_.size(); }
    const std::map<std::string, Vector>& vectors() const { return vectors_; }

    /// Rejects wrong dimension, non-finite entries and duplicate ids.
    void insert(const std::string& id, Vector v);
    bool contains(std::string_view id) const { return vectors_.count(std::string(id)) != 0; }
    const Vector& at(std::string_view id) const;

    /// Copy with every vector multiplied by `factor`.
    EmbeddingSet scaled(double factor) const;

private:
    Method method_;
    std::size_t dim_;
    std::map<std::string, Vector> vectors_;
};

struct SkippedProblem {
    std::string id;
    std::string reason;
};

struct CorpusEmbedding {
    EmbeddingSet set;
    std::vector<SkippedProblem> skipped;
};

/// E = (1/|C|) sum_{c in C} E(c) / f_c, with concept vectors as rows.
/// Throws UnembeddableError on an empty set and Error on f_c == 0.
template <typename Derived>
VectorX<typename Derived::Scalar> embed_problem(std::span<const ConceptId> concepts,
                                                const Eigen::MatrixBase<Derived>& concept_vectors,
                                                std::span<const std::size_t> concept_freq) {
    using Scalar = typename Derived::Scalar;
    if (concepts.empty()) throw UnembeddableError("unembeddable problem: empty concept set");
    VectorX<Scalar> sum = VectorX<Scalar>::Zero(concept_vectors.cols());
    for (ConceptId c : concepts) {
        if (c >= static_cast<std::size_t>(concept_vectors.rows()) || c >= concept_freq.size()) {
            throw Error("concept index out of range: " + std::to_string(c));
        }
        if (concept_freq[c] == 0) throw Error("concept " + std::to_string(c) + " has zero corpus frequency");
        sum += concept_vectors.row(static_cast<Eigen::Index>(c)).transpose() / static_cast<Scalar>(concept_freq[c]);
    }
    return sum / static_cast<Scalar>(concepts.size());
}

/// One vector per problem via embed_problem; concept-free problems and
/// zero compositions land in the skip report.
CorpusEmbedding embed_corpus(const Corpus& corpus, const Matrix& concept_vectors, Method tag = Method::prob2vec);

/// Top-k by descending cosine to the query, query excluded, ties by id.
std::vector<std::pair<std::string, double>> rank_similar(const EmbeddingSet& set, std::string_view query,
                                                         std::size_t k);

/// Header `# method=<tag> dim=<d>`, then `id<TAB>v1<TAB>...<TAB>vd`.
void save_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);
EmbeddingSet load_embeddings(const std::filesystem::path& path);

/// Shortest decimal that round-trips a double.
std::string format_double(double x);

}  // namespace cvec
