#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "conceptvec/common.hpp"
#include "conceptvec/compose.hpp"
#include "conceptvec/corpus.hpp"

namespace cvec {

// ---------------------------------------------------------------------------
// Word vectors

enum class OovPolicy { skip, random };

/// Pretrained-style token -> vector table. With OovPolicy::random, an
/// unknown token gets a vector uniform in [-1, 1] derived from (seed, token),
/// so the same token always maps to the same vector.
class WordVectorTable {
public:
    explicit WordVectorTable(std::size_t dim, OovPolicy policy = OovPolicy::skip, std::uint64_t seed = 0);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return vectors_.size(); }
    OovPolicy oov_policy() const { return policy_; }
    std::uint64_t seed() const { return seed_; }
    void set_oov_policy(OovPolicy policy, std::uint64_t seed);

    void set(const std::string& token, Vector v);
    bool contains(const std::string& token) const { return vectors_.count(token) != 0; }
    std::optional<Vector> lookup(const std::string& token) const;
    const std::unordered_map<std::string, Vector>& entries() const { return vectors_; }

    /// Seeded table, entries uniform in [-1, 1].
    static WordVectorTable random(const std::vector<std::string>& tokens, std::size_t dim, std::uint64_t seed);

private:
    std::size_t dim_;
    OovPolicy policy_;
    std::uint64_t seed_;
    std::unordered_map<std::string, Vector> vectors_;
};

/// `token v1 ... vdim` per line. The dimension is taken from the first line;
/// a leading `count dim` header line is skipped.
WordVectorTable load_word_vectors(const std::filesystem::path& path, OovPolicy policy = OovPolicy::skip,
                                  std::uint64_t seed = 0);
/// Tokens written in sorted order.
void save_word_vectors(const WordVectorTable& table, const std::filesystem::path& path);

enum class Weighting { uniform, inverse_frequency };

/// Mean of word vectors (uniform) or of vector / corpus count (inverse
/// frequency) over the problem's usable tokens. A token is usable if it
/// passes the selection (when given) and the table yields a vector for it.
Vector word_average(const Problem& problem, const Corpus& corpus, const WordVectorTable& table, Weighting weighting,
                    const WordSelection* selection = nullptr);

CorpusEmbedding word_average_embed(const Corpus& corpus, const WordVectorTable& table, Weighting weighting,
                                   const WordSelection* selection = nullptr);

// ---------------------------------------------------------------------------
// Smooth inverse frequency

inline constexpr double kSifDefaultA = 1e-3;
inline constexpr double kSifGrid[] = {1e-5, 1e-3, 2e-2};

/// (1/|W|) sum_w a / (a + p(w)) * E_w over usable tokens.
Vector sif_weighted_average(const Problem& problem, const Corpus& corpus, const WordVectorTable& table, double a,
                            const WordSelection* selection = nullptr);

/// Unit top right-singular vector of the matrix whose rows are the inputs
/// (uncentered, as in the original SIF recipe). Sign is normalized so the
/// largest-magnitude entry is positive.
Vector first_principal_component(const Matrix& rows);

/// e - u u^T e
template <typename A, typename B>
VectorX<typename A::Scalar> remove_projection(const Eigen::MatrixBase<A>& e, const Eigen::MatrixBase<B>& u) {
    return e - u * u.dot(e);
}

struct SifResult {
    CorpusEmbedding embedding;
    Vector component;  // the removed direction u
};

SifResult sif_embed(const Corpus& corpus, const WordVectorTable& table, double a = kSifDefaultA,
                    const WordSelection* selection = nullptr);

// ---------------------------------------------------------------------------
// Co-occurrence, PPMI, SVD

using CooccurrenceMatrix = MatrixX<std::int64_t>;

/// M(i, j) = number of problems containing both concepts i and j; zero diagonal.
CooccurrenceMatrix cooccurrence(const Corpus& corpus);

void validate_cooccurrence(const CooccurrenceMatrix& m);

struct PpmiVariant {
    enum class Kind { standard, shifted, cds };
    Kind kind = Kind::standard;
    double k = 5.0;  // shifted threshold

    static PpmiVariant standard() { return {Kind::standard, 5.0}; }
    static PpmiVariant shifted(double k = 5.0) { return {Kind::shifted, k}; }
    static PpmiVariant cds() { return {Kind::cds, 5.0}; }
};

/// Positive PMI with natural log. With D the total count and w(i) the row
/// share, an entry is log(ratio) where ratio = M(i,j) / (D w(i) w(j)) exceeds
/// the threshold (1, or k for the shifted variant) and the marginal product
/// is nonzero, else 0. The cds variant swaps w(j) for the 0.75-smoothed
/// marginal and need not be symmetric.
template <typename Scalar = double>
MatrixX<Scalar> ppmi(const CooccurrenceMatrix& m, PpmiVariant variant = PpmiVariant::standard()) {
    validate_cooccurrence(m);
    // k < 1 would admit log ratios below zero.
    if (variant.kind == PpmiVariant::Kind::shifted && !(variant.k >= 1.0)) throw Error("PPMI shift k must be >= 1");
    const Eigen::Index n = m.rows();
    MatrixX<Scalar> out = MatrixX<Scalar>::Zero(n, n);
    if (m.sum() == 0) return out;

    // Ratios are formed from exact integer products so that a ratio sitting
    // exactly on the threshold is not pushed across it by rounding.
    const VectorX<std::int64_t> row_sum = m.rowwise().sum();
    const std::int64_t total_count = m.sum();
    VectorX<Scalar> smoothed;
    Scalar smoothed_total = 0;
    if (variant.kind == PpmiVariant::Kind::cds) {
        smoothed = row_sum.template cast<Scalar>().array().pow(Scalar(0.75)).matrix();
        smoothed_total = smoothed.sum();
    }
    const Scalar threshold = variant.kind == PpmiVariant::Kind::shifted ? static_cast<Scalar>(variant.k) : Scalar(1);

    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (m(i, j) == 0 || row_sum[i] == 0 || row_sum[j] == 0) continue;
            Scalar ratio;
            if (variant.kind == PpmiVariant::Kind::cds) {
                ratio = static_cast<Scalar>(m(i, j)) * smoothed_total / (static_cast<Scalar>(row_sum[i]) * smoothed[j]);
            } else {
                ratio = static_cast<Scalar>(m(i, j) * total_count) / static_cast<Scalar>(row_sum[i] * row_sum[j]);
            }
            if (ratio > threshold) out(i, j) = std::log(ratio);
        }
    }
    return out;
}

/// P = U diag(S) V^T with singular values descending and each left singular
/// vector flipped (together with its right partner) so that its
/// largest-magnitude entry is positive.
template <typename Scalar>
struct SignedSvd {
    MatrixX<Scalar> u;
    VectorX<Scalar> s;
    MatrixX<Scalar> v;
};

template <typename Derived>
SignedSvd<typename Derived::Scalar> signed_svd(const Eigen::MatrixBase<Derived>& p) {
    using Scalar = typename Derived::Scalar;
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(p, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SignedSvd<Scalar> out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    for (Eigen::Index k = 0; k < out.u.cols(); ++k) {
        Eigen::Index arg = 0;
        out.u.col(k).cwiseAbs().maxCoeff(&arg);
        if (out.u(arg, k) < Scalar(0)) {
            out.u.col(k) = -out.u.col(k);
            if (k < out.v.cols()) out.v.col(k) = -out.v.col(k);
        }
    }
    return out;
}

enum class SvdFlavor { eig, wandc, sub, shifted, cds };

PpmiVariant ppmi_variant_for(SvdFlavor flavor, double k_shift = 5.0);
Method method_for(SvdFlavor flavor);
SvdFlavor svd_flavor_for(Method method);

/// N x d concept vectors from a PPMI matrix.
///   eig                 rows of U_d
///   sub, shifted, cds   rows of U_d S_d
///   wandc               rows of U_d S_d + V_d, with V_d the first d right
///                       singular vectors as an N x d block
template <typename Derived>
MatrixX<typename Derived::Scalar> svd_concept_embed(const Eigen::MatrixBase<Derived>& p, std::size_t d,
                                                    SvdFlavor flavor) {
    using Scalar = typename Derived::Scalar;
    if (p.rows() != p.cols()) throw Error("PPMI matrix must be square");
    const auto n = static_cast<std::size_t>(p.rows());
    if (d < 1 || d > n) throw Error("SVD dimension d=" + std::to_string(d) + " outside [1, " + std::to_string(n) + "]");
    const auto svd = signed_svd(p);
    const auto di = static_cast<Eigen::Index>(d);
    const MatrixX<Scalar> u_d = svd.u.leftCols(di);
    if (flavor == SvdFlavor::eig) return u_d;
    MatrixX<Scalar> us = u_d * svd.s.head(di).asDiagonal();
    if (flavor == SvdFlavor::wandc) us += svd.v.leftCols(di);
    return us;
}

inline std::size_t default_svd_dim(std::size_t n_concepts) { return std::min<std::size_t>(10, n_concepts); }

/// cooccurrence -> ppmi -> svd_concept_embed -> embed_corpus.
CorpusEmbedding svd_prob_embed(const Corpus& corpus, SvdFlavor flavor, std::size_t d, double k_shift = 5.0);

}  // namespace cvec
