#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <fstream>

#include "conceptvec/baselines.hpp"
#include "support.hpp"

using namespace cvec;
using cvec::testing::concept_corpus;
using cvec::testing::problem;
using cvec::testing::TempDir;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

WordVectorTable hand_table() {
    WordVectorTable t(2);
    t.set("coin", vec({1, 0}));
    t.set("die", vec({0, 2}));
    t.set("urn", vec({3, 1}));
    return t;
}

// PPMI recomputed from the definition with plain loops.
Matrix brute_force_ppmi(const CooccurrenceMatrix& m, PpmiVariant variant) {
    const auto n = static_cast<int>(m.rows());
    double total = 0;
    std::vector<double> row(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            total += static_cast<double>(m(i, j));
            row[i] += static_cast<double>(m(i, j));
        }
    }
    double smooth_total = 0;
    for (int i = 0; i < n; ++i) smooth_total += std::pow(row[i], 0.75);
    Matrix out = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (total == 0) continue;
            const double wi = row[i] / total;
            const double wj = variant.kind == PpmiVariant::Kind::cds ? std::pow(row[j], 0.75) / smooth_total
                                                                     : row[j] / total;
            if (wi * wj == 0) continue;
            const double ratio = static_cast<double>(m(i, j)) / (total * wi * wj);
            if (variant.kind == PpmiVariant::Kind::cds) {
                if (ratio > 1.0) out(i, j) = std::log(ratio);
                continue;
            }
            // Counts are small integers, so the cross-multiplied test is exact.
            const long double threshold = variant.kind == PpmiVariant::Kind::shifted ? variant.k : 1.0;
            if (static_cast<long double>(m(i, j)) * total > threshold * row[i] * row[j]) out(i, j) = std::log(ratio);
        }
    }
    return out;
}

CooccurrenceMatrix random_cooccurrence(Rng& rng, std::size_t n, std::size_t m) {
    const auto sets = cvec::testing::random_sets(rng, m, n, n);
    return cooccurrence(concept_corpus(sets, n));
}

}  // namespace

TEST(WordAverage, Examples) {
    const auto table = hand_table();
    const Corpus corpus({problem("a", "coin"), problem("b", "coin die"), problem("c", "die coin"),
                         problem("d", "nothing here")},
                        ConceptDictionary({"x"}));
    EXPECT_TRUE(word_average(corpus.at("a"), corpus, table, Weighting::uniform) == vec({1, 0}));
    const Vector two = word_average(corpus.at("b"), corpus, table, Weighting::uniform);
    EXPECT_EQ(two, vec({0.5, 1.0}));
    EXPECT_EQ(word_average(corpus.at("c"), corpus, table, Weighting::uniform), two);
    // coin occurs three times in the corpus, die twice: ((1,0)/3 + (0,2)/2) / 2
    const Vector weighted = word_average(corpus.at("b"), corpus, table, Weighting::inverse_frequency);
    EXPECT_DOUBLE_EQ(weighted[0], 1.0 / 6);
    EXPECT_DOUBLE_EQ(weighted[1], 0.5);
    EXPECT_THROW(word_average(corpus.at("d"), corpus, table, Weighting::uniform), UnembeddableError);

    WordSelection only_die{{"die"}};
    EXPECT_EQ(word_average(corpus.at("b"), corpus, table, Weighting::uniform, &only_die), vec({0, 2}));
}

TEST(WordAverage, SingleTokenIgnoresWeighting) {
    const auto table = hand_table();
    const Corpus corpus({problem("a", "urn"), problem("b", "urn")}, ConceptDictionary({"x"}));
    // f = 2, but a mean of one scaled vector is still the vector over 2.
    EXPECT_EQ(word_average(corpus.at("a"), corpus, table, Weighting::inverse_frequency), vec({1.5, 0.5}));
    const Corpus once({problem("a", "urn")}, ConceptDictionary({"x"}));
    EXPECT_EQ(word_average(once.at("a"), once, table, Weighting::inverse_frequency), vec({3, 1}));
}

TEST(WordVectorTable, OovPolicies) {
    WordVectorTable skip(3);
    EXPECT_FALSE(skip.lookup("zz").has_value());
    WordVectorTable random(3, OovPolicy::random, 5);
    const auto a = random.lookup("zz");
    ASSERT_TRUE(a.has_value());
    EXPECT_EQ(*a, *random.lookup("zz"));
    EXPECT_LE(a->cwiseAbs().maxCoeff(), 1.0);
    EXPECT_NE(*a, *random.lookup("yy"));
    EXPECT_THROW(random.set("x", Vector::Ones(2)), Error);
}

TEST(WordVectorTable, FileRoundTrip) {
    TempDir dir;
    {
        std::ofstream out(dir / "w.vec");
        out << "2 3\nzeta 1 2 3\nalpha -0.5 0 1e-3\n";
    }
    const auto t = load_word_vectors(dir / "w.vec");
    EXPECT_EQ(t.dim(), 3u);
    EXPECT_EQ(t.size(), 2u);
    EXPECT_EQ(*t.lookup("alpha"), vec({-0.5, 0, 1e-3}));
    save_word_vectors(t, dir / "out.vec");
    std::ifstream in(dir / "out.vec");
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first.substr(0, 6), "alpha ");
    const auto back = load_word_vectors(dir / "out.vec");
    EXPECT_EQ(*back.lookup("zeta"), vec({1, 2, 3}));

    {
        std::ofstream out(dir / "ragged.vec");
        out << "a 1 2\nb 1\n";
    }
    EXPECT_THROW(load_word_vectors(dir / "ragged.vec"), Error);
}

TEST(Sif, ToyCorpusMatchesTwoByTwoEigenvector) {
    const auto table = hand_table();
    const Corpus corpus({problem("a", "coin die"), problem("b", "urn coin"), problem("c", "die die urn")},
                        ConceptDictionary({"x"}));
    const double a = 0.1;
    // p(coin) = 2/7, p(die) = 3/7, p(urn) = 2/7
    auto weight = [&](double p) { return a / (a + p); };
    Matrix x(3, 2);
    x.row(0) = (weight(2.0 / 7) * vec({1, 0}) + weight(3.0 / 7) * vec({0, 2})).transpose() / 2;
    x.row(1) = (weight(2.0 / 7) * vec({3, 1}) + weight(2.0 / 7) * vec({1, 0})).transpose() / 2;
    x.row(2) = (2 * weight(3.0 / 7) * vec({0, 2}) + weight(2.0 / 7) * vec({3, 1})).transpose() / 3;

    // Top eigenvector of the 2x2 second-moment matrix, closed form.
    const double s11 = x.col(0).squaredNorm(), s22 = x.col(1).squaredNorm(), s12 = x.col(0).dot(x.col(1));
    const double lambda = (s11 + s22) / 2 + std::sqrt((s11 - s22) * (s11 - s22) / 4 + s12 * s12);
    Vector u = vec({s12, lambda - s11});
    u /= u.norm();

    const auto result = sif_embed(corpus, table, a);
    EXPECT_NEAR(std::abs(result.component.dot(u)), 1.0, 1e-12);
    for (int i = 0; i < 3; ++i) {
        const Vector xi = x.row(i).transpose();
        const Vector want = xi - u * u.dot(xi);
        const Vector got = result.embedding.set.at(std::string(1, static_cast<char>('a' + i)));
        EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(result.component.dot(got), 0.0, 1e-12);
    }
}

TEST(Sif, LargeALimitIsUniformAverage) {
    const auto table = hand_table();
    const Corpus corpus({problem("a", "coin die"), problem("b", "urn coin urn")}, ConceptDictionary({"x"}));
    for (const auto& p : corpus.problems()) {
        const Vector sif = sif_weighted_average(p, corpus, table, 1e12);
        const Vector uniform = word_average(p, corpus, table, Weighting::uniform);
        EXPECT_LT((sif - uniform).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Sif, RemovalIsIdempotentAndOrthogonal) {
    Rng rng(40);
    std::vector<std::string> vocab;
    for (int i = 0; i < 30; ++i) vocab.push_back("w" + std::to_string(i));
    const auto table = WordVectorTable::random(vocab, 8, 3);
    std::vector<Problem> problems;
    for (int i = 0; i < 25; ++i) {
        std::string text;
        for (int k = 0; k < 6; ++k) text += vocab[rng.below(vocab.size())] + " ";
        problems.push_back(problem("p" + std::to_string(i), text));
    }
    const Corpus corpus(problems, ConceptDictionary({"x"}));
    for (double a : kSifGrid) {
        const auto result = sif_embed(corpus, table, a);
        EXPECT_NEAR(result.component.norm(), 1.0, 1e-12);
        for (const auto& [id, e] : result.embedding.set.vectors()) {
            EXPECT_NEAR(result.component.dot(e), 0.0, 1e-10);
            EXPECT_LT((remove_projection(e, result.component) - e).cwiseAbs().maxCoeff(), 1e-10);
        }
    }
}

TEST(Sif, Errors) {
    const auto table = hand_table();
    const Corpus one({problem("a", "coin")}, ConceptDictionary({"x"}));
    EXPECT_THROW(sif_embed(one, table), Error);
    const Corpus two({problem("a", "coin"), problem("b", "die")}, ConceptDictionary({"x"}));
    EXPECT_THROW(sif_embed(two, table, 0.0), Error);
}

TEST(Cooccurrence, HandCounts) {
    const auto single = cooccurrence(concept_corpus({{0, 1}}, 3));
    EXPECT_EQ(single(0, 1), 1);
    EXPECT_EQ(single(1, 0), 1);
    EXPECT_EQ(single.sum(), 2);

    const auto m = cooccurrence(concept_corpus({{0, 1}, {0, 1, 2}}, 3));
    EXPECT_EQ(m(0, 1), 2);
    EXPECT_EQ(m(0, 2), 1);
    EXPECT_EQ(m(1, 2), 1);
    EXPECT_EQ(m(2, 1), 1);
    EXPECT_EQ(m.diagonal().sum(), 0);

    EXPECT_EQ(cooccurrence(concept_corpus({{0}, {1}, {2}, {}}, 3)).sum(), 0);
}

TEST(Ppmi, HandBuiltMatchesBruteForce) {
    CooccurrenceMatrix m(3, 3);
    m << 0, 4, 1,
         4, 0, 0,
         1, 0, 0;
    for (auto variant : {PpmiVariant::standard(), PpmiVariant::shifted(), PpmiVariant::cds()}) {
        const Matrix got = ppmi(m, variant);
        const Matrix want = brute_force_ppmi(m, variant);
        EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-12);
    }
    // D = 10, w = (0.5, 0.4, 0.1): entry (1,2) ratio 4 / (10 * 0.5 * 0.4) = 2
    EXPECT_NEAR(ppmi(m)(0, 1), std::log(2.0), 1e-15);
    EXPECT_EQ(ppmi(m, PpmiVariant::shifted())(0, 1), 0.0);
}

TEST(Ppmi, EdgeCases) {
    EXPECT_EQ(ppmi(CooccurrenceMatrix::Zero(4, 4)).cwiseAbs().maxCoeff(), 0.0);
    Rng rng(8);
    const auto m = random_cooccurrence(rng, 5, 10);
    EXPECT_EQ(ppmi(m, PpmiVariant::shifted(1e9)).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(ppmi(m, PpmiVariant::shifted(0.5)), Error);
    CooccurrenceMatrix asym = CooccurrenceMatrix::Zero(2, 2);
    asym(0, 1) = 1;
    EXPECT_THROW(ppmi(asym), Error);
}

TEST(Ppmi, RandomCorporaProperties) {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const auto m = random_cooccurrence(rng, 2 + rng.below(5), 1 + rng.below(12));
        for (auto variant : {PpmiVariant::standard(), PpmiVariant::shifted(), PpmiVariant::shifted(1.5),
                             PpmiVariant::cds()}) {
            const Matrix p = ppmi(m, variant);
            EXPECT_LT((p - brute_force_ppmi(m, variant)).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_GE(p.minCoeff(), 0.0);
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                for (Eigen::Index j = 0; j < m.cols(); ++j) {
                    if (m(i, j) == 0) EXPECT_EQ(p(i, j), 0.0);
                }
            }
            if (variant.kind != PpmiVariant::Kind::cds) EXPECT_TRUE(p == p.transpose());
        }
    }
}

TEST(Svd, DiagonalCase) {
    Matrix p(2, 2);
    p << 3, 0,
         0, 1;
    const auto svd = signed_svd(p);
    EXPECT_NEAR(svd.s[0], 3, 1e-15);
    EXPECT_NEAR(svd.s[1], 1, 1e-15);
    EXPECT_LT((svd_concept_embed(p, 2, SvdFlavor::eig) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((svd_concept_embed(p, 2, SvdFlavor::sub) - p).cwiseAbs().maxCoeff(), 1e-15);
    Matrix wandc(2, 2);
    wandc << 4, 0,
             0, 2;
    EXPECT_LT((svd_concept_embed(p, 2, SvdFlavor::wandc) - wandc).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(svd_concept_embed(p, 1, SvdFlavor::eig).cols(), 1);
    EXPECT_THROW(svd_concept_embed(p, 0, SvdFlavor::eig), Error);
    EXPECT_THROW(svd_concept_embed(p, 3, SvdFlavor::eig), Error);
}

TEST(Svd, ReconstructionAndSignConvention) {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(6));
        Matrix a(n, n);
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(-1, 1);
        const Matrix p = a + a.transpose();
        const auto svd = signed_svd(p);
        EXPECT_LT((svd.u * svd.s.asDiagonal() * svd.v.transpose() - p).cwiseAbs().maxCoeff(), 1e-8);
        for (Eigen::Index k = 0; k < n; ++k) {
            Eigen::Index arg;
            svd.u.col(k).cwiseAbs().maxCoeff(&arg);
            EXPECT_GT(svd.u(arg, k), 0.0);
        }
        const auto again = signed_svd(p);
        EXPECT_TRUE(again.u == svd.u);
        // Rows of U S keep the inner products of the rows of P.
        const Matrix us = svd_concept_embed(p, static_cast<std::size_t>(n), SvdFlavor::sub);
        EXPECT_LT((us * us.transpose() - p * p.transpose()).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Svd, MatchesEigendecompositionOnSymmetricInput) {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix a(4, 4);
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(-1, 1);
        const Matrix p = a + a.transpose();

        Eigen::SelfAdjointEigenSolver<Matrix> eig(p);
        std::vector<Eigen::Index> order{0, 1, 2, 3};
        std::sort(order.begin(), order.end(), [&](auto x, auto y) {
            return std::abs(eig.eigenvalues()[x]) > std::abs(eig.eigenvalues()[y]);
        });
        Matrix want(4, 2);
        for (int k = 0; k < 2; ++k) {
            Vector v = eig.eigenvectors().col(order[k]);
            Eigen::Index arg;
            v.cwiseAbs().maxCoeff(&arg);
            if (v[arg] < 0) v = -v;
            want.col(k) = v * std::abs(eig.eigenvalues()[order[k]]);
        }
        EXPECT_LT((svd_concept_embed(p, 2, SvdFlavor::sub) - want).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(SvdProbEmbed, Pipeline) {
    const auto corpus = concept_corpus({{0, 1}, {0, 1}, {1, 2}, {2, 3}, {3}, {}}, 4);
    const auto out = svd_prob_embed(corpus, SvdFlavor::sub, 2);
    EXPECT_EQ(out.set.method(), Method::svd_sub);
    EXPECT_EQ(out.set.dim(), 2u);
    EXPECT_FALSE(out.set.contains("p5"));
    EXPECT_EQ(method_for(SvdFlavor::cds), Method::svd_cds);
    EXPECT_EQ(svd_flavor_for(Method::svd_wandc), SvdFlavor::wandc);
    EXPECT_THROW(svd_flavor_for(Method::sif), Error);
    EXPECT_EQ(default_svd_dim(4), 4u);
    EXPECT_EQ(default_svd_dim(96), 10u);
}
