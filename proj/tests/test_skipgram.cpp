#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "conceptvec/pipeline.hpp"
#include "conceptvec/skipgram.hpp"
#include "conceptvec/synthetic.hpp"
#include "gradcheck.hpp"
#include "support.hpp"

using namespace cvec;
using cvec::testing::concept_corpus;
using cvec::testing::TempDir;

namespace {

std::size_t brute_force_pair_count(const Corpus& corpus) {
    std::size_t n = 0;
    for (const auto& p : corpus.problems()) {
        for (ConceptId a : p.concepts) {
            for (ConceptId b : p.concepts) n += a != b ? 1 : 0;
        }
    }
    return n;
}

SkipGramModel toy_model() {
    Matrix w_in(3, 2);
    w_in << 1, 0,
            0, 1,
            1, 1;
    Matrix w_out(2, 3);
    w_out << 1, 0, -1,
             0, 2, 1;
    return SkipGramModel(w_in, w_out);
}

}  // namespace

TEST(MakePairs, PaperExample) {
    const auto corpus = concept_corpus({{1, 2, 5}}, 6);
    const auto pairs = make_pairs(corpus);
    std::set<std::pair<ConceptId, ConceptId>> got;
    for (const auto& p : pairs) got.insert({p.input, p.output});
    const std::set<std::pair<ConceptId, ConceptId>> want{{1, 2}, {1, 5}, {2, 1}, {2, 5}, {5, 1}, {5, 2}};
    EXPECT_EQ(pairs.size(), 6u);
    EXPECT_EQ(got, want);
}

TEST(MakePairs, Counts) {
    EXPECT_TRUE(make_pairs(concept_corpus({{3}}, 4)).empty());
    EXPECT_EQ(make_pairs(concept_corpus({{0, 1}, {0, 1, 2}}, 3)).size(), 8u);
}

TEST(MakePairs, CountIdentityOnRandomCorpora) {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const auto corpus = concept_corpus(cvec::testing::random_sets(rng, 1 + rng.below(15), 7, 5), 7);
        EXPECT_EQ(make_pairs(corpus).size(), brute_force_pair_count(corpus));
    }
}

TEST(Forward, HandComputedSoftmax) {
    const auto model = toy_model();
    // softmax(1, 0, -1) and softmax(1, 2, 0)
    const double big = 0.66524095577482190, mid = 0.24472847105479764, small = 0.09003057317038046;
    const Vector p0 = model.forward(0);
    EXPECT_NEAR(p0[0], big, 1e-15);
    EXPECT_NEAR(p0[1], mid, 1e-15);
    EXPECT_NEAR(p0[2], small, 1e-15);
    const Vector p2 = model.forward(2);
    EXPECT_NEAR(p2[0], mid, 1e-15);
    EXPECT_NEAR(p2[1], big, 1e-15);
    EXPECT_NEAR(p2[2], small, 1e-15);
    EXPECT_NEAR(model.loss({0, 2}), -std::log(small), 1e-13);
    EXPECT_THROW(model.forward(3), Error);
}

TEST(Forward, ZeroOutputWeightsGiveUniform) {
    TrainConfig cfg;
    cfg.seed = 3;
    const auto model = SkipGramModel::initialize(7, cfg);
    for (ConceptId c = 0; c < 7; ++c) {
        const Vector p = model.forward(c);
        for (Eigen::Index j = 0; j < p.size(); ++j) EXPECT_DOUBLE_EQ(p[j], 1.0 / 7);
    }
}

TEST(Forward, SumsToOne) {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(8));
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(5));
        Matrix w_in(n, d), w_out(d, n);
        for (Eigen::Index i = 0; i < w_in.size(); ++i) w_in.data()[i] = rng.uniform(-5, 5);
        for (Eigen::Index i = 0; i < w_out.size(); ++i) w_out.data()[i] = rng.uniform(-5, 5);
        const SkipGramModel model(w_in, w_out);
        for (ConceptId c = 0; c < static_cast<ConceptId>(n); ++c) {
            const Vector p = model.forward(c);
            EXPECT_NEAR(p.sum(), 1.0, 1e-9);
            EXPECT_GT(p.minCoeff(), 0.0);
        }
    }
}

TEST(Gradient, MatchesCentralDifferences) {
    Rng rng(23);
    for (int trial = 0; trial < 25; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(4));
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(3));
        Matrix w_in(n, d), w_out(d, n);
        for (Eigen::Index i = 0; i < w_in.size(); ++i) w_in.data()[i] = rng.uniform(-1, 1);
        for (Eigen::Index i = 0; i < w_out.size(); ++i) w_out.data()[i] = rng.uniform(-1, 1);
        const auto in = static_cast<ConceptId>(rng.below(n));
        auto out = static_cast<ConceptId>(rng.below(n - 1));
        if (out >= in) ++out;
        const TrainingPair pair{in, out};
        const auto g = loss_gradient(SkipGramModel(w_in, w_out), pair);
        auto objective = [&] { return SkipGramModel(w_in, w_out).loss(pair); };
        EXPECT_LT(cvec::testing::max_relative_error(w_in, g.input, objective), 1e-4);
        EXPECT_LT(cvec::testing::max_relative_error(w_out, g.output, objective), 1e-4);
    }
}

TEST(Train, PlantedCooccurrence) {
    // 0 and 1 always appear together with shared partners 4 and 5; 2 never meets 0.
    const auto corpus = concept_corpus({{0, 1, 4}, {0, 1, 5}, {0, 1, 4, 5}, {0, 1}, {2, 3, 6}, {2, 6}, {3, 6}, {2, 3}}, 7);
    TrainConfig cfg;
    cfg.seed = 1;
    const auto model = train(make_pairs(corpus), 7, cfg);
    const Vector p = model.forward(0);
    EXPECT_GT(p[1], p[2]);
    EXPECT_GT(cosine(model.concept_vector(0), model.concept_vector(1)),
              cosine(model.concept_vector(0), model.concept_vector(2)));
}

TEST(Train, SinglePairConverges) {
    const std::vector<TrainingPair> pairs{{0, 1}};
    TrainConfig cfg;
    cfg.seed = 2;
    cfg.epochs = 20000;
    cfg.learning_rate = 0.5;
    const auto model = train(pairs, 2, cfg);
    EXPECT_GT(model.forward(0)[1], 0.99);
}

TEST(Train, Preconditions) {
    TrainConfig cfg;
    EXPECT_THROW(train({}, 3, cfg), Error);
    const std::vector<TrainingPair> out_of_range{{0, 5}};
    EXPECT_THROW(train(out_of_range, 3, cfg), Error);
    const std::vector<TrainingPair> self{{1, 1}};
    EXPECT_THROW(train(self, 3, cfg), Error);
    cfg.dim = 0;
    const std::vector<TrainingPair> ok{{0, 1}};
    EXPECT_THROW(train(ok, 3, cfg), Error);
}

TEST(Train, DeterministicAndBelowInitialLoss) {
    const auto syn = generate_synthetic_corpus(9, 40, ClusterSpec::even(9, 3), 5);
    const auto pairs = make_pairs(syn.corpus);
    TrainConfig cfg;
    cfg.seed = 8;
    TrainingTrace trace;
    const auto a = train(pairs, 9, cfg, &trace);
    const auto b = train(pairs, 9, cfg);
    EXPECT_TRUE(a == b);
    ASSERT_EQ(trace.epoch_losses.size(), cfg.epochs);
    EXPECT_NEAR(trace.epoch_losses.back(), a.mean_loss(pairs), 1e-12);
    for (double l : trace.epoch_losses) EXPECT_LT(l, trace.initial_loss);
    EXPECT_LT(trace.epoch_losses.back(), 0.5 * trace.initial_loss);
}

// Per-pair updates jitter around the loss floor at the default rate; with a
// small rate every epoch lowers the full-set loss.
TEST(Train, EpochLossNonIncreasingAtSmallRate) {
    const auto syn = generate_synthetic_corpus(9, 40, ClusterSpec::even(9, 3), 5);
    const auto pairs = make_pairs(syn.corpus);
    TrainConfig cfg;
    cfg.seed = 8;
    cfg.learning_rate = 0.005;
    TrainingTrace trace;
    train(pairs, 9, cfg, &trace);
    double prev = trace.initial_loss;
    for (double l : trace.epoch_losses) {
        EXPECT_LE(l, prev + 1e-6);
        prev = l;
    }
}

TEST(ConceptVector, Accessor) {
    TrainConfig cfg;
    cfg.seed = 4;
    const auto a = SkipGramModel::initialize(5, cfg);
    const auto b = SkipGramModel::initialize(5, cfg);
    EXPECT_EQ(a.concept_vector(0).size(), 10);
    EXPECT_TRUE(a.concept_vector(0) == b.concept_vector(0));
    EXPECT_TRUE(a.concept_vector(2) == Vector(a.input_weights().row(2).transpose()));
    EXPECT_LE(a.input_weights().cwiseAbs().maxCoeff(), 0.05);
    EXPECT_THROW(a.concept_vector(5), Error);
}

TEST(Nearest, TiesAndErrors) {
    Matrix w_in(4, 2);
    w_in << 1, 0,
            1, 0,
            0, 1,
            1, 0;
    const SkipGramModel model(w_in, Matrix::Zero(2, 4));
    EXPECT_TRUE(nearest_concepts(model, 0, 0).empty());
    const auto top = nearest_concepts(model, 0, 3);
    ASSERT_EQ(top.size(), 3u);
    EXPECT_EQ(top[0].first, 1u);
    EXPECT_DOUBLE_EQ(top[0].second, 1.0);
    EXPECT_EQ(top[1].first, 3u);
    EXPECT_EQ(top[2].first, 2u);
    EXPECT_THROW(nearest_concepts(model, 0, 4), Error);
}

TEST(Nearest, ClusterPurity) {
    const auto syn = generate_synthetic_corpus(12, 80, ClusterSpec::even(12, 3), 21);
    TrainConfig cfg;
    cfg.seed = 6;
    const auto model = train_concept_model(syn.corpus, cfg);
    for (ConceptId c = 0; c < 12; ++c) {
        const auto top = nearest_concepts(model, c, 1);
        EXPECT_EQ(syn.cluster_of[top[0].first], syn.cluster_of[c]) << "concept " << c;
    }
}

TEST(ModelIo, RoundTripIsBitExact) {
    TempDir dir;
    const auto corpus = concept_corpus({{0, 1}, {1, 2}, {0, 2}}, 3);
    TrainConfig cfg;
    cfg.seed = 12;
    cfg.dim = 4;
    cfg.epochs = 20;
    const auto model = train_concept_model(corpus, cfg);
    save_model(model, dir / "m.bin");
    const auto back = load_model(dir / "m.bin");
    EXPECT_TRUE(back == model);
    EXPECT_EQ(back.config().seed, 12u);
    EXPECT_EQ(back.config().epochs, 20u);
    EXPECT_EQ(std::filesystem::file_size(dir / "m.bin"), 8u + 4 * 8 + 3 * 8 + 2 * 3 * 4 * 8);

    export_concept_vectors(model, corpus.dictionary(), dir / "v.tsv");
    std::ifstream in(dir / "v.tsv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line.substr(0, 3), "c0\t");
    EXPECT_EQ(std::count(line.begin(), line.end(), '\t'), 4);
}

TEST(ModelIo, RejectsGarbage) {
    TempDir dir;
    {
        std::ofstream out(dir / "bad.bin");
        out << "not a model";
    }
    EXPECT_THROW(load_model(dir / "bad.bin"), Error);
    EXPECT_THROW(load_model(dir / "missing.bin"), Error);
}
