#include <gtest/gtest.h>

#include <sstream>

#include "conceptvec/pipeline.hpp"
#include "conceptvec/synthetic.hpp"
#include "conceptvec/triplet.hpp"
#include "support.hpp"

using namespace cvec;

namespace {

Vector v2(double x, double y) {
    Vector v(2);
    v << x, y;
    return v;
}

EvalReport report_with_gaps(std::initializer_list<std::pair<double, bool>> gaps) {
    EvalReport r;
    for (const auto& [gap, correct] : gaps) r.records.push_back({{"a", "b", "c"}, 0, 0, gap, correct});
    r.total = r.records.size();
    return r;
}

std::size_t histogram_total(const std::vector<HistogramBin>& bins) {
    std::size_t n = 0;
    for (const auto& b : bins) n += b.count;
    return n;
}

}  // namespace

TEST(EvalTriplets, IdenticalAndOrthogonal) {
    EmbeddingSet set(Method::prob2vec, 2);
    set.insert("a", v2(1, 0));
    set.insert("b", v2(2, 0));
    set.insert("c", v2(0, 1));
    const std::vector<Triplet> ts{{"a", "b", "c"}};
    const auto r = eval_triplets(set, ts);
    EXPECT_EQ(r.correct, 1u);
    EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
    EXPECT_DOUBLE_EQ(r.records[0].gap, 1.0);
    EXPECT_EQ(r.method, "prob2vec");
}

TEST(EvalTriplets, TieIsAnError) {
    EmbeddingSet set(Method::sif, 2);
    set.insert("a", v2(1, 1));
    set.insert("b", v2(1, 0));
    set.insert("c", v2(1, 0));
    const std::vector<Triplet> ts{{"a", "b", "c"}, {"a", "c", "b"}};
    const auto r = eval_triplets(set, ts);
    EXPECT_EQ(r.correct, 0u);
    EXPECT_EQ(r.accuracy, 0.0);
}

TEST(EvalTriplets, MissingIdsAreListed) {
    EmbeddingSet set(Method::sif, 2);
    set.insert("a", v2(1, 1));
    const std::vector<Triplet> ts{{"a", "x", "y"}, {"z", "a", "x"}};
    try {
        eval_triplets(set, ts);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        const std::string msg = e.what();
        for (const char* id : {"x", "y", "z"}) EXPECT_NE(msg.find(std::string(" ") + id), std::string::npos) << msg;
    }
}

TEST(EvalTriplets, ReferenceSuppliesGaps) {
    EmbeddingSet set(Method::sif, 2), ref(Method::prob2vec, 2);
    set.insert("a", v2(1, 0));
    set.insert("b", v2(0, 1));
    set.insert("c", v2(1, 0.1));
    ref.insert("a", v2(1, 0));
    ref.insert("b", v2(1, 0));
    ref.insert("c", v2(0, 1));
    const std::vector<Triplet> ts{{"a", "b", "c"}};
    const auto r = eval_triplets(set, ts, &ref);
    EXPECT_FALSE(r.records[0].correct);
    EXPECT_DOUBLE_EQ(r.records[0].gap, 1.0);
}

TEST(EvalTriplets, SwapMapsAccuracyToComplement) {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        EmbeddingSet set(Method::prob2vec, 3);
        for (int i = 0; i < 12; ++i) {
            Vector v(3);
            for (int k = 0; k < 3; ++k) v[k] = rng.uniform(-1, 1);
            set.insert("p" + std::to_string(i), v);
        }
        std::vector<Triplet> ts, swapped;
        for (int k = 0; k < 30; ++k) {
            const auto a = rng.below(12), b = (a + 1 + rng.below(11)) % 12;
            auto c = rng.below(12);
            while (c == a || c == b) c = rng.below(12);
            ts.push_back({"p" + std::to_string(a), "p" + std::to_string(b), "p" + std::to_string(c)});
            swapped.push_back({ts.back().a, ts.back().c, ts.back().b});
        }
        const auto r = eval_triplets(set, ts);
        const auto s = eval_triplets(set, swapped);
        EXPECT_EQ(r.correct + s.correct, r.total);
        EXPECT_DOUBLE_EQ(r.accuracy + s.accuracy, 1.0);
        EXPECT_EQ(histogram_total(r.histogram), r.total);
    }
}

TEST(EvalTriplets, ScaleInvariant) {
    const auto syn = generate_synthetic_corpus(9, 40, ClusterSpec::even(9, 3), 4);
    TrainConfig cfg;
    cfg.seed = 4;
    cfg.epochs = 30;
    MethodOptions opt;
    opt.skipgram = cfg;
    const auto set = build_embedding(Method::prob2vec, syn.corpus, opt).set;
    const auto base = eval_triplets(set, syn.triplets);
    for (double f : {1e-6, 0.3, 1e6}) EXPECT_EQ(eval_triplets(set.scaled(f), syn.triplets).correct, base.correct);
}

TEST(GapHistogram, HandBinning) {
    const auto r = report_with_gaps({{0.05, true}, {0.15, false}, {0.30, true}});
    const auto bins = gap_histogram(r);
    ASSERT_EQ(bins.size(), 2u);
    EXPECT_NEAR(bins[0].lower, 0.01, 1e-15);
    EXPECT_EQ(bins[0].count, 2u);
    EXPECT_EQ(bins[0].errors, 1u);
    EXPECT_NEAR(bins[1].lower, 0.21, 1e-15);
    EXPECT_EQ(bins[1].count, 1u);
    EXPECT_EQ(bins[1].errors, 0u);
}

TEST(GapHistogram, EdgesGapsAndEmpty) {
    EXPECT_TRUE(gap_histogram(EvalReport{}).empty());
    const auto same = gap_histogram(report_with_gaps({{0.4, true}, {0.4, false}, {0.4, true}}));
    ASSERT_EQ(same.size(), 1u);
    EXPECT_EQ(same[0].count, 3u);

    // A gap on a lower edge belongs to that bin; unoccupied bins in between are kept.
    const auto bins = gap_histogram(report_with_gaps({{0.25, true}, {-0.5, false}, {0.75, true}}), 0.25, 0.0);
    ASSERT_EQ(bins.size(), 6u);
    EXPECT_EQ(bins[0].lower, -0.5);
    EXPECT_EQ(bins[0].errors, 1u);
    EXPECT_EQ(bins[1].count + bins[2].count, 0u);
    EXPECT_EQ(bins[4].count, 0u);
    EXPECT_EQ(bins[3].lower, 0.25);
    EXPECT_EQ(bins[3].count, 1u);
    EXPECT_EQ(bins[5].lower, 0.75);
    EXPECT_EQ(bins[5].count, 1u);
    EXPECT_THROW(gap_histogram(EvalReport{}, 0.0), Error);
}

TEST(GapHistogram, TotalsConserved) {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        EvalReport r;
        const auto n = rng.below(40);
        for (std::uint64_t i = 0; i < n; ++i) r.records.push_back({{"a", "b", "c"}, 0, 0, rng.uniform(-2, 2), rng.below(2) == 1});
        for (double w : {0.01, 0.2, 0.37, 5.0}) EXPECT_EQ(histogram_total(gap_histogram(r, w, rng.uniform(-1, 1))), n);
    }
}

TEST(CompareMethods, PlantedCorpusTable) {
    const auto syn = generate_synthetic_corpus(12, 60, ClusterSpec::even(12, 3), 9);
    std::vector<std::string> tokens;
    for (const auto& [w, _] : syn.corpus.word_freq()) tokens.push_back(w);
    const auto table = WordVectorTable::random(tokens, 8, 1);
    MethodOptions opt;
    opt.skipgram.seed = 3;
    opt.word_vectors = &table;
    const std::vector<Method> methods{Method::prob2vec, Method::word_avg_uniform, Method::svd_sub};
    const auto rows = compare_methods(syn.corpus, syn.triplets, methods, opt);
    ASSERT_EQ(rows.size(), 3u);
    ASSERT_TRUE(rows[0].report.has_value());
    EXPECT_GE(rows[0].report->accuracy, 0.95);

    const auto text = render_accuracy_table(rows);
    EXPECT_NE(text.find("prob2vec"), std::string::npos);
    EXPECT_NE(text.find("%"), std::string::npos);
    const auto json = to_json(rows);
    EXPECT_EQ(json.size(), 3u);
    EXPECT_EQ(json[0]["method"], "prob2vec");

    // Word methods without a table end up as rows with an error, not a throw.
    MethodOptions bare;
    bare.skipgram.seed = 3;
    const std::vector<Method> sif_only{Method::sif};
    const auto failed = compare_methods(syn.corpus, syn.triplets, sif_only, bare);
    EXPECT_FALSE(failed[0].report.has_value());
    EXPECT_FALSE(failed[0].error.empty());
}

TEST(Histogram, TsvLayout) {
    std::ostringstream out;
    write_histogram(out, gap_histogram(report_with_gaps({{0.05, false}})));
    EXPECT_EQ(out.str(), "0.01\t1\t1\n");
}
