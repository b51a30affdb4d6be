#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "conceptvec/baselines.hpp"
#include "conceptvec/compose.hpp"
#include "conceptvec/corpus.hpp"
#include "conceptvec/imbalanced.hpp"
#include "conceptvec/manifest.hpp"
#include "conceptvec/pipeline.hpp"
#include "conceptvec/rng.hpp"
#include "conceptvec/skipgram.hpp"
#include "conceptvec/synthetic.hpp"
#include "conceptvec/triplet.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cvec;

namespace {

// Prefixes loader errors with the file that caused them.
template <typename F>
auto reading(const fs::path& path, F&& load) {
    try {
        return load(path);
    } catch (const std::exception& e) {
        const std::string msg = e.what();
        if (msg.rfind(path.string(), 0) == 0) throw;
        throw Error(path.string() + ": " + msg);
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

void require_seed(const std::optional<std::uint64_t>& seed) {
    if (!seed) throw Error("--seed is required");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// ---------------------------------------------------------------------------

struct ExtractArgs {
    fs::path corpus, rules, out;
    std::optional<std::uint64_t> seed;
};

void run_extract(const ExtractArgs& a) {
    require_seed(a.seed);
    const auto rules = reading(a.rules, [](const fs::path& p) { return load_rules(p); });
    const auto dict = dictionary_from_rules(rules);
    const RuleSet rule_set(rules, dict);
    const auto corpus = reading(a.corpus, [&](const fs::path& p) { return load_corpus(p, dict); });
    const Corpus annotated = annotate(corpus, rule_set);
    save_corpus(annotated, a.out);

    std::size_t labeled = 0;
    for (const auto& p : annotated.problems()) labeled += p.concepts.empty() ? 0 : 1;
    std::cout << "annotated " << annotated.size() << " problems, " << labeled << " with concepts, "
              << annotated.num_concepts() << " concepts\n";
    for (const auto& id : annotated.unlabeled()) std::cerr << "warning: no concept matched in " << id << '\n';

    RunManifest("extract").seed(*a.seed).input("corpus", a.corpus).input("rules", a.rules).output("corpus", a.out)
        .write_beside(a.out);
}

struct TrainArgs {
    fs::path corpus, out, export_path;
    TrainConfig config;
    std::optional<std::uint64_t> seed;
};

void run_train(TrainArgs a) {
    require_seed(a.seed);
    a.config.seed = *a.seed;
    const auto corpus = reading(a.corpus, [](const fs::path& p) { return load_corpus(p); });
    TrainingTrace trace;
    const auto model = train_concept_model(corpus, a.config, &trace);
    save_model(model, a.out);
    if (!a.export_path.empty()) export_concept_vectors(model, corpus.dictionary(), a.export_path);
    std::cout << "trained " << corpus.num_concepts() << " concept vectors, dim " << a.config.dim << ", loss "
              << format_double(trace.initial_loss) << " -> "
              << format_double(trace.epoch_losses.empty() ? trace.initial_loss : trace.epoch_losses.back()) << '\n';

    RunManifest m("train");
    m.seed(*a.seed)
        .input("corpus", a.corpus)
        .config("dim", a.config.dim)
        .config("epochs", a.config.epochs)
        .config("learning_rate", a.config.learning_rate)
        .config("min_learning_rate", a.config.min_learning_rate)
        .config("init_scale", a.config.resolved_init_scale())
        .output("model", a.out);
    if (!a.export_path.empty()) m.output("vectors", a.export_path);
    m.write_beside(a.out);
}

struct EmbedArgs {
    fs::path corpus, out, model, word_vectors, select_words;
    std::string method = "prob2vec";
    std::string oov = "skip";
    double a = kSifDefaultA;
    double k_shift = 5.0;
    std::optional<std::size_t> dim;
    std::size_t epochs = TrainConfig{}.epochs;
    std::optional<std::uint64_t> seed;
};

void run_embed(const EmbedArgs& a) {
    require_seed(a.seed);
    const Method method = method_from_string(a.method);
    const auto corpus = reading(a.corpus, [](const fs::path& p) { return load_corpus(p); });
    RunManifest manifest("embed");
    manifest.seed(*a.seed).input("corpus", a.corpus).config("method", a.method);

    MethodOptions opts;
    opts.skipgram.seed = *a.seed;
    opts.skipgram.epochs = a.epochs;
    opts.sif_a = a.a;
    opts.k_shift = a.k_shift;
    opts.svd_dim = a.dim;

    std::optional<SkipGramModel> model;
    std::optional<WordVectorTable> table;
    std::optional<WordSelection> selection;
    if (!a.model.empty()) {
        model = reading(a.model, [](const fs::path& p) { return load_model(p); });
        opts.model = &*model;
        manifest.input("model", a.model);
    } else if (method == Method::prob2vec) {
        if (a.dim) opts.skipgram.dim = *a.dim;
        manifest.config("dim", opts.skipgram.dim).config("epochs", opts.skipgram.epochs);
    }
    if (!a.word_vectors.empty()) {
        OovPolicy policy;
        if (a.oov == "skip") {
            policy = OovPolicy::skip;
        } else if (a.oov == "random") {
            policy = OovPolicy::random;
        } else {
            throw Error("--oov must be skip or random, got " + a.oov);
        }
        table = reading(a.word_vectors, [&](const fs::path& p) { return load_word_vectors(p, policy, *a.seed); });
        opts.word_vectors = &*table;
        manifest.input("word_vectors", a.word_vectors).config("oov", a.oov);
    }
    if (!a.select_words.empty()) {
        selection = reading(a.select_words, [](const fs::path& p) { return load_word_selection(p); });
        opts.selection = &*selection;
        manifest.input("selection", a.select_words);
    }
    if (method == Method::sif) manifest.config("a", a.a);
    if (method == Method::svd_shifted) manifest.config("k_shift", a.k_shift);
    if (a.dim) manifest.config("dim", *a.dim);

    const auto embedding = build_embedding(method, corpus, opts);
    save_embeddings(embedding.set, a.out);
    if (!embedding.skipped.empty()) {
        std::cerr << "warning: " << embedding.skipped.size() << " problem(s) not embedded:";
        for (const auto& s : embedding.skipped) std::cerr << ' ' << s.id << " (" << s.reason << ')';
        std::cerr << '\n';
    }
    std::cout << "embedded " << embedding.set.size() << " of " << corpus.size() << " problems with " << a.method
              << '\n';
    manifest.output("embeddings", a.out).write_beside(a.out);
}

struct SimilarArgs {
    fs::path embeddings;
    std::string id;
    std::size_t k = 5;
};

void run_similar(const SimilarArgs& a) {
    const auto set = reading(a.embeddings, [](const fs::path& p) { return load_embeddings(p); });
    for (const auto& [id, sim] : rank_similar(set, a.id, a.k)) std::cout << id << '\t' << format_double(sim) << '\n';
}

struct EvalArgs {
    std::vector<fs::path> embeddings;
    fs::path triplets, reference, out;
    double bin_width = kDefaultBinWidth;
    double origin = kDefaultBinOrigin;
    std::optional<std::uint64_t> seed;
};

void run_eval(const EvalArgs& a) {
    if (!a.out.empty()) require_seed(a.seed);
    const auto triplets = reading(a.triplets, [](const fs::path& p) { return load_triplets(p); });
    std::optional<EmbeddingSet> reference;
    if (!a.reference.empty()) reference = reading(a.reference, [](const fs::path& p) { return load_embeddings(p); });

    std::vector<MethodAccuracy> rows;
    json reports = json::array();
    std::vector<std::vector<HistogramBin>> histograms;
    for (const auto& path : a.embeddings) {
        const auto set = reading(path, [](const fs::path& p) { return load_embeddings(p); });
        // Unembeddable triplet problems abort the evaluation.
        auto report = reading(path, [&](const fs::path&) {
            return eval_triplets(set, triplets, reference ? &*reference : nullptr);
        });
        report.histogram = gap_histogram(report, a.bin_width, a.origin);
        reports.push_back(to_json(report));
        histograms.push_back(report.histogram);
        rows.push_back({report.method, std::move(report), {}});
    }
    std::cout << render_accuracy_table(rows);

    if (a.out.empty()) return;
    json doc{{"table", to_json(rows)}, {"reports", reports}};
    write_text(a.out, doc.dump(2) + "\n");
    RunManifest m("eval");
    m.seed(*a.seed).input("triplets", a.triplets).config("bin_width", a.bin_width).config("origin", a.origin);
    if (reference) m.input("reference", a.reference);
    for (std::size_t i = 0; i < a.embeddings.size(); ++i) {
        m.input("embeddings." + std::to_string(i), a.embeddings[i]);
        fs::path hist = a.out;
        hist += "." + rows[i].method + ".hist.tsv";
        std::ostringstream text;
        text << "# bin_lower\tcount\terrors\n";
        write_histogram(text, histograms[i]);
        write_text(hist, text.str());
        m.output("histogram." + rows[i].method, hist);
    }
    m.output("report", a.out).write_beside(a.out);
}

struct BenchArgs {
    fs::path corpus, regime_file, select_words, word_vectors, out;
    std::string concepts;
    std::vector<std::string> regimes;
    std::size_t rounds = 100;
    std::size_t dim = LayerSizes{}.embedding_dim;
    double test_fraction = 0.25;
    double threshold = 0.5;
    std::optional<std::uint64_t> seed;
};

void run_bench(const BenchArgs& a) {
    require_seed(a.seed);
    const auto corpus = reading(a.corpus, [](const fs::path& p) { return load_corpus(p); });
    RunManifest manifest("bench-imbalanced");
    manifest.seed(*a.seed).input("corpus", a.corpus);

    std::vector<ConceptId> concepts;
    if (a.concepts.empty()) {
        for (ConceptId c = 0; c < corpus.num_concepts(); ++c) concepts.push_back(c);
    } else {
        for (const auto& name : split_list(a.concepts)) concepts.push_back(corpus.dictionary().index(name));
    }
    if (concepts.empty()) throw Error(a.corpus.string() + ": no concepts to benchmark");

    std::vector<Regime> regimes;
    if (!a.regime_file.empty()) {
        regimes = load_regimes(a.regime_file);
        manifest.input("regimes", a.regime_file);
    }
    for (const auto& name : a.regimes) regimes.push_back(regime_preset(name));
    if (regimes.empty()) regimes = regime_presets();

    std::optional<WordSelection> selection;
    std::optional<WordVectorTable> table;
    BenchConfig cfg;
    cfg.rounds = a.rounds;
    cfg.seed = *a.seed;
    cfg.test_fraction = a.test_fraction;
    cfg.threshold = a.threshold;
    cfg.layers.embedding_dim = a.dim;
    if (!a.select_words.empty()) {
        selection = reading(a.select_words, [](const fs::path& p) { return load_word_selection(p); });
        cfg.selection = &*selection;
        manifest.input("selection", a.select_words);
    }
    if (!a.word_vectors.empty()) {
        table = reading(a.word_vectors, [](const fs::path& p) { return load_word_vectors(p); });
        cfg.pretrained = &*table;
        manifest.input("word_vectors", a.word_vectors);
    }

    const auto rows = regime_comparison(corpus, concepts, regimes, cfg);
    std::cout << render_regime_table(corpus, concepts, rows);

    if (a.out.empty()) return;
    json doc{{"rounds", a.rounds},
             {"test_fraction", a.test_fraction},
             {"threshold", a.threshold},
             {"results", to_json(corpus, concepts, rows)}};
    write_text(a.out, doc.dump(2) + "\n");
    json regime_json = json::array();
    for (const auto& r : regimes) regime_json.push_back(to_json(r));
    json concept_names = json::array();
    for (ConceptId c : concepts) concept_names.push_back(corpus.dictionary().name(c));
    manifest.config("concepts", concept_names)
        .config("regimes", regime_json)
        .config("rounds", a.rounds)
        .config("dim", a.dim)
        .config("test_fraction", a.test_fraction)
        .config("threshold", a.threshold)
        .output("report", a.out)
        .write_beside(a.out);
}

struct SynthArgs {
    std::string kind = "clusters";
    fs::path out_dir;
    std::size_t concepts = 12;
    std::size_t problems = 60;
    std::size_t clusters = 3;
    std::size_t triplets = 50;
    std::size_t word_dim = 50;
    std::size_t positives = 12;
    std::size_t negatives = 600;
    std::optional<std::uint64_t> seed;
};

std::vector<std::string> corpus_tokens(const Corpus& corpus) {
    std::vector<std::string> tokens;
    for (const auto& [w, _] : corpus.word_freq()) tokens.push_back(w);
    return tokens;
}

void run_synth(const SynthArgs& a) {
    require_seed(a.seed);
    fs::create_directories(a.out_dir);
    RunManifest manifest("synth");
    manifest.seed(*a.seed).config("kind", a.kind).config("word_dim", a.word_dim);
    const fs::path corpus_path = a.out_dir / "corpus.jsonl";
    const fs::path words_path = a.out_dir / "words.vec";
    const fs::path selection_path = a.out_dir / "selection.txt";

    if (a.kind == "clusters") {
        ClusterSpec spec = ClusterSpec::even(a.concepts, a.clusters);
        spec.n_triplets = a.triplets;
        const auto syn = generate_synthetic_corpus(a.concepts, a.problems, spec, *a.seed);
        const fs::path planted_path = a.out_dir / "planted.jsonl";
        const fs::path rules_path = a.out_dir / "rules.json";
        const fs::path triplets_path = a.out_dir / "triplets.tsv";
        save_corpus(syn.corpus, corpus_path, false);
        save_corpus(syn.corpus, planted_path, true);
        save_rules(syn.rules, rules_path);
        save_triplets(syn.triplets, triplets_path);
        save_word_selection(syn.selection, selection_path);
        save_word_vectors(WordVectorTable::random(corpus_tokens(syn.corpus), a.word_dim, mix_seed(*a.seed, 1)),
                          words_path);
        manifest.config("concepts", a.concepts)
            .config("problems", a.problems)
            .config("clusters", a.clusters)
            .config("triplets", a.triplets)
            .output("planted", planted_path)
            .output("rules", rules_path)
            .output("triplets", triplets_path);
        std::cout << "wrote " << syn.corpus.size() << " problems, " << syn.rules.size() << " rules, "
                  << syn.triplets.size() << " triplets to " << a.out_dir.string() << '\n';
    } else if (a.kind == "imbalanced") {
        ImbalancedSpec spec;
        spec.positives = a.positives;
        spec.negatives = a.negatives;
        const auto bench = generate_imbalanced_benchmark(spec, *a.seed);
        save_corpus(bench.corpus, corpus_path, true);
        save_word_selection(bench.selection, selection_path);
        save_word_vectors(WordVectorTable::random(corpus_tokens(bench.corpus), a.word_dim, mix_seed(*a.seed, 1)),
                          words_path);
        manifest.config("positives", a.positives).config("negatives", a.negatives);
        std::cout << "wrote " << bench.corpus.size() << " problems (" << a.positives << " positive) to "
                  << a.out_dir.string() << '\n';
    } else {
        throw Error("--kind must be clusters or imbalanced, got " + a.kind);
    }
    manifest.output("corpus", corpus_path).output("selection", selection_path).output("word_vectors", words_path);
    manifest.write_beside(a.out_dir / "synth");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Concept-level problem embeddings and evaluation harnesses"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    ExtractArgs ex;
    auto* extract = app.add_subcommand("extract", "annotate a corpus with rule-based concepts");
    extract->add_option("--corpus", ex.corpus, "problem corpus (JSONL)")->required();
    extract->add_option("--rules", ex.rules, "concept rules (JSON)")->required();
    extract->add_option("--out", ex.out, "annotated corpus")->required();
    extract->add_option("--seed", ex.seed);

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "train skip-gram concept vectors");
    train->add_option("--corpus", tr.corpus, "annotated corpus")->required();
    train->add_option("--out", tr.out, "model file")->required();
    train->add_option("--export", tr.export_path, "also write concept vectors as text");
    train->add_option("--dim", tr.config.dim)->capture_default_str();
    train->add_option("--epochs", tr.config.epochs)->capture_default_str();
    train->add_option("--lr", tr.config.learning_rate)->capture_default_str();
    train->add_option("--min-lr", tr.config.min_learning_rate)->capture_default_str();
    train->add_option("--seed", tr.seed);

    EmbedArgs em;
    auto* embed = app.add_subcommand("embed", "embed every problem with one method");
    embed->add_option("--corpus", em.corpus)->required();
    embed->add_option("--out", em.out, "embedding file")->required();
    embed->add_option("--method", em.method)->capture_default_str();
    embed->add_option("--model", em.model, "trained concept model (prob2vec)");
    embed->add_option("--word-vectors", em.word_vectors, "word vector table (word averages, sif)");
    embed->add_option("--oov", em.oov, "skip or random")->capture_default_str();
    embed->add_option("--select-words", em.select_words, "keep only these words");
    embed->add_option("--a", em.a, "SIF smoothing")->capture_default_str();
    embed->add_option("--k-shift", em.k_shift, "shifted PPMI k")->capture_default_str();
    embed->add_option("--dim", em.dim, "embedding dimension (svd, prob2vec without --model)");
    embed->add_option("--epochs", em.epochs, "skip-gram epochs without --model")->capture_default_str();
    embed->add_option("--seed", em.seed);

    SimilarArgs si;
    auto* similar = app.add_subcommand("similar", "most similar problems to one problem");
    similar->add_option("--embeddings", si.embeddings)->required();
    similar->add_option("--id", si.id)->required();
    similar->add_option("--k", si.k)->capture_default_str();

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "triplet accuracy of one or more embeddings");
    eval->add_option("--embeddings", ev.embeddings, "embedding file, repeatable")->required();
    eval->add_option("--triplets", ev.triplets)->required();
    eval->add_option("--reference", ev.reference, "embedding that defines similarity gaps");
    eval->add_option("--bin-width", ev.bin_width)->capture_default_str();
    eval->add_option("--origin", ev.origin)->capture_default_str();
    eval->add_option("--out", ev.out, "JSON report; histograms go beside it");
    eval->add_option("--seed", ev.seed);

    BenchArgs be;
    auto* bench = app.add_subcommand("bench-imbalanced", "FN/FP of classifier training regimes");
    bench->add_option("--corpus", be.corpus)->required();
    bench->add_option("--concepts", be.concepts, "comma-separated concept names (default all)");
    bench->add_option("--regime", be.regimes, "preset name, repeatable");
    bench->add_option("--regime-file", be.regime_file, "JSON regime list");
    bench->add_option("--rounds", be.rounds)->capture_default_str();
    bench->add_option("--dim", be.dim, "word embedding size")->capture_default_str();
    bench->add_option("--test-fraction", be.test_fraction)->capture_default_str();
    bench->add_option("--threshold", be.threshold)->capture_default_str();
    bench->add_option("--select-words", be.select_words);
    bench->add_option("--word-vectors", be.word_vectors, "pretrained embedding rows");
    bench->add_option("--out", be.out, "JSON report");
    bench->add_option("--seed", be.seed);

    SynthArgs sy;
    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
    synth->add_option("--kind", sy.kind, "clusters or imbalanced")->capture_default_str();
    synth->add_option("--out", sy.out_dir, "output directory")->required();
    synth->add_option("--concepts", sy.concepts)->capture_default_str();
    synth->add_option("--problems", sy.problems)->capture_default_str();
    synth->add_option("--clusters", sy.clusters)->capture_default_str();
    synth->add_option("--triplets", sy.triplets)->capture_default_str();
    synth->add_option("--word-dim", sy.word_dim)->capture_default_str();
    synth->add_option("--positives", sy.positives)->capture_default_str();
    synth->add_option("--negatives", sy.negatives)->capture_default_str();
    synth->add_option("--seed", sy.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*extract) run_extract(ex);
        if (*train) run_train(tr);
        if (*embed) run_embed(em);
        if (*similar) run_similar(si);
        if (*eval) run_eval(ev);
        if (*bench) run_bench(be);
        if (*synth) run_synth(sy);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
