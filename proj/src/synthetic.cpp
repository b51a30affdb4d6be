#include "conceptvec/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

#include "conceptvec/rng.hpp"

namespace cvec {

namespace {

constexpr const char* kFiller[] = {
    "coin",    "die",      "urn",     "ball",    "card",    "deck",     "draw",    "toss",
    "flip",    "roll",     "pick",    "choose",  "student", "class",    "bag",     "box",
    "red",     "blue",     "green",   "white",   "black",   "number",   "value",   "time",
    "wait",    "arrive",   "call",    "light",   "bulb",    "machine",  "factory", "defect",
    "test",    "patient",  "doctor",  "signal",  "channel", "bit",      "error",   "packet",
    "game",    "player",   "win",     "lose",    "bet",     "dollar",   "price",   "stock",
    "rain",    "sunny",    "day",     "week",    "year",    "height",   "weight",  "length",
    "sample",  "survey",   "vote",    "city",    "road",    "car",      "bus",     "queue"};

std::string padded(std::size_t value, std::size_t width) {
    auto s = std::to_string(value);
    if (s.size() < width) s.insert(0, width - s.size(), '0');
    return s;
}

std::size_t digits(std::size_t n) { return n < 10 ? 1 : 1 + digits(n / 10); }

// Footprint markup for a concept: base-4 code over punctuation symbols.
std::string footprint(std::size_t index, std::size_t width) {
    static constexpr char kSymbols[] = {'!', '?', '*', '%'};
    std::string code(width, kSymbols[0]);
    for (std::size_t pos = width; pos-- > 0; index /= 4) code[pos] = kSymbols[index % 4];
    return "[" + code + "]";
}

std::string footprint_pattern(const std::string& mark) {
    std::string pattern;
    for (char ch : mark) {
        if (ch == '[' || ch == ']' || ch == '?' || ch == '*') pattern.push_back('\\');
        pattern.push_back(ch);
    }
    return pattern;
}

std::vector<std::string> filler_vocabulary(std::size_t n) {
    std::vector<std::string> words;
    for (std::size_t i = 0; i < n; ++i) {
        if (i < std::size(kFiller)) {
            words.emplace_back(kFiller[i]);
        } else {
            words.push_back("term" + padded(i, 3));
        }
    }
    return words;
}

template <typename T>
std::vector<T> sample_without_replacement(const std::vector<T>& pool, std::size_t k, Rng& rng) {
    std::vector<T> v = pool;
    k = std::min(k, v.size());
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(v.size() - i));
        std::swap(v[i], v[j]);
    }
    v.resize(k);
    return v;
}

std::size_t overlap(const std::vector<ConceptId>& x, const std::vector<ConceptId>& y) {
    std::size_t n = 0;
    for (ConceptId c : x) n += std::binary_search(y.begin(), y.end(), c) ? 1 : 0;
    return n;
}

std::string join(const std::vector<std::string>& words) {
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out.push_back(' ');
        out += w;
    }
    return out;
}

}  // namespace

ClusterSpec ClusterSpec::even(std::size_t n_concepts, std::size_t k) {
    if (k == 0) throw Error("cluster count must be positive");
    ClusterSpec spec;
    for (std::size_t i = 0; i < k; ++i) spec.sizes.push_back(n_concepts / k + (i < n_concepts % k ? 1 : 0));
    return spec;
}

SyntheticCorpus generate_synthetic_corpus(std::size_t n_concepts, std::size_t n_problems,
                                          const ClusterSpec& spec, std::uint64_t seed) {
    if (n_concepts < 2) throw Error("synthetic corpus needs at least 2 concepts");
    if (n_problems < 3) throw Error("synthetic corpus needs at least 3 problems");
    if (spec.sizes.empty() || std::find(spec.sizes.begin(), spec.sizes.end(), 0) != spec.sizes.end()) {
        throw Error("cluster sizes must be positive");
    }
    if (std::accumulate(spec.sizes.begin(), spec.sizes.end(), std::size_t{0}) != n_concepts) {
        throw Error("cluster sizes do not sum to the concept count");
    }
    if (spec.max_concepts_per_problem == 0) throw Error("max_concepts_per_problem must be positive");
    if (spec.min_words == 0 || spec.min_words > spec.max_words) throw Error("bad word-count range");
    if (spec.vocabulary_size == 0) throw Error("vocabulary_size must be positive");

    Rng rng(seed);
    const std::size_t width = std::max<std::size_t>(2, [&] {
        std::size_t w = 1;
        for (std::size_t cap = 4; cap < n_concepts; cap *= 4) ++w;
        return w;
    }());

    SyntheticCorpus out;
    std::vector<std::string> names;
    std::vector<std::vector<ConceptId>> members(spec.sizes.size());
    for (std::size_t k = 0, c = 0; k < spec.sizes.size(); ++k) {
        for (std::size_t j = 0; j < spec.sizes[k]; ++j, ++c) {
            names.push_back("c" + padded(c, std::max<std::size_t>(2, digits(n_concepts - 1))));
            members[k].push_back(c);
            out.cluster_of.push_back(k);
            out.rules.push_back({names.back(), {footprint_pattern(footprint(c, width))}});
        }
    }

    const auto vocabulary = filler_vocabulary(spec.vocabulary_size);
    for (std::size_t i = 0; i < vocabulary.size(); i += 2) out.selection.keep.insert(vocabulary[i]);

    std::vector<Problem> problems;
    std::vector<std::size_t> problem_cluster;
    const std::size_t id_width = std::max<std::size_t>(3, digits(n_problems - 1));
    for (std::size_t i = 0; i < n_problems; ++i) {
        const std::size_t k = i % spec.sizes.size();
        const std::size_t max_c = std::min(spec.max_concepts_per_problem, members[k].size());
        const std::size_t n_c = 1 + static_cast<std::size_t>(rng.below(max_c));
        auto concepts = sample_without_replacement(members[k], n_c, rng);
        std::sort(concepts.begin(), concepts.end());

        const std::size_t n_words =
            spec.min_words + static_cast<std::size_t>(rng.below(spec.max_words - spec.min_words + 1));
        std::vector<std::string> pieces;
        for (std::size_t w = 0; w < n_words; ++w) pieces.push_back(vocabulary[rng.below(vocabulary.size())]);
        for (ConceptId c : concepts) {
            const std::size_t pos = static_cast<std::size_t>(rng.below(pieces.size() + 1));
            pieces.insert(pieces.begin() + static_cast<std::ptrdiff_t>(pos), "$" + footprint(c, width) + "$");
        }

        Problem p;
        p.id = "p" + padded(i, id_width);
        p.raw_text = join(pieces);
        p.words = tokenize(p.raw_text);
        p.concepts = std::move(concepts);
        problems.push_back(std::move(p));
        problem_cluster.push_back(k);
    }

    const bool multi_cluster = spec.sizes.size() > 1;
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
    const std::size_t max_attempts = 200 * std::max<std::size_t>(spec.n_triplets, 1);
    for (std::size_t attempt = 0; attempt < max_attempts && out.triplets.size() < spec.n_triplets; ++attempt) {
        const std::size_t a = static_cast<std::size_t>(rng.below(n_problems));
        std::vector<std::size_t> bs;
        for (std::size_t j = 0; j < n_problems; ++j) {
            if (j != a && overlap(problems[a].concepts, problems[j].concepts) > 0) bs.push_back(j);
        }
        if (bs.empty()) continue;
        const std::size_t b = bs[rng.below(bs.size())];
        const std::size_t ab = overlap(problems[a].concepts, problems[b].concepts);
        std::vector<std::size_t> cs;
        for (std::size_t j = 0; j < n_problems; ++j) {
            if (j == a || j == b) continue;
            if (multi_cluster && problem_cluster[j] == problem_cluster[a]) continue;
            if (overlap(problems[a].concepts, problems[j].concepts) < ab) cs.push_back(j);
        }
        if (cs.empty()) continue;
        const std::size_t c = cs[rng.below(cs.size())];
        if (!seen.emplace(a, b, c).second) continue;
        out.triplets.push_back({problems[a].id, problems[b].id, problems[c].id});
    }
    if (out.triplets.size() < spec.n_triplets) {
        throw Error("could not draw " + std::to_string(spec.n_triplets) + " distinct triplets from the planted corpus");
    }

    out.corpus = Corpus(std::move(problems), ConceptDictionary(std::move(names)));
    return out;
}

ImbalancedBenchmark generate_imbalanced_benchmark(const ImbalancedSpec& spec, std::uint64_t seed) {
    if (spec.positives < 2) throw Error("imbalanced benchmark needs at least 2 positives");
    if (spec.topics == 0 || spec.signal_vocabulary == 0 || spec.topic_vocabulary == 0 ||
        spec.noise_vocabulary == 0 || spec.subject_words_per_problem < 2) {
        throw Error("imbalanced benchmark vocabulary sizes must be positive");
    }
    if (spec.min_noise_words > spec.max_noise_words) throw Error("bad noise word range");

    Rng rng(seed);
    ImbalancedBenchmark out;
    std::vector<std::string> names{"target"};
    for (std::size_t t = 0; t < spec.topics; ++t) names.push_back("topic" + padded(t, 2));

    std::vector<std::string> signal;
    for (std::size_t i = 0; i < spec.signal_vocabulary; ++i) signal.push_back("sig" + padded(i, 2));
    std::vector<std::vector<std::string>> topic_words(spec.topics);
    for (std::size_t t = 0; t < spec.topics; ++t) {
        for (std::size_t i = 0; i < spec.topic_vocabulary; ++i) {
            topic_words[t].push_back("top" + padded(t, 2) + "w" + padded(i, 2));
        }
    }
    std::vector<std::string> noise;
    for (std::size_t i = 0; i < spec.noise_vocabulary; ++i) noise.push_back("noise" + padded(i, 3));

    for (const auto& w : signal) out.selection.keep.insert(w);
    for (const auto& ws : topic_words) out.selection.keep.insert(ws.begin(), ws.end());

    std::vector<bool> labels(spec.positives, true);
    labels.resize(spec.positives + spec.negatives, false);
    rng.shuffle(labels);

    std::vector<Problem> problems;
    const std::size_t id_width = std::max<std::size_t>(3, digits(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::size_t topic = static_cast<std::size_t>(rng.below(spec.topics));
        std::vector<std::string> words;
        std::size_t n_signal = labels[i] ? (spec.subject_words_per_problem + 1) / 2 : 0;
        for (std::size_t k = 0; k < n_signal; ++k) words.push_back(signal[rng.below(signal.size())]);
        for (std::size_t k = n_signal; k < spec.subject_words_per_problem; ++k) {
            words.push_back(topic_words[topic][rng.below(spec.topic_vocabulary)]);
        }
        const std::size_t n_noise =
            spec.min_noise_words + static_cast<std::size_t>(rng.below(spec.max_noise_words - spec.min_noise_words + 1));
        for (std::size_t k = 0; k < n_noise; ++k) words.push_back(noise[rng.below(noise.size())]);
        rng.shuffle(words);

        Problem p;
        p.id = "q" + padded(i, id_width);
        p.raw_text = join(words);
        p.words = tokenize(p.raw_text);
        p.concepts = {1 + topic};
        if (labels[i]) p.concepts.insert(p.concepts.begin(), 0);
        problems.push_back(std::move(p));
    }
    out.corpus = Corpus(std::move(problems), ConceptDictionary(std::move(names)));
    return out;
}

}  // namespace cvec
