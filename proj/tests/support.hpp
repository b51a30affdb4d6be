#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "conceptvec/corpus.hpp"
#include "conceptvec/rng.hpp"

namespace cvec::testing {

inline Problem problem(std::string id, std::string text, std::vector<ConceptId> concepts = {}) {
    Problem p;
    p.id = std::move(id);
    p.raw_text = std::move(text);
    p.words = tokenize(p.raw_text);
    p.concepts = std::move(concepts);
    return p;
}

inline ConceptDictionary numbered_dictionary(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("c" + std::to_string(i));
    return ConceptDictionary(names);
}

/// Corpus from concept sets alone; every problem gets the text "x".
inline Corpus concept_corpus(const std::vector<std::vector<ConceptId>>& sets, std::size_t n_concepts) {
    std::vector<Problem> problems;
    for (std::size_t i = 0; i < sets.size(); ++i) problems.push_back(problem("p" + std::to_string(i), "x", sets[i]));
    return Corpus(std::move(problems), numbered_dictionary(n_concepts));
}

/// Random concept sets: M problems, each a random subset of {0..N-1} of
/// size 0..max_size (duplicates are drawn and then collapsed by Corpus).
inline std::vector<std::vector<ConceptId>> random_sets(Rng& rng, std::size_t m, std::size_t n, std::size_t max_size) {
    std::vector<std::vector<ConceptId>> sets(m);
    for (auto& s : sets) {
        const auto k = rng.below(max_size + 1);
        for (std::uint64_t j = 0; j < k; ++j) s.push_back(rng.below(n));
    }
    return sets;
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("conceptvec_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace cvec::testing
