#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "conceptvec/common.hpp"

namespace cvec {

/// Lowercased tokens. A backslash followed by letters (a markup command such
/// as \choose) is kept as one token; every other non-alphanumeric ASCII byte
/// separates tokens. Bytes >= 0x80 are treated as word characters.
std::vector<std::string> tokenize(std::string_view raw_text);

struct Problem {
    std::string id;
    std::string raw_text;
    std::vector<std::string> words;
    std::vector<ConceptId> concepts;  // sorted, unique
};

class ConceptDictionary {
public:
    ConceptDictionary() = default;
    explicit ConceptDictionary(std::vector<std::string> names);

    std::size_t size() const { return names_.size(); }
    bool empty() const { return names_.empty(); }
    const std::string& name(ConceptId c) const;
    const std::vector<std::string>& names() const { return names_; }
    std::optional<ConceptId> find(std::string_view name) const;
    /// Throws if the name is unknown.
    ConceptId index(std::string_view name) const;

    bool operator==(const ConceptDictionary& other) const { return names_ == other.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, ConceptId> index_;
};

struct ConceptRule {
    std::string concept_name;
    std::vector<std::string> patterns;
};

/// Rules compiled against a dictionary. A pattern prefixed with "(?i)" is
/// compiled case-insensitively; all other matching is case-sensitive.
class RuleSet {
public:
    RuleSet(const std::vector<ConceptRule>& rules, const ConceptDictionary& dictionary);

    /// Sorted concept ids whose rule has at least one pattern matching
    /// somewhere in raw_text.
    std::vector<ConceptId> extract(std::string_view raw_text) const;

    std::size_t dictionary_size() const { return dictionary_size_; }

private:
    struct Compiled {
        ConceptId concept_id;
        std::vector<std::regex> patterns;
    };
    std::vector<Compiled> rules_;
    std::size_t dictionary_size_ = 0;
};

std::vector<ConceptId> extract_concepts(const Problem& problem, const RuleSet& rules);

/// Dictionary in order of first appearance in the rule list.
ConceptDictionary dictionary_from_rules(const std::vector<ConceptRule>& rules);

std::vector<ConceptRule> load_rules(const std::filesystem::path& path);
void save_rules(const std::vector<ConceptRule>& rules, const std::filesystem::path& path);

/// Immutable problem collection with document/word statistics.
class Corpus {
public:
    Corpus() = default;
    Corpus(std::vector<Problem> problems, ConceptDictionary dictionary);

    const std::vector<Problem>& problems() const { return problems_; }
    const ConceptDictionary& dictionary() const { return dictionary_; }
    std::size_t size() const { return problems_.size(); }
    std::size_t num_concepts() const { return dictionary_.size(); }

    /// f_c: number of problems whose concept set contains c.
    const std::vector<std::size_t>& concept_freq() const { return concept_freq_; }
    /// Occurrence count of each token over all problems.
    const std::map<std::string, std::size_t>& word_freq() const { return word_freq_; }
    /// count / total token count.
    const std::map<std::string, double>& word_prob() const { return word_prob_; }
    std::size_t total_tokens() const { return total_tokens_; }

    const Problem* find(std::string_view id) const;
    const Problem& at(std::string_view id) const;

    /// Ids of problems with an empty concept set.
    std::vector<std::string> unlabeled() const;

    /// Same problems with concept sets replaced (index-aligned with problems()).
    Corpus with_concepts(std::vector<std::vector<ConceptId>> concepts) const;

private:
    std::vector<Problem> problems_;
    ConceptDictionary dictionary_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::vector<std::size_t> concept_freq_;
    std::map<std::string, std::size_t> word_freq_;
    std::map<std::string, double> word_prob_;
    std::size_t total_tokens_ = 0;
};

/// Runs the rule set over every problem.
Corpus annotate(const Corpus& corpus, const RuleSet& rules);

/// Reads the line-delimited corpus format. Concept sets come from the
/// records' "concepts" field when present. The dictionary is `dictionary`
/// if given, else the file's header record, else the concept names in order
/// of first appearance.
Corpus load_corpus(const std::filesystem::path& path,
                   const std::optional<ConceptDictionary>& dictionary = std::nullopt);
Corpus parse_corpus(std::istream& in, const std::optional<ConceptDictionary>& dictionary = std::nullopt);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path, bool with_concepts = true);
void write_corpus(const Corpus& corpus, std::ostream& out, bool with_concepts = true);

struct WordSelection {
    std::set<std::string> keep;

    bool contains(const std::string& token) const { return keep.count(token) != 0; }
};

WordSelection load_word_selection(const std::filesystem::path& path);
void save_word_selection(const WordSelection& selection, const std::filesystem::path& path);

/// Drops tokens not in the corpus vocabulary; returns the dropped ones.
std::vector<std::string> restrict_to_vocabulary(WordSelection& selection, const Corpus& corpus);

struct Triplet {
    std::string a, b, c;

    bool operator==(const Triplet&) const = default;
};

std::vector<Triplet> load_triplets(const std::filesystem::path& path);
void save_triplets(const std::vector<Triplet>& triplets, const std::filesystem::path& path);

}  // namespace cvec
