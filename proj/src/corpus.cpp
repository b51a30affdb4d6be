#include "conceptvec/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cvec {

using nlohmann::json;

namespace {

bool is_ascii_alnum(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_ascii_alpha(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_word_byte(unsigned char c) { return is_ascii_alnum(c) || c >= 0x80; }

char lower(unsigned char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

std::vector<ConceptId> sorted_unique(std::vector<ConceptId> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view raw_text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) tokens.push_back(std::move(current));
        current.clear();
    };
    for (std::size_t i = 0; i < raw_text.size(); ++i) {
        const auto c = static_cast<unsigned char>(raw_text[i]);
        if (c == '\\' && i + 1 < raw_text.size() &&
            is_ascii_alpha(static_cast<unsigned char>(raw_text[i + 1]))) {
            flush();
            current.push_back('\\');
            while (i + 1 < raw_text.size() && is_ascii_alpha(static_cast<unsigned char>(raw_text[i + 1]))) {
                current.push_back(lower(static_cast<unsigned char>(raw_text[++i])));
            }
            flush();
        } else if (is_word_byte(c)) {
            current.push_back(lower(c));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

// ---------------------------------------------------------------------------

ConceptDictionary::ConceptDictionary(std::vector<std::string> names) : names_(std::move(names)) {
    index_.reserve(names_.size());
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i].empty()) throw Error("empty concept name at position " + std::to_string(i));
        if (!index_.emplace(names_[i], i).second) throw Error("duplicate concept name: " + names_[i]);
    }
}

const std::string& ConceptDictionary::name(ConceptId c) const {
    if (c >= names_.size()) throw Error("concept index out of range: " + std::to_string(c));
    return names_[c];
}

std::optional<ConceptId> ConceptDictionary::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

ConceptId ConceptDictionary::index(std::string_view name) const {
    if (auto c = find(name)) return *c;
    throw Error("unknown concept: " + std::string(name));
}

// ---------------------------------------------------------------------------

RuleSet::RuleSet(const std::vector<ConceptRule>& rules, const ConceptDictionary& dictionary)
    : dictionary_size_(dictionary.size()) {
    for (const auto& rule : rules) {
        auto id = dictionary.find(rule.concept_name);
        if (!id) throw Error("rule refers to unknown concept: " + rule.concept_name);
        Compiled compiled{*id, {}};
        for (const auto& pattern : rule.patterns) {
            auto flags = std::regex::ECMAScript | std::regex::optimize;
            std::string body = pattern;
            if (body.rfind("(?i)", 0) == 0) {
                flags |= std::regex::icase;
                body.erase(0, 4);
            }
            try {
                compiled.patterns.emplace_back(body, flags);
            } catch (const std::regex_error& e) {
                throw Error("rule for " + rule.concept_name + ": bad pattern '" + pattern + "': " + e.what());
            }
        }
        rules_.push_back(std::move(compiled));
    }
}

std::vector<ConceptId> RuleSet::extract(std::string_view raw_text) const {
    std::vector<ConceptId> found;
    for (const auto& rule : rules_) {
        for (const auto& re : rule.patterns) {
            if (std::regex_search(raw_text.begin(), raw_text.end(), re)) {
                found.push_back(rule.concept_id);
                break;
            }
        }
    }
    return sorted_unique(std::move(found));
}

std::vector<ConceptId> extract_concepts(const Problem& problem, const RuleSet& rules) {
    return rules.extract(problem.raw_text);
}

ConceptDictionary dictionary_from_rules(const std::vector<ConceptRule>& rules) {
    std::vector<std::string> names;
    std::set<std::string> seen;
    for (const auto& rule : rules) {
        if (seen.insert(rule.concept_name).second) names.push_back(rule.concept_name);
    }
    return ConceptDictionary(std::move(names));
}

std::vector<ConceptRule> load_rules(const std::filesystem::path& path) {
    auto in = open_input(path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
    if (!doc.is_array()) throw Error(path.string() + ": rules file must be a JSON array");
    std::vector<ConceptRule> rules;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& rec = doc[i];
        if (!rec.is_object() || !rec.contains("concept") || !rec.contains("patterns") ||
            !rec["concept"].is_string() || !rec["patterns"].is_array()) {
            throw Error(path.string() + ": rule " + std::to_string(i) + " needs {concept, patterns[]}");
        }
        ConceptRule rule;
        rule.concept_name = rec["concept"].get<std::string>();
        for (const auto& p : rec["patterns"]) {
            if (!p.is_string()) throw Error(path.string() + ": rule " + std::to_string(i) + " has a non-string pattern");
            rule.patterns.push_back(p.get<std::string>());
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

void save_rules(const std::vector<ConceptRule>& rules, const std::filesystem::path& path) {
    json doc = json::array();
    for (const auto& rule : rules) doc.push_back({{"concept", rule.concept_name}, {"patterns", rule.patterns}});
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

Corpus::Corpus(std::vector<Problem> problems, ConceptDictionary dictionary)
    : problems_(std::move(problems)), dictionary_(std::move(dictionary)) {
    concept_freq_.assign(dictionary_.size(), 0);
    by_id_.reserve(problems_.size());
    for (std::size_t i = 0; i < problems_.size(); ++i) {
        auto& p = problems_[i];
        if (p.id.empty()) throw Error("problem " + std::to_string(i) + " has an empty id");
        if (!by_id_.emplace(p.id, i).second) throw Error("duplicate problem id: " + p.id);
        p.concepts = sorted_unique(std::move(p.concepts));
        for (ConceptId c : p.concepts) {
            if (c >= dictionary_.size()) {
                throw Error("problem " + p.id + ": concept index " + std::to_string(c) + " outside dictionary");
            }
            ++concept_freq_[c];
        }
        for (const auto& w : p.words) ++word_freq_[w];
        total_tokens_ += p.words.size();
    }
    for (const auto& [w, n] : word_freq_) {
        word_prob_[w] = static_cast<double>(n) / static_cast<double>(total_tokens_);
    }
}

const Problem* Corpus::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &problems_[it->second];
}

const Problem& Corpus::at(std::string_view id) const {
    if (const auto* p = find(id)) return *p;
    throw Error("unknown problem id: " + std::string(id));
}

std::vector<std::string> Corpus::unlabeled() const {
    std::vector<std::string> ids;
    for (const auto& p : problems_) {
        if (p.concepts.empty()) ids.push_back(p.id);
    }
    return ids;
}

Corpus Corpus::with_concepts(std::vector<std::vector<ConceptId>> concepts) const {
    if (concepts.size() != problems_.size()) throw Error("concept list does not match problem count");
    auto problems = problems_;
    for (std::size_t i = 0; i < problems.size(); ++i) problems[i].concepts = std::move(concepts[i]);
    return Corpus(std::move(problems), dictionary_);
}

Corpus annotate(const Corpus& corpus, const RuleSet& rules) {
    if (rules.dictionary_size() != corpus.num_concepts()) {
        throw Error("rule set was compiled against a different dictionary");
    }
    std::vector<std::vector<ConceptId>> concepts;
    concepts.reserve(corpus.size());
    for (const auto& p : corpus.problems()) concepts.push_back(extract_concepts(p, rules));
    return corpus.with_concepts(std::move(concepts));
}

// ---------------------------------------------------------------------------

Corpus parse_corpus(std::istream& in, const std::optional<ConceptDictionary>& dictionary) {
    struct Record {
        std::size_t line;
        Problem problem;
        std::vector<std::string> concept_names;
    };
    std::vector<Record> records;
    std::optional<std::vector<std::string>> header_names;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception&) {
            throw Error("line " + std::to_string(line_no) + ": malformed record");
        }
        if (!rec.is_object()) throw Error("line " + std::to_string(line_no) + ": record is not an object");
        if (rec.contains("dictionary")) {
            if (!records.empty() || header_names) {
                throw Error("line " + std::to_string(line_no) + ": dictionary header must be the first record");
            }
            if (!rec["dictionary"].is_array()) throw Error("line " + std::to_string(line_no) + ": bad dictionary header");
            std::vector<std::string> names;
            for (const auto& n : rec["dictionary"]) {
                if (!n.is_string()) throw Error("line " + std::to_string(line_no) + ": bad dictionary header");
                names.push_back(n.get<std::string>());
            }
            header_names = std::move(names);
            continue;
        }
        if (!rec.contains("id") || !rec["id"].is_string() || !rec.contains("text") || !rec["text"].is_string()) {
            throw Error("line " + std::to_string(line_no) + ": record needs string fields id and text");
        }
        Record r{line_no, {}, {}};
        r.problem.id = rec["id"].get<std::string>();
        r.problem.raw_text = rec["text"].get<std::string>();
        r.problem.words = tokenize(r.problem.raw_text);
        if (rec.contains("concepts")) {
            if (!rec["concepts"].is_array()) throw Error("line " + std::to_string(line_no) + ": concepts must be a list");
            for (const auto& n : rec["concepts"]) {
                if (!n.is_string()) throw Error("line " + std::to_string(line_no) + ": concept names must be strings");
                r.concept_names.push_back(n.get<std::string>());
            }
        }
        records.push_back(std::move(r));
    }

    ConceptDictionary dict;
    if (dictionary) {
        dict = *dictionary;
    } else if (header_names) {
        dict = ConceptDictionary(*header_names);
    } else {
        std::vector<std::string> names;
        std::set<std::string> seen;
        for (const auto& r : records) {
            for (const auto& n : r.concept_names) {
                if (seen.insert(n).second) names.push_back(n);
            }
        }
        dict = ConceptDictionary(std::move(names));
    }

    std::set<std::string> ids;
    std::vector<Problem> problems;
    problems.reserve(records.size());
    for (auto& r : records) {
        if (!ids.insert(r.problem.id).second) {
            throw Error("line " + std::to_string(r.line) + ": duplicate id " + r.problem.id);
        }
        for (const auto& n : r.concept_names) {
            auto c = dict.find(n);
            if (!c) throw Error("line " + std::to_string(r.line) + ": unknown concept " + n);
            r.problem.concepts.push_back(*c);
        }
        problems.push_back(std::move(r.problem));
    }
    return Corpus(std::move(problems), std::move(dict));
}

Corpus load_corpus(const std::filesystem::path& path, const std::optional<ConceptDictionary>& dictionary) {
    auto in = open_input(path);
    try {
        return parse_corpus(in, dictionary);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void write_corpus(const Corpus& corpus, std::ostream& out, bool with_concepts) {
    if (with_concepts) out << json{{"dictionary", corpus.dictionary().names()}}.dump() << '\n';
    for (const auto& p : corpus.problems()) {
        json rec{{"id", p.id}, {"text", p.raw_text}};
        if (with_concepts) {
            std::vector<std::string> names;
            for (ConceptId c : p.concepts) names.push_back(corpus.dictionary().name(c));
            rec["concepts"] = names;
        }
        out << rec.dump() << '\n';
    }
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path, bool with_concepts) {
    auto out = open_output(path);
    write_corpus(corpus, out, with_concepts);
}

// ---------------------------------------------------------------------------

WordSelection load_word_selection(const std::filesystem::path& path) {
    auto in = open_input(path);
    WordSelection selection;
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (t.empty()) continue;
        std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return lower(c); });
        selection.keep.insert(t);
    }
    return selection;
}

void save_word_selection(const WordSelection& selection, const std::filesystem::path& path) {
    auto out = open_output(path);
    for (const auto& w : selection.keep) out << w << '\n';
}

std::vector<std::string> restrict_to_vocabulary(WordSelection& selection, const Corpus& corpus) {
    std::vector<std::string> dropped;
    for (auto it = selection.keep.begin(); it != selection.keep.end();) {
        if (corpus.word_freq().count(*it) == 0) {
            dropped.push_back(*it);
            it = selection.keep.erase(it);
        } else {
            ++it;
        }
    }
    return dropped;
}

// ---------------------------------------------------------------------------

std::vector<Triplet> load_triplets(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<Triplet> triplets;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, '\t')) fields.push_back(f);
        // Columns after C are free-form notes.
        if (fields.size() < 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
            throw Error(path.string() + ": line " + std::to_string(line_no) + ": expected A<TAB>B<TAB>C");
        }
        Triplet t{fields[0], fields[1], fields[2]};
        if (t.a == t.b || t.a == t.c || t.b == t.c) {
            throw Error(path.string() + ": line " + std::to_string(line_no) + ": triplet ids must be distinct");
        }
        triplets.push_back(std::move(t));
    }
    return triplets;
}

void save_triplets(const std::vector<Triplet>& triplets, const std::filesystem::path& path) {
    auto out = open_output(path);
    for (const auto& t : triplets) out << t.a << '\t' << t.b << '\t' << t.c << '\n';
}

}  // namespace cvec
