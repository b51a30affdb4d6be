#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "conceptvec/compose.hpp"
#include "conceptvec/corpus.hpp"

namespace cvec {

struct TripletRecord {
    Triplet triplet;
    double sim_ab = 0;
    double sim_ac = 0;
    double gap = 0;  // from the reference set when one is given
    bool correct = false;
};

struct HistogramBin {
    double lower = 0;
    std::size_t count = 0;
    std::size_t errors = 0;
};

struct EvalReport {
    std::string method;
    std::size_t total = 0;
    std::size_t correct = 0;
    double accuracy = 0;  // correct / total, 0 when empty
    std::vector<TripletRecord> records;
    std::vector<HistogramBin> histogram;
};

inline constexpr double kDefaultBinWidth = 0.2;
inline constexpr double kDefaultBinOrigin = 0.01;

/// A triplet is correct iff cos(A,B) > cos(A,C); ties are errors. Gaps come
/// from `reference` when given (correctness still from `set`). Throws listing
/// every triplet id missing from either set.
EvalReport eval_triplets(const EmbeddingSet& set, std::span<const Triplet> triplets,
                         const EmbeddingSet* reference = nullptr);

/// Bins [origin + n w, origin + (n+1) w), contiguous from the lowest to the
/// highest occupied bin.
std::vector<HistogramBin> gap_histogram(const EvalReport& report, double bin_width = kDefaultBinWidth,
                                        double origin = kDefaultBinOrigin);

nlohmann::json to_json(const EvalReport& report);
/// `bin_lower<TAB>count<TAB>errors`
void write_histogram(std::ostream& out, const std::vector<HistogramBin>& histogram);

struct MethodAccuracy {
    std::string method;
    std::optional<EvalReport> report;
    std::string error;  // set when the method could not be evaluated
};

/// Aligned two-column text table, one row per method.
std::string render_accuracy_table(std::span<const MethodAccuracy> rows);
nlohmann::json to_json(std::span<const MethodAccuracy> rows);

}  // namespace cvec
