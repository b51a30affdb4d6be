#include "conceptvec/pipeline.hpp"

namespace cvec {

SkipGramModel train_concept_model(const Corpus& corpus, const TrainConfig& config, TrainingTrace* trace) {
    const auto pairs = make_pairs(corpus);
    if (pairs.empty()) throw Error("corpus has no problem with two or more concepts; nothing to train on");
    return train(pairs, corpus.num_concepts(), config, trace);
}

CorpusEmbedding build_embedding(Method method, const Corpus& corpus, const MethodOptions& options) {
    auto need_words = [&]() -> const WordVectorTable& {
        if (!options.word_vectors) throw Error(std::string(to_string(method)) + " needs a word-vector table");
        return *options.word_vectors;
    };
    switch (method) {
        case Method::prob2vec: {
            if (options.model) {
                if (options.model->num_concepts() != corpus.num_concepts()) {
                    throw Error("model has " + std::to_string(options.model->num_concepts()) +
                                " concepts, corpus dictionary has " + std::to_string(corpus.num_concepts()));
                }
                return embed_corpus(corpus, options.model->input_weights(), Method::prob2vec);
            }
            const auto model = train_concept_model(corpus, options.skipgram);
            return embed_corpus(corpus, model.input_weights(), Method::prob2vec);
        }
        case Method::word_avg_uniform:
            return word_average_embed(corpus, need_words(), Weighting::uniform, options.selection);
        case Method::word_avg_weighted:
            return word_average_embed(corpus, need_words(), Weighting::inverse_frequency, options.selection);
        case Method::sif:
            return sif_embed(corpus, need_words(), options.sif_a, options.selection).embedding;
        default: {
            const std::size_t d = options.svd_dim.value_or(default_svd_dim(corpus.num_concepts()));
            return svd_prob_embed(corpus, svd_flavor_for(method), d, options.k_shift);
        }
    }
}

std::vector<MethodAccuracy> compare_methods(const Corpus& corpus, std::span<const Triplet> triplets,
                                            std::span<const Method> methods, const MethodOptions& options) {
    std::vector<MethodAccuracy> rows;
    for (Method m : methods) {
        MethodAccuracy row{std::string(to_string(m)), std::nullopt, {}};
        try {
            const auto embedding = build_embedding(m, corpus, options);
            row.report = eval_triplets(embedding.set, triplets);
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace cvec
