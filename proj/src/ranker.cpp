// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#include "cssm/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cssm {

ScoringMode parse_mode(std::string_view name) {
    if (name == "bm25") return ScoringMode::bm25_only;
    if (name == "cssm-lf") return ScoringMode::cssm_lf;
    if (name == "cssm-cw") return ScoringMode::cssm_cw;
    throw std::invalid_argument("unknown mode: " + std::string(name) +
                                " (expected bm25, cssm-lf or cssm-cw)");
}

std::string mode_name(ScoringMode mode) {
    switch (mode) {
        case ScoringMode::bm25_only: return "bm25";
        case ScoringMode::cssm_lf: return "cssm-lf";
        case ScoringMode::cssm_cw: return "cssm-cw";
    }
    return "?";
}

void AggregationParams::validate() const {
    if (beta < 0.0) throw std::invalid_argument("beta must be >= 0");
    if (C <= 0.0) throw std::invalid_argument("C must be > 0");
}

double fuse_linear(double max_salience, double bm25, const AggregationParams& params) {
    return max_salience + params.beta * bm25;
}

double fuse_co_weighted(double max_salience, double bm25, int co,
                        const AggregationParams& params) {
    return std::log(co + params.C) * max_salience + params.beta * bm25;
}

namespace {

struct Candidate {
    std::uint32_t ordinal = 0;
    double bm25 = 0.0;
    int co = 0;
    double salience = 0.0;
    long long best_window_start = -1;
    double final_score = 0.0;
};

/// BM25 pool: documents containing at least one query term, ordered by
/// score descending then doc_id ascending, truncated to depth.
std::vector<Candidate> bm25_pool(const InvertedIndex& index, const std::vector<double>& bm25,
                                 const std::vector<int>& co, std::size_t depth) {
    std::vector<Candidate> pool;
    for (std::uint32_t d = 0; d < bm25.size(); ++d) {
        if (co[d] > 0) pool.push_back({d, bm25[d], co[d], 0.0, -1, 0.0});
    }
    std::sort(pool.begin(), pool.end(), [&](const Candidate& a, const Candidate& b) {
        if (a.bm25 != b.bm25) return a.bm25 > b.bm25;
        return index.doc_ids()[a.ordinal] < index.doc_ids()[b.ordinal];
    });
    if (depth > 0 && pool.size() > depth) pool.resize(depth);
    return pool;
}

}  // namespace

std::vector<RunEntry> rank_query(const Query& query, const Corpus& corpus,
                                 const InvertedIndex& index, const EmbeddingTable* table,
                                 const SalienceParams& salience_params,
                                 const AggregationParams& agg_params, const std::string& tag,
                                 QuerySummary* summary) {
    agg_params.validate();
    salience_params.validate();
    const bool semantic = agg_params.mode != ScoringMode::bm25_only;
    if (semantic && table == nullptr) {
        throw std::invalid_argument("mode " + mode_name(agg_params.mode) + " needs embeddings");
    }

    QuerySummary local;
    local.query_id = query.query_id;

    bool any_indexed = false;
    for (const std::string& term : query.terms) {
        if (!index.postings(term).empty()) any_indexed = true;
    }
    bool any_in_vocab = false;
    if (table != nullptr) {
        for (const std::string& term : query.terms) {
            if (table->contains(term)) any_in_vocab = true;
        }
    }
    if (!any_indexed && !any_in_vocab) {
        local.empty_warning = true;
        if (summary) *summary = local;
        return {};
    }

    std::vector<double> bm25 = index.bm25_all(query);
    std::vector<int> co = index.co_all(query);

    std::vector<Candidate> candidates;
    if (agg_params.rerank_depth == 0) {
        candidates.reserve(index.doc_count());
        for (std::uint32_t d = 0; d < index.doc_count(); ++d) {
            candidates.push_back({d, bm25[d], co[d], 0.0, -1, 0.0});
        }
    } else {
        candidates = bm25_pool(index, bm25, co, agg_params.rerank_depth);
    }
    if (candidates.empty()) {
        local.empty_warning = true;
        if (summary) *summary = local;
        return {};
    }

    if (semantic) {
        QueryTermWeights weights = query_term_weights(query, *table);
        const auto n = static_cast<long long>(candidates.size());
        // Each candidate is scored independently; results land in its slot,
        // so the outcome does not depend on thread count or schedule.
#pragma omp parallel for schedule(dynamic, 8)
        for (long long c = 0; c < n; ++c) {
            Candidate& cand = candidates[c];
            const Document* doc = corpus.find(index.doc_ids()[cand.ordinal]);
            if (doc == nullptr) continue;  // validated below, outside the loop
            SimilarityProfile profile = similarity_profile(query, *doc, *table);
            DocumentSalience sal = document_salience(profile, weights, salience_params);
            cand.salience = sal.best.score;
            cand.best_window_start = static_cast<long long>(sal.best.start);
        }
        for (const Candidate& cand : candidates) {
            if (cand.best_window_start < 0) {
                throw std::runtime_error("document " + index.doc_ids()[cand.ordinal] +
                                         " is indexed but missing from the corpus");
            }
        }
    }

    for (Candidate& cand : candidates) {
        switch (agg_params.mode) {
            case ScoringMode::bm25_only:
                cand.final_score = cand.bm25;
                break;
            case ScoringMode::cssm_lf:
                cand.final_score = fuse_linear(cand.salience, cand.bm25, agg_params);
                break;
            case ScoringMode::cssm_cw:
                cand.final_score = fuse_co_weighted(cand.salience, cand.bm25, cand.co, agg_params);
                break;
        }
    }

    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
        if (a.final_score != b.final_score) return a.final_score > b.final_score;
        return index.doc_ids()[a.ordinal] < index.doc_ids()[b.ordinal];
    });

    std::vector<RunEntry> entries;
    entries.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        entries.push_back({query.query_id, index.doc_ids()[candidates[i].ordinal],
                           static_cast<int>(i + 1), candidates[i].final_score, tag});
    }

    local.candidates_scored = candidates.size();
    local.top_doc_id = entries.front().doc_id;
    local.top_best_window_start = candidates.front().best_window_start;
    if (summary) *summary = local;
    return entries;
}

}  // namespace cssm
