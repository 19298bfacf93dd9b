// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cssm/embedding.hpp"
#include "cssm/index.hpp"
#include "cssm/salience.hpp"
#include "cssm/text.hpp"

namespace cssm {

enum class ScoringMode { bm25_only, cssm_lf, cssm_cw };

ScoringMode parse_mode(std::string_view name);  // "bm25" | "cssm-lf" | "cssm-cw"
std::string mode_name(ScoringMode mode);

/// Fusion parameters. C defaults to e so that ln(co + C) = 1 at co = 0,
/// making co-occurrence weighting a pure amplifier that reduces to the
/// linear function when no query term matches exactly.
struct AggregationParams {
    ScoringMode mode = ScoringMode::cssm_lf;
    double beta = 0.2;
    double C = 2.718281828459045;
    std::size_t rerank_depth = 1000;  // 0 => full: score every document
    void validate() const;
};

/// score = max_salience + beta * bm25
double fuse_linear(double max_salience, double bm25, const AggregationParams& params);

/// score = ln(co + C) * max_salience + beta * bm25
double fuse_co_weighted(double max_salience, double bm25, int co,
                        const AggregationParams& params);

/// Score components kept for explain output.
struct ScoredDocument {
    std::string doc_id;
    double final_score = 0.0;
    double max_salience = 0.0;
    double bm25 = 0.0;
    int co = 0;
};

/// Per-query progress line data: how many candidates were scored and where
/// the top document's best window starts (-1 when no window was computed).
struct QuerySummary {
    std::string query_id;
    std::size_t candidates_scored = 0;
    std::string top_doc_id;
    long long top_best_window_start = -1;
    bool empty_warning = false;
};

/// Ranks one query. Candidates come from the BM25 top `rerank_depth` pool
/// (every document when rerank_depth == 0); each candidate is scored per
/// `mode`, sorted by score descending with ties broken by ascending doc_id,
/// and ranks are assigned 1..n. Candidates are scored in parallel; the
/// result is independent of thread count. A query with zero in-vocabulary
/// and zero indexed terms yields an empty list with `empty_warning` set.
std::vector<RunEntry> rank_query(const Query& query, const Corpus& corpus,
                                 const InvertedIndex& index, const EmbeddingTable* table,
                                 const SalienceParams& salience_params,
                                 const AggregationParams& agg_params,
                                 const std::string& tag, QuerySummary* summary = nullptr);

}  // namespace cssm
