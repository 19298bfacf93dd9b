// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "cssm/embedding.hpp"
#include "cssm/text.hpp"

namespace cssm {

/// Parameters of the window salience model.
///
/// A fixed-width window of `window_width` tokens slides over the document
/// with stride 1. Inside a window, a query term's salience is the largest
/// cosine similarity plus `alpha` times the mean of the top-K similarities,
/// where K defaults to max(1, floor(ln L) + 1) and may be overridden by
/// setting `top_k` >= 1.
struct SalienceParams {
    int window_width = 30;  // L
    double alpha = 0.1;
    int top_k = 0;  // 0 => derived from window_width

    int effective_top_k() const;
    void validate() const;  // throws std::invalid_argument on bad bounds
};

/// Softmax aggregation weights over query terms; sums to 1.
struct QueryTermWeights {
    std::vector<double> g;
};

/// Joint salience of one window position.
struct WindowScore {
    std::size_t start = 0;
    double score = 0.0;
};

/// Result of scanning a document: the maximal window (ties broken toward
/// the smallest start) and, on request, every window.
struct DocumentSalience {
    WindowScore best;
    std::vector<WindowScore> windows;
};

/// The n largest values in descending order. When fewer than n values
/// exist, 0.0 padding joins the candidate set before selection, so the
/// result stays descending and a zero can outrank all-negative input.
/// n < 1 is an error.
std::vector<double> top_n_max(std::span<const double> values, int n);

/// Per-term window salience: S = S(1) + alpha * (sum of top-K) / K, with
/// the top-K taken from top_n_max (zero-padded). The slice holds the
/// similarity values of one query term inside one window.
double term_window_salience(std::span<const double> window_values,
                            const SalienceParams& params);

/// Softmax over squared vector magnitudes: g_i proportional to
/// exp(|w_i|^2), computed with max-subtraction so magnitudes up to
/// |w|^2 ~ 700 stay finite. OOV terms enter with |w|^2 = 0.
QueryTermWeights query_term_weights(const Query& query, const EmbeddingTable& table);

/// Scans every window start p in {0, ..., max(0, doc_len - L)} (a document
/// shorter than L forms exactly one window covering it) and returns the
/// window maximizing sum_i g_i * S_i(p). Incremental sliding top-K kernel;
/// produces results bit-identical to reference::document_salience.
DocumentSalience document_salience(const SimilarityProfile& profile,
                                   const QueryTermWeights& weights,
                                   const SalienceParams& params,
                                   bool keep_all_windows = false);

/// One row of explain output: the similarity of every query term at one
/// document position, flagged when the position falls inside the best
/// window.
struct ExplainRecord {
    std::size_t position = 0;
    std::string term;
    std::vector<double> sims;
    bool in_best_window = false;
};

std::vector<ExplainRecord> explain_profile(const Query& query, const Document& doc,
                                           const EmbeddingTable& table,
                                           const SalienceParams& params);

/// TSV rendering with header `pos<TAB>term<TAB>s_q1...s_qn<TAB>in_best_window`.
std::string render_explain(const Query& query, const std::vector<ExplainRecord>& records);

namespace reference {

/// Serial reference implementation: recomputes every window from scratch
/// through top_n_max / term_window_salience. Kept as the oracle for the
/// optimized kernel and as the baseline of the salience benchmark.
DocumentSalience document_salience(const SimilarityProfile& profile,
                                   const QueryTermWeights& weights,
                                   const SalienceParams& params,
                                   bool keep_all_windows = false);

}  // namespace reference

}  // namespace cssm
