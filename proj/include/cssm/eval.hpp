// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "cssm/text.hpp"

namespace cssm {

/// Relevance judgments grouped per query: doc_id -> grade.
using QueryJudgments = std::map<std::string, int>;
using Qrels = std::map<std::string, QueryJudgments>;

Qrels group_qrels(const std::vector<QrelEntry>& entries);

/// Mean over relevant retrieved documents of precision at their rank,
/// divided by the total relevant count R. Unjudged documents count as
/// non-relevant.
double average_precision(const std::vector<std::string>& ranked,
                         const QueryJudgments& judgments);

/// Relevant in top k divided by k; missing slots count as non-relevant.
double precision_at_k(const std::vector<std::string>& ranked,
                      const QueryJudgments& judgments, std::size_t k);

/// Precision at rank R, R = number of relevant documents.
double r_precision(const std::vector<std::string>& ranked,
                   const QueryJudgments& judgments);

/// DCG@k / IDCG@k with linear relevance gain and 1/log2(rank+1) discount,
/// rank starting at 1. The ideal ordering comes from the judgments sorted
/// by grade descending; 0 when IDCG is 0.
double ndcg_at_k(const std::vector<std::string>& ranked,
                 const QueryJudgments& judgments, std::size_t k);

struct MetricRow {
    std::string query_id;
    double map = 0.0;
    double rp = 0.0;
    double p5 = 0.0;
    double p20 = 0.0;
    double ndcg5 = 0.0;
    double ndcg20 = 0.0;
};

/// Per-query metric rows plus their arithmetic mean. Queries without any
/// relevant judgment are excluded entirely (trec_eval convention); queries
/// judged relevant but absent from the run score 0; run queries without
/// judgments are ignored.
struct MetricReport {
    std::vector<MetricRow> per_query;  // sorted by query_id
    MetricRow mean;                    // query_id == "all"
};

MetricReport evaluate(const std::vector<RunEntry>& run, const Qrels& qrels);

/// Fixed-order TSV: for each metric (map, rp, p5, p20, ndcg5, ndcg20) one
/// `metric<TAB>qid<TAB>value` line per query, then the `all` line.
std::string render_report(const MetricReport& report);

}  // namespace cssm
