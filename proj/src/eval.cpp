// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#include "cssm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

namespace cssm {

namespace {

int grade_of(const QueryJudgments& judgments, const std::string& doc_id) {
    auto it = judgments.find(doc_id);
    return it == judgments.end() ? 0 : it->second;  // unjudged counts as non-relevant
}

std::size_t relevant_count(const QueryJudgments& judgments) {
    std::size_t r = 0;
    for (const auto& [doc, grade] : judgments) {
        if (grade > 0) ++r;
    }
    return r;
}

}  // namespace

Qrels group_qrels(const std::vector<QrelEntry>& entries) {
    Qrels qrels;
    for (const QrelEntry& e : entries) qrels[e.query_id][e.doc_id] = e.relevance;
    return qrels;
}

double average_precision(const std::vector<std::string>& ranked,
                         const QueryJudgments& judgments) {
    std::size_t total_relevant = relevant_count(judgments);
    if (total_relevant == 0) return 0.0;

    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (grade_of(judgments, ranked[i]) > 0) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(total_relevant);
}

double precision_at_k(const std::vector<std::string>& ranked,
                      const QueryJudgments& judgments, std::size_t k) {
    if (k == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
        if (grade_of(judgments, ranked[i]) > 0) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(k);
}

double r_precision(const std::vector<std::string>& ranked, const QueryJudgments& judgments) {
    return precision_at_k(ranked, judgments, relevant_count(judgments));
}

double ndcg_at_k(const std::vector<std::string>& ranked, const QueryJudgments& judgments,
                 std::size_t k) {
    double dcg = 0.0;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
        int grade = grade_of(judgments, ranked[i]);
        if (grade > 0) dcg += grade / std::log2(static_cast<double>(i + 2));
    }

    std::vector<int> grades;
    grades.reserve(judgments.size());
    for (const auto& [doc, grade] : judgments) {
        if (grade > 0) grades.push_back(grade);
    }
    std::sort(grades.begin(), grades.end(), std::greater<int>());

    double idcg = 0.0;
    for (std::size_t i = 0; i < grades.size() && i < k; ++i) {
        idcg += grades[i] / std::log2(static_cast<double>(i + 2));
    }
    return idcg == 0.0 ? 0.0 : dcg / idcg;
}

MetricReport evaluate(const std::vector<RunEntry>& run, const Qrels& qrels) {
    // Group the run per query, ordered by the rank field.
    std::unordered_map<std::string, std::vector<const RunEntry*>> by_query;
    for (const RunEntry& e : run) by_query[e.query_id].push_back(&e);
    for (auto& [qid, entries] : by_query) {
        std::sort(entries.begin(), entries.end(),
                  [](const RunEntry* a, const RunEntry* b) { return a->rank < b->rank; });
    }

    MetricReport report;
    for (const auto& [qid, judgments] : qrels) {
        if (relevant_count(judgments) == 0) continue;  // trec_eval convention

        std::vector<std::string> ranked;
        auto it = by_query.find(qid);
        if (it != by_query.end()) {
            ranked.reserve(it->second.size());
            for (const RunEntry* e : it->second) ranked.push_back(e->doc_id);
        }

        MetricRow row;
        row.query_id = qid;
        row.map = average_precision(ranked, judgments);
        row.rp = r_precision(ranked, judgments);
        row.p5 = precision_at_k(ranked, judgments, 5);
        row.p20 = precision_at_k(ranked, judgments, 20);
        row.ndcg5 = ndcg_at_k(ranked, judgments, 5);
        row.ndcg20 = ndcg_at_k(ranked, judgments, 20);
        report.per_query.push_back(std::move(row));
    }

    report.mean.query_id = "all";
    if (!report.per_query.empty()) {
        double n = static_cast<double>(report.per_query.size());
        for (const MetricRow& row : report.per_query) {
            report.mean.map += row.map;
            report.mean.rp += row.rp;
            report.mean.p5 += row.p5;
            report.mean.p20 += row.p20;
            report.mean.ndcg5 += row.ndcg5;
            report.mean.ndcg20 += row.ndcg20;
        }
        report.mean.map /= n;
        report.mean.rp /= n;
        report.mean.p5 /= n;
        report.mean.p20 /= n;
        report.mean.ndcg5 /= n;
        report.mean.ndcg20 /= n;
    }
    return report;
}

std::string render_report(const MetricReport& report) {
    struct Field {
        const char* name;
        double MetricRow::* value;
    };
    static constexpr Field kFields[] = {
        {"map", &MetricRow::map},       {"rp", &MetricRow::rp},
        {"p5", &MetricRow::p5},         {"p20", &MetricRow::p20},
        {"ndcg5", &MetricRow::ndcg5},   {"ndcg20", &MetricRow::ndcg20},
    };

    std::ostringstream out;
    char buf[64];
    for (const Field& f : kFields) {
        for (const MetricRow& row : report.per_query) {
            std::snprintf(buf, sizeof(buf), "%.6f", row.*(f.value));
            out << f.name << '\t' << row.query_id << '\t' << buf << '\n';
        }
        std::snprintf(buf, sizeof(buf), "%.6f", report.mean.*(f.value));
        out << f.name << "\tall\t" << buf << '\n';
    }
    return out.str();
}

}  // namespace cssm
