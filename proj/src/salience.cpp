// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#include "cssm/salience.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cssm {

int SalienceParams::effective_top_k() const {
    if (top_k >= 1) return top_k;
    return std::max(1, static_cast<int>(std::floor(std::log(static_cast<double>(window_width)))) + 1);
}

void SalienceParams::validate() const {
    if (window_width < 1) throw std::invalid_argument("window width must be >= 1");
    if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
    if (top_k < 0) throw std::invalid_argument("top-k override must be >= 1 (or 0 for derived)");
}

std::vector<double> top_n_max(std::span<const double> values, int n) {
    if (n < 1) throw std::invalid_argument("top_n_max: n must be >= 1");
    std::vector<double> out(values.begin(), values.end());
    if (out.size() < static_cast<std::size_t>(n)) out.resize(n, 0.0);
    std::partial_sort(out.begin(), out.begin() + n, out.end(), std::greater<double>());
    out.resize(n);
    return out;
}

double term_window_salience(std::span<const double> window_values,
                            const SalienceParams& params) {
    int k = params.effective_top_k();
    std::vector<double> top = top_n_max(window_values, k);
    double sum = 0.0;
    for (double v : top) sum += v;
    return top[0] + params.alpha * (sum / k);
}

QueryTermWeights query_term_weights(const Query& query, const EmbeddingTable& table) {
    if (query.terms.empty()) throw std::invalid_argument("query has no terms");

    std::vector<double> sq(query.terms.size());
    for (std::size_t i = 0; i < query.terms.size(); ++i) {
        sq[i] = table.squared_norm(query.terms[i]);
    }
    double max_sq = *std::max_element(sq.begin(), sq.end());

    QueryTermWeights w;
    w.g.resize(sq.size());
    double denom = 0.0;
    for (std::size_t i = 0; i < sq.size(); ++i) {
        w.g[i] = std::exp(sq[i] - max_sq);
        denom += w.g[i];
    }
    for (double& g : w.g) g /= denom;
    return w;
}

namespace {

std::size_t window_count(std::size_t doc_len, std::size_t width) {
    return doc_len > width ? doc_len - width + 1 : 1;
}

void check_inputs(const SimilarityProfile& profile, const QueryTermWeights& weights,
                  const SalienceParams& params) {
    params.validate();
    if (profile.query_len() == 0) throw std::invalid_argument("empty similarity profile");
    if (weights.g.size() != profile.query_len()) {
        throw std::invalid_argument("weight count does not match profile rows");
    }
}

/// Window values kept sorted ascending in one contiguous buffer; the top-K
/// reads from the tail. Insert/erase shift with memmove, which beats a
/// node-based structure by a wide margin at realistic window widths.
struct SortedWindow {
    std::vector<double> values;

    void insert(double v) {
        values.insert(std::upper_bound(values.begin(), values.end(), v), v);
    }

    void remove(double v) {
        values.erase(std::lower_bound(values.begin(), values.end(), v));
    }

    /// S(1) + alpha * (top-K sum) / K with the same zero-padding semantics
    /// as term_window_salience: when the window holds fewer than K values,
    /// padding zeros join the candidate set (so they cap a negative max and
    /// the denominator stays K). Summation runs largest-first, matching the
    /// reference exactly.
    double salience(int k, double alpha) const {
        double s1 = 0.0;
        double sum = 0.0;
        if (!values.empty()) {
            s1 = values.back();
            if (values.size() < static_cast<std::size_t>(k) && s1 < 0.0) s1 = 0.0;
            auto take = std::min(static_cast<std::size_t>(k), values.size());
            for (auto it = values.rbegin(); it != values.rbegin() + take; ++it) sum += *it;
        }
        return s1 + alpha * (sum / k);
    }
};

}  // namespace

DocumentSalience document_salience(const SimilarityProfile& profile,
                                   const QueryTermWeights& weights,
                                   const SalienceParams& params, bool keep_all_windows) {
    check_inputs(profile, weights, params);

    const std::size_t ql = profile.query_len();
    const std::size_t doc_len = profile.doc_len();
    const auto width = static_cast<std::size_t>(params.window_width);
    const int k = params.effective_top_k();
    const std::size_t windows = window_count(doc_len, width);
    const std::size_t window_size = std::min(width, doc_len);

    std::vector<SortedWindow> state(ql);
    for (std::size_t i = 0; i < ql; ++i) {
        auto row = profile.row(i);
        state[i].values.reserve(window_size + 1);
        for (std::size_t j = 0; j < window_size; ++j) state[i].insert(row[j]);
    }

    DocumentSalience result;
    result.best = {0, -std::numeric_limits<double>::infinity()};
    if (keep_all_windows) result.windows.reserve(windows);

    for (std::size_t p = 0; p < windows; ++p) {
        double joint = 0.0;
        for (std::size_t i = 0; i < ql; ++i) {
            joint += weights.g[i] * state[i].salience(k, params.alpha);
        }
        if (keep_all_windows) result.windows.push_back({p, joint});
        if (joint > result.best.score) result.best = {p, joint};

        if (p + 1 < windows) {
            for (std::size_t i = 0; i < ql; ++i) {
                auto row = profile.row(i);
                state[i].remove(row[p]);
                state[i].insert(row[p + width]);
            }
        }
    }
    return result;
}

namespace reference {

DocumentSalience document_salience(const SimilarityProfile& profile,
                                   const QueryTermWeights& weights,
                                   const SalienceParams& params, bool keep_all_windows) {
    check_inputs(profile, weights, params);

    const std::size_t ql = profile.query_len();
    const std::size_t doc_len = profile.doc_len();
    const auto width = static_cast<std::size_t>(params.window_width);
    const std::size_t windows = window_count(doc_len, width);

    DocumentSalience result;
    result.best = {0, -std::numeric_limits<double>::infinity()};
    if (keep_all_windows) result.windows.reserve(windows);

    for (std::size_t p = 0; p < windows; ++p) {
        std::size_t len = std::min(width, doc_len - p);
        double joint = 0.0;
        for (std::size_t i = 0; i < ql; ++i) {
            auto slice = profile.row(i).subspan(p, len);
            joint += weights.g[i] * term_window_salience(slice, params);
        }
        if (keep_all_windows) result.windows.push_back({p, joint});
        if (joint > result.best.score) result.best = {p, joint};
    }
    return result;
}

}  // namespace reference

std::vector<ExplainRecord> explain_profile(const Query& query, const Document& doc,
                                           const EmbeddingTable& table,
                                           const SalienceParams& params) {
    SimilarityProfile profile = similarity_profile(query, doc, table);
    QueryTermWeights weights = query_term_weights(query, table);
    DocumentSalience sal = document_salience(profile, weights, params);

    const std::size_t doc_len = doc.tokens.size();
    std::size_t begin = sal.best.start;
    std::size_t end = std::min(begin + static_cast<std::size_t>(params.window_width), doc_len);

    std::vector<ExplainRecord> records;
    records.reserve(doc_len);
    for (std::size_t j = 0; j < doc_len; ++j) {
        ExplainRecord rec;
        rec.position = j;
        rec.term = doc.tokens[j];
        rec.sims.resize(query.terms.size());
        for (std::size_t i = 0; i < query.terms.size(); ++i) rec.sims[i] = profile.at(i, j);
        rec.in_best_window = j >= begin && j < end;
        records.push_back(std::move(rec));
    }
    return records;
}

std::string render_explain(const Query& query, const std::vector<ExplainRecord>& records) {
    std::ostringstream out;
    out << "pos\tterm";
    for (std::size_t i = 1; i <= query.terms.size(); ++i) out << "\ts_q" << i;
    out << "\tin_best_window\n";

    char buf[64];
    for (const ExplainRecord& rec : records) {
        out << rec.position << '\t' << rec.term;
        for (double s : rec.sims) {
            std::snprintf(buf, sizeof(buf), "%.6f", s == 0.0 ? 0.0 : s);
            out << '\t' << buf;
        }
        out << '\t' << (rec.in_best_window ? 1 : 0) << '\n';
    }
    return out.str();
}

}  // namespace cssm
