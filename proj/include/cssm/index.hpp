// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cssm/text.hpp"

namespace cssm {

/// Okapi BM25 free parameters. Conventional defaults.
struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Inverted index over a corpus: postings with term frequencies, document
/// lengths and collection statistics. Built once, immutable afterwards,
/// safe for concurrent scoring.
///
/// BM25 uses the non-negative idf form ln(1 + (N - df + 0.5) / (df + 0.5)),
/// which never goes negative for very common terms.
class InvertedIndex {
public:
    struct Posting {
        std::uint32_t doc = 0;  // internal ordinal, corpus insertion order
        std::uint32_t tf = 0;
    };

    static InvertedIndex build(const Corpus& corpus, Bm25Params params = {});

    std::size_t doc_count() const { return doc_ids_.size(); }
    double avg_doc_length() const { return avg_doc_length_; }
    std::size_t vocabulary_size() const { return postings_.size(); }
    const Bm25Params& params() const { return params_; }

    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    std::uint32_t doc_length(std::string_view doc_id) const;

    /// Postings for a term sorted by doc_id (lexicographic), or empty.
    std::span<const Posting> postings(std::string_view term) const;

    /// ln(1 + (N - df + 0.5) / (df + 0.5)); strictly positive for df <= N.
    double idf(std::string_view term) const;

    /// BM25 score of one document for the query. Duplicate query terms
    /// contribute once per occurrence. Unknown doc_id is an error.
    double bm25_score(const Query& query, std::string_view doc_id) const;

    /// Number of distinct query terms present (tf >= 1) in the document.
    /// Unknown doc_id is an error.
    int co_occurrence(const Query& query, std::string_view doc_id) const;

    /// Term-at-a-time bulk scoring: BM25 per document ordinal. Contribution
    /// order per document matches bm25_score, so results are bit-identical.
    std::vector<double> bm25_all(const Query& query) const;

    /// Distinct-query-terms-present count per document ordinal.
    std::vector<int> co_all(const Query& query) const;

    /// Plain-text persistence: `stats.txt` (doc count plus one `docid length`
    /// line per document, insertion order) and `postings.txt` (one line per
    /// term: `term docid:tf docid:tf ...`, terms sorted). Round-trip is
    /// lossless; scores after load match the in-memory index bit for bit.
    void save(const std::string& dir) const;
    static InvertedIndex load(const std::string& dir, Bm25Params params = {});

private:
    InvertedIndex() = default;
    void finalize_stats();
    std::uint32_t ordinal_or_throw(std::string_view doc_id) const;

    Bm25Params params_;
    std::vector<std::string> doc_ids_;
    std::vector<std::uint32_t> doc_lengths_;
    std::unordered_map<std::string, std::uint32_t> id_to_ordinal_;
    std::vector<std::uint32_t> lex_rank_;  // ordinal -> rank of its id in sorted order
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    double avg_doc_length_ = 0.0;
};

}  // namespace cssm
