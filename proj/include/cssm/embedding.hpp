// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cssm/text.hpp"

namespace cssm {

/// Pre-trained word vectors. Vectors are unit-normalized once at load so a
/// term-term similarity is a plain dot product; the original magnitude is
/// kept separately because query-term weighting needs it.
class EmbeddingTable {
public:
    explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

    /// Loads text-format vectors: `word f1 f2 ... fd`, space-separated,
    /// dimension inferred from the first line. A word2vec-style
    /// `count dim` header line is rejected; dimension mismatches and
    /// duplicate words are errors with line numbers.
    static EmbeddingTable load(const std::string& path);

    /// Inserts a raw (unnormalized) vector. Throws on duplicate words or
    /// dimension mismatch.
    void add(std::string word, const std::vector<double>& vector);

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return norms_.size(); }

    /// Unit vector for a term, or an empty span when out of vocabulary
    /// (or the stored vector had zero norm).
    std::span<const double> unit(std::string_view term) const;

    /// Squared magnitude of the original vector; 0.0 for OOV terms.
    double squared_norm(std::string_view term) const;

    bool contains(std::string_view term) const;

private:
    std::size_t dimension_;
    std::vector<double> units_;   // row-major, one row per word
    std::vector<double> norms_;   // original L2 norm per word
    std::unordered_map<std::string, std::size_t> rows_;
};

/// Cosine similarity (a.b)/(|a||b|), clamped to [-1, 1] to absorb rounding.
/// A zero-norm input yields 0.0 rather than NaN.
double cosine(std::span<const double> a, std::span<const double> b);

/// Per-query-term similarity rows over every document position: row i holds
/// s[i][j] = cosine(vec(q_i), vec(d_j)). OOV terms (either side) contribute
/// 0.0 cells.
class SimilarityProfile {
public:
    SimilarityProfile() = default;
    SimilarityProfile(std::size_t query_len, std::size_t doc_len)
        : query_len_(query_len), doc_len_(doc_len), cells_(query_len * doc_len, 0.0) {}

    std::size_t query_len() const { return query_len_; }
    std::size_t doc_len() const { return doc_len_; }

    double at(std::size_t i, std::size_t j) const { return cells_[i * doc_len_ + j]; }
    double& at(std::size_t i, std::size_t j) { return cells_[i * doc_len_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return {cells_.data() + i * doc_len_, doc_len_};
    }

private:
    std::size_t query_len_ = 0;
    std::size_t doc_len_ = 0;
    std::vector<double> cells_;
};

SimilarityProfile similarity_profile(const Query& query, const Document& doc,
                                     const EmbeddingTable& table);

}  // namespace cssm
