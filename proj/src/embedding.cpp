// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#include "cssm/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cssm {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
    return acc;
}

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

bool parse_double(const std::string& s, double& out) {
    std::size_t consumed = 0;
    try {
        out = std::stod(s, &consumed);
    } catch (const std::exception&) {
        return false;
    }
    return consumed == s.size();
}

bool is_nonneg_integer(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

void EmbeddingTable::add(std::string word, const std::vector<double>& vector) {
    if (vector.size() != dimension_) {
        throw std::runtime_error("vector dimension " + std::to_string(vector.size()) +
                                 " does not match table dimension " + std::to_string(dimension_));
    }
    if (rows_.count(word)) throw std::runtime_error("duplicate word: " + word);

    double sq = 0.0;
    for (double v : vector) sq += v * v;
    double norm = std::sqrt(sq);

    std::size_t row = norms_.size();
    units_.resize(units_.size() + dimension_, 0.0);
    if (norm > 0.0) {
        double* dst = units_.data() + row * dimension_;
        for (std::size_t k = 0; k < dimension_; ++k) dst[k] = vector[k] / norm;
    }
    // zero-norm vectors stay all-zero: cosine against them is defined as 0
    norms_.push_back(norm);
    rows_.emplace(std::move(word), row);
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::string line;
    std::size_t line_no = 0;
    EmbeddingTable table(0);
    std::vector<double> values;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string word;
        fields >> word;
        values.clear();
        std::string tok;
        double v = 0.0;
        while (fields >> tok) {
            if (!parse_double(tok, v)) {
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": non-numeric component: " + tok);
            }
            values.push_back(v);
        }
        if (line_no == 1 && values.size() == 1 && is_nonneg_integer(word)) {
            throw std::runtime_error(path + ": looks like a word2vec \"count dim\" header; "
                                     "expected plain text vectors `word f1 f2 ...`");
        }
        if (values.empty()) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": no vector components");
        }
        if (table.dimension_ == 0) table.dimension_ = values.size();
        if (values.size() != table.dimension_) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": dimension " +
                                     std::to_string(values.size()) + " does not match " +
                                     std::to_string(table.dimension_) + " from first line");
        }
        try {
            table.add(std::move(word), values);
        } catch (const std::runtime_error& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (table.size() == 0) throw std::runtime_error(path + ": no vectors");
    return table;
}

std::span<const double> EmbeddingTable::unit(std::string_view term) const {
    auto it = rows_.find(std::string(term));
    if (it == rows_.end()) return {};
    if (norms_[it->second] == 0.0) return {};
    return {units_.data() + it->second * dimension_, dimension_};
}

double EmbeddingTable::squared_norm(std::string_view term) const {
    auto it = rows_.find(std::string(term));
    if (it == rows_.end()) return 0.0;
    double n = norms_[it->second];
    return n * n;
}

bool EmbeddingTable::contains(std::string_view term) const {
    return rows_.count(std::string(term)) != 0;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        ab += a[k] * b[k];
        aa += a[k] * a[k];
        bb += b[k] * b[k];
    }
    if (aa == 0.0 || bb == 0.0) return 0.0;
    return clamp_unit(ab / (std::sqrt(aa) * std::sqrt(bb)));
}

SimilarityProfile similarity_profile(const Query& query, const Document& doc,
                                     const EmbeddingTable& table) {
    SimilarityProfile profile(query.terms.size(), doc.tokens.size());

    // Resolve each document token once; empty span marks OOV.
    std::vector<std::span<const double>> doc_units(doc.tokens.size());
    for (std::size_t j = 0; j < doc.tokens.size(); ++j) doc_units[j] = table.unit(doc.tokens[j]);

    for (std::size_t i = 0; i < query.terms.size(); ++i) {
        auto q_unit = table.unit(query.terms[i]);
        if (q_unit.empty()) continue;  // whole row stays 0.0
        for (std::size_t j = 0; j < doc.tokens.size(); ++j) {
            if (doc_units[j].empty()) continue;
            profile.at(i, j) = clamp_unit(dot(q_unit, doc_units[j]));
        }
    }
    return profile;
}

}  // namespace cssm
