// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#include "cssm/index.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace cssm {

namespace {

constexpr std::string_view kStatsMagic = "cssm.index.v1";

double bm25_contribution(double idf, double tf, double doc_len, double avg_len,
                         const Bm25Params& p) {
    double norm = tf + p.k1 * (1.0 - p.b + p.b * doc_len / avg_len);
    return idf * tf * (p.k1 + 1.0) / norm;
}

}  // namespace

InvertedIndex InvertedIndex::build(const Corpus& corpus, Bm25Params params) {
    if (corpus.size() == 0) throw std::runtime_error("cannot index an empty corpus");

    InvertedIndex index;
    index.params_ = params;
    index.doc_ids_.reserve(corpus.size());
    index.doc_lengths_.reserve(corpus.size());

    std::unordered_map<std::string, std::uint32_t> tf;
    for (const Document& doc : corpus.docs()) {
        auto ordinal = static_cast<std::uint32_t>(index.doc_ids_.size());
        index.id_to_ordinal_.emplace(doc.doc_id, ordinal);
        index.doc_ids_.push_back(doc.doc_id);
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(doc.tokens.size()));

        tf.clear();
        for (const std::string& tok : doc.tokens) ++tf[tok];
        for (const auto& [term, count] : tf) {
            index.postings_[term].push_back({ordinal, count});
        }
    }
    index.finalize_stats();
    return index;
}

void InvertedIndex::finalize_stats() {
    // Lexicographic rank per ordinal; postings sort and lookups key on it.
    std::vector<std::uint32_t> order(doc_ids_.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return doc_ids_[a] < doc_ids_[b]; });
    lex_rank_.assign(doc_ids_.size(), 0u);
    for (std::uint32_t rank = 0; rank < order.size(); ++rank) lex_rank_[order[rank]] = rank;

    for (auto& [term, list] : postings_) {
        std::sort(list.begin(), list.end(), [&](const Posting& a, const Posting& b) {
            return lex_rank_[a.doc] < lex_rank_[b.doc];
        });
    }

    unsigned long long total = 0;
    for (std::uint32_t len : doc_lengths_) total += len;
    avg_doc_length_ = doc_lengths_.empty() ? 0.0
                                           : static_cast<double>(total) / static_cast<double>(doc_lengths_.size());
}

std::uint32_t InvertedIndex::ordinal_or_throw(std::string_view doc_id) const {
    auto it = id_to_ordinal_.find(std::string(doc_id));
    if (it == id_to_ordinal_.end()) {
        throw std::runtime_error("unknown doc id: " + std::string(doc_id));
    }
    return it->second;
}

std::uint32_t InvertedIndex::doc_length(std::string_view doc_id) const {
    return doc_lengths_[ordinal_or_throw(doc_id)];
}

std::span<const InvertedIndex::Posting> InvertedIndex::postings(std::string_view term) const {
    auto it = postings_.find(std::string(term));
    if (it == postings_.end()) return {};
    return it->second;
}

double InvertedIndex::idf(std::string_view term) const {
    double n = static_cast<double>(doc_count());
    double df = static_cast<double>(postings(term).size());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double InvertedIndex::bm25_score(const Query& query, std::string_view doc_id) const {
    std::uint32_t ordinal = ordinal_or_throw(doc_id);
    std::uint32_t rank = lex_rank_[ordinal];
    double len = doc_lengths_[ordinal];

    double score = 0.0;
    for (const std::string& term : query.terms) {
        auto list = postings(term);
        if (list.empty()) continue;
        auto it = std::lower_bound(list.begin(), list.end(), rank,
                                   [&](const Posting& p, std::uint32_t r) { return lex_rank_[p.doc] < r; });
        if (it == list.end() || it->doc != ordinal) continue;
        score += bm25_contribution(idf(term), it->tf, len, avg_doc_length_, params_);
    }
    return score;
}

int InvertedIndex::co_occurrence(const Query& query, std::string_view doc_id) const {
    std::uint32_t ordinal = ordinal_or_throw(doc_id);
    std::uint32_t rank = lex_rank_[ordinal];

    std::unordered_set<std::string_view> counted;
    int co = 0;
    for (const std::string& term : query.terms) {
        if (!counted.insert(term).second) continue;
        auto list = postings(term);
        auto it = std::lower_bound(list.begin(), list.end(), rank,
                                   [&](const Posting& p, std::uint32_t r) { return lex_rank_[p.doc] < r; });
        if (it != list.end() && it->doc == ordinal) ++co;
    }
    return co;
}

std::vector<double> InvertedIndex::bm25_all(const Query& query) const {
    std::vector<double> scores(doc_count(), 0.0);
    for (const std::string& term : query.terms) {
        auto list = postings(term);
        if (list.empty()) continue;
        double term_idf = idf(term);
        for (const Posting& p : list) {
            scores[p.doc] += bm25_contribution(term_idf, p.tf, doc_lengths_[p.doc],
                                               avg_doc_length_, params_);
        }
    }
    return scores;
}

std::vector<int> InvertedIndex::co_all(const Query& query) const {
    std::vector<int> co(doc_count(), 0);
    std::unordered_set<std::string_view> counted;
    for (const std::string& term : query.terms) {
        if (!counted.insert(term).second) continue;
        for (const Posting& p : postings(term)) ++co[p.doc];
    }
    return co;
}

void InvertedIndex::save(const std::string& dir) const {
    std::filesystem::create_directories(dir);

    std::ofstream stats(dir + "/stats.txt", std::ios::binary);
    if (!stats) throw std::runtime_error("cannot write " + dir + "/stats.txt");
    stats << kStatsMagic << '\n' << doc_count() << '\n';
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
        stats << doc_ids_[i] << ' ' << doc_lengths_[i] << '\n';
    }
    if (!stats) throw std::runtime_error("error writing " + dir + "/stats.txt");

    std::ofstream out(dir + "/postings.txt", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + dir + "/postings.txt");
    std::map<std::string_view, const std::vector<Posting>*> sorted;
    for (const auto& [term, list] : postings_) sorted.emplace(term, &list);
    for (const auto& [term, list] : sorted) {
        out << term;
        for (const Posting& p : *list) out << ' ' << doc_ids_[p.doc] << ':' << p.tf;
        out << '\n';
    }
    if (!out) throw std::runtime_error("error writing " + dir + "/postings.txt");
}

InvertedIndex InvertedIndex::load(const std::string& dir, Bm25Params params) {
    const std::string stats_path = dir + "/stats.txt";
    std::ifstream stats(stats_path);
    if (!stats) throw std::runtime_error("cannot open " + stats_path);

    std::string magic;
    if (!std::getline(stats, magic) || magic != kStatsMagic) {
        throw std::runtime_error(stats_path + ": unrecognized index format (expected " +
                                 std::string(kStatsMagic) + ")");
    }

    InvertedIndex index;
    index.params_ = params;
    std::size_t n = 0;
    if (!(stats >> n)) throw std::runtime_error(stats_path + ": missing doc count");
    index.doc_ids_.reserve(n);
    index.doc_lengths_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string id;
        std::uint32_t len = 0;
        if (!(stats >> id >> len)) throw std::runtime_error(stats_path + ": truncated doc table");
        index.id_to_ordinal_.emplace(id, static_cast<std::uint32_t>(i));
        index.doc_ids_.push_back(std::move(id));
        index.doc_lengths_.push_back(len);
    }

    const std::string postings_path = dir + "/postings.txt";
    std::ifstream in(postings_path);
    if (!in) throw std::runtime_error("cannot open " + postings_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string term;
        fields >> term;
        auto& list = index.postings_[term];
        std::string cell;
        while (fields >> cell) {
            auto colon = cell.rfind(':');
            if (colon == std::string::npos) {
                throw std::runtime_error(postings_path + ":" + std::to_string(line_no) +
                                         ": expected docid:tf, got " + cell);
            }
            std::string doc_id = cell.substr(0, colon);
            auto it = index.id_to_ordinal_.find(doc_id);
            if (it == index.id_to_ordinal_.end()) {
                throw std::runtime_error(postings_path + ":" + std::to_string(line_no) +
                                         ": posting references unknown doc " + doc_id);
            }
            std::uint32_t tf = 0;
            try {
                tf = static_cast<std::uint32_t>(std::stoul(cell.substr(colon + 1)));
            } catch (const std::exception&) {
                throw std::runtime_error(postings_path + ":" + std::to_string(line_no) +
                                         ": bad term frequency in " + cell);
            }
            list.push_back({it->second, tf});
        }
        if (list.empty()) {
            throw std::runtime_error(postings_path + ":" + std::to_string(line_no) +
                                     ": term with no postings: " + term);
        }
    }
    index.finalize_stats();
    return index;
}

}  // namespace cssm
