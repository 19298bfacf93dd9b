// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#include "cssm/text.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace cssm {

namespace {

[[noreturn]] void fail(const std::string& path, std::size_t line_no, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

bool is_ascii_alnum(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool has_whitespace(std::string_view s) {
    for (unsigned char c : s) {
        if (std::isspace(c)) return true;
    }
    return false;
}

bool blank(std::string_view s) {
    for (unsigned char c : s) {
        if (!std::isspace(c)) return false;
    }
    return true;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

std::string format_score(double score) {
    if (score == 0.0) score = 0.0;  // normalize -0.0
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", score);
    return buf;
}

}  // namespace

Corpus::Corpus(std::vector<Document> docs) : docs_(std::move(docs)) {
    by_id_.reserve(docs_.size());
    for (std::size_t i = 0; i < docs_.size(); ++i) {
        auto [it, inserted] = by_id_.emplace(docs_[i].doc_id, i);
        if (!inserted) throw std::runtime_error("duplicate doc id: " + docs_[i].doc_id);
    }
}

const Document* Corpus::find(std::string_view doc_id) const {
    auto it = by_id_.find(std::string(doc_id));
    return it == by_id_.end() ? nullptr : &docs_[it->second];
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (is_ascii_alnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Corpus load_corpus(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) fail(path, line_no, "malformed JSON object");
        if (!j.contains("id") || !j["id"].is_string()) fail(path, line_no, "missing string field \"id\"");
        if (!j.contains("text") || !j["text"].is_string()) fail(path, line_no, "missing string field \"text\"");
        std::string id = j["id"].get<std::string>();
        if (id.empty()) fail(path, line_no, "empty doc id");
        if (has_whitespace(id)) fail(path, line_no, "doc id contains whitespace: " + id);
        if (!seen.insert(id).second) fail(path, line_no, "duplicate doc id: " + id);
        docs.push_back({std::move(id), tokenize(j["text"].get<std::string>())});
    }
    return Corpus(std::move(docs));
}

std::vector<Query> load_queries(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<Query> queries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) fail(path, line_no, "expected query_id<TAB>text");
        std::string qid = line.substr(0, tab);
        if (qid.empty() || has_whitespace(qid)) fail(path, line_no, "bad query id: \"" + qid + "\"");
        Query q{std::move(qid), tokenize(line.substr(tab + 1))};
        if (q.terms.empty()) {
            fail(path, line_no, "query " + q.query_id + " tokenizes to zero terms");
        }
        queries.push_back(std::move(q));
    }
    return queries;
}

std::vector<QrelEntry> read_qrels(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<QrelEntry> entries;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        std::istringstream fields(line);
        std::string qid, iter, docid, rel;
        if (!(fields >> qid >> iter >> docid >> rel)) {
            fail(path, line_no, "expected 4 columns: qid iter docid rel");
        }
        std::size_t consumed = 0;
        int relevance = 0;
        try {
            relevance = std::stoi(rel, &consumed);
        } catch (const std::exception&) {
            fail(path, line_no, "non-integer relevance: " + rel);
        }
        if (consumed != rel.size()) fail(path, line_no, "non-integer relevance: " + rel);
        if (relevance < 0) fail(path, line_no, "negative relevance: " + rel);
        if (!seen.insert(qid + '\0' + docid).second) {
            fail(path, line_no, "duplicate judgment for (" + qid + ", " + docid + ")");
        }
        entries.push_back({std::move(qid), std::move(docid), relevance});
    }
    return entries;
}

namespace {

void validate_run(const std::vector<RunEntry>& entries) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const RunEntry& e = entries[i];
        bool new_query = i == 0 || entries[i - 1].query_id != e.query_id;
        if (new_query) {
            if (e.rank != 1) throw std::runtime_error("run: ranks for query " + e.query_id + " do not start at 1");
            continue;
        }
        const RunEntry& prev = entries[i - 1];
        if (e.rank != prev.rank + 1) {
            throw std::runtime_error("run: non-consecutive ranks in query " + e.query_id);
        }
        if (e.score > prev.score) {
            throw std::runtime_error("run: scores increase with rank in query " + e.query_id);
        }
        // Tie order (ascending doc_id) is not checked here: scores render at
        // 6 decimals, so a reloaded file can show ties the raw scores never
        // had. Ranking enforces the tie rule where the order is created.
    }
}

}  // namespace

void write_run(const std::vector<RunEntry>& entries, const std::string& path) {
    validate_run(entries);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const RunEntry& e : entries) {
        out << e.query_id << " Q0 " << e.doc_id << ' ' << e.rank << ' '
            << format_score(e.score) << ' ' << e.tag << '\n';
    }
    if (!out) throw std::runtime_error("error writing " + path);
}

std::vector<RunEntry> load_run(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<RunEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        std::istringstream fields(line);
        RunEntry e;
        std::string q0;
        if (!(fields >> e.query_id >> q0 >> e.doc_id >> e.rank >> e.score >> e.tag)) {
            fail(path, line_no, "expected 6 columns: qid Q0 docid rank score tag");
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

void save_tokenized_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const Document& doc : corpus.docs()) {
        out << doc.doc_id;
        for (const std::string& tok : doc.tokens) out << ' ' << tok;
        out << '\n';
    }
    if (!out) throw std::runtime_error("error writing " + path);
}

Corpus load_tokenized_corpus(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<Document> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        Document doc;
        if (!(fields >> doc.doc_id)) fail(path, line_no, "missing doc id");
        std::string tok;
        while (fields >> tok) doc.tokens.push_back(std::move(tok));
        docs.push_back(std::move(doc));
    }
    return Corpus(std::move(docs));
}

}  // namespace cssm
