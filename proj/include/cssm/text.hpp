// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cssm {

/// A tokenized document: unique id plus the ordered lowercase token stream.
/// Token order preserves source text order; positions are the vector indices.
struct Document {
    std::string doc_id;
    std::vector<std::string> tokens;
};

/// A tokenized query. Duplicate terms are permitted and kept.
struct Query {
    std::string query_id;
    std::vector<std::string> terms;
};

/// One TREC relevance judgment. relevance == 0 means judged non-relevant.
struct QrelEntry {
    std::string query_id;
    std::string doc_id;
    int relevance = 0;
};

/// One line of a TREC run file: `qid Q0 docid rank score tag`.
struct RunEntry {
    std::string query_id;
    std::string doc_id;
    int rank = 0;
    double score = 0.0;
    std::string tag;
};

/// A loaded corpus with O(1) lookup by doc id. Immutable after load.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<Document> docs);

    const std::vector<Document>& docs() const { return docs_; }
    std::size_t size() const { return docs_.size(); }

    /// nullptr when the id is unknown.
    const Document* find(std::string_view doc_id) const;

private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// Lowercases and splits on any non-alphanumeric byte. Empty tokens are
/// dropped. No stemming, no stopword removal: pre-trained vector
/// vocabularies are unstemmed surface forms and must stay matchable.
std::vector<std::string> tokenize(std::string_view text);

/// Reads a line-delimited JSON corpus, one object per line with string
/// fields "id" and "text". Blank lines are skipped. Throws on malformed
/// lines, missing fields, ids containing whitespace, or duplicate ids,
/// always naming the offending line number.
Corpus load_corpus(const std::string& path);

/// Reads tab-separated queries: `query_id<TAB>query text`. A line without
/// a tab or a query that tokenizes to zero terms is an error.
std::vector<Query> load_queries(const std::string& path);

/// Reads TREC 4-column qrels: `qid iter docid rel` (iter ignored).
/// Non-integer or negative relevance and duplicate (qid, docid) pairs are
/// errors with line numbers.
std::vector<QrelEntry> read_qrels(const std::string& path);

/// Writes a TREC run file: `qid Q0 docid rank score tag`, single spaces,
/// score with exactly 6 decimal places, one trailing newline per line.
/// Validates consecutive ranks per query and non-increasing scores before
/// writing; the ascending-doc_id tie rule is enforced where rankings are
/// built, since 6-decimal rendering can manufacture ties the raw scores
/// never had. Output is byte-identical across runs on identical input.
void write_run(const std::vector<RunEntry>& entries, const std::string& path);

/// Parses a run file back into entries, preserving file order.
std::vector<RunEntry> load_run(const std::string& path);

/// Forward token store used by the index directory so `rank` and `explain`
/// can recover token positions without the original corpus. One line per
/// document: `docid tok1 tok2 ...`, corpus order preserved.
void save_tokenized_corpus(const Corpus& corpus, const std::string& path);
Corpus load_tokenized_corpus(const std::string& path);

}  // namespace cssm
