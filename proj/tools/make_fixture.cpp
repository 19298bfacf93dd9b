// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
//
// Regenerates the bundled mini fixture: a synthetic 50-document corpus, 5
// queries, hand-made qrels, a 10-term toy embedding file, and the golden
// run/metric files. Goldens are produced by the serial reference pipeline
// (reference::document_salience plus per-document scoring), not by the
// production ranking path, so they stay an independent check on it.
//
// The corpus is constructed to exercise window clustering: for every query
// there are documents with the exact terms adjacent, documents with related
// terms adjacent (which lexical scoring underrates), and decoys carrying the
// exact terms far apart. Regeneration fails if the constructed fixture stops
// showing cssm-lf mean AP >= bm25 mean AP.
//
// Usage: cssm-make-fixture <output-dir>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "cssm/eval.hpp"
#include "cssm/index.hpp"
#include "cssm/ranker.hpp"
#include "cssm/salience.hpp"
#include "cssm/text.hpp"

using namespace cssm;

namespace {

struct Theme {
    std::string qid;
    std::string t1, t2;
    std::vector<std::string> syn_cluster;  // adjacent in "related terms" docs
    std::vector<std::string> off_topic;    // scattered flavor words for decoys
};

const std::vector<std::pair<std::string, std::string>> kVectors = {
    {"robot", "2.0 0.3 0.1 0.0 0.0 0.0"},
    {"android", "1.7 0.45 0.0 0.1 0.0 0.0"},
    {"machine", "1.5 0.5 0.2 0.0 0.1 0.0"},
    {"technology", "0.3 1.8 0.2 0.0 0.0 0.1"},
    {"science", "0.2 1.5 0.3 0.1 0.0 0.0"},
    {"cooking", "0.0 0.1 1.9 0.4 0.0 0.0"},
    {"recipe", "0.1 0.0 1.6 0.5 0.0 0.0"},
    {"garden", "0.0 0.1 0.4 1.8 0.2 0.0"},
    {"water", "0.0 0.0 0.3 1.5 0.4 0.0"},
    {"music", "0.0 0.2 0.0 0.1 1.9 0.3"},
};

const std::vector<Theme> kThemes = {
    {"q1", "robot", "technology", {"android", "machine", "science", "technology"},
     {"garden", "cooking"}},
    {"q2", "cooking", "recipe", {"recipe", "recipe", "recipe"}, {"music", "robot"}},
    {"q3", "garden", "water", {"water", "water", "water"}, {"science", "recipe"}},
    {"q4", "android", "science", {"robot", "machine", "technology", "science"},
     {"water", "music"}},
    {"q5", "music", "machine", {"music", "robot", "android"}, {"cooking", "garden"}},
};

class DocBuilder {
public:
    explicit DocBuilder(unsigned seed) : rng_(seed) {}

    std::string filler() { return "zz" + std::to_string(pick_(rng_)); }

    /// A document of `len` filler tokens with `insertions` placed at fixed
    /// positions (position -> token).
    std::vector<std::string> with_insertions(std::size_t len,
                                             const std::map<std::size_t, std::string>& insertions) {
        std::vector<std::string> tokens;
        for (std::size_t j = 0; j < len; ++j) {
            auto it = insertions.find(j);
            tokens.push_back(it != insertions.end() ? it->second : filler());
        }
        return tokens;
    }

    std::mt19937& rng() { return rng_; }

private:
    std::mt19937 rng_;
    std::uniform_int_distribution<int> pick_{0, 199};
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::string join(const std::vector<std::string>& tokens) {
    std::string s;
    for (const auto& t : tokens) {
        if (!s.empty()) s += ' ';
        s += t;
    }
    return s;
}

struct FixtureDoc {
    std::string id;
    std::vector<std::string> tokens;
};

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: cssm-make-fixture <output-dir>\n");
        return 1;
    }
    const std::string out_dir = argv[1];
    std::filesystem::create_directories(out_dir);
    std::filesystem::create_directories(out_dir + "/golden");

    DocBuilder builder(20240611);
    std::vector<FixtureDoc> docs;
    std::vector<QrelEntry> qrels;

    for (const Theme& theme : kThemes) {
        std::uniform_int_distribution<std::size_t> start(5, 20);

        // Exact terms, adjacent: t1 t2 t1. Strong for both scorers.
        for (int v = 1; v <= 2; ++v) {
            std::size_t at = start(builder.rng());
            std::map<std::size_t, std::string> ins{
                {at, theme.t1}, {at + 1, theme.t2}, {at + 2, theme.t1}};
            docs.push_back({theme.qid + "-exact-" + std::to_string(v),
                            builder.with_insertions(50, ins)});
            qrels.push_back({theme.qid, docs.back().id, 2});
        }

        // Related terms, adjacent. Lexical overlap is minimal; the window
        // scorer should still recognize the cluster.
        for (int v = 1; v <= 2; ++v) {
            std::size_t at = start(builder.rng());
            std::map<std::size_t, std::string> ins;
            for (std::size_t k = 0; k < theme.syn_cluster.size(); ++k) {
                ins[at + k] = theme.syn_cluster[k];
            }
            docs.push_back({theme.qid + "-rel-" + std::to_string(v),
                            builder.with_insertions(50, ins)});
            qrels.push_back({theme.qid, docs.back().id, 1});
        }

        // Decoys: both exact terms present but far apart, off-topic flavor
        // words scattered around. Judged non-relevant.
        for (int v = 1; v <= 2; ++v) {
            std::map<std::size_t, std::string> ins{
                {3, theme.t1}, {46, theme.t2},
                {15, theme.off_topic[0]}, {30, theme.off_topic[1]}};
            docs.push_back({theme.qid + "-decoy-" + std::to_string(v),
                            builder.with_insertions(50, ins)});
            qrels.push_back({theme.qid, docs.back().id, 0});
        }
    }

    // Unjudged background documents.
    std::uniform_int_distribution<std::size_t> bg_len(40, 60);
    std::uniform_int_distribution<std::size_t> vocab_pick(0, kVectors.size() - 1);
    for (int v = 1; v <= 20; ++v) {
        std::size_t len = bg_len(builder.rng());
        std::map<std::size_t, std::string> ins{
            {len / 4, kVectors[vocab_pick(builder.rng())].first},
            {(3 * len) / 4, kVectors[vocab_pick(builder.rng())].first}};
        docs.push_back({"bg-" + std::to_string(v), builder.with_insertions(len, ins)});
    }

    // ---- write fixture inputs ----
    {
        std::string jsonl;
        for (const FixtureDoc& d : docs) {
            nlohmann::json j{{"id", d.id}, {"text", join(d.tokens)}};
            jsonl += j.dump() + "\n";
        }
        write_file(out_dir + "/corpus.jsonl", jsonl);

        std::string queries;
        for (const Theme& t : kThemes) queries += t.qid + "\t" + t.t1 + " " + t.t2 + "\n";
        write_file(out_dir + "/queries.tsv", queries);

        std::string qrels_text;
        for (const QrelEntry& e : qrels) {
            qrels_text += e.query_id + " 0 " + e.doc_id + " " + std::to_string(e.relevance) + "\n";
        }
        write_file(out_dir + "/qrels.txt", qrels_text);

        std::string vectors;
        for (const auto& [word, comps] : kVectors) vectors += word + " " + comps + "\n";
        write_file(out_dir + "/vectors.txt", vectors);
    }

    // ---- reference pipeline: full-mode ranking with the serial reference scorer ----
    Corpus corpus = load_corpus(out_dir + "/corpus.jsonl");
    InvertedIndex index = InvertedIndex::build(corpus);
    EmbeddingTable table = EmbeddingTable::load(out_dir + "/vectors.txt");
    std::vector<Query> queries = load_queries(out_dir + "/queries.tsv");
    Qrels grouped = group_qrels(qrels);

    SalienceParams sal;  // defaults: L=30, alpha=0.1, derived K
    AggregationParams agg;  // defaults: beta=0.2, C=e

    std::map<std::string, double> mean_map;
    for (ScoringMode mode : {ScoringMode::bm25_only, ScoringMode::cssm_lf, ScoringMode::cssm_cw}) {
        std::vector<RunEntry> entries;
        for (const Query& query : queries) {
            QueryTermWeights weights = query_term_weights(query, table);
            struct Scored {
                std::string id;
                double score;
            };
            std::vector<Scored> scored;
            for (const Document& doc : corpus.docs()) {
                double bm25 = index.bm25_score(query, doc.doc_id);
                double score = bm25;
                if (mode != ScoringMode::bm25_only) {
                    SimilarityProfile profile = similarity_profile(query, doc, table);
                    double salience =
                        reference::document_salience(profile, weights, sal).best.score;
                    AggregationParams p = agg;
                    p.mode = mode;
                    score = mode == ScoringMode::cssm_cw
                                ? fuse_co_weighted(salience, bm25,
                                                   index.co_occurrence(query, doc.doc_id), p)
                                : fuse_linear(salience, bm25, p);
                }
                scored.push_back({doc.doc_id, score});
            }
            std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
                if (a.score != b.score) return a.score > b.score;
                return a.id < b.id;
            });
            for (std::size_t r = 0; r < scored.size(); ++r) {
                entries.push_back({query.query_id, scored[r].id, static_cast<int>(r + 1),
                                   scored[r].score, mode_name(mode)});
            }
        }

        std::string suffix = mode == ScoringMode::bm25_only ? "bm25"
                             : mode == ScoringMode::cssm_lf ? "cssm_lf"
                                                            : "cssm_cw";
        write_run(entries, out_dir + "/golden/run_" + suffix + ".txt");
        MetricReport report = evaluate(entries, grouped);
        write_file(out_dir + "/golden/eval_" + suffix + ".txt", render_report(report));
        mean_map[suffix] = report.mean.map;
        std::printf("%-8s mean AP %.6f\n", suffix.c_str(), report.mean.map);
    }

    if (mean_map["cssm_lf"] < mean_map["bm25"]) {
        std::fprintf(stderr, "fixture regression: cssm_lf mean AP %.6f < bm25 mean AP %.6f\n",
                     mean_map["cssm_lf"], mean_map["bm25"]);
        return 1;
    }
    std::printf("fixture written to %s\n", out_dir.c_str());
    return 0;
}
