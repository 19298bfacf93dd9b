// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "cssm/eval.hpp"
#include "cssm/index.hpp"
#include "cssm/ranker.hpp"
#include "cssm/salience.hpp"
#include "cssm/text.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

void apply_thread_cap(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

std::size_t parse_rerank_depth(const std::string& value) {
    if (value == "full") return 0;
    std::size_t consumed = 0;
    long long depth = 0;
    try {
        depth = std::stoll(value, &consumed);
    } catch (const std::exception&) {
        throw CLI::ValidationError("--rerank-depth", "expected a positive integer or 'full'");
    }
    if (consumed != value.size() || depth < 1) {
        throw CLI::ValidationError("--rerank-depth", "expected a positive integer or 'full'");
    }
    return static_cast<std::size_t>(depth);
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("error writing " + path);
}

struct RankFlags {
    std::string index_dir;
    std::string embeddings;
    std::string queries;
    std::string mode = "cssm-lf";
    double alpha = 0.1;
    double beta = 0.2;
    int window = 30;
    int top_k = 0;
    double co_constant = 2.718281828459045;
    std::string rerank_depth = "1000";
    std::string tag = "cssm";
    std::string out;
    int threads = 0;
};

int cmd_build_index(const std::string& corpus_path, const std::string& out_dir) {
    cssm::Corpus corpus = cssm::load_corpus(corpus_path);
    cssm::InvertedIndex index = cssm::InvertedIndex::build(corpus);
    index.save(out_dir);
    cssm::save_tokenized_corpus(corpus, out_dir + "/docs.txt");
    std::printf("indexed %zu documents, %zu terms, avg length %.3f\n", index.doc_count(),
                index.vocabulary_size(), index.avg_doc_length());
    return kExitOk;
}

int cmd_rank(const RankFlags& flags) {
    apply_thread_cap(flags.threads);

    cssm::AggregationParams agg;
    agg.mode = cssm::parse_mode(flags.mode);
    agg.beta = flags.beta;
    agg.C = flags.co_constant;
    agg.rerank_depth = parse_rerank_depth(flags.rerank_depth);
    agg.validate();

    cssm::SalienceParams sal;
    sal.window_width = flags.window;
    sal.alpha = flags.alpha;
    sal.top_k = flags.top_k;
    sal.validate();

    const bool semantic = agg.mode != cssm::ScoringMode::bm25_only;
    if (semantic && flags.embeddings.empty()) {
        throw std::runtime_error("mode " + flags.mode + " requires --embeddings");
    }

    cssm::InvertedIndex index = cssm::InvertedIndex::load(flags.index_dir);
    cssm::Corpus corpus = cssm::load_tokenized_corpus(flags.index_dir + "/docs.txt");
    std::optional<cssm::EmbeddingTable> table;
    if (semantic) table = cssm::EmbeddingTable::load(flags.embeddings);

    std::vector<cssm::Query> queries = cssm::load_queries(flags.queries);
    std::vector<cssm::RunEntry> all_entries;
    for (const cssm::Query& query : queries) {
        cssm::QuerySummary summary;
        auto entries = cssm::rank_query(query, corpus, index, table ? &*table : nullptr, sal,
                                        agg, flags.tag, &summary);
        if (summary.empty_warning) {
            std::fprintf(stderr, "warning: query %s has no in-vocabulary or indexed terms; "
                                 "emitting no results\n", query.query_id.c_str());
        } else {
            std::printf("%s: candidates=%zu top=%s best_window_start=%lld\n",
                        query.query_id.c_str(), summary.candidates_scored,
                        summary.top_doc_id.c_str(), summary.top_best_window_start);
        }
        all_entries.insert(all_entries.end(), entries.begin(), entries.end());
    }
    cssm::write_run(all_entries, flags.out);
    return kExitOk;
}

int cmd_eval(const std::string& qrels_path, const std::string& run_path) {
    cssm::Qrels qrels = cssm::group_qrels(cssm::read_qrels(qrels_path));
    std::vector<cssm::RunEntry> run = cssm::load_run(run_path);
    std::fputs(cssm::render_report(cssm::evaluate(run, qrels)).c_str(), stdout);
    return kExitOk;
}

int cmd_explain(const std::string& index_dir, const std::string& embeddings,
                const std::string& query_text, const std::string& doc_id,
                const cssm::SalienceParams& sal, const std::string& out_path) {
    sal.validate();
    cssm::Corpus corpus = cssm::load_tokenized_corpus(index_dir + "/docs.txt");
    const cssm::Document* doc = corpus.find(doc_id);
    if (doc == nullptr) throw std::runtime_error("unknown doc id: " + doc_id);

    cssm::Query query{"explain", cssm::tokenize(query_text)};
    if (query.terms.empty()) throw std::runtime_error("query text tokenizes to zero terms");

    cssm::EmbeddingTable table = cssm::EmbeddingTable::load(embeddings);
    auto records = cssm::explain_profile(query, *doc, table, sal);
    std::string tsv = cssm::render_explain(query, records);
    if (out_path.empty()) {
        std::fputs(tsv.c_str(), stdout);
    } else {
        write_text(out_path, tsv);
    }
    return kExitOk;
}

struct SweepFlags {
    std::string param;
    std::string values;
    std::string index_dir;
    std::string embeddings;
    std::string queries;
    std::string qrels;
    std::string mode = "cssm-lf";
    double alpha = 0.1;
    double beta = 0.2;
    int window = 30;
    int top_k = 0;
    double co_constant = 2.718281828459045;
    std::string rerank_depth = "1000";
    std::string out;
    int threads = 0;
};

std::vector<double> parse_sweep_values(const std::string& range) {
    std::istringstream in(range);
    std::string a, b, c;
    if (!std::getline(in, a, ':') || !std::getline(in, b, ':') || !std::getline(in, c)) {
        throw CLI::ValidationError("--values", "expected start:stop:step");
    }
    double start = 0, stop = 0, step = 0;
    try {
        start = std::stod(a);
        stop = std::stod(b);
        step = std::stod(c);
    } catch (const std::exception&) {
        throw CLI::ValidationError("--values", "expected numeric start:stop:step");
    }
    if (step <= 0 || stop < start) {
        throw CLI::ValidationError("--values", "need step > 0 and stop >= start");
    }
    std::vector<double> values;
    for (double v = start; v <= stop + 1e-9; v += step) values.push_back(v);
    return values;
}

/// Candidate data that stays fixed while a parameter sweeps: the BM25 pool
/// and the similarity profiles depend only on the index, the embeddings and
/// the tokens, never on alpha, beta or the window width.
struct CachedQuery {
    cssm::Query query;
    cssm::QueryTermWeights weights;
    std::vector<std::string> doc_ids;
    std::vector<double> bm25;
    std::vector<int> co;
    std::vector<cssm::SimilarityProfile> profiles;
};

int cmd_sweep(const SweepFlags& flags) {
    apply_thread_cap(flags.threads);

    if (flags.param != "alpha" && flags.param != "beta" && flags.param != "window") {
        throw CLI::ValidationError("--param", "expected alpha, beta or window");
    }
    std::vector<double> values = parse_sweep_values(flags.values);
    if (flags.param == "window") {
        for (double v : values) {
            if (v < 1 || v != std::floor(v)) {
                throw CLI::ValidationError("--values", "window values must be integers >= 1");
            }
        }
    }

    cssm::AggregationParams agg;
    agg.mode = cssm::parse_mode(flags.mode);
    agg.beta = flags.beta;
    agg.C = flags.co_constant;
    agg.rerank_depth = parse_rerank_depth(flags.rerank_depth);
    agg.validate();
    if (agg.mode == cssm::ScoringMode::bm25_only) {
        throw CLI::ValidationError("--mode", "sweeping needs a cssm mode");
    }

    cssm::SalienceParams sal;
    sal.window_width = flags.window;
    sal.alpha = flags.alpha;
    sal.top_k = flags.top_k;
    sal.validate();

    cssm::InvertedIndex index = cssm::InvertedIndex::load(flags.index_dir);
    cssm::Corpus corpus = cssm::load_tokenized_corpus(flags.index_dir + "/docs.txt");
    cssm::EmbeddingTable table = cssm::EmbeddingTable::load(flags.embeddings);
    cssm::Qrels qrels = cssm::group_qrels(cssm::read_qrels(flags.qrels));
    std::vector<cssm::Query> queries = cssm::load_queries(flags.queries);

    // Build the per-query candidate cache once.
    std::vector<CachedQuery> cache;
    for (const cssm::Query& query : queries) {
        CachedQuery cq;
        cq.query = query;

        bool any_indexed = false;
        for (const std::string& term : query.terms) {
            if (!index.postings(term).empty()) any_indexed = true;
        }
        bool any_in_vocab = false;
        for (const std::string& term : query.terms) {
            if (table.contains(term)) any_in_vocab = true;
        }
        if (!any_indexed && !any_in_vocab) {
            std::fprintf(stderr, "warning: query %s has no in-vocabulary or indexed terms; "
                                 "skipping\n", query.query_id.c_str());
            continue;
        }

        cq.weights = cssm::query_term_weights(query, table);
        std::vector<double> bm25 = index.bm25_all(query);
        std::vector<int> co = index.co_all(query);

        std::vector<std::uint32_t> pool;
        if (agg.rerank_depth == 0) {
            for (std::uint32_t d = 0; d < index.doc_count(); ++d) pool.push_back(d);
        } else {
            for (std::uint32_t d = 0; d < index.doc_count(); ++d) {
                if (co[d] > 0) pool.push_back(d);
            }
            std::sort(pool.begin(), pool.end(), [&](std::uint32_t a, std::uint32_t b) {
                if (bm25[a] != bm25[b]) return bm25[a] > bm25[b];
                return index.doc_ids()[a] < index.doc_ids()[b];
            });
            if (pool.size() > agg.rerank_depth) pool.resize(agg.rerank_depth);
        }

        cq.profiles.resize(pool.size());
        cq.doc_ids.resize(pool.size());
        cq.bm25.resize(pool.size());
        cq.co.resize(pool.size());
        const auto n = static_cast<long long>(pool.size());
#pragma omp parallel for schedule(dynamic, 8)
        for (long long i = 0; i < n; ++i) {
            const std::string& id = index.doc_ids()[pool[i]];
            const cssm::Document* doc = corpus.find(id);
            if (doc == nullptr) continue;
            cq.doc_ids[i] = id;
            cq.bm25[i] = bm25[pool[i]];
            cq.co[i] = co[pool[i]];
            cq.profiles[i] = cssm::similarity_profile(query, *doc, table);
        }
        for (const std::string& id : cq.doc_ids) {
            if (id.empty()) throw std::runtime_error("index and docs.txt disagree; rebuild the index");
        }
        cache.push_back(std::move(cq));
    }

    std::ostringstream report;
    report << "param\tvalue\tmap\trp\tp5\tp20\tndcg5\tndcg20\n";

    // Salience does not depend on beta, so a beta sweep scores windows once.
    std::vector<std::vector<double>> fixed_salience;
    if (flags.param == "beta") {
        fixed_salience.resize(cache.size());
        for (std::size_t qi = 0; qi < cache.size(); ++qi) {
            CachedQuery& cq = cache[qi];
            fixed_salience[qi].assign(cq.profiles.size(), 0.0);
            const auto n = static_cast<long long>(cq.profiles.size());
#pragma omp parallel for schedule(dynamic, 8)
            for (long long i = 0; i < n; ++i) {
                fixed_salience[qi][i] =
                    cssm::document_salience(cq.profiles[i], cq.weights, sal).best.score;
            }
        }
    }

    for (double value : values) {
        cssm::SalienceParams sal_v = sal;
        cssm::AggregationParams agg_v = agg;
        if (flags.param == "alpha") sal_v.alpha = value;
        if (flags.param == "beta") agg_v.beta = value;
        if (flags.param == "window") sal_v.window_width = static_cast<int>(value);

        std::vector<cssm::RunEntry> run;
        for (std::size_t qi = 0; qi < cache.size(); ++qi) {
            CachedQuery& cq = cache[qi];
            const auto n = static_cast<long long>(cq.profiles.size());
            std::vector<double> salience(cq.profiles.size(), 0.0);

            if (flags.param == "beta") {
                salience = fixed_salience[qi];
            } else {
#pragma omp parallel for schedule(dynamic, 8)
                for (long long i = 0; i < n; ++i) {
                    salience[i] =
                        cssm::document_salience(cq.profiles[i], cq.weights, sal_v).best.score;
                }
            }

            std::vector<std::size_t> order(cq.profiles.size());
            std::vector<double> score(cq.profiles.size());
            for (std::size_t i = 0; i < order.size(); ++i) {
                order[i] = i;
                score[i] = agg_v.mode == cssm::ScoringMode::cssm_cw
                               ? cssm::fuse_co_weighted(salience[i], cq.bm25[i], cq.co[i], agg_v)
                               : cssm::fuse_linear(salience[i], cq.bm25[i], agg_v);
            }
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (score[a] != score[b]) return score[a] > score[b];
                return cq.doc_ids[a] < cq.doc_ids[b];
            });
            for (std::size_t r = 0; r < order.size(); ++r) {
                run.push_back({cq.query.query_id, cq.doc_ids[order[r]], static_cast<int>(r + 1),
                               score[order[r]], "sweep"});
            }
        }

        cssm::MetricReport metrics = cssm::evaluate(run, qrels);
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s\t%g\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\n",
                      flags.param.c_str(), value, metrics.mean.map, metrics.mean.rp,
                      metrics.mean.p5, metrics.mean.p20, metrics.mean.ndcg5,
                      metrics.mean.ndcg20);
        report << buf;
    }

    if (flags.out.empty()) {
        std::fputs(report.str().c_str(), stdout);
    } else {
        write_text(flags.out, report.str());
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contextual-salience document ranking toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read long-option=value defaults from a file");

    // build-index
    std::string bi_corpus, bi_out;
    CLI::App* build = app.add_subcommand("build-index", "tokenize a JSONL corpus and persist the index");
    build->add_option("--corpus", bi_corpus, "JSONL corpus, one {\"id\",\"text\"} object per line")
        ->required();
    build->add_option("--out", bi_out, "output index directory")->required();

    // rank
    RankFlags rank;
    CLI::App* rank_cmd = app.add_subcommand("rank", "score queries and write a TREC run file");
    rank_cmd->add_option("--index", rank.index_dir, "index directory")
        ->required()
        ->envname("CSSM_INDEX");
    rank_cmd->add_option("--embeddings", rank.embeddings, "text-format word vectors")
        ->envname("CSSM_EMBEDDINGS");
    rank_cmd->add_option("--queries", rank.queries, "TSV queries: id<TAB>text")->required();
    rank_cmd->add_option("--mode", rank.mode, "bm25 | cssm-lf | cssm-cw")
        ->check(CLI::IsMember({"bm25", "cssm-lf", "cssm-cw"}));
    rank_cmd->add_option("--alpha", rank.alpha, "window interaction factor");
    rank_cmd->add_option("--beta", rank.beta, "BM25 fusion factor");
    rank_cmd->add_option("--window", rank.window, "window width in tokens");
    rank_cmd->add_option("--top-k", rank.top_k, "top-K override (0 = derived from window)");
    rank_cmd->add_option("--co-constant", rank.co_constant, "C in ln(co + C)");
    rank_cmd->add_option("--rerank-depth", rank.rerank_depth, "BM25 pool size or 'full'");
    rank_cmd->add_option("--tag", rank.tag, "run tag (last run file column)");
    rank_cmd->add_option("--out", rank.out, "output run file")->required();
    rank_cmd->add_option("--threads", rank.threads, "cap worker threads (0 = machine cores)");

    // eval
    std::string ev_qrels, ev_run;
    CLI::App* eval_cmd = app.add_subcommand("eval", "score a run file against qrels");
    eval_cmd->add_option("--qrels", ev_qrels, "TREC 4-column qrels")
        ->required()
        ->envname("CSSM_QRELS");
    eval_cmd->add_option("--run", ev_run, "TREC 6-column run file")->required();

    // explain
    std::string ex_index, ex_embeddings, ex_query, ex_doc, ex_out;
    cssm::SalienceParams ex_sal;
    CLI::App* explain_cmd =
        app.add_subcommand("explain", "dump the per-position similarity profile of one document");
    explain_cmd->add_option("--index", ex_index, "index directory")
        ->required()
        ->envname("CSSM_INDEX");
    explain_cmd->add_option("--embeddings", ex_embeddings, "text-format word vectors")
        ->required()
        ->envname("CSSM_EMBEDDINGS");
    explain_cmd->add_option("--query-text", ex_query, "raw query text")->required();
    explain_cmd->add_option("--doc-id", ex_doc, "document to explain")->required();
    explain_cmd->add_option("--window", ex_sal.window_width, "window width in tokens");
    explain_cmd->add_option("--alpha", ex_sal.alpha, "window interaction factor");
    explain_cmd->add_option("--top-k", ex_sal.top_k, "top-K override (0 = derived)");
    explain_cmd->add_option("--out", ex_out, "output TSV (default: stdout)");

    // sweep
    SweepFlags sweep;
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "evaluate a parameter range end to end, one run per value");
    sweep_cmd->add_option("--param", sweep.param, "alpha | beta | window")->required();
    sweep_cmd->add_option("--values", sweep.values, "start:stop:step")->required();
    sweep_cmd->add_option("--index", sweep.index_dir, "index directory")
        ->required()
        ->envname("CSSM_INDEX");
    sweep_cmd->add_option("--embeddings", sweep.embeddings, "text-format word vectors")
        ->required()
        ->envname("CSSM_EMBEDDINGS");
    sweep_cmd->add_option("--queries", sweep.queries, "TSV queries")->required();
    sweep_cmd->add_option("--qrels", sweep.qrels, "TREC 4-column qrels")
        ->required()
        ->envname("CSSM_QRELS");
    sweep_cmd->add_option("--mode", sweep.mode, "cssm-lf | cssm-cw")
        ->check(CLI::IsMember({"cssm-lf", "cssm-cw"}));
    sweep_cmd->add_option("--alpha", sweep.alpha, "fixed alpha while sweeping other params");
    sweep_cmd->add_option("--beta", sweep.beta, "fixed beta while sweeping other params");
    sweep_cmd->add_option("--window", sweep.window, "fixed window while sweeping other params");
    sweep_cmd->add_option("--top-k", sweep.top_k, "top-K override (0 = derived)");
    sweep_cmd->add_option("--co-constant", sweep.co_constant, "C in ln(co + C)");
    sweep_cmd->add_option("--rerank-depth", sweep.rerank_depth, "BM25 pool size or 'full'");
    sweep_cmd->add_option("--out", sweep.out, "output TSV (default: stdout)");
    sweep_cmd->add_option("--threads", sweep.threads, "cap worker threads (0 = machine cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand(build)) return cmd_build_index(bi_corpus, bi_out);
        if (app.got_subcommand(rank_cmd)) return cmd_rank(rank);
        if (app.got_subcommand(eval_cmd)) return cmd_eval(ev_qrels, ev_run);
        if (app.got_subcommand(explain_cmd)) {
            return cmd_explain(ex_index, ex_embeddings, ex_query, ex_doc, ex_sal, ex_out);
        }
        if (app.got_subcommand(sweep_cmd)) return cmd_sweep(sweep);
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return kExitUsage;
}
