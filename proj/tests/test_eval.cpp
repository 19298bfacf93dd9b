// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#include "cssm/eval.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace cssm;

namespace {

// ---------------------------------------------------------------------------
// Independent naive oracle, deliberately written in a different style: it
// walks the full ranking for every computation and never shares code with
// the implementation under test.
// ---------------------------------------------------------------------------

int naive_grade(const QueryJudgments& j, const std::string& d) {
    for (const auto& [doc, grade] : j) {
        if (doc == d) return grade;
    }
    return 0;
}

double naive_ap(const std::vector<std::string>& ranked, const QueryJudgments& j) {
    int total_rel = 0;
    for (const auto& [doc, g] : j) total_rel += g > 0 ? 1 : 0;
    if (total_rel == 0) return 0.0;
    double acc = 0.0;
    int seen_rel = 0;
    for (std::size_t r = 1; r <= ranked.size(); ++r) {
        if (naive_grade(j, ranked[r - 1]) > 0) {
            seen_rel += 1;
            double prec_here = 0.0;
            for (std::size_t t = 1; t <= r; ++t) {
                prec_here += naive_grade(j, ranked[t - 1]) > 0 ? 1.0 : 0.0;
            }
            acc += prec_here / static_cast<double>(r);
        }
    }
    return acc / total_rel;
}

double naive_p_at(const std::vector<std::string>& ranked, const QueryJudgments& j, std::size_t k) {
    double rel = 0;
    for (std::size_t r = 0; r < k; ++r) {
        if (r < ranked.size() && naive_grade(j, ranked[r]) > 0) rel += 1;
    }
    return k == 0 ? 0.0 : rel / static_cast<double>(k);
}

double naive_rp(const std::vector<std::string>& ranked, const QueryJudgments& j) {
    std::size_t big_r = 0;
    for (const auto& [doc, g] : j) big_r += g > 0 ? 1 : 0;
    return naive_p_at(ranked, j, big_r);
}

double naive_ndcg(const std::vector<std::string>& ranked, const QueryJudgments& j, std::size_t k) {
    double dcg = 0.0;
    for (std::size_t r = 1; r <= k && r <= ranked.size(); ++r) {
        dcg += naive_grade(j, ranked[r - 1]) / (std::log(r + 1.0) / std::log(2.0));
    }
    std::vector<int> ideal;
    for (const auto& [doc, g] : j) ideal.push_back(g);
    std::sort(ideal.rbegin(), ideal.rend());
    double idcg = 0.0;
    for (std::size_t r = 1; r <= k && r <= ideal.size(); ++r) {
        idcg += ideal[r - 1] / (std::log(r + 1.0) / std::log(2.0));
    }
    if (idcg <= 0.0) return 0.0;
    return dcg / idcg;
}

}  // namespace

TEST_CASE("average precision basics") {
    QueryJudgments j{{"a", 1}, {"b", 1}, {"x", 0}};

    SUBCASE("perfect ranking") {
        CHECK(average_precision({"a", "b", "x"}, j) == 1.0);
    }
    SUBCASE("relevant at ranks 1 and 3 with R = 2") {
        CHECK(average_precision({"a", "x", "b"}, j) ==
              doctest::Approx(0.83333).epsilon(1e-5));
    }
    SUBCASE("no relevant retrieved") {
        CHECK(average_precision({"x", "y", "z"}, j) == 0.0);
    }
    SUBCASE("unretrieved relevant documents still divide") {
        CHECK(average_precision({"a"}, j) == doctest::Approx(0.5));
    }
}

TEST_CASE("precision at k") {
    QueryJudgments j{{"a", 1}, {"b", 2}, {"c", 1}};
    CHECK(precision_at_k({"a", "x", "b", "y", "z"}, j, 5) == doctest::Approx(0.4));
    CHECK(precision_at_k({}, j, 5) == 0.0);
    // 3 retrieved, all relevant, k = 5: missing slots count against
    CHECK(precision_at_k({"a", "b", "c"}, j, 5) == doctest::Approx(0.6));
}

TEST_CASE("r-precision") {
    QueryJudgments j{{"a", 1}, {"b", 1}, {"x", 0}};  // R = 2
    CHECK(r_precision({"a", "b", "x"}, j) == 1.0);
    CHECK(r_precision({"a", "x", "b"}, j) == doctest::Approx(0.5));
}

TEST_CASE("ndcg at k") {
    SUBCASE("ideal ordering scores 1") {
        QueryJudgments j{{"a", 2}, {"b", 1}, {"c", 1}};
        CHECK(ndcg_at_k({"a", "b", "c"}, j, 5) == doctest::Approx(1.0));
    }
    SUBCASE("single relevant at rank 2") {
        QueryJudgments j{{"a", 1}};
        CHECK(ndcg_at_k({"x", "a", "y"}, j, 5) == doctest::Approx(0.63093).epsilon(1e-5));
    }
    SUBCASE("nothing relevant retrieved") {
        QueryJudgments j{{"a", 1}};
        CHECK(ndcg_at_k({"x", "y"}, j, 5) == 0.0);
    }
    SUBCASE("no judged relevant at all gives 0") {
        QueryJudgments j{{"a", 0}};
        CHECK(ndcg_at_k({"a"}, j, 5) == 0.0);
    }
}

TEST_CASE("binary qrels: ndcg is 1 when all relevant come first") {
    QueryJudgments j{{"a", 1}, {"b", 1}, {"c", 0}};
    CHECK(ndcg_at_k({"b", "a", "c", "z"}, j, 5) == doctest::Approx(1.0));
    CHECK(precision_at_k({"b", "a"}, j, 2) == 1.0);
}

TEST_CASE("metrics are invariant to permutations far below the cutoffs") {
    QueryJudgments j{{"a", 1}, {"b", 2}};
    std::vector<std::string> ranked{"a", "x", "b", "y"};
    for (int i = 0; i < 30; ++i) ranked.push_back("pad" + std::to_string(i));
    auto shuffled = ranked;
    // permute everything past rank 25 (beyond k=20, R=2, last relevant=3)
    std::mt19937 rng(4);
    std::shuffle(shuffled.begin() + 25, shuffled.end(), rng);

    CHECK(average_precision(ranked, j) == average_precision(shuffled, j));
    CHECK(r_precision(ranked, j) == r_precision(shuffled, j));
    CHECK(precision_at_k(ranked, j, 5) == precision_at_k(shuffled, j, 5));
    CHECK(precision_at_k(ranked, j, 20) == precision_at_k(shuffled, j, 20));
    CHECK(ndcg_at_k(ranked, j, 5) == ndcg_at_k(shuffled, j, 5));
    CHECK(ndcg_at_k(ranked, j, 20) == ndcg_at_k(shuffled, j, 20));
}

TEST_CASE("metrics match the naive oracle on randomized cases") {
    std::mt19937 rng(9);
    std::uniform_int_distribution<int> n_docs(0, 20);
    std::uniform_int_distribution<int> grade(0, 3);
    std::uniform_int_distribution<int> judge(0, 2);

    for (int iter = 0; iter < 500; ++iter) {
        QueryJudgments j;
        std::vector<std::string> pool;
        for (int d = 0; d < 20; ++d) pool.push_back("d" + std::to_string(d));
        for (const std::string& d : pool) {
            if (judge(rng) > 0) j[d] = grade(rng);
        }
        std::shuffle(pool.begin(), pool.end(), rng);
        std::vector<std::string> ranked(pool.begin(), pool.begin() + n_docs(rng));

        CAPTURE(iter);
        CHECK(average_precision(ranked, j) == doctest::Approx(naive_ap(ranked, j)).epsilon(1e-9));
        CHECK(r_precision(ranked, j) == doctest::Approx(naive_rp(ranked, j)).epsilon(1e-9));
        CHECK(precision_at_k(ranked, j, 5) ==
              doctest::Approx(naive_p_at(ranked, j, 5)).epsilon(1e-9));
        CHECK(ndcg_at_k(ranked, j, 5) == doctest::Approx(naive_ndcg(ranked, j, 5)).epsilon(1e-9));
        CHECK(ndcg_at_k(ranked, j, 20) == doctest::Approx(naive_ndcg(ranked, j, 20)).epsilon(1e-9));

        // every metric stays in [0, 1]
        for (double v : {average_precision(ranked, j), r_precision(ranked, j),
                         precision_at_k(ranked, j, 5), ndcg_at_k(ranked, j, 20)}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("evaluate aggregates per query and applies trec_eval conventions") {
    Qrels qrels = group_qrels({
        {"q1", "a", 1},
        {"q1", "b", 1},
        {"q2", "c", 1},
        {"q3", "zz", 0},  // no relevant docs: excluded entirely
    });

    std::vector<RunEntry> run = {
        {"q1", "a", 1, 2.0, "t"},
        {"q1", "b", 2, 1.0, "t"},
        {"q4", "a", 1, 9.0, "t"},  // not judged: ignored
        // q2 judged but missing from run: scores 0
    };

    MetricReport report = evaluate(run, qrels);
    REQUIRE(report.per_query.size() == 2);
    CHECK(report.per_query[0].query_id == "q1");
    CHECK(report.per_query[0].map == doctest::Approx(1.0));
    CHECK(report.per_query[1].query_id == "q2");
    CHECK(report.per_query[1].map == 0.0);
    CHECK(report.mean.map == doctest::Approx(0.5));
    CHECK(report.mean.query_id == "all");
}

TEST_CASE("report rendering is fixed-order TSV") {
    Qrels qrels = group_qrels({{"q1", "a", 1}});
    std::vector<RunEntry> run = {{"q1", "a", 1, 1.0, "t"}};
    std::string text = render_report(evaluate(run, qrels));
    CHECK(text ==
          "map\tq1\t1.000000\n"
          "map\tall\t1.000000\n"
          "rp\tq1\t1.000000\n"
          "rp\tall\t1.000000\n"
          "p5\tq1\t0.200000\n"
          "p5\tall\t0.200000\n"
          "p20\tq1\t0.050000\n"
          "p20\tall\t0.050000\n"
          "ndcg5\tq1\t1.000000\n"
          "ndcg5\tall\t1.000000\n"
          "ndcg20\tq1\t1.000000\n"
          "ndcg20\tall\t1.000000\n");
}
