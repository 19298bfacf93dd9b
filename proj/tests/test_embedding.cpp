// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.

#include "cssm/embedding.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "test_util.hpp"

using namespace cssm;
using cssm::test::TempDir;
using cssm::test::write_file;

namespace {

// Scalar oracle, written against raw (unnormalized) vectors.
double cosine_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        ab += a[k] * b[k];
        aa += a[k] * a[k];
        bb += b[k] * b[k];
    }
    if (aa == 0 || bb == 0) return 0.0;
    return ab / (std::sqrt(aa) * std::sqrt(bb));
}

std::vector<double> random_vector(std::mt19937& rng, std::size_t d) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> v(d);
    for (double& x : v) x = u(rng);
    return v;
}

}  // namespace

TEST_CASE("load infers the dimension and counts entries") {
    TempDir dir;
    write_file(dir.file("v.txt"), "robot 1.0 0.5 0.25\ntechnology 0.1 -0.2 0.3\n");
    auto table = EmbeddingTable::load(dir.file("v.txt"));
    CHECK(table.dimension() == 3);
    CHECK(table.size() == 2);
    CHECK(table.contains("robot"));
    CHECK_FALSE(table.contains("cooking"));
}

TEST_CASE("load rejects dimension mismatches with the line number") {
    TempDir dir;
    write_file(dir.file("v.txt"), "a 1 2 3\nb 1 2 3 4\n");
    CHECK_THROWS_WITH_AS(EmbeddingTable::load(dir.file("v.txt")), doctest::Contains(":2:"),
                         std::runtime_error);
}

TEST_CASE("load rejects duplicate words") {
    TempDir dir;
    write_file(dir.file("v.txt"), "a 1 2\na 3 4\n");
    CHECK_THROWS_WITH_AS(EmbeddingTable::load(dir.file("v.txt")),
                         doctest::Contains("duplicate"), std::runtime_error);
}

TEST_CASE("load rejects a word2vec count-dim header") {
    TempDir dir;
    write_file(dir.file("v.txt"), "400000 50\nthe 0.1 0.2\n");
    CHECK_THROWS_WITH_AS(EmbeddingTable::load(dir.file("v.txt")), doctest::Contains("header"),
                         std::runtime_error);
}

TEST_CASE("vocabulary size equals an independent line count on a large file") {
    TempDir dir;
    std::ostringstream content;
    std::size_t lines = 0;
    std::mt19937 rng(11);
    for (int i = 0; i < 5000; ++i) {
        content << "w" << i;
        for (int k = 0; k < 50; ++k) {
            content << ' ' << std::uniform_real_distribution<double>(-1, 1)(rng);
        }
        content << '\n';
        ++lines;
    }
    write_file(dir.file("big.txt"), content.str());
    auto table = EmbeddingTable::load(dir.file("big.txt"));
    CHECK(table.dimension() == 50);
    CHECK(table.size() == lines);
}

TEST_CASE("cosine identities") {
    std::mt19937 rng(5);
    for (int iter = 0; iter < 50; ++iter) {
        auto v = random_vector(rng, 8);
        CHECK(cosine(v, v) == doctest::Approx(1.0).epsilon(1e-12));
    }
    std::vector<double> ex{1, 0}, ey{0, 1};
    CHECK(cosine(ex, ey) == 0.0);

    std::vector<double> a{1, 2}, b{2, 1};
    CHECK(cosine(a, b) == doctest::Approx(0.8).epsilon(1e-12));  // 4 / (sqrt5 * sqrt5)

    std::vector<double> zero{0, 0}, any{1, 1};
    CHECK(cosine(zero, any) == 0.0);
}

TEST_CASE("cosine is symmetric, scale-invariant and bounded") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> scale(0.001, 1000.0);
    for (int iter = 0; iter < 200; ++iter) {
        auto a = random_vector(rng, 6);
        auto b = random_vector(rng, 6);
        double ab = cosine(a, b);
        CHECK(ab == cosine(b, a));
        CHECK(ab >= -1.0);
        CHECK(ab <= 1.0);
        double c = scale(rng);
        auto scaled = a;
        for (double& x : scaled) x *= c;
        CHECK(cosine(scaled, b) == doctest::Approx(ab).epsilon(1e-12));
    }
}

TEST_CASE("similarity profile matches the per-cell scalar oracle") {
    EmbeddingTable table(2);
    std::vector<std::pair<std::string, std::vector<double>>> vectors = {
        {"robot", {1.0, 0.2}}, {"android", {0.9, 0.3}}, {"cooking", {-0.2, 1.0}},
        {"technology", {0.4, 0.6}},
    };
    for (auto& [w, v] : vectors) table.add(w, v);

    Query query{"q", {"robot", "technology"}};
    Document doc{"d", {"android", "cooking", "robot", "oov", "technology"}};
    auto profile = similarity_profile(query, doc, table);
    REQUIRE(profile.query_len() == 2);
    REQUIRE(profile.doc_len() == 5);

    auto vec_of = [&](const std::string& w) -> const std::vector<double>& {
        for (auto& [word, v] : vectors) {
            if (word == w) return v;
        }
        FAIL("unknown word");
        static std::vector<double> dummy;
        return dummy;
    };
    for (std::size_t i = 0; i < query.terms.size(); ++i) {
        for (std::size_t j = 0; j < doc.tokens.size(); ++j) {
            double expected =
                doc.tokens[j] == "oov" ? 0.0 : cosine_oracle(vec_of(query.terms[i]), vec_of(doc.tokens[j]));
            CHECK(profile.at(i, j) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("OOV query terms produce all-zero rows") {
    EmbeddingTable table(2);
    table.add("known", {1.0, 0.0});
    Query query{"q", {"unseen", "known"}};
    Document doc{"d", {"known", "known"}};
    auto profile = similarity_profile(query, doc, table);
    CHECK(profile.at(0, 0) == 0.0);
    CHECK(profile.at(0, 1) == 0.0);
    CHECK(profile.at(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("profile entries stay within [-1, 1] on random data") {
    std::mt19937 rng(23);
    EmbeddingTable table(4);
    std::vector<std::string> vocab;
    for (int i = 0; i < 30; ++i) {
        vocab.push_back("w" + std::to_string(i));
        table.add(vocab.back(), random_vector(rng, 4));
    }
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    Query query{"q", {vocab[pick(rng)], vocab[pick(rng)]}};
    Document doc{"d", {}};
    for (int j = 0; j < 40; ++j) doc.tokens.push_back(vocab[pick(rng)]);

    auto profile = similarity_profile(query, doc, table);
    for (std::size_t i = 0; i < profile.query_len(); ++i) {
        for (std::size_t j = 0; j < profile.doc_len(); ++j) {
            CHECK(profile.at(i, j) >= -1.0);
            CHECK(profile.at(i, j) <= 1.0);
        }
    }
}

TEST_CASE("zero-norm vectors behave as OOV in profiles") {
    EmbeddingTable table(2);
    table.add("ghost", {0.0, 0.0});
    table.add("solid", {1.0, 0.0});
    CHECK(table.squared_norm("ghost") == 0.0);
    CHECK(table.unit("ghost").empty());

    Query query{"q", {"solid"}};
    Document doc{"d", {"ghost", "solid"}};
    auto profile = similarity_profile(query, doc, table);
    CHECK(profile.at(0, 0) == 0.0);
    CHECK(profile.at(0, 1) == doctest::Approx(1.0));
}
