#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "embedforge/core/error.hpp"
#include "embedforge/core/hash.hpp"
#include "embedforge/core/rng.hpp"
#include "embedforge/core/text.hpp"
#include "embedforge/core/toml.hpp"

using namespace embedforge;

TEST_CASE("rng streams are deterministic and independent") {
    RngStream a(42);
    RngStream b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RngStream c(derive_seed(42, 0));
    RngStream d(derive_seed(42, 1));
    CHECK(c.next_u64() != d.next_u64());
    CHECK(derive_seed(42, "alpha") != derive_seed(42, "beta"));
}

TEST_CASE("rng below is unbiased enough and in range") {
    RngStream rng(7);
    std::size_t counts[5] = {0, 0, 0, 0, 0};
    for (int i = 0; i < 50000; ++i) {
        const auto v = rng.below(5);
        REQUIRE(v < 5);
        counts[v]++;
    }
    for (std::size_t c : counts) {
        CHECK(c > 9200);  // expected 10000, allows ~8 sigma
        CHECK(c < 10800);
    }
}

TEST_CASE("rng real01 stays in [0,1)") {
    RngStream rng(3);
    for (int i = 0; i < 10000; ++i) {
        const double x = rng.real01();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
    }
}

TEST_CASE("sample_indices draws without replacement") {
    RngStream rng(11);
    const auto picked = rng.sample_indices(20, 8);
    REQUIRE(picked.size() == 8);
    std::set<std::size_t> unique(picked.begin(), picked.end());
    CHECK(unique.size() == 8);
    for (auto i : picked) CHECK(i < 20);

    const auto all = rng.sample_indices(5, 99);
    CHECK(all.size() == 5);
}

TEST_CASE("sha256 matches the known test vector") {
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("nfc normalization composes combining marks") {
    // e + COMBINING ACUTE ACCENT -> U+00E9
    CHECK(nfc_normalize("e\xcc\x81") == "\xc3\xa9");
    CHECK(nfc_normalize("plain ascii") == "plain ascii");
    CHECK_THROWS_AS((void)nfc_normalize("\xff\xfe"), Error);
}

TEST_CASE("tokenize lowercases and splits on whitespace") {
    const auto tokens = tokenize("  Hello\tWorld\nhello ");
    REQUIRE(tokens.size() == 3);
    CHECK(tokens[0] == "hello");
    CHECK(tokens[1] == "world");
    CHECK(tokens[2] == "hello");
}

TEST_CASE("toml subset covers tables, arrays of tables, and scalar types") {
    const auto doc = parse_toml(R"(
# campaign
seed = 42
budget_eur = 179.5
resume = true
name = "trial #1"   # inline comment after value
tags = ["a", "b"]

[route.nano]
model = "m-nano"

[[task]]
dataset = "d1"

[[task]]
dataset = "d2"
)");
    CHECK(doc["seed"].get<long>() == 42);
    CHECK(doc["budget_eur"].get<double>() == doctest::Approx(179.5));
    CHECK(doc["resume"].get<bool>() == true);
    CHECK(doc["name"].get<std::string>() == "trial #1");
    CHECK(doc["tags"].size() == 2);
    CHECK(doc["route"]["nano"]["model"].get<std::string>() == "m-nano");
    REQUIRE(doc["task"].size() == 2);
    CHECK(doc["task"][1]["dataset"].get<std::string>() == "d2");
}

TEST_CASE("toml errors carry the line number") {
    CHECK_THROWS_AS((void)parse_toml("key without equals\n"), Error);
    try {
        (void)parse_toml("\nbad line\n");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}
