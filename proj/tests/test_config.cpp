#include <doctest.h>

#include <string>

#include "config.hpp"

using namespace qpspec::cli;

namespace {
std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}
}  // namespace

TEST_CASE("defaults and ranges") {
    auto c = parse_config("{}");
    CHECK(c.epsilon == std::vector<double>{0.1});
    CHECK(c.n == 1);
    CHECK(c.cocycle.iterations == 100000);
    CHECK(c.lambdan.seed[4] == 50.0);
    CHECK(c.hash.size() == 16);

    auto r = parse_config(R"({"alpha": {"min": 1, "max": 2, "count": 5}, "energy": 3.5})");
    auto a = r.alpha.values();
    REQUIRE(a.size() == 5);
    CHECK(a.front() == 1.0);
    CHECK(a[2] == 1.5);
    CHECK(a.back() == 2.0);
    CHECK(r.energy.values() == std::vector<double>{3.5});
    CHECK(parse_config(R"({"energy": {"min": 0, "max": 1, "count": 0}})").energy.values().empty());
}

TEST_CASE("errors name the offending field or line") {
    CHECK(error_of("{\n \"edges\": [0, 1,\n}").find("line 3") != std::string::npos);
    CHECK(error_of(R"({"colour": 1})").find("'colour'") != std::string::npos);
    CHECK(error_of(R"({"cocycle": {"tau": -1}})").find("cocycle.tau") != std::string::npos);
    CHECK(error_of(R"({"cocycle": {"bogus": 1}})").find("cocycle.bogus") != std::string::npos);
    CHECK(error_of(R"({"edges": [0, 2, 1]})").find("'edges'") != std::string::npos);
    CHECK(error_of(R"({"edges": [0, 1, 2, 3]})").find("'edges'") != std::string::npos);
    CHECK(error_of(R"({"alpha": {"min": 2, "max": 1, "count": 3}})").find("alpha.max") != std::string::npos);
    CHECK(error_of(R"({"energy": {"min": 0, "max": 1, "count": -1}})").find("energy.count") != std::string::npos);
    CHECK(error_of(R"({"lambdan": {"poles": [{"P": [1, 2], "t": [0, 0]}]}})").find("lambdan.poles[0]") !=
          std::string::npos);
    CHECK(error_of(R"({"lambdan": {"deltas": [1e-3, 1e-2]}})").find("lambdan.deltas") != std::string::npos);
    CHECK(error_of(R"({"cocycle": {"sigma": 2}})").find("cocycle.sigma") != std::string::npos);
    CHECK(error_of(R"({"cocycle": {"iterations": 10}})").find("cocycle.iterations") != std::string::npos);
    CHECK(error_of(R"({"n": 2, "edges": [0, 1, 2]})").find("'n'") != std::string::npos);
    CHECK(error_of(R"({"predict": {"Lambda": 0.5}})").find("predict.Lambda") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/qpspec.json"), ConfigError);
}

TEST_CASE("hash depends on resolved content only") {
    auto a = parse_config(R"({"epsilon": 0.1, "n": 1})");
    auto b = parse_config("{ \"n\" : 1 }");
    CHECK(a.hash == b.hash);
    auto c = parse_config(R"({"epsilon": 0.2})");
    CHECK(a.hash != c.hash);
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}
